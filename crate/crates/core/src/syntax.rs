//! Formula syntax: the AST, language strata, substitution and measures.
//!
//! The AST carries the primitive connectives of propositionally quantified
//! modal logic (atoms, `~`, `&`, `[]`, `exists`, `U`) together with action
//! nominals, action and announcement modalities, greatest fixpoints, and a
//! handful of derived connectives (`|`, `->`, `<>`, `forall`, `E`, `true`,
//! `false`). Derived nodes are kept as written so that translated output
//! stays readable; every semantic and measure operation treats them by
//! their expansion into primitives.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

/// Name of a proposition letter.
pub type PropName = String;

/// Prefix reserved for generated proposition names.
pub const FRESH_PREFIX: &str = "_f";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(PropName),
    /// Action nominal `j_i`: true at product worlds whose event is the i-th event.
    Nominal(usize),
    Top,
    Bottom,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Diamond(Box<Formula>),
    /// Universal modality `U`.
    Global(Box<Formula>),
    /// Existential modality `E`, i.e. `~U~`.
    ExistsGlobal(Box<Formula>),
    ExistsProp(PropName, Box<Formula>),
    ForallProp(PropName, Box<Formula>),
    /// Greatest fixpoint; the body must be positive in the bound variable.
    Nu(PropName, Box<Formula>),
    /// `<a> body`, where `a` names an event of the ambient event model.
    ActionDiamond(String, Box<Formula>),
    /// `<!announced> body`.
    Announce(Box<Formula>, Box<Formula>),
}

/// Language strata, ordered by the containment chain
/// `BaseMso < ActionMso < ScopedNominals < SentenceOnly`.
/// `MuFragment` sits outside the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LanguageTag {
    /// No nominals, no action or announcement modalities.
    BaseMso,
    /// Action and announcement modalities, no nominals.
    ActionMso,
    /// Every nominal lies under at least one action modality.
    ScopedNominals,
    /// Some nominal lies outside every action modality; has no semantics.
    SentenceOnly,
    /// Only `nu`, modal boxes and diamonds, Boolean connectives and atoms.
    MuFragment,
}

impl LanguageTag {
    /// Static languages: evaluable on any model with no event context and
    /// admissible as event preconditions.
    pub fn is_static(self) -> bool {
        matches!(self, LanguageTag::BaseMso | LanguageTag::MuFragment)
    }

    pub fn name(self) -> &'static str {
        match self {
            LanguageTag::BaseMso => "BaseMso",
            LanguageTag::ActionMso => "ActionMso",
            LanguageTag::ScopedNominals => "ScopedNominals",
            LanguageTag::SentenceOnly => "SentenceOnly",
            LanguageTag::MuFragment => "MuFragment",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("bound variable `{var}` occurs negatively in the body of its fixpoint")]
    PositivityViolation { var: PropName },
    #[error("quantifier count is undefined on formulas containing {node} nodes")]
    MeasureUndefined { node: &'static str },
}

impl Formula {
    pub fn atom(name: impl Into<PropName>) -> Formula {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }

    pub fn diamond(f: Formula) -> Formula {
        Formula::Diamond(Box::new(f))
    }

    pub fn global(f: Formula) -> Formula {
        Formula::Global(Box::new(f))
    }

    pub fn exists_global(f: Formula) -> Formula {
        Formula::ExistsGlobal(Box::new(f))
    }

    pub fn exists(var: impl Into<PropName>, body: Formula) -> Formula {
        Formula::ExistsProp(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<PropName>, body: Formula) -> Formula {
        Formula::ForallProp(var.into(), Box::new(body))
    }

    pub fn nu(var: impl Into<PropName>, body: Formula) -> Formula {
        Formula::Nu(var.into(), Box::new(body))
    }

    pub fn action(event: impl Into<String>, body: Formula) -> Formula {
        Formula::ActionDiamond(event.into(), Box::new(body))
    }

    pub fn announce(announced: Formula, body: Formula) -> Formula {
        Formula::Announce(Box::new(announced), Box::new(body))
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conjoin(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn disjoin(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::Bottom)
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Nominal(_) | Formula::Top | Formula::Bottom => Vec::new(),
            Formula::Not(f)
            | Formula::Box(f)
            | Formula::Diamond(f)
            | Formula::Global(f)
            | Formula::ExistsGlobal(f)
            | Formula::ExistsProp(_, f)
            | Formula::ForallProp(_, f)
            | Formula::Nu(_, f)
            | Formula::ActionDiamond(_, f) => alloc::vec![&**f],
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Announce(l, r) => alloc::vec![&**l, &**r],
        }
    }

    /// Rebuilds this node with its children mapped through `f`.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        let mut m = |x: &Formula| Box::new(f(x));
        match self {
            Formula::Atom(_) | Formula::Nominal(_) | Formula::Top | Formula::Bottom => self.clone(),
            Formula::Not(a) => Formula::Not(m(a)),
            Formula::Box(a) => Formula::Box(m(a)),
            Formula::Diamond(a) => Formula::Diamond(m(a)),
            Formula::Global(a) => Formula::Global(m(a)),
            Formula::ExistsGlobal(a) => Formula::ExistsGlobal(m(a)),
            Formula::ExistsProp(v, a) => Formula::ExistsProp(v.clone(), m(a)),
            Formula::ForallProp(v, a) => Formula::ForallProp(v.clone(), m(a)),
            Formula::Nu(v, a) => Formula::Nu(v.clone(), m(a)),
            Formula::ActionDiamond(e, a) => Formula::ActionDiamond(e.clone(), m(a)),
            Formula::And(l, r) => {
                let l = m(l);
                Formula::And(l, m(r))
            }
            Formula::Or(l, r) => {
                let l = m(l);
                Formula::Or(l, m(r))
            }
            Formula::Implies(l, r) => {
                let l = m(l);
                Formula::Implies(l, m(r))
            }
            Formula::Announce(l, r) => {
                let l = m(l);
                Formula::Announce(l, m(r))
            }
        }
    }

    /// All subformulas in pre-order, including `self`.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(f) = stack.pop() {
            out.push(f);
            let kids = f.children();
            stack.extend(kids.into_iter().rev());
        }
        out
    }

    /// Variable bound at this node, if it is a binder.
    pub fn binder(&self) -> Option<&PropName> {
        match self {
            Formula::ExistsProp(v, _) | Formula::ForallProp(v, _) | Formula::Nu(v, _) => Some(v),
            _ => None,
        }
    }

    /// Propositions occurring free; `exists`, `forall` and `nu` bind.
    /// Nominals are not propositions.
    pub fn free_props(&self) -> BTreeSet<PropName> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut BTreeSet<PropName>) {
        match self {
            Formula::Atom(p) => {
                if !bound.contains(&p.as_str()) {
                    out.insert(p.clone());
                }
            }
            Formula::ExistsProp(v, body) | Formula::ForallProp(v, body) | Formula::Nu(v, body) => {
                bound.push(v);
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Every proposition name mentioned, free or bound.
    pub fn all_props(&self) -> BTreeSet<PropName> {
        let mut out = BTreeSet::new();
        for f in self.subformulas() {
            match f {
                Formula::Atom(p) => {
                    out.insert(p.clone());
                }
                Formula::ExistsProp(v, _) | Formula::ForallProp(v, _) | Formula::Nu(v, _) => {
                    out.insert(v.clone());
                }
                _ => {}
            }
        }
        out
    }

    pub fn occurs_free(&self, p: &str) -> bool {
        match self {
            Formula::Atom(q) => q == p,
            f if f.binder().is_some_and(|v| v == p) => false,
            _ => self.children().into_iter().any(|c| c.occurs_free(p)),
        }
    }

    /// Number of free occurrences of `p`.
    pub fn free_occurrences(&self, p: &str) -> usize {
        match self {
            Formula::Atom(q) => usize::from(q == p),
            f if f.binder().is_some_and(|v| v == p) => 0,
            _ => self.children().into_iter().map(|c| c.free_occurrences(p)).sum(),
        }
    }

    pub fn nominals(&self) -> BTreeSet<usize> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Formula::Nominal(i) => Some(*i),
                _ => None,
            })
            .collect()
    }

    pub fn has_nominal(&self) -> bool {
        self.subformulas()
            .into_iter()
            .any(|f| matches!(f, Formula::Nominal(_)))
    }

    pub fn has_action(&self) -> bool {
        self.subformulas()
            .into_iter()
            .any(|f| matches!(f, Formula::ActionDiamond(..)))
    }

    pub fn has_announce(&self) -> bool {
        self.subformulas()
            .into_iter()
            .any(|f| matches!(f, Formula::Announce(..)))
    }

    pub fn has_nu(&self) -> bool {
        self.subformulas()
            .into_iter()
            .any(|f| matches!(f, Formula::Nu(..)))
    }

    /// Size of the primitive expansion: derived connectives count as the
    /// nodes of their definitions (`a | b` is `~(~a & ~b)`, `a -> b` is
    /// `~(a & ~b)`, `<>a` is `~[]~a`, `forall p. a` is `~exists p. ~a`,
    /// `E a` is `~U~a`). Constants and atoms count one.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Nominal(_) | Formula::Top | Formula::Bottom => 1,
            Formula::Not(a)
            | Formula::Box(a)
            | Formula::Global(a)
            | Formula::ExistsProp(_, a)
            | Formula::Nu(_, a)
            | Formula::ActionDiamond(_, a) => 1 + a.size(),
            Formula::Diamond(a) | Formula::ExistsGlobal(a) | Formula::ForallProp(_, a) => {
                3 + a.size()
            }
            Formula::And(l, r) | Formula::Announce(l, r) => 1 + l.size() + r.size(),
            Formula::Or(l, r) => 4 + l.size() + r.size(),
            Formula::Implies(l, r) => 3 + l.size() + r.size(),
        }
    }

    /// Nesting depth of `[]` and `<>`. Global modalities do not count;
    /// action and announcement modalities are transparent.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Box(a) | Formula::Diamond(a) => 1 + a.modal_depth(),
            Formula::Announce(l, r) => l.modal_depth().max(r.modal_depth()),
            _ => self
                .children()
                .into_iter()
                .map(Formula::modal_depth)
                .max()
                .unwrap_or(0),
        }
    }

    /// Number of propositional quantifiers (`forall` counts as the `exists`
    /// of its expansion). Undefined on `nu` and announcement nodes, which
    /// must be eliminated first.
    pub fn quantifier_count(&self) -> Result<usize, SyntaxError> {
        match self {
            Formula::Nu(..) => Err(SyntaxError::MeasureUndefined { node: "nu" }),
            Formula::Announce(..) => Err(SyntaxError::MeasureUndefined { node: "announcement" }),
            Formula::ExistsProp(_, a) | Formula::ForallProp(_, a) => Ok(1 + a.quantifier_count()?),
            _ => self
                .children()
                .into_iter()
                .try_fold(0, |acc, c| Ok(acc + c.quantifier_count()?)),
        }
    }

    /// Capture-avoiding substitution of `replacement` for the free
    /// occurrences of `target`. Bound variables that would capture a free
    /// variable of the replacement are renamed to fresh `_f` names.
    pub fn substitute(&self, target: &str, replacement: &Formula) -> Formula {
        let repl_free = replacement.free_props();
        self.subst_inner(target, replacement, &repl_free)
    }

    fn subst_inner(&self, target: &str, repl: &Formula, repl_free: &BTreeSet<PropName>) -> Formula {
        match self {
            Formula::Atom(p) if p == target => repl.clone(),
            Formula::Atom(_) => self.clone(),
            Formula::ExistsProp(v, body) | Formula::ForallProp(v, body) | Formula::Nu(v, body) => {
                if v == target || !body.occurs_free(target) {
                    return self.clone();
                }
                let (var, body) = if repl_free.contains(v) {
                    let mut avoid = body.all_props();
                    avoid.extend(repl_free.iter().cloned());
                    avoid.insert(target.to_string());
                    let fresh = fresh_props(1, &avoid).remove(0);
                    let renamed = body.subst_inner(v, &Formula::Atom(fresh.clone()), &BTreeSet::new());
                    (fresh, renamed)
                } else {
                    (v.clone(), (**body).clone())
                };
                let body = Box::new(body.subst_inner(target, repl, repl_free));
                match self {
                    Formula::ExistsProp(..) => Formula::ExistsProp(var, body),
                    Formula::ForallProp(..) => Formula::ForallProp(var, body),
                    _ => Formula::Nu(var, body),
                }
            }
            _ => self.map_children(|c| c.subst_inner(target, repl, repl_free)),
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha_eq(self, other, &mut Vec::new())
    }

    /// The least language tag admitting this formula; also validates
    /// fixpoint positivity.
    ///
    /// `nu` nodes count as abbreviations of their quantified encoding, so a
    /// formula mixing `nu` with quantifiers still classifies on the chain.
    pub fn classify(&self) -> Result<LanguageTag, SyntaxError> {
        self.check_positivity()?;
        if self.has_nu() && self.in_mu_fragment() {
            return Ok(LanguageTag::MuFragment);
        }
        if self.has_unscoped_nominal() {
            Ok(LanguageTag::SentenceOnly)
        } else if self.has_nominal() {
            Ok(LanguageTag::ScopedNominals)
        } else if self.has_action() || self.has_announce() {
            Ok(LanguageTag::ActionMso)
        } else {
            Ok(LanguageTag::BaseMso)
        }
    }

    fn in_mu_fragment(&self) -> bool {
        self.subformulas().into_iter().all(|f| {
            matches!(
                f,
                Formula::Atom(_)
                    | Formula::Top
                    | Formula::Bottom
                    | Formula::Not(_)
                    | Formula::And(..)
                    | Formula::Or(..)
                    | Formula::Implies(..)
                    | Formula::Box(_)
                    | Formula::Diamond(_)
                    | Formula::Nu(..)
            )
        })
    }

    /// True if some nominal is not under any action modality.
    pub fn has_unscoped_nominal(&self) -> bool {
        match self {
            Formula::Nominal(_) => true,
            Formula::ActionDiamond(..) => false,
            _ => self.children().into_iter().any(Formula::has_unscoped_nominal),
        }
    }

    /// Every `nu p. body` has each free occurrence of `p` in `body` under an
    /// even number of negations (the left side of `->` counts as one).
    pub fn check_positivity(&self) -> Result<(), SyntaxError> {
        for f in self.subformulas() {
            if let Formula::Nu(v, body) = f {
                if !body.polarity_of(v).is_positive() {
                    return Err(SyntaxError::PositivityViolation { var: v.clone() });
                }
            }
        }
        Ok(())
    }

    /// Syntactic polarity of the free occurrences of `p`. Occurrences
    /// inside an announced formula count as mixed.
    pub fn polarity_of(&self, p: &str) -> Polarity {
        match self {
            Formula::Atom(q) if q == p => Polarity::Positive,
            Formula::Atom(_) | Formula::Nominal(_) | Formula::Top | Formula::Bottom => Polarity::Absent,
            f if f.binder().is_some_and(|v| v == p) => Polarity::Absent,
            Formula::Not(a) => a.polarity_of(p).flip(),
            Formula::Implies(l, r) => l.polarity_of(p).flip().join(r.polarity_of(p)),
            Formula::Announce(a, body) => {
                if a.occurs_free(p) {
                    Polarity::Mixed
                } else {
                    body.polarity_of(p)
                }
            }
            _ => self
                .children()
                .into_iter()
                .fold(Polarity::Absent, |acc, c| acc.join(c.polarity_of(p))),
        }
    }
}

/// How a proposition occurs in a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Absent,
    Positive,
    Negative,
    Mixed,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            other => other,
        }
    }

    pub fn join(self, other: Polarity) -> Polarity {
        match (self, other) {
            (Polarity::Absent, x) | (x, Polarity::Absent) => x,
            (a, b) if a == b => a,
            _ => Polarity::Mixed,
        }
    }

    /// Absent or positive.
    pub fn is_positive(self) -> bool {
        matches!(self, Polarity::Absent | Polarity::Positive)
    }
}

fn alpha_eq<'a>(a: &'a Formula, b: &'a Formula, env: &mut Vec<(&'a str, &'a str)>) -> bool {
    use Formula as F;
    match (a, b) {
        (F::Atom(x), F::Atom(y)) => {
            for &(l, r) in env.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (F::ExistsProp(x, p), F::ExistsProp(y, q))
        | (F::ForallProp(x, p), F::ForallProp(y, q))
        | (F::Nu(x, p), F::Nu(y, q)) => {
            env.push((x, y));
            let eq = alpha_eq(p, q, env);
            env.pop();
            eq
        }
        (F::Nominal(i), F::Nominal(j)) => i == j,
        (F::ActionDiamond(e, p), F::ActionDiamond(g, q)) => e == g && alpha_eq(p, q, env),
        _ => {
            if core::mem::discriminant(a) != core::mem::discriminant(b) {
                return false;
            }
            let (ka, kb) = (a.children(), b.children());
            ka.len() == kb.len() && ka.into_iter().zip(kb).all(|(x, y)| alpha_eq(x, y, env))
        }
    }
}

/// `count` pairwise-distinct names `_f0, _f1, ...` skipping any in `avoid`.
pub fn fresh_props(count: usize, avoid: &BTreeSet<PropName>) -> Vec<PropName> {
    let mut out = Vec::with_capacity(count);
    let mut n = 0usize;
    while out.len() < count {
        let name = format!("{FRESH_PREFIX}{n}");
        if !avoid.contains(&name) {
            out.push(name);
        }
        n += 1;
    }
    out
}

/// User-facing proposition names may not start with `_`.
pub fn is_reserved_name(name: &str) -> bool {
    name.starts_with('_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p() -> Formula {
        Formula::atom("p")
    }
    fn q() -> Formula {
        Formula::atom("q")
    }

    fn set(names: &[&str]) -> BTreeSet<PropName> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn free_props_examples() {
        assert_eq!(Formula::exists("p", Formula::and(p(), q())).free_props(), set(&["q"]));
        assert_eq!(Formula::nu("p", Formula::boxed(p())).free_props(), set(&[]));
        let f = Formula::action("a0", Formula::and(p(), Formula::Nominal(0)));
        assert_eq!(f.free_props(), set(&["p"]));
    }

    #[test]
    fn quantifier_count_examples() {
        let f = Formula::exists("p", Formula::exists("q", Formula::and(p(), q())));
        assert_eq!(f.quantifier_count(), Ok(2));
        assert_eq!(Formula::boxed(p()).quantifier_count(), Ok(0));
        let g = Formula::exists("p", Formula::and(p(), Formula::not(Formula::exists("q", q()))));
        assert_eq!(g.quantifier_count(), Ok(2));
    }

    #[test]
    fn quantifier_count_rejects_nu_and_announce() {
        assert!(Formula::nu("p", p()).quantifier_count().is_err());
        assert!(Formula::announce(q(), p()).quantifier_count().is_err());
    }

    #[test]
    fn substitute_examples() {
        let rho = Formula::and(q(), Formula::Nominal(0));
        assert_eq!(
            Formula::boxed(p()).substitute("p", &rho),
            Formula::boxed(rho.clone())
        );

        let f = Formula::exists("q", Formula::and(p(), q()));
        let out = f.substitute("p", &q());
        let expected = Formula::exists("_f0", Formula::and(q(), Formula::atom("_f0")));
        assert_eq!(out, expected);
        assert!(out.alpha_eq(&Formula::exists("r", Formula::and(q(), Formula::atom("r")))));

        let g = Formula::exists("p", p());
        assert_eq!(g.substitute("p", &q()), g);
    }

    #[test]
    fn fresh_props_examples() {
        assert_eq!(fresh_props(2, &set(&["p", "q"])), vec!["_f0", "_f1"]);
        assert!(fresh_props(0, &set(&[])).is_empty());
        assert_eq!(fresh_props(1, &set(&["_f0"])), vec!["_f1"]);
    }

    #[test]
    fn classify_examples() {
        let f = Formula::exists("p", Formula::global(p()));
        assert_eq!(f.classify(), Ok(LanguageTag::BaseMso));
        let g = Formula::action("a0", Formula::Nominal(0));
        assert_eq!(g.classify(), Ok(LanguageTag::ScopedNominals));
        let h = Formula::and(Formula::Nominal(0), p());
        assert_eq!(h.classify(), Ok(LanguageTag::SentenceOnly));
        let a = Formula::announce(q(), Formula::action("a0", p()));
        assert_eq!(a.classify(), Ok(LanguageTag::ActionMso));
        let m = Formula::nu("p", Formula::and(q(), Formula::boxed(p())));
        assert_eq!(m.classify(), Ok(LanguageTag::MuFragment));
    }

    #[test]
    fn classify_rejects_negative_fixpoint() {
        let f = Formula::nu("p", Formula::not(p()));
        assert_eq!(
            f.classify(),
            Err(SyntaxError::PositivityViolation { var: "p".into() })
        );
        let g = Formula::nu("p", Formula::implies(p(), q()));
        assert!(g.classify().is_err());
        let ok = Formula::nu("p", Formula::not(Formula::not(p())));
        assert!(ok.classify().is_ok());
    }

    #[test]
    fn derived_sizes_follow_expansion() {
        assert_eq!(Formula::or(p(), q()).size(), 6);
        assert_eq!(Formula::implies(p(), q()).size(), 5);
        assert_eq!(Formula::forall("p", p()).size(), 4);
        assert_eq!(Formula::exists("p", Formula::not(p())).size(), 3);
    }

    #[test]
    fn alpha_eq_distinguishes_free_from_bound() {
        let a = Formula::exists("p", Formula::and(p(), q()));
        let b = Formula::exists("q", Formula::and(q(), q()));
        assert!(!a.alpha_eq(&b));
        let c = Formula::exists("r", Formula::and(Formula::atom("r"), q()));
        assert!(a.alpha_eq(&c));
    }
}
