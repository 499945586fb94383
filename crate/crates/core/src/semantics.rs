//! Exhaustive model checking over finite (tagged) models.
//!
//! Extensions are computed bottom-up as world sets. Propositional
//! quantifiers enumerate subsets of the domain in bit-counting order,
//! greatest fixpoints iterate downward from the full domain, action
//! modalities build the product with the ambient event model, and
//! announcements relativise.
//!
//! The default evaluator narrows the subset enumeration for `exists p`:
//! it skips it when `p` is irrelevant, restricts it to subsets of `A`
//! under a top-level guard `U(p -> A)`, and picks the extremal subset when
//! the rest of the body is monotone in `p`. [`Evaluator::naive`] turns all
//! of that off and is kept as a cross-check.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::bitset::{BitSet, WorldSet};
use crate::models::{build_product, EventModel, KripkeModel, ModelError, TaggedModel};
use crate::syntax::{Formula, Polarity};

/// Limits on subset enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalBudget {
    /// Largest set of candidate worlds a quantifier may enumerate subsets of.
    pub max_worlds_for_quantifier: usize,
    /// Cap on the total number of subset evaluations in one call.
    pub max_total_subset_enumerations: u64,
}

impl EvalBudget {
    pub const DEFAULT_WORLDS: usize = 16;
    pub const DEFAULT_ENUMERATIONS: u64 = 1 << 26;

    pub fn with_worlds(max_worlds_for_quantifier: usize) -> EvalBudget {
        EvalBudget {
            max_worlds_for_quantifier,
            ..EvalBudget::default()
        }
    }
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget {
            max_worlds_for_quantifier: Self::DEFAULT_WORLDS,
            max_total_subset_enumerations: Self::DEFAULT_ENUMERATIONS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("nominal j{index} evaluated outside the scope of an action modality")]
    NominalOutsideProductContext { index: usize },
    #[error("evaluation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("fixpoint variable `{var}` is not positive in its body")]
    PositivityViolation { var: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Evaluation state: the ambient event model, budget and enumeration count.
pub struct Evaluator<'a> {
    events: Option<&'a EventModel>,
    budget: EvalBudget,
    enumerations: u64,
    shortcuts: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(events: Option<&'a EventModel>, budget: EvalBudget) -> Self {
        Evaluator {
            events,
            budget,
            enumerations: 0,
            shortcuts: true,
        }
    }

    /// Plain subset enumeration over the whole domain for every quantifier.
    pub fn naive(events: Option<&'a EventModel>, budget: EvalBudget) -> Self {
        Evaluator {
            shortcuts: false,
            ..Evaluator::new(events, budget)
        }
    }

    /// Subset evaluations performed so far.
    pub fn enumerations(&self) -> u64 {
        self.enumerations
    }

    pub fn extension(&mut self, m: &TaggedModel, phi: &Formula) -> Result<WorldSet, EvalError> {
        let mut m = m.clone();
        self.ext(&mut m, phi)
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.enumerations += 1;
        if self.enumerations > self.budget.max_total_subset_enumerations {
            return Err(EvalError::BudgetExceeded(format!(
                "more than {} subset evaluations",
                self.budget.max_total_subset_enumerations
            )));
        }
        Ok(())
    }

    fn check_quantifier_size(&self, candidates: &WorldSet) -> Result<(), EvalError> {
        let n = candidates.count();
        if n > self.budget.max_worlds_for_quantifier {
            return Err(EvalError::BudgetExceeded(format!(
                "quantifier over {n} worlds (limit {})",
                self.budget.max_worlds_for_quantifier
            )));
        }
        Ok(())
    }

    fn ext(&mut self, m: &mut TaggedModel, f: &Formula) -> Result<WorldSet, EvalError> {
        let n = m.model.len();
        Ok(match f {
            Formula::Atom(p) => m.model.valuation(p),
            Formula::Nominal(i) => match &m.tags {
                Some(tags) => BitSet::from_indices(n, (0..n).filter(|&w| tags[w] == *i)),
                None => return Err(EvalError::NominalOutsideProductContext { index: *i }),
            },
            Formula::Top => BitSet::full(n),
            Formula::Bottom => BitSet::empty(n),
            Formula::Not(a) => self.ext(m, a)?.complement(),
            Formula::And(l, r) => {
                let mut x = self.ext(m, l)?;
                if !x.is_empty() {
                    x.intersect_with(&self.ext(m, r)?);
                }
                x
            }
            Formula::Or(l, r) => {
                let mut x = self.ext(m, l)?;
                if !x.is_full() {
                    x.union_with(&self.ext(m, r)?);
                }
                x
            }
            Formula::Implies(l, r) => {
                let mut x = self.ext(m, l)?.complement();
                if !x.is_full() {
                    x.union_with(&self.ext(m, r)?);
                }
                x
            }
            Formula::Box(a) => {
                let x = self.ext(m, a)?;
                BitSet::from_indices(n, (0..n).filter(|&w| m.model.successors(w).is_subset(&x)))
            }
            Formula::Diamond(a) => {
                let x = self.ext(m, a)?;
                BitSet::from_indices(n, (0..n).filter(|&w| m.model.successors(w).intersects(&x)))
            }
            Formula::Global(a) => {
                if self.ext(m, a)?.is_full() {
                    BitSet::full(n)
                } else {
                    BitSet::empty(n)
                }
            }
            Formula::ExistsGlobal(a) => {
                if self.ext(m, a)?.is_empty() {
                    BitSet::empty(n)
                } else {
                    BitSet::full(n)
                }
            }
            Formula::ExistsProp(p, body) => self.exists(m, p, body)?,
            Formula::ForallProp(p, body) => {
                let negated = Formula::not((**body).clone());
                self.exists(m, p, &negated)?.complement()
            }
            Formula::Nu(p, body) => self.nu(m, p, body)?,
            Formula::ActionDiamond(e, body) => self.action(m, e, body)?,
            Formula::Announce(a, body) => {
                let keep = self.ext(m, a)?.to_vec();
                let mut sub = m.restrict(&keep);
                let inner = self.ext(&mut sub, body)?;
                BitSet::from_indices(n, inner.iter().map(|i| keep[i]))
            }
        })
    }

    fn with_prop<T>(
        &mut self,
        m: &mut TaggedModel,
        p: &str,
        x: WorldSet,
        eval: impl FnOnce(&mut Self, &mut TaggedModel) -> T,
    ) -> T {
        let old = m.model.override_prop(p, x);
        let out = eval(self, m);
        m.model.restore_prop(p, old);
        out
    }

    fn exists(&mut self, m: &mut TaggedModel, p: &str, body: &Formula) -> Result<WorldSet, EvalError> {
        if !self.shortcuts {
            let all = m.model.all();
            self.check_quantifier_size(&all)?;
            let mut acc = m.model.no_worlds();
            for x in all.subsets() {
                self.tick()?;
                let y = self.with_prop(m, p, x, |ev, m| ev.ext(m, body))?;
                acc.union_with(&y);
                if acc.is_full() {
                    break;
                }
            }
            return Ok(acc);
        }

        if self.polarity(body, p) == Polarity::Absent {
            return self.ext(m, body);
        }

        // Look through a run of inner existentials for guards `U(p -> A)`.
        let mut binders: Vec<&str> = Vec::new();
        let mut matrix = body;
        while let Formula::ExistsProp(q, inner) = matrix {
            if q == p {
                break;
            }
            binders.push(q);
            matrix = inner;
        }
        let conjuncts = flatten_and(matrix);

        let mut domain = m.model.all();
        let mut rest: Vec<&Formula> = Vec::new();
        for c in &conjuncts {
            match guard_bound(c, p) {
                Some(a)
                    if self.polarity(a, p) == Polarity::Absent
                        && binders.iter().all(|q| self.polarity(a, q) == Polarity::Absent) =>
                {
                    domain.intersect_with(&self.ext(m, a)?);
                }
                _ => rest.push(c),
            }
        }

        let rest_polarity = rest
            .iter()
            .fold(Polarity::Absent, |acc, c| acc.join(self.polarity(c, p)));
        let candidates: Vec<WorldSet> = match rest_polarity {
            Polarity::Absent | Polarity::Positive => alloc::vec![domain],
            Polarity::Negative => alloc::vec![m.model.no_worlds()],
            Polarity::Mixed => {
                self.check_quantifier_size(&domain)?;
                domain.subsets().collect()
            }
        };

        // Without inner binders, conjuncts not mentioning p are evaluated once.
        let (base, dependent): (WorldSet, Vec<&Formula>) = if binders.is_empty() {
            let mut base = m.model.all();
            let mut dependent = Vec::new();
            for c in rest {
                if self.polarity(c, p) == Polarity::Absent {
                    if !base.is_empty() {
                        base.intersect_with(&self.ext(m, c)?);
                    }
                } else {
                    dependent.push(c);
                }
            }
            (base, dependent)
        } else {
            (m.model.all(), alloc::vec![body])
        };
        if base.is_empty() {
            return Ok(base);
        }

        let mut acc = m.model.no_worlds();
        for x in candidates {
            self.tick()?;
            let y = self.with_prop(m, p, x, |ev, m| {
                let mut y = base.clone();
                for c in &dependent {
                    if y.is_empty() {
                        break;
                    }
                    y.intersect_with(&ev.ext(m, c)?);
                }
                Ok::<_, EvalError>(y)
            })?;
            acc.union_with(&y);
            if acc == base {
                break;
            }
        }
        Ok(acc)
    }

    /// How the value of `f` depends on the extension of `p`, treating
    /// syntactically dead branches as absent and any precondition that
    /// mentions `p` as a mixed dependency.
    fn polarity(&self, f: &Formula, p: &str) -> Polarity {
        match f {
            Formula::Atom(q) if q == p => Polarity::Positive,
            Formula::Atom(_) | Formula::Nominal(_) | Formula::Top | Formula::Bottom => Polarity::Absent,
            f if f.binder().is_some_and(|v| v == p) => Polarity::Absent,
            Formula::Not(a) => self.polarity(a, p).flip(),
            Formula::And(l, r) if is_false(l) || is_false(r) => Polarity::Absent,
            Formula::Or(l, r) if is_true(l) || is_true(r) => Polarity::Absent,
            Formula::Implies(l, r) if is_false(l) || is_true(r) => Polarity::Absent,
            Formula::Implies(l, r) => self.polarity(l, p).flip().join(self.polarity(r, p)),
            Formula::ActionDiamond(_, body) => {
                let in_pre = self
                    .events
                    .is_some_and(|a| a.preconditions().iter().any(|pre| pre.occurs_free(p)));
                if in_pre {
                    Polarity::Mixed
                } else {
                    self.polarity(body, p)
                }
            }
            Formula::Announce(a, body) => {
                if self.polarity(a, p) == Polarity::Absent {
                    self.polarity(body, p)
                } else {
                    Polarity::Mixed
                }
            }
            _ => f
                .children()
                .into_iter()
                .fold(Polarity::Absent, |acc, c| acc.join(self.polarity(c, p))),
        }
    }

    fn nu(&mut self, m: &mut TaggedModel, p: &str, body: &Formula) -> Result<WorldSet, EvalError> {
        if !self.polarity(body, p).is_positive() || !body.polarity_of(p).is_positive() {
            return Err(EvalError::PositivityViolation { var: p.to_string() });
        }
        let mut x = m.model.all();
        // A monotone operator on n worlds stabilises within n + 1 rounds.
        for _ in 0..=m.model.len() {
            let y = self.with_prop(m, p, x.clone(), |ev, m| ev.ext(m, body))?;
            if y == x {
                return Ok(x);
            }
            x = y;
        }
        Err(EvalError::PositivityViolation { var: p.to_string() })
    }

    fn action(&mut self, m: &mut TaggedModel, event: &str, body: &Formula) -> Result<WorldSet, EvalError> {
        let a = self
            .events
            .ok_or_else(|| EvalError::UnknownEvent(event.to_string()))?;
        let e = a
            .event_index(event)
            .ok_or_else(|| EvalError::UnknownEvent(event.to_string()))?;
        let pre_ext = a
            .preconditions()
            .iter()
            .map(|pre| self.ext(m, pre))
            .collect::<Result<Vec<_>, _>>()?;
        let product = build_product(&m.model, a, &pre_ext);
        let mut tagged = product.tagged;
        let inner = self.ext(&mut tagged, body)?;
        let n = m.model.len();
        Ok(BitSet::from_indices(
            n,
            inner
                .iter()
                .map(|i| product.pairs[i])
                .filter(|&(_, f)| f == e)
                .map(|(w, _)| w),
        ))
    }
}

fn is_false(f: &Formula) -> bool {
    match f {
        Formula::Bottom => true,
        Formula::Not(a) => is_true(a),
        Formula::And(l, r) => is_false(l) || is_false(r),
        Formula::Or(l, r) => is_false(l) && is_false(r),
        _ => false,
    }
}

fn is_true(f: &Formula) -> bool {
    match f {
        Formula::Top => true,
        Formula::Not(a) => is_false(a),
        Formula::Or(l, r) => is_true(l) || is_true(r),
        Formula::And(l, r) => is_true(l) && is_true(r),
        Formula::Implies(l, r) => is_false(l) || is_true(r),
        _ => false,
    }
}

fn flatten_and(f: &Formula) -> Vec<&Formula> {
    let mut out = Vec::new();
    let mut stack = alloc::vec![f];
    while let Some(g) = stack.pop() {
        match g {
            Formula::And(l, r) => {
                stack.push(r);
                stack.push(l);
            }
            Formula::Top => {}
            other => out.push(other),
        }
    }
    out
}

/// `A` when `f` is `U(p -> A)`.
fn guard_bound<'f>(f: &'f Formula, p: &str) -> Option<&'f Formula> {
    match f {
        Formula::Global(inner) => match &**inner {
            Formula::Implies(l, r) if matches!(&**l, Formula::Atom(q) if q == p) => Some(r),
            _ => None,
        },
        _ => None,
    }
}

/// The set of worlds of `m` where `phi` holds. `events` is the ambient
/// event model that action modalities refer to.
pub fn extension(
    m: &TaggedModel,
    phi: &Formula,
    events: Option<&EventModel>,
    budget: &EvalBudget,
) -> Result<WorldSet, EvalError> {
    Evaluator::new(events, *budget).extension(m, phi)
}

pub fn holds(
    m: &TaggedModel,
    w: usize,
    phi: &Formula,
    events: Option<&EventModel>,
    budget: &EvalBudget,
) -> Result<bool, EvalError> {
    if w >= m.model.len() {
        return Err(ModelError::WorldOutOfModel(w).into());
    }
    Ok(extension(m, phi, events, budget)?.contains(w))
}

/// Greatest fixpoint by brute force: the union of every `X` with
/// `X ⊆ ⟦body⟧` under `p ↦ X`.
pub fn gfp_oracle(
    m: &KripkeModel,
    p: &str,
    body: &Formula,
    events: Option<&EventModel>,
    budget: &EvalBudget,
) -> Result<WorldSet, EvalError> {
    if !body.polarity_of(p).is_positive() {
        return Err(EvalError::PositivityViolation { var: p.to_string() });
    }
    Ok(post_fixpoints(m, p, body, events, budget)?
        .into_iter()
        .fold(m.no_worlds(), |acc, x| acc.union(&x)))
}

/// Every `X` with `X ⊆ ⟦body⟧` under `p ↦ X`, in bit-counting order.
pub fn post_fixpoints(
    m: &KripkeModel,
    p: &str,
    body: &Formula,
    events: Option<&EventModel>,
    budget: &EvalBudget,
) -> Result<Vec<WorldSet>, EvalError> {
    let mut ev = Evaluator::new(events, *budget);
    let all = m.all();
    ev.check_quantifier_size(&all)?;
    let mut out = Vec::new();
    for x in all.subsets() {
        ev.tick()?;
        let mx = TaggedModel::untagged(m.with_valuation(p, &x)?);
        if x.is_subset(&ev.extension(&mx, body)?) {
            out.push(x);
        }
    }
    Ok(out)
}

/// The operator `X ↦ ⟦body⟧` under `p ↦ X`.
pub fn apply_body(
    m: &KripkeModel,
    p: &str,
    body: &Formula,
    x: &WorldSet,
    events: Option<&EventModel>,
    budget: &EvalBudget,
) -> Result<WorldSet, EvalError> {
    extension(&TaggedModel::untagged(m.with_valuation(p, x)?), body, events, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{product_update, EventModel};
    use crate::parser::parse_formula;
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn ext(m: &KripkeModel, s: &str) -> Vec<usize> {
        extension(&m.clone().into(), &f(s), None, &EvalBudget::default())
            .unwrap()
            .to_vec()
    }

    fn ext_with(m: &KripkeModel, a: &EventModel, s: &str) -> Vec<usize> {
        extension(&m.clone().into(), &f(s), Some(a), &EvalBudget::default())
            .unwrap()
            .to_vec()
    }

    #[test]
    fn box_example() {
        let m = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w1")], &[("p", vec!["w1"])]).unwrap();
        assert_eq!(ext(&m, "[] p"), [0, 1]);
    }

    #[test]
    fn singleton_witness_recovers_atom() {
        let m = KripkeModel::from_names(
            &["w0", "w1", "w2"],
            &[("w0", "w1"), ("w2", "w2")],
            &[("p", vec!["w0", "w2"])],
        )
        .unwrap();
        assert_eq!(ext(&m, "exists q. (q & U(q -> p))"), [0, 2]);
    }

    #[test]
    fn nu_example_matches_hand_iteration() {
        let m = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w0"), ("w0", "w1")], &[("q", vec!["w0"])]).unwrap();
        assert!(ext(&m, "nu p. (q & [] p)").is_empty());
        let body = f("q & [] p");
        let oracle = gfp_oracle(&m, "p", &body, None, &EvalBudget::default()).unwrap();
        assert!(oracle.is_empty());
        // F(Ω) = {w0}, F({w0}) = ∅
        let step1 = apply_body(&m, "p", &body, &m.all(), None, &EvalBudget::default()).unwrap();
        assert_eq!(step1.to_vec(), [0]);
        let step2 = apply_body(&m, "p", &body, &step1, None, &EvalBudget::default()).unwrap();
        assert!(step2.is_empty());
    }

    #[test]
    fn action_examples_from_product() {
        let m = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w1"), ("w1", "w1")], &[("p", vec!["w0"])]).unwrap();
        let a = EventModel::from_names(
            &["a0", "a1"],
            &[("a0", "a0"), ("a0", "a1"), ("a1", "a1")],
            &[("a0", Formula::atom("p")), ("a1", Formula::Top)],
        )
        .unwrap();
        // brute force on the constructed product
        let prod = product_update(&m, &a).unwrap();
        let box_p = extension(&prod, &f("[] p"), None, &EvalBudget::default()).unwrap();
        let brute = |e: usize, sat: &WorldSet| -> Vec<usize> {
            (0..m.len())
                .filter(|&w| {
                    let name = alloc::format!("({},{})", m.world_name(w), a.event_name(e));
                    prod.model.world_index(&name).is_some_and(|i| sat.contains(i))
                })
                .collect()
        };
        let p_ext = extension(&prod, &f("p"), None, &EvalBudget::default()).unwrap();
        assert_eq!(brute(0, &p_ext), [0]);
        assert_eq!(brute(1, &box_p), Vec::<usize>::new());
        assert_eq!(ext_with(&m, &a, "<a0> p"), [0]);
        assert_eq!(ext_with(&m, &a, "<a1> [] p"), Vec::<usize>::new());
    }

    #[test]
    fn trivial_holds_examples() {
        let m = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w1")], &[("p", vec!["w1"])]).unwrap();
        let t: TaggedModel = m.clone().into();
        let b = EvalBudget::default();
        assert!(holds(&t, 0, &Formula::Top, None, &b).unwrap());
        assert_eq!(
            holds(&t, 0, &f("~p"), None, &b).unwrap(),
            !holds(&t, 0, &f("p"), None, &b).unwrap()
        );
        assert!(!holds(&t, 1, &f("U p"), None, &b).unwrap());
        assert!(holds(&t, 1, &f("E p"), None, &b).unwrap());
        assert!(holds(&t, 5, &Formula::Top, None, &b).is_err());
    }

    #[test]
    fn gfp_oracle_examples() {
        let m = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w0"), ("w0", "w1")], &[("q", vec!["w0"])]).unwrap();
        let b = EvalBudget::default();
        assert!(gfp_oracle(&m, "p", &f("p"), None, &b).unwrap().is_full());
        assert!(gfp_oracle(&m, "p", &f("false"), None, &b).unwrap().is_empty());
        assert!(matches!(
            gfp_oracle(&m, "p", &f("~p"), None, &b),
            Err(EvalError::PositivityViolation { .. })
        ));
    }

    #[test]
    fn unscoped_nominal_is_an_error() {
        let m = KripkeModel::from_names(&["w0"], &[], &[("p", vec!["w0"])]).unwrap();
        let r = extension(&m.into(), &f("j0"), None, &EvalBudget::default());
        assert_eq!(r, Err(EvalError::NominalOutsideProductContext { index: 0 }));
    }

    #[test]
    fn unknown_event_is_an_error() {
        let m = KripkeModel::from_names(&["w0"], &[], &[("p", vec!["w0"])]).unwrap();
        let a = EventModel::skip();
        let r = extension(&m.into(), &f("<b> p"), Some(&a), &EvalBudget::default());
        assert_eq!(r, Err(EvalError::UnknownEvent("b".into())));
    }

    #[test]
    fn budget_is_enforced() {
        let names: Vec<String> = (0..5).map(|i| alloc::format!("w{i}")).collect();
        let m = KripkeModel::new(names, [], []).unwrap();
        let tight = EvalBudget::with_worlds(4);
        let r = extension(&m.into(), &f("exists p. (p & ~[] p)"), None, &tight);
        assert!(matches!(r, Err(EvalError::BudgetExceeded(_))));
    }

    #[test]
    fn announcement_relativises() {
        let m = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w1")], &[("p", vec!["w0"])]).unwrap();
        // after announcing p, w0 has no successors
        assert_eq!(ext(&m, "<!p> [] false"), [0]);
        assert_eq!(ext(&m, "<!p> U p"), [0]);
        assert_eq!(ext(&m, "[!p] false"), [1]);
    }

    #[test]
    fn shortcuts_agree_with_naive_on_guarded_quantifiers() {
        let m = KripkeModel::from_names(
            &["w0", "w1", "w2"],
            &[("w0", "w1"), ("w1", "w2"), ("w2", "w0"), ("w1", "w1")],
            &[("q", vec!["w0", "w1"])],
        )
        .unwrap();
        let t: TaggedModel = m.into();
        for s in [
            "exists p. exists r. (U(p -> q) & U(r -> ~q) & <> (p | r) & ~[] p)",
            "exists p. (U(p -> q) & (p & ~<> p))",
            "forall p. (p -> <> p)",
            "exists p. (q & ~p & <> p)",
        ] {
            let phi = f(s);
            let fast = Evaluator::new(None, EvalBudget::default()).extension(&t, &phi).unwrap();
            let slow = Evaluator::naive(None, EvalBudget::default()).extension(&t, &phi).unwrap();
            assert_eq!(fast, slow, "{s}");
        }
    }
}
