//! Elimination of action and announcement modalities.
//!
//! `<a> psi` is pushed inward one connective at a time. Atoms, negation,
//! conjunction, boxes and the global modality use the usual reduction
//! axioms read off the product construction. Action nominals reduce to the
//! precondition of their event or to `false`. A propositional quantifier
//! under `<a>` is replaced by one fresh quantifier per event, each guarded
//! by that event's precondition, with the bound variable substituted by
//! `(q_0 & j0) | ... | (q_{n-1} & j{n-1})`. That substitution is quantifier
//! free, so every recursive call lowers the pair (quantifier count, size)
//! lexicographically; the trace records the pair at each call so the
//! descent can be checked.
//!
//! Announcements `<!A> psi` use the relativisation axioms, with
//! `<!A> exists p. phi` becoming `exists p. (U(p -> A) & <!A> phi)`.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::models::EventModel;
use crate::syntax::{fresh_props, Formula, LanguageTag, SyntaxError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("input is outside the sentence fragment ({0})")]
    InputNotSentenceFragment(String),
    #[error("nominal outside the scope of every action modality")]
    NominalOutsideActionScope,
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("announced formula is not static: {0}")]
    AnnouncedNotStatic(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

/// One recursive call of a translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: &'static str,
    /// Printed form of the dynamic formula being rewritten.
    pub at: String,
    /// Quantifier count of the argument.
    pub eps: usize,
    /// Size of the argument.
    pub size: usize,
    /// Index of the calling step within the same trace.
    pub parent: Option<usize>,
}

/// Result of [`eliminate_all`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationReport {
    pub input: Formula,
    pub output: Formula,
    pub input_size: usize,
    pub output_size: usize,
    /// Quantifier nodes in the input, counting each `nu` as the quantifier of its encoding.
    pub input_eps: usize,
    pub output_eps: usize,
    pub steps: Vec<RewriteStep>,
    pub notes: Vec<String>,
}

impl TranslationReport {
    /// Calls whose (quantifier count, size) did not drop strictly below the caller's.
    pub fn measure_violations(&self) -> Vec<usize> {
        measure_violations(&self.steps)
    }
}

/// Indices of steps that fail to decrease the measure relative to their parent.
pub fn measure_violations(steps: &[RewriteStep]) -> Vec<usize> {
    steps
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            s.parent
                .is_some_and(|p| (s.eps, s.size) >= (steps[p].eps, steps[p].size))
        })
        .map(|(i, _)| i)
        .collect()
}

/// Replaces every `nu p. body` by `exists p. (p & U(p -> body))`.
pub fn encode_nu(f: &Formula) -> Formula {
    match f {
        Formula::Nu(p, body) => nu_encoding(p, encode_nu(body)),
        _ => f.map_children(encode_nu),
    }
}

fn nu_encoding(p: &str, body: Formula) -> Formula {
    Formula::exists(
        p,
        Formula::and(
            Formula::atom(p),
            Formula::global(Formula::implies(Formula::atom(p), body)),
        ),
    )
}

/// Quantifier nodes, with `nu` counted once; defined on every formula.
pub fn quantifier_nodes(f: &Formula) -> usize {
    f.subformulas()
        .into_iter()
        .filter(|g| matches!(g, Formula::ExistsProp(..) | Formula::ForallProp(..) | Formula::Nu(..)))
        .count()
}

fn check_sentence(psi: &Formula, allow_nu: bool) -> Result<(), TranslateError> {
    for g in psi.subformulas() {
        let bad = match g {
            Formula::ActionDiamond(..) => Some("action modality"),
            Formula::Announce(..) => Some("announcement"),
            Formula::Nu(..) if !allow_nu => Some("fixpoint"),
            _ => None,
        };
        if let Some(what) = bad {
            return Err(TranslateError::InputNotSentenceFragment(what.to_string()));
        }
    }
    Ok(())
}

struct Tracer {
    steps: Vec<RewriteStep>,
}

impl Tracer {
    fn record(&mut self, rule: &'static str, at: String, arg: &Formula, parent: Option<usize>) -> usize {
        // Arguments here never contain nu or announcement nodes.
        let eps = arg.quantifier_count().unwrap_or(usize::MAX);
        self.steps.push(RewriteStep {
            rule,
            at,
            eps,
            size: arg.size(),
            parent,
        });
        self.steps.len() - 1
    }
}

struct EventTranslator<'a> {
    events: &'a EventModel,
    pre: Vec<Formula>,
    pre_props: BTreeSet<String>,
    tracer: Tracer,
}

impl EventTranslator<'_> {
    fn pre(&self, e: usize) -> Formula {
        self.pre[e].clone()
    }

    fn translate(&mut self, e: usize, psi: &Formula, parent: Option<usize>) -> Formula {
        let rule = match psi {
            Formula::Atom(_) => "atom",
            Formula::Nominal(k) if *k == e => "nominal-same",
            Formula::Nominal(_) => "nominal-other",
            Formula::Top => "top",
            Formula::Bottom => "bottom",
            Formula::Not(_) => "not",
            Formula::And(..) => "and",
            Formula::Or(..) => "or",
            Formula::Implies(..) => "implies",
            Formula::Box(_) => "box",
            Formula::Diamond(_) => "diamond",
            Formula::Global(_) => "global",
            Formula::ExistsGlobal(_) => "exists-global",
            Formula::ExistsProp(..) => "exists",
            Formula::ForallProp(..) => "forall",
            Formula::Nu(..) | Formula::ActionDiamond(..) | Formula::Announce(..) => {
                unreachable!("checked before translation")
            }
        };
        let at = alloc::format!("<{}> {}", self.events.event_name(e), Operand(psi));
        let me = Some(self.tracer.record(rule, at, psi, parent));
        let n = self.events.len();
        match psi {
            Formula::Atom(_) => Formula::and(self.pre(e), psi.clone()),
            Formula::Nominal(k) if *k == e => self.pre(e),
            Formula::Nominal(_) | Formula::Bottom => Formula::Bottom,
            Formula::Top => self.pre(e),
            Formula::Not(g) => Formula::and(self.pre(e), Formula::not(self.translate(e, g, me))),
            Formula::And(g, d) => {
                let l = self.translate(e, g, me);
                Formula::and(l, self.translate(e, d, me))
            }
            Formula::Or(g, d) => {
                let l = self.translate(e, g, me);
                Formula::or(l, self.translate(e, d, me))
            }
            Formula::Implies(g, d) => {
                let l = self.translate(e, g, me);
                let r = self.translate(e, d, me);
                Formula::and(self.pre(e), Formula::implies(l, r))
            }
            Formula::Box(g) => {
                let succ: Vec<usize> = self.events.successors(e).iter().collect();
                let parts: Vec<Formula> = succ
                    .into_iter()
                    .map(|f| {
                        let inner = self.translate(f, g, me);
                        Formula::boxed(Formula::implies(self.pre(f), inner))
                    })
                    .collect();
                Formula::and(self.pre(e), Formula::conjoin(parts))
            }
            Formula::Diamond(g) => {
                let succ: Vec<usize> = self.events.successors(e).iter().collect();
                let parts: Vec<Formula> = succ
                    .into_iter()
                    .map(|f| Formula::diamond(self.translate(f, g, me)))
                    .collect();
                Formula::and(self.pre(e), Formula::disjoin(parts))
            }
            Formula::Global(g) => {
                let parts: Vec<Formula> = (0..n)
                    .map(|f| {
                        let inner = self.translate(f, g, me);
                        Formula::global(Formula::implies(self.pre(f), inner))
                    })
                    .collect();
                Formula::and(self.pre(e), Formula::conjoin(parts))
            }
            Formula::ExistsGlobal(g) => {
                let parts: Vec<Formula> = (0..n)
                    .map(|f| Formula::exists_global(self.translate(f, g, me)))
                    .collect();
                Formula::and(self.pre(e), Formula::disjoin(parts))
            }
            Formula::ExistsProp(p, g) => {
                let mut avoid = g.all_props();
                avoid.extend(self.pre_props.iter().cloned());
                let fresh = fresh_props(n, &avoid);
                let split = Formula::disjoin(
                    fresh
                        .iter()
                        .enumerate()
                        .map(|(i, q)| Formula::and(Formula::atom(q.as_str()), Formula::Nominal(i))),
                );
                let body = g.substitute(p, &split);
                let guards = Formula::conjoin(fresh.iter().enumerate().map(|(i, q)| {
                    Formula::global(Formula::implies(Formula::atom(q.as_str()), self.pre(i)))
                }));
                let inner = self.translate(e, &body, me);
                fresh
                    .into_iter()
                    .rev()
                    .fold(Formula::and(guards, inner), |acc, q| Formula::exists(q, acc))
            }
            Formula::ForallProp(p, g) => {
                let dual = Formula::exists(p.as_str(), Formula::not((**g).clone()));
                Formula::and(self.pre(e), Formula::not(self.translate(e, &dual, me)))
            }
            Formula::Nu(..) | Formula::ActionDiamond(..) | Formula::Announce(..) => unreachable!(),
        }
    }
}

struct Operand<'a>(&'a Formula);

impl core::fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.0 {
            Formula::ExistsProp(..) | Formula::ForallProp(..) | Formula::Nu(..) => write!(f, "({})", self.0),
            g => write!(f, "{g}"),
        }
    }
}

/// A static formula equivalent to `<alpha> psi`, where `psi` is built from
/// atoms, nominals, Boolean connectives, modal boxes and diamonds, the
/// global modalities and propositional quantifiers.
pub fn translate_event(a: &EventModel, alpha: &str, psi: &Formula) -> Result<Formula, TranslateError> {
    Ok(translate_event_traced(a, alpha, psi)?.0)
}

/// [`translate_event`] together with the trace of recursive calls.
pub fn translate_event_traced(
    a: &EventModel,
    alpha: &str,
    psi: &Formula,
) -> Result<(Formula, Vec<RewriteStep>), TranslateError> {
    let e = a
        .event_index(alpha)
        .ok_or_else(|| TranslateError::UnknownEvent(alpha.to_string()))?;
    check_sentence(psi, false)?;
    let mut tr = EventTranslator {
        events: a,
        pre: a.preconditions().iter().map(encode_nu).collect(),
        pre_props: a.precondition_props(),
        tracer: Tracer { steps: Vec::new() },
    };
    let out = tr.translate(e, psi, None);
    Ok((out, tr.tracer.steps))
}

struct AnnouncementTranslator {
    announced: Formula,
    tracer: Tracer,
}

impl AnnouncementTranslator {
    fn a(&self) -> Formula {
        self.announced.clone()
    }

    fn translate(&mut self, psi: &Formula, parent: Option<usize>) -> Formula {
        let rule = match psi {
            Formula::Atom(_) | Formula::Nominal(_) => "announce-atom",
            Formula::Top => "announce-top",
            Formula::Bottom => "announce-bottom",
            Formula::Not(_) => "announce-not",
            Formula::And(..) => "announce-and",
            Formula::Or(..) => "announce-or",
            Formula::Implies(..) => "announce-implies",
            Formula::Box(_) => "announce-box",
            Formula::Diamond(_) => "announce-diamond",
            Formula::Global(_) => "announce-global",
            Formula::ExistsGlobal(_) => "announce-exists-global",
            Formula::ExistsProp(..) => "announce-exists",
            Formula::ForallProp(..) => "announce-forall",
            Formula::Nu(..) | Formula::ActionDiamond(..) | Formula::Announce(..) => {
                unreachable!("checked before translation")
            }
        };
        let at = alloc::format!("<!{}> {}", self.announced, Operand(psi));
        let me = Some(self.tracer.record(rule, at, psi, parent));
        match psi {
            Formula::Atom(_) | Formula::Nominal(_) => Formula::and(self.a(), psi.clone()),
            Formula::Top => self.a(),
            Formula::Bottom => Formula::Bottom,
            Formula::Not(g) => Formula::and(self.a(), Formula::not(self.translate(g, me))),
            Formula::And(g, d) => {
                let l = self.translate(g, me);
                Formula::and(l, self.translate(d, me))
            }
            Formula::Or(g, d) => {
                let l = self.translate(g, me);
                Formula::or(l, self.translate(d, me))
            }
            Formula::Implies(g, d) => {
                let l = self.translate(g, me);
                let r = self.translate(d, me);
                Formula::and(self.a(), Formula::implies(l, r))
            }
            Formula::Box(g) => {
                let inner = self.translate(g, me);
                Formula::and(self.a(), Formula::boxed(Formula::implies(self.a(), inner)))
            }
            Formula::Diamond(g) => Formula::and(self.a(), Formula::diamond(self.translate(g, me))),
            Formula::Global(g) => {
                let inner = self.translate(g, me);
                Formula::and(self.a(), Formula::global(Formula::implies(self.a(), inner)))
            }
            Formula::ExistsGlobal(g) => Formula::and(self.a(), Formula::exists_global(self.translate(g, me))),
            Formula::ExistsProp(p, g) => {
                let (var, body) = if self.announced.occurs_free(p) {
                    let mut avoid = self.announced.all_props();
                    avoid.extend(g.all_props());
                    let fresh = fresh_props(1, &avoid).remove(0);
                    let renamed = g.substitute(p, &Formula::atom(fresh.as_str()));
                    (fresh, renamed)
                } else {
                    (p.clone(), (**g).clone())
                };
                let guard = Formula::global(Formula::implies(Formula::atom(var.as_str()), self.a()));
                let inner = self.translate(&body, me);
                Formula::exists(var, Formula::and(guard, inner))
            }
            Formula::ForallProp(p, g) => {
                let dual = Formula::exists(p.as_str(), Formula::not((**g).clone()));
                Formula::and(self.a(), Formula::not(self.translate(&dual, me)))
            }
            Formula::Nu(..) | Formula::ActionDiamond(..) | Formula::Announce(..) => unreachable!(),
        }
    }
}

/// A formula equivalent to `<!announced> psi`. Nominals are treated like
/// atoms, since relativisation keeps each world's event.
pub fn translate_announcement(announced: &Formula, psi: &Formula) -> Result<Formula, TranslateError> {
    Ok(translate_announcement_traced(announced, psi)?.0)
}

pub fn translate_announcement_traced(
    announced: &Formula,
    psi: &Formula,
) -> Result<(Formula, Vec<RewriteStep>), TranslateError> {
    let announced = encode_nu(announced);
    if announced.has_action() || announced.has_announce() {
        return Err(TranslateError::AnnouncedNotStatic(announced.to_string()));
    }
    check_sentence(psi, false)?;
    let mut tr = AnnouncementTranslator {
        announced,
        tracer: Tracer { steps: Vec::new() },
    };
    let out = tr.translate(psi, None);
    Ok((out, tr.tracer.steps))
}

/// Rewrites `phi` into the static language: fixpoints by their quantified
/// encoding, then announcements and action modalities innermost first.
pub fn eliminate_all(a: &EventModel, phi: &Formula) -> Result<TranslationReport, TranslateError> {
    let tag = phi.classify()?;
    if tag == LanguageTag::SentenceOnly {
        return Err(TranslateError::NominalOutsideActionScope);
    }
    let mut steps = Vec::new();
    let output = eliminate(a, phi, &mut steps)?;
    let mut notes = Vec::new();
    if tag == LanguageTag::MuFragment {
        notes.push("output targets the quantified static language; no fixpoint-shaped output is attempted".to_string());
    }
    Ok(TranslationReport {
        input: phi.clone(),
        input_size: phi.size(),
        input_eps: quantifier_nodes(phi),
        output_size: output.size(),
        output_eps: output.quantifier_count()?,
        output,
        steps,
        notes,
    })
}

fn append(steps: &mut Vec<RewriteStep>, more: Vec<RewriteStep>) {
    let offset = steps.len();
    steps.extend(more.into_iter().map(|mut s| {
        s.parent = s.parent.map(|p| p + offset);
        s
    }));
}

fn eliminate(a: &EventModel, phi: &Formula, steps: &mut Vec<RewriteStep>) -> Result<Formula, TranslateError> {
    Ok(match phi {
        Formula::Nu(p, body) => {
            let inner = eliminate(a, body, steps)?;
            let encoded = nu_encoding(p, inner);
            steps.push(RewriteStep {
                rule: "nu-encoding",
                at: phi.to_string(),
                eps: quantifier_nodes(phi),
                size: phi.size(),
                parent: None,
            });
            encoded
        }
        Formula::Announce(announced, body) => {
            let announced = eliminate(a, announced, steps)?;
            let body = eliminate(a, body, steps)?;
            let (out, trace) = translate_announcement_traced(&announced, &body)?;
            append(steps, trace);
            out
        }
        Formula::ActionDiamond(e, body) => {
            let body = eliminate(a, body, steps)?;
            let (out, trace) = translate_event_traced(a, e, &body)?;
            append(steps, trace);
            out
        }
        _ => {
            let mut err = None;
            let out = phi.map_children(|c| match eliminate(a, c, steps) {
                Ok(f) => f,
                Err(e) => {
                    err.get_or_insert(e);
                    Formula::Bottom
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            out
        }
    })
}

/// Boolean constant folding, plus `[] true`, `U true`, `<> false`, `E false` and quantifiers
/// over constants.
pub fn simplify(f: &Formula) -> Formula {
    let g = f.map_children(simplify);
    match g {
        Formula::Not(a) => match *a {
            Formula::Top => Formula::Bottom,
            Formula::Bottom => Formula::Top,
            other => Formula::not(other),
        },
        Formula::And(l, r) => match (*l, *r) {
            (Formula::Bottom, _) | (_, Formula::Bottom) => Formula::Bottom,
            (Formula::Top, x) | (x, Formula::Top) => x,
            (l, r) => Formula::and(l, r),
        },
        Formula::Or(l, r) => match (*l, *r) {
            (Formula::Top, _) | (_, Formula::Top) => Formula::Top,
            (Formula::Bottom, x) | (x, Formula::Bottom) => x,
            (l, r) => Formula::or(l, r),
        },
        Formula::Implies(l, r) => match (*l, *r) {
            (Formula::Bottom, _) | (_, Formula::Top) => Formula::Top,
            (Formula::Top, x) => x,
            (x, Formula::Bottom) => Formula::not(x),
            (l, r) => Formula::implies(l, r),
        },
        Formula::Box(a) if *a == Formula::Top => Formula::Top,
        Formula::Diamond(a) | Formula::ExistsGlobal(a) if *a == Formula::Bottom => Formula::Bottom,
        Formula::Global(a) if *a == Formula::Top => Formula::Top,
        Formula::ExistsProp(_, a) | Formula::ForallProp(_, a) if matches!(*a, Formula::Top | Formula::Bottom) => *a,
        other => other,
    }
}

/// Modal rendering of a first-order point quantifier `exists x. body(x)`:
/// `exists p. (E p & forall q. ((E q & U(q -> p)) -> U(p -> q)) & body)`,
/// where `p` stands for the point as a singleton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSchema {
    pub formula: Formula,
    /// The non-emptiness guard `E q` on the inner quantifier is present.
    /// Without it `q` can be the empty set and the schema is unsatisfiable.
    pub guarded: bool,
}

pub fn singleton_point_schema(var: &str, body: &Formula) -> PointSchema {
    PointSchema {
        formula: point_schema(var, body, true),
        guarded: true,
    }
}

/// The schema without the `E q` guard; kept to pin its unsatisfiability.
pub fn unguarded_point_schema(var: &str, body: &Formula) -> Formula {
    point_schema(var, body, false)
}

fn point_schema(var: &str, body: &Formula, guarded: bool) -> Formula {
    let mut avoid = body.all_props();
    avoid.insert(var.to_string());
    let q = fresh_props(1, &avoid).remove(0);
    let (p_at, q_at) = (Formula::atom(var), Formula::atom(q.as_str()));
    let inside = Formula::global(Formula::implies(q_at.clone(), p_at.clone()));
    let premise = if guarded {
        Formula::and(Formula::exists_global(q_at.clone()), inside)
    } else {
        inside
    };
    let minimal = Formula::forall(
        q.as_str(),
        Formula::implies(premise, Formula::global(Formula::implies(p_at.clone(), q_at))),
    );
    Formula::exists(
        var,
        Formula::and(Formula::and(Formula::exists_global(p_at), minimal), body.clone()),
    )
}
