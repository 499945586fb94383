//! Bisimulations between finite models and bounded empirical checks of
//! locality (degree).

use alloc::collections::BTreeSet;

use thiserror::Error;

use crate::models::{product_with_pairs, EventModel, KripkeModel, PointedModel, TaggedModel};
use crate::semantics::{EvalBudget, EvalError, Evaluator};
use crate::syntax::Formula;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("relation is not a bisimulation")]
    NotABisimulation,
    #[error("k_star needs at least one precondition degree")]
    NoPreconditionDegrees,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A relation between the worlds of two models, by world index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bisimulation {
    pub pairs: BTreeSet<(usize, usize)>,
}

impl Bisimulation {
    pub fn identity(m: &KripkeModel) -> Bisimulation {
        Bisimulation {
            pairs: (0..m.len()).map(|w| (w, w)).collect(),
        }
    }

    pub fn contains(&self, s: usize, t: usize) -> bool {
        self.pairs.contains(&(s, t))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl FromIterator<(usize, usize)> for Bisimulation {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        Bisimulation {
            pairs: iter.into_iter().collect(),
        }
    }
}

fn atoms_agree(m1: &KripkeModel, s: usize, m2: &KripkeModel, t: usize) -> bool {
    let in1 = m1.props().filter(|(_, x)| x.contains(s)).map(|(p, _)| p);
    let in2 = m2.props().filter(|(_, x)| x.contains(t)).map(|(p, _)| p);
    in1.eq(in2)
}

fn zigzag(m1: &KripkeModel, s: usize, m2: &KripkeModel, t: usize, rel: impl Fn(usize, usize) -> bool) -> bool {
    let forth = m1.successors(s).iter().all(|s2| m2.successors(t).iter().any(|t2| rel(s2, t2)));
    let back = m2.successors(t).iter().all(|t2| m1.successors(s).iter().any(|s2| rel(s2, t2)));
    forth && back
}

/// The largest bisimulation between `m1` and `m2`: start from all pairs
/// that agree on atoms and drop pairs violating forth or back until stable.
pub fn greatest_bisimulation(m1: &KripkeModel, m2: &KripkeModel) -> Bisimulation {
    let (n1, n2) = (m1.len(), m2.len());
    let mut rel = alloc::vec![alloc::vec![false; n2]; n1];
    for (s, row) in rel.iter_mut().enumerate() {
        for (t, cell) in row.iter_mut().enumerate() {
            *cell = atoms_agree(m1, s, m2, t);
        }
    }
    loop {
        let mut changed = false;
        for s in 0..n1 {
            for t in 0..n2 {
                if rel[s][t] && !zigzag(m1, s, m2, t, |a, b| rel[a][b]) {
                    rel[s][t] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n1)
        .flat_map(|s| (0..n2).map(move |t| (s, t)))
        .filter(|&(s, t)| rel[s][t])
        .collect()
}

/// Whether every pair of `z` agrees on atoms and satisfies forth and back.
/// Pairs naming worlds outside the models make the answer `false`.
pub fn is_bisimulation(m1: &KripkeModel, m2: &KripkeModel, z: &Bisimulation) -> bool {
    z.pairs.iter().all(|&(s, t)| {
        s < m1.len() && t < m2.len() && atoms_agree(m1, s, m2, t) && zigzag(m1, s, m2, t, |a, b| z.contains(a, b))
    })
}

/// Result of [`lift_bisimulation`]: the relation together with the two products it relates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedBisimulation {
    pub relation: Bisimulation,
    pub left: TaggedModel,
    pub right: TaggedModel,
}

/// `(s, e) Y (t, e)` iff `s Z t`, over the worlds that exist in both products.
pub fn lift_bisimulation(
    z: &Bisimulation,
    a: &EventModel,
    m1: &KripkeModel,
    m2: &KripkeModel,
    budget: &EvalBudget,
) -> Result<LiftedBisimulation, AnalysisError> {
    if !is_bisimulation(m1, m2, z) {
        return Err(AnalysisError::NotABisimulation);
    }
    let p1 = product_with_pairs(m1, a, budget)?;
    let p2 = product_with_pairs(m2, a, budget)?;
    let relation = p1
        .pairs
        .iter()
        .enumerate()
        .flat_map(|(i, &(s, e))| {
            p2.pairs
                .iter()
                .enumerate()
                .filter(move |&(_, &(t, f))| e == f && z.contains(s, t))
                .map(move |(j, _)| (i, j))
        })
        .collect();
    Ok(LiftedBisimulation {
        relation,
        left: p1.tagged,
        right: p2.tagged,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DegreeVerdict {
    ConsistentOnTestSet,
    /// The first test model (by position) where truth at the point differs
    /// between the full model and its radius-`k` submodel.
    Counterexample {
        index: usize,
        model: PointedModel,
        full: bool,
        truncated: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeCheckResult {
    pub formula: Formula,
    pub k: usize,
    pub verdict: DegreeVerdict,
}

/// Compares truth of `phi` at each test point with truth at the same point
/// of the submodel generated within `k` steps. A consistent verdict is only
/// evidence over the given test set, never a proof of degree `k`.
pub fn check_degree(
    phi: &Formula,
    k: usize,
    testset: &[PointedModel],
    events: Option<&EventModel>,
    budget: &EvalBudget,
) -> Result<DegreeCheckResult, AnalysisError> {
    let mut verdict = DegreeVerdict::ConsistentOnTestSet;
    for (index, pm) in testset.iter().enumerate() {
        let mut ev = Evaluator::new(events, *budget);
        let full = ev
            .extension(&TaggedModel::untagged(pm.model.clone()), phi)?
            .contains(pm.point);
        let sub = pm.model.generated_submodel_k(pm.point, k).map_err(EvalError::from)?;
        let truncated = ev.extension(&TaggedModel::untagged(sub.model), phi)?.contains(sub.point);
        if full != truncated {
            verdict = DegreeVerdict::Counterexample {
                index,
                model: pm.clone(),
                full,
                truncated,
            };
            break;
        }
    }
    Ok(DegreeCheckResult {
        formula: phi.clone(),
        k,
        verdict,
    })
}

/// Radius sufficient for `<a> phi` when the preconditions have the given
/// degrees and `phi` has degree `deg_phi`.
pub fn k_star(deg_pres: &[usize], deg_phi: usize) -> Result<usize, AnalysisError> {
    deg_pres
        .iter()
        .max()
        .map(|d| d + deg_phi)
        .ok_or(AnalysisError::NoPreconditionDegrees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;
    use alloc::vec;

    fn loop_model() -> KripkeModel {
        KripkeModel::from_names(&["w"], &[("w", "w")], &[("p", vec!["w"])]).unwrap()
    }

    fn cycle_model() -> KripkeModel {
        KripkeModel::from_names(&["u", "v"], &[("u", "v"), ("v", "u")], &[("p", vec!["u", "v"])]).unwrap()
    }

    #[test]
    fn loop_and_cycle_are_totally_related() {
        let (m1, m2) = (loop_model(), cycle_model());
        let z = greatest_bisimulation(&m1, &m2);
        assert_eq!(z, [(0, 0), (0, 1)].into_iter().collect());
        assert!(is_bisimulation(&m1, &m2, &z));
    }

    #[test]
    fn atom_clash_gives_empty_relation() {
        let m1 = loop_model();
        let m2 = KripkeModel::from_names(&["u"], &[("u", "u")], &[]).unwrap();
        assert!(greatest_bisimulation(&m1, &m2).is_empty());
        assert!(is_bisimulation(&m1, &m2, &Bisimulation::default()));
        assert!(!is_bisimulation(&m1, &m2, &[(0, 0)].into_iter().collect()));
    }

    #[test]
    fn identity_is_contained() {
        let m = cycle_model().duplicate_world(0, "u2");
        let z = greatest_bisimulation(&m, &m);
        assert!(Bisimulation::identity(&m).pairs.is_subset(&z.pairs));
        assert!(z.contains(0, 2));
    }

    #[test]
    fn lift_over_two_event_model() {
        let (m1, m2) = (loop_model(), cycle_model());
        let a = EventModel::from_names(
            &["b0", "b1"],
            &[("b0", "b1"), ("b1", "b0"), ("b1", "b1")],
            &[("b0", Formula::atom("p")), ("b1", Formula::Top)],
        )
        .unwrap();
        let z = greatest_bisimulation(&m1, &m2);
        let lifted = lift_bisimulation(&z, &a, &m1, &m2, &EvalBudget::default()).unwrap();
        assert_eq!(lifted.left.model.len(), 2);
        assert_eq!(lifted.right.model.len(), 4);
        assert_eq!(lifted.relation.len(), 4);
        for &(i, j) in &lifted.relation.pairs {
            assert_eq!(lifted.left.tag(i), lifted.right.tag(j));
        }
        assert!(is_bisimulation(&lifted.left.model, &lifted.right.model, &lifted.relation));
    }

    #[test]
    fn lift_identity_under_skip() {
        let m = cycle_model();
        let lifted =
            lift_bisimulation(&Bisimulation::identity(&m), &EventModel::skip(), &m, &m, &EvalBudget::default()).unwrap();
        assert_eq!(lifted.relation, Bisimulation::identity(&lifted.left.model));
    }

    #[test]
    fn lift_rejects_non_bisimulation() {
        let m1 = loop_model();
        let m2 = KripkeModel::from_names(&["u"], &[], &[]).unwrap();
        let z = [(0, 0)].into_iter().collect();
        assert_eq!(
            lift_bisimulation(&z, &EventModel::skip(), &m1, &m2, &EvalBudget::default()),
            Err(AnalysisError::NotABisimulation)
        );
    }

    #[test]
    fn degree_checks() {
        let budget = EvalBudget::default();
        let apart = KripkeModel::from_names(&["w0", "w1"], &[], &[("p", vec!["w0"])]).unwrap();
        let chain =
            KripkeModel::from_names(&["w0", "w1", "w2"], &[("w0", "w1"), ("w1", "w2")], &[("p", vec!["w1"])])
                .unwrap();
        let tests = [
            PointedModel { model: apart.clone(), point: 0 },
            PointedModel { model: chain, point: 0 },
        ];
        let boxed = parse_formula("[] p").unwrap();
        let r = check_degree(&boxed, 1, &tests, None, &budget).unwrap();
        assert_eq!(r.verdict, DegreeVerdict::ConsistentOnTestSet);

        let r = check_degree(&parse_formula("p").unwrap(), 0, &tests, None, &budget).unwrap();
        assert_eq!(r.verdict, DegreeVerdict::ConsistentOnTestSet);

        let r = check_degree(&parse_formula("U p").unwrap(), 3, &tests, None, &budget).unwrap();
        assert_eq!(
            r.verdict,
            DegreeVerdict::Counterexample {
                index: 0,
                model: tests[0].clone(),
                full: false,
                truncated: true
            }
        );
    }

    #[test]
    fn k_star_values() {
        assert_eq!(k_star(&[1, 2], 3), Ok(5));
        assert_eq!(k_star(&[0], 0), Ok(0));
        assert_eq!(k_star(&[2], 0), Ok(2));
        assert_eq!(k_star(&[], 1), Err(AnalysisError::NoPreconditionDegrees));
    }
}
