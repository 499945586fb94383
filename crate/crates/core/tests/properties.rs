use proptest::prelude::*;

use produpd_core::analysis::{greatest_bisimulation, is_bisimulation, Bisimulation};
use produpd_core::harness::{check_case, generate_case, random_event_model, random_formula, random_model, FuzzConfig, Suite};
use produpd_core::semantics::Evaluator;
use produpd_core::translator::{simplify, translate_event};
use produpd_core::{extension, parse_formula, print_formula, EvalBudget, LanguageTag, TaggedModel};

const TAGS: [LanguageTag; 5] = [
    LanguageTag::BaseMso,
    LanguageTag::ActionMso,
    LanguageTag::ScopedNominals,
    LanguageTag::SentenceOnly,
    LanguageTag::MuFragment,
];

fn small(seed: u64) -> FuzzConfig {
    FuzzConfig {
        seed,
        max_worlds: 3,
        max_formula_size: 8,
        ..FuzzConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(seed: u64, idx in 0usize..1000, tag in 0usize..TAGS.len()) {
        let cfg = FuzzConfig { seed, max_formula_size: 20, ..FuzzConfig::default() };
        let f = random_formula(&cfg, idx, TAGS[tag]);
        prop_assert_eq!(parse_formula(&print_formula(&f)), Ok(f));
    }

    #[test]
    fn substitution_matches_revaluation(seed: u64, idx in 0usize..1000) {
        let cfg = small(seed);
        let m = random_model(&cfg, idx);
        let f = random_formula(&cfg, idx, LanguageTag::BaseMso);
        let g = random_formula(&cfg, idx + 1, LanguageTag::BaseMso);
        let budget = EvalBudget::default();
        let gx = extension(&TaggedModel::untagged(m.clone()), &g, None, &budget).unwrap();
        let lhs = extension(&TaggedModel::untagged(m.clone()), &f.substitute("p", &g), None, &budget).unwrap();
        let rhs = extension(&TaggedModel::untagged(m.with_valuation("p", &gx).unwrap()), &f, None, &budget).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_leaves_non_occurring_target_alone(seed: u64, idx in 0usize..1000) {
        let cfg = small(seed);
        let f = random_formula(&cfg, idx, LanguageTag::ActionMso);
        let g = random_formula(&cfg, idx + 1, LanguageTag::BaseMso);
        prop_assert_eq!(f.substitute("_absent", &g), f);
    }

    #[test]
    fn shortcut_evaluator_matches_naive(seed: u64, idx in 0usize..1000, tag in 0usize..3) {
        let cfg = small(seed);
        let m = TaggedModel::untagged(random_model(&cfg, idx));
        let a = random_event_model(&cfg, idx);
        let f = random_formula(&cfg, idx, [LanguageTag::BaseMso, LanguageTag::ActionMso, LanguageTag::MuFragment][tag]);
        let budget = EvalBudget::default();
        let fast = Evaluator::new(Some(&a), budget).extension(&m, &f);
        let naive = Evaluator::naive(Some(&a), budget).extension(&m, &f);
        prop_assert_eq!(fast, naive);
    }

    #[test]
    fn translation_is_sound_on_small_inputs(seed: u64, idx in 0usize..1000) {
        let case = generate_case(&small(seed), Suite::Translation, idx);
        prop_assert!(check_case(Suite::Translation, &case).is_ok(), "{}", case.display_formula());
    }

    #[test]
    fn simplify_preserves_extension(seed: u64, idx in 0usize..1000) {
        let cfg = small(seed);
        let case = generate_case(&cfg, Suite::Translation, idx);
        let (a, e) = (case.events.as_ref().unwrap(), case.event.unwrap());
        let t = translate_event(a, a.event_name(e), &case.formula).unwrap();
        let m = TaggedModel::untagged(case.model.clone());
        let budget = EvalBudget::default();
        prop_assert_eq!(
            extension(&m, &t, None, &budget).unwrap(),
            extension(&m, &simplify(&t), None, &budget).unwrap()
        );
    }

    #[test]
    fn greatest_bisimulation_is_a_bisimulation(seed: u64, idx in 0usize..1000) {
        let cfg = small(seed);
        let m1 = random_model(&cfg, idx);
        let m2 = m1.duplicate_world(0, "copy");
        let z = greatest_bisimulation(&m1, &m2);
        prop_assert!(is_bisimulation(&m1, &m2, &z));
        prop_assert!(Bisimulation::identity(&m1).pairs.is_subset(&z.pairs));
        prop_assert!(z.contains(0, m2.len() - 1));
    }

    #[test]
    fn every_suite_passes_on_random_seeds(seed: u64, idx in 0usize..1000) {
        for suite in Suite::ALL {
            let case = generate_case(&small(seed), suite, idx);
            prop_assert!(check_case(suite, &case).is_ok(), "{} case {}", suite.name(), idx);
        }
    }
}
