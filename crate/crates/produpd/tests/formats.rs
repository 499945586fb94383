use proptest::prelude::*;

use produpd::formats::{
    event_model_to_json, model_to_json, normalize_model_json, parse_event_model, parse_model, product_to_json,
};
use produpd_core::harness::{random_event_model, random_model, FuzzConfig};
use produpd_core::models::product_with_pairs;
use produpd_core::EvalBudget;
use serde_json::Value;

fn cfg(seed: u64) -> FuzzConfig {
    FuzzConfig {
        seed,
        max_worlds: 6,
        max_props: 4,
        ..FuzzConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn model_json_round_trips(seed: u64, idx in 0usize..1000) {
        let m = random_model(&cfg(seed), idx);
        let text = model_to_json(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(normalize_model_json(&text).unwrap(), text);
    }

    #[test]
    fn event_model_json_round_trips(seed: u64, idx in 0usize..1000) {
        let a = random_event_model(&cfg(seed), idx);
        let text = event_model_to_json(&a);
        let back = parse_event_model(&text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(event_model_to_json(&back), text);
    }

    #[test]
    fn product_json_tags_every_world(seed: u64, idx in 0usize..1000) {
        let c = cfg(seed);
        let (m, a) = (random_model(&c, idx), random_event_model(&c, idx));
        let p = product_with_pairs(&m, &a, &EvalBudget::default()).unwrap();
        let v: Value = serde_json::from_str(&product_to_json(&p.tagged, &a)).unwrap();
        let worlds = v["worlds"].as_array().unwrap();
        let tags = v["tags"].as_object().unwrap();
        prop_assert_eq!(worlds.len(), p.pairs.len());
        for w in worlds {
            let event = tags[w.as_str().unwrap()].as_str().unwrap();
            prop_assert!(a.event_index(event).is_some());
        }
    }
}
