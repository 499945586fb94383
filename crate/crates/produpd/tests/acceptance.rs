//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use produpd::formats::{event_model_to_json, model_to_json, parse_event_model, parse_model};
use produpd_core::harness::{random_event_model, random_formula, random_model, run_fuzz_with_clock, Clock, FuzzConfig, Suite, SuiteReport};
use produpd_core::translator::{singleton_point_schema, unguarded_point_schema};
use produpd_core::{extension, parse_formula, print_formula, EvalBudget, Formula, KripkeModel, LanguageTag, TaggedModel};

const SEED: u64 = 42;

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}

fn run_suite(suite: Suite, cases: usize) -> SuiteReport {
    let cfg = FuzzConfig {
        seed: SEED,
        cases,
        ..FuzzConfig::default()
    }
    .with_suites([suite]);
    let clock = WallClock(Instant::now());
    let report = run_fuzz_with_clock(&cfg, Some(&clock)).expect("valid config");
    report.suites.into_iter().next().expect("one suite")
}

fn summary(s: &SuiteReport) -> String {
    let mut line = format!("{}/{} cases", s.passed, s.cases);
    if let Some(f) = &s.first_failure {
        line += &format!("; case {} failed: {}", f.case_index, f.failure.detail);
    }
    line
}

fn suite_criterion(suite: Suite, cases: usize) -> (bool, String) {
    let s = run_suite(suite, cases);
    (s.failed == 0 && s.passed == cases, summary(&s))
}

fn translation_and_measure() -> [(bool, String); 2] {
    let s = run_suite(Suite::Translation, 1000);
    let total = Duration::from_micros(s.total_micros.unwrap_or(u64::MAX));
    let slowest = Duration::from_micros(s.max_case_micros.unwrap_or(u64::MAX));
    let ok = s.failed == 0 && s.passed == 1000 && total < Duration::from_secs(300) && slowest < Duration::from_secs(1);
    let sound = (
        ok,
        format!(
            "{}, total {:.2?}, slowest case {:.2?}, mean size ratio {:.2}",
            summary(&s),
            total,
            slowest,
            s.blowup.mean_size_ratio
        ),
    );
    let measure = (
        s.measure.violations == 0 && s.measure.calls > 0,
        format!("{} recursive calls checked, {} violations", s.measure.calls, s.measure.violations),
    );
    [sound, measure]
}

fn schema_regression() -> (bool, String) {
    let m = TaggedModel::untagged(KripkeModel::from_names(&["w0"], &[] as &[(&str, &str)], &[] as &[(&str, Vec<&str>)]).unwrap());
    let body = Formula::atom("p");
    let budget = EvalBudget::default();
    let literal = extension(&m, &unguarded_point_schema("p", &body), None, &budget).unwrap();
    let corrected = extension(&m, &singleton_point_schema("p", &body).formula, None, &budget).unwrap();
    (
        literal.is_empty() && corrected == m.model.all(),
        format!("literal schema: {} worlds, corrected schema: {} of 1 worlds", literal.count(), corrected.count()),
    )
}

fn round_trips() -> (bool, String) {
    const TAGS: [LanguageTag; 5] = [
        LanguageTag::BaseMso,
        LanguageTag::ActionMso,
        LanguageTag::ScopedNominals,
        LanguageTag::SentenceOnly,
        LanguageTag::MuFragment,
    ];
    let cfg = FuzzConfig {
        seed: SEED,
        max_formula_size: 16,
        ..FuzzConfig::default()
    };
    let mut bad_formulas = 0;
    for i in 0..10_000 {
        let f = random_formula(&cfg, i, TAGS[i % TAGS.len()]);
        if parse_formula(&print_formula(&f)).as_ref() != Ok(&f) {
            bad_formulas += 1;
        }
    }
    let mut bad_files = 0;
    for i in 0..1000 {
        let m = model_to_json(&random_model(&cfg, i));
        let a = event_model_to_json(&random_event_model(&cfg, i));
        let m_ok = parse_model(&m).map(|x| model_to_json(&x)).ok().as_ref() == Some(&m);
        let a_ok = parse_event_model(&a).map(|x| event_model_to_json(&x)).ok().as_ref() == Some(&a);
        bad_files += usize::from(!m_ok) + usize::from(!a_ok);
    }
    (
        bad_formulas == 0 && bad_files == 0,
        format!("10000 formulas ({bad_formulas} mismatches), 2000 model files ({bad_files} mismatches)"),
    )
}

fn main() -> ExitCode {
    let [sound, measure] = translation_and_measure();
    let results = [
        ("translation soundness", sound),
        ("relativisation closure", suite_criterion(Suite::Announcement, 1000)),
        ("nominal axioms", suite_criterion(Suite::Nominals, 300)),
        ("fixpoint agreement", suite_criterion(Suite::Fixpoint, 500)),
        ("bisimulation lift", suite_criterion(Suite::BisimLift, 300)),
        ("degree preservation", suite_criterion(Suite::Degree, 300)),
        ("termination measure", measure),
        ("point schema regression", schema_regression()),
        ("parser and file round-trips", round_trips()),
    ];
    let mut all = true;
    for (i, (name, (ok, detail))) in results.iter().enumerate() {
        println!("{} criterion {}: {name}: {detail}", if *ok { "PASS" } else { "FAIL" }, i + 1);
        all &= ok;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
