//! The `produpd` command line.
//!
//! Exit status 0 means success, 1 a semantic failure (evaluation error,
//! failed check, failing fuzz suite) and 2 a usage or input error (bad
//! flags, unreadable file, malformed formula or model).

use std::ffi::OsString;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use produpd_core::analysis::greatest_bisimulation;
use produpd_core::harness::{run_fuzz_with_clock, Clock, FuzzConfig, FuzzReport, Ratio, Suite};
use produpd_core::models::product_with_pairs;
use produpd_core::translator::{eliminate_all, simplify};
use produpd_core::{
    extension, parse_formula, BitSet, EvalBudget, EventModel, Formula, KripkeModel, TaggedModel,
};
use serde_json::{json, Value};

use crate::formats::{
    bisimulation_to_value, fuzz_report_to_value, model_to_json, model_to_value, parse_event_model, parse_model,
    product_to_json, translation_report_to_value, world_list,
};

/// Overrides the default number of worlds a quantifier may range over.
pub const BUDGET_ENV: &str = "PRODUPD_BUDGET_WORLDS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Usage = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Parser, Debug)]
#[command(name = "produpd", version, about = "Model checking and modality elimination under product update")]
struct Cli {
    /// Write machine-readable JSON to stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a formula (argument, @file or stdin) and print its normal form.
    Parse { formula: Option<String> },
    /// Print the extension of a formula, or its truth value at one world.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        world: Option<String>,
        /// Event model that action modalities refer to.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Print the product of a model with an event model.
    Product {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Print the model relativised to the extension of a formula.
    Announce {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Rewrite `<EVENT> FORMULA` into the static language.
    Translate {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        event: String,
        #[arg(long)]
        formula: String,
        /// Fold Boolean constants in the output.
        #[arg(long)]
        simplify: bool,
    },
    /// Decide whether two pointed models are bisimilar.
    Bisim {
        #[arg(long)]
        model1: PathBuf,
        #[arg(long)]
        world1: String,
        #[arg(long)]
        model2: PathBuf,
        #[arg(long)]
        world2: String,
    },
    /// Run the randomized oracle suites.
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug)]
struct FuzzArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 4)]
    max_worlds: usize,
    #[arg(long, default_value_t = 3)]
    max_events: usize,
    #[arg(long, default_value_t = 3)]
    max_props: usize,
    #[arg(long, default_value_t = 12)]
    max_formula_size: usize,
    #[arg(long, default_value_t = 2)]
    max_eps: usize,
    /// Probability of each edge, as `n/d` or a decimal.
    #[arg(long, default_value = "1/2", value_parser = parse_ratio)]
    edge_probability: Ratio,
    /// Comma-separated suites; all of them when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_suite)]
    suites: Vec<Suite>,
}

fn parse_ratio(s: &str) -> Result<Ratio, String> {
    let bad = || format!("`{s}` is not a probability (use n/d or a decimal in [0, 1])");
    if let Some((n, d)) = s.split_once('/') {
        let (n, d) = (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
        return Ratio::new(n, d).ok_or_else(bad);
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u32.pow(frac.len() as u32);
    let frac_num: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|x| x.checked_add(frac_num)).ok_or_else(bad)?;
    Ratio::new(num, den).ok_or_else(bad)
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{s}` (expected one of {})", names.join(", "))
    })
}

enum CliError {
    Usage(String),
    Failure(String),
}

type CliResult = Result<ExitStatus, CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// Runs the command line with the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitStatus::Success,
                _ => ExitStatus::Usage,
            };
        }
    };
    let mut ctx = Ctx { json: cli.json, out, err };
    match ctx.dispatch(cli.command) {
        Ok(status) => status,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            ExitStatus::Usage
        }
        Err(CliError::Failure(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            ExitStatus::Failure
        }
    }
}

struct Ctx<'a> {
    json: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

fn read_source(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<KripkeModel, CliError> {
    parse_model(&read_source(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_events(path: &Path) -> Result<EventModel, CliError> {
    parse_event_model(&read_source(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// A formula given inline or as `@path`.
fn read_formula(arg: &str) -> Result<Formula, CliError> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read_source(Path::new(path))?,
        None => arg.to_string(),
    };
    parse_formula(text.trim()).map_err(|e| usage(format!("cannot parse formula: {e}")))
}

fn world(m: &KripkeModel, name: &str) -> Result<usize, CliError> {
    m.world_index(name)
        .ok_or_else(|| usage(format!("unknown world `{name}`")))
}

fn budget() -> Result<EvalBudget, CliError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(EvalBudget::with_worlds)
            .map_err(|_| usage(format!("{BUDGET_ENV} must be a number of worlds, got `{v}`"))),
        Err(_) => Ok(EvalBudget::default()),
    }
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}

/// Two worlds `w0 -> w1 -> w1`; the i-th proposition (by name) holds at
/// the worlds selected by the bits of `i + 1`, so the first one is true
/// exactly at `w0`.
pub fn sanity_model(props: impl IntoIterator<Item = String>) -> KripkeModel {
    let valuation = props.into_iter().enumerate().map(|(i, p)| {
        let bits = (i + 1) % 4;
        (p, BitSet::from_indices(2, (0..2).filter(|w| bits & (1 << w) != 0)))
    });
    KripkeModel::new(vec!["w0".into(), "w1".into()], [(0, 1), (1, 1)], valuation).expect("fixed model is valid")
}

impl Ctx<'_> {
    fn print(&mut self, text: &str) -> Result<(), CliError> {
        writeln!(self.out, "{text}").map_err(failure)
    }

    fn print_json(&mut self, v: &Value) -> Result<(), CliError> {
        self.print(&serde_json::to_string_pretty(v).expect("serialisable"))
    }

    fn dispatch(&mut self, command: Command) -> CliResult {
        match command {
            Command::Parse { formula } => self.parse(formula),
            Command::Eval {
                model,
                formula,
                world,
                events,
            } => self.eval(&model, &formula, world.as_deref(), events.as_deref()),
            Command::Product { model, events } => {
                let (m, a) = (load_model(&model)?, load_events(&events)?);
                let p = product_with_pairs(&m, &a, &budget()?).map_err(failure)?;
                write!(self.out, "{}", product_to_json(&p.tagged, &a)).map_err(failure)?;
                Ok(ExitStatus::Success)
            }
            Command::Announce { model, formula } => {
                let (m, f) = (load_model(&model)?, read_formula(&formula)?);
                let keep = extension(&TaggedModel::untagged(m.clone()), &f, None, &budget()?).map_err(failure)?;
                let r = m.relativise(&keep).map_err(failure)?;
                write!(self.out, "{}", model_to_json(&r)).map_err(failure)?;
                Ok(ExitStatus::Success)
            }
            Command::Translate {
                events,
                event,
                formula,
                simplify,
            } => self.translate(&events, &event, &formula, simplify),
            Command::Bisim {
                model1,
                world1,
                model2,
                world2,
            } => self.bisim(&model1, &world1, &model2, &world2),
            Command::Fuzz(args) => self.fuzz(args),
        }
    }

    fn parse(&mut self, formula: Option<String>) -> CliResult {
        let f = match formula {
            Some(arg) => read_formula(&arg)?,
            None => read_formula("@-")?,
        };
        if self.json {
            let language = f.classify().map(|t| t.name()).map_err(failure)?;
            self.print_json(&json!({
                "formula": f.to_string(),
                "language": language,
                "size": f.size(),
                "modal_depth": f.modal_depth(),
                "eps": f.quantifier_count().ok(),
            }))?;
        } else {
            self.print(&f.to_string())?;
        }
        Ok(ExitStatus::Success)
    }

    fn eval(&mut self, model: &Path, formula: &str, at: Option<&str>, events: Option<&Path>) -> CliResult {
        let m = load_model(model)?;
        let f = read_formula(formula)?;
        let a = events.map(load_events).transpose()?;
        let w = at.map(|name| world(&m, name)).transpose()?;
        let ext = extension(&TaggedModel::untagged(m.clone()), &f, a.as_ref(), &budget()?).map_err(failure)?;
        match (w, self.json) {
            (Some(w), false) => self.print(&ext.contains(w).to_string())?,
            (Some(w), true) => self.print_json(&json!({
                "formula": f.to_string(),
                "world": m.world_name(w),
                "holds": ext.contains(w),
            }))?,
            (None, false) => self.print(&format!("{{{}}}", world_list(&m, &ext).join(", ")))?,
            (None, true) => self.print_json(&json!({
                "formula": f.to_string(),
                "extension": world_list(&m, &ext),
            }))?,
        }
        Ok(ExitStatus::Success)
    }

    fn translate(&mut self, events: &Path, event: &str, formula: &str, simplify_output: bool) -> CliResult {
        let a = load_events(events)?;
        let body = read_formula(formula)?;
        if a.event_index(event).is_none() {
            return Err(usage(format!("unknown event `{event}`")));
        }
        let input = Formula::action(event, body);
        let mut report = eliminate_all(&a, &input).map_err(failure)?;
        if simplify_output {
            report.output = simplify(&report.output);
            report.output_size = report.output.size();
            report.output_eps = report.output.quantifier_count().map_err(failure)?;
        }

        // Re-read the printed output and compare both sides on a fixed model.
        let reparsed = parse_formula(&report.output.to_string()).ok().as_ref() == Some(&report.output);
        let mut props = input.all_props();
        props.extend(a.precondition_props());
        let sanity = sanity_model(props);
        let tagged = TaggedModel::untagged(sanity.clone());
        let b = budget()?;
        let lhs = extension(&tagged, &input, Some(&a), &b).map_err(failure)?;
        let rhs = extension(&tagged, &report.output, None, &b).map_err(failure)?;
        let agrees = reparsed && lhs == rhs;

        if self.json {
            let mut v = translation_report_to_value(&report);
            v["simplified"] = json!(simplify_output);
            v["sanity_check"] = json!({
                "model": model_to_value(&sanity),
                "reparsed": reparsed,
                "input_extension": world_list(&sanity, &lhs),
                "output_extension": world_list(&sanity, &rhs),
                "passed": agrees,
            });
            self.print_json(&v)?;
        } else {
            self.print(&report.output.to_string())?;
            let _ = writeln!(
                self.err,
                "size {} -> {}, quantifiers {} -> {}, {} rewrite steps, sanity check {}",
                report.input_size,
                report.output_size,
                report.input_eps,
                report.output_eps,
                report.steps.len(),
                if agrees { "passed" } else { "FAILED" }
            );
        }
        if agrees {
            Ok(ExitStatus::Success)
        } else {
            Err(failure("translated formula disagrees with the input on the sanity model"))
        }
    }

    fn bisim(&mut self, model1: &Path, world1: &str, model2: &Path, world2: &str) -> CliResult {
        let (m1, m2) = (load_model(model1)?, load_model(model2)?);
        let (w1, w2) = (world(&m1, world1)?, world(&m2, world2)?);
        let z = greatest_bisimulation(&m1, &m2);
        let bisimilar = z.contains(w1, w2);
        if self.json {
            let mut v = bisimulation_to_value(&z, &m1, &m2);
            v["bisimilar"] = json!(bisimilar);
            self.print_json(&v)?;
        } else {
            self.print(if bisimilar { "bisimilar" } else { "not bisimilar" })?;
            for &(s, t) in &z.pairs {
                self.print(&format!("{} ~ {}", m1.world_name(s), m2.world_name(t)))?;
            }
        }
        Ok(ExitStatus::Success)
    }

    fn fuzz(&mut self, args: FuzzArgs) -> CliResult {
        let cfg = FuzzConfig {
            seed: args.seed,
            cases: args.cases,
            max_worlds: args.max_worlds,
            max_events: args.max_events,
            max_props: args.max_props,
            max_formula_size: args.max_formula_size,
            max_eps: args.max_eps,
            edge_probability: args.edge_probability,
            suites: if args.suites.is_empty() {
                Suite::ALL.into_iter().collect()
            } else {
                args.suites.into_iter().collect()
            },
        };
        let clock = WallClock(Instant::now());
        let report = run_fuzz_with_clock(&cfg, Some(&clock)).map_err(usage)?;
        if self.json {
            self.print_json(&fuzz_report_to_value(&report))?;
        } else {
            self.print_fuzz_summary(&report)?;
        }
        Ok(if report.all_passed() {
            ExitStatus::Success
        } else {
            ExitStatus::Failure
        })
    }

    fn print_fuzz_summary(&mut self, report: &FuzzReport) -> Result<(), CliError> {
        for s in &report.suites {
            let mut line = format!("{:<13} {}/{} passed", s.suite.name(), s.passed, s.cases);
            if let (Some(total), Some(max)) = (s.total_micros, s.max_case_micros) {
                line += &format!(", {:.1} ms total, slowest case {:.1} ms", total as f64 / 1e3, max as f64 / 1e3);
            }
            if s.blowup.samples > 0 {
                line += &format!(
                    ", size ratio mean {:.2} max {:.1}, output quantifiers max {}",
                    s.blowup.mean_size_ratio, s.blowup.max_size_ratio, s.blowup.max_output_eps
                );
            }
            self.print(&line)?;
            if let Some(f) = &s.first_failure {
                self.print(&format!("  first failure: case {}: {}", f.case_index, f.failure.detail))?;
                self.print(&format!("    formula: {}", f.case.display_formula()))?;
                self.print(&format!(
                    "    shrunk ({} steps, {} worlds): {}: {}",
                    f.shrink_steps,
                    f.shrunk.model.len(),
                    f.shrunk.display_formula(),
                    f.shrunk_failure.detail
                ))?;
            }
        }
        Ok(())
    }
}
