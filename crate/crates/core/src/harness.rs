//! Seeded generators and the oracle loops that exercise the translations.
//!
//! Every random choice comes from a ChaCha stream keyed by the seed, the
//! suite and a per-purpose label, positioned by the case index. No state is
//! shared between cases, so any case can be regenerated on its own and the
//! report is a pure function of the configuration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{
    check_degree, greatest_bisimulation, is_bisimulation, k_star, lift_bisimulation, DegreeVerdict,
};
use crate::bitset::{BitSet, WorldSet};
use crate::models::{announcement_event_model, product_with_pairs, EventModel, KripkeModel, PointedModel, TaggedModel};
use crate::semantics::{gfp_oracle, EvalBudget, EvalError, Evaluator};
use crate::syntax::{Formula, LanguageTag};
use crate::translator::{encode_nu, translate_announcement_traced, translate_event, translate_event_traced};

/// A probability given as `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub const HALF: Ratio = Ratio { num: 1, den: 2 };

    /// `None` unless `0 <= num / den <= 1`.
    pub fn new(num: u32, den: u32) -> Option<Ratio> {
        (den > 0 && num <= den).then_some(Ratio { num, den })
    }
}

impl core::fmt::Display for Ratio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Translation,
    Announcement,
    Nominals,
    Fixpoint,
    BisimLift,
    Degree,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Translation,
        Suite::Announcement,
        Suite::Nominals,
        Suite::Fixpoint,
        Suite::BisimLift,
        Suite::Degree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Translation => "translation",
            Suite::Announcement => "announcement",
            Suite::Nominals => "nominals",
            Suite::Fixpoint => "fixpoint",
            Suite::BisimLift => "bisim_lift",
            Suite::Degree => "degree",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    fn stream_base(self) -> u64 {
        (self as u64 + 1) << 8
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub cases: usize,
    pub max_worlds: usize,
    pub max_events: usize,
    pub max_props: usize,
    pub max_formula_size: usize,
    pub max_eps: usize,
    pub edge_probability: Ratio,
    pub suites: BTreeSet<Suite>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 0,
            cases: 100,
            max_worlds: 4,
            max_events: 3,
            max_props: 3,
            max_formula_size: 12,
            max_eps: 2,
            edge_probability: Ratio::HALF,
            suites: Suite::ALL.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("cases must be at least 1")]
    NoCases,
    #[error("max_worlds must be at least 1")]
    NoWorlds,
    #[error("max_events must be at least 1")]
    NoEvents,
    #[error("max_formula_size must be at least 1")]
    NoFormulaSize,
    #[error("edge probability {0} is not in [0, 1]")]
    BadProbability(Ratio),
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cases == 0 {
            return Err(ConfigError::NoCases);
        }
        if self.max_worlds == 0 {
            return Err(ConfigError::NoWorlds);
        }
        if self.max_events == 0 {
            return Err(ConfigError::NoEvents);
        }
        if self.max_formula_size == 0 {
            return Err(ConfigError::NoFormulaSize);
        }
        if Ratio::new(self.edge_probability.num, self.edge_probability.den).is_none() {
            return Err(ConfigError::BadProbability(self.edge_probability));
        }
        Ok(())
    }

    pub fn with_suites(mut self, suites: impl IntoIterator<Item = Suite>) -> Self {
        self.suites = suites.into_iter().collect();
        self
    }
}

// ---------------------------------------------------------------------------
// Randomness

#[derive(Clone, Copy)]
enum Label {
    Model = 1,
    Events = 2,
    Formula = 3,
    Aux = 4,
    Pick = 5,
    Testset = 6,
}

fn rng_for(seed: u64, case_index: usize, suite: Option<Suite>, label: Label) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.map_or(0, Suite::stream_base) | label as u64);
    rng.set_word_pos((case_index as u128) << 40);
    rng
}

/// Proposition names used by the generators: `p, q, r, s, t, p5, p6, ...`.
pub fn prop_names(count: usize) -> Vec<String> {
    const FIRST: [&str; 5] = ["p", "q", "r", "s", "t"];
    (0..count)
        .map(|i| FIRST.get(i).map_or_else(|| format!("p{i}"), |s| s.to_string()))
        .collect()
}

fn event_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("a{i}")).collect()
}

fn gen_model(rng: &mut ChaCha8Rng, max_worlds: usize, props: &[String], edge: Ratio) -> KripkeModel {
    let n = rng.random_range(1..=max_worlds.max(1));
    let worlds = (0..n).map(|i| format!("w{i}")).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_ratio(edge.num, edge.den) {
                edges.push((a, b));
            }
        }
    }
    let valuation: Vec<(String, WorldSet)> = props
        .iter()
        .map(|p| {
            let set = BitSet::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5)));
            (p.clone(), set)
        })
        .collect();
    KripkeModel::new(worlds, edges, valuation).expect("generated model is well formed")
}

fn gen_event_model(rng: &mut ChaCha8Rng, cfg: &FuzzConfig) -> EventModel {
    let n = rng.random_range(1..=cfg.max_events.max(1));
    let props = prop_names(cfg.max_props);
    let trivial = rng.random_range(0..n);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_ratio(cfg.edge_probability.num, cfg.edge_probability.den) {
                edges.push((a, b));
            }
        }
    }
    let features = Features {
        modal: true,
        ..Features::default()
    };
    let pre = (0..n)
        .map(|e| {
            if e == trivial {
                Formula::Top
            } else {
                let size = rng.random_range(1..=4);
                Gen::new(rng, &props, features, 0).formula(size)
            }
        })
        .collect();
    EventModel::new(event_names(n), edges, pre).expect("generated event model is well formed")
}

/// Which constructors a generated formula may use.
#[derive(Clone, Copy, Debug, Default)]
struct Features {
    modal: bool,
    global: bool,
    quantifiers: bool,
    nu: bool,
    /// Nominals `j0 .. j{n-1}`.
    nominals: usize,
    /// Action modalities over events `a0 .. a{n-1}`.
    actions: usize,
    announce: bool,
}

impl Features {
    fn for_tag(tag: LanguageTag, events: usize) -> Features {
        let base = Features {
            modal: true,
            global: true,
            quantifiers: true,
            ..Features::default()
        };
        match tag {
            LanguageTag::BaseMso => base,
            LanguageTag::ScopedNominals | LanguageTag::SentenceOnly => Features {
                nominals: events,
                ..base
            },
            LanguageTag::ActionMso => Features {
                actions: events,
                announce: true,
                ..base
            },
            LanguageTag::MuFragment => Features {
                modal: true,
                nu: true,
                ..Features::default()
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Binding {
    Prop,
    /// Fixpoint variable bound under the given negation parity.
    Nu(bool),
    /// Fixpoint variable that may not occur here.
    Blocked,
}

#[derive(Clone, Copy)]
enum Node {
    Not,
    And,
    Or,
    Implies,
    Box,
    Diamond,
    Global,
    ExistsGlobal,
    Exists,
    Forall,
    Nu,
    Action,
    Announce,
}

impl Node {
    /// Size added on top of the children, and the number of children.
    fn shape(self) -> (usize, usize) {
        match self {
            Node::Not | Node::Box | Node::Global | Node::Exists | Node::Nu | Node::Action => (1, 1),
            Node::Diamond | Node::ExistsGlobal | Node::Forall => (3, 1),
            Node::And | Node::Announce => (1, 2),
            Node::Or => (4, 2),
            Node::Implies => (3, 2),
        }
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    props: &'a [String],
    features: Features,
    eps_left: usize,
    scope: Vec<(String, Binding)>,
    /// Parity of negations above the current position.
    negated: bool,
}

impl<'a> Gen<'a> {
    fn new(rng: &'a mut ChaCha8Rng, props: &'a [String], features: Features, eps: usize) -> Self {
        Gen {
            rng,
            props,
            features,
            eps_left: eps,
            scope: Vec::new(),
            negated: false,
        }
    }

    /// A formula of size at most `budget` (usually exactly `budget`).
    fn formula(&mut self, budget: usize) -> Formula {
        let f = self.features;
        let mut nodes = Vec::new();
        nodes.extend([Node::Not, Node::And, Node::Or, Node::Implies]);
        if f.modal {
            nodes.extend([Node::Box, Node::Diamond]);
        }
        if f.global {
            nodes.extend([Node::Global, Node::ExistsGlobal]);
        }
        if self.eps_left > 0 {
            if f.quantifiers {
                nodes.extend([Node::Exists, Node::Forall]);
            }
            if f.nu {
                nodes.push(Node::Nu);
            }
        }
        if f.actions > 0 {
            nodes.push(Node::Action);
        }
        if f.announce {
            nodes.push(Node::Announce);
        }
        nodes.retain(|n| {
            let (overhead, arity) = n.shape();
            overhead + arity <= budget
        });
        if nodes.is_empty() || (budget <= 3 && self.rng.random_ratio(1, 4)) {
            return self.leaf();
        }
        let node = nodes[self.rng.random_range(0..nodes.len())];
        let (overhead, _) = node.shape();
        let rest = budget - overhead;
        match node {
            Node::Not => Formula::not(self.flipped(|g| g.formula(rest))),
            Node::And | Node::Or | Node::Implies => {
                let left = self.rng.random_range(1..rest);
                let l = if matches!(node, Node::Implies) {
                    self.flipped(|g| g.formula(left))
                } else {
                    self.formula(left)
                };
                let r = self.formula(rest - left);
                match node {
                    Node::And => Formula::and(l, r),
                    Node::Or => Formula::or(l, r),
                    _ => Formula::implies(l, r),
                }
            }
            Node::Box => Formula::boxed(self.formula(rest)),
            Node::Diamond => Formula::diamond(self.formula(rest)),
            Node::Global => Formula::global(self.formula(rest)),
            Node::ExistsGlobal => Formula::exists_global(self.formula(rest)),
            Node::Exists | Node::Forall => {
                self.eps_left -= 1;
                let var = self.binder_name(false);
                let body = self.bound(&var, Binding::Prop, rest);
                if matches!(node, Node::Exists) {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                }
            }
            Node::Nu => {
                self.eps_left -= 1;
                let var = self.binder_name(true);
                let body = self.bound(&var, Binding::Nu(self.negated), rest);
                Formula::nu(var, body)
            }
            Node::Action => {
                let e = self.rng.random_range(0..self.features.actions);
                Formula::action(format!("a{e}"), self.formula(rest))
            }
            Node::Announce => {
                let left = self.rng.random_range(1..rest);
                let saved = self.scope.clone();
                let saved_features = self.features;
                for (_, b) in self.scope.iter_mut() {
                    if matches!(b, Binding::Nu(_)) {
                        *b = Binding::Blocked;
                    }
                }
                self.features.actions = 0;
                self.features.announce = false;
                let announced = self.formula(left);
                self.scope = saved;
                self.features = saved_features;
                Formula::announce(announced, self.formula(rest - left))
            }
        }
    }

    fn flipped(&mut self, f: impl FnOnce(&mut Self) -> Formula) -> Formula {
        self.negated = !self.negated;
        let out = f(self);
        self.negated = !self.negated;
        out
    }

    fn bound(&mut self, var: &str, binding: Binding, budget: usize) -> Formula {
        self.scope.push((var.to_string(), binding));
        let body = self.formula(budget);
        self.scope.pop();
        body
    }

    /// Binders reuse proposition names (shadowing) or take `x`/`y`. Fixpoint
    /// variables avoid proposition names when action modalities are around,
    /// since preconditions mentioning them would break positivity.
    fn binder_name(&mut self, fixpoint: bool) -> String {
        let mut names: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        if !(fixpoint && self.features.actions > 0) {
            names.extend(self.props.iter().cloned());
        }
        names.swap_remove(self.rng.random_range(0..names.len()))
    }

    fn allowed(&self, name: &str) -> bool {
        match self.scope.iter().rev().find(|(v, _)| v == name) {
            None | Some((_, Binding::Prop)) => true,
            Some((_, Binding::Nu(parity))) => *parity == self.negated,
            Some((_, Binding::Blocked)) => false,
        }
    }

    fn leaf(&mut self) -> Formula {
        if self.features.nominals > 0 && self.rng.random_ratio(1, 5) {
            return Formula::Nominal(self.rng.random_range(0..self.features.nominals));
        }
        let mut names: Vec<&str> = self.props.iter().map(String::as_str).collect();
        for (v, _) in &self.scope {
            if !names.contains(&v.as_str()) {
                names.push(v);
            }
        }
        names.retain(|n| self.allowed(n));
        if names.is_empty() || self.rng.random_ratio(1, 8) {
            return if self.rng.random_bool(0.5) {
                Formula::Top
            } else {
                Formula::Bottom
            };
        }
        Formula::atom(names[self.rng.random_range(0..names.len())])
    }
}

/// A random model: 1 to `max_worlds` worlds named `w0, w1, ...`, each edge
/// present with `edge_probability`, and a uniform valuation of every
/// generator proposition.
pub fn random_model(cfg: &FuzzConfig, case_index: usize) -> KripkeModel {
    let mut rng = rng_for(cfg.seed, case_index, None, Label::Model);
    gen_model(&mut rng, cfg.max_worlds, &prop_names(cfg.max_props), cfg.edge_probability)
}

/// A random event model: 1 to `max_events` events named `a0, a1, ...`, one
/// of them with precondition `true`, the others quantifier-free modal
/// formulas of size at most 4.
pub fn random_event_model(cfg: &FuzzConfig, case_index: usize) -> EventModel {
    let mut rng = rng_for(cfg.seed, case_index, None, Label::Events);
    gen_event_model(&mut rng, cfg)
}

/// A random formula of the given language with size at most
/// `max_formula_size` and at most `max_eps` quantifiers. Nominals range
/// over `j0 .. j{max_events-1}`, action modalities over `a0 ..`, and
/// fixpoint variables occur positively.
pub fn random_formula(cfg: &FuzzConfig, case_index: usize, language: LanguageTag) -> Formula {
    let mut rng = rng_for(cfg.seed, case_index, None, Label::Formula);
    let features = Features::for_tag(language, cfg.max_events);
    formula_with(&mut rng, cfg, features, cfg.max_formula_size, cfg.max_eps)
}

fn formula_with(rng: &mut ChaCha8Rng, cfg: &FuzzConfig, features: Features, max_size: usize, eps: usize) -> Formula {
    let props = prop_names(cfg.max_props);
    let size = rng.random_range(1..=max_size.max(1));
    Gen::new(rng, &props, features, eps).formula(size)
}

// ---------------------------------------------------------------------------
// Cases

/// Everything one suite case needs; unused parts are left empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case {
    pub model: KripkeModel,
    pub events: Option<EventModel>,
    /// Index of the event under test.
    pub event: Option<usize>,
    pub formula: Formula,
    /// Announced formula (announcement suite).
    pub announced: Option<Formula>,
    /// World duplicated to build the bisimilar partner (bisimulation suite).
    pub duplicate: Option<usize>,
    /// Pointed test models (degree suite).
    pub testset: Vec<PointedModel>,
}

impl Case {
    fn new(model: KripkeModel, formula: Formula) -> Case {
        Case {
            model,
            events: None,
            event: None,
            formula,
            announced: None,
            duplicate: None,
            testset: Vec::new(),
        }
    }

    /// The formula evaluated on the left of the suite's equation, if any.
    pub fn display_formula(&self) -> Formula {
        match (&self.events, self.event, &self.announced) {
            (Some(a), Some(e), _) => Formula::action(a.event_name(e), self.formula.clone()),
            (_, _, Some(announced)) => Formula::announce(announced.clone(), self.formula.clone()),
            _ => self.formula.clone(),
        }
    }
}

/// Why a case failed; the extensions are those of the two sides that were
/// expected to agree, when the failure is a disagreement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub detail: String,
    pub expected: Option<WorldSet>,
    pub actual: Option<WorldSet>,
}

impl Failure {
    fn message(detail: impl Into<String>) -> Failure {
        Failure {
            detail: detail.into(),
            expected: None,
            actual: None,
        }
    }

    fn mismatch(detail: impl Into<String>, expected: WorldSet, actual: WorldSet) -> Failure {
        Failure {
            detail: detail.into(),
            expected: Some(expected),
            actual: Some(actual),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Failure {
        Failure::message(format!("evaluation error: {e}"))
    }
}

/// Measurements from a passing case.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CaseStats {
    /// `(input size, output size, output quantifier count)` of a translation.
    pub blowup: Option<(usize, usize, usize)>,
    /// Recursive translation calls whose measure was checked.
    pub measure_calls: usize,
    /// Worlds where the tested event's precondition fails.
    pub precondition_false_points: usize,
}

fn budget() -> EvalBudget {
    EvalBudget::default()
}

fn ext(m: &KripkeModel, f: &Formula, events: Option<&EventModel>) -> Result<WorldSet, EvalError> {
    Evaluator::new(events, budget()).extension(&TaggedModel::untagged(m.clone()), f)
}

/// Regenerates case `case_index` of `suite`.
pub fn generate_case(cfg: &FuzzConfig, suite: Suite, case_index: usize) -> Case {
    let rng = |label| rng_for(cfg.seed, case_index, Some(suite), label);
    let props = prop_names(cfg.max_props);
    let model = gen_model(&mut rng(Label::Model), cfg.max_worlds, &props, cfg.edge_probability);
    let events = gen_event_model(&mut rng(Label::Events), cfg);
    let mut pick = rng(Label::Pick);
    let event = pick.random_range(0..events.len());
    let mut frng = rng(Label::Formula);
    match suite {
        Suite::Translation => {
            let features = Features::for_tag(LanguageTag::ScopedNominals, cfg.max_events);
            let formula = formula_with(&mut frng, cfg, features, cfg.max_formula_size, cfg.max_eps);
            Case {
                events: Some(events),
                event: Some(event),
                ..Case::new(model, formula)
            }
        }
        Suite::Announcement => {
            let features = Features::for_tag(LanguageTag::BaseMso, 0);
            let formula = formula_with(&mut frng, cfg, features, cfg.max_formula_size, cfg.max_eps);
            let announced = formula_with(
                &mut rng(Label::Aux),
                cfg,
                features,
                cfg.max_formula_size.min(6),
                cfg.max_eps.min(1),
            );
            Case {
                announced: Some(announced),
                ..Case::new(model, formula)
            }
        }
        Suite::Nominals => Case {
            events: Some(events),
            ..Case::new(model, Formula::Top)
        },
        Suite::Fixpoint => {
            let mut g = Gen::new(
                &mut frng,
                &props,
                Features::for_tag(LanguageTag::MuFragment, 0),
                cfg.max_eps.saturating_sub(1),
            );
            let var = g.binder_name(true);
            let size = g.rng.random_range(1..=cfg.max_formula_size.min(8));
            let body = g.bound(&var, Binding::Nu(false), size);
            Case::new(model, Formula::nu(var, body))
        }
        Suite::BisimLift => {
            let features = Features {
                modal: true,
                global: true,
                nu: true,
                actions: events.len(),
                announce: true,
                ..Features::default()
            };
            let formula = formula_with(&mut frng, cfg, features, cfg.max_formula_size, cfg.max_eps);
            let duplicate = pick.random_range(0..model.len());
            Case {
                events: Some(events),
                duplicate: Some(duplicate),
                ..Case::new(model, formula)
            }
        }
        Suite::Degree => {
            let features = Features {
                modal: true,
                nominals: cfg.max_events,
                ..Features::default()
            };
            let formula = formula_with(&mut frng, cfg, features, cfg.max_formula_size, 0);
            let mut trng = rng(Label::Testset);
            let testset = (0..DEGREE_TESTSET_SIZE)
                .map(|_| {
                    let model = gen_model(&mut trng, DEGREE_TESTSET_WORLDS, &props, cfg.edge_probability);
                    let point = trng.random_range(0..model.len());
                    PointedModel { model, point }
                })
                .collect();
            Case {
                events: Some(events),
                event: Some(event),
                testset,
                ..Case::new(model, formula)
            }
        }
    }
}

/// Pointed models per degree case.
pub const DEGREE_TESTSET_SIZE: usize = 20;
/// Largest test model in the degree suite.
pub const DEGREE_TESTSET_WORLDS: usize = 5;

/// Runs the suite's oracle comparison on one case.
pub fn check_case(suite: Suite, case: &Case) -> Result<CaseStats, Failure> {
    match suite {
        Suite::Translation => check_translation(case),
        Suite::Announcement => check_announcement(case),
        Suite::Nominals => check_nominals(case),
        Suite::Fixpoint => check_fixpoint(case),
        Suite::BisimLift => check_bisim(case),
        Suite::Degree => check_degree_case(case),
    }
}

fn parts(case: &Case) -> Result<(&EventModel, usize), Failure> {
    match (&case.events, case.event) {
        (Some(a), Some(e)) if e < a.len() => Ok((a, e)),
        _ => Err(Failure::message("case has no event under test")),
    }
}

fn check_translation(case: &Case) -> Result<CaseStats, Failure> {
    let (a, e) = parts(case)?;
    let alpha = a.event_name(e);
    let lhs_formula = Formula::action(alpha, case.formula.clone());
    let lhs = ext(&case.model, &lhs_formula, Some(a))?;
    let (out, steps) =
        translate_event_traced(a, alpha, &case.formula).map_err(|err| Failure::message(format!("translation failed: {err}")))?;
    let rhs = ext(&case.model, &out, None)?;
    if lhs != rhs {
        return Err(Failure::mismatch(format!("translation disagrees: {out}"), lhs, rhs));
    }
    let violations = crate::translator::measure_violations(&steps);
    if let Some(&i) = violations.first() {
        let s = &steps[i];
        return Err(Failure::message(format!(
            "measure did not decrease at {} ({}, {})",
            s.at, s.eps, s.size
        )));
    }
    let pre = ext(&case.model, a.pre(e), None)?;
    let output_eps = out.quantifier_count().map_err(|err| Failure::message(err.to_string()))?;
    Ok(CaseStats {
        blowup: Some((lhs_formula.size(), out.size(), output_eps)),
        measure_calls: steps.len(),
        precondition_false_points: pre.complement().count(),
    })
}

fn check_announcement(case: &Case) -> Result<CaseStats, Failure> {
    let announced = case
        .announced
        .as_ref()
        .ok_or_else(|| Failure::message("case has no announced formula"))?;
    let lhs_formula = Formula::announce(announced.clone(), case.formula.clone());
    let lhs = ext(&case.model, &lhs_formula, None)?;
    let (out, steps) = translate_announcement_traced(announced, &case.formula)
        .map_err(|err| Failure::message(format!("translation failed: {err}")))?;
    let rhs = ext(&case.model, &out, None)?;
    if lhs != rhs {
        return Err(Failure::mismatch(format!("translation disagrees: {out}"), lhs, rhs));
    }
    let a = announcement_event_model(announced).map_err(|err| Failure::message(err.to_string()))?;
    let via_product = ext(
        &case.model,
        &Formula::action(a.event_name(0), case.formula.clone()),
        Some(&a),
    )?;
    if lhs != via_product {
        return Err(Failure::mismatch("relativisation disagrees with product update", lhs, via_product));
    }
    let violations = crate::translator::measure_violations(&steps);
    if let Some(&i) = violations.first() {
        return Err(Failure::message(format!("measure did not decrease at {}", steps[i].at)));
    }
    let output_eps = out.quantifier_count().map_err(|err| Failure::message(err.to_string()))?;
    Ok(CaseStats {
        blowup: Some((lhs_formula.size(), out.size(), output_eps)),
        measure_calls: steps.len(),
        precondition_false_points: 0,
    })
}

fn check_nominals(case: &Case) -> Result<CaseStats, Failure> {
    let a = case
        .events
        .as_ref()
        .ok_or_else(|| Failure::message("case has no event model"))?;
    let none = case.model.no_worlds();
    for i in 0..a.len() {
        let alpha = a.event_name(i);
        let pre = ext(&case.model, a.pre(i), None)?;
        for k in 0..a.len() {
            let phi = Formula::action(alpha, Formula::Nominal(k));
            let got = ext(&case.model, &phi, Some(a))?;
            let want = if i == k { pre.clone() } else { none.clone() };
            if got != want {
                return Err(Failure::mismatch(format!("{phi}"), want, got));
            }
            let rewritten = translate_event(a, alpha, &Formula::Nominal(k))
                .map_err(|err| Failure::message(err.to_string()))?;
            let via = ext(&case.model, &rewritten, None)?;
            if via != want {
                return Err(Failure::mismatch(format!("translation of {phi} gave {rewritten}"), want, via));
            }
        }
    }
    Ok(CaseStats::default())
}

fn check_fixpoint(case: &Case) -> Result<CaseStats, Failure> {
    let Formula::Nu(var, body) = &case.formula else {
        return Err(Failure::message("case formula is not a fixpoint"));
    };
    let iterative = ext(&case.model, &case.formula, None)?;
    let oracle = gfp_oracle(&case.model, var, body, None, &budget())?;
    if iterative != oracle {
        return Err(Failure::mismatch("iteration disagrees with the union of post-fixpoints", oracle, iterative));
    }
    let encoded = encode_nu(&case.formula);
    let via_exists =
        Evaluator::naive(None, budget()).extension(&TaggedModel::untagged(case.model.clone()), &encoded)?;
    if via_exists != oracle {
        return Err(Failure::mismatch(format!("quantified encoding {encoded} disagrees"), oracle, via_exists));
    }
    Ok(CaseStats::default())
}

fn check_bisim(case: &Case) -> Result<CaseStats, Failure> {
    let a = case
        .events
        .as_ref()
        .ok_or_else(|| Failure::message("case has no event model"))?;
    let w = case
        .duplicate
        .filter(|&w| w < case.model.len())
        .ok_or_else(|| Failure::message("case has no world to duplicate"))?;
    let m1 = &case.model;
    let copy = m1.len();
    let m2 = m1.duplicate_world(w, &format!("w{copy}"));
    let z = greatest_bisimulation(m1, &m2);
    if !is_bisimulation(m1, &m2, &z) {
        return Err(Failure::message("greatest bisimulation fails the bisimulation check"));
    }
    if !z.contains(w, copy) || (0..m1.len()).any(|s| !z.contains(s, s)) {
        return Err(Failure::message("greatest bisimulation misses the duplication pairs"));
    }
    let lifted = lift_bisimulation(&z, a, m1, &m2, &budget()).map_err(|err| Failure::message(err.to_string()))?;
    if !is_bisimulation(&lifted.left.model, &lifted.right.model, &lifted.relation) {
        return Err(Failure::message("lifted relation is not a bisimulation between the products"));
    }
    if lifted
        .relation
        .pairs
        .iter()
        .any(|&(i, j)| lifted.left.tag(i) != lifted.right.tag(j))
    {
        return Err(Failure::message("lifted relation pairs different events"));
    }
    agree_on_relation(&case.formula, a, &m1.clone().into(), &m2.into(), &z.pairs)?;
    agree_on_relation(&case.formula, a, &lifted.left, &lifted.right, &lifted.relation.pairs)?;
    Ok(CaseStats::default())
}

fn agree_on_relation(
    phi: &Formula,
    a: &EventModel,
    m1: &TaggedModel,
    m2: &TaggedModel,
    pairs: &BTreeSet<(usize, usize)>,
) -> Result<(), Failure> {
    let e1 = Evaluator::new(Some(a), budget()).extension(m1, phi)?;
    let e2 = Evaluator::new(Some(a), budget()).extension(m2, phi)?;
    if let Some(&(s, t)) = pairs.iter().find(|&&(s, t)| e1.contains(s) != e2.contains(t)) {
        return Err(Failure::mismatch(
            format!(
                "truth differs at related worlds {} and {}",
                m1.model.world_name(s),
                m2.model.world_name(t)
            ),
            e1,
            e2,
        ));
    }
    Ok(())
}

type Signature = (
    BTreeSet<String>,
    BTreeSet<(String, String)>,
    BTreeMap<String, BTreeSet<String>>,
);

fn signature(m: &KripkeModel) -> Signature {
    let names = m.world_names().iter().cloned().collect();
    let edges = m
        .edges()
        .map(|(a, b)| (m.world_name(a).to_string(), m.world_name(b).to_string()))
        .collect();
    let val = m
        .props()
        .map(|(p, x)| (p.clone(), x.iter().map(|w| m.world_name(w).to_string()).collect()))
        .collect();
    (names, edges, val)
}

fn check_degree_case(case: &Case) -> Result<CaseStats, Failure> {
    let (a, e) = parts(case)?;
    let d = case.formula.modal_depth();
    let pre_degrees: Vec<usize> = a.preconditions().iter().map(Formula::modal_depth).collect();
    let k = k_star(&pre_degrees, d).map_err(|err| Failure::message(err.to_string()))?;
    let phi = Formula::action(a.event_name(e), case.formula.clone());
    let result = check_degree(&phi, k, &case.testset, Some(a), &budget()).map_err(|err| Failure::message(err.to_string()))?;
    if let DegreeVerdict::Counterexample {
        index, full, truncated, ..
    } = result.verdict
    {
        return Err(Failure::message(format!(
            "test model {index}: {full} on the full model, {truncated} within radius {k}"
        )));
    }
    // The radius-d neighbourhood of (w, a) in the product should be the
    // same whether the product is taken of the model or of its radius-k ball.
    for (index, pm) in case.testset.iter().enumerate() {
        let full = product_with_pairs(&pm.model, a, &budget())?;
        let Some(at) = full.index_of(pm.point, e) else {
            continue;
        };
        let ball = full.tagged.model.generated_submodel_k(at, d).map_err(EvalError::from)?;
        let sub = pm.model.generated_submodel_k(pm.point, k).map_err(EvalError::from)?;
        let small = product_with_pairs(&sub.model, a, &budget())?;
        let Some(at_small) = small.index_of(sub.point, e) else {
            return Err(Failure::message(format!(
                "test model {index}: precondition lost within radius {k}"
            )));
        };
        let ball_small = small.tagged.model.generated_submodel_k(at_small, d).map_err(EvalError::from)?;
        if signature(&ball.model) != signature(&ball_small.model) {
            return Err(Failure::message(format!(
                "test model {index}: radius-{d} product neighbourhoods differ"
            )));
        }
    }
    Ok(CaseStats::default())
}

// ---------------------------------------------------------------------------
// Shrinking

fn node_count(f: &Formula) -> usize {
    1 + f.children().into_iter().map(node_count).sum::<usize>()
}

fn replace_at(f: &Formula, target: usize, with: &Formula) -> Formula {
    fn go(f: &Formula, target: usize, with: &Formula, next: &mut usize) -> Formula {
        let here = *next;
        *next += 1;
        if here == target {
            *next += node_count(f) - 1;
            return with.clone();
        }
        f.map_children(|c| go(c, target, with, next))
    }
    go(f, target, with, &mut 0)
}

fn subterm_at(f: &Formula, target: usize) -> Option<&Formula> {
    fn go<'f>(f: &'f Formula, target: usize, next: &mut usize) -> Option<&'f Formula> {
        if *next == target {
            return Some(f);
        }
        *next += 1;
        for c in f.children() {
            if let Some(found) = go(c, target, next) {
                return Some(found);
            }
        }
        None
    }
    go(f, target, &mut 0)
}

fn uses_model(suite: Suite) -> bool {
    !matches!(suite, Suite::Degree)
}

fn shrink_candidates(suite: Suite, case: &Case) -> Vec<Case> {
    let mut out = Vec::new();
    if uses_model(suite) && case.model.len() > 1 {
        for w in 0..case.model.len() {
            if case.duplicate == Some(w) {
                continue;
            }
            let keep: Vec<usize> = (0..case.model.len()).filter(|&v| v != w).collect();
            out.push(Case {
                model: case.model.restrict(&keep),
                duplicate: case.duplicate.map(|d| if d > w { d - 1 } else { d }),
                ..case.clone()
            });
        }
    }
    for pos in 1..node_count(&case.formula) {
        for c in [Formula::Top, Formula::Bottom] {
            if subterm_at(&case.formula, pos) != Some(&c) {
                out.push(Case {
                    formula: replace_at(&case.formula, pos, &c),
                    ..case.clone()
                });
            }
        }
    }
    out
}

/// Greedily removes worlds and replaces subformulas by constants while the
/// case keeps failing. Returns the final case, its failure and the number
/// of accepted steps.
pub fn shrink(suite: Suite, case: Case, failure: Failure) -> (Case, Failure, usize) {
    const MAX_STEPS: usize = 64;
    let (mut case, mut failure) = (case, failure);
    let mut steps = 0;
    'outer: while steps < MAX_STEPS {
        for candidate in shrink_candidates(suite, &case) {
            if let Err(f) = check_case(suite, &candidate) {
                case = candidate;
                failure = f;
                steps += 1;
                continue 'outer;
            }
        }
        break;
    }
    (case, failure, steps)
}

// ---------------------------------------------------------------------------
// Runs and reports

/// Source of wall-clock time for per-case timing; the core has none.
pub trait Clock {
    fn now_micros(&self) -> u64;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureRecord {
    pub case_index: usize,
    pub case: Case,
    pub failure: Failure,
    pub shrunk: Case,
    pub shrunk_failure: Failure,
    pub shrink_steps: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlowupStats {
    pub samples: usize,
    pub mean_size_ratio: f64,
    pub max_size_ratio: f64,
    pub mean_output_eps: f64,
    pub max_output_eps: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MeasureStats {
    /// Recursive translation calls checked.
    pub calls: usize,
    /// Cases failing the decrease check.
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<FailureRecord>,
    pub blowup: BlowupStats,
    pub measure: MeasureStats,
    /// Worlds, summed over cases, where the tested event could not happen.
    pub precondition_false_points: usize,
    pub total_micros: Option<u64>,
    pub max_case_micros: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzReport {
    pub config: FuzzConfig,
    pub suites: Vec<SuiteReport>,
}

impl FuzzReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }

    pub fn suite(&self, suite: Suite) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.suite == suite)
    }
}

/// Outcome of one case, with timing when a clock is supplied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub case: Case,
    pub outcome: Result<CaseStats, Failure>,
    pub micros: Option<u64>,
}

pub fn run_case(cfg: &FuzzConfig, suite: Suite, case_index: usize, clock: Option<&dyn Clock>) -> CaseResult {
    let start = clock.map(Clock::now_micros);
    let case = generate_case(cfg, suite, case_index);
    let outcome = check_case(suite, &case);
    let micros = clock.zip(start).map(|(c, s)| c.now_micros().saturating_sub(s));
    CaseResult { case, outcome, micros }
}

pub fn run_fuzz(cfg: &FuzzConfig) -> Result<FuzzReport, ConfigError> {
    run_fuzz_with_clock(cfg, None)
}

pub fn run_fuzz_with_clock(cfg: &FuzzConfig, clock: Option<&dyn Clock>) -> Result<FuzzReport, ConfigError> {
    cfg.validate()?;
    let suites = cfg.suites.iter().map(|&s| run_suite(cfg, s, clock)).collect();
    Ok(FuzzReport {
        config: cfg.clone(),
        suites,
    })
}

fn run_suite(cfg: &FuzzConfig, suite: Suite, clock: Option<&dyn Clock>) -> SuiteReport {
    let mut report = SuiteReport {
        suite,
        cases: cfg.cases,
        passed: 0,
        failed: 0,
        first_failure: None,
        blowup: BlowupStats::default(),
        measure: MeasureStats::default(),
        precondition_false_points: 0,
        total_micros: clock.map(|_| 0),
        max_case_micros: clock.map(|_| 0),
    };
    let (mut ratio_sum, mut eps_sum) = (0.0f64, 0usize);
    for i in 0..cfg.cases {
        let result = run_case(cfg, suite, i, clock);
        if let Some(us) = result.micros {
            report.total_micros = report.total_micros.map(|t| t + us);
            report.max_case_micros = report.max_case_micros.map(|m| m.max(us));
        }
        match result.outcome {
            Ok(stats) => {
                report.passed += 1;
                report.measure.calls += stats.measure_calls;
                report.precondition_false_points += stats.precondition_false_points;
                if let Some((input, output, eps)) = stats.blowup {
                    let ratio = output as f64 / input as f64;
                    let b = &mut report.blowup;
                    b.samples += 1;
                    b.max_size_ratio = b.max_size_ratio.max(ratio);
                    b.max_output_eps = b.max_output_eps.max(eps);
                    ratio_sum += ratio;
                    eps_sum += eps;
                }
            }
            Err(failure) => {
                report.failed += 1;
                if failure.detail.starts_with("measure did not decrease") {
                    report.measure.violations += 1;
                }
                if report.first_failure.is_none() {
                    let (shrunk, shrunk_failure, shrink_steps) = shrink(suite, result.case.clone(), failure.clone());
                    report.first_failure = Some(FailureRecord {
                        case_index: i,
                        case: result.case,
                        failure,
                        shrunk,
                        shrunk_failure,
                        shrink_steps,
                    });
                }
            }
        }
    }
    if report.blowup.samples > 0 {
        report.blowup.mean_size_ratio = ratio_sum / report.blowup.samples as f64;
        report.blowup.mean_output_eps = eps_sum as f64 / report.blowup.samples as f64;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn small(cases: usize, suite: Suite) -> FuzzConfig {
        FuzzConfig {
            seed: 7,
            cases,
            ..FuzzConfig::default()
        }
        .with_suites([suite])
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = FuzzConfig::default();
        assert_eq!(random_model(&cfg, 3), random_model(&cfg, 3));
        assert_eq!(random_event_model(&cfg, 3), random_event_model(&cfg, 3));
        for tag in [LanguageTag::BaseMso, LanguageTag::ScopedNominals, LanguageTag::MuFragment] {
            assert_eq!(random_formula(&cfg, 9, tag), random_formula(&cfg, 9, tag));
        }
        assert_eq!(generate_case(&cfg, Suite::Degree, 4), generate_case(&cfg, Suite::Degree, 4));
    }

    #[test]
    fn generator_bounds() {
        let cfg = FuzzConfig {
            max_worlds: 1,
            edge_probability: Ratio::new(0, 1).unwrap(),
            ..FuzzConfig::default()
        };
        for i in 0..50 {
            let m = random_model(&cfg, i);
            assert_eq!(m.len(), 1);
            assert_eq!(m.edges().count(), 0);
            let a = random_event_model(&cfg, i);
            assert!(a.preconditions().contains(&Formula::Top));
            assert!(a.preconditions().iter().all(|p| p.quantifier_count() == Ok(0)));
            for tag in [LanguageTag::BaseMso, LanguageTag::ScopedNominals, LanguageTag::MuFragment] {
                let f = random_formula(&cfg, i, tag);
                assert!(f.size() <= cfg.max_formula_size);
                assert!(f.subformulas().iter().filter(|g| g.binder().is_some()).count() <= cfg.max_eps);
                assert!(f.nominals().iter().all(|&k| k < cfg.max_events));
                assert!(f.check_positivity().is_ok());
            }
        }
        let none = FuzzConfig {
            max_eps: 0,
            ..FuzzConfig::default()
        };
        for i in 0..50 {
            assert_eq!(random_formula(&none, i, LanguageTag::BaseMso).quantifier_count(), Ok(0));
        }
    }

    #[test]
    fn config_validation() {
        let cfg = FuzzConfig {
            cases: 0,
            ..FuzzConfig::default()
        };
        assert_eq!(run_fuzz(&cfg), Err(ConfigError::NoCases));
        let cfg = FuzzConfig {
            edge_probability: Ratio { num: 3, den: 2 },
            ..FuzzConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::BadProbability(_))));
    }

    #[test]
    fn pinned_translation_case() {
        let model = KripkeModel::from_names(&["w0", "w1"], &[("w0", "w1"), ("w1", "w1")], &[("p", alloc::vec!["w0"])])
            .unwrap();
        let events = EventModel::from_names(
            &["a0", "a1"],
            &[("a0", "a0"), ("a0", "a1"), ("a1", "a1")],
            &[("a0", Formula::atom("p")), ("a1", Formula::Top)],
        )
        .unwrap();
        for (e, src) in [(0, "[] p"), (1, "exists q. (q & <> ~q)"), (0, "j0 & (forall q. (q -> [] (q | j1)))")] {
            let case = Case {
                events: Some(events.clone()),
                event: Some(e),
                ..Case::new(model.clone(), parse_formula(src).unwrap())
            };
            let stats = check_case(Suite::Translation, &case).unwrap();
            assert!(stats.measure_calls > 0);
        }
    }

    #[test]
    fn every_suite_passes_a_few_cases() {
        for suite in Suite::ALL {
            let report = run_fuzz(&small(15, suite)).unwrap();
            let s = &report.suites[0];
            assert_eq!(s.failed, 0, "{}: {:?}", suite.name(), s.first_failure);
            assert_eq!(s.passed, 15);
        }
    }

    #[test]
    fn shrinking_reaches_a_small_failing_case() {
        // A deliberately false claim: the fixpoint suite rejects non-fixpoint
        // formulas, so any case with its root replaced keeps failing.
        let model = random_model(&FuzzConfig::default(), 1).duplicate_world(0, "extra");
        let case = Case::new(model, parse_formula("(p & q) | [] r").unwrap());
        let failure = check_case(Suite::Fixpoint, &case).unwrap_err();
        let (shrunk, again, steps) = shrink(Suite::Fixpoint, case, failure);
        assert!(steps > 0);
        assert_eq!(shrunk.model.len(), 1);
        assert!(check_case(Suite::Fixpoint, &shrunk).is_err());
        assert_eq!(again.detail, "case formula is not a fixpoint");
    }

    #[test]
    fn replace_positions() {
        let f = parse_formula("(p & [] q) | r").unwrap();
        assert_eq!(node_count(&f), 6);
        assert_eq!(subterm_at(&f, 3), Some(&parse_formula("[] q").unwrap()));
        assert_eq!(replace_at(&f, 3, &Formula::Top), parse_formula("(p & true) | r").unwrap());
        assert_eq!(replace_at(&f, 4, &Formula::Top), parse_formula("(p & [] true) | r").unwrap());
    }
}
