//! Model checking for propositionally quantified modal logic under product
//! update, and elimination of action and announcement modalities into the
//! static language.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod bitset;
pub mod harness;
pub mod models;
pub mod parser;
pub mod semantics;
pub mod syntax;
pub mod translator;

pub use analysis::{greatest_bisimulation, is_bisimulation, lift_bisimulation, Bisimulation, DegreeCheckResult};
pub use bitset::{BitSet, WorldSet};
pub use harness::{run_fuzz, FuzzConfig, FuzzReport, Suite};
pub use models::{EventModel, KripkeModel, PointedModel, TaggedModel};
pub use parser::{parse_formula, print_formula, ParseError, SourceSpan};
pub use semantics::{extension, holds, EvalBudget, EvalError};
pub use syntax::{Formula, LanguageTag, PropName, SyntaxError};
pub use translator::{
    eliminate_all, translate_announcement, translate_event, RewriteStep, TranslateError, TranslationReport,
};
