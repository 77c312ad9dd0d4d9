//! Mine fragment templates from a dependency treebank, shrink parser input
//! with them, and put the fragments back after parsing.

pub mod cli;
pub mod conllu;
pub mod error;
pub mod eval;
pub mod miner;
pub mod parser;
pub mod pattern;
pub mod pipeline;
pub mod reattach;
pub mod reduce;
pub mod synthetic;
pub mod tree;

pub use conllu::{Sentence, TagField, Token, Treebank};
pub use error::{Error, Result};
pub use miner::{mine, mine_iterative, MiningConfig, MiningMode, Priority, Template, TemplateStore};
pub use pattern::{enumerate_patterns, extract_pattern, Eligibility, HeadPattern, LabelPattern};
pub use reattach::{reattach, ParsedReduced, Reattached};
pub use reduce::{reduce_gold, reduce_input, ReducedTreebank, ReductionRecord};
