//! Dependency parsers the pipeline can drive.

pub mod arc_eager;
pub mod external;
pub mod perceptron;

pub use arc_eager::{load_model, parse_baseline, save_model, train_baseline, BaselineModel};
pub use external::{run_external, ExternalParserSpec};

use crate::conllu::Treebank;
use crate::error::Result;

/// Either the built-in greedy parser or an external command.
#[derive(Clone, Debug)]
pub enum Parser {
    Builtin(BaselineModel),
    External(ExternalParserSpec),
}

impl Parser {
    pub fn name(&self) -> String {
        match self {
            Parser::Builtin(_) => "builtin arc-eager".to_string(),
            Parser::External(spec) => {
                let program = spec.command.split_whitespace().next().unwrap_or("external");
                format!("external {program}")
            }
        }
    }

    /// Parses `input`; the time covers the parser only.
    pub fn parse(&self, input: &Treebank) -> Result<(Treebank, f64)> {
        match self {
            Parser::Builtin(model) => Ok(parse_baseline(model, input)),
            Parser::External(spec) => run_external(spec, input),
        }
    }
}
