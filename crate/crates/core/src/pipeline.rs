//! The end-to-end experiment: mine, reduce, train, parse, reattach, score.
//!
//! Every intermediate is written under the work directory so each step can be
//! rerun on its own from the command line.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conllu::{self, Treebank};
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport, Throughput, ThroughputBasis};
use crate::miner::{self, MiningConfig, MiningMode, TemplateStore};
use crate::parser::{self, BaselineModel, ExternalParserSpec, Parser};
use crate::reattach::{reattach, ParsedReduced};
use crate::reduce::{self, ReduceOptions, ReducedTreebank};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ParserChoice {
    Builtin,
    External(ExternalParserSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub workdir: PathBuf,
    /// Shared mining settings; each setup overrides n-gram sizes and thresholds.
    pub mining: MiningConfig,
    /// Setups in `2,3:83-83` form. Empty means the mining settings alone.
    pub setups: Vec<String>,
    pub parser: ParserChoice,
    pub epochs: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub throughput_basis: ThroughputBasis,
    /// Retrain the built-in parser on the reduced training set for each setup.
    pub train_on_reduced: bool,
    pub strict_gold: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            train: None,
            dev: None,
            test: None,
            workdir: PathBuf::from("treefrag-out"),
            mining: MiningConfig::default(),
            setups: Vec::new(),
            parser: ParserChoice::Builtin,
            epochs: 10,
            seed: 1,
            repetitions: 5,
            throughput_basis: ThroughputBasis::Original,
            train_on_reduced: true,
            strict_gold: false,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let train = self.train.as_ref().ok_or_else(|| Error::Usage("no training treebank given".to_string()))?;
        let datasets = [Some(train), self.dev.as_ref(), self.test.as_ref()];
        for path in datasets.into_iter().flatten() {
            if !path.exists() {
                return Err(Error::Usage(format!("{} does not exist", path.display())));
            }
        }
        if self.dev.is_none() && self.test.is_none() {
            return Err(Error::Usage("give a dev or test treebank to evaluate on".to_string()));
        }
        if self.repetitions < 2 {
            return Err(Error::Usage("repetitions must be at least 2".to_string()));
        }
        self.mining.validate()?;
        for setup in &self.setups {
            MiningConfig::from_setup(setup)?;
        }
        Ok(())
    }

    /// Mining configuration for every requested setup.
    pub fn mining_configs(&self) -> Result<Vec<MiningConfig>> {
        if self.setups.is_empty() {
            return Ok(vec![self.mining.clone()]);
        }
        self.setups
            .iter()
            .map(|s| {
                let parsed = MiningConfig::from_setup(s)?;
                Ok(MiningConfig {
                    head_threshold: parsed.head_threshold,
                    label_threshold: parsed.label_threshold,
                    use_bigrams: parsed.use_bigrams,
                    use_trigrams: parsed.use_trigrams,
                    ..self.mining.clone()
                })
            })
            .collect()
    }
}

/// Directory-friendly form of a setup name.
pub fn setup_slug(config: &MiningConfig) -> String {
    config
        .setup_name()
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

pub fn write_store(store: &TemplateStore, path: &Path) -> Result<()> {
    miner::save_store(store, BufWriter::new(File::create(path)?))
}

pub fn read_store(path: &Path) -> Result<TemplateStore> {
    miner::load_store(BufReader::new(File::open(path)?))
}

pub fn write_records(reduced: &ReducedTreebank, path: &Path) -> Result<()> {
    reduce::save_records(reduced, BufWriter::new(File::create(path)?))
}

pub fn read_records(path: &Path) -> Result<Vec<reduce::ReductionRecord>> {
    reduce::load_records(BufReader::new(File::open(path)?))
}

pub fn write_model(model: &BaselineModel, path: &Path) -> Result<()> {
    parser::save_model(model, BufWriter::new(File::create(path)?))
}

pub fn read_model(path: &Path) -> Result<BaselineModel> {
    parser::load_model(BufReader::new(File::open(path)?))
}

/// Parses `input` once to warm up and then `repetitions` times; returns the
/// last parse and the parser times.
pub fn timed_parse(parser: &Parser, input: &Treebank, repetitions: usize) -> Result<(Treebank, Vec<f64>)> {
    let mut last = None;
    let times = eval::time_repeated(repetitions, || {
        let (parsed, secs) = parser.parse(input)?;
        last = Some(parsed);
        Ok(secs)
    })?;
    Ok((last.expect("at least one parse"), times))
}

/// Mines a store according to its mode.
pub fn mine_store(train: &Treebank, config: &MiningConfig, source: Option<&Path>) -> Result<TemplateStore> {
    let mut store = match config.mode {
        MiningMode::BagOfRules => miner::mine(train, config)?,
        MiningMode::Iterative => miner::mine_iterative(train, config)?,
    };
    store.provenance.source = source.map(|p| p.display().to_string());
    Ok(store)
}

struct Dataset {
    name: &'static str,
    gold: Treebank,
}

/// Runs the whole experiment and writes `report.json` and `report.txt` to
/// the work directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Vec<EvalReport>> {
    config.validate()?;
    let train_path = config.train.as_ref().expect("validated");
    let train = conllu::read_path(train_path)?;
    let mut datasets = Vec::new();
    for (name, path) in [("dev", &config.dev), ("test", &config.test)] {
        if let Some(path) = path {
            datasets.push(Dataset {
                name,
                gold: conllu::read_path(path)?,
            });
        }
    }
    fs::create_dir_all(&config.workdir)?;

    let base_dir = config.workdir.join("baseline");
    fs::create_dir_all(&base_dir)?;
    let base_parser = make_parser(config, &train, &base_dir)?;
    let parser_name = base_parser.name();

    let mut reports = Vec::new();
    let mut baselines = Vec::new();
    for data in &datasets {
        let input = data.gold.strip_annotations();
        let (parsed, times) = timed_parse(&base_parser, &input, config.repetitions)?;
        conllu::write_path(&parsed, &base_dir.join(format!("{}.parsed.conllu", data.name)))?;
        let throughput = Throughput::from_times(data.gold.word_count(), &times);
        let mut report = eval::score(&parsed, &data.gold)?;
        report.parser = parser_name.clone();
        report.dataset = data.name.to_string();
        report.setup = "baseline".to_string();
        report.tokens_per_sec = Some(throughput);
        report.speedup = Some(1.0);
        baselines.push(throughput);
        reports.push(report);
    }

    for mining in config.mining_configs()? {
        let dir = config.workdir.join(setup_slug(&mining));
        fs::create_dir_all(&dir)?;
        let store = mine_store(&train, &mining, Some(train_path))?;
        write_store(&store, &dir.join("store.json"))?;

        let options = ReduceOptions {
            strict_gold: config.strict_gold,
        };
        let parser = match (&config.parser, config.train_on_reduced) {
            (ParserChoice::Builtin, true) => {
                let reduced_train = reduce::reduce_gold_with(&train, &store, options)?;
                conllu::write_path(&reduced_train.treebank, &dir.join("train.reduced.conllu"))?;
                write_records(&reduced_train, &dir.join("train.records.json"))?;
                make_parser(config, &reduced_train.treebank, &dir)?
            }
            _ => base_parser.clone(),
        };

        for (data, baseline) in datasets.iter().zip(&baselines) {
            let input = data.gold.strip_annotations();
            let (reduced, reduce_secs) = eval::wall_time(|| reduce::reduce_input(&input, &store));
            let reduced = reduced?;
            conllu::write_path(&reduced.treebank, &dir.join(format!("{}.reduced.conllu", data.name)))?;
            write_records(&reduced, &dir.join(format!("{}.records.json", data.name)))?;

            let (parsed, times) = timed_parse(&parser, &reduced.treebank, config.repetitions)?;
            conllu::write_path(&parsed, &dir.join(format!("{}.parsed.conllu", data.name)))?;
            let (restored, reattach_secs) = eval::wall_time(|| {
                reattach(ParsedReduced {
                    treebank: &parsed,
                    records: &reduced.records,
                })
            });
            let restored = restored?;
            conllu::write_path(&restored.treebank, &dir.join(format!("{}.final.conllu", data.name)))?;

            let tokens = match config.throughput_basis {
                ThroughputBasis::Original => reduced.original_words,
                ThroughputBasis::Reduced => reduced.original_words - reduced.removed_words,
            };
            let throughput = Throughput::from_times(tokens, &times);
            let mut report = eval::score(&restored.treebank, &data.gold)?;
            report.parser = parser_name.clone();
            report.dataset = data.name.to_string();
            report.setup = mining.setup_name();
            report.word_reduction_pct = Some(reduced.reduction_pct());
            report.speedup = Some(throughput.speedup_over(baseline));
            report.tokens_per_sec = Some(throughput);
            report.overhead_secs = Some(reduce_secs + reattach_secs);
            reports.push(report);
        }
    }

    fs::write(config.workdir.join("report.json"), eval::reports_to_json(&reports)? + "\n")?;
    fs::write(config.workdir.join("report.txt"), eval::render_tables(&reports))?;
    Ok(reports)
}

fn make_parser(config: &PipelineConfig, train: &Treebank, dir: &Path) -> Result<Parser> {
    match &config.parser {
        ParserChoice::Builtin => {
            let model = parser::train_baseline(train, config.epochs, config.seed)?;
            write_model(&model, &dir.join("model.json"))?;
            Ok(Parser::Builtin(model))
        }
        ParserChoice::External(spec) => Ok(Parser::External(spec.clone())),
    }
}
