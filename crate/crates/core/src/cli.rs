//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser as ClapParser, Subcommand};

use crate::conllu::{self, TagField};
use crate::error::{Error, Result};
use crate::eval::{self, ThroughputBasis};
use crate::miner::{MiningConfig, MiningMode, Priority};
use crate::parser::{self, ExternalParserSpec, Parser};
use crate::pipeline::{self, ParserChoice, PipelineConfig};
use crate::reattach::{reattach, ParsedReduced};
use crate::reduce::{self, ReduceOptions};

pub const CONFIG_ENV: &str = "TREEFRAG_CONFIG";

#[derive(Debug, ClapParser)]
#[command(name = "treefrag", version, about = "Shrink dependency parser input with mined tree-fragment templates")]
pub struct Cli {
    /// JSON pipeline configuration. Flags override its values.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    pub show_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine templates from a gold treebank.
    Mine {
        #[arg(long)]
        train: Option<PathBuf>,
        #[command(flatten)]
        mining: MiningArgs,
        /// Where to write the template store.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Remove template matches from a treebank and write the sidecar records.
    Reduce {
        #[arg(long)]
        store: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        records: PathBuf,
        /// Treat input as gold and keep every sentence a well-formed tree.
        #[arg(long)]
        gold: bool,
        /// With --gold, skip matches whose removed words govern words outside them.
        #[arg(long, requires = "gold")]
        strict_gold: bool,
    },
    /// Train the built-in parser.
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Parse a CoNLL-U file with the built-in or an external parser.
    Parse {
        #[command(flatten)]
        parser: ParserArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Put removed fragments back into a parse of reduced input.
    Reattach {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        records: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Score system output against gold.
    Eval {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Time a parser on full input and, given a store, on reduced input.
    Bench {
        #[command(flatten)]
        parser: ParserArgs,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long)]
        repetitions: Option<usize>,
        #[arg(long, value_enum)]
        throughput_basis: Option<ThroughputBasis>,
        #[arg(long)]
        json: bool,
    },
    /// Run mine, reduce, train, parse, reattach and score in one go.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args, Default)]
pub struct MiningArgs {
    /// Shorthand such as 2,3:83-83 for n-gram sizes and thresholds.
    #[arg(long)]
    pub setup: Option<String>,
    #[arg(long)]
    pub head_threshold: Option<f64>,
    #[arg(long)]
    pub label_threshold: Option<f64>,
    /// Mine bigrams. Giving --bigrams or --trigrams selects exactly those sizes.
    #[arg(long)]
    pub bigrams: bool,
    #[arg(long)]
    pub trigrams: bool,
    #[arg(long)]
    pub min_count: Option<u64>,
    /// upos or xpos.
    #[arg(long)]
    pub tag_field: Option<TagField>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub priority: Option<PriorityArg>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ModeArg {
    BagOfRules,
    Iterative,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum PriorityArg {
    ConfidenceFirst,
    NounProximity,
}

impl MiningArgs {
    pub fn apply(&self, config: &mut MiningConfig) -> Result<()> {
        if let Some(setup) = &self.setup {
            let parsed = MiningConfig::from_setup(setup)?;
            config.head_threshold = parsed.head_threshold;
            config.label_threshold = parsed.label_threshold;
            config.use_bigrams = parsed.use_bigrams;
            config.use_trigrams = parsed.use_trigrams;
        }
        if let Some(t) = self.head_threshold {
            config.head_threshold = t;
        }
        if let Some(t) = self.label_threshold {
            config.label_threshold = t;
        }
        if self.bigrams || self.trigrams {
            config.use_bigrams = self.bigrams;
            config.use_trigrams = self.trigrams;
        }
        if let Some(m) = self.min_count {
            config.min_count = m;
        }
        if let Some(f) = self.tag_field {
            config.tag_field = f;
        }
        if let Some(m) = self.mode {
            config.mode = match m {
                ModeArg::BagOfRules => MiningMode::BagOfRules,
                ModeArg::Iterative => MiningMode::Iterative,
            };
        }
        if let Some(p) = self.priority {
            config.priority = match p {
                PriorityArg::ConfidenceFirst => Priority::ConfidenceFirst,
                PriorityArg::NounProximity => Priority::NounProximity,
            };
        }
        if let Some(b) = self.batch_size {
            config.batch_size = b;
        }
        if let Some(m) = self.max_iterations {
            config.max_iterations = m;
        }
        config.validate()
    }
}

#[derive(Debug, Args, Default)]
pub struct ParserArgs {
    /// Built-in parser model from `train`.
    #[arg(long, conflicts_with = "external")]
    pub model: Option<PathBuf>,
    /// External parser command with {input}, {output} and {model} placeholders.
    #[arg(long)]
    pub external: Option<String>,
    /// Model path substituted for {model}.
    #[arg(long, requires = "external")]
    pub external_model: Option<PathBuf>,
    #[arg(long, requires = "external")]
    pub timeout: Option<f64>,
    #[arg(long, requires = "external")]
    pub workdir: Option<PathBuf>,
}

impl ParserArgs {
    fn external_spec(&self) -> Option<ExternalParserSpec> {
        self.external.as_ref().map(|command| {
            let mut spec = ExternalParserSpec::new(command.clone());
            spec.model = self.external_model.clone();
            if let Some(t) = self.timeout {
                spec.timeout_secs = t;
            }
            spec.workdir = self.workdir.clone();
            spec
        })
    }

    fn load(&self, config: &PipelineConfig) -> Result<Parser> {
        if let Some(spec) = self.external_spec() {
            return Ok(Parser::External(spec));
        }
        match (&self.model, &config.parser) {
            (Some(path), _) => Ok(Parser::Builtin(pipeline::read_model(path)?)),
            (None, ParserChoice::External(spec)) => Ok(Parser::External(spec.clone())),
            (None, ParserChoice::Builtin) => Err(Error::Usage("give --model or --external".to_string())),
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct PipelineArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub dev: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Directory for every intermediate file and the report.
    #[arg(long)]
    pub workdir: Option<PathBuf>,
    /// Extra setups to compare, e.g. --setups 2,3:87-87 --setups 2,3:83-83.
    #[arg(long)]
    pub setups: Vec<String>,
    #[command(flatten)]
    pub mining: MiningArgs,
    #[arg(long)]
    pub external: Option<String>,
    #[arg(long, requires = "external")]
    pub external_model: Option<PathBuf>,
    #[arg(long, requires = "external")]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long, value_enum)]
    pub throughput_basis: Option<ThroughputBasis>,
    /// Train the built-in parser on the full training set for every setup.
    #[arg(long)]
    pub train_on_full: bool,
    #[arg(long)]
    pub strict_gold: bool,
}

impl PipelineArgs {
    pub fn apply(&self, config: &mut PipelineConfig) -> Result<()> {
        for (slot, value) in [
            (&mut config.train, &self.train),
            (&mut config.dev, &self.dev),
            (&mut config.test, &self.test),
        ] {
            if value.is_some() {
                *slot = value.clone();
            }
        }
        if let Some(w) = &self.workdir {
            config.workdir = w.clone();
        }
        self.mining.apply(&mut config.mining)?;
        if let Some(setup) = &self.mining.setup {
            config.setups = vec![setup.clone()];
        }
        if !self.setups.is_empty() {
            config.setups = self.setups.clone();
        }
        if let Some(command) = &self.external {
            let mut spec = ExternalParserSpec::new(command.clone());
            spec.model = self.external_model.clone();
            if let Some(t) = self.timeout {
                spec.timeout_secs = t;
            }
            config.parser = ParserChoice::External(spec);
        }
        if let Some(e) = self.epochs {
            config.epochs = e;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(r) = self.repetitions {
            config.repetitions = r;
        }
        if let Some(b) = self.throughput_basis {
            config.throughput_basis = b;
        }
        if self.train_on_full {
            config.train_on_reduced = false;
        }
        if self.strict_gold {
            config.strict_gold = true;
        }
        Ok(())
    }
}

/// Parses `args` and runs the command. Returns the process exit code:
/// 0 on success, 1 when a step fails, 2 on bad usage.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn base_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut config = base_config(cli.config.as_deref())?;
    match &cli.command {
        Some(Command::Mine { mining, .. }) => mining.apply(&mut config.mining)?,
        Some(Command::Pipeline(args)) => args.apply(&mut config)?,
        _ => {}
    }
    if cli.show_config {
        writeln!(out, "{}", serde_json::to_string_pretty(&config)?)?;
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::Usage("no command given; see --help".to_string()));
    };

    match command {
        Command::Mine { train, out: path, .. } => {
            let train_path = train
                .or(config.train.clone())
                .ok_or_else(|| Error::Usage("mine needs --train".to_string()))?;
            let treebank = conllu::read_path(&train_path)?;
            let store = pipeline::mine_store(&treebank, &config.mining, Some(&train_path))?;
            pipeline::write_store(&store, &path)?;
            writeln!(
                out,
                "{}: {} templates, {} with both confidences at 100%",
                config.mining.setup_name(),
                store.len(),
                store.perfect_count()
            )?;
        }
        Command::Reduce {
            store,
            input,
            out: path,
            records,
            gold,
            strict_gold,
        } => {
            let store = pipeline::read_store(&store)?;
            let reduced = if gold {
                let treebank = conllu::read_path(&input)?;
                reduce::reduce_gold_with(&treebank, &store, ReduceOptions { strict_gold })?
            } else {
                let treebank = conllu::read_path_lenient(&input)?;
                reduce::reduce_input(&treebank, &store)?
            };
            conllu::write_path(&reduced.treebank, &path)?;
            pipeline::write_records(&reduced, &records)?;
            writeln!(
                out,
                "removed {} of {} words ({:.1}%)",
                reduced.removed_words,
                reduced.original_words,
                reduced.reduction_pct()
            )?;
        }
        Command::Train {
            train,
            epochs,
            seed,
            out: path,
        } => {
            let treebank = conllu::read_path(&train)?;
            let model = parser::train_baseline(
                &treebank,
                epochs.unwrap_or(config.epochs),
                seed.unwrap_or(config.seed),
            )?;
            pipeline::write_model(&model, &path)?;
            writeln!(out, "{} features, {} labels", model.weights.len(), model.labels.len())?;
        }
        Command::Parse {
            parser,
            input,
            out: path,
        } => {
            let parser = parser.load(&config)?;
            let treebank = conllu::read_path_lenient(&input)?;
            let (parsed, secs) = parser.parse(&treebank)?;
            conllu::write_path(&parsed, &path)?;
            writeln!(out, "parsed {} words in {secs:.3}s", treebank.word_count())?;
        }
        Command::Reattach {
            input,
            records,
            out: path,
        } => {
            let parsed = conllu::read_path_lenient(&input)?;
            let records = pipeline::read_records(&records)?;
            let restored = reattach(ParsedReduced {
                treebank: &parsed,
                records: &records,
            })?;
            conllu::write_path(&restored.treebank, &path)?;
            if !restored.malformed.is_empty() {
                let ids: Vec<String> = restored.malformed.iter().map(|i| (i + 1).to_string()).collect();
                writeln!(out, "sentences that are not well-formed trees: {}", ids.join(", "))?;
            }
        }
        Command::Eval { system, gold, json } => {
            let mut report = eval::score(&conllu::read_path_lenient(&system)?, &conllu::read_path_lenient(&gold)?)?;
            report.setup = system.display().to_string();
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(
                    out,
                    "UAS {:.2}  LAS {:.2}  ({} words, {} heads, {} labeled)",
                    report.uas, report.las, report.counts.words, report.counts.heads, report.counts.labeled
                )?;
            }
        }
        Command::Bench {
            parser,
            gold,
            store,
            repetitions,
            throughput_basis,
            json,
        } => {
            let parser = parser.load(&config)?;
            let reps = repetitions.unwrap_or(config.repetitions);
            let basis = throughput_basis.unwrap_or(config.throughput_basis);
            let store = store.map(|p| pipeline::read_store(&p)).transpose()?;
            let reports = bench(&parser, &conllu::read_path(&gold)?, store.as_ref(), reps, basis)?;
            if json {
                writeln!(out, "{}", eval::reports_to_json(&reports)?)?;
            } else {
                write!(out, "{}", eval::render_tables(&reports))?;
            }
        }
        Command::Pipeline(_) => {
            let reports = pipeline::run_pipeline(&config)?;
            write!(out, "{}", eval::render_tables(&reports))?;
            writeln!(out, "artifacts in {}", config.workdir.display())?;
        }
    }
    Ok(())
}

/// Baseline run and, with a store, a reduced run on the same gold data.
pub fn bench(
    parser: &Parser,
    gold: &conllu::Treebank,
    store: Option<&crate::miner::TemplateStore>,
    repetitions: usize,
    basis: ThroughputBasis,
) -> Result<Vec<eval::EvalReport>> {
    let input = gold.strip_annotations();
    let (parsed, times) = pipeline::timed_parse(parser, &input, repetitions)?;
    let base = eval::Throughput::from_times(gold.word_count(), &times);
    let mut baseline = eval::score(&parsed, gold)?;
    baseline.parser = parser.name();
    baseline.dataset = "gold".to_string();
    baseline.setup = "baseline".to_string();
    baseline.tokens_per_sec = Some(base);
    baseline.speedup = Some(1.0);
    let mut reports = vec![baseline];
    if let Some(store) = store {
        let (reduced, reduce_secs) = eval::wall_time(|| reduce::reduce_input(&input, store));
        let reduced = reduced?;
        let (parsed, times) = pipeline::timed_parse(parser, &reduced.treebank, repetitions)?;
        let (restored, reattach_secs) = eval::wall_time(|| {
            reattach(ParsedReduced {
                treebank: &parsed,
                records: &reduced.records,
            })
        });
        let tokens = match basis {
            ThroughputBasis::Original => reduced.original_words,
            ThroughputBasis::Reduced => reduced.original_words - reduced.removed_words,
        };
        let throughput = eval::Throughput::from_times(tokens, &times);
        let mut report = eval::score(&restored?.treebank, gold)?;
        report.parser = parser.name();
        report.dataset = "gold".to_string();
        report.setup = store.config.setup_name();
        report.word_reduction_pct = Some(reduced.reduction_pct());
        report.speedup = Some(throughput.speedup_over(&base));
        report.tokens_per_sec = Some(throughput);
        report.overhead_secs = Some(reduce_secs + reattach_secs);
        reports.push(report);
    }
    Ok(reports)
}
