//! Runs the whole experiment on generated data and prints the table.
//!
//!     cargo run --release --example full_pipeline -- [workdir]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treefrag::pipeline::{run_pipeline, PipelineConfig};
use treefrag::synthetic::{english_like_treebank, GrammarOptions};
use treefrag::{conllu, eval};

fn main() -> treefrag::Result<()> {
    let workdir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("treefrag-pipeline"));
    std::fs::create_dir_all(&workdir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let options = GrammarOptions::default();
    let train = workdir.join("train.conllu");
    let dev = workdir.join("dev.conllu");
    conllu::write_path(&english_like_treebank(&mut rng, 5000, &options), &train)?;
    conllu::write_path(&english_like_treebank(&mut rng, 1000, &options), &dev)?;

    let config = PipelineConfig {
        train: Some(train),
        dev: Some(dev),
        workdir: workdir.join("out"),
        setups: vec!["2,3:90-90".into(), "2,3:87-87".into(), "2,3:83-83".into()],
        epochs: 5,
        ..PipelineConfig::default()
    };
    let reports = run_pipeline(&config)?;
    print!("{}", eval::render_tables(&reports));
    for r in reports.iter().filter(|r| r.overhead_secs.is_some()) {
        println!("{}: reduce + reattach took {:.3}s", r.setup, r.overhead_secs.unwrap_or_default());
    }
    println!("artifacts in {}", config.workdir.display());
    Ok(())
}
