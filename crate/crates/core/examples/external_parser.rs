//! Drives an external parser through files. Any command that reads CoNLL-U
//! from {input} and writes a parse to {output} will do; here a small awk
//! script attaches every word to its left neighbour.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treefrag::parser::{run_external, ExternalParserSpec};
use treefrag::synthetic::{english_like_treebank, GrammarOptions};
use treefrag::eval;

const CHAIN: &str = r#"awk -F'\t' -v OFS='\t' '/^[0-9]+\t/ { $7 = $1 - 1; $8 = ($1 == 1) ? "root" : "dep" } { print }' {input} > {output}"#;

fn main() -> treefrag::Result<()> {
    let gold = english_like_treebank(&mut ChaCha8Rng::seed_from_u64(5), 200, &GrammarOptions::default());
    let mut spec = ExternalParserSpec::new(CHAIN);
    spec.timeout_secs = 30.0;

    let (parsed, secs) = run_external(&spec, &gold.strip_annotations())?;
    let report = eval::score(&parsed, &gold)?;
    println!("left-chain baseline: UAS {:.2} LAS {:.2} in {secs:.3}s", report.uas, report.las);

    match run_external(&ExternalParserSpec::new("echo 'model not found' >&2; exit 3"), &gold) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("failing command reported as:\n{e}"),
    }
    Ok(())
}
