//! Mines templates from a treebank at several thresholds.
//!
//!     cargo run --example mine_templates -- [train.conllu]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treefrag::synthetic::{english_like_treebank, GrammarOptions};
use treefrag::{conllu, mine, MiningConfig};

fn main() -> treefrag::Result<()> {
    let train = match std::env::args().nth(1) {
        Some(path) => conllu::read_path(path.as_ref())?,
        None => english_like_treebank(&mut ChaCha8Rng::seed_from_u64(1), 4000, &GrammarOptions::default()),
    };

    for setup in ["2,3:90-90", "2,3:87-87", "2,3:83-83", "2,3:80-70"] {
        let config = MiningConfig::from_setup(setup)?;
        let store = mine(&train, &config)?;
        println!(
            "{:<12} {:>4} templates, {:>4} at 100%",
            config.setup_name(),
            store.len(),
            store.perfect_count()
        );
    }

    let store = mine(&train, &MiningConfig::default())?;
    let mut top = store.templates.clone();
    top.sort_by_key(|t| std::cmp::Reverse(t.frequency));
    println!("\nmost frequent at 83-83:");
    for t in top.iter().take(8) {
        println!("  {t}");
    }
    Ok(())
}
