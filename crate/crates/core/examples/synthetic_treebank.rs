//! Writes English-like train/dev/test treebanks to a directory.
//!
//!     cargo run --example synthetic_treebank -- out/ 8000 1500
//!
//! The files are handy for trying the command-line tool without a real
//! treebank.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treefrag::conllu;
use treefrag::synthetic::{english_like_treebank, GrammarOptions};

fn main() -> treefrag::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic".to_string()));
    let train_size: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4000);
    let eval_size: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(800);
    std::fs::create_dir_all(&dir)?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let options = GrammarOptions::default();
    for (name, size) in [("train", train_size), ("dev", eval_size), ("test", eval_size)] {
        let treebank = english_like_treebank(&mut rng, size, &options);
        let path = dir.join(format!("{name}.conllu"));
        conllu::write_path(&treebank, &path)?;
        println!("{}: {} sentences, {} words", path.display(), treebank.len(), treebank.word_count());
    }
    Ok(())
}
