//! Trains the built-in arc-eager parser and scores it.
//!
//!     cargo run --release --example train_parser -- [train.conllu dev.conllu]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treefrag::synthetic::{english_like_treebank, GrammarOptions};
use treefrag::{conllu, eval, parser};

fn main() -> treefrag::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (train, dev) = match args.as_slice() {
        [train, dev] => (conllu::read_path(train.as_ref())?, conllu::read_path(dev.as_ref())?),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let options = GrammarOptions::default();
            (english_like_treebank(&mut rng, 3000, &options), english_like_treebank(&mut rng, 500, &options))
        }
    };

    for epochs in [1, 3, 8] {
        let (model, train_secs) = eval::wall_time(|| parser::train_baseline(&train, epochs, 1));
        let model = model?;
        let (parsed, secs) = parser::parse_baseline(&model, &dev.strip_annotations());
        let report = eval::score(&parsed, &dev)?;
        println!(
            "{epochs} epochs: UAS {:.2} LAS {:.2}, {} features, trained in {train_secs:.1}s, {:.0} tokens/sec",
            report.uas,
            report.las,
            model.weights.len(),
            dev.word_count() as f64 / secs
        );
    }
    Ok(())
}
