//! Ordered mining finds templates that only appear once earlier fragments
//! have been removed.

use treefrag::conllu::{Sentence, Token};
use treefrag::{mine, mine_iterative, MiningConfig, Priority, Treebank};

fn sentence(words: &[(&str, &str, usize, &str)]) -> Sentence {
    Sentence::new(
        words
            .iter()
            .enumerate()
            .map(|(i, &(form, tag, head, rel))| Token::new(i + 1, form, tag, Some(head), rel))
            .collect(),
    )
}

fn main() -> treefrag::Result<()> {
    let mut sentences = Vec::new();
    for _ in 0..6 {
        sentences.push(sentence(&[("old", "ADJ", 3, "amod"), ("the", "DET", 3, "det"), ("house", "NOUN", 0, "root")]));
    }
    for _ in 0..4 {
        sentences.push(sentence(&[("the", "DET", 2, "det"), ("house", "NOUN", 0, "root")]));
    }
    let treebank = Treebank::new(sentences);
    let config = MiningConfig {
        use_trigrams: false,
        ..MiningConfig::default()
    };

    let bag = mine(&treebank, &config)?;
    println!("bag of rules:");
    for t in &bag.templates {
        println!("  {t}");
    }
    for priority in [Priority::ConfidenceFirst, Priority::NounProximity] {
        let ordered = mine_iterative(&treebank, &MiningConfig { priority, ..config.clone() })?;
        println!("iterative, {priority:?}:");
        for t in &ordered.templates {
            println!("  #{} {t}", t.rank.unwrap_or_default());
        }
    }
    Ok(())
}
