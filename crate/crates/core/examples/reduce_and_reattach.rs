//! Shrinks a sentence with a template, "parses" the rest and puts the
//! removed words back.

use treefrag::conllu::{Sentence, Token};
use treefrag::miner::{Template, TemplateStore};
use treefrag::{reattach, reduce_input, ParsedReduced, Treebank};

fn main() -> treefrag::Result<()> {
    let input = Treebank::new(vec![Sentence::new(vec![
        Token::new(1, "The", "DET", None, "_"),
        Token::new(2, "old", "ADJ", None, "_"),
        Token::new(3, "dog", "NOUN", None, "_"),
        Token::new(4, "barked", "VERB", None, "_"),
    ])]);
    let store = TemplateStore {
        templates: vec![Template {
            tags: vec!["ADJ".into(), "NOUN".into()],
            head_pattern: "1 - false".parse()?,
            label_pattern: "amod - false".parse()?,
            head_count: 95,
            label_count: 93,
            frequency: 100,
            rank: None,
        }],
        ..TemplateStore::default()
    };

    let reduced = reduce_input(&input, &store)?;
    let kept: Vec<&str> = reduced.treebank.sentences[0].tokens.iter().map(|t| t.form.as_str()).collect();
    println!("parser sees: {} ({:.1}% fewer words)", kept.join(" "), reduced.reduction_pct());

    // stand-in for a parser run on "The dog barked"
    let mut parsed = reduced.treebank.clone();
    for (t, (head, rel)) in parsed.sentences[0].tokens.iter_mut().zip([(2, "det"), (3, "nsubj"), (0, "root")]) {
        t.head = Some(head);
        t.deprel = rel.to_string();
    }

    let out = reattach(ParsedReduced {
        treebank: &parsed,
        records: &reduced.records,
    })?;
    print!("{}", treefrag::conllu::to_string(&out.treebank));
    Ok(())
}
