//! Reads CoNLL-U, inspects it and writes it back unchanged.
//!
//!     cargo run --example conllu_roundtrip -- [file.conllu]

use treefrag::conllu;

const SAMPLE: &str = "\
# sent_id = 1
# text = Don't stop.
1-2\tDon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tDo\tdo\tAUX\tVBP\t_\t3\taux\t_\t_
2\tn't\tnot\tPART\tRB\t_\t3\tadvmod\t_\t_
3\tstop\tstop\tVERB\tVB\t_\t0\troot\t_\tSpaceAfter=No
4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_

";

fn main() -> treefrag::Result<()> {
    let (text, treebank) = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)?;
            let tb = conllu::read_conllu_lenient(text.as_bytes())?;
            (text, tb)
        }
        None => (SAMPLE.to_string(), conllu::from_str(SAMPLE)?),
    };

    let unsupported = treebank.sentences.iter().filter(|s| !s.is_supported()).count();
    println!(
        "{} sentences, {} words, {} with empty nodes",
        treebank.len(),
        treebank.word_count(),
        unsupported
    );
    if let Some(first) = treebank.sentences.first() {
        for t in &first.tokens {
            println!("  {:>2} {:<10} {:<6} head {:?} {}", t.id, t.form, t.upos, t.head, t.deprel);
        }
    }
    let written = conllu::to_string(&treebank);
    println!("byte-identical after writing: {}", written == text);
    Ok(())
}
