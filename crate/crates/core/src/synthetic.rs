//! Generated treebanks for tests, examples and benchmarks when no real
//! treebank is at hand.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::conllu::{Sentence, Token, Treebank};

/// Random projective trees over a small tag alphabet.
pub fn random_projective_treebank<R: Rng>(rng: &mut R, max_sentences: usize, max_len: usize, tags: usize) -> Treebank {
    let n_sentences = rng.gen_range(1..=max_sentences.max(1));
    let sentences = (0..n_sentences)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.max(1));
            random_projective_sentence(rng, len, tags)
        })
        .collect();
    Treebank::new(sentences)
}

const LABELS: [&str; 4] = ["a", "b", "c", "d"];

pub fn random_projective_sentence<R: Rng>(rng: &mut R, len: usize, tags: usize) -> Sentence {
    let mut heads = vec![0usize; len];
    build_span(rng, &mut heads, 0, len, 0);
    let tokens = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let tag = format!("T{}", rng.gen_range(0..tags.max(1)));
            let label = if h == 0 { "root" } else { LABELS[rng.gen_range(0..LABELS.len())] };
            Token::new(i + 1, &format!("w{}", i + 1), &tag, Some(h), label)
        })
        .collect();
    Sentence::new(tokens)
}

/// Fills `heads[lo..hi]` with one subtree headed by `head` (1-based, 0 = root).
fn build_span<R: Rng>(rng: &mut R, heads: &mut [usize], lo: usize, hi: usize, head: usize) {
    if lo >= hi {
        return;
    }
    let r = rng.gen_range(lo..hi);
    heads[r] = head;
    for (a, b) in [(lo, r), (r + 1, hi)] {
        // split the side into consecutive dependents of r
        let mut start = a;
        while start < b {
            let end = rng.gen_range(start + 1..=b);
            build_span(rng, heads, start, end, r + 1);
            start = end;
        }
    }
}

/// Knobs for the English-like generator.
#[derive(Clone, Debug)]
pub struct GrammarOptions {
    /// Chance that a determiner or adjective skips its noun and attaches higher.
    pub head_noise: f64,
    /// Chance that a modifier receives an unusual label.
    pub label_noise: f64,
}

impl Default for GrammarOptions {
    fn default() -> Self {
        GrammarOptions {
            head_noise: 0.03,
            label_noise: 0.08,
        }
    }
}

struct Builder<'r, R> {
    rng: &'r mut R,
    opts: &'r GrammarOptions,
    words: Vec<(&'static str, &'static str, usize, &'static str)>,
}

const NOUNS: &[&str] = &["dog", "house", "report", "city", "man", "idea", "car", "team", "year", "game", "water", "price"];
const PROPNS: &[&str] = &["Paris", "John", "Mary", "Google", "London", "Smith"];
const PRONS: &[&str] = &["he", "she", "they", "it", "we", "I", "you"];
const VERBS: &[&str] = &["saw", "made", "took", "found", "said", "bought", "sold", "liked", "ran", "left"];
const ADJS: &[&str] = &["big", "new", "old", "good", "small", "red", "other", "last"];
const DETS: &[&str] = &["the", "a", "this", "that", "some", "every"];
const ADPS: &[&str] = &["in", "on", "of", "with", "for", "to", "from"];
const ADVS: &[&str] = &["quickly", "also", "never", "then", "very", "really"];
const AUXS: &[&str] = &["will", "has", "can", "was", "did"];
const CCONJS: &[&str] = &["and", "or", "but"];
const NUMS: &[&str] = &["two", "three", "10", "100"];

const PENDING: usize = usize::MAX;

impl<'r, R: Rng> Builder<'r, R> {
    fn word(&mut self, tag: &'static str, vocab: &[&'static str]) -> usize {
        let form = vocab.choose(self.rng).copied().unwrap_or("x");
        self.words.push((form, tag, PENDING, "dep"));
        self.words.len() - 1
    }

    fn attach(&mut self, dep: usize, head: usize, label: &'static str) {
        self.words[dep].2 = head;
        self.words[dep].3 = label;
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    fn noun_phrase(&mut self, depth: usize) -> usize {
        let roll: f64 = self.rng.gen();
        if roll < 0.15 {
            return self.word("PRON", PRONS);
        }
        if roll < 0.25 {
            let first = self.word("PROPN", PROPNS);
            if self.chance(0.3) {
                let second = self.word("PROPN", PROPNS);
                self.attach(second, first, "flat");
            }
            return first;
        }
        let mut modifiers = Vec::new();
        if self.chance(0.75) {
            modifiers.push((self.word("DET", DETS), "det"));
        } else if self.chance(0.15) {
            modifiers.push((self.word("NUM", NUMS), "nummod"));
        }
        while modifiers.len() < 3 && self.chance(0.3) {
            if self.chance(0.2) {
                let adv = self.word("ADV", ADVS);
                let adj = self.word("ADJ", ADJS);
                self.attach(adv, adj, "advmod");
                modifiers.push((adj, "amod"));
            } else {
                modifiers.push((self.word("ADJ", ADJS), "amod"));
            }
        }
        if self.chance(0.1) {
            modifiers.push((self.word("NOUN", NOUNS), "compound"));
        }
        let noun = self.word("NOUN", NOUNS);
        for (m, label) in modifiers {
            let label = if label == "det" && self.chance(self.opts.label_noise) {
                "det:poss"
            } else {
                label
            };
            self.attach(m, noun, label);
        }
        if depth < 2 && self.chance(0.15) {
            let pp = self.prepositional(depth + 1);
            self.attach(pp, noun, "nmod");
        }
        if depth < 1 && self.chance(0.05) {
            let cc = self.word("CCONJ", CCONJS);
            let other = self.noun_phrase(depth + 1);
            self.attach(cc, other, "cc");
            self.attach(other, noun, "conj");
        }
        noun
    }

    fn prepositional(&mut self, depth: usize) -> usize {
        let adp = self.word("ADP", ADPS);
        let noun = self.noun_phrase(depth);
        self.attach(adp, noun, "case");
        noun
    }

    fn clause(&mut self, depth: usize) -> usize {
        let subject = self.noun_phrase(depth);
        let aux = self.chance(0.25).then(|| self.word("AUX", AUXS));
        let adv = self.chance(0.15).then(|| self.word("ADV", ADVS));
        let verb = self.word("VERB", VERBS);
        self.attach(subject, verb, "nsubj");
        if let Some(a) = aux {
            self.attach(a, verb, "aux");
        }
        if let Some(a) = adv {
            let label = if self.chance(self.opts.label_noise) { "obl:npmod" } else { "advmod" };
            self.attach(a, verb, label);
        }
        if self.chance(0.6) {
            let obj = self.noun_phrase(depth);
            self.attach(obj, verb, "obj");
        }
        if self.chance(0.4) {
            let obl = self.prepositional(depth);
            self.attach(obl, verb, "obl");
        }
        if self.chance(0.15) {
            let a = self.word("ADV", ADVS);
            self.attach(a, verb, "advmod");
        }
        if depth == 0 && self.chance(0.1) {
            let mark = self.word("SCONJ", &["that", "because", "if"]);
            let inner = self.clause(depth + 1);
            self.attach(mark, inner, "mark");
            self.attach(inner, verb, "ccomp");
        }
        verb
    }

    /// Lifts a few determiners and adjectives from their noun to the noun's
    /// head. Only the outermost modifier moves, so no arcs cross.
    fn add_head_noise(&mut self) {
        for i in 0..self.words.len() {
            let (_, tag, head, _) = self.words[i];
            if !(tag == "DET" || tag == "ADJ") || head == PENDING {
                continue;
            }
            let grand = self.words[head].2;
            let outermost = self.words[..i].iter().all(|w| w.2 != head);
            if grand != PENDING && outermost && self.chance(self.opts.head_noise) {
                self.words[i].2 = grand;
            }
        }
    }
}

/// English-like sentences from a small phrase grammar, with a little head and
/// label noise so not every template is perfect.
pub fn english_like_treebank<R: Rng>(rng: &mut R, sentences: usize, opts: &GrammarOptions) -> Treebank {
    let out = (0..sentences)
        .map(|k| {
            let mut b = Builder {
                rng: &mut *rng,
                opts,
                words: Vec::new(),
            };
            let verb = b.clause(0);
            let punct = b.word("PUNCT", &[".", ".", "!", "?"]);
            b.attach(punct, verb, "punct");
            b.words[verb].2 = PENDING;
            b.words[verb].3 = "root";
            b.add_head_noise();
            let tokens = b
                .words
                .iter()
                .enumerate()
                .map(|(i, &(form, tag, head, label))| {
                    let head = if head == PENDING { 0 } else { head + 1 };
                    Token::new(i + 1, form, tag, Some(head), label)
                })
                .collect();
            let mut s = Sentence::new(tokens);
            s.comments.push(format!("# sent_id = synth-{}", k + 1));
            s
        })
        .collect();
    Treebank::new(out)
}
