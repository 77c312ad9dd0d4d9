//! Greedy arc-eager dependency parser with an averaged perceptron.
//!
//! Trained from the static oracle on projectivized gold trees. Words left
//! without a head when the buffer empties are attached to the first of them,
//! which becomes the root, so every output is a single-rooted projective tree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::perceptron::{Trainer, Weights};
use crate::conllu::{Sentence, Treebank};
use crate::error::{Error, Result};
use crate::tree;

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Shift,
    Reduce,
    LeftArc(u16),
    RightArc(u16),
}

impl Action {
    fn class(self) -> usize {
        match self {
            Action::Shift => 0,
            Action::Reduce => 1,
            Action::LeftArc(l) => 2 + 2 * l as usize,
            Action::RightArc(l) => 3 + 2 * l as usize,
        }
    }

    fn from_class(c: usize) -> Action {
        match c {
            0 => Action::Shift,
            1 => Action::Reduce,
            c if c % 2 == 0 => Action::LeftArc(((c - 2) / 2) as u16),
            c => Action::RightArc(((c - 3) / 2) as u16),
        }
    }
}

/// Words of one sentence as the feature extractor sees them.
struct Words {
    forms: Vec<String>,
    tags: Vec<String>,
}

impl Words {
    fn new(sentence: &Sentence) -> Words {
        Words {
            forms: sentence.tokens.iter().map(|t| t.form.to_lowercase()).collect(),
            tags: sentence.tokens.iter().map(|t| t.upos.clone()).collect(),
        }
    }

    fn len(&self) -> usize {
        self.forms.len()
    }
}

const NONE: &str = "<none>";

struct State {
    stack: Vec<usize>,
    next: usize,
    heads: Vec<Option<usize>>,
    labels: Vec<Option<u16>>,
    leftmost: Vec<Option<usize>>,
    rightmost: Vec<Option<usize>>,
}

impl State {
    fn new(n: usize) -> State {
        State {
            stack: Vec::with_capacity(n),
            next: 0,
            heads: vec![None; n],
            labels: vec![None; n],
            leftmost: vec![None; n],
            rightmost: vec![None; n],
        }
    }

    fn done(&self, n: usize) -> bool {
        self.next >= n
    }

    fn legal(&self, a: Action, n: usize) -> bool {
        let top = self.stack.last();
        let buffer = self.next < n;
        match a {
            Action::Shift => buffer,
            Action::Reduce => top.is_some_and(|&s| self.heads[s].is_some()),
            Action::LeftArc(_) => buffer && top.is_some_and(|&s| self.heads[s].is_none()),
            Action::RightArc(_) => buffer && top.is_some(),
        }
    }

    fn attach(&mut self, head: usize, dep: usize, label: u16) {
        self.heads[dep] = Some(head);
        self.labels[dep] = Some(label);
        if dep < head {
            if self.leftmost[head].is_none_or(|l| dep < l) {
                self.leftmost[head] = Some(dep);
            }
        } else if self.rightmost[head].is_none_or(|r| dep > r) {
            self.rightmost[head] = Some(dep);
        }
    }

    fn apply(&mut self, a: Action) {
        match a {
            Action::Shift => {
                self.stack.push(self.next);
                self.next += 1;
            }
            Action::Reduce => {
                self.stack.pop();
            }
            Action::LeftArc(l) => {
                let s = self.stack.pop().expect("legal left-arc");
                self.attach(self.next, s, l);
            }
            Action::RightArc(l) => {
                let s = *self.stack.last().expect("legal right-arc");
                self.attach(s, self.next, l);
                self.stack.push(self.next);
                self.next += 1;
            }
        }
    }
}

/// Reusable feature buffer.
#[derive(Default)]
struct Features {
    items: Vec<String>,
    used: usize,
}

impl Features {
    fn clear(&mut self) {
        self.used = 0;
    }

    fn push(&mut self, args: std::fmt::Arguments<'_>) {
        if self.used == self.items.len() {
            self.items.push(String::new());
        }
        let s = &mut self.items[self.used];
        s.clear();
        s.write_fmt(args).expect("writing to String");
        self.used += 1;
    }

    fn as_slice(&self) -> &[String] {
        &self.items[..self.used]
    }
}

fn extract(state: &State, words: &Words, labels: &[String], f: &mut Features) {
    let n = words.len();
    let form = |i: Option<usize>| i.map_or(NONE, |i| words.forms[i].as_str());
    let tag = |i: Option<usize>| i.map_or(NONE, |i| words.tags[i].as_str());
    let label = |i: Option<usize>| {
        i.and_then(|i| state.labels[i])
            .map_or(NONE, |l| labels[l as usize].as_str())
    };

    let s0 = state.stack.last().copied();
    let s1 = state.stack.len().checked_sub(2).map(|i| state.stack[i]);
    let b0 = (state.next < n).then_some(state.next);
    let b1 = (state.next + 1 < n).then_some(state.next + 1);
    let b2 = (state.next + 2 < n).then_some(state.next + 2);
    let before_b0 = b0.and_then(|b| b.checked_sub(1));
    let after_s0 = s0.and_then(|s| (s + 1 < n).then_some(s + 1));
    let s0h = s0.and_then(|s| state.heads[s]);
    let s0l = s0.and_then(|s| state.leftmost[s]);
    let s0r = s0.and_then(|s| state.rightmost[s]);
    let b0l = b0.and_then(|b| state.leftmost[b]);

    let (s0w, s0t, b0w, b0t) = (form(s0), tag(s0), form(b0), tag(b0));
    let (b1t, b2t, s1t) = (tag(b1), tag(b2), tag(s1));
    let dist = match (s0, b0) {
        (Some(s), Some(b)) => (b - s).min(5),
        _ => 0,
    };

    f.clear();
    f.push(format_args!("bias"));
    f.push(format_args!("s0w={s0w}"));
    f.push(format_args!("s0t={s0t}"));
    f.push(format_args!("s0wt={s0w}/{s0t}"));
    f.push(format_args!("b0w={b0w}"));
    f.push(format_args!("b0t={b0t}"));
    f.push(format_args!("b0wt={b0w}/{b0t}"));
    f.push(format_args!("b1w={}", form(b1)));
    f.push(format_args!("b1t={b1t}"));
    f.push(format_args!("b2t={b2t}"));
    f.push(format_args!("s1t={s1t}"));
    f.push(format_args!("s1w={}", form(s1)));
    f.push(format_args!("s0t.b0t={s0t}/{b0t}"));
    f.push(format_args!("s0w.b0t={s0w}/{b0t}"));
    f.push(format_args!("s0t.b0w={s0t}/{b0w}"));
    f.push(format_args!("s0w.b0w={s0w}/{b0w}"));
    f.push(format_args!("s0t.b0t.b1t={s0t}/{b0t}/{b1t}"));
    f.push(format_args!("b0t.b1t.b2t={b0t}/{b1t}/{b2t}"));
    f.push(format_args!("s1t.s0t.b0t={s1t}/{s0t}/{b0t}"));
    f.push(format_args!("s0ht.s0t.b0t={}/{s0t}/{b0t}", tag(s0h)));
    f.push(format_args!("s0t.s0lt.b0t={s0t}/{}/{b0t}", tag(s0l)));
    f.push(format_args!("s0t.s0rt.b0t={s0t}/{}/{b0t}", tag(s0r)));
    f.push(format_args!("s0t.b0t.b0lt={s0t}/{b0t}/{}", tag(b0l)));
    f.push(format_args!("s0l={}", label(s0)));
    f.push(format_args!("s0ll.s0rl={}/{}", label(s0l), label(s0r)));
    f.push(format_args!("b0ll={}", label(b0l)));
    f.push(format_args!("s0t.hashead={s0t}/{}", s0h.is_some() as u8));
    f.push(format_args!("dist.s0t.b0t={dist}/{s0t}/{b0t}"));
    f.push(format_args!("prevb0t.b0t={}/{b0t}", tag(before_b0)));
    f.push(format_args!("s0t.nexts0t={s0t}/{}", tag(after_s0)));
    f.push(format_args!("s0w.dist={s0w}/{dist}"));
    f.push(format_args!("b0w.dist={b0w}/{dist}"));
}

/// Static arc-eager oracle for a projective gold tree (0-based heads).
fn oracle(state: &State, gold_heads: &[Option<usize>], gold_labels: &[u16], pending: &[usize]) -> Action {
    let n = gold_heads.len();
    let Some(&s) = state.stack.last() else {
        return Action::Shift;
    };
    if state.next >= n {
        return Action::Reduce;
    }
    let b = state.next;
    if gold_heads[s] == Some(b) {
        return Action::LeftArc(gold_labels[s]);
    }
    if gold_heads[b] == Some(s) {
        return Action::RightArc(gold_labels[b]);
    }
    if state.heads[s].is_some() && pending[s] == 0 {
        return Action::Reduce;
    }
    Action::Shift
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineModel {
    pub labels: Vec<String>,
    pub root_label: String,
    pub weights: Weights,
    pub epochs: usize,
    pub seed: u64,
}

impl BaselineModel {
    fn n_classes(labels: usize) -> usize {
        2 + 2 * labels
    }

    fn label_id(&self, label: &str) -> Option<u16> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok().map(|i| i as u16)
    }

    pub fn parse_sentence(&self, sentence: &Sentence) -> Sentence {
        let words = Words::new(sentence);
        let n = words.len();
        let mut state = State::new(n);
        let mut features = Features::default();
        let mut scores = Vec::new();
        while !state.done(n) {
            extract(&state, &words, &self.labels, &mut features);
            self.weights.score(features.as_slice(), &mut scores);
            let action = best_legal(&state, &scores, n);
            state.apply(action);
        }
        let mut out = sentence.clone();
        let root = (0..n).find(|&i| state.heads[i].is_none());
        for (i, token) in out.tokens.iter_mut().enumerate() {
            match (state.heads[i], root) {
                (Some(h), _) => {
                    token.head = Some(h + 1);
                    token.deprel = state.labels[i].map_or("dep".to_string(), |l| self.labels[l as usize].clone());
                }
                (None, Some(r)) if r == i => {
                    token.head = Some(0);
                    token.deprel = self.root_label.clone();
                }
                (None, Some(r)) => {
                    token.head = Some(r + 1);
                    token.deprel = "dep".to_string();
                }
                (None, None) => unreachable!("some word is unattached"),
            }
        }
        out
    }
}

fn best_legal(state: &State, scores: &[f32], n: usize) -> Action {
    let mut best: Option<(usize, f32)> = None;
    for (c, &s) in scores.iter().enumerate() {
        if !state.legal(Action::from_class(c), n) {
            continue;
        }
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((c, s));
        }
    }
    Action::from_class(best.expect("some action is legal").0)
}

/// Trains on every fully annotated sentence. Non-projective trees are
/// projectivized by lifting.
pub fn train_baseline(treebank: &Treebank, epochs: usize, seed: u64) -> Result<BaselineModel> {
    let data: Vec<(&Sentence, Vec<usize>)> = treebank
        .sentences
        .iter()
        .filter_map(|s| {
            let mut heads = s.heads()?;
            tree::is_tree(&heads).then(|| {
                tree::projectivize(&mut heads);
                (s, heads)
            })
        })
        .collect();
    if data.is_empty() {
        return Err(Error::Training("no annotated sentences to train on".to_string()));
    }

    let labels: Vec<String> = data
        .iter()
        .flat_map(|(s, heads)| s.tokens.iter().zip(heads).filter(|(_, &h)| h != 0).map(|(t, _)| t.deprel.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut root_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (s, heads) in &data {
        for (t, &h) in s.tokens.iter().zip(heads) {
            if h == 0 {
                *root_counts.entry(t.deprel.as_str()).or_default() += 1;
            }
        }
    }
    let root_label = root_counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(l, _)| l.to_string())
        .unwrap_or_else(|| "root".to_string());

    let mut model = BaselineModel {
        weights: Weights::empty(BaselineModel::n_classes(labels.len())),
        labels,
        root_label,
        epochs,
        seed,
    };
    if epochs == 0 {
        return Ok(model);
    }

    let encoded: Vec<(Words, Vec<Option<usize>>, Vec<u16>)> = data
        .iter()
        .map(|(s, heads)| {
            let gold_heads = heads.iter().map(|&h| h.checked_sub(1)).collect();
            let gold_labels = s
                .tokens
                .iter()
                .map(|t| model.label_id(&t.deprel).unwrap_or(0))
                .collect();
            (Words::new(s), gold_heads, gold_labels)
        })
        .collect();

    let mut trainer = Trainer::new(model.weights.n_classes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut features = Features::default();
    let mut scores = Vec::new();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (words, gold_heads, gold_labels) = &encoded[i];
            let n = words.len();
            let mut pending = vec![0usize; n];
            for h in gold_heads.iter().flatten() {
                pending[*h] += 1;
            }
            let mut state = State::new(n);
            while !state.done(n) {
                let gold = oracle(&state, gold_heads, gold_labels, &pending);
                extract(&state, words, &model.labels, &mut features);
                trainer.score(features.as_slice(), &mut scores);
                let guess = best_legal(&state, &scores, n);
                trainer.update(gold.class(), guess.class(), features.as_slice());
                if let Action::LeftArc(_) | Action::RightArc(_) = gold {
                    let dep = match gold {
                        Action::LeftArc(_) => *state.stack.last().expect("stack"),
                        _ => state.next,
                    };
                    if let Some(h) = gold_heads[dep] {
                        pending[h] -= 1;
                    }
                }
                state.apply(gold);
            }
        }
    }
    model.weights = trainer.average();
    Ok(model)
}

/// Parses every sentence; the returned time covers inference only.
pub fn parse_baseline(model: &BaselineModel, input: &Treebank) -> (Treebank, f64) {
    let start = Instant::now();
    let sentences: Vec<Sentence> = input.sentences.iter().map(|s| model.parse_sentence(s)).collect();
    let secs = start.elapsed().as_secs_f64();
    (Treebank::new(sentences), secs)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    epochs: usize,
    seed: u64,
    labels: Vec<String>,
    root_label: String,
    n_classes: usize,
    weights: BTreeMap<String, Vec<(u16, f32)>>,
}

pub fn save_model<W: Write>(model: &BaselineModel, mut sink: W) -> Result<()> {
    let file = ModelFile {
        version: MODEL_VERSION,
        epochs: model.epochs,
        seed: model.seed,
        labels: model.labels.clone(),
        root_label: model.root_label.clone(),
        n_classes: model.weights.n_classes,
        weights: model
            .weights
            .sorted()
            .into_iter()
            .map(|(name, row)| (name.to_string(), row.to_vec()))
            .collect(),
    };
    serde_json::to_writer(&mut sink, &file)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}

pub fn load_model<R: Read>(source: R) -> Result<BaselineModel> {
    let file: ModelFile =
        serde_json::from_reader(source).map_err(|e| Error::Store(format!("malformed parser model: {e}")))?;
    if file.version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            expected: MODEL_VERSION,
            found: file.version,
        });
    }
    if file.n_classes != BaselineModel::n_classes(file.labels.len()) {
        return Err(Error::Store("parser model class count disagrees with labels".to_string()));
    }
    let mut weights = Weights::empty(file.n_classes);
    for (name, row) in file.weights {
        if row.iter().any(|&(c, _)| c as usize >= file.n_classes) {
            return Err(Error::Store(format!("feature '{name}' has an out-of-range class")));
        }
        weights.index.insert(name, weights.rows.len() as u32);
        weights.rows.push(row);
    }
    Ok(BaselineModel {
        labels: file.labels,
        root_label: file.root_label,
        weights,
        epochs: file.epochs,
        seed: file.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::{self, Token};

    const FIXTURE: &str = "\
1\tThe\t_\tDET\t_\t_\t2\tdet\t_\t_
2\tdog\t_\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\tbarked\t_\tVERB\t_\t_\t0\troot\t_\t_
4\t.\t_\tPUNCT\t_\t_\t3\tpunct\t_\t_

1\tShe\t_\tPRON\t_\t_\t2\tnsubj\t_\t_
2\tsaw\t_\tVERB\t_\t_\t0\troot\t_\t_
3\ta\t_\tDET\t_\t_\t5\tdet\t_\t_
4\tbig\t_\tADJ\t_\t_\t5\tamod\t_\t_
5\tcat\t_\tNOUN\t_\t_\t2\tobj\t_\t_

1\tCats\t_\tNOUN\t_\t_\t3\tnsubj\t_\t_
2\tquickly\t_\tADV\t_\t_\t3\tadvmod\t_\t_
3\tran\t_\tVERB\t_\t_\t0\troot\t_\t_
4\thome\t_\tADV\t_\t_\t3\tadvmod\t_\t_

1\tIn\t_\tADP\t_\t_\t3\tcase\t_\t_
2\tthe\t_\tDET\t_\t_\t3\tdet\t_\t_
3\tpark\t_\tNOUN\t_\t_\t6\tobl\t_\t_
4\t,\t_\tPUNCT\t_\t_\t6\tpunct\t_\t_
5\tkids\t_\tNOUN\t_\t_\t6\tnsubj\t_\t_
6\tplay\t_\tVERB\t_\t_\t0\troot\t_\t_

1\tWhat\t_\tPRON\t_\t_\t0\troot\t_\t_
2\tnow\t_\tADV\t_\t_\t1\tadvmod\t_\t_
3\t?\t_\tPUNCT\t_\t_\t1\tpunct\t_\t_

";

    #[test]
    fn memorizes_small_treebank() {
        let gold = conllu::from_str(FIXTURE).unwrap();
        let model = train_baseline(&gold, 30, 7).unwrap();
        let (parsed, secs) = parse_baseline(&model, &gold.strip_annotations());
        assert!(secs >= 0.0);
        assert_eq!(parsed, gold);
    }

    #[test]
    fn zero_epochs_gives_flat_tree() {
        let gold = conllu::from_str(FIXTURE).unwrap();
        let model = train_baseline(&gold, 0, 1).unwrap();
        assert!(model.weights.is_empty());
        let (parsed, _) = parse_baseline(&model, &gold);
        for s in &parsed.sentences {
            assert!(s.check_tree().is_ok());
            assert_eq!(s.tokens[0].head, Some(0));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let gold = conllu::from_str(FIXTURE).unwrap();
        let a = train_baseline(&gold, 5, 42).unwrap();
        let b = train_baseline(&gold, 5, 42).unwrap();
        assert_eq!(a.weights.sorted(), b.weights.sorted());
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        save_model(&a, &mut buf_a).unwrap();
        save_model(&b, &mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn model_round_trip() {
        let gold = conllu::from_str(FIXTURE).unwrap();
        let model = train_baseline(&gold, 3, 1).unwrap();
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let loaded = load_model(buf.as_slice()).unwrap();
        assert_eq!(parse_baseline(&loaded, &gold).0, parse_baseline(&model, &gold).0);
    }

    #[test]
    fn single_word_is_root() {
        let gold = conllu::from_str(FIXTURE).unwrap();
        let model = train_baseline(&gold, 3, 1).unwrap();
        let one = Treebank::new(vec![Sentence::new(vec![Token::new(1, "Hi", "INTJ", None, "_")])]);
        let (parsed, _) = parse_baseline(&model, &one);
        assert_eq!(parsed.sentences[0].tokens[0].head, Some(0));
    }

    #[test]
    fn empty_treebank_is_an_error() {
        assert!(matches!(train_baseline(&Treebank::default(), 1, 0), Err(Error::Training(_))));
    }

    #[test]
    fn outputs_are_projective() {
        let gold = conllu::from_str(FIXTURE).unwrap();
        let model = train_baseline(&gold, 2, 3).unwrap();
        let (parsed, _) = parse_baseline(&model, &gold);
        for s in &parsed.sentences {
            let heads = s.heads().unwrap();
            assert!(tree::is_tree(&heads) && tree::is_projective(&heads));
        }
    }
}
