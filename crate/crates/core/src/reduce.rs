//! Input reduction: collapse every matched n-gram to its head word.
//!
//! Matching looks at tags only. The record kept for each sentence says which
//! words were removed, by which template, and how original positions map to
//! reduced ones, which is everything [`crate::reattach`] needs to restore the
//! full sentence after parsing.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::conllu::{MultiwordToken, Sentence, Token, Treebank};
use crate::error::{Error, Result};
use crate::miner::{Template, TemplateStore};
use crate::pattern::{HeadPattern, LabelPattern};
use crate::tree;

pub const RECORD_VERSION: u32 = 1;

/// One applied template. Positions are original 1-based word ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    /// Index of the template in its store.
    pub template: usize,
    pub tags: Vec<String>,
    pub head_pattern: HeadPattern,
    pub label_pattern: LabelPattern,
    /// Matched words in order. Contiguous in bag-of-rules mode; contiguous
    /// in the working sequence in iterative mode.
    pub positions: Vec<usize>,
    pub head: usize,
    pub removed: Vec<usize>,
}

impl Match {
    fn new(template_index: usize, template: &Template, positions: Vec<usize>) -> Match {
        let head = positions[template.head_index()];
        let removed = positions.iter().copied().filter(|&p| p != head).collect();
        Match {
            template: template_index,
            tags: template.tags.clone(),
            head_pattern: template.head_pattern.clone(),
            label_pattern: template.label_pattern.clone(),
            positions,
            head,
            removed,
        }
    }

    pub fn start(&self) -> usize {
        self.positions[0]
    }
}

/// What reduction did to one sentence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRecord {
    /// 0-based ordinal of the sentence in its treebank.
    pub sentence: usize,
    pub original_len: usize,
    pub matches: Vec<Match>,
    /// `forward[id - 1]` is the reduced id of original word `id`, if kept.
    pub forward: Vec<Option<usize>>,
    /// `inverse[r - 1]` is the original id of reduced word `r`.
    pub inverse: Vec<usize>,
    /// Removed words as they appeared in the input.
    pub removed_tokens: Vec<Token>,
    pub dropped_multiword: Vec<MultiwordToken>,
}

impl ReductionRecord {
    pub fn identity(sentence: usize, len: usize) -> ReductionRecord {
        ReductionRecord {
            sentence,
            original_len: len,
            matches: Vec::new(),
            forward: (1..=len).map(Some).collect(),
            inverse: (1..=len).collect(),
            removed_tokens: Vec::new(),
            dropped_multiword: Vec::new(),
        }
    }

    pub fn reduced_len(&self) -> usize {
        self.inverse.len()
    }

    pub fn removed_count(&self) -> usize {
        self.original_len - self.inverse.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedTreebank {
    pub treebank: Treebank,
    pub records: Vec<ReductionRecord>,
    pub original_words: usize,
    pub removed_words: usize,
}

impl ReducedTreebank {
    /// Percentage of words removed.
    pub fn reduction_pct(&self) -> f64 {
        reduction_pct(self.removed_words, self.original_words)
    }
}

pub fn reduction_pct(removed: usize, original: usize) -> f64 {
    if original == 0 {
        0.0
    } else {
        100.0 * removed as f64 / original as f64
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReduceOptions {
    /// Skip occurrences whose removed words have gold dependents outside the
    /// fragment instead of promoting those dependents.
    pub strict_gold: bool,
}

/// Accepted matches over a tag sequence, sorted by first position.
pub fn find_matches(tags: &[&str], store: &TemplateStore) -> Vec<Match> {
    find_matches_filtered(tags, store, &mut |_, _, _| true)
}

type Filter<'a> = dyn FnMut(&[usize], &Template, &[usize]) -> bool + 'a;

fn find_matches_filtered(tags: &[&str], store: &TemplateStore, accept: &mut Filter<'_>) -> Vec<Match> {
    if store.is_ordered() {
        ordered_matches(tags, store, accept)
    } else {
        bag_matches(tags, store, accept)
    }
}

fn bag_matches(tags: &[&str], store: &TemplateStore, accept: &mut Filter<'_>) -> Vec<Match> {
    let index: HashMap<Vec<&str>, usize> = store
        .templates
        .iter()
        .enumerate()
        .map(|(i, t)| (t.tags.iter().map(String::as_str).collect(), i))
        .collect();
    let all: Vec<usize> = (1..=tags.len()).collect();

    let mut candidates: Vec<(usize, usize)> = Vec::new(); // (start, template)
    for start in 0..tags.len() {
        for n in [2usize, 3] {
            if start + n > tags.len() {
                continue;
            }
            if let Some(&ti) = index.get(&tags[start..start + n]) {
                candidates.push((start, ti));
            }
        }
    }
    // higher head confidence, then longer, then leftmost
    candidates.sort_by(|&(sa, ta), &(sb, tb)| {
        let (a, b) = (&store.templates[ta], &store.templates[tb]);
        b.cmp_head_confidence(a)
            .then(b.len().cmp(&a.len()))
            .then(sa.cmp(&sb))
    });

    let mut used = vec![false; tags.len()];
    let mut out = Vec::new();
    for (start, ti) in candidates {
        let t = &store.templates[ti];
        if used[start..start + t.len()].iter().any(|&u| u) {
            continue;
        }
        let positions: Vec<usize> = (start + 1..=start + t.len()).collect();
        if !accept(&positions, t, &all) {
            continue;
        }
        used[start..start + t.len()].iter_mut().for_each(|u| *u = true);
        out.push(Match::new(ti, t, positions));
    }
    out.sort_by_key(Match::start);
    out
}

fn ordered_matches(tags: &[&str], store: &TemplateStore, accept: &mut Filter<'_>) -> Vec<Match> {
    let mut order: Vec<usize> = (0..store.templates.len()).collect();
    order.sort_by_key(|&i| (store.templates[i].rank.unwrap_or(i), i));

    let mut working: Vec<usize> = (1..=tags.len()).collect();
    let mut out = Vec::new();
    for ti in order {
        let t = &store.templates[ti];
        let n = t.len();
        let mut i = 0;
        while i + n <= working.len() {
            let hit = (0..n).all(|k| tags[working[i + k] - 1] == t.tags[k]);
            if hit && accept(&working[i..i + n], t, &working) {
                let m = Match::new(ti, t, working[i..i + n].to_vec());
                working.retain(|w| !m.removed.contains(w));
                out.push(m);
            }
            // after a hit the head sits at i, so it is not reused in this pass
            i += 1;
        }
    }
    out
}

/// Reduces parser input. Gold heads, when present, are remapped.
pub fn reduce_input(treebank: &Treebank, store: &TemplateStore) -> Result<ReducedTreebank> {
    reduce_with(treebank, store, ReduceOptions::default(), false)
}

/// Reduces a gold treebank, keeping every sentence a single-rooted tree.
pub fn reduce_gold(treebank: &Treebank, store: &TemplateStore) -> Result<ReducedTreebank> {
    reduce_with(treebank, store, ReduceOptions::default(), true)
}

pub fn reduce_gold_with(treebank: &Treebank, store: &TemplateStore, options: ReduceOptions) -> Result<ReducedTreebank> {
    reduce_with(treebank, store, options, true)
}

fn reduce_with(
    treebank: &Treebank,
    store: &TemplateStore,
    options: ReduceOptions,
    gold: bool,
) -> Result<ReducedTreebank> {
    let mut sentences = Vec::with_capacity(treebank.len());
    let mut records = Vec::with_capacity(treebank.len());
    let mut removed_words = 0;
    for (idx, sentence) in treebank.sentences.iter().enumerate() {
        if gold && !sentence.has_heads() && sentence.is_supported() && !sentence.is_empty() {
            return Err(Error::Reduction {
                sentence: idx + 1,
                message: "gold reduction needs annotated heads".to_string(),
            });
        }
        let (reduced, record) = reduce_sentence(idx, sentence, store, options, gold)?;
        removed_words += record.removed_count();
        sentences.push(reduced);
        records.push(record);
    }
    Ok(ReducedTreebank {
        treebank: Treebank::new(sentences),
        records,
        original_words: treebank.word_count(),
        removed_words,
    })
}

fn reduce_sentence(
    idx: usize,
    sentence: &Sentence,
    store: &TemplateStore,
    options: ReduceOptions,
    gold: bool,
) -> Result<(Sentence, ReductionRecord)> {
    let len = sentence.len();
    if len < 2 || !sentence.is_supported() || store.is_empty() {
        return Ok((sentence.clone(), ReductionRecord::identity(idx, len)));
    }

    let tags = sentence.tags(store.config.tag_field);
    let gold_heads = sentence.heads();
    let matches = match (&gold_heads, options.strict_gold) {
        (Some(heads), true) => find_matches_filtered(&tags, store, &mut |positions, t, working| {
            let head = positions[t.head_index()];
            let removed: Vec<usize> = positions.iter().copied().filter(|&p| p != head).collect();
            !working
                .iter()
                .any(|w| !positions.contains(w) && removed.contains(&heads[w - 1]))
        }),
        _ => find_matches_filtered(&tags, store, &mut |_, _, _| true),
    };
    if matches.is_empty() {
        return Ok((sentence.clone(), ReductionRecord::identity(idx, len)));
    }

    let mut removed_by: Vec<Option<usize>> = vec![None; len + 1];
    for (mi, m) in matches.iter().enumerate() {
        for &r in &m.removed {
            removed_by[r] = Some(mi);
        }
    }
    let alive = |id: usize| id == 0 || removed_by[id].is_none();

    let mut forward = vec![None; len];
    let mut inverse = Vec::new();
    for id in 1..=len {
        if alive(id) {
            inverse.push(id);
            forward[id - 1] = Some(inverse.len());
        }
    }

    // new heads in original ids, plus the deprel to use where it changed
    let mut new_heads: Vec<Option<usize>> = sentence.tokens.iter().map(|t| t.head).collect();
    let mut root_label: Option<String> = None;
    if let Some(heads) = &gold_heads {
        let (repaired, relabel_root) = repair_heads(heads, &removed_by, &matches);
        new_heads = repaired.into_iter().map(Some).collect();
        if relabel_root {
            root_label = sentence
                .tokens
                .iter()
                .find(|t| t.head == Some(0))
                .map(|t| t.deprel.clone());
        }
    } else {
        for h in new_heads.iter_mut().flatten() {
            *h = promote(*h, &removed_by, &matches);
        }
    }

    let mut tokens = Vec::with_capacity(inverse.len());
    for &id in &inverse {
        let mut token = sentence.tokens[id - 1].clone();
        token.id = forward[id - 1].expect("kept word");
        token.head = new_heads[id - 1].map(|h| if h == 0 { 0 } else { forward[h - 1].expect("kept head") });
        if token.head == Some(0) && sentence.tokens[id - 1].head != Some(0) {
            if let Some(label) = &root_label {
                token.deprel = label.clone();
            }
        }
        tokens.push(token);
    }

    let mut multiword = Vec::new();
    let mut dropped_multiword = Vec::new();
    for mwt in &sentence.multiword {
        if (mwt.start..=mwt.end).all(alive) {
            multiword.push(MultiwordToken {
                start: forward[mwt.start - 1].expect("kept"),
                end: forward[mwt.end - 1].expect("kept"),
                ..mwt.clone()
            });
        } else {
            dropped_multiword.push(mwt.clone());
        }
    }

    let reduced = Sentence {
        comments: sentence.comments.clone(),
        tokens,
        multiword,
        empty_nodes: Vec::new(),
    };
    if gold {
        if let Err(e) = reduced.check_tree() {
            return Err(Error::Reduction {
                sentence: idx + 1,
                message: format!("reduced gold tree is malformed: {e}"),
            });
        }
    }

    let removed_tokens = (1..=len)
        .filter(|&id| !alive(id))
        .map(|id| sentence.tokens[id - 1].clone())
        .collect();
    Ok((
        reduced,
        ReductionRecord {
            sentence: idx,
            original_len: len,
            matches,
            forward,
            inverse,
            removed_tokens,
            dropped_multiword,
        },
    ))
}

/// Follows removed heads to the head of the fragment that removed them.
fn promote(mut h: usize, removed_by: &[Option<usize>], matches: &[Match]) -> usize {
    while h != 0 {
        match removed_by[h] {
            Some(m) => h = matches[m].head,
            None => break,
        }
    }
    h
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Source {
    Gold,
    Promoted,
    Ancestor,
}

/// Heads for kept words after removal, indexed by original id - 1.
///
/// A kept word whose head was removed is promoted to the head of the removing
/// fragment. Where that would loop back onto the word, it takes its nearest
/// kept gold ancestor instead. Extra roots are attached to the kept root.
/// The flag reports that a word other than the gold root became root.
fn repair_heads(gold: &[usize], removed_by: &[Option<usize>], matches: &[Match]) -> (Vec<usize>, bool) {
    let len = gold.len();
    let alive = |id: usize| id == 0 || removed_by[id].is_none();
    let ancestor = |id: usize| {
        let mut h = gold[id - 1];
        while h != 0 && !alive(h) {
            h = gold[h - 1];
        }
        h
    };

    let mut heads = gold.to_vec();
    let mut source = vec![Source::Gold; len];
    for id in (1..=len).filter(|&id| alive(id)) {
        let g = gold[id - 1];
        if alive(g) {
            continue;
        }
        let p = promote(g, removed_by, matches);
        if p == id {
            heads[id - 1] = ancestor(id);
            source[id - 1] = Source::Ancestor;
        } else {
            heads[id - 1] = p;
            source[id - 1] = Source::Promoted;
        }
    }

    // break cycles; every cycle contains a promoted arc
    loop {
        let mut view = heads.clone();
        for id in (1..=len).filter(|&id| !alive(id)) {
            view[id - 1] = 0;
        }
        let Some(on_cycle) = tree::find_cycle(&view) else { break };
        let mut w = on_cycle;
        loop {
            if source[w - 1] == Source::Promoted {
                heads[w - 1] = ancestor(w);
                source[w - 1] = Source::Ancestor;
                break;
            }
            w = heads[w - 1];
            if w == on_cycle {
                unreachable!("cycle without promoted arc");
            }
        }
    }

    let roots: Vec<usize> = (1..=len).filter(|&id| alive(id) && heads[id - 1] == 0).collect();
    let keep = roots
        .iter()
        .copied()
        .find(|&r| gold[r - 1] == 0)
        .or_else(|| roots.first().copied());
    let mut relabel = false;
    if let Some(keep) = keep {
        for &r in &roots {
            if r != keep {
                heads[r - 1] = keep;
            }
        }
        relabel = gold[keep - 1] != 0;
    }
    (heads, relabel)
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    version: u32,
    original_words: usize,
    removed_words: usize,
    records: Vec<ReductionRecord>,
}

/// Writes the reattachment sidecar.
pub fn save_records<W: Write>(reduced: &ReducedTreebank, mut sink: W) -> Result<()> {
    let file = RecordFile {
        version: RECORD_VERSION,
        original_words: reduced.original_words,
        removed_words: reduced.removed_words,
        records: reduced.records.clone(),
    };
    serde_json::to_writer(&mut sink, &file)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}

pub fn load_records<R: Read>(source: R) -> Result<Vec<ReductionRecord>> {
    let file: RecordFile =
        serde_json::from_reader(source).map_err(|e| Error::Store(format!("malformed reduction records: {e}")))?;
    if file.version != RECORD_VERSION {
        return Err(Error::VersionMismatch {
            expected: RECORD_VERSION,
            found: file.version,
        });
    }
    Ok(file.records)
}
