//! Splicing stored fragments back into a parse of the reduced input.

use crate::conllu::{Sentence, Treebank};
use crate::error::{Error, Result};
use crate::reduce::ReductionRecord;
use crate::tree;

/// Parser output on reduced input, with the records from the reducing run.
#[derive(Clone, Debug)]
pub struct ParsedReduced<'a> {
    pub treebank: &'a Treebank,
    pub records: &'a [ReductionRecord],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reattached {
    pub treebank: Treebank,
    /// 0-based ordinals of sentences whose result is not a single-rooted tree.
    pub malformed: Vec<usize>,
}

/// Restores every sentence to its original length. Removed words take head
/// and label from the template that removed them; kept words keep the
/// parser's attachment, mapped back to original ids.
pub fn reattach(parsed: ParsedReduced<'_>) -> Result<Reattached> {
    if parsed.treebank.len() != parsed.records.len() {
        return Err(Error::Consistency {
            sentence: parsed.treebank.len().min(parsed.records.len()) + 1,
            message: format!(
                "{} parsed sentences but {} reduction records",
                parsed.treebank.len(),
                parsed.records.len()
            ),
        });
    }
    let mut sentences = Vec::with_capacity(parsed.records.len());
    let mut malformed = Vec::new();
    for (idx, (sentence, record)) in parsed.treebank.sentences.iter().zip(parsed.records).enumerate() {
        let restored = reattach_sentence(idx, sentence, record)?;
        if let Some(heads) = restored.heads() {
            if !tree::is_tree(&heads) {
                malformed.push(idx);
            }
        }
        sentences.push(restored);
    }
    Ok(Reattached {
        treebank: Treebank::new(sentences),
        malformed,
    })
}

pub fn reattach_sentence(idx: usize, sentence: &Sentence, record: &ReductionRecord) -> Result<Sentence> {
    let err = |message: String| Error::Consistency {
        sentence: idx + 1,
        message,
    };
    if sentence.len() != record.reduced_len() {
        return Err(err(format!(
            "parse has {} words, record expects {}",
            sentence.len(),
            record.reduced_len()
        )));
    }
    if record.matches.is_empty() {
        return Ok(sentence.clone());
    }
    let reduced_len = record.reduced_len();
    let to_original = |h: usize| -> Result<usize> {
        match h {
            0 => Ok(0),
            h if h <= reduced_len => Ok(record.inverse[h - 1]),
            h => Err(err(format!("head {h} out of range for {reduced_len} words"))),
        }
    };

    let mut slots = vec![None; record.original_len];
    for (r, token) in sentence.tokens.iter().enumerate() {
        let original = record.inverse[r];
        let mut token = token.clone();
        token.id = original;
        token.head = token.head.map(to_original).transpose()?;
        slots[original - 1] = Some(token);
    }

    for m in &record.matches {
        for (i, &position) in m.positions.iter().enumerate() {
            let Some(internal) = m.head_pattern.heads[i] else { continue };
            let mut token = record
                .removed_tokens
                .iter()
                .find(|t| t.id == position)
                .cloned()
                .ok_or_else(|| err(format!("record lacks removed word {position}")))?;
            token.head = Some(m.positions[internal]);
            token.deprel = m.label_pattern.labels[i].clone().unwrap_or_else(|| "_".to_string());
            if slots[position - 1].replace(token).is_some() {
                return Err(err(format!("word {position} is both kept and removed")));
            }
        }
    }

    let tokens = slots
        .into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| err(format!("word {} missing after reattachment", i + 1))))
        .collect::<Result<Vec<_>>>()?;

    let mut multiword: Vec<_> = sentence
        .multiword
        .iter()
        .map(|m| {
            let mut m = m.clone();
            m.start = record.inverse[m.start - 1];
            m.end = record.inverse[m.end - 1];
            m
        })
        .chain(record.dropped_multiword.iter().cloned())
        .collect();
    multiword.sort_by_key(|m| m.start);

    Ok(Sentence {
        comments: sentence.comments.clone(),
        tokens,
        multiword,
        empty_nodes: sentence.empty_nodes.clone(),
    })
}
