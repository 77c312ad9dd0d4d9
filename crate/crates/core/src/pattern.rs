//! Head and label patterns of bigram/trigram fragments.
//!
//! A head pattern lists, for every word of an n-gram, the fragment-internal
//! index of its head or `-` when the head lies outside the fragment, followed
//! by a flag telling whether a fragment-internal dependent has a dependent of
//! its own outside the fragment: `1 - false`, `2 2 - false`, `- 0 true`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::conllu::Sentence;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeadPattern {
    pub heads: Vec<Option<usize>>,
    pub external: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelPattern {
    pub labels: Vec<Option<String>>,
    pub external: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Eligibility {
    Eligible,
    ExternalDependent,
    NotFullyConnected,
    NonProjective,
}

impl HeadPattern {
    pub fn new(heads: Vec<Option<usize>>, external: bool) -> HeadPattern {
        HeadPattern { heads, external }
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    /// Positions whose head lies outside the fragment.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.heads.len())
            .filter(|&i| self.heads[i].is_none())
            .collect()
    }

    /// The fragment head, if there is exactly one.
    pub fn head_index(&self) -> Option<usize> {
        match self.roots().as_slice() {
            [r] => Some(*r),
            _ => None,
        }
    }

    fn has_internal_dependent(&self) -> bool {
        self.heads.iter().any(Option::is_some)
    }

    /// True if every word reaches a root through internal heads.
    fn acyclic(&self) -> bool {
        let n = self.heads.len();
        (0..n).all(|start| {
            let mut w = start;
            for _ in 0..=n {
                match self.heads[w] {
                    None => return true,
                    Some(h) if h < n && h != w => w = h,
                    Some(_) => return false,
                }
            }
            false
        })
    }

    /// No internal arc spans a word whose head lies outside the arc's range.
    pub fn is_projective(&self) -> bool {
        self.heads.iter().enumerate().all(|(d, h)| match h {
            None => true,
            &Some(h) => {
                let (lo, hi) = (h.min(d), h.max(d));
                ((lo + 1)..hi).all(|k| match self.heads[k] {
                    Some(kh) => (lo..=hi).contains(&kh),
                    None => false,
                })
            }
        })
    }
}

impl fmt::Display for HeadPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.heads {
            match h {
                Some(i) => write!(f, "{i} ")?,
                None => write!(f, "- ")?,
            }
        }
        write!(f, "{}", self.external)
    }
}

impl FromStr for HeadPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (items, external) = split_pattern(s)?;
        let heads = items
            .iter()
            .map(|item| match *item {
                "-" => Ok(None),
                i => i
                    .parse::<usize>()
                    .map(Some)
                    .map_err(|_| Error::Usage(format!("bad head pattern entry '{i}' in '{s}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if heads.iter().enumerate().any(|(i, h)| matches!(h, Some(x) if *x == i || *x >= heads.len())) {
            return Err(Error::Usage(format!("invalid head pattern '{s}'")));
        }
        Ok(HeadPattern { heads, external })
    }
}

impl LabelPattern {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// True if the `-` entries line up with the head pattern's.
    pub fn aligns_with(&self, heads: &HeadPattern) -> bool {
        self.labels.len() == heads.heads.len()
            && self
                .labels
                .iter()
                .zip(&heads.heads)
                .all(|(l, h)| l.is_none() == h.is_none())
    }
}

impl fmt::Display for LabelPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.labels {
            match l {
                Some(label) => write!(f, "{label} ")?,
                None => write!(f, "- ")?,
            }
        }
        write!(f, "{}", self.external)
    }
}

impl FromStr for LabelPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (items, external) = split_pattern(s)?;
        let labels = items
            .iter()
            .map(|item| match *item {
                "-" => None,
                l => Some(l.to_string()),
            })
            .collect();
        Ok(LabelPattern { labels, external })
    }
}

fn split_pattern(s: &str) -> Result<(Vec<&str>, bool)> {
    let mut items: Vec<&str> = s.split_whitespace().collect();
    let external = match items.pop() {
        Some("true") => true,
        Some("false") => false,
        _ => return Err(Error::Usage(format!("pattern '{s}' must end in true/false"))),
    };
    if items.is_empty() {
        return Err(Error::Usage(format!("empty pattern '{s}'")));
    }
    Ok((items, external))
}

macro_rules! serde_via_string {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_string!(HeadPattern);
serde_via_string!(LabelPattern);

/// Gold tree of one sentence with a child index, for repeated extraction.
pub struct GoldView<'a> {
    sentence: &'a Sentence,
    heads: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl<'a> GoldView<'a> {
    pub fn new(sentence: &'a Sentence) -> Result<GoldView<'a>> {
        let heads = sentence
            .heads()
            .ok_or_else(|| Error::Usage("pattern extraction needs gold heads".to_string()))?;
        let mut children = vec![Vec::new(); heads.len() + 1];
        for (i, &h) in heads.iter().enumerate() {
            children[h].push(i + 1);
        }
        Ok(GoldView {
            sentence,
            heads,
            children,
        })
    }

    /// Pattern of the `n` words starting at 0-based position `start`.
    pub fn extract(&self, start: usize, n: usize) -> Result<(HeadPattern, LabelPattern)> {
        let len = self.heads.len();
        if !(2..=3).contains(&n) || start + n > len {
            return Err(Error::Usage(format!(
                "span {start}..{} out of bounds for sentence of {len} words",
                start + n
            )));
        }
        // ids in the span are start+1 ..= start+n
        let first = start + 1;
        let last = start + n;
        let inside = |id: usize| id >= first && id <= last;

        let heads: Vec<Option<usize>> = (first..=last)
            .map(|id| {
                let h = self.heads[id - 1];
                if inside(h) {
                    Some(h - first)
                } else {
                    None
                }
            })
            .collect();
        let connected = heads.iter().filter(|h| h.is_none()).count() == 1;
        let external = connected
            && (first..=last).zip(&heads).any(|(id, h)| {
                h.is_some() && self.children[id].iter().any(|&c| !inside(c))
            });
        let labels = (first..=last)
            .zip(&heads)
            .map(|(id, h)| h.map(|_| self.sentence.tokens[id - 1].deprel.clone()))
            .collect();
        Ok((
            HeadPattern { heads, external },
            LabelPattern { labels, external },
        ))
    }
}

/// Pattern realized by the gold fragment at `start..start + n` (0-based).
///
/// For fragments with more than one word headed outside the span the external
/// flag is always `false`: such fragments are never reusable and are counted as
/// one "missing relation" pattern.
pub fn extract_pattern(sentence: &Sentence, start: usize, n: usize) -> Result<(HeadPattern, LabelPattern)> {
    GoldView::new(sentence)?.extract(start, n)
}

pub fn classify(pattern: &HeadPattern) -> Eligibility {
    if pattern.external && pattern.has_internal_dependent() {
        return Eligibility::ExternalDependent;
    }
    if pattern.roots().len() != 1 || !pattern.acyclic() {
        return Eligibility::NotFullyConnected;
    }
    if pattern.len() == 3 && !pattern.is_projective() {
        return Eligibility::NonProjective;
    }
    Eligibility::Eligible
}

/// Every structurally valid pattern of one size, by class.
#[derive(Clone, Debug, Default)]
pub struct PatternSpace {
    pub n: usize,
    /// Single head, no external material: the reusable shapes.
    pub connected: Vec<HeadPattern>,
    /// Single head, some dependent has a dependent outside the fragment.
    pub connected_external: Vec<HeadPattern>,
    /// More than one word headed outside the fragment.
    pub disconnected: Vec<HeadPattern>,
    /// Shapes with crossing internal arcs; not part of the pattern space.
    pub nonprojective: Vec<HeadPattern>,
}

impl PatternSpace {
    /// Size of the pattern space (non-projective shapes excluded).
    pub fn total(&self) -> usize {
        self.connected.len() + self.connected_external.len() + self.disconnected.len()
    }

    pub fn contains(&self, pattern: &HeadPattern) -> bool {
        self.connected
            .iter()
            .chain(&self.connected_external)
            .chain(&self.disconnected)
            .any(|p| p == pattern)
    }

    pub fn eligible(&self) -> &[HeadPattern] {
        &self.connected
    }
}

pub fn enumerate_patterns(n: usize) -> Result<PatternSpace> {
    if !(2..=3).contains(&n) {
        return Err(Error::Usage(format!("pattern size must be 2 or 3, got {n}")));
    }
    let mut space = PatternSpace {
        n,
        ..PatternSpace::default()
    };
    let choices = n + 1; // None or one of n positions
    for code in 0..choices.pow(n as u32) {
        let mut c = code;
        let heads: Vec<Option<usize>> = (0..n)
            .map(|_| {
                let v = c % choices;
                c /= choices;
                if v == n {
                    None
                } else {
                    Some(v)
                }
            })
            .collect();
        if heads.iter().enumerate().any(|(i, h)| *h == Some(i)) {
            continue;
        }
        for external in [false, true] {
            let pattern = HeadPattern {
                heads: heads.clone(),
                external,
            };
            if !pattern.acyclic() {
                continue;
            }
            let roots = pattern.roots().len();
            if external && (roots != 1 || !pattern.has_internal_dependent()) {
                continue;
            }
            let bucket = if !pattern.is_projective() {
                &mut space.nonprojective
            } else {
                match classify(&pattern) {
                    Eligibility::Eligible => &mut space.connected,
                    Eligibility::ExternalDependent => &mut space.connected_external,
                    Eligibility::NotFullyConnected => &mut space.disconnected,
                    Eligibility::NonProjective => &mut space.nonprojective,
                }
            };
            bucket.push(pattern);
        }
    }
    for bucket in [
        &mut space.connected,
        &mut space.connected_external,
        &mut space.disconnected,
        &mut space.nonprojective,
    ] {
        bucket.sort_by_key(|p| p.to_string());
    }
    Ok(space)
}
