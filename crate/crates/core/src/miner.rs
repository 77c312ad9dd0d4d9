//! Template mining.
//!
//! Every adjacent bigram and trigram of tags in a gold treebank contributes one
//! observation of its head pattern and labeled pattern. For each tag n-gram the
//! most frequent head pattern is kept if it is reusable and both its head
//! confidence and the confidence of its most frequent label assignment clear
//! the configured thresholds. Both confidences share the n-gram's total count
//! as denominator.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::conllu::{TagField, Treebank};
use crate::error::{Error, Result};
use crate::pattern::{classify, Eligibility, HeadPattern, LabelPattern};
use crate::reduce::reduce_gold;

pub const STORE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiningMode {
    /// Unordered templates matched over original adjacency.
    #[default]
    BagOfRules,
    /// Ranked templates mined and applied over progressively reduced sentences.
    Iterative,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Priority {
    #[default]
    ConfidenceFirst,
    NounProximity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    pub head_threshold: f64,
    pub label_threshold: f64,
    pub use_bigrams: bool,
    pub use_trigrams: bool,
    pub min_count: u64,
    pub tag_field: TagField,
    pub mode: MiningMode,
    pub priority: Priority,
    /// Templates appended per iteration in iterative mode.
    pub batch_size: usize,
    pub max_iterations: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            head_threshold: 83.0,
            label_threshold: 83.0,
            use_bigrams: true,
            use_trigrams: true,
            min_count: 1,
            tag_field: TagField::Upos,
            mode: MiningMode::BagOfRules,
            priority: Priority::ConfidenceFirst,
            batch_size: 1,
            max_iterations: 1000,
        }
    }
}

impl MiningConfig {
    pub fn with_thresholds(head: f64, label: f64) -> MiningConfig {
        MiningConfig {
            head_threshold: head,
            label_threshold: label,
            ..MiningConfig::default()
        }
    }

    /// Parses the `2,3:83-83` setup shorthand (n-gram sizes, then head and
    /// label thresholds).
    pub fn from_setup(setup: &str) -> Result<MiningConfig> {
        let bad = || Error::Usage(format!("bad setup '{setup}', expected e.g. 2,3:83-83"));
        let (sizes, thresholds) = setup.split_once(':').ok_or_else(bad)?;
        let (head, label) = thresholds.split_once('-').ok_or_else(bad)?;
        let mut config = MiningConfig {
            head_threshold: head.trim().parse().map_err(|_| bad())?,
            label_threshold: label.trim().parse().map_err(|_| bad())?,
            use_bigrams: false,
            use_trigrams: false,
            ..MiningConfig::default()
        };
        for size in sizes.split(',') {
            match size.trim() {
                "2" => config.use_bigrams = true,
                "3" => config.use_trigrams = true,
                _ => return Err(bad()),
            }
        }
        config.validate()?;
        Ok(config)
    }

    /// Short name such as `M2,3 83-83`.
    pub fn setup_name(&self) -> String {
        let sizes = match (self.use_bigrams, self.use_trigrams) {
            (true, true) => "2,3",
            (true, false) => "2",
            (false, true) => "3",
            (false, false) => "-",
        };
        let mut name = format!(
            "M{sizes} {}-{}",
            fmt_threshold(self.head_threshold),
            fmt_threshold(self.label_threshold)
        );
        if self.mode == MiningMode::Iterative {
            name.push_str(" iter");
        }
        name
    }

    pub fn validate(&self) -> Result<()> {
        if !self.use_bigrams && !self.use_trigrams {
            return Err(Error::Usage("enable bigrams, trigrams or both".to_string()));
        }
        for (name, t) in [("head", self.head_threshold), ("label", self.label_threshold)] {
            if !(t > 0.0 && t <= 100.0) {
                return Err(Error::Usage(format!("{name} threshold {t} outside (0, 100]")));
            }
        }
        if self.min_count == 0 {
            return Err(Error::Usage("min_count must be positive".to_string()));
        }
        if self.batch_size == 0 {
            return Err(Error::Usage("batch_size must be positive".to_string()));
        }
        Ok(())
    }

    fn uses(&self, n: usize) -> bool {
        match n {
            2 => self.use_bigrams,
            3 => self.use_trigrams,
            _ => false,
        }
    }
}

fn fmt_threshold(t: f64) -> String {
    if t.fract() == 0.0 {
        format!("{t:.0}")
    } else {
        format!("{t}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub tags: Vec<String>,
    pub head_pattern: HeadPattern,
    pub label_pattern: LabelPattern,
    /// Occurrences realizing the head pattern.
    pub head_count: u64,
    /// Occurrences realizing the head pattern with the label pattern.
    pub label_count: u64,
    /// Occurrences of the tag n-gram.
    pub frequency: u64,
    pub rank: Option<usize>,
}

impl Template {
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn head_confidence(&self) -> f64 {
        100.0 * self.head_count as f64 / self.frequency as f64
    }

    pub fn label_confidence(&self) -> f64 {
        100.0 * self.label_count as f64 / self.frequency as f64
    }

    /// Fragment-internal index of the word the parser keeps.
    pub fn head_index(&self) -> usize {
        self.head_pattern
            .head_index()
            .expect("stored templates have a single head")
    }

    /// Exact comparison of head confidences.
    pub fn cmp_head_confidence(&self, other: &Template) -> Ordering {
        let a = self.head_count as u128 * other.frequency as u128;
        let b = other.head_count as u128 * self.frequency as u128;
        a.cmp(&b)
    }

    fn cmp_label_confidence(&self, other: &Template) -> Ordering {
        let a = self.label_count as u128 * other.frequency as u128;
        let b = other.label_count as u128 * self.frequency as u128;
        a.cmp(&b)
    }

    pub fn is_perfect(&self) -> bool {
        self.head_count == self.frequency && self.label_count == self.frequency
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} | {:.2} | {} | {:.2} | {}",
            self.tags.join(" "),
            self.head_pattern,
            self.head_confidence(),
            self.label_pattern,
            self.label_confidence(),
            self.frequency
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TemplateRecord {
    tags: Vec<String>,
    head_pattern: HeadPattern,
    label_pattern: LabelPattern,
    head_confidence: f64,
    label_confidence: f64,
    frequency: u64,
    head_count: u64,
    label_count: u64,
    rank: Option<usize>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

impl Serialize for Template {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TemplateRecord {
            tags: self.tags.clone(),
            head_pattern: self.head_pattern.clone(),
            label_pattern: self.label_pattern.clone(),
            head_confidence: round2(self.head_confidence()),
            label_confidence: round2(self.label_confidence()),
            frequency: self.frequency,
            head_count: self.head_count,
            label_count: self.label_count,
            rank: self.rank,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Template {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = TemplateRecord::deserialize(deserializer)?;
        if r.tags.len() != r.head_pattern.len() || !r.label_pattern.aligns_with(&r.head_pattern) {
            return Err(D::Error::custom(format!(
                "template {:?}: tags and patterns disagree",
                r.tags
            )));
        }
        if r.frequency == 0 || r.head_count > r.frequency || r.label_count > r.head_count {
            return Err(D::Error::custom(format!("template {:?}: inconsistent counts", r.tags)));
        }
        if classify(&r.head_pattern) != Eligibility::Eligible {
            return Err(D::Error::custom(format!(
                "template {:?}: head pattern '{}' is not reusable",
                r.tags, r.head_pattern
            )));
        }
        Ok(Template {
            tags: r.tags,
            head_pattern: r.head_pattern,
            label_pattern: r.label_pattern,
            head_count: r.head_count,
            label_count: r.label_count,
            frequency: r.frequency,
            rank: r.rank,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub sentences: usize,
    pub words: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateStore {
    pub config: MiningConfig,
    pub provenance: Provenance,
    pub templates: Vec<Template>,
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    version: u32,
    #[serde(flatten)]
    store: TemplateStore,
}

impl TemplateStore {
    pub fn empty(config: MiningConfig) -> TemplateStore {
        TemplateStore {
            config,
            ..TemplateStore::default()
        }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.config.mode == MiningMode::Iterative
    }

    pub fn perfect_count(&self) -> usize {
        self.templates.iter().filter(|t| t.is_perfect()).count()
    }

    pub fn keys(&self) -> std::collections::BTreeSet<Vec<String>> {
        self.templates.iter().map(|t| t.tags.clone()).collect()
    }
}

pub fn save_store<W: Write>(store: &TemplateStore, mut sink: W) -> Result<()> {
    let file = StoreFile {
        version: STORE_VERSION,
        store: store.clone(),
    };
    serde_json::to_writer_pretty(&mut sink, &file)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}

pub fn load_store<R: Read>(mut source: R) -> Result<TemplateStore> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Store(format!("malformed store: {e}")))?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == STORE_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::VersionMismatch {
                expected: STORE_VERSION,
                found: v as u32,
            })
        }
        None => return Err(Error::Store("missing version field".to_string())),
    }
    let file: StoreFile =
        serde_json::from_value(value).map_err(|e| Error::Store(format!("malformed store: {e}")))?;
    file.store.config.validate()?;
    if file.store.config.mode == MiningMode::BagOfRules {
        let mut seen = std::collections::HashSet::new();
        for t in &file.store.templates {
            if !seen.insert(&t.tags) {
                return Err(Error::Store(format!("duplicate template key {:?}", t.tags)));
            }
        }
    }
    Ok(file.store)
}

/// Observations of one tag n-gram.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyCounts {
    pub total: u64,
    pub patterns: BTreeMap<HeadPattern, u64>,
    pub labeled: BTreeMap<(HeadPattern, LabelPattern), u64>,
}

pub type PatternCounts = BTreeMap<Vec<String>, KeyCounts>;

// Compact counting: tags and labels interned, patterns packed in integers.

const NO_LABEL: u32 = u32::MAX;

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn id(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(s.to_string(), id);
        self.names.push(s.to_string());
        id
    }
}

/// n, then one 2-bit entry per word (3 = head outside), then the flag.
type PackedPattern = u16;
type PackedKey = (u8, [u32; 3]);

#[derive(Default)]
struct PackedCounts {
    total: u64,
    patterns: HashMap<PackedPattern, u64>,
    labeled: HashMap<(PackedPattern, [u32; 3]), u64>,
}

fn pack(n: usize, entries: &[u8; 3], external: bool) -> PackedPattern {
    let mut code = (n as u16) << 8 | (external as u16) << 7;
    for (i, &e) in entries.iter().take(n).enumerate() {
        code |= (e as u16) << (2 * i);
    }
    code
}

fn unpack(code: PackedPattern) -> HeadPattern {
    let n = (code >> 8) as usize;
    let heads = (0..n)
        .map(|i| match (code >> (2 * i)) & 0b11 {
            3 => None,
            v => Some(v as usize),
        })
        .collect();
    HeadPattern {
        heads,
        external: code & (1 << 7) != 0,
    }
}

pub fn count_patterns(treebank: &Treebank, config: &MiningConfig) -> PatternCounts {
    let mut tags = Interner::default();
    let mut labels = Interner::default();
    let mut counts: HashMap<PackedKey, PackedCounts> = HashMap::new();

    for sentence in &treebank.sentences {
        if !sentence.is_supported() {
            continue;
        }
        let Some(heads) = sentence.heads() else { continue };
        let len = heads.len();
        let tag_ids: Vec<u32> = sentence
            .tokens
            .iter()
            .map(|t| tags.id(t.tag(config.tag_field)))
            .collect();
        let label_ids: Vec<u32> = sentence.tokens.iter().map(|t| labels.id(&t.deprel)).collect();
        // extreme dependent ids per word, 1-based
        let mut min_child = vec![usize::MAX; len + 1];
        let mut max_child = vec![0usize; len + 1];
        for (i, &h) in heads.iter().enumerate() {
            min_child[h] = min_child[h].min(i + 1);
            max_child[h] = max_child[h].max(i + 1);
        }

        for n in [2usize, 3] {
            if !config.uses(n) || len < n {
                continue;
            }
            for start in 0..=(len - n) {
                let first = start + 1;
                let last = start + n;
                let mut entries = [3u8; 3];
                let mut key = [0u32; 3];
                let mut lab = [NO_LABEL; 3];
                let mut roots = 0;
                for k in 0..n {
                    let id = first + k;
                    key[k] = tag_ids[id - 1];
                    let h = heads[id - 1];
                    if h >= first && h <= last {
                        entries[k] = (h - first) as u8;
                        lab[k] = label_ids[id - 1];
                    } else {
                        roots += 1;
                    }
                }
                let external = roots == 1
                    && (0..n).any(|k| {
                        let id = first + k;
                        entries[k] != 3 && (min_child[id] < first || (max_child[id] > last))
                    });
                let code = pack(n, &entries, external);
                let entry = counts.entry((n as u8, key)).or_default();
                entry.total += 1;
                *entry.patterns.entry(code).or_default() += 1;
                *entry.labeled.entry((code, lab)).or_default() += 1;
            }
        }
    }

    let mut out = PatternCounts::new();
    for ((n, key), packed) in counts {
        let n = n as usize;
        let key: Vec<String> = key[..n].iter().map(|&t| tags.names[t as usize].clone()).collect();
        let mut kc = KeyCounts {
            total: packed.total,
            ..KeyCounts::default()
        };
        for (code, c) in packed.patterns {
            kc.patterns.insert(unpack(code), c);
        }
        for ((code, lab), c) in packed.labeled {
            let head = unpack(code);
            let label = LabelPattern {
                labels: lab[..n]
                    .iter()
                    .map(|&l| (l != NO_LABEL).then(|| labels.names[l as usize].clone()))
                    .collect(),
                external: head.external,
            };
            kc.labeled.insert((head, label), c);
        }
        out.insert(key, kc);
    }
    out
}

/// Highest count, lexicographically smallest serialization on ties.
fn dominant<'a, T: fmt::Display + 'a>(items: impl Iterator<Item = (&'a T, u64)>) -> Option<(&'a T, u64)> {
    let mut best: Option<(&T, u64, String)> = None;
    for (item, count) in items {
        let s = item.to_string();
        let better = match &best {
            None => true,
            Some((_, bc, bs)) => count > *bc || (count == *bc && s < *bs),
        };
        if better {
            best = Some((item, count, s));
        }
    }
    best.map(|(item, count, _)| (item, count))
}

/// Templates passing the thresholds, in key order.
pub fn select_templates(counts: &PatternCounts, config: &MiningConfig) -> Vec<Template> {
    let mut out = Vec::new();
    for (key, kc) in counts {
        if !config.uses(key.len()) || kc.total < config.min_count || kc.total == 0 {
            continue;
        }
        let Some((head, head_count)) = dominant(kc.patterns.iter().map(|(p, &c)| (p, c))) else {
            continue;
        };
        if classify(head) != Eligibility::Eligible {
            continue;
        }
        let Some((label, label_count)) = dominant(
            kc.labeled
                .iter()
                .filter(|((h, _), _)| h == head)
                .map(|((_, l), &c)| (l, c)),
        ) else {
            continue;
        };
        let total = kc.total as f64;
        if 100.0 * head_count as f64 >= config.head_threshold * total
            && 100.0 * label_count as f64 >= config.label_threshold * total
        {
            out.push(Template {
                tags: key.clone(),
                head_pattern: head.clone(),
                label_pattern: label.clone(),
                head_count,
                label_count,
                frequency: kc.total,
                rank: None,
            });
        }
    }
    out
}

pub fn mine(treebank: &Treebank, config: &MiningConfig) -> Result<TemplateStore> {
    config.validate()?;
    let counts = count_patterns(treebank, config);
    let mut config = config.clone();
    config.mode = MiningMode::BagOfRules;
    Ok(TemplateStore {
        templates: select_templates(&counts, &config),
        provenance: provenance(treebank),
        config,
    })
}

fn provenance(treebank: &Treebank) -> Provenance {
    Provenance {
        source: None,
        sentences: treebank.len(),
        words: treebank.word_count(),
    }
}

/// Confidence-first order: head confidence, frequency, label confidence, key.
pub fn confidence_order(a: &Template, b: &Template) -> Ordering {
    b.cmp_head_confidence(a)
        .then(b.frequency.cmp(&a.frequency))
        .then(b.cmp_label_confidence(a))
        .then_with(|| a.tags.cmp(&b.tags))
        .then_with(|| a.head_pattern.to_string().cmp(&b.head_pattern.to_string()))
}

fn is_noun(tag: &str) -> bool {
    matches!(tag, "NOUN" | "PROPN") || tag.starts_with("NN")
}

/// Mean linear distance of each dependent tag to its head, over arcs whose
/// head is a noun.
pub fn noun_distances(treebank: &Treebank, field: TagField) -> HashMap<String, f64> {
    let mut sums: HashMap<String, (f64, u64)> = HashMap::new();
    for sentence in &treebank.sentences {
        for token in &sentence.tokens {
            let Some(h) = token.head else { continue };
            if h == 0 || !is_noun(sentence.tokens[h - 1].tag(field)) {
                continue;
            }
            let e = sums.entry(token.tag(field).to_string()).or_default();
            e.0 += token.id.abs_diff(h) as f64;
            e.1 += 1;
        }
    }
    sums.into_iter().map(|(t, (s, c))| (t, s / c as f64)).collect()
}

fn noun_score(t: &Template, distances: &HashMap<String, f64>) -> Option<f64> {
    let head = t.head_index();
    if !is_noun(&t.tags[head]) {
        return None;
    }
    let deps: Vec<f64> = t
        .tags
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != head)
        .map(|(_, tag)| distances.get(tag).copied().unwrap_or(f64::INFINITY))
        .collect();
    Some(deps.iter().sum::<f64>() / deps.len() as f64)
}

fn prioritize(candidates: &mut [Template], priority: Priority, distances: &HashMap<String, f64>) {
    match priority {
        Priority::ConfidenceFirst => candidates.sort_by(confidence_order),
        Priority::NounProximity => candidates.sort_by(|a, b| {
            match (noun_score(a, distances), noun_score(b, distances)) {
                (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| confidence_order(a, b)),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => confidence_order(a, b),
            }
        }),
    }
}

/// Ordered mining: each round mines the current working treebank, appends
/// the best candidates and reduces the working treebank with them, so later
/// templates see words made adjacent by earlier removals.
pub fn mine_iterative(treebank: &Treebank, config: &MiningConfig) -> Result<TemplateStore> {
    config.validate()?;
    let mut config = config.clone();
    config.mode = MiningMode::Iterative;
    let distances = match config.priority {
        Priority::NounProximity => noun_distances(treebank, config.tag_field),
        Priority::ConfidenceFirst => HashMap::new(),
    };

    let mut store = TemplateStore {
        config: config.clone(),
        provenance: provenance(treebank),
        templates: Vec::new(),
    };
    let mut working = treebank.clone();
    for _ in 0..config.max_iterations {
        let counts = count_patterns(&working, &config);
        let mut candidates = select_templates(&counts, &config);
        if candidates.is_empty() {
            break;
        }
        prioritize(&mut candidates, config.priority, &distances);
        candidates.truncate(config.batch_size);
        for t in candidates.iter_mut() {
            t.rank = Some(store.templates.len());
            store.templates.push(t.clone());
        }
        let batch = TemplateStore {
            config: config.clone(),
            provenance: Provenance::default(),
            templates: candidates,
        };
        working = reduce_gold(&working, &batch)?.treebank;
    }
    Ok(store)
}
