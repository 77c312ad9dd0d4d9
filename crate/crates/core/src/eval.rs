//! Attachment scores, throughput and comparison tables.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::conllu::Treebank;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub words: usize,
    pub heads: usize,
    pub labeled: usize,
}

impl Counts {
    pub fn uas(&self) -> f64 {
        percent(self.heads, self.words)
    }

    pub fn las(&self) -> f64 {
        percent(self.labeled, self.words)
    }
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        100.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Mean and sample standard deviation of per-repetition tokens/sec.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub mean: f64,
    pub std: f64,
    pub repetitions: usize,
    /// Mean parser wall time per repetition, seconds.
    pub mean_secs: f64,
}

impl Throughput {
    pub fn from_times(tokens: usize, times: &[f64]) -> Throughput {
        let rates: Vec<f64> = times.iter().map(|&t| tokens as f64 / t.max(1e-9)).collect();
        let n = rates.len() as f64;
        let mean = rates.iter().sum::<f64>() / n;
        let std = if rates.len() > 1 {
            (rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Throughput {
            mean,
            std,
            repetitions: rates.len(),
            mean_secs: times.iter().sum::<f64>() / n,
        }
    }

    pub fn speedup_over(&self, baseline: &Throughput) -> f64 {
        self.mean / baseline.mean
    }
}

/// Which token count divides parser time for a reduced run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ThroughputBasis {
    #[default]
    Original,
    Reduced,
}

impl FromStr for ThroughputBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(ThroughputBasis::Original),
            "reduced" => Ok(ThroughputBasis::Reduced),
            other => Err(Error::Usage(format!("unknown throughput basis '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub parser: String,
    pub dataset: String,
    /// "baseline" for a plain parse, otherwise the setup name.
    pub setup: String,
    pub counts: Counts,
    pub uas: f64,
    pub las: f64,
    pub word_reduction_pct: Option<f64>,
    pub tokens_per_sec: Option<Throughput>,
    pub speedup: Option<f64>,
    /// Seconds spent reducing and reattaching, outside the parser clock.
    pub overhead_secs: Option<f64>,
}

impl EvalReport {
    pub fn from_counts(counts: Counts) -> EvalReport {
        EvalReport {
            counts,
            uas: counts.uas(),
            las: counts.las(),
            ..EvalReport::default()
        }
    }
}

/// Compares heads and labels word by word. Punctuation counts.
pub fn score(system: &Treebank, gold: &Treebank) -> Result<EvalReport> {
    if system.len() != gold.len() {
        return Err(Error::Alignment {
            sentence: system.len().min(gold.len()) + 1,
            token: None,
            message: format!("system has {} sentences, gold has {}", system.len(), gold.len()),
        });
    }
    let mut counts = Counts::default();
    for (i, (s, g)) in system.sentences.iter().zip(&gold.sentences).enumerate() {
        if s.len() != g.len() {
            return Err(Error::Alignment {
                sentence: i + 1,
                token: None,
                message: format!("system has {} words, gold has {}", s.len(), g.len()),
            });
        }
        for (j, (st, gt)) in s.tokens.iter().zip(&g.tokens).enumerate() {
            if st.form != gt.form {
                return Err(Error::Alignment {
                    sentence: i + 1,
                    token: Some(j + 1),
                    message: format!("form '{}' differs from gold '{}'", st.form, gt.form),
                });
            }
            counts.words += 1;
            if st.head.is_some() && st.head == gt.head {
                counts.heads += 1;
                if st.deprel == gt.deprel {
                    counts.labeled += 1;
                }
            }
        }
    }
    Ok(EvalReport::from_counts(counts))
}

/// Runs `parse` once to warm up, then `repetitions` times, collecting the
/// parser times it reports.
pub fn time_repeated<F>(repetitions: usize, mut parse: F) -> Result<Vec<f64>>
where
    F: FnMut() -> Result<f64>,
{
    if repetitions < 2 {
        return Err(Error::Usage("benchmark needs at least 2 repetitions".to_string()));
    }
    parse()?;
    (0..repetitions).map(|_| parse()).collect()
}

/// Times a closure that does not report its own parser time.
pub fn wall_time<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Orders rows for display: groups by parser and data set in first-seen
/// order, baselines first, then by word reduction ascending.
pub fn order_reports(reports: &[EvalReport]) -> Vec<&EvalReport> {
    let mut groups: Vec<(&str, &str)> = Vec::new();
    for r in reports {
        if !groups.contains(&(r.parser.as_str(), r.dataset.as_str())) {
            groups.push((r.parser.as_str(), r.dataset.as_str()));
        }
    }
    let mut rows: Vec<&EvalReport> = reports.iter().collect();
    rows.sort_by(|a, b| {
        let ga = groups.iter().position(|g| *g == (a.parser.as_str(), a.dataset.as_str()));
        let gb = groups.iter().position(|g| *g == (b.parser.as_str(), b.dataset.as_str()));
        let ra = a.word_reduction_pct.unwrap_or(f64::NEG_INFINITY);
        let rb = b.word_reduction_pct.unwrap_or(f64::NEG_INFINITY);
        ga.cmp(&gb).then(ra.total_cmp(&rb))
    });
    rows
}

pub const HEADER: [&str; 8] = [
    "Parser",
    "Data Set",
    "Setup",
    "UAS (%)",
    "LAS (%)",
    "Word Reduction (%)",
    "Tokens/Sec",
    "Speed-up Factor",
];

fn cells(r: &EvalReport) -> [String; 8] {
    [
        r.parser.clone(),
        r.dataset.clone(),
        r.setup.clone(),
        format!("{:.2}", r.uas),
        format!("{:.2}", r.las),
        r.word_reduction_pct.map_or("NA".to_string(), |p| format!("{p:.1}")),
        r.tokens_per_sec
            .map_or("NA".to_string(), |t| format!("{:.0} ± {:.0}", t.mean, t.std)),
        r.speedup.map_or("NA".to_string(), |s| format!("{s:.2}x")),
    ]
}

/// Plain-text table, one row per report.
pub fn render_tables(reports: &[EvalReport]) -> String {
    let rows: Vec<[String; 8]> = order_reports(reports).into_iter().map(cells).collect();
    let mut widths = HEADER.map(|h| h.chars().count());
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[String]| {
        let padded: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "| {} |", padded.join(" | "));
    };
    line(&mut out, &HEADER.map(String::from));
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
    for row in &rows {
        line(&mut out, row);
    }
    out
}

pub fn reports_to_json(reports: &[EvalReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&order_reports(reports))?)
}
