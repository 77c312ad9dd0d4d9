//! Reading and writing CoNLL-U treebanks.
//!
//! Only basic dependencies are modeled. Multiword-token range lines and
//! comments are kept verbatim so that an untouched file is written back
//! byte for byte. Sentences containing empty nodes (`8.1` ids) are kept as
//! well but flagged unsupported; later stages pass them through unchanged.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree;

/// Which tag column forms the n-gram keys.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagField {
    #[default]
    Upos,
    Xpos,
}

impl std::str::FromStr for TagField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upos" => Ok(TagField::Upos),
            "xpos" => Ok(TagField::Xpos),
            other => Err(Error::Usage(format!("unknown tag field '{other}' (upos|xpos)"))),
        }
    }
}

/// One syntactic word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// `None` when the column is `_` (unparsed input).
    pub head: Option<usize>,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// A token with only the columns the toolkit reads filled in.
    pub fn new(id: usize, form: &str, upos: &str, head: Option<usize>, deprel: &str) -> Token {
        Token {
            id,
            form: form.to_string(),
            lemma: "_".to_string(),
            upos: upos.to_string(),
            xpos: "_".to_string(),
            feats: "_".to_string(),
            head,
            deprel: deprel.to_string(),
            deps: "_".to_string(),
            misc: "_".to_string(),
        }
    }

    pub fn tag(&self, field: TagField) -> &str {
        match field {
            TagField::Upos => &self.upos,
            TagField::Xpos => &self.xpos,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match self.head {
            Some(h) => h.to_string(),
            None => "_".to_string(),
        };
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.form,
            self.lemma,
            self.upos,
            self.xpos,
            self.feats,
            head,
            self.deprel,
            self.deps,
            self.misc
        )
    }
}

/// A multiword-token range line such as `1-2 don't _ ...`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiwordToken {
    pub start: usize,
    pub end: usize,
    pub form: String,
    /// Columns 3..10, tab-joined, kept verbatim.
    pub rest: String,
}

impl fmt::Display for MultiwordToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}\t{}\t{}", self.start, self.end, self.form, self.rest)
    }
}

/// An enhanced-UD empty node line, kept verbatim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmptyNode {
    /// Integer part of the id; the line is written after that word.
    pub after: usize,
    pub line: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
    pub multiword: Vec<MultiwordToken>,
    pub empty_nodes: Vec<EmptyNode>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Sentence {
        Sentence {
            tokens,
            ..Sentence::default()
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// False for sentences with empty nodes.
    pub fn is_supported(&self) -> bool {
        self.empty_nodes.is_empty()
    }

    pub fn has_heads(&self) -> bool {
        !self.tokens.is_empty() && self.tokens.iter().all(|t| t.head.is_some())
    }

    /// Heads as a 0-based vector (`heads[i]` is the head id of word `i + 1`).
    pub fn heads(&self) -> Option<Vec<usize>> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn tags(&self, field: TagField) -> Vec<&str> {
        self.tokens.iter().map(|t| t.tag(field)).collect()
    }

    /// Checks single-root, acyclic structure when every head is present.
    pub fn check_tree(&self) -> std::result::Result<(), String> {
        match self.heads() {
            Some(heads) => tree::check_tree(&heads).map_err(|e| e.to_string()),
            None => Err("sentence has unannotated heads".to_string()),
        }
    }

    /// Sentence id from a `# sent_id = ...` comment, when present.
    pub fn sent_id(&self) -> Option<&str> {
        self.comments
            .iter()
            .find_map(|c| c.strip_prefix("# sent_id = "))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Treebank {
    pub sentences: Vec<Sentence>,
}

impl Treebank {
    pub fn new(sentences: Vec<Sentence>) -> Treebank {
        Treebank { sentences }
    }

    /// Number of syntactic words; range lines and empty nodes are not counted.
    pub fn word_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Copy with every head and deprel cleared, the shape a parser receives.
    pub fn strip_annotations(&self) -> Treebank {
        let mut out = self.clone();
        for token in out.sentences.iter_mut().flat_map(|s| s.tokens.iter_mut()) {
            token.head = None;
            token.deprel = "_".to_string();
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReadOptions {
    /// Reject fully annotated sentences that are not single-rooted trees.
    pub validate_trees: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            validate_trees: true,
        }
    }
}

/// Reads a treebank, validating gold trees.
pub fn read_conllu<R: BufRead>(source: R) -> Result<Treebank> {
    read_conllu_with(source, ReadOptions::default())
}

/// Reads parser output, which need not be well-formed trees.
pub fn read_conllu_lenient<R: BufRead>(source: R) -> Result<Treebank> {
    read_conllu_with(
        source,
        ReadOptions {
            validate_trees: false,
        },
    )
}

pub fn read_conllu_with<R: BufRead>(source: R, options: ReadOptions) -> Result<Treebank> {
    let mut sentences = Vec::new();
    let mut current = Sentence::default();
    let mut started = false;

    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Parse {
                line: lineno,
                message: "invalid UTF-8".to_string(),
            },
            _ => Error::Io(e),
        })?;

        if line.trim().is_empty() {
            if started {
                finish(&mut sentences, std::mem::take(&mut current), options)?;
                started = false;
            }
            continue;
        }
        started = true;

        if line.starts_with('#') {
            current.comments.push(line);
            continue;
        }

        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }

        let id = cols[0];
        if let Some((start, end)) = id.split_once('-') {
            let (start, end) = (parse_id(start, lineno)?, parse_id(end, lineno)?);
            if end < start {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("bad multiword range '{id}'"),
                });
            }
            current.multiword.push(MultiwordToken {
                start,
                end,
                form: cols[1].to_string(),
                rest: cols[2..].join("\t"),
            });
        } else if let Some((whole, _)) = id.split_once('.') {
            current.empty_nodes.push(EmptyNode {
                after: parse_id(whole, lineno)?,
                line,
            });
        } else {
            let id = parse_id(id, lineno)?;
            let expected = current.tokens.len() + 1;
            if id != expected {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected word id {expected}, found {id}"),
                });
            }
            let head = match cols[6] {
                "_" => None,
                h => Some(h.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad head '{h}'"),
                })?),
            };
            if cols[3].is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    message: "empty UPOS column".to_string(),
                });
            }
            current.tokens.push(Token {
                id,
                form: cols[1].to_string(),
                lemma: cols[2].to_string(),
                upos: cols[3].to_string(),
                xpos: cols[4].to_string(),
                feats: cols[5].to_string(),
                head,
                deprel: cols[7].to_string(),
                deps: cols[8].to_string(),
                misc: cols[9].to_string(),
            });
        }
    }
    if started {
        finish(&mut sentences, current, options)?;
    }
    Ok(Treebank { sentences })
}

fn parse_id(s: &str, line: usize) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::Parse {
        line,
        message: format!("bad id '{s}'"),
    })
}

fn finish(sentences: &mut Vec<Sentence>, sentence: Sentence, options: ReadOptions) -> Result<()> {
    let ordinal = sentences.len() + 1;
    let n = sentence.tokens.len();
    for token in &sentence.tokens {
        if let Some(head) = token.head {
            if head == token.id || head > n {
                return Err(Error::Validation {
                    sentence: ordinal,
                    message: format!("word {} has invalid head {head}", token.id),
                });
            }
        }
    }
    for mwt in &sentence.multiword {
        if mwt.end > n {
            return Err(Error::Validation {
                sentence: ordinal,
                message: format!("multiword range {}-{} exceeds sentence", mwt.start, mwt.end),
            });
        }
    }
    if options.validate_trees && sentence.has_heads() {
        if let Err(e) = sentence.check_tree() {
            let locus = sentence
                .sent_id()
                .map(|id| format!(" ({id})"))
                .unwrap_or_default();
            return Err(Error::Validation {
                sentence: ordinal,
                message: format!("{e}{locus}"),
            });
        }
    }
    sentences.push(sentence);
    Ok(())
}

pub fn write_sentence<W: Write>(sentence: &Sentence, sink: &mut W) -> Result<()> {
    for comment in &sentence.comments {
        writeln!(sink, "{comment}")?;
    }
    for node in sentence.empty_nodes.iter().filter(|e| e.after == 0) {
        writeln!(sink, "{}", node.line)?;
    }
    for token in &sentence.tokens {
        for mwt in sentence.multiword.iter().filter(|m| m.start == token.id) {
            writeln!(sink, "{mwt}")?;
        }
        writeln!(sink, "{token}")?;
        for node in sentence.empty_nodes.iter().filter(|e| e.after == token.id) {
            writeln!(sink, "{}", node.line)?;
        }
    }
    writeln!(sink)?;
    Ok(())
}

pub fn write_conllu<W: Write>(treebank: &Treebank, mut sink: W) -> Result<()> {
    for sentence in &treebank.sentences {
        write_sentence(sentence, &mut sink)?;
    }
    sink.flush()?;
    Ok(())
}

pub fn to_string(treebank: &Treebank) -> String {
    let mut buf = Vec::new();
    write_conllu(treebank, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("treebank text is UTF-8")
}

pub fn from_str(text: &str) -> Result<Treebank> {
    read_conllu(text.as_bytes())
}

pub fn read_path(path: &std::path::Path) -> Result<Treebank> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_conllu(std::io::BufReader::new(file))
}

pub fn read_path_lenient(path: &std::path::Path) -> Result<Treebank> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    read_conllu_lenient(std::io::BufReader::new(file))
}

pub fn write_path(treebank: &Treebank, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_conllu(treebank, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "# sent_id = a\n# text = I don't know.\n\
1\tI\tI\tPRON\tPRP\t_\t4\tnsubj\t_\t_\n\
2-3\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
2\tdo\tdo\tAUX\tVBP\t_\t4\taux\t_\t_\n\
3\tn't\tnot\tPART\tRB\t_\t4\tadvmod\t_\t_\n\
4\tknow\tknow\tVERB\tVB\t_\t0\troot\t_\tSpaceAfter=No\n\
5\t.\t.\tPUNCT\t.\t_\t4\tpunct\t_\t_\n\
\n\
# sent_id = b\n\
1\tYes\tyes\tINTJ\tUH\t_\t0\troot\t_\t_\n\
\n";

    #[test]
    fn empty_input() {
        let tb = read_conllu("".as_bytes()).unwrap();
        assert_eq!(tb.len(), 0);
        assert_eq!(tb.word_count(), 0);
        assert_eq!(to_string(&tb), "");
    }

    #[test]
    fn multiword_range_round_trip() {
        let tb = from_str(TWO).unwrap();
        assert_eq!(tb.len(), 2);
        assert_eq!(tb.word_count(), 6);
        assert_eq!(tb.sentences[0].multiword.len(), 1);
        assert_eq!(tb.sentences[0].multiword[0].form, "don't");
        assert_eq!(to_string(&tb), TWO);
        assert_eq!(from_str(&to_string(&tb)).unwrap(), tb);
    }

    #[test]
    fn comments_come_first_in_order() {
        let tb = from_str(TWO).unwrap();
        let out = to_string(&tb);
        let lines: Vec<_> = out.lines().take(2).collect();
        assert_eq!(lines, ["# sent_id = a", "# text = I don't know."]);
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let err = from_str("1\tA\tB\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            e => panic!("unexpected {e}"),
        }
        let text = "1\tx\t_\tX\t_\t_\t0\troot\t_\t_\n\n1\tx\t_\tX\t_\t_\t0\n";
        match from_str(text).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_nodes_flag_sentence() {
        let text = "1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n1.1\tb\t_\tX\t_\t_\t_\t_\t1:dep\t_\n2\tc\t_\tX\t_\t_\t1\tdep\t_\t_\n\n";
        let tb = from_str(text).unwrap();
        assert!(!tb.sentences[0].is_supported());
        assert_eq!(tb.word_count(), 2);
        assert_eq!(to_string(&tb), text);
    }

    #[test]
    fn cycles_and_multiple_roots_rejected() {
        let multi = "1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n2\tb\t_\tX\t_\t_\t0\troot\t_\t_\n\n";
        assert!(matches!(
            from_str(multi).unwrap_err(),
            Error::Validation { sentence: 1, .. }
        ));
        let cycle = "# sent_id = c\n1\ta\t_\tX\t_\t_\t0\troot\t_\t_\n2\tb\t_\tX\t_\t_\t3\tdep\t_\t_\n3\tc\t_\tX\t_\t_\t2\tdep\t_\t_\n\n";
        let err = from_str(cycle).unwrap_err();
        assert!(err.to_string().contains("(c)"), "{err}");
        assert!(read_conllu_lenient(multi.as_bytes()).is_ok());
    }

    #[test]
    fn unannotated_heads_are_none() {
        let text = "1\ta\t_\tX\t_\t_\t_\t_\t_\t_\n\n";
        let tb = from_str(text).unwrap();
        assert_eq!(tb.sentences[0].tokens[0].head, None);
        assert_eq!(to_string(&tb), text);
    }

    #[test]
    fn missing_final_blank_line() {
        let tb = from_str("1\ta\t_\tX\t_\t_\t0\troot\t_\t_").unwrap();
        assert_eq!(tb.len(), 1);
    }
}
