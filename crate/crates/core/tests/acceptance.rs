//! Acceptance checks, one line per criterion.
//!
//! Criterion 5 needs the UD English v2.1 files. Point `UD_ENGLISH_DIR` at a
//! directory holding `*-ud-train.conllu`, `*-ud-dev.conllu` and
//! `*-ud-test.conllu`; without it that check is skipped and criteria 6 and 7
//! run on generated English-like data instead.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treefrag::conllu::{self, Sentence, Token, Treebank};
use treefrag::eval::{self, Throughput};
use treefrag::miner::{count_patterns, mine, mine_iterative, KeyCounts, MiningConfig, Template, TemplateStore};
use treefrag::parser::{self, ExternalParserSpec, Parser};
use treefrag::pattern::{classify, enumerate_patterns, extract_pattern, Eligibility, HeadPattern, LabelPattern};
use treefrag::pipeline::{self, ParserChoice, PipelineConfig};
use treefrag::reattach::{reattach, ParsedReduced};
use treefrag::reduce::{reduce_gold, reduce_input};
use treefrag::synthetic::{english_like_treebank, random_projective_sentence, random_projective_treebank, GrammarOptions};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

// ---------------------------------------------------------------------------
// 1. pattern space

/// All head assignments of size n, sorted into classes by brute force.
fn brute_force_space(n: usize) -> [BTreeSet<String>; 3] {
    let mut classes: [BTreeSet<String>; 3] = Default::default();
    let mut assignment = vec![0usize; n];
    loop {
        // value n means "outside"
        let heads: Vec<Option<usize>> = assignment.iter().map(|&v| (v < n).then_some(v)).collect();
        let self_loop = heads.iter().enumerate().any(|(i, h)| *h == Some(i));
        let reaches_outside = |mut w: usize| {
            for _ in 0..=n {
                match heads[w] {
                    None => return true,
                    Some(h) => w = h,
                }
            }
            false
        };
        let acyclic = !self_loop && (0..n).all(reaches_outside);
        let dominated_by = |mut w: usize, h: usize| {
            for _ in 0..=n {
                if w == h {
                    return true;
                }
                match heads[w] {
                    Some(x) => w = x,
                    None => return false,
                }
            }
            false
        };
        let projective = (0..n).all(|d| match heads[d] {
            None => true,
            Some(h) => (d.min(h) + 1..d.max(h)).all(|k| dominated_by(k, h)),
        });
        if acyclic && projective {
            let roots = heads.iter().filter(|h| h.is_none()).count();
            let render = |external: bool| {
                let cells: Vec<String> = heads
                    .iter()
                    .map(|h| h.map_or("-".to_string(), |v| v.to_string()))
                    .collect();
                format!("{} {external}", cells.join(" "))
            };
            if roots == 1 {
                classes[0].insert(render(false));
                classes[1].insert(render(true));
            } else {
                classes[2].insert(render(false));
            }
        }
        // next assignment
        let mut i = 0;
        while i < n {
            assignment[i] += 1;
            if assignment[i] <= n {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    classes
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        let space = enumerate_patterns(n).unwrap();
        let render = |v: &[HeadPattern]| v.iter().map(|p| p.to_string()).collect::<BTreeSet<_>>();
        let got = [
            render(&space.connected),
            render(&space.connected_external),
            render(&space.disconnected),
        ];
        let want = brute_force_space(n);
        ok &= got == want;
        notes.push(format!(
            "n={n}: {} = {}/{}/{}",
            space.total(),
            got[0].len(),
            got[1].len(),
            got[2].len()
        ));
        if n == 3 {
            ok &= space.total() == 19 && got.iter().map(BTreeSet::len).collect::<Vec<_>>() == [7, 7, 5];
        } else {
            let eligible: BTreeSet<String> = space
                .connected
                .iter()
                .filter(|p| classify(p) == Eligibility::Eligible)
                .map(|p| p.to_string())
                .collect();
            ok &= space.total() == 5
                && eligible == BTreeSet::from(["1 - false".to_string(), "- 0 false".to_string()]);
        }
    }
    check(ok, notes.join(", "))
}

// ---------------------------------------------------------------------------
// 2. counting oracle

/// Re-scans every n-gram with nested loops over the whole sentence.
fn naive_counts(treebank: &Treebank, config: &MiningConfig) -> BTreeMap<Vec<String>, KeyCounts> {
    let mut out: BTreeMap<Vec<String>, KeyCounts> = BTreeMap::new();
    for s in &treebank.sentences {
        let len = s.len();
        for n in [2usize, 3] {
            if (n == 2 && !config.use_bigrams) || (n == 3 && !config.use_trigrams) {
                continue;
            }
            for start in 0..len.saturating_sub(n - 1) {
                let span: Vec<usize> = (start + 1..=start + n).collect();
                let inside = |id: usize| span.contains(&id);
                let mut heads = Vec::new();
                let mut labels = Vec::new();
                for &id in &span {
                    let h = s.tokens[id - 1].head.unwrap();
                    if inside(h) {
                        heads.push(Some(h - span[0]));
                        labels.push(Some(s.tokens[id - 1].deprel.clone()));
                    } else {
                        heads.push(None);
                        labels.push(None);
                    }
                }
                let single_root = heads.iter().filter(|h| h.is_none()).count() == 1;
                let mut external = false;
                if single_root {
                    for (k, &id) in span.iter().enumerate() {
                        if heads[k].is_none() {
                            continue;
                        }
                        for t in &s.tokens {
                            if t.head == Some(id) && !inside(t.id) {
                                external = true;
                            }
                        }
                    }
                }
                let key: Vec<String> = span.iter().map(|&id| s.tokens[id - 1].upos.clone()).collect();
                let hp = HeadPattern { heads, external };
                let lp = LabelPattern { labels, external };
                let e = out.entry(key).or_default();
                e.total += 1;
                *e.patterns.entry(hp.clone()).or_default() += 1;
                *e.labeled.entry((hp, lp)).or_default() += 1;
            }
        }
    }
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let config = MiningConfig::default();
    let mut mismatches = 0;
    let mut keys = 0;
    for _ in 0..200 {
        let tb = random_projective_treebank(&mut rng, 50, 12, 6);
        let fast = count_patterns(&tb, &config);
        let slow = naive_counts(&tb, &config);
        keys += slow.len();
        if fast != slow {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0,
        format!("200 treebanks, {keys} n-gram keys, {mismatches} mismatching treebanks"),
    )
}

// ---------------------------------------------------------------------------
// 3. round trips

const RICH_CONLLU: &str = "\
# newdoc id = d1
# sent_id = s1
# text = Don't stop.
1-2\tDon't\t_\t_\t_\t_\t_\t_\t_\t_
1\tDo\tdo\tAUX\tVBP\tMood=Ind\t3\taux\t3:aux\t_
2\tn't\tnot\tPART\tRB\t_\t3\tadvmod\t3:advmod\t_
3\tstop\tstop\tVERB\tVB\tVerbForm=Inf\t0\troot\t0:root\tSpaceAfter=No
4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t3:punct\t_

# sent_id = s2
1\tI\tI\tPRON\tPRP\t_\t2\tnsubj\t2:nsubj|3.1:nsubj\t_
2\tlike\tlike\tVERB\tVBP\t_\t0\troot\t0:root\t_
3\ttea\ttea\tNOUN\tNN\t_\t2\tobj\t2:obj\t_
3.1\tlike\tlike\tVERB\tVBP\t_\t_\t_\t2:conj\tCopyOf=2
4\t.\t.\tPUNCT\t.\t_\t2\tpunct\t2:punct\t_

";

/// A small treebank plus a store mined from it at 100/100, so every
/// template agrees with every occurrence of its key.
fn consistent_fixture(rng: &mut ChaCha8Rng) -> (Treebank, TemplateStore) {
    let sentences = rng.gen_range(1..=5);
    let tags = rng.gen_range(2..=5);
    let tb = Treebank::new(
        (0..sentences)
            .map(|_| {
                let len = rng.gen_range(2..=14);
                random_projective_sentence(rng, len, tags)
            })
            .collect(),
    );
    let store = mine(&tb, &MiningConfig::with_thresholds(100.0, 100.0)).unwrap();
    (tb, store)
}

fn criterion_3() -> Outcome {
    // (a) byte-stable CoNLL-U
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut byte_stable = conllu::to_string(&conllu::read_conllu_lenient(RICH_CONLLU.as_bytes()).unwrap()) == RICH_CONLLU;
    for _ in 0..100 {
        let text = conllu::to_string(&random_projective_treebank(&mut rng, 10, 12, 6));
        byte_stable &= conllu::to_string(&conllu::from_str(&text).unwrap()) == text;
    }

    // (b) token sequences restored, (c) gold restored
    let mut tokens_ok = 0;
    let mut gold_ok = 0;
    let mut with_matches = 0;
    let mut removed = 0;
    for _ in 0..500 {
        let (gold, store) = consistent_fixture(&mut rng);
        let reduced = reduce_gold(&gold, &store).unwrap();
        removed += reduced.removed_words;
        with_matches += (reduced.removed_words > 0) as usize;
        let restored = reattach(ParsedReduced {
            treebank: &reduced.treebank,
            records: &reduced.records,
        })
        .unwrap();
        let forms = |tb: &Treebank| -> Vec<Vec<(String, String)>> {
            tb.sentences
                .iter()
                .map(|s| s.tokens.iter().map(|t| (t.form.clone(), t.upos.clone())).collect())
                .collect()
        };
        tokens_ok += (forms(&restored.treebank) == forms(&gold)) as usize;
        gold_ok += (restored.treebank == gold && restored.malformed.is_empty()) as usize;
    }
    check(
        byte_stable && tokens_ok == 500 && gold_ok == 500 && with_matches > 400,
        format!(
            "byte-stable: {byte_stable}; tokens restored {tokens_ok}/500; gold restored {gold_ok}/500 \
             ({with_matches} fixtures reduced, {removed} words removed)"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. error localization

/// Trigram shapes differing from `p` in exactly one internal head, with the
/// same fragment head.
fn one_arc_variants(p: &HeadPattern) -> Vec<(HeadPattern, usize)> {
    let space = enumerate_patterns(3).unwrap();
    space
        .connected
        .iter()
        .filter_map(|q| {
            let diff: Vec<usize> = (0..3).filter(|&i| p.heads[i] != q.heads[i]).collect();
            match diff.as_slice() {
                [d] if p.heads[*d].is_some() && q.heads[*d].is_some() => Some((q.clone(), *d)),
                _ => None,
            }
        })
        .collect()
}

fn unique_tags(s: &mut Sentence) {
    for (i, t) in s.tokens.iter_mut().enumerate() {
        t.upos = format!("U{i}");
    }
}

fn template_at(s: &Sentence, start: usize, n: usize) -> Template {
    let (h, l) = extract_pattern(s, start, n).unwrap();
    Template {
        tags: s.tokens[start..start + n].iter().map(|t| t.upos.clone()).collect(),
        head_pattern: h,
        label_pattern: l,
        head_count: 1,
        label_count: 1,
        frequency: 1,
        rank: None,
    }
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fixtures = 0;
    let mut localized = 0;
    let mut attempts = 0;
    while fixtures < 300 && attempts < 100_000 {
        attempts += 1;
        let len = rng.gen_range(3..=12);
        let mut s = random_projective_sentence(&mut rng, len, 6);
        unique_tags(&mut s);
        let start = rng.gen_range(0..=len - 3);
        let (gold_pattern, _) = extract_pattern(&s, start, 3).unwrap();
        if classify(&gold_pattern) != Eligibility::Eligible {
            continue;
        }
        let variants = one_arc_variants(&gold_pattern);
        let Some((wrong, d)) = variants.get(rng.gen_range(0..variants.len().max(1))).cloned() else {
            continue;
        };
        let mut bad = template_at(&s, start, 3);
        bad.head_pattern = wrong;
        let mut templates = vec![bad];
        // correct templates elsewhere, not overlapping the wrong one
        let mut pos = 0;
        while pos + 2 <= len {
            let n = if pos + 3 <= len && rng.gen_bool(0.5) { 3 } else { 2 };
            let clear = pos + n <= start || pos >= start + 3;
            if clear && rng.gen_bool(0.5) {
                let t = template_at(&s, pos, n);
                if classify(&t.head_pattern) == Eligibility::Eligible {
                    templates.push(t);
                    pos += n;
                    continue;
                }
            }
            pos += 1;
        }
        let store = TemplateStore {
            templates,
            ..TemplateStore::default()
        };
        let gold = Treebank::new(vec![s]);
        let reduced = reduce_gold(&gold, &store).unwrap();
        if reduced.records[0].matches.iter().all(|m| m.positions[0] != start + 1) {
            continue;
        }
        fixtures += 1;
        let restored = reattach(ParsedReduced {
            treebank: &reduced.treebank,
            records: &reduced.records,
        })
        .unwrap();
        let differing: Vec<usize> = restored.treebank.sentences[0]
            .tokens
            .iter()
            .zip(&gold.sentences[0].tokens)
            .filter(|(a, b)| a != b)
            .map(|(a, _)| a.id)
            .collect();
        localized += (differing == [start + 1 + d]) as usize;
    }
    check(
        fixtures == 300 && localized == fixtures,
        format!("{localized}/{fixtures} fixtures differ from gold only at the wrong arc's dependent"),
    )
}

// ---------------------------------------------------------------------------
// data for 5-7

struct Data {
    name: String,
    train: Treebank,
    dev: Treebank,
    test: Option<Treebank>,
    is_ud: bool,
}

fn ud_files() -> Option<(PathBuf, PathBuf, PathBuf)> {
    let dir = PathBuf::from(std::env::var_os("UD_ENGLISH_DIR")?);
    let find = |part: &str| -> Option<PathBuf> {
        let suffix = format!("-ud-{part}.conllu");
        std::fs::read_dir(&dir)
            .ok()?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .find(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(&suffix)))
    };
    Some((find("train")?, find("dev")?, find("test")?))
}

fn load_data() -> Data {
    if let Some((train, dev, test)) = ud_files() {
        let read = |p: &Path| conllu::read_path(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        return Data {
            name: "UD English".to_string(),
            train: read(&train),
            dev: read(&dev),
            test: Some(read(&test)),
            is_ud: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let options = GrammarOptions::default();
    Data {
        name: "generated English-like data".to_string(),
        train: english_like_treebank(&mut rng, 8000, &options),
        dev: english_like_treebank(&mut rng, 1500, &options),
        test: None,
        is_ud: false,
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol + 1e-9
}

fn criterion_5(data: &Data) -> Outcome {
    if !data.is_ud {
        return Skip("UD English v2.1 not supplied (set UD_ENGLISH_DIR)".to_string());
    }
    let test = data.test.as_ref().expect("UD test set");
    let dev_words = data.dev.word_count();
    let test_words = test.word_count();
    let store83 = mine(&data.train, &MiningConfig::with_thresholds(83.0, 83.0)).unwrap();
    let store87 = mine(&data.train, &MiningConfig::with_thresholds(87.0, 87.0)).unwrap();
    let pct = |tb: &Treebank, store: &TemplateStore| reduce_input(&tb.strip_annotations(), store).unwrap().reduction_pct();
    let (d83, d87, t83, t87) = (pct(&data.dev, &store83), pct(&data.dev, &store87), pct(test, &store83), pct(test, &store87));
    let ok = dev_words == 25150
        && test_words == 25097
        && store83.len().abs_diff(141) <= 7
        && store83.perfect_count().abs_diff(97) <= 5
        && within(d83, 20.7, 1.0)
        && within(d87, 8.3, 0.5)
        && within(t83, 20.7, 1.0)
        && within(t87, 8.7, 0.5);
    check(
        ok,
        format!(
            "dev {dev_words} words, test {test_words}; {} templates ({} perfect); \
             reduction dev {d83:.1}%/{d87:.1}%, test {t83:.1}%/{t87:.1}% at 83-83/87-87",
            store83.len(),
            store83.perfect_count()
        ),
    )
}

fn criterion_6(data: &Data) -> Outcome {
    let store83 = mine(&data.train, &MiningConfig::with_thresholds(83.0, 83.0)).unwrap();
    let store87 = mine(&data.train, &MiningConfig::with_thresholds(87.0, 87.0)).unwrap();
    let subset = store87.keys().is_subset(&store83.keys());
    let mut notes = vec![format!("{}: keys(87-87) subset of keys(83-83): {subset}", data.name)];
    let mut ok = subset;
    let sets: Vec<(&str, &Treebank)> = std::iter::once(("dev", &data.dev))
        .chain(data.test.as_ref().map(|t| ("test", t)))
        .collect();
    for (name, tb) in sets {
        let input = tb.strip_annotations();
        let r83 = reduce_input(&input, &store83).unwrap().reduction_pct();
        let r87 = reduce_input(&input, &store87).unwrap().reduction_pct();
        ok &= r87 <= r83;
        notes.push(format!("{name} reduction {r87:.1}% <= {r83:.1}%"));
    }
    check(ok, notes.join("; "))
}

fn criterion_7(data: &Data) -> Outcome {
    let epochs = 5;
    let seed = 7;
    let reps = 5;
    let gold = &data.dev;
    let input = gold.strip_annotations();

    let full = Parser::Builtin(parser::train_baseline(&data.train, epochs, seed).unwrap());
    let store = mine(&data.train, &MiningConfig::with_thresholds(83.0, 83.0)).unwrap();
    let reduced_train = reduce_gold(&data.train, &store).unwrap();
    let reduced_model = Parser::Builtin(parser::train_baseline(&reduced_train.treebank, epochs, seed).unwrap());
    let reduced = reduce_input(&input, &store).unwrap();

    // warm up both, then alternate so background load hits both sides alike
    let (mut base_parse, _) = full.parse(&input).unwrap();
    let (mut parsed, _) = reduced_model.parse(&reduced.treebank).unwrap();
    let (mut base_times, mut times) = (Vec::new(), Vec::new());
    for _ in 0..reps {
        let (p, secs) = full.parse(&input).unwrap();
        base_parse = p;
        base_times.push(secs);
        let (p, secs) = reduced_model.parse(&reduced.treebank).unwrap();
        parsed = p;
        times.push(secs);
    }
    let base_uas = eval::score(&base_parse, gold).unwrap().uas;
    let base = Throughput::from_times(gold.word_count(), &base_times);
    let restored = reattach(ParsedReduced {
        treebank: &parsed,
        records: &reduced.records,
    })
    .unwrap();
    let uas = eval::score(&restored.treebank, gold).unwrap().uas;
    let fast = Throughput::from_times(reduced.original_words, &times);
    let speedup = fast.speedup_over(&base);
    let drop = base_uas - uas;
    check(
        speedup >= 1.05 && drop <= 4.0,
        format!(
            "{}: reduction {:.1}%, speed-up {speedup:.2}x ({:.0} vs {:.0} tokens/sec), UAS {uas:.2} vs {base_uas:.2} (drop {drop:.2})",
            data.name,
            reduced.reduction_pct(),
            fast.mean,
            base.mean
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. external bridge

fn criterion_8() -> Outcome {
    let gold = english_like_treebank(&mut ChaCha8Rng::seed_from_u64(8), 60, &GrammarOptions::default());

    // identity parser fixtures
    let (copy, secs) = parser::run_external(&ExternalParserSpec::new("cp {input} {output}"), &gold).unwrap();
    let identity = copy == gold && secs > 0.0;
    let misaligned = parser::run_external(&ExternalParserSpec::new("head -n 5 {input} > {output}"), &gold)
        .is_err_and(|e| e.to_string().contains("alignment"));
    let failing = parser::run_external(&ExternalParserSpec::new("echo broken >&2; exit 4"), &gold)
        .is_err_and(|e| e.to_string().contains("broken"));
    let mut slow = ExternalParserSpec::new("sleep 5; cp {input} {output}");
    slow.timeout_secs = 0.3;
    let timeout = parser::run_external(&slow, &gold).is_err_and(|e| e.to_string().contains("timed out"));

    // a conforming external command: this crate's own binary
    let dir = tempfile::tempdir().unwrap();
    let train_path = dir.path().join("train.conllu");
    let dev_path = dir.path().join("dev.conllu");
    let model_path = dir.path().join("model.json");
    let mut rng = ChaCha8Rng::seed_from_u64(80);
    conllu::write_path(&english_like_treebank(&mut rng, 400, &GrammarOptions::default()), &train_path).unwrap();
    conllu::write_path(&gold, &dev_path).unwrap();
    let train = conllu::read_path(&train_path).unwrap();
    pipeline::write_model(&parser::train_baseline(&train, 3, 1).unwrap(), &model_path).unwrap();
    let mut spec = ExternalParserSpec::new(format!(
        "{} parse --model {{model}} --in {{input}} --out {{output}}",
        env!("CARGO_BIN_EXE_treefrag")
    ));
    spec.model = Some(model_path);
    let config = PipelineConfig {
        train: Some(train_path),
        dev: Some(dev_path),
        workdir: dir.path().join("out"),
        setups: vec!["2,3:87-87".to_string(), "2,3:83-83".to_string()],
        parser: ParserChoice::External(spec),
        repetitions: 2,
        ..PipelineConfig::default()
    };
    let report = pipeline::run_pipeline(&config);
    let (complete, rows) = match &report {
        Ok(reports) => {
            let table = eval::render_tables(reports);
            let body: Vec<&str> = table.lines().skip(2).collect();
            let filled = body.iter().all(|l| l.split('|').all(|c| !c.trim().is_empty() || c.is_empty()));
            let reduced_rows = reports.iter().filter(|r| r.setup != "baseline").all(|r| {
                r.word_reduction_pct.is_some() && r.tokens_per_sec.is_some() && r.speedup.is_some()
            });
            (
                filled && reduced_rows && reports.len() == 3 && table.lines().next().unwrap().contains("Speed-up Factor"),
                reports.len(),
            )
        }
        Err(e) => {
            eprintln!("pipeline with external parser failed: {e}");
            (false, 0)
        }
    };
    check(
        identity && misaligned && failing && timeout && complete,
        format!(
            "identity {identity}, misalignment caught {misaligned}, failure diagnostics {failing}, \
             timeout {timeout}, external report complete {complete} ({rows} rows)"
        ),
    )
}

// ---------------------------------------------------------------------------
// 9. iterative mode

fn two_step_fixture() -> Treebank {
    let s = |spec: &[(&str, &str, usize, &str)]| {
        Sentence::new(
            spec.iter()
                .enumerate()
                .map(|(i, &(form, tag, head, rel))| Token::new(i + 1, form, tag, Some(head), rel))
                .collect(),
        )
    };
    let mut sentences = Vec::new();
    for _ in 0..6 {
        // "old the house": the adjective sits before the determiner
        sentences.push(s(&[("old", "ADJ", 3, "amod"), ("the", "DET", 3, "det"), ("house", "NOUN", 0, "root")]));
    }
    for _ in 0..4 {
        sentences.push(s(&[("the", "DET", 2, "det"), ("house", "NOUN", 0, "root")]));
    }
    Treebank::new(sentences)
}

fn criterion_9() -> Outcome {
    let tb = two_step_fixture();
    let config = MiningConfig {
        use_trigrams: false,
        ..MiningConfig::with_thresholds(83.0, 83.0)
    };
    let adj_noun = vec!["ADJ".to_string(), "NOUN".to_string()];
    let iterative = mine_iterative(&tb, &config).unwrap();
    let bag = mine(&tb, &config).unwrap();
    let order: Vec<String> = iterative.templates.iter().map(|t| t.tags.join(" ")).collect();
    let second = iterative.templates.get(1).is_some_and(|t| t.tags == adj_noun && t.rank == Some(1));
    let in_bag = bag.keys().contains(&adj_noun);
    // the bag stays without it at any threshold
    let in_any_bag = [50.0, 70.0, 83.0, 100.0]
        .iter()
        .any(|&t| mine(&tb, &MiningConfig { use_trigrams: false, ..MiningConfig::with_thresholds(t, t) }).unwrap().keys().contains(&adj_noun));
    check(
        second && !in_bag && !in_any_bag,
        format!("iterative order [{}]; ADJ NOUN in bag-of-rules store: {}", order.join(", "), in_bag || in_any_bag),
    )
}

// ---------------------------------------------------------------------------

fn run(name: &str, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = std::time::Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Fail(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &outcome {
        Pass(d) => ("PASS", d),
        Fail(d) => ("FAIL", d),
        Skip(d) => ("SKIP", d),
    };
    println!("criterion {name}: {tag} ({secs:.1}s) {detail}");
    outcome
}

fn main() -> ExitCode {
    let mut outcomes = vec![
        run("1 pattern space", criterion_1),
        run("2 counting oracle", criterion_2),
        run("3 round trips", criterion_3),
        run("4 error localization", criterion_4),
    ];
    let data = load_data();
    if !data.is_ud {
        println!("note: UD_ENGLISH_DIR not set; criteria 6 and 7 use {}", data.name);
    }
    outcomes.push(run("5 treebank reproduction", || criterion_5(&data)));
    outcomes.push(run("6 threshold monotonicity", || criterion_6(&data)));
    outcomes.push(run("7 speed/accuracy trade", || criterion_7(&data)));
    outcomes.push(run("8 external bridge", criterion_8));
    outcomes.push(run("9 iterative mode", criterion_9));

    let failed = outcomes.iter().filter(|o| matches!(o, Fail(_))).count();
    let skipped = outcomes.iter().filter(|o| matches!(o, Skip(_))).count();
    println!(
        "acceptance: {} passed, {failed} failed, {skipped} skipped",
        outcomes.len() - failed - skipped
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
