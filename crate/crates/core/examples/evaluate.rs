//! Scores a system file against gold, or renders a comparison table from
//! made-up reports when no files are given.
//!
//!     cargo run --example evaluate -- system.conllu gold.conllu

use treefrag::conllu;
use treefrag::eval::{self, Counts, EvalReport, Throughput};

fn main() -> treefrag::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [system, gold] = args.as_slice() {
        let report = eval::score(&conllu::read_path_lenient(system.as_ref())?, &conllu::read_path_lenient(gold.as_ref())?)?;
        println!("UAS {:.2} LAS {:.2} over {} words", report.uas, report.las, report.counts.words);
        return Ok(());
    }

    let base = Throughput::from_times(25150, &[1.45, 1.41, 1.47, 1.43, 1.44]);
    let row = |setup: &str, heads, labeled, reduction: Option<f64>, times: &[f64]| {
        let t = Throughput::from_times(25150, times);
        EvalReport {
            parser: "builtin arc-eager".into(),
            dataset: "dev".into(),
            setup: setup.into(),
            word_reduction_pct: reduction,
            speedup: Some(t.speedup_over(&base)),
            tokens_per_sec: Some(t),
            ..EvalReport::from_counts(Counts { words: 25150, heads, labeled })
        }
    };
    let reports = vec![
        row("M2,3 83-83", 20862, 20128, Some(20.7), &[1.21, 1.19, 1.22, 1.20, 1.18]),
        row("baseline", 21395, 20770, None, &[1.45, 1.41, 1.47, 1.43, 1.44]),
        row("M2,3 87-87", 21221, 20532, Some(8.3), &[1.33, 1.31, 1.34, 1.30, 1.32]),
    ];
    print!("{}", eval::render_tables(&reports));
    Ok(())
}
