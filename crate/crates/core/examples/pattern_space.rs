//! Lists every head pattern shape for bigrams and trigrams.

use treefrag::pattern::enumerate_patterns;

fn main() -> treefrag::Result<()> {
    for n in [2, 3] {
        let space = enumerate_patterns(n)?;
        println!("n = {n}: {} patterns", space.total());
        for (name, patterns) in [
            ("reusable", &space.connected),
            ("with outside dependents", &space.connected_external),
            ("not connected", &space.disconnected),
            ("crossing (not counted)", &space.nonprojective),
        ] {
            let shown: Vec<String> = patterns.iter().map(|p| format!("\"{p}\"")).collect();
            println!("  {name:<24} {}", shown.join(", "));
        }
    }
    Ok(())
}
