//! Alignment cost with each optimisation toggled, against the additive baseline.
//!
//! `cargo run --release --example ofa_ablation -- 10000`

use pprs::engine::bench::{bench_alignment, Variant};
use pprs::error::Result;
use pprs::ot::OtMode;

fn main() -> Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let rows: Vec<_> = Variant::ALL.iter().map(|&v| bench_alignment(n, 0.27, v, OtMode::Extended, 1)).collect::<Result<_>>()?;
    let base = rows[0].bytes as f64;
    println!("n = {n}");
    println!("{:<8} {:>12} {:>9} {:>8} {:>9} {:>7}", "variant", "bytes", "ratio", "OTs", "seconds", "ok");
    for r in &rows {
        println!(
            "{:<8} {:>12} {:>9.4} {:>8} {:>9.3} {:>7}",
            r.variant.name(),
            r.bytes,
            r.bytes as f64 / base,
            r.ots,
            r.seconds,
            r.correct
        );
    }
    Ok(())
}
