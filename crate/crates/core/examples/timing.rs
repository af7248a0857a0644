//! Times one uniform-loss training on a synthetic set shaped like the
//! HandOutlines swap experiment (370 samples, 2709 features).
//!
//! ```text
//! cargo run --release -p maxnorm --example timing -- [samples] [features]
//! ```

use std::time::Instant;

use maxnorm::bisection::{train_uniform, BisectionConfig};
use maxnorm::data::generate_synthetic;

fn main() -> maxnorm::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("sizes are integers"));
    let samples = args.next().unwrap_or(370);
    let n = args.next().unwrap_or(2709);
    let ones = samples / 3;
    let z = generate_synthetic(n, &[(1.0, ones), (2.0, samples - ones)], 1.0, 0.3, 7)?;

    let clock = Instant::now();
    let rep = train_uniform(&z, &BisectionConfig::default())?;
    println!(
        "{samples} x {n}: {} iterations, bracket [{:e}, {:e}], {} pivots, {:.2?}",
        rep.iterations,
        rep.lower,
        rep.upper,
        rep.total_pivots(),
        clock.elapsed()
    );
    for s in &rep.trace {
        println!(
            "  L = {:.6e}  feasible = {:5}  pivots = {}",
            s.level, s.feasible, s.pivots
        );
    }
    Ok(())
}
