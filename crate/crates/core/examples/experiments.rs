//! The triangle experiments: distortion distribution and noisy classification.
//!
//! cargo run --release --example experiments [seed]

use orbit_features::bench::{classification_experiment, distortion_experiment, ExperimentConfig};

fn main() -> orbit_features::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed is an integer"));
    let cfg = ExperimentConfig::with_seed(seed);

    let d = distortion_experiment(&cfg)?;
    print!("{}", d.summary());
    for s in &d.ratios {
        let peak = s.histogram.counts.iter().copied().max().unwrap_or(1).max(1);
        println!("{} histogram", s.map);
        for (b, &c) in s.histogram.counts.iter().enumerate().step_by(5) {
            let (lo, _) = s.histogram.edges(b);
            println!("  {lo:6.3} {}", "#".repeat((60 * c / peak) as usize));
        }
    }

    let c = classification_experiment(&cfg)?;
    print!("{}", c.summary());
    Ok(())
}
