//! Monte Carlo sensitivity of the pose to errors in each input.
//!
//! ```text
//! cargo run --release --example robustness [-- TRIALS]
//! ```
//!
//! Prints one error curve per perturbed quantity: focal length (px), inter-eye
//! distance (cm), face ratio and image point positions (px).

use gazegeom::sim::{curve_string, run_scenario, SimResult, SimScenario, Target};
use gazegeom::Result;

pub fn run(trials: usize) -> Result<Vec<SimResult>> {
    let sigmas = |step: f64| (0..=5).map(|i| (i as f64 * step * 1e6).round() / 1e6).collect::<Vec<_>>();
    let mut out = Vec::new();
    for (target, step) in [
        (Target::FocalLength, 20.0),
        (Target::InterEyeDist, 0.1),
        (Target::RatioR, 0.03),
        (Target::ImagePoints, 2.0),
    ] {
        let mut s = SimScenario::new(target, sigmas(step));
        s.trials = trials;
        let res = run_scenario(&s)?;
        println!("# {} (face at {:.2} cm, Spearman {:.3})", target.name(), res.distance_cm, res.spearman());
        print!("{}", curve_string(&res)?);
        out.push(res);
    }
    Ok(out)
}

fn main() -> Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("trial count must be an integer"))
        .unwrap_or(100);
    run(trials)?;
    Ok(())
}
