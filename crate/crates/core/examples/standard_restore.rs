//! Standard Restore on `π = N(0, 1)` with regenerations from `N(0, 4)`.
//!
//! ```text
//! cargo run --release --example standard_restore
//! ```

use std::sync::Arc;

use restore_kit::prelude::*;

fn main() -> restore_kit::Result<()> {
    let target = StdGaussian::new(1);
    let mu = Arc::new(DiagonalGaussian::isotropic(1, 0.0, 2.0)?);
    // smallest C̃ keeping κ ≥ 0 for this pair: κ(0) = 0
    let c_tilde = (2.0 * std::f64::consts::PI).sqrt();
    let config = RestoreConfig::new(
        mu,
        RateMode::Full { c_tilde },
        200.0,
        OutputSchedule::Poisson { rate: 100.0 },
        Horizon::Tours(5000),
        1,
    );
    let run = simulate_standard(&config, &target)?;

    let n = run.n_tours() as f64;
    let mean = ergodic_average(&run, |x| x[0])?;
    let se = (tour_clt_variance(&run, |x| x[0])? / n).sqrt();
    let second = ergodic_average(&run, |x| x[0] * x[0])?;
    println!("{} tours, {} samples, total time {:.1}", run.n_tours(), run.n_samples(), run.total_time);
    println!("E[x]  = {mean:.4} ± {se:.4}");
    println!("E[x²] = {second:.4}");
    println!("truncation exceedance fraction {:.2e}", run.truncation_exceedance_frac());
    Ok(())
}
