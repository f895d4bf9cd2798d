//! Standard and Adaptive Restore on a bimodal Gaussian mixture, scored by the
//! RMSE of the estimated mean against the exact mixture mean.
//!
//! ```text
//! cargo run --release --example gaussian_mixture -- 10000
//! ```

use std::sync::Arc;

use restore_kit::prelude::*;

fn main() -> restore_kit::Result<()> {
    let time: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000.0);
    let target = GaussianMixture2::bimodal();
    let truth = target.mean();
    let mu = Arc::new(DiagonalGaussian::isotropic(2, 0.0, 3f64.sqrt())?);

    // minimal C̃ over a grid, inflated by 10%
    let grid: Vec<Vec<f64>> = (0..=200)
        .flat_map(|i| (0..=200).map(move |j| vec![-6.0 + 0.06 * i as f64, -6.0 + 0.06 * j as f64]))
        .collect();
    let c_tilde = 1.1 * estimate_regen_constant(&grid, &target, mu.as_ref())?;
    let config = RestoreConfig::new(
        mu.clone(),
        RateMode::Full { c_tilde },
        1000.0,
        OutputSchedule::Poisson { rate: 10.0 },
        Horizon::Time(time),
        9,
    );
    let run = simulate_standard(&config, &target)?;
    let est: Vec<f64> = (0..2).map(|j| ergodic_average(&run, |x| x[j])).collect::<Result<_>>()?;
    println!("standard: C̃ = {c_tilde:.3}, mean {est:.4?}, RMSE {:.4}", rmse(&est, &truth)?);

    let mut ad = AdaptiveConfig::with_defaults(mu, Horizon::Time(time), 10)?;
    ad.k_plus_bar = 20.0;
    ad.a = 10_000.0;
    ad.burn_in = 9.0 * time;
    let out = simulate_adaptive(&ad, &target)?;
    let est: Vec<f64> = (0..2).map(|j| ergodic_average(&out.run, |x| x[j])).collect::<Result<_>>()?;
    println!("adaptive: mean {est:.4?}, RMSE {:.4}", rmse(&est, &truth)?);
    Ok(())
}
