//! Quantiles of the partial and full regeneration rates along an RWM chain on
//! the log-Gaussian Cox posterior, with `C̃` estimated from the same chain.
//!
//! ```text
//! cargo run --release --example rate_quantiles
//! ```

use std::sync::Arc;

use restore_kit::prelude::*;
use restore_kit::rwm::{rwm_run, tune_scale, RwmConfig};

fn main() -> restore_kit::Result<()> {
    let (lgcp, _) = LogGaussianCox::simulate(5, 13)?;
    let lgcp: SharedTarget = Arc::new(lgcp);
    let d = lgcp.dim();
    let map = laplace_approximate(lgcp.as_ref(), &vec![0.0; d])?;
    let target = transform_target(lgcp, map)?;

    let scale = tune_scale(target.as_ref(), None, 13)?;
    let mut config = RwmConfig::new(scale, 400_000, 13);
    config.thin = 20;
    config.burn_in_steps = 10_000;
    let chain = rwm_run(target.as_ref(), &config)?;

    let mu = DiagonalGaussian::standard(d);
    let c_tilde = 1.1 * estimate_regen_constant(&chain.samples, target.as_ref(), &mu)?;
    let partial = rate_quantiles(&chain.samples, |x| partial_rate(target.as_ref(), x).map_or(f64::NAN, |b| b.kappa_tilde))?;
    let full = rate_quantiles(&chain.samples, |x| {
        full_rate(target.as_ref(), &mu, c_tilde, x, f64::INFINITY).unwrap_or(f64::NAN)
    })?;
    println!("C̃ = {c_tilde:.4e} from {} samples", chain.samples.len());
    println!("{:>8} {:>12} {:>14}", "p", "κ̃", "κ");
    for ((p, a), (_, b)) in partial.rows.iter().zip(&full.rows) {
        println!("{p:>8} {a:>12.3} {b:>14.4e}");
    }
    println!("{:>8} {:>12.3} {:>14.4e}", "mean", partial.mean, full.mean);
    Ok(())
}
