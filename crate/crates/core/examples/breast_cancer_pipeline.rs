//! Logistic-regression posterior on the shipped synthetic breast-cancer table:
//! Laplace transform, RWM pilot chain, rate quantiles, then Adaptive Restore with
//! `K̄⁺` read off the `κ̃` quantile table, compared against the RWM means.
//!
//! ```text
//! cargo run --release --example breast_cancer_pipeline -- 50000
//! ```

use std::sync::Arc;

use restore_kit::prelude::*;
use restore_kit::rwm::{rwm_run, tune_scale, RwmConfig};

fn main() -> restore_kit::Result<()> {
    let horizon: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2e4);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/breast_cancer_synthetic.csv");
    let data = load_logistic_dataset(path)?;
    let posterior: SharedTarget = Arc::new(logistic_posterior(&data, DEFAULT_PRIOR_VARIANCE)?);
    let d = posterior.dim();
    let map = laplace_approximate(posterior.as_ref(), &vec![0.0; d])?;
    let target = transform_target(posterior, map.clone())?;

    let scale = tune_scale(target.as_ref(), None, 6)?;
    let mut rc = RwmConfig::new(scale, 500_000, 6);
    rc.thin = 50;
    rc.burn_in_steps = 10_000;
    let chain = rwm_run(target.as_ref(), &rc)?;
    println!("RWM: scale {scale:.3}, acceptance {:.3}, {} samples", chain.acceptance_rate, chain.samples.len());

    let mu = DiagonalGaussian::standard(d);
    let c_tilde = 1.1 * estimate_regen_constant(&chain.samples, target.as_ref(), &mu)?;
    let partial = rate_quantiles(&chain.samples, |x| partial_rate(target.as_ref(), x).map_or(f64::NAN, |b| b.kappa_tilde))?;
    let full = rate_quantiles(&chain.samples, |x| {
        full_rate(target.as_ref(), &mu, c_tilde, x, f64::INFINITY).unwrap_or(f64::NAN)
    })?;
    println!("0.999-quantiles: κ̃ {:.2}, κ {:.3e}", partial.value_at(0.999).unwrap_or(f64::NAN), full.value_at(0.999).unwrap_or(f64::NAN));

    let mut ac = AdaptiveConfig::with_defaults(Arc::new(DiagonalGaussian::standard(d)), Horizon::Time(horizon), 5)?;
    ac.k_plus_bar = partial.value_at(0.9999).unwrap_or(ac.k_plus_bar);
    ac.n_bar = 5.2;
    ac.burn_in = 10.0 * horizon;
    let mut out = simulate_adaptive(&ac, target.as_ref())?;
    println!(
        "adaptive: K̄⁺ {:.2}, exceedance {:.1e}, {} store points",
        ac.k_plus_bar,
        out.run.truncation_exceedance_frac(),
        out.store.len()
    );
    out.run.map_states(|x| map.forward(x));
    let ad_mean = moment_report_flat(out.run.flat_states(), d)?.means;
    let rwm_orig: Vec<Vec<f64>> = chain.samples.iter().map(|x| map.forward(x)).collect();
    let rwm_mean = moment_report(rwm_orig.iter().map(|v| v.as_slice()))?.means;
    for (name, (a, r)) in data.names.iter().zip(ad_mean.iter().zip(&rwm_mean)) {
        println!("{name:>16}: adaptive {a:+.3}  rwm {r:+.3}");
    }
    println!("Euclidean distance {:.4}", euclidean_distance(&ad_mean, &rwm_mean)?);
    Ok(())
}
