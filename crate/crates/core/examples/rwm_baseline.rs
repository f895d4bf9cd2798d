//! Random Walk Metropolis with automatic scale tuning on the Gaussian mixture.
//!
//! ```text
//! cargo run --release --example rwm_baseline
//! ```

use restore_kit::prelude::*;
use restore_kit::rwm::{rwm_run, tune_scale, RwmConfig};

fn main() -> restore_kit::Result<()> {
    let target = GaussianMixture2::bimodal();
    let scale = tune_scale(&target, None, 1)?;
    let mut config = RwmConfig::new(scale, 1_000_000, 2);
    config.thin = 10;
    config.burn_in_steps = 10_000;
    let out = rwm_run(&target, &config)?;
    let report = moment_report(out.samples.iter().map(|v| v.as_slice()))?;
    println!("scale {scale:.3}, acceptance {:.3}", out.acceptance_rate);
    println!("mean {:.4?} (exact {:?})", report.means, target.mean());
    println!("batch-means s.e. {:.4?}", report.std_errors.unwrap_or_default());
    Ok(())
}
