//! Minimal Restore for `N(0, 1)`: regenerate from `μ* ∝ (1 - x²) e^{-x²/2}` on
//! `[-1, 1]` at rate `κ⁺`, and compare the draws with the quadrature moments of `μ*`.
//!
//! ```text
//! cargo run --release --example minimal_demo
//! ```

use restore_kit::estimators::mu_star_moments_1d;
use restore_kit::prelude::*;

fn main() -> restore_kit::Result<()> {
    let oracle = mu_star_moments_1d(&StdGaussian::new(1), (-5.0, 5.0), 1e-12)?;
    let run = simulate_minimal_gaussian_demo(10.0, Horizon::Tours(5000), 3)?;
    let dest: Vec<f64> = run.tours.iter().map(|t| t.start_state[0]).collect();
    let m2 = dest.iter().map(|x| x * x).sum::<f64>() / dest.len() as f64;
    let widest = dest.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    println!("support of μ*: {:?}", oracle.support);
    println!("{} regenerations, max |x| = {widest:.4}", dest.len());
    println!("E[x²] under μ*: draws {m2:.4}, quadrature {:.4}", oracle.m2);
    println!("E[x²] under π from outputs: {:.4}", ergodic_average(&run, |x| x[0] * x[0])?);
    Ok(())
}
