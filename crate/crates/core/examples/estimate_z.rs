//! Normalizing constant of `π̃(x) = e^{-x²/2}` from tour lengths: `Ẑ = C̃ T / n`.
//!
//! ```text
//! cargo run --release --example estimate_z
//! ```

use std::sync::Arc;

use restore_kit::prelude::*;

fn main() -> restore_kit::Result<()> {
    let c_tilde = (2.0 * std::f64::consts::PI).sqrt();
    for (label, scale) in [("e^{-x²/2}", 1.0), ("10 e^{-x²/2}", 10.0)] {
        let target = ScaledTarget::new(Arc::new(StdGaussian::new(1)), scale)?;
        let config = RestoreConfig::new(
            Arc::new(DiagonalGaussian::isotropic(1, 0.0, 2.0)?),
            RateMode::Full { c_tilde: scale * c_tilde },
            200.0,
            OutputSchedule::Poisson { rate: 1.0 },
            Horizon::Tours(20_000),
            2,
        );
        let run = simulate_standard(&config, &target)?;
        let z = estimate_normalizing_constant(&run, scale * c_tilde)?;
        println!("{label:>14}: Ẑ = {z:.4}  (exact {:.4})", scale * c_tilde);
    }
    Ok(())
}
