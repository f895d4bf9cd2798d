//! Truncation levels `K̄` with `P[κ⁺(X) < K̄] = 1 - ε` for `X ~ N(0, I_d)`.
//!
//! ```text
//! cargo run --example truncation_guidance
//! ```

use restore_kit::prelude::*;

fn main() -> restore_kit::Result<()> {
    let eps = [1e-2, 1e-3, 1e-4];
    println!("{:>5} {:>10} {:>10} {:>10}", "d", "1e-2", "1e-3", "1e-4");
    for d in [1, 2, 5, 10, 25, 50, 100] {
        let row: Vec<f64> = eps.iter().map(|&e| gaussian_truncation_level(d, e)).collect::<Result<_>>()?;
        println!("{d:>5} {:>10.3} {:>10.3} {:>10.3}", row[0], row[1], row[2]);
    }
    Ok(())
}
