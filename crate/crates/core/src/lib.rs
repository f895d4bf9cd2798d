//! Regeneration-enriched Brownian motion samplers.
//!
//! The crate provides the Standard Restore process ([`restore`]), the Adaptive
//! Restore process that learns its regeneration distribution online
//! ([`adaptive`]), and the supporting pieces: target densities with gradients
//! and Hessians ([`target`]), regeneration rates ([`rate`]), an affine Laplace
//! pre-transformation ([`transform`]), a Random Walk Metropolis baseline
//! ([`rwm`]) and estimators ([`estimators`]).
//!
//! ```
//! use std::sync::Arc;
//! use restore_kit::prelude::*;
//!
//! let target = StdGaussian::new(1);
//! let mu = Arc::new(DiagonalGaussian::isotropic(1, 0.0, 2.0).unwrap());
//! let c_tilde = (2.0 * std::f64::consts::PI).sqrt();
//! let config = RestoreConfig::new(
//!     mu,
//!     RateMode::Full { c_tilde },
//!     200.0,
//!     OutputSchedule::Poisson { rate: 100.0 },
//!     Horizon::Tours(200),
//!     7,
//! );
//! let run = simulate_standard(&config, &target).unwrap();
//! let z = estimate_normalizing_constant(&run, c_tilde).unwrap();
//! assert!(z > 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod rate;
pub mod regeneration;
pub mod restore;
pub mod rng;
pub mod run;
pub mod rwm;
pub mod special;
pub mod target;
pub mod transform;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::adaptive::{draw_regeneration, maybe_add_point, simulate_adaptive, AdaptiveConfig, AdaptiveRun, PointMassStore};
    pub use crate::error::{Error, Result};
    pub use crate::estimators::{euclidean_distance, moment_report, moment_report_flat, mu_star_moments_1d, rmse, MomentReport};
    pub use crate::rate::{
        estimate_regen_constant, full_rate, gaussian_truncation_level, partial_rate, rate_quantiles, RateBundle,
        QUANTILE_LEVELS,
    };
    pub use crate::regeneration::{DiagonalGaussian, MinimalGaussian1d, RegenerationDistribution};
    pub use crate::restore::{
        ergodic_average, estimate_normalizing_constant, simulate_minimal_gaussian_demo, simulate_standard,
        tour_clt_variance, Horizon, OutputSchedule, RateMode, RestoreConfig,
    };
    pub use crate::run::{RestoreRun, Tour};
    pub use crate::rwm::{rwm_run, tune_scale, RwmConfig, RwmOutput};
    pub use crate::target::*;
    pub use crate::transform::{laplace_approximate, transform_target, AffineMap, TransformedTarget};
}
