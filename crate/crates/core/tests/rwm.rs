mod common;

use common::within_se;
use nalgebra::DMatrix;
use restore_kit::estimators::batch_means_se;
use restore_kit::prelude::*;
use restore_kit::rwm::{rwm_run, tune_scale, RwmConfig, ACCEPTANCE_BAND};

#[test]
fn tuned_scale_lands_in_band() {
    let target = StdGaussian::new(3);
    let scale = tune_scale(&target, None, 1).unwrap();
    let out = rwm_run(&target, &RwmConfig::new(scale, 50_000, 2)).unwrap();
    let (lo, hi) = ACCEPTANCE_BAND;
    assert!(out.acceptance_rate > lo - 0.03 && out.acceptance_rate < hi + 0.03, "{}", out.acceptance_rate);
    assert_eq!(tune_scale(&target, None, 1).unwrap(), scale);
}

#[test]
fn correlated_gaussian_moments() {
    let target = Gaussian::new(
        vec![1.0, -2.0],
        DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0]),
    )
    .unwrap();
    let scale = tune_scale(&target, Some(vec![1.0, -2.0]), 3).unwrap();
    let mut config = RwmConfig::new(scale, 400_000, 4);
    config.burn_in_steps = 2000;
    config.init = Some(vec![1.0, -2.0]);
    let out = rwm_run(&target, &config).unwrap();
    for (j, truth) in [1.0, -2.0].into_iter().enumerate() {
        let col: Vec<f64> = out.samples.iter().map(|x| x[j]).collect();
        let m = col.iter().sum::<f64>() / col.len() as f64;
        assert!(within_se(m, truth, batch_means_se(&col, |v| v), 4.0), "coordinate {j}: {m}");
    }
    let cross: Vec<f64> = out.samples.iter().map(|x| (x[0] - 1.0) * (x[1] + 2.0)).collect();
    let c = cross.iter().sum::<f64>() / cross.len() as f64;
    assert!(within_se(c, 0.8, batch_means_se(&cross, |v| v), 4.0), "{c}");
}

#[test]
fn thinning_and_burn_in_control_output_length() {
    let target = StdGaussian::new(1);
    let mut config = RwmConfig::new(2.0, 1000, 5);
    config.thin = 10;
    config.burn_in_steps = 200;
    let out = rwm_run(&target, &config).unwrap();
    assert_eq!(out.samples.len(), 80);
    let mut buf = Vec::new();
    out.write_csv(&mut buf, 10, 200).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,tour,x1"));
    assert!(lines.next().unwrap().starts_with("210,0,"));
    assert_eq!(text.lines().count(), 81);
}

#[test]
fn rwm_rejects_bad_input() {
    let target = StdGaussian::new(2);
    assert!(rwm_run(&target, &RwmConfig::new(0.0, 10, 1)).is_err());
    let mut c = RwmConfig::new(1.0, 10, 1);
    c.thin = 0;
    assert!(rwm_run(&target, &c).is_err());
    let mut c = RwmConfig::new(1.0, 10, 1);
    c.init = Some(vec![0.0]);
    assert!(matches!(rwm_run(&target, &c), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn rwm_is_deterministic() {
    let target = GaussianMixture2::bimodal();
    let a = rwm_run(&target, &RwmConfig::new(1.5, 5000, 8)).unwrap();
    let b = rwm_run(&target, &RwmConfig::new(1.5, 5000, 8)).unwrap();
    assert_eq!(a, b);
}
