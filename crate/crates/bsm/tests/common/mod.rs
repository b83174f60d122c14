//! Shared helpers for the integration suites: a tanh-sinh oracle integrator,
//! synthetic data generators and a minimal CSV reader for the optional
//! dataset-gated checks.

use bsm::{link_inverse, Dataset};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta as BetaDist, Distribution, Normal};

/// Integrate exp(log_f(y)) over (0, 1/2] with tanh-sinh quadrature.
///
/// Endpoint singularities are handled by evaluating nodes as distances from
/// zero and combining the log-density with the log-Jacobian before
/// exponentiating, so integrable spikes near the boundary neither overflow
/// nor vanish.
pub fn tanh_sinh_half(log_f: &dyn Fn(f64) -> f64) -> f64 {
    const T_MAX: f64 = 6.8;
    let node_sum = |ts: &mut dyn Iterator<Item = f64>| -> f64 {
        let mut s = 0.0;
        for t in ts {
            let g = 0.5 * std::f64::consts::PI * t.sinh();
            // y = ¼(1 + tanh g) ∈ (0, ½), computed from the small side
            let y = if g >= 0.0 {
                0.5 / (1.0 + (-2.0 * g).exp())
            } else {
                let e = (2.0 * g).exp();
                0.5 * e / (1.0 + e)
            };
            if y <= 0.0 || y >= 0.5 {
                continue;
            }
            let ln_cosh_g = g.abs() + (-2.0 * g.abs()).exp().ln_1p() - std::f64::consts::LN_2;
            let ln_dy = (0.125 * std::f64::consts::PI * t.cosh()).ln() - 2.0 * ln_cosh_g;
            let le = log_f(y) + ln_dy;
            if le > -745.0 {
                s += le.exp();
            }
        }
        s
    };

    let mut h = 0.5;
    let steps = (2.0 * T_MAX / h) as usize;
    let mut total = h * node_sum(&mut (0..=steps).map(|i| -T_MAX + i as f64 * h));
    for level in 0..12 {
        h /= 2.0;
        let steps = (T_MAX / h) as usize;
        let mid = h * node_sum(&mut (0..steps).map(|i| -T_MAX + (2 * i + 1) as f64 * h));
        let refined = total / 2.0 + mid;
        if level >= 2 && (refined - total).abs() < 0.5e-6 * refined.abs().max(1.0) {
            return refined;
        }
        total = refined;
    }
    total
}

/// ∫₀¹ exp(log_f(y)) dy, splitting at ½ and integrating the upper half as the
/// mirrored density `log_f_mirror(u) = log_f(1 − u)` supplied by the caller
/// in a boundary-accurate form.
pub fn integrate_unit_density(
    log_f: &dyn Fn(f64) -> f64,
    log_f_mirror: &dyn Fn(f64) -> f64,
) -> f64 {
    tanh_sinh_half(log_f) + tanh_sinh_half(log_f_mirror)
}

/// Beta-regression data with a standard-normal covariate.
pub fn beta_regression_data(seed: u64, n: usize, beta0: f64, beta1: f64, phi: f64) -> Dataset {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let mu = link_inverse(beta0 + beta1 * xi);
            let d = BetaDist::new(mu / phi, (1.0 - mu) / phi).unwrap();
            let v: f64 = d.sample(&mut rng);
            v.clamp(1e-12, 1.0 - 1e-12)
        })
        .collect();
    Dataset::new(y, vec![x], vec!["x".into()]).unwrap()
}

/// Two-point-mixture regression data: reference variability `phi`, inflated
/// variability `theta2·phi` with probability 1−θ₁.
pub fn tpb_regression_data(
    seed: u64,
    n: usize,
    beta0: f64,
    beta1: f64,
    phi: f64,
    theta1: f64,
    theta2: f64,
) -> Dataset {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let mu = link_inverse(beta0 + beta1 * xi);
            let scale = if rng.random::<f64>() < theta1 {
                phi
            } else {
                theta2 * phi
            };
            let d = BetaDist::new(mu / scale, (1.0 - mu) / scale).unwrap();
            let v: f64 = d.sample(&mut rng);
            v.clamp(1e-12, 1.0 - 1e-12)
        })
        .collect();
    Dataset::new(y, vec![x], vec!["x".into()]).unwrap()
}

/// Read named columns from a simple comma-separated file with a header row.
/// Returns one column per requested name.
#[allow(dead_code)]
pub fn read_csv_columns(path: &std::path::Path, names: &[&str]) -> Result<Vec<Vec<f64>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or("empty file")?
        .split(',')
        .map(|h| h.trim().trim_matches('"').to_string())
        .collect();
    let idx: Vec<usize> = names
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| format!("column '{name}' not found in {header:?}"))
        })
        .collect::<Result<_, _>>()?;
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        for (slot, &j) in idx.iter().enumerate() {
            let raw = fields
                .get(j)
                .ok_or_else(|| format!("row {}: missing field {j}", row + 2))?
                .trim()
                .trim_matches('"');
            let v: f64 = raw
                .parse()
                .map_err(|_| format!("row {}: '{raw}' is not numeric", row + 2))?;
            cols[slot].push(v);
        }
    }
    Ok(cols)
}

/// Directory searched for the optional user-exported datasets.
#[allow(dead_code)]
pub fn data_dir() -> std::path::PathBuf {
    if let Ok(dir) = std::env::var("BSM_DATA_DIR") {
        return dir.into();
    }
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}
