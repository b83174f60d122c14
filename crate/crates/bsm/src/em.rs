//! EM estimation for the two-point (contaminated-beta) regression model.
//!
//! The observed data are treated as incomplete: a latent indicator says
//! whether each observation came from the reference beta component or the
//! variance-inflated one. The E-step computes the posterior responsibilities,
//! the M-step splits into a closed-form update for θ₁ (the mean
//! responsibility) and a numerical maximization of the weighted two-component
//! log-likelihood Q₂ over (β, φ, θ₂), warm-started at the previous iterate.

use crate::error::{Error, Result};
use crate::mixing::{MixingKind, MixingSpec};
use crate::optim::{minimize, MinimizeOptions};
use crate::regression::{
    build_fit_result, fit_mle, link_inverse, log_likelihood, Dataset, FitOptions, FitResult,
    RegressionModel, WorkingMap,
};
use crate::special::ln_gamma;

const THETA1_CLIP: f64 = 1e-8;

/// Iteration history of an EM run.
#[derive(Debug, Clone)]
pub struct EmTrace {
    /// Observed-data log-likelihood after each iteration (starting point
    /// first); non-decreasing up to 1e-10 slack.
    pub loglik_path: Vec<f64>,
    /// Final responsibilities z_i ∈ [0,1] (reference-component posterior).
    pub responsibilities: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Options for [`em_fit`].
#[derive(Debug, Clone)]
pub struct EmOptions {
    pub max_iters: usize,
    /// Relative change of the observed log-likelihood that stops the loop.
    pub rel_tol: f64,
    /// Inner Q₂ maximization settings.
    pub inner: MinimizeOptions,
    /// Options for the beta-regression fit that initializes (β, φ).
    pub init: FitOptions,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            rel_tol: 1e-8,
            inner: MinimizeOptions {
                tol: 1e-6,
                ..MinimizeOptions::default()
            },
            init: FitOptions::default(),
        }
    }
}

fn two_point_parts(model: &RegressionModel) -> Result<(f64, f64)> {
    match model.mixing {
        MixingSpec::TwoPoint { theta1, theta2 } => Ok((theta1, theta2)),
        _ => Err(Error::Domain(format!(
            "EM requires a two-point model, got {:?}",
            model.mixing.kind()
        ))),
    }
}

/// Posterior responsibilities z_i that each observation came from the
/// reference component, computed by log-domain differencing.
pub fn e_step(model: &RegressionModel, data: &Dataset) -> Result<Vec<f64>> {
    let (theta1, theta2) = two_point_parts(model)?;
    let phi = model.phi;
    let mut z = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let mu = model.mu_at(data, i);
        let l1 = theta1.ln() + beta_term(data, i, mu, phi);
        let l2 = (1.0 - theta1).ln() + beta_term(data, i, mu, theta2 * phi);
        let d = l2 - l1;
        let zi = if d > 0.0 {
            let e = (-d).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + d.exp())
        };
        z.push(zi);
    }
    Ok(z)
}

fn beta_term(data: &Dataset, i: usize, mu: f64, phi: f64) -> f64 {
    let (a, b) = (mu / phi, (1.0 - mu) / phi);
    (a - 1.0) * data.response()[i].ln()
        + (b - 1.0) * (-data.response()[i]).ln_1p()
        - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// Closed-form θ₁ update: the mean responsibility, clipped away from the
/// degenerate boundaries.
pub fn m_step_theta1(z: &[f64]) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::Data("empty responsibility vector".into()));
    }
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    Ok(mean.clamp(THETA1_CLIP, 1.0 - THETA1_CLIP))
}

/// Maximize Q₂(β, φ, θ₂) = Σᵢ zᵢ ln f_B(yᵢ; μᵢ, φ) + (1−zᵢ) ln f_B(yᵢ; μᵢ, θ₂φ)
/// on the working scale (β, ln φ, ln(θ₂−1)), warm-started at `warm`.
pub fn m_step_q2(
    z: &[f64],
    data: &Dataset,
    warm: &RegressionModel,
    inner: &MinimizeOptions,
) -> Result<RegressionModel> {
    maximize_q2(z, data, warm, None, inner)
}

/// Q₂ evaluated at arbitrary parameters (test oracle hook).
pub(crate) fn q2_value(
    z: &[f64],
    data: &Dataset,
    beta: &[f64],
    phi: f64,
    theta2: f64,
) -> f64 {
    let mut total = 0.0;
    for i in 0..data.len() {
        let mut eta = 0.0;
        for j in 0..data.design().ncols() {
            eta += data.design()[(i, j)] * beta[j];
        }
        let mu = link_inverse(eta);
        total += z[i] * beta_term(data, i, mu, phi)
            + (1.0 - z[i]) * beta_term(data, i, mu, theta2 * phi);
    }
    total
}

/// Inner maximization with an optional fixed θ₂ (used by tests to pin the
/// two components together).
pub(crate) fn maximize_q2(
    z: &[f64],
    data: &Dataset,
    warm: &RegressionModel,
    fixed_theta2: Option<f64>,
    inner: &MinimizeOptions,
) -> Result<RegressionModel> {
    let (_, warm_theta2) = two_point_parts(warm)?;
    if z.len() != data.len() {
        return Err(Error::Data(format!(
            "{} responsibilities for {} observations",
            z.len(),
            data.len()
        )));
    }
    let p = data.design().ncols();
    let mut start: Vec<f64> = warm.coefficients.clone();
    start.push(warm.phi.ln());
    if fixed_theta2.is_none() {
        start.push((warm_theta2 - 1.0).ln());
    }

    let objective = |w: &[f64]| {
        let beta = &w[..p];
        let phi = w[p].exp();
        let theta2 = fixed_theta2.unwrap_or_else(|| 1.0 + w[p + 1].exp());
        if !phi.is_finite() || !theta2.is_finite() {
            return f64::NAN;
        }
        -q2_value(z, data, beta, phi, theta2)
    };
    let res = minimize(&objective, &start, inner).map_err(|e| {
        Error::Optim(format!("Q2 maximization failed from warm start: {e}"))
    })?;
    let w = &res.argmin;
    let theta2 = fixed_theta2.unwrap_or_else(|| 1.0 + w[p + 1].exp());
    let (warm_theta1, _) = two_point_parts(warm)?;
    RegressionModel::new(
        w[..p].to_vec(),
        w[p].exp(),
        MixingSpec::TwoPoint {
            theta1: warm_theta1,
            theta2: theta2.max(1.0 + 1e-12),
        },
    )
}

/// Fit the two-point regression by EM.
///
/// Initialization takes (β, φ) from a beta-regression fit and starts the
/// mixture near the clean-data corner (θ₁ = 0.95, θ₂ = 2). The loop stops
/// when the relative change of the observed log-likelihood drops below
/// `rel_tol` or `max_iters` is reached. A decrease of the observed
/// log-likelihood beyond 1e-10 is a bug signal and aborts with an error.
pub fn em_fit(data: &Dataset, options: &EmOptions) -> Result<(FitResult, EmTrace)> {
    let init = fit_mle(data, MixingKind::Degenerate, &options.init)?;
    let beta0: Vec<f64> = init.working_estimates[..data.design().ncols()].to_vec();
    let phi0 = init.working_estimates[data.design().ncols()].exp();
    let mut model = RegressionModel::new(
        beta0,
        phi0,
        MixingSpec::TwoPoint {
            theta1: 0.95,
            theta2: 2.0,
        },
    )?;

    // Two-point rules are exact two-atom sums, so any node count works.
    let observed = |m: &RegressionModel| log_likelihood(m, data, 2);
    let mut ll = observed(&model)?;
    let mut path = vec![ll];
    let mut converged = false;
    let mut iterations = 0;
    let mut z = e_step(&model, data)?;

    while iterations < options.max_iters {
        iterations += 1;
        z = e_step(&model, data)?;
        let theta1 = m_step_theta1(&z)?;
        let (_, theta2) = two_point_parts(&model)?;
        model.mixing = MixingSpec::TwoPoint { theta1, theta2 };
        model = m_step_q2(&z, data, &model, &options.inner)?;

        let ll_new = observed(&model)?;
        if ll_new < ll - 1e-10 {
            return Err(Error::Optim(format!(
                "EM observed log-likelihood decreased from {ll} to {ll_new} at iteration {iterations}"
            )));
        }
        path.push(ll_new);
        let done = (ll_new - ll).abs() <= options.rel_tol * (1.0 + ll_new.abs());
        ll = ll_new;
        if done {
            converged = true;
            break;
        }
    }

    let map = WorkingMap::new(MixingKind::TwoPoint, data.design().ncols());
    let working = map.working_from(&model);
    let start_working = {
        let start_model = RegressionModel::new(
            init.working_estimates[..data.design().ncols()].to_vec(),
            phi0,
            MixingSpec::TwoPoint {
                theta1: 0.95,
                theta2: 2.0,
            },
        )?;
        map.working_from(&start_model)
    };
    let fit = build_fit_result(
        data,
        map,
        working,
        ll,
        converged,
        iterations,
        &start_working,
        2,
    )?;
    let trace = EmTrace {
        loglik_path: path,
        responsibilities: z,
        iterations,
        converged,
    };
    Ok((fit, trace))
}
