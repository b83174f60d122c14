//! Logit-link mean regression over any BSM family: likelihood evaluation,
//! direct maximum-likelihood fitting on an unconstrained working scale, and
//! delta-method standard errors.
//!
//! Working scale: coefficients are unconstrained; φ = exp(ψ); scalar tail
//! weights θ = exp(τ); the two-point parameters use θ₁ = logistic(a) and
//! θ₂ = 1 + exp(b) so the inflation constraint θ₂ > 1 holds by construction.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::mixing::{MixingKind, MixingSpec};
use crate::optim::{minimize, numeric_hessian, MinimizeOptions};
use crate::quad::build_quadrature;
use crate::selection;
use crate::special::ln_gamma;

/// Validated regression data: responses strictly inside (0,1) and a design
/// matrix with a leading intercept column of ones and full column rank.
#[derive(Debug, Clone)]
pub struct Dataset {
    response: Vec<f64>,
    design: DMatrix<f64>,
    covariate_names: Vec<String>,
    ln_y: Vec<f64>,
    ln_1my: Vec<f64>,
}

impl Dataset {
    /// Assemble a dataset from the response and covariate columns; the
    /// intercept column is prepended automatically.
    pub fn new(response: Vec<f64>, covariates: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::Data("empty response".into()));
        }
        if covariates.len() != names.len() {
            return Err(Error::Data(format!(
                "{} covariate columns but {} names",
                covariates.len(),
                names.len()
            )));
        }
        for (j, col) in covariates.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Data(format!(
                    "covariate '{}' has {} rows, response has {n}",
                    names[j],
                    col.len()
                )));
            }
        }
        for (i, &y) in response.iter().enumerate() {
            if !(y > 0.0 && y < 1.0) || !y.is_finite() {
                return Err(Error::Data(format!(
                    "response at row {i} is {y}, outside the open interval (0,1)"
                )));
            }
        }
        let k = covariates.len();
        let design = DMatrix::from_fn(n, k + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                covariates[j - 1][i]
            }
        });
        if !design.iter().all(|v| v.is_finite()) {
            return Err(Error::Data("design matrix contains non-finite values".into()));
        }
        // Full column rank via singular values.
        let svd = design.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-10 * smax) {
            return Err(Error::Data(
                "design matrix is rank deficient (collinear covariates?)".into(),
            ));
        }
        let ln_y = response.iter().map(|&y| y.ln()).collect();
        let ln_1my = response.iter().map(|&y| (-y).ln_1p()).collect();
        Ok(Self {
            response,
            design,
            covariate_names: names,
            ln_y,
            ln_1my,
        })
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    /// Number of covariates (excluding the intercept).
    pub fn covariate_count(&self) -> usize {
        self.design.ncols() - 1
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    fn linear_predictor(&self, beta: &[f64], i: usize) -> f64 {
        let mut eta = 0.0;
        for j in 0..self.design.ncols() {
            eta += self.design[(i, j)] * beta[j];
        }
        eta
    }
}

/// A BSM regression model: logit-linked mean, shared variability φ and a
/// mixing law.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionModel {
    pub coefficients: Vec<f64>,
    pub phi: f64,
    pub mixing: MixingSpec,
}

impl RegressionModel {
    pub fn new(coefficients: Vec<f64>, phi: f64, mixing: MixingSpec) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Domain("empty coefficient vector".into()));
        }
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::Domain(format!("phi must be strictly positive, got {phi}")));
        }
        mixing.validate()?;
        Ok(Self {
            coefficients,
            phi,
            mixing,
        })
    }

    pub fn family(&self) -> MixingKind {
        self.mixing.kind()
    }

    /// Conditional mean μ(x; β) for row `i` of the dataset.
    pub fn mu_at(&self, data: &Dataset, i: usize) -> f64 {
        link_inverse(data.linear_predictor(&self.coefficients, i))
    }
}

/// Logit link: η = ln(μ/(1−μ)).
pub fn link(mu: f64) -> f64 {
    (mu / (1.0 - mu)).ln()
}

/// Inverse logit e^η/(1+e^η), saturation-safe: the result always lies
/// strictly inside (0,1).
pub fn link_inverse(eta: f64) -> f64 {
    let p = if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Observed-data log-likelihood Σᵢ ln f_BSM(yᵢ; μ(xᵢ; β), φ, θ) with the
/// mixture evaluated on a `nodes`-point quadrature rule.
pub fn log_likelihood(model: &RegressionModel, data: &Dataset, nodes: usize) -> Result<f64> {
    if model.coefficients.len() != data.design.ncols() {
        return Err(Error::Data(format!(
            "{} coefficients for a design with {} columns",
            model.coefficients.len(),
            data.design.ncols()
        )));
    }
    let rule = build_quadrature(&model.mixing, nodes)?;
    let phi = model.phi;
    // Per-node constants: c_j = w_j/φ, ln ω_j and lnΓ(c_j); the per-
    // observation beta normalizer splits as lnΓ(μc)+lnΓ((1−μ)c)−lnΓ(c).
    let m = rule.len();
    let mut c = Vec::with_capacity(m);
    let mut ln_om = Vec::with_capacity(m);
    let mut ln_gamma_c = Vec::with_capacity(m);
    for (&w, &om) in rule.nodes().iter().zip(rule.weights()) {
        if om == 0.0 {
            continue;
        }
        let cj = w / phi;
        c.push(cj);
        ln_om.push(om.ln());
        ln_gamma_c.push(ln_gamma(cj));
    }
    // Neumaier-compensated sum keeps the total bit-stable and accurate to a
    // few ulps, which the EM ascent checks rely on.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in 0..data.len() {
        let mu = link_inverse(data.linear_predictor(&model.coefficients, i));
        let (ly, l1y) = (data.ln_y[i], data.ln_1my[i]);
        let mut lse_max = f64::NEG_INFINITY;
        let mut lse_sum = 0.0;
        for j in 0..c.len() {
            let a = mu * c[j];
            let b = (1.0 - mu) * c[j];
            let term =
                ln_om[j] + (a - 1.0) * ly + (b - 1.0) * l1y - ln_gamma(a) - ln_gamma(b)
                    + ln_gamma_c[j];
            if term.is_nan() {
                return Err(Error::NonFinite(format!(
                    "log-likelihood term is NaN at row {i}, node {j}"
                )));
            }
            if term <= lse_max {
                lse_sum += (term - lse_max).exp();
            } else {
                lse_sum = lse_sum * (lse_max - term).exp() + 1.0;
                lse_max = term;
            }
        }
        let li = lse_max + lse_sum.ln();
        let t = sum + li;
        comp += if sum.abs() >= li.abs() {
            (sum - t) + li
        } else {
            (li - t) + sum
        };
        sum = t;
    }
    Ok(sum + comp)
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub family: MixingKind,
    /// Natural-scale estimates in report order: beta0..betak, phi, theta....
    pub natural_estimates: Vec<(String, f64)>,
    pub working_estimates: Vec<f64>,
    /// Delta-method standard errors on the natural scale, when the observed
    /// information was positive definite.
    pub standard_errors: Option<Vec<(String, f64)>>,
    /// Diagnostic when standard errors are unavailable.
    pub se_message: Option<String>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Natural-scale starting point that produced this fit.
    pub start_used: Vec<(String, f64)>,
    pub n_obs: usize,
    pub n_params: usize,
    pub nodes: usize,
}

impl FitResult {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.natural_estimates
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        self.standard_errors
            .as_ref()?
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    /// Rebuild the fitted model from the working-scale estimates.
    pub fn model(&self, data: &Dataset) -> Result<RegressionModel> {
        WorkingMap::new(self.family, data.design.ncols()).model(&self.working_estimates)
    }
}

/// Options for [`fit_mle`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub nodes: usize,
    pub minimize: MinimizeOptions,
    /// Extra jittered restarts when the first optimization fails to converge.
    pub multi_start: usize,
    /// Seed for the restart jitter.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            nodes: crate::dist::DEFAULT_QUADRATURE_NODES,
            minimize: MinimizeOptions::default(),
            multi_start: 5,
            seed: 0,
        }
    }
}

/// Mapping between the unconstrained working scale and natural parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WorkingMap {
    kind: MixingKind,
    n_coef: usize,
}

impl WorkingMap {
    pub(crate) fn new(kind: MixingKind, n_coef: usize) -> Self {
        Self { kind, n_coef }
    }

    pub(crate) fn dim(&self) -> usize {
        self.n_coef
            + 1
            + match self.kind {
                MixingKind::Degenerate => 0,
                MixingKind::TwoPoint => 2,
                _ => 1,
            }
    }

    pub(crate) fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.n_coef).map(|j| format!("beta{j}")).collect();
        names.push("phi".into());
        match self.kind {
            MixingKind::Degenerate => {}
            MixingKind::TwoPoint => {
                names.push("theta1".into());
                names.push("theta2".into());
            }
            _ => names.push("theta".into()),
        }
        names
    }

    pub(crate) fn model(&self, working: &[f64]) -> Result<RegressionModel> {
        if working.len() != self.dim() {
            return Err(Error::Domain(format!(
                "working vector has {} entries, expected {}",
                working.len(),
                self.dim()
            )));
        }
        let beta = working[..self.n_coef].to_vec();
        let phi = working[self.n_coef].exp();
        let mixing = match self.kind {
            MixingKind::Degenerate => MixingSpec::Degenerate,
            MixingKind::TwoPoint => MixingSpec::TwoPoint {
                theta1: link_inverse(working[self.n_coef + 1]),
                theta2: 1.0 + working[self.n_coef + 2].exp(),
            },
            MixingKind::Gamma => MixingSpec::Gamma {
                theta: working[self.n_coef + 1].exp(),
            },
            MixingKind::LogNormal => MixingSpec::LogNormal {
                theta: working[self.n_coef + 1].exp(),
            },
            MixingKind::InverseGaussian => MixingSpec::InverseGaussian {
                theta: working[self.n_coef + 1].exp(),
            },
        };
        RegressionModel::new(beta, phi, mixing)
    }

    pub(crate) fn working_from(&self, model: &RegressionModel) -> Vec<f64> {
        let mut w = model.coefficients.clone();
        w.push(model.phi.ln());
        match model.mixing {
            MixingSpec::Degenerate => {}
            MixingSpec::TwoPoint { theta1, theta2 } => {
                w.push(link(theta1));
                w.push((theta2 - 1.0).ln());
            }
            MixingSpec::Gamma { theta }
            | MixingSpec::LogNormal { theta }
            | MixingSpec::InverseGaussian { theta } => w.push(theta.ln()),
        }
        w
    }

    pub(crate) fn natural(&self, working: &[f64]) -> Vec<(String, f64)> {
        let names = self.names();
        let mut vals: Vec<f64> = working[..self.n_coef].to_vec();
        vals.push(working[self.n_coef].exp());
        match self.kind {
            MixingKind::Degenerate => {}
            MixingKind::TwoPoint => {
                vals.push(link_inverse(working[self.n_coef + 1]));
                vals.push(1.0 + working[self.n_coef + 2].exp());
            }
            _ => vals.push(working[self.n_coef + 1].exp()),
        }
        names.into_iter().zip(vals).collect()
    }

    /// d(natural)/d(working), diagonal by construction.
    pub(crate) fn jacobian_diag(&self, working: &[f64]) -> Vec<f64> {
        let mut j = vec![1.0; self.n_coef];
        j.push(working[self.n_coef].exp());
        match self.kind {
            MixingKind::Degenerate => {}
            MixingKind::TwoPoint => {
                let t1 = link_inverse(working[self.n_coef + 1]);
                j.push(t1 * (1.0 - t1));
                j.push(working[self.n_coef + 2].exp());
            }
            _ => j.push(working[self.n_coef + 1].exp()),
        }
        j
    }
}

/// Least-squares coefficients of logit(y) on the design; the standard
/// starting point for the mean structure.
fn ols_logit_start(data: &Dataset) -> Result<Vec<f64>> {
    let z = DVector::from_iterator(data.len(), data.response.iter().map(|&y| link(y)));
    let svd = data.design.clone().svd(true, true);
    let beta = svd
        .solve(&z, 1e-12)
        .map_err(|e| Error::Data(format!("least-squares start failed: {e}")))?;
    Ok(beta.iter().copied().collect())
}

fn initial_model(data: &Dataset, family: MixingKind) -> Result<RegressionModel> {
    let beta = ols_logit_start(data)?;
    // Match the beta-distribution variance μ(1−μ)φ/(1+φ) to the residual
    // variance pooled across observations.
    let n = data.len();
    let mut ss = 0.0;
    let mut pool = 0.0;
    for i in 0..n {
        let mu = link_inverse(data.linear_predictor(&beta, i));
        ss += (data.response[i] - mu).powi(2);
        pool += mu * (1.0 - mu);
    }
    let dof = (n.saturating_sub(data.design.ncols())).max(1) as f64;
    let v = ((ss / dof) / (pool / n as f64)).clamp(1e-6, 1.0 - 1e-6);
    let phi = (v / (1.0 - v)).clamp(1e-3, 1e3);
    let mixing = match family {
        MixingKind::Degenerate => MixingSpec::Degenerate,
        MixingKind::TwoPoint => MixingSpec::TwoPoint {
            theta1: 0.95,
            theta2: 2.0,
        },
        MixingKind::Gamma => MixingSpec::Gamma { theta: 0.1 },
        MixingKind::LogNormal => MixingSpec::LogNormal { theta: 0.1 },
        MixingKind::InverseGaussian => MixingSpec::InverseGaussian { theta: 0.1 },
    };
    RegressionModel::new(beta, phi, mixing)
}

/// Fit a BSM regression by direct likelihood maximization on the working
/// scale. Non-convergence is reported, not hidden: the best point found is
/// returned with `converged = false`.
pub fn fit_mle(data: &Dataset, family: MixingKind, options: &FitOptions) -> Result<FitResult> {
    let map = WorkingMap::new(family, data.design.ncols());
    if data.len() <= map.dim() {
        return Err(Error::Data(format!(
            "{} observations cannot identify {} parameters",
            data.len(),
            map.dim()
        )));
    }
    let start_model = initial_model(data, family)?;
    let start = map.working_from(&start_model);

    let objective = |w: &[f64]| match map.model(w) {
        Ok(model) => match log_likelihood(&model, data, options.nodes) {
            Ok(ll) => -ll,
            Err(_) => f64::NAN,
        },
        Err(_) => f64::NAN,
    };

    let mut best = minimize(&objective, &start, &options.minimize)?;
    let mut start_used = start.clone();
    if !best.converged {
        let mut rng = ChaCha12Rng::seed_from_u64(options.seed);
        let noise = Normal::new(0.0, 0.25).unwrap();
        for _ in 0..options.multi_start {
            let jittered: Vec<f64> = start
                .iter()
                .map(|&w| w + noise.sample(&mut rng) * (1.0 + w.abs()))
                .collect();
            if !objective(&jittered).is_finite() {
                continue;
            }
            let trial = minimize(&objective, &jittered, &options.minimize)?;
            if trial.value < best.value {
                best = trial;
                start_used = jittered;
            }
            if best.converged {
                break;
            }
        }
    }

    build_fit_result(data, map, best.argmin, -best.value, best.converged, best.iterations, &start_used, options.nodes)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_fit_result(
    data: &Dataset,
    map: WorkingMap,
    working: Vec<f64>,
    loglik: f64,
    converged: bool,
    iterations: usize,
    start_used: &[f64],
    nodes: usize,
) -> Result<FitResult> {
    let k = map.dim();
    let n = data.len();
    let mut fit = FitResult {
        family: map.kind,
        natural_estimates: map.natural(&working),
        working_estimates: working,
        standard_errors: None,
        se_message: None,
        loglik,
        aic: selection::aic(loglik, k),
        bic: selection::bic(loglik, k, n),
        converged,
        iterations,
        start_used: map.natural(start_used),
        n_obs: n,
        n_params: k,
        nodes,
    };
    match standard_errors(&fit, data) {
        Ok(se) => fit.standard_errors = Some(se),
        Err(e) => fit.se_message = Some(e.to_string()),
    }
    Ok(fit)
}

/// Observed-information standard errors on the natural scale: invert the
/// finite-difference Hessian of the negative log-likelihood at the working
/// optimum, then map by the (diagonal) reparameterization Jacobian.
pub fn standard_errors(fit: &FitResult, data: &Dataset) -> Result<Vec<(String, f64)>> {
    if !fit.converged {
        return Err(Error::Optim(
            "standard errors need a converged fit".into(),
        ));
    }
    let map = WorkingMap::new(fit.family, data.design.ncols());
    let nodes = fit.nodes;
    let objective = |w: &[f64]| match map.model(w) {
        Ok(model) => match log_likelihood(&model, data, nodes) {
            Ok(ll) => -ll,
            Err(_) => f64::NAN,
        },
        Err(_) => f64::NAN,
    };
    let hessian = numeric_hessian(objective, &fit.working_estimates)?;
    let chol = nalgebra::Cholesky::new(hessian).ok_or_else(|| {
        Error::Optim("observed information is not positive definite; standard errors unavailable".into())
    })?;
    let cov = chol.inverse();
    let jac = map.jacobian_diag(&fit.working_estimates);
    let names = map.names();
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(i, name)| (name, jac[i] * cov[(i, i)].sqrt()))
        .collect())
}
