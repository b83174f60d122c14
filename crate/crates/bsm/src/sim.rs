//! Seeded Monte-Carlo sensitivity harness: generate beta-regression data,
//! replace a fraction of responses with uniform noise, refit the requested
//! families and report bias/MSE of the estimates.
//!
//! Replicates are embarrassingly parallel; each owns a generator stream
//! derived from (seed, replicate index) and aggregation runs in replicate
//! order, so a config maps to exactly one report.

use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta as BetaDist, Distribution, StandardNormal};
use rayon::prelude::*;

use crate::em::{em_fit, EmOptions};
use crate::error::{Error, Result};
use crate::mixing::MixingKind;
use crate::regression::{fit_mle, link_inverse, Dataset, FitOptions};

/// Design of one sensitivity scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub replicates: usize,
    pub n: usize,
    pub beta0: f64,
    pub beta1: f64,
    /// Variability of the generating beta regression. Not part of the
    /// published scenario description; defaults to 0.25.
    pub phi_true: f64,
    /// Fraction of responses replaced by uniform(0,1) draws; the replaced
    /// count is round(rate·n), half away from zero.
    pub contamination_rate: f64,
    pub families: Vec<MixingKind>,
    pub seed: u64,
    /// Fit the two-point family by EM instead of direct maximization.
    pub tpb_via_em: bool,
    /// Quadrature nodes used by the continuous-mixture fits.
    pub nodes: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            replicates: 500,
            n: 500,
            beta0: 0.5,
            beta1: 1.0,
            phi_true: 0.25,
            contamination_rate: 0.0,
            families: MixingKind::all().to_vec(),
            seed: 0,
            tpb_via_em: false,
            nodes: crate::dist::DEFAULT_QUADRATURE_NODES,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 || self.n == 0 {
            return Err(Error::Data("replicates and n must be positive".into()));
        }
        if !(self.contamination_rate >= 0.0 && self.contamination_rate < 1.0) {
            return Err(Error::Data(format!(
                "contamination rate must lie in [0,1), got {}",
                self.contamination_rate
            )));
        }
        if !(self.phi_true > 0.0) || !self.phi_true.is_finite() {
            return Err(Error::Data(format!("phi_true must be positive, got {}", self.phi_true)));
        }
        if self.families.is_empty() {
            return Err(Error::Data("no families requested".into()));
        }
        if self.nodes == 0 {
            return Err(Error::Data("nodes must be positive".into()));
        }
        Ok(())
    }

    /// Number of responses replaced per replicate.
    pub fn replaced_count(&self) -> usize {
        (self.contamination_rate * self.n as f64).round() as usize
    }
}

/// Bias and MSE of one parameter under one fitted family.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCell {
    pub family: MixingKind,
    pub parameter: String,
    pub bias: f64,
    pub mse: f64,
}

/// Aggregated sensitivity results.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub config: ScenarioConfig,
    pub cells: Vec<SimCell>,
    /// (family, converged replicates, attempted replicates)
    pub convergence: Vec<(MixingKind, usize, usize)>,
    /// Families whose every replicate failed.
    pub failed_families: Vec<MixingKind>,
    pub elapsed: Duration,
}

impl SimReport {
    pub fn cell(&self, family: MixingKind, parameter: &str) -> Option<&SimCell> {
        self.cells
            .iter()
            .find(|c| c.family == family && c.parameter == parameter)
    }
}

/// Generate the dataset for one replicate together with the indices of the
/// contaminated rows. Fully determined by (config.seed, replicate_index).
pub fn generate_scenario(
    config: &ScenarioConfig,
    replicate_index: usize,
) -> Result<(Dataset, Vec<usize>)> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(replicate_index as u64 + 1);

    let n = config.n;
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        let v: f64 = StandardNormal.sample(&mut rng);
        x.push(v);
    }
    let mut y = Vec::with_capacity(n);
    for &xi in &x {
        let mu = link_inverse(config.beta0 + config.beta1 * xi);
        let d = BetaDist::new(mu / config.phi_true, (1.0 - mu) / config.phi_true)
            .map_err(|e| Error::Domain(format!("beta sampler: {e}")))?;
        let v: f64 = d.sample(&mut rng);
        y.push(v.clamp(crate::dist::Y_MIN, crate::dist::Y_MAX));
    }

    // Partial Fisher–Yates draw of round(rate·n) indices without replacement.
    let m = config.replaced_count();
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    let mut mask: Vec<usize> = idx[..m].to_vec();
    mask.sort_unstable();
    for &i in &mask {
        let u: f64 = rng.random();
        y[i] = u.clamp(crate::dist::Y_MIN, crate::dist::Y_MAX);
    }

    let data = Dataset::new(y, vec![x], vec!["x".into()])?;
    Ok((data, mask))
}

/// One replicate's estimates (β₀, β₁, φ) per family, None when the fit did
/// not converge.
fn fit_replicate(
    config: &ScenarioConfig,
    data: &Dataset,
) -> Vec<(MixingKind, Option<[f64; 3]>)> {
    config
        .families
        .iter()
        .map(|&family| {
            let opts = FitOptions {
                nodes: config.nodes,
                ..FitOptions::default()
            };
            let fit = if family == MixingKind::TwoPoint && config.tpb_via_em {
                em_fit(
                    data,
                    &EmOptions {
                        init: opts,
                        ..EmOptions::default()
                    },
                )
                .map(|(fit, _)| fit)
            } else {
                fit_mle(data, family, &opts)
            };
            let est = match fit {
                Ok(f) if f.converged => Some([
                    f.estimate("beta0").unwrap_or(f64::NAN),
                    f.estimate("beta1").unwrap_or(f64::NAN),
                    f.estimate("phi").unwrap_or(f64::NAN),
                ]),
                _ => None,
            };
            (family, est)
        })
        .collect()
}

/// Run the full sensitivity study: per replicate, generate data, fit every
/// requested family, and accumulate bias and MSE of (β₀, β₁, φ) over the
/// converged fits. Non-converged fits are counted and excluded.
pub fn run_sensitivity(config: &ScenarioConfig) -> Result<SimReport> {
    config.validate()?;
    let start = Instant::now();
    let per_replicate: Vec<Vec<(MixingKind, Option<[f64; 3]>)>> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let (data, _) = generate_scenario(config, rep)?;
            Ok(fit_replicate(config, &data))
        })
        .collect::<Result<_>>()?;

    let truth = [config.beta0, config.beta1, config.phi_true];
    let names = ["beta0", "beta1", "phi"];
    let mut cells = Vec::new();
    let mut convergence = Vec::new();
    let mut failed = Vec::new();
    for (fi, &family) in config.families.iter().enumerate() {
        let estimates: Vec<[f64; 3]> = per_replicate
            .iter()
            .filter_map(|row| row[fi].1)
            .collect();
        convergence.push((family, estimates.len(), config.replicates));
        if estimates.is_empty() {
            failed.push(family);
            continue;
        }
        for (p, name) in names.iter().enumerate() {
            let errs: Vec<f64> = estimates.iter().map(|e| e[p] - truth[p]).collect();
            let bias = errs.iter().sum::<f64>() / errs.len() as f64;
            let mse = errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64;
            cells.push(SimCell {
                family,
                parameter: name.to_string(),
                bias,
                mse,
            });
        }
    }
    Ok(SimReport {
        config: config.clone(),
        cells,
        convergence,
        failed_families: failed,
        elapsed: start.elapsed(),
    })
}
