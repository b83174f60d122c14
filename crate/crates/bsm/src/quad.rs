//! Expectation quadrature over the mixing laws.
//!
//! Each continuous mixing family gets the classical Gaussian rule matched to
//! its weight function, so expectations of smooth integrands converge
//! super-algebraically:
//!
//! * gamma — generalized Gauss–Laguerre with parameter 1/θ, nodes scaled by θ;
//! * log-normal — Gauss–Hermite under w = exp(θ + √(2θ)·t);
//! * inverse Gaussian — Gauss–Legendre on (0,1) under w = v/(1−v) with the
//!   density folded into the weights and the weights renormalized;
//! * two-point and degenerate — their exact atoms.
//!
//! Nodes and weights come from the Golub–Welsch eigendecomposition of the
//! Jacobi matrix; the probability weights are the squared first components of
//! the orthonormal eigenvectors, which sum to 1 by orthogonality.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, RwLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mixing::MixingSpec;

/// Discrete approximation of a mixing law: positive nodes `w_j` with
/// probability weights `ω_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Build a rule from raw nodes and weights, enforcing the invariants:
    /// strictly positive strictly increasing nodes, non-negative weights
    /// summing to 1 within 1e-10.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::Domain(format!(
                "quadrature rule needs matching non-empty nodes/weights, got {}/{}",
                nodes.len(),
                weights.len()
            )));
        }
        for (j, &w) in nodes.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!("node {j} is not strictly positive: {w}")));
            }
            if j > 0 && w <= nodes[j - 1] {
                return Err(Error::Domain(format!(
                    "nodes must be strictly increasing, node {j} = {w} after {}",
                    nodes[j - 1]
                )));
            }
        }
        let mut sum = 0.0;
        for (j, &om) in weights.iter().enumerate() {
            if !(om >= 0.0) || !om.is_finite() {
                return Err(Error::Domain(format!("weight {j} is negative or non-finite: {om}")));
            }
            sum += om;
        }
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// E_h[g(W)] ≈ Σ_j ω_j g(w_j).
pub fn expect_mixing<F: Fn(f64) -> f64>(g: F, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (&w, &om) in rule.nodes.iter().zip(&rule.weights) {
        let v = g(w);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("integrand returned {v} at node w = {w}")));
        }
        acc += om * v;
    }
    Ok(acc)
}

/// Build the quadrature rule for a mixing law.
///
/// Discrete laws (degenerate, two-point) return their exact atoms regardless
/// of `node_count`; continuous laws return `node_count`-point Gaussian rules.
pub fn build_quadrature(spec: &MixingSpec, node_count: usize) -> Result<QuadratureRule> {
    spec.validate()?;
    if node_count == 0 {
        return Err(Error::Domain("node_count must be at least 1".into()));
    }
    match *spec {
        MixingSpec::Degenerate => QuadratureRule::new(vec![1.0], vec![1.0]),
        MixingSpec::TwoPoint { theta1, theta2 } => {
            QuadratureRule::new(vec![1.0 / theta2, 1.0], vec![1.0 - theta1, theta1])
        }
        MixingSpec::Gamma { theta } => {
            // W ~ Gamma(shape 1/θ + 1, scale θ): generalized Laguerre with
            // parameter α = 1/θ, nodes scaled by θ.
            let alpha = 1.0 / theta;
            if !alpha.is_finite() {
                return Err(Error::Domain(format!("gamma theta = {theta} underflows 1/theta")));
            }
            let (x, w) = golub_welsch(
                node_count,
                |k| 2.0 * k as f64 + alpha + 1.0,
                |k| ((k as f64) * (k as f64 + alpha)).sqrt(),
            );
            let nodes = x.iter().map(|&xi| theta * xi).collect();
            QuadratureRule::new(nodes, w)
        }
        MixingSpec::LogNormal { theta } => {
            // w = exp(θ + √(2θ)·t) with t Gauss–Hermite (weight e^{−t²}).
            let (t, w) = golub_welsch(node_count, |_| 0.0, |k| (k as f64 / 2.0).sqrt());
            let s = (2.0 * theta).sqrt();
            let nodes = t.iter().map(|&ti| (theta + s * ti).exp()).collect();
            QuadratureRule::new(nodes, w)
        }
        MixingSpec::InverseGaussian { theta } => {
            // Gauss–Legendre on (0,1) under w = v/(1−v); density folded into
            // the weights, then renormalized to keep probability semantics.
            let (x, w0) = golub_welsch(node_count, |_| 0.0, |k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            });
            let mut nodes = Vec::with_capacity(node_count);
            let mut weights = Vec::with_capacity(node_count);
            for (&xi, &wi) in x.iter().zip(&w0) {
                let v = 0.5 * (xi + 1.0);
                let one_m_v = 0.5 * (1.0 - xi);
                let wn = v / one_m_v;
                if !wn.is_finite() || wn <= 0.0 {
                    continue;
                }
                let ln_h = ln_ig_density(wn, theta);
                let ln_weight = ln_h - 2.0 * one_m_v.ln();
                if ln_weight > -700.0 {
                    nodes.push(wn);
                    weights.push(wi * ln_weight.exp());
                }
            }
            let total: f64 = weights.iter().sum();
            if !(total > 0.0) || !total.is_finite() {
                return Err(Error::NonFinite(format!(
                    "inverse-Gaussian rule collapsed for theta = {theta}"
                )));
            }
            for w in &mut weights {
                *w /= total;
            }
            QuadratureRule::new(nodes, weights)
        }
    }
}

/// Log-density of the mode-1 inverse Gaussian mixing law; kept here so the
/// rule builder does not depend on the mixing module's validation wrapper.
fn ln_ig_density(w: f64, theta: f64) -> f64 {
    let m2 = 3.0 * theta + 1.0;
    0.5 * (m2.ln() - (2.0 * std::f64::consts::PI * theta).ln() - 3.0 * w.ln())
        - (w - m2.sqrt()).powi(2) / (2.0 * theta * w)
}

/// Nodes and probability weights of an n-point rule from its symmetric Jacobi
/// matrix (diagonal `a_k`, off-diagonal `b_k`, k = 1..n−1).
fn golub_welsch<A, B>(n: usize, a: A, b: B) -> (Vec<f64>, Vec<f64>)
where
    A: Fn(usize) -> f64,
    B: Fn(usize) -> f64,
{
    let m = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            a(i)
        } else if i.abs_diff(j) == 1 {
            b(i.max(j))
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let nodes = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let weights = order
        .iter()
        .map(|&i| {
            let c = eig.eigenvectors[(0, i)];
            c * c
        })
        .collect();
    (nodes, weights)
}

type CacheKey = (u8, u64, u64, usize);

static RULE_CACHE: LazyLock<RwLock<HashMap<CacheKey, Arc<QuadratureRule>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

const CACHE_CAP: usize = 256;

fn cache_key(spec: &MixingSpec, node_count: usize) -> CacheKey {
    match *spec {
        MixingSpec::Degenerate => (0, 0, 0, node_count),
        MixingSpec::TwoPoint { theta1, theta2 } => (1, theta1.to_bits(), theta2.to_bits(), node_count),
        MixingSpec::Gamma { theta } => (2, theta.to_bits(), 0, node_count),
        MixingSpec::LogNormal { theta } => (3, theta.to_bits(), 0, node_count),
        MixingSpec::InverseGaussian { theta } => (4, theta.to_bits(), 0, node_count),
    }
}

/// Memoized [`build_quadrature`]: a pure cache keyed by (mixing, node count).
///
/// The cache is bounded; on overflow it is cleared, which only costs a
/// rebuild (fills are idempotent).
pub fn cached_rule(spec: &MixingSpec, node_count: usize) -> Result<Arc<QuadratureRule>> {
    let key = cache_key(spec, node_count);
    if let Some(rule) = RULE_CACHE.read().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_quadrature(spec, node_count)?);
    let mut cache = RULE_CACHE.write().expect("rule cache poisoned");
    if cache.len() >= CACHE_CAP {
        cache.clear();
    }
    cache.insert(key, Arc::clone(&rule));
    Ok(rule)
}
