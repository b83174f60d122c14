//! The mean-parameterized beta distribution and the compound beta
//! scale-mixture (BSM) built from it.
//!
//! A BSM density is the expectation of beta densities whose variability is
//! scaled by a positive mixing variable W:
//!
//! f(y; μ, φ, θ) = E_W[ f_B(y; μ, φ/W) ]
//!
//! evaluated here by the family-matched quadrature rules of [`crate::quad`].
//! The two-point mixture has an exact two-atom rule, so its density is the
//! closed-form contaminated-beta mixture with a reference component f_B(μ, φ)
//! and a variance-inflated component f_B(μ, θ₂φ).

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution};

use crate::error::{Error, Result};
use crate::mixing::{sample_mixing, MixingSpec};
use crate::quad::{cached_rule, expect_mixing};
use crate::special::ln_beta;

/// Largest representable response strictly inside (0,1).
pub(crate) const Y_MAX: f64 = 1.0 - f64::EPSILON / 2.0;
pub(crate) const Y_MIN: f64 = 1e-300;

/// Mean/variability parameters of the beta distribution: classical shapes
/// are α = μ/φ, β = (1−μ)/φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    mu: f64,
    phi: f64,
}

impl BetaParams {
    pub fn new(mu: f64, phi: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) || !mu.is_finite() {
            return Err(Error::Domain(format!("mu must lie in (0,1), got {mu}")));
        }
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::Domain(format!("phi must be strictly positive, got {phi}")));
        }
        Ok(Self { mu, phi })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Classical shape parameters (α, β) = (μ/φ, (1−μ)/φ).
pub fn to_classical(p: &BetaParams) -> (f64, f64) {
    (p.mu / p.phi, (1.0 - p.mu) / p.phi)
}

/// Inverse of [`to_classical`]: μ = α/(α+β), φ = 1/(α+β).
pub fn from_classical(alpha: f64, beta: f64) -> Result<BetaParams> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!("shapes must be positive, got ({alpha}, {beta})")));
    }
    BetaParams::new(alpha / (alpha + beta), 1.0 / (alpha + beta))
}

/// Log-density of the beta distribution at y ∈ (0,1):
/// (μ/φ−1)·ln y + ((1−μ)/φ−1)·ln(1−y) − ln B(μ/φ, (1−μ)/φ).
pub fn beta_log_pdf(y: f64, p: &BetaParams) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("beta_log_pdf requires y in (0,1), got {y}")));
    }
    let (alpha, beta) = to_classical(p);
    Ok(beta_log_pdf_parts(y.ln(), (-y).ln_1p(), alpha, beta)?)
}

/// Same density with precomputed ln y and ln(1−y); the shared path for the
/// mixture and likelihood code.
pub(crate) fn beta_log_pdf_parts(ln_y: f64, ln_1my: f64, alpha: f64, beta: f64) -> Result<f64> {
    Ok((alpha - 1.0) * ln_y + (beta - 1.0) * ln_1my - ln_beta(alpha, beta)?)
}

/// First four standardized moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Moments of the plain beta distribution in the (μ, φ) parameterization.
pub fn beta_moments(p: &BetaParams) -> MomentSummary {
    let (mu, phi) = (p.mu, p.phi);
    let variance = mu * (1.0 - mu) * phi / (1.0 + phi);
    let skewness = 2.0 * (1.0 - 2.0 * mu) * (1.0 + 1.0 / phi).sqrt()
        / ((2.0 + 1.0 / phi) * (mu * (1.0 - mu)).sqrt());
    let excess_kurtosis = 6.0 * phi * (1.0 + phi - mu * (1.0 - mu) * (5.0 + 6.0 * phi))
        / (mu * (1.0 - mu) * (1.0 + 2.0 * phi) * (1.0 + 3.0 * phi));
    MomentSummary {
        mean: mu,
        variance,
        skewness,
        excess_kurtosis,
    }
}

/// A fully specified BSM distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BsmParams {
    base: BetaParams,
    mixing: MixingSpec,
    quadrature_nodes: usize,
}

pub const DEFAULT_QUADRATURE_NODES: usize = 64;

impl BsmParams {
    pub fn new(base: BetaParams, mixing: MixingSpec) -> Result<Self> {
        Self::with_nodes(base, mixing, DEFAULT_QUADRATURE_NODES)
    }

    pub fn with_nodes(base: BetaParams, mixing: MixingSpec, quadrature_nodes: usize) -> Result<Self> {
        mixing.validate()?;
        if quadrature_nodes == 0 {
            return Err(Error::Domain("quadrature_nodes must be at least 1".into()));
        }
        Ok(Self {
            base,
            mixing,
            quadrature_nodes,
        })
    }

    pub fn base(&self) -> &BetaParams {
        &self.base
    }

    pub fn mixing(&self) -> &MixingSpec {
        &self.mixing
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }
}

/// Log-density of the BSM distribution at y ∈ (0,1), via a max-shifted
/// log-sum-exp over the quadrature atoms.
pub fn bsm_log_pdf(y: f64, p: &BsmParams) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(format!("bsm_log_pdf requires y in (0,1), got {y}")));
    }
    let rule = cached_rule(&p.mixing, p.quadrature_nodes)?;
    let (ln_y, ln_1my) = (y.ln(), (-y).ln_1p());
    let (mu, phi) = (p.base.mu, p.base.phi);
    // Streaming log-sum-exp: running max m with rescaled partial sum s.
    let mut m = f64::NEG_INFINITY;
    let mut s = 0.0;
    for (&w, &om) in rule.nodes().iter().zip(rule.weights()) {
        if om == 0.0 {
            continue;
        }
        let scaled = phi / w;
        let term = om.ln() + beta_log_pdf_parts(ln_y, ln_1my, mu / scaled, (1.0 - mu) / scaled)?;
        if term <= m {
            s += (term - m).exp();
        } else {
            s = s * (m - term).exp() + 1.0;
            m = term;
        }
    }
    Ok(m + s.ln())
}

/// Draw `n` BSM variates through the hierarchy: W from the mixing law, then
/// a beta draw with shapes (μW/φ, (1−μ)W/φ). Deterministic under a fixed
/// generator state.
pub fn bsm_sample<R: Rng + ?Sized>(p: &BsmParams, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    let ws = sample_mixing(&p.mixing, rng, n)?;
    let (mu, phi) = (p.base.mu, p.base.phi);
    let mut out = Vec::with_capacity(n);
    for w in ws {
        let dist = BetaDist::new(mu * w / phi, (1.0 - mu) * w / phi)
            .map_err(|e| Error::Domain(format!("beta sampler (w = {w}): {e}")))?;
        let y: f64 = dist.sample(rng);
        out.push(y.clamp(Y_MIN, Y_MAX));
    }
    Ok(out)
}

/// Moments of the BSM distribution from its first four raw moments,
/// E[Yᵏ] = E_W[ Π_{r<k} (μW + rφ)/(W + rφ) ].
pub fn bsm_moments(p: &BsmParams) -> Result<MomentSummary> {
    let rule = cached_rule(&p.mixing, p.quadrature_nodes)?;
    let (mu, phi) = (p.base.mu, p.base.phi);
    let raw = |k: usize| {
        expect_mixing(
            |w| {
                let mut v = 1.0;
                for r in 0..k {
                    let r = r as f64;
                    v *= (mu * w + r * phi) / (w + r * phi);
                }
                v
            },
            &rule,
        )
    };
    let m1 = raw(1)?;
    let m2 = raw(2)?;
    let m3 = raw(3)?;
    let m4 = raw(4)?;
    let c2 = m2 - m1 * m1;
    let c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
    let c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    Ok(MomentSummary {
        mean: m1,
        variance: c2,
        skewness: c3 / c2.powf(1.5),
        excess_kurtosis: c4 / (c2 * c2) - 3.0,
    })
}

/// Posterior probability that an observation y came from the reference beta
/// component of a two-point mixture:
/// θ₁ f_B(y; μ, φ) / [θ₁ f_B(y; μ, φ) + (1−θ₁) f_B(y; μ, θ₂φ)].
pub fn tpb_posterior_prob(y: f64, mu: f64, phi: f64, theta1: f64, theta2: f64) -> Result<f64> {
    MixingSpec::two_point(theta1, theta2)?;
    let reference = BetaParams::new(mu, phi)?;
    let contaminant = BetaParams::new(mu, theta2 * phi)?;
    let l1 = theta1.ln() + beta_log_pdf(y, &reference)?;
    let l2 = (1.0 - theta1).ln() + beta_log_pdf(y, &contaminant)?;
    // 1 / (1 + exp(l2 - l1)) without forming the mixture density.
    let d = l2 - l1;
    Ok(if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    })
}

/// Classification rule paired with [`tpb_posterior_prob`]: an observation is
/// attributed to the reference component when its probability exceeds ½.
pub fn tpb_is_reference(prob: f64) -> bool {
    prob > 0.5
}
