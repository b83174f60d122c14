//! Mixing laws for the scale mixture: density/mass evaluation, random
//! generation and parameter validation.
//!
//! All continuous families are parameterized so their mode sits at w = 1,
//! which makes the reference beta distribution the "typical" component and a
//! single tail parameter θ > 0 control how far the mixture departs from it.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Gamma as GammaDist, InverseGaussian, StandardNormal};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// The mixing-law families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixingKind {
    Degenerate,
    TwoPoint,
    Gamma,
    LogNormal,
    InverseGaussian,
}

impl MixingKind {
    /// Short model label as used in reports ("B", "TPB", "GB", "LNB", "IGB").
    pub fn label(self) -> &'static str {
        match self {
            MixingKind::Degenerate => "B",
            MixingKind::TwoPoint => "TPB",
            MixingKind::Gamma => "GB",
            MixingKind::LogNormal => "LNB",
            MixingKind::InverseGaussian => "IGB",
        }
    }

    /// CLI-facing family name ("beta", "tpb", "gb", "lnb", "igb").
    pub fn cli_name(self) -> &'static str {
        match self {
            MixingKind::Degenerate => "beta",
            MixingKind::TwoPoint => "tpb",
            MixingKind::Gamma => "gb",
            MixingKind::LogNormal => "lnb",
            MixingKind::InverseGaussian => "igb",
        }
    }

    pub fn all() -> [MixingKind; 5] {
        [
            MixingKind::Degenerate,
            MixingKind::TwoPoint,
            MixingKind::Gamma,
            MixingKind::LogNormal,
            MixingKind::InverseGaussian,
        ]
    }
}

impl std::str::FromStr for MixingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "beta" | "b" => Ok(MixingKind::Degenerate),
            "tpb" => Ok(MixingKind::TwoPoint),
            "gb" => Ok(MixingKind::Gamma),
            "lnb" => Ok(MixingKind::LogNormal),
            "igb" => Ok(MixingKind::InverseGaussian),
            other => Err(Error::Domain(format!(
                "unknown family '{other}' (expected beta|tpb|gb|lnb|igb)"
            ))),
        }
    }
}

impl std::fmt::Display for MixingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A fully specified mixing law h(w; θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MixingSpec {
    /// Point mass at w = 1; recovers the plain beta distribution.
    Degenerate,
    /// W = 1 with probability θ₁, W = 1/θ₂ with probability 1−θ₁.
    /// θ₁ ∈ (0,1) is the proportion of points from the reference component,
    /// θ₂ > 1 the variance inflation of the contaminant.
    TwoPoint { theta1: f64, theta2: f64 },
    /// Mode-1 gamma: shape 1/θ + 1, scale θ.
    Gamma { theta: f64 },
    /// Mode-1 log-normal: log-mean θ, log-variance θ.
    LogNormal { theta: f64 },
    /// Mode-1 inverse Gaussian: mean √(3θ+1), shape (3θ+1)/θ.
    InverseGaussian { theta: f64 },
}

impl MixingSpec {
    pub fn two_point(theta1: f64, theta2: f64) -> Result<Self> {
        let spec = MixingSpec::TwoPoint { theta1, theta2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gamma(theta: f64) -> Result<Self> {
        let spec = MixingSpec::Gamma { theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn log_normal(theta: f64) -> Result<Self> {
        let spec = MixingSpec::LogNormal { theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn inverse_gaussian(theta: f64) -> Result<Self> {
        let spec = MixingSpec::InverseGaussian { theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> MixingKind {
        match self {
            MixingSpec::Degenerate => MixingKind::Degenerate,
            MixingSpec::TwoPoint { .. } => MixingKind::TwoPoint,
            MixingSpec::Gamma { .. } => MixingKind::Gamma,
            MixingSpec::LogNormal { .. } => MixingKind::LogNormal,
            MixingSpec::InverseGaussian { .. } => MixingKind::InverseGaussian,
        }
    }

    /// Number of mixing parameters (0, 1 or 2).
    pub fn param_count(&self) -> usize {
        match self {
            MixingSpec::Degenerate => 0,
            MixingSpec::TwoPoint { .. } => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MixingSpec::Degenerate => Ok(()),
            MixingSpec::TwoPoint { theta1, theta2 } => {
                if !(theta1 > 0.0 && theta1 < 1.0) || !theta1.is_finite() {
                    Err(Error::Domain(format!("two-point theta1 must lie in (0,1), got {theta1}")))
                } else if !(theta2 > 1.0) || !theta2.is_finite() {
                    Err(Error::Domain(format!("two-point theta2 must exceed 1, got {theta2}")))
                } else {
                    Ok(())
                }
            }
            MixingSpec::Gamma { theta }
            | MixingSpec::LogNormal { theta }
            | MixingSpec::InverseGaussian { theta } => {
                if !(theta > 0.0) || !theta.is_finite() {
                    Err(Error::Domain(format!(
                        "{:?} theta must be strictly positive, got {theta}",
                        self.kind()
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Density (continuous kinds) or mass (discrete kinds) of the mixing law at
/// w > 0.
pub fn mixing_density(spec: &MixingSpec, w: f64) -> Result<f64> {
    spec.validate()?;
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("mixing density requires w > 0, got {w}")));
    }
    Ok(match *spec {
        MixingSpec::Degenerate => {
            if w == 1.0 {
                1.0
            } else {
                0.0
            }
        }
        MixingSpec::TwoPoint { theta1, theta2 } => {
            if w == 1.0 {
                theta1
            } else if w == 1.0 / theta2 {
                1.0 - theta1
            } else {
                0.0
            }
        }
        MixingSpec::Gamma { theta } => {
            // w^{1/θ} e^{−w/θ} / (θ^{1/θ+1} Γ(1/θ+1))
            let a = 1.0 / theta;
            let ln_h = a * w.ln() - w / theta - (a + 1.0) * theta.ln() - ln_gamma(a + 1.0);
            safe_exp(ln_h)
        }
        MixingSpec::LogNormal { theta } => {
            // (w √(2πθ))^{-1} exp(−(ln w − θ)² / (2θ))
            let ln_h = -w.ln()
                - 0.5 * (2.0 * std::f64::consts::PI * theta).ln()
                - (w.ln() - theta).powi(2) / (2.0 * theta);
            safe_exp(ln_h)
        }
        MixingSpec::InverseGaussian { theta } => {
            // √((3θ+1)/(2πθw³)) exp(−(w − √(3θ+1))² / (2θw))
            let m2 = 3.0 * theta + 1.0;
            let ln_h = 0.5 * (m2.ln() - (2.0 * std::f64::consts::PI * theta).ln() - 3.0 * w.ln())
                - (w - m2.sqrt()).powi(2) / (2.0 * theta * w);
            safe_exp(ln_h)
        }
    })
}

fn safe_exp(ln_v: f64) -> f64 {
    if ln_v < -745.0 {
        0.0
    } else {
        ln_v.exp()
    }
}

/// Draw `n` mixing values. Identical seed states produce identical output.
pub fn sample_mixing<R: Rng + ?Sized>(spec: &MixingSpec, rng: &mut R, n: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(n);
    match *spec {
        MixingSpec::Degenerate => out.resize(n, 1.0),
        MixingSpec::TwoPoint { theta1, theta2 } => {
            for _ in 0..n {
                let u: f64 = rng.random();
                out.push(if u < theta1 { 1.0 } else { 1.0 / theta2 });
            }
        }
        MixingSpec::Gamma { theta } => {
            let dist = GammaDist::new(1.0 / theta + 1.0, theta)
                .map_err(|e| Error::Domain(format!("gamma sampler: {e}")))?;
            for _ in 0..n {
                out.push(dist.sample(rng));
            }
        }
        MixingSpec::LogNormal { theta } => {
            let s = theta.sqrt();
            for _ in 0..n {
                let z: f64 = StandardNormal.sample(rng);
                out.push((theta + s * z).exp());
            }
        }
        MixingSpec::InverseGaussian { theta } => {
            let m2 = 3.0 * theta + 1.0;
            let dist = InverseGaussian::new(m2.sqrt(), m2 / theta)
                .map_err(|e| Error::Domain(format!("inverse-Gaussian sampler: {e}")))?;
            for _ in 0..n {
                out.push(dist.sample(rng));
            }
        }
    }
    Ok(out)
}
