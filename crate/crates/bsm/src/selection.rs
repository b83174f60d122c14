//! Information criteria and model ranking.

use crate::error::{Error, Result};

/// Akaike information criterion: 2k − 2ℓ.
pub fn aic(loglik: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

/// Bayesian information criterion: ln(n)·k − 2ℓ (natural logarithm).
pub fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    (n as f64).ln() * k as f64 - 2.0 * loglik
}

/// One ranked model.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub label: String,
    pub k: usize,
    pub loglik: f64,
    pub aic: f64,
    pub aic_rank: usize,
    pub bic: f64,
    pub bic_rank: usize,
    /// Set when another model shares this row's AIC or BIC value exactly;
    /// tied rows keep their input order.
    pub tied: bool,
}

/// Models ranked by both criteria (rank 1 = smallest value).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedTable {
    pub n_obs: usize,
    pub rows: Vec<RankedRow>,
}

impl RankedTable {
    pub fn rank_of(&self, label: &str) -> Option<(usize, usize)> {
        self.rows
            .iter()
            .find(|r| r.label == label)
            .map(|r| (r.aic_rank, r.bic_rank))
    }
}

/// Rank fitted models by AIC and BIC, recomputing both criteria from the raw
/// (log-likelihood, parameter count) pairs.
pub fn rank_models(fits: &[(String, f64, usize)], n: usize) -> Result<RankedTable> {
    if fits.is_empty() {
        return Err(Error::Data("no models to rank".into()));
    }
    for (i, (label, _, _)) in fits.iter().enumerate() {
        if fits[..i].iter().any(|(other, _, _)| other == label) {
            return Err(Error::Data(format!("duplicate model label '{label}'")));
        }
    }
    let mut rows: Vec<RankedRow> = fits
        .iter()
        .map(|(label, ll, k)| RankedRow {
            label: label.clone(),
            k: *k,
            loglik: *ll,
            aic: aic(*ll, *k),
            aic_rank: 0,
            bic: bic(*ll, *k, n),
            bic_rank: 0,
            tied: false,
        })
        .collect();

    let assign = |rows: &mut Vec<RankedRow>, value: fn(&RankedRow) -> f64, set: fn(&mut RankedRow, usize)| {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        // stable sort keeps input order on ties
        order.sort_by(|&i, &j| value(&rows[i]).total_cmp(&value(&rows[j])));
        for (rank0, &i) in order.iter().enumerate() {
            set(&mut rows[i], rank0 + 1);
        }
        for w in order.windows(2) {
            if value(&rows[w[0]]) == value(&rows[w[1]]) {
                rows[w[0]].tied = true;
                rows[w[1]].tied = true;
            }
        }
    };
    assign(&mut rows, |r| r.aic, |r, v| r.aic_rank = v);
    assign(&mut rows, |r| r.bic, |r, v| r.bic_rank = v);
    Ok(RankedTable { n_obs: n, rows })
}
