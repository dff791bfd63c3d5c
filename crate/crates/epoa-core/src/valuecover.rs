//! Value covering: the baseline welfare factor ρ(μ) = μ/(1−e^{−μ}), the
//! data-refined λ^{μ,1} computed from the observed curves, and the
//! concentration-based bound for curves whose cheapest per-unit price is at
//! least a (1−1/k) fraction of the most expensive one.

use crate::error::{Error, Result};
use crate::interim::InterimCurves;
use crate::numeric::golden_max;
use crate::thresholds::ThresholdCurve;

/// μ/(1−e^{−μ}), the price-of-anarchy factor implied by μ-revenue covering
/// alone. Below 1e-8 the ratio is evaluated by its series limit 1 + μ/2.
pub fn rho(mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::NonPositiveMu(mu));
    }
    if mu < 1e-8 {
        return Ok(1.0 + mu / 2.0);
    }
    Ok(mu / (-f64::exp_m1(-mu)))
}

/// Data-refined value-covering parameter λ^{μ,1}:
/// min over allocated bidders and candidate values v of
/// max over grid bids b of [μ(v·x̂(b) − p̂(b)) + T̂(x̄)] / v.
/// The b = 0 grid point keeps the inner max non-negative, so the result is
/// finite and positive whenever some bidder pays for allocation.
pub fn lambda_mu1(
    curves: &InterimCurves,
    thresholds: &[Option<ThresholdCurve>],
    mu: f64,
    value_grid: &[f64],
) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::NonPositiveMu(mu));
    }
    if thresholds.iter().all(|t| t.is_none()) {
        return Err(Error::EmptyBidderSet);
    }
    let mut lambda = f64::INFINITY;
    for (i, tc) in thresholds.iter().enumerate() {
        let Some(tc) = tc else { continue };
        let t_top = tc.total();
        let alloc = curves.alloc(i);
        let pay = curves.pay(i);
        for &v in value_grid {
            if !(v > 0.0) {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for g in 0..alloc.len() {
                let util = v * alloc[g] - pay[g];
                if util > best {
                    best = util;
                }
            }
            let candidate = (mu * best + t_top) / v;
            if candidate < lambda {
                lambda = candidate;
            }
        }
    }
    if !lambda.is_finite() {
        return Err(Error::EmptyBidderSet);
    }
    Ok(lambda)
}

/// The crude concentration bound: λ = 1 − 1/k (valid for μ >= 1).
pub fn concentration_lambda_crude(k: f64) -> f64 {
    1.0 - 1.0 / k
}

/// Price-of-anarchy bound when the price-per-unit allocation rule is
/// concentrated: every positive allocation costs at least a (1−1/k)
/// fraction of the price of the maximum allocation.
///
/// Evaluates the worst case over bidder values v > 1 of
/// v / (v−1 + (1/μ)(1 + (v−1)·ln((v−1)/(v−(1−1/k))))) — the ratio of value
/// to covered utility for the extremal allocation rule — by a coarse scan
/// plus golden-section refinement in log(v−1), then floors at 1 (a welfare
/// ratio below 1 is meaningless).
pub fn lambda_concentration(mu: f64, k: f64) -> Result<f64> {
    if !(k >= 1.0) || !(mu > 0.0) {
        return Err(Error::Domain { mu, k });
    }
    let f = |u: f64| -> f64 {
        // u = v - 1 > 0.
        let v = 1.0 + u;
        let log_term = (u / (v - (1.0 - 1.0 / k))).ln();
        v / (u + (1.0 + u * log_term) / mu)
    };
    // The objective has a single hump between the v→1 limit (= μ) and the
    // v→∞ limit (= 1), but its peak location spans many decades in v−1,
    // so bracket it on a log grid first.
    let (lo, hi) = (1e-9f64.ln(), 1e6f64.ln());
    let scan = 400usize;
    let mut best_idx = 0usize;
    let mut best = f64::NEG_INFINITY;
    for s in 0..=scan {
        let e = lo + (hi - lo) * s as f64 / scan as f64;
        let val = f(e.exp());
        if val > best {
            best = val;
            best_idx = s;
        }
    }
    let a = lo + (hi - lo) * best_idx.saturating_sub(1) as f64 / scan as f64;
    let b = lo + (hi - lo) * (best_idx + 1).min(scan) as f64 / scan as f64;
    let (_, peak) = golden_max(|e| f(e.exp()), a, b, 1e-6);
    Ok(peak.max(best).max(1.0))
}

/// Value-covering quantities for a report.
#[derive(Debug, Clone)]
pub struct ValueCoverResult {
    pub rho_mu1: f64,
    pub lambda1: f64,
    /// μ¹/λ¹.
    pub epoa1: f64,
    /// Concentration-table bound at the configured k, if requested.
    pub lambda_conc: Option<f64>,
    /// ρ(μ_avg): the fixed-allocation benchmark bound, no λ refinement.
    pub fa_epoa: f64,
}

pub fn evaluate(
    curves: &InterimCurves,
    thresholds: &[Option<ThresholdCurve>],
    mu1: f64,
    mu_avg: f64,
    value_grid: &[f64],
    conc_k: Option<f64>,
) -> Result<ValueCoverResult> {
    let rho_mu1 = rho(mu1)?;
    let lambda1 = lambda_mu1(curves, thresholds, mu1, value_grid)?;
    let epoa1 = mu1 / lambda1;
    let lambda_conc = match conc_k {
        Some(k) => Some(lambda_concentration(mu1, k)?),
        None => None,
    };
    let fa_epoa = if mu_avg > 0.0 { rho(mu_avg)? } else { 1.0 };
    Ok(ValueCoverResult {
        rho_mu1,
        lambda1,
        epoa1,
        lambda_conc,
        fa_epoa,
    })
}
