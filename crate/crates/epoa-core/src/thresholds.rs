//! Threshold machinery: the inverse price-per-unit curve τ̂_i (the cheapest
//! per-unit price achieving allocation at least z, over grid bids), its
//! integral T̂_i, and the maximum marginal allocation x̄_i.
//!
//! τ̂ is a non-decreasing step function by construction (the feasible set
//! shrinks as z grows), so T̂ is piecewise linear, convex, and exact to
//! integrate.

pub use crate::interim::max_allocation;

use crate::dataset::AuctionDataset;
use crate::error::{Error, Result};
use crate::interim::InterimCurves;

/// Step function τ̂ plus its exact integral. `steps[k] = (z_k, tau_k)` means
/// τ̂ = tau_k on (z_{k-1}, z_k], with z_0 = 0 implied; allocations increase
/// and taus are non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub bidder: usize,
    steps: Vec<(f64, f64)>,
}

impl ThresholdCurve {
    pub(crate) fn from_steps(bidder: usize, steps: Vec<(f64, f64)>) -> Self {
        debug_assert!(steps.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        Self { bidder, steps }
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    /// Largest allocation the curve reaches (z_K). Equals the dataset's
    /// x̄_i within 1e-9 in joint mode once the bid-cap check has passed.
    pub fn max_alloc(&self) -> f64 {
        self.steps.last().map(|s| s.0).unwrap_or(0.0)
    }

    /// τ̂(z); z at or below 0 reports the cheapest level, z beyond the top
    /// reports the most expensive one.
    pub fn tau_at(&self, z: f64) -> f64 {
        for &(zk, tau) in &self.steps {
            if z <= zk {
                return tau;
            }
        }
        self.steps.last().map(|s| s.1).unwrap_or(0.0)
    }

    /// T̂(x), exact integral of the step function. Inputs up to 1e-9 above
    /// the top allocation are clamped; anything beyond is an error.
    pub fn integral(&self, x: f64) -> Result<f64> {
        let max = self.max_alloc();
        if x > max + 1e-9 {
            return Err(Error::OutOfRange { x, max });
        }
        Ok(self.integral_clamped(x))
    }

    /// T̂(min(x, z_K)); used where the caller's allocation is only known to
    /// be feasible up to rounding (e.g. mean-quality slot allocations).
    pub fn integral_clamped(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.max_alloc());
        let mut acc = 0.0;
        let mut lo = 0.0;
        for &(zk, tau) in &self.steps {
            if x <= zk {
                acc += tau * (x - lo);
                return acc;
            }
            acc += tau * (zk - lo);
            lo = zk;
        }
        acc
    }

    /// Total threshold at the top allocation, T̂(z_K).
    pub fn total(&self) -> f64 {
        self.integral_clamped(self.max_alloc())
    }

    /// Slope of the linearized threshold through the origin,
    /// v' = T̂(z_K)/z_K. This upper-bounds T̂(x)/x for every x by convexity.
    pub fn linear_slope(&self) -> f64 {
        let max = self.max_alloc();
        if max > 0.0 {
            self.total() / max
        } else {
            0.0
        }
    }
}

/// Build τ̂ for one bidder as the lower monotone envelope over the finitely
/// many achieved allocation levels: τ̂(z) = min{ p̂(b)/x̂(b) : x̂(b) >= z }.
pub fn tau(curves: &InterimCurves, bidder: usize) -> Result<ThresholdCurve> {
    // (allocation, ppc) at every grid point with positive allocation.
    let mut levels: Vec<(f64, f64)> = curves
        .alloc(bidder)
        .iter()
        .zip(curves.pay(bidder))
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &p)| (x, p / x))
        .collect();
    if levels.is_empty() {
        return Err(Error::NeverAllocated(format!("#{bidder}")));
    }
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    // Collapse duplicate allocations to their cheapest ppc.
    let mut distinct: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
    for (x, ppc) in levels {
        match distinct.last_mut() {
            Some(last) if last.0 == x => last.1 = last.1.min(ppc),
            _ => distinct.push((x, ppc)),
        }
    }
    // Suffix minimum from the largest allocation down: a cheaper bid that
    // achieves more allocation caps the threshold below it.
    for k in (0..distinct.len().saturating_sub(1)).rev() {
        distinct[k].1 = distinct[k].1.min(distinct[k + 1].1);
    }
    // Merge adjacent steps at the same price.
    let mut steps: Vec<(f64, f64)> = Vec::with_capacity(distinct.len());
    for (z, tau) in distinct {
        match steps.last_mut() {
            Some(last) if last.1 == tau => last.0 = z,
            _ => steps.push((z, tau)),
        }
    }
    Ok(ThresholdCurve::from_steps(bidder, steps))
}

/// Thresholds for every bidder; never-allocated bidders come back as None
/// together with their ids so reports can surface the exclusion.
pub fn all_thresholds(
    ds: &AuctionDataset,
    curves: &InterimCurves,
) -> (Vec<Option<ThresholdCurve>>, Vec<String>) {
    let mut out = Vec::with_capacity(ds.n_bidders());
    let mut excluded = Vec::new();
    for i in 0..ds.n_bidders() {
        match tau(curves, i) {
            Ok(tc) => out.push(Some(tc)),
            Err(_) => {
                excluded.push(ds.bidder_ids[i].clone());
                out.push(None);
            }
        }
    }
    (out, excluded)
}

/// T̂_i(x) as a standalone operation.
pub fn threshold_integral(tc: &ThresholdCurve, x: f64) -> Result<f64> {
    tc.integral(x)
}

/// Export threshold curves as CSV rows `bidder_id,alloc,T,marker`, with one
/// row per step breakpoint and extra rows marking the expected allocation
/// per slot (alpha_j * mean quality) as in the usual threshold-curve plots.
pub fn write_thresholds_csv<W: std::io::Write>(
    ds: &AuctionDataset,
    thresholds: &[Option<ThresholdCurve>],
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["bidder_id", "alloc", "T", "marker"])
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let max_slots = ds.max_slots();
    for (i, tc) in thresholds.iter().enumerate() {
        let Some(tc) = tc else { continue };
        let id = &ds.bidder_ids[i];
        let mut write = |alloc: f64, t: f64, marker: &str| -> Result<()> {
            wtr.write_record([id.as_str(), &format!("{alloc}"), &format!("{t}"), marker])
                .map_err(|e| Error::Io(std::io::Error::other(e)))
        };
        write(0.0, 0.0, "")?;
        for &(z, _) in tc.steps() {
            write(z, tc.integral_clamped(z), "")?;
        }
        let mean_quality =
            crate::numeric::mean_ordered(ds.records.iter().map(|r| r.context.qualities[i]));
        for j in 0..max_slots {
            let alpha_j = crate::numeric::mean_ordered(
                ds.records
                    .iter()
                    .map(|r| r.context.slot_ctrs.get(j).copied().unwrap_or(0.0)),
            );
            let alloc = alpha_j * mean_quality;
            write(alloc, tc.integral_clamped(alloc), &format!("slot{}", j + 1))?;
        }
    }
    wtr.flush()?;
    Ok(())
}
