//! Interim allocation and payment curves x̂_i(b), p̂_i(b) on a discretized
//! bid grid, estimated by counterfactual simulation over all observed
//! auctions: for each bidder and grid bid, replay every auction with the
//! bidder's bid replaced and average the outcome.
//!
//! Two estimation modes:
//! - joint: each opponent bid profile is paired with its own context,
//!   preserving bid–context correlation (the plain empirical average);
//! - independent: opponent bids are resampled per-coordinate from each
//!   opponent's empirical bid multiset and contexts are resampled
//!   independently, which deliberately ignores correlation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auction::{GspScratch, run_into};
use crate::dataset::AuctionDataset;
use crate::error::{Error, Result};
use crate::numeric::{KahanSum, mean_ordered};

/// Discretized bid space: strictly increasing points starting at 0 and
/// ending at the bid cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidGrid {
    points: Vec<f64>,
}

impl BidGrid {
    /// Default grid: `positive_points` geometric points on (0, B] plus {0}.
    /// The geometric spacing concentrates resolution at low bids where
    /// allocation curves bend; the lowest positive point is B/1000.
    pub fn geometric(bid_cap: f64, positive_points: usize) -> Self {
        assert!(bid_cap > 0.0, "bid cap must be positive");
        assert!(positive_points >= 1);
        let mut points = Vec::with_capacity(positive_points + 1);
        points.push(0.0);
        if positive_points == 1 {
            points.push(bid_cap);
            return Self { points };
        }
        let lo = bid_cap * 1e-3;
        let ratio = (bid_cap / lo).powf(1.0 / (positive_points - 1) as f64);
        let mut b = lo;
        for k in 0..positive_points {
            points.push(if k + 1 == positive_points { bid_cap } else { b });
            b *= ratio;
        }
        Self { points }
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.first() != Some(&0.0) {
            return Err(Error::Spec("bid grid must include 0".into()));
        }
        if !points.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Spec("bid grid must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cap(&self) -> f64 {
        *self.points.last().expect("non-empty grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationMode {
    Joint,
    Independent,
}

/// Estimated interim curves for every roster bidder on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct InterimCurves {
    pub grid: BidGrid,
    pub mode: EstimationMode,
    /// Monte Carlo profiles per grid point (independent mode only).
    pub mc_profiles: usize,
    pub seed: u64,
    /// alloc[i][g]
    alloc: Vec<Vec<f64>>,
    /// pay[i][g]
    pay: Vec<Vec<f64>>,
}

impl InterimCurves {
    /// Assemble curves from raw per-bidder vectors (each aligned with the
    /// grid). Used by hand-constructed fixtures.
    #[cfg(test)]
    pub(crate) fn from_parts(
        grid: BidGrid,
        mode: EstimationMode,
        alloc: Vec<Vec<f64>>,
        pay: Vec<Vec<f64>>,
    ) -> Self {
        assert!(alloc.iter().chain(&pay).all(|v| v.len() == grid.len()));
        Self {
            grid,
            mode,
            mc_profiles: 0,
            seed: 0,
            alloc,
            pay,
        }
    }

    pub fn n_bidders(&self) -> usize {
        self.alloc.len()
    }

    pub fn alloc(&self, bidder: usize) -> &[f64] {
        &self.alloc[bidder]
    }

    pub fn pay(&self, bidder: usize) -> &[f64] {
        &self.pay[bidder]
    }

    /// Price per unit p̂/x̂ at each grid point; None where x̂ = 0.
    pub fn ppc(&self, bidder: usize) -> Vec<Option<f64>> {
        self.alloc[bidder]
            .iter()
            .zip(&self.pay[bidder])
            .map(|(&x, &p)| if x > 0.0 { Some(p / x) } else { None })
            .collect()
    }

    /// Export as CSV rows `bidder_id,bid,alloc,pay`.
    pub fn write_csv<W: std::io::Write>(&self, bidder_ids: &[String], w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["bidder_id", "bid", "alloc", "pay"])
            .map_err(csv_err)?;
        for (i, id) in bidder_ids.iter().enumerate() {
            for (g, b) in self.grid.points().iter().enumerate() {
                wtr.write_record([
                    id.as_str(),
                    &format!("{b}"),
                    &format!("{}", self.alloc[i][g]),
                    &format!("{}", self.pay[i][g]),
                ])
                .map_err(csv_err)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Maximum marginal allocation x̄_i: the top slot's CTR times the bidder's
/// quality, averaged over records.
pub fn max_allocation(ds: &AuctionDataset, bidder: usize) -> f64 {
    mean_ordered(ds.records.iter().map(|r| {
        r.context.slot_ctrs.first().copied().unwrap_or(0.0) * r.context.qualities[bidder]
    }))
}

/// Estimate interim curves. In joint mode the estimate is the exact
/// empirical average over records and is validated against the bid cap;
/// independent mode is Monte Carlo with `mc_profiles` draws per grid point
/// and a seeded deterministic PRNG.
pub fn estimate_curves(
    ds: &AuctionDataset,
    grid: &BidGrid,
    mode: EstimationMode,
    mc_profiles: usize,
    seed: u64,
) -> Result<InterimCurves> {
    check_grid(ds, grid)?;
    let identity: Vec<usize> = (0..ds.n_records()).collect();
    match mode {
        EstimationMode::Joint => {
            let curves = estimate_joint(ds, grid, None)?;
            validate_bid_cap(ds, &curves)?;
            Ok(curves)
        }
        EstimationMode::Independent => {
            estimate_independent(ds, grid, mc_profiles, seed, &identity)
        }
    }
}

fn check_grid(ds: &AuctionDataset, grid: &BidGrid) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Spec("bid grid needs at least two points".into()));
    }
    let cap = grid.cap();
    if (cap - ds.bid_cap).abs() > 1e-9 * ds.bid_cap.max(1.0) {
        return Err(Error::Spec(format!(
            "grid cap {cap} does not match dataset bid cap {}",
            ds.bid_cap
        )));
    }
    Ok(())
}

/// Joint-mode estimation; `weights` (resample multiplicities) default to 1.
/// Estimation parallelizes over (bidder, grid) cells; each cell reduces
/// over records in order, so results do not depend on the thread count.
pub(crate) fn estimate_joint(
    ds: &AuctionDataset,
    grid: &BidGrid,
    weights: Option<&[f64]>,
) -> Result<InterimCurves> {
    let n = ds.n_bidders();
    let gp = grid.len();
    let t_count = ds.n_records() as f64;
    let total_w = weights.map(|w| w.iter().sum::<f64>()).unwrap_or(t_count);
    let cells: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..gp).map(move |g| (i, g))).collect();
    let results: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, g)| {
            let bid = grid.points()[g];
            let mut scratch = GspScratch::default();
            let mut bids_buf: Vec<f64> = Vec::with_capacity(n);
            let mut xs = KahanSum::new();
            let mut ps = KahanSum::new();
            for (t, rec) in ds.records.iter().enumerate() {
                let w = weights.map(|w| w[t]).unwrap_or(1.0);
                if w == 0.0 {
                    continue;
                }
                bids_buf.clear();
                bids_buf.extend_from_slice(&rec.bids.bids);
                bids_buf[i] = bid;
                run_into(&bids_buf, &rec.context, ds.pricing, &mut scratch);
                xs.add(w * scratch.allocation[i]);
                ps.add(w * scratch.payment[i]);
            }
            (xs.value() / total_w, ps.value() / total_w)
        })
        .collect();

    let mut alloc = vec![vec![0.0; gp]; n];
    let mut pay = vec![vec![0.0; gp]; n];
    for (k, &(i, g)) in cells.iter().enumerate() {
        alloc[i][g] = results[k].0;
        pay[i][g] = results[k].1;
    }

    // GSP allocation and payment are monotone in own bid per fixed opponent
    // profile, so the averaged joint-mode curves must already be monotone.
    // A violation is a bug in the auction logic, never something to repair.
    for i in 0..n {
        for g in 1..gp {
            assert!(
                alloc[i][g] >= alloc[i][g - 1] - 1e-12 && pay[i][g] >= pay[i][g - 1] - 1e-12,
                "joint-mode curve for bidder {i} not monotone at grid point {g}"
            );
        }
    }

    Ok(InterimCurves {
        grid: grid.clone(),
        mode: EstimationMode::Joint,
        mc_profiles: 0,
        seed: 0,
        alloc,
        pay,
    })
}

/// Independent-mode Monte Carlo over per-coordinate bid multisets and the
/// context multiset, both built from `record_idx` (identity for the point
/// estimate, a resampled index list for bootstrap replicates).
pub(crate) fn estimate_independent(
    ds: &AuctionDataset,
    grid: &BidGrid,
    mc_profiles: usize,
    seed: u64,
    record_idx: &[usize],
) -> Result<InterimCurves> {
    if mc_profiles == 0 {
        return Err(Error::Spec(
            "independent mode requires mc_profiles >= 1".into(),
        ));
    }
    if record_idx.is_empty() {
        return Err(Error::Spec("empty record multiset".into()));
    }
    let n = ds.n_bidders();
    let gp = grid.len();
    let cells: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..gp).map(move |g| (i, g))).collect();
    let results: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, g)| {
            let bid = grid.points()[g];
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, i as u64, g as u64));
            let mut scratch = GspScratch::default();
            let mut bids_buf = vec![0.0; n];
            let mut xs = KahanSum::new();
            let mut ps = KahanSum::new();
            for _ in 0..mc_profiles {
                for (j, b) in bids_buf.iter_mut().enumerate() {
                    if j == i {
                        *b = bid;
                    } else {
                        let t = record_idx[rng.gen_range(0..record_idx.len())];
                        *b = ds.records[t].bids.bids[j];
                    }
                }
                let t_ctx = record_idx[rng.gen_range(0..record_idx.len())];
                run_into(&bids_buf, &ds.records[t_ctx].context, ds.pricing, &mut scratch);
                xs.add(scratch.allocation[i]);
                ps.add(scratch.payment[i]);
            }
            (xs.value() / mc_profiles as f64, ps.value() / mc_profiles as f64)
        })
        .collect();

    let mut alloc = vec![vec![0.0; gp]; n];
    let mut pay = vec![vec![0.0; gp]; n];
    for (k, &(i, g)) in cells.iter().enumerate() {
        alloc[i][g] = results[k].0;
        pay[i][g] = results[k].1;
    }
    // Monte Carlo noise can dent monotonicity; repair with a running max.
    for i in 0..n {
        for g in 1..gp {
            alloc[i][g] = alloc[i][g].max(alloc[i][g - 1]);
            pay[i][g] = pay[i][g].max(pay[i][g - 1]);
        }
    }
    Ok(InterimCurves {
        grid: grid.clone(),
        mode: EstimationMode::Independent,
        mc_profiles,
        seed,
        alloc,
        pay,
    })
}

/// The bid cap must let every bidder reach the top rank: otherwise the
/// estimated curve never attains x̄_i, the threshold feasible sets go empty
/// below x̄_i, and the upper-bound direction of T̄¹ silently breaks.
pub fn validate_bid_cap(ds: &AuctionDataset, curves: &InterimCurves) -> Result<()> {
    let top = curves.grid.len() - 1;
    for i in 0..ds.n_bidders() {
        let observed = curves.alloc(i)[top];
        let required = max_allocation(ds, i);
        if observed < required - 1e-9 {
            return Err(Error::BidCapTooLow {
                bidder: ds.bidder_ids[i].clone(),
                observed,
                required,
            });
        }
    }
    Ok(())
}

/// Worst shortfall of x̂_i(B) against x̄_i across bidders (diagnostic).
pub fn cap_deficit(ds: &AuctionDataset, curves: &InterimCurves) -> f64 {
    let top = curves.grid.len() - 1;
    (0..ds.n_bidders())
        .map(|i| max_allocation(ds, i) - curves.alloc(i)[top])
        .fold(0.0, f64::max)
}

/// Smallest admissible price per unit implied by the reserves, and the
/// number of (bidder, grid) cells whose estimated ppc falls below it.
/// Violations are a data-quality warning, not an error: with a zero reserve
/// the floor is zero and nothing can trip it.
pub fn min_ppc_violations(ds: &AuctionDataset, curves: &InterimCurves) -> (f64, usize) {
    let p_min = ds
        .records
        .iter()
        .flat_map(|r| r.context.scores.iter().map(|s| r.context.reserve / s))
        .fold(f64::INFINITY, f64::min);
    let p_min = if p_min.is_finite() { p_min } else { 0.0 };
    let mut violations = 0usize;
    for i in 0..curves.n_bidders() {
        for g in 0..curves.grid.len() {
            let x = curves.alloc(i)[g];
            if x > 0.0 && curves.pay(i)[g] / x < p_min - 1e-12 {
                violations += 1;
            }
        }
    }
    (p_min, violations)
}

/// Per-cell stream seed: SplitMix64 over (master, bidder, grid index), so
/// cells are independent of each other and of the thread schedule.
pub(crate) fn stream_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Joint-mode counterfactuals materialized per record, so bootstrap
/// replicates can re-average under resample weights without re-simulating.
/// Layout: cell-major, `values[(i * G + g) * T + t]`.
pub(crate) struct CounterfactualTensor {
    pub grid: BidGrid,
    pub n_bidders: usize,
    pub n_records: usize,
    alloc: Vec<f64>,
    pay: Vec<f64>,
    /// Realized total payment per record.
    pub realized_total_pay: Vec<f64>,
}

impl CounterfactualTensor {
    pub fn build(ds: &AuctionDataset, grid: &BidGrid) -> Result<Self> {
        check_grid(ds, grid)?;
        let n = ds.n_bidders();
        let gp = grid.len();
        let t_count = ds.n_records();
        let mut alloc = vec![0.0; n * gp * t_count];
        let mut pay = vec![0.0; n * gp * t_count];
        alloc
            .par_chunks_mut(t_count)
            .zip(pay.par_chunks_mut(t_count))
            .enumerate()
            .for_each(|(cell, (xs, ps))| {
                let i = cell / gp;
                let g = cell % gp;
                let bid = grid.points()[g];
                let mut scratch = GspScratch::default();
                let mut bids_buf: Vec<f64> = Vec::with_capacity(n);
                for (t, rec) in ds.records.iter().enumerate() {
                    bids_buf.clear();
                    bids_buf.extend_from_slice(&rec.bids.bids);
                    bids_buf[i] = bid;
                    run_into(&bids_buf, &rec.context, ds.pricing, &mut scratch);
                    xs[t] = scratch.allocation[i];
                    ps[t] = scratch.payment[i];
                }
            });
        let realized_total_pay = crate::dataset::realized_payment_totals(ds)?;
        Ok(Self {
            grid: grid.clone(),
            n_bidders: n,
            n_records: t_count,
            alloc,
            pay,
            realized_total_pay,
        })
    }

    /// Weighted joint-mode curves; `weights` ≡ 1 reproduces `estimate_joint`
    /// bit for bit (same accumulation order and arithmetic).
    pub fn weighted_curves(&self, weights: &[f64]) -> InterimCurves {
        assert_eq!(weights.len(), self.n_records);
        let total_w: f64 = weights.iter().sum();
        let n = self.n_bidders;
        let gp = self.grid.len();
        let t_count = self.n_records;
        let mut alloc = vec![vec![0.0; gp]; n];
        let mut pay = vec![vec![0.0; gp]; n];
        for i in 0..n {
            for g in 0..gp {
                let base = (i * gp + g) * t_count;
                let mut xs = KahanSum::new();
                let mut ps = KahanSum::new();
                for t in 0..t_count {
                    let w = weights[t];
                    if w == 0.0 {
                        continue;
                    }
                    xs.add(w * self.alloc[base + t]);
                    ps.add(w * self.pay[base + t]);
                }
                alloc[i][g] = xs.value() / total_w;
                pay[i][g] = ps.value() / total_w;
            }
        }
        InterimCurves {
            grid: self.grid.clone(),
            mode: EstimationMode::Joint,
            mc_profiles: 0,
            seed: 0,
            alloc,
            pay,
        }
    }

}
