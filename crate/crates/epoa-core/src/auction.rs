//! Deterministic mechanics of the generalized second-price position auction:
//! rank-score ordering, slot assignment under reserve and mainline rules,
//! pricing, and the welfare-optimal assignment used as the benchmark oracle.
//!
//! Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::sum_ordered;

/// Per-auction parameters: scores, qualities, slot CTRs, reserves and the
/// mainline configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionContext {
    /// Rank-score coefficient s_i per bidder; strictly positive.
    pub scores: Vec<f64>,
    /// Click probability gamma_i per bidder, in [0, 1].
    pub qualities: Vec<f64>,
    /// Slot click-through multipliers, non-increasing.
    pub slot_ctrs: Vec<f64>,
    /// Rank-score reserve; a bidder participates only if s_i * b_i >= reserve.
    pub reserve: f64,
    /// Mainline rank-score reserve, >= reserve.
    pub mainline_reserve: f64,
    /// Slot indices (0-based into `slot_ctrs`) that are mainline slots.
    pub mainline_slots: Vec<usize>,
    /// Max bidders placed in mainline slots.
    pub mainline_cap: usize,
}

impl AuctionContext {
    /// Context with no reserves and no mainline, the common case in tests
    /// and synthetic data.
    pub fn simple(scores: Vec<f64>, qualities: Vec<f64>, slot_ctrs: Vec<f64>) -> Self {
        Self {
            scores,
            qualities,
            slot_ctrs,
            reserve: 0.0,
            mainline_reserve: 0.0,
            mainline_slots: Vec::new(),
            mainline_cap: 0,
        }
    }

    pub fn n_bidders(&self) -> usize {
        self.scores.len()
    }

    pub fn n_slots(&self) -> usize {
        self.slot_ctrs.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.scores.len() != self.qualities.len() {
            return Err(Error::MalformedContext(format!(
                "{} scores but {} qualities",
                self.scores.len(),
                self.qualities.len()
            )));
        }
        if let Some(s) = self.scores.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::MalformedContext(format!("non-positive score {s}")));
        }
        if let Some(g) = self
            .qualities
            .iter()
            .find(|g| !(0.0..=1.0).contains(*g) || g.is_nan())
        {
            return Err(Error::MalformedContext(format!("quality {g} outside [0, 1]")));
        }
        for w in self.slot_ctrs.windows(2) {
            if !(w[0] >= w[1]) {
                return Err(Error::MalformedContext(format!(
                    "slot ctrs not non-increasing: {} < {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(a) = self.slot_ctrs.iter().find(|a| !(**a >= 0.0)) {
            return Err(Error::MalformedContext(format!("negative slot ctr {a}")));
        }
        if !(self.reserve >= 0.0) {
            return Err(Error::MalformedContext(format!(
                "negative reserve {}",
                self.reserve
            )));
        }
        if !(self.mainline_reserve >= self.reserve) {
            return Err(Error::MalformedContext(format!(
                "mainline reserve {} below reserve {}",
                self.mainline_reserve, self.reserve
            )));
        }
        if self.mainline_slots.len() > self.slot_ctrs.len() {
            return Err(Error::MalformedContext(
                "more mainline slots than slots".into(),
            ));
        }
        if let Some(j) = self
            .mainline_slots
            .iter()
            .find(|j| **j >= self.slot_ctrs.len())
        {
            return Err(Error::MalformedContext(format!(
                "mainline slot index {j} out of range"
            )));
        }
        Ok(())
    }

    fn is_mainline(&self, slot: usize) -> bool {
        self.mainline_slots.contains(&slot)
    }
}

/// One bid per roster bidder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidProfile {
    pub bids: Vec<f64>,
}

impl BidProfile {
    pub fn new(bids: Vec<f64>) -> Self {
        Self { bids }
    }
}

/// Payment rule applied to assigned bidders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Pricing {
    /// Pay the minimum bid needed to keep the position (rank-score of the
    /// next ranked bidder over own score, floored by reserves).
    #[default]
    Gsp,
    /// Pay own bid per click.
    FirstPrice,
}

/// Outcome of one auction: slot per bidder, per-bidder allocation
/// x_i = alpha_slot * gamma_i, price per click and payment p_i = ppc_i * x_i.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    /// Slot index per bidder; None when unassigned.
    pub slot: Vec<Option<usize>>,
    pub allocation: Vec<f64>,
    pub ppc: Vec<f64>,
    pub payment: Vec<f64>,
}

impl AuctionOutcome {
    pub fn total_payment(&self) -> f64 {
        sum_ordered(self.payment.iter().copied())
    }

    /// Realized welfare given per-bidder values.
    pub fn welfare(&self, values: &[f64]) -> f64 {
        sum_ordered(
            self.allocation
                .iter()
                .zip(values)
                .map(|(x, v)| x * v),
        )
    }
}

/// Bidders ordered by rank-score s_i * b_i descending, bidders below the
/// reserve excluded, ties broken by lower bidder index.
pub fn rank_bidders(bids: &BidProfile, ctx: &AuctionContext) -> Vec<usize> {
    let mut ranked: Vec<usize> = (0..ctx.n_bidders())
        .filter(|&i| ctx.scores[i] * bids.bids[i] >= ctx.reserve)
        .collect();
    ranked.sort_by(|&a, &b| {
        let qa = ctx.scores[a] * bids.bids[a];
        let qb = ctx.scores[b] * bids.bids[b];
        qb.partial_cmp(&qa).unwrap().then(a.cmp(&b))
    });
    ranked
}

/// Reusable buffers for the counterfactual simulation hot loop.
#[derive(Debug, Default, Clone)]
pub(crate) struct GspScratch {
    ranked: Vec<usize>,
    slot_taken: Vec<bool>,
    pub slot: Vec<Option<usize>>,
    pub allocation: Vec<f64>,
    pub ppc: Vec<f64>,
    pub payment: Vec<f64>,
}

/// Core auction logic writing into scratch buffers; the public `run_gsp`
/// and the interim estimator both go through here.
pub(crate) fn run_into(
    bids: &[f64],
    ctx: &AuctionContext,
    pricing: Pricing,
    s: &mut GspScratch,
) {
    let n = ctx.n_bidders();
    let m = ctx.n_slots();
    s.ranked.clear();
    for i in 0..n {
        if ctx.scores[i] * bids[i] >= ctx.reserve {
            s.ranked.push(i);
        }
    }
    s.ranked.sort_by(|&a, &b| {
        let qa = ctx.scores[a] * bids[a];
        let qb = ctx.scores[b] * bids[b];
        qb.partial_cmp(&qa).unwrap().then(a.cmp(&b))
    });

    s.slot_taken.clear();
    s.slot_taken.resize(m, false);
    s.slot.clear();
    s.slot.resize(n, None);
    s.allocation.clear();
    s.allocation.resize(n, 0.0);
    s.ppc.clear();
    s.ppc.resize(n, 0.0);
    s.payment.clear();
    s.payment.resize(n, 0.0);

    let mut mainline_used = 0usize;
    for (rank, &i) in s.ranked.iter().enumerate() {
        let q_i = ctx.scores[i] * bids[i];
        let mainline_ok = q_i >= ctx.mainline_reserve && mainline_used < ctx.mainline_cap;
        // Slots are ordered by non-increasing CTR, so the first available
        // eligible slot is the best one.
        let mut assigned = None;
        for j in 0..m {
            if s.slot_taken[j] {
                continue;
            }
            if ctx.is_mainline(j) && !mainline_ok {
                continue;
            }
            assigned = Some(j);
            break;
        }
        let Some(j) = assigned else { continue };
        s.slot_taken[j] = true;
        if ctx.is_mainline(j) {
            mainline_used += 1;
        }
        s.slot[i] = Some(j);
        let x = ctx.slot_ctrs[j] * ctx.qualities[i];
        let ppc = match pricing {
            Pricing::FirstPrice => bids[i],
            Pricing::Gsp => {
                // Next-ranked eligible bidder prices the position; 0 if none.
                let next_q = s
                    .ranked
                    .get(rank + 1)
                    .map(|&k| ctx.scores[k] * bids[k])
                    .unwrap_or(0.0);
                let mut p = next_q / ctx.scores[i];
                p = p.max(ctx.reserve / ctx.scores[i]);
                if ctx.is_mainline(j) {
                    p = p.max(ctx.mainline_reserve / ctx.scores[i]);
                }
                p
            }
        };
        debug_assert!(ppc <= bids[i] + 1e-12 * bids[i].abs().max(1.0));
        s.allocation[i] = x;
        s.ppc[i] = ppc;
        s.payment[i] = ppc * x;
    }
}

/// Run one auction. Slots are filled in rank order subject to reserve and
/// mainline rules; the price per click never exceeds the bidder's own bid.
pub fn run_gsp(bids: &BidProfile, ctx: &AuctionContext, pricing: Pricing) -> Result<AuctionOutcome> {
    ctx.validate()?;
    if bids.bids.len() != ctx.n_bidders() {
        return Err(Error::MalformedContext(format!(
            "{} bids for {} bidders",
            bids.bids.len(),
            ctx.n_bidders()
        )));
    }
    let mut s = GspScratch::default();
    run_into(&bids.bids, ctx, pricing, &mut s);
    Ok(AuctionOutcome {
        slot: s.slot,
        allocation: s.allocation,
        ppc: s.ppc,
        payment: s.payment,
    })
}

/// Welfare-maximizing assignment for known values: slots go to bidders in
/// decreasing order of gamma_i * v_i (exact because slot CTRs are sorted).
/// Reserves and mainline rules do not constrain the benchmark.
///
/// Returns the bidder per slot and the resulting welfare.
pub fn opt_assignment(values: &[f64], ctx: &AuctionContext) -> (Vec<Option<usize>>, f64) {
    let n = ctx.n_bidders();
    let m = ctx.n_slots();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let wa = ctx.qualities[a] * values[a];
        let wb = ctx.qualities[b] * values[b];
        wb.partial_cmp(&wa).unwrap().then(a.cmp(&b))
    });
    let mut assignment = vec![None; m];
    let welfare = sum_ordered((0..m.min(n)).map(|j| {
        let i = order[j];
        assignment[j] = Some(i);
        ctx.slot_ctrs[j] * ctx.qualities[i] * values[i]
    }));
    (assignment, welfare)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx2(scores: Vec<f64>, qualities: Vec<f64>, slot_ctrs: Vec<f64>, r: f64) -> AuctionContext {
        AuctionContext {
            reserve: r,
            mainline_reserve: r,
            ..AuctionContext::simple(scores, qualities, slot_ctrs)
        }
    }

    #[test]
    fn rank_by_bid_when_scores_equal() {
        let ctx = ctx2(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0], 0.0);
        let ranked = rank_bidders(&BidProfile::new(vec![2.0, 1.0]), &ctx);
        assert_eq!(ranked, vec![0, 1]);
    }

    #[test]
    fn rank_score_weighting_dominates() {
        let ctx = ctx2(vec![1.0, 2.0], vec![1.0, 1.0], vec![1.0], 0.0);
        let ranked = rank_bidders(&BidProfile::new(vec![1.0, 1.0]), &ctx);
        assert_eq!(ranked, vec![1, 0]);
    }

    #[test]
    fn reserve_excludes_everyone() {
        let ctx = ctx2(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0], 1.5);
        let ranked = rank_bidders(&BidProfile::new(vec![1.0, 1.0]), &ctx);
        assert!(ranked.is_empty());
    }

    #[test]
    fn rank_ties_break_by_lower_index() {
        let ctx = ctx2(vec![1.0, 1.0, 1.0], vec![1.0; 3], vec![1.0], 0.0);
        let ranked = rank_bidders(&BidProfile::new(vec![1.0, 1.0, 1.0]), &ctx);
        assert_eq!(ranked, vec![0, 1, 2]);
    }

    #[test]
    fn single_slot_second_price() {
        let ctx = ctx2(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0], 0.0);
        let out = run_gsp(&BidProfile::new(vec![2.0, 1.0]), &ctx, Pricing::Gsp).unwrap();
        assert_eq!(out.slot, vec![Some(0), None]);
        assert_eq!(out.ppc[0], 1.0);
        assert_eq!(out.allocation[0], 1.0);
        assert_eq!(out.payment[0], 1.0);
    }

    #[test]
    fn reserve_binds_on_price() {
        let ctx = ctx2(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0], 1.5);
        let out = run_gsp(&BidProfile::new(vec![2.0, 1.0]), &ctx, Pricing::Gsp).unwrap();
        assert_eq!(out.slot, vec![Some(0), None]);
        assert_eq!(out.ppc[0], 1.5);
    }

    // Three bidders, two slots, hand-simulated: rank scores (3, 4, 1) put
    // bidder 1 first at ppc 3/2 and bidder 0 second at ppc 1/1.
    #[test]
    fn three_bidders_two_slots_hand_simulated() {
        let ctx = ctx2(vec![1.0, 2.0, 1.0], vec![1.0, 0.5, 1.0], vec![1.0, 0.5], 0.0);
        let out = run_gsp(&BidProfile::new(vec![3.0, 2.0, 1.0]), &ctx, Pricing::Gsp).unwrap();
        assert_eq!(out.slot, vec![Some(1), Some(0), None]);
        assert!((out.ppc[1] - 1.5).abs() < 1e-15);
        assert!((out.allocation[1] - 0.5).abs() < 1e-15);
        assert!((out.ppc[0] - 1.0).abs() < 1e-15);
        assert!((out.allocation[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fewer_ranked_bidders_than_slots_prices_at_reserve_terms() {
        let ctx = ctx2(vec![1.0], vec![1.0], vec![1.0, 0.5], 0.25);
        let out = run_gsp(&BidProfile::new(vec![1.0]), &ctx, Pricing::Gsp).unwrap();
        assert_eq!(out.slot, vec![Some(0)]);
        assert_eq!(out.ppc[0], 0.25);
    }

    #[test]
    fn first_price_pays_own_bid() {
        let ctx = ctx2(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0], 0.0);
        let out = run_gsp(&BidProfile::new(vec![2.0, 1.0]), &ctx, Pricing::FirstPrice).unwrap();
        assert_eq!(out.ppc[0], 2.0);
        assert_eq!(out.payment[0], 2.0);
        assert_eq!(out.payment[1], 0.0);
    }

    #[test]
    fn mainline_ineligible_bidder_skips_mainline_slot() {
        let ctx = AuctionContext {
            reserve: 0.0,
            mainline_reserve: 5.0,
            mainline_slots: vec![0],
            mainline_cap: 1,
            ..AuctionContext::simple(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.5])
        };
        // Bidder 0 outranks but misses the mainline reserve: takes slot 1,
        // bidder 1 (also ineligible) gets nothing.
        let out = run_gsp(&BidProfile::new(vec![4.0, 1.0]), &ctx, Pricing::Gsp).unwrap();
        assert_eq!(out.slot, vec![Some(1), None]);
        // Eligible top bidder takes the mainline slot at the mainline floor.
        let out = run_gsp(&BidProfile::new(vec![6.0, 1.0]), &ctx, Pricing::Gsp).unwrap();
        assert_eq!(out.slot, vec![Some(0), Some(1)]);
        assert!((out.ppc[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn mainline_cap_limits_mainline_placements() {
        let ctx = AuctionContext {
            reserve: 0.0,
            mainline_reserve: 1.0,
            mainline_slots: vec![0, 1],
            mainline_cap: 1,
            ..AuctionContext::simple(vec![1.0, 1.0, 1.0], vec![1.0; 3], vec![1.0, 0.8, 0.2])
        };
        let out = run_gsp(&BidProfile::new(vec![3.0, 2.0, 1.5]), &ctx, Pricing::Gsp).unwrap();
        // Only bidder 0 fits the mainline cap; bidder 1 drops to slot 2.
        assert_eq!(out.slot, vec![Some(0), Some(2), None]);
    }

    #[test]
    fn malformed_context_rejected() {
        let ctx = AuctionContext::simple(vec![1.0], vec![1.0], vec![0.5, 1.0]);
        assert!(matches!(
            run_gsp(&BidProfile::new(vec![1.0]), &ctx, Pricing::Gsp),
            Err(Error::MalformedContext(_))
        ));
    }

    #[test]
    fn opt_assignment_prefers_quality_weighted_value() {
        let ctx = AuctionContext::simple(vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0]);
        let (assign, welfare) = opt_assignment(&[1.0, 2.0], &ctx);
        assert_eq!(assign, vec![Some(1)]);
        assert_eq!(welfare, 2.0);
    }

    #[test]
    fn opt_assignment_two_slot_enumeration() {
        let ctx = AuctionContext::simple(vec![1.0, 1.0], vec![0.1, 1.0], vec![1.0, 0.5]);
        let (assign, welfare) = opt_assignment(&[4.0, 1.0], &ctx);
        assert_eq!(assign, vec![Some(1), Some(0)]);
        assert!((welfare - 1.2).abs() < 1e-15);
    }

    fn brute_force_opt(values: &[f64], ctx: &AuctionContext) -> f64 {
        // All injective slot -> bidder maps, m <= n assumed small.
        fn rec(j: usize, m: usize, used: &mut Vec<bool>, values: &[f64], ctx: &AuctionContext) -> f64 {
            if j == m {
                return 0.0;
            }
            // Leaving the slot empty is allowed but never better with v >= 0.
            let mut best: f64 = 0.0;
            for i in 0..values.len() {
                if used[i] {
                    continue;
                }
                used[i] = true;
                let w = ctx.slot_ctrs[j] * ctx.qualities[i] * values[i]
                    + rec(j + 1, m, used, values, ctx);
                best = best.max(w);
                used[i] = false;
            }
            best.max(rec(j + 1, m, used, values, ctx))
        }
        let mut used = vec![false; values.len()];
        rec(0, ctx.n_slots(), &mut used, values, ctx)
    }

    #[test]
    fn greedy_opt_matches_exhaustive_search() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=3);
            let mut alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let ctx = AuctionContext::simple(
                (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
                (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                alphas,
            );
            let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
            let (_, greedy) = opt_assignment(&values, &ctx);
            let brute = brute_force_opt(&values, &ctx);
            assert!(
                (greedy - brute).abs() <= 1e-12 * brute.max(1.0),
                "greedy {greedy} != brute {brute}"
            );
        }
    }

    #[test]
    fn allocation_and_payment_monotone_in_own_bid() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(2..=5);
            let m = rng.gen_range(1..=3);
            let mut alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let r = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.5) } else { 0.0 };
            let rm = r + if rng.gen_bool(0.5) { rng.gen_range(0.0..0.5) } else { 0.0 };
            let mainline: Vec<usize> = if rng.gen_bool(0.4) { vec![0] } else { vec![] };
            let cap = mainline.len();
            let ctx = AuctionContext {
                reserve: r,
                mainline_reserve: rm,
                mainline_cap: cap,
                mainline_slots: mainline,
                ..AuctionContext::simple(
                    (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
                    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    alphas,
                )
            };
            let mut bids: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let i = rng.gen_range(0..n);
            let b_lo = rng.gen_range(0.0..2.0);
            let b_hi = b_lo + rng.gen_range(0.0..1.0);
            bids[i] = b_lo;
            let lo = run_gsp(&BidProfile::new(bids.clone()), &ctx, Pricing::Gsp).unwrap();
            bids[i] = b_hi;
            let hi = run_gsp(&BidProfile::new(bids.clone()), &ctx, Pricing::Gsp).unwrap();
            assert!(hi.allocation[i] >= lo.allocation[i] - 1e-12);
            assert!(hi.payment[i] >= lo.payment[i] - 1e-12);
        }
    }

    #[test]
    fn scaling_bids_and_reserves_scales_prices() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = rng.gen_range(2..=4);
            let ctx = AuctionContext {
                reserve: rng.gen_range(0.0..0.3),
                mainline_reserve: rng.gen_range(0.3..0.6),
                mainline_slots: vec![0],
                mainline_cap: 1,
                ..AuctionContext::simple(
                    (0..n).map(|_| rng.gen_range(0.1..2.0)).collect(),
                    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    vec![1.0, 0.4],
                )
            };
            let bids: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let out = run_gsp(&BidProfile::new(bids.clone()), &ctx, Pricing::Gsp).unwrap();
            // Powers of two scale exactly in binary floating point.
            let c = 4.0;
            let scaled_ctx = AuctionContext {
                reserve: ctx.reserve * c,
                mainline_reserve: ctx.mainline_reserve * c,
                ..ctx.clone()
            };
            let scaled_bids: Vec<f64> = bids.iter().map(|b| b * c).collect();
            let out_c = run_gsp(&BidProfile::new(scaled_bids), &scaled_ctx, Pricing::Gsp).unwrap();
            assert_eq!(out.slot, out_c.slot);
            for i in 0..n {
                assert_eq!(out.ppc[i] * c, out_c.ppc[i]);
                assert_eq!(out.payment[i] * c, out_c.payment[i]);
            }
        }
    }
}
