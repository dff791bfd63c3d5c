//! Empirical revenue covering: expected revenue, the efficiently computable
//! upper bound T̄¹ on the maximum total threshold, the certificates T_avg
//! (best quality-independent assignment, a bipartite matching) and LB-T
//! (true thresholds at the T̄¹-optimal policy's marginal allocation), and
//! the covering parameters μ¹ = T̄¹/R̂ev, μ_avg = T_avg/R̂ev.

use crate::dataset::{AuctionDataset, realized_payment_totals};
use crate::error::{Error, Result};
use crate::matching::max_weight_assignment;
use crate::numeric::KahanSum;
use crate::thresholds::ThresholdCurve;

#[derive(Debug, Clone)]
pub struct CoveringResult {
    /// Average per-auction revenue R̂ev.
    pub revenue: f64,
    pub tbar1: f64,
    pub tavg: f64,
    pub lb_t: f64,
    /// T̄¹ / R̂ev.
    pub mu1: f64,
    /// T_avg / R̂ev.
    pub mu_avg: f64,
    /// LB-T / R̂ev.
    pub mu_lb: f64,
    /// Marginal allocation per bidder under the T̄¹ greedy policy.
    pub marginal_alloc: Vec<f64>,
}

/// Average realized revenue per auction; zero revenue is an error because
/// every covering ratio divides by it.
pub fn revenue(ds: &AuctionDataset) -> Result<f64> {
    let totals = realized_payment_totals(ds)?;
    let rev = weighted_mean(&totals, None);
    if rev <= 0.0 {
        return Err(Error::ZeroRevenue);
    }
    Ok(rev)
}

fn weighted_mean(xs: &[f64], weights: Option<&[f64]>) -> f64 {
    let mut acc = KahanSum::new();
    let mut w_acc = 0.0f64;
    for (t, x) in xs.iter().enumerate() {
        let w = weights.map(|w| w[t]).unwrap_or(1.0);
        if w != 0.0 {
            acc.add(w * x);
        }
        w_acc += w;
    }
    acc.value() / w_acc
}

/// Linearized per-unit values v'_i = T̂_i(x̄_i)/x̄_i; 0 for never-allocated
/// bidders, which keeps them out of every upper bound.
fn linear_values(thresholds: &[Option<ThresholdCurve>]) -> Vec<f64> {
    thresholds
        .iter()
        .map(|t| t.as_ref().map(|t| t.linear_slope()).unwrap_or(0.0))
        .collect()
}

/// T̄¹ plus the greedy policy's marginal allocations. For each record the
/// slots are assigned in decreasing gamma_i * v'_i (slot count is the only
/// constraint: the benchmark ignores reserves and mainline rules).
pub fn tbar1(
    ds: &AuctionDataset,
    thresholds: &[Option<ThresholdCurve>],
) -> (f64, Vec<f64>) {
    tbar1_weighted(ds, thresholds, None)
}

pub(crate) fn tbar1_weighted(
    ds: &AuctionDataset,
    thresholds: &[Option<ThresholdCurve>],
    weights: Option<&[f64]>,
) -> (f64, Vec<f64>) {
    let n = ds.n_bidders();
    let vprime = linear_values(thresholds);
    let mut total = KahanSum::new();
    let mut marginal: Vec<KahanSum> = vec![KahanSum::new(); n];
    let mut w_total = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    for (t, rec) in ds.records.iter().enumerate() {
        let w = weights.map(|w| w[t]).unwrap_or(1.0);
        w_total += w;
        if w == 0.0 {
            continue;
        }
        let ctx = &rec.context;
        order.sort_by(|&a, &b| {
            let wa = ctx.qualities[a] * vprime[a];
            let wb = ctx.qualities[b] * vprime[b];
            wb.partial_cmp(&wa).unwrap().then(a.cmp(&b))
        });
        let m = ctx.n_slots().min(n);
        let mut rec_value = 0.0;
        for (j, &i) in order.iter().take(m).enumerate() {
            let x = ctx.slot_ctrs[j] * ctx.qualities[i];
            rec_value += x * vprime[i];
            marginal[i].add(w * x);
        }
        total.add(w * rec_value);
    }
    let tbar1 = total.value() / w_total;
    let marginal = marginal.into_iter().map(|m| m.value() / w_total).collect();
    (tbar1, marginal)
}

/// True thresholds evaluated at the greedy policy's marginal allocation;
/// certifies how tight T̄¹ is. Never-allocated bidders contribute 0, which
/// keeps LB-T a sound lower bound.
pub fn lb_t(thresholds: &[Option<ThresholdCurve>], marginal_alloc: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for (tc, &x) in thresholds.iter().zip(marginal_alloc) {
        if let Some(tc) = tc {
            acc.add(tc.integral_clamped(x));
        }
    }
    acc.value()
}

/// Max total threshold over quality-independent assignments: weights
/// w_ij = T̂_i(mean gamma_i * mean alpha_j), solved exactly as a
/// maximum-weight bipartite matching.
pub fn tavg(ds: &AuctionDataset, thresholds: &[Option<ThresholdCurve>]) -> f64 {
    tavg_weighted(ds, thresholds, None)
}

pub(crate) fn tavg_weighted(
    ds: &AuctionDataset,
    thresholds: &[Option<ThresholdCurve>],
    weights: Option<&[f64]>,
) -> f64 {
    let n = ds.n_bidders();
    let m = ds.max_slots();
    if m == 0 {
        return 0.0;
    }
    let mean_quality: Vec<f64> = (0..n)
        .map(|i| weighted_mean_by(ds, weights, |rec| rec.context.qualities[i]))
        .collect();
    // Records missing slot j contribute alpha 0, so a fixed assignment to a
    // sometimes-absent slot is averaged correctly.
    let mean_alpha: Vec<f64> = (0..m)
        .map(|j| {
            weighted_mean_by(ds, weights, |rec| {
                rec.context.slot_ctrs.get(j).copied().unwrap_or(0.0)
            })
        })
        .collect();
    let w: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| match &thresholds[i] {
                    Some(tc) => tc.integral_clamped(mean_quality[i] * mean_alpha[j]),
                    None => 0.0,
                })
                .collect()
        })
        .collect();
    let (total, _) = max_weight_assignment(&w);
    total
}

fn weighted_mean_by<F: Fn(&crate::dataset::AuctionRecord) -> f64>(
    ds: &AuctionDataset,
    weights: Option<&[f64]>,
    f: F,
) -> f64 {
    let mut acc = KahanSum::new();
    let mut w_total = 0.0f64;
    for (t, rec) in ds.records.iter().enumerate() {
        let w = weights.map(|w| w[t]).unwrap_or(1.0);
        w_total += w;
        if w != 0.0 {
            acc.add(w * f(rec));
        }
    }
    acc.value() / w_total
}

/// All covering quantities in one pass.
pub fn compute(ds: &AuctionDataset, thresholds: &[Option<ThresholdCurve>]) -> Result<CoveringResult> {
    let totals = realized_payment_totals(ds)?;
    compute_weighted(ds, thresholds, &totals, None)
}

pub(crate) fn compute_weighted(
    ds: &AuctionDataset,
    thresholds: &[Option<ThresholdCurve>],
    realized_totals: &[f64],
    weights: Option<&[f64]>,
) -> Result<CoveringResult> {
    let revenue = weighted_mean(realized_totals, weights);
    if revenue <= 0.0 {
        return Err(Error::ZeroRevenue);
    }
    let (tbar1, marginal_alloc) = tbar1_weighted(ds, thresholds, weights);
    let tavg = tavg_weighted(ds, thresholds, weights);
    let lb_t = lb_t(thresholds, &marginal_alloc);
    Ok(CoveringResult {
        revenue,
        tbar1,
        tavg,
        lb_t,
        mu1: tbar1 / revenue,
        mu_avg: tavg / revenue,
        mu_lb: lb_t / revenue,
        marginal_alloc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{AuctionContext, BidProfile};
    use crate::dataset::AuctionRecord;

    fn dataset_from_contexts(contexts: Vec<AuctionContext>) -> AuctionDataset {
        let n = contexts[0].n_bidders();
        AuctionDataset {
            records: contexts
                .into_iter()
                .enumerate()
                .map(|(t, context)| AuctionRecord {
                    auction_id: format!("a{t}"),
                    bids: BidProfile::new(vec![0.0; n]),
                    context,
                })
                .collect(),
            bidder_ids: (0..n).map(|i| format!("b{i}")).collect(),
            bid_cap: 1.0,
            bid_cap_derived: true,
            value_cap: None,
            pricing: Default::default(),
            grid_points: None,
        }
    }

    fn constant_curve(bidder: usize, max_alloc: f64, slope: f64) -> ThresholdCurve {
        ThresholdCurve::from_steps(bidder, vec![(max_alloc, slope)])
    }

    #[test]
    fn revenue_of_single_auction() {
        let line = r#"{"auction_id":"a1","alphas":[1.0],"bidders":[{"id":"x","bid":2.0,"score":1.0,"quality":1.0},{"id":"y","bid":1.5,"score":1.0,"quality":1.0}]}"#;
        let ds = crate::dataset::load_dataset(line.as_bytes(), crate::dataset::Format::Jsonl, None)
            .unwrap();
        assert_eq!(revenue(&ds).unwrap(), 1.5);
        // Duplicating the record changes nothing.
        let mut buf = Vec::new();
        ds.write_jsonl(&mut buf).unwrap();
        let mut doubled = buf.clone();
        doubled.extend_from_slice(&buf);
        let ds2 = crate::dataset::load_dataset(
            doubled.as_slice(),
            crate::dataset::Format::Jsonl,
            Some(&ds.config()),
        )
        .unwrap();
        assert_eq!(revenue(&ds2).unwrap(), 1.5);
    }

    #[test]
    fn zero_revenue_is_an_error() {
        let line = r#"{"auction_id":"a1","alphas":[1.0],"bidders":[{"id":"x","bid":2.0,"score":1.0,"quality":1.0}]}"#;
        let ds = crate::dataset::load_dataset(line.as_bytes(), crate::dataset::Format::Jsonl, None)
            .unwrap();
        assert!(matches!(revenue(&ds), Err(Error::ZeroRevenue)));
    }

    #[test]
    fn tbar1_single_bidder() {
        // v' = 2, gamma = 0.5, alpha = [1]: T̄¹ = 1.
        let ds = dataset_from_contexts(vec![AuctionContext::simple(
            vec![1.0],
            vec![0.5],
            vec![1.0],
        )]);
        let thresholds = vec![Some(constant_curve(0, 0.5, 2.0))];
        let (t, marginal) = tbar1(&ds, &thresholds);
        assert!((t - 1.0).abs() < 1e-15);
        assert!((marginal[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tbar1_two_bidders_enumerated() {
        // v' = (1, 1), gamma = (0.9, 0.1), alpha = [1, 0.5]:
        // greedy puts bidder 0 on top: 0.9 + 0.05 = 0.95.
        let ds = dataset_from_contexts(vec![AuctionContext::simple(
            vec![1.0, 1.0],
            vec![0.9, 0.1],
            vec![1.0, 0.5],
        )]);
        let thresholds = vec![
            Some(constant_curve(0, 0.9, 1.0)),
            Some(constant_curve(1, 0.1, 1.0)),
        ];
        let (t, _) = tbar1(&ds, &thresholds);
        assert!((t - 0.95).abs() < 1e-15);
    }

    #[test]
    fn tbar1_greedy_matches_brute_force() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=3);
            let t_count = rng.gen_range(1..=4);
            let mut alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let contexts: Vec<AuctionContext> = (0..t_count)
                .map(|_| {
                    AuctionContext::simple(
                        vec![1.0; n],
                        (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                        alphas.clone(),
                    )
                })
                .collect();
            let ds = dataset_from_contexts(contexts);
            let thresholds: Vec<Option<ThresholdCurve>> = (0..n)
                .map(|i| Some(constant_curve(i, rng.gen_range(0.1..1.0), rng.gen_range(0.0..3.0))))
                .collect();
            let vprime: Vec<f64> = thresholds
                .iter()
                .map(|t| t.as_ref().unwrap().linear_slope())
                .collect();

            let (greedy, _) = tbar1(&ds, &thresholds);

            // Exhaustive per-record max over injective assignments.
            fn rec_max(j: usize, m: usize, used: &mut Vec<bool>, ctx: &AuctionContext, v: &[f64]) -> f64 {
                if j == m {
                    return 0.0;
                }
                let mut best = rec_max(j + 1, m, used, ctx, v);
                for i in 0..v.len() {
                    if !used[i] {
                        used[i] = true;
                        best = best.max(
                            ctx.slot_ctrs[j] * ctx.qualities[i] * v[i]
                                + rec_max(j + 1, m, used, ctx, v),
                        );
                        used[i] = false;
                    }
                }
                best
            }
            let brute = crate::numeric::mean_ordered(ds.records.iter().map(|r| {
                rec_max(0, m, &mut vec![false; n], &r.context, &vprime)
            }));
            assert!(
                (greedy - brute).abs() <= 1e-12 * brute.max(1.0),
                "greedy {greedy} brute {brute}"
            );
        }
    }

    #[test]
    fn tavg_single_bidder_is_threshold_at_max() {
        let ds = dataset_from_contexts(vec![AuctionContext::simple(
            vec![1.0],
            vec![0.5],
            vec![1.0],
        )]);
        let tc = constant_curve(0, 0.5, 2.0);
        let expected = tc.integral_clamped(0.5);
        let thresholds = vec![Some(tc)];
        assert_eq!(tavg(&ds, &thresholds), expected);
    }

    #[test]
    fn tavg_matches_matching_enumeration_on_2x2() {
        let ds = dataset_from_contexts(vec![AuctionContext::simple(
            vec![1.0, 1.0],
            vec![0.8, 0.6],
            vec![1.0, 0.5],
        )]);
        let t0 = constant_curve(0, 0.8, 1.5);
        let t1 = constant_curve(1, 0.6, 2.5);
        let w = |tc: &ThresholdCurve, g: f64, a: f64| tc.integral_clamped(g * a);
        let m1 = w(&t0, 0.8, 1.0) + w(&t1, 0.6, 0.5);
        let m2 = w(&t0, 0.8, 0.5) + w(&t1, 0.6, 1.0);
        let expected = m1.max(m2);
        let thresholds = vec![Some(t0), Some(t1)];
        assert!((tavg(&ds, &thresholds) - expected).abs() < 1e-15);
    }

    #[test]
    fn tavg_zero_weights_is_zero() {
        let ds = dataset_from_contexts(vec![AuctionContext::simple(
            vec![1.0, 1.0],
            vec![0.8, 0.6],
            vec![1.0, 0.5],
        )]);
        let thresholds = vec![
            Some(constant_curve(0, 0.8, 0.0)),
            Some(constant_curve(1, 0.6, 0.0)),
        ];
        assert_eq!(tavg(&ds, &thresholds), 0.0);
    }

    #[test]
    fn single_bidder_lb_t_is_tight() {
        // One bidder always assigned the top slot: marginal = x̄ and
        // LB-T = T̂(x̄) = T̄¹ (the linear bound is exact at the endpoint).
        let ds = dataset_from_contexts(vec![
            AuctionContext::simple(vec![1.0], vec![0.5], vec![1.0]),
            AuctionContext::simple(vec![1.0], vec![0.7], vec![1.0]),
        ]);
        let tc = ThresholdCurve::from_steps(0, vec![(0.3, 0.5), (0.6, 2.0)]);
        let thresholds = vec![Some(tc)];
        let (t1, marginal) = tbar1(&ds, &thresholds);
        let lb = lb_t(&thresholds, &marginal);
        assert!((marginal[0] - 0.6).abs() < 1e-15);
        assert!((lb - t1).abs() < 1e-12);
    }

    #[test]
    fn strictly_convex_thresholds_make_lb_t_strictly_smaller() {
        // Two bidders competing for one slot with strictly convex T̂: the
        // greedy policy mixes across records, so the true thresholds at the
        // mixed marginal fall below the linearized bound.
        let ds = dataset_from_contexts(vec![
            AuctionContext::simple(vec![1.0, 1.0], vec![0.9, 0.3], vec![1.0]),
            AuctionContext::simple(vec![1.0, 1.0], vec![0.2, 0.8], vec![1.0]),
        ]);
        let t0 = ThresholdCurve::from_steps(0, vec![(0.3, 0.1), (0.55, 3.0)]);
        let t1 = ThresholdCurve::from_steps(1, vec![(0.3, 0.1), (0.55, 3.0)]);
        let thresholds = vec![Some(t0), Some(t1)];
        let (t1v, marginal) = tbar1(&ds, &thresholds);
        let lb = lb_t(&thresholds, &marginal);
        assert!(lb < t1v - 1e-9, "lb {lb} should be strictly below tbar1 {t1v}");
    }

    #[test]
    fn lb_t_never_exceeds_tbar1_on_random_instances() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(1..=4);
            let t_count = rng.gen_range(1..=6);
            let mut alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let contexts: Vec<AuctionContext> = (0..t_count)
                .map(|_| {
                    AuctionContext::simple(
                        vec![1.0; n],
                        (0..n).map(|_| rng.gen_range(0.0..1.0)).collect(),
                        alphas.clone(),
                    )
                })
                .collect();
            let ds = dataset_from_contexts(contexts);
            // Random convex staircases reaching each bidder's x̄.
            let thresholds: Vec<Option<ThresholdCurve>> = (0..n)
                .map(|i| {
                    let xbar = crate::thresholds::max_allocation(&ds, i);
                    if xbar <= 0.0 {
                        return None;
                    }
                    let k = rng.gen_range(1..=3);
                    let mut zs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0) * xbar).collect();
                    zs.push(xbar);
                    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    zs.dedup();
                    let mut tau = 0.0;
                    let steps: Vec<(f64, f64)> = zs
                        .into_iter()
                        .map(|z| {
                            tau += rng.gen_range(0.0..2.0);
                            (z, tau)
                        })
                        .collect();
                    Some(ThresholdCurve::from_steps(i, steps))
                })
                .collect();
            let (t1, marginal) = tbar1(&ds, &thresholds);
            let lb = lb_t(&thresholds, &marginal);
            assert!(lb <= t1 + 1e-9 * t1.max(1.0), "lb {lb} tbar1 {t1}");
        }
    }
}
