//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `--nocapture` to see them). Criterion 8 (CLI byte
//! determinism) lives in the CLI crate's own acceptance test target.

use std::panic::{AssertUnwindSafe, catch_unwind};
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use epoa_core::analysis::{
    AnalysisConfig, BootstrapConfig, ValueGridSpec, analyze, compare_correlation_modes,
    empirical_regrets,
};
use epoa_core::auction::{AuctionContext, BidProfile};
use epoa_core::covering;
use epoa_core::dataset::{AuctionDataset, AuctionRecord};
use epoa_core::interim::{BidGrid, EstimationMode, estimate_curves};
use epoa_core::numeric::{mean_ordered, sum_ordered};
use epoa_core::synth::{
    GeneratorKind, LearnerConfig, QualitySpec, SynthSpec, ValueSpec, gen_correlated, gen_fpa_bne,
    gen_gsp_learning,
};
use epoa_core::thresholds::all_thresholds;
use epoa_core::valuecover::{lambda_concentration, rho};

/// Run a criterion body, print its PASS/FAIL line, and enforce the stated
/// runtime budget.
fn criterion<F: FnOnce()>(number: u32, name: &str, budget: Duration, body: F) {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let pass = result.is_ok() && elapsed <= budget;
    println!(
        "ACCEPTANCE {number} ({name}): {} [{:.3}s of {:.0?} budget]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget,
    );
    if let Err(p) = result {
        std::panic::resume_unwind(p);
    }
    assert!(
        elapsed <= budget,
        "criterion {number} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

#[test]
fn criterion_1_rho_table() {
    criterion(1, "rho table regression", Duration::from_secs(5), || {
        let rows = [
            (0.5, 1.271),
            (0.75, 1.421),
            (1.0, 1.582),
            (1.25, 1.752),
            (1.5, 1.931),
            (2.0, 2.313),
            (4.0, 4.075),
            (8.0, 8.003),
        ];
        let start = Instant::now();
        let got: Vec<f64> = rows.iter().map(|(mu, _)| rho(*mu).unwrap()).collect();
        let eval_time = start.elapsed();
        for ((mu, expected), got) in rows.iter().zip(got) {
            assert!(
                (got - expected).abs() <= 0.002,
                "rho({mu}) = {got}, table says {expected}"
            );
        }
        assert!(eval_time < Duration::from_millis(1), "rho too slow: {eval_time:?}");
    });
}

#[test]
fn criterion_2_concentration_table() {
    criterion(2, "concentration table regression", Duration::from_secs(5), || {
        // All rows with mu >= 1, columns k in {2, 4, 10, 100}.
        let table: [(f64, [f64; 4]); 6] = [
            (1.0, [1.302, 1.163, 1.072, 1.009]),
            (1.25, [1.506, 1.382, 1.304, 1.256]),
            (1.5, [1.717, 1.61, 1.545, 1.505]),
            (2.0, [2.157, 2.079, 2.032, 2.003]),
            (4.0, [4.037, 4.019, 4.007, 4.001]),
            (8.0, [8.001, 8.001, 8.0, 8.0]),
        ];
        let ks = [2.0, 4.0, 10.0, 100.0];
        let start = Instant::now();
        for (mu, row) in table {
            for (k, expected) in ks.iter().zip(row) {
                let got = lambda_concentration(mu, *k).unwrap();
                assert!(
                    (got - expected).abs() <= 0.003,
                    "poa(mu={mu}, k={k}) = {got}, table says {expected}"
                );
            }
        }
        // The k = 1 column reduces to rho(mu).
        for mu in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let got = lambda_concentration(mu, 1.0).unwrap();
            let want = rho(mu).unwrap().max(1.0);
            assert!(
                (got - want).abs() <= 0.002,
                "poa(mu={mu}, k=1) = {got} vs rho = {want}"
            );
        }
        let eval_time = start.elapsed();
        assert!(
            eval_time < Duration::from_millis(100),
            "table evaluation too slow: {eval_time:?}"
        );
    });
}

/// Sponsored-search-like synthetic log: more bidders than slots, steeply
/// decaying slot CTRs, stable per-bidder base bids with small
/// multiplicative jitter, widely varying per-auction qualities, and an
/// occasional reserve. This mirrors the regime the covering certificates
/// are designed for.
fn stable_bidder_dataset(seed: u64, t_count: usize) -> AuctionDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let m = rng.gen_range(1..=(n - 2).min(4));
    let mut alphas = Vec::with_capacity(m);
    let mut a = rng.gen_range(0.7..1.0);
    for _ in 0..m {
        alphas.push(a);
        a *= rng.gen_range(0.25..0.7);
    }
    let base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.0)).collect();
    let jitter = rng.gen_range(0.02..0.08);
    let reserve = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.25) } else { 0.0 };
    let glo = rng.gen_range(0.05..0.2);
    let records = (0..t_count)
        .map(|t| {
            let bids: Vec<f64> = base
                .iter()
                .map(|b| b * (1.0 + jitter * rng.gen_range(-1.0..1.0)))
                .collect();
            let qualities: Vec<f64> = (0..n).map(|_| rng.gen_range(glo..1.0)).collect();
            AuctionRecord {
                auction_id: format!("t{t}"),
                context: AuctionContext {
                    reserve,
                    mainline_reserve: reserve,
                    ..AuctionContext::simple(vec![1.0; n], qualities, alphas.clone())
                },
                bids: BidProfile::new(bids),
            }
        })
        .collect();
    AuctionDataset {
        records,
        bidder_ids: (0..n).map(|i| format!("b{i}")).collect(),
        bid_cap: 1.5,
        bid_cap_derived: false,
        value_cap: None,
        pricing: Default::default(),
        grid_points: None,
    }
}

#[test]
fn criterion_3_ordering_chain() {
    criterion(3, "ordering chain T_avg <= LB-T <= Tbar1", Duration::from_secs(60), || {
        for trial in 0..200u64 {
            let ds = stable_bidder_dataset(1000 + trial, 500);
            let grid = BidGrid::geometric(ds.bid_cap, 60);
            let curves = estimate_curves(&ds, &grid, EstimationMode::Joint, 0, 0).unwrap();
            let (thresholds, _) = all_thresholds(&ds, &curves);
            let cov = covering::compute(&ds, &thresholds).unwrap();
            let tol = 1e-9 * cov.tbar1.abs().max(1e-12);
            assert!(
                cov.tavg <= cov.lb_t + tol,
                "trial {trial}: tavg {} > lb_t {}",
                cov.tavg,
                cov.lb_t
            );
            assert!(
                cov.lb_t <= cov.tbar1 + tol,
                "trial {trial}: lb_t {} > tbar1 {}",
                cov.lb_t,
                cov.tbar1
            );
        }
    });
}

#[test]
fn criterion_4_oracle_equivalence() {
    criterion(4, "greedy/matching vs brute force", Duration::from_secs(10), || {
        let mut meta = ChaCha8Rng::seed_from_u64(77);
        for trial in 0..100 {
            // Small instances with pipeline-built thresholds.
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + trial);
            let n = rng.gen_range(2..=4);
            let m = rng.gen_range(1..=3);
            let mut alphas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            alphas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let t_count = 30;
            let records: Vec<AuctionRecord> = (0..t_count)
                .map(|t| AuctionRecord {
                    auction_id: format!("t{t}"),
                    context: AuctionContext::simple(
                        vec![1.0; n],
                        (0..n).map(|_| rng.gen_range(0.05..1.0)).collect(),
                        alphas.clone(),
                    ),
                    bids: BidProfile::new(
                        base.iter().map(|b| b * rng.gen_range(0.7..1.3)).collect(),
                    ),
                })
                .collect();
            let ds = AuctionDataset {
                records,
                bidder_ids: (0..n).map(|i| format!("b{i}")).collect(),
                bid_cap: 1.5,
                bid_cap_derived: false,
                value_cap: None,
                pricing: Default::default(),
                grid_points: None,
            };
            let grid = BidGrid::geometric(ds.bid_cap, meta.gen_range(20..40));
            let curves = estimate_curves(&ds, &grid, EstimationMode::Joint, 0, 0).unwrap();
            let (thresholds, _) = all_thresholds(&ds, &curves);

            // tbar1 greedy vs exhaustive per-record assignment max.
            let (greedy, _) = covering::tbar1(&ds, &thresholds);
            let vprime: Vec<f64> = thresholds
                .iter()
                .map(|t| t.as_ref().map(|t| t.linear_slope()).unwrap_or(0.0))
                .collect();
            let brute = mean_ordered(ds.records.iter().map(|r| {
                assignment_max(&r.context.slot_ctrs, |i, j| {
                    r.context.slot_ctrs[j] * r.context.qualities[i] * vprime[i]
                }, n)
            }));
            assert!(
                (greedy - brute).abs() <= 1e-12 * brute.abs().max(1.0),
                "trial {trial}: tbar1 greedy {greedy} != brute {brute}"
            );

            // tavg matching vs exhaustive matching enumeration, using the
            // same weighted means the implementation uses.
            let tavg = covering::tavg(&ds, &thresholds);
            let mean_quality: Vec<f64> = (0..n)
                .map(|i| mean_ordered(ds.records.iter().map(|r| r.context.qualities[i])))
                .collect();
            let mean_alpha: Vec<f64> = (0..m)
                .map(|j| {
                    mean_ordered(ds.records.iter().map(|r| {
                        r.context.slot_ctrs.get(j).copied().unwrap_or(0.0)
                    }))
                })
                .collect();
            let weight = |i: usize, j: usize| -> f64 {
                match &thresholds[i] {
                    Some(tc) => tc.integral_clamped(mean_quality[i] * mean_alpha[j]),
                    None => 0.0,
                }
            };
            let brute_avg = assignment_max(&mean_alpha, weight, n);
            assert!(
                (tavg - brute_avg).abs() <= 1e-12 * brute_avg.abs().max(1.0),
                "trial {trial}: tavg {tavg} != brute {brute_avg}"
            );
        }
    });
}

/// Exhaustive max over injective assignments of slots to bidders.
fn assignment_max<F: Fn(usize, usize) -> f64 + Copy>(slots: &[f64], weight: F, n: usize) -> f64 {
    fn rec<F: Fn(usize, usize) -> f64 + Copy>(
        j: usize,
        m: usize,
        n: usize,
        used: &mut Vec<bool>,
        weight: F,
    ) -> f64 {
        if j == m {
            return 0.0;
        }
        let mut best = rec(j + 1, m, n, used, weight);
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                best = best.max(weight(i, j) + rec(j + 1, m, n, used, weight));
                used[i] = false;
            }
        }
        best
    }
    rec(0, slots.len(), n, &mut vec![false; n], weight)
}

fn plain_config(grid_points: usize) -> AnalysisConfig {
    AnalysisConfig {
        grid_points,
        mode: EstimationMode::Joint,
        mc_profiles: 100,
        seed: 0,
        value_grid: ValueGridSpec::default(),
        conc_k: None,
        bootstrap: None,
        grid_sensitivity: false,
    }
}

#[test]
fn criterion_5_bound_validity() {
    criterion(5, "welfare bound validity", Duration::from_secs(300), || {
        // 20 first-price equilibrium datasets: equal qualities make the
        // equilibrium efficient, so realized/OPT is exactly 1 and any
        // bound >= 1 must respect it; the run still exercises the whole
        // pipeline on first-price counterfactuals.
        for (n, seed) in [2usize, 3, 5]
            .iter()
            .flat_map(|&n| (0..7u64).map(move |s| (n, s)))
            .take(20)
        {
            let (ds, gt) = gen_fpa_bne(&SynthSpec {
                kind: GeneratorKind::FpaBne,
                n_bidders: n,
                n_auctions: 2000,
                values: ValueSpec::Uniform { hi: 1.0 },
                quality: QualitySpec::One,
                alphas: vec![1.0],
                reserve: 0.0,
                correlation: 0.0,
                bid_scale: 1.0,
                learner: LearnerConfig::default(),
                seed: 40 + seed,
            })
            .unwrap();
            let report = analyze(&ds, &plain_config(80)).unwrap();
            assert!(
                gt.ratio >= 1.0 / report.epoa_final - 1e-9,
                "fpa n={n} seed={seed}: ratio {} below 1/bound {}",
                gt.ratio,
                1.0 / report.epoa_final
            );
        }

        // 10 GSP no-regret datasets with fixed values: the bound must hold
        // up to the measured per-bidder regret, with the candidate-value
        // grid containing the true values.
        for seed in 0..10u64 {
            let n = 2 + (seed % 2) as usize;
            let (ds, gt) = gen_gsp_learning(&SynthSpec {
                kind: GeneratorKind::GspLearning,
                n_bidders: n,
                n_auctions: 5000,
                values: ValueSpec::Uniform { hi: 1.0 },
                quality: QualitySpec::Uniform { lo: 0.3, hi: 1.0 },
                alphas: if n == 2 { vec![1.0] } else { vec![1.0, 0.5] },
                reserve: 0.0,
                correlation: 0.0,
                bid_scale: 1.0,
                learner: LearnerConfig { grid_points: 21 },
                seed: 70 + seed,
            })
            .unwrap();
            let grid_points = 80;
            let config = AnalysisConfig {
                value_grid: ValueGridSpec {
                    extra: gt.values[0].clone(),
                    ..ValueGridSpec::default()
                },
                ..plain_config(grid_points)
            };
            let report = analyze(&ds, &config).unwrap();
            let grid = BidGrid::geometric(ds.bid_cap, grid_points);
            let curves = estimate_curves(&ds, &grid, EstimationMode::Joint, 0, 0).unwrap();
            let regrets = empirical_regrets(&ds, &curves, &gt.values).unwrap();
            let eps_regret = sum_ordered(regrets.iter().copied()) / gt.mean_opt;
            assert!(
                gt.ratio >= 1.0 / report.epoa_final - eps_regret - 1e-9,
                "learning seed={seed}: ratio {} below 1/bound {} - eps {}",
                gt.ratio,
                1.0 / report.epoa_final,
                eps_regret
            );
        }
    });
}

#[test]
fn criterion_6_correlation_ordering() {
    criterion(6, "correlation-mode ordering", Duration::from_secs(600), || {
        let mut holds = 0;
        for seed in 0..20u64 {
            let ds = gen_correlated(&SynthSpec {
                kind: GeneratorKind::Correlated,
                n_bidders: 3,
                n_auctions: 2000,
                values: ValueSpec::Uniform { hi: 1.0 },
                quality: QualitySpec::Uniform { lo: 0.25, hi: 1.0 },
                alphas: vec![1.0, 0.5],
                reserve: 0.0,
                correlation: 0.7,
                bid_scale: 1.0,
                learner: LearnerConfig::default(),
                seed: 100 + seed,
            })
            .unwrap();
            let cmp = compare_correlation_modes(
                &ds,
                &AnalysisConfig {
                    seed,
                    bootstrap: Some(BootstrapConfig {
                        replicates: 48,
                        level: 0.9,
                        seed: seed ^ 0xABCD,
                    }),
                    ..plain_config(60)
                },
            )
            .unwrap();
            if cmp.ordering_holds {
                holds += 1;
            }
        }
        assert!(holds >= 18, "ordering held in only {holds}/20 seeds");
    });
}

#[test]
fn criterion_7_convergence_trend() {
    criterion(7, "bootstrap CI width shrinks with T", Duration::from_secs(600), || {
        let mut widths_by_t: Vec<Vec<f64>> = vec![Vec::new(); 3];
        for seed in 0..5u64 {
            for (t_idx, t) in [100usize, 1000, 10000].into_iter().enumerate() {
                let ds = gen_correlated(&SynthSpec {
                    kind: GeneratorKind::Correlated,
                    n_bidders: 3,
                    n_auctions: t,
                    values: ValueSpec::Uniform { hi: 1.0 },
                    quality: QualitySpec::Uniform { lo: 0.25, hi: 1.0 },
                    alphas: vec![1.0, 0.5],
                    reserve: 0.0,
                    correlation: 0.3,
                    bid_scale: 1.0,
                    learner: LearnerConfig::default(),
                    seed: 500 + seed,
                })
                .unwrap();
                let report = analyze(
                    &ds,
                    &AnalysisConfig {
                        seed,
                        bootstrap: Some(BootstrapConfig {
                            replicates: 200,
                            level: 0.9,
                            seed: seed ^ 0x5EED,
                        }),
                        ..plain_config(60)
                    },
                )
                .unwrap();
                let ci = report.ci("mu1").unwrap();
                widths_by_t[t_idx].push(ci.upper - ci.lower);
            }
        }
        let median = |xs: &[f64]| {
            let mut xs = xs.to_vec();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs[xs.len() / 2]
        };
        let medians: Vec<f64> = widths_by_t.iter().map(|w| median(w)).collect();
        assert!(
            medians[0] > medians[1] && medians[1] > medians[2],
            "median CI widths not strictly decreasing across T: {medians:?}"
        );
    });
}

#[test]
fn criterion_9_out_of_scope_note() {
    // The eleven proprietary search-phrase rows and the statistical
    // theorems' constants cannot be reproduced from public data; criteria
    // 3-8 substitute property-based checks for them.
    println!("ACCEPTANCE 9 (proprietary table rows): N/A (excluded by design)");
}
