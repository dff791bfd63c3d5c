//! Seeded synthetic dataset generators with known ground truth, used to
//! validate the pipeline end to end: a single-slot first-price auction at
//! its symmetric equilibrium (bids = v(n−1)/n under uniform values), GSP
//! with fixed-value multiplicative-weights learners, and a common-shock
//! correlated-bid generator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auction::{AuctionContext, BidProfile, Pricing, opt_assignment, run_gsp};
use crate::dataset::{AuctionDataset, AuctionRecord};
use crate::error::{Error, Result};
use crate::numeric::mean_ordered;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Single-slot first-price auction at the symmetric BNE.
    FpaBne,
    /// GSP with multiplicative-weights learners and fixed values.
    GspLearning,
    /// Common-shock correlated bids, no ground-truth values.
    Correlated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum ValueSpec {
    /// i.i.d. uniform on [0, hi) per auction (FPA) or drawn once per bidder
    /// (learning).
    Uniform { hi: f64 },
    /// Fixed per-bidder values.
    Fixed { values: Vec<f64> },
}

impl Default for ValueSpec {
    fn default() -> Self {
        ValueSpec::Uniform { hi: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum QualitySpec {
    #[default]
    One,
    /// i.i.d. uniform on [lo, hi) per bidder per auction.
    Uniform { lo: f64, hi: f64 },
    /// Fixed per-bidder qualities.
    Fixed { qualities: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Arms per learner: a linear bid grid on [0, v_i].
    pub grid_points: usize,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self { grid_points: 25 }
    }
}

fn default_alphas() -> Vec<f64> {
    vec![1.0]
}

fn default_bid_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: GeneratorKind,
    pub n_bidders: usize,
    pub n_auctions: usize,
    #[serde(default)]
    pub values: ValueSpec,
    #[serde(default)]
    pub quality: QualitySpec,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub reserve: f64,
    /// Common-shock weight omega in [0, 1] (correlated kind).
    #[serde(default)]
    pub correlation: f64,
    /// Scale of the uniform shocks for the correlated kind.
    #[serde(default = "default_bid_scale")]
    pub bid_scale: f64,
    #[serde(default)]
    pub learner: LearnerConfig,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.n_bidders < 1 {
            return Err(Error::Spec("need at least one bidder".into()));
        }
        if self.n_auctions < 1 {
            return Err(Error::Spec("need at least one auction".into()));
        }
        if self.alphas.is_empty() || self.alphas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Spec("alphas must be non-increasing and non-empty".into()));
        }
        if !(0.0..=1.0).contains(&self.correlation) {
            return Err(Error::Spec("correlation must lie in [0, 1]".into()));
        }
        if let ValueSpec::Fixed { values } = &self.values {
            if values.len() != self.n_bidders {
                return Err(Error::Spec("fixed values must cover every bidder".into()));
            }
        }
        if let QualitySpec::Fixed { qualities } = &self.quality {
            if qualities.len() != self.n_bidders {
                return Err(Error::Spec("fixed qualities must cover every bidder".into()));
            }
        }
        Ok(())
    }

    fn qualities(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.quality {
            QualitySpec::One => vec![1.0; self.n_bidders],
            QualitySpec::Uniform { lo, hi } => {
                (0..self.n_bidders).map(|_| rng.gen_range(*lo..*hi)).collect()
            }
            QualitySpec::Fixed { qualities } => qualities.clone(),
        }
    }
}

/// Known per-auction values and welfare for a generated dataset.
#[derive(Debug, Clone, Serialize)]
pub struct GroundTruth {
    /// values[t][i].
    pub values: Vec<Vec<f64>>,
    pub opt_welfare: Vec<f64>,
    pub realized_welfare: Vec<f64>,
    pub mean_opt: f64,
    pub mean_realized: f64,
    /// mean realized / mean OPT, in [0, 1].
    pub ratio: f64,
    /// Average per-round regret per bidder against the best fixed arm on
    /// the learner's own grid (learning kind only).
    pub learner_regret: Option<Vec<f64>>,
    pub learner_eta: Option<f64>,
}

impl GroundTruth {
    fn from_outcomes(values: Vec<Vec<f64>>, opt: Vec<f64>, realized: Vec<f64>) -> Self {
        let mean_opt = mean_ordered(opt.iter().copied());
        let mean_realized = mean_ordered(realized.iter().copied());
        let ratio = if mean_opt > 0.0 { mean_realized / mean_opt } else { 1.0 };
        Self {
            values,
            opt_welfare: opt,
            realized_welfare: realized,
            mean_opt,
            mean_realized,
            ratio,
            learner_regret: None,
            learner_eta: None,
        }
    }
}

/// Dispatch on the generator kind.
pub fn generate(spec: &SynthSpec) -> Result<(AuctionDataset, Option<GroundTruth>)> {
    match spec.kind {
        GeneratorKind::FpaBne => gen_fpa_bne(spec).map(|(d, g)| (d, Some(g))),
        GeneratorKind::GspLearning => gen_gsp_learning(spec).map(|(d, g)| (d, Some(g))),
        GeneratorKind::Correlated => gen_correlated(spec).map(|d| (d, None)),
    }
}

fn bidder_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("b{i}")).collect()
}

fn make_dataset(
    spec: &SynthSpec,
    records: Vec<AuctionRecord>,
    bid_cap: f64,
    value_cap: Option<f64>,
    pricing: Pricing,
) -> AuctionDataset {
    AuctionDataset {
        records,
        bidder_ids: bidder_ids(spec.n_bidders),
        bid_cap,
        bid_cap_derived: false,
        value_cap,
        pricing,
        grid_points: None,
    }
}

/// Symmetric first-price BNE with uniform values: bids b = v(n−1)/n. The
/// equilibrium is efficient under equal qualities, so the realized/OPT
/// ratio is exactly 1 there and the pipeline's bound can be checked
/// against it.
pub fn gen_fpa_bne(spec: &SynthSpec) -> Result<(AuctionDataset, GroundTruth)> {
    spec.validate()?;
    if spec.alphas.len() != 1 {
        return Err(Error::Spec("the first-price generator is single-slot".into()));
    }
    if spec.reserve != 0.0 {
        return Err(Error::Spec(
            "the closed-form first-price equilibrium assumes no reserve".into(),
        ));
    }
    let n = spec.n_bidders;
    let shade = (n as f64 - 1.0) / n as f64;
    let v_hi = match &spec.values {
        ValueSpec::Uniform { hi } => *hi,
        ValueSpec::Fixed { values } => values.iter().cloned().fold(0.0, f64::max),
    };
    if !(v_hi > 0.0) {
        return Err(Error::Spec("value scale must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.n_auctions);
    let mut values = Vec::with_capacity(spec.n_auctions);
    let mut opt = Vec::with_capacity(spec.n_auctions);
    let mut realized = Vec::with_capacity(spec.n_auctions);
    for t in 0..spec.n_auctions {
        let v: Vec<f64> = match &spec.values {
            ValueSpec::Uniform { hi } => (0..n).map(|_| rng.gen_range(0.0..*hi)).collect(),
            ValueSpec::Fixed { values } => values.clone(),
        };
        let qualities = spec.qualities(&mut rng);
        let ctx = AuctionContext::simple(vec![1.0; n], qualities, spec.alphas.clone());
        let bids: Vec<f64> = v.iter().map(|v| v * shade).collect();
        let outcome = run_gsp(&BidProfile::new(bids.clone()), &ctx, Pricing::FirstPrice)?;
        realized.push(outcome.welfare(&v));
        opt.push(opt_assignment(&v, &ctx).1);
        records.push(AuctionRecord {
            auction_id: format!("t{t}"),
            context: ctx,
            bids: BidProfile::new(bids),
        });
        values.push(v);
    }
    let ds = make_dataset(spec, records, v_hi, Some(v_hi), Pricing::FirstPrice);
    Ok((ds, GroundTruth::from_outcomes(values, opt, realized)))
}

/// GSP play by multiplicative-weights (Hedge) learners with fixed values.
/// Each round every bidder samples an arm from its current mixed strategy,
/// then updates all arms with the full-information counterfactual utility
/// against the realized opponent bids and context. The learning rate is
/// the standard sqrt(8 ln(arms) / T).
pub fn gen_gsp_learning(spec: &SynthSpec) -> Result<(AuctionDataset, GroundTruth)> {
    spec.validate()?;
    let n = spec.n_bidders;
    let t_total = spec.n_auctions;
    let arms = spec.learner.grid_points.max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let fixed_values: Vec<f64> = match &spec.values {
        ValueSpec::Uniform { hi } => (0..n).map(|_| rng.gen_range(0.0..*hi)).collect(),
        ValueSpec::Fixed { values } => values.clone(),
    };
    let eta = (8.0 * (arms as f64).ln() / t_total as f64).sqrt();
    // Per-bidder arm grids on [0, v_i] and Hedge state in log space.
    let grids: Vec<Vec<f64>> = fixed_values
        .iter()
        .map(|v| (0..arms).map(|l| v * l as f64 / (arms - 1) as f64).collect())
        .collect();
    let mut log_w = vec![vec![0.0f64; arms]; n];
    let mut cum_arm = vec![vec![0.0f64; arms]; n];
    let mut cum_realized = vec![0.0f64; n];

    let mut records = Vec::with_capacity(t_total);
    let mut opt = Vec::with_capacity(t_total);
    let mut realized = Vec::with_capacity(t_total);
    let mut bids = vec![0.0f64; n];
    for t in 0..t_total {
        let qualities = spec.qualities(&mut rng);
        let ctx = AuctionContext {
            reserve: spec.reserve,
            mainline_reserve: spec.reserve,
            ..AuctionContext::simple(vec![1.0; n], qualities, spec.alphas.clone())
        };
        // Sample arms from the mixed strategies, bidder order fixed.
        for i in 0..n {
            let max_lw = log_w[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = log_w[i].iter().map(|lw| (lw - max_lw).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut draw = rng.gen_range(0.0..total);
            let mut arm = arms - 1;
            for (l, w) in weights.iter().enumerate() {
                if draw < *w {
                    arm = l;
                    break;
                }
                draw -= w;
            }
            bids[i] = grids[i][arm];
        }
        let outcome = run_gsp(&BidProfile::new(bids.clone()), &ctx, Pricing::Gsp)?;
        realized.push(outcome.welfare(&fixed_values));
        opt.push(opt_assignment(&fixed_values, &ctx).1);
        for i in 0..n {
            cum_realized[i] +=
                fixed_values[i] * outcome.allocation[i] - outcome.payment[i];
        }
        // Full-information update: utility of every arm against the
        // realized opponent bids in this round's context.
        let mut probe = bids.clone();
        for i in 0..n {
            let scale = fixed_values[i].max(1e-12);
            for l in 0..arms {
                probe[i] = grids[i][l];
                let o = run_gsp(&BidProfile::new(probe.clone()), &ctx, Pricing::Gsp)?;
                let u = fixed_values[i] * o.allocation[i] - o.payment[i];
                cum_arm[i][l] += u;
                log_w[i][l] += eta * u / scale;
            }
            probe[i] = bids[i];
        }
        records.push(AuctionRecord {
            auction_id: format!("t{t}"),
            context: ctx,
            bids: BidProfile::new(bids.clone()),
        });
    }
    let v_max = fixed_values.iter().cloned().fold(0.0, f64::max);
    let cap = (v_max * 1.25).max(1e-6);
    let ds = make_dataset(spec, records, cap, Some(cap), Pricing::Gsp);
    let values = vec![fixed_values; t_total];
    let mut gt = GroundTruth::from_outcomes(values, opt, realized);
    gt.learner_regret = Some(
        (0..n)
            .map(|i| {
                let best = cum_arm[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (best - cum_realized[i]) / t_total as f64
            })
            .collect(),
    );
    gt.learner_eta = Some(eta);
    Ok((ds, gt))
}

/// Correlated bids through a common shock: bid_{i,t} = w z_t + (1−w) e_{i,t}
/// with z and e uniform on [0, bid_scale). No ground-truth values exist.
pub fn gen_correlated(spec: &SynthSpec) -> Result<AuctionDataset> {
    spec.validate()?;
    if !(spec.bid_scale > 0.0) {
        return Err(Error::Spec("bid_scale must be positive".into()));
    }
    let n = spec.n_bidders;
    let w = spec.correlation;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(spec.n_auctions);
    for t in 0..spec.n_auctions {
        let z: f64 = rng.gen_range(0.0..spec.bid_scale);
        let bids: Vec<f64> = (0..n)
            .map(|_| w * z + (1.0 - w) * rng.gen_range(0.0..spec.bid_scale))
            .collect();
        let qualities = spec.qualities(&mut rng);
        let ctx = AuctionContext {
            reserve: spec.reserve,
            mainline_reserve: spec.reserve,
            ..AuctionContext::simple(vec![1.0; n], qualities, spec.alphas.clone())
        };
        records.push(AuctionRecord {
            auction_id: format!("t{t}"),
            context: ctx,
            bids: BidProfile::new(bids),
        });
    }
    Ok(make_dataset(spec, records, spec.bid_scale, None, Pricing::Gsp))
}
