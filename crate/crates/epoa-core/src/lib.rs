//! Data-driven welfare guarantees for position auctions.
//!
//! Given a log of (bid profile, context) observations from a generalized
//! second-price auction, this crate estimates interim allocation and payment
//! curves by counterfactual simulation, converts them into threshold
//! functions, measures how well revenue covers the maximum total threshold,
//! and turns that into an empirical price-of-anarchy bound: a worst-case
//! efficiency guarantee over every value distribution and equilibrium that
//! could have produced the observed bids.
//!
//! Modules follow the pipeline order:
//! - [`auction`]: GSP mechanics and the welfare-optimal assignment oracle;
//! - [`dataset`]: log loading, validation, padding and summaries;
//! - [`interim`]: counterfactual estimation of x̂_i(b), p̂_i(b);
//! - [`thresholds`]: τ̂_i, T̂_i and the max marginal allocation;
//! - [`covering`]: R̂ev, T̄¹, T_avg, LB-T and the covering parameters μ;
//! - [`valuecover`]: ρ(μ), λ^{μ,1} and the concentration table;
//! - [`analysis`]: report assembly, bootstrap CIs, mode comparison;
//! - [`synth`]: seeded synthetic generators with known ground truth.

pub mod analysis;
pub mod auction;
pub mod covering;
pub mod dataset;
pub mod error;
pub mod interim;
pub mod matching;
pub mod numeric;
pub mod synth;
pub mod thresholds;
pub mod valuecover;

pub use error::{Error, Result};
