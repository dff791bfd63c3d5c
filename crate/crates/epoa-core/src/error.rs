//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An `AuctionContext` violates its invariants.
    #[error("malformed auction context: {0}")]
    MalformedContext(String),

    /// Input stream failed to parse.
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// A record violates a dataset invariant.
    #[error("validation error in record '{record_id}': {reason}")]
    Validation { record_id: String, reason: String },

    /// The bid cap cannot guarantee top rank for this bidder, so the
    /// estimated allocation curve never reaches the maximum marginal
    /// allocation and every downstream upper bound would be silently wrong.
    #[error("bid cap too low for bidder '{bidder}': alloc at cap {observed} < max alloc {required}")]
    BidCapTooLow {
        bidder: String,
        observed: f64,
        required: f64,
    },

    /// A bidder is never allocated at any counterfactual bid.
    #[error("bidder '{0}' is never allocated at any grid bid")]
    NeverAllocated(String),

    /// Threshold integral evaluated beyond the maximum allocation.
    #[error("allocation {x} exceeds max allocation {max} beyond tolerance")]
    OutOfRange { x: f64, max: f64 },

    /// Revenue is zero, so the revenue-covering parameter is undefined.
    #[error("dataset revenue is zero; revenue covering is undefined")]
    ZeroRevenue,

    #[error("rho requires mu > 0, got {0}")]
    NonPositiveMu(f64),

    /// Concentration bound called outside its domain.
    #[error("concentration bound requires k >= 1 and mu > 0, got mu={mu}, k={k}")]
    Domain { mu: f64, k: f64 },

    /// No bidder is ever allocated, so value covering is vacuous.
    #[error("no bidder is ever allocated; value covering is undefined")]
    EmptyBidderSet,

    /// A synthetic-generator spec is inconsistent.
    #[error("invalid generator spec: {0}")]
    Spec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
