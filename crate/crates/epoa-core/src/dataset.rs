//! Auction-log loading, validation and summaries. A dataset holds the
//! empirical bid and context distributions that every estimator consumes:
//! a stable bidder roster, one dense record per auction (absent bidders
//! padded), the bid cap and the analysis configuration that travels with
//! the data.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::auction::{AuctionContext, AuctionOutcome, BidProfile, Pricing, run_gsp};
use crate::error::{Error, Result};
use crate::numeric::{KahanSum, mean_ordered};

/// One observed auction: context parameters plus the realized bid profile,
/// both dense over the dataset roster.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionRecord {
    pub auction_id: String,
    pub context: AuctionContext,
    pub bids: BidProfile,
}

/// Dataset-level configuration (sidecar JSON). All fields optional; the
/// CSV format additionally needs the shared context fields since rows
/// carry only per-bidder data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Hard upper bound on bids. Derived from the data when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bid_cap: Option<f64>,
    /// Hard upper bound on bidder values for the value-covering search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_cap: Option<f64>,
    /// Payment rule the log was generated under.
    #[serde(default)]
    pub pricing: Pricing,
    /// Default bid-grid resolution for this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Shared slot CTRs (required for CSV input).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mainline_reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mainline_slots: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mainline_cap: Option<usize>,
}

/// The empirical distributions: T records over a stable roster of n bidders.
#[derive(Debug, Clone, PartialEq)]
pub struct AuctionDataset {
    pub records: Vec<AuctionRecord>,
    pub bidder_ids: Vec<String>,
    /// Bid cap B; every observed bid is <= B.
    pub bid_cap: f64,
    /// True when the cap was derived from the data rather than configured.
    pub bid_cap_derived: bool,
    pub value_cap: Option<f64>,
    pub pricing: Pricing,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonBidder {
    id: String,
    bid: f64,
    score: f64,
    quality: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    auction_id: String,
    alphas: Vec<f64>,
    #[serde(default)]
    reserve: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mainline_reserve: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    mainline_slots: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mainline_cap: Option<usize>,
    bidders: Vec<JsonBidder>,
}

/// A record as parsed, before roster padding.
struct SparseRecord {
    auction_id: String,
    alphas: Vec<f64>,
    reserve: f64,
    mainline_reserve: f64,
    mainline_slots: Vec<usize>,
    mainline_cap: usize,
    bidders: Vec<JsonBidder>,
}

impl SparseRecord {
    fn from_json(r: JsonRecord) -> Self {
        let mainline_reserve = r.mainline_reserve.unwrap_or(r.reserve);
        let mainline_cap = r.mainline_cap.unwrap_or(r.mainline_slots.len());
        Self {
            auction_id: r.auction_id,
            alphas: r.alphas,
            reserve: r.reserve,
            mainline_reserve,
            mainline_slots: r.mainline_slots,
            mainline_cap,
            bidders: r.bidders,
        }
    }
}

/// Load a dataset from `source`. Record order is preserved (all estimators
/// iterate in this order), the roster is built in order of first appearance,
/// and absent bidders are padded with bid 0 and their dataset-wide mean
/// score/quality.
pub fn load_dataset<R: Read>(
    source: R,
    format: Format,
    config: Option<&DatasetConfig>,
) -> Result<AuctionDataset> {
    let sparse = match format {
        Format::Jsonl => parse_jsonl(source)?,
        Format::Csv => parse_csv(source, config)?,
    };
    let default_cfg = DatasetConfig::default();
    let cfg = config.unwrap_or(&default_cfg);
    build_dataset(sparse, cfg)
}

fn parse_jsonl<R: Read>(source: R) -> Result<Vec<SparseRecord>> {
    let reader = BufReader::new(source);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        out.push(SparseRecord::from_json(rec));
    }
    Ok(out)
}

fn parse_csv<R: Read>(source: R, config: Option<&DatasetConfig>) -> Result<Vec<SparseRecord>> {
    let cfg = config.ok_or_else(|| Error::Parse {
        line: 0,
        reason: "csv input requires a config with shared alphas/reserves".into(),
    })?;
    let alphas = cfg.alphas.clone().ok_or_else(|| Error::Parse {
        line: 0,
        reason: "csv input requires `alphas` in the config".into(),
    })?;
    let reserve = cfg.reserve.unwrap_or(0.0);
    let mainline_reserve = cfg.mainline_reserve.unwrap_or(reserve);
    let mainline_slots = cfg.mainline_slots.clone().unwrap_or_default();
    let mainline_cap = cfg.mainline_cap.unwrap_or(mainline_slots.len());

    let mut reader = csv::ReaderBuilder::new().from_reader(source);
    let mut order: Vec<String> = Vec::new();
    let mut by_auction: HashMap<String, Vec<JsonBidder>> = HashMap::new();
    for (idx, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: idx + 2, // header is line 1
            reason: e.to_string(),
        })?;
        if !by_auction.contains_key(&row.auction_id) {
            order.push(row.auction_id.clone());
        }
        by_auction.entry(row.auction_id.clone()).or_default().push(JsonBidder {
            id: row.bidder_id,
            bid: row.bid,
            score: row.score,
            quality: row.quality,
        });
    }
    Ok(order
        .into_iter()
        .map(|auction_id| {
            let bidders = by_auction.remove(&auction_id).unwrap();
            SparseRecord {
                auction_id,
                alphas: alphas.clone(),
                reserve,
                mainline_reserve,
                mainline_slots: mainline_slots.clone(),
                mainline_cap,
                bidders,
            }
        })
        .collect())
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    auction_id: String,
    bidder_id: String,
    bid: f64,
    score: f64,
    quality: f64,
}

fn build_dataset(sparse: Vec<SparseRecord>, cfg: &DatasetConfig) -> Result<AuctionDataset> {
    if sparse.is_empty() {
        return Err(Error::Validation {
            record_id: "<dataset>".into(),
            reason: "dataset must contain at least one record".into(),
        });
    }

    // Roster in order of first appearance.
    let mut roster: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for rec in &sparse {
        for b in &rec.bidders {
            if !index.contains_key(&b.id) {
                index.insert(b.id.clone(), roster.len());
                roster.push(b.id.clone());
            }
        }
    }
    let n = roster.len();

    // Dataset-wide mean score/quality per bidder, used to pad absences.
    let mut score_sum = vec![KahanSum::new(); n];
    let mut quality_sum = vec![KahanSum::new(); n];
    let mut seen = vec![0usize; n];
    for rec in &sparse {
        for b in &rec.bidders {
            let i = index[&b.id];
            score_sum[i].add(b.score);
            quality_sum[i].add(b.quality);
            seen[i] += 1;
        }
    }
    let mean_score: Vec<f64> = (0..n).map(|i| score_sum[i].value() / seen[i] as f64).collect();
    let mean_quality: Vec<f64> =
        (0..n).map(|i| quality_sum[i].value() / seen[i] as f64).collect();

    let mut records = Vec::with_capacity(sparse.len());
    for rec in sparse {
        let mut scores = mean_score.clone();
        let mut qualities = mean_quality.clone();
        let mut bids = vec![0.0; n];
        let mut present = vec![false; n];
        for b in &rec.bidders {
            let i = index[&b.id];
            if present[i] {
                return Err(Error::Validation {
                    record_id: rec.auction_id.clone(),
                    reason: format!("bidder '{}' appears twice", b.id),
                });
            }
            present[i] = true;
            scores[i] = b.score;
            qualities[i] = b.quality;
            bids[i] = b.bid;
        }
        for (i, b) in bids.iter().enumerate() {
            if !(*b >= 0.0) {
                return Err(Error::Validation {
                    record_id: rec.auction_id.clone(),
                    reason: format!("negative bid {} for bidder '{}'", b, roster[i]),
                });
            }
            if let Some(cap) = cfg.bid_cap {
                if *b > cap {
                    return Err(Error::Validation {
                        record_id: rec.auction_id.clone(),
                        reason: format!(
                            "bid {} for bidder '{}' exceeds bid cap {}",
                            b, roster[i], cap
                        ),
                    });
                }
            }
        }
        let context = AuctionContext {
            scores,
            qualities,
            slot_ctrs: rec.alphas,
            reserve: rec.reserve,
            mainline_reserve: rec.mainline_reserve,
            mainline_slots: rec.mainline_slots,
            mainline_cap: rec.mainline_cap,
        };
        context.validate().map_err(|e| Error::Validation {
            record_id: rec.auction_id.clone(),
            reason: e.to_string(),
        })?;
        records.push(AuctionRecord {
            auction_id: rec.auction_id,
            context,
            bids: BidProfile::new(bids),
        });
    }

    let (bid_cap, derived) = match cfg.bid_cap {
        Some(cap) => (cap, false),
        None => (derive_bid_cap(&records), true),
    };

    Ok(AuctionDataset {
        records,
        bidder_ids: roster,
        bid_cap,
        bid_cap_derived: derived,
        value_cap: cfg.value_cap,
        pricing: cfg.pricing,
        grid_points: cfg.grid_points,
    })
}

/// Smallest cap that guarantees every bidder can take the top rank in every
/// record, with 25% headroom so rank-score ties cannot bind at the cap.
fn derive_bid_cap(records: &[AuctionRecord]) -> f64 {
    let n = records.first().map(|r| r.context.n_bidders()).unwrap_or(0);
    let mut needed: f64 = 0.0;
    let mut max_bid: f64 = 0.0;
    for rec in records {
        let ctx = &rec.context;
        let floor = if ctx.mainline_slots.is_empty() {
            ctx.reserve
        } else {
            ctx.mainline_reserve
        };
        for i in 0..n {
            max_bid = max_bid.max(rec.bids.bids[i]);
            let mut q = floor;
            for j in 0..n {
                if j != i {
                    q = q.max(ctx.scores[j] * rec.bids.bids[j]);
                }
            }
            needed = needed.max(q / ctx.scores[i]);
        }
    }
    let cap = (1.25 * needed).max(max_bid);
    if cap > 0.0 { cap } else { 1.0 }
}

impl AuctionDataset {
    pub fn n_bidders(&self) -> usize {
        self.bidder_ids.len()
    }

    /// Number of observed auctions T.
    pub fn n_records(&self) -> usize {
        self.records.len()
    }

    /// Largest slot count across records.
    pub fn max_slots(&self) -> usize {
        self.records.iter().map(|r| r.context.n_slots()).max().unwrap_or(0)
    }

    /// Serialize back to JSONL (dense records, including padded bidders).
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for rec in &self.records {
            let json = JsonRecord {
                auction_id: rec.auction_id.clone(),
                alphas: rec.context.slot_ctrs.clone(),
                reserve: rec.context.reserve,
                mainline_reserve: Some(rec.context.mainline_reserve),
                mainline_slots: rec.context.mainline_slots.clone(),
                mainline_cap: Some(rec.context.mainline_cap),
                bidders: (0..self.n_bidders())
                    .map(|i| JsonBidder {
                        id: self.bidder_ids[i].clone(),
                        bid: rec.bids.bids[i],
                        score: rec.context.scores[i],
                        quality: rec.context.qualities[i],
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut w, &json)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// The config that reproduces this dataset's analysis-relevant settings.
    pub fn config(&self) -> DatasetConfig {
        DatasetConfig {
            bid_cap: Some(self.bid_cap),
            value_cap: self.value_cap,
            pricing: self.pricing,
            grid_points: self.grid_points,
            ..DatasetConfig::default()
        }
    }
}

/// Realized total payment per record under the dataset's pricing, in record
/// order. Revenue and summaries both read from this so they agree exactly.
pub(crate) fn realized_payment_totals(ds: &AuctionDataset) -> Result<Vec<f64>> {
    ds.records
        .iter()
        .map(|r| Ok(run_gsp(&r.bids, &r.context, ds.pricing)?.total_payment()))
        .collect()
}

pub(crate) fn realized_outcomes(ds: &AuctionDataset) -> Result<Vec<AuctionOutcome>> {
    ds.records
        .iter()
        .map(|r| run_gsp(&r.bids, &r.context, ds.pricing))
        .collect()
}

/// Per-bidder averages over the dataset.
#[derive(Debug, Clone, Serialize)]
pub struct BidderSummary {
    pub id: String,
    pub mean_bid: f64,
    pub mean_quality: f64,
    pub mean_revenue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub n_bidders: usize,
    pub n_records: usize,
    pub bidders: Vec<BidderSummary>,
    /// Average per-auction total payment.
    pub revenue: f64,
}

/// Average realized quantities over the T records, simulating each auction
/// under the dataset's pricing rule.
pub fn summarize(ds: &AuctionDataset) -> Result<DatasetSummary> {
    let outcomes = realized_outcomes(ds)?;
    let totals: Vec<f64> = outcomes.iter().map(|o| o.total_payment()).collect();
    let revenue = mean_ordered(totals.iter().copied());
    let bidders = (0..ds.n_bidders())
        .map(|i| BidderSummary {
            id: ds.bidder_ids[i].clone(),
            mean_bid: mean_ordered(ds.records.iter().map(|r| r.bids.bids[i])),
            mean_quality: mean_ordered(ds.records.iter().map(|r| r.context.qualities[i])),
            mean_revenue: mean_ordered(outcomes.iter().map(|o| o.payment[i])),
        })
        .collect();
    Ok(DatasetSummary {
        n_bidders: ds.n_bidders(),
        n_records: ds.n_records(),
        bidders,
        revenue,
    })
}
