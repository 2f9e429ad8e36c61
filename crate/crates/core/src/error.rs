use thiserror::Error;

use crate::rational::{ParseRationalError, Rational};

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{matrix}[{row}][{col}] is negative ({value})")]
    NegativeEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: Rational,
    },

    #[error("multiplier of bidder {bidder} is {theta}; uniform-bidding multipliers must be at least 1")]
    MultiplierBelowOne { bidder: usize, theta: Rational },

    #[error("bidder {bidder} out of range for {bidders} bidders")]
    BidderOutOfRange { bidder: usize, bidders: usize },

    #[error("auction {auction} out of range for {auctions} auctions")]
    AuctionOutOfRange { auction: usize, auctions: usize },

    #[error("single-bidder mechanism needs exactly one bidder, instance has {0}")]
    SingleBidderOnly(usize),

    #[error("optimal welfare is {0}; the welfare ratio needs a positive optimum")]
    NonPositiveOptimum(Rational),

    #[error("delta must lie in (0, 1/3), got {0}")]
    DeltaOutOfRange(Rational),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown mechanism `{0}` (expected second-price, global:<gamma>, single-bidder, auction-dep or bidder-dep)")]
    UnknownMechanism(String),

    #[error("{context}: {source}")]
    Rational {
        context: String,
        #[source]
        source: ParseRationalError,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
