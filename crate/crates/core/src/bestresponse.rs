//! Uniform-bidding best responses of an ROI-constrained value maximizer.
//!
//! Against fixed opponent bids, bidder `i` wins auction `j` with multiplier
//! `theta` iff `theta * v[i][j]` clears the critical bid `t_j`, i.e.
//! `theta > t_j / v[i][j]` (or equality with an inclusive threshold), and then
//! pays `t_j`. Sorting auctions by that critical ratio turns the won set into
//! a prefix, so only finitely many multipliers need checking: every distinct
//! ratio, the midpoint of each pair of adjacent ratios, 1, and one point past
//! the largest ratio.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanisms::{run_all, MechanismSpec, Threshold};
use crate::model::{auction_bids, bids_from, Instance, MultiplierProfile};
use crate::rational::{ExtendedRational, Rational};

/// Best-response problem of `bidder` against the other entries of `profile`.
/// The bidder's own entry in `profile` is ignored.
#[derive(Clone, Copy, Debug)]
pub struct ResponseProblem<'a> {
    pub bidder: usize,
    pub inst: &'a Instance,
    pub spec: &'a MechanismSpec,
    pub profile: &'a MultiplierProfile,
}

impl<'a> ResponseProblem<'a> {
    pub fn new(
        bidder: usize,
        inst: &'a Instance,
        spec: &'a MechanismSpec,
        profile: &'a MultiplierProfile,
    ) -> Result<Self> {
        inst.check_bidder(bidder)?;
        spec.check_against(inst)?;
        if profile.len() != inst.num_bidders() {
            return Err(Error::Dimension(format!(
                "profile has {} multipliers for {} bidders",
                profile.len(),
                inst.num_bidders()
            )));
        }
        Ok(ResponseProblem {
            bidder,
            inst,
            spec,
            profile,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResponseResult {
    pub theta: Rational,
    /// Won auctions with positive value, ascending.
    pub won: Vec<usize>,
    pub total_value: Rational,
    pub total_payment: Rational,
}

/// Critical bid of the problem's bidder in every auction.
pub fn thresholds(problem: &ResponseProblem) -> Result<Vec<Threshold>> {
    let bids = bids_from(problem.profile, problem.inst)?;
    (0..problem.inst.num_auctions())
        .map(|j| {
            problem
                .spec
                .min_winning_bid(problem.inst, j, problem.bidder, &auction_bids(&bids, j))
        })
        .collect()
}

/// A winnable auction with positive value, keyed by its critical ratio.
#[derive(Clone, Debug)]
struct RatioEntry {
    auction: usize,
    ratio: Rational,
    inclusive: bool,
    value: Rational,
    payment: Rational,
}

impl RatioEntry {
    fn won_at(&self, theta: &Rational) -> bool {
        *theta > self.ratio || (*theta == self.ratio && self.inclusive)
    }
}

fn ratio_entries(problem: &ResponseProblem, ts: &[Threshold]) -> Vec<RatioEntry> {
    let i = problem.bidder;
    let mut entries: Vec<RatioEntry> = ts
        .iter()
        .enumerate()
        .filter_map(|(j, t)| {
            let v = problem.inst.value(i, j);
            let pay = t.value.finite()?;
            if !v.is_positive() {
                return None;
            }
            Some(RatioEntry {
                auction: j,
                ratio: pay / v,
                inclusive: t.inclusive,
                value: v.clone(),
                payment: pay.clone(),
            })
        })
        .collect();
    entries.sort_by(|a, b| a.ratio.cmp(&b.ratio).then(a.auction.cmp(&b.auction)));
    entries
}

fn candidate_multipliers(entries: &[RatioEntry]) -> BTreeSet<Rational> {
    let one = Rational::one();
    let mut ratios: Vec<&Rational> = entries.iter().map(|e| &e.ratio).collect();
    ratios.dedup();

    let mut cands = BTreeSet::new();
    cands.insert(one.clone());
    for r in &ratios {
        cands.insert((*r).clone());
    }
    for w in ratios.windows(2) {
        cands.insert(w[0].midpoint(w[1]));
    }
    if let Some(last) = ratios.last() {
        cands.insert(*last + &one);
    }
    cands.retain(|t| *t >= one);
    cands
}

/// Value-maximizing ROI-feasible multiplier, ties broken toward the smallest
/// multiplier. Zero-value auctions never count as wins: they add no value,
/// and a zero bid can only clear a zero threshold.
pub fn best_response(problem: &ResponseProblem) -> Result<ResponseResult> {
    let ts = thresholds(problem)?;
    let entries = ratio_entries(problem, &ts);

    // prefix sums over the ratio order
    let mut prefix_value = vec![Rational::zero()];
    let mut prefix_payment = vec![Rational::zero()];
    for e in &entries {
        prefix_value.push(prefix_value.last().unwrap() + &e.value);
        prefix_payment.push(prefix_payment.last().unwrap() + &e.payment);
    }

    let mut best: Option<(Rational, Rational, Rational)> = None;
    for theta in candidate_multipliers(&entries) {
        let below = entries.partition_point(|e| e.ratio < theta);
        let mut value = prefix_value[below].clone();
        let mut payment = prefix_payment[below].clone();
        for e in entries[below..].iter().take_while(|e| e.ratio == theta) {
            if e.inclusive {
                value += &e.value;
                payment += &e.payment;
            }
        }
        if value < payment {
            continue;
        }
        if best.as_ref().is_none_or(|(_, v, _)| value > *v) {
            best = Some((theta, value, payment));
        }
    }

    let theta = best.map_or_else(Rational::one, |(t, _, _)| t);
    Ok(summarize(&entries, theta))
}

fn summarize(entries: &[RatioEntry], theta: Rational) -> ResponseResult {
    let mut won: Vec<&RatioEntry> = entries.iter().filter(|e| e.won_at(&theta)).collect();
    won.sort_by_key(|e| e.auction);
    ResponseResult {
        total_value: won.iter().map(|e| &e.value).sum(),
        total_payment: won.iter().map(|e| &e.payment).sum(),
        won: won.iter().map(|e| e.auction).collect(),
        theta,
    }
}

/// Brute-force best response for cross-checking [`best_response`].
///
/// Clears the whole instance with `run_all` at every multiplier on a uniform
/// grid over `[1, largest finite ratio + 1]`, at every exact critical ratio,
/// and just above each ratio (a step of `1/grid_size` of the smallest gap
/// between distinct ratios). Keeps the best ROI-feasible point.
pub fn best_response_oracle(problem: &ResponseProblem, grid_size: usize) -> Result<ResponseResult> {
    if grid_size < 2 {
        return Err(Error::InvalidParameter(format!("grid size {grid_size} < 2")));
    }
    let i = problem.bidder;
    let one = Rational::one();
    let ts = thresholds(problem)?;
    let mut ratios: Vec<Rational> = ts
        .iter()
        .enumerate()
        .filter(|(j, _)| problem.inst.value(i, *j).is_positive())
        .filter_map(|(j, t)| t.value.finite().map(|p| p / problem.inst.value(i, j)))
        .collect();
    ratios.sort();
    ratios.dedup();

    let top = ratios.last().cloned().unwrap_or_else(Rational::zero) + &one;
    let top = std::cmp::max(top, Rational::from_integer(2));
    let steps = Rational::from_integer(grid_size as i64 - 1);
    let min_gap = ratios
        .windows(2)
        .map(|w| &w[1] - &w[0])
        .min()
        .unwrap_or_else(|| one.clone());
    let nudge = std::cmp::min(min_gap, one.clone()) / Rational::from_integer(grid_size as i64);

    let mut probes: BTreeSet<Rational> = (0..grid_size)
        .map(|k| &one + (&top - &one) * Rational::from_integer(k as i64) / &steps)
        .collect();
    for r in &ratios {
        probes.insert(r.clone());
        probes.insert(r + &nudge);
    }
    probes.retain(|t| *t >= one);

    let mut best: Option<ResponseResult> = None;
    for theta in probes {
        let profile = problem.profile.with_theta(i, theta.clone())?;
        let out = run_all(problem.spec, problem.inst, &profile)?;
        let won: Vec<usize> = out
            .won_by(i)
            .into_iter()
            .filter(|&j| problem.inst.value(i, j).is_positive())
            .collect();
        let total_value = out.bidder_value(problem.inst, i);
        let total_payment = out.bidder_payment(i);
        if total_value < total_payment {
            continue;
        }
        if best.as_ref().is_none_or(|b| total_value > b.total_value) {
            best = Some(ResponseResult {
                theta,
                won,
                total_value,
                total_payment,
            });
        }
    }
    Ok(best.unwrap_or(ResponseResult {
        theta: one,
        won: Vec::new(),
        total_value: Rational::zero(),
        total_payment: Rational::zero(),
    }))
}

/// Whether bidding the true value `v[i][j]` maximizes quasilinear utility
/// `x * v - p` in auction `j` over the probe bids
/// `{0, v/2, v, 2v, t, t - 1/1000, t + 1/1000}` (`t` the critical bid when
/// finite; negative probes dropped). `other_bids[i]` is ignored.
pub fn quasilinear_best_bid_check(
    i: usize,
    j: usize,
    inst: &Instance,
    spec: &MechanismSpec,
    other_bids: &[Rational],
) -> Result<bool> {
    let v = inst.value(i, j).clone();
    let two = Rational::from_integer(2);
    let eps = Rational::new(1, 1000);
    let mut probes = vec![Rational::zero(), &v / &two, v.clone(), &v * &two];
    if let ExtendedRational::Finite(t) = spec.min_winning_bid(inst, j, i, other_bids)?.value {
        probes.push(&t - &eps);
        probes.push(&t + &eps);
        probes.push(t);
    }

    let mut bids = other_bids.to_vec();
    let mut utility = |b: &Rational| -> Result<Rational> {
        bids[i] = b.clone();
        let res = spec.run_auction(inst, j, &bids)?;
        Ok(if res.winner == Some(i) {
            &v - &res.payment
        } else {
            Rational::zero()
        })
    };
    let truthful = utility(&v)?;
    for b in probes.iter().filter(|b| !b.is_negative()) {
        if utility(b)? > truthful {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One line of the ratio-sorted best-response table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub auction: usize,
    pub threshold: ExtendedRational,
    pub inclusive: bool,
    /// `None` for auctions that cannot be won or carry no value.
    pub ratio: Option<Rational>,
    pub cumulative_value: Option<Rational>,
    pub cumulative_payment: Option<Rational>,
    pub feasible: Option<bool>,
}

/// Auctions in critical-ratio order with the running value and payment of the
/// prefix ending at each one. Unreachable or zero-value auctions come last.
pub fn response_table(problem: &ResponseProblem) -> Result<Vec<TableRow>> {
    let ts = thresholds(problem)?;
    let entries = ratio_entries(problem, &ts);
    let mut value = Rational::zero();
    let mut payment = Rational::zero();
    let mut rows = Vec::with_capacity(ts.len());
    for e in &entries {
        value += &e.value;
        payment += &e.payment;
        rows.push(TableRow {
            auction: e.auction,
            threshold: ts[e.auction].value.clone(),
            inclusive: e.inclusive,
            ratio: Some(e.ratio.clone()),
            cumulative_value: Some(value.clone()),
            cumulative_payment: Some(payment.clone()),
            feasible: Some(value >= payment),
        });
    }
    for (j, t) in ts.iter().enumerate() {
        if entries.iter().all(|e| e.auction != j) {
            rows.push(TableRow {
                auction: j,
                threshold: t.value.clone(),
                inclusive: t.inclusive,
                ratio: None,
                cumulative_value: None,
                cumulative_payment: None,
                feasible: None,
            });
        }
    }
    Ok(rows)
}
