//! Per-auction allocation and payment rules.
//!
//! Every mechanism here has the same shape. In auction `j` bidder `i` faces a
//! *reserve* (the smallest bid that survives screening, possibly `+inf`) and a
//! *shift* subtracted from its bid to form its ranking score. Among the
//! bidders whose bid reaches their reserve, the highest score wins, ties going
//! to the lowest index, and the winner pays its critical bid:
//! `max(reserve, best other eligible score + shift)`.
//!
//! | mechanism                 | reserve              | shift        |
//! |---------------------------|----------------------|--------------|
//! | second price              | 0                    | 0            |
//! | global multiplier `g`     | `g c`                | `g c`        |
//! | single bidder `a`         | `a c`                | 0            |
//! | auction-dependent `a_j`   | `(1 + a_j) c`        | `(1 + a_j) c`|
//! | bidder-dependent `a_i`    | `(1 + a_i) c`        | `c`          |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{auction_bids, bids_from, Instance, MultiplierProfile, Outcome};
use crate::rational::{ExtendedRational, Rational};

/// Parameters of the auction-dependent mechanism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuctionDepParams {
    /// Rightful winner of each auction; `None` when every surplus is negative.
    pub rw: Vec<Option<usize>>,
    /// `alpha_j`; `None` exactly when `rw[j]` is `None` (nobody can win).
    pub alpha: Vec<Option<ExtendedRational>>,
}

/// Parameters of the bidder-dependent mechanism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BidderDepParams {
    /// `S_i`: auctions whose rightful winner is `i`, ascending.
    pub rightful: Vec<Vec<usize>>,
    /// `alpha_i`.
    pub alpha: Vec<ExtendedRational>,
}

/// A mechanism with its parameters resolved against one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MechanismSpec {
    SecondPrice,
    GlobalCostMultiplier { gamma: Rational },
    SingleBidderCalibrated { alpha: ExtendedRational },
    AuctionDependent(AuctionDepParams),
    BidderDependent(BidderDepParams),
}

/// Which mechanism, without any instance-derived parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MechanismKind {
    SecondPrice,
    Global { gamma: Rational },
    SingleBidder,
    AuctionDependent,
    BidderDependent,
}

impl MechanismKind {
    /// Computes whatever parameters the mechanism derives from `inst`.
    pub fn instantiate(&self, inst: &Instance) -> Result<MechanismSpec> {
        Ok(match self {
            MechanismKind::SecondPrice => MechanismSpec::SecondPrice,
            MechanismKind::Global { gamma } => {
                if gamma.is_negative() {
                    return Err(Error::InvalidParameter(format!("gamma {gamma} is negative")));
                }
                MechanismSpec::GlobalCostMultiplier { gamma: gamma.clone() }
            }
            MechanismKind::SingleBidder => MechanismSpec::SingleBidderCalibrated {
                alpha: single_bidder_alpha(inst)?,
            },
            MechanismKind::AuctionDependent => {
                MechanismSpec::AuctionDependent(compute_auction_params(inst))
            }
            MechanismKind::BidderDependent => {
                MechanismSpec::BidderDependent(compute_bidder_params(inst))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MechanismKind::SecondPrice => "second-price",
            MechanismKind::Global { .. } => "global",
            MechanismKind::SingleBidder => "single-bidder",
            MechanismKind::AuctionDependent => "auction-dep",
            MechanismKind::BidderDependent => "bidder-dep",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismKind::Global { gamma } => write!(f, "global:{gamma}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "second-price" => Ok(MechanismKind::SecondPrice),
            "single-bidder" => Ok(MechanismKind::SingleBidder),
            "auction-dep" => Ok(MechanismKind::AuctionDependent),
            "bidder-dep" => Ok(MechanismKind::BidderDependent),
            _ => {
                let gamma = s
                    .strip_prefix("global:")
                    .ok_or_else(|| Error::UnknownMechanism(s.to_string()))?;
                let gamma: Rational = gamma.parse().map_err(|source| Error::Rational {
                    context: format!("gamma in `{s}`"),
                    source,
                })?;
                if gamma.is_negative() {
                    return Err(Error::InvalidParameter(format!("gamma {gamma} is negative")));
                }
                Ok(MechanismKind::Global { gamma })
            }
        }
    }
}

/// JSON form: `{"kind": ..., "gamma": "p/q"}` or `{"kind": ..., "alpha": "p/q"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ExtendedRational>,
}

impl MechanismJson {
    /// Rebuilds the mechanism for `inst`. Derived parameters are always
    /// recomputed; a supplied single-bidder `alpha` must match the
    /// recomputed one.
    pub fn resolve(&self, inst: &Instance) -> Result<MechanismSpec> {
        let kind = match (self.kind.as_str(), &self.gamma) {
            ("global", Some(g)) => MechanismKind::Global { gamma: g.clone() },
            ("global", None) => {
                return Err(Error::InvalidParameter("global mechanism without gamma".into()))
            }
            (k, _) => k.parse()?,
        };
        let spec = kind.instantiate(inst)?;
        if let (Some(claimed), MechanismSpec::SingleBidderCalibrated { alpha }) = (&self.alpha, &spec) {
            if claimed != alpha {
                return Err(Error::InvalidParameter(format!(
                    "alpha {claimed} does not match the instance (expected {alpha})"
                )));
            }
        }
        Ok(spec)
    }
}

impl Serialize for MechanismSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let kind = self.kind();
        let json = MechanismJson {
            kind: kind.name().to_string(),
            gamma: match self {
                MechanismSpec::GlobalCostMultiplier { gamma } => Some(gamma.clone()),
                _ => None,
            },
            alpha: match self {
                MechanismSpec::SingleBidderCalibrated { alpha } => Some(alpha.clone()),
                _ => None,
            },
        };
        json.serialize(serializer)
    }
}

/// Result of clearing one auction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuctionResult {
    pub winner: Option<usize>,
    pub payment: Rational,
    /// Second-ranked eligible bidder, if any.
    pub runner_up: Option<usize>,
}

/// Critical bid: bidder wins with bid `b` iff `b > value`, or `b == value`
/// and `inclusive`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Threshold {
    pub value: ExtendedRational,
    pub inclusive: bool,
}

impl Threshold {
    pub fn never() -> Self {
        Threshold {
            value: ExtendedRational::Infinity,
            inclusive: false,
        }
    }

    pub fn clears(&self, bid: &Rational) -> bool {
        match &self.value {
            ExtendedRational::Infinity => false,
            ExtendedRational::Finite(t) => bid > t || (bid == t && self.inclusive),
        }
    }
}

struct Terms {
    reserve: ExtendedRational,
    shift: Rational,
}

impl Terms {
    fn finite(x: Rational) -> Self {
        Terms {
            reserve: ExtendedRational::Finite(x.clone()),
            shift: x,
        }
    }

    fn excluded() -> Self {
        Terms {
            reserve: ExtendedRational::Infinity,
            shift: Rational::zero(),
        }
    }
}

/// `multiplier * cost` where an infinite multiplier yields `+inf` on positive
/// cost and `zero_cost_term` on zero cost.
fn scaled_cost(multiplier: &ExtendedRational, cost: &Rational, zero_cost_term: Rational) -> ExtendedRational {
    match multiplier {
        ExtendedRational::Finite(a) => ExtendedRational::Finite(a * cost),
        ExtendedRational::Infinity if cost.is_positive() => ExtendedRational::Infinity,
        ExtendedRational::Infinity => ExtendedRational::Finite(zero_cost_term),
    }
}

impl MechanismSpec {
    pub fn kind(&self) -> MechanismKind {
        match self {
            MechanismSpec::SecondPrice => MechanismKind::SecondPrice,
            MechanismSpec::GlobalCostMultiplier { gamma } => MechanismKind::Global { gamma: gamma.clone() },
            MechanismSpec::SingleBidderCalibrated { .. } => MechanismKind::SingleBidder,
            MechanismSpec::AuctionDependent(_) => MechanismKind::AuctionDependent,
            MechanismSpec::BidderDependent(_) => MechanismKind::BidderDependent,
        }
    }

    /// Checks the parameters have the instance's shape.
    pub fn check_against(&self, inst: &Instance) -> Result<()> {
        let mismatch = |what: &str, got: usize, want: usize| {
            Err(Error::Dimension(format!("{what} has length {got}, instance needs {want}")))
        };
        match self {
            MechanismSpec::SingleBidderCalibrated { .. } if inst.num_bidders() != 1 => {
                Err(Error::SingleBidderOnly(inst.num_bidders()))
            }
            MechanismSpec::AuctionDependent(p) if p.rw.len() != inst.num_auctions() => {
                mismatch("auction parameters", p.rw.len(), inst.num_auctions())
            }
            MechanismSpec::AuctionDependent(p) if p.alpha.len() != p.rw.len() => {
                mismatch("alpha_j", p.alpha.len(), p.rw.len())
            }
            MechanismSpec::BidderDependent(p) if p.alpha.len() != inst.num_bidders() => {
                mismatch("alpha_i", p.alpha.len(), inst.num_bidders())
            }
            MechanismSpec::BidderDependent(p) if p.rightful.len() != inst.num_bidders() => {
                mismatch("rightful sets", p.rightful.len(), inst.num_bidders())
            }
            _ => Ok(()),
        }
    }

    fn terms(&self, inst: &Instance, i: usize, j: usize) -> Terms {
        let c = inst.cost(i, j);
        match self {
            MechanismSpec::SecondPrice => Terms::finite(Rational::zero()),
            MechanismSpec::GlobalCostMultiplier { gamma } => Terms::finite(gamma * c),
            MechanismSpec::SingleBidderCalibrated { alpha } => Terms {
                reserve: scaled_cost(alpha, c, Rational::zero()),
                shift: Rational::zero(),
            },
            MechanismSpec::AuctionDependent(p) => {
                let (Some(rw), Some(alpha)) = (p.rw[j], &p.alpha[j]) else {
                    return Terms::excluded();
                };
                let half_rw_value = inst.value(rw, j) / Rational::from_integer(2);
                match scaled_cost(alpha, c, half_rw_value) {
                    ExtendedRational::Finite(extra) => Terms::finite(c + extra),
                    ExtendedRational::Infinity => Terms::excluded(),
                }
            }
            MechanismSpec::BidderDependent(p) => {
                let reserve = match scaled_cost(&p.alpha[i], c, Rational::zero()) {
                    ExtendedRational::Finite(extra) => ExtendedRational::Finite(c + extra),
                    ExtendedRational::Infinity => ExtendedRational::Infinity,
                };
                Terms {
                    reserve,
                    shift: c.clone(),
                }
            }
        }
    }

    /// Ranking score of every bidder that passes screening, by index.
    fn eligible_scores(&self, inst: &Instance, j: usize, bids: &[Rational], skip: Option<usize>) -> Vec<(usize, Rational)> {
        (0..inst.num_bidders())
            .filter(|&k| Some(k) != skip)
            .filter_map(|k| {
                let t = self.terms(inst, k, j);
                match &t.reserve {
                    ExtendedRational::Finite(r) if bids[k] >= *r => Some((k, &bids[k] - &t.shift)),
                    _ => None,
                }
            })
            .collect()
    }

    fn check_auction_input(&self, inst: &Instance, j: usize, bids: &[Rational]) -> Result<()> {
        self.check_against(inst)?;
        inst.check_auction(j)?;
        if bids.len() != inst.num_bidders() {
            return Err(Error::Dimension(format!(
                "{} bids for {} bidders",
                bids.len(),
                inst.num_bidders()
            )));
        }
        if let Some(b) = bids.iter().find(|b| b.is_negative()) {
            return Err(Error::InvalidParameter(format!("negative bid {b}")));
        }
        Ok(())
    }

    /// Clears auction `j` given every bidder's bid in it.
    pub fn run_auction(&self, inst: &Instance, j: usize, bids: &[Rational]) -> Result<AuctionResult> {
        self.check_auction_input(inst, j, bids)?;
        let scored = self.eligible_scores(inst, j, bids, None);

        // strict comparisons keep the lowest index on ties
        let mut first: Option<&(usize, Rational)> = None;
        let mut second: Option<&(usize, Rational)> = None;
        for entry in &scored {
            if first.is_none_or(|f| entry.1 > f.1) {
                second = first;
                first = Some(entry);
            } else if second.is_none_or(|s| entry.1 > s.1) {
                second = Some(entry);
            }
        }

        let Some(&(winner, _)) = first else {
            return Ok(AuctionResult {
                winner: None,
                payment: Rational::zero(),
                runner_up: None,
            });
        };
        let terms = self.terms(inst, winner, j);
        let reserve = terms
            .reserve
            .into_finite()
            .expect("eligible bidder has a finite reserve");
        let payment = match second {
            Some((_, s)) => std::cmp::max(reserve, s + &terms.shift),
            None => reserve,
        };
        Ok(AuctionResult {
            winner: Some(winner),
            payment,
            runner_up: second.map(|&(k, _)| k),
        })
    }

    /// Smallest bid with which bidder `i` wins auction `j`, holding the other
    /// entries of `bids` fixed (`bids[i]` is ignored).
    pub fn min_winning_bid(&self, inst: &Instance, j: usize, i: usize, bids: &[Rational]) -> Result<Threshold> {
        self.check_auction_input(inst, j, bids)?;
        inst.check_bidder(i)?;
        let terms = self.terms(inst, i, j);
        let ExtendedRational::Finite(reserve) = terms.reserve else {
            return Ok(Threshold::never());
        };

        let others = self.eligible_scores(inst, j, bids, Some(i));
        let Some(best) = others.iter().map(|(_, s)| s).max() else {
            return Ok(Threshold {
                value: reserve.into(),
                inclusive: true,
            });
        };
        let beat = best + &terms.shift;
        if reserve > beat {
            return Ok(Threshold {
                value: reserve.into(),
                inclusive: true,
            });
        }
        let first_tied = others
            .iter()
            .find(|(_, s)| s == best)
            .map(|&(k, _)| k)
            .expect("maximum is attained");
        Ok(Threshold {
            value: beat.into(),
            inclusive: i < first_tied,
        })
    }
}

/// Clears every auction under uniform bidding `profile`.
pub fn run_all(spec: &MechanismSpec, inst: &Instance, profile: &MultiplierProfile) -> Result<Outcome> {
    spec.check_against(inst)?;
    let bids = bids_from(profile, inst)?;
    let mut winners = Vec::with_capacity(inst.num_auctions());
    let mut payments = Vec::with_capacity(inst.num_auctions());
    for j in 0..inst.num_auctions() {
        let res = spec.run_auction(inst, j, &auction_bids(&bids, j))?;
        winners.push(res.winner);
        payments.push(res.payment);
    }
    Outcome::new(inst.num_bidders(), winners, payments)
}

/// Lowest-index maximizer of `v - c` per auction, when that maximum is
/// nonnegative.
pub fn rightful_winners(inst: &Instance) -> Vec<Option<usize>> {
    (0..inst.num_auctions())
        .map(|j| {
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..inst.num_bidders() {
                let s = inst.surplus(i, j);
                if best.as_ref().is_none_or(|(_, b)| s > *b) {
                    best = Some((i, s));
                }
            }
            best.filter(|(_, s)| !s.is_negative()).map(|(i, _)| i)
        })
        .collect()
}

pub fn compute_auction_params(inst: &Instance) -> AuctionDepParams {
    let rw = rightful_winners(inst);
    let alpha = rw
        .iter()
        .enumerate()
        .map(|(j, w)| {
            w.map(|i| {
                let c = inst.cost(i, j);
                if c.is_zero() {
                    ExtendedRational::Infinity
                } else {
                    ExtendedRational::Finite(inst.surplus(i, j) / (c * Rational::from_integer(2)))
                }
            })
        })
        .collect();
    AuctionDepParams { rw, alpha }
}

pub fn compute_bidder_params(inst: &Instance) -> BidderDepParams {
    let mut rightful = vec![Vec::new(); inst.num_bidders()];
    for (j, w) in rightful_winners(inst).into_iter().enumerate() {
        if let Some(i) = w {
            rightful[i].push(j);
        }
    }
    let alpha = rightful
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let total_value: Rational = set.iter().map(|&j| inst.value(i, j)).sum();
            let total_cost: Rational = set.iter().map(|&j| inst.cost(i, j)).sum();
            if total_cost.is_positive() {
                ExtendedRational::Finite((total_value - &total_cost) / (total_cost * Rational::from_integer(2)))
            } else if total_value.is_positive() {
                ExtendedRational::Infinity
            } else {
                ExtendedRational::Finite(Rational::zero())
            }
        })
        .collect();
    BidderDepParams { rightful, alpha }
}

/// Calibrated multiplier `a` with `sum_S v = a * sum_S c` over
/// `S = {j : v_j >= c_j}`. `+inf` when that cost sum is zero but the value
/// sum is not; 1 when both vanish.
pub fn single_bidder_alpha(inst: &Instance) -> Result<ExtendedRational> {
    if inst.num_bidders() != 1 {
        return Err(Error::SingleBidderOnly(inst.num_bidders()));
    }
    let set: Vec<usize> = (0..inst.num_auctions())
        .filter(|&j| inst.value(0, j) >= inst.cost(0, j))
        .collect();
    let total_value: Rational = set.iter().map(|&j| inst.value(0, j)).sum();
    let total_cost: Rational = set.iter().map(|&j| inst.cost(0, j)).sum();
    Ok(if total_cost.is_positive() {
        ExtendedRational::Finite(total_value / total_cost)
    } else if total_value.is_positive() {
        ExtendedRational::Infinity
    } else {
        ExtendedRational::Finite(Rational::one())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    /// One auction; column `j = 0` holds the given values/costs per bidder.
    fn column(values: &[i64], costs: &[i64]) -> Instance {
        let v: Vec<Vec<Rational>> = values.iter().map(|&x| vec![Rational::from_integer(x)]).collect();
        let c: Vec<Vec<Rational>> = costs.iter().map(|&x| vec![Rational::from_integer(x)]).collect();
        Instance::new(values.len(), 1, v, c).unwrap()
    }

    #[test]
    fn cost_adjusted_second_price_worked_auction() {
        let inst = column(&[5, 3, 4], &[1, 2, 1]);
        let spec = MechanismSpec::GlobalCostMultiplier { gamma: Rational::one() };
        let res = spec.run_auction(&inst, 0, &ints(&[5, 3, 4])).unwrap();
        assert_eq!(res.winner, Some(0));
        assert_eq!(res.payment, r(4, 1));
        assert_eq!(res.runner_up, Some(2));
    }

    #[test]
    fn auction_params_examples() {
        let p = compute_auction_params(&column(&[4, 3], &[1, 2]));
        assert_eq!(p.rw, vec![Some(0)]);
        assert_eq!(p.alpha, vec![Some(ExtendedRational::Finite(r(3, 2)))]);

        let p = compute_auction_params(&column(&[1, 1], &[2, 3]));
        assert_eq!(p.rw, vec![None]);
        assert_eq!(p.alpha, vec![None]);

        let p = compute_auction_params(&column(&[6, 2], &[0, 1]));
        assert_eq!(p.rw, vec![Some(0)]);
        assert_eq!(p.alpha, vec![Some(ExtendedRational::Infinity)]);
    }

    #[test]
    fn rightful_winner_ties_go_to_lowest_index() {
        assert_eq!(rightful_winners(&column(&[3, 4, 4], &[0, 1, 1])), vec![Some(0)]);
        assert_eq!(rightful_winners(&column(&[2, 2], &[2, 2])), vec![Some(0)]);
    }

    #[test]
    fn bidder_params_examples() {
        let inst = Instance::from_integers(&[&[3, 7]], &[&[2, 2]]).unwrap();
        let p = compute_bidder_params(&inst);
        assert_eq!(p.rightful, vec![vec![0, 1]]);
        assert_eq!(p.alpha, vec![ExtendedRational::Finite(r(3, 4))]);

        // bidder 1 never rightful
        let inst = Instance::from_integers(&[&[5], &[1]], &[&[0], &[0]]).unwrap();
        let p = compute_bidder_params(&inst);
        assert_eq!(p.rightful, vec![vec![0], vec![]]);
        assert_eq!(p.alpha[0], ExtendedRational::Infinity);
        assert_eq!(p.alpha[1], ExtendedRational::Finite(Rational::zero()));
    }

    #[test]
    fn auction_dependent_worked_auction() {
        let inst = column(&[4, 3], &[1, 2]);
        let spec = MechanismKind::AuctionDependent.instantiate(&inst).unwrap();
        let res = spec.run_auction(&inst, 0, &ints(&[4, 3])).unwrap();
        assert_eq!(res.winner, Some(0));
        assert_eq!(res.payment, r(5, 2));
        // c + (v - c) / 2
        assert_eq!(res.payment, r(1, 1) + r(3, 2));
    }

    #[test]
    fn auction_dependent_infinite_multiplier() {
        let inst = column(&[6, 2], &[0, 1]);
        let spec = MechanismKind::AuctionDependent.instantiate(&inst).unwrap();
        // the zero-cost rightful winner needs v_rw / 2 = 3, the costly bidder can never win
        let t0 = spec.min_winning_bid(&inst, 0, 0, &ints(&[0, 100])).unwrap();
        assert_eq!(t0, Threshold { value: r(3, 1).into(), inclusive: true });
        let t1 = spec.min_winning_bid(&inst, 0, 1, &ints(&[6, 0])).unwrap();
        assert_eq!(t1.value, ExtendedRational::Infinity);
        let res = spec.run_auction(&inst, 0, &ints(&[6, 1000])).unwrap();
        assert_eq!(res.winner, Some(0));
        assert_eq!(res.payment, r(3, 1));
    }

    #[test]
    fn auction_dependent_no_rightful_winner_blocks_everyone() {
        let inst = column(&[1, 1], &[2, 3]);
        let spec = MechanismKind::AuctionDependent.instantiate(&inst).unwrap();
        let res = spec.run_auction(&inst, 0, &ints(&[100, 100])).unwrap();
        assert_eq!(res.winner, None);
        assert_eq!(res.payment, Rational::zero());
    }

    #[test]
    fn second_price_alone_pays_nothing() {
        let inst = column(&[7], &[0]);
        let res = MechanismSpec::SecondPrice.run_auction(&inst, 0, &ints(&[7])).unwrap();
        assert_eq!(res.winner, Some(0));
        assert_eq!(res.payment, Rational::zero());
    }

    #[test]
    fn second_price_threshold_matches_top_bid() {
        let inst = column(&[0, 0, 0], &[0, 0, 0]);
        let t = MechanismSpec::SecondPrice
            .min_winning_bid(&inst, 0, 0, &ints(&[0, 3, 5]))
            .unwrap();
        assert_eq!(t, Threshold { value: r(5, 1).into(), inclusive: true });
        // highest index loses ties
        let t = MechanismSpec::SecondPrice
            .min_winning_bid(&inst, 0, 2, &ints(&[3, 5, 0]))
            .unwrap();
        assert_eq!(t, Threshold { value: r(5, 1).into(), inclusive: false });
    }

    #[test]
    fn global_multiplier_threshold() {
        // bidder 1 has cost 1, competitor's score is 3 (bid 5, cost 1, gamma 2)
        let inst = column(&[0, 0], &[1, 1]);
        let spec = MechanismSpec::GlobalCostMultiplier { gamma: r(2, 1) };
        let t = spec.min_winning_bid(&inst, 0, 1, &ints(&[5, 0])).unwrap();
        assert_eq!(t, Threshold { value: r(5, 1).into(), inclusive: false });
        let t = spec.min_winning_bid(&inst, 0, 0, &ints(&[0, 5])).unwrap();
        assert_eq!(t, Threshold { value: r(5, 1).into(), inclusive: true });
    }

    #[test]
    fn global_multiplier_discards_negative_scores() {
        let inst = column(&[1, 1], &[2, 3]);
        let spec = MechanismSpec::GlobalCostMultiplier { gamma: Rational::one() };
        let res = spec.run_auction(&inst, 0, &ints(&[1, 1])).unwrap();
        assert_eq!(res.winner, None);
    }

    #[test]
    fn single_bidder_rule() {
        let inst = Instance::from_integers(&[&[2, 1, 1]], &[&[1, 1, 2]]).unwrap();
        let spec = MechanismKind::SingleBidder.instantiate(&inst).unwrap();
        assert_eq!(spec, MechanismSpec::SingleBidderCalibrated { alpha: r(3, 2).into() });
        let prof = MultiplierProfile::new(vec![r(3, 2)]).unwrap();
        let out = run_all(&spec, &inst, &prof).unwrap();
        assert_eq!(out.won_by(0), vec![0, 1]);
        assert_eq!(out.payment(0, 0), r(3, 2));
        assert_eq!(out.payment(0, 1), r(3, 2));
        assert_eq!(out.bidder_payment(0), r(3, 1));
        assert_eq!(out.bidder_value(&inst, 0), r(3, 1));
    }

    #[test]
    fn single_bidder_rejects_multiple_bidders() {
        let inst = Instance::from_integers(&[&[1], &[1]], &[&[0], &[0]]).unwrap();
        assert!(matches!(
            MechanismKind::SingleBidder.instantiate(&inst),
            Err(Error::SingleBidderOnly(2))
        ));
        let spec = MechanismSpec::SingleBidderCalibrated { alpha: r(1, 1).into() };
        assert!(matches!(
            spec.run_auction(&inst, 0, &ints(&[1, 1])),
            Err(Error::SingleBidderOnly(2))
        ));
    }

    #[test]
    fn bidder_dependent_screening_and_payment() {
        // alpha_0 = 3/4 from S_0 = {0, 1}; bidder 1 never rightful, alpha_1 = 0
        let inst = Instance::from_integers(&[&[3, 7], &[1, 6]], &[&[2, 2], &[0, 2]]).unwrap();
        let spec = MechanismKind::BidderDependent.instantiate(&inst).unwrap();
        // auction 1: bidder 0 reserve 7/4*2 = 7/2, score 7 - 2 = 5; bidder 1 reserve 2, score 4
        let res = spec.run_auction(&inst, 1, &ints(&[7, 6])).unwrap();
        assert_eq!(res.winner, Some(0));
        assert_eq!(res.payment, std::cmp::max(r(7, 2), r(6 - 2 + 2, 1)));
        // auction 0 truthful: bidder 0 bid 3 < 7/2 is screened out, bidder 1 passes and pays its reserve 0
        let res = spec.run_auction(&inst, 0, &ints(&[3, 1])).unwrap();
        assert_eq!(res.winner, Some(1));
        assert_eq!(res.payment, Rational::zero());
    }

    #[test]
    fn outcome_only_charges_winners() {
        let inst = Instance::from_integers(&[&[4, 0], &[3, 0]], &[&[1, 0], &[2, 0]]).unwrap();
        let spec = MechanismKind::AuctionDependent.instantiate(&inst).unwrap();
        let out = run_all(&spec, &inst, &MultiplierProfile::truthful(2)).unwrap();
        assert_eq!(out.payment(1, 0), Rational::zero());
        assert_eq!(out.winner(0), Some(0));
    }

    #[test]
    fn mechanism_labels_round_trip() {
        for label in ["second-price", "global:3/2", "single-bidder", "auction-dep", "bidder-dep"] {
            let kind: MechanismKind = label.parse().unwrap();
            assert_eq!(kind.to_string(), label);
        }
        assert_eq!(
            "global:0.5".parse::<MechanismKind>().unwrap(),
            MechanismKind::Global { gamma: r(1, 2) }
        );
        assert!("vcg".parse::<MechanismKind>().is_err());
        assert!("global:-1".parse::<MechanismKind>().is_err());
    }

    #[test]
    fn mechanism_json() {
        let inst = Instance::from_integers(&[&[2, 1, 1]], &[&[1, 1, 2]]).unwrap();
        let spec = MechanismKind::SingleBidder.instantiate(&inst).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"single-bidder","alpha":"3/2"}"#);
        let parsed: MechanismJson = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.resolve(&inst).unwrap(), spec);

        let forged: MechanismJson = serde_json::from_str(r#"{"kind":"single-bidder","alpha":"2"}"#).unwrap();
        assert!(forged.resolve(&inst).is_err());

        let g = MechanismSpec::GlobalCostMultiplier { gamma: r(5, 4) };
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"kind":"global","gamma":"5/4"}"#);
        let parsed: MechanismJson = serde_json::from_str(r#"{"kind":"global","gamma":"1.25"}"#).unwrap();
        assert_eq!(parsed.resolve(&inst).unwrap(), g);
    }
}
