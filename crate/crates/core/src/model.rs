//! Instances, uniform-bidding profiles, outcomes, and the welfare / ROI
//! metrics.
//!
//! Bidders and auctions are indexed from 0.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Values `v[i][j]` and user costs `c[i][j]` for `n` bidders and `m` auctions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    num_auctions: usize,
    values: Vec<Vec<Rational>>,
    costs: Vec<Vec<Rational>>,
}

impl Instance {
    /// Checks dimensions and that every entry is nonnegative.
    pub fn new(
        num_bidders: usize,
        num_auctions: usize,
        values: Vec<Vec<Rational>>,
        costs: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        check_matrix("values", &values, num_bidders, num_auctions)?;
        check_matrix("costs", &costs, num_bidders, num_auctions)?;
        Ok(Instance {
            num_auctions,
            values,
            costs,
        })
    }

    /// Builds an instance from small integer fractions, `(num, den)` pairs.
    /// Handy in tests and examples.
    pub fn from_pairs(values: &[&[(i64, i64)]], costs: &[&[(i64, i64)]]) -> Result<Self> {
        let conv = |rows: &[&[(i64, i64)]]| -> Vec<Vec<Rational>> {
            rows.iter()
                .map(|r| r.iter().map(|&(p, q)| Rational::new(p, q)).collect())
                .collect()
        };
        let n = values.len();
        let m = values.first().map_or(0, |r| r.len());
        Instance::new(n, m, conv(values), conv(costs))
    }

    /// Integer-valued convenience constructor.
    pub fn from_integers(values: &[&[i64]], costs: &[&[i64]]) -> Result<Self> {
        let conv = |rows: &[&[i64]]| -> Vec<Vec<Rational>> {
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
                .collect()
        };
        let n = values.len();
        let m = values.first().map_or(0, |r| r.len());
        Instance::new(n, m, conv(values), conv(costs))
    }

    pub fn num_bidders(&self) -> usize {
        self.values.len()
    }

    pub fn num_auctions(&self) -> usize {
        self.num_auctions
    }

    pub fn value(&self, i: usize, j: usize) -> &Rational {
        &self.values[i][j]
    }

    pub fn cost(&self, i: usize, j: usize) -> &Rational {
        &self.costs[i][j]
    }

    /// `v[i][j] - c[i][j]`.
    pub fn surplus(&self, i: usize, j: usize) -> Rational {
        &self.values[i][j] - &self.costs[i][j]
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn costs(&self) -> &[Vec<Rational>] {
        &self.costs
    }

    pub fn has_zero_costs(&self) -> bool {
        self.costs.iter().flatten().all(Rational::is_zero)
    }

    pub fn check_bidder(&self, i: usize) -> Result<()> {
        if i >= self.num_bidders() {
            return Err(Error::BidderOutOfRange {
                bidder: i,
                bidders: self.num_bidders(),
            });
        }
        Ok(())
    }

    pub fn check_auction(&self, j: usize) -> Result<()> {
        if j >= self.num_auctions {
            return Err(Error::AuctionOutOfRange {
                auction: j,
                auctions: self.num_auctions,
            });
        }
        Ok(())
    }
}

fn check_matrix(name: &'static str, rows: &[Vec<Rational>], n: usize, m: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::Dimension(format!(
            "{name} has {} rows, expected {n}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Dimension(format!(
                "{name}[{i}] has length {}, expected {m}",
                row.len()
            )));
        }
        if let Some((j, x)) = row.iter().enumerate().find(|(_, x)| x.is_negative()) {
            return Err(Error::NegativeEntry {
                matrix: name,
                row: i,
                col: j,
                value: x.clone(),
            });
        }
    }
    Ok(())
}

/// One uniform-bidding multiplier per bidder, each at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct MultiplierProfile(Vec<Rational>);

impl MultiplierProfile {
    pub fn new(theta: Vec<Rational>) -> Result<Self> {
        if let Some((bidder, t)) = theta.iter().enumerate().find(|(_, t)| **t < Rational::one()) {
            return Err(Error::MultiplierBelowOne {
                bidder,
                theta: t.clone(),
            });
        }
        Ok(MultiplierProfile(theta))
    }

    /// Truthful bidding: every multiplier equal to 1.
    pub fn truthful(n: usize) -> Self {
        MultiplierProfile(vec![Rational::one(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn theta(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    /// Copy of the profile with bidder `i` moved to `theta`.
    pub fn with_theta(&self, i: usize, theta: Rational) -> Result<Self> {
        if theta < Rational::one() {
            return Err(Error::MultiplierBelowOne { bidder: i, theta });
        }
        let mut next = self.0.clone();
        next[i] = theta;
        Ok(MultiplierProfile(next))
    }

    pub(crate) fn set(&mut self, i: usize, theta: Rational) {
        debug_assert!(theta >= Rational::one());
        self.0[i] = theta;
    }
}

/// `b[i][j] = theta_i * v[i][j]`.
pub fn bids_from(profile: &MultiplierProfile, inst: &Instance) -> Result<Vec<Vec<Rational>>> {
    if profile.len() != inst.num_bidders() {
        return Err(Error::Dimension(format!(
            "profile has {} multipliers for {} bidders",
            profile.len(),
            inst.num_bidders()
        )));
    }
    Ok(inst
        .values()
        .iter()
        .zip(profile.as_slice())
        .map(|(row, theta)| row.iter().map(|v| theta * v).collect())
        .collect())
}

/// The bids of every bidder in auction `j`.
pub fn auction_bids(bids: &[Vec<Rational>], j: usize) -> Vec<Rational> {
    bids.iter().map(|row| row[j].clone()).collect()
}

/// Allocation and payments of every auction. At most one winner per auction;
/// only the winner pays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    num_bidders: usize,
    winner: Vec<Option<usize>>,
    payment: Vec<Rational>,
}

impl Outcome {
    /// `payment[j]` is what the winner of auction `j` pays; it must be zero
    /// when the auction has no winner.
    pub fn new(num_bidders: usize, winner: Vec<Option<usize>>, payment: Vec<Rational>) -> Result<Self> {
        if winner.len() != payment.len() {
            return Err(Error::Dimension(format!(
                "{} winners but {} payments",
                winner.len(),
                payment.len()
            )));
        }
        for (j, (w, p)) in winner.iter().zip(&payment).enumerate() {
            if p.is_negative() {
                return Err(Error::InvalidParameter(format!("negative payment {p} in auction {j}")));
            }
            match w {
                Some(i) if *i >= num_bidders => {
                    return Err(Error::BidderOutOfRange {
                        bidder: *i,
                        bidders: num_bidders,
                    })
                }
                None if !p.is_zero() => {
                    return Err(Error::InvalidParameter(format!(
                        "auction {j} has payment {p} but no winner"
                    )))
                }
                _ => {}
            }
        }
        Ok(Outcome {
            num_bidders,
            winner,
            payment,
        })
    }

    /// No auction allocated.
    pub fn empty(num_bidders: usize, num_auctions: usize) -> Self {
        Outcome {
            num_bidders,
            winner: vec![None; num_auctions],
            payment: vec![Rational::zero(); num_auctions],
        }
    }

    pub fn num_bidders(&self) -> usize {
        self.num_bidders
    }

    pub fn num_auctions(&self) -> usize {
        self.winner.len()
    }

    pub fn winner(&self, j: usize) -> Option<usize> {
        self.winner[j]
    }

    pub fn winners(&self) -> &[Option<usize>] {
        &self.winner
    }

    /// `x[i][j]`.
    pub fn allocated(&self, i: usize, j: usize) -> bool {
        self.winner[j] == Some(i)
    }

    /// `p[i][j]`.
    pub fn payment(&self, i: usize, j: usize) -> Rational {
        if self.allocated(i, j) {
            self.payment[j].clone()
        } else {
            Rational::zero()
        }
    }

    /// Payment collected in auction `j`, whoever won it.
    pub fn auction_payment(&self, j: usize) -> &Rational {
        &self.payment[j]
    }

    /// Auctions won by bidder `i`, ascending.
    pub fn won_by(&self, i: usize) -> Vec<usize> {
        (0..self.num_auctions()).filter(|&j| self.allocated(i, j)).collect()
    }

    pub fn bidder_value(&self, inst: &Instance, i: usize) -> Rational {
        self.won_by(i).into_iter().map(|j| inst.value(i, j)).sum()
    }

    pub fn bidder_payment(&self, i: usize) -> Rational {
        self.won_by(i).into_iter().map(|j| &self.payment[j]).sum()
    }

    fn check_against(&self, inst: &Instance) -> Result<()> {
        if self.num_bidders != inst.num_bidders() || self.num_auctions() != inst.num_auctions() {
            return Err(Error::Dimension(format!(
                "outcome is {}x{}, instance is {}x{}",
                self.num_bidders,
                self.num_auctions(),
                inst.num_bidders(),
                inst.num_auctions()
            )));
        }
        Ok(())
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let x: Vec<Vec<u8>> = (0..self.num_bidders)
            .map(|i| (0..self.num_auctions()).map(|j| self.allocated(i, j) as u8).collect())
            .collect();
        let p: Vec<Vec<Rational>> = (0..self.num_bidders)
            .map(|i| (0..self.num_auctions()).map(|j| self.payment(i, j)).collect())
            .collect();
        let mut s = serializer.serialize_struct("Outcome", 3)?;
        s.serialize_field("x", &x)?;
        s.serialize_field("p", &p)?;
        s.serialize_field("winner", &self.winner)?;
        s.end()
    }
}

/// Realized welfare `sum x[i][j] * (v[i][j] - c[i][j])`. May be negative.
pub fn welfare(inst: &Instance, out: &Outcome) -> Result<Rational> {
    out.check_against(inst)?;
    Ok(out
        .winners()
        .iter()
        .enumerate()
        .filter_map(|(j, w)| w.map(|i| inst.surplus(i, j)))
        .sum())
}

/// `sum_j max(0, max_i (v[i][j] - c[i][j]))`.
pub fn optimal_welfare(inst: &Instance) -> Rational {
    (0..inst.num_auctions())
        .map(|j| {
            (0..inst.num_bidders())
                .map(|i| inst.surplus(i, j))
                .fold(Rational::zero(), std::cmp::max)
        })
        .sum()
}

/// Whether bidder `i`'s total value covers its total payment.
pub fn roi_satisfied(i: usize, inst: &Instance, out: &Outcome) -> bool {
    out.bidder_value(inst, i) >= out.bidder_payment(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn bids_scale_values() {
        let inst = Instance::from_integers(&[&[2, 3]], &[&[0, 0]]).unwrap();
        let bids = bids_from(&MultiplierProfile::truthful(1), &inst).unwrap();
        assert_eq!(bids, vec![vec![r(2, 1), r(3, 1)]]);

        let inst = Instance::from_integers(&[&[2, 1, 1]], &[&[1, 1, 2]]).unwrap();
        let prof = MultiplierProfile::new(vec![r(3, 2)]).unwrap();
        assert_eq!(
            bids_from(&prof, &inst).unwrap(),
            vec![vec![r(3, 1), r(3, 2), r(3, 2)]]
        );

        let inst = Instance::from_integers(&[&[1, 0], &[5, 5]], &[&[0, 0], &[0, 0]]).unwrap();
        let prof = MultiplierProfile::new(vec![r(2, 1), r(1, 1)]).unwrap();
        assert_eq!(
            bids_from(&prof, &inst).unwrap(),
            vec![vec![r(2, 1), r(0, 1)], vec![r(5, 1), r(5, 1)]]
        );
    }

    #[test]
    fn bids_dimension_mismatch() {
        let inst = Instance::from_integers(&[&[2, 3]], &[&[0, 0]]).unwrap();
        assert!(matches!(
            bids_from(&MultiplierProfile::truthful(2), &inst),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn profile_rejects_multiplier_below_one() {
        assert!(matches!(
            MultiplierProfile::new(vec![r(1, 1), r(1, 2)]),
            Err(Error::MultiplierBelowOne { bidder: 1, .. })
        ));
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(
            Instance::from_integers(&[&[1, 2], &[3]], &[&[0, 0], &[0, 0]]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            Instance::from_integers(&[&[1]], &[&[-1]]),
            Err(Error::NegativeEntry { matrix: "costs", row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn welfare_examples() {
        let inst = Instance::from_integers(&[&[5]], &[&[1]]).unwrap();
        assert_eq!(welfare(&inst, &Outcome::empty(1, 1)).unwrap(), Rational::zero());
        let out = Outcome::new(1, vec![Some(0)], vec![r(4, 1)]).unwrap();
        assert_eq!(welfare(&inst, &out).unwrap(), r(4, 1));

        // negative welfare is representable
        let inst = Instance::from_integers(&[&[1]], &[&[3]]).unwrap();
        let out = Outcome::new(1, vec![Some(0)], vec![r(0, 1)]).unwrap();
        assert_eq!(welfare(&inst, &out).unwrap(), r(-2, 1));
    }

    #[test]
    fn optimal_welfare_examples() {
        let inst = Instance::from_integers(&[&[1]], &[&[2]]).unwrap();
        assert_eq!(optimal_welfare(&inst), Rational::zero());
        let inst = Instance::from_integers(&[&[3, 7]], &[&[2, 2]]).unwrap();
        assert_eq!(optimal_welfare(&inst), r(6, 1));
    }

    #[test]
    fn roi_examples() {
        let inst = Instance::from_integers(&[&[5, 2, 1]], &[&[0, 0, 0]]).unwrap();
        assert!(roi_satisfied(0, &inst, &Outcome::empty(1, 3)));
        let one = Outcome::new(1, vec![Some(0), None, None], vec![r(4, 1), r(0, 1), r(0, 1)]).unwrap();
        assert!(roi_satisfied(0, &inst, &one));
        let two = Outcome::new(1, vec![None, Some(0), Some(0)], vec![r(0, 1), r(3, 1), r(1, 1)]).unwrap();
        assert!(!roi_satisfied(0, &inst, &two));
    }

    #[test]
    fn outcome_rejects_payment_without_winner() {
        assert!(Outcome::new(1, vec![None], vec![r(1, 1)]).is_err());
    }

    #[test]
    fn outcome_json_shape() {
        let out = Outcome::new(2, vec![Some(1), None], vec![r(3, 2), r(0, 1)]).unwrap();
        let json = serde_json::to_value(&out).unwrap();
        assert_eq!(json["x"], serde_json::json!([[0, 0], [1, 0]]));
        assert_eq!(json["p"][1][0], "3/2");
        assert_eq!(json["winner"], serde_json::json!([1, null]));
    }

    fn small_instance() -> impl Strategy<Value = (usize, usize, Vec<i64>, Vec<i64>)> {
        (1usize..5, 1usize..5).prop_flat_map(|(n, m)| {
            (
                Just(n),
                Just(m),
                proptest::collection::vec(0i64..12, n * m),
                proptest::collection::vec(0i64..12, n * m),
            )
        })
    }

    fn build(n: usize, m: usize, v: &[i64], c: &[i64]) -> Instance {
        let rows = |xs: &[i64]| -> Vec<Vec<Rational>> {
            xs.chunks(m)
                .map(|row| row.iter().map(|&x| Rational::new(x, 4)).collect())
                .collect()
        };
        Instance::new(n, m, rows(v), rows(c)).unwrap()
    }

    proptest! {
        #[test]
        fn optimum_invariant_under_permutations((n, m, v, c) in small_instance(), rot_b in 0usize..4, rot_a in 0usize..4) {
            let inst = build(n, m, &v, &c);
            let rb = rot_b % n;
            let ra = rot_a % m;
            let permute = |mat: &[Vec<Rational>]| -> Vec<Vec<Rational>> {
                let mut rows: Vec<Vec<Rational>> = mat.to_vec();
                rows.rotate_left(rb);
                rows.iter_mut().for_each(|row| { row.rotate_left(ra); row.reverse(); });
                rows
            };
            let permuted = Instance::new(n, m, permute(inst.values()), permute(inst.costs())).unwrap();
            prop_assert_eq!(optimal_welfare(&inst), optimal_welfare(&permuted));
        }

        #[test]
        fn any_single_winner_allocation_is_at_most_optimal((n, m, v, c) in small_instance(), picks in proptest::collection::vec(0usize..6, 4)) {
            let inst = build(n, m, &v, &c);
            let winner: Vec<Option<usize>> = (0..m).map(|j| {
                let k = picks[j % picks.len()];
                (k < n).then_some(k)
            }).collect();
            let out = Outcome::new(n, winner, vec![Rational::zero(); m]).unwrap();
            prop_assert!(welfare(&inst, &out).unwrap() <= optimal_welfare(&inst));
        }

        #[test]
        fn bids_dominate_values((n, m, v, c) in small_instance(), extra in proptest::collection::vec(0i64..20, 4)) {
            let inst = build(n, m, &v, &c);
            let theta = (0..n).map(|i| Rational::one() + Rational::new(extra[i], 7)).collect();
            let prof = MultiplierProfile::new(theta).unwrap();
            let bids = bids_from(&prof, &inst).unwrap();
            for (i, row) in bids.iter().enumerate() {
                for (j, bid) in row.iter().enumerate() {
                    prop_assert!(*bid >= *inst.value(i, j));
                }
            }
        }
    }
}
