use proptest::prelude::*;

use arena::bestresponse::{best_response, ResponseProblem};
use arena::equilibrium::{run_dynamics, DynamicsConfig};
use arena::instances::{random_instance, RandomFamilyParams};
use arena::mechanisms::run_all;
use arena::model::{auction_bids, bids_from, roi_satisfied, welfare};
use arena::{Instance, MechanismKind, MechanismSpec, MultiplierProfile, Rational};

fn instance(n: usize, m: usize, seed: u64, zero_cost: Rational) -> Instance {
    random_instance(&RandomFamilyParams::new(n, m, seed).with_zero_cost_probability(zero_cost)).unwrap()
}

fn multiplier() -> impl Strategy<Value = Rational> {
    (4i64..=16).prop_map(|q| Rational::new(q, 4))
}

fn multi_bidder_kind() -> impl Strategy<Value = MechanismKind> {
    prop_oneof![
        Just(MechanismKind::SecondPrice),
        (0i64..=8).prop_map(|g| MechanismKind::Global { gamma: Rational::new(g, 4) }),
        Just(MechanismKind::AuctionDependent),
        Just(MechanismKind::BidderDependent),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_a_winning_bid_keeps_the_win(
        seed in any::<u64>(),
        n in 1usize..=4,
        kind in multi_bidder_kind(),
        thetas in prop::collection::vec(multiplier(), 4),
        raise in 0i64..=8,
    ) {
        let inst = instance(n, 3, seed, Rational::new(1, 8));
        let spec = kind.instantiate(&inst).unwrap();
        let profile = MultiplierProfile::new(thetas[..n].to_vec()).unwrap();
        let bids = bids_from(&profile, &inst).unwrap();
        for j in 0..inst.num_auctions() {
            let col = auction_bids(&bids, j);
            let res = spec.run_auction(&inst, j, &col).unwrap();
            if let Some(w) = res.winner {
                let mut higher = col.clone();
                higher[w] = &higher[w] + Rational::new(raise, 4);
                let again = spec.run_auction(&inst, j, &higher).unwrap();
                prop_assert_eq!(again.winner, Some(w));
                prop_assert_eq!(again.payment, res.payment.clone());
            }
        }
    }

    #[test]
    fn winner_pays_its_critical_bid(
        seed in any::<u64>(),
        n in 1usize..=4,
        kind in multi_bidder_kind(),
        thetas in prop::collection::vec(multiplier(), 4),
    ) {
        let inst = instance(n, 4, seed, Rational::new(1, 8));
        let spec = kind.instantiate(&inst).unwrap();
        let profile = MultiplierProfile::new(thetas[..n].to_vec()).unwrap();
        let out = run_all(&spec, &inst, &profile).unwrap();
        let bids = bids_from(&profile, &inst).unwrap();
        for j in 0..inst.num_auctions() {
            if let Some(w) = out.winner(j) {
                let t = spec.min_winning_bid(&inst, j, w, &auction_bids(&bids, j)).unwrap();
                prop_assert_eq!(t.value.finite(), Some(out.auction_payment(j)));
                prop_assert!(out.auction_payment(j) <= &bids[w][j]);
            }
        }
    }

    #[test]
    fn zero_multiplier_matches_second_price_without_costs(
        seed in any::<u64>(),
        n in 1usize..=4,
        thetas in prop::collection::vec(multiplier(), 4),
    ) {
        let inst = instance(n, 4, seed, Rational::one());
        let profile = MultiplierProfile::new(thetas[..n].to_vec()).unwrap();
        let sp = run_all(&MechanismSpec::SecondPrice, &inst, &profile).unwrap();
        let global = run_all(&MechanismSpec::GlobalCostMultiplier { gamma: Rational::zero() }, &inst, &profile).unwrap();
        prop_assert_eq!(sp.winners(), global.winners());
        for j in 0..inst.num_auctions() {
            prop_assert_eq!(sp.auction_payment(j), global.auction_payment(j));
        }
    }

    #[test]
    fn best_response_beats_every_feasible_grid_multiplier(
        seed in any::<u64>(),
        n in 1usize..=3,
        kind in multi_bidder_kind(),
        thetas in prop::collection::vec(multiplier(), 3),
    ) {
        let inst = instance(n, 3, seed, Rational::new(1, 8));
        let spec = kind.instantiate(&inst).unwrap();
        let profile = MultiplierProfile::new(thetas[..n].to_vec()).unwrap();
        let br = best_response(&ResponseProblem::new(0, &inst, &spec, &profile).unwrap()).unwrap();
        prop_assert!(br.theta >= Rational::one());
        prop_assert!(br.total_payment <= br.total_value);
        for q in 4i64..=40 {
            let probe = profile.with_theta(0, Rational::new(q, 4)).unwrap();
            let out = run_all(&spec, &inst, &probe).unwrap();
            if roi_satisfied(0, &inst, &out) {
                prop_assert!(out.bidder_value(&inst, 0) <= br.total_value.clone());
            }
        }
    }

    #[test]
    fn dynamics_reports_are_consistent(
        seed in any::<u64>(),
        n in 1usize..=3,
        kind in multi_bidder_kind(),
    ) {
        let inst = instance(n, 3, seed, Rational::new(1, 8));
        let spec = kind.instantiate(&inst).unwrap();
        let config = DynamicsConfig::new(n);
        let report = run_dynamics(&inst, &spec, &config).unwrap();
        prop_assert_eq!(&report.welfare, &welfare(&inst, &report.outcome).unwrap());
        prop_assert!(report.welfare <= report.opt);
        if report.converged {
            prop_assert!(report.verified);
        }
        let again = run_dynamics(&inst, &spec, &config).unwrap();
        prop_assert_eq!(report.profile, again.profile);
    }
}
