//! Bulk property checking over a seeded random instance family.
//!
//! For each seed and mechanism this clears the instance under three profiles
//! (truthful, a seeded random one, and the profile reached by best-response
//! dynamics) and checks:
//!
//! * truthfulness probes and critical-bid (Myerson) consistency,
//! * best response against the brute-force oracle,
//! * the core-auction inequality and the `max(A, B) <= welfare` bound
//!   (bidder-dependent mechanism, ROI-feasible profiles),
//! * the welfare-ratio guarantee of each mechanism on verified equilibria.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bestresponse::{best_response, best_response_oracle, quasilinear_best_bid_check, ResponseProblem};
use crate::equilibrium::{core_auctions, diagnostics, run_dynamics, DynamicsConfig, EquilibriumReport};
use crate::error::Result;
use crate::instances::{random_family_member, random_instance, to_json, RandomFamilyParams};
use crate::mechanisms::{compute_bidder_params, run_all, MechanismKind, MechanismSpec};
use crate::model::{auction_bids, bids_from, roi_satisfied, welfare, Instance, MultiplierProfile};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Truthfulness,
    CriticalBid,
    OracleAgreement,
    CoreAuctionLemma,
    WelfareBoundsLemma,
    WelfareGuarantee,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Truthfulness => "truthfulness",
            CheckKind::CriticalBid => "critical-bid",
            CheckKind::OracleAgreement => "oracle-agreement",
            CheckKind::CoreAuctionLemma => "core-auction-lemma",
            CheckKind::WelfareBoundsLemma => "welfare-bounds-lemma",
            CheckKind::WelfareGuarantee => "welfare-guarantee",
        })
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub first_seed: u64,
    pub seeds: u64,
    pub max_bidders: usize,
    pub max_auctions: usize,
    pub mechanisms: Vec<MechanismKind>,
    pub template: RandomFamilyParams,
    pub max_rounds: usize,
    pub tolerance: Rational,
    pub oracle_grid: usize,
}

impl VerifyConfig {
    /// 500 seeds, up to 4 bidders and 4 auctions, every mechanism (the global
    /// one at multiplier 1), 50 rounds, exact verification.
    pub fn new() -> Self {
        VerifyConfig {
            first_seed: 0,
            seeds: 500,
            max_bidders: 4,
            max_auctions: 4,
            mechanisms: all_mechanisms(),
            template: RandomFamilyParams::new(1, 1, 0),
            max_rounds: 50,
            tolerance: Rational::zero(),
            oracle_grid: 12,
        }
    }
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig::new()
    }
}

pub fn all_mechanisms() -> Vec<MechanismKind> {
    vec![
        MechanismKind::SecondPrice,
        MechanismKind::Global { gamma: Rational::one() },
        MechanismKind::SingleBidder,
        MechanismKind::AuctionDependent,
        MechanismKind::BidderDependent,
    ]
}

/// Repro data for one failed check.
#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub check: CheckKind,
    pub seed: u64,
    pub mechanism: String,
    pub detail: String,
    pub profile: Option<MultiplierProfile>,
    pub instance: serde_json::Value,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Tally {
    pub checks: u64,
    pub violations: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DynamicsStats {
    pub runs: u64,
    pub converged: u64,
    pub verified: u64,
    pub nonconverged: u64,
    /// Runs whose instance has positive optimal welfare.
    pub positive_opt: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifySummary {
    pub instances: u64,
    pub dynamics: BTreeMap<String, DynamicsStats>,
    pub checks: BTreeMap<CheckKind, Tally>,
    pub violations: Vec<Violation>,
}

impl VerifySummary {
    pub fn total_violations(&self) -> u64 {
        self.checks.values().map(|t| t.violations).sum()
    }

    pub fn tally(&self, kind: CheckKind) -> Tally {
        self.checks.get(&kind).cloned().unwrap_or_default()
    }

    fn merge(&mut self, other: VerifySummary) {
        self.instances += other.instances;
        for (k, s) in other.dynamics {
            let e = self.dynamics.entry(k).or_default();
            e.runs += s.runs;
            e.converged += s.converged;
            e.verified += s.verified;
            e.nonconverged += s.nonconverged;
            e.positive_opt += s.positive_opt;
        }
        for (k, t) in other.checks {
            let e = self.checks.entry(k).or_default();
            e.checks += t.checks;
            e.violations += t.violations;
        }
        self.violations.extend(other.violations);
    }
}

struct SeedRun<'a> {
    seed: u64,
    inst: &'a Instance,
    mechanism: String,
    summary: VerifySummary,
}

impl SeedRun<'_> {
    fn check(&mut self, kind: CheckKind, ok: bool, profile: Option<&MultiplierProfile>, detail: impl FnOnce() -> String) {
        let tally = self.summary.checks.entry(kind).or_default();
        tally.checks += 1;
        if !ok {
            tally.violations += 1;
            self.summary.violations.push(Violation {
                check: kind,
                seed: self.seed,
                mechanism: self.mechanism.clone(),
                detail: detail(),
                profile: profile.cloned(),
                instance: serde_json::from_str(&to_json(self.inst)).expect("instance json"),
            });
        }
    }
}

/// Multipliers drawn from `{1, 5/4, ..., 3}`.
fn random_profile(n: usize, seed: u64) -> MultiplierProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0ddb_a110);
    let theta = (0..n).map(|_| Rational::new(4 + rng.gen_range(0..=8), 4)).collect();
    MultiplierProfile::new(theta).expect("multipliers are at least 1")
}

fn check_profile(run: &mut SeedRun, spec: &MechanismSpec, profile: &MultiplierProfile, oracle_grid: usize) -> Result<()> {
    let inst = run.inst;
    let n = inst.num_bidders();
    let bids = bids_from(profile, inst)?;
    let out = run_all(spec, inst, profile)?;

    for j in 0..inst.num_auctions() {
        let col = auction_bids(&bids, j);
        for i in 0..n {
            let t = spec.min_winning_bid(inst, j, i, &col)?;
            let wins = out.winner(j) == Some(i);
            let consistent = t.clears(&col[i]) == wins
                && (!wins || t.value.finite() == Some(out.auction_payment(j)));
            run.check(CheckKind::CriticalBid, consistent, Some(profile), || {
                format!(
                    "auction {j}, bidder {i}: bid {}, threshold {:?}, winner {:?}, payment {}",
                    col[i],
                    t,
                    out.winner(j),
                    out.auction_payment(j)
                )
            });

            let truthful = quasilinear_best_bid_check(i, j, inst, spec, &col)?;
            run.check(CheckKind::Truthfulness, truthful, Some(profile), || {
                format!("auction {j}, bidder {i}: a probe bid beats the true value")
            });
        }
    }

    for i in 0..n {
        let problem = ResponseProblem::new(i, inst, spec, profile)?;
        let fast = best_response(&problem)?;
        let slow = best_response_oracle(&problem, oracle_grid)?;
        run.check(
            CheckKind::OracleAgreement,
            fast.total_value == slow.total_value && fast.total_value >= fast.total_payment,
            Some(profile),
            || format!("bidder {i}: best response {fast:?}, oracle {slow:?}"),
        );
    }

    if let MechanismSpec::BidderDependent(params) = spec {
        if (0..n).all(|i| roi_satisfied(i, inst, &out)) {
            let d = diagnostics(inst, params, profile, &out)?;
            let w = welfare(inst, &out)?;
            run.check(
                CheckKind::WelfareBoundsLemma,
                d.a <= w && d.b <= w,
                Some(profile),
                || format!("A = {}, B = {}, welfare = {w}", d.a, d.b),
            );
        }
    }
    Ok(())
}

/// Fraction of optimal welfare each mechanism guarantees on a verified
/// equilibrium; `None` when it promises nothing on this instance.
fn guarantee(kind: &MechanismKind, inst: &Instance) -> Option<Rational> {
    match kind {
        MechanismKind::SecondPrice if inst.has_zero_costs() => Some(Rational::new(1, 2)),
        MechanismKind::AuctionDependent => Some(Rational::new(1, 2)),
        MechanismKind::BidderDependent => Some(Rational::new(1, 4)),
        MechanismKind::SingleBidder => Some(Rational::one()),
        _ => None,
    }
}

fn check_guarantee(run: &mut SeedRun, kind: &MechanismKind, report: &EquilibriumReport, tolerance: &Rational) {
    let stats = run.summary.dynamics.entry(kind.to_string()).or_default();
    stats.runs += 1;
    stats.converged += report.converged as u64;
    stats.verified += report.verified as u64;
    stats.nonconverged += (!report.converged) as u64;
    stats.positive_opt += report.opt.is_positive() as u64;

    let Some(fraction) = guarantee(kind, run.inst) else {
        return;
    };
    if *kind == MechanismKind::SingleBidder {
        // the calibrated single-bidder mechanism must reach full efficiency
        if report.opt.is_positive() {
            let ok = report.converged && report.verified && report.poa == Some(Rational::one());
            run.check(CheckKind::WelfareGuarantee, ok, Some(&report.profile), || {
                format!(
                    "converged {}, verified {}, welfare {} of {}",
                    report.converged, report.verified, report.welfare, report.opt
                )
            });
        }
        return;
    }
    if !(report.converged && report.verified) {
        return;
    }
    let n = Rational::from_integer(run.inst.num_bidders() as i64);
    let bound = &fraction * &report.opt - n * tolerance;
    run.check(CheckKind::WelfareGuarantee, report.welfare >= bound, Some(&report.profile), || {
        format!("welfare {} below {} of optimum {}", report.welfare, fraction, report.opt)
    });
}

fn verify_seed(config: &VerifyConfig, seed: u64) -> Result<VerifySummary> {
    let multi = random_family_member(&config.template, config.max_bidders, config.max_auctions, seed)?;
    let single = {
        let m = random_family_member(&config.template, 1, config.max_auctions, seed)?.num_auctions();
        random_instance(&RandomFamilyParams {
            num_bidders: 1,
            num_auctions: m,
            seed,
            ..config.template.clone()
        })?
    };

    let mut summary = VerifySummary {
        instances: 1,
        ..VerifySummary::default()
    };

    // bid-independent: sum over T_i of surplus is at least half of that over S_i
    {
        let mut run = SeedRun {
            seed,
            inst: &multi,
            mechanism: "-".into(),
            summary: VerifySummary::default(),
        };
        let params = compute_bidder_params(&multi);
        let core = core_auctions(&multi, &params);
        for (i, core_set) in core.iter().enumerate() {
            let over = |set: &[usize]| -> Rational { set.iter().map(|&j| multi.surplus(i, j)).sum() };
            let core_sum = over(core_set);
            let all_sum = over(&params.rightful[i]);
            run.check(
                CheckKind::CoreAuctionLemma,
                &core_sum * Rational::from_integer(2) >= all_sum,
                None,
                || format!("bidder {i}: core surplus {core_sum}, rightful surplus {all_sum}"),
            );
        }
        summary.merge(run.summary);
    }

    for kind in &config.mechanisms {
        let inst = if *kind == MechanismKind::SingleBidder { &single } else { &multi };
        let spec = kind.instantiate(inst)?;
        let mut run = SeedRun {
            seed,
            inst,
            mechanism: kind.to_string(),
            summary: VerifySummary::default(),
        };
        let dyn_config = DynamicsConfig::new(inst.num_bidders())
            .with_max_rounds(config.max_rounds)
            .with_tolerance(config.tolerance.clone());
        let report = run_dynamics(inst, &spec, &dyn_config)?;
        check_guarantee(&mut run, kind, &report, &config.tolerance);

        let truthful = MultiplierProfile::truthful(inst.num_bidders());
        let random = random_profile(inst.num_bidders(), seed);
        for profile in [&truthful, &random, &report.profile] {
            check_profile(&mut run, &spec, profile, config.oracle_grid)?;
        }
        summary.merge(run.summary);
    }
    Ok(summary)
}

/// Runs every check over seeds `first_seed .. first_seed + seeds`. Seeds are
/// processed in parallel; the summary and violation list are in seed order.
pub fn verify(config: &VerifyConfig) -> Result<VerifySummary> {
    let per_seed = (config.first_seed..config.first_seed + config.seeds)
        .into_par_iter()
        .map(|seed| verify_seed(config, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = VerifySummary::default();
    for s in per_seed {
        summary.merge(s);
    }
    Ok(summary)
}
