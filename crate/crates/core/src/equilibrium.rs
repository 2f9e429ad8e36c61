//! Best-response dynamics, equilibrium verification, welfare ratios and the
//! diagnostics of the bidder-dependent analysis.

use serde::Serialize;

use crate::bestresponse::{best_response, ResponseProblem};
use crate::error::{Error, Result};
use crate::mechanisms::{run_all, BidderDepParams, MechanismSpec};
use crate::model::{optimal_welfare, roi_satisfied, welfare, Instance, MultiplierProfile, Outcome};
use crate::rational::{ExtendedRational, Rational};

#[derive(Clone, Debug)]
pub struct DynamicsConfig {
    pub max_rounds: usize,
    /// Slack allowed between a bidder's best-response value and its achieved
    /// value when verifying an equilibrium.
    pub value_tolerance: Rational,
    pub initial_profile: MultiplierProfile,
}

impl DynamicsConfig {
    /// 50 rounds, exact verification, truthful start.
    pub fn new(num_bidders: usize) -> Self {
        DynamicsConfig {
            max_rounds: 50,
            value_tolerance: Rational::zero(),
            initial_profile: MultiplierProfile::truthful(num_bidders),
        }
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> Self {
        self.max_rounds = rounds;
        self
    }

    pub fn with_tolerance(mut self, tolerance: Rational) -> Self {
        self.value_tolerance = tolerance;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// Core auctions `T_i`.
    pub core: Vec<Vec<usize>>,
    pub aggressive: Vec<usize>,
    pub conservative: Vec<usize>,
    pub a: Rational,
    pub b: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub mechanism: MechanismSpec,
    pub profile: MultiplierProfile,
    pub converged: bool,
    pub rounds_used: usize,
    pub verified: bool,
    pub outcome: Outcome,
    pub welfare: Rational,
    pub opt: Rational,
    /// `welfare / opt`; absent when `opt` is zero.
    pub poa: Option<Rational>,
    /// Only for the bidder-dependent mechanism.
    pub diagnostics: Option<Diagnostics>,
}

/// Round-robin best responses in bidder order until a full pass changes no
/// multiplier or `max_rounds` passes have run. A bidder moves only when its
/// current multiplier falls short of the best-response value.
pub fn run_dynamics(inst: &Instance, spec: &MechanismSpec, config: &DynamicsConfig) -> Result<EquilibriumReport> {
    if config.max_rounds == 0 {
        return Err(Error::InvalidParameter("max_rounds must be at least 1".into()));
    }
    spec.check_against(inst)?;
    if config.initial_profile.len() != inst.num_bidders() {
        return Err(Error::Dimension(format!(
            "initial profile has {} multipliers for {} bidders",
            config.initial_profile.len(),
            inst.num_bidders()
        )));
    }

    let mut profile = config.initial_profile.clone();
    let mut converged = false;
    let mut rounds_used = 0;
    for round in 1..=config.max_rounds {
        rounds_used = round;
        let mut changed = false;
        for i in 0..inst.num_bidders() {
            let br = best_response(&ResponseProblem::new(i, inst, spec, &profile)?)?;
            if br.theta != *profile.theta(i) && !holds_best_value(i, inst, spec, &profile, &br.total_value)? {
                profile.set(i, br.theta);
                changed = true;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }

    let outcome = run_all(spec, inst, &profile)?;
    let verified = verify_equilibrium(inst, spec, &profile, &outcome, &config.value_tolerance)?;
    let welfare = welfare(inst, &outcome)?;
    let opt = optimal_welfare(inst);
    let poa = opt.is_positive().then(|| &welfare / &opt);
    let diagnostics = match spec {
        MechanismSpec::BidderDependent(params) => Some(diagnostics(inst, params, &profile, &outcome)?),
        _ => None,
    };
    Ok(EquilibriumReport {
        mechanism: spec.clone(),
        profile,
        converged,
        rounds_used,
        verified,
        outcome,
        welfare,
        opt,
        poa,
        diagnostics,
    })
}

/// Whether bidder `i`'s current multiplier is ROI-feasible and already wins
/// `best_value`; such a bidder keeps its multiplier.
fn holds_best_value(
    i: usize,
    inst: &Instance,
    spec: &MechanismSpec,
    profile: &MultiplierProfile,
    best_value: &Rational,
) -> Result<bool> {
    let outcome = run_all(spec, inst, profile)?;
    Ok(roi_satisfied(i, inst, &outcome) && outcome.bidder_value(inst, i) >= *best_value)
}

/// Every bidder is ROI-feasible and no best response gains more than
/// `tolerance` value.
pub fn verify_equilibrium(
    inst: &Instance,
    spec: &MechanismSpec,
    profile: &MultiplierProfile,
    outcome: &Outcome,
    tolerance: &Rational,
) -> Result<bool> {
    for i in 0..inst.num_bidders() {
        if !roi_satisfied(i, inst, outcome) {
            return Ok(false);
        }
        let br = best_response(&ResponseProblem::new(i, inst, spec, profile)?)?;
        if br.total_value - outcome.bidder_value(inst, i) > *tolerance {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `welfare / opt`, exact.
pub fn poa_ratio(inst: &Instance, out: &Outcome) -> Result<Rational> {
    let opt = optimal_welfare(inst);
    if !opt.is_positive() {
        return Err(Error::NonPositiveOptimum(opt));
    }
    Ok(welfare(inst, out)? / opt)
}

/// `(1 + alpha) * c`, with `+inf * 0 = 0`.
fn screened_cost(alpha: &ExtendedRational, c: &Rational) -> ExtendedRational {
    match alpha {
        ExtendedRational::Finite(a) => ExtendedRational::Finite((Rational::one() + a) * c),
        ExtendedRational::Infinity if c.is_positive() => ExtendedRational::Infinity,
        ExtendedRational::Infinity => ExtendedRational::Finite(Rational::zero()),
    }
}

/// `T_i = {j in S_i : v[i][j] >= (1 + alpha_i) c[i][j]}`.
pub fn core_auctions(inst: &Instance, params: &BidderDepParams) -> Vec<Vec<usize>> {
    params
        .rightful
        .iter()
        .enumerate()
        .map(|(i, set)| {
            set.iter()
                .copied()
                .filter(|&j| {
                    ExtendedRational::Finite(inst.value(i, j).clone()) >= screened_cost(&params.alpha[i], inst.cost(i, j))
                })
                .collect()
        })
        .collect()
}

/// Core auctions, the aggressive (`theta_i >= alpha_i`) / conservative split,
/// and the two welfare lower bounds `A` and `B`.
pub fn diagnostics(
    inst: &Instance,
    params: &BidderDepParams,
    profile: &MultiplierProfile,
    out: &Outcome,
) -> Result<Diagnostics> {
    let n = inst.num_bidders();
    if params.alpha.len() != n || profile.len() != n || out.num_bidders() != n {
        return Err(Error::Dimension("diagnostics inputs disagree on bidder count".into()));
    }
    let core = core_auctions(inst, params);
    let (aggressive, conservative): (Vec<usize>, Vec<usize>) = (0..n)
        .partition(|&i| ExtendedRational::Finite(profile.theta(i).clone()) >= params.alpha[i]);

    // payment minus imposed cost, summed over the bidders of auction j except `skip`
    let net = |j: usize, skip: Option<usize>| -> Rational {
        match out.winner(j) {
            Some(w) if Some(w) != skip => out.auction_payment(j) - inst.cost(w, j),
            _ => Rational::zero(),
        }
    };

    let a: Rational = conservative
        .iter()
        .flat_map(|&i| core[i].iter().map(move |&j| (i, j)))
        .filter(|&(i, j)| out.allocated(i, j))
        .map(|(i, j)| inst.surplus(i, j))
        .sum();
    let b_aggressive: Rational = aggressive
        .iter()
        .flat_map(|&i| params.rightful[i].iter())
        .map(|&j| net(j, None))
        .sum();
    let b_conservative: Rational = conservative
        .iter()
        .flat_map(|&i| core[i].iter().map(move |&j| net(j, Some(i))))
        .sum();

    Ok(Diagnostics {
        core,
        aggressive,
        conservative,
        a,
        b: b_aggressive + b_conservative,
    })
}
