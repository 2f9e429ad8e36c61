//! Instance generators and the JSON instance file format.

use std::fs;
use std::path::Path;

use num::traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rational::Rational;

/// Parameter of the global-multiplier lower-bound family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleParams {
    delta: Rational,
}

impl CounterexampleParams {
    /// `delta` must lie strictly between 0 and 1/3.
    pub fn new(delta: Rational) -> Result<Self> {
        if !delta.is_positive() || delta >= Rational::new(1, 3) {
            return Err(Error::DeltaOutOfRange(delta));
        }
        Ok(CounterexampleParams { delta })
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    /// `floor(1 / delta)`.
    pub fn num_bidders(&self) -> usize {
        self.delta
            .recip()
            .floor()
            .to_usize()
            .expect("1/delta fits in usize")
    }

    /// Critical multiplier interval `(1 + delta^(k+1), 1 + delta^k]` of the
    /// bidder with 0-based index `i` (`k = i + 1`).
    pub fn interval(&self, i: usize) -> (Rational, Rational) {
        let k = i as i32 + 1;
        (
            Rational::one() + self.delta.pow(k + 1),
            Rational::one() + self.delta.pow(k),
        )
    }
}

/// `n = floor(1/delta)` bidders and `2n` auctions. Bidder `i` (0-based, so
/// `k = i + 1`) is only present in auctions `2i` and `2i + 1`:
///
/// | auction  | value           | cost        |
/// |----------|-----------------|-------------|
/// | `2i`     | `delta`         | `1 - delta` |
/// | `2i + 1` | `1 + delta^-k`  | `delta^-k`  |
pub fn counterexample(params: &CounterexampleParams) -> Instance {
    let n = params.num_bidders();
    let m = 2 * n;
    let delta = params.delta();
    let one = Rational::one();
    let mut values = vec![vec![Rational::zero(); m]; n];
    let mut costs = vec![vec![Rational::zero(); m]; n];
    for i in 0..n {
        let big = delta.pow(-(i as i32 + 1));
        values[i][2 * i] = delta.clone();
        costs[i][2 * i] = &one - delta;
        values[i][2 * i + 1] = &one + &big;
        costs[i][2 * i + 1] = big;
    }
    Instance::new(n, m, values, costs).expect("counterexample entries are nonnegative")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomFamilyParams {
    pub num_bidders: usize,
    pub num_auctions: usize,
    pub value_max: Rational,
    pub cost_max: Rational,
    pub grid_denominator: u64,
    pub seed: u64,
    pub zero_cost_probability: Rational,
}

impl RandomFamilyParams {
    /// Values on `{0, 1/4, ..., 4}`, costs on `{0, 1/4, ..., 3}`, one cost in
    /// eight forced to zero.
    pub fn new(num_bidders: usize, num_auctions: usize, seed: u64) -> Self {
        RandomFamilyParams {
            num_bidders,
            num_auctions,
            value_max: Rational::from_integer(4),
            cost_max: Rational::from_integer(3),
            grid_denominator: 4,
            seed,
            zero_cost_probability: Rational::new(1, 8),
        }
    }

    pub fn with_zero_cost_probability(mut self, p: Rational) -> Self {
        self.zero_cost_probability = p;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.grid_denominator == 0 {
            return Err(Error::InvalidParameter("grid denominator must be positive".into()));
        }
        if self.value_max.is_negative() || self.cost_max.is_negative() {
            return Err(Error::InvalidParameter("value_max and cost_max must be nonnegative".into()));
        }
        if self.zero_cost_probability.is_negative() || self.zero_cost_probability > Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "zero-cost probability {} outside [0, 1]",
                self.zero_cost_probability
            )));
        }
        Ok(())
    }
}

fn grid_steps(max: &Rational, den: u64) -> Result<u64> {
    (max * Rational::from(num::BigInt::from(den)))
        .floor()
        .to_u64()
        .ok_or_else(|| Error::InvalidParameter(format!("grid too fine for maximum {max}")))
}

/// Grid-valued instance drawn from a ChaCha8 stream seeded with `seed`.
pub fn random_instance(params: &RandomFamilyParams) -> Result<Instance> {
    params.validate()?;
    let den = params.grid_denominator;
    let value_steps = grid_steps(&params.value_max, den)?;
    let cost_steps = grid_steps(&params.cost_max, den)?;
    let p_num = params
        .zero_cost_probability
        .numer()
        .to_u64()
        .ok_or_else(|| Error::InvalidParameter("zero-cost probability too fine".into()))?;
    let p_den = params
        .zero_cost_probability
        .denom()
        .to_u64()
        .ok_or_else(|| Error::InvalidParameter("zero-cost probability too fine".into()))?;
    let grid = |k: u64| Rational::from(num::BigInt::from(k)) / Rational::from(num::BigInt::from(den));

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (n, m) = (params.num_bidders, params.num_auctions);
    let mut values = vec![Vec::with_capacity(m); n];
    let mut costs = vec![Vec::with_capacity(m); n];
    for i in 0..n {
        for _ in 0..m {
            values[i].push(grid(rng.gen_range(0..=value_steps)));
            let zero = rng.gen_range(0..p_den) < p_num;
            let k = rng.gen_range(0..=cost_steps);
            costs[i].push(if zero { Rational::zero() } else { grid(k) });
        }
    }
    Instance::new(n, m, values, costs)
}

/// Random instance whose dimensions are themselves drawn from `seed`:
/// `n` uniform in `1..=max_bidders`, `m` uniform in `1..=max_auctions`.
pub fn random_family_member(
    template: &RandomFamilyParams,
    max_bidders: usize,
    max_auctions: usize,
    seed: u64,
) -> Result<Instance> {
    if max_bidders == 0 || max_auctions == 0 {
        return Err(Error::InvalidParameter("family bounds must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d_cafe_d00d);
    let params = RandomFamilyParams {
        num_bidders: rng.gen_range(1..=max_bidders),
        num_auctions: rng.gen_range(1..=max_auctions),
        seed,
        ..template.clone()
    };
    random_instance(&params)
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    num_bidders: usize,
    num_auctions: usize,
    values: Vec<Vec<String>>,
    costs: Vec<Vec<String>>,
}

fn parse_matrix(name: &str, rows: &[Vec<String>]) -> Result<Vec<Vec<Rational>>> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, text)| {
                    text.parse().map_err(|source| Error::Rational {
                        context: format!("{name}[{i}][{j}]"),
                        source,
                    })
                })
                .collect()
        })
        .collect()
}

fn render_matrix(rows: &[Vec<Rational>]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|row| row.iter().map(Rational::to_string).collect())
        .collect()
}

/// Parses the instance JSON schema; entries are `"p/q"` or finite decimals.
pub fn from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let values = parse_matrix("values", &file.values)?;
    let costs = parse_matrix("costs", &file.costs)?;
    Instance::new(file.num_bidders, file.num_auctions, values, costs)
}

/// Pretty JSON with every entry written as `"p/q"`.
pub fn to_json(inst: &Instance) -> String {
    let file = InstanceFile {
        num_bidders: inst.num_bidders(),
        num_auctions: inst.num_auctions(),
        values: render_matrix(inst.values()),
        costs: render_matrix(inst.costs()),
    };
    serde_json::to_string_pretty(&file).expect("instance serializes")
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
    from_json(&fs::read_to_string(path)?)
}

pub fn save(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let mut text = to_json(inst);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
