//! Global-multiplier sweeps over the lower-bound family and the CSV row format.

use std::collections::BTreeSet;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{run_dynamics, DynamicsConfig, EquilibriumReport};
use crate::error::{Error, Result};
use crate::instances::{counterexample, CounterexampleParams};
use crate::mechanisms::MechanismSpec;
use crate::rational::Rational;

pub const CSV_HEADER: [&str; 8] = [
    "mechanism",
    "param_name",
    "param_value",
    "welfare",
    "opt",
    "ratio",
    "converged",
    "rounds",
];

/// Appended after [`CSV_HEADER`] when decimal columns are requested.
pub const CSV_DECIMAL_HEADER: [&str; 4] = ["param_value_dec", "welfare_dec", "opt_dec", "ratio_dec"];

const DECIMAL_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub mechanism: String,
    pub param_name: String,
    pub param_value: Rational,
    pub welfare: Rational,
    pub opt: Rational,
    /// `welfare / opt`; absent when `opt` is zero.
    pub ratio: Option<Rational>,
    pub converged: bool,
    pub rounds: usize,
}

impl SweepRow {
    pub fn from_report(mechanism: &str, param_name: &str, param_value: Rational, report: &EquilibriumReport) -> Self {
        SweepRow {
            mechanism: mechanism.to_string(),
            param_name: param_name.to_string(),
            param_value,
            welfare: report.welfare.clone(),
            opt: report.opt.clone(),
            ratio: report.poa.clone(),
            converged: report.converged,
            rounds: report.rounds_used,
        }
    }

    fn record(&self, decimals: bool) -> Vec<String> {
        let ratio = self.ratio.as_ref().map_or_else(String::new, Rational::to_string);
        let mut rec = vec![
            self.mechanism.clone(),
            self.param_name.clone(),
            self.param_value.to_string(),
            self.welfare.to_string(),
            self.opt.to_string(),
            ratio,
            self.converged.to_string(),
            self.rounds.to_string(),
        ];
        if decimals {
            let dec = |r: &Rational| r.to_decimal_string(DECIMAL_DIGITS);
            rec.push(dec(&self.param_value));
            rec.push(dec(&self.welfare));
            rec.push(dec(&self.opt));
            rec.push(self.ratio.as_ref().map_or_else(String::new, dec));
        }
        rec
    }
}

/// Writes the header and `rows`; the `p/q` columns are authoritative, the
/// optional decimal columns are for plotting.
pub fn write_csv<W: Write>(writer: W, rows: &[SweepRow], decimals: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if decimals {
        header.extend(CSV_DECIMAL_HEADER);
    }
    w.write_record(&header)?;
    for row in rows {
        w.write_record(row.record(decimals))?;
    }
    w.flush()?;
    Ok(())
}

/// `min:max:count`, `count >= 2` evenly spaced points including both ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaGrid {
    pub min: Rational,
    pub max: Rational,
    pub count: usize,
}

impl GammaGrid {
    pub fn points(&self) -> Vec<Rational> {
        let span = &self.max - &self.min;
        let steps = Rational::from_integer(self.count as i64 - 1);
        (0..self.count)
            .map(|k| &self.min + &span * Rational::from_integer(k as i64) / &steps)
            .collect()
    }
}

impl Default for GammaGrid {
    fn default() -> Self {
        GammaGrid {
            min: Rational::zero(),
            max: Rational::from_integer(2),
            count: 201,
        }
    }
}

impl FromStr for GammaGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("gamma grid `{s}` is not min:max:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(bad());
        };
        let parse = |t: &str| -> Result<Rational> {
            t.parse().map_err(|source| Error::Rational {
                context: format!("gamma grid `{s}`"),
                source,
            })
        };
        let grid = GammaGrid {
            min: parse(min)?,
            max: parse(max)?,
            count: count.trim().parse().map_err(|_| bad())?,
        };
        if grid.count < 2 || grid.min.is_negative() || grid.max < grid.min {
            return Err(Error::InvalidParameter(format!(
                "gamma grid `{s}` needs 0 <= min <= max and count >= 2"
            )));
        }
        Ok(grid)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalSweep {
    pub delta: Rational,
    pub rows: Vec<SweepRow>,
    /// Row with the largest ratio (first such gamma), relabelled as the summary.
    pub summary: SweepRow,
}

impl GlobalSweep {
    pub fn max_ratio(&self) -> Option<&Rational> {
        self.summary.ratio.as_ref()
    }

    /// Grid rows followed by the summary row.
    pub fn all_rows(&self) -> Vec<SweepRow> {
        let mut rows = self.rows.clone();
        rows.push(self.summary.clone());
        rows
    }
}

/// Multipliers at which some bidder of the family changes behavior:
/// `1 + delta^k` and `1 + delta^(k+1)` for every bidder.
pub fn critical_gammas(params: &CounterexampleParams) -> BTreeSet<Rational> {
    (0..params.num_bidders())
        .flat_map(|i| {
            let (lo, hi) = params.interval(i);
            [lo, hi]
        })
        .collect()
}

/// Runs best-response dynamics on the lower-bound instance for `delta` under
/// the global cost multiplier at every grid point and every critical point.
pub fn sweep_global(delta: &Rational, grid: &GammaGrid, config: &DynamicsConfig) -> Result<GlobalSweep> {
    let params = CounterexampleParams::new(delta.clone())?;
    let inst = counterexample(&params);
    let mut gammas: BTreeSet<Rational> = grid.points().into_iter().collect();
    gammas.extend(critical_gammas(&params));
    let gammas: Vec<Rational> = gammas.into_iter().collect();

    let rows = gammas
        .par_iter()
        .map(|gamma| {
            let spec = MechanismSpec::GlobalCostMultiplier { gamma: gamma.clone() };
            let report = run_dynamics(&inst, &spec, config)?;
            Ok(SweepRow::from_report("global", "gamma", gamma.clone(), &report))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = rows.first().cloned().ok_or_else(|| Error::InvalidParameter("empty gamma grid".into()))?;
    for row in &rows {
        if row.ratio > best.ratio {
            best = row.clone();
        }
    }
    best.mechanism = "global-max".to_string();
    Ok(GlobalSweep {
        delta: delta.clone(),
        rows,
        summary: best,
    })
}
