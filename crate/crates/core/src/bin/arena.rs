use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use arena::bestresponse::{response_table, ResponseProblem};
use arena::equilibrium::{run_dynamics, DynamicsConfig};
use arena::instances::{self, counterexample, random_instance, CounterexampleParams, RandomFamilyParams};
use arena::sweep::{sweep_global, write_csv, GammaGrid, SweepRow};
use arena::verify::{all_mechanisms, verify, CheckKind, VerifyConfig};
use arena::{Error, MechanismKind, MultiplierProfile, Rational, Result};

#[derive(Parser)]
#[command(name = "arena", version, about = "Autobidding auctions with user costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run best-response dynamics on an instance and print the report as JSON.
    Run(RunArgs),
    /// Sweep the global cost multiplier over the lower-bound instance.
    SweepGlobal(SweepArgs),
    /// Check every property over a seeded random family.
    Verify(VerifyArgs),
    /// Write an instance file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Print the critical-ratio table behind one bidder's best response.
    DebugBr(DebugArgs),
}

#[derive(Args)]
struct DynamicsFlags {
    #[arg(long, default_value_t = 50)]
    max_rounds: usize,
    /// Allowed best-response value gain when verifying an equilibrium.
    #[arg(long, default_value = "0")]
    tolerance: Rational,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    /// second-price, global:<gamma>, single-bidder, auction-dep or bidder-dep
    #[arg(long)]
    mechanism: MechanismKind,
    #[command(flatten)]
    dynamics: DynamicsFlags,
    /// Also write a one-row CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add decimal columns to CSV output.
    #[arg(long)]
    decimals: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    delta: Rational,
    /// Grid as min:max:count; the critical multipliers are always added.
    #[arg(long, default_value = "0:2:201")]
    gamma: GammaGrid,
    #[command(flatten)]
    dynamics: DynamicsFlags,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    decimals: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 500)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, default_value_t = 4)]
    max_bidders: usize,
    #[arg(long, default_value_t = 4)]
    max_auctions: usize,
    /// Comma-separated mechanism labels, or `all`.
    #[arg(long, default_value = "all")]
    mechanism: String,
    #[arg(long, default_value = "1/8")]
    zero_cost_probability: Rational,
    #[arg(long, default_value_t = 4)]
    grid_denominator: u64,
    #[command(flatten)]
    dynamics: DynamicsFlags,
    /// Write violation repro dumps (JSON) here instead of stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// The global-multiplier lower-bound instance.
    Counterexample {
        #[arg(long)]
        delta: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A grid-valued random instance.
    Random {
        #[arg(long)]
        bidders: usize,
        #[arg(long)]
        auctions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "4")]
        value_max: Rational,
        #[arg(long, default_value = "3")]
        cost_max: Rational,
        #[arg(long, default_value_t = 4)]
        grid_denominator: u64,
        #[arg(long, default_value = "1/8")]
        zero_cost_probability: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DebugArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    mechanism: MechanismKind,
    /// 0-based bidder index.
    #[arg(long, default_value_t = 0)]
    bidder: usize,
    /// Comma-separated multipliers of all bidders (the bidder's own entry is
    /// ignored); all 1 when absent.
    #[arg(long)]
    theta: Option<String>,
}

fn dynamics_config(n: usize, flags: &DynamicsFlags) -> DynamicsConfig {
    DynamicsConfig::new(n)
        .with_max_rounds(flags.max_rounds)
        .with_tolerance(flags.tolerance.clone())
}

fn write_rows(out: Option<&Path>, rows: &[SweepRow], decimals: bool) -> Result<()> {
    match out {
        Some(path) => write_csv(File::create(path)?, rows, decimals),
        None => write_csv(io::stdout().lock(), rows, decimals),
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let inst = instances::load(&args.instance)?;
    let spec = args.mechanism.instantiate(&inst)?;
    let report = run_dynamics(&inst, &spec, &dynamics_config(inst.num_bidders(), &args.dynamics))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(path) = &args.out {
        let (name, value) = match &args.mechanism {
            MechanismKind::Global { gamma } => ("gamma", gamma.clone()),
            _ => ("-", Rational::zero()),
        };
        let row = SweepRow::from_report(args.mechanism.name(), name, value, &report);
        write_rows(Some(path), &[row], args.decimals)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let params = CounterexampleParams::new(args.delta.clone())?;
    let config = dynamics_config(params.num_bidders(), &args.dynamics);
    let sweep = sweep_global(&args.delta, &args.gamma, &config)?;
    write_rows(args.out.as_deref(), &sweep.all_rows(), args.decimals)?;
    let bound = Rational::from_integer(3) * &args.delta;
    let max = sweep.max_ratio().cloned().unwrap_or_else(Rational::zero);
    eprintln!(
        "delta {}: {} multipliers, max welfare ratio {} at gamma {} ({} 3*delta = {})",
        args.delta,
        sweep.rows.len(),
        max,
        sweep.summary.param_value,
        if max <= bound { "<=" } else { ">" },
        bound
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_mechanisms(text: &str) -> Result<Vec<MechanismKind>> {
    if text.trim() == "all" {
        return Ok(all_mechanisms());
    }
    text.split(',').map(str::parse).collect()
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let mut config = VerifyConfig::new();
    config.first_seed = args.first_seed;
    config.seeds = args.seeds;
    config.max_bidders = args.max_bidders;
    config.max_auctions = args.max_auctions;
    config.mechanisms = parse_mechanisms(&args.mechanism)?;
    config.template.zero_cost_probability = args.zero_cost_probability;
    config.template.grid_denominator = args.grid_denominator;
    config.max_rounds = args.dynamics.max_rounds;
    config.tolerance = args.dynamics.tolerance;

    let summary = verify(&config)?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "instances: {}", summary.instances)?;
    for (mech, s) in &summary.dynamics {
        writeln!(
            stdout,
            "dynamics {mech}: runs {}, converged {}, verified {}, non-converged {}",
            s.runs, s.converged, s.verified, s.nonconverged
        )?;
    }
    for kind in [
        CheckKind::Truthfulness,
        CheckKind::CriticalBid,
        CheckKind::OracleAgreement,
        CheckKind::CoreAuctionLemma,
        CheckKind::WelfareBoundsLemma,
        CheckKind::WelfareGuarantee,
    ] {
        let t = summary.tally(kind);
        writeln!(stdout, "{kind}: {} checks, {} violations", t.checks, t.violations)?;
    }
    let total = summary.total_violations();
    writeln!(stdout, "violations: {total}")?;
    if total == 0 {
        return Ok(ExitCode::SUCCESS);
    }
    let dump = serde_json::to_string_pretty(&summary.violations)?;
    match &args.out {
        Some(path) => std::fs::write(path, dump)?,
        None => eprintln!("{dump}"),
    }
    Ok(ExitCode::FAILURE)
}

fn emit_instance(inst: &arena::Instance, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => instances::save(inst, path),
        None => {
            println!("{}", instances::to_json(inst));
            Ok(())
        }
    }
}

fn cmd_generate(kind: GenerateKind) -> Result<ExitCode> {
    match kind {
        GenerateKind::Counterexample { delta, out } => {
            let inst = counterexample(&CounterexampleParams::new(delta)?);
            emit_instance(&inst, out.as_deref())?;
        }
        GenerateKind::Random {
            bidders,
            auctions,
            seed,
            value_max,
            cost_max,
            grid_denominator,
            zero_cost_probability,
            out,
        } => {
            let inst = random_instance(&RandomFamilyParams {
                num_bidders: bidders,
                num_auctions: auctions,
                value_max,
                cost_max,
                grid_denominator,
                seed,
                zero_cost_probability,
            })?;
            emit_instance(&inst, out.as_deref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_debug_br(args: DebugArgs) -> Result<ExitCode> {
    let inst = instances::load(&args.instance)?;
    let spec = args.mechanism.instantiate(&inst)?;
    let profile = match &args.theta {
        None => MultiplierProfile::truthful(inst.num_bidders()),
        Some(text) => {
            let theta = text
                .split(',')
                .map(|t| {
                    t.parse::<Rational>().map_err(|source| Error::Rational {
                        context: "--theta".into(),
                        source,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            MultiplierProfile::new(theta)?
        }
    };
    let problem = ResponseProblem::new(args.bidder, &inst, &spec, &profile)?;
    let rows = response_table(&problem)?;
    let br = arena::bestresponse::best_response(&problem)?;

    let show = |x: &Option<Rational>| x.as_ref().map_or_else(|| "-".to_string(), Rational::to_string);
    println!("auction\tthreshold\tinclusive\tratio\tcum_value\tcum_payment\tfeasible");
    for row in &rows {
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.auction,
            row.threshold,
            row.inclusive,
            show(&row.ratio),
            show(&row.cumulative_value),
            show(&row.cumulative_payment),
            row.feasible.map_or_else(|| "-".to_string(), |f| f.to_string()),
        );
    }
    println!(
        "best response: theta {} wins {:?} (value {}, payment {})",
        br.theta, br.won, br.total_value, br.total_payment
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SweepGlobal(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Generate { kind } => cmd_generate(kind),
        Command::DebugBr(args) => cmd_debug_br(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
