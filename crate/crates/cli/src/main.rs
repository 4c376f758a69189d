//! `noma-aoi`: average age of information for NOMA-assisted grant-free access.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod scenario;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use noma_aoi::experiments::{
    compare, optimize, reproduce_with, run_sweep, OptimizeMethod, OutputMode, SimSettings,
    SweepParam, SweepSpec, Target,
};
use noma_aoi::{
    analyze, configure_snr_ladder, format_sig, linear_to_db, run_replications, run_simulation,
    AoiError, CsvTable, Scheme,
};

use scenario::ScenarioArgs;

/// Exit status for a comparison outside tolerance.
const EXIT_TOLERANCE: u8 = 1;
/// Exit status for invalid input or a failed computation.
const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "noma-aoi",
    version,
    about = "Average AoI of NOMA-assisted grant-free random access"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Nrt,
    Rt,
    Both,
}

impl SchemeArg {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Nrt => vec![Scheme::NoRetransmission],
            SchemeArg::Rt => vec![Scheme::Retransmission],
            SchemeArg::Both => Scheme::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Corollary1,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Analysis,
    Simulation,
    Both,
}

#[derive(Debug, Clone, clap::Args)]
struct SimArgs {
    /// Base seed; replication r uses seed + r.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Slots per replication.
    #[arg(long, default_value_t = 300_000)]
    slots: u64,
    /// Independent replications.
    #[arg(long, default_value_t = 8)]
    reps: usize,
}

impl SimArgs {
    fn settings(&self) -> SimSettings {
        SimSettings {
            slots: self.slots,
            reps: self.reps,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the received SNR ladder and effective access probabilities.
    Levels {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Closed-form success probability, interval moments and average AoI.
    Analyze {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
        /// Also write the results as CSV ('-' for stdout).
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the average AoI of user 1.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
        #[command(flatten)]
        sim: SimArgs,
        /// Also write a summary row per scheme as CSV ('-' for stdout).
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Write the delivery log of user 1 from a single run with the base seed.
        #[arg(long, value_name = "PATH")]
        deliveries: Option<PathBuf>,
    },
    /// Closed form against simulation; fails when the relative error exceeds the tolerance.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
        #[command(flatten)]
        sim: SimArgs,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Attempt probability minimizing the average AoI.
    Optimize {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, value_enum, default_value_t = SchemeArg::Nrt)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Grid)]
        method: MethodArg,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Evaluate the AoI over a range of one parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Swept parameter: M, K, lambda, p_tx, power_db or q1.
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Explicit comma-separated values instead of a range.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = SchemeArg::Both)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Analysis)]
        mode: ModeArg,
        #[command(flatten)]
        sim: SimArgs,
        /// Output path ('-' or omitted for stdout).
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Regenerate a reference table or figure as CSV.
    Reproduce {
        /// table1, table2, fig4, fig5, fig6, fig8, fig9, fig10, fig11 or fig12.
        target: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output path ('-' or omitted for stdout).
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
}

fn write_table(table: &CsvTable, path: Option<&Path>) -> Result<()> {
    match path {
        None => table.write(io::stdout().lock())?,
        Some(p) if p == Path::new("-") => table.write(io::stdout().lock())?,
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            table.write(file)?;
        }
    }
    Ok(())
}

/// Decimal rendering that keeps a trailing `.0` on whole numbers.
fn decimal(v: f64) -> String {
    let s = format_sig(v);
    if s.chars().all(|c| c.is_ascii_digit() || c == '-') {
        format!("{s}.0")
    } else {
        s
    }
}

fn db(v: f64) -> String {
    let s = format!("{:.4}", linear_to_db(v));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn cmd_levels(scenario: &ScenarioArgs) -> Result<ExitCode> {
    let cfg = scenario.resolve()?;
    let ladder = configure_snr_ladder(&cfg)?;
    let mut out = io::stdout().lock();
    for (k, &level) in ladder.levels.iter().enumerate() {
        writeln!(out, "P_{} = {} ({} dB)", k + 1, decimal(level), db(level))?;
    }
    writeln!(out, "effective p_tx = {}", format_sig(ladder.bar_p_tx))?;
    let q: Vec<String> = ladder.bar_q.iter().map(|v| format_sig(*v)).collect();
    writeln!(out, "effective q = ({})", q.join(", "))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(scenario: &ScenarioArgs, scheme: SchemeArg, csv: Option<&Path>) -> Result<ExitCode> {
    let cfg = scenario.resolve()?;
    let mut table = CsvTable::new([
        "scheme",
        "success_prob",
        "mean_interval",
        "second_moment_interval",
        "mean_system_time",
        "avg_aoi",
    ]);
    for s in scheme.schemes() {
        let a = analyze(&cfg, s)?;
        println!("[{s}]");
        println!("  success probability: {}", format_sig(a.success_prob));
        println!("  E{{D}}:                {}", format_sig(a.mean_interval));
        println!(
            "  E{{D^2}}:              {}",
            format_sig(a.second_moment_interval)
        );
        println!(
            "  E{{S}}:                {}",
            format_sig(a.mean_system_time)
        );
        println!("  average AoI:         {}", format_sig(a.avg_aoi));
        table.push(vec![
            s.to_string(),
            format_sig(a.success_prob),
            format_sig(a.mean_interval),
            format_sig(a.second_moment_interval),
            format_sig(a.mean_system_time),
            format_sig(a.avg_aoi),
        ]);
    }
    if let Some(p) = csv {
        write_table(&table, Some(p))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    scenario: &ScenarioArgs,
    scheme: SchemeArg,
    sim: &SimArgs,
    csv: Option<&Path>,
    deliveries: Option<&Path>,
) -> Result<ExitCode> {
    let cfg = scenario.resolve()?;
    let mut table = CsvTable::new([
        "scheme",
        "slots",
        "reps",
        "seed",
        "mean",
        "stderr",
        "deliveries",
    ]);
    for s in scheme.schemes() {
        let summary = run_replications(&cfg, s, sim.slots, sim.seed, sim.reps)?;
        println!(
            "[{s}] average AoI {} +/- {} (1 s.e.) over {} x {} slots; user 1 delivered {} of {} buffered slots",
            format_sig(summary.mean),
            format_sig(summary.stderr),
            sim.reps,
            sim.slots,
            summary.success_count,
            summary.buffered_slot_count
        );
        table.push(vec![
            s.to_string(),
            sim.slots.to_string(),
            sim.reps.to_string(),
            sim.seed.to_string(),
            format_sig(summary.mean),
            format_sig(summary.stderr),
            summary.success_count.to_string(),
        ]);
    }
    if let Some(p) = csv {
        write_table(&table, Some(p))?;
    }
    if let Some(p) = deliveries {
        let schemes = scheme.schemes();
        if schemes.len() != 1 {
            bail!("--deliveries needs a single --scheme (nrt or rt)");
        }
        let run = run_simulation(&cfg, schemes[0], sim.slots, sim.seed)?;
        let file = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
        run.write_deliveries_csv(file)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(
    scenario: &ScenarioArgs,
    scheme: SchemeArg,
    sim: &SimArgs,
    tolerance: f64,
    csv: Option<&Path>,
) -> Result<ExitCode> {
    if !(tolerance >= 0.0) {
        bail!("tolerance must be non-negative (got {tolerance})");
    }
    let cfg = scenario.resolve()?;
    let mut table = CsvTable::new([
        "scheme",
        "analysis",
        "sim_mean",
        "sim_stderr",
        "rel_error",
        "tolerance",
        "pass",
    ]);
    let mut all_pass = true;
    for s in scheme.schemes() {
        match compare(&cfg, s, sim.settings(), tolerance) {
            Ok(r) => {
                all_pass &= r.pass;
                println!(
                    "[{s}] analysis {}  simulation {} +/- {}  relative error {:.3}% (tolerance {:.3}%)  {}",
                    format_sig(r.analysis),
                    format_sig(r.simulation.mean),
                    format_sig(r.simulation.stderr),
                    100.0 * r.relative_error,
                    100.0 * tolerance,
                    if r.pass { "PASS" } else { "FAIL" }
                );
                table.push(vec![
                    s.to_string(),
                    format_sig(r.analysis),
                    format_sig(r.simulation.mean),
                    format_sig(r.simulation.stderr),
                    format_sig(r.relative_error),
                    format_sig(tolerance),
                    r.pass.to_string(),
                ]);
            }
            Err(e @ AoiError::NoDeliveries { .. }) => {
                all_pass = false;
                println!("[{s}] FAIL: {e}");
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(p) = csv {
        write_table(&table, Some(p))?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_TOLERANCE)
    })
}

fn cmd_optimize(
    scenario: &ScenarioArgs,
    scheme: SchemeArg,
    method: MethodArg,
    grid_step: f64,
    csv: Option<&Path>,
) -> Result<ExitCode> {
    let cfg = scenario.resolve()?;
    let method = match method {
        MethodArg::Corollary1 => OptimizeMethod::TwoLevelClosedForm,
        MethodArg::Grid => OptimizeMethod::Grid,
    };
    let mut table = CsvTable::new(["scheme", "method", "p_tx", "avg_aoi"]);
    for s in scheme.schemes() {
        let r = optimize(&cfg, s, method, grid_step)?;
        let method_name = match method {
            OptimizeMethod::TwoLevelClosedForm => "corollary1",
            OptimizeMethod::Grid => "grid",
        };
        print!(
            "[{s}] {method_name}: P_TX* = {}, average AoI = {}",
            format_sig(r.p_tx),
            format_sig(r.avg_aoi)
        );
        if let Some(eta) = r.eta {
            print!(", eta = {}", format_sig(eta));
        }
        if r.clamped {
            print!(" (clamped to 1)");
        }
        println!();
        table.push(vec![
            s.to_string(),
            method_name.to_string(),
            format_sig(r.p_tx),
            format_sig(r.avg_aoi),
        ]);
    }
    if let Some(p) = csv {
        write_table(&table, Some(p))?;
    }
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    scenario: &ScenarioArgs,
    param: &str,
    range: (Option<f64>, Option<f64>, Option<f64>),
    values: Option<Vec<f64>>,
    scheme: SchemeArg,
    mode: ModeArg,
    sim: &SimArgs,
    csv: Option<&Path>,
) -> Result<ExitCode> {
    let cfg = scenario.resolve()?;
    let param: SweepParam = param.parse()?;
    let values = match (values, range) {
        (Some(v), (None, None, None)) => v,
        (None, (Some(from), Some(to), Some(step))) => SweepSpec::range_values(from, to, step)?,
        _ => bail!("give either --values or all of --from, --to and --step"),
    };
    let mode = match mode {
        ModeArg::Analysis => OutputMode::Analysis,
        ModeArg::Simulation => OutputMode::Simulation,
        ModeArg::Both => OutputMode::Both,
    };
    let spec = SweepSpec {
        param,
        values,
        schemes: scheme.schemes(),
        mode,
    };
    let table = run_sweep(&cfg, &spec, sim.settings())?;
    write_table(&table, csv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_reproduce(target: &str, scenario: &ScenarioArgs, csv: Option<&Path>) -> Result<ExitCode> {
    let target: Target = target.parse()?;
    let overrides = scenario.overrides()?;
    if !overrides.is_empty() {
        eprintln!("note: non-paper parameterization; fixed parameters of {target} were overridden");
    }
    let table = reproduce_with(target, &overrides)?;
    write_table(&table, csv)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Levels { scenario } => cmd_levels(&scenario),
        Command::Analyze {
            scenario,
            scheme,
            csv,
        } => cmd_analyze(&scenario, scheme, csv.as_deref()),
        Command::Simulate {
            scenario,
            scheme,
            sim,
            csv,
            deliveries,
        } => cmd_simulate(
            &scenario,
            scheme,
            &sim,
            csv.as_deref(),
            deliveries.as_deref(),
        ),
        Command::Compare {
            scenario,
            scheme,
            sim,
            tolerance,
            csv,
        } => cmd_compare(&scenario, scheme, &sim, tolerance, csv.as_deref()),
        Command::Optimize {
            scenario,
            scheme,
            method,
            grid_step,
            csv,
        } => cmd_optimize(&scenario, scheme, method, grid_step, csv.as_deref()),
        Command::Sweep {
            scenario,
            param,
            from,
            to,
            step,
            values,
            scheme,
            mode,
            sim,
            csv,
        } => cmd_sweep(
            &scenario,
            &param,
            (from, to, step),
            values,
            scheme,
            mode,
            &sim,
            csv.as_deref(),
        ),
        Command::Reproduce {
            target,
            scenario,
            csv,
        } => cmd_reproduce(&target, &scenario, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
