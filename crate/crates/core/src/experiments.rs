//! Experiment drivers behind the command-line front end: reproduction grids, one-parameter
//! sweeps, analysis-versus-simulation comparisons and attempt-probability optimization.
//!
//! All published numbers use eight sources, `lambda = 0.5`, `p_tx = 0.5`, `R = 0.2`, uniform
//! level selection and a slot duration of 0.5 time units unless a figure states otherwise.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{average_aoi, grid_argmin, ptx_grid, ptx_grid_argmin, Scheme};
use crate::error::{AoiError, Result};
use crate::model::{db_to_linear, SystemConfig};
use crate::nrt::optimal_ptx_nrt_k2;
use crate::report::{format_sig, CsvTable};
use crate::sim::{run_replications, ReplicationSummary};

/// Power budgets (dB) of the published AoI tables.
pub const TABLE_POWER_DB: [f64; 9] = [-5.0, -2.0, 1.0, 4.0, 7.0, 10.0, 13.0, 17.0, 20.0];
/// Level counts of the published AoI tables.
pub const TABLE_LEVELS: std::ops::RangeInclusive<usize> = 2..=10;
/// Slot duration under which the published AoI values are stated.
pub const PUBLISHED_SLOT_DURATION: f64 = 0.5;
/// Grid step for attempt-probability searches.
pub const PTX_GRID_STEP: f64 = 0.01;

/// Baseline scenario of the published tables.
pub fn published_scenario(num_levels: usize, power_db: f64) -> SystemConfig {
    SystemConfig::uniform(8, num_levels, 0.5, 0.5, db_to_linear(power_db), 0.2)
        .with_slot_duration(PUBLISHED_SLOT_DURATION)
}

/// Level distribution with `q1` on the top level and the rest shared evenly.
pub fn split_level_probs(num_levels: usize, q1: f64) -> Result<Vec<f64>> {
    if num_levels < 2 {
        return Err(AoiError::OutOfRange("q1 sweeps need K >= 2".into()));
    }
    if !(0.0..=1.0).contains(&q1) {
        return Err(AoiError::OutOfRange(format!(
            "q1 must be in [0,1] (got {q1})"
        )));
    }
    let rest = (1.0 - q1) / (num_levels - 1) as f64;
    let mut q = vec![rest; num_levels];
    q[0] = q1;
    Ok(q)
}

/// Optional replacements for scenario fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub sources: Option<usize>,
    pub num_levels: Option<usize>,
    pub arrival_prob: Option<f64>,
    pub attempt_prob: Option<f64>,
    pub power_db: Option<f64>,
    pub rate: Option<f64>,
    pub level_probs: Option<Vec<f64>>,
    pub slot_duration: Option<f64>,
}

impl ScenarioOverrides {
    pub fn is_empty(&self) -> bool {
        *self == ScenarioOverrides::default()
    }

    /// Apply to `cfg`. Changing the level count without giving `level_probs` resets selection to
    /// uniform.
    pub fn apply(&self, mut cfg: SystemConfig) -> SystemConfig {
        if let Some(m) = self.sources {
            cfg.sources = m;
        }
        if let Some(k) = self.num_levels {
            if k != cfg.num_levels {
                cfg.num_levels = k;
                cfg.level_probs = if k == 0 {
                    Vec::new()
                } else {
                    vec![1.0 / k as f64; k]
                };
            }
        }
        if let Some(l) = self.arrival_prob {
            cfg.arrival_prob = l;
        }
        if let Some(p) = self.attempt_prob {
            cfg.attempt_prob = p;
        }
        if let Some(db) = self.power_db {
            cfg.power_budget = db_to_linear(db);
        }
        if let Some(r) = self.rate {
            cfg.rate = r;
        }
        if let Some(q) = &self.level_probs {
            cfg.level_probs = q.clone();
        }
        if let Some(t) = self.slot_duration {
            cfg.slot_duration = t;
        }
        cfg
    }
}

/// Published grid or figure to regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// No-retransmission AoI over levels x power budget.
    Table1,
    /// Retransmission AoI over levels x power budget.
    Table2,
    /// AoI versus number of sources.
    Fig4,
    /// AoI versus number of levels.
    Fig5,
    /// AoI surface over levels x power budget, 1 dB resolution.
    Fig6,
    /// AoI versus attempt probability for several `q1`, with the two-level optimum.
    Fig8,
    /// AoI surface over arrival x attempt probability, two levels.
    Fig9,
    /// AoI surface over arrival x attempt probability, sixteen levels.
    Fig10,
    /// AoI versus `q1` for two levels at the best attempt probability.
    Fig11,
    /// AoI over the three-level simplex at the best attempt probability.
    Fig12,
}

impl Target {
    pub const ALL: [Target; 10] = [
        Target::Table1,
        Target::Table2,
        Target::Fig4,
        Target::Fig5,
        Target::Fig6,
        Target::Fig8,
        Target::Fig9,
        Target::Fig10,
        Target::Fig11,
        Target::Fig12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Table2 => "table2",
            Target::Fig4 => "fig4",
            Target::Fig5 => "fig5",
            Target::Fig6 => "fig6",
            Target::Fig8 => "fig8",
            Target::Fig9 => "fig9",
            Target::Fig10 => "fig10",
            Target::Fig11 => "fig11",
            Target::Fig12 => "fig12",
        }
    }

    /// Scenario the target's fixed parameters come from.
    pub fn baseline(self) -> SystemConfig {
        let base = published_scenario(2, 20.0);
        match self {
            Target::Table1 | Target::Table2 | Target::Fig4 | Target::Fig5 | Target::Fig6 => base,
            Target::Fig8 => {
                let mut cfg = base;
                cfg.sources = 32;
                cfg
            }
            Target::Fig9 => base,
            Target::Fig10 => ScenarioOverrides {
                num_levels: Some(16),
                ..Default::default()
            }
            .apply(base),
            Target::Fig11 => base.with_arrival_prob(0.4),
            Target::Fig12 => ScenarioOverrides {
                num_levels: Some(3),
                ..Default::default()
            }
            .apply(base.with_arrival_prob(0.4)),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = Target::ALL.iter().map(|t| t.name()).collect();
                AoiError::OutOfRange(format!(
                    "unknown target '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

fn aoi_cell(cfg: &SystemConfig, scheme: Scheme) -> Result<String> {
    average_aoi(cfg, scheme).map(format_sig)
}

/// Regenerate a published grid with its own parameterization.
pub fn reproduce(target: Target) -> Result<CsvTable> {
    reproduce_with(target, &ScenarioOverrides::default())
}

/// Regenerate a published grid; fields set in `overrides` replace the target's fixed
/// parameters (swept parameters still vary).
pub fn reproduce_with(target: Target, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let base = overrides.apply(target.baseline());
    match target {
        Target::Table1 => level_power_table(&base, Scheme::NoRetransmission, overrides),
        Target::Table2 => level_power_table(&base, Scheme::Retransmission, overrides),
        Target::Fig4 => aoi_vs_sources(&base, overrides),
        Target::Fig5 => aoi_vs_levels(&base, overrides),
        Target::Fig6 => level_power_surface(&base, overrides),
        Target::Fig8 => aoi_vs_attempt(&base, overrides),
        Target::Fig9 | Target::Fig10 => arrival_attempt_surface(&base, overrides),
        Target::Fig11 => two_level_split(&base, overrides),
        Target::Fig12 => three_level_simplex(&base, overrides),
    }
}

fn with_levels(base: &SystemConfig, overrides: &ScenarioOverrides, k: usize) -> SystemConfig {
    let mut cfg = base.clone();
    cfg.num_levels = k;
    cfg.level_probs = overrides
        .level_probs
        .clone()
        .filter(|q| q.len() == k)
        .unwrap_or_else(|| vec![1.0 / k as f64; k]);
    cfg
}

fn level_power_table(
    base: &SystemConfig,
    scheme: Scheme,
    overrides: &ScenarioOverrides,
) -> Result<CsvTable> {
    let mut header = vec!["K".to_string()];
    header.extend(TABLE_POWER_DB.iter().map(|db| format_sig(*db)));
    let mut table = CsvTable::new(header);
    let levels: Vec<usize> = TABLE_LEVELS.collect();
    let rows = levels
        .par_iter()
        .map(|&k| {
            let mut row = vec![k.to_string()];
            for &db in &TABLE_POWER_DB {
                let mut cfg = with_levels(base, overrides, k);
                cfg.power_budget = db_to_linear(db);
                row.push(aoi_cell(&cfg, scheme)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn scheme_columns(prefix: &str) -> Vec<String> {
    Scheme::ALL
        .iter()
        .map(|s| format!("{s}_{prefix}"))
        .collect()
}

fn both_schemes(cfg: &SystemConfig) -> Result<Vec<String>> {
    Scheme::ALL.iter().map(|&s| aoi_cell(cfg, s)).collect()
}

fn aoi_vs_sources(base: &SystemConfig, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let level_counts = match overrides.num_levels {
        Some(k) => vec![k],
        None => vec![2, 4],
    };
    let mut header = vec!["M".to_string()];
    for k in &level_counts {
        header.extend(scheme_columns(&format!("K{k}")));
    }
    let mut table = CsvTable::new(header);
    let sources: Vec<usize> = (2..=20).collect();
    let rows = sources
        .par_iter()
        .map(|&m| {
            let mut row = vec![m.to_string()];
            for &k in &level_counts {
                let mut cfg = with_levels(base, overrides, k);
                cfg.sources = m;
                row.extend(both_schemes(&cfg)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn aoi_vs_levels(base: &SystemConfig, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let populations = match overrides.sources {
        Some(m) => vec![m],
        None => vec![4, 8, 16],
    };
    let mut header = vec!["K".to_string()];
    for m in &populations {
        header.extend(scheme_columns(&format!("M{m}")));
    }
    let mut table = CsvTable::new(header);
    let levels: Vec<usize> = (1..=10).collect();
    let rows = levels
        .par_iter()
        .map(|&k| {
            let mut row = vec![k.to_string()];
            for &m in &populations {
                let mut cfg = with_levels(base, overrides, k);
                cfg.sources = m;
                row.extend(both_schemes(&cfg)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn level_power_surface(base: &SystemConfig, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let mut header = vec!["K".to_string(), "power_db".to_string()];
    header.extend(Scheme::ALL.iter().map(|s| s.to_string()));
    let mut table = CsvTable::new(header);
    let cells: Vec<(usize, i32)> = TABLE_LEVELS
        .flat_map(|k| (-5..=20).map(move |db| (k, db)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(k, db)| {
            let mut cfg = with_levels(base, overrides, k);
            cfg.power_budget = db_to_linear(f64::from(db));
            let mut row = vec![k.to_string(), db.to_string()];
            row.extend(both_schemes(&cfg)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn aoi_vs_attempt(base: &SystemConfig, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let splits: Vec<f64> = match &overrides.level_probs {
        Some(q) => vec![q[0]],
        None => vec![0.3, 0.5, 0.7],
    };
    let mut table = CsvTable::new(["q1", "p_tx", "nrt", "rt", "nrt_two_level_optimum"]);
    let grid = ptx_grid(PTX_GRID_STEP)?;
    for q1 in splits {
        let mut cfg = base.clone();
        cfg.level_probs = split_level_probs(cfg.num_levels, q1)?;
        let optimum = match optimal_ptx_nrt_k2(&cfg) {
            Ok(o) => format_sig(o.p_tx),
            Err(_) => String::new(),
        };
        let rows = grid
            .par_iter()
            .map(|&p| {
                let c = cfg.clone().with_attempt_prob(p);
                let mut row = vec![format_sig(q1), format_sig(p)];
                row.extend(both_schemes(&c)?);
                row.push(optimum.clone());
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        rows.into_iter().for_each(|r| table.push(r));
    }
    Ok(table)
}

fn tenths() -> Vec<f64> {
    (1..=10).map(|j| j as f64 / 10.0).collect()
}

fn arrival_attempt_surface(
    base: &SystemConfig,
    _overrides: &ScenarioOverrides,
) -> Result<CsvTable> {
    let mut header = vec!["lambda".to_string(), "p_tx".to_string()];
    header.extend(Scheme::ALL.iter().map(|s| s.to_string()));
    let mut table = CsvTable::new(header);
    let cells: Vec<(f64, f64)> = tenths()
        .into_iter()
        .flat_map(|l| tenths().into_iter().map(move |p| (l, p)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(l, p)| {
            let cfg = base.clone().with_arrival_prob(l).with_attempt_prob(p);
            let mut row = vec![format_sig(l), format_sig(p)];
            row.extend(both_schemes(&cfg)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Best attempt probability for one scheme: the two-level closed form for NRT with `K = 2`
/// (unless `grid_only`), the grid otherwise.
fn best_attempt(cfg: &SystemConfig, scheme: Scheme, grid_only: bool) -> Result<(f64, f64)> {
    if !grid_only && scheme == Scheme::NoRetransmission && cfg.num_levels == 2 {
        if let Ok(opt) = optimal_ptx_nrt_k2(cfg) {
            let aoi = average_aoi(&cfg.clone().with_attempt_prob(opt.p_tx), scheme)?;
            return Ok((opt.p_tx, aoi));
        }
    }
    let best = ptx_grid_argmin(cfg, scheme, PTX_GRID_STEP)?;
    Ok((best.p_tx, best.avg_aoi))
}

fn two_level_split(base: &SystemConfig, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let populations = match overrides.sources {
        Some(m) => vec![m],
        None => vec![8, 16, 32],
    };
    let mut table = CsvTable::new(["M", "q1", "nrt_p_tx", "nrt", "rt_p_tx", "rt"]);
    let cells: Vec<(usize, f64)> = populations
        .iter()
        .flat_map(|&m| (1..=19).map(move |j| (m, j as f64 * 0.05)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(m, q1)| {
            let mut cfg = base.clone();
            cfg.sources = m;
            cfg.num_levels = 2;
            cfg.level_probs = split_level_probs(2, q1)?;
            let (p_nrt, a_nrt) = best_attempt(&cfg, Scheme::NoRetransmission, false)?;
            let (p_rt, a_rt) = best_attempt(&cfg, Scheme::Retransmission, false)?;
            Ok(vec![
                m.to_string(),
                format_sig(q1),
                format_sig(p_nrt),
                format_sig(a_nrt),
                format_sig(p_rt),
                format_sig(a_rt),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

fn three_level_simplex(base: &SystemConfig, overrides: &ScenarioOverrides) -> Result<CsvTable> {
    let populations = match overrides.sources {
        Some(m) => vec![m],
        None => vec![2, 8],
    };
    let mut table = CsvTable::new(["M", "q1", "q2", "q3", "nrt_p_tx", "nrt", "rt_p_tx", "rt"]);
    let mut cells = Vec::new();
    for &m in &populations {
        for a in 0..=10u32 {
            for b in 0..=(10 - a) {
                cells.push((m, a, b, 10 - a - b));
            }
        }
    }
    let rows = cells
        .par_iter()
        .map(|&(m, a, b, c)| {
            let q = vec![
                f64::from(a) / 10.0,
                f64::from(b) / 10.0,
                f64::from(c) / 10.0,
            ];
            let mut cfg = base.clone();
            cfg.sources = m;
            cfg.num_levels = 3;
            cfg.level_probs = q.clone();
            let (p_nrt, a_nrt) = best_attempt(&cfg, Scheme::NoRetransmission, true)?;
            let (p_rt, a_rt) = best_attempt(&cfg, Scheme::Retransmission, true)?;
            Ok(vec![
                m.to_string(),
                format_sig(q[0]),
                format_sig(q[1]),
                format_sig(q[2]),
                format_sig(p_nrt),
                format_sig(a_nrt),
                format_sig(p_rt),
                format_sig(a_rt),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Sources,
    Levels,
    ArrivalProb,
    AttemptProb,
    PowerDb,
    Q1,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Sources => "M",
            SweepParam::Levels => "K",
            SweepParam::ArrivalProb => "lambda",
            SweepParam::AttemptProb => "p_tx",
            SweepParam::PowerDb => "power_db",
            SweepParam::Q1 => "q1",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepParam::Sources | SweepParam::Levels)
    }

    /// `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut cfg = cfg.clone();
        if self.is_integer() && (value.fract() != 0.0 || value < 1.0) {
            return Err(AoiError::OutOfRange(format!(
                "{} must be a positive integer (got {value})",
                self.name()
            )));
        }
        match self {
            SweepParam::Sources => cfg.sources = value as usize,
            SweepParam::Levels => {
                let k = value as usize;
                cfg.num_levels = k;
                cfg.level_probs = vec![1.0 / k as f64; k];
            }
            SweepParam::ArrivalProb => cfg.arrival_prob = value,
            SweepParam::AttemptProb => cfg.attempt_prob = value,
            SweepParam::PowerDb => cfg.power_budget = db_to_linear(value),
            SweepParam::Q1 => cfg.level_probs = split_level_probs(cfg.num_levels, value)?,
        }
        Ok(cfg)
    }
}

impl FromStr for SweepParam {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(SweepParam::Sources),
            "K" | "k" => Ok(SweepParam::Levels),
            "lambda" => Ok(SweepParam::ArrivalProb),
            "p_tx" | "ptx" => Ok(SweepParam::AttemptProb),
            "power_db" => Ok(SweepParam::PowerDb),
            "q1" => Ok(SweepParam::Q1),
            other => Err(AoiError::OutOfRange(format!(
                "unknown sweep parameter '{other}' (expected M, K, lambda, p_tx, power_db or q1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    Analysis,
    Simulation,
    Both,
}

impl OutputMode {
    fn analysis(self) -> bool {
        matches!(self, OutputMode::Analysis | OutputMode::Both)
    }

    fn simulation(self) -> bool {
        matches!(self, OutputMode::Simulation | OutputMode::Both)
    }
}

impl FromStr for OutputMode {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analysis" => Ok(OutputMode::Analysis),
            "simulation" => Ok(OutputMode::Simulation),
            "both" => Ok(OutputMode::Both),
            other => Err(AoiError::OutOfRange(format!(
                "unknown output mode '{other}' (expected analysis, simulation or both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSettings {
    pub slots: u64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            slots: 300_000,
            reps: 8,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub mode: OutputMode,
}

impl SweepSpec {
    /// Values `from, from + step, ...` up to `to` inclusive (within rounding).
    pub fn range_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
        if !(step > 0.0) || !(to >= from) {
            return Err(AoiError::OutOfRange(format!(
                "empty sweep range from {from} to {to} step {step}"
            )));
        }
        let count = ((to - from) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|j| from + j as f64 * step).collect())
    }
}

/// Evaluate a sweep; rows are ordered by ascending parameter value.
pub fn run_sweep(base: &SystemConfig, spec: &SweepSpec, sim: SimSettings) -> Result<CsvTable> {
    if spec.values.is_empty() {
        return Err(AoiError::OutOfRange("sweep has no values".into()));
    }
    if spec.schemes.is_empty() {
        return Err(AoiError::OutOfRange("sweep has no scheme".into()));
    }
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let configs = values
        .iter()
        .map(|&v| spec.param.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    for cfg in &configs {
        cfg.ensure_valid()?;
    }

    let mut header = vec![spec.param.name().to_string()];
    for s in &spec.schemes {
        if spec.mode.analysis() {
            header.push(format!("{s}_analysis"));
        }
        if spec.mode.simulation() {
            header.push(format!("{s}_sim_mean"));
            header.push(format!("{s}_sim_stderr"));
        }
    }
    let mut table = CsvTable::new(header);
    let rows = values
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&v, cfg)| {
            let mut row = vec![format_sig(v)];
            for &s in &spec.schemes {
                if spec.mode.analysis() {
                    row.push(aoi_cell(cfg, s)?);
                }
                if spec.mode.simulation() {
                    let summary = run_replications(cfg, s, sim.slots, sim.seed, sim.reps)?;
                    row.push(format_sig(summary.mean));
                    row.push(format_sig(summary.stderr));
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

/// Closed form against simulation for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub scheme: Scheme,
    pub analysis: f64,
    pub simulation: ReplicationSummary,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn compare(
    cfg: &SystemConfig,
    scheme: Scheme,
    sim: SimSettings,
    tolerance: f64,
) -> Result<CompareReport> {
    let analysis = average_aoi(cfg, scheme)?;
    let simulation = run_replications(cfg, scheme, sim.slots, sim.seed, sim.reps)?;
    let relative_error = (simulation.mean - analysis).abs() / analysis;
    Ok(CompareReport {
        scheme,
        analysis,
        simulation,
        relative_error,
        tolerance,
        pass: relative_error <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeMethod {
    /// Large-population two-level closed form (no retransmission, `K = 2`).
    TwoLevelClosedForm,
    /// Exhaustive search over a uniform attempt-probability grid.
    Grid,
}

impl FromStr for OptimizeMethod {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corollary1" | "closed-form" => Ok(OptimizeMethod::TwoLevelClosedForm),
            "grid" => Ok(OptimizeMethod::Grid),
            other => Err(AoiError::OutOfRange(format!(
                "unknown method '{other}' (expected corollary1 or grid)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeReport {
    pub scheme: Scheme,
    pub method: OptimizeMethod,
    pub p_tx: f64,
    pub avg_aoi: f64,
    /// Root of the stationarity condition, for the closed-form method.
    pub eta: Option<f64>,
    /// The closed-form optimum exceeded 1 and was clamped.
    pub clamped: bool,
}

pub fn optimize(
    cfg: &SystemConfig,
    scheme: Scheme,
    method: OptimizeMethod,
    grid_step: f64,
) -> Result<OptimizeReport> {
    match method {
        OptimizeMethod::TwoLevelClosedForm => {
            if scheme != Scheme::NoRetransmission {
                return Err(AoiError::Unsupported(
                    "no closed-form optimum exists with retransmission; use the grid method".into(),
                ));
            }
            let opt = optimal_ptx_nrt_k2(cfg)?;
            let avg_aoi = average_aoi(&cfg.clone().with_attempt_prob(opt.p_tx), scheme)?;
            Ok(OptimizeReport {
                scheme,
                method,
                p_tx: opt.p_tx,
                avg_aoi,
                eta: Some(opt.eta),
                clamped: opt.clamped,
            })
        }
        OptimizeMethod::Grid => {
            let points = ptx_grid(grid_step)?;
            let best = grid_argmin(&points, |p| {
                average_aoi(&cfg.clone().with_attempt_prob(p), scheme)
            })?;
            Ok(OptimizeReport {
                scheme,
                method,
                p_tx: best.p_tx,
                avg_aoi: best.avg_aoi,
                eta: None,
                clamped: false,
            })
        }
    }
}
