//! Scenario configuration and the pre-configured received-SNR ladder.
//!
//! All quantities here are linear scale. The transmit power budget and every SNR level are
//! normalized by the receiver noise power.

use std::fmt;

use crate::error::{AoiError, Result};

const Q_SUM_TOL: f64 = 1e-12;

/// Full parameterization of one uplink scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Number of source nodes sharing the channel.
    pub sources: usize,
    /// Number of pre-configured received SNR levels.
    pub num_levels: usize,
    /// Per-slot probability that a node generates a new status update.
    pub arrival_prob: f64,
    /// Probability that a node holding a packet attempts to transmit it.
    pub attempt_prob: f64,
    /// Level-selection distribution, highest-power level first.
    pub level_probs: Vec<f64>,
    /// Maximum transmit power, linear scale.
    pub power_budget: f64,
    /// Target rate in bits/s/Hz.
    pub rate: f64,
    /// Slot duration in time units.
    pub slot_duration: f64,
}

impl SystemConfig {
    /// Scenario with uniform level selection and unit slot duration.
    pub fn uniform(
        sources: usize,
        num_levels: usize,
        arrival_prob: f64,
        attempt_prob: f64,
        power_budget: f64,
        rate: f64,
    ) -> Self {
        let level_probs = if num_levels == 0 {
            Vec::new()
        } else {
            vec![1.0 / num_levels as f64; num_levels]
        };
        SystemConfig {
            sources,
            num_levels,
            arrival_prob,
            attempt_prob,
            level_probs,
            power_budget,
            rate,
            slot_duration: 1.0,
        }
    }

    pub fn with_level_probs(mut self, level_probs: Vec<f64>) -> Self {
        self.level_probs = level_probs;
        self
    }

    pub fn with_slot_duration(mut self, slot_duration: f64) -> Self {
        self.slot_duration = slot_duration;
        self
    }

    pub fn with_attempt_prob(mut self, attempt_prob: f64) -> Self {
        self.attempt_prob = attempt_prob;
        self
    }

    pub fn with_arrival_prob(mut self, arrival_prob: f64) -> Self {
        self.arrival_prob = arrival_prob;
        self
    }

    /// Every violated invariant, in a fixed order. Empty when the configuration is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.sources == 0 {
            out.push(Violation::NoSources);
        }
        if self.num_levels == 0 {
            out.push(Violation::NoLevels);
        }
        if !(self.arrival_prob > 0.0 && self.arrival_prob <= 1.0) {
            out.push(Violation::ArrivalProb(self.arrival_prob));
        }
        if !(self.attempt_prob > 0.0 && self.attempt_prob <= 1.0) {
            out.push(Violation::AttemptProb(self.attempt_prob));
        }
        if self.level_probs.len() != self.num_levels {
            out.push(Violation::LevelProbsLength {
                expected: self.num_levels,
                found: self.level_probs.len(),
            });
        }
        if self.level_probs.iter().any(|q| !(*q >= 0.0)) {
            out.push(Violation::NegativeLevelProb);
        }
        let sum: f64 = self.level_probs.iter().sum();
        if !((sum - 1.0).abs() <= Q_SUM_TOL) {
            out.push(Violation::LevelProbsSum(sum));
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            out.push(Violation::PowerBudget(self.power_budget));
        }
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            out.push(Violation::Rate(self.rate));
        }
        if !(self.slot_duration > 0.0 && self.slot_duration.is_finite()) {
            out.push(Violation::SlotDuration(self.slot_duration));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(AoiError::InvalidConfig(violations))
        }
    }
}

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoSources,
    NoLevels,
    ArrivalProb(f64),
    AttemptProb(f64),
    LevelProbsLength { expected: usize, found: usize },
    NegativeLevelProb,
    LevelProbsSum(f64),
    PowerBudget(f64),
    Rate(f64),
    SlotDuration(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoSources => write!(f, "M must be at least 1"),
            Violation::NoLevels => write!(f, "K must be at least 1"),
            Violation::ArrivalProb(v) if *v == 0.0 => {
                write!(f, "no arrivals: lambda must be in (0,1] (got 0)")
            }
            Violation::ArrivalProb(v) => write!(f, "lambda must be in (0,1] (got {v})"),
            Violation::AttemptProb(v) => write!(f, "p_tx must be in (0,1] (got {v})"),
            Violation::LevelProbsLength { expected, found } => {
                write!(f, "q must have K = {expected} entries (got {found})")
            }
            Violation::NegativeLevelProb => write!(f, "q entries must be non-negative"),
            Violation::LevelProbsSum(s) => write!(f, "q must sum to 1 (sums to {s})"),
            Violation::PowerBudget(v) => write!(f, "power budget must be positive (got {v})"),
            Violation::Rate(v) => write!(f, "rate must be positive (got {v})"),
            Violation::SlotDuration(v) => write!(f, "slot duration must be positive (got {v})"),
        }
    }
}

/// Received SNR levels together with the access probabilities left after power gating.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrLadder {
    /// Target received SNRs, strictly descending.
    pub levels: Vec<f64>,
    /// Probability that a node holding a packet is actually active in a slot.
    pub bar_p_tx: f64,
    /// Level distribution conditioned on the node being actually active.
    pub bar_q: Vec<f64>,
}

impl SnrLadder {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Probability that level `k` is affordable under the budget, `exp(-levels[k] / P)`.
    pub fn feasibility(&self, k: usize, power_budget: f64) -> f64 {
        (-self.levels[k] / power_budget).exp()
    }
}

/// Received SNR targets for `num_levels` levels shared by `sources` nodes.
///
/// The lowest level just supports `rate` against noise; each higher level supports `rate`
/// against noise plus `sources - 1` interferers at the next level down.
pub fn snr_levels(sources: usize, num_levels: usize, rate: f64) -> Vec<f64> {
    let base = rate.exp2() - 1.0;
    let mut levels = vec![0.0; num_levels];
    if num_levels == 0 {
        return levels;
    }
    levels[num_levels - 1] = base;
    for k in (0..num_levels - 1).rev() {
        levels[k] = base * (1.0 + (sources as f64 - 1.0) * levels[k + 1]);
    }
    levels
}

pub fn configure_snr_ladder(cfg: &SystemConfig) -> Result<SnrLadder> {
    cfg.ensure_valid()?;
    let levels = snr_levels(cfg.sources, cfg.num_levels, cfg.rate);
    let weights: Vec<f64> = levels
        .iter()
        .zip(&cfg.level_probs)
        .map(|(l, q)| q * (-l / cfg.power_budget).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    // Every chosen level unaffordable: nobody is ever active, keep q for shape only.
    let bar_q = if total > 0.0 {
        weights.iter().map(|w| w / total).collect()
    } else {
        cfg.level_probs.clone()
    };
    Ok(SnrLadder {
        levels,
        bar_p_tx: cfg.attempt_prob * total,
        bar_q,
    })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
