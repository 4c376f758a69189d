//! Scheme-agnostic entry points over the two closed forms.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{AoiError, Result};
use crate::model::SystemConfig;
use crate::nrt::average_aoi_nrt;
use crate::rt::average_aoi_rt;

/// Buffer policy at the end of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Buffers are emptied at every slot end.
    NoRetransmission,
    /// Undelivered packets stay buffered until delivered or replaced.
    Retransmission,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::NoRetransmission, Scheme::Retransmission];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::NoRetransmission => "nrt",
            Scheme::Retransmission => "rt",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nrt" => Ok(Scheme::NoRetransmission),
            "rt" => Ok(Scheme::Retransmission),
            other => Err(AoiError::OutOfRange(format!(
                "unknown scheme '{other}' (expected nrt or rt)"
            ))),
        }
    }
}

/// Summary of either closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeAnalysis {
    pub scheme: Scheme,
    /// Per-slot success probability (NRT) or success probability given a buffered packet (RT).
    pub success_prob: f64,
    pub mean_interval: f64,
    pub second_moment_interval: f64,
    pub mean_system_time: f64,
    pub avg_aoi: f64,
}

pub fn analyze(cfg: &SystemConfig, scheme: Scheme) -> Result<SchemeAnalysis> {
    match scheme {
        Scheme::NoRetransmission => {
            let r = average_aoi_nrt(cfg)?;
            Ok(SchemeAnalysis {
                scheme,
                success_prob: r.success_prob,
                mean_interval: r.mean_interval,
                second_moment_interval: r.second_moment_interval,
                mean_system_time: cfg.slot_duration,
                avg_aoi: r.avg_aoi,
            })
        }
        Scheme::Retransmission => {
            let r = average_aoi_rt(cfg)?;
            Ok(SchemeAnalysis {
                scheme,
                success_prob: r.success_prob,
                mean_interval: r.moments.mean_interval,
                second_moment_interval: r.moments.second_moment_interval,
                mean_system_time: r.moments.mean_system_time,
                avg_aoi: r.avg_aoi,
            })
        }
    }
}

pub fn average_aoi(cfg: &SystemConfig, scheme: Scheme) -> Result<f64> {
    analyze(cfg, scheme).map(|a| a.avg_aoi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub p_tx: f64,
    pub avg_aoi: f64,
}

/// Grid points `step, 2 step, ...` up to and including 1 (within rounding).
pub fn ptx_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(AoiError::OutOfRange(format!(
            "grid step must be in (0, 0.5] (got {step})"
        )));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    Ok((1..=count).map(|j| j as f64 * step).collect())
}

/// Minimizer of `objective` over `points`; ties go to the earliest point.
pub fn grid_argmin<F>(points: &[f64], objective: F) -> Result<GridOptimum>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let values = points
        .par_iter()
        .map(|&p| objective(p))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<GridOptimum> = None;
    for (&p_tx, &avg_aoi) in points.iter().zip(&values) {
        if best.is_none_or(|b| avg_aoi < b.avg_aoi) {
            best = Some(GridOptimum { p_tx, avg_aoi });
        }
    }
    best.ok_or_else(|| AoiError::OutOfRange("empty grid".into()))
}

/// Attempt probability minimizing the closed-form AoI of `scheme` over a uniform grid.
pub fn ptx_grid_argmin(cfg: &SystemConfig, scheme: Scheme, grid_step: f64) -> Result<GridOptimum> {
    let points = ptx_grid(grid_step)?;
    grid_argmin(&points, |p| {
        average_aoi(&cfg.clone().with_attempt_prob(p), scheme)
    })
}
