//! Average AoI without retransmission.
//!
//! Each node empties its buffer at every slot end, so user 1 delivers in a slot exactly when a
//! packet arrived at the end of the previous slot and the slot's transmission succeeds. Slots are
//! independent, inter-delivery intervals are geometric and every delivered packet has a system
//! time of one slot.

use crate::combinatorics::{beta_u1, gamma_max};
use crate::error::{AoiError, Result};
use crate::math::binomial_pmf;
use crate::model::{configure_snr_ladder, SnrLadder, SystemConfig};

/// Closed-form quantities for the scheme without retransmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrtResult {
    /// Per-slot probability that user 1 completes a status update.
    pub success_prob: f64,
    /// Mean inter-delivery interval.
    pub mean_interval: f64,
    /// Second moment of the inter-delivery interval.
    pub second_moment_interval: f64,
    pub avg_aoi: f64,
}

impl NrtResult {
    /// Interval moments and AoI implied by a per-slot success probability.
    pub fn from_success_prob(success_prob: f64, slot_duration: f64) -> Result<Self> {
        if !(success_prob > 0.0 && success_prob <= 1.0) {
            return Err(AoiError::Degenerate(format!(
                "per-slot success probability {success_prob} gives unbounded AoI"
            )));
        }
        let t = slot_duration;
        let p = success_prob;
        Ok(NrtResult {
            success_prob: p,
            mean_interval: t / p,
            second_moment_interval: t * t * (2.0 - p) / (p * p),
            avg_aoi: t / 2.0 + t / p,
        })
    }
}

/// Probability that user 1 delivers an update in a given slot.
pub fn success_prob_nrt(ladder: &SnrLadder, cfg: &SystemConfig) -> Result<f64> {
    let m = cfg.sources;
    let k = ladder.num_levels();
    let active = cfg.arrival_prob * ladder.bar_p_tx;
    let mut total = 0.0;
    for i in 1..=m {
        // User 1 active together with i - 1 of the other M - 1 nodes.
        let p_active = active * binomial_pmf((m - 1) as u64, (i - 1) as u64, active);
        if p_active == 0.0 {
            continue;
        }
        let mut conditional = 0.0;
        for x in 1..=gamma_max(i, k) {
            conditional += beta_u1(i, x, &ladder.bar_q)?;
        }
        total += p_active * conditional;
    }
    Ok(total)
}

pub fn average_aoi_nrt(cfg: &SystemConfig) -> Result<NrtResult> {
    if cfg.arrival_prob == 0.0 {
        return Err(AoiError::Degenerate("no arrivals (lambda = 0)".into()));
    }
    let ladder = configure_snr_ladder(cfg)?;
    if ladder.bar_p_tx == 0.0 {
        return Err(AoiError::Degenerate(
            "no source is ever actually active (every level exceeds the power budget)".into(),
        ));
    }
    let p = success_prob_nrt(&ladder, cfg)?;
    NrtResult::from_success_prob(p, cfg.slot_duration)
}

/// Large-population stationarity condition for the two-level attempt probability.
///
/// With `bar_p_tx = eta / (lambda * M * q1)` and `M -> inf`, the derivative of the per-slot
/// success probability is proportional to this function of `eta`.
pub fn two_level_stationarity(eta: f64, q1: f64) -> f64 {
    let q2 = 1.0 - q1;
    let poly = -eta * eta * q2 / q1 + (2.0 * q1 - 1.0) * q2 * eta / q1 + q2;
    poly * (-eta / q1).exp() + (1.0 - eta) * q1 * (-eta).exp()
}

/// An interval on which [`two_level_stationarity`] changes sign.
///
/// The second term is positive below `eta = 1` and negative above. The first term's quadratic
/// factor has its positive root at `eta_c = (2 q1 - 1 + sqrt(1 + 4 q1^2)) / 2`. Below
/// `min(1, eta_c)` both terms are non-negative and above `max(1, eta_c)` both are non-positive.
pub fn two_level_bracket(q1: f64) -> (f64, f64) {
    let eta_c = (2.0 * q1 - 1.0 + (1.0 + 4.0 * q1 * q1).sqrt()) / 2.0;
    (eta_c.min(1.0), eta_c.max(1.0))
}

pub const BISECTION_TOL: f64 = 1e-10;
pub const BISECTION_MAX_ITER: usize = 200;

/// Root of `f` on `[lo, hi]` by bisection. Fails if `f` has the same strict sign at both ends.
pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let (bracket_lo, bracket_hi) = (lo, hi);
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(AoiError::BracketFailure {
            lo: bracket_lo,
            hi: bracket_hi,
        });
    }
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 || hi - lo <= BISECTION_TOL {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Approximate optimal attempt probability for two levels and many sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelOptimum {
    /// Root of [`two_level_stationarity`].
    pub eta: f64,
    /// Optimal effective activation probability `eta / (lambda * M * q1)`.
    pub bar_p_tx: f64,
    /// Attempt probability that yields `bar_p_tx` after power gating, clamped to `(0, 1]`.
    pub p_tx: f64,
    /// Set when the unconstrained optimum exceeded 1.
    pub clamped: bool,
}

pub fn optimal_ptx_nrt_k2(cfg: &SystemConfig) -> Result<TwoLevelOptimum> {
    if cfg.num_levels != 2 {
        return Err(AoiError::Unsupported(format!(
            "the two-level optimum needs K = 2 (got K = {})",
            cfg.num_levels
        )));
    }
    cfg.ensure_valid()?;
    let q1 = cfg.level_probs[0];
    if !(q1 > 0.0) {
        return Err(AoiError::OutOfRange(
            "the two-level optimum needs q1 > 0".into(),
        ));
    }
    let (lo, hi) = two_level_bracket(q1);
    let eta = bisect(lo, hi, |eta| two_level_stationarity(eta, q1))?;
    let bar_p_tx = eta / (cfg.arrival_prob * cfg.sources as f64 * q1);

    // bar_p_tx = p_tx * sum_k q_k exp(-levels[k] / P) with the configured ladder.
    let ladder = configure_snr_ladder(&cfg.clone().with_attempt_prob(1.0))?;
    let gate = ladder.bar_p_tx;
    if gate == 0.0 {
        return Err(AoiError::Degenerate(
            "every level exceeds the power budget".into(),
        ));
    }
    let unconstrained = bar_p_tx / gate;
    Ok(TwoLevelOptimum {
        eta,
        bar_p_tx,
        p_tx: unconstrained.min(1.0),
        clamped: unconstrained > 1.0,
    })
}
