//! Average AoI with retransmission.
//!
//! Failed packets stay buffered until delivered or replaced, which couples the nodes through the
//! number of buffered users. That count is a Markov chain on `0..=M`; its stationary law gives the
//! success probability of user 1 in a slot where it holds a packet. The interval between two
//! deliveries of user 1 is then the absorption time of a small four-state chain.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::combinatorics::{beta_any, beta_u1, fills_all_levels, gamma_max};
use crate::error::{AoiError, Result};
use crate::math::{binomial, binomial_signed, powu};
use crate::model::{configure_snr_ladder, SnrLadder, SystemConfig};
use crate::stationary::stationary_distribution;

/// Entries above this magnitude below zero indicate a construction error rather than rounding.
const NEGATIVE_ENTRY_TOL: f64 = 1e-14;

/// Markov chain of the number of buffered users at the start of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferChain {
    /// `transition[(b, a)]` is the probability of moving from `b` to `a` buffered users.
    pub transition: DMatrix<f64>,
    /// Stationary distribution over `0..=M` buffered users.
    pub stationary: DVector<f64>,
    /// `conditional_given_u1[m]`: probability that `m` other users are buffered given that
    /// user 1 is, `m = 0..M`.
    pub conditional_given_u1: DVector<f64>,
}

impl BufferChain {
    pub fn build(ladder: &SnrLadder, cfg: &SystemConfig) -> Result<Self> {
        let transition = transition_matrix(ladder, cfg)?;
        let stationary = stationary_distribution(&transition)?;
        let conditional_given_u1 = conditional_given_u1(&stationary)?;
        Ok(BufferChain {
            transition,
            stationary,
            conditional_given_u1,
        })
    }
}

/// Table of `beta_any(i, x)` for `i = 0..=max_active`, with `i = 0` meaning nobody is active.
fn anonymous_success_table(max_active: usize, bar_q: &[f64]) -> Result<Vec<Vec<f64>>> {
    let k = bar_q.len();
    let mut table = Vec::with_capacity(max_active + 1);
    table.push(vec![1.0]);
    for i in 1..=max_active {
        let row = (0..=gamma_max(i, k))
            .map(|x| beta_any(i, x, bar_q))
            .collect::<Result<Vec<_>>>()?;
        table.push(row);
    }
    Ok(table)
}

/// Probability that `x_star` of `b` buffered users succeed in one slot.
fn buffered_success_prob(b: usize, x_star: usize, bar_p: f64, k: usize, table: &[Vec<f64>]) -> f64 {
    let upper = if fills_all_levels(x_star, k) { k } else { b };
    (x_star..=upper)
        .map(|i| {
            let beta = table[i].get(x_star).copied().unwrap_or(0.0);
            binomial(b as u64, i as u64)
                * powu(1.0 - bar_p, (b - i) as u64)
                * powu(bar_p, i as u64)
                * beta
        })
        .sum()
}

/// Transition matrix of the buffered-user count.
///
/// From `b` buffered users, `x*` deliveries leave `b - x*` packets; each of the other
/// `M - b + x*` nodes receives a new packet with probability `lambda`, giving `a` buffered users
/// at the start of the next slot.
pub fn transition_matrix(ladder: &SnrLadder, cfg: &SystemConfig) -> Result<DMatrix<f64>> {
    let m = cfg.sources;
    let k = ladder.num_levels();
    let lambda = cfg.arrival_prob;
    let bar_p = ladder.bar_p_tx;
    let table = anonymous_success_table(m, &ladder.bar_q)?;

    // success[b][x*] for x* = 0..=min(b, K)
    let success: Vec<Vec<f64>> = (0..=m)
        .map(|b| {
            (0..=b.min(k))
                .map(|x| buffered_success_prob(b, x, bar_p, k, &table))
                .collect()
        })
        .collect();

    let mut p = DMatrix::zeros(m + 1, m + 1);
    for b in 0..=m {
        for a in 0..=m {
            let lo = b.saturating_sub(a);
            let hi = b.min(k);
            let mut total = 0.0;
            for (x, &succ) in success[b].iter().enumerate().take(hi + 1).skip(lo) {
                let empty = (m - b + x) as i64;
                let arrivals = a as i64 - b as i64 + x as i64;
                let arrival_prob = binomial_signed(empty, arrivals)
                    * powu(lambda, arrivals as u64)
                    * powu(1.0 - lambda, (m - a) as u64);
                total += arrival_prob * succ;
            }
            if total < -NEGATIVE_ENTRY_TOL {
                return Err(AoiError::NonConvergence(format!(
                    "transition entry ({b}, {a}) = {total} is negative"
                )));
            }
            p[(b, a)] = total.max(0.0);
        }
    }
    Ok(p)
}

/// Distribution of the number of other buffered users given that user 1 is buffered.
///
/// By symmetry user 1 is among `m + 1` buffered users with probability
/// `C(M-1, m) / C(M, m+1) = (m + 1) / M`.
pub fn conditional_given_u1(stationary: &DVector<f64>) -> Result<DVector<f64>> {
    let m_total = stationary.len() - 1;
    if m_total == 0 {
        return Err(AoiError::OutOfRange(
            "chain needs at least one source".into(),
        ));
    }
    let weights = DVector::from_iterator(
        m_total,
        (0..m_total).map(|m| (m + 1) as f64 / m_total as f64 * stationary[m + 1]),
    );
    let total = weights.sum();
    if !(total > 0.0) {
        return Err(AoiError::Degenerate(
            "user 1 never holds a packet (no arrivals)".into(),
        ));
    }
    Ok(weights / total)
}

/// Probability that user 1 transmits successfully in a slot where it holds a packet.
pub fn success_prob_rt(ladder: &SnrLadder, cfg: &SystemConfig) -> Result<f64> {
    let chain = BufferChain::build(ladder, cfg)?;
    success_prob_given_chain(ladder, &chain)
}

pub fn success_prob_given_chain(ladder: &SnrLadder, chain: &BufferChain) -> Result<f64> {
    let k = ladder.num_levels();
    let bar_p = ladder.bar_p_tx;
    let mut total = 0.0;
    for (m, &weight) in chain.conditional_given_u1.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let mut kernel = 0.0;
        for x in 1..=(m + 1).min(k) {
            let upper = if fills_all_levels(x, k) { k } else { m + 1 };
            for i in x..=upper {
                // user 1 active with i - 1 of its m buffered peers
                let activity = binomial(m as u64, (i - 1) as u64)
                    * powu(1.0 - bar_p, (m + 1 - i) as u64)
                    * powu(bar_p, i as u64);
                kernel += activity * beta_u1(i, x, &ladder.bar_q)?;
            }
        }
        total += weight * kernel;
    }
    Ok(total)
}

/// Moments of the inter-delivery interval of user 1.
///
/// Transient states: just delivered, buffer empty, packet waiting. The waiting state is left
/// with probability `p_tilde` per slot into the absorbing "delivered again" state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingMoments {
    /// Expected number of steps from "just delivered" to absorption.
    pub expected_steps: f64,
    pub variance_steps: f64,
    pub mean_interval: f64,
    pub second_moment_interval: f64,
    /// Mean system time of a delivered packet.
    pub mean_system_time: f64,
}

pub fn absorbing_moments(
    lambda: f64,
    p_tilde: f64,
    slot_duration: f64,
) -> Result<AbsorbingMoments> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(AoiError::Degenerate(format!(
            "arrival probability {lambda} outside (0,1]"
        )));
    }
    if !(p_tilde > 0.0 && p_tilde <= 1.0) {
        return Err(AoiError::Degenerate(format!(
            "success probability {p_tilde} outside (0,1]: absorption never occurs"
        )));
    }
    // I - Q for the transient block, written out so that a tiny p_tilde survives rounding.
    let i_minus_q = Matrix3::new(
        1.0,
        -(1.0 - lambda),
        -lambda,
        0.0,
        lambda,
        -lambda,
        0.0,
        0.0,
        p_tilde,
    );
    let fundamental = i_minus_q
        .solve_upper_triangular(&Matrix3::identity())
        .ok_or_else(|| AoiError::Degenerate("I - Q is singular".into()))?;
    let steps = fundamental * Vector3::repeat(1.0);
    let variance = (2.0 * fundamental - Matrix3::identity()) * steps - steps.component_mul(&steps);

    let n = steps[0];
    let var = variance[0].max(0.0);
    let t = slot_duration;
    Ok(AbsorbingMoments {
        expected_steps: n,
        variance_steps: var,
        mean_interval: t * (n - 1.0),
        second_moment_interval: t * t * (var + n * n - 2.0 * n + 1.0),
        mean_system_time: t / (1.0 - (1.0 - lambda) * (1.0 - p_tilde)),
    })
}

/// Closed-form average AoI with retransmission in terms of `lambda` and `p_tilde`.
pub fn rt_aoi_closed_form(lambda: f64, p_tilde: f64, slot_duration: f64) -> f64 {
    let (l, p, t) = (lambda, p_tilde, slot_duration);
    let system_time = t / (1.0 - (1.0 - l) * (1.0 - p));
    let num = 2.0 * (l * l + p * p) - l * p * (3.0 * l + 3.0 * p - l * p - 2.0);
    let den = 2.0 * l * p * (l + p - l * p);
    system_time + t * num / den
}

#[derive(Debug, Clone, PartialEq)]
pub struct RtResult {
    pub success_prob: f64,
    pub moments: AbsorbingMoments,
    /// Closed-form average AoI.
    pub avg_aoi: f64,
    /// `E{S} + E{D^2} / (2 E{D})` from the absorbing-chain moments.
    pub avg_aoi_from_moments: f64,
    pub chain: BufferChain,
}

pub fn average_aoi_rt(cfg: &SystemConfig) -> Result<RtResult> {
    if cfg.arrival_prob == 0.0 {
        return Err(AoiError::Degenerate("no arrivals (lambda = 0)".into()));
    }
    let ladder = configure_snr_ladder(cfg)?;
    if ladder.bar_p_tx == 0.0 {
        return Err(AoiError::Degenerate(
            "no source is ever actually active (every level exceeds the power budget)".into(),
        ));
    }
    let chain = BufferChain::build(&ladder, cfg)?;
    let p = success_prob_given_chain(&ladder, &chain)?;
    let moments = absorbing_moments(cfg.arrival_prob, p, cfg.slot_duration)?;
    Ok(RtResult {
        success_prob: p,
        moments,
        avg_aoi: rt_aoi_closed_form(cfg.arrival_prob, p, cfg.slot_duration),
        avg_aoi_from_moments: moments.mean_system_time
            + moments.second_moment_interval / (2.0 * moments.mean_interval),
        chain,
    })
}
