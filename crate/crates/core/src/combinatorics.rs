//! Success-count distributions for one slot under the SIC decoding rule.
//!
//! Every actually active user picks a level independently from `bar_q` (highest power first).
//! The receiver decodes level by level from the top and stops at the first level holding two or
//! more users. A user succeeds iff it is alone on its level and no higher level is in collision.
//!
//! Two families are provided: [`beta_u1`] tags one user (user 1) and gives the probability that
//! it succeeds together with exactly `x` successes in total; [`beta_any`] treats the active users
//! anonymously. They satisfy `beta_u1(i, x) = (x / i) * beta_any(i, x)`.

use crate::error::{AoiError, Result};
use crate::math::{binomial, elementary_symmetric, factorial, powu};

/// Largest number of level assignments [`brute_force_success_dist`] will enumerate.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Maximum number of successes among `active` users sharing `num_levels` levels.
///
/// With more users than levels at least one level is in collision, which costs that level and
/// everything decoded after it, so at most `num_levels - 1` users can get through.
pub fn gamma_max(active: usize, num_levels: usize) -> usize {
    if fits_all_levels(active, num_levels) {
        active
    } else {
        num_levels - 1
    }
}

/// Indicator used by [`gamma_max`]: true when every active user could get its own level.
pub fn fits_all_levels(active: usize, num_levels: usize) -> bool {
    active <= num_levels
}

/// Indicator used in the buffered-user sums: true when `successes` occupies every level, in
/// which case exactly `num_levels` users were active.
pub fn fills_all_levels(successes: usize, num_levels: usize) -> bool {
    successes == num_levels
}

/// Precomputed suffix masses of a level distribution.
struct Levels<'a> {
    q: &'a [f64],
    /// `below[k]` = probability of picking a level strictly lower in power than `k`.
    below: Vec<f64>,
}

impl<'a> Levels<'a> {
    fn new(q: &'a [f64]) -> Self {
        let mut below = vec![0.0; q.len()];
        let mut acc = 0.0;
        for k in (0..q.len()).rev() {
            below[k] = acc;
            acc += q[k];
        }
        Levels { q, below }
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    /// Probability that `n` users all pick levels below `k` and none of them succeeds.
    ///
    /// The topmost occupied level among them decides: it must not be singly occupied.
    fn all_below_and_fail(&self, k: usize, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let n_f = n as f64;
        let mut p = powu(self.below[k], n as u64);
        for b in k + 1..self.len() {
            p -= n_f * self.q[b] * powu(self.below[b], n as u64 - 1);
        }
        p
    }

    /// Sum over `k` of `q[k]` times the probability that `others` users sit below `k` and fail.
    fn lone_top_success(&self, others: usize) -> f64 {
        (0..self.len())
            .map(|k| self.q[k] * self.all_below_and_fail(k, others))
            .sum()
    }

    /// Probability mass of a fixed set of `x >= 2` users occupying `x` distinct levels in some
    /// order, with the remaining `rest` users all below the lowest of them and failing.
    ///
    /// The intermediate levels strictly between the top level `k1` and the bottom level `k2` are
    /// summed through the elementary symmetric polynomial of degree `x - 2`, which equals the sum
    /// over increasing index tuples `k1 < n_1 < ... < n_{x-2} < k2`.
    fn distinct_block(&self, x: usize, rest: usize) -> f64 {
        let k = self.len();
        let mut total = 0.0;
        for k1 in 0..k {
            for k2 in (k1 + x - 1)..k {
                let inner = elementary_symmetric(&self.q[k1 + 1..k2], x - 2);
                total += self.q[k1] * self.q[k2] * inner * self.all_below_and_fail(k2, rest);
            }
        }
        total
    }
}

fn check_distribution(bar_q: &[f64]) -> Result<()> {
    if bar_q.is_empty() {
        return Err(AoiError::OutOfRange("level distribution is empty".into()));
    }
    Ok(())
}

/// Probability that user 1 succeeds and exactly `x` of the `i` active users succeed, given that
/// user 1 is one of the `i` active users.
pub fn beta_u1(i: usize, x: usize, bar_q: &[f64]) -> Result<f64> {
    check_distribution(bar_q)?;
    let k = bar_q.len();
    if i == 0 || x == 0 || x > gamma_max(i, k) {
        return Err(AoiError::OutOfRange(format!(
            "beta_u1 needs 1 <= x <= gamma_max(i, K); got i={i}, x={x}, K={k}"
        )));
    }
    if i == x + 1 {
        return Ok(0.0);
    }
    let levels = Levels::new(bar_q);
    let value = if x == 1 {
        levels.lone_top_success(i - 1)
    } else {
        binomial((i - 1) as u64, (x - 1) as u64)
            * factorial(x as u64)
            * levels.distinct_block(x, i - x)
    };
    Ok(value)
}

/// Probability that exactly `x_star` of `i_star` anonymous active users succeed.
pub fn beta_any(i_star: usize, x_star: usize, bar_q: &[f64]) -> Result<f64> {
    check_distribution(bar_q)?;
    let k = bar_q.len();
    if i_star == 0 || x_star > gamma_max(i_star, k) {
        return Err(AoiError::OutOfRange(format!(
            "beta_any needs i* >= 1 and x* <= gamma_max(i*, K); got i*={i_star}, x*={x_star}, K={k}"
        )));
    }
    if i_star == x_star + 1 {
        return Ok(0.0);
    }
    let levels = Levels::new(bar_q);
    let i_f = i_star as f64;
    let value = match x_star {
        // Complement of "the topmost occupied level holds exactly one user".
        0 => {
            let lone_top: f64 = (0..k)
                .map(|l| i_f * bar_q[l] * powu(levels.below[l], i_star as u64 - 1))
                .sum();
            1.0 - lone_top
        }
        1 => i_f * levels.lone_top_success(i_star - 1),
        x => {
            binomial(i_star as u64, x as u64)
                * factorial(x as u64)
                * levels.distinct_block(x, i_star - x)
        }
    };
    Ok(value)
}

/// Exact success-count distribution obtained by enumerating every level assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessDistribution {
    /// Number of actually active users.
    pub active: usize,
    /// Whether only outcomes in which user 1 succeeds were counted.
    pub tracks_user1: bool,
    /// `probs[x]` is the probability mass of exactly `x` successes, `x = 0..=active`.
    pub probs: Vec<f64>,
}

impl SuccessDistribution {
    pub fn get(&self, x: usize) -> f64 {
        self.probs.get(x).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Number of successes for a slot with the given per-level occupancy, and the first level in
/// collision (`occupancy.len()` if none).
pub fn sic_decode(occupancy: &[u32]) -> (usize, usize) {
    let mut successes = 0;
    for (level, &n) in occupancy.iter().enumerate() {
        match n {
            0 => {}
            1 => successes += 1,
            _ => return (successes, level),
        }
    }
    (successes, occupancy.len())
}

/// Enumerate all `K^i` level assignments of `i` active users and apply the SIC rule directly.
///
/// With `track_user1` set, only assignments in which user 1 succeeds contribute, so the result
/// sums to the probability that user 1 succeeds rather than to one.
pub fn brute_force_success_dist(
    i: usize,
    bar_q: &[f64],
    track_user1: bool,
) -> Result<SuccessDistribution> {
    check_distribution(bar_q)?;
    let k = bar_q.len();
    let assignments = (k as f64).powi(i as i32);
    if assignments > ENUMERATION_LIMIT as f64 {
        return Err(AoiError::EnumerationTooLarge {
            assignments,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut probs = vec![0.0; i + 1];
    let mut choice = vec![0usize; i];
    let mut occupancy = vec![0u32; k];
    loop {
        occupancy.iter_mut().for_each(|c| *c = 0);
        let mut weight = 1.0;
        for &level in &choice {
            occupancy[level] += 1;
            weight *= bar_q[level];
        }
        let (successes, cutoff) = sic_decode(&occupancy);
        let counted = !track_user1 || (i > 0 && choice[0] < cutoff && occupancy[choice[0]] == 1);
        if counted {
            probs[successes] += weight;
        }

        // Odometer increment over the mixed-radix digits.
        let mut pos = 0;
        loop {
            if pos == i {
                return Ok(SuccessDistribution {
                    active: i,
                    tracks_user1: track_user1,
                    probs,
                });
            }
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}
