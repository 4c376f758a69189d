//! Independent oracles and reference data shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Power budgets (dB) of the reference grids.
pub const POWER_DB: [f64; 9] = [-5.0, -2.0, 1.0, 4.0, 7.0, 10.0, 13.0, 17.0, 20.0];

/// Published no-retransmission AoI, rows `K = 2..=10`, columns [`POWER_DB`].
pub const NRT_GRID: [[f64; 9]; 9] = [
    [
        6.8236, 6.0511, 5.9473, 5.9904, 6.0415, 6.0756, 6.0949, 6.1073, 6.1116,
    ],
    [
        6.7646, 5.1606, 4.6720, 4.5221, 4.4752, 4.4596, 4.4540, 4.4513, 4.4505,
    ],
    [
        7.3874, 5.0359, 4.2508, 3.9692, 3.8603, 3.8147, 3.7943, 3.7827, 3.7790,
    ],
    [
        8.2854, 5.1797, 4.1096, 3.7097, 3.5479, 3.4774, 3.4449, 3.4262, 3.4202,
    ],
    [
        9.3341, 5.4584, 4.0977, 3.5812, 3.3688, 3.2751, 3.2316, 3.2063, 3.1982,
    ],
    [
        10.4755, 5.8203, 4.1587, 3.5233, 3.2605, 3.1440, 3.0897, 3.0582, 3.0480,
    ],
    [
        11.6756, 6.2404, 4.2670, 3.5085, 3.1943, 3.0549, 2.9899, 2.9521, 2.9399,
    ],
    [
        12.9129, 6.7041, 4.4091, 3.5227, 3.1556, 2.9929, 2.9170, 2.8729, 2.8587,
    ],
    [
        14.1730, 7.2019, 4.5773, 3.5578, 3.1359, 2.9492, 2.8623, 2.8119, 2.7957,
    ],
];

/// Published retransmission AoI, same layout as [`NRT_GRID`].
pub const RT_GRID: [[f64; 9]; 9] = [
    [
        5.9874, 6.7062, 8.0248, 9.2250, 10.0484, 10.5345, 10.7995, 10.9672, 11.0238,
    ],
    [
        4.9508, 4.3817, 4.5249, 4.8260, 5.0756, 5.2348, 5.3248, 5.3829, 5.4026,
    ],
    [
        4.9875, 3.8310, 3.5841, 3.6121, 3.6904, 3.7524, 3.7905, 3.8160, 3.8248,
    ],
    [
        5.3280, 3.7071, 3.2246, 3.1113, 3.1057, 3.1209, 3.1340, 3.1439, 3.1476,
    ],
    [
        5.8022, 3.7490, 3.0749, 2.8629, 2.8030, 2.7889, 2.7868, 2.7872, 2.7877,
    ],
    [
        6.3478, 3.8751, 3.0232, 2.7286, 2.6268, 2.5911, 2.5778, 2.5715, 2.5697,
    ],
    [
        6.9348, 4.0520, 3.0257, 2.6549, 2.5169, 2.4631, 2.4408, 2.4290, 2.4254,
    ],
    [
        7.5465, 4.2630, 3.0623, 2.6173, 2.4456, 2.3757, 2.3454, 2.3289, 2.3237,
    ],
    [
        8.1727, 4.4984, 3.1222, 2.6032, 2.3989, 2.3137, 2.2761, 2.2552, 2.2486,
    ],
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random level distribution of length `k`; roughly one draw in eight has a zero entry.
pub fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..k)
            .map(|_| {
                if k > 1 && rng.random::<f64>() < 0.125 {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|x| x / total).collect();
        }
    }
}

/// Levels that decode under SIC given per-level counts, top level first.
pub fn decoded_levels(counts: &[usize]) -> Vec<bool> {
    let mut ok = vec![false; counts.len()];
    for (k, &c) in counts.iter().enumerate() {
        if c >= 2 {
            break;
        }
        ok[k] = c == 1;
    }
    ok
}

/// Calls `visit(choices, prob)` for every joint choice of `n` nodes, where choice 0 is silent
/// (probability `1 - active`) and choice `k + 1` is level `k` (probability `active * q[k]`).
pub fn for_each_joint_choice(
    n: usize,
    active: f64,
    q: &[f64],
    mut visit: impl FnMut(&[usize], f64),
) {
    let weights: Vec<f64> = std::iter::once(1.0 - active)
        .chain(q.iter().map(|p| active * p))
        .collect();
    let mut choice = vec![0usize; n];
    loop {
        let prob: f64 = choice.iter().map(|&c| weights[c]).product();
        visit(&choice, prob);
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            choice[pos] += 1;
            if choice[pos] < weights.len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Nodes that succeed given their choices (0 silent, `k + 1` level `k`).
pub fn successful_nodes(choices: &[usize], num_levels: usize) -> Vec<bool> {
    let mut counts = vec![0usize; num_levels];
    for &c in choices {
        if c > 0 {
            counts[c - 1] += 1;
        }
    }
    let ok = decoded_levels(&counts);
    choices.iter().map(|&c| c > 0 && ok[c - 1]).collect()
}

/// Per-slot success probability of node 0 without retransmission, by enumerating all
/// `(K + 1)^M` joint slot outcomes.
pub fn nrt_success_by_enumeration(m: usize, lambda: f64, bar_p: f64, bar_q: &[f64]) -> f64 {
    let mut total = 0.0;
    for_each_joint_choice(m, lambda * bar_p, bar_q, |choices, prob| {
        if successful_nodes(choices, bar_q.len())[0] {
            total += prob;
        }
    });
    total
}

/// Full chain over buffer-occupancy subsets (bit `j` set when node `j` holds a packet) with
/// retransmission.
pub fn product_chain(m: usize, lambda: f64, bar_p: f64, bar_q: &[f64]) -> DMatrix<f64> {
    let n_states = 1usize << m;
    let mut p = DMatrix::zeros(n_states, n_states);
    for s in 0..n_states {
        let holders: Vec<usize> = (0..m).filter(|j| s >> j & 1 == 1).collect();
        for_each_joint_choice(holders.len(), bar_p, bar_q, |choices, prob| {
            let ok = successful_nodes(choices, bar_q.len());
            let mut kept = s;
            for (idx, &node) in holders.iter().enumerate() {
                if ok[idx] {
                    kept &= !(1 << node);
                }
            }
            for next in 0..n_states {
                if next & kept != kept {
                    continue;
                }
                let mut w = prob;
                for j in 0..m {
                    if kept >> j & 1 == 1 {
                        continue;
                    }
                    w *= if next >> j & 1 == 1 {
                        lambda
                    } else {
                        1.0 - lambda
                    };
                }
                p[(s, next)] += w;
            }
        });
    }
    p
}

/// Probability that node 0 succeeds in a slot starting in subset state `s`.
pub fn node0_success_in_state(s: usize, m: usize, bar_p: f64, bar_q: &[f64]) -> f64 {
    if s & 1 == 0 {
        return 0.0;
    }
    let holders: Vec<usize> = (0..m).filter(|j| s >> j & 1 == 1).collect();
    let mut total = 0.0;
    for_each_joint_choice(holders.len(), bar_p, bar_q, |choices, prob| {
        if successful_nodes(choices, bar_q.len())[0] {
            total += prob;
        }
    });
    total
}

/// Stationary law of a small dense chain by repeated squaring of the transition matrix.
pub fn stationary_by_squaring(p: &DMatrix<f64>) -> DVector<f64> {
    let mut power = p.clone();
    for _ in 0..60 {
        power = &power * &power;
    }
    power.row(0).transpose()
}

/// Least-squares parabola through `(x, y)`; returns the vertex abscissa and leading coefficient.
pub fn parabola_vertex(x: &[f64], y: &[f64]) -> (f64, f64) {
    let x0 = x.iter().sum::<f64>() / x.len() as f64;
    let design = DMatrix::from_fn(x.len(), 3, |r, c| (x[r] - x0).powi(c as i32));
    let rhs = DVector::from_column_slice(y);
    let coef = (design.transpose() * &design)
        .lu()
        .solve(&(design.transpose() * rhs))
        .expect("distinct abscissae");
    (x0 - coef[1] / (2.0 * coef[2]), coef[2])
}
