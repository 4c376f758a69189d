//! Slot-level Monte Carlo simulation of the uplink.
//!
//! Slot `t` covers `(t - 1, t]` in slot units. At the start of a slot every node holding a
//! packet attempts with probability `p_tx`, picks a level from `q` and stays silent if the
//! Rayleigh-faded power needed for that level exceeds the budget. The receiver applies the SIC
//! rule. At the slot end the buffers are cleared (no retransmission) or keep undelivered packets
//! (retransmission); then each node receives a new packet with probability `lambda`, stamped
//! with generation time `t` and replacing any packet it holds.
//!
//! Every node owns a ChaCha8 stream selected by its index under the run seed, and consumes
//! exactly four uniforms per slot whether or not it uses them. A run is therefore a pure function
//! of `(cfg, scheme, slots, seed)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::Scheme;
use crate::combinatorics::sic_decode;
use crate::error::{AoiError, Result};
use crate::model::{snr_levels, SystemConfig};
use crate::report::format_sig;

const INACTIVE: usize = usize::MAX;

/// One delivered update of user 1, in slot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    /// Slot end at which the packet was generated.
    pub generated: u64,
    /// Slot end at which the packet was decoded.
    pub received: u64,
}

impl Delivery {
    pub fn system_slots(&self) -> u64 {
        self.received - self.generated
    }
}

/// What happened in one simulated slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRecord {
    pub slot: u64,
    /// Nodes holding a packet at the start of the slot.
    pub buffered: usize,
    /// Nodes that attempted and could afford their chosen level.
    pub active: usize,
    /// Packets decoded in this slot.
    pub delivered: usize,
    /// First level in collision, if any.
    pub collision_level: Option<usize>,
    pub user1_buffered: bool,
    pub user1_delivery: Option<Delivery>,
}

/// Per-slot engine. Most callers want [`run_simulation`].
#[derive(Debug, Clone)]
pub struct Simulator {
    scheme: Scheme,
    arrival_prob: f64,
    attempt_prob: f64,
    cumulative_q: Vec<f64>,
    /// `exp(-levels[k] / P)`: with `|h|^2 ~ Exp(1)`, the level is affordable iff a uniform draw
    /// `u` satisfies `-ln(1 - u) >= levels[k] / P`, i.e. `1 - u <= exp(-levels[k] / P)`.
    affordable: Vec<f64>,
    rngs: Vec<ChaCha8Rng>,
    buffers: Vec<Option<u64>>,
    level_of: Vec<usize>,
    arrival_draws: Vec<f64>,
    occupancy: Vec<u32>,
    slot: u64,
}

impl Simulator {
    pub fn new(cfg: &SystemConfig, scheme: Scheme, seed: u64) -> Result<Self> {
        cfg.ensure_valid()?;
        let levels = snr_levels(cfg.sources, cfg.num_levels, cfg.rate);
        let mut acc = 0.0;
        let cumulative_q = cfg
            .level_probs
            .iter()
            .map(|q| {
                acc += q;
                acc
            })
            .collect();
        let affordable = levels
            .iter()
            .map(|l| (-l / cfg.power_budget).exp())
            .collect();
        let rngs = (0..cfg.sources)
            .map(|node| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(node as u64);
                rng
            })
            .collect();
        Ok(Simulator {
            scheme,
            arrival_prob: cfg.arrival_prob,
            attempt_prob: cfg.attempt_prob,
            cumulative_q,
            affordable,
            rngs,
            buffers: vec![None; cfg.sources],
            level_of: vec![INACTIVE; cfg.sources],
            arrival_draws: vec![0.0; cfg.sources],
            occupancy: vec![0; cfg.num_levels],
            slot: 0,
        })
    }

    /// Number of nodes currently holding a packet.
    pub fn buffered(&self) -> usize {
        self.buffers.iter().filter(|b| b.is_some()).count()
    }

    /// Per-level occupancy of the most recent slot.
    pub fn occupancy(&self) -> &[u32] {
        &self.occupancy
    }

    fn pick_level(&self, u: f64) -> usize {
        self.cumulative_q
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative_q.len() - 1)
    }

    pub fn step(&mut self) -> SlotRecord {
        self.slot += 1;
        let slot = self.slot;
        self.occupancy.iter_mut().for_each(|c| *c = 0);
        let mut buffered = 0;
        let mut active = 0;

        for node in 0..self.rngs.len() {
            let rng = &mut self.rngs[node];
            let u_attempt: f64 = rng.random();
            let u_level: f64 = rng.random();
            let u_gain: f64 = rng.random();
            self.arrival_draws[node] = rng.random();

            self.level_of[node] = INACTIVE;
            if self.buffers[node].is_none() {
                continue;
            }
            buffered += 1;
            if u_attempt >= self.attempt_prob {
                continue;
            }
            // The level is chosen before the power check.
            let level = self.pick_level(u_level);
            if 1.0 - u_gain <= self.affordable[level] {
                self.level_of[node] = level;
                self.occupancy[level] += 1;
                active += 1;
            }
        }

        let (delivered, cutoff) = sic_decode(&self.occupancy);
        let user1_buffered = self.buffers.first().is_some_and(|b| b.is_some());
        let mut user1_delivery = None;
        for node in 0..self.buffers.len() {
            let level = self.level_of[node];
            if level < cutoff && self.occupancy[level] == 1 {
                let generated = self.buffers[node]
                    .take()
                    .expect("active node holds a packet");
                if node == 0 {
                    user1_delivery = Some(Delivery {
                        generated,
                        received: slot,
                    });
                }
            }
        }

        if self.scheme == Scheme::NoRetransmission {
            self.buffers.iter_mut().for_each(|b| *b = None);
        }
        for (buffer, &u) in self.buffers.iter_mut().zip(&self.arrival_draws) {
            if u < self.arrival_prob {
                *buffer = Some(slot);
            }
        }

        SlotRecord {
            slot,
            buffered,
            active,
            delivered,
            collision_level: (cutoff < self.occupancy.len()).then_some(cutoff),
            user1_buffered,
            user1_delivery,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    /// Slots simulated before any statistic is recorded.
    pub warmup_slots: u64,
}

/// Outcome of one simulation run for user 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scheme: Scheme,
    pub avg_aoi: f64,
    pub deliveries: Vec<Delivery>,
    /// Slots in which user 1 delivered.
    pub success_count: u64,
    /// Slots in which user 1 started with a packet.
    pub buffered_slot_count: u64,
    /// Recorded slots (after warm-up).
    pub slots: u64,
    pub seed: u64,
    pub slot_duration: f64,
}

impl SimResult {
    /// Delivery log with columns `j, t_j, t'_j, D_j, S_j, Q_j`; times in time units. `D_j` and
    /// `Q_j` are empty for the first delivery.
    pub fn write_deliveries_csv<W: Write>(&self, out: W) -> Result<()> {
        let t = self.slot_duration;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["j", "t_j", "t'_j", "D_j", "S_j", "Q_j"])?;
        let mut prev: Option<Delivery> = None;
        for (j, d) in self.deliveries.iter().enumerate() {
            let s = d.system_slots() as f64 * t;
            let (dj, qj) = match prev {
                Some(p) => {
                    let dj = (d.received - p.received) as f64 * t;
                    let qj = dj * p.system_slots() as f64 * t + dj * dj / 2.0;
                    (format_sig(dj), format_sig(qj))
                }
                None => (String::new(), String::new()),
            };
            w.write_record([
                (j + 1).to_string(),
                format_sig(d.generated as f64 * t),
                format_sig(d.received as f64 * t),
                dj,
                format_sig(s),
                qj,
            ])?;
            prev = Some(*d);
        }
        w.flush()?;
        Ok(())
    }
}

/// Time-average age from a delivery log: sum of trapezoids `D_j S_{j-1} + D_j^2 / 2` over the
/// sum of intervals `D_j`. `None` with fewer than two deliveries.
pub fn average_aoi_from_deliveries(deliveries: &[Delivery], slot_duration: f64) -> Option<f64> {
    let (area, span) = deliveries
        .windows(2)
        .fold((0.0, 0.0), |(area, span), pair| {
            let d = (pair[1].received - pair[0].received) as f64;
            let s = pair[0].system_slots() as f64;
            (area + d * s + d * d / 2.0, span + d)
        });
    (span > 0.0).then(|| slot_duration * area / span)
}

pub fn run_simulation(
    cfg: &SystemConfig,
    scheme: Scheme,
    slots: u64,
    seed: u64,
) -> Result<SimResult> {
    run_simulation_with(cfg, scheme, slots, seed, SimOptions::default())
}

pub fn run_simulation_with(
    cfg: &SystemConfig,
    scheme: Scheme,
    slots: u64,
    seed: u64,
    options: SimOptions,
) -> Result<SimResult> {
    if slots == 0 {
        return Err(AoiError::OutOfRange("slots must be at least 1".into()));
    }
    let mut sim = Simulator::new(cfg, scheme, seed)?;
    for _ in 0..options.warmup_slots {
        sim.step();
    }
    let mut deliveries = Vec::new();
    let mut buffered_slot_count = 0;
    for _ in 0..slots {
        let record = sim.step();
        buffered_slot_count += u64::from(record.user1_buffered);
        if let Some(d) = record.user1_delivery {
            deliveries.push(d);
        }
    }
    let avg_aoi = average_aoi_from_deliveries(&deliveries, cfg.slot_duration).ok_or(
        AoiError::NoDeliveries {
            deliveries: deliveries.len(),
            slots,
        },
    )?;
    Ok(SimResult {
        scheme,
        avg_aoi,
        success_count: deliveries.len() as u64,
        deliveries,
        buffered_slot_count,
        slots,
        seed,
        slot_duration: cfg.slot_duration,
    })
}

/// Mean and standard error over independent replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSummary {
    pub mean: f64,
    /// Standard error of the mean; zero for a single replication.
    pub stderr: f64,
    /// Per-replication average AoI, in replication order.
    pub values: Vec<f64>,
    pub success_count: u64,
    pub buffered_slot_count: u64,
    pub slots: u64,
}

impl ReplicationSummary {
    pub fn from_results(results: &[SimResult]) -> Self {
        let values: Vec<f64> = results.iter().map(|r| r.avg_aoi).collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        ReplicationSummary {
            mean,
            stderr,
            values,
            success_count: results.iter().map(|r| r.success_count).sum(),
            buffered_slot_count: results.iter().map(|r| r.buffered_slot_count).sum(),
            slots: results.iter().map(|r| r.slots).sum(),
        }
    }
}

/// `reps` independent runs with seeds `base_seed + r`, executed in parallel.
pub fn run_replications(
    cfg: &SystemConfig,
    scheme: Scheme,
    slots: u64,
    base_seed: u64,
    reps: usize,
) -> Result<ReplicationSummary> {
    if reps == 0 {
        return Err(AoiError::OutOfRange("reps must be at least 1".into()));
    }
    let results = (0..reps as u64)
        .into_par_iter()
        .map(|r| run_simulation(cfg, scheme, slots, base_seed.wrapping_add(r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicationSummary::from_results(&results))
}

/// Empirical frequency of the number of buffered nodes at slot start, with retransmission.
pub fn empirical_state_occupancy(cfg: &SystemConfig, slots: u64, seed: u64) -> Result<Vec<f64>> {
    let counts = empirical_transition_counts(cfg, slots, seed)?;
    let mut freq = vec![0.0; cfg.sources + 1];
    for (b, row) in counts.iter().enumerate() {
        freq[b] = row.iter().sum::<u64>() as f64 / slots as f64;
    }
    Ok(freq)
}

/// `counts[b][a]`: slots starting with `b` buffered nodes followed by a slot starting with `a`,
/// with retransmission. Row sums count slots by their starting state.
pub fn empirical_transition_counts(
    cfg: &SystemConfig,
    slots: u64,
    seed: u64,
) -> Result<Vec<Vec<u64>>> {
    if slots == 0 {
        return Err(AoiError::OutOfRange("slots must be at least 1".into()));
    }
    let mut sim = Simulator::new(cfg, Scheme::Retransmission, seed)?;
    let m = cfg.sources;
    let mut counts = vec![vec![0u64; m + 1]; m + 1];
    for _ in 0..slots {
        let from = sim.step().buffered;
        counts[from][sim.buffered()] += 1;
    }
    Ok(counts)
}
