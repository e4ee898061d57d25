//! Slot-level simulator of saturated DCF, half duplex and full duplex.
//!
//! Time advances in renewal slots: an idle backoff slot or a busy exchange
//! (success or collision). Every node holds a backoff counter drawn
//! uniformly from `[0, CW)`. A node whose counter is zero transmits; every
//! other node decrements its counter by one at the end of the slot. During
//! a busy exchange the counter is held and the decrement happens at the DIFS
//! boundary that closes it. A failed attempt doubles CW up to `cw_max`, a
//! successful one resets it to `cw_min`.
//!
//! Slot outcomes:
//!
//! * Half duplex. One initiator: success. A STA sends to the AP, the AP to a
//!   STA picked uniformly; the receiver acknowledges, everybody else
//!   overhears. Two or more initiators collide; the channel is busy for the
//!   longest frame.
//! * Full duplex. Exactly one STA initiating: full-duplex exchange with the
//!   AP, whether or not the AP's own counter expired (the AP points its
//!   downlink at that STA). The AP alone: it picks a STA uniformly, which
//!   answers in full duplex. Two or more STAs: collision, and the AP, which
//!   is on air whenever the channel is busy, collides with them.
//!
//! Time is kept in integer picoseconds so per-node activity times add up to
//! the elapsed time exactly. The generator is ChaCha8 seeded with
//! `seed_from_u64(seed)`.

mod replicate;
mod report;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::airtime::slot_durations;
use crate::energy::{label, Role};
use crate::error::{Error, Result};
use crate::model::{DuplexMode, Model};

pub use replicate::{replicate, Replicates, SimScalars};
pub use report::{
    activity_components, activity_power, energy_from_times, Activity, ActivityTimes, NodeReport, SimReport,
};

pub const MIN_HORIZON_SLOTS: u64 = 10_000;
pub const DEFAULT_WARMUP_SLOTS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    /// Renewal slots measured after warmup.
    pub horizon_slots: u64,
    pub seed: u64,
    /// Renewal slots simulated and discarded before measuring.
    pub warmup_slots: u64,
}

impl SimConfig {
    pub fn new(horizon_slots: u64, seed: u64) -> Self {
        Self {
            horizon_slots,
            seed,
            warmup_slots: DEFAULT_WARMUP_SLOTS,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn check(&self) -> Result<()> {
        if self.horizon_slots < MIN_HORIZON_SLOTS {
            return Err(Error::InvalidSimConfig(format!(
                "horizon_slots {} below {MIN_HORIZON_SLOTS}",
                self.horizon_slots
            )));
        }
        if self.warmup_slots >= self.horizon_slots {
            return Err(Error::InvalidSimConfig(format!(
                "warmup_slots {} not below horizon_slots {}",
                self.warmup_slots, self.horizon_slots
            )));
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::new(1_000_000, 42)
    }
}

fn to_ps(us: f64) -> u64 {
    (us * 1e6).round() as u64
}

/// Durations of one exchange, in picoseconds.
#[derive(Debug, Clone, Copy)]
struct Clock {
    slot: u64,
    sifs: u64,
    ack: u64,
    difs: u64,
    dl: u64,
    ul: u64,
}

/// What a node does during one busy exchange.
#[derive(Debug, Clone, Copy)]
struct Part {
    tx: u64,
    rx: u64,
    ack: Activity,
    state: usize,
}

#[derive(Debug, Clone)]
struct Node {
    counter: u32,
    stage: u32,
    times: ActivityTimes,
    states: Vec<u64>,
    tx_bits: u64,
    rx_bits: u64,
    attempts: u64,
    successes: u64,
    collisions: u64,
}

// State indices into the ledger label lists.
const HD_IDLE: usize = 0;
const HD_S_TX: usize = 1;
const HD_S_RX: usize = 2;
const HD_S_OVER: usize = 3;
const HD_C_TX: usize = 4;
const HD_C_OVER: usize = 5;

const AP_IDLE: usize = 0;
const AP_S: usize = 1;
const AP_C: usize = 2;

const STA_IDLE: usize = 0;
const STA_S: usize = 1;
const STA_S_OVER: usize = 2;
const STA_C: usize = 3;
const STA_C_OVER: usize = 4;

struct Engine {
    mode: DuplexMode,
    cw_min: u32,
    max_stage: u32,
    clock: Clock,
    dl_bits: u64,
    ul_bits: u64,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    parts: Vec<Part>,
    initiators: Vec<usize>,
}

impl Engine {
    fn labels(&self, index: usize) -> &'static [&'static str] {
        match (self.mode, index) {
            (DuplexMode::HalfDuplex, _) => &label::HD,
            (DuplexMode::InBandFullDuplex, 0) => &label::IBFD_AP,
            (DuplexMode::InBandFullDuplex, _) => &label::IBFD_STA,
        }
    }

    fn draw(&mut self, stage: u32) -> u32 {
        self.rng.random_range(0..self.cw_min << stage)
    }

    fn idle_state(&self, index: usize) -> usize {
        match (self.mode, index) {
            (DuplexMode::HalfDuplex, _) => HD_IDLE,
            (DuplexMode::InBandFullDuplex, 0) => AP_IDLE,
            _ => STA_IDLE,
        }
    }

    fn idle_slots(&mut self, count: u64, measure: bool) {
        if measure {
            let ps = self.clock.slot * count;
            for i in 0..self.nodes.len() {
                let s = self.idle_state(i);
                let node = &mut self.nodes[i];
                node.times.add(Activity::Idle, ps);
                node.states[s] += count;
            }
        }
        for node in &mut self.nodes {
            node.counter -= count as u32;
        }
    }

    /// Resolves one busy slot and returns its length in picoseconds.
    /// Backoff always advances; activity, delivery and attempt counters only
    /// when `measure` is set.
    fn busy_slot(&mut self, measure: bool) -> u64 {
        let n = self.nodes.len();
        self.initiators.clear();
        self.initiators.extend(
            self.nodes
                .iter()
                .enumerate()
                .filter(|(_, nd)| nd.counter == 0)
                .map(|(i, _)| i),
        );

        let busy = match self.mode {
            DuplexMode::HalfDuplex => self.resolve_hd(measure),
            DuplexMode::InBandFullDuplex => self.resolve_ibfd(measure),
        };
        let Clock { sifs, ack, difs, .. } = self.clock;

        if measure {
            for (node, part) in self.nodes.iter_mut().zip(&self.parts) {
                let both = part.tx.min(part.rx);
                let t = &mut node.times;
                t.add(Activity::TxRx, both);
                t.add(Activity::Tx, part.tx - both);
                t.add(Activity::Rx, part.rx - both);
                t.add(Activity::Idle, busy - part.tx.max(part.rx) + sifs + difs);
                t.add(part.ack, ack);
                node.states[part.state] += 1;
            }
        }

        for i in 0..n {
            if self.nodes[i].counter == 0 {
                let stage = self.nodes[i].stage;
                self.nodes[i].counter = self.draw(stage);
            } else {
                self.nodes[i].counter -= 1;
            }
        }
        busy + sifs + ack + difs
    }

    fn outcome(&mut self, index: usize, success: bool, measure: bool) {
        let max_stage = self.max_stage;
        let node = &mut self.nodes[index];
        if measure {
            node.attempts += 1;
            if success {
                node.successes += 1;
            } else {
                node.collisions += 1;
            }
        }
        node.stage = if success { 0 } else { (node.stage + 1).min(max_stage) };
    }

    fn resolve_hd(&mut self, measure: bool) -> u64 {
        let n = self.nodes.len();
        let Clock { dl, ul, .. } = self.clock;
        let len = |i: usize| if i == 0 { dl } else { ul };
        self.parts.clear();
        if let [sender] = self.initiators[..] {
            let receiver = if sender == 0 { self.rng.random_range(1..n) } else { 0 };
            let data = len(sender);
            for i in 0..n {
                self.parts.push(if i == sender {
                    Part {
                        tx: data,
                        rx: 0,
                        ack: Activity::Rx,
                        state: HD_S_TX,
                    }
                } else if i == receiver {
                    Part {
                        tx: 0,
                        rx: data,
                        ack: Activity::Tx,
                        state: HD_S_RX,
                    }
                } else {
                    Part {
                        tx: 0,
                        rx: data,
                        ack: Activity::Rx,
                        state: HD_S_OVER,
                    }
                });
            }
            if measure {
                let bits = if sender == 0 { self.dl_bits } else { self.ul_bits };
                self.nodes[sender].tx_bits += bits;
                self.nodes[receiver].rx_bits += bits;
            }
            self.outcome(sender, true, measure);
            data
        } else {
            let data = self.initiators.iter().map(|&i| len(i)).max().unwrap_or(0);
            for i in 0..n {
                let sending = self.nodes[i].counter == 0;
                self.parts.push(if sending {
                    Part {
                        tx: len(i),
                        rx: 0,
                        ack: Activity::Idle,
                        state: HD_C_TX,
                    }
                } else {
                    Part {
                        tx: 0,
                        rx: data,
                        ack: Activity::Idle,
                        state: HD_C_OVER,
                    }
                });
            }
            for k in 0..self.initiators.len() {
                let i = self.initiators[k];
                self.outcome(i, false, measure);
            }
            data
        }
    }

    fn resolve_ibfd(&mut self, measure: bool) -> u64 {
        let n = self.nodes.len();
        let Clock { dl, ul, .. } = self.clock;
        let ap_ready = self.nodes[0].counter == 0;
        let sta_count = self.initiators.len() - usize::from(ap_ready);
        self.parts.clear();

        if sta_count <= 1 {
            let peer = if sta_count == 1 {
                *self.initiators.last().expect("one STA initiator")
            } else {
                self.rng.random_range(1..n)
            };
            self.parts.push(Part {
                tx: dl,
                rx: ul,
                ack: Activity::TxRx,
                state: AP_S,
            });
            for i in 1..n {
                self.parts.push(if i == peer {
                    Part {
                        tx: ul,
                        rx: dl,
                        ack: Activity::TxRx,
                        state: STA_S,
                    }
                } else {
                    Part {
                        tx: 0,
                        rx: dl,
                        ack: Activity::Rx,
                        state: STA_S_OVER,
                    }
                });
            }
            if measure {
                self.nodes[0].tx_bits += self.dl_bits;
                self.nodes[0].rx_bits += self.ul_bits;
                self.nodes[peer].tx_bits += self.ul_bits;
                self.nodes[peer].rx_bits += self.dl_bits;
            }
            if ap_ready {
                self.outcome(0, true, measure);
            }
            if sta_count == 1 {
                self.outcome(peer, true, measure);
            }
        } else {
            self.parts.push(Part {
                tx: dl,
                rx: ul,
                ack: Activity::Idle,
                state: AP_C,
            });
            for i in 1..n {
                self.parts.push(if self.nodes[i].counter == 0 {
                    Part {
                        tx: ul,
                        rx: dl,
                        ack: Activity::Idle,
                        state: STA_C,
                    }
                } else {
                    Part {
                        tx: 0,
                        rx: dl,
                        ack: Activity::Idle,
                        state: STA_C_OVER,
                    }
                });
            }
            for k in 0..self.initiators.len() {
                let i = self.initiators[k];
                self.outcome(i, false, measure);
            }
        }
        dl.max(ul)
    }
}

/// Runs one simulation. The first node is the AP.
pub fn simulate(model: &Model, mode: DuplexMode, sim: &SimConfig) -> Result<SimReport> {
    sim.check()?;
    let config = model.config();
    let traffic = model.traffic();
    let d = slot_durations(mode, config, traffic);
    let clock = Clock {
        slot: to_ps(config.slot_us),
        sifs: to_ps(config.sifs_us),
        ack: to_ps(d.t_ack_us),
        difs: to_ps(config.difs_us),
        dl: to_ps(d.t_data_dl_us),
        ul: to_ps(d.t_data_ul_us),
    };
    let n = config.n_nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let nodes = (0..n)
        .map(|i| {
            let states = match (mode, i) {
                (DuplexMode::HalfDuplex, _) => label::HD.len(),
                (DuplexMode::InBandFullDuplex, 0) => label::IBFD_AP.len(),
                _ => label::IBFD_STA.len(),
            };
            Node {
                counter: rng.random_range(0..config.cw_min),
                stage: 0,
                times: ActivityTimes::default(),
                states: vec![0; states],
                tx_bits: 0,
                rx_bits: 0,
                attempts: 0,
                successes: 0,
                collisions: 0,
            }
        })
        .collect();
    let mut engine = Engine {
        mode,
        cw_min: config.cw_min,
        max_stage: config.backoff_stages(),
        clock,
        dl_bits: 8 * u64::from(traffic.downlink_bytes),
        ul_bits: 8 * u64::from(traffic.uplink_bytes()),
        nodes,
        rng,
        parts: Vec::with_capacity(n),
        initiators: Vec::with_capacity(n),
    };

    let warmup = sim.warmup_slots;
    let total = warmup + sim.horizon_slots;
    let mut slot = 0u64;
    let mut elapsed_ps = 0u64;
    while slot < total {
        let wait = engine
            .nodes
            .iter()
            .map(|nd| nd.counter)
            .min()
            .expect("at least two nodes");
        if wait > 0 {
            let run = u64::from(wait).min(total - slot);
            let unmeasured = warmup.saturating_sub(slot).min(run);
            if unmeasured > 0 {
                engine.idle_slots(unmeasured, false);
            }
            let measured = run - unmeasured;
            if measured > 0 {
                engine.idle_slots(measured, true);
                elapsed_ps += measured * clock.slot;
            }
            slot += run;
            continue;
        }
        let measure = slot >= warmup;
        let busy_ps = engine.busy_slot(measure);
        if measure {
            elapsed_ps += busy_ps;
        }
        slot += 1;
    }

    Ok(engine.report(model, mode, sim, elapsed_ps))
}

impl Engine {
    fn report(self, model: &Model, mode: DuplexMode, sim: &SimConfig, elapsed_ps: u64) -> SimReport {
        let profile = model.profile();
        let n = self.nodes.len();
        let nodes: Vec<NodeReport> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, nd)| {
                let role = if i == 0 { Role::Ap } else { Role::Sta };
                NodeReport {
                    role,
                    times: nd.times,
                    state_counts: self.labels(i).iter().copied().zip(nd.states.iter().copied()).collect(),
                    energy_uj: energy_from_times(profile, mode, role, &nd.times),
                    tx_bits: nd.tx_bits,
                    rx_bits: nd.rx_bits,
                    attempts: nd.attempts,
                    successes: nd.successes,
                    collisions: nd.collisions,
                }
            })
            .collect();
        let elapsed_us = elapsed_ps as f64 * 1e-6;
        let delivered: u64 = nodes.iter().map(|nd| nd.tx_bits).sum();
        let throughput_mbps = delivered as f64 / elapsed_us;
        let network_power_w = nodes.iter().map(|nd| nd.energy_uj).sum::<f64>() / elapsed_us;
        SimReport {
            mode,
            n_nodes: n,
            symmetry: model.traffic().symmetry,
            seed: sim.seed,
            slots: sim.horizon_slots,
            elapsed_ps,
            nodes,
            throughput_mbps,
            network_power_w,
            efficiency_mbpj: throughput_mbps / network_power_w,
        }
    }
}
