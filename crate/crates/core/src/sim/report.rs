use std::collections::BTreeMap;

use serde::Serialize;

use crate::energy::Role;
use crate::model::{Component, DuplexMode, PowerProfile};

/// Radio activity of one node at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Activity {
    Idle,
    Tx,
    Rx,
    /// Transmitting and receiving at once (full duplex only).
    TxRx,
}

impl Activity {
    pub const ALL: [Activity; 4] = [Activity::Idle, Activity::Tx, Activity::Rx, Activity::TxRx];

    pub fn name(self) -> &'static str {
        match self {
            Activity::Idle => "idle",
            Activity::Tx => "tx",
            Activity::Rx => "rx",
            Activity::TxRx => "txrx",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Components drawing power during `activity` for a node of `role`.
pub fn activity_components(mode: DuplexMode, role: Role, activity: Activity) -> Vec<Component> {
    use Component::*;
    let (tx, rx): (&[Component], &[Component]) = match (mode, role) {
        (DuplexMode::HalfDuplex, _) => (&[Tx, Ctrl], &[Rx, Ctrl]),
        (DuplexMode::InBandFullDuplex, Role::Ap) => (&[Tx, Ctrl], &[Rx, Sic]),
        (DuplexMode::InBandFullDuplex, _) => (&[Tx, Sic], &[Rx, Ctrl]),
    };
    match activity {
        Activity::Idle => vec![Idle],
        Activity::Tx => tx.to_vec(),
        Activity::Rx => rx.to_vec(),
        Activity::TxRx => tx.iter().chain(rx).copied().collect(),
    }
}

pub fn activity_power(profile: &PowerProfile, mode: DuplexMode, role: Role, activity: Activity) -> f64 {
    profile.composite_power(&activity_components(mode, role, activity))
}

/// Time spent in each activity, in picoseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ActivityTimes {
    pub ps: [u64; 4],
}

impl ActivityTimes {
    pub fn add(&mut self, activity: Activity, ps: u64) {
        self.ps[activity.index()] += ps;
    }

    pub fn get(&self, activity: Activity) -> u64 {
        self.ps[activity.index()]
    }

    pub fn total_ps(&self) -> u64 {
        self.ps.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub role: Role,
    pub times: ActivityTimes,
    /// Renewal slots spent in each ledger state, in ledger order.
    pub state_counts: Vec<(&'static str, u64)>,
    pub energy_uj: f64,
    pub tx_bits: u64,
    pub rx_bits: u64,
    pub attempts: u64,
    pub successes: u64,
    pub collisions: u64,
}

impl NodeReport {
    /// Time in each activity, µs.
    pub fn time_in_state_us(&self) -> BTreeMap<&'static str, f64> {
        Activity::ALL
            .iter()
            .map(|a| (a.name(), self.times.get(*a) as f64 * 1e-6))
            .collect()
    }

    pub fn state_count(&self, label: &str) -> Option<u64> {
        self.state_counts.iter().find(|(l, _)| *l == label).map(|(_, c)| *c)
    }
}

/// Energy of a node from its activity times.
pub fn energy_from_times(profile: &PowerProfile, mode: DuplexMode, role: Role, times: &ActivityTimes) -> f64 {
    Activity::ALL
        .iter()
        .map(|a| activity_power(profile, mode, role, *a) * (times.get(*a) as f64 * 1e-6))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub mode: DuplexMode,
    pub n_nodes: usize,
    pub symmetry: f64,
    pub seed: u64,
    /// Renewal slots measured (after warmup).
    pub slots: u64,
    pub elapsed_ps: u64,
    /// Node 0 is the AP.
    pub nodes: Vec<NodeReport>,
    pub throughput_mbps: f64,
    pub network_power_w: f64,
    pub efficiency_mbpj: f64,
}

impl SimReport {
    pub fn elapsed_us(&self) -> f64 {
        self.elapsed_ps as f64 * 1e-6
    }

    pub fn node_power_w(&self, index: usize) -> f64 {
        self.nodes[index].energy_uj / self.elapsed_us()
    }

    pub fn ap_power_w(&self) -> f64 {
        self.node_power_w(0)
    }

    pub fn mean_sta_power_w(&self) -> f64 {
        let stas = &self.nodes[1..];
        stas.iter().map(|n| n.energy_uj).sum::<f64>() / stas.len() as f64 / self.elapsed_us()
    }

    pub fn mean_node_power_w(&self) -> f64 {
        self.network_power_w / self.n_nodes as f64
    }

    /// Per-node figure matching the analytic report for `role`.
    pub fn power_for(&self, role: Role) -> f64 {
        match role {
            Role::Ap => self.ap_power_w(),
            Role::Sta => self.mean_sta_power_w(),
            Role::Node => self.mean_node_power_w(),
        }
    }

    /// Fraction of renewal slots in which the node started a transmission.
    pub fn attempt_rate(&self, index: usize) -> f64 {
        self.nodes[index].attempts as f64 / self.slots as f64
    }

    pub fn mean_sta_attempt_rate(&self) -> f64 {
        let stas = &self.nodes[1..];
        stas.iter().map(|n| n.attempts).sum::<u64>() as f64 / (stas.len() as f64 * self.slots as f64)
    }

    /// Fraction of renewal slots each STA spent in each ledger state,
    /// averaged over STAs.
    pub fn sta_state_frequencies(&self) -> Vec<(&'static str, f64)> {
        self.state_frequencies(1..self.n_nodes)
    }

    pub fn ap_state_frequencies(&self) -> Vec<(&'static str, f64)> {
        self.state_frequencies(0..1)
    }

    /// Frequencies averaged over every node.
    pub fn node_state_frequencies(&self) -> Vec<(&'static str, f64)> {
        self.state_frequencies(0..self.n_nodes)
    }

    fn state_frequencies(&self, range: std::ops::Range<usize>) -> Vec<(&'static str, f64)> {
        let count = range.len() as f64;
        let nodes = &self.nodes[range];
        nodes[0]
            .state_counts
            .iter()
            .enumerate()
            .map(|(i, (label, _))| {
                let total: u64 = nodes.iter().map(|n| n.state_counts[i].1).sum();
                (*label, total as f64 / (count * self.slots as f64))
            })
            .collect()
    }
}
