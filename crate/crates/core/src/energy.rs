//! Per-state energy accounting, average power and energy efficiency.
//!
//! A node's channel life is cut into renewal slots: an idle backoff slot, a
//! successful exchange or a collision. Each role gets a ledger of the states
//! it can be in during one slot, with the energy spent in that state and the
//! probability of the state. Average power is expected energy per slot over
//! expected slot duration.
//!
//! Energies are in µJ, durations in µs, powers in W (µJ/µs), throughput in
//! Mb/s (bits/µs) and efficiency in Mb/J.

use serde::Serialize;

use crate::airtime::{slot_durations, SlotDurations};
use crate::dcf::{self, DcfSolution};
use crate::error::Result;
use crate::model::{Component, DuplexMode, Model};

pub mod label {
    pub const IDLE: &str = "d";
    pub const S_TX: &str = "S-TX";
    pub const S_RX: &str = "S-RX";
    pub const S_OVERHEAR: &str = "S-R\u{304}X";
    pub const C_TX: &str = "C-TX";
    pub const C_OVERHEAR: &str = "C-R\u{304}X";

    pub const AP_IDLE: &str = "AP-d";
    pub const AP_S_TXRX: &str = "AP-S-TXRX";
    pub const AP_C_TXRX: &str = "AP-C-TXRX";

    pub const STA_IDLE: &str = "STA-d";
    pub const STA_S_TXRX: &str = "STA-S-TXRX";
    pub const STA_S_OVERHEAR: &str = "STA-S-R\u{304}X";
    pub const STA_C_TXRX: &str = "STA-C-TXRX";
    pub const STA_C_OVERHEAR: &str = "STA-C-R\u{304}X";

    pub const HD: [&str; 6] = [IDLE, S_TX, S_RX, S_OVERHEAR, C_TX, C_OVERHEAR];
    pub const IBFD_AP: [&str; 3] = [AP_IDLE, AP_S_TXRX, AP_C_TXRX];
    pub const IBFD_STA: [&str; 5] = [STA_IDLE, STA_S_TXRX, STA_S_OVERHEAR, STA_C_TXRX, STA_C_OVERHEAR];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Role {
    Ap,
    Sta,
    /// Network mean over all nodes; the half-duplex per-node figure.
    Node,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Ap => "AP",
            Role::Sta => "STA",
            Role::Node => "node",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "AP" => Some(Role::Ap),
            "STA" => Some(Role::Sta),
            "node" => Some(Role::Node),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub label: &'static str,
    pub energy_uj: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateLedger {
    pub entries: Vec<LedgerEntry>,
}

impl StateLedger {
    pub fn probability_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn get(&self, label: &str) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// Expected energy per renewal slot, µJ.
pub fn expected_energy(ledger: &StateLedger) -> f64 {
    ledger.entries.iter().map(|e| e.energy_uj * e.probability).sum()
}

/// Average power in W.
pub fn node_power(ledger: &StateLedger, expected_slot_us: f64) -> f64 {
    expected_energy(ledger) / expected_slot_us
}

struct Powers {
    idle: f64,
    tx_ctrl: f64,
    rx_ctrl: f64,
    tx_sic: f64,
    rx_sic: f64,
}

impl Powers {
    fn of(model: &Model) -> Self {
        use Component::*;
        let p = model.profile();
        Self {
            idle: p.composite_power(&[Idle]),
            tx_ctrl: p.composite_power(&[Tx, Ctrl]),
            rx_ctrl: p.composite_power(&[Rx, Ctrl]),
            tx_sic: p.composite_power(&[Tx, Sic]),
            rx_sic: p.composite_power(&[Rx, Sic]),
        }
    }
}

fn entry(label: &'static str, energy_uj: f64, probability: f64) -> LedgerEntry {
    LedgerEntry {
        label,
        energy_uj,
        probability,
    }
}

/// Six-state half-duplex ledger for the AP (`Role::Ap`) or a STA
/// (`Role::Sta`).
///
/// State probabilities are the symmetric ones, identical for every node.
/// The AP transmits the downlink payload, a STA the uplink payload. Received
/// and overheard frames take the mean duration over which peer is
/// transmitting. A STA whose frame collides with the AP's longer frame idles
/// until the channel clears, and a node overhearing a collision listens for
/// the longest colliding frame; both are conditional expectations given the
/// state. When every payload has the same length (symmetry 1) these reduce
/// to the plain per-frame durations.
///
/// The ledger energies summed over all nodes reproduce the network's
/// expected energy per slot exactly; the split between the AP and a STA
/// differs from the infrastructure topology (where only the AP acknowledges
/// uplink frames) by ACK energy, which is why half-duplex power is reported
/// as the network mean.
pub fn hd_state_ledger(role: Role, model: &Model, sol: &DcfSolution) -> StateLedger {
    let config = model.config();
    let n = config.n_nodes;
    let ni = n as i32;
    let nf = n as f64;
    let w = Powers::of(model);
    let d = slot_durations(DuplexMode::HalfDuplex, config, model.traffic());
    let (dl, ul) = (d.t_data_dl_us, d.t_data_ul_us);

    let tau = sol.tau_sta;
    let p = sol.p_sta;
    let q = 1.0 - tau;

    // Mean length of a frame sent by one of the other nodes.
    let (data_tx, data_rx) = match role {
        Role::Ap => (dl, ul),
        _ => (ul, (dl + (nf - 2.0) * ul) / (nf - 1.0)),
    };
    // Idle wait after own frame ends, averaged over collisions with the AP.
    let collide_wait = match role {
        Role::Ap => 0.0,
        _ => {
            let others_busy = 1.0 - q.powi(ni - 1);
            if others_busy > 0.0 {
                (dl - ul) * tau / others_busy
            } else {
                0.0
            }
        }
    };
    // Busy period of a collision this node only hears.
    let collision_heard = match role {
        Role::Ap => ul,
        _ => {
            let multi = 1.0 - q.powi(ni - 1) - (nf - 1.0) * tau * q.powi(ni - 2);
            let with_ap = tau * (1.0 - q.powi(ni - 2));
            if multi > 0.0 {
                ul + (dl - ul) * (with_ap / multi).min(1.0)
            } else {
                ul
            }
        }
    };

    let gap = config.difs_us + config.sifs_us;
    let ack = d.t_ack_us;
    let e_idle = w.idle * config.slot_us;
    let e_stx = w.tx_ctrl * data_tx + w.idle * gap + w.rx_ctrl * ack;
    let e_srx = w.rx_ctrl * data_rx + w.idle * gap + w.tx_ctrl * ack;
    let e_sover = w.rx_ctrl * (data_rx + ack) + w.idle * gap;
    let e_ctx = w.tx_ctrl * data_tx + w.idle * (gap + ack) + w.idle * collide_wait;
    let e_cover = w.rx_ctrl * collision_heard + w.idle * (gap + ack);

    let pr_idle = q.powi(ni);
    let pr_stx = tau * (1.0 - p);
    let pr_srx = tau * q.powi(ni - 1);
    let pr_sover = (nf - 2.0) * tau * q.powi(ni - 1);
    let pr_ctx = tau * p;
    let pr_cover = q * (1.0 - q.powi(ni - 1) - (nf - 1.0) * tau * q.powi(ni - 2));

    StateLedger {
        entries: vec![
            entry(label::IDLE, e_idle, pr_idle),
            entry(label::S_TX, e_stx, pr_stx),
            entry(label::S_RX, e_srx, pr_srx),
            entry(label::S_OVERHEAR, e_sover, pr_sover),
            entry(label::C_TX, e_ctx, pr_ctx),
            entry(label::C_OVERHEAR, e_cover, pr_cover.max(0.0)),
        ],
    }
}

/// Three-state full-duplex AP ledger. The AP transmits at TX+CTRL and
/// receives at RX+SIC; it is on air in every busy slot.
pub fn ibfd_ap_ledger(model: &Model, sol: &DcfSolution) -> StateLedger {
    let config = model.config();
    let ni = config.n_nodes as i32;
    let w = Powers::of(model);
    let d = slot_durations(DuplexMode::InBandFullDuplex, config, model.traffic());
    let (data_tx, data_rx, ack) = (d.t_data_dl_us, d.t_data_ul_us, d.t_ack_us);
    let gap = config.difs_us + config.sifs_us;

    let e_idle = w.idle * config.slot_us;
    let e_s = w.tx_ctrl * (data_tx + ack) + w.rx_sic * (data_rx + ack) + w.idle * gap;
    let e_c = w.tx_ctrl * data_tx + w.rx_sic * data_rx + w.idle * (gap + ack);

    let q = 1.0 - sol.tau_sta;
    let pr_idle = (1.0 - sol.tau_ap) * q.powi(ni - 1);
    let pr_s = dcf::ibfd_success_prob(sol.tau_ap, sol.tau_sta, config.n_nodes);
    let pr_c = 1.0 - pr_idle - pr_s;

    StateLedger {
        entries: vec![
            entry(label::AP_IDLE, e_idle, pr_idle),
            entry(label::AP_S_TXRX, e_s, pr_s),
            entry(label::AP_C_TXRX, e_c, pr_c),
        ],
    }
}

/// Five-state full-duplex STA ledger. A STA transmits at TX+SIC and receives
/// at RX+CTRL, the dual of the AP.
pub fn ibfd_sta_ledger(model: &Model, sol: &DcfSolution) -> StateLedger {
    let config = model.config();
    let ni = config.n_nodes as i32;
    let nf = config.n_nodes as f64;
    let w = Powers::of(model);
    let d = slot_durations(DuplexMode::InBandFullDuplex, config, model.traffic());
    let (data_tx, data_rx, ack) = (d.t_data_ul_us, d.t_data_dl_us, d.t_ack_us);
    let gap = config.difs_us + config.sifs_us;

    let e_idle = w.idle * config.slot_us;
    let e_s = w.tx_sic * (data_tx + ack) + w.rx_ctrl * (data_rx + ack) + w.idle * gap;
    let e_sover = w.rx_ctrl * (data_rx + ack) + w.idle * gap;
    let e_c = w.tx_sic * data_tx + w.rx_ctrl * data_rx + w.idle * (gap + ack);
    let e_cover = w.rx_ctrl * data_rx + w.idle * (gap + ack);

    let (tau_ap, tau, p) = (sol.tau_ap, sol.tau_sta, sol.p_sta);
    let q = 1.0 - tau;
    let pr_idle = (1.0 - tau_ap) * q.powi(ni - 1);
    let pr_s = tau * (1.0 - p) + q.powi(ni - 1) * tau_ap / (nf - 1.0);
    let pr_sover = (nf - 2.0) * tau * q.powi(ni - 2) * (1.0 - tau_ap)
        + (nf - 2.0) / (nf - 1.0) * tau_ap * (tau * q.powi(ni - 2) + q.powi(ni - 1));
    let pr_c = tau * p;
    let pr_cover = 1.0 - pr_idle - pr_s - pr_sover - pr_c;

    StateLedger {
        entries: vec![
            entry(label::STA_IDLE, e_idle, pr_idle),
            entry(label::STA_S_TXRX, e_s, pr_s),
            entry(label::STA_S_OVERHEAR, e_sover, pr_sover),
            entry(label::STA_C_TXRX, e_c, pr_c),
            entry(label::STA_C_OVERHEAR, e_cover, pr_cover),
        ],
    }
}

/// Expected renewal-slot duration, split by slot type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedSlot {
    /// Mean successful exchange, T_s.
    pub t_success_us: f64,
    /// Mean collision, T_c.
    pub t_collision_us: f64,
    pub total_us: f64,
}

/// `(1 - P_tr) σ + P_tr P_s T_s + P_tr (1 - P_s) T_c`.
///
/// In half duplex, T_s and T_c are means over who transmits: a success is
/// the AP's with probability 1/n, and a collision lasts the downlink frame
/// whenever the AP is among the colliders.
pub fn expected_slot(model: &Model, sol: &DcfSolution) -> ExpectedSlot {
    let config = model.config();
    let d = slot_durations(sol.mode, config, model.traffic());
    let (p_tr, p_s) = (sol.p_tr, sol.p_s);
    let (t_success_us, t_collision_us) = match sol.mode {
        DuplexMode::InBandFullDuplex => (d.t_success_us, d.t_collision_us),
        DuplexMode::HalfDuplex => hd_mean_exchanges(config.n_nodes, sol.tau_sta, &d),
    };
    let total_us = (1.0 - p_tr) * config.slot_us + p_tr * p_s * t_success_us + p_tr * (1.0 - p_s) * t_collision_us;
    ExpectedSlot {
        t_success_us,
        t_collision_us,
        total_us,
    }
}

fn hd_mean_exchanges(n: usize, tau: f64, d: &SlotDurations) -> (f64, f64) {
    let nf = n as f64;
    let ni = n as i32;
    let q = 1.0 - tau;
    let t_s = (d.downlink_exchange_us() + (nf - 1.0) * d.uplink_exchange_us()) / nf;
    let with_ap = tau * (1.0 - q.powi(ni - 1));
    let stas_only = q * (1.0 - q.powi(ni - 1) - (nf - 1.0) * tau * q.powi(ni - 2));
    let total = with_ap + stas_only;
    let t_c = if total > 0.0 {
        (with_ap * d.downlink_exchange_us() + stas_only.max(0.0) * d.uplink_exchange_us()) / total
    } else {
        d.downlink_exchange_us()
    };
    (t_s, t_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeMetrics {
    pub mode: DuplexMode,
    pub role: Role,
    pub expected_energy_uj: f64,
    pub expected_slot_us: f64,
    pub power_w: f64,
    /// Payload this node delivers, Mb/s.
    pub throughput_share_mbps: f64,
    pub node_efficiency_mbpj: f64,
    pub network_throughput_mbps: f64,
    pub network_power_w: f64,
    pub efficiency_mbpj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkMetrics {
    pub mode: DuplexMode,
    pub n_nodes: usize,
    pub symmetry: f64,
    pub solution: DcfSolution,
    pub slot: ExpectedSlot,
    pub ap_ledger: StateLedger,
    pub sta_ledger: StateLedger,
    /// AP, STA and, in half duplex, the network mean.
    pub nodes: Vec<NodeMetrics>,
    pub throughput_mbps: f64,
    /// AP plus all STAs, W.
    pub network_power_w: f64,
    pub efficiency_mbpj: f64,
}

impl NetworkMetrics {
    pub fn node(&self, role: Role) -> Option<&NodeMetrics> {
        self.nodes.iter().find(|m| m.role == role)
    }

    /// Power of the per-node figure: network mean in half duplex, the given
    /// role in full duplex.
    pub fn reported_power(&self, role: Role) -> Option<f64> {
        self.node(role).map(|m| m.power_w)
    }

    /// Roles emitted in reports: `node` for half duplex, `AP` and `STA` for
    /// full duplex.
    pub fn reported_roles(&self) -> &'static [Role] {
        reported_roles(self.mode)
    }
}

pub fn reported_roles(mode: DuplexMode) -> &'static [Role] {
    match mode {
        DuplexMode::HalfDuplex => &[Role::Node],
        DuplexMode::InBandFullDuplex => &[Role::Ap, Role::Sta],
    }
}

/// Solves the contention model and evaluates power, throughput and
/// efficiency for every role.
pub fn network_metrics(model: &Model, mode: DuplexMode) -> Result<NetworkMetrics> {
    let sol = dcf::solve(mode, model.config())?;
    Ok(network_metrics_with(model, &sol))
}

pub fn network_metrics_with(model: &Model, sol: &DcfSolution) -> NetworkMetrics {
    let config = model.config();
    let traffic = model.traffic();
    let n = config.n_nodes;
    let nf = n as f64;
    let slot = expected_slot(model, sol);
    let dl_bits = 8.0 * f64::from(traffic.downlink_bytes);
    let ul_bits = 8.0 * f64::from(traffic.uplink_bytes());

    let (ap_ledger, sta_ledger) = match sol.mode {
        DuplexMode::HalfDuplex => (
            hd_state_ledger(Role::Ap, model, sol),
            hd_state_ledger(Role::Sta, model, sol),
        ),
        DuplexMode::InBandFullDuplex => (ibfd_ap_ledger(model, sol), ibfd_sta_ledger(model, sol)),
    };

    // Successful slots per renewal slot, by who carries which payload.
    let (ap_bits, sta_bits, throughput_mbps) = match sol.mode {
        DuplexMode::HalfDuplex => {
            let alone = sol.tau_sta * (1.0 - sol.tau_sta).powi(n as i32 - 1);
            let mean_payload = (dl_bits + (nf - 1.0) * ul_bits) / nf;
            let s = sol.p_tr * sol.p_s * mean_payload / slot.total_us;
            (alone * dl_bits, alone * ul_bits, s)
        }
        DuplexMode::InBandFullDuplex => {
            let success = sol.p_tr * sol.p_s;
            let s = success * (dl_bits + ul_bits) / slot.total_us;
            (success * dl_bits, success / (nf - 1.0) * ul_bits, s)
        }
    };

    let ap_energy = expected_energy(&ap_ledger);
    let sta_energy = expected_energy(&sta_ledger);
    let ap_power = ap_energy / slot.total_us;
    let sta_power = sta_energy / slot.total_us;
    let network_power_w = ap_power + (nf - 1.0) * sta_power;
    let efficiency_mbpj = throughput_mbps / network_power_w;

    let make = |role: Role, energy: f64, share: f64| {
        let power_w = energy / slot.total_us;
        NodeMetrics {
            mode: sol.mode,
            role,
            expected_energy_uj: energy,
            expected_slot_us: slot.total_us,
            power_w,
            throughput_share_mbps: share,
            node_efficiency_mbpj: share / power_w,
            network_throughput_mbps: throughput_mbps,
            network_power_w,
            efficiency_mbpj,
        }
    };
    let mut nodes = vec![
        make(Role::Ap, ap_energy, ap_bits / slot.total_us),
        make(Role::Sta, sta_energy, sta_bits / slot.total_us),
    ];
    if sol.mode == DuplexMode::HalfDuplex {
        let mean_energy = (ap_energy + (nf - 1.0) * sta_energy) / nf;
        nodes.push(make(Role::Node, mean_energy, throughput_mbps / nf));
    }

    NetworkMetrics {
        mode: sol.mode,
        n_nodes: n,
        symmetry: traffic.symmetry,
        solution: *sol,
        slot,
        ap_ledger,
        sta_ledger,
        nodes,
        throughput_mbps,
        network_power_w,
        efficiency_mbpj,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airtime::{ack_duration, data_duration};
    use crate::model::{default_model, PowerProfile, WlanConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn synthetic(mode: DuplexMode, n: usize, tau_ap: f64, tau_sta: f64, p_ap: f64, p_sta: f64) -> DcfSolution {
        DcfSolution {
            mode,
            tau_sta,
            p_sta,
            tau_ap,
            p_ap,
            p_tr: 0.0,
            p_s: 0.0,
            residual: 0.0,
            n_nodes: n,
        }
    }

    #[test]
    fn hd_zero_tau_is_all_idle() {
        let m = default_model(10, 1.0).unwrap();
        let sol = synthetic(DuplexMode::HalfDuplex, 10, 0.0, 0.0, 0.0, 0.0);
        let ledger = hd_state_ledger(Role::Sta, &m, &sol);
        assert_eq!(ledger.entries[0].probability, 1.0);
        assert!(ledger.entries[1..].iter().all(|e| e.probability == 0.0));
        assert_abs_diff_eq!(node_power(&ledger, 9.0), 0.9484, epsilon = 1e-12);
    }

    #[test]
    fn idle_energy() {
        let m = default_model(5, 1.0).unwrap();
        let sol = dcf::solve_hd(m.config()).unwrap();
        let ledger = hd_state_ledger(Role::Ap, &m, &sol);
        assert_eq!(ledger.entries[0].label, "d");
        assert_abs_diff_eq!(ledger.entries[0].energy_uj, 8.5356, epsilon = 1e-9);
        let only_idle = StateLedger {
            entries: vec![entry("d", ledger.entries[0].energy_uj, 1.0)],
        };
        assert_abs_diff_eq!(expected_energy(&only_idle), 8.5356, epsilon = 1e-9);
    }

    #[test]
    fn labels_follow_state_names() {
        let m = default_model(5, 1.0).unwrap();
        let hd = dcf::solve_hd(m.config()).unwrap();
        let fd = dcf::solve_ibfd(m.config()).unwrap();
        let names = |l: StateLedger| l.entries.iter().map(|e| e.label).collect::<Vec<_>>();
        assert_eq!(names(hd_state_ledger(Role::Sta, &m, &hd)), label::HD);
        assert_eq!(names(ibfd_ap_ledger(&m, &fd)), label::IBFD_AP);
        assert_eq!(names(ibfd_sta_ledger(&m, &fd)), label::IBFD_STA);
        assert_eq!(label::S_OVERHEAR, "S-R̄X");
    }

    #[test]
    fn degenerate_and_uniform_ledgers() {
        let one = StateLedger {
            entries: vec![entry("a", 5.0, 0.0), entry("b", 7.0, 1.0)],
        };
        assert_eq!(expected_energy(&one), 7.0);
        let uniform = StateLedger {
            entries: vec![entry("a", 5.0, 0.5), entry("b", 7.0, 0.5)],
        };
        assert_eq!(expected_energy(&uniform), 6.0);
    }

    #[test]
    fn ap_full_duplex_success_energy() {
        let m = default_model(10, 1.0).unwrap();
        let sol = dcf::solve_ibfd(m.config()).unwrap();
        let ledger = ibfd_ap_ledger(&m, &sol);
        let c = WlanConfig::default();
        let busy = data_duration(7991, &c) + ack_duration(&c);
        let expect = 2.9883 * busy + 1.655 * busy + 0.9484 * 50.0;
        assert_abs_diff_eq!(ledger.entries[1].energy_uj, expect, epsilon = 1e-9);
        assert_abs_diff_eq!(ledger.entries[1].energy_uj, 1752.5, epsilon = 0.1);
    }

    #[test]
    fn two_node_full_duplex_ap_and_sta_agree() {
        let m = default_model(2, 1.0).unwrap();
        let sol = dcf::solve_ibfd(m.config()).unwrap();
        let ap = ibfd_ap_ledger(&m, &sol);
        let sta = ibfd_sta_ledger(&m, &sol);
        // Same idle, success and collision entries; the STA's overhearing
        // states are empty.
        assert_eq!(sta.entries[2].probability, 0.0);
        assert_eq!(sta.entries[3].probability, 0.0);
        assert_abs_diff_eq!(sta.entries[4].probability, 0.0, epsilon = 1e-15);
        for (a, s) in [(0, 0), (1, 1), (2, 3)] {
            assert_abs_diff_eq!(ap.entries[a].energy_uj, sta.entries[s].energy_uj, epsilon = 1e-9);
            assert_abs_diff_eq!(ap.entries[a].probability, sta.entries[s].probability, epsilon = 1e-15);
        }
        let net = network_metrics(&m, DuplexMode::InBandFullDuplex).unwrap();
        let diff = net.node(Role::Ap).unwrap().power_w - net.node(Role::Sta).unwrap().power_w;
        assert!(diff.abs() <= 1e-9);
    }

    #[test]
    fn sta_success_probability_at_two_nodes() {
        let m = default_model(2, 0.5).unwrap();
        let sol = synthetic(DuplexMode::InBandFullDuplex, 2, 0.3, 0.2, 0.0, 0.0);
        let ledger = ibfd_sta_ledger(&m, &sol);
        assert_abs_diff_eq!(ledger.entries[1].probability, 0.2 + 0.8 * 0.3, epsilon = 1e-15);
    }

    #[test]
    fn sta_overhear_probability_at_five_nodes() {
        let m = default_model(5, 1.0).unwrap();
        let sol = dcf::solve_ibfd(m.config()).unwrap();
        let (ta, t) = (sol.tau_ap, sol.tau_sta);
        // Hand evaluation with the grid-scan golden values.
        let (ta_g, t_g): (f64, f64) = (0.1132977678639898, 0.08396145);
        let expect = 3.0 * t_g * (1.0 - t_g).powi(3) * (1.0 - ta_g)
            + 0.75 * ta_g * (t_g * (1.0 - t_g).powi(3) + (1.0 - t_g).powi(4));
        assert_abs_diff_eq!(ta, ta_g, epsilon = 1e-6);
        assert_abs_diff_eq!(t, t_g, epsilon = 1e-7);
        let got = ibfd_sta_ledger(&m, &sol).entries[2].probability;
        assert_abs_diff_eq!(got, expect, epsilon = 1e-6);
    }

    #[test]
    fn expected_slot_limits() {
        let m = default_model(10, 1.0).unwrap();
        let idle = synthetic(DuplexMode::HalfDuplex, 10, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(expected_slot(&m, &idle).total_us, 9.0);
        let mut busy = synthetic(DuplexMode::InBandFullDuplex, 10, 0.1, 0.1, 0.0, 0.0);
        busy.p_tr = 1.0;
        busy.p_s = 1.0;
        assert_abs_diff_eq!(expected_slot(&m, &busy).total_us, 417.231, epsilon = 1e-3);
    }

    #[test]
    fn hd_expected_slot_golden() {
        let m = default_model(10, 1.0).unwrap();
        let sol = dcf::solve_hd(m.config()).unwrap();
        // ρ = 1: every busy slot lasts one full exchange.
        let (p_tr, t_s) = (
            0.4167102551478238,
            44.0 + 8.0 * 8031.0 / 234.0 + 16.0 + 44.0 + 112.0 / 24.0 + 34.0,
        );
        let expect = (1.0 - p_tr) * 9.0 + p_tr * t_s;
        assert_abs_diff_eq!(expected_slot(&m, &sol).total_us, expect, epsilon = 1e-7);
    }

    #[test]
    fn payload_per_success() {
        let m = default_model(2, 1.0).unwrap();
        let fd = network_metrics(&m, DuplexMode::InBandFullDuplex).unwrap();
        let bits = fd.throughput_mbps * fd.slot.total_us / (fd.solution.p_tr * fd.solution.p_s);
        assert_abs_diff_eq!(bits, 2.0 * 7991.0 * 8.0, epsilon = 1e-6);
        let hd = network_metrics(&m, DuplexMode::HalfDuplex).unwrap();
        let bits = hd.throughput_mbps * hd.slot.total_us / (hd.solution.p_tr * hd.solution.p_s);
        assert_abs_diff_eq!(bits, 7991.0 * 8.0, epsilon = 1e-6);
    }

    #[test]
    fn full_duplex_is_more_efficient_at_ten_nodes() {
        let m = default_model(10, 1.0).unwrap();
        let hd = network_metrics(&m, DuplexMode::HalfDuplex).unwrap();
        let fd = network_metrics(&m, DuplexMode::InBandFullDuplex).unwrap();
        assert!(fd.efficiency_mbpj > hd.efficiency_mbpj);
    }

    #[test]
    fn node_metrics_are_consistent() {
        for mode in DuplexMode::ALL {
            for n in [2, 3, 7, 25] {
                for rho in [0.1, 0.55, 1.0] {
                    let net = network_metrics(&default_model(n, rho).unwrap(), mode).unwrap();
                    for node in &net.nodes {
                        assert_abs_diff_eq!(
                            node.power_w,
                            node.expected_energy_uj / node.expected_slot_us,
                            epsilon = 1e-12
                        );
                        assert!(node.power_w.is_finite() && node.power_w >= 0.0);
                        assert!(node.throughput_share_mbps >= 0.0);
                    }
                    let total = net.node(Role::Ap).unwrap().throughput_share_mbps
                        + (n as f64 - 1.0) * net.node(Role::Sta).unwrap().throughput_share_mbps;
                    assert_abs_diff_eq!(total, net.throughput_mbps, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn hd_plateau() {
        let p20 = network_metrics(&default_model(20, 1.0).unwrap(), DuplexMode::HalfDuplex).unwrap();
        let p30 = network_metrics(&default_model(30, 1.0).unwrap(), DuplexMode::HalfDuplex).unwrap();
        let a = p20.reported_power(Role::Node).unwrap();
        let b = p30.reported_power(Role::Node).unwrap();
        assert!((a - b).abs() / a <= 0.02, "{a} vs {b}");
    }

    #[test]
    fn full_duplex_sta_power_grows_with_symmetry() {
        for n in [2, 5, 10, 20] {
            let mut prev = 0.0;
            for i in 1..=10 {
                let rho = f64::from(i) / 10.0;
                let net = network_metrics(&default_model(n, rho).unwrap(), DuplexMode::InBandFullDuplex).unwrap();
                let p = net.reported_power(Role::Sta).unwrap();
                assert!(p >= prev, "n={n} rho={rho}");
                prev = p;
            }
        }
    }

    // Exact rational check of the six-state identity: with τ = a/b every
    // probability is a ratio of integers over b^n.
    #[test]
    fn hd_probabilities_sum_exactly_at_rational_points() {
        for (a, b, n) in [(1i128, 7i128, 4u32), (3, 10, 6), (2, 9, 2), (5, 11, 9)] {
            let c = b - a;
            let pw = |x: i128, k: u32| x.pow(k);
            let denom = pw(b, n);
            let idle = pw(c, n);
            // τ(1-p) + τp = τ
            let tx = a * pw(b, n - 1);
            let rx = a * pw(c, n - 1);
            let over = (n as i128 - 2) * a * pw(c, n - 1);
            let coll_heard = c * (pw(b, n - 1) - pw(c, n - 1) - (n as i128 - 1) * a * pw(c, n - 2));
            assert_eq!(idle + tx + rx + over + coll_heard, denom);
        }
    }

    proptest! {
        #[test]
        fn ledgers_sum_to_one(tau in 0.0f64..1.0, tau_ap in 0.0f64..1.0, tau_sta in 0.0f64..1.0, p in 0.0f64..1.0, n in 2usize..60) {
            let m = default_model(n, 1.0).unwrap();
            let hd = synthetic(DuplexMode::HalfDuplex, n, tau, tau, p, p);
            for role in [Role::Ap, Role::Sta] {
                let l = hd_state_ledger(role, &m, &hd);
                prop_assert!((l.probability_sum() - 1.0).abs() <= 1e-12);
            }
            let fd = synthetic(DuplexMode::InBandFullDuplex, n, tau_ap, tau_sta, p, p);
            prop_assert!((ibfd_ap_ledger(&m, &fd).probability_sum() - 1.0).abs() <= 1e-12);
            prop_assert!((ibfd_sta_ledger(&m, &fd).probability_sum() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn power_is_bounded(n in 2usize..60, rho in 0.01f64..=1.0, full in any::<bool>()) {
            let mode = if full { DuplexMode::InBandFullDuplex } else { DuplexMode::HalfDuplex };
            let net = network_metrics(&default_model(n, rho).unwrap(), mode).unwrap();
            let p = PowerProfile::default();
            for node in &net.nodes {
                prop_assert!(node.power_w >= p.idle_w - 1e-12);
                prop_assert!(node.power_w <= p.max_composite());
                prop_assert!(node.expected_energy_uj > 0.0);
            }
            for l in [&net.ap_ledger, &net.sta_ledger] {
                prop_assert!(l.entries.iter().all(|e| e.energy_uj > 0.0 && (0.0..=1.0).contains(&e.probability)));
            }
        }
    }
}
