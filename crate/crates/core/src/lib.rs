//! Power consumption and energy efficiency of saturated 802.11 DCF WLANs,
//! half duplex and in-band full duplex.
//!
//! The closed-form side lives in [`dcf`] (contention fixed points),
//! [`airtime`] and [`energy`]; [`sim`] is an independent slot-level MAC
//! simulator used to check it; [`sweep`] runs both over grids of node
//! counts and symmetry ratios and compares the results.

pub mod airtime;
pub mod dcf;
pub mod energy;
pub mod error;
pub mod model;
pub mod sim;
pub mod sweep;

pub use airtime::{ack_duration, data_duration, slot_durations, SlotDurations};
pub use dcf::{backoff_tau, channel_probs, solve_hd, solve_ibfd, DcfSolution};
pub use energy::{
    expected_energy, expected_slot, hd_state_ledger, ibfd_ap_ledger, ibfd_sta_ledger, network_metrics, node_power,
    NetworkMetrics, NodeMetrics, Role, StateLedger,
};
pub use error::{Error, Result};
pub use model::{default_model, validate, Component, DuplexMode, Model, PowerProfile, TrafficPattern, WlanConfig};
pub use sim::{replicate, simulate, Replicates, SimConfig, SimReport};
pub use sweep::{compare, run_sweep, Comparison, Source, SweepRow, SweepSpec};
