//! On-air durations of frames and of whole channel exchanges.

use serde::Serialize;

use crate::model::{DuplexMode, TrafficPattern, WlanConfig};

/// Duration of a data frame carrying `payload_bytes` of MSDU, in µs. No
/// OFDM symbol padding.
pub fn data_duration(payload_bytes: u32, config: &WlanConfig) -> f64 {
    let bits = 8.0 * f64::from(config.mac_header_bytes + payload_bytes + config.fcs_bytes);
    config.phy_header_us + bits / config.data_rate_bps * 1e6
}

/// ACK frame duration at the basic rate, in µs.
pub fn ack_duration(config: &WlanConfig) -> f64 {
    config.phy_header_us + 8.0 * f64::from(config.ack_bytes) / config.basic_rate_bps * 1e6
}

/// Frame and exchange durations for one traffic pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotDurations {
    /// Longest successful exchange.
    pub t_success_us: f64,
    /// Longest collision.
    pub t_collision_us: f64,
    pub t_data_dl_us: f64,
    pub t_data_ul_us: f64,
    pub t_ack_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
}

impl SlotDurations {
    /// Channel time after the data phase: SIFS, ACK (or ACK timeout) and DIFS.
    pub fn tail_us(&self) -> f64 {
        self.sifs_us + self.t_ack_us + self.difs_us
    }

    /// Busy slot whose data phase lasts `data_us`.
    pub fn exchange_us(&self, data_us: f64) -> f64 {
        data_us + self.tail_us()
    }

    pub fn downlink_exchange_us(&self) -> f64 {
        self.exchange_us(self.t_data_dl_us)
    }

    pub fn uplink_exchange_us(&self) -> f64 {
        self.exchange_us(self.t_data_ul_us)
    }
}

/// Success and collision slot durations.
///
/// Half duplex: a success by the AP carries the downlink payload, a success by
/// a STA the uplink payload; `t_success_us` reports the former. A collision
/// lasts as long as its longest frame, so any collision involving the AP
/// lasts the downlink exchange; `t_collision_us` reports that bound.
///
/// Full duplex: both directions overlap, the downlink is never shorter, so
/// every busy slot lasts the downlink exchange.
pub fn slot_durations(mode: DuplexMode, config: &WlanConfig, traffic: &TrafficPattern) -> SlotDurations {
    let t_data_dl_us = data_duration(traffic.downlink_bytes, config);
    let t_data_ul_us = data_duration(traffic.uplink_bytes(), config);
    let t_ack_us = ack_duration(config);
    let longest = match mode {
        DuplexMode::HalfDuplex => t_data_dl_us,
        DuplexMode::InBandFullDuplex => t_data_dl_us.max(t_data_ul_us),
    };
    let tail = config.sifs_us + t_ack_us + config.difs_us;
    SlotDurations {
        t_success_us: longest + tail,
        t_collision_us: longest + tail,
        t_data_dl_us,
        t_data_ul_us,
        t_ack_us,
        sifs_us: config.sifs_us,
        difs_us: config.difs_us,
    }
}
