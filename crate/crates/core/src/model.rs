//! Configuration, power and traffic types shared by the analytics and the
//! simulator.
//!
//! Everything here is immutable once validated. A [`Model`] can only be
//! obtained through [`validate`], so downstream code may rely on the
//! invariants without re-checking them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// PHY/MAC timing and contention parameters. Defaults are the 802.11ac
/// values for an 80 MHz, 2x2 MIMO channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlanConfig {
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub phy_header_us: f64,
    pub data_rate_bps: f64,
    pub basic_rate_bps: f64,
    pub mac_header_bytes: u32,
    pub fcs_bytes: u32,
    pub ack_bytes: u32,
    pub mpdu_max_bytes: u32,
    pub cw_min: u32,
    pub cw_max: u32,
    /// AP plus STAs.
    pub n_nodes: usize,
}

impl Default for WlanConfig {
    fn default() -> Self {
        Self {
            slot_us: 9.0,
            sifs_us: 16.0,
            difs_us: 34.0,
            phy_header_us: 44.0,
            data_rate_bps: 234e6,
            basic_rate_bps: 24e6,
            mac_header_bytes: 36,
            fcs_bytes: 4,
            ack_bytes: 14,
            mpdu_max_bytes: 7991,
            cw_min: 16,
            cw_max: 1024,
            n_nodes: 2,
        }
    }
}

impl WlanConfig {
    pub fn with_nodes(self, n_nodes: usize) -> Self {
        Self { n_nodes, ..self }
    }

    /// Number of backoff stages, log2(cw_max / cw_min). Only meaningful on a
    /// validated config.
    pub fn backoff_stages(&self) -> u32 {
        (self.cw_max / self.cw_min).trailing_zeros()
    }

    pub fn n_stas(&self) -> usize {
        self.n_nodes - 1
    }
}

/// Power draw of each radio component, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub tx_w: f64,
    pub rx_w: f64,
    pub idle_w: f64,
    pub ctrl_w: f64,
    pub sic_w: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self {
            tx_w: 2.6883,
            rx_w: 1.5900,
            idle_w: 0.9484,
            ctrl_w: 0.3000,
            sic_w: 0.0650,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Component {
    Tx,
    Rx,
    Idle,
    Ctrl,
    Sic,
}

impl PowerProfile {
    pub fn component(&self, c: Component) -> f64 {
        match c {
            Component::Tx => self.tx_w,
            Component::Rx => self.rx_w,
            Component::Idle => self.idle_w,
            Component::Ctrl => self.ctrl_w,
            Component::Sic => self.sic_w,
        }
    }

    /// Power of several components running together: the sum of their
    /// individual draws. Repeated components count once.
    pub fn composite_power(&self, components: &[Component]) -> f64 {
        let set: BTreeSet<Component> = components.iter().copied().collect();
        set.into_iter().map(|c| self.component(c)).sum()
    }

    /// Upper bound on any composite the energy model uses.
    pub fn max_composite(&self) -> f64 {
        self.tx_w + self.ctrl_w + self.rx_w + self.sic_w
    }
}

/// Downlink load and uplink/downlink symmetry ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficPattern {
    pub downlink_bytes: u32,
    pub symmetry: f64,
}

impl TrafficPattern {
    /// Saturated AP downlink (maximum MPDU) with the given symmetry ratio.
    pub fn saturated(config: &WlanConfig, symmetry: f64) -> Self {
        Self {
            downlink_bytes: config.mpdu_max_bytes,
            symmetry,
        }
    }

    /// Uplink payload, rounded to a whole byte and never below one byte.
    pub fn uplink_bytes(&self) -> u32 {
        let ul = (self.symmetry * f64::from(self.downlink_bytes)).round();
        (ul as u32).max(1)
    }
}

impl Default for TrafficPattern {
    fn default() -> Self {
        Self::saturated(&WlanConfig::default(), 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DuplexMode {
    HalfDuplex,
    InBandFullDuplex,
}

impl DuplexMode {
    pub const ALL: [DuplexMode; 2] = [DuplexMode::HalfDuplex, DuplexMode::InBandFullDuplex];

    pub fn short_name(self) -> &'static str {
        match self {
            DuplexMode::HalfDuplex => "HD",
            DuplexMode::InBandFullDuplex => "IBFD",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HD" | "HALFDUPLEX" | "HALF-DUPLEX" => Some(DuplexMode::HalfDuplex),
            "IBFD" | "FD" | "FULLDUPLEX" | "FULL-DUPLEX" => Some(DuplexMode::InBandFullDuplex),
            _ => None,
        }
    }
}

impl fmt::Display for DuplexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// A configuration, power profile and traffic pattern that passed
/// [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    config: WlanConfig,
    profile: PowerProfile,
    traffic: TrafficPattern,
}

impl Model {
    pub fn config(&self) -> &WlanConfig {
        &self.config
    }

    pub fn profile(&self) -> &PowerProfile {
        &self.profile
    }

    pub fn traffic(&self) -> &TrafficPattern {
        &self.traffic
    }

    pub fn into_parts(self) -> (WlanConfig, PowerProfile, TrafficPattern) {
        (self.config, self.profile, self.traffic)
    }

    /// Same model with a different node count. The count is re-checked.
    pub fn with_nodes(&self, n_nodes: usize) -> Result<Model> {
        validate(self.config.with_nodes(n_nodes), self.profile, self.traffic)
    }

    /// Same model with a different symmetry ratio.
    pub fn with_symmetry(&self, symmetry: f64) -> Result<Model> {
        validate(
            self.config,
            self.profile,
            TrafficPattern {
                symmetry,
                ..self.traffic
            },
        )
    }
}

/// Default 802.11ac parameters and radio powers for `n_nodes` nodes and
/// symmetry `symmetry`.
pub fn default_model(n_nodes: usize, symmetry: f64) -> Result<Model> {
    let config = WlanConfig::default().with_nodes(n_nodes);
    validate(
        config,
        PowerProfile::default(),
        TrafficPattern::saturated(&config, symmetry),
    )
}

pub fn validate(config: WlanConfig, profile: PowerProfile, traffic: TrafficPattern) -> Result<Model> {
    for (field, value) in [
        ("slot_us", config.slot_us),
        ("sifs_us", config.sifs_us),
        ("difs_us", config.difs_us),
        ("phy_header_us", config.phy_header_us),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveDuration { field, value });
        }
    }
    for (field, value) in [
        ("data_rate_bps", config.data_rate_bps),
        ("basic_rate_bps", config.basic_rate_bps),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveRate { field, value });
        }
    }
    if config.cw_min < 2 {
        return Err(Error::CwMinTooSmall(config.cw_min));
    }
    if config.cw_max < config.cw_min {
        return Err(Error::CwMaxBelowMin {
            cw_min: config.cw_min,
            cw_max: config.cw_max,
        });
    }
    if !config.cw_max.is_multiple_of(config.cw_min) || !(config.cw_max / config.cw_min).is_power_of_two() {
        return Err(Error::CwRatioNotPowerOfTwo {
            cw_min: config.cw_min,
            cw_max: config.cw_max,
        });
    }
    if config.n_nodes < 2 {
        return Err(Error::TooFewNodes(config.n_nodes));
    }
    for (component, value) in [
        ("tx_w", profile.tx_w),
        ("rx_w", profile.rx_w),
        ("idle_w", profile.idle_w),
        ("ctrl_w", profile.ctrl_w),
        ("sic_w", profile.sic_w),
    ] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::NegativePower { component, value });
        }
    }
    if !(traffic.symmetry > 0.0 && traffic.symmetry <= 1.0) {
        return Err(Error::SymmetryOutOfRange(traffic.symmetry));
    }
    if traffic.downlink_bytes != config.mpdu_max_bytes {
        return Err(Error::DownlinkNotMpduMax {
            downlink: traffic.downlink_bytes,
            mpdu_max: config.mpdu_max_bytes,
        });
    }
    Ok(Model {
        config,
        profile,
        traffic,
    })
}

const CONFIG_KEYS: [&str; 20] = [
    "slot_us",
    "sifs_us",
    "difs_us",
    "phy_header_us",
    "data_rate_bps",
    "basic_rate_bps",
    "mac_header_bytes",
    "fcs_bytes",
    "ack_bytes",
    "mpdu_max_bytes",
    "cw_min",
    "cw_max",
    "n_nodes",
    "tx_w",
    "rx_w",
    "idle_w",
    "ctrl_w",
    "sic_w",
    "downlink_bytes",
    "symmetry",
];

/// Parses a `key = value` configuration file. Keys not given keep their
/// default; `downlink_bytes` follows `mpdu_max_bytes` unless set. Blank
/// lines and lines starting with `#` are skipped. The result is not
/// validated.
pub fn parse_config(text: &str) -> Result<(WlanConfig, PowerProfile, TrafficPattern)> {
    let mut config = WlanConfig::default();
    let mut profile = PowerProfile::default();
    let mut symmetry = 1.0;
    let mut downlink: Option<u32> = None;
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or(Error::MalformedLine { line })?;
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        let bad = || Error::InvalidValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        let float = || value.parse::<f64>().map_err(|_| bad());
        let uint = || value.parse::<u32>().map_err(|_| bad());
        match key {
            "slot_us" => config.slot_us = float()?,
            "sifs_us" => config.sifs_us = float()?,
            "difs_us" => config.difs_us = float()?,
            "phy_header_us" => config.phy_header_us = float()?,
            "data_rate_bps" => config.data_rate_bps = float()?,
            "basic_rate_bps" => config.basic_rate_bps = float()?,
            "mac_header_bytes" => config.mac_header_bytes = uint()?,
            "fcs_bytes" => config.fcs_bytes = uint()?,
            "ack_bytes" => config.ack_bytes = uint()?,
            "mpdu_max_bytes" => config.mpdu_max_bytes = uint()?,
            "cw_min" => config.cw_min = uint()?,
            "cw_max" => config.cw_max = uint()?,
            "n_nodes" => config.n_nodes = value.parse().map_err(|_| bad())?,
            "tx_w" => profile.tx_w = float()?,
            "rx_w" => profile.rx_w = float()?,
            "idle_w" => profile.idle_w = float()?,
            "ctrl_w" => profile.ctrl_w = float()?,
            "sic_w" => profile.sic_w = float()?,
            "downlink_bytes" => downlink = Some(uint()?),
            "symmetry" => symmetry = float()?,
            _ => unreachable!("key list checked above"),
        }
    }

    let traffic = TrafficPattern {
        downlink_bytes: downlink.unwrap_or(config.mpdu_max_bytes),
        symmetry,
    };
    Ok((config, profile, traffic))
}

pub fn load_config(path: &Path) -> Result<(WlanConfig, PowerProfile, TrafficPattern)> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Renders a configuration in the format read by [`parse_config`].
pub fn format_config(config: &WlanConfig, profile: &PowerProfile, traffic: &TrafficPattern) -> String {
    format!(
        "# PHY / MAC\n\
         slot_us = {}\n\
         sifs_us = {}\n\
         difs_us = {}\n\
         phy_header_us = {}\n\
         data_rate_bps = {}\n\
         basic_rate_bps = {}\n\
         mac_header_bytes = {}\n\
         fcs_bytes = {}\n\
         ack_bytes = {}\n\
         mpdu_max_bytes = {}\n\
         cw_min = {}\n\
         cw_max = {}\n\
         n_nodes = {}\n\
         \n\
         # Radio power (W)\n\
         tx_w = {}\n\
         rx_w = {}\n\
         idle_w = {}\n\
         ctrl_w = {}\n\
         sic_w = {}\n\
         \n\
         # Traffic\n\
         downlink_bytes = {}\n\
         symmetry = {}\n",
        config.slot_us,
        config.sifs_us,
        config.difs_us,
        config.phy_header_us,
        config.data_rate_bps,
        config.basic_rate_bps,
        config.mac_header_bytes,
        config.fcs_bytes,
        config.ack_bytes,
        config.mpdu_max_bytes,
        config.cw_min,
        config.cw_max,
        config.n_nodes,
        profile.tx_w,
        profile.rx_w,
        profile.idle_w,
        profile.ctrl_w,
        profile.sic_w,
        traffic.downlink_bytes,
        traffic.symmetry,
    )
}
