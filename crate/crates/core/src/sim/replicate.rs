use rayon::prelude::*;
use serde::Serialize;

use super::{simulate, SimConfig, SimReport};
use crate::error::{Error, Result};
use crate::model::{DuplexMode, Model};

/// Scalar summary of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SimScalars {
    pub ap_power_w: f64,
    pub sta_power_w: f64,
    pub node_power_w: f64,
    pub network_power_w: f64,
    pub throughput_mbps: f64,
    pub efficiency_mbpj: f64,
    pub ap_attempt_rate: f64,
    pub sta_attempt_rate: f64,
}

impl SimScalars {
    const LEN: usize = 8;

    fn to_array(self) -> [f64; Self::LEN] {
        [
            self.ap_power_w,
            self.sta_power_w,
            self.node_power_w,
            self.network_power_w,
            self.throughput_mbps,
            self.efficiency_mbpj,
            self.ap_attempt_rate,
            self.sta_attempt_rate,
        ]
    }

    fn from_array(a: [f64; Self::LEN]) -> Self {
        Self {
            ap_power_w: a[0],
            sta_power_w: a[1],
            node_power_w: a[2],
            network_power_w: a[3],
            throughput_mbps: a[4],
            efficiency_mbpj: a[5],
            ap_attempt_rate: a[6],
            sta_attempt_rate: a[7],
        }
    }
}

impl From<&SimReport> for SimScalars {
    fn from(r: &SimReport) -> Self {
        Self {
            ap_power_w: r.ap_power_w(),
            sta_power_w: r.mean_sta_power_w(),
            node_power_w: r.mean_node_power_w(),
            network_power_w: r.network_power_w,
            throughput_mbps: r.throughput_mbps,
            efficiency_mbpj: r.efficiency_mbpj,
            ap_attempt_rate: r.attempt_rate(0),
            sta_attempt_rate: r.mean_sta_attempt_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replicates {
    pub seeds: Vec<u64>,
    pub runs: Vec<SimScalars>,
    pub mean: SimScalars,
    /// Sample standard deviation (n - 1 denominator).
    pub stddev: SimScalars,
}

/// Runs one simulation per seed (in parallel) and summarises the scalar
/// fields. Results depend only on the seed list, not on scheduling.
pub fn replicate(model: &Model, mode: DuplexMode, sim: &SimConfig, seeds: &[u64]) -> Result<Replicates> {
    if seeds.len() < 2 {
        return Err(Error::TooFewSeeds(seeds.len()));
    }
    sim.check()?;
    let runs = seeds
        .par_iter()
        .map(|&seed| simulate(model, mode, &sim.with_seed(seed)).map(|r| SimScalars::from(&r)))
        .collect::<Result<Vec<_>>>()?;
    let (mean, stddev) = summarize(&runs);
    Ok(Replicates {
        seeds: seeds.to_vec(),
        runs,
        mean,
        stddev,
    })
}

// Welford's update keeps identical samples at exactly zero spread.
fn summarize(runs: &[SimScalars]) -> (SimScalars, SimScalars) {
    let mut mean = [0.0; SimScalars::LEN];
    let mut m2 = [0.0; SimScalars::LEN];
    for (k, run) in runs.iter().enumerate() {
        let x = run.to_array();
        let count = (k + 1) as f64;
        for i in 0..SimScalars::LEN {
            let delta = x[i] - mean[i];
            mean[i] += delta / count;
            m2[i] += delta * (x[i] - mean[i]);
        }
    }
    let denom = (runs.len() - 1) as f64;
    let sd = m2.map(|v| (v / denom).sqrt());
    (SimScalars::from_array(mean), SimScalars::from_array(sd))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_known_values() {
        let a = SimScalars {
            ap_power_w: 1.0,
            ..Default::default()
        };
        let b = SimScalars {
            ap_power_w: 3.0,
            ..Default::default()
        };
        let (mean, sd) = summarize(&[a, b]);
        assert_eq!(mean.ap_power_w, 2.0);
        assert!((sd.ap_power_w - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(sd.sta_power_w, 0.0);
    }

    #[test]
    fn identical_samples_have_zero_spread() {
        let a = SimScalars::from_array([1.1, 2.3, 0.7, 9.9, 123.456, 1.0 / 3.0, 0.1, 0.2]);
        let (mean, sd) = summarize(&[a, a, a, a, a]);
        assert_eq!(mean, a);
        assert_eq!(sd, SimScalars::default());
    }
}
