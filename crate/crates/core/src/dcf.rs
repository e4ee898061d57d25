//! Saturated-DCF contention fixed points.
//!
//! Every contender runs binary exponential backoff, which ties its
//! per-slot transmission probability to the probability that one of its
//! attempts fails. The half-duplex network is symmetric; in the full-duplex
//! network a STA fails only when another STA transmits in the same slot,
//! and the AP fails only when two or more STAs do.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DuplexMode, WlanConfig};

/// Bracket width at which bisection stops.
pub const BRACKET_TOL: f64 = 1e-12;
/// Largest accepted re-substitution residual.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DcfSolution {
    pub mode: DuplexMode,
    pub tau_sta: f64,
    pub p_sta: f64,
    pub tau_ap: f64,
    pub p_ap: f64,
    /// Probability that a slot carries at least one transmission.
    pub p_tr: f64,
    /// Probability that a busy slot is a success.
    pub p_s: f64,
    pub residual: f64,
    pub n_nodes: usize,
}

/// Per-slot transmission probability of a backoff process with minimum
/// window `cw_min` and `stages` doublings, given the failure probability of
/// each attempt.
///
/// The textbook closed form `2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)^m))` has a
/// removable singularity at p = 1/2. Dividing out the common `(1-2p)`
/// factor leaves `2 / (W + 1 + pW * sum_{k<m} (2p)^k)`, which is smooth on
/// [0, 1].
pub fn backoff_tau(p: f64, cw_min: u32, stages: u32) -> f64 {
    let w = f64::from(cw_min);
    let two_p = 2.0 * p;
    let mut geometric = 0.0;
    let mut term = 1.0;
    for _ in 0..stages {
        geometric += term;
        term *= two_p;
    }
    2.0 / (w + 1.0 + p * w * geometric)
}

/// Solves `p = 1 - (1 - tau(p))^others` by bisection on p. The left side
/// grows and the right side shrinks in p, so the root is unique.
fn solve_coupled(others: usize, cw_min: u32, stages: u32, what: &'static str) -> Result<(f64, f64)> {
    let collide = |p: f64| 1.0 - (1.0 - backoff_tau(p, cw_min, stages)).powi(others as i32);
    if others == 0 {
        return Ok((backoff_tau(0.0, cw_min, stages), 0.0));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut iterations = 0;
    while hi - lo > BRACKET_TOL {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NoConvergence { what, iterations });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid - collide(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let tau = backoff_tau(p, cw_min, stages);
    let p = collide(p);
    Ok((tau, p))
}

/// All nodes symmetric: p = 1 - (1 - tau)^(n-1).
pub fn solve_hd(config: &WlanConfig) -> Result<DcfSolution> {
    let n = config.n_nodes;
    let stages = config.backoff_stages();
    let (tau, p) = solve_coupled(n.saturating_sub(1), config.cw_min, stages, "half-duplex fixed point")?;
    let residual =
        (p - (1.0 - (1.0 - tau).powi(n as i32 - 1))).abs() + (tau - backoff_tau(p, config.cw_min, stages)).abs();
    finish(
        DcfSolution {
            mode: DuplexMode::HalfDuplex,
            tau_sta: tau,
            p_sta: p,
            tau_ap: tau,
            p_ap: p,
            p_tr: 0.0,
            p_s: 0.0,
            residual,
            n_nodes: n,
        },
        config,
    )
}

/// AP failure probability: two or more of the `n - 1` STAs transmit.
pub fn ap_collision_prob(tau_sta: f64, n_nodes: usize) -> f64 {
    let stas = n_nodes as i32 - 1;
    if stas < 2 {
        return 0.0;
    }
    let q = 1.0 - tau_sta;
    (1.0 - q.powi(stas) - f64::from(stas) * tau_sta * q.powi(stas - 1)).max(0.0)
}

/// Full duplex. The STA equation involves only the other `n - 2` STAs and
/// is solved on its own; the AP then follows in closed form. At n = 2
/// neither side can collide.
pub fn solve_ibfd(config: &WlanConfig) -> Result<DcfSolution> {
    let n = config.n_nodes;
    let stages = config.backoff_stages();
    let (tau_sta, p_sta) = if n <= 2 {
        (backoff_tau(0.0, config.cw_min, stages), 0.0)
    } else {
        solve_coupled(n - 2, config.cw_min, stages, "full-duplex STA fixed point")?
    };
    let p_ap = ap_collision_prob(tau_sta, n);
    let tau_ap = backoff_tau(p_ap, config.cw_min, stages);

    let sta_residual = if n <= 2 {
        p_sta
    } else {
        (p_sta - (1.0 - (1.0 - tau_sta).powi(n as i32 - 2))).abs()
    };
    let residual = sta_residual
        + (tau_sta - backoff_tau(p_sta, config.cw_min, stages)).abs()
        + (p_ap - ap_collision_prob(tau_sta, n)).abs()
        + (tau_ap - backoff_tau(p_ap, config.cw_min, stages)).abs();
    finish(
        DcfSolution {
            mode: DuplexMode::InBandFullDuplex,
            tau_sta,
            p_sta,
            tau_ap,
            p_ap,
            p_tr: 0.0,
            p_s: 0.0,
            residual,
            n_nodes: n,
        },
        config,
    )
}

pub fn solve(mode: DuplexMode, config: &WlanConfig) -> Result<DcfSolution> {
    match mode {
        DuplexMode::HalfDuplex => solve_hd(config),
        DuplexMode::InBandFullDuplex => solve_ibfd(config),
    }
}

fn finish(mut sol: DcfSolution, config: &WlanConfig) -> Result<DcfSolution> {
    if sol.residual.is_nan() || sol.residual > RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            what: "fixed-point residual check",
            iterations: MAX_ITERATIONS,
        });
    }
    let (p_tr, p_s) = channel_probs(&sol, config);
    sol.p_tr = p_tr;
    sol.p_s = p_s;
    Ok(sol)
}

/// Probability that a slot is busy, and that a busy slot is a success.
/// `P_s` is 0 when nobody transmits.
pub fn channel_probs(sol: &DcfSolution, config: &WlanConfig) -> (f64, f64) {
    let n = config.n_nodes as i32;
    match sol.mode {
        DuplexMode::HalfDuplex => {
            let q = 1.0 - sol.tau_sta;
            let p_tr = 1.0 - q.powi(n);
            let success = f64::from(n) * sol.tau_sta * q.powi(n - 1);
            (p_tr, if p_tr > 0.0 { success / p_tr } else { 0.0 })
        }
        DuplexMode::InBandFullDuplex => {
            let q = 1.0 - sol.tau_sta;
            let p_tr = 1.0 - (1.0 - sol.tau_ap) * q.powi(n - 1);
            let success = ibfd_success_prob(sol.tau_ap, sol.tau_sta, config.n_nodes);
            (p_tr, if p_tr > 0.0 { success / p_tr } else { 0.0 })
        }
    }
}

/// Probability that a full-duplex slot carries a successful exchange: the
/// AP alone, or exactly one STA (whatever the AP does).
pub fn ibfd_success_prob(tau_ap: f64, tau_sta: f64, n_nodes: usize) -> f64 {
    let stas = n_nodes as i32 - 1;
    let q = 1.0 - tau_sta;
    tau_ap * q.powi(stas) + f64::from(stas) * tau_sta * q.powi(stas - 1)
}
