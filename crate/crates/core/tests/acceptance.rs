//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use fdpower_core::dcf::{solve, DcfSolution};
use fdpower_core::energy::{hd_state_ledger, ibfd_ap_ledger, ibfd_sta_ledger};
use fdpower_core::sweep::to_csv_string;
use fdpower_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID_N: [usize; 4] = [2, 5, 10, 20];
const GRID_RHO: [f64; 4] = [0.1, 0.5, 0.9, 1.0];
const SIM_SLOTS: u64 = 1_000_000;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn metrics(n: usize, rho: f64, mode: DuplexMode) -> NetworkMetrics {
    network_metrics(&default_model(n, rho).expect("valid model"), mode).expect("solvable model")
}

fn synthetic(mode: DuplexMode, n: usize, tau_ap: f64, tau_sta: f64, p: f64) -> DcfSolution {
    DcfSolution {
        mode,
        tau_sta,
        p_sta: p,
        tau_ap,
        p_ap: p,
        p_tr: 0.0,
        p_s: 0.0,
        residual: 0.0,
        n_nodes: n,
    }
}

fn probability_simplex() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=50usize);
        let (tau, tau_ap, tau_sta, p) = (rng.random(), rng.random(), rng.random(), rng.random());
        let model = default_model(n, 1.0).expect("valid model");
        let hd = synthetic(DuplexMode::HalfDuplex, n, tau, tau, p);
        let fd = synthetic(DuplexMode::InBandFullDuplex, n, tau_ap, tau_sta, p);
        let ledgers = [
            hd_state_ledger(Role::Ap, &model, &hd),
            hd_state_ledger(Role::Sta, &model, &hd),
            ibfd_ap_ledger(&model, &fd),
            ibfd_sta_ledger(&model, &fd),
        ];
        for l in &ledgers {
            worst = worst.max((l.probability_sum() - 1.0).abs());
        }
    }
    verdict(
        worst <= 1e-12,
        format!("1000 draws, worst |sum - 1| = {worst:.1e} (limit 1e-12)"),
    )
}

fn fixed_points() -> Verdict {
    let mut worst = 0.0f64;
    let mut decreasing = true;
    let mut prev_tau = f64::INFINITY;
    for n in 2..=50 {
        let config = WlanConfig::default().with_nodes(n);
        for mode in DuplexMode::ALL {
            let sol = solve(mode, &config).expect("fixed point converges");
            worst = worst.max(sol.residual);
            if mode == DuplexMode::HalfDuplex {
                decreasing &= sol.tau_sta < prev_tau;
                prev_tau = sol.tau_sta;
            }
        }
    }
    let pair = solve(DuplexMode::InBandFullDuplex, &WlanConfig::default().with_nodes(2)).expect("n=2 solves");
    let collision_free = pair.p_ap == 0.0 && pair.p_sta == 0.0;
    verdict(
        worst <= 1e-10 && decreasing && collision_free,
        format!(
            "n=2..50 worst residual {worst:.1e}, HD tau strictly decreasing: {decreasing}, \
             IBFD n=2 p_AP={} p_STA={}",
            pair.p_ap, pair.p_sta
        ),
    )
}

fn two_node_symmetry() -> Verdict {
    let model = default_model(2, 1.0).expect("valid model");
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in DuplexMode::ALL {
        let net = network_metrics(&model, mode).expect("solvable");
        let ap = net.node(Role::Ap).expect("AP row").power_w;
        let sta = net.node(Role::Sta).expect("STA row").power_w;
        let analytic = (ap - sta).abs();
        let report = simulate(&model, mode, &SimConfig::new(SIM_SLOTS, 42)).expect("simulation runs");
        let simulated = (report.ap_power_w() - report.mean_sta_power_w()).abs() / report.mean_sta_power_w();
        pass &= analytic <= 1e-9 && simulated <= 0.01;
        parts.push(format!(
            "{} analytic |AP-STA| {analytic:.1e} W, sim {:.3}%",
            mode.short_name(),
            100.0 * simulated
        ));
    }
    verdict(pass, parts.join("; "))
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let spec = SweepSpec {
        n_values: GRID_N.to_vec(),
        rho_values: GRID_RHO.to_vec(),
        sources: vec![Source::Analytic, Source::Sim],
        seeds: (1..=5).collect(),
        horizon_slots: SIM_SLOTS,
        ..SweepSpec::default()
    };
    let rows = run_sweep(&spec).expect("sweep runs");
    let elapsed = start.elapsed().as_secs_f64();
    let (analytic, sim): (Vec<SweepRow>, Vec<SweepRow>) = rows.into_iter().partition(|r| r.source == Source::Analytic);
    let cmp = compare(&analytic, &sim, 0.03).expect("matching keys");
    let worst = cmp
        .entries
        .iter()
        .max_by(|a, b| {
            let ea = a.errors.iter().copied().fold(0.0, f64::max);
            let eb = b.errors.iter().copied().fold(0.0, f64::max);
            ea.total_cmp(&eb)
        })
        .expect("non-empty grid");
    verdict(
        cmp.pass && elapsed <= 60.0,
        format!(
            "{} keys, worst error {:.2}% at {} n={} rho={} {} (limit 3%), runtime {elapsed:.1} s (limit 60 s)",
            cmp.entries.len(),
            100.0 * cmp.max_error(),
            worst.mode.short_name(),
            worst.n,
            worst.rho,
            worst.role.name()
        ),
    )
}

fn ordering() -> Verdict {
    let mut eff_margin = f64::INFINITY;
    let mut power_margin = f64::INFINITY;
    for n in GRID_N {
        for rho in GRID_RHO {
            let hd = metrics(n, rho, DuplexMode::HalfDuplex);
            let fd = metrics(n, rho, DuplexMode::InBandFullDuplex);
            eff_margin = eff_margin.min(fd.efficiency_mbpj / hd.efficiency_mbpj - 1.0);
            let hd_node = hd.node(Role::Node).expect("HD mean").power_w;
            for role in [Role::Ap, Role::Sta] {
                let p_fd = fd.node(role).expect("IBFD role").power_w;
                let p_hd = hd.node(role).expect("HD role").power_w;
                power_margin = power_margin.min(p_fd / p_hd - 1.0).min(p_fd / hd_node - 1.0);
            }
        }
    }
    verdict(
        eff_margin > 0.0 && power_margin > 0.0,
        format!(
            "32 points, smallest IBFD lead: efficiency {:+.2}%, per-node power {:+.2}%",
            100.0 * eff_margin,
            100.0 * power_margin
        ),
    )
}

fn hd_plateau() -> Verdict {
    let mut worst = 0.0f64;
    for rho in GRID_RHO {
        let p20 = metrics(20, rho, DuplexMode::HalfDuplex)
            .node(Role::Node)
            .expect("HD mean")
            .power_w;
        let p30 = metrics(30, rho, DuplexMode::HalfDuplex)
            .node(Role::Node)
            .expect("HD mean")
            .power_w;
        worst = worst.max((p30 / p20 - 1.0).abs());
    }
    verdict(
        worst <= 0.02,
        format!(
            "worst |P(30)/P(20) - 1| over rho {GRID_RHO:?} = {:.2}% (limit 2%)",
            100.0 * worst
        ),
    )
}

fn symmetry_crossover() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [5, 10, 20] {
        let fd = metrics(n, 0.1, DuplexMode::InBandFullDuplex).efficiency_mbpj;
        let hd = metrics(n, 0.9, DuplexMode::HalfDuplex).efficiency_mbpj;
        let gap = fd / hd - 1.0;
        pass &= gap.abs() <= 0.15;
        parts.push(format!("n={n} {:+.2}%", 100.0 * gap));
    }
    verdict(
        pass,
        format!(
            "IBFD(rho=0.1) vs HD(rho=0.9) efficiency: {} (limit 15%)",
            parts.join(", ")
        ),
    )
}

fn determinism() -> Verdict {
    let model = default_model(10, 0.5).expect("valid model");
    let mut reports_equal = true;
    for mode in DuplexMode::ALL {
        let sim = SimConfig::new(200_000, 7);
        let a = serde_json::to_string(&simulate(&model, mode, &sim).expect("runs")).expect("serializes");
        let b = serde_json::to_string(&simulate(&model, mode, &sim).expect("runs")).expect("serializes");
        reports_equal &= a == b;
    }
    let spec = SweepSpec {
        n_values: vec![2, 10],
        rho_values: vec![0.1, 1.0],
        sources: vec![Source::Analytic, Source::Sim],
        seeds: vec![3, 4],
        horizon_slots: 100_000,
        ..SweepSpec::default()
    };
    let first = to_csv_string(&run_sweep(&spec).expect("sweep runs"));
    let second = to_csv_string(&run_sweep(&spec).expect("sweep runs"));
    let csv_equal = first.as_bytes() == second.as_bytes();
    verdict(
        reports_equal && csv_equal,
        format!(
            "SimReport JSON identical: {reports_equal}, sweep CSV identical: {csv_equal} ({} bytes)",
            first.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("probability simplex", probability_simplex),
        ("fixed-point residuals", fixed_points),
        ("two-node symmetry", two_node_symmetry),
        ("analytic/simulation equivalence", oracle_equivalence),
        ("IBFD/HD ordering", ordering),
        ("HD power plateau", hd_plateau),
        ("symmetry crossover", symmetry_crossover),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        if !v.pass {
            failures += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
