//! Grid sweeps over node count and symmetry, CSV output, and
//! analytic-versus-simulation comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::energy::{network_metrics, reported_roles, Role};
use crate::error::{Error, Result};
use crate::model::{validate, DuplexMode, PowerProfile, TrafficPattern, WlanConfig};
use crate::sim::{simulate, SimConfig, DEFAULT_WARMUP_SLOTS};

pub const CSV_HEADER: &str = "mode,source,n,rho,role,power_w,throughput_mbps,efficiency_mbpj,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    Analytic,
    Sim,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Analytic => "analytic",
            Source::Sim => "sim",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(Source::Analytic),
            "sim" => Some(Source::Sim),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub rho_values: Vec<f64>,
    pub modes: Vec<DuplexMode>,
    pub sources: Vec<Source>,
    pub seeds: Vec<u64>,
    pub horizon_slots: u64,
    pub warmup_slots: u64,
    pub config: WlanConfig,
    pub profile: PowerProfile,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            n_values: vec![2, 5, 10, 20],
            rho_values: vec![0.1, 0.9, 1.0],
            modes: DuplexMode::ALL.to_vec(),
            sources: vec![Source::Analytic],
            seeds: vec![1],
            horizon_slots: 1_000_000,
            warmup_slots: DEFAULT_WARMUP_SLOTS,
            config: WlanConfig::default(),
            profile: PowerProfile::default(),
        }
    }
}

impl SweepSpec {
    pub fn check(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidSweep(msg.to_string()));
        if self.n_values.is_empty() {
            return fail("empty node-count list");
        }
        if self.rho_values.is_empty() {
            return fail("empty symmetry list");
        }
        if self.modes.is_empty() {
            return fail("no duplex mode selected");
        }
        if self.sources.is_empty() {
            return fail("no source selected");
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidSweep(format!("node count {n} below 2")));
        }
        if let Some(r) = self.rho_values.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidSweep(format!("symmetry {r} outside (0, 1]")));
        }
        if self.sources.contains(&Source::Sim) {
            if self.seeds.is_empty() {
                return fail("simulation requested without seeds");
            }
            self.sim_config(0)?.check()?;
        }
        Ok(())
    }

    fn sim_config(&self, seed: u64) -> Result<SimConfig> {
        Ok(SimConfig {
            horizon_slots: self.horizon_slots,
            seed,
            warmup_slots: self.warmup_slots,
        })
    }
}

/// One CSV line. Throughput and efficiency are network-wide; power is for
/// the row's role.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: DuplexMode,
    pub source: Source,
    pub n: usize,
    pub rho: f64,
    pub role: Role,
    pub power_w: f64,
    pub throughput_mbps: f64,
    pub efficiency_mbpj: f64,
    pub seed: Option<u64>,
}

impl SweepRow {
    fn sort_key(&self) -> (DuplexMode, usize, u64, Role, Option<u64>) {
        (self.mode, self.n, self.rho.to_bits(), self.role, self.seed)
    }

    /// The row as it reads back from CSV.
    pub fn rounded(&self) -> SweepRow {
        let r = |x: f64| sig6(x).parse::<f64>().expect("formatted float parses");
        SweepRow {
            rho: r(self.rho),
            power_w: r(self.power_w),
            throughput_mbps: r(self.throughput_mbps),
            efficiency_mbpj: r(self.efficiency_mbpj),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    mode: DuplexMode,
    n: usize,
    rho: f64,
    source: Source,
    seed: u64,
}

/// Evaluates every grid point. Rows are ordered by mode, n, rho, role and
/// seed (analytic rows, which carry no seed, first), independent of the
/// order in which points finish.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.check()?;
    let mut jobs = Vec::new();
    for &mode in &spec.modes {
        for &n in &spec.n_values {
            for &rho in &spec.rho_values {
                for &source in &spec.sources {
                    match source {
                        Source::Analytic => jobs.push(Job {
                            mode,
                            n,
                            rho,
                            source,
                            seed: 0,
                        }),
                        Source::Sim => jobs.extend(spec.seeds.iter().map(|&seed| Job {
                            mode,
                            n,
                            rho,
                            source,
                            seed,
                        })),
                    }
                }
            }
        }
    }

    let chunks = jobs
        .par_iter()
        .map(|job| evaluate(spec, job))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<SweepRow> = chunks.into_iter().flatten().collect();
    rows.sort_by_key(|a| a.sort_key());
    Ok(rows)
}

fn evaluate(spec: &SweepSpec, job: &Job) -> Result<Vec<SweepRow>> {
    let config = spec.config.with_nodes(job.n);
    let model = validate(config, spec.profile, TrafficPattern::saturated(&config, job.rho))?;
    let row = |role: Role, power_w: f64, throughput_mbps: f64, efficiency_mbpj: f64, seed| SweepRow {
        mode: job.mode,
        source: job.source,
        n: job.n,
        rho: job.rho,
        role,
        power_w,
        throughput_mbps,
        efficiency_mbpj,
        seed,
    };
    let roles = reported_roles(job.mode);
    match job.source {
        Source::Analytic => {
            let net = network_metrics(&model, job.mode)?;
            Ok(roles
                .iter()
                .map(|&role| {
                    let power = net.reported_power(role).expect("reported role present");
                    row(role, power, net.throughput_mbps, net.efficiency_mbpj, None)
                })
                .collect())
        }
        Source::Sim => {
            let report = simulate(&model, job.mode, &spec.sim_config(job.seed)?)?;
            Ok(roles
                .iter()
                .map(|&role| {
                    row(
                        role,
                        report.power_for(role),
                        report.throughput_mbps,
                        report.efficiency_mbpj,
                        Some(job.seed),
                    )
                })
                .collect())
        }
    }
}

/// Formats with six significant digits, without exponent notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.mode.short_name().to_string(),
            r.source.name().to_string(),
            r.n.to_string(),
            sig6(r.rho),
            r.role.name().to_string(),
            sig6(r.power_w),
            sig6(r.throughput_mbps),
            sig6(r.efficiency_mbpj),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

pub fn write_csv_file(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::MalformedCsv(format!("unexpected header `{header}`")));
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        let bad = |what: &str| Error::MalformedCsv(format!("line {line}: bad {what}"));
        let field = |i: usize| record.get(i).unwrap_or("");
        let float = |i: usize, what: &str| field(i).parse::<f64>().map_err(|_| bad(what));
        rows.push(SweepRow {
            mode: DuplexMode::parse(field(0)).ok_or_else(|| bad("mode"))?,
            source: Source::parse(field(1)).ok_or_else(|| bad("source"))?,
            n: field(2).parse().map_err(|_| bad("n"))?,
            rho: float(3, "rho")?,
            role: Role::parse(field(4)).ok_or_else(|| bad("role"))?,
            power_w: float(5, "power_w")?,
            throughput_mbps: float(6, "throughput_mbps")?,
            efficiency_mbpj: float(7, "efficiency_mbpj")?,
            seed: match field(8) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("seed"))?),
            },
        });
    }
    Ok(rows)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<SweepRow>> {
    read_csv(std::fs::File::open(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonEntry {
    pub mode: DuplexMode,
    pub n: usize,
    pub rho: f64,
    pub role: Role,
    pub reference: [f64; 3],
    pub candidate: [f64; 3],
    /// Relative errors of power, throughput and efficiency.
    pub errors: [f64; 3],
    pub pass: bool,
}

impl ComparisonEntry {
    pub fn power_error(&self) -> f64 {
        self.errors[0]
    }

    pub fn throughput_error(&self) -> f64 {
        self.errors[1]
    }

    pub fn efficiency_error(&self) -> f64 {
        self.errors[2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub tolerance: f64,
    pub entries: Vec<ComparisonEntry>,
    pub pass: bool,
}

impl Comparison {
    pub fn max_error(&self) -> f64 {
        self.entries.iter().flat_map(|e| e.errors).fold(0.0, f64::max)
    }
}

type Key = (DuplexMode, usize, u64, Role);

fn mean_by_key(rows: &[SweepRow]) -> BTreeMap<Key, (f64, [f64; 3], usize)> {
    let mut acc: BTreeMap<Key, (f64, [f64; 3], usize)> = BTreeMap::new();
    for r in rows {
        let e = acc
            .entry((r.mode, r.n, r.rho.to_bits(), r.role))
            .or_insert((r.rho, [0.0; 3], 0));
        e.1[0] += r.power_w;
        e.1[1] += r.throughput_mbps;
        e.1[2] += r.efficiency_mbpj;
        e.2 += 1;
    }
    for v in acc.values_mut() {
        let k = v.2 as f64;
        v.1 = v.1.map(|x| x / k);
    }
    acc
}

fn relative_error(reference: f64, candidate: f64) -> f64 {
    if reference == candidate {
        0.0
    } else if reference == 0.0 {
        f64::INFINITY
    } else {
        ((candidate - reference) / reference).abs()
    }
}

/// Compares `candidate` rows (averaged over seeds) against `reference`
/// rows, key by key. Power, throughput and efficiency must each be within
/// `tolerance` relative error.
pub fn compare(reference: &[SweepRow], candidate: &[SweepRow], tolerance: f64) -> Result<Comparison> {
    let refs = mean_by_key(reference);
    let cands = mean_by_key(candidate);
    let describe = |k: &Key, rho: f64| format!("{} n={} rho={} role={}", k.0, k.1, sig6(rho), k.3.name());
    if let Some((k, v)) = refs.iter().find(|(k, _)| !cands.contains_key(*k)) {
        return Err(Error::KeyMismatch(format!(
            "{} missing from candidate",
            describe(k, v.0)
        )));
    }
    if let Some((k, v)) = cands.iter().find(|(k, _)| !refs.contains_key(*k)) {
        return Err(Error::KeyMismatch(format!(
            "{} missing from reference",
            describe(k, v.0)
        )));
    }
    let entries: Vec<ComparisonEntry> = refs
        .iter()
        .map(|(k, (rho, r, _))| {
            let c = cands[k].1;
            let errors = [0, 1, 2].map(|i| relative_error(r[i], c[i]));
            ComparisonEntry {
                mode: k.0,
                n: k.1,
                rho: *rho,
                role: k.3,
                reference: *r,
                candidate: c,
                errors,
                pass: errors.iter().all(|e| *e <= tolerance),
            }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    Ok(Comparison {
        tolerance,
        entries,
        pass,
    })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<6} {:<5} {:>4} {:>6} {:<5} {:>10} {:>10} {:>10}",
            "status", "mode", "n", "rho", "role", "power", "thrpt", "effic"
        )?;
        let pct = |x: f64| format!("{:.3}%", 100.0 * x);
        for e in &self.entries {
            writeln!(
                f,
                "{:<6} {:<5} {:>4} {:>6} {:<5} {:>10} {:>10} {:>10}",
                if e.pass { "PASS" } else { "FAIL" },
                e.mode.short_name(),
                e.n,
                sig6(e.rho),
                e.role.name(),
                pct(e.power_error()),
                pct(e.throughput_error()),
                pct(e.efficiency_error()),
            )?;
        }
        writeln!(
            f,
            "overall: {} (tolerance {}, worst {})",
            if self.pass { "PASS" } else { "FAIL" },
            pct(self.tolerance),
            pct(self.max_error())
        )
    }
}
