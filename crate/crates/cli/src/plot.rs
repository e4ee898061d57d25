//! Line charts of sweep results: power per node and network efficiency
//! against node count, one series per mode, symmetry, role and source.

use std::collections::BTreeMap;
use std::fmt::Write;

use fdpower_core::sweep::{sig6, Source, SweepRow};
use fdpower_core::{DuplexMode, Role};

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;
const LEGEND_ROW: f64 = 18.0;
const LEGEND_COLS: usize = 3;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct SeriesKey {
    mode: DuplexMode,
    rho_bits: u64,
    role: Option<Role>,
    source: Source,
}

/// Per-series sums and sample counts, keyed by node count.
type Points = BTreeMap<usize, (f64, usize)>;
/// A series key, its symmetry ratio and its (n, value) points.
type Grouped = (SeriesKey, f64, Vec<(f64, f64)>);

struct Series {
    label: String,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

/// Averages rows over seeds and groups them into series. `role` is kept
/// for power and dropped for efficiency, which is network-wide.
fn collect(rows: &[SweepRow], by_role: bool, value: fn(&SweepRow) -> f64) -> Vec<Grouped> {
    let mut acc: BTreeMap<SeriesKey, (f64, Points)> = BTreeMap::new();
    for r in rows {
        let key = SeriesKey {
            mode: r.mode,
            rho_bits: r.rho.to_bits(),
            role: by_role.then_some(r.role),
            source: r.source,
        };
        let slot = acc.entry(key).or_insert((r.rho, BTreeMap::new()));
        let point = slot.1.entry(r.n).or_insert((0.0, 0));
        point.0 += value(r);
        point.1 += 1;
    }
    acc.into_iter()
        .map(|(key, (rho, points))| {
            let pts = points
                .into_iter()
                .map(|(n, (sum, k))| (n as f64, sum / k as f64))
                .collect();
            (key, rho, pts)
        })
        .collect()
}

fn build_series(rows: &[SweepRow], by_role: bool, value: fn(&SweepRow) -> f64) -> Vec<Series> {
    let grouped = collect(rows, by_role, value);
    // Analytic and simulated curves of the same configuration share a colour.
    let mut colors: BTreeMap<(DuplexMode, u64, Option<Role>), &'static str> = BTreeMap::new();
    grouped
        .into_iter()
        .map(|(key, rho, points)| {
            let next = PALETTE[colors.len() % PALETTE.len()];
            let color = *colors.entry((key.mode, key.rho_bits, key.role)).or_insert(next);
            let role = key.role.map(|r| format!(" {}", r.name())).unwrap_or_default();
            Series {
                label: format!(
                    "{}{role} ρ={} ({})",
                    key.mode.short_name(),
                    sig6(rho),
                    key.source.name()
                ),
                color,
                dashed: key.source == Source::Sim,
                points,
            }
        })
        .collect()
}

fn nice_step(span: f64, target_ticks: f64) -> f64 {
    let raw = span / target_ticks;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let nice = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn panel(svg: &mut String, x0: f64, title: &str, y_label: &str, series: &[Series]) {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x_min, mut x_max, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    if !x_min.is_finite() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let y_step = nice_step(if y_max > 0.0 { y_max } else { 1.0 }, 5.0);
    let y_top = (y_max / y_step).ceil().max(1.0) * y_step;
    let x_step = nice_step(x_max - x_min, 6.0).max(1.0);

    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let sx = |x: f64| x0 + MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_T + plot_h - y / y_top * plot_h;

    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14" font-weight="bold">{}</text>"#,
        x0 + MARGIN_L + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{:.1}" y="{MARGIN_T}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#444"/>"##,
        x0 + MARGIN_L
    );

    let mut y = 0.0;
    while y <= y_top + y_step * 1e-9 {
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"##,
            sx(x_min),
            sx(x_max),
            sx(x_min) - 6.0,
            py + 4.0,
            sig6(y)
        );
        y += y_step;
    }
    let mut x = (x_min / x_step).ceil() * x_step;
    while x <= x_max + x_step * 1e-9 {
        let px = sx(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#444"/><text x="{px:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"##,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0,
            MARGIN_T + plot_h + 18.0,
            sig6(x)
        );
        x += x_step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">number of nodes n</text>"#,
        x0 + MARGIN_L + plot_w / 2.0,
        PANEL_H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate({:.1},{:.1}) rotate(-90)" text-anchor="middle" font-size="12">{}</text>"#,
        x0 + 16.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    );

    for s in series {
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"{dash}/>"#,
            path.join(" "),
            s.color
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"/>"#,
                sx(x),
                sy(y),
                s.color
            );
        }
    }
}

fn legend(svg: &mut String, top: f64, series: &[Series]) {
    let col_w = 2.0 * PANEL_W / LEGEND_COLS as f64;
    for (i, s) in series.iter().enumerate() {
        let x = 20.0 + (i % LEGEND_COLS) as f64 * col_w;
        let y = top + (i / LEGEND_COLS) as f64 * LEGEND_ROW;
        let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
            x + 24.0,
            s.color,
            x + 30.0,
            y + 4.0,
            escape(&s.label)
        );
    }
}

/// Renders both charts side by side with a shared legend.
pub fn render(rows: &[SweepRow]) -> String {
    let power = build_series(rows, true, |r| r.power_w);
    let efficiency = build_series(rows, false, |r| r.efficiency_mbpj);
    let legend_rows = power.len().div_ceil(LEGEND_COLS);
    let width = 2.0 * PANEL_W;
    let height = PANEL_H + 16.0 + legend_rows as f64 * LEGEND_ROW;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(&mut svg, 0.0, "Power per node", "power (W)", &power);
    panel(
        &mut svg,
        PANEL_W,
        "Network energy efficiency",
        "efficiency (Mb/J)",
        &efficiency,
    );
    legend(&mut svg, PANEL_H + 12.0, &power);
    svg.push_str("</svg>\n");
    svg
}
