//! Static SVG charts: one line per algorithm (mean over seeds vs horizon)
//! with a shaded one-standard-deviation band. Emitted by hand so the output
//! is deterministic byte-for-byte.

use crate::harness::{Algorithm, SummaryRow};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Regret,
    BudgetViol,
    RosViol,
}

impl Metric {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "regret" => Some(Metric::Regret),
            "budget_viol" => Some(Metric::BudgetViol),
            "ros_viol" => Some(Metric::RosViol),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Regret => "regret",
            Metric::BudgetViol => "budget_viol",
            Metric::RosViol => "ros_viol",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Metric::Regret => "Regret",
            Metric::BudgetViol => "Budget violation",
            Metric::RosViol => "RoS violation",
        }
    }

    fn extract(&self, row: &SummaryRow) -> (f64, f64) {
        match self {
            Metric::Regret => (row.mean_regret, row.sd_regret),
            Metric::BudgetViol => (row.mean_budget_viol, row.sd_budget_viol),
            Metric::RosViol => (row.mean_ros_viol, row.sd_ros_viol),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 56.0;

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if !(1e-2..1e5).contains(&a) {
        format!("{x:.2e}")
    } else if a >= 100.0 {
        format!("{x:.0}")
    } else {
        format!("{x:.2}")
    }
}

/// Points of one series: (horizon, mean, sd).
type SeriesPoints = Vec<(f64, f64, f64)>;

/// Render the chart for one metric. Series appear in the fixed algorithm
/// order; a series with a single horizon renders as a point marker with no
/// band.
pub fn render_chart_svg(rows: &[SummaryRow], metric: Metric) -> String {
    let mut series: Vec<(Algorithm, SeriesPoints)> = Vec::new();
    for &algo in Algorithm::ALL.iter() {
        let mut pts: SeriesPoints = rows
            .iter()
            .filter(|r| r.algorithm == algo)
            .map(|r| {
                let (mean, sd) = metric.extract(r);
                (r.horizon as f64, mean, sd)
            })
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if !pts.is_empty() {
            series.push((algo, pts));
        }
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, pts) in &series {
        for &(t, mean, sd) in pts {
            x_min = x_min.min(t);
            x_max = x_max.max(t);
            y_min = y_min.min(mean - sd);
            y_max = y_max.max(mean + sd);
        }
    }
    if series.is_empty() {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = move |t: f64| LEFT + (t - x_min) / (x_max - x_min) * plot_w;
    let sy = move |v: f64| TOP + (y_max - v) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        fmt2(LEFT + plot_w / 2.0),
        metric.title()
    );

    // Bands first so lines draw over them.
    for (algo, pts) in &series {
        if pts.len() < 2 {
            continue;
        }
        let mut path = String::new();
        for (i, &(t, mean, sd)) in pts.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            let _ = write!(path, "{}{} {} ", cmd, fmt2(sx(t)), fmt2(sy(mean + sd)));
        }
        for &(t, mean, sd) in pts.iter().rev() {
            let _ = write!(path, "L{} {} ", fmt2(sx(t)), fmt2(sy(mean - sd)));
        }
        path.push('Z');
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"{}\" fill-opacity=\"0.15\" stroke=\"none\"/>",
            path.trim_end(),
            algo.color()
        );
    }

    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt2(LEFT),
        fmt2(TOP + plot_h),
        fmt2(LEFT + plot_w),
        fmt2(TOP + plot_h)
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        fmt2(LEFT),
        fmt2(TOP),
        fmt2(LEFT),
        fmt2(TOP + plot_h)
    );

    // X ticks at each distinct horizon (up to 8, evenly thinned).
    let mut horizons: Vec<f64> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
        .collect();
    horizons.sort_by(|a, b| a.partial_cmp(b).unwrap());
    horizons.dedup();
    let stride = horizons.len().div_ceil(8).max(1);
    for t in horizons.iter().step_by(stride) {
        let x = sx(*t);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt2(x),
            fmt2(TOP + plot_h),
            fmt2(x),
            fmt2(TOP + plot_h + 5.0)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            fmt2(x),
            fmt2(TOP + plot_h + 18.0),
            fmt_tick(*t)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">T</text>",
        fmt2(LEFT + plot_w / 2.0),
        fmt2(HEIGHT - 14.0)
    );

    // Y ticks at min, mid, max.
    for frac in [0.0, 0.5, 1.0] {
        let v = y_min + frac * (y_max - y_min);
        let y = sy(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
            fmt2(LEFT - 5.0),
            fmt2(y),
            fmt2(LEFT),
            fmt2(y)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            fmt2(LEFT - 8.0),
            fmt2(y + 4.0),
            fmt_tick(v)
        );
    }

    // Mean lines and point markers.
    for (algo, pts) in &series {
        if pts.len() >= 2 {
            let mut poly = String::new();
            for &(t, mean, _) in pts {
                let _ = write!(poly, "{},{} ", fmt2(sx(t)), fmt2(sy(mean)));
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
                poly.trim_end(),
                algo.color()
            );
        }
        for &(t, mean, _) in pts {
            let _ = writeln!(
                svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>",
                fmt2(sx(t)),
                fmt2(sy(mean)),
                algo.color()
            );
        }
    }

    // Legend in fixed order.
    let mut ly = TOP + 8.0;
    for (algo, _) in &series {
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>",
            fmt2(LEFT + plot_w - 130.0),
            fmt2(ly - 10.0),
            algo.color()
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            fmt2(LEFT + plot_w - 112.0),
            fmt2(ly),
            algo.name()
        );
        ly += 18.0;
    }

    svg.push_str("</svg>\n");
    svg
}

/// Render and write the chart for one metric.
pub fn render_chart(rows: &[SummaryRow], metric: Metric, path: &Path) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, render_chart_svg(rows, metric))
}
