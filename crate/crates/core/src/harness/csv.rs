//! Flat-file export: per-round traces, per-run metrics, the summary table,
//! and a JSON mirror of the summary. All numbers print with 12 significant
//! digits and LF line endings, so identical inputs yield identical bytes.

use crate::harness::{
    Algorithm, ExperimentOutput, LinRunTrace, MetricsSummary, RunTrace, SummaryRow,
};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

pub const TRACE_HEADER: &str =
    "seed,algo,T,t,bid,won,value,reward,spend,cum_reward,cum_spend,cum_value";
pub const SUMMARY_HEADER: &str =
    "algo,T,mean_regret,sd_regret,mean_budget_viol,sd_budget_viol,mean_ros_viol,sd_ros_viol";
pub const RUNS_HEADER: &str =
    "seed,algo,T,regret,budget_viol,budget_viol_pos,ros_viol,ros_viol_pos";
pub const LIN_TRACE_HEADER: &str = "seed,algo,T,t,action,loss,cum_regret,cum_cost1,cum_cost2";

/// Format with 12 significant digits: plain decimal in a moderate exponent
/// range (trailing zeros trimmed), scientific notation outside it.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let trimmed = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.')
        } else {
            &s
        };
        trimmed.to_string()
    } else {
        let s = format!("{x:.11e}");
        match s.split_once('e') {
            Some((mantissa, exponent)) => {
                let m = if mantissa.contains('.') {
                    mantissa.trim_end_matches('0').trim_end_matches('.')
                } else {
                    mantissa
                };
                format!("{m}e{exponent}")
            }
            None => s,
        }
    }
}

/// The files written by [`export_csv`].
#[derive(Debug, Clone)]
pub struct ExportedFiles {
    pub trace_csv: PathBuf,
    pub summary_csv: PathBuf,
    pub runs_csv: PathBuf,
    pub summary_json: PathBuf,
    /// Present only when linear-bandit runs exist.
    pub lin_trace_csv: Option<PathBuf>,
}

pub fn render_trace_csv(traces: &[RunTrace]) -> String {
    let mut out =
        String::with_capacity(64 + traces.iter().map(|t| t.rounds.len() * 64).sum::<usize>());
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for trace in traces {
        let (mut cum_reward, mut cum_spend, mut cum_value) = (0.0f64, 0.0f64, 0.0f64);
        for r in &trace.rounds {
            cum_reward += r.reward;
            cum_spend += r.spend;
            cum_value += r.value;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                trace.seed,
                trace.algorithm.name(),
                trace.horizon,
                r.t,
                fmt_sig(r.bid),
                u8::from(r.won),
                fmt_sig(r.value),
                fmt_sig(r.reward),
                fmt_sig(r.spend),
                fmt_sig(cum_reward),
                fmt_sig(cum_spend),
                fmt_sig(cum_value),
            );
        }
    }
    out
}

pub fn render_summary_csv(summary: &MetricsSummary) -> String {
    let mut out = String::new();
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for row in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.algorithm.name(),
            row.horizon,
            fmt_sig(row.mean_regret),
            fmt_sig(row.sd_regret),
            fmt_sig(row.mean_budget_viol),
            fmt_sig(row.sd_budget_viol),
            fmt_sig(row.mean_ros_viol),
            fmt_sig(row.sd_ros_viol),
        );
    }
    out
}

/// Per-run metrics, raw and clipped at zero, one row per run.
pub fn render_runs_csv(summary: &MetricsSummary) -> String {
    let mut out = String::new();
    out.push_str(RUNS_HEADER);
    out.push('\n');
    for run in &summary.runs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            run.seed,
            run.algorithm.name(),
            run.horizon,
            fmt_sig(run.regret),
            fmt_sig(run.budget_violation),
            fmt_sig(run.budget_violation.max(0.0)),
            fmt_sig(run.ros_violation),
            fmt_sig(run.ros_violation.max(0.0)),
        );
    }
    out
}

/// JSON mirror of summary.csv with identical field names.
pub fn render_summary_json(summary: &MetricsSummary) -> String {
    let mut out = String::from("[\n");
    for (i, row) in summary.rows.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"algo\": \"{}\", \"T\": {}, \"mean_regret\": {}, \"sd_regret\": {}, \"mean_budget_viol\": {}, \"sd_budget_viol\": {}, \"mean_ros_viol\": {}, \"sd_ros_viol\": {}}}",
            row.algorithm.name(),
            row.horizon,
            fmt_sig(row.mean_regret),
            fmt_sig(row.sd_regret),
            fmt_sig(row.mean_budget_viol),
            fmt_sig(row.sd_budget_viol),
            fmt_sig(row.mean_ros_viol),
            fmt_sig(row.sd_ros_viol),
        );
        out.push_str(if i + 1 < summary.rows.len() {
            ",\n"
        } else {
            "\n"
        });
    }
    out.push_str("]\n");
    out
}

pub fn render_lin_trace_csv(traces: &[LinRunTrace]) -> String {
    let mut out = String::new();
    out.push_str(LIN_TRACE_HEADER);
    out.push('\n');
    for trace in traces {
        for r in &trace.rounds {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                trace.seed,
                Algorithm::LinBandit.name(),
                trace.horizon,
                r.t,
                r.action,
                fmt_sig(r.loss),
                fmt_sig(r.cum_regret),
                fmt_sig(r.cum_cost1),
                fmt_sig(r.cum_cost2),
            );
        }
    }
    out
}

/// Write trace.csv, summary.csv, runs.csv, summary.json (and
/// linbandit_trace.csv when applicable) under `dir`.
pub fn export_csv(output: &ExperimentOutput, dir: &Path) -> io::Result<ExportedFiles> {
    fs::create_dir_all(dir)?;
    let trace_csv = dir.join("trace.csv");
    fs::write(&trace_csv, render_trace_csv(&output.traces))?;
    let summary_csv = dir.join("summary.csv");
    fs::write(&summary_csv, render_summary_csv(&output.summary))?;
    let runs_csv = dir.join("runs.csv");
    fs::write(&runs_csv, render_runs_csv(&output.summary))?;
    let summary_json = dir.join("summary.json");
    fs::write(&summary_json, render_summary_json(&output.summary))?;
    let lin_trace_csv = if output.lin_traces.is_empty() {
        None
    } else {
        let path = dir.join("linbandit_trace.csv");
        fs::write(&path, render_lin_trace_csv(&output.lin_traces))?;
        Some(path)
    };
    Ok(ExportedFiles {
        trace_csv,
        summary_csv,
        runs_csv,
        summary_json,
        lin_trace_csv,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "summary.csv line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Parse a summary.csv back into rows (used by the chart subcommand and the
/// round-trip tests).
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SUMMARY_HEADER => {}
        Some((_, header)) => {
            return Err(ParseError {
                line: 1,
                message: format!("unexpected header `{header}`"),
            })
        }
        None => {
            return Err(ParseError {
                line: 1,
                message: "empty file".to_string(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(ParseError {
                line: i + 1,
                message: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let algorithm = Algorithm::parse(fields[0]).ok_or_else(|| ParseError {
            line: i + 1,
            message: format!("unknown algorithm `{}`", fields[0]),
        })?;
        let horizon: u64 = fields[1].parse().map_err(|_| ParseError {
            line: i + 1,
            message: format!("bad horizon `{}`", fields[1]),
        })?;
        let num = |s: &str| -> Result<f64, ParseError> {
            s.parse::<f64>().map_err(|_| ParseError {
                line: i + 1,
                message: format!("bad number `{s}`"),
            })
        };
        rows.push(SummaryRow {
            algorithm,
            horizon,
            mean_regret: num(fields[2])?,
            sd_regret: num(fields[3])?,
            mean_budget_viol: num(fields[4])?,
            sd_budget_viol: num(fields[5])?,
            mean_ros_viol: num(fields[6])?,
            sd_ros_viol: num(fields[7])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::MetricsSummary;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.4), "0.4");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_sig(-1.5), "-1.5");
        assert_eq!(fmt_sig(20000.0), "20000");
        assert_eq!(fmt_sig(1.0e-7), "1e-7");
        assert_eq!(fmt_sig(1.23456789e15), "1.23456789e15");
        // 12 significant digits survive a parse round trip at this scale.
        let x = 123.456789012345;
        let parsed: f64 = fmt_sig(x).parse().unwrap();
        assert!((parsed - x).abs() < 1e-9);
    }

    #[test]
    fn sig_formatting_is_idempotent_through_parse() {
        for &x in &[0.4, -0.123456789012, 3.0, 99999.5, 1.7e-3, 2.5e14, 6.02e23] {
            let s1 = fmt_sig(x);
            let y: f64 = s1.parse().unwrap();
            let s2 = fmt_sig(y);
            assert_eq!(s1, s2, "x={x}");
        }
    }

    fn sample_summary() -> MetricsSummary {
        MetricsSummary {
            rows: vec![SummaryRow {
                algorithm: Algorithm::UcbRos,
                horizon: 100,
                mean_regret: 12.5,
                sd_regret: 1.25,
                mean_budget_viol: -3.0,
                sd_budget_viol: 0.5,
                mean_ros_viol: 0.75,
                sd_ros_viol: 0.1,
            }],
            runs: vec![],
            benchmark_value: 0.4,
            benchmark_mixture: vec![0.0, 0.0, 0.0, 1.0],
        }
    }

    #[test]
    fn empty_traces_give_header_only_files() {
        assert_eq!(render_trace_csv(&[]), format!("{TRACE_HEADER}\n"));
        let empty = MetricsSummary {
            rows: vec![],
            runs: vec![],
            benchmark_value: 0.0,
            benchmark_mixture: vec![],
        };
        assert_eq!(render_summary_csv(&empty), format!("{SUMMARY_HEADER}\n"));
        assert_eq!(render_runs_csv(&empty), format!("{RUNS_HEADER}\n"));
        assert_eq!(render_summary_json(&empty), "[\n]\n");
    }

    #[test]
    fn summary_round_trips_exactly() {
        let summary = sample_summary();
        let text = render_summary_csv(&summary);
        let rows = parse_summary_csv(&text).unwrap();
        assert_eq!(rows, summary.rows);
        // Re-render of the parse is byte-identical: the CSV is canonical.
        let again = render_summary_csv(&MetricsSummary {
            rows,
            runs: vec![],
            benchmark_value: 0.0,
            benchmark_mixture: vec![],
        });
        assert_eq!(text, again);
    }

    #[test]
    fn trace_rows_carry_prefix_sums() {
        use crate::harness::{RoundRecord, RunTrace};
        let trace = RunTrace {
            algorithm: Algorithm::UcbRos,
            horizon: 3,
            seed: 9,
            rounds: vec![
                RoundRecord {
                    t: 1,
                    bid: 1.0,
                    won: true,
                    value: 0.5,
                    reward: 0.5,
                    spend: 0.25,
                },
                RoundRecord {
                    t: 2,
                    bid: 0.0,
                    won: false,
                    value: 0.0,
                    reward: 0.0,
                    spend: 0.0,
                },
                RoundRecord {
                    t: 3,
                    bid: 1.0,
                    won: true,
                    value: 0.25,
                    reward: 0.25,
                    spend: 0.125,
                },
            ],
            cum_reward: 0.75,
            cum_spend: 0.375,
            cum_value: 0.75,
        };
        let text = render_trace_csv(&[trace]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "9,ucb_ros,3,1,1,1,0.5,0.5,0.25,0.5,0.25,0.5");
        assert_eq!(lines[2], "9,ucb_ros,3,2,0,0,0,0,0,0.5,0.25,0.5");
        assert_eq!(
            lines[3],
            "9,ucb_ros,3,3,1,1,0.25,0.25,0.125,0.75,0.375,0.75"
        );
    }

    #[test]
    fn malformed_summary_is_rejected_with_line_numbers() {
        let err = parse_summary_csv("bogus header\n").unwrap_err();
        assert_eq!(err.line, 1);
        let text = format!("{SUMMARY_HEADER}\nucb_ros,10,1,2,3\n");
        let err = parse_summary_csv(&text).unwrap_err();
        assert_eq!(err.line, 2);
    }
}
