//! Command-line entry point.
//!
//! Subcommands:
//!   run <config>        full experiment: runs, CSV/JSON export, charts
//!   benchmark <config>  print the benchmark value, optimizer, and slack
//!   chart <summary.csv> <metric>   re-render one chart from a summary
//!
//! Exit codes: 0 success, 1 validation error, 2 IO error.

use crate::harness::chart::{render_chart, Metric};
use crate::harness::csv::{export_csv, fmt_sig, parse_summary_csv};
use crate::harness::{benchmark_report, parse_config, run_experiment, HarnessError};
use std::path::{Path, PathBuf};

const USAGE: &str = "\
rosbid - constrained online bidding experiments

USAGE:
  rosbid run <config> [--seed-offset K] [--threads N]
  rosbid benchmark <config>
  rosbid chart <summary.csv> <metric> [--out PATH]

METRICS:
  regret | budget_viol | ros_viol

CONFIG:
  Flat key = value lines; `#` comments. Key reference in README.md.

EXIT CODES:
  0 success, 1 validation error, 2 io error
";

pub fn cli(args: Vec<String>) -> i32 {
    match run_cli(&args) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}");
            eprintln!("{USAGE}");
            1
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Validation(String),
    Io(std::io::Error),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io(io) => CliError::Io(io),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn run_cli(args: &[String]) -> Result<(), CliError> {
    let mut iter = args.iter();
    let Some(cmd) = iter.next() else {
        return Err(CliError::Usage("missing subcommand".to_string()));
    };
    match cmd.as_str() {
        "run" => cmd_run(&args[1..]),
        "benchmark" => cmd_benchmark(&args[1..]),
        "chart" => cmd_chart(&args[1..]),
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn read_config(path: &str) -> Result<crate::harness::ExperimentConfig, CliError> {
    // A config path that does not exist is a usage problem, not an IO
    // failure of the run itself.
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Validation(format!("config `{path}` not found"))
        } else {
            CliError::Io(e)
        }
    })?;
    parse_config(&text).map_err(|e| CliError::Validation(e.to_string()))
}

fn cmd_run(args: &[String]) -> Result<(), CliError> {
    let mut config_path: Option<&str> = None;
    let mut seed_offset: u64 = 0;
    let mut threads: Option<usize> = None;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--seed-offset" => {
                let v = iter
                    .next()
                    .ok_or_else(|| CliError::Usage("--seed-offset needs a value".into()))?;
                seed_offset = v
                    .parse()
                    .map_err(|_| CliError::Validation(format!("bad --seed-offset `{v}`")))?;
            }
            "--threads" => {
                let v = iter
                    .next()
                    .ok_or_else(|| CliError::Usage("--threads needs a value".into()))?;
                threads = Some(
                    v.parse()
                        .map_err(|_| CliError::Validation(format!("bad --threads `{v}`")))?,
                );
            }
            other if config_path.is_none() => config_path = Some(other),
            other => return Err(CliError::Usage(format!("unexpected argument `{other}`"))),
        }
    }
    let config_path =
        config_path.ok_or_else(|| CliError::Usage("run needs a config path".into()))?;
    let mut config = read_config(config_path)?;
    if seed_offset > 0 {
        for s in config.seeds.iter_mut() {
            *s += seed_offset;
        }
    }
    if let Some(n) = threads {
        config.threads = n;
    }

    let output = run_experiment(&config)?;
    let files = export_csv(&output, &config.output_dir).map_err(CliError::Io)?;
    for metric in [Metric::Regret, Metric::BudgetViol, Metric::RosViol] {
        let path = config.output_dir.join(format!("{}.svg", metric.name()));
        render_chart(&output.summary.rows, metric, &path).map_err(CliError::Io)?;
    }

    println!("benchmark V = {}", fmt_sig(output.summary.benchmark_value));
    println!(
        "benchmark w_lp = [{}]",
        output
            .summary
            .benchmark_mixture
            .iter()
            .map(|w| fmt_sig(*w))
            .collect::<Vec<_>>()
            .join(", ")
    );
    for row in &output.summary.rows {
        println!(
            "{} T={}: regret {} +- {}, budget_viol {} +- {}, ros_viol {} +- {}",
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
    println!("wrote {}", files.summary_csv.display());
    Ok(())
}

fn cmd_benchmark(args: &[String]) -> Result<(), CliError> {
    let [config_path] = args else {
        return Err(CliError::Usage(
            "benchmark needs exactly one config path".into(),
        ));
    };
    let config = read_config(config_path)?;
    let report = benchmark_report(&config.instance)?;
    println!("V = {}", fmt_sig(report.solution.value));
    println!(
        "w_lp = [{}]",
        report
            .solution
            .mixture
            .weights()
            .iter()
            .map(|w| fmt_sig(*w))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("rho = {}", fmt_sig(report.rho));
    println!("bid, x_bar, q_bar, kappa(delta_bid)");
    for (i, (bid, kappa)) in report.kappa_singletons.iter().enumerate() {
        let k = match kappa {
            Some(k) => fmt_sig(*k),
            None => "infeasible".to_string(),
        };
        println!(
            "{}, {}, {}, {}",
            fmt_sig(*bid),
            fmt_sig(report.moments.x_bar[i]),
            fmt_sig(report.moments.q_bar[i]),
            k
        );
    }
    println!("kappa(w_lp) = {}", fmt_sig(report.kappa_opt));
    if report.solution.low_value() {
        println!(
            "warning: V below {}; downstream normalizations degenerate",
            fmt_sig(crate::lp::LOW_VALUE_THRESHOLD)
        );
    }
    Ok(())
}

fn cmd_chart(args: &[String]) -> Result<(), CliError> {
    let mut positional: Vec<&str> = Vec::new();
    let mut out: Option<PathBuf> = None;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--out" => {
                let v = iter
                    .next()
                    .ok_or_else(|| CliError::Usage("--out needs a value".into()))?;
                out = Some(PathBuf::from(v));
            }
            other => positional.push(other),
        }
    }
    let [summary_path, metric_name] = positional[..] else {
        return Err(CliError::Usage(
            "chart needs a summary.csv path and a metric".into(),
        ));
    };
    let metric = Metric::parse(metric_name).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown metric `{metric_name}` (expected regret, budget_viol, or ros_viol)"
        ))
    })?;
    let text = std::fs::read_to_string(summary_path).map_err(CliError::Io)?;
    let rows = parse_summary_csv(&text).map_err(|e| CliError::Validation(e.to_string()))?;
    let out = out.unwrap_or_else(|| {
        Path::new(summary_path)
            .parent()
            .unwrap_or(Path::new("."))
            .join(format!("{}.svg", metric.name()))
    });
    render_chart(&rows, metric, &out).map_err(CliError::Io)?;
    println!("wrote {}", out.display());
    Ok(())
}
