use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use serde::Serialize;

use panet::estimators::{angular_samples, fit_pipeline, kde, Bandwidth, FitSummary, TailInput};
use panet::ingest::{
    daily_rates, day_label, degrees_from_log, filter_window, parse_edge_list, remove_admin_nodes, HourSet,
};
use panet::theory::{angular_density, interior_grid};

use crate::output::{emit, ensure_dir, fmt, header_line, json_report, write_csv_file};

const DAY: u64 = 86_400;

#[derive(Args, Serialize)]
pub struct FitArgs {
    /// Edge list: `src dst weight timestamp` per line, `%` comments.
    #[arg(long)]
    pub edges: PathBuf,
    /// Window as dates (YYYY-MM-DD, END inclusive) or epoch seconds (END exclusive).
    #[arg(long, num_args = 2, value_names = ["START", "END"])]
    pub window: Option<Vec<String>>,
    /// Local hours to drop, half-open `H1-H2` (1-8 drops 01:00 to 07:59).
    #[arg(long, default_value = "")]
    pub exclude_hours: String,
    /// Fixed offset from UTC in seconds for local hours and days.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub tz_offset: i64,
    /// Drop nodes with out-degree 0 and in-degree at least this.
    #[arg(long, value_name = "IN_MIN")]
    pub admin_filter: Option<u64>,
    /// Radius quantile for the angular sample.
    #[arg(long, default_value_t = 0.995)]
    pub quantile: f64,
    /// Points in the density grid.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

/// Epoch seconds of a window bound; dates are local midnights.
fn parse_bound(text: &str, tz_offset: i64, is_end: bool) -> Result<u64> {
    if let Ok(secs) = text.parse::<u64>() {
        return Ok(secs);
    }
    let date = NaiveDate::parse_from_str(text, "%Y-%m-%d")
        .with_context(|| format!("window bound {text:?} is neither a date nor epoch seconds"))?;
    let midnight = date.and_hms_opt(0, 0, 0).expect("valid time").and_utc().timestamp() - tz_offset;
    let t = midnight + if is_end { DAY as i64 } else { 0 };
    u64::try_from(t).with_context(|| format!("window bound {text:?} is before 1970"))
}

pub fn run(args: &FitArgs) -> Result<()> {
    let file = File::open(&args.edges).with_context(|| format!("cannot open {}", args.edges.display()))?;
    let log = parse_edge_list(BufReader::new(file))?.with_tz_offset(args.tz_offset);
    for issue in &log.issues {
        eprintln!("warning: line {}: {}", issue.line, issue.reason);
    }
    let excluded = HourSet::parse(&args.exclude_hours)?;
    let (start, end) = match &args.window {
        Some(w) => (parse_bound(&w[0], args.tz_offset, false)?, parse_bound(&w[1], args.tz_offset, true)?),
        None => {
            let ts: Vec<u64> = log.edges().iter().filter_map(|e| e.timestamp).collect();
            let first = ts.first().copied().unwrap_or(0);
            let last = ts.last().copied().unwrap_or(0);
            (first, last + 1)
        }
    };
    let mut log = filter_window(&log, start, end, excluded)?;
    if log.is_empty() {
        bail!("no edges left after the window and hour filters");
    }

    let mut dropped = 0;
    if let Some(in_min) = args.admin_filter {
        let nodes = degrees_from_log(&log);
        let (kept, n) = remove_admin_nodes(&nodes, in_min);
        let kept: HashSet<u64> = kept.iter().map(|d| d.label).collect();
        let admins: HashSet<u64> = nodes.iter().map(|d| d.label).filter(|l| !kept.contains(l)).collect();
        log = log.without_nodes(&admins);
        dropped = n;
    }

    let rates = daily_rates(&log)?;
    let lambda_daily = rates
        .mean_edge_rate()
        .context("no day has two events in one active stretch; daily rate undefined")?;
    let nodes = degrees_from_log(&log);
    let days = (end - start).div_ceil(DAY);
    let summary = FitSummary {
        node_total: nodes.len() as u64,
        edge_total: log.len() as u64,
        lambda_daily,
        active_hours: excluded.active_hours(),
        days,
        tail: TailInput::Degrees {
            in_degrees: nodes.iter().map(|d| d.in_deg).collect(),
            out_degrees: nodes.iter().map(|d| d.out_deg).collect(),
        },
    };
    let mut estimates = fit_pipeline(&summary)?;
    estimates
        .notes
        .push(format!("{} edges, {} nodes after filtering", log.len(), nodes.len()));
    if args.admin_filter.is_some() {
        estimates.notes.push(format!("{dropped} administration nodes removed"));
    }

    ensure_dir(&args.out)?;
    let header = header_line("fit", args)?;
    emit(
        Some(&args.out.join("estimates.json")),
        &json_report("fit", args, &estimates)?,
    )?;

    let cell = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    write_csv_file(
        &args.out.join("rates.csv"),
        &header,
        "day,edge_rate,node_rate,ratio",
        rates
            .days
            .iter()
            .map(|d| format!("{},{},{},{}", day_label(d.day), cell(d.edge_rate), cell(d.node_rate), cell(d.ratio))),
    )?;
    write_csv_file(
        &args.out.join("weekly_rates.csv"),
        &header,
        "week_start,edge_rate,node_rate,ratio",
        rates.weeks.iter().map(|w| {
            format!(
                "{},{},{},{}",
                day_label(w.first_day),
                cell(w.edge_rate),
                cell(w.node_rate),
                cell(w.ratio)
            )
        }),
    )?;

    let a = estimates.iota_in_hat / estimates.iota_out_hat;
    let pairs: Vec<(u64, u64)> = nodes.iter().map(|d| (d.in_deg, d.out_deg)).collect();
    let sample = angular_samples(&pairs, a, args.quantile)?;
    write_csv_file(
        &args.out.join("angular_samples.csv"),
        &header,
        "theta",
        sample.theta.iter().map(|t| fmt(*t)),
    )?;

    let grid = interior_grid(args.grid);
    let theory = angular_density(&estimates.model_params()?, &grid)?;
    let estimate = if sample.theta.len() >= 2 {
        kde(&sample.theta, &grid, Bandwidth::Silverman).ok()
    } else {
        None
    };
    write_csv_file(
        &args.out.join("kde.csv"),
        &header,
        "theta,kde,theory",
        grid.iter().enumerate().map(|(i, t)| {
            let k = estimate.as_ref().map(|e| fmt(e[i])).unwrap_or_default();
            format!("{},{},{}", fmt(*t), k, fmt(theory.density[i]))
        }),
    )
}
