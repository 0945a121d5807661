use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use panet::estimators::{angular_samples, kde, Bandwidth, ParamEstimates};
use panet::graph::{replication_seed, DegreeState};
use panet::sim::simulate_poisson;
use panet::theory::{angular_density, interior_grid};

use crate::output::{ensure_dir, fmt, header_line, pool, write_csv_file};

#[derive(Args, Serialize)]
pub struct CompareArgs {
    /// `estimates.json` written by `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Batches per replicate; defaults to the fitted step count.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, default_value_t = 0.995)]
    pub quantile: f64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Deserialize)]
struct FitFile {
    result: ParamEstimates,
}

/// `P(D >= d)` for `d = 1..=d_max`.
fn survival(degrees: &[u32], d_max: usize) -> Vec<f64> {
    let mut counts = vec![0usize; d_max + 2];
    for &d in degrees {
        counts[(d as usize).min(d_max + 1)] += 1;
    }
    let n = degrees.len() as f64;
    let mut at_least = vec![0.0; d_max + 2];
    let mut acc = 0usize;
    for d in (0..=d_max + 1).rev() {
        acc += counts[d];
        at_least[d] = acc as f64 / n;
    }
    at_least[1..=d_max].to_vec()
}

fn envelope(states: &[DegreeState], pick: fn(&DegreeState) -> &[u32]) -> Vec<String> {
    let d_max = states
        .iter()
        .flat_map(|s| pick(s).iter().copied())
        .max()
        .unwrap_or(1) as usize;
    let curves: Vec<Vec<f64>> = states.iter().map(|s| survival(pick(s), d_max)).collect();
    (0..d_max)
        .map(|i| {
            let mut col: Vec<f64> = curves.iter().map(|c| c[i]).collect();
            col.sort_by(f64::total_cmp);
            let n = col.len();
            let median = if n % 2 == 1 {
                col[n / 2]
            } else {
                0.5 * (col[n / 2 - 1] + col[n / 2])
            };
            format!("{},{},{},{}", i + 1, fmt(col[0]), fmt(median), fmt(col[n - 1]))
        })
        .collect()
}

pub fn run(args: &CompareArgs) -> Result<()> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let text = fs::read_to_string(&args.fit).with_context(|| format!("cannot read {}", args.fit.display()))?;
    let fit: FitFile = serde_json::from_str(&text).with_context(|| format!("{} is not a fit report", args.fit.display()))?;
    let est = fit.result;
    let params = est.model_params()?;
    let steps = args.steps.unwrap_or(est.n_steps) as usize;

    let states: Vec<DegreeState> = pool()?.install(|| {
        (0..args.reps)
            .into_par_iter()
            .map(|r| Ok(simulate_poisson(&params, steps, replication_seed(args.seed, r as u64))?.0))
            .collect::<Result<Vec<_>>>()
    })?;

    ensure_dir(&args.out)?;
    let header = header_line("compare", args)?;
    write_csv_file(
        &args.out.join("ccdf_in.csv"),
        &header,
        "degree,lower,median,upper",
        envelope(&states, DegreeState::in_degrees),
    )?;
    write_csv_file(
        &args.out.join("ccdf_out.csv"),
        &header,
        "degree,lower,median,upper",
        envelope(&states, DegreeState::out_degrees),
    )?;

    let a = est.iota_in_hat / est.iota_out_hat;
    let mut theta = Vec::new();
    for s in &states {
        let pairs: Vec<(u64, u64)> = s.iter().map(|(_, i, o)| (i as u64, o as u64)).collect();
        theta.extend(angular_samples(&pairs, a, args.quantile)?.theta);
    }
    let grid = interior_grid(args.grid);
    let theory = angular_density(&params, &grid)?;
    let estimate = kde(&theta, &grid, Bandwidth::Silverman).ok();
    write_csv_file(
        &args.out.join("angular.csv"),
        &header,
        "theta,kde,theory",
        grid.iter().enumerate().map(|(i, t)| {
            let k = estimate.as_ref().map(|e| fmt(e[i])).unwrap_or_default();
            format!("{},{},{}", fmt(*t), k, fmt(theory.density[i]))
        }),
    )
}
