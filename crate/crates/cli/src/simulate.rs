use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use panet::graph::{replication_seed, DegreeState, ModelParams};
use panet::sim::{joint_degree_counts, simulate_poisson, simulate_traditional};

use crate::output::{ensure_dir, fmt, header_line, pool, write_csv_file};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Traditional,
    Poisson,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta_in: f64,
    #[arg(long)]
    pub delta_out: f64,
    /// Batch rate; required for the Poisson model.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Edges (traditional) or batches (Poisson).
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Largest in-degree in the joint table.
    #[arg(long, default_value_t = 10)]
    pub grid_m: u32,
    /// Largest out-degree in the joint table.
    #[arg(long, default_value_t = 10)]
    pub grid_l: u32,
    /// Output directory.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn model_params(args: &SimulateArgs) -> Result<ModelParams> {
    Ok(match (args.model, args.lambda) {
        (Model::Poisson, Some(l)) => ModelParams::poisson(l, args.p, args.delta_in, args.delta_out)?,
        (Model::Poisson, None) => bail!("--lambda is required for the poisson model"),
        (Model::Traditional, None) => ModelParams::traditional(args.p, args.delta_in, args.delta_out)?,
        (Model::Traditional, Some(_)) => bail!("--lambda only applies to the poisson model"),
    })
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let params = model_params(args)?;
    ensure_dir(&args.out)?;
    let header = header_line("simulate", args)?;
    let width = args.reps.saturating_sub(1).to_string().len().max(3);

    let states: Vec<DegreeState> = pool()?.install(|| {
        (0..args.reps)
            .into_par_iter()
            .map(|r| {
                let seed = replication_seed(args.seed, r as u64);
                match args.model {
                    Model::Traditional => Ok(simulate_traditional(&params, args.steps, seed).0),
                    Model::Poisson => Ok(simulate_poisson(&params, args.steps, seed)?.0),
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut joint = vec![0.0; (args.grid_m as usize + 1) * args.grid_l as usize];
    let mut overflow = 0.0;
    for (r, state) in states.iter().enumerate() {
        let rows = state.iter().map(|(v, i, o)| format!("{v},{i},{o}"));
        let path = args.out.join(format!("degrees_{r:0width$}.csv"));
        write_csv_file(&path, &header, "node_id,in,out", rows)?;
        let grid = joint_degree_counts(state, args.grid_m, args.grid_l);
        for (acc, v) in joint.iter_mut().zip(grid.values()) {
            *acc += v / args.reps as f64;
        }
        overflow += grid.overflow() / args.reps as f64;
    }

    let l_max = args.grid_l as usize;
    let rows = joint
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{},{}", i / l_max, i % l_max + 1, fmt(*v)))
        .chain(std::iter::once(format!("rest,rest,{}", fmt(overflow))));
    write_csv_file(&args.out.join("joint.csv"), &header, "m,l,frequency", rows)
}
