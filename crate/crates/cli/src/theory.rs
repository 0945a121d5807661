use std::path::PathBuf;

use anyhow::Result;
use clap::{ArgGroup, Args};
use serde::Serialize;

use panet::graph::ModelParams;
use panet::theory::{angular_density, interior_grid, joint_limit_pmf, marginal_in_pmf, marginal_out_pmf};

use crate::output::{emit, fmt, header_line, write_csv};

#[derive(Args, Serialize)]
#[command(group(ArgGroup::new("query").required(true).args(["joint", "marginal_in", "marginal_out", "angular"])))]
pub struct TheoryArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta_in: f64,
    #[arg(long)]
    pub delta_out: f64,
    /// Joint probability of in-degree M and out-degree L.
    #[arg(long, num_args = 2, value_names = ["M", "L"])]
    pub joint: Option<Vec<u32>>,
    /// In-degree marginal at M.
    #[arg(long, value_name = "M")]
    pub marginal_in: Option<u32>,
    /// Out-degree marginal at L (L >= 1).
    #[arg(long, value_name = "L")]
    pub marginal_out: Option<u32>,
    /// Angular density on GRID interior points of (0, 1).
    #[arg(long, value_name = "GRID")]
    pub angular: Option<usize>,
    /// Tabulate every cell up to the given degree instead of one value.
    #[arg(long)]
    pub table: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &TheoryArgs) -> Result<()> {
    let params = ModelParams::traditional(args.p, args.delta_in, args.delta_out)?;
    let header = header_line("theory", args)?;
    let mut buf = Vec::new();
    if let Some(ml) = &args.joint {
        let (m, l) = (ml[0], ml[1]);
        let cells: Vec<(u32, u32)> = if args.table {
            (0..=m).flat_map(|i| (1..=l).map(move |j| (i, j))).collect()
        } else {
            vec![(m, l)]
        };
        let rows = cells
            .into_iter()
            .map(|(i, j)| Ok(format!("{i},{j},{}", fmt(joint_limit_pmf(&params, i, j)?))))
            .collect::<Result<Vec<_>>>()?;
        write_csv(&mut buf, &header, "m,l,probability", rows)?;
    } else if let Some(m) = args.marginal_in {
        let lo = if args.table { 0 } else { m };
        let rows = (lo..=m)
            .map(|i| Ok(format!("{i},{}", fmt(marginal_in_pmf(&params, i)?))))
            .collect::<Result<Vec<_>>>()?;
        write_csv(&mut buf, &header, "m,probability", rows)?;
    } else if let Some(l) = args.marginal_out {
        let lo = if args.table { 1.min(l) } else { l };
        let rows = (lo..=l)
            .map(|j| Ok(format!("{j},{}", fmt(marginal_out_pmf(&params, j)?))))
            .collect::<Result<Vec<_>>>()?;
        write_csv(&mut buf, &header, "l,probability", rows)?;
    } else if let Some(n) = args.angular {
        let grid = angular_density(&params, &interior_grid(n))?;
        let rows = grid
            .theta
            .iter()
            .zip(&grid.density)
            .map(|(t, d)| format!("{},{}", fmt(*t), fmt(*d)));
        write_csv(&mut buf, &header, "theta,density", rows)?;
    }
    emit(args.out.as_deref(), &String::from_utf8(buf)?)
}
