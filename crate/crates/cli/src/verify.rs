use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use panet::graph::{replication_seed, ModelParams};
use panet::sim::{simulate_poisson, simulate_traditional};
use panet::stats::{ks_two_sample, TestResult};
use panet::verify::{enumerate_traditional, growth_product, simulate_bi_embedding, Configuration};

use crate::output::{emit, json_report, pool};

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub oracle: Oracle,
    /// Report file; standard output when omitted.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone, Copy)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_in: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta_out: f64,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Oracle {
    /// Exact law of the traditional model after a few steps.
    Enumerate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        steps: usize,
    },
    /// Node 1 in-degree: simulator against the birth-immigration construction.
    Embedding {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Log-log slopes of the growth products against their exponents.
    Growth {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct EnumerationReport {
    total: f64,
    configurations: Vec<(Configuration, f64)>,
}

#[derive(Serialize)]
struct EmbeddingReport {
    simulator_mean: f64,
    embedding_mean: f64,
    ks: TestResult,
}

#[derive(Serialize)]
struct GrowthReport {
    in_target: f64,
    out_target: f64,
    mean_in_slope: f64,
    mean_out_slope: f64,
    in_slopes: Vec<f64>,
    out_slopes: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn run(args: &VerifyArgs) -> Result<()> {
    let text = match &args.oracle {
        Oracle::Enumerate { model, steps } => {
            let params = ModelParams::traditional(model.p, model.delta_in, model.delta_out)?;
            let exact = enumerate_traditional(&params, *steps)?;
            let report = EnumerationReport {
                total: exact.total(),
                configurations: exact.iter().map(|(c, p)| (c.clone(), p)).collect(),
            };
            json_report("verify enumerate", args, &report)?
        }
        Oracle::Embedding {
            model,
            steps,
            reps,
            seed,
        } => {
            let params = ModelParams::traditional(model.p, model.delta_in, model.delta_out)?;
            let (sim, emb): (Vec<f64>, Vec<f64>) = pool()?.install(|| {
                (0..*reps as u64)
                    .into_par_iter()
                    .map(|r| {
                        let a = simulate_traditional(&params, *steps, replication_seed(*seed, 2 * r)).0;
                        let b = simulate_bi_embedding(&params, *steps, replication_seed(*seed, 2 * r + 1));
                        (a.in_degrees()[0] as f64, b.in_degrees()[0] as f64)
                    })
                    .unzip()
            });
            let report = EmbeddingReport {
                simulator_mean: mean(&sim),
                embedding_mean: mean(&emb),
                ks: ks_two_sample(&sim, &emb),
            };
            json_report("verify embedding", args, &report)?
        }
        Oracle::Growth {
            model,
            lambda,
            steps,
            reps,
            seed,
        } => {
            let params = ModelParams::poisson(*lambda, model.p, model.delta_in, model.delta_out)?;
            let fits = pool()?.install(|| {
                (0..*reps as u64)
                    .into_par_iter()
                    .map(|r| {
                        let (_, trace) = simulate_poisson(&params, *steps, replication_seed(*seed, r))?;
                        Ok(growth_product(&trace, &params)?)
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let in_slopes: Vec<f64> = fits.iter().map(|g| g.in_slope).collect();
            let out_slopes: Vec<f64> = fits.iter().map(|g| g.out_slope).collect();
            let report = GrowthReport {
                in_target: fits[0].in_target,
                out_target: fits[0].out_target,
                mean_in_slope: mean(&in_slopes),
                mean_out_slope: mean(&out_slopes),
                in_slopes,
                out_slopes,
            };
            json_report("verify growth", args, &report)?
        }
    };
    emit(args.out.as_deref(), &text)
}
