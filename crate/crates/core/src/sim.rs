//! The two generative models.
//!
//! The traditional model adds one edge per step and re-weights after every
//! edge. The Poisson model adds a batch of `1 + Poisson(λ)` edges per step,
//! all attached against the weights frozen at the start of the batch.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::graph::{rng_stream, DegreeState, ModelParams, RngStream};
use crate::theory::PmfGrid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("the Poisson model needs a batch rate lambda")]
    MissingLambda,
}

/// Frozen view of a [`DegreeState`] at a batch boundary.
///
/// Endpoint arrays keep growing during a batch; frozen sampling reads only
/// the first `edge_total` entries and node ids up to `node_count`, which is
/// exactly the state at the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSnapshot {
    node_count: u32,
    edge_total: u64,
}

impl BatchSnapshot {
    pub fn take(state: &DegreeState) -> BatchSnapshot {
        BatchSnapshot {
            node_count: state.node_count(),
            edge_total: state.edge_total(),
        }
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn edge_total(&self) -> u64 {
        self.edge_total
    }
}

/// `(M_k, |V(k)|)` after step `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Edges added since `G(0)` (the self-loop is not counted).
    pub edges: u64,
    pub nodes: u32,
}

/// Per-step record of a simulation run. `steps[0]` is `G(0)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimTrace {
    pub steps: Vec<TraceStep>,
    /// Full states captured at requested step indices.
    pub checkpoints: Vec<(usize, DegreeState)>,
}

impl SimTrace {
    fn start(n_steps: usize) -> SimTrace {
        let mut steps = Vec::with_capacity(n_steps + 1);
        steps.push(TraceStep { edges: 0, nodes: 1 });
        SimTrace {
            steps,
            checkpoints: Vec::new(),
        }
    }

    fn record(&mut self, state: &DegreeState, step: usize, checkpoints: &[usize]) {
        self.steps.push(TraceStep {
            edges: state.edge_total() - 1,
            nodes: state.node_count(),
        });
        if checkpoints.contains(&step) {
            self.checkpoints.push((step, state.clone()));
        }
    }

    /// Number of steps simulated.
    pub fn len(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draw from `1 + Poisson(λ)`.
pub fn sample_shifted_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    1 + sample_poisson(lambda, rng)
}

/// Exact Poisson variate: sequential inversion below 30, Hörmann's
/// transformed rejection (PTRS) above.
pub fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda < 30.0 {
        poisson_inversion(lambda, rng)
    } else {
        poisson_ptrs(lambda, rng)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut prob = (-lambda).exp();
    let mut cdf = prob;
    // the cap only matters when cdf saturates below u through rounding
    while u > cdf && k < 10_000 {
        k += 1;
        prob *= lambda / k as f64;
        cdf += prob;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= -lambda + k * loglam - ln_gamma(k + 1.0)
        {
            return k as u64;
        }
    }
}

/// One step of the traditional model: one new edge.
///
/// The in-target and the out-source are both drawn against the pre-step
/// state, so the two draws are conditionally independent given it.
pub fn step_traditional<R: Rng + ?Sized>(state: &mut DegreeState, params: &ModelParams, rng: &mut R) {
    let target = state.sample_in_target(params.delta_in(), None, rng);
    if rng.random_bool(params.p()) {
        state
            .spawn_node_with_edge(target)
            .expect("sampled target exists");
    } else {
        let source = state.sample_out_source(params.delta_out(), None, rng);
        state.record_edge(source, target).expect("sampled nodes exist");
    }
}

/// One step of the Poisson model: a batch of `ΔM = 1 + Poisson(λ)` edges
/// attached against the weights frozen at the batch start. Returns `ΔM`.
pub fn step_poisson<R: Rng + ?Sized>(
    state: &mut DegreeState,
    params: &ModelParams,
    rng: &mut R,
) -> Result<u64, SimError> {
    let lambda = params.lambda().ok_or(SimError::MissingLambda)?;
    let batch = sample_shifted_poisson(lambda, rng);
    let snapshot = BatchSnapshot::take(state);
    for _ in 0..batch {
        let spawn = rng.random_bool(params.p());
        let target = state.sample_in_target(params.delta_in(), Some(&snapshot), rng);
        if spawn {
            state
                .spawn_node_with_edge(target)
                .expect("sampled target exists");
        } else {
            let source = state.sample_out_source(params.delta_out(), Some(&snapshot), rng);
            state.record_edge(source, target).expect("sampled nodes exist");
        }
    }
    Ok(batch)
}

/// `G(0)` followed by `n_steps` traditional steps.
pub fn simulate_traditional(params: &ModelParams, n_steps: usize, seed: u64) -> (DegreeState, SimTrace) {
    simulate_traditional_with(params, n_steps, &mut rng_stream(seed), &[])
}

/// As [`simulate_traditional`] with an explicit stream and checkpoint steps.
pub fn simulate_traditional_with(
    params: &ModelParams,
    n_steps: usize,
    rng: &mut RngStream,
    checkpoints: &[usize],
) -> (DegreeState, SimTrace) {
    let nodes = (params.p() * n_steps as f64 * 1.1) as usize + 16;
    let mut state = DegreeState::with_capacity(n_steps + 1, nodes);
    let mut trace = SimTrace::start(n_steps);
    if checkpoints.contains(&0) {
        trace.checkpoints.push((0, state.clone()));
    }
    for step in 1..=n_steps {
        step_traditional(&mut state, params, rng);
        trace.record(&state, step, checkpoints);
    }
    (state, trace)
}

/// `G(0)` followed by `n_steps` Poisson batches.
pub fn simulate_poisson(
    params: &ModelParams,
    n_steps: usize,
    seed: u64,
) -> Result<(DegreeState, SimTrace), SimError> {
    simulate_poisson_with(params, n_steps, &mut rng_stream(seed), &[])
}

/// As [`simulate_poisson`] with an explicit stream and checkpoint steps.
pub fn simulate_poisson_with(
    params: &ModelParams,
    n_steps: usize,
    rng: &mut RngStream,
    checkpoints: &[usize],
) -> Result<(DegreeState, SimTrace), SimError> {
    let lambda = params.lambda().ok_or(SimError::MissingLambda)?;
    let edges = ((lambda + 1.0) * n_steps as f64 * 1.05) as usize + 64;
    let mut state = DegreeState::with_capacity(edges, (edges as f64 * params.p()) as usize + 16);
    let mut trace = SimTrace::start(n_steps);
    if checkpoints.contains(&0) {
        trace.checkpoints.push((0, state.clone()));
    }
    for step in 1..=n_steps {
        step_poisson(&mut state, params, rng)?;
        trace.record(&state, step, checkpoints);
    }
    Ok((state, trace))
}

/// Empirical joint frequencies `#{v : I_v = m, O_v = l} / |V|` on
/// `0 ≤ m ≤ m_max`, `1 ≤ l ≤ l_max`; everything else goes to the overflow cell.
pub fn joint_degree_counts(state: &DegreeState, m_max: u32, l_max: u32) -> PmfGrid {
    let mut grid = PmfGrid::zeros(m_max, l_max);
    let n = state.node_count() as f64;
    let mut inside = 0.0;
    for (_, i, o) in state.iter() {
        if let Some(cell) = grid.get_mut(i, o) {
            *cell += 1.0 / n;
            inside += 1.0;
        }
    }
    grid.set_overflow(1.0 - inside / n);
    grid
}
