//! Degree bookkeeping for a growing directed multigraph.
//!
//! Both generative models share one representation: per-node in/out degree
//! counts plus two *endpoint arrays* that hold one entry per unit of degree
//! ever granted. A node with in-degree `I_v` appears `I_v` times in
//! `in_endpoints`, so a uniform draw from the array is a draw proportional
//! to in-degree. Mixing that with a uniform draw over node ids gives the
//! linear attachment law `(I_v + δ) / (E + δ|V|)` exactly, in O(1).

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::BatchSnapshot;

/// Deterministic random stream used by every simulator in the crate.
pub type RngStream = rand_chacha::ChaCha8Rng;

/// Build the stream for `seed`. Identical seeds give identical streams on
/// every platform.
pub fn rng_stream(seed: u64) -> RngStream {
    RngStream::seed_from_u64(seed)
}

/// Derive the seed of replication `index` from a base seed (SplitMix64).
pub fn replication_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node {id} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange { id: u32, node_count: u32 },
    #[error("invalid model parameter: {0}")]
    InvalidParams(String),
}

/// 1-based node label. Labels coincide with creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    pub const FIRST: NodeId = NodeId(1);

    /// Returns `None` for 0.
    pub fn new(id: u32) -> Option<NodeId> {
        (id > 0).then_some(NodeId(id))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `(p, δ_in, δ_out)` and, for the batched model, the Poisson rate `λ`.
///
/// `lambda == None` selects the sequential (one edge per step) model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    p: f64,
    delta_in: f64,
    delta_out: f64,
    lambda: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: f64,
    delta_in: f64,
    delta_out: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = GraphError;
    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        ModelParams::new(raw.p, raw.delta_in, raw.delta_out, raw.lambda)
    }
}

impl From<ModelParams> for RawParams {
    fn from(m: ModelParams) -> Self {
        RawParams {
            p: m.p,
            delta_in: m.delta_in,
            delta_out: m.delta_out,
            lambda: m.lambda,
        }
    }
}

impl ModelParams {
    pub fn new(
        p: f64,
        delta_in: f64,
        delta_out: f64,
        lambda: Option<f64>,
    ) -> Result<ModelParams, GraphError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(GraphError::InvalidParams(format!("p = {p} must lie in (0, 1)")));
        }
        if !(delta_in > 0.0 && delta_in.is_finite()) {
            return Err(GraphError::InvalidParams(format!("delta_in = {delta_in} must be positive")));
        }
        if !(delta_out > 0.0 && delta_out.is_finite()) {
            return Err(GraphError::InvalidParams(format!(
                "delta_out = {delta_out} must be positive"
            )));
        }
        if let Some(l) = lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(GraphError::InvalidParams(format!("lambda = {l} must be positive")));
            }
        }
        Ok(ModelParams {
            p,
            delta_in,
            delta_out,
            lambda,
        })
    }

    /// Sequential model parameters.
    pub fn traditional(p: f64, delta_in: f64, delta_out: f64) -> Result<ModelParams, GraphError> {
        Self::new(p, delta_in, delta_out, None)
    }

    /// Batched model parameters.
    pub fn poisson(
        lambda: f64,
        p: f64,
        delta_in: f64,
        delta_out: f64,
    ) -> Result<ModelParams, GraphError> {
        Self::new(p, delta_in, delta_out, Some(lambda))
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn delta_in(&self) -> f64 {
        self.delta_in
    }
    pub fn delta_out(&self) -> f64 {
        self.delta_out
    }
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Same `(p, δ_in, δ_out)` with the batch rate replaced.
    pub fn with_lambda(self, lambda: Option<f64>) -> Result<ModelParams, GraphError> {
        Self::new(self.p, self.delta_in, self.delta_out, lambda)
    }
}

/// In/out degrees of every node plus the endpoint arrays used for sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeState {
    in_deg: Vec<u32>,
    out_deg: Vec<u32>,
    in_endpoints: Vec<NodeId>,
    out_endpoints: Vec<NodeId>,
}

impl Default for DegreeState {
    fn default() -> Self {
        Self::initial()
    }
}

impl DegreeState {
    /// `G(0)`: Node 1 with a self-loop, `I_1 = O_1 = 1`.
    pub fn initial() -> DegreeState {
        DegreeState {
            in_deg: vec![1],
            out_deg: vec![1],
            in_endpoints: vec![NodeId::FIRST],
            out_endpoints: vec![NodeId::FIRST],
        }
    }

    /// Reserve room for roughly `edges` edges and `nodes` nodes.
    pub fn with_capacity(edges: usize, nodes: usize) -> DegreeState {
        let mut s = Self::initial();
        s.in_endpoints.reserve(edges);
        s.out_endpoints.reserve(edges);
        s.in_deg.reserve(nodes);
        s.out_deg.reserve(nodes);
        s
    }

    pub fn node_count(&self) -> u32 {
        self.in_deg.len() as u32
    }

    /// `1 +` the number of edges added since `G(0)`.
    pub fn edge_total(&self) -> u64 {
        self.in_endpoints.len() as u64
    }

    pub fn in_degree(&self, v: NodeId) -> Option<u32> {
        self.in_deg.get(v.index()).copied()
    }

    pub fn out_degree(&self, v: NodeId) -> Option<u32> {
        self.out_deg.get(v.index()).copied()
    }

    /// In-degrees indexed by `node id - 1`.
    pub fn in_degrees(&self) -> &[u32] {
        &self.in_deg
    }

    /// Out-degrees indexed by `node id - 1`.
    pub fn out_degrees(&self) -> &[u32] {
        &self.out_deg
    }

    pub fn in_endpoints(&self) -> &[NodeId] {
        &self.in_endpoints
    }

    pub fn out_endpoints(&self) -> &[NodeId] {
        &self.out_endpoints
    }

    /// `(node, in, out)` for every node in label order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, u32, u32)> + '_ {
        self.in_deg
            .iter()
            .zip(&self.out_deg)
            .enumerate()
            .map(|(i, (&a, &b))| (NodeId(i as u32 + 1), a, b))
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if v.index() < self.in_deg.len() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                id: v.get(),
                node_count: self.node_count(),
            })
        }
    }

    /// Add the edge `src -> dst` between existing nodes.
    pub fn record_edge(&mut self, src: NodeId, dst: NodeId) -> Result<(), GraphError> {
        self.check(src)?;
        self.check(dst)?;
        self.in_deg[dst.index()] += 1;
        self.out_deg[src.index()] += 1;
        self.in_endpoints.push(dst);
        self.out_endpoints.push(src);
        Ok(())
    }

    /// Create node `w = |V| + 1` together with the edge `w -> dst`.
    pub fn spawn_node_with_edge(&mut self, dst: NodeId) -> Result<NodeId, GraphError> {
        self.check(dst)?;
        let w = NodeId(self.node_count() + 1);
        self.in_deg.push(0);
        self.out_deg.push(0);
        self.record_edge(w, dst)?;
        Ok(w)
    }

    /// Draw an attachment target with probability `(I_v + δ_in) / (E + δ_in |V|)`.
    ///
    /// With `frozen = Some(snapshot)` the law is evaluated on the state at the
    /// snapshot: only the endpoint prefix and node range recorded there are read.
    pub fn sample_in_target<R: Rng + ?Sized>(
        &self,
        delta_in: f64,
        frozen: Option<&BatchSnapshot>,
        rng: &mut R,
    ) -> NodeId {
        let (edges, nodes) = self.frame(frozen);
        mixture_draw(&self.in_endpoints[..edges], nodes, delta_in, rng)
    }

    /// Draw the source of an edge between existing nodes with probability
    /// `(O_w + δ_out) / (E + δ_out |V|)`, independently of any target draw.
    pub fn sample_out_source<R: Rng + ?Sized>(
        &self,
        delta_out: f64,
        frozen: Option<&BatchSnapshot>,
        rng: &mut R,
    ) -> NodeId {
        let (edges, nodes) = self.frame(frozen);
        mixture_draw(&self.out_endpoints[..edges], nodes, delta_out, rng)
    }

    fn frame(&self, frozen: Option<&BatchSnapshot>) -> (usize, u32) {
        match frozen {
            Some(s) => (s.edge_total() as usize, s.node_count()),
            None => (self.in_endpoints.len(), self.node_count()),
        }
    }

    /// Exact probability that [`sample_in_target`](Self::sample_in_target)
    /// returns `v` on the current state.
    pub fn in_target_probability(&self, v: NodeId, delta_in: f64) -> f64 {
        linear_weight(self.in_degree(v), delta_in, self.edge_total(), self.node_count())
    }

    /// Exact probability that [`sample_out_source`](Self::sample_out_source)
    /// returns `v` on the current state.
    pub fn out_source_probability(&self, v: NodeId, delta_out: f64) -> f64 {
        linear_weight(self.out_degree(v), delta_out, self.edge_total(), self.node_count())
    }

    /// Check every structural invariant in O(|V| + E).
    pub fn validate(&self) -> Result<(), String> {
        let n = self.in_deg.len();
        if n == 0 || self.out_deg.len() != n {
            return Err("degree vectors empty or of unequal length".into());
        }
        let e = self.in_endpoints.len();
        if self.out_endpoints.len() != e {
            return Err("endpoint arrays of unequal length".into());
        }
        let sum_in: u64 = self.in_deg.iter().map(|&d| d as u64).sum();
        let sum_out: u64 = self.out_deg.iter().map(|&d| d as u64).sum();
        if sum_in != e as u64 || sum_out != e as u64 {
            return Err(format!(
                "conservation violated: sum in = {sum_in}, sum out = {sum_out}, edges = {e}"
            ));
        }
        if let Some(i) = self.out_deg.iter().position(|&d| d == 0) {
            return Err(format!("node {} has out-degree 0", i + 1));
        }
        let mut seen_in = vec![0u32; n];
        let mut seen_out = vec![0u32; n];
        for (a, b) in self.in_endpoints.iter().zip(&self.out_endpoints) {
            if a.index() >= n || b.index() >= n {
                return Err("endpoint refers to a missing node".into());
            }
            seen_in[a.index()] += 1;
            seen_out[b.index()] += 1;
        }
        if seen_in != self.in_deg || seen_out != self.out_deg {
            return Err("endpoint multiplicities disagree with degrees".into());
        }
        Ok(())
    }
}

fn linear_weight(deg: Option<u32>, delta: f64, edges: u64, nodes: u32) -> f64 {
    match deg {
        Some(d) => (d as f64 + delta) / (edges as f64 + delta * nodes as f64),
        None => 0.0,
    }
}

/// With probability `E / (E + δ|V|)` pick a uniform endpoint, else a uniform
/// node in `1..=|V|`.
fn mixture_draw<R: Rng + ?Sized>(
    endpoints: &[NodeId],
    nodes: u32,
    delta: f64,
    rng: &mut R,
) -> NodeId {
    let e = endpoints.len() as f64;
    let by_degree = e / (e + delta * nodes as f64);
    if rng.random_bool(by_degree) {
        endpoints[rng.random_range(0..endpoints.len())]
    } else {
        NodeId(rng.random_range(1..=nodes))
    }
}
