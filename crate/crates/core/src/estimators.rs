//! Tail-index and model-parameter estimation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, ModelParams};
use crate::theory::{delta_from_tail, TheoryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("k = {k} out of range: need 1 <= k < {positive} (number of positive values)")]
    KOutOfRange { k: usize, positive: usize },
    #[error("Hill estimate undefined at k = {k}: the top {} values are all equal", k + 1)]
    Undefined { k: usize },
    #[error("no k in the scan gives a defined Hill estimate")]
    NoValidK,
    #[error("automatic bandwidth needs a non-degenerate sample")]
    DegenerateSample,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Params(#[from] GraphError),
}

/// Positive values in decreasing order with cached log prefix sums, so the
/// Hill estimate and KS distance for every `k` share one sort.
#[derive(Debug, Clone)]
pub struct TailSample {
    sorted: Vec<f64>,
    log_prefix: Vec<f64>,
    /// Distinct values (decreasing) with the number of entries `>=` each.
    groups: Vec<(f64, usize)>,
}

impl TailSample {
    /// Non-positive and non-finite values are discarded.
    pub fn new<T: Into<f64> + Copy>(values: &[T]) -> TailSample {
        let mut sorted: Vec<f64> = values
            .iter()
            .map(|&v| v.into())
            .filter(|v: &f64| *v > 0.0 && v.is_finite())
            .collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut log_prefix = Vec::with_capacity(sorted.len() + 1);
        log_prefix.push(0.0);
        let mut acc = 0.0;
        for v in &sorted {
            acc += v.ln();
            log_prefix.push(acc);
        }
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for (i, &v) in sorted.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if g.0 == v => g.1 = i + 1,
                _ => groups.push((v, i + 1)),
            }
        }
        TailSample {
            sorted,
            log_prefix,
            groups,
        }
    }

    pub fn positive_count(&self) -> usize {
        self.sorted.len()
    }

    pub fn distinct_count(&self) -> usize {
        self.groups.len()
    }

    fn check_k(&self, k: usize) -> Result<(), EstimateError> {
        if k == 0 || k >= self.sorted.len() {
            return Err(EstimateError::KOutOfRange {
                k,
                positive: self.sorted.len(),
            });
        }
        if self.sorted[0] == self.sorted[k] {
            return Err(EstimateError::Undefined { k });
        }
        Ok(())
    }

    /// Hill estimate from the `k` largest values.
    pub fn hill(&self, k: usize) -> Result<f64, EstimateError> {
        self.check_k(k)?;
        let mean_log = self.log_prefix[k] / k as f64 - self.sorted[k].ln();
        Ok(1.0 / mean_log)
    }

    /// Sup distance between the empirical tail of the `k` largest ratios
    /// `D_(j)/D_(k+1)` and the Pareto survival function `y^{-ι}`.
    pub fn ks_distance(&self, k: usize, iota: f64) -> Result<f64, EstimateError> {
        self.check_k(k)?;
        if !(iota > 0.0 && iota.is_finite()) {
            return Err(EstimateError::InvalidInput(format!("iota = {iota} must be positive")));
        }
        let base = self.sorted[k];
        let kf = k as f64;
        let mut above_prev = 0usize;
        let mut dist: f64 = 0.0;
        for &(v, through) in &self.groups {
            if v <= base {
                break;
            }
            let pareto = (v / base).powf(-iota);
            // S(y) just above and at the jump
            dist = dist
                .max((above_prev as f64 / kf - pareto).abs())
                .max((through as f64 / kf - pareto).abs());
            above_prev = through;
        }
        // y = 1: ratios strictly above 1
        dist = dist.max((above_prev as f64 / kf - 1.0).abs());
        Ok(dist)
    }

    /// Scan `k = 1..=positive-2` and return the `k` whose Hill fit has the
    /// smallest KS distance, preferring the smaller `k` on ties.
    pub fn min_distance_k(&self) -> Result<MinDistanceFit, EstimateError> {
        if self.distinct_count() < 3 {
            return Err(EstimateError::InvalidInput(format!(
                "need at least 3 distinct positive values, got {}",
                self.distinct_count()
            )));
        }
        let mut best: Option<MinDistanceFit> = None;
        for k in 1..self.sorted.len() - 1 {
            let Ok(iota) = self.hill(k) else { continue };
            let distance = self.ks_distance(k, iota)?;
            if best.as_ref().map_or(true, |b| distance < b.distance) {
                best = Some(MinDistanceFit {
                    k_star: k,
                    iota_hat: iota,
                    distance,
                });
            }
        }
        best.ok_or(EstimateError::NoValidK)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinDistanceFit {
    pub k_star: usize,
    pub iota_hat: f64,
    pub distance: f64,
}

/// Hill estimate `((1/k) Σ_{j≤k} ln(D_(j)/D_(k+1)))^{-1}`.
pub fn hill<T: Into<f64> + Copy>(values: &[T], k: usize) -> Result<f64, EstimateError> {
    TailSample::new(values).hill(k)
}

pub fn ks_distance<T: Into<f64> + Copy>(values: &[T], k: usize, iota: f64) -> Result<f64, EstimateError> {
    TailSample::new(values).ks_distance(k, iota)
}

pub fn min_distance_k<T: Into<f64> + Copy>(values: &[T]) -> Result<MinDistanceFit, EstimateError> {
    TailSample::new(values).min_distance_k()
}

/// `p̂ = nodes / edges`.
pub fn estimate_p(node_total: u64, edge_total: u64) -> Result<f64, EstimateError> {
    if edge_total == 0 {
        return Err(EstimateError::InvalidInput("edge total is zero".into()));
    }
    if node_total == 0 || node_total > edge_total {
        return Err(EstimateError::InvalidInput(format!(
            "node total {node_total} must lie in 1..={edge_total}"
        )));
    }
    Ok(node_total as f64 / edge_total as f64)
}

/// Daily rate to per-active-hour rate.
pub fn rescale_lambda(lambda_daily: f64, active_hours: u32) -> Result<f64, EstimateError> {
    if !(1..=24).contains(&active_hours) {
        return Err(EstimateError::InvalidInput(format!(
            "active hours {active_hours} must lie in 1..=24"
        )));
    }
    if !(lambda_daily >= 0.0 && lambda_daily.is_finite()) {
        return Err(EstimateError::InvalidInput(format!("daily rate {lambda_daily}")));
    }
    Ok(lambda_daily / active_hours as f64)
}

/// Angles `θ = I^a/(I^a + O)` of the nodes whose radius `R = I^a + O`
/// exceeds a quantile of all radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSample {
    pub theta: Vec<f64>,
    pub threshold: f64,
    pub a: f64,
}

pub fn polar(in_deg: u64, out_deg: u64, a: f64) -> (f64, f64) {
    let ia = if in_deg == 0 { 0.0 } else { (in_deg as f64).powf(a) };
    let r = ia + out_deg as f64;
    (ia / r, r)
}

/// Nearest-rank quantile: the `⌈q n⌉`-th smallest value.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    // absorb representation error such as 0.995 * 1000 = 994.999...
    let rank = (q * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

pub fn angular_samples(pairs: &[(u64, u64)], a: f64, quantile: f64) -> Result<AngularSample, EstimateError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(EstimateError::InvalidInput(format!("a = {a} must be positive")));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(EstimateError::InvalidInput(format!("quantile {quantile} must lie in (0, 1)")));
    }
    let polar: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|&&(i, o)| i > 0 || o > 0)
        .map(|&(i, o)| polar(i, o, a))
        .collect();
    if polar.is_empty() {
        return Err(EstimateError::InvalidInput("no nodes with positive degree".into()));
    }
    let mut radii: Vec<f64> = polar.iter().map(|p| p.1).collect();
    radii.sort_by(f64::total_cmp);
    let threshold = nearest_rank(&radii, quantile);
    Ok(AngularSample {
        theta: polar.iter().filter(|p| p.1 > threshold).map(|p| p.0).collect(),
        threshold,
        a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// `0.9 min(sd, IQR/1.34) n^{-1/5}`
    Silverman,
    Fixed(f64),
}

/// Silverman's rule of thumb; falls back to the standard deviation when the
/// interquartile range is zero.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64, EstimateError> {
    let n = samples.len();
    if n < 2 {
        return Err(EstimateError::InvalidInput("automatic bandwidth needs at least 2 samples".into()));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if !(sd > 0.0) {
        return Err(EstimateError::DegenerateSample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = interpolated_quantile(&sorted, 0.75) - interpolated_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (n as f64).powf(-0.2))
}

fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Gaussian kernel density on `[0, 1]`, reflected at both boundaries.
pub fn kde(samples: &[f64], grid: &[f64], bandwidth: Bandwidth) -> Result<Vec<f64>, EstimateError> {
    if samples.is_empty() {
        return Err(EstimateError::InvalidInput("empty sample".into()));
    }
    if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(EstimateError::InvalidInput(format!("sample {bad} outside [0, 1]")));
    }
    let h = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(samples)?,
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
        Bandwidth::Fixed(h) => {
            return Err(EstimateError::InvalidInput(format!("bandwidth {h} must be positive")))
        }
    };
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let phi = |z: f64| (-0.5 * z * z).exp();
    Ok(grid
        .iter()
        .map(|&x| {
            norm * samples
                .iter()
                .map(|&s| phi((x - s) / h) + phi((x + s) / h) + phi((x - 2.0 + s) / h))
                .sum::<f64>()
        })
        .collect())
}

/// Where the tail indices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailInput {
    /// Estimate both indices by the minimum-distance scan.
    Degrees { in_degrees: Vec<u64>, out_degrees: Vec<u64> },
    /// Use previously estimated indices.
    Fixed { iota_in: f64, iota_out: f64 },
}

/// Dataset summary consumed by [`fit_pipeline`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub node_total: u64,
    pub edge_total: u64,
    pub lambda_daily: f64,
    pub active_hours: u32,
    pub days: u64,
    pub tail: TailInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimates {
    pub lambda_daily: f64,
    pub lambda_hourly: f64,
    pub p_hat: f64,
    pub delta_in_hat: f64,
    pub delta_out_hat: f64,
    pub iota_in_hat: f64,
    pub iota_out_hat: f64,
    pub n_steps: u64,
    pub k_star_in: Option<usize>,
    pub k_star_out: Option<usize>,
    pub notes: Vec<String>,
}

impl ParamEstimates {
    /// Poisson-model parameters `(λ̂_h, p̂, δ̂_in, δ̂_out)`.
    pub fn model_params(&self) -> Result<ModelParams, EstimateError> {
        Ok(ModelParams::poisson(
            self.lambda_hourly,
            self.p_hat,
            self.delta_in_hat,
            self.delta_out_hat,
        )?)
    }
}

pub fn fit_pipeline(summary: &FitSummary) -> Result<ParamEstimates, EstimateError> {
    let p_hat = estimate_p(summary.node_total, summary.edge_total)?;
    let lambda_hourly = rescale_lambda(summary.lambda_daily, summary.active_hours)?;
    let mut notes = vec![format!(
        "p_hat = {} / {}",
        summary.node_total, summary.edge_total
    )];
    let (iota_in, iota_out, k_in, k_out) = match &summary.tail {
        TailInput::Degrees {
            in_degrees,
            out_degrees,
        } => {
            let fit_in = min_distance_k(&as_f64(in_degrees))?;
            let fit_out = min_distance_k(&as_f64(out_degrees))?;
            notes.push(format!(
                "iota_in by minimum distance at k = {} (D = {:.4})",
                fit_in.k_star, fit_in.distance
            ));
            notes.push(format!(
                "iota_out by minimum distance at k = {} (D = {:.4})",
                fit_out.k_star, fit_out.distance
            ));
            (fit_in.iota_hat, fit_out.iota_hat, Some(fit_in.k_star), Some(fit_out.k_star))
        }
        TailInput::Fixed { iota_in, iota_out } => {
            notes.push("tail indices supplied".into());
            (*iota_in, *iota_out, None, None)
        }
    };
    let (delta_in, delta_out) = delta_from_tail(iota_in, iota_out, p_hat)?;
    notes.push(format!(
        "lambda_hourly = {} / {}",
        summary.lambda_daily, summary.active_hours
    ));
    Ok(ParamEstimates {
        lambda_daily: summary.lambda_daily,
        lambda_hourly,
        p_hat,
        delta_in_hat: delta_in,
        delta_out_hat: delta_out,
        iota_in_hat: iota_in,
        iota_out_hat: iota_out,
        n_steps: summary.days * summary.active_hours as u64,
        k_star_in: k_in,
        k_star_out: k_out,
        notes,
    })
}

fn as_f64(values: &[u64]) -> Vec<f64> {
    values.iter().map(|&v| v as f64).collect()
}
