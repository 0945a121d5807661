//! Limit laws of the joint in/out-degree distribution.
//!
//! Both models share the same limiting joint pmf
//!
//! ```text
//! p(m, l) = ∫_0^1 NB(δ_in; t^{1/ι_in})(m) · NB(1 + δ_out; t^{1/ι_out})(l - 1) dt
//! ```
//!
//! with `ι_in = 1 + δ_in p`, `ι_out = (1 + δ_out p)/(1 - p)` and
//! `NB(δ; q)(k) = Γ(δ+k)/(Γ(δ) k!) q^δ (1-q)^k`. Everything here is evaluated
//! by adaptive quadrature with log-gamma arithmetic.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::graph::ModelParams;
use crate::quad::{integrate, QuadOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out-degree l = 0 lies outside the support of the limit law (l >= 1)")]
    ZeroOutDegree,
    #[error(
        "tail indices (iota_in = {iota_in}, iota_out = {iota_out}) with p = {p} give a non-positive {which}"
    )]
    Infeasible {
        iota_in: f64,
        iota_out: f64,
        p: f64,
        which: &'static str,
    },
    #[error("angular grid is empty")]
    EmptyGrid,
    #[error("angular grid point {0} is not strictly inside (0, 1)")]
    GridOutOfRange(f64),
    #[error("quadrature did not reach tolerance (estimate {value}, error {error})")]
    Quadrature { value: f64, error: f64 },
}

/// Power-law exponents of the in- and out-degree survival functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailExponents {
    pub iota_in: f64,
    pub iota_out: f64,
}

pub fn tail_exponents(params: &ModelParams) -> TailExponents {
    let p = params.p();
    TailExponents {
        iota_in: 1.0 + params.delta_in() * p,
        iota_out: (1.0 + params.delta_out() * p) / (1.0 - p),
    }
}

/// Invert [`tail_exponents`]: `δ_in = (ι_in - 1)/p`, `δ_out = (ι_out (1-p) - 1)/p`.
pub fn delta_from_tail(iota_in: f64, iota_out: f64, p: f64) -> Result<(f64, f64), TheoryError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(TheoryError::InvalidArgument(format!("p = {p} must lie in (0, 1)")));
    }
    let delta_in = (iota_in - 1.0) / p;
    let delta_out = (iota_out * (1.0 - p) - 1.0) / p;
    let infeasible = |which| TheoryError::Infeasible {
        iota_in,
        iota_out,
        p,
        which,
    };
    if !(delta_in > 0.0) {
        return Err(infeasible("delta_in"));
    }
    if !(delta_out > 0.0) {
        return Err(infeasible("delta_out"));
    }
    Ok((delta_in, delta_out))
}

/// Negative binomial pmf with generating function `(s + (1-s)/q)^{-δ}`.
pub fn nb_pmf(delta: f64, q: f64, k: u64) -> Result<f64, TheoryError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(TheoryError::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(TheoryError::InvalidArgument(format!("q = {q} must lie in (0, 1]")));
    }
    Ok(NbTerm::new(delta, k).pmf_from_ln_q(q.ln()))
}

/// `Γ(δ+k)/(Γ(δ) k!)` cached in log form for repeated evaluation in `q`.
#[derive(Debug, Clone, Copy)]
struct NbTerm {
    delta: f64,
    k: f64,
    ln_coef: f64,
}

impl NbTerm {
    fn new(delta: f64, k: u64) -> NbTerm {
        let k = k as f64;
        NbTerm {
            delta,
            k,
            ln_coef: ln_gamma(delta + k) - ln_gamma(delta) - ln_gamma(k + 1.0),
        }
    }

    /// pmf at `q = exp(ln_q)`, with `ln_q <= 0`; `q = 0` maps to 0.
    fn pmf_from_ln_q(&self, ln_q: f64) -> f64 {
        if ln_q == 0.0 {
            return if self.k == 0.0 { 1.0 } else { 0.0 };
        }
        if ln_q == f64::NEG_INFINITY {
            return 0.0;
        }
        // ln(1 - q) without cancellation near q = 1
        let ln_1mq = (-ln_q.exp_m1()).ln();
        let tail = if self.k == 0.0 { 0.0 } else { self.k * ln_1mq };
        (self.ln_coef + self.delta * ln_q + tail).exp()
    }
}

/// `∫_0^1 Π_j NB(δ_j; t^{1/ι_j})(k_j) dt` for one or two factors.
///
/// With `t = e^{-s}` the log-integrand `-s + Σ_j [ln c_j - δ_j s/ι_j + k_j ln(1 - e^{-s/ι_j})]`
/// is concave on `(0, ∞)`, so it is integrated around its single peak.
fn limit_integral(factors: &[(NbTerm, f64)]) -> Result<f64, TheoryError> {
    let log_h = |s: f64| {
        let mut acc = -s;
        for (term, iota) in factors {
            let u = s / iota;
            acc += term.ln_coef - term.delta * u;
            if term.k > 0.0 {
                acc += term.k * (-(-u).exp_m1()).ln();
            }
        }
        acc
    };
    let slope = |s: f64| {
        let mut acc = -1.0;
        for (term, iota) in factors {
            let u = s / iota;
            acc -= term.delta / iota;
            if term.k > 0.0 {
                acc += term.k / iota / u.exp_m1();
            }
        }
        acc
    };

    let all_zero = factors.iter().all(|(t, _)| t.k == 0.0);
    let peak = if all_zero {
        0.0
    } else {
        let mut hi = 1.0;
        while slope(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let h_max = log_h(peak);
    let cutoff = 1e-17f64.ln();

    let mut width = 0.05 * peak.max(1e-3);
    let mut left = (peak - width).max(0.0);
    while left > 0.0 && log_h(left) - h_max > cutoff {
        width *= 2.0;
        left = (peak - width).max(0.0);
    }
    let mut width = 0.05 * peak.max(1e-3);
    let mut right = peak + width;
    while log_h(right) - h_max > cutoff {
        width *= 2.0;
        right = peak + width;
    }

    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let scaled = |s: f64| (log_h(s) - h_max).exp();
    let mut total = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for (a, b) in [(left, peak), (peak, right)] {
        if b > a {
            let r = integrate(scaled, a, b, opts);
            total += r.value;
            error += r.error;
            converged &= r.converged;
        }
    }
    if !converged && error > 1e-10 * total {
        return Err(TheoryError::Quadrature {
            value: total * h_max.exp(),
            error: error * h_max.exp(),
        });
    }
    Ok(total * h_max.exp())
}

/// Limit joint probability `p(m, l)`, `m ≥ 0`, `l ≥ 1`.
pub fn joint_limit_pmf(params: &ModelParams, m: u32, l: u32) -> Result<f64, TheoryError> {
    if l == 0 {
        return Err(TheoryError::ZeroOutDegree);
    }
    let iota = tail_exponents(params);
    limit_integral(&[
        (NbTerm::new(params.delta_in(), m as u64), iota.iota_in),
        (NbTerm::new(1.0 + params.delta_out(), l as u64 - 1), iota.iota_out),
    ])
}

/// Limit in-degree marginal `p^in(m)`.
pub fn marginal_in_pmf(params: &ModelParams, m: u32) -> Result<f64, TheoryError> {
    let iota = tail_exponents(params);
    limit_integral(&[(NbTerm::new(params.delta_in(), m as u64), iota.iota_in)])
}

/// Limit out-degree marginal `p^out(l)`, `l ≥ 1`.
pub fn marginal_out_pmf(params: &ModelParams, l: u32) -> Result<f64, TheoryError> {
    if l == 0 {
        return Err(TheoryError::ZeroOutDegree);
    }
    let iota = tail_exponents(params);
    limit_integral(&[(NbTerm::new(1.0 + params.delta_out(), l as u64 - 1), iota.iota_out)])
}

/// Tabulated probabilities on cells `(m, l)` with `0 ≤ m ≤ m_max`,
/// `1 ≤ l ≤ l_max`, plus the mass of everything outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfGrid {
    m_max: u32,
    l_max: u32,
    values: Vec<f64>,
    overflow: f64,
}

impl PmfGrid {
    pub fn zeros(m_max: u32, l_max: u32) -> PmfGrid {
        PmfGrid {
            m_max,
            l_max,
            values: vec![0.0; (m_max as usize + 1) * l_max as usize],
            overflow: 0.0,
        }
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    fn index(&self, m: u32, l: u32) -> Option<usize> {
        (m <= self.m_max && l >= 1 && l <= self.l_max)
            .then(|| m as usize * self.l_max as usize + (l as usize - 1))
    }

    pub fn get(&self, m: u32, l: u32) -> Option<f64> {
        self.index(m, l).map(|i| self.values[i])
    }

    pub fn get_mut(&mut self, m: u32, l: u32) -> Option<&mut f64> {
        self.index(m, l).map(move |i| &mut self.values[i])
    }

    /// Row-major values, `m` outer and `l` inner.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Mass outside the table.
    pub fn overflow(&self) -> f64 {
        self.overflow
    }

    pub fn set_overflow(&mut self, mass: f64) {
        self.overflow = mass.max(0.0);
    }

    /// Sum of the tabulated cells.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `(m, l, value)` for every cell.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        let cols = self.l_max as usize;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| ((i / cols) as u32, (i % cols) as u32 + 1, v))
    }

    /// Total variation between two distributions coarsened to the table
    /// cells plus one "everything else" cell.
    pub fn total_variation(&self, other: &PmfGrid) -> Result<f64, TheoryError> {
        if self.m_max != other.m_max || self.l_max != other.l_max {
            return Err(TheoryError::InvalidArgument("grids have different shapes".into()));
        }
        let cells: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(0.5 * (cells + (self.overflow - other.overflow).abs()))
    }
}

/// `p(m, l)` on the table `0 ≤ m ≤ m_max`, `1 ≤ l ≤ l_max`; the overflow cell
/// carries `1 - Σ table`.
pub fn joint_limit_grid(params: &ModelParams, m_max: u32, l_max: u32) -> Result<PmfGrid, TheoryError> {
    let mut grid = PmfGrid::zeros(m_max, l_max);
    for m in 0..=m_max {
        for l in 1..=l_max {
            *grid.get_mut(m, l).expect("in range") = joint_limit_pmf(params, m, l)?;
        }
    }
    grid.set_overflow(1.0 - grid.total());
    Ok(grid)
}

/// Normalised limit angular density on a grid of `θ` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularGrid {
    pub theta: Vec<f64>,
    pub density: Vec<f64>,
    /// `density[i] = exp(log_normalizer) * f(θ_i)` where `f` is the
    /// unnormalised density including its `p/δ_out` prefactor.
    pub log_normalizer: f64,
    /// The exponent `a = ι_in / ι_out` used for the angle transform.
    pub a: f64,
}

impl AngularGrid {
    /// Grid point of the largest density value.
    pub fn mode(&self) -> f64 {
        let i = self
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.theta[i]
    }

    /// Number of strict interior local maxima.
    pub fn local_maxima(&self) -> usize {
        let d = &self.density;
        let mut count = 0;
        let mut i = 1;
        while i + 1 < d.len() {
            if d[i] > d[i - 1] {
                // walk across a plateau
                let mut j = i;
                while j + 1 < d.len() && d[j + 1] == d[i] {
                    j += 1;
                }
                if j + 1 < d.len() && d[j + 1] < d[i] {
                    count += 1;
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        count
    }

    /// Trapezoid integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.theta, &self.density)
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `n` evenly spaced points `i/(n+1)`, strictly inside `(0, 1)`.
pub fn interior_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Log of the unnormalised limit angular density
///
/// ```text
/// f(θ) = (p/δ_out) θ^{δ_in/a - 1} (1-θ)^{δ_out} ∫_0^∞ t^{a-1+ι_in+δ_in+aδ_out} e^{-tθ^{1/a} - t^a(1-θ)} dt
/// ```
pub fn angular_log_density(params: &ModelParams, theta: f64) -> Result<f64, TheoryError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(TheoryError::GridOutOfRange(theta));
    }
    let iota = tail_exponents(params);
    let a = iota.iota_in / iota.iota_out;
    let (di, dout) = (params.delta_in(), params.delta_out());
    let power = a - 1.0 + iota.iota_in + di + a * dout;
    let ln_inner = ln_inner_integral(power, theta.powf(1.0 / a), a, 1.0 - theta)?;
    Ok((params.p() / dout).ln() + (di / a - 1.0) * theta.ln() + dout * (-theta).ln_1p() + ln_inner)
}

/// `ln ∫_0^∞ t^c e^{-s t - r t^a} dt` via `t = e^u`. The exponent
/// `g(u) = (c+1)u - s e^u - r e^{au}` is concave, so the integrand is
/// unimodal in `u`; the range is cut where it drops below `1e-14` of its peak.
fn ln_inner_integral(c: f64, s: f64, a: f64, r: f64) -> Result<f64, TheoryError> {
    let g = |u: f64| (c + 1.0) * u - s * u.exp() - r * (a * u).exp();
    let dg = |u: f64| (c + 1.0) - s * u.exp() - a * r * (a * u).exp();
    // bracket the root of g' (strictly decreasing)
    let (mut lo, mut hi) = (-1.0, 1.0);
    while dg(lo) < 0.0 {
        lo -= 2.0 * (hi - lo);
    }
    while dg(hi) > 0.0 {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dg(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let peak = 0.5 * (lo + hi);
    let g_max = g(peak);
    let cutoff = 1e-14f64.ln();
    let mut step = 0.25;
    let mut left = peak - step;
    while g(left) - g_max > cutoff {
        step *= 1.5;
        left -= step;
    }
    let mut step = 0.25;
    let mut right = peak + step;
    while g(right) - g_max > cutoff {
        step *= 1.5;
        right += step;
    }
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let lower = integrate(|u| (g(u) - g_max).exp(), left, peak, opts);
    let upper = integrate(|u| (g(u) - g_max).exp(), peak, right, opts);
    let total = lower.value + upper.value;
    if !(lower.converged && upper.converged) || !(total > 0.0) {
        return Err(TheoryError::Quadrature {
            value: total,
            error: lower.error + upper.error,
        });
    }
    Ok(g_max + total.ln())
}

/// Evaluate and normalise the limit angular density on `theta_grid` so that
/// its trapezoid integral over the grid is 1.
pub fn angular_density(params: &ModelParams, theta_grid: &[f64]) -> Result<AngularGrid, TheoryError> {
    if theta_grid.is_empty() {
        return Err(TheoryError::EmptyGrid);
    }
    let logs = theta_grid
        .iter()
        .map(|&th| angular_log_density(params, th))
        .collect::<Result<Vec<_>, _>>()?;
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
    let area = if theta_grid.len() > 1 {
        trapezoid(theta_grid, &scaled)
    } else {
        1.0
    };
    let iota = tail_exponents(params);
    Ok(AngularGrid {
        theta: theta_grid.to_vec(),
        density: scaled.iter().map(|v| v / area).collect(),
        log_normalizer: -shift - area.ln(),
        a: iota.iota_in / iota.iota_out,
    })
}
