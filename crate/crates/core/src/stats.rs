//! Goodness-of-fit tests used by the oracles.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom for chi-square; 0 for KS.
    pub df: usize,
}

/// Pearson chi-square of `observed` counts against cell probabilities.
///
/// Cells with expected count below `min_expected` are pooled into one cell
/// (kept only if the pool itself reaches `min_expected`, otherwise merged
/// into the smallest remaining cell).
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> TestResult {
    assert_eq!(observed.len(), probs.len(), "one probability per cell");
    let n: u64 = observed.iter().sum();
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * nf;
        if e >= min_expected {
            cells.push((o as f64, e));
        } else {
            pool_o += o as f64;
            pool_e += e;
        }
    }
    if pool_e > 0.0 || pool_o > 0.0 {
        if pool_e >= min_expected || cells.is_empty() {
            cells.push((pool_o, pool_e));
        } else if let Some(small) = cells
            .iter_mut()
            .min_by(|a, b| a.1.total_cmp(&b.1))
        {
            small.0 += pool_o;
            small.1 += pool_e;
        }
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let df = cells.len().saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(df as f64).map(|d| d.sf(statistic)).unwrap_or(0.0)
    };
    TestResult {
        statistic,
        p_value,
        df,
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample KS test with the asymptotic Kolmogorov p-value
/// `Q(λ) = 2 Σ (-1)^{j-1} e^{-2 j² λ²}`, `λ = (√n_e + 0.12 + 0.11/√n_e) D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let statistic = ks_statistic(a, b);
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * statistic;
    TestResult {
        statistic,
        p_value: kolmogorov_q(lambda),
        df: 0,
    }
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
