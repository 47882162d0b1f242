//! Explicit probability measures on `[q]^n`.

use crate::error::{guard, invalid, Result};
use crate::graph::Assignment;
use crate::stats::neumaier_sum;

/// Largest `q^n` stored densely.
pub const DENSE_LIMIT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMeasure {
    n: usize,
    q: usize,
    probs: Vec<f64>,
}

impl DenseMeasure {
    /// Probabilities over `[q]^n` in row-major order, first variable most significant.
    pub fn new(n: usize, q: usize, probs: Vec<f64>) -> Result<Self> {
        if n == 0 || q < 2 {
            return invalid(format!("a measure needs n >= 1 and q >= 2, got n = {n}, q = {q}"));
        }
        guard("dense measure size q^n", (q as f64).powi(n as i32), DENSE_LIMIT)?;
        if probs.len() != q.pow(n as u32) {
            return invalid(format!("expected {} probabilities, got {}", q.pow(n as u32), probs.len()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return invalid("probabilities must be nonnegative and finite");
        }
        let total = neumaier_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-10 {
            return invalid(format!("probabilities sum to {total}"));
        }
        Ok(Self { n, q, probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(n: usize, q: usize, mut weights: Vec<f64>) -> Result<Self> {
        let total = neumaier_sum(weights.iter().copied());
        if !(total > 0.0 && total.is_finite()) {
            return invalid("weights have no positive finite mass");
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(n, q, weights)
    }

    /// Normalizes `exp(log_weights)` stably.
    pub fn from_log_weights(n: usize, q: usize, log_weights: &[f64]) -> Result<Self> {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return invalid("log weights have no finite maximum");
        }
        Self::from_weights(n, q, log_weights.iter().map(|l| (l - max).exp()).collect())
    }

    /// `⊗_i marginals[i]`.
    pub fn product(marginals: &[Vec<f64>]) -> Result<Self> {
        let n = marginals.len();
        let q = marginals.first().map_or(0, Vec::len);
        if marginals.iter().any(|m| m.len() != q) {
            return invalid("marginals must share one color count");
        }
        guard("dense measure size q^n", (q as f64).powi(n as i32), DENSE_LIMIT)?;
        let probs = (0..q.pow(n as u32))
            .map(|idx| {
                let colors = Assignment::from_index(idx, n, q).colors;
                colors.iter().enumerate().map(|(i, &c)| marginals[i][c]).product()
            })
            .collect();
        Self::new(n, q, probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, colors: &[usize]) -> f64 {
        self.probs[colors.iter().fold(0, |acc, &c| acc * self.q + c)]
    }

    /// Law of `σ_i`.
    pub fn marginal(&self, i: usize) -> Vec<f64> {
        assert!(i < self.n);
        let stride = self.q.pow((self.n - 1 - i) as u32);
        let mut out = vec![0.0; self.q];
        for (idx, &p) in self.probs.iter().enumerate() {
            out[(idx / stride) % self.q] += p;
        }
        out
    }

    pub fn marginals(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.marginal(i)).collect()
    }

    /// Law of `σ_v ∈ [q]^ℓ` for a tuple `v` that may repeat coordinates.
    pub fn tuple_marginal(&self, v: &[usize]) -> Vec<f64> {
        assert!(v.iter().all(|&i| i < self.n));
        let strides: Vec<usize> = v.iter().map(|&i| self.q.pow((self.n - 1 - i) as u32)).collect();
        let mut out = vec![0.0; self.q.pow(v.len() as u32)];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let cell = strides.iter().fold(0, |acc, &s| acc * self.q + (idx / s) % self.q);
            out[cell] += p;
        }
        out
    }

    /// Total variation distance to the product of the marginals.
    pub fn product_distance(&self) -> f64 {
        let prod = Self::product(&self.marginals()).expect("marginals of a valid measure");
        crate::stats::total_variation(&self.probs, &prod.probs)
    }

    pub fn entropy(&self) -> f64 {
        crate::stats::entropy(&self.probs)
    }
}
