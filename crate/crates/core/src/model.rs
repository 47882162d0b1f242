use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::simplex::Simplex;

/// Relative slack allowed when checking table entries against `[ψ_min, ψ_max]`.
const BOUND_SLACK: f64 = 1e-12;
/// Allowed deviation of the atom probabilities from a unit sum.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Shape of a `[q]^k` table; row-major with coordinate 0 most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableShape {
    pub q: usize,
    pub k: usize,
}

impl TableShape {
    pub fn len(&self) -> usize {
        self.q.pow(self.k as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, tau: &[usize]) -> usize {
        debug_assert_eq!(tau.len(), self.k);
        tau.iter().fold(0, |acc, &c| acc * self.q + c)
    }

    /// Writes the color tuple of `idx` into `out`.
    pub fn decode_into(&self, mut idx: usize, out: &mut [usize]) {
        for h in (0..self.k).rev() {
            out[h] = idx % self.q;
            idx /= self.q;
        }
    }

    pub fn decode(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.k];
        self.decode_into(idx, &mut out);
        out
    }
}

/// A weight table `[q]^k → (0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    shape: TableShape,
    table: Vec<f64>,
}

impl WeightFunction {
    pub fn new(q: usize, k: usize, table: Vec<f64>) -> Result<Self> {
        if q == 0 || k == 0 {
            return invalid("weight tables need q >= 1 and k >= 1");
        }
        let shape = TableShape { q, k };
        if table.len() != shape.len() {
            return invalid(format!("weight table has {} entries, expected q^k = {}", table.len(), shape.len()));
        }
        if let Some(x) = table.iter().find(|x| !x.is_finite() || **x <= 0.0) {
            return invalid(format!("weight entry {x} is not a positive finite number"));
        }
        Ok(Self { shape, table })
    }

    pub fn constant(q: usize, k: usize, c: f64) -> Result<Self> {
        Self::new(q, k, vec![c; q.pow(k as u32)])
    }

    /// Builds a table by evaluating `f` on every color tuple.
    pub fn from_fn(q: usize, k: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let shape = TableShape { q, k };
        let mut tau = vec![0; k];
        let table = (0..shape.len())
            .map(|i| {
                shape.decode_into(i, &mut tau);
                f(&tau)
            })
            .collect();
        Self::new(q, k, table)
    }

    pub fn q(&self) -> usize {
        self.shape.q
    }

    pub fn k(&self) -> usize {
        self.shape.k
    }

    pub fn shape(&self) -> TableShape {
        self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn get(&self, tau: &[usize]) -> f64 {
        self.table[self.shape.index(tau)]
    }

    pub fn min(&self) -> f64 {
        self.table.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.table.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Finite-support law `p` of the random weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightDistribution {
    atoms: Vec<WeightFunction>,
    probs: Vec<f64>,
}

impl WeightDistribution {
    pub fn new(atoms: Vec<(WeightFunction, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return invalid("weight distribution needs at least one atom");
        }
        let shape = atoms[0].0.shape();
        if atoms.iter().any(|(w, _)| w.shape() != shape) {
            return invalid("all atoms must share q and k");
        }
        if let Some((_, p)) = atoms.iter().find(|(_, p)| !(p.is_finite() && *p > 0.0)) {
            return invalid(format!("atom probability {p} is not positive"));
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return invalid(format!("atom probabilities sum to {total}, not 1"));
        }
        let (atoms, probs) = atoms.into_iter().unzip();
        Ok(Self { atoms, probs })
    }

    pub fn single(atom: WeightFunction) -> Self {
        Self { atoms: vec![atom], probs: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[WeightFunction] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&WeightFunction, f64)> {
        self.atoms.iter().zip(self.probs.iter().copied())
    }

    pub fn shape(&self) -> TableShape {
        self.atoms[0].shape()
    }

    /// Entrywise expectation `ψ̄`.
    pub fn mean_table(&self) -> Vec<f64> {
        let len = self.shape().len();
        (0..len)
            .map(|i| crate::stats::neumaier_sum(self.iter().map(|(w, p)| p * w.table[i])))
            .collect()
    }
}

/// The entrywise mean `ψ̄ = E[ψ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanWeight {
    shape: TableShape,
    table: Vec<f64>,
}

impl MeanWeight {
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn shape(&self) -> TableShape {
        self.shape
    }
}

/// Result of maximizing `Ξ` over the simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct XiSup {
    pub value: f64,
    pub maximizer: Simplex,
}

/// A complete model `(q, k, ψ_min, p, γ*, d_max)`.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    q: usize,
    k: usize,
    psi_min: f64,
    weights: WeightDistribution,
    gamma_star: Simplex,
    d_max: f64,
    mean: MeanWeight,
    xi_sup: OnceLock<XiSup>,
}

impl PartialEq for ModelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
            && self.k == other.k
            && self.psi_min == other.psi_min
            && self.weights == other.weights
            && self.gamma_star == other.gamma_star
            && self.d_max == other.d_max
    }
}

impl ModelSpec {
    pub fn new(psi_min: f64, weights: WeightDistribution, gamma_star: Simplex, d_max: f64) -> Result<Self> {
        let TableShape { q, k } = weights.shape();
        if gamma_star.q() != q {
            return invalid(format!("gamma_star has {} colors, the weights use q = {q}", gamma_star.q()));
        }
        if !(psi_min > 0.0 && psi_min < 1.0 / q as f64) {
            return invalid(format!("psi_min = {psi_min} must lie in (0, 1/q) = (0, {})", 1.0 / q as f64));
        }
        if !(d_max.is_finite() && d_max > 0.0) {
            return invalid(format!("d_max = {d_max} must be positive and finite"));
        }
        let psi_max = 1.0 / psi_min;
        let lo = psi_min * (1.0 - BOUND_SLACK);
        let hi = psi_max * (1.0 + BOUND_SLACK);
        for (a, atom) in weights.atoms().iter().enumerate() {
            if let Some(x) = atom.table().iter().find(|&&x| x < lo || x > hi) {
                return invalid(format!("atom {a} has entry {x} outside [{psi_min}, {psi_max}]"));
            }
        }
        if gamma_star.min() < lo {
            return invalid(format!("gamma_star has an entry below psi_min = {psi_min}"));
        }
        let mean = MeanWeight { shape: weights.shape(), table: weights.mean_table() };
        Ok(Self { q, k, psi_min, weights, gamma_star, d_max, mean, xi_sup: OnceLock::new() })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn psi_min(&self) -> f64 {
        self.psi_min
    }

    pub fn psi_max(&self) -> f64 {
        1.0 / self.psi_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn weights(&self) -> &WeightDistribution {
        &self.weights
    }

    pub fn gamma_star(&self) -> &Simplex {
        &self.gamma_star
    }

    pub fn mean_weight(&self) -> &MeanWeight {
        &self.mean
    }

    pub fn shape(&self) -> TableShape {
        TableShape { q: self.q, k: self.k }
    }

    /// Same weights with a different ground truth.
    pub fn with_gamma_star(&self, gamma_star: Simplex) -> Result<Self> {
        Self::new(self.psi_min, self.weights.clone(), gamma_star, self.d_max)
    }

    pub fn with_d_max(&self, d_max: f64) -> Result<Self> {
        Self::new(self.psi_min, self.weights.clone(), self.gamma_star.clone(), d_max)
    }

    pub(crate) fn xi_sup_cell(&self) -> &OnceLock<XiSup> {
        &self.xi_sup
    }

    pub fn to_json_value(&self) -> ModelSpecJson {
        ModelSpecJson {
            q: self.q,
            k: self.k,
            psi_min: self.psi_min,
            gamma_star: self.gamma_star.as_slice().to_vec(),
            d_max: self.d_max,
            atoms: self
                .weights
                .iter()
                .map(|(w, p)| AtomJson { prob: p, table: w.table().to_vec() })
                .collect(),
        }
    }

    /// Canonical serialization; field order is fixed, so equal models hash equally.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelSpecJson = serde_json::from_str(text)?;
        raw.into_model()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub prob: f64,
    pub table: Vec<f64>,
}

/// On-disk form of a [`ModelSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecJson {
    pub q: usize,
    pub k: usize,
    pub psi_min: f64,
    pub gamma_star: Vec<f64>,
    pub d_max: f64,
    pub atoms: Vec<AtomJson>,
}

impl ModelSpecJson {
    pub fn into_model(self) -> Result<ModelSpec> {
        let atoms = self
            .atoms
            .into_iter()
            .map(|a| Ok((WeightFunction::new(self.q, self.k, a.table)?, a.prob)))
            .collect::<Result<Vec<_>>>()?;
        let weights = WeightDistribution::new(atoms)?;
        ModelSpec::new(self.psi_min, weights, Simplex::new(self.gamma_star)?, self.d_max)
    }
}
