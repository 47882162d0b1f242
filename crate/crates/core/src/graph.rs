//! Factor graphs and the null, teacher–student and Nishimori samplers.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{guard, invalid, Result};
use crate::functionals::xi_unchecked;
use crate::model::ModelSpec;
use crate::simplex::Simplex;
use crate::stats::{ln_factorial, logsumexp, poisson, Categorical};

/// One wires–weight pair; the weight is an index into the model's atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub wires: Vec<usize>,
    pub atom: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorGraph {
    pub n: usize,
    pub factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn empty(n: usize) -> Self {
        Self { n, factors: Vec::new() }
    }

    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        if self.n == 0 {
            return invalid("a graph needs at least one variable");
        }
        for (a, f) in self.factors.iter().enumerate() {
            if f.wires.len() != model.k() {
                return invalid(format!("factor {a} has {} wires, expected k = {}", f.wires.len(), model.k()));
            }
            if f.wires.iter().any(|&v| v >= self.n) {
                return invalid(format!("factor {a} has a wire outside [0, {})", self.n));
            }
            if f.atom >= model.weights().len() {
                return invalid(format!("factor {a} references missing atom {}", f.atom));
            }
        }
        Ok(())
    }

    /// `ln ψ_G(σ) = Σ_a ln ψ_a(σ_{v_a})`.
    pub fn ln_weight(&self, model: &ModelSpec, colors: &[usize]) -> f64 {
        let shape = model.shape();
        let atoms = model.weights().atoms();
        self.factors
            .iter()
            .map(|f| {
                let idx = f.wires.iter().fold(0, |acc, &v| acc * shape.q + colors[v]);
                atoms[f.atom].table()[idx].ln()
            })
            .sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A coloring `σ ∈ [q]^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    pub colors: Vec<usize>,
}

impl Assignment {
    pub fn new(colors: Vec<usize>, q: usize) -> Result<Self> {
        if let Some(c) = colors.iter().find(|&&c| c >= q) {
            return invalid(format!("color {c} out of range for q = {q}"));
        }
        Ok(Self { colors })
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// Row-major decoding of `index ∈ [q^n]`, first variable most significant.
    pub fn from_index(mut index: usize, n: usize, q: usize) -> Self {
        let mut colors = vec![0; n];
        for slot in colors.iter_mut().rev() {
            *slot = index % q;
            index /= q;
        }
        Self { colors }
    }

    pub fn index(&self, q: usize) -> usize {
        self.colors.iter().fold(0, |acc, &c| acc * q + c)
    }
}

pub fn color_counts(colors: &[usize], q: usize) -> Vec<usize> {
    let mut counts = vec![0; q];
    for &c in colors {
        counts[c] += 1;
    }
    counts
}

/// `γ_σ(z) = |σ⁻¹(z)| / n`.
pub fn color_frequencies(sigma: &Assignment, q: usize) -> Simplex {
    let n = sigma.n() as f64;
    Simplex::new(color_counts(&sigma.colors, q).into_iter().map(|c| c as f64 / n).collect())
        .expect("frequencies of a nonempty assignment")
}

/// Factor count `m ~ Po(d n / k)`.
pub fn sample_m<R: Rng + ?Sized>(model: &ModelSpec, d: f64, n: usize, rng: &mut R) -> Result<usize> {
    if !(0.0..=model.d_max()).contains(&d) {
        return invalid(format!("d = {d} outside [0, d_max = {}]", model.d_max()));
    }
    Ok(poisson(rng, d * n as f64 / model.k() as f64) as usize)
}

/// `m` i.i.d. pairs from `unif([n]^k) ⊗ p`.
pub fn sample_null<R: Rng + ?Sized>(model: &ModelSpec, n: usize, m: usize, rng: &mut R) -> FactorGraph {
    assert!(n >= 1);
    let atoms = Categorical::new(model.weights().probs());
    let factors = (0..m)
        .map(|_| {
            let wires = (0..model.k()).map(|_| rng.gen_range(0..n)).collect();
            Factor { wires, atom: atoms.sample(rng) }
        })
        .collect();
    FactorGraph { n, factors }
}

/// `λ_γ(τ) = ψ̄(τ) Π_h γ(τ_h) / Ξ(γ)` over `[q]^k`.
pub fn factor_assignment_law(model: &ModelSpec, gamma: &[f64]) -> Vec<f64> {
    let shape = model.shape();
    let xi = xi_unchecked(model, gamma);
    let mut tau = vec![0; shape.k];
    model
        .mean_weight()
        .table()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            shape.decode_into(i, &mut tau);
            w * tau.iter().map(|&c| gamma[c]).product::<f64>() / xi
        })
        .collect()
}

/// `m` i.i.d. pairs with law `p(a) ψ_a(σ_v) / (n^k Ξ(γ_σ))`.
///
/// Two stages: the factor assignment `τ ~ λ_{γ_σ}`, then wires uniform within
/// the color classes `σ⁻¹(τ_h)`, then the atom tilted by `ψ_a(τ) / ψ̄(τ)`.
pub fn sample_teacher_student<R: Rng + ?Sized>(
    model: &ModelSpec,
    sigma: &Assignment,
    m: usize,
    rng: &mut R,
) -> FactorGraph {
    let n = sigma.n();
    let q = model.q();
    let gamma = color_frequencies(sigma, q);
    let lambda = Categorical::new(&factor_assignment_law(model, gamma.as_slice()));
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); q];
    for (v, &c) in sigma.colors.iter().enumerate() {
        classes[c].push(v);
    }
    let weights = model.weights();
    let shape = model.shape();
    let mut tilts: Vec<Option<Categorical>> = vec![None; shape.len()];
    let mut tau = vec![0; shape.k];
    let factors = (0..m)
        .map(|_| {
            let t = lambda.sample(rng);
            shape.decode_into(t, &mut tau);
            let wires = tau.iter().map(|&c| *classes[c].choose(rng).expect("class is nonempty")).collect();
            let tilt = tilts[t].get_or_insert_with(|| {
                let w: Vec<f64> = weights.iter().map(|(a, p)| p * a.table()[t]).collect();
                Categorical::new(&w)
            });
            Factor { wires, atom: tilt.sample(rng) }
        })
        .collect();
    FactorGraph { n, factors }
}

/// Exact law of the Nishimori ground truth `σ̂` by color-count class.
#[derive(Clone, Debug)]
pub struct NishimoriLaw {
    pub n: usize,
    pub m: usize,
    /// Color counts of each class.
    pub classes: Vec<Vec<usize>>,
    /// Normalized log probability of each class.
    pub log_probs: Vec<f64>,
    /// `ln Σ_σ γ*^n(σ) Ξ(γ_σ)^m`, i.e. `ln E[Z(G)]` under the null model.
    pub log_norm: f64,
    ln_gamma_star: Vec<f64>,
    ln_xi: Vec<f64>,
}

impl NishimoriLaw {
    /// `ln P(σ̂ = σ)` for a single assignment.
    pub fn log_prob(&self, model: &ModelSpec, colors: &[usize]) -> f64 {
        let gamma = color_frequencies(&Assignment { colors: colors.to_vec() }, model.q());
        let prior: f64 = colors.iter().map(|&c| self.ln_gamma_star[c]).sum();
        prior + self.m as f64 * xi_unchecked(model, gamma.as_slice()).ln() - self.log_norm
    }

    pub fn class_ln_xi(&self) -> &[f64] {
        &self.ln_xi
    }
}

/// All compositions of `n` into `q` nonnegative parts, in lexicographic order.
pub fn compositions(n: usize, q: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(left - x, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, q, &mut Vec::with_capacity(q), &mut out);
    out
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Class weights `multinomial · Π γ*(z)^{Γ_z} · Ξ(Γ/n)^m`, normalized in log space.
pub fn nishimori_weights(model: &ModelSpec, n: usize, m: usize) -> Result<NishimoriLaw> {
    if n == 0 {
        return invalid("n must be positive");
    }
    let q = model.q();
    guard("composition classes", ln_binomial(n + q - 1, q - 1).exp(), 1e7)?;
    let ln_gs: Vec<f64> = model.gamma_star().as_slice().iter().map(|g| g.ln()).collect();
    let classes = compositions(n, q);
    let mut ln_xi = Vec::with_capacity(classes.len());
    let raw: Vec<f64> = classes
        .iter()
        .map(|counts| {
            let gamma: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
            let lx = xi_unchecked(model, &gamma).ln();
            ln_xi.push(lx);
            let multinom = ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>();
            let prior: f64 = counts.iter().zip(&ln_gs).map(|(&c, l)| c as f64 * l).sum();
            multinom + prior + m as f64 * lx
        })
        .collect();
    let log_norm = logsumexp(&raw);
    let log_probs = raw.iter().map(|x| x - log_norm).collect();
    Ok(NishimoriLaw { n, m, classes, log_probs, log_norm, ln_gamma_star: ln_gs, ln_xi })
}

/// Draws `σ̂`: a class by its weight, then a uniform arrangement of that class.
pub fn sample_nishimori<R: Rng + ?Sized>(law: &NishimoriLaw, rng: &mut R) -> Assignment {
    let probs: Vec<f64> = law.log_probs.iter().map(|l| l.exp()).collect();
    let class = &law.classes[Categorical::new(&probs).sample(rng)];
    let mut colors: Vec<usize> = class.iter().enumerate().flat_map(|(z, &c)| std::iter::repeat_n(z, c)).collect();
    colors.shuffle(rng);
    Assignment { colors }
}

/// `σ_iid ~ γ*^{⊗n}`.
pub fn sample_iid<R: Rng + ?Sized>(model: &ModelSpec, n: usize, rng: &mut R) -> Assignment {
    let cat = Categorical::new(model.gamma_star().as_slice());
    Assignment { colors: (0..n).map(|_| cat.sample(rng)).collect() }
}
