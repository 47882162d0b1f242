//! Constructors for the standard example models.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::xi_sup;
use crate::model::{ModelSpec, TableShape, WeightDistribution, WeightFunction};
use crate::simplex::Simplex;

/// Default degree bound for zoo models.
pub const DEFAULT_D_MAX: f64 = 10.0;

/// Largest admissible `ψ_min` shrunk by 1%, so every entry sits strictly inside the bounds.
pub fn fit_psi_min(weights: &WeightDistribution, gamma_star: &Simplex) -> f64 {
    let q = weights.shape().q as f64;
    let mut lo = (1.0 / q).min(gamma_star.min());
    for w in weights.atoms() {
        lo = lo.min(w.min()).min(1.0 / w.max());
    }
    0.99 * lo
}

fn assemble(weights: WeightDistribution, gamma_star: Simplex) -> Result<ModelSpec> {
    let psi_min = fit_psi_min(&weights, &gamma_star);
    ModelSpec::new(psi_min, weights, gamma_star, DEFAULT_D_MAX)
}

/// Merges atoms with bitwise identical tables.
fn merge_identical(atoms: Vec<(WeightFunction, f64)>) -> Vec<(WeightFunction, f64)> {
    let mut out: Vec<(WeightFunction, f64)> = Vec::new();
    for (w, p) in atoms {
        match out.iter_mut().find(|(v, _)| v == &w) {
            Some(slot) => slot.1 += p,
            None => out.push((w, p)),
        }
    }
    out
}

/// Constant weights: atom `i` is the table `≡ c_i` with probability `p_i`.
pub fn make_constant(q: usize, k: usize, atoms: &[(f64, f64)]) -> Result<ModelSpec> {
    let atoms = atoms
        .iter()
        .map(|&(c, p)| Ok((WeightFunction::constant(q, k, c)?, p)))
        .collect::<Result<Vec<_>>>()?;
    assemble(WeightDistribution::new(merge_identical(atoms))?, Simplex::uniform(q))
}

/// Soft NAE-SAT on `q = 2`: `ψ = ε` on a uniform pair `{x, x̄}`, 1 elsewhere.
pub fn make_nae_sat(k: usize, eps: f64) -> Result<ModelSpec> {
    if k < 2 {
        return invalid("NAE-SAT needs k >= 2");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps = {eps} must lie in (0, 1)"));
    }
    let shape = TableShape { q: 2, k };
    let prob = 2f64.powi(1 - k as i32);
    // One atom per complementary pair; represent each pair by the tuple with x_0 = 0.
    let atoms = (0..shape.len() / 2)
        .map(|rep| {
            let x = rep;
            let x_bar = shape.len() - 1 - rep;
            let table = (0..shape.len()).map(|y| if y == x || y == x_bar { eps } else { 1.0 }).collect();
            Ok((WeightFunction::new(2, k, table)?, prob))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(WeightDistribution::new(atoms)?, Simplex::uniform(2))
}

/// Spin of a color: `0 ↦ −1`, `1 ↦ +1`.
pub fn spin(color: usize) -> f64 {
    if color == 0 {
        -1.0
    } else {
        1.0
    }
}

fn check_symmetric(j_atoms: &[(f64, f64)]) -> Result<()> {
    for &(j, _) in j_atoms {
        let mass = |v: f64| j_atoms.iter().filter(|(x, _)| *x == v).map(|(_, p)| p).sum::<f64>();
        if (mass(j) - mass(-j)).abs() > 1e-12 {
            return invalid(format!("coupling law is not symmetric: P(J={j}) != P(J={})", -j));
        }
    }
    Ok(())
}

/// `E cosh(βJ)`.
pub fn kspin_normalizer(beta: f64, j_atoms: &[(f64, f64)]) -> f64 {
    j_atoms.iter().map(|&(j, p)| p * (beta * j).cosh()).sum()
}

/// k-spin model with weights `exp(−βJ Π_h s_h) / E cosh(βJ)`.
///
/// Dividing by `E cosh(βJ)` makes `ψ̄ ≡ 1` and leaves every Gibbs measure unchanged.
pub fn make_kspin(k: usize, beta: f64, j_atoms: &[(f64, f64)]) -> Result<ModelSpec> {
    if k == 0 {
        return invalid("k-spin needs k >= 1");
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return invalid(format!("beta = {beta} must be finite and nonnegative"));
    }
    if j_atoms.is_empty() {
        return invalid("coupling law needs at least one atom");
    }
    check_symmetric(j_atoms)?;
    let norm = kspin_normalizer(beta, j_atoms);
    let atoms = j_atoms
        .iter()
        .map(|&(j, p)| {
            let w = WeightFunction::from_fn(2, k, |tau| {
                let s: f64 = tau.iter().map(|&c| spin(c)).product();
                (-beta * j * s).exp() / norm
            })?;
            Ok((w, p))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(WeightDistribution::new(merge_identical(atoms))?, Simplex::uniform(2))
}

/// Parameters of the two-type composed stochastic block model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub q: usize,
    /// Colors of the first type; the rest form the second type.
    pub class1: Vec<usize>,
    pub c_eq1: f64,
    pub c_neq1: f64,
    pub c_eq2: f64,
    pub c_neq2: f64,
    pub c_cross: f64,
}

impl SbmParams {
    fn validate(&self) -> Result<()> {
        let q = self.q;
        if self.class1.is_empty() || self.class1.len() >= q {
            return invalid("the type partition must be nontrivial");
        }
        let mut seen = vec![false; q];
        for &c in &self.class1 {
            if c >= q || seen[c] {
                return invalid(format!("class color {c} is out of range or repeated"));
            }
            seen[c] = true;
        }
        let cs = [self.c_eq1, self.c_neq1, self.c_eq2, self.c_neq2, self.c_cross];
        if cs.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return invalid("SBM constants must be positive");
        }
        if self.c_eq1 > self.c_neq1 || self.c_eq2 > self.c_neq2 {
            return invalid("need c_eq_i <= c_neq_i");
        }
        if self.c_neq1 > self.c_cross || self.c_neq2 > self.c_cross {
            return invalid("need c_neq_i <= c_cross");
        }
        Ok(())
    }

    pub fn in_class1(&self, color: usize) -> bool {
        self.class1.contains(&color)
    }

    pub fn class_sizes(&self) -> (usize, usize) {
        (self.class1.len(), self.q - self.class1.len())
    }

    /// `(b_1, b_2)` of the reduced objective `f(x) = c↔ − b_1 x² − b_2 (1−x)²`.
    pub fn quadratic_coefficients(&self) -> (f64, f64) {
        let (q1, q2) = self.class_sizes();
        let b1 = (self.c_cross - self.c_neq1) + (self.c_neq1 - self.c_eq1) / q1 as f64;
        let b2 = (self.c_cross - self.c_neq2) + (self.c_neq2 - self.c_eq2) / q2 as f64;
        (b1, b2)
    }

    /// Type-1 mass of the maximizer; `None` when `ψ ≡ c↔` and every point maximizes.
    pub fn maximizer_mass(&self) -> Option<f64> {
        let (b1, b2) = self.quadratic_coefficients();
        if b1 + b2 == 0.0 {
            None
        } else {
            Some(b2 / (b1 + b2))
        }
    }

    pub fn reduced_objective(&self, x: f64) -> f64 {
        let (b1, b2) = self.quadratic_coefficients();
        self.c_cross - b1 * x * x - b2 * (1.0 - x) * (1.0 - x)
    }

    /// Uniform within each type with type-1 mass `x`.
    pub fn type_mixture(&self, x: f64) -> Result<Simplex> {
        let (q1, q2) = self.class_sizes();
        Simplex::new(
            (0..self.q)
                .map(|c| if self.in_class1(c) { x / q1 as f64 } else { (1.0 - x) / q2 as f64 })
                .collect(),
        )
    }

    pub fn weight(&self) -> Result<WeightFunction> {
        WeightFunction::from_fn(self.q, 2, |tau| {
            let (s, t) = (tau[0], tau[1]);
            match (self.in_class1(s), self.in_class1(t)) {
                (true, true) => {
                    if s == t {
                        self.c_eq1
                    } else {
                        self.c_neq1
                    }
                }
                (false, false) => {
                    if s == t {
                        self.c_eq2
                    } else {
                        self.c_neq2
                    }
                }
                _ => self.c_cross,
            }
        })
    }
}

/// Composed SBM with `γ*` at the closed-form maximizer of `Ξ`.
pub fn make_composed_sbm(params: &SbmParams) -> Result<ModelSpec> {
    params.validate()?;
    let gamma_star = match params.maximizer_mass() {
        Some(x) => params.type_mixture(x)?,
        None => Simplex::uniform(params.q),
    };
    assemble(WeightDistribution::single(params.weight()?), gamma_star)
}

/// Output kernel `ν_τ ∈ P([q_out])` for every input `τ ∈ [q]^k`, with a reference law `p*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelKernel {
    pub q: usize,
    pub k: usize,
    pub q_out: usize,
    /// Row-major `[q]^k × [q_out]`.
    pub nu: Vec<f64>,
    pub p_star: Simplex,
}

impl ChannelKernel {
    pub fn new(q: usize, k: usize, q_out: usize, nu: Vec<f64>, p_star: Simplex) -> Result<Self> {
        let rows = TableShape { q, k }.len();
        if q == 0 || k == 0 || q_out == 0 {
            return invalid("channel dimensions must be positive");
        }
        if nu.len() != rows * q_out {
            return invalid(format!("kernel has {} entries, expected {}", nu.len(), rows * q_out));
        }
        if p_star.q() != q_out {
            return invalid("p_star must live on the output alphabet");
        }
        if p_star.min() <= 0.0 {
            return invalid("p_star must be fully supported");
        }
        for row in nu.chunks_exact(q_out) {
            if row.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return invalid("every output law must be fully supported");
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return invalid(format!("output law sums to {s}, not 1"));
            }
        }
        Ok(Self { q, k, q_out, nu, p_star })
    }

    /// LDGM code behind a binary symmetric channel: the output is the parity
    /// of the inputs, flipped with probability `eta`.
    pub fn ldgm_bsc(k: usize, eta: f64, p_star: Simplex) -> Result<Self> {
        if !(eta > 0.0 && eta < 0.5) {
            return invalid(format!("eta = {eta} must lie in (0, 1/2)"));
        }
        let shape = TableShape { q: 2, k };
        let mut nu = Vec::with_capacity(shape.len() * 2);
        for i in 0..shape.len() {
            let parity = shape.decode(i).iter().sum::<usize>() % 2;
            for y in 0..2 {
                nu.push(if y == parity { 1.0 - eta } else { eta });
            }
        }
        Self::new(2, k, 2, nu, p_star)
    }

    pub fn output_law(&self, tau_index: usize) -> &[f64] {
        &self.nu[tau_index * self.q_out..(tau_index + 1) * self.q_out]
    }
}

/// Graphical channel: atom `z` has probability `p*(z)` and table `τ ↦ ν_τ(z) / p*(z)`.
///
/// Distinct outputs must give distinct tables. The one exception is a kernel
/// that ignores its input and equals `p*`, which is returned as the constant model `ψ ≡ 1`.
pub fn make_graphical_channel(kernel: &ChannelKernel) -> Result<ModelSpec> {
    let rows = TableShape { q: kernel.q, k: kernel.k }.len();
    let mut atoms = Vec::with_capacity(kernel.q_out);
    for z in 0..kernel.q_out {
        let pz = kernel.p_star[z];
        let table = (0..rows).map(|t| kernel.output_law(t)[z] / pz).collect();
        atoms.push((WeightFunction::new(kernel.q, kernel.k, table)?, pz));
    }
    let all_one = atoms.iter().all(|(w, _)| w.table().iter().all(|&x| (x - 1.0).abs() <= 1e-12));
    if all_one {
        return assemble(
            WeightDistribution::single(WeightFunction::constant(kernel.q, kernel.k, 1.0)?),
            Simplex::uniform(kernel.q),
        );
    }
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let same = atoms[i].0.table().iter().zip(atoms[j].0.table()).all(|(a, b)| (a - b).abs() <= 1e-12);
            if same {
                return invalid(format!(
                    "outputs {i} and {j} give identical weight tables; perturb p_star to separate them"
                ));
            }
        }
    }
    assemble(WeightDistribution::new(atoms)?, Simplex::uniform(kernel.q))
}

/// Checks that `γ*` of a zoo model attains `Ξ_sup` (used by tests and the CLI).
pub fn balanced(model: &ModelSpec) -> bool {
    crate::functionals::check_bal(model, 1e-9) && xi_sup(model).value.is_finite()
}

/// Builds a zoo model from `name:key=value,...`, e.g. `nae-sat:k=3,eps=0.5`.
///
/// Names: `nae-sat` (k, eps), `kspin` (k, beta, j; couplings ±j), `sbm` (q,
/// class1 as `0+1`, ceq1, cneq1, ceq2, cneq2, ccross), `channel-bsc` (k, eta,
/// pstar = mass of output 0) and `const` (q, k, c as `c1/c2/...` with equal
/// probabilities).
pub fn parse_zoo(spec: &str) -> Result<ModelSpec> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params: Vec<(String, String)> = Vec::new();
    for part in rest.split(',').filter(|s| !s.is_empty()) {
        match part.split_once('=') {
            Some((k, v)) => params.push((k.trim().to_string(), v.trim().to_string())),
            None => return invalid(format!("expected key=value, got {part:?}")),
        }
    }
    let known: &[&str] = match name {
        "nae-sat" => &["k", "eps"],
        "kspin" => &["k", "beta", "j"],
        "sbm" => &["q", "class1", "ceq1", "cneq1", "ceq2", "cneq2", "ccross"],
        "channel-bsc" => &["k", "eta", "pstar"],
        "const" => &["q", "k", "c"],
        _ => return invalid(format!("unknown zoo model {name:?}")),
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
        return invalid(format!("unknown parameter {k:?} for {name}"));
    }
    let raw = |key: &str| params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let real = |key: &str, default: f64| -> Result<f64> {
        match raw(key) {
            None => Ok(default),
            Some(v) => v.parse().or_else(|_| invalid(format!("{key} = {v:?} is not a number"))),
        }
    };
    let int = |key: &str, default: usize| -> Result<usize> {
        match raw(key) {
            None => Ok(default),
            Some(v) => v.parse().or_else(|_| invalid(format!("{key} = {v:?} is not an integer"))),
        }
    };
    match name {
        "nae-sat" => make_nae_sat(int("k", 3)?, real("eps", 0.5)?),
        "kspin" => {
            let j = real("j", 1.0)?;
            make_kspin(int("k", 2)?, real("beta", 1.0)?, &[(j, 0.5), (-j, 0.5)])
        }
        "sbm" => {
            let class1 = raw("class1")
                .unwrap_or("0")
                .split('+')
                .map(|c| c.parse().or_else(|_| invalid(format!("bad class color {c:?}"))))
                .collect::<Result<Vec<usize>>>()?;
            make_composed_sbm(&SbmParams {
                q: int("q", 3)?,
                class1,
                c_eq1: real("ceq1", 0.3)?,
                c_neq1: real("cneq1", 0.8)?,
                c_eq2: real("ceq2", 0.4)?,
                c_neq2: real("cneq2", 0.9)?,
                c_cross: real("ccross", 1.2)?,
            })
        }
        "channel-bsc" => {
            let p0 = real("pstar", 0.5)?;
            let p_star = Simplex::new(vec![p0, 1.0 - p0])?;
            make_graphical_channel(&ChannelKernel::ldgm_bsc(int("k", 3)?, real("eta", 0.1)?, p_star)?)
        }
        "const" => {
            let cs = raw("c")
                .unwrap_or("1")
                .split('/')
                .map(|c| c.parse().or_else(|_| invalid(format!("bad constant {c:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            let p = 1.0 / cs.len() as f64;
            let atoms: Vec<(f64, f64)> = cs.into_iter().map(|c| (c, p)).collect();
            make_constant(int("q", 2)?, int("k", 2)?, &atoms)
        }
        _ => unreachable!(),
    }
}

/// Small named instances covering every zoo family.
pub fn standard_zoo() -> Vec<(&'static str, ModelSpec)> {
    [
        "nae-sat:k=3,eps=0.5",
        "kspin:k=3,beta=0.5",
        "kspin:k=2,beta=0.8",
        "sbm:q=3,class1=0,ceq1=0.3,cneq1=0.8,ceq2=0.4,cneq2=0.9,ccross=1.2",
        "channel-bsc:k=3,eta=0.1",
        "const:q=2,k=2,c=1.3",
        "const:q=2,k=2,c=0.8/1.4",
    ]
    .into_iter()
    .map(|s| (s, parse_zoo(s).expect("standard zoo entry")))
    .collect()
}
