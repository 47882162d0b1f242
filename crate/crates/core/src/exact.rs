//! Brute-force ground truth on tiny instances.
//!
//! Everything here enumerates assignments `σ ∈ [q]^n` and, for the
//! graph-space quantities, every sequence of `m` (wires, atom) cells. Cells of
//! a single factor are ordered wires-major, atom-minor, and factor 0 is the
//! most significant digit of a graph cell.

use rayon::prelude::*;

use crate::error::{guard, invalid, Result};
use crate::functionals::xi_unchecked;
use crate::graph::{color_frequencies, nishimori_weights, Assignment, Factor, FactorGraph};
use crate::measure::DenseMeasure;
use crate::model::ModelSpec;
use crate::stats::{entropy, logsumexp, neumaier_sum};

/// Largest `q^n` for a single-graph computation.
pub const ASSIGNMENT_LIMIT: f64 = 1e8;
/// Largest `q^n · (n^k A)^m` for a graph-space computation.
pub const JOINT_LIMIT: f64 = 1e7;

const CHUNK: usize = 1 << 14;

fn ln_prior(ln_gs: &[f64], colors: &[usize]) -> f64 {
    colors.iter().map(|&c| ln_gs[c]).sum()
}

fn ln_gamma_star(model: &ModelSpec) -> Vec<f64> {
    model.gamma_star().as_slice().iter().map(|g| g.ln()).collect()
}

fn check_assignments(model: &ModelSpec, n: usize) -> Result<usize> {
    guard("assignment count q^n", (model.q() as f64).powi(n as i32), ASSIGNMENT_LIMIT)?;
    Ok(model.q().pow(n as u32))
}

/// `ln γ*^{⊗n}(σ) + ln ψ_G(σ)` for the assignments `start..end`.
fn log_weights(model: &ModelSpec, graph: &FactorGraph, ln_gs: &[f64], start: usize, end: usize) -> Vec<f64> {
    (start..end)
        .map(|idx| {
            let colors = Assignment::from_index(idx, graph.n, model.q()).colors;
            ln_prior(ln_gs, &colors) + graph.ln_weight(model, &colors)
        })
        .collect()
}

/// `ln Z(G)`, computed as a log-sum-exp over fixed chunks of assignments.
pub fn ln_partition_function(model: &ModelSpec, graph: &FactorGraph) -> Result<f64> {
    graph.validate(model)?;
    let total = check_assignments(model, graph.n)?;
    let ln_gs = ln_gamma_star(model);
    let parts: Vec<f64> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| logsumexp(&log_weights(model, graph, &ln_gs, c * CHUNK, ((c + 1) * CHUNK).min(total))))
        .collect();
    Ok(logsumexp(&parts))
}

/// `Z(G) = Σ_σ γ*^{⊗n}(σ) ψ_G(σ)`.
pub fn partition_function(model: &ModelSpec, graph: &FactorGraph) -> Result<f64> {
    Ok(ln_partition_function(model, graph)?.exp())
}

/// `φ(G) = ln Z(G) / n`.
pub fn free_entropy(model: &ModelSpec, graph: &FactorGraph) -> Result<f64> {
    Ok(ln_partition_function(model, graph)? / graph.n as f64)
}

/// `μ_G(σ) ∝ γ*^{⊗n}(σ) ψ_G(σ)`.
pub fn gibbs_measure(model: &ModelSpec, graph: &FactorGraph) -> Result<DenseMeasure> {
    graph.validate(model)?;
    let total = check_assignments(model, graph.n)?;
    let ln_gs = ln_gamma_star(model);
    let logs: Vec<f64> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| log_weights(model, graph, &ln_gs, c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect::<Vec<_>>()
        .concat();
    DenseMeasure::from_log_weights(graph.n, model.q(), &logs)
}

/// Support of the null model with `m` factors on `n` variables.
#[derive(Clone, Debug)]
pub struct GraphSpace {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub atoms: usize,
    ln_atom_probs: Vec<f64>,
}

impl GraphSpace {
    pub fn new(model: &ModelSpec, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return invalid("n must be positive");
        }
        let space = Self {
            n,
            m,
            k: model.k(),
            atoms: model.weights().len(),
            ln_atom_probs: model.weights().probs().iter().map(|p| p.ln()).collect(),
        };
        guard("graph cells (n^k A)^m", (space.factor_cells() as f64).powi(m as i32), JOINT_LIMIT)?;
        Ok(space)
    }

    /// Number of (wires, atom) cells for one factor.
    pub fn factor_cells(&self) -> usize {
        self.n.pow(self.k as u32) * self.atoms
    }

    pub fn len(&self) -> usize {
        self.factor_cells().pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn factor(&self, cell: usize) -> Factor {
        let mut w = cell / self.atoms;
        let mut wires = vec![0; self.k];
        for slot in wires.iter_mut().rev() {
            *slot = w % self.n;
            w /= self.n;
        }
        Factor { wires, atom: cell % self.atoms }
    }

    /// Single-factor cells of a graph cell, factor 0 first.
    pub fn digits(&self, mut cell: usize) -> Vec<usize> {
        let base = self.factor_cells();
        let mut out = vec![0; self.m];
        for slot in out.iter_mut().rev() {
            *slot = cell % base;
            cell /= base;
        }
        out
    }

    pub fn graph(&self, cell: usize) -> FactorGraph {
        FactorGraph { n: self.n, factors: self.digits(cell).into_iter().map(|c| self.factor(c)).collect() }
    }

    /// `ln P_null(G) = Σ_a (ln p(atom_a) − k ln n)`.
    pub fn ln_null_prob(&self, cell: usize) -> f64 {
        let wires = self.k as f64 * (self.n as f64).ln();
        self.digits(cell).into_iter().map(|c| self.ln_atom_probs[c % self.atoms] - wires).sum()
    }
}

/// Shared tables for the graph-space identities.
struct Enumeration {
    m: usize,
    qn: usize,
    cells: usize,
    ln_prior: Vec<f64>,
    /// `ln Ξ(γ_σ)`.
    ln_xi: Vec<f64>,
    ln_null: Vec<f64>,
    /// `ln ψ_G(σ)`, cell-major.
    w: Vec<f64>,
    /// `ln Z(G)`.
    ln_z: Vec<f64>,
}

impl Enumeration {
    fn new(model: &ModelSpec, n: usize, m: usize) -> Result<(Self, GraphSpace)> {
        let space = GraphSpace::new(model, n, m)?;
        let q = model.q();
        let qn = check_assignments(model, n)?;
        let cells = space.len();
        guard("joint cells q^n (n^k A)^m", qn as f64 * cells as f64, JOINT_LIMIT)?;
        let ln_gs = ln_gamma_star(model);
        let colors: Vec<Vec<usize>> = (0..qn).map(|i| Assignment::from_index(i, n, q).colors).collect();
        let ln_prior: Vec<f64> = colors.iter().map(|c| ln_prior(&ln_gs, c)).collect();
        let ln_xi: Vec<f64> = colors
            .iter()
            .map(|c| xi_unchecked(model, color_frequencies(&Assignment { colors: c.clone() }, q).as_slice()).ln())
            .collect();
        let single: Vec<Vec<f64>> = (0..space.factor_cells())
            .map(|s| {
                let g = FactorGraph { n, factors: vec![space.factor(s)] };
                colors.iter().map(|c| g.ln_weight(model, c)).collect()
            })
            .collect();
        let rows: Vec<(f64, Vec<f64>)> = (0..cells)
            .into_par_iter()
            .map(|cell| {
                let digits = space.digits(cell);
                let row: Vec<f64> = (0..qn).map(|s| digits.iter().map(|&d| single[d][s]).sum()).collect();
                (space.ln_null_prob(cell), row)
            })
            .collect();
        let mut ln_null = Vec::with_capacity(cells);
        let mut w = Vec::with_capacity(cells * qn);
        for (l, row) in rows {
            ln_null.push(l);
            w.extend(row);
        }
        let ln_z = (0..cells)
            .map(|c| {
                let terms: Vec<f64> = (0..qn).map(|s| ln_prior[s] + w[c * qn + s]).collect();
                logsumexp(&terms)
            })
            .collect();
        Ok((Self { m, qn, cells, ln_prior, ln_xi, ln_null, w, ln_z }, space))
    }

    /// `ln P(G*(σ) = G) = ln P_null(G) + ln ψ_G(σ) − m ln Ξ(γ_σ)`.
    fn ln_planted(&self, s: usize, cell: usize) -> f64 {
        self.ln_null[cell] + self.w[cell * self.qn + s] - self.m as f64 * self.ln_xi[s]
    }

    /// `ln μ_G(σ)`.
    fn ln_gibbs(&self, s: usize, cell: usize) -> f64 {
        self.ln_prior[s] + self.w[cell * self.qn + s] - self.ln_z[cell]
    }

    /// `ln P(σ_iid = σ, G*(σ_iid) = G)`.
    fn ln_joint(&self, s: usize, cell: usize) -> f64 {
        self.ln_prior[s] + self.ln_planted(s, cell)
    }
}

/// Exact law of `(σ_iid, G*(σ_iid))`.
#[derive(Clone, Debug)]
pub struct JointLaw {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub cells: usize,
    /// Probabilities indexed `σ · cells + cell`.
    pub probs: Vec<f64>,
}

impl JointLaw {
    pub fn prob(&self, sigma: usize, cell: usize) -> f64 {
        self.probs[sigma * self.cells + cell]
    }

    pub fn assignment_marginal(&self) -> Vec<f64> {
        self.probs.chunks(self.cells).map(|row| neumaier_sum(row.iter().copied())).collect()
    }

    pub fn graph_marginal(&self) -> Vec<f64> {
        let qn = self.probs.len() / self.cells;
        (0..self.cells).map(|c| neumaier_sum((0..qn).map(|s| self.prob(s, c)))).collect()
    }
}

pub fn exact_joint_law(model: &ModelSpec, n: usize, m: usize) -> Result<JointLaw> {
    let (e, _) = Enumeration::new(model, n, m)?;
    let probs = (0..e.qn)
        .flat_map(|s| (0..e.cells).map(move |c| (s, c)))
        .map(|(s, c)| e.ln_joint(s, c).exp())
        .collect();
    Ok(JointLaw { n, m, q: model.q(), cells: e.cells, probs })
}

fn mutual_information_of(joint: &JointLaw) -> f64 {
    let ps = joint.assignment_marginal();
    let pg = joint.graph_marginal();
    let mut terms = Vec::with_capacity(joint.probs.len());
    for (s, &a) in ps.iter().enumerate() {
        for (c, &b) in pg.iter().enumerate() {
            let p = joint.prob(s, c);
            if p > 0.0 {
                terms.push(p * (p / (a * b)).ln());
            }
        }
    }
    neumaier_sum(terms).max(0.0)
}

/// `I(σ_iid; G*(σ_iid)) / n`.
pub fn exact_mutual_information(model: &ModelSpec, n: usize, m: usize) -> Result<f64> {
    Ok(mutual_information_of(&exact_joint_law(model, n, m)?) / n as f64)
}

/// Per-variable terms of `I/n = H(γ*) − η̄ + δ̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiDecomposition {
    pub h_gamma_star: f64,
    /// Expected cross entropy of the posterior relative to the Gibbs measure, per variable.
    pub eta_bar: f64,
    /// Expected relative entropy of the posterior to the Gibbs measure, per variable.
    pub delta_bar: f64,
}

impl MiDecomposition {
    pub fn combined(&self) -> f64 {
        self.h_gamma_star - self.eta_bar + self.delta_bar
    }
}

/// Posterior `P(σ_iid = σ | G*(σ_iid) = G)` against the Gibbs measure `μ_G`.
pub fn mi_decomposition(model: &ModelSpec, n: usize, m: usize) -> Result<MiDecomposition> {
    let (e, _) = Enumeration::new(model, n, m)?;
    let per_cell: Vec<(f64, f64, f64)> = (0..e.cells)
        .into_par_iter()
        .map(|c| {
            let logs: Vec<f64> = (0..e.qn).map(|s| e.ln_joint(s, c)).collect();
            let ln_pg = logsumexp(&logs);
            let mut cross = Vec::with_capacity(e.qn);
            let mut rel = Vec::with_capacity(e.qn);
            for (s, l) in logs.iter().enumerate() {
                let ln_post = l - ln_pg;
                let post = ln_post.exp();
                if post > 0.0 {
                    let ln_mu = e.ln_gibbs(s, c);
                    cross.push(-post * ln_mu);
                    rel.push(post * (ln_post - ln_mu));
                }
            }
            (ln_pg.exp(), neumaier_sum(cross), neumaier_sum(rel))
        })
        .collect();
    let nf = n as f64;
    Ok(MiDecomposition {
        h_gamma_star: entropy(model.gamma_star().as_slice()),
        eta_bar: neumaier_sum(per_cell.iter().map(|(p, ce, _)| p * ce)) / nf,
        delta_bar: neumaier_sum(per_cell.iter().map(|(p, _, d)| p * d)) / nf,
    })
}

/// The terms of `δ = φ* − φ + δ′`, each computed separately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeEntropyReport {
    /// `D((σ_iid, G*(σ_iid)) ‖ (σ_Gibbs, G)) / n` by direct summation.
    pub delta: f64,
    /// `E[ln Z(G*(σ_iid))] / n`.
    pub phi_star: f64,
    /// `ln E[Z(G)] / n`.
    pub phi: f64,
    /// `D(σ_iid ‖ σ̂) / n`.
    pub delta_prime: f64,
}

impl RelativeEntropyReport {
    pub fn residual(&self) -> f64 {
        (self.delta - (self.phi_star - self.phi + self.delta_prime)).abs()
    }
}

pub fn relative_entropy_identity(model: &ModelSpec, n: usize, m: usize) -> Result<RelativeEntropyReport> {
    let (e, _) = Enumeration::new(model, n, m)?;
    let law = nishimori_weights(model, n, m)?;
    let nf = n as f64;
    let mut direct = Vec::with_capacity(e.qn * e.cells);
    let mut planted = Vec::with_capacity(e.qn * e.cells);
    for s in 0..e.qn {
        for c in 0..e.cells {
            let lp = e.ln_joint(s, c);
            let p = lp.exp();
            if p > 0.0 {
                let lq = e.ln_null[c] + e.ln_gibbs(s, c);
                direct.push(p * (lp - lq));
                planted.push(p * e.ln_z[c]);
            }
        }
    }
    let q = model.q();
    let prime = (0..e.qn).map(|s| {
        let colors = Assignment::from_index(s, n, q).colors;
        e.ln_prior[s].exp() * (e.ln_prior[s] - law.log_prob(model, &colors))
    });
    Ok(RelativeEntropyReport {
        delta: neumaier_sum(direct) / nf,
        phi_star: neumaier_sum(planted) / nf,
        phi: law.log_norm / nf,
        delta_prime: neumaier_sum(prime) / nf,
    })
}

/// `(1/n) D((σ_iid, G*(σ_iid)) ‖ (σ_Gibbs, G))`.
pub fn exact_relative_entropy(model: &ModelSpec, n: usize, m: usize) -> Result<f64> {
    Ok(relative_entropy_identity(model, n, m)?.delta.max(0.0))
}

fn nishimori_direct(e: &Enumeration, model: &ModelSpec, n: usize, m: usize) -> Result<Vec<f64>> {
    let law = nishimori_weights(model, n, m)?;
    let q = model.q();
    let ln_hat: Vec<f64> =
        (0..e.qn).map(|s| law.log_prob(model, &Assignment::from_index(s, n, q).colors)).collect();
    Ok((0..e.qn)
        .flat_map(|s| (0..e.cells).map(move |c| (s, c)))
        .map(|(s, c)| (ln_hat[s] + e.ln_planted(s, c)).exp())
        .collect())
}

/// Exact law of `(σ̂, G*(σ̂))`, indexed `σ · cells + cell`, with its graph space.
pub fn nishimori_joint_law(model: &ModelSpec, n: usize, m: usize) -> Result<(Vec<f64>, GraphSpace)> {
    let (e, space) = Enumeration::new(model, n, m)?;
    Ok((nishimori_direct(&e, model, n, m)?, space))
}

/// Both joint laws of the Nishimori pair, indexed `σ · cells + cell`.
fn nishimori_forms(model: &ModelSpec, n: usize, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (e, space) = Enumeration::new(model, n, m)?;
    let direct = nishimori_direct(&e, model, n, m)?;
    let columns: Vec<Vec<f64>> = (0..e.cells)
        .into_par_iter()
        .map(|c| {
            let pg = neumaier_sum((0..e.qn).map(|s| direct[s * e.cells + c]));
            let mu = gibbs_measure(model, &space.graph(c)).expect("graph from the enumerated space");
            mu.probs().iter().map(|p| p * pg).collect()
        })
        .collect();
    let mut gibbs = vec![0.0; e.qn * e.cells];
    for (c, col) in columns.into_iter().enumerate() {
        for (s, p) in col.into_iter().enumerate() {
            gibbs[s * e.cells + c] = p;
        }
    }
    Ok((direct, gibbs))
}

/// Total variation between `(σ̂, G*(σ̂))` and `(σ_Gibbs of G, G)` with `G ~ G*(σ̂)`.
pub fn verify_nishimori(model: &ModelSpec, n: usize, m: usize) -> Result<f64> {
    let (a, b) = nishimori_forms(model, n, m)?;
    Ok(crate::stats::total_variation(&a, &b))
}

/// The two finite-size Jensen equalities around `φ̄_a = ln E[Z(G)] / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JensenReport {
    pub phi_annealed: f64,
    /// `E φ(G*(σ̂))`.
    pub planted_mean: f64,
    /// `E φ(G)` under the null model.
    pub null_mean: f64,
    /// `D(G*(σ̂) ‖ G) / n`.
    pub kl_planted_null: f64,
    /// `D(G ‖ G*(σ̂)) / n`.
    pub kl_null_planted: f64,
}

impl JensenReport {
    pub fn planted_residual(&self) -> f64 {
        (self.planted_mean - (self.phi_annealed + self.kl_planted_null)).abs()
    }

    pub fn null_residual(&self) -> f64 {
        (self.null_mean - (self.phi_annealed - self.kl_null_planted)).abs()
    }
}

pub fn jensen_identities(model: &ModelSpec, n: usize, m: usize) -> Result<JensenReport> {
    let (e, _) = Enumeration::new(model, n, m)?;
    let law = nishimori_weights(model, n, m)?;
    let q = model.q();
    let ln_hat: Vec<f64> =
        (0..e.qn).map(|s| law.log_prob(model, &Assignment::from_index(s, n, q).colors)).collect();
    let ln_planted_graph: Vec<f64> = (0..e.cells)
        .map(|c| {
            let terms: Vec<f64> = (0..e.qn).map(|s| ln_hat[s] + e.ln_planted(s, c)).collect();
            logsumexp(&terms)
        })
        .collect();
    let nf = n as f64;
    let planted = neumaier_sum((0..e.cells).map(|c| ln_planted_graph[c].exp() * e.ln_z[c])) / nf;
    let null = neumaier_sum((0..e.cells).map(|c| e.ln_null[c].exp() * e.ln_z[c])) / nf;
    let kl_pn = neumaier_sum((0..e.cells).map(|c| ln_planted_graph[c].exp() * (ln_planted_graph[c] - e.ln_null[c]))) / nf;
    let kl_np = neumaier_sum((0..e.cells).map(|c| e.ln_null[c].exp() * (e.ln_null[c] - ln_planted_graph[c]))) / nf;
    Ok(JensenReport {
        phi_annealed: law.log_norm / nf,
        planted_mean: planted,
        null_mean: null,
        kl_planted_null: kl_pn,
        kl_null_planted: kl_np,
    })
}

/// Largest relative deviation of `E_null[ψ_G(σ)]` from `Ξ(γ_σ)^m` over all `σ`.
pub fn expected_weight_residual(model: &ModelSpec, n: usize, m: usize) -> Result<f64> {
    let (e, _) = Enumeration::new(model, n, m)?;
    let worst = (0..e.qn)
        .map(|s| {
            let lhs: Vec<f64> = (0..e.cells).map(|c| e.ln_null[c] + e.w[c * e.qn + s]).collect();
            ((logsumexp(&lhs) - e.m as f64 * e.ln_xi[s]).exp() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Largest log-scale violation of `ψ_min^{2m} ≤ μ_G(σ) / P(σ_iid = σ) ≤ ψ_max^{2m}`; zero when the bounds hold.
pub fn gibbs_bound_violation(model: &ModelSpec, n: usize, m: usize) -> Result<f64> {
    let (e, _) = Enumeration::new(model, n, m)?;
    let lo = 2.0 * m as f64 * model.psi_min().ln();
    let hi = 2.0 * m as f64 * model.psi_max().ln();
    let mut worst = 0.0f64;
    for c in 0..e.cells {
        for s in 0..e.qn {
            let r = e.ln_gibbs(s, c) - e.ln_prior[s];
            worst = worst.max(r - hi).max(lo - r);
        }
    }
    Ok(worst)
}

/// Largest total variation, over `σ`, between the law of `G*(σ)` and the
/// product of `m` copies of the single-factor tilt `p(a) ψ_a(σ_v)`.
pub fn planted_product_tv(model: &ModelSpec, n: usize, m: usize) -> Result<f64> {
    let (e, space) = Enumeration::new(model, n, m)?;
    let q = model.q();
    let one = GraphSpace::new(model, n, 1)?;
    let probs = model.weights().probs();
    let mut worst = 0.0f64;
    for s in 0..e.qn {
        let colors = Assignment::from_index(s, n, q).colors;
        let tilt: Vec<f64> = (0..one.factor_cells())
            .map(|c| {
                let f = one.factor(c);
                probs[f.atom] * FactorGraph { n, factors: vec![f] }.ln_weight(model, &colors).exp()
            })
            .collect();
        let total = neumaier_sum(tilt.iter().copied());
        let law: Vec<f64> = (0..e.cells).map(|c| e.ln_planted(s, c).exp()).collect();
        let product: Vec<f64> = (0..e.cells)
            .map(|c| space.digits(c).iter().map(|&d| tilt[d] / total).product())
            .collect();
        worst = worst.max(crate::stats::total_variation(&law, &product));
    }
    Ok(worst)
}

/// One line of `exact audit`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub identity: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl AuditRow {
    pub fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Every exact identity at `(n, m)`.
pub fn exact_audit(model: &ModelSpec, n: usize, m: usize) -> Result<Vec<AuditRow>> {
    let row = |identity, residual, tolerance| AuditRow { identity, residual, tolerance };
    let joint = exact_joint_law(model, n, m)?;
    let norm = (neumaier_sum(joint.probs.iter().copied()) - 1.0).abs();
    let mi = mutual_information_of(&joint) / n as f64;
    let dec = mi_decomposition(model, n, m)?;
    let rel = relative_entropy_identity(model, n, m)?;
    let jensen = jensen_identities(model, n, m)?;
    Ok(vec![
        row("joint_normalization", norm, 1e-10),
        row("nishimori_tv", verify_nishimori(model, n, m)?, 1e-9),
        row("mi_decomposition", (mi - dec.combined()).abs(), 1e-9),
        row("relative_entropy_identity", rel.residual(), 1e-9),
        row("planted_product_tv", planted_product_tv(model, n, m)?, 1e-10),
        row("expected_weight", expected_weight_residual(model, n, m)?, 1e-12),
        row("jensen_planted", jensen.planted_residual(), 1e-9),
        row("jensen_null", jensen.null_residual(), 1e-9),
        row("gibbs_bounds", gibbs_bound_violation(model, n, m)?, 1e-12),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{WeightDistribution, WeightFunction};
    use crate::simplex::Simplex;

    fn pair_model(a: f64, b: f64) -> ModelSpec {
        let psi = WeightFunction::new(2, 2, vec![a, b, b, a]).unwrap();
        ModelSpec::new(0.2, WeightDistribution::single(psi), Simplex::uniform(2), 10.0).unwrap()
    }

    #[test]
    fn single_factor_example() {
        let (a, b) = (1.5, 0.5);
        let model = pair_model(a, b);
        let g = FactorGraph { n: 2, factors: vec![Factor { wires: vec![0, 1], atom: 0 }] };
        let z = partition_function(&model, &g).unwrap();
        assert!((z - (a + b) / 2.0).abs() < 1e-15);
        assert!((free_entropy(&model, &g).unwrap() - 0.5 * ((a + b) / 2.0).ln()).abs() < 1e-15);
        let mu = gibbs_measure(&model, &g).unwrap();
        let expect = [a, b, b, a].map(|x| x / (2.0 * (a + b)));
        for (p, e) in mu.probs().iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
        assert_eq!(partition_function(&model, &FactorGraph::empty(3)).unwrap(), 1.0);
    }

    #[test]
    fn graph_space_order() {
        let model = pair_model(1.5, 0.5);
        let s = GraphSpace::new(&model, 2, 2).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.factor(3).wires, vec![1, 1]);
        assert_eq!(s.digits(7), vec![1, 3]);
        let total: f64 = (0..s.len()).map(|c| s.ln_null_prob(c).exp()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(GraphSpace::new(&model, 20, 4).is_err());
    }
}
