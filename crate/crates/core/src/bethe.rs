//! Monte Carlo evaluation of the Bethe functional and `∇I`, the mean
//! projection, and reweighted population dynamics.
//!
//! Samples are drawn in fixed blocks; block `b` uses substream `b` of the
//! caller's stream, so estimates do not depend on the worker count.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::{contract_all, contract_except, xi_sup};
use crate::model::ModelSpec;
use crate::rng::RngStream;
use crate::simplex::Simplex;
use crate::stats::{logsumexp, poisson, systematic_resample, uniform_simplex, xlnx, Categorical, MeanEstimate};

const BLOCK: usize = 256;

/// Empirical law on the simplex: members with probability weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    q: usize,
    members: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Population {
    /// Equally weighted members.
    pub fn new(members: Vec<Vec<f64>>) -> Result<Self> {
        let n = members.len();
        Self::weighted(members, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn weighted(members: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if members.len() < 2 {
            return invalid(format!("a population needs at least 2 members, got {}", members.len()));
        }
        if weights.len() != members.len() {
            return invalid("one weight per member");
        }
        let q = members[0].len();
        for m in &members {
            if m.len() != q {
                return invalid("members must share one dimension");
            }
            Simplex::new(m.clone())?;
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return invalid("weights must be nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("weights sum to {total}"));
        }
        Ok(Self { q, members, weights })
    }

    /// `size` copies of `gamma`.
    pub fn point_mass(gamma: &[f64], size: usize) -> Result<Self> {
        Self::new(vec![gamma.to_vec(); size.max(2)])
    }

    /// Flat Dirichlet members.
    pub fn uniform_random<R: Rng + ?Sized>(q: usize, size: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..size).map(|_| uniform_simplex(rng, q)).collect())
    }

    /// Members near random vertices: `(1 − u) e_z + u ρ` with `u ~ U[0, 0.2]` and flat `ρ`.
    pub fn vertex_biased<R: Rng + ?Sized>(q: usize, size: usize, rng: &mut R) -> Result<Self> {
        let members = (0..size)
            .map(|_| {
                let z = rng.gen_range(0..q);
                let u = 0.2 * rng.gen::<f64>();
                let rho = uniform_simplex(rng, q);
                (0..q).map(|c| (1.0 - u) * f64::from(c == z) + u * rho[c]).collect()
            })
            .collect();
        Self::new(members)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Vec<f64>] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[γ]` under the population.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.q];
        for (m, w) in self.members.iter().zip(&self.weights) {
            for (o, x) in out.iter_mut().zip(m) {
                *o += w * x;
            }
        }
        out
    }

    fn sampler(&self) -> Categorical {
        Categorical::new(&self.weights)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("population serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Self = serde_json::from_str(text)?;
        Self::weighted(raw.members, raw.weights)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub d: f64,
}

fn check_common(model: &ModelSpec, pi: &Population, samples: usize) -> Result<()> {
    if pi.q() != model.q() {
        return invalid(format!("population lives on q = {}, model has q = {}", pi.q(), model.q()));
    }
    if samples < 2 {
        return invalid("need at least 2 samples");
    }
    Ok(())
}

/// Runs `per_sample` over `samples` draws in fixed blocks and returns the values in order.
fn blocked<F>(samples: usize, stream: &RngStream, per_sample: F) -> Vec<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    (0..samples.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.substream(b as u64).rng();
            let count = BLOCK.min(samples - b * BLOCK);
            (0..count).map(|_| per_sample(&mut rng)).collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Draws `d̂` factors around one variable; returns `d̂`, `ln Z_V` and the summed log messages.
fn draw_zv<R: Rng + ?Sized>(
    model: &ModelSpec,
    d: f64,
    pi: &Population,
    pick: &Categorical,
    atoms: &Categorical,
    rng: &mut R,
) -> (u64, f64, Vec<f64>) {
    let k = model.k();
    let dh = poisson(rng, d);
    let mut ln_msgs = vec![0.0; model.q()];
    let mut vecs: Vec<&[f64]> = vec![&[]; k];
    let weights = model.weights().atoms();
    for _ in 0..dh {
        let psi = &weights[atoms.sample(rng)];
        let h = rng.gen_range(0..k);
        for (j, slot) in vecs.iter_mut().enumerate() {
            *slot = if j == h { &[] } else { &pi.members[pick.sample(rng)] };
        }
        let msg = contract_except(psi.table(), psi.shape(), &vecs, h);
        for (l, m) in ln_msgs.iter_mut().zip(msg) {
            *l += m.ln();
        }
    }
    let gs = model.gamma_star().as_slice();
    let ln_zv = if dh == 0 {
        0.0
    } else {
        let terms: Vec<f64> = gs.iter().zip(&ln_msgs).map(|(g, l)| g.ln() + l).collect();
        logsumexp(&terms)
    };
    (dh, ln_zv, ln_msgs)
}

/// `B_d(π) = E[Ξ_sup^{−d̂} Z_V ln Z_V] − d(k−1)/(k Ξ_sup) E[Z_F ln Z_F]`.
///
/// The variable term carries the control variate `(d̂ − d) ln Ξ_sup`, which has
/// mean zero; it removes the Poisson noise of `d̂` from the estimate.
pub fn eval_bethe(model: &ModelSpec, d: f64, pi: &Population, samples: usize, stream: &RngStream) -> Result<BetheEstimate> {
    check_common(model, pi, samples)?;
    if !(0.0..=model.d_max()).contains(&d) {
        return invalid(format!("d = {d} outside [0, d_max = {}]", model.d_max()));
    }
    let k = model.k();
    let ln_xi_sup = xi_sup(model).value.ln();
    let xi_sup_value = xi_sup(model).value;
    let factor_coef = d * (k - 1) as f64 / (k as f64 * xi_sup_value);
    let pick = pi.sampler();
    let atoms = Categorical::new(model.weights().probs());
    let weights = model.weights().atoms();
    let values = blocked(samples, stream, |rng| {
        let (dh, ln_zv, _) = draw_zv(model, d, pi, &pick, &atoms, rng);
        let var = if dh == 0 { 0.0 } else { (ln_zv - dh as f64 * ln_xi_sup).exp() * ln_zv } - (dh as f64 - d) * ln_xi_sup;
        let psi = &weights[atoms.sample(rng)];
        let vecs: Vec<&[f64]> = (0..k).map(|_| pi.members[pick.sample(rng)].as_slice()).collect();
        let fac = if factor_coef == 0.0 { 0.0 } else { factor_coef * xlnx(contract_all(psi.table(), psi.shape(), &vecs)) };
        var - fac
    });
    let est = MeanEstimate::from_samples(&values);
    Ok(BetheEstimate { value: est.mean, std_error: est.std_error, samples, d })
}

/// Mean of `Z_V / Ξ_sup^{d̂}` over proposal draws; equals 1 for mean-`γ*` populations.
pub fn reweighting_mean(model: &ModelSpec, d: f64, pi: &Population, samples: usize, stream: &RngStream) -> Result<MeanEstimate> {
    check_common(model, pi, samples)?;
    let ln_xi_sup = xi_sup(model).value.ln();
    let pick = pi.sampler();
    let atoms = Categorical::new(model.weights().probs());
    let values = blocked(samples, stream, |rng| {
        let (dh, ln_zv, _) = draw_zv(model, d, pi, &pick, &atoms, rng);
        (ln_zv - dh as f64 * ln_xi_sup).exp()
    });
    Ok(MeanEstimate::from_samples(&values))
}

/// `∇I(π_1, π_2) = E[Λ(Z_F(ψ, γ_1)) + (k−1) Λ(Z_F(ψ, γ_2)) − k Λ(Z_FM(ψ, h, γ))]` with `Λ = xlnx`.
///
/// All three terms share one draw of `(ψ, h, γ_1, γ_2)`; the sample is
/// formed as `(Λ_1 − Λ_M) + (k−1)(Λ_2 − Λ_M)` so that equal arguments give exactly zero.
pub fn eval_nabla_i(
    model: &ModelSpec,
    pi1: &Population,
    pi2: &Population,
    samples: usize,
    stream: &RngStream,
) -> Result<MeanEstimate> {
    check_common(model, pi1, samples)?;
    check_common(model, pi2, samples)?;
    let k = model.k();
    let atoms = Categorical::new(model.weights().probs());
    let weights = model.weights().atoms();
    let (pick1, pick2) = (pi1.sampler(), pi2.sampler());
    let values = blocked(samples, stream, |rng| {
        let psi = &weights[atoms.sample(rng)];
        let h = rng.gen_range(0..k);
        let g1: Vec<&[f64]> = (0..k).map(|_| pi1.members[pick1.sample(rng)].as_slice()).collect();
        let g2: Vec<&[f64]> = (0..k).map(|_| pi2.members[pick2.sample(rng)].as_slice()).collect();
        let mut mixed = g2.clone();
        mixed[h] = g1[h];
        let x1 = xlnx(contract_all(psi.table(), psi.shape(), &g1));
        let x2 = xlnx(contract_all(psi.table(), psi.shape(), &g2));
        let xm = xlnx(contract_all(psi.table(), psi.shape(), &mixed));
        (x1 - xm) + (k - 1) as f64 * (x2 - xm)
    });
    Ok(MeanEstimate::from_samples(&values))
}

/// `ℓ_c(ℓ) = −(1 + ℓ ln ℓ) / ln ℓ` on `(0, 1)`.
pub fn ell_c(ell: f64) -> f64 {
    -(1.0 + xlnx(ell)) / ell.ln()
}

/// `ℓ_∘ = ℓ_c^{-1}(ψ_min)` by bisection; `ℓ_c` increases from 0 to ∞ on `(0, 1)`.
pub fn ell_circ(psi_min: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 || ell_c(mid) < psi_min {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanProjectionReport {
    pub alpha: f64,
    pub counterweight: Simplex,
    pub mean_before: Simplex,
    pub mean_after: Simplex,
}

/// Means closer to `γ*` than this are treated as equal to it (rounding level).
const MEAN_TOL: f64 = 1e-13;

/// `α(γ̄)` and `[γ̄]_c` so that `α [γ̄]_c + (1 − α) γ̄ = γ*`.
pub fn counterweight(mean: &[f64], gamma_star: &[f64], psi_min: f64) -> (f64, Vec<f64>) {
    // Direction γ* − γ̄, recentered so that rounding cannot move mass off the simplex plane.
    let mut dir: Vec<f64> = gamma_star.iter().zip(mean).map(|(g, m)| g - m).collect();
    let shift = dir.iter().sum::<f64>() / dir.len() as f64;
    dir.iter_mut().for_each(|x| *x -= shift);
    let ell = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
    if ell <= MEAN_TOL {
        return (0.0, gamma_star.to_vec());
    }
    let (radius, alpha) = if ell <= ell_circ(psi_min) { (ell_c(ell), -xlnx(ell)) } else { (psi_min, ell / (ell + psi_min)) };
    let c = gamma_star.iter().zip(&dir).map(|(g, x)| g + radius * x / ell).collect();
    (alpha, c)
}

/// Mixes `π` with the point mass at the counterweight of its mean.
pub fn project_to_mean(pi: &Population, gamma_star: &Simplex, psi_min: f64) -> Result<(Population, MeanProjectionReport)> {
    if pi.q() != gamma_star.q() {
        return invalid("population and gamma_star differ in q");
    }
    let before = pi.mean();
    let (alpha, c) = counterweight(&before, gamma_star.as_slice(), psi_min);
    assert!(c.iter().all(|&x| x >= -1e-12), "counterweight left the simplex");
    let c: Vec<f64> = c.into_iter().map(|x| x.max(0.0)).collect();
    let out = if alpha == 0.0 {
        pi.clone()
    } else {
        let mut members = pi.members.clone();
        let mut weights: Vec<f64> = pi.weights.iter().map(|w| (1.0 - alpha) * w).collect();
        members.push(c.clone());
        weights.push(alpha);
        Population { q: pi.q, members, weights }
    };
    let after = out.mean();
    let report = MeanProjectionReport {
        alpha,
        counterweight: Simplex::new(c)?,
        mean_before: Simplex::new(before)?,
        mean_after: Simplex::new(after)?,
    };
    Ok((out, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Init {
    PointMass,
    VertexBiased,
    UniformRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    /// Population size `N`.
    pub size: usize,
    pub sweeps: usize,
    /// Probability that a slot keeps its previous member in a sweep.
    pub damping: f64,
    pub seed: u64,
    /// Samples for each `eval_bethe` in the trace.
    pub eval_samples: usize,
    pub init: Init,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self { size: 10_000, sweeps: 200, damping: 0.0, seed: 0, eval_samples: 10_000, init: Init::PointMass }
    }
}

fn initial_population(model: &ModelSpec, config: &PopulationConfig, stream: &RngStream) -> Result<Population> {
    let q = model.q();
    let mut rng = stream.rng();
    match config.init {
        Init::PointMass => Population::point_mass(model.gamma_star().as_slice(), config.size),
        Init::VertexBiased => Population::vertex_biased(q, config.size, &mut rng),
        Init::UniformRandom => Population::uniform_random(q, config.size, &mut rng),
    }
}

/// One sweep: `N` proposals `μ ∝ γ* Π msg_a`, resampled by `Z_V / Ξ_sup^{d̂}`.
fn sweep(model: &ModelSpec, d: f64, pop: &Population, damping: f64, stream: &RngStream) -> Population {
    let n = pop.len();
    let ln_xi_sup = xi_sup(model).value.ln();
    let pick = pop.sampler();
    let atoms = Categorical::new(model.weights().probs());
    let gs = model.gamma_star().as_slice();
    let proposals: Vec<(Vec<f64>, f64)> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = stream.substream(b as u64).rng();
            let count = BLOCK.min(n - b * BLOCK);
            (0..count)
                .map(|_| {
                    let (dh, ln_zv, ln_msgs) = draw_zv(model, d, pop, &pick, &atoms, &mut rng);
                    let member: Vec<f64> =
                        gs.iter().zip(&ln_msgs).map(|(g, l)| (g.ln() + l - ln_zv).exp()).collect();
                    let s: f64 = member.iter().sum();
                    let member = member.into_iter().map(|x| x / s).collect();
                    (member, ln_zv - dh as f64 * ln_xi_sup)
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();
    let max = proposals.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = proposals.iter().map(|p| (p.1 - max).exp()).collect();
    assert!(weights.iter().all(|w| w.is_finite()), "non-finite reweighting");
    let mut rng = stream.fork("resample").rng();
    let chosen = systematic_resample(&mut rng, &weights, n);
    let prev = pop.sampler();
    let members = chosen
        .into_iter()
        .map(|i| {
            if damping > 0.0 && rng.gen::<f64>() < damping {
                pop.members[prev.sample(&mut rng)].clone()
            } else {
                proposals[i].0.clone()
            }
        })
        .collect();
    Population::new(members).expect("resampled population is valid")
}

/// Reweighted population dynamics; the trace holds `eval_bethe` of the
/// mean-projected population after every sweep.
pub fn population_dynamics(model: &ModelSpec, d: f64, config: &PopulationConfig) -> Result<(Population, Vec<BetheEstimate>)> {
    run_dynamics(model, d, config, true)
}

fn run_dynamics(model: &ModelSpec, d: f64, config: &PopulationConfig, traced: bool) -> Result<(Population, Vec<BetheEstimate>)> {
    if !(0.0..=model.d_max()).contains(&d) {
        return invalid(format!("d = {d} outside [0, d_max = {}]", model.d_max()));
    }
    if config.size < 2 || !(0.0..1.0).contains(&config.damping) {
        return invalid("need size >= 2 and damping in [0, 1)");
    }
    let root = RngStream::new(config.seed, 0);
    let mut pop = initial_population(model, config, &root.fork("init"))?;
    let mut trace = Vec::new();
    for t in 0..config.sweeps {
        pop = sweep(model, d, &pop, config.damping, &root.fork("sweep").substream(t as u64));
        if traced {
            let (projected, _) = project_to_mean(&pop, model.gamma_star(), model.psi_min())?;
            trace.push(eval_bethe(model, d, &projected, config.eval_samples, &root.fork("eval").substream(t as u64))?);
        }
    }
    if traced && trace.is_empty() {
        let (projected, _) = project_to_mean(&pop, model.gamma_star(), model.psi_min())?;
        trace.push(eval_bethe(model, d, &projected, config.eval_samples, &root.fork("eval"))?);
    }
    Ok((pop, trace))
}

/// Initialization of restart `r`: point mass at `γ*`, then vertex-biased, then flat random.
pub fn restart_init(r: usize) -> Init {
    match r {
        0 => Init::PointMass,
        1 => Init::VertexBiased,
        _ => Init::UniformRandom,
    }
}

/// Best `eval_bethe` over restarts of population dynamics.
///
/// This is a lower-bound estimator of `B_sup(d)`: the supremum over an
/// infinite-dimensional set is not certified, only the best value found.
/// Every restart's final population is projected to mean `γ*` and evaluated
/// with the same random stream.
pub fn estimate_b_sup(model: &ModelSpec, d: f64, restarts: usize, config: &PopulationConfig) -> Result<BetheEstimate> {
    Ok(estimate_b_sup_runs(model, d, restarts, config)?.0)
}

/// As `estimate_b_sup`, also returning every restart's estimate.
pub fn estimate_b_sup_runs(
    model: &ModelSpec,
    d: f64,
    restarts: usize,
    config: &PopulationConfig,
) -> Result<(BetheEstimate, Vec<BetheEstimate>)> {
    if restarts == 0 {
        return invalid("need at least one restart");
    }
    let root = RngStream::new(config.seed, 1);
    let eval_stream = root.fork("final-eval");
    let mut runs = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let cfg = PopulationConfig {
            init: restart_init(r),
            seed: root.substream(r as u64).stream_id,
            ..*config
        };
        let (pop, _) = run_dynamics(model, d, &cfg, false)?;
        let (projected, _) = project_to_mean(&pop, model.gamma_star(), model.psi_min())?;
        runs.push(eval_bethe(model, d, &projected, config.eval_samples, &eval_stream)?);
    }
    let best = *runs
        .iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart");
    Ok((best, runs))
}

/// Lipschitz constant of `B_d` in the population, per unit of total variation
/// moved on a `1/N` share of the mass: a factor term and a variable term.
pub fn lipschitz_constant(model: &ModelSpec, d: f64) -> f64 {
    let k = model.k() as f64;
    let pmax = model.psi_max();
    let lnp = pmax.ln();
    let factor = 2.0 * d * (lnp + 1.0) * pmax * pmax * (k - 1.0);
    // E[d̂ (d̂ ln ψ_max + 1) t^{d̂}] with t = ψ_max², d̂ ~ Po(d).
    let t = pmax * pmax;
    let scale = (d * (t - 1.0)).exp();
    let e1 = d * t * scale;
    let e2 = (d * t + (d * t).powi(2)) * scale;
    let variable = (k - 1.0) * (lnp * e2 + e1);
    factor + variable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{make_constant, make_nae_sat};

    #[test]
    fn ell_c_inverse() {
        let l = ell_circ(0.3);
        assert!((ell_c(l) - 0.3).abs() < 1e-12);
        // Continuity of α at ℓ_∘.
        assert!((-xlnx(l) - l / (l + 0.3)).abs() < 1e-12);
    }

    #[test]
    fn projection_example() {
        let gs = Simplex::uniform(2);
        let psi_min = 0.25;
        // ℓ_∘(0.25) lies in [e^{-4}, e^{-4(e-1)/e}].
        let lc = ell_circ(psi_min);
        assert!(lc >= (-4f64).exp() && lc <= (-4.0 * (1.0 - (-1f64).exp())).exp());
        for (point, near) in [([0.6, 0.4], false), ([0.51, 0.49], true)] {
            let pi = Population::point_mass(&point, 2).unwrap();
            let (out, rep) = project_to_mean(&pi, &gs, psi_min).unwrap();
            let ell = (point[0] - 0.5) * 2f64.sqrt();
            assert_eq!(ell <= lc, near);
            let alpha = if near { -ell * ell.ln() } else { ell / (ell + psi_min) };
            assert!((rep.alpha - alpha).abs() < 1e-15);
            assert!(rep.counterweight[0] < 0.5);
            for (m, g) in out.mean().iter().zip(gs.as_slice()) {
                assert!((m - g).abs() < 1e-12);
            }
        }
        let same = Population::point_mass(&[0.5, 0.5], 3).unwrap();
        let (o2, r2) = project_to_mean(&same, &gs, psi_min).unwrap();
        assert_eq!(r2.alpha, 0.0);
        assert_eq!(o2, same);
    }

    #[test]
    fn bethe_zero_degree_is_zero() {
        let m = make_nae_sat(3, 0.5).unwrap();
        let pi = Population::uniform_random(2, 50, &mut RngStream::new(1, 1).rng()).unwrap();
        let b = eval_bethe(&m, 0.0, &pi, 1000, &RngStream::new(2, 2)).unwrap();
        assert_eq!(b.value, 0.0);
        assert_eq!(b.std_error, 0.0);
    }

    #[test]
    fn nabla_point_masses_vanish() {
        let m = make_nae_sat(3, 0.5).unwrap();
        let pi = Population::point_mass(&[0.3, 0.7], 2).unwrap();
        let e = eval_nabla_i(&m, &pi, &pi, 1000, &RngStream::new(3, 3)).unwrap();
        assert_eq!(e.mean, 0.0);
        let c = make_constant(2, 3, &[(1.2, 1.0)]).unwrap();
        let a = Population::uniform_random(2, 20, &mut RngStream::new(4, 4).rng()).unwrap();
        let b = Population::uniform_random(2, 20, &mut RngStream::new(5, 5).rng()).unwrap();
        let e = eval_nabla_i(&c, &a, &b, 1000, &RngStream::new(3, 3)).unwrap();
        assert!(e.mean.abs() < 1e-12);
    }

    #[test]
    fn population_json_round_trip() {
        let pi = Population::uniform_random(3, 5, &mut RngStream::new(1, 1).rng()).unwrap();
        assert_eq!(Population::from_json(&pi.to_json()).unwrap(), pi);
        assert!(Population::new(vec![vec![1.0, 0.0]]).is_err());
    }
}
