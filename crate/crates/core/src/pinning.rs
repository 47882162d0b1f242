//! Pinning of explicit measures and the `ι_ℓ`, `ν_ℓ` symmetry functionals.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::error::{guard, invalid, Result};
use crate::exact::{gibbs_measure, nishimori_joint_law};
use crate::graph::Assignment;
use crate::measure::DenseMeasure;
use crate::model::ModelSpec;
use crate::rng::RngStream;
use crate::stats::{kl_divergence, ln_factorial, total_variation, Categorical, MeanEstimate};

/// Largest `n^ℓ` averaged exactly; above it tuples are sampled.
pub const TUPLE_LIMIT: f64 = 1e6;
/// Tuples sampled when `n^ℓ` exceeds [`TUPLE_LIMIT`].
pub const TUPLE_SAMPLES: usize = 100_000;
/// Largest `n` for which all `2^n` pin sets are enumerated.
pub const SUBSET_LIMIT: usize = 12;
/// Work bound `2^n q^n n^ℓ` for the enumerated pinning lemma.
pub const ENUMERATION_LIMIT: f64 = 2e10;

/// A realized pinning: `θ ~ U[0, Θ]`, each coordinate in `U` with probability
/// `θ/n`, and the pin values `σ̌ ~ μ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PinSpec {
    pub theta_cap: f64,
    pub set: Vec<usize>,
    pub sigma_check: Vec<usize>,
}

impl PinSpec {
    pub fn draw<R: Rng + ?Sized>(mu: &DenseMeasure, theta_cap: f64, sampler: &Categorical, rng: &mut R) -> Self {
        let n = mu.n();
        let theta = rng.gen::<f64>() * theta_cap;
        let set = (0..n).filter(|_| rng.gen::<f64>() < theta / n as f64).collect();
        let sigma_check = Assignment::from_index(sampler.sample(rng), n, mu.q()).colors;
        Self { theta_cap, set, sigma_check }
    }
}

fn check_theta(n: usize, theta_cap: f64) -> Result<()> {
    if !(theta_cap > 0.0 && theta_cap <= n as f64) {
        return invalid(format!("Θ = {theta_cap} must lie in (0, n = {n}]"));
    }
    Ok(())
}

/// Probability that the pin set equals one given set of size `j`.
///
/// `(1/Θ) ∫_0^Θ (θ/n)^j (1 − θ/n)^{n−j} dθ = (n/Θ) B(j+1, n−j+1) I_{Θ/n}(j+1, n−j+1)`.
pub fn pin_set_probability(n: usize, j: usize, theta_cap: f64) -> f64 {
    assert!(j <= n);
    let (a, b) = ((j + 1) as f64, (n - j + 1) as f64);
    let ln_beta = ln_factorial(j) + ln_factorial(n - j) - ln_factorial(n + 1);
    n as f64 / theta_cap * ln_beta.exp() * beta_reg(a, b, (theta_cap / n as f64).min(1.0))
}

/// `[μ]↓_{U, σ̌}`: the law of `σ` given `σ_U = σ̌_U`.
pub fn pin_measure(mu: &DenseMeasure, set: &[usize], sigma_check: &[usize]) -> Result<DenseMeasure> {
    let (n, q) = (mu.n(), mu.q());
    if sigma_check.len() != n || sigma_check.iter().any(|&c| c >= q) {
        return invalid(format!("pin assignment must have {n} colors below {q}"));
    }
    if set.iter().any(|&i| i >= n) {
        return invalid(format!("pinned coordinate out of range 0..{n}"));
    }
    let strides: Vec<usize> = set.iter().map(|&i| q.pow((n - 1 - i) as u32)).collect();
    let mut probs: Vec<f64> = mu
        .probs()
        .iter()
        .enumerate()
        .map(|(idx, &p)| {
            let keep = set.iter().zip(&strides).all(|(&i, &s)| (idx / s) % q == sigma_check[i]);
            if keep {
                p
            } else {
                0.0
            }
        })
        .collect();
    let mass: f64 = probs.iter().sum();
    if !(mass > 0.0) {
        return invalid("the pinning event has probability zero");
    }
    probs.iter_mut().for_each(|p| *p /= mass);
    DenseMeasure::new(n, q, probs)
}

/// Average of a symmetry functional over tuples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetryValue {
    pub value: f64,
    /// Zero when every tuple was evaluated.
    pub std_error: f64,
    pub exact: bool,
}

fn product_of_marginals(marg: &[Vec<f64>], v: &[usize], q: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for &i in v {
        out = out.iter().flat_map(|p| (0..q).map(move |c| p * marg[i][c])).collect();
    }
    out
}

/// `ι∘(μ, v) = D_KL(μ|_v ‖ ⊗_h μ|_{v(h)})`.
pub fn iota_tuple(mu: &DenseMeasure, v: &[usize]) -> f64 {
    let marg = mu.marginals();
    kl_divergence(&mu.tuple_marginal(v), &product_of_marginals(&marg, v, mu.q()))
}

/// `ν∘(μ, v) = d_TV(μ|_v, ⊗_h μ|_{v(h)})`.
pub fn nu_tuple(mu: &DenseMeasure, v: &[usize]) -> f64 {
    let marg = mu.marginals();
    total_variation(&mu.tuple_marginal(v), &product_of_marginals(&marg, v, mu.q()))
}

/// Colors of every state, `n` bytes per state.
fn color_table(n: usize, q: usize) -> Vec<u8> {
    (0..q.pow(n as u32)).flat_map(|s| Assignment::from_index(s, n, q).colors.into_iter().map(|c| c as u8)).collect()
}

/// Nondecreasing `r`-tuples over `coords`, each with the number of its rearrangements.
fn sorted_tuples(coords: &[usize], r: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(coords: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if cur.len() == r {
            let mut ln_count = ln_factorial(r);
            let mut run = 1;
            for w in cur.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                } else {
                    ln_count -= ln_factorial(run);
                    run = 1;
                }
            }
            ln_count -= ln_factorial(run);
            out.push((cur.clone(), ln_count.exp().round()));
            return;
        }
        for j in start..coords.len() {
            cur.push(coords[j]);
            rec(coords, r, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(coords, r, 0, &mut Vec::with_capacity(r), &mut out);
    out
}

/// `ℓ`-tuple statistics of measures on which every coordinate outside `free`
/// is deterministic.
///
/// Both functionals are invariant under permuting a tuple and under dropping
/// deterministic coordinates from it, so each tuple in `[n]^ℓ` is represented
/// by the sorted tuple of its free coordinates, weighted by how many tuples
/// reduce to it. Reduced tuples shorter than 2 contribute nothing.
struct TupleWork<'a> {
    n: usize,
    q: usize,
    ell: usize,
    colors: &'a [u8],
    tuples: Vec<Vec<usize>>,
    counts: Vec<f64>,
    offsets: Vec<usize>,
}

impl<'a> TupleWork<'a> {
    fn new(n: usize, q: usize, ell: usize, colors: &'a [u8], free: &[usize]) -> Self {
        let fixed = (n - free.len()) as f64;
        let (mut tuples, mut counts, mut offsets) = (Vec::new(), Vec::new(), vec![0]);
        for r in 2..=ell {
            let ways = (ln_factorial(ell) - ln_factorial(r) - ln_factorial(ell - r)).exp().round() * fixed.powi((ell - r) as i32);
            if ways == 0.0 {
                continue;
            }
            for (v, c) in sorted_tuples(free, r) {
                offsets.push(offsets.last().unwrap() + q.pow(r as u32));
                tuples.push(v);
                counts.push(c * ways);
            }
        }
        Self { n, q, ell, colors, tuples, counts, offsets }
    }

    /// `(mass, ι_ℓ, ν_ℓ)` of the normalized restriction.
    fn evaluate(&self, states: &[usize], probs: &[f64]) -> (f64, f64, f64) {
        let (n, q) = (self.n, self.q);
        let mut marg = vec![vec![0.0; q]; n];
        let mut joint = vec![0.0; *self.offsets.last().unwrap()];
        let mut mass = 0.0;
        for &s in states {
            let p = probs[s];
            if p == 0.0 {
                continue;
            }
            mass += p;
            let cs = &self.colors[s * n..(s + 1) * n];
            for (i, &c) in cs.iter().enumerate() {
                marg[i][c as usize] += p;
            }
            let c = |i: usize| cs[i] as usize;
            for (v, &off) in self.tuples.iter().zip(&self.offsets) {
                let cell = match v.len() {
                    2 => c(v[0]) * q + c(v[1]),
                    3 => (c(v[0]) * q + c(v[1])) * q + c(v[2]),
                    _ => v.iter().fold(0, |acc, &i| acc * q + c(i)),
                };
                joint[off + cell] += p;
            }
        }
        if mass == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        marg.iter_mut().flatten().for_each(|x| *x /= mass);
        let (mut iota, mut nu) = (0.0, 0.0);
        for (t, v) in self.tuples.iter().enumerate() {
            let prod = product_of_marginals(&marg, v, q);
            let row: Vec<f64> = joint[self.offsets[t]..self.offsets[t + 1]].iter().map(|x| x / mass).collect();
            iota += self.counts[t] * kl_divergence(&row, &prod);
            nu += self.counts[t] * total_variation(&row, &prod);
        }
        let count = (n as f64).powi(self.ell as i32);
        (mass, iota / count, nu / count)
    }
}

fn symmetry(mu: &DenseMeasure, ell: usize, total_variation_form: bool) -> Result<SymmetryValue> {
    let (n, q) = (mu.n(), mu.q());
    if ell <= 1 {
        return Ok(SymmetryValue { value: 0.0, std_error: 0.0, exact: true });
    }
    let count = (n as f64).powi(ell as i32);
    if count <= TUPLE_LIMIT && count * (q as f64).powi(ell as i32) <= 1e8 {
        let colors = color_table(n, q);
        let all: Vec<usize> = (0..n).collect();
        let work = TupleWork::new(n, q, ell, &colors, &all);
        let states: Vec<usize> = (0..mu.probs().len()).collect();
        let (_, iota, nu) = work.evaluate(&states, mu.probs());
        let value = if total_variation_form { nu } else { iota };
        return Ok(SymmetryValue { value, std_error: 0.0, exact: true });
    }
    let stream = RngStream::new(0, ell as u64);
    let values: Vec<f64> = (0..TUPLE_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64).rng();
            let v: Vec<usize> = (0..ell).map(|_| rng.gen_range(0..n)).collect();
            if total_variation_form {
                nu_tuple(mu, &v)
            } else {
                iota_tuple(mu, &v)
            }
        })
        .collect();
    let est = MeanEstimate::from_samples(&values);
    Ok(SymmetryValue { value: est.mean, std_error: est.std_error, exact: false })
}

/// `ι_ℓ(μ) = E_v ι∘(μ, v)` with `v` uniform on `[n]^ℓ`, repeats included.
pub fn iota_ell(mu: &DenseMeasure, ell: usize) -> Result<SymmetryValue> {
    symmetry(mu, ell, false)
}

/// `ν_ℓ(μ) = E_v ν∘(μ, v)` with `v` uniform on `[n]^ℓ`, repeats included.
pub fn nu_ell(mu: &DenseMeasure, ell: usize) -> Result<SymmetryValue> {
    symmetry(mu, ell, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PinningCheck {
    pub ell: usize,
    pub theta_cap: f64,
    /// `E[ι_ℓ([μ]↓_{U, σ̌})]`.
    pub lhs: f64,
    pub std_error: f64,
    /// `C(ℓ, 2) ln q / Θ`.
    pub rhs: f64,
    /// Whether the pin sets were enumerated.
    pub exact: bool,
}

impl PinningCheck {
    pub fn pass(&self) -> bool {
        self.lhs <= self.rhs + 3.0 * self.std_error + 1e-12
    }
}

fn pinning_rhs(ell: usize, q: usize, theta_cap: f64) -> f64 {
    (ell * ell.saturating_sub(1) / 2) as f64 * (q as f64).ln() / theta_cap
}

/// `Σ_x μ(σ_U = x) ι_ℓ(μ | σ_U = x)` for every pin set `U`, indexed by bitmask.
fn pinned_iota_by_set(mu: &DenseMeasure, ell: usize) -> Vec<f64> {
    let (n, q) = (mu.n(), mu.q());
    let colors = color_table(n, q);
    let qn = mu.probs().len();
    (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let pinned: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let free: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
            let work = TupleWork::new(n, q, ell, &colors, &free);
            let keys = q.pow(pinned.len() as u32);
            let key = |s: usize| pinned.iter().fold(0, |acc, &i| acc * q + colors[s * n + i] as usize);
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); keys];
            for s in 0..qn {
                groups[key(s)].push(s);
            }
            groups
                .iter()
                .map(|g| {
                    let (mass, iota, _) = work.evaluate(g, mu.probs());
                    mass * iota
                })
                .sum()
        })
        .collect()
}

/// Lemma check `E[ι_ℓ([μ]↓_{U, σ̌})] ≤ C(ℓ, 2) ln q / Θ` for several caps at once.
///
/// For `n ≤ 12` every pin set and pin value is enumerated and weighted
/// exactly, so the result has no sampling error and `samples` is unused.
/// Otherwise `samples` draws of `(θ, U, σ̌)` are averaged.
pub fn verify_pinning_lemma_caps(
    mu: &DenseMeasure,
    ell: usize,
    theta_caps: &[f64],
    samples: usize,
    stream: &RngStream,
) -> Result<Vec<PinningCheck>> {
    let (n, q) = (mu.n(), mu.q());
    for &t in theta_caps {
        check_theta(n, t)?;
    }
    if ell <= 1 {
        return Ok(theta_caps
            .iter()
            .map(|&t| PinningCheck { ell, theta_cap: t, lhs: 0.0, std_error: 0.0, rhs: pinning_rhs(ell, q, t), exact: true })
            .collect());
    }
    guard("tuples n^ℓ", (n as f64).powi(ell as i32), TUPLE_LIMIT)?;
    let work = 2f64.powi(n as i32) * (q as f64).powi(n as i32) * (n as f64).powi(ell as i32);
    if n <= SUBSET_LIMIT && work <= ENUMERATION_LIMIT {
        let by_set = pinned_iota_by_set(mu, ell);
        return Ok(theta_caps
            .iter()
            .map(|&t| {
                let size_prob: Vec<f64> = (0..=n).map(|j| pin_set_probability(n, j, t)).collect();
                let lhs = by_set.iter().enumerate().map(|(mask, v)| size_prob[mask.count_ones() as usize] * v).sum();
                PinningCheck { ell, theta_cap: t, lhs, std_error: 0.0, rhs: pinning_rhs(ell, q, t), exact: true }
            })
            .collect());
    }
    if samples < 2 {
        return invalid("need at least 2 pin draws");
    }
    let sampler = Categorical::new(mu.probs());
    theta_caps
        .iter()
        .map(|&t| {
            let caps_stream = stream.fork(&format!("theta={t}"));
            let values = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = caps_stream.substream(i as u64).rng();
                    let pins = PinSpec::draw(mu, t, &sampler, &mut rng);
                    Ok(iota_ell(&pin_measure(mu, &pins.set, &pins.sigma_check)?, ell)?.value)
                })
                .collect::<Result<Vec<f64>>>()?;
            let est = MeanEstimate::from_samples(&values);
            Ok(PinningCheck { ell, theta_cap: t, lhs: est.mean, std_error: est.std_error, rhs: pinning_rhs(ell, q, t), exact: false })
        })
        .collect()
}

pub fn verify_pinning_lemma(
    mu: &DenseMeasure,
    ell: usize,
    theta_cap: f64,
    samples: usize,
    stream: &RngStream,
) -> Result<PinningCheck> {
    Ok(verify_pinning_lemma_caps(mu, ell, &[theta_cap], samples, stream)?.remove(0))
}

/// Exact total variation between two laws of `(σ, G, U, σ_U)`: the Nishimori
/// pair with pins read off the ground truth, and a graph `G ~ G*(σ̂)` with
/// pins read off one Gibbs sample and `σ` drawn from the pinned Gibbs measure.
pub fn verify_pinned_nishimori(model: &ModelSpec, n: usize, m: usize, theta_cap: f64) -> Result<f64> {
    check_theta(n, theta_cap)?;
    if n > SUBSET_LIMIT {
        return invalid(format!("n = {n} exceeds the pin-set enumeration limit {SUBSET_LIMIT}"));
    }
    let (direct, space) = nishimori_joint_law(model, n, m)?;
    let q = model.q();
    let qn = q.pow(n as u32);
    let cells = space.len();
    let colors = color_table(n, q);
    let size_prob: Vec<f64> = (0..=n).map(|j| pin_set_probability(n, j, theta_cap)).collect();
    let per_cell: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|c| -> Result<f64> {
            let a: Vec<f64> = (0..qn).map(|s| direct[s * cells + c]).collect();
            let pg: f64 = a.iter().sum();
            let mu = gibbs_measure(model, &space.graph(c))?;
            let mut diff = 0.0;
            for mask in 0..1usize << n {
                let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let key = |s: usize| set.iter().fold(0, |acc, &i| acc * q + colors[s * n + i] as usize);
                let mut rep = vec![None; q.pow(set.len() as u32)];
                for s in 0..qn {
                    rep[key(s)].get_or_insert(s);
                }
                let mut cell_diff = 0.0;
                for s0 in rep.into_iter().flatten() {
                    let x = key(s0);
                    let mass: f64 = (0..qn).filter(|&s| key(s) == x).map(|s| mu.probs()[s]).sum();
                    let b: Vec<f64> = if mass > 0.0 {
                        let pinned = pin_measure(&mu, &set, &Assignment::from_index(s0, n, q).colors)?;
                        pinned.probs().iter().map(|p| pg * mass * p).collect()
                    } else {
                        vec![0.0; qn]
                    };
                    cell_diff += (0..qn).filter(|&s| key(s) == x).map(|s| (a[s] - b[s]).abs()).sum::<f64>();
                }
                diff += size_prob[set.len()] * cell_diff;
            }
            Ok(diff)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(0.5 * per_cell.iter().sum::<f64>())
}
