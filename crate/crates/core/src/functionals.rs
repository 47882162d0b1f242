//! The deterministic functionals `Ξ`, `Ξ_sup`, `Z_F`, `Z_FM`, `Z_V` and `φ_a`.

use crate::error::{invalid, Result};
use crate::model::{ModelSpec, TableShape, WeightFunction, XiSup};
use crate::rng::RngStream;
use crate::simplex::{project_onto_simplex, Simplex};
use crate::stats::{logsumexp, uniform_simplex};

/// `Σ_τ table(τ) Π_h vecs[h](τ_h)`, contracting one axis at a time.
///
/// No dimension checks; callers guarantee `vecs.len() == k` and each has length `q`.
pub fn contract_all(table: &[f64], shape: TableShape, vecs: &[&[f64]]) -> f64 {
    let q = shape.q;
    let mut cur: Vec<f64> = contract_trailing(table, q, vecs);
    debug_assert_eq!(cur.len(), 1);
    cur.pop().unwrap()
}

/// Contracts the last `vecs.len()` axes of a row-major table.
fn contract_trailing(table: &[f64], q: usize, vecs: &[&[f64]]) -> Vec<f64> {
    let mut cur: Vec<f64> = Vec::new();
    let mut src: &[f64] = table;
    for v in vecs.iter().rev() {
        let next: Vec<f64> = src
            .chunks_exact(q)
            .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
            .collect();
        cur = next;
        src = &cur;
    }
    if vecs.is_empty() {
        cur = table.to_vec();
    }
    cur
}

/// Vector over colors `σ ↦ Σ_{τ: τ_h = σ} table(τ) Π_{h' ≠ h} vecs[h'](τ_{h'})`.
///
/// `vecs[h]` is ignored.
pub fn contract_except(table: &[f64], shape: TableShape, vecs: &[&[f64]], h: usize) -> Vec<f64> {
    let q = shape.q;
    let mut cur = contract_trailing(table, q, &vecs[h + 1..]);
    // Now indexed by (τ_0, …, τ_h); fold the leading axes away.
    for v in &vecs[..h] {
        let rest = cur.len() / q;
        let mut next = vec![0.0; rest];
        for (z, &w) in v.iter().enumerate() {
            for (r, slot) in next.iter_mut().enumerate() {
                *slot += w * cur[z * rest + r];
            }
        }
        cur = next;
    }
    debug_assert_eq!(cur.len(), q);
    cur
}

fn check_dims(q: usize, k: usize, gammas: &[&[f64]]) -> Result<()> {
    if gammas.len() != k {
        return invalid(format!("expected {k} distributions, got {}", gammas.len()));
    }
    if let Some(g) = gammas.iter().find(|g| g.len() != q) {
        return invalid(format!("distribution has dimension {}, expected q = {q}", g.len()));
    }
    Ok(())
}

/// `Ξ(γ) = Σ_τ ψ̄(τ) Π_h γ(τ_h)`.
pub fn xi(model: &ModelSpec, gamma: &[f64]) -> Result<f64> {
    if gamma.len() != model.q() {
        return invalid(format!("gamma has dimension {}, expected q = {}", gamma.len(), model.q()));
    }
    Ok(xi_unchecked(model, gamma))
}

pub(crate) fn xi_unchecked(model: &ModelSpec, gamma: &[f64]) -> f64 {
    let vecs = vec![gamma; model.k()];
    contract_all(model.mean_weight().table(), model.shape(), &vecs)
}

/// Gradient of `Ξ` as a polynomial on `R^q`.
pub fn xi_gradient(model: &ModelSpec, gamma: &[f64]) -> Vec<f64> {
    let shape = model.shape();
    let vecs = vec![gamma; shape.k];
    let table = model.mean_weight().table();
    let mut grad = vec![0.0; shape.q];
    for h in 0..shape.k {
        for (g, x) in grad.iter_mut().zip(contract_except(table, shape, &vecs, h)) {
            *g += x;
        }
    }
    grad
}

const XI_STARTS: usize = 32;
const XI_GRAD_TOL: f64 = 1e-10;
const XI_MAX_ITERS: usize = 20_000;
const XI_TIE_TOL: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;

/// Projected gradient ascent from `start`; returns the local maximizer and its value.
fn ascend(model: &ModelSpec, start: Vec<f64>) -> (Vec<f64>, f64) {
    let mut x = start;
    let mut fx = xi_unchecked(model, &x);
    let mut step = 1.0;
    for _ in 0..XI_MAX_ITERS {
        let g = xi_gradient(model, &x);
        let mut accepted = None;
        while step > 1e-18 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            let y = project_onto_simplex(&trial);
            let fy = xi_unchecked(model, &y);
            let ascent: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
            if fy >= fx + ARMIJO * ascent {
                accepted = Some((y, fy));
                break;
            }
            step *= 0.5;
        }
        let Some((y, fy)) = accepted else { break };
        let moved = crate::simplex::l2_distance(&x, &y);
        let mapping_norm = moved / step;
        x = y;
        fx = fy;
        if mapping_norm < XI_GRAD_TOL {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    (x, fx)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// `Ξ_sup = max_γ Ξ(γ)` by multi-start projected gradient ascent.
///
/// Starts are the vertices, the barycenter, `γ*` and random points. Among
/// near-ties (within 1e-12) the lexicographically smallest candidate wins;
/// `γ*` itself is reported whenever it attains the best value. The result is
/// cached on the model.
pub fn xi_sup(model: &ModelSpec) -> &XiSup {
    model.xi_sup_cell().get_or_init(|| solve_xi_sup(model))
}

fn solve_xi_sup(model: &ModelSpec) -> XiSup {
    let q = model.q();
    let mut starts: Vec<Vec<f64>> = (0..q).map(|c| Simplex::point_mass(q, c).into_vec()).collect();
    starts.push(Simplex::uniform(q).into_vec());
    starts.push(model.gamma_star().as_slice().to_vec());
    let mut rng = RngStream::new(0x0058_4953_5550, 0).rng();
    while starts.len() < XI_STARTS {
        starts.push(uniform_simplex(&mut rng, q));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let (x, fx) = ascend(model, s);
        best = match best {
            None => Some((x, fx)),
            Some((bx, bf)) => {
                if fx > bf + XI_TIE_TOL || ((fx - bf).abs() <= XI_TIE_TOL && lex_less(&x, &bx)) {
                    Some((x, fx.max(bf)))
                } else {
                    Some((bx, bf.max(fx)))
                }
            }
        };
    }
    let (bx, bf) = best.expect("at least one start");
    let gs = model.gamma_star().as_slice();
    let at_star = xi_unchecked(model, gs);
    if at_star >= bf - XI_TIE_TOL {
        return XiSup { value: at_star.max(bf), maximizer: model.gamma_star().clone() };
    }
    let maximizer = Simplex::new(bx).expect("projected point is on the simplex");
    XiSup { value: bf, maximizer }
}

/// Whether `Ξ(γ*) ≥ Ξ_sup − tol`.
pub fn check_bal(model: &ModelSpec, tol: f64) -> bool {
    xi_unchecked(model, model.gamma_star().as_slice()) >= xi_sup(model).value - tol
}

/// `Z_F(ψ, γ) = E ψ(σ)` with independent `σ_h ~ γ_h`.
pub fn zf(psi: &WeightFunction, gammas: &[&[f64]]) -> Result<f64> {
    check_dims(psi.q(), psi.k(), gammas)?;
    Ok(contract_all(psi.table(), psi.shape(), gammas))
}

/// `Z_FM(ψ, h, γ')`: coordinate `h` from `first[h]`, every other coordinate from `second`.
pub fn zfm(psi: &WeightFunction, h: usize, first: &[&[f64]], second: &[&[f64]]) -> Result<f64> {
    check_dims(psi.q(), psi.k(), first)?;
    check_dims(psi.q(), psi.k(), second)?;
    if h >= psi.k() {
        return invalid(format!("coordinate {h} out of range for k = {}", psi.k()));
    }
    Ok(zfm_unchecked(psi, h, first, second))
}

pub(crate) fn zfm_unchecked(psi: &WeightFunction, h: usize, first: &[&[f64]], second: &[&[f64]]) -> f64 {
    let mut vecs: Vec<&[f64]> = second.to_vec();
    vecs[h] = first[h];
    contract_all(psi.table(), psi.shape(), &vecs)
}

/// One factor attached to the variable in `Z_V`: its weight, the coordinate
/// the variable occupies, and distributions for all `k` coordinates
/// (the one at `h` is ignored).
#[derive(Clone, Copy, Debug)]
pub struct VarFactor<'a> {
    pub psi: &'a WeightFunction,
    pub h: usize,
    pub gammas: &'a [&'a [f64]],
}

/// Message `σ ↦ Σ_{τ: τ_h = σ} ψ(τ) Π_{h' ≠ h} γ_{h'}(τ_{h'})`.
pub fn factor_message(f: &VarFactor<'_>) -> Vec<f64> {
    contract_except(f.psi.table(), f.psi.shape(), f.gammas, f.h)
}

fn check_factors(model: &ModelSpec, factors: &[VarFactor<'_>]) -> Result<()> {
    for f in factors {
        if f.psi.shape() != model.shape() {
            return invalid("factor weight does not match the model's q and k");
        }
        if f.h >= model.k() {
            return invalid(format!("coordinate {} out of range for k = {}", f.h, model.k()));
        }
        check_dims(model.q(), model.k(), f.gammas)?;
    }
    Ok(())
}

/// `Z_V = Σ_σ γ*(σ) Π_a msg_a(σ)`.
pub fn zv(model: &ModelSpec, factors: &[VarFactor<'_>]) -> Result<f64> {
    Ok(ln_zv(model, factors)?.exp())
}

/// `ln Z_V`, accumulated in log space.
pub fn ln_zv(model: &ModelSpec, factors: &[VarFactor<'_>]) -> Result<f64> {
    check_factors(model, factors)?;
    Ok(ln_zv_unchecked(model.gamma_star().as_slice(), factors.iter().map(factor_message)))
}

pub(crate) fn ln_zv_unchecked(gamma_star: &[f64], messages: impl Iterator<Item = Vec<f64>>) -> f64 {
    let mut acc: Vec<f64> = gamma_star.iter().map(|g| g.ln()).collect();
    for msg in messages {
        for (a, m) in acc.iter_mut().zip(msg) {
            *a += m.ln();
        }
    }
    logsumexp(&acc)
}

/// `φ_a(d) = (d / k) ln Ξ_sup`.
pub fn phi_annealed(model: &ModelSpec, d: f64) -> Result<f64> {
    if !(0.0..=model.d_max()).contains(&d) {
        return invalid(format!("d = {d} outside [0, d_max = {}]", model.d_max()));
    }
    Ok(d / model.k() as f64 * xi_sup(model).value.ln())
}
