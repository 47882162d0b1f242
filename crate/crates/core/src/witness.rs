//! Structural certificates that a weight law lies in the valid class
//! `ψ = a (1 − b Δ)`, which guarantees `∇I ≥ 0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{guard, invalid, Result};
use crate::model::{ModelSpec, TableShape};
use crate::zoo::{kspin_normalizer, spin, SbmParams};

const RECON_TOL: f64 = 1e-10;
const KEY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessKind {
    /// `Δ = Π_h f_h` with sign-symmetric `b`.
    MinusOne,
    /// `Δ = Σ_i Π_h f_{h,i}` with nonnegative factors.
    PlusOne,
}

/// One realization `(a, b, f)`; `factors[h][i]` is the vector `f_{h,i}` over `[q]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessComponent {
    pub a: f64,
    pub b: f64,
    pub factors: Vec<Vec<Vec<f64>>>,
}

impl WitnessComponent {
    pub fn delta(&self, tau: &[usize]) -> f64 {
        let terms = self.factors[0].len();
        (0..terms)
            .map(|i| tau.iter().enumerate().map(|(h, &c)| self.factors[h][i][c]).product::<f64>())
            .sum()
    }

    fn table(&self, shape: TableShape) -> Vec<f64> {
        (0..shape.len()).map(|i| self.a * (1.0 - self.b * self.delta(&shape.decode(i)))).collect()
    }
}

/// A finite law over components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityWitness {
    pub kind: WitnessKind,
    pub components: Vec<WitnessComponent>,
    pub mixture_probs: Vec<f64>,
}

/// Quantizes a real so that values equal within `KEY_TOL` share a key.
fn key(x: f64) -> i64 {
    (x / KEY_TOL).round() as i64
}

fn vec_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|&x| key(x)).collect()
}

fn check_dims(model: &ModelSpec, w: &ValidityWitness) -> Result<()> {
    if w.components.is_empty() || w.components.len() != w.mixture_probs.len() {
        return invalid("witness needs one mixture probability per component");
    }
    for c in &w.components {
        if c.factors.len() != model.k() {
            return invalid(format!("witness component has {} coordinates, expected k = {}", c.factors.len(), model.k()));
        }
        let terms = c.factors[0].len();
        if terms == 0 {
            return invalid("witness component needs at least one factor term");
        }
        for fam in &c.factors {
            if fam.len() != terms {
                return invalid("every coordinate must carry the same number of factor terms");
            }
            if fam.iter().any(|f| f.len() != model.q()) {
                return invalid(format!("factor vectors must have dimension q = {}", model.q()));
            }
        }
    }
    Ok(())
}

/// Groups near-equal tables and sums their probabilities.
fn table_law(tables: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for (t, p) in tables {
        match out.iter_mut().find(|(u, _)| u.iter().zip(&t).all(|(a, b)| (a - b).abs() <= RECON_TOL)) {
            Some(slot) => slot.1 += p,
            None => out.push((t, p)),
        }
    }
    out
}

fn reconstructs(model: &ModelSpec, w: &ValidityWitness) -> bool {
    let shape = model.shape();
    let ours = table_law(w.components.iter().zip(&w.mixture_probs).map(|(c, &p)| (c.table(shape), p)).collect());
    let theirs = table_law(model.weights().iter().map(|(t, p)| (t.table().to_vec(), p)).collect());
    ours.len() == theirs.len()
        && ours.iter().all(|(t, p)| {
            theirs
                .iter()
                .any(|(u, r)| (p - r).abs() <= RECON_TOL && t.iter().zip(u).all(|(a, b)| (a - b).abs() <= RECON_TOL))
        })
}

type FKey = Vec<Vec<i64>>;

/// Within every group of equal `a`: `b ⊥ f` and `f_1, …, f_k` i.i.d.
fn conditional_structure(w: &ValidityWitness, k: usize, symmetric_b: bool) -> Result<bool> {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, c) in w.components.iter().enumerate() {
        groups.entry(key(c.a)).or_default().push(i);
    }
    for members in groups.values() {
        let total: f64 = members.iter().map(|&i| w.mixture_probs[i]).sum();
        let mut joint: BTreeMap<(i64, Vec<FKey>), f64> = BTreeMap::new();
        let mut b_law: BTreeMap<i64, f64> = BTreeMap::new();
        let mut coord_law: Vec<BTreeMap<FKey, f64>> = vec![BTreeMap::new(); k];
        for &i in members {
            let c = &w.components[i];
            let p = w.mixture_probs[i] / total;
            let fk: Vec<FKey> = c.factors.iter().map(|fam| fam.iter().map(|v| vec_key(v)).collect()).collect();
            *joint.entry((key(c.b), fk.clone())).or_default() += p;
            *b_law.entry(key(c.b)).or_default() += p;
            for (h, f) in fk.into_iter().enumerate() {
                *coord_law[h].entry(f).or_default() += p;
            }
        }
        if symmetric_b {
            for (&bk, &p) in &b_law {
                let mirror = b_law.get(&-bk).copied().unwrap_or(0.0);
                if (p - mirror).abs() > RECON_TOL {
                    return Ok(false);
                }
            }
        }
        // Identically distributed coordinates.
        if coord_law.iter().any(|law| !same_law(law, &coord_law[0])) {
            return Ok(false);
        }
        let marginal: Vec<(&FKey, f64)> = coord_law[0].iter().map(|(f, &p)| (f, p)).collect();
        let cells = b_law.len() as f64 * (marginal.len() as f64).powi(k as i32);
        guard("witness independence check", cells, 1e6)?;
        // Joint law must equal P(b) Π_h P(f_h) on the whole product support.
        let mut idx = vec![0usize; k];
        loop {
            let fk: Vec<FKey> = idx.iter().map(|&j| marginal[j].0.clone()).collect();
            let pf: f64 = idx.iter().map(|&j| marginal[j].1).product();
            for (&bk, &pb) in &b_law {
                let observed = joint.get(&(bk, fk.clone())).copied().unwrap_or(0.0);
                if (observed - pb * pf).abs() > RECON_TOL {
                    return Ok(false);
                }
            }
            if !advance(&mut idx, marginal.len()) {
                break;
            }
        }
    }
    Ok(true)
}

/// Odometer step over `[base]^len`; false after the last tuple.
fn advance(idx: &mut [usize], base: usize) -> bool {
    for slot in idx.iter_mut() {
        *slot += 1;
        if *slot < base {
            return true;
        }
        *slot = 0;
    }
    false
}

fn same_law(a: &BTreeMap<FKey, f64>, b: &BTreeMap<FKey, f64>) -> bool {
    a.len() == b.len() && a.iter().all(|(f, p)| b.get(f).is_some_and(|r| (p - r).abs() <= RECON_TOL))
}

/// Whether `witness` certifies `model` as a valid model.
///
/// Reconstruction failures and violated structural conditions return `false`;
/// malformed witnesses are errors.
pub fn check_validity(model: &ModelSpec, witness: &ValidityWitness) -> Result<bool> {
    check_dims(model, witness)?;
    let p_sum: f64 = witness.mixture_probs.iter().sum();
    if witness.mixture_probs.iter().any(|&p| !(p > 0.0)) || (p_sum - 1.0).abs() > 1e-12 {
        return Ok(false);
    }
    let shape = model.shape();
    for c in &witness.components {
        if !(c.a > 0.0) {
            return Ok(false);
        }
        let bounded = (0..shape.len()).all(|i| (c.b * c.delta(&shape.decode(i))).abs() < 1.0);
        if !bounded {
            return Ok(false);
        }
        match witness.kind {
            WitnessKind::PlusOne => {
                let nonneg = c.factors.iter().flatten().flatten().all(|&x| x >= 0.0);
                if !nonneg || c.b < 0.0 {
                    return Ok(false);
                }
            }
            WitnessKind::MinusOne => {
                if c.factors[0].len() != 1 {
                    return Ok(false);
                }
            }
        }
    }
    if !reconstructs(model, witness) {
        return Ok(false);
    }
    conditional_structure(witness, model.k(), witness.kind == WitnessKind::MinusOne)
}

fn indicator(q: usize, c: usize) -> Vec<f64> {
    (0..q).map(|z| if z == c { 1.0 } else { 0.0 }).collect()
}

/// NAE-SAT witness: `a = 1`, `b = 1 − ε`, one component per uniform `x ∈ {0,1}^k`.
pub fn nae_sat_witness(k: usize, eps: f64) -> ValidityWitness {
    let shape = TableShape { q: 2, k };
    let components = (0..shape.len())
        .map(|i| {
            let x = shape.decode(i);
            let factors = x.iter().map(|&c| vec![indicator(2, c), indicator(2, 1 - c)]).collect();
            WitnessComponent { a: 1.0, b: 1.0 - eps, factors }
        })
        .collect();
    ValidityWitness { kind: WitnessKind::PlusOne, components, mixture_probs: vec![1.0 / shape.len() as f64; shape.len()] }
}

/// k-spin witness: `a = cosh(βJ) / E cosh(βJ)`, `b = tanh(βJ)`, `f_h = spin`.
pub fn kspin_witness(k: usize, beta: f64, j_atoms: &[(f64, f64)]) -> ValidityWitness {
    let norm = kspin_normalizer(beta, j_atoms);
    let f: Vec<f64> = (0..2).map(spin).collect();
    let components = j_atoms
        .iter()
        .map(|&(j, _)| WitnessComponent {
            a: (beta * j).cosh() / norm,
            b: (beta * j).tanh(),
            factors: vec![vec![f.clone()]; k],
        })
        .collect();
    ValidityWitness { kind: WitnessKind::MinusOne, components, mixture_probs: j_atoms.iter().map(|&(_, p)| p).collect() }
}

/// Composed-SBM witness: `a = c↔`, `b = 1`, scaled class and diagonal indicators.
pub fn sbm_witness(p: &SbmParams) -> ValidityWitness {
    let q = p.q;
    let mut terms: Vec<Vec<f64>> = Vec::new();
    for class1 in [true, false] {
        let (c_eq, c_neq) = if class1 { (p.c_eq1, p.c_neq1) } else { (p.c_eq2, p.c_neq2) };
        let members: Vec<usize> = (0..q).filter(|&c| p.in_class1(c) == class1).collect();
        let s0 = ((p.c_cross - c_neq) / p.c_cross).sqrt();
        terms.push((0..q).map(|c| if members.contains(&c) { s0 } else { 0.0 }).collect());
        let s1 = ((c_neq - c_eq) / p.c_cross).sqrt();
        for &m in &members {
            terms.push(indicator(q, m).into_iter().map(|x| x * s1).collect());
        }
    }
    let component = WitnessComponent { a: p.c_cross, b: 1.0, factors: vec![terms.clone(), terms] };
    ValidityWitness { kind: WitnessKind::PlusOne, components: vec![component], mixture_probs: vec![1.0] }
}
