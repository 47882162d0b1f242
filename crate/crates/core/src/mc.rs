//! Finite-size Monte-Carlo estimates of quenched free entropies.
//!
//! Every sampled graph is solved exactly, so the estimators carry no bias
//! beyond the finite sample; `n` is bounded by the exact oracle's guard.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{guard, invalid, Error, Result};
use crate::exact::{free_entropy, ASSIGNMENT_LIMIT};
use crate::graph::{nishimori_weights, sample_iid, sample_m, sample_nishimori, sample_null, sample_teacher_student, FactorGraph, NishimoriLaw};
use crate::model::ModelSpec;
use crate::rng::RngStream;
use crate::stats::MeanEstimate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Null,
    PlantedIid,
    PlantedNishimori,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Null, Variant::PlantedIid, Variant::PlantedNishimori];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Null => "null",
            Variant::PlantedIid => "planted_iid",
            Variant::PlantedNishimori => "planted_nishimori",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant '{s}' (null, planted_iid, planted_nishimori)")))
    }
}

/// Nishimori laws by factor count, built on first use.
#[derive(Default)]
struct LawCache(Mutex<HashMap<usize, Arc<NishimoriLaw>>>);

impl LawCache {
    fn get(&self, model: &ModelSpec, n: usize, m: usize) -> Result<Arc<NishimoriLaw>> {
        if let Some(law) = self.0.lock().expect("cache lock").get(&m) {
            return Ok(law.clone());
        }
        let law = Arc::new(nishimori_weights(model, n, m)?);
        Ok(self.0.lock().expect("cache lock").entry(m).or_insert(law).clone())
    }
}

fn check_size(model: &ModelSpec, n: usize, samples: usize) -> Result<()> {
    if n == 0 {
        return invalid("n must be positive");
    }
    if samples < 2 {
        return invalid("need at least 2 samples");
    }
    guard("assignments q^n", (model.q() as f64).powi(n as i32), ASSIGNMENT_LIMIT)
}

fn draw_graph<R: Rng + ?Sized>(
    model: &ModelSpec,
    n: usize,
    m: usize,
    variant: Variant,
    laws: &LawCache,
    rng: &mut R,
) -> Result<FactorGraph> {
    Ok(match variant {
        Variant::Null => sample_null(model, n, m, rng),
        Variant::PlantedIid => {
            let sigma = sample_iid(model, n, rng);
            sample_teacher_student(model, &sigma, m, rng)
        }
        Variant::PlantedNishimori => {
            let law = laws.get(model, n, m)?;
            let sigma = sample_nishimori(&law, rng);
            sample_teacher_student(model, &sigma, m, rng)
        }
    })
}

/// `φ(G) = ln Z(G)/n`, with the empty graph pinned to exactly 0.
fn phi(model: &ModelSpec, g: &FactorGraph) -> Result<f64> {
    if g.m() == 0 {
        Ok(0.0)
    } else {
        free_entropy(model, g)
    }
}

fn per_sample<T, F>(samples: usize, stream: &RngStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<T> + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| f(&mut stream.substream(i as u64).rng()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuenchedEstimate {
    pub n: usize,
    pub d: f64,
    pub variant: Variant,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl QuenchedEstimate {
    pub const CSV_HEADER: &'static str = "n,d,variant,estimate,std_error,samples";

    pub fn csv_row(&self) -> String {
        format!("{},{:?},{},{:?},{:?},{}", self.n, self.d, self.variant, self.estimate, self.std_error, self.samples)
    }
}

/// `E[φ(G°)]` with `m ~ Po(dn/k)` drawn afresh for every graph.
pub fn quenched_free_entropy(
    model: &ModelSpec,
    n: usize,
    d: f64,
    variant: Variant,
    samples: usize,
    stream: &RngStream,
) -> Result<QuenchedEstimate> {
    check_size(model, n, samples)?;
    let laws = LawCache::default();
    let values = per_sample(samples, stream, |rng| {
        let m = sample_m(model, d, n, rng)?;
        phi(model, &draw_graph(model, n, m, variant, &laws, rng)?)
    })?;
    let est = MeanEstimate::from_samples(&values);
    Ok(QuenchedEstimate { n, d, variant, estimate: est.mean, std_error: est.std_error, samples })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderingReport {
    /// `Ê φ(G*(σ̂))`.
    pub planted: MeanEstimate,
    /// `Ê (1/n) ln E[Z | m]`.
    pub annealed: MeanEstimate,
    /// `Ê φ(G)`.
    pub null: MeanEstimate,
    /// Paired differences planted − annealed and annealed − null.
    pub planted_gap: MeanEstimate,
    pub null_gap: MeanEstimate,
}

impl OrderingReport {
    /// Both paired gaps are at least `−3σ`.
    pub fn pass(&self) -> bool {
        let ok = |g: &MeanEstimate| g.mean >= -3.0 * g.std_error - 1e-12;
        ok(&self.planted_gap) && ok(&self.null_gap)
    }

    /// Both paired gaps exceed `3σ`.
    pub fn strict(&self) -> bool {
        let ok = |g: &MeanEstimate| g.mean > 3.0 * g.std_error + 1e-12;
        ok(&self.planted_gap) && ok(&self.null_gap)
    }
}

/// The chain `E φ(G*(σ̂)) ≥ (1/n) ln E Z ≥ E φ(G)`, which holds exactly for
/// every `m`; each sample draws one `m` and evaluates all three at that `m`.
pub fn ordering_check(model: &ModelSpec, n: usize, d: f64, samples: usize, stream: &RngStream) -> Result<OrderingReport> {
    check_size(model, n, samples)?;
    let laws = LawCache::default();
    let triples = per_sample(samples, stream, |rng| {
        let m = sample_m(model, d, n, rng)?;
        if m == 0 {
            return Ok([0.0; 3]);
        }
        let law = laws.get(model, n, m)?;
        let sigma = sample_nishimori(&law, rng);
        let planted = phi(model, &sample_teacher_student(model, &sigma, m, rng))?;
        let null = phi(model, &sample_null(model, n, m, rng))?;
        Ok([planted, law.log_norm / n as f64, null])
    })?;
    let col = |f: &dyn Fn(&[f64; 3]) -> f64| MeanEstimate::from_samples(&triples.iter().map(f).collect::<Vec<_>>());
    Ok(OrderingReport {
        planted: col(&|t| t[0]),
        annealed: col(&|t| t[1]),
        null: col(&|t| t[2]),
        planted_gap: col(&|t| t[0] - t[1]),
        null_gap: col(&|t| t[1] - t[2]),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub r: f64,
    /// Empirical `P[|φ − mean| ≥ r]`.
    pub prob: f64,
    pub count: usize,
}

/// Least-squares fit of `ln P[|φ − mean| ≥ r]` against `r²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub m: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub tail: Vec<TailPoint>,
    /// Present when at least three grid points have tail count ≥ 100.
    pub fit: Option<TailFit>,
}

impl ConcentrationReport {
    /// Negative slope and `R² > 0.9`, when a fit exists.
    pub fn sub_gaussian_shape(&self) -> Option<bool> {
        self.fit.map(|f| f.slope < 0.0 && f.r_squared > 0.9)
    }
}

fn fit_tail(points: &[TailPoint]) -> Option<TailFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.count >= 100 && p.r > 0.0)
        .map(|p| (p.r * p.r, p.prob.ln()))
        .collect();
    if used.len() < 3 {
        return None;
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / k;
    let my = used.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(TailFit { slope, intercept: my - slope * mx, r_squared, points: used.len() })
}

/// Empirical tail of `φ(G°)` around its mean at the fixed factor count
/// `m = round(dn/k)`. The default grid has 20 points up to five standard deviations.
pub fn concentration_check(
    model: &ModelSpec,
    n: usize,
    d: f64,
    variant: Variant,
    samples: usize,
    stream: &RngStream,
    r_grid: Option<&[f64]>,
) -> Result<ConcentrationReport> {
    check_size(model, n, samples)?;
    if !(0.0..=model.d_max()).contains(&d) {
        return invalid(format!("d = {d} outside [0, d_max = {}]", model.d_max()));
    }
    let m = (d * n as f64 / model.k() as f64).round() as usize;
    let laws = LawCache::default();
    let values = per_sample(samples, stream, |rng| phi(model, &draw_graph(model, n, m, variant, &laws, rng)?))?;
    let est = MeanEstimate::from_samples(&values);
    let std_dev = est.std_error * (samples as f64).sqrt();
    let grid: Vec<f64> = match r_grid {
        Some(g) => g.to_vec(),
        None => {
            let unit = if std_dev > 0.0 { std_dev / 4.0 } else { 1e-3 };
            (1..=20).map(|j| j as f64 * unit).collect()
        }
    };
    let tail: Vec<TailPoint> = grid
        .iter()
        .map(|&r| {
            let count = values.iter().filter(|v| (*v - est.mean).abs() >= r).count();
            TailPoint { r, prob: count as f64 / samples as f64, count }
        })
        .collect();
    let fit = fit_tail(&tail);
    Ok(ConcentrationReport { m, mean: est.mean, std_dev, tail, fit })
}
