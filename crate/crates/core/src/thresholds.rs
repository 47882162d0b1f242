//! Limiting quantities built from `φ_a` and `B̂_sup`, and location of `d_cond`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bethe::{estimate_b_sup, BetheEstimate, PopulationConfig};
use crate::error::{invalid, Result};
use crate::functionals::{phi_annealed, xi_sup};
use crate::model::ModelSpec;
use crate::stats::xlnx;

/// Positive margin on top of `3σ`; keeps rounding noise of zero-variance
/// estimates from registering as a detection.
pub const DETECTION_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ThresholdConfig {
    pub population: PopulationConfig,
    pub restarts: usize,
    /// Upper end of the search interval; `None` uses the model's `d_max`.
    pub d_max: Option<f64>,
    /// Number of grid intervals on `[0, d_max]`.
    pub grid: usize,
    /// Bracket width to bisect down to; `None` stops at the grid spacing.
    pub tolerance: Option<f64>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            population: PopulationConfig { size: 2000, sweeps: 30, eval_samples: 20_000, ..Default::default() },
            restarts: 3,
            d_max: None,
            grid: 10,
            tolerance: None,
        }
    }
}

/// Direction of the systematic error inherited from `B̂_sup`, which can only
/// miss the supremum from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    LowerBoundEstimate,
    UpperBoundEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub label: &'static str,
    pub d: f64,
    pub value: f64,
    pub std_error: f64,
    pub kind: BoundKind,
    pub phi_a: f64,
    pub b_sup: BetheEstimate,
}

impl LimitEstimate {
    /// `value > 3σ`, with a small absolute floor.
    pub fn detected(&self) -> bool {
        self.value > 3.0 * self.std_error + DETECTION_FLOOR
    }
}

fn b_sup(model: &ModelSpec, d: f64, config: &ThresholdConfig) -> Result<BetheEstimate> {
    estimate_b_sup(model, d, config.restarts, &config.population)
}

/// `δ*(d) = B_sup(d) − φ_a(d)`, estimated as `B̂_sup − φ_a`.
pub fn delta_star(model: &ModelSpec, d: f64, config: &ThresholdConfig) -> Result<LimitEstimate> {
    let phi_a = phi_annealed(model, d)?;
    let b = b_sup(model, d, config)?;
    Ok(delta_from(d, phi_a, b))
}

fn delta_from(d: f64, phi_a: f64, b: BetheEstimate) -> LimitEstimate {
    LimitEstimate {
        label: "delta_star",
        d,
        value: b.value - phi_a,
        std_error: b.std_error,
        kind: BoundKind::LowerBoundEstimate,
        phi_a,
        b_sup: b,
    }
}

/// Limit of the relative entropy `D(planted ‖ null)/n`; the same estimate as [`delta_star`].
pub fn relative_entropy_limit(model: &ModelSpec, d: f64, config: &ThresholdConfig) -> Result<LimitEstimate> {
    Ok(LimitEstimate { label: "relative_entropy_limit", ..delta_star(model, d, config)? })
}

/// `d/(k Ξ_sup) · E[ψ(σ) ln ψ(σ)]` with `σ ~ γ*^{⊗k}`, summed exactly.
pub fn mutual_information_first_term(model: &ModelSpec, d: f64) -> f64 {
    let shape = model.shape();
    let gs = model.gamma_star().as_slice();
    let mut tau = vec![0; shape.k];
    let mut total = 0.0;
    for (psi, p) in model.weights().iter() {
        for (t, &w) in psi.table().iter().enumerate() {
            shape.decode_into(t, &mut tau);
            total += p * tau.iter().map(|&c| gs[c]).product::<f64>() * xlnx(w);
        }
    }
    d / (model.k() as f64 * xi_sup(model).value) * total
}

/// Limit of `I(σ̂; G)/n`: the exact first term minus `B̂_sup`.
pub fn mutual_information_limit(model: &ModelSpec, d: f64, config: &ThresholdConfig) -> Result<LimitEstimate> {
    let phi_a = phi_annealed(model, d)?;
    let b = b_sup(model, d, config)?;
    Ok(mi_from(model, d, phi_a, b))
}

fn mi_from(model: &ModelSpec, d: f64, phi_a: f64, b: BetheEstimate) -> LimitEstimate {
    LimitEstimate {
        label: "mutual_information_limit",
        d,
        value: mutual_information_first_term(model, d) - b.value,
        std_error: b.std_error,
        kind: BoundKind::UpperBoundEstimate,
        phi_a,
        b_sup: b,
    }
}

/// One grid point of a threshold sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub d: f64,
    pub phi_a: f64,
    pub b_sup: f64,
    pub b_sup_se: f64,
    pub delta_star: f64,
    pub mi_limit: f64,
}

impl ThresholdRow {
    pub fn detected(&self) -> bool {
        self.delta_star > 3.0 * self.b_sup_se + DETECTION_FLOOR
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CondBracket {
    Bracket { lo: f64, hi: f64 },
    NotDetected { d_max: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Sorted by `d`; the first row is `d = 0`.
    pub rows: Vec<ThresholdRow>,
    pub d_cond_bracket: CondBracket,
    pub lipschitz_constant: f64,
}

impl ThresholdReport {
    pub fn d_grid(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d).collect()
    }

    /// `(δ̂*, std_error)` per grid point.
    pub fn delta_star(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.delta_star, r.b_sup_se)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,phi_a,b_sup,b_sup_se,delta_star,mi_limit\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?},{:?}\n",
                r.d, r.phi_a, r.b_sup, r.b_sup_se, r.delta_star, r.mi_limit
            ));
        }
        out
    }
}

/// Slope bound `(2k−1) ln ψ_max / k` for the limit curves in `d`.
pub fn curve_lipschitz_constant(model: &ModelSpec) -> f64 {
    let k = model.k() as f64;
    (2.0 * k - 1.0) * model.psi_max().ln() / k
}

fn row_at(model: &ModelSpec, d: f64, config: &ThresholdConfig) -> Result<ThresholdRow> {
    let phi_a = phi_annealed(model, d)?;
    let b = b_sup(model, d, config)?;
    let delta = delta_from(d, phi_a, b);
    let mi = mi_from(model, d, phi_a, b);
    Ok(ThresholdRow {
        d,
        phi_a,
        b_sup: b.value,
        b_sup_se: b.std_error,
        delta_star: delta.value,
        mi_limit: mi.value,
    })
}

/// Sweeps `δ̂*` over a uniform grid on `[0, d_max]`, then bisects the first
/// interval whose right end is detected (`δ̂* > 3σ`).
///
/// Only detection is one-sided sound: the upper end of the bracket is a
/// statistically supported upper bound on `d_cond`, the lower end is the last
/// point where nothing was detected.
pub fn locate_d_cond(model: &ModelSpec, config: &ThresholdConfig) -> Result<ThresholdReport> {
    let d_max = config.d_max.unwrap_or(model.d_max());
    if !(d_max > 0.0 && d_max <= model.d_max()) {
        return invalid(format!("search interval end {d_max} must lie in (0, {}]", model.d_max()));
    }
    if config.grid == 0 {
        return invalid("grid needs at least one interval");
    }
    if let Some(tol) = config.tolerance {
        if !(tol > 0.0) {
            return invalid(format!("tolerance {tol} must be positive"));
        }
    }
    let grid: Vec<f64> = (0..=config.grid).map(|i| d_max * i as f64 / config.grid as f64).collect();
    let mut rows = grid
        .par_iter()
        .map(|&d| row_at(model, d, config))
        .collect::<Result<Vec<_>>>()?;
    let bracket = match rows.iter().position(ThresholdRow::detected) {
        None => CondBracket::NotDetected { d_max },
        Some(i) => {
            let (mut lo, mut hi) = (rows[i.saturating_sub(1)].d, rows[i].d);
            if let Some(tol) = config.tolerance {
                while hi - lo > tol {
                    let mid = 0.5 * (lo + hi);
                    let row = row_at(model, mid, config)?;
                    if row.detected() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    rows.push(row);
                }
            }
            CondBracket::Bracket { lo, hi }
        }
    };
    rows.sort_by(|a, b| a.d.total_cmp(&b.d));
    Ok(ThresholdReport { rows, d_cond_bracket: bracket, lipschitz_constant: curve_lipschitz_constant(model) })
}

/// Lower bounds on `φ_a(d) − φ_q↑(d)` from a `δ*` curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapBound {
    pub c: f64,
    /// `c · sup_{d' ≤ d} δ*(d')²`.
    pub squared: f64,
    /// Smaller root of `x = c (δ*(d) + x)²`, i.e. `δ̃ − √(δ̃² − δ*(d)²)` with
    /// `δ̃ = 1/(2c) − δ*(d)`; real whenever `c δ*(d) ≤ 1/4`.
    pub quadratic: f64,
}

/// `curve` holds `(d', δ*(d'))` pairs; negative estimates count as zero.
/// `c` defaults to `1/(4 sup δ* + ε)`.
pub fn condensation_gap_bound(curve: &[(f64, f64)], d: f64, c: Option<f64>) -> Result<GapBound> {
    let upto: Vec<(f64, f64)> = curve.iter().filter(|(x, _)| *x <= d).map(|&(x, v)| (x, v.max(0.0))).collect();
    let Some(&(_, at_d)) = upto.iter().max_by(|a, b| a.0.total_cmp(&b.0)) else {
        return invalid(format!("the curve has no point at or below d = {d}"));
    };
    let sup = upto.iter().map(|p| p.1).fold(0.0, f64::max);
    let c = c.unwrap_or(1.0 / (4.0 * sup + 1e-12));
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("c = {c} must be positive and finite"));
    }
    if c * at_d > 0.25 {
        return invalid(format!("c·δ* = {} exceeds 1/4", c * at_d));
    }
    let tilde = 0.5 / c - at_d;
    let disc = (tilde * tilde - at_d * at_d).max(0.0);
    Ok(GapBound { c, squared: c * sup * sup, quadratic: tilde - disc.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_bound_examples() {
        let g = condensation_gap_bound(&[(0.0, 0.0), (1.0, 0.01)], 1.0, Some(1.0)).unwrap();
        let tilde: f64 = 0.49;
        assert!((g.quadratic - (tilde - (tilde * tilde - 1e-4).sqrt())).abs() < 1e-15);
        // The root solves x = c (δ* + x)² and dominates c δ*².
        assert!((g.quadratic - (0.01 + g.quadratic).powi(2)).abs() < 1e-15);
        assert!(g.quadratic >= g.squared);
        assert!((g.squared - 1e-4).abs() < 1e-18);
        let zero = condensation_gap_bound(&[(0.0, 0.0), (1.0, -0.002)], 1.0, None).unwrap();
        assert_eq!((zero.squared, zero.quadratic), (0.0, 0.0));
        assert!(condensation_gap_bound(&[(1.0, 0.3)], 1.0, Some(1.0)).is_err());
        assert!(condensation_gap_bound(&[(2.0, 0.1)], 1.0, None).is_err());
    }
}
