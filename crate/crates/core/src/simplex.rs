use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sum deviations up to this size are renormalized away; larger ones are rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// A probability vector on `q` colors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Simplex {
    probs: Vec<f64>,
}

impl Simplex {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("a simplex point needs at least one color");
        }
        if let Some(x) = probs.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return invalid(format!("simplex entry {x} is negative or not finite"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return invalid(format!("simplex entries sum to {sum}, not 1"));
        }
        let probs = probs.into_iter().map(|x| x / sum).collect();
        Ok(Self { probs })
    }

    pub fn uniform(q: usize) -> Self {
        assert!(q >= 1);
        Self { probs: vec![1.0 / q as f64; q] }
    }

    pub fn point_mass(q: usize, color: usize) -> Self {
        assert!(color < q);
        let mut probs = vec![0.0; q];
        probs[color] = 1.0;
        Self { probs }
    }

    pub fn q(&self) -> usize {
        self.probs.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn total_variation(&self, other: &Simplex) -> f64 {
        crate::stats::total_variation(&self.probs, &other.probs)
    }

    pub fn l2_distance(&self, other: &Simplex) -> f64 {
        l2_distance(&self.probs, &other.probs)
    }

    pub fn min(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl std::ops::Index<usize> for Simplex {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

impl TryFrom<Vec<f64>> for Simplex {
    type Error = crate::error::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Simplex::new(v)
    }
}

impl From<Simplex> for Vec<f64> {
    fn from(s: Simplex) -> Vec<f64> {
        s.probs
    }
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        acc += uj;
        let t = (acc - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renormalizes_small_drift_and_rejects_large() {
        let s = Simplex::new(vec![0.5, 0.5 + 1e-10]).unwrap();
        assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Simplex::new(vec![0.5, 0.6]).is_err());
        assert!(Simplex::new(vec![-0.1, 1.1]).is_err());
        assert!(Simplex::new(vec![]).is_err());
    }

    #[test]
    fn json_roundtrip_validates() {
        let s: Simplex = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(s.as_slice(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<Simplex>("[0.25, 0.25]").is_err());
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex(v in proptest::collection::vec(-3.0f64..3.0, 1..7)) {
            let p = project_onto_simplex(&v);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // Idempotent on its image.
            let pp = project_onto_simplex(&p);
            prop_assert!(l2_distance(&p, &pp) < 1e-12);
        }
    }
}
