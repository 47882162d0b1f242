//! Small numerical and sampling helpers shared by the estimators.

use rand::Rng;

/// `t ln t`, continuously extended by `0 ln 0 = 0`.
#[inline]
pub fn xlnx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

/// Numerically stable `ln Σ exp(x_i)`; `-inf` for an empty input.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + neumaier_sum(xs.iter().map(|x| (x - max).exp())).ln()
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean of i.i.d. samples with its jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanEstimate {
    /// Leave-one-out jackknife. For the sample mean this reduces to the usual
    /// `s / sqrt(N)`, but it is computed from the replicates so the same code
    /// serves ratio-type statistics elsewhere.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, samples: 0 };
        }
        let total = neumaier_sum(xs.iter().copied());
        let mean = total / n as f64;
        if n == 1 {
            return Self { mean, std_error: 0.0, samples: 1 };
        }
        let nf = n as f64;
        let ss = neumaier_sum(xs.iter().map(|x| {
            let loo = (total - x) / (nf - 1.0);
            (loo - mean) * (loo - mean)
        }));
        let std_error = ((nf - 1.0) / nf * ss).sqrt();
        Self { mean, std_error, samples: n }
    }
}

/// Exact Poisson draw by sequential inversion.
///
/// Large means are split into independent chunks of mean at most 64, whose
/// sum is again Poisson; every chunk is inverted exactly, so there is no
/// truncation of the tail.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    assert!(lambda >= 0.0 && lambda.is_finite(), "Poisson mean must be finite and nonnegative");
    if lambda == 0.0 {
        return 0;
    }
    const CHUNK: f64 = 64.0;
    let chunks = (lambda / CHUNK).ceil().max(1.0) as u64;
    let part = lambda / chunks as f64;
    (0..chunks).map(|_| poisson_inversion(rng, part)).sum()
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let u: f64 = rng.gen();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= lambda / k as f64;
        let next = cdf + p;
        if next == cdf {
            // Remaining mass is below double resolution.
            break;
        }
        cdf = next;
    }
    k
}

/// Cumulative table for repeated categorical draws.
#[derive(Clone, Debug)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    /// Weights need not be normalized but must be nonnegative with a positive sum.
    pub fn new(weights: &[f64]) -> Self {
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in weights {
            debug_assert!(w >= 0.0);
            acc += w;
            cdf.push(acc);
        }
        assert!(acc > 0.0, "categorical weights must have positive mass");
        for c in &mut cdf {
            *c /= acc;
        }
        Self { cdf }
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Index for a uniform variate `u` in `[0, 1)`.
    pub fn index_of(&self, u: f64) -> usize {
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.cdf.len() - 1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_of(rng.gen())
    }
}

/// Systematic (low-variance) resampling of `count` indices from `weights`.
pub fn systematic_resample<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], count: usize) -> Vec<usize> {
    let cat = Categorical::new(weights);
    let u0: f64 = rng.gen::<f64>() / count as f64;
    (0..count)
        .map(|i| cat.index_of(u0 + i as f64 / count as f64))
        .collect()
}

/// Uniform point of the probability simplex of dimension `q` (flat Dirichlet).
pub fn uniform_simplex<R: Rng + ?Sized>(rng: &mut R, q: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..q).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

/// Total variation distance `½ Σ |a - b|`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    0.5 * neumaier_sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

/// Relative entropy `Σ a ln(a / b)` in nats; infinite if `a` is not dominated by `b`.
pub fn kl_divergence(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut terms = Vec::with_capacity(a.len());
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            terms.push(x * (x / y).ln());
        }
    }
    neumaier_sum(terms)
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -neumaier_sum(p.iter().map(|&x| xlnx(x)))
}

/// `ln n!` by direct summation (exact enough for the small `n` used here).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn xlnx_edges() {
        assert_eq!(xlnx(0.0), 0.0);
        assert_eq!(xlnx(1.0), 0.0);
        assert!((xlnx(std::f64::consts::E) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn logsumexp_matches_naive() {
        let xs = [0.1, -2.0, 3.5];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((logsumexp(&xs) - naive).abs() < 1e-14);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert!((logsumexp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn jackknife_of_mean_is_classical() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let est = MeanEstimate::from_samples(&xs);
        let m = 3.5;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 3.0;
        assert!((est.mean - m).abs() < 1e-15);
        assert!((est.std_error - (var / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn poisson_mean_and_zero() {
        let mut rng = RngStream::new(1, 0).rng();
        assert_eq!(poisson(&mut rng, 0.0), 0);
        let n = 100_000;
        let lambda = 100.0;
        let draws: Vec<f64> = (0..n).map(|_| poisson(&mut rng, lambda) as f64).collect();
        let est = MeanEstimate::from_samples(&draws);
        assert!((est.mean - lambda).abs() < 3.0 * (lambda / n as f64).sqrt());
    }

    #[test]
    fn categorical_respects_weights() {
        let cat = Categorical::new(&[0.0, 1.0, 3.0]);
        assert_eq!(cat.index_of(0.0), 1);
        assert_eq!(cat.index_of(0.26), 2);
        assert_eq!(cat.index_of(0.9999999), 2);
    }

    #[test]
    fn systematic_resample_counts() {
        let mut rng = RngStream::new(2, 0).rng();
        let idx = systematic_resample(&mut rng, &[1.0, 1.0, 2.0], 400);
        let c2 = idx.iter().filter(|&&i| i == 2).count();
        assert!((199..=201).contains(&c2));
    }
}
