use planted_core::bethe::*;
use planted_core::functionals::{phi_annealed, xi_sup};
use planted_core::rng::RngStream;
use planted_core::stats::xlnx;
use planted_core::zoo::{make_constant, make_nae_sat};
use planted_core::ModelSpec;

/// `E_{d̂ ~ Po(d)}` of `Ξ_sup^{−d̂} xlnx(Z_V)` for a point-mass population,
/// enumerating factor-type counts and truncating `d̂` once the tail is below 1e-12.
fn point_mass_variable_term(model: &ModelSpec, d: f64, gamma: &[f64]) -> f64 {
    let k = model.k();
    let q = model.q();
    let gs = model.gamma_star().as_slice();
    // Message of each (atom, h) type and its probability.
    let mut types: Vec<(Vec<f64>, f64)> = Vec::new();
    for (psi, p) in model.weights().iter() {
        for h in 0..k {
            let mut msg = vec![0.0; q];
            for t in 0..psi.table().len() {
                let tau = psi.shape().decode(t);
                let w: f64 = (0..k).filter(|&j| j != h).map(|j| gamma[tau[j]]).product();
                msg[tau[h]] += psi.table()[t] * w;
            }
            types.push((msg, p / k as f64));
        }
    }
    let xs = xi_sup(model).value;
    let mut total = 0.0;
    let mut pois = (-d).exp();
    let mut tail = 1.0 - pois;
    let mut dh = 0usize;
    loop {
        let mut acc = 0.0;
        let mut counts = vec![0usize; types.len()];
        enumerate(&mut counts, 0, dh, &mut |c| {
            let mut ln_mult = ln_fact(dh);
            let mut zv = 0.0;
            for &ci in c.iter() {
                ln_mult -= ln_fact(ci);
            }
            let mut lp = ln_mult;
            for (ci, (_, p)) in c.iter().zip(&types) {
                lp += *ci as f64 * p.ln();
            }
            for s in 0..q {
                let mut prod = gs[s];
                for (ci, (m, _)) in c.iter().zip(&types) {
                    prod *= m[s].powi(*ci as i32);
                }
                zv += prod;
            }
            acc += lp.exp() * xlnx(zv) / xs.powi(dh as i32);
        });
        total += pois * acc;
        if tail < 1e-12 {
            break;
        }
        dh += 1;
        pois *= d / dh as f64;
        tail -= pois;
    }
    total
}

fn ln_fact(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

fn enumerate(counts: &mut Vec<usize>, slot: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
    if slot + 1 == counts.len() {
        counts[slot] = left;
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[slot] = c;
        enumerate(counts, slot + 1, left - c, f);
    }
    counts[slot] = 0;
}

#[test]
fn nae_point_mass_matches_enumeration() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let d = 1.0;
    for gamma in [[0.5, 0.5], [0.3, 0.7]] {
        let pi = Population::point_mass(&gamma, 2).unwrap();
        // Factor term: Z_F at a point mass has the law of the atom's contraction.
        let xs = xi_sup(&m).value;
        let fac: f64 = m
            .weights()
            .iter()
            .map(|(psi, p)| {
                let z: f64 = (0..8)
                    .map(|t| psi.table()[t] * psi.shape().decode(t).iter().map(|&c| gamma[c]).product::<f64>())
                    .sum();
                p * xlnx(z)
            })
            .sum();
        let oracle = point_mass_variable_term(&m, d, &gamma) - d * 2.0 / (3.0 * xs) * fac;
        let est = eval_bethe(&m, d, &pi, 400_000, &RngStream::new(11, 0)).unwrap();
        println!("gamma={gamma:?} oracle={oracle:.6} mc={:.6} se={:.2e}", est.value, est.std_error);
        assert!((est.value - oracle).abs() < 1e-3);
        assert!((est.value - oracle).abs() < 4.0 * est.std_error + 1e-12);
    }
    let pi = Population::point_mass(&[0.5, 0.5], 2).unwrap();
    let est = eval_bethe(&m, d, &pi, 10_000, &RngStream::new(11, 0)).unwrap();
    let phi = phi_annealed(&m, d).unwrap();
    assert!((est.value - phi).abs() <= 3.0 * est.std_error);
}

#[test]
fn constant_weights_closed_form() {
    let c = 1.3f64;
    let m = make_constant(2, 3, &[(c, 1.0)]).unwrap();
    let pi = Population::uniform_random(2, 100, &mut RngStream::new(1, 0).rng()).unwrap();
    let (pi, _) = project_to_mean(&pi, m.gamma_star(), m.psi_min()).unwrap();
    for d in [0.5, 2.0, 5.0] {
        let est = eval_bethe(&m, d, &pi, 100_000, &RngStream::new(2, 0)).unwrap();
        let expect = d / 3.0 * c.ln();
        assert!((est.value - expect).abs() <= 3.0 * est.std_error + 1e-12, "d={d}: {est:?} vs {expect}");
    }
}

#[test]
fn reweighting_integrates_to_one() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let pi = Population::uniform_random(2, 200, &mut RngStream::new(5, 0).rng()).unwrap();
    let (pi, rep) = project_to_mean(&pi, m.gamma_star(), m.psi_min()).unwrap();
    assert!(rep.mean_after.l2_distance(m.gamma_star()) < 1e-10);
    let r = reweighting_mean(&m, 2.0, &pi, 200_000, &RngStream::new(6, 0)).unwrap();
    assert!((r.mean - 1.0).abs() <= 3.0 * r.std_error, "{r:?}");
}

#[test]
fn projection_moves_at_most_alpha() {
    let gs = planted_core::Simplex::new(vec![0.2, 0.5, 0.3]).unwrap();
    for seed in 0..50 {
        let pi = Population::uniform_random(3, 7, &mut RngStream::new(seed, 0).rng()).unwrap();
        let (out, rep) = project_to_mean(&pi, &gs, 0.1).unwrap();
        assert!((0.0..=1.0).contains(&rep.alpha));
        assert!(rep.mean_after.l2_distance(&gs) < 1e-10);
        // Coupling: each member keeps (1 − α) of its mass in place.
        let moved: f64 = 1.0 - out.weights()[..pi.len()].iter().sum::<f64>();
        assert!(moved <= rep.alpha + 1e-15);
    }
}

#[test]
fn lipschitz_in_one_member() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let d = 0.5;
    let l = lipschitz_constant(&m, d);
    for seed in 0..5 {
        let base = Population::uniform_random(2, 20, &mut RngStream::new(seed, 0).rng()).unwrap();
        let mut members = base.members().to_vec();
        let delta = 0.05;
        let x = members[3][0];
        let shifted = if x + delta <= 1.0 { x + delta } else { x - delta };
        members[3] = vec![shifted, 1.0 - shifted];
        let other = Population::new(members).unwrap();
        let s = RngStream::new(100 + seed, 0);
        let a = eval_bethe(&m, d, &base, 20_000, &s).unwrap();
        let b = eval_bethe(&m, d, &other, 20_000, &s).unwrap();
        assert!((a.value - b.value).abs() <= l * delta / base.len() as f64, "{} vs bound {}", (a.value - b.value).abs(), l * delta / 20.0);
    }
}

#[test]
fn deterministic_across_thread_counts() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let cfg = PopulationConfig { size: 600, sweeps: 3, eval_samples: 2000, seed: 9, init: Init::UniformRandom, ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| population_dynamics(&m, 1.0, &cfg).unwrap())
    };
    let (p1, t1) = run(1);
    let (p4, t4) = run(4);
    assert_eq!(p1, p4);
    assert_eq!(t1, t4);
}

#[test]
fn dynamics_trivial_cases() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let cfg = PopulationConfig { size: 200, sweeps: 2, eval_samples: 500, ..Default::default() };
    let (pop, trace) = population_dynamics(&m, 0.0, &cfg).unwrap();
    assert!(pop.members().iter().all(|g| (g[0] - 0.5).abs() < 1e-15));
    assert!(trace.iter().all(|b| b.value == 0.0));
    let c = make_constant(2, 3, &[(1.3, 1.0)]).unwrap();
    let cfg = PopulationConfig { size: 500, sweeps: 3, eval_samples: 20_000, init: Init::UniformRandom, ..Default::default() };
    let (pop, trace) = population_dynamics(&c, 2.0, &cfg).map_err(|e| e.to_string()).unwrap();
    assert!(pop.members().iter().all(|g| (g[0] - 0.5).abs() < 1e-12));
    let last = trace.last().unwrap();
    assert!((last.value - 2.0 / 3.0 * 1.3f64.ln()).abs() <= 3.0 * last.std_error + 1e-12);
    let b = estimate_b_sup(&c, 0.0, 2, &cfg).unwrap();
    assert_eq!(b.value, 0.0);
}
