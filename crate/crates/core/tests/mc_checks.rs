use planted_core::exact::free_entropy;
use planted_core::functionals::phi_annealed;
use planted_core::graph::{sample_iid, sample_teacher_student, FactorGraph};
use planted_core::mc::*;
use planted_core::rng::RngStream;
use planted_core::zoo::{make_constant, make_nae_sat};
use proptest::prelude::*;

#[test]
fn zero_degree_is_exactly_zero() {
    let m = make_nae_sat(3, 0.5).unwrap();
    for v in Variant::ALL {
        let e = quenched_free_entropy(&m, 5, 0.0, v, 50, &RngStream::new(1, 0)).unwrap();
        assert_eq!((e.estimate, e.std_error), (0.0, 0.0));
    }
    let r = ordering_check(&m, 5, 0.0, 20, &RngStream::new(1, 0)).unwrap();
    assert_eq!((r.planted.mean, r.annealed.mean, r.null.mean), (0.0, 0.0, 0.0));
    let c = concentration_check(&m, 5, 0.0, Variant::Null, 20, &RngStream::new(1, 0), None).unwrap();
    assert_eq!((c.m, c.std_dev), (0, 0.0));
}

#[test]
fn constant_weights_match_closed_form() {
    let c = 1.3f64;
    let m = make_constant(2, 3, &[(c, 1.0)]).unwrap();
    for v in Variant::ALL {
        let e = quenched_free_entropy(&m, 6, 2.0, v, 4000, &RngStream::new(2, 0)).unwrap();
        let expect = 2.0 / 3.0 * c.ln();
        assert!((e.estimate - expect).abs() <= 3.0 * e.std_error, "{v}: {e:?} vs {expect}");
    }
    let r = ordering_check(&m, 6, 2.0, 500, &RngStream::new(3, 0)).unwrap();
    assert!(r.pass() && !r.strict());
    assert!(r.planted_gap.mean.abs() < 1e-12 && r.null_gap.mean.abs() < 1e-12);
    let conc = concentration_check(&m, 6, 2.0, Variant::PlantedIid, 300, &RngStream::new(4, 0), None).unwrap();
    assert_eq!(conc.std_dev, 0.0);
    assert!(conc.tail.iter().all(|t| t.r > 0.0 && t.count == 0));
}

#[test]
fn nae_planted_estimates_approach_annealed() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let phi_a = phi_annealed(&m, 0.5).unwrap();
    assert!((phi_a - 0.5 / 3.0 * 0.875f64.ln()).abs() < 1e-12);
    for (n, tol) in [(6, 0.05), (8, 0.04), (10, 0.03)] {
        let e = quenched_free_entropy(&m, n, 0.5, Variant::PlantedIid, 3000, &RngStream::new(5, n as u64)).unwrap();
        assert!((e.estimate - phi_a).abs() < tol, "n={n}: {e:?}");
    }
}

#[test]
fn nae_ordering_is_strict() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let r = ordering_check(&m, 8, 1.0, 4000, &RngStream::new(6, 0)).unwrap();
    assert!(r.pass() && r.strict(), "{r:?}");
    assert!(r.planted.mean >= r.annealed.mean && r.annealed.mean >= r.null.mean);
}

#[test]
fn iid_and_nishimori_planted_agree() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let a = quenched_free_entropy(&m, 8, 1.0, Variant::PlantedIid, 4000, &RngStream::new(7, 0)).unwrap();
    let b = quenched_free_entropy(&m, 8, 1.0, Variant::PlantedNishimori, 4000, &RngStream::new(7, 1)).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() <= 3.0 * se, "{a:?} {b:?}");
}

#[test]
fn nae_tail_decays() {
    let m = make_nae_sat(3, 0.5).unwrap();
    let r = concentration_check(&m, 10, 1.0, Variant::PlantedIid, 10_000, &RngStream::new(8, 0), None).unwrap();
    let fit = r.fit.expect("enough tail mass for a fit");
    assert!(fit.slope < 0.0, "{fit:?}");
    assert!(r.tail.windows(2).all(|w| w[0].prob >= w[1].prob));
}

#[test]
fn variant_names_round_trip() {
    for v in Variant::ALL {
        assert_eq!(v.name().parse::<Variant>().unwrap(), v);
    }
    assert!("planted".parse::<Variant>().is_err());
}

proptest! {
    #[test]
    fn free_entropy_is_lipschitz_in_m(seed in 0u64..500, m1 in 0usize..6, extra in 0usize..6) {
        let model = make_nae_sat(3, 0.5).unwrap();
        let n = 6;
        let mut rng = RngStream::new(seed, 9).rng();
        let sigma = sample_iid(&model, n, &mut rng);
        let big = sample_teacher_student(&model, &sigma, m1 + extra, &mut rng);
        let small = FactorGraph { n, factors: big.factors[..m1].to_vec() };
        let gap = (free_entropy(&model, &big).unwrap() - free_entropy(&model, &small).unwrap()).abs();
        prop_assert!(gap <= model.psi_max().ln() * extra as f64 / n as f64 + 1e-12);
    }
}
