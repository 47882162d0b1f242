use planted_core::bethe::PopulationConfig;
use planted_core::thresholds::*;
use planted_core::zoo::{make_constant, parse_zoo};

fn quick() -> ThresholdConfig {
    ThresholdConfig {
        population: PopulationConfig { size: 300, sweeps: 4, eval_samples: 40_000, ..Default::default() },
        restarts: 2,
        d_max: Some(3.0),
        grid: 3,
        tolerance: None,
    }
}

/// `(d/k)(E[c ln c]/c̄ − ln c̄)` for constant weights.
fn constant_delta(cs: &[(f64, f64)], k: usize, d: f64) -> f64 {
    let cbar: f64 = cs.iter().map(|(c, p)| c * p).sum();
    let tilted: f64 = cs.iter().map(|(c, p)| p * c * c.ln()).sum::<f64>() / cbar;
    d / k as f64 * (tilted - cbar.ln())
}

#[test]
fn delta_star_at_zero_and_alias() {
    let m = make_constant(2, 2, &[(0.8, 0.5), (1.4, 0.5)]).unwrap();
    let cfg = quick();
    assert_eq!(delta_star(&m, 0.0, &cfg).unwrap().value, 0.0);
    let a = delta_star(&m, 1.5, &cfg).unwrap();
    let b = relative_entropy_limit(&m, 1.5, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_eq!((a.label, b.label), ("delta_star", "relative_entropy_limit"));
    assert_eq!(a.kind, BoundKind::LowerBoundEstimate);
}

#[test]
fn constant_weight_closed_forms() {
    let cfg = quick();
    let det = make_constant(2, 3, &[(1.3, 1.0)]).unwrap();
    let cs = [(0.8, 0.5), (1.4, 0.5)];
    let nondet = make_constant(2, 2, &cs).unwrap();
    for d in [0.5, 2.0] {
        let e = delta_star(&det, d, &cfg).unwrap();
        assert!(e.value.abs() <= 3.0 * e.std_error + 1e-12, "{e:?}");
        assert!(!e.detected());
        let e = delta_star(&nondet, d, &cfg).unwrap();
        let expect = constant_delta(&cs, 2, d);
        assert!(expect > 0.0);
        assert!((e.value - expect).abs() <= 3.0 * e.std_error, "d={d}: {} vs {expect} ± {}", e.value, e.std_error);
        let mi = mutual_information_limit(&nondet, d, &cfg).unwrap();
        assert!(mi.value.abs() <= 3.0 * mi.std_error, "{mi:?}");
    }
    assert_eq!(mutual_information_limit(&nondet, 0.0, &cfg).unwrap().value, 0.0);
}

#[test]
fn mutual_information_first_term_is_channel_capacity_term() {
    let eta: f64 = 0.1;
    let m = parse_zoo(&format!("channel-bsc:k=3,eta={eta}")).unwrap();
    let hb = -eta * eta.ln() - (1.0 - eta) * (1.0 - eta).ln();
    let d = 1.7;
    let expect = d / 3.0 * (2f64.ln() - hb);
    assert!((mutual_information_first_term(&m, d) - expect).abs() < 1e-12);
}

#[test]
fn locate_reports_both_constant_regimes() {
    let cfg = quick();
    let det = make_constant(2, 2, &[(1.3, 1.0)]).unwrap();
    let r = locate_d_cond(&det, &cfg).unwrap();
    assert_eq!(r.d_cond_bracket, CondBracket::NotDetected { d_max: 3.0 });
    assert_eq!(r.rows[0].d, 0.0);
    assert_eq!(r.rows[0].delta_star, 0.0);
    let nondet = make_constant(2, 2, &[(0.8, 0.5), (1.4, 0.5)]).unwrap();
    let r = locate_d_cond(&nondet, &cfg).unwrap();
    assert_eq!(r.d_cond_bracket, CondBracket::Bracket { lo: 0.0, hi: 1.0 });
    assert!(r.d_grid().windows(2).all(|w| w[0] < w[1]));
    // Slopes of the δ* curve stay under the Lipschitz constant.
    for w in r.rows.windows(2) {
        let slope = (w[1].delta_star - w[0].delta_star) / (w[1].d - w[0].d);
        let noise = 3.0 * (w[0].b_sup_se + w[1].b_sup_se) / (w[1].d - w[0].d);
        assert!(slope.abs() <= r.lipschitz_constant + noise, "{slope} vs {}", r.lipschitz_constant);
    }
    let curve = r.delta_star().iter().zip(r.d_grid()).map(|(&(v, _), d)| (d, v)).collect::<Vec<_>>();
    let gap = condensation_gap_bound(&curve, 3.0, None).unwrap();
    assert!(gap.squared > 0.0 && gap.quadratic > 0.0);
}

#[test]
fn bisection_narrows_the_bracket() {
    let nondet = make_constant(2, 2, &[(0.6, 0.5), (1.6, 0.5)]).unwrap();
    let cfg = ThresholdConfig { tolerance: Some(0.3), ..quick() };
    let r = locate_d_cond(&nondet, &cfg).unwrap();
    let CondBracket::Bracket { lo, hi } = r.d_cond_bracket else { panic!("nothing detected") };
    assert!(hi - lo <= 0.3);
    assert!(r.d_grid().contains(&lo) && r.d_grid().contains(&hi));
}
