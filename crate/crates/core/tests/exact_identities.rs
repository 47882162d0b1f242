use planted_core::exact::*;
use planted_core::functionals::xi;
use planted_core::graph::{color_frequencies, Assignment, Factor, FactorGraph};
use planted_core::rng::RngStream;
use planted_core::stats::entropy;
use planted_core::zoo::{make_constant, standard_zoo};
use planted_core::{ModelSpec, Simplex, WeightDistribution, WeightFunction};
use proptest::prelude::*;

fn two_atom() -> ModelSpec {
    let a = WeightFunction::new(2, 2, vec![1.6, 0.7, 0.9, 1.2]).unwrap();
    let b = WeightFunction::new(2, 2, vec![0.5, 1.1, 1.4, 0.8]).unwrap();
    let w = WeightDistribution::new(vec![(a, 0.3), (b, 0.7)]).unwrap();
    ModelSpec::new(0.25, w, Simplex::new(vec![0.4, 0.6]).unwrap(), 10.0).unwrap()
}

#[test]
fn joint_law_matches_graph_first_enumeration() {
    let model = two_atom();
    let joint = exact_joint_law(&model, 2, 1).unwrap();
    assert_eq!(joint.probs.len(), 32);
    let g = model.gamma_star();
    // Graph first: wires (u, v), atom a, then the assignment.
    for u in 0..2 {
        for v in 0..2 {
            for a in 0..2 {
                for s in 0..4usize {
                    let sigma = Assignment::from_index(s, 2, 2);
                    let gamma = color_frequencies(&sigma, 2);
                    let prior = g[sigma.colors[0]] * g[sigma.colors[1]];
                    let psi = model.weights().atoms()[a].get(&[sigma.colors[u], sigma.colors[v]]);
                    let p = model.weights().probs()[a];
                    let expect = prior * psi * p / (4.0 * xi(&model, gamma.as_slice()).unwrap());
                    let cell = (u * 2 + v) * 2 + a;
                    assert!((joint.prob(s, cell) - expect).abs() < 1e-15);
                }
            }
        }
    }
    let total: f64 = joint.probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn relative_entropy_matches_direct_kl() {
    let model = two_atom();
    let joint = exact_joint_law(&model, 2, 1).unwrap();
    let space = GraphSpace::new(&model, 2, 1).unwrap();
    // Reference law: null graph, then a Gibbs sample of it.
    let mut kl = 0.0;
    for c in 0..space.len() {
        let g = space.graph(c);
        let mu = gibbs_measure(&model, &g).unwrap();
        let null = space.ln_null_prob(c).exp();
        for s in 0..4 {
            let p = joint.prob(s, c);
            kl += p * (p / (null * mu.probs()[s])).ln();
        }
    }
    let report = relative_entropy_identity(&model, 2, 1).unwrap();
    assert!(report.delta > 0.0);
    assert!((report.delta - kl / 2.0).abs() < 1e-12);
    assert!(report.residual() < 1e-12);
}

#[test]
fn mutual_information_edges() {
    let model = two_atom();
    assert!(exact_mutual_information(&model, 2, 0).unwrap().abs() < 1e-15);
    let d = mi_decomposition(&model, 2, 0).unwrap();
    let h = entropy(model.gamma_star().as_slice());
    assert!((d.h_gamma_star - h).abs() < 1e-15 && (d.eta_bar - h).abs() < 1e-12 && d.delta_bar.abs() < 1e-12);
    let c = make_constant(2, 2, &[(0.8, 0.5), (1.4, 0.5)]).unwrap();
    assert!(exact_mutual_information(&c, 2, 2).unwrap().abs() < 1e-12);
    let dc = mi_decomposition(&c, 2, 2).unwrap();
    assert!(dc.delta_bar.abs() < 1e-12 && (dc.eta_bar - dc.h_gamma_star).abs() < 1e-12);
    let mi = exact_mutual_information(&model, 2, 1).unwrap();
    let d1 = mi_decomposition(&model, 2, 1).unwrap();
    assert!(mi > 0.0 && (mi - d1.combined()).abs() < 1e-10);
}

#[test]
fn constant_relative_entropy_closed_form() {
    // ln(P/Q) = ln Z(G) − m ln c̄ with Z(G) = Π c_a, so δ = (m/n)(E[c ln c]/c̄ − ln c̄).
    let cs = [(0.8, 0.5), (1.4, 0.5)];
    let model = make_constant(2, 2, &cs).unwrap();
    let cbar: f64 = cs.iter().map(|(c, p)| c * p).sum();
    let tilt: f64 = cs.iter().map(|(c, p)| c * p * c.ln()).sum::<f64>() / cbar;
    let (n, m) = (2, 2);
    let expect = m as f64 / n as f64 * (tilt - cbar.ln());
    assert!((exact_relative_entropy(&model, n, m).unwrap() - expect).abs() < 1e-12);
    let det = make_constant(2, 2, &[(1.3, 1.0)]).unwrap();
    assert!(exact_relative_entropy(&det, 2, 2).unwrap().abs() < 1e-12);
    assert!(exact_relative_entropy(&model, 2, 0).unwrap().abs() < 1e-12);
}

#[test]
fn nishimori_trivial_cases() {
    let c = make_constant(2, 2, &[(0.8, 0.5), (1.4, 0.5)]).unwrap();
    assert!(verify_nishimori(&c, 2, 2).unwrap() < 1e-12);
    assert!(verify_nishimori(&two_atom(), 3, 0).unwrap() < 1e-12);
    assert!(verify_nishimori(&two_atom(), 2, 1).unwrap() < 1e-10);
}

#[test]
fn audit_every_zoo_model() {
    for (name, model) in standard_zoo() {
        for n in 1..=3 {
            for m in 0..=2 {
                for row in exact_audit(&model, n, m).unwrap() {
                    assert!(row.pass(), "{name} n={n} m={m} {}: {:e}", row.identity, row.residual);
                }
            }
        }
    }
}

#[test]
fn guards_fire() {
    let model = two_atom();
    assert!(matches!(exact_joint_law(&model, 6, 4), Err(planted_core::Error::ResourceLimit(_))));
    let big = FactorGraph::empty(40);
    assert!(matches!(partition_function(&model, &big), Err(planted_core::Error::ResourceLimit(_))));
}

proptest! {
    #[test]
    fn partition_function_bounds(seed in 0u64..1000, n in 1usize..6, m in 0usize..6) {
        let model = two_atom();
        let g = planted_core::graph::sample_null(&model, n, m, &mut RngStream::new(seed, 0).rng());
        let z = partition_function(&model, &g).unwrap();
        let mi = m as i32;
        prop_assert!(z >= model.psi_min().powi(mi) * (1.0 - 1e-12));
        prop_assert!(z <= model.psi_max().powi(mi) * (1.0 + 1e-12));
        let phi = free_entropy(&model, &g).unwrap();
        prop_assert!((phi - z.ln() / n as f64).abs() < 1e-12);
    }

    #[test]
    fn constant_weights_give_product_gibbs(seed in 0u64..1000, m in 0usize..5) {
        let model = make_constant(2, 2, &[(1.3, 1.0)]).unwrap();
        let g = planted_core::graph::sample_null(&model, 3, m, &mut RngStream::new(seed, 0).rng());
        let mu = gibbs_measure(&model, &g).unwrap();
        prop_assert!(mu.product_distance() < 1e-14);
        prop_assert!((partition_function(&model, &g).unwrap() - 1.3f64.powi(m as i32)).abs() < 1e-12);
    }
}

#[test]
fn single_factor_wires_are_row_major() {
    let model = two_atom();
    let g = FactorGraph { n: 2, factors: vec![Factor { wires: vec![1, 0], atom: 1 }] };
    let mu = gibbs_measure(&model, &g).unwrap();
    // μ(σ) ∝ γ*(σ_0) γ*(σ_1) ψ(σ_1, σ_0).
    let psi = model.weights().atoms()[1].table();
    let gs = [0.4, 0.6];
    let raw: Vec<f64> = (0..4).map(|s| gs[s / 2] * gs[s % 2] * psi[(s % 2) * 2 + s / 2]).collect();
    let z: f64 = raw.iter().sum();
    for (p, r) in mu.probs().iter().zip(&raw) {
        assert!((p - r / z).abs() < 1e-15);
    }
}
