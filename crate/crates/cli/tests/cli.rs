use planted_cli::{execute, model_hash, EXIT_OK, EXIT_RESOURCE, EXIT_USAGE, EXIT_VALIDATION};
use planted_core::witness::{kspin_witness, nae_sat_witness};
use planted_core::zoo::parse_zoo;
use planted_core::{ModelSpec, Simplex, WeightDistribution, WeightFunction};
use sha2::{Digest, Sha256};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(std::iter::once("planted").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn two_atom() -> ModelSpec {
    let a = WeightFunction::new(2, 2, vec![1.6, 0.7, 0.9, 1.2]).unwrap();
    let b = WeightFunction::new(2, 2, vec![0.5, 1.1, 1.4, 0.8]).unwrap();
    let w = WeightDistribution::new(vec![(a, 0.3), (b, 0.7)]).unwrap();
    ModelSpec::new(0.25, w, Simplex::new(vec![0.4, 0.6]).unwrap(), 10.0).unwrap()
}

fn body_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn model_check_reports_bal_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let nae = parse_zoo("nae-sat:k=3,eps=0.5").unwrap();
    let spec = write(&dir, "nae.json", &nae.to_json());
    let (code, out, err) = run(&["model", "check", &spec]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("BAL: pass"));
    assert!(out.starts_with("check,status\n"));
    let good = write(&dir, "w.json", &serde_json::to_string(&nae_sat_witness(3, 0.5)).unwrap());
    let (code, out, _) = run(&["model", "check", &spec, "--witness", &good]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("witness,pass"));
    let wrong = write(&dir, "k.json", &serde_json::to_string(&kspin_witness(3, 0.5, &[(1.0, 0.5), (-1.0, 0.5)])).unwrap());
    let (code, out, _) = run(&["model", "check", &spec, "--witness", &wrong]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(out.contains("witness,fail"));
}

#[test]
fn trailer_carries_seed_version_and_hash() {
    let (code, out, _) = run(&["xi-sup", "--zoo", "kspin:k=3,beta=0.5", "--seed", "17"]);
    assert_eq!(code, EXIT_OK);
    let model = parse_zoo("kspin:k=3,beta=0.5").unwrap();
    let digest: String = Sha256::digest(model.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(model_hash(&[model]), digest);
    let last = out.lines().last().unwrap();
    assert_eq!(last, format!("# seed=17,version={},model_hash={digest}", env!("CARGO_PKG_VERSION")));
    let row = &body_rows(&out)[0];
    assert!((row[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exact_audit_on_two_atom_model() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(&dir, "two.json", &two_atom().to_json());
    let (code, out, _) = run(&["exact", "audit", &spec, "--n", "2", "--m", "1"]);
    assert_eq!(code, EXIT_OK);
    let rows = body_rows(&out);
    assert!(rows.len() >= 5);
    for r in rows {
        assert!(r[4].parse::<f64>().unwrap() < 1e-9, "{r:?}");
    }
}

#[test]
fn threshold_on_deterministic_constant_detects_nothing() {
    let (code, out, err) = run(&[
        "threshold", "--zoo", "const:q=2,k=2,c=1.3", "--d-max", "3", "--grid", "3", "--N", "300", "--sweeps", "4",
        "--eval-samples", "20000", "--restarts", "2",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("not detected"));
    assert!(out.starts_with("d,phi_a,b_sup,b_sup_se,delta_star,mi_limit\n"));
    let rows = body_rows(&out);
    assert_eq!(rows.len(), 4);
    for r in rows {
        let (delta, se): (f64, f64) = (r[4].parse().unwrap(), r[3].parse().unwrap());
        assert!(delta.abs() <= 3.0 * se + 1e-12, "{r:?}");
    }
}

#[test]
fn output_file_and_population_dump() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let pop = dir.path().join("pop.json");
    let (code, out, _) = run(&[
        "bethe", "--zoo", "nae-sat", "--d", "0.5", "--N", "200", "--sweeps", "3", "--eval-samples", "500",
        "--out", csv.to_str().unwrap(), "--population-out", pop.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("sweep,b_hat,std_error\n"));
    assert_eq!(body_rows(&text).len(), 3);
    let restored = planted_core::bethe::Population::from_json(&std::fs::read_to_string(&pop).unwrap()).unwrap();
    assert_eq!(restored.len(), 200);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(run(&["mc", "--zoo", "nae-sat", "--n", "4"]).0, EXIT_USAGE);
    assert_eq!(run(&["xi-sup", "--zoo", "nae-sat", "--zoo", "sbm"]).0, EXIT_USAGE);
    assert_eq!(run(&["mc", "--zoo", "nae-sat", "--n", "4", "--d", "1", "--variant", "planted"]).0, EXIT_USAGE);
    assert_eq!(run(&["xi-sup", "/nonexistent/model.json"]).0, EXIT_USAGE);
    assert_eq!(run(&["xi-sup", "--zoo", "nae-sat:k=1"]).0, EXIT_VALIDATION);
    assert_eq!(run(&["bethe", "--zoo", "nae-sat", "--d", "1e9"]).0, EXIT_VALIDATION);
    assert_eq!(run(&["exact", "audit", "--zoo", "nae-sat", "--n", "9", "--m", "9"]).0, EXIT_RESOURCE);
    assert_eq!(run(&["mc", "--zoo", "sbm", "--n", "40", "--d", "1", "--samples", "2"]).0, EXIT_RESOURCE);
    assert_eq!(run(&["--version"]).0, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.json", "{\"q\": 2}");
    assert_eq!(run(&["model", "check", &bad]).0, EXIT_VALIDATION);
}

#[test]
fn mc_and_pinning_csv_shapes() {
    let (code, out, _) = run(&["mc", "--zoo", "nae-sat", "--n", "5,6", "--d", "0,1", "--variant", "null", "--samples", "50"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("n,d,variant,estimate,std_error,samples\n"));
    let rows = body_rows(&out);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][3], "0.0");
    let (code, out, _) = run(&["pinning", "audit", "--zoo", "nae-sat:k=3,eps=0.5", "--n", "6", "--graphs", "2", "--ell", "2", "--theta", "2,4,6"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("model,n,graph,ell,theta,lhs,se,rhs,pass\n"));
    assert_eq!(out.lines().filter(|l| l.starts_with("\"nae-sat:k=3,eps=0.5\",6,")).count(), 6);
}
