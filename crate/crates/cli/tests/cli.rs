use std::path::{Path, PathBuf};
use std::process::Command;

use lmi_iis::{MatrixFile, ProblemFile};
use lmi_iis_core::altsys::membership_residual;
use lmi_iis_core::pencil::Pencil;
use lmi_iis_core::symcore::{BlockPartition, SymMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn lmi(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_lmi-iis")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn gen_to(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let mut full = vec!["gen", "--family"];
    full.extend_from_slice(args);
    let r = lmi(&full);
    assert_eq!(r.code, 0, "{}", r.stderr);
    write(dir, name, &r.stdout)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn dense(n: usize, entries: &Value) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for t in entries.as_array().unwrap() {
        let (i, j, v) = (t[0].as_u64().unwrap() as usize, t[1].as_u64().unwrap() as usize, t[2].as_f64().unwrap());
        a[(i, j)] = v;
        a[(j, i)] = v;
    }
    a
}

/// Residuals of a reported member of the alternative set, recomputed from
/// the problem file text with dense arithmetic and an independent
/// eigensolver.
fn recheck(problem: &str, matrix: &Value) -> [f64; 3] {
    let f: Value = serde_json::from_str(problem).unwrap();
    let n = f["n"].as_u64().unwrap() as usize;
    let x = dense(n, &matrix["entries"]);
    let mats: Vec<DMatrix<f64>> = f["matrices"].as_array().unwrap().iter().map(|m| dense(n, m)).collect();
    let constraint = mats[1..].iter().map(|a| a.dot(&x).abs()).fold(0.0, f64::max);
    let normalization = (mats[0].dot(&x) + 1.0).abs();
    let min_eig = x.symmetric_eigenvalues().min();
    [constraint, normalization, min_eig]
}

fn assert_residuals_reproduce(problem: &str, point: &Value) {
    let got = recheck(problem, &point["matrix"]);
    let r = &point["residuals"];
    let reported = [r["constraint"].as_f64().unwrap(), r["normalization"].as_f64().unwrap(), r["min_eig"].as_f64().unwrap()];
    for (g, w) in got.iter().zip(&reported) {
        assert!((g - w).abs() <= 1e-12, "recomputed {got:?} vs reported {reported:?}");
    }
}

fn indices(v: &Value) -> Vec<u64> {
    v["indices"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

fn labels(v: &Value) -> Vec<u64> {
    v["labels"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

fn diag_of(matrix: &Value) -> Vec<f64> {
    let n = matrix["n"].as_u64().unwrap() as usize;
    let d = dense(n, &matrix["entries"]);
    (0..n).map(|i| d[(i, i)]).collect()
}

#[test]
fn check_reports_certificate_with_reproducible_residuals() {
    let dir = TempDir::new().unwrap();
    let file = gen_to(&dir, "bl.json", &["blocklinear"]);
    let r = lmi(&["check", s(&file)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json();
    assert_eq!(j["status"], "determinate");
    assert_eq!(j["result"]["verdict"], "WeaklyInfeasible");
    assert_eq!(j["settings"]["seed"], 42);
    assert!(j["settings"]["tol_primal"].is_number() && j["settings"]["rank_tol"].is_number());
    let cert = &j["result"]["certificate"];
    assert_residuals_reproduce(&std::fs::read_to_string(&file).unwrap(), cert);
}

#[test]
fn reingested_certificate_reproduces_core_residuals() {
    let dir = TempDir::new().unwrap();
    let file = gen_to(&dir, "sdp.json", &["blocksdp", "--eps", "0.5"]);
    let j = lmi(&["check", s(&file)]).json();
    let cert = &j["result"]["certificate"];
    let path = write(&dir, "cert.json", &cert["matrix"].to_string());
    let x = MatrixFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap().to_matrix().unwrap();
    let p = ProblemFile::parse(&std::fs::read_to_string(&file).unwrap()).unwrap().to_pencil().unwrap();
    let r = membership_residual(&p, &x).unwrap();
    let reported = &cert["residuals"];
    assert!((r.constraint - reported["constraint"].as_f64().unwrap()).abs() <= 1e-12);
    assert!((r.normalization - reported["normalization"].as_f64().unwrap()).abs() <= 1e-12);
    assert!((r.min_eig - reported["min_eig"].as_f64().unwrap()).abs() <= 1e-12);
}

#[test]
fn check_without_constraints_is_feasible() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "free.json", r#"{"n": 2, "m": 0, "blocks": [[0], [1]], "matrices": [[[0, 0, 1.0], [1, 1, 2e0]]]}"#);
    let r = lmi(&["check", s(&file)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json();
    assert_eq!(j["result"]["verdict"], "WeaklyFeasible");
    for w in j["result"]["epsilon_witnesses"].as_array().unwrap() {
        assert!(w["min_eigenvalue"].as_f64().unwrap() + w["epsilon"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn malformed_input_exits_with_code_two() {
    let dir = TempDir::new().unwrap();
    let truncated = write(&dir, "cut.json", "{\n  \"n\": 4,\n  \"m\": 2,\n  \"blocks\": [[0], [1");
    let r = lmi(&["check", s(&truncated)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 4"), "{}", r.stderr);
    assert!(r.stdout.is_empty());

    let bad = write(&dir, "bad.json", r#"{"n": 2, "m": 0, "blocks": [[0, 1]], "matrices": [[[1, 0, 1.0]]]}"#);
    let r = lmi(&["check", s(&bad)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("matrices[0][0]"), "{}", r.stderr);

    let overlap = write(&dir, "overlap.json", r#"{"n": 2, "m": 0, "blocks": [[0, 1], [1]], "matrices": [[]]}"#);
    assert_eq!(lmi(&["check", s(&overlap)]).code, 2);
    assert_eq!(lmi(&["check", "/nonexistent/problem.json"]).code, 2);
}

#[test]
fn iis_methods_on_fixtures() {
    let dir = TempDir::new().unwrap();
    let bl = gen_to(&dir, "bl.json", &["blocklinear"]);
    let sdp = gen_to(&dir, "sdp.json", &["blocksdp", "--eps", "1"]);
    let text = std::fs::read_to_string(&bl).unwrap();

    let j = lmi(&["iis", s(&bl)]).json();
    assert_eq!(indices(&j["result"]["set"]), [0, 2]);
    assert_eq!(labels(&j["result"]["set"]), [1, 3]);
    assert_eq!(j["result"]["verified"], true);
    assert_residuals_reproduce(&text, &j["result"]["certificate"]);

    let j = lmi(&["iis", s(&sdp), "--method", "brute"]).json();
    assert_eq!(indices(&j["result"]["set"]), [0, 2]);
    assert_eq!(j["result"]["verified"], true);

    let r = lmi(&["iis", s(&bl), "--method", "l21"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json();
    assert!(j["result"]["verified"].is_boolean());
    assert_residuals_reproduce(&text, &j["result"]["certificate"]);
}

#[test]
fn iis_of_feasible_system_is_indeterminate() {
    let dir = TempDir::new().unwrap();
    let file = gen_to(&dir, "disc.json", &["disc-halfplanes", "--r", "1", "--c", "0", "0", "--halfplane", "1,0,0"]);
    let r = lmi(&["iis", s(&file)]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("not weakly infeasible"), "{}", r.stderr);
    assert_eq!(r.json()["status"], "indeterminate");
}

#[test]
fn extreme_points_on_fixtures() {
    let dir = TempDir::new().unwrap();
    let bl = gen_to(&dir, "bl.json", &["blocklinear"]);
    let j = lmi(&["extreme", s(&bl), "--blocks", "0,2"]).json();
    let d = diag_of(&j["result"]["point"]["matrix"]);
    for (x, y) in d.iter().zip([0.5, 0.0, 0.0, 0.5]) {
        assert!((x - y).abs() < 1e-6, "{d:?}");
    }
    assert_eq!(j["result"]["extreme"], true);
    assert_residuals_reproduce(&std::fs::read_to_string(&bl).unwrap(), &j["result"]["point"]);

    // every boundary point of this alternative set is extreme; check the seeded one lies on it
    let sdp = gen_to(&dir, "sdp.json", &["blocksdp", "--eps", "1"]);
    for seed in ["1", "2"] {
        let j = lmi(&["extreme", s(&sdp), "--blocks", "0,1,2", "--seed", seed]).json();
        assert_eq!(j["result"]["extreme"], true);
        assert_eq!(j["settings"]["seed"].to_string(), seed);
        let d = diag_of(&j["result"]["point"]["matrix"]);
        let (b, e) = (d[1], d[3]);
        assert!((b * b + b * e + e * e - b - e + 0.25).abs() < 1e-6, "{d:?}");
    }

    let r = lmi(&["extreme", s(&bl), "--blocks"]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("empty"));
    assert_eq!(lmi(&["extreme", s(&bl), "--blocks", "5"]).code, 2);
}

#[test]
fn uniqueness_commands() {
    let dir = TempDir::new().unwrap();
    let bl = gen_to(&dir, "bl.json", &["blocklinear"]);
    let j = lmi(&["unique", s(&bl), "--t", "2"]).json();
    assert_eq!(j["result"]["outcome"], "Fails");
    assert_eq!(j["result"]["sigma_minus"], 1);
    let d = diag_of(&j["result"]["witness"]);
    for (x, y) in d.iter().zip([1.0, 1.0, 1.0, -1.0]) {
        assert!((x - y).abs() < 1e-9, "{d:?}");
    }
    assert!(j["result"]["constraint_residual"].as_f64().unwrap() < 1e-12);

    let lp = gen_to(&dir, "lp.json", &["uniquelp", "--n", "6"]);
    let j = lmi(&["unique", s(&lp), "--t", "2"]).json();
    assert_eq!(j["result"]["outcome"], "Holds");
    assert_eq!(j["result"]["mode"], "exact");

    let sdp = gen_to(&dir, "usdp.json", &["uniquesdp", "--n", "6"]);
    let x0 = write(&dir, "x0.json", r#"{"n": 4, "entries": [[0, 0, 2.0], [0, 1, 0.5], [1, 1, 1.0]]}"#);
    let r = lmi(&["unique", s(&sdp), "--x0", s(&x0)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.json()["result"]["outcome"], "ProbablyUnique");
}

#[test]
fn gen_families() {
    let bl = lmi(&["gen", "--family", "blocklinear"]).stdout;
    let sdp0 = lmi(&["gen", "--family", "blocksdp", "--eps", "0"]).stdout;
    let parse = |t: &str| ProblemFile::parse(t).unwrap();
    assert_eq!(parse(&bl).matrices, parse(&sdp0).matrices);

    let lp = parse(&lmi(&["gen", "--family", "uniquelp", "--n", "4"]).stdout);
    assert_eq!(lp.matrices.len(), 3);
    assert_eq!(lp.blocks, vec![vec![0], vec![1], vec![2], vec![3]]);

    let args = ["gen", "--family", "disc-halfplanes", "--r", "1", "--c", "0", "0", "--halfplane", "1,0,-2", "--halfplane", "-1,0,-2"];
    let first = lmi(&args);
    assert_eq!(first.code, 0, "{}", first.stderr);
    let disc = parse(&first.stdout);
    assert_eq!((disc.n, disc.m), (4, 2));
    assert_eq!(disc.blocks, vec![vec![0], vec![1], vec![2, 3]]);
    assert_eq!(first.stdout, lmi(&args).stdout);

    assert_eq!(lmi(&["gen", "--family", "uniquesdp", "--n", "4"]).code, 2);
    assert_eq!(lmi(&["gen", "--family", "uniquelp"]).code, 2);
    assert_eq!(lmi(&["gen", "--family", "disc-halfplanes", "--halfplane", "1,2"]).code, 2);
}

#[test]
fn generated_fixtures_round_trip_exactly() {
    let cases: [&[&str]; 6] = [
        &["blocklinear"],
        &["blocksdp", "--eps", "0.1"],
        &["uniquelp", "--n", "7"],
        &["uniquesdp", "--n", "9"],
        &["disc-halfplanes", "--r", "0.3", "--c", "-1.5", "2", "--halfplane", "0.1,-0.7,3"],
        &["disc-halfplanes", "--r", "2"],
    ];
    for args in cases {
        let mut full = vec!["gen", "--family"];
        full.extend_from_slice(args);
        let text = lmi(&full).stdout;
        let f = ProblemFile::parse(&text).unwrap();
        assert_eq!(f.emit(), text, "{args:?}");
        assert_eq!(ProblemFile::from_pencil(&f.to_pencil().unwrap()), f);
    }
}

#[test]
fn global_flags_reach_the_settings() {
    let dir = TempDir::new().unwrap();
    let bl = gen_to(&dir, "bl.json", &["blocklinear"]);
    let j = lmi(&["check", s(&bl), "--tol-feas", "1e-9", "--tol-rank", "1e-6", "--seed", "7", "--max-iter", "150"]).json();
    let st = &j["settings"];
    assert_eq!(st["tol_primal"].as_f64(), Some(1e-9));
    assert_eq!(st["rank_tol"].as_f64(), Some(1e-6));
    assert_eq!(st["seed"], 7);
    assert_eq!(st["max_iter"], 150);
    assert_eq!(j["result"]["verdict"], "WeaklyInfeasible");
}

fn arb_pencil() -> impl Strategy<Value = Pencil> {
    (prop::collection::vec(1usize..=3, 1..=3), 0usize..=2).prop_flat_map(|(sizes, m)| {
        let n: usize = sizes.iter().sum();
        let count = (m + 1) * n * n;
        prop::collection::vec(prop_oneof![Just(0.0), -1e3f64..1e3, any::<f64>().prop_filter("finite", |x| x.is_finite())], count)
            .prop_map(move |vals| {
                let part = BlockPartition::from_sizes(&sizes).unwrap();
                let mut mats = Vec::new();
                for k in 0..=m {
                    let mut a = SymMatrix::zeros(n);
                    for b in 0..part.len() {
                        let idx = part.block(b);
                        for (p, &i) in idx.iter().enumerate() {
                            for &j in &idx[p..] {
                                a[(i, j)] = vals[k * n * n + i * n + j];
                            }
                        }
                    }
                    mats.push(a);
                }
                let a0 = mats.remove(0);
                Pencil::new(a0, mats, part).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn problem_files_round_trip(p in arb_pencil()) {
        let f = ProblemFile::from_pencil(&p);
        let text = f.emit();
        let back = ProblemFile::parse(&text).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(back.to_pencil().unwrap(), p);
        prop_assert_eq!(back.emit(), text);
    }

    #[test]
    fn matrix_files_round_trip(vals in prop::collection::vec(-1e100f64..1e100, 10)) {
        let x = SymMatrix::smat(4, &vals);
        let text = serde_json::to_string(&MatrixFile::from_matrix(&x)).unwrap();
        prop_assert_eq!(MatrixFile::parse(&text).unwrap().to_matrix().unwrap(), x);
    }
}
