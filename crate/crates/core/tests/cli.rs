//! End-to-end exit-code matrix for the `curvlab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvlab::cones::{self, ConeId, OptimizerConfig};
use curvlab::sampling::{fixture, random_tensor, FixtureSpec, SamplerConfig};
use curvlab::tensor::{io, Kind, Tensor};
use serde_json::Value;

fn curvlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab")).args(args).output().expect("spawn curvlab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, t: &Tensor) -> String {
    let p = dir.join(name);
    io::write_tensor(&p, t).unwrap();
    p.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fs2 = write(dir.path(), "fs2.json", &fixture(&FixtureSpec::FubiniStudy { dim: 2, c: 1.0 }).unwrap());
    let sphere5 = write(dir.path(), "sphere5.json", &fixture(&FixtureSpec::Sphere { dim: 5, c: 1.0 }).unwrap());
    // Ricci shifted well below zero
    let raw = random_tensor(Kind::Riemann, &SamplerConfig::new(5, 4)).unwrap();
    let neg = write(dir.path(), "witness_neg.json", &raw.shifted(-3.0));

    let out = dir.path().join("fs2_report.json");
    let o = curvlab(&["check", "--cone", "nob", "--input", &fs2, "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((rep["report"]["defect"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!(dir.path().join("fs2_report.json.manifest.json").exists());

    let o = curvlab(&["check", "--cone", "pic", "--input", &sphere5]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("defect 4.000000000"), "{}", stdout(&o));

    assert_eq!(code(&curvlab(&["check", "--cone", "ricci2", "--input", &neg])), 1);
    // wrong kind for the cone
    assert_eq!(code(&curvlab(&["check", "--cone", "nob", "--input", &sphere5])), 2);
    assert_eq!(code(&curvlab(&["check", "--cone", "nosuchcone", "--input", &sphere5])), 2);
}

#[test]
fn malformed_and_corrupted_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{ not json").unwrap();
    assert_eq!(code(&curvlab(&["check", "--cone", "pic", "--input", s(&junk)])), 2);

    let t = random_tensor(Kind::Riemann, &SamplerConfig::new(4, 1)).unwrap();
    let mut v = io::to_json_value(&t);
    let idx = ((1 * 4 + 2) * 4 + 3) * 4;
    let c = v["components"][idx].as_f64().unwrap();
    v["components"][idx] = (c + 0.3).into();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, v.to_string()).unwrap();
    assert_eq!(code(&curvlab(&["check", "--cone", "pic", "--input", s(&bad)])), 2);
    assert_eq!(code(&curvlab(&["sweep", "--cone", "pic", "--input", s(&bad)])), 2);
    assert_eq!(code(&curvlab(&["flow", "--input", s(&bad), "--out", s(&dir.path().join("f"))])), 2);
    assert_eq!(code(&curvlab(&["check", "--cone", "pic", "--input", "/nonexistent/t.json"])), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&curvlab(&["bogus"])), 2);
    assert_eq!(code(&curvlab(&["check", "--cone", "pic"])), 2);
    assert_eq!(code(&curvlab(&["verify", "--claim", "id-32"])), 2);
    assert_eq!(code(&curvlab(&["--help"])), 0);
}

#[test]
fn verify_identity_and_preconditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id32.json");
    let o = curvlab(&["verify", "--claim", "id-32", "--dim", "6", "--samples", "200", "--seed", "1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reps: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(reps[0]["max_violation"].as_f64().unwrap() <= 1e-10);
    assert!(out.with_extension("csv").exists());

    assert_eq!(code(&curvlab(&["verify", "--claim", "no-such-claim", "--dim", "5"])), 2);
    assert_eq!(code(&curvlab(&["verify", "--claim", "lemma-4.1", "--dim", "4", "--samples", "4"])), 2);
    assert_eq!(code(&curvlab(&["verify", "--claim", "all", "--dim", "4"])), 2);
}

#[test]
fn verify_all_writes_the_full_registry() {
    let o = curvlab(&["verify", "--claim", "all", "--dim", "5", "--samples", "2", "--restarts", "1", "--seed", "7"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.is_empty()).collect();
    assert_eq!(rows.len(), 17, "{text}");
    // exit status follows the asserted rows
    let any_failed = rows.iter().any(|r| r.ends_with(",true,fail"));
    assert_eq!(code(&o), if any_failed { 1 } else { 0 }, "{text}");
}

fn read_trace(dir: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(dir.join("trace.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn flow_sphere_zero_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = write(dir.path(), "sphere.json", &fixture(&FixtureSpec::Sphere { dim: 4, c: 1.0 }).unwrap());
    let a = dir.path().join("a");
    let o = curvlab(&["flow", "--input", &sphere, "--stop-factor", "2", "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_trace(&a);
    assert_eq!(header, ["t", "scal", "ric_min", "ric_min2"]);
    // scal(0) = 12, κ c₀ = 3
    for r in &rows {
        let exact = 12.0 / (1.0 - 3.0 * r[0]);
        assert!(((r[1] - exact) / exact).abs() < 1e-6, "{r:?}");
    }
    for f in ["summary.json", "manifest.json", "snapshots/state_000000.json"] {
        assert!(a.join(f).exists(), "{f}");
    }

    let b = dir.path().join("b");
    let c = dir.path().join("c");
    assert_eq!(code(&curvlab(&["flow", "--input", &sphere, "--stop-factor", "2", "--out", s(&b)])), 0);
    assert_eq!(code(&curvlab(&["--jobs", "2", "flow", "--input", &sphere, "--stop-factor", "2", "--out", s(&c)])), 0);
    let ta = fs::read(a.join("trace.csv")).unwrap();
    assert_eq!(ta, fs::read(b.join("trace.csv")).unwrap());
    assert_eq!(ta, fs::read(c.join("trace.csv")).unwrap());

    let zero = write(dir.path(), "zero.json", &Tensor::zero(Kind::Kahler, 2));
    let z = dir.path().join("z");
    let o = curvlab(&["flow", "--input", &zero, "--t-end", "1", "--track", "scal,ric-min,nob", "--out", s(&z)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_trace(&z);
    assert_eq!(header, ["t", "scal", "ric_min", "defect_nob"]);
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| *v == 0.0)));
    assert_eq!(rows.last().unwrap()[0], 1.0);
}

#[test]
fn flow_blowup_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = write(dir.path(), "sphere.json", &fixture(&FixtureSpec::Sphere { dim: 3, c: 1.0 }).unwrap());
    let out = dir.path().join("f");
    // effectively no scal guard: the ray blows up at t = 1/2
    let o = curvlab(&["flow", "--input", &sphere, "--stop-factor", "1e300", "--t-end", "10", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["blowup"].is_object(), "{summary}");
    let (_, rows) = read_trace(&out);
    let t_last = rows.last().unwrap()[0];
    assert!(t_last < 0.5 && t_last > 0.49, "{t_last}");
}

#[test]
fn sample_writes_boundary_members() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = curvlab(&["sample", "--cone", "nob", "--dim", "2", "--count", "10", "--margin", "0", "--seed", "3", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let opt = OptimizerConfig::default();
    for i in 0..10 {
        let t = io::read_tensor(&out.join(format!("sample_{i:04}.json")), false).unwrap();
        let d = cones::defect(&t, ConeId::Nob, &opt).unwrap().defect;
        assert!(d.abs() <= 1e-6 * t.norm(), "sample {i}: {d}");
    }
    let csv = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);

    let again = dir.path().join("s2");
    let o = curvlab(&["--jobs", "1", "sample", "--cone", "nob", "--dim", "2", "--count", "10", "--margin", "0", "--seed", "3", "--out", s(&again)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(out.join("samples.csv")).unwrap(), fs::read(again.join("samples.csv")).unwrap());
    assert_eq!(fs::read(out.join("sample_0007.json")).unwrap(), fs::read(again.join("sample_0007.json")).unwrap());

    assert_eq!(code(&curvlab(&["sample", "--cone", "nob", "--dim", "2", "--margin", "-1", "--out", s(&out)])), 2);
    assert_eq!(code(&curvlab(&["sample", "--cone", "pic", "--dim", "3", "--out", s(&out)])), 2);
}

#[test]
fn sweep_reports_worst_excursion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let o = curvlab(&["sweep", "--cone", "nob", "--dim", "2", "--count", "50", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "NOB");
    assert!(row[4].parse::<f64>().unwrap() >= -1e-6);
    for f in ["trajectories.csv", "report.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg: PathBuf = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 5\n[sample]\ncount = 3\nmargin = 0.25\n").unwrap();
    let a = dir.path().join("a");
    let o = curvlab(&["--config", s(&cfg), "sample", "--cone", "ricci1", "--kind", "kahler", "--dim", "2", "--out", s(&a)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m: Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["master_seed"], 5);
    assert_eq!(m["parameters"]["count"], 3);
    assert_eq!(m["parameters"]["margin"], 0.25);

    let b = dir.path().join("b");
    let o = curvlab(&["--config", s(&cfg), "sample", "--cone", "ricci1", "--kind", "kahler", "--dim", "2", "--count", "2", "--out", s(&b)]);
    assert_eq!(code(&o), 0);
    let m: Value = serde_json::from_str(&fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["parameters"]["count"], 2);

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, "count = [").unwrap();
    assert_eq!(code(&curvlab(&["--config", s(&broken), "sample", "--cone", "nob", "--dim", "2", "--out", s(&b)])), 2);
}
