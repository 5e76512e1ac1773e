use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn latsurj(args: &[&str]) -> Output {
    latsurj_with(args, &[], None)
}

fn latsurj_with(args: &[&str], env: &[(&str, &str)], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_latsurj"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    for (k, _) in std::env::vars() {
        if k.starts_with("LATSURJ_") {
            cmd.env_remove(k);
        }
    }
    cmd.envs(env.iter().copied());
    let mut child = cmd.spawn().expect("binary runs");
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn certify_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.txt");
    std::fs::write(&path, "3 3\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
    let out = latsurj(&["certify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "surjective");
    assert!(v.get("timing_ms").is_none());
    let timed = json(&latsurj(&["certify", "--timing", path.to_str().unwrap()]));
    assert!(timed["timing_ms"].is_number());
}

#[test]
fn sample_then_certify_is_deterministic() {
    let args = ["sample", "--n", "6", "--m", "8", "--seed", "5", "--dist", "uniform-1,0,1"];
    let a = latsurj(&args);
    let b = latsurj(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("6 8\n"));
    let c1 = latsurj_with(&["certify"], &[], Some(&text));
    let c2 = latsurj_with(&["certify", "-"], &[], Some(&text));
    assert_eq!(c1.status.code(), Some(0));
    assert_eq!(c1.stdout, c2.stdout);
    let snf = json(&latsurj_with(&["snf"], &[], Some(&text)));
    assert_eq!(snf["cokernel"]["trivial"], json(&c1)["verdict"] == "surjective");
}

#[test]
fn predictions() {
    let v = json(&latsurj(&["predict", "corank", "--q", "2", "--k", "0"]));
    assert_eq!(format!("{:.6}", v["value"].as_f64().unwrap()), "0.288788");
    assert!(v["tail_bound"].as_f64().unwrap() < 1e-10);
    let v = json(&latsurj(&["predict", "trivial", "--u", "2"]));
    assert!((v["value"].as_f64().unwrap() - 0.716_791_66).abs() < 1e-7);
    let v = json(&latsurj(&["predict", "trivial", "--u", "1", "--primes", "2"]));
    assert!((v["value"].as_f64().unwrap() - 0.577_576).abs() < 1e-5);
    let csv = latsurj(&["predict", "corank", "--q", "3", "--k", "1", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("value,tail_bound,terms_used\n0.42009"));
}

#[test]
fn exit_codes() {
    assert_eq!(latsurj(&["certify", "--bogus"]).status.code(), Some(2));
    assert_eq!(latsurj(&["predict", "corank", "--q", "6", "--k", "0"]).status.code(), Some(2));
    assert_eq!(latsurj(&["experiment", "corank", "--n", "4"]).status.code(), Some(2));
    assert_eq!(latsurj_with(&["certify"], &[], Some("2 2\n1 x\n")).status.code(), Some(2));
    let fail = latsurj(&["experiment", "singularity", "--n", "3", "--dist", "point(1)", "--trials", "5"]);
    assert_eq!(fail.status.code(), Some(1));
    assert_eq!(json(&fail)["pass"], false);
    let pass = latsurj(&["experiment", "trivial", "--n", "8", "--u", "12", "--trials", "20", "--tol", "0.5"]);
    assert_eq!(pass.status.code(), Some(0));
}

#[test]
fn reports_embed_invocation_and_config_is_logged() {
    let args = ["experiment", "corank", "--n", "10", "--p", "3", "--trials", "50", "--seed", "4"];
    let out = latsurj(&args);
    let v = json(&out);
    let inv: Vec<&str> = v["invocation"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    assert_eq!(&inv[1..], &args);
    assert_eq!(v["config"]["n"], 10);
    assert!(v["runtime_ms"].is_number());
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolved config"));
    // Same seed, different thread counts: identical apart from run metadata.
    let mut a = json(&latsurj(&[&args[..], &["--threads", "1"]].concat()));
    let mut b = json(&latsurj(&[&args[..], &["--threads", "3"]].concat()));
    for r in [&mut a, &mut b] {
        let o = r.as_object_mut().unwrap();
        o.remove("runtime_ms");
        o.remove("invocation");
    }
    assert_eq!(a, b);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# defaults\nn = 6\ntrials = 5\nseed = 2\ndist = uniform01\n").unwrap();
    let c = conf.to_str().unwrap();
    let trials = |out: &Output| json(out)["trials"].as_u64().unwrap();
    let base = ["experiment", "trivial", "--u", "3", "--config", c];
    assert_eq!(trials(&latsurj(&base)), 5);
    assert_eq!(trials(&latsurj_with(&base, &[("LATSURJ_TRIALS", "6")], None)), 6);
    assert_eq!(trials(&latsurj_with(&[&base[..], &["--trials", "7"]].concat(), &[("LATSURJ_TRIALS", "6")], None)), 7);
    std::fs::write(&conf, "n = 6\nfrobnicate = 1\n").unwrap();
    assert_eq!(latsurj(&base).status.code(), Some(2));
}

#[test]
fn exposure_csv_has_one_row_per_run() {
    let out = latsurj(&["experiment", "exposure", "--n", "10", "--trials", "6", "--B", "2", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trial,seed,stream,d0,batches,total_extra_columns,achieved");
    assert_eq!(lines.len(), 7);
}

#[test]
fn fourier_commands() {
    let out = latsurj(&["fourier", "check", "--q", "4", "--mu", "0:1/2,1:1/4,2:1/4", "--w", "1,2,3", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["littlewood_offord"].as_array().unwrap().len(), 4);
    let out = latsurj(&["fourier", "sweep", "--instances", "200", "--max-denom", "3", "--max-m", "3", "--kneser-max", "6"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], true);
}
