//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Built without the libtest harness so the lines always print.
//!
//! Criterion 8 asks for at most one singular matrix modulo 2 in 200 trials.
//! The corank law modulo 2 puts the singular fraction near 0.71, so that
//! line is expected to read FAIL. The run asserts the observed fraction
//! agrees with the corank law instead, and separately that the integer
//! determinant vanishes in at most one trial.

use std::time::Instant;

use latsurj::experiments::{run, ExperimentConfig, ExperimentKind};
use latsurj::report::Report;
use latsurj::sweeps::{cosine_random, kneser, lo_grid, nesting_random, odlyzko_suite, SweepSection};
use latsurj_core::certifier::{is_surjective, verify_certificate};
use latsurj_core::ensembles::stream_rng;
use latsurj_core::exposure::{u_budget, BudgetVariant};
use latsurj_core::linalg::cokernel;
use latsurj_core::IntMatrix;
use num_bigint::BigInt;
use rand::Rng;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn print(line: &Line, started: Instant) {
    let verdict = if line.pass { "PASS" } else { "FAIL" };
    println!("criterion {} [{}]: {verdict} ({}; {:.1}s)", line.id, line.name, line.detail, started.elapsed().as_secs_f64());
}

fn config(kind: ExperimentKind, n: usize, dist: &str, trials: u64, seed: u64, threads: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, n, dist, trials, seed);
    c.threads = threads;
    c
}

/// The experiment configurations of criteria 1, 2, 3, 7, 8 and 9.
fn experiment_configs(threads: usize) -> Vec<(u32, ExperimentConfig)> {
    let mut c1 = config(ExperimentKind::Corank, 60, "uniform01", 10_000, 7, threads);
    c1.p = Some(2);
    let mut c2 = config(ExperimentKind::Trivial, 50, "uniform01", 2000, 11, threads);
    c2.u = Some(2);
    let mut c3 = config(ExperimentKind::Trivial, 50, "uniform01", 500, 13, threads);
    c3.u = Some(0);
    let mut c7 = config(ExperimentKind::Exposure, 50, "uniform01", 200, 17, threads);
    c7.b = 2.0;
    let mut c8 = config(ExperimentKind::Singularity, 400, "bernoulli(1/10)", 200, 19, threads);
    c8.p = Some(2);
    c8.tolerance = Some(1.0 / 200.0);
    let mut c9 = config(ExperimentKind::Symmetric, 40, "uniform01", 200, 23, threads);
    c9.u = Some(13);
    vec![(1, c1), (2, c2), (3, c3), (7, c7), (8, c8), (9, c9)]
}

fn freq(r: &Report, label: &str) -> f64 {
    r.outcome(label).unwrap_or_else(|| panic!("missing outcome {label}")).freq
}

fn random_matrix(seed: u64, i: u64) -> IntMatrix {
    let mut rng = stream_rng(seed, i);
    let rows = rng.gen_range(2..=8);
    let cols = rows + rng.gen_range(0..=3);
    let entries = (0..rows * cols).map(|_| BigInt::from(rng.gen_range(-9i64..=9))).collect();
    IntMatrix::new(rows, cols, entries).unwrap()
}

/// Criterion 4 summary: (agreements, verified certificates).
fn certifier_oracle(seed: u64) -> (u64, u64) {
    let mut agree = 0;
    let mut verified = 0;
    for i in 0..1000 {
        let m = random_matrix(seed, i);
        let cert = is_surjective(&m);
        agree += u64::from(cert.is_surjective() == cokernel(&m).is_trivial());
        verified += u64::from(verify_certificate(&m, &cert));
    }
    (agree, verified)
}

fn section_line(s: &SweepSection) -> String {
    format!("{}: {} cases, {} violations", s.name, s.cases, s.violations)
}

fn main() {
    let mut lines: Vec<Line> = Vec::new();
    let mut reports: Vec<(u32, String)> = Vec::new();

    for (id, cfg) in experiment_configs(0) {
        let started = Instant::now();
        let r = run(&cfg).unwrap();
        reports.push((id, r.result().to_json() + &r.to_csv()));
        let line = match id {
            1 => {
                let k: Vec<String> = (0..3)
                    .map(|k| {
                        let o = r.outcome(&format!("corank={k}")).unwrap();
                        format!("k={k} {:.4} vs {:.6}", o.freq, o.prediction.unwrap())
                    })
                    .collect();
                Line { id, name: "corank distribution mod 2", pass: r.pass, detail: k.join(", ") }
            }
            2 => {
                let o = r.outcome("trivial").unwrap();
                let detail = format!("freq {:.4} vs {:.6}, tol 0.03", o.freq, o.prediction.unwrap());
                Line { id, name: "rectangular triviality", pass: r.pass && (o.freq - 0.716_791_66).abs() <= 0.03, detail }
            }
            3 => {
                let f = freq(&r, "trivial");
                Line { id, name: "square non-surjectivity", pass: f <= 0.02, detail: format!("freq {f:.4} <= 0.02") }
            }
            7 => {
                let budget = u_budget(50, 0.5, 2.0, BudgetVariant::Refined);
                let w = freq(&r, "within_budget");
                let ok = budget == 40
                    && w >= 0.95
                    && r.outcome("consistent_trace").unwrap().pass == Some(true)
                    && r.outcome("verified_surjective").unwrap().pass == Some(true);
                let detail = format!(
                    "u_budget {budget}, within {w:.3}, consistent {}, verified {}",
                    r.outcome("consistent_trace").unwrap().count,
                    r.outcome("verified_surjective").unwrap().count
                );
                Line { id, name: "exposure process", pass: ok, detail }
            }
            8 => {
                let o = r.outcome("singular").unwrap();
                let detail = format!(
                    "{} of 200 singular mod 2; corank law predicts {:.4}",
                    o.count,
                    o.prediction.unwrap()
                );
                // Documented as unattainable: see the module comment.
                assert!((o.freq - o.prediction.unwrap()).abs() <= 0.1, "{detail}");
                Line { id, name: "sparse singularity mod 2", pass: o.count <= 1, detail }
            }
            9 => {
                let (a, b) = (freq(&r, "trivial"), freq(&r, "trivial_u0"));
                let detail = format!("u=13 freq {a:.3} >= 0.8, control {b:.3}");
                Line { id, name: "symmetric model", pass: a >= 0.8 && b < a, detail }
            }
            _ => unreachable!(),
        };
        print(&line, started);
        lines.push(line);
    }

    // The same matrices, singular over the integers.
    let started = Instant::now();
    let mut over_z = config(ExperimentKind::Singularity, 400, "bernoulli(1/10)", 200, 19, 0);
    over_z.tolerance = Some(1.0 / 200.0);
    let z = run(&over_z).unwrap();
    let z_count = z.outcome("singular").unwrap().count;
    println!("note: criterion 8 over the integers: {z_count} of 200 singular ({:.1}s)", started.elapsed().as_secs_f64());
    assert!(z_count <= 1);

    let started = Instant::now();
    let (agree, verified) = certifier_oracle(29);
    let line = Line {
        id: 4,
        name: "certifier vs Smith form",
        pass: agree == 1000 && verified == 1000,
        detail: format!("{agree}/1000 agree, {verified}/1000 verified"),
    };
    print(&line, started);
    reports.push((4, format!("{agree} {verified}")));
    lines.push(line);

    let started = Instant::now();
    let od = odlyzko_suite(&[2, 3], 5, 4).unwrap();
    let line = Line { id: 5, name: "subspace probability suite", pass: od.pass, detail: section_line(&od) };
    print(&line, started);
    reports.push((5, serde_json::to_string(&od).unwrap()));
    lines.push(line);

    let started = Instant::now();
    let sections = [
        lo_grid(&[2, 3, 4, 5, 7, 8], 8, 6).unwrap(),
        kneser(12).unwrap(),
        nesting_random(100_000, 31).unwrap(),
        cosine_random(100_000, 31),
    ];
    let in_time = started.elapsed().as_secs() < 600;
    let line = Line {
        id: 6,
        name: "anti-concentration grids",
        pass: sections.iter().all(|s| s.pass) && in_time,
        detail: sections.iter().map(section_line).collect::<Vec<_>>().join("; "),
    };
    print(&line, started);
    reports.push((6, serde_json::to_string(&sections).unwrap()));
    lines.push(line);

    // Criterion 10: the same runs on one and on three threads.
    let started = Instant::now();
    let mut mismatches = Vec::new();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let mut again: Vec<(u32, String)> = Vec::new();
        for (id, cfg) in experiment_configs(threads) {
            let r = run(&cfg).unwrap();
            again.push((id, r.result().to_json() + &r.to_csv()));
        }
        let (agree, verified) = certifier_oracle(29);
        again.push((4, format!("{agree} {verified}")));
        pool.install(|| {
            again.push((5, serde_json::to_string(&odlyzko_suite(&[2, 3], 5, 4).unwrap()).unwrap()));
            let sections = [
                lo_grid(&[2, 3, 4, 5, 7, 8], 8, 6).unwrap(),
                kneser(12).unwrap(),
                nesting_random(100_000, 31).unwrap(),
                cosine_random(100_000, 31),
            ];
            again.push((6, serde_json::to_string(&sections).unwrap()));
        });
        for ((id, a), (_, b)) in reports.iter().zip(&again) {
            if a != b {
                mismatches.push(format!("criterion {id} with {threads} threads"));
            }
        }
    }
    let line = Line {
        id: 10,
        name: "thread-count determinism",
        pass: mismatches.is_empty(),
        detail: if mismatches.is_empty() { "byte-identical on 1 and 3 threads".into() } else { mismatches.join(", ") },
    };
    print(&line, started);
    lines.push(line);

    lines.sort_by_key(|l| l.id);
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass && l.id != 8).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
