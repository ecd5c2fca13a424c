use std::path::Path;
use std::process::{Command, Output};

use qrenyi_core::harness::{parse_trace, TraceFormat};

fn qrenyi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrenyi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn random_cq(dir: &Path, name: &str, nx: &str, d: &str, seed: &str) -> String {
    let p = path(dir, name);
    let out = qrenyi(&[
        "random", "--kind", "cq", "--nx", nx, "--d", d, "--seed", seed, "--out", &p,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    p
}

#[test]
fn random_instances_are_deterministic() {
    let a = qrenyi(&[
        "random",
        "--kind",
        "bipartite",
        "--dim-a",
        "2",
        "--dim-b",
        "3",
        "--seed",
        "5",
    ]);
    let b = qrenyi(&[
        "random",
        "--kind",
        "bipartite",
        "--dim-a",
        "2",
        "--dim-b",
        "3",
        "--seed",
        "5",
    ]);
    let c = qrenyi(&[
        "random",
        "--kind",
        "bipartite",
        "--dim-a",
        "2",
        "--dim-b",
        "3",
        "--seed",
        "6",
    ]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&qrenyi(&["random", "--kind", "cq", "--d", "0"])), 2);
    assert_eq!(code(&qrenyi(&["solve", "--quantity", "nonsense"])), 2);
    // Petz orders stop at 2.
    let dir = tempfile::tempdir().unwrap();
    let cq = random_cq(dir.path(), "cq.json", "2", "2", "1");
    let out = qrenyi(&[
        "solve",
        "--quantity",
        "petz-augustin",
        "--alpha",
        "10",
        "--input",
        &cq,
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let out = qrenyi(&[
        "solve",
        "--quantity",
        "petz-augustin",
        "--input",
        &cq,
        "--gamma",
        "0.5",
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn bad_input_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.json");
    std::fs::write(&bad, "{").unwrap();
    assert_eq!(
        code(&qrenyi(&[
            "solve",
            "--quantity",
            "petz-augustin",
            "--input",
            &bad
        ])),
        3
    );
    let missing = path(dir.path(), "missing.json");
    assert_eq!(
        code(&qrenyi(&[
            "solve",
            "--quantity",
            "petz-augustin",
            "--input",
            &missing
        ])),
        3
    );
    let bi = path(dir.path(), "bi.json");
    qrenyi(&[
        "random",
        "--kind",
        "bipartite",
        "--dim-a",
        "2",
        "--dim-b",
        "2",
        "--out",
        &bi,
    ]);
    assert_eq!(
        code(&qrenyi(&[
            "solve",
            "--quantity",
            "petz-augustin",
            "--input",
            &bi
        ])),
        3
    );
}

#[test]
fn oversized_first_step_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cq = random_cq(dir.path(), "cq.json", "4", "3", "1");
    let out = qrenyi(&[
        "solve",
        "--quantity",
        "petz-augustin",
        "--input",
        &cq,
        "--delta1",
        "1e300",
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn solve_traces_parse_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cq = random_cq(dir.path(), "cq.json", "4", "3", "2");
    for (flag, format) in [
        ("csv", TraceFormat::Csv),
        ("structured", TraceFormat::Structured),
    ] {
        let out = qrenyi(&[
            "solve",
            "--quantity",
            "sandwiched-augustin",
            "--alpha",
            "2",
            "--input",
            &cq,
            "--max-iters",
            "30",
            "--trace-format",
            flag,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let rows = parse_trace(&String::from_utf8(out.stdout).unwrap(), format).unwrap();
        assert_eq!(rows.len(), 31);
        assert!(rows.windows(2).all(|w| w[1].best_f <= w[0].best_f));
        assert!(rows.iter().all(|r| r.delta_t.is_some()));
    }
}

#[test]
fn no_timing_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cq = random_cq(dir.path(), "cq.json", "4", "3", "3");
    for solver in ["polyak", "armijo", "fixed-point"] {
        let args = [
            "solve",
            "--quantity",
            "petz-augustin",
            "--input",
            &cq,
            "--solver",
            solver,
            "--max-iters",
            "40",
            "--no-timing",
        ];
        let (a, b) = (qrenyi(&args), qrenyi(&args));
        assert_eq!(code(&a), 0, "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
        let rows = parse_trace(&String::from_utf8(a.stdout).unwrap(), TraceFormat::Csv).unwrap();
        assert!(rows.iter().all(|r| r.elapsed_ms == 0.0));
    }
}

#[test]
fn single_state_instance_reaches_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cq = random_cq(dir.path(), "single.json", "1", "3", "4");
    let out = qrenyi(&[
        "solve",
        "--quantity",
        "petz-augustin",
        "--input",
        &cq,
        "--delta",
        "0.1",
        "--max-iters",
        "300",
        "--trace-format",
        "structured",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = parse_trace(
        &String::from_utf8(out.stdout).unwrap(),
        TraceFormat::Structured,
    )
    .unwrap();
    let best = rows.last().unwrap().best_f;
    assert!(best.abs() <= 1e-8, "{best}");
}

#[test]
fn compare_flags_fixed_point_on_sandwiched_order_10() {
    let dir = tempfile::tempdir().unwrap();
    let cq = random_cq(dir.path(), "cq.json", "16", "8", "1");
    let out = qrenyi(&[
        "compare",
        "--quantity",
        "sandwiched-augustin",
        "--alpha",
        "10",
        "--input",
        &cq,
        "--max-iters",
        "50",
        "--reference-iters",
        "50",
        "--no-timing",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let err = stderr(&out);
    assert!(
        err.lines()
            .any(|l| l.starts_with("fixed-point") && l.contains("diverged")),
        "{err}"
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,polyak_gap,polyak_elapsed_ms,armijo_gap,armijo_elapsed_ms,fixed-point_gap,fixed-point_elapsed_ms"
    );
    assert_eq!(lines.count(), 51);
}

#[test]
fn compare_rejects_fixed_point_for_bipartite() {
    let dir = tempfile::tempdir().unwrap();
    let bi = path(dir.path(), "bi.json");
    qrenyi(&[
        "random",
        "--kind",
        "bipartite",
        "--dim-a",
        "2",
        "--dim-b",
        "2",
        "--out",
        &bi,
    ]);
    let out = qrenyi(&[
        "compare",
        "--quantity",
        "conditional-entropy",
        "--input",
        &bi,
        "--solvers",
        "polyak,fixed-point",
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn bench_dim_has_one_row_per_dimension() {
    let args = [
        "bench-dim",
        "--quantity",
        "petz-augustin",
        "--alpha",
        "0.5",
        "--dims",
        "2,3,4",
        "--seeds",
        "2",
        "--nx",
        "3",
        "--reference-iters",
        "200",
        "--max-iters",
        "400",
        "--no-timing",
    ];
    let (a, b) = (qrenyi(&args), qrenyi(&args));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "dim,median_iterations,median_elapsed_ms,reached,seeds"
    );
    assert_eq!(lines.len(), 4);
    for (line, dim) in lines[1..].iter().zip(["2", "3", "4"]) {
        assert!(line.starts_with(&format!("{dim},")), "{line}");
        assert!(line.ends_with(",2"), "{line}");
    }
}

#[test]
fn gradcheck_passes_and_catches_corruption() {
    let args = ["gradcheck", "--dims", "2,3", "--seeds", "2"];
    let out = qrenyi(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",PASS")), "{text}");
    let out = Command::new(env!("CARGO_BIN_EXE_qrenyi"))
        .args(args)
        .env("QRENYI_CORRUPT_GRADIENT", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
}
