//! End-to-end checks of the command-line interface and file formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tcosep")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tcosep-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_select_factor_eval_round_trip() {
    let dir = workdir("round");
    let tensor = dir.join("t.t3t");
    let truth = dir.join("truth.idx");
    let sel = dir.join("sel.idx");
    run_ok(&[
        "gen", "--m", "16", "--n", "16", "--p", "3", "--r1", "4", "--r2", "2", "--seed", "3",
        "-o", path_str(&tensor), "--truth", path_str(&truth),
    ]);
    let stdout = run_ok(&[
        "select", "-i", path_str(&tensor), "--method", "cosntf", "--r1", "4", "--r2", "2",
        "-o", path_str(&sel),
    ]);
    assert!(stdout.contains("converged: true"), "{stdout}");
    // a noiseless tensor is recovered exactly at the selected indices
    let stdout = run_ok(&["factor", "-i", path_str(&tensor), "--idx", path_str(&sel)]);
    let err_line = stdout.lines().find(|l| l.starts_with("rel_error:")).unwrap();
    let err: f64 = err_line.trim_start_matches("rel_error:").trim().parse().unwrap();
    assert!(err <= 1e-6, "factor rel_error {err:e}");
    // the selector found the ground truth set (order-insensitive)
    let parse_idx = |path: &Path| {
        let text = fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        let mut i: Vec<usize> = lines.next().unwrap()[2..]
            .split(',')
            .map(|s| s.trim().parse().unwrap())
            .collect();
        let mut j: Vec<usize> = lines.next().unwrap()[2..]
            .split(',')
            .map(|s| s.trim().parse().unwrap())
            .collect();
        i.sort_unstable();
        j.sort_unstable();
        (i, j)
    };
    assert_eq!(parse_idx(&truth), parse_idx(&sel));

    let stdout = run_ok(&[
        "eval", "--reference", path_str(&tensor), "--candidate", path_str(&tensor),
    ]);
    assert!(stdout.contains("rel_error: 0e0"), "{stdout}");
    assert!(stdout.contains("100.0000%"), "{stdout}");
}

#[test]
fn factor_writes_model_tensors() {
    let dir = workdir("factor");
    let tensor = dir.join("t.t3t");
    let truth = dir.join("truth.idx");
    run_ok(&[
        "gen", "--m", "10", "--n", "10", "--p", "2", "--r1", "3", "--r2", "2", "--seed", "5",
        "-o", path_str(&tensor), "--truth", path_str(&truth),
    ]);
    let prefix = dir.join("model");
    run_ok(&[
        "factor", "-i", path_str(&tensor), "--idx", path_str(&truth),
        "--out-prefix", path_str(&prefix),
    ]);
    for tag in ["p1", "core", "p2"] {
        let path = dir.join(format!("model.{tag}.t3t"));
        assert!(path.exists(), "missing {}", path.display());
        let header = fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("t3 "), "bad header in {tag}");
    }
}

#[test]
fn sweep_csv_is_byte_reproducible_and_structured() {
    let dir = workdir("sweep");
    let out1 = dir.join("a.csv");
    let out2 = dir.join("b.csv");
    let args = |out: &Path| {
        vec![
            "sweep".to_string(),
            "--m".into(), "12".into(), "--n".into(), "12".into(), "--p".into(), "2".into(),
            "--r1".into(), "3".into(), "--r2".into(), "2".into(),
            "--noise-levels".into(), "0.0,1e-4".into(),
            "--trials".into(), "2".into(),
            "--methods".into(), "cosntf,hybrid".into(),
            "--seed".into(), "9".into(),
            "-o".into(), out.to_str().unwrap().to_string(),
        ]
    };
    let run_vec = |args: Vec<String>| {
        let out = Command::new(bin()).args(&args).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run_vec(args(&out1));
    run_vec(args(&out2));
    let a = fs::read(&out1).unwrap();
    let b = fs::read(&out2).unwrap();
    assert_eq!(a, b, "sweep output differs between identical runs");

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,r1,r2,seed,noise,rel_error,rel_approx,wall_ms"
    );
    // 2 levels × 2 trials × 2 methods trial rows + 2 levels × 2 methods means
    let trial_rows = text.lines().skip(1).filter(|l| !l.contains(",mean,")).count();
    let mean_rows = text.lines().filter(|l| l.contains(",mean,")).count();
    assert_eq!(trial_rows, 8);
    assert_eq!(mean_rows, 4);
    // wall_ms column is zeroed without --timings
    for line in text.lines().skip(1) {
        assert!(line.ends_with(",0"), "wall column not zeroed: {line}");
    }
    // mean rows equal the arithmetic means of their trials
    for mean_line in text.lines().filter(|l| l.contains(",mean,")) {
        let cols: Vec<&str> = mean_line.split(',').collect();
        let (method, noise, mean_err): (&str, f64, f64) =
            (cols[0], cols[4].parse().unwrap(), cols[5].parse().unwrap());
        let trials: Vec<f64> = text
            .lines()
            .skip(1)
            .filter(|l| !l.contains(",mean,"))
            .map(|l| l.split(',').collect::<Vec<_>>())
            .filter(|c| c[0] == method && c[4].parse::<f64>().unwrap() == noise)
            .map(|c| c[5].parse::<f64>().unwrap())
            .collect();
        let expect = trials.iter().sum::<f64>() / trials.len() as f64;
        assert!(
            (mean_err - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
            "mean mismatch for {method} at {noise:e}"
        );
    }
}

#[test]
fn ingest_builds_a_tensor_from_pgms() {
    let dir = workdir("ingest");
    let images = dir.join("imgs");
    fs::create_dir_all(&images).unwrap();
    for (idx, name) in ["a.pgm", "b.pgm", "c.pgm"].iter().enumerate() {
        let mut bytes = b"P5\n4 3\n255\n".to_vec();
        bytes.extend((0..12).map(|px| (px * 9 + idx * 40) as u8));
        fs::write(images.join(name), bytes).unwrap();
    }
    let out = dir.join("imgs.t3t");
    let stdout = run_ok(&[
        "ingest", "--dir", path_str(&images), "--resize", "3x4", "-o", path_str(&out),
    ]);
    assert!(stdout.contains("3x3x4"), "{stdout}");
    let tensor = tcosep::fileio::read_t3t(&out).unwrap();
    assert_eq!(tensor.dims(), (3, 3, 4));
    assert!(tensor.is_nonnegative());
    assert!(tensor.as_slice().iter().all(|&v| v <= 1.0));
}

#[test]
fn gen_is_byte_reproducible_per_seed() {
    let dir = workdir("genrep");
    let t1 = dir.join("one.t3t");
    let t2 = dir.join("two.t3t");
    for out in [&t1, &t2] {
        run_ok(&[
            "gen", "--m", "14", "--n", "14", "--p", "3", "--r1", "3", "--r2", "2",
            "--noise", "1e-3", "--seed", "11", "-o", path_str(out),
        ]);
    }
    assert_eq!(fs::read(&t1).unwrap(), fs::read(&t2).unwrap());
}

#[test]
fn bad_inputs_exit_nonzero_with_a_message() {
    let dir = workdir("bad");
    let missing = dir.join("missing.t3t");
    let out = run(&["eval", "--reference", path_str(&missing), "--candidate", path_str(&missing)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let malformed = dir.join("bad.t3t");
    fs::write(&malformed, "t3 0 1 1\n").unwrap();
    let out = run(&["select", "-i", path_str(&malformed), "--method", "cosntf", "--r1", "1",
        "--r2", "1", "-o", path_str(&dir.join("sel.idx"))]);
    assert!(!out.status.success());

    // rectangular generation cannot balance both slice-sum families
    let out = run(&["gen", "--m", "8", "--n", "10", "--p", "2", "--r1", "2", "--r2", "2",
        "-o", path_str(&dir.join("rect.t3t"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("m == n"));
}

#[test]
fn tcur_select_runs_with_each_distribution() {
    let dir = workdir("tcur");
    let tensor = dir.join("t.t3t");
    run_ok(&[
        "gen", "--m", "20", "--n", "20", "--p", "3", "--r1", "4", "--r2", "3", "--seed", "21",
        "-o", path_str(&tensor),
    ]);
    for dist in ["uniform", "slice", "leverage"] {
        let sel = dir.join(format!("{dist}.idx"));
        let stdout = run_ok(&[
            "select", "-i", path_str(&tensor), "--method", "tcur", "--dist", dist,
            "--r1", "4", "--r2", "3", "--seed", "2", "-o", path_str(&sel),
        ]);
        assert!(stdout.contains("I: "), "{stdout}");
        let (i, j) = tcosep::fileio::read_idx(&sel).unwrap();
        assert_eq!(i.len(), 4);
        assert_eq!(j.len(), 3);
    }
}
