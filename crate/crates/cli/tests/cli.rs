use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn subharm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subharm")).args(args).output().unwrap()
}

fn run_in(dir: &Path, sub: &str, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec![sub, "--out", out];
    args.extend_from_slice(extra);
    subharm(&args)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn csv_column(text: &str, col: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == col).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn approximate_u_phi_writes_all_outputs() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(tmp.path(), "approximate", &["--input", "u_phi:12:const:2", "--psi", "const:4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["zeros.txt", "decomposition.csv", "pieces.csv", "error_report.csv", "manifest.json"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    // 12 atoms of mass 1/2: six zeros with multiplicity
    let total: u64 = read(tmp.path(), "zeros.txt")
        .lines()
        .map(|l| l.split_whitespace().nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 6);
    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "approximate");
    assert_eq!(manifest["config"]["psi"], "const:4");
    assert_eq!(manifest["summary"]["zero_count"], 6);
    assert!(read(tmp.path(), "decomposition.csv").starts_with("k,R_k,R_k*psi,mass_mu1,mass_mu2_part\n"));
}

#[test]
fn same_config_and_seed_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("m.txt");
    let mut text = String::new();
    for j in 0..40 {
        let (r, t) = (1.5 * 1.12f64.powi(j), 2.4 * j as f64);
        text.push_str(&format!("{} {} {}\n", r * t.cos(), r * t.sin(), 0.4 + 0.3 * (j % 4) as f64));
    }
    fs::write(&input, text).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = subharm(&[
            "approximate",
            "--input",
            input.to_str().unwrap(),
            "--seed",
            "11",
            "--r-grid",
            "4,8,16",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["zeros.txt", "decomposition.csv", "pieces.csv", "error_report.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn empty_measure_is_fine() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("empty.txt");
    fs::write(&input, "# nothing here\n").unwrap();
    let o = run_in(&tmp.path().join("out"), "approximate", &["--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&tmp.path().join("out"), "zeros.txt"), "");
}

#[test]
fn malformed_input_exits_2_and_names_the_line() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("bad.txt");
    fs::write(&input, "1 0 1\n# fine\n2 0 oops\n").unwrap();
    let o = run_in(&tmp.path().join("out"), "approximate", &["--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = run_in(tmp.path(), "approximate", &["--input", "missing.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_in(tmp.path(), "approximate", &["--input", "u_phi:4:const:2", "--r-grid", "8,4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn odd_mass_partition_is_a_user_error() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("odd.txt");
    fs::write(&input, "0.1 0.1 1\n0.5 0.5 1\n0.9 0.9 1\n").unwrap();
    let o = run_in(&tmp.path().join("out"), "partition", &["--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn partition_square_example() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("sq.txt");
    fs::write(&input, "0.1 0.1 1\n0.2 0.2 1\n0.8 0.8 1\n0.9 0.9 1\n").unwrap();
    let out = tmp.path().join("out");
    let o = run_in(&out, "partition", &["--input", input.to_str().unwrap(), "--rect", "0,1,0,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pieces = read(&out, "pieces.csv");
    assert_eq!(csv_column(&pieces, "mass"), vec![2.0, 2.0]);
    assert_eq!(csv_column(&pieces, "sigma_max")[0], 0.5);
}

#[test]
fn atomize_two_unit_atoms() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("two.txt");
    fs::write(&input, "0.25 1 1\n0.75 2 1\n").unwrap();
    let out = tmp.path().join("out");
    let o = run_in(&out, "atomize", &["--input", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pairs = read(&out, "pairs.csv");
    let close = |col: &str, want: f64| {
        let got = csv_column(&pairs, col);
        assert_eq!(got.len(), 1);
        assert!((got[0] - want).abs() < 1e-12, "{col}: {}", got[0]);
    };
    close("omega1_re", 0.25);
    close("omega2_im", 2.0);
}

#[test]
fn jensen_single_atom_has_zero_residual() {
    let tmp = TempDir::new().unwrap();
    let input = tmp.path().join("one.txt");
    fs::write(&input, "3 0 1\n").unwrap();
    let out = tmp.path().join("out");
    let o = run_in(&out, "jensen", &["--input", input.to_str().unwrap(), "--r-grid", "1,2,5,10"]);
    assert!(o.status.success());
    assert!(csv_column(&read(&out, "jensen.csv"), "residual").iter().all(|r| r.abs() < 1e-12));
}

#[test]
fn sharpness_best_rounding_is_bounded_below() {
    let tmp = TempDir::new().unwrap();
    let o = run_in(
        tmp.path(),
        "sharpness",
        &["--input", "u_phi_to:65536:loge", "--psi", "loge", "--r-grid", "pow2:4:12"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ratio = csv_column(&read(tmp.path(), "error_report.csv"), "ratio");
    assert_eq!(ratio.len(), 9);
    assert!(ratio.iter().all(|&r| r > 0.5));
    let gaps = csv_column(&read(tmp.path(), "gap_report.csv"), "gap");
    assert!(gaps.iter().all(|g| (2.0 * g).fract() == 0.0));
}

#[test]
fn config_file_with_flag_override() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    let out = tmp.path().join("out");
    fs::write(
        &cfg,
        format!("input = \"u_phi:12:const:2\"\npsi = \"const:4\"\nseed = 5\nr_grid = [4.0, 8.0]\nout = {:?}\n", out),
    )
    .unwrap();
    let o = subharm(&["verify", "--config", cfg.to_str().unwrap(), "--seed", "6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["config"]["r_grid"], serde_json::json!([4.0, 8.0]));
    let verdict: serde_json::Value = serde_json::from_str(&read(&out, "verify.json")).unwrap();
    assert_eq!(verdict["passed"], true);

    fs::write(&cfg, "input = \"x\"\nbogus = 1\n").unwrap();
    assert_eq!(subharm(&["verify", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
