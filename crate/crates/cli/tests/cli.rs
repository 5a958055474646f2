use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_farfield"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("farfield-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> std::process::Output {
    bin().arg("--out").arg(dir).args(args).output().unwrap()
}

#[test]
fn zeros_of_degree_three() {
    let dir = scratch("zeros");
    let out = run(&dir, &["zeros", "--ell", "3"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("-2.3221853546"), "{stdout}");
    assert!(stdout.contains("-1.8389073227"), "{stdout}");
    let manifest = fs::read_to_string(dir.join("zeros.manifest")).unwrap();
    assert!(manifest.contains("command = zeros"));
    assert!(dir.join("zeros.csv").exists());
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = scratch("invalid");
    let out = run(&dir, &["zeros", "--ell", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&dir, &["residues", "--ell", "3", "--r1", "2", "--r2", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compress_is_deterministic() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    let args = [
        "compress", "--ell", "8", "--r1", "1", "--r2", "4", "--eps", "1e-6",
    ];
    assert!(run(&a, &args).status.success());
    assert!(run(&b, &args).status.success());
    for f in ["kernel.table", "ladder.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn teleport_reads_a_table_and_a_series() {
    let dir = scratch("teleport");
    assert!(run(
        &dir,
        &["compress", "--ell", "2", "--r1", "10", "--eps", "1e-8"]
    )
    .status
    .success());
    let mut series =
        String::from("# ell = 2\n# m = 0\n# radius = 10\n# dt = 1e-2\n# t0 = 0e0\nt, value\n");
    for k in 0..500 {
        let t = k as f64 * 0.01;
        series.push_str(&format!("{t:e}, {:e}\n", (-(t - 2.0) * (t - 2.0)).exp()));
    }
    let input = dir.join("input.csv");
    fs::write(&input, series).unwrap();
    let table = dir.join("kernel.table");
    let out = run(
        &dir,
        &[
            "teleport",
            "--table",
            table.to_str().unwrap(),
            "--input",
            input.to_str().unwrap(),
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let manifest = fs::read_to_string(dir.join("teleport.manifest")).unwrap();
    assert!(manifest.contains("kernel.ell = 2"));
}
