use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn circmaj(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_circmaj"))
        .args(args)
        .env_remove("CIRCMAJ_WORKERS")
        .output()
        .unwrap();
    out
}

fn ok(args: &[&str]) -> String {
    let out = circmaj(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_reference_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let haar = dir.path().join("haar");
    let verdicts = dir.path().join("cmp");

    let stdout = ok(&[
        "run",
        "--family",
        "G3-rn-rs",
        "--n",
        "4",
        "--gates",
        "80",
        "--samples",
        "60",
        "--seed",
        "3",
        "--snapshots",
        "20,80",
        "--resamples",
        "20",
        "--out",
        p(&run),
    ]);
    assert!(stdout.contains("G3-rn-rs"));
    for f in [
        "lorenz_mean.csv",
        "lorenz_snapshots.csv",
        "ratios.csv",
        "hist.csv",
        "manifest.json",
    ] {
        assert!(run.join(f).exists(), "{f}");
    }
    let mean = fs::read_to_string(run.join("lorenz_mean.csv")).unwrap();
    assert!(mean.starts_with("# schema_version=1\nk,k_over_N,mean_F,stddev_F,stderr_F\n"));
    assert_eq!(mean.lines().count(), 2 + 16);

    ok(&[
        "reference",
        "--haar",
        "4",
        "--samples",
        "60",
        "--resamples",
        "20",
        "--out",
        p(&haar),
    ]);
    let stdout = ok(&["compare", p(&run), p(&haar), "--out", p(&verdicts)]);
    assert!(
        stdout.contains("G3-rn-rs") && stdout.contains("Haar-4"),
        "{stdout}"
    );
    let v = fs::read_to_string(verdicts.join("verdicts.csv")).unwrap();
    assert_eq!(v.lines().count(), 3);
    assert!(verdicts.join("deviations.csv").exists());
}

#[test]
fn worker_count_does_not_change_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let base = [
        "run",
        "--family",
        "D2-all-0",
        "--n",
        "6",
        "--samples",
        "50",
        "--resamples",
        "10",
    ];
    ok(&[&base[..], &["--workers", "1", "--out", p(&a)]].concat());
    let out = Command::new(env!("CARGO_BIN_EXE_circmaj"))
        .args(&base)
        .args(["--out", p(&b)])
        .env("CIRCMAJ_WORKERS", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
    for f in [
        "lorenz_mean.csv",
        "lorenz_snapshots.csv",
        "ratios.csv",
        "hist.csv",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "family = \"MG-nn-0\"\nn = 6\ngates = 40\nsamples = 30\nseed = 9\nanalyses = [\"lorenz\", \"parity_spectrum\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&[
        "run",
        "--config",
        p(&cfg),
        "--samples",
        "20",
        "--out",
        p(&out),
    ]);
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"samples\": 20"), "{manifest}");
    assert!(out.join("parity_ratios.csv").exists());
    assert!(!out.join("ratios.csv").exists());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    for args in [
        vec!["run", "--family", "G9-rn-rs", "--out", p(&out)],
        vec![
            "run",
            "--family",
            "G3-rn-rs",
            "--n",
            "5",
            "--analyses",
            "spectrum",
            "--out",
            p(&out),
        ],
        vec!["run", "--out", p(&out)],
        vec!["reference", "--out", p(&out)],
        vec!["compare", p(&out), p(&out)],
    ] {
        let o = circmaj(&args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty());
    }
}
