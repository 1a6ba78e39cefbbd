//! Invocations whose outputs are pinned by files under `tests/golden`.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_csr");

pub fn csr(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("RUST_LOG", "error")
        .env_remove("CSR_THREADS")
        .output()
        .expect("spawn csr")
}

pub fn run_ok(args: &[&str]) -> Result<(), String> {
    let out = csr(args);
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("csr {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compare against a stored golden file; `CSR_UPDATE_GOLDEN=1` rewrites it.
pub fn compare_golden(name: &str, actual: &Path) -> Result<(), String> {
    let actual = fs::read_to_string(actual).map_err(|e| format!("{}: {e}", actual.display()))?;
    let path = golden_dir().join(name);
    if std::env::var_os("CSR_UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(golden_dir()).unwrap();
        fs::write(&path, &actual).unwrap();
        return Ok(());
    }
    let expected = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if actual == expected {
        Ok(())
    } else {
        let line = actual
            .lines()
            .zip(expected.lines())
            .position(|(a, b)| a != b)
            .map_or_else(|| "length".to_string(), |i| format!("line {}", i + 1));
        Err(format!("golden mismatch for {name} at {line}"))
    }
}

pub fn write_series(dir: &Path, name: &str, t: &[f64], cols: &[(&str, Vec<f64>)]) -> PathBuf {
    let mut s = String::from("t");
    for (label, _) in cols {
        s.push(',');
        s.push_str(label);
    }
    s.push('\n');
    for (j, tj) in t.iter().enumerate() {
        s.push_str(&format!("{tj:.17e}"));
        for (_, v) in cols {
            s.push_str(&format!(",{:.17e}", v[j]));
        }
        s.push('\n');
    }
    let path = dir.join(name);
    fs::write(&path, s).unwrap();
    path
}

/// Two series on an offset, non-unit time axis.
pub fn small_input(dir: &Path) -> PathBuf {
    let t: Vec<f64> = (0..24).map(|j| 10.0 + 0.5 * j as f64).collect();
    let a = t.iter().map(|x| 1.0 + 0.25 * (x - 10.0)).collect();
    let b = t.iter().map(|x| (x * 0.3).sin() - 0.5).collect();
    write_series(dir, "small.csv", &t, &[("alpha", a), ("beta", b)])
}

pub fn fit_case(dir: &Path) -> Result<PathBuf, String> {
    let input = small_input(dir);
    let out = dir.join("coef.csv");
    run_ok(&[
        "fit",
        "--input",
        p(&input),
        "--output",
        p(&out),
        "--degree",
        "4",
        "--normalize",
    ])?;
    Ok(out)
}

pub fn synth_case(dir: &Path, name: &str) -> Result<PathBuf, String> {
    let out = dir.join(name);
    run_ok(&[
        "synth",
        "--output",
        p(&out),
        "--degree",
        "3",
        "--tau",
        "0.5",
        "--sigma",
        "0.1",
        "--mean",
        "cos:2",
        "--points",
        "16",
        "--series",
        "2",
        "--seed",
        "7",
    ])?;
    Ok(out)
}

pub fn gibbs_case(dir: &Path) -> Result<PathBuf, String> {
    let out = dir.join("gibbs.json");
    run_ok(&[
        "gibbs",
        "--signal",
        "t",
        "--degree",
        "10",
        "--points",
        "400",
        "--output",
        p(&out),
        "--plot",
    ])?;
    Ok(out)
}

pub fn denoise_case(dir: &Path) -> Result<PathBuf, String> {
    let input = small_input(dir);
    let out = dir.join("smooth.csv");
    run_ok(&[
        "denoise",
        "--input",
        p(&input),
        "--output",
        p(&out),
        "--degree",
        "3",
        "--plot",
        "--width",
        "320",
        "--height",
        "200",
    ])?;
    Ok(out)
}

/// Every golden file, produced in `dir`.
pub fn golden_outputs(dir: &Path) -> Result<Vec<(&'static str, PathBuf)>, String> {
    let fit = fit_case(dir)?;
    let synth = synth_case(dir, "a.csv")?;
    let gibbs = gibbs_case(dir)?;
    let denoise = denoise_case(dir)?;
    Ok(vec![
        ("fit.csv", fit.clone()),
        ("fit.json", fit.with_extension("json")),
        ("synth.csv", synth),
        ("synth.clean.csv", dir.join("a.clean.csv")),
        // The metadata names its sibling files, so only the a.* run is stored.
        ("synth.json", dir.join("a.json")),
        ("gibbs.json", gibbs.clone()),
        ("gibbs.svg", gibbs.with_extension("svg")),
        ("denoise.csv", denoise.clone()),
        ("denoise.svg", denoise.with_extension("svg")),
    ])
}
