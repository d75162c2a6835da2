//! Acceptance run: every criterion at full tolerance, one line each.
//!
//! Plain `main` harness so the report prints in criterion order.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use qwigner::cli::config::Level;
use qwigner::cli::verify::{run_criterion, Check, VerifyOptions, CRITERIA};
use qwigner::PrefactorSign;

const PANELS: [&str; 13] = [
    "fig1",
    "fig2a",
    "fig2b",
    "fig2c",
    "fig3a",
    "fig3b",
    "fig3c",
    "fig4_psiplus",
    "fig4_psiminus",
    "fig4_phiplus",
    "fig4_phiminus",
    "fig5a",
    "fig5b",
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn summarize(checks: &[Check]) -> Outcome {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    let worst = checks
        .iter()
        .filter(|c| c.tolerance > 0.0 && c.value.is_finite())
        .map(|c| c.value / c.tolerance)
        .fold(0.0f64, f64::max);
    let mut detail = format!("{} checks, worst value/tolerance {worst:.2e}", checks.len());
    for c in &failed {
        detail.push_str(&format!(
            "; FAILED {} = {:e} (tol {:e}){}",
            c.name,
            c.value,
            c.tolerance,
            c.note.as_deref().map(|n| format!(" [{n}]")).unwrap_or_default()
        ));
    }
    Outcome {
        pass: !checks.is_empty() && failed.is_empty(),
        detail,
    }
}

fn timed(limit: Duration, checks: &[Check], elapsed: Duration) -> Outcome {
    let mut outcome = summarize(checks);
    outcome.detail.push_str(&format!(", {:.2} s (limit {} s)", elapsed.as_secs_f64(), limit.as_secs()));
    outcome.pass &= elapsed < limit;
    outcome
}

/// The printed prefactor sign must break both normalization and marginals.
fn canary() -> Outcome {
    let opts = VerifyOptions {
        sign: PrefactorSign::AsPrinted,
        ..VerifyOptions::new(Level::Full)
    };
    let checks = run_criterion(3, &opts);
    let caught = |prefix: &str| {
        let relevant: Vec<&Check> = checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
        !relevant.is_empty() && relevant.iter().all(|c| !c.pass)
    };
    let pass = caught("normalization_") && caught("marginal_");
    Outcome {
        pass,
        detail: format!("flipped sign rejected by all {} checks: {pass}", checks.len()),
    }
}

fn figures(dir: &Path, threads: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qwigner"))
        .args(["figures", "--threads", threads, "--out"])
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("figures exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

/// Default `figures` runs: the full panel set, byte-identical across
/// repeated runs and worker counts.
fn artifacts() -> Outcome {
    let result = (|| -> Result<String, String> {
        let root = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut runs = Vec::new();
        for (i, threads) in ["1", "1", "4"].iter().enumerate() {
            let dir = root.path().join(format!("run{i}"));
            runs.push(figures(&dir, threads)?);
        }
        let expected: Vec<String> = PANELS
            .iter()
            .flat_map(|p| [format!("{p}.csv"), format!("{p}.pgm"), format!("{p}.pgm.txt")])
            .collect();
        let mut names: Vec<String> = runs[0].keys().cloned().collect();
        let mut want = expected.clone();
        names.sort();
        want.sort();
        if names != want {
            return Err(format!("unexpected file set {names:?}"));
        }
        for (i, run) in runs.iter().enumerate().skip(1) {
            for (name, bytes) in run {
                if runs[0].get(name) != Some(bytes) {
                    return Err(format!("{name} differs in run {i}"));
                }
            }
        }
        Ok(format!("{} files identical over 3 runs (threads 1, 1, 4)", expected.len()))
    })();
    match result {
        Ok(detail) => Outcome { pass: true, detail },
        Err(detail) => Outcome { pass: false, detail },
    }
}

fn main() {
    let opts = VerifyOptions::new(Level::Full);
    let mut all_pass = true;
    for (k, title) in CRITERIA {
        let start = Instant::now();
        let checks = run_criterion(k, &opts);
        let elapsed = start.elapsed();
        let mut outcome = match k {
            1 => timed(Duration::from_secs(10), &checks, elapsed),
            2 => timed(Duration::from_secs(300), &checks, elapsed),
            _ => summarize(&checks),
        };
        if k == 3 {
            let guard = canary();
            outcome.pass &= guard.pass;
            outcome.detail.push_str(&format!("; {}", guard.detail));
        }
        if k == 11 {
            let files = artifacts();
            outcome.pass &= files.pass;
            outcome.detail.push_str(&format!("; {}", files.detail));
        }
        all_pass &= outcome.pass;
        println!(
            "criterion {k} [{title}]: {} ({})",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if !all_pass {
        std::process::exit(1);
    }
}
