//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::Command;
use std::time::Instant;

use nsatk::catalog::Catalog;
use nsatk::config::RunConfig;
use nsatk::hk::{roundtrip_check, DerivMode};
use nsatk::suite::{run_criterion, CRITERIA};
use nsatk::SamplingSchedule;

const ORACLE_TOL: f64 = 1e-6;
const SAMPLING_TOL: f64 = 1e-3;

fn config() -> RunConfig {
    RunConfig { seed: 42, oracle_tol: ORACLE_TOL, sampling_tol: SAMPLING_TOL, ..RunConfig::default() }
}

fn criterion(id: usize, cat: &Catalog, cfg: &RunConfig) -> (bool, String) {
    let t = Instant::now();
    match run_criterion(id, cat, cfg) {
        Ok(Some(r)) => {
            let secs = t.elapsed().as_secs_f64();
            let mut msg = format!("{} ({secs:.2} s)", r.verdict.evidence);
            for c in r.checks.iter().filter(|c| !c.passed) {
                msg.push_str(&format!("\n    failed: {}: {}", c.label, c.detail));
            }
            let mut ok = r.passed();
            if id == 1 && secs >= 1.0 {
                ok = false;
                msg.push_str("; slower than 1 s");
            }
            (ok, msg)
        }
        Ok(None) => (false, "no such criterion".into()),
        Err(e) => (false, format!("error: {e}")),
    }
}

/// Each roundtrip on its own, for the per-item time limit.
fn roundtrip_timing(cat: &Catalog) -> (bool, String) {
    let s = SamplingSchedule::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, tol) in [("t2_sin_inv_t2", ORACLE_TOL), ("neg_sqrt_01", ORACLE_TOL), ("x_sin_inv", SAMPLING_TOL)] {
        let t = Instant::now();
        let r = cat
            .get(name)
            .and_then(|e| e.restrict(&e.default_segment))
            .and_then(|phi| roundtrip_check(&phi, 0.0, 1.0, DerivMode::Oracle, tol, &s));
        let secs = t.elapsed().as_secs_f64();
        let good = matches!(&r, Ok(rep) if rep.verdict.is_verified()) && secs < 5.0;
        ok &= good;
        parts.push(format!("{name} {secs:.2} s"));
    }
    (ok, parts.join(", "))
}

fn suite_json() -> Result<(Vec<u8>, f64), String> {
    let t = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_nsatk"))
        .args(["suite", "--seed", "42", "--no-metadata"])
        .env_remove("NSATK_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    if !out.status.success() {
        return Err(format!("suite exited with {:?}", out.status.code()));
    }
    Ok((out.stdout, secs))
}

fn determinism() -> (bool, String) {
    match (suite_json(), suite_json()) {
        (Ok((a, ta)), Ok((b, tb))) => {
            let same = a == b;
            let fast = ta < 60.0 && tb < 60.0;
            (same && fast, format!("identical: {same}, runs {ta:.1} s and {tb:.1} s"))
        }
        (Err(e), _) | (_, Err(e)) => (false, e),
    }
}

fn main() {
    let cat = Catalog::builtin();
    let cfg = config();
    let mut failures = 0;
    let mut report = |id: usize, name: &str, (ok, msg): (bool, String)| {
        if !ok {
            failures += 1;
        }
        println!("{} criterion {id} ({name}): {msg}", if ok { "PASS" } else { "FAIL" });
    };
    for (id, name) in CRITERIA {
        let mut res = criterion(id, &cat, &cfg);
        if id == 4 {
            let (ok, msg) = roundtrip_timing(&cat);
            res = (res.0 && ok, format!("{}; {msg}", res.1));
        }
        report(id, name, res);
    }
    report(9, "byte-identical suite reports", determinism());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
