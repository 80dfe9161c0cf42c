use std::process::{Command, Output};

fn nsatk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsatk")).args(args).env_remove("NSATK_SEED").output().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn natnat_of_neg_abs() {
    let o = nsatk(&["subderiv", "natnat", "neg_abs", "--at", "0", "--dir", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let r = &v["results"][0];
    assert_eq!(r["value"], 1.0);
    assert_eq!(r["converged"], true);
    for k in ["command", "config", "results", "verdicts", "metadata"] {
        assert!(v.get(k).is_some(), "{k}");
    }
}

#[test]
fn hk_uses_singular_set() {
    let o = nsatk(&["hk", "t2_sin_inv_t2_deriv", "--from", "0", "--to", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o)["results"][0]["value"].as_f64().unwrap();
    assert!((v - 1f64.sin()).abs() < 1e-6, "{v}");
}

#[test]
fn determine_shift() {
    let o = nsatk(&["determine", "abs_plus5", "abs", "--omega", "-1", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["results"][0]["offset"], 5.0);
    assert_eq!(v["verdicts"][0]["status"], "verified");
}

#[test]
fn falsified_verdict_exits_one() {
    let o = nsatk(&["classify", "neg_abs"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert!(v["verdicts"].as_array().unwrap().iter().any(|x| x["status"] == "falsified"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["frobnicate"][..], &["subderiv", "natnat", "abs"], &["hk", "nope", "--from", "0", "--to", "1"], &["catalog", "list", "--bogus"]] {
        let o = nsatk(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn infinities_serialize_as_strings() {
    let o = nsatk(&["subderiv", "r", "neg_sqrt_01", "--at", "0", "--dir", "1"]);
    assert_eq!(json(&o)["results"][0]["value"], "-inf");
}

#[test]
fn seed_precedence() {
    let dir = std::env::temp_dir().join(format!("nsatk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "seed = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let seed = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_nsatk"));
        c.args(["catalog", "show", "abs", "--config", cfg]).args(extra).env_remove("NSATK_SEED");
        if let Some(s) = env {
            c.env("NSATK_SEED", s);
        }
        json(&c.output().unwrap())["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(seed(None, &[]), 3);
    assert_eq!(seed(Some("11"), &[]), 11);
    assert_eq!(seed(Some("11"), &["--seed", "5"]), 5);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["diagram", "max_affine_2d", "--probes", "5", "--no-metadata"];
    let a = nsatk(&args);
    let b = nsatk(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = nsatk(&["diagram", "max_affine_2d", "--probes", "5", "--no-metadata", "--seed", "9"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn csv_has_row_per_probe() {
    let o = nsatk(&["diagram", "abs", "--probes", "7", "--output", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 8, "{text}");
}
