//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::analysis::{
    determination_check, monotone_test, radial_lipschitz_check, reconstruct, DeterminationMode, DeterminationProbe,
    MonotoneCase, ReconstructMode,
};
use crate::catalog::{Catalog, CatalogEntry, Segment};
use crate::config::{OutputFormat, RunConfig};
use crate::dini::{lower_right_dini, upper_right_dini};
use crate::error::{Error, Result};
use crate::hk::{hk_integrate, roundtrip_check, DerivMode};
use crate::report::Report;
use crate::rng::stream;
use crate::subderiv::{diagram_check, estimate, Kind, Source};
use crate::subdiff::class_check;
use crate::suite;

pub const SEED_ENV: &str = "NSATK_SEED";

#[derive(Parser, Debug)]
#[command(name = "nsatk", version, about = "Numerical subderivatives, subdifferentials and HK integrals")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// Run seed; overrides NSATK_SEED and the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    output: Option<Format>,
    /// Leave out the metadata block (wall times, version).
    #[arg(long, global = true)]
    no_metadata: bool,
    /// Extra catalog file(s) to load.
    #[arg(long, global = true)]
    load: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// List or show catalog entries.
    Catalog {
        #[command(subcommand)]
        what: CatalogCmd,
    },
    /// One subderivative: r, r+, d, circ, up, nat or natnat.
    Subderiv {
        kind: String,
        name: String,
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true, required = true)]
        at: Vec<f64>,
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true, required = true)]
        dir: Vec<f64>,
        /// auto, oracle, from_subdiff or from_radial.
        #[arg(long, default_value = "auto")]
        source: String,
    },
    /// Lower and upper right Dini derivatives of a 1-d entry.
    Dini {
        name: String,
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
    },
    /// HK integral of a 1-d entry.
    Hk {
        name: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Integrate the right derivative along the default segment and compare.
    Roundtrip {
        name: String,
        /// oracle or estimated.
        #[arg(long, default_value = "oracle")]
        mode: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Rebuild an entry along a segment from its regularized subderivative.
    Reconstruct {
        name: String,
        /// Base point followed by direction.
        #[arg(long, num_args = 2.., allow_negative_numbers = true)]
        segment: Option<Vec<f64>>,
        /// oracle, from_subdiff or from_radial.
        #[arg(long, default_value = "oracle")]
        mode: String,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check that F equals G plus a constant from subdifferential inclusion.
    Determine {
        f: String,
        g: String,
        /// lo hi per coordinate; default is the probe box of G.
        #[arg(long, num_args = 2.., allow_negative_numbers = true)]
        omega: Option<Vec<f64>>,
        /// auto, lsc, continuous, acg or continuous_dense.
        #[arg(long, default_value = "auto")]
        mode: String,
    },
    /// Verdicts for the four regularization classes.
    Classify {
        name: String,
        #[arg(long, default_value = "auto")]
        source: String,
    },
    /// Monotonicity test for a 1-d entry.
    Monotone {
        name: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        /// 1, 2 or 3.
        #[arg(long, default_value = "1")]
        case: String,
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
        exceptions: Vec<f64>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Continuity and local Lipschitz behaviour along a segment.
    Lipschitz {
        name: String,
        #[arg(long, num_args = 2.., allow_negative_numbers = true)]
        segment: Option<Vec<f64>>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Ordering of all seven subderivatives at seeded probes.
    Diagram {
        name: String,
        #[arg(long, default_value_t = 50)]
        probes: usize,
        #[arg(long, default_value_t = 1e-3)]
        slack: f64,
    },
    /// Run the acceptance criteria.
    Suite {
        /// Only these criteria.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        criterion: Vec<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogCmd {
    List,
    Show { name: String },
}

#[derive(Serialize)]
struct EntrySummary<'a> {
    name: &'a str,
    dim: usize,
    description: &'a str,
    tags: Vec<String>,
    singular_set: &'a [Vec<f64>],
    exception_set: &'a [Vec<f64>],
    probe_box: &'a [(f64, f64)],
    default_segment: &'a Segment,
    deriv_oracle: bool,
    subdiff_oracle: Option<String>,
}

fn summary(e: &CatalogEntry) -> EntrySummary<'_> {
    EntrySummary {
        name: &e.name,
        dim: e.dim,
        description: &e.description,
        tags: e.tags.iter().map(|t| t.to_string()).collect(),
        singular_set: &e.singular_set,
        exception_set: &e.exception_set,
        probe_box: &e.probe_box,
        default_segment: &e.default_segment,
        deriv_oracle: e.has_deriv_oracle(),
        subdiff_oracle: e.subdiff_oracle().map(|o| o.label.clone()),
    }
}

/// Parses `argv`, runs the command and writes the report to `out`.
/// Returns 0 when nothing was falsified, 1 when something was, 2 on a
/// usage or evaluation error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli, err) {
        Ok((text, code)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn resolve_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Ok(s) = std::env::var(SEED_ENV) {
        cfg.seed = s.trim().parse().map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}={s:?} is not an integer")))?;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = g.output {
        cfg.output = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Plain => OutputFormat::Plain,
        };
    }
    cfg.schedule()?;
    cfg.directional_probe()?;
    Ok(cfg)
}

fn segment_arg(e: &CatalogEntry, v: &Option<Vec<f64>>) -> Result<Segment> {
    match v {
        None => Ok(e.default_segment.clone()),
        Some(v) if v.len() == 2 * e.dim => Ok(Segment::new(v[..e.dim].to_vec(), v[e.dim..].to_vec())),
        Some(v) => Err(Error::InvalidArgument(format!(
            "--segment needs {} numbers (base then direction), got {}",
            2 * e.dim,
            v.len()
        ))),
    }
}

fn source_arg(s: &str, e: &CatalogEntry) -> Result<Source> {
    if s == "auto" {
        Ok(Source::auto(e))
    } else {
        s.parse()
    }
}

fn execute(cli: Cli, err: &mut dyn Write) -> Result<(String, i32)> {
    let started = Instant::now();
    let cfg = resolve_config(&cli.global)?;
    let mut cat = Catalog::builtin();
    for p in &cli.global.load {
        cat.load_file(p)?;
    }
    let probe = cfg.directional_probe()?;
    let sched = cfg.schedule()?;
    let mut timings = None;
    let command = command_name(&cli.cmd);
    let mut rep = Report::new(command, &cfg);
    match &cli.cmd {
        Cmd::Catalog { what: CatalogCmd::List } => {
            for e in cat.iter() {
                rep.result(&summary(e))?;
            }
        }
        Cmd::Catalog { what: CatalogCmd::Show { name } } => {
            let e = cat.get(name)?;
            rep.result(&summary(&e))?;
        }
        Cmd::Subderiv { kind, name, at, dir, source } => {
            let kind: Kind = kind.parse()?;
            let e = cat.get(name)?;
            let src = source_arg(source, &e)?;
            let est = estimate(kind, &e, at, dir, &probe, src)?;
            let mut v = serde_json::to_value(&est).map_err(|x| Error::InvalidArgument(x.to_string()))?;
            if let serde_json::Value::Object(m) = &mut v {
                m.insert("kind".into(), json!(kind.as_str()));
                m.insert("entry".into(), json!(e.name));
                m.insert("x".into(), json!(at));
                m.insert("u".into(), json!(dir));
                m.insert("source".into(), json!(src));
            }
            rep.results.push(v);
        }
        Cmd::Dini { name, at } => {
            let e = cat.get(name)?;
            let phi = e.as_line()?;
            let lo = lower_right_dini(&phi, *at, &sched)?;
            let hi = upper_right_dini(&phi, *at, &sched)?;
            rep.result(&json!({"entry": e.name, "t": at, "which": "lower", "estimate": lo}))?;
            rep.result(&json!({"entry": e.name, "t": at, "which": "upper", "estimate": hi}))?;
        }
        Cmd::Hk { name, from, to, tol } => {
            let e = cat.get(name)?;
            let phi = e.as_line()?;
            let r = hk_integrate(&|t| phi.value(t), *from, *to, &phi.singular, *tol)?;
            let mut v = serde_json::to_value(&r).map_err(|x| Error::InvalidArgument(x.to_string()))?;
            if let serde_json::Value::Object(m) = &mut v {
                m.insert("entry".into(), json!(e.name));
                m.insert("from".into(), json!(from));
                m.insert("to".into(), json!(to));
            }
            rep.results.push(v);
        }
        Cmd::Roundtrip { name, mode, tol } => {
            let e = cat.get(name)?;
            let mode: DerivMode = mode.parse()?;
            let tol = tol.unwrap_or(if mode == DerivMode::Oracle { cfg.oracle_tol } else { cfg.sampling_tol });
            let phi = e.restrict(&e.default_segment)?;
            let r = roundtrip_check(&phi, 0.0, 1.0, mode, tol, &sched)?;
            rep.verdict(format!("roundtrip {}", e.name), &r.verdict);
            rep.result(&r)?;
        }
        Cmd::Reconstruct { name, segment, mode, grid, tol } => {
            let e = cat.get(name)?;
            let seg = segment_arg(&e, segment)?;
            let mode: ReconstructMode = mode.parse()?;
            let tol = tol.unwrap_or(if mode == ReconstructMode::Oracle { cfg.oracle_tol } else { cfg.sampling_tol });
            let r = reconstruct(&e, &seg, mode, *grid, tol, &probe)?;
            rep.verdict(format!("reconstruct {}", e.name), &r.verdict);
            rep.result(&r)?;
        }
        Cmd::Determine { f, g, omega, mode } => {
            let fe = cat.get(f)?;
            let ge = cat.get(g)?;
            let omega: Vec<(f64, f64)> = match omega {
                None => ge.probe_box.clone(),
                Some(v) if v.len() == 2 * ge.dim => v.chunks(2).map(|c| (c[0], c[1])).collect(),
                Some(v) => {
                    return Err(Error::InvalidArgument(format!(
                        "--omega needs {} numbers (lo hi per coordinate), got {}",
                        2 * ge.dim,
                        v.len()
                    )))
                }
            };
            let mode = if mode == "auto" {
                DeterminationMode::auto(&ge).ok_or_else(|| Error::MissingTag {
                    name: ge.name.clone(),
                    tag: "any of LscNatNat, LcNatN, LacgNatA".into(),
                })?
            } else {
                mode.parse()?
            };
            let mut rng = stream(cfg.seed, "determine");
            let r = determination_check(&fe, &ge, &omega, mode, &DeterminationProbe::default(), &probe, &mut rng)?;
            rep.verdict(format!("determine {} from {}", fe.name, ge.name), &r.verdict);
            rep.result(&r)?;
        }
        Cmd::Classify { name, source } => {
            let e = cat.get(name)?;
            let src = source_arg(source, &e)?;
            let mut rng = stream(cfg.seed, "classify");
            let r = class_check(&e, None, &probe, src, &mut rng, cfg.sampling_tol)?;
            for (k, v) in &r.classes {
                rep.verdict(format!("{} in {k}", e.name), v);
            }
            rep.result(&r)?;
        }
        Cmd::Monotone { name, from, to, case, exceptions, grid, tol } => {
            let e = cat.get(name)?;
            let case: MonotoneCase = case.parse()?;
            let phi = e.as_line()?;
            let v = monotone_test(&phi, *from, *to, case, exceptions, *grid, *tol, &sched)?;
            rep.verdict(format!("{} nonincreasing on [{from}, {to}]", e.name), &v);
            rep.result(&json!({"entry": e.name, "case": case, "from": from, "to": to, "verdict": v}))?;
        }
        Cmd::Lipschitz { name, segment, grid } => {
            let e = cat.get(name)?;
            let seg = segment_arg(&e, segment)?;
            let mut rng = stream(cfg.seed, "lipschitz");
            let r = radial_lipschitz_check(&e, &seg, *grid, 8, &mut rng)?;
            rep.verdict(format!("{} along segment", e.name), &r.verdict);
            rep.result(&r)?;
        }
        Cmd::Diagram { name, probes, slack } => {
            let e = cat.get(name)?;
            let mut rng = stream(cfg.seed, "diagram");
            let r = diagram_check(&e, *probes, &probe, &mut rng, *slack)?;
            rep.verdict(format!("diagram {}", e.name), &r.verdict);
            rep.result(&r)?;
        }
        Cmd::Suite { criterion } => {
            let mut ts = Vec::new();
            let ids: Vec<usize> =
                if criterion.is_empty() { suite::CRITERIA.iter().map(|(i, _)| *i).collect() } else { criterion.clone() };
            for id in ids {
                let t = Instant::now();
                let Some(r) = suite::run_criterion(id, &cat, &cfg)? else {
                    return Err(Error::InvalidArgument(format!("no criterion {id}")));
                };
                let secs = t.elapsed().as_secs_f64();
                let _ = writeln!(
                    err,
                    "criterion {id}: {} ({secs:.2} s)",
                    if r.passed() { "PASS" } else { "FAIL" }
                );
                ts.push(suite::Timing { id, seconds: secs });
                rep.verdict(format!("criterion {id}: {}", r.name), &r.verdict);
                rep.result(&r)?;
            }
            timings = Some(ts);
        }
    }
    if !cli.global.no_metadata {
        let mut m = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "elapsed_seconds": started.elapsed().as_secs_f64(),
        });
        if let Some(t) = timings {
            m["timings"] = json!(t);
        }
        rep.metadata = Some(m);
    }
    let code = if rep.any_falsified() { 1 } else { 0 };
    Ok((rep.render(cfg.output)?, code))
}

fn command_name(c: &Cmd) -> String {
    match c {
        Cmd::Catalog { what: CatalogCmd::List } => "catalog list".into(),
        Cmd::Catalog { what: CatalogCmd::Show { .. } } => "catalog show".into(),
        Cmd::Subderiv { .. } => "subderiv".into(),
        Cmd::Dini { .. } => "dini".into(),
        Cmd::Hk { .. } => "hk".into(),
        Cmd::Roundtrip { .. } => "roundtrip".into(),
        Cmd::Reconstruct { .. } => "reconstruct".into(),
        Cmd::Determine { .. } => "determine".into(),
        Cmd::Classify { .. } => "classify".into(),
        Cmd::Monotone { .. } => "monotone".into(),
        Cmd::Lipschitz { .. } => "lipschitz".into(),
        Cmd::Diagram { .. } => "diagram".into(),
        Cmd::Suite { .. } => "suite".into(),
    }
}

