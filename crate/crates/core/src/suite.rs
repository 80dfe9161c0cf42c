//! The acceptance suite: eight numerical criteria run in a fixed order.
//! Determinism of the whole report is checked by running it twice.

use std::time::Instant;

use serde::Serialize;

use crate::analysis::{
    determination_check, monotone_test, reconstruct, DeterminationMode, DeterminationProbe, MonotoneCase,
    ReconstructMode,
};
use crate::catalog::{Catalog, Tag};
use crate::config::RunConfig;
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::hk::{roundtrip_check, DerivMode};
use crate::rng::stream;
use crate::subderiv::{diagram_check, natural_dir, natural_full, radial, sample_domain_point, DirectionalProbe, Source};
use crate::subdiff::{class_check, upper_semismooth_check};
use crate::verdict::{Status, Verdict};

use rand::Rng;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.verdict.is_verified()
    }
}

/// Wall time per criterion, kept apart from the report body.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub id: usize,
    pub seconds: f64,
}

pub const CRITERIA: [(usize, &str); 8] = [
    (1, "strictness gap of the regularizations at -|x|"),
    (2, "regularization equals the radial subderivative for convex functions"),
    (3, "subderivative chain for locally Lipschitz functions"),
    (4, "integral roundtrip through the right derivative"),
    (5, "reconstruction along segments"),
    (6, "determination up to a constant"),
    (7, "monotonicity test"),
    (8, "class placements"),
];

struct Ctx<'a> {
    cat: &'a Catalog,
    cfg: &'a RunConfig,
    probe: DirectionalProbe,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, label: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { label: label.into(), passed, detail: detail.into() });
    }

    fn record(&mut self, label: impl Into<String>, r: Result<(bool, String)>) {
        match r {
            Ok((ok, d)) => self.push(label, ok, d),
            Err(e) => self.push(label, false, format!("error: {e}")),
        }
    }
}

/// Runs one criterion. Unknown ids give `None`.
pub fn run_criterion(id: usize, cat: &Catalog, cfg: &RunConfig) -> Result<Option<CriterionReport>> {
    let Some((_, name)) = CRITERIA.iter().find(|(i, _)| *i == id) else {
        return Ok(None);
    };
    let ctx = Ctx { cat, cfg, probe: cfg.directional_probe()? };
    let mut c = Checks::default();
    match id {
        1 => strictness(&ctx, &mut c),
        2 => convex_identity(&ctx, &mut c),
        3 => diagram(&ctx, &mut c),
        4 => roundtrip(&ctx, &mut c),
        5 => reconstruction(&ctx, &mut c),
        6 => determination(&ctx, &mut c),
        7 => monotone(&ctx, &mut c),
        _ => classification(&ctx, &mut c),
    }
    let failed = c.0.iter().filter(|k| !k.passed).count();
    let total = c.0.len();
    let verdict = if failed == 0 {
        Verdict::verified(format!("{total} checks passed"))
    } else {
        let first = c.0.iter().find(|k| !k.passed).map(|k| k.label.clone()).unwrap_or_default();
        Verdict::falsified(format!("{failed} of {total} checks failed, first: {first}"))
    };
    Ok(Some(CriterionReport { id, name, checks: c.0, verdict }))
}

/// All criteria in declaration order, with their wall times.
pub fn run_suite(cat: &Catalog, cfg: &RunConfig) -> Result<(Vec<CriterionReport>, Vec<Timing>)> {
    let mut out = Vec::new();
    let mut times = Vec::new();
    for (id, _) in CRITERIA {
        let t = Instant::now();
        out.extend(run_criterion(id, cat, cfg)?);
        times.push(Timing { id, seconds: t.elapsed().as_secs_f64() });
    }
    Ok((out, times))
}

fn close(v: ExtReal, target: f64, tol: f64) -> bool {
    v.finite().is_some_and(|x| (x - target).abs() <= tol)
}

fn strictness(ctx: &Ctx, c: &mut Checks) {
    let r: Result<Vec<_>> = (|| {
        let e = ctx.cat.get("neg_abs")?;
        let mut out = Vec::new();
        for src in [Source::Oracle, Source::FromRadial] {
            let n = natural_dir(&e, &[0.0], &[1.0], &ctx.probe, src)?;
            let nn = natural_full(&e, &[0.0], &[1.0], &ctx.probe, src)?;
            out.push((src, n, nn));
        }
        Ok(out)
    })();
    match r {
        Ok(rows) => {
            for (src, n, nn) in rows {
                c.push(
                    format!("neg_abs f♮(0; 1), {src}"),
                    n.converged && close(n.value, -1.0, 1e-3),
                    format!("value {} converged {}", n.value, n.converged),
                );
                c.push(
                    format!("neg_abs f♮♮(0; 1), {src}"),
                    nn.converged && close(nn.value, 1.0, 1e-3),
                    format!("value {} converged {}", nn.value, nn.converged),
                );
            }
        }
        Err(e) => c.push("neg_abs regularizations", false, format!("error: {e}")),
    }
}

fn convex_identity(ctx: &Ctx, c: &mut Checks) {
    for name in ["abs", "neg_sqrt_01", "max_affine_2d"] {
        let r = (|| {
            let e = ctx.cat.get(name)?;
            let mut rng = stream(ctx.cfg.seed, &format!("suite/convex/{name}"));
            let (mut worst_o, mut worst_s) = (0.0f64, 0.0f64);
            let mut bad = Vec::new();
            for _ in 0..100 {
                let x = sample_domain_point(&e, &mut rng)?;
                let u: Vec<f64> = (0..e.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let fr = e.deriv_oracle(&x, &u).unwrap_or(f64::NAN);
                let no = natural_full(&e, &x, &u, &ctx.probe, Source::Oracle)?;
                let d_o = (no.v() - fr).abs();
                let ns = natural_full(&e, &x, &u, &ctx.probe, Source::FromRadial)?;
                let rs = radial(&e, &x, &u, &ctx.probe)?;
                let d_s = (ns.v() - rs.v()).abs();
                worst_o = worst_o.max(if d_o.is_nan() { f64::INFINITY } else { d_o });
                worst_s = worst_s.max(if d_s.is_nan() { f64::INFINITY } else { d_s });
                if bad.len() < 3 && (!(d_o <= ctx.cfg.oracle_tol) || !(d_s <= ctx.cfg.sampling_tol)) {
                    bad.push(format!("x {x:?} u {u:?}: oracle {d_o:e}, sampling {d_s:e}"));
                }
            }
            let ok = worst_o <= ctx.cfg.oracle_tol && worst_s <= ctx.cfg.sampling_tol;
            let mut d = format!("max deviation oracle {worst_o:e}, sampling {worst_s:e}");
            if !bad.is_empty() {
                d.push_str(&format!("; {}", bad.join("; ")));
            }
            Ok((ok, d))
        })();
        c.record(format!("{name}: 100 probes"), r);
    }
}

fn diagram(ctx: &Ctx, c: &mut Checks) {
    for e in ctx.cat.iter().filter(|e| e.has_tag(Tag::LocallyLipschitz)) {
        let mut rng = stream(ctx.cfg.seed, &format!("suite/diagram/{}", e.name));
        let r = diagram_check(e, 50, &ctx.probe, &mut rng, 1e-3).map(|d| (d.verdict.is_verified(), d.verdict.evidence));
        c.record(format!("{}: 50 probes", e.name), r);
    }
}

fn roundtrip(ctx: &Ctx, c: &mut Checks) {
    let s = &ctx.probe.schedule;
    for (name, tol, end) in [
        ("t2_sin_inv_t2", ctx.cfg.oracle_tol, Some(1f64.sin())),
        ("neg_sqrt_01", ctx.cfg.oracle_tol, Some(-1.0)),
        ("x_sin_inv", ctx.cfg.sampling_tol, None),
    ] {
        let r = (|| {
            let e = ctx.cat.get(name)?;
            let phi = e.restrict(&e.default_segment)?;
            let rep = roundtrip_check(&phi, 0.0, 1.0, DerivMode::Oracle, tol, s)?;
            let end_ok = end.is_none_or(|v| (rep.integral - v).abs() <= tol);
            Ok((
                rep.verdict.is_verified() && end_ok,
                format!("integral {} max deviation {:e}; {}", rep.integral, rep.max_deviation, rep.verdict.evidence),
            ))
        })();
        c.record(format!("{name} on [0, 1] at {tol:e}"), r);
    }
}

fn reconstruction(ctx: &Ctx, c: &mut Checks) {
    for name in ["abs", "neg_sqrt_01", "x_sin_inv"] {
        for (mode, tol) in [
            (ReconstructMode::Oracle, ctx.cfg.oracle_tol),
            (ReconstructMode::FromSubdiff, ctx.cfg.sampling_tol),
        ] {
            let r = (|| {
                let e = ctx.cat.get(name)?;
                let rep = reconstruct(&e, &e.default_segment, mode, 101, tol, &ctx.probe)?;
                Ok((rep.verdict.is_verified(), format!("max deviation {:e}; {}", rep.max_deviation, rep.verdict.evidence)))
            })();
            c.record(format!("{name} {mode:?} at {tol:e}"), r);
        }
    }
}

fn determination(ctx: &Ctx, c: &mut Checks) {
    let dp = DeterminationProbe::default();
    for g in ctx.cat.iter().filter(|e| e.subdiff_oracle().is_some()) {
        let Some(mode) = DeterminationMode::auto(g) else {
            continue;
        };
        for shift in [-3.0, 0.0, 5.0] {
            let r = (|| {
                let f = g.shifted(format!("{}{shift:+}", g.name), shift);
                let mut rng = stream(ctx.cfg.seed, &format!("suite/determine/{}/{shift}", g.name));
                let rep = determination_check(&f, g, &g.probe_box, mode, &dp, &ctx.probe, &mut rng)?;
                let ok = rep.verdict.is_verified() && (rep.offset - shift).abs() <= 1e-9;
                Ok((ok, format!("offset {} ({mode:?}); {}", rep.offset, rep.verdict.evidence)))
            })();
            c.record(format!("{} + {shift}", g.name), r);
        }
    }
    let r = (|| {
        let f = ctx.cat.get("abs_plus_half_x")?;
        let g = ctx.cat.get("abs")?;
        let mut rng = stream(ctx.cfg.seed, "suite/determine/abs_plus_half_x");
        let rep = determination_check(&f, &g, &[(-1.0, 1.0)], DeterminationMode::Lsc, &dp, &ctx.probe, &mut rng)?;
        let n = rep.inclusion_violations.len();
        Ok((n > 0, format!("{n} inclusion violations; {}", rep.verdict.evidence)))
    })();
    c.record("abs_plus_half_x against abs", r);
}

fn monotone(ctx: &Ctx, c: &mut Checks) {
    let s = &ctx.probe.schedule;
    let cases = [
        ("neg_sqrt_01", MonotoneCase::LscEverywhere, Status::Verified),
        ("neg_identity", MonotoneCase::AcgAlmost, Status::Verified),
        ("identity", MonotoneCase::LscEverywhere, Status::Inconclusive),
    ];
    for (name, case, want) in cases {
        let r = (|| {
            let e = ctx.cat.get(name)?;
            let phi = e.as_line()?;
            let v = monotone_test(&phi, 0.0, 1.0, case, &[], 101, 1e-9, s)?;
            let ok = v.status == want && (want != Status::Inconclusive || v.evidence.starts_with("premise fails"));
            Ok((ok, format!("{:?}: {}", v.status, v.evidence)))
        })();
        c.record(format!("{name} {case:?}, expect {want:?}"), r);
    }
}

fn classification(ctx: &Ctx, c: &mut Checks) {
    let tol = ctx.cfg.sampling_tol;
    let expect = [
        ("neg_abs", Tag::LscNatNat, Status::Falsified),
        ("neg_abs", Tag::LcNatN, Status::Verified),
        ("abs", Tag::LscNatNat, Status::Verified),
        ("x_sin_inv", Tag::LcNatN, Status::Verified),
    ];
    let mut reports = std::collections::BTreeMap::new();
    for (name, tag, want) in expect {
        let r = (|| {
            let e = ctx.cat.get(name)?;
            if !reports.contains_key(name) {
                let mut rng = stream(ctx.cfg.seed, &format!("suite/classify/{name}"));
                reports.insert(name, class_check(&e, None, &ctx.probe, Source::auto(&e), &mut rng, tol)?);
            }
            let v = reports[name].get(tag).cloned().unwrap_or_else(|| Verdict::inconclusive("not checked"));
            let mut ok = v.status == want;
            let mut d = format!("{:?}: {}", v.status, v.evidence);
            if name == "x_sin_inv" {
                let exc_ok = e.exception_set == vec![vec![0.0]];
                ok &= exc_ok;
                d.push_str(&format!("; exceptions {:?}", e.exception_set));
            }
            Ok((ok, d))
        })();
        c.record(format!("{name} {tag}, expect {want:?}"), r);
    }
    let r = (|| {
        let e = ctx.cat.get("x_sin_inv")?;
        let v = upper_semismooth_check(&e, &[0.0], &[1.0], &ctx.probe, Source::auto(&e), tol)?;
        Ok((v.is_falsified(), format!("{:?}: {}", v.status, v.evidence)))
    })();
    c.record("x_sin_inv upper semismooth at (0, 1), expect Falsified", r);
}
