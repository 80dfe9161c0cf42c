//! Checkers built on the estimators: the subderivative monotonicity test,
//! subdifferential determination, radial Lipschitz continuity and
//! reconstruction of a function from its regularized subderivative.
//!
//! Every checker works at a finite resolution, so "verified" means no
//! counterexample at the probed points.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogEntry, LineFunction, Segment, Tag};
use crate::dini::{lower_right_dini, upper_right_dini, SamplingSchedule};
use crate::error::{point_string, Error, Result};
use crate::extreal::{ser_f64, ExtReal};
use crate::hk::indefinite;
use crate::subderiv::{self, natural_dir, DirectionalProbe, Source};
use crate::subdiff::OracleKind;
use crate::verdict::Verdict;

fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

fn near_any(t: f64, pts: &[f64]) -> bool {
    pts.iter().any(|p| (t - p).abs() <= 1e-12 * (1.0 + p.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneCase {
    /// `D_+ phi <= 0` everywhere, `phi` lsc.
    LscEverywhere,
    /// `D^+ phi <= 0` off the exceptions, `phi` continuous.
    ContinuousNearly,
    /// `D_+ phi <= 0` off the exceptions, `phi` ACG.
    AcgAlmost,
}

impl MonotoneCase {
    fn tag(self) -> Tag {
        match self {
            MonotoneCase::LscEverywhere => Tag::Lsc,
            MonotoneCase::ContinuousNearly => Tag::ContinuousOnDomain,
            MonotoneCase::AcgAlmost => Tag::AcgStarSegments,
        }
    }
}

impl FromStr for MonotoneCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "lsc_everywhere" => Ok(MonotoneCase::LscEverywhere),
            "2" | "continuous_nearly" => Ok(MonotoneCase::ContinuousNearly),
            "3" | "acg_almost" => Ok(MonotoneCase::AcgAlmost),
            o => Err(Error::InvalidArgument(format!("unknown monotonicity case {o:?}"))),
        }
    }
}

/// If the case's Dini condition holds on the grid, `phi` must be
/// nonincreasing on the grid.
pub fn monotone_test(
    phi: &LineFunction,
    a: f64,
    b: f64,
    case: MonotoneCase,
    exceptions: &[f64],
    grid: usize,
    tol: f64,
    sched: &SamplingSchedule,
) -> Result<Verdict> {
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    if !phi.has_tag(case.tag()) {
        return Err(Error::MissingTag { name: phi.name.clone(), tag: case.tag().to_string() });
    }
    let xs = uniform_grid(a, b, grid);
    for t in &xs[..grid - 1] {
        if case != MonotoneCase::LscEverywhere && near_any(*t, exceptions) {
            continue;
        }
        let d = match case {
            MonotoneCase::ContinuousNearly => upper_right_dini(phi, *t, sched)?,
            _ => lower_right_dini(phi, *t, sched)?,
        };
        if !subderiv::le_slack(d.value, ExtReal::ZERO, tol) {
            let which = if case == MonotoneCase::ContinuousNearly { "D^+" } else { "D_+" };
            return Ok(Verdict::inconclusive(format!(
                "premise fails: {which} phi({t}) = {} > 0; the test does not apply",
                d.value
            )));
        }
    }
    let mut best = f64::INFINITY;
    for (j, x) in xs.iter().enumerate() {
        let v = phi.value(*x);
        if v.is_nan() {
            return Err(Error::Evaluation { what: "NaN".into(), at: format!("{x}") });
        }
        if j > 0 && v > best + tol {
            return Ok(Verdict::falsified(format!(
                "premise holds on {grid} points but phi({x}) = {v} exceeds an earlier value {best}"
            )));
        }
        best = best.min(v);
    }
    Ok(Verdict::verified(format!("premise holds and phi is nonincreasing on {grid} grid points")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeterminationMode {
    Lsc,
    Continuous,
    Acg,
    ContinuousDense,
}

impl DeterminationMode {
    fn required(self) -> &'static [Tag] {
        match self {
            DeterminationMode::Lsc => &[Tag::LscNatNat],
            DeterminationMode::Continuous => &[Tag::LcNatN],
            DeterminationMode::Acg => &[Tag::LacgNatA],
            DeterminationMode::ContinuousDense => &[Tag::LacgNatA, Tag::ContinuousOnDomain],
        }
    }

    /// The strongest mode whose class tag `g` carries.
    pub fn auto(g: &CatalogEntry) -> Option<Self> {
        [DeterminationMode::Lsc, DeterminationMode::Continuous, DeterminationMode::Acg]
            .into_iter()
            .find(|m| m.required().iter().all(|t| g.has_tag(*t)))
    }
}

impl FromStr for DeterminationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsc" => Ok(DeterminationMode::Lsc),
            "continuous" => Ok(DeterminationMode::Continuous),
            "acg" => Ok(DeterminationMode::Acg),
            "continuous_dense" => Ok(DeterminationMode::ContinuousDense),
            o => Err(Error::InvalidArgument(format!("unknown determination mode {o:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeterminationProbe {
    /// Uniform interior points per coordinate.
    pub grid: usize,
    pub random_points: usize,
    /// Random unit directions added to the `2 dim` axis directions.
    pub fan_random: usize,
    pub segments: usize,
    pub segment_grid: usize,
    /// Allowed excess in support dominance.
    pub slack: f64,
    /// Relative slack for sampled radial comparisons.
    pub radial_slack: f64,
    /// Bound on `max |f - g - c|`.
    pub tol: f64,
}

impl Default for DeterminationProbe {
    fn default() -> Self {
        DeterminationProbe {
            grid: 21,
            random_points: 20,
            fan_random: 16,
            segments: 8,
            segment_grid: 21,
            slack: 1e-6,
            radial_slack: 1e-3,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub f: ExtReal,
    pub g: ExtReal,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeterminationReport {
    pub f: String,
    pub g: String,
    pub mode: DeterminationMode,
    pub probes: usize,
    pub segments_checked: usize,
    /// Points where `f^∂(x; u) > g^∂(x; u)`.
    pub inclusion_violations: Vec<Violation>,
    /// Segment points where the radial inequality fails.
    pub radial_violations: Vec<Violation>,
    pub offset: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_deviation: f64,
    pub verdict: Verdict,
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

fn lex(a: &Violation, b: &Violation) -> std::cmp::Ordering {
    let key = |v: &Violation| v.x.iter().chain(&v.u).copied().collect::<Vec<f64>>();
    let (ka, kb) = (key(a), key(b));
    ka.iter().zip(&kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

fn probe_points(f: &CatalogEntry, omega: &[(f64, f64)], p: &DeterminationProbe, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let d = f.dim;
    let n = p.grid.max(1);
    let mut pts = Vec::new();
    // interior grid, capped so the count stays small in higher dimension
    let per = if d == 1 { n } else { ((n as f64).powf(1.0 / d as f64).ceil() as usize).max(2) };
    let total = per.pow(d as u32);
    for idx in 0..total {
        let mut k = idx;
        let x: Vec<f64> = (0..d)
            .map(|i| {
                let j = k % per;
                k /= per;
                let (lo, hi) = omega[i];
                lo + (hi - lo) * (j + 1) as f64 / (per + 1) as f64
            })
            .collect();
        pts.push(x);
    }
    let mut tries = 0;
    let mut added = 0;
    while added < p.random_points && tries < 100 * p.random_points.max(1) {
        tries += 1;
        let x: Vec<f64> = omega.iter().map(|(lo, hi)| if lo == hi { *lo } else { rng.gen_range(*lo..*hi) }).collect();
        if f.in_domain(&x) {
            pts.push(x);
            added += 1;
        }
    }
    pts.retain(|x| f.in_domain(x));
    pts
}

/// Checks `∂f ⊂ ∂g` on `omega` by support dominance, then the radial
/// inequality along segments, then estimates `c` with `f ≈ g + c`.
pub fn determination_check(
    f: &CatalogEntry,
    g: &CatalogEntry,
    omega: &[(f64, f64)],
    mode: DeterminationMode,
    p: &DeterminationProbe,
    dp: &DirectionalProbe,
    rng: &mut impl Rng,
) -> Result<DeterminationReport> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: f.dim });
    }
    if omega.len() != f.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: omega.len() });
    }
    for t in mode.required() {
        if !g.has_tag(*t) {
            return Err(Error::MissingTag { name: g.name.clone(), tag: t.to_string() });
        }
    }
    let of = f.require_subdiff()?;
    let og = g.require_subdiff()?;
    let pts = probe_points(f, omega, p, rng);
    if pts.is_empty() {
        return Err(Error::InvalidArgument(format!("Ω ∩ dom {} is empty", f.name)));
    }
    let d = f.dim;
    let mut fan: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut u = vec![0.0; d];
            u[i] = s;
            fan.push(u);
        }
    }
    for _ in 0..p.fan_random {
        fan.push(unit((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()));
    }

    // stage 1: support dominance, plus set inclusion for closed forms
    let mut inclusion = Vec::new();
    let both_closed = of.kind == OracleKind::ClosedForm && og.kind == OracleKind::ClosedForm;
    for x in &pts {
        for u in &fan {
            let sf = ExtReal::from(of.support(x, u));
            let sg = ExtReal::from(og.support(x, u));
            if of.support(x, u).is_nan() || og.support(x, u).is_nan() {
                return Err(Error::Evaluation { what: "an undefined support value".into(), at: point_string(x) });
            }
            if !subderiv::le_slack(sf, sg, p.slack) {
                inclusion.push(Violation { x: x.clone(), u: u.clone(), f: sf, g: sg });
            }
        }
        if both_closed {
            for xs in of.sample(x, 16) {
                if og.member(x, &xs) == crate::verdict::Status::Falsified {
                    // report the fan direction that separates xs from ∂g(x) best
                    let gap = |u: &Vec<f64>| crate::catalog::dot(&xs, u) - og.support(x, u);
                    let u = fan.iter().max_by(|a, b| gap(a).total_cmp(&gap(b))).cloned().unwrap_or_else(|| unit(xs.clone()));
                    let sf = ExtReal::from(of.support(x, &u));
                    let sg = ExtReal::from(og.support(x, &u));
                    inclusion.push(Violation { x: x.clone(), u, f: sf, g: sg });
                }
            }
        }
    }
    inclusion.sort_by(lex);
    inclusion.dedup_by(|a, b| lex(a, b).is_eq());

    // stage 2: radial inequality along segments between probe points
    let oracle = f.has_deriv_oracle() && g.has_deriv_oracle();
    let upper = mode != DeterminationMode::Lsc;
    let mut segments: Vec<Segment> = Vec::new();
    let n = pts.len();
    for k in 0..p.segments.min(n.saturating_sub(1)) {
        let i = (k * 7919) % n;
        let mut j = (i + 1 + k * 104_729) % n;
        if j == i {
            j = (i + 1) % n;
        }
        let u: Vec<f64> = pts[j].iter().zip(&pts[i]).map(|(a, b)| a - b).collect();
        if u.iter().any(|v| *v != 0.0) {
            segments.push(Segment::new(pts[i].clone(), u));
        }
    }
    if mode == DeterminationMode::ContinuousDense {
        let base_count = segments.len();
        for s in 0..base_count {
            for k in 1..=6 {
                let r = 0.5f64.powi(k);
                let db: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0) * r).collect();
                let du: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0) * r).collect();
                let seg = &segments[s];
                let base: Vec<f64> = seg.base.iter().zip(&db).map(|(a, b)| a + b * 0.1).collect();
                let dir: Vec<f64> = seg.dir.iter().zip(&du).map(|(a, b)| a + b * 0.1).collect();
                if dir.iter().any(|v| *v != 0.0) {
                    segments.push(Segment::new(base, dir));
                }
            }
        }
    }
    let mut radial_v = Vec::new();
    let ts: Vec<f64> = (1..=p.segment_grid).map(|i| i as f64 / (p.segment_grid + 1) as f64).collect();
    let fa = Arc::new(f.clone());
    let ga = Arc::new(g.clone());
    for seg in &segments {
        let lf = fa.restrict(seg)?;
        let lg = ga.restrict(seg)?;
        for t in &ts {
            let skip = near_any(*t, &lf.exceptions) || near_any(*t, &lg.exceptions);
            let x = seg.point(*t);
            if skip || !f.in_domain(&x) || !g.in_domain(&x) {
                continue;
            }
            let u = &seg.dir;
            let (vf, vg, slack) = if oracle {
                let a = f.deriv_oracle(&x, u).unwrap_or(f64::NAN);
                let b = g.deriv_oracle(&x, u).unwrap_or(f64::NAN);
                (ExtReal::from(a), ExtReal::from(b), p.slack)
            } else {
                let a = if upper { subderiv::upper_radial(f, &x, u, dp)? } else { subderiv::radial(f, &x, u, dp)? };
                let b = subderiv::radial(g, &x, u, dp)?;
                let scale = b.v().abs().max(1.0);
                (a.value, b.value, p.radial_slack * scale)
            };
            if !subderiv::le_slack(vf, vg, slack) {
                radial_v.push(Violation { x, u: u.clone(), f: vf, g: vg });
            }
        }
    }
    radial_v.sort_by(lex);

    // stage 3: offset and deviation
    let mut diffs: Vec<f64> = pts
        .iter()
        .map(|x| f.value(x) - g.value(x))
        .filter(|v| v.is_finite())
        .collect();
    if diffs.is_empty() {
        return Err(Error::InvalidArgument(format!("{} is infinite on every probe of dom {}", g.name, f.name)));
    }
    diffs.sort_by(f64::total_cmp);
    let m = diffs.len();
    let offset = if m % 2 == 1 { diffs[m / 2] } else { 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]) };
    let mut max_dev = 0.0f64;
    for x in &pts {
        let dv = (f.value(x) - g.value(x) - offset).abs();
        max_dev = max_dev.max(if dv.is_nan() { f64::INFINITY } else { dv });
    }
    let tol = p.tol * offset.abs().max(1.0);

    let verdict = if let Some(v) = inclusion.first() {
        Verdict::inconclusive(format!(
            "inclusion fails at {} points; first at x = {}, u = {}: f^∂ = {} > g^∂ = {}",
            inclusion.len(),
            point_string(&v.x),
            point_string(&v.u),
            v.f,
            v.g
        ))
    } else if let Some(v) = radial_v.first() {
        Verdict::falsified(format!(
            "inclusion holds but the radial inequality fails at {} points; first at x = {}: {} > {}",
            radial_v.len(),
            point_string(&v.x),
            v.f,
            v.g
        ))
    } else if max_dev <= tol {
        Verdict::verified(format!("f = g + {offset} within {max_dev:e} on {} probes", pts.len()))
    } else {
        Verdict::falsified(format!("inclusion holds but max |f - g - c| = {max_dev:e} with c = {offset}"))
    };
    Ok(DeterminationReport {
        f: f.name.clone(),
        g: g.name.clone(),
        mode,
        probes: pts.len(),
        segments_checked: segments.len(),
        inclusion_violations: inclusion,
        radial_violations: radial_v,
        offset,
        max_deviation: max_dev,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub entry: String,
    /// Largest local slope found at interior grid points.
    pub interior_constant: f64,
    /// `|phi(h) - phi(endpoint)|` at the finest radius, start then end.
    pub endpoint_gaps: [f64; 2],
    /// Largest forward slope found next to the start point.
    pub start_slope: f64,
    pub verdict: Verdict,
}

const LIP_LEVELS: usize = 20;
const PAIR_RATIO: f64 = 1e-6;

/// Local slope bound of `phi` near `t` over radius `r`.
fn local_slope(phi: &LineFunction, t: f64, r: f64, m: usize, rng: &mut impl Rng) -> f64 {
    let mut best = 0.0f64;
    for _ in 0..m {
        let s = (t + rng.gen_range(-r..r)).clamp(0.0, 1.0);
        let h = r * 1e-3;
        let s2 = if s + h <= 1.0 { s + h } else { s - h };
        let q = ((phi.value(s2) - phi.value(s)) / (s2 - s)).abs();
        best = best.max(if q.is_nan() { f64::INFINITY } else { q });
    }
    best
}

/// Restrictions of `Lsc♮♮` entries are continuous at the segment ends and
/// locally Lipschitz inside. Next to the start point the forward slopes must
/// also stay bounded above, since `g♮♮(x̄; u) < +inf`.
pub fn radial_lipschitz_check(
    g: &Arc<CatalogEntry>,
    seg: &Segment,
    grid: usize,
    budget: usize,
    rng: &mut impl Rng,
) -> Result<LipschitzReport> {
    if !g.has_tag(Tag::LscNatNat) {
        return Err(Error::MissingTag { name: g.name.clone(), tag: Tag::LscNatNat.to_string() });
    }
    if grid < 3 {
        return Err(Error::InvalidArgument("grid needs at least 3 points".into()));
    }
    let phi = g.restrict(seg)?;
    let xs = uniform_grid(0.0, 1.0, grid);
    for t in &xs {
        if !phi.value(*t).is_finite() {
            return Err(Error::InvalidArgument(format!(
                "segment leaves dom {} at t = {t}",
                g.name
            )));
        }
    }
    let m = budget.max(4);
    let h0 = 1.0 / (grid - 1) as f64;
    let mut interior = 0.0f64;
    for t in &xs[1..grid - 1] {
        let mut ls = Vec::with_capacity(LIP_LEVELS);
        for k in 0..LIP_LEVELS {
            let r = 0.5 * h0 * 0.5f64.powi(k as i32);
            ls.push(local_slope(&phi, *t, r, m, rng));
        }
        let (first, last) = (ls[0], ls[LIP_LEVELS - 1]);
        if !last.is_finite() || last > 10.0 * first.max(1.0) {
            return Ok(LipschitzReport {
                entry: g.name.clone(),
                interior_constant: last,
                endpoint_gaps: [f64::NAN, f64::NAN],
                start_slope: f64::NAN,
                verdict: Verdict::falsified(format!("local slopes diverge at t = {t}: {first} grows to {last}")),
            });
        }
        interior = interior.max(last);
    }
    // endpoints: value convergence, and bounded forward slopes at the start
    let (p0, p1) = (phi.value(0.0), phi.value(1.0));
    let mut gaps = [0.0f64; 2];
    let mut slopes = Vec::with_capacity(LIP_LEVELS);
    for k in 0..LIP_LEVELS {
        let h = h0 * 0.5f64.powi(k as i32);
        let (mut g0, mut g1, mut sl) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
        for _ in 0..m {
            let s = rng.gen_range(0.5 * h..h);
            g0 = g0.max((phi.value(s) - p0).abs());
            g1 = g1.max((phi.value(1.0 - s) - p1).abs());
            let s2 = s * (1.0 + PAIR_RATIO);
            sl = sl.max((phi.value(s2) - phi.value(s)) / (s2 - s));
        }
        gaps = [g0, g1];
        slopes.push(sl);
    }
    let first = slopes[0];
    let last = slopes[LIP_LEVELS / 2..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let report = |verdict| LipschitzReport {
        entry: g.name.clone(),
        interior_constant: interior,
        endpoint_gaps: gaps,
        start_slope: last,
        verdict,
    };
    let cont_tol = 1e-3;
    if gaps.iter().any(|v| !(*v <= cont_tol)) {
        return Ok(report(Verdict::falsified(format!(
            "not continuous at the segment ends: gaps {:e}, {:e}",
            gaps[0], gaps[1]
        ))));
    }
    if last > 100.0 * first.abs().max(1.0) {
        return Ok(report(Verdict::falsified(format!(
            "forward slopes next to the start grow without bound: {first} to {last}"
        ))));
    }
    Ok(report(Verdict::verified(format!(
        "local Lipschitz constant {interior} inside; continuous at both ends (gaps {:e}, {:e})",
        gaps[0], gaps[1]
    ))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructMode {
    /// Closed-form right derivative of the restriction.
    Oracle,
    /// `g♮` with the subdifferential oracle's support function inside.
    FromSubdiff,
    /// `g♮` with sampled radial quotients inside.
    FromRadial,
}

impl FromStr for ReconstructMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(ReconstructMode::Oracle),
            "from_subdiff" | "subdiff" => Ok(ReconstructMode::FromSubdiff),
            "from_radial" | "radial" => Ok(ReconstructMode::FromRadial),
            o => Err(Error::InvalidArgument(format!("unknown reconstruction mode {o:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructReport {
    pub entry: String,
    pub mode: ReconstructMode,
    pub points: Vec<f64>,
    /// `r(s) ≈ g(x̄ + s u) - g(x̄)`.
    pub values: Vec<f64>,
    pub truth: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub max_deviation: f64,
    pub converged: bool,
    pub verdict: Verdict,
}

/// Rebuilds `s -> g(x̄ + s u) - g(x̄)` as `∫_0^s g♮(x_t; u) dt`.
pub fn reconstruct(
    g: &Arc<CatalogEntry>,
    seg: &Segment,
    mode: ReconstructMode,
    grid: usize,
    tol: f64,
    probe: &DirectionalProbe,
) -> Result<ReconstructReport> {
    if !g.has_tag(Tag::LacgStarNatA) {
        return Err(Error::MissingTag { name: g.name.clone(), tag: Tag::LacgStarNatA.to_string() });
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    match mode {
        ReconstructMode::Oracle => g.require_deriv()?,
        ReconstructMode::FromSubdiff => {
            g.require_subdiff()?;
        }
        ReconstructMode::FromRadial => {}
    }
    let line = g.restrict(seg)?;
    let p = DirectionalProbe { alpha_check: false, ..probe.clone() };
    let err: std::sync::Mutex<Option<Error>> = std::sync::Mutex::new(None);
    let integrand = |t: f64| -> f64 {
        let x = seg.point(t);
        let v = match mode {
            ReconstructMode::Oracle => Ok(g.deriv_oracle(&x, &seg.dir).unwrap_or(f64::NAN)),
            ReconstructMode::FromSubdiff => natural_dir(g, &x, &seg.dir, &p, Source::FromSubdiff).map(|e| e.v()),
            ReconstructMode::FromRadial => natural_dir(g, &x, &seg.dir, &p, Source::FromRadial).map(|e| e.v()),
        };
        match v {
            Ok(v) => v,
            Err(e) => {
                err.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let pts = uniform_grid(0.0, 1.0, grid);
    let ind = indefinite(&integrand, 0.0, &pts, &line.singular, tol / 4.0);
    if let Some(e) = err.lock().unwrap().take() {
        return Err(e);
    }
    let ind = ind?;
    let g0 = line.value(0.0);
    let truth: Vec<f64> = pts.iter().map(|t| line.value(*t) - g0).collect();
    let mut worst = 0.0f64;
    let mut at = 0.0;
    for ((t, r), v) in pts.iter().zip(&ind.values).zip(&truth) {
        let dv = (r - v).abs();
        if dv.is_nan() || dv > worst {
            worst = if dv.is_nan() { f64::INFINITY } else { dv };
            at = *t;
        }
    }
    let ev = format!("max deviation {worst:e} at s = {at} over {grid} points (tolerance {tol:e})");
    let verdict = if worst <= tol {
        Verdict::verified(ev)
    } else if ind.converged {
        Verdict::falsified(ev)
    } else {
        Verdict::inconclusive(format!("{ev}; integration did not converge"))
    };
    Ok(ReconstructReport {
        entry: g.name.clone(),
        mode,
        points: pts,
        values: ind.values,
        truth,
        max_deviation: worst,
        converged: ind.converged,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::rng::stream;

    fn sched() -> SamplingSchedule {
        SamplingSchedule::default()
    }

    #[test]
    fn monotone_cases() {
        let neg_sqrt = LineFunction::new("-sqrt", |t: f64| -t.sqrt()).on(0.0, 1.0).tagged(&[Tag::Lsc]);
        let v = monotone_test(&neg_sqrt, 0.0, 1.0, MonotoneCase::LscEverywhere, &[], 101, 1e-9, &sched()).unwrap();
        assert!(v.is_verified(), "{v:?}");
        let neg = LineFunction::new("-t", |t| -t).tagged(&[Tag::AcgStarSegments]);
        let v = monotone_test(&neg, 0.0, 1.0, MonotoneCase::AcgAlmost, &[], 101, 1e-9, &sched()).unwrap();
        assert!(v.is_verified(), "{v:?}");
        let id = LineFunction::new("t", |t| t).tagged(&[Tag::Lsc]);
        let v = monotone_test(&id, 0.0, 1.0, MonotoneCase::LscEverywhere, &[], 101, 1e-9, &sched()).unwrap();
        assert!(v.is_inconclusive(), "{v:?}");
        assert!(monotone_test(&id, 0.0, 1.0, MonotoneCase::LscEverywhere, &[], 1, 1e-9, &sched()).is_err());
    }

    #[test]
    fn determination_examples() {
        let c = Catalog::builtin();
        let abs = c.get("abs").unwrap();
        let mut rng = stream(42, "test");
        let dp = DirectionalProbe::default();
        let p = DeterminationProbe::default();
        let f = c.get("abs_plus5").unwrap();
        let r = determination_check(&f, &abs, &[(-1.0, 1.0)], DeterminationMode::Lsc, &p, &dp, &mut rng).unwrap();
        assert!(r.verdict.is_verified(), "{r:?}");
        assert!((r.offset - 5.0).abs() <= 1e-9);
        let f = c.get("abs_plus_half_x").unwrap();
        let r = determination_check(&f, &abs, &[(-1.0, 1.0)], DeterminationMode::Lsc, &p, &dp, &mut rng).unwrap();
        assert!(!r.inclusion_violations.is_empty());
        assert!(r
            .inclusion_violations
            .iter()
            .any(|v| v.x[0] > 0.0 && v.u[0] > 0.0 && v.f == ExtReal::Finite(1.5) && v.g == ExtReal::Finite(1.0)));
    }

    #[test]
    fn radial_lipschitz_examples() {
        let c = Catalog::builtin();
        let mut rng = stream(42, "test");
        let g = c.get("neg_sqrt_01").unwrap();
        let r = radial_lipschitz_check(&g, &Segment::new(vec![0.0], vec![1.0]), 21, 32, &mut rng).unwrap();
        assert!(r.verdict.is_verified(), "{r:?}");
        let g = c.get("abs").unwrap();
        let r = radial_lipschitz_check(&g, &Segment::new(vec![-1.0], vec![2.0]), 21, 32, &mut rng).unwrap();
        assert!(r.verdict.is_verified(), "{r:?}");
        assert!((r.interior_constant - 2.0).abs() < 1e-3, "{r:?}");
        let mut wrong = (*c.get("x_sin_inv").unwrap()).clone();
        wrong.tags.insert(Tag::LscNatNat);
        let r = radial_lipschitz_check(&Arc::new(wrong), &Segment::new(vec![0.0], vec![1.0]), 21, 32, &mut rng).unwrap();
        assert!(r.verdict.is_falsified(), "{r:?}");
    }

    #[test]
    fn reconstruct_abs_from_oracle() {
        let c = Catalog::builtin();
        let g = c.get("abs").unwrap();
        let seg = Segment::new(vec![-1.0], vec![2.0]);
        let r = reconstruct(&g, &seg, ReconstructMode::Oracle, 101, 1e-9, &DirectionalProbe::default()).unwrap();
        assert!(r.verdict.is_verified(), "{:?}", r.verdict);
        assert!((r.values[100]).abs() < 1e-9);
    }
}
