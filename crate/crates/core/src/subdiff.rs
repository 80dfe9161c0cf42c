//! Subdifferential oracles, membership tests and semismoothness checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::{dot, CatalogEntry, EvalFn, Segment, Tag};
use crate::dini::SamplingSchedule;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::limits::Side;
use crate::subderiv::{natural_dir, natural_full, radial, ray_limit, DirectionalProbe, Source};
use crate::verdict::{Status, Verdict};

/// A closed convex set of subgradients.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgradientSet {
    Empty,
    /// One-dimensional interval; either end may be infinite.
    Interval { lo: f64, hi: f64 },
    /// Convex hull of finitely many points.
    Hull(Vec<Vec<f64>>),
}

impl SubgradientSet {
    pub fn is_empty(&self) -> bool {
        match self {
            SubgradientSet::Empty => true,
            SubgradientSet::Hull(v) => v.is_empty(),
            SubgradientSet::Interval { lo, hi } => lo > hi,
        }
    }

    /// `sup { <x*, u> : x* in S }`, `-inf` for the empty set.
    pub fn support(&self, u: &[f64]) -> f64 {
        if self.is_empty() {
            return f64::NEG_INFINITY;
        }
        match self {
            SubgradientSet::Empty => f64::NEG_INFINITY,
            SubgradientSet::Interval { lo, hi } => {
                let u = u[0];
                if u > 0.0 {
                    hi * u
                } else if u < 0.0 {
                    lo * u
                } else {
                    0.0
                }
            }
            SubgradientSet::Hull(pts) => pts.iter().map(|g| dot(g, u)).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, xs: &[f64], tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        match self {
            SubgradientSet::Empty => false,
            SubgradientSet::Interval { lo, hi } => xs[0] >= lo - tol && xs[0] <= hi + tol,
            SubgradientSet::Hull(pts) => hull_contains(pts, xs, tol),
        }
    }

    pub fn translated(&self, c: &[f64]) -> SubgradientSet {
        match self {
            SubgradientSet::Empty => SubgradientSet::Empty,
            SubgradientSet::Interval { lo, hi } => SubgradientSet::Interval { lo: lo + c[0], hi: hi + c[0] },
            SubgradientSet::Hull(pts) => {
                SubgradientSet::Hull(pts.iter().map(|g| g.iter().zip(c).map(|(a, b)| a + b).collect()).collect())
            }
        }
    }

    /// Up to `budget` members: extreme points first, then interior points.
    pub fn sample(&self, budget: usize) -> Vec<Vec<f64>> {
        match self {
            SubgradientSet::Empty => Vec::new(),
            SubgradientSet::Interval { lo, hi } => {
                let (a, b) = (finite_or(*lo, hi - 1e3), finite_or(*hi, lo + 1e3));
                let (a, b) = (a.min(b), a.max(b));
                let n = budget.max(1);
                if n == 1 || a == b {
                    return vec![vec![a]];
                }
                (0..n).map(|i| vec![a + (b - a) * i as f64 / (n - 1) as f64]).collect()
            }
            SubgradientSet::Hull(pts) => {
                let mut out: Vec<Vec<f64>> = pts.iter().take(budget).cloned().collect();
                if out.len() < budget && pts.len() > 1 {
                    let d = pts[0].len();
                    let c: Vec<f64> = (0..d).map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64).collect();
                    out.push(c);
                }
                out
            }
        }
    }
}

fn finite_or(v: f64, fallback: f64) -> f64 {
    if v.is_finite() {
        v
    } else if fallback.is_finite() {
        fallback
    } else {
        0.0
    }
}

// A point lies in a polytope iff it satisfies every facet inequality. In the
// plane the facet normals are among the normals of point pairs.
fn hull_contains(pts: &[Vec<f64>], xs: &[f64], tol: f64) -> bool {
    let d = xs.len();
    let mut normals: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        normals.push(e.clone());
        e[i] = -1.0;
        normals.push(e);
    }
    if d == 2 {
        for a in pts {
            for b in pts {
                let n = vec![b[1] - a[1], a[0] - b[0]];
                if n[0] != 0.0 || n[1] != 0.0 {
                    normals.push(n.iter().map(|v| -v).collect());
                    normals.push(n);
                }
            }
        }
    } else if d > 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..256 {
            normals.push((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
    }
    let support = |n: &[f64]| pts.iter().map(|g| dot(g, n)).fold(f64::NEG_INFINITY, f64::max);
    normals.iter().all(|n| {
        let s = n.iter().map(|v| v.abs()).fold(0.0, f64::max);
        dot(xs, n) <= support(n) + tol * s.max(1.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    ClosedForm,
    ConvexMembership,
    GradientSample,
}

type SetFn = Arc<dyn Fn(&[f64]) -> SubgradientSet + Send + Sync>;

#[derive(Clone)]
enum Imp {
    Set(SetFn),
    Convex(EvalFn),
    Sampled(EvalFn),
}

/// Access to a subdifferential: support function, membership and samples.
#[derive(Clone)]
pub struct SubdiffOracle {
    pub kind: OracleKind,
    /// Which subdifferential the oracle describes (e.g. "Clarke").
    pub label: String,
    imp: Imp,
    shift: Option<Vec<f64>>,
}

const SAMPLE_BUDGET: usize = 64;
const SAMPLE_RADIUS: f64 = 1e-6;

impl SubdiffOracle {
    pub fn closed_form(label: &str, f: impl Fn(&[f64]) -> SubgradientSet + Send + Sync + 'static) -> Self {
        SubdiffOracle { kind: OracleKind::ClosedForm, label: label.into(), imp: Imp::Set(Arc::new(f)), shift: None }
    }

    /// For convex functions given only by values: support from radial
    /// quotients, membership from the subgradient inequality.
    pub fn convex_membership(eval: EvalFn) -> Self {
        SubdiffOracle {
            kind: OracleKind::ConvexMembership,
            label: "Moreau-Rockafellar".into(),
            imp: Imp::Convex(eval),
            shift: None,
        }
    }

    /// For locally Lipschitz functions: hull of sampled nearby gradients.
    pub fn gradient_sampling(eval: EvalFn) -> Self {
        SubdiffOracle {
            kind: OracleKind::GradientSample,
            label: "Clarke".into(),
            imp: Imp::Sampled(eval),
            shift: None,
        }
    }

    /// The oracle of `f + <c, .>`.
    pub fn translated(&self, c: Vec<f64>) -> Self {
        let shift = match &self.shift {
            Some(s) => s.iter().zip(&c).map(|(a, b)| a + b).collect(),
            None => c,
        };
        SubdiffOracle { shift: Some(shift), ..self.clone() }
    }

    /// The set at `x`, when it can be written down (closed form or sampled hull).
    pub fn set_at(&self, x: &[f64]) -> Option<SubgradientSet> {
        let s = match &self.imp {
            Imp::Set(f) => f(x),
            Imp::Sampled(f) => {
                let g = gradient_samples(f.as_ref(), x, SAMPLE_BUDGET, SAMPLE_RADIUS, &mut seeded_at(x));
                if g.is_empty() {
                    SubgradientSet::Empty
                } else {
                    SubgradientSet::Hull(g)
                }
            }
            Imp::Convex(..) => return None,
        };
        Some(match &self.shift {
            Some(c) => s.translated(c),
            None => s,
        })
    }

    /// Support function `f^∂(x; u)`; `-inf` when the set is empty.
    pub fn support(&self, x: &[f64], u: &[f64]) -> f64 {
        match &self.imp {
            Imp::Convex(f) => {
                let extra = self.shift.as_ref().map_or(0.0, |c| dot(c, u));
                let f = f.clone();
                let sched = SamplingSchedule { refine: 0, ..SamplingSchedule::default() };
                match ray_limit(&move |y| f(y), x, u, &sched, Side::Inf) {
                    Ok(e) if e.value.is_finite() => e.v() + extra,
                    Ok(e) => e.v(),
                    Err(_) => f64::NAN,
                }
            }
            // set_at already applies the shift
            _ => self.set_at(x).map_or(f64::NAN, |s| s.support(u)),
        }
    }

    pub fn member(&self, x: &[f64], xs: &[f64]) -> Status {
        match &self.imp {
            Imp::Convex(f) => {
                let xs: Vec<f64> = match &self.shift {
                    Some(c) => xs.iter().zip(c).map(|(a, b)| a - b).collect(),
                    None => xs.to_vec(),
                };
                subgradient_inequality(f.as_ref(), None, x, &xs, 256, &mut seeded_at(x)).status
            }
            _ => match self.set_at(x) {
                Some(s) if s.contains(xs, 1e-9) => Status::Verified,
                Some(_) => Status::Falsified,
                None => Status::Inconclusive,
            },
        }
    }

    pub fn sample(&self, x: &[f64], budget: usize) -> Vec<Vec<f64>> {
        match self.set_at(x) {
            Some(s) => s.sample(budget),
            None => Vec::new(),
        }
    }
}

fn seeded_at(x: &[f64]) -> ChaCha8Rng {
    let mut h: u64 = 0x51_7cc1_b727_220a;
    for v in x {
        h = (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn subgradient_inequality(
    f: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
    probe_box: Option<&[(f64, f64)]>,
    x: &[f64],
    xs: &[f64],
    budget: usize,
    rng: &mut impl Rng,
) -> Verdict {
    let fx = f(x);
    if !fx.is_finite() {
        return Verdict::falsified("x is outside the domain; the subdifferential is empty");
    }
    let d = x.len();
    let mut ys: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for k in 0..=15 {
            let h = 10f64.powi(-k);
            for s in [1.0, -1.0] {
                let mut y = x.to_vec();
                y[i] += s * h;
                ys.push(y);
            }
        }
    }
    if let Some(b) = probe_box {
        for mask in 0..(1usize << d.min(10)) {
            ys.push((0..d).map(|i| if mask >> i & 1 == 1 { b[i].1 } else { b[i].0 }).collect());
        }
    }
    for _ in 0..budget {
        let y: Vec<f64> = match probe_box {
            Some(b) => b.iter().map(|(lo, hi)| if lo == hi { *lo } else { rng.gen_range(*lo..*hi) }).collect(),
            None => {
                let r = 10f64.powf(rng.gen_range(-12.0..1.0));
                x.iter().map(|v| v + r * rng.gen_range(-1.0..1.0)).collect()
            }
        };
        ys.push(y);
    }
    for y in &ys {
        let fy = f(y);
        if !fy.is_finite() {
            continue;
        }
        let lin: f64 = fx + xs.iter().zip(y).zip(x).map(|((g, a), b)| g * (a - b)).sum::<f64>();
        let scale = 1.0 + fx.abs() + fy.abs();
        if lin > fy + 1e-12 * scale {
            return Verdict::falsified(format!("f(x) + <x*, y - x> = {lin} exceeds f(y) = {fy} at y = {y:?}"));
        }
    }
    if budget < 8 {
        return Verdict::inconclusive(format!("no violation in {} points, budget too small", ys.len()));
    }
    Verdict::verified(format!("subgradient inequality holds at {} test points", ys.len()))
}

/// Moreau-Rockafellar membership `x* in ∂f(x)` for a convex entry, by
/// searching for a violation of `f(y) >= f(x) + <x*, y - x>`.
pub fn mr_member(e: &CatalogEntry, x: &[f64], xs: &[f64], budget: usize, rng: &mut impl Rng) -> Result<Verdict> {
    e.check_dim(x)?;
    e.check_dim(xs)?;
    if !e.has_tag(Tag::Convex) {
        return Err(Error::MissingTag { name: e.name.clone(), tag: Tag::Convex.to_string() });
    }
    let f = |y: &[f64]| e.value(y);
    Ok(subgradient_inequality(&f, Some(&e.probe_box), x, xs, budget, rng))
}

/// Gradients at random points of the ball `B(x, radius)`, by central
/// differences. Points where one-sided differences disagree are skipped.
pub fn clarke_sample(e: &CatalogEntry, x: &[f64], budget: usize, radius: f64, rng: &mut impl Rng) -> Result<Vec<Vec<f64>>> {
    e.check_dim(x)?;
    let f = |y: &[f64]| e.value(y);
    Ok(gradient_samples(&f, x, budget, radius, rng))
}

fn gradient_samples(
    f: &(dyn Fn(&[f64]) -> f64 + Send + Sync),
    x: &[f64],
    budget: usize,
    radius: f64,
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut tries = 0;
    while tries < budget {
        tries += 1;
        let mut z: Vec<f64>;
        loop {
            z = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if z.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                break;
            }
        }
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + radius * b).collect();
        let fy = f(&y);
        if !fy.is_finite() {
            continue;
        }
        let mut g = Vec::with_capacity(d);
        let mut smooth = true;
        for i in 0..d {
            let h = (1e-7 * y[i].abs().max(1.0)).min(radius * 1e-3);
            let mut yp = y.clone();
            yp[i] += h;
            let mut ym = y.clone();
            ym[i] -= h;
            let (fp, fm) = (f(&yp), f(&ym));
            if !(fp.is_finite() && fm.is_finite()) {
                smooth = false;
                break;
            }
            let fwd = (fp - fy) / (yp[i] - y[i]);
            let bwd = (fy - fm) / (y[i] - ym[i]);
            if (fwd - bwd).abs() > 1e-6 * fwd.abs().max(1.0) {
                smooth = false;
                break;
            }
            g.push((fp - fm) / (yp[i] - ym[i]));
        }
        if !smooth {
            continue;
        }
        let dup = out.iter().any(|o| o.iter().zip(&g).all(|(a, b)| (a - b).abs() <= 1e-6));
        if !dup {
            out.push(g);
        }
    }
    out
}

/// Support function of the entry's subdifferential oracle.
pub fn support(e: &CatalogEntry, x: &[f64], u: &[f64]) -> Result<ExtReal> {
    e.check_dim(x)?;
    e.check_dim(u)?;
    let o = e.require_subdiff()?;
    ExtReal::from_f64(o.support(x, u)).ok_or_else(|| Error::Evaluation { what: "NaN support".into(), at: format!("{x:?}") })
}

fn radial_value(e: &CatalogEntry, x: &[f64], u: &[f64], p: &DirectionalProbe, source: Source) -> Result<(ExtReal, bool)> {
    if source == Source::Oracle || (source == Source::FromSubdiff && e.has_deriv_oracle()) {
        if let Some(v) = e.deriv_oracle(x, u) {
            return Ok((ExtReal::from(v), true));
        }
    }
    let r = radial(e, x, u, p)?;
    Ok((r.value, r.converged))
}

fn compare(name: &str, reg: ExtReal, reg_ok: bool, r: ExtReal, r_ok: bool, tol: f64) -> Verdict {
    let scale = r.finite().map_or(1.0, |v| v.abs().max(1.0));
    // gap in units of tol; infinite when exactly one side is infinite
    let gap = match (reg.finite(), r.finite()) {
        (Some(a), Some(b)) => (a - b).abs() / (tol * scale),
        _ if reg == r => 0.0,
        _ => f64::INFINITY,
    };
    let ev = format!("{name} = {reg}, f^r = {r}");
    if !(reg_ok && r_ok) {
        Verdict::inconclusive(format!("{ev}; estimates did not converge"))
    } else if gap <= 1.0 {
        Verdict::verified(ev)
    } else if gap > 3.0 {
        Verdict::falsified(ev)
    } else {
        Verdict::inconclusive(format!("{ev}; gap between tol and 3 tol"))
    }
}

/// Upper semismoothness at `(x̄, u)`: `f♮(x̄; u) = f^r(x̄; u)`.
pub fn upper_semismooth_check(
    e: &CatalogEntry,
    x: &[f64],
    u: &[f64],
    p: &DirectionalProbe,
    source: Source,
    tol: f64,
) -> Result<Verdict> {
    let n = natural_dir(e, x, u, p, source)?;
    let (r, r_ok) = radial_value(e, x, u, p, source)?;
    Ok(compare("f♮", n.value, n.converged, r, r_ok, tol))
}

/// Strict upper semismoothness at `(x̄, u)`: `f♮♮(x̄; u) = f^r(x̄; u)`.
pub fn strictly_upper_semismooth_check(
    e: &CatalogEntry,
    x: &[f64],
    u: &[f64],
    p: &DirectionalProbe,
    source: Source,
    tol: f64,
) -> Result<Verdict> {
    let n = natural_full(e, x, u, p, source)?;
    let (r, r_ok) = radial_value(e, x, u, p, source)?;
    Ok(compare("f♮♮", n.value, n.converged, r, r_ok, tol))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub entry: String,
    pub source: Source,
    /// Verdict per class, keyed by tag name.
    pub classes: BTreeMap<String, Verdict>,
    /// Classes whose verdict contradicts the entry's tags.
    pub tag_conflicts: Vec<String>,
}

impl ClassReport {
    pub fn get(&self, t: Tag) -> Option<&Verdict> {
        self.classes.get(t.as_str())
    }
}

/// Parameters checked on a segment: a uniform grid plus seeded random points.
pub fn segment_parameters(grid: usize, extra: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..grid).map(|i| i as f64 / (grid.max(2) - 1) as f64).collect();
    ts.extend((0..extra).map(|_| rng.gen_range(0.0..1.0)));
    ts
}

struct PointCheck {
    r: ExtReal,
    r_ok: bool,
    nat: Option<(ExtReal, bool)>,
    natnat: Option<(ExtReal, bool)>,
}

/// Verdicts for the four regularization classes over the given segments
/// (default: coordinate segments of the probe box, both orientations).
pub fn class_check(
    e: &CatalogEntry,
    segments: Option<&[Segment]>,
    p: &DirectionalProbe,
    source: Source,
    rng: &mut impl Rng,
    tol: f64,
) -> Result<ClassReport> {
    if !e.domain.is_convex() {
        return Err(Error::MissingTag { name: e.name.clone(), tag: "convex domain".into() });
    }
    let segs: Vec<Segment> = match segments {
        Some(s) => s.to_vec(),
        None => e.coordinate_segments(),
    };
    let classes = [Tag::LscNatNat, Tag::LcNatN, Tag::LacgStarNatA, Tag::LacgNatA];
    // (first failure, inconclusive count, checked count)
    let mut state: BTreeMap<Tag, (Option<String>, usize, usize)> = classes.iter().map(|c| (*c, (None, 0, 0))).collect();
    for seg in &segs {
        let inside = [0.0, 0.5, 1.0].iter().all(|t| e.in_domain(&seg.point(*t)));
        if !inside {
            continue;
        }
        let mut ts = segment_parameters(101, 50, rng);
        ts.retain(|t| *t < 1.0);
        let exc: Vec<f64> = e.exception_set.iter().filter_map(|q| seg.parameter_of(q)).collect();
        for t in ts {
            let x = seg.point(t);
            if !e.in_domain(&x) {
                continue;
            }
            let is_exc = exc.iter().any(|s| (s - t).abs() <= 1e-12);
            let (r, r_ok) = radial_value(e, &x, &seg.dir, p, source)?;
            let mut pc = PointCheck { r, r_ok, nat: None, natnat: None };
            let nn = natural_full(e, &x, &seg.dir, p, source)?;
            pc.natnat = Some((nn.value, nn.converged));
            if !is_exc {
                let n = natural_dir(e, &x, &seg.dir, p, source)?;
                pc.nat = Some((n.value, n.converged));
            }
            for c in classes {
                let st = state.get_mut(&c).unwrap();
                let (reg, need_finite, need_below_inf) = match c {
                    Tag::LscNatNat => (pc.natnat, false, true),
                    Tag::LcNatN | Tag::LacgNatA => (pc.nat, true, false),
                    _ => (pc.nat, false, false),
                };
                let Some((rv, rok)) = reg else { continue };
                st.2 += 1;
                let mut v = compare(c.as_str(), rv, rok, pc.r, pc.r_ok, tol);
                if need_finite && !pc.r.is_finite() {
                    v = Verdict::falsified(format!("f^r = {} is not finite", pc.r));
                }
                if need_below_inf && pc.r == ExtReal::PosInf {
                    v = Verdict::falsified("f^r = +inf");
                }
                match v.status {
                    Status::Falsified if st.0.is_none() => {
                        st.0 = Some(format!("at x = {:?}, u = {:?}: {}", x, seg.dir, v.evidence));
                    }
                    Status::Inconclusive => st.1 += 1,
                    _ => {}
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    let mut conflicts = Vec::new();
    for c in classes {
        let (fail, inc, n) = state[&c].clone();
        let v = if let Some(f) = fail {
            Verdict::falsified(f)
        } else if n == 0 {
            Verdict::inconclusive("no segment inside the domain")
        } else if inc > 0 {
            Verdict::inconclusive(format!("{inc} of {n} points unresolved"))
        } else {
            Verdict::verified(format!("{n} points checked"))
        };
        if v.is_falsified() && e.has_tag(c) {
            conflicts.push(c.to_string());
        }
        out.insert(c.to_string(), v);
    }
    Ok(ClassReport { entry: e.name.clone(), source, classes: out, tag_conflicts: conflicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::rng::stream;

    #[test]
    fn support_of_empty_is_minus_infinity() {
        assert_eq!(SubgradientSet::Empty.support(&[1.0]), f64::NEG_INFINITY);
        let s = SubgradientSet::Interval { lo: -0.5, hi: f64::INFINITY };
        assert_eq!(s.support(&[1.0]), f64::INFINITY);
        assert_eq!(s.support(&[-2.0]), 1.0);
    }

    #[test]
    fn hull_membership_in_the_plane() {
        let h = SubgradientSet::Hull(vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![0.0, -1.0]]);
        assert!(h.contains(&[0.0, 0.0], 1e-12));
        assert!(h.contains(&[1.0, 0.0], 1e-12));
        assert!(!h.contains(&[1.0, 1.0], 1e-12));
        assert!(!h.contains(&[-0.9, 0.0], 1e-12));
    }

    #[test]
    fn mr_membership_for_neg_sqrt() {
        let c = Catalog::builtin();
        let e = c.get("neg_sqrt_01").unwrap();
        let mut rng = stream(1, "t");
        assert!(mr_member(&e, &[0.0], &[-1e6], 64, &mut rng).unwrap().is_falsified());
        assert!(mr_member(&e, &[0.0], &[0.0], 64, &mut rng).unwrap().is_falsified());
        assert!(mr_member(&e, &[1.0], &[-0.5], 64, &mut rng).unwrap().is_verified());
        assert!(mr_member(&e, &[1.0], &[3.0], 64, &mut rng).unwrap().is_verified());
        assert!(mr_member(&e, &[1.0], &[-0.6], 64, &mut rng).unwrap().is_falsified());
        let na = c.get("neg_abs").unwrap();
        assert!(matches!(mr_member(&na, &[0.0], &[0.0], 64, &mut rng), Err(Error::MissingTag { .. })));
    }

    #[test]
    fn gradient_samples_of_abs_at_zero() {
        let c = Catalog::builtin();
        let e = c.get("abs").unwrap();
        let mut g = clarke_sample(&e, &[0.0], 50, 1e-3, &mut stream(3, "t")).unwrap();
        g.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(g, vec![vec![-1.0], vec![1.0]]);
        let m = c.get("max_affine_2d").unwrap();
        let g = clarke_sample(&m, &[0.0, 0.0], 60, 1e-3, &mut stream(3, "t")).unwrap();
        assert_eq!(g.len(), 3, "{g:?}");
    }

    #[test]
    fn x_sin_inv_is_not_upper_semismooth_at_zero() {
        let c = Catalog::builtin();
        let e = c.get("x_sin_inv").unwrap();
        let p = DirectionalProbe::default();
        let v = upper_semismooth_check(&e, &[0.0], &[1.0], &p, Source::Oracle, 1e-3).unwrap();
        assert!(v.is_falsified(), "{v:?}");
        let a = c.get("abs").unwrap();
        let v = strictly_upper_semismooth_check(&a, &[0.0], &[1.0], &p, Source::FromSubdiff, 1e-3).unwrap();
        assert!(v.is_verified(), "{v:?}");
    }

    #[test]
    fn translated_oracle_shifts_support() {
        let c = Catalog::builtin();
        let e = c.get("abs_plus_half_x").unwrap();
        let o = e.subdiff_oracle().unwrap();
        assert_eq!(o.support(&[0.0], &[1.0]), 1.5);
        assert_eq!(o.support(&[0.0], &[-1.0]), 0.5);
    }
}
