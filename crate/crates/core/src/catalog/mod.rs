//! Function records: evaluation, domain, class tags and optional oracles.

mod builtins;
pub mod expr;
pub mod file;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{point_string, Error, Result};
use crate::extreal::ExtReal;
use crate::subdiff::SubdiffOracle;

pub type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type DerivFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Convex,
    LocallyLipschitz,
    Lsc,
    ContinuousOnDomain,
    Regular,
    Semismooth,
    LscNatNat,
    LcNatN,
    LacgStarNatA,
    LacgNatA,
    AcgStarSegments,
}

impl Tag {
    pub const ALL: [Tag; 11] = [
        Tag::Convex,
        Tag::LocallyLipschitz,
        Tag::Lsc,
        Tag::ContinuousOnDomain,
        Tag::Regular,
        Tag::Semismooth,
        Tag::LscNatNat,
        Tag::LcNatN,
        Tag::LacgStarNatA,
        Tag::LacgNatA,
        Tag::AcgStarSegments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Convex => "convex",
            Tag::LocallyLipschitz => "locally_lipschitz",
            Tag::Lsc => "lsc",
            Tag::ContinuousOnDomain => "continuous_on_domain",
            Tag::Regular => "regular",
            Tag::Semismooth => "semismooth",
            Tag::LscNatNat => "Lsc♮♮",
            Tag::LcNatN => "LC♮n",
            Tag::LacgStarNatA => "LACG*♮a",
            Tag::LacgNatA => "LACG♮a",
            Tag::AcgStarSegments => "ACGstar_segments",
        }
    }

    /// Accepts the display names and plain-ASCII spellings.
    pub fn parse(s: &str) -> Option<Tag> {
        let s = s.trim();
        if let Some(t) = Tag::ALL.iter().find(|t| t.as_str() == s) {
            return Some(*t);
        }
        match s {
            "Lsc_natnat" | "lsc_natnat" => Some(Tag::LscNatNat),
            "LC_natn" | "lc_natn" => Some(Tag::LcNatN),
            "LACGstar_nata" | "lacgstar_nata" => Some(Tag::LacgStarNatA),
            "LACG_nata" | "lacg_nata" => Some(Tag::LacgNatA),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Declared effective domain. Outside it `value` is `+inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    All,
    Box(Vec<(f64, f64)>),
    /// No convexity claim; pieces may still return `+inf`.
    Unspecified,
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::All | Domain::Unspecified => true,
            Domain::Box(b) => x.iter().zip(b).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi),
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, Domain::Unspecified)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub base: Vec<f64>,
    pub dir: Vec<f64>,
}

impl Segment {
    pub fn new(base: Vec<f64>, dir: Vec<f64>) -> Self {
        Segment { base, dir }
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        self.base.iter().zip(&self.dir).map(|(b, u)| b + t * u).collect()
    }

    pub fn reversed(&self) -> Segment {
        let end = self.point(1.0);
        Segment { base: end, dir: self.dir.iter().map(|u| -u).collect() }
    }

    /// Parameter `t` in `[0, 1]` with `point(t) == p`, if `p` lies on the segment.
    pub fn parameter_of(&self, p: &[f64]) -> Option<f64> {
        let uu: f64 = self.dir.iter().map(|u| u * u).sum();
        if uu == 0.0 {
            return None;
        }
        let t: f64 = p
            .iter()
            .zip(&self.base)
            .zip(&self.dir)
            .map(|((p, b), u)| (p - b) * u)
            .sum::<f64>()
            / uu;
        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
            return None;
        }
        let q = self.point(t);
        let off: f64 = q.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = 1.0 + p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (off <= 1e-12 * scale).then_some(t.clamp(0.0, 1.0))
    }
}

/// Calls `g` on `base + t * dir` without heap allocation for small dimensions.
#[inline]
pub(crate) fn with_point<R>(base: &[f64], dir: &[f64], t: f64, g: impl FnOnce(&[f64]) -> R) -> R {
    let n = base.len();
    if n <= 8 {
        let mut buf = [0.0f64; 8];
        for i in 0..n {
            buf[i] = base[i] + t * dir[i];
        }
        g(&buf[..n])
    } else {
        let v: Vec<f64> = base.iter().zip(dir).map(|(b, u)| b + t * u).collect();
        g(&v)
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub description: String,
    pub domain: Domain,
    pub tags: BTreeSet<Tag>,
    pub singular_set: Vec<Vec<f64>>,
    pub exception_set: Vec<Vec<f64>>,
    /// Box used when probing; equals the domain box when there is one.
    pub probe_box: Vec<(f64, f64)>,
    pub default_segment: Segment,
    eval: EvalFn,
    deriv: Option<DerivFn>,
    subdiff: Option<SubdiffOracle>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("tags", &self.tags)
            .finish_non_exhaustive()
    }
}

impl CatalogEntry {
    pub fn new(name: impl Into<String>, dim: usize, eval: EvalFn) -> Self {
        CatalogEntry {
            name: name.into(),
            dim,
            description: String::new(),
            domain: Domain::All,
            tags: BTreeSet::new(),
            singular_set: Vec::new(),
            exception_set: Vec::new(),
            probe_box: vec![(-1.0, 1.0); dim],
            default_segment: Segment::new(vec![-1.0; dim], vec![2.0; dim]),
            eval,
            deriv: None,
            subdiff: None,
        }
    }

    pub fn describe(mut self, d: &str) -> Self {
        self.description = d.to_string();
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        if let Domain::Box(b) = &domain {
            self.probe_box = b.clone();
            let base: Vec<f64> = b.iter().map(|(lo, _)| *lo).collect();
            let dir: Vec<f64> = b.iter().map(|(lo, hi)| hi - lo).collect();
            self.default_segment = Segment::new(base, dir);
        }
        self.domain = domain;
        self
    }

    pub fn with_tags(mut self, tags: &[Tag]) -> Self {
        self.tags.extend(tags.iter().copied());
        self
    }

    pub fn with_singular(mut self, pts: Vec<Vec<f64>>) -> Self {
        self.singular_set = pts;
        self
    }

    pub fn with_exceptions(mut self, pts: Vec<Vec<f64>>) -> Self {
        self.exception_set = pts;
        self
    }

    pub fn with_segment(mut self, seg: Segment) -> Self {
        self.default_segment = seg;
        self
    }

    pub fn with_probe_box(mut self, b: Vec<(f64, f64)>) -> Self {
        self.probe_box = b;
        self
    }

    pub fn with_deriv(mut self, d: DerivFn) -> Self {
        self.deriv = Some(d);
        self
    }

    pub fn with_subdiff(mut self, s: SubdiffOracle) -> Self {
        self.subdiff = Some(s);
        self
    }

    pub fn has_tag(&self, t: Tag) -> bool {
        self.tags.contains(&t)
    }

    /// Raw value: `+inf` outside the declared domain, otherwise the formula.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        if !self.domain.contains(x) {
            return f64::INFINITY;
        }
        (self.eval)(x)
    }

    /// Checked evaluation. Fails on a dimension mismatch, NaN or `-inf`.
    pub fn eval(&self, x: &[f64]) -> Result<ExtReal> {
        self.check_dim(x)?;
        let v = self.value(x);
        match ExtReal::from_f64(v) {
            None => Err(Error::Evaluation { what: "NaN".into(), at: point_string(x) }),
            Some(ExtReal::NegInf) => Err(Error::Evaluation { what: "-inf".into(), at: point_string(x) }),
            Some(e) => Ok(e),
        }
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok(())
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.value(x) < f64::INFINITY
    }

    pub fn has_deriv_oracle(&self) -> bool {
        self.deriv.is_some()
    }

    /// Closed-form radial subderivative `f^r(x; u)`; `-inf` off the domain.
    pub fn deriv_oracle(&self, x: &[f64], u: &[f64]) -> Option<f64> {
        let d = self.deriv.as_ref()?;
        if !self.in_domain(x) {
            return Some(f64::NEG_INFINITY);
        }
        Some(d(x, u))
    }

    pub fn subdiff_oracle(&self) -> Option<&SubdiffOracle> {
        self.subdiff.as_ref()
    }

    pub fn require_deriv(&self) -> Result<()> {
        if self.deriv.is_none() {
            return Err(Error::MissingOracle { name: self.name.clone(), oracle: "derivative" });
        }
        Ok(())
    }

    pub fn require_subdiff(&self) -> Result<&SubdiffOracle> {
        self.subdiff
            .as_ref()
            .ok_or_else(|| Error::MissingOracle { name: self.name.clone(), oracle: "subdifferential" })
    }

    /// `f + c`, keeping tags and oracles.
    pub fn shifted(&self, name: impl Into<String>, c: f64) -> CatalogEntry {
        let base = self.eval.clone();
        let mut e = self.clone();
        e.name = name.into();
        e.description = format!("{} + {c}", self.name);
        e.eval = Arc::new(move |x| base(x) + c);
        e
    }

    /// `f + <c, x>`. Oracles are shifted accordingly.
    pub fn plus_linear(&self, name: impl Into<String>, c: Vec<f64>) -> CatalogEntry {
        assert_eq!(c.len(), self.dim);
        let base = self.eval.clone();
        let mut e = self.clone();
        e.name = name.into();
        e.description = format!("{} + <{:?}, x>", self.name, c);
        let c1 = c.clone();
        e.eval = Arc::new(move |x| base(x) + dot(&c1, x));
        if let Some(d) = self.deriv.clone() {
            let c2 = c.clone();
            e.deriv = Some(Arc::new(move |x, u| d(x, u) + dot(&c2, u)));
        }
        if let Some(s) = &self.subdiff {
            e.subdiff = Some(s.translated(c.clone()));
        }
        e
    }

    /// The 1-d function `t -> f(base + t dir)` on `[0, 1]`.
    pub fn restrict(self: &Arc<Self>, seg: &Segment) -> Result<LineFunction> {
        self.check_dim(&seg.base)?;
        self.check_dim(&seg.dir)?;
        let e = self.clone();
        let s = seg.clone();
        let f: ScalarFn = Arc::new(move |t| with_point(&s.base, &s.dir, t, |x| e.value(x)));
        let deriv = self.deriv.clone().map(|_| {
            let e = self.clone();
            let s = seg.clone();
            Arc::new(move |t: f64| {
                with_point(&s.base, &s.dir, t, |x| e.deriv_oracle(x, &s.dir).unwrap_or(f64::NAN))
            }) as ScalarFn
        });
        let map = |pts: &[Vec<f64>]| {
            let mut ts: Vec<f64> = pts.iter().filter_map(|p| seg.parameter_of(p)).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            ts
        };
        Ok(LineFunction {
            name: format!("{} on segment", self.name),
            f,
            interval: (0.0, 1.0),
            singular: map(&self.singular_set),
            exceptions: map(&self.exception_set),
            tags: self.tags.clone(),
            deriv,
        })
    }

    /// A 1-d entry viewed as a function of one real variable.
    pub fn as_line(self: &Arc<Self>) -> Result<LineFunction> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        let e = self.clone();
        let f: ScalarFn = Arc::new(move |t| e.value(&[t]));
        let deriv = self.deriv.clone().map(|_| {
            let e = self.clone();
            Arc::new(move |t: f64| e.deriv_oracle(&[t], &[1.0]).unwrap_or(f64::NAN)) as ScalarFn
        });
        let interval = match &self.domain {
            Domain::Box(b) => b[0],
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        };
        let pts = |v: &[Vec<f64>]| {
            let mut ts: Vec<f64> = v.iter().map(|p| p[0]).collect();
            ts.sort_by(f64::total_cmp);
            ts
        };
        Ok(LineFunction {
            name: self.name.clone(),
            f,
            interval,
            singular: pts(&self.singular_set),
            exceptions: pts(&self.exception_set),
            tags: self.tags.clone(),
            deriv,
        })
    }

    /// Coordinate segments across the probe box, in both orientations.
    pub fn coordinate_segments(&self) -> Vec<Segment> {
        let mid: Vec<f64> = self.probe_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        let mut out = Vec::new();
        for i in 0..self.dim {
            let mut base = mid.clone();
            let mut dir = vec![0.0; self.dim];
            base[i] = self.probe_box[i].0;
            dir[i] = self.probe_box[i].1 - self.probe_box[i].0;
            let s = Segment::new(base, dir);
            out.push(s.reversed());
            out.insert(out.len() - 1, s);
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A function of one real variable with the metadata the 1-d tools need.
#[derive(Clone)]
pub struct LineFunction {
    pub name: String,
    f: ScalarFn,
    /// Declared domain; `value` is `+inf` outside.
    pub interval: (f64, f64),
    pub singular: Vec<f64>,
    pub exceptions: Vec<f64>,
    pub tags: BTreeSet<Tag>,
    deriv: Option<ScalarFn>,
}

impl fmt::Debug for LineFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineFunction")
            .field("name", &self.name)
            .field("interval", &self.interval)
            .finish_non_exhaustive()
    }
}

impl LineFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        LineFunction {
            name: name.into(),
            f: Arc::new(f),
            interval: (f64::NEG_INFINITY, f64::INFINITY),
            singular: Vec::new(),
            exceptions: Vec::new(),
            tags: BTreeSet::new(),
            deriv: None,
        }
    }

    pub fn on(mut self, lo: f64, hi: f64) -> Self {
        self.interval = (lo, hi);
        self
    }

    pub fn singular_at(mut self, pts: &[f64]) -> Self {
        self.singular = pts.to_vec();
        self
    }

    pub fn exceptions_at(mut self, pts: &[f64]) -> Self {
        self.exceptions = pts.to_vec();
        self
    }

    pub fn tagged(mut self, tags: &[Tag]) -> Self {
        self.tags.extend(tags.iter().copied());
        self
    }

    /// Closed-form lower right Dini derivative.
    pub fn right_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.deriv = Some(Arc::new(d));
        self
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if t < self.interval.0 || t > self.interval.1 {
            return f64::INFINITY;
        }
        (self.f)(t)
    }

    pub fn deriv_oracle(&self, t: f64) -> Option<f64> {
        self.deriv.as_ref().map(|d| d(t))
    }

    pub fn has_tag(&self, t: Tag) -> bool {
        self.tags.contains(&t)
    }

    /// `c * f`, for `c > 0`.
    pub fn scaled(&self, c: f64) -> LineFunction {
        let f = self.f.clone();
        let mut out = self.clone();
        out.f = Arc::new(move |t| c * f(t));
        out.deriv = self.deriv.clone().map(|d| Arc::new(move |t: f64| c * d(t)) as ScalarFn);
        out
    }

    /// `f + g` on the intersection of the two intervals.
    pub fn sum(&self, g: &LineFunction) -> LineFunction {
        let (f1, f2) = (self.f.clone(), g.f.clone());
        let mut out = self.clone();
        out.name = format!("{} + {}", self.name, g.name);
        out.interval = (self.interval.0.max(g.interval.0), self.interval.1.min(g.interval.1));
        out.f = Arc::new(move |t| f1(t) + f2(t));
        out.deriv = None;
        out
    }
}

/// Named registry of entries.
#[derive(Clone, Default)]
pub struct Catalog {
    entries: BTreeMap<String, Arc<CatalogEntry>>,
}

impl Catalog {
    pub fn empty() -> Self {
        Catalog::default()
    }

    pub fn builtin() -> Self {
        let mut c = Catalog::empty();
        for e in builtins::all() {
            c.insert(e);
        }
        c
    }

    pub fn insert(&mut self, e: CatalogEntry) {
        self.entries.insert(e.name.clone(), Arc::new(e));
    }

    pub fn get(&self, name: &str) -> Result<Arc<CatalogEntry>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownFunction {
            name: name.to_string(),
            available: self.names(),
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<CatalogEntry>> {
        self.entries.values()
    }

    /// Adds every entry of a function-definition file.
    pub fn load_str(&mut self, text: &str) -> Result<Vec<String>> {
        let entries = file::parse(text)?;
        let names = entries.iter().map(|e| e.name.clone()).collect();
        for e in entries {
            self.insert(e);
        }
        Ok(names)
    }

    pub fn load_file(&mut self, path: &std::path::Path) -> Result<Vec<String>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.load_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_parse_both_spellings() {
        assert_eq!(Tag::parse("Lsc♮♮"), Some(Tag::LscNatNat));
        assert_eq!(Tag::parse("LC_natn"), Some(Tag::LcNatN));
        assert_eq!(Tag::parse("bogus"), None);
    }

    #[test]
    fn segment_parameters() {
        let s = Segment::new(vec![-1.0], vec![2.0]);
        assert_eq!(s.parameter_of(&[0.0]), Some(0.5));
        assert_eq!(s.parameter_of(&[3.0]), None);
        let r = s.reversed();
        assert_eq!(r.base, vec![1.0]);
        assert_eq!(r.dir, vec![-2.0]);
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let c = Catalog::builtin();
        match c.get("nope") {
            Err(Error::UnknownFunction { available, .. }) => assert!(available.contains(&"abs".to_string())),
            other => panic!("{other:?}"),
        }
    }
}
