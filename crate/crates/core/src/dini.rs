//! Right Dini derivatives of functions of one variable.

use serde::{Deserialize, Serialize};

use crate::catalog::LineFunction;
use crate::error::{Error, Result};
use crate::extreal::{ser_f64, ExtReal};
use crate::limits::{aggregate, level_extremum, tail_levels, Side};
use crate::verdict::Verdict;

/// Geometric step schedule `t_k = t0 * rho^k`, cut at `floor * (|t| + 1)`.
/// Only the last `tail` levels enter the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingSchedule {
    pub t0: f64,
    pub rho: f64,
    pub steps: usize,
    pub tail: usize,
    pub floor: f64,
    /// Spread allowed across the tail, relative to `max(1, |value|)`.
    pub tol: f64,
    /// Sub-samples inside each level.
    pub sub_samples: usize,
    /// Golden-section iterations around the best sub-sample; 0 disables.
    pub refine: usize,
}

impl Default for SamplingSchedule {
    fn default() -> Self {
        SamplingSchedule {
            t0: 1e-2,
            rho: 0.5,
            steps: 40,
            tail: 12,
            floor: 1e-9,
            tol: 1e-3,
            sub_samples: 8,
            refine: 40,
        }
    }
}

impl SamplingSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSchedule(m.to_string()));
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return bad("t0 must be positive");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if self.steps < 2 || self.tail < 2 {
            return bad("need at least two steps and a tail of two");
        }
        if !(self.floor > 0.0) {
            return bad("floor must be positive");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }

    /// The same schedule with every step multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SamplingSchedule {
        SamplingSchedule { t0: self.t0 * c, floor: self.floor * c, ..self.clone() }
    }
}

/// A numeric limit estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: ExtReal,
    /// Max minus min of the level values across the tail.
    #[serde(serialize_with = "ser_f64")]
    pub spread: f64,
    pub samples: usize,
    pub converged: bool,
    /// Effective spread tolerance used for `converged`.
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Estimate {
    pub fn exact(value: ExtReal) -> Estimate {
        Estimate { value, spread: 0.0, samples: 0, converged: true, tolerance: 0.0, note: None }
    }

    pub fn v(&self) -> f64 {
        self.value.to_f64()
    }
}

fn dini(phi: &LineFunction, t: f64, s: &SamplingSchedule, side: Side) -> Result<Estimate> {
    let base = phi.value(t);
    if base.is_nan() {
        return Err(Error::Evaluation { what: "NaN".into(), at: format!("{t}") });
    }
    if !base.is_finite() {
        return Ok(Estimate::exact(ExtReal::NegInf));
    }
    let levels = tail_levels(s, t)?;
    let mut samples = 0;
    let mut q = |h: f64| {
        let tt = t + h;
        let step = tt - t;
        let v = phi.value(tt);
        if v == f64::INFINITY {
            f64::INFINITY
        } else {
            (v - base) / step
        }
    };
    let mut vals = Vec::with_capacity(levels.len());
    for hi in &levels {
        vals.push(level_extremum(&mut q, *hi, s.rho, s.sub_samples, s.refine, side, &mut samples)?);
    }
    Ok(aggregate(&vals, side, s.tol, s.floor, samples))
}

/// `D_+ phi(t) = liminf_{s -> 0+} (phi(t+s) - phi(t)) / s`.
pub fn lower_right_dini(phi: &LineFunction, t: f64, s: &SamplingSchedule) -> Result<Estimate> {
    dini(phi, t, s, Side::Inf)
}

/// `D^+ phi(t) = limsup_{s -> 0+} (phi(t+s) - phi(t)) / s`.
pub fn upper_right_dini(phi: &LineFunction, t: f64, s: &SamplingSchedule) -> Result<Estimate> {
    dini(phi, t, s, Side::Sup)
}

/// Whether `phi` has a finite right derivative at `t`.
pub fn right_differentiable(phi: &LineFunction, t: f64, s: &SamplingSchedule) -> Result<Verdict> {
    let lo = lower_right_dini(phi, t, s)?;
    let hi = upper_right_dini(phi, t, s)?;
    let ev = format!("D_+ = {}, D^+ = {}", lo.value, hi.value);
    if !(lo.converged && hi.converged) {
        return Ok(Verdict::inconclusive(format!("{ev}; estimates did not converge")));
    }
    match (lo.value, hi.value) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => {
            let tol = s.tol * a.abs().max(b.abs()).max(1.0);
            let gap = (a - b).abs();
            if gap <= tol {
                Ok(Verdict::verified(ev))
            } else if gap > 3.0 * tol {
                Ok(Verdict::falsified(ev))
            } else {
                Ok(Verdict::inconclusive(format!("{ev}; gap {gap:e} between tol and 3 tol")))
            }
        }
        _ => Ok(Verdict::falsified(format!("{ev}; not finite"))),
    }
}

/// `sup - inf` of `phi` over `[a, b]`: a uniform grid of `grid` points,
/// then golden refinement around the extreme grid points.
pub fn oscillation(phi: &LineFunction, a: f64, b: f64, grid: usize) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b}]")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    let h = (b - a) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid).map(|i| if i + 1 == grid { b } else { a + h * i as f64 }).collect();
    let mut vals = Vec::with_capacity(grid);
    for x in &xs {
        let v = phi.value(*x);
        if v.is_nan() {
            return Err(Error::Evaluation { what: "NaN".into(), at: format!("{x}") });
        }
        vals.push(v);
    }
    let (imax, imin) = extreme_indices(&vals);
    let refine = |i: usize, sign: f64| -> f64 {
        let lo = if i == 0 { xs[0] } else { xs[i - 1] };
        let hi = if i + 1 == grid { xs[grid - 1] } else { xs[i + 1] };
        sign * golden_min(|x| sign * phi.value(x), lo, hi, 80).min(sign * vals[i])
    };
    let sup = refine(imax, -1.0);
    let inf = refine(imin, 1.0);
    Ok(sup - inf)
}

fn extreme_indices(v: &[f64]) -> (usize, usize) {
    let (mut imax, mut imin) = (0, 0);
    for (i, x) in v.iter().enumerate() {
        if *x > v[imax] {
            imax = i;
        }
        if *x < v[imin] {
            imin = i;
        }
    }
    (imax, imin)
}

pub(crate) fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.min(fd);
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
        best = best.min(fc).min(fd);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> SamplingSchedule {
        SamplingSchedule::default()
    }

    #[test]
    fn t_sin_inv_t_at_zero() {
        let phi = LineFunction::new("t sin(1/t)", |t| if t == 0.0 { 0.0 } else { t * (1.0 / t).sin() });
        let lo = lower_right_dini(&phi, 0.0, &sched()).unwrap();
        let hi = upper_right_dini(&phi, 0.0, &sched()).unwrap();
        assert!((lo.v() + 1.0).abs() < 1e-3, "{lo:?}");
        assert!((hi.v() - 1.0).abs() < 1e-3, "{hi:?}");
        assert!(lo.converged && hi.converged);
    }

    #[test]
    fn minus_sqrt_at_zero_is_minus_infinity() {
        let phi = LineFunction::new("-sqrt", |t: f64| -t.sqrt()).on(0.0, 1.0);
        let lo = lower_right_dini(&phi, 0.0, &sched()).unwrap();
        assert_eq!(lo.value, ExtReal::NegInf);
        assert!(lo.converged);
    }

    #[test]
    fn abs_at_zero_and_smooth_point() {
        let phi = LineFunction::new("abs", |t: f64| t.abs());
        let lo = lower_right_dini(&phi, 0.0, &sched()).unwrap();
        assert_eq!(lo.value, ExtReal::Finite(1.0));
        assert!(right_differentiable(&phi, 0.0, &sched()).unwrap().is_verified());
        let osc = LineFunction::new("t sin(1/t)", |t| if t == 0.0 { 0.0 } else { t * (1.0 / t).sin() });
        assert!(right_differentiable(&osc, 0.0, &sched()).unwrap().is_falsified());
        let sq = LineFunction::new("t^2", |t: f64| t * t);
        let d = lower_right_dini(&sq, 0.3, &sched()).unwrap();
        assert!((d.v() - 0.6).abs() < 1e-8);
    }

    #[test]
    fn lower_not_above_upper() {
        let phi = LineFunction::new("osc", |t: f64| if t == 0.0 { 0.0 } else { t * (3.0 / t).cos() });
        for t in [0.0, 0.1, 0.37] {
            let lo = lower_right_dini(&phi, t, &sched()).unwrap();
            let hi = upper_right_dini(&phi, t, &sched()).unwrap();
            assert!(lo.value <= hi.value);
        }
    }

    #[test]
    fn oscillation_of_t_sin_inv_t() {
        let phi = LineFunction::new("t sin(1/t)", |t: f64| if t == 0.0 { 0.0 } else { t * (1.0 / t).sin() });
        let w = oscillation(&phi, 0.0, 1.0, 20001).unwrap();
        // max sin(1) at t = 1, min near 1/t = 4.4934
        assert!((w - 1.058_70).abs() < 1e-4, "{w}");
    }

    #[test]
    fn bad_schedule_rejected() {
        let phi = LineFunction::new("id", |t| t);
        let s = SamplingSchedule { rho: 1.5, ..sched() };
        assert!(matches!(lower_right_dini(&phi, 0.0, &s), Err(Error::InvalidSchedule(_))));
    }
}
