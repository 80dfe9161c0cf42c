//! Shared machinery for one-sided limit estimates over geometric step levels.

use crate::dini::{Estimate, SamplingSchedule};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Inf,
    Sup,
}

impl Side {
    #[inline]
    pub(crate) fn better(self, a: f64, b: f64) -> bool {
        match self {
            Side::Inf => a < b,
            Side::Sup => a > b,
        }
    }

    pub(crate) fn worst(self) -> f64 {
        match self {
            Side::Inf => f64::INFINITY,
            Side::Sup => f64::NEG_INFINITY,
        }
    }
}

/// Level tops `t_k` of the tail window, coarse to fine.
pub(crate) fn tail_levels(s: &SamplingSchedule, at: f64) -> Result<Vec<f64>> {
    s.validate()?;
    let cut = s.floor * (at.abs() + 1.0);
    let mut steps = Vec::new();
    let mut t = s.t0;
    for _ in 0..s.steps {
        if t < cut {
            break;
        }
        steps.push(t);
        t *= s.rho;
    }
    if steps.len() < 2 {
        return Err(Error::InvalidSchedule(format!(
            "only {} step(s) above the floor {cut:e}",
            steps.len()
        )));
    }
    let k = steps.len().saturating_sub(s.tail);
    Ok(steps.split_off(k))
}

fn checked(v: f64) -> Result<f64> {
    if v.is_nan() {
        Err(Error::Evaluation { what: "NaN".into(), at: "a sampled quotient".into() })
    } else {
        Ok(v)
    }
}

/// Extremum of `q` over the level `(hi * rho, hi]`, optionally refined by
/// golden-section search in `log s` around the best sub-sample.
pub(crate) fn level_extremum(
    q: &mut dyn FnMut(f64) -> f64,
    hi: f64,
    rho: f64,
    n_sub: usize,
    refine: usize,
    side: Side,
    samples: &mut usize,
) -> Result<f64> {
    let n = n_sub.max(1);
    let ly_hi = hi.ln();
    let ly_lo = (hi * rho).ln();
    let ys: Vec<f64> = (0..n).map(|j| ly_hi + (ly_lo - ly_hi) * j as f64 / n as f64).collect();
    let mut best = side.worst();
    let mut best_j = 0;
    for (j, y) in ys.iter().enumerate() {
        let s = if j == 0 { hi } else { y.exp() };
        let v = checked(q(s))?;
        *samples += 1;
        if j == 0 || side.better(v, best) {
            best = v;
            best_j = j;
        }
    }
    if refine == 0 || !best.is_finite() {
        return Ok(best);
    }
    let a = if best_j == 0 { ly_hi } else { ys[best_j - 1] };
    let b = if best_j + 1 < n { ys[best_j + 1] } else { ly_lo };
    let mut f = |y: f64| -> Result<f64> {
        *samples += 1;
        let v = checked(q(y.exp()))?;
        Ok(match side {
            Side::Inf => v,
            Side::Sup => -v,
        })
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi_y) = (b.min(a), b.max(a));
    let mut c = hi_y - g * (hi_y - lo);
    let mut d = lo + g * (hi_y - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut local = fc.min(fd);
    for _ in 0..refine {
        if fc < fd {
            hi_y = d;
            d = c;
            fd = fc;
            c = hi_y - g * (hi_y - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi_y - lo);
            fd = f(d)?;
        }
        local = local.min(fc).min(fd);
    }
    let local = match side {
        Side::Inf => local,
        Side::Sup => -local,
    };
    Ok(if side.better(local, best) { local } else { best })
}

/// Turns the tail's level extrema into an estimate. The value is the
/// extremum over the finer half of the tail on the requested side; the
/// spread compares it with the coarser half, so a quotient oscillating
/// inside every level still counts as settled.
pub(crate) fn aggregate(levels: &[f64], side: Side, tol: f64, floor: f64, samples: usize) -> Estimate {
    let n = levels.len();
    let mk = |value: ExtReal, spread: f64, converged: bool, tolerance: f64| Estimate {
        value,
        spread,
        samples,
        converged,
        tolerance,
        note: None,
    };
    if levels.iter().all(|v| *v == f64::INFINITY) {
        return mk(ExtReal::PosInf, 0.0, true, tol);
    }
    if levels.iter().all(|v| *v == f64::NEG_INFINITY) {
        return mk(ExtReal::NegInf, 0.0, true, tol);
    }
    if let Some(div) = divergence(levels, floor, tol) {
        return mk(div, f64::INFINITY, true, tol);
    }
    let finest = levels[n - 1];
    if !finest.is_finite() {
        return mk(ExtReal::from(finest), f64::INFINITY, false, tol);
    }
    let ext = |v: &[f64]| {
        v.iter().copied().filter(|x| x.is_finite()).fold(side.worst(), |m, x| if side.better(x, m) { x } else { m })
    };
    let h = n / 2;
    let (coarse, fine) = (ext(&levels[..h]), ext(&levels[h..]));
    let value = fine;
    let spread = if coarse.is_finite() { (coarse - fine).abs() } else { f64::INFINITY };
    let eff = tol * value.abs().max(1.0);
    mk(ExtReal::Finite(value), spread, spread <= eff, eff)
}

/// Detects level values running off to an infinity: either strictly
/// monotone with increments that do not shrink and a drift well beyond the
/// tolerance, or beyond `1 / floor`.
fn divergence(levels: &[f64], floor: f64, tol: f64) -> Option<ExtReal> {
    let n = levels.len();
    if levels.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let finest = levels[n - 1];
    let big = 1.0 / floor;
    let tail_big = levels[n.saturating_sub(2)..].iter().all(|v| v.abs() > big);
    if tail_big && levels[n - 2].signum() == finest.signum() {
        return Some(if finest > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf });
    }
    if n < 4 {
        return None;
    }
    let inc: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let up = inc.iter().all(|d| *d > 0.0);
    let down = inc.iter().all(|d| *d < 0.0);
    if !(up || down) {
        return None;
    }
    let h = inc.len() / 2;
    let first: f64 = inc[..h].iter().map(|d| d.abs()).sum();
    let second: f64 = inc[inc.len() - h..].iter().map(|d| d.abs()).sum();
    // drift within the tolerance is roundoff, not divergence
    if (finest - levels[0]).abs() <= 10.0 * tol * levels[0].abs().max(1.0) {
        return None;
    }
    if second >= 0.5 * first {
        Some(if up { ExtReal::PosInf } else { ExtReal::NegInf })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_levels_converge() {
        let e = aggregate(&[1.0, 1.0, 1.0, 1.0], Side::Inf, 1e-3, 1e-9, 4);
        assert_eq!(e.value, ExtReal::Finite(1.0));
        assert!(e.converged);
    }

    #[test]
    fn halving_increments_are_not_divergence() {
        let lv: Vec<f64> = (0..12).map(|k| 1.0 + 0.5f64.powi(k)).collect();
        let e = aggregate(&lv, Side::Sup, 1e-3, 1e-9, 12);
        assert!(e.value.is_finite());
    }

    #[test]
    fn growing_levels_diverge() {
        let lv: Vec<f64> = (0..12).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
        assert_eq!(aggregate(&lv, Side::Sup, 1e-3, 1e-9, 12).value, ExtReal::PosInf);
        let lv: Vec<f64> = (0..12).map(|k| -(k as f64)).collect();
        assert_eq!(aggregate(&lv, Side::Sup, 1e-3, 1e-9, 12).value, ExtReal::NegInf);
    }

    #[test]
    fn golden_refinement_finds_interior_minimum() {
        let mut n = 0;
        let mut q = |s: f64| (s.ln() - (0.01f64).ln() + 0.3).powi(2);
        let v = level_extremum(&mut q, 0.01, 0.5, 4, 60, Side::Inf, &mut n).unwrap();
        assert!(v < 1e-12);
    }
}
