use std::sync::Arc;

use super::{CatalogEntry, Domain, Segment, Tag};
use crate::subdiff::{SubdiffOracle, SubgradientSet};

const INF: f64 = f64::INFINITY;

const CONVEX_LIP: &[Tag] = &[
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

const CONTINUOUS_NAT: &[Tag] = &[
    Tag::Lsc,
    Tag::ContinuousOnDomain,
    Tag::LcNatN,
    Tag::LacgStarNatA,
    Tag::LacgNatA,
    Tag::AcgStarSegments,
];

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn point(v: f64) -> SubgradientSet {
    SubgradientSet::Interval { lo: v, hi: v }
}

fn origin_1d() -> Vec<Vec<f64>> {
    vec![vec![0.0]]
}

pub(super) fn all() -> Vec<CatalogEntry> {
    let abs = abs();
    let mut v = vec![
        linear(),
        abs.clone(),
        neg_abs(),
        sqrt_abs(),
        neg_sqrt_abs(),
        neg_sqrt_01(),
        x_sin_inv(),
        t2_sin_inv_t2(),
        max_affine_2d(),
        indicator_01(),
        identity(),
        neg_identity(),
    ];
    v.push(abs.shifted("abs_plus5", 5.0).describe("|x| + 5"));
    v.push(abs.plus_linear("abs_plus_half_x", vec![0.5]).describe("|x| + x/2"));
    v.extend(integrands());
    v
}

fn linear() -> CatalogEntry {
    CatalogEntry::new("linear", 1, Arc::new(|x| 3.0 * x[0]))
        .describe("3x")
        .with_tags(CONVEX_LIP)
        .with_deriv(Arc::new(|_, u| 3.0 * u[0]))
        .with_subdiff(SubdiffOracle::closed_form("Moreau-Rockafellar", |_| point(3.0)))
}

fn identity() -> CatalogEntry {
    CatalogEntry::new("identity", 1, Arc::new(|x| x[0]))
        .describe("x")
        .with_domain(Domain::Box(vec![(0.0, 1.0)]))
        .with_probe_box(vec![(0.0, 1.0)])
        .with_tags(CONVEX_LIP)
        .with_deriv(Arc::new(|x, u| {
            if (x[0] == 0.0 && u[0] < 0.0) || (x[0] == 1.0 && u[0] > 0.0) {
                INF
            } else {
                u[0]
            }
        }))
}

fn neg_identity() -> CatalogEntry {
    CatalogEntry::new("neg_identity", 1, Arc::new(|x| -x[0]))
        .describe("-x")
        .with_domain(Domain::Box(vec![(0.0, 1.0)]))
        .with_tags(CONVEX_LIP)
        .with_deriv(Arc::new(|x, u| {
            if (x[0] == 0.0 && u[0] < 0.0) || (x[0] == 1.0 && u[0] > 0.0) {
                INF
            } else {
                -u[0]
            }
        }))
}

fn abs() -> CatalogEntry {
    CatalogEntry::new("abs", 1, Arc::new(|x| x[0].abs()))
        .describe("|x|")
        .with_tags(CONVEX_LIP)
        .with_deriv(Arc::new(|x, u| {
            if x[0] > 0.0 {
                u[0]
            } else if x[0] < 0.0 {
                -u[0]
            } else {
                u[0].abs()
            }
        }))
        .with_subdiff(SubdiffOracle::closed_form("Moreau-Rockafellar", |x| {
            if x[0] == 0.0 {
                SubgradientSet::Interval { lo: -1.0, hi: 1.0 }
            } else {
                point(sgn(x[0]))
            }
        }))
}

fn neg_abs() -> CatalogEntry {
    CatalogEntry::new("neg_abs", 1, Arc::new(|x| -x[0].abs()))
        .describe("-|x|")
        .with_tags(&[
            Tag::LocallyLipschitz,
            Tag::Lsc,
            Tag::ContinuousOnDomain,
            Tag::Semismooth,
            Tag::LcNatN,
            Tag::LacgStarNatA,
            Tag::LacgNatA,
            Tag::AcgStarSegments,
        ])
        .with_deriv(Arc::new(|x, u| {
            if x[0] > 0.0 {
                -u[0]
            } else if x[0] < 0.0 {
                u[0]
            } else {
                -u[0].abs()
            }
        }))
        .with_subdiff(SubdiffOracle::closed_form("Clarke", |x| {
            if x[0] == 0.0 {
                SubgradientSet::Interval { lo: -1.0, hi: 1.0 }
            } else {
                point(-sgn(x[0]))
            }
        }))
}

fn sqrt_abs() -> CatalogEntry {
    CatalogEntry::new("sqrt_abs", 1, Arc::new(|x| x[0].abs().sqrt()))
        .describe("sqrt(|x|)")
        .with_tags(CONTINUOUS_NAT)
        .with_singular(origin_1d())
        .with_exceptions(origin_1d())
        .with_deriv(Arc::new(|x, u| {
            if x[0] != 0.0 {
                sgn(x[0]) * u[0] / (2.0 * x[0].abs().sqrt())
            } else if u[0] != 0.0 {
                INF
            } else {
                0.0
            }
        }))
        .with_subdiff(SubdiffOracle::closed_form("Frechet", |x| {
            if x[0] == 0.0 {
                SubgradientSet::Interval { lo: -INF, hi: INF }
            } else {
                point(sgn(x[0]) / (2.0 * x[0].abs().sqrt()))
            }
        }))
}

fn neg_sqrt_abs() -> CatalogEntry {
    CatalogEntry::new("neg_sqrt_abs", 1, Arc::new(|x| -x[0].abs().sqrt()))
        .describe("-sqrt(|x|)")
        .with_tags(CONTINUOUS_NAT)
        .with_singular(origin_1d())
        .with_exceptions(origin_1d())
        .with_deriv(Arc::new(|x, u| {
            if x[0] != 0.0 {
                -sgn(x[0]) * u[0] / (2.0 * x[0].abs().sqrt())
            } else if u[0] != 0.0 {
                -INF
            } else {
                0.0
            }
        }))
        .with_subdiff(SubdiffOracle::closed_form("Frechet", |x| {
            if x[0] == 0.0 {
                SubgradientSet::Empty
            } else {
                point(-sgn(x[0]) / (2.0 * x[0].abs().sqrt()))
            }
        }))
}

fn neg_sqrt_01() -> CatalogEntry {
    CatalogEntry::new("neg_sqrt_01", 1, Arc::new(|x| -x[0].sqrt()))
        .describe("-sqrt(x) on [0, 1], +inf elsewhere")
        .with_domain(Domain::Box(vec![(0.0, 1.0)]))
        .with_tags(&[
            Tag::Convex,
            Tag::Lsc,
            Tag::ContinuousOnDomain,
            Tag::LscNatNat,
            Tag::LcNatN,
            Tag::LacgStarNatA,
            Tag::LacgNatA,
            Tag::AcgStarSegments,
        ])
        .with_singular(origin_1d())
        .with_exceptions(origin_1d())
        .with_deriv(Arc::new(|x, u| {
            let (x, u) = (x[0], u[0]);
            if u == 0.0 {
                0.0
            } else if (x == 0.0 && u < 0.0) || (x == 1.0 && u > 0.0) {
                INF
            } else if x == 0.0 {
                -INF
            } else {
                -u / (2.0 * x.sqrt())
            }
        }))
        .with_subdiff(SubdiffOracle::closed_form("Moreau-Rockafellar", |x| {
            let x = x[0];
            if !(0.0..=1.0).contains(&x) || x == 0.0 {
                SubgradientSet::Empty
            } else if x == 1.0 {
                SubgradientSet::Interval { lo: -0.5, hi: INF }
            } else {
                point(-0.5 / x.sqrt())
            }
        }))
}

fn x_sin_inv() -> CatalogEntry {
    CatalogEntry::new(
        "x_sin_inv",
        1,
        Arc::new(|x| if x[0] == 0.0 { 0.0 } else { x[0] * (1.0 / x[0]).sin() }),
    )
    .describe("x sin(1/x), 0 at 0")
    .with_tags(CONTINUOUS_NAT)
    .with_singular(origin_1d())
    .with_exceptions(origin_1d())
    .with_segment(Segment::new(vec![0.0], vec![1.0]))
    .with_deriv(Arc::new(|x, u| {
        let (x, u) = (x[0], u[0]);
        if x == 0.0 {
            -u.abs()
        } else {
            u * ((1.0 / x).sin() - (1.0 / x).cos() / x)
        }
    }))
    .with_subdiff(SubdiffOracle::closed_form("Frechet", |x| {
        let x = x[0];
        if x == 0.0 {
            SubgradientSet::Empty
        } else {
            point((1.0 / x).sin() - (1.0 / x).cos() / x)
        }
    }))
}

fn t2_sin_inv_t2() -> CatalogEntry {
    CatalogEntry::new(
        "t2_sin_inv_t2",
        1,
        Arc::new(|x| if x[0] == 0.0 { 0.0 } else { x[0] * x[0] * (1.0 / (x[0] * x[0])).sin() }),
    )
    .describe("x^2 sin(1/x^2), 0 at 0")
    .with_tags(CONTINUOUS_NAT)
    .with_singular(origin_1d())
    .with_exceptions(origin_1d())
    .with_segment(Segment::new(vec![0.0], vec![1.0]))
    .with_deriv(Arc::new(|x, u| u[0] * t2_sin_inv_t2_slope(x[0])))
    .with_subdiff(SubdiffOracle::closed_form("Frechet", |x| point(t2_sin_inv_t2_slope(x[0]))))
}

fn t2_sin_inv_t2_slope(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        let y = 1.0 / (x * x);
        2.0 * x * y.sin() - 2.0 * y.cos() / x
    }
}

fn x_sin_inv_slope(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (1.0 / x).sin() - (1.0 / x).cos() / x
    }
}

const AFFINE_2D: [([f64; 2], f64); 3] = [([1.0, 0.0], 0.0), ([-1.0, 1.0], 0.0), ([0.0, -1.0], 0.0)];

fn affine_values(x: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, (g, b)) in out.iter_mut().zip(AFFINE_2D.iter()) {
        *o = g[0] * x[0] + g[1] * x[1] + b;
    }
    out
}

fn active_gradients(x: &[f64]) -> Vec<[f64; 2]> {
    let vals = affine_values(x);
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (1.0 + m.abs());
    AFFINE_2D
        .iter()
        .zip(vals)
        .filter(|(_, v)| *v >= m - tol)
        .map(|((g, _), _)| *g)
        .collect()
}

fn max_affine_2d() -> CatalogEntry {
    CatalogEntry::new(
        "max_affine_2d",
        2,
        Arc::new(|x| affine_values(x).into_iter().fold(f64::NEG_INFINITY, f64::max)),
    )
    .describe("max(x1, -x1 + x2, -x2)")
    .with_tags(CONVEX_LIP)
    .with_segment(Segment::new(vec![-1.0, -0.5], vec![2.0, 1.0]))
    .with_deriv(Arc::new(|x, u| {
        active_gradients(x)
            .iter()
            .map(|g| g[0] * u[0] + g[1] * u[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }))
    .with_subdiff(SubdiffOracle::closed_form("Moreau-Rockafellar", |x| {
        SubgradientSet::Hull(active_gradients(x).iter().map(|g| g.to_vec()).collect())
    }))
}

fn indicator_01() -> CatalogEntry {
    CatalogEntry::new("indicator_01", 1, Arc::new(|_| 0.0))
        .describe("0 on [0, 1], +inf elsewhere")
        .with_domain(Domain::Box(vec![(0.0, 1.0)]))
        .with_tags(&[
            Tag::Convex,
            Tag::Lsc,
            Tag::ContinuousOnDomain,
            Tag::LscNatNat,
            Tag::LcNatN,
            Tag::LacgStarNatA,
            Tag::LacgNatA,
            Tag::AcgStarSegments,
        ])
        .with_deriv(Arc::new(|x, u| {
            if (x[0] == 0.0 && u[0] < 0.0) || (x[0] == 1.0 && u[0] > 0.0) {
                INF
            } else {
                0.0
            }
        }))
        .with_subdiff(SubdiffOracle::closed_form("Moreau-Rockafellar", |x| {
            let x = x[0];
            if !(0.0..=1.0).contains(&x) {
                SubgradientSet::Empty
            } else if x == 0.0 {
                SubgradientSet::Interval { lo: -INF, hi: 0.0 }
            } else if x == 1.0 {
                SubgradientSet::Interval { lo: 0.0, hi: INF }
            } else {
                point(0.0)
            }
        }))
}

/// Derivatives used as integrands. Values at the singular point are arbitrary.
fn integrands() -> Vec<CatalogEntry> {
    let unit = vec![(0.0, 1.0)];
    vec![
        CatalogEntry::new("t2_sin_inv_t2_deriv", 1, Arc::new(|x| t2_sin_inv_t2_slope(x[0])))
            .describe("2x sin(1/x^2) - (2/x) cos(1/x^2), 0 at 0")
            .with_singular(origin_1d())
            .with_probe_box(unit.clone())
            .with_segment(Segment::new(vec![0.0], vec![1.0])),
        CatalogEntry::new("x_sin_inv_deriv", 1, Arc::new(|x| x_sin_inv_slope(x[0])))
            .describe("sin(1/x) - cos(1/x)/x, 0 at 0")
            .with_singular(origin_1d())
            .with_probe_box(unit.clone())
            .with_segment(Segment::new(vec![0.0], vec![1.0])),
        CatalogEntry::new(
            "neg_half_inv_sqrt",
            1,
            Arc::new(|x| if x[0] == 0.0 { 0.0 } else { -0.5 / x[0].sqrt() }),
        )
        .describe("-1/(2 sqrt(x)) on [0, 1], 0 at 0")
        .with_domain(Domain::Box(unit))
        .with_singular(origin_1d()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;

    #[test]
    fn required_entries_present() {
        let c = Catalog::builtin();
        for n in [
            "linear",
            "abs",
            "neg_abs",
            "sqrt_abs",
            "neg_sqrt_abs",
            "neg_sqrt_01",
            "x_sin_inv",
            "t2_sin_inv_t2",
            "max_affine_2d",
            "indicator_01",
            "t2_sin_inv_t2_deriv",
            "abs_plus5",
        ] {
            assert!(c.get(n).is_ok(), "{n}");
        }
    }

    #[test]
    fn values_and_domains() {
        let c = Catalog::builtin();
        let e = c.get("neg_sqrt_01").unwrap();
        assert_eq!(e.value(&[0.25]), -0.5);
        assert_eq!(e.value(&[-0.1]), INF);
        assert_eq!(c.get("indicator_01").unwrap().value(&[2.0]), INF);
        assert_eq!(c.get("max_affine_2d").unwrap().value(&[0.0, 0.0]), 0.0);
        assert_eq!(c.get("abs_plus5").unwrap().value(&[-2.0]), 7.0);
        assert_eq!(c.get("abs_plus_half_x").unwrap().value(&[-2.0]), 1.0);
    }

    #[test]
    fn max_affine_directional_derivative_is_max_of_active_slopes() {
        let c = Catalog::builtin();
        let e = c.get("max_affine_2d").unwrap();
        // all three pieces are active at the origin
        let u = [0.3, -0.7];
        let brute = (e.value(&[1e-9 * u[0], 1e-9 * u[1]]) - e.value(&[0.0, 0.0])) / 1e-9;
        let oracle = e.deriv_oracle(&[0.0, 0.0], &u).unwrap();
        assert!((oracle - 0.7).abs() < 1e-15);
        assert!((brute - oracle).abs() < 1e-6);
    }

    #[test]
    fn eval_never_negative_infinity_on_probes() {
        let c = Catalog::builtin();
        for e in c.iter() {
            for i in 0..=40 {
                let s = -2.0 + 4.0 * i as f64 / 40.0;
                let x = vec![s; e.dim];
                let v = e.eval(&x).unwrap();
                assert!(v > crate::extreal::ExtReal::NegInf, "{} at {s}", e.name);
            }
        }
    }
}
