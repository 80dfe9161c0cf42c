use std::sync::Arc;

use nsatk::catalog::{Catalog, Segment, Tag};
use nsatk::dini::{lower_right_dini, upper_right_dini};
use nsatk::hk::hk_integrate;
use nsatk::{ExtReal, LineFunction, SamplingSchedule};
use proptest::prelude::*;

fn ext() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        Just(ExtReal::NegInf),
        Just(ExtReal::PosInf),
        (-1e6f64..1e6).prop_map(ExtReal::Finite),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ext_order_matches_f64(a in ext(), b in ext()) {
        prop_assert_eq!(a.cmp(&b), a.to_f64().total_cmp(&b.to_f64()));
        prop_assert_eq!(-(-a), a);
    }

    #[test]
    fn ext_json_roundtrip(a in ext()) {
        let s = serde_json::to_string(&a).unwrap();
        let b: ExtReal = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn restriction_reparametrizes(t in 0.0f64..1.0, b0 in -1.0f64..0.0, d in 0.1f64..1.0, b1 in -1.0f64..0.0, d1 in 0.1f64..1.0) {
        let cat = Catalog::builtin();
        let e = cat.get("max_affine_2d").unwrap();
        let seg = Segment::new(vec![b0, b1], vec![d, d1]);
        let phi = e.restrict(&seg).unwrap();
        prop_assert_eq!(phi.value(t), e.value(&seg.point(t)));
        let rev = e.restrict(&seg.reversed()).unwrap();
        prop_assert!((rev.value(1.0 - t) - phi.value(t)).abs() <= 1e-12);
    }

    #[test]
    fn convex_entries_pass_midpoint_test(s in 0.0f64..1.0, r in 0.0f64..1.0, k in 0usize..64) {
        let cat = Catalog::builtin();
        let convex: Vec<_> = cat.iter().filter(|e| e.has_tag(Tag::Convex)).cloned().collect();
        let e = &convex[k % convex.len()];
        let x: Vec<f64> = e.probe_box.iter().map(|(lo, hi)| lo + s * (hi - lo)).collect();
        let y: Vec<f64> = e.probe_box.iter().map(|(lo, hi)| hi - r * (hi - lo)).collect();
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let (fx, fy, fm) = (e.value(&x), e.value(&y), e.value(&m));
        prop_assert!(fm <= 0.5 * (fx + fy) + 1e-12, "{}: {fm} > mean of {fx}, {fy}", e.name);
    }

    #[test]
    fn hk_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.1f64..2.0) {
        let phi = |t: f64| if t == 0.0 { 0.0 } else { t.abs().powf(-0.5) };
        let psi = move |t: f64| (c * t).cos();
        let comb = move |t: f64| a * phi(t) + b * psi(t);
        let tol = 1e-7;
        let ip = hk_integrate(&phi, -1.0, 1.0, &[0.0], tol).unwrap().value;
        let iq = hk_integrate(&psi, -1.0, 1.0, &[], tol).unwrap().value;
        let ic = hk_integrate(&comb, -1.0, 1.0, &[0.0], tol).unwrap().value;
        prop_assert!((ic - a * ip - b * iq).abs() <= 10.0 * tol * (1.0 + a.abs() + b.abs()), "{ic} vs {}", a * ip + b * iq);
    }

    #[test]
    fn lower_dini_not_above_upper(t in 0.0f64..0.9, w in 1.0f64..20.0) {
        let phi = LineFunction::new("osc", move |s: f64| (s - 0.3).abs() + 0.1 * (w * s).sin());
        let s = SamplingSchedule::default();
        let lo = lower_right_dini(&phi, t, &s).unwrap();
        let hi = upper_right_dini(&phi, t, &s).unwrap();
        prop_assert!(lo.value <= hi.value);
    }
}

#[test]
fn shifted_entry_differs_by_constant() {
    let cat = Catalog::builtin();
    let e = cat.get("neg_sqrt_01").unwrap();
    let f = Arc::new(e.shifted("shifted", 2.5));
    for x in [0.0, 0.25, 1.0] {
        assert_eq!(f.value(&[x]) - e.value(&[x]), 2.5);
    }
    assert_eq!(f.value(&[1.5]), f64::INFINITY);
}
