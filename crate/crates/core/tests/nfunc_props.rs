use curvwell::model::{quartic_slope_max, Potential};
use curvwell::nfunc::{truncation_constants, NFunctionSpec};
use proptest::prelude::*;

const LEVELS: [f64; 4] = [0.5, 1.0, 3.0, 10.0];

// independent quadrature / closed-form oracle (scipy), L = 1
const X1: f64 = 0.08838834764831845;
const Y1: f64 = 0.6187184335382291;
const PHI_SQRT_1_5: f64 = 0.6408155204503087;
const BIG_PHI_AT: [(f64, f64); 3] = [
    (1.2, 0.562475941016124),
    (1.5, 0.815643974609208),
    (3.0, 2.9038186878007313),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn frozen_constants_for_level_one() {
    let (x, y) = truncation_constants(1.0).unwrap();
    assert!(rel(x, X1) <= 1e-15);
    assert!(rel(y, Y1) <= 1e-15);
    assert!(rel(1.0 / y, 1.616244071283537) <= 1e-15);
    let s = NFunctionSpec::truncated(1.0).unwrap();
    assert!(rel(s.phi(1.5_f64.sqrt()).unwrap(), PHI_SQRT_1_5) <= 1e-14);
    for (t, want) in BIG_PHI_AT {
        assert!(rel(s.big_phi(t).unwrap(), want) <= 1e-13, "Phi({t})");
    }
}

#[test]
fn knots_are_c1_and_y_is_exact() {
    for l in LEVELS {
        let (x, y) = truncation_constants(l).unwrap();
        assert_eq!(y, (4.0 * l + 3.0) * x);
        let s = NFunctionSpec::truncated(l).unwrap();
        for knot in [l, l + 1.0] {
            let e = 1e-9 * knot;
            let (below, above) = (s.phi_hat(knot - e), s.phi_hat(knot + e));
            assert!(rel(below, above) <= 1e-8, "value at {knot}");
            // one-sided derivative formulas agree at the knot itself
            let left = if knot == l { -0.5 * (1.0 + l).powf(-1.5) } else { 0.0 };
            assert!((s.phi_hat_prime(knot) - left).abs() <= 1e-12 * left.abs().max(1e-3));
            let quad = |u: f64| x * (u - l - 1.0).powi(2) + y;
            let dquad = 2.0 * x * (knot - l - 1.0);
            assert!(rel(quad(knot), s.phi_hat(knot)) <= 1e-12);
            assert!((dquad - left).abs() <= 1e-12 * left.abs().max(1.0));
        }
    }
}

#[test]
fn branch_differences_match_direct_subtraction() {
    let s = NFunctionSpec::truncated(1.0).unwrap();
    for (a, b) in [(0.1, 0.3), (1.2, 1.7), (2.5, 4.0), (0.5, 1.5), (0.9, 3.0)] {
        let d = s.big_phi_sq_diff(a, b, b - a);
        assert!((d - (s.big_phi_sq(b) - s.big_phi_sq(a))).abs() <= 1e-15, "({a}, {b})");
    }
    let v = Potential::quartic(0.1).unwrap();
    for (a, b) in [(0.0, 0.05), (0.099, 0.1), (0.03, 0.02)] {
        let d = v.value_diff(a, b, b - a);
        assert!((d - (v.value(b) - v.value(a))).abs() <= 1e-18);
    }
}

#[test]
fn quartic_slope_is_uniformly_bounded() {
    let bound = 8.0 / (3.0 * 3.0_f64.sqrt());
    assert!(rel(bound, 1.539600717839002) <= 1e-15);
    for alpha in [0.01, 0.3, 0.999] {
        assert!(quartic_slope_max(alpha) <= bound + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn lemma_bounds_hold(li in 0usize..4, t in 0.0f64..20.0) {
        let l = LEVELS[li];
        let s = NFunctionSpec::truncated(l).unwrap();
        let (_, y) = truncation_constants(l).unwrap();
        let phi = s.phi(t).unwrap();
        prop_assert!(y <= phi && phi <= 1.0);
        let big = s.big_phi(t).unwrap();
        let half = 0.5 * t * t;
        prop_assert!(y * half <= big * (1.0 + 1e-14) && big <= half * (1.0 + 1e-14));
    }

    #[test]
    fn big_phi_is_convex_and_flux_increasing(li in 0usize..4, a in 0.0f64..15.0, b in 0.0f64..15.0) {
        let s = NFunctionSpec::truncated(LEVELS[li]).unwrap();
        let m = 0.5 * (a + b);
        let mid = s.big_phi(m).unwrap();
        let chord = 0.5 * (s.big_phi(a).unwrap() + s.big_phi(b).unwrap());
        prop_assert!(mid <= chord * (1.0 + 1e-13) + 1e-300);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi - lo > 1e-9 {
            prop_assert!(s.phi(lo).unwrap() * lo < s.phi(hi).unwrap() * hi);
        }
    }

    #[test]
    fn big_phi_agrees_with_quadrature(li in 0usize..4, t in 0.0f64..6.0) {
        let s = NFunctionSpec::truncated(LEVELS[li]).unwrap();
        // composite Simpson on int_0^t phi(r) r dr with knots as breakpoints
        let l = LEVELS[li];
        let mut pts = vec![0.0, t];
        for k in [l.sqrt(), (l + 1.0).sqrt()] {
            if k < t {
                pts.push(k);
            }
        }
        pts.sort_by(f64::total_cmp);
        let f = |r: f64| s.phi(r).unwrap() * r;
        let mut q = 0.0;
        for w in pts.windows(2) {
            let n = 4096;
            let h = (w[1] - w[0]) / n as f64;
            let mut acc = f(w[0]) + f(w[1]);
            for i in 1..n {
                acc += f(w[0] + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            q += acc * h / 3.0;
        }
        let big = s.big_phi(t).unwrap();
        prop_assert!((big - q).abs() <= 1e-11 * big.max(1e-3), "t = {}: {} vs {}", t, big, q);
    }

    #[test]
    fn potential_family_slope_bound(alpha in 1e-6f64..1.0, x in -1.0f64..1.0) {
        let v = Potential::quartic(alpha).unwrap();
        prop_assert!(v.d1(alpha * x).abs() <= 8.0 / (3.0 * 3.0_f64.sqrt()) + 1e-12);
    }
}

#[test]
fn power_law_is_singular_at_zero() {
    let s = NFunctionSpec::power_law(1.5).unwrap();
    assert!(matches!(s.phi(0.0), Err(curvwell::Error::Singularity(_))));
    assert!(s.phi(-1.0).is_err());
    assert!(NFunctionSpec::power_law(2.5).is_err());
}
