use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use locpd::catalog::catalog;
use locpd::extension::*;
use locpd::measures::{table, QuadSpec};
use locpd::mercer::{discretize, spectrum};
use locpd::quadrature::{gl, Rule};

fn f2_ext() -> SplineExtension {
    polya_spline(&catalog("F2").unwrap(), 2.0, SplineMode::ToZero).unwrap()
}

fn f3_ext() -> SplineExtension {
    polya_spline(&catalog("F3").unwrap(), 2.0, SplineMode::SingleSegment).unwrap()
}

#[test]
fn f2_extension_is_the_three_piece_function() {
    let e = f2_ext();
    for x in [-1.9f64, -0.7, -0.3, 0.0, 0.1, 0.49, 0.5, 1.2, 1.99, 2.0, 3.5] {
        let t = x.abs();
        let want = if t < 0.5 {
            1.0 - t
        } else if t < 2.0 {
            (2.0 - t) / 3.0
        } else {
            0.0
        };
        assert!((e.eval(x) - want).abs() < 1e-15, "x = {x}");
    }
}

#[test]
fn f3_extension_matches_exponential_then_line() {
    let e = f3_ext();
    let em1 = (-1f64).exp();
    for x in [0.0, 0.4, 0.99, 1.0, 1.5, 1.999, 2.0, 2.5] {
        let want = if x < 1.0 {
            (-x as f64).exp()
        } else if x < 2.0 {
            em1 * (2.0 - x)
        } else {
            0.0
        };
        assert!((e.eval(x) - want).abs() < 1e-15);
        assert_eq!(e.eval(-x), e.eval(x));
    }
    assert!((e.slopes()[0] + em1).abs() < 1e-15);
    assert_eq!(e.core_kind, CoreKind::Exponential);
}

#[test]
fn construction_errors() {
    let f1 = catalog("F1").unwrap();
    // the tangent at a = 1 reaches zero at x = 2
    assert!(polya_spline(&f1, 1.5, SplineMode::SingleSegment).is_err());
    assert!(polya_spline(&f1, 2.0, SplineMode::SingleSegment).is_ok());
    assert!(polya_spline(&f1, 1.0, SplineMode::ToZero).is_err());
    assert!(polya_spline(&catalog("e1").unwrap(), 1.0, SplineMode::ToZero).is_err());
}

#[test]
fn convexity_verdicts() {
    let convex = |e: &SplineExtension| convexity_check(e, &convexity_grid(e, 200)).convex_on_positive;
    assert!(convex(&f3_ext()));
    assert!(convex(&f2_ext()));
    let f1 = polya_spline(&catalog("F1").unwrap(), 2.0, SplineMode::SingleSegment).unwrap();
    let f4 = polya_spline(&catalog("F4").unwrap(), 0.75, SplineMode::SingleSegment).unwrap();
    let r = convexity_check(&f1, &convexity_grid(&f1, 200));
    assert!(!r.convex_on_positive && r.violation_count > 0 && !r.violations.is_empty());
    assert!(!convex(&f4));
}

#[test]
fn density_of_f2_extension_matches_closed_form() {
    let e = f2_ext();
    assert!((e.density(0.0) - 0.238_732_414_637_843).abs() < 1e-15);
    for k in 1..60 {
        let l = 0.21 * k as f64;
        let want = (3.0 - 2.0 * (l / 2.0).cos() - (2.0 * l).cos()) / (3.0 * PI * l * l);
        assert!((e.density(l) - want).abs() < 1e-13);
    }
}

/// Direct quadrature of (1/π) ∫_0^c cos(λy) F_ex(y) dy.
fn density_oracle(e: &SplineExtension, l: f64) -> f64 {
    let mut br = vec![0.0];
    br.extend(e.knots.iter().copied());
    let rule = gl(64);
    let mut s = 0.0;
    for w in br.windows(2) {
        let k = 200;
        let h = (w[1] - w[0]) / k as f64;
        for i in 0..k {
            let a = w[0] + h * i as f64;
            s += rule.integrate(a, a + h, |y| (l * y).cos() * e.eval(y));
        }
    }
    s / PI
}

#[test]
fn densities_agree_with_direct_quadrature() {
    let cases = [
        f3_ext(),
        polya_spline(&catalog("F5").unwrap(), 2.0, SplineMode::SingleSegment).unwrap(),
        polya_spline(&catalog("F4").unwrap(), 0.75, SplineMode::SingleSegment).unwrap(),
    ];
    for e in &cases {
        for l in [0.0, 0.5, 3.3, 8.377, 40.0] {
            assert!((e.density(l) - density_oracle(e, l)).abs() < 1e-11, "{} λ={l}", e.base);
        }
    }
}

#[test]
fn positivity_verdicts() {
    for e in [f2_ext(), f3_ext()] {
        let d = extension_density(&e, &default_lambda_grid(e.c));
        assert!(pd_verify(&d, 1e-9), "{}", e.base);
        assert!(d.analytic);
    }
    let f4 = polya_spline(&catalog("F4").unwrap(), 0.75, SplineMode::SingleSegment).unwrap();
    let d = extension_density(&f4, &default_lambda_grid(f4.c));
    assert!(!pd_verify(&d, 1e-9));
    assert!(!d.analytic);
    // the oracle sees the same negative value
    assert!(density_oracle(&f4, d.argmin) < -1e-3);
}

#[test]
fn grid_spacing_is_fine_enough() {
    let g = default_lambda_grid(2.0);
    assert!(g.windows(2).all(|w| (w[1] - w[0] - PI / 8.0).abs() < 1e-12));
    assert!(g.last().unwrap() >= &100.0);
    assert_eq!(g.len() % 2, 1);
}

#[test]
fn inverse_transform_reproduces_extension() {
    for e in [f2_ext(), f3_ext()] {
        for k in 0..=16 {
            let x = -e.c + 2.0 * e.c * k as f64 / 16.0;
            let (v, rem) = e.inverse_transform(x, 2000.0);
            assert!((v - e.eval(x)).abs() < 1e-5, "{} x={x}: {v} vs {}", e.base, e.eval(x));
            assert!(rem < 1e-5);
        }
        let (m, _) = e.inverse_transform(0.0, 2000.0);
        assert!((m - 1.0).abs() < 1e-6);
    }
}

#[test]
fn tail_constant_bounds_the_density() {
    for e in [f2_ext(), f3_ext()] {
        let c = e.tail_constant();
        for k in 1..400 {
            let l = 0.5 * k as f64;
            assert!(e.density(l).abs() <= c / (l * l) + 1e-15);
        }
    }
}

#[test]
fn sine_integral_reference_values() {
    // Si(1), Si(π) and Si(10) to 15 digits
    assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
    assert!((sine_integral(PI) - 1.851_937_051_982_466).abs() < 1e-14);
    assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-14);
    assert!((sine_integral(-2.5) + sine_integral(2.5)).abs() < 1e-16);
    assert!((sine_integral(1e6) - PI / 2.0).abs() < 2e-6);
}

#[test]
fn shannon_partial_sums_approach_one() {
    for l in [0.3, 2.7, 10.5, -4.0, 7.0] {
        let s = shannon_partial_sum(l, 4000);
        assert!((s - 1.0).norm() < 1e-3, "λ={l}: {s}");
    }
    // agrees with the term-by-term sum
    let l = 2.7;
    let direct: Complex64 = (-50..=50).map(|n| sha(PI * (l - n as f64))).sum();
    assert!((shannon_partial_sum(l, 50) - direct).norm() < 1e-13);
}

#[test]
fn shannon_residual_shrinks_with_the_cutoff() {
    let f3 = catalog("F3").unwrap();
    let r1 = shannon_ext_check(&table::mu3(), &f3, &[0.0], 128, 1e-3).unwrap();
    let r2 = shannon_ext_check(&table::mu3(), &f3, &[0.0], 512, 1e-3).unwrap();
    let ratio = r1.max_residual / r2.max_residual;
    assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    assert!(r1.truncation_dominated);
    assert!(r2.n_tail_bound >= r2.max_residual);
}

#[test]
fn shannon_rejects_the_wrong_measure() {
    let f3 = catalog("F3").unwrap();
    let r = shannon_ext_check(&table::mu5(), &f3, &[0.25, 0.5], 256, 1e-3).unwrap();
    assert!(!r.in_ext);
    // the residual is the gap between e^{-x²/2} and e^{-|x|}
    let gap = ((-0.125f64).exp() - (-0.5f64).exp()).abs();
    assert!((r.max_residual - gap).abs() < 0.05 * gap);
    assert!(shannon_ext_check(&table::mu3(), &f3, &[1.0], 64, 1e-3).is_err());
}

fn frame_oracle(n: i64, x: f64) -> Complex64 {
    let rule = gl(64);
    let w = 2.0 * PI * n as f64;
    let g = |y: f64| Complex64::new(0.0, w * y).exp() * (-(x - y).abs()).exp();
    let mut s = Complex64::new(0.0, 0.0);
    for (a, b) in [(0.0, x), (x, 1.0)] {
        let k = 8;
        let h = (b - a) / k as f64;
        for i in 0..k {
            if h > 0.0 {
                s += rule.integrate(a + h * i as f64, a + h * (i + 1) as f64, g);
            }
        }
    }
    s
}

#[test]
fn frame_functions_match_direct_integration() {
    let quad = QuadSpec::default();
    let mu = table::mu3();
    for n in [-2, 0, 1, 3] {
        for x in [0.0, 0.35, 1.0] {
            let v = shannon_frame(n, x, &mu, &quad).unwrap();
            assert!((v - frame_oracle(n, x)).norm() < 1e-6, "n={n} x={x}");
        }
    }
}

#[test]
fn closed_form_reference_differs_by_sign() {
    for n in [-1, 0, 2] {
        for x in [0.0, 0.6] {
            assert!((f3_frame_closed_form(n, x) + frame_oracle(n, x)).norm() < 1e-12);
        }
    }
}

#[test]
fn bessel_inequality_for_mercer_vectors() {
    let f3 = catalog("F3").unwrap();
    let s = spectrum(&discretize(&f3, 1.0, 128, Rule::Gauss).unwrap()).unwrap();
    let top = bessel_frame_check(&s, &s.eigenvectors[0], 60).unwrap();
    assert!(top.holds && top.frame_sum < top.bound);
    assert!((top.rkhs_norm_sq * top.lambda1 - 1.0).abs() < 1e-9);
    let zero = vec![Complex64::new(0.0, 0.0); s.nodes.len()];
    let z = bessel_frame_check(&s, &zero, 10).unwrap();
    assert!(z.holds && z.frame_sum == 0.0 && z.bound == 0.0);
    let short = bessel_frame_check(&s, &s.eigenvectors[2], 20).unwrap();
    let long = bessel_frame_check(&s, &s.eigenvectors[2], 60).unwrap();
    assert!(short.frame_sum <= long.frame_sum && long.holds);
}

#[test]
fn restricted_transform_of_f3() {
    let f3 = catalog("F3").unwrap();
    for y in [0.0, 0.5, 2.0, 7.5] {
        assert!((restricted_transform(&f3, y).unwrap() - f3_restricted_transform(1.0, y)).abs() < 1e-12);
    }
}

#[test]
fn spline_extension_serializes_its_knots() {
    let v: serde_json::Value = serde_json::to_value(f3_ext()).unwrap();
    assert_eq!(v["base"], "F3");
    assert_eq!(v["knots"].as_array().unwrap().len(), 2);
    assert_eq!(v["c"], 2.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn restriction_is_exact(x in -0.999f64..0.999) {
        let e = f3_ext();
        prop_assert!((e.eval(x) - (-x.abs()).exp()).abs() < 1e-14);
        let e2 = f2_ext();
        let y = 0.5 * x;
        prop_assert!((e2.eval(y) - (1.0 - y.abs())).abs() < 1e-14);
    }

    #[test]
    fn convex_extensions_are_positive_definite(c in 0.55f64..3.0, which in 0usize..2) {
        let id = ["F2", "F3"][which];
        let f = catalog(id).unwrap();
        prop_assume!(c > f.half_width * 1.05);
        let e = polya_spline(&f, c, SplineMode::ToZero).unwrap();
        if convexity_check(&e, &convexity_grid(&e, 120)).convex_on_positive {
            let d = extension_density(&e, &default_lambda_grid(e.c));
            prop_assert!(pd_verify(&d, 1e-9), "{id} c={c}: min {}", d.min_value);
        }
    }

    #[test]
    fn densities_are_even(l in 0.0f64..50.0) {
        let e = f3_ext();
        prop_assert!((e.density(l) - e.density(-l)).abs() < 1e-15);
    }
}
