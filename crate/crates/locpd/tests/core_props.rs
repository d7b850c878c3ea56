use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use locpd::catalog::*;
use locpd::measures::{splitting_f, table, QuadSpec};
use locpd::mercer::{discretize, mercer_reconstruct, spectrum, MinKernel};
use locpd::quadrature::Rule;
use locpd::rkhs::{a_priori_check, energy_norm, membership_test, EnergyForm, TestFunction, Verdict};

fn sorted_points(mut v: Vec<f64>) -> Option<Vec<f64>> {
    v.sort_by(f64::total_cmp);
    v.windows(2).all(|w| w[1] - w[0] > 1e-4).then_some(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn products_of_positive_definite_functions(
        pts in prop::collection::vec(0.0f64..0.5, 2..12),
        pair in (0usize..4, 0usize..4),
    ) {
        let ids = ["F1", "F2", "F3", "F5"];
        let Some(pts) = sorted_points(pts) else { return Ok(()) };
        let p = pointwise_product(&catalog(ids[pair.0]).unwrap(), &catalog(ids[pair.1]).unwrap()).unwrap();
        let r = psd_check(&gram(&p, &pts).unwrap(), PSD_TOL).unwrap();
        prop_assert!(r.is_psd, "{} min {}", p.id, r.min_eigenvalue);
    }

    #[test]
    fn damped_imaginary_parts_stay_positive(pts in prop::collection::vec(0.0f64..1.0, 2..10), m in -1.0f64..1.0) {
        let f = scale_imag(&catalog("im14").unwrap(), m);
        let pts: Vec<f64> = pts.iter().map(|p| p * f.half_width.min(3.0)).collect();
        let Some(pts) = sorted_points(pts) else { return Ok(()) };
        prop_assert!(psd_check(&gram(&f, &pts).unwrap(), PSD_TOL).unwrap().is_psd);
    }

    #[test]
    fn gaussian_measure_transform(x in -6.0f64..6.0) {
        // the characteristic function of N(0, 1)
        let v = table::mu5().bochner(x, &QuadSpec::default()).unwrap();
        prop_assert!((v - Complex64::new((-0.5 * x * x).exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn splitting_function_is_bounded(x in -50.0f64..50.0) {
        prop_assert!(splitting_f(x, 20).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn periodization_dominates(t in -0.5f64..0.5) {
        let f = periodize("F3per", Arc::new(|t: f64| (-t.abs()).exp()),
            Decay::Exponential { amplitude: 1.0, rate: 1.0 }, 40, 1e-12).unwrap();
        let v = f.value(t).re;
        // Σ_{n≠0} e^{-|t-n|} = (e^{t} + e^{-t}) / (e - 1) for |t| ≤ 1/2
        let rest = (t.exp() + (-t).exp()) / (1f64.exp() - 1.0);
        prop_assert!((v - (-t.abs()).exp() - rest).abs() < 1e-12);
        prop_assert!(v > (-t.abs()).exp());
    }
}

#[test]
fn min_kernel_spectrum_scales_with_the_interval() {
    // eigenpairs of x ∧ y on (0, a): (2a / ((2n-1)π))², sin((2n-1)πx / 2a)
    for a in [0.5, 1.0, 2.0] {
        let s = spectrum(&discretize(&MinKernel, a, 256, Rule::Gauss).unwrap()).unwrap();
        for n in 1..=4 {
            let want = (2.0 * a / ((2 * n - 1) as f64 * PI)).powi(2);
            assert!((s.eigenvalues[n - 1] / want - 1.0).abs() < 1e-3, "a={a} n={n}");
        }
        assert!((s.trace - a * a / 2.0).abs() < 1e-12);
        assert!(s.orthonormality_defect(5) < 1e-10);
    }
}

#[test]
fn mercer_series_rebuilds_the_kernel() {
    let f3 = catalog("F3").unwrap();
    let s = spectrum(&discretize(&f3, 1.0, 200, Rule::Gauss).unwrap()).unwrap();
    // the kink on the diagonal slows the series there
    for (x, y, tol) in [(0.2, 0.7, 1e-3), (0.9, 0.1, 1e-3), (0.5, 0.5, 1e-2)] {
        let v = mercer_reconstruct(&s, x, y, s.len());
        assert!((v.re - (-f64::abs(x - y)).exp()).abs() < tol, "({x},{y}) {v}");
    }
    assert_eq!(mercer_reconstruct(&s, 0.3, 0.3, 0), Complex64::new(0.0, 0.0));
}

#[test]
fn constants_belong_to_the_exponential_kernel_space() {
    // ‖1‖² = ½ ∫ (|h'|² + |h|²) + ½ (|h(0)|² + |h(1)|²) = 3/2
    let form = EnergyForm::Exponential { a: 1.0 };
    let n = energy_norm(form, &TestFunction::real(|_| 1.0, |_| 0.0, vec![])).unwrap();
    assert!((n.total - 1.5).abs() < 1e-12);
    let f3 = catalog("F3").unwrap();
    let r = membership_test(&f3, &|_| Complex64::new(1.0, 0.0), &[8, 16, 32, 64]).unwrap();
    assert_eq!(r.in_rkhs, Verdict::Yes);
    assert!((r.ladder.last().unwrap().a0 - 1.5).abs() < 0.05);
}

#[test]
fn a_priori_bounds_for_kernel_vectors() {
    let f2 = catalog("F2").unwrap();
    let pts: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64 / 20.0).collect();
    for x0 in [0.1, 0.25, 0.4] {
        let xi = move |x: f64| Complex64::new(1.0 - (x - x0).abs(), 0.0);
        let r = a_priori_check(&f2, &xi, 1.0, &pts).unwrap();
        assert!(r.holds);
        // equality at x0
        assert!((r.sup_ratio - 1.0).abs() < 1e-12);
    }
    // a norm that is too small is caught
    let xi = |x: f64| Complex64::new((-x).exp(), 0.0);
    let r = a_priori_check(&catalog("F3").unwrap(), &xi, 0.5, &pts).unwrap();
    assert!(!r.holds);
}
