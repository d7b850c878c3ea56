use proptest::prelude::*;

use locpd::gp::*;
use locpd::linalg::{eigenvalues, CMatrix};
use locpd::mercer::Kernel;

#[test]
fn brownian_variance_and_covariance() {
    let grid = uniform_grid(1.0, 50);
    let set = simulate_bm(&grid, 4000, 7).unwrap();
    let r = empirical_cov(&set, &[(1.0, 1.0), (0.2, 0.4), (0.6, 0.6)]).unwrap();
    assert!(r.passes(), "{r:?}");
    assert!((r.theoretical[1] - 0.2).abs() < 1e-15);
    let m = empirical_mean(&set, &[0.5, 1.0]).unwrap();
    assert!(m.passes());
    assert!(set.paths.iter().all(|p| p[0] == 0.0));
}

#[test]
fn same_seed_same_paths() {
    let grid = uniform_grid(1.0, 20);
    let a = simulate_bm(&grid, 50, 99).unwrap();
    let b = simulate_bm(&grid, 50, 99).unwrap();
    let c = simulate_bm(&grid, 50, 100).unwrap();
    for (p, q) in a.paths.iter().zip(&b.paths) {
        assert!(p.iter().zip(q).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert_ne!(a.paths[0], c.paths[0]);
    // a path does not depend on how many others were drawn
    let d = simulate_bm(&grid, 5, 99).unwrap();
    assert_eq!(a.paths[3], d.paths[3]);
    assert_ne!(a.paths[0], a.paths[1]);
}

#[test]
fn brownian_marginal_is_symmetric() {
    let set = simulate_bm(&uniform_grid(1.0, 10), 6000, 3).unwrap();
    let (s, se) = skewness(&set, 1.0).unwrap();
    assert!(s.abs() < 4.0 * se, "skew {s} se {se}");
}

#[test]
fn bridge_is_pinned_at_both_ends() {
    let grid = uniform_grid(1.0, 100);
    for scheme in [Scheme::ExactIncrement, Scheme::EulerMaruyama] {
        let set = simulate_bridge(&grid, 400, 11, scheme).unwrap();
        assert!(set.paths.iter().all(|p| p[0] == 0.0 && p[100] == 1.0));
        let r = empirical_cov(&set, &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(r.empirical, vec![0.0, 0.0]);
    }
}

#[test]
fn bridge_moments() {
    let grid = uniform_grid(1.0, 100);
    let set = simulate_bridge(&grid, 4000, 5, Scheme::ExactIncrement).unwrap();
    let m = empirical_mean(&set, &[0.7]).unwrap();
    assert!(m.passes() && (m.theoretical[0] - 0.7).abs() < 1e-15);
    let r = empirical_cov(&set, &[(0.3, 0.7), (0.5, 0.5), (0.7, 0.7)]).unwrap();
    assert!(r.passes(), "{r:?}");
    assert!((r.theoretical[0] - 0.09).abs() < 1e-15);
}

#[test]
fn bridge_euler_scheme_is_close() {
    let grid = uniform_grid(1.0, 400);
    let set = simulate_bridge(&grid, 4000, 8, Scheme::EulerMaruyama).unwrap();
    let r = empirical_cov(&set, &[(0.5, 0.5), (0.25, 0.75)]).unwrap();
    assert!(r.passes(), "{r:?}");
}

#[test]
fn bridge_rejects_long_grids() {
    assert!(simulate_bridge(&uniform_grid(2.0, 10), 10, 1, Scheme::ExactIncrement).is_err());
}

#[test]
fn ou_exact_scheme_moments() {
    let grid = uniform_grid(5.0, 100);
    let set = simulate_ou(1.0, 1.0, 2.0, &grid, 4000, 21, Scheme::ExactIncrement).unwrap();
    let m = empirical_mean(&set, &[1.0, 5.0]).unwrap();
    assert!(m.passes(), "{m:?}");
    assert!((m.theoretical[0] - 2.0 * (-1f64).exp()).abs() < 1e-15);
    let r = empirical_cov(&set, &[(5.0, 5.0), (4.0, 5.0)]).unwrap();
    assert!(r.passes(), "{r:?}");
    // near stationarity the covariance is β²/(2γ) e^{-γ|t-s|}
    assert!((r.theoretical[1] - 0.5 * (-1f64).exp()).abs() < 1e-4);
}

#[test]
fn ou_parameter_checks() {
    let grid = uniform_grid(1.0, 10);
    assert!(simulate_ou(0.0, 1.0, 0.0, &grid, 10, 1, Scheme::ExactIncrement).is_err());
    assert!(simulate_ou(1.0, -1.0, 0.0, &grid, 10, 1, Scheme::EulerMaruyama).is_err());
}

#[test]
fn empirical_statistics_need_enough_paths() {
    let set = simulate_bm(&uniform_grid(1.0, 4), 39, 1).unwrap();
    assert!(empirical_cov(&set, &[(0.5, 0.5)]).is_err());
    assert!(empirical_mean(&set, &[0.5]).is_err());
    let set = simulate_bm(&uniform_grid(1.0, 4), 40, 1).unwrap();
    assert!(empirical_cov(&set, &[(0.5, 0.5)]).is_ok());
    assert!(empirical_cov(&set, &[(0.3, 0.5)]).is_err());
}

#[test]
fn constant_paths_have_zero_covariance() {
    let set = PathSet {
        process: Process::Brownian,
        scheme: Scheme::ExactIncrement,
        seed: 0,
        times: vec![0.0, 1.0],
        paths: vec![vec![0.5, 0.5]; 40],
    };
    let r = empirical_cov(&set, &[(1.0, 1.0), (0.0, 1.0)]).unwrap();
    assert_eq!(r.empirical, vec![0.0, 0.0]);
    assert_eq!(r.std_error, vec![0.0, 0.0]);
}

#[test]
fn bad_grids_are_rejected() {
    assert!(simulate_bm(&[0.0], 10, 1).is_err());
    assert!(simulate_bm(&[0.1, 0.2], 10, 1).is_err());
    assert!(simulate_bm(&[0.0, 0.1, 0.5], 10, 1).is_err());
    assert!(simulate_bm(&uniform_grid(1.0, 4), 0, 1).is_err());
}

#[test]
fn csv_caps_the_number_of_columns() {
    let set = simulate_bm(&uniform_grid(1.0, 8), 40, 2).unwrap();
    let csv = set.to_csv(16);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines[0].starts_with("t,path_0,") && lines[0].ends_with("path_15"));
    assert!(lines.iter().all(|l| l.split(',').count() == 17));
    let v: f64 = lines[9].split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(v.to_bits(), set.paths[2][8].to_bits());
}

#[test]
fn sample_path_carries_its_seed() {
    let set = simulate_bm(&uniform_grid(1.0, 4), 3, 42).unwrap();
    let p = set.path(2);
    assert_eq!((p.seed, p.index, p.values.len()), (42, 2, 5));
    let v = serde_json::to_value(&p).unwrap();
    assert_eq!(v["scheme"], "exact_increment");
}

#[test]
fn scheme_names() {
    assert_eq!("exact".parse::<Scheme>().unwrap(), Scheme::ExactIncrement);
    assert_eq!("em".parse::<Scheme>().unwrap(), Scheme::EulerMaruyama);
    assert!("rk4".parse::<Scheme>().is_err());
}

#[test]
fn fbm_decomposition_examples() {
    let d = fbm_kernel_decompose(0.5, 0.3, 0.5).unwrap();
    assert!((d.k_h - 0.3).abs() < 1e-15);
    assert!(d.residual < 1e-15);
    for h in [0.2, 0.5, 0.9] {
        let x: f64 = 0.37;
        let d = fbm_kernel_decompose(h, x, x).unwrap();
        assert!((d.k_h - x.powf(2.0 * h)).abs() < 1e-15);
        assert!((d.f_h - 1.0).abs() < 1e-15);
    }
    assert!(fbm_kernel_decompose(1.0, 0.1, 0.2).is_err());
    assert!(fbm_kernel_decompose(0.0, 0.1, 0.2).is_err());
}

#[test]
fn fbm_operator_identity() {
    for h in [0.25, 0.5, 0.75] {
        assert!(fbm_operator_residual(h, 128).unwrap() < 1e-12);
    }
}

fn gram(k: &dyn Kernel, xs: &[f64]) -> CMatrix {
    CMatrix::from_fn(xs.len(), xs.len(), |i, j| k.k(xs[i], xs[j]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fbm_covariance_is_positive_semidefinite(
        xs in prop::collection::vec(0.0f64..1.0, 2..24),
        which in 0usize..3,
    ) {
        let h = [0.25, 0.5, 0.75][which];
        let ev = eigenvalues(&gram(&fbm_covariance_kernel(h), &xs)).unwrap();
        let top = ev.iter().cloned().fold(0.0, f64::max);
        prop_assert!(ev.iter().all(|&l| l >= -1e-9 * top.max(1.0)), "{ev:?}");
    }

    #[test]
    fn decomposition_is_exact(h in 0.05f64..0.95, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        prop_assert!(fbm_kernel_decompose(h, x, y).unwrap().residual < 1e-14);
    }

    #[test]
    fn process_covariances_are_symmetric(s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let ou = Process::OrnsteinUhlenbeck { gamma: 0.7, beta: 1.3, v0: 0.0 };
        for p in [Process::Brownian, Process::Bridge, ou] {
            prop_assert!((p.covariance(s, t) - p.covariance(t, s)).abs() < 1e-15);
            prop_assert!(p.covariance(s, s) >= 0.0);
        }
    }
}
