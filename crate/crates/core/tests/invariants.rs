//! Property tests for invariants that hold for every input, not just the
//! shipped configurations.

use std::f64::consts::{FRAC_PI_2, PI};

use krein_spectral::gl::{continuous_spectrum_bands, dispersion_k2};
use krein_spectral::grid::GridSpec;
use krein_spectral::hamilton::{krein_factors, propagate_real, real_energy, SystemSampler};
use krein_spectral::io::num;
use krein_spectral::linalg::tridiag::SymTridiagonal;
use krein_spectral::linalg::ComplexMatrix;
use krein_spectral::quadrature::gauss_legendre;
use krein_spectral::spectral::{reduce_mod_pi, unwrap_phase_shifts};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// Band floor is min(1 − v², m²), and membership agrees with the sign of the
    /// dispersion k² away from the thresholds.
    #[test]
    fn band_table_matches_dispersion(v in -0.99f64..0.99, m2 in 0.01f64..4.0, probe in 0.0f64..6.0) {
        let table = continuous_spectrum_bands(v, m2).unwrap();
        prop_assert_eq!(table.floor(), (1.0 - v * v).min(m2));
        let near = [m2, 1.0, 1.0 - v * v].iter().any(|t| (probe - t).abs() < 1e-9);
        if !near {
            prop_assert_eq!(table.contains(probe), dispersion_k2(probe, v, m2) >= 0.0);
        }
    }

    /// The Krein propagator conserves the energy norm, composes as a group and
    /// keeps real data real.
    #[test]
    fn krein_propagator_is_an_energy_isometry_group(seed in any::<u64>(), n in 1usize..9, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let mut sampler = SystemSampler::new(seed);
        let system = sampler.system(2 * n, true).unwrap();
        let factors = krein_factors(&system).unwrap();
        let x0 = sampler.state(2 * n, true);
        let e0 = factors.energy_norm(&x0.components);
        let xt = factors.propagate(&x0, t).unwrap();
        prop_assert!((factors.energy_norm(&xt.components) - e0).abs() <= 1e-10 * e0);
        let composed = factors.propagate(&factors.propagate(&x0, s).unwrap(), t).unwrap();
        let direct = factors.propagate(&x0, s + t).unwrap();
        prop_assert!(composed.distance(&direct) <= 1e-10 * x0.norm().max(1.0));
        let real = propagate_real(&system, &x0, t).unwrap();
        prop_assert!(real.max_imag() <= 1e-12 * x0.norm().max(1.0));
        let (ea, eb) = (real_energy(&system, &x0), real_energy(&system, &real));
        prop_assert!((ea - eb).abs() <= 1e-10 * ea.abs().max(1.0));
    }

    /// Every frequency of a positive-energy system is real and they come in ±
    /// pairs for real systems.
    #[test]
    fn real_systems_have_symmetric_frequencies(seed in any::<u64>(), n in 1usize..9) {
        let system = SystemSampler::new(seed).system(2 * n, true).unwrap();
        let w = krein_factors(&system).unwrap().frequencies().to_vec();
        let m = w.len();
        for j in 0..m {
            prop_assert!((w[j] + w[m - 1 - j]).abs() <= 1e-9 * w[m - 1].abs().max(1.0));
        }
    }

    #[test]
    fn reduce_mod_pi_lands_in_half_open_interval(phase in -1e3f64..1e3) {
        let d = reduce_mod_pi(phase);
        prop_assert!(d > -FRAC_PI_2 - 1e-15 && d <= FRAC_PI_2 + 1e-15);
        let turns = (phase - d) / PI;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    /// Unwrapping only adds multiples of π and removes jumps of π/2 or more.
    #[test]
    fn unwrapped_phases_are_continuous(deltas in prop::collection::vec(-10.0f64..10.0, 1..40)) {
        let u = unwrap_phase_shifts(&deltas);
        for (d, w) in deltas.iter().zip(&u) {
            let turns = (d - w) / PI;
            prop_assert!((turns - turns.round()).abs() < 1e-9);
        }
        for p in u.windows(2) {
            prop_assert!((p[1] - p[0]).abs() <= FRAC_PI_2 + 1e-12);
        }
    }

    /// q-point Gauss-Legendre integrates monomials of degree < 2q exactly.
    #[test]
    fn gauss_legendre_degree_of_exactness(q in 1usize..30, k in 0u32..60) {
        let k = k % (2 * q as u32);
        let (x, w) = gauss_legendre(q);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        prop_assert!((got - exact).abs() < 1e-13, "q = {q}, k = {k}: {got} vs {exact}");
    }

    /// Sturm bisection and implicit QL agree on random symmetric tridiagonals.
    #[test]
    fn tridiagonal_eigen_routes_agree(diag in prop::collection::vec(-5.0f64..5.0, 1..40), seed in any::<u64>()) {
        let n = diag.len();
        let off: Vec<f64> = (0..n.saturating_sub(1))
            .map(|i| ((seed.rotate_left(i as u32) % 2001) as f64 / 1000.0) - 1.0)
            .collect();
        let t = SymTridiagonal::new(diag, off).unwrap();
        let ql = t.eigenvalues_ql().unwrap();
        for (k, &l) in ql.iter().enumerate() {
            prop_assert!((t.eigenvalue_by_index(k) - l).abs() < 1e-10);
            prop_assert!(t.count_below(l - 1e-8) <= k);
        }
    }

    /// Hermitian eigendecomposition reconstructs the matrix.
    #[test]
    fn hermitian_eigen_reconstructs(seed in any::<u64>(), n in 1usize..12) {
        let mut sampler = SystemSampler::new(seed);
        let a = ComplexMatrix::from_fn(n, |_, _| Complex64::new(sampler.uniform(-1.0, 1.0), sampler.uniform(-1.0, 1.0)));
        let h = a.add(&a.adjoint()).unwrap();
        let rebuilt = h.hermitian_eigen().unwrap().apply_fn(|l| Complex64::new(l, 0.0));
        prop_assert!(rebuilt.sub(&h).unwrap().norm_max() < 1e-12 * h.norm_max().max(1.0));
    }

    /// The grid inner product is sesquilinear and matches the norm.
    #[test]
    fn grid_inner_product_is_consistent(
        n in 2usize..50,
        length in 1.0f64..50.0,
        f in prop::collection::vec(-3.0f64..3.0, 50),
        g in prop::collection::vec(-3.0f64..3.0, 50),
    ) {
        let grid = GridSpec::new(length, n).unwrap();
        let fc: Vec<Complex64> = f[..n].iter().map(|&x| Complex64::new(x, 0.5 * x)).collect();
        let gc: Vec<Complex64> = g[..n].iter().map(|&x| Complex64::new(-x, x)).collect();
        let fg = grid.inner(&fc, &gc);
        let gf = grid.inner(&gc, &fc);
        prop_assert!((fg - gf.conj()).norm() < 1e-12 * (1.0 + fg.norm()));
        let ff = grid.inner(&fc, &fc);
        prop_assert!((ff.re - grid.norm(&fc).powi(2)).abs() < 1e-12 * (1.0 + ff.re));
        prop_assert!(ff.im.abs() < 1e-12 * (1.0 + ff.re));
    }

    /// CSV numbers round-trip exactly.
    #[test]
    fn csv_numbers_round_trip(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        prop_assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
