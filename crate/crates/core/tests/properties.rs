//! Randomized invariants: properties that must hold for every input, not
//! just the worked examples in the unit tests. Case counts are kept modest
//! because several properties run the full reduction loop.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use cloe_core::cloe::{
    detect_candidates, norm_curve, run_cloe, stopping_metric, CloeConfig, ModelOracle, NormCurve,
    Oracle,
};
use cloe_core::loewner::{build_pencil, conjugate_augment, partition_tangential, realify};
use cloe_core::lti::{
    generate_modal_model, log_grid, spectral_norm, Lcg64, ModalParams, StateSpaceModel,
};

/// A small strictly stable random model, keyed entirely by the seed.
fn modal(seed: u64, n_modes: usize, outputs: usize, inputs: usize) -> StateSpaceModel {
    generate_modal_model(&ModalParams {
        seed,
        n_modes,
        freq_range: (1e-2, 1e2),
        damping_range: (0.05, 0.5),
        gain_range: (-1.0, 1.0),
        outputs,
        inputs,
    })
    .expect("parameters are valid")
}

fn random_complex_matrix(rng: &mut Lcg64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Real-coefficient systems obey H(s̄) = H(s)̄ ; in particular responses
    /// at ±ω are conjugates.
    #[test]
    fn transfer_is_conjugate_symmetric(
        seed in any::<u64>(),
        n_modes in 1usize..4,
        log_omega in -3.0f64..3.0,
        sigma in 0.0f64..2.0,
    ) {
        let model = modal(seed, n_modes, 1, 1);
        let s = Complex64::new(sigma, 10f64.powf(log_omega));
        let upper = model.transfer(s).unwrap();
        let lower = model.transfer(s.conj()).unwrap();
        let scale = upper.norm() + 1.0;
        prop_assert!((lower - upper.map(|z| z.conj())).norm() <= 1e-9 * scale);
    }

    /// ‖αM‖₂ = |α|·‖M‖₂ and ‖A + B‖₂ ≤ ‖A‖₂ + ‖B‖₂.
    #[test]
    fn spectral_norm_is_a_norm(
        seed in any::<u64>(),
        rows in 1usize..4,
        cols in 1usize..4,
        alpha in -10.0f64..10.0,
    ) {
        let mut rng = Lcg64::new(seed);
        let a = random_complex_matrix(&mut rng, rows, cols);
        let b = random_complex_matrix(&mut rng, rows, cols);
        let na = spectral_norm(&a);
        let nb = spectral_norm(&b);
        let scaled = spectral_norm(&a.map(|z| z * alpha));
        prop_assert!((scaled - alpha.abs() * na).abs() <= 1e-12 * (na + 1.0));
        let sum = spectral_norm(&(&a + &b));
        prop_assert!(sum <= na + nb + 1e-12 * (na + nb + 1.0));
    }

    /// Logarithmic grids hit both endpoints exactly, increase strictly with
    /// a constant ratio, and `nearest_index` really is the argmin.
    #[test]
    fn log_grid_is_geometric_with_exact_endpoints(
        log_lo in -6.0f64..2.0,
        decades in 0.5f64..6.0,
        n in 3usize..200,
        probe in 0.0f64..1.0,
    ) {
        let lo = 10f64.powf(log_lo);
        let hi = 10f64.powf(log_lo + decades);
        let grid = log_grid(lo, hi, n).unwrap();
        let pts = grid.points();
        prop_assert_eq!(pts[0], lo);
        prop_assert_eq!(pts[n - 1], hi);
        let ratio = pts[1] / pts[0];
        for w in pts.windows(2) {
            prop_assert!(w[1] > w[0]);
            prop_assert!((w[1] / w[0] - ratio).abs() <= 1e-12 * ratio);
        }
        let omega = lo * (hi / lo).powf(probe);
        let found = (pts[grid.nearest_index(omega)] - omega).abs();
        let best = pts.iter().map(|p| (p - omega).abs()).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(found, best);
    }

    /// Both Sylvester identities hold for the pencil of any sampled stable
    /// model, before and after realification.
    #[test]
    fn sylvester_identities_hold_on_random_data(
        seed in any::<u64>(),
        n_modes in 1usize..4,
        outputs in 1usize..3,
        inputs in 1usize..3,
        count in 4usize..12,
    ) {
        let model = modal(seed, n_modes, outputs, inputs);
        let grid = log_grid(5e-2, 5e1, count).unwrap();
        let samples = model.sample(&grid).unwrap();
        let points = conjugate_augment(&samples).unwrap();
        let data = partition_tangential(&points, outputs, inputs).unwrap();
        let pencil = build_pencil(&data).unwrap();
        let (r1, r2) = pencil.sylvester_residuals();
        prop_assert!(r1 <= 1e-10 && r2 <= 1e-10, "complex residuals {r1:.2e}, {r2:.2e}");
        let real = realify(pencil).unwrap();
        let (r1, r2) = real.sylvester_residuals();
        prop_assert!(r1 <= 1e-10 && r2 <= 1e-10, "real residuals {r1:.2e}, {r2:.2e}");
    }

    /// Candidate detection never proposes a frequency inside the guard band
    /// of an already-used one, stays on the grid, and honors the cap.
    #[test]
    fn detect_candidates_respects_the_guard(
        seed in any::<u64>(),
        n in 16usize..120,
        guard in 0usize..4,
        count in 1usize..4,
        picks in prop::collection::vec(0.0f64..1.0, 1..6),
    ) {
        let grid = log_grid(1e-2, 1e2, n).unwrap();
        let mut rng = Lcg64::new(seed);
        // A jagged random positive curve exercises both detection phases.
        let mut level: f64 = 0.0;
        let f: Vec<f64> = (0..n)
            .map(|_| {
                level += rng.uniform(-1.0, 1.0);
                level.exp()
            })
            .collect();
        let responses: Vec<DMatrix<Complex64>> = f
            .iter()
            .map(|&v| DMatrix::from_element(1, 1, Complex64::new(v, 0.0)))
            .collect();
        let in_set: Vec<f64> = picks
            .iter()
            .map(|&p| grid.points()[(p * (n as f64 - 1.0)).round() as usize])
            .collect();
        let curve = NormCurve::from_responses(grid.clone(), &responses);
        match detect_candidates(&curve, &in_set, guard, count) {
            Ok(candidates) => {
                prop_assert!(!candidates.is_empty() && candidates.len() <= count);
                for c in &candidates {
                    let idx = grid.nearest_index(c.omega);
                    prop_assert_eq!(grid.points()[idx], c.omega, "candidate off-grid");
                    for &used in &in_set {
                        let u = grid.nearest_index(used);
                        prop_assert!(
                            idx.abs_diff(u) > guard,
                            "candidate at cell {idx} violates guard {guard} around cell {u}"
                        );
                    }
                }
            }
            // Admissible cells can genuinely run out when guards overlap.
            Err(e) => prop_assert!(matches!(e, cloe_core::cloe::CloeError::GridExhausted)),
        }
    }

    /// Scaling one argument of the stopping metric gives the exact algebraic
    /// value |δ| / (1 + δ); identical arguments give zero.
    #[test]
    fn stopping_metric_matches_algebra_under_scaling(
        seed in any::<u64>(),
        len in 1usize..8,
        delta in -0.5f64..2.0,
    ) {
        let mut rng = Lcg64::new(seed);
        let prev: Vec<DMatrix<Complex64>> =
            (0..len).map(|_| random_complex_matrix(&mut rng, 2, 2)).collect();
        prop_assume!(prev.iter().any(|m| m.norm() > 1e-6));
        prop_assert_eq!(stopping_metric(&prev, &prev).unwrap(), 0.0);
        let curr: Vec<DMatrix<Complex64>> =
            prev.iter().map(|m| m.map(|z| z * (1.0 + delta))).collect();
        let expected = delta.abs() / (1.0 + delta);
        let got = stopping_metric(&prev, &curr).unwrap();
        prop_assert!(
            (got - expected).abs() <= 1e-12 * (1.0 + expected),
            "got {got}, expected {expected}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Across the whole loop: interpolation sets are nested, the trace's
    /// call accounting matches the oracle exactly, and the budget includes
    /// the final (possibly unused) candidate evaluations.
    #[test]
    fn reduction_nests_sets_and_accounts_every_call(
        seed in any::<u64>(),
        n_modes in 1usize..4,
        max_points in 6usize..16,
        n_f in 32usize..128,
    ) {
        let model = modal(seed, n_modes, 1, 1);
        let config = CloeConfig {
            max_points,
            n_f,
            epsilon: 0.05,
            ..CloeConfig::default()
        };
        let mut oracle = ModelOracle::new(model);
        let (h, trace) = run_cloe(&mut oracle, &config).unwrap();
        let last = trace.iterations.last().unwrap();
        prop_assert_eq!(oracle.call_count(), last.oracle_calls);
        prop_assert!(oracle.call_count() <= max_points + config.points_per_iteration);
        prop_assert!(last.interpolation_set.len() <= max_points);
        for pair in trace.iterations.windows(2) {
            let (prev, next) = (&pair[0].interpolation_set, &pair[1].interpolation_set);
            prop_assert!(prev.len() <= next.len());
            for omega in prev {
                prop_assert!(next.contains(omega), "set member {omega} dropped");
            }
        }
        // The returned interpolant is the one the last record describes.
        prop_assert_eq!(h.order, last.nr);
        let curve = norm_curve(&h, &log_grid(1e-3, 1e3, 16).unwrap()).unwrap();
        prop_assert!(curve.f.iter().all(|v| v.is_finite()));
    }
}
