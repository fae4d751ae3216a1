//! Periodic pseudospectral engine: transforms, derivatives, the heat
//! semigroup, and exact dyadic Littlewood-Paley projections.
//!
//! All operations are pure functions of their inputs; the FFT planner is the
//! only shared state and is behind a mutex.

mod cutoff;
mod fft;
mod field;
mod grid;
mod ops;

pub use cutoff::DyadicCutoff;
pub use field::{ScalarField, Spectrum, VecField};
pub use grid::Grid2;
pub use ops::*;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn grid64() -> Arc<Grid2> {
        Grid2::new(64, 2.0 * std::f64::consts::PI)
    }

    fn random_field(grid: &Arc<Grid2>, seed: u64) -> ScalarField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut f = ScalarField::zeros(grid);
        for v in f.data.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        f
    }

    fn smooth_random_field(grid: &Arc<Grid2>, seed: u64) -> ScalarField {
        heat_semigroup(&random_field(grid, seed), 1e-3).unwrap()
    }

    fn dealiased_random_field(grid: &Arc<Grid2>, seed: u64) -> ScalarField {
        let f = smooth_random_field(grid, seed);
        let mut spec = dft_forward(&f);
        let g = grid.clone();
        spec.scale_modes(|kx, ky| dealias_mask(&g, kx, ky));
        dft_inverse(&spec)
    }

    #[test]
    fn forward_of_zero_is_zero() {
        let f = ScalarField::zeros(&grid64());
        let spec = dft_forward(&f);
        assert!(spec.data.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = grid64();
        let l = g.side_length();
        let f = ScalarField::from_fn(&g, |x, _| (2.0 * std::f64::consts::PI * x / l).cos());
        let spec = dft_forward(&f);
        let mut nonzero = vec![];
        for (idx, z) in spec.data.iter().enumerate() {
            if z.norm() > 1e-9 * g.n_points() as f64 {
                nonzero.push((idx, z.norm()));
            }
        }
        assert_eq!(nonzero.len(), 2);
        assert_eq!(nonzero[0].0, 1);
        assert_eq!(nonzero[1].0, 63);
        assert!((nonzero[0].1 - nonzero[1].1).abs() < 1e-9 * nonzero[0].1);
    }

    #[test]
    fn roundtrip_error_is_tiny() {
        let g = grid64();
        let f = random_field(&g, 7);
        let back = dft_inverse(&dft_forward(&f));
        let sup = f.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let err = f
            .data
            .iter()
            .zip(back.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * sup, "roundtrip error {err}");
    }

    #[test]
    fn lp_project_keeps_exact_shell_mode() {
        let g = grid64();
        // |xi| = 4 = 2^2 exactly
        let f = ScalarField::from_fn(&g, |x, _| (4.0 * x).sin());
        let p = lp_project(&f, 2);
        for (a, b) in f.data.iter().zip(p.data.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_project_kills_far_mode() {
        let g = grid64();
        // |xi| = 16 = 2^{1+3}
        let f = ScalarField::from_fn(&g, |x, _| (16.0 * x).cos());
        let p = lp_project(&f, 1);
        assert!(spatial_norms(&p).linf < 1e-12);
    }

    #[test]
    fn telescoping_sum_recovers_mean_free_part() {
        let g = grid64();
        let f = smooth_random_field(&g, 3);
        let mean = f.data.iter().sum::<f64>() / f.data.len() as f64;
        let mut acc = ScalarField::zeros(&g);
        for k in g.shells() {
            let p = lp_project(&f, k);
            for (a, b) in acc.data.iter_mut().zip(p.data.iter()) {
                *a += b;
            }
        }
        let err = acc
            .data
            .iter()
            .zip(f.data.iter())
            .map(|(a, b)| (a - (b - mean)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "telescoping error {err}");
    }

    #[test]
    fn low_plus_high_is_identity() {
        let g = grid64();
        let f = random_field(&g, 11);
        let low = lp_project_low(&f, 2);
        let high = lp_project_high(&f, 2);
        for ((a, l), h) in f.data.iter().zip(low.data.iter()).zip(high.data.iter()) {
            assert_eq!(l + h, *a - (a - (l + h))); // exact algebraic identity
            assert!((a - (l + h)).abs() < 1e-12);
        }
    }

    #[test]
    fn low_pass_keeps_constants() {
        let g = grid64();
        let f = ScalarField::from_fn(&g, |_, _| 3.5);
        for k in [-2, 0, 3] {
            let p = lp_project_low(&f, k);
            for v in &p.data {
                assert!((v - 3.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn low_pass_kills_far_high_mode() {
        let g = grid64();
        let f = ScalarField::from_fn(&g, |x, _| (16.0 * x).cos()); // |xi| = 2^{1+3}
        let p = lp_project_low(&f, 1);
        assert!(spatial_norms(&p).linf < 1e-12);
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = grid64();
        let f = ScalarField::from_fn(&g, |x, _| x.sin());
        let lap = laplacian(&f);
        for (a, b) in lap.data.iter().zip(f.data.iter()) {
            assert!((a + b).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = grid64();
        let f = ScalarField::from_fn(&g, |_, _| -2.0);
        let [dx, dy] = gradient(&f);
        assert!(spatial_norms(&dx).linf < 1e-12);
        assert!(spatial_norms(&dy).linf < 1e-12);
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let g = grid64();
        let f = dealiased_random_field(&g, 19);
        let [dx, dy] = gradient(&f);
        let div = {
            let [dxx, _] = gradient(&dx);
            let [_, dyy] = gradient(&dy);
            let mut out = dxx;
            for (a, b) in out.data.iter_mut().zip(dyy.data.iter()) {
                *a += b;
            }
            out
        };
        let lap = laplacian(&f);
        let err = div
            .data
            .iter()
            .zip(lap.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "composition error {err}");
    }

    #[test]
    fn heat_semigroup_basics() {
        let g = grid64();
        let f = random_field(&g, 23);
        let same = heat_semigroup(&f, 0.0).unwrap();
        let err = f
            .data
            .iter()
            .zip(same.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert!(heat_semigroup(&f, -1.0).is_err());

        // single mode |xi| = 2^2: exact eigenvalue
        let single = ScalarField::from_fn(&g, |x, _| (4.0 * x).cos());
        let s = 0.01;
        let out = heat_semigroup(&single, s).unwrap();
        let ratio = spatial_norms(&out).linf / spatial_norms(&single).linf;
        assert!((ratio - (-s * 16.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn semigroup_property() {
        let g = grid64();
        let f = random_field(&g, 29);
        let a = heat_semigroup(&heat_semigroup(&f, 0.1).unwrap(), 0.1).unwrap();
        let b = heat_semigroup(&f, 0.2).unwrap();
        let err = a
            .data
            .iter()
            .zip(b.data.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "semigroup error {err}");
    }

    #[test]
    fn heat_semigroup_is_l2_contraction() {
        let g = grid64();
        let f = random_field(&g, 31);
        let mut prev = spatial_norms(&f).l2;
        for s in [0.001, 0.01, 0.1, 1.0] {
            let n = spatial_norms(&heat_semigroup(&f, s).unwrap()).l2;
            assert!(n <= prev + 1e-12);
            prev = n;
        }
    }

    #[test]
    fn norms_trivia_and_parseval() {
        let g = grid64();
        let zero = ScalarField::zeros(&g);
        let n0 = spatial_norms(&zero);
        assert_eq!((n0.l2, n0.l4, n0.linf), (0.0, 0.0, 0.0));

        let c = ScalarField::from_fn(&g, |_, _| -1.5);
        let nc = spatial_norms(&c);
        assert!((nc.linf - 1.5).abs() < 1e-15);
        assert!((nc.l2 - 1.5 * g.side_length()).abs() < 1e-12);

        let f = random_field(&g, 37);
        let phys = spatial_norms(&f).l2;
        let spec = dft_forward(&f).l2_norm();
        assert!((phys - spec).abs() < 1e-10 * phys, "parseval mismatch");
    }

    #[test]
    fn multiplier_commutes_with_laplacian() {
        let g = grid64();
        let f = smooth_random_field(&g, 41);
        let a = lp_project(&laplacian(&f), 3);
        let b = laplacian(&lp_project(&f, 3));
        let err = a
            .data
            .iter()
            .zip(b.data.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "commutation error {err}");
    }

    #[test]
    fn almost_orthogonality_of_distant_shells() {
        let g = grid64();
        let f = random_field(&g, 43);
        for (k, kp) in [(1, 3), (2, 5), (0, 4)] {
            let p = lp_project(&lp_project(&f, k), kp);
            assert!(spatial_norms(&p).linf < 1e-12, "P_{kp} P_{k} != 0");
        }
    }

    #[test]
    fn out_of_shell_mass_is_reported_small() {
        let g = grid64();
        let f = smooth_random_field(&g, 47);
        assert!(out_of_shell_mass(&f) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn partition_of_unity_on_random_radii(z in 1e-3f64..1e5) {
            let chi = DyadicCutoff;
            let total: f64 = (-30..40).map(|k| chi.chi_shell(k, z)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn semigroup_never_increases_l2(seed in 0u64..1000, s in 0.0f64..2.0) {
            let g = Grid2::new(16, 2.0 * std::f64::consts::PI);
            let f = random_field(&g, seed);
            let out = heat_semigroup(&f, s).unwrap();
            prop_assert!(spatial_norms(&out).l2 <= spatial_norms(&f).l2 + 1e-12);
        }
    }
}
