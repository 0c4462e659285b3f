//! Oracle checks for the spectral layer against direct evaluation: the FFT
//! path must agree with naive basis sums, and the diagonal operators must
//! satisfy their algebraic identities to near machine precision.

use epigrowth::field::semigroup_norm_bound;
use epigrowth::transform::{to_physical, to_spectral};
use epigrowth::{Mode, PhysicalGrid, SpectralField, WavenumberLattice};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(lat: &std::sync::Arc<WavenumberLattice>, rng: &mut ChaCha8Rng) -> SpectralField {
    let coeffs = (0..lat.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralField::from_coeffs(lat, coeffs)
}

#[test]
fn synthesis_matches_direct_basis_sum() {
    let lat = WavenumberLattice::new(5.0, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_field(&lat, &mut rng);
    let n = 12;
    let grid = to_physical(&u, n).unwrap();
    for i in 0..n {
        for j in 0..n {
            let x = [5.0 * i as f64 / n as f64, 5.0 * j as f64 / n as f64];
            let direct: f64 = lat
                .modes()
                .iter()
                .zip(u.coeffs())
                .map(|(m, c)| c * lat.basis_eval(*m, x))
                .sum();
            let got = grid.at(i, j);
            assert!(
                (got - direct).abs() <= 1e-12,
                "({i},{j}): fft {got} vs direct {direct}"
            );
        }
    }
}

#[test]
fn analysis_recovers_directly_sampled_basis_functions() {
    // grids built by pointwise evaluation, not by the inverse transform
    let l = 2.0 * std::f64::consts::PI;
    let lat = WavenumberLattice::new(l, 3).unwrap();
    let n = 16;
    for probe in [
        Mode { k1: 2, k2: -3 },
        Mode { k1: -1, k2: 0 },
        Mode { k1: 3, k2: 3 },
    ] {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let x = [l * i as f64 / n as f64, l * j as f64 / n as f64];
                values.push(0.7 * lat.basis_eval(probe, x));
            }
        }
        let grid = PhysicalGrid::new(l, n, values);
        let got = to_spectral(&grid, &lat).unwrap();
        for (m, c) in lat.modes().iter().zip(got.coeffs()) {
            let want = if *m == probe { 0.7 } else { 0.0 };
            assert!(
                (c - want).abs() <= 1e-12,
                "coefficient at ({},{}) = {c}, want {want}",
                m.k1,
                m.k2
            );
        }
    }
}

#[test]
fn grid_quadrature_agrees_with_parseval() {
    let lat = WavenumberLattice::new(3.0, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let u = random_field(&lat, &mut rng);
        let grid = to_physical(&u, 2 * 6 + 2).unwrap();
        let a = grid.quadrature_l2();
        let b = u.l2_norm();
        assert!((a - b).abs() <= 1e-12 * b.max(1.0), "{a} vs {b}");
    }
}

#[test]
fn gradient_is_an_isometry_between_sobolev_scales() {
    let lat = WavenumberLattice::new(2.0 * std::f64::consts::PI, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let u = random_field(&lat, &mut rng);
        let alpha = rng.gen_range(-1.0..2.0);
        let lhs = u.gradient().sobolev_norm(alpha - 1.0);
        let rhs = u.sobolev_norm(alpha);
        assert!(
            (lhs - rhs).abs() <= 1e-12 * rhs.max(1.0),
            "alpha {alpha}: {lhs} vs {rhs}"
        );
    }
}

#[test]
fn semigroup_composes_and_commutes_with_sobolev_shift() {
    let lat = WavenumberLattice::new(2.0 * std::f64::consts::PI, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let u = random_field(&lat, &mut rng);
        let (t, s) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
        let delta = rng.gen_range(0.1..2.0);
        let two_step = u.semigroup(t, delta).unwrap().semigroup(s, delta).unwrap();
        let one_step = u.semigroup(t + s, delta).unwrap();
        let diff = two_step.sub(&one_step).l2_norm();
        assert!(diff <= 1e-12 * u.l2_norm(), "composition drift {diff}");

        let a = u.fractional_laplacian(0.8).semigroup(t, delta).unwrap();
        let b = u.semigroup(t, delta).unwrap().fractional_laplacian(0.8);
        assert!(a.sub(&b).l2_norm() <= 1e-12 * a.l2_norm().max(1.0));
    }
}

#[test]
fn smoothing_bound_holds_for_random_fields_and_scales() {
    let lat = WavenumberLattice::new(2.0 * std::f64::consts::PI, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..100 {
        let u = random_field(&lat, &mut rng);
        let alpha = rng.gen_range(-2.0..2.0);
        let beta = alpha + rng.gen_range(1e-3..4.0);
        let t = rng.gen_range(1e-3..5.0);
        let lhs = u.semigroup(t, 1.0).unwrap().sobolev_norm(beta);
        let rhs = semigroup_norm_bound(alpha, beta, t).unwrap() * u.sobolev_norm(alpha);
        assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs} at ({alpha},{beta},{t})");
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn large_lattice_round_trip_stays_tight() {
    let lat = WavenumberLattice::new(2.0 * std::f64::consts::PI, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_field(&lat, &mut rng);
    let back = to_spectral(&to_physical(&u, 130).unwrap(), &lat).unwrap();
    let err = back.sub(&u).l2_norm() / u.l2_norm();
    assert!(err <= 1e-12, "relative round-trip error {err}");
}
