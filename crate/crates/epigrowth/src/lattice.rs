//! Wavenumber bookkeeping for mean-zero fields on [0, L]^2.
//!
//! A field is a finite sum u(x) = sum_k u_k e_k(x) over integer modes
//! k = (k1, k2) with |k1|, |k2| <= N and k != (0,0). The basis is the real
//! sine/cosine tensor family: the sign of each component selects sin (positive)
//! or cos (negative), component zero is the constant factor. Every linear
//! operator in this crate is diagonal or block-diagonal in this enumeration.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::{check_param, Error, Result};

/// Index of one basis function. The zero mode is excluded at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mode {
    pub k1: i32,
    pub k2: i32,
}

impl Mode {
    pub fn new(k1: i32, k2: i32) -> Result<Mode> {
        if k1 == 0 && k2 == 0 {
            return Err(Error::MeanMode);
        }
        Ok(Mode { k1, k2 })
    }

    /// |k|^2 in exact integer arithmetic.
    pub fn norm_sq(self) -> i64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        a * a + b * b
    }
}

/// All modes with |k1|, |k2| <= N except (0,0), in lexicographic order.
///
/// The enumeration order is a stable contract: coefficient vectors, binary
/// dumps and RNG stream assignment all rely on it.
#[derive(Debug)]
pub struct WavenumberLattice {
    domain_len: f64,
    trunc: i32,
    modes: Vec<Mode>,
}

impl PartialEq for WavenumberLattice {
    fn eq(&self, other: &Self) -> bool {
        self.domain_len == other.domain_len && self.trunc == other.trunc
    }
}

impl WavenumberLattice {
    /// Truncation is capped at 500 so mode ids fit the 10-bit-per-component
    /// packing used for RNG streams.
    pub fn new(domain_len: f64, trunc: i32) -> Result<Arc<WavenumberLattice>> {
        check_param(
            domain_len.is_finite() && domain_len > 0.0,
            "L",
            "a positive length",
            domain_len,
        )?;
        check_param(
            (1..=500).contains(&trunc),
            "N",
            "an integer in 1..=500",
            trunc as f64,
        )?;
        let mut modes = Vec::with_capacity(((2 * trunc + 1) * (2 * trunc + 1) - 1) as usize);
        for k1 in -trunc..=trunc {
            for k2 in -trunc..=trunc {
                if k1 != 0 || k2 != 0 {
                    modes.push(Mode { k1, k2 });
                }
            }
        }
        Ok(Arc::new(WavenumberLattice {
            domain_len,
            trunc,
            modes,
        }))
    }

    pub fn domain_len(&self) -> f64 {
        self.domain_len
    }

    pub fn trunc(&self) -> i32 {
        self.trunc
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // (0,0) is excluded but N >= 1 guarantees at least 8 modes
    }

    /// Position of a mode in the enumeration, or None if outside the square.
    pub fn index_of(&self, m: Mode) -> Option<usize> {
        let n = self.trunc;
        if m.k1.abs() > n || m.k2.abs() > n {
            return None;
        }
        let side = (2 * n + 1) as usize;
        let raw = (m.k1 + n) as usize * side + (m.k2 + n) as usize;
        let hole = n as usize * side + n as usize; // where (0,0) would sit
        Some(if raw > hole { raw - 1 } else { raw })
    }

    /// Laplacian eigenvalue mu_k = (2 pi |k| / L)^2. The biharmonic operator
    /// has eigenvalue mu_k^2.
    pub fn eigenvalue_mu(&self, m: Mode) -> f64 {
        let two_pi_over_l = 2.0 * PI / self.domain_len;
        two_pi_over_l * two_pi_over_l * m.norm_sq() as f64
    }

    /// e_k(x) = w_{k1}(x1) w_{k2}(x2).
    pub fn basis_eval(&self, m: Mode, x: [f64; 2]) -> f64 {
        basis_factor(self.domain_len, m.k1, x[0]) * basis_factor(self.domain_len, m.k2, x[1])
    }
}

/// One-dimensional factor of the tensor basis, orthonormal in L^2[0, L]:
/// sqrt(2/L) sin(2 pi m z / L) for m > 0, the constant 1/sqrt(L) for m = 0,
/// sqrt(2/L) cos(2 pi |m| z / L) for m < 0.
pub fn basis_factor(domain_len: f64, m: i32, z: f64) -> f64 {
    let arg = 2.0 * PI * m.unsigned_abs() as f64 * z / domain_len;
    if m > 0 {
        (2.0 / domain_len).sqrt() * arg.sin()
    } else if m < 0 {
        (2.0 / domain_len).sqrt() * arg.cos()
    } else {
        (1.0 / domain_len).sqrt()
    }
}

/// d/dz of `basis_factor`. Differentiation swaps the sin and cos families:
/// w_m' = (2 pi m / L) w_{-m} for m > 0 and w_m' = -(2 pi |m| / L) w_{|m|}
/// for m < 0; the constant factor dies.
pub fn basis_factor_deriv(domain_len: f64, m: i32, z: f64) -> f64 {
    let rate = 2.0 * PI * m.unsigned_abs() as f64 / domain_len;
    if m > 0 {
        rate * basis_factor(domain_len, -m, z)
    } else if m < 0 {
        -rate * basis_factor(domain_len, -m, z)
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_mode_rejected() {
        assert!(matches!(Mode::new(0, 0), Err(Error::MeanMode)));
        assert!(Mode::new(1, 0).is_ok());
    }

    #[test]
    fn eigenvalues_by_hand() {
        let lat = WavenumberLattice::new(2.0 * PI, 8).unwrap();
        assert_eq!(lat.eigenvalue_mu(Mode { k1: 1, k2: 0 }), 1.0);
        assert_eq!(lat.eigenvalue_mu(Mode { k1: 1, k2: 1 }), 2.0);
        assert_eq!(lat.eigenvalue_mu(Mode { k1: 3, k2: 4 }), 25.0);
        // L scaling: doubling L quarters mu
        let lat2 = WavenumberLattice::new(4.0 * PI, 8).unwrap();
        assert_relative_eq!(lat2.eigenvalue_mu(Mode { k1: 1, k2: 0 }), 0.25);
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let lat = WavenumberLattice::new(1.0, 3).unwrap();
        assert_eq!(lat.len(), 7 * 7 - 1);
        let mut prev: Option<(i32, i32)> = None;
        for m in lat.modes() {
            let cur = (m.k1, m.k2);
            if let Some(p) = prev {
                assert!(p < cur, "not lexicographic: {:?} then {:?}", p, cur);
            }
            prev = Some(cur);
        }
        // closed under sign flips
        for m in lat.modes() {
            for (s1, s2) in [(1, -1), (-1, 1), (-1, -1)] {
                let flipped = Mode {
                    k1: s1 * m.k1,
                    k2: s2 * m.k2,
                };
                assert!(lat.index_of(flipped).is_some());
            }
        }
    }

    #[test]
    fn index_of_matches_enumeration() {
        let lat = WavenumberLattice::new(1.0, 5).unwrap();
        for (i, m) in lat.modes().iter().enumerate() {
            assert_eq!(lat.index_of(*m), Some(i));
        }
        assert_eq!(lat.index_of(Mode { k1: 6, k2: 0 }), None);
    }

    #[test]
    fn basis_values_by_hand() {
        let l = 2.0 * PI;
        let lat = WavenumberLattice::new(l, 2).unwrap();
        // cos mode at the origin: sqrt(1/pi) * sqrt(1/(2 pi))
        let v = lat.basis_eval(Mode { k1: -1, k2: 0 }, [0.0, 0.0]);
        assert_relative_eq!(v, (1.0 / PI).sqrt() * (1.0 / l).sqrt(), max_relative = 1e-14);
        // sin mode vanishes at the origin
        assert_eq!(lat.basis_eval(Mode { k1: 1, k2: 0 }, [0.0, 0.0]), 0.0);
    }

    #[test]
    fn basis_factors_are_orthonormal_by_quadrature() {
        // rectangle rule on the periodic interval is exact for trig
        // polynomials once the grid resolves the frequencies
        let l = 3.0;
        let n = 64;
        for a in -4..=4 {
            for b in -4..=4 {
                let mut s = 0.0;
                for j in 0..n {
                    let z = j as f64 * l / n as f64;
                    s += basis_factor(l, a, z) * basis_factor(l, b, z);
                }
                s *= l / n as f64;
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (s - want).abs() <= 1e-8,
                    "<w_{a}, w_{b}> = {s}, want {want}"
                );
            }
        }
    }

    #[test]
    fn basis_deriv_matches_finite_differences() {
        let l = 2.0 * PI;
        let h = 1e-6;
        for m in [-3, -1, 0, 1, 2] {
            for z in [0.0, 0.3, 1.7] {
                let fd = (basis_factor(l, m, z + h) - basis_factor(l, m, z - h)) / (2.0 * h);
                assert!(
                    (fd - basis_factor_deriv(l, m, z)).abs() < 1e-7,
                    "m={m} z={z}"
                );
            }
        }
    }

    #[test]
    fn bad_construction_params() {
        assert!(WavenumberLattice::new(0.0, 4).is_err());
        assert!(WavenumberLattice::new(-1.0, 4).is_err());
        assert!(WavenumberLattice::new(1.0, 0).is_err());
        assert!(WavenumberLattice::new(1.0, 501).is_err());
    }
}
