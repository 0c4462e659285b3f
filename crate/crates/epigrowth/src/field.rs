//! Spectral fields and the diagonal operators acting on them.

use std::sync::Arc;

use crate::lattice::{Mode, WavenumberLattice};
use crate::{check_param, Result};

/// Mean-zero real field stored as one coefficient per lattice mode, in
/// enumeration order.
#[derive(Clone, Debug)]
pub struct SpectralField {
    lattice: Arc<WavenumberLattice>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(lattice: &Arc<WavenumberLattice>) -> SpectralField {
        SpectralField {
            lattice: Arc::clone(lattice),
            coeffs: vec![0.0; lattice.len()],
        }
    }

    pub fn from_coeffs(lattice: &Arc<WavenumberLattice>, coeffs: Vec<f64>) -> SpectralField {
        assert_eq!(coeffs.len(), lattice.len(), "coefficient count != mode count");
        SpectralField {
            lattice: Arc::clone(lattice),
            coeffs,
        }
    }

    pub fn lattice(&self) -> &Arc<WavenumberLattice> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn get(&self, m: Mode) -> f64 {
        let i = self.lattice.index_of(m).expect("mode outside lattice");
        self.coeffs[i]
    }

    pub fn set(&mut self, m: Mode, v: f64) {
        let i = self.lattice.index_of(m).expect("mode outside lattice");
        self.coeffs[i] = v;
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= a;
        }
        out
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.lattice, other.lattice, "lattice mismatch");
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += a * o;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Fractional Sobolev norm (sum_k mu_k^alpha u_k^2)^(1/2). Every alpha is
    /// admissible because the lattice is finite and excludes k = 0.
    pub fn sobolev_norm(&self, alpha: f64) -> f64 {
        let mut s = 0.0;
        for (m, c) in self.lattice.modes().iter().zip(&self.coeffs) {
            s += self.lattice.eigenvalue_mu(*m).powf(alpha) * c * c;
        }
        s.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// (-Lap)^{alpha/2}: multiply each coefficient by mu_k^{alpha/2}.
    pub fn fractional_laplacian(&self, alpha: f64) -> SpectralField {
        let mut out = self.clone();
        for (m, c) in self.lattice.modes().iter().zip(&mut out.coeffs) {
            *c *= self.lattice.eigenvalue_mu(*m).powf(alpha / 2.0);
        }
        out
    }

    /// Biharmonic heat semigroup: coefficients scaled by exp(-t delta mu_k^2).
    pub fn semigroup(&self, t: f64, delta: f64) -> Result<SpectralField> {
        check_param(t >= 0.0, "t", ">= 0", t)?;
        check_param(delta > 0.0 && delta.is_finite(), "delta", "> 0", delta)?;
        let mut out = self.clone();
        for (m, c) in self.lattice.modes().iter().zip(&mut out.coeffs) {
            let mu = self.lattice.eigenvalue_mu(*m);
            *c *= (-t * delta * mu * mu).exp();
        }
        Ok(out)
    }

    /// Exact spectral gradient. Differentiation along axis i maps the mode
    /// (k1, k2) onto its sign-flipped partner in component i with factor
    /// +-2 pi k_i / L, so the result stays on the same lattice.
    pub fn gradient(&self) -> VectorField {
        let lat = &self.lattice;
        let mut d1 = SpectralField::zeros(lat);
        let mut d2 = SpectralField::zeros(lat);
        let rate = 2.0 * std::f64::consts::PI / lat.domain_len();
        for (m, &c) in lat.modes().iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            if m.k1 != 0 {
                // w_m' = (2 pi m / L) w_{-m} (m > 0), -(2 pi |m| / L) w_{|m|} (m < 0)
                let target = Mode {
                    k1: -m.k1,
                    k2: m.k2,
                };
                let i = lat.index_of(target).unwrap();
                let sign = if m.k1 > 0 { 1.0 } else { -1.0 };
                d1.coeffs[i] += sign * rate * m.k1.abs() as f64 * c;
            }
            if m.k2 != 0 {
                let target = Mode {
                    k1: m.k1,
                    k2: -m.k2,
                };
                let i = lat.index_of(target).unwrap();
                let sign = if m.k2 > 0 { 1.0 } else { -1.0 };
                d2.coeffs[i] += sign * rate * m.k2.abs() as f64 * c;
            }
        }
        VectorField { x1: d1, x2: d2 }
    }
}

/// Two-component field, e.g. a gradient or a slope current.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x1: SpectralField,
    pub x2: SpectralField,
}

impl VectorField {
    /// d1 g1 + d2 g2, exact on the truncated basis.
    pub fn divergence(&self) -> SpectralField {
        let g1 = self.x1.gradient();
        let g2 = self.x2.gradient();
        let mut out = g1.x1;
        out.axpy(1.0, &g2.x2);
        out
    }

    /// Vector Sobolev norm: (||g1||^2 + ||g2||^2)^(1/2) at scale alpha.
    pub fn sobolev_norm(&self, alpha: f64) -> f64 {
        let a = self.x1.sobolev_norm(alpha);
        let b = self.x2.sobolev_norm(alpha);
        (a * a + b * b).sqrt()
    }
}

/// Operator norm bound for the semigroup between Sobolev scales:
/// ||exp(tA) u||_{H^beta} <= bound(alpha, beta, t) ||u||_{H^alpha}.
pub fn semigroup_norm_bound(alpha: f64, beta: f64, t: f64) -> Result<f64> {
    check_param(beta > alpha, "beta", "> alpha", beta)?;
    check_param(t > 0.0, "t", "> 0", t)?;
    let g = (beta - alpha) / 4.0;
    Ok((g / std::f64::consts::E).powf(g) * t.powf(-g))
}

/// Real samples of a field on the uniform n x n grid x_ij = (i L/n, j L/n),
/// stored row-major with i indexing the first coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalGrid {
    pub domain_len: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl PhysicalGrid {
    pub fn new(domain_len: f64, n: usize, values: Vec<f64>) -> PhysicalGrid {
        assert_eq!(values.len(), n * n, "grid storage size != n^2");
        PhysicalGrid {
            domain_len,
            n,
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// L^2 norm by the rectangle rule, exact for band-limited samples.
    pub fn quadrature_l2(&self) -> f64 {
        let cell = (self.domain_len / self.n as f64).powi(2);
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}
