//! The slope current f(z) = z/(1+|z|^2), its divergence form, and the
//! energy functional the deterministic flow descends.

use crate::field::{PhysicalGrid, SpectralField};
use crate::lattice::Mode;
use crate::transform::{to_physical, to_spectral};
use crate::Result;

/// f(z) = z / (1 + |z|^2). Bounded by 1/2, Lipschitz with constant 1.
pub fn f_point(z: [f64; 2]) -> [f64; 2] {
    let d = 1.0 + z[0] * z[0] + z[1] * z[1];
    [z[0] / d, z[1] / d]
}

/// Jacobian of f. Symmetric; eigenvectors are the radial and tangential
/// directions with eigenvalues (1-r^2)/(1+r^2)^2 and 1/(1+r^2), so the
/// operator norm is at most 1 (attained only at z = 0).
pub fn f_jacobian(z: [f64; 2]) -> [[f64; 2]; 2] {
    let (a, b) = (z[0], z[1]);
    let d = 1.0 + a * a + b * b;
    let d2 = d * d;
    [
        [(1.0 + b * b - a * a) / d2, -2.0 * a * b / d2],
        [-2.0 * a * b / d2, (1.0 + a * a - b * b) / d2],
    ]
}

/// div f(grad u), dealiased: the gradient is exact on the basis, f is
/// applied pointwise on the n_grid^2 physical grid, and projecting back
/// onto the truncated basis defines the discrete nonlinearity. n_grid
/// should oversample (the default elsewhere is 4N) since f generates all
/// harmonics.
pub fn nonlinearity(u: &SpectralField, n_grid: usize) -> Result<SpectralField> {
    let lat = u.lattice();
    let grad = u.gradient();
    let g1 = to_physical(&grad.x1, n_grid)?;
    let g2 = to_physical(&grad.x2, n_grid)?;
    let mut f1 = vec![0.0; n_grid * n_grid];
    let mut f2 = vec![0.0; n_grid * n_grid];
    for (i, (a, b)) in g1.values.iter().zip(&g2.values).enumerate() {
        let v = f_point([*a, *b]);
        f1[i] = v[0];
        f2[i] = v[1];
    }
    let l = lat.domain_len();
    let s1 = to_spectral(&PhysicalGrid::new(l, n_grid, f1), lat)?;
    let s2 = to_spectral(&PhysicalGrid::new(l, n_grid, f2), lat)?;
    let mut out = s1.gradient().x1;
    out.axpy(1.0, &s2.gradient().x2);
    Ok(out)
}

/// E(u) = (1/2) ( delta ||Lap u||_{L^2}^2 - int ln(1 + |grad u|^2) dx ).
/// The curvature term is an exact lattice sum; the log term uses the
/// rectangle rule on the n_grid^2 grid.
pub fn energy(u: &SpectralField, delta: f64, n_grid: usize) -> Result<f64> {
    let lat = u.lattice();
    let curvature: f64 = lat
        .modes()
        .iter()
        .zip(u.coeffs())
        .map(|(m, c)| {
            let mu = lat.eigenvalue_mu(*m);
            mu * mu * c * c
        })
        .sum();
    let grad = u.gradient();
    let g1 = to_physical(&grad.x1, n_grid)?;
    let g2 = to_physical(&grad.x2, n_grid)?;
    let cell = (lat.domain_len() / n_grid as f64).powi(2);
    let log_term: f64 = g1
        .values
        .iter()
        .zip(&g2.values)
        .map(|(a, b)| (1.0 + a * a + b * b).ln() * cell)
        .sum();
    Ok(0.5 * (delta * curvature - log_term))
}

/// Growth rate of mode k under the linearization about the flat surface:
/// mu_k - delta mu_k^2. Positive rates are the unstable hill-forming band.
pub fn linear_growth_rate(domain_len: f64, k: Mode, delta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mu = (two_pi / domain_len).powi(2) * k.norm_sq() as f64;
    mu - delta * mu * mu
}
