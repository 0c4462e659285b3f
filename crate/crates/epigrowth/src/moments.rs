//! Closed-form statistics of the mollified stochastic convolution.
//!
//! Everything here is an exact finite sum over the lattice, evaluated at
//! noise strength sigma = 1; callers scale second moments by sigma^2. The
//! Monte Carlo counterparts in the test suites and the studies module are
//! the independent oracles these formulas are checked against.

use crate::lattice::{basis_factor, basis_factor_deriv, Mode, WavenumberLattice};
use crate::profile::{ProfileKind, RegularizationProfile};
use crate::{check_param, Result};

/// Var Z_k(t) for one mode started at zero: (1 - e^{-2 t delta mu^2}) / (2 delta mu^2).
pub fn ou_variance(delta: f64, mu: f64, t: f64) -> f64 {
    let lam = delta * mu * mu;
    -(-2.0 * lam * t).exp_m1() / (2.0 * lam)
}

/// E ||Z_eps(t)||_{L^2}^2 = sum_k alpha_k^2 Var Z_k(t).
pub fn moment_l2(profile: &RegularizationProfile, t: f64, delta: f64) -> Result<f64> {
    moment_h_alpha(profile, t, 0.0, delta)
}

/// E ||Z_eps(t)||_{H^alpha}^2 = sum_k alpha_k^2 (1 - e^{-2 t delta mu^2}) / (2 delta mu^{2-alpha}).
///
/// For the identity profile and alpha >= 1 the full-lattice series diverges;
/// at finite truncation the partial sum is still exact, and the growth with
/// N is what the divergence tests record.
pub fn moment_h_alpha(
    profile: &RegularizationProfile,
    t: f64,
    alpha: f64,
    delta: f64,
) -> Result<f64> {
    check_param(t >= 0.0, "t", ">= 0", t)?;
    check_param(delta > 0.0, "delta", "> 0", delta)?;
    let lat = profile.lattice();
    let mut s = 0.0;
    for (m, a) in lat.modes().iter().zip(profile.values()) {
        let mu = lat.eigenvalue_mu(*m);
        s += a * a * mu.powf(alpha) * ou_variance(delta, mu, t);
    }
    Ok(s)
}

/// E ||Z(t) - Z_eps(t)||_{L^2}^2 under shared per-mode noise:
/// sum_k (1 - alpha_k)^2 Var Z_k(t).
pub fn coupling_moment_l2(profile: &RegularizationProfile, t: f64, delta: f64) -> Result<f64> {
    check_param(t >= 0.0, "t", ">= 0", t)?;
    check_param(delta > 0.0, "delta", "> 0", delta)?;
    let lat = profile.lattice();
    let mut s = 0.0;
    for (m, a) in lat.modes().iter().zip(profile.values()) {
        let mu = lat.eigenvalue_mu(*m);
        s += (1.0 - a) * (1.0 - a) * ou_variance(delta, mu, t);
    }
    Ok(s)
}

/// Var Z_eps(t, x) = sum_k (alpha_k e_k(x))^2 Var Z_k(t). For radial
/// profiles the value does not depend on x: the four sign flips of a mode
/// share alpha and mu, and their squared basis values sum to a constant.
pub fn pointwise_variance(
    profile: &RegularizationProfile,
    t: f64,
    x: [f64; 2],
    delta: f64,
) -> Result<f64> {
    check_param(t >= 0.0, "t", ">= 0", t)?;
    check_param(delta > 0.0, "delta", "> 0", delta)?;
    let lat = profile.lattice();
    let mut s = 0.0;
    for (m, a) in lat.modes().iter().zip(profile.values()) {
        let e = lat.basis_eval(*m, x);
        s += a * a * e * e * ou_variance(delta, lat.eigenvalue_mu(*m), t);
    }
    Ok(s)
}

/// Sum of e_k(x)^2 over the distinct sign flips of k. The sin^2 + cos^2
/// pairing makes it x-independent: 4/L^2 off the axes, 2/L^2 on an axis.
pub fn sign_orbit_identity(domain_len: f64, k: Mode, x: [f64; 2]) -> f64 {
    let mut seen: Vec<(i32, i32)> = Vec::with_capacity(4);
    let mut s = 0.0;
    for s1 in [1, -1] {
        for s2 in [1, -1] {
            let flipped = (s1 * k.k1, s2 * k.k2);
            if seen.contains(&flipped) {
                continue;
            }
            seen.push(flipped);
            let e = basis_factor(domain_len, flipped.0, x[0]) * basis_factor(domain_len, flipped.1, x[1]);
            s += e * e;
        }
    }
    s
}

/// Exact increment identity
/// (1/lam) [ (1 - e^{-2 lam (t-s)}) + (1 - e^{-lam (t-s)})^2 (1 - e^{-2 lam s}) ]
/// with lam = delta mu^2, which equals 2 E[(Z_k(t) - Z_k(s))^2]. The tests
/// carry the factor 2 explicitly when matching Monte Carlo increments.
pub fn ou_increment_second_moment(
    lat: &WavenumberLattice,
    k: Mode,
    s: f64,
    t: f64,
    delta: f64,
) -> Result<f64> {
    check_param(s >= 0.0, "s", ">= 0", s)?;
    check_param(t >= s, "t", ">= s", t)?;
    check_param(delta > 0.0, "delta", "> 0", delta)?;
    let mu = lat.eigenvalue_mu(k);
    let lam = delta * mu * mu;
    let d = t - s;
    let a = -(-2.0 * lam * d).exp_m1();
    let b = (-lam * d).exp_m1().powi(2) * (-(-2.0 * lam * s).exp_m1());
    Ok((a + b) / lam)
}

/// Covariance of grad Z_eps(t, 0) at sigma = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCovariance {
    pub matrix: [[f64; 2]; 2],
    pub t: f64,
    pub kind: ProfileKind,
    pub epsilon: f64,
}

/// Cov(grad Z_eps(t, x)) evaluated at x = 0 by direct summation:
/// sum_k alpha_k^2 Var Z_k(t) grad e_k(0) grad e_k(0)^T.
///
/// The off-diagonal is exactly zero: D1 e_k(0) needs k1 > 0 and k2 <= 0
/// while D2 e_k(0) needs k2 > 0 and k1 <= 0, so every summand carries a
/// factor that is literally 0.0.
pub fn grad_covariance(
    profile: &RegularizationProfile,
    t: f64,
    delta: f64,
) -> Result<GradCovariance> {
    check_param(t >= 0.0, "t", ">= 0", t)?;
    check_param(delta > 0.0, "delta", "> 0", delta)?;
    let lat = profile.lattice();
    let l = lat.domain_len();
    let mut m00 = 0.0;
    let mut m01 = 0.0;
    let mut m11 = 0.0;
    for (m, a) in lat.modes().iter().zip(profile.values()) {
        if *a == 0.0 {
            continue;
        }
        let w = a * a * ou_variance(delta, lat.eigenvalue_mu(*m), t);
        let d1 = basis_factor_deriv(l, m.k1, 0.0) * basis_factor(l, m.k2, 0.0);
        let d2 = basis_factor(l, m.k1, 0.0) * basis_factor_deriv(l, m.k2, 0.0);
        m00 += w * d1 * d1;
        m01 += w * d1 * d2;
        m11 += w * d2 * d2;
    }
    Ok(GradCovariance {
        matrix: [[m00, m01], [m01, m11]],
        t,
        kind: profile.kind(),
        epsilon: profile.epsilon(),
    })
}

pub fn grad_covariance_det(cov: &GradCovariance) -> f64 {
    let m = &cov.matrix;
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// The quarter-lattice series S = sum_{k1 >= 1, k2 <= -1} (k1/|k|^2)^2 alpha_k^2.
/// Log-divergent over the full lattice; its partial-sum growth is the
/// engine of the decay bound.
pub fn quarter_series(profile: &RegularizationProfile) -> f64 {
    let lat = profile.lattice();
    let mut s = 0.0;
    for (m, a) in lat.modes().iter().zip(profile.values()) {
        if m.k1 >= 1 && m.k2 <= -1 {
            let r2 = m.norm_sq() as f64;
            let q = m.k1 as f64 / r2;
            s += q * q * a * a;
        }
    }
    s
}

/// K = S^beta, floored at m_floor.
pub fn k_from_series(series: f64, beta: f64, m_floor: f64) -> Result<f64> {
    check_param(beta > 0.0 && beta < 1.0, "beta", "in (0,1)", beta)?;
    check_param(m_floor > 0.0, "M", "> 0", m_floor)?;
    Ok(series.powf(beta).max(m_floor))
}

pub fn k_epsilon(profile: &RegularizationProfile, beta: f64, m_floor: f64) -> Result<f64> {
    k_from_series(quarter_series(profile), beta, m_floor)
}

/// (2/(1 + K - M))^p + (1/2) / sqrt(det_scaled), the fully computable form
/// of the small-gradient decay bound; det_scaled is the covariance
/// determinant after the 1/K^2 rescaling of the gradient. Zero determinant
/// reports +inf.
pub fn ucv_bound_from_parts(k: f64, m_floor: f64, p: f64, det_scaled: f64) -> f64 {
    if det_scaled <= 0.0 {
        return f64::INFINITY;
    }
    (2.0 / (1.0 + k - m_floor)).powf(p) + 0.5 / det_scaled.sqrt()
}

/// Computable upper bound for E |f(grad u_eps(t, x))|^p at sigma = 1.
pub fn ucv_upper_bound(
    profile: &RegularizationProfile,
    t: f64,
    p: f64,
    m_floor: f64,
    beta: f64,
    delta: f64,
) -> Result<f64> {
    check_param(t >= 0.0, "t", ">= 0", t)?;
    check_param(p > 1.0, "p", "> 1", p)?;
    let k = k_epsilon(profile, beta, m_floor)?;
    let det_raw = grad_covariance_det(&grad_covariance(profile, t, delta)?);
    Ok(ucv_bound_from_parts(k, m_floor, p, det_raw / k.powi(4)))
}
