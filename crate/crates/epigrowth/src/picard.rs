//! Fixed-point solution of the integral form of the equation on a frozen
//! noise path.
//!
//! On a time grid the map
//!
//! ```text
//! G(u)(t_i) = e^{t_i A} u0 - int_0^{t_i} e^{(t_i - s) A} F(u(s)) ds + sigma Z(t_i)
//! ```
//!
//! is iterated to its fixed point. The integral uses left-endpoint product
//! quadrature with the kernel integrated exactly on each subinterval, so
//! the running integral obeys I_i = decay I_{i-1} + phi1 F_{i-1} per mode
//! and a sweep costs one nonlinearity evaluation per node. The same
//! per-interval tables drive the marching integrator, which makes the two
//! solvers directly comparable path by path.

use std::sync::Arc;

use crate::convolution::ConvolutionState;
use crate::field::SpectralField;
use crate::lattice::WavenumberLattice;
use crate::nonlinearity::nonlinearity;
use crate::solver::{step_plan, SimulationConfig};
use crate::{check_param, Error, Result};

struct Kernel {
    decay: Vec<f64>,
    phi1: Vec<f64>,
}

impl Kernel {
    fn build(lattice: &WavenumberLattice, delta: f64, dt: f64) -> Kernel {
        let mut decay = Vec::with_capacity(lattice.len());
        let mut phi1 = Vec::with_capacity(lattice.len());
        for m in lattice.modes() {
            let lam = delta * lattice.eigenvalue_mu(*m).powi(2);
            decay.push((-dt * lam).exp());
            phi1.push(-(-dt * lam).exp_m1() / lam);
        }
        Kernel { decay, phi1 }
    }
}

/// One realization of the mollified noise, tabulated on a time grid.
pub struct FrozenPath {
    times: Vec<f64>,
    /// sigma Z_eps at each node.
    noise: Vec<SpectralField>,
    kernels: Vec<Kernel>,
    /// Kernel index per subinterval (the grid is uniform except possibly
    /// the last subinterval).
    spans: Vec<usize>,
    lattice: Arc<WavenumberLattice>,
    delta: f64,
    n_grid: usize,
    slope_current: bool,
}

impl FrozenPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn noise(&self) -> &[SpectralField] {
        &self.noise
    }
}

/// Realize the noise for ensemble member `sample` on the config's step
/// grid. The draws are the ones the marching integrator would consume, so
/// both solvers see the identical path.
pub fn freeze_noise(config: &SimulationConfig, sample: u64) -> Result<FrozenPath> {
    config.validate()?;
    let lattice = config.lattice()?;
    let profile = config.make_profile(&lattice)?;
    let mut conv = ConvolutionState::new(&lattice, config.delta, config.seed, sample)?;
    let (n_steps, rem) = step_plan(config.horizon, config.dt);
    // times accumulate by repeated addition, matching the live stepper's
    // clock bit for bit
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut noise = vec![conv.readout(&profile, config.sigma)];
    let mut kernels = vec![Kernel::build(&lattice, config.delta, config.dt)];
    let mut spans = Vec::new();
    for _ in 0..n_steps {
        conv.ou_step(config.dt)?;
        t += config.dt;
        times.push(t);
        noise.push(conv.readout(&profile, config.sigma));
        spans.push(0);
    }
    if rem > 0.0 {
        conv.ou_step(rem)?;
        t += rem;
        times.push(t);
        noise.push(conv.readout(&profile, config.sigma));
        kernels.push(Kernel::build(&lattice, config.delta, rem));
        spans.push(1);
    }
    Ok(FrozenPath {
        times,
        noise,
        kernels,
        spans,
        lattice,
        delta: config.delta,
        n_grid: config.n_grid,
        slope_current: config.slope_current,
    })
}

/// March the exponential integrator along the frozen path. Same update
/// rule and tables as the live stepper, so with equal config and sample
/// the trajectories agree bitwise.
pub fn etd_on_path(u0: &SpectralField, path: &FrozenPath) -> Result<Vec<SpectralField>> {
    let mut v = u0.clone();
    let mut out = Vec::with_capacity(path.times.len());
    let mut u = v.clone();
    u.axpy(1.0, &path.noise[0]);
    out.push(u);
    for (i, &span) in path.spans.iter().enumerate() {
        let kern = &path.kernels[span];
        let feedback = if path.slope_current {
            Some(nonlinearity(&out[i], path.n_grid)?)
        } else {
            None
        };
        for j in 0..v.coeffs().len() {
            let mut c = kern.decay[j] * v.coeffs()[j];
            if let Some(f) = &feedback {
                c -= kern.phi1[j] * f.coeffs()[j];
            }
            v.coeffs_mut()[j] = c;
        }
        let mut u = v.clone();
        u.axpy(1.0, &path.noise[i + 1]);
        out.push(u);
    }
    Ok(out)
}

/// Fixed point of the integral map, with iteration history.
pub struct PicardOutcome {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    pub iterations: usize,
    /// sup_t H^1 distance between successive iterates, one entry per sweep.
    pub residuals: Vec<f64>,
}

/// Iterate the integral map from the no-feedback profile e^{tA}u0 + noise
/// until successive sweeps differ by less than `tol` in sup_t H^1, or fail
/// with the last residual after `max_iter` sweeps.
pub fn picard_solve(
    u0: &SpectralField,
    path: &FrozenPath,
    tol: f64,
    max_iter: usize,
) -> Result<PicardOutcome> {
    check_param(tol > 0.0, "tol", "> 0", tol)?;
    check_param(max_iter >= 1, "max_iter", ">= 1", max_iter as f64)?;
    let n = path.times.len();
    let mut base = Vec::with_capacity(n);
    for (i, t) in path.times.iter().enumerate() {
        let mut b = u0.semigroup(*t, path.delta)?;
        b.axpy(1.0, &path.noise[i]);
        base.push(b);
    }
    let mut current = base.clone();
    let mut residuals = Vec::new();
    for sweep in 1..=max_iter {
        let mut integral = SpectralField::zeros(&path.lattice);
        let mut next = Vec::with_capacity(n);
        next.push(base[0].clone());
        for (i, &span) in path.spans.iter().enumerate() {
            let kern = &path.kernels[span];
            let feedback = if path.slope_current {
                Some(nonlinearity(&current[i], path.n_grid)?)
            } else {
                None
            };
            for j in 0..integral.coeffs().len() {
                let mut c = kern.decay[j] * integral.coeffs()[j];
                if let Some(f) = &feedback {
                    c += kern.phi1[j] * f.coeffs()[j];
                }
                integral.coeffs_mut()[j] = c;
            }
            let mut u = base[i + 1].clone();
            u.axpy(-1.0, &integral);
            next.push(u);
        }
        let residual = current
            .iter()
            .zip(&next)
            .map(|(a, b)| a.sub(b).sobolev_norm(1.0))
            .fold(0.0f64, f64::max);
        residuals.push(residual);
        current = next;
        if residual < tol {
            return Ok(PicardOutcome {
                times: path.times.clone(),
                fields: current,
                iterations: sweep,
                residuals,
            });
        }
    }
    Err(Error::NoConvergence {
        residual: *residuals.last().unwrap(),
        iters: max_iter,
        tol,
    })
}

/// ln Gamma(half/2) by the recursion Gamma(x+1) = x Gamma(x) down to
/// Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
fn ln_gamma_half(half: u64) -> f64 {
    assert!(half >= 1);
    let mut acc = if half.is_multiple_of(2) {
        0.0
    } else {
        0.5 * std::f64::consts::PI.ln()
    };
    let mut k = half;
    while k > 2 {
        k -= 2;
        acc += (k as f64 / 2.0).ln();
    }
    acc
}

/// Lipschitz bound for the n-fold integral map on horizon T:
/// 2 Gamma(3/2) (T Gamma(1/2)^2 / (2e))^{n/2} / Gamma((n+2)/2).
/// Falls below 1 for moderate n at any fixed T, which is what makes the
/// fixed-point iteration converge.
pub fn contraction_constant(n: u32, horizon: f64) -> Result<f64> {
    check_param(n >= 1, "n", ">= 1", n as f64)?;
    check_param(horizon > 0.0, "T", "> 0", horizon)?;
    let pi = std::f64::consts::PI;
    let e = std::f64::consts::E;
    let ln = (2.0f64).ln() + ln_gamma_half(3)
        + (n as f64 / 2.0) * (horizon * pi / (2.0 * e)).ln()
        - ln_gamma_half(n as u64 + 2);
    Ok(ln.exp())
}
