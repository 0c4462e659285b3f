//! Time integration of the full equation.
//!
//! The state advanced in time is v = u - sigma Z, the solution with the
//! stochastic convolution subtracted. v satisfies a random PDE with no
//! noise term,
//!
//! ```text
//! d/dt v = -delta Lap^2 v - F(v + sigma Z),      F(w) = div f(grad w)
//! ```
//!
//! which one first-order exponential step advances as
//! v' = e^{dt A} v - phi1(dt) F(u). The linear part and the noise are
//! exact (the OU states are sampled from their true transition kernel);
//! only the frozen nonlinearity carries an O(dt^2) local error. Keeping v
//! rather than u makes "nonlinearity off" runs reproduce the stochastic
//! convolution bitwise, which the coupling studies lean on.

use std::sync::Arc;

use crate::convolution::{normal_at, sample_key, ConvolutionState};
use crate::field::SpectralField;
use crate::lattice::{Mode, WavenumberLattice};
use crate::nonlinearity::{energy, nonlinearity};
use crate::profile::{ProfileKind, RegularizationProfile};
use crate::transform::to_physical;
use crate::{check_param, Error, Result};

/// Initial surface shape. Random coefficients are drawn from the sample's
/// own key (stream = mode, draw index offset far above any step counter),
/// so ensembles get independent surfaces and reruns are reproducible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialCondition {
    Zero,
    SingleMode { k1: i32, k2: i32, amplitude: f64 },
    /// Gaussian coefficients damped by e^{-|k|^2/8}, scaled to `amplitude`.
    RandomSmooth { amplitude: f64 },
}

/// Draw index base for initial-condition noise; step counters stay far
/// below this for any realistic horizon.
const IC_DRAW_BASE: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub domain_len: f64,
    pub trunc: i32,
    pub delta: f64,
    pub sigma: f64,
    pub profile: ProfileKind,
    pub epsilon: f64,
    /// Tail exponent for the smooth-rational profile; unused otherwise.
    pub profile_decay: f64,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub n_grid: usize,
    pub snapshot_every: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub initial: InitialCondition,
    /// When false the slope current is dropped and the dynamics are the
    /// exactly-solvable linear equation; used as a control in the
    /// convergence studies.
    pub slope_current: bool,
}

impl Default for SimulationConfig {
    fn default() -> SimulationConfig {
        SimulationConfig {
            domain_len: 2.0 * std::f64::consts::PI,
            trunc: 16,
            delta: 1.0,
            sigma: 1.0,
            profile: ProfileKind::SharpCutoff,
            epsilon: 0.125,
            profile_decay: 1.0,
            dt: 1e-3,
            horizon: 0.5,
            seed: 0,
            n_grid: 64,
            snapshot_every: 10,
            picard_tol: 1e-6,
            picard_max_iter: 50,
            initial: InitialCondition::Zero,
            slope_current: true,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        check_param(self.domain_len > 0.0, "L", "> 0", self.domain_len)?;
        check_param(self.delta > 0.0, "delta", "> 0", self.delta)?;
        check_param(self.sigma >= 0.0, "sigma", ">= 0", self.sigma)?;
        check_param(self.epsilon >= 0.0, "eps", ">= 0", self.epsilon)?;
        check_param(self.dt > 0.0, "dt", "> 0", self.dt)?;
        check_param(self.horizon >= self.dt, "T", ">= dt", self.horizon)?;
        check_param(self.snapshot_every >= 1, "snapshot_every", ">= 1", self.snapshot_every as f64)?;
        let min = 2 * self.trunc + 2;
        if self.trunc >= 1 && self.n_grid < min as usize {
            return Err(Error::GridTooCoarse {
                n: self.n_grid,
                trunc: self.trunc,
                min: min as usize,
            });
        }
        if let InitialCondition::SingleMode { k1, k2, .. } = self.initial {
            Mode::new(k1, k2)?;
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Arc<WavenumberLattice>> {
        WavenumberLattice::new(self.domain_len, self.trunc)
    }

    pub fn make_profile(&self, lattice: &Arc<WavenumberLattice>) -> Result<RegularizationProfile> {
        RegularizationProfile::make(self.profile, self.epsilon, self.profile_decay, lattice)
    }

    /// u(0) for ensemble member `sample`, deterministic in (seed, sample).
    pub fn initial_field(
        &self,
        lattice: &Arc<WavenumberLattice>,
        sample: u64,
    ) -> Result<SpectralField> {
        let mut u = SpectralField::zeros(lattice);
        match self.initial {
            InitialCondition::Zero => {}
            InitialCondition::SingleMode { k1, k2, amplitude } => {
                u.set(Mode::new(k1, k2)?, amplitude);
            }
            InitialCondition::RandomSmooth { amplitude } => {
                let key = sample_key(self.seed, sample);
                for (i, m) in lattice.modes().iter().enumerate() {
                    let damp = (-(m.norm_sq() as f64) / 8.0).exp();
                    let g = normal_at(&key, crate::convolution::mode_stream(*m), IC_DRAW_BASE);
                    u.coeffs_mut()[i] = amplitude * damp * g;
                }
            }
        }
        Ok(u)
    }
}

/// Per-step multiplier tables for a fixed dt: decay = e^{-dt delta mu^2}
/// and phi1 = (1 - decay)/(delta mu^2), the exact integral of the
/// semigroup against a frozen source over one step.
pub struct EtdStepper {
    dt: f64,
    decay: Vec<f64>,
    phi1: Vec<f64>,
    n_grid: usize,
    slope_current: bool,
}

impl EtdStepper {
    pub fn new(config: &SimulationConfig, lattice: &Arc<WavenumberLattice>, dt: f64) -> Result<EtdStepper> {
        check_param(dt > 0.0, "dt", "> 0", dt)?;
        let mut decay = Vec::with_capacity(lattice.len());
        let mut phi1 = Vec::with_capacity(lattice.len());
        for m in lattice.modes() {
            let lam = config.delta * lattice.eigenvalue_mu(*m).powi(2);
            let d = (-dt * lam).exp();
            decay.push(d);
            phi1.push(-(-dt * lam).exp_m1() / lam);
        }
        Ok(EtdStepper {
            dt,
            decay,
            phi1,
            n_grid: config.n_grid,
            slope_current: config.slope_current,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// One trajectory's worth of evolving state.
pub struct SolverState {
    v: SpectralField,
    conv: ConvolutionState,
    profile: RegularizationProfile,
    sigma: f64,
    t: f64,
}

impl SolverState {
    pub fn new(config: &SimulationConfig, sample: u64) -> Result<SolverState> {
        config.validate()?;
        let lattice = config.lattice()?;
        let profile = config.make_profile(&lattice)?;
        let conv = ConvolutionState::new(&lattice, config.delta, config.seed, sample)?;
        let v = config.initial_field(&lattice, sample)?;
        Ok(SolverState {
            v,
            conv,
            profile,
            sigma: config.sigma,
            t: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn lattice(&self) -> &Arc<WavenumberLattice> {
        self.v.lattice()
    }

    pub fn profile(&self) -> &RegularizationProfile {
        &self.profile
    }

    /// The subtracted-noise component v = u - sigma Z.
    pub fn v(&self) -> &SpectralField {
        &self.v
    }

    /// sigma Z_eps(t), the mollified stochastic convolution.
    pub fn noise_field(&self) -> SpectralField {
        self.conv.readout(&self.profile, self.sigma)
    }

    /// Noise readout under a different mollifier, off the same driving
    /// paths; the coupling studies compare profiles this way.
    pub fn noise_field_as(&self, profile: &RegularizationProfile) -> SpectralField {
        self.conv.readout(profile, self.sigma)
    }

    /// The solution u = v + sigma Z.
    pub fn solution(&self) -> SpectralField {
        let mut u = self.noise_field();
        u.axpy(1.0, &self.v);
        u
    }

    /// Advance by one step of `stepper`'s dt.
    pub fn step(&mut self, stepper: &EtdStepper) -> Result<()> {
        let feedback = if stepper.slope_current {
            let u = self.solution();
            Some(nonlinearity(&u, stepper.n_grid)?)
        } else {
            None
        };
        for i in 0..self.v.coeffs().len() {
            let mut c = stepper.decay[i] * self.v.coeffs()[i];
            if let Some(f) = &feedback {
                c -= stepper.phi1[i] * f.coeffs()[i];
            }
            self.v.coeffs_mut()[i] = c;
        }
        self.conv.ou_step(stepper.dt)?;
        self.t += stepper.dt;
        Ok(())
    }
}

/// Scalar diagnostics recorded along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRow {
    pub t: f64,
    pub energy: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    /// ||f(grad u)||_{L^2} by grid quadrature.
    pub f_l2: f64,
    /// max over the evaluation grid of |grad v|; a lower bound for the
    /// true sup.
    pub sup_grad_v: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rows: Vec<DiagRow>,
    /// (t, u) snapshots at the diagnostic cadence.
    pub snapshots: Vec<(f64, SpectralField)>,
}

impl Trajectory {
    pub fn final_field(&self) -> &SpectralField {
        &self.snapshots.last().expect("at least the initial snapshot").1
    }
}

fn grid_sup_of_gradient(u: &SpectralField, n_grid: usize) -> Result<f64> {
    let g = u.gradient();
    let g1 = to_physical(&g.x1, n_grid)?;
    let g2 = to_physical(&g.x2, n_grid)?;
    let mut sup = 0.0f64;
    for (a, b) in g1.values.iter().zip(&g2.values) {
        sup = sup.max((a * a + b * b).sqrt());
    }
    Ok(sup)
}

fn diagnose(state: &SolverState, config: &SimulationConfig) -> Result<DiagRow> {
    let u = state.solution();
    let g = u.gradient();
    let g1 = to_physical(&g.x1, config.n_grid)?;
    let g2 = to_physical(&g.x2, config.n_grid)?;
    let cell = (config.domain_len / config.n_grid as f64).powi(2);
    let mut f_sq = 0.0;
    for (a, b) in g1.values.iter().zip(&g2.values) {
        let f = crate::nonlinearity::f_point([*a, *b]);
        f_sq += (f[0] * f[0] + f[1] * f[1]) * cell;
    }
    Ok(DiagRow {
        t: state.time(),
        energy: energy(&u, config.delta, config.n_grid)?,
        l2_norm: u.l2_norm(),
        h1_norm: u.sobolev_norm(1.0),
        f_l2: f_sq.sqrt(),
        sup_grad_v: grid_sup_of_gradient(state.v(), config.n_grid)?,
    })
}

/// Number of whole steps in the horizon plus the length of the ragged
/// final step (zero when dt divides T).
pub(crate) fn step_plan(horizon: f64, dt: f64) -> (usize, f64) {
    let n = (horizon / dt + 1e-9).floor() as usize;
    let rem = horizon - n as f64 * dt;
    if rem > 1e-9 * dt {
        (n, rem)
    } else {
        (n, 0.0)
    }
}

/// Run one trajectory (ensemble member 0) recording diagnostics and
/// snapshots every `snapshot_every` steps. Deterministic in the config.
pub fn simulate(config: &SimulationConfig) -> Result<Trajectory> {
    let mut state = SolverState::new(config, 0)?;
    let lattice = state.lattice().clone();
    let stepper = EtdStepper::new(config, &lattice, config.dt)?;
    let (n_steps, rem) = step_plan(config.horizon, config.dt);
    let mut rows = Vec::new();
    let mut snapshots = Vec::new();
    rows.push(diagnose(&state, config)?);
    snapshots.push((0.0, state.solution()));
    for i in 1..=n_steps {
        state.step(&stepper)?;
        if i % config.snapshot_every == 0 || (i == n_steps && rem == 0.0) {
            let row = diagnose(&state, config)?;
            if rows.last().map(|r| r.t) != Some(row.t) {
                rows.push(row);
                snapshots.push((state.time(), state.solution()));
            }
        }
    }
    if rem > 0.0 {
        let last = EtdStepper::new(config, &lattice, rem)?;
        state.step(&last)?;
        rows.push(diagnose(&state, config)?);
        snapshots.push((state.time(), state.solution()));
    }
    Ok(Trajectory { rows, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::linear_growth_rate;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn config_validation_catches_bad_fields() {
        let mut c = SimulationConfig::default();
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(c.validate().is_err());
        c.dt = 0.5;
        c.horizon = 0.25;
        assert!(c.validate().is_err());
        c = SimulationConfig {
            n_grid: 33,
            ..SimulationConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::GridTooCoarse { .. })));
        c = SimulationConfig {
            initial: InitialCondition::SingleMode { k1: 0, k2: 0, amplitude: 1.0 },
            ..SimulationConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_noise_zero_start_stays_zero() {
        let config = SimulationConfig {
            sigma: 0.0,
            horizon: 0.01,
            ..SimulationConfig::default()
        };
        let traj = simulate(&config).unwrap();
        for row in &traj.rows {
            assert_eq!(row.energy, 0.0);
            assert_eq!(row.l2_norm, 0.0);
            assert_eq!(row.f_l2, 0.0);
            assert_eq!(row.sup_grad_v, 0.0);
        }
        assert!(traj.final_field().coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn pure_decay_is_exact_per_mode() {
        // nonlinearity off, sigma = 0: each step multiplies by e^{-dt lam}
        let config = SimulationConfig {
            sigma: 0.0,
            slope_current: false,
            trunc: 4,
            n_grid: 16,
            dt: 0.01,
            horizon: 0.1,
            initial: InitialCondition::SingleMode { k1: 2, k2: -1, amplitude: 0.7 },
            ..SimulationConfig::default()
        };
        let traj = simulate(&config).unwrap();
        let lat = traj.final_field().lattice();
        let mu = lat.eigenvalue_mu(Mode { k1: 2, k2: -1 });
        let expect = 0.7 * (-0.1 * mu * mu).exp();
        let got = traj.final_field().get(Mode { k1: 2, k2: -1 });
        assert_relative_eq!(got, expect, max_relative = 1e-12);
        assert_relative_eq!(traj.final_field().l2_norm(), expect.abs(), max_relative = 1e-12);
    }

    #[test]
    fn simulate_is_reproducible() {
        let config = SimulationConfig {
            horizon: 0.02,
            trunc: 6,
            n_grid: 16,
            seed: 42,
            ..SimulationConfig::default()
        };
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x, y);
        }
        for ((ta, fa), (tb, fb)) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(ta, tb);
            assert_eq!(fa, fb);
        }
    }

    #[test]
    fn ragged_final_step_lands_on_the_horizon() {
        let config = SimulationConfig {
            sigma: 0.0,
            slope_current: false,
            trunc: 4,
            n_grid: 16,
            dt: 0.03,
            horizon: 0.1,
            initial: InitialCondition::SingleMode { k1: 1, k2: 0, amplitude: 1.0 },
            ..SimulationConfig::default()
        };
        let traj = simulate(&config).unwrap();
        let last_t = traj.rows.last().unwrap().t;
        assert!((last_t - 0.1).abs() < 1e-12, "ended at {last_t}");
        // linear decay is exact regardless of the step split
        let got = traj.final_field().get(Mode { k1: 1, k2: 0 });
        assert_relative_eq!(got, (-0.1f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn small_mode_grows_at_the_linear_rate() {
        let k = Mode { k1: 1, k2: 0 };
        let config = SimulationConfig {
            sigma: 0.0,
            delta: 0.1,
            trunc: 8,
            n_grid: 32,
            dt: 1e-3,
            horizon: 2.0,
            initial: InitialCondition::SingleMode { k1: 1, k2: 0, amplitude: 1e-6 },
            ..SimulationConfig::default()
        };
        let traj = simulate(&config).unwrap();
        let a0 = 1e-6;
        let a1 = traj.final_field().get(k);
        let measured = (a1 / a0).ln() / 2.0;
        let predicted = linear_growth_rate(2.0 * PI, k, 0.1);
        assert_relative_eq!(predicted, 0.9, epsilon = 1e-12);
        assert!(
            (measured - predicted).abs() <= 0.05 * predicted,
            "measured {measured} vs {predicted}"
        );
    }

    #[test]
    fn disabled_slope_current_keeps_v_identically_zero() {
        let config = SimulationConfig {
            slope_current: false,
            trunc: 6,
            n_grid: 16,
            horizon: 0.05,
            seed: 3,
            ..SimulationConfig::default()
        };
        let mut state = SolverState::new(&config, 0).unwrap();
        let lattice = state.lattice().clone();
        let stepper = EtdStepper::new(&config, &lattice, config.dt).unwrap();
        for _ in 0..50 {
            state.step(&stepper).unwrap();
            assert!(state.v().coeffs().iter().all(|c| *c == 0.0));
        }
        // so u is bitwise the stochastic convolution readout
        assert_eq!(state.solution(), state.noise_field());
    }

    #[test]
    fn random_smooth_initials_differ_across_samples_but_not_reruns() {
        let config = SimulationConfig {
            initial: InitialCondition::RandomSmooth { amplitude: 0.1 },
            trunc: 4,
            n_grid: 16,
            ..SimulationConfig::default()
        };
        let lat = config.lattice().unwrap();
        let a = config.initial_field(&lat, 0).unwrap();
        let b = config.initial_field(&lat, 1).unwrap();
        let a_again = config.initial_field(&lat, 0).unwrap();
        assert_eq!(a, a_again);
        assert_ne!(a, b);
        assert!(a.l2_norm() > 0.0);
    }
}
