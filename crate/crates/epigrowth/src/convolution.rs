//! Exact sampling of the stochastic convolution.
//!
//! Each lattice mode carries an independent Ornstein-Uhlenbeck process
//! Z_k with damping rate delta mu_k^2 and unit-intensity drive, started at
//! zero. The transition over any dt is Gaussian and known in closed form, so
//! stepping is exact in distribution regardless of dt.
//!
//! Randomness is counter-addressed: a normal variate is a pure function of
//! (sample key, mode id, step index), drawn from a ChaCha stream positioned
//! at that counter. This buys three properties the studies rely on:
//! - samples are independent work items (no shared RNG, any worker count),
//! - the same master seed couples runs across different truncations and
//!   profiles, because a mode's id does not depend on the lattice size,
//! - replaying a path is cheap and bit-exact.

use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::SpectralField;
use crate::lattice::{Mode, WavenumberLattice};
use crate::profile::RegularizationProfile;
use crate::{check_param, Result};

/// 32-byte ChaCha key for one (master seed, sample index) pair, expanded by
/// a SplitMix64 chain.
pub fn sample_key(master_seed: u64, sample: u64) -> [u8; 32] {
    let mut state = master_seed ^ sample.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    key
}

/// Stream id of a mode: 10 bits per shifted component. Independent of the
/// lattice the mode sits on, which is what makes cross-truncation coupling
/// work.
pub fn mode_stream(m: Mode) -> u64 {
    (((m.k1 + 512) as u64) << 10) | ((m.k2 + 512) as u64)
}

/// Standard normal variate at a (key, stream, draw) counter, via Box-Muller
/// on two ChaCha words. Consumes a fixed four 32-bit words per draw so the
/// counter arithmetic never depends on values drawn.
pub fn normal_at(key: &[u8; 32], stream: u64, draw: u64) -> f64 {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(stream);
    rng.set_word_pos((draw as u128) * 4);
    let a = rng.next_u64();
    let b = rng.next_u64();
    // u in (0,1], v in [0,1)
    let u = 1.0 - (a >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let v = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Per-mode OU values Z_k(t), plus the counter state to continue the path.
#[derive(Clone, Debug)]
pub struct ConvolutionState {
    lattice: Arc<WavenumberLattice>,
    delta: f64,
    key: [u8; 32],
    t: f64,
    step: u64,
    z: Vec<f64>,
    cache: StepCache,
}

#[derive(Clone, Debug)]
struct StepCache {
    dt: f64,
    decay: Vec<f64>,    // e^{-delta mu^2 dt}
    noise_sd: Vec<f64>, // sqrt((1 - e^{-2 delta mu^2 dt}) / (2 delta mu^2))
}

impl ConvolutionState {
    pub fn new(
        lattice: &Arc<WavenumberLattice>,
        delta: f64,
        master_seed: u64,
        sample: u64,
    ) -> Result<ConvolutionState> {
        check_param(delta > 0.0 && delta.is_finite(), "delta", "> 0", delta)?;
        Ok(ConvolutionState {
            lattice: Arc::clone(lattice),
            delta,
            key: sample_key(master_seed, sample),
            t: 0.0,
            step: 0,
            z: vec![0.0; lattice.len()],
            cache: StepCache {
                dt: f64::NAN,
                decay: Vec::new(),
                noise_sd: Vec::new(),
            },
        })
    }

    /// One exact step from zero; distributionally the same as any path that
    /// ends at t, and the cheap way to draw marginals for moment studies.
    pub fn sample_at(
        lattice: &Arc<WavenumberLattice>,
        delta: f64,
        master_seed: u64,
        sample: u64,
        t: f64,
    ) -> Result<ConvolutionState> {
        check_param(t >= 0.0, "t", ">= 0", t)?;
        let mut state = ConvolutionState::new(lattice, delta, master_seed, sample)?;
        if t > 0.0 {
            state.ou_step(t)?;
        }
        Ok(state)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lattice(&self) -> &Arc<WavenumberLattice> {
        &self.lattice
    }

    /// Raw per-mode values, no profile, no noise strength.
    pub fn raw(&self) -> &[f64] {
        &self.z
    }

    fn refresh_cache(&mut self, dt: f64) {
        if self.cache.dt == dt {
            return;
        }
        let modes = self.lattice.modes();
        let mut decay = Vec::with_capacity(modes.len());
        let mut noise_sd = Vec::with_capacity(modes.len());
        for m in modes {
            let mu = self.lattice.eigenvalue_mu(*m);
            let lam = self.delta * mu * mu;
            decay.push((-lam * dt).exp());
            noise_sd.push(((-(-2.0 * lam * dt).exp_m1()) / (2.0 * lam)).sqrt());
        }
        self.cache = StepCache {
            dt,
            decay,
            noise_sd,
        };
    }

    /// Exact transition: Z_k <- e^{-delta mu^2 dt} Z_k + eta_k with eta_k
    /// drawn at this state's step counter. Every mode consumes the same step
    /// index, so paths with equal dt sequences see equal noise regardless of
    /// lattice size or profile.
    pub fn ou_step(&mut self, dt: f64) -> Result<()> {
        check_param(dt > 0.0 && dt.is_finite(), "dt", "> 0", dt)?;
        self.refresh_cache(dt);
        let modes = self.lattice.modes();
        for (i, m) in modes.iter().enumerate() {
            let eta = normal_at(&self.key, mode_stream(*m), self.step);
            self.z[i] = self.cache.decay[i] * self.z[i] + self.cache.noise_sd[i] * eta;
        }
        self.step += 1;
        self.t += dt;
        Ok(())
    }

    /// sigma alpha_k Z_k: the mollified, strength-scaled convolution.
    pub fn readout(&self, profile: &RegularizationProfile, sigma: f64) -> SpectralField {
        assert_eq!(
            profile.lattice(),
            &self.lattice,
            "profile built for a different lattice"
        );
        let coeffs = self
            .z
            .iter()
            .zip(profile.values())
            .map(|(z, a)| sigma * a * z)
            .collect();
        SpectralField::from_coeffs(&self.lattice, coeffs)
    }
}
