//! Spectral mollifiers for the driving noise.
//!
//! A profile is a radial multiplier alpha_k in [0, 1] attached to a lattice.
//! Shrinking eps lets every alpha_k climb to 1, recovering the unmollified
//! noise; the families below differ in how the high modes are suppressed at
//! fixed eps.

use std::sync::Arc;

use crate::lattice::WavenumberLattice;
use crate::{check_param, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    /// alpha_k = 1 for |k| <= 1/eps, else 0.
    SharpCutoff,
    /// alpha_k = (1 + eps |k|^2)^(-decay/2), polynomial tail |k|^(-decay).
    SmoothRational,
    /// alpha_k = exp(-eps |k|).
    Exponential,
    /// alpha_k = 1: the unmollified noise.
    Identity,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::SharpCutoff => "sharp-cutoff",
            ProfileKind::SmoothRational => "smooth-rational",
            ProfileKind::Exponential => "exponential",
            ProfileKind::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Option<ProfileKind> {
        match s {
            "sharp-cutoff" => Some(ProfileKind::SharpCutoff),
            "smooth-rational" => Some(ProfileKind::SmoothRational),
            "exponential" => Some(ProfileKind::Exponential),
            "identity" => Some(ProfileKind::Identity),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegularizationProfile {
    kind: ProfileKind,
    epsilon: f64,
    decay: f64,
    lattice: Arc<WavenumberLattice>,
    values: Vec<f64>,
}

impl RegularizationProfile {
    /// `decay` is the tail exponent of the smooth-rational family and is
    /// ignored by the others. eps = 0 means no mollification in every family.
    pub fn make(
        kind: ProfileKind,
        epsilon: f64,
        decay: f64,
        lattice: &Arc<WavenumberLattice>,
    ) -> Result<RegularizationProfile> {
        check_param(epsilon >= 0.0 && epsilon.is_finite(), "eps", ">= 0", epsilon)?;
        if kind == ProfileKind::SmoothRational {
            check_param(decay > 0.0 && decay.is_finite(), "decay", "> 0", decay)?;
        }
        let values = lattice
            .modes()
            .iter()
            .map(|m| {
                let r = (m.norm_sq() as f64).sqrt();
                match kind {
                    ProfileKind::Identity => 1.0,
                    _ if epsilon == 0.0 => 1.0,
                    ProfileKind::SharpCutoff => {
                        if r <= 1.0 / epsilon {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    ProfileKind::SmoothRational => (1.0 + epsilon * r * r).powf(-decay / 2.0),
                    ProfileKind::Exponential => (-epsilon * r).exp(),
                }
            })
            .collect();
        Ok(RegularizationProfile {
            kind,
            epsilon,
            decay,
            lattice: Arc::clone(lattice),
            values,
        })
    }

    pub fn identity(lattice: &Arc<WavenumberLattice>) -> RegularizationProfile {
        RegularizationProfile::make(ProfileKind::Identity, 0.0, 0.0, lattice).unwrap()
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn lattice(&self) -> &Arc<WavenumberLattice> {
        &self.lattice
    }

    /// alpha by mode index (enumeration order).
    pub fn alpha(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Mode;
    use approx::assert_relative_eq;
    use std::collections::HashMap;

    fn lat(n: i32) -> Arc<WavenumberLattice> {
        WavenumberLattice::new(2.0 * std::f64::consts::PI, n).unwrap()
    }

    #[test]
    fn family_rules_by_hand() {
        let lat = lat(4);
        let id = RegularizationProfile::identity(&lat);
        assert!(id.values().iter().all(|&a| a == 1.0));

        let sharp = RegularizationProfile::make(ProfileKind::SharpCutoff, 0.5, 0.0, &lat).unwrap();
        let i10 = lat.index_of(Mode { k1: 1, k2: 0 }).unwrap();
        let i30 = lat.index_of(Mode { k1: 3, k2: 0 }).unwrap();
        assert_eq!(sharp.alpha(i10), 1.0);
        assert_eq!(sharp.alpha(i30), 0.0);

        let sr = RegularizationProfile::make(ProfileKind::SmoothRational, 1.0, 2.0, &lat).unwrap();
        assert_relative_eq!(sr.alpha(i10), 0.5);

        let ex = RegularizationProfile::make(ProfileKind::Exponential, 0.3, 0.0, &lat).unwrap();
        assert_relative_eq!(ex.alpha(i10), (-0.3f64).exp());
    }

    #[test]
    fn negative_eps_rejected() {
        let lat = lat(2);
        assert!(RegularizationProfile::make(ProfileKind::SharpCutoff, -0.1, 0.0, &lat).is_err());
        assert!(RegularizationProfile::make(ProfileKind::SmoothRational, 0.1, 0.0, &lat).is_err());
    }

    #[test]
    fn profiles_are_radial_and_bounded() {
        let lat = lat(6);
        for kind in [
            ProfileKind::SharpCutoff,
            ProfileKind::SmoothRational,
            ProfileKind::Exponential,
            ProfileKind::Identity,
        ] {
            let p = RegularizationProfile::make(kind, 0.37, 1.5, &lat).unwrap();
            let mut by_radius: HashMap<i64, f64> = HashMap::new();
            for (m, &a) in lat.modes().iter().zip(p.values()) {
                assert!((0.0..=1.0).contains(&a), "{kind:?}: alpha={a}");
                let prev = by_radius.entry(m.norm_sq()).or_insert(a);
                assert_eq!(*prev, a, "{kind:?} not radial at |k|^2={}", m.norm_sq());
            }
        }
    }

    #[test]
    fn profiles_rise_pointwise_as_eps_shrinks() {
        let lat = lat(6);
        for kind in [
            ProfileKind::SharpCutoff,
            ProfileKind::SmoothRational,
            ProfileKind::Exponential,
        ] {
            let coarse = RegularizationProfile::make(kind, 0.8, 2.0, &lat).unwrap();
            let fine = RegularizationProfile::make(kind, 0.2, 2.0, &lat).unwrap();
            let finest = RegularizationProfile::make(kind, 1e-9, 2.0, &lat).unwrap();
            for i in 0..lat.len() {
                assert!(fine.alpha(i) >= coarse.alpha(i), "{kind:?} mode {i}");
                assert!(finest.alpha(i) > 1.0 - 1e-6, "{kind:?} mode {i}");
            }
        }
    }

    #[test]
    fn smooth_rational_tail_exponent() {
        // alpha_k <= eps^(-d/2) |k|^(-d): the advertised polynomial decay
        let lat = lat(8);
        let eps = 0.25;
        let d = 3.0;
        let p = RegularizationProfile::make(ProfileKind::SmoothRational, eps, d, &lat).unwrap();
        let c = eps.powf(-d / 2.0);
        for (m, &a) in lat.modes().iter().zip(p.values()) {
            let r = (m.norm_sq() as f64).sqrt();
            assert!(a <= c * r.powf(-d) * (1.0 + 1e-12));
        }
    }
}
