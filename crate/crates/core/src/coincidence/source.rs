use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CoincidenceError;
use crate::kinematics::{Helicity, Photon};
use crate::units::Units;
use crate::vector::Vec3;

fn default_fraction() -> f64 {
    0.5
}

/// Thin-crystal SPDC source emitting exactly one pair per trial along +z.
///
/// Each pair gets a relative transverse wavevector `q ~ N(0, sigma_q²)` per
/// axis, `+q` on the signal and `−q` on the idler. A finite `pump_waist`
/// adds a Gaussian emission point (intensity radius `pump_waist/2`) and a
/// pump transverse wavevector of spread `1/pump_waist`, shared between the
/// daughters in proportion to their frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceModel {
    pub pump_omega: f64,
    pub sigma_q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_waist: Option<f64>,
    /// `omega_s / omega_p`; 0.5 is the degenerate split.
    #[serde(default = "default_fraction")]
    pub signal_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub units: Units,
}

/// One sampled pair with the pump photon that produced it and its emission
/// point `(x, y)` in the crystal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledPair {
    pub pump: Photon,
    pub signal: Photon,
    pub idler: Photon,
    pub origin: [f64; 2],
}

impl SampledPair {
    /// Relative energy-momentum residual `max(|Δω|/ω_p, |Δk|/|k_p|)`.
    pub fn conservation_residual(&self) -> f64 {
        let (dw, dk) = crate::kinematics::conservation_residual(&self.pump, &self.signal, &self.idler);
        (dw / self.pump.omega()).max(dk / self.pump.wavenumber())
    }
}

impl SourceModel {
    pub fn degenerate(pump_omega: f64, sigma_q: f64, seed: u64, units: Units) -> Self {
        Self { pump_omega, sigma_q, pump_waist: None, signal_fraction: 0.5, seed, units }
    }

    pub fn validate(&self) -> Result<(), CoincidenceError> {
        let bad = |m: String| Err(CoincidenceError::ConfigInvalid(m));
        if !(self.pump_omega > 0.0) || !self.pump_omega.is_finite() {
            return bad(format!("pump_omega = {} must be > 0", self.pump_omega));
        }
        if !(self.sigma_q > 0.0) || !self.sigma_q.is_finite() {
            return bad(format!("sigma_q = {} must be > 0", self.sigma_q));
        }
        if let Some(w) = self.pump_waist {
            if !(w > 0.0) || !w.is_finite() {
                return bad(format!("pump_waist = {w} must be > 0"));
            }
        }
        if !(self.signal_fraction > 0.0 && self.signal_fraction < 1.0) {
            return bad(format!("signal_fraction = {} must lie in (0, 1)", self.signal_fraction));
        }
        Ok(())
    }

    pub fn omega_signal(&self) -> f64 {
        self.pump_omega * self.signal_fraction
    }

    pub fn omega_idler(&self) -> f64 {
        self.pump_omega - self.omega_signal()
    }

    /// Draws one pair. The idler wavevector is `k_p − k_s`, so momentum and
    /// energy balance hold by construction.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledPair {
        let kp = self.units.wavenumber(self.pump_omega);
        let omega_s = self.omega_signal();
        let ks = self.units.wavenumber(omega_s);
        let mut gauss = || -> f64 { rng.sample(StandardNormal) };

        let (origin, qp) = match self.pump_waist {
            Some(w) => {
                let origin = [0.5 * w * gauss(), 0.5 * w * gauss()];
                (origin, [gauss() / w, gauss() / w])
            }
            None => ([0.0, 0.0], [0.0, 0.0]),
        };
        let (tx, ty) = loop {
            let tx = qp[0] * self.signal_fraction + self.sigma_q * gauss();
            let ty = qp[1] * self.signal_fraction + self.sigma_q * gauss();
            if tx * tx + ty * ty < ks * ks {
                break (tx, ty);
            }
        };
        let k_pump = Vec3::new(qp[0], qp[1], (kp * kp - qp[0] * qp[0] - qp[1] * qp[1]).sqrt());
        let k_signal = Vec3::new(tx, ty, (ks * ks - tx * tx - ty * ty).sqrt());

        let pump = Photon::new(self.pump_omega, k_pump, Helicity::Plus).expect("valid pump");
        let signal = Photon::new(omega_s, k_signal, Helicity::Plus).expect("valid signal");
        let idler = Photon::new(self.pump_omega - omega_s, k_pump - k_signal, Helicity::Minus).expect("valid idler");
        SampledPair { pump, signal, idler, origin }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::shard_rng;

    fn source() -> SourceModel {
        SourceModel {
            pump_omega: 2.0 * std::f64::consts::PI * crate::units::SPEED_OF_LIGHT / 351e-9,
            sigma_q: 1.8e5,
            pump_waist: Some(0.02),
            signal_fraction: 0.5,
            seed: 42,
            units: Units::Si,
        }
    }

    #[test]
    fn pairs_conserve_momentum() {
        let src = source();
        let mut rng = shard_rng(src.seed, 0);
        for _ in 0..1000 {
            let p = src.sample_pair(&mut rng);
            assert!(p.conservation_residual() < 1e-12);
            assert_eq!(p.signal.omega() + p.idler.omega(), p.pump.omega());
            assert_eq!(p.idler.helicity(), -p.signal.helicity());
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let src = source();
        let a: Vec<_> = {
            let mut rng = shard_rng(42, 0);
            (0..10).map(|_| src.sample_pair(&mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = shard_rng(42, 0);
            (0..10).map(|_| src.sample_pair(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn vanishing_spread_gives_collinear_pairs() {
        let src = SourceModel::degenerate(2.0, 1e-30, 3, Units::Natural);
        let mut rng = shard_rng(3, 0);
        for _ in 0..10 {
            let p = src.sample_pair(&mut rng);
            assert!(p.signal.k().x.abs() < 1e-29);
            assert_eq!(p.signal.k().x, -p.idler.k().x);
            assert_eq!(p.signal.k().z, 1.0);
            assert_eq!(p.idler.k().z, 1.0);
        }
    }

    #[test]
    fn transverse_spread_matches_sigma() {
        let src = SourceModel::degenerate(2.0, 0.01, 9, Units::Natural);
        let mut rng = shard_rng(9, 0);
        let n = 20_000;
        let var: f64 = (0..n).map(|_| src.sample_pair(&mut rng).signal.k().x.powi(2)).sum::<f64>() / n as f64;
        assert!((var.sqrt() / 0.01 - 1.0).abs() < 0.03, "{}", var.sqrt());
    }

    #[test]
    fn validation() {
        assert!(source().validate().is_ok());
        assert!(SourceModel { sigma_q: 0.0, ..source() }.validate().is_err());
        assert!(SourceModel { signal_fraction: 1.0, ..source() }.validate().is_err());
        assert!(SourceModel { pump_waist: Some(-1.0), ..source() }.validate().is_err());
    }
}
