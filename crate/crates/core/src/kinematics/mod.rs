//! SPDC pair kinematics.
//!
//! A pump photon `p` splits into a signal `s` and idler `i` with
//! `omega_p = omega_s + omega_i` and `k_p = k_s + k_i`. The same amplitude
//! describes the crossed reactions `p + s̄ -> i` and `p + ī -> s`, where the
//! barred photon is the phase conjugate (reversed wavevector, flipped
//! helicity). [`cross_convert`] implements the crossed reaction, which is
//! what turns the pumped crystal into a frequency-converting mirror.

mod dispersion;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dispersion::{CrystalMedium, DispersionTable};

use crate::units::Units;
use crate::vector::Vec3;

/// Slack allowed on the law-of-cosines value before declaring a triangle impossible.
pub const COSINE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("phase matching impossible: cos(theta_ps) = {cos_ps}, cos(theta_pi) = {cos_pi}")]
    PhaseMatchImpossible { cos_ps: f64, cos_pi: f64 },
    #[error("frequency order violated: {lower} must be strictly below pump {pump}")]
    FrequencyOrder { lower: f64, pump: f64 },
    #[error("omega {omega} outside dispersion table range [{min}, {max}]")]
    OutOfDispersionRange { omega: f64, min: f64, max: f64 },
    #[error("invalid photon: {0}")]
    InvalidPhoton(String),
    #[error("invalid dispersion table: {0}")]
    InvalidDispersion(String),
    #[error("dispersion table line {line}: {message}")]
    DispersionParse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Helicity {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Helicity {
    pub fn value(self) -> i8 {
        match self {
            Helicity::Plus => 1,
            Helicity::Minus => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Helicity::Plus => Helicity::Minus,
            Helicity::Minus => Helicity::Plus,
        }
    }
}

impl std::ops::Neg for Helicity {
    type Output = Helicity;
    fn neg(self) -> Helicity {
        self.flipped()
    }
}

/// A photon: angular frequency, wavevector and helicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Photon {
    omega: f64,
    k: Vec3,
    helicity: Helicity,
}

impl Photon {
    pub fn new(omega: f64, k: Vec3, helicity: Helicity) -> Result<Self, KinematicsError> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(KinematicsError::InvalidPhoton(format!("omega must be > 0, got {omega}")));
        }
        let kn = k.norm();
        if !(kn > 0.0) || !kn.is_finite() {
            return Err(KinematicsError::InvalidPhoton(format!("|k| must be > 0, got {kn}")));
        }
        Ok(Self { omega, k, helicity })
    }

    /// Photon travelling in vacuum along `direction`, so |k| = omega / c.
    pub fn vacuum(
        omega: f64,
        direction: Vec3,
        helicity: Helicity,
        units: Units,
    ) -> Result<Self, KinematicsError> {
        let dir = direction
            .normalized()
            .ok_or_else(|| KinematicsError::InvalidPhoton("zero direction".into()))?;
        Self::new(omega, dir * units.wavenumber(omega), helicity)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn k(&self) -> Vec3 {
        self.k
    }

    pub fn helicity(&self) -> Helicity {
        self.helicity
    }

    pub fn wavenumber(&self) -> f64 {
        self.k.norm()
    }

    pub fn direction(&self) -> Vec3 {
        self.k * (1.0 / self.k.norm())
    }
}

/// Signal and idler produced by one pump photon, with their emission angles
/// measured from the pump wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub signal: Photon,
    pub idler: Photon,
    pub theta_ps: f64,
    pub theta_pi: f64,
}

impl PairState {
    /// Relative residuals of energy and momentum conservation against `pump`:
    /// `(|ω_s + ω_i − ω_p| / ω_p, max_j |k_s + k_i − k_p|_j / |k_p|)`.
    pub fn conservation_residual(&self, pump: &Photon) -> (f64, f64) {
        conservation_residual(pump, &self.signal, &self.idler)
    }
}

/// Relative energy and momentum residuals of `pump -> a + b`.
pub fn conservation_residual(pump: &Photon, a: &Photon, b: &Photon) -> (f64, f64) {
    let dw = (a.omega + b.omega - pump.omega).abs() / pump.omega;
    let dk = (a.k + b.k).max_abs_diff(pump.k) / pump.k.norm();
    (dw, dk)
}

/// Emission angles of signal and idler relative to the pump from the
/// law of cosines on the momentum triangle `k_p = k_s + k_i`.
///
/// Returns `(theta_ps, theta_pi)` in `[0, π]`.
pub fn emission_angles(k_p: f64, k_s: f64, k_i: f64) -> Result<(f64, f64), KinematicsError> {
    for (name, v) in [("k_p", k_p), ("k_s", k_s), ("k_i", k_i)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(KinematicsError::InvalidPhoton(format!("{name} must be > 0, got {v}")));
        }
    }
    let cos_ps = (k_p * k_p + k_s * k_s - k_i * k_i) / (2.0 * k_p * k_s);
    let cos_pi = (k_p * k_p + k_i * k_i - k_s * k_s) / (2.0 * k_p * k_i);
    let ok = |c: f64| c.abs() <= 1.0 + COSINE_SLACK;
    if !ok(cos_ps) || !ok(cos_pi) {
        return Err(KinematicsError::PhaseMatchImpossible { cos_ps, cos_pi });
    }
    Ok((cos_ps.clamp(-1.0, 1.0).acos(), cos_pi.clamp(-1.0, 1.0).acos()))
}

/// Splits `pump` into a phase-matched signal at `omega_s` and its idler.
///
/// The signal leaves at `theta_ps` from the pump axis, rotated by `azimuth`
/// about it (azimuth 0 points along the first vector of
/// [`Vec3::transverse_basis`]). The idler wavevector is `k_p − k_s`, so
/// momentum is conserved by construction. Signal takes the pump helicity and
/// the idler the opposite one.
pub fn split_pump(
    pump: &Photon,
    omega_s: f64,
    medium: &CrystalMedium,
    azimuth: f64,
) -> Result<PairState, KinematicsError> {
    if !(omega_s > 0.0) || !(omega_s < pump.omega) {
        return Err(KinematicsError::FrequencyOrder { lower: omega_s, pump: pump.omega });
    }
    let omega_i = pump.omega - omega_s;
    let k_p = pump.wavenumber();
    let k_s = medium.wavenumber(omega_s)?;
    let k_i = medium.wavenumber(omega_i)?;
    let (theta_ps, theta_pi) = emission_angles(k_p, k_s, k_i)?;

    let axis = pump.direction();
    let (u, v) = Vec3::transverse_basis(axis);
    let transverse = u * azimuth.cos() + v * azimuth.sin();
    let ks_vec = (axis * theta_ps.cos() + transverse * theta_ps.sin()) * k_s;
    let ki_vec = pump.k - ks_vec;

    let signal = Photon::new(omega_s, ks_vec, pump.helicity)?;
    let idler = Photon::new(omega_i, ki_vec, pump.helicity.flipped())?;
    Ok(PairState { signal, idler, theta_ps, theta_pi })
}

/// Cherenkov-like coherence condition `Re n(omega_p) <= Re n(omega_f)`,
/// i.e. the daughter phase velocity does not exceed the pump's.
pub fn check_coherence(
    medium: &CrystalMedium,
    omega_p: f64,
    omega_f: f64,
) -> Result<bool, KinematicsError> {
    Ok(medium.index(omega_p)? <= medium.index(omega_f)?)
}

/// Phase-conjugate replica: reversed wavevector, flipped helicity.
pub fn conjugate_photon(p: &Photon) -> Photon {
    Photon { omega: p.omega, k: -p.k, helicity: p.helicity.flipped() }
}

/// Crossed reaction `p + s̄ -> i`: a photon returning into the pumped
/// crystal is converted into its partner.
///
/// The output has `omega_p − omega_r`, wavevector `k_p + k_r` and the
/// returned photon's helicity. With `returned = conjugate_photon(signal)`
/// this reproduces the idler of the original pair exactly.
pub fn cross_convert(pump: &Photon, returned: &Photon) -> Result<Photon, KinematicsError> {
    if !(returned.omega < pump.omega) {
        return Err(KinematicsError::FrequencyOrder { lower: returned.omega, pump: pump.omega });
    }
    Photon::new(pump.omega - returned.omega, pump.k + returned.k, returned.helicity)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn natural_medium(n: f64) -> CrystalMedium {
        CrystalMedium::new(
            DispersionTable::constant(n).unwrap(),
            num_complex::Complex64::new(0.0, 0.0),
            1.0,
            Units::Natural,
        )
        .unwrap()
    }

    #[test]
    fn emission_angles_collinear_degenerate() {
        assert_eq!(emission_angles(2.0, 1.0, 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn emission_angles_noncollinear_matches_vector_construction() {
        let (tps, tpi) = emission_angles(2.0, 1.2, 1.0).unwrap();
        assert!((tps.cos() - 0.925).abs() < 1e-15);
        assert!((tps - 0.389_760_732_797_474_7).abs() < 1e-12);
        // Build k_s at theta_ps and k_i at -theta_pi; their sum must be k_p.
        let ks = Vec3::new(1.2 * tps.sin(), 0.0, 1.2 * tps.cos());
        let ki = Vec3::new(-tpi.sin(), 0.0, tpi.cos());
        assert!((ks + ki).max_abs_diff(Vec3::new(0.0, 0.0, 2.0)) < 1e-12);
    }

    #[test]
    fn emission_angles_rejects_open_triangle() {
        assert!(matches!(
            emission_angles(3.0, 1.0, 1.0),
            Err(KinematicsError::PhaseMatchImpossible { .. })
        ));
        assert!(emission_angles(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn split_pump_degenerate_collinear() {
        let m = natural_medium(1.5);
        let pump = Photon::new(2.0, Vec3::new(0.0, 0.0, 3.0), Helicity::Plus).unwrap();
        let pair = split_pump(&pump, 1.0, &m, 0.3).unwrap();
        assert_eq!(pair.theta_ps, 0.0);
        assert!(pair.signal.k().max_abs_diff(Vec3::new(0.0, 0.0, 1.5)) < 1e-15);
        assert!(pair.idler.k().max_abs_diff(Vec3::new(0.0, 0.0, 1.5)) < 1e-15);
    }

    #[test]
    fn split_pump_conserves_in_vacuum() {
        let m = natural_medium(1.0);
        let pump = Photon::new(3.0, Vec3::new(0.0, 0.0, 3.0), Helicity::Plus).unwrap();
        let pair = split_pump(&pump, 2.0, &m, 1.1).unwrap();
        assert_eq!(pair.idler.omega(), 1.0);
        let (dw, dk) = pair.conservation_residual(&pump);
        assert!(dw < 1e-12 && dk < 1e-12);
        assert_eq!(pair.signal.helicity(), Helicity::Plus);
        assert_eq!(pair.idler.helicity(), Helicity::Minus);
    }

    #[test]
    fn split_pump_rejects_full_frequency() {
        let m = natural_medium(1.0);
        let pump = Photon::new(3.0, Vec3::new(0.0, 0.0, 3.0), Helicity::Plus).unwrap();
        assert!(matches!(split_pump(&pump, 3.0, &m, 0.0), Err(KinematicsError::FrequencyOrder { .. })));
        assert!(split_pump(&pump, 0.0, &m, 0.0).is_err());
    }

    #[test]
    fn split_pump_out_of_table() {
        let t = DispersionTable::new(vec![(1.0, 1.6), (2.5, 1.6)]).unwrap();
        let m = CrystalMedium::new(t, num_complex::Complex64::new(0.0, 0.0), 1.0, Units::Natural).unwrap();
        let pump = Photon::new(3.0, Vec3::new(0.0, 0.0, 4.8), Helicity::Plus).unwrap();
        assert!(matches!(split_pump(&pump, 0.5, &m, 0.0), Err(KinematicsError::OutOfDispersionRange { .. })));
    }

    #[test]
    fn coherence_ordering() {
        let t = DispersionTable::new(vec![(1.0, 1.66), (2.0, 1.60)]).unwrap();
        let m = CrystalMedium::new(t, num_complex::Complex64::new(0.0, 0.0), 1.0, Units::Natural).unwrap();
        assert!(check_coherence(&m, 2.0, 1.0).unwrap());
        assert!(!check_coherence(&m, 1.0, 2.0).unwrap());
        assert!(check_coherence(&m, 1.5, 1.5).unwrap());
        assert!(matches!(check_coherence(&m, 2.5, 1.0), Err(KinematicsError::OutOfDispersionRange { .. })));
    }

    #[test]
    fn conjugation_reverses_and_is_involution() {
        let p = Photon::new(1.0, Vec3::new(1.0, 2.0, 3.0), Helicity::Plus).unwrap();
        let c = conjugate_photon(&p);
        assert_eq!(c.omega(), 1.0);
        assert_eq!(c.k(), Vec3::new(-1.0, -2.0, -3.0));
        assert_eq!(c.helicity(), Helicity::Minus);
        assert_eq!(conjugate_photon(&c), p);
        let z = Photon::new(1.0, Vec3::new(0.0, 0.0, 5.0), Helicity::Minus).unwrap();
        assert_eq!(conjugate_photon(&z).k(), Vec3::new(0.0, 0.0, -5.0));
    }

    #[test]
    fn cross_convert_example() {
        let pump = Photon::new(3.0, Vec3::new(0.0, 0.0, 3.0), Helicity::Plus).unwrap();
        let ks = Vec3::new(0.5, 0.0, 1.936);
        let returned = Photon::new(2.0, -ks, Helicity::Minus).unwrap();
        let idler = cross_convert(&pump, &returned).unwrap();
        assert_eq!(idler.omega(), 1.0);
        assert!(idler.k().max_abs_diff(Vec3::new(-0.5, 0.0, 1.064)) < 1e-12);
        assert!((idler.wavenumber() - (0.25f64 + 1.064 * 1.064).sqrt()).abs() < 1e-12);
        // p = s + i with the original forward signal.
        let signal = conjugate_photon(&returned);
        let (dw, dk) = conservation_residual(&pump, &signal, &idler);
        assert!(dw < 1e-12 && dk < 1e-12);
    }

    #[test]
    fn cross_convert_degenerate_collinear() {
        let pump = Photon::new(2.0, Vec3::new(0.0, 0.0, 2.0), Helicity::Plus).unwrap();
        let returned = Photon::new(1.0, Vec3::new(0.0, 0.0, -1.0), Helicity::Minus).unwrap();
        let out = cross_convert(&pump, &returned).unwrap();
        assert_eq!(out.k(), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn cross_convert_frequency_order() {
        let pump = Photon::new(3.0, Vec3::new(0.0, 0.0, 3.0), Helicity::Plus).unwrap();
        let returned = Photon::new(3.5, Vec3::new(0.0, 0.0, -3.5), Helicity::Minus).unwrap();
        assert!(matches!(cross_convert(&pump, &returned), Err(KinematicsError::FrequencyOrder { .. })));
    }

    #[test]
    fn crossing_closes_the_triangle() {
        let m = natural_medium(1.0);
        let pump = Photon::new(3.0, Vec3::new(0.0, 0.0, 3.0), Helicity::Minus).unwrap();
        let pair = split_pump(&pump, 2.0, &m, 2.5).unwrap();
        let back = cross_convert(&pump, &conjugate_photon(&pair.signal)).unwrap();
        assert_eq!(back, pair.idler);
    }

    #[test]
    fn photon_validation() {
        assert!(Photon::new(0.0, Vec3::Z, Helicity::Plus).is_err());
        assert!(Photon::new(1.0, Vec3::ZERO, Helicity::Plus).is_err());
        let v = Photon::vacuum(2.0, Vec3::new(0.0, 3.0, 4.0), Helicity::Plus, Units::Natural).unwrap();
        assert!((v.wavenumber() - 2.0).abs() < 1e-15);
        let si = Photon::vacuum(1e15, Vec3::Z, Helicity::Plus, Units::Si).unwrap();
        assert!((si.wavenumber() - 1e15 / crate::units::SPEED_OF_LIGHT).abs() / si.wavenumber() < 1e-12);
    }
}
