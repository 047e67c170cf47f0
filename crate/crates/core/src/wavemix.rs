//! Degenerate three-wave-mixing phase conjugation.
//!
//! Under an undepleted pump the conjugate wave `E_c` and the probe `E_pw`
//! obey the coupled-mode system
//!
//! ```text
//! dE_pw*/dz =  i g  E_c   exp(+iΔk z)
//! dE_c /dz  = -i g* E_pw* exp(-iΔk z)
//! ```
//!
//! With `E_c(0) = 0` the output ratio `E_c(L) / E_pw*(0)` has the closed form
//! returned by [`amplification_factor`]; [`integrate_twm`] solves the same
//! system numerically with a fixed-step RK4 scheme.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vector::Vec3;

/// Default number of RK4 steps across the crystal.
pub const DEFAULT_STEPS: usize = 1024;
/// Coarsest allowed step is `L / MIN_STEPS`.
pub const MIN_STEPS: usize = 16;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WavemixError {
    #[error("integration step {step} exceeds L/16 = {max}")]
    StepTooLarge { step: f64, max: f64 },
    #[error("invalid three-wave-mixing parameters: {0}")]
    InvalidParams(String),
    #[error("probe frequency {omega_pw} must be strictly below pump frequency {omega_p}")]
    FrequencyOrder { omega_p: f64, omega_pw: f64 },
}

/// Coupling, collinear phase mismatch, interaction length and RK4 step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwmParams {
    /// Complex coupling g (1/m).
    pub coupling: Complex64,
    /// Δk = k_p − k_pw − k_c projected on the interaction axis (1/m).
    pub delta_k: f64,
    /// Interaction length L (m).
    pub length: f64,
    /// Integrator step (m).
    pub step: f64,
}

impl TwmParams {
    pub fn new(coupling: Complex64, delta_k: f64, length: f64) -> Self {
        Self { coupling, delta_k, length, step: length / DEFAULT_STEPS as f64 }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<(), WavemixError> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(WavemixError::InvalidParams(format!("L must be > 0, got {}", self.length)));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(WavemixError::InvalidParams(format!("step must be > 0, got {}", self.step)));
        }
        if !self.delta_k.is_finite() || !self.coupling.re.is_finite() || !self.coupling.im.is_finite() {
            return Err(WavemixError::InvalidParams("non-finite coupling or mismatch".into()));
        }
        let max = self.length / MIN_STEPS as f64;
        if self.step > max * (1.0 + 1e-12) {
            return Err(WavemixError::StepTooLarge { step: self.step, max });
        }
        Ok(())
    }

    /// |g| L, the quantity compared against the gain threshold.
    pub fn gain_length(&self) -> f64 {
        self.coupling.norm() * self.length
    }
}

/// Sampled probe and conjugate envelopes through the crystal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTrajectory {
    pub z: Vec<f64>,
    pub e_pw: Vec<Complex64>,
    pub e_c: Vec<Complex64>,
}

impl FieldTrajectory {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// `E_c(L) / E_pw*(0)`, comparable with [`amplification_factor`].
    pub fn conjugate_ratio(&self) -> Complex64 {
        self.e_c[self.len() - 1] / self.e_pw[0].conj()
    }

    /// Photon-flux difference |E_pw|² − |E_c|² at every sample.
    pub fn flux_difference(&self) -> impl Iterator<Item = f64> + '_ {
        self.e_pw.iter().zip(&self.e_c).map(|(p, c)| p.norm_sqr() - c.norm_sqr())
    }

    /// Largest deviation of the flux difference from its value at z = 0.
    pub fn manley_rowe_drift(&self) -> f64 {
        let mut it = self.flux_difference();
        let first = it.next().unwrap_or(0.0);
        it.fold(0.0, |m, d| m.max((d - first).abs()))
    }
}

/// Conjugate-wave frequency and phase-matched wavevector
/// `omega_c = omega_p − omega_pw`, `k_c = k_p − k_pw`.
pub fn conjugate_wave_params(
    omega_p: f64,
    omega_pw: f64,
    k_p: Vec3,
    k_pw: Vec3,
) -> Result<(f64, Vec3), WavemixError> {
    if !(omega_pw < omega_p) {
        return Err(WavemixError::FrequencyOrder { omega_p, omega_pw });
    }
    Ok((omega_p - omega_pw, k_p - k_pw))
}

/// sinh(x)/x for x >= 0, or sin(x)/x when `oscillating`.
fn shc(x: f64, oscillating: bool) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        if oscillating {
            1.0 - x2 / 6.0 + x2 * x2 / 120.0
        } else {
            1.0 + x2 / 6.0 + x2 * x2 / 120.0
        }
    } else if oscillating {
        x.sin() / x
    } else {
        x.sinh() / x
    }
}

/// Closed-form amplification factor of the conjugate wave,
/// `AF = −2i (g*/b) sinh(bL/2) exp(−iΔkL/2)` with `b = sqrt(4|g|² − Δk²)`.
///
/// Below threshold (`4|g|² < Δk²`) `sinh(bL/2)/b` continues to
/// `sin(|b|L/2)/|b|`; at `b = 0` it is `L/2`. The function is total: zero
/// coupling or zero length give zero.
pub fn amplification_factor(params: &TwmParams) -> Complex64 {
    let g = params.coupling;
    let dk = params.delta_k;
    let l = params.length;
    let disc = 4.0 * g.norm_sqr() - dk * dk;
    let x = disc.abs().sqrt() * l / 2.0;
    let sinh_over_b = 0.5 * l * shc(x, disc < 0.0);
    -2.0 * I * g.conj() * sinh_over_b * Complex64::from_polar(1.0, -dk * l / 2.0)
}

/// Fixed-step RK4 integration of the coupled-mode system from `z = 0` to
/// `z = L` with `E_c(0) = 0` and `E_pw(0) = e_pw0`.
///
/// The step is shrunk so an integer number of steps lands exactly on `L`.
pub fn integrate_twm(params: &TwmParams, e_pw0: Complex64) -> Result<FieldTrajectory, WavemixError> {
    params.validate()?;
    let l = params.length;
    let ratio = l / params.step;
    let steps = if (ratio - ratio.round()).abs() < 1e-9 { ratio.round() } else { ratio.ceil() } as usize;
    let h = l / steps as f64;

    let g = params.coupling;
    let gc = g.conj();
    let dk = params.delta_k;
    // y = (E_pw*, E_c)
    let rhs = |z: f64, u: Complex64, v: Complex64| -> (Complex64, Complex64) {
        let ph = Complex64::from_polar(1.0, dk * z);
        (I * g * v * ph, -I * gc * u * ph.conj())
    };

    let mut z = Vec::with_capacity(steps + 1);
    let mut e_pw = Vec::with_capacity(steps + 1);
    let mut e_c = Vec::with_capacity(steps + 1);
    let mut u = e_pw0.conj();
    let mut v = Complex64::new(0.0, 0.0);
    z.push(0.0);
    e_pw.push(e_pw0);
    e_c.push(v);
    for j in 0..steps {
        let z0 = j as f64 * h;
        let (k1u, k1v) = rhs(z0, u, v);
        let (k2u, k2v) = rhs(z0 + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(z0 + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(z0 + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        z.push(if j + 1 == steps { l } else { (j + 1) as f64 * h });
        e_pw.push(u.conj());
        e_c.push(v);
    }
    Ok(FieldTrajectory { z, e_pw, e_c })
}

/// Net parametric amplification of the conjugate wave requires `|g| L > π/4`.
pub fn gain_threshold(coupling: Complex64, length: f64) -> bool {
    coupling.norm() * length > std::f64::consts::FRAC_PI_4
}

/// One row of a closed-form versus ODE comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g_abs: f64,
    pub g_phase: f64,
    pub delta_k: f64,
    pub length: f64,
    pub af: Complex64,
    pub ode_rel_err: f64,
    pub manley_rowe_drift: f64,
}

/// Evaluates [`amplification_factor`] and [`integrate_twm`] (unit probe) for one
/// parameter set and reports their relative disagreement.
pub fn compare_with_ode(params: &TwmParams) -> Result<SweepRow, WavemixError> {
    let af = amplification_factor(params);
    let traj = integrate_twm(params, Complex64::new(1.0, 0.0))?;
    let ratio = traj.conjugate_ratio();
    Ok(SweepRow {
        g_abs: params.coupling.norm(),
        g_phase: params.coupling.arg(),
        delta_k: params.delta_k,
        length: params.length,
        af,
        ode_rel_err: (ratio - af).norm() / af.norm().max(1e-12),
        manley_rowe_drift: traj.manley_rowe_drift(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn conjugate_wave_subtracts() {
        let (wc, kc) =
            conjugate_wave_params(3.0, 2.0, Vec3::new(0.0, 0.0, 3.0), Vec3::new(0.5, 0.0, 1.9)).unwrap();
        assert_eq!(wc, 1.0);
        assert!(kc.max_abs_diff(Vec3::new(-0.5, 0.0, 1.1)) < 1e-15);
    }

    #[test]
    fn conjugate_wave_degenerate_reflects_through_pump_axis() {
        let kpw = Vec3::new(0.3, -0.2, 1.0);
        let (wc, kc) = conjugate_wave_params(2.0, 1.0, Vec3::new(0.0, 0.0, 2.0), kpw).unwrap();
        assert_eq!(wc, 1.0);
        assert_eq!(kc, Vec3::new(-0.3, 0.2, 1.0));
        let (_, kc) = conjugate_wave_params(2.0, 1.0, Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(kc, Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn conjugate_wave_frequency_order() {
        assert!(matches!(
            conjugate_wave_params(2.0, 2.0, Vec3::Z, Vec3::Z),
            Err(WavemixError::FrequencyOrder { .. })
        ));
    }

    #[test]
    fn af_phase_matched_is_sinh() {
        let af = amplification_factor(&TwmParams::new(c(1.0, 0.0), 0.0, 1.0));
        assert!((af.norm() - 1f64.sinh()).abs() < 1e-15);
        assert!((af.norm() - 1.175_201_193_643_801_4).abs() < 1e-14);
    }

    #[test]
    fn af_vanishes_without_coupling_or_length() {
        assert_eq!(amplification_factor(&TwmParams::new(c(0.0, 0.0), 3.0, 1.0)), c(0.0, 0.0));
        let p = TwmParams { coupling: c(1.0, 0.5), delta_k: 1.0, length: 0.0, step: 0.0 };
        assert_eq!(amplification_factor(&p).norm(), 0.0);
    }

    #[test]
    fn af_at_threshold_limit() {
        let p = TwmParams::new(c(1.0, 0.0), 2.0, 1.0);
        let af = amplification_factor(&p);
        assert!((af.norm() - 1.0).abs() < 1e-15);
        let expected = -I * c(1.0, 0.0) * 1.0 * Complex64::from_polar(1.0, -1.0);
        assert!((af - expected).norm() < 1e-15);
        // Approaching from either side of b = 0 converges to the same value.
        for eps in [1e-6, -1e-6] {
            let q = TwmParams::new(c(1.0, 0.0), 2.0 + eps, 1.0);
            assert!((amplification_factor(&q) - af).norm() < 1e-5);
        }
    }

    #[test]
    fn step_validation() {
        let p = TwmParams::new(c(1.0, 0.0), 0.0, 1.0).with_step(0.1);
        assert!(matches!(integrate_twm(&p, c(1.0, 0.0)), Err(WavemixError::StepTooLarge { .. })));
        let p = TwmParams::new(c(1.0, 0.0), 0.0, 1.0).with_step(1.0 / 16.0);
        assert_eq!(integrate_twm(&p, c(1.0, 0.0)).unwrap().len(), 17);
        let p = TwmParams::new(c(1.0, 0.0), 0.0, -1.0);
        assert!(matches!(p.validate(), Err(WavemixError::InvalidParams(_))));
    }

    #[test]
    fn zero_coupling_keeps_probe() {
        let traj = integrate_twm(&TwmParams::new(c(0.0, 0.0), 1.0, 2.0), c(0.3, -0.4)).unwrap();
        assert!(traj.e_c.iter().all(|v| *v == c(0.0, 0.0)));
        assert!(traj.e_pw.iter().all(|v| *v == c(0.3, -0.4)));
        assert_eq!(*traj.z.last().unwrap(), 2.0);
    }

    #[test]
    fn phase_matched_solution_is_cosh_sinh() {
        let traj = integrate_twm(&TwmParams::new(c(1.0, 0.0), 0.0, 1.0), c(1.0, 0.0)).unwrap();
        let n = traj.len() - 1;
        assert!((traj.e_c[n].norm() - 1f64.sinh()).abs() < 1e-12);
        assert!((traj.e_pw[n].norm() - 1f64.cosh()).abs() < 1e-12);
        assert!(traj.manley_rowe_drift() < 1e-12);
    }

    #[test]
    fn ode_agrees_with_closed_form() {
        for (g, dk, l) in [(c(0.7, 0.4), 3.0, 1.5), (c(-0.2, 1.1), 0.5, 2.0), (c(0.05, 0.0), 15.0, 1.0)] {
            let row = compare_with_ode(&TwmParams::new(g, dk, l)).unwrap();
            assert!(row.ode_rel_err < 1e-6, "{row:?}");
            assert!(row.manley_rowe_drift < 1e-9, "{row:?}");
        }
    }

    #[test]
    fn gain_threshold_is_strict() {
        assert!(gain_threshold(c(1.0, 0.0), 1.0));
        assert!(!gain_threshold(c(0.5, 0.0), 1.0));
        assert!(!gain_threshold(c(std::f64::consts::FRAC_PI_4, 0.0), 1.0));
        assert!(gain_threshold(c(0.0, 2.0), 0.5));
    }
}
