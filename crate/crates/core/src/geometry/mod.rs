//! Quantum-mirror geometric optics.
//!
//! Distances follow the concave-mirror convention: object and real-image
//! distances are positive in front of the mirror, virtual images carry a
//! negative distance. The pumped crystal converts an incoming ray at
//! `omega_s` into an outgoing ray at `omega_i = omega_p − omega_s`, keeping
//! the transverse wavevector, so `omega_s sin β_ps = omega_i sin β_pi`.

mod layout;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::KinematicsError;

pub use layout::{Element, Mask, MirrorKind, OpticalLayout, ScanAxis};
pub use trace::{line_intersection, trace_path, trace_ray, two_ray_image, Ray, TwoRayImage};

/// Below this area (m²) a triangle is considered collapsed.
pub const MIN_TRIANGLE_AREA: f64 = 1e-18;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("object at the focal distance (S = f = {0}): output is collimated")]
    CollimatedOutput(f64),
    #[error("no exit angle: sin(beta_pi) would be {0}")]
    NoExitAngle(f64),
    #[error("image at infinity (conjugate denominator vanishes)")]
    DegenerateConjugate,
    #[error("degenerate triangle with area {0:e}")]
    DegenerateTriangle(f64),
    #[error("ray blocked by opaque mask at position {position}, height {height}")]
    RayBlocked { position: f64, height: f64 },
    #[error("ray misses the mirror at position {0}")]
    MissedMirror(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// 2D point or vector in the meridional plane; `x` is the axial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Image distance from the Gaussian thin-lens equation `1/S + 1/S' = 1/f`.
///
/// A positive result is a real image on the far side of the lens.
pub fn thin_lens_image(s: f64, f: f64) -> Result<f64, GeometryError> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("object distance must be > 0, got {s}")));
    }
    if f == 0.0 || !f.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("focal length must be finite and non-zero, got {f}")));
    }
    if s == f {
        return Err(GeometryError::CollimatedOutput(f));
    }
    Ok(1.0 / (1.0 / f - 1.0 / s))
}

/// Exit angle of the converted ray from transverse-momentum conservation,
/// `omega_s sin β_ps = omega_i sin β_pi`.
pub fn snell_exit_angles(omega_s: f64, omega_i: f64, beta_ps: f64) -> Result<f64, GeometryError> {
    if !(omega_i > 0.0) || !(omega_s > 0.0) {
        return Err(GeometryError::InvalidParameter("frequencies must be positive".into()));
    }
    let arg = omega_s * beta_ps.sin() / omega_i;
    if !(arg.abs() <= 1.0 + 1e-12) {
        return Err(GeometryError::NoExitAngle(arg));
    }
    Ok(arg.clamp(-1.0, 1.0).asin())
}

/// Result of the spherical quantum-mirror radial law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageDistance {
    /// Distance from the mirror point to the image (negative when virtual).
    pub distance: f64,
    pub is_virtual: bool,
}

/// Effective obliquity `cos β = (omega_s cos β_ps + omega_i cos β_pi) / omega_p`.
pub fn effective_cos_beta(omega_s: f64, omega_i: f64, beta_ps: f64) -> Result<f64, GeometryError> {
    let beta_pi = snell_exit_angles(omega_s, omega_i, beta_ps)?;
    Ok((omega_s * beta_ps.cos() + omega_i * beta_pi.cos()) / (omega_s + omega_i))
}

/// Image distance of the spherical quantum mirror,
/// `omega_s/Z_s + omega_i/Z_i = (omega_p/R) cos β`.
///
/// `radius = ±inf` gives the planar mirror.
pub fn sqm_image_distance(
    z_s: f64,
    omega_s: f64,
    omega_i: f64,
    radius: f64,
    beta_ps: f64,
) -> Result<ImageDistance, GeometryError> {
    if !(z_s > 0.0) || !z_s.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("Z_s must be > 0, got {z_s}")));
    }
    if radius == 0.0 || radius.is_nan() {
        return Err(GeometryError::InvalidParameter("mirror radius must be non-zero".into()));
    }
    let omega_p = omega_s + omega_i;
    let cos_beta = effective_cos_beta(omega_s, omega_i, beta_ps)?;
    let power = omega_p / radius * cos_beta;
    let denom = power - omega_s / z_s;
    if denom.abs() <= 1e-15 * (power.abs() + omega_s / z_s) {
        return Err(GeometryError::DegenerateConjugate);
    }
    let distance = omega_i / denom;
    Ok(ImageDistance { distance, is_virtual: distance < 0.0 })
}

/// Transverse magnification `M = −(Z_i omega_s)/(Z_s omega_i)`.
pub fn magnification(z_s: f64, z_i: f64, omega_s: f64, omega_i: f64) -> f64 {
    -(z_i * omega_s) / (z_s * omega_i)
}

/// Mirror radius set by a pump lens of focal length `f` at distance `d`
/// before the crystal: the pump converges to a centre `R = f − d` beyond it.
pub fn pump_mirror_radius(f: f64, d: f64) -> Result<f64, GeometryError> {
    let r = f - d;
    if r == 0.0 || !r.is_finite() {
        return Err(GeometryError::InvalidParameter(format!("f − d must be non-zero, got {r}")));
    }
    Ok(r)
}

/// Residual of the paraxial radial law written in wavelengths,
/// `(λ_p/λ_s)/Z_s + (λ_p/λ_i)/Z_i − 1/(f − d)`; zero on conjugate pairs.
pub fn paraxial_sqm_law(
    z_s: f64,
    z_i: f64,
    lambda_s: f64,
    lambda_i: f64,
    lambda_p: f64,
    f: f64,
    d: f64,
) -> f64 {
    (lambda_p / lambda_s) / z_s + (lambda_p / lambda_i) / z_i - 1.0 / (f - d)
}

/// Signed area of triangle `abc` (positive when counter-clockwise).
pub fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

/// `Area(PAP') − Area(PAC) − Area(AP'C)` with signed areas.
///
/// The residual vanishes exactly when `P`, `P'` and the centre `C` are
/// collinear, which is the conjugate-point condition of the spherical mirror.
/// Fully collinear inputs return zero. If only some of the triangles
/// collapse the construction is degenerate and an error is returned.
pub fn verify_area_identity(p: Vec2, a: Vec2, p_prime: Vec2, c: Vec2) -> Result<f64, GeometryError> {
    let whole = signed_area(p, a, p_prime);
    let left = signed_area(p, a, c);
    let right = signed_area(a, p_prime, c);
    let tiny = |v: f64| v.abs() < MIN_TRIANGLE_AREA;
    match (tiny(whole), tiny(left), tiny(right)) {
        (true, true, true) => Ok(0.0),
        (false, false, false) => Ok(whole - left - right),
        _ => Err(GeometryError::DegenerateTriangle(whole.abs().min(left.abs()).min(right.abs()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn thin_lens_cases() {
        assert!((thin_lens_image(0.2, 0.1).unwrap() - 0.2).abs() < 1e-15);
        assert!((thin_lens_image(0.15, 0.1).unwrap() - 0.3).abs() < 1e-12);
        assert!(matches!(thin_lens_image(0.1, 0.1), Err(GeometryError::CollimatedOutput(_))));
        assert!(thin_lens_image(-1.0, 0.1).is_err());
        assert!(thin_lens_image(1.0, 0.0).is_err());
        // Virtual image inside the focal length.
        assert!(thin_lens_image(0.05, 0.1).unwrap() < 0.0);
    }

    #[test]
    fn snell_cases() {
        assert_eq!(snell_exit_angles(2.0, 1.0, 0.0).unwrap(), 0.0);
        assert!((snell_exit_angles(1.3, 1.3, 0.4).unwrap() - 0.4).abs() < 1e-15);
        // 2 sin(π/6) rounds to 1 − 2^-53; asin is steep there.
        assert!((snell_exit_angles(2.0, 1.0, PI / 6.0).unwrap() - PI / 2.0).abs() < 1e-7);
        assert!(matches!(snell_exit_angles(2.0, 1.0, 0.6), Err(GeometryError::NoExitAngle(_))));
    }

    #[test]
    fn sqm_classical_centre_of_curvature() {
        let im = sqm_image_distance(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert!((im.distance - 1.0).abs() < 1e-15);
        assert!(!im.is_virtual);
    }

    #[test]
    fn sqm_nondegenerate_example() {
        let im = sqm_image_distance(2.0, 2.0, 1.0, 1.0, 0.0).unwrap();
        assert!((im.distance - 0.5).abs() < 1e-15);
        assert_eq!(magnification(2.0, im.distance, 2.0, 1.0), -0.5);
    }

    #[test]
    fn sqm_planar_limit_is_virtual() {
        let im = sqm_image_distance(0.7, 1.0, 1.0, f64::INFINITY, 0.0).unwrap();
        assert!((im.distance + 0.7).abs() < 1e-15);
        assert!(im.is_virtual);
    }

    #[test]
    fn sqm_image_at_infinity() {
        // Object at the focal point of a classical mirror.
        assert!(matches!(
            sqm_image_distance(0.5, 1.0, 1.0, 1.0, 0.0),
            Err(GeometryError::DegenerateConjugate)
        ));
    }

    #[test]
    fn magnification_cases() {
        assert_eq!(magnification(1.0, 1.0, 1.0, 1.0), -1.0);
        assert_eq!(magnification(2.0, 0.0, 2.0, 1.0), 0.0);
    }

    #[test]
    fn paraxial_law_cases() {
        // λ_s = λ_i = 2 λ_p, Z_s = Z_i = f − d.
        let (f, d) = (0.5, 0.2);
        assert!(paraxial_sqm_law(0.3, 0.3, 2.0, 2.0, 1.0, f, d).abs() < 1e-15);
        // omega_s = 2, omega_i = 1, R = 1: λ ∝ 1/omega.
        let (ls, li, lp) = (1.0 / 2.0, 1.0 / 1.0, 1.0 / 3.0);
        assert!(paraxial_sqm_law(2.0, 0.5, ls, li, lp, 1.5, 0.5).abs() < 1e-15);
        // A longer Z_i lowers the idler term, so the residual goes negative.
        assert!(paraxial_sqm_law(2.0, 0.505, ls, li, lp, 1.5, 0.5) < 0.0);
        assert!(paraxial_sqm_law(2.0, 0.495, ls, li, lp, 1.5, 0.5) > 0.0);
    }

    #[test]
    fn area_identity_collinear_is_zero() {
        let r = verify_area_identity(
            Vec2::new(-3.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(-0.5, 0.0),
            Vec2::new(0.0, 0.0),
        );
        assert_eq!(r.unwrap(), 0.0);
    }

    #[test]
    fn area_identity_partial_collapse_is_error() {
        // C on line PA but P' off it.
        let r = verify_area_identity(
            Vec2::new(-3.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(-0.5, 0.2),
            Vec2::new(0.0, 0.0),
        );
        assert!(matches!(r, Err(GeometryError::DegenerateTriangle(_))));
    }

    #[test]
    fn area_decomposition_about_centre() {
        // The residual equals the signed area of P P' C.
        let (p, a, q, c) = (Vec2::new(-2.0, 0.3), Vec2::new(1.0, 0.1), Vec2::new(-0.4, -0.2), Vec2::new(0.0, 0.0));
        let r = verify_area_identity(p, a, q, c).unwrap();
        assert!((r - signed_area(q, p, c)).abs() < 1e-15);
    }

    #[test]
    fn pump_radius() {
        assert_eq!(pump_mirror_radius(0.5, 0.2).unwrap(), 0.3);
        assert!(pump_mirror_radius(0.5, 0.5).is_err());
    }
}
