use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{shard_rng, CoincidenceError, SourceModel};
use crate::geometry::{trace_ray, Element, GeometryError, OpticalLayout, Ray, ScanAxis, Vec2};

/// Probability that a converted ray survives the coincidence gate.
pub const GATE_ACCEPTANCE: f64 = 0.5;

/// Image formed by a pumped spherical mirror from an independently lit
/// object, located by minimising the RMS spot of the axial object point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectQmResult {
    /// Image distance from the mirror vertex (negative when virtual).
    pub image_distance: f64,
    /// Centroid height of the off-axis point's image over its object height.
    pub magnification: f64,
    /// RMS spot radius of the axial point at the image plane.
    pub rms_spot: f64,
    pub coincidence_enabled: bool,
    pub rays_traced: u64,
    pub rays_used: u64,
    /// Ray counts of both object points across the image plane.
    pub scan: ScanAxis,
    pub counts: Vec<u64>,
}

/// Direct quantum-mirror imaging without a partner photon.
///
/// The layout holds one quantum mirror; the object plane is at axial
/// position 0. Trials alternate between an axial object point and one at
/// `object_height`, each emitting a ray at the signal frequency aimed at
/// the vertex with a Gaussian angular spread of `sigma_q / k_s`. With
/// `coincidence_enabled` each converted ray is kept with probability
/// [`GATE_ACCEPTANCE`]; the same random numbers are drawn either way, so
/// the gated rays are a subset of the ungated ones for a given seed.
pub fn run_direct_qm(
    layout: &OpticalLayout,
    src: &SourceModel,
    trials: u64,
    coincidence_enabled: bool,
    object_height: f64,
) -> Result<DirectQmResult, CoincidenceError> {
    src.validate()?;
    let bad = |m: String| CoincidenceError::ConfigInvalid(m);
    let mirror = match layout.elements() {
        [m @ Element::QuantumMirror { .. }, Element::DetectorPlane { .. }] => m.clone(),
        _ => return Err(bad("direct-qm layout must be one mirror followed by one detector".into())),
    };
    let Element::QuantumMirror { position: z_s, pump_omega, .. } = mirror else { unreachable!() };
    if !(z_s > 0.0) {
        return Err(bad(format!("mirror must sit in front of the object plane, got position {z_s}")));
    }
    if ((pump_omega - src.pump_omega) / src.pump_omega).abs() > 1e-9 {
        return Err(bad(format!("mirror pump_omega {pump_omega} differs from source pump_omega {}", src.pump_omega)));
    }
    if !(object_height != 0.0 && object_height.is_finite()) {
        return Err(bad("object_height must be finite and non-zero".into()));
    }
    let (_, scan) = layout.detector().expect("checked above");
    let optics = OpticalLayout::new(vec![mirror])?;
    let omega_s = src.omega_signal();
    let sigma = src.sigma_q / src.units.wavenumber(omega_s);

    let mut rng = shard_rng(src.seed, 0);
    let mut axial = Vec::new();
    let mut off = Vec::new();
    let mut traced = 0;
    for t in 0..trials {
        let h = if t % 2 == 0 { 0.0 } else { object_height };
        let slope = -h / z_s + sigma * rng.sample::<f64, _>(StandardNormal);
        let keep = rng.random::<f64>() < GATE_ACCEPTANCE || !coincidence_enabled;
        traced += 1;
        let out = match trace_ray(&Ray::with_slope(Vec2::new(0.0, h), slope, omega_s)?, &optics) {
            Ok(r) => r,
            Err(GeometryError::MissedMirror(_) | GeometryError::NoExitAngle(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if keep {
            // Line y = a + b x of the outgoing ray.
            let line = (out.origin.y - out.slope() * out.origin.x, out.slope());
            if h == 0.0 { axial.push(line) } else { off.push(line) }
        }
    }
    if axial.len() < 2 || off.is_empty() {
        return Err(bad(format!("too few rays reached the image space ({} axial, {} off-axis)", axial.len(), off.len())));
    }

    let mean = |v: &[(f64, f64)], f: &dyn Fn(&(f64, f64)) -> f64| v.iter().map(f).sum::<f64>() / v.len() as f64;
    let (ma, mb) = (mean(&axial, &|l| l.0), mean(&axial, &|l| l.1));
    let cov = mean(&axial, &|l| (l.0 - ma) * (l.1 - mb));
    let var_b = mean(&axial, &|l| (l.1 - mb).powi(2));
    if !(var_b > 0.0) {
        return Err(bad("axial rays are parallel; no image plane".into()));
    }
    let x_img = -cov / var_b;
    let at = |l: &(f64, f64)| l.0 + l.1 * x_img;
    let axial_mean = mean(&axial, &at);
    let rms_spot = mean(&axial, &|l| (at(l) - axial_mean).powi(2)).sqrt();
    let magnification = mean(&off, &at) / object_height;

    let mut counts = vec![0; scan.bins];
    for l in axial.iter().chain(&off) {
        if let Some(b) = scan.bin(at(l)) {
            counts[b] += 1;
        }
    }
    Ok(DirectQmResult {
        image_distance: x_img - z_s,
        magnification,
        rms_spot,
        coincidence_enabled,
        rays_traced: traced,
        rays_used: (axial.len() + off.len()) as u64,
        scan,
        counts,
    })
}
