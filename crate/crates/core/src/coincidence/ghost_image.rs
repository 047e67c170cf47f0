use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{arms_for, run_sharded, CoincidenceError, CoincidenceHistogram, CoincidenceRun, McOptions, SourceModel};
use crate::geometry::{thin_lens_image, Element, OpticalLayout};
use crate::kinematics::{conjugate_photon, cross_convert};

/// Imaging distances of an unfolded ghost-imaging layout: `s` from the mask
/// to the lens, `s_prime` from the lens through the crystal to D2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhostImagingGeometry {
    pub focal_length: f64,
    pub s: f64,
    pub s_prime: f64,
}

impl GhostImagingGeometry {
    /// Reads the first mask, the first lens after it, and the detector.
    pub fn from_layout(layout: &OpticalLayout) -> Result<Self, CoincidenceError> {
        let missing = |what: &str| CoincidenceError::ConfigInvalid(format!("ghost imaging layout needs {what}"));
        let els = layout.elements();
        let mask_at = els
            .iter()
            .position(|e| matches!(e, Element::Mask { .. }))
            .ok_or_else(|| missing("a mask"))?;
        let (lens_pos, f) = els[mask_at..]
            .iter()
            .find_map(|e| match *e {
                Element::ThinLens { position, focal_length } => Some((position, focal_length)),
                _ => None,
            })
            .ok_or_else(|| missing("a lens between mask and crystal"))?;
        let (det_pos, _) = layout.detector().ok_or_else(|| missing("a detector"))?;
        Ok(Self { focal_length: f, s: lens_pos - els[mask_at].position(), s_prime: det_pos - lens_pos })
    }

    /// `S'` at which the mask is imaged onto D2.
    pub fn focused_s_prime(&self) -> Result<f64, CoincidenceError> {
        Ok(thin_lens_image(self.s, self.focal_length)?)
    }

    pub fn magnification(&self) -> f64 {
        -self.s_prime / self.s
    }
}

/// Ghost imaging: the signal passes lens and mask to the bucket detector D1;
/// the idler is registered by the scanning detector D2.
///
/// When D1 fires, the idler is obtained literally through the unfolded
/// picture: the signal's path is retraced back to its emission point in the
/// crystal, where the phase-conjugate signal is crossed with the pump into
/// the idler that then propagates to D2. D2 singles are recorded whatever
/// happened in the signal arm.
pub fn run_ghost_image(
    layout: &OpticalLayout,
    src: &SourceModel,
    trials: u64,
    opts: &McOptions,
) -> Result<CoincidenceRun, CoincidenceError> {
    let arms = arms_for(layout, src)?;
    let scan = arms.scan();
    run_sharded(trials, src.seed, scan, opts, |rng, tally| {
        let pair = src.sample_pair(rng);
        let fired = arms.trace_signal(&pair, rng)?.is_some() && rng.random::<f64>() < opts.efficiency_d1;
        let mut used = pair;
        if fired {
            // The retraced signal path ends where the pair was born.
            used.idler = cross_convert(&pair.pump, &conjugate_photon(&pair.signal))?;
        }
        let hit = arms.idler_hit(&used.idler, pair.origin[0], rng)?;
        let bin = hit
            .and_then(|y| scan.bin(y))
            .filter(|_| rng.random::<f64>() < opts.efficiency_d2);
        tally.record(fired, bin, &used);
        Ok(())
    })
}

/// Edge-gradient sharpness `Σ (c[i+1] − c[i])² / (Σ c)²`.
pub fn sharpness(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let grad: f64 = counts.windows(2).map(|w| (w[1] as f64 - w[0] as f64).powi(2)).sum();
    grad / (total as f64).powi(2)
}

/// Distance between the coincidence centroids on either side of the axis.
pub fn peak_separation(h: &CoincidenceHistogram) -> Option<f64> {
    let centroid = |positive: bool| {
        let (mut w, mut s) = (0.0, 0.0);
        for (x, &c) in h.bin_centers().iter().zip(&h.coincidences) {
            if (*x > 0.0) == positive && *x != 0.0 {
                w += c as f64;
                s += c as f64 * x;
            }
        }
        (w > 0.0).then(|| s / w)
    };
    Some(centroid(true)? - centroid(false)?)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mask, MirrorKind, ScanAxis};
    use crate::units::{Units, SPEED_OF_LIGHT};
    use std::f64::consts::PI;

    fn omega_pump() -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / 351e-9
    }

    fn layout(mask: Mask, s_prime: f64) -> OpticalLayout {
        let (s, d_l) = (0.3, 0.1);
        OpticalLayout::new(vec![
            Element::Mask { position: 0.0, mask },
            Element::ThinLens { position: s, focal_length: 0.2 },
            Element::QuantumMirror { position: s + d_l, kind: MirrorKind::Planar, pump_omega: omega_pump() },
            Element::DetectorPlane { position: s + s_prime, scan: ScanAxis::symmetric(2.5e-3, 101).unwrap() },
        ])
        .unwrap()
    }

    fn source() -> SourceModel {
        let k = omega_pump() / 2.0 / SPEED_OF_LIGHT;
        SourceModel {
            pump_omega: omega_pump(),
            sigma_q: 0.02 * k,
            pump_waist: Some(0.05),
            signal_fraction: 0.5,
            seed: 11,
            units: Units::Si,
        }
    }

    #[test]
    fn geometry_from_layout() {
        let g = GhostImagingGeometry::from_layout(&layout(Mask::uniform(1.0), 0.6)).unwrap();
        assert!((g.s - 0.3).abs() < 1e-15 && (g.s_prime - 0.6).abs() < 1e-12);
        assert!((g.focused_s_prime().unwrap() - 0.6).abs() < 1e-12);
        assert!((g.magnification() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn opaque_mask_gives_no_coincidences() {
        let run = run_ghost_image(&layout(Mask::uniform(0.0), 0.6), &source(), 20_000, &McOptions::default()).unwrap();
        assert_eq!(run.histogram.total_coincidences(), 0);
        assert!(run.histogram.singles_d2.iter().sum::<u64>() > 0);
        assert_eq!(run.histogram.singles_d1[0], 0);
    }

    #[test]
    fn two_holes_image_with_magnification() {
        let mask = Mask::holes(&[-0.5e-3, 0.5e-3], 0.1e-3, 1e-5).unwrap();
        let run = run_ghost_image(&layout(mask, 0.6), &source(), 200_000, &McOptions::default()).unwrap();
        let h = &run.histogram;
        h.check_invariants().unwrap();
        assert!(run.audit.checked > 0 && run.audit.passed());
        let sep = peak_separation(h).unwrap();
        assert!((sep / 2e-3 - 1.0).abs() < 0.02, "{sep}");
    }

    #[test]
    fn open_mask_at_focus_has_no_structure() {
        let run = run_ghost_image(&layout(Mask::uniform(1.0), 0.6), &source(), 100_000, &McOptions::default()).unwrap();
        let c = &run.histogram.coincidences;
        assert!(super::super::flatness_test(c).unwrap() > 1e-4);
    }

    #[test]
    fn sharpness_prefers_concentrated_counts() {
        assert!(sharpness(&[0, 10, 0, 0]) > sharpness(&[2, 3, 3, 2]));
        assert_eq!(sharpness(&[0, 0]), 0.0);
    }
}
