use rand::Rng;

use super::{CoincidenceError, SampledPair};
use crate::geometry::{trace_path, Element, GeometryError, MirrorKind, OpticalLayout, Ray, ScanAxis, Vec2};
use crate::kinematics::Photon;

/// The two arms of an unfolded two-photon layout.
///
/// The unfolded layout holds one planar quantum mirror standing for the
/// pumped crystal. Elements in front of it belong to the signal arm and are
/// re-expressed as distances from the crystal; elements behind it form the
/// idler arm, which must contain the scanning detector D2.
#[derive(Debug, Clone, PartialEq)]
pub struct Arms {
    pub signal: OpticalLayout,
    pub idler: OpticalLayout,
    /// Position of the crystal on the unfolded axis.
    pub crystal: f64,
    /// Distance from the crystal to D2 and its scan axis.
    pub detector: (f64, ScanAxis),
    detector_index: usize,
}

impl Arms {
    pub fn from_unfolded(layout: &OpticalLayout, pump_omega: f64) -> Result<Self, CoincidenceError> {
        let elements = layout.elements();
        let mirrors: Vec<usize> = elements
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, Element::QuantumMirror { .. }))
            .map(|(i, _)| i)
            .collect();
        let &[m] = mirrors.as_slice() else {
            return Err(CoincidenceError::ConfigInvalid(format!(
                "layout needs exactly one crystal (mirror element), found {}",
                mirrors.len()
            )));
        };
        let Element::QuantumMirror { position: crystal, kind, pump_omega: w } = elements[m] else { unreachable!() };
        if kind != MirrorKind::Planar {
            return Err(CoincidenceError::ConfigInvalid("the crystal must be a planar mirror".into()));
        }
        if ((w - pump_omega) / pump_omega).abs() > 1e-9 {
            return Err(CoincidenceError::ConfigInvalid(format!(
                "crystal pump_omega {w} differs from source pump_omega {pump_omega}"
            )));
        }

        let mut signal = Vec::new();
        for e in elements[..m].iter().rev() {
            signal.push(match e.clone() {
                Element::ThinLens { position, focal_length } => Element::ThinLens { position: crystal - position, focal_length },
                Element::Mask { position, mask } => Element::Mask { position: crystal - position, mask },
                _ => {
                    return Err(CoincidenceError::ConfigInvalid(
                        "signal arm may only hold lenses and masks (D1 is a bucket behind them)".into(),
                    ))
                }
            });
        }
        let idler: Vec<Element> = elements[m + 1..]
            .iter()
            .map(|e| match e.clone() {
                Element::ThinLens { position, focal_length } => Element::ThinLens { position: position - crystal, focal_length },
                Element::Mask { position, mask } => Element::Mask { position: position - crystal, mask },
                Element::DetectorPlane { position, scan } => Element::DetectorPlane { position: position - crystal, scan },
                Element::QuantumMirror { .. } => unreachable!(),
            })
            .collect();
        let detector_index = idler
            .iter()
            .position(|e| matches!(e, Element::DetectorPlane { .. }))
            .ok_or_else(|| CoincidenceError::ConfigInvalid("scan plane missing: no detector after the crystal".into()))?;
        let Element::DetectorPlane { position, scan } = idler[detector_index] else { unreachable!() };
        Ok(Self {
            signal: OpticalLayout::new(signal)?,
            idler: OpticalLayout::new(idler)?,
            crystal,
            detector: (position, scan),
            detector_index,
        })
    }

    pub fn scan(&self) -> ScanAxis {
        self.detector.1
    }

    /// Ray of `photon` leaving the crystal plane at transverse height `y`.
    pub fn ray_from_crystal(photon: &Photon, y: f64) -> Result<Ray, GeometryError> {
        let k = photon.k();
        Ray::new(Vec2::new(0.0, y), Vec2::new(k.z, k.x), photon.omega())
    }

    /// Traces the signal to D1. Returns the ray states after each signal-arm
    /// element if the photon reaches D1; partially transmitting mask cells
    /// pass it with probability equal to their transmission.
    pub fn trace_signal<R: Rng + ?Sized>(
        &self,
        pair: &SampledPair,
        rng: &mut R,
    ) -> Result<Option<Vec<Ray>>, CoincidenceError> {
        let ray = Self::ray_from_crystal(&pair.signal, pair.origin[0])?;
        let states = match trace_path(&ray, &self.signal) {
            Ok(s) => s,
            Err(GeometryError::RayBlocked { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        Ok(survives(&self.signal, &states, rng).then_some(states))
    }

    /// Transverse position where `idler`, leaving the crystal at `y`, crosses
    /// the D2 plane; `None` when an idler-arm mask stops it.
    pub fn idler_hit<R: Rng + ?Sized>(&self, idler: &Photon, y: f64, rng: &mut R) -> Result<Option<f64>, CoincidenceError> {
        let ray = Self::ray_from_crystal(idler, y)?;
        let states = match trace_path(&ray, &self.idler) {
            Ok(s) => s,
            Err(GeometryError::RayBlocked { .. }) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        if !survives(&self.idler, &states[..=self.detector_index], rng) {
            return Ok(None);
        }
        Ok(Some(states[self.detector_index].origin.y))
    }
}

fn survives<R: Rng + ?Sized>(layout: &OpticalLayout, states: &[Ray], rng: &mut R) -> bool {
    layout.elements().iter().zip(states).all(|(e, s)| match e {
        Element::Mask { mask, .. } => {
            let t = mask.transmission(s.origin.y);
            t >= 1.0 || rng.random::<f64>() < t
        }
        _ => true,
    })
}
