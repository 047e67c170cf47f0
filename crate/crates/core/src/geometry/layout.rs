//! Optical layouts: ordered elements along an unfolded axis.
//!
//! Layout files are TOML with one `[[element]]` table per element:
//!
//! ```toml
//! [[element]]
//! type = "lens"
//! position = 0.1
//! focal_length = 0.2
//!
//! [[element]]
//! type = "mask"
//! position = 0.4
//! mask = { pitch = 5e-5, cells = [0.0, 1.0, 1.0, 0.0], outside = 0.0 }
//!
//! [[element]]
//! type = "mirror"
//! position = 0.5
//! pump_omega = 3.0
//! kind = { spherical = { radius = 1.0 } }   # or kind = "planar"
//!
//! [[element]]
//! type = "detector"
//! position = 1.2
//! scan = { min = -2.5e-3, max = 2.5e-3, bins = 201 }
//! ```

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Default number of scan bins on a detector plane.
pub const DEFAULT_SCAN_BINS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MirrorKind {
    Planar,
    /// Concave for positive radius (centre of curvature in front).
    Spherical { radius: f64 },
}

impl MirrorKind {
    /// Signed radius, infinite for a planar mirror.
    pub fn radius(&self) -> f64 {
        match *self {
            MirrorKind::Planar => f64::INFINITY,
            MirrorKind::Spherical { radius } => radius,
        }
    }
}

/// Transmission profile along the transverse axis.
///
/// Cell `j` covers `[left + j·pitch, left + (j+1)·pitch)` with
/// `left = center − cells.len()·pitch/2`; everything outside the grid
/// transmits `outside`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mask {
    pub cells: Vec<f64>,
    pub pitch: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub outside: f64,
}

impl Mask {
    pub fn uniform(transmission: f64) -> Self {
        Self { cells: Vec::new(), pitch: 1.0, center: 0.0, outside: transmission }
    }

    /// Opaque screen with open holes of width `width` centred at `centers`,
    /// rasterised on a grid of the given pitch.
    pub fn holes(centers: &[f64], width: f64, pitch: f64) -> Result<Self, GeometryError> {
        if !(pitch > 0.0) || !(width >= pitch) {
            return Err(GeometryError::InvalidParameter(format!(
                "hole width {width} must be at least the pitch {pitch} > 0"
            )));
        }
        let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min) - width;
        let hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + width;
        let n = ((hi - lo) / pitch).ceil() as usize;
        let center = 0.5 * (lo + hi);
        let left = center - n as f64 * pitch / 2.0;
        let cells = (0..n)
            .map(|j| {
                let mid = left + (j as f64 + 0.5) * pitch;
                let open = centers.iter().any(|c| (mid - c).abs() < width / 2.0);
                if open { 1.0 } else { 0.0 }
            })
            .collect();
        Ok(Self { cells, pitch, center, outside: 0.0 })
    }

    pub fn transmission(&self, y: f64) -> f64 {
        let left = self.center - self.cells.len() as f64 * self.pitch / 2.0;
        let j = ((y - left) / self.pitch).floor();
        if j >= 0.0 && (j as usize) < self.cells.len() {
            self.cells[j as usize]
        } else {
            self.outside
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        if !(self.pitch > 0.0) {
            return Err(GeometryError::InvalidLayout(format!("mask pitch must be > 0, got {}", self.pitch)));
        }
        if self.cells.iter().chain(std::iter::once(&self.outside)).any(|t| !(0.0..=1.0).contains(t)) {
            return Err(GeometryError::InvalidLayout("mask transmissions must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Binned transverse scan of a detector plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanAxis {
    pub min: f64,
    pub max: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    DEFAULT_SCAN_BINS
}

impl ScanAxis {
    pub fn new(min: f64, max: f64, bins: usize) -> Result<Self, GeometryError> {
        let s = Self { min, max, bins };
        s.validate()?;
        Ok(s)
    }

    /// Symmetric scan `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, bins: usize) -> Result<Self, GeometryError> {
        Self::new(-half_width, half_width, bins)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.max > self.min) || self.bins == 0 || !self.min.is_finite() || !self.max.is_finite() {
            return Err(GeometryError::InvalidLayout(format!(
                "scan axis needs min < max and bins > 0, got [{}, {}] x {}",
                self.min, self.max, self.bins
            )));
        }
        Ok(())
    }

    pub fn pitch(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }

    pub fn center(&self, bin: usize) -> f64 {
        self.min + (bin as f64 + 0.5) * self.pitch()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bins).map(|b| self.center(b)).collect()
    }

    /// Bin containing `y`, if inside the scan.
    pub fn bin(&self, y: f64) -> Option<usize> {
        if !(y >= self.min && y < self.max) {
            return None;
        }
        let b = ((y - self.min) / self.pitch()) as usize;
        Some(b.min(self.bins - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Element {
    #[serde(rename = "lens")]
    ThinLens { position: f64, focal_length: f64 },
    Mask { position: f64, mask: Mask },
    #[serde(rename = "mirror")]
    QuantumMirror { position: f64, kind: MirrorKind, pump_omega: f64 },
    #[serde(rename = "detector")]
    DetectorPlane { position: f64, scan: ScanAxis },
}

impl Element {
    pub fn position(&self) -> f64 {
        match self {
            Element::ThinLens { position, .. }
            | Element::Mask { position, .. }
            | Element::QuantumMirror { position, .. }
            | Element::DetectorPlane { position, .. } => *position,
        }
    }

    fn validate(&self) -> Result<(), GeometryError> {
        match self {
            Element::ThinLens { focal_length, .. } => {
                if *focal_length == 0.0 || !focal_length.is_finite() {
                    return Err(GeometryError::InvalidLayout("lens focal length must be finite and non-zero".into()));
                }
            }
            Element::Mask { mask, .. } => mask.validate()?,
            Element::QuantumMirror { kind, pump_omega, .. } => {
                if let MirrorKind::Spherical { radius } = kind {
                    if *radius == 0.0 || radius.is_nan() {
                        return Err(GeometryError::InvalidLayout("mirror radius must be non-zero".into()));
                    }
                }
                if !(*pump_omega > 0.0) {
                    return Err(GeometryError::InvalidLayout("mirror pump_omega must be > 0".into()));
                }
            }
            Element::DetectorPlane { scan, .. } => scan.validate()?,
        }
        if !self.position().is_finite() {
            return Err(GeometryError::InvalidLayout("element position must be finite".into()));
        }
        Ok(())
    }
}

/// Elements in propagation order with strictly increasing positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayoutFile", into = "LayoutFile")]
pub struct OpticalLayout {
    elements: Vec<Element>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutFile {
    #[serde(rename = "element", default)]
    elements: Vec<Element>,
}

impl TryFrom<LayoutFile> for OpticalLayout {
    type Error = GeometryError;
    fn try_from(f: LayoutFile) -> Result<Self, GeometryError> {
        OpticalLayout::new(f.elements)
    }
}

impl From<OpticalLayout> for LayoutFile {
    fn from(l: OpticalLayout) -> Self {
        LayoutFile { elements: l.elements }
    }
}

impl OpticalLayout {
    pub fn new(elements: Vec<Element>) -> Result<Self, GeometryError> {
        for e in &elements {
            e.validate()?;
        }
        for w in elements.windows(2) {
            if !(w[1].position() > w[0].position()) {
                return Err(GeometryError::InvalidLayout(format!(
                    "positions must increase strictly: {} then {}",
                    w[0].position(),
                    w[1].position()
                )));
            }
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// First detector plane, if any.
    pub fn detector(&self) -> Option<(f64, ScanAxis)> {
        self.elements.iter().find_map(|e| match e {
            Element::DetectorPlane { position, scan } => Some((*position, *scan)),
            _ => None,
        })
    }

    pub fn from_toml_str(s: &str) -> Result<Self, GeometryError> {
        toml::from_str(s).map_err(|e| GeometryError::InvalidLayout(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("layout serialises to TOML")
    }
}
