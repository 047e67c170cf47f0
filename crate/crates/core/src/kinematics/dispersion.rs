//! Tabulated refractive index and the nonlinear crystal description.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::KinematicsError;
use crate::units::Units;

/// Real refractive index sampled at ascending angular frequencies, linearly
/// interpolated in between. Extrapolation is an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DispersionTable {
    omega: Vec<f64>,
    index: Vec<f64>,
}

impl DispersionTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, KinematicsError> {
        if points.len() < 2 {
            return Err(KinematicsError::InvalidDispersion(format!(
                "need at least 2 entries, got {}",
                points.len()
            )));
        }
        for (i, &(w, n)) in points.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(KinematicsError::InvalidDispersion(format!(
                    "entry {i}: omega {w} is not a finite non-negative number"
                )));
            }
            if !(n >= 1.0) || !n.is_finite() {
                return Err(KinematicsError::InvalidDispersion(format!(
                    "entry {i}: index {n} must be finite and >= 1"
                )));
            }
            if i > 0 && w <= points[i - 1].0 {
                return Err(KinematicsError::InvalidDispersion(format!(
                    "entry {i}: omega {w} is not strictly increasing"
                )));
            }
        }
        let (omega, index) = points.into_iter().unzip();
        Ok(Self { omega, index })
    }

    /// Constant index over `[0, f64::MAX]`.
    pub fn constant(n: f64) -> Result<Self, KinematicsError> {
        Self::new(vec![(0.0, n), (f64::MAX, n)])
    }

    pub fn range(&self) -> (f64, f64) {
        (self.omega[0], self.omega[self.omega.len() - 1])
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.index.iter().copied())
    }

    /// Re n(omega).
    pub fn index_at(&self, omega: f64) -> Result<f64, KinematicsError> {
        let (lo, hi) = self.range();
        if !(omega >= lo && omega <= hi) {
            return Err(KinematicsError::OutOfDispersionRange { omega, min: lo, max: hi });
        }
        let j = self.omega.partition_point(|&w| w < omega);
        if j == 0 {
            return Ok(self.index[0]);
        }
        let (w0, w1) = (self.omega[j - 1], self.omega[j]);
        let (n0, n1) = (self.index[j - 1], self.index[j]);
        if n0 == n1 {
            return Ok(n0);
        }
        let t = (omega - w0) / (w1 - w0);
        Ok(n0 + (n1 - n0) * t)
    }

    /// Reads the two-column `omega<TAB>n` text format.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, KinematicsError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            KinematicsError::InvalidDispersion(format!("{}: {e}", path.as_ref().display()))
        })?;
        text.parse()
    }
}

impl Default for DispersionTable {
    fn default() -> Self {
        Self { omega: vec![0.0, f64::MAX], index: vec![1.0, 1.0] }
    }
}

impl FromStr for DispersionTable {
    type Err = KinematicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut points = Vec::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(KinematicsError::DispersionParse {
                    line: lineno + 1,
                    message: format!("expected 2 columns, found {}", cols.len()),
                });
            }
            let parse = |c: &str| {
                c.parse::<f64>().map_err(|e| KinematicsError::DispersionParse {
                    line: lineno + 1,
                    message: format!("'{c}': {e}"),
                })
            };
            points.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::new(points)
    }
}

impl fmt::Display for DispersionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# omega\tn")?;
        for (w, n) in self.points() {
            writeln!(f, "{w:e}\t{n}")?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<(f64, f64)>> for DispersionTable {
    type Error = KinematicsError;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<DispersionTable> for Vec<(f64, f64)> {
    fn from(t: DispersionTable) -> Self {
        t.omega.into_iter().zip(t.index).collect()
    }
}

/// The pumped nonlinear crystal: dispersion, effective coupling and thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalMedium {
    pub dispersion: DispersionTable,
    /// Effective three-wave coupling (1/m), magnitude and phase.
    pub coupling: Complex64,
    /// Thickness (m).
    pub thickness: f64,
    pub units: Units,
}

impl CrystalMedium {
    pub fn new(
        dispersion: DispersionTable,
        coupling: Complex64,
        thickness: f64,
        units: Units,
    ) -> Result<Self, KinematicsError> {
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(KinematicsError::InvalidDispersion(format!(
                "crystal thickness must be positive, got {thickness}"
            )));
        }
        Ok(Self { dispersion, coupling, thickness, units })
    }

    /// Non-dispersive medium of index 1 with no coupling.
    pub fn vacuum(units: Units) -> Self {
        Self {
            dispersion: DispersionTable::default(),
            coupling: Complex64::new(0.0, 0.0),
            thickness: 1.0,
            units,
        }
    }

    pub fn index(&self, omega: f64) -> Result<f64, KinematicsError> {
        self.dispersion.index_at(omega)
    }

    /// |k| = n(omega) omega / c inside the medium.
    pub fn wavenumber(&self, omega: f64) -> Result<f64, KinematicsError> {
        Ok(self.index(omega)? * omega / self.units.c())
    }

    /// Phase velocity c / n(omega).
    pub fn phase_velocity(&self, omega: f64) -> Result<f64, KinematicsError> {
        Ok(self.units.c() / self.index(omega)?)
    }
}
