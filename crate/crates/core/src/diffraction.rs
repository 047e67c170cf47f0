//! Far-field (Fraunhofer) slit patterns and fringe visibility.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csv::{fmt_sig, render};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffractionError {
    #[error("invalid slit geometry: {0}")]
    InvalidGeometry(String),
    #[error("coherence parameter gamma = {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("no interior fringe extrema in the window")]
    NoFringes,
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
}

/// Slit width, separation (0 for a single slit), wavelength, and slit to
/// detector distance, all in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlitGeometry {
    pub a: f64,
    #[serde(default)]
    pub d_sep: f64,
    pub lambda: f64,
    pub z2: f64,
}

impl SlitGeometry {
    pub fn single(a: f64, lambda: f64, z2: f64) -> Result<Self, DiffractionError> {
        Self::double(a, 0.0, lambda, z2)
    }

    pub fn double(a: f64, d_sep: f64, lambda: f64, z2: f64) -> Result<Self, DiffractionError> {
        let g = Self { a, d_sep, lambda, z2 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), DiffractionError> {
        let bad = |m: String| Err(DiffractionError::InvalidGeometry(m));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("slit width a = {} must be > 0", self.a));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("wavelength = {} must be > 0", self.lambda));
        }
        if !(self.z2 > 0.0 && self.z2.is_finite()) {
            return bad(format!("z2 = {} must be > 0", self.z2));
        }
        if !(self.d_sep == 0.0 || self.d_sep > self.a) || !self.d_sep.is_finite() {
            return bad(format!("d_sep = {} must be 0 or exceed a = {}", self.d_sep, self.a));
        }
        Ok(())
    }

    /// Sinc argument `X = π a x2 / (λ z2)`.
    pub fn sinc_arg(&self, x2: f64) -> f64 {
        PI * self.a * x2 / (self.lambda * self.z2)
    }

    /// Detector position of the `n`-th zero of the single-slit envelope.
    pub fn envelope_zero(&self, n: i32) -> f64 {
        n as f64 * self.lambda * self.z2 / self.a
    }

    /// Distance between adjacent double-slit fringes.
    pub fn fringe_period(&self) -> Option<f64> {
        (self.d_sep > 0.0).then(|| self.lambda * self.z2 / self.d_sep)
    }
}

/// `sin x / x` with the removable singularity handled by its series.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Normalised single-slit coincidence rate `[sin X / X]²`.
///
/// Only `a`, `lambda` and `z2` are used; `d_sep` is ignored.
pub fn single_slit_ratio(geom: &SlitGeometry, x2: f64) -> f64 {
    let s = sinc(geom.sinc_arg(x2));
    s * s
}

/// Double-slit pattern with partial coherence `gamma`:
/// `sinc²(X) · (1 + γ cos(2π d x2/(λ z2))) / (1 + γ)`.
pub fn double_slit_pattern(geom: &SlitGeometry, gamma: f64, x2: f64) -> Result<f64, DiffractionError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(DiffractionError::GammaOutOfRange(gamma));
    }
    let phase = 2.0 * PI * geom.d_sep * x2 / (geom.lambda * geom.z2);
    Ok(single_slit_ratio(geom, x2) * (1.0 + gamma * phase.cos()) / (1.0 + gamma))
}

/// Normalised far-field intensity of a slit modelled as `n` equally spaced
/// point sources, `|Σ exp(−i k ξ x2 / z2)|² / n²`.
///
/// This is the direct numerical counterpart of [`single_slit_ratio`].
pub fn aperture_sum_ratio(geom: &SlitGeometry, x2: f64, n: usize) -> f64 {
    let k = 2.0 * PI / geom.lambda;
    let n = n.max(1);
    let sum: Complex64 = (0..n)
        .map(|j| {
            let xi = -geom.a / 2.0 + geom.a * (j as f64 + 0.5) / n as f64;
            Complex64::from_polar(1.0, -k * xi * x2 / geom.z2)
        })
        .sum();
    sum.norm_sqr() / (n * n) as f64
}

/// Sampled intensity profile normalised to a maximum of 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern1D {
    x: Vec<f64>,
    intensity: Vec<f64>,
}

impl Pattern1D {
    /// Normalises `raw` by its maximum. Values must be finite and non-negative
    /// with a positive maximum.
    pub fn new(x: Vec<f64>, raw: Vec<f64>) -> Result<Self, DiffractionError> {
        if x.len() != raw.len() || x.is_empty() {
            return Err(DiffractionError::InvalidPattern(format!(
                "{} positions vs {} intensities",
                x.len(),
                raw.len()
            )));
        }
        if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(DiffractionError::InvalidPattern("intensities must be finite and >= 0".into()));
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(DiffractionError::InvalidPattern("pattern is identically zero".into()));
        }
        Ok(Self { x, intensity: raw.into_iter().map(|v| v / max).collect() })
    }

    pub fn sample(xs: &[f64], f: impl Fn(f64) -> f64) -> Result<Self, DiffractionError> {
        Self::new(xs.to_vec(), xs.iter().map(|&x| f(x)).collect())
    }

    pub fn single_slit(geom: &SlitGeometry, xs: &[f64]) -> Result<Self, DiffractionError> {
        Self::sample(xs, |x| single_slit_ratio(geom, x))
    }

    pub fn double_slit(geom: &SlitGeometry, gamma: f64, xs: &[f64]) -> Result<Self, DiffractionError> {
        double_slit_pattern(geom, gamma, 0.0)?;
        Self::sample(xs, |x| double_slit_pattern(geom, gamma, x).unwrap_or(0.0))
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// CSV with columns `x2, intensity`, preceded by `#` metadata lines.
    pub fn to_csv(&self, metadata: &[(String, String)], digits: usize) -> String {
        let rows = self
            .x
            .iter()
            .zip(&self.intensity)
            .map(|(x, i)| vec![fmt_sig(*x, digits), fmt_sig(*i, digits)]);
        render(metadata, &["x2", "intensity"], rows)
    }
}

/// Evenly spaced positions over `[min, max]`.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (min + max)],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Fringe visibility `(Imax − Imin)/(Imax + Imin)` inside `window`.
///
/// Uses the interior maximum closest to the window centre and the mean of
/// the minima immediately on either side of it (one side suffices if the
/// other is cut off by the window).
pub fn visibility(p: &Pattern1D, window: Range<usize>) -> Result<f64, DiffractionError> {
    let end = window.end.min(p.len());
    let start = window.start.min(end);
    let v = &p.intensity[start..end];
    if v.len() < 3 {
        return Err(DiffractionError::NoFringes);
    }
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..v.len() - 1 {
        if v[i] > v[i - 1] && v[i] >= v[i + 1] {
            maxima.push(i);
        } else if v[i] < v[i - 1] && v[i] <= v[i + 1] {
            minima.push(i);
        }
    }
    let mid = v.len() / 2;
    let &peak = maxima
        .iter()
        .min_by_key(|&&i| i.abs_diff(mid))
        .ok_or(DiffractionError::NoFringes)?;
    let left = minima.iter().rev().find(|&&i| i < peak).map(|&i| v[i]);
    let right = minima.iter().find(|&&i| i > peak).map(|&i| v[i]);
    let i_min = match (left, right) {
        (Some(l), Some(r)) => 0.5 * (l + r),
        (Some(m), None) | (None, Some(m)) => m,
        (None, None) => return Err(DiffractionError::NoFringes),
    };
    let i_max = v[peak];
    Ok(((i_max - i_min) / (i_max + i_min)).clamp(0.0, 1.0))
}
