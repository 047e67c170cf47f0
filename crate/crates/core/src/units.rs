//! Unit system selection.

use serde::{Deserialize, Serialize};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Either SI units with an explicit `c`, or natural units with `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Si,
    Natural,
}

impl Units {
    pub fn from_natural_flag(natural: bool) -> Self {
        if natural {
            Units::Natural
        } else {
            Units::Si
        }
    }

    pub fn c(self) -> f64 {
        match self {
            Units::Si => SPEED_OF_LIGHT,
            Units::Natural => 1.0,
        }
    }

    /// Vacuum wavenumber for angular frequency `omega`.
    pub fn wavenumber(self, omega: f64) -> f64 {
        omega / self.c()
    }

    /// Angular frequency of a vacuum wavelength.
    pub fn omega_from_wavelength(self, lambda: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.c() / lambda
    }

    pub fn wavelength_from_omega(self, omega: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.c() / omega
    }
}
