//! Physical constants and the NV ground-state parameter table.

use core::f64::consts::PI;

/// Elementary charge (C), exact in SI since 2019.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity (F/m), CODATA 2018.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Avogadro constant (1/mol), exact.
pub const AVOGADRO: f64 = 6.022_140_76e23;

pub const TWO_PI: f64 = 2.0 * PI;

/// Unit conversions between the CLI/config units and SI.
pub mod units {
    pub const NM: f64 = 1e-9;
    pub const US: f64 = 1e-6;
    pub const NS: f64 = 1e-9;
    pub const MHZ: f64 = 1e6;
    /// 1 V/um in V/m.
    pub const V_PER_UM: f64 = 1e6;
    /// 1 mol/L in mol/m^3.
    pub const MOL_PER_L: f64 = 1e3;
    /// 1 Hz*cm/V expressed as Hz per (V/m).
    pub const HZ_CM_PER_V: f64 = 1e-2;
    pub const GAUSS: f64 = 1e-4;
}

/// NV ground-state constants, stored in SI (Hz, Hz/(V/m), Hz/T).
///
/// The defaults are the zero-field splitting `D = 2.87 GHz`, the axial and
/// transverse electric dipole moments `d_par = 0.35 Hz cm/V` and
/// `d_perp = 17 Hz cm/V`, and the gyromagnetic ratio `gamma_e = 28 GHz/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvConstants {
    pub zero_field_splitting: f64,
    pub d_parallel: f64,
    pub d_perp: f64,
    pub gamma_e: f64,
}

impl Default for NvConstants {
    fn default() -> Self {
        Self::from_table_units(2.87, 0.35, 17.0, 28.0)
    }
}

impl NvConstants {
    /// Builds the table from the units used in configuration files:
    /// GHz, Hz*cm/V, Hz*cm/V and GHz/T.
    pub fn from_table_units(d_ghz: f64, d_par_hz_cm_per_v: f64, d_perp_hz_cm_per_v: f64, gamma_ghz_per_t: f64) -> Self {
        Self {
            zero_field_splitting: d_ghz * 1e9,
            d_parallel: d_par_hz_cm_per_v * units::HZ_CM_PER_V,
            d_perp: d_perp_hz_cm_per_v * units::HZ_CM_PER_V,
            gamma_e: gamma_ghz_per_t * 1e9,
        }
    }

    /// Drive frequency (rad/s) that puts the drive on resonance, `Delta = 0`.
    pub fn resonant_drive(&self) -> f64 {
        TWO_PI * self.zero_field_splitting
    }
}

/// Maps an angle onto `[0, 2 pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x % TWO_PI;
    let r = if r < 0.0 { r + TWO_PI } else { r };
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}
