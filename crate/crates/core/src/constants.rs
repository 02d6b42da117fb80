//! Physical constants and unit conversions.
//!
//! The time-domain and pole modules work in natural units (ħ = m = 1). The
//! nuclear scenarios use MeV and fm; the cavity scenarios use SI.

/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum impedance, Ω.
pub const Z0_VACUUM: f64 = 376.730313;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// ħc in MeV·fm.
pub const HBAR_C_MEV_FM: f64 = 197.326_980_4;
/// e²/(4πε₀) in MeV·fm.
pub const COULOMB_MEV_FM: f64 = 1.439_964_548;
/// Alpha-particle rest energy, MeV.
pub const ALPHA_MASS_MEV: f64 = 3_727.379_406_6;
/// Speed of light in fm/s.
pub const C_FM_PER_S: f64 = 2.997_924_58e23;
/// ħ in MeV·s.
pub const HBAR_MEV_S: f64 = 6.582_119_569e-22;

/// Reference values for the uranium comparison.
pub mod uranium {
    /// Semiclassical Gamow estimate, s⁻¹.
    pub const GAMMA_GAMOW: f64 = 3.130e-13;
    /// Complex-pole estimate, s⁻¹.
    pub const GAMMA_POLE: f64 = 2.6722e-13;
    /// Measured decay constant, s⁻¹.
    pub const GAMMA_EXP: f64 = 2.5872e-13;
}

/// Reference values for the microwave cavity.
pub mod cavity {
    /// Mirror apex separation, m.
    pub const L: f64 = 27.57e-3;
    /// Adjusted separation used with lossy mirrors, m.
    pub const L_ADJUSTED: f64 = 27.562e-3;
    /// Mirror curvature radius in the Oxz plane, m.
    pub const R_X: f64 = 39.4e-3;
    /// Mirror curvature radius in the Oyz plane, m.
    pub const R_Y: f64 = 40.6e-3;
    /// Mirror diameter, m.
    pub const DIAMETER: f64 = 50e-3;
    /// Computed TEM₉₀₀ frequency with perfect mirrors, Hz.
    pub const F_PEC: f64 = 51.085e9;
    /// Lossy-mirror mode frequencies, Hz. Labels only.
    pub const F1: f64 = 51.0984e9;
    pub const F2: f64 = 51.0997e9;
    /// Mode splitting, Hz. Metadata only.
    pub const SPLITTING: f64 = 1.29e6;
    /// Order of magnitude of the measured photon lifetimes, s.
    pub const TAU_MEASURED: f64 = 0.1;
}

/// Natural units for the alpha-particle problem: ħ = m_α = 1 with lengths in
/// fm. The energy unit is then ħ²/(m_α·fm²) and the time unit ħ over that.
pub mod nuclear {
    use super::{ALPHA_MASS_MEV, COULOMB_MEV_FM, HBAR_C_MEV_FM, HBAR_MEV_S};

    /// ħ²/(m_α fm²) in MeV.
    pub const ENERGY_UNIT_MEV: f64 = HBAR_C_MEV_FM * HBAR_C_MEV_FM / ALPHA_MASS_MEV;
    /// ħ/ENERGY_UNIT in seconds.
    pub const TIME_UNIT_S: f64 = HBAR_MEV_S / ENERGY_UNIT_MEV;

    pub fn mev_to_natural(e_mev: f64) -> f64 {
        e_mev / ENERGY_UNIT_MEV
    }

    /// Natural rate to s⁻¹.
    pub fn rate_to_si(gamma: f64) -> f64 {
        gamma / TIME_UNIT_S
    }

    /// Coefficient `c` of the alpha–daughter Coulomb energy `c/r` (r in fm).
    pub fn coulomb_coefficient(z_daughter: f64) -> f64 {
        2.0 * z_daughter * COULOMB_MEV_FM / ENERGY_UNIT_MEV
    }
}
