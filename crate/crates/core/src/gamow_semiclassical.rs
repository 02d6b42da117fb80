//! Semiclassical alpha-decay rate `Γ = p · f · T`: preformation probability,
//! collision frequency `v/(2R₀)`, and the WKB transmission through the
//! Coulomb barrier. Energies in MeV, lengths in fm, rates in s⁻¹.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;


use crate::constants::{ALPHA_MASS_MEV, COULOMB_MEV_FM, C_FM_PER_S, HBAR_C_MEV_FM};
use crate::fit::{linear_fit, LineFit};
use crate::quadrature::integrate;

/// Default radius parameter `r₀` in `R₀ = r₀(A_d^{1/3} + 4^{1/3})`, fm.
pub const DEFAULT_R0_PARAMETER: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GamowError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
    #[error("E_alpha = {e_alpha} MeV is not below the barrier top V(R0) = {v_top} MeV")]
    AboveBarrier { e_alpha: f64, v_top: f64 },
    #[error("barrier integral did not converge (estimate {0:e})")]
    Quadrature(f64),
    #[error("scan needs at least three energies")]
    ScanTooShort,
}

/// Nuclear radius `r0·(A_d^{1/3} + 4^{1/3})`.
pub fn nuclear_radius(a_daughter: f64, r0: f64) -> f64 {
    r0 * (a_daughter.cbrt() + 4.0f64.cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaDecayScenario {
    pub e_alpha: f64,
    pub z_daughter: f64,
    pub a_daughter: f64,
    /// Nuclear radius R₀, fm.
    pub r0: f64,
    pub p_alpha: f64,
    /// Alpha rest energy, MeV.
    pub m_alpha: f64,
}

impl AlphaDecayScenario {
    /// Scenario with the default radius convention and `p = 1`.
    pub fn new(e_alpha: f64, z_daughter: f64, a_daughter: f64) -> Result<Self, GamowError> {
        Self {
            e_alpha,
            z_daughter,
            a_daughter,
            r0: nuclear_radius(a_daughter, DEFAULT_R0_PARAMETER),
            p_alpha: 1.0,
            m_alpha: ALPHA_MASS_MEV,
        }
        .validated()
    }

    /// Same scenario with `R₀` recomputed from radius parameter `r0_param`.
    pub fn with_radius_parameter(self, r0_param: f64) -> Result<Self, GamowError> {
        Self { r0: nuclear_radius(self.a_daughter, r0_param), ..self }.validated()
    }

    pub fn validated(self) -> Result<Self, GamowError> {
        if !(self.e_alpha > 0.0) {
            return Err(GamowError::InvalidScenario("E_alpha must be positive"));
        }
        if !(self.r0 > 0.0) {
            return Err(GamowError::InvalidScenario("R0 must be positive"));
        }
        if !(self.p_alpha > 0.0 && self.p_alpha <= 1.0) {
            return Err(GamowError::InvalidScenario("p_alpha must lie in (0, 1]"));
        }
        if !(self.m_alpha > 0.0) || !(self.z_daughter > 0.0) {
            return Err(GamowError::InvalidScenario("mass and charge must be positive"));
        }
        Ok(self)
    }

    /// Coulomb energy `2 Z_d e²/r`, MeV.
    pub fn coulomb(&self, r: f64) -> f64 {
        2.0 * self.z_daughter * COULOMB_MEV_FM / r
    }

    /// Outer classical turning point `b`, fm.
    pub fn turning_point(&self) -> f64 {
        2.0 * self.z_daughter * COULOMB_MEV_FM / self.e_alpha
    }

    /// Alpha velocity `c·sqrt(2E/mc²)`, fm/s.
    pub fn velocity(&self) -> f64 {
        C_FM_PER_S * (2.0 * self.e_alpha / self.m_alpha).sqrt()
    }
}

/// `f = v/(2R₀)` in s⁻¹.
pub fn collision_frequency(s: &AlphaDecayScenario) -> f64 {
    s.velocity() / (2.0 * s.r0)
}

/// Gamow exponent `G = 2∫_{R₀}^{b} sqrt(2m(V−E))/ħ dr`, so that `T = e^{−G}`.
pub fn gamow_exponent(s: &AlphaDecayScenario) -> Result<f64, GamowError> {
    let v_top = s.coulomb(s.r0);
    if !(s.e_alpha < v_top) {
        return Err(GamowError::AboveBarrier { e_alpha: s.e_alpha, v_top });
    }
    let b = s.turning_point();
    let span = b - s.r0;
    let k2 = 2.0 * s.z_daughter * COULOMB_MEV_FM;
    // r = b − span·u² removes the square-root endpoint at b, and
    // V − E = k2·(b − r)/(r b) avoids cancellation near the barrier top
    let integrand = |u: f64| {
        let r = b - span * u * u;
        (k2 * span / (r * b)).sqrt() * u * 2.0 * span * u
    };
    let res = integrate(integrand, 0.0, 1.0, 1e-10, 0.0);
    if !res.converged {
        return Err(GamowError::Quadrature(res.value));
    }
    Ok(2.0 * (2.0 * s.m_alpha).sqrt() / HBAR_C_MEV_FM * res.value)
}

/// Closed form of the same exponent for the pure Coulomb barrier:
/// `∫_{R₀}^{b} sqrt(1/r − 1/b) dr = √b [arccos√(R₀/b) − √((R₀/b)(1 − R₀/b))]`.
pub fn gamow_exponent_closed_form(s: &AlphaDecayScenario) -> f64 {
    let b = s.turning_point();
    let x = s.r0 / b;
    let shape = b.sqrt() * (x.sqrt().acos() - (x * (1.0 - x)).sqrt());
    let strength = (2.0 * s.z_daughter * COULOMB_MEV_FM).sqrt();
    2.0 * (2.0 * s.m_alpha).sqrt() / HBAR_C_MEV_FM * strength * shape
}

/// WKB transmission `T = exp(−G)`.
pub fn wkb_transmission(s: &AlphaDecayScenario) -> Result<f64, GamowError> {
    Ok((-gamow_exponent(s)?).exp())
}

/// `Γ_G = p · f · T`, s⁻¹.
pub fn gamow_rate(s: &AlphaDecayScenario) -> Result<f64, GamowError> {
    Ok(s.p_alpha * collision_frequency(s) * wkb_transmission(s)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub e_mev: f64,
    pub inv_sqrt_e: f64,
    pub log10_gamma: f64,
}

/// Table of `log₁₀ Γ_G` over alpha energies and its least-squares line
/// against `1/√E`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeigerNuttall {
    pub rows: Vec<ScanRow>,
    pub fit: LineFit,
}

/// Scan `energies` at fixed daughter charge; every other parameter
/// (including R₀) comes from `template`.
pub fn geiger_nuttall_scan(z_daughter: f64, energies: &[f64], template: &AlphaDecayScenario) -> Result<GeigerNuttall, GamowError> {
    if energies.len() < 3 {
        return Err(GamowError::ScanTooShort);
    }
    let mut rows = Vec::with_capacity(energies.len());
    for &e in energies {
        let s = AlphaDecayScenario { e_alpha: e, z_daughter, ..*template }.validated()?;
        rows.push(ScanRow { e_mev: e, inv_sqrt_e: 1.0 / e.sqrt(), log10_gamma: gamow_rate(&s)?.log10() });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.inv_sqrt_e).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.log10_gamma).collect();
    let fit = linear_fit(&x, &y).ok_or(GamowError::ScanTooShort)?;
    Ok(GeigerNuttall { rows, fit })
}

/// `n` evenly spaced energies on `[e_min, e_max]`.
pub fn energy_grid(e_min: f64, e_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| e_min + (e_max - e_min) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uranium() -> AlphaDecayScenario {
        AlphaDecayScenario::new(4.27, 90.0, 234.0).unwrap()
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for e in [4.27, 6.0, 9.0] {
            let s = AlphaDecayScenario { e_alpha: e, ..uranium() };
            let g = gamow_exponent(&s).unwrap();
            let c = gamow_exponent_closed_form(&s);
            assert!(((g - c) / c).abs() < 1e-9, "{g} vs {c}");
        }
    }

    #[test]
    fn frequency_scaling() {
        let s = uranium();
        let f = collision_frequency(&s);
        let s2 = AlphaDecayScenario { r0: 2.0 * s.r0, ..s };
        assert!((collision_frequency(&s2) / f - 0.5).abs() < 1e-14);
        let s4 = AlphaDecayScenario { e_alpha: 4.0 * s.e_alpha, ..s };
        assert!((collision_frequency(&s4) / f - 2.0).abs() < 1e-14);
        assert!(f > 1e20 && f < 1e22, "{f:e}");
    }

    #[test]
    fn uranium_orders_of_magnitude() {
        let t = wkb_transmission(&uranium()).unwrap();
        assert!(t > 1e-45 && t < 1e-35, "{t:e}");
    }

    #[test]
    fn vanishing_barrier() {
        let s = uranium();
        let top = s.coulomb(s.r0);
        let near = AlphaDecayScenario { e_alpha: top * (1.0 - 1e-10), ..s };
        assert!((wkb_transmission(&near).unwrap() - 1.0).abs() < 1e-3);
        let above = AlphaDecayScenario { e_alpha: top * 1.01, ..s };
        assert!(matches!(gamow_rate(&above), Err(GamowError::AboveBarrier { .. })));
    }

    #[test]
    fn preformation_shifts_intercept() {
        let es = energy_grid(4.0, 9.0, 11);
        let base = geiger_nuttall_scan(90.0, &es, &AlphaDecayScenario { p_alpha: 0.5, ..uranium() }).unwrap();
        let doubled = geiger_nuttall_scan(90.0, &es, &AlphaDecayScenario { p_alpha: 1.0, ..uranium() }).unwrap();
        assert!((doubled.fit.intercept - base.fit.intercept - 2f64.log10()).abs() < 1e-9);
        assert!((doubled.fit.slope - base.fit.slope).abs() < 1e-9);
        assert!(base.fit.slope < 0.0);
    }
}
