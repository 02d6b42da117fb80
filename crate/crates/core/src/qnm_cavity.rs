//! Open electromagnetic cavities in one dimension: Fabry–Perot quasinormal
//! poles with surface-impedance mirrors, paraxial resonance frequencies of a
//! two-mirror resonator, and a finite-difference Helmholtz eigensolver with
//! PML for separating leaky modes from PML (Bérenger) modes.
//!
//! Time dependence is `e^{−iωt}`, so physical modes have `Im ω ≤ 0`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::barrier_dynamics::PmlSpec;
use crate::constants::{C_LIGHT, MU0, Z0_VACUUM};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QnmError {
    #[error("unstable resonator: need 0 < L < r_x, r_y (g_x = {g_x}, g_y = {g_y})")]
    Unstable { g_x: f64, g_y: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("invalid surface impedance: {0}")]
    InvalidImpedance(&'static str),
    #[error("real frequency: Q and lifetime are unbounded")]
    Unbounded,
    #[error("frequency has positive imaginary part (growing mode)")]
    Growing,
    #[error("invalid permittivity profile: {0}")]
    InvalidProfile(&'static str),
    #[error("eigensolver did not converge (condition estimate {condition:e})")]
    EigenFailure { condition: f64 },
    #[error("spectra come from different permittivity profiles")]
    MismatchedPhysics,
    #[error("impedance iteration did not converge for n = {0}")]
    NoConvergence(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    pub l: f64,
    pub r_x: f64,
    pub r_y: f64,
    pub mirror_diameter: f64,
}

impl CavityGeometry {
    pub fn new(l: f64, r_x: f64, r_y: f64, mirror_diameter: f64) -> Result<Self, QnmError> {
        if !(l > 0.0) || !(mirror_diameter >= 0.0) {
            return Err(QnmError::InvalidGeometry("length must be positive"));
        }
        let g = Self { l, r_x, r_y, mirror_diameter };
        let (g_x, g_y) = g.g_factors();
        if !(g_x > 0.0 && g_x < 1.0 && g_y > 0.0 && g_y < 1.0) {
            return Err(QnmError::Unstable { g_x, g_y });
        }
        Ok(g)
    }

    /// Toroidal-mirror resonator from the reference measurement.
    pub fn reference() -> Self {
        use crate::constants::cavity::{DIAMETER, L, R_X, R_Y};
        Self { l: L, r_x: R_X, r_y: R_Y, mirror_diameter: DIAMETER }
    }

    /// `g_i = 1 − L/r_i`.
    pub fn g_factors(&self) -> (f64, f64) {
        (1.0 - self.l / self.r_x, 1.0 - self.l / self.r_y)
    }

    /// Rayleigh ranges `½√(L(2r − L))` of the symmetric resonator in each plane.
    pub fn rayleigh_ranges(&self) -> (f64, f64) {
        let z = |r: f64| 0.5 * (self.l * (2.0 * r - self.l)).sqrt();
        (z(self.r_x), z(self.r_y))
    }

    /// Gouy phase `½(atan(z/z_Rx) + atan(z/z_Ry))` at `z` from the waist.
    pub fn gouy_phase(&self, z: f64) -> f64 {
        let (zx, zy) = self.rayleigh_ranges();
        0.5 * ((z / zx).atan() + (z / zy).atan())
    }
}

/// `f_q = (c/2L)[q + 1 + (arccos g_x + arccos g_y)/2π]`, Hz.
///
/// Planar mirrors (`g = 1`) are accepted here as the limiting case.
pub fn paraxial_frequency(geometry: &CavityGeometry, q: u32) -> Result<f64, QnmError> {
    let (g_x, g_y) = geometry.g_factors();
    if !(g_x > 0.0 && g_x <= 1.0 && g_y > 0.0 && g_y <= 1.0) || !(geometry.l > 0.0) {
        return Err(QnmError::Unstable { g_x, g_y });
    }
    Ok(C_LIGHT / (2.0 * geometry.l) * (q as f64 + 1.0 + (g_x.acos() + g_y.acos()) / (2.0 * PI)))
}

/// Number of field maxima of the TEM₀₀q mode between the mirrors, counted
/// from the on-axis phase `k(z + L/2) − (ψ(z) − ψ(−L/2))` sampled along the
/// axis.
pub fn axial_antinodes(geometry: &CavityGeometry, q: u32) -> Result<usize, QnmError> {
    let f = paraxial_frequency(geometry, q)?;
    let k = 2.0 * PI * f / C_LIGHT;
    let h = 0.5 * geometry.l;
    let phase = |z: f64| k * (z + h) - (geometry.gouy_phase(z) - geometry.gouy_phase(-h));
    let n = 20_000 * (q as usize + 1);
    let mut count = 0;
    let mut prev = phase(-h).sin().abs();
    let mut rising = true;
    for i in 1..=n {
        let z = -h + geometry.l * i as f64 / n as f64;
        let cur = phase(z).sin().abs();
        if rising && cur < prev {
            count += 1;
        }
        rising = cur >= prev;
        prev = cur;
    }
    Ok(count)
}

/// Mirror surface impedance `Z_s = X_s − iY_s` (the reactive part of a
/// superconductor is inductive, which carries a minus sign for `e^{−iωt}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceImpedance {
    pub x_s: f64,
    pub y_s: f64,
    /// When set, `Y_s = ωμ₀L_L` is evaluated at each mode frequency instead
    /// of using `y_s`.
    pub london_depth: Option<f64>,
}

impl SurfaceImpedance {
    pub fn new(x_s: f64, y_s: f64) -> Result<Self, QnmError> {
        if !(x_s >= 0.0) || !y_s.is_finite() {
            return Err(QnmError::InvalidImpedance("X_s must be non-negative"));
        }
        Ok(Self { x_s, y_s, london_depth: None })
    }

    pub fn pec() -> Self {
        Self { x_s: 0.0, y_s: 0.0, london_depth: None }
    }

    pub fn from_london_depth(x_s: f64, london_depth: f64) -> Result<Self, QnmError> {
        if !(london_depth >= 0.0) {
            return Err(QnmError::InvalidImpedance("London depth must be non-negative"));
        }
        Ok(Self { london_depth: Some(london_depth), ..Self::new(x_s, 0.0)? })
    }

    pub fn reactance(&self, omega: f64) -> f64 {
        match self.london_depth {
            Some(ll) => omega * MU0 * ll,
            None => self.y_s,
        }
    }

    pub fn at(&self, omega: f64) -> C {
        C::new(self.x_s, -self.reactance(omega))
    }

    pub fn is_pec(&self) -> bool {
        self.x_s == 0.0 && self.y_s == 0.0 && self.london_depth.map_or(true, |l| l == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Leaky,
    Berenger,
    Trapped,
}

impl ModeClass {
    pub fn label(self) -> &'static str {
        match self {
            ModeClass::Leaky => "leaky",
            ModeClass::Berenger => "berenger",
            ModeClass::Trapped => "trapped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifetimeConvention {
    /// `τ = 1/(2|ω''|)`: stored energy decays as `e^{−t/τ}`.
    Energy,
    /// `|ω''| = 2π/τ`, as quoted alongside the reference measurement.
    Angular,
}

/// `(Q, τ)` with `Q = ω'/(2|ω''|)` and τ in the energy convention.
pub fn quality_and_lifetime(omega: C) -> Result<(f64, f64), QnmError> {
    Ok((quality(omega)?, lifetime(omega, LifetimeConvention::Energy)?))
}

pub fn quality(omega: C) -> Result<f64, QnmError> {
    check_decaying(omega)?;
    Ok(omega.re / (2.0 * omega.im.abs()))
}

pub fn lifetime(omega: C, convention: LifetimeConvention) -> Result<f64, QnmError> {
    check_decaying(omega)?;
    let im = omega.im.abs();
    Ok(match convention {
        LifetimeConvention::Energy => 1.0 / (2.0 * im),
        LifetimeConvention::Angular => 2.0 * PI / im,
    })
}

fn check_decaying(omega: C) -> Result<(), QnmError> {
    if omega.im > 0.0 {
        Err(QnmError::Growing)
    } else if omega.im == 0.0 {
        Err(QnmError::Unbounded)
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnmMode {
    pub omega: C,
    /// `None` when the mode does not decay.
    pub q: Option<f64>,
    pub tau: Option<f64>,
    /// Field samples on the spectrum grid, peak magnitude 1; empty for
    /// analytic modes.
    pub profile: Vec<C>,
    pub class: Option<ModeClass>,
}

impl QnmMode {
    fn new(omega: C, profile: Vec<C>, class: Option<ModeClass>) -> Self {
        let (q, tau) = match quality_and_lifetime(omega) {
            Ok((q, t)) => (Some(q), Some(t)),
            Err(_) => (None, None),
        };
        Self { omega, q, tau, profile, class }
    }

    pub fn frequency(&self) -> C {
        self.omega / (2.0 * PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnmSpectrum {
    pub modes: Vec<QnmMode>,
    /// Grid of the mode profiles.
    pub x: Vec<f64>,
    /// Permittivity on `x`, used to match spectra of the same structure.
    pub permittivity: Vec<f64>,
}

/// Poles of a two-mirror cavity of length `l` (m) with identical mirrors.
///
/// Solves `ρ(ω)² e^{2iωL/c} = 1` with `ρ = (Z₀ − Z_s)/(Z₀ + Z_s)`:
/// `ω_n = (c/L)(nπ + i ln ρ)`. With a London depth the impedance depends
/// on ω and the root is found by fixed-point iteration from the
/// frequency-independent estimate.
pub fn fabry_perot_poles(l: f64, zs: &SurfaceImpedance, n_range: RangeInclusive<u32>) -> Result<QnmSpectrum, QnmError> {
    if !(l > 0.0) {
        return Err(QnmError::InvalidGeometry("length must be positive"));
    }
    let mut modes = Vec::new();
    for n in n_range {
        let pole = |omega: f64| {
            let z = zs.at(omega);
            if (z + Z0_VACUUM).norm() == 0.0 {
                return Err(QnmError::InvalidImpedance("Z_s = −Z0"));
            }
            let rho = (C::new(Z0_VACUUM, 0.0) - z) / (C::new(Z0_VACUUM, 0.0) + z);
            Ok((C::new(n as f64 * PI, 0.0) + C::i() * rho.ln()) * (C_LIGHT / l))
        };
        let mut omega = pole(n as f64 * PI * C_LIGHT / l)?;
        if zs.london_depth.is_some() {
            let mut done = false;
            for _ in 0..100 {
                let next = pole(omega.re)?;
                let moved = (next - omega).norm();
                omega = next;
                if moved <= 1e-15 * omega.norm() {
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(QnmError::NoConvergence(n));
            }
        }
        let class = if zs.is_pec() { ModeClass::Trapped } else { ModeClass::Leaky };
        modes.push(QnmMode::new(omega, Vec::new(), Some(class)));
    }
    Ok(QnmSpectrum { modes, x: Vec::new(), permittivity: Vec::new() })
}

/// Small-loss lifetime `τ ≈ (L/c)·Z₀/(4X_s)` (energy convention).
pub fn fabry_perot_perturbative_lifetime(l: f64, x_s: f64) -> f64 {
    l / C_LIGHT * Z0_VACUUM / (4.0 * x_s)
}

#[derive(Debug, Clone, PartialEq)]
enum EpsKind {
    Slab { eps: f64, half_width: f64 },
    Samples(Vec<f64>),
}

/// Relative permittivity on `[x_min, x_max]`, vacuum (ε = 1) unless set.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityProfile {
    pub x_min: f64,
    pub x_max: f64,
    kind: EpsKind,
}

impl PermittivityProfile {
    /// Slab of permittivity `eps` on `[−half_width, half_width]` inside
    /// `[−domain_half_width, domain_half_width]`.
    pub fn slab(eps: f64, half_width: f64, domain_half_width: f64) -> Result<Self, QnmError> {
        if !(eps >= 1.0) || !(half_width > 0.0) || !(domain_half_width > half_width) {
            return Err(QnmError::InvalidProfile("need eps >= 1 and a slab inside the domain"));
        }
        Ok(Self { x_min: -domain_half_width, x_max: domain_half_width, kind: EpsKind::Slab { eps, half_width } })
    }

    pub fn vacuum(x_min: f64, x_max: f64) -> Result<Self, QnmError> {
        Self::from_samples(x_min, x_max, alloc::vec![1.0, 1.0])
    }

    /// Samples on a uniform grid spanning `[x_min, x_max]`, linearly
    /// interpolated.
    pub fn from_samples(x_min: f64, x_max: f64, samples: Vec<f64>) -> Result<Self, QnmError> {
        if samples.len() < 2 || !(x_max > x_min) {
            return Err(QnmError::InvalidProfile("need two samples on a non-empty interval"));
        }
        if samples.iter().any(|&e| !(e >= 1.0)) {
            return Err(QnmError::InvalidProfile("permittivity must be real and >= 1"));
        }
        Ok(Self { x_min, x_max, kind: EpsKind::Samples(samples) })
    }

    pub fn eps_at(&self, x: f64) -> f64 {
        match &self.kind {
            EpsKind::Slab { eps, half_width } => {
                if x.abs() <= *half_width {
                    *eps
                } else {
                    1.0
                }
            }
            EpsKind::Samples(s) => {
                let u = ((x - self.x_min) / (self.x_max - self.x_min)).clamp(0.0, 1.0) * (s.len() - 1) as f64;
                let j = (u.floor() as usize).min(s.len() - 2);
                let f = u - j as f64;
                s[j] * (1.0 - f) + s[j + 1] * f
            }
        }
    }

    /// Cell average of ε over `[x − h/2, x + h/2]`; exact for the slab.
    fn cell_average(&self, x: f64, h: f64) -> f64 {
        match &self.kind {
            EpsKind::Slab { eps, half_width } => {
                let inside = ((x + 0.5 * h).min(*half_width) - (x - 0.5 * h).max(-*half_width)).max(0.0);
                1.0 + (eps - 1.0) * inside / h
            }
            EpsKind::Samples(_) => self.eps_at(x),
        }
    }
}

/// Eigenmodes of `−(1/s) d/dx[(1/s) dE/dx] = (ω/c)² ε E` with `E = 0` at
/// both ends of the profile and the PML occupying its outer `thickness`.
/// Lengths in metres.
pub fn helmholtz_qnm_1d(profile: &PermittivityProfile, pml: &PmlSpec, n_points: usize) -> Result<QnmSpectrum, QnmError> {
    let (a, b) = (profile.x_min, profile.x_max);
    if !pml.is_off() && 2.0 * pml.thickness >= b - a {
        return Err(QnmError::InvalidProfile("PML layers overlap"));
    }
    helmholtz_qnm_stretched(profile, n_points, |x| pml.stretch(x, a, b))
}

/// As [`helmholtz_qnm_1d`] with an arbitrary complex stretch `s(x)`.
pub fn helmholtz_qnm_stretched<S>(profile: &PermittivityProfile, n_points: usize, stretch: S) -> Result<QnmSpectrum, QnmError>
where
    S: Fn(f64) -> C,
{
    if !(3..=4000).contains(&n_points) {
        return Err(QnmError::InvalidProfile("n_points must lie in 3..=4000"));
    }
    let n = n_points;
    let h = (profile.x_max - profile.x_min) / (n + 1) as f64;
    let xs: Vec<f64> = (1..=n).map(|i| profile.x_min + i as f64 * h).collect();
    let eps: Vec<f64> = xs.iter().map(|&x| profile.cell_average(x, h)).collect();
    let h2 = h * h;
    let mut m = DMatrix::from_element(n, n, C::new(0.0, 0.0));
    for i in 0..n {
        let s = stretch(xs[i]);
        let sl = stretch(xs[i] - 0.5 * h);
        let sr = stretch(xs[i] + 0.5 * h);
        let scale = C::new(eps[i] * h2, 0.0) * s;
        m[(i, i)] = (sl.inv() + sr.inv()) / scale;
        if i > 0 {
            m[(i, i - 1)] = -sl.inv() / scale;
        }
        if i + 1 < n {
            m[(i, i + 1)] = -sr.inv() / scale;
        }
    }
    let (lambdas, vectors) = eigen(m)?;
    let mut modes: Vec<QnmMode> = lambdas
        .iter()
        .zip(vectors)
        .filter_map(|(&lam, v)| {
            let mut k = lam.sqrt();
            if k.im > 0.0 {
                k = -k;
            }
            if k.re <= 0.0 {
                return None;
            }
            Some(QnmMode::new(k * C_LIGHT, v, None))
        })
        .collect();
    modes.sort_by(|p, q| p.omega.re.total_cmp(&q.omega.re));
    Ok(QnmSpectrum { modes, x: xs, permittivity: eps })
}

/// Eigenvalues and peak-normalized eigenvectors of a complex matrix via
/// the Schur form `A = Q T Q†` and back-substitution on `T`.
fn eigen(m: DMatrix<C>) -> Result<(Vec<C>, Vec<Vec<C>>), QnmError> {
    let n = m.nrows();
    let Some(schur) = nalgebra::Schur::try_new(m.clone(), 1e-14, 100_000) else {
        let condition = m.clone().try_inverse().map_or(f64::INFINITY, |inv| m.norm() * inv.norm());
        return Err(QnmError::EigenFailure { condition });
    };
    let (q, t) = schur.unpack();
    let scale = t.norm().max(1e-300);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for j in 0..n {
        let lam = t[(j, j)];
        let mut y = DVector::from_element(n, C::new(0.0, 0.0));
        y[j] = C::new(1.0, 0.0);
        for i in (0..j).rev() {
            let mut acc = C::new(0.0, 0.0);
            for p in i + 1..=j {
                acc += t[(i, p)] * y[p];
            }
            let mut d = t[(i, i)] - lam;
            if d.norm() < 1e-14 * scale {
                d = C::new(1e-14 * scale, 0.0);
            }
            y[i] = -acc / d;
        }
        let v = &q * y;
        let peak = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        values.push(lam);
        vectors.push(v.iter().map(|z| z / peak).collect());
    }
    Ok((values, vectors))
}

/// Labels the modes of `a` by comparing with `b`, computed for the same
/// structure under a different PML stretch: a mode with a partner in `b`
/// within `rel_tol` (relative) is leaky, otherwise it is a PML mode.
pub fn classify_modes_with(a: &QnmSpectrum, b: &QnmSpectrum, rel_tol: f64) -> Result<QnmSpectrum, QnmError> {
    let same_len = a.permittivity.len() == b.permittivity.len() && a.x.len() == b.x.len();
    let same = same_len
        && a.permittivity.iter().zip(&b.permittivity).all(|(p, q)| p == q)
        && a.x.iter().zip(&b.x).all(|(p, q)| p == q);
    if !same {
        return Err(QnmError::MismatchedPhysics);
    }
    let mut out = a.clone();
    for mode in &mut out.modes {
        let best = b.modes.iter().map(|m| (m.omega - mode.omega).norm()).fold(f64::INFINITY, f64::min);
        mode.class = Some(if best <= rel_tol * mode.omega.norm() { ModeClass::Leaky } else { ModeClass::Berenger });
    }
    Ok(out)
}

/// [`classify_modes_with`] at the standard 1e-4 relative match.
pub fn classify_modes(a: &QnmSpectrum, b: &QnmSpectrum) -> Result<QnmSpectrum, QnmError> {
    classify_modes_with(a, b, 1e-4)
}
