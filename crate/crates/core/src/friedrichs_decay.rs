//! One discrete level coupled to a continuum (Friedrichs model) in natural
//! units, ħ = 1.
//!
//! The level `|e⟩` at `ω₀` couples with strength `λ(ω)` to two identical
//! continua, one per emission direction:
//!
//! ```text
//! i α' = ω₀ α + 2 ∫dω λ(ω) β(ω)
//! i β' = ω β + λ*(ω) α
//! ```
//!
//! `β` is the amplitude in one direction. The golden-rule rate is then
//! `Γ = 4π|λ(ω₀)|²` and `|α|² + 2∫|β|²dω = 1`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::integrate;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FriedrichsError {
    #[error("omega0 = {0} lies outside the coupling support")]
    NoCoupling(f64),
    #[error("principal-value integral diverges or did not converge")]
    Divergent,
    #[error("invalid coupling: {0}")]
    InvalidCoupling(&'static str),
    #[error("time step {dt:e} exceeds 0.01/max(detuning, gamma) = {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(&'static str),
    #[error("norm drifted by {drift:e} at t = {t}")]
    NormDrift { drift: f64, t: f64 },
    #[error("x = {x} is outside the light cone at t = {t}")]
    OutsideCone { x: f64, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingTag {
    Constant,
    Lorentzian,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Constant(C),
    /// `λ₀ · (w/2)/sqrt((ω − c)² + (w/2)²)`, so `|λ|²` is Lorentzian.
    Lorentzian { lambda0: C, center: f64, width: f64 },
    Tabulated { omega: Vec<f64>, lambda: Vec<C> },
}

/// Coupling `λ(ω)` on a finite support; zero outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpectrum {
    shape: Shape,
    pub support: (f64, f64),
}

impl CouplingSpectrum {
    pub fn constant(lambda: C, support: (f64, f64)) -> Result<Self, FriedrichsError> {
        Self { shape: Shape::Constant(lambda), support }.validated()
    }

    pub fn lorentzian(lambda0: C, center: f64, width: f64, support: (f64, f64)) -> Result<Self, FriedrichsError> {
        if !(width > 0.0) {
            return Err(FriedrichsError::InvalidCoupling("Lorentzian width must be positive"));
        }
        Self { shape: Shape::Lorentzian { lambda0, center, width }, support }.validated()
    }

    /// Piecewise-linear interpolation of samples on ascending `omega`.
    pub fn tabulated(omega: Vec<f64>, lambda: Vec<C>) -> Result<Self, FriedrichsError> {
        if omega.len() < 2 || omega.len() != lambda.len() {
            return Err(FriedrichsError::InvalidCoupling("need at least two matching samples"));
        }
        if omega.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FriedrichsError::InvalidCoupling("omega samples must ascend"));
        }
        let support = (omega[0], omega[omega.len() - 1]);
        Self { shape: Shape::Tabulated { omega, lambda }, support }.validated()
    }

    fn validated(self) -> Result<Self, FriedrichsError> {
        let (a, b) = self.support;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(FriedrichsError::InvalidCoupling("support must be a finite interval"));
        }
        Ok(self)
    }

    pub fn tag(&self) -> CouplingTag {
        match self.shape {
            Shape::Constant(_) => CouplingTag::Constant,
            Shape::Lorentzian { .. } => CouplingTag::Lorentzian,
            Shape::Tabulated { .. } => CouplingTag::Tabulated,
        }
    }

    pub fn lambda(&self, omega: f64) -> C {
        if omega < self.support.0 || omega > self.support.1 {
            return C::new(0.0, 0.0);
        }
        match &self.shape {
            Shape::Constant(l) => *l,
            Shape::Lorentzian { lambda0, center, width } => {
                let hw = 0.5 * width;
                *lambda0 * (hw / ((omega - center).powi(2) + hw * hw).sqrt())
            }
            Shape::Tabulated { omega: xs, lambda } => {
                let j = xs.partition_point(|&x| x <= omega).clamp(1, xs.len() - 1);
                let f = (omega - xs[j - 1]) / (xs[j] - xs[j - 1]);
                lambda[j - 1] * (1.0 - f) + lambda[j] * f
            }
        }
    }

    /// Same spectrum with every value multiplied by `e^{iθ}`.
    pub fn rotated(&self, theta: f64) -> Self {
        let ph = C::from_polar(1.0, theta);
        let shape = match &self.shape {
            Shape::Constant(l) => Shape::Constant(*l * ph),
            Shape::Lorentzian { lambda0, center, width } => {
                Shape::Lorentzian { lambda0: *lambda0 * ph, center: *center, width: *width }
            }
            Shape::Tabulated { omega, lambda } => {
                Shape::Tabulated { omega: omega.clone(), lambda: lambda.iter().map(|l| l * ph).collect() }
            }
        };
        Self { shape, support: self.support }
    }
}

/// `Γ = 4π|λ(ω₀)|²`.
pub fn decay_rate(coupling: &CouplingSpectrum, omega0: f64) -> Result<f64, FriedrichsError> {
    if omega0 < coupling.support.0 || omega0 > coupling.support.1 {
        return Err(FriedrichsError::NoCoupling(omega0));
    }
    Ok(4.0 * PI * coupling.lambda(omega0).norm_sqr())
}

/// `ω_LS = −2 vp∫ |λ(ω)|²/(ω − ω₀) dω` over the support.
///
/// The symmetric part `[ω₀ − δ, ω₀ + δ]` is folded into the regular
/// integrand `(|λ(ω₀+u)|² − |λ(ω₀−u)|²)/u`; the remainder of the support
/// is integrated directly.
pub fn lamb_shift(coupling: &CouplingSpectrum, omega0: f64) -> Result<f64, FriedrichsError> {
    let (a, b) = coupling.support;
    if !(omega0 > a && omega0 < b) {
        return Err(FriedrichsError::NoCoupling(omega0));
    }
    let l2 = |w: f64| coupling.lambda(w).norm_sqr();
    let scale = l2(omega0).max(1e-300) * (b - a);
    let delta = (omega0 - a).min(b - omega0);
    let sym = integrate(|u| if u == 0.0 { 0.0 } else { (l2(omega0 + u) - l2(omega0 - u)) / u }, 0.0, delta, 1e-10, 1e-14 * scale);
    let (lo, hi) = if omega0 - a > b - omega0 { (a, omega0 - delta) } else { (omega0 + delta, b) };
    let rest = integrate(|w| l2(w) / (w - omega0), lo, hi, 1e-10, 1e-14 * scale);
    let total = sym.value + rest.value;
    if !(sym.converged && rest.converged && total.is_finite()) {
        return Err(FriedrichsError::Divergent);
    }
    Ok(-2.0 * total)
}

/// Dispersion of the emitted field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassKind {
    /// `ω = c k`.
    Massless { c: f64 },
    /// `ω ≈ ω₀ + v (k − k₀)` with `v = ħk₀/m`.
    Massive { v_db: f64, k0: f64 },
}

impl MassKind {
    pub fn speed(&self) -> f64 {
        match *self {
            MassKind::Massless { c } => c,
            MassKind::Massive { v_db, .. } => v_db,
        }
    }

    /// Wavenumber of the mode at frequency `omega` for a level at `omega0`.
    pub fn wavenumber(&self, omega: f64, omega0: f64) -> f64 {
        match *self {
            MassKind::Massless { c } => omega / c,
            MassKind::Massive { v_db, k0 } => k0 + (omega - omega0) / v_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedrichsSystem {
    pub omega0: f64,
    pub coupling: CouplingSpectrum,
    pub gamma: f64,
    pub lamb_shift: f64,
    pub mass_kind: MassKind,
}

impl FriedrichsSystem {
    pub fn new(omega0: f64, coupling: CouplingSpectrum, mass_kind: MassKind) -> Result<Self, FriedrichsError> {
        if !(mass_kind.speed() > 0.0) {
            return Err(FriedrichsError::InvalidCoupling("front speed must be positive"));
        }
        let gamma = decay_rate(&coupling, omega0)?;
        let ls = lamb_shift(&coupling, omega0)?;
        Ok(Self { omega0, coupling, gamma, lamb_shift: ls, mass_kind })
    }

    /// `|λ(ω₀)|²/ω₀`; the weak-coupling regime wants this below 1e-2.
    pub fn weak_coupling_ratio(&self) -> f64 {
        self.coupling.lambda(self.omega0).norm_sqr() / self.omega0
    }

    /// Shifted frequency `ω₀ + ω_LS`.
    pub fn dressed_frequency(&self) -> f64 {
        self.omega0 + self.lamb_shift
    }

    /// `Λ = Γ + 2iω_LS`.
    pub fn complex_rate(&self) -> C {
        C::new(self.gamma, 2.0 * self.lamb_shift)
    }

    /// Wigner–Weisskopf survival amplitude.
    pub fn alpha(&self, t: f64) -> C {
        C::from_polar((-0.5 * self.gamma * t).exp(), -self.dressed_frequency() * t)
    }

    /// Wigner–Weisskopf continuum amplitude (one direction).
    pub fn beta(&self, omega: f64, t: f64) -> C {
        let w = self.dressed_frequency();
        let num = C::from_polar(1.0, -omega * t) - self.alpha(t);
        self.coupling.lambda(omega).conj() * num / C::new(omega - w, 0.5 * self.gamma)
    }

    /// `|β(ω, ∞)|²`, a Lorentzian of FWHM Γ at `ω₀ + ω_LS`.
    pub fn emitted_spectrum(&self, omega: f64) -> f64 {
        let d = omega - self.dressed_frequency();
        self.coupling.lambda(omega).norm_sqr() / (d * d + 0.25 * self.gamma * self.gamma)
    }
}

/// Uniform frequency mesh `[ω₀ − half_width, ω₀ + half_width]`.
pub fn omega_mesh(omega0: f64, half_width: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|j| omega0 - half_width + 2.0 * half_width * j as f64 / (n - 1) as f64).collect()
}

/// Default mesh: `ω₀ ± 50Γ` at 20 points per Γ.
pub fn default_mesh(system: &FriedrichsSystem) -> Vec<f64> {
    omega_mesh(system.omega0, 50.0 * system.gamma, 2001)
}

fn trapezoid_weights(mesh: &[f64]) -> Vec<f64> {
    let n = mesh.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { mesh[j] - mesh[j - 1] } else { 0.0 };
            let right = if j + 1 < n { mesh[j + 1] - mesh[j] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `α(t)` on `times` and `β(ω, t)` on `omega_mesh × beta_times`.
///
/// The mesh is in frequency; the wavenumber of each mode follows from
/// [`MassKind::wavenumber`].
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub alpha: Vec<C>,
    pub beta_times: Vec<f64>,
    /// `beta[i][j]` is `β(omega_mesh[j], beta_times[i])`.
    pub beta: Vec<Vec<C>>,
    pub omega_mesh: Vec<f64>,
}

impl AmplitudeTrajectory {
    /// `|α|² + 2∫|β|²dω` at snapshot `i` of `beta_times`, taking α at the
    /// matching time.
    pub fn norm_at_snapshot(&self, i: usize) -> f64 {
        let t = self.beta_times[i];
        let idx = self.times.iter().position(|&s| s == t).unwrap_or_else(|| {
            self.times
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
                .map_or(0, |(j, _)| j)
        });
        let w = trapezoid_weights(&self.omega_mesh);
        let cont: f64 = self.beta[i].iter().zip(&w).map(|(b, w)| b.norm_sqr() * w).sum();
        self.alpha[idx].norm_sqr() + 2.0 * cont
    }

    pub fn survival(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Closed-form Wigner–Weisskopf amplitudes.
pub fn closed_form_amplitudes(system: &FriedrichsSystem, times: &[f64], omega_mesh: &[f64]) -> AmplitudeTrajectory {
    AmplitudeTrajectory {
        times: times.to_vec(),
        alpha: times.iter().map(|&t| system.alpha(t)).collect(),
        beta_times: times.to_vec(),
        beta: times.iter().map(|&t| omega_mesh.iter().map(|&w| system.beta(w, t)).collect()).collect(),
        omega_mesh: omega_mesh.to_vec(),
    }
}

/// Direct integration of the amplitude equations with the continuum
/// eliminated:
///
/// ```text
/// a'(t) = −2 Σ_j |λ_j|² Δω_j ∫₀ᵗ e^{−iΔ_j(t−s)} a(s) ds
/// ```
///
/// in the frame rotating at `ω₀` (`Δ_j = ω_j − ω₀`). The memory integral is
/// the trapezoid rule over the stored history, kept per mode as a running
/// sum with the exact phase factor, and the update for `a` is the implicit
/// trapezoid rule. `α` is recorded every `record_every` steps and `β` at
/// `beta_snapshots` evenly spaced times (including 0 and the end).
pub fn integrate_amplitudes(
    system: &FriedrichsSystem,
    t_max: f64,
    dt: f64,
    omega_mesh: &[f64],
    record_every: usize,
    beta_snapshots: usize,
) -> Result<AmplitudeTrajectory, FriedrichsError> {
    let n = omega_mesh.len();
    if n < 2 || omega_mesh.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FriedrichsError::MeshTooCoarse("mesh must ascend with at least two points"));
    }
    let g = system.gamma;
    let w0 = system.omega0;
    let lo = omega_mesh[0];
    let hi = omega_mesh[n - 1];
    if lo > w0 - 50.0 * g || hi < w0 + 50.0 * g {
        return Err(FriedrichsError::MeshTooCoarse("mesh must span omega0 +/- 50 gamma"));
    }
    let max_spacing = omega_mesh.windows(2).fold(0.0f64, |m, w| m.max(w[1] - w[0]));
    if max_spacing > g / 20.0 * (1.0 + 1e-9) {
        return Err(FriedrichsError::MeshTooCoarse("need at least 20 points per gamma"));
    }
    let max_detuning = (w0 - lo).max(hi - w0);
    let limit = 0.01 / max_detuning.max(g);
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(FriedrichsError::StepTooLarge { dt, limit });
    }

    let weights = trapezoid_weights(omega_mesh);
    let lambdas: Vec<C> = omega_mesh.iter().map(|&w| system.coupling.lambda(w)).collect();
    let c: Vec<f64> = lambdas.iter().zip(&weights).map(|(l, w)| 2.0 * l.norm_sqr() * w).collect();
    let s_total: f64 = c.iter().sum();
    let phase: Vec<C> = omega_mesh.iter().map(|&w| C::from_polar(1.0, -(w - w0) * dt)).collect();

    let steps = (t_max / dt).ceil() as usize;
    let record_every = record_every.max(1);
    let snaps = beta_snapshots.max(2);
    let snap_steps: Vec<usize> = (0..snaps).map(|i| i * steps / (snaps - 1)).collect();

    // p_j = e_j (h_j(t_n) + dt/2 a_n) − the part of h_j(t_{n+1}) known before a_{n+1}
    let mut p = alloc::vec![C::new(0.0, 0.0); n];
    let mut h = alloc::vec![C::new(0.0, 0.0); n];
    let mut a = C::new(1.0, 0.0);
    let mut da = C::new(0.0, 0.0);
    let half = 0.5 * dt;
    let denom = 1.0 + half * half * s_total;

    let mut out = AmplitudeTrajectory {
        times: Vec::with_capacity(steps / record_every + 2),
        alpha: Vec::with_capacity(steps / record_every + 2),
        beta_times: Vec::with_capacity(snaps),
        beta: Vec::with_capacity(snaps),
        omega_mesh: omega_mesh.to_vec(),
    };
    let mut next_snap = 0;
    let snapshot = |out: &mut AmplitudeTrajectory, h: &[C], a: C, t: f64| -> Result<(), FriedrichsError> {
        let rot = C::from_polar(1.0, -w0 * t);
        let beta: Vec<C> = h.iter().zip(&lambdas).map(|(h, l)| C::new(0.0, -1.0) * l.conj() * h * rot).collect();
        let cont: f64 = beta.iter().zip(&weights).map(|(b, w)| b.norm_sqr() * w).sum();
        let drift = (a.norm_sqr() + 2.0 * cont - 1.0).abs();
        out.beta_times.push(t);
        out.beta.push(beta);
        if drift > 1e-3 {
            return Err(FriedrichsError::NormDrift { drift, t });
        }
        Ok(())
    };

    for step in 0..=steps {
        let t = step as f64 * dt;
        if step % record_every == 0 || step == steps {
            out.times.push(t);
            out.alpha.push(a * C::from_polar(1.0, -w0 * t));
        }
        if next_snap < snaps && snap_steps[next_snap] == step {
            // h_j(t_n) = p_j + dt/2 a_n for n > 0
            if step > 0 {
                for (hj, pj) in h.iter_mut().zip(&p) {
                    *hj = pj + half * a;
                }
            }
            snapshot(&mut out, &h, a, t)?;
            next_snap += 1;
        }
        if step == steps {
            break;
        }
        // history update for [t_n, t_{n+1}] and its contribution to a'
        let carry = if step == 0 { half * a } else { dt * a };
        let mut acc = C::new(0.0, 0.0);
        for ((pj, ej), cj) in p.iter_mut().zip(&phase).zip(&c) {
            *pj = ej * (*pj + carry);
            acc += *pj * *cj;
        }
        let a_next = (a + half * da - half * acc) / denom;
        da = -(acc + half * s_total * a_next);
        a = a_next;
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(FriedrichsError::NormDrift { drift: f64::INFINITY, t });
        }
    }
    Ok(out)
}

/// Closed-form outgoing field at `(x, t)`; zero outside the cone `|x| ≤ vt`.
///
/// Inside the cone the magnitude is `√(2π/v)|λ(ω̃₀)| e^{(Γ/2v)(|x| − vt)}`
/// with phase `e^{iω̃₀(|x| − vt)/v}` (plus the carrier `e^{i(k₀−ω₀/v)|x|}`
/// for the linearized massive dispersion).
pub fn outgoing_wavefunction(system: &FriedrichsSystem, x: f64, t: f64) -> C {
    let v = system.mass_kind.speed();
    let ax = x.abs();
    if t <= 0.0 || ax > v * t {
        return C::new(0.0, 0.0);
    }
    let w = system.dressed_frequency();
    let u = ax - v * t;
    let carrier = match system.mass_kind {
        MassKind::Massless { .. } => 0.0,
        MassKind::Massive { v_db, k0 } => (k0 - system.omega0 / v_db) * ax,
    };
    let lam = system.coupling.lambda(w).conj();
    C::new(0.0, -(2.0 * PI / v).sqrt())
        * lam
        * C::from_polar((0.5 * system.gamma / v * u).exp(), w * u / v + carrier)
}

/// Bohmian velocity of the outgoing field: `±v` inside the cone.
pub fn bohmian_outgoing_velocity(system: &FriedrichsSystem, x: f64, t: f64) -> Result<f64, FriedrichsError> {
    let v = system.mass_kind.speed();
    if x == 0.0 || x.abs() > v * t || outgoing_wavefunction(system, x, t).norm() == 0.0 {
        return Err(FriedrichsError::OutsideCone { x, t });
    }
    Ok(v.copysign(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(l: f64) -> CouplingSpectrum {
        CouplingSpectrum::constant(C::new(l, 0.0), (0.0, 2.0)).unwrap()
    }

    #[test]
    fn golden_rule_rate() {
        assert_eq!(decay_rate(&constant(0.0), 1.0).unwrap(), 0.0);
        let g = decay_rate(&constant(0.01), 1.0).unwrap();
        assert!((g - 4.0 * PI * 1e-4).abs() < 1e-15);
        assert!((g - 1.2566e-3).abs() < 1e-7);
        let g2 = decay_rate(&constant(0.02), 1.0).unwrap();
        assert!((g2 / g - 4.0).abs() < 1e-12);
        assert!(matches!(decay_rate(&constant(0.01), 3.0), Err(FriedrichsError::NoCoupling(_))));
    }

    #[test]
    fn lamb_shift_cases() {
        // symmetric support: odd integrand
        let s = lamb_shift(&constant(0.1), 1.0).unwrap();
        assert!(s.abs() < 1e-12);
        // [ω₀ − W, ω₀ + 2W]: −2|λ|² ln 2
        let c = CouplingSpectrum::constant(C::new(0.1, 0.0), (0.5, 2.0)).unwrap();
        let s = lamb_shift(&c, 1.0).unwrap();
        assert!((s + 2.0 * 0.01 * 2f64.ln()).abs() < 1e-6 * 0.01, "{s}");
        // support above ω₀ only contributes negative shift
        let c = CouplingSpectrum::constant(C::new(0.1, 0.0), (0.99, 3.0)).unwrap();
        assert!(lamb_shift(&c, 1.0).unwrap() < 0.0);
    }

    #[test]
    fn phase_invariance() {
        let c = CouplingSpectrum::lorentzian(C::new(0.03, 0.01), 1.2, 0.5, (0.0, 3.0)).unwrap();
        let a = FriedrichsSystem::new(1.0, c.clone(), MassKind::Massless { c: 1.0 }).unwrap();
        let b = FriedrichsSystem::new(1.0, c.rotated(0.7), MassKind::Massless { c: 1.0 }).unwrap();
        assert!((a.gamma - b.gamma).abs() < 1e-15);
        assert!((a.lamb_shift - b.lamb_shift).abs() < 1e-12);
    }

    #[test]
    fn closed_form_start_and_decay() {
        let sys = FriedrichsSystem::new(1.0, constant(0.005), MassKind::Massless { c: 1.0 }).unwrap();
        let mesh = default_mesh(&sys);
        let tr = closed_form_amplitudes(&sys, &[0.0, 10.0, 100.0], &mesh);
        assert_eq!(tr.alpha[0], C::new(1.0, 0.0));
        assert!(tr.beta[0].iter().all(|b| b.norm() == 0.0));
        for (t, a) in tr.times.iter().zip(&tr.alpha) {
            assert!((a.norm_sqr() - (-sys.gamma * t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn light_cone_support() {
        let sys = FriedrichsSystem::new(1.0, constant(0.005), MassKind::Massless { c: 2.0 }).unwrap();
        let t = 30.0;
        assert_eq!(outgoing_wavefunction(&sys, 2.0 * 2.0 * t, t), C::new(0.0, 0.0));
        let (x1, x2) = (10.0, 40.0);
        let r = outgoing_wavefunction(&sys, x2, t).norm() / outgoing_wavefunction(&sys, x1, t).norm();
        let expect = (sys.gamma / (2.0 * 2.0) * (x2 - x1)).exp();
        assert!((r - expect).abs() < 1e-12);
        assert_eq!(bohmian_outgoing_velocity(&sys, 5.0, t).unwrap(), 2.0);
        assert_eq!(bohmian_outgoing_velocity(&sys, -5.0, t).unwrap(), -2.0);
        assert!(bohmian_outgoing_velocity(&sys, 500.0, t).is_err());
    }

    #[test]
    fn integrator_preconditions() {
        let sys = FriedrichsSystem::new(1.0, constant(0.005), MassKind::Massless { c: 1.0 }).unwrap();
        let narrow = omega_mesh(1.0, 10.0 * sys.gamma, 400);
        assert!(matches!(
            integrate_amplitudes(&sys, 1.0, 1e-3, &narrow, 1, 2),
            Err(FriedrichsError::MeshTooCoarse(_))
        ));
        let mesh = default_mesh(&sys);
        assert!(matches!(
            integrate_amplitudes(&sys, 1.0, 10.0, &mesh, 1, 2),
            Err(FriedrichsError::StepTooLarge { .. })
        ));
    }
}
