//! Single cavity mode leaking into the outside world: photon-count
//! statistics, coherent-state factorization, the zero-temperature Lindblad
//! equation on a truncated Fock space, and a two-arm beam splitter acting on
//! first-quantized bosons. Natural units, ħ = 1.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::friedrichs_decay::FriedrichsSystem;

type C = Complex64;

/// Default Fock truncation.
pub const DEFAULT_N_MAX: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CavityError {
    #[error("trace is {0}, expected 1")]
    Trace(f64),
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("population {population:e} above 0.9 n_max = {n_max}; raise n_max")]
    Truncation { population: f64, n_max: usize },
    #[error("density matrix must be square with n_max >= 1")]
    Shape,
    #[error("time step {dt:e} exceeds {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("positivity lost (eigenvalue {min_eig:e}) at t = {t}; reduce dt")]
    PositivityLost { min_eig: f64, t: f64 },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
}

/// `ln n!` by summation; exact enough for the small counts used here.
fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn binomial(n: usize, j: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j)).exp().round()
}

/// `P(j) = C(n,j) s^j (1−s)^{n−j}` for `j = 0..=n`: how many of `n` photons
/// remain inside when each survives with probability `s = |α|²`.
pub fn binomial_counts(n: usize, survival: f64) -> Result<Vec<f64>, CavityError> {
    if !(0.0..=1.0).contains(&survival) {
        return Err(CavityError::InvalidProbability(survival));
    }
    let leak = 1.0 - survival;
    Ok((0..=n).map(|j| binomial(n, j) * survival.powi(j as i32) * leak.powi((n - j) as i32)).collect())
}

/// Coherent-state coefficients `e^{−|ξ|²/2} ξⁿ/√n!` for `n = 0..=n_max`.
pub fn coherent_amplitudes(xi: C, n_max: usize) -> DVector<C> {
    let mut v = DVector::from_element(n_max + 1, C::new(0.0, 0.0));
    let mut c = C::new((-0.5 * xi.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        v[n] = c;
        c = c * xi / ((n + 1) as f64).sqrt();
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    pub n_max: usize,
    pub rho: DMatrix<C>,
    pub omega: f64,
    pub gamma: f64,
}

impl FockDensityMatrix {
    /// Validated density matrix; see [`FockDensityMatrix::check`].
    pub fn new(rho: DMatrix<C>, omega: f64, gamma: f64) -> Result<Self, CavityError> {
        if !rho.is_square() || rho.nrows() < 2 {
            return Err(CavityError::Shape);
        }
        let s = Self { n_max: rho.nrows() - 1, rho, omega, gamma };
        s.check()?;
        Ok(s)
    }

    pub fn fock(n: usize, n_max: usize, omega: f64, gamma: f64) -> Result<Self, CavityError> {
        let mut rho = DMatrix::from_element(n_max + 1, n_max + 1, C::new(0.0, 0.0));
        if n > n_max {
            return Err(CavityError::Truncation { population: 1.0, n_max });
        }
        rho[(n, n)] = C::new(1.0, 0.0);
        Self::new(rho, omega, gamma)
    }

    pub fn pure(psi: &DVector<C>, omega: f64, gamma: f64) -> Result<Self, CavityError> {
        Self::new(psi * psi.adjoint(), omega, gamma)
    }

    /// Truncated and renormalized `|ξ⟩⟨ξ|`.
    pub fn coherent(xi: C, n_max: usize, omega: f64, gamma: f64) -> Result<Self, CavityError> {
        let psi = coherent_amplitudes(xi, n_max);
        Self::pure(&psi.normalize(), omega, gamma)
    }

    /// Checks trace, Hermiticity, positivity and the truncation guard.
    pub fn check(&self) -> Result<(), CavityError> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(CavityError::Trace(tr));
        }
        let herm = hermitian_deviation(&self.rho);
        if herm > 1e-12 {
            return Err(CavityError::NotHermitian(herm));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(CavityError::NotPositive(min));
        }
        let tail = self.tail_population();
        if tail > 1e-6 {
            return Err(CavityError::Truncation { population: tail, n_max: self.n_max });
        }
        Ok(())
    }

    pub fn trace(&self) -> f64 {
        self.rho.diagonal().iter().map(|z| z.re).sum()
    }

    /// Population of levels above `0.9·n_max`.
    pub fn tail_population(&self) -> f64 {
        let start = (0.9 * self.n_max as f64).floor() as usize + 1;
        (start..=self.n_max).map(|n| self.rho[(n, n)].re).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn mean_n(&self) -> f64 {
        self.rho.diagonal().iter().enumerate().map(|(n, z)| n as f64 * z.re).sum()
    }

    /// `⟨â⟩ = Σ √(n+1) ρ_{n+1,n}`.
    pub fn mean_a(&self) -> C {
        (0..self.n_max).map(|n| self.rho[(n + 1, n)] * ((n + 1) as f64).sqrt()).sum()
    }

    /// `⟨x⟩` with `x = (â + â†)/√2`.
    pub fn mean_x(&self) -> f64 {
        core::f64::consts::SQRT_2 * self.mean_a().re
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    pub fn entropy(&self) -> f64 {
        von_neumann(&self.eigenvalues())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &DVector<C>) -> f64 {
        (psi.adjoint() * &self.rho * psi)[(0, 0)].re
    }
}

fn hermitian_deviation(m: &DMatrix<C>) -> f64 {
    let d = m - m.adjoint();
    d.iter().fold(0.0, |a: f64, z| a.max(z.norm()))
}

fn hermitian_eigenvalues(m: &DMatrix<C>) -> Vec<f64> {
    // symmetrize so rounding noise does not leak into the solver
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

fn von_neumann(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&p| p > 1e-300).map(|&p| -p * p.ln()).sum()
}

/// `dρ/dt = −i[ωâ†â, ρ] + (Γ/2)(2âρâ† − â†âρ − ρâ†â)`, elementwise:
/// `−iω(m−n)ρ_mn + Γ(√((m+1)(n+1)) ρ_{m+1,n+1} − ½(m+n) ρ_mn)`.
pub fn lindblad_rhs(rho: &FockDensityMatrix) -> DMatrix<C> {
    rhs(&rho.rho, rho.omega, rho.gamma)
}

fn rhs(rho: &DMatrix<C>, omega: f64, gamma: f64) -> DMatrix<C> {
    let d = rho.nrows();
    DMatrix::from_fn(d, d, |m, n| {
        let (mf, nf) = (m as f64, n as f64);
        let mut v = rho[(m, n)] * C::new(-0.5 * gamma * (mf + nf), -omega * (mf - nf));
        if m + 1 < d && n + 1 < d {
            v += rho[(m + 1, n + 1)] * (gamma * ((mf + 1.0) * (nf + 1.0)).sqrt());
        }
        v
    })
}

/// Largest admissible step `0.01/max(ω, Γ, n_max·Γ)`.
pub fn lindblad_step_limit(rho: &FockDensityMatrix) -> f64 {
    0.01 / rho.omega.abs().max(rho.gamma).max(rho.n_max as f64 * rho.gamma)
}

/// Fixed-step RK4 from 0 to `t`; the last step is shortened to land on `t`.
/// Positivity is checked at the end and never enforced.
pub fn integrate_lindblad(rho0: &FockDensityMatrix, t: f64, dt: f64) -> Result<FockDensityMatrix, CavityError> {
    integrate_lindblad_observed(rho0, t, dt, 0, |_, _| {})
}

/// As [`integrate_lindblad`], calling `observe(t, ρ)` at `t = 0`, every
/// `every` steps (if nonzero) and at the end.
pub fn integrate_lindblad_observed<F>(
    rho0: &FockDensityMatrix,
    t: f64,
    dt: f64,
    every: usize,
    mut observe: F,
) -> Result<FockDensityMatrix, CavityError>
where
    F: FnMut(f64, &FockDensityMatrix),
{
    let limit = lindblad_step_limit(rho0);
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(CavityError::StepTooLarge { dt, limit });
    }
    let (w, g) = (rho0.omega, rho0.gamma);
    let mut state = rho0.clone();
    let steps = (t / dt).ceil().max(0.0) as usize;
    observe(0.0, &state);
    let mut now = 0.0;
    for s in 0..steps {
        let h = if s + 1 == steps { t - now } else { dt };
        let r = &state.rho;
        let k1 = rhs(r, w, g);
        let k2 = rhs(&(r + &k1 * C::new(0.5 * h, 0.0)), w, g);
        let k3 = rhs(&(r + &k2 * C::new(0.5 * h, 0.0)), w, g);
        let k4 = rhs(&(r + &k3 * C::new(h, 0.0)), w, g);
        state.rho = r + (k1 + (k2 + k3) * C::new(2.0, 0.0) + k4) * C::new(h / 6.0, 0.0);
        now = if s + 1 == steps { t } else { now + h };
        if every > 0 && (s + 1) % every == 0 && s + 1 != steps {
            observe(now, &state);
        }
    }
    let min_eig = state.min_eigenvalue();
    if min_eig < -1e-8 {
        return Err(CavityError::PositivityLost { min_eig, t: now });
    }
    if steps > 0 {
        observe(now, &state);
    }
    Ok(state)
}

/// Pure state of (inside, outside) photon counts, `coeffs[(j, m)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePureState {
    pub coeffs: DMatrix<C>,
    /// Fixed total photon number, when the state has one.
    pub n_total: Option<usize>,
}

impl BipartitePureState {
    pub fn new(coeffs: DMatrix<C>, n_total: Option<usize>) -> Result<Self, CavityError> {
        let norm = coeffs.norm_squared();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(CavityError::NotNormalized(norm));
        }
        Ok(Self { coeffs, n_total })
    }

    /// `|n⟩` after partial leakage: `c_{j,n−j} = √C(n,j) αʲ βⁿ⁻ʲ`.
    pub fn from_fock(n: usize, alpha: C, beta: C) -> Result<Self, CavityError> {
        let mut c = DMatrix::from_element(n + 1, n + 1, C::new(0.0, 0.0));
        for j in 0..=n {
            c[(j, n - j)] = alpha.powi(j as i32) * beta.powi((n - j) as i32) * binomial(n, j).sqrt();
        }
        Self::new(c, Some(n))
    }

    /// `|ξ_in⟩ ⊗ |ξ_out⟩` truncated at `n_max` on each side.
    pub fn coherent_product(xi_in: C, xi_out: C, n_max: usize) -> Self {
        let a = coherent_amplitudes(xi_in, n_max);
        let b = coherent_amplitudes(xi_out, n_max);
        let mut coeffs = &a * b.transpose();
        // renormalize the truncated tails
        let norm = coeffs.norm();
        coeffs /= C::new(norm, 0.0);
        Self { coeffs, n_total: None }
    }

    /// `ρ_in = C C†`.
    pub fn reduced_interior(&self) -> DMatrix<C> {
        &self.coeffs * self.coeffs.adjoint()
    }

    pub fn interior_purity(&self) -> f64 {
        let r = self.reduced_interior();
        (&r * &r).trace().re
    }

    pub fn mean_inside(&self) -> f64 {
        self.reduced_interior().diagonal().iter().enumerate().map(|(n, z)| n as f64 * z.re).sum()
    }
}

/// Von Neumann entropy (nats) of the interior reduced state.
pub fn entanglement_entropy(state: &BipartitePureState) -> f64 {
    von_neumann(&hermitian_eigenvalues(&state.reduced_interior()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentEvolution {
    pub xi_in: C,
    pub xi_out: C,
    pub state: BipartitePureState,
}

/// Coherent input `|ξ⟩` after time `t`: `ξ_in = ξα(t)`, `ξ_out = ξβ(t)`.
///
/// `β(t)` is taken real and non-negative, `√(1 − |α|²)`; its phase belongs
/// to the outgoing wavepacket, not to the count statistics.
pub fn evolve_coherent(xi: C, t: f64, system: &FriedrichsSystem, n_max: usize) -> Result<CoherentEvolution, CavityError> {
    if xi.norm_sqr() > 0.5 * n_max as f64 {
        return Err(CavityError::Truncation { population: xi.norm_sqr(), n_max });
    }
    let alpha = system.alpha(t);
    let beta = C::new((1.0 - alpha.norm_sqr()).max(0.0).sqrt(), 0.0);
    let (xi_in, xi_out) = (xi * alpha, xi * beta);
    Ok(CoherentEvolution { xi_in, xi_out, state: BipartitePureState::coherent_product(xi_in, xi_out, n_max) })
}

/// First-quantized bosons, each in arm A (bit 0) or B (bit 1).
/// `amps[c]` is the amplitude of configuration `c`, whose bit `i` gives the
/// arm of particle `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub n_particles: usize,
    pub amps: Vec<C>,
}

impl ArmState {
    pub fn new(n_particles: usize, amps: Vec<C>) -> Result<Self, CavityError> {
        if n_particles == 0 || n_particles > 8 || amps.len() != 1 << n_particles {
            return Err(CavityError::Shape);
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(CavityError::NotNormalized(norm));
        }
        Ok(Self { n_particles, amps })
    }

    pub fn single(arm_b: bool) -> Self {
        let mut amps = alloc::vec![C::new(0.0, 0.0); 2];
        amps[arm_b as usize] = C::new(1.0, 0.0);
        Self { n_particles: 1, amps }
    }

    /// `(|A,B⟩ + |B,A⟩)/√2`: one boson in each arm.
    pub fn one_each() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Self { n_particles: 2, amps: alloc::vec![C::new(0.0, 0.0), C::new(h, 0.0), C::new(h, 0.0), C::new(0.0, 0.0)] }
    }

    /// Probability of finding `k` particles in arm A, `k = 0..=n`.
    pub fn arm_a_counts(&self) -> Vec<f64> {
        let n = self.n_particles;
        let mut p = alloc::vec![0.0; n + 1];
        for (c, a) in self.amps.iter().enumerate() {
            p[n - (c as u32).count_ones() as usize] += a.norm_sqr();
        }
        p
    }

    /// Probability that the two arms both fire (two particles only).
    pub fn coincidence(&self) -> f64 {
        let p = self.arm_a_counts();
        1.0 - p[0] - p[self.n_particles]
    }

    /// Entropy of particle 0 against the rest.
    pub fn label_entropy(&self) -> f64 {
        let rest = 1usize << (self.n_particles - 1);
        let m = DMatrix::from_fn(2, rest, |bit, r| self.amps[(r << 1) | bit]);
        von_neumann(&hermitian_eigenvalues(&(&m * m.adjoint())))
    }

    fn symmetrized(&self) -> Vec<C> {
        let n = self.n_particles;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut out = alloc::vec![C::new(0.0, 0.0); self.amps.len()];
        let mut count = 0usize;
        loop {
            for (c, o) in out.iter_mut().enumerate() {
                let pc = perm.iter().enumerate().fold(0usize, |acc, (i, &p)| acc | (((c >> p) & 1) << i));
                *o += self.amps[pc];
            }
            count += 1;
            if !next_permutation(&mut perm) {
                break;
            }
        }
        out.iter_mut().for_each(|o| *o /= count as f64);
        out
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap_or(i);
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Balanced splitter `A → (A + B)/√2`, `B → (A − B)/√2` on every particle,
/// followed by symmetrization over particle labels.
pub fn beamsplitter_map(state: &ArmState) -> Result<ArmState, CavityError> {
    let norm: f64 = state.amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(CavityError::NotNormalized(norm));
    }
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let mut amps = state.amps.clone();
    for i in 0..state.n_particles {
        let bit = 1usize << i;
        for c in 0..amps.len() {
            if c & bit == 0 {
                let (a, b) = (amps[c], amps[c | bit]);
                amps[c] = (a + b) * h;
                amps[c | bit] = (a - b) * h;
            }
        }
    }
    let out = ArmState { n_particles: state.n_particles, amps };
    Ok(ArmState { n_particles: out.n_particles, amps: out.symmetrized() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_edges() {
        let p = binomial_counts(5, 1.0).unwrap();
        assert_eq!(p[5], 1.0);
        assert!(p[..5].iter().all(|&x| x == 0.0));
        let p = binomial_counts(1, 0.3).unwrap();
        assert!((p[1] - 0.3).abs() < 1e-15 && (p[0] - 0.7).abs() < 1e-15);
        let s: f64 = binomial_counts(7, 0.3).unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!(binomial_counts(3, 1.5).is_err());
    }

    #[test]
    fn vacuum_is_fixed() {
        let r = FockDensityMatrix::fock(0, 6, 1.0, 0.1).unwrap();
        assert!(lindblad_rhs(&r).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn fock_one_decays() {
        let g = 0.1;
        let r = FockDensityMatrix::fock(1, 4, 1.0, g).unwrap();
        let dt = lindblad_step_limit(&r);
        let t = 7.0;
        let out = integrate_lindblad(&r, t, dt).unwrap();
        let p = out.populations();
        assert!((p[1] - (-g * t).exp()).abs() < 1e-6);
        assert!((p[0] - 1.0 + (-g * t).exp()).abs() < 1e-6);
    }

    #[test]
    fn step_limit_enforced() {
        let r = FockDensityMatrix::fock(1, 4, 1.0, 0.1).unwrap();
        assert!(matches!(integrate_lindblad(&r, 1.0, 0.1), Err(CavityError::StepTooLarge { .. })));
    }

    #[test]
    fn invariants_rejected() {
        let mut m = DMatrix::from_element(3, 3, C::new(0.0, 0.0));
        m[(0, 0)] = C::new(0.5, 0.0);
        assert!(matches!(FockDensityMatrix::new(m.clone(), 1.0, 0.1), Err(CavityError::Trace(_))));
        m[(1, 1)] = C::new(0.5, 0.0);
        m[(0, 1)] = C::new(0.0, 0.1);
        assert!(matches!(FockDensityMatrix::new(m, 1.0, 0.1), Err(CavityError::NotHermitian(_))));
        let big = FockDensityMatrix::coherent(C::new(3.0, 0.0), 10, 1.0, 0.1);
        assert!(matches!(big, Err(CavityError::Truncation { .. })));
    }

    #[test]
    fn single_photon_entropy() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let s = BipartitePureState::from_fock(1, C::new(h, 0.0), C::new(0.0, h)).unwrap();
        assert!((entanglement_entropy(&s) - 2f64.ln()).abs() < 1e-12);
        for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
            let s = BipartitePureState::from_fock(1, C::new(a, 0.0), C::new(b, 0.0)).unwrap();
            assert!(entanglement_entropy(&s).abs() < 1e-12);
        }
    }

    #[test]
    fn hong_ou_mandel() {
        let out = beamsplitter_map(&ArmState::one_each()).unwrap();
        assert!(out.coincidence().abs() < 1e-15);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amps[0] - C::new(h, 0.0)).norm() < 1e-15);
        assert!((out.amps[3] + C::new(h, 0.0)).norm() < 1e-15);
        assert!((out.label_entropy() - ArmState::one_each().label_entropy()).abs() < 1e-12);

        let split = beamsplitter_map(&ArmState::single(false)).unwrap();
        let p = split.arm_a_counts();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn permutations_enumerated() {
        let mut p = [0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut p) {
            n += 1;
        }
        assert_eq!(n, 6);
    }
}
