//! Siegert poles of piecewise-constant potentials.
//!
//! Amplitudes are written per region as `A e^{iq(x−x_ref)} + B e^{−iq(x−x_ref)}`.
//! Each finite segment uses its left edge as reference; both asymptotic
//! regions use `x = 0`, so the free profile maps to the identity. The matrix
//! relates `(A, B)` on the far left to `(A, B)` on the far right, and a pole is
//! a zero of `M₂₂`: with `(A_L, B_L) = (0, 1)` the right side has no incoming
//! wave.
//!
//! Poles are isolated by recursive four-way subdivision guided by the
//! winding number of `M₂₂` around each rectangle, then polished by Newton.
//!
//! Resonances far narrower than f64 can resolve as a complex `k` (alpha
//! decay has `Im k / Re k ~ 1e-35`) go through [`narrow_resonance`] instead:
//! the same outgoing-wave condition in its first-order narrow-width form.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::barrier_dynamics::{Grid1D, PmlSpec, PotentialProfile, WaveState};
use crate::quadrature::integrate;

type C = Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoleError {
    #[error("profile is not piecewise constant with finite edges")]
    NotPiecewiseConstant,
    #[error("energy coincides with a segment potential (q = 0) at k = {0}")]
    EdgeEnergy(C),
    #[error("invalid search region: {0}")]
    InvalidRegion(&'static str),
    #[error("winding number unresolved on rectangle re [{re0}, {re1}] im [{im0}, {im1}]")]
    UnresolvedRegion { re0: f64, re1: f64, im0: f64, im1: f64 },
    #[error("Im(k) = {0} is not negative; not a decaying resonance")]
    NonDecaying(f64),
    #[error("no resonance found: {0}")]
    NoResonance(&'static str),
    #[error("residual evaluation produced a non-finite value at k = {0}")]
    NonFinite(C),
}

/// 2×2 transfer matrix at wavenumber `k`. The true matrix is
/// `entries · exp(log_scale)`; `rescaled` is set when evanescent growth
/// forced the scale out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[C; 2]; 2],
    pub k: C,
    pub log_scale: f64,
    pub rescaled: bool,
}

impl TransferMatrix {
    fn identity(k: C) -> Self {
        let o = C::new(1.0, 0.0);
        let z = C::new(0.0, 0.0);
        Self { entries: [[o, z], [z, o]], k, log_scale: 0.0, rescaled: false }
    }

    fn left_mul(&mut self, m: [[C; 2]; 2]) {
        let e = self.entries;
        self.entries = [
            [m[0][0] * e[0][0] + m[0][1] * e[1][0], m[0][0] * e[0][1] + m[0][1] * e[1][1]],
            [m[1][0] * e[0][0] + m[1][1] * e[1][0], m[1][0] * e[0][1] + m[1][1] * e[1][1]],
        ];
        let big = self.max_abs();
        if big > 1e200 {
            for row in &mut self.entries {
                for v in row {
                    *v /= big;
                }
            }
            self.log_scale += big.ln();
            self.rescaled = true;
        }
    }

    fn max_abs(&self) -> f64 {
        self.entries.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Determinant of the true matrix (may overflow when rescaled).
    pub fn det(&self) -> C {
        let e = self.entries;
        (e[0][0] * e[1][1] - e[0][1] * e[1][0]) * (2.0 * self.log_scale).exp()
    }

    /// `M₂₂` of the true matrix.
    pub fn m22(&self) -> C {
        self.entries[1][1] * self.log_scale.exp()
    }

    /// `|M₂₂| / max|M_ij|`, the scale-free Siegert residual.
    pub fn relative_residual(&self) -> f64 {
        self.entries[1][1].norm() / self.max_abs()
    }

    /// Transmission and reflection amplitudes `(t, r)` for a wave incident
    /// from the left (real `k`, equal asymptotic potentials).
    pub fn scattering(&self) -> (C, C) {
        let e = self.entries;
        let r = -e[1][0] / e[1][1];
        let t = self.det() / self.m22();
        (t, r)
    }
}

/// Wavenumber in a region of potential `v` (natural units):
/// `sqrt(k² − 2v)`, equal to `k` itself where `v = 0`.
fn local_q(k: C, v: f64) -> C {
    if v == 0.0 {
        return k;
    }
    let q = (k * k - 2.0 * v).sqrt();
    // keep the branch continuous with q → k; interior segments do not care
    if (q.re * k.re + q.im * k.im) < 0.0 {
        -q
    } else {
        q
    }
}

fn interface(q_from: C, q_to: C) -> [[C; 2]; 2] {
    let r = q_from / q_to;
    let p = (C::new(1.0, 0.0) + r) * 0.5;
    let m = (C::new(1.0, 0.0) - r) * 0.5;
    [[p, m], [m, p]]
}

fn propagate(q: C, d: f64, tm: &mut TransferMatrix) {
    let phase = C::new(0.0, 1.0) * q * d;
    let mut shift = 0.0;
    if phase.re.abs() > 700.0 {
        shift = phase.re.abs();
        tm.rescaled = true;
    }
    let z = C::new(0.0, 0.0);
    tm.left_mul([[(phase - shift).exp(), z], [z, (-phase - shift).exp()]]);
    tm.log_scale += shift;
}

/// Transfer matrix of a piecewise-constant profile at complex `k`.
pub fn transfer_matrix(profile: &PotentialProfile, k: C) -> Result<TransferMatrix, PoleError> {
    let steps = profile.constant_steps().ok_or(PoleError::NotPiecewiseConstant)?;
    let mut tm = TransferMatrix::identity(k);
    let mut q = k;
    let mut x_ref = 0.0;
    for &(x0, _x1, v) in &steps {
        let q_new = local_q(k, v);
        if q_new.norm() == 0.0 {
            return Err(PoleError::EdgeEnergy(k));
        }
        propagate(q, x0 - x_ref, &mut tm);
        tm.left_mul(interface(q, q_new));
        q = q_new;
        x_ref = x0;
    }
    if let Some(&(_, x_last, _)) = steps.last() {
        propagate(q, x_last - x_ref, &mut tm);
        tm.left_mul(interface(q, k));
        propagate(k, -x_last, &mut tm);
    }
    Ok(tm)
}

/// `M₂₂(k)`; zero exactly at a Siegert pole.
pub fn siegert_residual(profile: &PotentialProfile, k: C) -> Result<C, PoleError> {
    let m = transfer_matrix(profile, k)?.m22();
    if !(m.re.is_finite() && m.im.is_finite()) {
        return Err(PoleError::NonFinite(k));
    }
    Ok(m)
}

/// A Siegert/Gamow resonance in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePole {
    pub k: C,
    pub energy: C,
    pub gamma: f64,
    pub lifetime: f64,
    pub residual: f64,
}

impl ResonancePole {
    /// Pole with `ħ = m = 1`.
    pub fn from_k(k: C, residual: f64) -> Self {
        let energy = k * k * 0.5;
        let gamma = -2.0 * energy.im;
        Self { k, energy, gamma, lifetime: 1.0 / gamma, residual }
    }
}

/// `(Γ, 1/Γ)` for a pole at `k`, with `ħ = 1`: `Γ = −2 Im(k²/2m)`.
pub fn pole_to_rate(k: C, mass: f64) -> Result<(f64, f64), PoleError> {
    if k.im > 0.0 {
        return Err(PoleError::NonDecaying(k.im));
    }
    let gamma = -2.0 * (k * k / (2.0 * mass)).im;
    Ok((gamma, 1.0 / gamma))
}

/// Rectangle of the lower half `k` plane to search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub k_re: (f64, f64),
    pub k_im: (f64, f64),
    pub max_depth: u32,
    pub boundary_samples: usize,
}

impl SearchRegion {
    pub fn new(k_re: (f64, f64), k_im: (f64, f64)) -> Result<Self, PoleError> {
        Self { k_re, k_im, max_depth: 24, boundary_samples: 256 }.validated()
    }

    pub fn validated(self) -> Result<Self, PoleError> {
        if !(self.k_re.1 > self.k_re.0) || !(self.k_im.1 > self.k_im.0) {
            return Err(PoleError::InvalidRegion("empty rectangle"));
        }
        if self.k_im.1 > 0.0 {
            return Err(PoleError::InvalidRegion("k_im range must lie in (-inf, 0]"));
        }
        if self.max_depth < 10 {
            return Err(PoleError::InvalidRegion("max_depth must be at least 10"));
        }
        if self.boundary_samples < 8 {
            return Err(PoleError::InvalidRegion("boundary_samples must be at least 8"));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    re0: f64,
    re1: f64,
    im0: f64,
    im1: f64,
}

impl Rect {
    fn contains(&self, k: C) -> bool {
        k.re >= self.re0 && k.re <= self.re1 && k.im >= self.im0 && k.im <= self.im1
    }

    fn near_edge(&self, k: C) -> bool {
        let tol_re = 1e-3 * (self.re1 - self.re0);
        let tol_im = 1e-3 * (self.im1 - self.im0);
        (k.re - self.re0).abs() < tol_re
            || (self.re1 - k.re).abs() < tol_re
            || (k.im - self.im0).abs() < tol_im
            || (self.im1 - k.im).abs() < tol_im
    }

    fn split(&self, fr: f64, fi: f64) -> [Rect; 4] {
        let rm = self.re0 + fr * (self.re1 - self.re0);
        let im = self.im0 + fi * (self.im1 - self.im0);
        [
            Rect { re0: self.re0, re1: rm, im0: self.im0, im1: im },
            Rect { re0: rm, re1: self.re1, im0: self.im0, im1: im },
            Rect { re0: self.re0, re1: rm, im0: im, im1: self.im1 },
            Rect { re0: rm, re1: self.re1, im0: im, im1: self.im1 },
        ]
    }

    fn error(&self) -> PoleError {
        PoleError::UnresolvedRegion { re0: self.re0, re1: self.re1, im0: self.im0, im1: self.im1 }
    }
}

/// Accumulated argument change of `f` along the segment `a → b`, bisecting
/// wherever consecutive samples differ in phase by more than π/4.
fn arg_change<F: Fn(C) -> Result<C, PoleError>>(f: &F, a: C, fa: C, b: C, fb: C, depth: u32) -> Result<f64, PoleError> {
    let d = (fb / fa).arg();
    if d.abs() < PI / 4.0 || depth == 0 {
        return Ok(d);
    }
    let m = (a + b) * 0.5;
    let fm = f(m)?;
    if fm.norm() == 0.0 {
        return Err(PoleError::NonFinite(m));
    }
    Ok(arg_change(f, a, fa, m, fm, depth - 1)? + arg_change(f, m, fm, b, fb, depth - 1)?)
}

/// Zero count of `f` inside `rect`, or `None` if the winding number did not
/// settle near an integer.
fn winding<F: Fn(C) -> Result<C, PoleError>>(f: &F, rect: &Rect, samples: usize) -> Result<Option<i64>, PoleError> {
    let corners = [
        C::new(rect.re0, rect.im0),
        C::new(rect.re1, rect.im0),
        C::new(rect.re1, rect.im1),
        C::new(rect.re0, rect.im1),
    ];
    let mut total = 0.0;
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        let mut prev = a;
        let mut fprev = f(a)?;
        for j in 1..=samples {
            let z = a + (b - a) * (j as f64 / samples as f64);
            let fz = f(z)?;
            if fz.norm() == 0.0 || fprev.norm() == 0.0 {
                return Ok(None);
            }
            total += arg_change(f, prev, fprev, z, fz, 24)?;
            prev = z;
            fprev = fz;
        }
    }
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.1 {
        return Ok(None);
    }
    Ok(Some(n as i64))
}

fn robust_count<F: Fn(C) -> Result<C, PoleError>>(f: &F, rect: &Rect, samples: usize) -> Result<i64, PoleError> {
    let mut s = samples;
    for _ in 0..4 {
        if let Some(n) = winding(f, rect, s)? {
            return Ok(n);
        }
        s *= 2;
    }
    Err(rect.error())
}

/// Newton iteration with a central-difference derivative. Returns the root
/// when the relative step falls below 1e-12.
fn newton<F: Fn(C) -> Result<C, PoleError>>(f: &F, mut k: C) -> Option<C> {
    for _ in 0..60 {
        let fk = f(k).ok()?;
        if fk.norm() == 0.0 {
            return Some(k);
        }
        let h = 1e-6 * k.norm().max(1e-3);
        let d = (f(k + h).ok()? - f(k - h).ok()?) / (2.0 * h);
        if d.norm() == 0.0 {
            return None;
        }
        let step = fk / d;
        k -= step;
        if !(k.re.is_finite() && k.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-12 * k.norm().max(1e-300) {
            return Some(k);
        }
    }
    None
}

struct Search<'a, F> {
    f: &'a F,
    region: SearchRegion,
    found: Vec<C>,
}

impl<F: Fn(C) -> Result<C, PoleError>> Search<'_, F> {
    fn visit(&mut self, rect: Rect, count: i64, depth: u32) -> Result<(), PoleError> {
        if count <= 0 {
            return Ok(());
        }
        if count == 1 {
            let center = C::new(0.5 * (rect.re0 + rect.re1), 0.5 * (rect.im0 + rect.im1));
            if let Some(k) = newton(self.f, center) {
                if rect.contains(k) {
                    let confirmed = !rect.near_edge(k)
                        || robust_count(self.f, &rect, 2 * self.region.boundary_samples)? == 1;
                    if confirmed {
                        if !self.found.iter().any(|z| (z - k).norm() < 1e-8 * k.norm()) {
                            self.found.push(k);
                        }
                        return Ok(());
                    }
                }
            }
        }
        if depth >= self.region.max_depth {
            return Err(rect.error());
        }
        // Split at the midpoint; if a zero sits on a cut line the child
        // counts do not add up, so shift the cut and try again.
        let samples = self.region.boundary_samples;
        for &(fr, fi) in &[(0.5, 0.5), (0.5137, 0.4871), (0.4729, 0.5311)] {
            let children = rect.split(fr, fi);
            let mut counts = [0i64; 4];
            let mut ok = true;
            for (c, child) in counts.iter_mut().zip(children.iter()) {
                match robust_count(self.f, child, samples) {
                    Ok(n) => *c = n,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && counts.iter().sum::<i64>() == count {
                for (child, c) in children.iter().zip(counts) {
                    self.visit(*child, c, depth + 1)?;
                }
                return Ok(());
            }
        }
        Err(rect.error())
    }
}

/// All Siegert poles inside `region`, sorted by ascending `|Im k|`.
pub fn find_poles(profile: &PotentialProfile, region: SearchRegion) -> Result<Vec<ResonancePole>, PoleError> {
    let region = region.validated()?;
    let f = |k: C| -> Result<C, PoleError> {
        let tm = transfer_matrix(profile, k)?;
        let v = tm.entries[1][1] * tm.log_scale.exp();
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(PoleError::NonFinite(k))
        }
    };
    let rect = Rect { re0: region.k_re.0, re1: region.k_re.1, im0: region.k_im.0, im1: region.k_im.1 };
    let total = robust_count(&f, &rect, region.boundary_samples)?;
    let mut search = Search { f: &f, region, found: Vec::new() };
    search.visit(rect, total, 0)?;
    let mut poles = Vec::with_capacity(search.found.len());
    for k in search.found {
        let residual = transfer_matrix(profile, k)?.relative_residual();
        poles.push(ResonancePole::from_k(k, residual));
    }
    poles.sort_by(|a, b| a.k.im.abs().total_cmp(&b.k.im.abs()).then(a.k.re.total_cmp(&b.k.re)));
    Ok(poles)
}

#[derive(Debug, Clone, Copy)]
struct Region {
    x_start: f64,
    x_end: f64,
    x_ref: f64,
    q: C,
    a: C,
    b: C,
}

/// Outgoing solution of a piecewise-constant profile at a pole, evaluable
/// anywhere on the real axis (or on a stretched contour).
#[derive(Debug, Clone)]
pub struct GamowFunction {
    k: C,
    regions: Vec<Region>,
    scale: C,
}

impl GamowFunction {
    pub fn new(profile: &PotentialProfile, k: C) -> Result<Self, PoleError> {
        let steps = profile.constant_steps().ok_or(PoleError::NotPiecewiseConstant)?;
        let mut regions = Vec::with_capacity(steps.len() + 2);
        let first = steps.first().map_or(0.0, |s| s.0);
        regions.push(Region {
            x_start: f64::NEG_INFINITY,
            x_end: first,
            x_ref: 0.0,
            q: k,
            a: C::new(0.0, 0.0),
            b: C::new(1.0, 0.0),
        });
        for &(x0, x1, v) in &steps {
            let q = local_q(k, v);
            if q.norm() == 0.0 {
                return Err(PoleError::EdgeEnergy(k));
            }
            regions.push(Self::matched(regions.last().unwrap(), x0, x1, x0, q));
        }
        let last = steps.last().map_or(0.0, |s| s.1);
        let mut right = Self::matched(regions.last().unwrap(), last, f64::INFINITY, last, k);
        // re-reference to x = 0; the incoming part vanishes at the pole
        right.a *= (C::new(0.0, -1.0) * k * last).exp();
        right.b = C::new(0.0, 0.0);
        right.x_ref = 0.0;
        regions.push(right);
        Ok(Self { k, regions, scale: C::new(1.0, 0.0) })
    }

    fn matched(prev: &Region, x0: f64, x1: f64, x_ref: f64, q: C) -> Region {
        let i = C::new(0.0, 1.0);
        let d = x0 - prev.x_ref;
        let a0 = prev.a * (i * prev.q * d).exp();
        let b0 = prev.b * (-i * prev.q * d).exp();
        let r = prev.q / q;
        let one = C::new(1.0, 0.0);
        Region {
            x_start: x0,
            x_end: x1,
            x_ref,
            q,
            a: ((one + r) * a0 + (one - r) * b0) * 0.5,
            b: ((one - r) * a0 + (one + r) * b0) * 0.5,
        }
    }

    pub fn k(&self) -> C {
        self.k
    }

    /// φ at a complex coordinate `z` whose real part selects the region.
    pub fn eval_complex(&self, z: C) -> C {
        let i = C::new(0.0, 1.0);
        let r = self
            .regions
            .iter()
            .find(|r| z.re >= r.x_start && z.re < r.x_end)
            .unwrap_or(self.regions.last().unwrap());
        let u = z - r.x_ref;
        self.scale * (r.a * (i * r.q * u).exp() + r.b * (-i * r.q * u).exp())
    }

    pub fn eval(&self, x: f64) -> C {
        self.eval_complex(C::new(x, 0.0))
    }

    /// Outgoing amplitudes `(A₊, A₋)`: `φ = A₊e^{ikx}` on the right and
    /// `A₋e^{−ikx}` on the left.
    pub fn outgoing_amplitudes(&self) -> (C, C) {
        let right = self.regions.last().unwrap();
        (self.scale * right.a, self.scale * self.regions[0].b)
    }

    /// Rescale so that `∫_{a}^{b}|φ|² = 1` and φ is real and positive at the
    /// largest-magnitude sample in `[a, b]`.
    pub fn normalize_on(&mut self, a: f64, b: f64) {
        let n = integrate(|x| self.eval(x).norm_sqr(), a, b, 1e-12, 0.0).value;
        let mut best = C::new(0.0, 0.0);
        for j in 0..=200 {
            let v = self.eval(a + (b - a) * j as f64 / 200.0);
            if v.norm() > best.norm() {
                best = v;
            }
        }
        let phase = if best.norm() > 0.0 { best.conj() / best.norm() } else { C::new(1.0, 0.0) };
        self.scale *= phase / n.sqrt();
    }
}

/// Gamow state of `pole` sampled on `grid` (natural units), normalized to
/// unit norm over the extent of the profile's segments.
pub fn gamow_state(profile: &PotentialProfile, pole: &ResonancePole, grid: Grid1D) -> Result<WaveState, PoleError> {
    gamow_state_stretched(profile, pole, grid, &PmlSpec::off())
}

/// As [`gamow_state`], with the outgoing tails continued onto the complex
/// contour of `pml` so the state matches the stretched evolution operator.
pub fn gamow_state_stretched(
    profile: &PotentialProfile,
    pole: &ResonancePole,
    grid: Grid1D,
    pml: &PmlSpec,
) -> Result<WaveState, PoleError> {
    let mut g = GamowFunction::new(profile, pole.k)?;
    let edges = profile.edges();
    let (a, b) = match (edges.first(), edges.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => (-1.0, 1.0),
    };
    g.normalize_on(a, b);
    let p = pml.exponent as f64;
    let psi: Vec<C> = grid
        .xs()
        .iter()
        .map(|&x| {
            let lo = grid.x_min + pml.thickness;
            let hi = grid.x_max - pml.thickness;
            let depth = (lo - x).max(x - hi);
            let z = if pml.is_off() || depth <= 0.0 {
                C::new(x, 0.0)
            } else {
                let xi = (depth / pml.thickness).min(1.0);
                let shift = pml.strength * pml.thickness * xi.powf(p + 1.0) / (p + 1.0);
                C::new(x, if x > 0.0 { shift } else { -shift })
            };
            g.eval_complex(z)
        })
        .collect();
    Ok(WaveState::from_psi(grid, &psi))
}

/// Parity of a resonance in a symmetric profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Narrow resonance of a symmetric profile with a flat central well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrowResonance {
    pub pole: ResonancePole,
    /// Depth of the central well that puts the resonance at the requested
    /// energy.
    pub well_depth: f64,
    pub parity: Parity,
}

fn propagate_inward(psi: C, dpsi: C, q: C, s: f64) -> (C, C) {
    let qs = q * s;
    let (c, sn) = (qs.cos(), qs.sin());
    let sinc = if q.norm() < 1e-12 { C::new(s, 0.0) } else { sn / q };
    (psi * c - dpsi * sinc, psi * q * sn + dpsi * c)
}

/// Resonance of a symmetric piecewise-constant profile at real energy
/// `energy`, in the narrow-width limit.
///
/// The central segment `[−r0, r0]` is a well whose depth is tuned (smallest
/// non-negative value) so that the interior solution of the given parity
/// matches the log-derivative of the purely outgoing solution at `r0`. The
/// width follows from the outgoing flux over the norm inside the outer
/// turning point, and the pole is placed at `Im k = −Γ/(2 Re k)`.
pub fn narrow_resonance(profile: &PotentialProfile, energy: f64, parity: Parity) -> Result<NarrowResonance, PoleError> {
    let steps = profile.constant_steps().ok_or(PoleError::NotPiecewiseConstant)?;
    if !(energy > 0.0) {
        return Err(PoleError::NoResonance("energy must be positive"));
    }
    let center = steps
        .iter()
        .position(|s| s.0 < 0.0 && s.1 > 0.0)
        .ok_or(PoleError::NoResonance("no segment contains x = 0"))?;
    let r0 = steps[center].1;
    let k = (2.0 * energy).sqrt();
    let kc = C::new(k, 0.0);

    // outgoing wave e^{ikx} beyond the last edge, carried inward to r0
    let outer = &steps[center + 1..];
    let x_last = outer.last().map_or(r0, |s| s.1);
    let mut psi = (C::new(0.0, k * x_last)).exp();
    let mut dpsi = C::new(0.0, k) * psi;
    let mut samples: Vec<(f64, f64, C, C, C)> = Vec::with_capacity(outer.len());
    for &(x0, x1, v) in outer.iter().rev() {
        let q = local_q(kc, v);
        samples.push((x0, x1, q, psi, dpsi));
        let (p, d) = propagate_inward(psi, dpsi, q, x1 - x0);
        psi = p;
        dpsi = d;
    }
    let log_der = (dpsi / psi).re;

    let g = |q: f64| match parity {
        Parity::Odd => q / (q * r0).tan(),
        Parity::Even => -q * (q * r0).tan(),
    };
    // g is decreasing between its poles at θ = q·r0 = nπ (odd) or nπ + π/2
    let offset = match parity {
        Parity::Odd => 0.0,
        Parity::Even => 0.5 * PI,
    };
    let theta_k = k * r0;
    let n = ((theta_k - offset) / PI).floor();
    let branch_hi = (n + 1.0) * PI + offset;
    let bisect = |mut lo: f64, mut hi: f64| {
        let tiny = 1e-14 * hi;
        lo += tiny;
        hi -= tiny;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid / r0) > log_der {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let theta_w = if g(k) >= log_der {
        bisect(theta_k, branch_hi)
    } else {
        // The root of this branch sits below k. Within rounding of k it is
        // the zero-depth solution; otherwise move to the next branch.
        let below = bisect(n * PI + offset, theta_k);
        if theta_k - below <= 1e-9 * theta_k {
            theta_k
        } else {
            bisect(branch_hi, branch_hi + PI)
        }
    };
    let q_w = theta_w / r0;
    let well_depth = 0.5 * (q_w * q_w - k * k);
    let residual = ((g(q_w) - log_der) / log_der.abs().max(q_w)).abs();

    // norm over [0, turning point]: interior well plus the barrier segments
    let interior_amp = match parity {
        Parity::Odd => psi / (q_w * r0).sin(),
        Parity::Even => psi / (q_w * r0).cos(),
    };
    let s2 = match parity {
        Parity::Odd => 0.5 * r0 - (2.0 * q_w * r0).sin() / (4.0 * q_w),
        Parity::Even => 0.5 * r0 + (2.0 * q_w * r0).sin() / (4.0 * q_w),
    };
    let mut norm = interior_amp.norm_sqr() * s2;
    for &(x0, x1, q, p1, d1) in samples.iter().rev() {
        let v = 0.5 * (k * k - (q * q).re);
        if v <= energy {
            break;
        }
        norm += integrate(|s| propagate_inward(p1, d1, q, s).0.norm_sqr(), 0.0, x1 - x0, 1e-10, 0.0).value;
    }
    let flux = k; // |A|² = 1
    let gamma = flux / norm;
    let k_pole = C::new(k, -gamma / (2.0 * k));
    let mut pole = ResonancePole::from_k(k_pole, residual);
    // keep the exact first-order width rather than the rounded k²
    pole.energy = C::new(energy, -0.5 * gamma);
    pole.gamma = gamma;
    pole.lifetime = 1.0 / gamma;
    Ok(NarrowResonance { pole, well_depth, parity })
}

/// Alpha-decay resonance through an `n_steps` staircase of the Coulomb
/// barrier of a daughter with charge `z_daughter`, nuclear radius `r0_fm`,
/// at alpha energy `e_alpha_mev`. Returns the resonance in nuclear natural
/// units (fm, ħ = m_α = 1) and its width in s⁻¹.
pub fn coulomb_staircase_resonance(
    z_daughter: f64,
    r0_fm: f64,
    e_alpha_mev: f64,
    n_steps: usize,
) -> Result<(NarrowResonance, f64), PoleError> {
    use crate::constants::nuclear;
    let e = nuclear::mev_to_natural(e_alpha_mev);
    let b = nuclear::coulomb_coefficient(z_daughter) / e;
    if !(b > r0_fm) {
        return Err(PoleError::NoResonance("energy above the Coulomb barrier"));
    }
    let profile = PotentialProfile::coulomb_tail(z_daughter, r0_fm)
        .and_then(|p| p.staircase(n_steps, 1.2 * b))
        .map_err(|_| PoleError::NotPiecewiseConstant)?;
    let res = narrow_resonance(&profile, e, Parity::Odd)?;
    Ok((res, nuclear::rate_to_si(res.pole.gamma)))
}

/// Sample `|M₂₂|` along the real axis; convenience for scans.
pub fn residual_scan(profile: &PotentialProfile, k_min: f64, k_max: f64, n: usize) -> Result<Vec<(f64, f64)>, PoleError> {
    let mut out = vec![];
    for j in 0..n {
        let k = k_min + (k_max - k_min) * j as f64 / (n.max(2) - 1) as f64;
        out.push((k, siegert_residual(profile, C::new(k, 0.0))?.norm()));
    }
    Ok(out)
}
