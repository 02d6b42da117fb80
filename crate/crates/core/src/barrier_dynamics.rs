//! Time-domain Schrödinger evolution in 1D with complex-stretched absorbing
//! layers, and the escape diagnostics built on it.
//!
//! The integrator is the staggered leapfrog of Visscher: the real part of ψ
//! lives at integer steps and the imaginary part half a step ahead. The
//! quantity `R(t)² + I(t+dt/2)·I(t−dt/2)` is conserved exactly by the closed
//! scheme, so that is what [`WaveState::norm`] reports. Inside the absorbing
//! layers the anti-Hermitian part of the stretched Hamiltonian is applied
//! with a Crank–Nicolson half (one tridiagonal solve per register), which
//! keeps the damping unconditionally stable.

// std, when linked (tests), shadows these with inherent methods
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::Tridiagonal;
use crate::quadrature::trapezoid;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BarrierError {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid PML: {0}")]
    InvalidPml(&'static str),
    #[error("invalid profile: {0}")]
    InvalidProfile(&'static str),
    #[error("invalid packet: {0}")]
    InvalidPacket(&'static str),
    #[error("packet tail {tail:.3e} at the domain edge exceeds 1e-8")]
    PacketTail { tail: f64 },
    #[error("dt = {dt:.6e} violates the stability bound dt <= 0.1 hbar/(hbar^2/(m dx^2) + max|V|) = {bound:.6e}")]
    Unstable { dt: f64, bound: f64 },
    #[error("non-finite value after step {step}; stability bound dt <= {bound:.6e} (dt = {dt:.6e})")]
    NonFinite { step: u64, dt: f64, bound: f64 },
    #[error("x = {0} is outside the grid interior")]
    OutsideGrid(f64),
    #[error("integrated density {0:.3e} below 1e-12")]
    DegenerateState(f64),
    #[error("density {0:.3e} below 1e-30; Bohmian velocity undefined")]
    UndefinedVelocity(f64),
}

/// Uniform 1D grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, BarrierError> {
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(BarrierError::InvalidGrid("x_max must exceed x_min"));
        }
        if n_points < 3 {
            return Err(BarrierError::InvalidGrid("need at least 3 points"));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Symmetric grid `[-N dx, N dx]` covering `half_width`, with the spacing
    /// adjusted (never coarsened by more than a rounding step) so that every
    /// entry of `anchors` is a grid node when the anchors are commensurate.
    pub fn snapped(half_width: f64, dx_target: f64, anchors: &[f64]) -> Result<Self, BarrierError> {
        if !(dx_target > 0.0) || !(half_width > dx_target) {
            return Err(BarrierError::InvalidGrid("need 0 < dx < half_width"));
        }
        let base = anchors.iter().copied().find(|a| a.abs() > 0.0).map(f64::abs);
        let dx = match base {
            None => dx_target,
            Some(a0) => {
                let n0 = (a0 / dx_target).round().max(1.0) as usize;
                let fits = |dx: f64| {
                    anchors.iter().all(|a| {
                        let r = a / dx;
                        (r - r.round()).abs() < 1e-9 * r.abs().max(1.0)
                    })
                };
                (n0..=4 * n0).map(|n| a0 / n as f64).find(|&dx| fits(dx)).unwrap_or(a0 / n0 as f64)
            }
        };
        let n_half = (half_width / dx).ceil() as usize;
        let extent = n_half as f64 * dx;
        Self::new(-extent, extent, 2 * n_half + 1)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Index of the node nearest to `x`, if `x` is within the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        if x < self.x_min - 0.5 * self.dx() || x > self.x_max + 0.5 * self.dx() {
            return None;
        }
        Some((((x - self.x_min) / self.dx()).round() as usize).min(self.n_points - 1))
    }
}

/// Value carried by one potential segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentValue {
    Constant(f64),
    /// `coeff / |x|`, a Coulomb tail.
    Coulomb { coeff: f64 },
}

impl SegmentValue {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            SegmentValue::Constant(v) => v,
            SegmentValue::Coulomb { coeff } => coeff / x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub x_start: f64,
    pub x_end: f64,
    pub value: SegmentValue,
}

/// Piecewise potential. Outside the listed segments `V = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    segments: Vec<Segment>,
}

impl PotentialProfile {
    /// Build from ordered, contiguous segments.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self, BarrierError> {
        for s in &segments {
            if !(s.x_end > s.x_start) {
                return Err(BarrierError::InvalidProfile("segment with x_end <= x_start"));
            }
            if let SegmentValue::Coulomb { .. } = s.value {
                if s.x_start < 0.0 && s.x_end > 0.0 {
                    return Err(BarrierError::InvalidProfile("Coulomb segment spans x = 0"));
                }
            }
        }
        for w in segments.windows(2) {
            if w[0].x_end != w[1].x_start {
                return Err(BarrierError::InvalidProfile("segments must be contiguous"));
            }
        }
        Ok(Self { segments })
    }

    /// Piecewise-constant profile from `(x_start, x_end, V)` triples.
    pub fn piecewise(steps: &[(f64, f64, f64)]) -> Result<Self, BarrierError> {
        Self::from_segments(
            steps
                .iter()
                .map(|&(a, b, v)| Segment { x_start: a, x_end: b, value: SegmentValue::Constant(v) })
                .collect(),
        )
    }

    pub fn free() -> Self {
        Self { segments: Vec::new() }
    }

    /// Barriers of height `v0` on `[-l-w, -l]` and `[l, l+w]`.
    pub fn double_barrier(v0: f64, l: f64, w: f64) -> Result<Self, BarrierError> {
        if !(l > 0.0 && w > 0.0) {
            return Err(BarrierError::InvalidProfile("double barrier needs l > 0 and w > 0"));
        }
        Self::piecewise(&[(-l - w, -l, v0), (-l, l, 0.0), (l, l + w, v0)])
    }

    /// Symmetric Coulomb tail `2 Z_d e² / |x|` outside `|x| = r0`, flat
    /// (zero) inside, in nuclear natural units (lengths in fm, energies in
    /// [`crate::constants::nuclear::ENERGY_UNIT_MEV`]).
    pub fn coulomb_tail(z_daughter: f64, r0: f64) -> Result<Self, BarrierError> {
        if !(r0 > 0.0) {
            return Err(BarrierError::InvalidProfile("r0 must be positive"));
        }
        let coeff = crate::constants::nuclear::coulomb_coefficient(z_daughter);
        Self::from_segments(vec![
            Segment { x_start: f64::NEG_INFINITY, x_end: -r0, value: SegmentValue::Coulomb { coeff } },
            Segment { x_start: -r0, x_end: r0, value: SegmentValue::Constant(0.0) },
            Segment { x_start: r0, x_end: f64::INFINITY, value: SegmentValue::Coulomb { coeff } },
        ])
    }

    /// Replace the value of every segment containing `x = 0` by `-depth`.
    pub fn with_well(mut self, depth: f64) -> Self {
        for s in &mut self.segments {
            if s.x_start <= 0.0 && s.x_end >= 0.0 {
                s.value = SegmentValue::Constant(-depth);
            }
        }
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .find(|s| x >= s.x_start && x < s.x_end)
            .map_or(0.0, |s| s.value.at(x))
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.segments.iter().all(|s| matches!(s.value, SegmentValue::Constant(_)))
            && self.segments.iter().all(|s| s.x_start.is_finite() && s.x_end.is_finite())
    }

    /// Segment boundaries, ascending.
    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = Vec::new();
        for s in &self.segments {
            for x in [s.x_start, s.x_end] {
                if x.is_finite() && e.last() != Some(&x) {
                    e.push(x);
                }
            }
        }
        e
    }

    /// Potential at each grid node. A node on a segment boundary takes the
    /// average of the two adjacent values.
    pub fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        let dx = grid.dx();
        let edges = self.edges();
        (0..grid.n_points)
            .map(|i| {
                let x = grid.x(i);
                match edges.iter().find(|&&e| (e - x).abs() < 1e-9 * dx) {
                    Some(&e) => 0.5 * (self.value_at(e - 0.5 * dx) + self.value_at(e + 0.5 * dx)),
                    None => self.value_at(x),
                }
            })
            .collect()
    }

    /// Replace every Coulomb segment by `n` equal steps, truncated at
    /// `|x| = x_cut`, each carrying the value at its midpoint. Beyond the cut
    /// the potential is zero.
    pub fn staircase(&self, n: usize, x_cut: f64) -> Result<Self, BarrierError> {
        if n == 0 {
            return Err(BarrierError::InvalidProfile("staircase needs at least one step"));
        }
        let mut out = Vec::new();
        for s in &self.segments {
            match s.value {
                SegmentValue::Constant(_) => out.push(*s),
                SegmentValue::Coulomb { .. } => {
                    let a = s.x_start.max(-x_cut);
                    let b = s.x_end.min(x_cut);
                    if !(b > a) {
                        return Err(BarrierError::InvalidProfile("cut lies inside the Coulomb edge"));
                    }
                    let h = (b - a) / n as f64;
                    for j in 0..n {
                        let x0 = a + j as f64 * h;
                        let x1 = if j + 1 == n { b } else { a + (j + 1) as f64 * h };
                        let v = s.value.at(x0 + 0.5 * h);
                        out.push(Segment { x_start: x0, x_end: x1, value: SegmentValue::Constant(v) });
                    }
                }
            }
        }
        Self::from_segments(out)
    }

    /// `(x_start, x_end, V)` for a piecewise-constant profile with finite edges.
    pub fn constant_steps(&self) -> Option<Vec<(f64, f64, f64)>> {
        if !self.is_piecewise_constant() {
            return None;
        }
        Some(
            self.segments
                .iter()
                .map(|s| (s.x_start, s.x_end, s.value.at(0.5 * (s.x_start + s.x_end))))
                .collect(),
        )
    }
}

/// Complex-stretched absorbing layer occupying the outer `thickness` of the
/// grid on both sides. The stretch factor at depth `d` into the layer is
/// `s = 1 + i·strength·(d/thickness)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlSpec {
    pub thickness: f64,
    pub strength: f64,
    pub exponent: u32,
    pub reference_k: f64,
}

impl PmlSpec {
    pub fn new(thickness: f64, strength: f64, exponent: u32, reference_k: f64) -> Result<Self, BarrierError> {
        if !(thickness > 0.0) {
            return Err(BarrierError::InvalidPml("thickness must be positive"));
        }
        if !(strength >= 0.0) {
            return Err(BarrierError::InvalidPml("strength must be non-negative"));
        }
        if !(exponent == 2 || exponent == 3) {
            return Err(BarrierError::InvalidPml("exponent must be 2 or 3"));
        }
        if !(reference_k > 0.0) {
            return Err(BarrierError::InvalidPml("reference_k must be positive"));
        }
        Ok(Self { thickness, strength, exponent, reference_k })
    }

    /// A layer with zero strength; the stretch is the identity.
    pub fn off() -> Self {
        Self { thickness: 1.0, strength: 0.0, exponent: 2, reference_k: 1.0 }
    }

    /// Pick the strength that gives a one-way amplitude attenuation
    /// `attenuation` for waves at `reference_k`.
    pub fn design(thickness: f64, exponent: u32, reference_k: f64, attenuation: f64) -> Result<Self, BarrierError> {
        if !(attenuation > 0.0 && attenuation < 1.0) {
            return Err(BarrierError::InvalidPml("attenuation must lie in (0, 1)"));
        }
        let strength = -attenuation.ln() * (exponent as f64 + 1.0) / (reference_k * thickness);
        Self::new(thickness, strength, exponent, reference_k)
    }

    /// One-way amplitude attenuation `exp(-k·strength·thickness/(p+1))` of an
    /// outgoing wave of wavenumber `k`.
    pub fn attenuation(&self, k: f64) -> f64 {
        (-k * self.strength * self.thickness / (self.exponent as f64 + 1.0)).exp()
    }

    /// Stretch factor at `x` for a grid spanning `[x_min, x_max]`.
    pub fn stretch(&self, x: f64, x_min: f64, x_max: f64) -> Complex64 {
        let depth = (x_min + self.thickness - x).max(x - (x_max - self.thickness));
        if depth <= 0.0 || self.strength == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let xi = (depth / self.thickness).min(1.0);
        Complex64::new(1.0, self.strength * xi.powi(self.exponent as i32))
    }

    pub fn is_off(&self) -> bool {
        self.strength == 0.0
    }
}

/// Wavefunction on a grid with staggered real/imaginary registers.
///
/// Before the first step both registers hold ψ at time `t`. After it, `re`
/// is `Re ψ(t)` and `im` is `Im ψ(t + dt/2)`; the lagging `Im ψ(t − dt/2)` is
/// kept privately for the conserved density.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub grid: Grid1D,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub t: f64,
    pub mass: f64,
    pub hbar: f64,
    im_lag: Vec<f64>,
    primed_dt: Option<f64>,
}

impl WaveState {
    /// State holding `psi` at `t = 0`, natural units.
    pub fn from_psi(grid: Grid1D, psi: &[Complex64]) -> Self {
        Self::with_units(grid, psi, 1.0, 1.0)
    }

    pub fn with_units(grid: Grid1D, psi: &[Complex64], mass: f64, hbar: f64) -> Self {
        assert_eq!(psi.len(), grid.n_points, "psi length must equal n_points");
        let re: Vec<f64> = psi.iter().map(|z| z.re).collect();
        let im: Vec<f64> = psi.iter().map(|z| z.im).collect();
        Self { grid, im_lag: im.clone(), re, im, t: 0.0, mass, hbar, primed_dt: None }
    }

    /// ψ at node `i` and the current integer time (imaginary part averaged
    /// across the half steps).
    pub fn psi(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], 0.5 * (self.im[i] + self.im_lag[i]))
    }

    pub fn psi_vec(&self) -> Vec<Complex64> {
        (0..self.grid.n_points).map(|i| self.psi(i)).collect()
    }

    /// Conserved density `R² + I₊·I₋` at node `i`.
    pub fn density(&self, i: usize) -> f64 {
        self.re[i] * self.re[i] + self.im[i] * self.im_lag[i]
    }

    /// `∫|ψ|²dx` over the whole grid by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        self.norm_between(0, self.grid.n_points - 1)
    }

    /// Trapezoid integral of the density over nodes `i0..=i1`.
    pub fn norm_between(&self, i0: usize, i1: usize) -> f64 {
        let d: Vec<f64> = (i0..=i1).map(|i| self.density(i)).collect();
        trapezoid(&d, self.grid.dx())
    }

    /// Multiply ψ by a real factor (both registers).
    pub fn scale(&mut self, factor: f64) {
        for v in self.re.iter_mut().chain(self.im.iter_mut()).chain(self.im_lag.iter_mut()) {
            *v *= factor;
        }
    }

    /// Time step the registers are currently staggered for.
    pub fn primed_dt(&self) -> Option<f64> {
        self.primed_dt
    }

    fn collapse(&mut self) {
        for i in 0..self.im.len() {
            let v = 0.5 * (self.im[i] + self.im_lag[i]);
            self.im[i] = v;
            self.im_lag[i] = v;
        }
        self.primed_dt = None;
    }
}

/// Normalized Gaussian `exp(−(x−x0)²/(4σ²)) exp(i k x)` in natural units.
pub fn init_gaussian(grid: Grid1D, x0: f64, sigma: f64, k_mean: f64) -> Result<WaveState, BarrierError> {
    if !(sigma > 0.0) {
        return Err(BarrierError::InvalidPacket("sigma must be positive"));
    }
    if x0 <= grid.x_min || x0 >= grid.x_max {
        return Err(BarrierError::InvalidPacket("x0 outside the grid"));
    }
    let psi: Vec<Complex64> = grid
        .xs()
        .iter()
        .map(|&x| {
            let g = (-(x - x0) * (x - x0) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(g, k_mean * x)
        })
        .collect();
    let norm = trapezoid(&psi.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(), grid.dx());
    let scale = 1.0 / norm.sqrt();
    let tail = (psi[0].norm().max(psi[grid.n_points - 1].norm())) * scale;
    if tail > 1e-8 {
        return Err(BarrierError::PacketTail { tail });
    }
    let psi: Vec<Complex64> = psi.into_iter().map(|z| z * scale).collect();
    Ok(WaveState::from_psi(grid, &psi))
}

/// Largest time step allowed by `dt <= 0.1·ħ/(ħ²/(m dx²) + max|V|)`.
pub fn stability_bound(grid: &Grid1D, potential: &[f64], mass: f64, hbar: f64) -> f64 {
    let vmax = potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dx = grid.dx();
    0.1 * hbar / (hbar * hbar / (mass * dx * dx) + vmax)
}

#[derive(Debug, Clone)]
struct ImplicitBlock {
    start: usize,
    // (1 + dt/2·Hi) restricted to the block
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    // factorization of (1 − dt/2·Hi)
    solver: Tridiagonal,
}

/// Precomputed update for one (grid, potential, PML, dt) combination.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid1D,
    dt: f64,
    bound: f64,
    mass: f64,
    hbar: f64,
    // dt·Hr/ħ, tridiagonal
    hr_l: Vec<f64>,
    hr_d: Vec<f64>,
    hr_u: Vec<f64>,
    // Hi/ħ, tridiagonal (zero outside the layers)
    hi_l: Vec<f64>,
    hi_d: Vec<f64>,
    hi_u: Vec<f64>,
    blocks: Vec<ImplicitBlock>,
    scratch: Vec<f64>,
    steps: u64,
}

impl Propagator {
    pub fn new(
        grid: Grid1D,
        potential: &PotentialProfile,
        pml: &PmlSpec,
        dt: f64,
        mass: f64,
        hbar: f64,
    ) -> Result<Self, BarrierError> {
        let v = potential.sample(&grid);
        let bound = stability_bound(&grid, &v, mass, hbar);
        if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(BarrierError::Unstable { dt, bound });
        }
        let n = grid.n_points;
        let dx = grid.dx();
        let c = hbar * hbar / (2.0 * mass * dx * dx);
        let s = |x: f64| pml.stretch(x, grid.x_min, grid.x_max);
        let mut h_l = vec![Complex64::new(0.0, 0.0); n];
        let mut h_d = vec![Complex64::new(0.0, 0.0); n];
        let mut h_u = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..n - 1 {
            let x = grid.x(i);
            let si = s(x);
            let sm = s(x - 0.5 * dx);
            let sp = s(x + 0.5 * dx);
            h_l[i] = -c / (si * sm);
            h_u[i] = -c / (si * sp);
            h_d[i] = c / si * (sp.inv() + sm.inv()) + v[i];
        }
        let inv_h = 1.0 / hbar;
        let hr_l: Vec<f64> = h_l.iter().map(|z| dt * z.re * inv_h).collect();
        let hr_d: Vec<f64> = h_d.iter().map(|z| dt * z.re * inv_h).collect();
        let hr_u: Vec<f64> = h_u.iter().map(|z| dt * z.re * inv_h).collect();
        let hi_l: Vec<f64> = h_l.iter().map(|z| z.im * inv_h).collect();
        let hi_d: Vec<f64> = h_d.iter().map(|z| z.im * inv_h).collect();
        let hi_u: Vec<f64> = h_u.iter().map(|z| z.im * inv_h).collect();

        let active: Vec<bool> = (0..n).map(|i| hi_l[i] != 0.0 || hi_d[i] != 0.0 || hi_u[i] != 0.0).collect();
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n {
            if !active[i] {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < n && active[j + 1] {
                j += 1;
            }
            // pad with one passive row on each side so couplings stay inside
            let start = i.saturating_sub(1);
            let end = (j + 1).min(n - 1);
            let h = 0.5 * dt;
            let len = end - start + 1;
            let mut lower = vec![0.0; len];
            let mut diag = vec![0.0; len];
            let mut upper = vec![0.0; len];
            let mut il = vec![0.0; len];
            let mut id = vec![0.0; len];
            let mut iu = vec![0.0; len];
            for r in 0..len {
                let g = start + r;
                lower[r] = h * hi_l[g];
                diag[r] = 1.0 + h * hi_d[g];
                upper[r] = h * hi_u[g];
                il[r] = -h * hi_l[g];
                id[r] = 1.0 - h * hi_d[g];
                iu[r] = -h * hi_u[g];
            }
            lower[0] = 0.0;
            upper[len - 1] = 0.0;
            il[0] = 0.0;
            iu[len - 1] = 0.0;
            blocks.push(ImplicitBlock { start, lower, diag, upper, solver: Tridiagonal::new(&il, &id, &iu) });
            i = j + 1;
        }
        Ok(Self {
            grid,
            dt,
            bound,
            mass,
            hbar,
            hr_l,
            hr_d,
            hr_u,
            hi_l,
            hi_d,
            hi_u,
            blocks,
            scratch: vec![0.0; n],
            steps: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stability_bound(&self) -> f64 {
        self.bound
    }

    /// Half-step time derivative of the imaginary register, `−Hr R + Hi I`.
    fn im_rate(&self, re: &[f64], im: &[f64], out: &mut [f64]) {
        let n = re.len();
        let inv_dt = 1.0 / self.dt;
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            let hr = (self.hr_l[i] * re[i - 1] + self.hr_d[i] * re[i] + self.hr_u[i] * re[i + 1]) * inv_dt;
            let hi = self.hi_l[i] * im[i - 1] + self.hi_d[i] * im[i] + self.hi_u[i] * im[i + 1];
            out[i] = -hr + hi;
        }
    }

    fn prime(&mut self, state: &mut WaveState) {
        let n = state.re.len();
        let mut rate = vec![0.0; n];
        self.im_rate(&state.re, &state.im, &mut rate);
        for i in 0..n {
            let i0 = state.im[i];
            state.im[i] = i0 + 0.5 * self.dt * rate[i];
            state.im_lag[i] = i0 - 0.5 * self.dt * rate[i];
        }
        state.primed_dt = Some(self.dt);
    }

    /// `x ← (1 − dt/2 Hi)⁻¹[(1 + dt/2 Hi) x_old + sign·dt·Hr y]` where the
    /// explicit part has already been written into `rhs`.
    fn implicit_blocks(blocks: &[ImplicitBlock], old: &[f64], rhs: &mut [f64]) {
        for b in blocks {
            let len = b.diag.len();
            for r in 0..len {
                let g = b.start + r;
                let mut acc = (b.diag[r] - 1.0) * old[g];
                if r > 0 {
                    acc += b.lower[r] * old[g - 1];
                }
                if r + 1 < len {
                    acc += b.upper[r] * old[g + 1];
                }
                rhs[g] += acc;
            }
            b.solver.solve(&mut rhs[b.start..b.start + len]);
        }
    }

    /// Advance `state` by one step. Fails if the state's grid differs or the
    /// registers become non-finite.
    pub fn advance(&mut self, state: &mut WaveState) -> Result<(), BarrierError> {
        self.advance_unchecked(state);
        let n = state.re.len();
        let probe = state.re.iter().chain(state.im.iter()).fold(0.0, |a: f64, v| a + v.abs());
        if !probe.is_finite() || n != self.grid.n_points {
            return Err(BarrierError::NonFinite { step: self.steps, dt: self.dt, bound: self.bound });
        }
        Ok(())
    }

    fn advance_unchecked(&mut self, state: &mut WaveState) {
        match state.primed_dt {
            Some(d) if d == self.dt => {}
            Some(_) => {
                state.collapse();
                self.prime(state);
            }
            None => self.prime(state),
        }
        let n = state.re.len();
        let mut rhs = core::mem::take(&mut self.scratch);

        // R(t+dt) from I(t+dt/2)
        rhs[0] = 0.0;
        rhs[n - 1] = 0.0;
        {
            let (re, im) = (&state.re, &state.im);
            for i in 1..n - 1 {
                rhs[i] = re[i] + self.hr_l[i] * im[i - 1] + self.hr_d[i] * im[i] + self.hr_u[i] * im[i + 1];
            }
        }
        Self::implicit_blocks(&self.blocks, &state.re, &mut rhs);
        core::mem::swap(&mut state.re, &mut rhs);

        // I(t+3dt/2) from R(t+dt); the old leading register becomes the lag
        {
            let (re, im) = (&state.re, &state.im);
            rhs[0] = 0.0;
            rhs[n - 1] = 0.0;
            for i in 1..n - 1 {
                rhs[i] = im[i] - (self.hr_l[i] * re[i - 1] + self.hr_d[i] * re[i] + self.hr_u[i] * re[i + 1]);
            }
        }
        Self::implicit_blocks(&self.blocks, &state.im, &mut rhs);
        core::mem::swap(&mut state.im_lag, &mut state.im);
        core::mem::swap(&mut state.im, &mut rhs);
        self.scratch = rhs;
        state.t += self.dt;
        self.steps += 1;
    }

    /// Advance `steps` steps, checking for blow-up every 1024 steps and at
    /// the end.
    pub fn run(&mut self, state: &mut WaveState, steps: u64) -> Result<(), BarrierError> {
        for s in 0..steps {
            if s % 1024 == 1023 || s + 1 == steps {
                self.advance(state)?;
            } else {
                self.advance_unchecked(state);
            }
        }
        Ok(())
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// One leapfrog step. Builds a [`Propagator`] each call; use the propagator
/// directly for long runs.
pub fn step(state: &WaveState, potential: &PotentialProfile, pml: &PmlSpec, dt: f64) -> Result<WaveState, BarrierError> {
    let mut prop = Propagator::new(state.grid, potential, pml, dt, state.mass, state.hbar)?;
    let mut next = state.clone();
    prop.advance(&mut next)?;
    Ok(next)
}

fn interior_index(grid: &Grid1D, x: f64) -> Result<(usize, f64), BarrierError> {
    let dx = grid.dx();
    let u = (x - grid.x_min) / dx;
    if !(u >= 1.0 - 1e-9 && u <= (grid.n_points - 2) as f64 + 1e-9) {
        return Err(BarrierError::OutsideGrid(x));
    }
    let i = (u.floor() as usize).clamp(1, grid.n_points - 2);
    Ok((i, (u - i as f64).clamp(0.0, 1.0)))
}

/// `∫_{−l}^{l}|ψ|²dx` (trapezoid over the nodes in the interval).
pub fn nonescape_probability(state: &WaveState, l: f64) -> f64 {
    interval_probability(state, -l, l)
}

/// Trapezoid integral of the density over the nodes inside `[a, b]`.
pub fn interval_probability(state: &WaveState, a: f64, b: f64) -> f64 {
    let g = &state.grid;
    let dx = g.dx();
    let i0 = ((a - g.x_min) / dx - 1e-9).ceil().max(0.0) as usize;
    let i1 = (((b - g.x_min) / dx + 1e-9).floor() as usize).min(g.n_points - 1);
    if i1 <= i0 {
        return 0.0;
    }
    state.norm_between(i0, i1).max(0.0)
}

fn current_at_node(state: &WaveState, i: usize) -> f64 {
    let dx = state.grid.dx();
    let p = state.psi(i);
    let d = (state.psi(i + 1) - state.psi(i - 1)) / (2.0 * dx);
    state.hbar / state.mass * (p.conj() * d).im
}

/// Probability current `(ħ/m) Im(ψ* ∂ₓψ)` with centered differences, linearly
/// interpolated between nodes.
pub fn probability_current(state: &WaveState, x: f64) -> Result<f64, BarrierError> {
    let (i, f) = interior_index(&state.grid, x)?;
    let j0 = current_at_node(state, i);
    if f == 0.0 || i + 1 > state.grid.n_points - 2 {
        return Ok(j0);
    }
    Ok((1.0 - f) * j0 + f * current_at_node(state, i + 1))
}

/// `[j(l+w) − j(−l−w)] / ∫_{−l−w}^{l+w}|ψ|²dx`.
pub fn decay_rate_from_flux(state: &WaveState, l: f64, w: f64) -> Result<f64, BarrierError> {
    let a = l + w;
    let denom = interval_probability(state, -a, a);
    if denom < 1e-12 {
        return Err(BarrierError::DegenerateState(denom));
    }
    Ok((probability_current(state, a)? - probability_current(state, -a)?) / denom)
}

/// Bouncing-frequency form of the decay rate (natural units):
/// `k/(2(l+w)) · (|A₊|² + |A₋|²) / ⟨|φ|²⟩` where the mean is taken over
/// `[−l−w, l+w]`.
pub fn decay_rate_formula(a_plus: Complex64, a_minus: Complex64, k: f64, l: f64, w: f64, mean_sq_phi: f64) -> f64 {
    k / (2.0 * (l + w)) * (a_plus.norm_sqr() + a_minus.norm_sqr()) / mean_sq_phi
}

/// Bohmian velocity `j/|ψ|²`.
pub fn bohmian_velocity(state: &WaveState, x: f64) -> Result<f64, BarrierError> {
    let (i, f) = interior_index(&state.grid, x)?;
    let rho = |i: usize| state.psi(i).norm_sqr();
    let density = if f == 0.0 { rho(i) } else { (1.0 - f) * rho(i) + f * rho(i + 1) };
    if !(density > 1e-30) {
        return Err(BarrierError::UndefinedVelocity(density));
    }
    Ok(probability_current(state, x)? / density)
}

/// Snapshot of the escape diagnostics for a double barrier `(l, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub t: f64,
    pub p_nonesc: f64,
    pub norm_total: f64,
    pub flux_right: f64,
    pub flux_left: f64,
    pub gamma_flux: f64,
}

pub fn observe(state: &WaveState, l: f64, w: f64) -> Result<Observables, BarrierError> {
    let a = l + w;
    let flux_right = probability_current(state, a)?;
    let flux_left = probability_current(state, -a)?;
    let inside = interval_probability(state, -a, a);
    Ok(Observables {
        t: state.t,
        p_nonesc: nonescape_probability(state, l),
        norm_total: state.norm(),
        flux_right,
        flux_left,
        gamma_flux: if inside > 1e-300 { (flux_right - flux_left) / inside } else { 0.0 },
    })
}

/// Plane wave `e^{ikx}` on `grid`, unnormalized. Handy for current checks.
pub fn plane_wave(grid: Grid1D, k: f64) -> WaveState {
    let psi: Vec<Complex64> = grid.xs().iter().map(|&x| Complex64::from_polar(1.0, k * x)).collect();
    WaveState::from_psi(grid, &psi)
}

/// Period of the lowest mode of an infinite well of width `2l` (natural
/// units), a convenient time scale for tests.
pub fn well_period(l: f64) -> f64 {
    let k0 = PI / (2.0 * l);
    2.0 * PI / (0.5 * k0 * k0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(-20.0, 20.0, 801).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = grid();
        assert!((g.dx() - 0.05).abs() < 1e-15);
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        let s = Grid1D::snapped(10.5, 0.024, &[1.0, 1.5]).unwrap();
        for a in [1.0, -1.0, 1.5, -1.5] {
            let i = s.nearest(a).unwrap();
            assert!((s.x(i) - a).abs() < 1e-12);
        }
        assert!(s.x_max >= 10.5);
    }

    #[test]
    fn gaussian_normalized_and_centered() {
        let psi = init_gaussian(grid(), 0.0, 1.0, 0.0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let mean: f64 = (0..psi.grid.n_points).map(|i| psi.grid.x(i) * psi.density(i)).sum::<f64>() * psi.grid.dx();
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail_rejected() {
        assert!(matches!(init_gaussian(grid(), 17.0, 1.0, 0.0), Err(BarrierError::PacketTail { .. })));
    }

    #[test]
    fn double_barrier_sampling() {
        let p = PotentialProfile::double_barrier(10.0, 1.0, 0.5).unwrap();
        let g = Grid1D::snapped(3.0, 0.05, &[1.0, 1.5]).unwrap();
        let v = p.sample(&g);
        let at = |x: f64| v[g.nearest(x).unwrap()];
        assert_eq!(at(0.0), 0.0);
        assert_eq!(at(1.25), 10.0);
        assert_eq!(at(-1.25), 10.0);
        assert_eq!(at(1.0), 5.0);
        assert_eq!(at(1.5), 5.0);
        assert_eq!(at(2.0), 0.0);
    }

    #[test]
    fn staircase_midpoints() {
        let p = PotentialProfile::from_segments(alloc::vec![Segment {
            x_start: 1.0,
            x_end: f64::INFINITY,
            value: SegmentValue::Coulomb { coeff: 2.0 },
        }])
        .unwrap();
        let s = p.staircase(4, 3.0).unwrap();
        let steps = s.constant_steps().unwrap();
        assert_eq!(steps.len(), 4);
        assert!((steps[0].2 - 2.0 / 1.25).abs() < 1e-15);
        assert!((steps[3].1 - 3.0).abs() < 1e-15);
    }

    #[test]
    fn unstable_dt_rejected() {
        let g = grid();
        let r = Propagator::new(g, &PotentialProfile::free(), &PmlSpec::off(), 1.0, 1.0, 1.0);
        assert!(matches!(r, Err(BarrierError::Unstable { .. })));
    }

    #[test]
    fn free_evolution_conserves_norm() {
        let g = grid();
        let mut psi = init_gaussian(g, 0.0, 1.0, 1.0).unwrap();
        let v = PotentialProfile::free().sample(&g);
        let dt = stability_bound(&g, &v, 1.0, 1.0);
        let mut prop = Propagator::new(g, &PotentialProfile::free(), &PmlSpec::off(), dt, 1.0, 1.0).unwrap();
        prop.run(&mut psi, 10_000).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-6, "norm {}", psi.norm());
    }

    #[test]
    fn step_matches_propagator() {
        let g = grid();
        let psi = init_gaussian(g, 0.0, 1.0, 1.0).unwrap();
        let dt = 2e-4;
        let a = step(&psi, &PotentialProfile::free(), &PmlSpec::off(), dt).unwrap();
        let mut b = psi.clone();
        Propagator::new(g, &PotentialProfile::free(), &PmlSpec::off(), dt, 1.0, 1.0)
            .unwrap()
            .advance(&mut b)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plane_wave_current() {
        let g = Grid1D::new(-10.0, 10.0, 2001).unwrap();
        let k = 1.7;
        let pw = plane_wave(g, k);
        let j = probability_current(&pw, 0.3).unwrap();
        assert!((j - k).abs() / k < 0.02);
        let v = bohmian_velocity(&pw, -2.0).unwrap();
        assert!((v - k).abs() / k < 0.02);
    }

    #[test]
    fn real_psi_has_no_current() {
        let g = grid();
        let psi = init_gaussian(g, 0.0, 1.0, 0.0).unwrap();
        for x in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(probability_current(&psi, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn empty_state_has_no_probability() {
        let g = grid();
        let psi = WaveState::from_psi(g, &alloc::vec![Complex64::new(0.0, 0.0); g.n_points]);
        assert_eq!(nonescape_probability(&psi, 1.0), 0.0);
        assert!(matches!(decay_rate_from_flux(&psi, 1.0, 0.5), Err(BarrierError::DegenerateState(_))));
        assert!(matches!(bohmian_velocity(&psi, 0.0), Err(BarrierError::UndefinedVelocity(_))));
    }

    #[test]
    fn formula_scaling() {
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(decay_rate_formula(z, z, 1.3, 1.0, 0.5, 0.3), 0.0);
        let a = Complex64::new(0.01, 0.02);
        let g1 = decay_rate_formula(a, a, 1.3, 1.0, 0.5, 0.3);
        let g2 = decay_rate_formula(a * 2.0, a * 2.0, 1.3, 1.0, 0.5, 0.3);
        assert!((g2 / g1 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn pml_design_attenuation() {
        let p = PmlSpec::design(6.0, 2, 1.3, 1e-5).unwrap();
        assert!((p.attenuation(1.3) - 1e-5).abs() < 1e-18);
        assert!(PmlSpec::new(0.0, 1.0, 2, 1.0).is_err());
        assert!(PmlSpec::new(1.0, 1.0, 4, 1.0).is_err());
    }
}
