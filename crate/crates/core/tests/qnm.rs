use core::f64::consts::PI;
use std::sync::OnceLock;

use leakycav_core::barrier_dynamics::PmlSpec;
use leakycav_core::constants::{cavity, C_LIGHT, Z0_VACUUM};
use leakycav_core::qnm_cavity::{
    axial_antinodes, classify_modes, fabry_perot_perturbative_lifetime, fabry_perot_poles, helmholtz_qnm_1d,
    paraxial_frequency, quality, quality_and_lifetime, CavityGeometry, ModeClass, PermittivityProfile, QnmError,
    QnmSpectrum, SurfaceImpedance,
};
use leakycav_core::Complex64 as C;
use proptest::prelude::*;

const STRENGTH: f64 = 200.0;
const N_POINTS: usize = 249;

fn slab() -> PermittivityProfile {
    PermittivityProfile::slab(100.0, 0.5, 1.25).unwrap()
}

fn pml(strength: f64) -> PmlSpec {
    PmlSpec::new(0.5, strength, 2, 1.0).unwrap()
}

/// Exact slab resonance `k_m = (mπ − i ln((n+1)/(n−1)))/(n d)` for n = 10, d = 1.
fn slab_exact(m: u32) -> C {
    C::new(m as f64 * PI, -(11.0f64 / 9.0).ln()) / 10.0
}

struct SlabRuns {
    base: QnmSpectrum,
    weak: QnmSpectrum,
    strong: QnmSpectrum,
}

fn slab_runs() -> &'static SlabRuns {
    static RUNS: OnceLock<SlabRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let run = |s: f64| helmholtz_qnm_1d(&slab(), &pml(s), N_POINTS).unwrap();
        SlabRuns { base: run(STRENGTH), weak: run(0.7 * STRENGTH), strong: run(1.3 * STRENGTH) }
    })
}

/// Leaky iff matched in both the weaker and the stronger stretch.
fn classified() -> Vec<(C, ModeClass)> {
    let r = slab_runs();
    let a = classify_modes(&r.base, &r.weak).unwrap();
    let b = classify_modes(&r.base, &r.strong).unwrap();
    a.modes
        .iter()
        .zip(&b.modes)
        .map(|(x, y)| {
            let leaky = x.class == Some(ModeClass::Leaky) && y.class == Some(ModeClass::Leaky);
            (x.omega, if leaky { ModeClass::Leaky } else { ModeClass::Berenger })
        })
        .collect()
}

fn nearest(spec: &QnmSpectrum, w: C) -> C {
    spec.modes.iter().map(|m| m.omega).min_by(|a, b| (a - w).norm().total_cmp(&(b - w).norm())).unwrap()
}

#[test]
fn leaky_modes_are_stretch_invariant() {
    let r = slab_runs();
    let modes = classified();
    let leaky: Vec<C> = modes.iter().filter(|m| m.1 == ModeClass::Leaky).map(|m| m.0).collect();
    assert!(!leaky.is_empty());
    for w in &leaky {
        for other in [&r.weak, &r.strong] {
            let d = (nearest(other, *w) - w).norm() / w.norm();
            assert!(d < 1e-4, "{w}: moved {d:e}");
        }
    }
    // every low slab resonance is found and labelled leaky
    for m in 1..=6 {
        let k = slab_exact(m);
        let hit = leaky.iter().map(|w| w / C_LIGHT).min_by(|a, b| (a - k).norm().total_cmp(&(b - k).norm())).unwrap();
        // second-order discretization error grows as (k·h)²
        assert!((hit - k).norm() / k.norm() < 5e-3, "m = {m}: {hit} vs {k}");
    }
}

#[test]
fn berenger_modes_follow_the_stretch() {
    let r = slab_runs();
    let modes = classified();
    let pml_modes: Vec<C> = modes.iter().filter(|m| m.1 == ModeClass::Berenger).map(|m| m.0).collect();
    assert!(pml_modes.len() >= 3, "{} PML modes", pml_modes.len());
    let moved = pml_modes
        .iter()
        .filter(|w| {
            let d_weak = (nearest(&r.weak, **w) - **w).norm() / w.norm();
            let d_strong = (nearest(&r.strong, **w) - **w).norm() / w.norm();
            d_weak > 1e-3 || d_strong > 1e-3
        })
        .count();
    assert!(moved >= 3, "{moved} of {} PML modes moved", pml_modes.len());
}

#[test]
fn slab_quality_factors() {
    let modes = classified();
    for m in 1..=8 {
        let k = slab_exact(m);
        let w = modes
            .iter()
            .filter(|x| x.1 == ModeClass::Leaky)
            .map(|x| x.0)
            .min_by(|a, b| (a / C_LIGHT - k).norm().total_cmp(&(b / C_LIGHT - k).norm()))
            .unwrap();
        let q = quality(w).unwrap();
        let q_exact = k.re / (2.0 * k.im.abs());
        assert!((q / q_exact - 1.0).abs() < 0.01, "m = {m}: Q {q} vs {q_exact}");
        // closed-slab standing wave k = mπ/(n d)
        assert!((w.re / C_LIGHT / (m as f64 * PI / 10.0) - 1.0).abs() < 0.05);
        if m >= 7 {
            assert!(q > 50.0, "m = {m}: Q {q}");
        }
    }
}

#[test]
fn leaky_frequencies_converge_with_grid() {
    let fine = helmholtz_qnm_1d(&slab(), &pml(STRENGTH), 2 * N_POINTS - 1).unwrap();
    for m in 1..=4 {
        let k = slab_exact(m) * C_LIGHT;
        let coarse = nearest(&slab_runs().base, k);
        let refined = nearest(&fine, k);
        assert!((coarse - refined).norm() / refined.norm() < 1e-3, "m = {m}");
    }
}

#[test]
fn closed_cavity_is_all_leaky() {
    let p = PermittivityProfile::slab(4.0, 0.2, 1.0).unwrap();
    let a = helmholtz_qnm_1d(&p, &PmlSpec::off(), 80).unwrap();
    let b = helmholtz_qnm_1d(&p, &PmlSpec::off(), 80).unwrap();
    let c = classify_modes(&a, &b).unwrap();
    assert!(c.modes.iter().all(|m| m.class == Some(ModeClass::Leaky)));
    for m in &a.modes {
        assert!(m.omega.im.abs() <= 1e-10 * m.omega.norm());
    }
}

#[test]
fn mismatched_physics_rejected() {
    let a = helmholtz_qnm_1d(&slab(), &pml(STRENGTH), 60).unwrap();
    let other = PermittivityProfile::slab(50.0, 0.5, 1.25).unwrap();
    let b = helmholtz_qnm_1d(&other, &pml(STRENGTH), 60).unwrap();
    assert!(matches!(classify_modes(&a, &b), Err(QnmError::MismatchedPhysics)));
    let c = helmholtz_qnm_1d(&slab(), &pml(STRENGTH), 61).unwrap();
    assert!(matches!(classify_modes(&a, &c), Err(QnmError::MismatchedPhysics)));
}

#[test]
fn reference_cavity_frequency_and_lifetime() {
    let g = CavityGeometry::reference();
    let f = paraxial_frequency(&g, 8).unwrap();
    assert!((f / cavity::F_PEC - 1.0).abs() < 5e-3, "{f:e}");
    assert_eq!(axial_antinodes(&g, 8).unwrap(), 9);

    let zs = SurfaceImpedance::new(1e-6, 0.0).unwrap();
    let spec = fabry_perot_poles(cavity::L_ADJUSTED, &zs, 9..=9).unwrap();
    let tau = spec.modes[0].tau.unwrap();
    let approx = fabry_perot_perturbative_lifetime(cavity::L_ADJUSTED, 1e-6);
    assert!((tau / approx - 1.0).abs() < 0.01);
    let orders = (tau / cavity::TAU_MEASURED).log10().abs();
    assert!(orders < 2.0, "τ = {tau:e}");
}

proptest! {
    #[test]
    fn fabry_perot_small_loss_expansion(
        ratio in 1e-9f64..1e-4,
        l in 1e-3f64..1.0,
        n in 1u32..40,
    ) {
        let x_s = ratio * Z0_VACUUM;
        let spec = fabry_perot_poles(l, &SurfaceImpedance::new(x_s, 0.0).unwrap(), n..=n).unwrap();
        let w = spec.modes[0].omega;
        // per-bounce power loss 4X_s/Z₀, two bounces per round trip 2L/c
        let im = 2.0 * x_s * C_LIGHT / (Z0_VACUUM * l);
        prop_assert!((w.im.abs() / im - 1.0).abs() < 0.01, "{} vs {}", w.im, im);
        let tau = spec.modes[0].tau.unwrap();
        prop_assert!((tau / fabry_perot_perturbative_lifetime(l, x_s) - 1.0).abs() < 0.01);
    }

    #[test]
    fn quality_is_scale_invariant(re in 1.0f64..1e12, frac in 1e-9f64..0.5, scale in 1e-3f64..1e3) {
        let w = C::new(re, -frac * re);
        let (q, tau) = quality_and_lifetime(w).unwrap();
        prop_assert!((quality(w * scale).unwrap() / q - 1.0).abs() < 1e-12);
        prop_assert!((q - w.re * tau).abs() <= 1e-12 * q);
    }
}
