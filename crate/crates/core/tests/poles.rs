use core::f64::consts::PI;

use leakycav_core::barrier_dynamics::PotentialProfile;
use leakycav_core::constants::uranium;
use leakycav_core::gamow_semiclassical::nuclear_radius;
use leakycav_core::resonance_poles::{
    coulomb_staircase_resonance, find_poles, pole_to_rate, siegert_residual, transfer_matrix, SearchRegion,
};
use leakycav_core::Complex64 as C;
use proptest::prelude::*;

fn reference() -> PotentialProfile {
    PotentialProfile::double_barrier(10.0, 1.0, 0.5).unwrap()
}

/// Argument change of the residual along a straight segment, bisecting until
/// each piece turns by less than π/8.
fn arg_change(p: &PotentialProfile, a: C, fa: C, b: C, fb: C, depth: u32) -> f64 {
    let d = (fb / fa).arg();
    if d.abs() < PI / 8.0 || depth == 0 {
        return d;
    }
    let m = 0.5 * (a + b);
    let fm = siegert_residual(p, m).unwrap();
    arg_change(p, a, fa, m, fm, depth - 1) + arg_change(p, m, fm, b, fb, depth - 1)
}

fn winding_number(p: &PotentialProfile, re: (f64, f64), im: (f64, f64)) -> f64 {
    let corners = [C::new(re.0, im.0), C::new(re.1, im.0), C::new(re.1, im.1), C::new(re.0, im.1)];
    let mut total = 0.0;
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        let n = 512;
        let mut prev = a;
        let mut fprev = siegert_residual(p, a).unwrap();
        for j in 1..=n {
            let z = a + (b - a) * (j as f64 / n as f64);
            let fz = siegert_residual(p, z).unwrap();
            total += arg_change(p, prev, fprev, z, fz, 30);
            prev = z;
            fprev = fz;
        }
    }
    total / (2.0 * PI)
}

fn reference_poles() -> Vec<C> {
    let region = SearchRegion::new((0.5, 5.2), (-0.3, 0.0)).unwrap();
    find_poles(&reference(), region).unwrap().into_iter().map(|p| p.k).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn winding_counts_reported_poles(
        re0 in 0.6f64..4.5,
        width in 0.05f64..1.5,
        im0 in -0.28f64..-0.01,
        height in 0.002f64..0.28,
    ) {
        let re1 = (re0 + width).min(5.1);
        let im1 = (im0 + height).min(0.0);
        let all = reference_poles();
        let margin = 1e-3;
        let near_edge = all.iter().any(|k| {
            let inside_re = k.re > re0 - margin && k.re < re1 + margin;
            let inside_im = k.im > im0 - margin && k.im < im1 + margin;
            inside_re && inside_im
                && ((k.re - re0).abs() < margin || (k.re - re1).abs() < margin
                    || (k.im - im0).abs() < margin || (k.im - im1).abs() < margin)
        });
        prop_assume!(!near_edge);
        let inside = all.iter().filter(|k| k.re > re0 && k.re < re1 && k.im > im0 && k.im < im1).count();
        let w = winding_number(&reference(), (re0, re1), (im0, im1));
        prop_assert!((w - inside as f64).abs() < 1e-6, "winding {} vs {} poles", w, inside);
        let found = find_poles(&reference(), SearchRegion::new((re0, re1), (im0, im1)).unwrap()).unwrap();
        prop_assert_eq!(found.len(), inside);
    }

    #[test]
    fn unit_determinant_for_symmetric_barriers(
        v0 in 1.0f64..50.0,
        l in 0.3f64..2.0,
        w in 0.1f64..1.0,
        kr in 0.1f64..6.0,
        ki in -0.5f64..0.0,
    ) {
        let p = PotentialProfile::double_barrier(v0, l, w).unwrap();
        let tm = transfer_matrix(&p, C::new(kr, ki)).unwrap();
        let d = tm.det();
        let m = tm.entries;
        // forming the determinant from composed entries cancels terms of size |M|²
        let scale = (m[0][0] * m[1][1]).norm() + (m[0][1] * m[1][0]).norm();
        prop_assert!((d - 1.0).norm() <= 64.0 * f64::EPSILON * scale.max(1.0), "det {} scale {:e}", d, scale);
        if scale < 1e4 {
            prop_assert!((d - 1.0).norm() < 1e-10, "det {}", d);
        }
    }
}

#[test]
fn residual_large_off_resonance_and_small_at_pole() {
    let p = reference();
    assert!(siegert_residual(&p, C::new(0.8, 0.0)).unwrap().norm() > 0.1);
    for k in reference_poles() {
        let tm = transfer_matrix(&p, k).unwrap();
        assert!(tm.relative_residual() < 1e-10);
        assert!(siegert_residual(&p, k.conj()).unwrap().norm() > 1e-3);
    }
}

#[test]
fn near_closed_well_approaches_infinite_well() {
    let l = 1.0;
    let p = PotentialProfile::double_barrier(1e4, l, 0.05).unwrap();
    let poles = find_poles(&p, SearchRegion::new((1.3, 1.7), (-0.05, 0.0)).unwrap()).unwrap();
    assert_eq!(poles.len(), 1, "{poles:?}");
    let k1 = poles[0].k;
    let k0 = PI / (2.0 * l);
    assert!((k1.re - k0).abs() / k0 < 0.01, "{k1} vs {k0}");
    assert!(k1.im.abs() < 1e-3 * k1.re, "{k1}");
}

#[test]
fn poles_sorted_longest_lived_first() {
    let ks = reference_poles();
    assert!(ks.len() >= 2);
    for w in ks.windows(2) {
        assert!(w[1].im.abs() > w[0].im.abs());
    }
}

#[test]
fn exact_rate_from_complex_energy() {
    // Im(k²) = 2·Re k·Im k exactly; the quadratic term only enters Re E
    let (g, _) = pole_to_rate(C::new(1.0, -0.005), 1.0).unwrap();
    assert!((g - 0.01).abs() < 1e-15, "{g}");
}

fn uranium_pole(n: usize) -> f64 {
    let r0 = nuclear_radius(234.0, 1.6);
    coulomb_staircase_resonance(90.0, r0, 4.27, n).unwrap().1
}

#[test]
fn uranium_staircase_within_factor_three() {
    let g = uranium_pole(64);
    let ratio = g / uranium::GAMMA_POLE;
    assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "Γ = {g:e}");
    let tau = 1.0 / g;
    let tau_ref = 1.0 / uranium::GAMMA_POLE;
    assert!(tau / tau_ref > 1.0 / 3.0 && tau / tau_ref < 3.0);
}

#[test]
fn uranium_staircase_refinement() {
    let coarse = uranium_pole(64);
    let fine = uranium_pole(128);
    assert!((fine - coarse).abs() / fine < 0.1, "{coarse:e} vs {fine:e}");
}
