use leakycav_core::constants::uranium;
use leakycav_core::gamow_semiclassical::{
    collision_frequency, energy_grid, gamow_exponent, gamow_exponent_closed_form, gamow_rate, geiger_nuttall_scan,
    AlphaDecayScenario,
};
use proptest::prelude::*;

fn uranium_scenario(r0_param: f64) -> AlphaDecayScenario {
    AlphaDecayScenario::new(4.27, 90.0, 234.0).unwrap().with_radius_parameter(r0_param).unwrap()
}

proptest! {
    #[test]
    fn rate_increases_with_energy(e in 3.0f64..9.0, de in 0.01f64..1.0, z in 60.0f64..100.0) {
        let s = AlphaDecayScenario { z_daughter: z, ..uranium_scenario(1.2) };
        let lo = gamow_rate(&AlphaDecayScenario { e_alpha: e, ..s }).unwrap();
        let hi = gamow_rate(&AlphaDecayScenario { e_alpha: e + de, ..s }).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn quadrature_agrees_with_closed_form(e in 3.0f64..12.0, z in 50.0f64..100.0, r0 in 1.0f64..1.8) {
        let s = AlphaDecayScenario { e_alpha: e, z_daughter: z, ..uranium_scenario(r0) };
        prop_assume!(s.e_alpha < s.coulomb(s.r0));
        let g = gamow_exponent(&s).unwrap();
        let c = gamow_exponent_closed_form(&s);
        prop_assert!(((g - c) / c).abs() < 1e-6);
    }
}

#[test]
fn full_transmission_gives_collision_frequency() {
    let s = uranium_scenario(1.2);
    let top = s.coulomb(s.r0);
    let at_top = AlphaDecayScenario { e_alpha: top * (1.0 - 1e-14), ..s };
    let g = gamow_rate(&at_top).unwrap();
    assert!((g / collision_frequency(&at_top) - 1.0).abs() < 1e-5);
}

#[test]
fn uranium_rate_within_factor_three() {
    let g = gamow_rate(&uranium_scenario(1.6)).unwrap();
    let ratio = g / uranium::GAMMA_GAMOW;
    assert!(ratio > 1.0 / 3.0 && ratio < 3.0, "Γ_G = {g:e}");
    let vs_exp = (g / uranium::GAMMA_EXP).log10().abs();
    assert!(vs_exp < 1.0, "Γ_G = {g:e}");
}

#[test]
fn geiger_nuttall_is_linear() {
    for z in [82.0, 90.0] {
        let scan = geiger_nuttall_scan(z, &energy_grid(4.0, 9.0, 26), &uranium_scenario(1.2)).unwrap();
        assert!(scan.fit.r_squared > 0.99, "R² = {}", scan.fit.r_squared);
        assert!(scan.fit.slope < 0.0);
    }
}
