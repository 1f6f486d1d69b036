use heatode::algebra::{int, GradedMonomial, GradedPoly};
use heatode::dynsys::{reduce_sigma_system, SystemSpec};
use heatode::heatcheck::symbolic_heat_residual;
use heatode::jetcalc::{build_d_family, chazy12_parameter, rescale_dependent};
use heatode::phi::{build_phi, default_c, phi_to_sigma_coords, sigma_series};
use heatode::verify::{run_suite, SuiteOptions, SUITES};

fn c4(v: i64) -> GradedPoly {
    GradedPoly::term(int(v), GradedMonomial::from_pairs(&[(2, 2)]))
}

#[test]
fn chazy_three_from_c4_24() {
    let r = rescale_dependent(&build_d_family(2, &c4(24)).unwrap(), &int(-6)).unwrap();
    assert_eq!(r.monic.to_string_in("y"), "y''' - 2*y*y'' + 3*y'^2");
}

#[test]
fn chazy_twelve_parameters() {
    assert_eq!(chazy12_parameter(&int(-3)).unwrap(), int(4));
    // (24 - c4)/216 = -4/(k^2 - 36) at c4 = 240 gives k^2 = 40
    assert_eq!(chazy12_parameter(&int(240)).unwrap(), int(40));
}

#[test]
fn sigma_through_phi() {
    let phi = build_phi(2, &c4(24), &int(-6), 1, 6).unwrap();
    assert_eq!(phi_to_sigma_coords(&phi).unwrap(), sigma_series(6).unwrap().coeffs[2..]);
    assert_eq!(reduce_sigma_system().unwrap().c4, Some(int(24)));
}

#[test]
fn residual_vanishes_for_c4_24() {
    let spec = SystemSpec::reduced(2, &c4(24), 1).unwrap();
    let phi = build_phi(2, &c4(24), &default_c(1), 1, 6).unwrap();
    let rep = symbolic_heat_residual("c4=24", &spec, &phi).unwrap();
    assert!(rep.passes());
    assert_eq!(rep.orders_checked, vec![1, 3, 5, 7, 9, 11]);
}

#[test]
fn suites_are_deterministic() {
    let opts = SuiteOptions { seed: 3, max_n: Some(3), ..SuiteOptions::default() };
    for name in ["rational", "sl2", "phi-equiv"] {
        let a = run_suite(name, &opts).unwrap().to_json();
        let b = run_suite(name, &opts).unwrap().to_json();
        assert_eq!(a, b, "{name}");
    }
    assert!(SUITES.contains(&"addendum"));
}
