use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regmhd::dynamics::{
    curl_consistency_defect, dissipation_symbol, rhs_magnetic, rhs_velocity, rhs_vorticity, Dissipation, Equation,
    RhsEvaluator,
};
use regmhd::fields::vorticity_of;
use regmhd::harness::check::random_state;
use regmhd::harness::initial::random_solenoidal;
use regmhd::*;

fn config() -> impl Strategy<Value = SystemConfig> {
    prop_oneof![
        (0.0..=2.0f64, 0.0..=2.0f64, 0.0..=2.0f64).prop_map(|(a, b, c)| SystemConfig::general(a, b, c).unwrap()),
        (0.0..=2.0f64, 0.0..=2.0f64).prop_map(|(b, c)| SystemConfig::thm1(b, c).unwrap()),
        (0.05..=2.0f64).prop_map(|a| SystemConfig::thm2(a, 2.0 - a, LogSymbol::Log14).unwrap()),
        Just(SystemConfig::thm3(LogSymbol::Log12).unwrap()),
        (0.0..=2.0f64).prop_map(|b| SystemConfig::appendix_a(b).unwrap()),
    ]
}

fn state(config: &SystemConfig, seed: u64) -> SimState {
    let grid = make_grid(32).unwrap();
    random_state(&grid, config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // d/dt of the energy pairing vanishes without dissipation
    #[test]
    fn nonlinear_terms_conserve_energy(cfg in config(), seed in any::<u64>()) {
        let s = state(&cfg, seed);
        let rv = rhs_velocity(&s, &cfg, Dissipation::Omitted).unwrap();
        let rb = rhs_magnetic(&s, &cfg, Dissipation::Omitted).unwrap();
        let total = rv.inner(s.u()).unwrap() + rb.inner(s.b()).unwrap();
        let scale = rv.norm_sq().sqrt() * s.u().norm_sq().sqrt() + rb.norm_sq().sqrt() * s.b().norm_sq().sqrt();
        prop_assert!(total.abs() <= 1e-12 * scale, "{total} vs {scale}");
    }

    #[test]
    fn rhs_is_solenoidal_and_keeps_means(cfg in config(), seed in any::<u64>(), m in -1.0..1.0f64) {
        let s = state(&cfg, seed);
        let grid = s.grid().clone();
        let mean = SpectralScalar::single_mode(&grid, 0, 0, Complex64::new(m, 0.0)).unwrap();
        let shift = SpectralVector::new(mean.clone(), mean.scaled(-0.5)).unwrap();
        let s = SimState::new(s.v().add(&shift).unwrap(), s.b().add(&shift).unwrap(), 0.0, &cfg).unwrap();
        for diss in [Dissipation::Explicit, Dissipation::Omitted] {
            let rv = rhs_velocity(&s, &cfg, diss).unwrap();
            let rb = rhs_magnetic(&s, &cfg, diss).unwrap();
            for r in [&rv, &rb] {
                prop_assert!(r.divergence_defect() <= 1e-12);
                for c in r.components() {
                    prop_assert!(c.coeff(0, 0).norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn magnetic_forms_agree(cfg in config(), seed in any::<u64>()) {
        let s = state(&cfg, seed);
        let ev = RhsEvaluator::new(&cfg, s.grid()).unwrap();
        let adv = ev.magnetic(&s, Dissipation::Omitted).unwrap();
        let div = ev.magnetic_divergence_form(&s, Dissipation::Omitted).unwrap();
        prop_assert!(adv.sub(&div).unwrap().norm_sq().sqrt() <= 1e-12 * adv.norm_sq().sqrt());
    }

    #[test]
    fn vorticity_form_is_curl_of_primitive(cfg in config(), seed in any::<u64>()) {
        let s = state(&cfg, seed);
        let ev = RhsEvaluator::new(&cfg, s.grid()).unwrap();
        prop_assert!(curl_consistency_defect(&ev, &s).unwrap() <= 1e-11);
        let w = rhs_vorticity(&s, &cfg, Dissipation::Explicit).unwrap();
        let curl = vorticity_of(&rhs_velocity(&s, &cfg, Dissipation::Explicit).unwrap());
        prop_assert!(w.0.sub(&curl.0).unwrap().norm_sq().sqrt() <= 1e-11 * curl.0.norm_sq().sqrt());
    }

    #[test]
    fn cached_fields_track_v(cfg in config(), seed in any::<u64>()) {
        let s = state(&cfg, seed);
        prop_assert!(s.cache_deviation(&cfg).unwrap() <= 1e-14);
        prop_assert!(s.v().divergence_defect() <= 1e-12 && s.b().divergence_defect() <= 1e-12);
    }
}

#[test]
fn zero_state_has_zero_rhs() {
    let grid = make_grid(16).unwrap();
    for cfg in [SystemConfig::thm1(0.8, 0.5).unwrap(), SystemConfig::appendix_a(0.6).unwrap()] {
        let s = SimState::zero(&grid, &cfg).unwrap();
        assert_eq!(rhs_velocity(&s, &cfg, Dissipation::Explicit).unwrap().norm_sq(), 0.0);
        assert_eq!(rhs_magnetic(&s, &cfg, Dissipation::Explicit).unwrap().norm_sq(), 0.0);
        assert_eq!(rhs_vorticity(&s, &cfg, Dissipation::Explicit).unwrap().0.norm_sq(), 0.0);
    }
}

#[test]
fn velocity_pairing_vanishes_without_field() {
    let grid = make_grid(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for cfg in [
        SystemConfig::thm1(0.8, 0.5).unwrap(),
        SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap(),
        SystemConfig::appendix_a(0.6).unwrap(),
    ] {
        let v = random_solenoidal(&grid, &mut rng, 1, 10).unwrap();
        let s = SimState::new(v, SpectralVector::zeros(&grid), 0.0, &cfg).unwrap();
        let r = rhs_velocity(&s, &cfg, Dissipation::Omitted).unwrap();
        let pairing = r.inner(s.u()).unwrap();
        assert!(pairing.abs() <= 1e-13 * r.norm_sq().sqrt() * s.u().norm_sq().sqrt(), "{cfg:?}: {pairing}");
        // with b = 0 the magnetic equation is inert
        assert_eq!(rhs_magnetic(&s, &cfg, Dissipation::Explicit).unwrap().norm_sq(), 0.0);
    }
}

#[test]
fn dissipation_symbols_per_variant() {
    let grid = make_grid(16).unwrap();
    let zero = |spec: &SymbolSpec| {
        regmhd::spectral::eval_symbol(spec, &grid)
            .unwrap()
            .values()
            .iter()
            .all(|&m| m == 0.0)
    };
    let thm1 = SystemConfig::thm1(0.8, 0.5).unwrap();
    assert!(zero(&dissipation_symbol(&thm1, Equation::Velocity)));
    assert!(!zero(&dissipation_symbol(&thm1, Equation::Magnetic)));
    let thm3 = SystemConfig::thm3(LogSymbol::Log12).unwrap();
    assert!(zero(&dissipation_symbol(&thm3, Equation::Velocity)));
    assert!(zero(&dissipation_symbol(&thm3, Equation::Magnetic)));
    let thm2 = SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap();
    let m = dissipation_symbol(&thm2, Equation::Velocity).eval_k_sq(1.0).unwrap();
    // |k|^{2α}/g² at |k| = 1 is 1/√ln(e+1)
    let want = 1.0 / (std::f64::consts::E + 1.0).ln().sqrt();
    assert!((m - want).abs() < 1e-15, "{m} vs {want}");
    assert!(zero(&dissipation_symbol(&thm2, Equation::Magnetic)));
}
