use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use regmhd::diagnostics::littlewood_paley::{block_support, required_j_max};
use regmhd::diagnostics::{
    bernstein_check, besov_norm, energy, energy_balance_residual, energy_parts, growth_condition_report,
    growth_condition_report_fn, h_functional, linf_norm, linf_norm_oversampled, lp_decompose, lp_norm,
    monitors_for, multiplier_bound_check, sobolev_norm, v_functional, DiagnosticsEngine, GrowthTrend,
};
use regmhd::harness::check::random_state;
use regmhd::harness::initial::random_solenoidal;
use regmhd::spectral::GrowthForm;
use regmhd::*;

fn configs() -> Vec<SystemConfig> {
    vec![
        SystemConfig::general(1.0, 0.8, 0.5).unwrap(),
        SystemConfig::thm1(0.8, 1.5).unwrap(),
        SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap(),
        SystemConfig::thm3(LogSymbol::Log12LogLog).unwrap(),
        SystemConfig::appendix_a(0.6).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // E = ‖u‖² + ‖Λ^γ u/g‖² + ‖b‖², rebuilt mode by mode
    #[test]
    fn energy_is_the_sum_of_its_parts(seed in any::<u64>(), which in 0usize..5) {
        let config = &configs()[which];
        let grid = make_grid(32).unwrap();
        let s = random_state(&grid, config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut filtered = 0.0;
        for c in s.u().components() {
            for (idx, z) in c.coeffs().iter().enumerate() {
                let (k1, k2) = grid.mode(idx);
                let q = (k1 * k1 + k2 * k2) as f64;
                let w = config.g().map_or(1.0, |g| g.eval(q.sqrt()));
                let p = if config.gamma() == 0.0 { 1.0 } else { q.powf(config.gamma()) };
                filtered += p / (w * w) * z.norm_sqr();
            }
        }
        let u_sq = sobolev_norm(s.u(), 0.0).unwrap().powi(2);
        let b_sq = sobolev_norm(s.b(), 0.0).unwrap().powi(2);
        let e = energy(&s, config).unwrap();
        let want = u_sq + filtered + b_sq;
        prop_assert!((e - want).abs() <= 1e-13 * want);
        let parts = energy_parts(&s, config).unwrap();
        prop_assert!((parts.total() - e).abs() <= 1e-13 * e);
        // the pairing form agrees with the parts
        let pairing = s.u().inner(s.v()).unwrap() + s.b().norm_sq();
        prop_assert!((pairing - e).abs() <= 1e-13 * e);
    }

    #[test]
    fn every_record_is_finite_and_nonnegative(seed in any::<u64>(), which in 0usize..5) {
        let config = &configs()[which];
        let grid = make_grid(32).unwrap();
        let s = random_state(&grid, config, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let engine = DiagnosticsEngine::with_defaults(config);
        let r = engine.record(&s, 0, 0.0).unwrap();
        prop_assert!(r.is_finite());
        prop_assert!(r.monitors.iter().all(|(_, v)| *v >= 0.0));
        prop_assert!(r.dissipation >= 0.0 && r.energy_total > 0.0);
        prop_assert!(r.residuals.unwrap().max() <= 1e-12);
    }
}

#[test]
fn linf_examples() {
    let grid = make_grid(64).unwrap();
    let f = grid.forward(&grid.sample(|x, _| x.cos())).unwrap();
    assert!((linf_norm(&f).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(linf_norm(&SpectralScalar::zeros(&grid)).unwrap(), 0.0);
    // low band so that the collocation maximum is resolved
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let v = random_solenoidal(&grid, &mut rng, 1, 4).unwrap();
        let coarse = linf_norm(&v).unwrap();
        let fine = linf_norm_oversampled(&v, 2).unwrap();
        assert!(fine >= coarse * (1.0 - 1e-14));
        assert!((fine - coarse) / fine <= 0.02, "{coarse} {fine}");
    }
    // Lᵖ norms are monotone in p for mean-normalized measure
    let v = random_solenoidal(&grid, &mut rng, 1, 8).unwrap();
    let x = v.x();
    let (l1, l2, l4) = (lp_norm(x, 1.0).unwrap(), lp_norm(x, 2.0).unwrap(), lp_norm(x, 4.0).unwrap());
    assert!(l1 <= l2 && l2 <= l4 && l4 <= linf_norm(x).unwrap());
    assert!((l2 - x.norm_sq().sqrt()).abs() < 1e-13);
}

#[test]
fn functionals() {
    let grid = make_grid(32).unwrap();
    let thm2 = SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap();
    let zero = SimState::zero(&grid, &thm2).unwrap();
    assert_eq!(v_functional(&zero, &thm2).unwrap(), 0.0);
    assert_eq!(h_functional(&zero, &thm2).unwrap(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let v = random_solenoidal(&grid, &mut rng, 1, 6).unwrap();
    let s = SimState::new(v.clone(), SpectralVector::zeros(&grid), 0.0, &thm2).unwrap();
    assert!((v_functional(&s, &thm2).unwrap() - v.norm_sq()).abs() < 1e-15);

    // single mode: ‖∇b‖ = |k|‖b‖ and ‖b‖_∞ from the amplitude
    let psi = SpectralScalar::single_mode(&grid, 2, 1, Complex64::new(0.2, 0.0)).unwrap();
    let b = regmhd::fields::perp_gradient(&psi);
    let s = SimState::new(SpectralVector::zeros(&grid), b.clone(), 0.0, &thm2).unwrap();
    let b_inf = linf_norm(&b).unwrap();
    let grad = 5f64.sqrt() * b.norm_sq().sqrt();
    let want = b_inf.powi(3) + b_inf.powi(6) + grad.powi(3);
    assert!((v_functional(&s, &thm2).unwrap() - want).abs() < 1e-13 * want);
    // |b| = 0.4·√5·|sin(2x+y)| peaks at 0.4·√5
    assert!((b_inf - 0.4 * 5f64.sqrt()).abs() < 1e-2);

    let thm1 = SystemConfig::thm1(0.8, 0.5).unwrap();
    let s1 = SimState::zero(&grid, &thm1).unwrap();
    assert!(matches!(h_functional(&s1, &thm1), Err(Error::WrongVariant { .. })));
    assert!(v_functional(&s1, &thm1).is_err());
    let thm3 = SystemConfig::thm3(LogSymbol::Log12).unwrap();
    assert!(h_functional(&SimState::zero(&grid, &thm3).unwrap(), &thm3).is_err());
}

#[test]
fn multiplier_bounds() {
    let grid = make_grid(64).unwrap();
    let ok = multiplier_bound_check(1.0, 0.0, 0.0, &grid).unwrap();
    assert!(ok.claimed() && ok.symbol_ok && ok.max_symbol <= 1.0);
    let edge = multiplier_bound_check(0.5, 1.0, 2.0, &grid).unwrap();
    assert!(edge.claimed() && edge.symbol_ok);
    let bad = multiplier_bound_check(0.5, 0.0, 2.5, &grid).unwrap();
    assert!(!bad.claimed() && !bad.symbol_ok && bad.max_symbol > 1.0);
    assert!(multiplier_bound_check(2.5, 0.0, 0.0, &grid).is_err());
}

#[test]
fn growth_tables() {
    for g in [LogSymbol::Log14, LogSymbol::Log14LogLog, LogSymbol::Const1] {
        let rep = growth_condition_report(&g, GrowthForm::Squared, 1e12).unwrap();
        assert_eq!(rep.trend, GrowthTrend::Growing, "{g:?}");
        assert!(rep.table.windows(2).all(|w| w[1].1 > w[0].1));
    }
    for g in [LogSymbol::Log12, LogSymbol::Log12LogLogLog] {
        let rep = growth_condition_report(&g, GrowthForm::Plain, 1e12).unwrap();
        assert_eq!(rep.trend, GrowthTrend::Growing, "{g:?}");
    }
    // g = e^τ is far too strong: the table freezes
    let rep = growth_condition_report_fn(f64::exp, GrowthForm::Squared, 1e12).unwrap();
    assert_eq!(rep.trend, GrowthTrend::Saturating);
    // the closed form for g ≡ 1 along the whole ladder
    let rep = growth_condition_report(&LogSymbol::Const1, GrowthForm::Squared, 1e12).unwrap();
    for (x, i) in rep.table {
        assert!((i - 2.0 * (x.ln().sqrt() - 1.0)).abs() < 1e-9, "{x}: {i}");
    }
    assert!(growth_condition_report(&LogSymbol::Log14, GrowthForm::Squared, 5.0).is_err());
}

#[test]
fn littlewood_paley_edges() {
    let grid = make_grid(64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let f = random_solenoidal(&grid, &mut rng, 1, 21).unwrap().x().clone();
    let need = required_j_max(&grid);
    assert!(lp_decompose(&f, Some(need - 1)).is_err());
    let blocks = lp_decompose(&f, Some(need + 2)).unwrap();
    assert_eq!(blocks.len() as i32, need + 4);
    for b in &blocks {
        let (lo, hi) = block_support(b.index);
        for (idx, c) in b.field.coeffs().iter().enumerate() {
            if c.norm() > 0.0 {
                let r = grid.k_sq()[idx].sqrt();
                assert!(r >= lo && r <= hi, "block {} radius {r}", b.index);
            }
        }
    }
    // B^0_{2,2} is the root of Σ‖Δⱼf‖²
    let sum: f64 = blocks.iter().map(|b| b.field.norm_sq()).sum();
    assert!((besov_norm(&f, 0.0, 2.0, 2.0).unwrap() - sum.sqrt()).abs() < 1e-14);
    let sup = besov_norm(&f, 1.0, 2.0, f64::INFINITY).unwrap();
    assert!(sup > 0.0);
    // the low block only carries the upper bracket
    let low = blocks[0].field.clone();
    let rep = bernstein_check(&low, -1, 1.0, 2.0, 2.0).unwrap();
    assert!(rep.lower_ratio.is_none() && rep.holds());
    // single mode |k| = 2^j sits exactly at ratio 1
    let e = SpectralScalar::single_mode(&grid, 0, 4, Complex64::new(1.0, 0.0)).unwrap();
    let rep = bernstein_check(&e, 2, 2.0, 2.0, 2.0).unwrap();
    assert!((rep.lower_ratio.unwrap() - 1.0).abs() < 1e-14 && rep.holds());
    // Lᵃ → Lᵇ on a block
    let rep = bernstein_check(&blocks[4].field, 3, 0.5, 1.0, 4.0).unwrap();
    assert!(rep.holds(), "{rep:?}");
    assert!(bernstein_check(&blocks[4].field, 3, 0.5, 3.0, 4.0).is_err());
}

#[test]
fn monitor_labels_and_residual_order_checks() {
    let labels: Vec<String> = monitors_for(&[0.5, 2.0]).iter().map(|m| m.label()).collect();
    assert_eq!(labels.len(), 8);
    assert!(labels.contains(&"omega_inf".to_string()));
    let grid = make_grid(16).unwrap();
    let config = SystemConfig::thm1(0.8, 0.5).unwrap();
    let engine = DiagnosticsEngine::with_defaults(&config);
    let s = SimState::zero(&grid, &config).unwrap();
    let a = engine.record(&s, 3, 0.0).unwrap();
    let b = engine.record(&s, 1, 0.0).unwrap();
    assert!(energy_balance_residual(&a, &b).is_err());
}
