//! The identity suite behind the `check` command.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    cancellation_residuals, energy, energy_balance_residual, lp_decompose, lp_reconstruct, partial_integral,
    DiagnosticsEngine, RecordingSink,
};
use crate::dynamics::{curl_consistency_defect, dissipation_symbol, Equation, RhsEvaluator, SimState, SystemConfig};
use crate::error::Result;
use crate::spectral::{eval_symbol, make_grid, GrowthForm, Grid, LogSymbol, SpectralScalar};
use crate::timestepper::{run, Integrator, StepperConfig};

use super::config::RunSpec;
use super::initial::{make_initial_data, random_solenoidal};
use super::io::{load_checkpoint, write_checkpoint};

#[derive(Clone, Debug)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.items {
            writeln!(f, "{} {:<28} {}", if i.passed { "PASS" } else { "FAIL" }, i.name, i.detail)?;
        }
        Ok(())
    }
}

/// Random solenoidal state filling the dealiased band.
pub fn random_state(grid: &Arc<Grid>, config: &SystemConfig, rng: &mut impl Rng) -> Result<SimState> {
    let k = grid.dealias_cutoff() as usize;
    let v = random_solenoidal(grid, rng, 1, k)?;
    let b = random_solenoidal(grid, rng, 1, k)?;
    SimState::new(v, b, 0.0, config)
}

fn item(name: &'static str, result: Result<(bool, String)>) -> CheckItem {
    match result {
        Ok((passed, detail)) => CheckItem { name, passed, detail },
        Err(e) => CheckItem {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Relative difference in units of the spacing of `b`.
pub fn ulps(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let spacing = f64::EPSILON * b.abs().max(f64::MIN_POSITIVE);
    (a - b).abs() / spacing
}

fn multiplier_exactness(config: &SystemConfig, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let specs = [
        config.filter_symbol(),
        config.inverse_filter_symbol(),
        dissipation_symbol(config, Equation::Velocity),
        dissipation_symbol(config, Equation::Magnetic),
    ];
    let k = grid.dealias_cutoff();
    let mut worst = 0.0_f64;
    for spec in &specs {
        let table = eval_symbol(spec, grid)?;
        for _ in 0..20 {
            let (k1, k2) = (rng.random_range(-k..=k), rng.random_range(-k..=k));
            if (k1, k2) == (0, 0) {
                continue;
            }
            let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let f = SpectralScalar::single_mode(grid, k1, k2, amp)?;
            let out = table.apply(&f)?;
            let m = spec.eval_k_sq((k1 * k1 + k2 * k2) as f64)?;
            let expect = amp * m;
            let got = out.coeff(k1, k2);
            worst = worst.max(ulps(got.re, expect.re)).max(ulps(got.im, expect.im));
        }
    }
    Ok((worst <= 4.0, format!("max {worst} ulp")))
}

fn cancellations(config: &SystemConfig, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let s = random_state(grid, config, rng)?;
        worst = worst.max(cancellation_residuals(&s)?.max());
    }
    Ok((worst <= 1e-12, format!("max residual {worst:.3e}")))
}

fn curl_consistency(config: &SystemConfig, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let ev = RhsEvaluator::new(config, grid)?;
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let s = random_state(grid, config, rng)?;
        worst = worst.max(curl_consistency_defect(&ev, &s)?);
    }
    Ok((worst <= 1e-11, format!("max relative defect {worst:.3e}")))
}

fn littlewood_paley(config: &SystemConfig, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let s = random_state(grid, config, rng)?;
    let f = &s.omega().0;
    let blocks = lp_decompose(f, None)?;
    let rec = lp_reconstruct(&blocks)?;
    let norm = f.norm_sq();
    let err = rec.sub(f)?.norm_sq().sqrt() / norm.sqrt();
    let sum: f64 = blocks.iter().map(|b| b.field.norm_sq()).sum();
    let frame = sum / norm;
    let ok = err <= 1e-12 && (0.5 - 1e-12..=1.0 + 1e-12).contains(&frame);
    Ok((ok, format!("reconstruction {err:.3e}, Σ‖Δⱼf‖²/‖f‖² = {frame:.4}")))
}

fn semigroup(config: &SystemConfig, grid: &Arc<Grid>) -> Result<(bool, String)> {
    let b_mode = SpectralScalar::single_mode(grid, 1, 0, Complex64::new(0.5, 0.0))?;
    let zero = SpectralScalar::zeros(grid);
    let b = crate::fields::SpectralVector::new(zero.clone(), b_mode)?;
    let v_mode = SpectralScalar::single_mode(grid, 2, 1, Complex64::new(0.0, 0.3))?;
    let v = crate::fields::perp_gradient(&v_mode);
    let s0 = SimState::new(v, b, 0.0, config)?;
    let mut integ = Integrator::new(config, grid, Default::default())?.linear_only(true);
    let dt = 1e-3;
    let steps = 100;
    let mut s = s0.clone();
    for _ in 0..steps {
        s = integ.advance(&s, dt)?.state;
    }
    let t = dt * steps as f64;
    let mv = eval_symbol(&dissipation_symbol(config, Equation::Velocity), grid)?;
    let mb = eval_symbol(&dissipation_symbol(config, Equation::Magnetic), grid)?;
    let mut worst = 0.0_f64;
    for (now, then, table) in [(s.v(), s0.v(), &mv), (s.b(), s0.b(), &mb)] {
        for c in 0..2 {
            for (i, (a, b)) in now.components()[c].coeffs().iter().zip(then.components()[c].coeffs()).enumerate() {
                if b.norm() > 0.0 {
                    let expect = b * (-table.values()[i] * t).exp();
                    worst = worst.max((a - expect).norm() / expect.norm());
                }
            }
        }
    }
    Ok((worst <= 1e-13, format!("max relative error {worst:.3e} after {steps} steps")))
}

fn checkpoint_roundtrip(config: &SystemConfig, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let s = random_state(grid, config, rng)?;
    let path = std::env::temp_dir().join(format!("regmhd-check-{}-{}.chk", std::process::id(), rng.random::<u64>()));
    write_checkpoint(&s, config, &path)?;
    let chk = load_checkpoint(&path);
    let _ = std::fs::remove_file(&path);
    let chk = chk?;
    let original = [s.v().x(), s.v().y(), s.b().x(), s.b().y()];
    let same = chk
        .arrays
        .iter()
        .zip(original)
        .all(|(a, b)| a.iter().zip(b.coeffs()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    Ok((same && chk.t == s.t(), if same { "bit-identical".into() } else { "coefficients differ".into() }))
}

fn energy_balance(spec: &RunSpec, grid: &Arc<Grid>) -> Result<(bool, String)> {
    let s0 = make_initial_data(&spec.initial_data, grid, &spec.system)?;
    let mut sc = StepperConfig::new(spec.stepper.dt, s0.t() + 20.0 * spec.stepper.dt);
    sc.scheme = spec.stepper.scheme;
    sc.cfl_target = spec.stepper.cfl_target;
    sc.diagnostics_every = 20;
    let mut sink = RecordingSink::new(DiagnosticsEngine::new(&spec.system, Vec::new(), Default::default()));
    run(&s0, &spec.system, &sc, &mut sink)?;
    let recs = sink.records();
    let first = recs.first().expect("initial record");
    let last = recs.last().expect("final record");
    let r = energy_balance_residual(first, last)?;
    let e0 = energy(&s0, &spec.system)?;
    Ok((r <= 1e-8, format!("20 steps: residual {r:.3e} (E₀ = {e0:.6e})")))
}

fn growth(config: &SystemConfig) -> Result<(bool, String)> {
    let x = 4f64.exp();
    let i = partial_integral(&LogSymbol::Const1, GrowthForm::Squared, x)?;
    let ok = (i - 2.0).abs() <= 1e-6;
    let mut detail = format!("I(e⁴) for g ≡ 1: {i:.12}");
    if let Some(g) = config.g() {
        let form = if config.variant() == crate::SystemVariant::Thm3 {
            GrowthForm::Plain
        } else {
            GrowthForm::Squared
        };
        detail.push_str(&format!("; {} satisfies the growth condition: {}", g.family_id(), g.satisfies_growth(form)));
    }
    Ok((ok, detail))
}

/// Runs every identity check for the configured system at the configured
/// grid size (capped at 128 to keep the suite quick).
pub fn run_identity_suite(spec: &RunSpec) -> Result<CheckReport> {
    let config = &spec.system;
    let grid = make_grid(spec.grid_n.min(128))?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let items = vec![
        item("multiplier exactness", multiplier_exactness(config, &grid, &mut rng)),
        item("cancellation identities", cancellations(config, &grid, &mut rng)),
        item("curl consistency", curl_consistency(config, &grid, &mut rng)),
        item("littlewood-paley", littlewood_paley(config, &grid, &mut rng)),
        item("semigroup exactness", semigroup(config, &grid)),
        item("checkpoint roundtrip", checkpoint_roundtrip(config, &grid, &mut rng)),
        item("energy balance", energy_balance(spec, &grid)),
        item("growth quadrature", growth(config)),
    ];
    Ok(CheckReport { items })
}
