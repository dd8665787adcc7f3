//! Flat `key = value` run configuration with dotted keys.
//!
//! ```text
//! # comment
//! system.variant = thm1
//! system.beta = 0.8
//! system.gamma = 0.5
//! grid.n = 128
//! stepper.dt = 0.005
//! stepper.t_end = 5
//! initial.kind = taylor_green_mhd
//! diagnostics.sobolev_exponents = 0.3, 1, 1.8
//! output.dir = runs/thm1
//! ```
//!
//! Unknown and repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::{default_sobolev_exponents, EngineOptions};
use crate::dynamics::{SystemConfig, SystemVariant};
use crate::error::{Error, Result};
use crate::spectral::{LogSymbol, MonotoneTable};
use crate::timestepper::{Scheme, StepperConfig};

use super::initial::InitialData;

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub system: SystemConfig,
    pub stepper: StepperConfig,
    pub grid_n: usize,
    pub initial_data: InitialData,
    pub output_dir: Option<PathBuf>,
    pub monitored_sobolev_exponents: Vec<f64>,
    pub diagnostics: EngineOptions,
    /// Abort when a cancellation residual exceeds this value.
    pub residual_tolerance: Option<f64>,
    /// Write a checkpoint of the final state into the output directory.
    pub write_final_checkpoint: bool,
}

pub const KEYS: &[&str] = &[
    "system.variant",
    "system.alpha",
    "system.beta",
    "system.gamma",
    "system.g",
    "system.g_table",
    "grid.n",
    "stepper.scheme",
    "stepper.dt",
    "stepper.cfl_target",
    "stepper.t_end",
    "stepper.adaptive",
    "stepper.blowup_ceiling",
    "stepper.linear_only",
    "initial.kind",
    "initial.amplitude",
    "initial.seed",
    "initial.k_min",
    "initial.k_max",
    "initial.path",
    "diagnostics.every",
    "diagnostics.sobolev_exponents",
    "diagnostics.residuals",
    "diagnostics.residual_tolerance",
    "diagnostics.lp_spectrum",
    "diagnostics.oversample_linf",
    "output.dir",
    "output.checkpoint",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected `key = value`, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {line_no}: unknown key {k:?}")));
            }
            if let Some((prev, _)) = map.insert(k.to_string(), (line_no, v.to_string())) {
                return Err(Error::Config(format!(
                    "line {line_no}: key {k:?} already set on line {prev}"
                )));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Config(format!("line {line}: {key} = {v:?}: {e}"))),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some((line, v)) = self.map.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {line}: {key}: {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Parses `τ:g, τ:g, …` knots.
pub fn parse_table(text: &str) -> Result<MonotoneTable> {
    let knots = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("table knot {pair:?} must be `tau:g`")))?;
            let p = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("table knot {pair:?}: {e}")))
            };
            Ok((p(a)?, p(b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    MonotoneTable::new(knots)
}

fn parse_g(entries: &Entries) -> Result<Option<LogSymbol>> {
    let Some(id) = entries.raw("system.g") else {
        if entries.raw("system.g_table").is_some() {
            return Err(Error::Config("system.g_table requires system.g = custom_table".into()));
        }
        return Ok(None);
    };
    if id == "custom_table" {
        let table = entries
            .raw("system.g_table")
            .ok_or_else(|| Error::Config("system.g = custom_table requires system.g_table".into()))?;
        return Ok(Some(LogSymbol::Table(parse_table(table)?)));
    }
    if entries.raw("system.g_table").is_some() {
        return Err(Error::Config("system.g_table is only used with system.g = custom_table".into()));
    }
    LogSymbol::from_family_id(id).map(Some).ok_or_else(|| {
        Error::Config(format!(
            "unknown g family {id:?}; expected one of {} or custom_table",
            LogSymbol::FAMILIES.join(", ")
        ))
    })
}

fn parse_system(e: &Entries) -> Result<SystemConfig> {
    let variant_name = e
        .raw("system.variant")
        .ok_or_else(|| Error::Config("system.variant is required".into()))?;
    let variant = SystemVariant::parse(variant_name).ok_or_else(|| {
        Error::Config(format!(
            "unknown variant {variant_name:?}; expected one of {}",
            SystemVariant::ALL.map(|v| v.name()).join(", ")
        ))
    })?;
    let alpha: Option<f64> = e.get("system.alpha")?;
    let beta: Option<f64> = e.get("system.beta")?;
    let gamma: Option<f64> = e.get("system.gamma")?;
    // exponents fixed by the variant default to their required values
    let (da, db, dg) = match variant {
        SystemVariant::General | SystemVariant::Thm1 => (0.0, 0.0, 0.0),
        SystemVariant::Thm2 => {
            let a = alpha.unwrap_or(1.0);
            (a, 0.0, 2.0 - a)
        }
        SystemVariant::Thm3 => (0.0, 0.0, 2.0),
        SystemVariant::AppendixA => (0.0, 0.0, 1.0),
    };
    SystemConfig::new(
        variant,
        alpha.unwrap_or(da),
        beta.unwrap_or(db),
        gamma.unwrap_or(dg),
        parse_g(e)?,
    )
}

fn parse_initial(e: &Entries) -> Result<InitialData> {
    let kind = e.raw("initial.kind").unwrap_or("taylor_green_mhd");
    let amplitude = e.get::<f64>("initial.amplitude")?.unwrap_or(1.0);
    let used = |keys: &[&str]| -> Result<()> {
        for k in ["initial.seed", "initial.k_min", "initial.k_max", "initial.path"] {
            if !keys.contains(&k) && e.raw(k).is_some() {
                return Err(Error::Config(format!("{k} does not apply to initial.kind = {kind}")));
            }
        }
        Ok(())
    };
    Ok(match kind {
        "taylor_green_mhd" => {
            used(&[])?;
            InitialData::TaylorGreenMhd { amplitude }
        }
        "orszag_tang_like" => {
            used(&[])?;
            InitialData::OrszagTangLike { amplitude }
        }
        "random_band" => {
            used(&["initial.seed", "initial.k_min", "initial.k_max"])?;
            InitialData::RandomBand {
                seed: e.get("initial.seed")?.unwrap_or(0),
                k_min: e.get("initial.k_min")?.unwrap_or(1),
                k_max: e.get("initial.k_max")?.unwrap_or(8),
                amplitude,
            }
        }
        "from_checkpoint" => {
            used(&["initial.path"])?;
            InitialData::FromCheckpoint(
                e.raw("initial.path")
                    .ok_or_else(|| Error::Config("initial.kind = from_checkpoint requires initial.path".into()))?
                    .into(),
            )
        }
        other => {
            return Err(Error::Config(format!(
                "unknown initial.kind {other:?}; expected taylor_green_mhd, random_band, orszag_tang_like or from_checkpoint"
            )))
        }
    })
}

/// Parses configuration text and applies defaults.
pub fn parse_config(text: &str) -> Result<RunSpec> {
    let e = Entries::parse(text)?;
    let system = parse_system(&e)?;

    let mut stepper = StepperConfig::new(e.get("stepper.dt")?.unwrap_or(0.005), e.get("stepper.t_end")?.unwrap_or(1.0));
    if let Some(s) = e.raw("stepper.scheme") {
        stepper.scheme = Scheme::parse(s).ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))?;
    }
    if let Some(c) = e.get("stepper.cfl_target")? {
        stepper.cfl_target = c;
    }
    if let Some(a) = e.get("stepper.adaptive")? {
        stepper.adaptive = a;
    }
    if let Some(c) = e.get("stepper.blowup_ceiling")? {
        stepper.blowup_ceiling = c;
    }
    if let Some(l) = e.get("stepper.linear_only")? {
        stepper.linear_only = l;
    }
    if let Some(k) = e.get("diagnostics.every")? {
        stepper.diagnostics_every = k;
    }
    stepper.validate()?;

    let grid_n = e.get("grid.n")?.unwrap_or(128);
    let monitored_sobolev_exponents = match e.f64_list("diagnostics.sobolev_exponents")? {
        Some(list) => {
            for &s in &list {
                if !(crate::diagnostics::norms::SOBOLEV_MIN..=crate::diagnostics::norms::SOBOLEV_MAX).contains(&s) {
                    return Err(Error::Config(format!("Sobolev exponent {s} outside [-2, 12]")));
                }
            }
            list
        }
        None => default_sobolev_exponents(&system),
    };
    let mut diagnostics = EngineOptions::default();
    if let Some(r) = e.get("diagnostics.residuals")? {
        diagnostics.residuals = r;
    }
    if let Some(l) = e.get("diagnostics.lp_spectrum")? {
        diagnostics.lp_spectrum = l;
    }
    if let Some(o) = e.get("diagnostics.oversample_linf")? {
        diagnostics.oversample_linf = o;
    }
    let spec = RunSpec {
        system,
        stepper,
        grid_n,
        initial_data: parse_initial(&e)?,
        output_dir: e.raw("output.dir").map(PathBuf::from),
        monitored_sobolev_exponents,
        diagnostics,
        residual_tolerance: e.get("diagnostics.residual_tolerance")?,
        write_final_checkpoint: e.get("output.checkpoint")?.unwrap_or(true),
    };
    crate::spectral::make_grid(spec.grid_n)?;
    Ok(spec)
}

/// Reads and resolves a configuration file; the regime classification is
/// logged.
pub fn load_config(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let spec = parse_config(&text)?;
    log::info!(
        "{}: variant {} covered_regime={} ({})",
        path.display(),
        spec.system.variant(),
        spec.system.covered_regime(),
        spec.system.regime_condition()
    );
    Ok(spec)
}

impl RunSpec {
    /// Fully resolved configuration text; parsing it yields `self` again.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let sys = &self.system;
        let _ = writeln!(s, "system.variant = {}", sys.variant());
        let _ = writeln!(s, "system.alpha = {:?}", sys.alpha());
        let _ = writeln!(s, "system.beta = {:?}", sys.beta());
        let _ = writeln!(s, "system.gamma = {:?}", sys.gamma());
        if let Some(g) = sys.g() {
            let _ = writeln!(s, "system.g = {}", g.family_id());
            if let LogSymbol::Table(t) = g {
                let knots: Vec<String> = t.knots().iter().map(|(a, b)| format!("{a:?}:{b:?}")).collect();
                let _ = writeln!(s, "system.g_table = {}", knots.join(", "));
            }
        }
        let _ = writeln!(s, "grid.n = {}", self.grid_n);
        let st = &self.stepper;
        let _ = writeln!(s, "stepper.scheme = {}", st.scheme);
        let _ = writeln!(s, "stepper.dt = {:?}", st.dt);
        let _ = writeln!(s, "stepper.cfl_target = {:?}", st.cfl_target);
        let _ = writeln!(s, "stepper.t_end = {:?}", st.t_end);
        let _ = writeln!(s, "stepper.adaptive = {}", st.adaptive);
        let _ = writeln!(s, "stepper.blowup_ceiling = {:?}", st.blowup_ceiling);
        let _ = writeln!(s, "stepper.linear_only = {}", st.linear_only);
        let _ = writeln!(s, "initial.kind = {}", self.initial_data.kind());
        match &self.initial_data {
            InitialData::TaylorGreenMhd { amplitude } | InitialData::OrszagTangLike { amplitude } => {
                let _ = writeln!(s, "initial.amplitude = {amplitude:?}");
            }
            InitialData::RandomBand {
                seed,
                k_min,
                k_max,
                amplitude,
            } => {
                let _ = writeln!(s, "initial.amplitude = {amplitude:?}");
                let _ = writeln!(s, "initial.seed = {seed}");
                let _ = writeln!(s, "initial.k_min = {k_min}");
                let _ = writeln!(s, "initial.k_max = {k_max}");
            }
            InitialData::FromCheckpoint(p) => {
                let _ = writeln!(s, "initial.path = {}", p.display());
            }
        }
        let _ = writeln!(s, "diagnostics.every = {}", st.diagnostics_every);
        let exps: Vec<String> = self.monitored_sobolev_exponents.iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(s, "diagnostics.sobolev_exponents = {}", exps.join(", "));
        let _ = writeln!(s, "diagnostics.residuals = {}", self.diagnostics.residuals);
        let _ = writeln!(s, "diagnostics.lp_spectrum = {}", self.diagnostics.lp_spectrum);
        let _ = writeln!(s, "diagnostics.oversample_linf = {}", self.diagnostics.oversample_linf);
        if let Some(tol) = self.residual_tolerance {
            let _ = writeln!(s, "diagnostics.residual_tolerance = {tol:?}");
        }
        if let Some(d) = &self.output_dir {
            let _ = writeln!(s, "output.dir = {}", d.display());
        }
        let _ = writeln!(s, "output.checkpoint = {}", self.write_final_checkpoint);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_thm1() {
        let spec = parse_config("system.variant = thm1\nsystem.beta = 0.8\nsystem.gamma = 0.5\n").unwrap();
        assert!(spec.system.covered_regime());
        assert_eq!(spec.grid_n, 128);
        let spec = parse_config("system.variant = thm1\nsystem.beta = 0.7\nsystem.gamma = 0.5\n").unwrap();
        assert!(!spec.system.covered_regime());
    }

    #[test]
    fn thm2_condition_is_quoted() {
        let ok = parse_config("system.variant = thm2\nsystem.alpha = 1.2\nsystem.gamma = 0.8\nsystem.g = log14\n");
        assert!(ok.is_ok());
        let err = parse_config("system.variant = thm2\nsystem.alpha = 1.2\nsystem.gamma = 0.7\nsystem.g = log14\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("α+γ=2 with α∈(0,2]"), "{err}");
    }

    #[test]
    fn strict_schema() {
        assert!(parse_config("system.variant = thm1\nsystem.bta = 0.8\n").is_err());
        assert!(parse_config("system.variant = thm1\nsystem.beta = 0.8\nsystem.beta = 0.9\n").is_err());
        assert!(parse_config("system.variant = thm1\ninitial.seed = 4\n").is_err());
        assert!(parse_config("system.variant = thm3\nsystem.g = log13\n").is_err());
    }

    #[test]
    fn resolved_text_roundtrips() {
        let text = "system.variant = thm3\nsystem.g = custom_table\nsystem.g_table = 1:1, 10:2, 1e6:3\n\
                    initial.kind = random_band\ninitial.seed = 9\ninitial.k_max = 5\ngrid.n = 32\n\
                    diagnostics.residual_tolerance = 1e-10\n";
        let spec = parse_config(text).unwrap();
        let again = parse_config(&spec.to_config_string()).unwrap();
        assert_eq!(spec, again);
    }
}
