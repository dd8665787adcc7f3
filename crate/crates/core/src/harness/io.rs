//! Time-series CSV and binary checkpoints.
//!
//! Checkpoint layout, all little-endian:
//!
//! ```text
//! "FMHD"            4 bytes
//! version           u32 (= 1)
//! n                 u32
//! variant tag       u32
//! alpha beta gamma  3 × f64
//! g family id       u32 (0 = none, 255 = custom table)
//! t                 f64
//! v₁ v₂ b₁ b₂       4 × n² × (re f64, im f64), row-major mode order
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::diagnostics::DiagnosticsRecord;
use crate::dynamics::{SimState, SystemConfig, SystemVariant};
use crate::error::{Error, Result};
use crate::fields::SpectralVector;
use crate::spectral::{make_grid, LogSymbol, SpectralScalar};

pub const MAGIC: &[u8; 4] = b"FMHD";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 3 * 8 + 4 + 8;

/// Column order: `t, energy, dissipation`, the monitor labels, then
/// `r1, r2, r3, V, H`. Absent values are left empty.
pub fn timeseries_header(monitor_labels: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["t", "energy", "dissipation"].map(String::from).to_vec();
    h.extend(monitor_labels.iter().cloned());
    h.extend(["r1", "r2", "r3", "V", "H"].map(String::from));
    h
}

/// Shortest round-trip decimal is at most 17 significant digits; this
/// always prints 17.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_timeseries(records: &[DiagnosticsRecord], monitor_labels: &[String], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(timeseries_header(monitor_labels))?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in records {
        let mut row = vec![fmt_f64(r.t), fmt_f64(r.energy_total), fmt_f64(r.dissipation)];
        for label in monitor_labels {
            row.push(opt(r.monitor(label)));
        }
        let res = r.residuals.map(|c| c.as_array());
        for i in 0..3 {
            row.push(opt(res.map(|a| a[i])));
        }
        row.push(opt(r.v_functional));
        row.push(opt(r.h_functional));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed time series: header and rows (`None` for empty cells).
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_timeseries(path: &Path) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|e| Error::Config(format!("{}: bad number {s:?}: {e}", path.display())))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(TimeSeries { header, rows })
}

fn g_id(config: &SystemConfig) -> u32 {
    config.g().map_or(0, LogSymbol::numeric_id)
}

pub fn write_checkpoint(state: &SimState, config: &SystemConfig, path: &Path) -> Result<()> {
    state.check_cache(config)?;
    let n = state.grid().n();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&config.variant().tag().to_le_bytes())?;
    for x in [config.alpha(), config.beta(), config.gamma()] {
        w.write_all(&x.to_le_bytes())?;
    }
    w.write_all(&g_id(config).to_le_bytes())?;
    w.write_all(&state.t().to_le_bytes())?;
    for f in [state.v(), state.b()] {
        for c in f.components() {
            for z in c.coeffs() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Raw checkpoint contents.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub n: usize,
    pub variant: SystemVariant,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub g_id: u32,
    pub t: f64,
    /// `v₁, v₂, b₁, b₂`
    pub arrays: [Vec<Complex64>; 4],
}

impl Checkpoint {
    /// The system recorded in the header. Custom tables are not stored, so
    /// they need [`read_checkpoint_with`].
    pub fn system(&self) -> Result<SystemConfig> {
        let g = match self.g_id {
            0 => None,
            id => Some(LogSymbol::from_numeric_id(id).ok_or_else(|| {
                Error::Config(format!(
                    "checkpoint uses g id {id}; a custom table must be supplied through the configuration"
                ))
            })?),
        };
        SystemConfig::new(self.variant, self.alpha, self.beta, self.gamma, g)
    }

    pub fn matches(&self, config: &SystemConfig) -> bool {
        self.variant == config.variant()
            && self.alpha == config.alpha()
            && self.beta == config.beta()
            && self.gamma == config.gamma()
            && self.g_id == g_id(config)
    }

    pub fn into_state(self, config: &SystemConfig) -> Result<SimState> {
        let grid = make_grid(self.n)?;
        let [v1, v2, b1, b2] = self.arrays;
        let s = |c| SpectralScalar::from_coeffs(grid.clone(), c);
        let v = SpectralVector::new(s(v1)?, s(v2)?)?;
        let b = SpectralVector::new(s(b1)?, s(b2)?)?;
        SimState::new(v, b, self.t, config)
    }
}

fn bad(path: &Path, reason: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        return Err(bad(path, format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad(path, "missing FMHD magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(bad(path, format!("format version {version}, expected {FORMAT_VERSION}")));
    }
    let n = u32_at(8) as usize;
    let variant = SystemVariant::from_tag(u32_at(12))
        .ok_or_else(|| bad(path, format!("unknown variant tag {}", u32_at(12))))?;
    let (alpha, beta, gamma) = (f64_at(16), f64_at(24), f64_at(32));
    let g_id = u32_at(40);
    let t = f64_at(44);
    let len = n * n;
    let expected = HEADER_LEN + 4 * len * 16;
    if bytes.len() != expected {
        return Err(bad(
            path,
            format!("expected {expected} bytes for n = {n}, found {}", bytes.len()),
        ));
    }
    let mut arrays: [Vec<Complex64>; 4] = Default::default();
    for (a, arr) in arrays.iter_mut().enumerate() {
        let base = HEADER_LEN + a * len * 16;
        *arr = (0..len)
            .map(|i| Complex64::new(f64_at(base + 16 * i), f64_at(base + 16 * i + 8)))
            .collect();
    }
    Ok(Checkpoint {
        n,
        variant,
        alpha,
        beta,
        gamma,
        g_id,
        t,
        arrays,
    })
}

/// Reads a checkpoint using the system stored in its header.
pub fn read_checkpoint(path: &Path) -> Result<(SimState, SystemConfig)> {
    let chk = load_checkpoint(path)?;
    let config = chk.system()?;
    Ok((chk.into_state(&config)?, config))
}

/// Reads a checkpoint for a known system, which must match the header.
pub fn read_checkpoint_with(path: &Path, config: &SystemConfig) -> Result<SimState> {
    let chk = load_checkpoint(path)?;
    if !chk.matches(config) {
        return Err(bad(
            path,
            format!(
                "written for {} (α={}, β={}, γ={}, g id {}), configuration is {} (α={}, β={}, γ={}, g id {})",
                chk.variant,
                chk.alpha,
                chk.beta,
                chk.gamma,
                chk.g_id,
                config.variant(),
                config.alpha(),
                config.beta(),
                config.gamma(),
                g_id(config)
            ),
        ));
    }
    chk.into_state(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::initial::{make_initial_data, InitialData};

    #[test]
    fn roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.chk");
        let grid = make_grid(16).unwrap();
        let config = SystemConfig::thm2(1.0, 1.0, LogSymbol::Log14).unwrap();
        let data = InitialData::RandomBand {
            seed: 3,
            k_min: 1,
            k_max: 5,
            amplitude: 1.0,
        };
        let s = make_initial_data(&data, &grid, &config).unwrap().with_time(0.25);
        write_checkpoint(&s, &config, &path).unwrap();
        let (back, cfg) = read_checkpoint(&path).unwrap();
        assert_eq!(cfg, config);
        assert_eq!(back.t(), 0.25);
        for (a, b) in [(s.v(), back.v()), (s.b(), back.b())] {
            for i in 0..2 {
                let bits = |x: &SpectralScalar| -> Vec<(u64, u64)> {
                    x.coeffs().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
                };
                assert_eq!(bits(&a.components()[i]), bits(&b.components()[i]));
            }
        }

        let other = SystemConfig::thm2(1.0, 1.0, LogSymbol::Log12).unwrap();
        assert!(read_checkpoint_with(&path, &other).is_err());

        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_checkpoint(&path), Err(Error::Checkpoint { .. })));
        bytes[4] = 9;
        std::fs::write(&path, &bytes).unwrap();
        let err = read_checkpoint(&path).unwrap_err().to_string();
        assert!(err.contains("version"), "{err}");
    }
}
