//! CSV and JSON artifacts.
//!
//! Numbers are written with nine significant digits in scientific notation,
//! so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nvfield_core::constants::units::{MHZ, MOL_PER_L, US};
use nvfield_core::engine::SignalTrace;
use nvfield_core::fit::FitResult;
use nvfield_core::spectral::Spectrum;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Nine significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

/// Writes artifacts under one directory and remembers what was written.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| num(*v)))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    /// `tau_us, signal`, or `tau_us, mean_signal, stderr` for averages.
    pub fn trace(&mut self, name: &str, trace: &SignalTrace) -> Result<()> {
        match &trace.stderr {
            None => self.csv(
                name,
                &["tau_us", "signal"],
                trace.tau.iter().zip(&trace.signal).map(|(t, s)| vec![t / US, *s]),
            ),
            Some(err) => self.csv(
                name,
                &["tau_us", "mean_signal", "stderr"],
                trace.tau.iter().zip(&trace.signal).zip(err).map(|((t, s), e)| vec![t / US, *s, *e]),
            ),
        }
    }

    pub fn spectrum(&mut self, name: &str, s: &Spectrum) -> Result<()> {
        self.csv(name, &["freq_MHz", "amplitude"], s.freqs.iter().zip(&s.amplitude).map(|(f, a)| vec![f / MHZ, *a]))
    }

    /// Rows `c_mol_per_L, sigma_Ex, sigma_Ey, sigma_Ez`; `c` in mol/m^3.
    pub fn field_stats(&mut self, name: &str, rows: &[(f64, [f64; 3])]) -> Result<()> {
        self.csv(
            name,
            &["c_mol_per_L", "sigma_Ex", "sigma_Ey", "sigma_Ez"],
            rows.iter().map(|(c, s)| vec![c / MOL_PER_L, s[0], s[1], s[2]]),
        )
    }
}

/// `{params, stderr, residual_rms, converged}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub params: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    pub residual_rms: f64,
    pub converged: bool,
}

impl From<&FitResult> for FitReport {
    fn from(fit: &FitResult) -> Self {
        let params = fit.names.iter().cloned().zip(fit.params.iter().copied()).collect();
        let stderr = fit.names.iter().cloned().zip(fit.stderr.iter().copied()).collect();
        Self { params, stderr, residual_rms: fit.residual_rms, converged: fit.converged }
    }
}
