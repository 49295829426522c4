//! JSON run configuration.
//!
//! Keys carry their unit as a suffix (`_nm`, `_us`, `_MHz`, `_V_per_um`,
//! `_mol_per_L`, ...) and are converted to SI when a section is resolved.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use nvfield_core::constants::units::{GAUSS, MHZ, MOL_PER_L, NM, NS, US, V_PER_UM};
use nvfield_core::constants::{NvConstants, TWO_PI};
use nvfield_core::electrostatics::{DielectricConfig, IonCount, SamplingMethod};
use nvfield_core::engine::{linear_grid, PulseModel};
use nvfield_core::open_system::NoiseModel;
use nvfield_core::sequence::{parse_sequence, Builtin, PulseSequence};
use nvfield_core::spectral::{SpectrumOptions, Window};
use nvfield_core::spin::{DriveSettings, NVFrequencies, Polarization};
use nvfield_core::FieldVector;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub constants: ConstantsSection,
    pub dielectric: DielectricSection,
    pub physics: PhysicsSection,
    pub sequence: SequenceSection,
    pub sweep: SweepSection,
    pub noise: NoiseSection,
    pub echo: EchoSection,
    pub spectrum: SpectrumSection,
    pub alpha: AlphaSection,
    pub dt_sweep: DtSweepSection,
    pub reconstruct: ReconstructSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            constants: ConstantsSection::default(),
            dielectric: DielectricSection::default(),
            physics: PhysicsSection::default(),
            sequence: SequenceSection::default(),
            sweep: SweepSection::default(),
            noise: NoiseSection::default(),
            echo: EchoSection::default(),
            spectrum: SpectrumSection::default(),
            alpha: AlphaSection::default(),
            dt_sweep: DtSweepSection::default(),
            reconstruct: ReconstructSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsSection {
    #[serde(rename = "D_GHz")]
    pub d_ghz: f64,
    pub d_par_hz_cm_per_v: f64,
    pub d_perp_hz_cm_per_v: f64,
    #[serde(rename = "gamma_e_GHz_per_T")]
    pub gamma_e_ghz_per_t: f64,
}

impl Default for ConstantsSection {
    fn default() -> Self {
        Self { d_ghz: 2.87, d_par_hz_cm_per_v: 0.35, d_perp_hz_cm_per_v: 17.0, gamma_e_ghz_per_t: 28.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DielectricSection {
    pub eps_e: f64,
    pub eps_nd: f64,
    pub r_nd_nm: f64,
    #[serde(rename = "R_nm")]
    pub r_nm: f64,
    pub trials: usize,
    #[serde(rename = "concentrations_mol_per_L")]
    pub concentrations_mol_per_l: Vec<f64>,
    /// Draw the ion count per trial from a Poisson law instead of fixing it.
    pub poisson_counts: bool,
    pub sampling: Sampling,
}

impl Default for DielectricSection {
    fn default() -> Self {
        Self {
            eps_e: 17.5,
            eps_nd: 5.8,
            r_nd_nm: 100.0,
            r_nm: 400.0,
            trials: 500,
            concentrations_mol_per_l: vec![0.1, 0.25, 0.5, 1.0],
            poisson_counts: false,
            sampling: Sampling::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Auto,
    Direct,
    Binned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    #[serde(rename = "E_V_per_um")]
    pub e_v_per_um: [f64; 3],
    #[serde(rename = "B_z_G")]
    pub b_z_g: f64,
    /// Rabi frequency `Omega / 2 pi`.
    #[serde(rename = "omega_MHz")]
    pub omega_mhz: f64,
    /// `Delta / 2 pi`: zero-field splitting minus drive frequency.
    #[serde(rename = "detuning_MHz")]
    pub detuning_mhz: f64,
    pub pulse_model: PulseModelName,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            e_v_per_um: [10.0, 10.0, 10.0],
            b_z_g: 0.0,
            omega_mhz: 10.0,
            detuning_mhz: 0.0,
            pulse_model: PulseModelName::Hard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseModelName {
    Hard,
    Full,
}

/// Pulse program: a built-in name, a DSL file, or inline DSL text. When all
/// three are absent each command uses its own built-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceSection {
    pub builtin: Option<String>,
    pub file: Option<PathBuf>,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Longest delay; chosen from the expected frequencies when absent.
    pub tau_max_us: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Lindblad dephasing time; absent means none.
    #[serde(rename = "T2_star_us")]
    pub t2_star_us: Option<f64>,
    #[serde(rename = "T2_int_us")]
    pub t2_int_us: f64,
    #[serde(rename = "E_m_V_per_um")]
    pub e_m_v_per_um: f64,
    #[serde(rename = "sigma_E_V_per_um")]
    pub sigma_e_v_per_um: f64,
    pub resample_dt_ns: f64,
    pub trajectories: usize,
    /// Run `fid` over fluctuating-field trajectories instead of the static
    /// field of the physics section.
    pub fid_ensemble: bool,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            t2_star_us: None,
            t2_int_us: 100.0,
            e_m_v_per_um: 1.0,
            sigma_e_v_per_um: 0.75,
            resample_dt_ns: 10.0,
            trajectories: 1000,
            fid_ensemble: false,
        }
    }
}

/// Delay grid of the echo experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EchoSection {
    pub tau_max_us: f64,
    pub points: usize,
}

impl Default for EchoSection {
    fn default() -> Self {
        Self { tau_max_us: 150.0, points: 600 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub window: WindowName,
    pub padding: usize,
    /// Peaks below this fraction of the largest amplitude are not listed.
    pub min_prominence: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { window: WindowName::Rectangular, padding: 4, min_prominence: 0.3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowName {
    Rectangular,
    Hann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlphaSection {
    #[serde(rename = "E_m_V_per_um")]
    pub e_m_v_per_um: Vec<f64>,
    #[serde(rename = "sigma_E_V_per_um")]
    pub sigma_e_v_per_um: Vec<f64>,
}

impl Default for AlphaSection {
    fn default() -> Self {
        Self { e_m_v_per_um: vec![1.0, 2.0, 4.0], sigma_e_v_per_um: vec![0.25, 0.5, 0.75, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DtSweepSection {
    pub resample_dt_ns: Vec<f64>,
}

impl Default for DtSweepSection {
    fn default() -> Self {
        Self { resample_dt_ns: vec![2.0, 5.0, 10.0, 20.0, 50.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructSection {
    /// Length of the `fid-xi-z` sweep.
    pub xi_z_window_us: f64,
}

impl Default for ReconstructSection {
    fn default() -> Self {
        Self { xi_z_window_us: 128.0 }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        // Sequence files are named relative to the configuration file.
        if let (Some(file), Some(dir)) = (&cfg.sequence.file, path.parent()) {
            if file.is_relative() {
                cfg.sequence.file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn constants(&self) -> Result<NvConstants> {
        let c = &self.constants;
        positive("D_GHz", c.d_ghz)?;
        positive("d_par_hz_cm_per_v", c.d_par_hz_cm_per_v)?;
        positive("d_perp_hz_cm_per_v", c.d_perp_hz_cm_per_v)?;
        positive("gamma_e_GHz_per_T", c.gamma_e_ghz_per_t)?;
        Ok(NvConstants::from_table_units(c.d_ghz, c.d_par_hz_cm_per_v, c.d_perp_hz_cm_per_v, c.gamma_e_ghz_per_t))
    }

    pub fn dielectric(&self) -> Result<DielectricConfig> {
        let d = &self.dielectric;
        DielectricConfig::new(d.eps_e, d.eps_nd, d.r_nd_nm * NM, d.r_nm * NM)
            .map_err(|e| CliError::config(e.to_string()))
    }

    /// Concentrations in mol/m^3.
    pub fn concentrations(&self) -> Result<Vec<f64>> {
        let cs = &self.dielectric.concentrations_mol_per_l;
        if cs.is_empty() {
            return Err(CliError::config("concentrations_mol_per_L is empty"));
        }
        cs.iter().map(|&c| positive("concentration", c).map(|c| c * MOL_PER_L)).collect()
    }

    pub fn trials(&self) -> Result<usize> {
        match self.dielectric.trials {
            0 => Err(CliError::config("trials must be at least 1")),
            n => Ok(n),
        }
    }

    pub fn ion_count(&self) -> IonCount {
        if self.dielectric.poisson_counts {
            IonCount::Poisson
        } else {
            IonCount::Fixed
        }
    }

    pub fn sampling(&self) -> SamplingMethod {
        match self.dielectric.sampling {
            Sampling::Auto => SamplingMethod::Auto,
            Sampling::Direct => SamplingMethod::Direct,
            Sampling::Binned => SamplingMethod::Binned { bins: 1024 },
        }
    }

    pub fn field(&self) -> Result<FieldVector> {
        let e = FieldVector::from(self.physics.e_v_per_um) * V_PER_UM;
        if !e.is_finite() {
            return Err(CliError::config("E_V_per_um must be finite"));
        }
        Ok(e)
    }

    /// Drive with `plus` polarization; pulses pick their own polarization.
    pub fn drive(&self) -> Result<DriveSettings> {
        let w = self.physics.omega_mhz;
        if !(w > 0.0 && w.is_finite()) {
            return Err(CliError::config(format!("omega_MHz must be positive (no drive at {w})")));
        }
        DriveSettings::polarized(TWO_PI * w * MHZ, Polarization::Plus).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn pulse_model(&self) -> PulseModel {
        match self.physics.pulse_model {
            PulseModelName::Hard => PulseModel::Hard,
            PulseModelName::Full => PulseModel::Full,
        }
    }

    pub fn frequencies(&self) -> Result<NVFrequencies> {
        let k = self.constants()?;
        let b = self.physics.b_z_g * GAUSS;
        let det = self.physics.detuning_mhz;
        if !(b.is_finite() && det.is_finite()) {
            return Err(CliError::config("B_z_G and detuning_MHz must be finite"));
        }
        let wd = k.resonant_drive() - TWO_PI * det * MHZ;
        Ok(k.frequencies(self.field()?, b, wd))
    }

    /// The configured sequence and, if it is one, its built-in name.
    pub fn sequence(&self, fallback: Builtin) -> Result<(PulseSequence, Option<Builtin>)> {
        let s = &self.sequence;
        match (&s.builtin, &s.file, &s.source) {
            (None, None, None) => Ok((fallback.sequence(), Some(fallback))),
            (Some(name), None, None) => {
                let b = Builtin::from_name(name).ok_or_else(|| {
                    let known: Vec<_> = Builtin::ALL.iter().map(|b| b.name()).collect();
                    CliError::config(format!("unknown built-in sequence {name:?}; known: {}", known.join(", ")))
                })?;
                Ok((b.sequence(), Some(b)))
            }
            (None, Some(path), None) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                let seq = parse_sequence(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                Ok((seq, None))
            }
            (None, None, Some(text)) => {
                Ok((parse_sequence(text).map_err(|e| CliError::config(format!("sequence: {e}")))?, None))
            }
            _ => Err(CliError::config("sequence needs exactly one of builtin, file or source")),
        }
    }

    /// Delay grid of `fid` and `spectrum`.
    ///
    /// Without an explicit `tau_max_us` the sweep covers eight periods of
    /// the slowest line the sequence is built to show, and enough points to
    /// sample the fastest one four times per period.
    pub fn taus(&self, f: &NVFrequencies, builtin: Option<Builtin>) -> Result<Vec<f64>> {
        let fast = (2.0 * f.mixing() + f.xi_z.abs()) / TWO_PI;
        let slow = match builtin {
            Some(Builtin::FidXiZ) => f.xi_z.abs() / std::f64::consts::PI,
            _ => 2.0 * f.mixing() / TWO_PI,
        };
        let tau_max = match self.sweep.tau_max_us {
            Some(t) => positive("tau_max_us", t)? * US,
            None if slow > 0.0 => 8.0 / slow,
            None if fast > 0.0 => 8.0 / fast,
            None => 10.0 * US,
        };
        let points = match self.sweep.points {
            Some(n) if n >= 2 => n,
            Some(n) => return Err(CliError::config(format!("sweep needs at least 2 points, got {n}"))),
            None => ((4.0 * fast * tau_max).ceil() as usize + 1).max(1024),
        };
        Ok(linear_grid(tau_max, points))
    }

    pub fn echo_taus(&self) -> Result<Vec<f64>> {
        let t = positive("echo.tau_max_us", self.echo.tau_max_us)? * US;
        if self.echo.points < 8 {
            return Err(CliError::config("echo.points must be at least 8"));
        }
        Ok(linear_grid(t, self.echo.points))
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        let n = &self.noise;
        let t2_star = match n.t2_star_us {
            Some(t) => positive("T2_star_us", t)? * US,
            None => f64::INFINITY,
        };
        if !(n.sigma_e_v_per_um >= 0.0 && n.e_m_v_per_um.is_finite() && n.sigma_e_v_per_um.is_finite()) {
            return Err(CliError::config("sigma_E_V_per_um must be non-negative and E_m_V_per_um finite"));
        }
        if n.trajectories == 0 {
            return Err(CliError::config("trajectories must be at least 1"));
        }
        Ok(NoiseModel {
            t2_star,
            t2_int: positive("T2_int_us", n.t2_int_us)? * US,
            field_mean: n.e_m_v_per_um * V_PER_UM,
            field_std: n.sigma_e_v_per_um * V_PER_UM,
            resample_dt: positive("resample_dt_ns", n.resample_dt_ns)? * NS,
            trajectories: n.trajectories,
            seed: self.seed,
        })
    }

    pub fn spectrum_options(&self) -> Result<SpectrumOptions> {
        if self.spectrum.padding == 0 {
            return Err(CliError::config("spectrum.padding must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.spectrum.min_prominence) {
            return Err(CliError::config("spectrum.min_prominence must lie in [0, 1)"));
        }
        let window = match self.spectrum.window {
            WindowName::Rectangular => Window::Rectangular,
            WindowName::Hann => Window::Hann,
        };
        Ok(SpectrumOptions { window, padding: self.spectrum.padding })
    }

    /// `(E_m, sigma_E)` pairs in V/m.
    pub fn alpha_grid(&self) -> Result<Vec<(f64, f64)>> {
        let a = &self.alpha;
        if a.e_m_v_per_um.is_empty() || a.sigma_e_v_per_um.is_empty() {
            return Err(CliError::config("alpha grid is empty"));
        }
        let mut out = Vec::new();
        for &e in &a.e_m_v_per_um {
            for &s in &a.sigma_e_v_per_um {
                out.push((positive("alpha.E_m", e)? * V_PER_UM, positive("alpha.sigma_E", s)? * V_PER_UM));
            }
        }
        Ok(out)
    }

    pub fn dt_grid(&self) -> Result<Vec<f64>> {
        if self.dt_sweep.resample_dt_ns.is_empty() {
            return Err(CliError::config("dt_sweep.resample_dt_ns is empty"));
        }
        self.dt_sweep.resample_dt_ns.iter().map(|&d| positive("resample_dt_ns", d).map(|d| d * NS)).collect()
    }

    pub fn xi_z_window(&self) -> Result<f64> {
        Ok(positive("xi_z_window_us", self.reconstruct.xi_z_window_us)? * US)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let c = RunConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
        assert!(text.contains("\"R_nm\"") && text.contains("\"E_m_V_per_um\""));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"dielectric": {"r_nd": 100}}"#).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c = RunConfig::from_json(r#"{"seed": 9, "physics": {"omega_MHz": 5}}"#).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.physics.omega_mhz, 5.0);
        assert_eq!(c.physics.e_v_per_um, [10.0, 10.0, 10.0]);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let zero_drive = RunConfig::from_json(r#"{"physics": {"omega_MHz": 0}}"#).unwrap();
        assert!(matches!(zero_drive.drive(), Err(CliError::Config(_))));
        let empty = RunConfig::from_json(r#"{"dielectric": {"concentrations_mol_per_L": []}}"#).unwrap();
        assert!(matches!(empty.concentrations(), Err(CliError::Config(_))));
        let two = RunConfig::from_json(r#"{"sequence": {"builtin": "hahn", "source": "init; read p0"}}"#).unwrap();
        assert!(matches!(two.sequence(Builtin::Hahn), Err(CliError::Config(_))));
        let bad = RunConfig::from_json(r#"{"sequence": {"source": "init; pulse up pi; read p0"}}"#).unwrap();
        let msg = bad.sequence(Builtin::Hahn).unwrap_err().to_string();
        assert!(msg.contains("line 1, column 13"), "{msg}");
    }

    #[test]
    fn unit_conversion() {
        let c = RunConfig::default();
        let d = c.dielectric().unwrap();
        assert_eq!(d.r_nd, 100.0 * NM);
        assert_eq!(c.concentrations().unwrap()[0], 100.0);
        let n = c.noise().unwrap();
        assert_eq!(n.field_std, 0.75e6);
        assert!(n.t2_star.is_infinite());
    }

    #[test]
    fn beat_grid_resolves_the_splitting_and_samples_the_fast_line() {
        let c = RunConfig::default();
        let f = c.frequencies().unwrap();
        let taus = c.taus(&f, Some(Builtin::FidXiZ)).unwrap();
        let t_max = *taus.last().unwrap();
        assert!((t_max - 8.0 * std::f64::consts::PI / f.xi_z).abs() < 1e-12);
        let dt = taus[1] - taus[0];
        assert!(1.0 / dt > 2.0 * (2.0 * f.xi_perp + f.xi_z) / TWO_PI);
    }
}
