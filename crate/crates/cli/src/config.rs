//! TOML experiment configuration.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use idealface::experiments::{BlockedSetup, SectorSetup};
use idealface::restriction::{PowerMode, PowerPolicy, SdrNulls};
use idealface::sdp::SolverOptions;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of every output file.
    pub experiment: Option<String>,
    pub output_dir: Option<String>,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub sdr: SdrConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub subspace: SubspaceConfig,
    #[serde(default)]
    pub gsc: GscConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub n: usize,
    /// Element spacing in wavelengths.
    pub spacing: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { n: 20, spacing: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerSetting {
    PerAntenna,
    Total,
    /// Per-antenna rows, replaced by the total-power row when they are inconsistent.
    PerAntennaOrTotal,
}

impl PowerSetting {
    pub fn policy(self) -> PowerPolicy {
        match self {
            PowerSetting::PerAntenna => PowerPolicy::Fixed(PowerMode::PerAntenna),
            PowerSetting::Total => PowerPolicy::Fixed(PowerMode::Total),
            PowerSetting::PerAntennaOrTotal => PowerPolicy::PerAntennaOrTotal,
        }
    }

    pub fn mode(self) -> Result<PowerMode> {
        match self {
            PowerSetting::PerAntenna => Ok(PowerMode::PerAntenna),
            PowerSetting::Total => Ok(PowerMode::Total),
            PowerSetting::PerAntennaOrTotal => bail!("the SDR baseline needs a fixed power mode"),
        }
    }
}

/// Design parameters; unset fields take the defaults of the chosen subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignConfig {
    pub passbands: Option<Vec<[f64; 2]>>,
    pub transition: Option<f64>,
    pub grid_step: Option<f64>,
    pub energy: Option<f64>,
    pub gamma: Option<f64>,
    pub desired_level: Option<f64>,
    /// Null directions, repeated for multiplicity.
    pub nulls: Option<Vec<f64>>,
    /// Blocked direction of the repeated-root comparison.
    pub blocked: Option<f64>,
    pub multiplicity: Option<usize>,
    pub power: Option<PowerSetting>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullRows {
    Omit,
    Keep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdrConfig {
    pub nulls: NullRows,
    pub power: PowerSetting,
}

impl Default for SdrConfig {
    fn default() -> Self {
        Self { nulls: NullRows::Omit, power: PowerSetting::PerAntenna }
    }
}

impl SdrConfig {
    fn nulls(&self) -> SdrNulls {
        match self.nulls {
            NullRows::Omit => SdrNulls::Omit,
            NullRows::Keep => SdrNulls::Keep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub verbose: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { gap_tol: o.gap_tol, feas_tol: o.feas_tol, max_iter: o.max_iter, verbose: o.verbose }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            gap_tol: self.gap_tol,
            feas_tol: self.feas_tol,
            max_iter: self.max_iter,
            verbose: self.verbose,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubspaceConfig {
    pub n: usize,
    pub spacing: f64,
    pub sources: Vec<f64>,
    /// Unit powers when absent.
    pub powers: Option<Vec<f64>>,
    pub noise_var: f64,
    pub snapshots: usize,
    pub trials: usize,
    pub seed: u64,
    /// Root clustering cutoff; `0.1 / N` when absent.
    pub cutoff: Option<f64>,
}

impl Default for SubspaceConfig {
    fn default() -> Self {
        Self {
            n: 8,
            spacing: 0.5,
            sources: vec![-10.0, 25.0],
            powers: None,
            noise_var: 1.0,
            snapshots: 20,
            trials: 500,
            seed: 2024,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GscConfig {
    pub m: usize,
    pub spacing: f64,
    pub blocked: Vec<f64>,
    /// Directions checked for blocking in the report.
    pub probes: Vec<f64>,
}

impl Default for GscConfig {
    fn default() -> Self {
        Self { m: 8, spacing: 0.5, blocked: vec![0.0], probes: vec![-30.0, 0.0, 30.0] }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid_step: Option<f64>,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
}

fn check_angle(what: &str, a: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&a) {
        bail!("{what}: angle {a} outside [-90, 90]");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.design;
        for pb in d.passbands.iter().flatten() {
            check_angle("design.passbands", pb[0])?;
            check_angle("design.passbands", pb[1])?;
        }
        for &a in d.nulls.iter().flatten() {
            check_angle("design.nulls", a)?;
        }
        if let Some(b) = d.blocked {
            check_angle("design.blocked", b)?;
        }
        for &a in &self.subspace.sources {
            check_angle("subspace.sources", a)?;
        }
        for &a in self.gsc.blocked.iter().chain(&self.gsc.probes) {
            check_angle("gsc", a)?;
        }
        Ok(())
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(g) = o.grid_step {
            self.design.grid_step = Some(g);
        }
        if let Some(g) = o.gamma {
            self.design.gamma = Some(g);
        }
        if let Some(s) = o.seed {
            self.subspace.seed = s;
        }
    }

    pub fn id<'a>(&'a self, fallback: &'a str) -> &'a str {
        self.experiment.as_deref().unwrap_or(fallback)
    }

    pub fn sector_setup(&self) -> Result<SectorSetup> {
        let d = &self.design;
        let mut s = SectorSetup { n: self.array.n, spacing: self.array.spacing, ..SectorSetup::default() };
        if let Some(pb) = &d.passbands {
            match pb.as_slice() {
                [p] => s.passband = (p[0], p[1]),
                _ => bail!("the sector example takes exactly one passband"),
            }
        }
        s.transition = d.transition.unwrap_or(s.transition);
        s.grid_step = d.grid_step.unwrap_or(s.grid_step);
        s.energy = d.energy.unwrap_or(s.energy);
        s.gamma = d.gamma;
        s.desired_level = d.desired_level;
        if let Some(n) = &d.nulls {
            s.null_dirs = n.clone();
        }
        if let Some(p) = d.power {
            s.policy = p.policy();
        }
        s.sdr_nulls = self.sdr.nulls();
        s.sdr_power = self.sdr.power.mode()?;
        Ok(s)
    }

    pub fn blocked_setup(&self) -> Result<BlockedSetup> {
        let d = &self.design;
        let mut s = BlockedSetup { n: self.array.n, spacing: self.array.spacing, ..BlockedSetup::default() };
        if let Some(pb) = &d.passbands {
            s.passbands = pb.iter().map(|p| (p[0], p[1])).collect();
        }
        s.blocked = d.blocked.unwrap_or(s.blocked);
        s.multiplicity = d.multiplicity.unwrap_or(s.multiplicity);
        s.transition = d.transition.unwrap_or(s.transition);
        s.grid_step = d.grid_step.unwrap_or(s.grid_step);
        s.energy = d.energy.unwrap_or(s.energy);
        s.gamma = d.gamma;
        s.desired_level = d.desired_level;
        if d.nulls.is_some() {
            bail!("the blocked-direction example takes design.blocked, not design.nulls");
        }
        if let Some(p) = d.power {
            s.policy = p.policy();
        }
        s.sdr_nulls = self.sdr.nulls();
        s.sdr_power = self.sdr.power.mode()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("[design]\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::parse("colour = 'red'\n").is_err());
        assert!(ExperimentConfig::parse("[solver]\nmax_iter = 50\n").is_ok());
    }

    #[test]
    fn angles_must_be_physical() {
        assert!(ExperimentConfig::parse("[design]\nnulls = [95.0]\n").is_err());
        assert!(ExperimentConfig::parse("[subspace]\nsources = [-91.0]\n").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = ExperimentConfig::parse("[design]\ngrid_step = 1.0\n").unwrap();
        c.apply(&Overrides { grid_step: Some(0.5), gamma: Some(1e-8), seed: Some(3) });
        assert_eq!(c.design.grid_step, Some(0.5));
        assert_eq!(c.sector_setup().unwrap().gamma, Some(1e-8));
        assert_eq!(c.subspace.seed, 3);
    }

    #[test]
    fn defaults_match_reference_setups() {
        let c = ExperimentConfig::default();
        assert_eq!(c.sector_setup().unwrap(), SectorSetup::default());
        assert_eq!(c.blocked_setup().unwrap(), BlockedSetup::default());
    }
}
