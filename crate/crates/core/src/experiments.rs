//! The two reference beampattern designs: a sector beam with sixteen nulls,
//! and near-uniform illumination with one blocked direction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::array::ArrayGeometry;
use crate::error::{bail, Error, Result};
use crate::metrics::{build_report, BeampatternReport};
use crate::polyideal::Variety;
use crate::restriction::{
    solve_design, solve_sdr_baseline, DesignSolution, DesignSpec, PowerMode, PowerPolicy, SdrNulls,
};
use crate::sdp::{SolveStatus, SolverOptions};

/// Positive halves of the sector design's null directions.
pub const SECTOR_NULLS: [f64; 8] = [75.0, 60.0, 50.0, 43.0, 34.0, 33.0, 26.0, 22.0];

/// Passband level of the sector design, in units of `E`.
///
/// Uniform illumination reaches `E`; a 30 degree sector of a 20-element array
/// can peak near `5 E`, and the minimax fit is run against that level.
pub const SECTOR_LEVEL_FACTOR: f64 = 5.0;

/// `+-` every entry of [`SECTOR_NULLS`].
pub fn sector_nulls() -> Vec<f64> {
    SECTOR_NULLS.iter().flat_map(|&t| [t, -t]).collect()
}

/// One solved design and its report.
#[derive(Debug, Clone)]
pub struct Run {
    pub solution: DesignSolution,
    pub report: BeampatternReport,
}

impl Run {
    fn check(&self, what: &str) -> Result<()> {
        match self.solution.status() {
            SolveStatus::Optimal => Ok(()),
            s => Err(Error::Solver(format!("{what}: {s:?} ({})", self.solution.sdp.message))),
        }
    }
}

fn run(
    method: &str,
    sol: DesignSolution,
    spec: &DesignSpec,
    null_dirs: &[f64],
) -> Result<Run> {
    let report = build_report(method, &sol, &spec.geom, &spec.grid, &spec.desired_pattern(), null_dirs)?;
    Ok(Run { solution: sol, report })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorSetup {
    pub n: usize,
    pub spacing: f64,
    pub passband: (f64, f64),
    pub transition: f64,
    pub grid_step: f64,
    pub energy: f64,
    /// `None` keeps the spec default `1e-6 E / K`.
    pub gamma: Option<f64>,
    /// `None` means `SECTOR_LEVEL_FACTOR * E`.
    pub desired_level: Option<f64>,
    pub null_dirs: Vec<f64>,
    pub policy: PowerPolicy,
    pub sdr_nulls: SdrNulls,
    pub sdr_power: PowerMode,
}

impl Default for SectorSetup {
    fn default() -> Self {
        Self {
            n: 20,
            spacing: 0.5,
            passband: (-15.0, 15.0),
            transition: 5.0,
            grid_step: 0.25,
            energy: 1.0,
            gamma: None,
            desired_level: None,
            null_dirs: sector_nulls(),
            policy: PowerPolicy::PerAntennaOrTotal,
            sdr_nulls: SdrNulls::Omit,
            sdr_power: PowerMode::PerAntenna,
        }
    }
}

fn finish_spec(
    mut spec: DesignSpec,
    energy: f64,
    gamma: Option<f64>,
    level: f64,
) -> Result<DesignSpec> {
    spec = spec.with_energy(energy)?;
    spec.gamma = 1e-6 * energy / spec.k as f64;
    if let Some(g) = gamma {
        spec = spec.with_gamma(g)?;
    }
    spec.with_desired_level(level)
}

impl SectorSetup {
    pub fn spec(&self) -> Result<DesignSpec> {
        let geom = ArrayGeometry::new(self.n, self.spacing)?;
        let variety = Variety::from_directions(&geom, &self.null_dirs)?;
        let spec = DesignSpec::new(geom, vec![self.passband], self.transition, variety, self.grid_step)?;
        let level = self.desired_level.unwrap_or(SECTOR_LEVEL_FACTOR * self.energy);
        finish_spec(spec, self.energy, self.gamma, level)
    }
}

#[derive(Debug, Clone)]
pub struct SectorOutcome {
    pub spec: DesignSpec,
    pub proposed: Run,
    pub sdr: Run,
}

impl SectorOutcome {
    /// Solver failures, with the run that failed.
    pub fn check(&self) -> Result<()> {
        self.proposed.check("restricted design")?;
        self.sdr.check("SDR baseline")
    }

    /// `ASL(proposed) - ASL(SDR)` in dB.
    pub fn asl_gap_db(&self) -> f64 {
        self.proposed.report.metrics.asl_db - self.sdr.report.metrics.asl_db
    }
}

/// Restricted design and SDR baseline for the sixteen-null sector beam.
pub fn run_sector_example(setup: &SectorSetup, opts: &SolverOptions) -> Result<SectorOutcome> {
    let mut want = sector_nulls();
    let mut got = setup.null_dirs.clone();
    want.sort_by(f64::total_cmp);
    got.sort_by(f64::total_cmp);
    if want != got {
        bail!(Config, "sector example expects nulls at +-{SECTOR_NULLS:?}");
    }
    let spec = setup.spec()?;
    let proposed = solve_design(&spec, setup.policy, opts)?;
    let sdr = solve_sdr_baseline(&spec, setup.sdr_nulls, setup.sdr_power, opts)?;
    Ok(SectorOutcome {
        proposed: run("proposed", proposed, &spec, &setup.null_dirs)?,
        sdr: run("sdr", sdr, &spec, &setup.null_dirs)?,
        spec,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockedSetup {
    pub n: usize,
    pub spacing: f64,
    pub blocked: f64,
    /// Repeated-root count of the deeper design.
    pub multiplicity: usize,
    pub passbands: Vec<(f64, f64)>,
    pub transition: f64,
    pub grid_step: f64,
    pub energy: f64,
    pub gamma: Option<f64>,
    /// `None` means `E`, the level of uniform illumination.
    pub desired_level: Option<f64>,
    pub policy: PowerPolicy,
    pub sdr_nulls: SdrNulls,
    pub sdr_power: PowerMode,
}

impl Default for BlockedSetup {
    fn default() -> Self {
        Self {
            n: 20,
            spacing: 0.5,
            blocked: -13.0,
            multiplicity: 3,
            passbands: vec![(-90.0, -20.0), (-6.0, 90.0)],
            transition: 5.0,
            grid_step: 0.25,
            energy: 1.0,
            gamma: None,
            desired_level: None,
            policy: PowerPolicy::PerAntennaOrTotal,
            sdr_nulls: SdrNulls::Omit,
            sdr_power: PowerMode::PerAntenna,
        }
    }
}

impl BlockedSetup {
    pub fn spec(&self, multiplicity: usize) -> Result<DesignSpec> {
        if multiplicity == 0 {
            bail!(Config, "multiplicity must be at least 1");
        }
        let geom = ArrayGeometry::new(self.n, self.spacing)?;
        let variety = Variety::from_directions(&geom, &vec![self.blocked; multiplicity])?;
        let spec = DesignSpec::new(geom, self.passbands.clone(), self.transition, variety, self.grid_step)?;
        let level = self.desired_level.unwrap_or(self.energy);
        finish_spec(spec, self.energy, self.gamma, level)
    }
}

#[derive(Debug, Clone)]
pub struct BlockedOutcome {
    pub single_spec: DesignSpec,
    pub multiple_spec: DesignSpec,
    /// Simple root at the blocked direction.
    pub single: Run,
    /// Repeated root at the blocked direction.
    pub multiple: Run,
    pub sdr: Run,
}

impl BlockedOutcome {
    pub fn check(&self) -> Result<()> {
        self.single.check("single-root design")?;
        self.multiple.check("repeated-root design")?;
        self.sdr.check("SDR baseline")
    }

    /// How much deeper the repeated-root notch is than the simple one, in dB.
    pub fn notch_improvement_db(&self) -> f64 {
        self.single.report.worst_notch_db() - self.multiple.report.worst_notch_db()
    }

    /// `|ripple(single) - ripple(SDR)|` in dB.
    pub fn ripple_mismatch_db(&self) -> f64 {
        (self.single.report.metrics.passband_ripple_db - self.sdr.report.metrics.passband_ripple_db).abs()
    }
}

/// Simple and repeated-root designs for one blocked direction, plus the SDR baseline.
pub fn run_blocked_example(setup: &BlockedSetup, opts: &SolverOptions) -> Result<BlockedOutcome> {
    if setup.multiplicity < 2 {
        bail!(Config, "repeated-root design needs multiplicity >= 2, got {}", setup.multiplicity);
    }
    let single_spec = setup.spec(1)?;
    let multiple_spec = setup.spec(setup.multiplicity)?;
    let dirs = [setup.blocked];
    let single = solve_design(&single_spec, setup.policy, opts)?;
    let multiple = solve_design(&multiple_spec, setup.policy, opts)?;
    let sdr = solve_sdr_baseline(&single_spec, setup.sdr_nulls, setup.sdr_power, opts)?;
    Ok(BlockedOutcome {
        single: run("single", single, &single_spec, &dirs)?,
        multiple: run("multiple", multiple, &multiple_spec, &dirs)?,
        sdr: run("sdr", sdr, &single_spec, &dirs)?,
        single_spec,
        multiple_spec,
    })
}

/// A generic restricted design with its report.
pub fn run_design(spec: &DesignSpec, policy: PowerPolicy, null_dirs: &[f64], opts: &SolverOptions) -> Result<Run> {
    let sol = solve_design(spec, policy, opts)?;
    run("proposed", sol, spec, null_dirs)
}
