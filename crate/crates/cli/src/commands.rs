//! Subcommand bodies. Each writes its files and reports whether every solve was optimal.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use idealface::array::ArrayGeometry;
use idealface::experiments::{run_blocked_example, run_design, run_sector_example, BlockedOutcome, SectorOutcome};
use idealface::gsc::{blocking_matrix, row_membership_residual, verify_blocking};
use idealface::polyideal::Variety;
use idealface::restriction::{DesignSpec, PowerPolicy};
use idealface::sdp::SolveStatus;
use idealface::subspace::{monte_carlo, summarize, ClusterOptions, Method, SnapshotModel};

use crate::config::ExperimentConfig;
use crate::output::{write_json, write_report};

#[derive(Debug, Clone, Default)]
pub struct CommandOutcome {
    pub files: Vec<PathBuf>,
    /// False when some solve did not reach optimality.
    pub optimal: bool,
    /// One line per headline number.
    pub summary: Vec<String>,
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SectorSummary {
    pub asl_gap_db: f64,
    pub proposed_asl_db: f64,
    pub proposed_psl_db: f64,
    pub sdr_asl_db: f64,
    pub proposed_mse: f64,
    pub sdr_mse: f64,
    pub sdr_condition_number: Option<f64>,
    pub proposed_worst_null_db: f64,
    pub proposed_power_mode: String,
}

impl SectorSummary {
    pub fn of(o: &SectorOutcome) -> Self {
        let (p, s) = (&o.proposed.report, &o.sdr.report);
        Self {
            asl_gap_db: o.asl_gap_db(),
            proposed_asl_db: p.metrics.asl_db,
            proposed_psl_db: p.metrics.psl_db,
            sdr_asl_db: s.metrics.asl_db,
            proposed_mse: p.metrics.mse,
            sdr_mse: s.metrics.mse,
            sdr_condition_number: s.x_eigen.condition_number,
            proposed_worst_null_db: p.worst_null_db(),
            proposed_power_mode: p.solver.power_mode.clone(),
        }
    }
}

pub fn example1(cfg: &ExperimentConfig, out: &Path) -> Result<(SectorOutcome, CommandOutcome)> {
    let setup = cfg.sector_setup()?;
    let o = run_sector_example(&setup, &cfg.solver.options())?;
    prepare(out)?;
    let id = cfg.id("example1");
    let mut files = Vec::new();
    for run in [&o.proposed, &o.sdr] {
        files.extend(write_report(out, id, &run.report)?);
    }
    let summary = SectorSummary::of(&o);
    let path = out.join(format!("{id}_summary.json"));
    write_json(&path, &summary)?;
    files.push(path);
    let lines = vec![
        format!("ASL proposed {:.2} dB, SDR {:.2} dB (gap {:.2} dB)", summary.proposed_asl_db, summary.sdr_asl_db, summary.asl_gap_db),
        format!("PSL proposed {:.2} dB", summary.proposed_psl_db),
        format!("MSE proposed {:.4}, SDR {:.4}", summary.proposed_mse, summary.sdr_mse),
        format!("worst null {:.1} dB, SDR condition number {:.3e}", summary.proposed_worst_null_db, summary.sdr_condition_number.unwrap_or(f64::INFINITY)),
        format!("proposed power mode {}", summary.proposed_power_mode),
    ];
    let optimal = o.check().is_ok();
    Ok((o, CommandOutcome { files, optimal, summary: lines }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BlockedSummary {
    pub single_k: usize,
    pub multiple_k: usize,
    pub single_notch_db: f64,
    pub multiple_notch_db: f64,
    pub sdr_notch_db: f64,
    pub notch_improvement_db: f64,
    pub single_ripple_db: f64,
    pub multiple_ripple_db: f64,
    pub sdr_ripple_db: f64,
    pub ripple_mismatch_db: f64,
}

impl BlockedSummary {
    pub fn of(o: &BlockedOutcome) -> Self {
        Self {
            single_k: o.single_spec.k,
            multiple_k: o.multiple_spec.k,
            single_notch_db: o.single.report.worst_notch_db(),
            multiple_notch_db: o.multiple.report.worst_notch_db(),
            sdr_notch_db: o.sdr.report.worst_notch_db(),
            notch_improvement_db: o.notch_improvement_db(),
            single_ripple_db: o.single.report.metrics.passband_ripple_db,
            multiple_ripple_db: o.multiple.report.metrics.passband_ripple_db,
            sdr_ripple_db: o.sdr.report.metrics.passband_ripple_db,
            ripple_mismatch_db: o.ripple_mismatch_db(),
        }
    }
}

pub fn example2(cfg: &ExperimentConfig, out: &Path) -> Result<(BlockedOutcome, CommandOutcome)> {
    let setup = cfg.blocked_setup()?;
    let o = run_blocked_example(&setup, &cfg.solver.options())?;
    prepare(out)?;
    let id = cfg.id("example2");
    let mut files = Vec::new();
    for run in [&o.single, &o.multiple, &o.sdr] {
        files.extend(write_report(out, id, &run.report)?);
    }
    let s = BlockedSummary::of(&o);
    let path = out.join(format!("{id}_summary.json"));
    write_json(&path, &s)?;
    files.push(path);
    let lines = vec![
        format!("K single {}, repeated {}", s.single_k, s.multiple_k),
        format!(
            "notch depth single {:.1} dB, repeated {:.1} dB, SDR {:.1} dB",
            s.single_notch_db, s.multiple_notch_db, s.sdr_notch_db
        ),
        format!(
            "passband ripple single {:.3} dB, repeated {:.3} dB, SDR {:.3} dB",
            s.single_ripple_db, s.multiple_ripple_db, s.sdr_ripple_db
        ),
    ];
    let optimal = o.check().is_ok();
    Ok((o, CommandOutcome { files, optimal, summary: lines }))
}

/// Generic restricted design from the `[design]` section.
pub fn design_spec(cfg: &ExperimentConfig) -> Result<(DesignSpec, Vec<f64>, PowerPolicy)> {
    let d = &cfg.design;
    let Some(pb) = &d.passbands else { bail!("design needs design.passbands") };
    let Some(nulls) = &d.nulls else { bail!("design needs design.nulls") };
    let geom = ArrayGeometry::new(cfg.array.n, cfg.array.spacing)?;
    let variety = Variety::from_directions(&geom, nulls)?;
    let passbands = pb.iter().map(|p| (p[0], p[1])).collect();
    let mut spec = DesignSpec::new(geom, passbands, d.transition.unwrap_or(5.0), variety, d.grid_step.unwrap_or(0.25))?;
    let energy = d.energy.unwrap_or(1.0);
    spec = spec.with_energy(energy)?;
    spec.gamma = 1e-6 * energy / spec.k as f64;
    if let Some(g) = d.gamma {
        spec = spec.with_gamma(g)?;
    }
    spec = spec.with_desired_level(d.desired_level.unwrap_or(energy))?;
    let mut dirs = nulls.clone();
    dirs.sort_by(f64::total_cmp);
    dirs.dedup();
    let policy = d.power.map(|p| p.policy()).unwrap_or(PowerPolicy::PerAntennaOrTotal);
    Ok((spec, dirs, policy))
}

pub fn design(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    let (spec, dirs, policy) = design_spec(cfg)?;
    let run = run_design(&spec, policy, &dirs, &cfg.solver.options())?;
    prepare(out)?;
    let id = cfg.id("design");
    let files = write_report(out, id, &run.report)?.to_vec();
    let m = &run.report.metrics;
    let summary = vec![
        format!("K {}, status {}", spec.k, run.report.solver.status),
        format!("ASL {:.2} dB, PSL {:.2} dB, MSE {:.4}", m.asl_db, m.psl_db, m.mse),
        format!("worst null {:.1} dB", run.report.worst_null_db()),
    ];
    Ok(CommandOutcome { files, optimal: run.solution.status() == SolveStatus::Optimal, summary })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GscReport {
    pub m: usize,
    pub blocked: Vec<f64>,
    pub rows: usize,
    /// Largest `|W a(theta)|` over the blocked directions.
    pub blocked_residual: f64,
    pub membership_residual: f64,
    pub probes: Vec<(f64, f64)>,
}

pub fn gsc(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    let g = &cfg.gsc;
    let geom = ArrayGeometry::new(g.m, g.spacing)?;
    let wb = blocking_matrix(g.m, &g.blocked, &geom)?;
    let blocked = verify_blocking(&wb, &g.blocked, &geom)?;
    let probes = verify_blocking(&wb, &g.probes, &geom)?;
    prepare(out)?;
    let id = cfg.id("gsc");
    let rows_path = out.join(format!("{id}_blocking_rows.csv"));
    let mut w = csv::Writer::from_path(&rows_path)?;
    w.write_record(["row", "col", "re", "im"])?;
    for r in 0..wb.rows().nrows() {
        for c in 0..wb.rows().ncols() {
            let z = wb.rows()[(r, c)];
            w.write_record([r.to_string(), c.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
    }
    w.flush()?;
    let report = GscReport {
        m: g.m,
        blocked: g.blocked.clone(),
        rows: wb.rows().nrows(),
        blocked_residual: blocked.max_residual,
        membership_residual: row_membership_residual(&wb)?,
        probes: probes.per_direction,
    };
    let rep_path = out.join(format!("{id}_blocking_report.json"));
    write_json(&rep_path, &report)?;
    let summary = vec![
        format!("{} x {} blocking matrix", report.rows, report.m),
        format!("blocked residual {:.3e}, membership residual {:.3e}", report.blocked_residual, report.membership_residual),
    ];
    Ok(CommandOutcome { files: vec![rows_path, rep_path], optimal: true, summary })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubspaceSummary {
    pub trials: usize,
    pub root_cluster_rmse_deg: Option<f64>,
    pub root_cluster_failures: usize,
    pub root_music_rmse_deg: Option<f64>,
    pub root_music_failures: usize,
}

pub fn subspace(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    let s = &cfg.subspace;
    let geom = ArrayGeometry::new(s.n, s.spacing)?;
    let mut model = SnapshotModel::new(geom, s.sources.clone(), s.noise_var, s.snapshots, s.seed)?;
    if let Some(p) = &s.powers {
        model.source_powers = p.clone();
        model.validate()?;
    }
    let opts = ClusterOptions { cutoff: s.cutoff, ..ClusterOptions::default() };
    let records = monte_carlo(&model, s.trials, &opts)?;
    prepare(out)?;
    let id = cfg.id("subspace");
    let path = out.join(format!("{id}_trials.csv"));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["trial", "method", "estimate", "error"])?;
    for r in &records {
        let est = r
            .estimate
            .as_ref()
            .map(|v| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        let err = r.error.map(|e| e.to_string()).unwrap_or_default();
        w.write_record([r.trial.to_string(), r.method.name().to_string(), est, err])?;
    }
    w.flush()?;
    let (rc, rcf) = summarize(&records, Method::RootCluster);
    let (rm, rmf) = summarize(&records, Method::RootMusic);
    let summary = SubspaceSummary {
        trials: s.trials,
        root_cluster_rmse_deg: rc.is_finite().then_some(rc),
        root_cluster_failures: rcf,
        root_music_rmse_deg: rm.is_finite().then_some(rm),
        root_music_failures: rmf,
    };
    let spath = out.join(format!("{id}_summary.json"));
    write_json(&spath, &summary)?;
    let lines = vec![
        format!("root clustering RMSE {rc:.3} deg ({rcf} failures)"),
        format!("root-MUSIC RMSE {rm:.3} deg ({rmf} failures)"),
    ];
    Ok(CommandOutcome { files: vec![path, spath], optimal: true, summary: lines })
}
