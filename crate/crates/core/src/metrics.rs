//! Beampattern figures of merit.
//!
//! Levels are relative to the passband peak. Patterns are kept in dB and the
//! linear values are derived from them, so a pattern written as text and read
//! back yields the same metrics bit for bit.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::array::{beampattern, to_db, AngleGrid, ArrayGeometry, Region};
use crate::error::{bail, Result};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::restriction::DesignSolution;
use crate::sdp::SolveStatus;

/// Half-width (degrees) of the window used for notch depths.
pub const NOTCH_HALFWIDTH: f64 = 0.5;
const NOTCH_STEP: f64 = 0.005;

#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PatternMetrics {
    /// Largest linear passband level.
    pub passband_peak: f64,
    /// Mean linear sidelobe level over the peak, in dB.
    pub asl_db: f64,
    /// Largest sidelobe over the peak, in dB.
    pub psl_db: f64,
    /// Mean of `(G_d - G)^2` over non-transition samples, linear units.
    pub mse: f64,
    /// Passband max over passband min, in dB.
    pub passband_ripple_db: f64,
}

/// Metrics of a linear pattern sampled on `grid` against the desired pattern.
pub fn compute_metrics(pattern: &[f64], grid: &AngleGrid, desired: &[f64]) -> Result<PatternMetrics> {
    let n = grid.len();
    if pattern.len() != n || desired.len() != n {
        bail!(Dimension, "pattern has {}, desired {}, grid {n} samples", pattern.len(), desired.len());
    }
    let labels = grid.labels();
    let select = |r: Region| pattern.iter().zip(labels).filter(move |(_, l)| **l == r).map(|(v, _)| *v);
    let peak = select(Region::Passband).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        bail!(Metric, "grid has no passband samples");
    }
    if !(peak > 0.0) {
        bail!(Metric, "passband peak is not positive ({peak})");
    }
    let floor = select(Region::Passband).fold(f64::INFINITY, f64::min);
    let side: Vec<f64> = select(Region::Sidelobe).collect();
    if side.is_empty() {
        bail!(Metric, "grid has no sidelobe samples");
    }
    let mean_side = side.iter().sum::<f64>() / side.len() as f64;
    let max_side = side.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut se = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        if labels[i] != Region::Transition {
            let d = desired[i] - pattern[i];
            se += d * d;
            count += 1;
        }
    }
    Ok(PatternMetrics {
        passband_peak: peak,
        asl_db: to_db(mean_side / peak),
        psl_db: to_db(max_side / peak),
        mse: se / count as f64,
        passband_ripple_db: to_db(peak) - to_db(floor),
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NullDepth {
    pub direction_deg: f64,
    /// Level at the direction over the passband peak, in dB.
    pub depth_db: f64,
    /// Largest level within `NOTCH_HALFWIDTH` of the direction over the peak, in dB.
    pub notch_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenSummary {
    pub dim: usize,
    /// Eigenvalues above `1e-9` of the largest.
    pub numerical_rank: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `None` when `X` is singular.
    pub condition_number: Option<f64>,
}

impl EigenSummary {
    pub fn of(x: &CMat) -> Self {
        let ev = hermitian_eigenvalues(x);
        let (lo, hi) = (ev[0], ev[ev.len() - 1]);
        Self {
            dim: ev.len(),
            numerical_rank: ev.iter().filter(|&&v| v > 1e-9 * hi.abs()).count(),
            min_eigenvalue: lo,
            max_eigenvalue: hi,
            condition_number: (lo > 0.0).then(|| hi / lo),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverSummary {
    pub status: String,
    pub iterations: usize,
    pub objective: f64,
    pub duality_gap: f64,
    pub power_mode: String,
    pub fallback: Option<String>,
}

/// Pattern, metrics and solution summary of one design.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BeampatternReport {
    pub method: String,
    pub angles_deg: Vec<f64>,
    /// `10 log10 G(theta)`; the linear pattern is derived from these values.
    pub pattern_db: Vec<f64>,
    pub metrics: PatternMetrics,
    pub nulls: Vec<NullDepth>,
    pub per_antenna_powers: Vec<f64>,
    /// Spectrum of the solved variable `X`.
    pub x_eigen: EigenSummary,
    /// Columns of the recovered `W`, when one was recovered.
    pub w_columns: Option<usize>,
    pub w_min_singular_value: Option<f64>,
    pub solver: SolverSummary,
}

impl BeampatternReport {
    pub fn pattern_linear(&self) -> Vec<f64> {
        self.pattern_db.iter().map(|&d| db_to_lin(d)).collect()
    }

    /// Recompute the pattern metrics from the stored dB values.
    pub fn recompute(&self, grid: &AngleGrid, desired: &[f64]) -> Result<PatternMetrics> {
        compute_metrics(&self.pattern_linear(), grid, desired)
    }

    pub fn worst_null_db(&self) -> f64 {
        self.nulls.iter().map(|n| n.depth_db).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn worst_notch_db(&self) -> f64 {
        self.nulls.iter().map(|n| n.notch_db).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::MaxIter => "max_iter",
        SolveStatus::Infeasible => "infeasible",
    }
}

/// Evaluate a solved design on `grid` and summarize it.
pub fn build_report(
    method: &str,
    sol: &DesignSolution,
    geom: &ArrayGeometry,
    grid: &AngleGrid,
    desired: &[f64],
    null_dirs: &[f64],
) -> Result<BeampatternReport> {
    let raw = beampattern(&sol.x_full, geom, grid.angles())?;
    let pattern_db: Vec<f64> = raw.iter().map(|&v| to_db(v)).collect();
    let lin: Vec<f64> = pattern_db.iter().map(|&d| db_to_lin(d)).collect();
    let metrics = compute_metrics(&lin, grid, desired)?;
    let peak = metrics.passband_peak;
    let mut nulls = Vec::with_capacity(null_dirs.len());
    for &dir in null_dirs {
        let at = beampattern(&sol.x_full, geom, &[dir])?[0];
        let steps = (NOTCH_HALFWIDTH / NOTCH_STEP).round() as i64;
        let window: Vec<f64> = (-steps..=steps)
            .map(|i| dir + i as f64 * NOTCH_STEP)
            .filter(|a| (-90.0..=90.0).contains(a))
            .collect();
        let worst = beampattern(&sol.x_full, geom, &window)?.into_iter().fold(0.0f64, f64::max);
        nulls.push(NullDepth { direction_deg: dir, depth_db: to_db(at / peak), notch_db: to_db(worst / peak) });
    }
    let (w_columns, w_min_singular_value) = match &sol.w {
        Some(w) => {
            let sv = crate::linalg::singular_values(w);
            (Some(w.ncols()), sv.last().copied())
        }
        None => (None, None),
    };
    Ok(BeampatternReport {
        method: String::from(method),
        angles_deg: grid.angles().to_vec(),
        pattern_db,
        metrics,
        nulls,
        per_antenna_powers: sol.per_antenna_powers(),
        x_eigen: EigenSummary::of(&sol.x),
        w_columns,
        w_min_singular_value,
        solver: SolverSummary {
            status: String::from(status_name(sol.status())),
            iterations: sol.sdp.iterations,
            objective: sol.sdp.objective_value,
            duality_gap: sol.sdp.duality_gap,
            power_mode: String::from(match sol.power_mode {
                crate::restriction::PowerMode::PerAntenna => "per_antenna",
                crate::restriction::PowerMode::Total => "total",
            }),
            fallback: sol.fallback.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid() -> AngleGrid {
        AngleGrid::labeled(1.0, &[(-10.0, 10.0)], 5.0).unwrap()
    }

    #[test]
    fn exact_match_has_zero_mse() {
        let g = grid();
        let desired: Vec<f64> = g.labels().iter().map(|l| if *l == Region::Passband { 2.0 } else { 0.0 }).collect();
        // transition samples are ignored
        let pattern: Vec<f64> =
            desired.iter().zip(g.labels()).map(|(d, l)| if *l == Region::Transition { 7.0 } else { *d }).collect();
        let m = compute_metrics(&pattern, &g, &desired).unwrap();
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.passband_ripple_db, 0.0);
        assert_eq!(m.asl_db, crate::array::DB_FLOOR);
    }

    #[test]
    fn isotropic_pattern_has_zero_asl() {
        let g = grid();
        let flat = vec![3.0; g.len()];
        let m = compute_metrics(&flat, &g, &vec![0.0; g.len()]).unwrap();
        assert_eq!(m.asl_db, 0.0);
        assert_eq!(m.psl_db, 0.0);
        let usable = g.len() - g.count(Region::Transition);
        assert!((m.mse - 9.0).abs() < 1e-12 && usable > 0);
    }

    #[test]
    fn empty_regions_are_errors() {
        let all = AngleGrid::labeled(1.0, &[(-90.0, 90.0)], 5.0).unwrap();
        let p = vec![1.0; all.len()];
        assert!(matches!(compute_metrics(&p, &all, &p), Err(crate::Error::Metric(_))));
        assert!(matches!(compute_metrics(&p[1..], &all, &p), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn db_roundtrip_is_stable() {
        for v in [1e-12, 0.3, 1.0, 4.96, 1e3] {
            let d = to_db(v);
            assert!((db_to_lin(d) - v).abs() <= 1e-12 * v);
            assert_eq!(to_db(db_to_lin(d)).to_bits(), to_db(db_to_lin(d)).to_bits());
        }
    }
}
