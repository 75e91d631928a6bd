//! Uniform linear array geometry, steering vectors and beampatterns.
//!
//! Angles are in degrees at every public boundary.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{bail, Result};
use crate::linalg::{hermitian_defect, hermitian_eigenvalues, CMat, CVec, C64};

/// dB floor used when converting zero power.
pub const DB_FLOOR: f64 = -400.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n: usize,
    spacing: f64,
}

impl ArrayGeometry {
    /// `spacing` is the element pitch in carrier wavelengths.
    pub fn new(n: usize, spacing: f64) -> Result<Self> {
        if n < 2 {
            bail!(Domain, "an array needs at least two elements, got {n}");
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            bail!(Domain, "element spacing must be positive, got {spacing}");
        }
        Ok(Self { n, spacing })
    }

    /// Half-wavelength ULA.
    pub fn default_ula(n: usize) -> Result<Self> {
        Self::new(n, 0.5)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

fn check_angle(theta_deg: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&theta_deg) {
        bail!(Domain, "angle {theta_deg} deg outside [-90, 90]");
    }
    Ok(())
}

/// `e^{j 2 pi d sin(theta)}`, the unit-circle point of direction `theta`.
pub fn root_of_direction(geom: &ArrayGeometry, theta_deg: f64) -> Result<C64> {
    check_angle(theta_deg)?;
    let phase = 2.0 * PI * geom.spacing * theta_deg.to_radians().sin();
    Ok(C64::from_polar(1.0, phase))
}

/// Element `n` (0-based) is `alpha(theta)^n`.
pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<CVec> {
    let alpha = root_of_direction(geom, theta_deg)?;
    let phase = alpha.arg();
    Ok(CVec::from_fn(geom.n, |i, _| C64::from_polar(1.0, phase * i as f64)))
}

/// Inverse of [`root_of_direction`] for the phase of `z`.
///
/// Fails with an ambiguity error when more than one direction in
/// `[-90, 90]` shares the phase (spacing above half a wavelength).
pub fn direction_of_root(geom: &ArrayGeometry, z: C64) -> Result<f64> {
    let psi = z.arg();
    let period = 2.0 * PI * geom.spacing;
    let kmax = (geom.spacing + 1.0).ceil() as i64;
    let mut hits = Vec::new();
    for k in -kmax..=kmax {
        let u = (psi + 2.0 * PI * k as f64) / period;
        if u.abs() <= 1.0 + 1e-12 {
            hits.push(u.clamp(-1.0, 1.0));
        }
    }
    match hits.as_slice() {
        [u] => Ok(u.asin().to_degrees()),
        [] => bail!(Domain, "phase {psi} maps to no physical direction"),
        _ => bail!(
            Ambiguity,
            "phase {psi} maps to {} directions for spacing {}",
            hits.len(),
            geom.spacing
        ),
    }
}

/// Sample classification on an [`AngleGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Passband,
    Transition,
    Sidelobe,
}

/// Ascending angle samples with a region label each.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    angles: Vec<f64>,
    labels: Vec<Region>,
}

impl AngleGrid {
    pub fn new(angles: Vec<f64>, labels: Vec<Region>) -> Result<Self> {
        if angles.len() != labels.len() {
            bail!(Dimension, "{} angles but {} labels", angles.len(), labels.len());
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            bail!(Domain, "grid angles must be strictly increasing");
        }
        for &a in &angles {
            check_angle(a)?;
        }
        Ok(Self { angles, labels })
    }

    /// Uniform grid over `[-90, 90]`, labelled from passband sectors.
    ///
    /// Samples inside a sector are passband; samples outside every sector
    /// but within `transition` degrees of one (half-open, edge excluded) are
    /// transition; everything else is sidelobe.
    pub fn labeled(step_deg: f64, passbands: &[(f64, f64)], transition: f64) -> Result<Self> {
        if !(step_deg > 0.0) || step_deg > 180.0 {
            bail!(Domain, "grid step {step_deg} must lie in (0, 180]");
        }
        if transition < 0.0 {
            bail!(Domain, "transition width must be nonnegative");
        }
        for &(lo, hi) in passbands {
            check_angle(lo)?;
            check_angle(hi)?;
            if lo > hi {
                bail!(Domain, "passband [{lo}, {hi}] is reversed");
            }
        }
        let count = (180.0 / step_deg + 1e-9).floor() as usize + 1;
        let angles: Vec<f64> = (0..count).map(|i| -90.0 + step_deg * i as f64).collect();
        let eps = 1e-9;
        let labels = angles
            .iter()
            .map(|&a| {
                let dist = passbands
                    .iter()
                    .map(|&(lo, hi)| {
                        if a < lo - eps {
                            lo - a
                        } else if a > hi + eps {
                            a - hi
                        } else {
                            0.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                if dist == 0.0 {
                    Region::Passband
                } else if dist <= transition + eps {
                    Region::Transition
                } else {
                    Region::Sidelobe
                }
            })
            .collect();
        Ok(Self { angles, labels })
    }

    /// Uniform grid, every sample labelled sidelobe.
    pub fn uniform(step_deg: f64) -> Result<Self> {
        Self::labeled(step_deg, &[], 0.0)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn labels(&self) -> &[Region] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn count(&self, region: Region) -> usize {
        self.labels.iter().filter(|&&l| l == region).count()
    }
}

/// Per-angle `a^H X a`. `x` must be Hermitian PSD within tolerance.
pub fn beampattern(x: &CMat, geom: &ArrayGeometry, angles_deg: &[f64]) -> Result<Vec<f64>> {
    if x.nrows() != geom.n || x.ncols() != geom.n {
        bail!(Dimension, "X is {}x{}, array has {} elements", x.nrows(), x.ncols(), geom.n);
    }
    let scale = x.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(f64::MIN_POSITIVE);
    if hermitian_defect(x) > 1e-10 * scale {
        bail!(Domain, "beampattern needs a Hermitian matrix");
    }
    let trace: f64 = (0..geom.n).map(|i| x[(i, i)].re).sum();
    let min_eig = hermitian_eigenvalues(x)[0];
    if min_eig < -1e-8 * trace.abs().max(f64::MIN_POSITIVE) {
        bail!(Domain, "X is not PSD: min eigenvalue {min_eig:e}");
    }
    angles_deg
        .iter()
        .map(|&t| {
            let a = steering_vector(geom, t)?;
            let g = (a.adjoint() * x * &a)[(0, 0)].re;
            Ok(clamp_small_negative(g, trace))
        })
        .collect()
}

/// `sum_k |a^H w_k|^2` over the columns of `w`.
pub fn beampattern_of_weights(w: &CMat, geom: &ArrayGeometry, angles_deg: &[f64]) -> Result<Vec<f64>> {
    if w.nrows() != geom.n {
        bail!(Dimension, "W has {} rows, array has {} elements", w.nrows(), geom.n);
    }
    angles_deg
        .iter()
        .map(|&t| {
            let a = steering_vector(geom, t)?;
            Ok((a.adjoint() * w).iter().map(|z| z.norm_sqr()).sum())
        })
        .collect()
}

fn clamp_small_negative(g: f64, trace: f64) -> f64 {
    if g < 0.0 && g >= -1e-10 * trace.abs().max(1.0) {
        0.0
    } else {
        g
    }
}

/// `10 log10(p)`, floored at [`DB_FLOOR`].
pub fn to_db(p: f64) -> f64 {
    if p <= 0.0 {
        return DB_FLOOR;
    }
    (10.0 * p.log10()).max(DB_FLOOR)
}
