//! Restricted minimax beampattern design and the SDR baseline.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::array::{steering_vector, AngleGrid, ArrayGeometry, Region};
use crate::error::{bail, Error, Result};
use crate::linalg::{
    c, hermitian_eigenvalues, max_principal_angle, rank, re_trace_product, singular_values, CMat,
    CVec,
};
use crate::polyideal::{IdealBasis, Poly, Variety};
use crate::sdp::{self, HermitianSdp, SdpSolution, SolveStatus, SolverOptions};

/// How the transmit power budget is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// `tr(X H_j) = E/N` for every antenna.
    PerAntenna,
    /// `tr(X Q^H Q) = E` only.
    Total,
}

/// Which power constraint to try.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerPolicy {
    Fixed(PowerMode),
    /// Per-antenna first; total power if that is infeasible.
    PerAntennaOrTotal,
}

#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub geom: ArrayGeometry,
    pub passbands: Vec<(f64, f64)>,
    pub transition: f64,
    pub variety: Variety,
    pub k: usize,
    pub energy: f64,
    pub gamma: f64,
    pub grid: AngleGrid,
    pub desired_level: f64,
}

impl DesignSpec {
    /// Spec with the default budget `E = 1`, `gamma = 1e-6 E/K` and passband
    /// level `E`.
    pub fn new(
        geom: ArrayGeometry,
        passbands: Vec<(f64, f64)>,
        transition: f64,
        variety: Variety,
        grid_step: f64,
    ) -> Result<Self> {
        let grid = AngleGrid::labeled(grid_step, &passbands, transition)?;
        let n = geom.n();
        if variety.len() >= n {
            bail!(Dimension, "{} null roots leave no degrees of freedom for N = {n}", variety.len());
        }
        let k = n - variety.len();
        let energy = 1.0;
        let spec = Self {
            geom,
            passbands,
            transition,
            variety,
            k,
            energy,
            gamma: 1e-6 * energy / k as f64,
            grid,
            desired_level: energy,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks shared by every design: power budget and passband sectors.
    pub fn validate_common(&self) -> Result<()> {
        if !(self.energy > 0.0) {
            bail!(Domain, "power budget must be positive, got {}", self.energy);
        }
        for &(lo, hi) in &self.passbands {
            if !(-90.0..=90.0).contains(&lo) || !(-90.0..=90.0).contains(&hi) || lo > hi {
                bail!(Domain, "bad passband [{lo}, {hi}]");
            }
        }
        if self.grid.len() != self.desired_pattern().len() {
            bail!(Dimension, "grid and desired pattern disagree");
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        let n = self.geom.n();
        if self.k + self.variety.len() != n {
            bail!(Dimension, "K = {} but N - L = {}", self.k, n as i64 - self.variety.len() as i64);
        }
        if !self.variety.on_unit_circle(1e-9) {
            bail!(Domain, "variety root off the unit circle");
        }
        if !(self.gamma > 0.0) {
            bail!(Domain, "gamma must be positive, got {}", self.gamma);
        }
        for &(lo, hi) in &self.passbands {
            // every direction aliasing onto a variety root must avoid the sector
            for &r in self.variety.roots() {
                let u_root = r.conj().arg() / (2.0 * core::f64::consts::PI * self.geom.spacing());
                let (ulo, uhi) = (lo.to_radians().sin(), hi.to_radians().sin());
                let period = 1.0 / self.geom.spacing();
                let kmin = ((ulo - u_root) / period).ceil() as i64;
                let kmax = ((uhi - u_root) / period).floor() as i64;
                if kmin <= kmax {
                    bail!(Domain, "variety direction falls inside passband [{lo}, {hi}]");
                }
            }
        }
        Ok(())
    }

    /// `G_d` on the grid: the passband level inside, zero elsewhere.
    pub fn desired_pattern(&self) -> Vec<f64> {
        self.grid
            .labels()
            .iter()
            .map(|l| if *l == Region::Passband { self.desired_level } else { 0.0 })
            .collect()
    }

    pub fn with_energy(mut self, energy: f64) -> Result<Self> {
        self.energy = energy;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_desired_level(mut self, level: f64) -> Result<Self> {
        if !(level >= 0.0) {
            bail!(Domain, "desired level must be nonnegative, got {level}");
        }
        self.desired_level = level;
        Ok(self)
    }
}

/// Minimax data projected onto a basis `Q` (`N x K`).
#[derive(Debug, Clone)]
pub struct RestrictedProblem {
    pub q: CMat,
    pub generator: Poly,
    pub angles: Vec<f64>,
    pub labels: Vec<Region>,
    /// `Q^H a(theta) a(theta)^H Q` per grid angle.
    pub d_list: Vec<CMat>,
    /// `Q^H B_j Q` per antenna.
    pub h_list: Vec<CMat>,
    pub g_d: Vec<f64>,
    pub gamma: f64,
    pub energy: f64,
}

impl RestrictedProblem {
    pub fn n(&self) -> usize {
        self.q.nrows()
    }
    pub fn k(&self) -> usize {
        self.q.ncols()
    }
}

fn assemble(spec: &DesignSpec, q: CMat, generator: Poly, gamma: f64) -> Result<RestrictedProblem> {
    let n = spec.geom.n();
    let qh = q.adjoint();
    let mut d_list = Vec::with_capacity(spec.grid.len());
    for &theta in spec.grid.angles() {
        let v: CVec = &qh * steering_vector(&spec.geom, theta)?;
        d_list.push(&v * v.adjoint());
    }
    let h_list = (0..n)
        .map(|j| {
            let row = q.row(j);
            row.adjoint() * row
        })
        .collect();
    Ok(RestrictedProblem {
        q,
        generator,
        angles: spec.grid.angles().to_vec(),
        labels: spec.grid.labels().to_vec(),
        d_list,
        h_list,
        g_d: spec.desired_pattern(),
        gamma,
        energy: spec.energy,
    })
}

/// Project the design onto the ideal's Toeplitz basis.
pub fn build_restricted(spec: &DesignSpec) -> Result<RestrictedProblem> {
    spec.validate()?;
    let basis = IdealBasis::from_variety(&spec.variety, spec.geom.n())?;
    if basis.k() != spec.k {
        bail!(Dimension, "basis has {} columns, expected K = {}", basis.k(), spec.k);
    }
    assemble(spec, basis.q().clone(), basis.generator().clone(), spec.gamma)
}

/// Same assembly with an arbitrary `N x K` basis (used for change-of-basis checks).
pub fn build_with_basis(spec: &DesignSpec, q: CMat) -> Result<RestrictedProblem> {
    if q.nrows() != spec.geom.n() {
        bail!(Dimension, "basis has {} rows, expected {}", q.nrows(), spec.geom.n());
    }
    assemble(spec, q, Poly::one(), spec.gamma)
}

/// Epigraph SDP: minimize `t` with `|tr(X D_i) - G_d(i)| <= t` on every
/// non-transition sample, the power rows and `X >= gamma I`.
pub fn to_sdp(rp: &RestrictedProblem, power: PowerMode) -> Result<HermitianSdp> {
    let k = rp.k();
    let mut problem = HermitianSdp::new(k, CMat::zeros(k, k), 1.0, true, rp.gamma)?;
    match power {
        PowerMode::PerAntenna => {
            let share = rp.energy / rp.n() as f64;
            for h in &rp.h_list {
                problem.add_equality(h.clone(), share)?;
            }
        }
        PowerMode::Total => {
            problem.add_equality(rp.q.adjoint() * &rp.q, rp.energy)?;
        }
    }
    for ((d, label), gd) in rp.d_list.iter().zip(&rp.labels).zip(&rp.g_d) {
        if *label == Region::Transition {
            continue;
        }
        problem.add_inequality(d.clone(), -1.0, *gd)?;
        problem.add_inequality(-d.clone(), -1.0, -*gd)?;
    }
    Ok(problem)
}

/// `W = Q R` with `X = R R^H` (lower Cholesky factor).
pub fn recover_w(x: &CMat, q: &CMat) -> Result<CMat> {
    if x.nrows() != q.ncols() || x.ncols() != q.ncols() {
        bail!(Dimension, "X is {}x{}, basis has {} columns", x.nrows(), x.ncols(), q.ncols());
    }
    // complex Cholesky in nalgebra takes sqrt of negative pivots instead of failing
    let l = x
        .clone()
        .cholesky()
        .map(|ch| ch.l())
        .filter(|l| (0..l.nrows()).all(|i| l[(i, i)].re > 0.0 && l[(i, i)].im.abs() <= 1e-12 * l[(i, i)].re))
        .ok_or_else(|| Error::Factorization(String::from("X is not positive definite")))?;
    Ok(q * l)
}

/// Result of a restricted or SDR solve.
#[derive(Debug, Clone)]
pub struct DesignSolution {
    /// Optimal variable on the face (`K x K`, or `N x N` for SDR).
    pub x: CMat,
    /// Full-size transmit correlation `Q X Q^H`.
    pub x_full: CMat,
    /// Beamspace matrix `W = Q R`, when `X` is positive definite.
    pub w: Option<CMat>,
    pub power_mode: PowerMode,
    pub sdp: SdpSolution,
    /// Why the requested power mode was replaced, if it was.
    pub fallback: Option<String>,
}

impl DesignSolution {
    pub fn status(&self) -> SolveStatus {
        self.sdp.status
    }

    /// `tr(X_full B_j)` per antenna.
    pub fn per_antenna_powers(&self) -> Vec<f64> {
        (0..self.x_full.nrows()).map(|j| self.x_full[(j, j)].re).collect()
    }

    /// `lambda_max / lambda_min` of the solved variable (the face matrix, or the full one for SDR).
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.x)
    }
}

pub fn condition_number(x: &CMat) -> f64 {
    let ev = hermitian_eigenvalues(x);
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn finish(rp: &RestrictedProblem, sol: SdpSolution, mode: PowerMode, fallback: Option<String>) -> DesignSolution {
    let x_full = &rp.q * &sol.x * rp.q.adjoint();
    let w = (sol.status != SolveStatus::Infeasible)
        .then(|| recover_w(&sol.x, &rp.q).ok())
        .flatten();
    DesignSolution { x: sol.x.clone(), x_full, w, power_mode: mode, sdp: sol, fallback }
}

/// `R^-1` from `Q = U R`: solving in `Y = R X R^H` works with an orthonormal basis.
fn orthonormalizing_congruence(q: &CMat) -> Result<CMat> {
    q.clone()
        .qr()
        .r()
        .try_inverse()
        .ok_or_else(|| Error::Factorization(String::from("basis Q is rank deficient")))
}

/// Solve a restricted problem under the given power policy.
pub fn solve_restricted(rp: &RestrictedProblem, policy: PowerPolicy, opts: &SolverOptions) -> Result<DesignSolution> {
    let first = match policy {
        PowerPolicy::Fixed(mode) => mode,
        PowerPolicy::PerAntennaOrTotal => PowerMode::PerAntenna,
    };
    let t = orthonormalizing_congruence(&rp.q)?;
    let sol = sdp::solve_congruent(&to_sdp(rp, first)?, &t, opts)?;
    if sol.status == SolveStatus::Infeasible && policy == PowerPolicy::PerAntennaOrTotal {
        let reason = format!("per-antenna power rows infeasible on this face ({})", sol.message);
        let sol = sdp::solve_congruent(&to_sdp(rp, PowerMode::Total)?, &t, opts)?;
        return Ok(finish(rp, sol, PowerMode::Total, Some(reason)));
    }
    Ok(finish(rp, sol, first, None))
}

/// Restricted design straight from a spec.
pub fn solve_design(spec: &DesignSpec, policy: PowerPolicy, opts: &SolverOptions) -> Result<DesignSolution> {
    solve_restricted(&build_restricted(spec)?, policy, opts)
}

/// Whether the SDR baseline also carries the null rows `a^H X a = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdrNulls {
    Omit,
    Keep,
}

/// Full-dimension relaxation (`gamma = 0`, no rank constraint).
pub fn solve_sdr_baseline(
    spec: &DesignSpec,
    nulls: SdrNulls,
    power: PowerMode,
    opts: &SolverOptions,
) -> Result<DesignSolution> {
    match nulls {
        SdrNulls::Omit => spec.validate_common()?,
        SdrNulls::Keep => spec.validate()?,
    }
    let n = spec.geom.n();
    let rp = assemble(spec, CMat::identity(n, n), Poly::one(), 0.0)?;
    let mut problem = to_sdp(&rp, power)?;
    if nulls == SdrNulls::Keep {
        for &r in spec.variety.roots() {
            let alpha = r.conj();
            let mut a = CVec::zeros(n);
            let mut p = c(1.0, 0.0);
            for i in 0..n {
                a[i] = p;
                p *= alpha;
            }
            problem.add_equality(&a * a.adjoint(), 0.0)?;
        }
    }
    let sol = sdp::solve(&problem, opts)?;
    Ok(finish(&rp, sol, power, None))
}

/// Outcome of a convex-combination check on a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceReport {
    pub rank: usize,
    pub expected_rank: usize,
    pub max_principal_angle: f64,
}

impl FaceReport {
    pub fn on_face(&self) -> bool {
        self.rank == self.expected_rank && self.max_principal_angle <= 1e-8
    }
}

/// Rank and column space of `lambda W1 W1^H + (1 - lambda) W2 W2^H`.
pub fn face_convexity_check(w1: &CMat, w2: &CMat, lambda: f64) -> Result<FaceReport> {
    if w1.shape() != w2.shape() {
        bail!(Dimension, "W1 is {:?}, W2 is {:?}", w1.shape(), w2.shape());
    }
    if !(0.0..=1.0).contains(&lambda) {
        bail!(Domain, "lambda must lie in [0, 1], got {lambda}");
    }
    if max_principal_angle(w1, w2) > 1e-8 || rank(w1, 1e-10) != rank(w2, 1e-10) {
        bail!(Precondition, "W1 and W2 do not span the same subspace");
    }
    let x = w1 * w1.adjoint() * c(lambda, 0.0) + w2 * w2.adjoint() * c(1.0 - lambda, 0.0);
    let expected = rank(w1, 1e-10);
    let r = rank(&x, 1e-10);
    let col = crate::linalg::column_space(&x, 1e-10);
    Ok(FaceReport {
        rank: r,
        expected_rank: expected,
        max_principal_angle: max_principal_angle(&col, w1),
    })
}

/// Largest `a^H X a / tr(X)` over the variety directions.
pub fn null_residual(x_full: &CMat, variety: &Variety) -> f64 {
    let n = x_full.nrows();
    let tr: f64 = (0..n).map(|i| x_full[(i, i)].re).sum();
    variety
        .roots()
        .iter()
        .map(|&r| {
            let alpha = r.conj();
            let mut a = CVec::zeros(n);
            let mut p = c(1.0, 0.0);
            for i in 0..n {
                a[i] = p;
                p *= alpha;
            }
            (a.adjoint() * x_full * &a)[(0, 0)].re.abs() / tr.abs().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

/// Smallest singular value bound `sqrt(gamma) * sigma_min(Q)` for recovered `W`.
pub fn rank_floor(q: &CMat, gamma: f64) -> f64 {
    let sv = singular_values(q);
    gamma.sqrt() * sv[sv.len() - 1]
}

/// `Re tr(X D)` on every grid angle.
pub fn restricted_pattern(rp: &RestrictedProblem, x: &CMat) -> Vec<f64> {
    rp.d_list.iter().map(|d| re_trace_product(d, x)).collect()
}

/// Directions of the variety roots (first alias inside the visible region).
pub fn variety_directions(spec: &DesignSpec) -> Vec<f64> {
    spec.variety
        .roots()
        .iter()
        .filter_map(|&r| {
            let u = r.conj().arg() / (2.0 * core::f64::consts::PI * spec.geom.spacing());
            (-1.0..=1.0).contains(&u).then(|| u.asin().to_degrees())
        })
        .collect()
}
