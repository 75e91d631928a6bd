//! Dense primal-dual interior-point solver for small Hermitian SDPs.
//!
//! Problem class:
//!
//! ```text
//! minimize    Re tr(C X) + c_t t
//! subject to  Re tr(A_i X)          = b_i
//!             Re tr(F_k X) + g_k t <= h_k
//!             X - gamma I          >= 0      (PSD)
//! ```
//!
//! `X` is Hermitian `n x n` and is parametrized by `n^2` real coordinates.
//! The PSD block is handled through the real symmetric embedding of
//! `X - gamma I`; each scalar inequality is a `1 x 1` block with its own
//! slack. The iteration is an infeasible-start path-following method with
//! the HKM search direction and a Mehrotra predictor-corrector, preceded by
//! a phase-1 solve that either certifies infeasibility or supplies a
//! strictly interior starting point.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};
use crate::linalg::{c, hermitian_defect, hermitian_eigenvalues, CMat};

pub use crate::linalg::real_embedding;

/// One scalar inequality `Re tr(F X) + g t <= h`.
#[derive(Debug, Clone)]
pub struct InequalityRow {
    pub f: CMat,
    pub g: f64,
    pub h: f64,
}

/// Hermitian SDP data. Build with [`HermitianSdp::new`] and the `add_*` methods.
#[derive(Debug, Clone)]
pub struct HermitianSdp {
    dim: usize,
    has_epigraph: bool,
    objective: CMat,
    c_t: f64,
    equalities: Vec<(CMat, f64)>,
    inequalities: Vec<InequalityRow>,
    floor: f64,
    floor_matrix: Option<CMat>,
}

fn check_hermitian(name: &str, m: &CMat, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        bail!(Dimension, "{name} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols());
    }
    let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
    if hermitian_defect(m) > 1e-12 * scale {
        bail!(Domain, "{name} is not Hermitian");
    }
    Ok(())
}

impl HermitianSdp {
    pub fn new(dim: usize, objective: CMat, c_t: f64, has_epigraph: bool, floor: f64) -> Result<Self> {
        if dim == 0 {
            bail!(Dimension, "matrix variable must have positive size");
        }
        check_hermitian("objective", &objective, dim)?;
        if !(floor >= 0.0) {
            bail!(Domain, "PSD floor must be nonnegative, got {floor}");
        }
        if !has_epigraph && c_t != 0.0 {
            bail!(Config, "epigraph cost given without an epigraph variable");
        }
        Ok(Self {
            dim,
            has_epigraph,
            objective,
            c_t,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            floor,
            floor_matrix: None,
        })
    }

    /// Replace the floor `gamma I` by a general Hermitian PSD floor `X >= F`.
    pub fn with_floor_matrix(mut self, floor: CMat) -> Result<Self> {
        check_hermitian("floor matrix", &floor, self.dim)?;
        let lo = hermitian_eigenvalues(&floor)[0];
        if lo < -1e-12 * crate::linalg::max_abs(&floor).max(1.0) {
            bail!(Domain, "floor matrix must be PSD (smallest eigenvalue {lo:e})");
        }
        self.floor = lo.max(0.0);
        self.floor_matrix = Some(floor);
        Ok(self)
    }

    /// The floor as a matrix (`gamma I` unless a general floor was set).
    pub fn floor_matrix(&self) -> CMat {
        match &self.floor_matrix {
            Some(f) => f.clone(),
            None => CMat::identity(self.dim, self.dim) * c(self.floor, 0.0),
        }
    }

    /// The same problem in `Y` with `X = T Y T^H` (`T` invertible).
    pub fn congruence(&self, t: &CMat) -> Result<Self> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            bail!(Dimension, "congruence is {}x{}, expected {}x{}", t.nrows(), t.ncols(), self.dim, self.dim);
        }
        let tinv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| crate::Error::Factorization(String::from("congruence is singular")))?;
        let th = t.adjoint();
        let map = |m: &CMat| crate::linalg::hermitian_part(&(&th * m * t));
        let mut out = Self::new(self.dim, map(&self.objective), self.c_t, self.has_epigraph, 0.0)?;
        for (a, b) in &self.equalities {
            out.add_equality(map(a), *b)?;
        }
        for row in &self.inequalities {
            out.add_inequality(map(&row.f), row.g, row.h)?;
        }
        let floor = crate::linalg::hermitian_part(&(&tinv * self.floor_matrix() * tinv.adjoint()));
        out.with_floor_matrix(floor)
    }

    pub fn add_equality(&mut self, a: CMat, b: f64) -> Result<()> {
        check_hermitian("equality matrix", &a, self.dim)?;
        self.equalities.push((a, b));
        Ok(())
    }

    pub fn add_inequality(&mut self, f: CMat, g: f64, h: f64) -> Result<()> {
        check_hermitian("inequality matrix", &f, self.dim)?;
        if g != 0.0 && !self.has_epigraph {
            bail!(Config, "inequality references t but the problem has no epigraph variable");
        }
        self.inequalities.push(InequalityRow { f, g, h });
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn has_epigraph(&self) -> bool {
        self.has_epigraph
    }
    pub fn floor(&self) -> f64 {
        self.floor
    }
    pub fn objective(&self) -> (&CMat, f64) {
        (&self.objective, self.c_t)
    }
    pub fn equalities(&self) -> &[(CMat, f64)] {
        &self.equalities
    }
    pub fn inequalities(&self) -> &[InequalityRow] {
        &self.inequalities
    }

    /// Same problem with `X` shifted by `shift * I` (new floor `floor - shift`).
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let tr = |m: &CMat| (0..self.dim).map(|i| m[(i, i)].re).sum::<f64>();
        let mut floor = self.floor - shift;
        if floor.abs() <= 1e-14 * (1.0 + shift.abs()) {
            floor = 0.0;
        }
        let mut out = Self::new(self.dim, self.objective.clone(), self.c_t, self.has_epigraph, floor)?;
        for (a, b) in &self.equalities {
            out.add_equality(a.clone(), b - shift * tr(a))?;
        }
        for row in &self.inequalities {
            out.add_inequality(row.f.clone(), row.g, row.h - shift * tr(&row.f))?;
        }
        if self.floor_matrix.is_some() {
            let shifted = self.floor_matrix() - CMat::identity(self.dim, self.dim) * c(shift, 0.0);
            out = out.with_floor_matrix(shifted)?;
        }
        Ok(out)
    }

    /// `Re tr(C X) + c_t t`.
    pub fn objective_at(&self, x: &CMat, t: f64) -> f64 {
        crate::linalg::re_trace_product(&self.objective, x) + self.c_t * t
    }

    /// Largest violation of the equality rows relative to `1 + |b|`.
    pub fn equality_violation(&self, x: &CMat) -> f64 {
        self.equalities
            .iter()
            .map(|(a, b)| (crate::linalg::re_trace_product(a, x) - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max)
    }

    /// Smallest slack `h - Re tr(F X) - g t` over the inequality rows.
    pub fn min_inequality_slack(&self, x: &CMat, t: f64) -> f64 {
        self.inequalities
            .iter()
            .map(|r| r.h - crate::linalg::re_trace_product(&r.f, x) - r.g * t)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Invariant check of a solution against its problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionCheck {
    pub floor_margin: f64,
    pub equality_violation: f64,
    pub min_slack: f64,
    pub relative_gap: f64,
}

impl SolutionCheck {
    /// The invariants promised for an optimal solution.
    pub fn holds(&self) -> bool {
        self.floor_margin >= -1e-8
            && self.equality_violation <= 1e-7
            && self.min_slack >= -1e-7
            && self.relative_gap <= 1e-7
    }
}

impl HermitianSdp {
    pub fn check(&self, sol: &SdpSolution) -> SolutionCheck {
        let t = sol.t.unwrap_or(0.0);
        let slack = self.min_inequality_slack(&sol.x, t);
        SolutionCheck {
            floor_margin: hermitian_eigenvalues(&(&sol.x - self.floor_matrix()))[0],
            equality_violation: self.equality_violation(&sol.x),
            min_slack: if slack.is_finite() { slack } else { 0.0 },
            relative_gap: sol.duality_gap.abs() / (1.0 + sol.objective_value.abs()),
        }
    }
}

/// Solver controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
    pub infeasibility_threshold: f64,
    pub run_phase1: bool,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-7,
            max_iter: 200,
            step_fraction: 0.99,
            infeasibility_threshold: 1e-7,
            run_phase1: true,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

/// Per-iteration record, in the solver's internal (scaled) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub complementarity: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: CMat,
    pub t: Option<f64>,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// Larger of the primal-dual objective difference and the complementarity.
    pub duality_gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub phase1_margin: Option<f64>,
    pub history: Vec<IterationRecord>,
    pub message: String,
}

// ---------------------------------------------------------------------------
// Internal real-valued LMI form:
//   min c'y  s.t.  A y = b,  S = sum_p y_p F_p - F0 >= 0 (2n x 2n),
//                  s = h - G y >= 0.
// ---------------------------------------------------------------------------

type Term = (usize, usize, f64);

struct Lmi {
    m: usize,
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    psd_n: usize,
    psd_terms: Vec<Vec<Term>>,
    f0: DMatrix<f64>,
    /// Factor that converts internal objective values back to user units.
    obj_scale: f64,
}

/// Embedded sparse basis matrices of the Hermitian parametrization.
fn embedded_basis(n: usize) -> Vec<Vec<Term>> {
    let mut out = Vec::with_capacity(n * n);
    for (kind, i, j) in param_layout(n) {
        let terms = match kind {
            Param::Diag => vec![(i, i, 1.0), (n + i, n + i, 1.0)],
            Param::Re => vec![(i, j, 1.0), (j, i, 1.0), (n + i, n + j, 1.0), (n + j, n + i, 1.0)],
            Param::Im => vec![(i, n + j, -1.0), (j, n + i, 1.0), (n + i, j, 1.0), (n + j, i, -1.0)],
        };
        out.push(terms);
    }
    out
}

#[derive(Clone, Copy)]
enum Param {
    Diag,
    Re,
    Im,
}

fn param_layout(n: usize) -> Vec<(Param, usize, usize)> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push((Param::Diag, i, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push((Param::Re, i, j));
            out.push((Param::Im, i, j));
        }
    }
    out
}

/// Coefficients `Re tr(A E_p)` of a Hermitian matrix in the parametrization.
fn hvec_coeffs(a: &CMat) -> Vec<f64> {
    param_layout(a.nrows())
        .into_iter()
        .map(|(kind, i, j)| match kind {
            Param::Diag => a[(i, i)].re,
            Param::Re => 2.0 * a[(i, j)].re,
            Param::Im => 2.0 * a[(i, j)].im,
        })
        .collect()
}

fn x_from_params(n: usize, y: &[f64]) -> CMat {
    let mut x = CMat::zeros(n, n);
    for ((kind, i, j), &v) in param_layout(n).into_iter().zip(y) {
        match kind {
            Param::Diag => x[(i, i)] = c(v, 0.0),
            Param::Re => {
                x[(i, j)].re += v;
                x[(j, i)].re += v;
            }
            Param::Im => {
                x[(i, j)].im += v;
                x[(j, i)].im -= v;
            }
        }
    }
    x
}

struct IpmResult {
    y: DVector<f64>,
    status: SolveStatus,
    iterations: usize,
    pobj: f64,
    dobj: f64,
    comp: f64,
    history: Vec<IterationRecord>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    sym(m).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest `alpha` with `x + alpha dx >= 0` for PSD `x` (Cholesky-whitened).
fn psd_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let Some(chol) = x.clone().cholesky() else {
        return 0.0;
    };
    let l = chol.l();
    let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(l.nrows(), l.ncols()));
    let w = &linv * dx * linv.transpose();
    let lam = min_eig(&w);
    if lam >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lam
    }
}

fn lp_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

impl Lmi {
    fn eval_psd(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut s = -self.f0.clone();
        for (p, terms) in self.psd_terms.iter().enumerate() {
            if y[p] != 0.0 {
                for &(a, b, f) in terms {
                    s[(a, b)] += f * y[p];
                }
            }
        }
        s
    }

    fn apply_psd(&self, dy: &DVector<f64>) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.psd_n, self.psd_n);
        for (p, terms) in self.psd_terms.iter().enumerate() {
            for &(a, b, f) in terms {
                s[(a, b)] += f * dy[p];
            }
        }
        s
    }

    fn adjoint_psd(&self, z: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.m,
            self.psd_terms
                .iter()
                .map(|terms| terms.iter().map(|&(a, b, f)| f * z[(b, a)]).sum::<f64>()),
        )
    }

    /// Infeasible-start HKM predictor-corrector.
    fn solve(&self, y0: DVector<f64>, opts: &SolverOptions) -> IpmResult {
        let p = self.g.nrows();
        let q = self.a.nrows();
        let np = self.psd_n;
        let degree = (np + p) as f64;

        let mut y = y0;
        let s_psd0 = self.eval_psd(&y);
        let lam = if np > 0 { min_eig(&s_psd0) } else { 1.0 };
        let mut s_mat = if lam > 1e-8 {
            s_psd0
        } else {
            DMatrix::identity(np, np) * (1.0f64).max(1.0 - lam)
        };
        let lp0 = &self.h - &self.g * &y;
        let mut s_lp = if lp0.iter().all(|&v| v > 1e-8) {
            lp0
        } else {
            DVector::from_element(p, 1.0f64.max(lp0.iter().fold(0.0f64, |a, &v| a.max(-v)) + 1.0))
        };
        let mut z_mat = DMatrix::identity(np, np);
        let mut z_lp = DVector::from_element(p, 1.0);
        let mut nu = DVector::zeros(q);

        let b_norm = 1.0 + self.b.norm() + self.h.norm() + self.f0.norm();
        let c_norm = 1.0 + self.c.norm();
        let mut history = Vec::new();
        let mut status = SolveStatus::MaxIter;
        let mut iterations = 0;
        let (mut pobj, mut dobj, mut last_comp) = (0.0, 0.0, 0.0);
        let mut start: Option<(f64, f64, f64)> = None;
        let mut last_step = 1.0f64;

        for iter in 0..=opts.max_iter {
            iterations = iter;
            // residuals
            let rp_mat = self.eval_psd(&y) - &s_mat;
            let rp_lp = &self.h - &self.g * &y - &s_lp;
            let re = &self.b - &self.a * &y;
            let rd = &self.c - self.adjoint_psd(&z_mat) + self.g.tr_mul(&z_lp) - self.a.tr_mul(&nu);
            let comp = (s_mat.component_mul(&z_mat)).sum() + s_lp.dot(&z_lp);
            let mu = comp / degree;
            last_comp = comp;
            pobj = self.c.dot(&y);
            dobj = (self.f0.component_mul(&z_mat)).sum() - self.h.dot(&z_lp) + self.b.dot(&nu);
            let pres = (rp_mat.norm() + rp_lp.norm() + re.norm()) / b_norm;
            let dres = rd.norm() / c_norm;
            history.push(IterationRecord {
                primal_objective: pobj,
                dual_objective: dobj,
                complementarity: comp,
                primal_residual: pres,
                dual_residual: dres,
            });
            let rel_gap = self.obj_scale * comp.max((pobj - dobj).abs())
                / (1.0 + self.obj_scale * pobj.abs());
            if rel_gap <= opts.gap_tol && pres <= opts.feas_tol && dres <= opts.feas_tol {
                status = SolveStatus::Optimal;
                break;
            }
            let (mu0, pres0, dres0) = *start.get_or_insert((mu, pres, dres));
            // how far the residuals have come, relative to where they started
            let lag = [(pres, pres0), (dres, dres0)]
                .iter()
                .filter(|(_, r0)| *r0 > opts.feas_tol)
                .map(|(r, r0)| r / r0)
                .fold(0.0, f64::max);
            if iter == opts.max_iter || !mu.is_finite() {
                break;
            }

            // Schur complement
            let sinv = match s_mat.clone().cholesky() {
                Some(ch) => ch.inverse(),
                None => break,
            };
            let m_mat = self.schur(&sinv, &z_mat, &s_lp, &z_lp);
            let Some(solver) = BorderedSolver::new(m_mat, &self.a) else {
                break;
            };

            let sinv_rp_z = &sinv * &rp_mat * &z_mat;
            let direction = |sigma_mu: f64,
                             corr_mat: Option<&DMatrix<f64>>,
                             corr_lp: Option<&DVector<f64>>| {
                let mut k_mat = &sinv * sigma_mu - &z_mat - &sinv_rp_z;
                if let Some(cm) = corr_mat {
                    k_mat -= &sinv * cm;
                }
                let mut k_lp = DVector::from_fn(p, |i, _| {
                    sigma_mu / s_lp[i] - z_lp[i] - rp_lp[i] * z_lp[i] / s_lp[i]
                });
                if let Some(cl) = corr_lp {
                    for i in 0..p {
                        k_lp[i] -= cl[i] / s_lp[i];
                    }
                }
                let rhs = self.adjoint_psd(&sym(&k_mat)) - self.g.tr_mul(&k_lp) - &rd;
                let (dy, dnu) = solver.solve(&rhs, &re);
                let ds_mat = self.apply_psd(&dy) + &rp_mat;
                let ds_lp = -(&self.g * &dy) + &rp_lp;
                let dz_mat = sym(&(k_mat - &sinv * &ds_mat * &z_mat + &sinv_rp_z));
                let dz_lp = DVector::from_fn(p, |i, _| {
                    k_lp[i] - (ds_lp[i] - rp_lp[i]) * z_lp[i] / s_lp[i]
                });
                (dy, dnu, ds_mat, ds_lp, dz_mat, dz_lp)
            };

            // predictor
            let (_, _, ds_a, dsl_a, dz_a, dzl_a) = direction(0.0, None, None);
            let ap = 1.0f64.min(psd_step(&s_mat, &ds_a)).min(lp_step(&s_lp, &dsl_a));
            let ad = 1.0f64.min(psd_step(&z_mat, &dz_a)).min(lp_step(&z_lp, &dzl_a));
            let s_aff = &s_mat + &ds_a * ap;
            let z_aff = &z_mat + &dz_a * ad;
            let comp_aff = s_aff.component_mul(&z_aff).sum()
                + (&s_lp + &dsl_a * ap).dot(&(&z_lp + &dzl_a * ad));
            let mut sigma = (comp_aff / comp).clamp(0.0, 1.0).powi(3);
            // re-centre after a blocked step, and keep complementarity from
            // outrunning feasibility
            if last_step < 0.1 {
                sigma = sigma.max(0.5);
            }
            if mu < 1e-2 * lag * mu0 {
                sigma = sigma.max(0.3);
            }

            // corrector
            let corr_mat = &ds_a * &dz_a;
            let corr_lp = dsl_a.component_mul(&dzl_a);
            let (dy, dnu, ds, dsl, dz, dzl) = direction(sigma * mu, Some(&corr_mat), Some(&corr_lp));
            let ap = 1.0f64
                .min(opts.step_fraction * psd_step(&s_mat, &ds))
                .min(opts.step_fraction * lp_step(&s_lp, &dsl));
            let ad = 1.0f64
                .min(opts.step_fraction * psd_step(&z_mat, &dz))
                .min(opts.step_fraction * lp_step(&z_lp, &dzl));

            y += &dy * ap;
            s_mat = sym(&(&s_mat + &ds * ap));
            s_lp += &dsl * ap;
            z_mat = sym(&(&z_mat + &dz * ad));
            z_lp += &dzl * ad;
            nu += &dnu * ad;

            if opts.verbose {
                #[cfg(feature = "std")]
                std::eprintln!(
                    "it {iter:3} pobj {pobj:+.8e} dobj {dobj:+.8e} mu {mu:.2e} pres {pres:.2e} dres {dres:.2e} ap {ap:.3} ad {ad:.3}"
                );
            }
            last_step = ap.min(ad);
            if ap < 1e-12 && ad < 1e-12 {
                break;
            }
        }
        IpmResult { y, status, iterations, pobj, dobj, comp: last_comp, history }
    }

    fn schur(
        &self,
        sinv: &DMatrix<f64>,
        z: &DMatrix<f64>,
        s_lp: &DVector<f64>,
        z_lp: &DVector<f64>,
    ) -> DMatrix<f64> {
        let m = self.m;
        let mut out = DMatrix::zeros(m, m);
        // PSD part: tr(F_p S^-1 F_q Z) = sum f f' Sinv[b,c] Z[d,a]
        for pi in 0..m {
            let tp = &self.psd_terms[pi];
            if tp.is_empty() {
                continue;
            }
            for qi in pi..m {
                let tq = &self.psd_terms[qi];
                let mut acc = 0.0;
                for &(a, b, f) in tp {
                    for &(cc, d, g) in tq {
                        acc += f * g * sinv[(b, cc)] * z[(d, a)];
                    }
                }
                out[(pi, qi)] += acc;
                if qi != pi {
                    out[(qi, pi)] += acc;
                }
            }
        }
        if self.g.nrows() > 0 {
            let mut scaled = self.g.clone();
            for (i, mut row) in scaled.row_iter_mut().enumerate() {
                row *= (z_lp[i] / s_lp[i]).sqrt();
            }
            out += scaled.tr_mul(&scaled);
        }
        out
    }
}

struct BorderedSolver {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    minv_at: DMatrix<f64>,
    schur_chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    a: DMatrix<f64>,
}

impl BorderedSolver {
    fn new(mut m: DMatrix<f64>, a: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let diag_max = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut reg = 0.0;
        let chol = loop {
            if let Some(ch) = m.clone().cholesky() {
                break ch;
            }
            reg = if reg == 0.0 { 1e-14 * diag_max } else { reg * 100.0 };
            if reg > 1e-4 * diag_max {
                return None;
            }
            for i in 0..n {
                m[(i, i)] += reg;
            }
        };
        let (minv_at, schur_chol) = if a.nrows() > 0 {
            let minv_at = chol.solve(&a.transpose());
            let s = a * &minv_at;
            (minv_at, Some(sym(&s).cholesky()?))
        } else {
            (DMatrix::zeros(n, 0), None)
        };
        Some(Self { chol, minv_at, schur_chol, a: a.clone() })
    }

    /// Solve `M dy - A^T dnu = rhs`, `A dy = re`.
    fn solve(&self, rhs: &DVector<f64>, re: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let minv_rhs = self.chol.solve(rhs);
        match &self.schur_chol {
            None => (minv_rhs, DVector::zeros(0)),
            Some(sc) => {
                let dnu = sc.solve(&(re - &self.a * &minv_rhs));
                let dy = minv_rhs + &self.minv_at * &dnu;
                (dy, dnu)
            }
        }
    }
}

/// Orthonormalize equality rows; `None` if the system is inconsistent.
fn orthonormal_equalities(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<(DMatrix<f64>, DVector<f64>, f64)> {
    let (q, m) = a.shape();
    if q == 0 {
        return Some((DMatrix::zeros(0, m), DVector::zeros(0), 0.0));
    }
    // a^T = U S V^T, so the row space of a is spanned by the columns of U
    let d = crate::linalg::svd(&a.transpose());
    let top = d.s.first().copied().unwrap_or(0.0);
    let keep = d.s.iter().filter(|&&v| v > 1e-10 * top).count();
    let mut a_out = DMatrix::zeros(keep, m);
    let mut b_out = DVector::zeros(keep);
    for i in 0..keep {
        a_out.set_row(i, &d.u.column(i).transpose());
        b_out[i] = d.v.column(i).dot(b) / d.s[i];
    }
    // consistency: residual of the least-squares solution
    let y_ls = a_out.tr_mul(&b_out);
    let resid = (a * &y_ls - b).norm() / (1.0 + b.norm());
    Some((a_out, b_out, resid))
}

/// Solve a [`HermitianSdp`].
pub fn solve(problem: &HermitianSdp, opts: &SolverOptions) -> Result<SdpSolution> {
    let n = problem.dim;
    let mx = n * n;
    let has_t = problem.has_epigraph;
    let m = mx + usize::from(has_t);

    // raw data in parameter space
    let eq_rows: Vec<Vec<f64>> = problem.equalities.iter().map(|(a, _)| hvec_coeffs(a)).collect();
    let eq_b: Vec<f64> = problem.equalities.iter().map(|(_, b)| *b).collect();
    let ineq_rows: Vec<(Vec<f64>, f64, f64)> = problem
        .inequalities
        .iter()
        .map(|r| (hvec_coeffs(&r.f), r.g, r.h))
        .collect();

    // variable scaling
    let kx = {
        let logs: Vec<f64> = eq_rows
            .iter()
            .zip(&eq_b)
            .filter_map(|(row, b)| {
                let nr = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                (b.abs() > 0.0 && nr > 0.0).then(|| (b.abs() / nr).ln())
            })
            .collect();
        let base = if logs.is_empty() {
            1.0
        } else {
            Float::exp(logs.iter().sum::<f64>() / logs.len() as f64)
        };
        let fm = problem.floor_matrix();
        base.max((0..n).map(|i| fm[(i, i)].re).sum::<f64>() / n as f64)
    };
    let kt = {
        let hmax = ineq_rows
            .iter()
            .filter(|(_, g, _)| *g != 0.0)
            .map(|(_, _, h)| h.abs())
            .fold(0.0, f64::max);
        if hmax > 0.0 {
            hmax
        } else {
            1.0
        }
    };

    // objective
    let mut c_vec = DVector::zeros(m);
    for (p, v) in hvec_coeffs(&problem.objective).into_iter().enumerate() {
        c_vec[p] = v * kx;
    }
    if has_t {
        c_vec[mx] = problem.c_t * kt;
    }
    let c_scale = c_vec.norm().max(1e-300);
    let c_vec = if c_vec.norm() > 0.0 { c_vec / c_scale } else { c_vec };
    let c_scale = if c_scale <= 1e-300 { 1.0 } else { c_scale };

    // equalities
    let mut a_raw = DMatrix::zeros(eq_rows.len(), m);
    for (i, row) in eq_rows.iter().enumerate() {
        for (p, &v) in row.iter().enumerate() {
            a_raw[(i, p)] = v * kx;
        }
    }
    let b_raw = DVector::from_vec(eq_b.clone());
    let Some((a_mat, b_vec, eq_resid)) = orthonormal_equalities(&a_raw, &b_raw) else {
        bail!(Solver, "equality preprocessing failed");
    };
    if eq_resid > opts.infeasibility_threshold {
        return Ok(infeasible_solution(
            problem,
            format!("equality constraints are inconsistent (least-squares residual {eq_resid:.3e})"),
            None,
        ));
    }

    // inequalities, rows normalized
    let p = ineq_rows.len();
    let mut g_mat = DMatrix::zeros(p, m);
    let mut h_vec = DVector::zeros(p);
    for (k, (row, g, h)) in ineq_rows.iter().enumerate() {
        let mut norm2 = 0.0;
        for (pi, &v) in row.iter().enumerate() {
            g_mat[(k, pi)] = v * kx;
            norm2 += (v * kx) * (v * kx);
        }
        if has_t {
            g_mat[(k, mx)] = g * kt;
            norm2 += (g * kt) * (g * kt);
        }
        let nr = norm2.sqrt();
        if nr > 0.0 {
            for pi in 0..m {
                g_mat[(k, pi)] /= nr;
            }
            h_vec[k] = h / nr;
        } else {
            if *h < -opts.infeasibility_threshold {
                return Ok(infeasible_solution(problem, format!("row {k} reads 0 <= {h}"), None));
            }
            h_vec[k] = 1.0;
        }
    }

    let mut psd_terms = embedded_basis(n);
    if has_t {
        psd_terms.push(Vec::new());
    }
    let f0 = real_embedding(&problem.floor_matrix()) / kx;
    let lmi = Lmi {
        m,
        c: c_vec,
        a: a_mat,
        b: b_vec,
        g: g_mat,
        h: h_vec,
        psd_n: 2 * n,
        psd_terms,
        f0,
        obj_scale: c_scale,
    };

    // starting point
    let mut y0 = lmi.a.tr_mul(&lmi.b);
    let mut phase1_margin = None;
    if opts.run_phase1 {
        let (margin, y_feas) = phase1(&lmi, mx, has_t, opts);
        phase1_margin = Some(margin);
        if margin > opts.infeasibility_threshold {
            return Ok(infeasible_solution(
                problem,
                format!("phase-1 found no feasible point (margin {margin:.3e})"),
                Some(margin),
            ));
        }
        if margin < 0.0 {
            y0 = y_feas;
        }
    }

    let res = lmi.solve(y0, opts);
    let x = {
        let params: Vec<f64> = (0..mx).map(|i| res.y[i] * kx).collect();
        x_from_params(n, &params)
    };
    let t = has_t.then(|| res.y[mx] * kt);
    let objective_value = problem.objective_at(&x, t.unwrap_or(0.0));
    let message = match res.status {
        SolveStatus::Optimal => String::from("optimal"),
        SolveStatus::MaxIter => format!("stopped after {} iterations", res.iterations),
        SolveStatus::Infeasible => String::from("infeasible"),
    };
    Ok(SdpSolution {
        x,
        t,
        objective_value,
        dual_objective: res.dobj * c_scale,
        duality_gap: (res.pobj - res.dobj).abs().max(res.comp) * c_scale,
        iterations: res.iterations,
        status: res.status,
        phase1_margin,
        history: res.history,
        message,
    })
}

/// Solve in the variable `Y` with `X = T Y T^H` and report the solution in `X`.
///
/// A well-chosen `T` (for instance one that orthonormalizes a basis the
/// constraint matrices were projected onto) evens out the scale of `X`.
pub fn solve_congruent(problem: &HermitianSdp, t: &CMat, opts: &SolverOptions) -> Result<SdpSolution> {
    let mut sol = solve(&problem.congruence(t)?, opts)?;
    if sol.status != SolveStatus::Infeasible {
        sol.x = crate::linalg::hermitian_part(&(t * &sol.x * t.adjoint()));
        sol.objective_value = problem.objective_at(&sol.x, sol.t.unwrap_or(0.0));
    }
    Ok(sol)
}

fn infeasible_solution(problem: &HermitianSdp, message: String, margin: Option<f64>) -> SdpSolution {
    SdpSolution {
        x: CMat::zeros(problem.dim, problem.dim),
        t: problem.has_epigraph.then_some(0.0),
        objective_value: f64::NAN,
        dual_objective: f64::NAN,
        duality_gap: f64::NAN,
        iterations: 0,
        status: SolveStatus::Infeasible,
        phase1_margin: margin,
        history: Vec::new(),
        message,
    }
}

/// Minimize `tau` subject to the equalities, `X - gamma I + tau I >= 0`,
/// the rows that do not involve `t` relaxed by `tau`, `tau >= -1` and a
/// trace bound. Rows with `t` are dropped when `t` can always satisfy them.
fn phase1(lmi: &Lmi, mx: usize, has_t: bool, opts: &SolverOptions) -> (f64, DVector<f64>) {
    let p = lmi.g.nrows();
    let t_col = has_t.then_some(mx);
    let signs: Vec<f64> = match t_col {
        Some(col) => (0..p).map(|k| lmi.g[(k, col)]).filter(|&v| v != 0.0).collect(),
        None => Vec::new(),
    };
    let t_free = signs.iter().all(|&v| v < 0.0) || signs.iter().all(|&v| v > 0.0);
    let keep_t = has_t && !t_free;
    let rows: Vec<usize> = (0..p)
        .filter(|&k| keep_t || t_col.is_none_or(|col| lmi.g[(k, col)] == 0.0))
        .collect();

    let nvar = mx + usize::from(keep_t) + 1;
    let tau = nvar - 1;
    let y_ls = lmi.a.tr_mul(&lmi.b);
    let n = lmi.psd_n / 2;
    let radius = 100.0 * (n as f64 + y_ls.iter().map(|v| v.abs()).sum::<f64>());

    let mut a = DMatrix::zeros(lmi.a.nrows(), nvar);
    for i in 0..lmi.a.nrows() {
        for j in 0..mx + usize::from(keep_t) {
            a[(i, j)] = lmi.a[(i, j)];
        }
    }
    let extra = 2;
    let mut g = DMatrix::zeros(rows.len() + extra, nvar);
    let mut h = DVector::zeros(rows.len() + extra);
    for (r, &k) in rows.iter().enumerate() {
        for j in 0..mx + usize::from(keep_t) {
            g[(r, j)] = lmi.g[(k, j)];
        }
        g[(r, tau)] = -1.0;
        h[r] = lmi.h[k];
    }
    // tau >= -1
    let r = rows.len();
    g[(r, tau)] = -1.0;
    h[r] = 1.0;
    // tr(X) <= radius
    for i in 0..n {
        g[(r + 1, i)] = 1.0;
    }
    h[r + 1] = radius;
    let g_norm = (n as f64).sqrt();
    for j in 0..nvar {
        g[(r + 1, j)] /= g_norm;
    }
    h[r + 1] /= g_norm;

    let mut psd_terms: Vec<Vec<Term>> = lmi.psd_terms[..mx].to_vec();
    if keep_t {
        psd_terms.push(Vec::new());
    }
    psd_terms.push((0..lmi.psd_n).map(|i| (i, i, 1.0)).collect());
    let mut c = DVector::zeros(nvar);
    c[tau] = 1.0;
    let aux = Lmi {
        m: nvar,
        c,
        a,
        b: lmi.b.clone(),
        g,
        h,
        psd_n: lmi.psd_n,
        psd_terms,
        f0: lmi.f0.clone(),
        obj_scale: 1.0,
    };
    let mut y0 = DVector::zeros(nvar);
    for j in 0..y_ls.len().min(mx + usize::from(keep_t)) {
        y0[j] = y_ls[j];
    }
    let s0 = aux.eval_psd(&y0);
    y0[tau] = (1.0 - min_eig(&s0)).max(0.0) + 1.0;
    let mut p1_opts = opts.clone();
    p1_opts.verbose = false;
    let res = aux.solve(y0, &p1_opts);
    let margin = res.y[tau];

    // assemble a start point for the original problem
    let mut y = DVector::zeros(lmi.m);
    for j in 0..mx {
        y[j] = res.y[j];
    }
    if let Some(col) = t_col {
        if keep_t {
            y[col] = res.y[mx];
        } else {
            // smallest t (plus margin) satisfying every t-row strictly
            let mut need = f64::NEG_INFINITY;
            let mut bound_from_above = false;
            for k in 0..p {
                let gk = lmi.g[(k, col)];
                if gk == 0.0 {
                    continue;
                }
                let rest: f64 = (0..mx).map(|j| lmi.g[(k, j)] * y[j]).sum();
                let lim = (lmi.h[k] - rest) / gk;
                if gk < 0.0 {
                    need = need.max(lim);
                } else {
                    bound_from_above = true;
                    need = need.max(-lim);
                }
            }
            let tval = if bound_from_above { -need - 1.0 } else { need + 1.0 };
            y[col] = if tval.is_finite() { tval } else { 0.0 };
        }
    }
    (margin, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, re_trace_product, C64};
    use proptest::prelude::*;

    fn e11(n: usize) -> CMat {
        let mut m = CMat::zeros(n, n);
        m[(0, 0)] = c(1.0, 0.0);
        m
    }

    #[test]
    fn embedding_examples() {
        let e = real_embedding(&CMat::identity(2, 2));
        assert_eq!(e, DMatrix::identity(4, 4));
        let h = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let mut ev: Vec<f64> = real_embedding(&h).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn param_roundtrip() {
        let x = CMat::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0), c(0.5, 0.2), c(-0.1, 0.3),
                c(0.5, -0.2), c(2.0, 0.0), c(0.0, -0.7),
                c(-0.1, -0.3), c(0.0, 0.7), c(3.0, 0.0),
            ],
        );
        // coordinates are Re tr(E_p X) with E_p the dual basis scaled by 2 off-diagonal
        let coords: Vec<f64> = hvec_coeffs(&x)
            .iter()
            .zip(param_layout(3))
            .map(|(v, (k, _, _))| match k {
                Param::Diag => *v,
                _ => v / 2.0,
            })
            .collect();
        let back = x_from_params(3, &coords);
        assert!((back - &x).norm() < 1e-14);
        let emb = real_embedding(&x);
        let mut via_terms = DMatrix::zeros(6, 6);
        for (terms, &v) in embedded_basis(3).iter().zip(&coords) {
            for &(a, b, f) in terms {
                via_terms[(a, b)] += f * v;
            }
        }
        assert!((emb - via_terms).norm() < 1e-14);
    }

    #[test]
    fn trace_minimization_forced_by_constraint() {
        let mut sdp = HermitianSdp::new(2, CMat::identity(2, 2), 0.0, false, 0.0).unwrap();
        sdp.add_equality(e11(2), 1.0).unwrap();
        let sol = solve(&sdp, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.message);
        assert!((sol.objective_value - 1.0).abs() < 1e-6);
        assert!((sol.x[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(sol.x[(1, 1)].re.abs() < 1e-6);
    }

    #[test]
    fn scalar_epigraph_with_floor() {
        // minimize t s.t. -t <= 1 - x <= t, x >= 0.1
        let mut sdp = HermitianSdp::new(1, CMat::zeros(1, 1), 1.0, true, 0.1).unwrap();
        sdp.add_inequality(-e11(1), -1.0, -1.0).unwrap();
        sdp.add_inequality(e11(1), -1.0, 1.0).unwrap();
        let sol = solve(&sdp, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.message);
        assert!((sol.x[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(sol.t.unwrap().abs() < 1e-6);
    }

    #[test]
    fn infeasible_floor_detected() {
        // tr(X) = 1 with X >= I (n = 2) is impossible
        let mut sdp = HermitianSdp::new(2, CMat::zeros(2, 2), 0.0, false, 1.0).unwrap();
        sdp.add_equality(CMat::identity(2, 2), 1.0).unwrap();
        let sol = solve(&sdp, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn inconsistent_equalities_detected() {
        let mut sdp = HermitianSdp::new(2, CMat::zeros(2, 2), 0.0, false, 0.0).unwrap();
        sdp.add_equality(e11(2), 1.0).unwrap();
        sdp.add_equality(e11(2) * c(2.0, 0.0), 1.0).unwrap();
        let sol = solve(&sdp, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn construction_errors() {
        assert!(HermitianSdp::new(0, CMat::zeros(0, 0), 0.0, false, 0.0).is_err());
        let mut sdp = HermitianSdp::new(2, CMat::identity(2, 2), 0.0, false, 0.0).unwrap();
        assert!(matches!(sdp.add_equality(CMat::identity(3, 3), 1.0), Err(crate::Error::Dimension(_))));
        let mut nh = CMat::zeros(2, 2);
        nh[(0, 1)] = C64::new(1.0, 0.0);
        assert!(sdp.add_equality(nh, 0.0).is_err());
        assert!(sdp.add_inequality(CMat::identity(2, 2), 1.0, 0.0).is_err());
    }

    #[test]
    fn complex_offdiagonal_objective() {
        // minimize Re tr(C X) with C = [[1, j],[-j, 1]], tr X = 2 -> lambda_min(C) * 2 = 0
        let cm = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let mut sdp = HermitianSdp::new(2, cm.clone(), 0.0, false, 0.0).unwrap();
        sdp.add_equality(CMat::identity(2, 2), 2.0).unwrap();
        let sol = solve(&sdp, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective_value.abs() < 1e-6);
        let ev = hermitian_eigenvalues(&sol.x);
        assert!(ev[0] > -1e-8);
    }

    fn herm_from(n: usize, v: &[f64]) -> CMat {
        let mut m = CMat::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            m[(i, i)] = c(v[k], 0.0);
            k += 1;
            for j in i + 1..n {
                m[(i, j)] = c(v[k], v[k + 1]);
                m[(j, i)] = c(v[k], -v[k + 1]);
                k += 2;
            }
        }
        m
    }

    fn gram_schmidt(mut basis: Vec<CMat>) -> Vec<CMat> {
        let mut out: Vec<CMat> = Vec::new();
        for mut b in basis.drain(..) {
            for q in &out {
                let proj = re_trace_product(q, &b);
                b -= q * c(proj, 0.0);
            }
            let nrm = re_trace_product(&b, &b).sqrt();
            if nrm > 1e-9 {
                out.push(b * c(1.0 / nrm, 0.0));
            }
        }
        out
    }

    struct Slice {
        sdp: HermitianSdp,
        x0: CMat,
        b1: CMat,
        b2: CMat,
        dk: Vec<(CMat, f64)>,
        cm: CMat,
    }

    /// Problem whose feasible set is the 2-parameter slice `X0 + a B1 + b B2`
    /// (|a|, |b| <= 2) with a minimax epigraph term in the objective.
    fn slice_instance(v: &[f64]) -> Slice {
        let n = 3;
        let mut x0 = herm_from(n, &v[0..9]) * c(0.3, 0.0);
        for i in 0..n {
            x0[(i, i)] += c(1.0, 0.0);
        }
        let mut basis = vec![herm_from(n, &v[9..18]), herm_from(n, &v[18..27])];
        for k in 0..9 {
            let mut e = vec![0.0; 9];
            e[k] = 1.0;
            basis.push(herm_from(n, &e));
        }
        let ortho = gram_schmidt(basis);
        let (b1, b2) = (ortho[0].clone(), ortho[1].clone());
        let cm = herm_from(n, &v[27..36]);
        let dk: Vec<(CMat, f64)> = (0..2)
            .map(|k| (herm_from(n, &v[36 + 9 * k..45 + 9 * k]), v[54 + k]))
            .collect();
        let mut sdp = HermitianSdp::new(n, cm.clone(), 1.0, true, 0.05).unwrap();
        for a in &ortho[2..] {
            sdp.add_equality(a.clone(), re_trace_product(a, &x0)).unwrap();
        }
        for bb in [&b1, &b2] {
            let mid = re_trace_product(bb, &x0);
            sdp.add_inequality(bb.clone(), 0.0, mid + 2.0).unwrap();
            sdp.add_inequality(-bb.clone(), 0.0, -(mid - 2.0)).unwrap();
        }
        for (d, target) in &dk {
            sdp.add_inequality(d.clone(), -1.0, *target).unwrap();
            sdp.add_inequality(-d.clone(), -1.0, -*target).unwrap();
        }
        Slice { sdp, x0, b1, b2, dk, cm }
    }

    /// Minimizer of a unimodal function on `[lo, hi]` by golden-section search.
    fn golden(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        while b - a > 1e-11 {
            let x1 = b - r * (b - a);
            let x2 = a + r * (b - a);
            if f(x1) <= f(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        0.5 * (a + b)
    }

    /// Interval where a concave function stays >= level, or `None`.
    fn superlevel(lo: f64, hi: f64, level: f64, f: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
        let peak = golden(lo, hi, |x| -f(x));
        if f(peak) < level {
            return None;
        }
        let edge = |mut inside: f64, mut outside: f64| {
            if f(outside) >= level {
                return outside;
            }
            for _ in 0..80 {
                let mid = 0.5 * (inside + outside);
                if f(mid) >= level {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        Some((edge(peak, lo), edge(peak, hi)))
    }

    /// Exact low-dimensional oracle: the slice objective is convex in (a, b)
    /// and lambda_min is concave, so nested 1-D searches are reliable.
    fn brute_force(sl: &Slice) -> Option<f64> {
        let x_at = |a: f64, b: f64| &sl.x0 + &sl.b1 * c(a, 0.0) + &sl.b2 * c(b, 0.0);
        let lam = |a: f64, b: f64| hermitian_eigenvalues(&x_at(a, b))[0];
        let f = |a: f64, b: f64| {
            let x = x_at(a, b);
            let dev = sl
                .dk
                .iter()
                .map(|(d, tgt)| (re_trace_product(d, &x) - tgt).abs())
                .fold(0.0, f64::max);
            re_trace_product(&sl.cm, &x) + dev
        };
        let best_lam = |a: f64| lam(a, golden(-2.0, 2.0, |b| -lam(a, b)));
        let (alo, ahi) = superlevel(-2.0, 2.0, 0.05, best_lam)?;
        let inner = |a: f64| match superlevel(-2.0, 2.0, 0.05, |b| lam(a, b)) {
            Some((blo, bhi)) => f(a, golden(blo, bhi, |b| f(a, b))),
            None => f64::INFINITY,
        };
        Some(inner(golden(alo, ahi, inner)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_instance_matches_brute_force(v in prop::collection::vec(-1.0f64..1.0, 56)) {
            let sl = slice_instance(&v);
            let oracle = brute_force(&sl);
            prop_assume!(oracle.is_some());
            let sol = solve(&sl.sdp, &SolverOptions::default()).unwrap();
            prop_assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.message);
            prop_assert!(sl.sdp.check(&sol).holds(), "{:?}", sl.sdp.check(&sol));
            let oracle = oracle.unwrap();
            prop_assert!((sol.objective_value - oracle).abs() <= 1e-4,
                "solver {} vs brute force {}", sol.objective_value, oracle);
        }

        #[test]
        fn embedding_doubles_spectrum(v in prop::collection::vec(-1.0f64..1.0, 16)) {
            let h = herm_from(4, &v);
            let mut want: Vec<f64> = hermitian_eigenvalues(&h).iter().flat_map(|&l| [l, l]).collect();
            let mut got: Vec<f64> = real_embedding(&h).symmetric_eigenvalues().iter().copied().collect();
            want.sort_by(f64::total_cmp);
            got.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() <= 1e-10);
            }
        }

        #[test]
        fn duality_and_floor_shift(v in prop::collection::vec(-1.0f64..1.0, 56), gamma in 0.01f64..0.2) {
            let sl = slice_instance(&v);
            let base = sl.sdp.shifted(0.05 - gamma).unwrap();
            let sol = solve(&base, &SolverOptions::default()).unwrap();
            prop_assume!(sol.status != SolveStatus::Infeasible);
            prop_assert_eq!(sol.status, SolveStatus::Optimal);
            prop_assert!(base.check(&sol).relative_gap <= 1e-7);
            for rec in &sol.history {
                prop_assert!(rec.complementarity >= 0.0);
                if rec.primal_residual <= 1e-9 && rec.dual_residual <= 1e-9 {
                    prop_assert!(rec.primal_objective >= rec.dual_objective - 1e-9);
                }
            }
            // solve in Y = X - gamma I with floor 0
            let shifted = base.shifted(gamma).unwrap();
            let sol_y = solve(&shifted, &SolverOptions::default()).unwrap();
            prop_assert_eq!(sol_y.status, SolveStatus::Optimal);
            let tr_c: f64 = (0..3).map(|i| sl.cm[(i, i)].re).sum();
            let lhs = sol.objective_value;
            let rhs = sol_y.objective_value + gamma * tr_c;
            prop_assert!((lhs - rhs).abs() <= 1e-7 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let v: Vec<f64> = (0..56).map(|i| ((i * 37 % 17) as f64 / 8.5) - 1.0).collect();
        let sl = slice_instance(&v);
        let a = solve(&sl.sdp, &SolverOptions::default()).unwrap();
        let b = solve(&sl.sdp, &SolverOptions::default()).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.t.map(f64::to_bits), b.t.map(f64::to_bits));
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        assert_eq!(a.iterations, b.iterations);
    }
}
