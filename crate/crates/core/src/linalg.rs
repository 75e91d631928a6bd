//! Dense complex linear-algebra helpers shared by the modules.

use alloc::vec::Vec;
use nalgebra::{Complex, ComplexField, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest `|m - m^H|` entry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol
}

/// Hermitian part `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Thin SVD `a = U diag(s) V^H` with `s` descending.
///
/// `U` is `m x n`; columns paired with a zero singular value are zero. `V` is a full `n x n` unitary.
#[derive(Debug, Clone)]
pub struct Svd<T: ComplexField<RealField = f64>> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

/// One-sided Jacobi SVD.
// nalgebra 0.35's bidiagonal SVD returns factors that do not reconstruct some
// rank-deficient inputs, which breaks rank and subspace decisions.
pub fn svd<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.clone().modulus();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // make the pair's inner product real and positive, then rotate
                let phase = gamma.unscale(g).conjugate();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)].clone();
                        let xq = mat[(i, q)].clone() * phase.clone();
                        mat[(i, p)] = xp.clone().scale(cs) - xq.clone().scale(sn);
                        mat[(i, q)] = xp.scale(sn) + xq.scale(cs);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = DMatrix::<T>::zeros(m, n);
    let mut vs = DMatrix::<T>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        if sigma > 0.0 {
            u.set_column(dst, &w.column(src).unscale(sigma));
        }
        vs.set_column(dst, &v.column(src));
        s.push(sigma);
    }
    Svd { u, s, v: vs }
}

/// Singular values, descending (`min(m, n)` of them).
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let (r, n) = m.shape();
    let mut s = if r < n { svd(&m.adjoint()).s } else { svd(m).s };
    s.truncate(r.min(n));
    s
}

/// Numerical rank with threshold `rel_tol * sigma_max`.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// Orthonormal basis of the column space.
pub fn column_space(m: &CMat, rel_tol: f64) -> CMat {
    let d = svd(m);
    let top = d.s.first().copied().unwrap_or(0.0);
    let keep = d.s.iter().filter(|&&v| top > 0.0 && v > rel_tol * top).count();
    d.u.columns(0, keep).into_owned()
}

/// Orthonormal basis of the right nullspace `{w : m w = 0}`.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let d = svd(m);
    let top = d.s.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let keep = d.s.iter().filter(|&&v| v > rel_tol * top).count();
    d.v.columns(keep, m.ncols() - keep).into_owned()
}

/// Sines of the principal angles between two subspaces of equal dimension,
/// given by (not necessarily orthonormal) spanning matrices. Returned descending.
pub fn principal_angle_sines(a: &CMat, b: &CMat) -> Vec<f64> {
    let ua = column_space(a, 1e-12);
    let ub = column_space(b, 1e-12);
    let resid = &ub - &ua * (ua.adjoint() * &ub);
    let mut s = singular_values(&resid);
    s.truncate(ub.ncols());
    s
}

/// Largest principal angle in radians (computed through its sine, accurate near zero).
pub fn max_principal_angle(a: &CMat, b: &CMat) -> f64 {
    let ua = column_space(a, 1e-12);
    let ub = column_space(b, 1e-12);
    if ua.ncols() != ub.ncols() {
        return core::f64::consts::FRAC_PI_2;
    }
    principal_angle_sines(&ua, &ub)
        .first()
        .map(|&s| libm_asin(s.min(1.0)))
        .unwrap_or(0.0)
}

#[inline]
fn libm_asin(x: f64) -> f64 {
    num_traits::Float::asin(x)
}

/// Residual of projecting the columns of `v` onto `span(basis)`, relative to `|v|`.
pub fn span_residual(basis: &CMat, v: &CMat) -> f64 {
    let u = column_space(basis, 1e-12);
    let r = v - &u * (u.adjoint() * v);
    let scale = v.norm().max(f64::MIN_POSITIVE);
    r.norm() / scale
}

/// Real symmetric `2n x 2n` embedding `[[Re H, -Im H], [Im H, Re H]]`.
pub fn real_embedding(h: &CMat) -> DMatrix<f64> {
    let n = h.nrows();
    let mut out = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`real_embedding`], averaging the two redundant copies.
pub fn from_real_embedding(m: &DMatrix<f64>) -> CMat {
    let n = m.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (m[(i, j)] + m[(i + n, j + n)]);
        let im = 0.5 * (m[(i + n, j)] - m[(i, j + n)]);
        c(re, im)
    })
}

/// `Re tr(a b)` for square matrices of equal size.
pub fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let p = a[(i, k)] * b[(k, i)];
            acc += p.re;
        }
    }
    acc
}

/// `v^H m v`, real part.
pub fn quad_form(m: &CMat, v: &CVec) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cmat(n: usize, k: usize, v: &[(f64, f64)]) -> CMat {
        CMat::from_fn(n, k, |i, j| {
            let (a, b) = v[(i * k + j) % v.len()];
            c(a + i as f64 * 0.37, b - j as f64 * 0.11)
        })
    }

    #[test]
    fn embedding_roundtrip() {
        let h = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(1.0, -3.0), c(1.0, 3.0), c(-1.0, 0.0)]);
        assert_eq!(from_real_embedding(&real_embedding(&h)), h);
    }

    proptest! {
        #[test]
        fn column_space_of_gram_matches_factor(
            n in 3usize..13,
            k in 1usize..4,
            v in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 40),
        ) {
            prop_assume!(k < n);
            let w = cmat(n, k, &v);
            prop_assume!(rank(&w, 1e-8) == k);
            let x = &w * w.adjoint();
            let cs = column_space(&x, 1e-10);
            prop_assert_eq!(cs.ncols(), k);
            prop_assert!((cs.adjoint() * &cs - CMat::identity(k, k)).norm() < 1e-10);
            prop_assert!(span_residual(&cs, &w) < 1e-8);
            let ns = null_space(&x, 1e-10);
            prop_assert_eq!(ns.ncols(), n - k);
            prop_assert!((&x * &ns).norm() <= 1e-10 * x.norm());
            prop_assert!((w.adjoint() * &ns).norm() <= 1e-8 * w.norm());
        }

        #[test]
        fn svd_reconstructs_rank_deficient(
            n in 2usize..10,
            k in 1usize..4,
            pad in 0usize..3,
            v in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 40),
        ) {
            // square, rank-deficient, with zero columns appended
            let w = cmat(n, k.min(n), &v);
            let mut x = CMat::zeros(n, n + pad);
            x.view_mut((0, 0), (n, n)).copy_from(&(&w * w.adjoint()));
            let d = svd(&x);
            prop_assert!(d.s.windows(2).all(|p| p[0] >= p[1]));
            let sig = CMat::from_diagonal(&DVector::from_iterator(n + pad, d.s.iter().map(|&s| c(s, 0.0))));
            prop_assert!((&d.u * sig * d.v.adjoint() - &x).norm() <= 1e-12 * (1.0 + x.norm()));
            prop_assert!((d.v.adjoint() * &d.v - CMat::identity(n + pad, n + pad)).norm() < 1e-12);
        }
    }
}
