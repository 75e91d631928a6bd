//! Small SDP instances with a brute-force reference optimum.

use idealface::linalg::{c, hermitian_eigenvalues, re_trace_product, CMat};
use idealface::sdp::HermitianSdp;

pub fn herm_from(n: usize, v: &[f64]) -> CMat {
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

fn gram_schmidt(basis: Vec<CMat>) -> Vec<CMat> {
    let mut out: Vec<CMat> = Vec::new();
    for mut b in basis {
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

pub struct Slice {
    pub sdp: HermitianSdp,
    x0: CMat,
    b1: CMat,
    b2: CMat,
    dk: Vec<(CMat, f64)>,
    cm: CMat,
}

/// Number of entries of `v` consumed by [`slice_instance`].
pub const SLICE_PARAMS: usize = 56;

/// 3x3 problem whose feasible set is the slice `X0 + a B1 + b B2`
/// (`|a|, |b| <= 2`, `X >= 0.05 I`) with a minimax epigraph term.
pub fn slice_instance(v: &[f64]) -> Slice {
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
    let dk: Vec<(CMat, f64)> = (0..2).map(|k| (herm_from(n, &v[36 + 9 * k..45 + 9 * k]), v[54 + k])).collect();
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

/// Interval where a concave function stays >= level.
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

/// Nested golden-section search over `(a, b)`: the objective is convex on the
/// slice and `lambda_min` is concave, so both levels are unimodal.
pub fn brute_force(sl: &Slice) -> Option<f64> {
    let x_at = |a: f64, b: f64| &sl.x0 + &sl.b1 * c(a, 0.0) + &sl.b2 * c(b, 0.0);
    let lam = |a: f64, b: f64| hermitian_eigenvalues(&x_at(a, b))[0];
    let f = |a: f64, b: f64| {
        let x = x_at(a, b);
        let dev = sl.dk.iter().map(|(d, tgt)| (re_trace_product(d, &x) - tgt).abs()).fold(0.0, f64::max);
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
