//! Univariate polynomial ideals over the complex numbers.
//!
//! A multiset of roots (a [`Variety`]) determines a monic generator
//! `g(x) = prod (x - r)`. Truncated to degree `< N`, the principal ideal
//! `<g>` is the subspace of coefficient vectors spanned by the columns of an
//! `N x (N - L)` Toeplitz matrix whose first column holds the coefficients of
//! `g`. That matrix is the basis of the face the design problems are
//! restricted to.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::array::{root_of_direction, ArrayGeometry};
use crate::error::{bail, Result};
use crate::linalg::{c, max_abs, CMat, C64};

/// Polynomial with complex coefficients in ascending degree order.
///
/// The zero polynomial has no coefficients; every other value keeps a
/// nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last().is_some_and(|z| *z == C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![c(1.0, 0.0)] }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<C64> {
        self.coeffs.last().copied()
    }

    /// Member of `C_N[x]`, i.e. degree strictly below `n`.
    pub fn in_truncated_ring(&self, n: usize) -> bool {
        self.coeffs.len() <= n
    }

    /// Horner evaluation.
    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(c(0.0, 0.0), |acc, &a| acc * x + a)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * s).collect())
    }

    /// Coefficient vector zero-padded to length `n`.
    pub fn padded(&self, n: usize) -> Vec<C64> {
        let mut out = self.coeffs.clone();
        out.resize(n.max(out.len()), c(0.0, 0.0));
        out
    }

    /// Long division `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let Some(dd) = divisor.degree() else {
            bail!(Domain, "division by the zero polynomial");
        };
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![c(0.0, 0.0); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let f = rem[k + dd] / lead;
            quot[k] = f;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= f * d;
            }
            rem[k + dd] = c(0.0, 0.0);
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, z| a.max(z.norm()))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or_default()
                        + rhs.coeffs.get(i).copied().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| -a).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        poly_mul(self, rhs)
    }
}

/// Coefficient convolution.
pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() || b.is_zero() {
        return Poly::zero();
    }
    let mut out = vec![c(0.0, 0.0); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        for (j, &y) in b.coeffs.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Poly::new(out)
}

pub fn poly_eval(p: &Poly, x: C64) -> C64 {
    p.eval(x)
}

/// Multiset of complex roots; multiplicity is carried by repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct Variety {
    roots: Vec<C64>,
}

impl Variety {
    pub fn new(roots: Vec<C64>) -> Result<Self> {
        if roots.is_empty() {
            bail!(Domain, "a variety needs at least one root");
        }
        if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            bail!(Domain, "variety roots must be finite");
        }
        Ok(Self { roots })
    }

    /// Roots `conj(alpha(theta))` that null the given directions.
    pub fn from_directions(geom: &ArrayGeometry, angles_deg: &[f64]) -> Result<Self> {
        let roots = angles_deg
            .iter()
            .map(|&t| root_of_direction(geom, t).map(|z| z.conj()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(roots)
    }

    pub fn roots(&self) -> &[C64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn on_unit_circle(&self, tol: f64) -> bool {
        self.roots.iter().all(|z| (z.norm() - 1.0).abs() <= tol)
    }

    /// Whether every root of `other` appears in `self` at least as often.
    pub fn contains(&self, other: &Variety, tol: f64) -> bool {
        let mut used = vec![false; self.roots.len()];
        other.roots.iter().all(|r| {
            match (0..self.roots.len()).find(|&i| !used[i] && (self.roots[i] - r).norm() <= tol) {
                Some(i) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
    }
}

/// `e_k` of the roots via the one-root-at-a-time recurrence.
pub fn elementary_symmetric(roots: &[C64], k: usize) -> Result<C64> {
    if k > roots.len() {
        bail!(Domain, "k = {k} exceeds the number of roots {}", roots.len());
    }
    Ok(elementary_symmetric_all(roots)[k])
}

/// `[e_0, e_1, ..., e_L]`.
pub fn elementary_symmetric_all(roots: &[C64]) -> Vec<C64> {
    let mut e = vec![c(0.0, 0.0); roots.len() + 1];
    e[0] = c(1.0, 0.0);
    for (i, &r) in roots.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let prev = e[j - 1];
            e[j] += r * prev;
        }
    }
    e
}

/// Monic generator `prod (x - r)`; `coeffs[L - k] = (-1)^k e_k`.
pub fn generator_poly(variety: &Variety) -> Poly {
    let e = elementary_symmetric_all(&variety.roots);
    let l = variety.len();
    let mut coeffs = vec![c(0.0, 0.0); l + 1];
    for (k, &ek) in e.iter().enumerate() {
        coeffs[l - k] = if k % 2 == 0 { ek } else { -ek };
    }
    Poly::new(coeffs)
}

/// Matrix with rows `[1, r, r^2, ..., r^(n-1)]`, one per root.
///
/// For array-derived varieties this is `A^H` with `A` the steering matrix
/// of the nulled directions.
pub fn vandermonde(roots: &[C64], n: usize) -> CMat {
    CMat::from_fn(roots.len(), n, |l, i| roots[l].powu(i as u32))
}

/// Toeplitz basis of the truncated principal ideal `<g>|_N`.
#[derive(Debug, Clone)]
pub struct IdealBasis {
    q: CMat,
    generator: Poly,
    n: usize,
    variety: Option<Variety>,
}

impl IdealBasis {
    pub fn from_variety(variety: &Variety, n: usize) -> Result<Self> {
        let mut basis = toeplitz_basis(&generator_poly(variety), n)?;
        basis.variety = Some(variety.clone());
        Ok(basis)
    }

    /// The `N x K` Toeplitz matrix.
    pub fn q(&self) -> &CMat {
        &self.q
    }

    pub fn generator(&self) -> &Poly {
        &self.generator
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Face dimension `K = N - L`.
    pub fn k(&self) -> usize {
        self.q.ncols()
    }

    pub fn variety(&self) -> Option<&Variety> {
        self.variety.as_ref()
    }

    /// `max |V Q|` where `V` is the Vandermonde matrix of the variety.
    pub fn annihilation_residual(&self) -> Option<f64> {
        self.variety
            .as_ref()
            .map(|v| max_abs(&(vandermonde(v.roots(), self.n) * &self.q)))
    }

    /// Coefficients of column `j` read as a polynomial (`g(x) x^j`).
    pub fn column_poly(&self, j: usize) -> Poly {
        Poly::new(self.q.column(j).iter().copied().collect())
    }
}

/// Shifted copies of the generator as columns of an `N x (N - L)` matrix.
pub fn toeplitz_basis(generator: &Poly, n: usize) -> Result<IdealBasis> {
    let Some(l) = generator.degree() else {
        bail!(Domain, "the zero polynomial does not generate a proper ideal");
    };
    if l >= n {
        bail!(
            Dimension,
            "variety leaves no degrees of freedom: degree {l} >= N = {n}"
        );
    }
    let k = n - l;
    let mut q = CMat::zeros(n, k);
    for j in 0..k {
        for (i, &a) in generator.coeffs().iter().enumerate() {
            q[(i + j, j)] = a;
        }
    }
    Ok(IdealBasis {
        q,
        generator: generator.clone(),
        n,
        variety: None,
    })
}

/// How a variety is grown to a target cardinality.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtensionPolicy {
    /// Repeat the base roots round-robin.
    Multiplicity,
    /// Append exactly these extra roots.
    Explicit(Vec<C64>),
}

/// Roots closer than this are the same root under [`ExtensionPolicy::Multiplicity`].
pub const ROOT_MERGE_TOL: f64 = 1e-12;

/// Superset variety of cardinality `target_l`; its ideal is contained in the base ideal.
pub fn extend_variety(base: &Variety, target_l: usize, policy: &ExtensionPolicy) -> Result<Variety> {
    let l = base.len();
    if target_l < l {
        bail!(Domain, "target cardinality {target_l} is below the base cardinality {l}");
    }
    let extra = target_l - l;
    match policy {
        ExtensionPolicy::Multiplicity => {
            let mut distinct: Vec<C64> = Vec::new();
            let mut snapped = Vec::with_capacity(target_l);
            for &r in &base.roots {
                match distinct.iter().find(|d| (**d - r).norm() <= ROOT_MERGE_TOL) {
                    Some(&d) => snapped.push(d),
                    None => {
                        distinct.push(r);
                        snapped.push(r);
                    }
                }
            }
            snapped.extend((0..extra).map(|i| distinct[i % distinct.len()]));
            Variety::new(snapped)
        }
        ExtensionPolicy::Explicit(extras) => {
            if extras.len() != extra {
                bail!(
                    Config,
                    "explicit extension needs {extra} extra roots, got {}",
                    extras.len()
                );
            }
            let mut roots = base.roots.clone();
            roots.extend_from_slice(extras);
            Variety::new(roots)
        }
    }
}

/// Whether `p` (as a coefficient vector) lies in `<g>`: remainder of `p / g`
/// relative to the coefficient scale of `p`.
pub fn ideal_membership_residual(p: &Poly, generator: &Poly) -> Result<f64> {
    let (_, r) = p.div_rem(generator)?;
    Ok(r.max_coeff() / p.max_coeff().max(f64::MIN_POSITIVE))
}
