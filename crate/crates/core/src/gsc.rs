//! Blocking matrices for generalized sidelobe cancellers.
//!
//! A row `w` blocks direction `theta` when `w^T a(theta) = sum_m w_m alpha^m = 0`,
//! i.e. when `alpha(theta)` is a root of `w` read as a polynomial. Rows are
//! therefore shifts of `prod_l (x - alpha(theta_l))`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::array::{root_of_direction, steering_vector, ArrayGeometry};
use crate::error::{bail, Result};
use crate::linalg::{rank, CMat};
use crate::polyideal::{generator_poly, ideal_membership_residual, toeplitz_basis, Poly, Variety};

#[derive(Debug, Clone)]
pub struct BlockingMatrix {
    rows: CMat,
    blocked: Variety,
    directions: Vec<f64>,
    m: usize,
}

/// Largest `|W a(theta)|` entry, for each direction.
fn residuals(rows: &CMat, geom: &ArrayGeometry, dirs: &[f64]) -> Result<Vec<f64>> {
    dirs.iter()
        .map(|&th| {
            let a = steering_vector(geom, th)?;
            Ok((rows * a).iter().fold(0.0f64, |acc, z| acc.max(z.norm())))
        })
        .collect()
}

impl BlockingMatrix {
    /// Validate user-supplied rows: independent, and blocking every listed direction.
    pub fn from_rows(rows: CMat, directions: &[f64], geom: &ArrayGeometry) -> Result<Self> {
        let m = geom.n();
        if rows.ncols() != m {
            bail!(Dimension, "rows have {} entries, array has {m} sensors", rows.ncols());
        }
        if directions.is_empty() {
            bail!(Domain, "no blocked directions given");
        }
        if rank(&rows, 1e-10) != rows.nrows() {
            bail!(Precondition, "blocking rows are linearly dependent");
        }
        let worst = residuals(&rows, geom, directions)?.into_iter().fold(0.0, f64::max);
        let scale = rows.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1.0);
        if worst > 1e-10 * m as f64 * scale {
            bail!(Precondition, "rows do not block the listed directions (residual {worst:e})");
        }
        let roots = directions
            .iter()
            .map(|&th| root_of_direction(geom, th))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows, blocked: Variety::new(roots)?, directions: directions.to_vec(), m })
    }

    pub fn rows(&self) -> &CMat {
        &self.rows
    }
    pub fn blocked(&self) -> &Variety {
        &self.blocked
    }
    pub fn directions(&self) -> &[f64] {
        &self.directions
    }
    pub fn m(&self) -> usize {
        self.m
    }

    /// `prod_l (x - alpha(theta_l))`.
    pub fn generator(&self) -> Poly {
        generator_poly(&self.blocked)
    }

    /// Same row space with orthonormal rows.
    pub fn orthonormalized(&self) -> Self {
        let u = self.rows.transpose().qr().q();
        Self { rows: u.transpose(), ..self.clone() }
    }
}

/// Shift-structured blocking matrix (`(M - L) x M`) for the given directions.
pub fn blocking_matrix(m: usize, directions: &[f64], geom: &ArrayGeometry) -> Result<BlockingMatrix> {
    if geom.n() != m {
        bail!(Dimension, "geometry has {} sensors, expected {m}", geom.n());
    }
    if directions.is_empty() {
        bail!(Domain, "no blocked directions given");
    }
    if directions.len() >= m {
        bail!(Dimension, "{} blocked directions leave no rows for M = {m}", directions.len());
    }
    let roots = directions
        .iter()
        .map(|&th| root_of_direction(geom, th))
        .collect::<Result<Vec<_>>>()?;
    let variety = Variety::new(roots)?;
    let basis = toeplitz_basis(&generator_poly(&variety), m)?;
    let rows = basis.q().transpose();
    Ok(BlockingMatrix { rows, blocked: variety, directions: directions.to_vec(), m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockingReport {
    /// `(direction, max |W a(direction)|)`.
    pub per_direction: Vec<(f64, f64)>,
    pub max_residual: f64,
}

pub fn verify_blocking(wb: &BlockingMatrix, signal_dirs: &[f64], geom: &ArrayGeometry) -> Result<BlockingReport> {
    let res = residuals(wb.rows(), geom, signal_dirs)?;
    let max_residual = res.iter().copied().fold(0.0, f64::max);
    Ok(BlockingReport {
        per_direction: signal_dirs.iter().copied().zip(res).collect(),
        max_residual,
    })
}

/// Largest division remainder of a row by the blocking generator.
pub fn row_membership_residual(wb: &BlockingMatrix) -> Result<f64> {
    let g = wb.generator();
    let mut worst = 0.0f64;
    for r in 0..wb.rows.nrows() {
        let p = Poly::new(wb.rows.row(r).iter().copied().collect());
        worst = worst.max(ideal_membership_residual(&p, &g)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use proptest::prelude::*;

    fn geom(m: usize) -> ArrayGeometry {
        ArrayGeometry::default_ula(m).unwrap()
    }

    #[test]
    fn broadside_rows_sum_to_zero() {
        let wb = blocking_matrix(4, &[0.0], &geom(4)).unwrap();
        assert_eq!(wb.rows().shape(), (3, 4));
        for r in 0..3 {
            let s: crate::linalg::C64 = wb.rows().row(r).iter().sum();
            assert!(s.norm() < 1e-14);
        }
    }

    #[test]
    fn off_broadside_rows_block_look_direction() {
        let g = geom(4);
        let wb = blocking_matrix(4, &[23.0], &g).unwrap();
        let rep = verify_blocking(&wb, &[23.0], &g).unwrap();
        assert!(rep.max_residual <= 1e-10 * 4.0);
    }

    #[test]
    fn endfire_pair_gives_difference_row() {
        let wb = blocking_matrix(3, &[0.0, 90.0], &geom(3)).unwrap();
        assert_eq!(wb.rows().shape(), (1, 3));
        let want = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (got, w) in wb.rows().iter().zip(want) {
            assert!((got - w).norm() < 1e-12);
        }
    }

    #[test]
    fn too_many_directions() {
        assert!(matches!(
            blocking_matrix(3, &[0.0, 10.0, 20.0], &geom(3)),
            Err(crate::Error::Dimension(_))
        ));
    }

    #[test]
    fn all_ones_rows_rejected_for_broadside() {
        let rows = CMat::from_element(2, 4, c(1.0, 0.0));
        assert!(BlockingMatrix::from_rows(rows, &[0.0], &geom(4)).is_err());
        let mut rows = CMat::zeros(1, 4);
        rows.fill(c(1.0, 0.0));
        assert!(BlockingMatrix::from_rows(rows, &[0.0], &geom(4)).is_err());
        let good = blocking_matrix(4, &[0.0], &geom(4)).unwrap();
        assert!(BlockingMatrix::from_rows(good.rows().clone(), &[0.0], &geom(4)).is_ok());
    }

    #[test]
    fn orthonormalized_rows_still_block() {
        let g = geom(8);
        let wb = blocking_matrix(8, &[-20.0, 35.0], &g).unwrap().orthonormalized();
        let gram = wb.rows() * wb.rows().adjoint();
        assert!((gram - CMat::identity(6, 6)).norm() < 1e-12);
        assert!(verify_blocking(&wb, &[-20.0, 35.0], &g).unwrap().max_residual < 1e-10 * 8.0);
    }

    proptest! {
        #[test]
        fn blocks_listed_and_passes_others(
            m in 3usize..16,
            dirs in prop::collection::vec(-80.0f64..80.0, 1..4),
            probe in -89.0f64..89.0,
        ) {
            prop_assume!(dirs.len() < m);
            prop_assume!(dirs.iter().all(|d| (d - probe).abs() > 2.0));
            let g = geom(m);
            let wb = blocking_matrix(m, &dirs, &g).unwrap();
            prop_assert_eq!(wb.rows().nrows(), m - dirs.len());
            let rep = verify_blocking(&wb, &dirs, &g).unwrap();
            let scale = wb.rows().iter().fold(1.0f64, |a, z| a.max(z.norm()));
            prop_assert!(rep.max_residual <= 1e-10 * m as f64 * scale, "{rep:?}");
            prop_assert!(row_membership_residual(&wb).unwrap() <= 1e-10);
            let other = verify_blocking(&wb, &[probe], &g).unwrap();
            prop_assert!(other.max_residual > 1e-3, "{other:?}");
        }
    }

    #[test]
    fn rows_match_generator_shifts() {
        let wb = blocking_matrix(5, &[10.0], &geom(5)).unwrap();
        let gcoef = wb.generator().padded(5);
        for (j, got) in wb.rows().row(0).iter().enumerate() {
            assert!((got - gcoef[j]).norm() < 1e-14);
        }
    }
}
