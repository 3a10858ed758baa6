//! Difference penalties `Q_m = D_m' D_m`.

use nalgebra::DMatrix;

use crate::bandmat::BandedMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyMatrix {
    order: usize,
    banded: BandedMatrix,
}

fn check_sizes(order: usize, size: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidConfig("difference order must be at least 1".into()));
    }
    if size <= order {
        return Err(Error::InvalidConfig(format!(
            "difference order {order} needs more than {order} coefficients, got {size}"
        )));
    }
    Ok(())
}

/// Signed binomial coefficients `(-1)^{m-t} C(m, t)`, `t = 0..=m`.
fn difference_stencil(order: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for _ in 0..order {
        let mut next = vec![0.0; c.len() + 1];
        for (t, v) in c.iter().enumerate() {
            next[t] -= v;
            next[t + 1] += v;
        }
        c = next;
    }
    c
}

/// The `(q-m) × q` forward-difference operator of order `m`.
pub fn difference_matrix(order: usize, size: usize) -> Result<DMatrix<f64>> {
    check_sizes(order, size)?;
    let stencil = difference_stencil(order);
    let mut d = DMatrix::zeros(size - order, size);
    for i in 0..size - order {
        for (t, c) in stencil.iter().enumerate() {
            d[(i, i + t)] = *c;
        }
    }
    Ok(d)
}

pub fn penalty_matrix(order: usize, size: usize) -> Result<PenaltyMatrix> {
    let d = difference_matrix(order, size)?;
    let q = d.transpose() * d;
    Ok(PenaltyMatrix {
        order,
        banded: BandedMatrix::from_dense(&q, order),
    })
}

impl PenaltyMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.banded.size()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.banded.get(i, j)
    }

    pub fn banded(&self) -> &BandedMatrix {
        &self.banded
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.banded.to_dense()
    }

    pub fn mul_vec(&self, b: &[f64]) -> Vec<f64> {
        self.banded.mul_vec(b)
    }

    /// `b' Q b`.
    pub fn quadratic_form(&self, b: &[f64]) -> f64 {
        self.mul_vec(b).iter().zip(b).map(|(a, c)| a * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandmat::symmetric_eigenvalues;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn first_difference() {
        let d = difference_matrix(1, 3).unwrap();
        assert_eq!(d, DMatrix::from_row_slice(2, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0]));
    }

    #[test]
    fn second_difference() {
        let d = difference_matrix(2, 5).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            5,
            &[
                1.0, -2.0, 1.0, 0.0, 0.0, //
                0.0, 1.0, -2.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, -2.0, 1.0,
            ],
        );
        assert_eq!(d, expected);
        let lin = nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!((d * lin).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn size_errors() {
        assert!(difference_matrix(2, 2).is_err());
        assert!(penalty_matrix(3, 3).is_err());
        assert!(penalty_matrix(0, 5).is_err());
    }

    #[test]
    fn second_order_corner() {
        let q = penalty_matrix(2, 5).unwrap();
        assert_eq!(q.get(0, 0), 1.0);
        assert_eq!(q.get(0, 1), -2.0);
        assert_eq!(q.get(0, 2), 1.0);
        assert_eq!(q.get(2, 2), 6.0);
        assert!(q.mul_vec(&[1.0; 5]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn first_order_spectrum() {
        let q = penalty_matrix(1, 4).unwrap();
        let ev = symmetric_eigenvalues(&q.to_dense());
        let s2 = std::f64::consts::SQRT_2;
        for (got, want) in ev.iter().zip([0.0, 2.0 - s2, 2.0, 2.0 + s2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn annihilates_low_degree_polynomials() {
        for m in 1..=4 {
            let q = penalty_matrix(m, 12).unwrap();
            for deg in 0..m {
                let b: Vec<f64> = (1..=12).map(|i| (i as f64).powi(deg as i32)).collect();
                let scale = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(q.mul_vec(&b).iter().all(|v| v.abs() <= 1e-9 * scale));
            }
        }
    }

    proptest! {
        #[test]
        fn quadratic_form_is_squared_difference(
            m in 1usize..4,
            b in proptest::collection::vec(-10.0f64..10.0, 6..30),
        ) {
            let q = penalty_matrix(m, b.len()).unwrap();
            let d = difference_matrix(m, b.len()).unwrap();
            let db = &d * nalgebra::DVector::from_vec(b.clone());
            let form = q.quadratic_form(&b);
            prop_assert!(form >= -1e-9);
            prop_assert!((form - db.norm_squared()).abs() <= 1e-9 * (1.0 + form.abs()));
        }
    }
}
