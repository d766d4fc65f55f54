//! Dense Gaussian elimination with partial pivoting, generic over the
//! scalar (exact in rational mode).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solve `a·x = b`, consuming the inputs.
pub fn solve<K: Scalar>(mut a: Vec<Vec<K>>, mut b: Vec<K>) -> Result<Vec<K>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .to_f64()
                    .partial_cmp(&a[j][col].abs().to_f64())
                    .unwrap()
            })
            .unwrap();
        if a[pivot][col].is_zero() {
            return Err(Error::Numeric("singular linear system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / a[col][col].clone();
            for k in col..n {
                a[row][k] = a[row][k].clone() - factor.clone() * a[col][k].clone();
            }
            let rhs = b[col].clone();
            b[row] = b[row].clone() - factor * rhs;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col].clone();
        for k in col + 1..n {
            acc = acc - a[col][k].clone() * b[k].clone();
        }
        b[col] = acc / a[col][col].clone();
    }
    Ok(b)
}
