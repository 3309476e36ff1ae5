//! Exact negative-definiteness certificates for symmetric integer matrices.
//!
//! Verdicts gate exact combinatorics downstream, so minors are computed in
//! arbitrary-precision integers (fraction-free elimination) and the Sylvester
//! sign test is exact. No floating point, no tolerance. Intended dimension
//! range is desk scale; the elimination is cubic per minor, so keep
//! dimensions at or below 64.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::graph::IntersectionMatrix;

/// The leading principal minors `Δ_1 .. Δ_n` of a symmetric integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorSequence(pub Vec<BigInt>);

impl Serialize for MinorSequence {
    /// Minors can exceed machine integers, so they serialize as decimal
    /// strings.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|d| d.to_string()))
    }
}

impl MinorSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sylvester criterion for negative definiteness: `(-1)^k Δ_k > 0` for
    /// every k. A zero minor fails.
    pub fn alternates_strictly(&self) -> bool {
        self.0.iter().enumerate().all(|(i, d)| {
            if i % 2 == 0 {
                d.is_negative()
            } else {
                d.is_positive()
            }
        })
    }
}

/// Exact determinant of an integer matrix by Bareiss fraction-free
/// elimination with row pivoting.
fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1i8;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[k][k] * &m[i][j] - &m[i][k] * &m[k][j];
                // Exact division: Bareiss guarantees divisibility.
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

/// Compute `Δ_k = det` of the top-left `k x k` block for `k = 1..n`, exactly.
pub fn leading_minors(matrix: &IntersectionMatrix) -> MinorSequence {
    let n = matrix.dimension();
    let minors = (1..=n)
        .map(|k| {
            let block: Vec<Vec<BigInt>> = (0..k)
                .map(|i| (0..k).map(|j| BigInt::from(matrix.entries[i][j])).collect())
                .collect();
            determinant(block)
        })
        .collect();
    MinorSequence(minors)
}

/// True iff the matrix is negative definite, decided exactly.
pub fn is_negative_definite(matrix: &IntersectionMatrix) -> bool {
    debug_assert!(matrix.is_symmetric());
    leading_minors(matrix).alternates_strictly()
}
