//! Exact 3x3 integer matrices.

use std::ops::Mul;

use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat3(pub [[BigInt; 3]; 3]);

impl Mat3 {
    pub fn from_i64(rows: [[i64; 3]; 3]) -> Self {
        Mat3(rows.map(|r| r.map(BigInt::from)))
    }

    pub fn identity() -> Self {
        Self::from_i64([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn apply(&self, v: &[BigInt; 3]) -> [BigInt; 3] {
        let m = &self.0;
        std::array::from_fn(|i| &m[i][0] * &v[0] + &m[i][1] * &v[1] + &m[i][2] * &v[2])
    }

    pub fn trace(&self) -> BigInt {
        &self.0[0][0] + &self.0[1][1] + &self.0[2][2]
    }

    pub fn det(&self) -> BigInt {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    /// Coefficients of `det(M - xI)`, constant term first.
    pub fn char_poly(&self) -> [BigInt; 4] {
        let m = &self.0;
        let minors = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0] + &m[0][0] * &m[2][2] - &m[0][2] * &m[2][0]
            + &m[1][1] * &m[2][2]
            - &m[1][2] * &m[2][1];
        [self.det(), -minors, self.trace(), -BigInt::one()]
    }

    /// Sum of all entries of column `j`.
    /// Adjugate; `m * m.adjugate() = det(m) I`.
    pub fn adjugate(&self) -> Mat3 {
        let m = &self.0;
        let c = |r0: usize, r1: usize, c0: usize, c1: usize| &m[r0][c0] * &m[r1][c1] - &m[r0][c1] * &m[r1][c0];
        Mat3([
            [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
            [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
            [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
        ])
    }

    pub fn column_sum(&self, j: usize) -> BigInt {
        self.0.iter().map(|r| &r[j]).fold(BigInt::zero(), |a, b| a + b)
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: &Mat3) -> Mat3 {
        let (a, b) = (&self.0, &rhs.0);
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j] + &a[i][2] * &b[2][j])
        }))
    }
}

/// Letter-count matrix of `χ_k`: column `a` counts the letters of `χ_k(a)`.
pub fn substitution_matrix(k: u64) -> Mat3 {
    let k = BigInt::from(k);
    let z = BigInt::zero;
    let o = BigInt::one;
    Mat3([[z(), k.clone(), k - 1], [o(), z(), z()], [z(), o(), o()]])
}

/// Transition matrix of the cover recursion for symbol `k`.
pub fn cover_matrix(k: u64) -> Mat3 {
    let z = BigInt::zero;
    let o = BigInt::one;
    Mat3([[z(), o(), o()], [o(), z(), z()], [BigInt::from(k) - 1, z(), o()]])
}

/// `-P_k(x) = -x^3 + x^2 + kx - 1`, constant term first.
pub fn minus_pk(k: u64) -> [BigInt; 4] {
    [-BigInt::one(), BigInt::from(k), BigInt::one(), -BigInt::one()]
}
