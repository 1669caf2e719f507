//! Small symmetric matrices (n = 1 or 2) used for per-node Hessians.

use std::ops::{Add, Mul, Sub};

/// Symmetric n×n matrix with n ∈ {1, 2}, stored as `[xx, xy, yy]`.
///
/// For n = 1 only `xx` is meaningful and the other slots stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat {
    dim: usize,
    entries: [f64; 3],
}

impl SymMat {
    pub fn zero(dim: usize) -> Self {
        debug_assert!(dim == 1 || dim == 2);
        Self {
            dim,
            entries: [0.0; 3],
        }
    }

    pub fn scalar(a: f64) -> Self {
        Self {
            dim: 1,
            entries: [a, 0.0, 0.0],
        }
    }

    pub fn new2(xx: f64, xy: f64, yy: f64) -> Self {
        Self {
            dim: 2,
            entries: [xx, xy, yy],
        }
    }

    pub fn identity(dim: usize) -> Self {
        match dim {
            1 => Self::scalar(1.0),
            _ => Self::new2(1.0, 0.0, 1.0),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        match values {
            [a] => Self::scalar(*a),
            [a, b] => Self::new2(*a, 0.0, *b),
            _ => panic!("SymMat::diag supports n = 1 or 2"),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xx(&self) -> f64 {
        self.entries[0]
    }

    pub fn xy(&self) -> f64 {
        self.entries[1]
    }

    pub fn yy(&self) -> f64 {
        self.entries[2]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.entries[0],
            (1, 1) => self.entries[2],
            _ => self.entries[1],
        }
    }

    pub fn det(&self) -> f64 {
        match self.dim {
            1 => self.entries[0],
            _ => self.entries[0] * self.entries[2] - self.entries[1] * self.entries[1],
        }
    }

    pub fn trace(&self) -> f64 {
        match self.dim {
            1 => self.entries[0],
            _ => self.entries[0] + self.entries[2],
        }
    }

    /// Cofactor matrix, i.e. the derivative of `det` with respect to the
    /// entries. For n = 1 this is `[1]`.
    pub fn cofactor(&self) -> Self {
        match self.dim {
            1 => Self::scalar(1.0),
            _ => Self::new2(self.entries[2], -self.entries[1], self.entries[0]),
        }
    }

    /// Frobenius pairing `tr(A B)`.
    pub fn frobenius(&self, other: &Self) -> f64 {
        match self.dim {
            1 => self.entries[0] * other.entries[0],
            _ => {
                self.entries[0] * other.entries[0]
                    + 2.0 * self.entries[1] * other.entries[1]
                    + self.entries[2] * other.entries[2]
            }
        }
    }

    /// `aᵀ A b`.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.dim {
            1 => a[0] * self.entries[0] * b[0],
            _ => {
                a[0] * (self.entries[0] * b[0] + self.entries[1] * b[1])
                    + a[1] * (self.entries[1] * b[0] + self.entries[2] * b[1])
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self.dim {
            1 => self.entries[0],
            _ => {
                let mean = 0.5 * (self.entries[0] + self.entries[2]);
                let half_gap = 0.5 * (self.entries[0] - self.entries[2]);
                mean - half_gap.hypot(self.entries[1])
            }
        }
    }

    /// Sum of all n² entries (off-diagonal counted twice).
    pub fn entry_sum(&self) -> f64 {
        match self.dim {
            1 => self.entries[0],
            _ => self.entries[0] + 2.0 * self.entries[1] + self.entries[2],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }
}

impl Add for SymMat {
    type Output = SymMat;

    fn add(self, rhs: SymMat) -> SymMat {
        debug_assert_eq!(self.dim, rhs.dim);
        SymMat {
            dim: self.dim,
            entries: [
                self.entries[0] + rhs.entries[0],
                self.entries[1] + rhs.entries[1],
                self.entries[2] + rhs.entries[2],
            ],
        }
    }
}

impl Sub for SymMat {
    type Output = SymMat;

    fn sub(self, rhs: SymMat) -> SymMat {
        debug_assert_eq!(self.dim, rhs.dim);
        SymMat {
            dim: self.dim,
            entries: [
                self.entries[0] - rhs.entries[0],
                self.entries[1] - rhs.entries[1],
                self.entries[2] - rhs.entries[2],
            ],
        }
    }
}

impl Mul<SymMat> for f64 {
    type Output = SymMat;

    fn mul(self, rhs: SymMat) -> SymMat {
        SymMat {
            dim: rhs.dim,
            entries: [
                self * rhs.entries[0],
                self * rhs.entries[1],
                self * rhs.entries[2],
            ],
        }
    }
}
