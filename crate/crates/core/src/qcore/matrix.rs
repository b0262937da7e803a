use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{sum, sum_iter, Scalar};

use super::dist::{Dist, QuasiDist};

/// Square matrix whose every column sums to one. Entry `(i, j)` is the
/// (quasi-)probability of the transition `j → i`; storage is column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

/// A [`QuasiMatrix`] with no negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StochMatrix<T>(QuasiMatrix<T>);

impl<T: Scalar> QuasiMatrix<T> {
    /// Build from columns; validates squareness and column sums.
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return Err(Error::DimensionTooSmall { min: 1, found: 0 });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for col in columns {
            if col.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: col.len(),
                });
            }
            data.extend(col);
        }
        Self::from_col_major(dim, data)
    }

    /// Build from rows in reading order.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Malformed("matrix is not square".into()));
        }
        Self::from_fn(dim, |i, j| rows[i][j].clone())
    }

    /// Rows of `num/den` pairs scaled by a common denominator.
    pub fn from_scaled_rows(denominator: i64, rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&n| T::from_fraction(n, denominator)).collect())
                .collect(),
        )
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::from_col_major(dim, data)
    }

    fn from_col_major(dim: usize, data: Vec<T>) -> Result<Self> {
        let m = Self { dim, data };
        for j in 0..dim {
            let s = sum(m.column(j));
            if !s.near(&T::one()) {
                return Err(Error::ColumnSum {
                    column: j,
                    sum: s.to_string(),
                });
            }
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![T::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = T::one();
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[col * self.dim + row]
    }

    pub fn column(&self, col: usize) -> &[T] {
        &self.data[col * self.dim..(col + 1) * self.dim]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.dim)
    }

    pub fn row(&self, row: usize) -> Vec<T> {
        (0..self.dim).map(|j| self.get(row, j).clone()).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.dim).map(|i| sum(&self.row(i))).collect()
    }

    /// Rows sum to one as well as columns.
    pub fn is_bistochastic(&self) -> bool {
        self.row_sums().iter().all(|s| s.near(&T::one()))
    }

    pub fn is_stochastic(&self) -> bool {
        self.data.iter().all(Scalar::is_nonneg)
    }

    pub fn is_identity(&self) -> bool {
        self.near(&Self::identity(self.dim))
    }

    /// Entry-wise comparison under the scalar's notion of equality.
    pub fn near(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data.iter().zip(&other.data).all(|(a, b)| a.near(b))
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| sum_iter((0..self.dim).map(|j| self.get(i, j).clone() * v[j].clone())))
            .collect()
    }

    pub fn apply(&self, p: &Dist<T>) -> Result<QuasiDist<T>> {
        self.check_dim(p.dim())?;
        Ok(QuasiDist::new_unchecked(self.mul_vec(p.entries())))
    }

    pub fn apply_quasi(&self, p: &QuasiDist<T>) -> Result<QuasiDist<T>> {
        self.check_dim(p.dim())?;
        Ok(QuasiDist::new_unchecked(self.mul_vec(p.entries())))
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_dim(rhs.dim)?;
        let mut data = Vec::with_capacity(self.data.len());
        for col in rhs.columns() {
            data.extend(self.mul_vec(col));
        }
        // column sums of a product of column-normalised matrices stay one
        Ok(Self { dim: self.dim, data })
    }

    /// Exact `n`-th power by repeated squaring.
    pub fn power(&self, mut n: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base).expect("same dimension");
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        result
    }

    /// Kronecker product; index `(a, b)` of the joint space is `a·dim(rhs) + b`.
    pub fn tensor(&self, rhs: &Self) -> Self {
        let db = rhs.dim;
        let dim = self.dim * db;
        let mut data = Vec::with_capacity(dim * dim);
        for ja in 0..self.dim {
            for jb in 0..db {
                for ia in 0..self.dim {
                    for ib in 0..db {
                        data.push(self.get(ia, ja).clone() * rhs.get(ib, jb).clone());
                    }
                }
            }
        }
        Self { dim, data }
    }

    /// `(row, col, value)` for every negative entry, column by column.
    pub fn negative_entries(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::new();
        for j in 0..self.dim {
            for (i, v) in self.column(j).iter().enumerate() {
                if v.is_below_zero() {
                    out.push((i, j, v.clone()));
                }
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.dim).map(|i| self.row(i)).collect()
    }

    pub fn to_columns(&self) -> Vec<Vec<T>> {
        self.columns().map(<[T]>::to_vec).collect()
    }
}

impl<T: Scalar> StochMatrix<T> {
    pub fn new(m: QuasiMatrix<T>) -> Result<Self> {
        if let Some((row, col, v)) = m.negative_entries().into_iter().next() {
            return Err(Error::NegativeMatrixEntry {
                row,
                col,
                value: v.to_string(),
            });
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::new(QuasiMatrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(QuasiMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &QuasiMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> QuasiMatrix<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        self.0.get(row, col)
    }

    pub fn column(&self, col: usize) -> &[T] {
        self.0.column(col)
    }

    /// A stochastic matrix maps distributions to distributions.
    pub fn apply(&self, p: &Dist<T>) -> Result<Dist<T>> {
        self.0.check_dim(p.dim())?;
        Dist::new(self.0.mul_vec(p.entries()))
    }

    pub fn tensor(&self, rhs: &Self) -> Self {
        Self(self.0.tensor(&rhs.0))
    }
}

impl<T: fmt::Display> fmt::Display for QuasiMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|v| v.to_string()).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1);
        for i in 0..self.dim {
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>width$}", cells[j * self.dim + i])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

impl<T: fmt::Display> fmt::Display for StochMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
