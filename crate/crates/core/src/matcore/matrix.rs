use std::fmt;
use std::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Norm selector for the measures that are stated in both the spectral and
/// the Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Two,
    Fro,
}

impl Norm {
    pub const BOTH: [Norm; 2] = [Norm::Two, Norm::Fro];

    pub fn as_str(self) -> &'static str {
        match self {
            Norm::Two => "two",
            Norm::Fro => "fro",
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "2" => Ok(Norm::Two),
            "fro" | "f" | "frobenius" => Ok(Norm::Fro),
            other => Err(Error::Parse(format!("unknown norm '{other}'"))),
        }
    }
}

/// Dense real matrix stored column-major.
///
/// Empty shapes (zero rows or columns) are representable; they show up as
/// complements of full-dimensional subspaces. User-facing inputs are checked
/// with [`Matrix::ensure_nonempty_finite`].
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// `rows × cols` matrix with `diag` on its main diagonal.
    pub fn from_diag(rows: usize, cols: usize, diag: &[T]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(
                "from_col_major",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    /// Stacks column vectors side by side.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for col in columns {
            assert_eq!(col.len(), rows, "column length mismatch");
            data.extend_from_slice(col);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, a: usize, b: usize) -> (&mut [T], &mut [T]) {
        assert!(a < b && b < self.cols);
        let r = self.rows;
        let (lo, hi) = self.data.split_at_mut(b * r);
        (&mut lo[a * r..(a + 1) * r], &mut hi[..r])
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn ensure_nonempty_finite(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Contract(format!("{what} must have at least one row and column")));
        }
        if !self.is_finite() {
            return Err(Error::Contract(format!("{what} has non-finite entries")));
        }
        Ok(())
    }

    /// Copy of the columns in `range`.
    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols);
        Self {
            rows: self.rows,
            cols: range.len(),
            data: self.data[range.start * self.rows..range.end * self.rows].to_vec(),
        }
    }

    /// Copy of the rows in `range`.
    pub fn row_block(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.rows);
        Self::from_fn(range.len(), self.cols, |i, j| self[(range.start + i, j)])
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::dim(
                "hcat",
                format!("{} rows vs {} rows", self.rows, other.rows),
            ));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        })
    }

    pub fn push_column(&mut self, col: &[T]) {
        if self.cols == 0 && self.rows == 0 {
            self.rows = col.len();
        }
        assert_eq!(col.len(), self.rows, "column length mismatch");
        self.data.extend_from_slice(col);
        self.cols += 1;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for p in 0..self.cols {
                let b = rhs[(p, j)];
                if b == T::zero() {
                    continue;
                }
                axpy(b, self.col(p), dst);
            }
        }
        out
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn t_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.rows, rhs.rows,
            "t_matmul: ({}x{})ᵀ times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        Self::from_fn(self.cols, rhs.cols, |i, j| dot(self.col(i), rhs.col(j)))
    }

    /// `self · rhsᵀ`.
    pub fn matmul_t(&self, rhs: &Self) -> Self {
        self.matmul(&rhs.transpose())
    }

    /// Scales column `j` by `d[j]`, i.e. `self · diag(d)`.
    pub fn scale_columns(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for (j, &s) in d.iter().enumerate() {
            out.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        out
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for j in 0..self.cols {
            for (x, &s) in out.col_mut(j).iter_mut().zip(d) {
                *x *= s;
            }
        }
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.shape(), rhs.shape(), "elementwise shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn norm_fro(&self) -> T {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// `‖selfᵀself − I‖_F`, the departure from orthonormal columns.
    pub fn orthonormality_defect(&self) -> T {
        let g = self.t_matmul(self);
        let mut acc = T::zero();
        for j in 0..g.cols {
            for i in 0..g.rows {
                let target = if i == j { T::one() } else { T::zero() };
                let d = g[(i, j)] - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// `(I − self·selfᵀ)·rhs` for `self` with orthonormal columns.
    pub fn project_out(&self, rhs: &Self) -> Self {
        let coeffs = self.t_matmul(rhs);
        rhs.sub(&self.matmul(&coeffs))
    }

    /// Converts the element type.
    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.to_f64_lossy())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5?} ", self.data[j * self.rows + i])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Euclidean norm with scaling against overflow.
pub fn norm2<T: Scalar>(x: &[T]) -> T {
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let ss: T = x.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}
