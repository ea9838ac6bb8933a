//! Householder QR.

use super::matrix::{dot, norm2, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Thin QR factors `X = Q·R` with `R` normalized to a non-negative diagonal.
#[derive(Debug, Clone)]
pub struct ThinQr<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
    /// Columns whose diagonal entry in `R` is numerically zero.
    pub deficient: Vec<usize>,
}

impl<T: Scalar> ThinQr<T> {
    pub fn is_full_rank(&self) -> bool {
        self.deficient.is_empty()
    }
}

/// Unit Householder vectors, one per eliminated column; `None` marks an
/// identity step (the column below the diagonal was already zero).
struct Reflectors<T> {
    rows: usize,
    vs: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> Reflectors<T> {
    /// Reduces `a` in place to upper-triangular form and records the reflectors.
    fn factor(a: &mut Matrix<T>) -> Self {
        let (m, n) = a.shape();
        let steps = n.min(m);
        let mut vs = Vec::with_capacity(steps);
        for k in 0..steps {
            let x: Vec<T> = a.col(k)[k..].to_vec();
            let xnorm = norm2(&x);
            if xnorm == T::zero() {
                vs.push(None);
                continue;
            }
            let alpha = if x[0] >= T::zero() { -xnorm } else { xnorm };
            let mut v = x;
            v[0] -= alpha;
            let vnorm = norm2(&v);
            if vnorm == T::zero() {
                vs.push(None);
                continue;
            }
            v.iter_mut().for_each(|e| *e /= vnorm);
            for j in k..n {
                apply_reflector(&v, &mut a.col_mut(j)[k..]);
            }
            for e in &mut a.col_mut(k)[k + 1..] {
                *e = T::zero();
            }
            vs.push(Some(v));
        }
        Self { rows: m, vs }
    }

    /// `H_0 H_1 ⋯ H_{p-1} · e_c` for each requested column index `c`.
    fn q_columns(&self, columns: impl Iterator<Item = usize>) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows, 0);
        for c in columns {
            let mut e = vec![T::zero(); self.rows];
            e[c] = T::one();
            for (k, v) in self.vs.iter().enumerate().rev() {
                if let Some(v) = v {
                    apply_reflector(v, &mut e[k..]);
                }
            }
            out.push_column(&e);
        }
        out
    }
}

#[inline]
fn apply_reflector<T: Scalar>(v: &[T], x: &mut [T]) {
    let two = T::lit(2.0);
    let s = two * dot(v, x);
    if s != T::zero() {
        for (xi, &vi) in x.iter_mut().zip(v) {
            *xi -= s * vi;
        }
    }
}

/// Thin QR of a tall or square matrix.
///
/// Diagonal entries of `R` at or below `max(m,n)·ε·max|R_ii|` are reported in
/// [`ThinQr::deficient`]; the factors are still returned.
pub fn thin_qr<T: Scalar>(x: &Matrix<T>) -> Result<ThinQr<T>> {
    let (m, n) = x.shape();
    if n > m {
        return Err(Error::dim("thin_qr", format!("{n} columns exceed {m} rows")));
    }
    let mut work = x.clone();
    let refl = Reflectors::factor(&mut work);
    let mut q = refl.q_columns(0..n);
    let mut r = Matrix::from_fn(n, n, |i, j| if i <= j { work[(i, j)] } else { T::zero() });
    for k in 0..n {
        if r[(k, k)] < T::zero() {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            q.col_mut(k).iter_mut().for_each(|e| *e = -*e);
        }
    }
    let rmax = (0..n).fold(T::zero(), |acc, k| acc.max(r[(k, k)].abs()));
    let tol = T::from_usize_lossy(m.max(n)) * T::epsilon() * rmax;
    let deficient = (0..n).filter(|&k| r[(k, k)].abs() <= tol).collect();
    Ok(ThinQr { q, r, deficient })
}

/// Orthonormal basis of the orthogonal complement of `range(basis)`.
///
/// `basis` must have orthonormal columns; the result is `m × (m − r)`.
pub fn orthonormal_complement<T: Scalar>(basis: &Matrix<T>) -> Matrix<T> {
    let (m, r) = basis.shape();
    if r >= m {
        return Matrix::zeros(m, 0);
    }
    let mut work = basis.clone();
    let refl = Reflectors::factor(&mut work);
    refl.q_columns(r..m)
}

/// Solves `R·y = b` for upper-triangular `R`.
pub fn solve_upper<T: Scalar>(r: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = r.rows();
    if r.cols() != n || b.len() != n {
        return Err(Error::dim("solve_upper", "R must be square and match b"));
    }
    let mut y = b.to_vec();
    for i in (0..n).rev() {
        let d = r[(i, i)];
        if d == T::zero() {
            return Err(Error::Singular { index: i });
        }
        let mut s = y[i];
        for j in i + 1..n {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / d;
    }
    Ok(y)
}

/// Inverse of an upper-triangular matrix.
pub fn invert_upper<T: Scalar>(r: &Matrix<T>) -> Result<Matrix<T>> {
    let n = r.rows();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        cols.push(solve_upper(r, &e)?);
    }
    Ok(Matrix::from_columns(n, &cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::gaussian;

    #[test]
    fn orthonormal_input_is_reproduced() {
        let x = thin_qr(&gaussian(7, 3, 11)).unwrap().q;
        let qr = thin_qr(&x).unwrap();
        assert!(qr.q.sub(&x).norm_fro() < 1e-13);
        assert!(qr.r.sub(&Matrix::identity(3)).norm_fro() < 1e-13);
        assert!(qr.is_full_rank());
    }

    #[test]
    fn repeated_column_is_flagged() {
        let x = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]]);
        let qr = thin_qr(&x).unwrap();
        assert_eq!(qr.deficient, vec![1]);
        assert!(qr.q.orthonormality_defect() < 1e-14);
        assert!(qr.q.matmul(&qr.r).sub(&x).norm_fro() < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let x = gaussian(6, 3, 5);
        let qr = thin_qr(&x).unwrap();
        assert!(qr.q.orthonormality_defect() < 1e-12);
        assert!(qr.q.matmul(&qr.r).sub(&x).norm_fro() <= 1e-12 * x.norm_fro());
        for i in 0..3 {
            assert!(qr.r[(i, i)] > 0.0);
            for j in 0..i {
                assert_eq!(qr.r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn wide_input_is_rejected() {
        assert!(matches!(thin_qr(&gaussian(2, 3, 1)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn complement_completes_an_orthogonal_basis() {
        let q = thin_qr(&gaussian(6, 2, 9)).unwrap().q;
        let c = orthonormal_complement(&q);
        assert_eq!(c.shape(), (6, 4));
        let full = q.hcat(&c).unwrap();
        assert!(full.orthonormality_defect() < 1e-13);
    }

    #[test]
    fn triangular_inverse() {
        let r = Matrix::from_rows(&[&[2.0, 1.0], &[0.0, 4.0]]);
        let inv = invert_upper(&r).unwrap();
        assert!(r.matmul(&inv).sub(&Matrix::identity(2)).norm_fro() < 1e-15);
        let singular = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert_eq!(invert_upper(&singular).unwrap_err(), Error::Singular { index: 1 });
    }
}
