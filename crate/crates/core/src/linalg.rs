//! Small dense linear algebra: row-major matrices and LU with partial pivoting.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
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

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn max_abs_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self.clone())
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorisation `P A = L U` with unit lower-triangular `L`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    factors: DenseMatrix<T>,
    perm: Vec<usize>,
    parity: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn new(mut a: DenseMatrix<T>) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU of a non-square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = false;
        for k in 0..n {
            let mut pivot = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    pivot = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(Error::Singular);
            }
            if pivot != k {
                for j in 0..n {
                    a.data.swap(k * n + j, pivot * n + j);
                }
                perm.swap(k, pivot);
                parity = !parity;
            }
            let inv = T::one() / a[(k, k)];
            let (upper, lower) = a.data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let factor = row[k] * inv;
                row[k] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    row[j] -= factor * pivot_row[j];
                }
            }
        }
        Ok(Self {
            factors: a,
            perm,
            parity,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors.rows
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.factors.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.factors.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    pub fn determinant(&self) -> T {
        let d: T = (0..self.dim()).map(|i| self.factors[(i, i)]).product();
        if self.parity {
            -d
        } else {
            d
        }
    }

    /// `log |det A|` and the sign of the determinant.
    pub fn log_abs_determinant(&self) -> (T, T) {
        let mut log = T::zero();
        let mut sign = if self.parity { -T::one() } else { T::one() };
        for i in 0..self.dim() {
            let u = self.factors[(i, i)];
            if u < T::zero() {
                sign = -sign;
            }
            log += u.abs().ln();
        }
        (log, sign)
    }

    pub fn inverse(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e);
            e[j] = T::zero();
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }
}

/// Determinant of a small square matrix.
pub fn determinant<T: Scalar>(m: &DenseMatrix<T>) -> T {
    match Lu::new(m.clone()) {
        Ok(lu) => lu.determinant(),
        Err(_) => T::zero(),
    }
}

/// Restricts a Green's matrix to the domain with interior point `i` removed:
/// `G' = G - G[:, i] G[i, :] / G[i, i]`. Returns the removed diagonal `G[i, i]`.
pub fn green_downdate<T: Scalar>(g: &mut DenseMatrix<T>, i: usize) -> T {
    let n = g.rows();
    let pivot = g[(i, i)];
    let col: Vec<T> = (0..n).map(|r| g[(r, i)]).collect();
    let row: Vec<T> = g.row(i).to_vec();
    for r in 0..n {
        let f = col[r] / pivot;
        if f == T::zero() {
            continue;
        }
        for (gv, &rv) in g.row_mut(r).iter_mut().zip(&row) {
            *gv -= f * rv;
        }
    }
    pivot
}

/// Least-squares solution of `X beta = y` through the normal equations.
pub fn least_squares<T: Scalar>(design: &[Vec<T>], y: &[T]) -> Result<Vec<T>> {
    let p = design.first().map_or(0, Vec::len);
    let mut xtx = DenseMatrix::zeros(p, p);
    let mut xty = vec![T::zero(); p];
    for (row, &yi) in design.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                xtx[(i, j)] += row[i] * row[j];
            }
        }
    }
    Ok(xtx.lu()?.solve(&xty))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_determinant_of_a_small_system() {
        let a = DenseMatrix::from_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ]);
        let lu = a.lu().unwrap();
        assert!((lu.determinant() - 18.0_f64).abs() < 1e-12);
        let x = lu.solve(&[3.0, 5.0, 5.0]);
        for (xi, ei) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((xi - ei).abs() < 1e-12);
        }
        let (log, sign) = lu.log_abs_determinant();
        assert_eq!(sign, 1.0);
        assert!((log - 18.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pivoting_tracks_the_sign() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(determinant(&a), -1.0);
        let inv = a.lu().unwrap().inverse();
        assert_eq!(inv, a);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(a.lu(), Err(Error::Singular)));
        assert_eq!(determinant(&a), 0.0);
    }

    #[test]
    fn least_squares_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let design: Vec<Vec<f64>> = xs.iter().map(|&x| vec![1.0, x]).collect();
        let y: Vec<f64> = xs.iter().map(|&x| 2.0 - 0.5 * x).collect();
        let beta = least_squares(&design, &y).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-12 && (beta[1] + 0.5).abs() < 1e-12);
    }
}
