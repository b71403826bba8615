//! Small dense complex linear algebra: adjoint, norms, determinant, and a
//! scaling-and-squaring Taylor exponential.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Max-column-sum norm.
pub fn norm_one(m: ArrayView2<C64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: ArrayView2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: ArrayView2<C64>, b: ArrayView2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn frobenius(m: ArrayView2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, ONE)
}

pub fn vec_norm(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<u|v>` with the first argument conjugated.
pub fn inner(u: ArrayView1<C64>, v: ArrayView1<C64>) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// `max |(U^dagger U - 1)_ij|`.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    max_abs_diff(adjoint(u).dot(u).view(), identity(n).view())
}

/// Determinant by LU decomposition with partial pivoting.
pub fn determinant(m: &Array2<C64>) -> C64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut a = m.clone();
    let mut det = ONE;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return ZERO;
        }
        if p != k {
            for j in 0..n {
                a.swap((k, j), (p, j));
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f != ZERO {
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
    }
    det
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled by `2^-s` so that its 1-norm is at most 1/2, the
/// series is summed until terms fall below machine epsilon relative to the
/// partial sum, and the result is squared `s` times.
pub fn expm(m: &Array2<C64>) -> Array2<C64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm of a non-square matrix");
    let norm = norm_one(m.view());
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m.mapv(|z| z / 2f64.powi(s));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        term = term.dot(&scaled).mapv(|z| z / k as f64);
        result += &term;
        if norm_one(term.view()) <= f64::EPSILON * norm_one(result.view()) {
            break;
        }
    }
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}

/// Row-compressed nonzero pattern of an operator, for fast `y += c A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    pub fn from_dense(m: &Array2<C64>) -> Self {
        let dim = m.nrows();
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..dim {
            row_start.push(cols.len());
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
        }
        row_start.push(cols.len());
        SparseOp {
            dim,
            row_start,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y += coeff * A x`
    pub fn apply_add(&self, coeff: C64, x: &Array1<C64>, y: &mut Array1<C64>) {
        debug_assert_eq!(x.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = ZERO;
            for k in self.row_start[i]..self.row_start[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            if acc != ZERO {
                y[i] += coeff * acc;
            }
        }
    }
}
