//! Small dense linear algebra: matrices, linear solves and 3x3 eigenvalues.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(|c| c.to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if a.cols() != n || b.len() != n {
        return Err(Error::Contract("solve needs a square system".into()));
    }
    let mut m = a.data.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if m[piv * n + col].abs() < 1e-300 {
            return Err(Error::Numerical("singular linear system".into()));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row * n + row];
    }
    Ok(x)
}

/// Coefficients `(c2, c1, c0)` of the monic characteristic polynomial
/// `l^3 + c2 l^2 + c1 l + c0` of a 3x3 matrix.
pub fn char_poly3(a: &Matrix) -> (f64, f64, f64) {
    let g = |i, j| a.get(i, j);
    let tr = g(0, 0) + g(1, 1) + g(2, 2);
    let minors = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0) + g(0, 0) * g(2, 2) - g(0, 2) * g(2, 0)
        + g(1, 1) * g(2, 2)
        - g(1, 2) * g(2, 1);
    let det = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
        - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
        + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
    (-tr, minors, -det)
}

/// Roots of the monic cubic `l^3 + c2 l^2 + c1 l + c0` by Cardano's formula,
/// each polished with one Newton step. Sorted by descending real part.
pub fn cubic_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    // depressed cubic t^3 + p t + q with l = t - c2/3
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let disc = Complex64::new(q * q / 4.0 + p * p * p / 27.0, 0.0);
    let sq = disc.sqrt();
    let mut u = (Complex64::new(-q / 2.0, 0.0) + sq).cbrt();
    if u.norm() < 1e-300 {
        u = (Complex64::new(-q / 2.0, 0.0) - sq).cbrt();
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let mut w = Complex64::new(1.0, 0.0);
    for root in roots.iter_mut() {
        let uk = u * w;
        let t = if uk.norm() < 1e-300 { Complex64::new(0.0, 0.0) } else { uk - p / (3.0 * uk) };
        *root = t - shift;
        w *= omega;
    }
    let poly = |l: Complex64| ((l + c2) * l + c1) * l + c0;
    let dpoly = |l: Complex64| (3.0 * l + 2.0 * c2) * l + c1;
    for root in roots.iter_mut() {
        let d = dpoly(*root);
        if d.norm() > 1e-14 {
            *root -= poly(*root) / d;
        }
        if root.im.abs() < 1e-12 * (1.0 + root.re.abs()) {
            root.im = 0.0;
        }
    }
    let complex: Vec<usize> = (0..3).filter(|&i| roots[i].im != 0.0).collect();
    if let [i, j] = complex[..] {
        // a real cubic has conjugate non-real roots
        let re = 0.5 * (roots[i].re + roots[j].re);
        let im = 0.5 * (roots[i].im.abs() + roots[j].im.abs());
        roots[i] = Complex64::new(re, im);
        roots[j] = Complex64::new(re, -im);
    }
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    roots
}

/// Eigenvalues of a 3x3 matrix via its characteristic cubic.
pub fn eigenvalues3(a: &Matrix) -> [Complex64; 3] {
    let (c2, c1, c0) = char_poly3(a);
    cubic_roots(c2, c1, c0)
}

/// Unit vector spanning the kernel of `a - l I` for a real, simple eigenvalue `l`
/// of a 3x3 matrix. Takes the largest cross product of two rows.
pub fn real_eigenvector3(a: &Matrix, l: f64) -> Vec<f64> {
    let row = |i: usize| {
        let mut v = [a.get(i, 0), a.get(i, 1), a.get(i, 2)];
        v[i] -= l;
        v
    };
    let rows = [row(0), row(1), row(2)];
    let cross = |u: [f64; 3], v: [f64; 3]| {
        [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
    };
    let mut best = [0.0; 3];
    let mut best_norm = -1.0;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = cross(rows[i], rows[j]);
        let nrm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if nrm > best_norm {
            best_norm = nrm;
            best = c;
        }
    }
    best.iter().map(|v| v / best_norm).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_known_roots() {
        // (l - 1)(l + 2)(l + 3) = l^3 + 4 l^2 + l - 6
        let r = cubic_roots(4.0, 1.0, -6.0);
        let re: Vec<f64> = r.iter().map(|c| c.re).collect();
        assert!((re[0] - 1.0).abs() < 1e-12);
        assert!((re[1] + 2.0).abs() < 1e-12);
        assert!((re[2] + 3.0).abs() < 1e-12);
        assert!(r.iter().all(|c| c.im == 0.0));
    }

    #[test]
    fn cubic_with_complex_pair() {
        // (l + 1)(l^2 + 1) = l^3 + l^2 + l + 1
        let r = cubic_roots(1.0, 1.0, 1.0);
        assert!((r[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((r[2] + 1.0).norm() < 1e-12);
    }

    #[test]
    fn cubic_with_triple_root() {
        // (l + 2)^3
        let r = cubic_roots(6.0, 12.0, 8.0);
        for c in r {
            assert!((c + 2.0).norm() < 1e-5);
        }
    }

    #[test]
    fn solve_small_system() {
        let a = Matrix::from_row_major(2, 2, vec![2.0, 1.0, 1.0, 3.0]);
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        let sing = Matrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(solve(&sing, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn eigenvector_in_kernel() {
        let a = Matrix::from_row_major(3, 3, vec![-10.0, 10.0, 0.0, 28.0, -1.0, 0.0, 0.0, 0.0, -8.0 / 3.0]);
        let ev = eigenvalues3(&a);
        let v = real_eigenvector3(&a, ev[0].re);
        let av = a.mul_vec(&v);
        for i in 0..3 {
            assert!((av[i] - ev[0].re * v[i]).abs() < 1e-10);
        }
    }
}
