//! Smith normal form over the integers with arbitrary-precision entries.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Dense integer matrix, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().map(|v| BigInt::from(*v))).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= f * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, f: &BigInt, from_col: usize) {
        for j in from_col..self.cols {
            let s = &self.data[src * self.cols + j];
            if !s.is_zero() {
                let v = s * f;
                self.data[dst * self.cols + j] -= v;
            }
        }
    }

    /// col[dst] -= f * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, f: &BigInt, from_row: usize) {
        for i in from_row..self.rows {
            let s = &self.data[i * self.cols + src];
            if !s.is_zero() {
                let v = s * f;
                self.data[i * self.cols + dst] -= v;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfResult {
    /// Positive diagonal entries `d_1 | d_2 | ... | d_rank`.
    pub invariant_factors: Vec<BigInt>,
    pub rank: usize,
}

/// Invariant factors and rank of an integer matrix.
///
/// Each round moves the entry of smallest magnitude in the trailing block to
/// the pivot and reduces its row and column by it. A nonzero remainder is
/// smaller than the pivot, so the next round's pivot is too and the rounds
/// for one position terminate. Entries are `BigInt`, so there is no overflow.
pub fn smith_normal_form(matrix: &IntMatrix) -> SnfResult {
    let mut m = matrix.clone();
    let (rows, cols) = (m.rows, m.cols);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_abs_entry(&m, t) else { break };
        m.swap_rows(t, pi);
        m.swap_cols(t, pj);
        let mut clean = true;
        for i in t + 1..rows {
            if !m.get(i, t).is_zero() {
                let q = nearest_quotient(m.get(i, t), m.get(t, t));
                m.row_axpy(i, t, &q, t);
                clean &= m.get(i, t).is_zero();
            }
        }
        for j in t + 1..cols {
            if !m.get(t, j).is_zero() {
                let q = nearest_quotient(m.get(t, j), m.get(t, t));
                m.col_axpy(j, t, &q, t);
                clean &= m.get(t, j).is_zero();
            }
        }
        if !clean {
            continue;
        }
        // divisibility of the trailing block by the pivot
        let p = m.get(t, t).clone();
        if let Some(i) = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !m.get(i, j).is_multiple_of(&p))) {
            // row t += row i; the next round leaves a remainder below |p|
            m.row_axpy(t, i, &-BigInt::one(), t);
            continue;
        }
        diag.push(p.abs());
        t += 1;
    }
    SnfResult { rank: diag.len(), invariant_factors: diag }
}

/// `a / b` rounded to the nearest integer, so the remainder is at most `|b| / 2`.
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_mod_floor(b);
    if (&r + &r).abs() > b.abs() {
        q + BigInt::one()
    } else {
        q
    }
}

fn min_abs_entry(m: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in t..m.rows {
        for j in t..m.cols {
            let v = m.get(i, j);
            if v.is_zero() {
                continue;
            }
            let a = v.abs();
            if best.as_ref().map_or(true, |(_, b)| a < *b) {
                let unit = a.is_one();
                best = Some(((i, j), a));
                if unit {
                    return best.map(|(p, _)| p);
                }
            }
        }
    }
    best.map(|(p, _)| p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(rows: &[Vec<i64>]) -> Vec<i64> {
        smith_normal_form(&IntMatrix::from_i64(rows))
            .invariant_factors
            .iter()
            .map(|v| i64::try_from(v).unwrap())
            .collect()
    }

    #[test]
    fn two_by_two() {
        assert_eq!(factors(&[vec![2, 4], vec![6, 8]]), vec![2, 4]);
    }

    #[test]
    fn identity_and_zero() {
        let id: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| i64::from(i == j)).collect()).collect();
        let r = smith_normal_form(&IntMatrix::from_i64(&id));
        assert_eq!(r.rank, 5);
        assert!(r.invariant_factors.iter().all(|v| v.is_one()));
        let z = smith_normal_form(&IntMatrix::zeros(3, 4));
        assert_eq!(z.rank, 0);
        assert!(z.invariant_factors.is_empty());
    }

    #[test]
    fn divisibility_fix_up() {
        // diag(2, 3) ~ diag(1, 6)
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(factors(&[vec![4, 0, 0], vec![0, 6, 0], vec![0, 0, 10]]), vec![2, 2, 60]);
    }

    #[test]
    fn large_entries_do_not_overflow() {
        let big = i64::MAX / 3;
        let f = factors(&[vec![big, big - 1], vec![big - 1, big - 2]]);
        // det = -1 so both factors are 1
        assert_eq!(f, vec![1, 1]);
    }
}
