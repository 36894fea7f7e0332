//! Homology of free chain complexes by elementary reductions followed by a
//! Smith normal form of whatever survives.
//!
//! A reduction pair `(a, b)` has `a` a face of `b` with unit incidence. It is
//! removed by Gaussian elimination: every other coface `c` of `a` gets
//! `d c -= <d c, a> <d b, a> d b`, and `b` is dropped from the boundaries of
//! its own cofaces. Coreductions (`d b = {a}`) and free-face collapses
//! (`a` has the single coface `b`) are tried first since they cause no fill-in.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::complex::{boundary_of, CubicalComplex};
use super::snf::{smith_normal_form, IntMatrix};
use crate::error::{contract, Result};

/// Ranks and torsion coefficients of the homology groups, indexed by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homology {
    pub betti: Vec<u64>,
    /// Invariant factors greater than one in each degree.
    pub torsion: Vec<Vec<BigInt>>,
}

impl Homology {
    pub fn is_trivial(&self) -> bool {
        self.betti.iter().all(|&b| b == 0) && self.torsion.iter().all(Vec::is_empty)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.betti.iter().enumerate().map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) }).sum()
    }
}

/// A free chain complex with integer boundary coefficients.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    dims: Vec<u8>,
    bd: Vec<Vec<(u32, i64)>>,
    cbd: Vec<Vec<u32>>,
    alive: Vec<bool>,
}

impl ChainComplex {
    /// `bd[i]` lists `(face, coefficient)` for cell `i`; faces must have
    /// dimension `dims[i] - 1`.
    pub fn new(dims: Vec<u8>, bd: Vec<Vec<(u32, i64)>>) -> Result<Self> {
        if dims.len() != bd.len() {
            return Err(contract("one boundary list per cell"));
        }
        let n = dims.len();
        let mut cbd = vec![Vec::new(); n];
        for (i, faces) in bd.iter().enumerate() {
            for &(f, c) in faces {
                let fu = f as usize;
                if fu >= n || dims[fu] + 1 != dims[i] || c == 0 {
                    return Err(contract("malformed boundary entry"));
                }
                cbd[fu].push(i as u32);
            }
        }
        Ok(Self { dims, bd, cbd, alive: vec![true; n] })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    fn coef(&self, cell: u32, face: u32) -> i64 {
        self.bd[cell as usize].iter().find(|e| e.0 == face).map_or(0, |e| e.1)
    }

    /// Candidate pair through which `x` can be reduced cheaply.
    fn cheap_pair(&self, x: u32) -> Option<(u32, u32)> {
        let xi = x as usize;
        if !self.alive[xi] {
            return None;
        }
        if let [(a, c)] = self.bd[xi][..] {
            if c.abs() == 1 {
                return Some((a, x));
            }
        }
        if let [b] = self.cbd[xi][..] {
            if self.coef(b, x).abs() == 1 {
                return Some((x, b));
            }
        }
        None
    }

    /// Performs the reduction of `(a, b)`. Returns false, leaving the complex
    /// untouched, when a coefficient would overflow.
    fn reduce(&mut self, a: u32, b: u32, touched: &mut Vec<u32>) -> bool {
        let u = self.coef(b, a);
        debug_assert!(u.abs() == 1);
        let bd_b = self.bd[b as usize].clone();
        let mut updates: Vec<(u32, Vec<(u32, i64)>)> = Vec::new();
        for &c in &self.cbd[a as usize] {
            if c == b {
                continue;
            }
            let f = self.coef(c, a) * u;
            let mut nb = self.bd[c as usize].clone();
            for &(g, w) in &bd_b {
                let Some(fw) = f.checked_mul(w) else { return false };
                match nb.iter_mut().find(|e| e.0 == g) {
                    Some(e) => match e.1.checked_sub(fw) {
                        Some(v) => e.1 = v,
                        None => return false,
                    },
                    None => match 0i64.checked_sub(fw) {
                        Some(v) => nb.push((g, v)),
                        None => return false,
                    },
                }
            }
            nb.retain(|e| e.1 != 0);
            updates.push((c, nb));
        }
        for (c, nb) in updates {
            let old = std::mem::replace(&mut self.bd[c as usize], nb);
            for &(g, _) in &old {
                if !self.bd[c as usize].iter().any(|e| e.0 == g) {
                    remove_item(&mut self.cbd[g as usize], c);
                    touched.push(g);
                }
            }
            for &(g, _) in &self.bd[c as usize] {
                if !old.iter().any(|e| e.0 == g) {
                    self.cbd[g as usize].push(c);
                    touched.push(g);
                }
            }
            touched.push(c);
        }
        for d in std::mem::take(&mut self.cbd[b as usize]) {
            self.bd[d as usize].retain(|e| e.0 != b);
            touched.push(d);
        }
        for (g, _) in std::mem::take(&mut self.bd[b as usize]) {
            remove_item(&mut self.cbd[g as usize], b);
            touched.push(g);
        }
        for (g, _) in std::mem::take(&mut self.bd[a as usize]) {
            remove_item(&mut self.cbd[g as usize], a);
            touched.push(g);
        }
        self.cbd[a as usize].clear();
        self.alive[a as usize] = false;
        self.alive[b as usize] = false;
        true
    }

    /// Unit pair with the smallest fill-in estimate.
    fn best_general_pair(&self, banned: &[(u32, u32)]) -> Option<(u32, u32)> {
        let mut best: Option<((u32, u32), usize)> = None;
        for b in 0..self.len() {
            if !self.alive[b] {
                continue;
            }
            for &(a, c) in &self.bd[b] {
                if c.abs() != 1 || banned.contains(&(a, b as u32)) {
                    continue;
                }
                let cost = (self.cbd[a as usize].len() - 1) * (self.bd[b].len() - 1);
                if best.map_or(true, |(_, bc)| cost < bc) {
                    best = Some(((a, b as u32), cost));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// Reduces the complex as far as possible with unit pivots.
    pub fn reduce_all(&mut self) {
        let n = self.len();
        let mut queued = vec![true; n];
        let mut queue: VecDeque<u32> = (0..n as u32).collect();
        let mut touched = Vec::new();
        let mut banned = Vec::new();
        loop {
            while let Some(x) = queue.pop_front() {
                queued[x as usize] = false;
                if let Some((a, b)) = self.cheap_pair(x) {
                    touched.clear();
                    if self.reduce(a, b, &mut touched) {
                        for &t in &touched {
                            if self.alive[t as usize] && !queued[t as usize] {
                                queued[t as usize] = true;
                                queue.push_back(t);
                            }
                        }
                    }
                }
            }
            let Some((a, b)) = self.best_general_pair(&banned) else { break };
            touched.clear();
            if self.reduce(a, b, &mut touched) {
                for &t in &touched {
                    if self.alive[t as usize] && !queued[t as usize] {
                        queued[t as usize] = true;
                        queue.push_back(t);
                    }
                }
            } else {
                banned.push((a, b));
            }
        }
    }

    /// Number of cells left alive, by dimension.
    pub fn alive_counts(&self) -> Vec<usize> {
        let top = self.dims.iter().copied().max().map_or(0, |d| d as usize + 1);
        let mut counts = vec![0; top];
        for (i, &d) in self.dims.iter().enumerate() {
            if self.alive[i] {
                counts[d as usize] += 1;
            }
        }
        counts
    }

    /// Homology up to degree `top`, reducing first.
    pub fn homology(mut self, top: usize) -> Homology {
        self.reduce_all();
        let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); top + 2];
        for (i, &d) in self.dims.iter().enumerate() {
            if self.alive[i] && (d as usize) <= top {
                by_dim[d as usize].push(i as u32);
            }
        }
        // rank and factors of the boundary map out of degree k
        let mut rank = vec![0usize; top + 2];
        let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 2];
        for k in 1..=top {
            let (rows, cols) = (&by_dim[k - 1], &by_dim[k]);
            if rows.is_empty() || cols.is_empty() {
                continue;
            }
            let mut m = IntMatrix::zeros(rows.len(), cols.len());
            for (j, &c) in cols.iter().enumerate() {
                for &(f, w) in &self.bd[c as usize] {
                    let i = rows.binary_search(&f).expect("faces stay alive");
                    m.set(i, j, BigInt::from(w));
                }
            }
            let snf = smith_normal_form(&m);
            rank[k] = snf.rank;
            factors[k] = snf.invariant_factors.into_iter().filter(|v| !v.is_one()).collect();
        }
        let betti = (0..=top).map(|k| (by_dim[k].len() - rank[k] - rank[k + 1]) as u64).collect();
        let torsion = (0..=top).map(|k| factors[k + 1].clone()).collect();
        Homology { betti, torsion }
    }
}

fn remove_item(v: &mut Vec<u32>, x: u32) {
    if let Some(p) = v.iter().position(|&y| y == x) {
        v.swap_remove(p);
    }
}

/// Chain complex of the pair `(x, a)`: cells of `x` not in `a`, with faces in
/// `a` dropped from boundaries.
pub fn relative_chain_complex(x: &CubicalComplex, a: &CubicalComplex) -> Result<ChainComplex> {
    if !a.is_subcomplex_of(x) {
        return Err(contract("relative homology needs a subcomplex"));
    }
    let ambient = x.ambient_dim();
    let kept: Vec<Vec<u64>> = (0..=ambient).map(|k| x.cells(k).iter().copied().filter(|&c| !a.contains(c)).collect()).collect();
    let mut offset = vec![0usize; ambient + 2];
    for k in 0..=ambient {
        offset[k + 1] = offset[k] + kept[k].len();
    }
    let mut dims = Vec::with_capacity(offset[ambient + 1]);
    let mut bd = Vec::with_capacity(offset[ambient + 1]);
    for (k, cells) in kept.iter().enumerate() {
        for &c in cells {
            dims.push(k as u8);
            let faces = if k == 0 {
                Vec::new()
            } else {
                boundary_of(c, ambient)
                    .into_iter()
                    .filter_map(|(f, s)| kept[k - 1].binary_search(&f).ok().map(|i| ((offset[k - 1] + i) as u32, s)))
                    .collect()
            };
            bd.push(faces);
        }
    }
    ChainComplex::new(dims, bd)
}

/// Homology of the pair `(x, a)`, up to the ambient dimension.
pub fn relative_homology(x: &CubicalComplex, a: &CubicalComplex) -> Result<Homology> {
    let cc = relative_chain_complex(x, a)?;
    Ok(cc.homology(x.ambient_dim()))
}

/// Homology of `x` itself.
pub fn homology(x: &CubicalComplex) -> Result<Homology> {
    relative_homology(x, &CubicalComplex::empty(x.ambient_dim())?)
}

/// Homology computed without any reductions, straight from the Smith normal
/// form of the full boundary matrices. Only for small complexes.
pub fn homology_unreduced(cc: &ChainComplex, top: usize) -> Homology {
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); top + 2];
    for (i, &d) in cc.dims.iter().enumerate() {
        if (d as usize) <= top {
            by_dim[d as usize].push(i as u32);
        }
    }
    let mut rank = vec![0usize; top + 2];
    let mut factors: Vec<Vec<BigInt>> = vec![Vec::new(); top + 2];
    for k in 1..=top {
        let (rows, cols) = (&by_dim[k - 1], &by_dim[k]);
        if rows.is_empty() || cols.is_empty() {
            continue;
        }
        let mut m = IntMatrix::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for &(f, w) in &cc.bd[c as usize] {
                let i = rows.binary_search(&f).expect("face of lower dimension");
                let cur = m.get(i, j).clone();
                m.set(i, j, cur + BigInt::from(w));
            }
        }
        let snf = smith_normal_form(&m);
        rank[k] = snf.rank;
        factors[k] = snf.invariant_factors.into_iter().filter(|v| !v.is_one() && !v.is_zero()).collect();
    }
    Homology {
        betti: (0..=top).map(|k| (by_dim[k].len() - rank[k] - rank[k + 1]) as u64).collect(),
        torsion: (0..=top).map(|k| factors[k + 1].clone()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: u32) -> CubicalComplex {
        // boundary of an n x n square of cubes, as a 2-d annulus of width 1
        let corners = (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).filter(|c| c[0] == 0 || c[1] == 0 || c[0] == n - 1 || c[1] == n - 1);
        CubicalComplex::from_cubes(2, corners).unwrap()
    }

    #[test]
    fn point_and_square() {
        let p = CubicalComplex::from_cells(2, [vec![0, 0]]).unwrap();
        assert_eq!(homology(&p).unwrap().betti, vec![1, 0, 0]);
        let sq = CubicalComplex::from_cubes(2, [vec![0, 0]]).unwrap();
        assert_eq!(homology(&sq).unwrap().betti, vec![1, 0, 0]);
    }

    #[test]
    fn annulus_is_a_circle() {
        let h = homology(&ring(4)).unwrap();
        assert_eq!(h.betti, vec![1, 1, 0]);
        assert!(h.torsion.iter().all(Vec::is_empty));
    }

    #[test]
    fn square_relative_boundary_is_a_sphere() {
        let sq = CubicalComplex::from_cubes(2, [vec![0, 0]]).unwrap();
        let edges = CubicalComplex::from_cells(2, [vec![1, 0], vec![1, 2], vec![0, 1], vec![2, 1]]).unwrap();
        let h = relative_homology(&sq, &edges).unwrap();
        assert_eq!(h.betti, vec![0, 0, 1]);
    }

    #[test]
    fn hollow_cube_is_a_two_sphere() {
        let corners = (0..3u32)
            .flat_map(|i| (0..3u32).flat_map(move |j| (0..3u32).map(move |k| vec![i, j, k])))
            .filter(|c| c != &vec![1, 1, 1]);
        let x = CubicalComplex::from_cubes(3, corners).unwrap();
        assert_eq!(homology(&x).unwrap().betti, vec![1, 0, 1, 0]);
    }

    #[test]
    fn relative_requires_subcomplex() {
        let a = CubicalComplex::from_cubes(2, [vec![0, 0]]).unwrap();
        let b = CubicalComplex::from_cubes(2, [vec![3, 3]]).unwrap();
        assert!(relative_homology(&a, &b).is_err());
    }

    #[test]
    fn torsion_survives_reduction() {
        // one 0-cell, one 1-cell, one 2-cell attached with degree 2
        let cc = ChainComplex::new(vec![0, 1, 2], vec![vec![], vec![], vec![(1, 2)]]).unwrap();
        let h = cc.homology(2);
        assert_eq!(h.betti, vec![1, 0, 0]);
        assert_eq!(h.torsion[1], vec![BigInt::from(2)]);
    }
}
