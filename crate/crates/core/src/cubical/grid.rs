//! Uniform dyadic grids of boxes and sorted sets of cube indices.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::flow::TrappingBox;

pub type CubeId = u32;

/// Default cap on the number of cubes in a grid.
pub const DEFAULT_BUDGET: u64 = 1 << 21;

/// Largest supported grid dimension.
pub const MAX_GRID_DIM: usize = 4;

/// `2^depth[i]` equal slabs along axis `i` of a box. Cube ids run with the
/// first axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub bounds: TrappingBox,
    pub depths: Vec<u32>,
    counts: Vec<u32>,
    widths: Vec<f64>,
}

impl Grid {
    pub fn new(bounds: TrappingBox, depths: &[u32], budget: u64) -> Result<Self> {
        let d = bounds.dim();
        if depths.len() != d || d == 0 || d > MAX_GRID_DIM {
            return Err(contract("one depth per axis, at most four axes"));
        }
        if bounds.lo.iter().zip(&bounds.hi).any(|(l, h)| !(h > l) || !l.is_finite() || !h.is_finite()) {
            return Err(contract("grid box must have positive finite widths"));
        }
        let total_depth: u32 = depths.iter().sum();
        if depths.iter().any(|&k| k > 15) || total_depth > 31 {
            return Err(Error::BudgetExceeded { cubes: 1u64 << total_depth.min(63), budget });
        }
        let cubes = 1u64 << total_depth;
        if cubes > budget {
            return Err(Error::BudgetExceeded { cubes, budget });
        }
        let counts: Vec<u32> = depths.iter().map(|&k| 1u32 << k).collect();
        let widths = (0..d).map(|i| (bounds.hi[i] - bounds.lo[i]) / f64::from(counts[i])).collect();
        Ok(Self { bounds, depths: depths.to_vec(), counts, widths })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// Length of a cube diagonal.
    pub fn cube_diameter(&self) -> f64 {
        self.widths.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn multi_index(&self, id: CubeId) -> Vec<u32> {
        let mut rest = id;
        self.counts
            .iter()
            .map(|&c| {
                let i = rest % c;
                rest /= c;
                i
            })
            .collect()
    }

    pub fn id_of(&self, idx: &[u32]) -> CubeId {
        idx.iter().zip(&self.counts).rev().fold(0, |acc, (&i, &c)| acc * c + i)
    }

    /// Cube containing `p`; the upper face of the grid belongs to the last cube.
    pub fn cube_of_point(&self, p: &[f64]) -> Option<CubeId> {
        let mut idx = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            if !(p[i] >= self.bounds.lo[i] && p[i] <= self.bounds.hi[i]) {
                return None;
            }
            let k = ((p[i] - self.bounds.lo[i]) / self.widths[i]).floor() as u32;
            idx.push(k.min(self.counts[i] - 1));
        }
        Some(self.id_of(&idx))
    }

    pub fn cube_bounds(&self, id: CubeId) -> (Vec<f64>, Vec<f64>) {
        let idx = self.multi_index(id);
        let lo: Vec<f64> = (0..self.dim()).map(|i| self.bounds.lo[i] + f64::from(idx[i]) * self.widths[i]).collect();
        let hi = (0..self.dim()).map(|i| lo[i] + self.widths[i]).collect();
        (lo, hi)
    }

    pub fn center(&self, id: CubeId) -> Vec<f64> {
        let idx = self.multi_index(id);
        (0..self.dim()).map(|i| self.bounds.lo[i] + (f64::from(idx[i]) + 0.5) * self.widths[i]).collect()
    }

    /// Cubes meeting the closed box `[lo, hi]`, and whether the box sticks
    /// out of the grid.
    pub fn cubes_meeting(&self, lo: &[f64], hi: &[f64]) -> (Vec<CubeId>, bool) {
        let d = self.dim();
        let mut escapes = false;
        let mut ranges = Vec::with_capacity(d);
        for i in 0..d {
            if lo[i] < self.bounds.lo[i] || hi[i] > self.bounds.hi[i] {
                escapes = true;
            }
            let a = ((lo[i] - self.bounds.lo[i]) / self.widths[i]).floor();
            let b = ((hi[i] - self.bounds.lo[i]) / self.widths[i]).floor();
            let top = f64::from(self.counts[i] - 1);
            if b < 0.0 || a > top {
                return (Vec::new(), true);
            }
            ranges.push((a.max(0.0) as u32, b.min(top) as u32));
        }
        let mut out = Vec::new();
        let mut idx: Vec<u32> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            out.push(self.id_of(&idx));
            for i in 0..d {
                if idx[i] < ranges[i].1 {
                    idx[i] += 1;
                    continue 'outer;
                }
                idx[i] = ranges[i].0;
            }
            break;
        }
        out.sort_unstable();
        (out, escapes)
    }

    /// The cube itself and all cubes sharing at least a vertex with it.
    pub fn neighborhood(&self, id: CubeId) -> Vec<CubeId> {
        let c = self.center(id);
        let lo: Vec<f64> = (0..self.dim()).map(|i| c[i] - self.widths[i]).collect();
        let hi: Vec<f64> = (0..self.dim()).map(|i| c[i] + self.widths[i]).collect();
        self.cubes_meeting(&lo, &hi).0
    }
}

/// Sorted, duplicate-free set of cube ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CubeSet(Vec<CubeId>);

impl CubeSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn from_unsorted(mut v: Vec<CubeId>) -> Self {
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Wraps an already sorted, duplicate-free vector.
    pub fn from_sorted(v: Vec<CubeId>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: CubeId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = CubeId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[CubeId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<CubeId> {
        self.0
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            v.push(a.min(b));
            if a <= b {
                i += 1;
            }
            if b <= a {
                j += 1;
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&other.0[j..]);
        Self(v)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self(self.0.iter().copied().filter(|&c| other.contains(c)).collect())
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self(self.0.iter().copied().filter(|&c| !other.contains(c)).collect())
    }

    pub fn overlap(&self, other: &Self) -> usize {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().filter(|&c| big.contains(c)).count()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.len() <= other.len() && self.iter().all(|c| other.contains(c))
    }
}

impl FromIterator<CubeId> for CubeSet {
    fn from_iter<I: IntoIterator<Item = CubeId>>(iter: I) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}
