//! Cubical complexes built from elementary cubes.
//!
//! An elementary cell is stored in doubled coordinates: an even entry `2i` is
//! the degenerate interval `[i, i]`, an odd entry `2i + 1` is `[i, i + 1]`.
//! The cell dimension is the number of odd entries. Coordinates are packed
//! sixteen bits each into a `u64` key, so the ambient dimension is at most 4.

use std::fmt::Write as _;

use crate::error::{contract, Result};

pub const MAX_AMBIENT_DIM: usize = 4;
const BITS: u32 = 16;
const MASK: u64 = (1 << BITS) - 1;

pub type CellKey = u64;

pub fn pack(coords: &[u32]) -> CellKey {
    coords.iter().enumerate().fold(0, |k, (i, &c)| k | (u64::from(c) << (BITS * i as u32)))
}

pub fn unpack(key: CellKey, ambient: usize) -> Vec<u32> {
    (0..ambient).map(|i| ((key >> (BITS * i as u32)) & MASK) as u32).collect()
}

pub fn cell_dim(key: CellKey, ambient: usize) -> usize {
    (0..ambient).filter(|&i| (key >> (BITS * i as u32)) & 1 == 1).count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicalComplex {
    ambient: usize,
    /// Sorted keys, indexed by cell dimension.
    cells: Vec<Vec<CellKey>>,
}

impl CubicalComplex {
    /// Closure of a set of elementary cells given in doubled coordinates.
    pub fn from_cells<I>(ambient: usize, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        check_ambient(ambient)?;
        let mut all = Vec::new();
        for c in cells {
            if c.len() != ambient || c.iter().any(|&v| u64::from(v) > MASK - 1) {
                return Err(contract("cell coordinates out of range"));
            }
            push_closure(&c, &mut all);
        }
        Ok(Self::from_keys(ambient, all))
    }

    /// Closure of the full-dimensional unit cubes with the given lower corners.
    pub fn from_cubes<I>(ambient: usize, corners: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        let cubes = corners.into_iter().map(|c| c.iter().map(|&i| 2 * i + 1).collect::<Vec<u32>>());
        Self::from_cells(ambient, cubes)
    }

    fn from_keys(ambient: usize, mut keys: Vec<CellKey>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        let mut cells = vec![Vec::new(); ambient + 1];
        for k in keys {
            cells[cell_dim(k, ambient)].push(k);
        }
        Self { ambient, cells }
    }

    pub fn empty(ambient: usize) -> Result<Self> {
        check_ambient(ambient)?;
        Ok(Self { ambient, cells: vec![Vec::new(); ambient + 1] })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Number of cells of dimension `k`.
    pub fn count(&self, k: usize) -> usize {
        self.cells.get(k).map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self, k: usize) -> &[CellKey] {
        self.cells.get(k).map_or(&[], |v| v.as_slice())
    }

    pub fn contains(&self, key: CellKey) -> bool {
        self.cells[cell_dim(key, self.ambient)].binary_search(&key).is_ok()
    }

    pub fn index_of(&self, key: CellKey) -> Option<usize> {
        self.cells[cell_dim(key, self.ambient)].binary_search(&key).ok()
    }

    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.cells.iter().flatten().all(|&k| other.contains(k))
    }

    /// Signed boundary of a cell: for the j-th nondegenerate factor the sign
    /// is `(-1)^j`, upper face positive and lower face negative.
    pub fn boundary(&self, key: CellKey) -> Vec<(CellKey, i64)> {
        boundary_of(key, self.ambient)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.cells.iter().enumerate().map(|(k, c)| if k % 2 == 0 { c.len() as i64 } else { -(c.len() as i64) }).sum()
    }

    /// Verifies that the boundary of every boundary vanishes.
    pub fn boundary_squared_is_zero(&self) -> bool {
        self.cells.iter().skip(2).flatten().all(|&k| {
            let mut acc: Vec<(CellKey, i64)> = Vec::new();
            for (f, s) in self.boundary(k) {
                for (g, t) in self.boundary(f) {
                    acc.push((g, s * t));
                }
            }
            acc.sort_unstable_by_key(|e| e.0);
            acc.chunk_by(|a, b| a.0 == b.0).all(|run| run.iter().map(|e| e.1).sum::<i64>() == 0)
        })
    }

    /// Text listing, one cell per line: dimension then doubled coordinates.
    pub fn to_text(&self) -> String {
        let mut s = format!("# cubical complex, ambient dimension {}\n", self.ambient);
        for (k, cells) in self.cells.iter().enumerate() {
            for &c in cells {
                let coords = unpack(c, self.ambient);
                let _ = write!(s, "{k}");
                for v in coords {
                    let _ = write!(s, " {v}");
                }
                s.push('\n');
            }
        }
        s
    }
}

fn check_ambient(ambient: usize) -> Result<()> {
    if ambient == 0 || ambient > MAX_AMBIENT_DIM {
        return Err(contract(format!("ambient dimension must be in 1..={MAX_AMBIENT_DIM}")));
    }
    Ok(())
}

pub(crate) fn boundary_of(key: CellKey, ambient: usize) -> Vec<(CellKey, i64)> {
    let mut out = Vec::with_capacity(2 * ambient);
    let mut sign = 1;
    for i in 0..ambient {
        let shift = BITS * i as u32;
        if (key >> shift) & 1 == 1 {
            let unit = 1u64 << shift;
            out.push((key + unit, sign));
            out.push((key - unit, -sign));
            sign = -sign;
        }
    }
    out
}

fn push_closure(coords: &[u32], out: &mut Vec<CellKey>) {
    // each odd coordinate contributes itself and its two endpoints
    let mut acc = vec![0u64];
    for (i, &c) in coords.iter().enumerate() {
        let shift = BITS * i as u32;
        let choices: &[u32] = if c % 2 == 1 { &[c - 1, c, c + 1] } else { &[c] };
        acc = acc.iter().flat_map(|&k| choices.iter().map(move |&v| k | (u64::from(v) << shift))).collect();
    }
    out.extend(acc);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let c = CubicalComplex::from_cubes(2, [vec![0, 0]]).unwrap();
        assert_eq!((c.count(0), c.count(1), c.count(2)), (4, 4, 1));
        assert_eq!(c.euler_characteristic(), 1);
        assert!(c.boundary_squared_is_zero());
    }

    #[test]
    fn interval_boundary_orientation() {
        let e = pack(&[1]);
        let b = boundary_of(e, 1);
        assert!(b.contains(&(pack(&[2]), 1)));
        assert!(b.contains(&(pack(&[0]), -1)));
    }

    #[test]
    fn cube_block_boundary_squared() {
        let corners = (0..3).flat_map(|i| (0..2).flat_map(move |j| (0..2).map(move |k| vec![i, j, k])));
        let c = CubicalComplex::from_cubes(3, corners).unwrap();
        assert!(c.boundary_squared_is_zero());
        assert_eq!(c.euler_characteristic(), 1);
    }

    #[test]
    fn subcomplex_and_round_trip() {
        let big = CubicalComplex::from_cubes(2, [vec![0, 0], vec![1, 0]]).unwrap();
        let small = CubicalComplex::from_cells(2, [vec![1, 0]]).unwrap();
        assert!(small.is_subcomplex_of(&big));
        assert!(!big.is_subcomplex_of(&small));
        let k = pack(&[3, 7, 11]);
        assert_eq!(unpack(k, 3), vec![3, 7, 11]);
        assert_eq!(cell_dim(k, 3), 3);
    }

    #[test]
    fn rejects_bad_ambient() {
        assert!(CubicalComplex::from_cubes(5, [vec![0; 5]]).is_err());
        assert!(CubicalComplex::from_cubes(2, [vec![0, 0, 0]]).is_err());
    }
}
