//! Outer approximations of the time-tau map and the transition graph they span.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{CubeId, CubeSet, Grid};
use crate::error::{contract, Error, Result};
use crate::flow::integrate::{rk4_flow, rk4_flow3};
use crate::flow::{Model, TrappingBox, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    /// Flow time of the sampled map.
    pub tau: f64,
    /// Fixed RK4 step used to push samples forward.
    pub rk4_step: f64,
    /// The image bounding box is scaled about its center so that each side
    /// is `bloat_factor` times the spread of the image samples along that axis.
    pub bloat_factor: f64,
    /// Lower bound on each inflated side, in cube widths.
    pub bloat_floor: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { tau: 0.2, rk4_step: 0.01, bloat_factor: 1.5, bloat_floor: 1.0 }
    }
}

impl EngineConfig {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(contract("tau must be positive"));
        }
        if !(self.rk4_step > 0.0) || !(self.bloat_factor >= 1.0) || !(self.bloat_floor >= 0.0) {
            return Err(contract("need rk4_step > 0, bloat_factor >= 1, bloat_floor >= 0"));
        }
        Ok(())
    }
}

/// Successors of one cube under the outer map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Successors {
    pub cubes: CubeSet,
    /// Part of the inflated image lies outside the grid.
    pub escapes: bool,
}

/// Corners, center and face centers of a box, in that order.
pub fn sample_points(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let d = lo.len();
    let mut pts = Vec::with_capacity((1 << d) + 1 + 2 * d);
    for mask in 0..1usize << d {
        pts.push((0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect());
    }
    let mid: Vec<f64> = (0..d).map(|i| 0.5 * (lo[i] + hi[i])).collect();
    pts.push(mid.clone());
    for i in 0..d {
        for v in [lo[i], hi[i]] {
            let mut p = mid.clone();
            p[i] = v;
            pts.push(p);
        }
    }
    pts
}

fn flow_sample(model: &Model, p: &[f64], cfg: &EngineConfig) -> Option<Vec<f64>> {
    if p.len() == 3 {
        rk4_flow3(model, [p[0], p[1], p[2]], cfg.tau, cfg.rk4_step).map(|a| a.to_vec())
    } else {
        rk4_flow(model, p, cfg.tau, cfg.rk4_step)
    }
}

/// Combinatorial outer approximation of the time-tau map on one cube.
///
/// Samples are pushed forward, their bounding box is inflated and every cube
/// meeting the inflated box is a successor. Samples whose images are not
/// finite, and inflated boxes leaving the grid, count as escaping.
pub fn outer_map(grid: &Grid, model: &Model, cube: CubeId, cfg: &EngineConfig) -> Successors {
    let d = grid.dim();
    let (lo, hi) = grid.cube_bounds(cube);
    let mut blo = vec![f64::INFINITY; d];
    let mut bhi = vec![f64::NEG_INFINITY; d];
    let mut finite = 0;
    let mut lost = false;
    let samples = sample_points(&lo, &hi);
    let total = samples.len();
    for p in &samples {
        match flow_sample(model, p, cfg) {
            Some(q) => {
                finite += 1;
                for i in 0..d {
                    blo[i] = blo[i].min(q[i]);
                    bhi[i] = bhi[i].max(q[i]);
                }
            }
            None => lost = true,
        }
    }
    if lost {
        log::debug!("cube {cube}: {} of {} samples diverged", total - finite, total);
    }
    if finite == 0 {
        return Successors { cubes: CubeSet::new(), escapes: true };
    }
    let w = grid.widths();
    for i in 0..d {
        let spread = bhi[i] - blo[i];
        let side = (cfg.bloat_factor * spread).max(cfg.bloat_floor * w[i]);
        let c = 0.5 * (blo[i] + bhi[i]);
        blo[i] = c - 0.5 * side;
        bhi[i] = c + 0.5 * side;
    }
    let (cubes, escapes) = grid.cubes_meeting(&blo, &bhi);
    Successors { cubes: CubeSet::from_sorted(cubes), escapes: escapes || lost }
}

/// Directed graph on the cubes of a grid plus one extra node, `out_node`,
/// standing for everything outside the grid. Stored in compressed rows.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionGraph {
    pub grid: Grid,
    pub config: EngineConfig,
    offsets: Vec<u64>,
    targets: Vec<u32>,
}

impl TransitionGraph {
    pub fn out_node(&self) -> u32 {
        self.grid.len() as u32
    }

    /// Number of cube nodes (the out node excluded).
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Successors of a cube, sorted; the out node, if present, comes last.
    pub fn successors(&self, cube: CubeId) -> &[u32] {
        let i = cube as usize;
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn escapes(&self, cube: CubeId) -> bool {
        self.successors(cube).last() == Some(&self.out_node())
    }

    /// False for cubes a reachable build never visited.
    pub fn is_explored(&self, cube: CubeId) -> bool {
        !self.successors(cube).is_empty()
    }

    /// True when every sample of the cube left the grid.
    pub fn is_pruned(&self, cube: CubeId) -> bool {
        self.successors(cube) == [self.out_node()]
    }

    /// Graph with all cube-to-cube edges reversed; out-node edges are dropped.
    pub fn transpose(&self) -> Adjacency {
        let n = self.len();
        let out = self.out_node();
        let mut counts = vec![0u64; n + 1];
        for &t in &self.targets {
            if t != out {
                counts[t as usize + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut targets = vec![0u32; counts[n] as usize];
        for s in 0..n {
            for &t in self.successors(s as u32) {
                if t != out {
                    targets[fill[t as usize] as usize] = s as u32;
                    fill[t as usize] += 1;
                }
            }
        }
        Adjacency { offsets: counts, targets }
    }

    /// Cubes reachable from `seeds` along edges (seeds included).
    pub fn forward_closure(&self, seeds: &CubeSet) -> CubeSet {
        let out = self.out_node();
        closure(self.len(), seeds, |c| self.successors(c).iter().copied().filter(move |&t| t != out))
    }

    pub fn binary_dump(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(64 + 8 * self.offsets.len() + 4 * self.targets.len());
        self.write_binary(&mut b).expect("writing to a Vec cannot fail");
        b
    }

    /// Streams the binary dump; the edge list is written in blocks.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut head = Vec::with_capacity(128);
        head.extend_from_slice(MAGIC);
        head.extend_from_slice(&1u32.to_le_bytes());
        head.extend_from_slice(&(self.grid.dim() as u32).to_le_bytes());
        for &k in &self.grid.depths {
            head.extend_from_slice(&k.to_le_bytes());
        }
        for v in self.grid.bounds.lo.iter().chain(&self.grid.bounds.hi) {
            head.extend_from_slice(&v.to_le_bytes());
        }
        for v in [self.config.tau, self.config.rk4_step, self.config.bloat_factor, self.config.bloat_floor] {
            head.extend_from_slice(&v.to_le_bytes());
        }
        head.extend_from_slice(&(self.len() as u64).to_le_bytes());
        head.extend_from_slice(&(self.targets.len() as u64).to_le_bytes());
        w.write_all(&head)?;
        let mut buf = Vec::with_capacity(1 << 16);
        for chunk in self.offsets.chunks(8192) {
            buf.clear();
            chunk.iter().for_each(|o| buf.extend_from_slice(&o.to_le_bytes()));
            w.write_all(&buf)?;
        }
        for chunk in self.targets.chunks(16384) {
            buf.clear();
            chunk.iter().for_each(|t| buf.extend_from_slice(&t.to_le_bytes()));
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(8)? != MAGIC || cur.u32()? != 1 {
            return Err(Error::Numerical("not a transition graph dump".into()));
        }
        let d = cur.u32()? as usize;
        if d == 0 || d > super::grid::MAX_GRID_DIM {
            return Err(Error::Numerical("bad dimension in graph dump".into()));
        }
        let depths = (0..d).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        let lo = (0..d).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        let hi = (0..d).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        let config = EngineConfig {
            tau: cur.f64()?,
            rk4_step: cur.f64()?,
            bloat_factor: cur.f64()?,
            bloat_floor: cur.f64()?,
        };
        let grid = Grid::new(TrappingBox::new(lo, hi)?, &depths, u64::MAX)?;
        let n = cur.u64()? as usize;
        let nnz = cur.u64()? as usize;
        if n != grid.len() {
            return Err(Error::Numerical("cube count does not match grid".into()));
        }
        let offsets = (0..=n).map(|_| cur.u64()).collect::<Result<Vec<_>>>()?;
        let targets = (0..nnz).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
        if offsets.last() != Some(&(nnz as u64)) || offsets.windows(2).any(|w| w[0] > w[1]) || targets.iter().any(|&t| t as usize > n) {
            return Err(Error::Numerical("inconsistent graph dump".into()));
        }
        Ok(Self { grid, config, offsets, targets })
    }

    /// One `source target` pair per line; the out node is written as `out`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let out = self.out_node();
        writeln!(w, "# cubes {} edges {}", self.len(), self.edge_count())?;
        for s in 0..self.len() as u32 {
            for &t in self.successors(s) {
                if t == out {
                    writeln!(w, "{s} out")?;
                } else {
                    writeln!(w, "{s} {t}")?;
                }
            }
        }
        Ok(())
    }
}

const MAGIC: &[u8; 8] = b"CUBGRAPH";

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n).ok_or_else(|| Error::Numerical("truncated graph dump".into()))?;
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Plain compressed adjacency lists.
#[derive(Clone, Debug)]
pub struct Adjacency {
    offsets: Vec<u64>,
    targets: Vec<u32>,
}

impl Adjacency {
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let i = v as usize;
        &self.targets[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn closure(&self, seeds: &CubeSet) -> CubeSet {
        closure(self.len(), seeds, |c| self.neighbors(c).iter().copied())
    }
}

fn closure<'a, I>(n: usize, seeds: &CubeSet, next: impl Fn(u32) -> I) -> CubeSet
where
    I: Iterator<Item = u32> + 'a,
{
    let mut seen = vec![false; n];
    let mut stack: Vec<u32> = seeds.iter().collect();
    for &s in &stack {
        seen[s as usize] = true;
    }
    while let Some(c) = stack.pop() {
        for t in next(c) {
            if !seen[t as usize] {
                seen[t as usize] = true;
                stack.push(t);
            }
        }
    }
    CubeSet::from_sorted((0..n as u32).filter(|&c| seen[c as usize]).collect())
}

const CHUNK: usize = 4096;

/// Builds the transition graph of `model` on `grid`. Cubes are processed in
/// parallel chunks and stitched together in id order, so the result does not
/// depend on the thread count.
pub fn build_transition_graph(grid: &Grid, model: &Model, cfg: &EngineConfig) -> Result<TransitionGraph> {
    cfg.validate()?;
    model.validate()?;
    if model.dim() != grid.dim() {
        return Err(contract("model and grid dimensions differ"));
    }
    let n = grid.len();
    let out = n as u32;
    let chunks: Vec<(Vec<u32>, Vec<u32>)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|k| {
            let mut lens = Vec::with_capacity(CHUNK);
            let mut tg = Vec::new();
            for c in k * CHUNK..((k + 1) * CHUNK).min(n) {
                let s = outer_map(grid, model, c as u32, cfg);
                let before = tg.len();
                tg.extend(s.cubes.iter());
                if s.escapes {
                    tg.push(out);
                }
                lens.push((tg.len() - before) as u32);
            }
            (lens, tg)
        })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0u64);
    let total: usize = chunks.iter().map(|c| c.1.len()).sum();
    let mut targets = Vec::with_capacity(total);
    for (lens, tg) in chunks {
        for l in lens {
            let last = *offsets.last().unwrap();
            offsets.push(last + u64::from(l));
        }
        targets.extend(tg);
    }
    Ok(TransitionGraph { grid: grid.clone(), config: *cfg, offsets, targets })
}

/// Transition graph explored from `seeds`: only cubes in the forward
/// closure of the seeds get their outer image computed, all other rows stay
/// empty. Recurrent sets reachable from the seeds are the same as in the full
/// graph, at a cost proportional to the explored region.
pub fn build_reachable_graph(grid: &Grid, model: &Model, cfg: &EngineConfig, seeds: &CubeSet) -> Result<TransitionGraph> {
    cfg.validate()?;
    model.validate()?;
    if model.dim() != grid.dim() {
        return Err(contract("model and grid dimensions differ"));
    }
    let n = grid.len();
    let out = n as u32;
    if seeds.iter().any(|c| c as usize >= n) {
        return Err(contract("seed cube outside the grid"));
    }
    // slot of each explored cube in `rows`
    const UNSEEN: u32 = u32::MAX;
    let mut slot = vec![UNSEEN; n];
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut frontier: Vec<u32> = seeds.iter().collect();
    while !frontier.is_empty() {
        let images: Vec<Vec<u32>> = frontier
            .par_iter()
            .map(|&c| {
                let s = outer_map(grid, model, c, cfg);
                let mut row = s.cubes.into_vec();
                if s.escapes {
                    row.push(out);
                }
                row
            })
            .collect();
        let mut next = Vec::new();
        for (&c, row) in frontier.iter().zip(images) {
            for &t in &row {
                if t != out && slot[t as usize] == UNSEEN {
                    next.push(t);
                }
            }
            slot[c as usize] = rows.len() as u32;
            rows.push(row);
        }
        next.sort_unstable();
        next.dedup();
        next.retain(|&t| slot[t as usize] == UNSEEN);
        frontier = next;
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0u64);
    let mut targets = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    for &k in &slot {
        if k != UNSEEN {
            targets.extend_from_slice(&rows[k as usize]);
        }
        offsets.push(targets.len() as u64);
    }
    Ok(TransitionGraph { grid: grid.clone(), config: *cfg, offsets, targets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::grid::DEFAULT_BUDGET;

    fn unit_grid(d: usize, depth: u32) -> Grid {
        Grid::new(TrappingBox::new(vec![-1.0; d], vec![1.0; d]).unwrap(), &vec![depth; d], DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn zero_field_maps_to_neighborhood() {
        let g = unit_grid(3, 3);
        let m = Model::Zero { dim: 3 };
        let cfg = EngineConfig::default();
        for id in [0, 73, 200, 511] {
            let s = outer_map(&g, &m, id, &cfg);
            assert_eq!(s.cubes.as_slice(), g.neighborhood(id).as_slice());
            assert!(s.cubes.contains(id));
        }
    }

    #[test]
    fn sample_pattern_size() {
        assert_eq!(sample_points(&[0.0; 3], &[1.0; 3]).len(), 15);
        assert_eq!(sample_points(&[0.0; 2], &[1.0; 2]).len(), 9);
    }

    #[test]
    fn sink_graph_has_no_escapes_inside() {
        let g = unit_grid(3, 3);
        let tg = build_transition_graph(&g, &Model::LinearSink { dim: 3 }, &EngineConfig::default()).unwrap();
        assert_eq!(tg.len(), 512);
        for c in 0..512 {
            assert!(!tg.successors(c).is_empty());
        }
        let center = g.cube_of_point(&[0.01, 0.01, 0.01]).unwrap();
        assert!(tg.successors(center).contains(&center));
    }

    #[test]
    fn binary_dump_round_trip() {
        let g = unit_grid(2, 3);
        let tg = build_transition_graph(&g, &Model::LinearSink { dim: 2 }, &EngineConfig::default()).unwrap();
        let bytes = tg.binary_dump();
        let back = TransitionGraph::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back, tg);
        assert!(TransitionGraph::read_binary(&bytes[..bytes.len() - 3]).is_err());
    }
}
