//! Morse decompositions with Conley indices, and their continuation over a
//! parameter sweep.

use serde::{Deserialize, Serialize};

use super::equations::{morse_equations, MorseEquationReport, PoincarePolynomial};
use super::graph::{compute_morse_graph, MorseGraph, MorseGraphSummary};
use super::hausdorff::cube_set_distance;
use rayon::prelude::*;

use crate::cubical::{build_reachable_graph, build_transition_graph, CubeSet, EngineConfig, Grid, TransitionGraph, DEFAULT_BUDGET};
use crate::equilibria::find_equilibria;
use crate::error::{contract, Result};
use crate::flow::{trapping_box, LorenzParams, Model};
use crate::homology::{betti_of_cubeset, node_indices};

#[derive(Clone, Debug)]
pub struct MorseDecomposition {
    pub graph: MorseGraph,
    /// Index polynomial per node; `None` when no index pair could be built.
    pub indices: Vec<Option<PoincarePolynomial>>,
    pub index_errors: Vec<(usize, String)>,
    /// Recurrent components before pruning.
    pub raw_nodes: usize,
    /// Nodes dropped for having trivial index.
    pub pruned: usize,
}

/// Morse decomposition of a transition graph.
///
/// With `prune_trivial`, recurrent components whose Conley index vanishes are
/// dropped from the order and their cubes count as transient. At flow times
/// short against the cube size every cube whose image overlaps itself has a
/// self-loop, so slow regions produce many such components that carry no
/// index. Reachability through dropped nodes is kept.
pub fn morse_decomposition(tg: &TransitionGraph, marks: &[(String, Vec<f64>)], prune_trivial: bool) -> MorseDecomposition {
    let raw = compute_morse_graph(tg, marks);
    let raw_nodes = raw.len();
    let results = node_indices(&raw, tg);
    let mut keep = Vec::new();
    let mut indices = Vec::new();
    let mut index_errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(p) if prune_trivial && p.is_zero() => continue,
            Ok(p) => indices.push(Some(p)),
            Err(e) => {
                index_errors.push((keep.len(), e.to_string()));
                indices.push(None);
            }
        }
        keep.push(i);
    }
    let pruned = raw_nodes - keep.len();
    let graph = raw.restrict(&keep).expect("kept nodes exist");
    MorseDecomposition { graph, indices, index_errors, raw_nodes, pruned }
}

impl MorseDecomposition {
    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    /// Morse equation against a global index of `1`, the index of an
    /// attracting neighborhood such as a trapping region.
    pub fn equation(&self) -> Result<MorseEquationReport> {
        let polys: Option<Vec<PoincarePolynomial>> = self.indices.iter().cloned().collect();
        let polys = polys.ok_or_else(|| contract("some node has no index"))?;
        Ok(morse_equations(&polys, &PoincarePolynomial::new(vec![1])))
    }

    pub fn summary(&self) -> DecompositionSummary {
        DecompositionSummary {
            graph: self.graph.summary(),
            indices: self.indices.iter().map(|p| p.as_ref().map(|p| p.to_string())).collect(),
            raw_nodes: self.raw_nodes,
            pruned: self.pruned,
        }
    }

    /// DOT with index polynomials in the labels.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph morse {\n");
        for (i, n) in self.graph.nodes.iter().enumerate() {
            let idx = self.indices[i].as_ref().map_or("?".to_string(), |p| p.to_string());
            s.push_str(&format!("  n{i} [label=\"{} ({} cubes) CH={}\"];\n", n.name(i), n.cubes.len(), idx));
        }
        for &(a, b) in &self.graph.edges {
            s.push_str(&format!("  n{a} -> n{b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub graph: MorseGraphSummary,
    pub indices: Vec<Option<String>>,
    pub raw_nodes: usize,
    pub pruned: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeMatch {
    pub from: usize,
    pub to: Option<usize>,
    pub overlap: usize,
    pub hausdorff: Option<f64>,
    pub ambiguous: bool,
}

#[derive(Clone, Debug)]
pub struct ContinuationTrack {
    pub r_values: Vec<f64>,
    pub grid: Grid,
    pub decompositions: Vec<MorseDecomposition>,
    /// Matches from the nodes at `r_values[i]` to those at `r_values[i + 1]`.
    pub matches: Vec<Vec<NodeMatch>>,
}

/// Matches each node of `a` to the node of `b` with the largest cube
/// overlap, breaking ties by the smaller Hausdorff distance between cube
/// centers. A tie in both leaves the node unmatched and flagged.
pub fn match_nodes(grid: &Grid, a: &MorseGraph, b: &MorseGraph) -> Result<Vec<NodeMatch>> {
    let mut out = Vec::with_capacity(a.len());
    for (i, na) in a.nodes.iter().enumerate() {
        let mut cands: Vec<(usize, usize, f64)> = Vec::new();
        for (j, nb) in b.nodes.iter().enumerate() {
            let ov = na.cubes.overlap(&nb.cubes);
            cands.push((j, ov, cube_set_distance(grid, &na.cubes, &nb.cubes)?));
        }
        let best = cands.iter().copied().max_by(|x, y| x.1.cmp(&y.1).then(y.2.total_cmp(&x.2)));
        let m = match best {
            None => NodeMatch { from: i, to: None, overlap: 0, hausdorff: None, ambiguous: false },
            Some((j, ov, d)) => {
                let tied = cands.iter().filter(|c| c.1 == ov && c.2 == d).count() > 1;
                if tied {
                    NodeMatch { from: i, to: None, overlap: ov, hausdorff: Some(d), ambiguous: true }
                } else {
                    NodeMatch { from: i, to: Some(j), overlap: ov, hausdorff: Some(d), ambiguous: false }
                }
            }
        };
        out.push(m);
    }
    Ok(out)
}

/// Morse decompositions of a one-parameter family on a common grid, with
/// node correspondences between neighbouring parameter values.
pub fn track_continuation<F>(family: F, r_values: &[f64], grid: &Grid, cfg: &EngineConfig, marks: impl Fn(f64) -> Vec<(String, Vec<f64>)>) -> Result<ContinuationTrack>
where
    F: Fn(f64) -> Model,
{
    if r_values.is_empty() || r_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(contract("parameter values must be non-empty and increasing"));
    }
    let mut decompositions = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let tg = build_transition_graph(grid, &family(r), cfg)?;
        decompositions.push(morse_decomposition(&tg, &marks(r), true));
    }
    let matches = decompositions.windows(2).map(|w| match_nodes(grid, &w[0].graph, &w[1].graph)).collect::<Result<Vec<_>>>()?;
    Ok(ContinuationTrack { r_values: r_values.to_vec(), grid: grid.clone(), decompositions, matches })
}

/// Label of the node holding the origin.
pub const ORIGIN_LABEL: &str = "Origin";

/// Equilibria of the Lorenz flow as node labels.
pub fn lorenz_marks(p: &LorenzParams) -> Result<Vec<(String, Vec<f64>)>> {
    Ok(find_equilibria(p)?.into_iter().map(|e| (format!("{:?}", e.label), e.state)).collect())
}

#[derive(Clone, Debug)]
pub struct LorenzMorse {
    pub params: LorenzParams,
    pub graph: TransitionGraph,
    pub decomposition: MorseDecomposition,
    /// Graph restricted to the forward closure of the equilibrium cubes.
    pub reachable: bool,
}

/// Morse decomposition of the Lorenz flow on its trapping box.
///
/// With `reachable`, only cubes reachable from the cubes holding equilibria
/// get images. Every recurrent set met by the closure is found as in the
/// full graph; recurrent sets outside it are missed.
pub fn lorenz_morse(p: &LorenzParams, depths: &[u32], cfg: &EngineConfig, budget: u64, reachable: bool) -> Result<LorenzMorse> {
    let model = Model::Lorenz(*p);
    let grid = Grid::new(trapping_box(&model)?, depths, budget)?;
    let marks = lorenz_marks(p)?;
    let graph = if reachable {
        let seeds = CubeSet::from_unsorted(marks.iter().filter_map(|m| grid.cube_of_point(&m.1)).collect());
        build_reachable_graph(&grid, &model, cfg, &seeds)?
    } else {
        build_transition_graph(&grid, &model, cfg)?
    };
    let decomposition = morse_decomposition(&graph, &marks, true);
    Ok(LorenzMorse { params: *p, graph, decomposition, reachable })
}

impl LorenzMorse {
    /// Index of the node holding the origin.
    pub fn origin_node(&self) -> Option<usize> {
        self.decomposition.graph.node_by_label(ORIGIN_LABEL)
    }

    /// Cubes of the origin's node, when that node holds no other equilibrium.
    pub fn strange_node_cubes(&self) -> Option<&CubeSet> {
        let n = &self.decomposition.graph.nodes[self.origin_node()?];
        (n.labels.len() == 1).then_some(&n.cubes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub r: f64,
    pub nodes: usize,
    pub strange_cubes: Option<usize>,
    /// Hausdorff distance to the strange node at the reference parameter.
    pub hausdorff: Option<f64>,
}

/// Hausdorff distance between the strange node at each `r` and the one at
/// `r_ref`, all on the grid of the trapping box at `r_ref`. Each transition
/// graph is handed to `on_graph` before it is dropped.
pub fn strange_node_sweep(
    r_ref: f64,
    r_values: &[f64],
    depths: &[u32],
    cfg: &EngineConfig,
    budget: u64,
    mut on_graph: impl FnMut(f64, &TransitionGraph),
) -> Result<Vec<SweepPoint>> {
    let reference = lorenz_morse(&LorenzParams::classical(r_ref), depths, cfg, budget, true)?;
    on_graph(r_ref, &reference.graph);
    let grid = reference.graph.grid.clone();
    let ref_cubes = reference.strange_node_cubes().ok_or_else(|| contract(format!("no strange node at r = {r_ref}")))?.clone();
    drop(reference);
    let mut out = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let p = LorenzParams::classical(r);
        let model = Model::Lorenz(p);
        let marks = lorenz_marks(&p)?;
        let seeds = CubeSet::from_unsorted(marks.iter().filter_map(|m| grid.cube_of_point(&m.1)).collect());
        let tg = build_reachable_graph(&grid, &model, cfg, &seeds)?;
        let d = morse_decomposition(&tg, &marks, true);
        on_graph(r, &tg);
        drop(tg);
        let strange = d.graph.node_by_label(ORIGIN_LABEL).map(|i| &d.graph.nodes[i]).filter(|n| n.labels.len() == 1);
        let hausdorff = strange.map(|n| cube_set_distance(&grid, &n.cubes, &ref_cubes)).transpose()?;
        out.push(SweepPoint { r, nodes: d.len(), strange_cubes: strange.map(|n| n.cubes.len()), hausdorff });
    }
    Ok(out)
}

/// Diameter of a union of grid cubes.
pub fn cube_set_diameter(grid: &Grid, cubes: &CubeSet) -> f64 {
    let centers: Vec<Vec<f64>> = cubes.iter().map(|c| grid.center(c)).collect();
    let w = grid.widths();
    centers
        .par_iter()
        .map(|a| {
            centers
                .iter()
                .map(|b| a.iter().zip(b).zip(w).map(|((x, y), w)| ((x - y).abs() + w).powi(2)).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PitchforkDemo {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub depth: u32,
    pub decomposition: DecompositionSummary,
    /// Union of the minimal nodes' cubes.
    pub attractor_cubes: usize,
    pub attractor_betti: Vec<u64>,
    pub attractor_diameter: f64,
    pub equation: MorseEquationReport,
}

/// Engine settings matched to the normal form's time scale: under
/// `x = sqrt(lambda) u`, `t = s / lambda` the unstable block no longer depends
/// on `lambda`, so the flow time is `1 / lambda`. The step is capped by the
/// unit rate of the stable block.
pub fn pitchfork_engine_config(lambda: f64) -> EngineConfig {
    EngineConfig { tau: 1.0 / lambda, rk4_step: (0.05 / lambda).min(0.5), ..EngineConfig::default() }
}

/// Morse decomposition of the radial normal form on its trapping box, with
/// the homology and diameter of the combinatorial attractor. The transition
/// graph is handed to `on_graph` before it is dropped.
pub fn pitchfork_demo(n: usize, k: usize, lambda: f64, depth: u32, cfg: &EngineConfig, on_graph: impl FnOnce(&TransitionGraph)) -> Result<PitchforkDemo> {
    let model = Model::normal_form(n, k, lambda)?;
    let grid = Grid::new(trapping_box(&model)?, &vec![depth; n], DEFAULT_BUDGET)?;
    let tg = build_transition_graph(&grid, &model, cfg)?;
    on_graph(&tg);
    let d = morse_decomposition(&tg, &[("origin".into(), vec![0.0; n])], true);
    let attractor = d.graph.minimal_nodes().iter().fold(CubeSet::new(), |acc, &i| acc.union(&d.graph.nodes[i].cubes));
    let betti = betti_of_cubeset(&attractor, &grid)?.betti;
    Ok(PitchforkDemo {
        n,
        k,
        lambda,
        depth,
        decomposition: d.summary(),
        attractor_cubes: attractor.len(),
        attractor_betti: betti,
        attractor_diameter: cube_set_diameter(&grid, &attractor),
        equation: d.equation()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::DEFAULT_BUDGET;
    use crate::flow::TrappingBox;

    fn sink() -> TransitionGraph {
        let g = Grid::new(TrappingBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap(), &[3, 3, 3], DEFAULT_BUDGET).unwrap();
        build_transition_graph(&g, &Model::LinearSink { dim: 3 }, &EngineConfig::default()).unwrap()
    }

    #[test]
    fn linear_sink_prunes_to_the_origin() {
        let tg = sink();
        let d = morse_decomposition(&tg, &[("O".into(), vec![0.0; 3])], true);
        assert!(d.raw_nodes > 1);
        assert_eq!(d.len(), 1);
        assert!(d.graph.edges.is_empty());
        assert_eq!(d.graph.nodes[0].labels, vec!["O".to_string()]);
        assert_eq!(d.indices[0].as_ref().unwrap().betti(), &[1]);
        assert!(d.equation().unwrap().valid);
    }

    #[test]
    fn unpruned_keeps_every_component() {
        let tg = sink();
        let d = morse_decomposition(&tg, &[], false);
        assert_eq!(d.len(), d.raw_nodes);
        assert_eq!(d.pruned, 0);
    }

    #[test]
    fn single_value_track_has_no_matches() {
        let g = Grid::new(TrappingBox::new(vec![-1.0; 2], vec![1.0; 2]).unwrap(), &[4, 4], DEFAULT_BUDGET).unwrap();
        let fam = |l: f64| Model::normal_form(2, 1, l).unwrap();
        let t = track_continuation(fam, &[0.25], &g, &EngineConfig::with_tau(1.0), |_| Vec::new()).unwrap();
        assert_eq!(t.decompositions.len(), 1);
        assert!(t.matches.is_empty());
        assert!(track_continuation(fam, &[0.3, 0.2], &g, &EngineConfig::default(), |_| Vec::new()).is_err());
    }
}
