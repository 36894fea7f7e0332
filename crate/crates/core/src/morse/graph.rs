//! Morse decompositions from the strongly connected components of a
//! transition graph.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cubical::{CubeSet, TransitionGraph};
use crate::error::{contract, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseNode {
    pub cubes: CubeSet,
    /// Names of the marked points (usually equilibria) whose cube lies here.
    pub labels: Vec<String>,
}

impl MorseNode {
    pub fn name(&self, index: usize) -> String {
        if self.labels.is_empty() {
            format!("M{index}")
        } else {
            self.labels.join("+")
        }
    }
}

/// Recurrent components and the order induced by reachability.
///
/// Nodes are numbered so that every path between them runs from a lower to a
/// higher index; `edges` is the transitive reduction of the order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseGraph {
    pub nodes: Vec<MorseNode>,
    pub edges: Vec<(usize, usize)>,
    /// `reach[i][j]`: node `j` is reachable from node `i`, `i != j`.
    reach: Vec<Vec<bool>>,
    /// Number of recurrent components before any coarsening.
    pub raw_nodes: usize,
}

/// Strongly connected components of the cube part of a transition graph.
/// Components are numbered in Tarjan's completion order, so every edge
/// between different components goes from a higher to a lower number.
pub struct Components {
    pub comp: Vec<u32>,
    pub count: usize,
}

pub fn strongly_connected_components(tg: &TransitionGraph) -> Components {
    const UNSEEN: u32 = u32::MAX;
    let n = tg.len();
    let out = tg.out_node();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![UNSEEN; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut calls: Vec<(u32, usize)> = Vec::new();
    let mut next = 0u32;
    let mut count = 0u32;
    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            let succ = tg.successors(v);
            if *pos < succ.len() {
                let w = succ[*pos];
                *pos += 1;
                if w == out {
                    continue;
                }
                let wi = w as usize;
                if index[wi] == UNSEEN {
                    index[wi] = next;
                    low[wi] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[wi] = true;
                    calls.push((w, 0));
                } else if on_stack[wi] {
                    low[v as usize] = low[v as usize].min(index[wi]);
                }
                continue;
            }
            calls.pop();
            let vi = v as usize;
            if let Some(&(parent, _)) = calls.last() {
                low[parent as usize] = low[parent as usize].min(low[vi]);
            }
            if low[vi] == index[vi] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    comp[w as usize] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    Components { comp, count: count as usize }
}

/// Node assignment on the components of a transition graph together with
/// forward and backward reachability of nodes.
struct Condensation<'a> {
    tg: &'a TransitionGraph,
    comp: Vec<u32>,
    count: usize,
    /// Morse node of each component, `NONE` for transient ones.
    node_of: Vec<u32>,
    nodes: usize,
    words: usize,
    /// Nodes reachable from each component, itself included.
    fwd: Vec<u64>,
    /// Nodes from which each component is reachable, itself included.
    bwd: Vec<u64>,
}

const NONE: u32 = u32::MAX;

impl<'a> Condensation<'a> {
    fn new(tg: &'a TransitionGraph) -> Self {
        let n = tg.len();
        let Components { comp, count } = strongly_connected_components(tg);
        let mut size = vec![0u32; count];
        let mut self_loop = vec![false; count];
        for c in 0..n as u32 {
            size[comp[c as usize] as usize] += 1;
            if tg.successors(c).contains(&c) {
                self_loop[comp[c as usize] as usize] = true;
            }
        }
        // sources first: decreasing component number
        let mut node_of = vec![NONE; count];
        let mut k = 0u32;
        for c in (0..count).rev() {
            if size[c] > 1 || self_loop[c] {
                node_of[c] = k;
                k += 1;
            }
        }
        let mut s = Self { tg, comp, count, node_of, nodes: k as usize, words: 0, fwd: Vec::new(), bwd: Vec::new() };
        s.propagate();
        s
    }

    fn has(bits: &[u64], i: usize) -> bool {
        bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn comp_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let out = self.tg.out_node();
        (0..self.tg.len() as u32).flat_map(move |u| {
            let cu = self.comp[u as usize] as usize;
            self.tg
                .successors(u)
                .iter()
                .filter(move |&&v| v != out)
                .map(move |&v| (cu, self.comp[v as usize] as usize))
                .filter(|(a, b)| a != b)
        })
    }

    /// Recomputes the reach bitsets for the current node assignment.
    fn propagate(&mut self) {
        let w = self.nodes.div_ceil(64).max(1);
        self.words = w;
        let count = self.count;
        let mut fwd = vec![0u64; count * w];
        let mut bwd = vec![0u64; count * w];
        for c in 0..count {
            if self.node_of[c] != NONE {
                let b = self.node_of[c] as usize;
                fwd[c * w + b / 64] |= 1 << (b % 64);
                bwd[c * w + b / 64] |= 1 << (b % 64);
            }
        }
        // edges run from higher to lower component numbers; bucket them by source
        let mut by_src: Vec<Vec<u32>> = vec![Vec::new(); count];
        for (a, b) in self.comp_edges() {
            by_src[a].push(b as u32);
        }
        for list in &mut by_src {
            list.sort_unstable();
            list.dedup();
        }
        for c in 0..count {
            for &d in &by_src[c] {
                let d = d as usize;
                for i in 0..w {
                    fwd[c * w + i] |= fwd[d * w + i];
                }
            }
        }
        for c in (0..count).rev() {
            for &d in &by_src[c] {
                let d = d as usize;
                for i in 0..w {
                    bwd[d * w + i] |= bwd[c * w + i];
                }
            }
        }
        self.fwd = fwd;
        self.bwd = bwd;
    }

    fn node_reach(&self) -> Vec<Vec<bool>> {
        let k = self.nodes;
        let mut reach = vec![vec![false; k]; k];
        for c in 0..self.count {
            let i = self.node_of[c];
            if i == NONE {
                continue;
            }
            let bits = &self.fwd[c * self.words..(c + 1) * self.words];
            for (j, r) in reach[i as usize].iter_mut().enumerate() {
                if j != i as usize && Self::has(bits, j) {
                    *r = true;
                }
            }
        }
        reach
    }

    fn into_graph(self, marks: &[(String, Vec<f64>)], raw_nodes: usize) -> MorseGraph {
        let k = self.nodes;
        let reach = self.node_reach();
        let mut cubes: Vec<Vec<u32>> = vec![Vec::new(); k];
        for v in 0..self.tg.len() {
            let i = self.node_of[self.comp[v] as usize];
            if i != NONE {
                cubes[i as usize].push(v as u32);
            }
        }
        let mut nodes: Vec<MorseNode> =
            cubes.into_iter().map(|c| MorseNode { cubes: CubeSet::from_sorted(c), labels: Vec::new() }).collect();
        for (name, p) in marks {
            if let Some(cube) = self.tg.grid.cube_of_point(p) {
                let i = self.node_of[self.comp[cube as usize] as usize];
                if i != NONE {
                    nodes[i as usize].labels.push(name.clone());
                }
            }
        }
        let edges = transitive_reduction(&reach);
        MorseGraph { nodes, edges, reach, raw_nodes }
    }
}

/// Computes the Morse graph of a transition graph. A component is recurrent
/// when it has more than one cube or a self-loop; the out node never is.
/// `marks` tags nodes by the cube containing each named point.
pub fn compute_morse_graph(tg: &TransitionGraph, marks: &[(String, Vec<f64>)]) -> MorseGraph {
    let cond = Condensation::new(tg);
    let raw = cond.nodes;
    cond.into_graph(marks, raw)
}

fn transitive_reduction(reach: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let k = reach.len();
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if reach[i][j] && !(0..k).any(|m| m != j && reach[i][m] && reach[m][j]) {
                edges.push((i, j));
            }
        }
    }
    edges
}

impl MorseGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn reaches(&self, i: usize, j: usize) -> bool {
        self.reach[i][j]
    }

    /// Nodes with no outgoing edge.
    pub fn minimal_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.reach[i].iter().any(|&r| r)).collect()
    }

    /// Nodes with no incoming edge.
    pub fn maximal_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| !(0..self.len()).any(|i| self.reach[i][j])).collect()
    }

    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.labels.iter().any(|l| l == label))
    }

    pub fn is_down_set(&self, set: &[usize]) -> bool {
        set.iter().all(|&i| (0..self.len()).all(|j| !self.reach[i][j] || set.contains(&j)))
    }

    /// The order restricted to the listed nodes. Reachability through the
    /// dropped nodes is kept.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&i| i >= self.len()) {
            return Err(contract("restriction names a missing Morse node"));
        }
        let reach: Vec<Vec<bool>> = keep.iter().map(|&i| keep.iter().map(|&j| self.reach[i][j]).collect()).collect();
        let edges = transitive_reduction(&reach);
        let nodes = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        Ok(Self { nodes, edges, reach, raw_nodes: self.raw_nodes })
    }

    /// The same order with the listed nodes merged into one. The merged node
    /// takes the smallest index among them.
    pub fn merge_nodes(&self, group: &[usize]) -> Result<Self> {
        if group.is_empty() || group.iter().any(|&g| g >= self.len()) {
            return Err(contract("merge group must list existing nodes"));
        }
        let target = *group.iter().min().unwrap();
        let new_index = |i: usize| -> usize {
            let j = if group.contains(&i) { target } else { i };
            j - group.iter().filter(|&&g| g != target && g < j).count()
        };
        let k = self.len() - (group.len() - group.iter().filter(|&&g| g == target).count().min(1));
        let mut nodes: Vec<Option<MorseNode>> = vec![None; k];
        for (i, node) in self.nodes.iter().enumerate() {
            let j = new_index(i);
            match &mut nodes[j] {
                Some(m) => {
                    m.cubes = m.cubes.union(&node.cubes);
                    m.labels.extend(node.labels.iter().cloned());
                }
                slot => *slot = Some(node.clone()),
            }
        }
        let mut reach = vec![vec![false; k]; k];
        for i in 0..self.len() {
            for j in 0..self.len() {
                let (a, b) = (new_index(i), new_index(j));
                if self.reach[i][j] && a != b {
                    reach[a][b] = true;
                }
            }
        }
        let edges = transitive_reduction(&reach);
        Ok(Self { nodes: nodes.into_iter().map(|n| n.expect("every slot filled")).collect(), edges, reach, raw_nodes: self.raw_nodes })
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph morse {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  n{i} [label=\"{} ({} cubes)\"];", n.name(i), n.cubes.len());
        }
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "  n{a} -> n{b};");
        }
        s.push_str("}\n");
        s
    }

    /// Summary without cube lists.
    pub fn summary(&self) -> MorseGraphSummary {
        MorseGraphSummary {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| NodeSummary { index: i, name: n.name(i), labels: n.labels.clone(), cubes: n.cubes.len() })
                .collect(),
            edges: self.edges.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub index: usize,
    pub name: String,
    pub labels: Vec<String>,
    pub cubes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseGraphSummary {
    pub nodes: Vec<NodeSummary>,
    pub edges: Vec<(usize, usize)>,
}

/// Attractor of a down-set of Morse nodes and the dual repeller.
///
/// The attractor is the forward closure of the selected nodes' cubes and the
/// repeller is the backward closure of the remaining nodes' cubes. A path
/// from the first into the second would contradict the down-set property, so
/// the two sets are disjoint.
pub fn attractor_repeller_split(mg: &MorseGraph, tg: &TransitionGraph, selected: &[usize]) -> Result<(CubeSet, CubeSet)> {
    if selected.iter().any(|&i| i >= mg.len()) {
        return Err(contract("selection names a missing Morse node"));
    }
    if !mg.is_down_set(selected) {
        return Err(contract("selected Morse nodes do not form a down-set"));
    }
    let union = |pick: &dyn Fn(usize) -> bool| {
        mg.nodes.iter().enumerate().filter(|(i, _)| pick(*i)).fold(CubeSet::new(), |acc, (_, n)| acc.union(&n.cubes))
    };
    let down = union(&|i| selected.contains(&i));
    let up = union(&|i| !selected.contains(&i));
    let attractor = tg.forward_closure(&down);
    let repeller = if up.is_empty() { CubeSet::new() } else { tg.transpose().closure(&up) };
    Ok((attractor, repeller))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::{build_transition_graph, EngineConfig, Grid, DEFAULT_BUDGET};
    use crate::flow::{Model, TrappingBox};

    fn sink_graph() -> TransitionGraph {
        let g = Grid::new(TrappingBox::new(vec![-1.0; 3], vec![1.0; 3]).unwrap(), &[3, 3, 3], DEFAULT_BUDGET).unwrap();
        build_transition_graph(&g, &Model::LinearSink { dim: 3 }, &EngineConfig::default()).unwrap()
    }

    #[test]
    fn linear_sink_origin_is_the_bottom() {
        let tg = sink_graph();
        let mg = compute_morse_graph(&tg, &[("O".into(), vec![0.0; 3])]);
        let o = mg.node_by_label("O").unwrap();
        assert_eq!(mg.minimal_nodes(), vec![o]);
        let only = mg.restrict(&[o]).unwrap();
        let (a, r) = attractor_repeller_split(&only, &tg, &[0]).unwrap();
        assert!(r.is_empty());
        assert!(only.nodes[0].cubes.is_subset(&a));
    }

    #[test]
    fn tarjan_orders_components_topologically() {
        let tg = sink_graph();
        let comps = strongly_connected_components(&tg);
        for v in 0..tg.len() as u32 {
            for &w in tg.successors(v) {
                if w != tg.out_node() {
                    assert!(comps.comp[v as usize] >= comps.comp[w as usize]);
                }
            }
        }
    }

    fn chain(k: usize) -> MorseGraph {
        let mut reach = vec![vec![false; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                reach[i][j] = true;
            }
        }
        let nodes = (0..k).map(|i| MorseNode { cubes: CubeSet::from_unsorted(vec![i as u32]), labels: vec![] }).collect();
        MorseGraph { nodes, edges: transitive_reduction(&reach), reach, raw_nodes: k }
    }

    #[test]
    fn reduction_of_a_chain() {
        let mg = chain(4);
        assert_eq!(mg.edges, vec![(0, 1), (1, 2), (2, 3)]);
        assert!(mg.is_down_set(&[2, 3]));
        assert!(!mg.is_down_set(&[1]));
        assert_eq!(mg.minimal_nodes(), vec![3]);
        assert_eq!(mg.maximal_nodes(), vec![0]);
    }

    #[test]
    fn merging_nodes() {
        let mg = chain(4);
        let m = mg.merge_nodes(&[2, 3]).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.nodes[2].cubes.as_slice(), &[2, 3]);
        assert_eq!(m.edges, vec![(0, 1), (1, 2)]);
    }
}
