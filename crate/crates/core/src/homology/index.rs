//! Combinatorial index pairs and Conley index polynomials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{homology, relative_homology, CubicalComplex, Homology};
use crate::cubical::{CubeSet, Grid, TransitionGraph};
use crate::error::{contract, Error, Result};
use crate::morse::{MorseGraph, PoincarePolynomial};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPair {
    pub node: usize,
    pub n: CubeSet,
    /// Exit part, `E ⊆ N`.
    pub e: CubeSet,
    /// Other Morse nodes meeting the collar `E`.
    pub touches: Vec<usize>,
}

/// Index pair of a Morse node `S`: `N = S ∪ F(S)`, `E = F(S) \ S`.
///
/// No edge runs from `E` back into `S`, since such a cube would lie on a
/// cycle through `S` and so belong to it; hence `E` is forward closed in `N`
/// and `N \ E = S`. Fails when `S` maps out of the grid.
pub fn build_index_pair(mg: &MorseGraph, node: usize, tg: &TransitionGraph) -> Result<IndexPair> {
    let s = &mg.nodes.get(node).ok_or_else(|| contract("no such Morse node"))?.cubes;
    if s.iter().any(|c| tg.escapes(c)) {
        return Err(Error::Isolation { node, reason: "node maps out of the grid; enlarge the box or increase the depth".into() });
    }
    let image = CubeSet::from_unsorted(s.iter().flat_map(|c| tg.successors(c).iter().copied()).collect());
    let e = image.difference(s);
    let n = s.union(&e);
    let touches = (0..mg.len()).filter(|&j| j != node && mg.nodes[j].cubes.overlap(&e) > 0).collect();
    Ok(IndexPair { node, n, e, touches })
}

/// Closed cubical complex of the union of the given grid cubes.
pub fn cube_complex(grid: &Grid, cubes: &CubeSet) -> Result<CubicalComplex> {
    CubicalComplex::from_cubes(grid.dim(), cubes.iter().map(|c| grid.multi_index(c)))
}

/// Relative homology `H(|N|, |E|)`.
pub fn conley_index(pair: &IndexPair, grid: &Grid) -> Result<Homology> {
    let n = cube_complex(grid, &pair.n)?;
    let e = cube_complex(grid, &pair.e)?;
    relative_homology(&n, &e)
}

pub fn conley_index_polynomial(pair: &IndexPair, grid: &Grid) -> Result<PoincarePolynomial> {
    Ok(PoincarePolynomial::new(conley_index(pair, grid)?.betti))
}

/// Index polynomials of all nodes, computed concurrently.
pub fn node_indices(mg: &MorseGraph, tg: &TransitionGraph) -> Vec<Result<PoincarePolynomial>> {
    (0..mg.len())
        .into_par_iter()
        .map(|i| build_index_pair(mg, i, tg).and_then(|p| conley_index_polynomial(&p, &tg.grid)))
        .collect()
}

/// Homology of the union of the closed cubes.
pub fn betti_of_cubeset(cubes: &CubeSet, grid: &Grid) -> Result<Homology> {
    if cubes.is_empty() {
        return Err(contract("empty cube set"));
    }
    homology(&cube_complex(grid, cubes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubical::{build_transition_graph, EngineConfig, DEFAULT_BUDGET};
    use crate::flow::{Model, TrappingBox};
    use crate::morse::compute_morse_graph;

    #[test]
    fn hyperbolic_saddles_in_the_plane() {
        // one unstable direction: the origin is a saddle between two sinks
        let model = Model::normal_form(2, 1, 0.25).unwrap();
        let g = Grid::new(TrappingBox::new(vec![-1.0; 2], vec![1.0; 2]).unwrap(), &[5, 5], DEFAULT_BUDGET).unwrap();
        let tg = build_transition_graph(&g, &model, &EngineConfig::with_tau(1.0)).unwrap();
        let mg = compute_morse_graph(&tg, &[("O".into(), vec![1e-3, 1e-3])]);
        let polys: Vec<PoincarePolynomial> = node_indices(&mg, &tg).into_iter().map(|r| r.unwrap()).collect();
        let o = mg.node_by_label("O").unwrap();
        assert_eq!(polys[o].betti(), &[0, 1]);
        let sinks: Vec<usize> = mg.minimal_nodes();
        assert_eq!(sinks.len(), 2);
        for s in sinks {
            assert_eq!(polys[s].betti(), &[1]);
        }
    }

    #[test]
    fn single_cube_is_contractible() {
        let g = Grid::new(TrappingBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap(), &[2, 2, 2], DEFAULT_BUDGET).unwrap();
        let h = betti_of_cubeset(&CubeSet::from_unsorted(vec![5]), &g).unwrap();
        assert_eq!(h.betti, vec![1, 0, 0, 0]);
        assert!(betti_of_cubeset(&CubeSet::new(), &g).is_err());
    }
}
