//! Cubical grids over a trapping box and transition graphs of the time-tau map.

pub mod graph;
pub mod grid;

pub use graph::{build_reachable_graph, build_transition_graph, outer_map, Adjacency, EngineConfig, Successors, TransitionGraph};
pub use grid::{CubeId, CubeSet, Grid, DEFAULT_BUDGET};
