//! Morse graphs, attractor-repeller pairs, continuation and Morse equations.

pub mod decomposition;
pub mod equations;
pub mod graph;
pub mod hausdorff;

pub use decomposition::{pitchfork_engine_config, lorenz_marks, lorenz_morse, strange_node_sweep, LorenzMorse, SweepPoint, ORIGIN_LABEL, cube_set_diameter, match_nodes, morse_decomposition, pitchfork_demo, PitchforkDemo, track_continuation, ContinuationTrack, DecompositionSummary, MorseDecomposition, NodeMatch};
pub use equations::{morse_equations, pitchfork_equations, travel_equations, MorseEquationReport, PoincarePolynomial, Polynomial};
pub use graph::{attractor_repeller_split, compute_morse_graph, MorseGraph, MorseGraphSummary, MorseNode};
pub use hausdorff::{cube_set_distance, hausdorff_brute, hausdorff_distance};
