//! Integer homology of cubical sets and Conley indices of isolated invariant sets.

pub mod complex;
pub mod index;
pub mod reduce;
pub mod snf;

pub use complex::CubicalComplex;
pub use index::{betti_of_cubeset, build_index_pair, conley_index, conley_index_polynomial, cube_complex, node_indices, IndexPair};
pub use reduce::{homology, relative_homology, ChainComplex, Homology};
pub use snf::{smith_normal_form, IntMatrix, SnfResult};
