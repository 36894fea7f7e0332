//! Combinatorial Conley-Morse analysis of the Lorenz equations.
//!
//! The crate is organised bottom-up: [`flow`] integrates vector fields,
//! [`equilibria`] classifies fixed points and locates bifurcation thresholds,
//! [`cubical`] turns the time-tau map into a transition graph on a grid,
//! [`morse`] extracts Morse graphs and Morse equations, [`homology`] computes
//! integer cubical homology and Conley indices, and [`symbolic`] codes
//! trajectories by their passages through the lobes of the attractor.

pub mod error;
pub mod flow;
pub mod linalg;

pub use error::{Error, Result};
pub mod equilibria;
pub mod homology;
pub mod cubical;
pub mod morse;
pub mod symbolic;
