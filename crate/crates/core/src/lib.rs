//! Solvers for integer total-variation trust-region subproblems on 2D grids:
//! an LP relaxation solved by a bounded-variable simplex, a Lagrangian
//! relaxation solved by minimum cuts, cutting planes, a line-DP primal
//! heuristic, dual decomposition, a branch-and-cut driver, exhaustive
//! reference oracles and the outer trust-region loop.

pub mod bnb;
pub mod cuts;
pub mod dualdecomp;
pub mod error;
pub mod grid;
pub mod heuristic;
pub mod instance;
pub mod num;
pub mod oracle;
pub mod pathdp;
pub mod relax;
pub mod simplex;
pub mod slip;

pub use error::{Error, ParseError, Result};
pub use grid::Grid;
pub use instance::{ControlStep, IntStep, TripInstance};
pub use num::Rational;
