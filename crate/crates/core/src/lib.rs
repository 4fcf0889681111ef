//! Finite-difference solvers for fourth-order diffusion on periodic grids:
//! the biharmonic heat equation and the regularised TV-H^-1 flow, stepped
//! with alternating-direction implicit splittings.

mod adi;
pub mod amos;
pub mod analysis;
pub mod biharmonic;
pub mod error;
pub mod grid_ops;
pub mod imageio;
pub mod linsolve;
pub mod primal_dual;
pub mod tvh1;

pub use error::{Error, Result};
pub use grid_ops::{Axis, Field, Grid2D, Mask, VecField};
