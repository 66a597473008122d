//! Exact verification of second-derivative sign properties of the local
//! magnetization in the ferromagnetic Potts model.
//!
//! Site 0 is a ghost spin coupled to site `i` with strength `B_i`, so fields
//! become couplings and every Boltzmann weight is a product of pair weights
//! `t_p = e^{J_p}`. Exact quantities are rationals in the `t_p`; expansion
//! coefficients are Laurent polynomials in the number of states `r`.

pub mod alpha;
pub mod constraint;
pub mod derivatives;
pub mod error;
pub mod expansion;
pub mod laurent;
pub mod model;
pub mod model_file;
pub mod partition;
pub mod sampling;
pub mod separation;
pub mod xpoly;

pub use error::{GhsError, Result};
