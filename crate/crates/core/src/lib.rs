pub mod calculus;
pub mod cli;
pub mod dd;
pub mod error;
pub mod funcrep;
pub mod ext_real;
pub mod linalg;
pub mod lp;
pub mod polyhedron;
pub mod relax;
pub mod subdiff;

pub use error::{Error, Result};
pub use ext_real::ExtReal;
pub use polyhedron::{Halfspace, Polyhedron, VRep};
