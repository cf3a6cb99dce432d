pub mod cover;
pub mod epsnet;
pub mod error;
mod grid;
pub mod harness;
pub mod problem;
pub mod rc;
pub mod rng;
pub mod space;
pub mod sphere;
