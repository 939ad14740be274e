//! Minimal Renyi-Ingarden-Urbanik entropy of multipartite pure states,
//! tensor decompositions, polynomial entanglement invariants and the ensemble
//! studies built on them.

pub mod catalog;
pub mod decomp;
pub mod entropy;
pub mod error;
pub mod haar;
pub mod polyinv;
pub mod linalg;
pub mod moments;
pub mod riu;
pub mod rng;
pub mod studies;
pub mod tensor;

pub use entropy::{renyi, RenyiOrder};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use rng::RngStream;
pub use tensor::{ProbVector, StateFile, StateTensor};
