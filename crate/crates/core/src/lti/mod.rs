//! Real-rational transfer functions and matrices.

pub mod eig;
pub mod matrix;
pub mod plant;
pub mod response;
pub mod poly;
pub mod rational;
pub mod ss;

pub use matrix::{algebra, AlgebraOp, CMatrix, FrequencyResponse, TransferMatrix};
pub use plant::{classify_pz, PlantModel};
pub use poly::Polynomial;
pub use response::Response;
pub use rational::RationalFn;
pub use ss::StateSpace;
