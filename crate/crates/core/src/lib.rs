pub mod allpass;
pub mod error;
pub mod limits;
pub mod network;
pub mod oracle;
pub mod sweeps;
pub mod lti;

pub use error::{Error, Result};
