pub mod cli;
pub mod code;
pub mod error;
pub mod hnls;
pub mod lindblad;
pub mod operators;
pub mod protocol;

pub use error::{Error, Result};
