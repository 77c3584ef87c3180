pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod fom;
pub mod io;
pub mod mesh;
pub mod numerics;
pub mod pod;
pub mod rom;

pub use error::{Error, Result};
