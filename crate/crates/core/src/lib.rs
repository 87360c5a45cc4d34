pub mod cli;
pub mod construction;
pub mod error;
pub mod gallery;
pub mod linalg;
pub mod literal;
pub mod maps;
pub mod scalar;
pub mod seqcore;
pub mod spaces;
pub mod weak;

pub use error::{Error, Result};
