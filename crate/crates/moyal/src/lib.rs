pub mod cli;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod grid;
pub mod models;
pub mod oracle;
pub mod poly;
pub mod special;
pub mod spectral;
pub mod star;
pub mod susy;
pub mod weyl;

pub use error::{Error, Result};
pub use grid::{PhaseGrid, SymbolField};
