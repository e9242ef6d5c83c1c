pub mod eigen;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod special;
pub mod spectral;
pub mod jet;
pub mod laplacian;
pub mod residue;
pub mod symbol;
pub mod trig;

pub use error::{Error, Result};
