pub mod dynamics;
pub mod error;
pub mod flow;
pub mod green;
pub mod modulated;
pub mod reference;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod sweep;
pub mod torus;

pub use error::{Error, Result};
