pub mod character;
pub mod cli;
pub mod epsilon;
pub mod error;
pub mod exact;
pub mod local;
pub mod sharpness;

pub use error::{Error, Result};
