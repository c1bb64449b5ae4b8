//! Exact values: roots of unity, cyclotomic integers and their products with half-powers of `q`.

pub mod cyclotomic;
pub mod embed;
pub mod root;
pub mod scaled;

pub use cyclotomic::CycNumber;
pub use embed::{embed_complex, ComplexApprox};
pub use root::Root;
pub use scaled::ScaledCyc;
