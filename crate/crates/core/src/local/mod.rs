//! Truncated arithmetic in tame extensions of `Q_p`.

pub mod context;
pub mod element;
pub mod field;

pub use context::PadicContext;
pub use element::TowerElement;
pub use field::{base_field, make_ambient_in, make_tower, make_tower_in, Step, TowerField};
pub mod embedding;
pub mod relative;

pub use embedding::{automorphisms, embeddings, embeddings_found, Embedding, Subfield, SubfieldSpec};
pub use relative::Relative;
