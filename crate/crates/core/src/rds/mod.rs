//! Skew-product engine: symbol streams, orbits with observers, the tangent
//! cocycle and semigroup words.

mod engine;
mod stream;

pub use engine::*;
pub use stream::SymbolStream;
