//! Exact combinatorial algorithms on words, graphs, and integer lattices:
//! free-group algebra, Stallings subgroup graphs, integer linear algebra,
//! finite presentations, abelian splittings with Dehn twists,
//! Makanin-Razborov diagram verification, and constructible-limit-group
//! certificates, together with bounded witness searches.
//!
//! Everything is exact: words are kept freely reduced, matrices use
//! arbitrary-precision integers, and every search is deterministic
//! (shortlex-first) so that witnesses are reproducible test fixtures.

pub mod clg;
pub mod diagrams;
pub mod error;
pub mod intlinalg;
pub mod json;
pub mod presentations;
pub mod search;
pub mod splittings;
pub mod stallings;
pub mod whitehead;
pub mod words;

pub use error::{Error, Result};
pub use words::{Alphabet, FreeMap, Letter, Word};
