//! Time-dependent Hamiltonian mechanics on cosymplectic manifolds.

pub mod chart;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod polynomial;

pub use chart::DarbouxChart;
pub use error::{Error, Result};
pub use field::{Field, ScalarField};
pub use geometry::{FieldKind, FieldValue};
pub use jet::Jet2;
pub mod dynamics;
pub mod equilibria;
pub mod stability;
pub mod symmetry;
pub mod quantum;
pub mod roots;
pub mod threebody;
pub mod cli;
