//! Graphical counterfactual reasoning with single-world intervention graphs.

pub mod cli;
pub mod config;
pub mod error;
pub mod estimand;
pub mod graph;
pub mod identify;
pub mod oracle;
pub mod pocalc;
pub mod query;
pub mod separation;
pub mod swig;
pub mod verify;

pub use config::Guards;
pub use error::{Error, Result};
pub use graph::{Admg, VSet, VarDecl, VertexId};
