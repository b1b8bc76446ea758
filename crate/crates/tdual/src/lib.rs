//! Exact symbolic calculus for Lie algebroid forms attached to standard
//! torus actions: elliptic, complex-log and real-log frames, residues,
//! generalized complex spinors, non-principal T-duality and blow-ups.

pub mod blowup;
pub mod chart;
pub mod cli;
pub mod coeffring;
pub mod error;
pub mod forms;
pub mod genstruct;
pub mod report;
pub mod residues;
pub mod tduality;

pub use chart::{Chart, ChartKind, TorusAction};
pub use coeffring::{FnElem, Qi};
pub use error::CalcError;
pub use forms::{Form, Multivector};
