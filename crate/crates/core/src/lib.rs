//! Property testing of quantum unitaries and Boolean functions for closeness to juntas.
//!
//! The crate simulates the quantum access models exactly (Fourier sampling, influence
//! sampling and the Hadamard test) and runs the tester algorithms on top of them,
//! alongside exact classical oracles for the same quantities.

pub mod boolean;
pub mod error;
pub mod exec;
pub mod extractors;
pub mod generators;
pub mod linalg;
pub mod oracles;
pub mod pauli;
pub mod samplers;
pub mod subset;
pub mod testers;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use linalg::{ComplexMatrix, Unitary, C64};
pub use samplers::{QueryLedger, RandomSource};
pub use subset::Subset;
pub use testers::{TesterKind, TesterVerdict, Verdict};
