//! Finite-dimensional quantum channels and the correlation sets attached to
//! them.
//!
//! * [`channel`]: Kraus/Choi calculus and verification of completely positive maps.
//! * [`zoo`]: named channel families, Haar unitaries, extremality.
//! * [`factorization`]: factorizable channels through finite-dimensional
//!   tracial ancillas, `k`-noisy constructions, Stinespring dilations.
//! * [`correlations`]: Gram matrices of unitary tuples and Schur channels.
//! * [`nonlocal`]: classical, tensor and commuting correlation tables, Bell
//!   functionals and CHSH.
//! * [`io`]: JSON file formats for all of the above.

pub mod channel;
pub mod correlations;
pub mod error;
pub mod factorization;
pub mod io;
pub mod linalg;
pub mod nonlocal;
pub mod zoo;

pub use channel::{ChoiMatrix, QuantumChannel, VerificationReport};
pub use correlations::{CorrelationMatrix, UnitaryTuple};
pub use error::{Error, Result};
pub use factorization::{FiniteAncillaSpec, FiniteFactorization, Weight};
pub use linalg::{CMatrix, DEFAULT_TOL};
pub use nonlocal::{BellFunctional, CorrelationTable, Pvm, TensorStrategy};
pub use zoo::UnitaryMatrix;
