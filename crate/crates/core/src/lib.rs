//! Finite windows of quantum spin and fermion chains: thermal states,
//! entropy functionals, and numerical verification of thermal area-law
//! inequalities, Gibbs-condition product formulas, Donald's decomposition
//! and half-chain mutual-entropy bounds, with a free-fermion covariance
//! fast path for large systems.

mod bits;
pub mod entropy;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod linalg;
pub mod monomial;
pub mod potential;
pub mod states;
pub mod verify;

pub use entropy::{ConvergenceSeries, DonaldReport, EntropyValue, MonotoneDirection};
pub use error::{Error, Result};
pub use gaussian::{BdGHamiltonian, MajoranaCovariance};
pub use lattice::{GradedPart, LocalOperator, Region, Window, MAX_WINDOW_SITES};
pub use linalg::CMat;
pub use monomial::{OperatorPoly, Parity, Statistics};
pub use potential::{ModelSpec, Potential};
pub use states::{Channel, DensityState, ParityFlag};
pub use verify::{AreaLawReport, LtsReport};
