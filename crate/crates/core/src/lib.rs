//! Exact verification and adversarial falsification of Chebyshev-type
//! integral inequalities (Levin-Stečkin, generalized Chebyshev, generalized
//! Clausing) over continuous piecewise-linear functions on `[0, 1]`.
//!
//! Functions are [`PLFunction`]s; every integral the inequalities need is
//! computed in closed form, so in rational mode ([`Exact`]) verdicts carry no
//! quadrature or rounding error.

pub mod campaign;
pub mod classes;
pub mod error;
pub mod exec;
pub mod generators;
pub mod inequalities;
pub mod pl_function;
pub mod scalar;
pub mod search;

pub use classes::{ClassName, ClassReport, Direction, MClass, MWitness};
pub use error::PlError;
pub use exec::Execution;
pub use generators::GenConfig;

pub use pl_function::{PLFunction, PlRecord};
pub use scalar::{Arithmetic, Exact, Scalar};

pub use inequalities::{Checker, InequalityName, InequalityVerdict};
pub use search::{SearchProblem, SearchResult};
