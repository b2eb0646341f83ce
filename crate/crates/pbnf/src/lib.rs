//! Simultaneous Poincaré–Birkhoff normal forms for families of commuting
//! polynomial vector fields, computed by a degree-doubling scheme.
//!
//! A family `X^i = E^i + F^i` of pairwise-commuting fields over conjugate
//! variable pairs is transformed, one quadratic-convergence step at a time,
//! into a completely integrable normal form `E^i + sum_j a_{i,j} E^j` whose
//! coefficients depend on the actions `z_l z_{-l}` only. Every algebraic
//! identity along the way is verified in exact rational arithmetic, and the
//! analytic inequalities behind the scheme are checked numerically through
//! majorant box norms.
//!
//! Module map:
//! - [`coeff`], [`multi_index`]: exact/float coefficients, sparse exponents;
//! - [`vector_field`], [`scalar`]: the truncated Lie algebra of fields and
//!   the Hamiltonian/Poisson layer;
//! - [`resonance`]: divisors, resonant splitting, joint eigenspaces;
//! - [`cohomology`]: the linear and nonlinear cohomological equations;
//! - [`norms`]: majorants, weighted box norms, flow-remainder inequalities;
//! - [`newton`]: scheme constants, sequence audits, the degree-doubling
//!   iteration, Birkhoff-coordinate checks;
//! - [`kp`]: the near-identity-map frontend building action Hamiltonians;
//! - [`format`]: the `VFAM/1` text format, run configuration, reports.

pub mod coeff;
pub mod cohomology;
pub mod error;
pub mod format;
pub mod instances;
pub mod kp;
pub mod multi_index;
pub mod newton;
pub mod norms;
pub mod resonance;
pub mod scalar;
pub mod vector_field;

pub use coeff::{Coeff, Mode, Rat, C64};
pub use error::{Error, Result};
pub use multi_index::MultiIndex;
pub use scalar::ScalarFunction;
pub use vector_field::{Family, Term, VectorField};
