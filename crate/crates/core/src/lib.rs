//! Formal (a,b)-modules over exact rationals.
//!
//! An (a,b)-module is a free module of finite rank over formal power series
//! in `b`, with an endomorphism `a` satisfying `ab - ba = b^2`. This crate
//! builds such modules (directly, from cyclic presentations, from simple-pole
//! differential systems, or as asymptotic-expansion modules), computes their
//! saturation and Bernstein polynomials, the semi-simple filtration, the
//! primitive decomposition along classes modulo Z, and higher Bernstein
//! polynomials, and realizes elements as log-power expansions.

pub mod algebra;
pub mod decomposition;
pub mod error;
pub mod fresco;
pub mod gauss_manin;
pub mod lattice;
pub mod linalg;
pub mod module;
pub mod poly;
pub mod saturation;
pub mod scalar;
pub mod series;
pub mod session;

pub use algebra::{AbOperator, Generator};
pub use error::{AbError, Result};
pub use lattice::{quotient_module, Lattice, Quotient};
pub use module::{build_xi_tensor, AbModule, BernsteinMode, ModuleElement, XiLayout};
pub use poly::{Polynomial, RationalPolynomial};
pub use scalar::{rat, Rational};
pub use series::TruncSeries;
