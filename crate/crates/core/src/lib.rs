//! Kneading theory for weighted piecewise-monotone interval maps.
//!
//! The objects of study are maps `f` on an interval `[a,b]` that are strictly
//! monotone and continuous on each of finitely many open subintervals
//! `]c_i, c_{i+1}[`, together with a constant weight `g_i` attached to each
//! branch.  From the orbits of the cut points one builds a matrix of power
//! series in a formal variable `t` — the kneading matrix — whose determinant
//! controls the weighted dynamics:
//!
//! * its reciprocal is the weighted dynamical zeta function,
//! * its smallest positive zero yields the topological pressure
//!   `log(ρ₁)` with `ρ₁ = 1/t*`,
//! * its value at subcritical `t` drives a piecewise-linear change of
//!   coordinates that straightens every branch to constant slope.
//!
//! All computations run over a pluggable scalar type: `f64` for speed, or
//! arbitrary-precision rationals for exact arithmetic (see [`scalar::Scalar`]).
//! Power series are truncated at a configurable degree; every identity this
//! crate verifies is checked coefficient-by-coefficient up to that degree.

pub mod cylinders;
pub mod error;
pub mod fixtures;
pub mod germ;
pub mod kneading;
pub mod linalg;
pub mod pressure;
pub mod scalar;
pub mod semiconj;
pub mod series;
pub mod system;

pub use error::Error;
pub use germ::{Dir, Germ, GermInterval};
pub use scalar::{ArithmeticMode, Rational, Scalar};
pub use series::Series;
pub use system::{Branch, System};
