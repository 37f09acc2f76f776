//! Uniform approximation on an interval by finite sums of translates of the
//! Poisson kernel `1/(α² + (x − t)²)`, with nodes taken from a separated
//! sequence and coefficients computed in exact rational arithmetic.
//!
//! The modules follow the construction bottom-up:
//!
//! - [`algebra`]: rationals, polynomials and the A-basis recursion
//! - [`kernel`]: the kernel, its power series in `1/t` and tail bounds
//! - [`nodes`]: separated node windows and doubling subsequences
//! - [`coeffs`]: the inverse-power Vandermonde systems and their solutions
//! - [`approx`]: end-to-end pipelines and error measurement
//! - [`funcspec`]: target functions written as text
//! - [`cli`]: the `pta` command-line tool

pub mod algebra;
pub mod approx;
pub mod cli;
pub mod coeffs;
pub mod funcspec;
pub mod kernel;
pub mod nodes;
