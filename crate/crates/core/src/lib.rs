//! Numerical core for open-cavity decay models.
//!
//! Four independent descriptions of a particle (or photon) leaking out of a
//! cavity live here side by side so they can be checked against each other:
//!
//! * [`barrier_dynamics`]: leapfrog time evolution of the 1D Schrödinger
//!   equation with complex-stretched absorbing layers, plus escape
//!   diagnostics (nonescape probability, probability current, flux rates).
//! * [`resonance_poles`]: Siegert poles of piecewise-constant potentials
//!   from transfer matrices, located by recursive winding-number subdivision.
//! * [`gamow_semiclassical`]: the `p · f · T` alpha-decay estimate with a
//!   WKB Coulomb transmission factor.
//! * [`friedrichs_decay`]: one discrete level coupled to a continuum, in
//!   closed Wigner–Weisskopf form and by direct integration.
//! * [`coherent_cavity`]: Fock-space consequences (binomial counting,
//!   coherent-state factorization, zero-temperature Lindblad damping).
//! * [`qnm_cavity`]: Fabry–Perot and paraxial resonator estimates and a 1D
//!   finite-difference quasinormal-mode solver.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the
//! command-line front end live in the companion `leakycav` crate.
#![no_std]
// `!(x > 0.0)` is the idiom for rejecting NaN along with bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod barrier_dynamics;
pub mod coherent_cavity;
pub mod constants;
pub mod fit;
pub mod friedrichs_decay;
pub mod gamow_semiclassical;
mod linalg;
pub mod qnm_cavity;
pub mod quadrature;
pub mod resonance_poles;

pub use num_complex::Complex64;
