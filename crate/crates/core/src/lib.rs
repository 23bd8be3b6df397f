//! Quantum relax-and-round (QRR) building blocks.
//!
//! This crate holds the allocation-only numerical core: problem instances and
//! their generators, an exhaustive ground-truth solver, an exact QAOA /
//! annealing statevector simulator, closed-form depth-one correlators, the
//! spectral relax-and-round step, the eigenvalue max-cut bound with a
//! correcting vector, and QAOA angle search.
//!
//! Everything here is `no_std` + `alloc`; file formats, timing and the CLI live
//! in the `qrr` companion crate.
//!
//! Conventions used throughout:
//!
//! - The objective is `C(z) = Σ_{i,j} W_ij z_i z_j + Σ_i h_i z_i` summed over
//!   *ordered* pairs, so each undirected edge contributes `2 W_ij z_i z_j`.
//! - Qubit `i` is bit `i` of a basis-state index (LSB is qubit 0). Bit value 0
//!   maps to spin `+1`, bit value 1 to spin `-1`.
//! - The QAOA phase separator counts each coupling once:
//!   `exp(-i γ C(b) / 2)`. This is the convention under which the closed-form
//!   depth-one correlators and the literature SK angles hold.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod math;

pub mod analytic;
pub mod angles;
pub mod exact;
pub mod graphs;
pub mod gwcut;
pub mod instance;
pub mod linalg;
pub mod qsim;
pub mod rounding;
pub mod seed;

pub use error::{Error, Result};
pub use instance::{ProblemInstance, Sense, Source, Spins};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
