//! Statevector simulation of quantum preimage search for one-dimensional
//! elementary cellular automata.
//!
//! * [`eca`]: rule tables, evolution with fixed white boundaries, and the
//!   exhaustive preimage enumerator that serves as ground truth.
//! * [`statevec`]: a dense complex statevector over an
//!   `index ⊗ flag ⊗ modexp` register with the Hadamard layer, basis-map
//!   oracles, (inverse) QFT, marginals, post-selection and seeded sampling.
//! * [`numtheory`]: gcd, modular powers, orders, continued fractions and the
//!   residue-class group on exponents.
//! * [`backtrack`]: the assembled pipeline plus its closed-form frequency
//!   distribution.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod backtrack;
pub mod eca;
mod fourier;
pub mod numtheory;
pub mod statevec;

pub use backtrack::{
    analytic_amplitude, analytic_index_probability, build_oracle, qubit_budget, run_mark_stage,
    run_pipeline, verify_result, BacktrackError, Mode, ModexpParams, PipelineConfig,
    PipelineResult, ProblemInstance,
};
pub use eca::{Configuration, EcaError, RuleTable};
pub use num_complex::Complex64;
pub use numtheory::NumTheoryError;
pub use statevec::{Register, RegisterLayout, StateError, StateVector};
