//! Simulation and verification of translation-invariant Ising sampling on
//! brickwork lattices.
//!
//! Spins start in `|+⟩`, evolve for unit time under the commuting
//! Hamiltonian `H = −J Σ Z_i Z_j + Σ B_i Z_i` with `J = π/4`, and are read
//! out in the X basis. The crate provides:
//!
//! * [`lattice`]: brickwork, square-cluster and custom lattices with the
//!   translation-invariant seven-site angle pattern;
//! * [`statevec`]: a dense state-vector engine with exact distributions and
//!   seeded sampling;
//! * [`partition`]: a brute-force imaginary-temperature partition function,
//!   independent of the state vector, with `q_x = |Z_x|² / 2^{2N}`;
//! * [`mbqc`]: the measurement-based gadgets, field absorption and the
//!   cluster-to-brickwork reduction;
//! * [`certify`]: the parent-Hamiltonian fidelity certificate with its
//!   sample and noise budgets;
//! * [`ensemble`]: the random brick ensemble and Porter–Thomas statistics.
//!
//! ```
//! use brickwork::{canonical_angle_field, Lattice, PhaseProgram, PureState};
//! use brickwork::partition::max_born_partition_residual;
//!
//! let lattice = Lattice::brickwork(1, 1)?;
//! let field = canonical_angle_field(&lattice)?;
//! let mut state = PureState::plus(lattice.num_sites())?;
//! state.apply_phase_program(&PhaseProgram::from_hamiltonian(&lattice, &field)?)?;
//! let dist = state.full_distribution()?;
//! assert!((dist.total() - 1.0).abs() < 1e-9);
//! assert!(max_born_partition_residual(&lattice, &field)? < 1e-9);
//! # Ok::<(), brickwork::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod certify;
pub mod ensemble;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod mbqc;
pub mod partition;
pub mod statevec;

pub use bits::Bitstring;
pub use error::{Error, Result};
pub use lattice::{canonical_angle_field, AngleField, Lattice, LatticeKind, LatticeSpec, SiteRole};
pub use statevec::{Basis, Distribution, MeasurementRecord, PhaseProgram, PureState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/partition.md")]
    mod partition {}
    #[doc = include_str!("../../../book/src/gadgets.md")]
    mod gadgets {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/ensemble.md")]
    mod ensemble {}
}
