//! Fidelity certification of the rotated graph state from local
//! measurements, with the sample and noise budgets of the protocol.

mod budget;
mod hamiltonian;
mod mixed;
mod noise;
mod protocol;

pub use budget::{fidelity_and_trace_bounds, sample_budget, sample_budget_for_sites, NoiseBudget};
pub use hamiltonian::{energy_estimate, parent_hamiltonian, EnergyEstimate, LocalTerm, TermEstimate, TermTally};
pub use mixed::MixedState;
pub use noise::{apply_noise_to_distribution, apply_noise_to_record, NoiseModel};
pub use protocol::{certify, certify_tallies, simulate_tallies, CertificationReport, CertifyConfig, Verdict};
