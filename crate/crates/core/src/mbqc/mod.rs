//! Measurement-based gadget algebra: gate propagation along chains, the
//! conditional-rotation and `H R_z(kπ/4)` gadgets, the CZ phase
//! decomposition, field absorption, and the break/bridge reduction from a
//! square cluster to a brickwork.

mod absorb;
mod gadgets;
mod reduce;

pub use absorb::{absorb_fields, ideal_cz_network_state, Absorption};
pub use gadgets::{
    chain_operator, conditional_rotation_gadget, cz_phase_decomposition, gadget_suite, hrz_k_gadget,
    propagate_single_measurement, single_measurement_gadget, Byproduct, Gadget, GadgetCheck, Pauli,
};
pub use reduce::{
    marginalize_square_to_brickwork, red_site_count, red_site_measurement, reduce_cluster_to_brickwork, Marginal,
    RedKind, RedSite, ReductionPlan,
};
