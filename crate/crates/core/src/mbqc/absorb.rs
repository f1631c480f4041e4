use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{AngleField, Lattice, DEFAULT_COUPLING};
use crate::linalg::{cz, rz, wrap_angle};
use crate::statevec::{Distribution, PhaseProgram, PureState};

/// How a raw angle field is turned into Ising fields so that evolving under
/// the Hamiltonian reproduces the CZ network followed by the raw rotations.
///
/// Each edge of `exp(iπ/4 ZZ)` leaves an `R_z(−π/2)` on both endpoints
/// relative to CZ, so a site of degree `d` picks up `R_z(−dπ/2)`:
///
/// * degree 1 gets an extra `Z(i, π/4)` term (`R_z(π/2)`),
/// * degree 2 is left alone; the residual `R_z(−π) ∝ Z` flips its X outcome,
/// * degree 3 has its angle shifted by `−π/2` (mod 2π), which cancels
///   `R_z(−3π/2)` up to the sign `R_z(2π) = −I`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Absorption {
    pub field: AngleField,
    /// Sites receiving the extra `Z(i, π/4)` compensation term.
    pub compensated: Vec<usize>,
    /// Sites whose X outcome must be negated.
    pub flips: Vec<usize>,
    /// Sites whose angle was shifted by `−π/2`.
    pub shifted: Vec<usize>,
}

impl Absorption {
    /// XOR mask applied to raw outcomes.
    pub fn flip_mask(&self) -> u64 {
        self.flips.iter().fold(0u64, |m, &s| m | (1 << s))
    }

    /// Corrects one raw outcome string.
    pub fn relabel(&self, outcome: u64) -> u64 {
        outcome ^ self.flip_mask()
    }

    /// The Hamiltonian program for the adjusted field plus the degree-1
    /// compensation terms.
    pub fn program(&self, lattice: &Lattice) -> Result<PhaseProgram> {
        let mut program = PhaseProgram::from_hamiltonian(lattice, &self.field)?;
        for &site in &self.compensated {
            program = program.z(site, FRAC_PI_4);
        }
        Ok(program)
    }

    /// Distribution of the Ising evolution with the adjusted fields, after
    /// applying the outcome flips.
    pub fn corrected_distribution(&self, lattice: &Lattice) -> Result<Distribution> {
        let mut state = PureState::plus(lattice.num_sites())?;
        state.apply_phase_program(&self.program(lattice)?)?;
        state.full_distribution()?.relabeled(|x| self.relabel(x))
    }
}

/// Computes the field adjustments and outcome flips for every site.
///
/// Rejects couplings other than `π/4` and sites of degree above three.
pub fn absorb_fields(lattice: &Lattice, raw: &AngleField) -> Result<Absorption> {
    raw.validate(lattice)?;
    if (raw.coupling() - DEFAULT_COUPLING).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("field absorption assumes J = π/4, got {}", raw.coupling())));
    }
    let mut field = raw.clone();
    let (mut compensated, mut flips, mut shifted) = (Vec::new(), Vec::new(), Vec::new());
    for site in 0..lattice.num_sites() {
        match lattice.degree(site) {
            0 => {}
            1 => compensated.push(site),
            2 => flips.push(site),
            3 => {
                field.set_angle(site, wrap_angle(raw.angle(site) - FRAC_PI_2));
                shifted.push(site);
            }
            degree => return Err(Error::UnsupportedDegree { site, degree }),
        }
    }
    Ok(Absorption { field, compensated, flips, shifted })
}

/// `Π R_z(θ_i) Π_edges CZ |+⟩^N`: the graph state with the raw rotations.
pub fn ideal_cz_network_state(lattice: &Lattice, raw: &AngleField) -> Result<PureState> {
    raw.validate(lattice)?;
    let mut state = PureState::plus(lattice.num_sites())?;
    let gate = cz();
    for &(a, b) in lattice.edges() {
        state.apply_local_unitary(&[a, b], &gate)?;
    }
    for site in 0..lattice.num_sites() {
        state.apply_local_unitary(&[site], &rz(raw.angle(site)))?;
    }
    Ok(state)
}
