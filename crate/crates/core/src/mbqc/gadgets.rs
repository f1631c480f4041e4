use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    cis, cz, hadamard, identity, max_abs_diff, pauli_x, pauli_z, phase_fidelity, rz, tensor, z_phase, z_power,
    zz_phase, Matrix, C64, ONE, PI_8, ZERO,
};
use crate::statevec::{qubit_cap, Basis, PureState};

/// Pauli factor appearing in a byproduct rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Pauli {
    I,
    X,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix {
        match self {
            Pauli::I => identity(2),
            Pauli::X => pauli_x(),
            Pauli::Z => pauli_z(),
        }
    }
}

/// Flipping the postselected outcome at `position` turns the realized
/// operator `U` into `left · U · right`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Byproduct {
    pub position: usize,
    pub left: Pauli,
    pub right: Pauli,
}

/// A measurement pattern on a chain: rotation angles on the measured sites,
/// the postselected X outcomes, and the single-qubit operator the pattern is
/// claimed to implement on the input.
#[derive(Clone, Debug, PartialEq)]
pub struct Gadget {
    pub name: String,
    pub angles: Vec<f64>,
    pub postselection: Vec<bool>,
    pub target: Matrix,
    pub byproducts: Vec<Byproduct>,
}

impl Gadget {
    fn new(name: String, angles: Vec<f64>, postselection: Vec<bool>, target: Matrix) -> Self {
        let last = angles.len() - 1;
        let byproducts = vec![
            Byproduct { position: 0, left: Pauli::I, right: Pauli::Z },
            Byproduct { position: last, left: Pauli::X, right: Pauli::I },
        ];
        Self { name, angles, postselection, target, byproducts }
    }

    /// Number of measured sites. The simulated chain has one more site,
    /// which carries the output.
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// The operator realized by simulating the chain under the gadget's
    /// postselection.
    pub fn simulate(&self) -> Result<Matrix> {
        chain_operator(&self.angles, &self.postselection)
    }

    /// Phase-insensitive overlap between the simulated and target operators.
    pub fn fidelity(&self) -> Result<f64> {
        Ok(phase_fidelity(&self.simulate()?, &self.target))
    }

    /// Smallest fidelity over the declared byproduct rules, each checked by
    /// re-simulating with one outcome flipped.
    pub fn byproduct_fidelity(&self) -> Result<f64> {
        let mut worst = 1.0f64;
        for rule in &self.byproducts {
            let mut outcomes = self.postselection.clone();
            outcomes[rule.position] = !outcomes[rule.position];
            let realized = chain_operator(&self.angles, &outcomes)?;
            let expected = rule.left.matrix() * &self.target * rule.right.matrix();
            worst = worst.min(phase_fidelity(&realized, &expected));
        }
        Ok(worst)
    }
}

/// The (unnormalized) operator carried from site 0 to site `L` of a chain of
/// `L + 1` qubits.
///
/// Site 0 holds the input, the others start in `|+⟩`, consecutive sites are
/// joined by CZ, site `j < L` is rotated by `R_z(angles[j])` and then
/// measured in X with the given outcome. Column `b` is the output for input
/// `|b⟩`.
pub fn chain_operator(angles: &[f64], outcomes: &[bool]) -> Result<Matrix> {
    if angles.len() != outcomes.len() {
        return Err(Error::LengthMismatch { expected: angles.len(), found: outcomes.len() });
    }
    let n = angles.len() + 1;
    if n > qubit_cap() {
        return Err(Error::QubitCapExceeded { requested: n, cap: qubit_cap() });
    }
    let plus = [C64::from(std::f64::consts::FRAC_1_SQRT_2); 2];
    let mut op = Matrix::zeros(2, 2);
    for input in 0..2 {
        let mut factors = vec![plus; n];
        factors[0] = if input == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
        let mut state = PureState::product(&factors)?;
        for j in 0..n - 1 {
            state.apply_matrix(&[j, j + 1], &cz())?;
        }
        for (j, &theta) in angles.iter().enumerate() {
            state.apply_matrix(&[j], &rz(theta))?;
        }
        for &s in outcomes {
            state = state.project(0, Basis::X, s)?.0;
        }
        for (row, amp) in state.amplitudes().iter().enumerate() {
            op[(row, input)] = *amp;
        }
    }
    Ok(op)
}

/// `H Z^s R_z(θ)`: the gate teleported by one X measurement with outcome `s`
/// on a rotated site.
pub fn propagate_single_measurement(theta: f64, s: bool) -> Matrix {
    hadamard() * z_power(s) * rz(theta)
}

pub fn single_measurement_gadget(theta: f64, s: bool) -> Gadget {
    Gadget::new(
        format!("single(θ={theta:.6}, s={})", s as u8),
        vec![theta],
        vec![s],
        propagate_single_measurement(theta, s),
    )
}

/// Four measurements with angles `(θ/2, 0, −θ/2, 0)` and outcomes
/// `(0, s, 0, s)` implement `R_z(θ)^s`.
pub fn conditional_rotation_gadget(theta: f64, s: bool) -> Gadget {
    let target = if s { rz(theta) } else { identity(2) };
    Gadget::new(
        format!("conditional-rotation(θ={theta:.6}, s={})", s as u8),
        vec![theta / 2.0, 0.0, -theta / 2.0, 0.0],
        vec![false, s, false, s],
        target,
    )
}

/// The seven-site cell pattern `(π/8, 0, −π/4, 0, π/4, 0, −π/8)` under the
/// postselection `(s1⊕s3′, s2, 0, s2, 0, s3, 0)` with `k = 4 s1 + 2 s2 + s3`
/// implements `Z^{s3} H R_z(kπ/4) Z^{s3′}`.
pub fn hrz_k_gadget(k: u8, s3_prime: bool) -> Result<Gadget> {
    if k > 7 {
        return Err(Error::InvalidParameter(format!("k = {k} is outside 0..=7")));
    }
    let (s1, s2, s3) = (k & 4 != 0, k & 2 != 0, k & 1 != 0);
    let angles = crate::lattice::CELL_ANGLES.to_vec();
    let postselection = vec![s1 ^ s3_prime, s2, false, s2, false, s3, false];
    let target = z_power(s3) * hadamard() * rz(f64::from(k) * PI / 4.0) * z_power(s3_prime);
    Ok(Gadget::new(format!("hrz(k={k}, s3'={})", s3_prime as u8), angles, postselection, target))
}

/// `e^{iπ/4} e^{−iπ/4 I⊗Z} e^{−iπ/4 Z⊗I} e^{iπ/4 Z⊗Z}` and its largest
/// entry-wise deviation from CZ.
pub fn cz_phase_decomposition() -> (Matrix, f64) {
    let q = PI / 4.0;
    let product = tensor(&identity(2), &z_phase(-q)) * tensor(&z_phase(-q), &identity(2)) * zz_phase(q) * cis(q);
    let residual = max_abs_diff(&product, &cz());
    (product, residual)
}

/// One line of the gadget verification table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GadgetCheck {
    pub name: String,
    pub fidelity: f64,
    pub byproduct_fidelity: Option<f64>,
    pub passed: bool,
}

/// Fidelity threshold for gadget checks.
pub const GADGET_TOL: f64 = 1e-10;

/// Tolerance of the CZ decomposition residual.
pub const CZ_TOL: f64 = 1e-12;

fn check(g: &Gadget) -> Result<GadgetCheck> {
    let fidelity = g.fidelity()?;
    let by = g.byproduct_fidelity()?;
    Ok(GadgetCheck {
        name: g.name.clone(),
        fidelity,
        byproduct_fidelity: Some(by),
        passed: fidelity >= 1.0 - GADGET_TOL && by >= 1.0 - GADGET_TOL,
    })
}

/// Runs every gadget identity: the conditional rotation for `θ = kπ/8`,
/// `k = 0..15`, and `s ∈ {0, 1}`; all sixteen `H R_z(kπ/4)` cases; single
/// measurements on the `π/8` grid; and the CZ decomposition.
pub fn gadget_suite() -> Result<Vec<GadgetCheck>> {
    let mut out = Vec::new();
    for s in [false, true] {
        for k in 0..16 {
            out.push(check(&conditional_rotation_gadget(f64::from(k) * PI_8, s))?);
        }
    }
    for k in 0..8 {
        for s3p in [false, true] {
            out.push(check(&hrz_k_gadget(k, s3p)?)?);
        }
    }
    for s in [false, true] {
        for k in 0..16 {
            out.push(check(&single_measurement_gadget(f64::from(k) * PI_8, s))?);
        }
    }
    let (_, residual) = cz_phase_decomposition();
    out.push(GadgetCheck {
        name: "cz-phase-decomposition".into(),
        fidelity: 1.0 - residual,
        byproduct_fidelity: None,
        passed: residual <= CZ_TOL,
    });
    Ok(out)
}
