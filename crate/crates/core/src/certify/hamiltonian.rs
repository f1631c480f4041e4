use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AngleField, Lattice};
use crate::linalg::{hadamard, identity, pauli_x, pauli_z, rz, tensor, Matrix};
use crate::statevec::PureState;

/// `h_i = (I − R_z(θ_i) X_i R_z(θ_i)† Π_{j∈N(i)} Z_j) / 2`.
///
/// The support lists the center first and then its neighbours in increasing
/// order; bit `k` of the local matrix index is `support[k]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalTerm {
    pub center: usize,
    pub support: Vec<usize>,
    pub angle: f64,
    #[serde(skip)]
    pub operator: Matrix,
}

impl LocalTerm {
    pub fn new(center: usize, neighbors: &[usize], angle: f64) -> Self {
        let r = rz(angle);
        let mut stabilizer = &r * pauli_x() * r.adjoint();
        let mut support = vec![center];
        for &j in neighbors {
            stabilizer = tensor(&stabilizer, &pauli_z());
            support.push(j);
        }
        let dim = 1 << support.len();
        let operator = (identity(dim) - stabilizer) * crate::linalg::C64::from(0.5);
        Self { center, support, angle, operator }
    }

    /// `⟨ψ|h|ψ⟩`.
    pub fn expectation(&self, state: &PureState) -> Result<f64> {
        Ok(state.expectation(&self.support, &self.operator)?.re)
    }

    /// Distribution of the support outcomes when the center is measured in
    /// the rotated X basis and the neighbours in Z. Entry `k` has the
    /// reading of `support[j]` in bit `j`; the term's eigenvalue is the
    /// parity of `k`.
    pub fn local_distribution(&self, state: &PureState) -> Result<Vec<f64>> {
        let mut rotated = state.clone();
        rotated.apply_matrix(&[self.center], &(hadamard() * rz(-self.angle)))?;
        rotated.z_marginal(&self.support)
    }
}

/// One term per site, centred on that site with its lattice neighbours.
pub fn parent_hamiltonian(lattice: &Lattice, field: &AngleField) -> Result<Vec<LocalTerm>> {
    if field.len() < lattice.num_sites() {
        return Err(Error::MissingAngle(field.len()));
    }
    field.validate(lattice)?;
    Ok((0..lattice.num_sites()).map(|i| LocalTerm::new(i, lattice.neighbors(i), field.angle(i))).collect())
}

/// Outcome counts of one term's measurement setting, indexed like
/// [`LocalTerm::local_distribution`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermTally {
    pub center: usize,
    pub counts: Vec<u64>,
}

impl TermTally {
    pub fn samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of readings with eigenvalue 1.
    pub fn ones(&self) -> u64 {
        self.counts.iter().enumerate().filter(|(k, _)| k.count_ones() % 2 == 1).map(|(_, c)| c).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermEstimate {
    pub center: usize,
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub total: f64,
    pub std_error: f64,
    pub terms: Vec<TermEstimate>,
}

/// Sums the per-term sample means. Each term needs at least one reading.
pub fn energy_estimate(tallies: &[TermTally], terms: &[LocalTerm]) -> Result<EnergyEstimate> {
    if tallies.len() != terms.len() {
        return Err(Error::LengthMismatch { expected: terms.len(), found: tallies.len() });
    }
    let mut estimates = Vec::with_capacity(terms.len());
    for (tally, term) in tallies.iter().zip(terms) {
        if tally.center != term.center || tally.counts.len() != 1 << term.support.len() {
            return Err(Error::SupportMismatch(format!("tally for site {} does not fit its term", tally.center)));
        }
        let samples = tally.samples();
        if samples == 0 {
            return Err(Error::EmptyRecords(term.center));
        }
        let mean = tally.ones() as f64 / samples as f64;
        let std_error = (mean * (1.0 - mean) / samples as f64).sqrt();
        estimates.push(TermEstimate { center: term.center, samples, mean, std_error });
    }
    let total = estimates.iter().map(|t| t.mean).sum();
    let std_error = estimates.iter().map(|t| t.std_error.powi(2)).sum::<f64>().sqrt();
    Ok(EnergyEstimate { total, std_error, terms: estimates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::canonical_angle_field;
    use crate::linalg::{unitarity_deviation, C64};
    use crate::mbqc::ideal_cz_network_state;
    use nalgebra::DMatrix;

    fn total_energy(terms: &[LocalTerm], state: &PureState) -> f64 {
        terms.iter().map(|t| t.expectation(state).unwrap()).sum()
    }

    #[test]
    fn terms_are_projectors() {
        let t = LocalTerm::new(0, &[1, 2, 3], 0.7);
        let h = &t.operator;
        assert!((h - h.adjoint()).iter().all(|x| x.norm() < 1e-12));
        assert!((h * h - h).iter().all(|x| x.norm() < 1e-12));
        let reflection = DMatrix::<C64>::identity(16, 16) - h * C64::from(2.0);
        assert!(unitarity_deviation(&reflection) < 1e-12);
    }

    #[test]
    fn ideal_states_have_zero_energy() {
        let l = Lattice::brickwork(1, 1).unwrap();
        let zero = AngleField::zeros(7);
        let terms = parent_hamiltonian(&l, &zero).unwrap();
        let s = ideal_cz_network_state(&l, &zero).unwrap();
        assert!(terms.iter().all(|t| t.expectation(&s).unwrap().abs() < 1e-12));

        let field = canonical_angle_field(&l).unwrap();
        let terms = parent_hamiltonian(&l, &field).unwrap();
        let s = ideal_cz_network_state(&l, &field).unwrap();
        assert!(total_energy(&terms, &s).abs() < 1e-10);
    }

    #[test]
    fn single_x_error_costs_at_least_one() {
        let l = Lattice::brickwork(1, 1).unwrap();
        let field = canonical_angle_field(&l).unwrap();
        let terms = parent_hamiltonian(&l, &field).unwrap();
        for site in 0..7 {
            let mut s = ideal_cz_network_state(&l, &field).unwrap();
            s.apply_local_unitary(&[site], &pauli_x()).unwrap();
            assert!(total_energy(&terms, &s) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn local_distribution_parity_is_the_expectation() {
        let l = Lattice::brickwork(1, 1).unwrap();
        let field = canonical_angle_field(&l).unwrap();
        let terms = parent_hamiltonian(&l, &field).unwrap();
        let mut s = ideal_cz_network_state(&l, &field).unwrap();
        s.apply_local_unitary(&[3], &rz(0.8)).unwrap();
        for t in &terms {
            let d = t.local_distribution(&s).unwrap();
            let odd: f64 = d.iter().enumerate().filter(|(k, _)| k.count_ones() % 2 == 1).map(|(_, p)| p).sum();
            assert!((odd - t.expectation(&s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_has_unique_ground_state_and_unit_gap() {
        let l = Lattice::brickwork(1, 1).unwrap();
        let field = canonical_angle_field(&l).unwrap();
        let terms = parent_hamiltonian(&l, &field).unwrap();
        let n = 7;
        let mut h = DMatrix::<C64>::zeros(1 << n, 1 << n);
        for col in 0..1u64 << n {
            let basis = PureState::basis(n, col).unwrap();
            for t in &terms {
                let mut image = basis.clone();
                image.apply_matrix(&t.support, &t.operator).unwrap();
                for (row, a) in image.amplitudes().iter().enumerate() {
                    h[(row, col as usize)] += a;
                }
            }
        }
        let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        assert!(eig[0].abs() < 1e-9);
        assert!((eig[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn estimates_from_tallies() {
        let terms = vec![LocalTerm::new(0, &[1], 0.0), LocalTerm::new(1, &[0], 0.0)];
        let zeros =
            vec![TermTally { center: 0, counts: vec![5, 0, 0, 5] }, TermTally { center: 1, counts: vec![10, 0, 0, 0] }];
        assert_eq!(energy_estimate(&zeros, &terms).unwrap().total, 0.0);
        let half =
            vec![TermTally { center: 0, counts: vec![5, 5, 0, 0] }, TermTally { center: 1, counts: vec![10, 0, 0, 0] }];
        let e = energy_estimate(&half, &terms).unwrap();
        assert_eq!(e.terms[0].mean, 0.5);
        assert_eq!(e.total, 0.5);
        let empty =
            vec![TermTally { center: 0, counts: vec![0; 4] }, TermTally { center: 1, counts: vec![1, 0, 0, 0] }];
        assert!(matches!(energy_estimate(&empty, &terms), Err(Error::EmptyRecords(0))));
    }
}
