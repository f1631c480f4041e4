use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, C64, ZERO};
use crate::statevec::PureState;

use super::hamiltonian::LocalTerm;

/// A density matrix stored as a weighted ensemble `Σ_k w_k |ψ_k⟩⟨ψ_k|`.
///
/// Keeping the ensemble instead of the dense matrix makes distances to a
/// pure state cheap: everything lives in the span of at most `K + 1`
/// vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl MixedState {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::LengthMismatch { expected: states.len(), found: weights.len() });
        }
        let n = states[0].num_qubits();
        if states.iter().any(|s| s.num_qubits() != n) {
            return Err(Error::InvalidParameter("ensemble members differ in size".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter("ensemble weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { weights, states })
    }

    pub fn pure(state: PureState) -> Self {
        Self { weights: vec![1.0], states: vec![state] }
    }

    /// `ρ ↦ (1 − p) ρ + p · (I/2 ⊗ tr_site ρ)`, which equals
    /// `(1 − 3p/4) ρ + (p/4)(XρX + YρY + ZρZ)` on the chosen site.
    pub fn depolarize(&self, site: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing weight {p} must lie in [0, 1]")));
        }
        let mut weights = Vec::with_capacity(4 * self.states.len());
        let mut states = Vec::with_capacity(4 * self.states.len());
        for (w, s) in self.weights.iter().zip(&self.states) {
            weights.push(w * (1.0 - 0.75 * p));
            states.push(s.clone());
            if p > 0.0 {
                for pauli in [pauli_x(), pauli_y(), pauli_z()] {
                    let mut image = s.clone();
                    image.apply_local_unitary(&[site], &pauli)?;
                    weights.push(w * 0.25 * p);
                    states.push(image);
                }
            }
        }
        Ok(Self { weights, states })
    }

    pub fn num_qubits(&self) -> usize {
        self.states[0].num_qubits()
    }

    pub fn members(&self) -> impl Iterator<Item = (f64, &PureState)> {
        self.weights.iter().copied().zip(&self.states)
    }

    /// `tr(ρ H)` for a sum of local terms.
    pub fn energy(&self, terms: &[LocalTerm]) -> Result<f64> {
        let mut total = 0.0;
        for (w, s) in self.members() {
            for t in terms {
                total += w * t.expectation(s)?;
            }
        }
        Ok(total)
    }

    /// Outcome distribution of a term's measurement setting.
    pub fn local_distribution(&self, term: &LocalTerm) -> Result<Vec<f64>> {
        let mut out = vec![0.0; 1 << term.support.len()];
        for (w, s) in self.members() {
            for (o, p) in out.iter_mut().zip(term.local_distribution(s)?) {
                *o += w * p;
            }
        }
        Ok(out)
    }

    /// `⟨φ|ρ|φ⟩`, the squared fidelity with a pure state.
    pub fn overlap(&self, target: &PureState) -> f64 {
        self.members().map(|(w, s)| w * target.inner(s).norm_sqr()).sum()
    }

    /// Root fidelity `√⟨φ|ρ|φ⟩`.
    pub fn fidelity(&self, target: &PureState) -> f64 {
        self.overlap(target).sqrt()
    }

    /// Trace distance `½ ‖ρ − |φ⟩⟨φ|‖₁`, computed in an orthonormal basis of
    /// the span of `φ` and the ensemble members.
    pub fn trace_distance(&self, target: &PureState) -> f64 {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for v in std::iter::once(target).chain(&self.states) {
            let mut r = v.amplitudes().to_vec();
            for _ in 0..2 {
                for q in &basis {
                    let c: C64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in r.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
            let norm = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-10 {
                basis.push(r.into_iter().map(|x| x / norm).collect());
            }
        }
        let k = basis.len();
        let coords = |v: &PureState| -> Vec<C64> {
            basis.iter().map(|q| q.iter().zip(v.amplitudes()).map(|(a, b)| a.conj() * b).sum()).collect()
        };
        let mut delta = DMatrix::<C64>::from_element(k, k, ZERO);
        let mut add = |c: &[C64], w: f64| {
            for i in 0..k {
                for j in 0..k {
                    delta[(i, j)] += c[i] * c[j].conj() * w;
                }
            }
        };
        for (w, s) in self.members() {
            add(&coords(s), w);
        }
        add(&coords(target), -1.0);
        0.5 * delta.symmetric_eigen().eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
    }

    /// The dense density matrix; only sensible for a handful of qubits.
    pub fn density_matrix(&self) -> DMatrix<C64> {
        let dim = self.states[0].amplitudes().len();
        let mut rho = DMatrix::from_element(dim, dim, ZERO);
        for (w, s) in self.members() {
            let a = s.amplitudes();
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += a[i] * a[j].conj() * w;
                }
            }
        }
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{canonical_angle_field, Lattice};
    use crate::linalg::rz;
    use crate::mbqc::ideal_cz_network_state;

    fn dense_trace_distance(rho: &DMatrix<C64>, target: &PureState) -> f64 {
        let a = target.amplitudes();
        let mut d = rho.clone();
        for i in 0..a.len() {
            for j in 0..a.len() {
                d[(i, j)] -= a[i] * a[j].conj();
            }
        }
        0.5 * d.symmetric_eigen().eigenvalues.iter().map(|l| l.abs()).sum::<f64>()
    }

    #[test]
    fn pure_states() {
        let plus = PureState::plus(2).unwrap();
        let m = MixedState::pure(plus.clone());
        assert!(m.trace_distance(&plus) < 1e-12);
        assert!((m.fidelity(&plus) - 1.0).abs() < 1e-12);
        let zero = PureState::basis(2, 0).unwrap();
        // Pure-state trace distance is √(1 − |⟨φ|ψ⟩|²).
        let expected = (1.0f64 - 0.25).sqrt();
        assert!((m.trace_distance(&zero) - expected).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_oracle() {
        let l = Lattice::custom(1, 4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let f = crate::lattice::AngleField::new(vec![0.3, 1.0, -0.5, 2.2], std::f64::consts::FRAC_PI_4);
        let ideal = ideal_cz_network_state(&l, &f).unwrap();
        let mut tilted = ideal.clone();
        tilted.apply_local_unitary(&[2], &rz(0.4)).unwrap();
        for p in [0.0, 0.1, 0.5, 1.0] {
            let rho = MixedState::pure(tilted.clone()).depolarize(1, p).unwrap().depolarize(3, p / 2.0).unwrap();
            let dense = dense_trace_distance(&rho.density_matrix(), &ideal);
            assert!((rho.trace_distance(&ideal) - dense).abs() < 1e-10, "p={p}");
            let dm = rho.density_matrix();
            let tr: f64 = (0..16).map(|i| dm[(i, i)].re).sum();
            assert!((tr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_is_partial_trace_mixing() {
        let s = PureState::basis(1, 0).unwrap();
        let rho = MixedState::pure(s).depolarize(0, 1.0).unwrap().density_matrix();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15 && (rho[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!(rho[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn energy_grows_with_noise() {
        let l = Lattice::brickwork(1, 1).unwrap();
        let f = canonical_angle_field(&l).unwrap();
        let ideal = ideal_cz_network_state(&l, &f).unwrap();
        let terms = crate::certify::parent_hamiltonian(&l, &f).unwrap();
        let mut last = -1.0;
        for k in 0..=6 {
            let p = 0.05 * f64::from(k);
            let e = MixedState::pure(ideal.clone()).depolarize(3, p).unwrap().energy(&terms).unwrap();
            assert!(e >= last - 1e-12);
            last = e;
        }
    }

    #[test]
    fn rejects_bad_ensembles() {
        let s = PureState::plus(1).unwrap();
        assert!(MixedState::new(vec![0.5], vec![s.clone()]).is_err());
        assert!(MixedState::new(vec![1.5, -0.5], vec![s.clone(), s.clone()]).is_err());
        assert!(MixedState::new(vec![1.0], vec![]).is_err());
    }
}
