//! The random two-qubit brick ensemble and output-distribution statistics.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cis, cz, hadamard, rz, tensor, Matrix, C64, ONE, ZERO};
use crate::statevec::{Basis, Distribution, PureState};

/// Physical layout of one brick: two rows of five sites, inputs in column 0,
/// outputs in column 4, vertical links in columns 2 and 4.
const BRICK_COLS: usize = 5;
const BRICK_LINKS: [usize; 2] = [2, 4];

/// Angle slots `α, β, γ, δ` per row, top row first.
pub const SLOTS: [&str; 8] = ["alpha", "beta", "gamma", "delta", "alpha'", "beta'", "gamma'", "delta'"];

/// A brick of the random ensemble: eight rotation angles on the `π/4` grid
/// and the two-qubit unitary they realize.
#[derive(Clone, Debug, PartialEq)]
pub struct BrickGate {
    /// Grid indices `k`, angle `kπ/4`, in [`SLOTS`] order.
    pub steps: [u8; 8],
    pub unitary: Matrix,
}

fn hr(theta: f64) -> Matrix {
    hadamard() * rz(theta)
}

impl BrickGate {
    pub fn from_steps(steps: [u8; 8]) -> Result<Self> {
        if let Some(k) = steps.iter().find(|&&k| k > 7) {
            return Err(Error::InvalidParameter(format!("grid index {k} is outside 0..=7")));
        }
        let angles: Vec<f64> = steps.iter().map(|&k| f64::from(k) * FRAC_PI_4).collect();
        Ok(Self { steps, unitary: brick_operator(&angles)? })
    }

    pub fn angles(&self) -> [f64; 8] {
        self.steps.map(|k| f64::from(k) * FRAC_PI_4)
    }

    /// `CZ (HR(δ)⊗HR(δ′)) (HR(γ)⊗HR(γ′)) CZ (HR(β)⊗HR(β′)) (HR(α)⊗HR(α′))`,
    /// with `HR(θ) = H R_z(θ)` and the unprimed angles on the lower site.
    pub fn circuit(&self) -> Matrix {
        let a = self.angles();
        let layer = |i: usize| tensor(&hr(a[i]), &hr(a[i + 4]));
        cz() * layer(3) * layer(2) * cz() * layer(1) * layer(0)
    }
}

/// Simulates the brick as a measurement pattern with every outcome 0 and
/// returns the (normalized) operator carried from column 0 to column 4.
fn brick_operator(angles: &[f64]) -> Result<Matrix> {
    let idx = |row: usize, col: usize| row * BRICK_COLS + col;
    let plus = [C64::from(FRAC_1_SQRT_2); 2];
    let ket = |b: usize| if b == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
    let mut op = Matrix::zeros(4, 4);
    for input in 0..4 {
        let mut factors = vec![plus; 2 * BRICK_COLS];
        factors[idx(0, 0)] = ket(input & 1);
        factors[idx(1, 0)] = ket(input >> 1);
        let mut state = PureState::product(&factors)?;
        for row in 0..2 {
            for col in 0..BRICK_COLS - 1 {
                state.apply_matrix(&[idx(row, col), idx(row, col + 1)], &cz())?;
            }
        }
        for col in BRICK_LINKS {
            state.apply_matrix(&[idx(0, col), idx(1, col)], &cz())?;
        }
        for row in 0..2 {
            for col in 0..BRICK_COLS - 1 {
                state.apply_matrix(&[idx(row, col)], &rz(angles[4 * row + col]))?;
            }
        }
        let mut measured: Vec<usize> =
            (0..2).flat_map(|row| (0..BRICK_COLS - 1).map(move |col| idx(row, col))).collect();
        measured.sort_unstable_by(|a, b| b.cmp(a));
        for site in measured {
            state = state.project(site, Basis::X, false)?.0;
        }
        for (row, amp) in state.amplitudes().iter().enumerate() {
            op[(row, input)] = *amp;
        }
    }
    // Each of the eight measurements scales the branch by 1/√2.
    Ok(op * C64::from(16.0))
}

/// Eight independent grid indices drawn uniformly from `0..8`.
pub fn random_brick_gate(seed: u64) -> Result<BrickGate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_brick_gate_from(&mut rng)
}

fn random_brick_gate_from(rng: &mut ChaCha8Rng) -> Result<BrickGate> {
    let mut steps = [0u8; 8];
    for s in &mut steps {
        *s = rng.random_range(0..8);
    }
    BrickGate::from_steps(steps)
}

/// `|det M|` of the 2×2 coefficient matrix of a two-qubit state; zero
/// exactly for product states, `1/2` for maximally entangled ones.
fn concurrence_half(v: &[C64]) -> f64 {
    (v[0] * v[3] - v[1] * v[2]).norm()
}

const ENTANGLEMENT_TOL: f64 = 1e-8;

/// Whether some product input leaves the gate entangled, searched over a
/// grid of single-qubit states on each side.
pub fn is_entangling(gate: &BrickGate) -> bool {
    let grid: Vec<[C64; 2]> = (0..7)
        .flat_map(|t| {
            (0..5).map(move |p| {
                let theta = 0.37 + f64::from(t) * PI / 7.0;
                let phi = 0.11 + f64::from(p) * 2.0 * PI / 5.0;
                [C64::from((theta / 2.0).cos()), cis(phi) * (theta / 2.0).sin()]
            })
        })
        .collect();
    grid.iter().any(|a| {
        grid.iter().any(|b| {
            let input = nalgebra::DVector::from_vec(vec![a[0] * b[0], a[1] * b[0], a[0] * b[1], a[1] * b[1]]);
            let out = &gate.unitary * input;
            concurrence_half(out.as_slice()) > ENTANGLEMENT_TOL
        })
    })
}

/// Number of nonzero singular values of the realigned matrix
/// `R[(a′ a), (b′ b)] = U[(a′ b′), (a b)]`, i.e. the number of product terms
/// needed to write `U = Σ A_k ⊗ B_k`.
pub fn operator_schmidt_rank(u: &Matrix) -> usize {
    let mut r = Matrix::zeros(4, 4);
    for out in 0..4 {
        for inp in 0..4 {
            let (oa, ob, ia, ib) = (out & 1, out >> 1, inp & 1, inp >> 1);
            r[(oa * 2 + ia, ob * 2 + ib)] = u[(out, inp)];
        }
    }
    let scale = r.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    r.singular_values().iter().filter(|&&s| s > 1e-9 * scale).count()
}

/// The closed-form rule: the brick entangles iff `δ` or `δ′` is neither
/// `0` nor `π`.
pub fn entangling_by_angles(gate: &BrickGate) -> bool {
    gate.steps[3] % 4 != 0 || gate.steps[7] % 4 != 0
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `{2^N q_x}` and `Exp(1)`.
pub fn porter_thomas_stat(dist: &Distribution) -> Result<f64> {
    let len = dist.probabilities().len();
    if len < 16 {
        return Err(Error::InvalidParameter(format!("support of {len} outcomes is below 16")));
    }
    let mut scaled: Vec<f64> = dist.probabilities().iter().map(|p| p * len as f64).collect();
    scaled.sort_by(f64::total_cmp);
    let n = len as f64;
    let ks = scaled
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = 1.0 - (-v).exp();
            ((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n)
        })
        .fold(0.0, f64::max);
    Ok(ks)
}

/// X-basis output distribution of a random brickwork circuit on `wires`
/// qubits: start from `|+⟩`, apply `layers` staggered layers of random
/// bricks, with wires left without a partner receiving the four `H R_z`
/// steps of a brick row alone.
pub fn random_instance_distribution(wires: usize, layers: usize, seed: u64) -> Result<Distribution> {
    if wires == 0 {
        return Err(Error::InvalidParameter("need at least one wire".into()));
    }
    let mut state = PureState::plus(wires)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in 0..layers {
        let offset = layer % 2;
        let mut paired = vec![false; wires];
        let mut w = offset;
        while w + 1 < wires {
            let gate = random_brick_gate_from(&mut rng)?;
            state.apply_local_unitary(&[w, w + 1], &gate.unitary)?;
            paired[w] = true;
            paired[w + 1] = true;
            w += 2;
        }
        for (site, _) in paired.iter().enumerate().filter(|(_, p)| !**p) {
            let mut u = Matrix::identity(2, 2);
            for _ in 0..4 {
                u = hr(f64::from(rng.random_range(0..8u8)) * FRAC_PI_4) * u;
            }
            state.apply_local_unitary(&[site], &u)?;
        }
    }
    state.full_distribution()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub ks: f64,
    pub ks_uniform: f64,
    pub entangling_fraction: f64,
    pub detectors_agree: bool,
    pub trials: usize,
}

/// Mean Porter–Thomas distance over `trials` random instances, and the
/// entangling fraction over `trials` random bricks. Trial `t` uses seed
/// `seed + t`.
pub fn ensemble_stats(wires: usize, layers: usize, trials: usize, seed: u64) -> Result<EnsembleStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let per_trial: Vec<(f64, bool, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = seed.wrapping_add(t);
            let ks = porter_thomas_stat(&random_instance_distribution(wires, layers, s)?)?;
            let gate = random_brick_gate(s)?;
            let ent = is_entangling(&gate);
            Ok((ks, ent, ent == (operator_schmidt_rank(&gate.unitary) > 1)))
        })
        .collect::<Result<_>>()?;
    let n = trials as f64;
    Ok(EnsembleStats {
        ks: per_trial.iter().map(|t| t.0).sum::<f64>() / n,
        ks_uniform: 1.0 - (-1.0f64).exp(),
        entangling_fraction: per_trial.iter().filter(|t| t.1).count() as f64 / n,
        detectors_agree: per_trial.iter().all(|t| t.2),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, is_unitary, max_abs_diff, phase_fidelity};
    use rand_distr::{Distribution as _, Exp1};

    #[test]
    fn pattern_matches_circuit() {
        for seed in 0..40 {
            let g = random_brick_gate(seed).unwrap();
            assert!(max_abs_diff(&g.unitary, &g.circuit()) < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn zero_angles_give_the_clifford_skeleton() {
        let g = BrickGate::from_steps([0; 8]).unwrap();
        let h2 = tensor(&hadamard(), &hadamard());
        let skeleton = cz() * &h2 * &h2 * cz() * &h2 * &h2;
        assert!(max_abs_diff(&g.unitary, &skeleton) < 1e-12);
        assert!(phase_fidelity(&g.unitary, &identity(4)) > 1.0 - 1e-12);
        assert!(!is_entangling(&g));
    }

    #[test]
    fn seeded_draws_repeat() {
        assert_eq!(random_brick_gate(9).unwrap(), random_brick_gate(9).unwrap());
        assert!(BrickGate::from_steps([8, 0, 0, 0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn grid_frequencies_are_uniform() {
        let mut counts = [[0u32; 8]; 8];
        for seed in 0..10_000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut steps = [0u8; 8];
            for s in &mut steps {
                *s = rng.random_range(0..8);
            }
            for (slot, &k) in steps.iter().enumerate() {
                counts[slot][k as usize] += 1;
            }
        }
        for slot in counts {
            for c in slot {
                assert!((f64::from(c) / 10_000.0 - 0.125).abs() < 0.02);
            }
        }
    }

    #[test]
    fn entangling_examples() {
        let mut steps = [0; 8];
        steps[3] = 1;
        assert!(is_entangling(&BrickGate::from_steps(steps).unwrap()));
        for (d, dp) in [(0, 0), (0, 4), (4, 0), (4, 4)] {
            let steps = [3, 5, 1, d, 2, 7, 6, dp];
            let g = BrickGate::from_steps(steps).unwrap();
            assert!(!is_entangling(&g));
            assert_eq!(operator_schmidt_rank(&g.unitary), 1);
        }
    }

    #[test]
    fn detectors_agree_with_angle_rule() {
        for seed in 0..300 {
            let g = random_brick_gate(seed).unwrap();
            assert!(is_unitary(&g.unitary, 1e-10));
            let e = is_entangling(&g);
            assert_eq!(e, operator_schmidt_rank(&g.unitary) > 1, "seed {seed}");
            assert_eq!(e, entangling_by_angles(&g), "seed {seed}");
        }
    }

    #[test]
    fn schmidt_rank_of_known_gates() {
        assert_eq!(operator_schmidt_rank(&identity(4)), 1);
        assert_eq!(operator_schmidt_rank(&cz()), 2);
        let swap = crate::linalg::from_rows(
            4,
            &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE],
        );
        assert_eq!(operator_schmidt_rank(&swap), 4);
    }

    #[test]
    fn porter_thomas_of_uniform() {
        let ks = porter_thomas_stat(&Distribution::uniform(6)).unwrap();
        assert!((ks - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!(porter_thomas_stat(&Distribution::uniform(3)).is_err());
    }

    #[test]
    fn porter_thomas_of_exponential_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw: Vec<f64> = (0..1 << 12).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        let d = Distribution::new(12, raw.iter().map(|x| x / total).collect()).unwrap();
        assert!(porter_thomas_stat(&d).unwrap() <= 0.05);
    }

    #[test]
    fn instances() {
        let d = random_instance_distribution(5, 0, 1).unwrap();
        assert!((d.prob(0) - 1.0).abs() < 1e-12);
        let a = random_instance_distribution(6, 4, 3).unwrap();
        assert_eq!(a, random_instance_distribution(6, 4, 3).unwrap());
        assert!((a.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deep_instances_move_toward_porter_thomas() {
        let stats = ensemble_stats(8, 8, 6, 42).unwrap();
        assert!(stats.ks < stats.ks_uniform);
        assert!(stats.detectors_agree);
    }
}
