//! Cross-checks between independent code paths on small random instances.

use std::f64::consts::PI;

use brickwork::certify::{parent_hamiltonian, MixedState};
use brickwork::linalg::C64;
use brickwork::mbqc::ideal_cz_network_state;
use brickwork::partition::partition_function;
use brickwork::{AngleField, Bitstring, Lattice, PhaseProgram, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng, sites: usize) -> Lattice {
    let mut edges = Vec::new();
    for a in 0..sites {
        for b in a + 1..sites {
            if rng.random_bool(0.4) {
                edges.push((a, b));
            }
        }
    }
    Lattice::custom(1, sites as i64, &edges).unwrap()
}

fn random_field(rng: &mut ChaCha8Rng, sites: usize) -> AngleField {
    AngleField::new((0..sites).map(|_| rng.random_range(-PI..PI)).collect(), rng.random_range(0.1..1.5))
}

/// `Σ_z exp(i(J Σ z_a z_b + Σ (B_i + x_i π/2) z_i))` written out directly.
fn naive_partition(lattice: &Lattice, field: &AngleField, x: u64) -> C64 {
    let n = lattice.num_sites();
    let spin = |z: u64, i: usize| if (z >> i) & 1 == 0 { 1.0 } else { -1.0 };
    (0..1u64 << n)
        .map(|z| {
            let coupling: f64 = lattice.edges().iter().map(|&(a, b)| spin(z, a) * spin(z, b)).sum();
            let local: f64 =
                (0..n).map(|i| (field.field(i) + if (x >> i) & 1 == 1 { PI / 2.0 } else { 0.0 }) * spin(z, i)).sum();
            let phase = field.coupling() * coupling + local;
            C64::new(phase.cos(), phase.sin())
        })
        .sum()
}

#[test]
fn partition_matches_naive_sum_and_born_rule_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..12 {
        let n = rng.random_range(1..=8);
        let lattice = random_graph(&mut rng, n);
        let field = random_field(&mut rng, n);
        let mut state = PureState::plus(n).unwrap();
        state.apply_phase_program(&PhaseProgram::from_hamiltonian(&lattice, &field).unwrap()).unwrap();
        let dist = state.full_distribution().unwrap();
        for x in 0..1u64 << n {
            let z = partition_function(&lattice, &field, Bitstring::new(x, n).unwrap()).unwrap().value;
            let naive = naive_partition(&lattice, &field, x);
            assert!((z - naive).norm() <= 1e-9 * (1u64 << n) as f64, "n={n} x={x}");
            let q = z.norm_sqr() / 4f64.powi(n as i32);
            assert!((q - dist.prob(x)).abs() <= 1e-12);
        }
    }
}

#[test]
fn x_basis_amplitudes_square_to_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lattice = random_graph(&mut rng, 6);
    let field = random_field(&mut rng, 6);
    let mut state = PureState::plus(6).unwrap();
    state.apply_phase_program(&PhaseProgram::from_hamiltonian(&lattice, &field).unwrap()).unwrap();
    let dist = state.full_distribution().unwrap();
    for x in Bitstring::all(6) {
        let a = state.x_basis_amplitude(x).unwrap();
        assert!((a.norm_sqr() - dist.prob(x.bits())).abs() <= 1e-14);
    }
}

/// Trace norm of `ρ − |ψ⟩⟨ψ|` from a dense Hermitian eigendecomposition.
fn dense_trace_distance(rho: &MixedState, target: &PureState) -> f64 {
    let mut m = rho.density_matrix();
    let psi = target.amplitudes();
    for r in 0..psi.len() {
        for c in 0..psi.len() {
            m[(r, c)] -= psi[r] * psi[c].conj();
        }
    }
    0.5 * m.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).sum::<f64>()
}

#[test]
fn ensemble_trace_distance_matches_dense_eigenvalues() {
    let lattice = Lattice::brickwork(1, 1).unwrap();
    let field = brickwork::canonical_angle_field(&lattice).unwrap();
    let target = ideal_cz_network_state(&lattice, &field).unwrap();
    let pure = MixedState::pure(target.clone());
    for (site, p) in [(0, 0.0), (2, 0.1), (3, 0.3), (6, 0.7)] {
        let rho = pure.depolarize(site, p).unwrap().depolarize((site + 1) % 7, p / 2.0).unwrap();
        let fast = rho.trace_distance(&target);
        let dense = dense_trace_distance(&rho, &target);
        assert!((fast - dense).abs() <= 1e-10, "site {site} p {p}: {fast} vs {dense}");
    }
}

#[test]
fn parent_hamiltonian_annihilates_target_and_penalizes_errors() {
    let lattice = Lattice::cluster(2, 3).unwrap();
    let field = AngleField::new(vec![0.2, 1.0, -0.4, 2.2, 0.0, PI / 8.0], PI / 4.0);
    let terms = parent_hamiltonian(&lattice, &field).unwrap();
    let target = ideal_cz_network_state(&lattice, &field).unwrap();
    let pure = MixedState::pure(target.clone());
    assert!(pure.energy(&terms).unwrap().abs() <= 1e-12);
    for site in 0..lattice.num_sites() {
        let rho = pure.depolarize(site, 0.2).unwrap();
        let energy = rho.energy(&terms).unwrap();
        // The ground space is one-dimensional with gap 1, so H ≥ I − |ψ⟩⟨ψ|.
        assert!(energy >= 1.0 - rho.overlap(&target) - 1e-12);
    }
}

#[test]
fn empirical_sampling_converges() {
    let lattice = Lattice::brickwork(1, 1).unwrap();
    let field = brickwork::canonical_angle_field(&lattice).unwrap();
    let mut state = PureState::plus(7).unwrap();
    state.apply_phase_program(&PhaseProgram::from_hamiltonian(&lattice, &field).unwrap()).unwrap();
    let exact = state.full_distribution().unwrap();
    let empirical = state.sample(200_000, 17).unwrap().empirical().unwrap();
    let tvd = brickwork::partition::classical_trace_distance(&exact, &empirical).unwrap();
    assert!(tvd < 0.02, "tvd {tvd}");
}
