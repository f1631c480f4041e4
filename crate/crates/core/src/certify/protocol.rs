use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AngleField, Lattice};
use crate::statevec::Distribution;

use super::budget::{fidelity_and_trace_bounds, sample_budget_for_sites, NoiseBudget};
use super::hamiltonian::{energy_estimate, parent_hamiltonian, LocalTerm, TermEstimate, TermTally};
use super::mixed::MixedState;
use super::noise::apply_noise_to_distribution;

/// Gap of the parent Hamiltonian and norm of each of its terms.
const GAP: f64 = 1.0;
const TERM_NORM: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Outcome bit-flip rate of the measurement apparatus. It corrupts the
    /// term readings and is compared against the per-site cap.
    pub noise_flip: f64,
    /// Readings per term; defaults to the sample budget.
    pub samples_per_term: Option<u64>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { epsilon: 0.1, alpha: 0.05, seed: 0, noise_flip: 0.0, samples_per_term: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
    InsufficientSamples,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificationReport {
    pub num_sites: usize,
    pub config: CertifyConfig,
    pub budget: NoiseBudget,
    pub samples_required: u64,
    pub samples_min: u64,
    pub energy: f64,
    pub energy_std_error: f64,
    pub terms: Vec<TermEstimate>,
    pub fidelity_bound: f64,
    pub trace_distance_bound: f64,
    pub acceptance_threshold: f64,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

/// Draws `n` multinomial counts by sequential binomials.
fn multinomial(n: u64, probs: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).map_err(|e| Error::InvalidParameter(e.to_string()))?.sample(rng);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(counts)
}

/// Simulated readings of every term: `samples` draws from each term's
/// measurement setting on `rho`, with outcome bits flipped at rate `flip`.
/// Term `k` uses stream `k` of a ChaCha generator seeded with `seed`.
pub fn simulate_tallies(
    rho: &MixedState,
    terms: &[LocalTerm],
    samples: u64,
    flip: f64,
    seed: u64,
) -> Result<Vec<TermTally>> {
    terms
        .par_iter()
        .enumerate()
        .map(|(k, term)| {
            let local = rho.local_distribution(term)?;
            let total: f64 = local.iter().sum();
            let local = Distribution::new(term.support.len(), local.iter().map(|p| p / total).collect())?;
            let noisy = apply_noise_to_distribution(&local, flip)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let counts = multinomial(samples, noisy.probabilities(), &mut rng)?;
            Ok(TermTally { center: term.center, counts })
        })
        .collect()
}

/// Turns term readings into a report: energy estimate, fidelity and
/// trace-distance bounds, and a verdict against the noise budget.
pub fn certify_tallies(
    tallies: &[TermTally],
    terms: &[LocalTerm],
    num_sites: usize,
    config: &CertifyConfig,
) -> Result<CertificationReport> {
    let budget = NoiseBudget::split(config.epsilon, num_sites)?;
    let required = sample_budget_for_sites(num_sites, GAP, TERM_NORM, budget.eps_prime, config.alpha)?;
    let estimate = energy_estimate(tallies, terms)?;
    let (fidelity_bound, trace_distance_bound) = fidelity_and_trace_bounds(estimate.total, GAP, budget.eps_prime)?;
    let samples_min = estimate.terms.iter().map(|t| t.samples).min().unwrap_or(0);
    let threshold = budget.acceptance_threshold();

    let mut reasons = Vec::new();
    let verdict = if samples_min < required {
        reasons.push(format!("{samples_min} readings on some term, {required} required"));
        Verdict::InsufficientSamples
    } else {
        if config.noise_flip > budget.per_site_cap {
            reasons.push(format!("flip rate {} exceeds the per-site cap {}", config.noise_flip, budget.per_site_cap));
        }
        if fidelity_bound < threshold {
            reasons.push(format!("fidelity bound {fidelity_bound} below threshold {threshold}"));
        }
        if reasons.is_empty() {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    };

    Ok(CertificationReport {
        num_sites,
        config: config.clone(),
        budget,
        samples_required: required,
        samples_min,
        energy: estimate.total,
        energy_std_error: estimate.std_error,
        terms: estimate.terms,
        fidelity_bound,
        trace_distance_bound,
        acceptance_threshold: threshold,
        verdict,
        reasons,
    })
}

/// Full pipeline on a simulated prepared state `rho`, certifying it against
/// the rotated graph state of `lattice` with angles `field`.
pub fn certify(
    rho: &MixedState,
    lattice: &Lattice,
    field: &AngleField,
    config: &CertifyConfig,
) -> Result<CertificationReport> {
    if rho.num_qubits() != lattice.num_sites() {
        return Err(Error::LengthMismatch { expected: lattice.num_sites(), found: rho.num_qubits() });
    }
    let n = lattice.num_sites();
    let budget = NoiseBudget::split(config.epsilon, n)?;
    let required = sample_budget_for_sites(n, GAP, TERM_NORM, budget.eps_prime, config.alpha)?;
    let samples = config.samples_per_term.unwrap_or(required);
    let terms = parent_hamiltonian(lattice, field)?;
    let tallies = simulate_tallies(rho, &terms, samples, config.noise_flip, config.seed)?;
    certify_tallies(&tallies, &terms, n, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::canonical_angle_field;
    use crate::linalg::pauli_x;
    use crate::mbqc::ideal_cz_network_state;

    fn setup() -> (Lattice, AngleField, MixedState) {
        let l = Lattice::brickwork(1, 1).unwrap();
        let f = canonical_angle_field(&l).unwrap();
        let s = ideal_cz_network_state(&l, &f).unwrap();
        (l, f, MixedState::pure(s))
    }

    #[test]
    fn multinomial_conserves_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = multinomial(1_000_000, &[0.1, 0.0, 0.6, 0.3], &mut rng).unwrap();
        assert_eq!(c.iter().sum::<u64>(), 1_000_000);
        assert_eq!(c[1], 0);
        assert!((c[2] as f64 / 1e6 - 0.6).abs() < 0.005);
    }

    #[test]
    fn ideal_state_is_accepted() {
        let (l, f, rho) = setup();
        let r = certify(&rho, &l, &f, &CertifyConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Accept, "{:?}", r.reasons);
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.trace_distance_bound, (1.0f64 - (1.0 - r.budget.eps_prime).powi(2)).sqrt());
    }

    #[test]
    fn x_error_is_rejected() {
        let (l, f, rho) = setup();
        let mut bad = rho.members().next().unwrap().1.clone();
        bad.apply_local_unitary(&[2], &pauli_x()).unwrap();
        let config = CertifyConfig { epsilon: 0.05, ..Default::default() };
        let r = certify(&MixedState::pure(bad), &l, &f, &config).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
        assert!(r.energy >= 1.0 - 1e-12);
        assert_eq!(r.fidelity_bound, 0.0);
    }

    #[test]
    fn too_few_samples_are_flagged() {
        let (l, f, rho) = setup();
        let config = CertifyConfig { samples_per_term: Some(100), ..Default::default() };
        let r = certify(&rho, &l, &f, &config).unwrap();
        assert_eq!(r.verdict, Verdict::InsufficientSamples);
    }

    #[test]
    fn excessive_flip_rate_is_rejected() {
        let (l, f, rho) = setup();
        let config = CertifyConfig { noise_flip: 0.05, samples_per_term: None, ..Default::default() };
        let r = certify(&rho, &l, &f, &config).unwrap();
        assert_eq!(r.verdict, Verdict::Reject);
    }

    #[test]
    fn reports_are_reproducible() {
        let (l, f, rho) = setup();
        let rho = rho.depolarize(4, 0.2).unwrap();
        let config = CertifyConfig { seed: 11, ..Default::default() };
        let a = certify(&rho, &l, &f, &config).unwrap();
        let b = certify(&rho, &l, &f, &config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let exact = rho.energy(&parent_hamiltonian(&l, &f).unwrap()).unwrap();
        assert!((a.energy - exact).abs() <= 4.0 * a.energy_std_error + 1e-12);
    }
}
