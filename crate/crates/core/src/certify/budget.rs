use serde::Serialize;

use crate::error::{Error, Result};

/// Fidelity lower bound `F* = clamp(1 − Ê/Δ, 0, 1)` and the trace-distance
/// bound `√(1 − max(F* − ε′, 0)²)`.
pub fn fidelity_and_trace_bounds(energy: f64, gap: f64, eps_prime: f64) -> Result<(f64, f64)> {
    if !(gap > 0.0) {
        return Err(Error::InvalidParameter(format!("gap Δ = {gap} must be positive")));
    }
    let f = (1.0 - energy / gap).clamp(0.0, 1.0);
    let shifted = (f - eps_prime).max(0.0);
    Ok((f, (1.0 - shifted * shifted).sqrt()))
}

/// Readings per term needed to estimate the energy within `ε′` with
/// confidence `1 − α`:
///
/// ```text
/// M = ⌈ J m²n² / (2 Δ² ε′²) · ln(−(mn + 1) / ln(1 − α)) ⌉
/// ```
pub fn sample_budget(m: usize, n: usize, gap: f64, norm: f64, eps_prime: f64, alpha: f64) -> Result<u64> {
    sample_budget_for_sites(m * n, gap, norm, eps_prime, alpha)
}

/// [`sample_budget`] with `mn` given as a site count.
pub fn sample_budget_for_sites(sites: usize, gap: f64, norm: f64, eps_prime: f64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("α = {alpha} must lie in (0, 1)")));
    }
    if !(eps_prime > 0.0) {
        return Err(Error::InvalidParameter(format!("ε′ = {eps_prime} must be positive")));
    }
    if !(gap > 0.0) || !(norm > 0.0) || sites == 0 {
        return Err(Error::InvalidParameter("Δ, J and mn must be positive".into()));
    }
    let mn = sites as f64;
    let prefactor = norm * mn * mn / (2.0 * gap * gap * eps_prime * eps_prime);
    let log = (-(mn + 1.0) / (1.0 - alpha).ln()).ln();
    let m = (prefactor * log.max(0.0)).ceil();
    if m > u64::MAX as f64 {
        return Err(Error::InvalidParameter("sample budget overflows".into()));
    }
    Ok((m as u64).max(1))
}

/// Split of a total variation budget `ε` between state preparation
/// (`ε_d`) and measurement (`ε_m`), with the fidelity slack `ε′` and the
/// largest per-site outcome flip rate the measurement share tolerates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub epsilon: f64,
    pub eps_d: f64,
    pub eps_m: f64,
    pub eps_prime: f64,
    pub per_site_cap: f64,
}

impl NoiseBudget {
    pub const STATE_SHARE: f64 = 0.5;
    pub const SLACK_FACTOR: f64 = 1.0 / 8.0;

    pub fn split(epsilon: f64, sites: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("ε = {epsilon} must lie in (0, 1)")));
        }
        if sites == 0 {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        let eps_d = Self::STATE_SHARE * epsilon;
        let eps_m = epsilon - eps_d;
        Ok(Self {
            epsilon,
            eps_d,
            eps_m,
            eps_prime: Self::SLACK_FACTOR * epsilon * epsilon,
            per_site_cap: eps_m / sites as f64,
        })
    }

    /// Smallest `F*` that certifies the state share: `√(1 − ε_d²) + ε′`.
    pub fn acceptance_threshold(&self) -> f64 {
        (1.0 - self.eps_d * self.eps_d).sqrt() + self.eps_prime
    }
}
