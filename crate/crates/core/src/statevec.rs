//! Dense state-vector engine.
//!
//! Amplitudes live in one contiguous vector indexed by the computational
//! basis integer, with qubit `i` stored in bit `i`. X-basis outcomes follow
//! `|+⟩ ↦ 0`, `|−⟩ ↦ 1`, so the outcome string `x` labels `Z^x |+⟩^{⊗N}`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{format_bits, Bitstring};
use crate::error::{Error, Result};
use crate::lattice::{AngleField, Lattice};
use crate::linalg::{cis, is_unitary, unitarity_deviation, Matrix, C64, ZERO};

/// Default largest qubit count a [`PureState`] may hold.
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Environment variable overriding [`DEFAULT_QUBIT_CAP`].
pub const QUBIT_CAP_ENV: &str = "BRICKWORK_MAX_QUBITS";

/// Tolerance for the unitarity check of user-supplied gates.
pub const UNITARY_TOL: f64 = 1e-10;

const PARALLEL_MIN_QUBITS: usize = 14;

/// The active qubit cap, honoring [`QUBIT_CAP_ENV`].
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| (1..=40).contains(&v))
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

fn check_cap(n: usize) -> Result<()> {
    let cap = qubit_cap();
    if n > cap {
        return Err(Error::QubitCapExceeded { requested: n, cap });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// `|+⟩^{⊗n}`.
    pub fn plus(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("a state needs at least one qubit".into()));
        }
        check_cap(n)?;
        let a = C64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(Self { num_qubits: n, amps: vec![a; 1 << n] })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_cap(n)?;
        if n < 64 && index >> n != 0 {
            return Err(Error::InvalidParameter(format!("basis index {index} needs more than {n} qubits")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index as usize] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits: n, amps })
    }

    /// Tensor product of single-qubit states, site 0 first.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let n = factors.len();
        check_cap(n)?;
        let mut amps = vec![C64::new(1.0, 0.0)];
        for (q, f) in factors.iter().enumerate() {
            let mut next = vec![ZERO; amps.len() * 2];
            for (i, a) in amps.iter().enumerate() {
                next[i] = a * f[0];
                next[i | (1 << q)] = a * f[1];
            }
            amps = next;
        }
        Self::from_amplitudes(amps)
    }

    /// Wraps raw amplitudes; the length must be a power of two and the vector
    /// normalized within 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameter(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let n = amps.len().trailing_zeros() as usize;
        check_cap(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { total: norm });
        }
        Ok(Self { num_qubits: n, amps })
    }

    /// Unchecked constructor for intermediate (possibly unnormalized)
    /// vectors produced by projections.
    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> C64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.num_qubits, other.num_qubits);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|`, the global-phase-insensitive overlap of two
    /// normalized states.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        crate::linalg::vector_fidelity(&self.amps, &other.amps)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.num_qubits {
            return Err(Error::SiteOutOfRange { site, num_sites: self.num_qubits });
        }
        Ok(())
    }

    /// Multiplies the amplitude at basis index `z` by `exp(−i Φ(z))`.
    pub fn apply_phase_program(&mut self, program: &PhaseProgram) -> Result<()> {
        program.check_sites(self.num_qubits)?;
        let apply = |(z, amp): (usize, &mut C64)| *amp *= cis(-program.phase(z as u64));
        if self.num_qubits >= PARALLEL_MIN_QUBITS {
            self.amps.par_iter_mut().enumerate().for_each(apply);
        } else {
            self.amps.iter_mut().enumerate().for_each(apply);
        }
        Ok(())
    }

    /// Applies a 2×2 or 4×4 unitary to one or two distinct sites. For two
    /// sites the matrix uses the little-endian layout of
    /// [`linalg`](crate::linalg).
    pub fn apply_local_unitary(&mut self, sites: &[usize], u: &Matrix) -> Result<()> {
        if sites.is_empty() || sites.len() > 2 {
            return Err(Error::InvalidParameter(format!("expected 1 or 2 sites, got {}", sites.len())));
        }
        let dim = 1usize << sites.len();
        if u.nrows() != dim || u.ncols() != dim {
            return Err(Error::InvalidParameter(format!(
                "a gate on {} site(s) must be {dim}x{dim}, got {}x{}",
                sites.len(),
                u.nrows(),
                u.ncols()
            )));
        }
        if !is_unitary(u, UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation: unitarity_deviation(u) });
        }
        self.apply_matrix(sites, u)
    }

    /// Applies an arbitrary (not necessarily unitary) operator on `sites`.
    pub(crate) fn apply_matrix(&mut self, sites: &[usize], m: &Matrix) -> Result<()> {
        for (k, &s) in sites.iter().enumerate() {
            self.check_site(s)?;
            if sites[..k].contains(&s) {
                return Err(Error::SiteCollision(s));
            }
        }
        let k = sites.len();
        let dim = 1usize << k;
        debug_assert_eq!(m.nrows(), dim);
        let masks: Vec<usize> = sites.iter().map(|&s| 1usize << s).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|local| masks.iter().enumerate().filter(|(b, _)| (local >> b) & 1 == 1).map(|(_, m)| m).sum())
            .collect();

        let mut gathered = vec![ZERO; dim];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base | off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, g) in gathered.iter().enumerate() {
                    acc += m[(r, c)] * g;
                }
                self.amps[base | off] = acc;
            }
        }
        Ok(())
    }

    /// `⟨ψ|op|ψ⟩` for an operator on the given sites.
    pub fn expectation(&self, sites: &[usize], op: &Matrix) -> Result<C64> {
        let mut image = self.clone();
        image.apply_matrix(sites, op)?;
        Ok(self.inner(&image))
    }

    /// `⟨+_x|ψ⟩ = 2^{−N/2} Σ_z (−1)^{x·z} ψ_z`.
    pub fn x_basis_amplitude(&self, x: Bitstring) -> Result<C64> {
        if x.len() != self.num_qubits {
            return Err(Error::LengthMismatch { expected: self.num_qubits, found: x.len() });
        }
        let mask = x.bits() as usize;
        let sum: C64 =
            self.amps.iter().enumerate().map(|(z, a)| if (z & mask).count_ones() % 2 == 0 { *a } else { -*a }).sum();
        Ok(sum * (0.5f64).powf(self.num_qubits as f64 / 2.0))
    }

    /// The state with a Hadamard on every qubit, via an in-place
    /// Walsh–Hadamard transform.
    pub fn hadamard_all(&self) -> PureState {
        let mut amps = self.amps.clone();
        let len = amps.len();
        let mut half = 1;
        while half < len {
            for block in (0..len).step_by(2 * half) {
                for i in block..block + half {
                    let (a, b) = (amps[i], amps[i + half]);
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i + half] = (a - b) * FRAC_1_SQRT_2;
                }
            }
            half *= 2;
        }
        PureState::from_raw(self.num_qubits, amps)
    }

    /// Outcome distribution of measuring every qubit in the X basis.
    pub fn full_distribution(&self) -> Result<Distribution> {
        check_cap(self.num_qubits)?;
        let rotated = self.hadamard_all();
        let probs = rotated.amps.iter().map(|a| a.norm_sqr()).collect();
        Distribution::new(self.num_qubits, probs)
    }

    /// Outcome distribution of a measurement in the given per-site bases.
    pub fn distribution_in_bases(&self, bases: &[Basis]) -> Result<Distribution> {
        if bases.len() != self.num_qubits {
            return Err(Error::LengthMismatch { expected: self.num_qubits, found: bases.len() });
        }
        let mut rotated = self.clone();
        let h = crate::linalg::hadamard();
        for (site, b) in bases.iter().enumerate() {
            if *b == Basis::X {
                rotated.apply_matrix(&[site], &h)?;
            }
        }
        let probs = rotated.amps.iter().map(|a| a.norm_sqr()).collect();
        Distribution::new(self.num_qubits, probs)
    }

    /// Computational-basis marginal over `sites`; entry `k` has the outcome
    /// of `sites[j]` in bit `j`.
    pub fn z_marginal(&self, sites: &[usize]) -> Result<Vec<f64>> {
        for &s in sites {
            self.check_site(s)?;
        }
        let mut out = vec![0.0; 1 << sites.len()];
        for (z, a) in self.amps.iter().enumerate() {
            let local = sites.iter().enumerate().fold(0usize, |acc, (j, &s)| acc | (((z >> s) & 1) << j));
            out[local] += a.norm_sqr();
        }
        Ok(out)
    }

    /// `count` all-X outcomes drawn by inverse CDF from the exact
    /// distribution.
    pub fn sample(&self, count: usize, seed: u64) -> Result<MeasurementRecord> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let dist = self.full_distribution()?;
        Ok(MeasurementRecord {
            num_sites: self.num_qubits,
            bases: vec![Basis::X; self.num_qubits],
            seed,
            outcomes: dist.sample(count, seed),
        })
    }

    /// Unnormalized projection of `site` onto the given basis outcome, with
    /// the site removed. Returns the projected vector and its squared norm.
    pub fn project(&self, site: usize, basis: Basis, outcome: bool) -> Result<(PureState, f64)> {
        self.check_site(site)?;
        let n = self.num_qubits;
        let low_mask = (1usize << site) - 1;
        let bit = 1usize << site;
        let sign = if outcome { -1.0 } else { 1.0 };
        let amps: Vec<C64> = (0..1usize << (n - 1))
            .map(|r| {
                let base = (r & low_mask) | ((r & !low_mask) << 1);
                match basis {
                    Basis::Z => self.amps[base | if outcome { bit } else { 0 }],
                    Basis::X => (self.amps[base] + self.amps[base | bit] * sign) * FRAC_1_SQRT_2,
                }
            })
            .collect();
        let out = PureState::from_raw(n - 1, amps);
        let p = out.norm_sqr();
        Ok((out, p))
    }

    /// Measures `site` in `basis`, keeps the branch `outcome`, and returns
    /// the renormalized state on the remaining `N − 1` qubits together with
    /// the branch probability.
    pub fn postselect(&self, site: usize, basis: Basis, outcome: bool) -> Result<(PureState, f64)> {
        let (mut state, p) = self.project(site, basis, outcome)?;
        if p <= 1e-300 {
            return Err(Error::ZeroProbabilityBranch);
        }
        state.scale(1.0 / p.sqrt());
        Ok((state, p))
    }
}

/// One diagonal term of a [`PhaseProgram`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhaseTerm {
    /// Contributes `angle · z_site`.
    Z { site: usize, angle: f64 },
    /// Contributes `angle · z_a z_b`.
    ZZ { a: usize, b: usize, angle: f64 },
}

impl PhaseTerm {
    #[inline]
    fn value(&self, z: u64) -> f64 {
        let spin = |s: usize| if (z >> s) & 1 == 0 { 1.0 } else { -1.0 };
        match *self {
            PhaseTerm::Z { site, angle } => angle * spin(site),
            PhaseTerm::ZZ { a, b, angle } => angle * spin(a) * spin(b),
        }
    }
}

/// Ordered list of commuting diagonal terms, evolved for unit time:
/// `exp(−i Σ_t angle_t · P_t)` with `P_t` a product of `Z`s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseProgram {
    pub terms: Vec<PhaseTerm>,
}

impl PhaseProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn z(mut self, site: usize, angle: f64) -> Self {
        self.terms.push(PhaseTerm::Z { site, angle });
        self
    }

    pub fn zz(mut self, a: usize, b: usize, angle: f64) -> Self {
        self.terms.push(PhaseTerm::ZZ { a, b, angle });
        self
    }

    /// The Ising evolution `exp(−i H)` with
    /// `H = −J Σ_{⟨ij⟩} Z_i Z_j + Σ_i B_i Z_i` and `B_i = θ_i / 2`.
    pub fn from_hamiltonian(lattice: &Lattice, field: &AngleField) -> Result<Self> {
        field.validate(lattice)?;
        let j = field.coupling();
        let mut program = Self::new();
        for &(a, b) in lattice.edges() {
            program.terms.push(PhaseTerm::ZZ { a, b, angle: -j });
        }
        for site in 0..lattice.num_sites() {
            let b = field.field(site);
            if b != 0.0 {
                program.terms.push(PhaseTerm::Z { site, angle: b });
            }
        }
        Ok(program)
    }

    /// `Φ(z) = Σ_t angle_t · (product of the Z eigenvalues of term t)`.
    pub fn phase(&self, z: u64) -> f64 {
        self.terms.iter().map(|t| t.value(z)).sum()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.terms
            .iter()
            .map(|t| match *t {
                PhaseTerm::Z { site, .. } => site,
                PhaseTerm::ZZ { a, b, .. } => a.max(b),
            })
            .max()
    }

    fn check_sites(&self, num_qubits: usize) -> Result<()> {
        for t in &self.terms {
            match *t {
                PhaseTerm::Z { site, .. } if site >= num_qubits => {
                    return Err(Error::SiteOutOfRange { site, num_sites: num_qubits })
                }
                PhaseTerm::ZZ { a, b, .. } if a.max(b) >= num_qubits => {
                    return Err(Error::SiteOutOfRange { site: a.max(b), num_sites: num_qubits })
                }
                PhaseTerm::ZZ { a, b, .. } if a == b => return Err(Error::SiteCollision(a)),
                _ => {}
            }
        }
        Ok(())
    }
}

/// Tolerance on the total probability of a [`Distribution`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Exact outcome probabilities over `{0,1}^N`, stored densely by packed
/// outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    num_bits: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(num_bits: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << num_bits {
            return Err(Error::LengthMismatch { expected: 1 << num_bits, found: probs.len() });
        }
        if let Some((i, &p)) = probs.iter().enumerate().find(|(_, p)| !(**p >= 0.0)) {
            return Err(Error::NegativeProbability { outcome: i as u64, value: p });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { num_bits, probs })
    }

    pub fn point_mass(num_bits: usize, outcome: u64) -> Self {
        let mut probs = vec![0.0; 1 << num_bits];
        probs[outcome as usize] = 1.0;
        Self { num_bits, probs }
    }

    pub fn uniform(num_bits: usize) -> Self {
        let len = 1usize << num_bits;
        Self { num_bits, probs: vec![1.0 / len as f64; len] }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: u64) -> f64 {
        self.probs[outcome as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Distribution of `relabel(x)` when `x` is drawn from `self`. The map
    /// must be a permutation of the outcome space.
    pub fn relabeled(&self, relabel: impl Fn(u64) -> u64) -> Result<Self> {
        let mut probs = vec![0.0; self.probs.len()];
        let mut hit = vec![false; self.probs.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            let y = relabel(x as u64) as usize;
            if y >= probs.len() || hit[y] {
                return Err(Error::SupportMismatch("relabeling is not a permutation".into()));
            }
            hit[y] = true;
            probs[y] = p;
        }
        Ok(Self { num_bits: self.num_bits, probs })
    }

    /// `count` i.i.d. outcomes by inverse CDF, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Bitstring> {
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for &p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        let last_nonzero = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
                Bitstring::new(idx as u64, self.num_bits).expect("index fits")
            })
            .collect()
    }

    /// `bitstring,probability` lines, bitstring printed site 0 first.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.probs.len() * (self.num_bits + 24));
        for (x, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{},{}", format_bits(x as u64, self.num_bits), p);
        }
        out
    }

    /// Parses the output of [`Distribution::to_csv`]; missing outcomes have
    /// probability zero.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut width = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (bits, p) =
                line.split_once(',').ok_or_else(|| Error::InvalidParameter(format!("malformed CSV line {line:?}")))?;
            let bits: Bitstring = bits.parse()?;
            let p: f64 =
                p.trim().parse().map_err(|_| Error::InvalidParameter(format!("malformed probability in {line:?}")))?;
            match width {
                None => width = Some(bits.len()),
                Some(w) if w != bits.len() => return Err(Error::LengthMismatch { expected: w, found: bits.len() }),
                _ => {}
            }
            entries.push((bits.bits() as usize, p));
        }
        let n = width.ok_or_else(|| Error::InvalidParameter("empty distribution".into()))?;
        let mut probs = vec![0.0; 1 << n];
        for (x, p) in entries {
            probs[x] += p;
        }
        Self::new(n, probs)
    }
}

/// Sampled outcome strings together with the per-site bases and the seed
/// that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub num_sites: usize,
    pub bases: Vec<Basis>,
    pub seed: u64,
    pub outcomes: Vec<Bitstring>,
}

#[derive(Serialize, Deserialize)]
struct RecordHeader {
    seed: u64,
    bases: Vec<Basis>,
}

impl MeasurementRecord {
    /// A JSON header line `{"seed":…,"bases":[…]}` followed by one bitstring
    /// per line.
    pub fn to_text(&self) -> String {
        let header = RecordHeader { seed: self.seed, bases: self.bases.clone() };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for o in &self.outcomes {
            let _ = writeln!(out, "{o}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: RecordHeader = serde_json::from_str(lines.next().unwrap_or(""))
            .map_err(|e| Error::InvalidParameter(format!("bad record header: {e}")))?;
        let num_sites = header.bases.len();
        let outcomes = lines
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                let b: Bitstring = l.parse()?;
                if b.len() != num_sites {
                    return Err(Error::LengthMismatch { expected: num_sites, found: b.len() });
                }
                Ok(b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { num_sites, bases: header.bases, seed: header.seed, outcomes })
    }

    /// Empirical distribution of the recorded outcomes.
    pub fn empirical(&self) -> Result<Distribution> {
        if self.outcomes.is_empty() {
            return Err(Error::InvalidParameter("empty record".into()));
        }
        let mut probs = vec![0.0; 1 << self.num_sites];
        let w = 1.0 / self.outcomes.len() as f64;
        for o in &self.outcomes {
            probs[o.bits() as usize] += w;
        }
        Distribution::new(self.num_sites, probs)
    }
}
