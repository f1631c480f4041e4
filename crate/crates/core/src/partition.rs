//! Brute-force imaginary-temperature Ising partition functions and the
//! error comparators used to state approximation guarantees.
//!
//! For an outcome string `x` the partition function is
//!
//! ```text
//! Z_x = Σ_{z ∈ {±1}^N} exp(i (J Σ_{⟨ij⟩} z_i z_j + Σ_i B′_i z_i)),   B′_i = B_i + x_i π/2
//! ```
//!
//! which satisfies `q_x = |Z_x|² / 2^{2N}` for the all-X outcome
//! probabilities of the Ising evolution. This module never touches the
//! state-vector engine except in [`verify_born_partition_identity`], which
//! exists to compare the two.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::lattice::{AngleField, Lattice};
use crate::linalg::C64;
use crate::statevec::{Distribution, PhaseProgram, PureState};

/// Largest spin count enumerated by [`partition_function`].
pub const ENUMERATION_CAP: usize = 24;

/// Largest spin count accepted by [`verify_born_partition_identity`].
pub const IDENTITY_CAP: usize = 20;

const MAX_CHUNKS: usize = 64;

/// Steps between exact re-evaluations of the field phasor.
const RESYNC: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionValue {
    pub value: C64,
    pub num_sites: usize,
    pub x: Bitstring,
}

impl PartitionValue {
    pub fn abs2(&self) -> f64 {
        self.value.norm_sqr()
    }

    /// `|Z_x|² / 2^{2N}`.
    pub fn born_probability(&self) -> f64 {
        self.abs2() / 4f64.powi(self.num_sites as i32)
    }
}

#[derive(Default)]
struct KahanComplex {
    sum: C64,
    comp: C64,
}

impl KahanComplex {
    #[inline]
    fn add(&mut self, v: C64) {
        let y_re = v.re - self.comp.re;
        let t_re = self.sum.re + y_re;
        self.comp.re = (t_re - self.sum.re) - y_re;
        self.sum.re = t_re;

        let y_im = v.im - self.comp.im;
        let t_im = self.sum.im + y_im;
        self.comp.im = (t_im - self.sum.im) - y_im;
        self.sum.im = t_im;
    }
}

/// Spin couplings and shifted fields in a form cheap to enumerate.
struct SpinSystem {
    fields: Vec<f64>,
    edges: Vec<(usize, usize)>,
    /// `exp(i J e)` for `e` in `-E..=E`.
    edge_table: Vec<C64>,
    /// Flipping spin k from +1 to −1 multiplies the field phasor by
    /// `down[k] = exp(−2i B_k)`; the reverse flip uses `up[k]`.
    down: Vec<C64>,
    up: Vec<C64>,
    /// Neighbour bitmask and degree of each site.
    masks: Vec<(u64, i64)>,
}

impl SpinSystem {
    fn new(coupling: f64, fields: Vec<f64>, lattice: &Lattice) -> Self {
        let edges = lattice.edges().to_vec();
        let max_edges = edges.len() as i64;
        let edge_table = (-max_edges..=max_edges).map(|e| crate::linalg::cis(coupling * e as f64)).collect();
        let down = fields.iter().map(|b| crate::linalg::cis(-2.0 * b)).collect();
        let up = fields.iter().map(|b| crate::linalg::cis(2.0 * b)).collect();
        let masks = (0..fields.len())
            .map(|i| {
                let list = lattice.neighbors(i);
                (list.iter().fold(0u64, |m, &j| m | (1 << j)), list.len() as i64)
            })
            .collect();
        SpinSystem { fields, edges, edge_table, down, up, masks }
    }

    #[inline]
    fn spin(config: u64, site: usize) -> i64 {
        if (config >> site) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    fn edge_sum(&self, config: u64) -> i64 {
        self.edges.iter().map(|&(a, b)| Self::spin(config, a) * Self::spin(config, b)).sum()
    }

    fn field_sum(&self, config: u64) -> f64 {
        self.fields.iter().enumerate().map(|(i, b)| b * Self::spin(config, i) as f64).sum()
    }

    /// Sums `exp(i phase)` over Gray-code indices `[start, end)`.
    ///
    /// The coupling part `J Σ z_i z_j` takes integer multiples of `J` and is
    /// read from a table; the field part is carried as a phasor updated by
    /// one multiplication per flip and re-anchored to an exact `sin_cos`
    /// every [`RESYNC`] steps so rounding cannot accumulate. Terms are summed
    /// plainly within those blocks and the block sums are Kahan-compensated.
    fn chunk_sum(&self, start: u64, end: u64) -> C64 {
        let gray = |i: u64| i ^ (i >> 1);
        let max_edges = self.edges.len() as i64;
        let (edge_table, down, up, masks) = (&self.edge_table, &self.down, &self.up, &self.masks);

        let mut config = gray(start);
        let mut edges = self.edge_sum(config);
        let mut field = self.field_sum(config);
        let mut phasor = crate::linalg::cis(field);
        let mut acc = KahanComplex::default();
        let mut block = C64::new(0.0, 0.0);
        let mut i = start;
        loop {
            block += edge_table[(edges + max_edges) as usize] * phasor;
            i += 1;
            if i == end {
                acc.add(block);
                break;
            }
            let k = i.trailing_zeros() as usize;
            let zk = Self::spin(config, k);
            let (mask, degree) = masks[k];
            let local = degree - 2 * i64::from((config & mask).count_ones());
            edges -= 2 * zk * local;
            field -= 2.0 * zk as f64 * self.fields[k];
            config ^= 1 << k;
            if i % RESYNC == 0 {
                acc.add(block);
                block = C64::new(0.0, 0.0);
                phasor = crate::linalg::cis(field);
            } else {
                phasor *= if zk == 1 { down[k] } else { up[k] };
            }
        }
        acc.sum + acc.comp * -1.0
    }
}

/// Enumerates `Z_x` over all `2^N` spin configurations.
///
/// The sum is split into a fixed number of Gray-code ranges that run in
/// parallel and are reduced in range order, so the result does not depend on
/// the thread count.
pub fn partition_function(lattice: &Lattice, field: &AngleField, x: Bitstring) -> Result<PartitionValue> {
    let n = lattice.num_sites();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCapExceeded { requested: n, cap: ENUMERATION_CAP });
    }
    field.validate(lattice)?;
    if x.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: x.len() });
    }
    let system = SpinSystem::new(
        field.coupling(),
        (0..n).map(|i| field.field(i) + if x.get(i) { FRAC_PI_2 } else { 0.0 }).collect(),
        lattice,
    );

    let total = 1u64 << n;
    let chunks = (MAX_CHUNKS as u64).min(total);
    let per = total / chunks;
    let partials: Vec<C64> = (0..chunks).into_par_iter().map(|c| system.chunk_sum(c * per, (c + 1) * per)).collect();
    let mut acc = KahanComplex::default();
    for p in partials {
        acc.add(p);
    }
    Ok(PartitionValue { value: acc.sum, num_sites: n, x })
}

/// `|q_x − |Z_x|²/2^{2N}|`, with `q_x` from the state-vector engine and
/// `Z_x` from [`partition_function`].
pub fn verify_born_partition_identity(lattice: &Lattice, field: &AngleField, x: Bitstring) -> Result<f64> {
    let n = lattice.num_sites();
    if n > IDENTITY_CAP {
        return Err(Error::EnumerationCapExceeded { requested: n, cap: IDENTITY_CAP });
    }
    let mut state = PureState::plus(n)?;
    state.apply_phase_program(&PhaseProgram::from_hamiltonian(lattice, field)?)?;
    let q = state.x_basis_amplitude(x)?.norm_sqr();
    let z = partition_function(lattice, field, x)?;
    Ok((q - z.born_probability()).abs())
}

/// Largest Born–partition residual over every outcome string, computing the
/// state-vector distribution once.
pub fn max_born_partition_residual(lattice: &Lattice, field: &AngleField) -> Result<f64> {
    let n = lattice.num_sites();
    if n > IDENTITY_CAP {
        return Err(Error::EnumerationCapExceeded { requested: n, cap: IDENTITY_CAP });
    }
    let mut state = PureState::plus(n)?;
    state.apply_phase_program(&PhaseProgram::from_hamiltonian(lattice, field)?)?;
    let dist = state.full_distribution()?;
    Bitstring::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| partition_function(lattice, field, x).map(|z| (dist.prob(x.bits()) - z.born_probability()).abs()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

fn same_universe(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.num_bits() != q.num_bits() {
        return Err(Error::SupportMismatch(format!("{} vs {} bits", p.num_bits(), q.num_bits())));
    }
    Ok(())
}

/// Whether `|p_x − q_x| ≤ γ q_x` holds for every outcome.
pub fn multiplicative_error_check(p: &Distribution, q: &Distribution, gamma: f64) -> Result<bool> {
    same_universe(p, q)?;
    Ok(p.probabilities().iter().zip(q.probabilities()).all(|(pi, qi)| (pi - qi).abs() <= gamma * qi))
}

/// The un-halved L1 distance `Σ_x |p_x − q_x|`, ranging over `[0, 2]`.
pub fn variation_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_universe(p, q)?;
    Ok(p.probabilities().iter().zip(q.probabilities()).map(|(a, b)| (a - b).abs()).sum())
}

/// Half the L1 distance: the trace distance between the two distributions
/// viewed as diagonal density matrices.
pub fn classical_trace_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    Ok(variation_distance(p, q)? / 2.0)
}

/// Error parameters of the approximation guarantees: multiplicative factor
/// `γ`, variation bound `ε`, failure fraction `δ` and additive constant `c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub gamma: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub additive: f64,
}

impl ErrorBudget {
    pub fn new(gamma: f64, epsilon: f64, delta: f64, additive: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("γ = {gamma} must lie in [0, 1)")));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("ε = {epsilon} must be nonnegative")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("δ = {delta} must lie in (0, 1]")));
        }
        if !(0.0..0.5).contains(&additive) {
            return Err(Error::InvalidParameter(format!("c = {additive} must lie in [0, 1/2)")));
        }
        Ok(Self { gamma, epsilon, delta, additive })
    }

    /// Whether `γ < 1/2`, the regime of the multiplicative hardness argument.
    pub fn multiplicative_regime(&self) -> bool {
        self.gamma < 0.5
    }

    /// Whether `ε/δ < 1/2`, the regime of the mixed-error argument.
    pub fn mixed_regime(&self) -> bool {
        self.epsilon / self.delta < 0.5
    }
}

/// Whether an estimate of `|Z_x|²` meets the mixed multiplicative/additive
/// bound
///
/// ```text
/// |Z̃² − Z²| / 2^{mn} ≤ (1/poly) · Z² / 2^{mn} + ε/δ.
/// ```
///
/// Rejects budgets with `ε/δ ≥ 1/2`.
pub fn mixed_error_check(
    z2_approx: f64,
    z2_true: f64,
    mn: usize,
    poly_factor: f64,
    epsilon: f64,
    delta: f64,
) -> Result<bool> {
    if !(delta > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter("need ε ≥ 0 and δ > 0".into()));
    }
    if epsilon / delta >= 0.5 {
        return Err(Error::InvalidParameter(format!("ε/δ = {} is not below 1/2", epsilon / delta)));
    }
    if !(poly_factor > 0.0) {
        return Err(Error::InvalidParameter("poly factor must be positive".into()));
    }
    let scale = 2f64.powi(mn as i32);
    let lhs = (z2_approx - z2_true).abs() / scale;
    let rhs = z2_true / scale / poly_factor + epsilon / delta;
    Ok(lhs <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::canonical_angle_field;
    use std::f64::consts::{PI, SQRT_2};

    /// Direct sum over configurations with no Gray code, chunking or
    /// compensation.
    fn naive(lattice: &Lattice, field: &AngleField, x: Bitstring) -> C64 {
        let n = lattice.num_sites();
        let spin = |c: u64, i: usize| if (c >> i) & 1 == 0 { 1.0 } else { -1.0 };
        (0..1u64 << n)
            .map(|c| {
                let e: f64 = lattice.edges().iter().map(|&(a, b)| spin(c, a) * spin(c, b)).sum();
                let f: f64 =
                    (0..n).map(|i| (field.field(i) + if x.get(i) { PI / 2.0 } else { 0.0 }) * spin(c, i)).sum();
                crate::linalg::cis(field.coupling() * e + f)
            })
            .sum()
    }

    fn single_site(theta: f64) -> (Lattice, AngleField) {
        (Lattice::custom(1, 1, &[]).unwrap(), AngleField::new(vec![theta], PI / 4.0))
    }

    #[test]
    fn single_site_values() {
        let (l, f) = single_site(0.0);
        let z = partition_function(&l, &f, Bitstring::zeros(1)).unwrap();
        assert!((z.value - C64::new(2.0, 0.0)).norm() < 1e-14);

        // B′ = π/4 means θ = π/2.
        let (l, f) = single_site(PI / 2.0);
        let z = partition_function(&l, &f, Bitstring::zeros(1)).unwrap();
        assert!((z.value - C64::new(SQRT_2, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn matches_naive_sum() {
        let l = Lattice::brickwork(1, 1).unwrap();
        let f = canonical_angle_field(&l).unwrap();
        for x in Bitstring::all(7).step_by(5) {
            let fast = partition_function(&l, &f, x).unwrap().value;
            assert!((fast - naive(&l, &f, x)).norm() < 1e-11);
        }
    }

    #[test]
    fn identity_on_one_site() {
        let (l, f) = single_site(0.0);
        assert!(verify_born_partition_identity(&l, &f, Bitstring::zeros(1)).unwrap() < 1e-15);
    }

    #[test]
    fn identity_on_single_edge() {
        let l = Lattice::custom(1, 2, &[(0, 1)]).unwrap();
        let f = AngleField::new(vec![0.3, -1.1], PI / 4.0);
        for x in Bitstring::all(2) {
            assert!(verify_born_partition_identity(&l, &f, x).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn modulus_is_invariant_under_field_reversal() {
        // Substituting z → −z shows Z_x(B′) = Z_x(−B′); reversing θ moves
        // B′ to −B′ + x π, and the extra x π only contributes a sign.
        let l = Lattice::brickwork(1, 1).unwrap();
        let theta = [0.3, -1.2, 0.7, 2.9, 0.0, -0.4, 1.1];
        let f = AngleField::new(theta.to_vec(), PI / 4.0);
        let g = AngleField::new(theta.iter().map(|t| -t).collect(), PI / 4.0);
        for x in Bitstring::all(7) {
            let a = partition_function(&l, &f, x).unwrap().abs2();
            let b = partition_function(&l, &g, x).unwrap().abs2();
            assert!((a - b).abs() < 1e-9, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        let l = Lattice::cluster(5, 5).unwrap();
        let f = AngleField::zeros(25);
        assert!(matches!(partition_function(&l, &f, Bitstring::zeros(25)), Err(Error::EnumerationCapExceeded { .. })));
    }

    #[test]
    fn comparators() {
        let q = Distribution::uniform(1);
        let p = Distribution::new(1, vec![0.8, 0.2]).unwrap();
        assert!(multiplicative_error_check(&q, &q, 0.0).unwrap());
        assert!(!multiplicative_error_check(&p, &q, 0.5).unwrap());
        let q0 = Distribution::point_mass(1, 0);
        assert!(!multiplicative_error_check(&Distribution::uniform(1), &q0, 0.9).unwrap());

        assert_eq!(variation_distance(&q, &q).unwrap(), 0.0);
        let a = Distribution::point_mass(2, 0);
        let b = Distribution::point_mass(2, 3);
        assert_eq!(variation_distance(&a, &b).unwrap(), 2.0);
        let c = Distribution::new(1, vec![0.6, 0.4]).unwrap();
        assert!((variation_distance(&c, &q).unwrap() - 0.2).abs() < 1e-15);
        assert!(variation_distance(&a, &q).is_err());
    }

    #[test]
    fn mixed_error() {
        assert!(mixed_error_check(5.0, 5.0, 3, 10.0, 0.1, 0.5).unwrap());
        let s = 2f64.powi(4);
        assert!(mixed_error_check(0.4 * s, 0.0, 4, 10.0, 0.45, 1.0).unwrap());
        assert!(!mixed_error_check(0.5 * s, 0.0, 4, 10.0, 0.45, 1.0).unwrap());
        assert!(mixed_error_check(1.0, 1.0, 4, 10.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn budgets() {
        let b = ErrorBudget::new(0.3, 0.1, 0.5, 0.2).unwrap();
        assert!(b.multiplicative_regime() && b.mixed_regime());
        assert!(ErrorBudget::new(1.0, 0.1, 0.5, 0.2).is_err());
        assert!(ErrorBudget::new(0.1, 0.1, 0.0, 0.2).is_err());
        assert!(ErrorBudget::new(0.1, 0.1, 0.5, 0.5).is_err());
    }

    proptest::proptest! {
        #[test]
        fn variation_distance_is_a_metric(
            a in proptest::collection::vec(0.01f64..1.0, 8),
            b in proptest::collection::vec(0.01f64..1.0, 8),
            c in proptest::collection::vec(0.01f64..1.0, 8),
        ) {
            let norm = |v: Vec<f64>| {
                let t: f64 = v.iter().sum();
                Distribution::new(3, v.into_iter().map(|p| p / t).collect()).unwrap()
            };
            let (a, b, c) = (norm(a), norm(b), norm(c));
            let ab = variation_distance(&a, &b).unwrap();
            proptest::prop_assert!((ab - variation_distance(&b, &a).unwrap()).abs() < 1e-15);
            proptest::prop_assert!(ab <= variation_distance(&a, &c).unwrap() + variation_distance(&c, &b).unwrap() + 1e-12);
            proptest::prop_assert!(ab <= 2.0 + 1e-12);
        }
    }
}
