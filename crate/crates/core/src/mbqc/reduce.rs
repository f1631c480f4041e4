use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::bits::MAX_BITS;
use crate::error::{Error, Result};
use crate::lattice::{AngleField, Lattice, LatticeKind, SiteRole, CELL_LEN};
use crate::linalg::{cz, rz, Matrix, C64, ONE, ZERO};
use crate::statevec::{Basis, Distribution, PhaseProgram, PureState, NORMALIZATION_TOL};

/// Effective two-qubit operator on the outer sites of the line `1 – 0 – 2`
/// after rotating site 0 by `R_z(π/2)` and measuring it, together with the
/// branch probability for the input `|++⟩`.
///
/// A Z measurement gives `I⊗I` (outcome 0) or `Z⊗Z` (outcome 1); an X
/// measurement gives `exp(iπ/4 Z⊗Z)` times `(Z⊗Z)^outcome`. Operators are
/// returned unnormalized, so they match the expected ones up to a scalar.
pub fn red_site_measurement(basis: Basis, outcome: bool) -> Result<(Matrix, f64)> {
    let plus = [C64::from(FRAC_1_SQRT_2); 2];
    let run = |outer: [[C64; 2]; 2]| -> Result<PureState> {
        let mut state = PureState::product(&[plus, outer[0], outer[1]])?;
        state.apply_matrix(&[0, 1], &cz())?;
        state.apply_matrix(&[0, 2], &cz())?;
        state.apply_matrix(&[0], &rz(FRAC_PI_2))?;
        Ok(state.project(0, basis, outcome)?.0)
    };
    let ket = |b: usize| if b == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
    let mut op = Matrix::zeros(4, 4);
    for input in 0..4 {
        let out = run([ket(input & 1), ket(input >> 1)])?;
        for (row, amp) in out.amplitudes().iter().enumerate() {
            op[(row, input)] = *amp;
        }
    }
    let probability = run([plus, plus])?.norm_sqr();
    Ok((op, probability))
}

/// `3mn − 2m − 2n + 1`: the non-blue sites of a `(2m−1) × (2n−1)` cluster
/// whose blue sites form an `m × n` grid.
pub fn red_site_count(m: usize, n: usize) -> usize {
    3 * m * n + 1 - 2 * m - 2 * n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RedKind {
    /// Measured in X: fuses its two blue neighbours with `exp(iπ/4 ZZ)`.
    Bridge,
    /// Measured in Z: removes the link between its two blue neighbours.
    Break,
    /// A site with no blue neighbour, measured in Z.
    Plaquette,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RedSite {
    pub site: usize,
    pub row: usize,
    pub col: usize,
    pub kind: RedKind,
    pub basis: Basis,
    /// Target sites whose outcomes are flipped when this site reads 1.
    pub mask: u64,
}

/// How a `(2m−1) × (2n−1)` cluster state is measured down to a target graph
/// on its `m × n` blue sublattice.
///
/// Blue sites sit at even `(row, col)`. A red site between two blues is a
/// bridge if the target contains that edge and a break otherwise; the
/// remaining red sites are breaks with no blue neighbour. Red sites are
/// listed in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionPlan {
    pub cluster_rows: usize,
    pub cluster_cols: usize,
    pub target_kind: LatticeKind,
    pub target_rows: usize,
    pub target_cols: usize,
    pub target_edges: Vec<(usize, usize)>,
    /// Cluster index of each target site.
    pub blue_sites: Vec<usize>,
    pub red_sites: Vec<RedSite>,
    #[serde(skip)]
    target: Lattice,
}

impl ReductionPlan {
    /// Plans the reduction onto an arbitrary subgraph of the blue grid. The
    /// target's site `(row, col)` sits at cluster position `(2 row, 2 col)`.
    pub fn for_target(target: &Lattice) -> Result<Self> {
        let (rows, cols) = (target.physical_rows(), target.physical_cols());
        if target.num_sites() > MAX_BITS {
            return Err(Error::InvalidLattice(format!("{} target sites exceed {MAX_BITS}", target.num_sites())));
        }
        for &(a, b) in target.edges() {
            let (sa, sb) = (target.site(a), target.site(b));
            if sa.row.abs_diff(sb.row) + sa.col.abs_diff(sb.col) != 1 {
                return Err(Error::InvalidLattice(format!("edge ({a}, {b}) is not between grid neighbours")));
            }
        }
        let (cr, cc) = (2 * rows - 1, 2 * cols - 1);
        let blue_sites = (0..target.num_sites())
            .map(|i| {
                let s = target.site(i);
                2 * s.row * cc + 2 * s.col
            })
            .collect();

        let blue = |r: usize, c: usize| target.index_of(r, c).expect("blue position inside the target grid");
        let mut red_sites = Vec::new();
        for r in 0..cr {
            for c in 0..cc {
                let ends = match (r % 2, c % 2) {
                    (0, 0) => continue,
                    (0, 1) => Some((blue(r / 2, c / 2), blue(r / 2, c / 2 + 1))),
                    (1, 0) => Some((blue(r / 2, c / 2), blue(r / 2 + 1, c / 2))),
                    _ => None,
                };
                let (kind, mask) = match ends {
                    Some((a, b)) => {
                        let kind = if target.has_edge(a, b) { RedKind::Bridge } else { RedKind::Break };
                        (kind, (1u64 << a) | (1u64 << b))
                    }
                    None => (RedKind::Plaquette, 0),
                };
                let basis = if kind == RedKind::Bridge { Basis::X } else { Basis::Z };
                red_sites.push(RedSite { site: r * cc + c, row: r, col: c, kind, basis, mask });
            }
        }

        // A Z outcome of 1 on a plaquette site puts Z on its four neighbours,
        // which flips the readings of the bridges among them.
        let bridge_masks: std::collections::HashMap<usize, u64> =
            red_sites.iter().filter(|s| s.kind == RedKind::Bridge).map(|s| (s.site, s.mask)).collect();
        for red in red_sites.iter_mut().filter(|s| s.kind == RedKind::Plaquette) {
            let (r, c) = (red.row, red.col);
            let neighbours = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)];
            red.mask = neighbours
                .iter()
                .filter(|&&(nr, nc)| nr < cr && nc < cc)
                .filter_map(|&(nr, nc)| bridge_masks.get(&(nr * cc + nc)))
                .fold(0, |acc, m| acc ^ m);
        }

        Ok(Self {
            cluster_rows: cr,
            cluster_cols: cc,
            target_kind: target.kind(),
            target_rows: rows,
            target_cols: cols,
            target_edges: target.edges().to_vec(),
            blue_sites,
            red_sites,
            target: target.clone(),
        })
    }

    pub fn target(&self) -> &Lattice {
        &self.target
    }

    pub fn red_count(&self) -> usize {
        self.red_sites.len()
    }

    pub fn num_cluster_sites(&self) -> usize {
        self.cluster_rows * self.cluster_cols
    }

    /// The source cluster lattice with blue and red roles assigned.
    pub fn cluster_lattice(&self) -> Result<Lattice> {
        let base = Lattice::cluster(self.cluster_rows as i64, self.cluster_cols as i64)?;
        let roles: Vec<SiteRole> = base
            .sites()
            .iter()
            .map(|s| if s.row % 2 == 0 && s.col % 2 == 0 { SiteRole::Blue } else { SiteRole::Red })
            .collect();
        base.with_roles(&roles)
    }

    /// Measurement basis of every cluster site: X on blues and bridges, Z on
    /// breaks.
    pub fn source_bases(&self) -> Vec<Basis> {
        let mut bases = vec![Basis::X; self.num_cluster_sites()];
        for red in &self.red_sites {
            bases[red.site] = red.basis;
        }
        bases
    }

    /// The rotated cluster state: CZ on every grid edge, the target angles on
    /// the blue sites and `R_z(π/2)` on every red site.
    pub fn source_state(&self, field: &AngleField) -> Result<PureState> {
        field.validate(&self.target)?;
        let cluster = Lattice::cluster(self.cluster_rows as i64, self.cluster_cols as i64)?;
        let mut state = PureState::plus(cluster.num_sites())?;
        for &(a, b) in cluster.edges() {
            state.apply_matrix(&[a, b], &cz())?;
        }
        for (i, &site) in self.blue_sites.iter().enumerate() {
            state.apply_matrix(&[site], &rz(field.angle(i)))?;
        }
        for red in &self.red_sites {
            state.apply_matrix(&[red.site], &rz(FRAC_PI_2))?;
        }
        Ok(state)
    }

    /// Exact distribution of the cluster measured in [`source_bases`](Self::source_bases).
    pub fn source_distribution(&self, field: &AngleField) -> Result<Distribution> {
        self.source_state(field)?.distribution_in_bases(&self.source_bases())
    }

    /// The Ising-evolved target: `exp(iπ/4 ZZ)` on every target edge and
    /// `R_z(θ_i)` on every site, starting from `|+⟩`.
    pub fn target_state(&self, field: &AngleField) -> Result<PureState> {
        field.validate(&self.target)?;
        let mut program = PhaseProgram::new();
        for &(a, b) in self.target.edges() {
            program = program.zz(a, b, -FRAC_PI_4);
        }
        for i in 0..self.target.num_sites() {
            program = program.z(i, field.field(i));
        }
        let mut state = PureState::plus(self.target.num_sites())?;
        state.apply_phase_program(&program)?;
        Ok(state)
    }

    pub fn target_distribution(&self, field: &AngleField) -> Result<Distribution> {
        self.target_state(field)?.full_distribution()
    }

    /// Splits a cluster outcome into the corrected target outcome `x` and the
    /// red-site string `y` (bit `k` is the `k`-th red site).
    pub fn relabel(&self, outcome: u64) -> (u64, u64) {
        let mut x = 0u64;
        for (i, &site) in self.blue_sites.iter().enumerate() {
            x |= ((outcome >> site) & 1) << i;
        }
        let mut y = 0u64;
        for (k, red) in self.red_sites.iter().enumerate() {
            if (outcome >> red.site) & 1 == 1 {
                y |= 1 << k;
                x ^= red.mask;
            }
        }
        (x, y)
    }
}

/// Builds the reduction from a cluster lattice to the brickwork on its blue
/// sublattice. The cluster must have an odd number of rows and a column
/// count `c` with `(c + 1)` divisible by `2 × 7`.
pub fn reduce_cluster_to_brickwork(cluster: &Lattice) -> Result<ReductionPlan> {
    if cluster.kind() != LatticeKind::Cluster {
        return Err(Error::WrongLatticeKind { expected: "cluster", found: cluster.kind().name() });
    }
    let (rows, cols) = (cluster.physical_rows(), cluster.physical_cols());
    if rows % 2 == 0 || (cols + 1) % (2 * CELL_LEN) != 0 {
        return Err(Error::InvalidDimensions { rows: rows as i64, cols: cols as i64 });
    }
    let target = Lattice::brickwork(rows.div_ceil(2) as i64, ((cols + 1) / (2 * CELL_LEN)) as i64)?;
    ReductionPlan::for_target(&target)
}

/// Result of summing a cluster distribution over the red-site outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    pub distribution: Distribution,
    /// `q_y` for every red string `y`.
    pub y_marginals: Vec<f64>,
    /// `max_y |q_y − 2^{−r}|`.
    pub y_deviation: f64,
}

/// `q_x = Σ_y q_{x′, y}` with `x = x′ ⊕ mask(y)`.
pub fn marginalize_square_to_brickwork(square: &Distribution, plan: &ReductionPlan) -> Result<Marginal> {
    if square.num_bits() != plan.num_cluster_sites() {
        return Err(Error::SupportMismatch(format!(
            "distribution over {} bits, plan over {} cluster sites",
            square.num_bits(),
            plan.num_cluster_sites()
        )));
    }
    let nb = plan.blue_sites.len();
    let r = plan.red_count();
    let mut probs = vec![0.0; 1 << nb];
    let mut y_marginals = vec![0.0; 1 << r];
    for (outcome, &p) in square.probabilities().iter().enumerate() {
        let (x, y) = plan.relabel(outcome as u64);
        probs[x as usize] += p;
        y_marginals[y as usize] += p;
    }
    let uniform = 0.5f64.powi(r as i32);
    let y_deviation = y_marginals.iter().map(|q| (q - uniform).abs()).fold(0.0, f64::max);
    debug_assert!(y_deviation.is_finite() && y_deviation <= 1.0 + NORMALIZATION_TOL);
    Ok(Marginal { distribution: Distribution::new(nb, probs)?, y_marginals, y_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::canonical_angle_field;
    use crate::linalg::{identity, pauli_z, phase_fidelity, tensor, zz_phase};
    use crate::partition::variation_distance;

    #[test]
    fn red_site_branches() {
        let zz = tensor(&pauli_z(), &pauli_z());
        let cases = [
            (Basis::Z, false, identity(4)),
            (Basis::Z, true, zz.clone()),
            (Basis::X, false, zz_phase(FRAC_PI_4)),
            (Basis::X, true, zz_phase(FRAC_PI_4) * zz),
        ];
        for (basis, outcome, expected) in cases {
            let (op, p) = red_site_measurement(basis, outcome).unwrap();
            assert!(phase_fidelity(&op, &expected) >= 1.0 - 1e-10, "{basis:?} {outcome}");
            assert!((p - 0.5).abs() <= 1e-10);
        }
    }

    #[test]
    fn closed_form_red_count() {
        assert_eq!(red_site_count(3, 3), 16);
        assert_eq!(red_site_count(1, 1), 0);
        for (m, n) in [(1, 1), (1, 7), (2, 2), (3, 3), (2, 5)] {
            let plan = ReductionPlan::for_target(&Lattice::cluster(m as i64, n as i64).unwrap()).unwrap();
            assert_eq!(plan.red_count(), red_site_count(m, n));
        }
    }

    #[test]
    fn break_only_line() {
        let target = Lattice::custom(1, 2, &[]).unwrap();
        let plan = ReductionPlan::for_target(&target).unwrap();
        assert_eq!(plan.red_count(), 1);
        assert_eq!(plan.red_sites[0].kind, RedKind::Break);
        let field = AngleField::new(vec![0.4, -1.3], FRAC_PI_4);
        let m = marginalize_square_to_brickwork(&plan.source_distribution(&field).unwrap(), &plan).unwrap();
        let expected = plan.target_distribution(&field).unwrap();
        assert!(variation_distance(&m.distribution, &expected).unwrap() <= 1e-9);
    }

    #[test]
    fn one_row_cluster_reduces_to_one_cell() {
        let cluster = Lattice::cluster(1, 13).unwrap();
        let plan = reduce_cluster_to_brickwork(&cluster).unwrap();
        assert_eq!(plan.red_count(), 6);
        assert!(plan.red_sites.iter().all(|s| s.kind == RedKind::Bridge));
        let field = canonical_angle_field(plan.target()).unwrap();
        let m = marginalize_square_to_brickwork(&plan.source_distribution(&field).unwrap(), &plan).unwrap();
        assert!(m.y_deviation <= 1e-9);
        let expected = plan.target_distribution(&field).unwrap();
        assert!(variation_distance(&m.distribution, &expected).unwrap() <= 1e-9);
    }

    #[test]
    fn square_with_bridges_and_plaquette() {
        // Blue 2×2 grid with three of the four edges bridged.
        let target = Lattice::custom(2, 2, &[(0, 1), (0, 2), (1, 3)]).unwrap();
        let plan = ReductionPlan::for_target(&target).unwrap();
        assert_eq!(plan.red_count(), 5);
        let plaquette = plan.red_sites.iter().find(|s| s.kind == RedKind::Plaquette).unwrap();
        assert_eq!(plaquette.mask, (0b0011) ^ (0b0101) ^ (0b1010));
        let field = AngleField::new(vec![0.3, 1.1, -0.7, 2.0], FRAC_PI_4);
        let m = marginalize_square_to_brickwork(&plan.source_distribution(&field).unwrap(), &plan).unwrap();
        assert!(m.y_deviation <= 1e-9);
        let expected = plan.target_distribution(&field).unwrap();
        assert!(variation_distance(&m.distribution, &expected).unwrap() <= 1e-9);
    }

    #[test]
    fn nominal_branch_state_matches_target() {
        let target = Lattice::custom(2, 2, &[(0, 1), (2, 3), (1, 3)]).unwrap();
        let plan = ReductionPlan::for_target(&target).unwrap();
        let field = AngleField::new(vec![0.9, -0.2, 0.5, 1.4], FRAC_PI_4);
        let mut state = plan.source_state(&field).unwrap();
        // Project red sites from the highest index down so lower indices
        // stay valid.
        for red in plan.red_sites.iter().rev() {
            state = state.postselect(red.site, red.basis, false).unwrap().0;
        }
        let expected = plan.target_state(&field).unwrap();
        assert!(state.fidelity(&expected) >= 1.0 - 1e-9);
    }

    #[test]
    fn no_red_sites_is_identity() {
        let plan = ReductionPlan::for_target(&Lattice::custom(1, 1, &[]).unwrap()).unwrap();
        assert_eq!(plan.red_count(), 0);
        let d = Distribution::new(1, vec![0.3, 0.7]).unwrap();
        let m = marginalize_square_to_brickwork(&d, &plan).unwrap();
        assert_eq!(m.distribution, d);
        assert_eq!(m.y_marginals, vec![1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(reduce_cluster_to_brickwork(&Lattice::cluster(2, 13).unwrap()).is_err());
        assert!(reduce_cluster_to_brickwork(&Lattice::cluster(1, 12).unwrap()).is_err());
        assert!(reduce_cluster_to_brickwork(&Lattice::brickwork(1, 1).unwrap()).is_err());
        assert!(ReductionPlan::for_target(&Lattice::custom(2, 2, &[(0, 3)]).unwrap()).is_err());
        let plan = ReductionPlan::for_target(&Lattice::custom(1, 2, &[(0, 1)]).unwrap()).unwrap();
        assert!(marginalize_square_to_brickwork(&Distribution::uniform(2), &plan).is_err());
    }
}
