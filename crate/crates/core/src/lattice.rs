//! Brickwork, cluster and custom lattices, and the angle fields that live on
//! them.
//!
//! Every lattice is a subgraph of a rectangular grid of physical sites,
//! indexed row-major: site `(row, col)` has index `row * physical_cols + col`.
//!
//! A brickwork lattice with `m` rows and `n` cells expands every logical
//! white circle into a horizontal chain of [`CELL_LEN`] physical sites, so it
//! has `m × 7n` sites. Horizontal edges join consecutive sites of a row.
//! Vertical edges follow the brick rule of [`brickwork_vertical_edges`].

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::PI_8;

/// Physical sites per logical white circle.
pub const CELL_LEN: usize = 7;

/// Position, within a seven-site cell, of the site that carries the
/// vertical edge of a brick joint.
pub const VERTICAL_ATTACHMENT: usize = 0;

/// Rotation angles of the seven sites of a cell.
pub const CELL_ANGLES: [f64; CELL_LEN] = [PI_8, 0.0, -2.0 * PI_8, 0.0, 2.0 * PI_8, 0.0, -PI_8];

/// Ising coupling that turns `exp(i J Z⊗Z)` into a controlled-Z up to local
/// fields.
pub const DEFAULT_COUPLING: f64 = PI / 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    Brickwork,
    Cluster,
    Custom,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Brickwork => "brickwork",
            LatticeKind::Cluster => "cluster",
            LatticeKind::Custom => "custom",
        }
    }

    fn max_degree(self) -> Option<usize> {
        match self {
            LatticeKind::Brickwork => Some(3),
            LatticeKind::Cluster => Some(4),
            LatticeKind::Custom => None,
        }
    }
}

/// Site roles of the brickwork figure.
///
/// In a seven-site cell the sites whose outcomes carry the encoded angle
/// (`s1⊕s3′, s2, s2, s3`) are blue, the others white. Red marks cluster sites
/// consumed by break/bridge measurements; everything else is plain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteRole {
    White,
    Blue,
    Red,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub row: usize,
    pub col: usize,
    pub role: SiteRole,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    kind: LatticeKind,
    rows: usize,
    cols: usize,
    physical_cols: usize,
    sites: Vec<Site>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

fn check_dims(rows: i64, cols: i64) -> Result<(usize, usize)> {
    if rows < 1 || cols < 1 {
        return Err(Error::InvalidDimensions { rows, cols });
    }
    Ok((rows as usize, cols as usize))
}

/// Vertical brick joints of an `m_cells × n_cells` brickwork, as
/// `(upper_row, cell)` pairs, zero-based.
///
/// Cells in even (zero-based) cell-columns join rows `(0,1), (2,3), …`;
/// cells in odd cell-columns join rows `(1,2), (3,4), …`. The edge attaches
/// at [`VERTICAL_ATTACHMENT`] within the cell.
pub fn brickwork_vertical_edges(m_cells: usize, n_cells: usize) -> Vec<(usize, usize)> {
    let mut joints = Vec::new();
    for cell in 0..n_cells {
        let first = cell % 2;
        let mut row = first;
        while row + 1 < m_cells {
            joints.push((row, cell));
            row += 2;
        }
    }
    joints.sort_unstable();
    joints
}

impl Lattice {
    fn assemble(
        kind: LatticeKind,
        rows: usize,
        cols: usize,
        physical_rows: usize,
        physical_cols: usize,
        roles: impl Fn(usize, usize) -> SiteRole,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let num_sites = physical_rows * physical_cols;
        let sites: Vec<Site> = (0..physical_rows)
            .flat_map(|row| (0..physical_cols).map(move |col| (row, col)))
            .map(|(row, col)| Site { row, col, role: roles(row, col) })
            .collect();

        let mut seen = BTreeSet::new();
        for (a, b) in edges {
            if a >= num_sites || b >= num_sites {
                return Err(Error::SiteOutOfRange { site: a.max(b), num_sites });
            }
            if a == b {
                return Err(Error::InvalidLattice(format!("self-loop at site {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidLattice(format!("duplicate edge ({a}, {b})")));
            }
        }
        let edges: Vec<(usize, usize)> = seen.into_iter().collect();

        let mut neighbors = vec![Vec::new(); num_sites];
        for &(a, b) in &edges {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        if let Some(cap) = kind.max_degree() {
            if let Some((site, list)) = neighbors.iter().enumerate().find(|(_, l)| l.len() > cap) {
                return Err(Error::InvalidLattice(format!(
                    "site {site} has degree {} above the {} bound of {cap}",
                    list.len(),
                    kind.name()
                )));
            }
        }

        Ok(Self { kind, rows, cols, physical_cols, sites, edges, neighbors })
    }

    /// Brickwork lattice of `m_cells` rows and `n_cells` seven-site cells per
    /// row.
    pub fn brickwork(m_cells: i64, n_cells: i64) -> Result<Self> {
        let (m, n) = check_dims(m_cells, n_cells)?;
        let width = CELL_LEN * n;
        let idx = |row: usize, col: usize| row * width + col;

        let horizontal = (0..m).flat_map(|row| (0..width - 1).map(move |col| (idx(row, col), idx(row, col + 1))));
        let vertical = brickwork_vertical_edges(m, n).into_iter().map(|(row, cell)| {
            let col = cell * CELL_LEN + VERTICAL_ATTACHMENT;
            (idx(row, col), idx(row + 1, col))
        });
        let edges: Vec<_> = horizontal.chain(vertical).collect();

        let role = |_row: usize, col: usize| match col % CELL_LEN {
            0 | 1 | 3 | 5 => SiteRole::Blue,
            _ => SiteRole::White,
        };
        Self::assemble(LatticeKind::Brickwork, m, n, m, width, role, edges)
    }

    /// Square-grid (cluster-state) lattice.
    pub fn cluster(rows: i64, cols: i64) -> Result<Self> {
        let (r, c) = check_dims(rows, cols)?;
        let idx = |row: usize, col: usize| row * c + col;
        let mut edges = Vec::with_capacity(2 * r * c);
        for row in 0..r {
            for col in 0..c {
                if col + 1 < c {
                    edges.push((idx(row, col), idx(row, col + 1)));
                }
                if row + 1 < r {
                    edges.push((idx(row, col), idx(row + 1, col)));
                }
            }
        }
        Self::assemble(LatticeKind::Cluster, r, c, r, c, |_, _| SiteRole::Plain, edges)
    }

    /// Arbitrary graph on a `rows × cols` grid of sites.
    pub fn custom(rows: i64, cols: i64, edges: &[(usize, usize)]) -> Result<Self> {
        let (r, c) = check_dims(rows, cols)?;
        Self::assemble(LatticeKind::Custom, r, c, r, c, |_, _| SiteRole::Plain, edges.iter().copied())
    }

    /// A copy with the given roles, for marking red sites on a cluster.
    pub fn with_roles(&self, roles: &[SiteRole]) -> Result<Self> {
        if roles.len() != self.num_sites() {
            return Err(Error::LengthMismatch { expected: self.num_sites(), found: roles.len() });
        }
        let mut out = self.clone();
        for (site, &role) in out.sites.iter_mut().zip(roles) {
            site.role = role;
        }
        Ok(out)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    /// Rows `m`: logical rows for brickwork, grid rows otherwise.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Columns `n`: cells per row for brickwork, grid columns otherwise.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn physical_rows(&self) -> usize {
        self.sites.len() / self.physical_cols
    }

    pub fn physical_cols(&self) -> usize {
        self.physical_cols
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> &Site {
        &self.sites[index]
    }

    /// Row-major index of `(row, col)`, if the position exists.
    pub fn index_of(&self, row: usize, col: usize) -> Option<usize> {
        (row < self.physical_rows() && col < self.physical_cols).then(|| row * self.physical_cols + col)
    }

    /// Edges as `(low, high)` pairs in increasing order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, site: usize) -> &[usize] {
        &self.neighbors[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.neighbors[site].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// For brickwork lattices, the `(row, cell, position)` of a site.
    pub fn cell_of(&self, site: usize) -> Option<(usize, usize, usize)> {
        if self.kind != LatticeKind::Brickwork {
            return None;
        }
        let s = self.sites.get(site)?;
        Some((s.row, s.col / CELL_LEN, s.col % CELL_LEN))
    }
}

/// Closed-form site count of [`Lattice::brickwork`].
pub fn brickwork_site_count(m_cells: usize, n_cells: usize) -> usize {
    CELL_LEN * m_cells * n_cells
}

/// Closed-form edge count of [`Lattice::brickwork`]: `m(7n − 1)` horizontal
/// edges plus `⌈n/2⌉⌊m/2⌋ + ⌊n/2⌋⌊(m−1)/2⌋` vertical ones.
pub fn brickwork_edge_count(m_cells: usize, n_cells: usize) -> usize {
    let horizontal = m_cells * (CELL_LEN * n_cells - 1);
    let vertical = n_cells.div_ceil(2) * (m_cells / 2) + (n_cells / 2) * ((m_cells - 1) / 2);
    horizontal + vertical
}

/// Per-site rotation angles `θ_i` and the Ising coupling `J`.
///
/// The local field of site `i` in the Hamiltonian is `B_i = θ_i / 2`, so that
/// `exp(−i B_i Z_i) = R_z(θ_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleField {
    angles: Vec<f64>,
    coupling: f64,
}

impl AngleField {
    pub fn new(angles: Vec<f64>, coupling: f64) -> Self {
        Self { angles, coupling }
    }

    pub fn zeros(num_sites: usize) -> Self {
        Self::new(vec![0.0; num_sites], DEFAULT_COUPLING)
    }

    /// Checks that the field assigns exactly one angle per site of `lattice`.
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        if self.angles.len() != lattice.num_sites() {
            return Err(Error::MissingAngle(self.angles.len().min(lattice.num_sites())));
        }
        if let Some(i) = self.angles.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter(format!("angle of site {i} is not finite")));
        }
        Ok(())
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, site: usize) -> f64 {
        self.angles[site]
    }

    /// `B_i = θ_i / 2`.
    pub fn field(&self, site: usize) -> f64 {
        self.angles[site] / 2.0
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn set_angle(&mut self, site: usize, theta: f64) {
        self.angles[site] = theta;
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }
}

/// The translation-invariant brickwork field: every cell carries
/// [`CELL_ANGLES`], and `J = π/4`.
pub fn canonical_angle_field(lattice: &Lattice) -> Result<AngleField> {
    if lattice.kind() != LatticeKind::Brickwork {
        return Err(Error::WrongLatticeKind { expected: "brickwork", found: lattice.kind().name() });
    }
    let angles = lattice.sites().iter().map(|s| CELL_ANGLES[s.col % CELL_LEN]).collect();
    Ok(AngleField::new(angles, DEFAULT_COUPLING))
}

/// JSON description of a lattice and, optionally, its angles.
///
/// ```json
/// {"kind": "custom", "m": 1, "n": 2, "edges": [[0, 1]], "angles": {"0": 0.5}}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    pub m: i64,
    pub n: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
}

impl LatticeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidLattice(e.to_string()))
    }

    /// Builds the lattice and its field. Brickwork lattices start from the
    /// canonical field, others from zero angles; `angles` entries override.
    pub fn build(&self) -> Result<(Lattice, AngleField)> {
        let lattice = match (self.kind, &self.edges) {
            (LatticeKind::Custom, Some(edges)) => {
                let pairs: Vec<_> = edges.iter().map(|[a, b]| (*a, *b)).collect();
                Lattice::custom(self.m, self.n, &pairs)?
            }
            (LatticeKind::Custom, None) => {
                return Err(Error::InvalidLattice("custom lattice needs an edge list".into()))
            }
            (_, Some(_)) => return Err(Error::InvalidLattice("edges are only accepted for custom lattices".into())),
            (LatticeKind::Brickwork, None) => Lattice::brickwork(self.m, self.n)?,
            (LatticeKind::Cluster, None) => Lattice::cluster(self.m, self.n)?,
        };

        let mut field = match lattice.kind() {
            LatticeKind::Brickwork => canonical_angle_field(&lattice)?,
            _ => AngleField::zeros(lattice.num_sites()),
        };
        if let Some(overrides) = &self.angles {
            for (key, &theta) in overrides {
                let site: usize =
                    key.parse().map_err(|_| Error::InvalidLattice(format!("angle key {key:?} is not a site index")))?;
                if site >= lattice.num_sites() {
                    return Err(Error::SiteOutOfRange { site, num_sites: lattice.num_sites() });
                }
                field.set_angle(site, theta);
            }
        }
        if let Some(j) = self.coupling {
            field = field.with_coupling(j);
        }
        field.validate(&lattice)?;
        Ok((lattice, field))
    }
}
