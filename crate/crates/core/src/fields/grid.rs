use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum node count per axis; the widest stencil (one-sided second
/// derivative and the double-layer clamp) needs five nodes.
pub const MIN_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryLabel {
    /// Clamped (Dirichlet) part of the boundary.
    Gamma0,
    /// Traction part of the boundary.
    GammaT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryPart {
    Gamma0,
    GammaT,
    All,
}

impl BoundaryPart {
    fn matches(self, label: BoundaryLabel) -> bool {
        match self {
            BoundaryPart::All => true,
            BoundaryPart::Gamma0 => label == BoundaryLabel::Gamma0,
            BoundaryPart::GammaT => label == BoundaryLabel::GammaT,
        }
    }
}

/// Edge-wise labelling of the boundary of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPartition {
    pub west: BoundaryLabel,
    pub east: BoundaryLabel,
    pub south: BoundaryLabel,
    pub north: BoundaryLabel,
}

impl BoundaryPartition {
    pub fn clamped() -> Self {
        Self {
            west: BoundaryLabel::Gamma0,
            east: BoundaryLabel::Gamma0,
            south: BoundaryLabel::Gamma0,
            north: BoundaryLabel::Gamma0,
        }
    }

    /// Gamma0 = west + south, GammaT = east + north.
    pub fn west_south_clamped() -> Self {
        Self {
            west: BoundaryLabel::Gamma0,
            east: BoundaryLabel::GammaT,
            south: BoundaryLabel::Gamma0,
            north: BoundaryLabel::GammaT,
        }
    }

    pub fn is_fully_clamped(&self) -> bool {
        self.edges().iter().all(|(_, l)| *l == BoundaryLabel::Gamma0)
    }

    /// Edges in the order west, east, south, north.
    pub fn edges(&self) -> [(Edge, BoundaryLabel); 4] {
        [
            (Edge::West, self.west),
            (Edge::East, self.east),
            (Edge::South, self.south),
            (Edge::North, self.north),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    West,
    East,
    South,
    North,
}

/// Uniform tensor-product grid on `[0, lx] x [0, ly]`.
///
/// `nx`, `ny` count nodes (so `hx = lx / (nx - 1)`). Node `(i, j)` is stored
/// at index `i + nx * j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub partition: BoundaryPartition,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, partition: BoundaryPartition) -> Result<Self> {
        let g = Self { nx, ny, lx, ly, partition };
        g.validate()?;
        Ok(g)
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0, BoundaryPartition::clamped())
    }

    pub fn validate(&self) -> Result<()> {
        let got = self.nx.min(self.ny);
        if got < MIN_NODES {
            return Err(Error::Stencil { min: MIN_NODES, got });
        }
        if !(self.lx > 0.0 && self.ly > 0.0 && self.lx.is_finite() && self.ly.is_finite()) {
            return Err(Error::Grid(format!("side lengths must be positive, got {} x {}", self.lx, self.ly)));
        }
        if !self.partition.edges().iter().any(|(_, l)| *l == BoundaryLabel::Gamma0) {
            return Err(Error::Grid("Gamma0 must be nonempty".into()));
        }
        Ok(())
    }

    pub fn hx(&self) -> f64 {
        self.lx / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / (self.ny - 1) as f64
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        match axis {
            0 => self.hx(),
            1 => self.hy(),
            _ => panic!("axis {axis} out of range for a 2D grid"),
        }
    }

    pub fn shape(&self) -> [usize; 2] {
        [self.nx, self.ny]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (self.x(i), self.y(j))
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    fn edge_label(&self, e: Edge) -> BoundaryLabel {
        match e {
            Edge::West => self.partition.west,
            Edge::East => self.partition.east,
            Edge::South => self.partition.south,
            Edge::North => self.partition.north,
        }
    }

    /// Edges a node lies on (corners lie on two).
    pub fn node_edges(&self, i: usize, j: usize) -> Vec<Edge> {
        let mut out = Vec::with_capacity(2);
        if i == 0 {
            out.push(Edge::West);
        }
        if i == self.nx - 1 {
            out.push(Edge::East);
        }
        if j == 0 {
            out.push(Edge::South);
        }
        if j == self.ny - 1 {
            out.push(Edge::North);
        }
        out
    }

    /// Label of a boundary node; `None` for interior nodes. A corner shared by
    /// a clamped and a traction edge is clamped.
    pub fn node_label(&self, i: usize, j: usize) -> Option<BoundaryLabel> {
        let edges = self.node_edges(i, j);
        if edges.is_empty() {
            return None;
        }
        if edges.iter().any(|e| self.edge_label(*e) == BoundaryLabel::Gamma0) {
            Some(BoundaryLabel::Gamma0)
        } else {
            Some(BoundaryLabel::GammaT)
        }
    }

    pub fn is_gamma0(&self, i: usize, j: usize) -> bool {
        self.node_label(i, j) == Some(BoundaryLabel::Gamma0)
    }

    /// Mask of nodes where the deflection is fixed by the clamp: Gamma0 nodes
    /// plus the first ring inward of each clamped edge, which makes the
    /// boundary first difference (hence the normal derivative) vanish.
    pub fn clamp_mask_deflection(&self) -> Vec<bool> {
        let mut m = vec![false; self.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                let mut fixed = self.is_gamma0(i, j);
                let p = &self.partition;
                fixed |= p.west == BoundaryLabel::Gamma0 && i <= 1;
                fixed |= p.east == BoundaryLabel::Gamma0 && i + 2 >= self.nx;
                fixed |= p.south == BoundaryLabel::Gamma0 && j <= 1;
                fixed |= p.north == BoundaryLabel::Gamma0 && j + 2 >= self.ny;
                m[self.idx(i, j)] = fixed;
            }
        }
        m
    }

    /// Mask of nodes where in-plane displacements are fixed (Gamma0 nodes).
    pub fn clamp_mask_inplane(&self) -> Vec<bool> {
        (0..self.len())
            .map(|k| {
                let (i, j) = self.ij(k);
                self.is_gamma0(i, j)
            })
            .collect()
    }

    /// Trapezoid weights along one axis.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let (n, h) = match axis {
            0 => (self.nx, self.hx()),
            _ => (self.ny, self.hy()),
        };
        trapezoid_weights(n, h)
    }

    /// Tensor-product trapezoid weights, one per node.
    pub fn weights(&self) -> Vec<f64> {
        let wx = self.axis_weights(0);
        let wy = self.axis_weights(1);
        let mut w = Vec::with_capacity(self.len());
        for wyj in &wy {
            for wxi in &wx {
                w.push(wxi * wyj);
            }
        }
        w
    }

    /// Trapezoid line weights of every boundary node over the edges selected
    /// by `part`. Corners accumulate the weights of both their edges when both
    /// are selected.
    pub fn boundary_weights(&self, part: BoundaryPart) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        let wx = self.axis_weights(0);
        let wy = self.axis_weights(1);
        for (edge, label) in self.partition.edges() {
            if !part.matches(label) {
                continue;
            }
            match edge {
                Edge::West | Edge::East => {
                    let i = if edge == Edge::West { 0 } else { self.nx - 1 };
                    for (j, wyj) in wy.iter().enumerate() {
                        w[self.idx(i, j)] += wyj;
                    }
                }
                Edge::South | Edge::North => {
                    let j = if edge == Edge::South { 0 } else { self.ny - 1 };
                    for (i, wxi) in wx.iter().enumerate() {
                        w[self.idx(i, j)] += wxi;
                    }
                }
            }
        }
        w
    }

    /// Outward unit normal components `(n1, n2)` of every node, summed over
    /// the selected edges, paired with the per-edge line weights. Returned as
    /// `(weight * n1, weight * n2)` per node so that boundary fluxes are a dot
    /// product.
    pub fn weighted_normals(&self, part: BoundaryPart) -> (Vec<f64>, Vec<f64>) {
        let mut n1 = vec![0.0; self.len()];
        let mut n2 = vec![0.0; self.len()];
        let wx = self.axis_weights(0);
        let wy = self.axis_weights(1);
        for (edge, label) in self.partition.edges() {
            if !part.matches(label) {
                continue;
            }
            match edge {
                Edge::West => (0..self.ny).for_each(|j| n1[self.idx(0, j)] -= wy[j]),
                Edge::East => (0..self.ny).for_each(|j| n1[self.idx(self.nx - 1, j)] += wy[j]),
                Edge::South => (0..self.nx).for_each(|i| n2[self.idx(i, 0)] -= wx[i]),
                Edge::North => (0..self.nx).for_each(|i| n2[self.idx(i, self.ny - 1)] += wx[i]),
            }
        }
        (n1, n2)
    }

    pub fn has_part(&self, part: BoundaryPart) -> bool {
        self.partition.edges().iter().any(|(_, l)| part.matches(*l))
    }
}

pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Face labelling of a box: `[x=0, x=L, y=0, y=L, z=0, z=L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacePartition(pub [BoundaryLabel; 6]);

impl FacePartition {
    pub fn clamped() -> Self {
        Self([BoundaryLabel::Gamma0; 6])
    }

    /// Gamma0 = the x=0 face, everything else traction.
    pub fn clamped_west() -> Self {
        let mut f = [BoundaryLabel::GammaT; 6];
        f[0] = BoundaryLabel::Gamma0;
        Self(f)
    }

    pub fn is_fully_clamped(&self) -> bool {
        self.0.iter().all(|l| *l == BoundaryLabel::Gamma0)
    }
}

/// Uniform grid on a box; node `(i, j, k)` at `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub faces: FacePartition,
}

impl Grid3 {
    pub fn new(n: [usize; 3], l: [f64; 3], faces: FacePartition) -> Result<Self> {
        let g = Self { nx: n[0], ny: n[1], nz: n[2], lx: l[0], ly: l[1], lz: l[2], faces };
        let got = n.iter().copied().min().unwrap_or(0);
        if got < MIN_NODES {
            return Err(Error::Stencil { min: MIN_NODES, got });
        }
        if l.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Grid(format!("side lengths must be positive, got {l:?}")));
        }
        if !faces.0.contains(&BoundaryLabel::Gamma0) {
            return Err(Error::Grid("Gamma0 must be nonempty".into()));
        }
        Ok(g)
    }

    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::new([n; 3], [1.0; 3], FacePartition::clamped())
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let [n, l] = match axis {
            0 => [self.nx as f64, self.lx],
            1 => [self.ny as f64, self.ly],
            2 => [self.nz as f64, self.lz],
            _ => panic!("axis {axis} out of range for a 3D grid"),
        };
        l / (n - 1.0)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn ijk(&self, n: usize) -> (usize, usize, usize) {
        (n % self.nx, (n / self.nx) % self.ny, n / (self.nx * self.ny))
    }

    pub fn coords(&self, n: usize) -> [f64; 3] {
        let (i, j, k) = self.ijk(n);
        [i as f64 * self.spacing(0), j as f64 * self.spacing(1), k as f64 * self.spacing(2)]
    }

    /// Faces (0..6) a node lies on.
    pub fn node_faces(&self, n: usize) -> Vec<usize> {
        let (i, j, k) = self.ijk(n);
        let mut f = Vec::new();
        let idx = [i, j, k];
        let sz = self.shape();
        for a in 0..3 {
            if idx[a] == 0 {
                f.push(2 * a);
            }
            if idx[a] == sz[a] - 1 {
                f.push(2 * a + 1);
            }
        }
        f
    }

    pub fn is_gamma0(&self, n: usize) -> bool {
        self.node_faces(n).iter().any(|f| self.faces.0[*f] == BoundaryLabel::Gamma0)
    }

    pub fn clamp_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|n| self.is_gamma0(n)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let w: Vec<Vec<f64>> = (0..3).map(|a| trapezoid_weights(self.shape()[a], self.spacing(a))).collect();
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.nz {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    out.push(w[0][i] * w[1][j] * w[2][k]);
                }
            }
        }
        out
    }

    /// Per node, `weight * outward normal` summed over faces selected by
    /// `part`, using the trapezoid rule on each face.
    pub fn weighted_normals(&self, part: BoundaryPart) -> [Vec<f64>; 3] {
        let mut out = [vec![0.0; self.len()], vec![0.0; self.len()], vec![0.0; self.len()]];
        let w: Vec<Vec<f64>> = (0..3).map(|a| trapezoid_weights(self.shape()[a], self.spacing(a))).collect();
        for n in 0..self.len() {
            let (i, j, k) = self.ijk(n);
            let idx = [i, j, k];
            for f in self.node_faces(n) {
                if !part.matches(self.faces.0[f]) {
                    continue;
                }
                let a = f / 2;
                let sign = if f % 2 == 0 { -1.0 } else { 1.0 };
                let area: f64 = (0..3).filter(|b| *b != a).map(|b| w[b][idx[b]]).product();
                out[a][n] += sign * area;
            }
        }
        out
    }

    /// Face-quadrature weights (sum over selected faces).
    pub fn boundary_weights(&self, part: BoundaryPart) -> Vec<f64> {
        let w: Vec<Vec<f64>> = (0..3).map(|a| trapezoid_weights(self.shape()[a], self.spacing(a))).collect();
        let mut out = vec![0.0; self.len()];
        for (n, o) in out.iter_mut().enumerate() {
            let (i, j, k) = self.ijk(n);
            let idx = [i, j, k];
            for f in self.node_faces(n) {
                if part.matches(self.faces.0[f]) {
                    let a = f / 2;
                    *o += (0..3).filter(|b| *b != a).map(|b| w[b][idx[b]]).product::<f64>();
                }
            }
        }
        out
    }
}
