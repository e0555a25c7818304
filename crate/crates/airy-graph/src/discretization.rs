//! Finite differences for `α∂³ + β∂` on truncated edges and assembly of the
//! constrained system.
//!
//! Each edge carries summation-by-parts operators: a diagonal norm `H` and
//! matrices `Q3`, `Q1` with `Q = ½B + S`, `S` antisymmetric and `B` a rank-few
//! boundary matrix built from one-sided trace functionals. Then
//! `2 Re uᴴ(αQ3 + βQ1)u` equals the boundary form evaluated on discrete traces,
//! so the semi-discrete energy balance mirrors the continuous one. Interior
//! rows use fourth-order central stencils, boundary closures are lower order.

use thiserror::Error;

use crate::graph_model::{Orientation, Side, StarGraph};
use crate::krein_bc::{constraint_matrix, KreinError, VertexCondition};
use crate::linalg::rank;
use crate::{CMat, C64};

/// Boundary block size of the SBP closure.
const M: usize = 4;
const H_BLOCK: [f64; M] = [23.0 / 72.0, 4.0 / 3.0, 19.0 / 24.0, 19.0 / 18.0];
/// Upper-triangle entries `(i, j, s)` of the antisymmetric boundary block of `S3`.
const S3_BLOCK: [(usize, usize, f64); 6] = [
    (0, 1, 29.0 / 24.0),
    (0, 2, -1.0 / 3.0),
    (0, 3, 1.0 / 8.0),
    (1, 2, -5.0 / 2.0),
    (1, 3, 4.0 / 3.0),
    (2, 3, -41.0 / 24.0),
];
const S1_BLOCK: [(usize, usize, f64); 6] = [
    (0, 1, 22.0 / 45.0),
    (0, 2, 73.0 / 360.0),
    (0, 3, -23.0 / 120.0),
    (1, 2, 2.0 / 15.0),
    (1, 3, 16.0 / 45.0),
    (2, 3, 151.0 / 360.0),
];
/// Central `h³·u'''` weights by offset.
pub const THIRD_DERIVATIVE: [(i32, f64); 6] =
    [(-3, 1.0 / 8.0), (-2, -1.0), (-1, 13.0 / 8.0), (1, -13.0 / 8.0), (2, 1.0), (3, -1.0 / 8.0)];
/// Central `h·u'` weights by offset.
pub const FIRST_DERIVATIVE: [(i32, f64); 4] = [(-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)];
/// Forward `h·u'(x0)` from four nodes.
pub const ONE_SIDED_D1: [f64; 4] = [-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0];
/// Forward `h²·u''(x0)` from four nodes.
pub const ONE_SIDED_D2: [f64; 4] = [2.0, -5.0, 4.0, -1.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizationError {
    #[error("points_per_edge = {0} is below the minimum of 16")]
    TooFewPoints(usize),
    #[error("edge length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("singular assembly: {0}")]
    SingularAssembly(String),
    #[error(transparent)]
    Krein(#[from] KreinError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub length: f64,
    pub points_per_edge: usize,
}

impl GridSpec {
    pub fn new(length: f64, points_per_edge: usize) -> Result<Self, DiscretizationError> {
        if points_per_edge < 16 {
            return Err(DiscretizationError::TooFewPoints(points_per_edge));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(DiscretizationError::BadLength(length));
        }
        Ok(GridSpec { length, points_per_edge })
    }

    pub fn h(&self) -> f64 {
        self.length / (self.points_per_edge - 1) as f64
    }
}

/// Global index map and node coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    pub orientations: Vec<Orientation>,
    /// Per edge, strictly increasing coordinates in the edge's own chart.
    pub coords: Vec<Vec<f64>>,
}

impl Grid {
    pub fn n_edges(&self) -> usize {
        self.coords.len()
    }

    pub fn n_points(&self) -> usize {
        self.spec.points_per_edge
    }

    pub fn len(&self) -> usize {
        self.n_edges() * self.n_points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, edge: usize, j: usize) -> usize {
        edge * self.n_points() + j
    }

    /// Local index of the vertex node on an edge.
    pub fn vertex_local(&self, edge: usize) -> usize {
        match self.orientations[edge] {
            Orientation::Incoming => self.n_points() - 1,
            Orientation::Outgoing => 0,
        }
    }

    /// Distance in nodes from the vertex.
    pub fn distance_from_vertex(&self, edge: usize, j: usize) -> usize {
        match self.orientations[edge] {
            Orientation::Incoming => self.n_points() - 1 - j,
            Orientation::Outgoing => j,
        }
    }
}

/// Incoming edges cover `[−X, 0]` with the vertex last, outgoing edges `[0, X]`
/// with the vertex first; edges in graph order, nodes in coordinate order.
pub fn build_grid(g: &StarGraph, spec: GridSpec) -> Grid {
    let n = spec.points_per_edge;
    let h = spec.h();
    let coords = g
        .edges()
        .iter()
        .map(|e| {
            let x0 = match e.orientation {
                Orientation::Incoming => -spec.length,
                Orientation::Outgoing => 0.0,
            };
            let mut xs: Vec<f64> = (0..n).map(|j| x0 + j as f64 * h).collect();
            // pin the endpoints exactly
            xs[0] = x0;
            xs[n - 1] = x0 + spec.length;
            xs
        })
        .collect();
    Grid { spec, orientations: g.edges().iter().map(|e| e.orientation).collect(), coords }
}

/// Scaled central stencils for `α u''' + β u'` at interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorStencils {
    pub third: Vec<(i32, f64)>,
    pub first: Vec<(i32, f64)>,
    pub alpha: f64,
    pub beta: f64,
}

impl InteriorStencils {
    /// Combined weights `α·third + β·first`, sorted by offset.
    pub fn combined(&self) -> Vec<(i32, f64)> {
        let mut w = vec![0.0; 7];
        for &(k, v) in &self.third {
            w[(k + 3) as usize] += self.alpha * v;
        }
        for &(k, v) in &self.first {
            w[(k + 3) as usize] += self.beta * v;
        }
        w.into_iter().enumerate().map(|(i, v)| (i as i32 - 3, v)).filter(|&(_, v)| v != 0.0).collect()
    }

    /// Applies the combined stencil to samples `f(j + k)`.
    pub fn apply(&self, f: impl Fn(i32) -> f64) -> f64 {
        self.combined().iter().map(|&(k, w)| w * f(k)).sum()
    }
}

pub fn interior_stencils(alpha: f64, beta: f64, h: f64) -> InteriorStencils {
    InteriorStencils {
        third: THIRD_DERIVATIVE.iter().map(|&(k, v)| (k, v / h.powi(3))).collect(),
        first: FIRST_DERIVATIVE.iter().map(|&(k, v)| (k, v / h)).collect(),
        alpha,
        beta,
    }
}

/// Row-wise sparse complex matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRows {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    pub fn new(ncols: usize) -> Self {
        SparseRows { ncols, rows: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, row: Vec<(usize, C64)>) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: &SparseRows) {
        self.rows.extend(other.rows.iter().cloned());
    }

    pub fn mul_vec(&self, u: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, w)| w * u[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.nrows(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, w) in r {
                m[(i, j)] += w;
            }
        }
        m
    }
}

/// Per-edge SBP data on `N` nodes with spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOperators {
    pub n: usize,
    pub h: f64,
    pub norm: Vec<f64>,
    /// `(i, j, q)` nonzeros of `Q3`.
    pub q3: Vec<(usize, usize, f64)>,
    pub q1: Vec<(usize, usize, f64)>,
}

fn block_value(blk: &[(usize, usize, f64)], i: usize, j: usize) -> f64 {
    for &(a, b, v) in blk {
        if (a, b) == (i, j) {
            return v;
        }
        if (b, a) == (i, j) {
            return -v;
        }
    }
    0.0
}

fn stencil_value(c: &[(i32, f64)], k: i64) -> f64 {
    c.iter().find(|&&(o, _)| o as i64 == k).map_or(0.0, |&(_, v)| v)
}

/// Left-closed antisymmetric `S` entry.
fn s_left(c: &[(i32, f64)], blk: &[(usize, usize, f64)], i: usize, j: usize) -> f64 {
    if i >= M {
        stencil_value(c, j as i64 - i as i64)
    } else if j >= M {
        -stencil_value(c, i as i64 - j as i64)
    } else {
        block_value(blk, i, j)
    }
}

/// `S` with both closures; the right one is the reflection `−J S J`.
fn s_entry(n: usize, c: &[(i32, f64)], blk: &[(usize, usize, f64)], i: usize, j: usize) -> f64 {
    if i >= n - M || j >= n - M {
        -s_left(c, blk, n - 1 - i, n - 1 - j)
    } else {
        s_left(c, blk, i, j)
    }
}

/// Trace functionals `(value, first, second derivative)` at one end, as
/// `(node, weight)` lists.
pub type TraceStencils = [Vec<(usize, f64)>; 3];

pub fn left_traces(n: usize, h: f64) -> TraceStencils {
    let _ = n;
    [
        vec![(0, 1.0)],
        (0..4).map(|k| (k, ONE_SIDED_D1[k] / h)).collect(),
        (0..4).map(|k| (k, ONE_SIDED_D2[k] / (h * h))).collect(),
    ]
}

pub fn right_traces(n: usize, h: f64) -> TraceStencils {
    [
        vec![(n - 1, 1.0)],
        (0..4).map(|k| (n - 1 - k, -ONE_SIDED_D1[k] / h)).collect(),
        (0..4).map(|k| (n - 1 - k, ONE_SIDED_D2[k] / (h * h))).collect(),
    ]
}

fn dense_vec(n: usize, s: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(j, w) in s {
        v[j] += w;
    }
    v
}

/// `e bᵀ + b eᵀ − a aᵀ` restricted to the first/last few nodes.
fn boundary_rank3(n: usize, t: &TraceStencils, out: &mut [Vec<f64>], sign: f64, nodes: &[usize]) {
    let e = dense_vec(n, &t[0]);
    let a = dense_vec(n, &t[1]);
    let b = dense_vec(n, &t[2]);
    for (ii, &i) in nodes.iter().enumerate() {
        for (jj, &j) in nodes.iter().enumerate() {
            out[ii][jj] += sign * (e[i] * b[j] + b[i] * e[j] - a[i] * a[j]);
        }
    }
}

impl EdgeOperators {
    pub fn new(n: usize, h: f64) -> Self {
        assert!(n >= 16);
        let mut norm = vec![h; n];
        for k in 0..M {
            norm[k] = h * H_BLOCK[k];
            norm[n - 1 - k] = h * H_BLOCK[k];
        }
        let left: Vec<usize> = (0..M).collect();
        let right: Vec<usize> = (n - M..n).collect();
        let mut b3l = vec![vec![0.0; M]; M];
        let mut b3r = vec![vec![0.0; M]; M];
        boundary_rank3(n, &left_traces(n, h), &mut b3l, -1.0, &left);
        boundary_rank3(n, &right_traces(n, h), &mut b3r, 1.0, &right);
        let band = 6usize;
        let mut q3 = Vec::new();
        let mut q1 = Vec::new();
        for i in 0..n {
            for j in i.saturating_sub(band)..(i + band + 1).min(n) {
                let mut v3 = s_entry(n, &THIRD_DERIVATIVE, &S3_BLOCK, i, j) / (h * h);
                let mut v1 = s_entry(n, &FIRST_DERIVATIVE, &S1_BLOCK, i, j);
                if i < M && j < M {
                    v3 += 0.5 * b3l[i][j];
                }
                if i >= n - M && j >= n - M {
                    v3 += 0.5 * b3r[i - (n - M)][j - (n - M)];
                }
                if i == j && i == 0 {
                    v1 -= 0.5;
                }
                if i == j && i == n - 1 {
                    v1 += 0.5;
                }
                if v3 != 0.0 {
                    q3.push((i, j, v3));
                }
                if v1 != 0.0 {
                    q1.push((i, j, v1));
                }
            }
        }
        EdgeOperators { n, h, norm, q3, q1 }
    }

    /// `(αQ3 + βQ1) u`.
    pub fn apply(&self, alpha: f64, beta: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(i, j, v) in &self.q3 {
            out[i] += alpha * v * u[j];
        }
        for &(i, j, v) in &self.q1 {
            out[i] += beta * v * u[j];
        }
        out
    }

    /// `H⁻¹(αQ3 + βQ1) u`, the discrete `αu''' + βu'`.
    pub fn derivative(&self, alpha: f64, beta: f64, u: &[f64]) -> Vec<f64> {
        self.apply(alpha, beta, u).iter().zip(&self.norm).map(|(a, w)| a / w).collect()
    }
}

/// The spatially discrete problem: weights `H`, the matrix `H·A_h`, vertex and
/// far-end constraint rows and the vertex trace functionals.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub graph: StarGraph,
    pub condition: VertexCondition,
    pub grid: Grid,
    /// Diagonal of `H` over all unknowns.
    pub weights: Vec<f64>,
    /// `H·A_h`, block diagonal over edges.
    pub ha: SparseRows,
    pub vertex: SparseRows,
    pub farend: SparseRows,
    /// Trace functionals onto `G−` and `G+` in `(u0 | u1 | u2)` order.
    pub trace_minus: SparseRows,
    pub trace_plus: SparseRows,
}

fn embed(grid: &Grid, edge: usize, s: &[(usize, f64)]) -> Vec<(usize, C64)> {
    s.iter().map(|&(j, w)| (grid.index(edge, j), C64::new(w, 0.0))).collect()
}

fn vertex_traces(grid: &Grid, edge: usize) -> TraceStencils {
    let (n, h) = (grid.n_points(), grid.spec.h());
    match grid.orientations[edge] {
        Orientation::Incoming => right_traces(n, h),
        Orientation::Outgoing => left_traces(n, h),
    }
}

/// Rows mapping grid values to the flattened vertex trace of one side.
pub fn trace_rows(g: &StarGraph, grid: &Grid, side: Side) -> SparseRows {
    let idx = g.side_indices(side);
    let mut rows = SparseRows::new(grid.len());
    for k in 0..3 {
        for &e in &idx {
            rows.push(embed(grid, e, &vertex_traces(grid, e)[k]));
        }
    }
    rows
}

fn compose(c: &CMat, t: &SparseRows) -> SparseRows {
    let mut out = SparseRows::new(t.ncols);
    for i in 0..c.nrows() {
        let mut acc: std::collections::BTreeMap<usize, C64> = Default::default();
        for (k, trow) in t.rows.iter().enumerate() {
            let ck = c[(i, k)];
            if ck == C64::new(0.0, 0.0) {
                continue;
            }
            for &(j, w) in trow {
                *acc.entry(j).or_default() += ck * w;
            }
        }
        out.push(acc.into_iter().collect());
    }
    out
}

/// Abstract trace constraints pulled back to the grid through the one-sided
/// trace stencils.
pub fn vertex_rows(g: &StarGraph, cond: &VertexCondition, grid: &Grid) -> Result<SparseRows, DiscretizationError> {
    let c = constraint_matrix(g, cond)?;
    let mut t = trace_rows(g, grid, Side::Minus);
    t.extend(&trace_rows(g, grid, Side::Plus));
    Ok(compose(&c, &t))
}

/// Truncation rows: `u = u' = 0` at `x = −X` on incoming edges and `u = 0` at
/// `x = X` on outgoing edges.
pub fn farend_rows(g: &StarGraph, grid: &Grid) -> SparseRows {
    let (n, h) = (grid.n_points(), grid.spec.h());
    let mut rows = SparseRows::new(grid.len());
    for (e, edge) in g.edges().iter().enumerate() {
        match edge.orientation {
            Orientation::Incoming => {
                let t = left_traces(n, h);
                rows.push(embed(grid, e, &t[0]));
                rows.push(embed(grid, e, &t[1]));
            }
            Orientation::Outgoing => {
                rows.push(embed(grid, e, &right_traces(n, h)[0]));
            }
        }
    }
    rows
}

impl DiscreteSystem {
    pub fn assemble(g: &StarGraph, cond: &VertexCondition, spec: GridSpec) -> Result<Self, DiscretizationError> {
        let grid = build_grid(g, spec);
        let vertex = vertex_rows(g, cond, &grid)?;
        let farend = farend_rows(g, &grid);
        Self::from_rows(g, cond, grid, vertex, farend)
    }

    /// Assembles with explicitly supplied constraint rows; checks that they are
    /// `3|E|` independent rows.
    pub fn from_rows(
        g: &StarGraph,
        cond: &VertexCondition,
        grid: Grid,
        vertex: SparseRows,
        farend: SparseRows,
    ) -> Result<Self, DiscretizationError> {
        let ne = g.edges().len();
        let total = vertex.nrows() + farend.nrows();
        if total != 3 * ne {
            return Err(DiscretizationError::SingularAssembly(format!(
                "{} vertex rows and {} far-end rows, need {} in total",
                vertex.nrows(),
                farend.nrows(),
                3 * ne
            )));
        }
        let mut all = vertex.clone();
        all.extend(&farend);
        let mut cols: Vec<usize> = all.rows.iter().flatten().map(|&(j, _)| j).collect();
        cols.sort_unstable();
        cols.dedup();
        let mut dense = CMat::zeros(total, cols.len());
        for (i, r) in all.rows.iter().enumerate() {
            for &(j, w) in r {
                let k = cols.binary_search(&j).unwrap();
                dense[(i, k)] += w;
            }
        }
        let rk = rank(&dense, 1e-12);
        if rk < total {
            return Err(DiscretizationError::SingularAssembly(format!("constraint rank {rk} < {total}")));
        }
        let (n, h) = (grid.n_points(), grid.spec.h());
        let ops = EdgeOperators::new(n, h);
        let mut weights = Vec::with_capacity(grid.len());
        let mut ha = SparseRows::new(grid.len());
        for (e, edge) in g.edges().iter().enumerate() {
            weights.extend_from_slice(&ops.norm);
            let mut rows = vec![std::collections::BTreeMap::<usize, f64>::new(); n];
            for &(i, j, v) in &ops.q3 {
                *rows[i].entry(j).or_default() += edge.alpha * v;
            }
            for &(i, j, v) in &ops.q1 {
                *rows[i].entry(j).or_default() += edge.beta * v;
            }
            for r in rows {
                ha.push(
                    r.into_iter()
                        .filter(|&(_, v)| v != 0.0)
                        .map(|(j, v)| (grid.index(e, j), C64::new(v, 0.0)))
                        .collect(),
                );
            }
        }
        let trace_minus = trace_rows(g, &grid, Side::Minus);
        let trace_plus = trace_rows(g, &grid, Side::Plus);
        Ok(DiscreteSystem {
            graph: g.clone(),
            condition: cond.clone(),
            grid,
            weights,
            ha,
            vertex,
            farend,
            trace_minus,
            trace_plus,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Vertex rows followed by far-end rows.
    pub fn constraints(&self) -> SparseRows {
        let mut c = self.vertex.clone();
        c.extend(&self.farend);
        c
    }

    /// `A_h u = H⁻¹ (H A_h) u`.
    pub fn apply_a(&self, u: &[C64]) -> Vec<C64> {
        self.ha.mul_vec(u).into_iter().zip(&self.weights).map(|(v, w)| v / *w).collect()
    }

    pub fn dense_ha(&self) -> CMat {
        self.ha.to_dense()
    }

    /// Position of each unknown in the banded saddle ordering.
    pub fn saddle_layout(&self) -> SaddleLayout {
        let nv = self.vertex.nrows();
        let nf = self.farend.nrows();
        let ne = self.grid.n_edges();
        let n = self.len();
        let mut node_pos = vec![0; n];
        for e in 0..ne {
            for j in 0..self.grid.n_points() {
                node_pos[self.grid.index(e, j)] = nv + self.grid.distance_from_vertex(e, j) * ne + e;
            }
        }
        SaddleLayout { n, nv, nf, node_pos }
    }
}

/// Ordering of `(u, λ_vertex, λ_far)` for the saddle system: vertex
/// multipliers, then nodes by distance from the vertex (edges interleaved),
/// then far-end multipliers. Keeps every constraint row next to its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleLayout {
    pub n: usize,
    pub nv: usize,
    pub nf: usize,
    pub node_pos: Vec<usize>,
}

impl SaddleLayout {
    pub fn dim(&self) -> usize {
        self.n + self.nv + self.nf
    }

    /// Position of the `r`-th constraint multiplier (vertex rows first).
    pub fn multiplier_pos(&self, r: usize) -> usize {
        if r < self.nv {
            r
        } else {
            self.nv + self.n + (r - self.nv)
        }
    }
}
