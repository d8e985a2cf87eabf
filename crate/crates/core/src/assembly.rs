//! Bilinear (Q1) finite-element assembly on the structured fine grid.
//!
//! Every operator in the solver is a combination of three per-quadrature-point
//! coefficient fields: a diffusion weight per continuum, a reaction (mass)
//! weight per continuum and a transfer weight per ordered pair of continua.
//! [`FormCoefficients`] stores those fields; [`assemble`] turns them into a
//! block operator over a [`DofMap`].

use crate::error::{Error, Result};
use crate::linalg::SparseOperator;
use crate::mesh::{CoarsePartition, StructuredGrid};
use crate::model::{CoefficientField, Nonlinearity, ProblemSpec, Source, Transfer};

/// Tensor Gauss rule on a fine cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    #[default]
    Gauss2,
    Gauss3,
}

impl QuadratureRule {
    /// Points `(xi, eta)` on the unit reference square with weights summing
    /// to one.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let line: Vec<(f64, f64)> = match self {
            QuadratureRule::Gauss2 => {
                let d = 0.5 / 3f64.sqrt();
                vec![(0.5 - d, 0.5), (0.5 + d, 0.5)]
            }
            QuadratureRule::Gauss3 => {
                let d = 0.5 * 0.6f64.sqrt();
                vec![(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
            }
        };
        let mut out = Vec::with_capacity(line.len() * line.len());
        for &(eta, wy) in &line {
            for &(xi, wx) in &line {
                out.push((xi, eta, wx * wy));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        match self {
            QuadratureRule::Gauss2 => 4,
            QuadratureRule::Gauss3 => 9,
        }
    }
}

/// Bilinear shape functions on the unit square, corners in tensor order.
pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta]
}

/// Reference gradients `(d/dxi, d/deta)` of [`shape`].
pub fn shape_grad(xi: f64, eta: f64) -> [(f64, f64); 4] {
    [
        (-(1.0 - eta), -(1.0 - xi)),
        (1.0 - eta, -xi),
        (-eta, 1.0 - xi),
        (eta, xi),
    ]
}

/// Per-point element tables for a rule on a cell of width `h`.
#[derive(Debug, Clone)]
struct ElementTables {
    /// Physical offsets of the points inside the cell, as fractions of `h`.
    points: Vec<(f64, f64)>,
    shape: Vec<[f64; 4]>,
    /// `w_q grad N_a . grad N_b` integrated over the cell (h-independent in 2D).
    stiffness: Vec<[[f64; 4]; 4]>,
    /// `w_q N_a N_b h^2`.
    mass: Vec<[[f64; 4]; 4]>,
    /// `w_q N_a h^2`.
    load: Vec<[f64; 4]>,
}

impl ElementTables {
    fn new(rule: QuadratureRule, h: f64) -> Self {
        let pts = rule.points();
        let mut t = ElementTables {
            points: Vec::with_capacity(pts.len()),
            shape: Vec::with_capacity(pts.len()),
            stiffness: Vec::with_capacity(pts.len()),
            mass: Vec::with_capacity(pts.len()),
            load: Vec::with_capacity(pts.len()),
        };
        let area = h * h;
        for (xi, eta, w) in pts {
            let n = shape(xi, eta);
            let g = shape_grad(xi, eta);
            let mut k = [[0.0; 4]; 4];
            let mut m = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    k[a][b] = w * (g[a].0 * g[b].0 + g[a].1 * g[b].1);
                    m[a][b] = w * n[a] * n[b] * area;
                }
            }
            t.points.push((xi, eta));
            t.shape.push(n);
            t.stiffness.push(k);
            t.mass.push(m);
            t.load.push(n.map(|v| w * v * area));
        }
        t
    }
}

/// Nodal pressures of every continuum at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    /// One array of length `node_count` per continuum.
    pub values: Vec<Vec<f64>>,
}

impl State {
    pub fn zeros(grid: &StructuredGrid, continua: usize) -> Self {
        Self {
            t: 0.0,
            values: vec![vec![0.0; grid.node_count()]; continua],
        }
    }

    pub fn continua(&self) -> usize {
        self.values.len()
    }

    /// Nodal interpolant of `f(x, y)` in every continuum, zero on the boundary.
    pub fn interpolate(grid: &StructuredGrid, continua: usize, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        let mut s = Self::zeros(grid, continua);
        for (i, v) in s.values.iter_mut().enumerate() {
            for &node in grid.interior_nodes() {
                let (x, y) = grid.node_position(node);
                v[node] = f(i, x, y);
            }
        }
        s
    }

    /// Builds a state from a vector over `map` (boundary and unmapped nodes 0).
    pub fn from_dofs(grid: &StructuredGrid, map: &DofMap, x: &[f64]) -> Self {
        let mut s = Self::zeros(grid, map.continua());
        for (i, v) in s.values.iter_mut().enumerate() {
            for (k, &node) in map.nodes().iter().enumerate() {
                v[node] = x[i * map.n_local() + k];
            }
        }
        s
    }

    pub fn to_dofs(&self, map: &DofMap) -> Vec<f64> {
        let mut x = vec![0.0; map.dim()];
        for (i, v) in self.values.iter().enumerate() {
            for (k, &node) in map.nodes().iter().enumerate() {
                x[i * map.n_local() + k] = v[node];
            }
        }
        x
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Numbering of unknowns: a list of fine nodes, replicated per continuum.
/// Unknown `(i, k)` is `i * n_local + k`.
#[derive(Debug, Clone)]
pub struct DofMap {
    nodes: Vec<usize>,
    local: Vec<u32>,
    continua: usize,
}

const UNMAPPED: u32 = u32::MAX;

impl DofMap {
    pub fn from_nodes(grid: &StructuredGrid, nodes: &[usize], continua: usize) -> Self {
        let mut local = vec![UNMAPPED; grid.node_count()];
        for (k, &node) in nodes.iter().enumerate() {
            local[node] = k as u32;
        }
        Self {
            nodes: nodes.to_vec(),
            local,
            continua,
        }
    }

    /// Interior (Dirichlet-free) nodes of the whole grid.
    pub fn interior(grid: &StructuredGrid, continua: usize) -> Self {
        Self::from_nodes(grid, grid.interior_nodes(), continua)
    }

    /// All nodes, boundary included.
    pub fn all(grid: &StructuredGrid, continua: usize) -> Self {
        let nodes: Vec<usize> = (0..grid.node_count()).collect();
        Self::from_nodes(grid, &nodes, continua)
    }

    /// Nodes of `nodes` that are not on the domain boundary.
    pub fn interior_of(grid: &StructuredGrid, nodes: &[usize], continua: usize) -> Self {
        let kept: Vec<usize> = nodes.iter().copied().filter(|n| !grid.is_boundary(*n)).collect();
        Self::from_nodes(grid, &kept, continua)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    pub fn continua(&self) -> usize {
        self.continua
    }

    pub fn dim(&self) -> usize {
        self.nodes.len() * self.continua
    }

    pub fn local(&self, node: usize) -> Option<usize> {
        let l = self.local[node];
        (l != UNMAPPED).then_some(l as usize)
    }

    pub fn dof(&self, continuum: usize, node: usize) -> Option<usize> {
        self.local(node).map(|k| continuum * self.nodes.len() + k)
    }

    /// Positions of this map's unknowns inside `outer`. Every node must be
    /// present in `outer`.
    pub fn embed_into(&self, outer: &DofMap) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim());
        for i in 0..self.continua {
            for &node in &self.nodes {
                idx.push(outer.dof(i, node).expect("node missing from outer map"));
            }
        }
        idx
    }
}

/// Coefficient fields sampled at the quadrature points of every fine cell.
#[derive(Debug, Clone)]
pub struct FormCoefficients {
    rule: QuadratureRule,
    continua: usize,
    cells: usize,
    nq: usize,
    diffusion: Option<Vec<f64>>,
    reaction: Option<Vec<f64>>,
    transfer: Option<Vec<f64>>,
}

fn accumulate(slot: &mut Option<Vec<f64>>, len: usize) -> &mut Vec<f64> {
    slot.get_or_insert_with(|| vec![0.0; len])
}

impl FormCoefficients {
    pub fn new(grid: &StructuredGrid, continua: usize, rule: QuadratureRule) -> Self {
        Self {
            rule,
            continua,
            cells: grid.cell_count(),
            nq: rule.len(),
            diffusion: None,
            reaction: None,
            transfer: None,
        }
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn continua(&self) -> usize {
        self.continua
    }

    /// True when the assembled operator is symmetric: every transfer
    /// coefficient agrees with its transposed pair.
    pub fn is_symmetric(&self) -> bool {
        let Some(t) = &self.transfer else { return true };
        let (nc, nq) = (self.continua, self.nq);
        (0..self.cells).all(|cell| {
            (0..nc).all(|i| {
                (0..i).all(|l| {
                    (0..nq).all(|q| t[((cell * nc + i) * nc + l) * nq + q] == t[((cell * nc + l) * nc + i) * nq + q])
                })
            })
        })
    }

    fn per_continuum_len(&self) -> usize {
        self.cells * self.continua * self.nq
    }

    fn per_pair_len(&self) -> usize {
        self.cells * self.continua * self.continua * self.nq
    }

    /// Pressure of continuum `i` at every quadrature point of `cell`.
    fn point_values<'a>(
        grid: &StructuredGrid,
        tables: &'a ElementTables,
        u: &'a [f64],
        cell: usize,
    ) -> impl Iterator<Item = f64> + 'a {
        let nodes = grid.cell_nodes(cell);
        tables
            .shape
            .iter()
            .map(move |n| (0..4).map(|a| n[a] * u[nodes[a]]).sum())
    }

    /// Adds `weight * kappa_i * mu_i(u_i)` to the diffusion field of continuum `i`.
    pub fn add_conductivity(
        &mut self,
        grid: &StructuredGrid,
        i: usize,
        field: &CoefficientField,
        nl: &Nonlinearity,
        u: &[f64],
        weight: f64,
    ) -> Result<()> {
        let tables = ElementTables::new(self.rule, grid.h());
        let (nc, nq, len) = (self.continua, self.nq, self.per_continuum_len());
        let d = accumulate(&mut self.diffusion, len);
        for cell in 0..grid.cell_count() {
            let kappa = field.value(cell);
            for (q, p) in Self::point_values(grid, &tables, u, cell).enumerate() {
                let v = kappa * nl.mu(p);
                if !v.is_finite() {
                    return Err(Error::NonFiniteCoefficient {
                        cell,
                        continuum: i,
                        value: v,
                    });
                }
                d[(cell * nc + i) * nq + q] += weight * v;
            }
        }
        Ok(())
    }

    /// Adds `weight` to the reaction field of every continuum.
    pub fn add_reaction_constant(&mut self, weight: f64) {
        let len = self.per_continuum_len();
        for v in accumulate(&mut self.reaction, len) {
            *v += weight;
        }
    }

    /// Adds `weight * kappa_i mu_i(u_i) sum_k |grad chi_k|^2` to the reaction
    /// field of continuum `i`.
    #[allow(clippy::too_many_arguments)]
    pub fn add_weighted_mass(
        &mut self,
        grid: &StructuredGrid,
        partition: &CoarsePartition,
        i: usize,
        field: &CoefficientField,
        nl: &Nonlinearity,
        u: &[f64],
        weight: f64,
    ) -> Result<()> {
        let tables = ElementTables::new(self.rule, grid.h());
        let h = grid.h();
        let (nc, nq, len) = (self.continua, self.nq, self.per_continuum_len());
        let r = accumulate(&mut self.reaction, len);
        for cell in 0..grid.cell_count() {
            let kappa = field.value(cell);
            let (x0, y0) = grid.cell_origin(cell);
            for (q, p) in Self::point_values(grid, &tables, u, cell).enumerate() {
                let (xi, eta) = tables.points[q];
                let chi = partition.hat_gradient_energy(x0 + xi * h, y0 + eta * h);
                let v = kappa * nl.mu(p) * chi;
                if !v.is_finite() {
                    return Err(Error::NonFiniteCoefficient {
                        cell,
                        continuum: i,
                        value: v,
                    });
                }
                r[(cell * nc + i) * nq + q] += weight * v;
            }
        }
        Ok(())
    }

    /// Adds `weight * Q_il(u_i, u_l)` for every ordered pair.
    pub fn add_transfer(&mut self, grid: &StructuredGrid, transfer: &Transfer, state: &State, weight: f64) -> Result<()> {
        if transfer.is_zero() {
            return Ok(());
        }
        let tables = ElementTables::new(self.rule, grid.h());
        let (nc, nq, len) = (self.continua, self.nq, self.per_pair_len());
        let t = accumulate(&mut self.transfer, len);
        for cell in 0..grid.cell_count() {
            let pts: Vec<Vec<f64>> = state
                .values
                .iter()
                .map(|u| Self::point_values(grid, &tables, u, cell).collect())
                .collect();
            for i in 0..nc {
                for l in 0..nc {
                    let law = transfer.law(i, l);
                    if i == l || law.is_zero() {
                        continue;
                    }
                    for q in 0..nq {
                        let v = law.coefficient(pts[i][q], pts[l][q]);
                        if !v.is_finite() {
                            return Err(Error::NonFiniteCoefficient {
                                cell,
                                continuum: i,
                                value: v,
                            });
                        }
                        t[((cell * nc + i) * nc + l) * nq + q] += weight * v;
                    }
                }
            }
        }
        Ok(())
    }

    /// Conductivity and transfer of `spec` at `state`: the sampled energy
    /// form `a + q`.
    pub fn add_energy(&mut self, grid: &StructuredGrid, spec: &ProblemSpec, state: &State, weight: f64) -> Result<()> {
        for (i, c) in spec.continua.iter().enumerate() {
            self.add_conductivity(grid, i, &c.field, &c.nonlinearity, &state.values[i], weight)?;
        }
        self.add_transfer(grid, &spec.transfer, state, weight)
    }

    /// The auxiliary weighted mass `r` of `spec` at `state`.
    pub fn add_auxiliary_mass(
        &mut self,
        grid: &StructuredGrid,
        partition: &CoarsePartition,
        spec: &ProblemSpec,
        state: &State,
        weight: f64,
    ) -> Result<()> {
        for (i, c) in spec.continua.iter().enumerate() {
            self.add_weighted_mass(grid, partition, i, &c.field, &c.nonlinearity, &state.values[i], weight)?;
        }
        Ok(())
    }

    /// Scales every stored field.
    pub fn scale(&mut self, c: f64) {
        for f in [&mut self.diffusion, &mut self.reaction, &mut self.transfer].into_iter().flatten() {
            for v in f.iter_mut() {
                *v *= c;
            }
        }
    }
}

/// Assembles the block operator of `coeffs` over `cells`, keeping only rows
/// and columns present in `map`.
///
/// Block `(i, i)` is `stiffness(d_i) + mass(r_i + sum_l Q_il)`; block `(i, l)`
/// is `-mass(Q_il)`.
pub fn assemble(
    grid: &StructuredGrid,
    cells: impl IntoIterator<Item = usize>,
    map: &DofMap,
    coeffs: &FormCoefficients,
) -> SparseOperator {
    assert_eq!(map.continua(), coeffs.continua, "continuum count mismatch");
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();
    assemble_into(grid, cells, coeffs, |i, n| map.dof(i, n), |_, r, c, v| trips.push((r, c, v)));
    SparseOperator::from_triplets(map.dim(), map.dim(), trips)
}

/// Element loop behind [`assemble`]: `dof(continuum, node)` numbers the
/// unknowns and `sink(cell, row, col, value)` receives every contribution.
pub fn assemble_into(
    grid: &StructuredGrid,
    cells: impl IntoIterator<Item = usize>,
    coeffs: &FormCoefficients,
    dof: impl Fn(usize, usize) -> Option<usize>,
    mut sink: impl FnMut(usize, usize, usize, f64),
) {
    let tables = ElementTables::new(coeffs.rule, grid.h());
    let (nc, nq) = (coeffs.continua, coeffs.nq);
    for cell in cells {
        let nodes = grid.cell_nodes(cell);
        for i in 0..nc {
            let dofs_i = nodes.map(|n| dof(i, n));
            if dofs_i.iter().all(Option::is_none) {
                continue;
            }
            let mut diag = [[0.0f64; 4]; 4];
            for q in 0..nq {
                let mut react = 0.0;
                if let Some(d) = &coeffs.diffusion {
                    let c = d[(cell * nc + i) * nq + q];
                    if c != 0.0 {
                        add_scaled(&mut diag, &tables.stiffness[q], c);
                    }
                }
                if let Some(r) = &coeffs.reaction {
                    react += r[(cell * nc + i) * nq + q];
                }
                if let Some(t) = &coeffs.transfer {
                    for l in 0..nc {
                        if l != i {
                            react += t[((cell * nc + i) * nc + l) * nq + q];
                        }
                    }
                }
                if react != 0.0 {
                    add_scaled(&mut diag, &tables.mass[q], react);
                }
            }
            scatter(&mut sink, cell, &dofs_i, &dofs_i, &diag);
            if let Some(t) = &coeffs.transfer {
                for l in 0..nc {
                    if l == i {
                        continue;
                    }
                    let mut off = [[0.0f64; 4]; 4];
                    let mut any = false;
                    for q in 0..nq {
                        let c = t[((cell * nc + i) * nc + l) * nq + q];
                        if c != 0.0 {
                            add_scaled(&mut off, &tables.mass[q], -c);
                            any = true;
                        }
                    }
                    if any {
                        let dofs_l = nodes.map(|n| dof(l, n));
                        scatter(&mut sink, cell, &dofs_i, &dofs_l, &off);
                    }
                }
            }
        }
    }
}

/// `x^T E_K x` for the element matrix of every cell, with `x` over `map`.
pub fn cell_energies(grid: &StructuredGrid, map: &DofMap, coeffs: &FormCoefficients, x: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; grid.cell_count()];
    assemble_into(grid, 0..grid.cell_count(), coeffs, |i, n| map.dof(i, n), |cell, r, c, v| {
        e[cell] += v * x[r] * x[c];
    });
    e
}

fn add_scaled(dst: &mut [[f64; 4]; 4], src: &[[f64; 4]; 4], c: f64) {
    for a in 0..4 {
        for b in 0..4 {
            dst[a][b] += c * src[a][b];
        }
    }
}

fn scatter(
    sink: &mut impl FnMut(usize, usize, usize, f64),
    cell: usize,
    rows: &[Option<usize>; 4],
    cols: &[Option<usize>; 4],
    e: &[[f64; 4]; 4],
) {
    for a in 0..4 {
        let Some(r) = rows[a] else { continue };
        for b in 0..4 {
            if let Some(c) = cols[b] {
                sink(cell, r, c, e[a][b]);
            }
        }
    }
}

/// Load vector `(f_i(t), v)` over `map`.
pub fn assemble_load_with(
    grid: &StructuredGrid,
    map: &DofMap,
    rule: QuadratureRule,
    f: impl Fn(usize, f64, f64) -> f64,
) -> Vec<f64> {
    let tables = ElementTables::new(rule, grid.h());
    let h = grid.h();
    let mut b = vec![0.0; map.dim()];
    for cell in 0..grid.cell_count() {
        let nodes = grid.cell_nodes(cell);
        let (x0, y0) = grid.cell_origin(cell);
        for i in 0..map.continua() {
            let dofs = nodes.map(|n| map.dof(i, n));
            if dofs.iter().all(Option::is_none) {
                continue;
            }
            for (q, &(xi, eta)) in tables.points.iter().enumerate() {
                let fv = f(i, x0 + xi * h, y0 + eta * h);
                if fv == 0.0 {
                    continue;
                }
                for a in 0..4 {
                    if let Some(d) = dofs[a] {
                        b[d] += tables.load[q][a] * fv;
                    }
                }
            }
        }
    }
    b
}

/// Single-continuum load vector of `f` on the interior unknowns.
pub fn assemble_load(grid: &StructuredGrid, f: &Source, t: f64) -> Vec<f64> {
    let map = DofMap::interior(grid, 1);
    assemble_load_with(grid, &map, QuadratureRule::Gauss2, |_, x, y| f.eval(t, x, y))
}

/// Load vector of every continuum of `spec` over `map`.
pub fn assemble_problem_load(grid: &StructuredGrid, map: &DofMap, spec: &ProblemSpec, t: f64) -> Vec<f64> {
    assemble_load_with(grid, map, QuadratureRule::Gauss2, |i, x, y| spec.continua[i].source.eval(t, x, y))
}

/// Stiffness of `a_i(., .; u)` on the interior unknowns.
pub fn assemble_stiffness(
    grid: &StructuredGrid,
    field: &CoefficientField,
    nl: &Nonlinearity,
    u: &[f64],
) -> Result<SparseOperator> {
    let mut c = FormCoefficients::new(grid, 1, QuadratureRule::Gauss2);
    c.add_conductivity(grid, 0, field, nl, u, 1.0)?;
    Ok(assemble(grid, 0..grid.cell_count(), &DofMap::interior(grid, 1), &c))
}

/// Transfer operator of `q_i` on the interior unknowns of all continua.
pub fn assemble_coupling(grid: &StructuredGrid, transfer: &Transfer, state: &State) -> Result<SparseOperator> {
    let nc = transfer.continua();
    let mut c = FormCoefficients::new(grid, nc, QuadratureRule::Gauss2);
    c.add_transfer(grid, transfer, state, 1.0)?;
    Ok(assemble(grid, 0..grid.cell_count(), &DofMap::interior(grid, nc), &c))
}

/// Consistent mass matrix over `map`, one diagonal block per continuum.
pub fn assemble_mass_on(grid: &StructuredGrid, map: &DofMap) -> SparseOperator {
    let mut c = FormCoefficients::new(grid, map.continua(), QuadratureRule::Gauss2);
    c.add_reaction_constant(1.0);
    assemble(grid, 0..grid.cell_count(), map, &c)
}

/// Consistent single-continuum mass matrix on the interior unknowns.
pub fn assemble_mass(grid: &StructuredGrid) -> SparseOperator {
    assemble_mass_on(grid, &DofMap::interior(grid, 1))
}

/// Unit-coefficient stiffness over `map`, one diagonal block per continuum.
pub fn assemble_laplacian_on(grid: &StructuredGrid, map: &DofMap) -> SparseOperator {
    let mut c = FormCoefficients::new(grid, map.continua(), QuadratureRule::Gauss2);
    let len = c.per_continuum_len();
    c.diffusion = Some(vec![1.0; len]);
    assemble(grid, 0..grid.cell_count(), map, &c)
}

/// Auxiliary weighted mass `kappa mu(u) sum_k |grad chi_k|^2` on the interior
/// unknowns.
pub fn assemble_weighted_mass(
    grid: &StructuredGrid,
    partition: &CoarsePartition,
    field: &CoefficientField,
    nl: &Nonlinearity,
    u: &[f64],
) -> Result<SparseOperator> {
    let mut c = FormCoefficients::new(grid, 1, QuadratureRule::Gauss2);
    c.add_weighted_mass(grid, partition, 0, field, nl, u, 1.0)?;
    Ok(assemble(grid, 0..grid.cell_count(), &DofMap::interior(grid, 1), &c))
}

/// Principal submatrix of an operator over `outer` on the unknowns of `inner`.
pub fn restrict(op: &SparseOperator, outer: &DofMap, inner: &DofMap) -> Result<SparseOperator> {
    if inner.n_local() == 0 {
        return Err(Error::InvalidArgument("restriction to an empty node set".into()));
    }
    Ok(op.principal_submatrix(&inner.embed_into(outer)))
}

/// Subvector of `x` (over `outer`) on the unknowns of `inner`.
pub fn restrict_vector(x: &[f64], outer: &DofMap, inner: &DofMap) -> Result<Vec<f64>> {
    if inner.n_local() == 0 {
        return Err(Error::InvalidArgument("restriction to an empty node set".into()));
    }
    Ok(inner.embed_into(outer).into_iter().map(|k| x[k]).collect())
}
