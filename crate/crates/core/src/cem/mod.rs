//! Offline stage of the multiscale method: sampled bilinear forms, local
//! spectral (auxiliary) spaces, and the localized constraint-energy-minimizing
//! basis that spans the coarse trial space.

mod cache;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use rayon::prelude::*;

pub use cache::{content_hash, load_space, save_space};

use crate::assembly::{assemble, assemble_into, cell_energies, DofMap, FormCoefficients, QuadratureRule, State};
use crate::error::{Error, Result};
use crate::linalg::{generalized_symmetric_eig, ConstraintRows, SaddleSolver, SparseOperator};
use crate::mesh::{CoarsePartition, StructuredGrid};
use crate::model::ProblemSpec;
use crate::stepping::FineModel;

/// Weighted pressure states that freeze the nonlinear coefficients of the
/// offline forms.
#[derive(Debug, Clone)]
pub struct SampleSet {
    samples: Vec<(State, f64)>,
}

impl SampleSet {
    pub fn new(samples: Vec<(State, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("sample set is empty".into()));
        }
        if let Some((_, w)) = samples.iter().find(|(_, w)| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("sample weight {w} is not positive")));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&State, f64)> {
        self.samples.iter().map(|(s, w)| (s, *w))
    }

    /// Same states, every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|(s, w)| (s.clone(), w * c)).collect())
    }
}

/// A single converged steady solution with weight one.
pub fn sample_source_steady(p_star: &State) -> SampleSet {
    SampleSet {
        samples: vec![(p_star.clone(), 1.0)],
    }
}

/// Every level of a fine trajectory with trapezoidal weights
/// `(1/2, 1, ..., 1, 1/2)`.
pub fn sample_source_transient(trajectory: &[State], steps: usize) -> Result<SampleSet> {
    if steps == 0 || trajectory.len() != steps + 1 {
        return Err(Error::InvalidArgument(format!(
            "trajectory has {} levels, expected S + 1 = {}",
            trajectory.len(),
            steps + 1
        )));
    }
    let samples = trajectory
        .iter()
        .enumerate()
        .map(|(b, s)| (s.clone(), if b == 0 || b == steps { 0.5 } else { 1.0 }))
        .collect();
    SampleSet::new(samples)
}

/// Sampled coefficient fields of `A_Q = sum_b w_b (a + q)(u_b)` and
/// `R = sum_b w_b r(u_b)`. Both forms are linear in the coefficients, so the
/// weighted sums are taken pointwise.
#[derive(Debug, Clone)]
pub struct SampledForms {
    pub energy: FormCoefficients,
    pub aux_mass: FormCoefficients,
}

impl SampledForms {
    /// Forms with the weights exactly as given.
    pub fn new(grid: &StructuredGrid, partition: &CoarsePartition, spec: &ProblemSpec, samples: &SampleSet) -> Result<Self> {
        Self::with_scale(grid, partition, spec, samples, 1.0)
    }

    /// Forms with weights divided by their sum. Multiplying every sample
    /// weight by a constant leaves these forms unchanged.
    pub fn normalized(
        grid: &StructuredGrid,
        partition: &CoarsePartition,
        spec: &ProblemSpec,
        samples: &SampleSet,
    ) -> Result<Self> {
        Self::with_scale(grid, partition, spec, samples, 1.0 / samples.total_weight())
    }

    fn with_scale(
        grid: &StructuredGrid,
        partition: &CoarsePartition,
        spec: &ProblemSpec,
        samples: &SampleSet,
        scale: f64,
    ) -> Result<Self> {
        let nc = spec.n_continua();
        let mut energy = FormCoefficients::new(grid, nc, QuadratureRule::Gauss2);
        let mut aux_mass = FormCoefficients::new(grid, nc, QuadratureRule::Gauss2);
        for (state, w) in samples.iter() {
            energy.add_energy(grid, spec, state, w * scale)?;
            aux_mass.add_auxiliary_mass(grid, partition, spec, state, w * scale)?;
        }
        Ok(Self { energy, aux_mass })
    }

    pub fn continua(&self) -> usize {
        self.energy.continua()
    }
}

/// `(A_Q, R)` over `cells` restricted to `map`; `A_Q` is symmetrized.
pub fn sampled_forms(
    grid: &StructuredGrid,
    forms: &SampledForms,
    cells: &[usize],
    map: &DofMap,
) -> (SparseOperator, SparseOperator) {
    let a = assemble(grid, cells.iter().copied(), map, &forms.energy).symmetrized();
    let r = assemble(grid, cells.iter().copied(), map, &forms.aux_mass);
    (a, r)
}

/// Local spectral space `V(K_j)`: closure nodes of block `j` off the domain
/// boundary.
pub fn local_nodes(grid: &StructuredGrid, partition: &CoarsePartition, j: usize) -> Vec<usize> {
    partition
        .block(j)
        .nodes
        .iter()
        .copied()
        .filter(|n| !grid.is_boundary(*n))
        .collect()
}

/// Number of auxiliary functions per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisCount {
    Uniform(usize),
    PerBlock(Vec<usize>),
}

impl BasisCount {
    pub fn get(&self, j: usize) -> usize {
        match self {
            BasisCount::Uniform(l) => *l,
            BasisCount::PerBlock(v) => v[j],
        }
    }

    /// Per block, the interior fine unknowns it owns (see
    /// [`CoarsePartition::owner_block`]). The counts sum to the fine
    /// dimension, so the constraint system of a global basis is square.
    pub fn owned_dofs(grid: &StructuredGrid, partition: &CoarsePartition, continua: usize) -> Self {
        let mut v = vec![0; partition.block_count()];
        for &node in grid.interior_nodes() {
            v[partition.owner_block(grid, node)] += continua;
        }
        BasisCount::PerBlock(v)
    }
}

/// Eigenpairs of one block pencil `A_Q phi = lambda R phi`.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    /// Fine nodes of `V(K_j)`, replicated per continuum in the vectors.
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
    /// `R`-orthonormal eigenvectors, one per column.
    pub vectors: Mat<f64>,
    /// `R` times each eigenvector.
    pub r_vectors: Mat<f64>,
}

impl BlockSpectrum {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    /// `max |Phi^T R Phi - I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let l = self.count();
        let mut g = Mat::<f64>::zeros(l, l);
        matmul(g.as_mut(), Accum::Replace, self.vectors.transpose(), self.r_vectors.as_ref(), 1.0, Par::Seq);
        let mut m = 0.0f64;
        for a in 0..l {
            for b in 0..l {
                let target = if a == b { 1.0 } else { 0.0 };
                m = m.max((g[(a, b)] - target).abs());
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct AuxiliarySpace {
    pub blocks: Vec<BlockSpectrum>,
}

impl AuxiliarySpace {
    pub fn counts(&self) -> Vec<usize> {
        self.blocks.iter().map(BlockSpectrum::count).collect()
    }
}

/// Lowest `L_j` eigenpairs of the local pencil on every block.
pub fn solve_auxiliary(
    grid: &StructuredGrid,
    partition: &CoarsePartition,
    forms: &SampledForms,
    counts: &BasisCount,
) -> Result<AuxiliarySpace> {
    let nc = forms.continua();
    let blocks = (0..partition.block_count())
        .into_par_iter()
        .map(|j| {
            let nodes = local_nodes(grid, partition, j);
            let map = DofMap::from_nodes(grid, &nodes, nc);
            let l = counts.get(j);
            if l > map.dim() {
                return Err(Error::Eigen(format!(
                    "block {j}: {l} eigenpairs requested, local dimension is {}",
                    map.dim()
                )));
            }
            let (a, r) = sampled_forms(grid, forms, &partition.block(j).cells, &map);
            let pairs = generalized_symmetric_eig(&a, &r, l).map_err(Error::at_stage("local spectral problem"))?;
            let r_vectors = r.mul_dense(pairs.vectors.as_ref());
            Ok(BlockSpectrum {
                nodes,
                values: pairs.values,
                vectors: pairs.vectors,
                r_vectors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuxiliarySpace { blocks })
}

/// Basis functions of one block on its oversampled region. Unknowns are the
/// region's interior nodes in row-major order, replicated per continuum.
#[derive(Debug, Clone)]
pub struct RegionBasis {
    pub block: usize,
    /// Node rectangle `(x0, y0, x1, y1)` of the closed region.
    pub rect: (usize, usize, usize, usize),
    /// One column per basis function.
    pub values: Mat<f64>,
}

impl RegionBasis {
    fn width(&self) -> usize {
        self.rect.2 - self.rect.0 - 1
    }

    fn interior_count(&self) -> usize {
        self.width() * (self.rect.3 - self.rect.1 - 1)
    }

    /// Local row of `(continuum, ix, iy)` when the node is inside the region.
    fn local(&self, i: usize, ix: usize, iy: usize) -> Option<usize> {
        let (x0, y0, x1, y1) = self.rect;
        (ix > x0 && ix < x1 && iy > y0 && iy < y1)
            .then(|| i * self.interior_count() + (iy - y0 - 1) * self.width() + (ix - x0 - 1))
    }

    fn local_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (x0, y0, x1, y1) = self.rect;
        (y0 + 1..y1).flat_map(move |iy| (x0 + 1..x1).map(move |ix| (ix, iy)))
    }
}

/// Constraint-energy-minimizing basis functions of block `j` on `K_{j,m}`.
pub fn solve_region(
    grid: &StructuredGrid,
    partition: &CoarsePartition,
    aux: &AuxiliarySpace,
    forms: &SampledForms,
    j: usize,
    layers: usize,
) -> Result<RegionBasis> {
    let nc = forms.continua();
    let region = partition.oversample(grid, j, layers)?;
    let map = DofMap::from_nodes(grid, &region.interior_nodes, nc);
    let a = assemble(grid, region.cells.iter().copied(), &map, &forms.energy).symmetrized();
    let mut c = ConstraintRows::new(map.dim());
    let mut own_first = None;
    for &z in &region.member_blocks {
        let spec_z = &aux.blocks[z];
        let nz = spec_z.nodes.len();
        if z == j {
            own_first = Some(c.len());
        }
        for k in 0..spec_z.count() {
            let mut row = Vec::new();
            for i in 0..nc {
                for (a_idx, &node) in spec_z.nodes.iter().enumerate() {
                    if let Some(d) = map.dof(i, node) {
                        let v = spec_z.r_vectors[(i * nz + a_idx, k)];
                        if v != 0.0 {
                            row.push((d, v));
                        }
                    }
                }
            }
            c.push(row);
        }
    }
    let own_first = own_first.expect("a region contains its own block");
    let lj = aux.blocks[j].count();
    let mut g = Mat::<f64>::zeros(c.len(), lj);
    for k in 0..lj {
        g[(own_first + k, k)] = 1.0;
    }
    let values = if lj == 0 {
        Mat::<f64>::zeros(map.dim(), 0)
    } else {
        SaddleSolver::new(&a, c)
            .and_then(|s| s.solve(&g))
            .map_err(Error::at_stage("basis saddle system"))?
            .x
    };
    let ((bx0, by0), (bx1, by1)) = region.block_range;
    let cpb = partition.cells_per_block();
    Ok(RegionBasis {
        block: j,
        rect: (bx0 * cpb, by0 * cpb, (bx1 + 1) * cpb, (by1 + 1) * cpb),
        values,
    })
}

/// Localized multiscale basis for every block.
pub fn build_basis(
    grid: &StructuredGrid,
    partition: &CoarsePartition,
    aux: &AuxiliarySpace,
    forms: &SampledForms,
    layers: usize,
) -> Result<MultiscaleSpace> {
    if layers > partition.hdiv() {
        return Err(Error::InvalidLayers {
            layers,
            hdiv: partition.hdiv(),
        });
    }
    let regions = (0..partition.block_count())
        .into_par_iter()
        .map(|j| solve_region(grid, partition, aux, forms, j, layers))
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiscaleSpace::new(grid, partition, layers, forms.continua(), regions))
}

/// Dense restriction of the basis to the closure nodes of one coarse block,
/// used to assemble the coarse operator block by block.
#[derive(Debug, Clone)]
struct BlockRestriction {
    /// Columns of `g` map to global columns in contiguous runs
    /// `(global_start, local_start, len)`.
    runs: Vec<(usize, usize, usize)>,
    g: Mat<f64>,
}

/// Span of the localized basis functions, `V_ms`.
#[derive(Debug, Clone)]
pub struct MultiscaleSpace {
    n: usize,
    hdiv: usize,
    cpb: usize,
    layers: usize,
    continua: usize,
    offsets: Vec<usize>,
    regions: Vec<RegionBasis>,
    restrictions: Vec<BlockRestriction>,
}

impl MultiscaleSpace {
    pub fn new(
        grid: &StructuredGrid,
        partition: &CoarsePartition,
        layers: usize,
        continua: usize,
        regions: Vec<RegionBasis>,
    ) -> Self {
        let mut offsets = vec![0];
        for r in &regions {
            offsets.push(offsets.last().unwrap() + r.values.ncols());
        }
        let mut space = Self {
            n: grid.n(),
            hdiv: partition.hdiv(),
            cpb: partition.cells_per_block(),
            layers,
            continua,
            offsets,
            regions,
            restrictions: Vec::new(),
        };
        space.restrictions = (0..partition.block_count())
            .into_par_iter()
            .map(|b| space.block_restriction(grid, partition, b))
            .collect();
        space
    }

    fn block_restriction(&self, grid: &StructuredGrid, partition: &CoarsePartition, b: usize) -> BlockRestriction {
        let blk = partition.block(b);
        let m = self.layers;
        let hd = self.hdiv;
        let side = self.cpb + 1;
        let rows = self.continua * side * side;
        let mut runs = Vec::new();
        let mut local = 0;
        for jy in blk.by.saturating_sub(m)..=(blk.by + m).min(hd - 1) {
            let j0 = jy * hd + blk.bx.saturating_sub(m);
            let j1 = jy * hd + (blk.bx + m).min(hd - 1);
            let len = self.offsets[j1 + 1] - self.offsets[j0];
            runs.push((self.offsets[j0], local, len));
            local += len;
        }
        let mut g = Mat::<f64>::zeros(rows, local);
        for &(start, lstart, len) in &runs {
            let mut j = self.column_block(start);
            let mut col = lstart;
            while col < lstart + len {
                let r = &self.regions[j];
                for k in 0..r.values.ncols() {
                    for i in 0..self.continua {
                        for (a, &node) in blk.nodes.iter().enumerate() {
                            let (ix, iy) = grid.node_ij(node);
                            if let Some(row) = r.local(i, ix, iy) {
                                g[(i * side * side + a, col + k)] = r.values[(row, k)];
                            }
                        }
                    }
                }
                col += r.values.ncols();
                j += 1;
            }
        }
        BlockRestriction { runs, g }
    }

    /// Block owning global column `col` (first block whose range starts there
    /// when some blocks carry no functions).
    fn column_block(&self, col: usize) -> usize {
        self.offsets.partition_point(|&o| o <= col) - 1
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn fine_dim(&self) -> usize {
        self.continua * (self.n - 1) * (self.n - 1)
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn hdiv(&self) -> usize {
        self.hdiv
    }

    pub fn continua(&self) -> usize {
        self.continua
    }

    pub fn regions(&self) -> &[RegionBasis] {
        &self.regions
    }

    pub fn counts(&self) -> Vec<usize> {
        self.regions.iter().map(|r| r.values.ncols()).collect()
    }

    pub fn column_index(&self, j: usize, k: usize) -> usize {
        self.offsets[j] + k
    }

    fn fine_dof(&self, i: usize, ix: usize, iy: usize) -> usize {
        let m = self.n - 1;
        i * m * m + (iy - 1) * m + (ix - 1)
    }

    /// Basis function `(j, k)` over the fine interior unknowns.
    pub fn column(&self, j: usize, k: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[self.column_index(j, k)] = 1.0;
        self.prolong(&c)
    }

    /// `G c`.
    pub fn prolong(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.dim());
        let mut out = vec![0.0; self.fine_dim()];
        for (j, r) in self.regions.iter().enumerate() {
            let cj = &c[self.offsets[j]..self.offsets[j + 1]];
            if cj.iter().all(|v| *v == 0.0) {
                continue;
            }
            let nint = r.interior_count();
            for i in 0..self.continua {
                for (a, (ix, iy)) in r.local_nodes().enumerate() {
                    let row = i * nint + a;
                    let v: f64 = cj.iter().enumerate().map(|(k, ck)| r.values[(row, k)] * ck).sum();
                    out[self.fine_dof(i, ix, iy)] += v;
                }
            }
        }
        out
    }

    /// `G^T b`.
    pub fn restrict(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.fine_dim());
        let mut out = vec![0.0; self.dim()];
        for (j, r) in self.regions.iter().enumerate() {
            let nint = r.interior_count();
            let local: Vec<f64> = (0..self.continua)
                .flat_map(|i| r.local_nodes().map(move |(ix, iy)| (i, ix, iy)))
                .map(|(i, ix, iy)| b[self.fine_dof(i, ix, iy)])
                .collect();
            debug_assert_eq!(local.len(), nint * self.continua);
            for k in 0..r.values.ncols() {
                out[self.offsets[j] + k] = (0..local.len()).map(|row| r.values[(row, k)] * local[row]).sum();
            }
        }
        out
    }

    /// Dense `fine_dim x dim` basis matrix (small problems only).
    pub fn to_dense(&self) -> Mat<f64> {
        let mut g = Mat::<f64>::zeros(self.fine_dim(), self.dim());
        for col in 0..self.dim() {
            let mut c = vec![0.0; self.dim()];
            c[col] = 1.0;
            for (i, v) in self.prolong(&c).into_iter().enumerate() {
                g[(i, col)] = v;
            }
        }
        g
    }

    /// Coarse operator `G^T A G` of the form described by `coeffs`,
    /// accumulated block by block.
    pub fn galerkin(&self, grid: &StructuredGrid, coeffs: &FormCoefficients) -> Mat<f64> {
        let dim = self.dim();
        let side = self.cpb + 1;
        let rows = self.continua * side * side;
        let mut out = Mat::<f64>::zeros(dim, dim);
        let mut kb = Mat::<f64>::zeros(rows, rows);
        let symmetric = coeffs.is_symmetric();
        for (b, rst) in self.restrictions.iter().enumerate() {
            if rst.g.ncols() == 0 {
                continue;
            }
            let (bx, by) = (b % self.hdiv, b / self.hdiv);
            let (x0, y0) = (bx * self.cpb, by * self.cpb);
            kb.fill(0.0);
            let cells = (0..self.cpb).flat_map(|cy| (0..self.cpb).map(move |cx| (y0 + cy) * self.n + x0 + cx));
            let n = self.n;
            assemble_into(
                grid,
                cells,
                coeffs,
                |i, node| {
                    let (ix, iy) = (node % (n + 1), node / (n + 1));
                    (ix > 0 && iy > 0 && ix < n && iy < n).then(|| i * side * side + (iy - y0) * side + (ix - x0))
                },
                |_, r, c, v| kb[(r, c)] += v,
            );
            let mut w = Mat::<f64>::zeros(rows, rst.g.ncols());
            matmul(w.as_mut(), Accum::Replace, kb.as_ref(), rst.g.as_ref(), 1.0, Par::Seq);
            for (ia, &(ga, la, lena)) in rst.runs.iter().enumerate() {
                let lhs = rst.g.as_ref().subcols(la, lena).transpose();
                // Runs follow block rows upward, so a later run lies in a
                // later band of coarse columns.
                for &(gb, lb, lenb) in &rst.runs[if symmetric { ia } else { 0 }..] {
                    matmul(
                        out.as_mut().submatrix_mut(ga, gb, lena, lenb),
                        Accum::Add,
                        lhs,
                        w.as_ref().subcols(lb, lenb),
                        1.0,
                        Par::Seq,
                    );
                }
            }
        }
        if symmetric {
            // Only band pairs (p, q) with p <= q were accumulated.
            let band = |p: usize| (self.offsets[p * self.hdiv], self.offsets[(p + 1) * self.hdiv]);
            for p in 0..self.hdiv {
                let (p0, p1) = band(p);
                for q in 0..p {
                    let (q0, q1) = band(q);
                    let upper = out.as_ref().submatrix(q0, p0, q1 - q0, p1 - p0).transpose().to_owned();
                    out.as_mut().submatrix_mut(p0, q0, p1 - p0, q1 - q0).copy_from(&upper);
                }
            }
        }
        out
    }

    /// `max |R(psi_{j,k}, phi_{k'}^{(z)}) - delta|` over the auxiliary
    /// functions of every block inside each column's region.
    pub fn orthogonality_residual(&self, grid: &StructuredGrid, partition: &CoarsePartition, aux: &AuxiliarySpace) -> f64 {
        let mut worst = 0.0f64;
        for (j, r) in self.regions.iter().enumerate() {
            let region = partition
                .oversample(grid, j, self.layers)
                .expect("layers validated at construction");
            for &z in &region.member_blocks {
                let sz = &aux.blocks[z];
                let nz = sz.nodes.len();
                for kp in 0..sz.count() {
                    for k in 0..r.values.ncols() {
                        let mut s = 0.0;
                        for i in 0..self.continua {
                            for (a, &node) in sz.nodes.iter().enumerate() {
                                let (ix, iy) = grid.node_ij(node);
                                if let Some(row) = r.local(i, ix, iy) {
                                    s += r.values[(row, k)] * sz.r_vectors[(i * nz + a, kp)];
                                }
                            }
                        }
                        let target = if z == j && k == kp { 1.0 } else { 0.0 };
                        worst = worst.max((s - target).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Outside-energy fractions of the global (`m = hdiv`) basis function
/// `(j, k)`: entry `l` is the share of its sampled energy on cells outside
/// `K_{j,l}`, for `l = 0..=hdiv`.
pub fn decay_profile(
    grid: &StructuredGrid,
    partition: &CoarsePartition,
    aux: &AuxiliarySpace,
    forms: &SampledForms,
    j: usize,
    k: usize,
) -> Result<Vec<f64>> {
    let hd = partition.hdiv();
    let region = solve_region(grid, partition, aux, forms, j, hd)?;
    if k >= region.values.ncols() {
        return Err(Error::InvalidArgument(format!("block {j} has no basis function {k}")));
    }
    let nc = forms.continua();
    let map = DofMap::interior(grid, nc);
    let mut psi = vec![0.0; map.dim()];
    for i in 0..nc {
        for (a, (ix, iy)) in region.local_nodes().enumerate() {
            let d = map.dof(i, grid.node(ix, iy)).expect("region interior is off the boundary");
            psi[d] = region.values[(i * region.interior_count() + a, k)];
        }
    }
    let energies = cell_energies(grid, &map, &forms.energy, &psi);
    let total: f64 = energies.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Singular(format!("basis function ({j}, {k}) has no energy")));
    }
    let mut out = Vec::with_capacity(hd + 1);
    for l in 0..=hd {
        let inside: f64 = partition.oversample(grid, j, l)?.cells.iter().map(|&c| energies[c]).sum();
        out.push(((total - inside) / total).max(0.0));
    }
    Ok(out)
}

/// Coarse coefficients of the energy projection of `p0`:
/// `G^T A(p0) G c = G^T A(p0) p0`, with `A = a + q` frozen at `p0`.
pub fn project_initial(model: &FineModel<'_>, space: &MultiscaleSpace, p0: &State) -> Result<Vec<f64>> {
    let x0 = model.to_dofs(p0);
    if x0.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; space.dim()]);
    }
    let coeffs = model.coefficients(p0, None)?;
    let a = model.operator(&coeffs);
    let rhs = space.restrict(&a.matvec(&x0));
    let k = space.galerkin(model.grid, &coeffs);
    crate::linalg::DenseSolver::new(k)?.solve(&rhs)
}
