//! Structured fine grid on the unit square, its coarse block partition and
//! oversampled block neighbourhoods.
//!
//! Nodes and cells are numbered row-major from the lower-left corner:
//! node `(ix, iy)` is `iy * (n + 1) + ix`, cell `(cx, cy)` is `cy * n + cx`.

use crate::error::{Error, Result};

/// Fine `n x n` grid of square bilinear cells covering `[0, 1]^2`.
#[derive(Debug, Clone)]
pub struct StructuredGrid {
    n: usize,
    boundary: Vec<bool>,
    interior_index: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
}

impl StructuredGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        let side = n + 1;
        let mut boundary = vec![false; side * side];
        let mut interior_index = vec![None; side * side];
        let mut interior_nodes = Vec::with_capacity((n - 1) * (n - 1));
        for iy in 0..side {
            for ix in 0..side {
                let node = iy * side + ix;
                if ix == 0 || iy == 0 || ix == n || iy == n {
                    boundary[node] = true;
                } else {
                    interior_index[node] = Some(interior_nodes.len());
                    interior_nodes.push(node);
                }
            }
        }
        Ok(Self {
            n,
            boundary,
            interior_index,
            interior_nodes,
        })
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn nodes_per_side(&self) -> usize {
        self.n + 1
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * (self.n + 1) + ix
    }

    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % (self.n + 1), node / (self.n + 1))
    }

    pub fn node_position(&self, node: usize) -> (f64, f64) {
        let (ix, iy) = self.node_ij(node);
        (ix as f64 * self.h(), iy as f64 * self.h())
    }

    pub fn cell(&self, cx: usize, cy: usize) -> usize {
        cy * self.n + cx
    }

    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.n, cell / self.n)
    }

    /// Corner nodes of a cell in tensor order: (0,0), (1,0), (0,1), (1,1).
    pub fn cell_nodes(&self, cell: usize) -> [usize; 4] {
        let (cx, cy) = self.cell_ij(cell);
        let ll = self.node(cx, cy);
        let side = self.n + 1;
        [ll, ll + 1, ll + side, ll + side + 1]
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> (f64, f64) {
        let (cx, cy) = self.cell_ij(cell);
        (cx as f64 * self.h(), cy as f64 * self.h())
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_node_count(&self) -> usize {
        self.boundary.iter().filter(|b| **b).count()
    }

    /// Position of a node among the interior (Dirichlet-free) unknowns.
    pub fn interior_index(&self, node: usize) -> Option<usize> {
        self.interior_index[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// Unknowns per continuum after Dirichlet elimination, `(n - 1)^2`.
    pub fn interior_dofs(&self) -> usize {
        self.interior_nodes.len()
    }
}

/// One coarse block `K_j` with the fine cells and closure nodes it owns.
#[derive(Debug, Clone)]
pub struct CoarseBlock {
    pub bx: usize,
    pub by: usize,
    pub cells: Vec<usize>,
    /// Fine nodes of the closed block, row-major.
    pub nodes: Vec<usize>,
}

/// Uniform coarsening of a [`StructuredGrid`] into `hdiv x hdiv` blocks with
/// the coarse bilinear partition of unity.
#[derive(Debug, Clone)]
pub struct CoarsePartition {
    hdiv: usize,
    cells_per_block: usize,
    n: usize,
    blocks: Vec<CoarseBlock>,
}

impl CoarsePartition {
    pub fn new(grid: &StructuredGrid, hdiv: usize) -> Result<Self> {
        let n = grid.n();
        if hdiv < 2 || n % hdiv != 0 {
            return Err(Error::InvalidCoarsening { n, hdiv });
        }
        let cpb = n / hdiv;
        let mut blocks = Vec::with_capacity(hdiv * hdiv);
        for by in 0..hdiv {
            for bx in 0..hdiv {
                let mut cells = Vec::with_capacity(cpb * cpb);
                for cy in by * cpb..(by + 1) * cpb {
                    for cx in bx * cpb..(bx + 1) * cpb {
                        cells.push(grid.cell(cx, cy));
                    }
                }
                let mut nodes = Vec::with_capacity((cpb + 1) * (cpb + 1));
                for iy in by * cpb..=(by + 1) * cpb {
                    for ix in bx * cpb..=(bx + 1) * cpb {
                        nodes.push(grid.node(ix, iy));
                    }
                }
                blocks.push(CoarseBlock {
                    bx,
                    by,
                    cells,
                    nodes,
                });
            }
        }
        Ok(Self {
            hdiv,
            cells_per_block: cpb,
            n,
            blocks,
        })
    }

    /// Coarse blocks per side, `1 / H`.
    pub fn hdiv(&self) -> usize {
        self.hdiv
    }

    pub fn coarse_h(&self) -> f64 {
        1.0 / self.hdiv as f64
    }

    pub fn cells_per_block(&self) -> usize {
        self.cells_per_block
    }

    pub fn block_count(&self) -> usize {
        self.hdiv * self.hdiv
    }

    pub fn coarse_node_count(&self) -> usize {
        (self.hdiv + 1) * (self.hdiv + 1)
    }

    pub fn blocks(&self) -> &[CoarseBlock] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &CoarseBlock {
        &self.blocks[j]
    }

    pub fn block_id(&self, bx: usize, by: usize) -> usize {
        by * self.hdiv + bx
    }

    pub fn block_of_cell(&self, cell: usize) -> usize {
        let (cx, cy) = (cell % self.n, cell / self.n);
        self.block_id(cx / self.cells_per_block, cy / self.cells_per_block)
    }

    /// Block that owns a fine node when every node is assigned to exactly one
    /// block (the block above and to the right of it, clipped at x, y = 1).
    pub fn owner_block(&self, grid: &StructuredGrid, node: usize) -> usize {
        let (ix, iy) = grid.node_ij(node);
        let bx = (ix / self.cells_per_block).min(self.hdiv - 1);
        let by = (iy / self.cells_per_block).min(self.hdiv - 1);
        self.block_id(bx, by)
    }

    pub fn coarse_node_position(&self, k: usize) -> (f64, f64) {
        let side = self.hdiv + 1;
        let h = self.coarse_h();
        ((k % side) as f64 * h, (k / side) as f64 * h)
    }

    /// Bilinear hat `chi_k` at a point.
    pub fn hat_value(&self, k: usize, x: f64, y: f64) -> f64 {
        let side = self.hdiv + 1;
        let (kx, ky) = ((k % side) as f64, (k / side) as f64);
        let hd = self.hdiv as f64;
        let sx = (1.0 - (x * hd - kx).abs()).max(0.0);
        let sy = (1.0 - (y * hd - ky).abs()).max(0.0);
        sx * sy
    }

    /// Gradient of `chi_k` at a point strictly inside a coarse block.
    pub fn hat_gradient(&self, k: usize, x: f64, y: f64) -> (f64, f64) {
        let side = self.hdiv + 1;
        let (kx, ky) = ((k % side) as f64, (k / side) as f64);
        let hd = self.hdiv as f64;
        let (dx, dy) = (x * hd - kx, y * hd - ky);
        if dx.abs() >= 1.0 || dy.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let (fx, fy) = (1.0 - dx.abs(), 1.0 - dy.abs());
        (-dx.signum() * hd * fy, -dy.signum() * hd * fx)
    }

    /// Coarse nodes whose hat is supported on block `j`.
    pub fn block_corners(&self, j: usize) -> [usize; 4] {
        let b = &self.blocks[j];
        let side = self.hdiv + 1;
        let ll = b.by * side + b.bx;
        [ll, ll + 1, ll + side, ll + side + 1]
    }

    /// `sum_k |grad chi_k|^2` at a point strictly inside a coarse block.
    pub fn hat_gradient_energy(&self, x: f64, y: f64) -> f64 {
        let hd = self.hdiv as f64;
        let s = (x * hd).fract();
        let t = (y * hd).fract();
        2.0 * hd * hd * ((1.0 - t).powi(2) + t * t + (1.0 - s).powi(2) + s * s)
    }

    /// Nonzero values of `chi_k` on fine nodes.
    pub fn hat_on_nodes(&self, grid: &StructuredGrid, k: usize) -> Vec<(usize, f64)> {
        let side = self.hdiv + 1;
        let (kx, ky) = (k % side, k / side);
        let c = self.cells_per_block;
        let lo = |v: usize| (v.saturating_sub(1)) * c;
        let hi = |v: usize| ((v + 1) * c).min(self.n);
        let mut out = Vec::new();
        for iy in lo(ky)..=hi(ky) {
            for ix in lo(kx)..=hi(kx) {
                let node = grid.node(ix, iy);
                let (x, y) = grid.node_position(node);
                let v = self.hat_value(k, x, y);
                if v != 0.0 {
                    out.push((node, v));
                }
            }
        }
        out
    }

    pub fn oversample(&self, grid: &StructuredGrid, j: usize, layers: usize) -> Result<OversampledRegion> {
        if layers > self.hdiv {
            return Err(Error::InvalidLayers {
                layers,
                hdiv: self.hdiv,
            });
        }
        let b = &self.blocks[j];
        let bx0 = b.bx.saturating_sub(layers);
        let by0 = b.by.saturating_sub(layers);
        let bx1 = (b.bx + layers).min(self.hdiv - 1);
        let by1 = (b.by + layers).min(self.hdiv - 1);
        let mut member_blocks = Vec::new();
        for by in by0..=by1 {
            for bx in bx0..=bx1 {
                member_blocks.push(self.block_id(bx, by));
            }
        }
        let c = self.cells_per_block;
        let (x0, x1) = (bx0 * c, (bx1 + 1) * c);
        let (y0, y1) = (by0 * c, (by1 + 1) * c);
        let mut cells = Vec::with_capacity((x1 - x0) * (y1 - y0));
        for cy in y0..y1 {
            for cx in x0..x1 {
                cells.push(grid.cell(cx, cy));
            }
        }
        let mut nodes = Vec::new();
        let mut interior_nodes = Vec::new();
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                let node = grid.node(ix, iy);
                nodes.push(node);
                // Strictly inside the rectangle also excludes every node of
                // the domain boundary.
                if ix > x0 && ix < x1 && iy > y0 && iy < y1 {
                    interior_nodes.push(node);
                }
            }
        }
        Ok(OversampledRegion {
            block: j,
            layers,
            member_blocks,
            block_range: ((bx0, by0), (bx1, by1)),
            cells,
            nodes,
            interior_nodes,
        })
    }
}

/// `K_{j,m}`: block `j` grown by `m` layers of coarse blocks (Chebyshev
/// distance), clipped to the domain.
#[derive(Debug, Clone)]
pub struct OversampledRegion {
    pub block: usize,
    pub layers: usize,
    /// `Z_j`, ascending block ids.
    pub member_blocks: Vec<usize>,
    /// Inclusive block-coordinate corners `((bx0, by0), (bx1, by1))`.
    pub block_range: ((usize, usize), (usize, usize)),
    pub cells: Vec<usize>,
    pub nodes: Vec<usize>,
    /// Nodes off `dK_{j,m}` and off the domain boundary.
    pub interior_nodes: Vec<usize>,
}

impl OversampledRegion {
    pub fn contains_block(&self, partition: &CoarsePartition, j: usize) -> bool {
        let b = partition.block(j);
        let ((bx0, by0), (bx1, by1)) = self.block_range;
        b.bx >= bx0 && b.bx <= bx1 && b.by >= by0 && b.by <= by1
    }
}

/// Oversampling layers used for a given coarse resolution:
/// `round(10 log(1/H) / log 64)`, halves rounded up.
pub fn default_layers(hdiv: usize) -> Result<usize> {
    if hdiv < 2 {
        return Err(Error::InvalidArgument(format!("hdiv must be >= 2, got {hdiv}")));
    }
    let v = 10.0 * (hdiv as f64).ln() / 64f64.ln();
    Ok(v.round() as usize)
}
