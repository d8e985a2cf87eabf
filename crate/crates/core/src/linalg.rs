//! Sparse operators and the three solver contracts used by the pipeline:
//! sparse direct solves, dense generalized symmetric eigenproblems and
//! saddle-point (KKT) solves. Factorizations are delegated to `faer`.

use faer::linalg::solvers::Solve;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::sparse::linalg::solvers::{Llt as SparseLlt, Lu as SparseLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, MatRef, Par, Side};

use crate::error::{Error, Result};

pub use faer::Mat as DenseMatrix;

/// Compressed-row sparse matrix with a symmetry flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Sums duplicate entries (in insertion order) and drops exact zeros.
    pub fn from_triplets(nrows: usize, ncols: usize, trips: Vec<(usize, usize, f64)>) -> Self {
        let mut op = Self::compress(nrows, ncols, trips);
        op.symmetric = op.check_symmetric();
        op
    }

    fn compress(nrows: usize, ncols: usize, trips: Vec<(usize, usize, f64)>) -> Self {
        // Stable bucket sort by row, then stable sort by column within rows.
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in &trips {
            assert!(r < nrows && c < ncols, "entry ({r}, {c}) outside {nrows}x{ncols}");
            counts[r + 1] += 1;
        }
        for r in 0..nrows {
            counts[r + 1] += counts[r];
        }
        let mut next = counts.clone();
        let mut sorted = vec![(0usize, 0.0f64); trips.len()];
        for (r, c, v) in trips {
            sorted[next[r]] = (c, v);
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data = Vec::with_capacity(sorted.len());
        indptr.push(0);
        for r in 0..nrows {
            let row = &mut sorted[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
            symmetric: false,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(a: MatRef<'_, f64>) -> Self {
        let mut trips = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                trips.push((i, j, a[(i, j)]));
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), trips)
    }

    fn check_symmetric(&self) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        let t = self.transpose();
        let scale = self.max_abs();
        if scale == 0.0 {
            return true;
        }
        self.max_abs_diff(&t) <= 1e-12 * scale
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &SparseOperator) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut m = 0.0f64;
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut a, mut b) = (0, 0);
            while a < ca.len() || b < cb.len() {
                let d = match (ca.get(a), cb.get(b)) {
                    (Some(&x), Some(&y)) if x == y => {
                        a += 1;
                        b += 1;
                        va[a - 1] - vb[b - 1]
                    }
                    (Some(&x), Some(&y)) if x < y => {
                        a += 1;
                        va[a - 1]
                    }
                    (Some(_), None) => {
                        a += 1;
                        va[a - 1]
                    }
                    _ => {
                        b += 1;
                        vb[b - 1]
                    }
                };
                m = m.max(d.abs());
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let trips = self.entries().map(|(i, j, v)| (j, i, v)).collect();
        let mut t = Self::compress(self.ncols, self.nrows, trips);
        t.symmetric = self.symmetric;
        t
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        if self.symmetric {
            return self.clone();
        }
        let trips = self
            .entries()
            .flat_map(|(i, j, v)| [(i, j, 0.5 * v), (j, i, 0.5 * v)])
            .collect();
        let mut s = Self::compress(self.nrows, self.ncols, trips);
        s.symmetric = true;
        s
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        for v in &mut s.data {
            *v *= c;
        }
        s
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SparseOperator, c: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trips = self
            .entries()
            .chain(other.entries().map(|(i, j, v)| (i, j, c * v)))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, trips)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (i, yi) in y.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            *yi = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.nrows)
            .map(|i| {
                let (c, v) = self.row(i);
                x[i] * c.iter().zip(v).map(|(&j, &a)| a * y[j]).sum::<f64>()
            })
            .sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// `A M` for a dense `M`.
    pub fn mul_dense(&self, m: MatRef<'_, f64>) -> Mat<f64> {
        assert_eq!(m.nrows(), self.ncols);
        let mut out = Mat::<f64>::zeros(self.nrows, m.ncols());
        for j in 0..m.ncols() {
            for i in 0..self.nrows {
                let (c, v) = self.row(i);
                out[(i, j)] = c.iter().zip(v).map(|(&k, &a)| a * m[(k, j)]).sum();
            }
        }
        out
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        assert_eq!(self.nrows, self.ncols);
        let mut pos = vec![usize::MAX; self.nrows];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut trips = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if pos[j] != usize::MAX {
                    trips.push((k, pos[j], a));
                }
            }
        }
        let mut s = Self::from_triplets(idx.len(), idx.len(), trips);
        s.symmetric = self.symmetric || s.symmetric;
        s
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::<f64>::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn to_faer(&self) -> SparseColMat<usize, f64> {
        let trips: Vec<Triplet<usize, usize, f64>> = self.entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trips).expect("valid triplets")
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

enum Factor {
    Cholesky(SparseLlt<usize, f64>),
    Lu(SparseLu<usize, f64>),
}

/// Reusable direct factorization of a square sparse operator.
pub struct SparseSolver {
    op: SparseOperator,
    factor: Factor,
}

impl SparseSolver {
    /// Cholesky for symmetric operators (falling back to LU if it fails),
    /// LU with partial pivoting otherwise.
    pub fn new(op: &SparseOperator) -> Result<Self> {
        if op.nrows() != op.ncols() {
            return Err(Error::InvalidArgument(format!(
                "solve needs a square matrix, got {}x{}",
                op.nrows(),
                op.ncols()
            )));
        }
        let a = op.to_faer();
        let factor = match op.is_symmetric().then(|| a.sp_cholesky(Side::Lower)) {
            Some(Ok(llt)) => Factor::Cholesky(llt),
            _ => Factor::Lu(a.sp_lu().map_err(|e| match e {
                LuError::SymbolicSingular { index } => {
                    Error::Singular(format!("structurally singular at pivot {index}"))
                }
                LuError::Generic(e) => Error::Singular(format!("{e:?}")),
            })?),
        };
        Ok(Self {
            op: op.clone(),
            factor,
        })
    }

    fn raw_solve(&self, rhs: &mut Mat<f64>) {
        match &self.factor {
            Factor::Cholesky(f) => f.solve_in_place(rhs.as_mut()),
            Factor::Lu(f) => f.solve_in_place(rhs.as_mut()),
        }
    }

    /// Solves `A x = b`, with one step of iterative refinement when the
    /// residual bound `|Ax - b| <= 1e-10 (|A| |x| + |b|)` is missed.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.op.nrows();
        assert_eq!(b.len(), n);
        let mut m = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        self.raw_solve(&mut m);
        let mut x: Vec<f64> = (0..n).map(|i| m[(i, 0)]).collect();
        let anorm = self.op.frobenius_norm();
        let bound = |x: &[f64]| 1e-10 * (anorm * norm2(x) + norm2(b));
        let residual = |x: &[f64]| {
            let ax = self.op.matvec(x);
            ax.iter().zip(b).map(|(a, b)| b - a).collect::<Vec<f64>>()
        };
        let r = residual(&x);
        if !(norm2(&r) <= bound(&x)) {
            let mut d = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
            self.raw_solve(&mut d);
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += d[(i, 0)];
            }
            let r = norm2(&residual(&x));
            if !(r <= bound(&x)) {
                return Err(Error::Singular(format!(
                    "residual {r:.3e} exceeds bound {:.3e}",
                    bound(&x)
                )));
            }
        }
        Ok(x)
    }

    /// Solves for every column of `b` without residual checks.
    pub fn solve_columns(&self, b: &Mat<f64>) -> Mat<f64> {
        let mut x = b.clone();
        self.raw_solve(&mut x);
        x
    }
}

/// One-shot sparse direct solve.
pub fn solve_sparse(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    SparseSolver::new(a)?.solve(b)
}

/// Lowest eigenpairs of a symmetric pencil, eigenvalues ascending and
/// eigenvectors `B`-orthonormal (columns of `vectors`).
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

/// Flips each column so that its largest-magnitude entry (first on ties) is
/// positive.
fn normalize_signs(v: &mut Mat<f64>) {
    for j in 0..v.ncols() {
        let mut best = 0;
        for i in 1..v.nrows() {
            if v[(i, j)].abs() > v[(best, j)].abs() {
                best = i;
            }
        }
        if v[(best, j)] < 0.0 {
            for i in 0..v.nrows() {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
}

/// Dense generalized eigensolve of `A phi = lambda B phi` returning the `l`
/// smallest pairs. `A` is symmetrized first; `B` must be positive definite.
pub fn generalized_symmetric_eig(a: &SparseOperator, b: &SparseOperator, l: usize) -> Result<EigenPairs> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::InvalidArgument("pencil matrices differ in shape".into()));
    }
    if l > n {
        return Err(Error::Eigen(format!("requested {l} eigenpairs of a {n}-dimensional pencil")));
    }
    let ad = a.symmetrized().to_dense();
    let bd = b.symmetrized().to_dense();
    generalized_symmetric_eig_dense(ad.as_ref(), bd.as_ref(), l)
}

pub fn generalized_symmetric_eig_dense(a: MatRef<'_, f64>, b: MatRef<'_, f64>, l: usize) -> Result<EigenPairs> {
    let n = a.nrows();
    let llt = b
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("{e:?}")))?;
    let lower = llt.L();
    // C = L^{-1} A L^{-T}
    let mut x = a.to_owned();
    solve_lower_triangular_in_place(lower, x.as_mut(), Par::Seq);
    let mut c = x.transpose().to_owned();
    solve_lower_triangular_in_place(lower, c.as_mut(), Par::Seq);
    let c = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending eigenvalues; keep a stable sort for safety.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let order = &order[..l];
    let values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let mut vectors = Mat::<f64>::from_fn(n, l, |i, j| u[(i, order[j])]);
    solve_upper_triangular_in_place(lower.transpose(), vectors.as_mut(), Par::Seq);
    normalize_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

/// Sparse constraint rows `C` of a saddle system, each a list of
/// `(column, value)` pairs.
#[derive(Debug, Clone, Default)]
pub struct ConstraintRows {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl ConstraintRows {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<(usize, f64)>) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// First row that is numerically dependent on the rows before it, found
    /// by modified Gram-Schmidt with reorthogonalization.
    pub fn first_dependent_row(&self) -> Option<usize> {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(self.rows.len());
        for (k, r) in self.rows.iter().enumerate() {
            let mut v = vec![0.0; self.ncols];
            for &(j, x) in r {
                v[j] += x;
            }
            let n0 = norm2(&v);
            if n0 == 0.0 {
                return Some(k);
            }
            for _ in 0..2 {
                for q in &basis {
                    let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= d * qi;
                    }
                }
            }
            let n1 = norm2(&v);
            if n1 <= 1e-10 * n0 {
                return Some(k);
            }
            v.iter_mut().for_each(|x| *x /= n1);
            basis.push(v);
        }
        None
    }
}

/// Factorized KKT matrix `[[A, C^T], [C, 0]]`.
pub struct SaddleSolver {
    a: SparseOperator,
    c: ConstraintRows,
    /// Common factor applied to the constraint rows inside the factorization
    /// so both blocks have comparable magnitude; `x` is unaffected.
    scale: f64,
    lu: SparseLu<usize, f64>,
}

/// Solution of a saddle system: primal `x` (columns) and multipliers.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub x: Mat<f64>,
    pub multipliers: Mat<f64>,
}

impl SaddleSolver {
    pub fn new(a: &SparseOperator, c: ConstraintRows) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || c.ncols != n {
            return Err(Error::InvalidArgument("saddle blocks differ in shape".into()));
        }
        if c.len() > n {
            return Err(Error::RankDeficientConstraints { row: n });
        }
        let cmax = c.rows.iter().flatten().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        let scale = if cmax > 0.0 && a.max_abs() > 0.0 { a.max_abs() / cmax } else { 1.0 };
        let mut trips: Vec<Triplet<usize, usize, f64>> = a.entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        for (k, r) in c.rows.iter().enumerate() {
            for &(j, v) in r {
                trips.push(Triplet::new(n + k, j, scale * v));
                trips.push(Triplet::new(j, n + k, scale * v));
            }
        }
        let dim = n + c.len();
        let kkt = SparseColMat::try_new_from_triplets(dim, dim, &trips).expect("valid triplets");
        let lu = match kkt.sp_lu() {
            Ok(lu) => lu,
            Err(_) => return Err(Self::diagnose(&c)),
        };
        Ok(Self {
            a: a.clone(),
            c,
            scale,
            lu,
        })
    }

    fn diagnose(c: &ConstraintRows) -> Error {
        match c.first_dependent_row() {
            Some(row) => Error::RankDeficientConstraints { row },
            None => Error::Singular("saddle matrix is singular on the constraint kernel".into()),
        }
    }

    /// Solves `A x + C^T mu = 0`, `C x = g` for every column of `g`, with up
    /// to three steps of iterative refinement.
    pub fn solve(&self, g: &Mat<f64>) -> Result<SaddleSolution> {
        let n = self.a.nrows();
        let m = self.c.len();
        assert_eq!(g.nrows(), m);
        let mut rhs = Mat::<f64>::zeros(n + m, g.ncols());
        for j in 0..g.ncols() {
            for k in 0..m {
                rhs[(n + k, j)] = self.scale * g[(k, j)];
            }
        }
        let mut sol = rhs.clone();
        self.lu.solve_in_place(sol.as_mut());
        for _ in 0..3 {
            let mut r = rhs.clone();
            self.kkt_apply_sub(sol.as_ref(), &mut r);
            let rn = r.norm_l2();
            if !(rn > 1e-15 * (rhs.norm_l2() + 1e-300)) {
                break;
            }
            self.lu.solve_in_place(r.as_mut());
            sol += &r;
        }
        let x = Mat::<f64>::from_fn(n, g.ncols(), |i, j| sol[(i, j)]);
        let multipliers = Mat::<f64>::from_fn(m, g.ncols(), |i, j| self.scale * sol[(n + i, j)]);
        let sol = SaddleSolution { x, multipliers };
        for j in 0..g.ncols() {
            let gj: Vec<f64> = (0..m).map(|k| g[(k, j)]).collect();
            let res = self.residual(&sol, j, &gj);
            if !(res <= 1e-9) {
                return Err(match self.c.first_dependent_row() {
                    Some(row) => Error::RankDeficientConstraints { row },
                    None => Error::Singular(format!("saddle residual {res:.3e} for column {j}")),
                });
            }
        }
        Ok(sol)
    }

    /// `r -= K z` for the scaled saddle matrix `K`.
    fn kkt_apply_sub(&self, z: MatRef<'_, f64>, r: &mut Mat<f64>) {
        let n = self.a.nrows();
        for j in 0..z.ncols() {
            for i in 0..n {
                let (cols, vals) = self.a.row(i);
                let mut s = 0.0;
                for (c, v) in cols.iter().zip(vals) {
                    s += v * z[(*c, j)];
                }
                r[(i, j)] -= s;
            }
            for (k, row) in self.c.rows.iter().enumerate() {
                let mut s = 0.0;
                for &(i, v) in row {
                    r[(i, j)] -= self.scale * v * z[(n + k, j)];
                    s += v * z[(i, j)];
                }
                r[(n + k, j)] -= self.scale * s;
            }
        }
    }

    /// Euclidean residual of column `j` relative to the primal scale.
    fn residual(&self, sol: &SaddleSolution, j: usize, g: &[f64]) -> f64 {
        let n = self.a.nrows();
        let x: Vec<f64> = (0..n).map(|i| sol.x[(i, j)]).collect();
        let mu: Vec<f64> = (0..self.c.len()).map(|k| sol.multipliers[(k, j)]).collect();
        let mut top = self.a.matvec(&x);
        for (k, r) in self.c.rows.iter().enumerate() {
            for &(i, v) in r {
                top[i] += v * mu[k];
            }
        }
        // Normwise backward error of each block row.
        let anorm = self.a.frobenius_norm();
        let cnorm = self.c.rows.iter().flatten().map(|(_, v)| v * v).sum::<f64>().sqrt();
        let cx = self.c.apply(&x);
        let bottom: f64 = cx.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let top_scale = (anorm * norm2(&x) + cnorm * norm2(&mu)).max(1e-300);
        let bottom_scale = (cnorm * norm2(&x) + norm2(g)).max(1e-300);
        norm2(&top) / top_scale + bottom / bottom_scale
    }
}

/// One-shot solve of `[[A, C^T], [C, 0]] (x, mu) = (0, g)`.
pub fn solve_saddle(a: &SparseOperator, c: ConstraintRows, g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = g.len();
    let solver = SaddleSolver::new(a, c)?;
    let sol = solver.solve(&Mat::<f64>::from_fn(m, 1, |i, _| g[i]))?;
    Ok((
        (0..sol.x.nrows()).map(|i| sol.x[(i, 0)]).collect(),
        (0..m).map(|i| sol.multipliers[(i, 0)]).collect(),
    ))
}

enum DenseFactor {
    Cholesky(faer::linalg::solvers::Llt<f64>),
    Lu(faer::linalg::solvers::PartialPivLu<f64>),
}

/// Direct solve of a small dense square system.
pub struct DenseSolver {
    a: Mat<f64>,
    factor: DenseFactor,
}

impl DenseSolver {
    /// LU with partial pivoting.
    pub fn new(a: Mat<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("dense solve needs a square matrix".into()));
        }
        let factor = DenseFactor::Lu(a.partial_piv_lu());
        Ok(Self { a, factor })
    }

    /// Cholesky for a symmetric matrix (only the lower triangle is read),
    /// falling back to LU when it is not positive definite.
    pub fn new_symmetric(a: Mat<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("dense solve needs a square matrix".into()));
        }
        match a.llt(Side::Lower) {
            Ok(llt) => Ok(Self {
                a,
                factor: DenseFactor::Cholesky(llt),
            }),
            Err(_) => Self::new(a),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.a.nrows();
        let mut x = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        match &self.factor {
            DenseFactor::Cholesky(f) => f.solve_in_place(x.as_mut()),
            DenseFactor::Lu(f) => f.solve_in_place(x.as_mut()),
        }
        let mut r = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
        faer::linalg::matmul::matmul(r.as_mut(), faer::Accum::Add, self.a.as_ref(), x.as_ref(), -1.0, Par::Seq);
        let r: Vec<f64> = (0..n).map(|i| r[(i, 0)]).collect();
        let x: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        let anorm = self.a.norm_l2();
        let bound = 1e-10 * (anorm * norm2(&x) + norm2(b));
        if !(norm2(&r) <= bound) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular(format!(
                "dense residual {:.3e} exceeds bound {bound:.3e}",
                norm2(&r)
            )));
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(n: usize, dense: &[f64]) -> SparseOperator {
        let trips = (0..n * n).map(|k| (k / n, k % n, dense[k])).collect();
        SparseOperator::from_triplets(n, n, trips)
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let a = SparseOperator::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert!(a.is_symmetric());
        assert!(!op(2, &[1.0, 2.0, 0.0, 1.0]).is_symmetric());
    }

    #[test]
    fn small_solves() {
        let x = solve_sparse(&SparseOperator::identity(3), &[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 3.0]);
        let x = solve_sparse(&op(2, &[2.0, 0.0, 0.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_solve_fails() {
        assert!(solve_sparse(&op(2, &[1.0, 1.0, 1.0, 1.0]), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn diagonal_pencil() {
        let a = op(3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let e = generalized_symmetric_eig(&a, &SparseOperator::identity(3), 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
        assert!((e.vectors[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(generalized_symmetric_eig(&a, &SparseOperator::identity(3), 4).is_err());
        assert!(matches!(
            generalized_symmetric_eig(&a, &a.scaled(-1.0), 1),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn hand_kkt() {
        let mut c = ConstraintRows::new(2);
        c.push(vec![(0, 1.0)]);
        let (x, mu) = solve_saddle(&SparseOperator::identity(2), c, &[1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14);
        assert!((mu[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dependent_constraint_is_reported() {
        let mut c = ConstraintRows::new(3);
        c.push(vec![(0, 1.0), (1, 1.0)]);
        c.push(vec![(2, 1.0)]);
        c.push(vec![(0, 2.0), (1, 2.0)]);
        assert_eq!(c.first_dependent_row(), Some(2));
        let err = solve_saddle(&SparseOperator::identity(3), c, &[1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::RankDeficientConstraints { row: 2 }), "{err}");
    }
}
