#![allow(dead_code)]

use faer::Mat;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use richards_cem::linalg::SparseOperator;
use richards_cem::mesh::StructuredGrid;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Q1 stiffness and consistent mass over all `(n+1)^2` nodes, built from the
/// textbook element matrices of a square bilinear cell: stiffness
/// `(4, -1, -2, -1) / 6` and mass `h^2 (4, 2, 1) / 36` by corner adjacency.
pub fn q1_dense(n: usize) -> (Mat<f64>, Mat<f64>) {
    let h = 1.0 / n as f64;
    let np = n + 1;
    let mut k = Mat::<f64>::zeros(np * np, np * np);
    let mut m = Mat::<f64>::zeros(np * np, np * np);
    for cy in 0..n {
        for cx in 0..n {
            let corners = [(cx, cy), (cx + 1, cy), (cx + 1, cy + 1), (cx, cy + 1)];
            for &(ax, ay) in &corners {
                for &(bx, by) in &corners {
                    let gap = ax.abs_diff(bx) + ay.abs_diff(by);
                    let (ke, me) = match gap {
                        0 => (4.0 / 6.0, 4.0 / 36.0),
                        1 => (-1.0 / 6.0, 2.0 / 36.0),
                        _ => (-2.0 / 6.0, 1.0 / 36.0),
                    };
                    let (a, b) = (ay * np + ax, by * np + bx);
                    k[(a, b)] += ke;
                    m[(a, b)] += me * h * h;
                }
            }
        }
    }
    (k, m)
}

/// Rows and columns of `a` on the interior nodes, in grid order.
pub fn interior_block(grid: &StructuredGrid, a: &Mat<f64>) -> Mat<f64> {
    let idx = grid.interior_nodes();
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

pub fn max_abs_diff(a: &SparseOperator, b: &Mat<f64>) -> f64 {
    let d = a.to_dense();
    assert_eq!((d.nrows(), d.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for i in 0..d.nrows() {
        for j in 0..d.ncols() {
            m = m.max((d[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dense_matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}
