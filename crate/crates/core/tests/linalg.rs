mod common;

use std::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::Mat;
use proptest::prelude::*;
use rand::Rng;
use richards_cem::linalg::{
    generalized_symmetric_eig, solve_saddle, solve_sparse, ConstraintRows, DenseSolver, SparseOperator,
};

use common::{dense_matvec, dot, norm, random_vec, rng};

/// Sparse-ish SPD matrix: a banded random part squared plus a shift.
fn random_spd(n: usize, seed: u64) -> Mat<f64> {
    let mut r = rng(seed);
    let b = Mat::<f64>::from_fn(n, n, |i, j| if i.abs_diff(j) <= 3 { r.random_range(-1.0..1.0) } else { 0.0 });
    let mut a = b.transpose() * &b;
    for i in 0..n {
        a[(i, i)] += 0.1;
    }
    a
}

#[test]
fn sparse_solve_matches_dense_factorization() {
    let n = 50;
    let ad = random_spd(n, 11);
    let a = SparseOperator::from_dense(ad.as_ref());
    let b = random_vec(&mut rng(12), n);
    let x = solve_sparse(&a, &b).unwrap();

    let oracle = ad.partial_piv_lu().solve(Mat::<f64>::from_fn(n, 1, |i, _| b[i]));
    for i in 0..n {
        assert!((x[i] - oracle[(i, 0)]).abs() <= 1e-10 * (1.0 + oracle[(i, 0)].abs()));
    }
    let r: Vec<f64> = dense_matvec(&ad, &x).iter().zip(&b).map(|(p, q)| p - q).collect();
    assert!(norm(&r) <= 1e-10 * (a.frobenius_norm() * norm(&x) + norm(&b)));
}

#[test]
fn sparse_solve_is_deterministic() {
    let a = SparseOperator::from_dense(random_spd(30, 13).as_ref());
    let b = random_vec(&mut rng(14), 30);
    assert_eq!(solve_sparse(&a, &b).unwrap(), solve_sparse(&a, &b).unwrap());
}

/// Linear elements on `(0, 1)` with `n` interior nodes: stiffness and mass.
fn fe_1d(n: usize) -> (SparseOperator, SparseOperator) {
    let h = 1.0 / (n + 1) as f64;
    let mut k = Vec::new();
    let mut m = Vec::new();
    for i in 0..n {
        k.push((i, i, 2.0 / h));
        m.push((i, i, 4.0 * h / 6.0));
        if i + 1 < n {
            for (a, b) in [(i, i + 1), (i + 1, i)] {
                k.push((a, b, -1.0 / h));
                m.push((a, b, h / 6.0));
            }
        }
    }
    (SparseOperator::from_triplets(n, n, k), SparseOperator::from_triplets(n, n, m))
}

#[test]
fn one_dimensional_pencil_matches_closed_form() {
    let n = 5;
    let h = 1.0 / (n + 1) as f64;
    let (k, m) = fe_1d(n);
    let e = generalized_symmetric_eig(&k, &m, n).unwrap();
    for (idx, lam) in e.values.iter().enumerate() {
        let c = ((idx + 1) as f64 * PI * h).cos();
        let exact = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
        assert!((lam - exact).abs() <= 1e-10 * exact, "mode {idx}: {lam} vs {exact}");
    }
}

#[test]
fn common_scaling_leaves_pairs_unchanged() {
    let (k, m) = fe_1d(7);
    let e1 = generalized_symmetric_eig(&k, &m, 4).unwrap();
    let e2 = generalized_symmetric_eig(&k.scaled(13.0), &m.scaled(13.0), 4).unwrap();
    for a in 0..4 {
        assert!((e1.values[a] - e2.values[a]).abs() <= 1e-10 * e1.values[a]);
    }
    // B-normalization changes by 1/sqrt(c).
    let s = 13f64.sqrt();
    for i in 0..7 {
        for a in 0..4 {
            assert!((e1.vectors[(i, a)] - s * e2.vectors[(i, a)]).abs() < 1e-9);
        }
    }
}

fn kernel_projector(c: &Mat<f64>) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    let cct = c * c.transpose();
    let lu = cct.partial_piv_lu();
    move |r: &[f64]| {
        let cr = Mat::<f64>::from_fn(c.nrows(), 1, |i, _| (0..c.ncols()).map(|j| c[(i, j)] * r[j]).sum());
        let y = lu.solve(cr);
        (0..c.ncols())
            .map(|j| r[j] - (0..c.nrows()).map(|i| c[(i, j)] * y[(i, 0)]).sum::<f64>())
            .collect()
    }
}

#[test]
fn saddle_point_is_the_constrained_minimizer() {
    let n = 30;
    let nc = 6;
    let ad = random_spd(n, 21);
    let a = SparseOperator::from_dense(ad.as_ref());
    let mut r = rng(22);
    let cd = Mat::<f64>::from_fn(nc, n, |_, _| if r.random_bool(0.3) { r.random_range(-1.0..1.0) } else { 0.0 });
    let mut c = ConstraintRows::new(n);
    for i in 0..nc {
        c.push((0..n).filter(|&j| cd[(i, j)] != 0.0).map(|j| (j, cd[(i, j)])).collect());
    }
    let g = random_vec(&mut r, nc);
    let (x, mu) = solve_saddle(&a, c.clone(), &g).unwrap();

    let cx = c.apply(&x);
    for i in 0..nc {
        assert!((cx[i] - g[i]).abs() <= 1e-9 * (1.0 + g[i].abs()));
    }
    // Stationarity: A x + C^T mu = 0.
    let ax = a.matvec(&x);
    for j in 0..n {
        let ct: f64 = (0..nc).map(|i| cd[(i, j)] * mu[i]).sum();
        assert!((ax[j] + ct).abs() <= 1e-9 * (1.0 + ax[j].abs()));
    }
    let project = kernel_projector(&cd);
    let e0 = a.quad_form(&x);
    for _ in 0..10 {
        let d = project(&random_vec(&mut r, n));
        assert!(norm(&c.apply(&d)) < 1e-10);
        let xd: Vec<f64> = x.iter().zip(&d).map(|(p, q)| p + q).collect();
        assert!(e0 <= a.quad_form(&xd) + 1e-8);
    }
}

#[test]
fn homogeneous_constraints_give_zero() {
    let a = SparseOperator::from_dense(random_spd(10, 31).as_ref());
    let mut c = ConstraintRows::new(10);
    c.push(vec![(0, 1.0), (3, -2.0)]);
    c.push(vec![(5, 1.0)]);
    let (x, _) = solve_saddle(&a, c, &[0.0, 0.0]).unwrap();
    assert!(x.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn dense_symmetric_solver_handles_indefinite_matrices() {
    let a = Mat::<f64>::from_fn(3, 3, |i, j| [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, -3.0]][i][j]);
    let b = [3.0, 3.0, -3.0];
    let x = DenseSolver::new_symmetric(a.clone()).unwrap().solve(&b).unwrap();
    for (xi, e) in x.iter().zip([1.0, 1.0, 1.0]) {
        assert!((xi - e).abs() < 1e-14);
    }
    let spd = random_spd(12, 41);
    let b = random_vec(&mut rng(42), 12);
    let x1 = DenseSolver::new_symmetric(spd.clone()).unwrap().solve(&b).unwrap();
    let x2 = DenseSolver::new(spd).unwrap().solve(&b).unwrap();
    for (p, q) in x1.iter().zip(&x2) {
        assert!((p - q).abs() < 1e-10 * (1.0 + q.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigenpairs_are_b_orthonormal_with_small_residuals(seed in any::<u64>(), n in 2usize..20) {
        let ad = random_spd(n, seed);
        let bd = random_spd(n, seed.wrapping_add(1));
        let (a, b) = (SparseOperator::from_dense(ad.as_ref()), SparseOperator::from_dense(bd.as_ref()));
        let l = n.div_ceil(2);
        let e = generalized_symmetric_eig(&a, &b, l).unwrap();
        let cols: Vec<Vec<f64>> = (0..l).map(|k| (0..n).map(|i| e.vectors[(i, k)]).collect()).collect();
        for p in 0..l {
            for q in 0..l {
                let target = if p == q { 1.0 } else { 0.0 };
                prop_assert!((b.bilinear(&cols[p], &cols[q]) - target).abs() <= 1e-9);
            }
            let av = a.matvec(&cols[p]);
            let bv = b.matvec(&cols[p]);
            let res: Vec<f64> = av.iter().zip(&bv).map(|(x, y)| x - e.values[p] * y).collect();
            prop_assert!(norm(&res) <= 1e-8 * a.frobenius_norm());
        }
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn saddle_constraints_hold_on_random_instances(seed in any::<u64>()) {
        let n = 16;
        let a = SparseOperator::from_dense(random_spd(n, seed).as_ref());
        let mut r = rng(seed ^ 0xabc);
        let mut c = ConstraintRows::new(n);
        for i in 0..4 {
            c.push(vec![(i, 1.0), (i + 4, r.random_range(-2.0..2.0)), (15 - i, r.random_range(-2.0..2.0))]);
        }
        let g = random_vec(&mut r, 4);
        let (x, _) = solve_saddle(&a, c.clone(), &g).unwrap();
        let cx = c.apply(&x);
        prop_assert!(cx.iter().zip(&g).all(|(p, q)| (p - q).abs() <= 1e-9));
        prop_assert!(dot(&x, &x).is_finite());
    }
}
