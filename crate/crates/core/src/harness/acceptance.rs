//! The acceptance suite: eleven numbered checks over the built-in
//! experiments and manufactured problems. Each returns a verdict with a short
//! summary of the measured quantities.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use crate::assembly::{assemble_coupling, assemble_laplacian_on, assemble_mass_on, DofMap, State};
use crate::cem::{
    build_basis, decay_profile, sample_source_steady, solve_auxiliary, BasisCount, SampleSet, SampledForms,
};
use crate::error::Result;
use crate::harness::{
    coarse_solve, compute_errors, errors_against_exact, fine_reference, run_case, CaseParams, FineReference,
    ReportRow, RunOptions,
};
use crate::mesh::{default_layers, CoarsePartition, StructuredGrid};
use crate::model::{
    builtin_experiment, CoefficientField, Continuum, ExperimentId, InitialState, Nonlinearity, ProblemSpec, Source,
    TimeHorizon, Transfer, REFERENCE_N,
};
use crate::stepping::{contraction_estimate, steady_solve, FineModel, PicardOptions, SpaceHandle, Stepper};

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "convergence trend"),
    (2, "basis count effect"),
    (3, "exactness limit"),
    (4, "fine FEM order"),
    (5, "temporal order"),
    (6, "Picard contraction"),
    (7, "orthogonality"),
    (8, "coupling cancellation"),
    (9, "dimension bookkeeping"),
    (10, "scale invariance"),
    (11, "basis decay"),
];

/// `(hdiv, layers, dim(V_ms) for L = 4, 5, 6)` as listed in every error
/// table of the reference study.
pub const TABLE_DIMENSIONS: [(usize, usize, [usize; 3]); 4] = [
    (4, 3, [64, 80, 96]),
    (8, 5, [256, 320, 384]),
    (16, 7, [1024, 1280, 1536]),
    (32, 8, [4096, 5120, 6144]),
];

const SWEEP_HDIV: [usize; 4] = [4, 8, 16, 32];

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} criterion {:>2} ({}): {}", self.id, self.name, self.detail)
    }
}

/// Runs the criteria, sharing fine references and sweep rows between them.
pub struct AcceptanceSuite {
    data_dir: PathBuf,
    options: RunOptions,
    references: Mutex<BTreeMap<(ExperimentId, usize), Arc<FineReference>>>,
    rows: Mutex<BTreeMap<(ExperimentId, usize, usize), ReportRow>>,
}

impl AcceptanceSuite {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            options: RunOptions::default(),
            references: Mutex::new(BTreeMap::new()),
            rows: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn run_all(&self) -> Vec<CriterionResult> {
        CRITERIA.iter().map(|(id, _)| self.run(*id)).collect()
    }

    pub fn run(&self, id: u8) -> CriterionResult {
        let name = CRITERIA
            .iter()
            .find(|c| c.0 == id)
            .map(|c| c.1)
            .unwrap_or("unknown");
        let outcome = match id {
            1 => self.convergence_trend(),
            2 => self.basis_count_effect(),
            3 => exactness_limit(),
            4 => fine_order(),
            5 => temporal_order(),
            6 => self.picard_contraction(),
            7 => self.orthogonality(),
            8 => self.coupling_cancellation(),
            9 => self.dimension_bookkeeping(),
            10 => self.scale_invariance(),
            11 => self.basis_decay(),
            _ => Ok((false, format!("no criterion {id}"))),
        };
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        CriterionResult {
            id,
            name,
            passed,
            detail,
        }
    }

    fn spec(&self, id: ExperimentId, n: usize) -> Result<ProblemSpec> {
        builtin_experiment(id, &self.data_dir, n)
    }

    fn reference(&self, id: ExperimentId, n: usize) -> Result<Arc<FineReference>> {
        if let Some(r) = self.references.lock().unwrap().get(&(id, n)) {
            return Ok(r.clone());
        }
        let spec = self.spec(id, n)?;
        let grid = StructuredGrid::new(n)?;
        let r = Arc::new(fine_reference(&grid, &spec, self.options.picard)?);
        self.references.lock().unwrap().insert((id, n), r.clone());
        Ok(r)
    }

    /// Sweep row at the reference resolution with default layers.
    fn row(&self, id: ExperimentId, hdiv: usize, l: usize) -> Result<ReportRow> {
        if let Some(r) = self.rows.lock().unwrap().get(&(id, hdiv, l)) {
            return Ok(r.clone());
        }
        let n = REFERENCE_N;
        let spec = self.spec(id, n)?;
        let grid = StructuredGrid::new(n)?;
        let reference = self.reference(id, n)?;
        let params = CaseParams::with_default_layers(hdiv, l)?;
        let row = run_case(&grid, &spec, &reference, params, &self.options)?.row;
        self.rows.lock().unwrap().insert((id, hdiv, l), row.clone());
        Ok(row)
    }

    fn convergence_trend(&self) -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for id in ExperimentId::ALL {
            let rows: Vec<ReportRow> = SWEEP_HDIV.iter().map(|&h| self.row(id, h, 4)).collect::<Result<_>>()?;
            let decreasing = |f: fn(&ReportRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
            let bound = if id == ExperimentId::E4 { 0.02 } else { 0.01 };
            let last = rows.last().expect("four rows").err_h1;
            let this = decreasing(|r| r.err_h1) && decreasing(|r| r.err_l2) && last < bound;
            ok &= this;
            let h1: Vec<String> = rows.iter().map(|r| format!("{:.4}%", 100.0 * r.err_h1)).collect();
            let l2: Vec<String> = rows.iter().map(|r| format!("{:.4}%", 100.0 * r.err_l2)).collect();
            detail.push(format!("{id} H1 [{}] L2 [{}]", h1.join(", "), l2.join(", ")));
        }
        Ok((ok, detail.join("; ")))
    }

    fn basis_count_effect(&self) -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for id in ExperimentId::ALL {
            let e: Vec<f64> = [4, 5, 6].iter().map(|&l| self.row(id, 8, l).map(|r| r.err_h1)).collect::<Result<_>>()?;
            ok &= e[0] > e[1] && e[1] > e[2];
            detail.push(format!(
                "{id} H1 {:.4}% > {:.4}% > {:.4}%",
                100.0 * e[0],
                100.0 * e[1],
                100.0 * e[2]
            ));
        }
        Ok((ok, detail.join("; ")))
    }

    fn picard_contraction(&self) -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for id in ExperimentId::ALL {
            let r = self.reference(id, 32)?;
            let mut worst: f64 = 0.0;
            let mut max_iter = 0;
            let mut converged = true;
            for rep in &r.reports {
                converged &= rep.converged && rep.iterations <= 50;
                max_iter = max_iter.max(rep.iterations);
                match contraction_estimate(rep) {
                    Ok(l) => worst = worst.max(l),
                    // A solve that stops after one iteration has nothing to
                    // contract.
                    Err(_) => {}
                }
            }
            ok &= converged && worst < 1.0;
            detail.push(format!(
                "{id}: {} solves, max {max_iter} iterations, max lambda {worst:.3}",
                r.reports.len()
            ));
        }
        Ok((ok, detail.join("; ")))
    }

    fn orthogonality(&self) -> Result<(bool, String)> {
        let mut ok = true;
        let mut detail = Vec::new();
        for id in [ExperimentId::E1, ExperimentId::E4] {
            let n = 64;
            let spec = self.spec(id, n)?;
            let grid = StructuredGrid::new(n)?;
            let samples = self.reference(id, n)?.samples(&spec)?;
            let partition = CoarsePartition::new(&grid, 8)?;
            let forms = SampledForms::normalized(&grid, &partition, &spec, &samples)?;
            let aux = solve_auxiliary(&grid, &partition, &forms, &BasisCount::Uniform(4))?;
            let aux_res = aux.blocks.iter().map(|b| b.orthonormality_residual()).fold(0.0, f64::max);
            let space = build_basis(&grid, &partition, &aux, &forms, default_layers(8)?)?;
            let basis_res = space.orthogonality_residual(&grid, &partition, &aux);
            ok &= aux_res <= 1e-9 && basis_res <= 1e-8;
            detail.push(format!("{id}: aux {aux_res:.2e}, basis {basis_res:.2e}"));
        }
        Ok((ok, detail.join("; ")))
    }

    fn coupling_cancellation(&self) -> Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        for id in [ExperimentId::E3, ExperimentId::E4] {
            let n = 32;
            let spec = self.spec(id, n)?;
            let grid = StructuredGrid::new(n)?;
            let state = State::interpolate(&grid, 2, |i, x, y| {
                (1.0 + i as f64) * (3.0 * x).sin() * (2.0 * y).cos() - 0.5 * i as f64
            });
            let q = assemble_coupling(&grid, &spec.transfer, &state)?;
            let m = grid.interior_dofs();
            let v: Vec<f64> = (0..m).map(|k| ((k * 7919) % 101) as f64 / 50.0 - 1.0).collect();
            let stacked: Vec<f64> = v.iter().chain(&v).copied().collect();
            worst = worst.max(q.matvec(&stacked).iter().fold(0.0, |a, b| a.max(b.abs())));
        }
        Ok((worst <= 1e-12, format!("max |Q [v; v]| = {worst:.2e}")))
    }

    fn dimension_bookkeeping(&self) -> Result<(bool, String)> {
        let grid = StructuredGrid::new(REFERENCE_N)?;
        let mut ok = grid.interior_dofs() == 16129;
        let mut mismatches = Vec::new();
        for (hdiv, m, dims) in TABLE_DIMENSIONS {
            if default_layers(hdiv)? != m {
                mismatches.push(format!("layers at 1/{hdiv}"));
            }
            for (l, dim) in [4, 5, 6].into_iter().zip(dims) {
                if hdiv * hdiv * l != dim {
                    mismatches.push(format!("formula at 1/{hdiv}, L={l}"));
                }
            }
        }
        // Dimensions of every space actually built by the sweep.
        let mut built = 0;
        for id in ExperimentId::ALL {
            for (hdiv, _, dims) in TABLE_DIMENSIONS {
                for (l, dim) in [4, 5, 6].into_iter().zip(dims) {
                    if l != 4 && hdiv != 8 {
                        continue;
                    }
                    let row = self.row(id, hdiv, l)?;
                    built += 1;
                    let nc = if matches!(id, ExperimentId::E3 | ExperimentId::E4) { 2 } else { 1 };
                    if row.dim_vms != dim || row.dim_vh != nc * 16129 {
                        mismatches.push(format!("{id} 1/{hdiv} L={l}: {}", row.dim_vms));
                    }
                }
            }
        }
        ok &= mismatches.is_empty();
        Ok((
            ok,
            format!(
                "dim V_h = {}, {built} built spaces checked, mismatches: [{}]",
                grid.interior_dofs(),
                mismatches.join(", ")
            ),
        ))
    }

    fn scale_invariance(&self) -> Result<(bool, String)> {
        let n = 32;
        let id = ExperimentId::E4;
        let spec = self.spec(id, n)?;
        let grid = StructuredGrid::new(n)?;
        let samples = self.reference(id, n)?.samples(&spec)?;
        let partition = CoarsePartition::new(&grid, 4)?;
        let layers = default_layers(4)?;
        let build = |s: &SampleSet| -> Result<_> {
            let forms = SampledForms::normalized(&grid, &partition, &spec, s)?;
            let aux = solve_auxiliary(&grid, &partition, &forms, &BasisCount::Uniform(4))?;
            let space = build_basis(&grid, &partition, &aux, &forms, layers)?;
            Ok((aux, space))
        };
        let (aux1, space1) = build(&samples)?;
        let (aux7, space7) = build(&samples.scaled(7.0)?)?;
        let mut eig: f64 = 0.0;
        for (a, b) in aux1.blocks.iter().zip(&aux7.blocks) {
            for (x, y) in a.values.iter().zip(&b.values) {
                eig = eig.max((x - y).abs());
            }
            eig = eig.max(max_abs_diff(&a.vectors, &b.vectors));
        }
        let mut basis: f64 = 0.0;
        for (a, b) in space1.regions().iter().zip(space7.regions()) {
            basis = basis.max(max_abs_diff(&a.values, &b.values));
        }
        Ok((
            eig <= 1e-10 && basis <= 1e-10,
            format!("{id}, weights x7: eigenpairs {eig:.2e}, basis {basis:.2e}"),
        ))
    }

    fn basis_decay(&self) -> Result<(bool, String)> {
        let n = REFERENCE_N;
        let id = ExperimentId::E1;
        let spec = self.spec(id, n)?;
        let grid = StructuredGrid::new(n)?;
        let reference = self.reference(id, n)?;
        let samples = sample_source_steady(reference.last());
        let partition = CoarsePartition::new(&grid, 8)?;
        let forms = SampledForms::normalized(&grid, &partition, &spec, &samples)?;
        let aux = solve_auxiliary(&grid, &partition, &forms, &BasisCount::Uniform(4))?;
        let j = partition.block_id(1, 1);
        let mut worst: f64 = 0.0;
        let mut monotone = true;
        for k in 0..4 {
            let profile = decay_profile(&grid, &partition, &aux, &forms, j, k)?;
            monotone &= profile.windows(2).all(|w| w[1] <= w[0] + 1e-14);
            worst = worst.max(profile[5]);
        }
        Ok((
            worst < 1e-3 && monotone,
            format!("block (1,1), H=1/8: outside-energy fraction at 5 layers {worst:.2e}"),
        ))
    }
}

fn max_abs_diff(a: &faer::Mat<f64>, b: &faer::Mat<f64>) -> f64 {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

/// Single-continuum linear problem with a given field and source.
fn linear_problem(n: usize, field: CoefficientField, source: Source, time: Option<TimeHorizon>) -> Result<ProblemSpec> {
    debug_assert_eq!(field.n(), n);
    ProblemSpec::new(
        "manufactured",
        vec![Continuum {
            field,
            nonlinearity: Nonlinearity::Constant,
            source,
        }],
        Transfer::none(1),
        time,
    )
}

/// Full-rank basis (`m = Hdiv`, one function per owned fine unknown) on a
/// smoothly varying linear problem reproduces the fine solution. Small
/// blocks keep the square constraint system well conditioned; with larger
/// blocks the lowest local modes of neighbors are close to dependent.
fn exactness_limit() -> Result<(bool, String)> {
    let n = 16;
    let hdiv = 8;
    let grid = StructuredGrid::new(n)?;
    let values: Vec<f64> = (0..n * n)
        .map(|c| {
            let (x, y) = ((c % n) as f64 + 0.5, (c / n) as f64 + 0.5);
            1.0 + 0.5 * (2.0 * PI * x / n as f64).sin() * (PI * y / n as f64).cos()
        })
        .collect();
    let spec = linear_problem(n, CoefficientField::new(n, values)?, Source::SeparableSine { amplitude: 1.0 }, None)?;
    let model = FineModel::new(&grid, &spec)?;
    let (fine, _) = steady_solve(&model, SpaceHandle::Fine, PicardOptions::default(), &State::zeros(&grid, 1))?;
    let partition = CoarsePartition::new(&grid, hdiv)?;
    let samples = sample_source_steady(&fine);
    let forms = SampledForms::normalized(&grid, &partition, &spec, &samples)?;
    let counts = BasisCount::owned_dofs(&grid, &partition, 1);
    let aux = solve_auxiliary(&grid, &partition, &forms, &counts)?;
    let space = build_basis(&grid, &partition, &aux, &forms, hdiv)?;
    let (coarse, _) = coarse_solve(&grid, &spec, &space, PicardOptions::default())?;
    let e = compute_errors(&grid, &coarse, &fine)?;
    Ok((
        e.l2 <= 1e-8,
        format!("n={n}, H=1/{hdiv}, dim V_ms = {} = dim V_h: e_L2 = {:.2e}", space.dim(), e.l2),
    ))
}

/// `p = sin(pi x) sin(pi y)` with unit coefficients.
fn fine_order() -> Result<(bool, String)> {
    let exact = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let grad = |x: f64, y: f64| (PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos());
    let mut errs = Vec::new();
    for n in [16, 32, 64] {
        let grid = StructuredGrid::new(n)?;
        let spec = linear_problem(
            n,
            CoefficientField::uniform(n, 1.0)?,
            Source::SeparableSine {
                amplitude: 2.0 * PI * PI,
            },
            None,
        )?;
        let model = FineModel::new(&grid, &spec)?;
        let (p, _) = steady_solve(&model, SpaceHandle::Fine, PicardOptions::default(), &State::zeros(&grid, 1))?;
        errs.push(errors_against_exact(&grid, &p, exact, grad));
    }
    let order = |f: fn(&crate::harness::RelativeErrors) -> f64| -> Vec<f64> {
        errs.windows(2).map(|w| (f(&w[0]) / f(&w[1])).log2()).collect()
    };
    let l2 = order(|e| e.l2);
    let h1 = order(|e| e.h1);
    let ok = l2.iter().all(|o| (o - 2.0).abs() <= 0.2) && h1.iter().all(|o| (o - 1.0).abs() <= 0.2);
    Ok((ok, format!("L2 orders {l2:.3?}, H1 orders {h1:.3?}")))
}

/// Heat equation from a discrete eigenmode: the semi-discrete solution is
/// `exp(-lambda_h t) v`, so the error at `T` is purely temporal.
fn temporal_order() -> Result<(bool, String)> {
    let n = 16;
    let t_final = 0.1;
    let grid = StructuredGrid::new(n)?;
    let map = DofMap::interior(&grid, 1);
    let v = State::interpolate(&grid, 1, |_, x, y| (PI * x).sin() * (PI * y).sin()).to_dofs(&map);
    let mass = assemble_mass_on(&grid, &map);
    let lap = assemble_laplacian_on(&grid, &map);
    let lambda = lap.quad_form(&v) / mass.quad_form(&v);
    let mut errs = Vec::new();
    for steps in [10, 20, 40] {
        let spec = linear_problem(
            n,
            CoefficientField::uniform(n, 1.0)?,
            Source::Constant { value: 0.0 },
            Some(TimeHorizon { t_final, steps }),
        )?
        .with_initial(InitialState::SeparableSine { amplitude: 1.0 });
        let model = FineModel::new(&grid, &spec)?;
        let traj = Stepper::new(&model, SpaceHandle::Fine, PicardOptions::default())?.march(model.initial_state())?;
        let x = model.to_dofs(traj.last());
        let decay = (-lambda * t_final).exp();
        let d: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - decay * b).collect();
        errs.push(model.norm(&d));
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (r - 2.0).abs() <= 0.4);
    Ok((ok, format!("L2 errors at T {errs:.3?}, halving ratios {ratios:.3?}")))
}
