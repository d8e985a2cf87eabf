//! Experiment orchestration: fine reference, offline basis construction,
//! coarse solves, error metrics and reports.

pub mod acceptance;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_laplacian_on, assemble_mass_on, DofMap, QuadratureRule, State};
use crate::cem::{
    build_basis, content_hash, load_space, project_initial, sample_source_steady, sample_source_transient, save_space,
    solve_auxiliary, BasisCount, MultiscaleSpace, SampleSet, SampledForms,
};
use crate::error::{Error, Result};
use crate::mesh::{default_layers, CoarsePartition, StructuredGrid};
use crate::model::{builtin_experiment, format_raster, ExperimentId, ProblemSpec, RunConfig};
use crate::stepping::{contraction_estimate, mean_iterations, FineModel, PicardOptions, PicardReport, SpaceHandle, Stepper};

/// Relative errors of an approximation against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeErrors {
    pub l2: f64,
    pub h1: f64,
}

/// `|a - b| / |b|` in the L2 norm and the H1 seminorm, stacked over continua.
pub fn compute_errors(grid: &StructuredGrid, approx: &State, reference: &State) -> Result<RelativeErrors> {
    let nc = reference.continua();
    if approx.continua() != nc {
        return Err(Error::InvalidArgument(format!(
            "states have {} and {nc} continua",
            approx.continua()
        )));
    }
    let map = DofMap::interior(grid, nc);
    let mass = assemble_mass_on(grid, &map);
    let lap = assemble_laplacian_on(grid, &map);
    let xr = reference.to_dofs(&map);
    let d: Vec<f64> = approx.to_dofs(&map).iter().zip(&xr).map(|(a, b)| a - b).collect();
    let ratio = |op: &crate::linalg::SparseOperator, what: &'static str| {
        let den = op.quad_form(&xr).max(0.0).sqrt();
        if den == 0.0 {
            return Err(Error::ZeroReference(what));
        }
        Ok(op.quad_form(&d).max(0.0).sqrt() / den)
    };
    Ok(RelativeErrors {
        l2: ratio(&mass, "L2")?,
        h1: ratio(&lap, "H1")?,
    })
}

/// Absolute L2 and H1-seminorm errors of a discrete state against a known
/// function, integrated with 3x3 Gauss quadrature on every cell. Single
/// continuum.
pub fn errors_against_exact(
    grid: &StructuredGrid,
    state: &State,
    exact: impl Fn(f64, f64) -> f64,
    exact_grad: impl Fn(f64, f64) -> (f64, f64),
) -> RelativeErrors {
    use crate::assembly::{shape, shape_grad};
    let h = grid.h();
    let u = &state.values[0];
    let (mut l2, mut h1) = (0.0, 0.0);
    for cell in 0..grid.cell_count() {
        let nodes = grid.cell_nodes(cell);
        let (x0, y0) = grid.cell_origin(cell);
        for (xi, eta, w) in QuadratureRule::Gauss3.points() {
            let n = shape(xi, eta);
            let g = shape_grad(xi, eta);
            let (x, y) = (x0 + xi * h, y0 + eta * h);
            let mut v = 0.0;
            let (mut gx, mut gy) = (0.0, 0.0);
            for a in 0..4 {
                v += n[a] * u[nodes[a]];
                gx += g[a].0 / h * u[nodes[a]];
                gy += g[a].1 / h * u[nodes[a]];
            }
            let (ex, ey) = exact_grad(x, y);
            l2 += w * h * h * (v - exact(x, y)).powi(2);
            h1 += w * h * h * ((gx - ex).powi(2) + (gy - ey).powi(2));
        }
    }
    RelativeErrors {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    }
}

/// Converged fine solution: the whole trajectory for transient problems, a
/// single level for steady ones.
#[derive(Debug, Clone)]
pub struct FineReference {
    pub states: Vec<State>,
    pub reports: Vec<PicardReport>,
    pub seconds: f64,
}

impl FineReference {
    pub fn last(&self) -> &State {
        self.states.last().expect("reference is never empty")
    }

    pub fn mean_iterations(&self) -> f64 {
        mean_iterations(&self.reports)
    }

    /// Sample set of the offline stage: the steady solution, or the
    /// trapezoid-weighted trajectory.
    pub fn samples(&self, spec: &ProblemSpec) -> Result<SampleSet> {
        match spec.time {
            None => Ok(sample_source_steady(self.last())),
            Some(t) => sample_source_transient(&self.states, t.steps),
        }
    }
}

pub fn fine_reference(grid: &StructuredGrid, spec: &ProblemSpec, options: PicardOptions) -> Result<FineReference> {
    let start = Instant::now();
    let model = FineModel::new(grid, spec)?;
    let stepper = Stepper::new(&model, SpaceHandle::Fine, options)?;
    let (states, reports) = if spec.is_steady() {
        let (s, r) = stepper.steady_solve(&State::zeros(grid, spec.n_continua()))?;
        (vec![s], vec![r])
    } else {
        let traj = stepper.march(model.initial_state())?;
        (traj.states, traj.reports)
    };
    Ok(FineReference {
        states,
        reports,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Coarse discretization parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseParams {
    pub hdiv: usize,
    pub layers: usize,
    pub n_basis: usize,
}

impl CaseParams {
    /// `layers` from [`default_layers`].
    pub fn with_default_layers(hdiv: usize, n_basis: usize) -> Result<Self> {
        Ok(Self {
            hdiv,
            layers: default_layers(hdiv)?,
            n_basis,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub picard: PicardOptions,
    /// Directory for cached bases; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
    /// Also measure errors at every time level, not just the last.
    pub trace: bool,
}

/// Relative errors at one time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub t: f64,
    #[serde(rename = "err_H1")]
    pub err_h1: f64,
    #[serde(rename = "err_L2")]
    pub err_l2: f64,
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment: String,
    #[serde(rename = "H")]
    pub h: f64,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "dim_Vms")]
    pub dim_vms: usize,
    #[serde(rename = "dim_Vh")]
    pub dim_vh: usize,
    #[serde(rename = "err_H1")]
    pub err_h1: f64,
    #[serde(rename = "err_L2")]
    pub err_l2: f64,
    pub picard_mean_fine: f64,
    pub picard_mean_coarse: f64,
    pub lambda_hat: f64,
    pub offline_s: f64,
    pub online_s: f64,
}

impl ReportRow {
    pub fn hdiv(&self) -> usize {
        (1.0 / self.h).round() as usize
    }
}

/// Result of one coarse run against a fine reference.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub row: ReportRow,
    pub coarse_final: State,
    pub coarse_reports: Vec<PicardReport>,
    /// Per-level errors, filled only when tracing was requested.
    pub trace: Vec<TracePoint>,
}

/// Largest contraction estimate over the solves that recorded enough
/// iterates; 0 when none did.
pub fn max_contraction(reports: &[PicardReport]) -> f64 {
    reports
        .iter()
        .filter_map(|r| contraction_estimate(r).ok())
        .fold(0.0, f64::max)
}

/// Offline stage: sampled forms, auxiliary spectra and the localized basis.
pub fn offline_space(
    grid: &StructuredGrid,
    spec: &ProblemSpec,
    samples: &SampleSet,
    params: CaseParams,
    cache_dir: Option<&Path>,
) -> Result<MultiscaleSpace> {
    let partition = CoarsePartition::new(grid, params.hdiv)?;
    let nc = spec.n_continua();
    let cache = cache_dir.map(|dir| {
        let description = format!("{params:?} {spec:?}");
        let hash = content_hash(&description, samples);
        let name: String = hash[..8].iter().map(|b| format!("{b:02x}")).collect();
        (dir.join(format!("basis-{name}.bin")), hash)
    });
    if let Some((path, hash)) = &cache {
        if let Some(space) = load_space(path, grid, &partition, params.layers, nc, hash)? {
            info!("loaded basis from {}", path.display());
            return Ok(space);
        }
    }
    let forms = SampledForms::normalized(grid, &partition, spec, samples).map_err(Error::at_stage("sampled forms"))?;
    let aux = solve_auxiliary(grid, &partition, &forms, &BasisCount::Uniform(params.n_basis))
        .map_err(Error::at_stage("auxiliary spectra"))?;
    let space = build_basis(grid, &partition, &aux, &forms, params.layers).map_err(Error::at_stage("basis"))?;
    if let Some((path, hash)) = &cache {
        save_space(path, &space, hash)?;
    }
    Ok(space)
}

/// Coarse solve on `space`: projected initial state, then the steady Picard
/// solve or the full march. Returns the final fine-grid state and reports.
pub fn coarse_solve(
    grid: &StructuredGrid,
    spec: &ProblemSpec,
    space: &MultiscaleSpace,
    options: PicardOptions,
) -> Result<(State, Vec<PicardReport>)> {
    let (mut states, reports) = coarse_trajectory(grid, spec, space, options)?;
    Ok((states.pop().expect("trajectory is never empty"), reports))
}

/// Like [`coarse_solve`] but keeps every time level.
pub fn coarse_trajectory(
    grid: &StructuredGrid,
    spec: &ProblemSpec,
    space: &MultiscaleSpace,
    options: PicardOptions,
) -> Result<(Vec<State>, Vec<PicardReport>)> {
    let model = FineModel::new(grid, spec)?;
    let stepper = Stepper::new(&model, SpaceHandle::Coarse(space), options)?;
    if spec.is_steady() {
        let (s, r) = stepper.steady_solve(&State::zeros(grid, spec.n_continua()))?;
        Ok((vec![s], vec![r]))
    } else {
        let p0 = model.initial_state();
        let c0 = project_initial(&model, space, &p0)?;
        let start = model.to_state(&space.prolong(&c0), 0.0);
        let traj = stepper.march(start)?;
        Ok((traj.states, traj.reports))
    }
}

/// Offline and online stages of one `(H, m, L)` case against a shared fine
/// reference.
pub fn run_case(
    grid: &StructuredGrid,
    spec: &ProblemSpec,
    reference: &FineReference,
    params: CaseParams,
    options: &RunOptions,
) -> Result<CaseOutcome> {
    let offline = Instant::now();
    let samples = reference.samples(spec)?;
    let space = offline_space(grid, spec, &samples, params, options.cache_dir.as_deref())?;
    let offline_s = offline.elapsed().as_secs_f64();
    let online = Instant::now();
    let (mut coarse_states, coarse_reports) =
        coarse_trajectory(grid, spec, &space, options.picard).map_err(Error::at_stage("coarse solve"))?;
    let online_s = online.elapsed().as_secs_f64();
    let mut trace = Vec::new();
    if options.trace {
        for (step, (c, f)) in coarse_states.iter().zip(&reference.states).enumerate() {
            // The zero initial level has no relative error.
            if f.max_abs() == 0.0 {
                continue;
            }
            let e = compute_errors(grid, c, f).map_err(Error::at_stage("errors"))?;
            trace.push(TracePoint {
                step,
                t: f.t,
                err_h1: e.h1,
                err_l2: e.l2,
            });
        }
    }
    let coarse_final = coarse_states.pop().expect("trajectory is never empty");
    let errors = compute_errors(grid, &coarse_final, reference.last()).map_err(Error::at_stage("errors"))?;
    let row = ReportRow {
        experiment: spec.name.clone(),
        h: 1.0 / params.hdiv as f64,
        m: params.layers,
        l: params.n_basis,
        dim_vms: space.dim(),
        dim_vh: spec.n_continua() * grid.interior_dofs(),
        err_h1: errors.h1,
        err_l2: errors.l2,
        picard_mean_fine: reference.mean_iterations(),
        picard_mean_coarse: mean_iterations(&coarse_reports),
        lambda_hat: max_contraction(&coarse_reports),
        offline_s,
        online_s,
    };
    info!(
        "{} H=1/{} m={} L={}: e_H1={:.4e} e_L2={:.4e} ({:.1}s offline, {:.1}s online)",
        row.experiment, params.hdiv, row.m, row.l, row.err_h1, row.err_l2, offline_s, online_s
    );
    Ok(CaseOutcome {
        row,
        coarse_final,
        coarse_reports,
        trace,
    })
}

/// Rows of a sweep and the final fields written next to `report.csv`.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    /// `(file stem, state)` pairs written as one raster per continuum.
    pub fields: Vec<(String, State)>,
    /// `(file stem, errors per level)`, written as `<stem>_trace.csv`.
    pub traces: Vec<(String, Vec<TracePoint>)>,
}

impl ExperimentReport {
    pub fn push_case(&mut self, outcome: CaseOutcome) {
        let r = &outcome.row;
        let stem = format!("{}_H{}_m{}_L{}_cem", r.experiment, r.hdiv(), r.m, r.l);
        if !outcome.trace.is_empty() {
            self.traces.push((stem.clone(), outcome.trace));
        }
        self.fields.push((stem, outcome.coarse_final));
        self.rows.push(outcome.row);
    }
}

/// Runs one configuration file end to end.
pub fn run_experiment(config: &RunConfig, base_dir: &Path, data_dir: &Path, options: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let mut spec = config.problem(base_dir, data_dir)?;
    spec.name = config.label();
    let grid = StructuredGrid::new(config.n)?;
    let picard = PicardOptions {
        delta0: config.delta0,
        max_iter: config.max_picard,
    };
    let options = RunOptions {
        picard,
        cache_dir: options.cache_dir.clone(),
        trace: options.trace,
    };
    let reference = fine_reference(&grid, &spec, picard).map_err(Error::at_stage("fine reference"))?;
    let params = CaseParams {
        hdiv: config.hdiv,
        layers: config.layers()?,
        n_basis: config.n_basis,
    };
    let mut report = ExperimentReport::default();
    report.fields.push((format!("{}_fem", spec.name), reference.last().clone()));
    report.push_case(run_case(&grid, &spec, &reference, params, &options)?);
    Ok(report)
}

/// `(hdiv, L)` pairs of the full grid, ordered by `H` descending then `L`.
pub fn paper_cases(hdivs: &[usize], n_basis: &[usize]) -> Result<Vec<CaseParams>> {
    let mut h: Vec<usize> = hdivs.to_vec();
    h.sort_unstable();
    let mut out = Vec::new();
    for hdiv in h {
        for &l in n_basis {
            out.push(CaseParams::with_default_layers(hdiv, l)?);
        }
    }
    Ok(out)
}

/// Runs every case of one built-in experiment against a single shared fine
/// reference.
pub fn sweep(
    id: ExperimentId,
    data_dir: &Path,
    n: usize,
    cases: &[CaseParams],
    options: &RunOptions,
) -> Result<ExperimentReport> {
    let spec = builtin_experiment(id, data_dir, n)?;
    let grid = StructuredGrid::new(n)?;
    let reference = fine_reference(&grid, &spec, options.picard).map_err(Error::at_stage("fine reference"))?;
    info!(
        "{id}: fine reference in {:.1}s, {:.2} Picard iterations on average",
        reference.seconds,
        reference.mean_iterations()
    );
    let mut report = ExperimentReport::default();
    report.fields.push((format!("{}_fem", spec.name), reference.last().clone()));
    for &params in cases {
        report.push_case(run_case(&grid, &spec, &reference, params, options)?);
    }
    Ok(report)
}

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_COLUMNS: [&str; 13] = [
    "experiment",
    "H",
    "m",
    "L",
    "dim_Vms",
    "dim_Vh",
    "err_H1",
    "err_L2",
    "picard_mean_fine",
    "picard_mean_coarse",
    "lambda_hat",
    "offline_s",
    "online_s",
];

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Config(format!("{}: unexpected columns {header:?}", path.display())));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<ReportRow>, _>>()?)
}

/// Writes `report.csv` and one raster per continuum and field into `out`.
pub fn emit_report(report: &ExperimentReport, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    write_csv(&out.join("report.csv"), &report.rows)?;
    for (stem, state) in &report.fields {
        let side = (state.values[0].len() as f64).sqrt().round() as usize;
        for (i, v) in state.values.iter().enumerate() {
            fs::write(out.join(format!("{stem}_p{}.txt", i + 1)), format_raster(side, v))?;
        }
    }
    for (stem, points) in &report.traces {
        let mut w = csv::Writer::from_path(out.join(format!("{stem}_trace.csv")))?;
        for p in points {
            w.serialize(p)?;
        }
        w.flush()?;
    }
    Ok(())
}
