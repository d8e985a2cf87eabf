//! Backward-Euler time marching with Picard linearization, on either the
//! fine space or a multiscale space.

use std::cell::RefCell;

use log::debug;

use crate::assembly::{assemble, assemble_mass_on, assemble_problem_load, DofMap, FormCoefficients, QuadratureRule, State};
use crate::cem::MultiscaleSpace;
use crate::error::{Error, Result};
use crate::linalg::{DenseSolver, SparseOperator, SparseSolver};
use crate::mesh::StructuredGrid;
use crate::model::ProblemSpec;

/// Fine-grid discretization of a problem: unknown numbering, mass matrix and
/// operator assembly at a given coefficient state.
pub struct FineModel<'a> {
    pub grid: &'a StructuredGrid,
    pub spec: &'a ProblemSpec,
    pub map: DofMap,
    /// Consistent mass matrix, one diagonal block per continuum.
    pub mass: SparseOperator,
    mass1: SparseOperator,
    map1: DofMap,
}

impl<'a> FineModel<'a> {
    pub fn new(grid: &'a StructuredGrid, spec: &'a ProblemSpec) -> Result<Self> {
        if spec.n() != grid.n() {
            return Err(Error::InvalidArgument(format!(
                "problem fields are {0}x{0}, grid is {1}x{1}",
                spec.n(),
                grid.n()
            )));
        }
        let nc = spec.n_continua();
        let map = DofMap::interior(grid, nc);
        let map1 = DofMap::interior(grid, 1);
        Ok(Self {
            grid,
            spec,
            mass: assemble_mass_on(grid, &map),
            mass1: assemble_mass_on(grid, &map1),
            map,
            map1,
        })
    }

    pub fn continua(&self) -> usize {
        self.spec.n_continua()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Interior unknowns per continuum.
    pub fn block_dim(&self) -> usize {
        self.map1.dim()
    }

    /// Coefficients of the Picard operator frozen at `state`: `a + q`, plus
    /// `1/tau` mass when `tau` is given.
    pub fn coefficients(&self, state: &State, tau: Option<f64>) -> Result<FormCoefficients> {
        let mut c = FormCoefficients::new(self.grid, self.continua(), QuadratureRule::Gauss2);
        c.add_energy(self.grid, self.spec, state, 1.0)?;
        if let Some(tau) = tau {
            c.add_reaction_constant(1.0 / tau);
        }
        Ok(c)
    }

    pub fn operator(&self, coeffs: &FormCoefficients) -> SparseOperator {
        assemble(self.grid, 0..self.grid.cell_count(), &self.map, coeffs)
    }

    pub fn load(&self, t: f64) -> Vec<f64> {
        assemble_problem_load(self.grid, &self.map, self.spec, t)
    }

    pub fn to_dofs(&self, s: &State) -> Vec<f64> {
        s.to_dofs(&self.map)
    }

    pub fn to_state(&self, x: &[f64], t: f64) -> State {
        let mut s = State::from_dofs(self.grid, &self.map, x);
        s.t = t;
        s
    }

    pub fn initial_state(&self) -> State {
        let init = self.spec.initial;
        State::interpolate(self.grid, self.continua(), |_, x, y| init.eval(x, y))
    }

    /// L2 norm of continuum `i` of a stacked vector.
    pub fn continuum_norm(&self, x: &[f64], i: usize) -> f64 {
        let m = self.block_dim();
        self.mass1.quad_form(&x[i * m..(i + 1) * m]).max(0.0).sqrt()
    }

    /// L2 norm over all continua.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.mass.quad_form(x).max(0.0).sqrt()
    }
}

/// Trial space of the Picard iteration.
#[derive(Clone, Copy)]
pub enum SpaceHandle<'s> {
    /// Identity basis on the interior unknowns.
    Fine,
    Coarse(&'s MultiscaleSpace),
}

impl SpaceHandle<'_> {
    pub fn is_fine(&self) -> bool {
        matches!(self, SpaceHandle::Fine)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PicardOptions {
    pub delta0: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            delta0: 1e-5,
            max_iter: 50,
        }
    }
}

/// History of one Picard solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// Linear solves performed, `alpha`.
    pub iterations: usize,
    /// Per iteration, the relative successive difference of every continuum.
    pub differences: Vec<Vec<f64>>,
    pub converged: bool,
    /// `|p^n - p^alpha|` (stacked L2) for `n = 0..alpha`.
    pub distances_to_last: Vec<f64>,
}

impl PicardReport {
    pub fn last_differences(&self) -> Option<&[f64]> {
        self.differences.last().map(Vec::as_slice)
    }
}

/// Geometric mean of `d_{n+1} / d_n` with `d_n = |p^n - p^alpha|` for
/// `n + 1 < alpha`, taking the last iterate as the limit. A vanishing ratio
/// gives 0.
pub fn contraction_estimate(report: &PicardReport) -> Result<f64> {
    let d = &report.distances_to_last;
    if report.iterations < 2 || d.len() < 3 {
        return Err(Error::TooFewIterations(report.iterations + 1));
    }
    // The last iterate stands in for the limit, so its own distance carries
    // no information.
    let d = &d[..d.len() - 1];
    let mut log_sum = 0.0;
    let mut count = 0;
    for w in d.windows(2) {
        if w[0] == 0.0 {
            continue;
        }
        if w[1] == 0.0 {
            return Ok(0.0);
        }
        log_sum += (w[1] / w[0]).ln();
        count += 1;
    }
    if count == 0 {
        return Ok(0.0);
    }
    Ok((log_sum / count as f64).exp())
}

/// Result of a full march.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `S + 1` levels, `t = 0` first.
    pub states: Vec<State>,
    pub reports: Vec<PicardReport>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn mean_iterations(&self) -> f64 {
        mean_iterations(&self.reports)
    }
}

pub fn mean_iterations(reports: &[PicardReport]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().map(|r| r.iterations as f64).sum::<f64>() / reports.len() as f64
}

enum CachedSolver {
    Fine(SparseSolver),
    Coarse(DenseSolver),
}

/// Picard driver over one space. For linear problems the factorized
/// operator is reused across iterations and time steps.
pub struct Stepper<'m, 's> {
    model: &'m FineModel<'m>,
    space: SpaceHandle<'s>,
    options: PicardOptions,
    cache: RefCell<Option<(Option<f64>, CachedSolver)>>,
}

impl<'m, 's> Stepper<'m, 's> {
    pub fn new(model: &'m FineModel<'m>, space: SpaceHandle<'s>, options: PicardOptions) -> Result<Self> {
        if !(options.delta0 > 0.0) || options.max_iter == 0 {
            return Err(Error::InvalidArgument("delta0 must be positive and max_iter >= 1".into()));
        }
        if let SpaceHandle::Coarse(ms) = space {
            if ms.fine_dim() != model.dim() {
                return Err(Error::InvalidArgument("multiscale space was built for another grid".into()));
            }
        }
        Ok(Self {
            model,
            space,
            options,
            cache: RefCell::new(None),
        })
    }

    fn linear_solve(&self, state: &State, tau: Option<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
        let linear = self.model.spec.is_linear();
        let mut cache = self.cache.borrow_mut();
        let reusable = linear && matches!(&*cache, Some((t, _)) if *t == tau);
        if !reusable {
            let coeffs = self.model.coefficients(state, tau)?;
            let solver = match self.space {
                SpaceHandle::Fine => CachedSolver::Fine(SparseSolver::new(&self.model.operator(&coeffs))?),
                SpaceHandle::Coarse(ms) => {
                    let k = ms.galerkin(self.model.grid, &coeffs);
                    CachedSolver::Coarse(if coeffs.is_symmetric() {
                        DenseSolver::new_symmetric(k)?
                    } else {
                        DenseSolver::new(k)?
                    })
                }
            };
            *cache = Some((tau, solver));
        }
        let (_, solver) = cache.as_ref().expect("filled above");
        let out = match (solver, self.space) {
            (CachedSolver::Fine(s), _) => s.solve(rhs)?,
            (CachedSolver::Coarse(s), SpaceHandle::Coarse(ms)) => ms.prolong(&s.solve(&ms.restrict(rhs))?),
            _ => unreachable!("cache matches space"),
        };
        if !linear {
            *cache = None;
        }
        Ok(out)
    }

    /// Picard iteration for one level. `p_prev` is the previous time level
    /// (ignored when `tau` is `None`), `guess` the starting iterate and `t`
    /// the time at which sources are evaluated.
    pub fn picard_step(
        &self,
        p_prev: Option<&State>,
        guess: &State,
        tau: Option<f64>,
        t: f64,
    ) -> Result<(State, PicardReport)> {
        let model = self.model;
        let nc = model.continua();
        let mut rhs = model.load(t);
        if let (Some(tau), Some(prev)) = (tau, p_prev) {
            let mp = model.mass.matvec(&model.to_dofs(prev));
            for (r, m) in rhs.iter_mut().zip(mp) {
                *r += m / tau;
            }
        }
        let mut iterates = vec![model.to_dofs(guess)];
        let mut state = guess.clone();
        let mut differences = Vec::new();
        let mut converged = false;
        while differences.len() < self.options.max_iter {
            let x = self.linear_solve(&state, tau, &rhs)?;
            let prev = iterates.last().expect("nonempty");
            let diff: Vec<f64> = x.iter().zip(prev).map(|(a, b)| a - b).collect();
            let rel: Vec<f64> = (0..nc)
                .map(|i| {
                    let num = model.continuum_norm(&diff, i);
                    let den = model.continuum_norm(prev, i);
                    if den > 0.0 {
                        num / den
                    } else {
                        num
                    }
                })
                .collect();
            state = model.to_state(&x, t);
            if !state.is_finite() {
                return Err(Error::Singular("Picard iterate is not finite".into()));
            }
            converged = rel.iter().all(|r| *r <= self.options.delta0);
            debug!("picard iteration {}: {:?}", differences.len() + 1, rel);
            differences.push(rel);
            iterates.push(x);
            if converged {
                break;
            }
        }
        let last = iterates.last().expect("nonempty");
        let distances_to_last = iterates
            .iter()
            .map(|x| {
                let d: Vec<f64> = x.iter().zip(last).map(|(a, b)| a - b).collect();
                model.norm(&d)
            })
            .collect();
        let report = PicardReport {
            iterations: differences.len(),
            differences,
            converged,
            distances_to_last,
        };
        Ok((state, report))
    }

    /// Time-free Picard solve starting from `guess`.
    pub fn steady_solve(&self, guess: &State) -> Result<(State, PicardReport)> {
        self.picard_step(None, guess, None, 0.0)
    }

    /// Marches `S` backward-Euler steps from `initial`; each Picard solve
    /// starts from the previous level.
    pub fn march(&self, initial: State) -> Result<Trajectory> {
        let time = self
            .model
            .spec
            .time
            .ok_or_else(|| Error::InvalidArgument("march needs a transient problem".into()))?;
        let tau = time.tau();
        let mut states = Vec::with_capacity(time.steps + 1);
        let mut reports = Vec::with_capacity(time.steps);
        states.push(initial);
        for s in 0..time.steps {
            let t = (s + 1) as f64 * tau;
            let prev = states.last().expect("nonempty");
            let (next, report) = self.picard_step(Some(prev), prev, Some(tau), t)?;
            debug!("step {} t={t}: {} iterations", s + 1, report.iterations);
            reports.push(report);
            states.push(next);
        }
        Ok(Trajectory { states, reports })
    }
}

/// Picard solve of one level on `space`; see [`Stepper::picard_step`].
pub fn picard_step(
    model: &FineModel<'_>,
    space: SpaceHandle<'_>,
    p_prev: Option<&State>,
    guess: &State,
    tau: Option<f64>,
    t: f64,
    options: PicardOptions,
) -> Result<(State, PicardReport)> {
    Stepper::new(model, space, options)?.picard_step(p_prev, guess, tau, t)
}

pub fn steady_solve(
    model: &FineModel<'_>,
    space: SpaceHandle<'_>,
    options: PicardOptions,
    guess: &State,
) -> Result<(State, PicardReport)> {
    Stepper::new(model, space, options)?.steady_solve(guess)
}

pub fn march(model: &FineModel<'_>, space: SpaceHandle<'_>, options: PicardOptions, initial: State) -> Result<Trajectory> {
    Stepper::new(model, space, options)?.march(initial)
}
