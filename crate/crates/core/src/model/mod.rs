//! Problem definitions: coefficient fields, constitutive laws, sources,
//! time horizon, the built-in experiments and run configuration.

mod config;
mod laws;
mod raster;
mod reference;

use std::path::{Path, PathBuf};

pub use config::{ContinuumConfig, CustomProblem, ExperimentId, FieldRef, Layers, RunConfig, TransferConfig};
pub use laws::{eval_conductivity, eval_transfer, Nonlinearity, Source, Transfer, TransferLaw};
pub use raster::{
    format_raster, load_field_raster, load_square_raster, parse_raster, read_raster, CoefficientField, Raster,
};
pub use reference::{ReferenceLayout, REFERENCE_N};

use crate::error::{Error, Result};

/// Data of one continuum `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuum {
    pub field: CoefficientField,
    pub nonlinearity: Nonlinearity,
    pub source: Source,
}

/// Uniform backward-Euler time grid on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeHorizon {
    pub t_final: f64,
    pub steps: usize,
}

impl TimeHorizon {
    pub fn tau(&self) -> f64 {
        self.t_final / self.steps as f64
    }
}

/// Initial pressure, the same in every continuum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialState {
    #[default]
    Zero,
    /// `amplitude * sin(pi x) sin(pi y)`
    SeparableSine { amplitude: f64 },
}

impl InitialState {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            InitialState::Zero => 0.0,
            InitialState::SeparableSine { amplitude } => amplitude * (PI * x).sin() * (PI * y).sin(),
        }
    }
}

/// A complete multi-continuum problem on a fixed fine resolution.
/// Boundary values are zero on the whole boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub continua: Vec<Continuum>,
    pub transfer: Transfer,
    /// `None` for steady problems.
    pub time: Option<TimeHorizon>,
    pub initial: InitialState,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        continua: Vec<Continuum>,
        transfer: Transfer,
        time: Option<TimeHorizon>,
    ) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            continua,
            transfer,
            time,
            initial: InitialState::Zero,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    fn validate(&self) -> Result<()> {
        let first = self
            .continua
            .first()
            .ok_or_else(|| Error::InvalidArgument("problem needs at least one continuum".into()))?;
        if self.continua.iter().any(|c| c.field.n() != first.field.n()) {
            return Err(Error::InvalidArgument("continuum fields differ in resolution".into()));
        }
        if self.transfer.continua() != self.continua.len() {
            return Err(Error::InvalidArgument(format!(
                "transfer is defined for {} continua, problem has {}",
                self.transfer.continua(),
                self.continua.len()
            )));
        }
        if let Some(t) = self.time {
            if t.steps == 0 || !(t.t_final > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "time horizon needs T > 0 and S >= 1, got T = {}, S = {}",
                    t.t_final, t.steps
                )));
            }
        }
        Ok(())
    }

    pub fn n_continua(&self) -> usize {
        self.continua.len()
    }

    /// Fine cells per side the fields are defined on.
    pub fn n(&self) -> usize {
        self.continua[0].field.n()
    }

    pub fn is_steady(&self) -> bool {
        self.time.is_none()
    }

    pub fn tau(&self) -> Option<f64> {
        self.time.map(|t| t.tau())
    }

    /// True when no coefficient depends on the pressure.
    pub fn is_linear(&self) -> bool {
        self.continua.iter().all(|c| c.nonlinearity.is_linear()) && self.transfer.is_linear()
    }

    /// The same problem with every field resampled to `n` cells per side.
    pub fn resampled(&self, n: usize) -> Self {
        let mut out = self.clone();
        for c in &mut out.continua {
            c.field = c.field.resample(n);
        }
        out
    }
}

/// Directory holding the shipped reference rasters.
pub fn default_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn load_layout(data_dir: &Path, layout: ReferenceLayout, n: usize) -> Result<CoefficientField> {
    let path = data_dir.join(layout.file_name());
    Ok(load_square_raster(&path)?.resample(n))
}

/// One built-in experiment with fields resampled to `n` cells per side.
pub fn builtin_experiment(id: ExperimentId, data_dir: &Path, n: usize) -> Result<ProblemSpec> {
    let horizon = Some(TimeHorizon {
        t_final: 2.0,
        steps: 20,
    });
    match id {
        ExperimentId::E1 | ExperimentId::E2 => {
            let field = load_layout(data_dir, ReferenceLayout::SingleChannels, n)?;
            let (source, time) = if id == ExperimentId::E1 {
                (Source::Constant { value: 1.0 }, None)
            } else {
                (Source::SeparableSine { amplitude: 1.0 }, horizon)
            };
            ProblemSpec::new(
                id.name(),
                vec![Continuum {
                    field,
                    nonlinearity: Nonlinearity::Exponential,
                    source,
                }],
                Transfer::none(1),
                time,
            )
        }
        ExperimentId::E3 => {
            let k1 = load_layout(data_dir, ReferenceLayout::DualMatrix, n)?;
            let k2 = load_layout(data_dir, ReferenceLayout::DualFracturesSteady, n)?;
            let nl = Nonlinearity::InverseShift;
            ProblemSpec::new(
                id.name(),
                vec![
                    Continuum {
                        field: k1,
                        nonlinearity: nl,
                        source: Source::Constant { value: 1.0 },
                    },
                    Continuum {
                        field: k2,
                        nonlinearity: nl,
                        source: Source::Constant { value: -1.0 },
                    },
                ],
                Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta: 10.0 }),
                None,
            )
        }
        ExperimentId::E4 => {
            let k1 = load_layout(data_dir, ReferenceLayout::DualMatrix, n)?;
            let k2 = load_layout(data_dir, ReferenceLayout::DualFracturesTransient, n)?;
            let nl = Nonlinearity::Gardner { alpha: 0.1 };
            ProblemSpec::new(
                id.name(),
                vec![
                    Continuum {
                        field: k1,
                        nonlinearity: nl,
                        source: Source::ExpSum { scale: 1.0 },
                    },
                    Continuum {
                        field: k2,
                        nonlinearity: nl,
                        source: Source::ExpSum { scale: -1.0 },
                    },
                ],
                Transfer::uniform(2, TransferLaw::ScaledInverseShift { beta: 100.0 }),
                horizon,
            )
        }
    }
}

/// All four built-in experiments, in order E1..E4.
pub fn builtin_experiments(data_dir: &Path, n: usize) -> Result<Vec<ProblemSpec>> {
    ExperimentId::ALL
        .iter()
        .map(|id| builtin_experiment(*id, data_dir, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_match_definitions() {
        let specs = builtin_experiments(&default_data_dir(), 32).unwrap();
        assert_eq!(specs.len(), 4);
        let e1 = &specs[0];
        assert_eq!(e1.n_continua(), 1);
        assert!(e1.transfer.is_zero());
        assert!(e1.is_steady());
        let e2 = &specs[1];
        assert_eq!(e2.time.unwrap().steps, 20);
        assert!((e2.tau().unwrap() - 0.1).abs() < 1e-15);
        let e3 = &specs[2];
        assert_eq!(e3.n_continua(), 2);
        assert_eq!(e3.continua[0].source, Source::Constant { value: 1.0 });
        assert_eq!(e3.continua[1].source, Source::Constant { value: -1.0 });
        assert_eq!((e3.continua[1].field.min(), e3.continua[1].field.max()), (0.5, 10.0));
        let e4 = &specs[3];
        assert_eq!(e4.continua[0].nonlinearity, Nonlinearity::Gardner { alpha: 0.1 });
        assert_eq!((e4.continua[0].field.min(), e4.continua[0].field.max()), (10.0, 1e4));
        assert_eq!(e4.n(), 32);
    }

    #[test]
    fn shipped_rasters_match_generator() {
        for layout in ReferenceLayout::ALL {
            let path = default_data_dir().join(layout.file_name());
            let shipped = load_square_raster(&path).unwrap();
            assert_eq!(shipped, layout.field(), "{}", layout.file_name());
        }
    }

    #[test]
    fn missing_raster_is_an_error() {
        assert!(builtin_experiment(ExperimentId::E1, Path::new("/nonexistent"), 32).is_err());
    }
}
