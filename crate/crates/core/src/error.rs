use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fine grid needs at least 2 cells per side, got {0}")]
    GridTooSmall(usize),

    #[error("coarse grid: {hdiv} blocks per side must be >= 2 and divide {n} fine cells per side")]
    InvalidCoarsening { n: usize, hdiv: usize },

    #[error("oversampling: {layers} layers exceeds {hdiv} blocks per side")]
    InvalidLayers { layers: usize, hdiv: usize },

    #[error("{path}:{line}:{column}: {message}")]
    Raster {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("raster {path} is {nx}x{ny}, grid needs {expected}x{expected}")]
    RasterDimensions {
        path: PathBuf,
        nx: usize,
        ny: usize,
        expected: usize,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite coefficient {value} in cell {cell} (continuum {continuum})")]
    NonFiniteCoefficient {
        cell: usize,
        continuum: usize,
        value: f64,
    },

    #[error("linear solve failed: {0}")]
    Singular(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("eigensolver: {0}")]
    Eigen(String),

    #[error("saddle system: constraint row {row} is linearly dependent on earlier rows")]
    RankDeficientConstraints { row: usize },

    #[error("contraction estimate needs at least 3 Picard iterates, got {0}")]
    TooFewIterations(usize),

    #[error("reference solution has zero {0} norm")]
    ZeroReference(&'static str),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("basis cache: {0}")]
    Cache(String),

    #[error("report: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
