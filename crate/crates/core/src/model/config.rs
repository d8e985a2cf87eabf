//! TOML run configuration.
//!
//! ```toml
//! n = 128
//! hdiv = 8
//! layers = "auto"
//! n_basis = 4
//! experiment = "E1"
//! ```
//!
//! or, instead of `experiment`, a `[custom]` table with `[[custom.continua]]`
//! entries (`field`, `nonlinearity`, `source`), optional
//! `[[custom.transfer]]` entries (`from`, `to`, `law`, 1-based) and optional
//! `T`/`S` for transient runs.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::laws::{Nonlinearity, Source, Transfer, TransferLaw};
use super::raster::{load_square_raster, CoefficientField};
use super::{builtin_experiment, Continuum, ProblemSpec, TimeHorizon};
use crate::error::{Error, Result};
use crate::mesh::default_layers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 4] = [ExperimentId::E1, ExperimentId::E2, ExperimentId::E3, ExperimentId::E4];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}', expected E1..E4")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum AutoTag {
    Auto,
}

/// Oversampling layers: a fixed count or `"auto"` for [`default_layers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "LayersRepr", into = "LayersRepr")]
pub enum Layers {
    Fixed(usize),
    Auto,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum LayersRepr {
    Fixed(usize),
    Auto(AutoTag),
}

impl From<LayersRepr> for Layers {
    fn from(r: LayersRepr) -> Self {
        match r {
            LayersRepr::Fixed(m) => Layers::Fixed(m),
            LayersRepr::Auto(_) => Layers::Auto,
        }
    }
}

impl From<Layers> for LayersRepr {
    fn from(l: Layers) -> Self {
        match l {
            Layers::Fixed(m) => LayersRepr::Fixed(m),
            Layers::Auto => LayersRepr::Auto(AutoTag::Auto),
        }
    }
}

impl Default for Layers {
    fn default() -> Self {
        Layers::Auto
    }
}

impl Layers {
    pub fn resolve(&self, hdiv: usize) -> Result<usize> {
        match *self {
            Layers::Fixed(m) => Ok(m),
            Layers::Auto => default_layers(hdiv),
        }
    }
}

/// Per-cell field: a uniform value or a raster path (relative to the config
/// file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldRef {
    Uniform(f64),
    Raster(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumConfig {
    pub field: FieldRef,
    pub nonlinearity: Nonlinearity,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub from: usize,
    pub to: usize,
    pub law: TransferLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub continua: Vec<ContinuumConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transfer: Vec<TransferConfig>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

fn default_n() -> usize {
    128
}
fn default_basis() -> usize {
    4
}
fn default_delta0() -> f64 {
    1e-5
}
fn default_max_picard() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    pub hdiv: usize,
    #[serde(default)]
    pub layers: Layers,
    #[serde(default = "default_basis")]
    pub n_basis: usize,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_max_picard")]
    pub max_picard: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomProblem>,
}

impl RunConfig {
    pub fn for_experiment(id: ExperimentId, n: usize, hdiv: usize, n_basis: usize) -> Self {
        Self {
            n,
            hdiv,
            layers: Layers::Auto,
            n_basis,
            delta0: default_delta0(),
            max_picard: default_max_picard(),
            experiment: Some(id),
            custom: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.experiment, &self.custom) {
            (Some(_), Some(_)) => return Err(Error::Config("set either `experiment` or `custom`, not both".into())),
            (None, None) => return Err(Error::Config("one of `experiment` or `custom` is required".into())),
            _ => {}
        }
        if self.n < 2 || self.hdiv < 2 || self.n % self.hdiv != 0 {
            return Err(Error::Config(format!(
                "hdiv = {} must be >= 2 and divide n = {}",
                self.hdiv, self.n
            )));
        }
        if self.n_basis == 0 {
            return Err(Error::Config("n_basis must be positive".into()));
        }
        if !(self.delta0 > 0.0) || self.max_picard == 0 {
            return Err(Error::Config("delta0 must be positive and max_picard >= 1".into()));
        }
        if let Layers::Fixed(m) = self.layers {
            if m > self.hdiv {
                return Err(Error::Config(format!("layers = {m} exceeds hdiv = {}", self.hdiv)));
            }
        }
        if let Some(c) = &self.custom {
            if c.continua.is_empty() {
                return Err(Error::Config("custom problem needs at least one continuum".into()));
            }
            if c.t_final.is_some() != c.steps.is_some() {
                return Err(Error::Config("`T` and `S` must be given together".into()));
            }
            let nc = c.continua.len();
            for t in &c.transfer {
                if t.from == 0 || t.to == 0 || t.from > nc || t.to > nc || t.from == t.to {
                    return Err(Error::Config(format!(
                        "transfer pair ({}, {}) invalid for {nc} continua",
                        t.from, t.to
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn layers(&self) -> Result<usize> {
        self.layers.resolve(self.hdiv)
    }

    /// Experiment label used in reports.
    pub fn label(&self) -> String {
        match self.experiment {
            Some(id) => id.name().to_string(),
            None => "custom".to_string(),
        }
    }

    /// Builds the problem. Raster paths resolve against `base_dir`; built-in
    /// rasters are read from `data_dir`.
    pub fn problem(&self, base_dir: &Path, data_dir: &Path) -> Result<ProblemSpec> {
        if let Some(id) = self.experiment {
            return builtin_experiment(id, data_dir, self.n);
        }
        let c = self.custom.as_ref().expect("validated");
        let mut continua = Vec::with_capacity(c.continua.len());
        for cc in &c.continua {
            let field = match &cc.field {
                FieldRef::Uniform(v) => CoefficientField::uniform(self.n, *v)?,
                FieldRef::Raster(p) => load_square_raster(&base_dir.join(p))?.resample(self.n),
            };
            continua.push(Continuum {
                field,
                nonlinearity: cc.nonlinearity,
                source: cc.source,
            });
        }
        let mut transfer = Transfer::none(continua.len());
        for t in &c.transfer {
            transfer.set(t.from - 1, t.to - 1, t.law);
        }
        let time = match (c.t_final, c.steps) {
            (Some(t_final), Some(steps)) => Some(TimeHorizon { t_final, steps }),
            _ => None,
        };
        ProblemSpec::new("custom", continua, transfer, time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CUSTOM: &str = r#"
n = 16
hdiv = 4
layers = 2
n_basis = 3

[custom]
T = 1.0
S = 4

[[custom.continua]]
field = 2.0
nonlinearity = { tag = "gardner", alpha = 0.1 }
source = { tag = "exp_sum", scale = 1.0 }

[[custom.continua]]
field = 1.0
nonlinearity = { tag = "constant" }
source = { tag = "constant", value = -1.0 }

[[custom.transfer]]
from = 1
to = 2
law = { tag = "scaled_inverse_shift", beta = 100.0 }
"#;

    #[test]
    fn parses_experiment_config() {
        let c = RunConfig::parse("hdiv = 8\nexperiment = \"E3\"\n").unwrap();
        assert_eq!(c.n, 128);
        assert_eq!(c.layers().unwrap(), 5);
        assert_eq!(c.experiment, Some(ExperimentId::E3));
        let c = RunConfig::parse("hdiv = 8\nlayers = \"auto\"\nexperiment = \"E1\"\n").unwrap();
        assert_eq!(c.layers, Layers::Auto);
    }

    #[test]
    fn parses_custom_config() {
        let c = RunConfig::parse(CUSTOM).unwrap();
        let p = c.problem(Path::new("."), Path::new(".")).unwrap();
        assert_eq!(p.n_continua(), 2);
        assert_eq!(p.n(), 16);
        assert_eq!(p.tau(), Some(0.25));
        assert_eq!(*p.transfer.law(0, 1), TransferLaw::ScaledInverseShift { beta: 100.0 });
        assert_eq!(*p.transfer.law(1, 0), TransferLaw::Zero);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("hdiv = 8\nexperiment = \"E1\"\ncolour = 1\n").is_err());
        assert!(RunConfig::parse("hdiv = 8\n").is_err());
        assert!(RunConfig::parse("hdiv = 7\nexperiment = \"E1\"\n").is_err());
        assert!(RunConfig::parse("hdiv = 8\nexperiment = \"E9\"\n").is_err());
        assert!(RunConfig::parse("hdiv = 8\nlayers = \"many\"\nexperiment = \"E1\"\n").is_err());
        let bad_pair = CUSTOM.replace("to = 2", "to = 1");
        assert!(RunConfig::parse(&bad_pair).is_err());
        let bad_key = CUSTOM.replace("alpha = 0.1", "alpha = 0.1, beta = 2.0");
        assert!(RunConfig::parse(&bad_key).is_err());
    }

    #[test]
    fn custom_round_trip() {
        let c = RunConfig::parse(CUSTOM).unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml().unwrap()).unwrap(), c);
    }

    fn nonlinearity() -> impl Strategy<Value = Nonlinearity> {
        prop_oneof![
            Just(Nonlinearity::Exponential),
            Just(Nonlinearity::InverseShift),
            Just(Nonlinearity::Constant),
            (0.0f64..2.0).prop_map(|alpha| Nonlinearity::Gardner { alpha }),
        ]
    }

    fn source() -> impl Strategy<Value = Source> {
        prop_oneof![
            (-5.0f64..5.0).prop_map(|value| Source::Constant { value }),
            (-5.0f64..5.0).prop_map(|amplitude| Source::SeparableSine { amplitude }),
            (-5.0f64..5.0).prop_map(|scale| Source::ExpSum { scale }),
        ]
    }

    fn law() -> impl Strategy<Value = TransferLaw> {
        prop_oneof![
            Just(TransferLaw::Zero),
            (0.0f64..1e3).prop_map(|beta| TransferLaw::Constant { beta }),
            (0.0f64..1e3).prop_map(|beta| TransferLaw::ScaledInverseShift { beta }),
        ]
    }

    fn config() -> impl Strategy<Value = RunConfig> {
        let continuum = (
            prop_oneof![
                (0.01f64..1e4).prop_map(FieldRef::Uniform),
                "[a-z]{1,8}\\.txt".prop_map(|s| FieldRef::Raster(PathBuf::from(s))),
            ],
            nonlinearity(),
            source(),
        )
            .prop_map(|(field, nonlinearity, source)| ContinuumConfig {
                field,
                nonlinearity,
                source,
            });
        let custom = (
            prop::collection::vec(continuum, 1..4),
            law(),
            prop::option::of((0.1f64..10.0, 1usize..50)),
        )
            .prop_map(|(continua, law, time)| {
                let transfer = if continua.len() > 1 {
                    vec![TransferConfig { from: 1, to: 2, law }]
                } else {
                    Vec::new()
                };
                CustomProblem {
                    continua,
                    transfer,
                    t_final: time.map(|t| t.0),
                    steps: time.map(|t| t.1),
                }
            });
        (
            prop::sample::select(vec![(16usize, 2usize), (32, 4), (128, 8), (128, 32)]),
            prop::option::of(0usize..3),
            1usize..8,
            prop::option::of(prop::sample::select(ExperimentId::ALL.to_vec())),
            custom,
        )
            .prop_map(|((n, hdiv), layers, n_basis, experiment, custom)| RunConfig {
                n,
                hdiv,
                layers: layers.map_or(Layers::Auto, Layers::Fixed),
                n_basis,
                delta0: 1e-5,
                max_picard: 50,
                custom: if experiment.is_some() { None } else { Some(custom) },
                experiment,
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(cfg in config()) {
            let text = cfg.to_toml().unwrap();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
