//! Run configuration: one JSON document with `model`, `grid`, `spectral`,
//! `evolve`, `tolerances`, `bands`, `noncommute`, `verify` blocks and a seed.
//!
//! Unknown fields are rejected and missing required fields are reported by
//! name. Every tolerance can be overridden from the environment through
//! `KREIN_TOL_<FIELD>` (upper case), e.g. `KREIN_TOL_HEADLINE=5e-4`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::ExpansionSpec;
use crate::gl::{
    fit_tail, make_cubic_model, EdgeThresholds, KinkPotential, NonlinearityModel, Potential,
    SampledPotential,
};
use crate::grid::GridSpec;
use crate::spectral::EDGE_MARGIN;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOLERANCE_ENV_PREFIX: &str = "KREIN_TOL_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub model: ModelConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub noncommute: NoncommuteConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKindConfig {
    Cubic,
    CustomSampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKindConfig,
    /// Vacuum; fixed to 1 for the cubic model.
    #[serde(default)]
    pub a: Option<f64>,
    /// Mass squared; fixed to 2 for the cubic model, required for sampled potentials.
    #[serde(default)]
    pub m2: Option<f64>,
    /// Kink velocity (used by `kink` and `bands`).
    #[serde(default)]
    pub v: f64,
    /// CSV file with columns `x,value`, relative to the config file.
    #[serde(default)]
    pub potential_path: Option<PathBuf>,
    /// Declared exponential decay rate of a sampled potential.
    #[serde(default)]
    pub decay_rate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub edge_margin: f64,
    /// Frequencies for `modes` and the two-route check.
    pub omegas: Vec<f64>,
    /// Weight exponent of `L²₋ₛ`.
    pub weight_s: f64,
    pub expansion: ExpansionSpec,
    pub delta_check: DeltaCheckConfig,
    /// Uniform sweep `[lo, hi]` with `count` points for the phase-shift curve.
    pub phase_sweep: (f64, f64, usize),
    pub edge: EdgeThresholds,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            edge_margin: EDGE_MARGIN,
            omegas: vec![1.6, 2.0, 3.0, 5.0],
            weight_s: 1.5,
            expansion: ExpansionSpec::default(),
            delta_check: DeltaCheckConfig::default(),
            phase_sweep: (1.5, 10.0, 86),
            edge: EdgeThresholds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeltaCheckConfig {
    pub sigma: f64,
    pub spacing: f64,
    pub centers: Vec<f64>,
    /// Grid for the smeared checks. A packet of width `σ` spreads over
    /// `x ≲ c/σ`, so the box must be several times `1/σ` long.
    pub grid: GridConfig,
}

impl Default for DeltaCheckConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            spacing: 0.005,
            centers: vec![2.0, 2.5, 3.0],
            grid: GridConfig {
                length: 160.0,
                n: 15999,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `ψ0 = amplitude·x·e^{−x²/(2w²)}`, `ψ̇0 = 0`.
    GaussianDerivative { width: f64, amplitude: f64 },
    /// `ψ0 = 0`, `ψ̇0 = amplitude·x·e^{−x²/(2w²)}`.
    GaussianVelocity { width: f64, amplitude: f64 },
}

impl GridConfig {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.length, self.n)
    }
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::GaussianDerivative {
            width: 1.0,
            amplitude: 1.0,
        }
    }
}

impl InitialData {
    /// `(ψ0(x), ψ̇0(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            InitialData::GaussianDerivative { width, amplitude } => {
                (amplitude * x * (-x * x / (2.0 * width * width)).exp(), 0.0)
            }
            InitialData::GaussianVelocity { width, amplitude } => {
                (0.0, amplitude * x * (-x * x / (2.0 * width * width)).exp())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let (InitialData::GaussianDerivative { width, amplitude }
        | InitialData::GaussianVelocity { width, amplitude }) = *self;
        if !(width > 0.0) || !amplitude.is_finite() {
            return Err(Error::Config(format!(
                "evolve.initial: width must be positive and amplitude finite (width = {width}, amplitude = {amplitude})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub time_samples: usize,
    pub initial: InitialData,
    pub truncation_ladder: Vec<f64>,
    /// Time at which the truncation ladder is evaluated.
    pub truncation_time: f64,
    /// Optional second oracle step.
    pub leapfrog_dt: Option<f64>,
    /// Every `output_stride`-th grid point is written to the trajectory CSVs.
    pub output_stride: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end: 20.0,
            time_samples: 41,
            initial: InitialData::default(),
            truncation_ladder: vec![5.0, 10.0, 20.0, 40.0],
            truncation_time: 10.0,
            leapfrog_dt: None,
            output_stride: 10,
        }
    }
}

/// Pass thresholds; defaults are the acceptance tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub structure: f64,
    pub hermitian: f64,
    pub energy_conservation: f64,
    pub similarity: f64,
    pub group: f64,
    pub real_residue: f64,
    pub simpson_ratio: f64,
    pub kink_residual: f64,
    pub lambda1: f64,
    pub omega1: f64,
    pub two_route: f64,
    pub delta_diagonal: f64,
    pub delta_off_diagonal: f64,
    pub eigen_residual: f64,
    pub headline: f64,
    pub parseval: f64,
    pub bessel: f64,
    pub energy_drift: f64,
    pub truncation_noise: f64,
    pub pairing_diagonal: f64,
    pub pairing_cross: f64,
    pub discrete_cross: f64,
    pub band_endpoint: f64,
    pub kernel: f64,
    pub commutator_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structure: 1e-10,
            hermitian: 1e-12,
            energy_conservation: 1e-10,
            similarity: 1e-12,
            group: 1e-10,
            real_residue: 1e-12,
            simpson_ratio: 0.2,
            kink_residual: 1e-8,
            lambda1: 1e-4,
            omega1: 5e-5,
            two_route: 1e-6,
            delta_diagonal: 0.02,
            delta_off_diagonal: 1e-3,
            eigen_residual: 1e-6,
            headline: 1e-3,
            parseval: 1e-3,
            bessel: 1e-6,
            energy_drift: 1e-6,
            truncation_noise: 1e-8,
            pairing_diagonal: 1e-3,
            pairing_cross: 1e-3,
            discrete_cross: 1e-6,
            band_endpoint: 1e-12,
            kernel: 1e-6,
            commutator_min: 0.1,
        }
    }
}

impl Tolerances {
    /// Applies `KREIN_TOL_<FIELD>` overrides from `lookup` (normally the process
    /// environment).
    pub fn with_overrides(&self, lookup: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let serde_json::Value::Object(mut map) = serde_json::to_value(self)? else {
            unreachable!("tolerances serialize to an object");
        };
        for (key, value) in map.iter_mut() {
            let var = format!("{TOLERANCE_ENV_PREFIX}{}", key.to_uppercase());
            if let Some(raw) = lookup(&var) {
                let parsed: f64 = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{var} = {raw:?} is not a number")))?;
                if !(parsed > 0.0) {
                    return Err(Error::Config(format!(
                        "{var} must be positive, got {parsed}"
                    )));
                }
                *value = serde_json::json!(parsed);
            }
        }
        Ok(serde_json::from_value(serde_json::Value::Object(map))?)
    }

    pub fn from_env(&self) -> Result<Self> {
        self.with_overrides(|k| std::env::var(k).ok())
    }

    fn validate(&self) -> Result<()> {
        let serde_json::Value::Object(map) = serde_json::to_value(self)? else {
            unreachable!();
        };
        for (key, value) in map {
            if !(value.as_f64().unwrap_or(f64::NAN) > 0.0) {
                return Err(Error::Config(format!("tolerances.{key} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsConfig {
    /// `(v, m²)` pairs whose band tables are emitted.
    pub pairs: Vec<(f64, f64)>,
    /// Random pairs checked for `floor = min(1 − v², m²)`.
    pub random_pairs: usize,
    /// Velocities for the grid positivity check of the odd-sector `B_v`.
    pub positivity_v: Vec<f64>,
    /// Grid for the dense `B_v` positivity check (the block matrix is `2N × 2N`).
    pub positivity_grid: GridConfig,
    /// Velocity for the kernel-vector check (full-line grid).
    pub kernel_v: f64,
    /// Grid for the kernel-vector check; its residual is `O(h²)`.
    pub kernel_grid: GridConfig,
}

impl Default for BandsConfig {
    fn default() -> Self {
        Self {
            pairs: vec![(0.5, 2.0), (0.5, 0.5), (0.5, 0.9)],
            random_pairs: 1000,
            positivity_v: vec![0.1, 0.3, 0.6],
            positivity_grid: GridConfig {
                length: 20.0,
                n: 399,
            },
            kernel_v: 0.3,
            kernel_grid: GridConfig {
                length: 20.0,
                n: 15999,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoncommuteConfig {
    /// Grid for the NLS linearization (`n` interior points on `(0, length)`).
    pub n: usize,
    pub length: f64,
    pub couplings: Vec<f64>,
    /// Width of the Gaussian `s0 = e^{−x²/(2w²)}` (centred mid-grid).
    pub width: f64,
}

impl Default for NoncommuteConfig {
    fn default() -> Self {
        Self {
            n: 32,
            length: 8.0,
            couplings: vec![0.0, 1.0],
            width: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub random_systems: usize,
    pub max_dim: usize,
    /// Multiplies every continuum mode before the normalization checks (fault injection).
    pub inject_normalization_scale: Option<f64>,
    /// Grid for the eigen-residual check (the residual is `O(h²)` against the grid `A`).
    pub residual_grid: Option<GridConfig>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            random_systems: 200,
            max_dim: 64,
            inject_normalization_scale: None,
            residual_grid: None,
        }
    }
}

/// The potential a run works with: a kink linearization or a sampled potential.
#[derive(Clone, Debug)]
pub enum Setup {
    Kink {
        model: NonlinearityModel,
        potential: Box<KinkPotential>,
    },
    Sampled {
        m2: f64,
        potential: SampledPotential,
    },
}

impl Setup {
    pub fn potential(&self) -> &dyn Potential {
        match self {
            Setup::Kink { potential, .. } => potential.as_ref(),
            Setup::Sampled { potential, .. } => potential,
        }
    }

    pub fn m2(&self) -> f64 {
        match self {
            Setup::Kink { model, .. } => model.m2(),
            Setup::Sampled { m2, .. } => *m2,
        }
    }

    pub fn model(&self) -> Option<&NonlinearityModel> {
        match self {
            Setup::Kink { model, .. } => Some(model),
            Setup::Sampled { .. } => None,
        }
    }
}

/// A loaded configuration together with its resolved grid and the directory
/// relative paths are resolved against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub grid: GridSpec,
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("schema error: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        config.tolerances = config.tolerances.from_env()?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let grid = config.validate()?;
        Ok(LoadedConfig {
            config,
            grid,
            base_dir,
        })
    }

    /// Schema-level checks plus the grid resolution guard; returns the grid.
    pub fn validate(&self) -> Result<GridSpec> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let grid = GridSpec::new(self.grid.length, self.grid.n)?;
        let m2 = match self.model.kind {
            ModelKindConfig::Cubic => {
                if self.model.a.is_some_and(|a| a != 1.0) || self.model.m2.is_some_and(|m| m != 2.0)
                {
                    return Err(Error::Config(
                        "model: the cubic model has a = 1 and m2 = 2".into(),
                    ));
                }
                2.0
            }
            ModelKindConfig::CustomSampled => {
                let m2 = self.model.m2.ok_or_else(|| {
                    Error::Config("model.m2 is required for kind = custom-sampled".into())
                })?;
                if self.model.potential_path.is_none() {
                    return Err(Error::Config(
                        "model.potential_path is required for kind = custom-sampled".into(),
                    ));
                }
                if self.model.decay_rate.is_none() {
                    return Err(Error::Config(
                        "model.decay_rate is required for kind = custom-sampled".into(),
                    ));
                }
                m2
            }
        };
        if !(self.model.v.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "model.v must satisfy |v| < 1, got {}",
                self.model.v
            )));
        }
        grid.check_resolution(m2)?;
        self.spectral
            .delta_check
            .grid
            .spec()?
            .check_resolution(m2)?;
        if !(self.spectral.edge_margin >= 0.0) || !(self.spectral.weight_s > 1.0) {
            return Err(Error::Config(
                "spectral: edge_margin must be ≥ 0 and weight_s > 1".into(),
            ));
        }
        if self.evolve.time_samples == 0
            || !(self.evolve.t_end >= 0.0)
            || self.evolve.output_stride == 0
        {
            return Err(Error::Config(
                "evolve: need t_end ≥ 0, time_samples ≥ 1 and output_stride ≥ 1".into(),
            ));
        }
        self.evolve.initial.validate()?;
        self.tolerances.validate()?;
        Ok(grid)
    }
}

impl LoadedConfig {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Builds the potential (at `v = 0`) and applies the tail guard with the
    /// fitted or declared decay rate.
    pub fn setup(&self) -> Result<Setup> {
        self.setup_on(&self.grid)
    }

    pub fn setup_on(&self, grid: &GridSpec) -> Result<Setup> {
        let m = &self.config.model;
        match m.kind {
            ModelKindConfig::Cubic => {
                let model = make_cubic_model();
                let kink = crate::gl::kink_profile(&model, 0.0, grid)?;
                let potential = KinkPotential::new(&model, kink);
                // Fall back to the sech² rate √2 if the fit fails.
                let fit = fit_tail(&potential, grid.length());
                grid.check_tail(fit.kappa.unwrap_or(2f64.sqrt()))?;
                Ok(Setup::Kink {
                    model,
                    potential: Box::new(potential),
                })
            }
            ModelKindConfig::CustomSampled => {
                let path = self.resolve(m.potential_path.as_deref().expect("validated"));
                let (xs, values) = crate::io::read_potential_csv(&path)?;
                let kappa = m.decay_rate.expect("validated");
                grid.check_tail(kappa)?;
                Ok(Setup::Sampled {
                    m2: m.m2.expect("validated"),
                    potential: SampledPotential::new(xs, values, kappa)?,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"model": {"kind": "cubic"}, "grid": {"L": 30, "N": 1499}}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.schema_version, SCHEMA_VERSION);
        assert_eq!(cfg.evolve.truncation_ladder, vec![5.0, 10.0, 20.0, 40.0]);
        assert_eq!(cfg.tolerances.headline, 1e-3);
        cfg.validate().unwrap();
    }

    #[test]
    fn missing_field_is_named() {
        let err = RunConfig::from_json(r#"{"model": {"kind": "cubic"}}"#).unwrap_err();
        assert!(err.to_string().contains("missing field `grid`"), "{err}");
        let err = RunConfig::from_json("{}").unwrap_err();
        assert!(err.to_string().contains("missing field"), "{err}");
        let err =
            RunConfig::from_json(r#"{"model": {"kind": "cubic"}, "grid": {"L": 30}}"#).unwrap_err();
        assert!(err.to_string().contains("`N`"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = RunConfig::from_json(
            r#"{"model": {"kind": "cubic"}, "grid": {"L": 30, "N": 1499}, "gird": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("gird"), "{err}");
    }

    #[test]
    fn guards_are_enforced_at_load() {
        let coarse =
            RunConfig::from_json(r#"{"model": {"kind": "cubic"}, "grid": {"L": 30, "N": 99}}"#)
                .unwrap();
        assert!(matches!(coarse.validate(), Err(Error::Grid(_))));
        let mut fast = RunConfig::from_json(MINIMAL).unwrap();
        fast.model.v = 1.0;
        assert!(matches!(fast.validate(), Err(Error::Domain(_))));
        fast.model.v = 0.99;
        assert!(fast.validate().is_ok());
    }

    #[test]
    fn environment_overrides_tolerances() {
        let tol = Tolerances::default()
            .with_overrides(|k| (k == "KREIN_TOL_HEADLINE").then(|| "5e-4".to_string()))
            .unwrap();
        assert_eq!(tol.headline, 5e-4);
        assert_eq!(tol.lambda1, 1e-4);
        assert!(Tolerances::default()
            .with_overrides(|k| (k == "KREIN_TOL_BESSEL").then(|| "abc".to_string()))
            .is_err());
    }
}
