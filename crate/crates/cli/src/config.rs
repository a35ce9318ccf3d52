//! Declarative experiment configuration: TOML schema, field-path
//! diagnostics, and builders into the core domain types.

use serde::{Deserialize, Serialize};
use sojourn_core::{
    DispersionRelation, Extrapolation, FriedrichsModel, Grid, LocalizationFunction, Profile,
    RankOnePotential, SojournConfig, WaveFunction,
};

/// A configuration problem, reported with the path of the offending field.
#[derive(Debug, Clone)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn at(path: &str, message: impl ToString) -> Self {
        SchemaError {
            path: path.to_string(),
            message: message.to_string(),
        }
    }
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    LocalizationProperties,
    IntegralFormula,
    FriedrichsTimeDelay,
    StationaryTrace,
    WaveOperatorDecay,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LocalizationProperties => "localization_properties",
            Experiment::IntegralFormula => "integral_formula",
            Experiment::FriedrichsTimeDelay => "friedrichs_time_delay",
            Experiment::StationaryTrace => "stationary_trace",
            Experiment::WaveOperatorDecay => "wave_operator_decay",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, SchemaError> {
        Grid::new(self.n_points, self.x_min, self.x_max).map_err(|e| SchemaError::at("grid", e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Lorentzian,
    Hermite { k: usize },
    Cusp { s: f64 },
    GaussianNode { a: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub coupling: f64,
    #[serde(flatten)]
    pub profile: ProfileSpec,
}

impl PotentialSpec {
    fn build(&self, path: &str) -> Result<RankOnePotential, SchemaError> {
        let profile = match &self.profile {
            ProfileSpec::Lorentzian => Profile::lorentzian(),
            ProfileSpec::Hermite { k } => Profile::hermite(*k),
            ProfileSpec::Cusp { s } => Profile::cusp(*s).map_err(|e| SchemaError::at(path, e))?,
            ProfileSpec::GaussianNode { a } => Profile::gaussian_node(*a),
        };
        Ok(RankOnePotential::new(self.coupling, profile))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub center: f64,
    pub width: f64,
    pub momentum: f64,
}

impl StateSpec {
    pub fn build(&self, grid: Grid) -> Result<WaveFunction, SchemaError> {
        if !(self.width > 0.0) {
            return Err(SchemaError::at("state.width", "must be positive"));
        }
        Ok(WaveFunction::gaussian(grid, self.center, self.momentum, self.width).normalized())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LocalizationSpec {
    PlateauBump { plateau_radius: f64, decay_scale: f64 },
    Characteristic { intervals: Vec<(f64, f64)> },
}

impl LocalizationSpec {
    pub fn build(&self, dim: usize) -> Result<LocalizationFunction, SchemaError> {
        match self {
            LocalizationSpec::PlateauBump {
                plateau_radius,
                decay_scale,
            } => LocalizationFunction::make_plateau_bump(dim, *plateau_radius, *decay_scale)
                .map_err(|e| SchemaError::at("localization", e)),
            LocalizationSpec::Characteristic { intervals } => {
                if dim != 1 {
                    return Err(SchemaError::at(
                        "localization.kind",
                        "characteristic localization is one-dimensional",
                    ));
                }
                LocalizationFunction::make_characteristic(intervals)
                    .map_err(|e| SchemaError::at("localization.intervals", e))
            }
        }
    }
}

fn default_t_cutoff_factor() -> f64 {
    8.0
}

fn default_dt() -> f64 {
    0.01
}

fn default_quad_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationSpec {
    None,
    Richardson,
    #[default]
    PowerFit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SojournSpec {
    pub r_schedule: Vec<f64>,
    #[serde(default = "default_t_cutoff_factor")]
    pub t_cutoff_factor: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default)]
    pub extrapolation: ExtrapolationSpec,
}

impl SojournSpec {
    pub fn build(&self) -> Result<SojournConfig, SchemaError> {
        let cfg = SojournConfig {
            r_schedule: self.r_schedule.clone(),
            t_cutoff_factor: self.t_cutoff_factor,
            dt: self.dt,
            quad_tol: self.quad_tol,
            extrapolation: match self.extrapolation {
                ExtrapolationSpec::None => Extrapolation::None,
                ExtrapolationSpec::Richardson => Extrapolation::Richardson,
                ExtrapolationSpec::PowerFit => Extrapolation::PowerFit,
            },
        };
        cfg.validate().map_err(|e| SchemaError::at("sojourn", e))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropertiesSpec {
    pub samples: usize,
    pub max_dim: usize,
    pub quad_tol: f64,
}

impl Default for PropertiesSpec {
    fn default() -> Self {
        PropertiesSpec {
            samples: 100,
            max_dim: 3,
            quad_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub derivative_step: f64,
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec {
            x_min: -10.0,
            x_max: 10.0,
            n_points: 201,
            derivative_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_samples: usize,
}

impl Default for DecaySpec {
    fn default() -> Self {
        DecaySpec {
            tau_min: 3.0,
            tau_max: 30.0,
            n_samples: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: String,
    pub json: String,
    pub svg: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: "results.csv".into(),
            json: "summary.json".into(),
            svg: "convergence.svg".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub dispersion: Option<String>,
    #[serde(default)]
    pub model: Vec<PotentialSpec>,
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub localization: Option<LocalizationSpec>,
    #[serde(default)]
    pub sojourn: Option<SojournSpec>,
    #[serde(default)]
    pub properties: PropertiesSpec,
    #[serde(default)]
    pub trace: TraceSpec,
    #[serde(default)]
    pub decay: DecaySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Parses a TOML document, reporting deserialization failures with the
/// path of the offending field.
pub fn parse(text: &str) -> Result<ExperimentConfig, SchemaError> {
    let value: toml::Value = toml::from_str(text)
        .map_err(|e| SchemaError::at("<document>", e.to_string().replace('\n', " ")))?;
    serde_path_to_error::deserialize(value).map_err(|e: serde_path_to_error::Error<toml::de::Error>| {
        SchemaError {
            path: e.path().to_string(),
            message: e.inner().to_string().replace('\n', " "),
        }
    })
}

impl ExperimentConfig {
    /// The normalized echo: all defaults made explicit, suitable for
    /// hashing and for self-documenting runs.
    pub fn normalized(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Grid, SchemaError> {
        self.grid
            .as_ref()
            .ok_or_else(|| SchemaError::at("grid", "required for this experiment"))?
            .build()
    }

    pub fn dispersion(&self) -> Result<Option<DispersionRelation>, SchemaError> {
        match &self.dispersion {
            None => Ok(None),
            Some(name) => DispersionRelation::builtin(name)
                .map(Some)
                .map_err(|e| SchemaError::at("dispersion", e)),
        }
    }

    pub fn model(&self, grid: &Grid) -> Result<FriedrichsModel, SchemaError> {
        let mut potentials = Vec::with_capacity(self.model.len());
        for (i, spec) in self.model.iter().enumerate() {
            potentials.push(spec.build(&format!("model[{i}]"))?);
        }
        FriedrichsModel::new(potentials, grid).map_err(|e| SchemaError::at("model", e))
    }

    pub fn state(&self, grid: Grid) -> Result<WaveFunction, SchemaError> {
        self.state
            .as_ref()
            .ok_or_else(|| SchemaError::at("state", "required for this experiment"))?
            .build(grid)
    }

    pub fn localization(&self, dim: usize) -> Result<LocalizationFunction, SchemaError> {
        self.localization
            .as_ref()
            .ok_or_else(|| SchemaError::at("localization", "required for this experiment"))?
            .build(dim)
    }

    pub fn sojourn(&self) -> Result<SojournConfig, SchemaError> {
        self.sojourn
            .as_ref()
            .ok_or_else(|| SchemaError::at("sojourn", "required for this experiment"))?
            .build()
    }

    /// Schema and cross-field checks, without running anything.
    pub fn validate(&self) -> Result<(), SchemaError> {
        match self.experiment {
            Experiment::LocalizationProperties => {
                let f = self.localization(1)?;
                if !f.is_smooth {
                    return Err(SchemaError::at(
                        "localization.kind",
                        "localization_properties differentiates f; use plateau_bump",
                    ));
                }
                check_integrable(&f)?;
                if self.properties.samples == 0 || self.properties.max_dim == 0 {
                    return Err(SchemaError::at(
                        "properties",
                        "samples and max_dim must be positive",
                    ));
                }
            }
            Experiment::IntegralFormula => {
                let grid = self.grid()?;
                self.state(grid)?;
                let f = self.localization(1)?;
                check_integrable(&f)?;
                self.sojourn()?;
                if let Some(h) = self.dispersion()? {
                    if h.linear_velocity().is_none() && !f.is_smooth {
                        return Err(SchemaError::at(
                            "localization.kind",
                            "time quadrature for a nonlinear symbol needs a smooth f; \
                             use plateau_bump",
                        ));
                    }
                    self.check_momentum_window(&h)?;
                }
            }
            Experiment::FriedrichsTimeDelay => {
                let grid = self.grid()?;
                self.state(grid)?;
                let f = self.localization(1)?;
                check_integrable(&f)?;
                self.sojourn()?;
                self.model(&grid)?;
            }
            Experiment::StationaryTrace => {
                let grid = self.grid()?;
                self.model(&grid)?;
                if let Some(state) = &self.state {
                    state.build(grid)?;
                }
                if self.trace.n_points < 2 || !(self.trace.x_min < self.trace.x_max) {
                    return Err(SchemaError::at(
                        "trace",
                        "need n_points >= 2 and x_min < x_max",
                    ));
                }
                if !(self.trace.derivative_step > 0.0) {
                    return Err(SchemaError::at("trace.derivative_step", "must be positive"));
                }
            }
            Experiment::WaveOperatorDecay => {
                let grid = self.grid()?;
                self.state(grid)?;
                let model = self.model(&grid)?;
                if model.is_free() {
                    return Err(SchemaError::at(
                        "model",
                        "wave_operator_decay needs at least one rank-one potential",
                    ));
                }
                if !(0.0 < self.decay.tau_min && self.decay.tau_min < self.decay.tau_max) {
                    return Err(SchemaError::at("decay", "need 0 < tau_min < tau_max"));
                }
                if self.decay.n_samples < 4 {
                    return Err(SchemaError::at("decay.n_samples", "need at least 4 samples"));
                }
            }
        }
        Ok(())
    }

    /// The stationary-phase machinery degenerates where h′ has critical
    /// points (κ(h)); the state's momentum window must stay clear of them.
    fn check_momentum_window(&self, h: &DispersionRelation) -> Result<(), SchemaError> {
        let state = self.state.as_ref().expect("validated above");
        let margin = 2.0 / state.width;
        for &kappa in h.critical_values() {
            if (state.momentum - kappa).abs() < margin {
                return Err(SchemaError::at(
                    "state.momentum",
                    format!(
                        "momentum window [{:.3}, {:.3}] overlaps the critical point \
                         {kappa} of h′; recenter the state or widen it in position",
                        state.momentum - margin,
                        state.momentum + margin
                    ),
                ));
            }
        }
        Ok(())
    }
}

fn check_integrable(f: &LocalizationFunction) -> Result<(), SchemaError> {
    if f.rho <= 1.0 {
        return Err(SchemaError::at(
            "localization",
            format!("decay exponent rho = {} is not integrable; need rho > 1", f.rho),
        ));
    }
    Ok(())
}
