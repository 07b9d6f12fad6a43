//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::cell_cycle::CellCycleModel;
use crate::qnd::{CMatrix, MeasurementEnsemble};
use crate::state::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub certificate: CertificateConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Qnd {
        /// `K×N` table of diagonal entries `m_k(i)`.
        #[serde(default)]
        diagonal: Option<Vec<Vec<f64>>>,
        /// `K` row-major `N×N` matrices of `[re, im]` pairs.
        #[serde(default)]
        matrices: Option<Vec<Vec<Vec<[f64; 2]>>>>,
    },
    Cell {
        alpha: f64,
        sigma: f64,
        #[serde(default)]
        beta: BetaSetting,
        #[serde(default = "default_beta_max")]
        beta_max: f64,
        #[serde(default = "default_beta_grid")]
        beta_grid: usize,
    },
}

fn default_beta_max() -> f64 {
    1.0
}

fn default_beta_grid() -> usize {
    100
}

/// Either a fixed certificate exponent or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BetaSetting {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for BetaSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            BetaSetting::Auto => s.serialize_str("auto"),
            BetaSetting::Fixed(b) => s.serialize_f64(*b),
        }
    }
}

impl<'de> Deserialize<'de> for BetaSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(BetaSetting::Fixed(b)),
            Raw::Int(b) => Ok(BetaSetting::Fixed(b as f64)),
            Raw::Text(s) if s == "auto" => Ok(BetaSetting::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("beta must be a number or \"auto\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_trajectories")]
    pub n_trajectories: usize,
    /// Defaults to the last checkpoint.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    /// Cell model only: initial sizes are uniform on this interval (default `[σ, 2σ]`).
    #[serde(default)]
    pub initial_interval: Option<[f64; 2]>,
    /// QND only: threshold `δ` of the Fock-proximity diagnostic.
    #[serde(default = "default_fock_delta")]
    pub fock_delta: f64,
}

fn default_trajectories() -> usize {
    10_000
}

fn default_checkpoints() -> Vec<usize> {
    vec![0, 50, 100, 200]
}

fn default_fock_delta() -> f64 {
    0.01
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_trajectories: default_trajectories(),
            horizon: None,
            checkpoints: default_checkpoints(),
            initial_interval: None,
            fock_delta: default_fock_delta(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    SphereMinCoordinate,
    HalfLineInterval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateConfig {
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default = "default_exclusion")]
    pub exclusion_radius: f64,
    #[serde(default = "default_floor")]
    pub margin_floor: f64,
    /// Monte Carlo samples per family member (sphere) and for the duality check.
    #[serde(default = "default_integrability_samples")]
    pub integrability_samples: usize,
    /// Cell model only: certificate points are log-uniform on `[σ, sample_upper]`.
    #[serde(default = "default_sample_upper")]
    pub sample_upper: f64,
}

fn default_points() -> usize {
    10_000
}
fn default_exclusion() -> f64 {
    1e-3
}
fn default_floor() -> f64 {
    1e-9
}
fn default_integrability_samples() -> usize {
    100_000
}
fn default_sample_upper() -> f64 {
    1000.0
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self {
            n_points: default_points(),
            exclusion_radius: default_exclusion(),
            margin_floor: default_floor(),
            integrability_samples: default_integrability_samples(),
            sample_upper: default_sample_upper(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("sweepcert-out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Json, OutputFormat::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

/// A model whose parameters passed the schema and range checks. The QND
/// ensemble is built without the completeness check so `validate` can report it.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Qnd(MeasurementEnsemble),
    Cell { model: CellCycleModel, beta: BetaSetting, beta_max: f64, beta_grid: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.check_ranges()?;
        Ok(cfg)
    }

    pub fn horizon(&self) -> usize {
        self.simulation
            .horizon
            .unwrap_or_else(|| self.simulation.checkpoints.last().copied().unwrap_or(0))
    }

    fn check_ranges(&self) -> Result<(), ConfigError> {
        let sim = &self.simulation;
        if sim.n_trajectories == 0 {
            return Err(bad("simulation.n_trajectories must be positive"));
        }
        if sim.checkpoints.is_empty() || sim.checkpoints[0] != 0 {
            return Err(bad("simulation.checkpoints must start at 0"));
        }
        if sim.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("simulation.checkpoints must be strictly increasing"));
        }
        if let Some(h) = sim.horizon {
            if h < *sim.checkpoints.last().expect("non-empty") {
                return Err(bad("simulation.horizon is below the last checkpoint"));
            }
        }
        if !(sim.fock_delta > 0.0 && sim.fock_delta <= 1.0) {
            return Err(bad("simulation.fock_delta must lie in (0, 1]"));
        }
        let c = &self.certificate;
        if c.n_points == 0 || c.integrability_samples == 0 {
            return Err(bad("certificate sample counts must be positive"));
        }
        if !(c.exclusion_radius >= 0.0 && c.exclusion_radius.is_finite()) {
            return Err(bad("certificate.exclusion_radius must be non-negative"));
        }
        if !(c.margin_floor >= 0.0 && c.margin_floor < 1.0) {
            return Err(bad("certificate.margin_floor must lie in [0, 1)"));
        }
        if self.output.formats.is_empty() {
            return Err(bad("output.formats must not be empty"));
        }

        match &self.model {
            ModelConfig::Qnd { diagonal, matrices } => {
                if diagonal.is_some() == matrices.is_some() {
                    return Err(bad("model: give exactly one of `diagonal` or `matrices`"));
                }
                if sim.initial_interval.is_some() {
                    return Err(bad("simulation.initial_interval applies to the cell model only"));
                }
            }
            ModelConfig::Cell { alpha, sigma, beta, beta_max, beta_grid } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(bad("model.alpha must be positive"));
                }
                if !(*sigma > 0.0 && *sigma <= 1.0) {
                    return Err(bad("model.sigma must lie in (0, 1]"));
                }
                if let BetaSetting::Fixed(b) = beta {
                    if !(*b > 0.0 && b.is_finite()) {
                        return Err(bad("model.beta must be positive or \"auto\""));
                    }
                }
                if !(*beta_max > 0.0 && beta_max.is_finite()) || *beta_grid == 0 {
                    return Err(bad("model.beta_max and model.beta_grid must be positive"));
                }
                if let Some([lo, hi]) = sim.initial_interval {
                    if !(lo >= *sigma && hi > lo && hi.is_finite()) {
                        return Err(bad("simulation.initial_interval must satisfy sigma <= lo < hi"));
                    }
                }
                if !(c.sample_upper > *sigma && c.sample_upper.is_finite()) {
                    return Err(bad("certificate.sample_upper must exceed sigma"));
                }
            }
        }

        if let Some(f) = &self.family {
            let expected = match self.model {
                ModelConfig::Qnd { .. } => FamilyKind::SphereMinCoordinate,
                ModelConfig::Cell { .. } => FamilyKind::HalfLineInterval,
            };
            if f.kind != expected {
                return Err(bad("family.kind does not match the model's state space"));
            }
            if f.params.is_empty() {
                return Err(bad("family.params must not be empty"));
            }
            match &self.model {
                ModelConfig::Qnd { .. } => {
                    if f.params.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                        return Err(bad("sphere family parameters must lie in (0, 1)"));
                    }
                }
                ModelConfig::Cell { sigma, .. } => {
                    if f.params.iter().any(|&a| !(a > *sigma && a.is_finite())) {
                        return Err(bad("interval family ends must be finite and exceed sigma"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Family parameters, falling back to the defaults for the model kind.
    pub fn family_params(&self) -> Vec<f64> {
        match &self.family {
            Some(f) => f.params.clone(),
            None => match self.model {
                ModelConfig::Qnd { .. } => vec![0.05, 0.1, 0.2, 0.3],
                ModelConfig::Cell { .. } => vec![1.0, 2.0, 4.0, 8.0],
            },
        }
    }

    pub fn build_model(&self) -> Result<BuiltModel, ConfigError> {
        match &self.model {
            ModelConfig::Qnd { diagonal: Some(t), .. } => MeasurementEnsemble::diagonal_unchecked(t.clone())
                .map(BuiltModel::Qnd)
                .map_err(|e| bad(format!("model: {e}"))),
            ModelConfig::Qnd { matrices: Some(ms), .. } => {
                let mut out = Vec::with_capacity(ms.len());
                for (k, rows) in ms.iter().enumerate() {
                    let n = rows.len();
                    if n == 0 || rows.iter().any(|r| r.len() != n) {
                        return Err(bad(format!("model.matrices[{k}] is not square")));
                    }
                    let entries: Vec<C64> = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
                    if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                        return Err(bad(format!("model.matrices[{k}] has non-finite entries")));
                    }
                    out.push(CMatrix::from_row_slice(n, n, &entries));
                }
                MeasurementEnsemble::general_unchecked(out)
                    .map(BuiltModel::Qnd)
                    .map_err(|e| bad(format!("model: {e}")))
            }
            ModelConfig::Qnd { .. } => Err(bad("model: missing ensemble")),
            ModelConfig::Cell { alpha, sigma, beta, beta_max, beta_grid } => {
                let b0 = match beta {
                    BetaSetting::Fixed(b) => *b,
                    BetaSetting::Auto => 0.0,
                };
                let model = CellCycleModel::new(*alpha, *sigma, b0).map_err(|e| bad(format!("model: {e}")))?;
                Ok(BuiltModel::Cell { model, beta: *beta, beta_max: *beta_max, beta_grid: *beta_grid })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QND: &str = r#"
seed = 7
[model]
kind = "qnd"
diagonal = [[0.6, 0.8], [0.8, 0.6]]
[simulation]
n_trajectories = 100
checkpoints = [0, 5, 10]
"#;

    #[test]
    fn parses_qnd() {
        let c = ExperimentConfig::from_toml(QND).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.horizon(), 10);
        assert_eq!(c.family_params(), vec![0.05, 0.1, 0.2, 0.3]);
        assert!(matches!(c.build_model().unwrap(), BuiltModel::Qnd(_)));
    }

    #[test]
    fn parses_cell_with_auto_and_fixed_beta() {
        let auto = "[model]\nkind = \"cell\"\nalpha = 1.0\nsigma = 0.5\nbeta = \"auto\"\n";
        let c = ExperimentConfig::from_toml(auto).unwrap();
        assert!(matches!(c.model, ModelConfig::Cell { beta: BetaSetting::Auto, .. }));
        let fixed = "[model]\nkind = \"cell\"\nalpha = 1.0\nsigma = 0.5\nbeta = 0.1\n";
        let c = ExperimentConfig::from_toml(fixed).unwrap();
        assert!(matches!(c.model, ModelConfig::Cell { beta: BetaSetting::Fixed(b), .. } if b == 0.1));
        let bad_beta = "[model]\nkind = \"cell\"\nalpha = 1.0\nsigma = 0.5\nbeta = \"soon\"\n";
        assert!(ExperimentConfig::from_toml(bad_beta).is_err());
    }

    #[test]
    fn parses_complex_matrices() {
        let text = r#"
[model]
kind = "qnd"
matrices = [
  [[[0.6, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.8, 0.0]]],
  [[[0.8, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.6, 0.0]]],
]
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let BuiltModel::Qnd(e) = c.build_model().unwrap() else { panic!() };
        assert!(e.completeness_residual() < 1e-12);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        assert!(ExperimentConfig::from_toml("seed = 1\n").is_err());
        assert!(ExperimentConfig::from_toml(&format!("{QND}\nbogus = 1\n")).is_err());
        let extra_model_key = QND.replace("kind = \"qnd\"", "kind = \"qnd\"\nflavour = 3");
        assert!(ExperimentConfig::from_toml(&extra_model_key).is_err());
    }

    #[test]
    fn range_checks() {
        assert!(ExperimentConfig::from_toml(&QND.replace("[0, 5, 10]", "[5, 10]")).is_err());
        assert!(ExperimentConfig::from_toml(&QND.replace("[0, 5, 10]", "[0, 10, 5]")).is_err());
        assert!(ExperimentConfig::from_toml(&QND.replace("n_trajectories = 100", "n_trajectories = 0")).is_err());
        let wrong_family = format!("{QND}\n[family]\nkind = \"half-line-interval\"\nparams = [1.0]\n");
        assert!(ExperimentConfig::from_toml(&wrong_family).is_err());
        let neg_alpha = "[model]\nkind = \"cell\"\nalpha = -1.0\nsigma = 0.5\n";
        assert!(ExperimentConfig::from_toml(neg_alpha).is_err());
    }
}
