//! TOML run configuration.
//!
//! ```toml
//! [gas]
//! gamma = 2.0
//! mu = 1.0
//!
//! [states]
//! v_minus = 1.0
//! u_minus = 0.5
//! v_plus = 1.1
//!
//! [exponents]          # optional; selects the scaled perturbation family
//! l = 0.0
//! alpha = 0.2
//! kappa = 0.205
//! h = 0.3
//! delta = 0.1
//!
//! [perturbation]       # optional
//! kind = "family"      # none | family | file
//! beta = 7.9           # default delta^(-1 + beta_eps)
//!
//! [grid]
//! L = "auto"           # or a number
//! N = 4000
//! cfl = 0.4
//!
//! [run]
//! t_end = 137.0
//! snapshot_cadence = 0.685
//! seed = 0
//!
//! [output]
//! directory = "out"
//! formats = ["csv", "json"]
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DiagnosticsOptions, StabilityOptions};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentSpec, PerturbationSpec};
use crate::gas::GasParams;
use crate::perturbation::{random_template, AssemblyOptions, ExponentSet, SigmaOptions, Template};
use crate::profile::ProfileOptions;
use crate::solver::{DriftScheme, SolverOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatesSection {
    pub v_minus: f64,
    pub u_minus: f64,
    pub v_plus: f64,
    /// Only read by `classify`; runs close the jump relations instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_plus: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    None,
    Family,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSection {
    /// Defaults to `family` when `[exponents]` is present, else `none`.
    pub kind: Option<PerturbationKind>,
    pub beta: Option<f64>,
    pub beta_eps: Option<f64>,
    pub f: Option<Template>,
    pub g: Option<Template>,
    /// When set, `f` and `g` are random windowed Fourier series drawn from `run.seed`.
    pub random_modes: Option<usize>,
    /// Initial-data CSV for `kind = "file"`, relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Value(f64),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoKeyword {
    Auto,
}

impl Default for LengthSpec {
    fn default() -> Self {
        LengthSpec::Keyword(AutoKeyword::Auto)
    }
}

fn default_cfl() -> f64 {
    0.4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L", default)]
    pub length: LengthSpec,
    #[serde(rename = "N")]
    pub cells: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub snapshot_cadence: f64,
    #[serde(default)]
    pub seed: u64,
    pub wall_clock_seconds: Option<f64>,
    pub drift: Option<DriftScheme>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    /// Snapshot CSVs and diagnostics.csv.
    Csv,
    /// report.json.
    Json,
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: default_directory(), formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gas: GasSection,
    pub states: StatesSection,
    pub exponents: Option<ExponentSet>,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    pub grid: GridSection,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Shape parameters of random templates; `f` and `g` use seeds `seed` and `seed + 1`.
const RANDOM_CENTER: f64 = 5.0;
const RANDOM_HALF_WIDTH: f64 = 4.0;
const RANDOM_POINTS: usize = 256;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| config_err(e.to_string()))
    }

    /// Reads and parses a config file, returning it with its raw bytes.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>)> {
        let bytes = std::fs::read(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Ok((Self::from_toml_str(text)?, bytes))
    }

    pub fn gas_params(&self) -> Result<GasParams> {
        GasParams::new(self.gas.gamma, self.gas.mu).map_err(|e| config_err(e.to_string()))
    }

    pub fn perturbation_kind(&self) -> PerturbationKind {
        self.perturbation.kind.unwrap_or(if self.exponents.is_some() {
            PerturbationKind::Family
        } else {
            PerturbationKind::None
        })
    }

    /// Static checks that need no profile: positivity, ordering, exponents and
    /// numeric ranges.
    pub fn validate(&self) -> Result<()> {
        let g = self.gas_params()?;
        let s = &self.states;
        if !(s.v_minus > 0.0) || !(s.v_plus > 0.0) {
            return Err(config_err("states: v_minus and v_plus must be positive"));
        }
        if !(s.u_minus > 0.0) {
            return Err(config_err(format!("states: inflow requires u_minus > 0, got {}", s.u_minus)));
        }
        if let Some(e) = &self.exponents {
            let report = crate::perturbation::check_exponents(e, &g);
            if !report.valid {
                let names: Vec<&str> = report.failures().map(|c| c.name).collect();
                return Err(config_err(format!("exponents violate: {}", names.join("; "))));
            }
        }
        if self.perturbation_kind() == PerturbationKind::Family && self.exponents.is_none() {
            return Err(config_err("perturbation kind 'family' needs an [exponents] table"));
        }
        if self.perturbation_kind() == PerturbationKind::File && self.perturbation.file.is_none() {
            return Err(config_err("perturbation kind 'file' needs perturbation.file"));
        }
        if let Some(b) = self.perturbation.beta {
            if !(b > 0.0) {
                return Err(config_err(format!("perturbation.beta must be positive, got {b}")));
            }
        }
        if let LengthSpec::Value(l) = self.grid.length {
            if !(l > 0.0) {
                return Err(config_err(format!("grid.L must be positive, got {l}")));
            }
        }
        if self.grid.cells < 4 {
            return Err(config_err(format!("grid.N must be at least 4, got {}", self.grid.cells)));
        }
        if !(self.grid.cfl > 0.0 && self.grid.cfl <= 1.0) {
            return Err(config_err(format!("grid.cfl must lie in (0, 1], got {}", self.grid.cfl)));
        }
        if !(self.run.t_end >= 0.0) || !self.run.t_end.is_finite() {
            return Err(config_err(format!("run.t_end must be non-negative, got {}", self.run.t_end)));
        }
        if !(self.run.snapshot_cadence > 0.0) {
            return Err(config_err("run.snapshot_cadence must be positive"));
        }
        if let Some(w) = self.run.wall_clock_seconds {
            if !(w > 0.0) {
                return Err(config_err("run.wall_clock_seconds must be positive"));
            }
        }
        Ok(())
    }

    /// Templates for the family: explicit, random from the seed, or the defaults.
    pub fn templates(&self) -> Result<(Template, Template)> {
        if let Some(modes) = self.perturbation.random_modes {
            let amp = |t: &Option<Template>, d: f64| match t {
                Some(Template::Bump { amplitude, .. }) => *amplitude,
                _ => d,
            };
            let f = random_template(self.run.seed, modes, amp(&self.perturbation.f, 0.3), RANDOM_CENTER, RANDOM_HALF_WIDTH, RANDOM_POINTS)
                .map_err(|e| config_err(e.to_string()))?;
            let g = random_template(
                self.run.seed.wrapping_add(1),
                modes,
                amp(&self.perturbation.g, 0.2),
                RANDOM_CENTER,
                RANDOM_HALF_WIDTH,
                RANDOM_POINTS,
            )
            .map_err(|e| config_err(e.to_string()))?;
            return Ok((f, g));
        }
        Ok((
            self.perturbation.f.clone().unwrap_or_else(Template::default_f),
            self.perturbation.g.clone().unwrap_or_else(Template::default_g),
        ))
    }

    /// Translates the config into an [`ExperimentSpec`]. Relative data paths
    /// resolve against `base_dir`.
    pub fn experiment_spec(&self, base_dir: &Path) -> Result<ExperimentSpec> {
        self.validate()?;
        let gas = self.gas_params()?;
        let perturbation = match self.perturbation_kind() {
            PerturbationKind::None => PerturbationSpec::None,
            PerturbationKind::Family => {
                let (f, g) = self.templates()?;
                PerturbationSpec::Family { f, g, exponents: self.exponents.expect("validated") }
            }
            PerturbationKind::File => {
                let rel = self.perturbation.file.as_ref().expect("validated");
                let path = base_dir.join(rel);
                let data = crate::io::read_initial_csv(&path)
                    .map_err(|e| config_err(format!("cannot load initial data {}: {e}", path.display())))?;
                PerturbationSpec::Initial { v0: data.v0, u0: data.u0 }
            }
        };
        let solver = SolverOptions {
            cfl: self.grid.cfl,
            drift: self.run.drift.unwrap_or(DriftScheme::Centered),
            wall_clock_budget: self.run.wall_clock_seconds.map(Duration::from_secs_f64),
            ..SolverOptions::default()
        };
        Ok(ExperimentSpec {
            gas,
            v_minus: self.states.v_minus,
            u_minus: self.states.u_minus,
            v_plus: self.states.v_plus,
            perturbation,
            beta: self.perturbation.beta,
            beta_eps: self.perturbation.beta_eps.unwrap_or(0.1),
            length: match self.grid.length {
                LengthSpec::Value(l) => Some(l),
                LengthSpec::Keyword(AutoKeyword::Auto) => None,
            },
            cells: self.grid.cells,
            t_end: self.run.t_end,
            snapshot_cadence: self.run.snapshot_cadence,
            min_points_per_feature: 8.0,
            profile: ProfileOptions::default(),
            assembly: AssemblyOptions::default(),
            sigma: SigmaOptions::default(),
            solver,
            diagnostics: DiagnosticsOptions::default(),
            stability: StabilityOptions::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STANDARD: &str = r#"
        [gas]
        gamma = 2.0
        mu = 1.0
        [states]
        v_minus = 1.0
        u_minus = 0.5
        v_plus = 2.0
        [perturbation]
        beta = 5.0
        [grid]
        L = 40.0
        N = 400
        [run]
        t_end = 1.0
        snapshot_cadence = 0.1
    "#;

    #[test]
    fn parses_standard_config_with_defaults() {
        let c = RunConfig::from_toml_str(STANDARD).unwrap();
        c.validate().unwrap();
        assert_eq!(c.grid.cfl, 0.4);
        assert_eq!(c.perturbation_kind(), PerturbationKind::None);
        assert_eq!(c.output.formats, vec![OutputFormat::Csv, OutputFormat::Json]);
        let spec = c.experiment_spec(Path::new(".")).unwrap();
        assert_eq!(spec.length, Some(40.0));
        assert_eq!(spec.beta, Some(5.0));
    }

    #[test]
    fn auto_length_and_family_kind() {
        let text = STANDARD.replace("L = 40.0", "L = \"auto\"").replace("v_plus = 2.0", "v_plus = 1.1")
            + "[exponents]\nl = 0.0\nalpha = 0.2\nkappa = 0.205\nh = 0.3\ndelta = 0.1\n";
        let c = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.grid.length, LengthSpec::Keyword(AutoKeyword::Auto));
        assert_eq!(c.perturbation_kind(), PerturbationKind::Family);
        let spec = c.experiment_spec(Path::new(".")).unwrap();
        assert!(spec.length.is_none());
        assert!(matches!(spec.perturbation, PerturbationSpec::Family { .. }));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::from_toml_str(STANDARD).unwrap();
        let again = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn rejects_invalid_configs() {
        let bad = |from: &str, to: &str| {
            let c = RunConfig::from_toml_str(&STANDARD.replace(from, to));
            match c {
                Err(e) => e,
                Ok(c) => c.validate().unwrap_err(),
            }
        };
        for (from, to) in [
            ("u_minus = 0.5", "u_minus = -0.5"),
            ("gamma = 2.0", "gamma = 0.5"),
            ("N = 400", "N = 2"),
            ("t_end = 1.0", "t_end = -1.0"),
            ("mu = 1.0", "mu = 1.0\nextra = 3"),
            ("[grid]", "[grid]\ncfl = 2.0"),
        ] {
            assert!(matches!(bad(from, to), Error::Config(_)), "{to}");
        }
        let with_bad_exponents = STANDARD.to_string() + "[exponents]\nl = 0.0\nalpha = 1.0\nkappa = 1.5\nh = 1.0\ndelta = 0.1\n";
        assert!(matches!(RunConfig::from_toml_str(&with_bad_exponents).unwrap().validate(), Err(Error::Config(_))));
        let family_without_exponents = STANDARD.replace("beta = 5.0", "kind = \"family\"");
        assert!(RunConfig::from_toml_str(&family_without_exponents).unwrap().validate().is_err());
    }

    #[test]
    fn random_templates_follow_the_seed() {
        let text = STANDARD.replace("beta = 5.0", "random_modes = 3");
        let a = RunConfig::from_toml_str(&text).unwrap();
        let b = RunConfig::from_toml_str(&text.replace("snapshot_cadence = 0.1", "snapshot_cadence = 0.1\nseed = 9")).unwrap();
        assert_eq!(a.templates().unwrap(), a.templates().unwrap());
        assert_ne!(a.templates().unwrap(), b.templates().unwrap());
    }
}
