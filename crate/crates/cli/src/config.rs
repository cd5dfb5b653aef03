//! The run configuration file. Relative paths in the file resolve against
//! the file's own directory; path overrides given as flags resolve against
//! the working directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use isogep::estimate::StudyInputs;
use isogep::experiments::BindingOptions;
use isogep::model::costs::{ontario_2016_costs, TechCosts};
use isogep::solve::{SolveOptions, DEFAULT_MAX_NONZEROS, DEFAULT_TOL};
use isogep::types::{ModelFamily, ModelVariant, ShareMode, TechKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Name of the run directory created under `output_dir`.
    pub run_name: String,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub study: Option<StudyConfig>,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub binding: BindingConfig,
    #[serde(default)]
    pub build: BuildConfig,
    #[serde(default)]
    pub compare: CompareConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub demand: Option<PathBuf>,
    pub generation: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
    /// A parameter file; when set, estimation is skipped.
    pub parameters: Option<PathBuf>,
    pub reference_plan: Option<PathBuf>,
    /// Primal and dual values from an external solver, used in place of a
    /// desk solve by `duals` and `compare`.
    pub external_solution: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub reference_year: i32,
    #[serde(default)]
    pub capability_year: Option<i32>,
    #[serde(default)]
    pub variation_years: Option<(i32, i32)>,
    pub horizon_years: usize,
    pub growth_rate: f64,
    pub discount_rate: f64,
    /// Reserve fraction: one value for every year, or one per year.
    pub reserve_fraction: Vec<f64>,
    pub share_band: f64,
    #[serde(default)]
    pub share_plan: BTreeMap<TechKind, Vec<f64>>,
    #[serde(default)]
    pub existing_capacity: BTreeMap<TechKind, Vec<f64>>,
    /// Replaces the bundled cost table for the listed technologies.
    #[serde(default)]
    pub costs: BTreeMap<TechKind, TechCosts>,
}

impl StudyConfig {
    pub fn inputs(&self) -> StudyInputs {
        let mut costs = ontario_2016_costs();
        costs.extend(self.costs.iter().map(|(k, c)| (*k, *c)));
        StudyInputs {
            reference_year: self.reference_year,
            capability_year: self.capability_year,
            variation_years: self.variation_years,
            horizon_years: self.horizon_years,
            growth_rate: self.growth_rate,
            discount_rate: self.discount_rate,
            reserve_fraction: self.reserve_fraction.clone(),
            costs,
            existing_capacity: self.existing_capacity.clone(),
            share_plan: self.share_plan.clone(),
            share_band: self.share_band,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub family: ModelFamily,
    pub variation_constraints: bool,
    pub variation_costs: bool,
    pub shares: ShareMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            family: ModelFamily::IsoGep,
            variation_constraints: true,
            variation_costs: true,
            shares: ShareMode::Full,
        }
    }
}

impl ModelConfig {
    pub fn variant(&self) -> ModelVariant {
        let base = match self.family {
            ModelFamily::IsoGep => ModelVariant::full().with_variation(self.variation_constraints, self.variation_costs),
            ModelFamily::Conventional => ModelVariant::conventional(),
        };
        base.with_shares(self.shares.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_nonzeros: usize,
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            max_nonzeros: DEFAULT_MAX_NONZEROS,
            max_iterations: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            max_nonzeros: self.max_nonzeros,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BindingConfig {
    pub dual_tol: f64,
    pub slack_tol: f64,
    /// Also drop the non-binding variation rows and re-solve.
    pub drop_nonbinding: bool,
}

impl Default for BindingConfig {
    fn default() -> Self {
        let d = BindingOptions::default();
        BindingConfig {
            dual_tol: d.dual_tol,
            slack_tol: d.slack_tol,
            drop_nonbinding: false,
        }
    }
}

impl BindingConfig {
    pub fn options(&self) -> BindingOptions {
        BindingOptions {
            dual_tol: self.dual_tol,
            slack_tol: self.slack_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuildConfig {
    /// Write `model.mps` next to the size report.
    pub mps: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig { mps: true }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    /// Calendar year of planning year 1. Defaults to the year after
    /// `study.reference_year`.
    pub first_year: Option<i32>,
}

/// Path flags that replace entries of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub demand: Option<PathBuf>,
    pub generation: Option<PathBuf>,
    pub holidays: Option<PathBuf>,
    pub parameters: Option<PathBuf>,
    pub reference_plan: Option<PathBuf>,
    pub external_solution: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::MissingInput(format!("config {}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve(base);
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output_dir);
        let p = &mut self.paths;
        for slot in [
            &mut p.demand,
            &mut p.generation,
            &mut p.holidays,
            &mut p.parameters,
            &mut p.reference_plan,
            &mut p.external_solution,
        ] {
            slot.as_mut().map(join);
        }
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        let p = &mut self.paths;
        for (slot, over) in [
            (&mut p.demand, &o.demand),
            (&mut p.generation, &o.generation),
            (&mut p.holidays, &o.holidays),
            (&mut p.parameters, &o.parameters),
            (&mut p.reference_plan, &o.reference_plan),
            (&mut p.external_solution, &o.external_solution),
        ] {
            if over.is_some() {
                *slot = over.clone();
            }
        }
    }

    /// Range checks on the numeric fields. Path existence is checked per
    /// subcommand, since each needs different inputs.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.run_name.is_empty() || self.run_name.contains(['/', '\\']) || self.run_name == ".." {
            return bad(format!("run_name `{}` must be a plain directory name", self.run_name));
        }
        if let Some(s) = &self.study {
            if s.horizon_years == 0 {
                return bad("study.horizon_years must be positive".into());
            }
            if !(s.growth_rate.is_finite() && s.growth_rate > -1.0) {
                return bad(format!("study.growth_rate {} must be above -1", s.growth_rate));
            }
            if !(s.discount_rate.is_finite() && s.discount_rate >= 0.0) {
                return bad(format!("study.discount_rate {} must be non-negative", s.discount_rate));
            }
            if s.reserve_fraction.is_empty() {
                return bad("study.reserve_fraction needs at least one value".into());
            }
            if s.reserve_fraction.len() != 1 && s.reserve_fraction.len() != s.horizon_years {
                return bad(format!(
                    "study.reserve_fraction has {} values; expected 1 or {}",
                    s.reserve_fraction.len(),
                    s.horizon_years
                ));
            }
            if let Some(v) = s.reserve_fraction.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return bad(format!("study.reserve_fraction value {v} is outside [0, 1]"));
            }
            if !(0.0..=1.0).contains(&s.share_band) {
                return bad(format!("study.share_band {} is outside [0, 1]", s.share_band));
            }
            for (k, shares) in &s.share_plan {
                if let Some(v) = shares.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return bad(format!("study.share_plan.{k} value {v} is outside [0, 1]"));
                }
            }
            for (k, caps) in &s.existing_capacity {
                if let Some(v) = caps.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return bad(format!("study.existing_capacity.{k} value {v} must be a non-negative MW figure"));
                }
            }
        }
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) {
            return bad(format!("solver.tol {} must be positive", self.solver.tol));
        }
        if self.solver.max_nonzeros == 0 {
            return bad("solver.max_nonzeros must be positive".into());
        }
        for (name, v) in [("binding.dual_tol", self.binding.dual_tol), ("binding.slack_tol", self.binding.slack_tol)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} {v} must be non-negative"));
            }
        }
        if self.model.family == ModelFamily::Conventional && (self.model.variation_constraints || self.model.variation_costs) {
            return bad("the conventional family has no variation rows; set model.variation_constraints and model.variation_costs to false".into());
        }
        Ok(())
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.run_name)
    }

    /// Calendar year of planning year 1, for plan comparisons.
    pub fn first_year(&self) -> Result<i32, CliError> {
        self.compare
            .first_year
            .or_else(|| self.study.as_ref().map(|s| s.reference_year + 1))
            .ok_or_else(|| CliError::Config("compare.first_year is required without a [study] section".into()))
    }
}

/// Fails with a missing-input error unless `path` is set and exists.
pub fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    let p = path
        .as_deref()
        .ok_or_else(|| CliError::MissingInput(format!("paths.{key} is not set")))?;
    if !p.exists() {
        return Err(CliError::MissingInput(format!("paths.{key}: {} does not exist", p.display())));
    }
    Ok(p)
}
