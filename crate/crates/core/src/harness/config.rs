use crate::error::{Error, Result};
use crate::hierarchy::HierarchyStrategy;
use crate::solver::{KrylovConfig, VCycleConfig};
use crate::vanka::PatchKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub dim: usize,
    pub nu: f64,
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    /// Number of time steps; derived from the mesh size when absent.
    #[serde(rename = "N")]
    pub steps: Option<usize>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            dim: 2,
            nu: 0.1,
            t_end: None,
            steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationSection {
    pub r: usize,
    /// Temporal degree; equal to `r` when absent.
    pub k: Option<usize>,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self { r: 2, k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub base_cells: usize,
    pub refinements: usize,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            base_cells: 1,
            refinements: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    #[default]
    Hp,
    HOnly,
}

impl StrategyName {
    pub fn strategy(self) -> HierarchyStrategy {
        match self {
            StrategyName::Hp => HierarchyStrategy::HpSpaceTime,
            StrategyName::HOnly => HierarchyStrategy::SpatialHOnly,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StrategyName::Hp => "hp",
            StrategyName::HOnly => "h_only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgSection {
    pub nu1: usize,
    pub nu2: usize,
    pub omega: f64,
    pub smoother: PatchKind,
    pub coarse_cap: usize,
    pub patch_entry_cap: u64,
    pub project_pressure: bool,
    pub hierarchy: StrategyName,
    /// Refinement level of the coarsest multigrid mesh.
    pub coarse_level: usize,
}

impl Default for MgSection {
    fn default() -> Self {
        let v = VCycleConfig::default();
        Self {
            nu1: v.nu1,
            nu2: v.nu2,
            omega: v.omega,
            smoother: v.smoother,
            coarse_cap: v.coarse_cap,
            patch_entry_cap: v.patch_entry_cap,
            project_pressure: v.project_pressure,
            hierarchy: StrategyName::Hp,
            coarse_level: 0,
        }
    }
}

impl MgSection {
    pub fn vcycle(&self) -> VCycleConfig {
        VCycleConfig {
            nu1: self.nu1,
            nu2: self.nu2,
            omega: self.omega,
            smoother: self.smoother,
            coarse_cap: self.coarse_cap,
            patch_entry_cap: self.patch_entry_cap,
            project_pressure: self.project_pressure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmresSection {
    pub rtol: f64,
    pub atol: f64,
    pub maxit: usize,
}

impl Default for GmresSection {
    fn default() -> Self {
        let k = KrylovConfig::default();
        Self {
            rtol: k.rtol,
            atol: k.atol,
            maxit: k.max_iterations,
        }
    }
}

impl GmresSection {
    pub fn krylov(&self) -> KrylovConfig {
        KrylovConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_iterations: self.maxit,
            max_basis: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub csv_path: Option<String>,
}

/// Parameter lists of the convergence and robustness sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub r_list: Vec<usize>,
    pub c_list: Vec<usize>,
    pub smoothers: Vec<PatchKind>,
    pub n_sm_list: Vec<usize>,
    pub hierarchies: Vec<StrategyName>,
    /// Time steps averaged per robustness run; all steps when absent.
    pub max_steps: Option<usize>,
    /// Permits runs beyond r ≤ 5, c ≤ 5.
    pub allow_large: bool,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            r_list: vec![2],
            c_list: vec![1, 2, 3],
            smoothers: vec![PatchKind::Cell],
            n_sm_list: vec![1],
            hierarchies: vec![StrategyName::Hp],
            max_steps: None,
            allow_large: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub discretization: DiscretizationSection,
    pub mesh: MeshSection,
    pub mg: MgSection,
    pub gmres: GmresSection,
    pub output: OutputSection,
    pub study: StudySection,
}

pub const MAX_DESK_DEGREE: usize = 5;
pub const MAX_DESK_REFINEMENTS: usize = 5;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::with_overrides(text, &[])
    }

    /// Parses `text`, applies `section.key=value` overrides in order and
    /// validates the result.
    pub fn with_overrides(text: &str, overrides: &[&str]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for raw in overrides {
            let (path, value) = parse_override(raw)?;
            insert_override(&mut table, &path, value)?;
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.dim != 2 {
            return Err(Error::Config(format!(
                "dimension {} not supported, only 2",
                self.problem.dim
            )));
        }
        if !(self.problem.nu > 0.0 && self.problem.nu.is_finite()) {
            return Err(Error::Config("viscosity must be positive".into()));
        }
        if let Some(t) = self.problem.t_end {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config("final time must be positive".into()));
            }
        }
        if self.problem.steps == Some(0) {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if self.discretization.r == 0 {
            return Err(Error::Config("spatial degree r must be at least 1".into()));
        }
        if self.mesh.base_cells == 0 {
            return Err(Error::Config("base_cells must be at least 1".into()));
        }
        if self.mg.coarse_level > self.mesh.refinements {
            return Err(Error::Config("mg.coarse_level exceeds mesh.refinements".into()));
        }
        self.mg.vcycle().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.gmres
            .krylov()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !self.study.allow_large {
            let r_max = self
                .study
                .r_list
                .iter()
                .copied()
                .chain([self.discretization.r])
                .max()
                .unwrap_or(0);
            let c_max = self
                .study
                .c_list
                .iter()
                .copied()
                .chain([self.mesh.refinements])
                .max()
                .unwrap_or(0);
            if r_max > MAX_DESK_DEGREE || c_max > MAX_DESK_REFINEMENTS {
                return Err(Error::Config(format!(
                    "r ≤ {MAX_DESK_DEGREE} and c ≤ {MAX_DESK_REFINEMENTS} unless study.allow_large = true"
                )));
            }
        }
        if self.study.n_sm_list.contains(&0) {
            return Err(Error::Config("smoothing step counts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.discretization.k.unwrap_or(self.discretization.r)
    }
}

/// Splits `section.key=value` into its key path and a TOML value. Values
/// that are not valid TOML are taken as bare strings.
pub fn parse_override(raw: &str) -> Result<(Vec<String>, toml::Value)> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{raw}` is not of the form key=value")))?;
    let path: Vec<String> = key.trim().split('.').map(|s| s.trim().to_string()).collect();
    if path
        .iter()
        .any(|s| s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
    {
        return Err(Error::Config(format!("invalid override key `{}`", key.trim())));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((path, parsed))
}

fn insert_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty override path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path `{}` crosses a non-table value", path.join("."))))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}
