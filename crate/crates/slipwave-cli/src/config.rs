//! Run configuration: TOML sections, `--set` overrides and validation.
//!
//! Every section is optional and every key has a default; unknown keys are
//! rejected. Validation happens here, so a [`RunConfig`] always describes a
//! runnable experiment.

use serde::{Deserialize, Serialize};
use slipwave::bvp::{BoundaryMode, PhysicalParams};
use slipwave::geometry::{ForcingSpec, Recipe, SlipLaw};
use slipwave::newton::SolverConfig;
use slipwave::spectral::Grid;
use std::fmt;
use std::path::{Path, PathBuf};

/// Slip parameters used by `sweep-alpha` and the `verify` probe unless
/// `experiment.alphas` is set.
pub const DEFAULT_SWEEP: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Amplitude of the Gaussian bump used when no `[forcing]` section is given.
pub const DEFAULT_BUMP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Symbols,
    SolveLinear,
    Solve,
    SweepAlpha,
    Verify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Symbols => "symbols",
            ExperimentKind::SolveLinear => "solve-linear",
            ExperimentKind::Solve => "solve",
            ExperimentKind::SweepAlpha => "sweep-alpha",
            ExperimentKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bottom {
    #[default]
    Slip,
    NoSlip,
}

impl Bottom {
    pub fn mode(self) -> BoundaryMode {
        match self {
            Bottom::Slip => BoundaryMode::Slip,
            Bottom::NoSlip => BoundaryMode::NoSlip,
        }
    }
}

/// Where the linear solve gets its data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    /// Minus the residual of the rest state, i.e. the linear response to the
    /// forcing.
    #[default]
    Forcing,
    /// Seeded random data.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub period: f64,
    pub dim: usize,
    pub nx: usize,
    pub nz: usize,
    pub depth: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { period: 20.0, dim: 1, nx: 256, nz: 48, depth: 1.0 }
    }
}

fn linear_law() -> SlipLaw {
    SlipLaw::Linear
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub sigma: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Rows of the `n x n` slip matrix; identity when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<Vec<f64>>>,
    #[serde(default = "linear_law")]
    pub slip_law: SlipLaw,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection { sigma: 0.1, gamma: 1.0, alpha: 0.1, beta: None, slip_law: SlipLaw::Linear }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    /// Amplitude of the built-in Gaussian bump (bulk force and surface
    /// pressure centred in the cell).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian_bump: Option<f64>,
    pub bulk: Vec<Recipe>,
    pub surface_stress: Vec<Recipe>,
    pub flat_bulk: Vec<Recipe>,
    pub flat_stress: Vec<Recipe>,
}

fn default_forcing() -> ForcingSection {
    ForcingSection { gaussian_bump: Some(DEFAULT_BUMP), ..Default::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub bottom: Bottom,
    pub data: DataSource,
    /// Random samples per check in `verify`.
    pub samples: usize,
    /// Sobolev index `s` of the reported norms.
    pub regularity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            kind: None,
            seed: 0,
            bottom: Bottom::Slip,
            data: DataSource::Forcing,
            samples: 20,
            regularity: 1.0,
            alphas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// File stem; the experiment name when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("slipwave-out"), stem: None }
    }
}

/// The configuration file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default = "default_forcing")]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Validated configuration with every default resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub grid: Grid,
    pub params: PhysicalParams,
    pub forcing: ForcingSpec,
    pub solver: SolverConfig,
    pub experiment: ExperimentSection,
    pub alphas: Vec<f64>,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
    /// Effective configuration, echoed into every summary.
    pub echo: FileConfig,
}

/// Splits `section.key=value` and parses the value as a TOML value, falling
/// back to a bare string (so `solver.mode=newton` works unquoted).
fn parse_override(item: &str) -> Result<(String, String, toml::Value), ConfigError> {
    let Some((path, raw)) = item.split_once('=') else {
        return err(format!("override `{item}` must look like section.key=value"));
    };
    let Some((section, key)) = path.trim().split_once('.') else {
        return err(format!("override `{item}` must name a section and a key"));
    };
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((section.to_string(), key.to_string(), value))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (section, key, value) = parse_override(item)?;
    let entry = table.entry(section.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let Some(t) = entry.as_table_mut() else {
        return err(format!("`{section}` is not a section"));
    };
    t.insert(key, value);
    Ok(())
}

/// Parses `text` and applies the overrides in order.
pub fn parse_file_config(text: &str, overrides: &[String]) -> Result<FileConfig, ConfigError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(format!("config: {e}")))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError(format!("config: {}", e.message())))
}

fn build_forcing(section: &ForcingSection, grid: &Grid) -> Result<ForcingSpec, ConfigError> {
    let mut forcing = match section.gaussian_bump {
        Some(a) if !a.is_finite() => return err(format!("forcing.gaussian_bump must be finite, got {a}")),
        Some(a) => ForcingSpec::gaussian_bump(grid, a),
        None => ForcingSpec::default(),
    };
    forcing.bulk.extend(section.bulk.iter().cloned());
    forcing.surface_stress.extend(section.surface_stress.iter().cloned());
    forcing.flat_bulk.extend(section.flat_bulk.iter().cloned());
    forcing.flat_stress.extend(section.flat_stress.iter().cloned());
    forcing.validate(grid.dim()).map_err(|e| ConfigError(e.to_string()))?;
    Ok(forcing)
}

fn build_params(section: &ParamsSection, dim: usize) -> Result<PhysicalParams, ConfigError> {
    let mut params = PhysicalParams::new(dim, section.sigma, section.gamma, section.alpha);
    params.slip_law = section.slip_law.clone();
    if let Some(rows) = &section.beta {
        let n = dim + 1;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return err(format!("params.beta must be a {n}x{n} matrix (list of {n} rows) for grid.dim = {dim}"));
        }
        params.beta = rows.concat();
    }
    params.validate(dim).map_err(|e| ConfigError(format!("params: {e}")))?;
    Ok(params)
}

/// Resolves defaults and checks every constraint. `kind` from the command
/// line takes precedence over `experiment.kind`.
pub fn resolve(mut file: FileConfig, kind: Option<ExperimentKind>) -> Result<RunConfig, ConfigError> {
    let Some(kind) = kind.or(file.experiment.kind) else {
        return err("no experiment: pass a subcommand or set experiment.kind");
    };
    file.experiment.kind = Some(kind);
    let g = &file.grid;
    let grid = Grid::new(g.period, g.dim, g.nx, g.nz, g.depth).map_err(|e| ConfigError(format!("grid: {e}")))?;
    let params = build_params(&file.params, g.dim)?;
    let forcing = build_forcing(&file.forcing, &grid)?;
    file.solver.validate().map_err(|e| ConfigError(e.to_string()))?;

    let ex = &file.experiment;
    if ex.samples == 0 {
        return err("experiment.samples must be at least 1");
    }
    if !(ex.regularity >= 0.0 && ex.regularity.is_finite()) {
        return err(format!("experiment.regularity must be finite and >= 0, got {}", ex.regularity));
    }
    let alphas = match (&ex.alphas, kind) {
        (Some(a), _) => a.clone(),
        (None, ExperimentKind::Symbols) => vec![params.alpha],
        (None, _) => DEFAULT_SWEEP.to_vec(),
    };
    if alphas.is_empty() {
        return err("experiment.alphas must not be empty");
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return err(format!("experiment.alphas must lie in (0, 1), got {a}"));
    }
    if kind == ExperimentKind::SweepAlpha && !params.slip_law.is_linear() {
        return err("sweep-alpha needs params.slip_law.kind = \"linear\"");
    }

    let stem = file.output.stem.clone().unwrap_or_else(|| kind.name().to_string());
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return err(format!("output.stem must be a plain file name, got `{stem}`"));
    }
    let dir = file.output.dir.clone();
    Ok(RunConfig {
        kind,
        grid,
        params,
        forcing,
        solver: file.solver.clone(),
        experiment: file.experiment.clone(),
        alphas,
        json_path: dir.join(format!("{stem}.json")),
        csv_path: dir.join(format!("{stem}.csv")),
        echo: file,
    })
}

/// Reads `path` (or starts from an empty file) and resolves the result.
pub fn load(path: Option<&Path>, overrides: &[String], kind: Option<ExperimentKind>) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?,
        None => String::new(),
    };
    resolve(parse_file_config(&text, overrides)?, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        resolve(parse_file_config(text, &[])?, None)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse("[params]\nsigma = 0.2\n[experiment]\nkind = \"symbols\"\n").unwrap();
        assert_eq!(c.kind, ExperimentKind::Symbols);
        assert_eq!(c.params.sigma, 0.2);
        assert_eq!(c.params.beta, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!((c.grid.nx(), c.grid.nz()), (256, 48));
        assert_eq!(c.alphas, vec![0.1]);
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.forcing, ForcingSpec::gaussian_bump(&c.grid, DEFAULT_BUMP));
        assert!(c.json_path.ends_with("symbols.json"));
    }

    #[test]
    fn unknown_keys_are_errors() {
        let e = parse("[params]\nsigmaa = 0.2\n[experiment]\nkind = \"symbols\"").unwrap_err();
        assert!(e.0.contains("sigmaa"), "{e}");
        assert!(parse("[nope]\n[experiment]\nkind = \"symbols\"").is_err());
    }

    #[test]
    fn zero_tension_needs_two_dimensional_flow() {
        let e = parse("[grid]\ndim = 2\nnx = 8\n[params]\nsigma = 0.0\n[experiment]\nkind = \"symbols\"").unwrap_err();
        assert!(e.0.contains("n = 2"), "{e}");
        assert!(parse("[params]\nsigma = 0.0\n[experiment]\nkind = \"symbols\"").is_ok());
    }

    #[test]
    fn beta_must_be_positive_definite() {
        let e = parse("[params]\nbeta = [[-1, 0], [0, -2]]\n[experiment]\nkind = \"symbols\"").unwrap_err();
        assert!(e.0.contains("positive definite"), "{e}");
        let e = parse("[params]\nbeta = [[1, 0, 0]]\n[experiment]\nkind = \"symbols\"").unwrap_err();
        assert!(e.0.contains("2x2"), "{e}");
    }

    #[test]
    fn overrides_apply_in_order() {
        let sets = ["solver.mode=newton".to_string(), "params.alpha=0.5".into(), "params.alpha=0.25".into()];
        let f = parse_file_config("", &sets).unwrap();
        let c = resolve(f, Some(ExperimentKind::Solve)).unwrap();
        assert_eq!(c.solver.mode, slipwave::newton::IterationMode::Newton);
        assert_eq!(c.params.alpha, 0.25);
        assert_eq!(c.alphas, DEFAULT_SWEEP.to_vec());
        assert!(parse_file_config("", &["alpha=0.1".into()]).is_err());
        assert!(parse_file_config("", &["params.alpha".into()]).is_err());
    }

    #[test]
    fn subcommand_wins_over_file() {
        let f = parse_file_config("[experiment]\nkind = \"symbols\"", &[]).unwrap();
        assert_eq!(resolve(f, Some(ExperimentKind::Verify)).unwrap().kind, ExperimentKind::Verify);
        assert!(parse("").is_err());
    }

    #[test]
    fn explicit_forcing_replaces_the_default_bump() {
        let c = parse(
            "[forcing]\n[[forcing.bulk]]\nkind = \"plane_wave\"\namplitude = [1e-3, 0]\nwavenumber = [1]\n\
             [experiment]\nkind = \"solve\"",
        )
        .unwrap();
        assert!(c.forcing.surface_stress.is_empty());
        assert_eq!(c.forcing.bulk.len(), 1);
        let e = parse("[forcing]\n[[forcing.bulk]]\nkind = \"plane_wave\"\namplitude = [1]\nwavenumber = [1]\n[experiment]\nkind = \"solve\"")
            .unwrap_err();
        assert!(e.0.contains("amplitude"), "{e}");
    }

    #[test]
    fn alphas_checked() {
        assert!(parse("[experiment]\nkind = \"sweep-alpha\"\nalphas = [0.5, 1.0]").is_err());
        assert!(parse("[experiment]\nkind = \"sweep-alpha\"\nalphas = []").is_err());
        let cubic = "[params]\nslip_law = { kind = \"cubic\", coefficient = 1.0, theta = 0.5, delta = 0.1 }\n";
        assert!(parse(&format!("{cubic}[experiment]\nkind = \"sweep-alpha\"")).is_err());
        assert!(parse(&format!("{cubic}[experiment]\nkind = \"solve\"")).is_ok());
    }

    #[test]
    fn echo_round_trips() {
        let c = parse("[experiment]\nkind = \"solve\"\nseed = 7").unwrap();
        let text = toml::to_string(&c.echo).unwrap();
        let again = parse_file_config(&text, &[]).unwrap();
        assert_eq!(again, c.echo);
    }
}
