//! Run configuration read from a TOML file.

use crate::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use surfspin::em_field::{presets, thin_layer_gauge};
use surfspin::geometry::TabulatedChart;
use surfspin::hamiltonian::StencilOrder;
use std::result::Result;
use surfspin::*;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub chart: Option<ChartConfig>,
    #[serde(default)]
    pub field: FieldConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub units: UnitsConfig,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    /// A built-in chart name, or `tabulated` for an embedding read from `path`.
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// CSV with `q1,q2,x,y,z` rows on a uniform grid.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub periodic: [bool; 2],
}

impl ChartConfig {
    pub fn build(&self) -> Result<Arc<dyn SurfaceChart>, CliError> {
        if self.name == "tabulated" {
            let path = self.path.as_ref().ok_or_else(|| CliError::Config("tabulated chart needs chart.path".into()))?;
            if !self.params.is_empty() {
                return Err(CliError::Config("tabulated chart takes no params".into()));
            }
            let chart = TabulatedChart::from_csv(path, self.periodic).map_err(config_err)?;
            return Ok(Arc::new(chart));
        }
        if self.path.is_some() {
            return Err(CliError::Config(format!("chart.path only applies to tabulated charts, not `{}`", self.name)));
        }
        build_chart(&self.name, &ChartParams(self.params.clone())).map_err(config_err)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldPreset {
    /// The preset that belongs to the chart; no field on the plane.
    Auto,
    Zero,
    SphereUniform,
    CylinderMixed,
    TorusMixed,
    /// Covariant components from the `a` and `phi_e` expressions.
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub preset: FieldPreset,
    /// Sphere `B`; cylinder and torus `B0`.
    #[serde(rename = "B0", alias = "B")]
    pub b0: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    /// `A_1, A_2, A_3` in terms of `q1, q2, q3`.
    pub a: Option<[String; 3]>,
    pub phi_e: Option<String>,
    pub thin_layer_gauge: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { preset: FieldPreset::Auto, b0: 0.0, b1: 0.0, a: None, phi_e: None, thin_layer_gauge: false }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: [usize; 2],
    /// Defaults to the chart's natural closure.
    pub boundary: Option<[Boundary; 2]>,
    pub domain: Option<Domain>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: [24, 48], boundary: None, domain: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub k: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    pub spinless: bool,
    pub representation: Representation,
    pub stencil: StencilOrder,
    /// Number of eigenfields written as CSV.
    pub export_fields: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 8,
            tol: None,
            seed: 0,
            spinless: false,
            representation: Representation::Primed,
            stencil: StencilOrder::Fourth,
            export_fields: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnitsConfig {
    pub hbar: f64,
    pub mass: f64,
    pub e: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, e: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub charts: Vec<String>,
    pub n: [usize; 2],
    pub gauges: usize,
    pub k: usize,
    pub oracle_points: usize,
    /// Test hook: flip the sign of one term group in the assembled operator.
    pub corrupt_sign: Option<TermGroup>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            charts: vec!["sphere".into(), "cylinder".into(), "torus".into()],
            n: [12, 24],
            gauges: 3,
            k: 6,
            oracle_points: 6,
            corrupt_sign: None,
        }
    }
}

const BUILTIN: [&str; 3] = ["sphere", "cylinder", "torus"];

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn units(&self) -> Units {
        Units { hbar: self.units.hbar, mass: self.units.mass }
    }

    pub fn assembly_options(&self) -> AssemblyOptions {
        AssemblyOptions {
            spinless: self.solver.spinless,
            representation: self.solver.representation,
            stencil: self.solver.stencil,
            corrupt_sign: self.check.corrupt_sign,
            ..AssemblyOptions::default()
        }
    }

    /// Checks that do not need a chart.
    pub fn validate_common(&self) -> Result<(), CliError> {
        self.units().validate().map_err(config_err)?;
        if !(self.units.e.is_finite()) {
            return Err(CliError::Config(format!("units.e = {}", self.units.e)));
        }
        if self.solver.k == 0 {
            return Err(CliError::Config("solver.k must be at least 1".into()));
        }
        if let Some(t) = self.solver.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Config(format!("solver.tol = {t}")));
            }
        }
        for name in &self.check.charts {
            if !BUILTIN.contains(&name.as_str()) {
                return Err(CliError::Config(format!("check.charts: `{name}` has no built-in preset")));
            }
        }
        if self.check.n.iter().any(|n| *n < 8) || self.check.k == 0 || self.check.oracle_points == 0 {
            return Err(CliError::Config("check needs n >= 8 per axis, k >= 1 and oracle_points >= 1".into()));
        }
        Ok(())
    }
}

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

/// A validated configuration with its chart, field and grid built.
pub struct Prepared {
    pub config: RunConfig,
    pub chart: Arc<dyn SurfaceChart>,
    pub field: EMField,
    pub units: Units,
    pub options: AssemblyOptions,
    pub grid: GridSpec,
}

impl Prepared {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        config.validate_common()?;
        let cc = config.chart.as_ref().ok_or_else(|| CliError::Config("missing [chart] table".into()))?;
        let chart = cc.build()?;
        let field = build_field(&config, chart.clone())?;
        let options = config.assembly_options();
        let grid = match config.grid.boundary {
            Some([b1, b2]) => GridSpec::new(config.grid.n[0], config.grid.n[1], b1, b2),
            None => GridSpec::natural(chart.as_ref(), config.grid.n, &options).map_err(config_err)?,
        };
        let grid = match config.grid.domain {
            Some(d) => grid.with_domain(d),
            None => grid,
        };
        let domain = grid.validate(chart.as_ref(), &options).map_err(config_err)?;
        for q in grid.node_coordinates(&domain) {
            let a3 = field.vector_potential([q[0], q[1], 0.0])[2];
            if a3.abs() > options.a3_tol {
                return Err(CliError::Config(format!(
                    "field has A_3 = {a3:e} on the surface at ({}, {}); set field.thin_layer_gauge = true",
                    q[0], q[1]
                )));
            }
        }
        let components = if options.spinless { 1 } else { 2 };
        let dim = grid.dimension(components);
        if 4 * config.solver.k > dim {
            return Err(CliError::Config(format!("solver.k = {} needs at least {} unknowns, grid has {dim}", config.solver.k, 4 * config.solver.k)));
        }
        Ok(Self { units: config.units(), config, chart, field, options, grid })
    }

    pub fn chart_param(&self, key: &str) -> f64 {
        chart_param(self.chart.as_ref(), key)
    }
}

pub fn chart_param(chart: &dyn SurfaceChart, key: &str) -> f64 {
    chart.parameters().into_iter().find(|(k, _)| k == key).map(|(_, v)| v).unwrap_or(0.0)
}

fn build_field(config: &RunConfig, chart: Arc<dyn SurfaceChart>) -> Result<EMField, CliError> {
    let fc = &config.field;
    let name = chart.name().to_string();
    let r = chart_param(chart.as_ref(), "r");
    let preset = match fc.preset {
        FieldPreset::Auto => match name.as_str() {
            "sphere" => FieldPreset::SphereUniform,
            "cylinder" => FieldPreset::CylinderMixed,
            "torus" => FieldPreset::TorusMixed,
            _ => FieldPreset::Zero,
        },
        p => p,
    };
    let wants = |chart_name: &str| -> Result<(), CliError> {
        if name != chart_name {
            return Err(CliError::Config(format!("field preset {preset:?} belongs to the {chart_name}, not the {name}")));
        }
        Ok(())
    };
    if preset != FieldPreset::Custom && (fc.a.is_some() || fc.phi_e.is_some()) {
        return Err(CliError::Config("field.a and field.phi_e need preset = \"custom\"".into()));
    }
    let field = match preset {
        FieldPreset::Zero => EMField::zero(),
        FieldPreset::SphereUniform => {
            wants("sphere")?;
            presets::sphere_uniform(r, fc.b0)
        }
        FieldPreset::CylinderMixed => {
            wants("cylinder")?;
            presets::cylinder_mixed(r, fc.b0, fc.b1)
        }
        FieldPreset::TorusMixed => {
            wants("torus")?;
            presets::torus_mixed(chart_param(chart.as_ref(), "R0"), r, fc.b0, fc.b1)
        }
        FieldPreset::Custom => {
            let a = fc.a.as_ref().ok_or_else(|| CliError::Config("custom field needs field.a".into()))?;
            let phi = fc.phi_e.as_deref().unwrap_or("0");
            EMField::from_expressions([&a[0], &a[1], &a[2]], phi).map_err(config_err)?
        }
        FieldPreset::Auto => unreachable!(),
    };
    let field = field.with_charge(config.units.e);
    if fc.thin_layer_gauge {
        return thin_layer_gauge(&field).map_err(config_err);
    }
    Ok(field)
}
