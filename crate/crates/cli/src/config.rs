//! Run configuration: a JSON document with one `problem` and optional
//! per-command sections. See `CONFIG.md` for the schema.

use std::fmt;

use serde::Deserialize;
use skewflow_core::functions::CatalogFn;
use skewflow_core::pde_solver::{EdgeCondition, GridParams};
use skewflow_core::validation::{GeneratorTestFn, PeskirTestFn};
use skewflow_core::{
    BetaFn, CoefficientClass, CurveFamily, CurveKind, InterfaceCurve, PiecewiseCoefficient, ProblemSpec,
    SkewnessSchedule, SmoothFn,
};

/// One schema or semantic error, located by a JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl ConfigErrors {
    fn one(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self(vec![ConfigIssue { path: path.into(), message: message.into() }])
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub seed: u64,
    pub simulate: Option<SimulateSection>,
    pub pde: Option<PdeSection>,
    pub validate_fk: Option<FkSection>,
    pub validate_ck: Option<CkSection>,
    pub validate_ip: Option<IpSection>,
    pub validate_gen: Option<GenSection>,
    pub transform_dump: Option<DumpSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub horizon: f64,
    #[serde(default)]
    pub x0: f64,
    /// Declared minimum separation of neighbouring curves.
    pub gap: f64,
    pub interfaces: Vec<InterfaceConfig>,
    pub sigma: SigmaConfig,
    pub drift: Option<DriftConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceConfig {
    pub curve: CurveConfig,
    pub beta: BetaConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveConfig {
    Constant {
        c: f64,
    },
    Linear {
        c0: f64,
        c1: f64,
    },
    Sinusoid {
        c0: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl CurveConfig {
    fn kind(self) -> CurveKind {
        match self {
            Self::Constant { c } => CurveKind::Constant { c },
            Self::Linear { c0, c1 } => CurveKind::Linear { c0, c1 },
            Self::Sinusoid { c0, amp, freq, phase } => CurveKind::Sinusoid { c0, amp, freq, phase },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaConfig {
    Constant {
        b: f64,
    },
    Affine {
        c0: f64,
        c1: f64,
    },
    Sinusoid {
        c0: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl From<BetaConfig> for BetaFn {
    fn from(b: BetaConfig) -> Self {
        match b {
            BetaConfig::Constant { b } => BetaFn::Constant { b },
            BetaConfig::Affine { c0, c1 } => BetaFn::Affine { c0, c1 },
            BetaConfig::Sinusoid { c0, amp, freq, phase } => BetaFn::Sinusoid { c0, amp, freq, phase },
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SmoothConfig {
    Constant {
        c: f64,
    },
    Affine {
        c0: f64,
        #[serde(default)]
        ct: f64,
        #[serde(default)]
        cx: f64,
    },
    Product {
        a0: f64,
        a1: f64,
        b0: f64,
        b1: f64,
    },
    Sinusoid {
        c0: f64,
        amp: f64,
        #[serde(default)]
        freq_t: f64,
        #[serde(default)]
        freq_x: f64,
        #[serde(default)]
        phase: f64,
    },
    Arctan {
        c0: f64,
        amp: f64,
        scale: f64,
        #[serde(default)]
        center: f64,
    },
}

impl From<SmoothConfig> for SmoothFn {
    fn from(s: SmoothConfig) -> Self {
        match s {
            SmoothConfig::Constant { c } => SmoothFn::Constant { c },
            SmoothConfig::Affine { c0, ct, cx } => SmoothFn::Affine { c0, ct, cx },
            SmoothConfig::Product { a0, a1, b0, b1 } => SmoothFn::Product { a0, a1, b0, b1 },
            SmoothConfig::Sinusoid { c0, amp, freq_t, freq_x, phase } => {
                SmoothFn::Sinusoid { c0, amp, freq_t, freq_x, phase }
            }
            SmoothConfig::Arctan { c0, amp, scale, center } => SmoothFn::Arctan { c0, amp, scale, center },
        }
    }
}

/// One piece per subdomain (`I + 1`), or a single piece used everywhere.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    pub pieces: Vec<SmoothConfig>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub pieces: Vec<SmoothConfig>,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CatalogConfig {
    Zero,
    Constant { c: f64 },
    Gaussian { height: f64, center: f64, width: f64 },
    Bump { height: f64, center: f64, radius: f64 },
    PiecewiseLinear { knot: f64, value: f64, slope_left: f64, slope_right: f64 },
    Indicator { threshold: f64 },
}

impl From<CatalogConfig> for CatalogFn {
    fn from(c: CatalogConfig) -> Self {
        match c {
            CatalogConfig::Zero => CatalogFn::Zero,
            CatalogConfig::Constant { c } => CatalogFn::Constant { c },
            CatalogConfig::Gaussian { height, center, width } => CatalogFn::Gaussian { height, center, width },
            CatalogConfig::Bump { height, center, radius } => CatalogFn::Bump { height, center, radius },
            CatalogConfig::PiecewiseLinear { knot, value, slope_left, slope_right } => {
                CatalogFn::PiecewiseLinear { knot, value, slope_left, slope_right }
            }
            CatalogConfig::Indicator { threshold } => CatalogFn::Indicator { threshold },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub n_paths: usize,
    pub n_steps: usize,
    #[serde(default = "defaults::paths_csv")]
    pub output: String,
    /// Optional little-endian binary dump of the same rows.
    pub binary: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EdgeConfig {
    #[default]
    Zero,
    Terminal,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    #[serde(default)]
    pub lambda: f64,
    pub f: CatalogConfig,
    #[serde(default = "defaults::zero")]
    pub g: CatalogConfig,
    pub half_width: f64,
    pub n_cells: usize,
    pub n_steps: usize,
    #[serde(default = "defaults::half")]
    pub theta: f64,
    #[serde(default)]
    pub edge: EdgeConfig,
    #[serde(default = "defaults::solution_csv")]
    pub output: String,
    /// Optional binary grid dump.
    pub dump: Option<String>,
}

impl PdeSection {
    pub fn grid(&self) -> GridParams {
        let edge = match self.edge {
            EdgeConfig::Zero => EdgeCondition::Zero,
            EdgeConfig::Terminal => EdgeCondition::Terminal,
        };
        GridParams::new(self.half_width, self.n_cells, self.n_steps, self.theta).with_edge(edge)
    }
}

/// Uses the `pde` section for `λ`, `f`, `g` and the grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkSection {
    /// `(t, x)` pairs.
    pub points: Vec<[f64; 2]>,
    pub n_paths: usize,
    pub n_steps: usize,
    #[serde(default = "defaults::k_se")]
    pub k_se: f64,
    #[serde(default = "defaults::c_grid")]
    pub c_grid: f64,
    #[serde(default = "defaults::fk_csv")]
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CkSection {
    pub s: f64,
    pub u: f64,
    pub t: f64,
    pub start_points: Vec<f64>,
    pub functions: Vec<CatalogConfig>,
    pub n_paths: usize,
    #[serde(default = "defaults::ck_steps")]
    pub n_steps: usize,
    #[serde(default = "defaults::ck_inner")]
    pub n_inner: usize,
    #[serde(default = "defaults::ck_spacing")]
    pub grid_spacing: f64,
    #[serde(default = "defaults::ck_half_width")]
    pub grid_half_width: f64,
    #[serde(default = "defaults::k_se")]
    pub k_se: f64,
    #[serde(default = "defaults::ck_csv")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IpFunctionConfig {
    AbsToCurve { curve: CurveConfig },
    Quadratic { a: f64, c: f64 },
    TimeOnly { amp: f64, freq: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpSection {
    pub function: IpFunctionConfig,
    pub n_paths: usize,
    pub n_steps: usize,
    pub epsilon: f64,
    #[serde(default = "defaults::k_se")]
    pub k_se: f64,
    /// Defaults to `2√ε + 5√Δt`.
    pub abs_tolerance: Option<f64>,
    #[serde(default = "defaults::ip_csv")]
    pub output: String,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GenFunctionConfig {
    PiecewiseQuadratic { p_minus: f64, q_minus: f64 },
    Unmatched { p: f64 },
    Constant { c: f64 },
}

impl From<GenFunctionConfig> for GeneratorTestFn {
    fn from(g: GenFunctionConfig) -> Self {
        match g {
            GenFunctionConfig::PiecewiseQuadratic { p_minus, q_minus } => {
                GeneratorTestFn::PiecewiseQuadratic { p_minus, q_minus }
            }
            GenFunctionConfig::Unmatched { p } => GeneratorTestFn::Unmatched { p },
            GenFunctionConfig::Constant { c } => GeneratorTestFn::Constant { c },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSection {
    pub function: GenFunctionConfig,
    #[serde(default)]
    pub s: f64,
    pub start_points: Vec<f64>,
    pub times: Vec<f64>,
    pub n_paths: usize,
    pub n_steps: usize,
    #[serde(default = "defaults::one")]
    pub c_dt: f64,
    #[serde(default = "defaults::gen_csv")]
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpSection {
    /// Time levels `0, T/n_t, …, T`.
    #[serde(default = "defaults::dump_nt")]
    pub n_t: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: usize,
    #[serde(default = "defaults::dump_csv")]
    pub output: String,
}

mod defaults {
    use super::CatalogConfig;

    pub fn zero() -> CatalogConfig {
        CatalogConfig::Zero
    }
    pub fn half() -> f64 {
        0.5
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn k_se() -> f64 {
        3.0
    }
    pub fn c_grid() -> f64 {
        5.0
    }
    pub fn ck_steps() -> usize {
        200
    }
    pub fn ck_inner() -> usize {
        2000
    }
    pub fn ck_spacing() -> f64 {
        0.05
    }
    pub fn ck_half_width() -> f64 {
        4.0
    }
    pub fn dump_nt() -> usize {
        10
    }
    pub fn paths_csv() -> String {
        "paths.csv".into()
    }
    pub fn solution_csv() -> String {
        "solution.csv".into()
    }
    pub fn fk_csv() -> String {
        "fk_report.csv".into()
    }
    pub fn ck_csv() -> String {
        "ck_report.csv".into()
    }
    pub fn ip_csv() -> String {
        "ip_report.csv".into()
    }
    pub fn gen_csv() -> String {
        "gen_report.csv".into()
    }
    pub fn dump_csv() -> String {
        "transform.csv".into()
    }
}

/// A parsed configuration together with the problem it describes.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub config: RunConfig,
    pub problem: ProblemSpec,
}

/// Samples used for the curve-ordering check.
const ORDER_SAMPLES: usize = 1001;

/// Parses and validates `text`.
pub fn parse_config(text: &str) -> Result<Parsed, ConfigErrors> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigErrors::one(if path == "." { "$".to_string() } else { path }, e.into_inner().to_string())
    })?;
    let problem = build_problem(&config.problem)?;
    Ok(Parsed { config, problem })
}

fn build_problem(p: &ProblemConfig) -> Result<ProblemSpec, ConfigErrors> {
    let mut issues = Vec::new();
    let mut push = |path: String, message: String| issues.push(ConfigIssue { path, message });

    if p.horizon.is_nan() || p.horizon <= 0.0 || p.horizon.is_infinite() {
        return Err(ConfigErrors::one("problem.horizon", format!("must be positive and finite, got {}", p.horizon)));
    }
    if p.interfaces.is_empty() {
        return Err(ConfigErrors::one("problem.interfaces", "at least one interface is required"));
    }
    let n = p.interfaces.len();

    let mut curves = Vec::with_capacity(n);
    for (i, itf) in p.interfaces.iter().enumerate() {
        match InterfaceCurve::new(itf.curve.kind(), p.horizon) {
            Ok(c) => curves.push(c),
            Err(e) => push(format!("problem.interfaces[{i}].curve"), e.to_string()),
        }
        let beta: BetaFn = itf.beta.into();
        if let Err(e) = SkewnessSchedule::new(vec![beta], p.horizon) {
            let detail = match e {
                skewflow_core::Error::BetaOutOfRange { value, .. } => {
                    format!("beta out of (-1,1): reaches {value}; skewness must lie strictly inside (-1,1) for the process to exist")
                }
                other => other.to_string(),
            };
            push(format!("problem.interfaces[{i}].beta"), detail);
        }
    }
    if curves.len() == n {
        for i in 1..n {
            let (lo, hi) = (&curves[i - 1], &curves[i]);
            let worst = (0..ORDER_SAMPLES)
                .map(|k| p.horizon * k as f64 / (ORDER_SAMPLES - 1) as f64)
                .map(|t| (t, hi.eval(t).unwrap() - lo.eval(t).unwrap()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if worst.1 < p.gap {
                push(
                    format!("problem.interfaces[{i}].curve"),
                    format!(
                        "ordering error: curve {} must stay at least gap = {} above curve {}, separation is {} at t = {}",
                        i + 1,
                        p.gap,
                        i,
                        worst.1,
                        worst.0
                    ),
                );
            }
        }
    }
    let pieces = |path: &str, given: &[SmoothConfig], issues: &mut Vec<ConfigIssue>| -> Vec<SmoothFn> {
        match given.len() {
            1 => vec![given[0].into(); n + 1],
            k if k == n + 1 => given.iter().map(|&s| s.into()).collect(),
            k => {
                issues.push(ConfigIssue {
                    path: path.into(),
                    message: format!("expected 1 or {} pieces for {n} interfaces, got {k}", n + 1),
                });
                Vec::new()
            }
        }
    };
    let sigma_pieces = pieces("problem.sigma.pieces", &p.sigma.pieces, &mut issues);
    let (drift_given, drift_bound) = match &p.drift {
        Some(d) => (d.pieces.clone(), d.bound),
        None => (vec![SmoothConfig::Constant { c: 0.0 }], 0.0),
    };
    let drift_pieces = pieces("problem.drift.pieces", &drift_given, &mut issues);
    if !issues.is_empty() {
        return Err(ConfigErrors(issues));
    }

    let family = CurveFamily::new(curves, p.gap).map_err(|e| ConfigErrors::one("problem", e.to_string()))?;
    let sigma = PiecewiseCoefficient::new(
        family.clone(),
        sigma_pieces,
        CoefficientClass::Diffusion { m: p.sigma.lower, big_m: p.sigma.upper },
    )
    .map_err(|e| ConfigErrors::one("problem.sigma", e.to_string()))?;
    let drift = PiecewiseCoefficient::new(family, drift_pieces, CoefficientClass::Drift { big_m: drift_bound })
        .map_err(|e| ConfigErrors::one("problem.drift", e.to_string()))?;
    let schedule = SkewnessSchedule::new(p.interfaces.iter().map(|i| i.beta.into()).collect(), p.horizon)
        .map_err(|e| ConfigErrors::one("problem.interfaces", e.to_string()))?;
    let problem =
        ProblemSpec::new(sigma, drift, schedule, p.x0).map_err(|e| ConfigErrors::one("problem", e.to_string()))?;
    problem.validate(&problem.default_grid()).map_err(|e| ConfigErrors::one("problem", e.to_string()))?;
    Ok(problem)
}

impl IpFunctionConfig {
    pub fn build(&self, horizon: f64) -> Result<PeskirTestFn, ConfigErrors> {
        Ok(match *self {
            Self::AbsToCurve { curve } => PeskirTestFn::AbsToCurve {
                curve: InterfaceCurve::new(curve.kind(), horizon)
                    .map_err(|e| ConfigErrors::one("validate_ip.function.curve", e.to_string()))?,
            },
            Self::Quadratic { a, c } => PeskirTestFn::Quadratic { a, c },
            Self::TimeOnly { amp, freq } => PeskirTestFn::TimeOnly { amp, freq },
        })
    }
}
