//! Command-line front end. Every run reads one JSON config, writes its
//! artifacts atomically into the output directory and maps its outcome to
//! an exit code: 0 pass, 1 fail, 2 config error, 3 inconclusive, 4 runtime
//! error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{Field, GridSpec};
use crate::kernels::{homogeneity_defect, multi_riesz_kernel_eval, riesz_kernel_eval, KernelId, KernelValue, MultiIndexDegree};
use crate::lizorkin::{
    low_frequency_energy, make_lizorkin_test, marginal_moments, moments, project, worst_moment, LizorkinClass,
    TestParams, Variant, MAX_MOMENT_ORDER,
};
use crate::quasiasym::{
    estimate_from_trace, Automodel, Catalog, Direction, EstimateKind, Evaluator, Model, ScaledPairing, TGrid,
    TracePoint,
};
use crate::riesz::{apply_multi_riesz, apply_riesz, is_laplacian_power, RieszMultiplier};
use crate::special::{riesz_normalizer, NormalizerKind};
use crate::tauberian::{
    check_theorem5, check_theorem6, check_theorem7, check_theorem8, check_theorem9, CheckSettings,
    TauberianReport, Tolerances, Verdict,
};
use crate::C64;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "rzt", version, about = "Riesz fractional calculus on Lizorkin spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply D^alpha (or a multi-index D^beta) to a field
    Apply(RunArgs),
    /// Moments and marginal moments of a field
    Moments(RunArgs),
    /// Project a field into the discrete Lizorkin class
    Project(RunArgs),
    /// Estimate a quasi-asymptotic degree
    Estimate(RunArgs),
    /// Run one Tauberian check
    Tauberian(RunArgs),
    /// Tabulate Riesz kernels and homogeneity defects
    KernelTable(RunArgs),
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Apply(a) => ("apply", a),
            Command::Moments(a) => ("moments", a),
            Command::Project(a) => ("project", a),
            Command::Estimate(a) => ("estimate", a),
            Command::Tauberian(a) => ("tauberian", a),
            Command::KernelTable(a) => ("kernel_table", a),
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Reserved; every computation is deterministic
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure of a run, with its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexInput {
    pub fn value(self) -> C64 {
        match self {
            ComplexInput::Real(x) => C64::new(x, 0.0),
            ComplexInput::Pair([a, b]) => C64::new(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub points_per_axis: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantConfig {
    Phi,
    PhiTimes,
}

impl From<VariantConfig> for Variant {
    fn from(v: VariantConfig) -> Self {
        match v {
            VariantConfig::Phi => Variant::Phi,
            VariantConfig::PhiTimes => Variant::PhiTimes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestConfig {
    pub variant: Option<VariantConfig>,
    pub scale: Option<f64>,
    pub modulation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluatorConfig {
    /// Closed-form function.
    Catalog(Catalog),
    /// RZF field file, relative to the config file.
    Field(PathBuf),
    /// Lizorkin test field on the run grid.
    Lizorkin(TestConfig),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    24
}

impl WindowConfig {
    fn grid(&self, field: &str) -> CliResult<TGrid> {
        TGrid::geometric(self.t_min, self.t_max, self.points).map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyParams {
    /// Isotropic order `alpha`.
    pub alpha: Option<ComplexInput>,
    /// Multi-index order, one entry per axis.
    pub beta: Option<Vec<ComplexInput>>,
    /// Apply the operator this many times and compare with one application
    /// of the summed order.
    #[serde(default = "one")]
    pub repeat: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsParams {
    #[serde(default = "default_order")]
    pub max_order: u32,
    pub variant: Option<VariantConfig>,
}

fn default_order() -> u32 {
    4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectParams {
    pub variant: Option<VariantConfig>,
    pub taper_radius: Option<f64>,
    #[serde(default = "default_order")]
    pub max_order: u32,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateParams {
    pub direction: Direction,
    pub window: WindowConfig,
    #[serde(default = "default_model")]
    pub model: Model,
    pub test: Option<TestConfig>,
}

fn default_model() -> Model {
    Model::PurePower
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremConfig {
    T5,
    T6,
    T7,
    T8,
    T9,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauberianParams {
    pub theorem: TheoremConfig,
    /// Comparison function; `T6` uses its degree as `alpha`.
    pub rho: Option<Automodel>,
    /// `T7`: one order; `T8`: one order per axis.
    pub beta: Option<Vec<ComplexInput>>,
    /// `T6`: expected `C1`, `C2`.
    pub c1: Option<ComplexInput>,
    pub c2: Option<ComplexInput>,
    /// `T9`: order of the primitive.
    pub order: Option<u32>,
    pub test: Option<TestConfig>,
    pub window: Option<WindowConfig>,
    pub x_window: Option<WindowConfig>,
    pub degree_tolerance: Option<f64>,
    pub constant_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelTableKind {
    Riesz { alpha: ComplexInput },
    Multi { alpha: Vec<ComplexInput> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTableParams {
    pub kernel: KernelTableKind,
    pub points: Vec<Vec<f64>>,
    /// Scales at which the homogeneity defect is reported.
    #[serde(default)]
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    Apply(ApplyParams),
    Moments(MomentsParams),
    Project(ProjectParams),
    Estimate(EstimateParams),
    Tauberian(TauberianParams),
    #[serde(alias = "kernel-table")]
    KernelTable(KernelTableParams),
}

impl Operation {
    fn name(&self) -> &'static str {
        match self {
            Operation::Apply(_) => "apply",
            Operation::Moments(_) => "moments",
            Operation::Project(_) => "project",
            Operation::Estimate(_) => "estimate",
            Operation::Tauberian(_) => "tauberian",
            Operation::KernelTable(_) => "kernel_table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: Option<GridConfig>,
    pub evaluator: Option<EvaluatorConfig>,
    pub operation: Operation,
    /// File-name stem of the artifacts; defaults to the operation name.
    pub name: Option<String>,
}

/// Parses a config, naming the offending JSON path and position on error.
pub fn parse_config(text: &str) -> CliResult<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.into_inner()))
    })
}

/// Artifacts and verdict of one run.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub written: Vec<PathBuf>,
    pub message: String,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

struct Output {
    dir: PathBuf,
    stem: String,
    written: Vec<PathBuf>,
}

impl Output {
    fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        self.bytes(suffix, text.as_bytes())
    }

    fn bytes(&mut self, suffix: &str, bytes: &[u8]) -> CliResult<()> {
        let p = self.path(suffix);
        write_atomic(&p, bytes).map_err(Error::from)?;
        self.written.push(p);
        Ok(())
    }

    fn field(&mut self, suffix: &str, f: &Field) -> CliResult<()> {
        let mut buf = Vec::new();
        f.write_rzf(&mut buf)?;
        self.bytes(suffix, &buf)
    }
}

fn trace_csv(points: &[TracePoint], normalized: impl Fn(&TracePoint) -> f64) -> String {
    let mut s = String::from("t,re_pairing,im_pairing,normalized\n");
    for p in points {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", p.t, p.pairing.re, p.pairing.im, normalized(p));
    }
    s
}

fn grid_spec(cfg: &ExperimentConfig) -> CliResult<GridSpec> {
    let Some(g) = &cfg.grid else {
        return Ok(GridSpec::default_for(1)?);
    };
    let base = GridSpec::default_for(g.dim).map_err(|e| CliError::Config(format!("grid.dim: {e}")))?;
    let points = g.points_per_axis.unwrap_or(base.points());
    let half = g.half_width.unwrap_or(base.half_width());
    GridSpec::new(g.dim, points, half).map_err(|e| CliError::Config(format!("grid: {e}")))
}

fn default_scale(spec: &GridSpec) -> f64 {
    // keeps the bump well inside the Nyquist band and its tail inside the box
    match spec.dim() {
        1 => 10.0,
        2 => 6.0,
        _ => 4.0,
    }
}

fn test_field(spec: GridSpec, cfg: Option<&TestConfig>, default_variant: Variant) -> CliResult<Field> {
    let variant = cfg.and_then(|c| c.variant).map(Variant::from).unwrap_or(default_variant);
    let params = TestParams {
        scale: cfg.and_then(|c| c.scale).unwrap_or(default_scale(&spec)),
        modulation: cfg.and_then(|c| c.modulation.clone()),
    };
    make_lizorkin_test(spec, variant, &params).map_err(|e| match e {
        Error::InvalidArgument(m) | Error::Degenerate(m) => CliError::Config(format!("test: {m}")),
        other => other.into(),
    })
}

fn evaluator(cfg: &ExperimentConfig, spec: GridSpec, base: &Path) -> CliResult<Evaluator> {
    match &cfg.evaluator {
        None => Err(CliError::Config(format!("operation `{}` needs an `evaluator`", cfg.operation.name()))),
        Some(EvaluatorConfig::Catalog(c)) => Ok(Evaluator::catalog(c.clone())),
        Some(EvaluatorConfig::Field(p)) => {
            let path = if p.is_absolute() { p.clone() } else { base.join(p) };
            let f = Field::load(&path)?;
            if f.spec != spec && cfg.grid.is_some() {
                return Err(CliError::Config(format!("field {} does not lie on the configured grid", path.display())));
            }
            Ok(Evaluator::Sampled(f))
        }
        Some(EvaluatorConfig::Lizorkin(t)) => Ok(Evaluator::Sampled(test_field(spec, Some(t), Variant::Phi)?)),
    }
}

/// Samples an evaluator on the grid.
fn materialize(f: &Evaluator, spec: GridSpec) -> CliResult<Field> {
    if let Evaluator::Sampled(field) = f {
        return Ok(field.clone());
    }
    let value = f
        .compile(spec.dim())?
        .value
        .ok_or_else(|| CliError::Config("evaluator has no point values".into()))?;
    Ok(Field::from_fn(spec, |x| {
        let v = value(x);
        if v.is_finite() {
            v
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

#[derive(Serialize)]
struct ApplySummary {
    operator: String,
    repeat: u32,
    input_norm: f64,
    output_norm: f64,
    /// Worst moments relative to the L2 norm of the same field.
    input_worst_moment: f64,
    output_worst_moment: f64,
    moment_order: u32,
    low_frequency_energy: f64,
    output_boundary_mass: f64,
    /// `||D^a ... D^a f - D^{ka} f|| / ||f||` when `repeat > 1`.
    group_defect: Option<f64>,
    /// `||D^alpha f - (-Delta)^{alpha/2} f|| / ||f||`, with the Laplacian
    /// taken as a sum of second derivatives, for even integer `alpha`.
    laplacian_defect: Option<f64>,
    /// `||D^alpha f - |k|^alpha f|| / ||f||` for harmonic inputs.
    eigen_defect: Option<f64>,
    tolerance: f64,
}

fn laplacian_power(f: &Field, k: u32) -> CliResult<Field> {
    let n = f.spec.dim();
    let mut g = f.clone();
    for _ in 0..k {
        let mut acc = Field::zeros(f.spec);
        for axis in 0..n {
            let mut beta = vec![C64::new(0.0, 0.0); n];
            beta[axis] = C64::new(2.0, 0.0);
            let d = RieszMultiplier::product(MultiIndexDegree::new(beta)).apply_raw(&g)?;
            acc = acc.add(&d);
        }
        g = acc;
    }
    Ok(g)
}

fn cmd_apply(cfg: &ExperimentConfig, p: &ApplyParams, spec: GridSpec, base: &Path, out: &mut Output) -> CliResult<i32> {
    let f_eval = evaluator(cfg, spec, base)?;
    let f = materialize(&f_eval, spec)?;
    if p.repeat == 0 {
        return Err(CliError::Config("operation.apply.repeat: must be at least 1".into()));
    }
    type Step = Box<dyn Fn(&Field, u32) -> CliResult<Field>>;
    let op: Step = match (&p.alpha, &p.beta) {
        (Some(a), None) => {
            let a = a.value();
            Box::new(move |g, k| Ok(apply_riesz(g, a * k as f64)))
        }
        (None, Some(b)) => {
            if b.len() != spec.dim() {
                return Err(CliError::Config(format!(
                    "operation.apply.beta: {} entries for a grid of dimension {}",
                    b.len(),
                    spec.dim()
                )));
            }
            let b: Vec<C64> = b.iter().map(|v| v.value()).collect();
            Box::new(move |g, k| {
                Ok(apply_multi_riesz(g, &MultiIndexDegree::new(b.iter().map(|v| v * k as f64).collect()))?)
            })
        }
        _ => return Err(CliError::Config("operation.apply: give exactly one of `alpha` and `beta`".into())),
    };
    let mut g = f.clone();
    for _ in 0..p.repeat {
        g = op(&g, 1)?;
    }
    let norm = f.l2_norm().max(f64::MIN_POSITIVE);
    let group_defect = if p.repeat > 1 { Some(g.sub(&op(&f, p.repeat)?).l2_norm() / norm) } else { None };
    let (laplacian_defect, eigen_defect) = match p.alpha {
        Some(a) if is_laplacian_power(a.value() * p.repeat as f64) => {
            let total = a.value().re * p.repeat as f64;
            let lap = laplacian_power(&f, (total / 2.0).round() as u32)?;
            let eig = match &f_eval {
                Evaluator::Catalog { entry: Catalog::Harmonic { wavevector }, .. } => {
                    let k2: f64 = wavevector.iter().map(|v| v * v).sum();
                    Some(g.sub(&f.scaled(C64::new(k2.powf(total / 2.0), 0.0))).l2_norm() / norm)
                }
                _ => None,
            };
            (Some(g.sub(&lap).l2_norm() / norm), eig)
        }
        _ => (None, None),
    };
    let variant = if p.beta.is_some() { Variant::PhiTimes } else { Variant::Phi };
    let order = 4;
    let summary = ApplySummary {
        operator: match (&p.alpha, &p.beta) {
            (Some(a), _) => format!("D^{}", a.value()),
            (_, Some(b)) => format!("D^{:?}", b.iter().map(|v| v.value()).collect::<Vec<_>>()),
            _ => unreachable!(),
        },
        repeat: p.repeat,
        input_norm: f.l2_norm(),
        output_norm: g.l2_norm(),
        input_worst_moment: worst_moment(&f, variant, order)? / norm,
        output_worst_moment: worst_moment(&g, variant, order)? / g.l2_norm().max(f64::MIN_POSITIVE),
        moment_order: order,
        low_frequency_energy: low_frequency_energy(&f, LizorkinClass::default_for(&spec, variant).taper_radius),
        output_boundary_mass: g.boundary_mass(),
        group_defect,
        laplacian_defect,
        eigen_defect,
        tolerance: 1e-10,
    };
    out.field(".rzf", &g)?;
    out.json(".json", &summary)?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct MomentRow {
    index: Vec<u32>,
    value: C64,
}

#[derive(Serialize)]
struct MarginalRow {
    axis: usize,
    order: u32,
    sup_norm: f64,
}

#[derive(Serialize)]
struct MomentsSummary {
    variant: VariantConfig,
    max_order: u32,
    l2_norm: f64,
    /// Largest moment relative to the L2 norm.
    worst: f64,
    tolerance: f64,
    member: bool,
    moments: Vec<MomentRow>,
    marginals: Vec<MarginalRow>,
}

fn moments_summary(f: &Field, variant: Variant, max_order: u32) -> CliResult<MomentsSummary> {
    if max_order > MAX_MOMENT_ORDER {
        return Err(CliError::Config(format!("max_order {max_order} exceeds {MAX_MOMENT_ORDER}")));
    }
    let norm = f.l2_norm().max(f64::MIN_POSITIVE);
    let rows = moments(f, max_order)?
        .into_iter()
        .map(|m| MomentRow { index: m.index.to_vec(), value: m.value / norm })
        .collect();
    let mut marginals = Vec::new();
    if variant == Variant::PhiTimes && f.spec.dim() > 1 {
        for axis in 0..f.spec.dim() {
            for m in marginal_moments(f, axis, max_order)? {
                marginals.push(MarginalRow { axis, order: m.order, sup_norm: m.sup_norm() / norm });
            }
        }
    }
    let worst = worst_moment(f, variant, max_order)? / norm;
    Ok(MomentsSummary {
        variant: if variant == Variant::Phi { VariantConfig::Phi } else { VariantConfig::PhiTimes },
        max_order,
        l2_norm: f.l2_norm(),
        worst,
        tolerance: 1e-8,
        member: worst <= 1e-8,
        moments: rows,
        marginals,
    })
}

fn cmd_moments(cfg: &ExperimentConfig, p: &MomentsParams, spec: GridSpec, base: &Path, out: &mut Output) -> CliResult<i32> {
    let f = materialize(&evaluator(cfg, spec, base)?, spec)?;
    let variant = p.variant.map(Variant::from).unwrap_or(Variant::Phi);
    let summary = moments_summary(&f, variant, p.max_order)?;
    out.json(".json", &summary)?;
    Ok(if summary.member { EXIT_PASS } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct ProjectSummary {
    taper_radius: f64,
    moment0_before: f64,
    moment0_after: f64,
    low_frequency_energy_before: f64,
    low_frequency_energy_after: f64,
    after: MomentsSummary,
}

fn cmd_project(cfg: &ExperimentConfig, p: &ProjectParams, spec: GridSpec, base: &Path, out: &mut Output) -> CliResult<i32> {
    let f = materialize(&evaluator(cfg, spec, base)?, spec)?;
    let variant = p.variant.map(Variant::from).unwrap_or(Variant::Phi);
    let class = match p.taper_radius {
        Some(r) => LizorkinClass::new(&spec, variant, r, 1e-8).map_err(|e| CliError::Config(format!("taper_radius: {e}")))?,
        None => LizorkinClass::default_for(&spec, variant),
    };
    let g = project(&f, &class);
    let m0 = |h: &Field| h.integral().norm();
    let summary = ProjectSummary {
        taper_radius: class.taper_radius,
        moment0_before: m0(&f),
        moment0_after: m0(&g),
        low_frequency_energy_before: low_frequency_energy(&f, class.taper_radius),
        low_frequency_energy_after: low_frequency_energy(&g, class.taper_radius),
        after: moments_summary(&g, variant, p.max_order)?,
    };
    out.field(".rzf", &g)?;
    out.json(".json", &summary)?;
    Ok(EXIT_PASS)
}

fn cmd_estimate(cfg: &ExperimentConfig, p: &EstimateParams, spec: GridSpec, base: &Path, out: &mut Output) -> CliResult<i32> {
    let f = evaluator(cfg, spec, base)?;
    let phi = test_field(spec, p.test.as_ref(), Variant::Phi)?;
    let grid = p.window.grid("operation.estimate.window")?;
    grid.validate_for_estimation().map_err(|e| CliError::Config(format!("operation.estimate.window: {e}")))?;
    let trace = ScaledPairing::new(&f, &phi)?.trace(p.direction, &grid)?;
    let est = estimate_from_trace(&trace, p.direction, p.model)?;
    out.json(".json", &est)?;
    out.bytes("_trace.csv", trace_csv(&trace, |pt| est.normalized(pt)).as_bytes())?;
    Ok(match est.kind {
        EstimateKind::Invalid => EXIT_INCONCLUSIVE,
        _ => EXIT_PASS,
    })
}

fn need<T: Clone>(v: &Option<T>, field: &str, theorem: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| CliError::Config(format!("operation.tauberian.{field} is required for {theorem}")))
}

fn cmd_tauberian(cfg: &ExperimentConfig, p: &TauberianParams, spec: GridSpec, base: &Path, out: &mut Output) -> CliResult<i32> {
    let mut settings = CheckSettings::default();
    if let Some(w) = &p.window {
        settings.t_grid = w.grid("operation.tauberian.window")?;
    }
    if let Some(w) = &p.x_window {
        settings.x_grid = w.grid("operation.tauberian.x_window")?;
    }
    settings.tolerance = Tolerances {
        degree: p.degree_tolerance.unwrap_or(settings.tolerance.degree),
        constant: p.constant_tolerance.unwrap_or(settings.tolerance.constant),
    };
    if let Some(s) = p.test.as_ref().and_then(|t| t.scale) {
        settings.test_scale = s;
    }
    let f = evaluator(cfg, spec, base)?;
    let report: TauberianReport = match p.theorem {
        TheoremConfig::T5 => {
            let rho = need(&p.rho, "rho", "t5")?;
            let phi = test_field(spec, p.test.as_ref(), Variant::Phi)?;
            check_theorem5(&f, &rho, &phi, &settings)?
        }
        TheoremConfig::T6 => {
            let rho = need(&p.rho, "rho", "t6")?;
            let expected = match (p.c1, p.c2) {
                (Some(a), Some(b)) => Some((a.value(), b.value())),
                (None, None) => None,
                _ => return Err(CliError::Config("operation.tauberian: give both c1 and c2 or neither".into())),
            };
            check_theorem6(&f, rho.degree, expected, &settings)?
        }
        TheoremConfig::T7 => {
            let rho = need(&p.rho, "rho", "t7")?;
            let beta = need(&p.beta, "beta", "t7")?;
            if beta.len() != 1 {
                return Err(CliError::Config("operation.tauberian.beta: t7 takes a single order".into()));
            }
            let phi = test_field(spec, p.test.as_ref(), Variant::Phi)?;
            check_theorem7(&f, beta[0].value(), &rho, &phi, &settings)?
        }
        TheoremConfig::T8 => {
            let rho = need(&p.rho, "rho", "t8")?;
            let beta = need(&p.beta, "beta", "t8")?;
            if beta.len() != spec.dim() || spec.dim() < 2 {
                return Err(CliError::Config(format!(
                    "operation.tauberian.beta: t8 needs one order per axis on a grid of dimension >= 2 (grid has {})",
                    spec.dim()
                )));
            }
            let phi = test_field(spec, p.test.as_ref(), Variant::PhiTimes)?;
            let b = MultiIndexDegree::new(beta.iter().map(|v| v.value()).collect());
            check_theorem8(&f, &b, &rho, &phi, &settings)?
        }
        TheoremConfig::T9 => {
            let rho = need(&p.rho, "rho", "t9")?;
            let order = need(&p.order, "order", "t9")?;
            if order == 0 {
                return Err(CliError::Config("operation.tauberian.order: must be positive".into()));
            }
            check_theorem9(&f, order, &rho, &settings)?
        }
    };
    out.json(".json", &report)?;
    for t in &report.traces {
        out.bytes(&format!("_{}.csv", t.label), trace_csv(&t.points, |pt| t.normalized(pt)).as_bytes())?;
    }
    Ok(match report.verdict {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn cmd_kernel_table(p: &KernelTableParams, out: &mut Output) -> CliResult<i32> {
    let (id, kind_of) = match &p.kernel {
        KernelTableKind::Riesz { alpha } => {
            let dim = p.points.first().map_or(1, |x| x.len());
            let a = alpha.value();
            (KernelId::Riesz { dim, alpha: a }, vec![riesz_normalizer(dim, a).kind()])
        }
        KernelTableKind::Multi { alpha } => {
            let a: Vec<C64> = alpha.iter().map(|v| v.value()).collect();
            let kinds = a.iter().map(|&v| riesz_normalizer(1, v).kind()).collect();
            (KernelId::MultiRiesz(MultiIndexDegree::new(a)), kinds)
        }
    };
    let kind_name = |k: NormalizerKind| match k {
        NormalizerKind::Regular => "regular",
        NormalizerKind::LogKernel => "log",
        NormalizerKind::DeltaKernel => "delta",
    };
    let kind = {
        let mut names: Vec<&str> = kind_of.iter().map(|&k| kind_name(k)).collect();
        names.dedup();
        names.join("+")
    };
    let mut csv = String::from("x,re_value,im_value,kind,status\n");
    for (i, x) in p.points.iter().enumerate() {
        let v = match &id {
            KernelId::Riesz { dim, alpha } => {
                if x.len() != *dim {
                    return Err(CliError::Config(format!("operation.kernel_table.points[{i}]: expected {dim} coordinates")));
                }
                riesz_kernel_eval(*dim, *alpha, x)
            }
            KernelId::MultiRiesz(a) => multi_riesz_kernel_eval(a, x),
        };
        let coords = x.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(";");
        match v {
            Ok(KernelValue::Pointwise(z)) => {
                let _ = writeln!(csv, "{coords},{:e},{:e},{kind},ok", z.re, z.im);
            }
            Ok(KernelValue::NotPointwise) => {
                let _ = writeln!(csv, "{coords},,,{kind},NotPointwise");
            }
            Err(Error::SingularPoint) => {
                let _ = writeln!(csv, "{coords},,,{kind},singular");
            }
            Err(Error::InvalidArgument(m)) => {
                return Err(CliError::Config(format!("operation.kernel_table.points[{i}]: {m}")))
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.bytes(".csv", csv.as_bytes())?;
    if !p.scales.is_empty() {
        let mut h = String::from("t,homogeneity_defect\n");
        let samples: Vec<Vec<f64>> = p.points.iter().filter(|x| x.iter().all(|&c| c != 0.0)).cloned().collect();
        for &t in &p.scales {
            match homogeneity_defect(&id, t, &samples) {
                Ok(d) => {
                    let _ = writeln!(h, "{t:e},{d:e}");
                }
                Err(Error::InvalidArgument(m)) => return Err(CliError::Config(format!("operation.kernel_table.scales: {m}"))),
                Err(e) => return Err(e.into()),
            }
        }
        out.bytes("_homogeneity.csv", h.as_bytes())?;
    }
    Ok(EXIT_PASS)
}

/// Runs one subcommand against a config file.
pub fn run(command: &Command) -> CliResult<RunOutcome> {
    let (name, args) = command.parts();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = parse_config(&text)?;
    if cfg.operation.name() != name {
        return Err(CliError::Config(format!(
            "subcommand `{}` does not match operation `{}` in the config",
            name.replace('_', "-"),
            cfg.operation.name()
        )));
    }
    let spec = grid_spec(&cfg)?;
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    std::fs::create_dir_all(&args.out).map_err(Error::from)?;
    let mut out = Output { dir: args.out.clone(), stem: cfg.name.clone().unwrap_or_else(|| name.to_string()), written: Vec::new() };
    let code = match &cfg.operation {
        Operation::Apply(p) => cmd_apply(&cfg, p, spec, &base, &mut out)?,
        Operation::Moments(p) => cmd_moments(&cfg, p, spec, &base, &mut out)?,
        Operation::Project(p) => cmd_project(&cfg, p, spec, &base, &mut out)?,
        Operation::Estimate(p) => cmd_estimate(&cfg, p, spec, &base, &mut out)?,
        Operation::Tauberian(p) => cmd_tauberian(&cfg, p, spec, &base, &mut out)?,
        Operation::KernelTable(p) => cmd_kernel_table(p, &mut out)?,
    };
    let message = match code {
        EXIT_PASS => "pass",
        EXIT_FAIL => "fail",
        EXIT_INCONCLUSIVE => "inconclusive",
        _ => "done",
    };
    Ok(RunOutcome { exit_code: code, written: out.written, message: message.to_string() })
}

/// Configures the thread pool from `RZT_THREADS`; results do not depend on it.
pub fn init_threads() {
    if let Some(n) = std::env::var("RZT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    init_threads();
    match run(&cli.command) {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            println!("{}", outcome.message);
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("rzt: {e}");
            e.exit_code()
        }
    }
}
