//! Batch front-end: registered checks with a dependency graph, JSON
//! reports and the `isoalg` command line.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::ser::Serialize;
use serde::Serialize as DeriveSerialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::algebra::FiniteStarAlgebra;
use crate::conditions::{
    chain, check_3_6, check_4_1_4_2, check_coefficient_algebra, check_prop_2_2, default_cap,
    minimal_coefficient_algebra, tower, verify_4_4, verify_prop_3_5,
};
use crate::error::{Error, Result};
use crate::fourier::{coefficient_oracle_sample, homomorphism_sample, parse, reduce};
use crate::linalg::ComplexMatrix;
use crate::models::{polar_decompose, prop_5_4_suite, theorem_5_1_suite, Model, ModelSpec};
use crate::norm::{
    gauge_invariance_check, lemma_2_8_sample, norm_limit, property_star_sample, sample_forms, NormLimitTrace,
};
use crate::report::ConditionReport;
use crate::system::Direction;

/// Largest tolerated `|s_k - ||x|| | / ||x||` at the last level of the schedule.
pub const NORM_LIMIT_GAP: f64 = 0.05;
/// Roots of unity used by the gauge check.
pub const GAUGE_GRID: usize = 16;

/// Exit status for a failed check.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for configuration and parse errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Applies {
    All,
    Polar,
    QDeform,
}

/// A registered check. `deps` lists the checks whose failure makes this one
/// meaningless; it is then reported as skipped.
#[derive(Clone, Copy, Debug)]
pub struct CheckDef {
    pub name: &'static str,
    pub deps: &'static [&'static str],
    pub applies: Applies,
    pub about: &'static str,
}

/// Registered checks in dependency order.
pub const CHECKS: &[CheckDef] = &[
    CheckDef { name: "model_conditions", deps: &[], applies: Applies::All, about: "standing conditions of the model" },
    CheckDef {
        name: "lemma_2_8",
        deps: &[],
        applies: Applies::All,
        about: "norm estimates for finite sums on random tuples",
    },
    CheckDef {
        name: "prop_2_2",
        deps: &[],
        applies: Applies::All,
        about: "three equivalent covariance conditions on the base algebra",
    },
    CheckDef {
        name: "condition_3_6",
        deps: &["prop_2_2"],
        applies: Applies::All,
        about: "U*U commutes with every delta^n(A)",
    },
    CheckDef {
        name: "coefficient_algebra",
        deps: &["prop_2_2"],
        applies: Applies::All,
        about: "covariance and invariance under delta, delta_*",
    },
    CheckDef {
        name: "prop_3_5",
        deps: &["coefficient_algebra"],
        applies: Applies::All,
        about: "structure of the powers of U",
    },
    CheckDef {
        name: "tower_fixed_point",
        deps: &["coefficient_algebra"],
        applies: Applies::All,
        about: "extending a coefficient algebra adds nothing",
    },
    CheckDef {
        name: "condition_4_1_4_2",
        deps: &["condition_3_6", "model_conditions"],
        applies: Applies::All,
        about: "commutation of delta^n-images of a commutative base",
    },
    CheckDef {
        name: "identity_4_4",
        deps: &["condition_4_1_4_2"],
        applies: Applies::All,
        about: "E_*(E(A)) = E(E_*(A))",
    },
    CheckDef {
        name: "homomorphism",
        deps: &["coefficient_algebra"],
        applies: Applies::All,
        about: "eval is a *-homomorphism on normal forms",
    },
    CheckDef {
        name: "coefficient_oracle",
        deps: &["coefficient_algebra"],
        applies: Applies::All,
        about: "coefficients agree with gauge averages",
    },
    CheckDef {
        name: "property_star",
        deps: &["coefficient_algebra", "model_conditions"],
        applies: Applies::All,
        about: "||a_k|| <= ||x|| on random normal forms",
    },
    CheckDef {
        name: "norm_limit",
        deps: &["property_star"],
        applies: Applies::All,
        about: "norm-limit formula and its two-sided estimate",
    },
    CheckDef {
        name: "gauge_invariance",
        deps: &["property_star"],
        applies: Applies::All,
        about: "gauge action preserves norms",
    },
    CheckDef {
        name: "theorem_5_1",
        deps: &["model_conditions"],
        applies: Applies::Polar,
        about: "powers of U from a polar decomposition",
    },
    CheckDef {
        name: "prop_5_4",
        deps: &["model_conditions"],
        applies: Applies::QDeform,
        about: "relations of a, a* and Q with truncation defects",
    },
];

pub fn check_def(name: &str) -> Option<&'static CheckDef> {
    CHECKS.iter().find(|c| c.name == name)
}

fn applies(def: &CheckDef, model: &Model) -> bool {
    match def.applies {
        Applies::All => true,
        Applies::Polar => matches!(model, Model::Polar(_)),
        Applies::QDeform => matches!(model, Model::QDeform(_)),
    }
}

/// Registered check names, one per line with a short description.
pub fn registered_list() -> String {
    CHECKS.iter().map(|c| format!("  {:<20} {}", c.name, c.about)).collect::<Vec<_>>().join("\n")
}

/// Expands `all` or a comma-separated list, adding dependencies, in
/// registry order.
pub fn resolve_checks(list: &str, model: &Model) -> Result<Vec<&'static str>> {
    let mut wanted: Vec<&'static str> = Vec::new();
    if list.trim() == "all" {
        wanted = CHECKS.iter().filter(|c| applies(c, model)).map(|c| c.name).collect();
    } else {
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let def = check_def(name).ok_or_else(|| {
                Error::InvalidArgument(format!("unknown check `{name}`; registered checks:\n{}", registered_list()))
            })?;
            if !applies(def, model) {
                return Err(Error::InvalidArgument(format!(
                    "check `{name}` does not apply to a {} model",
                    model.kind()
                )));
            }
            wanted.push(def.name);
        }
        if wanted.is_empty() {
            return Err(Error::InvalidArgument(format!("no checks given; registered checks:\n{}", registered_list())));
        }
    }
    let mut i = 0;
    while i < wanted.len() {
        for dep in check_def(wanted[i]).expect("registered").deps {
            if !wanted.contains(dep) {
                wanted.push(dep);
            }
        }
        i += 1;
    }
    Ok(CHECKS.iter().map(|c| c.name).filter(|n| wanted.contains(n)).collect())
}

/// Settings of a `run`.
#[derive(Clone, Debug, DeriveSerialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub checks: String,
    pub tol: f64,
    pub seed: u64,
    pub k_max: u64,
    pub n_max: usize,
    pub samples: usize,
    pub norm_samples: usize,
}

impl RunConfig {
    pub fn new(model: ModelSpec) -> Self {
        Self {
            model,
            checks: "all".into(),
            tol: crate::algebra::DEFAULT_TOL,
            seed: 0,
            k_max: 8,
            n_max: 5,
            samples: 200,
            norm_samples: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, DeriveSerialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, DeriveSerialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub depends_on: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ConditionReport>,
}

#[derive(Clone, Debug, DeriveSerialize)]
pub struct RunReport {
    pub model: &'static str,
    pub config: RunConfig,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub norm_limit: Vec<NormLimitTrace>,
}

impl RunReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of checks that did not pass (failed or skipped).
    pub fn not_passed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| c.status != Status::Pass).map(|c| c.name).collect()
    }
}

fn error_report(name: &str, e: &Error) -> ConditionReport {
    let mut r = ConditionReport::new(name);
    r.record_flag("completed", false);
    r.note(e.to_string());
    if let Error::HypothesisViolated(inner) | Error::NotCoefficientAlgebra(inner) | Error::NotPartialIsometry(inner) = e
    {
        r.absorb(inner);
    }
    r
}

fn run_one(name: &str, model: &Model, cfg: &RunConfig, traces: &mut Vec<NormLimitTrace>) -> Result<ConditionReport> {
    let base = model.base();
    let system = model.system();
    let (seed, samples) = (cfg.seed, cfg.samples);
    match name {
        "model_conditions" => Ok(model.conditions()),
        "lemma_2_8" => lemma_2_8_sample(samples, seed, cfg.tol),
        "prop_2_2" => Ok(check_prop_2_2(base)),
        "condition_3_6" => Ok(check_3_6(base, default_cap(base))),
        "coefficient_algebra" => Ok(check_coefficient_algebra(system)),
        "prop_3_5" => Ok(verify_prop_3_5(system, cfg.n_max)),
        "tower_fixed_point" => {
            let top = minimal_coefficient_algebra(system)?;
            let mut r = ConditionReport::new("tower_fixed_point");
            let alg = system.algebra();
            let grown = top.basis().iter().map(|b| alg.relative_defect(b)).fold(0.0, f64::max);
            r.record("E_*(E(A)) in A", grown, system.tol());
            r.record_info("dimension A", alg.dimension() as f64);
            r.record_info("dimension E_*(E(A))", top.dimension() as f64);
            Ok(r)
        }
        "condition_4_1_4_2" => check_4_1_4_2(base, default_cap(base)),
        "identity_4_4" => verify_4_4(base),
        "homomorphism" => homomorphism_sample(system, samples, seed),
        "coefficient_oracle" => coefficient_oracle_sample(system, samples, seed),
        "property_star" => Ok(property_star_sample(system, samples, seed)),
        "norm_limit" => {
            let mut r = ConditionReport::new("norm_limit");
            let mut worst_gap = 0.0_f64;
            let mut bounds_ok = true;
            for x in sample_forms(system, cfg.norm_samples, seed) {
                let mut t = norm_limit(&x, cfg.k_max)?;
                t.property_star = Some(true);
                let b = t.bounds_report(cfg.tol);
                if !b.pass {
                    bounds_ok = false;
                    r.absorb(&b);
                }
                worst_gap = worst_gap.max(t.final_gap());
                traces.push(t);
            }
            r.record("max |s_k - ||x|| | / ||x|| at k_max", worst_gap, NORM_LIMIT_GAP);
            r.record_flag("two-sided estimate at every k", bounds_ok);
            r.record_info("samples", cfg.norm_samples as f64);
            Ok(r)
        }
        "gauge_invariance" => {
            let mut r = ConditionReport::new("gauge_invariance");
            let mut worst = 0.0_f64;
            for x in sample_forms(system, cfg.norm_samples, seed) {
                worst = worst.max(gauge_invariance_check(&x, GAUGE_GRID)?.max_defect());
            }
            r.record("max | ||x(lambda)|| - ||x|| | / scale", worst, system.tol());
            r.record_info("samples", cfg.norm_samples as f64);
            Ok(r)
        }
        "theorem_5_1" => match model {
            Model::Polar(m) => Ok(theorem_5_1_suite(m, cfg.n_max)),
            _ => Err(Error::InvalidArgument("theorem_5_1 needs a polar model".into())),
        },
        "prop_5_4" => match model {
            Model::QDeform(m) => Ok(prop_5_4_suite(m)),
            _ => Err(Error::InvalidArgument("prop_5_4 needs a qdeform model".into())),
        },
        other => Err(Error::InvalidArgument(format!("unknown check `{other}`"))),
    }
}

/// Runs the resolved checks in order, skipping any whose dependency did not
/// pass.
pub fn run(model: &Model, cfg: &RunConfig) -> Result<RunReport> {
    let names = resolve_checks(&cfg.checks, model)?;
    let mut results: Vec<CheckResult> = Vec::new();
    let mut traces = Vec::new();
    for name in names {
        let def = check_def(name).expect("registered");
        let deps: Vec<&'static str> = def.deps.to_vec();
        let blocked: Vec<&str> = deps
            .iter()
            .filter(|d| results.iter().any(|r| r.name == **d && r.status != Status::Pass))
            .copied()
            .collect();
        if !blocked.is_empty() {
            results.push(CheckResult {
                name,
                status: Status::Skipped,
                depends_on: deps,
                reason: Some(format!("dependency did not pass: {}", blocked.join(", "))),
                report: None,
            });
            continue;
        }
        let report = run_one(name, model, cfg, &mut traces).unwrap_or_else(|e| error_report(name, &e));
        let status = if report.pass { Status::Pass } else { Status::Fail };
        results.push(CheckResult { name, status, depends_on: deps, reason: None, report: Some(report) });
    }
    let pass = results.iter().all(|r| r.status == Status::Pass);
    Ok(RunReport { model: model.kind(), config: cfg.clone(), pass, checks: results, norm_limit: traces })
}

/// Pretty JSON with every float written in scientific notation with 17
/// significant digits, so identical inputs give identical bytes.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Parser, Debug)]
#[command(name = "isoalg", version, about = "Checks for C*-algebras generated by a *-algebra and a partial isometry")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Model spec (JSON)
    #[arg(long)]
    pub model: PathBuf,
    /// Numerical tolerance
    #[arg(long, env = "ISOALG_TOL", default_value_t = crate::algebra::DEFAULT_TOL)]
    pub tol: f64,
    /// Output file (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run registered checks on a model
    Run {
        #[command(flatten)]
        common: Common,
        /// Comma-separated check names, or `all`
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Last level of the norm-limit schedule
        #[arg(long, default_value_t = 8)]
        k_max: u64,
        /// Largest power in the power-structure suites
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        /// Random samples per sampled check
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Random samples for the norm-limit and gauge checks
        #[arg(long, default_value_t = 50)]
        norm_samples: usize,
    },
    /// Parse an expression and print its normal form
    Nf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: String,
    },
    /// Norm-limit traces for an expression or random normal forms
    NormLimit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        k_max: u64,
        /// Samples for the property (*) sampler
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Random forms to trace when no expression is given
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Dimensions of the extension towers
    Closure {
        #[command(flatten)]
        common: Common,
    },
    /// Polar decomposition of a matrix file
    Polar {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, env = "ISOALG_TOL", default_value_t = crate::algebra::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Whether an error is the user's input rather than a mathematical failure.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Json(_)
            | Error::Io(_)
            | Error::InvalidArgument(_)
            | Error::Syntax { .. }
            | Error::UnknownGenerator(_)
            | Error::DimensionMismatch { .. }
    )
}

fn exit_code(e: &Error) -> i32 {
    if is_config_error(e) {
        EXIT_CONFIG
    } else {
        EXIT_FAIL
    }
}

fn read_spec(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)?;
    ModelSpec::from_json(&text)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(DeriveSerialize)]
struct ErrorJson<'a> {
    model: Option<&'a str>,
    pass: bool,
    error: String,
}

#[derive(DeriveSerialize)]
struct ChainJson {
    level_dimensions: Vec<usize>,
    stabilization: Option<usize>,
    repeats: Option<usize>,
}

#[derive(DeriveSerialize)]
struct ClosureJson {
    model: &'static str,
    base_dimension: usize,
    system_dimension: usize,
    condition_3_6: bool,
    delta_chain: ChainJson,
    delta_star_chain: ChainJson,
    e_dimension: usize,
    estar_e_dimension: usize,
    estar_dimension: usize,
    e_estar_dimension: usize,
}

#[derive(DeriveSerialize)]
struct PolarJson {
    u: ComplexMatrix,
    abs_a: ComplexMatrix,
    relative_residual: f64,
    aa_star_in_a0_defect: f64,
    partial_isometry: ConditionReport,
}

#[derive(DeriveSerialize)]
struct NormLimitJson {
    property_star: ConditionReport,
    traces: Vec<NormLimitTrace>,
}

/// Runs a subcommand, returning the exit status.
pub fn execute(cli: Cli) -> i32 {
    let (out, result) = match cli.command {
        Command::Run { common, checks, seed, k_max, n_max, samples, norm_samples } => {
            let out = common.out.clone();
            (out, cmd_run(&common, checks, seed, k_max, n_max, samples, norm_samples))
        }
        Command::Nf { common, expr } => (common.out.clone(), cmd_nf(&common, &expr)),
        Command::NormLimit { common, expr, seed, k_max, samples, count } => {
            (common.out.clone(), cmd_norm_limit(&common, expr.as_deref(), seed, k_max, samples, count))
        }
        Command::Closure { common } => (common.out.clone(), cmd_closure(&common)),
        Command::Polar { matrix, tol, out } => (out, cmd_polar(&matrix, tol)),
    };
    match result.and_then(|(text, code)| emit(&text, out.as_deref()).map(|_| code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("isoalg: {e}");
            let code = exit_code(&e);
            if code == EXIT_FAIL {
                let body = ErrorJson { model: None, pass: false, error: e.to_string() };
                if let Ok(text) = to_json(&body) {
                    let _ = emit(&text, out.as_deref());
                }
            }
            code
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}

fn cmd_run(
    common: &Common,
    checks: String,
    seed: u64,
    k_max: u64,
    n_max: usize,
    samples: usize,
    norm_samples: usize,
) -> Result<(String, i32)> {
    check_tol(common.tol)?;
    if k_max == 0 {
        return Err(Error::InvalidArgument("--k-max must be at least 1".into()));
    }
    let spec = read_spec(&common.model)?;
    let model = Model::assemble(&spec, common.tol)?;
    let cfg = RunConfig { model: spec, checks, tol: common.tol, seed, k_max, n_max, samples, norm_samples };
    let report = run(&model, &cfg)?;
    let code = if report.pass { 0 } else { EXIT_FAIL };
    Ok((to_json(&report)?, code))
}

fn cmd_nf(common: &Common, expr: &str) -> Result<(String, i32)> {
    check_tol(common.tol)?;
    let model = Model::assemble(&read_spec(&common.model)?, common.tol)?;
    let system = model.system();
    let e = parse(expr, system.dim(), &model.generators())?;
    let nf = reduce(&e, system)?;
    Ok((to_json(&nf)?, 0))
}

fn cmd_norm_limit(
    common: &Common,
    expr: Option<&str>,
    seed: u64,
    k_max: u64,
    samples: usize,
    count: usize,
) -> Result<(String, i32)> {
    check_tol(common.tol)?;
    let model = Model::assemble(&read_spec(&common.model)?, common.tol)?;
    let system = model.system();
    let forms = match expr {
        Some(text) => vec![reduce(&parse(text, system.dim(), &model.generators())?, system)?],
        None => sample_forms(system, count, seed),
    };
    let star = property_star_sample(system, samples, seed);
    let mut traces = Vec::with_capacity(forms.len());
    let mut ok = star.pass;
    for x in &forms {
        let mut t = norm_limit(x, k_max)?;
        t.property_star = Some(star.pass);
        ok &= t.bounds_report(common.tol).pass;
        traces.push(t);
    }
    let body = NormLimitJson { property_star: star, traces };
    Ok((to_json(&body)?, if ok { 0 } else { EXIT_FAIL }))
}

fn chain_json(c: crate::conditions::Chain) -> ChainJson {
    ChainJson {
        level_dimensions: c.levels.iter().map(Vec::len).collect(),
        stabilization: c.stabilization,
        repeats: c.repeats,
    }
}

fn cmd_closure(common: &Common) -> Result<(String, i32)> {
    check_tol(common.tol)?;
    let model = Model::assemble(&read_spec(&common.model)?, common.tol)?;
    let base = model.base();
    let cap = default_cap(base);
    let e = tower(base, Direction::Delta, cap)?;
    let estar_e = tower(&base.with_algebra(e.clone())?, Direction::DeltaStar, cap)?;
    let estar = tower(base, Direction::DeltaStar, cap)?;
    let e_estar = tower(&base.with_algebra(estar.clone())?, Direction::Delta, cap)?;
    let body = ClosureJson {
        model: model.kind(),
        base_dimension: base.algebra().dimension(),
        system_dimension: model.system().algebra().dimension(),
        condition_3_6: check_3_6(base, cap).pass,
        delta_chain: chain_json(chain(base, Direction::Delta, cap)?),
        delta_star_chain: chain_json(chain(base, Direction::DeltaStar, cap)?),
        e_dimension: e.dimension(),
        estar_e_dimension: estar_e.dimension(),
        estar_dimension: estar.dimension(),
        e_estar_dimension: e_estar.dimension(),
    };
    Ok((to_json(&body)?, 0))
}

fn cmd_polar(path: &Path, tol: f64) -> Result<(String, i32)> {
    check_tol(tol)?;
    let text = std::fs::read_to_string(path)?;
    let a: ComplexMatrix = serde_json::from_str(&text)?;
    let (u, abs_a) = polar_decompose(&a);
    let norm = a.spectral_norm();
    let residual = if norm > 0.0 { (&a - &(&u * &abs_a)).spectral_norm() / norm } else { 0.0 };
    let a0 = FiniteStarAlgebra::generate_closure(a.dim(), std::slice::from_ref(&abs_a), tol)?;
    let body = PolarJson {
        aa_star_in_a0_defect: a0.relative_defect(&(&a * &a.adjoint())),
        partial_isometry: u.is_partial_isometry(tol),
        u,
        abs_a,
        relative_residual: residual,
    };
    let code = if body.partial_isometry.pass { 0 } else { EXIT_FAIL };
    Ok((to_json(&body)?, code))
}
