//! Experiment harness: a strict JSON config names one command, the command
//! runs the library checks and writes CSV tables plus `summary.txt`.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::diagnostics::{
    averaged_iterate_gap, best_iterate_check, bounded_iterates_check, gap_reports,
    last_iterate_step_ok, rate_fit, short_term_growth_check, theorem1_check, total_gap_rate_bound,
    write_gap_csv, BoundCheck, DeviationSets,
};
use crate::dynamics::{
    alternating_adversary, eg_regret_demo, og_regret_run, run_eg, run_gd, run_og, run_og_peg,
    run_scli, Algorithm, SCLICoefficients, StepSchedule, Trace,
};
use crate::error::{Error, Result};
use crate::linalg::{sample_ball, spectral_norm, Matrix, Vector};
use crate::operators::{
    check_monotone_and_smooth, make_linear, GameSpec, MonotoneOperator, OperatorKind,
};
use crate::potential::{
    backward_c, closed_form_c_linear, d_matrix_identity_check, lemma5_report,
    verify_potential_identity, DEFAULT_QUAD_ORDER,
};
use crate::scli::{
    agd_momentum, agd_polys, char_identity, conjecture_bound, convexmin_experiment,
    lowerbound_experiment, nesterov_fixed_step_polys, per_step_floor, radius_sweep,
    random_consistent_coeffs, write_convex_csv, write_lowerbound_csv, write_sweep_csv,
    LowerBoundCase, PolyPair, SweepFamily, DEFAULT_GRID_POINTS,
};

/// Largest horizon accepted by the `potential` command.
pub const MAX_POTENTIAL_HORIZON: usize = 10_000;
/// Largest dimension accepted by the `potential` command.
pub const MAX_POTENTIAL_DIM: usize = 64;

const IDENTITY_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-6;
const CLOSED_FORM_RESIDUAL_TOL: f64 = 1e-10;
const CLOSED_FORM_LAG: usize = 50;
const SWEEP_TOL: f64 = 1e-3;
const FLATNESS_TOL: f64 = 1e-8;
const SMOOTHNESS_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    Gap,
    Potential,
    ScliSweep,
    Lowerbound,
    Regret,
    Ratefit,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Simulate => "simulate",
            Command::Gap => "gap",
            Command::Potential => "potential",
            Command::ScliSweep => "scli-sweep",
            Command::Lowerbound => "lowerbound",
            Command::Regret => "regret",
            Command::Ratefit => "ratefit",
        })
    }
}

type Rows = Vec<Vec<f64>>;

/// Operator section of a config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub kind: OperatorKind,
    /// Payoff matrix as a list of rows.
    #[serde(rename = "M")]
    pub m: Option<Rows>,
    #[serde(rename = "A")]
    pub a: Option<Rows>,
    #[serde(rename = "S")]
    pub s: Option<Rows>,
    pub b1: Option<Vec<f64>>,
    pub b2: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    #[serde(rename = "D")]
    pub d: f64,
    /// Seed for the sampled monotonicity and smoothness validation.
    pub seed: Option<u64>,
}

/// Explicit initial points.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub z0: Vec<f64>,
    pub z_minus1: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientPreset {
    Og,
    Gd,
    Identity,
}

/// A named coefficient family (scaled by `eta`) or explicit scalars.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoefficientsConfig {
    Preset(CoefficientPreset),
    Explicit(SCLICoefficients),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    Coefficients,
    Agd,
    Nesterov,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub pairs: PairSource,
    pub family: SweepFamily,
    pub mu: f64,
    pub ell: f64,
    /// Number of random pairs.
    pub count: Option<usize>,
    pub max_p: Option<usize>,
    /// Random cases for the companion/polynomial radius comparison.
    pub char_identity_cases: Option<usize>,
    /// Horizons for the per-step radius floor over `[ℓ/(2T), ℓ]`.
    pub floor_horizons: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub family: SweepFamily,
    pub ell: f64,
    pub n: usize,
    pub min_ratio: Option<f64>,
    pub slope_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegretConfig {
    /// Bound on the loss gradients for the `D/(L√(t+1))` schedule.
    pub grad_bound: f64,
    pub max_average_regret: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateFitConfig {
    /// CSV path, relative paths resolved against the config file.
    pub input: PathBuf,
    pub x: String,
    pub y: String,
    pub burn_in: Option<usize>,
    pub slope_range: Option<[f64; 2]>,
}

/// A single experiment. Physical parameters have no defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub operator: Option<OperatorConfig>,
    pub algorithm: Option<Algorithm>,
    pub coefficients: Option<CoefficientsConfig>,
    pub eta: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    #[serde(rename = "T_list")]
    pub horizons: Option<Vec<usize>>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    pub seed: Option<u64>,
    pub quad_order: Option<usize>,
    pub grid_points: Option<usize>,
    pub output: Option<PathBuf>,
    pub init: Option<InitConfig>,
    pub sweep: Option<SweepConfig>,
    pub lowerbound: Option<LowerBoundConfig>,
    pub regret: Option<RegretConfig>,
    pub ratefit: Option<RateFitConfig>,
}

fn missing(field: &str, cmd: Command) -> Error {
    Error::Config(format!("`{field}` is required for {cmd}"))
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Config(format!(
            "`{name}` must be positive and finite, got {x}"
        )))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    fn eta(&self) -> Result<f64> {
        positive("eta", self.eta.ok_or_else(|| missing("eta", self.command))?)
    }

    fn horizon(&self) -> Result<usize> {
        match self.horizon {
            Some(0) => Err(Error::Config("`T` must be positive".into())),
            Some(t) => Ok(t),
            None => Err(missing("T", self.command)),
        }
    }

    fn horizons(&self) -> Result<Vec<usize>> {
        let list = self
            .horizons
            .clone()
            .ok_or_else(|| missing("T_list", self.command))?;
        if list.is_empty() || list[0] == 0 || list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "`T_list` must be nonempty, positive and ascending".into(),
            ));
        }
        Ok(list)
    }

    fn radius(&self) -> Result<f64> {
        let d = match (&self.operator, self.d) {
            (Some(op), Some(d)) if op.d != d => {
                return Err(Error::Config(format!(
                    "`D` = {d} disagrees with operator D = {}",
                    op.d
                )))
            }
            (_, Some(d)) => d,
            (Some(op), None) => op.d,
            (None, None) => return Err(missing("D", self.command)),
        };
        positive("D", d)
    }

    fn grid_points(&self) -> Result<usize> {
        match self.grid_points {
            Some(g) if g < 2 => Err(Error::Config("`grid_points` must be >= 2".into())),
            Some(g) => Ok(g),
            None => Ok(DEFAULT_GRID_POINTS),
        }
    }

    fn coefficients(&self) -> Result<SCLICoefficients> {
        let c = match self
            .coefficients
            .as_ref()
            .ok_or_else(|| missing("coefficients", self.command))?
        {
            CoefficientsConfig::Preset(CoefficientPreset::Og) => SCLICoefficients::og(self.eta()?),
            CoefficientsConfig::Preset(CoefficientPreset::Gd) => SCLICoefficients::gd(self.eta()?),
            CoefficientsConfig::Preset(CoefficientPreset::Identity) => SCLICoefficients::identity(),
            CoefficientsConfig::Explicit(c) => c.clone(),
        };
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }
}

fn matrix(rows: &Rows, name: &str) -> Result<Matrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if nr == 0 || nc == 0 || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Config(format!(
            "`{name}` must be a nonempty list of equal-length rows"
        )));
    }
    Ok(Matrix::from_row_iterator(
        nr,
        nc,
        rows.iter().flatten().copied(),
    ))
}

fn vector(v: Option<&Vec<f64>>, n: usize, name: &str) -> Result<Vector> {
    match v {
        None => Ok(Vector::zeros(n)),
        Some(x) if x.len() == n => Ok(Vector::from_column_slice(x)),
        Some(x) => Err(Error::Config(format!(
            "`{name}` has length {}, expected {n}",
            x.len()
        ))),
    }
}

/// Build the operator (and its game, for game kinds) and validate it by
/// sampling. Construction failures are configuration errors.
pub fn build_operator(cfg: &OperatorConfig) -> Result<(MonotoneOperator, Option<GameSpec>)> {
    let need = |m: &Option<Rows>, name: &str| {
        m.as_ref()
            .ok_or_else(|| Error::Config(format!("operator kind {} needs `{name}`", cfg.kind)))
            .and_then(|m| matrix(m, name))
    };
    let as_config = |e: Error| match e {
        Error::Contract(msg) => Error::Config(msg),
        other => other,
    };
    let (op, game) = match cfg.kind {
        OperatorKind::Bilinear | OperatorKind::PerturbedBilinear => {
            let m = need(&cfg.m, "M")?;
            let b1 = vector(cfg.b1.as_ref(), m.nrows(), "b1")?;
            let b2 = vector(cfg.b2.as_ref(), m.ncols(), "b2")?;
            let game = if cfg.kind == OperatorKind::Bilinear {
                if cfg.epsilon.is_some() {
                    return Err(Error::Config(
                        "`epsilon` only applies to perturbed-bilinear".into(),
                    ));
                }
                GameSpec::bilinear(&m, &b1, &b2, cfg.d)
            } else {
                let eps = cfg
                    .epsilon
                    .ok_or_else(|| Error::Config("perturbed-bilinear needs `epsilon`".into()))?;
                GameSpec::perturbed_bilinear(&m, &b1, &b2, eps, cfg.d)
            }
            .map_err(as_config)?;
            (game.operator.clone(), Some(game))
        }
        OperatorKind::QuadraticMin => {
            let s = need(&cfg.s, "S")?;
            let b = vector(cfg.b.as_ref(), s.nrows(), "b")?;
            let game = GameSpec::quadratic_min(&s, &b, cfg.d).map_err(as_config)?;
            (game.operator.clone(), Some(game))
        }
        OperatorKind::Linear => {
            let a = need(&cfg.a, "A")?;
            let b = vector(cfg.b.as_ref(), a.nrows(), "b")?;
            (make_linear(&a, &b, cfg.d).map_err(as_config)?, None)
        }
    };
    let report = check_monotone_and_smooth(&op, SMOOTHNESS_SAMPLES, cfg.seed.unwrap_or(0), 1e-9)?;
    if !report.ok() {
        return Err(Error::Config(format!(
            "operator failed validation: {report:?}"
        )));
    }
    Ok((op, game))
}

/// Outcome of one summary line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    Vacuous,
    Info,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Holds
        } else {
            Status::Fails
        }
    }

    fn from_check(c: &BoundCheck) -> Self {
        match c.label() {
            "vacuous" => Status::Vacuous,
            "holds" => Status::Holds,
            _ => Status::Fails,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for SummaryLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Vacuous => "vacuous",
            Status::Info => return write!(f, "{}: {}", self.name, self.detail),
        };
        write!(f, "{}: {status} ({})", self.name, self.detail)
    }
}

/// Result of a command: summary lines and the files written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<SummaryLine>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn line(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        self.lines.push(SummaryLine {
            name: name.into(),
            status,
            detail: detail.into(),
        });
    }

    fn info(&mut self, name: &str, detail: impl Into<String>) {
        self.line(name, Status::Info, detail);
    }

    fn check(&mut self, name: &str, c: &BoundCheck) {
        let detail = if c.vacuous {
            "step-size precondition not met".to_string()
        } else {
            format!("max ratio {:.6e} at T = {}", c.margin, c.worst)
        };
        self.line(name, Status::from_check(c), detail);
    }

    pub fn failed(&self) -> bool {
        self.lines.iter().any(|l| l.status == Status::Fails)
    }

    /// 0 when every check holds or is vacuous, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn summary(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

struct Artifacts<'a> {
    dir: &'a Path,
    outcome: Outcome,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.outcome.files.push(path);
        Ok(())
    }
}

/// Run `cfg`, writing artifacts into `out_dir`. Relative input paths are
/// resolved against `base_dir`.
pub fn run_command(cfg: &ExperimentConfig, base_dir: &Path, out_dir: &Path) -> Result<Outcome> {
    fs::create_dir_all(out_dir)?;
    let mut art = Artifacts {
        dir: out_dir,
        outcome: Outcome::default(),
    };
    match cfg.command {
        Command::Simulate => simulate(cfg, &mut art)?,
        Command::Gap => gap(cfg, &mut art)?,
        Command::Potential => potential(cfg, &mut art)?,
        Command::ScliSweep => scli_sweep(cfg, &mut art)?,
        Command::Lowerbound => lowerbound(cfg, &mut art)?,
        Command::Regret => regret(cfg, &mut art)?,
        Command::Ratefit => ratefit(cfg, base_dir, &mut art)?,
    }
    let summary = art.outcome.summary();
    art.write("summary.txt", |w| Ok(w.write_all(summary.as_bytes())?))?;
    Ok(art.outcome)
}

/// Load, run and report. Returns the process exit code.
pub fn run(command: Command, config: &Path, out: Option<&Path>) -> i32 {
    let result = ExperimentConfig::load(config).and_then(|cfg| {
        if cfg.command != command {
            return Err(Error::Config(format!(
                "config is for `{}`, invoked as `{command}`",
                cfg.command
            )));
        }
        let base = config.parent().unwrap_or(Path::new("."));
        let out_dir = out
            .map(Path::to_path_buf)
            .or_else(|| cfg.output.as_ref().map(|p| base.join(p)))
            .unwrap_or_else(|| PathBuf::from("out"));
        run_command(&cfg, base, &out_dir)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary());
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn operator_of(cfg: &ExperimentConfig) -> Result<(MonotoneOperator, Option<GameSpec>)> {
    build_operator(
        cfg.operator
            .as_ref()
            .ok_or_else(|| missing("operator", cfg.command))?,
    )
}

fn initial_points(
    cfg: &ExperimentConfig,
    op: &MonotoneOperator,
    d: f64,
) -> Result<(Vector, Vector)> {
    match &cfg.init {
        Some(init) => {
            let z0 = vector(Some(&init.z0), op.dim(), "init.z0")?;
            let zm = match &init.z_minus1 {
                Some(v) => vector(Some(v), op.dim(), "init.z_minus1")?,
                None => z0.clone(),
            };
            Ok((zm, z0))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
            let center = op
                .equilibrium()
                .cloned()
                .unwrap_or_else(|| Vector::zeros(op.dim()));
            let z0 = sample_ball(&mut rng, &center, d);
            Ok((z0.clone(), z0))
        }
    }
}

fn run_algorithm(cfg: &ExperimentConfig, op: &MonotoneOperator, d: f64) -> Result<Trace> {
    let alg = cfg
        .algorithm
        .ok_or_else(|| missing("algorithm", cfg.command))?;
    let t = cfg.horizon()?;
    let (zm, z0) = initial_points(cfg, op, d)?;
    match alg {
        Algorithm::Og => run_og(op, &zm, &z0, cfg.eta()?, t),
        Algorithm::OgPeg => run_og_peg(op, &zm, &z0, cfg.eta()?, t),
        Algorithm::Eg => run_eg(op, &z0, cfg.eta()?, t, None),
        Algorithm::Gd => run_gd(op, &z0, cfg.eta()?, t),
        Algorithm::Scli => {
            let c = cfg.coefficients()?;
            let mut inits = vec![zm; c.p() - 1];
            inits.push(z0);
            run_scli(op, &c, &inits, t)
        }
    }
}

fn is_optimistic(alg: Algorithm) -> bool {
    matches!(alg, Algorithm::Og | Algorithm::OgPeg)
}

fn simulate(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let (op, _) = operator_of(cfg)?;
    let d = cfg.radius()?;
    let trace = run_algorithm(cfg, &op, d)?;
    art.write("trace.csv", |w| trace.write_csv(w))?;
    let out = &mut art.outcome;
    let t = trace.horizon();
    out.info(
        "final grad gap",
        format!("{:.6e} at T = {t}", trace.grad_norm(t as i64)),
    );
    if is_optimistic(trace.algorithm()) {
        let eta = trace.eta().expect("optimistic runs have a step size");
        let c = theorem1_check(&trace, d, eta, op.ell(), op.lambda());
        out.check("theorem1", &c);
        let c = best_iterate_check(&trace, d, eta, op.ell(), 1)?;
        out.check("best iterate", &c);
        if t > 9 {
            let c = best_iterate_check(&trace, d, eta, op.ell(), 3)?;
            out.check("best window S=3", &c);
        }
        let g = short_term_growth_check(&trace, eta, op.ell());
        out.line(
            "short-term growth",
            Status::from_bool(g.holds),
            format!("worst ratio {:.6e}", g.worst_ratio),
        );
        if let Some(z_star) = op.equilibrium() {
            let b = bounded_iterates_check(&trace, z_star)?;
            let status = if b.is_finding() {
                Status::Vacuous
            } else {
                Status::from_bool(b.holds)
            };
            out.line("bounded iterates", status, format!("ratio {:.6e}", b.ratio));
        }
    }
    Ok(())
}

fn gap(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let (op, game) = operator_of(cfg)?;
    let game = game.ok_or_else(|| Error::Config("gap needs a game operator kind".into()))?;
    let d = cfg.radius()?;
    let trace = run_algorithm(cfg, &op, d)?;
    let sets = DeviationSets::around_start(&game, trace.z(0), d);
    let reports = gap_reports(&game, &trace, &sets)?;
    art.write("trace.csv", |w| trace.write_csv(w))?;
    art.write("gap.csv", |w| write_gap_csv(&reports, w))?;
    let out = &mut art.outcome;

    let pairs: Vec<(f64, f64)> = reports
        .iter()
        .filter_map(|r| Some((r.total_gap?, r.total_gap_bound?)))
        .collect();
    if pairs.is_empty() {
        out.line(
            "gradient gap controls total gap",
            Status::Vacuous,
            "no iterate inside the deviation sets with an exact gap",
        );
    } else {
        let worst = pairs
            .iter()
            .map(|&(g, b)| {
                if b > 0.0 {
                    g / b
                } else if g > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        out.line(
            "gradient gap controls total gap",
            Status::from_bool(worst <= 1.0 + 1e-12),
            format!("max ratio {worst:.6e} over {} iterates", pairs.len()),
        );
    }

    let eta = trace.eta();
    match eta {
        Some(eta)
            if is_optimistic(trace.algorithm())
                && last_iterate_step_ok(d, eta, op.ell(), op.lambda()) =>
        {
            let ratios: Vec<f64> = reports
                .iter()
                .filter(|r| r.t >= 1)
                .filter_map(|r| {
                    Some(r.total_gap? / total_gap_rate_bound(d, game.players(), eta, r.t as usize))
                })
                .collect();
            if ratios.is_empty() {
                out.line(
                    "total gap rate",
                    Status::Vacuous,
                    "exact total gap unavailable",
                );
            } else {
                let worst = ratios.iter().copied().fold(0.0, f64::max);
                out.line(
                    "total gap rate",
                    Status::from_bool(worst <= 1.0),
                    format!("max ratio {worst:.6e}"),
                );
            }
        }
        _ => out.line(
            "total gap rate",
            Status::Vacuous,
            "step-size precondition not met",
        ),
    }
    if let Some(last) = reports.last() {
        if let Some(g) = last.total_gap {
            out.info("final total gap", format!("{g:.6e} at T = {}", last.t));
        }
    }
    let avg = averaged_iterate_gap(&trace, &op)?;
    if let Some(a) = avg.last() {
        out.info(
            "averaged-iterate grad gap",
            format!("{a:.6e} at T = {}", avg.len()),
        );
    }
    Ok(())
}

fn potential(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let (op, _) = operator_of(cfg)?;
    let d = cfg.radius()?;
    let t = cfg.horizon()?;
    if t > MAX_POTENTIAL_HORIZON || op.dim() > MAX_POTENTIAL_DIM {
        return Err(Error::Config(format!(
            "potential is capped at T <= {MAX_POTENTIAL_HORIZON} and n <= {MAX_POTENTIAL_DIM}"
        )));
    }
    if !cfg.algorithm.is_some_and(is_optimistic) {
        return Err(Error::Config(
            "potential needs algorithm og or og-peg".into(),
        ));
    }
    let quad = cfg.quad_order.unwrap_or(DEFAULT_QUAD_ORDER);
    let eta = cfg.eta()?;
    let trace = run_algorithm(cfg, &op, d)?;
    let pt = backward_c(&op, &trace, quad)?;
    art.write("trace.csv", |w| trace.write_csv(w))?;
    art.write("potential.csv", |w| pt.write_csv(w))?;
    let out = &mut art.outcome;

    let res = verify_potential_identity(&pt)
        .into_iter()
        .fold(0.0, f64::max);
    out.line(
        "potential identity",
        Status::from_bool(res <= IDENTITY_TOL),
        format!("max residual {res:.3e}, quadrature order {quad}"),
    );
    let l5 = lemma5_report(&pt, eta, op.ell());
    let status = if l5.vacuous {
        Status::Vacuous
    } else {
        Status::from_bool(l5.all_hold())
    };
    let bad = l5.steps.iter().filter(|s| !s.all()).count();
    out.line(
        "step-matrix norm bounds",
        status,
        format!("{bad} of {} steps violate", l5.steps.len()),
    );
    let dres = d_matrix_identity_check(&pt).into_iter().fold(0.0, f64::max);
    out.line(
        "remainder identity",
        Status::from_bool(dres <= IDENTITY_TOL),
        format!("max residual {dres:.3e}"),
    );
    if op.is_affine() {
        match closed_form_c_linear(op.matrix(), eta, 1e-14) {
            Ok(cf) => {
                let a = op.matrix();
                let quad_res = spectral_norm(&(&cf * &cf + &cf - a * a * (eta * eta)));
                out.line(
                    "closed-form quadratic",
                    Status::from_bool(quad_res <= CLOSED_FORM_RESIDUAL_TOL),
                    format!("residual {quad_res:.3e}"),
                );
                if t >= CLOSED_FORM_LAG {
                    let gap = (0..=t - CLOSED_FORM_LAG)
                        .map(|s| spectral_norm(&(pt.c(s as i64) - &cf)))
                        .fold(0.0, f64::max);
                    out.line(
                        "closed-form limit",
                        Status::from_bool(gap <= CLOSED_FORM_TOL),
                        format!("max distance {gap:.3e} for T - t >= {CLOSED_FORM_LAG}"),
                    );
                } else {
                    out.line(
                        "closed-form limit",
                        Status::Vacuous,
                        format!("T < {CLOSED_FORM_LAG}"),
                    );
                }
            }
            Err(Error::Numeric(msg)) => out.line("closed-form quadratic", Status::Vacuous, msg),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn scli_sweep(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| missing("sweep", cfg.command))?;
    let (mu, ell) = (positive("sweep.mu", sw.mu)?, positive("sweep.ell", sw.ell)?);
    if mu >= ell {
        return Err(Error::Config("`sweep.mu` must be below `sweep.ell`".into()));
    }
    let grid = cfg.grid_points()?;
    let bound = conjecture_bound(mu, ell)?;
    let max_p = sw.max_p.unwrap_or(4);
    if max_p == 0 {
        return Err(Error::Config("`sweep.max_p` must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));

    if sw.pairs == PairSource::Random {
        let count = sw
            .count
            .ok_or_else(|| missing("sweep.count", cfg.command))?;
        let mut rows = Vec::with_capacity(count);
        for _ in 0..count {
            let p = rng.random_range(1..=max_p);
            let c = random_consistent_coeffs(&mut rng, p);
            let s = radius_sweep(&PolyPair::from_coeffs(&c)?, mu, ell, grid, sw.family)?;
            rows.push((p, s.sup));
        }
        art.write("pairs.csv", |w| {
            writeln!(w, "pair,p,sup,bound")?;
            for (i, (p, sup)) in rows.iter().enumerate() {
                writeln!(w, "{i},{p},{sup:.16e},{bound:.16e}")?;
            }
            Ok(())
        })?;
        let min_sup = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let passed = rows.iter().filter(|r| r.1 >= bound - SWEEP_TOL).count();
        art.outcome.line(
            "radius lower bound",
            Status::from_bool(passed == count),
            format!("{passed}/{count} pairs, min sup {min_sup:.6e}, bound {bound:.6e}"),
        );
    } else {
        let pair = match sw.pairs {
            PairSource::Agd => agd_polys(mu, ell)?,
            PairSource::Nesterov => nesterov_fixed_step_polys(mu, ell)?,
            _ => PolyPair::from_coeffs(&cfg.coefficients()?)?,
        };
        let s = radius_sweep(&pair, mu, ell, grid, sw.family)?;
        art.write("sweep.csv", |w| write_sweep_csv(&s, w))?;
        let out = &mut art.outcome;
        out.info(
            "sweep sup",
            format!("{:.12e} at nu = {:.6e}", s.sup, s.argmax_nu),
        );
        if sw.family == SweepFamily::ConvexMin && pair.q_at_one().abs() <= 1e-12 {
            out.line(
                "radius lower bound",
                Status::from_bool(s.sup >= bound - SWEEP_TOL),
                format!("sup {:.6e}, bound {bound:.6e}", s.sup),
            );
        }
        if sw.pairs == PairSource::Agd && sw.family == SweepFamily::ConvexMin {
            let target = agd_momentum(mu, ell)?.sqrt();
            let dev = s
                .series
                .iter()
                .map(|(_, r)| (r - target).abs())
                .fold(0.0, f64::max);
            out.line(
                "accelerated flatness",
                Status::from_bool(dev <= FLATNESS_TOL),
                format!("max deviation {dev:.3e} from {target:.9}"),
            );
        }
    }

    if let Some(hs) = &sw.floor_horizons {
        let pair = match sw.pairs {
            PairSource::Coefficients => PolyPair::from_coeffs(&cfg.coefficients()?)?,
            _ => {
                return Err(Error::Config(
                    "`floor_horizons` needs pairs = coefficients".into(),
                ))
            }
        };
        let mut worst = f64::INFINITY;
        for &t in hs {
            if t == 0 {
                return Err(Error::Config("`floor_horizons` must be positive".into()));
            }
            let s = radius_sweep(
                &pair,
                ell / (2.0 * t as f64),
                ell,
                grid,
                SweepFamily::MinMax,
            )?;
            worst = worst.min(s.sup - per_step_floor(t));
        }
        art.outcome.line(
            "per-step radius floor",
            Status::from_bool(worst >= -SWEEP_TOL),
            format!("min sup - floor {worst:.6e} over {} horizons", hs.len()),
        );
    }

    if let Some(cases) = sw.char_identity_cases.filter(|&c| c > 0) {
        let mut rows = Vec::with_capacity(cases);
        for i in 0..cases {
            let p = rng.random_range(1..=max_p);
            let n = if i % 2 == 0 { 2 } else { 4 };
            let alpha = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let beta = (0..p).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let c = SCLICoefficients::new(alpha, beta, 0.0, 1.0)?;
            let nu = ell * rng.random_range(0.01..=1.0);
            let (m, q) = char_identity(&c, nu, n)?;
            rows.push((p, n, nu, m, q));
        }
        art.write("char_identity.csv", |w| {
            writeln!(w, "case,p,n,nu,rho_matrix,rho_poly")?;
            for (i, (p, n, nu, m, q)) in rows.iter().enumerate() {
                writeln!(w, "{i},{p},{n},{nu:.16e},{m:.16e},{q:.16e}")?;
            }
            Ok(())
        })?;
        let worst = rows.iter().map(|r| (r.3 - r.4).abs()).fold(0.0, f64::max);
        art.outcome.line(
            "companion radius identity",
            Status::from_bool(worst <= IDENTITY_TOL),
            format!("max difference {worst:.3e} over {cases} cases"),
        );
    }
    Ok(())
}

fn slope_line(
    out: &mut Outcome,
    series: &[(f64, f64)],
    burn_in: Option<usize>,
    range: Option<[f64; 2]>,
) -> Result<()> {
    let fit = rate_fit(series, burn_in)?;
    let detail = format!(
        "slope {:.4}, r2 {:.4}, {} points",
        fit.slope, fit.r2, fit.points_used
    );
    match range {
        Some([lo, hi]) => out.line(
            "rate slope",
            Status::from_bool(fit.slope >= lo && fit.slope <= hi),
            format!("{detail}, range [{lo}, {hi}]"),
        ),
        None => out.info("rate slope", detail),
    }
    Ok(())
}

fn lowerbound(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let lb = cfg
        .lowerbound
        .as_ref()
        .ok_or_else(|| missing("lowerbound", cfg.command))?;
    let coeffs = cfg.coefficients()?;
    let ell = positive("lowerbound.ell", lb.ell)?;
    let d = cfg.radius()?;
    let ts = cfg.horizons()?;
    let grid = cfg.grid_points()?;
    let as_config = |e: Error| match e {
        Error::Contract(msg) => Error::Config(msg),
        other => other,
    };
    match lb.family {
        SweepFamily::MinMax => {
            let rep = lowerbound_experiment(&coeffs, ell, d, &ts, lb.n, grid).map_err(as_config)?;
            art.write("lowerbound.csv", |w| write_lowerbound_csv(&rep.rows, w))?;
            let out = &mut art.outcome;
            out.info("lower-bound case", rep.case.label());
            if let LowerBoundCase::Divergent { nu, rho } = rep.case {
                out.info(
                    "divergent witness",
                    format!("nu {nu:.6e}, spectral radius {rho:.12}"),
                );
            }
            if rep.case.converges() {
                let min_ratio = rep
                    .rows
                    .iter()
                    .map(|r| r.ratio)
                    .fold(f64::INFINITY, f64::min);
                if let Some(floor) = lb.min_ratio {
                    out.line(
                        "gradient gap floor",
                        Status::from_bool(min_ratio >= floor),
                        format!("min ratio {min_ratio:.6e}, floor {floor:e}"),
                    );
                }
                let series: Vec<(f64, f64)> = rep
                    .rows
                    .iter()
                    .map(|r| (r.horizon as f64, r.max_gradgap))
                    .collect();
                slope_line(out, &series, Some(0), lb.slope_range)?;
            } else {
                for r in &rep.rows {
                    let detail = match r.diverged_at {
                        Some(i) => format!("T = {}: diverged at iterate {i}", r.horizon),
                        None => format!("T = {}: max grad gap {:.6e}", r.horizon, r.max_gradgap),
                    };
                    out.info("witness run", detail);
                }
            }
        }
        SweepFamily::ConvexMin => {
            let rep = convexmin_experiment(&coeffs, ell, d, &ts, lb.n, grid).map_err(as_config)?;
            art.write("convexmin.csv", |w| write_convex_csv(&rep.rows, w))?;
            let out = &mut art.outcome;
            out.info("lower-bound case", rep.case.label());
            let err = rep
                .rows
                .iter()
                .map(|r| r.identity_rel_error())
                .fold(0.0, f64::max);
            out.line(
                "window suboptimality identity",
                Status::from_bool(err <= IDENTITY_TOL),
                format!("max relative error {err:.3e}"),
            );
            if rep.case.converges() {
                if let Some(floor) = lb.min_ratio {
                    let min_ratio = rep
                        .rows
                        .iter()
                        .map(|r| r.ratio)
                        .fold(f64::INFINITY, f64::min);
                    out.line(
                        "suboptimality floor",
                        Status::from_bool(min_ratio >= floor),
                        format!("min ratio {min_ratio:.6e}, floor {floor:e}"),
                    );
                }
                let series: Vec<(f64, f64)> = rep
                    .rows
                    .iter()
                    .map(|r| (r.horizon as f64, r.max_subopt))
                    .collect();
                slope_line(out, &series, Some(0), lb.slope_range)?;
            }
        }
    }
    Ok(())
}

fn regret(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let rc = cfg
        .regret
        .as_ref()
        .ok_or_else(|| missing("regret", cfg.command))?;
    let t = cfg.horizon()?;
    let eta = cfg.eta()?;
    let d = cfg.radius()?;
    let l = positive("regret.grad_bound", rc.grad_bound)?;
    let eg = eg_regret_demo(t, eta)?;
    let og = og_regret_run(
        &alternating_adversary(t),
        d,
        StepSchedule::inverse_sqrt(d, l),
    )?;
    art.write("regret.csv", |w| {
        writeln!(w, "t,eg_regret,eg_loss,og_regret")?;
        for i in 0..t {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e}",
                i + 1,
                eg.regret[i],
                eg.cumulative_loss[i],
                og.regret[i]
            )?;
        }
        Ok(())
    })?;
    let out = &mut art.outcome;
    let expected = t.div_ceil(2) as f64;
    let exact = (1..=t)
        .all(|s| eg.regret[s - 1] == s.div_ceil(2) as f64 && eg.cumulative_loss[s - 1] == 0.0);
    out.line(
        "eg demo",
        Status::from_bool(exact),
        format!(
            "regret {}, learner loss {}, expected {expected}",
            eg.regret[t - 1],
            eg.cumulative_loss[t - 1]
        ),
    );
    let avg = og.regret[t - 1] / t as f64;
    match rc.max_average_regret {
        Some(cap) => out.line(
            "optimistic regret",
            Status::from_bool(avg <= cap),
            format!("regret/T {avg:.6e}, cap {cap}"),
        ),
        None => out.info("optimistic regret", format!("regret/T {avg:.6e}")),
    }
    Ok(())
}

fn read_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", path.display())))?
        .split(',')
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Config(format!("column `{name}` not in {}", path.display())))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let parse = |s: &str, line: usize| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("line {line}: `{s}` is not a number")))
    };
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        let (Some(a), Some(b)) = (cells.get(ix), cells.get(iy)) else {
            return Err(Error::Config(format!("line {}: too few columns", i + 2)));
        };
        if a.trim().is_empty() || b.trim().is_empty() {
            continue;
        }
        out.push((parse(a, i + 2)?, parse(b, i + 2)?));
    }
    Ok(out)
}

fn ratefit(cfg: &ExperimentConfig, base: &Path, art: &mut Artifacts) -> Result<()> {
    let rf = cfg
        .ratefit
        .as_ref()
        .ok_or_else(|| missing("ratefit", cfg.command))?;
    let series = read_columns(&base.join(&rf.input), &rf.x, &rf.y)?;
    let fit = rate_fit(&series, rf.burn_in).map_err(|e| match e {
        Error::Contract(msg) => Error::Config(msg),
        other => other,
    })?;
    art.write("fit.csv", |w| {
        writeln!(w, "slope,intercept,r2,points_used")?;
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{}",
            fit.slope, fit.intercept, fit.r2, fit.points_used
        )?;
        Ok(())
    })?;
    slope_line(&mut art.outcome, &series, rf.burn_in, rf.slope_range)
}
