//! Subcommand wiring: each command resolves its effective configuration,
//! runs the core routines, and renders one deterministic report.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use orthoweak_core::asymptotics::{
    classify_regime, fit_exponent, sweep_path, Path as SelectionPath, Regime,
};
use orthoweak_core::exact::{expectation_closed_form, expectation_orthogonal, oracle_expectation};
use orthoweak_core::model::{first_order_shifts, make_selection, weak_value, ObservableA};
use orthoweak_core::probe::{derivative_integrals, overlaps, PointerOperator, ProbeState};
use orthoweak_core::series::{identity_residuals, orthogonal_p_series, orthogonal_q_series};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    self, bind_observable, parse_observable, parse_probe, FileConfig, ObservableSpec,
    DEFAULT_PROBE,
};
use crate::output::{document, route_label, sweep_csv, Json};
use crate::pool;
use crate::{CliError, CommandOutput};

#[derive(Parser)]
#[command(
    name = "orthoweak",
    version,
    about = "Conditioned pointer statistics for a weakly measured qubit"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact conditioned expectation for one selection pair
    Expectation(ExpectationArgs),
    /// Orthogonal-selection limit by formula and by series, with their gap
    Orthogonal(OrthogonalArgs),
    /// Weak value and the first-order pointer shifts it predicts
    WeakValue(WeakValueArgs),
    /// Closed form against the state-vector oracle over a seeded batch
    OracleCheck(OracleCheckArgs),
    /// One parameter over a grid; rows of expectation and probability
    Sweep(SweepArgs),
    /// Approach orthogonality along a path and fit the convergence rate
    Asymptote(AsymptoteArgs),
    /// Derivative-integral identity suite on the configured probe
    Identities(IdentitiesArgs),
}

#[derive(Args)]
struct IoOpts {
    /// key=value defaults, lower precedence than flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModelOpts {
    /// First observable eigenvalue
    #[arg(long, allow_negative_numbers = true)]
    a1: Option<f64>,
    /// Second observable eigenvalue
    #[arg(long, allow_negative_numbers = true)]
    a2: Option<f64>,
    /// Coupling strength
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Probe spec: gaussian:mean=..,sigma=..,kick=.. or file:path.csv
    #[arg(long)]
    probe: Option<String>,
}

#[derive(Args)]
struct ObservableOpt {
    /// Pointer observable: q, p, or file:path.csv
    #[arg(long)]
    observable: Option<String>,
}

#[derive(Args)]
struct SelectionOpts {
    /// Pre-selection weight, in [0, 1]
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Selection phase, in [0, 2*pi)
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Magnitude of the selection-pair overlap, in [0, 1]
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct ExpectationArgs {
    #[command(flatten)]
    io: IoOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    observable: ObservableOpt,
    #[command(flatten)]
    selection: SelectionOpts,
}

#[derive(Args)]
struct OrthogonalArgs {
    #[command(flatten)]
    io: IoOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    observable: ObservableOpt,
    /// Series depth
    #[arg(long)]
    n_max: Option<usize>,
}

#[derive(Args)]
struct WeakValueArgs {
    #[command(flatten)]
    io: IoOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    selection: SelectionOpts,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[command(flatten)]
    io: IoOpts,
    /// Batch seed
    #[arg(long)]
    seed: Option<u64>,
    /// Number of random parameter tuples
    #[arg(long)]
    count: Option<usize>,
    /// Allowed relative disagreement
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    io: IoOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    observable: ObservableOpt,
    #[command(flatten)]
    selection: SelectionOpts,
    /// Which knob to sweep: alpha, x, theta, or g
    #[arg(long)]
    param: Option<String>,
    /// Grid start
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Grid end
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Grid size
    #[arg(long)]
    points: Option<usize>,
    /// Grid spacing: linear or geometric
    #[arg(long)]
    scale: Option<String>,
    /// Report format: csv or json
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct AsymptoteArgs {
    #[command(flatten)]
    io: IoOpts,
    #[command(flatten)]
    model: ModelOpts,
    #[command(flatten)]
    observable: ObservableOpt,
    /// Competition exponent tying the weight to the scale; omit to hold x fixed
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Fixed pre-selection weight for the no-competition path
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Selection phase, in [0, 2*pi)
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta_max: Option<f64>,
    /// Geometric grid size
    #[arg(long)]
    points: Option<usize>,
    /// Allowed gap between fitted and predicted exponent
    #[arg(long, allow_negative_numbers = true)]
    slope_tolerance: Option<f64>,
    /// Allowed relative residual at the smallest beta on critical paths
    #[arg(long, allow_negative_numbers = true)]
    plateau_tolerance: Option<f64>,
    /// Report format: csv or json
    #[arg(long)]
    output: Option<String>,
}

#[derive(Args)]
struct IdentitiesArgs {
    #[command(flatten)]
    io: IoOpts,
    /// Probe spec: gaussian:mean=..,sigma=..,kick=.. or file:path.csv
    #[arg(long)]
    probe: Option<String>,
    /// Highest identity order to exercise
    #[arg(long)]
    n_max: Option<usize>,
    /// Allowed worst residual
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
}

pub fn dispatch(cli: Cli) -> Result<CommandOutput, CliError> {
    match cli.command {
        Cmd::Expectation(a) => cmd_expectation(a),
        Cmd::Orthogonal(a) => cmd_orthogonal(a),
        Cmd::WeakValue(a) => cmd_weak_value(a),
        Cmd::OracleCheck(a) => cmd_oracle_check(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Asymptote(a) => cmd_asymptote(a),
        Cmd::Identities(a) => cmd_identities(a),
    }
}

struct ResolvedModel {
    a1: f64,
    a2: f64,
    g: f64,
    probe_spec: String,
    obs: ObservableA,
    probe: ProbeState,
}

fn resolve_model(m: &ModelOpts, file: &FileConfig) -> Result<ResolvedModel, CliError> {
    let a1 = config::resolve(m.a1, file, "a1", 1.0)?;
    let a2 = config::resolve(m.a2, file, "a2", -1.0)?;
    let g = config::resolve(m.g, file, "g", 0.1)?;
    let probe_spec =
        config::resolve(m.probe.clone(), file, "probe", DEFAULT_PROBE.to_string())?;
    let obs = ObservableA::new(a1, a2)?;
    let probe = parse_probe(&probe_spec)?;
    Ok(ResolvedModel { a1, a2, g, probe_spec, obs, probe })
}

fn resolve_observable(
    flag: &Option<String>,
    file: &FileConfig,
) -> Result<(String, ObservableSpec), CliError> {
    let text = config::resolve(flag.clone(), file, "observable", "q".to_string())?;
    let spec = parse_observable(&text)?;
    Ok((text, spec))
}

fn resolve_selection(
    s: &SelectionOpts,
    file: &FileConfig,
) -> Result<(f64, f64, f64), CliError> {
    let x = config::resolve(s.x, file, "x", FRAC_1_SQRT_2)?;
    let theta = config::resolve(s.theta, file, "theta", 0.0)?;
    let alpha = config::resolve(s.alpha, file, "alpha", 0.5)?;
    Ok((x, theta, alpha))
}

fn finish(text: String, out: &Option<PathBuf>, code: i32) -> Result<CommandOutput, CliError> {
    match out {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(CommandOutput { stdout: String::new(), stderr: String::new(), code })
        }
        None => Ok(CommandOutput { stdout: text, stderr: String::new(), code }),
    }
}

fn diagnostics_json(map: &BTreeMap<&'static str, f64>) -> Json {
    Json::Obj(map.iter().map(|(k, v)| (*k, Json::Num(*v))).collect())
}

const EXPECTATION_KEYS: &[&str] =
    &["a1", "a2", "g", "probe", "observable", "x", "theta", "alpha"];

fn cmd_expectation(args: ExpectationArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(EXPECTATION_KEYS)?;
    let model = resolve_model(&args.model, &file)?;
    let (obs_text, obs_spec) = resolve_observable(&args.observable.observable, &file)?;
    let (x, theta, alpha) = resolve_selection(&args.selection, &file)?;
    let sel = make_selection(x, theta, alpha)?;
    let (probe, m_op) = bind_observable(&obs_spec, model.probe)?;
    let ov = overlaps(&probe, model.g, &model.obs, &m_op)?;
    let res = expectation_closed_form(&sel, &ov)?;

    let config = Json::Obj(vec![
        ("subcommand", Json::Str("expectation".into())),
        ("a1", Json::Num(model.a1)),
        ("a2", Json::Num(model.a2)),
        ("g", Json::Num(model.g)),
        ("x", Json::Num(x)),
        ("theta", Json::Num(theta)),
        ("alpha", Json::Num(alpha)),
        ("probe", Json::Str(model.probe_spec)),
        ("observable", Json::Str(obs_text)),
    ]);
    let results = Json::Obj(vec![
        ("expectation", Json::Num(res.expectation)),
        ("postselection_probability", Json::Num(res.postselection_probability)),
        ("route", Json::Str(route_label(res.route).into())),
    ]);
    let diagnostics = diagnostics_json(&res.diagnostics);
    finish(document(config, results, diagnostics), &args.io.out, 0)
}

const ORTHOGONAL_KEYS: &[&str] = &["a1", "a2", "g", "probe", "observable", "n-max"];

fn cmd_orthogonal(args: OrthogonalArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(ORTHOGONAL_KEYS)?;
    let model = resolve_model(&args.model, &file)?;
    let (obs_text, obs_spec) = resolve_observable(&args.observable.observable, &file)?;
    let n_max = config::resolve(args.n_max, &file, "n-max", 12)?;
    let (probe, m_op) = bind_observable(&obs_spec, model.probe)?;
    let ov = overlaps(&probe, model.g, &model.obs, &m_op)?;
    let limit = expectation_orthogonal(&ov)?;

    // the series route exists for position and momentum readouts only
    let series = match m_op {
        PointerOperator::Position => {
            let table = derivative_integrals(&probe, n_max)?;
            Some(("series-q", orthogonal_q_series(&table, model.g, &model.obs)?))
        }
        PointerOperator::Momentum => {
            let table = derivative_integrals(&probe, n_max)?;
            Some(("series-p", orthogonal_p_series(&table, model.g, &model.obs)?))
        }
        PointerOperator::MultiplicationBy(_) => None,
    };

    let config = Json::Obj(vec![
        ("subcommand", Json::Str("orthogonal".into())),
        ("a1", Json::Num(model.a1)),
        ("a2", Json::Num(model.a2)),
        ("g", Json::Num(model.g)),
        ("probe", Json::Str(model.probe_spec)),
        ("observable", Json::Str(obs_text)),
        ("n_max", Json::Int(n_max as i64)),
    ]);
    let (series_json, difference) = match &series {
        Some((label, s)) => (
            Json::Obj(vec![
                ("value", Json::Num(s.value)),
                ("terms_used", Json::Int(s.terms_used as i64)),
                ("last_term_ratio", Json::Num(s.last_term_ratio)),
                ("converged", Json::Bool(s.converged)),
                ("route", Json::Str((*label).into())),
            ]),
            Json::Num((limit.expectation - s.value).abs()),
        ),
        None => (Json::Null, Json::Null),
    };
    let results = Json::Obj(vec![
        (
            "orthogonal",
            Json::Obj(vec![
                ("expectation", Json::Num(limit.expectation)),
                (
                    "postselection_probability",
                    Json::Num(limit.postselection_probability),
                ),
                ("route", Json::Str(route_label(limit.route).into())),
            ]),
        ),
        ("series", series_json),
        ("difference", difference),
    ]);
    let diagnostics = diagnostics_json(&limit.diagnostics);
    finish(document(config, results, diagnostics), &args.io.out, 0)
}

const WEAK_VALUE_KEYS: &[&str] = &["a1", "a2", "g", "probe", "x", "theta", "alpha"];

fn cmd_weak_value(args: WeakValueArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(WEAK_VALUE_KEYS)?;
    let model = resolve_model(&args.model, &file)?;
    let (x, theta, alpha) = resolve_selection(&args.selection, &file)?;
    let sel = make_selection(x, theta, alpha)?;
    let aw = weak_value(&sel, &model.obs)?;
    let moments = model.probe.moments();
    let pred = first_order_shifts(aw, model.g, &moments);

    let config = Json::Obj(vec![
        ("subcommand", Json::Str("weak-value".into())),
        ("a1", Json::Num(model.a1)),
        ("a2", Json::Num(model.a2)),
        ("g", Json::Num(model.g)),
        ("x", Json::Num(x)),
        ("theta", Json::Num(theta)),
        ("alpha", Json::Num(alpha)),
        ("probe", Json::Str(model.probe_spec)),
    ]);
    let results = Json::Obj(vec![
        ("re", Json::Num(aw.re)),
        ("im", Json::Num(aw.im)),
        ("first_order_mean_q", Json::Num(pred.mean_q)),
        ("first_order_mean_p", Json::Num(pred.mean_p)),
    ]);
    let diagnostics = Json::Obj(vec![
        ("initial_mean_q", Json::Num(moments.mean_q)),
        ("initial_mean_p", Json::Num(moments.mean_p)),
        ("initial_var_p", Json::Num(moments.var_p)),
    ]);
    finish(document(config, results, diagnostics), &args.io.out, 0)
}

const ORACLE_KEYS: &[&str] = &["seed", "count", "tolerance"];

/// One random evaluation point; the probe rides along so each tuple is
/// self-contained and the batch can fan out.
struct OracleTuple {
    x: f64,
    theta: f64,
    alpha: f64,
    mean: f64,
    sigma: f64,
    kick: f64,
    a1: f64,
    a2: f64,
    g: f64,
}

fn draw_tuple(rng: &mut ChaCha8Rng) -> OracleTuple {
    let x = rng.gen_range(0.05..0.95);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let alpha = rng.gen_range(0.0..1.0);
    let sigma = rng.gen_range(0.5..2.0);
    let mean = rng.gen_range(-1.0..1.0);
    let kick = rng.gen_range(-1.0..1.0);
    let a1 = rng.gen_range(-2.0..2.0);
    let gap = rng.gen_range(0.2..3.0);
    // keep the branch separation under two probe widths
    let g = rng.gen_range(0.01..1.0) * 2.0 * sigma / gap;
    OracleTuple { x, theta, alpha, mean, sigma, kick, a1, a2: a1 - gap, g }
}

fn eval_tuple(t: &OracleTuple) -> Result<[f64; 2], String> {
    let run = |op: PointerOperator| -> Result<f64, String> {
        let sel = make_selection(t.x, t.theta, t.alpha).map_err(|e| e.to_string())?;
        let obs = ObservableA::new(t.a1, t.a2).map_err(|e| e.to_string())?;
        let probe =
            orthoweak_core::probe::gaussian_probe(t.mean, t.sigma, t.kick).map_err(|e| e.to_string())?;
        let ov = overlaps(&probe, t.g, &obs, &op).map_err(|e| e.to_string())?;
        let closed = expectation_closed_form(&sel, &ov).map_err(|e| e.to_string())?;
        let oracle =
            oracle_expectation(&sel, &obs, &probe, t.g, &op).map_err(|e| e.to_string())?;
        Ok((closed.expectation - oracle.expectation).abs()
            / (1.0 + closed.expectation.abs()))
    };
    Ok([run(PointerOperator::Position)?, run(PointerOperator::Momentum)?])
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(ORACLE_KEYS)?;
    let seed = config::resolve(args.seed, &file, "seed", 17u64)?;
    let count = config::resolve(args.count, &file, "count", 1000usize)?;
    let tolerance = config::resolve(args.tolerance, &file, "tolerance", 1e-8)?;
    if count == 0 {
        return Err(CliError::Invalid("count must be at least 1".to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<OracleTuple> = (0..count).map(|_| draw_tuple(&mut rng)).collect();
    let evals = pool::parallel_map(&tuples, eval_tuple);

    let mut worst = f64::NEG_INFINITY;
    let mut worst_index = 0usize;
    let mut worst_op = "q";
    for (i, eval) in evals.iter().enumerate() {
        let [eq, ep] = eval.as_ref().map_err(|e| CliError::Invalid(e.clone()))?;
        if *eq > worst {
            worst = *eq;
            worst_index = i;
            worst_op = "q";
        }
        if *ep > worst {
            worst = *ep;
            worst_index = i;
            worst_op = "p";
        }
    }
    let pass = worst <= tolerance;
    let t = &tuples[worst_index];

    let config = Json::Obj(vec![
        ("subcommand", Json::Str("oracle-check".into())),
        ("seed", Json::Int(seed as i64)),
        ("count", Json::Int(count as i64)),
        ("tolerance", Json::Num(tolerance)),
    ]);
    let results = Json::Obj(vec![
        ("evaluations", Json::Int(2 * count as i64)),
        ("worst_relative_error", Json::Num(worst)),
        ("worst_observable", Json::Str(worst_op.into())),
        ("pass", Json::Bool(pass)),
    ]);
    let diagnostics = Json::Obj(vec![
        (
            "worst_case",
            Json::Obj(vec![
                ("x", Json::Num(t.x)),
                ("theta", Json::Num(t.theta)),
                ("alpha", Json::Num(t.alpha)),
                ("mean", Json::Num(t.mean)),
                ("sigma", Json::Num(t.sigma)),
                ("kick", Json::Num(t.kick)),
                ("a1", Json::Num(t.a1)),
                ("a2", Json::Num(t.a2)),
                ("g", Json::Num(t.g)),
            ]),
        ),
    ]);
    finish(
        document(config, results, diagnostics),
        &args.io.out,
        if pass { 0 } else { 1 },
    )
}

const SWEEP_KEYS: &[&str] = &[
    "a1", "a2", "g", "probe", "observable", "x", "theta", "alpha", "param", "from", "to",
    "points", "scale", "output",
];

fn grid_values(from: f64, to: f64, points: usize, scale: &str) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::Invalid("points must be at least 1".to_string()));
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    match scale {
        "linear" => Ok((0..points)
            .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
            .collect()),
        "geometric" => {
            if from == 0.0 || to == 0.0 || (from < 0.0) != (to < 0.0) {
                return Err(CliError::Invalid(
                    "geometric grids need endpoints of one nonzero sign".to_string(),
                ));
            }
            let ratio = to / from;
            Ok((0..points)
                .map(|i| from * ratio.powf(i as f64 / (points - 1) as f64))
                .collect())
        }
        other => Err(CliError::Invalid(format!(
            "scale {other:?}: expected linear or geometric"
        ))),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(SWEEP_KEYS)?;
    let model = resolve_model(&args.model, &file)?;
    let (obs_text, obs_spec) = resolve_observable(&args.observable.observable, &file)?;
    let (x0, theta0, alpha0) = resolve_selection(&args.selection, &file)?;
    let param = config::resolve(args.param.clone(), &file, "param", "alpha".to_string())?;
    let from = config::resolve(args.from, &file, "from", 0.1)?;
    let to = config::resolve(args.to, &file, "to", 0.9)?;
    let points = config::resolve(args.points, &file, "points", 9usize)?;
    let scale = config::resolve(args.scale.clone(), &file, "scale", "linear".to_string())?;
    let output = config::resolve(args.output.clone(), &file, "output", "csv".to_string())?;
    if !matches!(param.as_str(), "alpha" | "x" | "theta" | "g") {
        return Err(CliError::Invalid(format!(
            "param {param:?}: expected alpha, x, theta, or g"
        )));
    }
    if output != "csv" && output != "json" {
        return Err(CliError::Invalid(format!("output {output:?}: expected csv or json")));
    }

    let values = grid_values(from, to, points, &scale)?;
    let (probe, m_op) = bind_observable(&obs_spec, model.probe.clone())?;
    // the overlap set depends on g only through the displacement, so a
    // non-g sweep shares one
    let shared_ov = if param == "g" {
        None
    } else {
        Some(overlaps(&probe, model.g, &model.obs, &m_op)?)
    };

    let evals = pool::parallel_map(&values, |&v| -> Result<[f64; 3], String> {
        let (mut x, mut theta, mut alpha, mut g) = (x0, theta0, alpha0, model.g);
        match param.as_str() {
            "alpha" => alpha = v,
            "x" => x = v,
            "theta" => theta = v,
            _ => g = v,
        }
        let sel = make_selection(x, theta, alpha).map_err(|e| e.to_string())?;
        let ov = match &shared_ov {
            Some(ov) => ov.clone(),
            None => overlaps(&probe, g, &model.obs, &m_op).map_err(|e| e.to_string())?,
        };
        let res = expectation_closed_form(&sel, &ov).map_err(|e| e.to_string())?;
        Ok([v, res.expectation, res.postselection_probability])
    });
    let mut rows = Vec::with_capacity(values.len());
    for eval in evals {
        rows.push(eval.map_err(CliError::Invalid)?);
    }

    let text = if output == "csv" {
        sweep_csv(&rows)
    } else {
        let config = Json::Obj(vec![
            ("subcommand", Json::Str("sweep".into())),
            ("param", Json::Str(param.clone())),
            ("from", Json::Num(from)),
            ("to", Json::Num(to)),
            ("points", Json::Int(points as i64)),
            ("scale", Json::Str(scale)),
            ("a1", Json::Num(model.a1)),
            ("a2", Json::Num(model.a2)),
            ("g", Json::Num(model.g)),
            ("x", Json::Num(x0)),
            ("theta", Json::Num(theta0)),
            ("alpha", Json::Num(alpha0)),
            ("probe", Json::Str(model.probe_spec)),
            ("observable", Json::Str(obs_text)),
        ]);
        let results = Json::Obj(vec![(
            "rows",
            Json::Arr(
                rows.iter()
                    .map(|r| {
                        Json::Obj(vec![
                            ("param", Json::Num(r[0])),
                            ("expectation", Json::Num(r[1])),
                            ("postselection_probability", Json::Num(r[2])),
                        ])
                    })
                    .collect(),
            ),
        )]);
        document(config, results, Json::Obj(vec![]))
    };
    finish(text, &args.io.out, 0)
}

const ASYMPTOTE_KEYS: &[&str] = &[
    "a1", "a2", "g", "probe", "observable", "s", "x", "theta", "beta-min", "beta-max",
    "points", "slope-tolerance", "plateau-tolerance", "output",
];

fn regime_label(regime: Regime) -> &'static str {
    match regime {
        Regime::NoCompetition => "no-competition",
        Regime::SubUnit => "sub-unit",
        Regime::Critical => "critical",
        Regime::SuperUnit => "super-unit",
    }
}

fn cmd_asymptote(args: AsymptoteArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(ASYMPTOTE_KEYS)?;
    let model = resolve_model(&args.model, &file)?;
    let (obs_text, obs_spec) = resolve_observable(&args.observable.observable, &file)?;
    let s = config::resolve_opt(args.s, &file, "s")?;
    let x = config::resolve(args.x, &file, "x", FRAC_1_SQRT_2)?;
    let theta = config::resolve(args.theta, &file, "theta", 0.0)?;
    let beta_min = config::resolve(args.beta_min, &file, "beta-min", 1e-4)?;
    let beta_max = config::resolve(args.beta_max, &file, "beta-max", 0.1)?;
    let points = config::resolve(args.points, &file, "points", 12usize)?;
    let slope_tolerance = config::resolve(args.slope_tolerance, &file, "slope-tolerance", 0.05)?;
    let plateau_tolerance =
        config::resolve(args.plateau_tolerance, &file, "plateau-tolerance", 1e-6)?;
    let output = config::resolve(args.output.clone(), &file, "output", "json".to_string())?;
    if output != "csv" && output != "json" {
        return Err(CliError::Invalid(format!("output {output:?}: expected csv or json")));
    }
    if !(beta_min.is_finite() && beta_min > 0.0 && beta_max > beta_min) {
        return Err(CliError::Invalid(
            "need 0 < beta-min < beta-max for the approach grid".to_string(),
        ));
    }
    if points < 2 {
        return Err(CliError::Invalid("points must be at least 2".to_string()));
    }

    let path = match s {
        Some(s) => SelectionPath::Power { s },
        None => SelectionPath::FixedX { x },
    };
    let (probe, m_op) = bind_observable(&obs_spec, model.probe)?;
    let ov = overlaps(&probe, model.g, &model.obs, &m_op)?;
    let report = classify_regime(&path, theta, &ov)?;
    let betas = grid_values(beta_min, beta_max, points, "geometric")?;
    let sweep = sweep_path(&path, &betas, theta, &ov)?;
    let rows: Vec<[f64; 3]> = sweep
        .iter()
        .map(|p| [p.beta, p.expectation, p.postselection_probability])
        .collect();

    // critical paths have no power law to fit; check the plateau at the
    // smallest beta instead
    let (fit, plateau_residual, pass) = if report.regime == Regime::Critical {
        let residual = (sweep[0].expectation - report.predicted_limit).abs();
        let pass = residual <= plateau_tolerance * (1.0 + report.predicted_limit.abs());
        (None, Some(residual), pass)
    } else {
        let values: Vec<f64> = sweep.iter().map(|p| p.expectation).collect();
        let fit = fit_exponent(&betas, &values, report.predicted_limit)?;
        let pass = (fit.exponent - report.leading_exponent).abs() <= slope_tolerance;
        (Some(fit), None, pass)
    };

    let code = if pass { 0 } else { 1 };
    if output == "csv" {
        let mut summary = String::new();
        summary.push_str(&format!("regime={}\n", regime_label(report.regime)));
        summary.push_str(&format!("predicted_exponent={}\n", report.leading_exponent));
        match &fit {
            Some(f) => summary.push_str(&format!("fitted_exponent={}\n", f.exponent)),
            None => summary.push_str("fitted_exponent=plateau\n"),
        }
        summary.push_str(&format!("verdict={}\n", if pass { "pass" } else { "fail" }));
        let out = finish(sweep_csv(&rows), &args.io.out, code)?;
        return Ok(CommandOutput { stderr: summary, ..out });
    }

    let config = Json::Obj(vec![
        ("subcommand", Json::Str("asymptote".into())),
        ("s", s.map(Json::Num).unwrap_or(Json::Null)),
        ("x", Json::Num(x)),
        ("theta", Json::Num(theta)),
        ("beta_min", Json::Num(beta_min)),
        ("beta_max", Json::Num(beta_max)),
        ("points", Json::Int(points as i64)),
        ("a1", Json::Num(model.a1)),
        ("a2", Json::Num(model.a2)),
        ("g", Json::Num(model.g)),
        ("probe", Json::Str(model.probe_spec)),
        ("observable", Json::Str(obs_text)),
        ("slope_tolerance", Json::Num(slope_tolerance)),
        ("plateau_tolerance", Json::Num(plateau_tolerance)),
    ]);
    let results = Json::Obj(vec![
        ("regime", Json::Str(regime_label(report.regime).into())),
        ("predicted_limit", Json::Num(report.predicted_limit)),
        ("leading_exponent", Json::Num(report.leading_exponent)),
        ("speed_exponent", Json::Num(report.speed_exponent)),
        (
            "linear_coefficient",
            report.linear_coefficient.map(Json::Num).unwrap_or(Json::Null),
        ),
        (
            "fitted_exponent",
            fit.as_ref().map(|f| Json::Num(f.exponent)).unwrap_or(Json::Null),
        ),
        (
            "r_squared",
            fit.as_ref().map(|f| Json::Num(f.r_squared)).unwrap_or(Json::Null),
        ),
        (
            "retained",
            fit.as_ref().map(|f| Json::Int(f.retained as i64)).unwrap_or(Json::Null),
        ),
        (
            "plateau_residual",
            plateau_residual.map(Json::Num).unwrap_or(Json::Null),
        ),
        ("pass", Json::Bool(pass)),
        (
            "rows",
            Json::Arr(
                rows.iter()
                    .map(|r| {
                        Json::Obj(vec![
                            ("beta", Json::Num(r[0])),
                            ("expectation", Json::Num(r[1])),
                            ("postselection_probability", Json::Num(r[2])),
                        ])
                    })
                    .collect(),
            ),
        ),
    ]);
    finish(document(config, results, Json::Obj(vec![])), &args.io.out, code)
}

const IDENTITIES_KEYS: &[&str] = &["probe", "n-max", "tolerance"];

fn cmd_identities(args: IdentitiesArgs) -> Result<CommandOutput, CliError> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    file.reject_unknown(IDENTITIES_KEYS)?;
    let probe_spec =
        config::resolve(args.probe.clone(), &file, "probe", DEFAULT_PROBE.to_string())?;
    let n_max = config::resolve(args.n_max, &file, "n-max", 4usize)?;
    let tolerance = config::resolve(args.tolerance, &file, "tolerance", 1e-8)?;
    let probe = parse_probe(&probe_spec)?;
    let report = identity_residuals(&probe, n_max)?;
    let pass = report.max_residual <= tolerance;

    let config = Json::Obj(vec![
        ("subcommand", Json::Str("identities".into())),
        ("probe", Json::Str(probe_spec)),
        ("n_max", Json::Int(n_max as i64)),
        ("tolerance", Json::Num(tolerance)),
    ]);
    let results = Json::Obj(vec![
        ("checks", Json::Int(report.checks as i64)),
        ("max_residual", Json::Num(report.max_residual)),
        ("worst_family", Json::Str(report.worst_family.into())),
        ("pass", Json::Bool(pass)),
    ]);
    finish(
        document(config, results, Json::Obj(vec![])),
        &args.io.out,
        if pass { 0 } else { 1 },
    )
}
