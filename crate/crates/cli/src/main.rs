//! `pplab`: pseudo-probability schemes, weak values and nonclassicality
//! tests from the command line. Reports are JSON.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 on numerical failure.

mod input;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pplab::game::{evaluate_strategy, time_grid, DEFAULT_WINDOW};
use pplab::geometry::{make_entanglement_geometry, BlochVector, UnitVector3, STANDARD_FRAME};
use pplab::nonclassicality::{self as nc, DiscordOptions, LinearVariant, NonlinearVariant, TestReport, VERDICT_TOL};
use pplab::pointer::{proportionality_check, simulate_pointers, PointerConfig};
use pplab::pseudo::{build_pp, min_eigen_certificate, Prescription};
use pplab::scheme::{build_scheme, negativity_report_with_tol, ObservableSpec};
use pplab::weak::weak_value;
use pplab::DensityMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::StateArgs;

#[derive(Parser)]
#[command(name = "pplab", version, about = "Pseudo-projections, weak values and nonclassicality tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Spaces of JSON indentation; 0 for compact output.
    #[arg(long, global = true, value_name = "N", default_value_t = 2)]
    json_indent: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Pseudo-probability schemes.
    #[command(subcommand)]
    Scheme(SchemeCmd),
    /// Pseudo-projection operators.
    #[command(subcommand)]
    Pp(PpCmd),
    /// Weak values.
    #[command(subcommand)]
    Weak(WeakCmd),
    /// Run a nonclassicality test.
    Test(TestArgs),
    /// Weak-measurement pointer simulation.
    #[command(subcommand)]
    Pointer(PointerCmd),
    /// The Larmor-precession game.
    #[command(subcommand)]
    Game(GameCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum PrescriptionArg {
    Unit,
    Symmetrized,
}

impl From<PrescriptionArg> for Prescription {
    fn from(p: PrescriptionArg) -> Self {
        match p {
            PrescriptionArg::Unit => Prescription::Unit,
            PrescriptionArg::Symmetrized => Prescription::Symmetrized,
        }
    }
}

#[derive(Subcommand)]
enum SchemeCmd {
    /// Tabulate the scheme of a state for dichotomic axis observables.
    Build {
        #[command(flatten)]
        state: StateArgs,
        /// Observable `[SUBSYSTEM:]X,Y,Z`; repeat in order.
        #[arg(long = "obs", value_name = "[S:]X,Y,Z", required = true, allow_hyphen_values = true)]
        observables: Vec<String>,
        #[arg(long, value_enum, default_value = "unit")]
        prescription: PrescriptionArg,
    },
}

#[derive(Subcommand)]
enum PpCmd {
    /// Minimum eigenvalue and witness of a qubit pseudo-projection.
    Eig {
        /// Factor projector `X,Y,Z[:+|:-]`; repeat in order.
        #[arg(long = "proj", value_name = "X,Y,Z[:±]", required = true, allow_hyphen_values = true)]
        projectors: Vec<String>,
        #[arg(long, value_enum, default_value = "unit")]
        prescription: PrescriptionArg,
    },
}

#[derive(Subcommand)]
enum WeakCmd {
    /// Weak value of sigma.n (or a matrix from a file) between pre- and post-selection.
    Value {
        #[command(flatten)]
        state: StateArgs,
        /// Observable sigma.n on a qubit.
        #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true, conflicts_with = "op_file")]
        axis: Option<String>,
        /// Observable matrix from a JSON file {"dim", "re", "im"}.
        #[arg(long, value_name = "FILE")]
        op_file: Option<PathBuf>,
        /// Post-selected qubit Bloch vector.
        #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true, conflicts_with = "post_state")]
        post_bloch: Option<String>,
        /// Post-selected state from a JSON file.
        #[arg(long, value_name = "FILE")]
        post_state: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TestName {
    Coherence,
    BooleanDep,
    BooleanIndep,
    Distributivity,
    Chsh,
    #[value(name = "ent-linear-1")]
    EntLinear1,
    #[value(name = "ent-linear-2")]
    EntLinear2,
    #[value(name = "ent-nl-1")]
    EntNl1,
    #[value(name = "ent-nl-2")]
    EntNl2,
    #[value(name = "ent-nl-3")]
    EntNl3,
    Discord,
}

#[derive(Args)]
struct TestArgs {
    #[arg(value_enum)]
    name: TestName,
    #[command(flatten)]
    state: StateArgs,
    /// Doublet angle in radians.
    #[arg(long, value_name = "RAD", conflicts_with = "alpha_scan")]
    alpha: Option<String>,
    /// Batch over alpha: START:STOP:STEP (radians); emits an array of reports.
    #[arg(long, value_name = "A:B:S")]
    alpha_scan: Option<String>,
    /// First axis (coherence, Boolean and distributivity tests; CHSH A1).
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    a1: Option<String>,
    /// Second axis (CHSH A2).
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    a2: Option<String>,
    /// Third axis (distributivity).
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    a3: Option<String>,
    /// Second-qubit axis: CHSH B1, or the first discord doublet axis.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    b1: Option<String>,
    /// Second-qubit axis: CHSH B2, or the second discord doublet axis.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    b2: Option<String>,
    /// Qubit-1 frame for the entanglement tests: nine numbers, three axes.
    #[arg(long, value_name = "9 NUMBERS", allow_hyphen_values = true)]
    frame_a: Option<String>,
    /// Qubit-2 frame for the entanglement tests.
    #[arg(long, value_name = "9 NUMBERS", allow_hyphen_values = true)]
    frame_b: Option<String>,
}

#[derive(Subcommand)]
enum PointerCmd {
    /// Simulate N <= 3 pointers coupled to a qubit and read `<x_1 ... x_N>`.
    Sim {
        #[command(flatten)]
        state: StateArgs,
        /// Coupled projector `X,Y,Z[:+|:-]`; repeat for each pointer.
        #[arg(long = "proj", value_name = "X,Y,Z[:±]", required = true, allow_hyphen_values = true)]
        projectors: Vec<String>,
        /// Post-selected Bloch vector; default: no post-selection (1/2).
        #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
        post_bloch: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        grid_points: usize,
        /// Grid half-width in units of sigma.
        #[arg(long, default_value_t = 8.0)]
        halfwidth: f64,
        /// Also fit the correlation against g^N over these couplings.
        #[arg(long, value_name = "G1,G2,G3,..", allow_hyphen_values = true)]
        couplings: Option<String>,
    },
}

#[derive(Subcommand)]
enum GameCmd {
    /// Score a strategy: initial Bloch vector plus precession axis.
    Run {
        /// Initial Bloch vector.
        #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
        bloch: String,
        #[arg(long, value_name = "X,Y,Z", default_value = "0,0,1", allow_hyphen_values = true)]
        axis: String,
        /// Larmor frequency (radians per unit time).
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        omega: String,
        /// Angle of the observable pair in the xy-plane (radians).
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        theta: String,
        /// Start of the play window [default: 0].
        #[arg(long, value_name = "T", allow_hyphen_values = true)]
        t_min: Option<String>,
        /// End of the play window [default: 2 pi].
        #[arg(long, value_name = "T", allow_hyphen_values = true)]
        t_max: Option<String>,
        /// Number of time points, endpoints included.
        #[arg(long, default_value_t = 201)]
        steps: usize,
    },
}

/// A failure of the numerics (as opposed to the input).
#[derive(Debug)]
struct Numerical(String);

impl std::fmt::Display for Numerical {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "numerical failure: {}", self.0)
    }
}

impl std::error::Error for Numerical {}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<Numerical>().is_some() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<pplab::Error>() {
            return if err.is_numerical() { 2 } else { 1 };
        }
    }
    1
}

fn tolerance() -> Result<f64> {
    match std::env::var("PPLAB_TOL") {
        Ok(s) => {
            let t: f64 = s.trim().parse().with_context(|| format!("PPLAB_TOL={s:?} is not a number"))?;
            if !(t.is_finite() && t >= 0.0) {
                bail!("PPLAB_TOL must be a non-negative number");
            }
            Ok(t)
        }
        Err(_) => Ok(VERDICT_TOL),
    }
}

fn finalize(report: TestReport, tol: f64) -> Result<TestReport> {
    let report = report.with_tolerance(tol);
    report.self_check().map_err(|e| Numerical(e.to_string()))?;
    // The serialized form must re-validate on its own.
    let back: TestReport = serde_json::from_value(serde_json::to_value(&report)?)?;
    if back.recompute_statistic().is_none_or(|s| (s - report.statistic).abs() > nc::CONSISTENCY_TOL) {
        return Err(Numerical("serialized report does not reproduce its statistic".into()).into());
    }
    Ok(report)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn qubit_state(state: &StateArgs) -> Result<DensityMatrix> {
    let (rho, _) = state.require()?;
    if rho.dim() != 2 {
        bail!("this test needs a qubit state (use --bloch or a 2x2 --state file)");
    }
    Ok(rho)
}

fn two_qubit_state(state: &StateArgs) -> Result<DensityMatrix> {
    let (rho, _) = state.require()?;
    if rho.dim() != 4 {
        bail!("this test needs a two-qubit state (use --werner or a 4x4 --state file)");
    }
    Ok(rho)
}

fn axis_or(arg: &Option<String>, default: UnitVector3) -> Result<UnitVector3> {
    arg.as_deref().map(input::direction).transpose().map(|a| a.unwrap_or(default))
}

fn default_alpha(name: TestName) -> Option<f64> {
    Some(match name {
        TestName::EntLinear1 => LinearVariant::I.alpha_range().1,
        TestName::EntLinear2 => LinearVariant::II.alpha_range().1,
        TestName::EntNl1 => NonlinearVariant::I.alpha_range().1,
        TestName::EntNl2 => NonlinearVariant::II.alpha_range().1,
        TestName::EntNl3 => NonlinearVariant::III.alpha_range().1,
        TestName::Discord => 3.0 * PI / 4.0,
        _ => return None,
    })
}

fn run_test(args: &TestArgs, alpha: Option<f64>) -> Result<TestReport> {
    use TestName::*;
    let (z, x) = (UnitVector3::Z, UnitVector3::X);
    let report = match args.name {
        Coherence => nc::coherence_test(&qubit_state(&args.state)?, axis_or(&args.a1, z)?, axis_or(&args.a2, x)?)?,
        BooleanDep => nc::boolean_state_dep_test(&qubit_state(&args.state)?, axis_or(&args.a1, z)?, axis_or(&args.a2, x)?)?,
        BooleanIndep => nc::boolean_state_indep_test(axis_or(&args.a1, z)?, axis_or(&args.a2, x)?)?,
        Distributivity => nc::distributivity_test(
            &qubit_state(&args.state)?,
            axis_or(&args.a1, z)?,
            axis_or(&args.a2, x)?,
            axis_or(&args.a3, x)?,
        )?,
        Chsh => {
            let [a1, a2, b1, b2] = nc::standard_chsh_observables();
            let pick = |arg: &Option<String>, sub: usize, label: &str, default: ObservableSpec| -> Result<ObservableSpec> {
                Ok(match arg {
                    Some(s) => ObservableSpec::axis(sub, label, input::direction(s)?),
                    None => default,
                })
            };
            nc::chsh_test(
                &two_qubit_state(&args.state)?,
                &pick(&args.a1, 0, "A1", a1)?,
                &pick(&args.a2, 0, "A2", a2)?,
                &pick(&args.b1, 1, "B1", b1)?,
                &pick(&args.b2, 1, "B2", b2)?,
            )?
        }
        EntLinear1 | EntLinear2 | EntNl1 | EntNl2 | EntNl3 => {
            let rho = two_qubit_state(&args.state)?;
            let alpha = alpha.expect("entanglement tests have a default alpha");
            let fa = args.frame_a.as_deref().map(input::frame).transpose()?.unwrap_or(STANDARD_FRAME);
            let fb = args.frame_b.as_deref().map(input::frame).transpose()?.unwrap_or(STANDARD_FRAME);
            let g = make_entanglement_geometry(alpha, fa, fb)?;
            match args.name {
                EntLinear1 => nc::linear_ent_test(&rho, &g, LinearVariant::I)?,
                EntLinear2 => nc::linear_ent_test(&rho, &g, LinearVariant::II)?,
                EntNl1 => nc::nonlinear_ent_test(&rho, &g, NonlinearVariant::I)?,
                EntNl2 => nc::nonlinear_ent_test(&rho, &g, NonlinearVariant::II)?,
                _ => nc::nonlinear_ent_test(&rho, &g, NonlinearVariant::III)?,
            }
        }
        Discord => {
            let b_axes = match (&args.b1, &args.b2) {
                (Some(b1), Some(b2)) => Some([input::direction(b1)?, input::direction(b2)?]),
                (None, None) => None,
                _ => bail!("give both --b1 and --b2, or neither"),
            };
            nc::discord_test(
                &two_qubit_state(&args.state)?,
                alpha.expect("discord has a default alpha"),
                DiscordOptions { b_axes },
            )?
        }
    };
    Ok(report)
}

fn cmd_test(args: &TestArgs, tol: f64) -> Result<Value> {
    let uses_alpha = default_alpha(args.name).is_some();
    if !uses_alpha && (args.alpha.is_some() || args.alpha_scan.is_some()) {
        bail!("this test takes no alpha");
    }
    if let Some(scan) = &args.alpha_scan {
        let reports = input::alpha_scan(scan)?
            .into_iter()
            .map(|a| finalize(run_test(args, Some(a))?, tol))
            .collect::<Result<Vec<_>>>()?;
        return to_value(&reports);
    }
    let alpha = match &args.alpha {
        Some(a) => Some(input::radians(a)?),
        None => default_alpha(args.name),
    };
    to_value(&finalize(run_test(args, alpha)?, tol)?)
}

fn cmd_scheme(state: &StateArgs, observables: &[String], prescription: PrescriptionArg, tol: f64) -> Result<Value> {
    let (rho, dims) = state.require()?;
    let obs = observables
        .iter()
        .enumerate()
        .map(|(i, s)| input::observable(s, i))
        .collect::<Result<Vec<_>>>()?;
    let scheme = build_scheme(&rho, &dims, &obs, &prescription.into())?;
    scheme.check_invariants(&rho).map_err(|e| Numerical(e.to_string()))?;
    Ok(json!({
        "state_digest": rho.digest(),
        "scheme": scheme,
        "negativity": negativity_report_with_tol(&scheme, tol),
    }))
}

fn cmd_pp_eig(projectors: &[String], prescription: PrescriptionArg) -> Result<Value> {
    let fs = projectors.iter().map(|s| input::qubit_proj(s)).collect::<Result<Vec<_>>>()?;
    let pp = build_pp(&fs, &prescription.into())?;
    pplab::pseudo::validate(&pp).map_err(|e| Numerical(e.to_string()))?;
    let cert = min_eigen_certificate(&pp)?;
    Ok(json!({
        "prescription": pp.prescription().label(),
        "factors": fs.len(),
        "factors_commute": pp.factors_commute(),
        "matrix": pp.matrix(),
        "certificate": cert,
    }))
}

fn load_matrix_state(path: &std::path::Path) -> Result<DensityMatrix> {
    DensityMatrix::new(input::matrix_file(path)?).with_context(|| format!("state file {}", path.display()))
}

fn cmd_weak(
    state: &StateArgs,
    axis: &Option<String>,
    op_file: &Option<PathBuf>,
    post_bloch: &Option<String>,
    post_state: &Option<PathBuf>,
) -> Result<Value> {
    let (pre, _) = state.require()?;
    let (op, label) = match (axis, op_file) {
        (Some(a), None) => {
            let n = input::direction(a)?;
            (pplab::geometry::sigma_dot(n.to_array()), format!("sigma.{:?}", n.to_array()))
        }
        (None, Some(p)) => (input::matrix_file(p)?, p.display().to_string()),
        _ => bail!("give the observable with --axis or --op-file"),
    };
    let post = match (post_bloch, post_state) {
        (Some(b), None) => {
            let [x, y, z] = input::vec3(b)?;
            pplab::geometry::bloch_state(BlochVector::new(x, y, z)?)
        }
        (None, Some(p)) => load_matrix_state(p)?,
        _ => bail!("give the post-selection with --post-bloch or --post-state"),
    };
    let mut report = weak_value(&op, &pre, &post)?;
    report.operator = label;
    to_value(&report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_pointer(
    state: &StateArgs,
    projectors: &[String],
    post_bloch: &Option<String>,
    cfg: PointerConfig,
    couplings: &Option<String>,
) -> Result<Value> {
    let (pre, _) = state.require()?;
    let fs = projectors.iter().map(|s| input::qubit_proj(s)).collect::<Result<Vec<_>>>()?;
    let post = match post_bloch {
        Some(b) => {
            let [x, y, z] = input::vec3(b)?;
            pplab::geometry::bloch_state(BlochVector::new(x, y, z)?)
        }
        None => DensityMatrix::maximally_mixed(2),
    };
    let result = simulate_pointers(&pre, &fs, &post, &cfg)?;
    let prediction = pplab::pointer::perturbative_prediction(&pre, &fs, &post, &cfg)?;
    let fit = match couplings {
        Some(c) => Some(proportionality_check(&pre, &fs, &post, &cfg, &input::numbers(c)?)?),
        None => None,
    };
    Ok(json!({
        "config": cfg,
        "result": result,
        "perturbative_prediction": prediction,
        "proportionality": fit,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_game(
    bloch: &str,
    axis: &str,
    omega: &str,
    theta: &str,
    t_min: &Option<String>,
    t_max: &Option<String>,
    steps: usize,
) -> Result<Value> {
    let [x, y, z] = input::vec3(bloch)?;
    let p = BlochVector::new(x, y, z)?;
    let axis = input::direction(axis)?;
    let omega: f64 = omega.trim().parse().with_context(|| format!("bad --omega {omega:?}"))?;
    let theta = input::radians(theta)?;
    let t0 = t_min.as_deref().map(input::radians).transpose()?.unwrap_or(DEFAULT_WINDOW.0);
    let t1 = t_max.as_deref().map(input::radians).transpose()?.unwrap_or(DEFAULT_WINDOW.1);
    if t1 < t0 || steps == 0 {
        bail!("need --t-min <= --t-max and at least one step");
    }
    to_value(&evaluate_strategy(p, axis, omega, theta, &time_grid(t0, t1, steps))?)
}

fn dispatch(cli: &Cli) -> Result<Value> {
    let tol = tolerance()?;
    match &cli.command {
        Command::Scheme(SchemeCmd::Build { state, observables, prescription }) => {
            cmd_scheme(state, observables, *prescription, tol)
        }
        Command::Pp(PpCmd::Eig { projectors, prescription }) => cmd_pp_eig(projectors, *prescription),
        Command::Weak(WeakCmd::Value { state, axis, op_file, post_bloch, post_state }) => {
            cmd_weak(state, axis, op_file, post_bloch, post_state)
        }
        Command::Test(args) => cmd_test(args, tol),
        Command::Pointer(PointerCmd::Sim {
            state,
            projectors,
            post_bloch,
            sigma,
            g,
            t,
            grid_points,
            halfwidth,
            couplings,
        }) => {
            let cfg = PointerConfig {
                sigma: *sigma,
                g: *g,
                t: *t,
                grid_points: *grid_points,
                grid_halfwidth: *halfwidth,
            };
            cmd_pointer(state, projectors, post_bloch, cfg, couplings)
        }
        Command::Game(GameCmd::Run { bloch, axis, omega, theta, t_min, t_max, steps }) => {
            cmd_game(bloch, axis, omega, theta, t_min, t_max, *steps)
        }
    }
}

fn emit(value: &Value, out: &OutputArgs) -> Result<()> {
    let mut text = if out.json_indent == 0 {
        serde_json::to_vec(value)?
    } else {
        let indent = vec![b' '; out.json_indent];
        let mut buf = Vec::new();
        let fmt = serde_json::ser::PrettyFormatter::with_indent(&indent);
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
        value.serialize(&mut ser)?;
        buf
    };
    text.push(b'\n');
    match &out.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(&text)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(&cli).and_then(|v| emit(&v, &cli.output)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
