//! Command-line surface: argument schema, dispatch, and exit-code policy.
//!
//! Exit codes: 0 success, 2 parse/validation errors, 3 solver
//! non-uniqueness, 4 tolerance failures. Diagnostics go to stderr; the
//! report document goes to stdout.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;

use ncg_core::connection::{
    compatibility_residual, reference_connection, solve_conformal, solve_koszul,
    solve_truncated, torsion_residual, Connection, ConventionFlag,
};
use ncg_core::curvature::{ricci, scalar};
use ncg_core::forms::GeometrySpace;
use ncg_core::metric::{conformal_deform, PseudoMetric};
use ncg_core::presets::{heisenberg, nc_torus, PresetId};
use ncg_core::Error as CoreError;

use crate::expr::{eval_expr, parse_expr};
use crate::report::{
    element_to_json, gamma_entries, render_table, ricci_entries, to_canonical_json,
    ElementJson, ReportDocument, RequestEcho, ResidualsJson,
};
use crate::selftest;

/// Neumann-series term budget for every inversion the CLI performs.
const MAX_NEUMANN_TERMS: usize = 4096;
/// Ceiling on pairwise backend disagreement before the run is rejected.
const AGREEMENT_GATE: f64 = 1e-9;
/// Ceiling on the reported torsion/compatibility residuals.
const RESIDUAL_GATE: f64 = 1e-9;
/// Default Fourier window for the truncated backend.
const DEFAULT_WINDOW: i64 = 32;
/// Default Neumann-series tolerance.
const DEFAULT_EPS: f64 = 1e-12;
/// Default conformal factor for `verify` on the torus presets.
const DEFAULT_VERIFY_K: &str = "3 + U + U^-1";

#[derive(Parser)]
#[command(
    name = "ncg",
    version,
    about = "Curvature calculator for noncommutative tori and the quantum Heisenberg manifold"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Noncommutative torus computations
    Torus {
        #[command(subcommand)]
        action: TorusAction,
    },
    /// Quantum Heisenberg manifold computations
    Heisenberg {
        #[command(subcommand)]
        action: HeisenbergAction,
    },
    /// Run the residual suite for a preset and report the numbers
    Verify(VerifyArgs),
    /// Run the deterministic invariant suite
    Selftest,
}

#[derive(Subcommand)]
pub enum TorusAction {
    /// Solve for the unique compatible torsion-free connection and report
    /// its curvature
    Curvature(TorusCurvatureArgs),
}

#[derive(Args)]
pub struct TorusCurvatureArgs {
    /// Deformation parameter
    #[arg(long)]
    pub theta: f64,
    /// Conformal factor, e.g. "3 + U + U^-1"
    #[arg(long)]
    pub k: String,
    /// Solver backend(s) to run
    #[arg(long, value_enum, default_value_t = MethodOpt::Koszul)]
    pub method: MethodOpt,
    /// Fourier window for the truncated backend
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: i64,
    /// Neumann-series tolerance for inverting the conformal factor
    #[arg(long = "neumann-eps", default_value_t = DEFAULT_EPS)]
    pub neumann_eps: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatOpt::Json)]
    pub format: FormatOpt,
}

#[derive(Subcommand)]
pub enum HeisenbergAction {
    /// Report the connection and curvature of the quantum Heisenberg
    /// manifold
    Curvature(HeisenbergCurvatureArgs),
}

#[derive(Args)]
pub struct HeisenbergCurvatureArgs {
    /// Sign convention for the compatibility equation
    #[arg(long, value_enum, default_value_t = ConventionOpt::Paper)]
    pub convention: ConventionOpt,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatOpt::Json)]
    pub format: FormatOpt,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Preset id: nc-torus, classical-torus, or heisenberg
    #[arg(long)]
    pub preset: String,
    /// Deformation parameter (torus presets; default 0.25)
    #[arg(long)]
    pub theta: Option<f64>,
    /// Conformal factor (torus presets; default "3 + U + U^-1")
    #[arg(long)]
    pub k: Option<String>,
    /// Fourier window for the truncated backend
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: i64,
    /// Neumann-series tolerance
    #[arg(long = "neumann-eps", default_value_t = DEFAULT_EPS)]
    pub neumann_eps: f64,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatOpt::Json)]
    pub format: FormatOpt,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum MethodOpt {
    Koszul,
    Conformal,
    Truncated,
    All,
}

impl MethodOpt {
    fn name(self) -> &'static str {
        match self {
            MethodOpt::Koszul => "koszul",
            MethodOpt::Conformal => "conformal",
            MethodOpt::Truncated => "truncated",
            MethodOpt::All => "all",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ConventionOpt {
    Paper,
    Strict,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum FormatOpt {
    Json,
    Table,
}

/// A command that did not produce a report.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn tolerance(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

fn core_failure(e: CoreError) -> Failure {
    let code = match &e {
        CoreError::NonUniqueSolution { .. } => 3,
        CoreError::ToleranceUnreachable { .. } | CoreError::PostconditionFailed { .. } => 4,
        _ => 2,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

/// A command's emitted report plus any stderr diagnostics and exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub diagnostics: Vec<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            diagnostics: Vec::new(),
            code: 0,
        }
    }
}

fn emit(doc: &ReportDocument, format: FormatOpt) -> String {
    match format {
        FormatOpt::Json => {
            let mut s = to_canonical_json(doc);
            s.push('\n');
            s
        }
        FormatOpt::Table => render_table(doc),
    }
}

fn require_finite(name: &str, v: f64) -> Result<(), Failure> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Failure::validation(format!("{name} must be finite")))
    }
}

fn validate_window_eps(window: i64, eps: f64) -> Result<(), Failure> {
    if window < 1 {
        return Err(Failure::validation("--window must be at least 1"));
    }
    require_finite("--neumann-eps", eps)?;
    if eps <= 0.0 {
        return Err(Failure::validation("--neumann-eps must be positive"));
    }
    Ok(())
}

struct TorusSolve {
    backends: Vec<String>,
    max_backend_delta: f64,
    primary: Connection,
    inversion_tail: f64,
    torsion: f64,
    compatibility: f64,
    space: GeometrySpace,
    g: PseudoMetric,
}

/// Parses and inverts the conformal factor, runs the requested backends,
/// and certifies the pairwise agreement and residual gates.
fn torus_solve(
    theta: f64,
    k_src: &str,
    method: MethodOpt,
    window: i64,
    eps: f64,
) -> Result<TorusSolve, Failure> {
    require_finite("--theta", theta)?;
    validate_window_eps(window, eps)?;

    let (space, g0) = nc_torus(theta);
    let ast = parse_expr(k_src, &space).map_err(|e| Failure::validation(e.to_string()))?;
    let k = eval_expr(&ast, &space);
    let inv = space
        .theta()
        .invert(&k, eps, MAX_NEUMANN_TERMS)
        .map_err(core_failure)?;
    let g = conformal_deform(space.theta(), &k, &g0, eps, MAX_NEUMANN_TERMS)
        .map_err(core_failure)?;
    let nabla0 = reference_connection(&space);

    let mut solutions: Vec<(&'static str, Connection)> = Vec::new();
    let run_koszul = matches!(method, MethodOpt::Koszul | MethodOpt::All);
    let run_conformal = matches!(method, MethodOpt::Conformal | MethodOpt::All);
    let run_truncated = matches!(method, MethodOpt::Truncated | MethodOpt::All);
    if run_koszul {
        let c = solve_koszul(&space, &g, &nabla0, ConventionFlag::Strict)
            .map_err(core_failure)?;
        solutions.push(("koszul", c));
    }
    if run_conformal {
        let c = solve_conformal(&space, &g0, &k, &nabla0, eps, MAX_NEUMANN_TERMS)
            .map_err(core_failure)?;
        solutions.push(("conformal", c));
    }
    if run_truncated {
        let t = solve_truncated(&space, &g, &nabla0, window, ConventionFlag::Strict)
            .map_err(core_failure)?;
        solutions.push(("truncated", t.connection));
    }

    let mut max_backend_delta: f64 = 0.0;
    for a in 0..solutions.len() {
        for b in (a + 1)..solutions.len() {
            max_backend_delta = max_backend_delta.max(solutions[a].1.max_delta(&solutions[b].1));
        }
    }
    if max_backend_delta > AGREEMENT_GATE {
        return Err(Failure::tolerance(format!(
            "backend disagreement {max_backend_delta:.3e} exceeds {AGREEMENT_GATE:.1e}"
        )));
    }

    let backends = solutions.iter().map(|(n, _)| n.to_string()).collect();
    let primary = solutions.remove(0).1;
    let torsion = torsion_residual(&space, &primary);
    let compatibility =
        compatibility_residual(&space, &g, &primary, ConventionFlag::Strict)
            .map_err(core_failure)?;
    if torsion > RESIDUAL_GATE || compatibility > RESIDUAL_GATE {
        return Err(Failure::tolerance(format!(
            "residuals exceed {RESIDUAL_GATE:.1e}: torsion {torsion:.3e}, compatibility {compatibility:.3e}"
        )));
    }

    Ok(TorusSolve {
        backends,
        max_backend_delta,
        primary,
        inversion_tail: inv.tail_bound,
        torsion,
        compatibility,
        space,
        g,
    })
}

fn torus_curvature(args: &TorusCurvatureArgs) -> Result<Outcome, Failure> {
    let solve = torus_solve(args.theta, &args.k, args.method, args.window, args.neumann_eps)?;
    let ric = ricci(&solve.space, &solve.primary).map_err(core_failure)?;
    let scal = scalar(&solve.space, &solve.g, &ric).map_err(core_failure)?;

    let doc = ReportDocument {
        request: RequestEcho {
            command: "torus curvature".into(),
            preset: "nc-torus".into(),
            theta: args.theta,
            k: args.k.clone(),
            convention: "strict".into(),
            method: args.method.name().into(),
            window: args.window,
            neumann_eps: args.neumann_eps,
        },
        gamma: gamma_entries(&solve.primary),
        ricci: ricci_entries(&ric),
        scal: element_to_json(&scal),
        residuals: ResidualsJson {
            torsion: solve.torsion,
            compatibility: solve.compatibility,
            inversion_tail: solve.inversion_tail,
        },
        backends: solve.backends,
        max_backend_delta: solve.max_backend_delta,
    };
    Ok(Outcome::ok(emit(&doc, args.format)))
}

fn heisenberg_curvature(args: &HeisenbergCurvatureArgs) -> Result<Outcome, Failure> {
    let (space, g0, nabla0) = heisenberg();
    let g = PseudoMetric::Central(g0);
    let (flag, convention) = match args.convention {
        ConventionOpt::Paper => (ConventionFlag::Paper, "paper"),
        ConventionOpt::Strict => (ConventionFlag::Strict, "strict"),
    };
    let c = solve_koszul(&space, &g, &nabla0, flag).map_err(core_failure)?;
    let ric = ricci(&space, &c).map_err(core_failure)?;
    let scal = scalar(&space, &g, &ric).map_err(core_failure)?;
    let torsion = torsion_residual(&space, &c);
    let compatibility =
        compatibility_residual(&space, &g, &c, flag).map_err(core_failure)?;
    if torsion > RESIDUAL_GATE || compatibility > RESIDUAL_GATE {
        return Err(Failure::tolerance(format!(
            "residuals exceed {RESIDUAL_GATE:.1e}: torsion {torsion:.3e}, compatibility {compatibility:.3e}"
        )));
    }

    let doc = ReportDocument {
        request: RequestEcho {
            command: "heisenberg curvature".into(),
            preset: "heisenberg".into(),
            theta: 0.0,
            k: "1".into(),
            convention: convention.into(),
            method: "koszul".into(),
            window: DEFAULT_WINDOW,
            neumann_eps: DEFAULT_EPS,
        },
        gamma: gamma_entries(&c),
        ricci: ricci_entries(&ric),
        scal: element_to_json(&scal),
        residuals: ResidualsJson {
            torsion,
            compatibility,
            inversion_tail: 0.0,
        },
        backends: vec!["koszul".into()],
        max_backend_delta: 0.0,
    };
    Ok(Outcome::ok(emit(&doc, args.format)))
}

fn verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let id: PresetId = args
        .preset
        .parse()
        .map_err(|e: CoreError| Failure::validation(e.to_string()))?;
    match id {
        PresetId::Heisenberg => {
            if args.theta.is_some() || args.k.is_some() {
                return Err(Failure::validation(
                    "--theta and --k do not apply to the heisenberg preset",
                ));
            }
            verify_heisenberg(args)
        }
        PresetId::NcTorus => verify_torus(args, "nc-torus", args.theta.unwrap_or(0.25)),
        PresetId::ClassicalTorus => {
            if args.theta.unwrap_or(0.0) != 0.0 {
                return Err(Failure::validation("classical-torus pins theta = 0"));
            }
            verify_torus(args, "classical-torus", 0.0)
        }
    }
}

fn verify_torus(args: &VerifyArgs, preset: &str, theta: f64) -> Result<Outcome, Failure> {
    let k_src = args.k.clone().unwrap_or_else(|| DEFAULT_VERIFY_K.into());
    let solve = torus_solve(theta, &k_src, MethodOpt::All, args.window, args.neumann_eps)?;

    let doc = ReportDocument {
        request: RequestEcho {
            command: "verify".into(),
            preset: preset.into(),
            theta,
            k: k_src,
            convention: "strict".into(),
            method: "all".into(),
            window: args.window,
            neumann_eps: args.neumann_eps,
        },
        gamma: Vec::new(),
        ricci: Vec::new(),
        scal: ElementJson { terms: Vec::new() },
        residuals: ResidualsJson {
            torsion: solve.torsion,
            compatibility: solve.compatibility,
            inversion_tail: solve.inversion_tail,
        },
        backends: solve.backends,
        max_backend_delta: solve.max_backend_delta,
    };
    Ok(Outcome::ok(emit(&doc, args.format)))
}

fn verify_heisenberg(args: &VerifyArgs) -> Result<Outcome, Failure> {
    validate_window_eps(args.window, args.neumann_eps)?;
    let (space, g0, nabla0) = heisenberg();
    let g = PseudoMetric::Central(g0);

    let paper = solve_koszul(&space, &g, &nabla0, ConventionFlag::Paper).map_err(core_failure)?;
    let strict =
        solve_koszul(&space, &g, &nabla0, ConventionFlag::Strict).map_err(core_failure)?;
    let truncated = solve_truncated(&space, &g, &nabla0, args.window, ConventionFlag::Strict)
        .map_err(core_failure)?;

    let max_backend_delta = strict.max_delta(&truncated.connection);
    let torsion = torsion_residual(&space, &paper).max(torsion_residual(&space, &strict));
    let compatibility = compatibility_residual(&space, &g, &paper, ConventionFlag::Paper)
        .map_err(core_failure)?
        .max(
            compatibility_residual(&space, &g, &strict, ConventionFlag::Strict)
                .map_err(core_failure)?,
        );
    if torsion > RESIDUAL_GATE
        || compatibility > RESIDUAL_GATE
        || max_backend_delta > AGREEMENT_GATE
    {
        return Err(Failure::tolerance(format!(
            "heisenberg residual suite failed: torsion {torsion:.3e}, \
             compatibility {compatibility:.3e}, backend delta {max_backend_delta:.3e}"
        )));
    }

    let doc = ReportDocument {
        request: RequestEcho {
            command: "verify".into(),
            preset: "heisenberg".into(),
            theta: 0.0,
            k: "1".into(),
            convention: "both".into(),
            method: "all".into(),
            window: args.window,
            neumann_eps: args.neumann_eps,
        },
        gamma: Vec::new(),
        ricci: Vec::new(),
        scal: ElementJson { terms: Vec::new() },
        residuals: ResidualsJson {
            torsion,
            compatibility,
            inversion_tail: 0.0,
        },
        backends: vec!["koszul".into(), "truncated".into()],
        max_backend_delta,
    };
    Ok(Outcome::ok(emit(&doc, args.format)))
}

/// Parses `argv`, runs the selected command, prints the report to stdout
/// and diagnostics to stderr, and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Torus {
            action: TorusAction::Curvature(args),
        } => torus_curvature(&args),
        Command::Heisenberg {
            action: HeisenbergAction::Curvature(args),
        } => heisenberg_curvature(&args),
        Command::Verify(args) => verify(&args),
        Command::Selftest => return selftest::run_selftest(),
    };
    match result {
        Ok(outcome) => {
            // A consumer that stopped reading (e.g. `ncg … | head`) turns
            // into EPIPE here; exit quietly instead of panicking.
            use std::io::Write;
            let mut stdout = std::io::stdout();
            if let Err(e) = stdout
                .write_all(outcome.stdout.as_bytes())
                .and_then(|()| stdout.flush())
            {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    return 0;
                }
                eprintln!("error: cannot write the report: {e}");
                return 1;
            }
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            outcome.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
