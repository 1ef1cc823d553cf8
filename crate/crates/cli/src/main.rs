//! tt: scenario-driven front end for the periodic-solution engine.
//!
//! A scenario JSON names an operator, a field, an integrator, and a
//! verification ball; the subcommands run the averaged solve, the
//! verification sweeps (Krasnosel'skii times, averaging lambdas, degree
//! properties), the resonance screen, the full continuation pipeline, and a
//! plain trajectory integration. Artifacts are deterministic: identical
//! config and seed produce byte-identical CSV and JSON.
//!
//! Exit codes: 0 success, 2 solver nonconvergence or divergence, 3 config
//! or usage error, 4 failed verification check, 5 degree degeneracy,
//! 6 resonance detected, 7 continuation stuck, 1 anything else.

mod emit;
mod scenario;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tt_core::continuation::{
    check_resonance, continue_branch, ensure_nonresonant, estimate_r0, solve_averaged,
    verify_averaging, verify_krasnoselskii, ContinuationOptions,
};
use tt_core::degree::{deg_alpha, verify_mu_independence, DegreeOptions, DegreeResult,
    MuIndependenceReport};
use tt_core::field;
use tt_core::solver::{evolve, Trajectory};
use tt_core::spectral::SpectralOperator;
use tt_core::{Error, Result};

use scenario::Scenario;

/// Quadrature panels for time averages and the resonance screen.
const N_QUAD: usize = 256;
/// Newton tolerance (alpha-norm) and budget for the averaged solve.
const NEWTON_TOL: f64 = 1e-10;
const NEWTON_ITERS: usize = 50;

#[derive(Parser)]
#[command(
    name = "tt",
    version,
    about = "Periodic solutions of semilinear parabolic problems on spectral truncations: \
             verification sweeps, degree certificates, and continuation to lambda = 1"
)]
struct Cli {
    /// Scenario config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for artifacts (overrides the scenario's output_dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Sampler seed (overrides the scenario's seed).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the averaged stationary problem and print {x_hat, residual}.
    SolveAveraged,
    /// Run one verification sweep and write its report.
    Verify {
        #[arg(value_enum)]
        which: VerifyKind,
    },
    /// Screen the averaged asymptotic slope against the spectrum.
    CheckResonance,
    /// Resonance screen, averaged start, continuation to lambda = 1; writes
    /// branch.csv, trajectory.csv, summary.json.
    Periodic,
    /// Integrate one period from the ball center; writes trajectory.csv.
    Evolve,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    /// Krasnosel'skii comparison over grids.t_list.
    Kras,
    /// Averaging comparison over grids.lambda_list.
    Avg,
    /// Shift independence plus normalization of the stationary degree.
    DegreeProps,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(exit_code(&err));
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } | Error::Divergence { .. } | Error::JacobianColumn { .. } => 2,
        Error::Config { .. }
        | Error::Json(_)
        | Error::Domain(_)
        | Error::Unsupported(_)
        | Error::DimensionMismatch { .. }
        | Error::AlphaMismatch { .. } => 3,
        Error::Degenerate { .. }
        | Error::BoundaryZero { .. }
        | Error::Inconclusive(_)
        | Error::Coverage(_) => 5,
        Error::Resonance { .. } => 6,
        Error::ContinuationStuck { .. } => 7,
        Error::Io(_) => 1,
    }
}

fn init_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("TT_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::config("TT_THREADS", "expected a positive integer"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::domain(format!("cannot size the worker pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<i32> {
    init_threads()?;
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::config("--config", "a scenario config is required"))?;
    let mut sc = scenario::load(config_path)?;
    if let Some(seed) = cli.seed {
        sc.seed = seed;
    }
    if let Some(out) = &cli.out {
        sc.output_dir = Some(out.clone());
    }
    match cli.cmd {
        Cmd::SolveAveraged => cmd_solve_averaged(&sc),
        Cmd::Verify { which } => cmd_verify(&sc, which),
        Cmd::CheckResonance => cmd_check_resonance(&sc),
        Cmd::Periodic => cmd_periodic(&sc),
        Cmd::Evolve => cmd_evolve(&sc),
    }
}

fn degree_opts(sc: &Scenario) -> DegreeOptions {
    DegreeOptions {
        seed: sc.seed,
        ..DegreeOptions::default()
    }
}

fn write_artifact(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

/// Writes `text` under the resolved output directory when one is named.
fn write_optional(sc: &Scenario, name: &str, text: &str) -> Result<()> {
    if let Some(dir) = &sc.output_dir {
        write_artifact(dir, name, text)?;
    }
    Ok(())
}

fn require_out_dir(sc: &Scenario) -> Result<PathBuf> {
    sc.output_dir.clone().ok_or_else(|| {
        Error::config(
            "--out",
            "this command writes artifacts; pass --out DIR or set output_dir in the scenario",
        )
    })
}

fn trajectory_csv(op: &SpectralOperator<f64>, trajectories: &[(f64, &Trajectory<f64>)]) -> String {
    let n = op.dim();
    let mut header = vec!["t".to_string()];
    header.extend(emit::coeff_header(n));
    header.push("alpha_norm".to_string());
    let mut rows = Vec::new();
    for (offset, traj) in trajectories {
        for (i, state) in traj.states.iter().enumerate() {
            // The join point of two concatenated periods appears once.
            if *offset > 0.0 && i == 0 {
                continue;
            }
            let mut row = vec![emit::fmt_f64(offset + traj.times[i])];
            row.extend(state.coeffs.iter().map(|&c| emit::fmt_f64(c)));
            row.push(emit::fmt_f64(op.state_norm(state)));
            rows.push(row);
        }
    }
    emit::csv(&header, &rows)
}

#[derive(Serialize)]
struct AveragedOut {
    x_hat: Vec<f64>,
    residual: f64,
}

fn cmd_solve_averaged(sc: &Scenario) -> Result<i32> {
    let sol = solve_averaged(
        &sc.op,
        &sc.field,
        &sc.ball.center,
        NEWTON_TOL,
        NEWTON_ITERS,
        N_QUAD,
    )?;
    let out = AveragedOut {
        x_hat: sol.state.coeffs.clone(),
        residual: sol.residual,
    };
    let text = emit::to_json(&out)?;
    print!("{text}");
    write_optional(sc, "averaged.json", &text)?;
    Ok(0)
}

#[derive(Serialize)]
struct DegreePropsReport {
    mu_independence: MuIndependenceReport,
    normalization: DegreeResult<f64>,
    pass: bool,
}

fn cmd_verify(sc: &Scenario, which: VerifyKind) -> Result<i32> {
    let opts = degree_opts(sc);
    match which {
        VerifyKind::Kras => {
            let t_list = sc.t_list.clone().ok_or_else(|| {
                Error::config("grids.t_list", "the kras sweep needs a list of translation times")
            })?;
            let report = verify_krasnoselskii(&sc.op, &sc.field, &sc.cfg, &sc.ball, &t_list, &opts)?;
            let text = emit::to_json(&report)?;
            print!("{text}");
            write_optional(sc, "verify_kras.json", &text)?;
            Ok(if report.pass { 0 } else { 4 })
        }
        VerifyKind::Avg => {
            let lambda_list = sc.lambda_list.clone().ok_or_else(|| {
                Error::config("grids.lambda_list", "the averaging sweep needs a list of lambdas")
            })?;
            let report = verify_averaging(
                &sc.op, &sc.field, &sc.cfg, &sc.ball, &lambda_list, N_QUAD, &opts,
            )?;
            let text = emit::to_json(&report)?;
            print!("{text}");
            write_optional(sc, "verify_avg.json", &text)?;
            Ok(if report.pass { 0 } else { 4 })
        }
        VerifyKind::DegreeProps => {
            let mus = sc.mus.clone().unwrap_or_else(|| vec![0.0, 1.0, 10.0]);
            let mu_independence =
                verify_mu_independence(&sc.op, &sc.field, &sc.ball, &mus, &opts)?;
            // Normalization instance anchored at the ball center: the
            // constant field A c has exactly one zero (the center itself)
            // and its degree must be 1.
            let value: Vec<f64> = sc
                .op
                .eigenvalues()
                .iter()
                .zip(&sc.ball.center.coeffs)
                .map(|(&m, &c)| m * c)
                .collect();
            let constant = field::constant(&sc.op, sc.period, sc.alpha, value)?;
            let normalization = deg_alpha(&sc.op, &constant, &sc.ball, 0.0, &opts)?.to_f64();
            let pass = mu_independence.pass && normalization.value == 1;
            let report = DegreePropsReport {
                mu_independence,
                normalization,
                pass,
            };
            let text = emit::to_json(&report)?;
            print!("{text}");
            write_optional(sc, "verify_degree_props.json", &text)?;
            Ok(if pass { 0 } else { 4 })
        }
    }
}

fn cmd_check_resonance(sc: &Scenario) -> Result<i32> {
    let report = check_resonance(&sc.op, &sc.field, N_QUAD)?;
    let text = emit::to_json(&report)?;
    print!("{text}");
    write_optional(sc, "resonance.json", &text)?;
    if report.lambda_sweep_clear {
        Ok(0)
    } else {
        eprintln!(
            "resonance: averaged slope {:.6} hits spectrum mode(s) {:?}",
            report.f_inf_mean, report.offending_modes
        );
        Ok(6)
    }
}

#[derive(Serialize)]
struct PeriodicFiles {
    branch: String,
    trajectory: String,
}

#[derive(Serialize)]
struct PeriodicSummary {
    f_inf_mean: f64,
    offending_modes: Vec<usize>,
    kernel_dim: usize,
    x_hat: Vec<f64>,
    averaged_residual: f64,
    r0: Option<f64>,
    r0_warnings: Vec<String>,
    branch_points: usize,
    final_lambda: f64,
    final_residual: f64,
    jac_sign_constant: bool,
    branch_warnings: Vec<String>,
    periodicity_defect: f64,
    files: PeriodicFiles,
}

fn cmd_periodic(sc: &Scenario) -> Result<i32> {
    let dir = require_out_dir(sc)?;

    let resonance = check_resonance(&sc.op, &sc.field, N_QUAD)?;
    ensure_nonresonant(&resonance)?;

    let averaged = solve_averaged(
        &sc.op,
        &sc.field,
        &sc.ball.center,
        NEWTON_TOL,
        NEWTON_ITERS,
        N_QUAD,
    )?;

    let (r0, r0_warnings) = match &sc.radius_grid {
        Some(grid) => {
            let lambdas = sc
                .lambda_list
                .clone()
                .unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.05]);
            let est = estimate_r0(&sc.op, &sc.field, &sc.cfg, grid, &lambdas, sc.seed)?;
            (est.radius, est.warnings)
        }
        None => (None, Vec::new()),
    };

    let copts = sc.continuation.unwrap_or_else(ContinuationOptions::standard);
    let branch = match continue_branch(&sc.op, &sc.field, &sc.cfg, &averaged.state, &copts) {
        Ok(branch) => branch,
        Err(err) => {
            // A stuck continuation still leaves its partial branch behind.
            if let Error::ContinuationStuck { partial, .. } = &err {
                let header: Vec<String> = ["lambda", "residual", "jac_sign", "alpha_norm"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                let rows: Vec<Vec<String>> = partial
                    .iter()
                    .map(|p| {
                        vec![
                            emit::fmt_f64(p.lambda),
                            emit::fmt_f64(p.residual),
                            p.jac_sign.to_string(),
                            emit::fmt_f64(p.alpha_norm),
                        ]
                    })
                    .collect();
                write_artifact(&dir, "partial_branch.csv", &emit::csv(&header, &rows))?;
            }
            return Err(err);
        }
    };

    let mut header: Vec<String> = ["lambda", "residual", "jac_sign", "alpha_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(emit::coeff_header(sc.op.dim()));
    let rows: Vec<Vec<String>> = branch
        .points
        .iter()
        .map(|p| {
            let mut row = vec![
                emit::fmt_f64(p.lambda),
                emit::fmt_f64(p.residual),
                p.jac_sign.to_string(),
                emit::fmt_f64(sc.op.state_norm(&p.state)),
            ];
            row.extend(p.state.coeffs.iter().map(|&c| emit::fmt_f64(c)));
            row
        })
        .collect();
    write_artifact(&dir, "branch.csv", &emit::csv(&header, &rows))?;

    // Final solution re-integrated over two periods; the defect between the
    // two passes certifies periodicity of the discrete state.
    let last = branch.last();
    let cfg_final = sc.cfg.with_lambda(last.lambda);
    let first_period = evolve(&sc.op, &sc.field, &cfg_final, &last.state)?;
    let second_period = evolve(&sc.op, &sc.field, &cfg_final, first_period.final_state())?;
    let periodicity_defect = first_period
        .states
        .iter()
        .zip(&second_period.states)
        .map(|(a, b)| {
            let d: Vec<f64> = a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x - y)
                .collect();
            sc.op.alpha_norm(&d, sc.alpha)
        })
        .fold(0.0f64, f64::max);
    let trajectory = trajectory_csv(
        &sc.op,
        &[(0.0, &first_period), (sc.period, &second_period)],
    );
    write_artifact(&dir, "trajectory.csv", &trajectory)?;

    let jac_sign_constant = branch
        .points
        .windows(2)
        .all(|w| w[0].jac_sign == w[1].jac_sign);
    let summary = PeriodicSummary {
        f_inf_mean: resonance.f_inf_mean,
        offending_modes: resonance.offending_modes.clone(),
        kernel_dim: resonance.kernel_dim,
        x_hat: averaged.state.coeffs.clone(),
        averaged_residual: averaged.residual,
        r0,
        r0_warnings,
        branch_points: branch.points.len(),
        final_lambda: last.lambda,
        final_residual: last.residual,
        jac_sign_constant,
        branch_warnings: branch.warnings.clone(),
        periodicity_defect,
        files: PeriodicFiles {
            branch: "branch.csv".to_string(),
            trajectory: "trajectory.csv".to_string(),
        },
    };
    let text = emit::to_json(&summary)?;
    print!("{text}");
    write_artifact(&dir, "summary.json", &text)?;
    Ok(0)
}

fn cmd_evolve(sc: &Scenario) -> Result<i32> {
    let dir = require_out_dir(sc)?;
    let traj = evolve(&sc.op, &sc.field, &sc.cfg, &sc.ball.center)?;
    let text = trajectory_csv(&sc.op, &[(0.0, &traj)]);
    write_artifact(&dir, "trajectory.csv", &text)?;
    Ok(0)
}
