//! Averaging, resonance screening, and continuation to a periodic solution.
//!
//! The route to a T-periodic solution runs through three gates. First the
//! averaged equation A x = F_hat(x) is solved and the asymptotic slope is
//! screened against the spectrum, since a mean slope sitting on an eigenvalue
//! collapses the linearized problem. Second, the degree bookkeeping that
//! justifies the passage from the stationary problem to the translation
//! operator is verified on the actual discretization: the fixed-point index
//! of the translation operator must agree with the stationary degree for
//! small periods (the Krasnosel'skii comparison) and, for oscillating fields,
//! with the degree of the averaged field for small homotopy parameters (the
//! averaging comparison). Third, the fixed point of the translation operator
//! is continued in the homotopy parameter lambda from the averaged regime up
//! to lambda = 1, where it is a genuine discrete periodic state.

use crate::error::{Error, PartialBranchPoint, Result};
use crate::field::Field;
use crate::linalg::{fd_jacobian, Mat};
use crate::newton::damped_newton;
use crate::sampling::BallSampler;
use crate::scalar::{approx_f64, real, Scalar};
use crate::solver::{poincare, poincare_jacobian, IntegratorConfig};
use crate::spectral::{SpectralOperator, State};
use crate::degree::{deg_alpha, deg_poincare, Ball, DegreeOptions, DegreeResult};

/// Solution of the averaged stationary equation A x = F_hat(x).
#[derive(Debug, Clone, serde::Serialize)]
pub struct AveragedSolution<R> {
    pub state: State<R>,
    pub residual: R,
    pub newton_iters: usize,
    /// Sign of det of the Newton map's Jacobian at the solution; 0 flags a
    /// numerically singular linearization.
    pub jac_sign: i8,
}

/// Solves x = (mu I + A)^{-1} F_hat(x) at mu = 0 by damped Newton from `x0`,
/// where F_hat is the time average of the field. Works for autonomous fields
/// too, where the average is the field itself.
pub fn solve_averaged<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    x0: &State<R>,
    tol: R,
    max_iters: usize,
    n_quad: usize,
) -> Result<AveragedSolution<R>> {
    let alpha = field.alpha;
    let map = |x: &[R]| -> Result<Vec<R>> {
        let fx = field.average(&State::new(x.to_vec(), alpha), n_quad)?;
        let ax = op.resolvent_apply(R::zero(), &fx)?;
        Ok(x
            .iter()
            .zip(&ax.coeffs)
            .map(|(&xi, &ai)| xi - ai)
            .collect())
    };
    let norm = |x: &[R]| op.alpha_norm(x, alpha);
    let jac = |x: &[R]| -> Result<Mat<R>> {
        let mut g = |v: &[R]| map(v);
        fd_jacobian(&mut g, x, norm(x))
    };
    let out = damped_newton(&map, &jac, &x0.coeffs, tol, max_iters, &norm)?;
    if !out.converged {
        return Err(Error::NonConvergence {
            iters: out.iters,
            residual: approx_f64(out.residual),
            tol: approx_f64(tol),
            last: out.x.iter().map(|&v| approx_f64(v)).collect(),
        });
    }
    let det = jac(&out.x)?.det();
    Ok(AveragedSolution {
        state: State::new(out.x, alpha),
        residual: out.residual,
        newton_iters: out.iters,
        jac_sign: sign_of(det),
    })
}

fn sign_of<R: Scalar>(v: R) -> i8 {
    if v > R::zero() {
        1
    } else if v < R::zero() {
        -1
    } else {
        0
    }
}

/// Resonance screen for asymptotically linear fields: the time-averaged
/// slope must keep a safe distance from every eigenvalue, otherwise the
/// linearization at infinity has a kernel and the degree at large radii is
/// undefined.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResonanceReport {
    pub f_inf_mean: f64,
    pub tol_res: f64,
    /// 1-based indices of eigenvalues hit by the averaged slope.
    pub offending_modes: Vec<usize>,
    pub kernel_dim: usize,
    pub lambda_sweep_clear: bool,
}

/// Computes the averaged asymptotic slope by the periodic trapezoid rule on
/// `n_panels` panels and compares it against the spectrum with tolerance
/// 1e-8 (1 + |mean|). For a diagonal operator with real spectrum only the
/// constant Fourier mode of the slope can resonate, so the kernel dimension
/// is the eigenvalue multiplicity of the mean.
pub fn check_resonance<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    n_panels: usize,
) -> Result<ResonanceReport> {
    if !field.has_asymptotic() {
        return Err(Error::Unsupported(
            "resonance screening needs an asymptotic slope; this field declares none".into(),
        ));
    }
    if n_panels < 2 {
        return Err(Error::domain("resonance screening needs at least 2 panels"));
    }
    let t_total = field.period;
    let h = t_total / real::<R>(n_panels as f64);
    let mut acc = R::zero();
    for j in 0..n_panels {
        let t = h * real::<R>(j as f64);
        let s = field
            .asymptotic_slope(t)
            .ok_or_else(|| Error::Unsupported("asymptotic slope vanished mid-sweep".into()))?;
        acc = acc + s;
    }
    let mean = acc / real::<R>(n_panels as f64);
    let mean_f = approx_f64(mean);
    let tol_res = 1e-8 * (1.0 + mean_f.abs());
    let offending: Vec<usize> = op
        .eigenvalues()
        .iter()
        .enumerate()
        .filter(|(_, &mu)| (approx_f64(mu) - mean_f).abs() <= tol_res)
        .map(|(k, _)| k + 1)
        .collect();
    Ok(ResonanceReport {
        f_inf_mean: mean_f,
        tol_res,
        kernel_dim: offending.len(),
        lambda_sweep_clear: offending.is_empty(),
        offending_modes: offending,
    })
}

/// Promotes a resonant report to the dedicated error.
pub fn ensure_nonresonant(report: &ResonanceReport) -> Result<()> {
    if report.lambda_sweep_clear {
        Ok(())
    } else {
        Err(Error::Resonance {
            f_inf_mean: report.f_inf_mean,
            tol: report.tol_res,
            offending: report.offending_modes.clone(),
        })
    }
}

/// One accepted point on a continuation branch.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BranchPoint<R> {
    pub lambda: R,
    pub state: State<R>,
    pub residual: R,
    pub jac_sign: i8,
    pub newton_iters: usize,
}

/// A continuation branch with any structural warnings gathered on the way
/// (Jacobian sign flips, degenerate linearizations).
#[derive(Debug, Clone, serde::Serialize)]
pub struct Branch<R> {
    pub points: Vec<BranchPoint<R>>,
    pub warnings: Vec<String>,
}

impl<R: Scalar> Branch<R> {
    pub fn last(&self) -> &BranchPoint<R> {
        self.points.last().expect("branch holds at least one point")
    }
}

/// Newton solve for a fixed point of the translation operator at the
/// config's lambda. The returned point carries the orientation sign of
/// I - D Phi at the solution.
pub fn solve_fixed_point<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    cfg: &IntegratorConfig<R>,
    x0: &State<R>,
    tol: R,
    max_iters: usize,
) -> Result<BranchPoint<R>> {
    let alpha = field.alpha;
    let map = |x: &[R]| -> Result<Vec<R>> {
        let phi = poincare(op, field, cfg, &State::new(x.to_vec(), alpha))?;
        Ok(x
            .iter()
            .zip(&phi.coeffs)
            .map(|(&xi, &pi)| xi - pi)
            .collect())
    };
    let jac = |x: &[R]| -> Result<Mat<R>> {
        let dphi = poincare_jacobian(op, field, cfg, &State::new(x.to_vec(), alpha))?;
        let n = x.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let id = if i == j { R::one() } else { R::zero() };
                m[(i, j)] = id - dphi[(i, j)];
            }
        }
        Ok(m)
    };
    let norm = |x: &[R]| op.alpha_norm(x, alpha);
    let out = damped_newton(&map, &jac, &x0.coeffs, tol, max_iters, &norm)?;
    if !out.converged {
        return Err(Error::NonConvergence {
            iters: out.iters,
            residual: approx_f64(out.residual),
            tol: approx_f64(tol),
            last: out.x.iter().map(|&v| approx_f64(v)).collect(),
        });
    }
    let det = jac(&out.x)?.det();
    Ok(BranchPoint {
        lambda: cfg.lambda,
        state: State::new(out.x, alpha),
        residual: out.residual,
        jac_sign: sign_of(det),
        newton_iters: out.iters,
    })
}

/// Krasnosel'skii comparison: for an autonomous field the fixed-point index
/// of the translation operator over a short time must equal the stationary
/// degree. `t_bar` is the largest tested time below which every tested
/// degree agrees (at least two agreements required, so the check is never
/// vacuously green).
#[derive(Debug, Clone, serde::Serialize)]
pub struct KrasEntry {
    pub t: f64,
    pub degree: Option<i64>,
    pub certificate: Option<DegreeResult<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct KrasnoselskiiReport {
    pub degree_stationary: i64,
    pub stationary_certificate: DegreeResult<f64>,
    pub entries: Vec<KrasEntry>,
    pub t_bar: Option<f64>,
    pub pass: bool,
}

pub fn verify_krasnoselskii<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    cfg: &IntegratorConfig<R>,
    ball: &Ball<R>,
    t_list: &[R],
    opts: &DegreeOptions,
) -> Result<KrasnoselskiiReport> {
    if !field.autonomous {
        return Err(Error::Unsupported(
            "the translation comparison needs an autonomous field; average or blend it first"
                .into(),
        ));
    }
    if t_list.len() < 2 {
        return Err(Error::domain(
            "the comparison needs at least two translation times",
        ));
    }
    let mut times: Vec<R> = t_list.to_vec();
    if times.iter().any(|&t| t <= R::zero()) {
        return Err(Error::domain("translation times must be positive"));
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("times are finite"));
    if times.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("translation times must be distinct"));
    }

    let stationary = deg_alpha(op, field, ball, R::zero(), opts)?;

    let full = cfg.with_lambda(R::one());
    let entries: Vec<KrasEntry> = times
        .iter()
        .map(|&t| {
            let run = field
                .with_period(t)
                .and_then(|ft| deg_poincare(op, &ft, &full, ball, opts));
            match run {
                Ok(res) => KrasEntry {
                    t: approx_f64(t),
                    degree: Some(res.value),
                    certificate: Some(res.to_f64()),
                    error: None,
                },
                Err(e) => KrasEntry {
                    t: approx_f64(t),
                    degree: None,
                    certificate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut agreeing = 0usize;
    for e in &entries {
        if e.degree == Some(stationary.value) {
            agreeing += 1;
        } else {
            break;
        }
    }
    let t_bar = if agreeing >= 2 {
        Some(entries[agreeing - 1].t)
    } else {
        None
    };
    Ok(KrasnoselskiiReport {
        degree_stationary: stationary.value,
        stationary_certificate: stationary.to_f64(),
        entries,
        t_bar,
        pass: t_bar.is_some(),
    })
}

/// Averaging comparison: as lambda decreases, the fixed point of the
/// translation operator must approach the averaged solution monotonically,
/// and at the two smallest lambdas its index must equal the degree of the
/// averaged field.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AveragingEntry {
    pub lambda: f64,
    pub distance: f64,
    pub degree: Option<i64>,
    pub certificate: Option<DegreeResult<f64>>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AveragingReport {
    pub averaged_coeffs: Vec<f64>,
    pub degree_averaged: i64,
    pub averaged_certificate: DegreeResult<f64>,
    pub entries: Vec<AveragingEntry>,
    pub monotone: bool,
    pub degrees_match: bool,
    pub pass: bool,
}

pub fn verify_averaging<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    cfg: &IntegratorConfig<R>,
    ball: &Ball<R>,
    lambda_list: &[R],
    n_quad: usize,
    opts: &DegreeOptions,
) -> Result<AveragingReport> {
    if lambda_list.len() < 2 {
        return Err(Error::domain("the averaging sweep needs at least two lambdas"));
    }
    let mut lambdas: Vec<R> = lambda_list.to_vec();
    if lambdas
        .iter()
        .any(|&l| l <= R::zero() || l > R::one())
    {
        return Err(Error::domain("sweep lambdas must lie in (0, 1]"));
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).expect("lambdas are finite"));
    if lambdas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("sweep lambdas must be distinct"));
    }

    let averaged_field = field.blend(R::zero(), n_quad)?;
    let newton_tol = real::<R>(1e-10);
    let averaged = solve_averaged(op, field, &ball.center, newton_tol, 50, n_quad)?;
    let dist_center = {
        let d: Vec<R> = averaged
            .state
            .coeffs
            .iter()
            .zip(&ball.center.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        op.alpha_norm(&d, field.alpha)
    };
    if dist_center >= ball.radius {
        return Err(Error::domain(format!(
            "averaged solution sits outside the verification ball (distance {:.3e} >= radius {:.3e})",
            approx_f64(dist_center),
            approx_f64(ball.radius)
        )));
    }
    let averaged_degree_result = deg_alpha(op, &averaged_field, ball, R::zero(), opts)?;
    let degree_averaged = averaged_degree_result.value;

    let mut entries: Vec<AveragingEntry> = Vec::with_capacity(lambdas.len());
    let mut warm = averaged.state.clone();
    let n_small = 2.min(lambdas.len());
    for (i, &lam) in lambdas.iter().enumerate() {
        let cfg_l = cfg.with_lambda(lam);
        let bp = solve_fixed_point(op, field, &cfg_l, &warm, newton_tol, 50)?;
        let d: Vec<R> = bp
            .state
            .coeffs
            .iter()
            .zip(&averaged.state.coeffs)
            .map(|(&a, &b)| a - b)
            .collect();
        let distance = approx_f64(op.alpha_norm(&d, field.alpha));
        let certificate = if i >= lambdas.len() - n_small {
            Some(deg_poincare(op, field, &cfg_l, ball, opts)?.to_f64())
        } else {
            None
        };
        entries.push(AveragingEntry {
            lambda: approx_f64(lam),
            distance,
            degree: certificate.as_ref().map(|c| c.value),
            certificate,
        });
        warm = bp.state;
    }

    let monotone = entries.windows(2).all(|w| {
        let slack = 1e-12 * (1.0 + w[0].distance);
        w[1].distance <= w[0].distance + slack
    });
    let degrees_match = entries
        .iter()
        .filter_map(|e| e.degree)
        .all(|d| d == degree_averaged)
        && entries.iter().filter(|e| e.degree.is_some()).count() == n_small;
    let pass = monotone && degrees_match;
    Ok(AveragingReport {
        averaged_coeffs: averaged
            .state
            .coeffs
            .iter()
            .map(|&v| approx_f64(v))
            .collect(),
        degree_averaged,
        averaged_certificate: averaged_degree_result.to_f64(),
        entries,
        monotone,
        degrees_match,
        pass,
    })
}

/// Step control for the lambda continuation.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions<R> {
    pub lambda_start: R,
    pub lambda_end: R,
    pub initial_step: R,
    pub min_step: R,
    pub max_step: R,
    pub growth: R,
    pub newton_tol: R,
    pub max_newton_iters: usize,
}

impl<R: Scalar> ContinuationOptions<R> {
    /// Contract defaults: start at lambda = 0.05, reach 1, Newton tolerance
    /// 1e-10 with 30 iterations, steps in [1e-4, 0.2] growing by 1.5.
    pub fn standard() -> Self {
        ContinuationOptions {
            lambda_start: real(0.05),
            lambda_end: R::one(),
            initial_step: real(0.05),
            min_step: real(1e-4),
            max_step: real(0.2),
            growth: real(1.5),
            newton_tol: real(1e-10),
            max_newton_iters: 30,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda_start > R::zero() && self.lambda_start <= self.lambda_end) {
            return Err(Error::domain("need 0 < lambda_start <= lambda_end"));
        }
        if self.lambda_end > R::one() {
            return Err(Error::domain("lambda_end must not exceed 1"));
        }
        if !(self.min_step > R::zero() && self.min_step <= self.initial_step) {
            return Err(Error::domain("need 0 < min_step <= initial_step"));
        }
        if self.initial_step > self.max_step || self.growth < R::one() {
            return Err(Error::domain(
                "need initial_step <= max_step and growth >= 1",
            ));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::domain("continuation needs at least one Newton iteration"));
        }
        Ok(())
    }
}

/// Continues the fixed point of the translation operator from lambda_start
/// to lambda_end with a secant predictor and adaptive steps. Failure to
/// advance past the minimal step reports the partial branch.
pub fn continue_branch<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    cfg: &IntegratorConfig<R>,
    x0: &State<R>,
    opts: &ContinuationOptions<R>,
) -> Result<Branch<R>> {
    opts.validate()?;
    let alpha = field.alpha;
    let mut warnings: Vec<String> = Vec::new();

    let first = solve_fixed_point(
        op,
        field,
        &cfg.with_lambda(opts.lambda_start),
        x0,
        opts.newton_tol,
        opts.max_newton_iters,
    )?;
    if first.jac_sign == 0 {
        warnings.push(format!(
            "degenerate linearization at lambda={:.6}",
            approx_f64(first.lambda)
        ));
    }
    let mut points = vec![first];
    let mut step = opts.initial_step;

    while points.last().expect("nonempty").lambda < opts.lambda_end {
        let lam_k = points.last().expect("nonempty").lambda;
        let target = if lam_k + step > opts.lambda_end {
            opts.lambda_end
        } else {
            lam_k + step
        };
        let predictor: Vec<R> = if points.len() >= 2 {
            let a = &points[points.len() - 2];
            let b = &points[points.len() - 1];
            let ratio = (target - b.lambda) / (b.lambda - a.lambda);
            b.state
                .coeffs
                .iter()
                .zip(&a.state.coeffs)
                .map(|(&xb, &xa)| xb + (xb - xa) * ratio)
                .collect()
        } else {
            points[0].state.coeffs.clone()
        };
        let attempt = solve_fixed_point(
            op,
            field,
            &cfg.with_lambda(target),
            &State::new(predictor, alpha),
            opts.newton_tol,
            opts.max_newton_iters,
        );
        match attempt {
            Ok(bp) => {
                let prev_sign = points.last().expect("nonempty").jac_sign;
                if bp.jac_sign == 0 {
                    warnings.push(format!(
                        "degenerate linearization at lambda={:.6}",
                        approx_f64(bp.lambda)
                    ));
                } else if prev_sign != 0 && bp.jac_sign != prev_sign {
                    warnings.push(format!(
                        "orientation flip between lambda={:.6} and lambda={:.6}: a bifurcation crosses this interval",
                        approx_f64(lam_k),
                        approx_f64(bp.lambda)
                    ));
                }
                let easy = bp.newton_iters <= 5;
                points.push(bp);
                if easy {
                    let grown = step * opts.growth;
                    step = if grown > opts.max_step {
                        opts.max_step
                    } else {
                        grown
                    };
                }
            }
            Err(_) => {
                step = step / real::<R>(2.0);
                if step < opts.min_step {
                    let partial: Vec<PartialBranchPoint> = points
                        .iter()
                        .map(|p| PartialBranchPoint {
                            lambda: approx_f64(p.lambda),
                            residual: approx_f64(p.residual),
                            jac_sign: p.jac_sign,
                            alpha_norm: approx_f64(
                                op.alpha_norm(&p.state.coeffs, alpha),
                            ),
                        })
                        .collect();
                    return Err(Error::ContinuationStuck {
                        lambda: approx_f64(target),
                        min_step: approx_f64(opts.min_step),
                        partial,
                    });
                }
            }
        }
    }
    Ok(Branch { points, warnings })
}

/// Empirical confinement radius: the smallest grid radius R such that every
/// fixed point reached by Newton from boundary seeds stays strictly inside
/// R (1 - 1e-3), across all sweep lambdas. Returns None (with a warning)
/// when no grid radius confines the located fixed points.
#[derive(Debug, Clone, serde::Serialize)]
pub struct R0Estimate<R> {
    pub radius: Option<R>,
    pub warnings: Vec<String>,
}

pub fn estimate_r0<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    cfg: &IntegratorConfig<R>,
    radius_grid: &[R],
    lambda_list: &[R],
    seed: u64,
) -> Result<R0Estimate<R>> {
    if radius_grid.is_empty() {
        return Err(Error::domain("the radius grid must be nonempty"));
    }
    if radius_grid.iter().any(|&r| r <= R::zero())
        || radius_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::domain(
            "the radius grid must be positive and strictly increasing",
        ));
    }
    if lambda_list.is_empty()
        || lambda_list
            .iter()
            .any(|&l| l <= R::zero() || l > R::one())
    {
        return Err(Error::domain("sweep lambdas must lie in (0, 1]"));
    }
    let alpha = field.alpha;
    let n = op.dim();
    let seeds_per_radius = 32usize;
    let newton_tol = real::<R>(1e-10);
    let margin = real::<R>(1.0 - 1e-3);
    let center_f = vec![0.0f64; n];
    let norm_f = |x: &[f64]| -> f64 {
        let xr: Vec<R> = x.iter().map(|&v| real(v)).collect();
        approx_f64(op.alpha_norm(&xr, alpha))
    };

    let mut warnings: Vec<String> = Vec::new();
    let mut located_any_overall = false;
    for (ri, &r) in radius_grid.iter().enumerate() {
        let mut confined = true;
        let mut located_here = false;
        'sweep: for &lam in lambda_list {
            let cfg_l = cfg.with_lambda(lam);
            let mut sampler = BallSampler::new(n, seed.wrapping_add(ri as u64));
            for _ in 0..seeds_per_radius {
                let p = sampler.next_on_sphere(&center_f, approx_f64(r), &norm_f);
                let x0 = State::new(p.into_iter().map(real).collect::<Vec<R>>(), alpha);
                match solve_fixed_point(op, field, &cfg_l, &x0, newton_tol, 30) {
                    Ok(bp) => {
                        located_here = true;
                        located_any_overall = true;
                        let nrm = op.alpha_norm(&bp.state.coeffs, alpha);
                        if nrm >= r * margin {
                            confined = false;
                            break 'sweep;
                        }
                    }
                    // Runs that diverge or fail to converge carry no
                    // confinement evidence either way.
                    Err(_) => {}
                }
            }
        }
        if confined {
            if !located_here {
                warnings.push(format!(
                    "radius {:.6} accepted without locating any fixed point",
                    approx_f64(r)
                ));
            }
            return Ok(R0Estimate {
                radius: Some(r),
                warnings,
            });
        }
    }
    warnings.push(if located_any_overall {
        "no grid radius confines the located fixed points; enlarge the grid".to_string()
    } else {
        "no grid radius qualified and no fixed point was located".to_string()
    });
    Ok(R0Estimate {
        radius: None,
        warnings,
    })
}
