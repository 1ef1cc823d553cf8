//! Topological degree on Galerkin truncations.
//!
//! The Brouwer degree of a map on a ball is computed as the sum of Jacobian
//! determinant signs over its regular zeros, located by damped Newton from a
//! deterministic multistart. Degenerate zeros abort with a diagnostic rather
//! than being perturbed away, and boundary admissibility is certified by
//! sampling the sphere, with the certificate stored in the result. On top of
//! the raw Brouwer engine sit the two degrees the periodic-solution program
//! needs: deg_alpha(-A + F, U) computed through the compact resolvent
//! composition x - (mu I + A)^{-1}(mu x + F(x)), whose value is independent
//! of the admissible shift mu, and the degree of I minus the translation
//! operator.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{fd_jacobian, Mat};
use crate::newton::damped_newton;
use crate::sampling::BallSampler;
use crate::scalar::{approx_f64, real, Scalar};
use crate::solver::{poincare, poincare_jacobian, IntegratorConfig};
use crate::spectral::{SpectralOperator, State};

/// Open ball in the alpha-norm.
#[derive(Debug, Clone)]
pub struct Ball<R> {
    pub center: State<R>,
    pub radius: R,
}

impl<R: Scalar> Ball<R> {
    pub fn new(center: State<R>, radius: R) -> Result<Self> {
        if radius <= R::zero() {
            return Err(Error::domain("ball radius must be positive"));
        }
        Ok(Ball { center, radius })
    }
}

/// A located regular zero with the sign of its Jacobian determinant.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LocatedZero<R> {
    pub coeffs: Vec<R>,
    pub det: R,
    pub sign: i8,
}

/// Certified degree value. `value` always equals the sum of the zero signs;
/// `min_abs_det` is absent when the zero list is empty (certified zero-free
/// ball), and `min_boundary_residual` is the smallest map norm seen on the
/// sampled sphere.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DegreeResult<R> {
    pub value: i64,
    pub zeros: Vec<LocatedZero<R>>,
    pub method: &'static str,
    pub min_abs_det: Option<R>,
    pub min_boundary_residual: R,
}

impl<R: Scalar> DegreeResult<R> {
    /// f64 view of the certificate, the form reports embed.
    pub fn to_f64(&self) -> DegreeResult<f64> {
        DegreeResult {
            value: self.value,
            zeros: self
                .zeros
                .iter()
                .map(|z| LocatedZero {
                    coeffs: z.coeffs.iter().map(|&c| approx_f64(c)).collect(),
                    det: approx_f64(z.det),
                    sign: z.sign,
                })
                .collect(),
            method: self.method,
            min_abs_det: self.min_abs_det.map(approx_f64),
            min_boundary_residual: approx_f64(self.min_boundary_residual),
        }
    }
}

/// Tunables of the Brouwer engine. The defaults are the contract values:
/// at least 64 starts, 256 boundary samples per dimension, dedup radius
/// 1e-8, regularity threshold 1e-10 on |det|.
#[derive(Debug, Clone, Copy)]
pub struct DegreeOptions {
    pub min_starts: usize,
    pub boundary_samples_per_dim: usize,
    pub interior_samples: usize,
    pub dedupe_tol: f64,
    pub det_tol: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub seed: u64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions {
            min_starts: 64,
            boundary_samples_per_dim: 256,
            interior_samples: 512,
            dedupe_tol: 1e-8,
            det_tol: 1e-10,
            newton_tol: 1e-12,
            max_newton_iters: 50,
            seed: crate::sampling::DEFAULT_SEED,
        }
    }
}

/// Brouwer degree of `map` on `ball` by multistart Newton and Jacobian-sign
/// summation. `norm` measures coefficient vectors (the alpha-norm of the
/// ambient space); `extra_seeds` are tried before the low-discrepancy fill.
pub fn brouwer_degree<R: Scalar>(
    map: &(dyn Fn(&[R]) -> Result<Vec<R>> + Sync),
    jac: &(dyn Fn(&[R]) -> Result<Mat<R>> + Sync),
    ball: &Ball<R>,
    extra_seeds: &[Vec<R>],
    norm: &(dyn Fn(&[R]) -> R + Sync),
    opts: &DegreeOptions,
) -> Result<DegreeResult<R>> {
    let n = ball.center.dim();
    let center = &ball.center.coeffs;
    let radius = ball.radius;
    let dist = |x: &[R]| -> R {
        let d: Vec<R> = x.iter().zip(center).map(|(&a, &b)| a - b).collect();
        norm(&d)
    };

    // Deterministic start set: caller seeds first, then low-discrepancy fill.
    let mut starts: Vec<Vec<R>> = extra_seeds.to_vec();
    {
        let center_f: Vec<f64> = center.iter().map(|&c| approx_f64(c)).collect();
        let norm_f = |x: &[f64]| -> f64 {
            let xr: Vec<R> = x.iter().map(|&v| real(v)).collect();
            approx_f64(norm(&xr))
        };
        let mut sampler = BallSampler::new(n, opts.seed);
        while starts.len() < opts.min_starts {
            let p = sampler.next_in_ball(&center_f, approx_f64(radius), &norm_f);
            starts.push(p.into_iter().map(real).collect());
        }
    }

    let tol = real::<R>(opts.newton_tol) * (R::one() + dist(center) + radius);

    #[derive(Debug)]
    enum RunOutcome<R> {
        Zero(Vec<R>),
        NearBoundary(R),
        StalledInside,
        Clean,
    }

    let runs: Vec<RunOutcome<R>> = starts
        .par_iter()
        .map(|start| {
            match damped_newton(&map, &jac, start, tol, opts.max_newton_iters, &norm) {
                Ok(out) => {
                    if out.converged {
                        let d = dist(&out.x);
                        let margin = real::<R>(1e-6);
                        if (d - radius).abs() <= margin {
                            RunOutcome::NearBoundary(d)
                        } else if d < radius {
                            RunOutcome::Zero(out.x)
                        } else {
                            RunOutcome::Clean
                        }
                    } else if out.stalled && dist(&out.x) < radius {
                        RunOutcome::StalledInside
                    } else {
                        RunOutcome::Clean
                    }
                }
                // A run that blows up or leaves the admissible region is
                // evidence of escape, not of a hidden zero.
                Err(_) => RunOutcome::Clean,
            }
        })
        .collect();

    let mut zeros_raw: Vec<Vec<R>> = Vec::new();
    let mut stalled_inside = 0usize;
    for run in runs {
        match run {
            RunOutcome::Zero(x) => zeros_raw.push(x),
            RunOutcome::NearBoundary(d) => {
                return Err(Error::BoundaryZero {
                    min_residual: (approx_f64(d) - approx_f64(radius)).abs(),
                    threshold: 1e-6,
                });
            }
            RunOutcome::StalledInside => stalled_inside += 1,
            RunOutcome::Clean => {}
        }
    }

    // Dedupe at the contract radius in the ambient norm.
    let dedupe = real::<R>(opts.dedupe_tol);
    let mut zeros: Vec<Vec<R>> = Vec::new();
    for z in zeros_raw {
        let dup = zeros.iter().any(|u| {
            let d: Vec<R> = z.iter().zip(u).map(|(&a, &b)| a - b).collect();
            norm(&d) <= dedupe
        });
        if !dup {
            zeros.push(z);
        }
    }

    // Regularity and signs.
    let mut located = Vec::with_capacity(zeros.len());
    let mut min_abs_det: Option<R> = None;
    for z in &zeros {
        let j = jac(z)?;
        let det = j.det();
        let abs = det.abs();
        if approx_f64(abs) <= opts.det_tol {
            return Err(Error::Degenerate {
                min_abs_det: approx_f64(abs),
                threshold: opts.det_tol,
            });
        }
        // A zero's position must be resolved below the dedupe radius or the
        // distinctness of the list is meaningless. One more Newton
        // correction measures the residual position error; it blows past
        // the radius exactly when the zero is a disguised degenerate
        // cluster (e.g. a double zero absorbs the residual tolerance as a
        // sqrt-sized position blur).
        let correction = j.solve(&map(z)?)?;
        if norm(&correction) > dedupe {
            return Err(Error::Inconclusive(format!(
                "zero located to only {:.3e} in the ambient norm, coarser than the dedupe radius {:.3e}; the zero set is not resolved",
                approx_f64(norm(&correction)),
                approx_f64(dedupe)
            )));
        }
        min_abs_det = Some(match min_abs_det {
            Some(m) if m < abs => m,
            _ => abs,
        });
        located.push(LocatedZero {
            coeffs: z.clone(),
            det,
            sign: if det > R::zero() { 1 } else { -1 },
        });
    }

    // Boundary admissibility certificate on the alpha-sphere.
    let n_boundary = opts.boundary_samples_per_dim * n;
    let boundary_pts: Vec<Vec<R>> = {
        let center_f: Vec<f64> = center.iter().map(|&c| approx_f64(c)).collect();
        let norm_f = |x: &[f64]| -> f64 {
            let xr: Vec<R> = x.iter().map(|&v| real(v)).collect();
            approx_f64(norm(&xr))
        };
        let mut sampler = BallSampler::new(n, opts.seed ^ 0x00B0_17DA);
        (0..n_boundary)
            .map(|_| {
                sampler
                    .next_on_sphere(&center_f, approx_f64(radius), &norm_f)
                    .into_iter()
                    .map(real)
                    .collect()
            })
            .collect()
    };
    let residuals: Vec<R> = boundary_pts
        .par_iter()
        .map(|p| map(p).map(|v| norm(&v)))
        .collect::<Result<Vec<_>>>()?;
    let min_boundary_residual = residuals
        .into_iter()
        .fold(R::infinity(), |a, b| if b < a { b } else { a });
    let boundary_floor = real::<R>(1e-12) * (R::one() + radius);
    if min_boundary_residual <= boundary_floor {
        return Err(Error::BoundaryZero {
            min_residual: approx_f64(min_boundary_residual),
            threshold: approx_f64(boundary_floor),
        });
    }

    if located.is_empty() {
        // Certify a zero-free ball: no run may have stalled inside, and the
        // map must be bounded away from zero on an interior sample.
        if stalled_inside > 0 {
            return Err(Error::Inconclusive(format!(
                "no zero located but {stalled_inside} Newton runs stalled inside the ball"
            )));
        }
        let interior_pts: Vec<Vec<R>> = {
            let center_f: Vec<f64> = center.iter().map(|&c| approx_f64(c)).collect();
            let norm_f = |x: &[f64]| -> f64 {
                let xr: Vec<R> = x.iter().map(|&v| real(v)).collect();
                approx_f64(norm(&xr))
            };
            let mut sampler = BallSampler::new(n, opts.seed ^ 0x1A7E_0D0E);
            (0..opts.interior_samples)
                .map(|_| {
                    sampler
                        .next_in_ball(&center_f, approx_f64(radius), &norm_f)
                        .into_iter()
                        .map(real)
                        .collect()
                })
                .collect()
        };
        let min_interior = interior_pts
            .par_iter()
            .map(|p| map(p).map(|v| norm(&v)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(R::infinity(), |a, b| if b < a { b } else { a });
        if min_interior <= boundary_floor {
            return Err(Error::Inconclusive(format!(
                "no zero located yet the interior residual dips to {:.3e}",
                approx_f64(min_interior)
            )));
        }
        return Ok(DegreeResult {
            value: 0,
            zeros: located,
            method: "jacobian_sign_sum",
            min_abs_det: None,
            min_boundary_residual,
        });
    }

    let value = located.iter().map(|z| z.sign as i64).sum();
    Ok(DegreeResult {
        value,
        zeros: located,
        method: "jacobian_sign_sum",
        min_abs_det,
        min_boundary_residual,
    })
}

/// deg_alpha(-A + F, U) for an autonomous field, realized as the Brouwer
/// degree of x -> x - (mu I + A)^{-1}(mu x + F(x)). Any mu > -omega gives
/// the same value; mu = 0 is the classical compact inverse composition.
pub fn deg_alpha<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    ball: &Ball<R>,
    mu: R,
    opts: &DegreeOptions,
) -> Result<DegreeResult<R>> {
    if !field.autonomous {
        return Err(Error::Unsupported(
            "deg_alpha is defined for autonomous fields; average or blend the field first".into(),
        ));
    }
    if mu <= -op.omega() {
        return Err(Error::domain(format!(
            "resolvent shift {} outside (-omega, +inf)",
            mu
        )));
    }
    let alpha = field.alpha;
    let map = move |x: &[R]| -> Result<Vec<R>> {
        let state = State::new(x.to_vec(), alpha);
        let fx = field.evaluate(R::zero(), &state)?;
        let arg: Vec<R> = x
            .iter()
            .zip(&fx.coeffs)
            .map(|(&xi, &fi)| mu * xi + fi)
            .collect();
        let res = op.resolvent_apply(mu, &State::new(arg, R::zero()))?;
        Ok(x
            .iter()
            .zip(&res.coeffs)
            .map(|(&xi, &ri)| xi - ri)
            .collect())
    };
    let norm = |x: &[R]| op.alpha_norm(x, alpha);
    let jac = move |x: &[R]| -> Result<Mat<R>> {
        let mut g = |v: &[R]| map(v);
        fd_jacobian(&mut g, x, norm(x))
    };
    brouwer_degree(&map, &jac, ball, &[], &norm, opts)
}

/// Degree of I minus the translation operator on the ball: counts discrete
/// T-periodic solutions with orientation.
pub fn deg_poincare<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    cfg: &IntegratorConfig<R>,
    ball: &Ball<R>,
    opts: &DegreeOptions,
) -> Result<DegreeResult<R>> {
    let alpha = field.alpha;
    let map = move |x: &[R]| -> Result<Vec<R>> {
        let state = State::new(x.to_vec(), alpha);
        let phi = poincare(op, field, cfg, &state)?;
        Ok(x
            .iter()
            .zip(&phi.coeffs)
            .map(|(&xi, &pi)| xi - pi)
            .collect())
    };
    let jac = move |x: &[R]| -> Result<Mat<R>> {
        let state = State::new(x.to_vec(), alpha);
        let dphi = poincare_jacobian(op, field, cfg, &state)?;
        let n = x.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j {
                    R::one() - dphi[(i, j)]
                } else {
                    -dphi[(i, j)]
                };
            }
        }
        Ok(m)
    };
    let norm = |x: &[R]| op.alpha_norm(x, alpha);
    brouwer_degree(&map, &jac, ball, &[], &norm, opts)
}

/// One entry of a mu-independence sweep, carrying the full certificate of
/// the degree it computed.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MuEntry {
    pub mu: f64,
    pub degree: Option<i64>,
    pub certificate: Option<DegreeResult<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MuIndependenceReport {
    pub entries: Vec<MuEntry>,
    pub pass: bool,
}

/// Computes deg_alpha for every shift in `mus`; passes iff all computations
/// succeed and agree.
pub fn verify_mu_independence<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    ball: &Ball<R>,
    mus: &[R],
    opts: &DegreeOptions,
) -> Result<MuIndependenceReport> {
    if mus.len() < 2 {
        return Err(Error::domain(
            "mu-independence needs at least two shift values",
        ));
    }
    let entries: Vec<MuEntry> = mus
        .iter()
        .map(|&mu| match deg_alpha(op, field, ball, mu, opts) {
            Ok(res) => MuEntry {
                mu: approx_f64(mu),
                degree: Some(res.value),
                certificate: Some(res.to_f64()),
                error: None,
            },
            Err(e) => MuEntry {
                mu: approx_f64(mu),
                degree: None,
                certificate: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let degrees: Vec<i64> = entries.iter().filter_map(|e| e.degree).collect();
    let pass = degrees.len() == entries.len()
        && degrees.windows(2).all(|w| w[0] == w[1]);
    Ok(MuIndependenceReport { entries, pass })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AdditivityReport<R> {
    pub total: DegreeResult<R>,
    pub parts: Vec<DegreeResult<R>>,
    pub pass: bool,
}

/// Additivity check: deg over the ball must equal the sum over disjoint
/// subballs that jointly contain every located zero.
pub fn verify_additivity<R: Scalar>(
    op: &SpectralOperator<R>,
    field: &Field<R>,
    ball: &Ball<R>,
    subballs: &[Ball<R>],
    mu: R,
    opts: &DegreeOptions,
) -> Result<AdditivityReport<R>> {
    let alpha = field.alpha;
    let norm_diff = |a: &[R], b: &[R]| -> R {
        let d: Vec<R> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
        op.alpha_norm(&d, alpha)
    };
    for (i, bi) in subballs.iter().enumerate() {
        if norm_diff(&bi.center.coeffs, &ball.center.coeffs) + bi.radius > ball.radius {
            return Err(Error::domain(format!(
                "subball {i} is not contained in the ball"
            )));
        }
        for (j, bj) in subballs.iter().enumerate().skip(i + 1) {
            if norm_diff(&bi.center.coeffs, &bj.center.coeffs) <= bi.radius + bj.radius {
                return Err(Error::domain(format!("subballs {i} and {j} overlap")));
            }
        }
    }
    let total = deg_alpha(op, field, ball, mu, opts)?;
    for z in &total.zeros {
        let inside = subballs
            .iter()
            .any(|b| norm_diff(&z.coeffs, &b.center.coeffs) < b.radius);
        if !inside {
            return Err(Error::Coverage(format!(
                "zero at alpha-norm {:.6} from the center lies outside every subball",
                approx_f64(norm_diff(&z.coeffs, &ball.center.coeffs))
            )));
        }
    }
    let parts: Vec<DegreeResult<R>> = subballs
        .iter()
        .map(|b| deg_alpha(op, field, b, mu, opts))
        .collect::<Result<Vec<_>>>()?;
    let sum: i64 = parts.iter().map(|p| p.value).sum();
    let pass = total.value == sum;
    Ok(AdditivityReport { total, parts, pass })
}
