//! Damped Newton iteration on coefficient vectors, shared by the averaged
//! solver, fixed-point location, degree multistart, and continuation.
//!
//! The backtracking line search accepts a step when the residual norm drops
//! by the Armijo fraction; stalls (no acceptable step, or a singular
//! Jacobian) end the run with `converged = false` instead of an error, so
//! multistart callers can classify outcomes. Errors from the map or Jacobian
//! themselves (for instance a diverging trajectory) propagate.

use crate::error::Result;
use crate::linalg::Mat;
use crate::scalar::{real, Scalar};

#[derive(Debug, Clone)]
pub struct NewtonOutcome<R> {
    pub x: Vec<R>,
    pub residual: R,
    pub iters: usize,
    pub converged: bool,
    /// True when the run ended because no progress was possible (singular
    /// Jacobian or failed line search), as opposed to the iteration cap.
    pub stalled: bool,
}

pub fn damped_newton<R: Scalar>(
    map: &dyn Fn(&[R]) -> Result<Vec<R>>,
    jac: &dyn Fn(&[R]) -> Result<Mat<R>>,
    x0: &[R],
    tol: R,
    max_iters: usize,
    norm: &dyn Fn(&[R]) -> R,
) -> Result<NewtonOutcome<R>> {
    let mut x = x0.to_vec();
    let mut g = map(&x)?;
    let mut r = norm(&g);
    if r <= tol {
        return Ok(NewtonOutcome {
            x,
            residual: r,
            iters: 0,
            converged: true,
            stalled: false,
        });
    }
    let min_damping = real::<R>(1.0 / 1024.0);
    let armijo = real::<R>(0.25);
    for it in 1..=max_iters {
        let j = jac(&x)?;
        let rhs: Vec<R> = g.iter().map(|&v| -v).collect();
        let step = match j.solve(&rhs) {
            Ok(s) => s,
            Err(_) => {
                return Ok(NewtonOutcome {
                    x,
                    residual: r,
                    iters: it - 1,
                    converged: false,
                    stalled: true,
                })
            }
        };
        let mut damping = R::one();
        loop {
            let x_new: Vec<R> = x
                .iter()
                .zip(&step)
                .map(|(&xi, &si)| xi + damping * si)
                .collect();
            let g_new = map(&x_new)?;
            let r_new = norm(&g_new);
            if r_new <= (R::one() - armijo * damping) * r {
                x = x_new;
                g = g_new;
                r = r_new;
                break;
            }
            damping = damping * real::<R>(0.5);
            if damping < min_damping {
                return Ok(NewtonOutcome {
                    x,
                    residual: r,
                    iters: it,
                    converged: false,
                    stalled: true,
                });
            }
        }
        if r <= tol {
            return Ok(NewtonOutcome {
                x,
                residual: r,
                iters: it,
                converged: true,
                stalled: false,
            });
        }
    }
    Ok(NewtonOutcome {
        x,
        residual: r,
        iters: max_iters,
        converged: false,
        stalled: false,
    })
}
