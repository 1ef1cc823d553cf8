//! Time-periodic nonlinearities F(t,.): X^alpha -> X.
//!
//! A field owns its period T, the fractional exponent it consumes, a declared
//! growth envelope c(t) with ||F(t,x)|| <= c(t)(1 + ||x||_alpha), an optional
//! Lipschitz bound, and an optional scalar asymptotic slope f_inf(t) with
//! ||F(t,x) - f_inf(t) x|| / ||x||_alpha -> 0 at infinity. Envelope and
//! Lipschitz data are declared metadata, checked by sampling in tests, not
//! proven. The registry ships the fields the verification suites exercise:
//! linear, forced linear, constant, and coordinatewise cubic; the
//! gradient-dependent reaction field lives in the collocation module.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::spectral::{SpectralOperator, State};

/// Shared closure computing F(t, x) on raw coefficients.
pub type EvalFn<R> = Arc<dyn Fn(R, &[R]) -> Vec<R> + Send + Sync>;
/// Shared scalar function of time (growth envelopes, asymptotic slopes).
pub type ScalarFn<R> = Arc<dyn Fn(R) -> R + Send + Sync>;

/// T-periodic nonlinearity acting on coefficient vectors of fixed dimension.
#[derive(Clone)]
pub struct Field<R> {
    kind: String,
    dim: usize,
    pub period: R,
    pub alpha: R,
    pub lipschitz: Option<R>,
    pub autonomous: bool,
    growth: ScalarFn<R>,
    asymptotic: Option<ScalarFn<R>>,
    eval_fn: EvalFn<R>,
}

impl<R: Scalar> std::fmt::Debug for Field<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("period", &self.period)
            .field("alpha", &self.alpha)
            .field("autonomous", &self.autonomous)
            .finish()
    }
}

impl<R: Scalar> Field<R> {
    /// Assembles a field from raw parts. Registry constructors below are the
    /// usual entry points; tests build one-off fields through this.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        kind: impl Into<String>,
        dim: usize,
        period: R,
        alpha: R,
        growth: ScalarFn<R>,
        lipschitz: Option<R>,
        asymptotic: Option<ScalarFn<R>>,
        autonomous: bool,
        eval_fn: EvalFn<R>,
    ) -> Result<Self> {
        if period <= R::zero() {
            return Err(Error::domain("field period must be positive"));
        }
        if alpha < R::zero() || alpha >= R::one() {
            return Err(Error::domain(format!(
                "fractional exponent must lie in [0,1), got {}",
                alpha
            )));
        }
        Ok(Field {
            kind: kind.into(),
            dim,
            period,
            alpha,
            lipschitz,
            autonomous,
            growth,
            asymptotic,
            eval_fn,
        })
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared growth envelope c(t).
    pub fn growth_envelope(&self, t: R) -> R {
        (self.growth)(t)
    }

    /// Scalar asymptotic slope f_inf(t), when the field declares one.
    pub fn asymptotic_slope(&self, t: R) -> Option<R> {
        self.asymptotic.as_ref().map(|f| f(t))
    }

    pub fn has_asymptotic(&self) -> bool {
        self.asymptotic.is_some()
    }

    /// F(t,x). The result lives in X, hence carries alpha tag 0.
    pub fn evaluate(&self, t: R, x: &State<R>) -> Result<State<R>> {
        if x.alpha != self.alpha {
            return Err(Error::AlphaMismatch {
                state_alpha: x.alpha.to_f64().unwrap_or(f64::NAN),
                want_alpha: self.alpha.to_f64().unwrap_or(f64::NAN),
            });
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(State::new((self.eval_fn)(t, &x.coeffs), R::zero()))
    }

    /// F_hat(x) = (1/T) int_0^T F(tau, x) dtau by the periodic trapezoid rule
    /// with n_quad panels; endpoint identification makes it a plain mean over
    /// left endpoints. Autonomous fields shortcut to a single evaluation.
    pub fn average(&self, x: &State<R>, n_quad: usize) -> Result<State<R>> {
        if n_quad < 2 {
            return Err(Error::domain("average needs at least 2 quadrature panels"));
        }
        if self.autonomous {
            return self.evaluate(R::zero(), x);
        }
        let mut acc = vec![R::zero(); self.dim];
        let nq = real::<R>(n_quad as f64);
        for j in 0..n_quad {
            let t = self.period * real::<R>(j as f64) / nq;
            let fj = self.evaluate(t, x)?;
            for (a, &v) in acc.iter_mut().zip(&fj.coeffs) {
                *a = *a + v;
            }
        }
        for a in acc.iter_mut() {
            *a = *a / nq;
        }
        Ok(State::new(acc, R::zero()))
    }

    /// The homotopy blend mu F(t,x) + (1-mu) F_hat(x). The averaged part is
    /// evaluated with n_quad trapezoid panels per call; the growth envelope
    /// becomes c(t) + (1/T) int_0^T c, and the asymptotic slope blends the
    /// same way. mu = 0 yields the autonomous averaged field.
    pub fn blend(&self, mu: R, n_quad: usize) -> Result<Field<R>> {
        if mu < R::zero() || mu > R::one() {
            return Err(Error::domain(format!(
                "blend parameter must lie in [0,1], got {}",
                mu
            )));
        }
        if n_quad < 2 {
            return Err(Error::domain("blend needs at least 2 quadrature panels"));
        }
        let base = self.clone();
        let alpha = self.alpha;
        let one_minus = R::one() - mu;
        let eval_fn: EvalFn<R> = Arc::new(move |t, coeffs: &[R]| {
            let x = State::new(coeffs.to_vec(), alpha);
            // Unwraps are safe: the state is rebuilt with the base field's
            // own alpha and dimension.
            let avg = base.average(&x, n_quad).unwrap();
            if mu == R::zero() {
                return avg.coeffs;
            }
            let inst = base.evaluate(t, &x).unwrap();
            inst.coeffs
                .iter()
                .zip(&avg.coeffs)
                .map(|(&fi, &fa)| mu * fi + one_minus * fa)
                .collect()
        });

        let growth_base = self.growth.clone();
        let cbar = {
            let mut acc = R::zero();
            let nq = real::<R>(n_quad as f64);
            for j in 0..n_quad {
                let t = self.period * real::<R>(j as f64) / nq;
                acc = acc + (self.growth)(t);
            }
            acc / nq
        };
        let growth: ScalarFn<R> = Arc::new(move |t| growth_base(t) + cbar);

        let asymptotic: Option<ScalarFn<R>> = self.asymptotic.as_ref().map(|f| {
            let f = f.clone();
            let fbar = {
                let mut acc = R::zero();
                let nq = real::<R>(n_quad as f64);
                for j in 0..n_quad {
                    let t = self.period * real::<R>(j as f64) / nq;
                    acc = acc + f(t);
                }
                acc / nq
            };
            let g: ScalarFn<R> = Arc::new(move |t| mu * f(t) + one_minus * fbar);
            g
        });

        Field::from_parts(
            format!("blend[mu={}]({})", mu, self.kind),
            self.dim,
            self.period,
            self.alpha,
            growth,
            self.lipschitz,
            asymptotic,
            mu == R::zero() || self.autonomous,
            eval_fn,
        )
    }

    /// ||F(t,x) - f_inf(t) x|| / ||x||_alpha, the quantity whose decay at
    /// infinity makes the field asymptotically linear.
    pub fn asymptotic_defect(
        &self,
        op: &SpectralOperator<R>,
        x: &State<R>,
        t: R,
    ) -> Result<R> {
        let slope = self
            .asymptotic
            .as_ref()
            .ok_or_else(|| {
                Error::Unsupported("field declares no asymptotic linear part".into())
            })?
            .clone();
        let norm_alpha = op.alpha_norm(&x.coeffs, self.alpha);
        if norm_alpha <= R::zero() {
            return Err(Error::domain(
                "asymptotic defect needs a state with positive alpha-norm",
            ));
        }
        let fx = self.evaluate(t, x)?;
        let s = slope(t);
        let mut num = R::zero();
        for (&f, &c) in fx.coeffs.iter().zip(&x.coeffs) {
            let d = f - s * c;
            num = num + d * d;
        }
        Ok(num.sqrt() / norm_alpha)
    }

    /// Clone with a different period. Meaningful only for autonomous fields,
    /// where the period merely sets the integration horizon of the
    /// translation operator.
    pub fn with_period(&self, period: R) -> Result<Field<R>> {
        if !self.autonomous {
            return Err(Error::Unsupported(
                "changing the period of a time-dependent field would change the field".into(),
            ));
        }
        if period <= R::zero() {
            return Err(Error::domain("field period must be positive"));
        }
        let mut f = self.clone();
        f.period = period;
        Ok(f)
    }
}

/// Embedding constant of X^alpha into X on the given spectrum:
/// ||x|| <= max(1, omega^{-alpha}) ||x||_alpha.
fn embed<R: Scalar>(op: &SpectralOperator<R>, alpha: R) -> R {
    let e = op.omega().powf(-alpha);
    if e > R::one() {
        e
    } else {
        R::one()
    }
}

/// F(t,x) = (slope + osc cos(2 pi t / T)) x: multiplication by a T-periodic
/// scalar, the simplest asymptotically linear field.
pub fn linear<R: Scalar>(
    op: &SpectralOperator<R>,
    period: R,
    alpha: R,
    slope: R,
    osc: R,
) -> Result<Field<R>> {
    let two_pi = real::<R>(2.0) * R::PI();
    let coef = move |t: R, period: R| slope + osc * (two_pi * t / period).cos();
    let p = period;
    let eval_fn: EvalFn<R> = Arc::new(move |t, coeffs: &[R]| {
        let c = coef(t, p);
        coeffs.iter().map(|&x| c * x).collect()
    });
    let emb = embed(op, alpha);
    let growth: ScalarFn<R> = Arc::new(move |t| (coef(t, p)).abs() * emb);
    let lip = (slope.abs() + osc.abs()) * emb;
    let asym: ScalarFn<R> = Arc::new(move |t| coef(t, p));
    Field::from_parts(
        "linear",
        op.dim(),
        period,
        alpha,
        growth,
        Some(lip),
        Some(asym),
        osc == R::zero(),
        eval_fn,
    )
}

/// F(t,x) = slope x + (a + b cos(2 pi t / T)) e_1: linear part plus scalar
/// forcing on the first mode.
pub fn forced_linear<R: Scalar>(
    op: &SpectralOperator<R>,
    period: R,
    alpha: R,
    slope: R,
    a: R,
    b: R,
) -> Result<Field<R>> {
    let two_pi = real::<R>(2.0) * R::PI();
    let p = period;
    let eval_fn: EvalFn<R> = Arc::new(move |t, coeffs: &[R]| {
        let force = a + b * (two_pi * t / p).cos();
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                if k == 0 {
                    slope * x + force
                } else {
                    slope * x
                }
            })
            .collect()
    });
    let emb = embed(op, alpha);
    let growth: ScalarFn<R> =
        Arc::new(move |t| slope.abs() * emb + (a + b * (two_pi * t / p).cos()).abs());
    let asym: ScalarFn<R> = Arc::new(move |_| slope);
    Field::from_parts(
        "forced_linear",
        op.dim(),
        period,
        alpha,
        growth,
        Some(slope.abs() * emb),
        Some(asym),
        b == R::zero(),
        eval_fn,
    )
}

/// F(x) = x0, a constant field; the normalization case of the degree.
pub fn constant<R: Scalar>(
    op: &SpectralOperator<R>,
    period: R,
    alpha: R,
    value: Vec<R>,
) -> Result<Field<R>> {
    if value.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: value.len(),
        });
    }
    let norm = value.iter().map(|&v| v * v).sum::<R>().sqrt();
    let v = value.clone();
    let eval_fn: EvalFn<R> = Arc::new(move |_, _| v.clone());
    let growth: ScalarFn<R> = Arc::new(move |_| norm);
    let asym: ScalarFn<R> = Arc::new(|_| R::zero());
    Field::from_parts(
        "constant",
        op.dim(),
        period,
        alpha,
        growth,
        Some(R::zero()),
        Some(asym),
        true,
        eval_fn,
    )
}

/// Coordinatewise cubic F_k(x) = x_k - x_k^3, the logistic-type autonomous
/// field with three zeros per mode crossing the spectrum. Its growth envelope
/// is honest only on states with ||x||_alpha <= envelope_radius, which is the
/// ball the degree suites probe.
pub fn cubic<R: Scalar>(
    op: &SpectralOperator<R>,
    period: R,
    alpha: R,
    envelope_radius: R,
) -> Result<Field<R>> {
    if envelope_radius <= R::zero() {
        return Err(Error::domain("cubic envelope radius must be positive"));
    }
    let eval_fn: EvalFn<R> = Arc::new(|_, coeffs: &[R]| {
        coeffs.iter().map(|&s| s - s * s * s).collect()
    });
    let emb = embed(op, alpha);
    // |s - s^3| <= (1 + r_inf^2) |s| where r_inf bounds each coordinate on
    // the declared ball.
    let r_inf = op.omega().powf(-alpha) * envelope_radius;
    let c = (R::one() + r_inf * r_inf) * emb;
    let growth: ScalarFn<R> = Arc::new(move |_| c);
    let lip = (R::one() + real::<R>(3.0) * r_inf * r_inf) * emb;
    Field::from_parts(
        "cubic",
        op.dim(),
        period,
        alpha,
        growth,
        Some(lip),
        None,
        true,
        eval_fn,
    )
}
