//! Substitution (Nemytskii) operator on (0, pi) with gradient dependence.
//!
//! A coefficient vector c is read as the function u(xi) = sum_k c_k sin(k xi)
//! in the Dirichlet sine basis tied to the mode index. Evaluation goes
//! coefficients -> samples of u and u' at M uniform interior nodes ->
//! pointwise f(t, xi, u, u') -> projection back to the first N coefficients
//! by the discrete sine quadrature. M >= 2N nodes keep aliasing of
//! polynomial-like f out of the retained band. On the band k <= M the
//! quadrature is the exact L2 projection, with c_k = (2/pi) int_0^pi u sin.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::{real, Scalar};
use crate::spectral::SpectralOperator;

/// Pointwise reaction term f(t, xi, s, y) with y standing for u'(xi),
/// together with the collocation resolution.
#[derive(Clone)]
pub struct NemytskiiSpec<R> {
    pub f: Arc<dyn Fn(R, R, R, R) -> R + Send + Sync>,
    pub collocation_points: usize,
}

/// Precomputed sine/cosine tables for N retained modes on M interior nodes
/// xi_j = j pi / (M+1).
pub struct SineTransform<R> {
    n_modes: usize,
    m_nodes: usize,
    nodes: Vec<R>,
    sin_kj: Vec<R>,
    cos_kj: Vec<R>,
}

impl<R: Scalar> SineTransform<R> {
    pub fn new(n_modes: usize, m_nodes: usize) -> Self {
        assert!(n_modes >= 1 && m_nodes >= n_modes);
        let pi = R::PI();
        let mp1 = real::<R>((m_nodes + 1) as f64);
        let nodes: Vec<R> = (1..=m_nodes)
            .map(|j| pi * real::<R>(j as f64) / mp1)
            .collect();
        let mut sin_kj = Vec::with_capacity(n_modes * m_nodes);
        let mut cos_kj = Vec::with_capacity(n_modes * m_nodes);
        for k in 1..=n_modes {
            let kf = real::<R>(k as f64);
            for &xi in &nodes {
                sin_kj.push((kf * xi).sin());
                cos_kj.push((kf * xi).cos());
            }
        }
        SineTransform {
            n_modes,
            m_nodes,
            nodes,
            sin_kj,
            cos_kj,
        }
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    /// Samples u(xi_j) = sum_k c_k sin(k xi_j).
    pub fn synthesize(&self, coeffs: &[R]) -> Vec<R> {
        assert_eq!(coeffs.len(), self.n_modes);
        let mut out = vec![R::zero(); self.m_nodes];
        for k in 0..self.n_modes {
            let ck = coeffs[k];
            let row = &self.sin_kj[k * self.m_nodes..(k + 1) * self.m_nodes];
            for (o, &s) in out.iter_mut().zip(row) {
                *o = *o + ck * s;
            }
        }
        out
    }

    /// Samples u'(xi_j) = sum_k k c_k cos(k xi_j).
    pub fn synthesize_derivative(&self, coeffs: &[R]) -> Vec<R> {
        assert_eq!(coeffs.len(), self.n_modes);
        let mut out = vec![R::zero(); self.m_nodes];
        for k in 0..self.n_modes {
            let ck = real::<R>((k + 1) as f64) * coeffs[k];
            let row = &self.cos_kj[k * self.m_nodes..(k + 1) * self.m_nodes];
            for (o, &c) in out.iter_mut().zip(row) {
                *o = *o + ck * c;
            }
        }
        out
    }

    /// Projects M samples onto the first N sine coefficients:
    /// c_k = (2/(M+1)) sum_j v_j sin(k xi_j).
    pub fn project(&self, samples: &[R]) -> Vec<R> {
        assert_eq!(samples.len(), self.m_nodes);
        let w = real::<R>(2.0 / (self.m_nodes + 1) as f64);
        (0..self.n_modes)
            .map(|k| {
                let row = &self.sin_kj[k * self.m_nodes..(k + 1) * self.m_nodes];
                let mut acc = R::zero();
                for (&v, &s) in samples.iter().zip(row) {
                    acc = acc + v * s;
                }
                w * acc
            })
            .collect()
    }
}

/// Builds the substitution field for the given reaction term. The caller
/// supplies the metadata the abstract problem needs: the growth envelope,
/// and optionally a Lipschitz bound and a scalar asymptotic slope.
/// Gradient dependence requires alpha in (1/2, 1), where X^alpha embeds into
/// the space of functions whose derivative the collocation can see.
#[allow(clippy::too_many_arguments)]
pub fn build_nemytskii<R: Scalar>(
    spec: &NemytskiiSpec<R>,
    op: &SpectralOperator<R>,
    period: R,
    alpha: R,
    growth: Arc<dyn Fn(R) -> R + Send + Sync>,
    lipschitz: Option<R>,
    asymptotic: Option<Arc<dyn Fn(R) -> R + Send + Sync>>,
    autonomous: bool,
) -> Result<Field<R>> {
    let half = real::<R>(0.5);
    if alpha <= half || alpha >= R::one() {
        return Err(Error::domain(format!(
            "gradient-dependent substitution operator needs alpha in (1/2,1), got {}",
            alpha
        )));
    }
    let n = op.dim();
    let m = spec.collocation_points;
    if m < 2 * n {
        return Err(Error::domain(format!(
            "anti-aliasing requires M >= 2N collocation points, got M={m}, N={n}"
        )));
    }
    let transform = Arc::new(SineTransform::<R>::new(n, m));
    let f = spec.f.clone();
    let eval_fn = Arc::new(move |t: R, coeffs: &[R]| {
        let u = transform.synthesize(coeffs);
        let du = transform.synthesize_derivative(coeffs);
        let vals: Vec<R> = transform
            .nodes()
            .iter()
            .zip(u.iter().zip(&du))
            .map(|(&xi, (&s, &y))| f(t, xi, s, y))
            .collect();
        transform.project(&vals)
    });
    Field::from_parts(
        "nemytskii",
        n,
        period,
        alpha,
        growth,
        lipschitz,
        asymptotic,
        autonomous,
        eval_fn,
    )
}

/// Registry field: f(t, xi, s, y) = slope s + amp cos(2 pi t/T) sin(xi)
/// + kappa tanh(y). The tanh saturates the gradient dependence so the
/// envelope stays linear in |s|, and the asymptotic slope is the constant
/// `slope`. Collocation uses M = 2N nodes.
pub fn gradient<R: Scalar>(
    op: &SpectralOperator<R>,
    period: R,
    alpha: R,
    slope: R,
    amp: R,
    kappa: R,
) -> Result<Field<R>> {
    let two_pi = real::<R>(2.0) * R::PI();
    let p = period;
    let f: Arc<dyn Fn(R, R, R, R) -> R + Send + Sync> = Arc::new(move |t, xi, s, y| {
        slope * s + amp * (two_pi * t / p).cos() * xi.sin() + kappa * y.tanh()
    });
    let spec = NemytskiiSpec {
        f,
        collocation_points: 2 * op.dim(),
    };
    // |f| <= m(t)(1+|s|) pointwise with m(t) = max(|slope|, |amp cos| + |kappa|),
    // which transfers to ||F(t,u)|| <= sqrt(2) m(t) max(1, omega^-alpha)
    // (1 + ||u||_alpha) through the discrete Parseval identity.
    let sqrt2 = real::<R>(2.0).sqrt();
    let omega_emb = {
        let e = op.omega().powf(-alpha);
        if e > R::one() {
            e
        } else {
            R::one()
        }
    };
    let growth: Arc<dyn Fn(R) -> R + Send + Sync> = Arc::new(move |t| {
        let forcing = (amp * (two_pi * t / p).cos()).abs() + kappa.abs();
        let m = if slope.abs() > forcing {
            slope.abs()
        } else {
            forcing
        };
        sqrt2 * m * omega_emb
    });
    // |f(s1,y1) - f(s2,y2)| <= |slope||s1-s2| + |kappa||y1-y2| (tanh is
    // 1-Lipschitz); the derivative channel costs sup_k k mu_k^{-alpha}.
    let deriv_emb = op
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &mu)| real::<R>((i + 1) as f64) * mu.powf(-alpha))
        .fold(R::zero(), |a, b| if b > a { b } else { a });
    let lip = sqrt2 * (slope.abs() * omega_emb + kappa.abs() * deriv_emb);
    let asym: Arc<dyn Fn(R) -> R + Send + Sync> = Arc::new(move |_| slope);
    build_nemytskii(
        &spec,
        op,
        period,
        alpha,
        growth,
        Some(lip),
        Some(asym),
        amp == R::zero(),
    )
}
