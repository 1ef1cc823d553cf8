//! Scenario configs: one JSON file names the operator, the field, the
//! integrator, the verification ball, and the sweep grids. Parsing walks the
//! document by hand so every complaint carries the schema path of the
//! offending entry, and unknown keys are rejected rather than ignored.

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use tt_core::continuation::ContinuationOptions;
use tt_core::degree::Ball;
use tt_core::field::{self, Field};
use tt_core::nemytskii;
use tt_core::sampling::DEFAULT_SEED;
use tt_core::solver::{IntegratorConfig, Scheme};
use tt_core::spectral::{SpectralOperator, State};
use tt_core::{Error, Result};

#[derive(Debug)]
pub struct Scenario {
    pub op: SpectralOperator<f64>,
    pub field: Field<f64>,
    pub alpha: f64,
    pub period: f64,
    pub cfg: IntegratorConfig<f64>,
    pub ball: Ball<f64>,
    pub t_list: Option<Vec<f64>>,
    pub lambda_list: Option<Vec<f64>>,
    pub mus: Option<Vec<f64>>,
    pub radius_grid: Option<Vec<f64>>,
    pub continuation: Option<ContinuationOptions<f64>>,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::config(path.display().to_string(), format!("cannot read config: {e}"))
    })?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| Error::config("<root>", format!("not valid JSON: {e}")))?;
    parse(&root)
}

pub fn parse(root: &Value) -> Result<Scenario> {
    let m = obj(root, "<root>")?;
    known_keys(
        m,
        &[
            "operator",
            "field",
            "alpha",
            "period",
            "integrator",
            "ball",
            "grids",
            "continuation",
            "output_dir",
            "seed",
        ],
        "<root>",
    )?;

    let alpha = finite(req(m, "alpha", "<root>")?, "alpha")?;
    let period = finite(req(m, "period", "<root>")?, "period")?;
    let op = operator(req(m, "operator", "<root>")?)?;
    let field = field_spec(req(m, "field", "<root>")?, &op, period, alpha)?;
    let cfg = integrator(req(m, "integrator", "<root>")?)?;
    let ball = ball_spec(req(m, "ball", "<root>")?, &op, alpha)?;

    let mut t_list = None;
    let mut lambda_list = None;
    let mut mus = None;
    let mut radius_grid = None;
    if let Some(v) = m.get("grids") {
        let g = obj(v, "grids")?;
        known_keys(g, &["t_list", "lambda_list", "mus", "radius_grid"], "grids")?;
        t_list = g.get("t_list").map(|v| numbers(v, "grids.t_list")).transpose()?;
        lambda_list = g
            .get("lambda_list")
            .map(|v| numbers(v, "grids.lambda_list"))
            .transpose()?;
        mus = g.get("mus").map(|v| numbers(v, "grids.mus")).transpose()?;
        radius_grid = g
            .get("radius_grid")
            .map(|v| numbers(v, "grids.radius_grid"))
            .transpose()?;
    }

    let continuation = m
        .get("continuation")
        .map(continuation_spec)
        .transpose()?;

    let output_dir = match m.get("output_dir") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(Error::config("output_dir", "expected a string path")),
        None => None,
    };

    let seed = match m.get("seed") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::config("seed", "expected an unsigned integer"))?,
        None => DEFAULT_SEED,
    };

    Ok(Scenario {
        op,
        field,
        alpha,
        period,
        cfg,
        ball,
        t_list,
        lambda_list,
        mus,
        radius_grid,
        continuation,
        output_dir,
        seed,
    })
}

fn operator(v: &Value) -> Result<SpectralOperator<f64>> {
    let m = obj(v, "operator")?;
    let kind = string(req(m, "kind", "operator")?, "operator.kind")?;
    match kind.as_str() {
        "dirichlet_laplacian_1d" => {
            known_keys(m, &["kind", "modes"], "operator")?;
            let modes = unsigned(req(m, "modes", "operator")?, "operator.modes")? as usize;
            SpectralOperator::dirichlet_laplacian_1d(modes)
        }
        "explicit" => {
            known_keys(m, &["kind", "eigenvalues", "label"], "operator")?;
            let eigs = numbers(req(m, "eigenvalues", "operator")?, "operator.eigenvalues")?;
            let label = match m.get("label") {
                Some(v) => string(v, "operator.label")?,
                None => "explicit".to_string(),
            };
            SpectralOperator::explicit(eigs, label)
        }
        other => Err(Error::config(
            "operator.kind",
            format!("unknown operator kind `{other}`; expected `dirichlet_laplacian_1d` or `explicit`"),
        )),
    }
}

fn field_spec(
    v: &Value,
    op: &SpectralOperator<f64>,
    period: f64,
    alpha: f64,
) -> Result<Field<f64>> {
    let m = obj(v, "field")?;
    let kind = string(req(m, "kind", "field")?, "field.kind")?;
    match kind.as_str() {
        "linear" => {
            known_keys(m, &["kind", "slope", "oscillation"], "field")?;
            let slope = finite(req(m, "slope", "field")?, "field.slope")?;
            let osc = finite(req(m, "oscillation", "field")?, "field.oscillation")?;
            field::linear(op, period, alpha, slope, osc)
        }
        "forced_linear" => {
            known_keys(m, &["kind", "slope", "offset", "amplitude"], "field")?;
            let slope = finite(req(m, "slope", "field")?, "field.slope")?;
            let offset = finite(req(m, "offset", "field")?, "field.offset")?;
            let amplitude = finite(req(m, "amplitude", "field")?, "field.amplitude")?;
            field::forced_linear(op, period, alpha, slope, offset, amplitude)
        }
        "constant" => {
            known_keys(m, &["kind", "value"], "field")?;
            let value = numbers(req(m, "value", "field")?, "field.value")?;
            field::constant(op, period, alpha, value)
        }
        "cubic" => {
            known_keys(m, &["kind", "envelope_radius"], "field")?;
            let r = finite(req(m, "envelope_radius", "field")?, "field.envelope_radius")?;
            field::cubic(op, period, alpha, r)
        }
        "gradient" => {
            known_keys(m, &["kind", "slope", "amplitude", "kappa"], "field")?;
            let slope = finite(req(m, "slope", "field")?, "field.slope")?;
            let amplitude = finite(req(m, "amplitude", "field")?, "field.amplitude")?;
            let kappa = finite(req(m, "kappa", "field")?, "field.kappa")?;
            nemytskii::gradient(op, period, alpha, slope, amplitude, kappa)
        }
        other => Err(Error::config(
            "field.kind",
            format!(
                "unknown field kind `{other}`; expected `linear`, `forced_linear`, `constant`, `cubic`, or `gradient`"
            ),
        )),
    }
}

fn integrator(v: &Value) -> Result<IntegratorConfig<f64>> {
    let m = obj(v, "integrator")?;
    known_keys(m, &["steps_per_period", "scheme", "lambda"], "integrator")?;
    let steps = unsigned(
        req(m, "steps_per_period", "integrator")?,
        "integrator.steps_per_period",
    )? as usize;
    let scheme = match string(req(m, "scheme", "integrator")?, "integrator.scheme")?.as_str() {
        "exponential_euler" => Scheme::ExponentialEuler,
        "etd_midpoint" => Scheme::EtdMidpoint,
        other => {
            return Err(Error::config(
                "integrator.scheme",
                format!("unknown scheme `{other}`; expected `exponential_euler` or `etd_midpoint`"),
            ))
        }
    };
    let lambda = finite(req(m, "lambda", "integrator")?, "integrator.lambda")?;
    IntegratorConfig::new(steps, scheme, lambda)
}

fn ball_spec(v: &Value, op: &SpectralOperator<f64>, alpha: f64) -> Result<Ball<f64>> {
    let m = obj(v, "ball")?;
    known_keys(m, &["center", "radius"], "ball")?;
    let radius = finite(req(m, "radius", "ball")?, "ball.radius")?;
    let center = match m.get("center") {
        Some(v) => {
            let c = numbers(v, "ball.center")?;
            if c.len() != op.dim() {
                return Err(Error::config(
                    "ball.center",
                    format!("expected {} coefficients, got {}", op.dim(), c.len()),
                ));
            }
            c
        }
        None => vec![0.0; op.dim()],
    };
    Ball::new(State::new(center, alpha), radius)
}

fn continuation_spec(v: &Value) -> Result<ContinuationOptions<f64>> {
    let m = obj(v, "continuation")?;
    known_keys(
        m,
        &[
            "lambda_start",
            "lambda_end",
            "initial_step",
            "min_step",
            "max_step",
            "growth",
            "newton_tol",
            "max_newton_iters",
        ],
        "continuation",
    )?;
    let mut opts = ContinuationOptions::standard();
    if let Some(v) = m.get("lambda_start") {
        opts.lambda_start = finite(v, "continuation.lambda_start")?;
    }
    if let Some(v) = m.get("lambda_end") {
        opts.lambda_end = finite(v, "continuation.lambda_end")?;
    }
    if let Some(v) = m.get("initial_step") {
        opts.initial_step = finite(v, "continuation.initial_step")?;
    }
    if let Some(v) = m.get("min_step") {
        opts.min_step = finite(v, "continuation.min_step")?;
    }
    if let Some(v) = m.get("max_step") {
        opts.max_step = finite(v, "continuation.max_step")?;
    }
    if let Some(v) = m.get("growth") {
        opts.growth = finite(v, "continuation.growth")?;
    }
    if let Some(v) = m.get("newton_tol") {
        opts.newton_tol = finite(v, "continuation.newton_tol")?;
    }
    if let Some(v) = m.get("max_newton_iters") {
        opts.max_newton_iters =
            unsigned(v, "continuation.max_newton_iters")? as usize;
    }
    Ok(opts)
}

fn obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::config(path, "expected a JSON object"))
}

fn req<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    m.get(key).ok_or_else(|| {
        Error::config(
            if path == "<root>" {
                key.to_string()
            } else {
                format!("{path}.{key}")
            },
            "missing required entry",
        )
    })
}

fn known_keys(m: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    for key in m.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(
                if path == "<root>" {
                    key.clone()
                } else {
                    format!("{path}.{key}")
                },
                format!("unknown entry; expected one of {allowed:?}"),
            ));
        }
    }
    Ok(())
}

fn finite(v: &Value, path: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::config(path, "expected a finite number")),
    }
}

fn unsigned(v: &Value, path: &str) -> Result<u64> {
    v.as_u64()
        .ok_or_else(|| Error::config(path, "expected an unsigned integer"))
}

fn string(v: &Value, path: &str) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| Error::config(path, "expected a string"))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::config(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| finite(x, &format!("{path}[{i}]")))
        .collect()
}
