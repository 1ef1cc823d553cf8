//! Oracle verification: every assertion here is checked against a closed
//! form derived independently of the code under test, or against a discrete
//! identity that holds exactly. Tolerances are absolute and pinned; each
//! comment states where the expected value comes from.

use tt_core::continuation::{
    check_resonance, continue_branch, ensure_nonresonant, estimate_r0, solve_fixed_point,
    verify_averaging, verify_krasnoselskii, ContinuationOptions,
};
use tt_core::degree::{deg_poincare, verify_additivity, verify_mu_independence, Ball, DegreeOptions};
use tt_core::field;
use tt_core::nemytskii::gradient;
use tt_core::sampling::BallSampler;
use tt_core::solver::{
    apriori_bound, evolve, poincare_jacobian, poincare_jacobian_variational, IntegratorConfig,
    Scheme,
};
use tt_core::spectral::{SpectralOperator, State};
use tt_core::Error;

/// Exact solution of u' = -kappa u + lambda (a + b cos(w t)), u(0) = u0,
/// with kappa = lambda (mu - slope): variation of constants, integrals done
/// by hand.
fn forced_exact(lambda: f64, mu: f64, slope: f64, a: f64, b: f64, period: f64, t: f64, u0: f64) -> f64 {
    let kappa = lambda * (mu - slope);
    let w = 2.0 * std::f64::consts::PI / period;
    let e = (-kappa * t).exp();
    u0 * e
        + lambda * a / kappa * (1.0 - e)
        + lambda * b * ((kappa * (w * t).cos() + w * (w * t).sin()) - kappa * e)
            / (kappa * kappa + w * w)
}

/// The periodic point of the same equation: u0 with u(T) = u0. At a full
/// period the oscillatory terms close up, leaving lambda a / kappa plus the
/// in-phase response lambda b kappa / (kappa^2 + w^2).
fn forced_periodic_point(lambda: f64, mu: f64, slope: f64, a: f64, b: f64, period: f64) -> f64 {
    let kappa = lambda * (mu - slope);
    let w = 2.0 * std::f64::consts::PI / period;
    lambda * a / kappa + lambda * b * kappa / (kappa * kappa + w * w)
}

/// The four-mode gradient-dependent reaction field the sweeps exercise:
/// f(t, xi, s, y) = 0.5 s + cos(2 pi t) sin(xi) + 0.2 tanh(y) on
/// mu = {1, 4, 9, 16}, alpha = 3/4.
fn gradient_setup() -> (SpectralOperator<f64>, tt_core::field::Field<f64>) {
    let op = SpectralOperator::dirichlet_laplacian_1d(4).unwrap();
    let f = gradient(&op, 1.0, 0.75, 0.5, 1.0, 0.2).unwrap();
    (op, f)
}

// [DERIVED] Closed-form forced scalar problem u' = -u + 1 + cos(2 pi t).
// The one-step schemes must land on the hand-integrated solution at t = T
// with their theoretical accuracy: O(h) for the Euler weight, O(h^2) for
// the midpoint rule, both with moderate constants here.
#[test]
fn schemes_track_the_forced_closed_form() {
    let op = SpectralOperator::explicit(vec![1.0], "scalar").unwrap();
    let f = field::forced_linear(&op, 1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
    let want = forced_exact(1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0);
    let x0 = State::new(vec![0.0], 0.0);

    let euler = IntegratorConfig::new(4096, Scheme::ExponentialEuler, 1.0).unwrap();
    let got = evolve(&op, &f, &euler, &x0).unwrap().final_state().coeffs[0];
    assert!(
        (got - want).abs() <= 2e-3,
        "euler at h = 1/4096 drifted {:.3e}",
        (got - want).abs()
    );

    let mid = IntegratorConfig::new(4096, Scheme::EtdMidpoint, 1.0).unwrap();
    let got = evolve(&op, &f, &mid, &x0).unwrap().final_state().coeffs[0];
    assert!(
        (got - want).abs() <= 1e-6,
        "midpoint at h = 1/4096 drifted {:.3e}",
        (got - want).abs()
    );

    let fine = IntegratorConfig::new(262144, Scheme::EtdMidpoint, 1.0).unwrap();
    let got = evolve(&op, &f, &fine, &x0).unwrap().final_state().coeffs[0];
    assert!(
        (got - want).abs() <= 1e-9,
        "midpoint at h = 1/262144 drifted {:.3e}",
        (got - want).abs()
    );
}

// [DERIVED] The discrete translation operator's fixed point converges to the
// periodic point of the continuous problem, whose closed form is
// lambda^2 b mu / (lambda^2 mu^2 + 4 pi^2) for the pure-cosine forcing.
#[test]
fn discrete_fixed_point_matches_the_periodic_closed_form() {
    let op = SpectralOperator::explicit(vec![1.0], "scalar").unwrap();
    let f = field::forced_linear(&op, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
    for lambda in [1.0, 0.3] {
        let cfg = IntegratorConfig::new(2048, Scheme::EtdMidpoint, lambda).unwrap();
        let bp = solve_fixed_point(&op, &f, &cfg, &State::new(vec![0.0], 0.0), 1e-12, 50).unwrap();
        let want = forced_periodic_point(lambda, 1.0, 0.0, 0.0, 1.0, 1.0);
        assert!(
            (bp.state.coeffs[0] - want).abs() <= 1e-6,
            "lambda = {lambda}: fixed point off by {:.3e}",
            (bp.state.coeffs[0] - want).abs()
        );
        assert_eq!(bp.jac_sign, 1);
    }
}

// [DERIVED] Two-mode crossing: slope 2 sits between mu_1 = 1 and mu_2 = 3,
// so the stationary degree is sign(1-2) sign(3-2) = -1, and the per-mode
// multipliers of the discrete translation operator reproduce exactly that
// sign for every time, making every tested t agree.
#[test]
fn krasnoselskii_certifies_the_crossing_pair() {
    let op = SpectralOperator::explicit(vec![1.0, 3.0], "pair").unwrap();
    let f = field::linear(&op, 1.0, 0.0, 2.0, 0.0).unwrap();
    let cfg = IntegratorConfig::new(128, Scheme::EtdMidpoint, 1.0).unwrap();
    let ball = Ball::new(State::zeros(2, 0.0), 1.0).unwrap();
    let report = verify_krasnoselskii(
        &op,
        &f,
        &cfg,
        &ball,
        &[1e-3, 1e-2, 1e-1],
        &DegreeOptions::default(),
    )
    .unwrap();
    assert_eq!(report.degree_stationary, -1);
    assert!(report.pass);
    assert_eq!(report.t_bar, Some(0.1));
    for entry in &report.entries {
        assert_eq!(entry.degree, Some(-1), "t = {} disagreed", entry.t);
        assert!(entry.error.is_none());
    }
}

// [DERIVED] Averaging sweep on the gradient field: the averaged problem has
// the unique zero x = 0 (the forcing has zero time mean and tanh(0) = 0),
// its degree is +1 because the averaged slope 0.5 + 0.2 tanh' stays below
// the whole spectrum, and the fixed points of the translation operator
// collapse onto 0 monotonically as lambda decreases.
#[test]
fn averaging_sweep_certifies_the_gradient_field() {
    let (op, f) = gradient_setup();
    let cfg = IntegratorConfig::new(256, Scheme::EtdMidpoint, 1.0).unwrap();
    let ball = Ball::new(State::zeros(4, 0.75), 2.0).unwrap();
    let report = verify_averaging(
        &op,
        &f,
        &cfg,
        &ball,
        &[1.0, 0.5, 0.25],
        64,
        &DegreeOptions::default(),
    )
    .unwrap();
    assert!(report.pass);
    assert!(report.monotone);
    assert!(report.degrees_match);
    assert_eq!(report.degree_averaged, 1);
    let x_hat_norm: f64 = report.averaged_coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!(x_hat_norm <= 1e-9, "averaged zero should sit at the origin");
    for pair in report.entries.windows(2) {
        assert!(
            pair[1].distance <= pair[0].distance + 1e-12,
            "distances must shrink with lambda"
        );
    }
}

// [DERIVED] The continuation branch from small lambda must arrive at
// lambda = 1 with the same point a direct Newton solve finds there, keep a
// positive orientation throughout (the linearization stays a contraction),
// and produce no structural warnings.
#[test]
fn branch_continuation_agrees_with_the_direct_solve() {
    let (op, f) = gradient_setup();
    let cfg = IntegratorConfig::new(256, Scheme::EtdMidpoint, 1.0).unwrap();
    let x0 = State::zeros(4, 0.75);
    let branch = continue_branch(&op, &f, &cfg, &x0, &ContinuationOptions::standard()).unwrap();
    assert!(branch.warnings.is_empty(), "warnings: {:?}", branch.warnings);
    assert_eq!(branch.last().lambda, 1.0);
    for pair in branch.points.windows(2) {
        assert!(pair[0].lambda < pair[1].lambda);
    }
    for p in &branch.points {
        assert_eq!(p.jac_sign, 1, "orientation flip at lambda = {}", p.lambda);
    }
    let direct = solve_fixed_point(&op, &f, &cfg, &x0, 1e-10, 50).unwrap();
    let diff: Vec<f64> = branch
        .last()
        .state
        .coeffs
        .iter()
        .zip(&direct.state.coeffs)
        .map(|(a, b)| a - b)
        .collect();
    assert!(
        op.alpha_norm(&diff, 0.75) <= 1e-8,
        "branch end and direct solve disagree by {:.3e}",
        op.alpha_norm(&diff, 0.75)
    );
}

// [DERIVED] The a priori majorant dominates sampled trajectories: the bound
// solves the integral inequality that every mild solution obeys, so the
// discrete trajectories (which track mild solutions to O(h^2) here) must
// stay below it on both a small and a large seed ball.
#[test]
fn apriori_bound_dominates_sampled_trajectories() {
    let (op, f) = gradient_setup();
    let cfg = IntegratorConfig::new(256, Scheme::EtdMidpoint, 1.0).unwrap();
    let norm = |v: &[f64]| op.alpha_norm(v, 0.75);
    for (si, radius) in [1.0, 10.0].into_iter().enumerate() {
        let bound = apriori_bound(&f, &cfg, radius).unwrap();
        assert!(bound.is_finite() && bound >= radius);
        let mut sampler = BallSampler::new(4, 0x0A11_D0C5 + si as u64);
        let center = vec![0.0; 4];
        for _ in 0..25 {
            let coeffs = sampler.next_in_ball(&center, radius, &norm);
            let traj = evolve(&op, &f, &cfg, &State::new(coeffs, 0.75)).unwrap();
            let peak = traj
                .states
                .iter()
                .map(|s| op.alpha_norm(&s.coeffs, 0.75))
                .fold(0.0f64, f64::max);
            assert!(
                peak <= bound,
                "trajectory peak {peak:.6} exceeds the majorant {bound:.6} at radius {radius}"
            );
        }
    }
}

// [DERIVED] Homotopy invariance along the time-averaging blend: the degree
// of the translation operator is the same for the original field, the
// averaged field, and the midpoint of the blend, because the fixed point
// stays strictly inside the ball for every blend parameter (the envelope
// 0.5 + 0.3 is a uniform contraction below mu_1 = 1).
#[test]
fn blend_homotopy_preserves_the_poincare_degree() {
    let op = SpectralOperator::explicit(vec![1.0, 4.0], "pair").unwrap();
    let f = field::linear(&op, 1.0, 0.0, 0.5, 0.3).unwrap();
    let cfg = IntegratorConfig::new(128, Scheme::EtdMidpoint, 1.0).unwrap();
    let ball = Ball::new(State::zeros(2, 0.0), 1.0).unwrap();
    for mu in [0.0, 0.5, 1.0] {
        let blended = f.blend(mu, 64).unwrap();
        let res = deg_poincare(&op, &blended, &cfg, &ball, &DegreeOptions::default()).unwrap();
        assert_eq!(res.value, 1, "degree moved along the blend at mu = {mu}");
    }
}

// [DERIVED] The variational propagation of the Jacobian and the plain
// forward-difference Jacobian are two independent discretizations of the
// same derivative; they must agree to finite-difference accuracy.
#[test]
fn finite_difference_and_variational_jacobians_agree() {
    let (op, f) = gradient_setup();
    let cfg = IntegratorConfig::new(128, Scheme::EtdMidpoint, 1.0).unwrap();
    let x = State::new(vec![0.3, -0.1, 0.05, 0.02], 0.75);
    let fd = poincare_jacobian(&op, &f, &cfg, &x).unwrap();
    let var = poincare_jacobian_variational(&op, &f, &cfg, &x).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!(
                (fd[(i, j)] - var[(i, j)]).abs() <= 1e-6,
                "entry ({i},{j}): fd {} vs variational {}",
                fd[(i, j)],
                var[(i, j)]
            );
        }
    }
}

// [DERIVED] Resonance screen: the averaged asymptotic slope of the gradient
// field is exactly its constant slope. Slope 4 hits mu_2 = 4 of the
// Dirichlet spectrum {1,4,9,16} (1-based mode 2, simple eigenvalue); slope
// 0.5 misses everything.
#[test]
fn resonant_slope_is_screened_out() {
    let op = SpectralOperator::dirichlet_laplacian_1d(4).unwrap();

    let hit = gradient(&op, 1.0, 0.75, 4.0, 1.0, 0.2).unwrap();
    let report = check_resonance(&op, &hit, 128).unwrap();
    assert!((report.f_inf_mean - 4.0).abs() <= 1e-12);
    assert_eq!(report.offending_modes, vec![2]);
    assert_eq!(report.kernel_dim, 1);
    assert!(!report.lambda_sweep_clear);
    match ensure_nonresonant(&report) {
        Err(Error::Resonance { offending, .. }) => assert_eq!(offending, vec![2]),
        other => panic!("expected a resonance rejection, got {other:?}"),
    }

    let miss = gradient(&op, 1.0, 0.75, 0.5, 1.0, 0.2).unwrap();
    let report = check_resonance(&op, &miss, 128).unwrap();
    assert!(report.lambda_sweep_clear);
    assert!(report.offending_modes.is_empty());
    assert_eq!(report.kernel_dim, 0);
    assert!(ensure_nonresonant(&report).is_ok());
}

// [DERIVED] Confinement radius: the periodic responses of the gradient field
// have alpha-norm well below 1 (the linear response to the unit forcing is
// about 0.16), so the smallest grid radius already confines every located
// fixed point.
#[test]
fn confinement_radius_found_on_the_small_forcing() {
    let (op, f) = gradient_setup();
    let cfg = IntegratorConfig::new(128, Scheme::EtdMidpoint, 1.0).unwrap();
    let est = estimate_r0(&op, &f, &cfg, &[1.0, 2.0], &[1.0, 0.5], 7).unwrap();
    assert_eq!(est.radius, Some(1.0));
    assert!(est.warnings.is_empty(), "warnings: {:?}", est.warnings);
}

// [DERIVED] Asymptotic linearity of the gradient field: the defect
// ||F(t,x) - 0.5 x|| / ||x||_alpha is (bounded forcing + bounded tanh) over
// ||x||_alpha, so it decays like 1/s along the ray s e_1.
#[test]
fn gradient_defect_vanishes_at_infinity() {
    let (op, f) = gradient_setup();
    let at = |s: f64| {
        f.asymptotic_defect(&op, &State::new(vec![s, 0.0, 0.0, 0.0], 0.75), 0.0)
            .unwrap()
    };
    let d2 = at(1e2);
    let d4 = at(1e4);
    assert!(d2 <= 5e-2, "defect at 1e2 is {d2:.3e}");
    assert!(d4 <= 5e-4, "defect at 1e4 is {d4:.3e}");
    assert!(d4 <= d2 / 50.0, "defect fails to decay: {d2:.3e} -> {d4:.3e}");
}

// [DERIVED] Degree bookkeeping on the cubic field over mu = {0.5, 2}: the
// first mode crosses the slope 1 of x - x^3 at the three stationary points
// 0, +-sqrt(0.5) with signs -1, +1, +1; the second mode contributes only
// the origin with positive sign. Total degree +1, invariant under the
// resolvent shift, and additive over separating subballs.
#[test]
fn degree_bookkeeping_across_shifts_and_subdomains() {
    let op = SpectralOperator::explicit(vec![0.5, 2.0], "pair").unwrap();
    let f = field::cubic(&op, 1.0, 0.0, 2.0).unwrap();
    let ball = Ball::new(State::zeros(2, 0.0), 2.0).unwrap();
    let opts = DegreeOptions::default();

    let shifts = verify_mu_independence(&op, &f, &ball, &[0.0, 1.0, 5.0], &opts).unwrap();
    assert!(shifts.pass);
    for entry in &shifts.entries {
        assert_eq!(entry.degree, Some(1), "shift mu = {} disagreed", entry.mu);
    }

    let r = 0.5f64.sqrt();
    let subballs = vec![
        Ball::new(State::new(vec![0.0, 0.0], 0.0), 0.3).unwrap(),
        Ball::new(State::new(vec![r, 0.0], 0.0), 0.3).unwrap(),
        Ball::new(State::new(vec![-r, 0.0], 0.0), 0.3).unwrap(),
    ];
    let add = verify_additivity(&op, &f, &ball, &subballs, 0.5, &opts).unwrap();
    assert!(add.pass);
    assert_eq!(add.total.value, 1);
    let parts: Vec<i64> = add.parts.iter().map(|p| p.value).collect();
    assert_eq!(parts, vec![-1, 1, 1]);
}
