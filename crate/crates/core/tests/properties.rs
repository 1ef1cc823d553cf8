//! Property tests for the structural invariants: semigroup algebra,
//! smoothing bounds, field envelopes, transform round trips, degree
//! bookkeeping, and the integrator rescaling identity.

use proptest::prelude::*;

use tt_core::degree::{deg_alpha, Ball, DegreeOptions};
use tt_core::field;
use tt_core::nemytskii::{build_nemytskii, NemytskiiSpec, SineTransform};
use tt_core::solver::{apriori_bound, poincare, IntegratorConfig, Scheme};
use tt_core::spectral::{SpectralOperator, State};
use std::sync::Arc;

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.1f64..3.0, 1..6).prop_map(|incs| {
        let mut acc = 0.0;
        incs.into_iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect()
    })
}

fn op_and_x() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    spectrum().prop_flat_map(|eigs| {
        let n = eigs.len();
        (
            Just(eigs),
            proptest::collection::vec(-10.0f64..10.0, n),
        )
    })
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn semigroup_law_composes((eigs, x) in op_and_x(), t in 0.0f64..5.0, s in 0.0f64..5.0) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let state = State::new(x.clone(), 0.0);
        let once = op.semigroup_apply(t + s, &state).unwrap();
        let twice = op
            .semigroup_apply(t, &op.semigroup_apply(s, &state).unwrap())
            .unwrap();
        let diff: Vec<f64> = once
            .coeffs
            .iter()
            .zip(&twice.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        prop_assert!(l2(&diff) <= 1e-12 * l2(&x).max(1.0));
    }

    #[test]
    fn semigroup_contracts_every_alpha_norm(
        (eigs, x) in op_and_x(),
        t in 0.0f64..5.0,
        alpha in 0.0f64..0.95,
    ) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let state = State::new(x.clone(), alpha);
        let moved = op.semigroup_apply(t, &state).unwrap();
        let before = op.alpha_norm(&x, alpha);
        let after = op.alpha_norm(&moved.coeffs, alpha);
        prop_assert!(after <= before * (1.0 + 1e-15));
    }

    #[test]
    fn smoothing_bound_holds_pointwise(
        (eigs, x) in op_and_x(),
        t in 1e-6f64..20.0,
        alpha in 0.05f64..0.95,
    ) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let state = State::new(x.clone(), 0.0);
        let y = op
            .frac_power_apply(alpha, &op.semigroup_apply(t, &state).unwrap())
            .unwrap();
        let sharp = (alpha / std::f64::consts::E).powf(alpha);
        prop_assert!(t.powf(alpha) * l2(&y.coeffs) <= (sharp + 1e-12) * l2(&x).max(1e-30));
    }

    #[test]
    fn sharper_smoothing_with_exponential_weight(
        (eigs, x) in op_and_x(),
        t in 1e-6f64..20.0,
        alpha in 0.05f64..0.95,
    ) {
        // Paying half the spectral gap buys the same bound with 2 alpha:
        // t^a e^{mu_1 t / 2} ||A^a S(t)|| <= (2a/e)^a on the diagonal model.
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let mu1 = op.eigenvalues()[0];
        let state = State::new(x.clone(), 0.0);
        let y = op
            .frac_power_apply(alpha, &op.semigroup_apply(t, &state).unwrap())
            .unwrap();
        let weighted = t.powf(alpha) * (0.5 * mu1 * t).exp() * l2(&y.coeffs);
        let sharp2 = (2.0 * alpha / std::f64::consts::E).powf(alpha);
        prop_assert!(weighted <= (sharp2 + 1e-10) * l2(&x).max(1e-30));
    }

    #[test]
    fn fractional_powers_compose(
        (eigs, x) in op_and_x(),
        beta in -1.0f64..1.0,
        gamma in -1.0f64..1.0,
    ) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let state = State::new(x.clone(), 0.0);
        let stepwise = op
            .frac_power_apply(beta, &op.frac_power_apply(gamma, &state).unwrap())
            .unwrap();
        let direct = op.frac_power_apply(beta + gamma, &state).unwrap();
        for (a, b) in stepwise.coeffs.iter().zip(&direct.coeffs) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn resolvents_commute_through_the_difference_identity(
        (eigs, x) in op_and_x(),
        mu in 0.0f64..10.0,
        nu in 0.0f64..10.0,
    ) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let state = State::new(x.clone(), 0.0);
        let rmu = op.resolvent_apply(mu, &state).unwrap();
        let rnu = op.resolvent_apply(nu, &state).unwrap();
        let both = op.resolvent_apply(mu, &rnu).unwrap();
        for k in 0..x.len() {
            let lhs = rmu.coeffs[k] - rnu.coeffs[k];
            let rhs = (nu - mu) * both.coeffs[k];
            prop_assert!((lhs - rhs).abs() <= 1e-12 * l2(&x).max(1.0));
        }
    }

    #[test]
    fn phi1_weight_reproduces_the_duhamel_increment(
        (eigs, x) in op_and_x(),
        h in 1e-6f64..2.0,
    ) {
        // x - S(h)x = h A phi1(-hA) x, the identity behind every step.
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let state = State::new(x.clone(), 0.0);
        let smoothed = op.phi1_apply(h, 1.0, &state).unwrap();
        let a_smoothed = op.frac_power_apply(1.0, &smoothed).unwrap();
        let shifted = op.semigroup_apply(h, &state).unwrap();
        for k in 0..x.len() {
            let lhs = x[k] - shifted.coeffs[k];
            let rhs = h * a_smoothed.coeffs[k];
            prop_assert!((lhs - rhs).abs() <= 1e-12 * x[k].abs().max(1.0));
        }
    }

    #[test]
    fn state_json_roundtrip_is_bit_exact((eigs, x) in op_and_x(), alpha in 0.0f64..0.95) {
        let _ = eigs;
        let state = State::new(x, alpha);
        let text = serde_json::to_string(&state).unwrap();
        let back: State<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(state.coeffs, back.coeffs);
        prop_assert_eq!(state.alpha, back.alpha);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn registry_growth_envelopes_hold(
        modes in 1usize..5,
        raw in proptest::collection::vec(-1.0f64..1.0, 4),
        t in 0.0f64..1.0,
        alpha in 0.55f64..0.95,
        scale in 0.0f64..1.0,
        which in 0usize..4,
    ) {
        let op = SpectralOperator::dirichlet_laplacian_1d(modes).unwrap();
        let f = match which {
            0 => field::linear(&op, 1.0, alpha, raw[0], raw[1]).unwrap(),
            1 => field::forced_linear(&op, 1.0, alpha, raw[0], raw[1], raw[2]).unwrap(),
            2 => field::cubic(&op, 1.0, alpha, 2.0).unwrap(),
            _ => tt_core::nemytskii::gradient(&op, 1.0, alpha, raw[0], raw[1], raw[2]).unwrap(),
        };
        // Scale the sample into the alpha-ball of radius 2 so the cubic
        // envelope's declared domain covers it.
        let mut coeffs: Vec<f64> = raw.iter().take(modes).copied().collect();
        while coeffs.len() < modes {
            coeffs.push(0.1);
        }
        let nrm = op.alpha_norm(&coeffs, alpha);
        if nrm > 0.0 {
            let target = 2.0 * scale;
            for c in coeffs.iter_mut() {
                *c *= target / nrm.max(1e-12);
            }
        }
        let x = State::new(coeffs.clone(), alpha);
        let y = f.evaluate(t, &x).unwrap();
        prop_assert_eq!(y.alpha, 0.0);
        let bound = f.growth_envelope(t) * (1.0 + op.alpha_norm(&coeffs, alpha));
        prop_assert!(
            l2(&y.coeffs) <= bound * (1.0 + 1e-12) + 1e-9,
            "field {} violates its envelope: {} > {}",
            f.kind(),
            l2(&y.coeffs),
            bound
        );
    }

    #[test]
    fn linear_field_average_drops_the_oscillation(
        (eigs, x) in op_and_x(),
        slope in -2.0f64..2.0,
        osc in -2.0f64..2.0,
        n_quad in 2usize..200,
    ) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let f = field::linear(&op, 1.0, 0.0, slope, osc).unwrap();
        let avg = f.average(&State::new(x.clone(), 0.0), n_quad).unwrap();
        // The cosine mean over a full period vanishes for every panel count
        // of the periodic trapezoid rule except a single panel.
        for k in 0..x.len() {
            prop_assert!((avg.coeffs[k] - slope * x[k]).abs() <= 1e-11 * x[k].abs().max(1.0));
        }
    }

    #[test]
    fn blending_preserves_the_time_mean(
        (eigs, x) in op_and_x(),
        mu in 0.0f64..1.0,
        slope in -2.0f64..2.0,
        amp in -2.0f64..2.0,
    ) {
        let op = SpectralOperator::explicit(eigs, "prop").unwrap();
        let f = field::forced_linear(&op, 1.0, 0.0, slope, 1.0, amp).unwrap();
        let n_quad = 64;
        let blended = f.blend(mu, n_quad).unwrap();
        let lhs = blended.average(&State::new(x.clone(), 0.0), n_quad).unwrap();
        let rhs = f.average(&State::new(x.clone(), 0.0), n_quad).unwrap();
        for k in 0..x.len() {
            prop_assert!((lhs.coeffs[k] - rhs.coeffs[k]).abs() <= 1e-11 * rhs.coeffs[k].abs().max(1.0));
        }
    }

    #[test]
    fn sine_transform_roundtrips_retained_modes(
        coeffs in proptest::collection::vec(-5.0f64..5.0, 1..7),
        extra in 0usize..10,
    ) {
        let n = coeffs.len();
        let st = SineTransform::new(n, 2 * n + extra);
        let back = st.project(&st.synthesize(&coeffs));
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn collocation_field_is_exact_on_resolved_harmonics(
        modes in 2usize..6,
        gamma in -3.0f64..3.0,
        coeffs_raw in proptest::collection::vec(-2.0f64..2.0, 6),
        alpha in 0.55f64..0.95,
    ) {
        // f(t, xi, s, y) = s + gamma sin(xi) maps sum c_k sin(k xi) to
        // itself plus gamma on the first mode; both live inside the
        // retained band, so collocation with M >= 2N is exact.
        let op = SpectralOperator::dirichlet_laplacian_1d(modes).unwrap();
        let spec = NemytskiiSpec::<f64> {
            f: Arc::new(move |_t, xi, s, _y| s + gamma * xi.sin()),
            collocation_points: 2 * modes,
        };
        let f = build_nemytskii(
            &spec,
            &op,
            1.0,
            alpha,
            Arc::new(move |_| 10.0),
            None,
            None,
            true,
        )
        .unwrap();
        let coeffs: Vec<f64> = coeffs_raw.into_iter().take(modes).collect();
        let y = f.evaluate(0.0, &State::new(coeffs.clone(), alpha)).unwrap();
        for k in 0..modes {
            let want = coeffs[k] + if k == 0 { gamma } else { 0.0 };
            prop_assert!((y.coeffs[k] - want).abs() <= 1e-11 * want.abs().max(1.0));
        }
    }

    #[test]
    fn translation_rescaling_identity_is_exact(
        lambda_bits in 1u32..1024,
        coeffs_raw in proptest::collection::vec(-1.5f64..1.5, 2),
    ) {
        // Phi_T^lambda = Phi_{lambda T}^1 for autonomous fields: with T = 1
        // and dyadic step counts both sides build identical step tables.
        let lambda = lambda_bits as f64 / 1024.0;
        let op = SpectralOperator::explicit(vec![0.5, 1.5], "two").unwrap();
        let f = field::cubic(&op, 1.0, 0.0, 4.0).unwrap();
        let x = State::new(coeffs_raw, 0.0);
        let scaled = poincare(
            &op,
            &f,
            &IntegratorConfig::new(64, Scheme::EtdMidpoint, lambda).unwrap(),
            &x,
        )
        .unwrap();
        let rescaled = poincare(
            &op,
            &f.with_period(lambda).unwrap(),
            &IntegratorConfig::new(64, Scheme::EtdMidpoint, 1.0).unwrap(),
            &x,
        )
        .unwrap();
        for (a, b) in scaled.coeffs.iter().zip(&rescaled.coeffs) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn apriori_bound_grows_with_the_seed_radius(
        r1 in 0.1f64..5.0,
        factor in 1.0f64..4.0,
        slope in 0.0f64..0.4,
    ) {
        let op = SpectralOperator::explicit(vec![1.0, 2.0], "two").unwrap();
        let f = field::linear(&op, 1.0, 0.25, slope, 0.1).unwrap();
        let cfg = IntegratorConfig::new(32, Scheme::ExponentialEuler, 1.0).unwrap();
        let b1 = apriori_bound(&f, &cfg, r1).unwrap();
        let b2 = apriori_bound(&f, &cfg, r1 * factor).unwrap();
        prop_assert!(b1 >= r1);
        prop_assert!(b2 >= b1 * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stationary_degree_is_the_product_of_spectral_signs(
        eigs in spectrum(),
        c_raw in -4.0f64..8.0,
    ) {
        // Keep the slope a safe distance from the spectrum so all zeros
        // stay regular.
        prop_assume!(eigs.iter().all(|mu| (mu - c_raw).abs() >= 0.3));
        let op = SpectralOperator::explicit(eigs.clone(), "prop").unwrap();
        let f = field::linear(&op, 1.0, 0.0, c_raw, 0.0).unwrap();
        let ball = Ball::new(State::new(vec![0.0; eigs.len()], 0.0), 1.0).unwrap();
        let res = deg_alpha(&op, &f, &ball, 0.0, &DegreeOptions::default()).unwrap();
        let want: i64 = eigs
            .iter()
            .map(|mu| if mu - c_raw > 0.0 { 1i64 } else { -1i64 })
            .product();
        prop_assert_eq!(res.value, want);
        // Bookkeeping invariant: the value is exactly the sum of the signs.
        let sum: i64 = res.zeros.iter().map(|z| z.sign as i64).sum();
        prop_assert_eq!(res.value, sum);
    }
}
