//! The solitary wave checked against the travelling-wave ODE, independently
//! of the algebra that produced its parameters.
//!
//! With `u = φ(ξ)`, `ξ = x - v t`, integrating the equation once gives
//! `(a - v) φ + b/(m+1) φ^{m+1} + (c + α v) φ'' - (λ v + ν) φ'''' = 0`.

use proptest::prelude::*;
use rkrlw::exact::{quadratic_residual, residual_oracle, solve_ansatz, AnsatzSolution, Branch, SolutionKind};
use rkrlw::scheme::SchemeParams;

/// Max ODE residual over `|ξ| <= 15` with derivatives by central differences of step `d`.
fn ode_residual(s: &AnsatzSolution, p: &SchemeParams, d: f64, phi: impl Fn(f64) -> f64) -> f64 {
    let v = s.velocity;
    (-300..=300)
        .map(|k| {
            let xi = k as f64 * 0.05;
            let f = |j: f64| phi(xi + j * d);
            let d2 = (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (d * d);
            let d4 = (f(2.0) - 4.0 * f(1.0) + 6.0 * f(0.0) - 4.0 * f(-1.0) + f(-2.0)) / d.powi(4);
            let u = f(0.0);
            ((p.a - v) * u + p.b / (p.m as f64 + 1.0) * u.powi(p.m as i32 + 1) + (p.c + p.alpha * v) * d2
                - (p.lambda * v + p.nu) * d4)
                .abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn solitary_waves_solve_the_ode_at_second_order() {
    for p in [SchemeParams::example1(), SchemeParams::example2(), SchemeParams { m: 1, ..SchemeParams::example1() }] {
        let s = solve_ansatz(&p, Branch::Minus).unwrap();
        assert_eq!(s.kind, SolutionKind::Solitary);
        let coarse = ode_residual(&s, &p, 0.04, |x| s.profile(x));
        let fine = ode_residual(&s, &p, 0.02, |x| s.profile(x));
        let order = (coarse / fine).log2();
        assert!(order >= 1.9, "m = {}: {coarse:e} -> {fine:e}", p.m);
        assert!(fine < 1e-3);
    }
}

#[test]
fn literal_exponent_sign_is_not_a_solution() {
    // sech^η instead of sech^{-η}
    let p = SchemeParams::example1();
    let s = solve_ansatz(&p, Branch::Minus).unwrap();
    let literal = |x: f64| s.amplitude * (1.0 / (s.wavenumber * x).cosh()).powf(s.eta);
    let near_zero = |x: f64| if x.abs() < 5.0 { literal(x) } else { 0.0 };
    assert!(ode_residual(&s, &p, 0.02, near_zero) > 1e-1);
}

#[test]
fn zero_root_has_zero_residual() {
    // αa + c = 0 puts B² = 0 on one branch
    let p = SchemeParams { a: 0.0, b: 0.2, c: 0.0, alpha: 0.1, lambda: 0.1, nu: -0.34478928642462275, m: 3 };
    for branch in [Branch::Plus, Branch::Minus] {
        if let Ok(s) = solve_ansatz(&p, branch) {
            assert_eq!(quadratic_residual(&p, s.b_squared()), 0.0);
        }
    }
}

#[test]
fn peak_and_tail() {
    let s = solve_ansatz(&SchemeParams::example1(), Branch::Minus).unwrap();
    assert_eq!(s.eval_solitary(0.0, 0.0).unwrap(), s.amplitude);
    let t = 3.0;
    assert_eq!(s.eval_solitary(s.velocity * t, t).unwrap(), s.amplitude);
    assert!(s.eval_solitary(200.0, 0.0).unwrap() < 1e-12);
}

fn params() -> impl Strategy<Value = SchemeParams> {
    (-2.0f64..2.0, 0.2f64..3.0, -2.0f64..2.0, 0.1f64..3.0, 0.1f64..3.0, -2.0f64..2.0, 1u32..=6).prop_map(
        |(a, b, c, alpha, lambda, nu, m)| SchemeParams { a, b, c, alpha, lambda, nu, m },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roots_satisfy_the_quadratic(p in params()) {
        for branch in [Branch::Plus, Branch::Minus] {
            if let Ok(s) = solve_ansatz(&p, branch) {
                prop_assert!(quadratic_residual(&p, s.b_squared()) <= 1e-12, "{branch}: {:e}", quadratic_residual(&p, s.b_squared()));
                // residuals inherit the worst cancellation among the sums they are built from
                let v = s.velocity;
                let cond = [
                    (p.alpha * p.a, p.c),
                    (p.lambda * p.a, p.nu),
                    (p.lambda * p.c, -p.nu * p.alpha),
                    (p.lambda * v, p.nu),
                    (p.alpha * v, p.c),
                    (p.a, -v),
                ]
                .iter()
                .map(|(x, y)| (x.abs() + y.abs()) / (x + y).abs())
                .fold(1.0, f64::max);
                let tol = 1e-10 * cond;
                prop_assert!(residual_oracle(&s, &p).iter().all(|r| *r <= tol), "{:?} cond {cond:e}", residual_oracle(&s, &p));
                prop_assert_eq!(s.kind == SolutionKind::Solitary, s.b_squared() < 0.0);
            }
        }
    }

    #[test]
    fn wave_is_a_pure_function_of_xi(x in -50.0f64..50.0, t in 0.0f64..20.0, delta in -5.0f64..5.0) {
        let s = solve_ansatz(&SchemeParams::example2(), Branch::Minus).unwrap();
        let u = s.eval_solitary(x, t).unwrap();
        let shifted = s.eval_solitary(x - s.velocity * delta, t - delta).unwrap();
        prop_assert!((u - shifted).abs() <= 1e-12 * s.amplitude);
        let mirrored = s.eval_solitary(2.0 * s.velocity * t - x, t).unwrap();
        prop_assert!((u - mirrored).abs() <= 1e-12 * s.amplitude);
    }
}
