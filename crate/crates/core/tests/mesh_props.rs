use proptest::prelude::*;
use rkrlw::mesh::{apply_diff, inner_product, norm_l2, norm_l2_shifted, DiffOp, Grid, MeshFn};

fn mesh_fn() -> impl Strategy<Value = (MeshFn, MeshFn)> {
    (8usize..80, 0.05f64..2.0, -30.0f64..30.0).prop_flat_map(|(cells, h, x0)| {
        let grid = Grid::new(x0, x0 + cells as f64 * h, cells).unwrap();
        let vals = || prop::collection::vec(-3.0f64..3.0, cells - 3);
        (vals(), vals()).prop_map(move |(u, v)| {
            (MeshFn::from_unknowns(grid, &u).unwrap(), MeshFn::from_unknowns(grid, &v).unwrap())
        })
    })
}

fn ip(u: &MeshFn, v: &MeshFn) -> f64 {
    inner_product(u, v).unwrap()
}

/// `|a - b| <= tol * scale`, treating an exact match as a pass.
fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    a == b || (a - b).abs() <= tol * scale
}

/// Forward second difference `(U_{i+2} - 2U_{i+1} + U_i) / h²`, written out.
fn forward_second(u: &MeshFn) -> MeshFn {
    let g = *u.grid();
    let h2 = g.h() * g.h();
    let mut out = MeshFn::zeros(g);
    for i in -1..=g.last() - 2 {
        out.set(i, (u.get(i + 2) - 2.0 * u.get(i + 1) + u.get(i)) / h2);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn summation_by_parts((u, v) in mesh_fn()) {
        let d = |k, w: &MeshFn| apply_diff(k, w);
        let (nu, nv) = (norm_l2(&u), norm_l2(&v));

        let (uc, vc) = (d(DiffOp::Central, &u), d(DiffOp::Central, &v));
        prop_assert!(close(ip(&uc, &v), -ip(&u, &vc), 1e-12, norm_l2(&uc) * nv + nu * norm_l2(&vc)));

        let (uf, vb) = (d(DiffOp::Forward, &u), d(DiffOp::Backward, &v));
        prop_assert!(close(ip(&uf, &v), -ip(&u, &vb), 1e-12, norm_l2(&uf) * nv + nu * norm_l2(&vb)));

        let (u2, vf) = (d(DiffOp::Second, &u), d(DiffOp::Forward, &v));
        prop_assert!(close(ip(&u2, &v), -ip(&uf, &vf), 1e-12, norm_l2(&u2) * nv + norm_l2(&uf) * norm_l2(&vf)));

        let u4 = d(DiffOp::Fourth, &u);
        let n2 = norm_l2(&u2);
        prop_assert!(close(ip(&u, &u4), n2 * n2, 1e-12, nu * norm_l2(&u4) + n2 * n2));
    }

    #[test]
    fn odd_operators_are_skew((u, _) in mesh_fn()) {
        for k in [DiffOp::Central, DiffOp::Third, DiffOp::Fifth] {
            let du = apply_diff(k, &u);
            prop_assert!(ip(&du, &u).abs() <= 1e-12 * norm_l2(&u) * norm_l2(&du));
        }
    }

    #[test]
    fn forward_and_centred_second_differences_share_a_norm((u, _) in mesh_fn()) {
        let centred = norm_l2(&apply_diff(DiffOp::Second, &u));
        let forward = norm_l2_shifted(&forward_second(&u), -1);
        prop_assert!(close(forward, centred, 1e-14, centred));
    }

    #[test]
    fn central_norm_bounded_by_forward((u, _) in mesh_fn()) {
        let c = norm_l2(&apply_diff(DiffOp::Central, &u));
        let f = norm_l2(&apply_diff(DiffOp::Forward, &u));
        prop_assert!(c <= f * (1.0 + 1e-15));
    }

    #[test]
    fn operators_preserve_z0_inputs_linearly((u, v) in mesh_fn(), s in -4.0f64..4.0) {
        for k in DiffOp::ALL {
            let lhs = apply_diff(k, &(&u + &(s * &v)));
            let rhs = &apply_diff(k, &u) + &(s * &apply_diff(k, &v));
            let scale = rkrlw::norm_max(&lhs).max(1.0);
            for i in -1..=u.grid().last() {
                prop_assert!((lhs.get(i) - rhs.get(i)).abs() <= 1e-12 * scale);
            }
        }
    }
}

/// Polynomial coefficients of `(1 - x²)^8`, lowest degree first.
fn bump_coeffs() -> Vec<f64> {
    let mut c = vec![1.0];
    for _ in 0..8 {
        let mut next = vec![0.0; c.len() + 2];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 2] -= ck;
        }
        c = next;
    }
    c
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &ck)| k as f64 * ck).collect()
}

/// `d^order/dx^order (1 - x²)^8` on `|x| < 1`, zero outside; the bump is C⁷.
fn bump(order: u32, x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let mut c = bump_coeffs();
    for _ in 0..order {
        c = derivative(&c);
    }
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Max error of an operator against the exact derivative at its natural
/// evaluation point: midpoints for the one-sided differences.
fn consistency_error(op: DiffOp, cells: usize) -> f64 {
    let grid = Grid::new(-2.0, 2.0, cells).unwrap();
    let u = MeshFn::sample(grid, |x| bump(0, x));
    let du = apply_diff(op, &u);
    let h = grid.h();
    let shift = match op {
        DiffOp::Forward => 0.5 * h,
        DiffOp::Backward => -0.5 * h,
        _ => 0.0,
    };
    let m = cells as isize;
    (3..=m - 3)
        .map(|i| (du.get(i) - bump(op.derivative_order(), grid.x(i) + shift)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn bump_polynomial_is_right() {
    assert_eq!(bump(0, 0.0), 1.0);
    assert!((bump(0, 0.5) - 0.75f64.powi(8)).abs() < 1e-15);
    // d/dx (1-x²)^8 = -16 x (1-x²)^7
    assert!((bump(1, 0.5) + 8.0 * 0.75f64.powi(7)).abs() < 1e-14);
    assert_eq!(bump(3, 1.5), 0.0);
}

#[test]
fn every_operator_is_second_order() {
    for op in DiffOp::ALL {
        let coarse = consistency_error(op, 256);
        let fine = consistency_error(op, 512);
        let order = (coarse / fine).log2();
        assert!(order >= 1.9, "{op:?}: errors {coarse:e} -> {fine:e}, order {order:.3}");
    }
}

#[test]
fn impulse_examples() {
    let g = Grid::new(0.0, 5.0, 10).unwrap();
    let e = MeshFn::impulse(g, 5);
    let c = apply_diff(DiffOp::Central, &e);
    assert_eq!((c.get(4), c.get(6), c.get(5)), (1.0, -1.0, 0.0));
    let g = Grid::new(0.0, 2.5, 10).unwrap();
    let e = MeshFn::impulse(g, 5);
    assert_eq!(ip(&e, &e), 0.25);
    let g = Grid::new(0.0, 0.4, 10).unwrap();
    let e = MeshFn::impulse(g, 5);
    assert!((norm_l2(&e) - 0.2).abs() < 1e-15);
    assert_eq!(rkrlw::norm_max(&e), 1.0);
}
