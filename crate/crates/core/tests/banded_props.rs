use proptest::prelude::*;
use rkrlw::banded::{lu_factor, BandedMatrix, LinalgError};

/// Diagonally dominant band matrix with a random solution vector.
fn system(bands: impl Strategy<Value = (usize, usize)>) -> impl Strategy<Value = (BandedMatrix, Vec<f64>)> {
    (7usize..=200, bands)
        .prop_flat_map(|(n, (kl, ku))| {
            let width = kl + ku + 1;
            (
                Just((n, kl, ku)),
                prop::collection::vec(-1.0f64..1.0, n * width),
                prop::collection::vec(-10.0f64..10.0, n),
            )
        })
        .prop_map(|((n, kl, ku), entries, x)| {
            let width = kl + ku + 1;
            let mut a = BandedMatrix::zeros(n, kl, ku).unwrap();
            for r in 0..n {
                let mut off = 0.0;
                for (k, &v) in entries[r * width..(r + 1) * width].iter().enumerate() {
                    let c = r as isize + k as isize - kl as isize;
                    if c < 0 || c >= n as isize || c as usize == r {
                        continue;
                    }
                    a.set(r, c as usize, v).unwrap();
                    off += v.abs();
                }
                let sign = if entries[r * width + kl] < 0.0 { -1.0 } else { 1.0 };
                a.set(r, r, sign * (off + 0.5)).unwrap();
            }
            (a, x)
        })
}

fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn round_trip_scheme_bandwidth((a, x) in system(Just((3, 3)))) {
        let b = a.mul_vec(&x).unwrap();
        let solved = lu_factor(&a).unwrap().solve(&b).unwrap();
        prop_assert!(rel_err(&solved, &x) <= 1e-10);
    }

    #[test]
    fn round_trip_any_bandwidth((a, x) in system((0usize..=5, 0usize..=5))) {
        let b = a.mul_vec(&x).unwrap();
        let lu = lu_factor(&a).unwrap();
        let solved = lu.solve(&b).unwrap();
        prop_assert!(rel_err(&solved, &x) <= 1e-10);
        let residual = a.mul_vec(&solved).unwrap();
        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rmax = residual.iter().zip(&b).fold(0.0f64, |m, (r, bb)| m.max((r - bb).abs()));
        prop_assert!(rmax <= 1e-10 * (1.0 + bmax));
    }

    #[test]
    fn zero_rhs_gives_zero((a, _) in system(Just((3, 3)))) {
        let solved = lu_factor(&a).unwrap().solve(&vec![0.0; a.n()]).unwrap();
        prop_assert!(solved.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn identity_returns_rhs() {
    let lu = lu_factor(&BandedMatrix::identity(3)).unwrap();
    assert_eq!(lu.solve(&[3.0, -1.0, 4.0]).unwrap(), vec![3.0, -1.0, 4.0]);
    assert_eq!(
        lu.solve(&[1.0, 2.0]),
        Err(LinalgError::DimensionMismatch { expected: 3, got: 2 })
    );
}
