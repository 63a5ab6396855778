//! End-to-end properties of the solvers through the public API.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use spectral_poisson::basis::CoeffMatrix2D;
use spectral_poisson::poisson_cylinder::{solve_cylinder, CylinderRhs};
use spectral_poisson::poisson_square::solve_square;

use common::max_abs;

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * t + v)
}

// coefficients of ((1−t²)p)''
fn weighted_second_derivative(p: &[f64]) -> Vec<f64> {
    let mut wp = vec![0.0; p.len() + 2];
    for (i, &v) in p.iter().enumerate() {
        wp[i] += v;
        wp[i + 2] -= v;
    }
    (2..wp.len())
        .map(|k| (k * (k - 1)) as f64 * wp[k])
        .collect()
}

fn grid() -> Vec<(f64, f64)> {
    (0..=12)
        .flat_map(|i| (0..=12).map(move |j| (-1.0 + i as f64 / 6.0, -1.0 + j as f64 / 6.0)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    // u = (1−x²)(1−y²)p(x)q(y) with cubic p, q lies in the discrete space for n ≥ 6
    #[test]
    fn square_recovers_weighted_polynomials(
        p in prop::collection::vec(-1.0f64..1.0, 4),
        q in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let (p2, q2) = (weighted_second_derivative(&p), weighted_second_derivative(&q));
        let w = |t: f64| 1.0 - t * t;
        let u = |x: f64, y: f64| w(x) * poly(&p, x) * w(y) * poly(&q, y);
        let f = |x: f64, y: f64| {
            poly(&p2, x) * w(y) * poly(&q, y) + w(x) * poly(&p, x) * poly(&q2, y)
        };
        let rhs = CoeffMatrix2D::chebyshev_from_fn(12, f).unwrap();
        let (sol, rep) = solve_square(&rhs, 1e-13).unwrap();
        let pts = grid();
        let vals = sol.evaluate(&pts).unwrap();
        let err = max_abs(pts.iter().zip(vals).map(|(&(x, y), v)| v - u(x, y)));
        prop_assert!(err < 1e-11, "error {err:e}");
        prop_assert!(rep.residual < 1e-11, "residual {:e}", rep.residual);
    }

    #[test]
    fn square_solve_is_linear(a in -3.0f64..3.0, k in 1.0f64..4.0) {
        let f = |x: f64, y: f64| (k * x).sin() * y.cos();
        let g = |x: f64, y: f64| (x * y + k).exp();
        let n = 16;
        let (xf, _) = solve_square(&CoeffMatrix2D::chebyshev_from_fn(n, f).unwrap(), 1e-12).unwrap();
        let (xg, _) = solve_square(&CoeffMatrix2D::chebyshev_from_fn(n, g).unwrap(), 1e-12).unwrap();
        let both = CoeffMatrix2D::chebyshev_from_fn(n, |x, y| a * f(x, y) + g(x, y)).unwrap();
        let (xs, _) = solve_square(&both, 1e-12).unwrap();
        let expect = &xf.x.data * a + &xg.x.data;
        let scale = max_abs(expect.iter().copied()).max(1.0);
        let diff = max_abs(xs.x.data.iter().zip(&expect).map(|(s, e)| s - e));
        prop_assert!(diff <= 1e-12 * scale, "{diff:e}");
    }

    // Δ[(1−ρ²)(1−z²)h] = h·(−4(1−z²) − 2(1−ρ²) − 4m(1−z²)) for h = Re(c(x+iy)^m)
    #[test]
    fn cylinder_recovers_harmonic_modes(m in 0i32..7, phase in 0.0f64..6.3) {
        let c = Complex64::from_polar(1.0, phase);
        let h = move |x: f64, y: f64| (c * Complex64::new(x, y).powi(m)).re;
        let u = move |x: f64, y: f64, z: f64| (1.0 - x * x - y * y) * (1.0 - z * z) * h(x, y);
        let f = move |x: f64, y: f64, z: f64| {
            let (p2, wz) = (x * x + y * y, 1.0 - z * z);
            h(x, y) * (-4.0 * wz - 2.0 * (1.0 - p2) - 4.0 * m as f64 * wz)
        };
        let rhs = CylinderRhs::from_cartesian(16, f).unwrap();
        let (sol, _) = solve_cylinder(&rhs, 1e-12).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..6 {
            for j in 0..6 {
                let (r, t, z) = (0.19 * i as f64, 1.1 * j as f64, -0.95 + 0.38 * j as f64);
                let (x, y) = (r * t.cos(), r * t.sin());
                err = err.max((sol.evaluate(r, t, z).unwrap() - u(x, y, z)).abs());
            }
        }
        prop_assert!(err < 1e-10, "m = {m}: {err:e}");
    }
}
