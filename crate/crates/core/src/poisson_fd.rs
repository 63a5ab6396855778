//! Five-point finite differences for `u_xx + u_yy = f` on `[−1, 1]²` with zero boundary data.
//!
//! With `h = 2/n` the interior unknowns satisfy `KX + XKᵀ = F`, where
//! `X_jk = u(−1 + kh, −1 + jh)` for `j, k = 1 … n−1`.

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{Error, Result};
use crate::linalg::{adi_solve, StridedTridiagonal, SylvesterProblem};
use crate::zolotarev_shifts::{
    iteration_count, shifts_with_count, IterationFormula, ShiftSchedule, SpectralIntervals,
};

/// Interior right-hand side on the uniform grid.
#[derive(Debug, Clone)]
pub struct FdProblem {
    pub n: usize,
    pub f: Array2<f64>,
}

impl FdProblem {
    pub fn new(n: usize, f: Array2<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(
                "FdProblem",
                format!("n = {n} must be at least 2"),
            ));
        }
        if f.dim() != (n - 1, n - 1) {
            return Err(Error::Shape(format!(
                "rhs {:?} for n = {n} needs {}×{}",
                f.dim(),
                n - 1,
                n - 1
            )));
        }
        Ok(Self { n, f })
    }

    /// Samples `f` at the interior grid points.
    pub fn from_fn(n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(
                "FdProblem",
                format!("n = {n} must be at least 2"),
            ));
        }
        let g = grid(n);
        Self::new(
            n,
            Array2::from_shape_fn((n - 1, n - 1), |(j, k)| f(g[k], g[j])),
        )
    }

    pub fn h(&self) -> f64 {
        2.0 / self.n as f64
    }
}

/// Interior grid coordinates `−1 + kh`, `k = 1 … n−1`.
pub fn grid(n: usize) -> Vec<f64> {
    let h = 2.0 / n as f64;
    (1..n).map(|k| -1.0 + k as f64 * h).collect()
}

/// Second-difference matrix `K = tridiag(1, −2, 1)/h²` of order `n − 1`.
pub fn build_k(n: usize) -> Result<StridedTridiagonal> {
    if n < 2 {
        return Err(Error::domain(
            "build_K",
            format!("n = {n} must be at least 2"),
        ));
    }
    let m = n - 1;
    let ih2 = (n as f64 / 2.0).powi(2);
    StridedTridiagonal::new(1, vec![-2.0 * ih2; m], vec![ih2; m - 1], vec![ih2; m - 1])
}

/// Closed-form eigenvalues `λ_k = −(4/h²) sin²(πk/(2n))`, `k = 1 … n−1`.
pub fn k_eigenvalues(n: usize) -> Vec<f64> {
    let ih2 = (n as f64 / 2.0).powi(2);
    (1..n)
        .map(|k| {
            -4.0 * ih2
                * (std::f64::consts::PI * k as f64 / (2.0 * n as f64))
                    .sin()
                    .powi(2)
        })
        .collect()
}

/// The orthogonal, symmetric DST-I matrix `S_jk = √(2/n) sin(πjk/n)`.
pub fn dst_matrix(n: usize) -> Array2<f64> {
    let c = (2.0 / n as f64).sqrt();
    Array2::from_shape_fn((n - 1, n - 1), |(j, k)| {
        // reduce jk mod 2n so the sine argument stays small
        let r = ((j + 1) * (k + 1)) % (2 * n);
        c * (std::f64::consts::PI * r as f64 / n as f64).sin()
    })
}

/// Direct solve `X = S(C ∘ (S F S))S` with `C_jk = 1/(λ_j + λ_k)`.
pub fn solve_fd_dst(prob: &FdProblem) -> Array2<f64> {
    let s = dst_matrix(prob.n);
    let lam = k_eigenvalues(prob.n);
    let mut g = s.dot(&prob.f).dot(&s);
    Zip::indexed(&mut g).for_each(|(j, k), v| *v /= lam[j] + lam[k]);
    s.dot(&g).dot(&s)
}

/// The certified intervals `[−n², −1] ∪ [1, n²]`.
pub fn fd_intervals(n: usize) -> SpectralIntervals {
    let n2 = (n * n) as f64;
    SpectralIntervals::symmetric(1.0, n2).expect("valid for n ≥ 2")
}

/// ADI schedule for grid parameter `n`; the default formula is the finite-difference count.
pub fn fd_schedule(n: usize, eps: f64, formula: IterationFormula) -> Result<ShiftSchedule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(
            "solve_fd_adi",
            format!("eps = {eps} must lie in (0, 1)"),
        ));
    }
    shifts_with_count(&fd_intervals(n), iteration_count(formula, n, eps)?)
}

/// Solves `KX − X(−K) = F` by ADI with the given schedule.
pub fn solve_fd_adi_with(prob: &FdProblem, schedule: &ShiftSchedule) -> Result<Array2<f64>> {
    let k = build_k(prob.n)?;
    let neg = k.scaled(-1.0);
    adi_solve(&SylvesterProblem { a: &k, b: &neg }, &prob.f, schedule)
}

/// ADI with `J = ⌈log(2n) log(4/ε)/π²⌉`.
pub fn solve_fd_adi(prob: &FdProblem, eps: f64) -> Result<Array2<f64>> {
    solve_fd_adi_with(
        prob,
        &fd_schedule(prob.n, eps, IterationFormula::FiniteDifference)?,
    )
}

/// `‖KX + XK − F‖_F / ‖F‖_F`.
pub fn fd_residual(prob: &FdProblem, x: ArrayView2<f64>) -> f64 {
    let k = build_k(prob.n).expect("validated problem");
    let mut kx = Array2::zeros(x.raw_dim());
    let mut xk = Array2::zeros(x.raw_dim());
    k.apply_shifted_rows(0.0, x, kx.view_mut());
    k.apply_shifted_cols(0.0, x, xk.view_mut());
    let r = kx + xk - &prob.f;
    let nf = prob.f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nf == 0.0 {
        nr
    } else {
        nr / nf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(n: usize, seed: u64) -> FdProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FdProblem::new(
            n,
            Array2::from_shape_fn((n - 1, n - 1), |_| rng.gen_range(-1.0..1.0)),
        )
        .unwrap()
    }

    #[test]
    fn smallest_grid() {
        let k = build_k(2).unwrap();
        assert_eq!(k.diag(), &[-2.0]);
        assert!((k_eigenvalues(2)[0] + 2.0).abs() < 1e-15);
        let p = FdProblem::new(2, Array2::from_elem((1, 1), 3.0)).unwrap();
        assert!((solve_fd_dst(&p)[[0, 0]] + 0.75).abs() < 1e-15);
        assert!(build_k(1).is_err());
    }

    #[test]
    fn closed_form_eigenvalues_match_matrix() {
        // K v_k = λ_k v_k with v_k the k-th sine vector
        for n in [4, 9] {
            let k = build_k(n).unwrap().to_banded().to_dense();
            let s = dst_matrix(n);
            let lam = k_eigenvalues(n);
            let ks = k.dot(&s);
            for j in 0..n - 1 {
                for c in 0..n - 1 {
                    assert!((ks[[j, c]] - lam[c] * s[[j, c]]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn spectrum_in_certified_interval() {
        for n in [4, 16, 64] {
            for l in k_eigenvalues(n) {
                assert!(l >= -((n * n) as f64) && l <= -1.0);
            }
        }
    }

    #[test]
    fn sine_matrix_is_an_involution() {
        let s = dst_matrix(32);
        let ss = s.dot(&s);
        for ((i, j), v) in ss.indexed_iter() {
            assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn dst_residual() {
        let p = random_problem(64, 1);
        let x = solve_fd_dst(&p);
        assert!(fd_residual(&p, x.view()) <= 1e-11);
    }

    #[test]
    fn zero_rhs() {
        let p = FdProblem::new(16, Array2::zeros((15, 15))).unwrap();
        assert!(solve_fd_adi(&p, 1e-6).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn adi_reaches_general_bound() {
        // with the count from the rigorous bound, ADI meets ε against the direct solve
        for n in [64, 128] {
            let p = random_problem(n, n as u64);
            let x = solve_fd_dst(&p);
            for eps in [1e-3, 1e-6, 1e-10] {
                let iv = fd_intervals(n);
                let gamma = crate::zolotarev_shifts::cross_ratio_gamma(&iv);
                let sched = fd_schedule(n, eps, IterationFormula::General { gamma }).unwrap();
                let y = solve_fd_adi_with(&p, &sched).unwrap();
                assert!(
                    frobenius(&(&y - &x)) <= eps * frobenius(&x),
                    "n={n} eps={eps}"
                );
            }
        }
    }

    #[test]
    fn fd_count_meets_the_sharp_bound() {
        // the finite-difference count only guarantees 4·exp(−Jπ²/log(4n²)), see the bound tests
        for n in [64, 128] {
            let p = random_problem(n, 7 + n as u64);
            let x = solve_fd_dst(&p);
            for eps in [1e-3, 1e-6, 1e-10] {
                let sched = fd_schedule(n, eps, IterationFormula::FiniteDifference).unwrap();
                let j = sched.len() as f64;
                let sharp =
                    4.0 * (-j * std::f64::consts::PI.powi(2) / (4.0 * (n * n) as f64).ln()).exp();
                let y = solve_fd_adi(&p, eps).unwrap();
                assert!(
                    frobenius(&(&y - &x)) <= sharp * frobenius(&x),
                    "n={n} eps={eps}"
                );
            }
        }
    }

    #[test]
    fn second_order_convergence() {
        let pi = std::f64::consts::PI;
        let u = |x: f64, y: f64| (pi * x).sin() * (pi * y).sin();
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let p = FdProblem::from_fn(n, |x, y| -2.0 * pi * pi * u(x, y)).unwrap();
                let x = solve_fd_adi_with(
                    &p,
                    &fd_schedule(
                        n,
                        1e-13,
                        IterationFormula::General {
                            gamma: crate::zolotarev_shifts::cross_ratio_gamma(&fd_intervals(n)),
                        },
                    )
                    .unwrap(),
                )
                .unwrap();
                let g = grid(n);
                x.indexed_iter()
                    .map(|((j, k), v)| (v - u(g[k], g[j])).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.9..=2.1).contains(&order), "order {order}");
        }
    }
}
