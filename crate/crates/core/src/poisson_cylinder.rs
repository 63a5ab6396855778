//! Poisson's equation on the unit cylinder `r ≤ 1, |z| ≤ 1` with zero Dirichlet data.
//!
//! The solution is doubled up to `r ∈ [−1, 1]` (`ũ(−r, θ, z) = u(r, θ + π, z)`), expanded in
//! Fourier modes `ũ_k(r, z)` in `θ`, and each mode is written as
//! `ũ_k = r^{min(|k|,2)} (1−r²)(1−z²) ω_k` with `ω_k` in C̃⊗C̃ (rows = r, columns = z).
//!
//! Per mode, with `M = M_{1−r²}` and `D` as for the square:
//!
//! ```text
//! |k| ≥ 2:  (L₁ − k²M) Y M + M_{r²}M Y D = F_k      L₁ = M_{r²}D + 5M_r(MD₁) + 14M − 10I
//! |k| = 1:  L₃ Y M + M_r M Y D = F_k                 L₃ = M_r D + 3(MD₁) − 6M_r
//!  k = 0:   L₄ Y M + M_{r²}M Y D = M_{r²} F₀         L₄ = M_{r²}D + M_r(MD₁) − 2M_{r²}
//! ```
//!
//! The first family goes through ADI; the other two are small dense solves.

use ndarray::{s, Array2, Array3, ArrayView2, ArrayView3, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{
    build_d, build_m, build_m1mr2_d1, build_mr, build_mr2, cheb_points, cheb_series, convert_axis,
    fourier_forward, fourier_points, fourier_wavenumber, ultra_series, BasisTag, CoeffTensor3D,
    Dct1,
};
use crate::error::{Error, Result};
use crate::linalg::{
    adi_solve, frobenius, generalized_sylvester_dense, generalized_sylvester_dense_many, BandedLu,
    BandedMatrix, PencilOperator, StridedTridiagonal, SylvesterProblem, DENSE_UNKNOWNS_MAX,
};
use crate::poisson_square::{assemble, spectral_gap};
use crate::report::SolveReport;
use crate::zolotarev_shifts::{adi_shifts, shifts_with_count, SpectralIntervals};

fn check_n(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::domain(
            "solve_cylinder",
            format!("n = {n} must be even and at least 2"),
        ));
    }
    Ok(())
}

/// Doubles samples on `r > 0` (the positive Chebyshev points, ascending) to the full
/// Chebyshev grid in `r`. Layout is `[r, θ, z]`; the `θ` grid must be uniform with even size.
pub fn dfs_double(half: ArrayView3<f64>) -> Result<Array3<f64>> {
    let (h, nt, nz) = half.dim();
    if nt % 2 == 1 || nt == 0 {
        return Err(Error::domain(
            "dfs_double",
            format!("θ grid of size {nt} must be even"),
        ));
    }
    if h == 0 || nz == 0 {
        return Err(Error::Shape(format!("empty sample grid {:?}", half.dim())));
    }
    let n = 2 * h;
    Ok(Array3::from_shape_fn((n, nt, nz), |(i, m, l)| {
        if i >= h {
            half[[i - h, m, l]]
        } else {
            // r_i = −r_{n−1−i}
            half[[n - 1 - i - h, (m + nt / 2) % nt, l]]
        }
    }))
}

/// Grid `(r, θ, z)` of doubled samples for parameter `n`: `n` Chebyshev points in `r` and `z`, `n` uniform angles.
pub fn cylinder_grid(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (cheb_points(n), fourier_points(n), cheb_points(n))
}

/// Right-hand side in Chebyshev(r) × Fourier(θ) × Chebyshev(z), plus the per-mode C̃⊗C̃ blocks.
#[derive(Debug, Clone)]
pub struct CylinderRhs {
    pub n: usize,
    pub tensor: CoeffTensor3D<Complex64>,
    /// `modes[m]` holds `F_k` for `k = m − n/2`, wrong-parity rows already removed.
    pub modes: Vec<Array2<Complex64>>,
}

impl CylinderRhs {
    /// From a coefficient tensor `[r, k, z]` of size `n × n × n`.
    pub fn from_tensor(tensor: CoeffTensor3D<Complex64>) -> Result<Self> {
        let (nr, nt, nz) = tensor.data.dim();
        if nr != nt || nt != nz {
            return Err(Error::Shape(format!(
                "cylinder tensor must be cubic, got {:?}",
                tensor.data.dim()
            )));
        }
        check_n(nr)?;
        let n = nr;
        let modes = (0..n)
            .into_par_iter()
            .map(|m| {
                let k = fourier_wavenumber(m, n);
                let block = tensor.data.index_axis(Axis(1), m);
                let conv = |part: Array2<f64>| -> Result<Array2<f64>> {
                    let a =
                        convert_axis(part.view(), Axis(1), tensor.basis[2], BasisTag::UltraC32)?;
                    convert_axis(a.view(), Axis(0), tensor.basis[0], BasisTag::UltraC32)
                };
                let re = conv(block.mapv(|c| c.re))?;
                let im = conv(block.mapv(|c| c.im))?;
                let mut f =
                    Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(re[[i, j]], im[[i, j]]));
                project_rows(&mut f, rem(k));
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, tensor, modes })
    }

    /// From doubled samples on [`cylinder_grid`].
    pub fn from_doubled_samples(samples: ArrayView3<f64>) -> Result<Self> {
        let (nr, nt, nz) = samples.dim();
        if nr != nt || nt != nz {
            return Err(Error::Shape(format!(
                "cylinder grid must be n × n × n, got {:?}",
                samples.dim()
            )));
        }
        check_n(nr)?;
        let n = nr;
        let mut data = Array3::<Complex64>::zeros((n, n, n));
        // θ first, then Chebyshev in r and z
        for i in 0..n {
            for l in 0..n {
                let lane: Vec<Complex64> = (0..n)
                    .map(|m| Complex64::new(samples[[i, m, l]], 0.0))
                    .collect();
                for (m, c) in fourier_forward(&lane).into_iter().enumerate() {
                    data[[i, m, l]] = c;
                }
            }
        }
        let dct = Dct1::new(n);
        for ax in [0, 2] {
            for mut lane in data.lanes_mut(Axis(ax)) {
                let re = dct.values_to_coeffs(&lane.iter().map(|c| c.re).collect::<Vec<_>>());
                let im = dct.values_to_coeffs(&lane.iter().map(|c| c.im).collect::<Vec<_>>());
                for (t, (a, b)) in lane.iter_mut().zip(re.into_iter().zip(im)) {
                    *t = Complex64::new(a, b);
                }
            }
        }
        let basis = [
            BasisTag::ChebyshevT,
            BasisTag::FourierComplex,
            BasisTag::ChebyshevT,
        ];
        Self::from_tensor(CoeffTensor3D { data, basis })
    }

    /// From samples on the physical half grid `r > 0`.
    pub fn from_half_samples(half: ArrayView3<f64>) -> Result<Self> {
        Self::from_doubled_samples(dfs_double(half)?.view())
    }

    /// Samples a Cartesian `f(x, y, z)`; doubling is automatic since `(−r, θ+π)` is the same point.
    pub fn from_cartesian(n: usize, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Result<Self> {
        check_n(n)?;
        let (r, t, z) = cylinder_grid(n);
        let samples = Array3::from_shape_fn((n, n, n), |(i, m, l)| {
            f(r[i] * t[m].cos(), r[i] * t[m].sin(), z[l])
        });
        Self::from_doubled_samples(samples.view())
    }
}

/// 0 for even, 1 for odd.
fn rem(k: i64) -> usize {
    k.rem_euclid(2) as usize
}

fn project_rows<T: Clone + Default>(a: &mut Array2<T>, parity: usize) {
    for (i, mut row) in a.axis_iter_mut(Axis(0)).enumerate() {
        if i % 2 != parity {
            row.fill(T::default());
        }
    }
}

/// Power of `r` in the reconstruction of mode `k`.
pub fn radial_power(k: i64) -> i32 {
    k.unsigned_abs().min(2) as i32
}

/// Parity in `r` of `ω_k`, from that of `ũ_k`, `(−1)^k`, and the `r^{min(|k|,2)}` factor.
pub fn omega_parity(k: i64) -> usize {
    (rem(k) + radial_power(k) as usize) % 2
}

/// How a mode was solved.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeStats {
    pub iterations: usize,
    /// Relative residual of the equation actually solved.
    pub residual: f64,
    pub fallback: Option<String>,
}

/// The banded matrices shared by every mode of one `n`.
#[derive(Debug, Clone)]
pub struct CylinderOperators {
    pub n: usize,
    pub m: BandedMatrix,
    pub mr: BandedMatrix,
    pub mr2: BandedMatrix,
    /// `M_{1−r²} D₁`
    pub md1: BandedMatrix,
    pub d: Vec<f64>,
    ds: Vec<f64>,
    neg_a_tilde: StridedTridiagonal,
}

/// Rows of parity `rows` and columns of parity `cols`, still banded.
fn banded_sub(b: &BandedMatrix, rows: usize, cols: usize) -> BandedMatrix {
    let n = b.n();
    let m = (rows..n).step_by(2).count();
    let mut out = BandedMatrix::zeros(m, b.kl().div_ceil(2) + 1, b.ku().div_ceil(2) + 1);
    for i in 0..m {
        for j in out.row_range(i) {
            let (r, c) = (rows + 2 * i, cols + 2 * j);
            if c < n && b.row_range(r).contains(&c) {
                out.set(i, j, b.get(r, c));
            }
        }
    }
    out
}

#[cfg(test)]
fn dense_sub(b: &BandedMatrix, rows: usize, cols: usize) -> Array2<f64> {
    let full = b.to_dense();
    let r: Vec<usize> = (rows..b.n()).step_by(2).collect();
    let c: Vec<usize> = (cols..b.n()).step_by(2).collect();
    Array2::from_shape_fn((r.len(), c.len()), |(i, j)| full[[r[i], c[j]]])
}

fn rows_of(a: ArrayView2<f64>, parity: usize) -> Array2<f64> {
    a.slice(s![parity..;2, ..]).to_owned()
}

/// Max over `i` of the row sums of `|a|` after a few Osborne balancing sweeps.
fn balanced_inf_norm(mut a: Array2<f64>) -> f64 {
    let n = a.nrows();
    for _ in 0..6 {
        for i in 0..n {
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[[i, j]].abs()).sum();
            let c: f64 = (0..n).filter(|&j| j != i).map(|j| a[[j, i]].abs()).sum();
            if r > 0.0 && c > 0.0 {
                let f = (r / c).sqrt();
                a.row_mut(i).mapv_inplace(|v| v / f);
                a.column_mut(i).mapv_inplace(|v| v * f);
            }
        }
    }
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl CylinderOperators {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let sq = assemble(n)?;
        Ok(Self {
            n,
            m: build_m(n),
            mr: build_mr(n),
            mr2: build_mr2(n),
            md1: build_m1mr2_d1(n),
            d: build_d(n),
            ds: sq.ds.clone(),
            neg_a_tilde: sq.a_tilde.scaled(-1.0),
        })
    }

    fn diag_d(&self) -> BandedMatrix {
        BandedMatrix::diagonal(&self.d)
    }

    /// `L₁ = M_{r²}D + 5M_r(MD₁) + 14M − 10I`.
    pub fn l1(&self) -> BandedMatrix {
        self.mr2
            .matmul(&self.diag_d())
            .add_scaled(5.0, &self.mr.matmul(&self.md1))
            .add_scaled(14.0, &self.m)
            .add_scaled(-10.0, &BandedMatrix::identity(self.n))
    }

    /// `L₃ = M_r D + 3MD₁ − 6M_r`.
    pub fn l3(&self) -> BandedMatrix {
        self.mr
            .matmul(&self.diag_d())
            .add_scaled(3.0, &self.md1)
            .add_scaled(-6.0, &self.mr)
    }

    /// `L₄ = M_{r²}D + M_r(MD₁) − 2M_{r²}`.
    pub fn l4(&self) -> BandedMatrix {
        self.mr2
            .matmul(&self.diag_d())
            .add_scaled(1.0, &self.mr.matmul(&self.md1))
            .add_scaled(-2.0, &self.mr2)
    }

    /// The left and right matrices `(L, N)` of `L Y M + N Y D = F` for mode `k`.
    pub fn mode_pair(&self, k: i64) -> (BandedMatrix, BandedMatrix) {
        match k.unsigned_abs() {
            0 => (self.l4(), self.mr2.matmul(&self.m)),
            1 => (self.l3(), self.mr.matmul(&self.m)),
            _ => (
                self.l1().add_scaled(-((k * k) as f64), &self.m),
                self.mr2.matmul(&self.m),
            ),
        }
    }

    /// `‖L Y M + N Y D − F‖_F / ‖F‖_F` for mode `k` (for `k = 0` pass `M_{r²}F₀`).
    pub fn mode_residual(&self, k: i64, y: &Array2<f64>, f: &Array2<f64>) -> f64 {
        let (l, nm) = self.mode_pair(k);
        let mut t = Array2::zeros(y.raw_dim());
        let mut lym = Array2::zeros(y.raw_dim());
        l.left_mul(y.view(), t.view_mut());
        self.m.right_mul(t.view(), lym.view_mut());
        let mut nyd = Array2::zeros(y.raw_dim());
        nm.left_mul(y.view(), nyd.view_mut());
        Zip::indexed(&mut nyd).for_each(|(_, j), v| *v *= self.d[j]);
        frobenius(&(lym + nyd - f)) / frobenius(f).max(f64::MIN_POSITIVE)
    }

    /// Interval `[a, b]`, `b < 0`, meant to contain the spectrum of `A = L_k⁻¹ M_{r²}M`.
    ///
    /// `|λ| ≤ ‖A‖` and `|λ| ≥ 1/‖A⁻¹‖` in balanced ∞-norms (the Gershgorin hulls about 0),
    /// then widened by a factor 2 at both ends. Realness and sign are assumed and checked
    /// a posteriori through the residual.
    pub fn case1_interval(&self, k: i64) -> Result<(f64, f64)> {
        let (l, nm) = self.mode_pair(k);
        let mut a = nm.to_dense();
        BandedLu::factor(&l)?.solve_rows(a.view_mut());
        let mut ainv = l.to_dense();
        BandedLu::factor(&nm)?.solve_rows(ainv.view_mut());
        let hi = balanced_inf_norm(a);
        let lo = 1.0 / balanced_inf_norm(ainv);
        if !(lo > 0.0 && hi.is_finite() && lo <= hi) {
            return Err(Error::domain(
                "case1_interval",
                format!("no usable bound for k = {k}: [{lo:e}, {hi:e}]"),
            ));
        }
        Ok((-2.0 * hi, -0.5 * lo))
    }

    /// `|k| ≥ 2` by ADI on `A V − V(−Ã) = L_k⁻¹ F D_s`, `Y = V D_s⁻¹ D⁻¹`.
    ///
    /// If the residual exceeds `max(10ε, 1e−13)` the count is doubled once. What remains after
    /// that is rounding noise and is accepted below `√u`; anything else goes to the dense
    /// Kronecker solve, within its size guard.
    pub fn case1(
        &self,
        k: i64,
        rhs: &[ArrayView2<f64>],
        eps: f64,
    ) -> Result<(Vec<Array2<f64>>, ModeStats)> {
        if k.unsigned_abs() < 2 {
            return Err(Error::domain(
                "solve_mode_case1",
                format!("|k| = {} must be at least 2", k.abs()),
            ));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(
                "solve_mode_case1",
                format!("eps = {eps} must lie in (0, 1)"),
            ));
        }
        let n = self.n;
        let parity = rem(k);
        let (l, nm) = self.mode_pair(k);
        let projected: Vec<Array2<f64>> = rhs
            .iter()
            .map(|f| {
                let mut f = f.to_owned();
                project_rows(&mut f, parity);
                f
            })
            .collect();
        let tol = (10.0 * eps).max(1e-13);
        let attempt = || -> Result<(Vec<Array2<f64>>, ModeStats)> {
            let (a, b) = self.case1_interval(k)?;
            let iv = SpectralIntervals::new(a, b, spectral_gap(n), 1.0)?;
            let pencil = PencilOperator::new(l.clone(), nm.clone())?;
            let prob = SylvesterProblem {
                a: &pencil,
                b: &self.neg_a_tilde,
            };
            let lu = BandedLu::factor(&l)?;
            let rts: Vec<Array2<f64>> = projected
                .iter()
                .map(|f| {
                    let mut r = f.clone();
                    lu.solve_rows(r.view_mut());
                    Zip::indexed(&mut r).for_each(|(_, j), v| *v *= self.ds[j]);
                    r
                })
                .collect();
            let mut schedule = adi_shifts(&iv, eps)?;
            for round in 0..2 {
                let vs = rts
                    .iter()
                    .map(|r| adi_solve(&prob, r, &schedule))
                    .collect::<Result<Vec<_>>>()?;
                let mut worst = 0.0_f64;
                for (v, r) in vs.iter().zip(&rts) {
                    if frobenius(r) > 0.0 {
                        worst = worst.max(prob.residual(v, r)?);
                    }
                }
                // doubling J squares the truncation error, so what is left is rounding; a wrong
                // interval would leave O(1) residuals
                let stalled = round > 0 && worst <= f64::EPSILON.sqrt();
                if worst <= tol || stalled {
                    let ys = vs
                        .into_iter()
                        .map(|mut v| {
                            Zip::indexed(&mut v).for_each(|(_, j), x| *x /= self.ds[j] * self.d[j]);
                            project_rows(&mut v, parity);
                            v
                        })
                        .collect();
                    let fallback = if stalled && worst > tol {
                        Some(format!("k = {k}: residual {worst:e} at its rounding floor"))
                    } else {
                        (round > 0).then(|| format!("k = {k}: doubled the iteration count"))
                    };
                    return Ok((
                        ys,
                        ModeStats {
                            iterations: schedule.len(),
                            residual: worst,
                            fallback,
                        },
                    ));
                }
                if round == 0 {
                    schedule = shifts_with_count(&iv, 2 * schedule.len())?;
                }
            }
            Err(Error::domain(
                "solve_mode_case1",
                format!("k = {k}: residual above {tol:e} after doubling"),
            ))
        };
        match attempt() {
            Ok(out) => Ok(out),
            Err(e) if n * n <= DENSE_UNKNOWNS_MAX => {
                let md = self.m.to_dense();
                let dd = self.diag_d().to_dense();
                let (ld, nd) = (l.to_dense(), nm.to_dense());
                let terms = [(ld.view(), md.view()), (nd.view(), dd.view())];
                let views: Vec<ArrayView2<f64>> = projected.iter().map(|f| f.view()).collect();
                let mut ys = generalized_sylvester_dense_many(&terms, &views)?;
                let mut residual = 0.0_f64;
                for (y, f) in ys.iter_mut().zip(&projected) {
                    project_rows(y, parity);
                    if frobenius(f) > 0.0 {
                        residual = residual.max(self.mode_residual(k, y, f));
                    }
                }
                Ok((
                    ys,
                    ModeStats {
                        iterations: 0,
                        residual,
                        fallback: Some(format!("k = {k}: dense solve ({e})")),
                    },
                ))
            }
            Err(e) => Err(e),
        }
    }

    /// Modes `k = 0, ±1`, restricted to the parity classes that carry the mode.
    ///
    /// With `Y = V D_s⁻¹ D⁻¹` the equation reads `L V Ã + N V = F D_s`. Each parity block of the
    /// symmetric `Ã` is diagonalized, `Ã = Q Λ Qᵀ`, and every column of `W = V Q` then solves
    /// the banded system `(λ_j L + N) w_j = (F D_s Q)_j`.
    fn decoupled_mode(&self, k: i64, rhs: &[Array2<f64>]) -> Result<(Vec<Array2<f64>>, ModeStats)> {
        let n = self.n;
        let (eq_par, y_par) = (rem(k), omega_parity(k));
        let (l, nm) = self.mode_pair(k);
        let (lr, nr) = (banded_sub(&l, eq_par, y_par), banded_sub(&nm, eq_par, y_par));
        let a_tilde = self.neg_a_tilde.to_banded().scaled(-1.0).to_dense();
        let restricted: Vec<Array2<f64>> = rhs
            .iter()
            .map(|f| {
                let mut r = rows_of(f.view(), eq_par);
                Zip::indexed(&mut r).for_each(|(_, j), v| *v *= self.ds[j]);
                r
            })
            .collect();
        let mut vs: Vec<Array2<f64>> = vec![Array2::zeros((lr.n(), n)); rhs.len()];
        for p in 0..2 {
            let idx: Vec<usize> = (p..n).step_by(2).collect();
            // −Ã is positive definite, so its SVD is its eigendecomposition
            let block =
                nalgebra::DMatrix::from_fn(idx.len(), idx.len(), |i, j| -a_tilde[[idx[i], idx[j]]]);
            let svd = nalgebra::SVD::new(block, true, false);
            let u = svd.u.expect("left singular vectors");
            let q = Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| u[(i, j)]);
            let lambda: Vec<f64> = svd.singular_values.iter().map(|v| -v).collect();
            let gs: Vec<Array2<f64>> = restricted
                .iter()
                .map(|f| f.select(Axis(1), &idx).dot(&q))
                .collect();
            let cols = (0..idx.len())
                .into_par_iter()
                .map(|j| {
                    let lu = BandedLu::factor(&nr.add_scaled(lambda[j], &lr))?;
                    Ok(gs
                        .iter()
                        .map(|g| {
                            let mut c = g.column(j).to_vec();
                            lu.solve(&mut c);

                            c
                        })
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            for (r, v) in vs.iter_mut().enumerate() {
                let w = Array2::from_shape_fn((lr.n(), idx.len()), |(i, j)| cols[j][r][i]);
                let back = w.dot(&q.t());
                for (jj, &j) in idx.iter().enumerate() {
                    v.column_mut(j).assign(&back.column(jj));
                }
            }
        }
        let mut residual = 0.0_f64;
        let ys = vs
            .into_iter()
            .zip(rhs)
            .map(|(v, f)| {
                let mut y = Array2::zeros((n, n));
                y.slice_mut(s![y_par..;2, ..]).assign(&v);
                Zip::indexed(&mut y).for_each(|(_, j), x| *x /= self.ds[j] * self.d[j]);
                if frobenius(f) > 0.0 {
                    residual = residual.max(self.mode_residual(k, &y, f));
                }
                y
            })
            .collect();
        Ok((
            ys,
            ModeStats {
                iterations: 0,
                residual,
                fallback: None,
            },
        ))
    }

    /// Dense Kronecker solve restricted to the parity classes that carry the mode.
    #[cfg(test)]
    fn dense_mode(&self, k: i64, rhs: &[Array2<f64>]) -> Result<(Vec<Array2<f64>>, ModeStats)> {
        let n = self.n;
        let (eq_par, y_par) = (rem(k), omega_parity(k));
        let (l, nm) = self.mode_pair(k);
        let (lr, nr) = (dense_sub(&l, eq_par, y_par), dense_sub(&nm, eq_par, y_par));
        let md = self.m.to_dense();
        let dd = self.diag_d().to_dense();
        let restricted: Vec<Array2<f64>> = rhs.iter().map(|f| rows_of(f.view(), eq_par)).collect();
        let views: Vec<ArrayView2<f64>> = restricted.iter().map(|f| f.view()).collect();
        let half = generalized_sylvester_dense_many(
            &[(lr.view(), md.view()), (nr.view(), dd.view())],
            &views,
        )?;
        let mut residual = 0.0_f64;
        let ys = half
            .into_iter()
            .zip(rhs)
            .map(|(h, f)| {
                let mut y = Array2::zeros((n, n));
                y.slice_mut(s![y_par..;2, ..]).assign(&h);
                if frobenius(f) > 0.0 {
                    residual = residual.max(self.mode_residual(k, &y, f));
                }
                y
            })
            .collect();
        Ok((
            ys,
            ModeStats {
                iterations: 0,
                residual,
                fallback: None,
            },
        ))
    }

    /// `|k| = 1`: `L₃ Y M + M_rM Y D = F_k`, odd equations, even `Y`.
    pub fn case2(&self, rhs: &[ArrayView2<f64>]) -> Result<(Vec<Array2<f64>>, ModeStats)> {
        let f: Vec<Array2<f64>> = rhs.iter().map(|f| f.to_owned()).collect();
        self.decoupled_mode(1, &f)
    }

    /// `k = 0`: `L₄ Y M + M_{r²}M Y D = M_{r²}F₀`.
    pub fn case3(&self, rhs: &[ArrayView2<f64>]) -> Result<(Vec<Array2<f64>>, ModeStats)> {
        let f: Vec<Array2<f64>> = rhs
            .iter()
            .map(|f| {
                let mut w = Array2::zeros(f.raw_dim());
                self.mr2.left_mul(*f, w.view_mut());
                w
            })
            .collect();
        self.decoupled_mode(0, &f)
    }
}

/// Single-mode entry points on real data.
pub fn solve_mode_case1(k: i64, f: ArrayView2<f64>, eps: f64) -> Result<Array2<f64>> {
    Ok(CylinderOperators::new(f.nrows())?
        .case1(k, &[f], eps)?
        .0
        .remove(0))
}

pub fn solve_mode_case2(f: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(CylinderOperators::new(f.nrows())?.case2(&[f])?.0.remove(0))
}

pub fn solve_mode_case3(f: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(CylinderOperators::new(f.nrows())?.case3(&[f])?.0.remove(0))
}

/// `ω_k` for one Fourier mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub k: i64,
    pub omega: Array2<Complex64>,
}

impl ModeSolution {
    /// `ũ_k(r, z)`.
    pub fn value(&self, r: f64, z: f64) -> Complex64 {
        let w = (1.0 - r * r) * (1.0 - z * z) * r.powi(radial_power(self.k));
        let part = |f: fn(&Complex64) -> f64| {
            let inner: Vec<f64> = self
                .omega
                .rows()
                .into_iter()
                .map(|row| ultra_series(&row.iter().map(f).collect::<Vec<_>>(), z))
                .collect();
            ultra_series(&inner, r)
        };
        Complex64::new(part(|c| c.re), part(|c| c.im)) * w
    }
}

#[derive(Debug, Clone)]
pub struct CylinderSolution {
    pub n: usize,
    pub modes: Vec<ModeSolution>,
}

impl CylinderSolution {
    /// `u(r, θ, z)`; `r` may be negative (the doubled variable).
    pub fn evaluate(&self, r: f64, theta: f64, z: f64) -> Result<f64> {
        if !(r.abs() <= 1.0 && z.abs() <= 1.0 && theta.is_finite()) {
            return Err(Error::domain(
                "evaluate",
                format!("({r}, {theta}, {z}) lies outside the cylinder"),
            ));
        }
        Ok(self
            .modes
            .iter()
            .map(|m| (m.value(r, z) * Complex64::from_polar(1.0, m.k as f64 * theta)).re)
            .sum())
    }

    pub fn evaluate_cartesian(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let r = x.hypot(y);
        if r > 1.0 + 1e-15 {
            return Err(Error::domain(
                "evaluate",
                format!("({x}, {y}, {z}) lies outside the cylinder"),
            ));
        }
        self.evaluate(r.min(1.0), y.atan2(x), z)
    }

    /// Chebyshev(r) × Fourier(θ) × Chebyshev(z) coefficients of `ũ`, of size `(n+4) × n × (n+2)`.
    pub fn to_coefficients(&self) -> Result<CoeffTensor3D<Complex64>> {
        let n = self.n;
        let (nr, nz) = (n + 4, n + 2);
        let (m_r, m_z) = (build_m(nr), build_m(nz));
        let (mr, mr2) = (build_mr(nr), build_mr2(nr));
        let blocks = self
            .modes
            .par_iter()
            .map(|mode| {
                let part = |f: fn(&Complex64) -> f64| -> Result<Array2<f64>> {
                    let mut p = Array2::zeros((nr, nz));
                    p.slice_mut(s![..n, ..n]).assign(&mode.omega.map(f));
                    let mut a = Array2::zeros((nr, nz));
                    m_r.left_mul(p.view(), a.view_mut());
                    let mut b = Array2::zeros((nr, nz));
                    match radial_power(mode.k) {
                        0 => b.assign(&a),
                        1 => mr.left_mul(a.view(), b.view_mut()),
                        _ => mr2.left_mul(a.view(), b.view_mut()),
                    }
                    m_z.right_mul(b.view(), a.view_mut());
                    let c =
                        convert_axis(a.view(), Axis(1), BasisTag::UltraC32, BasisTag::ChebyshevT)?;
                    convert_axis(c.view(), Axis(0), BasisTag::UltraC32, BasisTag::ChebyshevT)
                };
                Ok((part(|c| c.re)?, part(|c| c.im)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data = Array3::zeros((nr, n, nz));
        for (m, (re, im)) in blocks.into_iter().enumerate() {
            Zip::from(data.index_axis_mut(Axis(1), m))
                .and(&re)
                .and(&im)
                .for_each(|d, &a, &b| *d = Complex64::new(a, b));
        }
        Ok(CoeffTensor3D {
            data,
            basis: [
                BasisTag::ChebyshevT,
                BasisTag::FourierComplex,
                BasisTag::ChebyshevT,
            ],
        })
    }
}

/// `Σ_k Σ_ij c_ikj T_i(r) e^{ikθ} T_j(z)`, real part.
pub fn eval_cheb_fourier_cheb(c: &CoeffTensor3D<Complex64>, r: f64, theta: f64, z: f64) -> f64 {
    let (_, nt, _) = c.data.dim();
    (0..nt)
        .map(|m| {
            let block = c.data.index_axis(Axis(1), m);
            let val = |f: fn(&Complex64) -> f64| {
                let inner: Vec<f64> = block
                    .rows()
                    .into_iter()
                    .map(|row| cheb_series(&row.iter().map(f).collect::<Vec<_>>(), z))
                    .collect();
                cheb_series(&inner, r)
            };
            let k = fourier_wavenumber(m, nt) as f64;
            (Complex64::new(val(|c| c.re), val(|c| c.im)) * Complex64::from_polar(1.0, k * theta))
                .re
        })
        .sum()
}

/// Full pipeline on a prepared right-hand side.
pub fn solve_cylinder(rhs: &CylinderRhs, eps: f64) -> Result<(CylinderSolution, SolveReport)> {
    let n = rhs.n;
    let mut report = SolveReport::new("cylinder", n, eps);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(
            "solve_cylinder",
            format!("eps = {eps} must lie in (0, 1)"),
        ));
    }
    let ops = report.time("assemble", || CylinderOperators::new(n))?;
    let split = |f: &Array2<Complex64>| (f.mapv(|c| c.re), f.mapv(|c| c.im));
    let join = |re: &Array2<f64>, im: &Array2<f64>| {
        Zip::from(re)
            .and(im)
            .map_collect(|&a, &b| Complex64::new(a, b))
    };
    let idx = |k: i64| (k + (n / 2) as i64) as usize;

    let mut omegas: Vec<Option<Array2<Complex64>>> = vec![None; n];
    let mut stats: Vec<ModeStats> = Vec::new();

    // k = ±1 share one factorization, as do the two parts of k = 0
    report
        .time("dense", || -> Result<()> {
            let ones: Vec<i64> = [-1, 1].into_iter().filter(|&k| idx(k) < n).collect();
            let mut parts = Vec::new();
            for &k in &ones {
                let (re, im) = split(&rhs.modes[idx(k)]);
                parts.push(re);
                parts.push(im);
            }
            let views: Vec<ArrayView2<f64>> = parts.iter().map(|p| p.view()).collect();
            let (ys, st) = ops.case2(&views)?;
            for (t, &k) in ones.iter().enumerate() {
                omegas[idx(k)] = Some(join(&ys[2 * t], &ys[2 * t + 1]));
            }
            stats.push(st);
            let (re, im) = split(&rhs.modes[idx(0)]);
            let (ys, st) = ops.case3(&[re.view(), im.view()])?;
            omegas[idx(0)] = Some(join(&ys[0], &ys[1]));
            stats.push(st);
            Ok(())
        })
        .map_err(|e| Error::Nested {
            level: "dense modes",
            source: Box::new(e),
        })?;

    let ks: Vec<i64> = (0..n)
        .map(|m| fourier_wavenumber(m, n))
        .filter(|k| k.abs() >= 2)
        .collect();
    let solved = report.time("adi", || {
        ks.par_iter()
            .map(|&k| {
                let (re, im) = split(&rhs.modes[idx(k)]);
                let (ys, st) = ops.case1(k, &[re.view(), im.view()], eps)?;
                Ok((k, join(&ys[0], &ys[1]), st))
            })
            .collect::<Vec<Result<_>>>()
    });
    let mut failures = Vec::new();
    for r in solved {
        match r {
            Ok((k, w, st)) => {
                omegas[idx(k)] = Some(w);
                stats.push(st);
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        return Err(Error::domain(
            "solve_cylinder",
            format!("{} mode(s) failed: {}", failures.len(), failures.join("; ")),
        ));
    }
    report.iterations = stats.iter().map(|s| s.iterations).max().unwrap_or(0);
    report.residual = stats.iter().map(|s| s.residual).fold(0.0, f64::max);
    report.notes = stats.iter().filter_map(|s| s.fallback.clone()).collect();
    let modes = omegas
        .into_iter()
        .enumerate()
        .map(|(m, w)| ModeSolution {
            k: fourier_wavenumber(m, n),
            omega: w.expect("every mode solved"),
        })
        .collect();
    Ok((CylinderSolution { n, modes }, report))
}

/// Samples on the doubled grid to solution, timing the transform as well.
pub fn solve_cylinder_samples(
    samples: ArrayView3<f64>,
    eps: f64,
) -> Result<(CylinderSolution, SolveReport)> {
    let t0 = std::time::Instant::now();
    let rhs = CylinderRhs::from_doubled_samples(samples)?;
    let dt = t0.elapsed().as_secs_f64();
    let (sol, mut rep) = solve_cylinder(&rhs, eps)?;
    rep.seconds.insert("transform_in".into(), dt);
    Ok((sol, rep))
}

/// Single-mode dense reference for tests and small problems.
pub fn mode_dense_oracle(
    ops: &CylinderOperators,
    k: i64,
    f: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    let (l, nm) = ops.mode_pair(k);
    let md = ops.m.to_dense();
    let dd = BandedMatrix::diagonal(&ops.d).to_dense();
    let (ld, nd) = (l.to_dense(), nm.to_dense());
    generalized_sylvester_dense(&[(ld.view(), md.view()), (nd.view(), dd.view())], f)
}
