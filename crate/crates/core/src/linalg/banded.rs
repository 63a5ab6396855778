//! Square banded matrices stored by rows, with a partially pivoted LU.

use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};

use crate::error::{Error, Result};

/// Square matrix whose nonzeros lie in `i − kl ≤ j ≤ i + ku`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row i holds columns i−kl ..= i+ku
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self {
            n: d.len(),
            kl: 0,
            ku: 0,
            data: d.to_vec(),
        }
    }

    /// Copies the band of a dense matrix; entries outside the band are dropped.
    pub fn from_dense(a: ArrayView2<f64>, kl: usize, ku: usize) -> Self {
        let n = a.nrows();
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            for j in m.row_range(i) {
                m.set(i, j, a[[i, j]]);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kl(&self) -> usize {
        self.kl
    }

    pub fn ku(&self) -> usize {
        self.ku
    }

    /// Column range of the stored band in row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.kl < i || j > i + self.ku {
            return None;
        }
        Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets an entry inside the band.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) is outside the band"));
        self.data[s] = v;
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for j in self.row_range(i) {
                a[[i, j]] = self.get(i, j);
            }
        }
        a
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for j in self.row_range(i) {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "banded sum of different orders");
        let mut out = Self::zeros(self.n, self.kl.max(other.kl), self.ku.max(other.ku));
        for i in 0..self.n {
            for j in out.row_range(i) {
                out.set(i, j, self.get(i, j) + s * other.get(i, j));
            }
        }
        out
    }

    /// `self − s·I`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            out.set(i, i, self.get(i, i) - s);
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "banded product of different orders");
        let kl = (self.kl + other.kl).min(self.n.saturating_sub(1));
        let ku = (self.ku + other.ku).min(self.n.saturating_sub(1));
        let mut out = Self::zeros(self.n, kl, ku);
        for i in 0..self.n {
            for k in self.row_range(i) {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in other.row_range(k) {
                    let s = out.slot(i, j).expect("product band");
                    out.data[s] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Leading `m × m` block.
    pub fn leading(&self, m: usize) -> Self {
        let mut out = Self::zeros(m, self.kl, self.ku);
        for i in 0..m {
            for j in out.row_range(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `out = self · x` for a row-major block `x` with `n` rows.
    pub fn left_mul(&self, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) {
        assert_eq!(x.nrows(), self.n);
        out.fill(0.0);
        for i in 0..self.n {
            let mut orow = out.row_mut(i);
            for j in self.row_range(i) {
                let a = self.get(i, j);
                if a != 0.0 {
                    orow.scaled_add(a, &x.row(j));
                }
            }
        }
    }

    /// `out = x · self` for a block `x` with `n` columns.
    pub fn right_mul(&self, x: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) {
        assert_eq!(x.ncols(), self.n);
        for (xr, mut orow) in x.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            for j in 0..self.n {
                let lo = j.saturating_sub(self.ku);
                let hi = (j + self.kl + 1).min(self.n);
                orow[j] = (lo..hi).map(|i| xr[i] * self.get(i, j)).sum();
            }
        }
    }

    /// True when the matrix only couples indices of equal parity within distance 2.
    pub fn is_penta_evenodd(&self) -> bool {
        (0..self.n).all(|i| {
            self.row_range(i)
                .all(|j| matches!(i.abs_diff(j), 0 | 2) || self.get(i, j) == 0.0)
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let a = self.to_dense();
        let b = other.to_dense();
        (&a - &b).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Banded LU with partial pivoting, `U` widened to `kl + ku` superdiagonals.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    wu: usize,
    // row i holds columns i−kl ..= i+wu of the working matrix
    rows: Vec<f64>,
    mult: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &BandedMatrix) -> Result<Self> {
        let n = a.n;
        let kl = a.kl;
        let wu = a.kl + a.ku;
        let w = kl + wu + 1;
        let mut rows = vec![0.0; n * w];
        for i in 0..n {
            for j in a.row_range(i) {
                rows[i * w + j + kl - i] = a.get(i, j);
            }
        }
        let at = |i: usize, j: usize| i * w + j + kl - i;
        let mut mult = vec![0.0; n * kl.max(1)];
        let mut piv = vec![0; n];
        let scale = rows.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = rows[at(k, k)].abs();
            for r in k + 1..=last {
                let v = rows[at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 || best <= f64::EPSILON * 1e-3 * scale {
                return Err(Error::SingularPivot { index: k });
            }
            piv[k] = p;
            let cmax = (k + wu).min(n - 1);
            if p != k {
                for j in k..=cmax {
                    rows.swap(at(k, j), at(p, j));
                }
            }
            let pivot = rows[at(k, k)];
            for r in k + 1..=last {
                let l = rows[at(r, k)] / pivot;
                mult[k * kl.max(1) + (r - k - 1)] = l;
                rows[at(r, k)] = 0.0;
                if l != 0.0 {
                    for j in k + 1..=cmax {
                        rows[at(r, j)] -= l * rows[at(k, j)];
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            wu,
            rows,
            mult,
            piv,
        })
    }

    fn u(&self, i: usize, j: usize) -> f64 {
        self.rows[i * (self.kl + self.wu + 1) + j + self.kl - i]
    }

    fn l(&self, k: usize, r: usize) -> f64 {
        self.mult[k * self.kl.max(1) + (r - k - 1)]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.piv[k]);
            let bk = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                b[r] -= self.l(k, r) * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + self.wu).min(n - 1) {
                s -= self.u(i, j) * b[j];
            }
            b[i] = s / self.u(i, i);
        }
    }

    /// Solves `Aᵀ x = b` in place.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for j in i.saturating_sub(self.wu)..i {
                s -= self.u(j, i) * b[j];
            }
            b[i] = s / self.u(i, i);
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for r in k + 1..=(k + self.kl).min(n - 1) {
                s -= self.l(k, r) * b[r];
            }
            b[k] = s;
            b.swap(k, self.piv[k]);
        }
    }

    /// Solves `A X = B` for a row-major block, one row operation at a time.
    pub fn solve_rows(&self, mut x: ArrayViewMut2<f64>) {
        assert_eq!(x.nrows(), self.n);
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                for c in 0..x.ncols() {
                    x.swap([k, c], [p, c]);
                }
            }
            for r in k + 1..=(k + self.kl).min(n - 1) {
                let l = self.l(k, r);
                if l != 0.0 {
                    let (src, mut dst) =
                        x.multi_slice_mut((ndarray::s![k, ..], ndarray::s![r, ..]));
                    dst.scaled_add(-l, &src);
                }
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..=(i + self.wu).min(n - 1) {
                let u = self.u(i, j);
                if u != 0.0 {
                    let (mut dst, src) =
                        x.multi_slice_mut((ndarray::s![i, ..], ndarray::s![j, ..]));
                    dst.scaled_add(-u, &src);
                }
            }
            let d = 1.0 / self.u(i, i);
            x.row_mut(i).mapv_inplace(|v| v * d);
        }
    }
}

/// Solves `B x = rhs` by banded LU.
pub fn solve_banded(b: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != b.n() {
        return Err(Error::Shape(format!(
            "rhs has {} entries, matrix order {}",
            rhs.len(),
            b.n()
        )));
    }
    let lu = BandedLu::factor(b)?;
    let mut x = rhs.to_vec();
    lu.solve(&mut x);
    Ok(x)
}
