//! Optimal ADI shifts for two real disjoint intervals, and iteration counts.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special_functions::{ellipk, sncndn, zolotarev_bound, Modulus};

/// `σ(A) ⊂ [a, b]` and `σ(B) ⊂ [c, d]` with `a ≤ b < c ≤ d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralIntervals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SpectralIntervals {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("intervals", "endpoints must be finite"));
        }
        if !(a <= b && b < c && c <= d) {
            return Err(Error::domain(
                "intervals",
                format!("need a <= b < c <= d, got [{a}, {b}] and [{c}, {d}]"),
            ));
        }
        Ok(Self { a, b, c, d })
    }

    /// `[−hi, −lo] ∪ [lo, hi]`.
    pub fn symmetric(lo: f64, hi: f64) -> Result<Self> {
        Self::new(-hi, -lo, lo, hi)
    }
}

/// Absolute cross-ratio `γ = |c−a||d−b| / (|c−b||d−a|)`, always ≥ 1.
pub fn cross_ratio_gamma(iv: &SpectralIntervals) -> f64 {
    let SpectralIntervals { a, b, c, d } = *iv;
    ((c - a) * (d - b) / ((c - b) * (d - a))).max(1.0)
}

pub fn alpha_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::domain(
            "alpha_from_gamma",
            format!("gamma = {gamma} must be finite and >= 1"),
        ));
    }
    Ok(1.0 + alpha_minus_one(gamma))
}

// α − 1 without cancellation near γ = 1
fn alpha_minus_one(gamma: f64) -> f64 {
    let g1 = gamma - 1.0;
    2.0 * g1 + 2.0 * (gamma * g1).sqrt()
}

/// `T(t) = (w₁t + w₂)/(w₃t + w₄)`, coefficients scaled so the largest has magnitude 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub w: [f64; 4],
}

impl MobiusMap {
    pub fn eval(&self, t: f64) -> f64 {
        let [w1, w2, w3, w4] = self.w;
        (w1 * t + w2) / (w3 * t + w4)
    }
}

/// The Möbius map sending `{−α, −1, 1, α}` to `{a, b, c, d}`.
pub fn mobius_map(iv: &SpectralIntervals) -> Result<MobiusMap> {
    let SpectralIntervals { a, b, c, d: _ } = *iv;
    let am1 = alpha_minus_one(cross_ratio_gamma(iv));
    let alpha = 1.0 + am1;
    // cross-ratio anchored at b: s = (t+α)(−2)/((t−1)(α−1)), T = (a(b−c) − c(b−a)s)/((b−c) − (b−a)s)
    let mut w = [
        a * (b - c) * am1 + 2.0 * c * (b - a),
        -a * (b - c) * am1 + 2.0 * c * (b - a) * alpha,
        (b - c) * am1 + 2.0 * (b - a),
        -(b - c) * am1 + 2.0 * (b - a) * alpha,
    ];
    let scale = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::domain("mobius_map", "degenerate interval data"));
    }
    w.iter_mut().for_each(|v| *v /= scale);
    let det = w[0] * w[3] - w[1] * w[2];
    if det.abs() <= 1e-300 || a == b && iv.c == iv.d {
        return Err(Error::domain("mobius_map", "degenerate interval data"));
    }
    Ok(MobiusMap { w })
}

/// Shift lists for `J` ADI iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSchedule {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ShiftSchedule {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Shape(format!(
                "{} p-shifts but {} q-shifts",
                p.len(),
                q.len()
            )));
        }
        Ok(Self { p, q })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Formula used to pick the number of ADI iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IterationFormula {
    /// `⌈log(16γ) log(4/ε) / π²⌉`.
    General { gamma: f64 },
    /// Five-point FD count `⌈log(2n) log(4/ε) / π²⌉`.
    FiniteDifference,
    /// Square count as printed, `⌈log(120n⁴) log(1/ε) / (2π²)⌉`.
    SquarePrinted,
}

impl FromStr for IterationFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd" => Ok(Self::FiniteDifference),
            "square-printed" => Ok(Self::SquarePrinted),
            other => match other.strip_prefix("general:") {
                Some(g) => g
                    .parse::<f64>()
                    .map(|gamma| Self::General { gamma })
                    .map_err(|e| Error::Parse(format!("bad gamma in {other:?}: {e}"))),
                None => Err(Error::Parse(format!("unknown iteration formula {other:?}"))),
            },
        }
    }
}

impl fmt::Display for IterationFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::General { gamma } => write!(f, "general:{gamma}"),
            Self::FiniteDifference => f.write_str("fd"),
            Self::SquarePrinted => f.write_str("square-printed"),
        }
    }
}

/// Number of iterations from the selected formula, never below 1.
pub fn iteration_count(formula: IterationFormula, n: usize, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(
            "iteration_count",
            format!("eps = {eps} is outside (0, 1]"),
        ));
    }
    if n == 0 {
        return Err(Error::domain("iteration_count", "n must be positive"));
    }
    let nf = n as f64;
    let raw = match formula {
        IterationFormula::General { gamma } => {
            if !(gamma >= 1.0) {
                return Err(Error::domain(
                    "iteration_count",
                    format!("gamma = {gamma} must be >= 1"),
                ));
            }
            (16.0 * gamma).ln() * (4.0 / eps).ln() / (PI * PI)
        }
        IterationFormula::FiniteDifference => (2.0 * nf).ln() * (4.0 / eps).ln() / (PI * PI),
        IterationFormula::SquarePrinted => {
            (120.0 * nf.powi(4)).ln() * (1.0 / eps).ln() / (2.0 * PI * PI)
        }
    };
    Ok((raw.ceil() as usize).max(1))
}

/// Optimal shifts for `iv` with the general iteration count for tolerance `eps`.
pub fn adi_shifts(iv: &SpectralIntervals, eps: f64) -> Result<ShiftSchedule> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(
            "adi_shifts",
            format!("eps = {eps} is outside (0, 1)"),
        ));
    }
    let gamma = cross_ratio_gamma(iv);
    let j = iteration_count(IterationFormula::General { gamma }, 1, eps)?;
    shifts_with_count(iv, j)
}

/// Optimal shifts for a prescribed number of iterations.
///
/// The Möbius transplant is evaluated in one of two algebraically equal forms, anchored
/// at the inner or the outer endpoint, whichever cancels less. Together with `α·dn − 1`
/// and `α − α·dn` formed without subtraction, shifts keep full relative accuracy even
/// next to a tiny endpoint with `α ~ 1e16`.
pub fn shifts_with_count(iv: &SpectralIntervals, j: usize) -> Result<ShiftSchedule> {
    let SpectralIntervals { a, b, c, d } = *iv;
    let gamma = cross_ratio_gamma(iv);
    let am1 = alpha_minus_one(gamma);
    if am1 == 0.0 {
        return ShiftSchedule::new(vec![b; j], vec![c; j]);
    }
    let alpha = 1.0 + am1;
    let modulus = Modulus::from_complement(1.0 / alpha)?;
    let big_k = ellipk(modulus);
    let ratio = (1.0 + alpha) / am1;
    let mut p = Vec::with_capacity(j);
    let mut q = Vec::with_capacity(j);
    for i in 0..j {
        let z = (2 * i + 1) as f64 / (2 * j) as f64 * big_k;
        // t = α·dn(z) ≥ 1, e = t − 1 and f = α − t, all without subtraction
        let (t, e, f) = if z <= 0.5 * big_k {
            let (sn, _, dn) = sncndn(z, modulus);
            let t = alpha * dn;
            (
                t,
                t - 1.0,
                alpha * modulus.parameter() * sn * sn / (1.0 + dn),
            )
        } else {
            let (sn, _, dn) = sncndn(big_k - z, modulus);
            let one_minus = modulus.parameter() * sn * sn / (1.0 + dn);
            let t = 1.0 / dn;
            (t, one_minus / dn, alpha - t)
        };
        // η = s − 1 vanishes at the inner endpoints, δ = 1 + η at the outer ones
        let eta = -ratio * e / (t + 1.0);
        let delta = 2.0 * f / ((t + 1.0) * am1);
        p.push(best_of(
            (b * (a - c), -c * (b - a) * eta, a - c, -(b - a) * eta),
            (a * (b - c), -c * (b - a) * delta, b - c, -(b - a) * delta),
        ));
        q.push(best_of(
            (c * (d - b), -b * (c - d) * eta, d - b, -(c - d) * eta),
            (d * (c - b), -b * (c - d) * delta, c - b, -(c - d) * delta),
        ));
    }
    ShiftSchedule::new(p, q)
}

// Two algebraically equal forms (x₀ + x₁)/(y₀ + y₁); keep the one with less cancellation.
fn best_of(u: (f64, f64, f64, f64), v: (f64, f64, f64, f64)) -> f64 {
    let cond = |(x0, x1, y0, y1): (f64, f64, f64, f64)| {
        (x0.abs() + x1.abs()) / (x0 + x1).abs() + (y0.abs() + y1.abs()) / (y0 + y1).abs()
    };
    let w = if cond(u) <= cond(v) { u } else { v };
    (w.0 + w.1) / (w.2 + w.3)
}

/// Shifts for `[−hi, −lo] ∪ [lo, hi]` straight from the symmetric formula
/// `p_j = −hi·dn(z_j, √(1−lo²/hi²))`, `q_j = −p_j`.
pub fn symmetric_shifts(lo: f64, hi: f64, j: usize) -> Result<ShiftSchedule> {
    if !(lo > 0.0 && lo <= hi) {
        return Err(Error::domain(
            "symmetric_shifts",
            format!("need 0 < lo <= hi, got {lo}, {hi}"),
        ));
    }
    if lo == hi {
        return ShiftSchedule::new(vec![-hi; j], vec![hi; j]);
    }
    let modulus = Modulus::from_complement(lo / hi)?;
    let big_k = ellipk(modulus);
    let p: Vec<f64> = (0..j)
        .map(|i| {
            let z = (2 * i + 1) as f64 / (2 * j) as f64 * big_k;
            -hi * crate::special_functions::jacobi_dn(z, modulus)
        })
        .collect();
    let q = p.iter().map(|v| -v).collect();
    ShiftSchedule::new(p, q)
}

/// Relaxed Zolotarev bound for a schedule of length `j` on `iv`.
pub fn schedule_bound(iv: &SpectralIntervals, j: usize) -> Result<f64> {
    Ok(zolotarev_bound(j, cross_ratio_gamma(iv))?.relaxed)
}
