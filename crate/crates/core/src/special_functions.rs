//! Complete elliptic integrals, Jacobi `dn`, the Grötzsch ring function and
//! Zolotarev-number bounds.
//!
//! Every public function takes the modulus `k`, never the parameter `m = k²`.
//! Use [`Modulus::from_parameter`] when starting from `m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Elliptic modulus `k` together with its complement `k' = √(1−k²)`.
///
/// Both are stored so that `k'` stays accurate when `k` is within a few ulps of 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kp: f64,
}

impl Modulus {
    pub fn new(k: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&k) {
            return Err(Error::domain(
                "modulus",
                format!("k = {k} is outside [0, 1)"),
            ));
        }
        Ok(Self {
            k,
            kp: ((1.0 - k) * (1.0 + k)).sqrt(),
        })
    }

    /// Builds the modulus from its complement `k'`, exact even when `k'` is tiny.
    pub fn from_complement(kp: f64) -> Result<Self> {
        if !(kp > 0.0 && kp <= 1.0) {
            return Err(Error::domain(
                "modulus",
                format!("k' = {kp} is outside (0, 1]"),
            ));
        }
        Ok(Self {
            k: ((1.0 - kp) * (1.0 + kp)).sqrt(),
            kp,
        })
    }

    /// Builds the modulus from the parameter `m = k²`.
    pub fn from_parameter(m: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m) {
            return Err(Error::domain(
                "modulus",
                format!("m = {m} is outside [0, 1)"),
            ));
        }
        Ok(Self {
            k: m.sqrt(),
            kp: (1.0 - m).sqrt(),
        })
    }

    pub(crate) fn from_pair(k: f64, kp: f64) -> Self {
        Self { k, kp }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn complement(&self) -> f64 {
        self.kp
    }

    pub fn parameter(&self) -> f64 {
        self.k * self.k
    }
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn ellipk(k: Modulus) -> f64 {
    let kp = k.kp;
    // k² > 1 − 1e-12: the AGM still works but the log asymptote is cheaper and exact here.
    if kp * kp < 1e-12 {
        let l = (4.0 / kp).ln();
        return l + 0.25 * kp * kp * (l - 1.0);
    }
    let (mut a, mut b) = (1.0_f64, kp);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-15 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (a + b)
}

/// `(sn, cn, dn)` by the descending Landen/AGM scheme (Bulirsch).
///
/// `dn` is assembled from ratios of positive quantities, which keeps its relative
/// accuracy when it is as small as `k'`.
pub(crate) fn sncndn(u: f64, k: Modulus) -> (f64, f64, f64) {
    if k.k == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    const CA: f64 = 1e-9;
    let mut em = [0.0_f64; 32];
    let mut en = [0.0_f64; 32];
    let mut a = 1.0_f64;
    let mut b = k.kp;
    let mut c = 1.0;
    let mut l = 0;
    for i in 0..32 {
        l = i;
        em[i] = a;
        en[i] = b;
        c = 0.5 * (a + b);
        if (a - b).abs() <= CA * a {
            break;
        }
        b = (a * b).sqrt();
        a = c;
    }
    let v = c * u;
    let (mut sn, mut cn) = v.sin_cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut a = cn / sn;
        let mut c = c * a;
        for ii in (0..=l).rev() {
            let b = em[ii];
            a *= c;
            c *= dn;
            dn = (en[ii] + a) / (b + a);
            a = c / b;
        }
        let a = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { a } else { -a };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Jacobi elliptic function `dn(z, k)` for real `z`.
pub fn jacobi_dn(z: f64, k: Modulus) -> f64 {
    if k.k == 0.0 {
        return 1.0;
    }
    let big_k = ellipk(k);
    // dn is even with period 2K.
    let mut z = z.abs() % (2.0 * big_k);
    if z > big_k {
        z = 2.0 * big_k - z;
    }
    if z > 0.5 * big_k {
        // dn(z) dn(K − z) = k' keeps the tail relatively accurate.
        k.kp / sncndn(big_k - z, k).2
    } else {
        sncndn(z, k).2
    }
}

/// Grötzsch ring function `μ(λ) = (π/2) K(√(1−λ²)) / K(λ)`.
pub fn grotzsch_mu(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(
            "grotzsch_mu",
            format!("lambda = {lambda} is outside (0, 1)"),
        ));
    }
    let lp = ((1.0 - lambda) * (1.0 + lambda)).sqrt();
    Ok(mu_pair(lambda, lp))
}

fn mu_pair(lambda: f64, lp: f64) -> f64 {
    0.5 * PI * ellipk(Modulus::from_pair(lp, lambda)) / ellipk(Modulus::from_pair(lambda, lp))
}

/// Upper bounds on the Zolotarev number `Z_J` for intervals with cross-ratio `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZolotarevBound {
    pub sharp: f64,
    pub relaxed: f64,
}

pub fn zolotarev_bound(j: usize, gamma: f64) -> Result<ZolotarevBound> {
    if !(gamma >= 1.0) || !gamma.is_finite() {
        return Err(Error::domain(
            "zolotarev_bound",
            format!("gamma = {gamma} must be finite and >= 1"),
        ));
    }
    let jf = j as f64;
    if j == 0 {
        return Ok(ZolotarevBound {
            sharp: 4.0,
            relaxed: 4.0,
        });
    }
    let sharp = if gamma == 1.0 {
        0.0
    } else {
        let lambda = 1.0 / gamma.sqrt();
        let lp = ((gamma - 1.0) / gamma).sqrt();
        4.0 * (-2.0 * jf * PI * PI / (4.0 * mu_pair(lambda, lp))).exp()
    };
    let relaxed = 4.0 * (-2.0 * jf * PI * PI / (2.0 * (16.0 * gamma).ln())).exp();
    Ok(ZolotarevBound { sharp, relaxed })
}
