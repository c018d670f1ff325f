//! The Hölder/Young exponent system `(A, B, p₁, q₁, σ₁)` and the
//! integrability window that lets the cutoff integral estimate close.

use crate::error::{Error, Result};

/// Margin scale for the strict window inequalities.
pub const WINDOW_MARGIN: f64 = 1e-10;

/// The exponent system of one certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YoungExponents {
    pub a: f64,
    pub b: f64,
    pub p1: f64,
    pub q1: f64,
    pub sigma1: f64,
}

/// The four coefficients of `B = (γ+4)(ap + b)/(cp + d)` together with
/// the value itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BRational {
    pub value: f64,
    /// `a = γ + 2`.
    pub a: f64,
    /// `b = (1 - q)α`.
    pub b: f64,
    /// `c = γ + 4`.
    pub c: f64,
    /// `d = (2 - q)α + γ + 2q`.
    pub d: f64,
}

impl BRational {
    /// `bc - ad`, which collapses to `-(γ+2q)(α+γ+2)`.
    pub fn determinant(&self) -> f64 {
        self.b * self.c - self.a * self.d
    }
}

/// `B = (γ+4)·[(γ+2)p + (1-q)α] / [(γ+4)p + (2-q)α + γ + 2q]`.
pub fn compute_b(q: f64, gamma: f64, alpha: f64, p: f64) -> Result<BRational> {
    let a = gamma + 2.0;
    let b = (1.0 - q) * alpha;
    let c = gamma + 4.0;
    let d = (2.0 - q) * alpha + gamma + 2.0 * q;
    let den = c * p + d;
    if den.abs() < 1e-12 {
        return Err(Error::VanishingDenominator { name: "cp + d", value: den });
    }
    Ok(BRational {
        value: c * (a * p + b) / den,
        a,
        b,
        c,
        d,
    })
}

/// Build the full exponent system; `σ₁` is defined through
/// `1/p₁ + 1/q₁ + 1/σ₁ = 1`.
pub fn young_exponents(q: f64, gamma: f64, alpha: f64, p: f64) -> Result<YoungExponents> {
    let br = compute_b(q, gamma, alpha, p)?;
    let b = br.value;
    if b.abs() < 1e-12 {
        return Err(Error::VanishingDenominator { name: "B", value: b });
    }
    let p1 = (gamma + 4.0) / b;
    // 1/q₁ via the closed window sum instead of (γ+2q)/(γ+2-B): the two
    // agree generically, but on the curve γ + 2q = 0 the quotient is
    // 0/0 (B collapses to the constant γ+2) while the closed form stays
    // finite
    let den = br.c * br.c * p + br.c * br.d;
    if den.abs() < 1e-12 {
        return Err(Error::VanishingDenominator {
            name: "c^2 p + cd",
            value: den,
        });
    }
    let g = 2.0 * (2.0 - q) * (alpha + gamma + 2.0) / den + (gamma + 2.0) / (gamma + 4.0);
    let q1 = 1.0 / (g - 1.0 / p1);
    // rest = 0 at the window boundary: σ₁ blows up and window_check
    // reports the failure, so no guard here
    let rest = 1.0 - g;
    Ok(YoungExponents {
        a: (alpha - 2.0) * b / (gamma + 4.0),
        b,
        p1,
        q1,
        sigma1: 1.0 / rest,
    })
}

/// Result of the window inequalities with their margins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowReport {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub positive_ok: bool,
    /// `1/p₁ + 1/q₁ - (1 - 2/n)`.
    pub lower_margin: f64,
    /// `1 - 1/p₁ - 1/q₁`.
    pub upper_margin: f64,
    /// `min(p₁, q₁, σ₁)`.
    pub positive_margin: f64,
}

impl WindowReport {
    pub fn all_ok(&self) -> bool {
        self.lower_ok && self.upper_ok && self.positive_ok
    }
}

/// Check `1 - 2/n < 1/p₁ + 1/q₁ < 1` and `p₁, q₁, σ₁ > 0`.
pub fn window_check(exps: &YoungExponents, n: u32) -> WindowReport {
    let sum = 1.0 / exps.p1 + 1.0 / exps.q1;
    let lower_margin = sum - (1.0 - 2.0 / n as f64);
    let upper_margin = 1.0 - sum;
    let positive_margin = exps.p1.min(exps.q1).min(exps.sigma1);
    let tol = WINDOW_MARGIN * (1.0 + sum.abs());
    WindowReport {
        lower_ok: lower_margin > tol,
        upper_ok: upper_margin > tol,
        positive_ok: positive_margin > WINDOW_MARGIN,
        lower_margin,
        upper_margin,
        positive_margin,
    }
}

/// Closed form of the window sum,
/// `G(p) = 2(2-q)(α+γ+2)/(c²p + cd) + (γ+2)/(γ+4)`.
pub fn g_of_p(q: f64, gamma: f64, alpha: f64, p: f64) -> Result<f64> {
    let br = compute_b(q, gamma, alpha, p)?;
    let den = br.c * br.c * p + br.c * br.d;
    if den.abs() < 1e-12 {
        return Err(Error::VanishingDenominator {
            name: "c^2 p + cd",
            value: den,
        });
    }
    Ok(2.0 * (2.0 - q) * (alpha + gamma + 2.0) / den + (gamma + 2.0) / (gamma + 4.0))
}
