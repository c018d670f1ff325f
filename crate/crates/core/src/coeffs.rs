//! The coefficient system `a₁..a₄, b₁, b₂` of the differential identity as
//! functions of the free proof parameters, together with the structural
//! parameter choices and the regime-specific `γ`, `α` formulas.

use crate::error::{Error, Result};
use crate::regions::quadratic_roots;

/// Denominators smaller than this are treated as a genuine singular
/// surface of the method.
pub const DENOM_GUARD: f64 = 1e-12;

/// One choice of the free proof parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamChoice {
    /// Gradient-weight exponent `γ`.
    pub gamma: f64,
    /// Weight `S` in `G₁₁ = v₁₁ - S Δv`.
    pub s_weight: f64,
    /// Weight `Q` in `G_ij = v_ij - Q δ_ij Δv`.
    pub q_weight: f64,
    /// Solution-weight exponent `α`.
    pub alpha: f64,
    /// Augmentation multiplier `P <= 0`.
    pub p_shift: f64,
    /// Regime-A perturbation `ε₁ >= 0`.
    pub eps1: f64,
    /// Slack margin `ε >= 0` for strict inequalities.
    pub eps: f64,
}

impl ParamChoice {
    /// Whether the trace-free constraint `(n-1)Q + S = 1` holds.
    pub fn satisfies_trace_constraint(&self, n: u32) -> bool {
        ((n as f64 - 1.0) * self.q_weight + self.s_weight - 1.0).abs() <= 1e-12
    }
}

/// The six identity coefficients plus the shared denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
    /// `D = 1 - S² + γS - γS² - (n-1)Q²`.
    pub d: f64,
    /// `E = 1 + γS + qS`, the shared numerator.
    pub e: f64,
    /// `T = 1 + γS + 2S`.
    pub t: f64,
}

/// Structural choice `S = 1/(n - (n-1)q)`, `Q = (1-S)/(n-1)` making the
/// radial profile's `G₁₁` proportional to `v⁻¹|∇v|²`.
pub fn structural_sq(n: u32, q: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let den = nf - (nf - 1.0) * q;
    if den.abs() < DENOM_GUARD {
        return Err(Error::VanishingDenominator {
            name: "n - (n-1)q",
            value: den,
        });
    }
    let s = 1.0 / den;
    Ok((s, (1.0 - s) / (nf - 1.0)))
}

/// Evaluate the full coefficient set at `(n, p, q)` for one parameter
/// choice.
pub fn coefficient_set(n: u32, p: f64, q: f64, params: &ParamChoice) -> Result<CoefficientSet> {
    let nf = n as f64;
    let (g, s, qq, alpha) = (params.gamma, params.s_weight, params.q_weight, params.alpha);
    let d = 1.0 - s * s + g * s - g * s * s - (nf - 1.0) * qq * qq;
    let e = 1.0 + g * s + q * s;
    let t = 1.0 + g * s + 2.0 * s;
    if d.abs() < DENOM_GUARD {
        return Err(Error::VanishingDenominator { name: "D", value: d });
    }
    if t.abs() < DENOM_GUARD {
        return Err(Error::VanishingDenominator { name: "T", value: t });
    }
    let a1 = e / d;
    let a3 = -(alpha + p) * (alpha - 1.0) / t + a1 * alpha * (alpha - 1.0) * (1.0 - s) / t;
    let b1 = a1 * alpha * (g + 3.0) / t - (alpha + p) * (g + 2.0) / t;
    let b2 = g + q + a1 * (2.0 * g * s - g + 2.0 * s - 2.0 * qq);
    Ok(CoefficientSet {
        a1,
        a2: a1 * (1.0 + g),
        a3,
        a4: a1 * (2.0 + g),
        b1,
        b2,
        d,
        e,
        t,
    })
}

/// All real roots in `S` of the `b₂ = 0` equation with `Q = (1-S)/(n-1)`
/// eliminated, for fixed `(n, q, γ)`.
///
/// The expression is a quadratic in `S`; its coefficients are extracted
/// by evaluation at `S ∈ {0, 1, -1}`.
pub fn solve_b2_for_s(n: u32, q: f64, gamma: f64) -> Result<Vec<f64>> {
    let nf = n as f64;
    let f = |s: f64| {
        let qq = (1.0 - s) / (nf - 1.0);
        let d = 1.0 - s * s + gamma * s - gamma * s * s - (nf - 1.0) * qq * qq;
        let e = 1.0 + gamma * s + q * s;
        (gamma + q) * d + e * (2.0 * gamma * s - gamma + 2.0 * s - 2.0 * qq)
    };
    let c0 = f(0.0);
    let (fp, fm) = (f(1.0), f(-1.0));
    let c2 = 0.5 * (fp + fm) - c0;
    let c1 = 0.5 * (fp - fm);
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return Err(Error::Infeasible("b2 vanishes identically in S".into()));
    }
    if c2.abs() < 1e-14 * scale {
        if c1.abs() < 1e-14 * scale {
            return Err(Error::Infeasible("b2 is constant and nonzero in S".into()));
        }
        return Ok(vec![-c0 / c1]);
    }
    let (lo, hi) = quadratic_roots(c2, c1, c0)
        .map_err(|_| Error::Infeasible("no real S root of b2 = 0".into()))?;
    if (lo - hi).abs() < 1e-14 * (1.0 + lo.abs()) {
        Ok(vec![lo])
    } else {
        Ok(vec![lo, hi])
    }
}

/// Pick the `b₂ = 0` root continuous in `ε₁` from the structural value
/// `1/(n - (n-1)q)` (nearest-root matching).
pub fn tracked_b2_root(n: u32, q: f64, gamma: f64) -> Result<f64> {
    let (s_struct, _) = structural_sq(n, q)?;
    let roots = solve_b2_for_s(n, q, gamma)?;
    roots
        .into_iter()
        .min_by(|a, b| {
            (a - s_struct)
                .abs()
                .partial_cmp(&(b - s_struct).abs())
                .unwrap()
        })
        .ok_or_else(|| Error::Infeasible("no S root".into()))
}

/// Low-band choice `γ = (n-1)q² - (n+1)q + ε₁`.
pub fn gamma_lowq(n: u32, q: f64, eps1: f64) -> Result<f64> {
    let nf = n as f64;
    if !(0.0..=1.0 / (nf - 1.0) + 1e-12).contains(&q) {
        return Err(Error::Domain(format!(
            "q = {q} outside the low band (0, 1/(n-1)]"
        )));
    }
    if eps1 < 0.0 {
        return Err(Error::Domain(format!("eps1 = {eps1} must be >= 0")));
    }
    let g = (nf - 1.0) * q * q - (nf + 1.0) * q + eps1;
    debug_assert!(g >= -nf / (nf - 1.0) + eps1 - 1e-12);
    Ok(g)
}

/// High-band choice `γ = (n-2)q - 2`.
pub fn gamma_highq(n: u32, q: f64) -> Result<f64> {
    let nf = n as f64;
    if q <= 1.0 / (nf - 1.0) {
        return Err(Error::Domain(format!(
            "q = {q} outside the high band (1/(n-1), 2)"
        )));
    }
    let g = (nf - 2.0) * q - 2.0;
    debug_assert!(g > -nf / (nf - 1.0));
    Ok(g)
}

/// Exact solution of the linear fixed-point equation defining `α` in the
/// low-q regime: `α = C₁ + C₂·α` with
/// `C₁ = -(p-P)/(a₁T)·(2/(n-1)+γ)` and
/// `C₂ = (a₁(1-S)-1)/(a₁T)·(2/(n-1)+γ)`.
pub fn alpha1(
    n: u32,
    gamma: f64,
    s_weight: f64,
    p_minus_cap: f64,
    coeffs: &CoefficientSet,
) -> Result<f64> {
    let nf = n as f64;
    let factor = 2.0 / (nf - 1.0) + gamma;
    let c1 = -p_minus_cap / (coeffs.a1 * coeffs.t) * factor;
    let c2 = (coeffs.a1 * (1.0 - s_weight) - 1.0) / (coeffs.a1 * coeffs.t) * factor;
    if (1.0 - c2).abs() < DENOM_GUARD {
        return Err(Error::VanishingDenominator {
            name: "1 - C2",
            value: 1.0 - c2,
        });
    }
    Ok(c1 / (1.0 - c2))
}

/// High-q choice `α₂`; the bracketed denominator equals
/// `(q - (n-1)/(n-2))² + 4/(n-2)` and is always positive.
pub fn alpha2(n: u32, q: f64, p_minus_cap: f64) -> f64 {
    let m = n as f64 - 2.0;
    let r = (m + 1.0) / m; // (n-1)/(n-2)
    let den = q * q - 2.0 * q * r + 4.0 / m + r * r;
    let num = -(m + 1.0) * p_minus_cap * q - 2.0 * r * q
        + 2.0 * p_minus_cap
        + 2.0 / m
        + m * p_minus_cap * q * q;
    num / den
}

/// The certificate discriminant
/// `Δ = 4(n/(n-1)+γ)a₁(a₃ + P(α-1)/T) - (b₁ + P(γ+2)/T)²`.
pub fn discriminant(n: u32, coeffs: &CoefficientSet, params: &ParamChoice) -> f64 {
    let nf = n as f64;
    let quad = coeffs.a3 + params.p_shift * (params.alpha - 1.0) / coeffs.t;
    let lin = coeffs.b1 + params.p_shift * (params.gamma + 2.0) / coeffs.t;
    4.0 * (nf / (nf - 1.0) + params.gamma) * coeffs.a1 * quad - lin * lin
}
