//! Polynomial nonexistence/existence conditions in the `(p, q)`-plane and
//! the point classifier assembling them.

use crate::error::{Error, Result};

/// Tolerance inside which a point is considered to sit on a boundary
/// curve; labels follow each statement's closed/open convention.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Band around `q = 1` excluded from the existence threshold (it blows up
/// like `(1 - q)⁻¹`).
pub const Q_ONE_GUARD: f64 = 1e-6;

/// A point of the problem family: dimension and the two exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemPoint {
    pub n: u32,
    pub p: f64,
    pub q: f64,
}

impl ProblemPoint {
    pub fn new(n: u32, p: f64, q: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension n = {n} must be >= 3")));
        }
        if !(p >= 0.0) {
            return Err(Error::Domain(format!("exponent p = {p} must be >= 0")));
        }
        if !(0.0..2.0).contains(&q) {
            return Err(Error::Domain(format!("exponent q = {q} must lie in [0, 2)")));
        }
        Ok(ProblemPoint { n, p, q })
    }

    /// Whether the point lies above the subthreshold line `p + q = 1`.
    pub fn is_supercritical(&self) -> bool {
        self.p + self.q > 1.0
    }
}

/// Classification of a grid point. Priority is the plotting rank when
/// regions overlap: lower values win.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    /// `p + q <= 1`; outside the scope of every theorem here.
    Subthreshold,
    /// Nonconstant radial solutions exist (`q < 1` and the threshold
    /// inequality holds).
    ExistsRadial,
    /// Constancy for `q <= 1/(n-1)` and `p < p_*`.
    ConstantThm1,
    /// Constancy from `ℍ(p, q) < 0` in the admissible band.
    ConstantThm2,
    /// Constancy from `𝔾(p, q) < 0`.
    ConstantG,
    /// No statement applies.
    Open,
}

impl RegionLabel {
    /// Fixed priority order: existence and the sharper theorems win over
    /// the `𝔾` criterion when several apply.
    pub fn priority(self) -> u8 {
        match self {
            RegionLabel::Subthreshold => 0,
            RegionLabel::ExistsRadial => 1,
            RegionLabel::ConstantThm1 => 2,
            RegionLabel::ConstantThm2 => 3,
            RegionLabel::ConstantG => 4,
            RegionLabel::Open => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::Subthreshold => "subthreshold",
            RegionLabel::ExistsRadial => "exists_radial",
            RegionLabel::ConstantThm1 => "constant_thm1",
            RegionLabel::ConstantThm2 => "constant_thm2",
            RegionLabel::ConstantG => "constant_G",
            RegionLabel::Open => "open",
        }
    }
}

/// `b(q) = n(n-1)q² - (n²+n-1)q - n - 2`, the linear-in-p coefficient
/// of `𝔾`.
pub fn eval_b(n: u32, q: f64) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * q * q - (nf * nf + nf - 1.0) * q - nf - 2.0
}

/// `𝔾(p, q) = [(n-1)²q + n - 2]p² + b(q)p - nq²`.
pub fn eval_g(point: ProblemPoint) -> f64 {
    let nf = point.n as f64;
    let (p, q) = (point.p, point.q);
    ((nf - 1.0) * (nf - 1.0) * q + nf - 2.0) * p * p + eval_b(point.n, q) * p - nf * q * q
}

/// `ℍ(p, q) = p² + [(n-1)q/(n-2) - (n²-3)/(n-2)²]p + (1-(n-1)q)/(n-2)²`.
pub fn eval_h(point: ProblemPoint) -> f64 {
    let nf = point.n as f64;
    let (p, q) = (point.p, point.q);
    let m = nf - 2.0;
    p * p + ((nf - 1.0) / m * q - (nf * nf - 3.0) / (m * m)) * p + (1.0 - (nf - 1.0) * q) / (m * m)
}

/// Existence threshold `p_* = [(n-1)q² - 2nq + n + 2] / [(n-2)(1-q)]`.
pub fn p_star(n: u32, q: f64) -> Result<f64> {
    if q >= 1.0 - Q_ONE_GUARD {
        return Err(Error::Domain(format!(
            "p_star is singular at q = 1; got q = {q}"
        )));
    }
    if q < 0.0 {
        return Err(Error::Domain(format!("q = {q} must be >= 0")));
    }
    let nf = n as f64;
    Ok(((nf - 1.0) * q * q - 2.0 * nf * q + nf + 2.0) / ((nf - 2.0) * (1.0 - q)))
}

/// Sign-aware stable quadratic formula; returns `(smaller, larger)` real
/// roots of `a x² + b x + c`.
pub fn quadratic_roots(a: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    if a == 0.0 {
        if b == 0.0 {
            return Err(Error::Infeasible("degenerate quadratic".into()));
        }
        let r = -c / b;
        return Ok((r, r));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(Error::Infeasible(format!(
            "complex roots, discriminant = {disc:e}"
        )));
    }
    let sq = disc.sqrt();
    let t = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if t == 0.0 { (0.0, 0.0) } else { (t / a, c / t) };
    Ok((r1.min(r2), r1.max(r2)))
}

/// Larger root `p₂` of `ℍ(·, q)`.
pub fn root_p2(n: u32, q: f64) -> Result<f64> {
    let nf = n as f64;
    let m = nf - 2.0;
    let b = (nf - 1.0) / m * q - (nf * nf - 3.0) / (m * m);
    let c = (1.0 - (nf - 1.0) * q) / (m * m);
    let (_, hi) = quadratic_roots(1.0, b, c)?;
    Ok(hi)
}

/// Larger root `p_M` of `𝔾(·, q)`.
pub fn root_pm(n: u32, q: f64) -> Result<f64> {
    let nf = n as f64;
    let a = (nf - 1.0) * (nf - 1.0) * q + nf - 2.0;
    let (_, hi) = quadratic_roots(a, eval_b(n, q), -nf * q * q)?;
    Ok(hi)
}

/// Whether `q` lies in the `ℍ`-theorem band: `1/(n-1) < q < 1` for
/// `n = 3` and `1/(n-1) < q < 2` for `n >= 4`.
pub fn in_thm2_band(n: u32, q: f64) -> bool {
    let upper = if n == 3 { 1.0 } else { 2.0 };
    q > 1.0 / (n as f64 - 1.0) && q < upper
}

/// Classify a point of the `(p, q)`-plane.
///
/// Checks in priority order: subthreshold, radial existence, the
/// `q <= 1/(n-1)` constancy theorem, the `ℍ < 0` theorem, the `𝔾 < 0`
/// theorem, then `Open`.
pub fn classify(point: ProblemPoint) -> RegionLabel {
    let nf = point.n as f64;
    let (p, q) = (point.p, point.q);
    if p + q <= 1.0 {
        return RegionLabel::Subthreshold;
    }
    if q < 1.0 && p * (nf - 2.0) + q * (nf - 1.0) >= nf + (2.0 - q) / (1.0 - q) {
        return RegionLabel::ExistsRadial;
    }
    if q <= 1.0 / (nf - 1.0) {
        if let Ok(ps) = p_star(point.n, q) {
            if p < ps {
                return RegionLabel::ConstantThm1;
            }
        }
    }
    if in_thm2_band(point.n, q) && eval_h(point) < 0.0 {
        return RegionLabel::ConstantThm2;
    }
    if eval_g(point) < 0.0 {
        return RegionLabel::ConstantG;
    }
    RegionLabel::Open
}

/// Identifier for one of the five boundary curves of the figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveId {
    /// `p + q = 1`.
    F1,
    /// Radial existence threshold `p = p_*(q)`.
    F2,
    /// `𝔾(p, q) = 0` (larger root branch).
    F3,
    /// `ℍ(p, q) = 0, q > 1/(n-1)` (larger root branch).
    F4,
    /// The vertical line `q = 1`.
    F5,
}

impl CurveId {
    pub fn parse(s: &str) -> Result<CurveId> {
        match s {
            "f1" => Ok(CurveId::F1),
            "f2" => Ok(CurveId::F2),
            "f3" => Ok(CurveId::F3),
            "f4" => Ok(CurveId::F4),
            "f5" => Ok(CurveId::F5),
            _ => Err(Error::Domain(format!("unknown curve id {s:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CurveId::F1 => "f1",
            CurveId::F2 => "f2",
            CurveId::F3 => "f3",
            CurveId::F4 => "f4",
            CurveId::F5 => "f5",
        }
    }
}

fn linspace(lo: f64, hi: f64, k: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (k - 1) as f64;
    (0..k).map(move |i| if i == k - 1 { hi } else { lo + i as f64 * step })
}

/// Sample a named boundary curve over its natural `q`-domain; returns
/// `(q, p)` pairs clipped to `p >= 0`.
pub fn curve_samples(n: u32, curve: CurveId, resolution: usize) -> Result<Vec<(f64, f64)>> {
    if resolution < 2 {
        return Err(Error::Domain(format!(
            "resolution = {resolution} must be >= 2"
        )));
    }
    let nf = n as f64;
    let mut out = Vec::with_capacity(resolution);
    match curve {
        CurveId::F1 => {
            for q in linspace(0.0, 2.0, resolution) {
                let p = 1.0 - q;
                if p >= 0.0 {
                    out.push((q, p));
                }
            }
        }
        CurveId::F2 => {
            // stop strictly below p_star's own q = 1 guard
            for q in linspace(0.0, 1.0 - 2.0 * Q_ONE_GUARD, resolution) {
                let p = p_star(n, q)?;
                if p >= 0.0 {
                    out.push((q, p));
                }
            }
        }
        CurveId::F3 => {
            for q in linspace(0.0, 2.0 - BOUNDARY_TOL, resolution) {
                let p = root_pm(n, q)?;
                if p >= 0.0 {
                    out.push((q, p));
                }
            }
        }
        CurveId::F4 => {
            let lo = 1.0 / (nf - 1.0) + BOUNDARY_TOL;
            for q in linspace(lo, 2.0 - BOUNDARY_TOL, resolution) {
                let p = root_p2(n, q)?;
                if p >= 0.0 {
                    out.push((q, p));
                }
            }
        }
        CurveId::F5 => {
            for p in linspace(0.0, 5.0, resolution) {
                out.push((1.0, p));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(n: u32, p: f64, q: f64) -> ProblemPoint {
        ProblemPoint::new(n, p, q).unwrap()
    }

    #[test]
    fn eval_b_examples() {
        assert_eq!(eval_b(3, 0.0), -5.0);
        assert_eq!(eval_b(6, 1.0), -19.0);
        assert_eq!(eval_b(3, 2.0), -3.0);
    }

    #[test]
    fn eval_g_examples() {
        // at q = 0, 𝔾 = (n-2)p² - (n+2)p with root (n+2)/(n-2) = 5 for n = 3
        assert!(eval_g(pt(3, 5.0, 0.0)).abs() < 1e-12);
        assert_eq!(eval_g(pt(3, 0.0, 0.0)), 0.0);
        assert_eq!(eval_g(pt(6, 1.0, 1.0)), 4.0);
    }

    #[test]
    fn eval_h_examples() {
        // ℍ(1/(n-2), q) = -(n-1)²/(n-2)³ independently of q
        for q in [0.0, 0.3, 1.2, 1.9] {
            assert!((eval_h(pt(3, 1.0, q)) - (-4.0)).abs() < 1e-12);
            assert!((eval_h(pt(5, 1.0 / 3.0, q)) - (-16.0 / 27.0)).abs() < 1e-12);
        }
        assert!((eval_h(pt(4, 11.0 / 4.0, 1.0 / 3.0))).abs() < 1e-12);
        assert!((eval_h(pt(4, 0.0, 0.0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn p_star_examples() {
        assert!((p_star(3, 0.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((p_star(6, 0.0).unwrap() - 2.0).abs() < 1e-12);
        // (4·0.25 - 5 + 7)/(3·0.5) = 2
        assert!((p_star(5, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!(p_star(5, 1.0).is_err());
        assert!(p_star(5, 1.0 - 1e-8).is_err());
    }

    #[test]
    fn root_p2_examples() {
        // p₂(1/(n-1)) = (n²-n-1)/(n-2)² for n = 4 is 11/4
        assert!((root_p2(4, 1.0 / 3.0).unwrap() - 2.75).abs() < 1e-12);
        // n = 3, q = 1: p² - 4p - 1 = 0, larger root 2 + √5
        assert!((root_p2(3, 1.0).unwrap() - (2.0 + 5.0f64.sqrt())).abs() < 1e-12);
        // continuity regression at the q -> 2 end for n = 6
        let r = root_p2(6, 2.0 - 1e-9).unwrap();
        let (_, expect) = quadratic_roots(1.0, 2.0 * 5.0 / 4.0 - 33.0 / 16.0, -9.0 / 16.0).unwrap();
        assert!((r - expect).abs() < 1e-6);
    }

    #[test]
    fn root_pm_examples() {
        assert!((root_pm(3, 0.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((root_pm(6, 0.0).unwrap() - 2.0).abs() < 1e-12);
        // n = 3, q = 1: [(n-1)²q + n - 2] = 5, b(1) = 6 - 11 - 5 = -10
        let (_, expect) = quadratic_roots(5.0, -10.0, -3.0).unwrap();
        assert!((root_pm(3, 1.0).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(pt(6, 1.5, 0.1)), RegionLabel::ConstantThm1);
        assert_eq!(classify(pt(6, 0.4, 0.4)), RegionLabel::Subthreshold);
        assert_eq!(classify(pt(6, 3.0, 0.0)), RegionLabel::ExistsRadial);
    }

    #[test]
    fn classify_stability_near_interior_points() {
        for &(n, p, q) in &[(6u32, 1.5, 0.1), (6, 0.4, 0.4), (6, 3.0, 0.0), (4, 2.0, 0.5)] {
            let base = classify(pt(n, p, q));
            for dp in [-1e-13, 1e-13] {
                assert_eq!(classify(pt(n, p + dp, q)), base);
            }
        }
    }

    #[test]
    fn curve_f1_clips_negative_p() {
        let pts = curve_samples(6, CurveId::F1, 3).unwrap();
        assert_eq!(pts, vec![(0.0, 1.0), (1.0, 0.0)]);
    }

    #[test]
    fn curve_residuals() {
        for (q, p) in curve_samples(6, CurveId::F3, 64).unwrap() {
            assert!(eval_g(pt(6, p, q)).abs() < 1e-9);
        }
        for (q, p) in curve_samples(6, CurveId::F4, 64).unwrap() {
            assert!(eval_h(pt(6, p, q)).abs() < 1e-9);
            assert!(q > 0.2);
        }
        for (q, _) in curve_samples(6, CurveId::F5, 16).unwrap() {
            assert_eq!(q, 1.0);
        }
    }

    #[test]
    fn h_at_structural_p_closed_form() {
        for n in 3..=10u32 {
            let nf = n as f64;
            let expect = -(nf - 1.0) * (nf - 1.0) / (nf - 2.0).powi(3);
            for q in [0.1, 0.7, 1.4] {
                assert!((eval_h(pt(n, 1.0 / (nf - 2.0), q)) - expect).abs() < 1e-12);
            }
        }
    }
}
