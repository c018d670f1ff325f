//! The explicit radial solution family on the existence boundary
//! `p(n-2) + q(n-1) = n + (2-q)/(1-q)`, the numeric derivation of its
//! constant `K(n, q)`, and the structural proportionality
//! `v₁₁ - SΔv ∝ v⁻¹|∇v|²` that motivates the trace weights.

use crate::error::{Error, Result};

/// Largest admissible `q`; beyond this the exponent `β = (2-q)/(1-q)`
/// overflows the useful floating-point range.
pub const Q_MAX: f64 = 0.95;

/// One member of the radial family
/// `v_c(r) = c[Kc^{(2-q)²/((n-2)(1-q))} + r^β]^{-(n-2)(1-q)/(2-q)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    pub n: u32,
    pub q: f64,
    /// Equality-case exponent `p`.
    pub p: f64,
    /// Family parameter `c > 0`.
    pub c: f64,
    pub k: f64,
    /// `β = (2-q)/(1-q)`.
    pub beta: f64,
}

/// The exponent `p` on the existence boundary.
pub fn equality_p(n: u32, q: f64) -> Result<f64> {
    let nf = n as f64;
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0, 1)")));
    }
    Ok((nf + (2.0 - q) / (1.0 - q) - q * (nf - 1.0)) / (nf - 2.0))
}

impl RadialProfile {
    pub fn new(n: u32, q: f64, c: f64) -> Result<RadialProfile> {
        if n < 3 {
            return Err(Error::Domain(format!("n = {n} < 3")));
        }
        if !(0.0..=Q_MAX).contains(&q) {
            return Err(Error::Domain(format!("q = {q} outside [0, {Q_MAX}]")));
        }
        if c <= 0.0 {
            return Err(Error::Domain(format!("c = {c} must be positive")));
        }
        let p = equality_p(n, q)?;
        let k = derive_k(n, q)?;
        Ok(RadialProfile {
            n,
            q,
            p,
            c,
            k,
            beta: (2.0 - q) / (1.0 - q),
        })
    }

    /// `Kc^{(2-q)²/((n-2)(1-q))}`, the shifted constant of this member.
    fn cap(&self) -> f64 {
        let m = (2.0 - self.q).powi(2) / ((self.n as f64 - 2.0) * (1.0 - self.q));
        self.k * self.c.powf(m)
    }
}

/// Closed-form value and first two radial derivatives.
pub fn eval_profile(profile: &RadialProfile, r: f64) -> (f64, f64, f64) {
    let (nf, beta, c) = (profile.n as f64, profile.beta, profile.c);
    let a = profile.cap();
    let e = (nf - 2.0) / beta;
    let rb = r.powf(beta);
    let base = a + rb;
    let v = c * base.powf(-e);
    if r == 0.0 {
        // v_r ∝ r^{β-1} → 0 and v_rr has the same prefactor with
        // r^{β-2}; for β = 2 the second derivative is finite
        let vrr = if (beta - 2.0).abs() < 1e-12 {
            -c * (nf - 2.0) * base.powf(-e - 1.0)
        } else {
            0.0
        };
        return (v, 0.0, vrr);
    }
    let vr = -c * (nf - 2.0) * r.powf(beta - 1.0) * base.powf(-e - 1.0);
    let vrr = -c * (nf - 2.0)
        * base.powf(-e - 2.0)
        * r.powf(beta - 2.0)
        * ((beta - 1.0) * base - (nf - 2.0 + beta) * rb);
    (v, vr, vrr)
}

/// Radial Laplacian `v″ + (n-1)v′/r` in the cancellation-free grouped
/// form `-(n-2)(β+n-2)·A·r^{β-2}(A+r^β)^{-(n-2)/β-2}`; the naive sum
/// loses most of its digits once `r^β` dwarfs the cap constant.
pub fn eval_laplacian(profile: &RadialProfile, r: f64) -> f64 {
    let (nf, beta, c) = (profile.n as f64, profile.beta, profile.c);
    let a = profile.cap();
    let e = (nf - 2.0) / beta;
    let pre = -c * (nf - 2.0) * (beta + nf - 2.0) * a;
    if r == 0.0 {
        return if (beta - 2.0).abs() < 1e-12 {
            pre * a.powf(-e - 2.0)
        } else {
            0.0
        };
    }
    pre * r.powf(beta - 2.0) * (a + r.powf(beta)).powf(-e - 2.0)
}

/// `Δv + v^p|v′|^q` from the closed-form derivatives.
pub fn ode_residual(profile: &RadialProfile, r: f64) -> f64 {
    let (v, vr, _) = eval_profile(profile, r);
    eval_laplacian(profile, r) + v.powf(profile.p) * vr.abs().powf(profile.q)
}

/// Solve the one-point residual equation at `r = 1` (for `c = 1`) by
/// bisection, checking empirically that the positive root is unique.
pub fn derive_k(n: u32, q: f64) -> Result<f64> {
    let nf = n as f64;
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0, 1)")));
    }
    let beta = (2.0 - q) / (1.0 - q);
    let p = equality_p(n, q)?;
    let res = |k: f64| -> f64 {
        let base = k + 1.0f64;
        let e = (nf - 2.0) / beta;
        let v = base.powf(-e);
        let vr = -(nf - 2.0) * base.powf(-e - 1.0);
        let vrr = -(nf - 2.0) * base.powf(-e - 2.0) * ((beta - 1.0) * base - (nf - 2.0 + beta));
        vrr + (nf - 1.0) * vr + v.powf(p) * vr.abs().powf(q)
    };
    // uniqueness probe over a wide log-spaced grid
    let mut sign_changes = 0;
    let mut last = res(1e-8);
    let mut grid = Vec::new();
    for i in 0..=200 {
        grid.push(10f64.powf(-8.0 + 10.0 * i as f64 / 200.0));
    }
    let mut bracket = None;
    for &k in &grid[1..] {
        let cur = res(k);
        if last.signum() != cur.signum() {
            sign_changes += 1;
            if bracket.is_none() {
                bracket = Some((k / 10f64.powf(10.0 / 200.0), k));
            }
        }
        last = cur;
    }
    if sign_changes != 1 {
        return Err(Error::Infeasible(format!(
            "expected a unique positive root of the K equation, found {sign_changes} sign changes"
        )));
    }
    let (mut lo, mut hi) = bracket.unwrap();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if res(mid).signum() == res(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fit `(S, c)` in `v₁₁ - SΔv + c·v⁻¹|∇v|² = 0` from two nearby radii
/// and return `(S_fit, Q_fit, c_fit)` with `Q = (1-S)/(n-1)`.
pub fn structural_proportionality(profile: &RadialProfile, r: f64) -> Result<(f64, f64, f64)> {
    let row = |r: f64| -> (f64, f64, f64) {
        let (v, vr, vrr) = eval_profile(profile, r);
        (vrr, eval_laplacian(profile, r), vr * vr / v)
    };
    let (a1, b1, c1) = row(r);
    let (a2, b2, c2) = row(1.1 * r);
    // solve  a_i = S·b_i - c·c_i  for (S, c)
    let det = b1 * (-c2) - b2 * (-c1);
    if det.abs() < 1e-300 {
        return Err(Error::Infeasible("degenerate proportionality system".into()));
    }
    let s = (a1 * (-c2) - a2 * (-c1)) / det;
    let c = (b1 * a2 - b2 * a1) / det;
    Ok((s, (1.0 - s) / (profile.n as f64 - 1.0), c))
}

/// Sampled `(r, v, v′, v″)` table as delimited text for jet fixtures.
pub fn sample_table(profile: &RadialProfile, radii: &[f64]) -> String {
    let mut out = String::from("r\tv\tv_r\tv_rr\n");
    for &r in radii {
        let (v, vr, vrr) = eval_profile(profile, r);
        out.push_str(&format!("{r:.17e}\t{v:.17e}\t{vr:.17e}\t{vrr:.17e}\n"));
    }
    out
}

/// Independent verification by direct integration of the radial ODE.
pub mod shooting {
    use super::{eval_profile, RadialProfile};

    /// Runge-Kutta-Fehlberg 4(5) with adaptive step.
    fn rkf45<F: Fn(f64, [f64; 2]) -> [f64; 2]>(
        f: &F,
        mut t: f64,
        mut y: [f64; 2],
        t_end: f64,
        tol: f64,
    ) -> [f64; 2] {
        const A: [[f64; 5]; 5] = [
            [1.0 / 4.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
            [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
            [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
            [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
        ];
        const B5: [f64; 6] = [
            16.0 / 135.0,
            0.0,
            6656.0 / 12825.0,
            28561.0 / 56430.0,
            -9.0 / 50.0,
            2.0 / 55.0,
        ];
        const B4: [f64; 6] = [
            25.0 / 216.0,
            0.0,
            1408.0 / 2565.0,
            2197.0 / 4104.0,
            -1.0 / 5.0,
            0.0,
        ];
        let mut h = (t_end - t) / 100.0;
        while t < t_end {
            h = h.min(t_end - t);
            let mut k = [[0.0f64; 2]; 6];
            k[0] = f(t, y);
            for s in 1..6 {
                let mut ys = y;
                for j in 0..s {
                    ys[0] += h * A[s - 1][j] * k[j][0];
                    ys[1] += h * A[s - 1][j] * k[j][1];
                }
                let c = [0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5][s - 1];
                k[s] = f(t + c * h, ys);
            }
            let mut y5 = y;
            let mut y4 = y;
            for s in 0..6 {
                y5[0] += h * B5[s] * k[s][0];
                y5[1] += h * B5[s] * k[s][1];
                y4[0] += h * B4[s] * k[s][0];
                y4[1] += h * B4[s] * k[s][1];
            }
            let err = ((y5[0] - y4[0]).abs() + (y5[1] - y4[1]).abs())
                / (1.0 + y[0].abs() + y[1].abs());
            // error-per-unit-step control: local error ≤ tol·h keeps the
            // accumulated error near tol × span
            let budget = tol * h;
            if err <= budget || h < 1e-10 {
                t += h;
                y = y5;
            }
            let factor = if err > 0.0 {
                0.9 * (budget / err).powf(0.2)
            } else {
                2.0
            };
            h *= factor.clamp(0.2, 2.0);
        }
        y
    }

    /// Integrate `v″ = -(n-1)v′/r - v^p|v′|^q` from a small `r₀ > 0`
    /// (starting from 0 is ill-posed for `q > 0` because `|v′|^q` is
    /// non-Lipschitz there) with closed-form initial data, and return
    /// the largest relative deviation from the closed form at the
    /// requested radii.
    ///
    /// `r₀` is where `r^β` reaches a 10⁻⁴ fraction of the cap constant:
    /// any earlier and `v′` is so close to zero that the trajectory
    /// hugs the degenerate manifold of the non-Lipschitz term (for
    /// q = 0.9, `v′(10⁻³) ≈ 10⁻³⁰`).
    pub fn max_relative_deviation(profile: &RadialProfile, radii: &[f64]) -> f64 {
        let (nf, p, q) = (profile.n as f64, profile.p, profile.q);
        let f = move |r: f64, y: [f64; 2]| {
            [y[1], -(nf - 1.0) * y[1] / r - y[0].powf(p) * y[1].abs().powf(q)]
        };
        let r0 = (1e-4 * profile.cap()).powf(1.0 / profile.beta).max(1e-3);
        let (v0, vr0, _) = eval_profile(profile, r0);
        let mut worst: f64 = 0.0;
        let mut t = r0;
        let mut y = [v0, vr0];
        let mut sorted: Vec<f64> = radii.iter().copied().filter(|&r| r > r0).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for r in sorted {
            y = rkf45(&f, t, y, r, 1e-10);
            t = r;
            let (v, _, _) = eval_profile(profile, r);
            worst = worst.max((y[0] - v).abs() / v.abs());
        }
        worst
    }
}
