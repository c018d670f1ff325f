//! Pointwise verification of the differential identities on third-order
//! jets in the gradient-adapted frame.
//!
//! Every divergence term is expanded by the product rule into jet
//! contractions; the expansions are pinned by a finite-difference oracle
//! on polynomial test functions.

use crate::coeffs::{CoefficientSet, ParamChoice};
use crate::error::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Value, gradient, Hessian and symmetric third derivative of a
/// function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    /// `v > 0` at the point.
    pub u: f64,
    pub g: Vec<f64>,
    pub hess: Vec<Vec<f64>>,
    pub third: Vec<Vec<Vec<f64>>>,
}

/// A jet rotated so the gradient points along the first axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedJet {
    pub jet: Jet3,
    pub rotation: Vec<Vec<f64>>,
}

impl Jet3 {
    /// Build a jet, symmetrizing the Hessian and third tensor.
    pub fn new(u: f64, g: Vec<f64>, hess: Vec<Vec<f64>>, third: Vec<Vec<Vec<f64>>>) -> Result<Jet3> {
        let n = g.len();
        if u <= 0.0 {
            return Err(Error::Domain(format!("jet value u = {u} must be positive")));
        }
        if hess.len() != n || third.len() != n {
            return Err(Error::Domain("inconsistent jet dimensions".into()));
        }
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                h[i][j] = 0.5 * (hess[i][j] + hess[j][i]);
            }
        }
        let mut t = vec![vec![vec![0.0; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[i][j][k] = (third[i][j][k]
                        + third[i][k][j]
                        + third[j][i][k]
                        + third[j][k][i]
                        + third[k][i][j]
                        + third[k][j][i])
                        / 6.0;
                }
            }
        }
        Ok(Jet3 {
            u,
            g,
            hess: h,
            third: t,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn grad_norm(&self) -> f64 {
        self.g.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn laplacian(&self) -> f64 {
        (0..self.dim()).map(|i| self.hess[i][i]).sum()
    }
}

/// Deterministic orthonormal completion of `g/|g|` into a rotation,
/// then conjugation of every jet slot.
pub fn rotate_to_frame(jet: &Jet3) -> Result<FramedJet> {
    let n = jet.dim();
    let norm = jet.grad_norm();
    if norm <= 0.0 {
        return Err(Error::Domain("zero gradient has no frame".into()));
    }
    // columns of R: first is g/|g|, the rest Gram-Schmidt over the
    // standard basis in index order
    let mut cols: Vec<Vec<f64>> = vec![jet.g.iter().map(|x| x / norm).collect()];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            for i in 0..n {
                v[i] -= dot * c[i];
            }
        }
        let l: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if l > 1e-8 {
            cols.push(v.iter().map(|x| x / l).collect());
        }
    }
    if cols.len() != n {
        return Err(Error::Infeasible("frame completion failed".into()));
    }
    // r[a][b] = component a of column b; new frame vector b
    let r: Vec<Vec<f64>> = (0..n)
        .map(|a| (0..n).map(|b| cols[b][a]).collect())
        .collect();
    let g_new: Vec<f64> = (0..n)
        .map(|b| (0..n).map(|a| r[a][b] * jet.g[a]).sum())
        .collect();
    let mut h_new = vec![vec![0.0; n]; n];
    for b1 in 0..n {
        for b2 in 0..n {
            let mut acc = 0.0;
            for a1 in 0..n {
                for a2 in 0..n {
                    acc += r[a1][b1] * r[a2][b2] * jet.hess[a1][a2];
                }
            }
            h_new[b1][b2] = acc;
        }
    }
    let mut t_new = vec![vec![vec![0.0; n]; n]; n];
    for b1 in 0..n {
        for b2 in 0..n {
            for b3 in 0..n {
                let mut acc = 0.0;
                for a1 in 0..n {
                    for a2 in 0..n {
                        for a3 in 0..n {
                            acc += r[a1][b1] * r[a2][b2] * r[a3][b3] * jet.third[a1][a2][a3];
                        }
                    }
                }
                t_new[b1][b2][b3] = acc;
            }
        }
    }
    Ok(FramedJet {
        jet: Jet3 {
            u: jet.u,
            g: g_new,
            hess: h_new,
            third: t_new,
        },
        rotation: r,
    })
}

/// `G₁₁ = v₁₁ - SΔv`, `G_ij = v_ij - Qδ_ijΔv` for `i + j > 2`.
pub fn g_tensor(fj: &FramedJet, s: f64, q: f64) -> Vec<Vec<f64>> {
    let jet = &fj.jet;
    let n = jet.dim();
    let lap = jet.laplacian();
    let mut g = jet.hess.clone();
    g[0][0] -= s * lap;
    for i in 1..n {
        g[i][i] -= q * lap;
    }
    g
}

/// Shared scalar data of one framed jet for the expansions below.
struct Scalars {
    u: f64,
    w: f64,
    w2: f64,
    lap: f64,
    /// `(H g)_i`.
    hg: Vec<f64>,
    /// `g · H g`.
    ghg: f64,
    /// `|H g|²`.
    hg2: f64,
    /// `|H|²` (Frobenius).
    h2: f64,
    /// `(∇Δv)_j = Σ_i v_iij`.
    grad_lap: Vec<f64>,
}

fn scalars(jet: &Jet3) -> Scalars {
    let n = jet.dim();
    let w2: f64 = jet.g.iter().map(|x| x * x).sum();
    let hg: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| jet.hess[i][j] * jet.g[j]).sum())
        .collect();
    let grad_lap: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| jet.third[i][i][j]).sum())
        .collect();
    Scalars {
        u: jet.u,
        w: w2.sqrt(),
        w2,
        lap: jet.laplacian(),
        ghg: jet.g.iter().zip(&hg).map(|(a, b)| a * b).sum(),
        hg2: hg.iter().map(|x| x * x).sum(),
        h2: jet
            .hess
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x * x)
            .sum(),
        hg,
        grad_lap,
    }
}

/// `(v^α |∇v|^γ Δv v_i)_i` expanded by the product rule.
pub fn div_lap_grad(jet: &Jet3, alpha: f64, gamma: f64) -> f64 {
    let s = scalars(jet);
    let glap: f64 = jet.g.iter().zip(&s.grad_lap).map(|(a, b)| a * b).sum();
    alpha * s.u.powf(alpha - 1.0) * s.w.powf(gamma) * s.lap * s.w2
        + gamma * s.u.powf(alpha) * s.w.powf(gamma - 2.0) * s.ghg * s.lap
        + s.u.powf(alpha) * s.w.powf(gamma) * (glap + s.lap * s.lap)
}

/// `(v^α |∇v|^γ v_ij v_j)_i` expanded by the product rule.
pub fn div_hess_grad(jet: &Jet3, alpha: f64, gamma: f64) -> f64 {
    let s = scalars(jet);
    let glap: f64 = jet.g.iter().zip(&s.grad_lap).map(|(a, b)| a * b).sum();
    alpha * s.u.powf(alpha - 1.0) * s.w.powf(gamma) * s.ghg
        + gamma * s.u.powf(alpha) * s.w.powf(gamma - 2.0) * s.hg2
        + s.u.powf(alpha) * s.w.powf(gamma) * (glap + s.h2)
}

/// `(v^{α-1} |∇v|^{γ+2} v_i)_i` expanded by the product rule.
pub fn div_weighted_grad(jet: &Jet3, alpha: f64, gamma: f64) -> f64 {
    let s = scalars(jet);
    (alpha - 1.0) * s.u.powf(alpha - 2.0) * s.w.powf(gamma + 2.0) * s.w2
        + (gamma + 2.0) * s.u.powf(alpha - 1.0) * s.w.powf(gamma) * s.ghg
        + s.u.powf(alpha - 1.0) * s.w.powf(gamma + 2.0) * s.lap
}

/// Largest absolute value among a list of terms, used as the
/// cancellation-aware normalization scale.
fn term_scale(terms: &[f64]) -> f64 {
    terms.iter().fold(1e-300, |m, t| m.max(t.abs()))
}

/// Residual of the first full identity: for any framed jet,
/// `(1 - S² + γS - γS²) v^α|∇v|^γ(Δv)²` equals the expanded combination
/// of the three divergence terms plus the `G`-quadratic terms.
/// Returns `(residual, scale)`.
pub fn identity_residual_equ111(fj: &FramedJet, alpha: f64, gamma: f64, s: f64) -> (f64, f64) {
    let jet = &fj.jet;
    let n = jet.dim();
    let sc = scalars(jet);
    let t = 1.0 + gamma * s + 2.0 * s;
    let (u, w, lap) = (sc.u, sc.w, sc.lap);
    let g11 = jet.hess[0][0] - s * lap;
    let lhs = (1.0 - s * s + gamma * s - gamma * s * s) * u.powf(alpha) * w.powf(gamma) * lap * lap;
    let d1 = div_lap_grad(jet, alpha, gamma);
    let d2 = div_hess_grad(jet, alpha, gamma);
    let d3 = div_weighted_grad(jet, alpha, gamma);
    let offdiag: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i + j > 0)
        .map(|(i, j)| jet.hess[i][j] * jet.hess[i][j])
        .sum();
    let g1i: f64 = (1..n).map(|i| jet.hess[0][i] * jet.hess[0][i]).sum();
    let terms = [
        d1,
        -d2,
        alpha * (s - 1.0) / t * d3,
        u.powf(alpha) * w.powf(gamma) * offdiag,
        alpha * (alpha - 1.0) * (1.0 - s) / t * u.powf(alpha - 2.0) * w.powf(gamma + 4.0),
        alpha * (gamma + 3.0) / t * u.powf(alpha - 1.0) * w.powf(gamma + 2.0) * g11,
        (2.0 * gamma * s - gamma + 2.0 * s) * u.powf(alpha) * w.powf(gamma) * g11 * lap,
        (1.0 + gamma) * u.powf(alpha) * w.powf(gamma) * g11 * g11,
        gamma * u.powf(alpha) * w.powf(gamma) * g1i,
    ];
    let rhs: f64 = terms.iter().sum();
    let mut all = terms.to_vec();
    all.push(lhs);
    (lhs - rhs, term_scale(&all))
}

/// Residual of the trace-split identity under `(n-1)Q + S = 1`, with
/// the off-`(1,1)` Hessian block replaced by the `G`-tensor.
pub fn identity_residual_8_239_37(
    fj: &FramedJet,
    alpha: f64,
    gamma: f64,
    s: f64,
    q_weight: f64,
) -> Result<(f64, f64)> {
    let jet = &fj.jet;
    let n = jet.dim();
    if ((n as f64 - 1.0) * q_weight + s - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("(n-1)Q + S = 1 violated".into()));
    }
    let sc = scalars(jet);
    let t = 1.0 + gamma * s + 2.0 * s;
    let (u, w, lap) = (sc.u, sc.w, sc.lap);
    let g = g_tensor(fj, s, q_weight);
    let g11 = g[0][0];
    let lhs = (1.0 - s * s + gamma * s - gamma * s * s - (n as f64 - 1.0) * q_weight * q_weight)
        * u.powf(alpha)
        * w.powf(gamma)
        * lap
        * lap;
    let d1 = div_lap_grad(jet, alpha, gamma);
    let d2 = div_hess_grad(jet, alpha, gamma);
    let d3 = div_weighted_grad(jet, alpha, gamma);
    let g_offdiag: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i + j > 0)
        .map(|(i, j)| g[i][j] * g[i][j])
        .sum();
    let g1i: f64 = (1..n).map(|i| g[0][i] * g[0][i]).sum();
    let terms = [
        d1,
        -d2,
        alpha * (s - 1.0) / t * d3,
        u.powf(alpha) * w.powf(gamma) * g_offdiag,
        alpha * (alpha - 1.0) * (1.0 - s) / t * u.powf(alpha - 2.0) * w.powf(gamma + 4.0),
        alpha * (gamma + 3.0) / t * u.powf(alpha - 1.0) * w.powf(gamma + 2.0) * g11,
        (2.0 * gamma * s - gamma + 2.0 * s - 2.0 * q_weight)
            * u.powf(alpha)
            * w.powf(gamma)
            * g11
            * lap,
        (1.0 + gamma) * u.powf(alpha) * w.powf(gamma) * g11 * g11,
        gamma * u.powf(alpha) * w.powf(gamma) * g1i,
    ];
    let rhs: f64 = terms.iter().sum();
    let mut all = terms.to_vec();
    all.push(lhs);
    Ok((lhs - rhs, term_scale(&all)))
}

/// Project a jet onto the constraint set of the equation
/// `-Δv = v^p|∇v|^q`: a pure-trace Hessian shift fixes `Δv`, then a
/// minimal fully-symmetric third-tensor correction fixes the contracted
/// third derivatives `Σ_i v_iij = -(v^p|∇v|^q)_j`.
pub fn pde_project(jet: &Jet3, p: f64, q: f64) -> Result<Jet3> {
    let n = jet.dim();
    let w = jet.grad_norm();
    if w <= 0.0 {
        return Err(Error::Domain("zero gradient".into()));
    }
    let mut out = jet.clone();
    let target = -jet.u.powf(p) * w.powf(q);
    let shift = (target - jet.laplacian()) / n as f64;
    for i in 0..n {
        out.hess[i][i] += shift;
    }
    let hg: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| out.hess[i][j] * out.g[j]).sum())
        .collect();
    let required: Vec<f64> = (0..n)
        .map(|j| {
            -p * jet.u.powf(p - 1.0) * w.powf(q) * out.g[j]
                - q * jet.u.powf(p) * w.powf(q - 2.0) * hg[j]
        })
        .collect();
    let current: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| out.third[i][i][j]).sum())
        .collect();
    let d: Vec<f64> = (0..n).map(|j| required[j] - current[j]).collect();
    // δ_abc = (d_a δ_bc + d_b δ_ac + d_c δ_ab)/(n + 2) satisfies
    // Σ_i δ_iij = d_j and is fully symmetric
    let den = n as f64 + 2.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut corr = 0.0;
                if b == c {
                    corr += d[a];
                }
                if a == c {
                    corr += d[b];
                }
                if a == b {
                    corr += d[c];
                }
                out.third[a][b][c] += corr / den;
            }
        }
    }
    Ok(out)
}

/// Residual of the final identity for PDE-projected framed jets:
/// `0 = W + a₁Σ_{i,j≥2}G_ij² + a₄Σ_{i>1}G_{1i}² + a₂G₁₁² + a₃v^{α-2}|∇v|^{γ+4}
///      + b₁v^{α-1}|∇v|^{γ+2}G₁₁ + b₂v^α|∇v|^γG₁₁Δv`,
/// with `W = (a₁-1)·D_lap - a₁·D_hess + [(α+p) + a₁α(S-1)]/T·D_weight`
/// reconstructed from the derivation chain.
pub fn identity_residual_sec2(
    fj: &FramedJet,
    p: f64,
    q: f64,
    params: &ParamChoice,
    coeffs: &CoefficientSet,
) -> Result<(f64, f64)> {
    let jet = &fj.jet;
    let n = jet.dim();
    let sc = scalars(jet);
    let (u, w, lap) = (sc.u, sc.w, sc.lap);
    // the chain substituted the equation; refuse jets that do not
    // satisfy it
    let pde_res = lap + u.powf(p) * w.powf(q);
    if pde_res.abs() > 1e-8 * (1.0 + lap.abs()) {
        return Err(Error::Domain(format!(
            "jet does not satisfy the equation: residual {pde_res:e}"
        )));
    }
    let grad_rhs: Vec<f64> = (0..n)
        .map(|j| {
            -p * u.powf(p - 1.0) * w.powf(q) * jet.g[j]
                - q * u.powf(p) * w.powf(q - 2.0) * sc.hg[j]
        })
        .collect();
    for j in 0..n {
        if (sc.grad_lap[j] - grad_rhs[j]).abs() > 1e-8 * (1.0 + grad_rhs[j].abs()) {
            return Err(Error::Domain(
                "jet does not satisfy the differentiated equation".into(),
            ));
        }
    }
    let (alpha, gamma, s, qw) = (params.alpha, params.gamma, params.s_weight, params.q_weight);
    let d1 = div_lap_grad(jet, alpha, gamma);
    let d2 = div_hess_grad(jet, alpha, gamma);
    let d3 = div_weighted_grad(jet, alpha, gamma);
    let (w1, w2n, w3) = divergence_weights(p, alpha, s, coeffs);
    let wdiv = w2n * d1 + w1 * d2 + w3 * d3;
    let g = g_tensor(fj, s, qw);
    let g11 = g[0][0];
    let g_lower: f64 = (1..n)
        .flat_map(|i| (1..n).map(move |j| (i, j)))
        .map(|(i, j)| g[i][j] * g[i][j])
        .sum();
    let g1i: f64 = (1..n).map(|i| g[0][i] * g[0][i]).sum();
    let terms = [
        wdiv,
        coeffs.a1 * u.powf(alpha) * w.powf(gamma) * g_lower,
        coeffs.a4 * u.powf(alpha) * w.powf(gamma) * g1i,
        coeffs.a2 * u.powf(alpha) * w.powf(gamma) * g11 * g11,
        coeffs.a3 * u.powf(alpha - 2.0) * w.powf(gamma + 4.0),
        coeffs.b1 * u.powf(alpha - 1.0) * w.powf(gamma + 2.0) * g11,
        coeffs.b2 * u.powf(alpha) * w.powf(gamma) * g11 * lap,
    ];
    Ok((terms.iter().sum(), term_scale(&terms)))
}

/// The three divergence-term weights `(B₁, B₂, B₃)` of the final
/// identity, recovered from the derivation chain: the coefficients of
/// the Hessian-contraction, Laplacian-contraction, and weighted-gradient
/// divergences respectively.
pub fn divergence_weights(p: f64, alpha: f64, s: f64, coeffs: &CoefficientSet) -> (f64, f64, f64) {
    (
        -coeffs.a1,
        coeffs.a1 - 1.0,
        ((alpha + p) + coeffs.a1 * alpha * (s - 1.0)) / coeffs.t,
    )
}

/// Seeded random jet away from the `|∇v| = 0` singular set.
pub fn random_jet(n: usize, rng: &mut ChaCha8Rng) -> Jet3 {
    let u = rng.gen_range(0.5..2.0);
    let g = loop {
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if g.iter().map(|x| x * x).sum::<f64>().sqrt() >= 1e-3 {
            break g;
        }
    };
    let hess: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let third: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect()
        })
        .collect();
    Jet3::new(u, g, hess, third).unwrap()
}

/// Jet of a radial profile at the point `(r, 0, …, 0)`: the gradient
/// frame coincides with the ambient frame, `v₁₁ = v″` and
/// `v_ii = v′/r` tangentially.
pub fn radial_jet(n: usize, r: f64, v: f64, vr: f64, vrr: f64, vrrr: f64) -> Result<Jet3> {
    let mut hess = vec![vec![0.0; n]; n];
    hess[0][0] = vrr;
    for i in 1..n {
        hess[i][i] = vr / r;
    }
    let mut third = vec![vec![vec![0.0; n]; n]; n];
    third[0][0][0] = vrrr;
    let tang = (vrr - vr / r) / r;
    for i in 1..n {
        // v_{ii1} = v_{i1i} = v_{1ii} = (v″ - v′/r)/r on the axis
        third[i][i][0] = tang;
        third[i][0][i] = tang;
        third[0][i][i] = tang;
    }
    Jet3::new(v, {
        let mut g = vec![0.0; n];
        g[0] = vr;
        g
    }, hess, third)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{alpha1, coefficient_set, gamma_lowq, structural_sq, tracked_b2_root};
    use crate::radial::{eval_profile, RadialProfile};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    // polynomial test function v(x) = c0 + l·x + x^T M x/2 + cubic, with
    // c0 large enough to stay positive near the base point
    #[derive(Clone)]
    struct PolyField {
        c0: f64,
        l: Vec<f64>,
        m: Vec<Vec<f64>>,
        t: Vec<Vec<Vec<f64>>>,
    }

    impl PolyField {
        fn random(n: usize, rng: &mut ChaCha8Rng) -> PolyField {
            let jet = random_jet(n, rng);
            PolyField {
                c0: jet.u + 3.0,
                l: jet.g,
                m: jet.hess,
                t: jet.third,
            }
        }

        fn value(&self, x: &[f64]) -> f64 {
            let n = x.len();
            let mut v = self.c0;
            for i in 0..n {
                v += self.l[i] * x[i];
                for j in 0..n {
                    v += 0.5 * self.m[i][j] * x[i] * x[j];
                    for k in 0..n {
                        v += self.t[i][j][k] * x[i] * x[j] * x[k] / 6.0;
                    }
                }
            }
            v
        }

        fn jet_at(&self, x: &[f64]) -> Jet3 {
            let n = x.len();
            let mut g = vec![0.0; n];
            let mut h = vec![vec![0.0; n]; n];
            for i in 0..n {
                g[i] = self.l[i];
                for j in 0..n {
                    g[i] += self.m[i][j] * x[j];
                    h[i][j] = self.m[i][j];
                    for k in 0..n {
                        g[i] += 0.5 * self.t[i][j][k] * x[j] * x[k];
                        h[i][j] += self.t[i][j][k] * x[k];
                    }
                }
            }
            Jet3::new(self.value(x), g, h, self.t.clone()).unwrap()
        }
    }

    fn fd_divergence<F: Fn(&[f64]) -> Vec<f64>>(field: F, x: &[f64], h: f64) -> f64 {
        let n = x.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            acc += (field(&xp)[i] - field(&xm)[i]) / (2.0 * h);
        }
        acc
    }

    #[test]
    fn divergence_expansions_match_finite_differences() {
        let mut r = rng(31);
        for n in [3usize, 4, 6] {
            for _ in 0..5 {
                let pf = PolyField::random(n, &mut r);
                let x: Vec<f64> = (0..n).map(|_| r.gen_range(-0.2..0.2)).collect();
                let jet = pf.jet_at(&x);
                if jet.grad_norm() < 0.3 {
                    continue;
                }
                let (alpha, gamma) = (r.gen_range(-1.0..1.5), r.gen_range(-1.2..1.0));
                let pf2 = pf.clone();
                let vecfield = |kind: u8| {
                    let pf = pf2.clone();
                    move |y: &[f64]| -> Vec<f64> {
                        let j = pf.jet_at(y);
                        let w = j.grad_norm();
                        match kind {
                            0 => {
                                let c = j.u.powf(alpha) * w.powf(gamma) * j.laplacian();
                                j.g.iter().map(|gi| c * gi).collect()
                            }
                            1 => {
                                let c = j.u.powf(alpha) * w.powf(gamma);
                                (0..y.len())
                                    .map(|i| {
                                        c * (0..y.len())
                                            .map(|k| j.hess[i][k] * j.g[k])
                                            .sum::<f64>()
                                    })
                                    .collect()
                            }
                            _ => {
                                let c = j.u.powf(alpha - 1.0) * w.powf(gamma + 2.0);
                                j.g.iter().map(|gi| c * gi).collect()
                            }
                        }
                    }
                };
                let pairs = [
                    (div_lap_grad(&jet, alpha, gamma), fd_divergence(vecfield(0), &x, 1e-5)),
                    (div_hess_grad(&jet, alpha, gamma), fd_divergence(vecfield(1), &x, 1e-5)),
                    (div_weighted_grad(&jet, alpha, gamma), fd_divergence(vecfield(2), &x, 1e-5)),
                ];
                for (exact, fd) in pairs {
                    assert!(
                        (exact - fd).abs() < 1e-6 * (1.0 + exact.abs()),
                        "n={n}: {exact} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn frame_rotation_invariants() {
        let mut r = rng(5);
        for n in [3usize, 4, 6, 8] {
            for _ in 0..20 {
                let jet = random_jet(n, &mut r);
                let fj = rotate_to_frame(&jet).unwrap();
                let w = jet.grad_norm();
                assert!((fj.jet.g[0] - w).abs() < 1e-12 * w);
                for i in 1..n {
                    assert!(fj.jet.g[i].abs() < 1e-12);
                }
                assert!((fj.jet.laplacian() - jet.laplacian()).abs() < 1e-11);
                let sq = |j: &Jet3| -> f64 {
                    j.hess
                        .iter()
                        .flat_map(|row| row.iter())
                        .map(|x| x * x)
                        .sum()
                };
                assert!((sq(&fj.jet) - sq(&jet)).abs() < 1e-10);
                let ghg = |j: &Jet3| -> f64 {
                    (0..n)
                        .map(|i| {
                            (0..n)
                                .map(|k| j.g[i] * j.hess[i][k] * j.g[k])
                                .sum::<f64>()
                        })
                        .sum()
                };
                assert!((ghg(&fj.jet) - ghg(&jet)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn already_framed_is_identity() {
        let mut r = rng(8);
        let mut jet = random_jet(4, &mut r);
        jet.g = vec![1.3, 0.0, 0.0, 0.0];
        let fj = rotate_to_frame(&jet).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = (i == j) as u8 as f64;
                assert!((fj.rotation[i][j] - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn g_tensor_trace_free_and_pure_trace_kill() {
        let mut r = rng(12);
        for _ in 0..1000 {
            let n = r.gen_range(3usize..=8);
            let jet = random_jet(n, &mut r);
            let fj = rotate_to_frame(&jet).unwrap();
            let nf = n as f64;
            let s = r.gen_range(-0.5..1.5);
            let q = (1.0 - s) / (nf - 1.0);
            let g = g_tensor(&fj, s, q);
            let trace: f64 = (0..n).map(|i| g[i][i]).sum();
            assert!(trace.abs() < 1e-10, "trace = {trace:e}");
        }
        // pure-trace Hessian with S = Q = 1/n gives G = 0
        let n = 5;
        let mut jet = random_jet(n, &mut rng(13));
        jet.hess = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let fj = rotate_to_frame(&jet).unwrap();
        let g = g_tensor(&fj, 0.2, 0.2);
        for row in g {
            for x in row {
                assert!(x.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equ111_residual_random_jets() {
        let mut r = rng(21);
        for n in [3usize, 4, 6, 8] {
            for _ in 0..250 {
                let jet = random_jet(n, &mut r);
                let fj = rotate_to_frame(&jet).unwrap();
                let alpha = r.gen_range(-1.0..1.5);
                let gamma = r.gen_range(-1.2..1.0);
                let s = r.gen_range(-0.5..1.2);
                let (res, scale) = identity_residual_equ111(&fj, alpha, gamma, s);
                assert!(res.abs() <= 1e-10 * scale, "n={n}: {res:e} vs {scale:e}");
            }
        }
    }

    #[test]
    fn equ111_reduced_cases() {
        // linear function: everything vanishes
        let jet = Jet3::new(
            1.0,
            vec![0.4, -0.2, 0.1],
            vec![vec![0.0; 3]; 3],
            vec![vec![vec![0.0; 3]; 3]; 3],
        )
        .unwrap();
        let fj = rotate_to_frame(&jet).unwrap();
        // the only surviving terms are the weighted-gradient divergence
        // and the A-term, which cancel up to roundoff
        let (res, scale) = identity_residual_equ111(&fj, 0.7, -0.3, 0.25);
        assert!(res.abs() <= 1e-15 * scale);
        // quadratic: third = 0
        let mut r = rng(23);
        for _ in 0..50 {
            let mut jet = random_jet(4, &mut r);
            jet.third = vec![vec![vec![0.0; 4]; 4]; 4];
            let fj = rotate_to_frame(&jet).unwrap();
            let (res, scale) = identity_residual_equ111(&fj, 0.7, -0.3, 0.25);
            assert!(res.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn residual_8_239_37_random_and_sensitivity() {
        let mut r = rng(29);
        for n in [3usize, 4, 6, 8] {
            let nf = n as f64;
            for _ in 0..250 {
                let jet = random_jet(n, &mut r);
                let fj = rotate_to_frame(&jet).unwrap();
                let alpha = r.gen_range(-1.0..1.5);
                let gamma = r.gen_range(-1.2..1.0);
                let s = r.gen_range(-0.5..1.2);
                let q = (1.0 - s) / (nf - 1.0);
                let (res, scale) = identity_residual_8_239_37(&fj, alpha, gamma, s, q).unwrap();
                assert!(res.abs() <= 1e-10 * scale, "n={n}: {res:e}");
            }
        }
        // constraint violation is detected
        let jet = random_jet(4, &mut r);
        let fj = rotate_to_frame(&jet).unwrap();
        assert!(identity_residual_8_239_37(&fj, 0.5, -0.3, 0.3, 0.3).is_err());
    }

    #[test]
    fn pde_project_constraints_and_idempotence() {
        let mut r = rng(37);
        for _ in 0..100 {
            let n = r.gen_range(3usize..=6);
            let jet = random_jet(n, &mut r);
            let (p, q) = (r.gen_range(0.5..3.0), r.gen_range(0.0..1.5));
            let pj = pde_project(&jet, p, q).unwrap();
            let w = pj.grad_norm();
            assert!((pj.laplacian() + pj.u.powf(p) * w.powf(q)).abs() < 1e-12 * (1.0 + w));
            let hg: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| pj.hess[i][j] * pj.g[j]).sum())
                .collect();
            for j in 0..n {
                let want = -p * pj.u.powf(p - 1.0) * w.powf(q) * pj.g[j]
                    - q * pj.u.powf(p) * w.powf(q - 2.0) * hg[j];
                let have: f64 = (0..n).map(|i| pj.third[i][i][j]).sum();
                assert!((have - want).abs() < 1e-12 * (1.0 + want.abs()));
            }
            let pj2 = pde_project(&pj, p, q).unwrap();
            for a in 0..n {
                for b in 0..n {
                    assert!((pj.hess[a][b] - pj2.hess[a][b]).abs() < 1e-12);
                    for c in 0..n {
                        assert!((pj.third[a][b][c] - pj2.third[a][b][c]).abs() < 1e-12);
                    }
                }
            }
        }
    }

    fn structural_params(n: u32, p: f64, q: f64) -> (ParamChoice, CoefficientSet) {
        let nf = n as f64;
        let gamma = gamma_lowq(n, q, 0.0).unwrap();
        let s = tracked_b2_root(n, q, gamma).unwrap();
        let qq = (1.0 - s) / (nf - 1.0);
        let mut pc = ParamChoice {
            gamma,
            s_weight: s,
            q_weight: qq,
            alpha: 0.0,
            p_shift: 0.0,
            eps1: 0.0,
            eps: 0.0,
        };
        let cs0 = coefficient_set(n, p, q, &pc).unwrap();
        pc.alpha = alpha1(n, gamma, s, p, &cs0).unwrap();
        let cs = coefficient_set(n, p, q, &pc).unwrap();
        (pc, cs)
    }

    #[test]
    fn sec2_residual_projected_random_jets() {
        let mut r = rng(41);
        for n in [3u32, 4, 6, 8] {
            let nf = n as f64;
            for _ in 0..250 {
                let q = r.gen_range(0.01..1.0 / (nf - 1.0));
                let p = r.gen_range((1.0 - q) + 0.05..crate::regions::p_star(n, q).unwrap());
                let (pc, cs) = structural_params(n, p, q);
                let jet = random_jet(n as usize, &mut r);
                let pj = pde_project(&jet, p, q).unwrap();
                let fj = rotate_to_frame(&pj).unwrap();
                let (res, scale) = identity_residual_sec2(&fj, p, q, &pc, &cs).unwrap();
                assert!(res.abs() <= 1e-9 * scale, "n={n} p={p} q={q}: {res:e} vs {scale:e}");
            }
        }
    }

    #[test]
    fn sec2_rejects_unprojected_jets() {
        let mut r = rng(43);
        let jet = random_jet(5, &mut r);
        let fj = rotate_to_frame(&jet).unwrap();
        let (pc, cs) = structural_params(5, 1.3, 0.2);
        assert!(identity_residual_sec2(&fj, 1.3, 0.2, &pc, &cs).is_err());
    }

    #[test]
    fn sec2_residual_radial_fixture() {
        // equality-case radial jets solve the equation exactly, so they
        // pass the PDE gate without projection
        for (n, q) in [(5u32, 0.2), (6u32, 0.15), (8u32, 0.1)] {
            let pr = RadialProfile::new(n, q, 1.0).unwrap();
            let p = pr.p;
            let (pc, cs) = structural_params(n, p, q);
            for r in [0.4, 1.0, 2.5] {
                let (v, vr, vrr) = eval_profile(&pr, r);
                let h = 1e-5;
                let (_, _, vrr_p) = eval_profile(&pr, r + h);
                let (_, _, vrr_m) = eval_profile(&pr, r - h);
                let vrrr = (vrr_p - vrr_m) / (2.0 * h);
                let jet = radial_jet(n as usize, r, v, vr, vrr, vrrr).unwrap();
                let jet = pde_project(&jet, p, q).unwrap();
                let fj = rotate_to_frame(&jet).unwrap();
                let (res, scale) = identity_residual_sec2(&fj, p, q, &pc, &cs).unwrap();
                assert!(res.abs() <= 1e-9 * scale, "n={n} q={q} r={r}: {res:e}");
                // the projection barely moves the jet
                assert!((fj.jet.hess[0][0] - vrr).abs() < 1e-9 * (1.0 + vrr.abs()));
            }
        }
    }

    #[test]
    fn radial_fixture_g_offdiagonal_zero() {
        let pr = RadialProfile::new(6, 0.2, 1.0).unwrap();
        let (s, qq) = structural_sq(6, 0.2).unwrap();
        let (v, vr, vrr) = eval_profile(&pr, 1.5);
        let jet = radial_jet(6, 1.5, v, vr, vrr, 0.0).unwrap();
        let fj = rotate_to_frame(&jet).unwrap();
        let g = g_tensor(&fj, s, qq);
        for i in 1..6 {
            for j in 1..6 {
                if i != j {
                    assert!(g[i][j].abs() < 1e-14);
                }
            }
        }
        // and G₁₁ matches the structural proportionality constant
        let g11 = g[0][0];
        assert!((g11 - (5.0 / 4.0) * vr * vr / v).abs() < 1e-10 * g11.abs());
    }

    #[test]
    fn residual_homogeneity_under_scaling() {
        // v → λv scales each identity term by λ^{α+γ+2} when hess,
        // third, g, u all scale linearly
        let mut r = rng(47);
        let jet = random_jet(4, &mut r);
        let (alpha, gamma, s) = (0.8, -0.4, 0.3);
        for lam in [0.5, 2.0] {
            let scaled = Jet3::new(
                lam * jet.u,
                jet.g.iter().map(|x| lam * x).collect(),
                jet.hess
                    .iter()
                    .map(|row| row.iter().map(|x| lam * x).collect())
                    .collect(),
                jet.third
                    .iter()
                    .map(|m| {
                        m.iter()
                            .map(|row| row.iter().map(|x| lam * x).collect())
                            .collect()
                    })
                    .collect(),
            )
            .unwrap();
            let f0 = rotate_to_frame(&jet).unwrap();
            let f1 = rotate_to_frame(&scaled).unwrap();
            let (r0, s0) = identity_residual_equ111(&f0, alpha, gamma, s);
            let (r1, s1) = identity_residual_equ111(&f1, alpha, gamma, s);
            let factor = lam.powf(alpha + gamma + 2.0);
            assert!((s1 - factor * s0).abs() < 1e-8 * s1.abs());
            assert!(r1.abs() <= 1e-10 * s1 && r0.abs() <= 1e-10 * s0);
        }
    }

    #[test]
    fn frame_independence_of_residuals() {
        // rotate the ambient coordinates by a fixed orthogonal map;
        // the framed residual must not change
        let mut r = rng(53);
        let n = 4;
        let jet = random_jet(n, &mut r);
        // Givens rotation in the (1,2) plane
        let theta = 0.7f64;
        let mut rot = vec![vec![0.0; n]; n];
        for i in 0..n {
            rot[i][i] = 1.0;
        }
        rot[1][1] = theta.cos();
        rot[1][2] = -theta.sin();
        rot[2][1] = theta.sin();
        rot[2][2] = theta.cos();
        let apply = |jet: &Jet3| -> Jet3 {
            let g: Vec<f64> = (0..n)
                .map(|b| (0..n).map(|a| rot[a][b] * jet.g[a]).sum())
                .collect();
            let mut h = vec![vec![0.0; n]; n];
            let mut t = vec![vec![vec![0.0; n]; n]; n];
            for b1 in 0..n {
                for b2 in 0..n {
                    for a1 in 0..n {
                        for a2 in 0..n {
                            h[b1][b2] += rot[a1][b1] * rot[a2][b2] * jet.hess[a1][a2];
                        }
                    }
                    for b3 in 0..n {
                        for a1 in 0..n {
                            for a2 in 0..n {
                                for a3 in 0..n {
                                    t[b1][b2][b3] += rot[a1][b1]
                                        * rot[a2][b2]
                                        * rot[a3][b3]
                                        * jet.third[a1][a2][a3];
                                }
                            }
                        }
                    }
                }
            }
            Jet3::new(jet.u, g, h, t).unwrap()
        };
        let (alpha, gamma, s) = (0.6, -0.5, 0.35);
        let f0 = rotate_to_frame(&jet).unwrap();
        let f1 = rotate_to_frame(&apply(&jet)).unwrap();
        let (r0, s0) = identity_residual_equ111(&f0, alpha, gamma, s);
        let (r1, s1) = identity_residual_equ111(&f1, alpha, gamma, s);
        assert!((s0 - s1).abs() < 1e-12 * s0.abs());
        assert!(r0.abs() < 1e-12 * s0 && r1.abs() < 1e-12 * s1);
    }

    #[test]
    fn b2_weight_cross_module_consistency() {
        // perturbing G₁₁Δv by η changes the sec2 residual by b₂·(scale)·η;
        // with b₂ = 0 the identity is insensitive to that slot
        let (n, p, q) = (6u32, 1.5, 0.1);
        let (pc, cs) = structural_params(n, p, q);
        assert!(cs.b2.abs() < 1e-12);
        let closed = pc.gamma
            + q
            + cs.a1
                * (2.0 * pc.gamma * pc.s_weight - pc.gamma + 2.0 * pc.s_weight
                    - 2.0 * pc.q_weight);
        assert!((cs.b2 - closed).abs() < 1e-12);
    }
}
