//! Fock-space reference states: the joint eigenvector of `(b1, b2)` and the
//! unitary construction `U·D1(α1)·D2(α2)·S12(g)|00⟩`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use num_traits::{Float, Zero};

use crate::canonical::CanonicalParams;
use crate::error::{Error, Result};
use crate::fock::{self, exp_apply, make_mode_operators, pnd_of_state, FockCutoff, FockOperator, FockState};
use crate::hamiltonian::{build_transformed_modes, heterodyne_operator, TransformedModes};
use crate::linalg::BandLu;
use crate::states;
use crate::statistics::PndGrid;
use crate::C64;

/// Acceptance threshold on the (projected) eigen-residuals.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Required ratio of the two smallest singular values.
pub const SEPARATION: f64 = 10.0;
/// Fidelity below which the unitary route is declared inconsistent.
pub const MIN_FIDELITY: f64 = 0.999;
/// Tolerance handed to `exp_apply`.
pub const EXP_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Route {
    JointEigen,
    UnitaryConstruction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Normalized, largest amplitude real positive.
    pub state: FockState,
    /// `‖P(b1 − β1)ψ‖` on `n1 + n2 ≤ N − 2n`, the part of the residual not
    /// produced by cutting the ladder at the box edge.
    pub residual1: f64,
    pub residual2: f64,
    /// Residuals over the whole truncated basis.
    pub full_residual1: f64,
    pub full_residual2: f64,
    pub route: Route,
    /// `|⟨ψ_other|ψ⟩|`, NaN until compared.
    pub fidelity_vs_other_route: f64,
    /// `√(λ2/λ1)` of the normal matrix; NaN for the unitary route.
    pub separation: f64,
}

fn residuals(modes: &TransformedModes, beta1: C64, beta2: C64, v: &FockState, margin: usize) -> Result<[f64; 4]> {
    let c = modes.cutoff;
    let limit = c.n_min().saturating_sub(margin);
    let mut out = [0.0; 4];
    for (k, (b, beta)) in [(&modes.b1, beta1), (&modes.b2, beta2)].into_iter().enumerate() {
        let bv = b.apply(v)?;
        let mut full = 0.0;
        let mut proj = 0.0;
        for (idx, (x, y)) in bv.amplitudes().iter().zip(v.amplitudes()).enumerate() {
            let d = (x - beta * y).norm_sqr();
            full += d;
            let (n1, n2) = c.levels(idx);
            if n1 + n2 <= limit {
                proj += d;
            }
        }
        out[k] = proj.sqrt();
        out[k + 2] = full.sqrt();
    }
    Ok(out)
}

/// Rayleigh quotient `x†Mx / x†x`.
fn rayleigh(m: &FockOperator, x: &[C64]) -> f64 {
    let mut y = vec![C64::zero(); x.len()];
    m.matvec_into(x, &mut y);
    fock::dot(x, &y).re / fock::dot(x, x).re
}

fn normalize(x: &mut [C64]) {
    let n = fock::norm(x);
    x.iter_mut().for_each(|c| *c /= n);
}

/// Joint eigenvector: the minimizer of `‖(b1−β1)ψ‖² + ‖(b2−β2)ψ‖²`, found
/// as the lowest eigenvector of the normal matrix by inverse iteration.
pub fn joint_eigenstate(p: &CanonicalParams, beta1: C64, beta2: C64, cutoff: FockCutoff) -> Result<OracleResult> {
    let modes = build_transformed_modes(p, cutoff)?;
    let id = FockOperator::identity(cutoff);
    let k1 = FockOperator::linear_combination(&[(C64::new(1.0, 0.0), &modes.b1), (-beta1, &id)])?;
    let k2 = FockOperator::linear_combination(&[(C64::new(1.0, 0.0), &modes.b2), (-beta2, &id)])?;
    let m = k1.adjoint().compose(&k1)?.add(&k2.adjoint().compose(&k2)?)?;
    let lu = BandLu::factor(&m);
    let dim = cutoff.dim();

    let mut x = vec![C64::new(1.0, 0.0); dim];
    normalize(&mut x);
    let mut converged = false;
    let mut change = f64::INFINITY;
    for _ in 0..50 {
        let mut y = x.clone();
        lu.solve_in_place(&mut y);
        normalize(&mut y);
        // align phase before comparing
        let ov = fock::dot(&x, &y);
        let ph = if ov.norm() > 0.0 { ov.conj() / ov.norm() } else { C64::new(1.0, 0.0) };
        y.iter_mut().for_each(|c| *c *= ph);
        change = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        x = y;
        if change < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged && change > 1e-10 {
        return Err(Error::Convergence { what: "inverse iteration", residual: change });
    }
    let lambda1 = rayleigh(&m, &x).max(0.0);

    // second eigenvalue by deflated inverse iteration
    let mut y: Vec<C64> = (0..dim).map(|k| C64::new(1.0 + (k % 7) as f64, (k % 3) as f64)).collect();
    let project = |v: &mut Vec<C64>| {
        let ov = fock::dot(&x, v);
        v.iter_mut().zip(&x).for_each(|(a, b)| *a -= ov * b);
        normalize(v);
    };
    project(&mut y);
    let mut lambda2 = rayleigh(&m, &y);
    for _ in 0..30 {
        lu.solve_in_place(&mut y);
        project(&mut y);
        let l = rayleigh(&m, &y);
        let done = (l - lambda2).abs() <= 1e-6 * l.abs();
        lambda2 = l;
        if done {
            break;
        }
    }
    let separation = if lambda1 > 0.0 { (lambda2 / lambda1).sqrt() } else { f64::INFINITY };
    if !(separation >= SEPARATION) {
        return Err(Error::NonUnique { ratio: separation });
    }

    let state = FockState::from_amplitudes(cutoff, x)?.normalized().fix_global_phase();
    let [r1, r2, f1, f2] = residuals(&modes, beta1, beta2, &state, 2 * p.order as usize)?;
    if r1.max(r2) > RESIDUAL_TOL {
        return Err(Error::CutoffTooSmall { residual: r1.max(r2) });
    }
    Ok(OracleResult {
        state,
        residual1: r1,
        residual2: r2,
        full_residual1: f1,
        full_residual2: f2,
        route: Route::JointEigen,
        fidelity_vs_other_route: f64::NAN,
        separation,
    })
}

/// Phase convention for the rotated modes `a_θ` and the squeezing parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitaryConvention {
    /// `a_θ = e^{−iθ}a` when true, `e^{iθ}a` otherwise.
    pub rotate_negative: bool,
    /// `g = +r e^{−i(θ1+θ2−φ)}` when true, the opposite sign otherwise.
    pub g_positive: bool,
}

/// The convention that reproduces the joint eigenvector: `a_θ = e^{−iθ}a`
/// and `g = r e^{−i(θ1+θ2−φ)}`, i.e. `g = +r` on `θ1+θ2−φ = 0` and `g = −r`
/// on `θ1+θ2−φ = π`.
pub const CONVENTION: UnitaryConvention = UnitaryConvention { rotate_negative: true, g_positive: true };

impl UnitaryConvention {
    pub const ALL: [UnitaryConvention; 4] = [
        UnitaryConvention { rotate_negative: true, g_positive: true },
        UnitaryConvention { rotate_negative: true, g_positive: false },
        UnitaryConvention { rotate_negative: false, g_positive: true },
        UnitaryConvention { rotate_negative: false, g_positive: false },
    ];

    fn rot(&self, theta: f64) -> C64 {
        C64::from_polar(1.0, if self.rotate_negative { -theta } else { theta })
    }

    pub fn g(&self, p: &CanonicalParams) -> C64 {
        let s = if self.g_positive { 1.0 } else { -1.0 };
        C64::from_polar(s * p.r, -(p.theta1 + p.theta2 - p.phi))
    }
}

/// Rotated ladder operators `(a_θ1, a_θ2)`.
fn rotated_modes(p: &CanonicalParams, cutoff: FockCutoff, conv: &UnitaryConvention) -> Result<(FockOperator, FockOperator)> {
    let (a1, a2) = make_mode_operators(cutoff)?;
    Ok((a1.scale(conv.rot(p.theta1)), a2.scale(conv.rot(p.theta2))))
}

/// Generator of `U` written in rotated modes:
/// `−(Δ/2√2)[A1†³ + 3A1†²A2 + 3A1†A2² + A2³] + h.c.`
pub fn cubic_generator_rotated(p: &CanonicalParams, cutoff: FockCutoff, conv: &UnitaryConvention) -> Result<FockOperator> {
    let d = states::delta(p)?;
    let (r1, r2) = rotated_modes(p, cutoff, conv)?;
    let c1 = r1.adjoint();
    let pr = |ops: &[&FockOperator]| FockOperator::product(ops);
    let poly = FockOperator::linear_combination(&[
        (C64::new(1.0, 0.0), &pr(&[&c1, &c1, &c1])?),
        (C64::new(3.0, 0.0), &pr(&[&c1, &c1, &r2])?),
        (C64::new(3.0, 0.0), &pr(&[&c1, &r2, &r2])?),
        (C64::new(1.0, 0.0), &pr(&[&r2, &r2, &r2])?),
    ])?;
    let t = poly.scale(-d / (2.0 * SQRT_2));
    t.sub(&t.adjoint())
}

/// Generator of `U` written with the heterodyne operator: `−ΔZ³ + Δ*Z†³`.
pub fn cubic_generator_heterodyne(p: &CanonicalParams, cutoff: FockCutoff) -> Result<FockOperator> {
    let d = states::delta(p)?;
    let z = heterodyne_operator(p, cutoff)?;
    let z3 = FockOperator::product(&[&z, &z, &z])?;
    FockOperator::linear_combination(&[(-d, &z3), (d.conj(), &z3.adjoint())])
}

/// `U·D1(α1)·D2(α2)·S12(g)|00⟩`, normalized, under a given convention.
pub fn unitary_state(
    p: &CanonicalParams,
    beta1: C64,
    beta2: C64,
    cutoff: FockCutoff,
    conv: &UnitaryConvention,
) -> Result<FockState> {
    if p.order != 2 {
        return Err(Error::UnsupportedOrder(p.order));
    }
    let (a1, a2) = make_mode_operators(cutoff)?;
    let (r1, r2) = rotated_modes(p, cutoff, conv)?;
    let g = conv.g(p);
    let sq = FockOperator::linear_combination(&[
        (-g, &r1.adjoint().compose(&r2.adjoint())?),
        (g.conj(), &r1.compose(&r2)?),
    ])?;
    let (mu, nu) = (p.mu(), p.nu());
    let al1 = mu.conj() * beta1 - nu * beta2.conj();
    let al2 = mu.conj() * beta2 - nu * beta1.conj();
    let disp = |al: C64, a: &FockOperator| {
        FockOperator::linear_combination(&[(al, &a.adjoint()), (-al.conj(), a)])
    };
    let mut v = FockState::vacuum(cutoff);
    v = exp_apply(&sq, &v, EXP_TOL)?;
    v = exp_apply(&disp(al2, &a2)?, &v, EXP_TOL)?;
    v = exp_apply(&disp(al1, &a1)?, &v, EXP_TOL)?;
    if p.gamma_mod != 0.0 {
        v = exp_apply(&cubic_generator_rotated(p, cutoff, conv)?, &v, EXP_TOL)?;
    }
    Ok(v.normalized().fix_global_phase())
}

/// `|⟨a|b⟩|` of two normalized states.
pub fn fidelity(a: &FockState, b: &FockState) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

/// Unitary route with the stored convention, compared against the joint
/// eigenvector.
pub fn unitary_construction(p: &CanonicalParams, beta1: C64, beta2: C64, cutoff: FockCutoff) -> Result<OracleResult> {
    let eig = joint_eigenstate(p, beta1, beta2, cutoff)?;
    unitary_against(p, beta1, beta2, &eig)
}

/// Unitary route compared against an already computed joint eigenvector.
pub fn unitary_against(p: &CanonicalParams, beta1: C64, beta2: C64, eig: &OracleResult) -> Result<OracleResult> {
    let cutoff = eig.state.cutoff();
    let state = unitary_state(p, beta1, beta2, cutoff, &CONVENTION)?;
    let f = fidelity(&state, &eig.state)?;
    if f < MIN_FIDELITY {
        return Err(Error::ConventionMismatch { fidelity: f });
    }
    let modes = build_transformed_modes(p, cutoff)?;
    let [r1, r2, f1, f2] = residuals(&modes, beta1, beta2, &state, 2 * p.order as usize)?;
    Ok(OracleResult {
        state,
        residual1: r1,
        residual2: r2,
        full_residual1: f1,
        full_residual2: f2,
        route: Route::UnitaryConstruction,
        fidelity_vs_other_route: f,
        separation: f64::NAN,
    })
}

/// Fidelity of every convention against the joint eigenvector, best first.
pub fn rank_conventions(
    p: &CanonicalParams,
    beta1: C64,
    beta2: C64,
    eig: &OracleResult,
) -> Result<Vec<(UnitaryConvention, f64)>> {
    let mut out = Vec::with_capacity(4);
    for conv in UnitaryConvention::ALL {
        let s = unitary_state(p, beta1, beta2, eig.state.cutoff(), &conv)?;
        out.push((conv, fidelity(&s, &eig.state)?));
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(core::cmp::Ordering::Equal));
    Ok(out)
}

/// Largest `|P_oracle − P_grid|` over the shared index range.
pub fn compare_pnd(o: &OracleResult, g: &PndGrid) -> Result<f64> {
    Ok(pnd_of_state(&o.state)?.max_abs_diff(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn squeezed_vacuum() {
        let p = CanonicalParams::new(0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2);
        let z = C64::new(0.0, 0.0);
        let c = FockCutoff::square(30).unwrap();
        let o = joint_eigenstate(&p, z, z, c).unwrap();
        let lam = 0.8f64.tanh().powi(2);
        let p00 = 1.0 / 0.8f64.cosh().powi(2);
        for n in 0..10 {
            let want = p00 * lam.powi(n as i32);
            assert!((o.state.amplitude(n, n).norm_sqr() - want).abs() < 1e-9);
        }
        let u = unitary_construction(&p, z, z, c).unwrap();
        assert!((u.fidelity_vs_other_route - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_coherent_eigenproblem() {
        // r small enough that the two-mode tail is negligible at the box edge
        let p = CanonicalParams::new(0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2);
        let b = C64::new(1.0, 0.0);
        let o = joint_eigenstate(&p, b, b, FockCutoff::square(30).unwrap()).unwrap();
        assert!(o.full_residual1 < 1e-8 && o.full_residual2 < 1e-8, "{o:?}");
    }

    #[test]
    fn generators_agree() {
        let p = CanonicalParams::new(0.8, 0.0, 0.1, 0.1, PI, 0.0, 0.0, 0.0, 2);
        let c = FockCutoff::square(12).unwrap();
        let a = cubic_generator_rotated(&p, c, &CONVENTION).unwrap();
        let b = cubic_generator_heterodyne(&p, c).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-10);
    }
}
