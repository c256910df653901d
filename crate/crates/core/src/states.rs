//! Analytic wavefunctions of the joint eigenstates in the heterodyne
//! (entangled-state) representation, their coordinate representation, and
//! the overlap with the Fock basis.
//!
//! Convention: `ψ_β(z) = N exp(−a|z|² + Γ1 z* + Γ2 z − B(z, z*))` is the
//! solution of the eigenvalue equations written as differential equations in
//! `z`. The amplitude on the basis ket is `⟨z|ψ⟩ = ψ_β(z*)`; this is the
//! reading that reproduces the Fock-space eigenvectors.

use core::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, SQRT_2};
use num_traits::Float;

use crate::canonical::{validate, CanonicalParams};
use crate::error::{Error, Result};
use crate::hamiltonian::CANONICAL_TOL;
use crate::statistics::{gauss_legendre, kahan_sum, ln_factorials, laguerre, norm_integral, QuadratureConfig};
use crate::{angle_dist, wrap_angle, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeterodynePoint {
    pub z: C64,
}

impl HeterodynePoint {
    pub fn new(z1: f64, z2: f64) -> Self {
        Self { z: C64::new(z1, z2) }
    }
}

/// Coefficients of the analytic wavefunction. `wb1`, `wb2` multiply the
/// nonlinear terms `z*^{n+1}/(n+1)` and `z^{n+1}/(n+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveParams {
    pub a: C64,
    pub wb1: C64,
    pub wb2: C64,
    pub gamma1: C64,
    pub gamma2: C64,
    pub norm: f64,
    pub order: u32,
    pub beta1: C64,
    pub beta2: C64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicPhaseParams {
    /// Ξ, real on canonical branches.
    pub xi: f64,
    /// Δ in the quotient form.
    pub delta: C64,
}

const SINGULAR_TOL: f64 = 1e-12;

fn require_canonical(p: &CanonicalParams) -> Result<()> {
    match validate(p, CANONICAL_TOL).to_error() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Wavefunction coefficients for eigenvalues `(β1, β2)`. `norm` is 1.
pub fn wave_params(p: &CanonicalParams, beta1: C64, beta2: C64) -> Result<WaveParams> {
    require_canonical(p)?;
    let (mu, nu) = (p.mu(), p.nu());
    let e = |x: f64| C64::from_polar(1.0, x);
    let mu1 = e(p.theta1) * mu;
    let mu2 = e(p.theta2) * mu;
    let nu1 = e(-p.theta1) * nu;
    let nu2 = e(-p.theta2) * nu;
    let d1 = mu1 - nu2;
    let d2 = mu2 - nu1;
    if d1.norm() < SINGULAR_TOL || d2.norm() < SINGULAR_TOL {
        return Err(Error::Singular);
    }
    let s2g = SQRT_2 * p.gamma_mod;
    Ok(WaveParams {
        a: (mu1 + nu2) / d1,
        wb1: s2g * e(p.delta1) / d1,
        wb2: s2g * e(p.delta2) / d2,
        gamma1: SQRT_2 * beta1 / d1,
        gamma2: SQRT_2 * beta2 / d2,
        norm: 1.0,
        order: p.order,
        beta1,
        beta2,
    })
}

/// `B(z, z*) = wb1 z*^{n+1}/(n+1) + wb2 z^{n+1}/(n+1)`.
pub fn nonlinear_exponent(w: &WaveParams, z: C64) -> C64 {
    let k = w.order as i32 + 1;
    (w.wb1 * z.conj().powi(k) + w.wb2 * z.powi(k)) / k as f64
}

/// `ln ψ_β(z)` including `ln N`.
pub fn log_wavefunction(w: &WaveParams, z: C64) -> C64 {
    w.norm.ln() - w.a * z.norm_sqr() + w.gamma1 * z.conj() + w.gamma2 * z - nonlinear_exponent(w, z)
}

/// `ψ_β(z)`.
pub fn eval_entangled_wavefunction(w: &WaveParams, pt: HeterodynePoint) -> Result<C64> {
    let e = log_wavefunction(w, pt.z);
    if e.re > 700.0 {
        return Err(Error::Range { exponent: e.re });
    }
    Ok(e.exp())
}

/// `⟨z|ψ⟩ = ψ_β(z*)`.
pub fn heterodyne_amplitude(w: &WaveParams, pt: HeterodynePoint) -> Result<C64> {
    eval_entangled_wavefunction(w, HeterodynePoint { z: pt.z.conj() })
}

/// Centre and width of the Gaussian envelope of `|ψ_β|`:
/// `|ψ_β(z)| ∝ exp(−Re a |z − z0|²)` when `Re B = 0`.
pub fn envelope(w: &WaveParams) -> (C64, f64) {
    let ra = w.a.re.max(1e-300);
    let c = w.gamma1.conj() + w.gamma2;
    (c.conj() / (2.0 * ra), 1.0 / ra.sqrt())
}

/// Rough mean photon number per mode: `|z0|² + sinh²(ln Re a / 2)`.
pub fn mean_photon_estimate(w: &WaveParams) -> f64 {
    let (z0, _) = envelope(w);
    let r = 0.5 * w.a.re.max(1e-300).ln();
    z0.norm_sqr() + r.sinh().powi(2)
}

/// True when `Im a = 0` and `Re B` vanishes identically (`wb2 = −wb1*`), so
/// the norm has a closed form.
pub fn is_gaussian_modulus(w: &WaveParams) -> bool {
    w.a.im.abs() < 1e-12 && w.a.re > 0.0 && (w.wb2 + w.wb1.conj()).norm() < 1e-12 * (1.0 + w.wb1.norm())
}

/// Closed-form normalization `N = √a · exp(−|Γ1* + Γ2|²/(4a))`, available
/// when [`is_gaussian_modulus`] holds.
pub fn normalize_analytic(w: &WaveParams) -> Option<WaveParams> {
    if !is_gaussian_modulus(w) {
        return None;
    }
    let a = w.a.re;
    let c = w.gamma1.conj() + w.gamma2;
    Some(WaveParams { norm: a.sqrt() * (-c.norm_sqr() / (4.0 * a)).exp(), ..*w })
}

/// Sets `N` so that `(2/π)∫d²z |ψ|² = 1` by quadrature, checked under grid
/// doubling.
pub fn normalize(w: &WaveParams, q: &QuadratureConfig) -> Result<WaveParams> {
    q.check()?;
    let base = WaveParams { norm: 1.0, ..*w };
    let i1 = norm_integral(&base, q);
    let i2 = norm_integral(&base, &q.doubled());
    let rel = (i1 - i2).abs() / i2.abs();
    if !(rel <= q.convergence_rel_tol) || !(i2 > 0.0) || !i2.is_finite() {
        return Err(Error::Convergence { what: "normalization integral", residual: rel });
    }
    Ok(WaveParams { norm: 1.0 / i2.sqrt(), ..*w })
}

/// Absolute tolerance for the coordinate transform under grid doubling.
pub const COORD_TOL: f64 = 1e-8;

/// Coordinate representation
/// `(2/π)∫dz2 e^{i(x2−x1)z2} ψ_β((x1+x2)/2 + i z2)`.
pub fn eval_coordinate_wavefunction(w: &WaveParams, x1: f64, x2: f64, q: &QuadratureConfig) -> Result<C64> {
    q.check()?;
    let ra = w.a.re;
    if !(ra > 0.0) {
        return Err(Error::OutOfRange("Re a must be positive".into()));
    }
    let s = 0.5 * (x1 + x2);
    let centre = (w.gamma1 - w.gamma2).im / (2.0 * ra);
    let half = 9.0 / ra.sqrt();
    let integrate = |n: usize| {
        let (t, wt) = gauss_legendre(n);
        let re = kahan_sum(t.iter().zip(&wt).map(|(t, wt)| {
            let z2 = centre + half * t;
            let e = log_wavefunction(w, C64::new(s, z2)) + C64::new(0.0, (x2 - x1) * z2);
            (e.exp() * (wt * half)).re
        }));
        let im = kahan_sum(t.iter().zip(&wt).map(|(t, wt)| {
            let z2 = centre + half * t;
            let e = log_wavefunction(w, C64::new(s, z2)) + C64::new(0.0, (x2 - x1) * z2);
            (e.exp() * (wt * half)).im
        }));
        C64::new(re, im) * FRAC_2_PI
    };
    let v1 = integrate(q.points_per_axis);
    let v2 = integrate(2 * q.points_per_axis);
    let diff = (v1 - v2).norm();
    if !(diff < COORD_TOL) {
        return Err(Error::Convergence { what: "coordinate transform", residual: diff });
    }
    Ok(v2)
}

/// The defining complex expression of Ξ.
pub fn xi_complex(p: &CanonicalParams) -> C64 {
    let (c, s) = (p.r.cosh(), p.r.sinh());
    let t = p.theta1 + p.theta2 - p.phi;
    let num = C64::new(c, 0.0) - C64::from_polar(s, t);
    let den = (2.0 * p.r).cosh() - (2.0 * p.r).sinh() * t.cos();
    (2.0 * SQRT_2 / 3.0) * p.gamma_mod * num / den
}

fn require_order2_canonical(p: &CanonicalParams) -> Result<()> {
    if p.order != 2 {
        return Err(Error::UnsupportedOrder(p.order));
    }
    require_canonical(p)
}

/// Ξ (the real part of [`xi_complex`]).
pub fn xi(p: &CanonicalParams) -> Result<f64> {
    require_order2_canonical(p)?;
    Ok(xi_complex(p).re)
}

/// `Δ = √2|γ|e^{i(δ1−θ1)} / (3(μ − νe^{−i(θ1+θ2)}))`.
pub fn delta(p: &CanonicalParams) -> Result<C64> {
    require_order2_canonical(p)?;
    Ok(delta_quotient(p))
}

fn delta_quotient(p: &CanonicalParams) -> C64 {
    let den = 3.0 * (p.mu() - p.nu() * C64::from_polar(1.0, -(p.theta1 + p.theta2)));
    C64::from_polar(SQRT_2 * p.gamma_mod, p.delta1 - p.theta1) / den
}

/// `Δ = √2 e^{−r_s}|γ|/3 · e^{i(δ1−θ1)}` with the branch-signed `r_s`
/// (`r` when `θ1+θ2−φ = π`, `−r` when it is `0`).
pub fn delta_exponential_form(p: &CanonicalParams) -> C64 {
    C64::from_polar(SQRT_2 * (-p.signed_r()).exp() * p.gamma_mod / 3.0, p.delta1 - p.theta1)
}

pub fn cubic_phase_params(p: &CanonicalParams) -> Result<CubicPhaseParams> {
    Ok(CubicPhaseParams { xi: xi(p)?, delta: delta(p)? })
}

/// Closed form of the coordinate wavefunction for `F(Z) = Z²` and
/// `δ1 − θ1 = π/2`, with the analytic normalization.
pub fn eval_cubic_closed_form(p: &CanonicalParams, beta1: C64, beta2: C64, x1: f64, x2: f64) -> Result<C64> {
    if p.order != 2 {
        return Err(Error::UnsupportedOrder(p.order));
    }
    if angle_dist(wrap_angle(p.delta1 - p.theta1), FRAC_PI_2) > 1e-9 {
        return Err(Error::Branch("closed form needs δ1 − θ1 = π/2".into()));
    }
    let xi = xi(p)?;
    let w = wave_params(p, beta1, beta2)?;
    let w = normalize_analytic(&w).ok_or_else(|| Error::Branch("Re B does not vanish".into()))?;
    let a = w.a;
    let sum = x1 + x2;
    let s = 0.5 * sum;
    let i = C64::new(0.0, 1.0);
    let root = (a - 1.5 * i * xi * sum).sqrt();
    let g = C64::new(x1 - x2, 0.0) + (w.gamma1 - w.gamma2);
    let gauss = (-(g * g) / (4.0 * a - 6.0 * i * xi * sum)).exp();
    let cubic = (-i * xi * s * s * s - a * s * s + (w.gamma1 + w.gamma2) * s).exp();
    Ok(2.0 / PI.sqrt() * w.norm / root * gauss * cubic)
}

/// `⟨n1,n2|z⟩`, evaluated with log-scaled factorials.
pub fn overlap_fock_z(n1: usize, n2: usize, pt: HeterodynePoint, theta1: f64, theta2: f64) -> C64 {
    let z = pt.z;
    let (m, big) = (n1.min(n2), n1.max(n2));
    let k = big - m;
    let lf = ln_factorials(big);
    let r2 = z.norm_sqr();
    let l = laguerre(m, k, 2.0 * r2);
    if l == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let rz = r2.sqrt();
    let lnr = if k == 0 { 0.0 } else { k as f64 * rz.ln() };
    let lnmag = 0.5 * (k as f64 * core::f64::consts::LN_2 + lf[m] - lf[big]) + lnr - r2 + l.abs().ln();
    let arg = if rz > 0.0 { z.arg() } else { 0.0 };
    // z*^{n1−m} z^{n2−m}
    let pow_phase = arg * ((n2 - m) as f64 - (n1 - m) as f64);
    let mut sign_phase = 0.0;
    if m % 2 == 1 {
        sign_phase += PI;
    }
    if l < 0.0 {
        sign_phase += PI;
    }
    C64::from_polar(lnmag.exp(), pow_phase + sign_phase + n1 as f64 * theta1 + n2 as f64 * theta2)
}
