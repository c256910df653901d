//! Parameters of the nonlinear two-mode transformation and its canonical
//! constraints.

use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_traits::Float;

use crate::error::Error;
use crate::{angle_dist, wrap_angle, C64};

/// Tolerance for comparing angles modulo 2π.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CanonicalParams {
    pub r: f64,
    pub phi: f64,
    pub gamma_mod: f64,
    pub chi_mod: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Power `n` of the nonlinearity `F(ζ) = ζⁿ`.
    #[cfg_attr(feature = "serde", serde(rename = "order"))]
    pub order: u32,
}

/// The two limiting solutions that make the transformation canonical for any
/// `r`, labelled by `(δ1+δ2−φ, θ1+θ2−φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_camel_case_types)]
pub enum CanonicalBranch {
    /// `δ1+δ2−φ = 0`, `θ1+θ2−φ = π`.
    DeltaZero_ThetaPi,
    /// `δ1+δ2−φ = π`, `θ1+θ2−φ = 0`.
    DeltaPi_ThetaZero,
}

impl CanonicalBranch {
    pub const ALL: [CanonicalBranch; 2] =
        [CanonicalBranch::DeltaZero_ThetaPi, CanonicalBranch::DeltaPi_ThetaZero];

    /// `(δ1+δ2−φ, θ1+θ2−φ)` on this branch.
    pub fn angle_sums(self) -> (f64, f64) {
        match self {
            CanonicalBranch::DeltaZero_ThetaPi => (0.0, PI),
            CanonicalBranch::DeltaPi_ThetaZero => (PI, 0.0),
        }
    }
}

impl core::fmt::Display for CanonicalBranch {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            CanonicalBranch::DeltaZero_ThetaPi => "DeltaZero_ThetaPi",
            CanonicalBranch::DeltaPi_ThetaZero => "DeltaPi_ThetaZero",
        })
    }
}

impl CanonicalParams {
    /// All angles are reduced to `[0, 2π)`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        phi: f64,
        gamma_mod: f64,
        chi_mod: f64,
        delta1: f64,
        delta2: f64,
        theta1: f64,
        theta2: f64,
        order: u32,
    ) -> Self {
        Self {
            r,
            phi: wrap_angle(phi),
            gamma_mod,
            chi_mod,
            delta1: wrap_angle(delta1),
            delta2: wrap_angle(delta2),
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
            order,
        }
    }

    /// Complete `(δ2, θ2)` so the set lies on `branch`, with `|χ| = |γ|`.
    pub fn on_branch(
        branch: CanonicalBranch,
        r: f64,
        phi: f64,
        gamma_mod: f64,
        delta1: f64,
        theta1: f64,
        order: u32,
    ) -> Self {
        let (ds, ts) = branch.angle_sums();
        Self::new(
            r,
            phi,
            gamma_mod,
            gamma_mod,
            delta1,
            ds + phi - delta1,
            theta1,
            ts + phi - theta1,
            order,
        )
    }

    /// Same parameters with `|γ| = |χ| = g`.
    pub fn with_gamma(mut self, g: f64) -> Self {
        self.gamma_mod = g;
        self.chi_mod = g;
        self
    }

    /// `μ = cosh r`.
    pub fn mu(&self) -> C64 {
        C64::new(self.r.cosh(), 0.0)
    }

    /// `ν = sinh r · e^{iφ}`.
    pub fn nu(&self) -> C64 {
        C64::from_polar(self.r.sinh(), self.phi)
    }

    /// `γ = |γ| e^{iδ1}`.
    pub fn gamma(&self) -> C64 {
        C64::from_polar(self.gamma_mod, self.delta1)
    }

    /// `χ = |χ| e^{iδ2}`.
    pub fn chi(&self) -> C64 {
        C64::from_polar(self.chi_mod, self.delta2)
    }

    /// Coefficient of `a2` in the heterodyne argument, `e^{−iθ2}/√2`.
    pub fn alpha(&self) -> C64 {
        C64::from_polar(FRAC_1_SQRT_2, -self.theta2)
    }

    /// Coefficient of `a1†` in the heterodyne argument, `e^{iθ1}/√2`.
    pub fn beta(&self) -> C64 {
        C64::from_polar(FRAC_1_SQRT_2, self.theta1)
    }

    /// `θ1 + θ2 − φ`, wrapped.
    pub fn theta_sum(&self) -> f64 {
        wrap_angle(self.theta1 + self.theta2 - self.phi)
    }

    /// `δ1 + δ2 − φ`, wrapped.
    pub fn delta_sum(&self) -> f64 {
        wrap_angle(self.delta1 + self.delta2 - self.phi)
    }

    /// The branch the angle sums sit on, if any.
    pub fn branch(&self) -> Option<CanonicalBranch> {
        let (d, t) = (self.delta_sum(), self.theta_sum());
        CanonicalBranch::ALL.into_iter().find(|b| {
            let (bd, bt) = b.angle_sums();
            angle_dist(d, bd) < ANGLE_TOL && angle_dist(t, bt) < ANGLE_TOL
        })
    }

    /// `r` with the sign that makes `μ − ν e^{−i(θ1+θ2)} = e^{r_s}` on a branch:
    /// `+r` when `θ1+θ2−φ = π`, `−r` when it is `0`.
    pub fn signed_r(&self) -> f64 {
        -self.r * self.theta_sum().cos()
    }
}

/// `(μ, ν)` of the linear part.
pub fn linear_coeffs(p: &CanonicalParams) -> (C64, C64) {
    (p.mu(), p.nu())
}

/// The single complex condition that the commutators `[b1, b2]` and
/// `[b1, b2†]` reduce to. Zero iff the set is canonical.
pub fn residual_nlcc1(p: &CanonicalParams) -> C64 {
    let (c, s) = (p.r.cosh(), p.r.sinh());
    let (g, x) = (p.gamma_mod, p.chi_mod);
    C64::from_polar(c * x, -(p.delta2 - p.theta1))
        - C64::from_polar(s * x, -(p.delta2 + p.theta2 - p.phi))
        + C64::from_polar(c * g, p.delta1 - p.theta2)
        - C64::from_polar(s * g, p.delta1 + p.theta1 - p.phi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TanhR {
    /// A finite value; `physical` is false when `|value| > 1`.
    Value { value: f64, physical: bool },
    /// `0/0`: `r` is free on this branch.
    Degenerate,
    /// `tanh r = ±1`, i.e. `r = ∞`. The sign is not chosen.
    Infinite,
}

/// Right-hand side of the `tanh r` relation on the `|χ| = |γ|` branch.
pub fn tanh_r_rhs(p: &CanonicalParams) -> TanhR {
    let ts = p.theta1 + p.theta2 - p.phi;
    let ds = p.delta1 + p.delta2 - p.phi;
    let num = ts.cos() + ds.cos();
    let den = 1.0 + (ds + ts).cos();
    if num.abs() < 1e-9 && den.abs() < 1e-9 {
        return TanhR::Degenerate;
    }
    let value = num / den;
    if (value.abs() - 1.0).abs() < 1e-9 {
        return TanhR::Infinite;
    }
    TanhR::Value { value, physical: value.abs() <= 1.0 }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidationReport {
    /// `| |μ|² − |ν|² − 1 |`.
    pub linear_residual: f64,
    /// `| |α|² − |β|² |` of the heterodyne coefficients.
    pub alpha_beta_residual: f64,
    /// `|residual_nlcc1|`.
    pub nlcc1_residual: f64,
    /// `(|χ|² − |γ|²) sin(θ1+θ2−φ)`.
    pub imag_condition: f64,
    pub branch: Option<CanonicalBranch>,
    /// Finite parameters, `|γ|, |χ| ≥ 0` and `n ≥ 1`.
    pub in_domain: bool,
    pub tol: f64,
    pub pass: bool,
}

impl ValidationReport {
    /// The error an operation needing canonical parameters should raise.
    pub fn to_error(&self) -> Option<Error> {
        if !self.in_domain {
            return Some(Error::OutOfRange("moduli must be non-negative, parameters finite, order at least 1".into()));
        }
        if self.pass {
            return None;
        }
        let (what, residual) = self.worst();
        Some(Error::Constraint { what, residual })
    }

    /// Largest of the residuals.
    pub fn worst(&self) -> (&'static str, f64) {
        [
            ("linear", self.linear_residual),
            ("alpha-beta", self.alpha_beta_residual),
            ("nonlinear", self.nlcc1_residual),
            ("imaginary-part", self.imag_condition.abs()),
        ]
        .into_iter()
        .fold(("linear", 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }
}

pub fn validate(p: &CanonicalParams, tol: f64) -> ValidationReport {
    let (mu, nu) = linear_coeffs(p);
    let linear_residual = (mu.norm_sqr() - nu.norm_sqr() - 1.0).abs();
    let alpha_beta_residual = (p.alpha().norm_sqr() - p.beta().norm_sqr()).abs();
    let nlcc1_residual = residual_nlcc1(p).norm();
    let imag_condition = (p.chi_mod * p.chi_mod - p.gamma_mod * p.gamma_mod)
        * (p.theta1 + p.theta2 - p.phi).sin();
    // Scale-aware tolerance on the linear identity: cosh² r − sinh² r loses
    // digits as r grows.
    let lin_tol = tol.max(4.0 * f64::EPSILON * mu.norm_sqr());
    let angles = [p.r, p.phi, p.delta1, p.delta2, p.theta1, p.theta2];
    let in_domain = angles.iter().all(|x| x.is_finite())
        && p.gamma_mod >= 0.0
        && p.chi_mod >= 0.0
        && p.gamma_mod.is_finite()
        && p.chi_mod.is_finite()
        && p.order >= 1;
    let pass = in_domain
        && linear_residual < lin_tol
        && alpha_beta_residual < tol
        && nlcc1_residual < tol
        && imag_condition.abs() < tol;
    ValidationReport {
        linear_residual,
        alpha_beta_residual,
        nlcc1_residual,
        imag_condition,
        branch: p.branch(),
        in_domain,
        tol,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::FRAC_PI_2;

    fn acceptance() -> CanonicalParams {
        CanonicalParams::new(0.8, 0.0, 0.1, 0.1, PI, 0.0, 0.0, 0.0, 2)
    }

    #[test]
    fn linear_coefficients() {
        let p = CanonicalParams::new(0.0, 1.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2);
        assert_eq!(linear_coeffs(&p), (C64::new(1.0, 0.0), C64::new(0.0, 0.0)));
        let p = CanonicalParams::new(0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2);
        let (mu, nu) = linear_coeffs(&p);
        assert_abs_diff_eq!(mu.re, 1.3374350, epsilon = 1e-7);
        assert_abs_diff_eq!(nu.re, 0.8881060, epsilon = 1e-7);
        let p = CanonicalParams { phi: FRAC_PI_2, ..p };
        let nu = p.nu();
        assert!(nu.re.abs() < 1e-15);
        assert_abs_diff_eq!(nu.norm(), 0.8881060, epsilon = 1e-7);
        assert!((mu.norm_sqr() - nu.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nlcc1_examples() {
        assert!(residual_nlcc1(&acceptance()).norm() < 1e-12);
        let lin = CanonicalParams::new(0.8, 0.4, 0.0, 0.0, 1.0, 2.0, 0.3, 0.1, 2);
        assert_eq!(residual_nlcc1(&lin).norm(), 0.0);
        let bad = CanonicalParams::new(0.8, 0.0, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0, 2);
        let res = residual_nlcc1(&bad);
        assert_abs_diff_eq!(res.re, 0.0898658, epsilon = 1e-7);
        assert!(res.im.abs() < 1e-15);
    }

    #[test]
    fn tanh_cases() {
        let inf = CanonicalParams::new(0.5, 0.0, 0.1, 0.1, 0.3, -0.3, 1.0, -1.0, 2);
        assert_eq!(tanh_r_rhs(&inf), TanhR::Infinite);
        let deg = CanonicalParams::on_branch(CanonicalBranch::DeltaZero_ThetaPi, 0.8, 0.2, 0.1, 0.4, 0.9, 2);
        assert_eq!(tanh_r_rhs(&deg), TanhR::Degenerate);
        let p = CanonicalParams::new(0.5, 0.0, 0.1, 0.1, FRAC_PI_2, 0.0, PI / 3.0, 0.0, 2);
        match tanh_r_rhs(&p) {
            TanhR::Value { value, physical } => {
                assert_abs_diff_eq!(value, 3.7320508, epsilon = 1e-7);
                assert!(!physical);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_examples() {
        let fig = CanonicalParams::new(0.8, 0.0, 0.1, 0.1, FRAC_PI_2, FRAC_PI_2, 0.0, 0.0, 2);
        let rep = validate(&fig, 1e-10);
        assert!(rep.pass);
        assert_eq!(rep.branch, Some(CanonicalBranch::DeltaPi_ThetaZero));

        let asym = CanonicalParams::new(0.8, 0.0, 0.2, 0.1, 0.0, 0.0, PI / 4.0, 0.0, 2);
        let rep = validate(&asym, 1e-10);
        assert!(!rep.pass);
        assert_abs_diff_eq!(rep.imag_condition, -0.0212132, epsilon = 1e-7);

        let lin = CanonicalParams::new(1.7, 2.2, 0.0, 0.0, 0.5, 0.1, 1.0, 3.0, 2);
        assert!(validate(&lin, 1e-12).pass);
    }

    #[test]
    fn branch_completion() {
        for b in CanonicalBranch::ALL {
            let p = CanonicalParams::on_branch(b, 1.1, 5.9, 0.3, 4.0, 2.5, 2);
            assert_eq!(p.branch(), Some(b));
            assert!(residual_nlcc1(&p).norm() < 1e-12);
        }
    }
}
