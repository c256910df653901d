//! Transformed mode operators `b1`, `b2` and the four-photon Hamiltonian.

use num_traits::Float;

use crate::canonical::{validate, CanonicalBranch, CanonicalParams};
use crate::error::{Error, Result};
use crate::fock::{make_mode_operators, FockCutoff, FockOperator};
use crate::C64;

/// Validation tolerance used before building operators.
pub const CANONICAL_TOL: f64 = 1e-9;

/// Coefficient of `a1†a1a2†a2` in units of `C0`.
///
/// Expanding `b1†b1 + b2†b2` gives `2|γ|² = 4·C0` for this monomial; the
/// printed Hamiltonian carries `2·C0`, which breaks the identity
/// `H = b1†b1 + b2†b2` at order `|γ|²`.
pub const KERR_CROSS_FACTOR: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct HamiltonianCoefficients {
    pub A0: f64,
    pub B0: f64,
    pub C0: f64,
    pub D1: C64,
    pub D2: C64,
    pub D2p: C64,
    pub D3: C64,
    pub D3p: C64,
    pub D4: C64,
    pub D5: C64,
}

impl HamiltonianCoefficients {
    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Self { A0: 0.0, B0: 0.0, C0: 0.0, D1: z, D2: z, D2p: z, D3: z, D3p: z, D4: z, D5: z }
    }

    /// Named complex coefficients in a fixed order (real ones as `re + 0i`).
    pub fn entries(&self) -> [(&'static str, C64); 10] {
        [
            ("A0", C64::new(self.A0, 0.0)),
            ("B0", C64::new(self.B0, 0.0)),
            ("C0", C64::new(self.C0, 0.0)),
            ("D1", self.D1),
            ("D2", self.D2),
            ("D2p", self.D2p),
            ("D3", self.D3),
            ("D3p", self.D3p),
            ("D4", self.D4),
            ("D5", self.D5),
        ]
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a.1 - b.1).norm())
            .fold(0.0, f64::max)
    }
}

/// Coefficients for `F(ζ) = ζ²` at arbitrary canonical angles.
pub fn generic_coefficients(p: &CanonicalParams) -> Result<HamiltonianCoefficients> {
    if p.order != 2 {
        return Err(Error::UnsupportedOrder(p.order));
    }
    let (mu, nu) = (p.mu(), p.nu());
    let (mus, nus) = (mu.conj(), nu.conj());
    let g = p.gamma_mod;
    let g2 = g * g;
    let (t1, t2, d1, d2) = (p.theta1, p.theta2, p.delta1, p.delta2);
    let e = |x: f64| C64::from_polar(1.0, x);
    Ok(HamiltonianCoefficients {
        A0: g2 + 2.0 * nu.norm_sqr(),
        B0: mu.norm_sqr() + nu.norm_sqr() + 2.0 * g2,
        C0: 0.5 * g2,
        D1: 2.0 * mus * nu + 2.0 * g2 * e(t1 + t2),
        D2: g * e(t1)
            * (0.5 * e(t1 - d2) * mu + e(-(t2 + d2)) * nu + e(-(t2 - d1)) * mus
                + 0.5 * e(t1 + d1) * nus),
        D2p: g * e(t2)
            * (0.5 * e(t2 - d1) * mu + e(-(t1 + d1)) * nu + e(-(t1 - d2)) * mus
                + 0.5 * e(t2 + d2) * nus),
        D3: 0.5 * g * e(2.0 * t1) * (e(d1) * mus + e(-d2) * nu),
        D3p: 0.5 * g * e(2.0 * t2) * (e(d2) * mus + e(-d1) * nu),
        D4: 0.5 * g2 * e(2.0 * (t1 + t2)),
        D5: g2 * e(t1 + t2),
    })
}

/// Reduced coefficients on the branch `δ1+δ2−φ = 0`, `θ1+θ2−φ = π`.
pub fn specialized_coefficients(p: &CanonicalParams) -> Result<HamiltonianCoefficients> {
    if p.order != 2 {
        return Err(Error::UnsupportedOrder(p.order));
    }
    if p.branch() != Some(CanonicalBranch::DeltaZero_ThetaPi) {
        return Err(Error::Branch(alloc::format!(
            "specialized table needs DeltaZero_ThetaPi, got {:?}",
            p.branch()
        )));
    }
    let (r, phi, g) = (p.r, p.phi, p.gamma_mod);
    let g2 = g * g;
    let er = r.exp();
    let e = |x: f64| C64::from_polar(1.0, x);
    let (mu, nu) = (p.mu(), p.nu());
    Ok(HamiltonianCoefficients {
        A0: g2 + 2.0 * nu.norm_sqr(),
        B0: mu.norm_sqr() + nu.norm_sqr() + 2.0 * g2,
        C0: 0.5 * g2,
        D1: e(phi) * ((2.0 * r).sinh() - 2.0 * g2),
        D2: -0.5 * g * er * e(2.0 * p.theta1 - p.delta2),
        D2p: -0.5 * g * er * e(2.0 * p.theta2 - p.delta1),
        D3: 0.5 * g * er * e(2.0 * p.theta1 + p.delta1),
        D3p: 0.5 * g * er * e(2.0 * p.theta2 + p.delta2),
        D4: 0.5 * g2 * e(2.0 * phi),
        D5: -g2 * e(phi),
    })
}

/// Hermitian matrix of the four-photon Hamiltonian.
pub fn build_fock_hamiltonian(c: &HamiltonianCoefficients, cutoff: FockCutoff) -> Result<FockOperator> {
    if cutoff.n_min() < 4 {
        return Err(Error::InvalidCutoff { n1_max: cutoff.n1_max, n2_max: cutoff.n2_max });
    }
    let (a1, a2) = make_mode_operators(cutoff)?;
    let (c1, c2) = (a1.adjoint(), a2.adjoint());
    let id = FockOperator::identity(cutoff);
    let pr = |ops: &[&FockOperator]| FockOperator::product(ops);
    let n1 = pr(&[&c1, &a1])?;
    let n2 = pr(&[&c2, &a2])?;
    let re = |x: f64| C64::new(x, 0.0);

    let m_d1 = pr(&[&c1, &c2])?;
    let m_d2 = pr(&[&c1, &c1, &a2])?;
    let m_d2p = pr(&[&a1, &c2, &c2])?;
    let m_d3 = pr(&[&c1, &c1, &c1])?;
    let m_d3p = pr(&[&c2, &c2, &c2])?;
    let m_d4 = pr(&[&c1, &c1, &c2, &c2])?;
    let m_d5 = pr(&[&c1, &c1, &a1, &c2])?.add(&pr(&[&c1, &c2, &c2, &a2])?)?;
    let x = FockOperator::linear_combination(&[
        (c.D1, &m_d1),
        (c.D2, &m_d2),
        (c.D2p, &m_d2p),
        (c.D3, &m_d3),
        (c.D3p, &m_d3p),
        (c.D4, &m_d4),
        (c.D5, &m_d5),
    ])?;
    let xd = x.adjoint();

    let k11 = pr(&[&c1, &c1, &a1, &a1])?;
    let k22 = pr(&[&c2, &c2, &a2, &a2])?;
    let k12 = n1.compose(&n2)?;
    FockOperator::linear_combination(&[
        (re(c.A0), &id),
        (re(c.B0), &n1),
        (re(c.B0), &n2),
        (re(c.C0), &k11),
        (re(c.C0), &k22),
        (re(KERR_CROSS_FACTOR * c.C0), &k12),
        (re(1.0), &x),
        (re(1.0), &xd),
    ])
}

#[derive(Clone, Debug)]
pub struct TransformedModes {
    pub b1: FockOperator,
    pub b2: FockOperator,
    pub params: CanonicalParams,
    pub cutoff: FockCutoff,
}

/// Heterodyne operator `Z = (e^{−iθ2}a2 + e^{iθ1}a1†)/√2`.
pub fn heterodyne_operator(p: &CanonicalParams, cutoff: FockCutoff) -> Result<FockOperator> {
    let (a1, a2) = make_mode_operators(cutoff)?;
    FockOperator::linear_combination(&[(p.alpha(), &a2), (p.beta(), &a1.adjoint())])
}

fn power(op: &FockOperator, n: u32) -> Result<FockOperator> {
    let mut out = FockOperator::identity(op.cutoff());
    for _ in 0..n {
        out = out.compose(op)?;
    }
    Ok(out)
}

/// `b1 = μa1 + νa2† + γZⁿ`, `b2 = μa2 + νa1† + χZ†ⁿ`.
pub fn build_transformed_modes(p: &CanonicalParams, cutoff: FockCutoff) -> Result<TransformedModes> {
    if let Some(e) = validate(p, CANONICAL_TOL).to_error() {
        return Err(e);
    }
    if p.order == 0 || 2 * p.order as usize + 2 > cutoff.n_min() {
        return Err(Error::OutOfRange(alloc::format!(
            "order {} needs a cutoff of at least {}",
            p.order,
            2 * p.order + 2
        )));
    }
    let (a1, a2) = make_mode_operators(cutoff)?;
    let z = heterodyne_operator(p, cutoff)?;
    let zn = power(&z, p.order)?;
    let zdn = zn.adjoint();
    let b1 = FockOperator::linear_combination(&[(p.mu(), &a1), (p.nu(), &a2.adjoint()), (p.gamma(), &zn)])?;
    let b2 = FockOperator::linear_combination(&[(p.mu(), &a2), (p.nu(), &a1.adjoint()), (p.chi(), &zdn)])?;
    Ok(TransformedModes { b1, b2, params: *p, cutoff })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorResiduals {
    /// `‖P([b1,b1†] − I)P‖∞`
    pub b1_b1dag: f64,
    /// `‖P([b2,b2†] − I)P‖∞`
    pub b2_b2dag: f64,
    /// `‖P[b1,b2]P‖∞`
    pub b1_b2: f64,
    /// `‖P[b1,b2†]P‖∞`
    pub b1_b2dag: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.b1_b1dag.max(self.b2_b2dag).max(self.b1_b2).max(self.b1_b2dag)
    }
}

impl TransformedModes {
    /// Margin `2·(2n)` shells used for identities involving `b†b`.
    pub fn default_margin(&self) -> usize {
        4 * self.params.order as usize
    }

    /// Canonical commutators projected onto `n1 + n2 ≤ max_total`.
    pub fn commutator_residuals(&self, max_total: usize) -> Result<CommutatorResiduals> {
        let id = FockOperator::identity(self.cutoff);
        let b1d = self.b1.adjoint();
        let b2d = self.b2.adjoint();
        Ok(CommutatorResiduals {
            b1_b1dag: self.b1.commutator(&b1d)?.sub(&id)?.projected_inf_norm(max_total),
            b2_b2dag: self.b2.commutator(&b2d)?.sub(&id)?.projected_inf_norm(max_total),
            b1_b2: self.b1.commutator(&self.b2)?.projected_inf_norm(max_total),
            b1_b2dag: self.b1.commutator(&b2d)?.projected_inf_norm(max_total),
        })
    }

    /// `b1†b1 + b2†b2`.
    pub fn number_sum(&self) -> Result<FockOperator> {
        self.b1.adjoint().compose(&self.b1)?.add(&self.b2.adjoint().compose(&self.b2)?)
    }
}

/// `‖P(b1†b1 + b2†b2 − H)P‖∞` on `n1 + n2 ≤ max_total`.
pub fn identity_residual(
    modes: &TransformedModes,
    coeffs: &HamiltonianCoefficients,
    max_total: usize,
) -> Result<f64> {
    let h = build_fock_hamiltonian(coeffs, modes.cutoff)?;
    Ok(modes.number_sum()?.sub(&h)?.projected_inf_norm(max_total))
}
