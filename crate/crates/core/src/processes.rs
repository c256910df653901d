//! Multiphoton interaction terms allowed by energy conservation and phase
//! matching, and the pump designs that select them.
//!
//! Couplings `κ^{js}_{lm}` are symbolic: only the products they must take
//! are computed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianCoefficients, KERR_CROSS_FACTOR};
use crate::C64;

/// Largest integer coefficient tried by the incommensurability check.
pub const MAX_RELATION: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pump {
    pub omega: f64,
    pub wavevector: [f64; 3],
    pub amplitude: C64,
}

impl Pump {
    /// Collinear pump along `z` with `|k| = Ω` and unit amplitude.
    pub fn collinear(omega: f64) -> Self {
        Self { omega, wavevector: [0.0, 0.0, omega], amplitude: C64::new(1.0, 0.0) }
    }
}

/// Two pumps whose frequencies must add to `sum`; `fraction` of it goes to
/// the first.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PumpPair {
    pub first: usize,
    pub second: usize,
    pub sum: f64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PumpSet {
    pub pumps: Vec<Pump>,
    pub pairs: Vec<PumpPair>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PumpRef {
    /// Position in `PumpSet::pumps`.
    pub index: usize,
    /// A conjugated pump field `E*` is emitted (creation side).
    pub conjugated: bool,
}

/// Monomial `a1†ʲ a2†ˢ a1ˡ a2ᵐ` times pump fields.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProcessTerm {
    pub j: u32,
    pub s: u32,
    pub l: u32,
    pub m: u32,
    pub order: u32,
    pub pumps: Vec<PumpRef>,
}

impl ProcessTerm {
    pub fn exponents(&self) -> (u32, u32, u32, u32) {
        (self.j, self.s, self.l, self.m)
    }

    pub fn kappa_label(&self) -> String {
        format!("k^{{{}{}}}_{{{}{}}}", self.j, self.s, self.l, self.m)
    }

    /// Creation-side minus annihilation-side frequency.
    pub fn energy_mismatch(&self, omega: (f64, f64), pumps: &PumpSet) -> f64 {
        let mut d = self.j as f64 * omega.0 + self.s as f64 * omega.1
            - self.l as f64 * omega.0
            - self.m as f64 * omega.1;
        for r in &self.pumps {
            let w = pumps.pumps[r.index].omega;
            d += if r.conjugated { w } else { -w };
        }
        d
    }
}

/// `Σ_{i∈lhs} ω_{k_i} = Σ_{i∈rhs} ω_{k_i}` over `order + 1` frequencies.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrequencyRelation {
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
    pub order: u32,
}

/// Distinct ways an order-`n` process can split its `n + 1` frequencies into
/// two balanced groups, up to swapping the sides.
pub fn splitting_conditions(order: u32) -> Result<Vec<FrequencyRelation>> {
    if !(2..=5).contains(&order) {
        return Err(Error::OutOfRange(format!("splitting conditions for order {order}")));
    }
    let total = order as usize + 1;
    Ok((1..=total / 2)
        .map(|s| FrequencyRelation { lhs: (0..s).collect(), rhs: (s..total).collect(), order })
        .collect())
}

/// Default balance tolerance `1e−9 · max frequency`.
pub fn default_tol(omega: (f64, f64), pumps: &PumpSet) -> f64 {
    let m = pumps.pumps.iter().map(|p| p.omega).fold(omega.0.max(omega.1), f64::max);
    1e-9 * m
}

/// Rejects `q1 ω1 = q2 ω2` for `q1, q2 ≤ 6`.
pub fn check_incommensurate(omega: (f64, f64), tol: f64) -> Result<()> {
    if !(omega.0 > 0.0 && omega.1 > 0.0) {
        return Err(Error::OutOfRange("mode frequencies must be positive".into()));
    }
    for q1 in 1..=MAX_RELATION {
        for q2 in 1..=MAX_RELATION {
            if (q1 as f64 * omega.0 - q2 as f64 * omega.1).abs() <= tol {
                return Err(Error::Commensurate { q1, q2 });
            }
        }
    }
    Ok(())
}

/// Which pump recipe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PumpDesign {
    /// Twelve pumps realizing the four-photon Hamiltonian.
    FourPhoton,
    /// Eight pumps realizing the cubic generator of the states.
    Hempss,
}

impl PumpDesign {
    /// Required pair sums in order.
    pub fn sums(self, w1: f64, w2: f64) -> Vec<f64> {
        match self {
            PumpDesign::FourPhoton => vec![
                w1 + w2,
                2.0 * (w1 + w2),
                3.0 * w1,
                3.0 * w2,
                2.0 * w1 - w2,
                2.0 * w2 - w1,
            ],
            PumpDesign::Hempss => vec![3.0 * w1, 3.0 * w2, 2.0 * w1 - w2, 2.0 * w2 - w1],
        }
    }
}

/// Pump set for a design. `fractions` defaults to 1/2 for every pair.
pub fn pump_design(design: PumpDesign, w1: f64, w2: f64, fractions: Option<&[f64]>) -> Result<PumpSet> {
    check_incommensurate((w1, w2), 1e-9 * w1.max(w2))?;
    let sums = design.sums(w1, w2);
    if let Some(f) = fractions {
        if f.len() != sums.len() {
            return Err(Error::OutOfRange(format!("{} fractions for {} pump pairs", f.len(), sums.len())));
        }
    }
    let mut pumps = Vec::with_capacity(2 * sums.len());
    let mut pairs = Vec::with_capacity(sums.len());
    for (k, &sum) in sums.iter().enumerate() {
        if !(sum > 0.0) {
            return Err(Error::Infeasible(format!(
                "pair {} needs Ω{} + Ω{} = {sum}",
                k + 1,
                2 * k + 1,
                2 * k + 2
            )));
        }
        let f = fractions.map_or(0.5, |f| f[k]);
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::OutOfRange(format!("splitting fraction {f} outside (0, 1)")));
        }
        pairs.push(PumpPair { first: 2 * k, second: 2 * k + 1, sum, fraction: f });
        pumps.push(Pump::collinear(f * sum));
        pumps.push(Pump::collinear((1.0 - f) * sum));
    }
    Ok(PumpSet { pumps, pairs })
}

pub fn pump_design_four_photon(w1: f64, w2: f64) -> Result<PumpSet> {
    pump_design(PumpDesign::FourPhoton, w1, w2, None)
}

pub fn pump_design_hempss(w1: f64, w2: f64) -> Result<PumpSet> {
    pump_design(PumpDesign::Hempss, w1, w2, None)
}

/// Exponent tuples with the given total, each at most `cap`.
fn tuples(total: u32, cap: u32) -> Vec<(u32, u32, u32, u32)> {
    let mut out = Vec::new();
    for j in 0..=total.min(cap) {
        for s in 0..=(total - j).min(cap) {
            for l in 0..=(total - j - s).min(cap) {
                let m = total - j - s - l;
                if m <= cap {
                    out.push((j, s, l, m));
                }
            }
        }
    }
    out
}

/// One member of each hermitian-conjugate pair: more creators than
/// annihilators, or equal counts and `(j, s) ≥ (l, m)`.
fn creation_dominant(j: u32, s: u32, l: u32, m: u32) -> bool {
    j + s > l + m || (j + s == l + m && (j, s) >= (l, m))
}

/// Options for [`enumerate_terms`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnumerateOptions {
    pub max_mode_exponent: u32,
    /// Frequency balance tolerance; `None` uses [`default_tol`].
    pub tol: Option<f64>,
    /// Emit pump-free self- and cross-Kerr terms at order 3.
    pub include_kerr: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self { max_mode_exponent: 4, tol: None, include_kerr: true }
    }
}

/// Terms of susceptibility order `order` that survive the rotating-wave
/// average. Each pumped term uses one declared pump pair, both absorbed or
/// both emitted.
pub fn enumerate_terms(order: u32, omega: (f64, f64), pumps: &PumpSet, opts: &EnumerateOptions) -> Result<Vec<ProcessTerm>> {
    if order < 2 {
        return Err(Error::OutOfRange(format!("susceptibility order {order}")));
    }
    let tol = opts.tol.unwrap_or_else(|| default_tol(omega, pumps));
    check_incommensurate(omega, tol)?;
    for pair in &pumps.pairs {
        if pair.first >= pumps.pumps.len() || pair.second >= pumps.pumps.len() {
            return Err(Error::Incomplete(format!("pump pair ({}, {}) out of range", pair.first, pair.second)));
        }
    }
    let mut out = Vec::new();
    let cap = opts.max_mode_exponent;
    // At order 2 there are only three fields, so a pair acts as one
    // effective pump at its sum frequency.
    let pumped_modes = if order == 2 { 2 } else { order - 1 };
    let mut push = |t: ProcessTerm| {
        if creation_dominant(t.j, t.s, t.l, t.m) && t.energy_mismatch(omega, pumps).abs() <= tol {
            out.push(t);
        }
    };
    for pair in &pumps.pairs {
        for conjugated in [false, true] {
            for (j, s, l, m) in tuples(pumped_modes, cap) {
                push(ProcessTerm {
                    j,
                    s,
                    l,
                    m,
                    order,
                    pumps: vec![
                        PumpRef { index: pair.first, conjugated },
                        PumpRef { index: pair.second, conjugated },
                    ],
                });
            }
        }
    }
    if opts.include_kerr && order == 3 {
        for (j, s, l, m) in tuples(order + 1, cap) {
            push(ProcessTerm { j, s, l, m, order, pumps: Vec::new() });
        }
    }
    out.sort_by(|a, b| (a.exponents(), &a.pumps).cmp(&(b.exponents(), &b.pumps)));
    Ok(out)
}

/// Terms over several orders, sorted by `(j, s, l, m)`.
pub fn enumerate_orders(orders: &[u32], omega: (f64, f64), pumps: &PumpSet, opts: &EnumerateOptions) -> Result<Vec<ProcessTerm>> {
    let mut out = Vec::new();
    for &n in orders {
        out.extend(enumerate_terms(n, omega, pumps, opts)?);
    }
    out.sort_by(|a, b| (a.exponents(), a.order, &a.pumps).cmp(&(b.exponents(), b.order, &b.pumps)));
    Ok(out)
}

/// `|Σ k_creation − Σ k_annihilation|`, pumps included on the side their
/// conjugation puts them.
pub fn check_phase_matching(t: &ProcessTerm, mode_k: ([f64; 3], [f64; 3]), pumps: &PumpSet) -> Result<f64> {
    let mut d = [0.0; 3];
    for ax in 0..3 {
        d[ax] = (t.j as f64 - t.l as f64) * mode_k.0[ax] + (t.s as f64 - t.m as f64) * mode_k.1[ax];
    }
    for r in &t.pumps {
        let p = pumps
            .pumps
            .get(r.index)
            .ok_or_else(|| Error::Incomplete(format!("no wavevector for pump {}", r.index)))?;
        let sgn = if r.conjugated { 1.0 } else { -1.0 };
        for ax in 0..3 {
            d[ax] += sgn * p.wavevector[ax];
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::Incomplete("non-finite wavevector".into()));
    }
    Ok((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt())
}

/// Coupling a term must supply.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingEntry {
    pub exponents: (u32, u32, u32, u32),
    pub kappa: String,
    /// Required value of `κ · Π E` (with conjugates as in the term).
    pub required_product: C64,
    /// Name of the Hamiltonian coefficient it reproduces.
    pub source: String,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KerrRatio {
    /// `κ²⁰₂₀ / κ¹¹₁₁` implied by the target.
    pub self_over_cross: f64,
    /// Ratio the planner was asked to check against.
    pub expected: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingAssignment {
    pub entries: Vec<CouplingEntry>,
    pub kerr: Option<KerrRatio>,
}

/// Monomials of the four-photon Hamiltonian beyond the number terms, with
/// their coefficients.
pub fn hamiltonian_monomials(c: &HamiltonianCoefficients) -> Vec<((u32, u32, u32, u32), &'static str, C64)> {
    let re = |x: f64| C64::new(x, 0.0);
    vec![
        ((0, 2, 0, 2), "C0", re(c.C0)),
        ((0, 2, 1, 0), "D2p", c.D2p),
        ((0, 3, 0, 0), "D3p", c.D3p),
        ((1, 1, 0, 0), "D1", c.D1),
        ((1, 1, 1, 1), "C0", re(KERR_CROSS_FACTOR * c.C0)),
        ((1, 2, 0, 1), "D5", c.D5),
        ((2, 0, 0, 1), "D2", c.D2),
        ((2, 0, 2, 0), "C0", re(c.C0)),
        ((2, 1, 1, 0), "D5", c.D5),
        ((2, 2, 0, 0), "D4", c.D4),
        ((3, 0, 0, 0), "D3", c.D3),
    ]
}

/// Paper's stated Kerr ratio `κ²⁰₂₀ ≈ 2κ¹¹₁₁`.
pub const PAPER_KERR_RATIO: f64 = 2.0;

/// Required coupling products for `terms` to reproduce `target`.
pub fn match_couplings(target: &HamiltonianCoefficients, terms: &[ProcessTerm], ratio_tol: f64) -> Result<CouplingAssignment> {
    let mut missing = Vec::new();
    let mut entries = Vec::new();
    for (e, name, coef) in hamiltonian_monomials(target) {
        let found = terms.iter().find(|t| t.exponents() == e);
        match found {
            Some(t) => entries.push(CouplingEntry {
                exponents: e,
                kappa: t.kappa_label(),
                required_product: coef,
                source: name.into(),
            }),
            None if coef.norm() > 0.0 => missing.push(e),
            None => {}
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage(missing));
    }
    let kerr = (target.C0 != 0.0).then(|| {
        let r = 1.0 / KERR_CROSS_FACTOR;
        KerrRatio {
            self_over_cross: r,
            expected: PAPER_KERR_RATIO,
            tolerance: ratio_tol,
            consistent: ((r - PAPER_KERR_RATIO) / PAPER_KERR_RATIO).abs() <= ratio_tol,
        }
    });
    Ok(CouplingAssignment { entries, kerr })
}
