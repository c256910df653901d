//! Photon statistics by two-dimensional quadrature over the heterodyne plane.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_2_PI, PI};
use num_traits::{Float, Zero};

use crate::canonical::CanonicalParams;
use crate::error::{Error, Result};
use crate::states::{self, WaveParams};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Rule {
    Trapezoid,
    GaussLegendre,
    /// Gauss–Legendre in `|z|` on `[0, R]` times the trapezoid rule in
    /// `arg z` with twice as many nodes. The angular sums become one
    /// discrete Fourier transform per ring, which is far cheaper than the
    /// square grid for large `n_max`.
    Polar,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureConfig {
    /// Box `|z1|, |z2| ≤ R`.
    pub half_extent: f64,
    pub points_per_axis: usize,
    pub rule: Rule,
    /// Largest allowed relative change under grid doubling.
    pub convergence_rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            half_extent: 8.0,
            points_per_axis: 128,
            rule: Rule::GaussLegendre,
            convergence_rel_tol: 1e-6,
        }
    }
}

impl QuadratureConfig {
    pub fn check(&self) -> Result<()> {
        if self.points_per_axis < 32 {
            return Err(Error::OutOfRange("points_per_axis must be at least 32".into()));
        }
        if !(self.half_extent >= 4.0) {
            return Err(Error::OutOfRange("half_extent must be at least 4".into()));
        }
        if !(self.convergence_rel_tol > 0.0) {
            return Err(Error::OutOfRange("convergence_rel_tol must be positive".into()));
        }
        Ok(())
    }

    /// Polar rule on `|z| ≤ R` with `R = 4 + √n̂`, widened to cover the
    /// Gaussian envelope of `|ψ|` out to about `e^{-40}`.
    pub fn for_state(w: &WaveParams) -> Self {
        let n_hat = states::mean_photon_estimate(w);
        let (z0, width) = states::envelope(w);
        let r = (4.0 + n_hat.sqrt()).max(z0.norm() + 6.5 * width);
        Self { half_extent: r.ceil(), rule: Rule::Polar, ..Self::default() }
    }

    pub fn doubled(&self) -> Self {
        Self { points_per_axis: 2 * self.points_per_axis, ..*self }
    }

    /// Nodes and weights on `[−R, R]` (on `[0, R]` for the polar rule).
    pub fn axis(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.half_extent;
        let (x, w) = match self.rule {
            Rule::GaussLegendre => gauss_legendre(self.points_per_axis),
            Rule::Trapezoid => trapezoid(self.points_per_axis),
            Rule::Polar => {
                let (x, w) = gauss_legendre(self.points_per_axis);
                let h = 0.5 * r;
                return (x.into_iter().map(|t| h * (t + 1.0)).collect(), w.into_iter().map(|t| t * h).collect());
            }
        };
        (x.into_iter().map(|t| t * r).collect(), w.into_iter().map(|t| t * r).collect())
    }

    /// Angular node count of the polar rule.
    pub fn angular_points(&self) -> usize {
        2 * self.points_per_axis
    }

    /// Every node `z` of the plane with its area weight.
    pub fn nodes(&self) -> Vec<(C64, f64)> {
        let (xs, ws) = self.axis();
        match self.rule {
            Rule::Polar => {
                let na = self.angular_points();
                let dphi = 2.0 * PI / na as f64;
                let mut out = Vec::with_capacity(xs.len() * na);
                for (&rho, &wr) in xs.iter().zip(&ws) {
                    for j in 0..na {
                        out.push((C64::from_polar(rho, dphi * j as f64), wr * rho * dphi));
                    }
                }
                out
            }
            _ => {
                let mut out = Vec::with_capacity(xs.len() * xs.len());
                for (&z1, &w1) in xs.iter().zip(&ws) {
                    for (&z2, &w2) in xs.iter().zip(&ws) {
                        out.push((C64::new(z1, z2), w1 * w2));
                    }
                }
                out
            }
        }
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    (x, w)
}

/// Composite trapezoid rule with `n` equally spaced points on `[−1, 1]`.
pub fn trapezoid(n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 / (n - 1) as f64;
    let x = (0..n).map(|i| -1.0 + h * i as f64).collect();
    let w = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    (x, w)
}

/// Generalized Laguerre polynomial `L_m^{(α)}(x)` by the three-term recurrence.
pub fn laguerre(m: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if m == 0 {
        return l0;
    }
    for k in 1..m {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 + a - x) * l1 - (kf + a) * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PndGrid {
    /// `P(n1, n2)` row-major, `(n_max+1)²` entries.
    values: Vec<f64>,
    pub n_max: usize,
    pub total_mass: f64,
    /// Largest relative change of any entry under grid doubling.
    pub convergence_estimate: f64,
}

impl PndGrid {
    /// Entries in `(−1e−12, 0)` are clipped to zero.
    pub fn new(n_max: usize, mut values: Vec<f64>, convergence_estimate: f64) -> Self {
        assert_eq!(values.len(), (n_max + 1) * (n_max + 1));
        for v in values.iter_mut() {
            if *v < 0.0 && *v > -1e-12 {
                *v = 0.0;
            }
        }
        let total_mass = kahan_sum(values.iter().copied());
        Self { values, n_max, total_mass, convergence_estimate }
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        if n1 > self.n_max || n2 > self.n_max {
            return 0.0;
        }
        self.values[n1 * (self.n_max + 1) + n2]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid cut down to `n ≤ n_max`.
    pub fn truncated(&self, n_max: usize) -> Self {
        let n = n_max.min(self.n_max);
        let mut v = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                v.push(self.get(i, j));
            }
        }
        Self::new(n, v, self.convergence_estimate)
    }

    /// `max |P(n1,n2) − P(n2,n1)|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=self.n_max {
            for j in 0..i {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Largest off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=self.n_max {
            for j in 0..=self.n_max {
                if i != j {
                    m = m.max(self.get(i, j));
                }
            }
        }
        m
    }

    /// Diagonal mass over total mass.
    pub fn diagonal_ratio(&self) -> f64 {
        kahan_sum((0..=self.n_max).map(|i| self.get(i, i))) / self.total_mass
    }

    /// Largest absolute difference over the shared index range.
    pub fn max_abs_diff(&self, other: &PndGrid) -> f64 {
        let n = self.n_max.min(other.n_max);
        let mut m: f64 = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                m = m.max((self.get(i, j) - other.get(i, j)).abs());
            }
        }
        m
    }
}

pub(crate) fn kahan_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in it {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// Nodes where `ln(|ψ|·weight)` is this far below its peak are skipped.
pub const NODE_CUTOFF: f64 = -60.0;

/// Fock amplitudes `⟨n1,n2|ψ⟩ = (2/π)∫d²z ⟨n1,n2|z⟩⟨z|ψ⟩` for `n1, n2 ≤ n_max`
/// on one quadrature grid, restricted to rows `n1 ∈ rows`.
///
/// Row-major `(rows.len(), n_max+1)` output.
pub fn fock_amplitudes_rows(
    w: &WaveParams,
    p: &CanonicalParams,
    n_max: usize,
    q: &QuadratureConfig,
    rows: core::ops::Range<usize>,
) -> Result<Vec<C64>> {
    q.check()?;
    let nn = n_max + 1;
    if rows.end > nn {
        return Err(Error::OutOfRange("row range beyond n_max".into()));
    }
    let mut acc = match q.rule {
        Rule::Polar => polar_sums(w, n_max, q, rows.clone()),
        _ => square_sums(w, n_max, q, rows.clone()),
    };
    for (ri, n1) in rows.enumerate() {
        for n2 in 0..nn {
            let m = n1.min(n2);
            let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
            let ph = C64::from_polar(FRAC_2_PI * sign, n1 as f64 * p.theta1 + n2 as f64 * p.theta2);
            acc[ri * nn + n2] *= ph;
        }
    }
    Ok(acc)
}

/// `√(m!/(m+k)!)` indexed `[k][m]`.
fn overlap_prefactors(n_max: usize) -> Vec<Vec<f64>> {
    let nn = n_max + 1;
    let lf = ln_factorials(2 * n_max + 1);
    (0..nn)
        .map(|k| (0..nn - k).map(|m| (0.5 * (lf[m] - lf[m + k])).exp()).collect())
        .collect()
}

/// `L_m^{(k)}(x)` for `m + k ≤ n_max`, indexed `[k][m]`.
fn laguerre_table(lag: &mut [Vec<f64>], x: f64) {
    let nn = lag.len();
    for (k, lk) in lag.iter_mut().enumerate() {
        let a = k as f64;
        let top = nn - k;
        lk[0] = 1.0;
        if top > 1 {
            lk[1] = 1.0 + a - x;
        }
        for m in 1..top.saturating_sub(1) {
            let mf = m as f64;
            lk[m + 1] = ((2.0 * mf + 1.0 + a - x) * lk[m] - (mf + a) * lk[m - 1]) / (mf + 1.0);
        }
    }
}

fn compensated_add(acc: &mut [C64], comp: &mut [C64], part: &[C64]) {
    for ((a, c), r) in acc.iter_mut().zip(comp.iter_mut()).zip(part) {
        let y = *r - *c;
        let t = *a + y;
        *c = (t - *a) - y;
        *a = t;
    }
}

/// `Σ_nodes ψ_β(z*) (√2|z|)^k e^{−|z|²} √(m!/(m+k)!) L_m^{(k)}(2|z|²) u^{±k}`
/// on the polar rule, with `u = z/|z|` and the sign set by `n1 > n2`.
fn polar_sums(w: &WaveParams, n_max: usize, q: &QuadratureConfig, rows: core::ops::Range<usize>) -> Vec<C64> {
    let nn = n_max + 1;
    let pref = overlap_prefactors(n_max);
    let (rs, rw) = q.axis();
    let na = q.angular_points();
    let dphi = 2.0 * PI / na as f64;
    // exact roots of unity, indexed by (k·j) mod na
    let roots: Vec<C64> = (0..na).map(|j| C64::from_polar(1.0, dphi * j as f64)).collect();
    let logs: Vec<C64> = rs
        .iter()
        .flat_map(|&rho| {
            (0..na).map(move |j| states::log_wavefunction(w, C64::from_polar(rho, -dphi * j as f64)))
        })
        .collect();
    let ring_max: Vec<f64> = logs.chunks(na).map(|c| c.iter().map(|e| e.re).fold(f64::NEG_INFINITY, f64::max)).collect();
    let ln_w: Vec<f64> = rs.iter().zip(&rw).map(|(r, w)| (r * w * dphi).ln()).collect();
    let peak = ring_max.iter().zip(&ln_w).map(|(a, b)| a + b).fold(f64::NEG_INFINITY, f64::max);

    let nrows = rows.len();
    let mut acc = vec![C64::zero(); nrows * nn];
    let mut comp = vec![C64::zero(); nrows * nn];
    let mut part = vec![C64::zero(); nrows * nn];
    let mut lag = vec![vec![0.0; nn]; nn];
    let mut plus = vec![C64::zero(); nn];
    let mut minus = vec![C64::zero(); nn];
    let half_ln2 = 0.5 * core::f64::consts::LN_2;
    for (i, &rho) in rs.iter().enumerate() {
        let top = ring_max[i];
        // |⟨n|z⟩| is O(1), so rings far below the peak of |ψ| cannot move
        // any amplitude
        if top + ln_w[i] < peak + NODE_CUTOFF {
            continue;
        }
        plus.iter_mut().for_each(|c| *c = C64::zero());
        minus.iter_mut().for_each(|c| *c = C64::zero());
        for (j, e) in logs[i * na..(i + 1) * na].iter().enumerate() {
            if e.re < top + NODE_CUTOFF {
                continue;
            }
            let v = (e - top).exp();
            let mut idx = 0;
            for k in 0..nn {
                let r = roots[idx];
                plus[k] += v * r;
                minus[k] += v * r.conj();
                idx += j;
                if idx >= na {
                    idx %= na;
                }
            }
        }
        let r2 = rho * rho;
        let lnr = rho.ln();
        for k in 0..nn {
            let lnmag = top + ln_w[i] - r2 + k as f64 * (half_ln2 + lnr);
            let mag = if lnmag < -745.0 { 0.0 } else { lnmag.exp() };
            plus[k] *= mag;
            minus[k] *= mag;
        }
        laguerre_table(&mut lag, 2.0 * r2);
        for (ri, n1) in rows.clone().enumerate() {
            let out = &mut part[ri * nn..(ri + 1) * nn];
            for (n2, o) in out.iter_mut().enumerate() {
                let (m, k) = if n1 <= n2 { (n1, n2 - n1) } else { (n2, n1 - n2) };
                // z*^{n1−m} z^{n2−m}
                *o = if n1 > n2 { minus[k] } else { plus[k] } * (pref[k][m] * lag[k][m]);
            }
        }
        compensated_add(&mut acc, &mut comp, &part);
    }
    acc
}

/// Same sums on the square grid.
fn square_sums(w: &WaveParams, n_max: usize, q: &QuadratureConfig, rows: core::ops::Range<usize>) -> Vec<C64> {
    let (xs, ws) = q.axis();
    let nn = n_max + 1;
    let half_ln2 = 0.5 * core::f64::consts::LN_2;
    let pref = overlap_prefactors(n_max);
    let nrows = rows.len();
    let mut acc = vec![C64::zero(); nrows * nn];
    let mut lag = vec![vec![0.0; nn]; nn];
    // ψ phase · (√2|z|)^k e^{E−|z|²} · u^k and the same with u* (u = z/|z|)
    let mut radial = vec![C64::zero(); nn];
    let mut radial_conj = vec![C64::zero(); nn];
    let mut row_acc = vec![C64::zero(); nrows * nn];
    let mut comp = vec![C64::zero(); nrows * nn];
    // ⟨z|ψ⟩ = ψ_β(z*) at every node, plus ln(weight)
    let npts = xs.len();
    let mut logs = Vec::with_capacity(npts * npts);
    for (ix, &z1) in xs.iter().enumerate() {
        for (iy, &z2) in xs.iter().enumerate() {
            let e = states::log_wavefunction(w, C64::new(z1, -z2));
            logs.push((e, (ws[ix] * ws[iy]).ln()));
        }
    }
    // |⟨n|z⟩| is O(1), so nodes far below the peak of |ψ| cannot move any
    // amplitude
    let peak = logs.iter().map(|(e, lw)| e.re + lw).fold(f64::NEG_INFINITY, f64::max);
    for (ix, &z1) in xs.iter().enumerate() {
        row_acc.iter_mut().for_each(|c| *c = C64::zero());
        for (iy, &z2) in xs.iter().enumerate() {
            let z = C64::new(z1, z2);
            let (e, lw) = logs[ix * npts + iy];
            if e.re + lw < peak + NODE_CUTOFF {
                continue;
            }
            let r2 = z.norm_sqr();
            let rz = r2.sqrt();
            let lnr = if rz > 0.0 { rz.ln() } else { f64::NEG_INFINITY };
            let u = if rz > 0.0 { z / rz } else { C64::new(1.0, 0.0) };
            // (√2|z|)^k e^{E − |z|²} u^k, one exponential per k
            let base = e.re - r2 + lw;
            let phase = C64::from_polar(1.0, e.im);
            let mut upow = C64::new(1.0, 0.0);
            for k in 0..nn {
                let lnmag = base + if k > 0 { k as f64 * (half_ln2 + lnr) } else { 0.0 };
                let mag = if lnmag < -745.0 { 0.0 } else { lnmag.exp() };
                radial[k] = phase * upow * mag;
                radial_conj[k] = phase * upow.conj() * mag;
                upow *= u;
            }
            laguerre_table(&mut lag, 2.0 * r2);
            for (ri, n1) in rows.clone().enumerate() {
                let out = &mut row_acc[ri * nn..(ri + 1) * nn];
                for (n2, o) in out.iter_mut().enumerate() {
                    let (m, k) = if n1 <= n2 { (n1, n2 - n1) } else { (n2, n1 - n2) };
                    let f = pref[k][m] * lag[k][m];
                    // z*^{n1−m} z^{n2−m}
                    *o += if n1 > n2 { radial_conj[k] } else { radial[k] } * f;
                }
            }
        }
        // compensated accumulation across node rows
        compensated_add(&mut acc, &mut comp, &row_acc);
    }
    acc
}

/// All Fock amplitudes up to `n_max` on one grid.
pub fn fock_amplitudes(w: &WaveParams, p: &CanonicalParams, n_max: usize, q: &QuadratureConfig) -> Result<Vec<C64>> {
    fock_amplitudes_rows(w, p, n_max, q, 0..n_max + 1)
}

/// Relative change floor: entries below this are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

fn probs(amps: &[C64]) -> Vec<f64> {
    amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Largest `|P − P'| / max(P', floor)`.
pub fn relative_change(coarse: &[f64], fine: &[f64]) -> f64 {
    coarse
        .iter()
        .zip(fine)
        .map(|(a, b)| (a - b).abs() / b.abs().max(REL_FLOOR))
        .fold(0.0, f64::max)
}

/// Assemble a PND from amplitudes on a grid and on the doubled grid.
pub fn pnd_from_amplitudes(n_max: usize, coarse: &[C64], fine: &[C64], q: &QuadratureConfig) -> Result<PndGrid> {
    let pc = probs(coarse);
    let pf = probs(fine);
    let conv = relative_change(&pc, &pf);
    let grid = PndGrid::new(n_max, pf, conv);
    if conv > q.convergence_rel_tol {
        return Err(Error::Convergence { what: "PND quadrature", residual: conv });
    }
    if grid.total_mass > 1.0 + 1e-6 {
        return Err(Error::Convergence { what: "PND mass above one", residual: grid.total_mass - 1.0 });
    }
    Ok(grid)
}

/// Computes all Fock amplitudes up to `n_max` on one grid; lets callers swap
/// in a parallel evaluation of [`fock_amplitudes`].
pub type AmplitudeFn<'a> = dyn Fn(&WaveParams, &CanonicalParams, usize, &QuadratureConfig) -> Result<Vec<C64>> + Sync + 'a;

/// `P(n1,n2) = |⟨n1,n2|ψ⟩|²` with a grid-doubling convergence check.
pub fn pnd(w: &WaveParams, p: &CanonicalParams, n_max: usize, q: &QuadratureConfig) -> Result<PndGrid> {
    pnd_with(w, p, n_max, q, &fock_amplitudes)
}

pub fn pnd_with(w: &WaveParams, p: &CanonicalParams, n_max: usize, q: &QuadratureConfig, amps: &AmplitudeFn) -> Result<PndGrid> {
    let coarse = amps(w, p, n_max, q)?;
    let fine = amps(w, p, n_max, &q.doubled())?;
    pnd_from_amplitudes(n_max, &coarse, &fine, q)
}

/// Mass deficit below which an automatically sized grid is accepted. Small
/// enough that the missing tail moves `⟨n⟩` by well under 1e−6.
pub const AUTO_MASS_TOL: f64 = 1e-10;
/// Finest base grid an automatic run will refine to.
pub const AUTO_MAX_POINTS: usize = 512;

/// PND with `n_max` and the box chosen from the state; `n_max` grows until
/// the grid holds `1 − AUTO_MASS_TOL` of the probability (or reaches
/// `n_cap`), and the grid is refined while the doubling check fails.
pub fn pnd_auto(w: &WaveParams, p: &CanonicalParams, n_cap: usize) -> Result<PndGrid> {
    pnd_auto_with(w, p, n_cap, &fock_amplitudes)
}

pub fn pnd_auto_with(w: &WaveParams, p: &CanonicalParams, n_cap: usize, amps: &AmplitudeFn) -> Result<PndGrid> {
    let mut q = QuadratureConfig::for_state(w);
    let mut n_max = crate::fock::FockCutoff::heuristic(states::mean_photon_estimate(w)).min(n_cap);
    loop {
        let g = match pnd_with(w, p, n_max, &q, amps) {
            Err(Error::Convergence { .. }) if q.points_per_axis < AUTO_MAX_POINTS => {
                q = q.doubled();
                continue;
            }
            r => r?,
        };
        if g.total_mass >= 1.0 - AUTO_MASS_TOL || n_max >= n_cap {
            return Ok(g);
        }
        n_max = (n_max + n_max / 2).min(n_cap);
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moments {
    pub mean_n1: f64,
    pub mean_n2: f64,
    pub mean_n1n2: f64,
    /// `⟨n1 n2⟩ / (⟨n1⟩⟨n2⟩)`; NaN when a mode is empty.
    pub g2_cross: f64,
}

/// Moments of the grid, normalized by its total mass.
pub fn moments(g: &PndGrid) -> Result<Moments> {
    if (g.total_mass - 1.0).abs() > 1e-4 {
        return Err(Error::Truncation { mass: g.total_mass });
    }
    let n = g.n_max;
    let it = || (0..=n).flat_map(move |i| (0..=n).map(move |j| (i as f64, j as f64, g.get(i, j))));
    let m1 = kahan_sum(it().map(|(i, _, p)| i * p)) / g.total_mass;
    let m2 = kahan_sum(it().map(|(_, j, p)| j * p)) / g.total_mass;
    let m12 = kahan_sum(it().map(|(i, j, p)| i * j * p)) / g.total_mass;
    let den = m1 * m2;
    Ok(Moments {
        mean_n1: m1,
        mean_n2: m2,
        mean_n1n2: m12,
        g2_cross: if den > 0.0 { m12 / den } else { f64::NAN },
    })
}

/// One row of a parameter sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub params: CanonicalParams,
    pub beta1: C64,
    pub beta2: C64,
    pub result: Result<(Moments, PndGrid)>,
}

/// Largest `n_max` a sweep will grow to.
pub const SWEEP_N_CAP: usize = 120;

/// Normalized wave parameters: closed form when available, else quadrature.
pub fn normalized_wave_params(p: &CanonicalParams, beta1: C64, beta2: C64) -> Result<WaveParams> {
    let w = states::wave_params(p, beta1, beta2)?;
    match states::normalize_analytic(&w) {
        Some(w) => Ok(w),
        None => states::normalize(&w, &QuadratureConfig::for_state(&w)),
    }
}

/// Moments at one parameter point.
pub fn evaluate_point(p: &CanonicalParams, beta1: C64, beta2: C64) -> Result<(Moments, PndGrid)> {
    evaluate_point_with(p, beta1, beta2, SWEEP_N_CAP, &fock_amplitudes)
}

pub fn evaluate_point_with(
    p: &CanonicalParams,
    beta1: C64,
    beta2: C64,
    n_cap: usize,
    amps: &AmplitudeFn,
) -> Result<(Moments, PndGrid)> {
    let w = normalized_wave_params(p, beta1, beta2)?;
    let g = pnd_auto_with(&w, p, n_cap, amps)?;
    let m = moments(&g)?;
    Ok((m, g))
}

/// Parameter sets of a `|γ|` sweep, in order.
pub fn gamma_sweep_points(template: &CanonicalParams, gammas: &[f64]) -> Vec<CanonicalParams> {
    gammas.iter().map(|&g| template.with_gamma(g)).collect()
}

/// Parameter sets of a `(θ1, θ2)` sweep, `θ1` outer. `φ = θ1 + θ2` and
/// `δ2 = φ + π − δ1` keep every point on the `DeltaPi_ThetaZero` branch.
pub fn theta_sweep_points(template: &CanonicalParams, theta1: &[f64], theta2: &[f64]) -> Vec<CanonicalParams> {
    let mut out = Vec::with_capacity(theta1.len() * theta2.len());
    for &t1 in theta1 {
        for &t2 in theta2 {
            let phi = t1 + t2;
            out.push(CanonicalParams::new(
                template.r,
                phi,
                template.gamma_mod,
                template.chi_mod,
                template.delta1,
                phi + PI - template.delta1,
                t1,
                t2,
                template.order,
            ));
        }
    }
    out
}

pub fn sweep_points(points: &[CanonicalParams], beta1: C64, beta2: C64) -> Vec<SweepRow> {
    points
        .iter()
        .map(|p| SweepRow { params: *p, beta1, beta2, result: evaluate_point(p, beta1, beta2) })
        .collect()
}

pub fn sweep_gamma(template: &CanonicalParams, beta1: C64, beta2: C64, gammas: &[f64]) -> Vec<SweepRow> {
    sweep_points(&gamma_sweep_points(template, gammas), beta1, beta2)
}

pub fn sweep_theta(
    template: &CanonicalParams,
    beta1: C64,
    beta2: C64,
    theta1: &[f64],
    theta2: &[f64],
) -> Vec<SweepRow> {
    sweep_points(&theta_sweep_points(template, theta1, theta2), beta1, beta2)
}

/// `(2/π)∫d²z |ψ(z)|²` on one grid.
pub fn norm_integral(w: &WaveParams, q: &QuadratureConfig) -> f64 {
    FRAC_2_PI * kahan_sum(q.nodes().into_iter().map(|(z, wt)| wt * (2.0 * states::log_wavefunction(w, z).re).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3, 1.7), 1.0);
        assert_abs_diff_eq!(laguerre(1, 3, 2.0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(laguerre(2, 1, 2.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = w.iter().sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
        // exact up to degree 13
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_abs_diff_eq!(i, 2.0 / 13.0, epsilon = 1e-14);
        let (x, w) = gauss_legendre(128);
        let g: f64 = x.iter().zip(&w).map(|(x, w)| w * (-(8.0 * x) * (8.0 * x)).exp() * 8.0).sum();
        assert_abs_diff_eq!(g, PI.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn trapezoid_matches_gauss_on_gaussian() {
        let q = QuadratureConfig { rule: Rule::Trapezoid, points_per_axis: 101, ..Default::default() };
        let (x, w) = q.axis();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (-x * x).exp()).sum();
        assert_abs_diff_eq!(s, PI.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn moments_need_mass() {
        let g = PndGrid::new(1, vec![0.5, 0.0, 0.0, 0.2], 0.0);
        assert!(matches!(moments(&g), Err(Error::Truncation { .. })));
        let g = PndGrid::new(1, vec![0.5, 0.0, 0.0, 0.5], 0.0);
        let m = moments(&g).unwrap();
        assert_eq!((m.mean_n1, m.mean_n2, m.mean_n1n2), (0.5, 0.5, 0.5));
        assert_eq!(m.g2_cross, 2.0);
    }

    #[test]
    fn polar_and_square_rules_agree() {
        let p = CanonicalParams::new(0.8, 0.0, 0.1, 0.1, PI, 0.0, 0.0, 0.0, 2);
        let w = states::wave_params(&p, C64::new(0.5, 0.0), C64::new(0.0, -0.3)).unwrap();
        let w = states::normalize_analytic(&w).unwrap();
        let polar = QuadratureConfig::for_state(&w);
        assert_eq!(polar.rule, Rule::Polar);
        let square = QuadratureConfig { rule: Rule::GaussLegendre, ..polar };
        let a = pnd(&w, &p, 10, &polar).unwrap();
        let b = pnd(&w, &p, 10, &square).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
        assert_abs_diff_eq!(norm_integral(&w, &polar), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm_integral(&w, &square), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn clipping() {
        let g = PndGrid::new(0, vec![-1e-13], 0.0);
        assert_eq!(g.get(0, 0), 0.0);
    }
}
