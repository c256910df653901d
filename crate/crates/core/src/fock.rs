//! Truncated two-mode Fock space.
//!
//! Basis states `|n1, n2⟩` with `n1 ≤ n1_max`, `n2 ≤ n2_max` are stored
//! row-major in `n1`: flat index `n1·(n2_max+1) + n2`.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::statistics::PndGrid;
use crate::C64;

/// Fill fraction above which operators are stored densely.
pub const DENSE_FILL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockCutoff {
    pub n1_max: usize,
    pub n2_max: usize,
}

impl FockCutoff {
    pub fn new(n1_max: usize, n2_max: usize) -> Result<Self> {
        if n1_max == 0 || n2_max == 0 {
            return Err(Error::InvalidCutoff { n1_max, n2_max });
        }
        Ok(Self { n1_max, n2_max })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    /// Per-mode cutoff `⌈μ̂ + 8√μ̂ + 10⌉` for an estimated mean photon number.
    pub fn heuristic(mean_photons: f64) -> usize {
        let m = mean_photons.max(0.0);
        (m + 8.0 * m.sqrt() + 10.0).ceil() as usize
    }

    pub fn dim(&self) -> usize {
        (self.n1_max + 1) * (self.n2_max + 1)
    }

    #[inline]
    pub fn index(&self, n1: usize, n2: usize) -> usize {
        debug_assert!(n1 <= self.n1_max && n2 <= self.n2_max);
        n1 * (self.n2_max + 1) + n2
    }

    #[inline]
    pub fn levels(&self, idx: usize) -> (usize, usize) {
        (idx / (self.n2_max + 1), idx % (self.n2_max + 1))
    }

    /// Largest total photon number with no truncation at all, `min(n1_max, n2_max)`.
    pub fn n_min(&self) -> usize {
        self.n1_max.min(self.n2_max)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::Dimension {
                left: (self.n1_max, self.n2_max),
                right: (other.n1_max, other.n2_max),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    cutoff: FockCutoff,
    amplitudes: Vec<C64>,
}

impl FockState {
    pub fn zero(cutoff: FockCutoff) -> Self {
        Self { cutoff, amplitudes: vec![C64::zero(); cutoff.dim()] }
    }

    pub fn basis(cutoff: FockCutoff, n1: usize, n2: usize) -> Self {
        let mut s = Self::zero(cutoff);
        s.amplitudes[cutoff.index(n1, n2)] = C64::new(1.0, 0.0);
        s
    }

    /// The two-mode vacuum `|00⟩`.
    pub fn vacuum(cutoff: FockCutoff) -> Self {
        Self::basis(cutoff, 0, 0)
    }

    pub fn from_amplitudes(cutoff: FockCutoff, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != cutoff.dim() {
            return Err(Error::OutOfRange(alloc::format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                cutoff.dim()
            )));
        }
        Ok(Self { cutoff, amplitudes })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> C64 {
        self.amplitudes[self.cutoff.index(n1, n2)]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|c| *c /= n);
        }
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.cutoff.check(&other.cutoff)?;
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// Multiply by the phase that makes the largest-magnitude amplitude real
    /// and positive. Ties go to the lowest flat index.
    pub fn fix_global_phase(mut self) -> Self {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (k, c) in self.amplitudes.iter().enumerate() {
            let a = c.norm();
            if a > best_abs {
                best_abs = a;
                best = k;
            }
        }
        if best_abs > 0.0 {
            let ph = self.amplitudes[best].conj() / best_abs;
            self.amplitudes.iter_mut().for_each(|c| *c *= ph);
        }
        self
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    /// Compressed sparse rows; column indices ascending within each row.
    Sparse { row_ptr: Vec<usize>, cols: Vec<usize>, vals: Vec<C64> },
    /// Row-major dense matrix.
    Dense(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    cutoff: FockCutoff,
    storage: Storage,
}

/// Ladder operators `(a1, a2)` on the truncated basis.
pub fn make_mode_operators(cutoff: FockCutoff) -> Result<(FockOperator, FockOperator)> {
    let c = FockCutoff::new(cutoff.n1_max, cutoff.n2_max)?;
    let a1 = FockOperator::from_fn(c, |n1, n2| {
        (n1 > 0).then(|| (c.index(n1 - 1, n2), C64::new((n1 as f64).sqrt(), 0.0)))
    });
    let a2 = FockOperator::from_fn(c, |n1, n2| {
        (n2 > 0).then(|| (c.index(n1, n2 - 1), C64::new((n2 as f64).sqrt(), 0.0)))
    });
    Ok((a1, a2))
}

impl FockOperator {
    /// Build an operator with at most one nonzero per column: `f(n1, n2)`
    /// gives the row and value for column `|n1, n2⟩`.
    fn from_fn<F>(cutoff: FockCutoff, f: F) -> Self
    where F: Fn(usize, usize) -> Option<(usize, C64)>
    {
        let dim = cutoff.dim();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for col in 0..dim {
            let (n1, n2) = cutoff.levels(col);
            if let Some((row, v)) = f(n1, n2) {
                rows[row].push((col, v));
            }
        }
        Self::from_rows(cutoff, rows)
    }

    pub fn zero(cutoff: FockCutoff) -> Self {
        Self {
            cutoff,
            storage: Storage::Sparse {
                row_ptr: vec![0; cutoff.dim() + 1],
                cols: Vec::new(),
                vals: Vec::new(),
            },
        }
    }

    pub fn identity(cutoff: FockCutoff) -> Self {
        let rows = (0..cutoff.dim()).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect();
        Self::from_rows(cutoff, rows)
    }

    /// Diagonal operator with entries `f(n1, n2)`.
    pub fn diagonal<F: Fn(usize, usize) -> C64>(cutoff: FockCutoff, f: F) -> Self {
        let rows = (0..cutoff.dim())
            .map(|i| {
                let (n1, n2) = cutoff.levels(i);
                vec![(i, f(n1, n2))]
            })
            .collect();
        Self::from_rows(cutoff, rows)
    }

    /// Dense operator from a row-major matrix.
    pub fn from_dense(cutoff: FockCutoff, data: Vec<C64>) -> Result<Self> {
        let dim = cutoff.dim();
        if data.len() != dim * dim {
            return Err(Error::OutOfRange(alloc::format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        let rows = (0..dim)
            .map(|i| {
                (0..dim).filter_map(|j| {
                    let v = data[i * dim + j];
                    (v != C64::zero()).then_some((j, v))
                })
                .collect()
            })
            .collect();
        Ok(Self::from_rows(cutoff, rows))
    }

    /// Rows must have ascending, distinct column indices. Exact zeros are
    /// dropped; storage becomes dense when the fill exceeds 25%.
    fn from_rows(cutoff: FockCutoff, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let dim = cutoff.dim();
        let nnz: usize = rows.iter()
            .map(|r| r.iter().filter(|(_, v)| *v != C64::zero()).count())
            .sum();
        if (nnz as f64) > DENSE_FILL * (dim as f64) * (dim as f64) {
            let mut data = vec![C64::zero(); dim * dim];
            for (i, r) in rows.iter().enumerate() {
                for &(j, v) in r {
                    data[i * dim + j] = v;
                }
            }
            return Self { cutoff, storage: Storage::Dense(data) };
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for r in rows {
            for (j, v) in r {
                if v != C64::zero() {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { cutoff, storage: Storage::Sparse { row_ptr, cols, vals } }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff.dim()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Sparse { vals, .. } => vals.len(),
            Storage::Dense(d) => d.iter().filter(|v| **v != C64::zero()).count(),
        }
    }

    /// Visit the nonzero entries of row `i` in ascending column order.
    #[inline]
    pub fn for_row<F: FnMut(usize, C64)>(&self, i: usize, mut f: F) {
        match &self.storage {
            Storage::Sparse { row_ptr, cols, vals } => {
                for k in row_ptr[i]..row_ptr[i + 1] {
                    f(cols[k], vals[k]);
                }
            }
            Storage::Dense(d) => {
                let n = self.dim();
                for (j, v) in d[i * n..(i + 1) * n].iter().enumerate() {
                    if *v != C64::zero() {
                        f(j, *v);
                    }
                }
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Sparse { row_ptr, cols, vals } => {
                let r = &cols[row_ptr[i]..row_ptr[i + 1]];
                match r.binary_search(&j) {
                    Ok(k) => vals[row_ptr[i] + k],
                    Err(_) => C64::zero(),
                }
            }
            Storage::Dense(d) => d[i * self.dim() + j],
        }
    }

    /// Matrix element `⟨m1,m2|A|n1,n2⟩`.
    pub fn element(&self, bra: (usize, usize), ket: (usize, usize)) -> C64 {
        self.get(self.cutoff.index(bra.0, bra.1), self.cutoff.index(ket.0, ket.1))
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let n = self.dim();
        let mut out = vec![C64::zero(); n * n];
        for i in 0..n {
            self.for_row(i, |j, v| out[i * n + j] = v);
        }
        out
    }

    fn map_values<F: Fn(C64) -> C64>(&self, f: F) -> Self {
        let storage = match &self.storage {
            Storage::Sparse { row_ptr, cols, vals } => Storage::Sparse {
                row_ptr: row_ptr.clone(),
                cols: cols.clone(),
                vals: vals.iter().map(|v| f(*v)).collect(),
            },
            Storage::Dense(d) => Storage::Dense(d.iter().map(|v| f(*v)).collect()),
        };
        Self { cutoff: self.cutoff, storage }
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == C64::zero() {
            return Self::zero(self.cutoff);
        }
        self.map_values(|v| v * c)
    }

    /// `Σ cₖ Aₖ` over operators sharing one cutoff.
    pub fn linear_combination(terms: &[(C64, &FockOperator)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Incomplete("empty linear combination".into()));
        };
        let cutoff = first.cutoff;
        for (_, t) in terms {
            cutoff.check(&t.cutoff)?;
        }
        let dim = cutoff.dim();
        let mut acc = RowAccumulator::new(dim);
        let mut rows = Vec::with_capacity(dim);
        for i in 0..dim {
            for (c, t) in terms {
                if *c == C64::zero() {
                    continue;
                }
                t.for_row(i, |j, v| acc.add(j, *c * v));
            }
            rows.push(acc.drain());
        }
        Ok(Self::from_rows(cutoff, rows))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        Self::linear_combination(&[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.cutoff.check(&other.cutoff)?;
        let dim = self.dim();
        let mut acc = RowAccumulator::new(dim);
        let mut rows = Vec::with_capacity(dim);
        for i in 0..dim {
            self.for_row(i, |k, a| other.for_row(k, |j, b| acc.add(j, a * b)));
            rows.push(acc.drain());
        }
        Ok(Self::from_rows(self.cutoff, rows))
    }

    /// Product of a list of operators, left to right.
    pub fn product(ops: &[&FockOperator]) -> Result<Self> {
        let Some((first, rest)) = ops.split_first() else {
            return Err(Error::Incomplete("empty operator product".into()));
        };
        rest.iter().try_fold((*first).clone(), |acc, op| acc.compose(op))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let dim = self.dim();
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for i in 0..dim {
            self.for_row(i, |j, v| rows[j].push((i, v.conj())));
        }
        Self::from_rows(self.cutoff, rows)
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// `y = A x` on raw amplitude slices.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = C64::zero();
            self.for_row(i, |j, v| s += v * x[j]);
            *yi = s;
        }
    }

    pub fn apply(&self, v: &FockState) -> Result<FockState> {
        self.cutoff.check(&v.cutoff)?;
        let mut out = vec![C64::zero(); self.dim()];
        self.matvec_into(&v.amplitudes, &mut out);
        Ok(FockState { cutoff: self.cutoff, amplitudes: out })
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let mut s = 0.0;
                self.for_row(i, |_, v| s += v.norm());
                s
            })
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0; self.dim()];
        for i in 0..self.dim() {
            self.for_row(i, |j, v| cols[j] += v.norm());
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// `‖P A P‖∞` where `P` projects onto `n1 + n2 ≤ max_total`.
    pub fn projected_inf_norm(&self, max_total: usize) -> f64 {
        let c = self.cutoff;
        let inside = |k: usize| {
            let (a, b) = c.levels(k);
            a + b <= max_total
        };
        (0..self.dim())
            .filter(|&i| inside(i))
            .map(|i| {
                let mut s = 0.0;
                self.for_row(i, |j, v| if inside(j) { s += v.norm() });
                s
            })
            .fold(0.0, f64::max)
    }

    /// Projected norm on `n1 + n2 ≤ min(n1_max, n2_max) − margin`.
    pub fn projected_norm_with_margin(&self, margin: usize) -> f64 {
        self.projected_inf_norm(self.cutoff.n_min().saturating_sub(margin))
    }

    /// Largest entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim() {
            self.for_row(i, |_, v| m = m.max(v.norm()));
        }
        m
    }
}

/// Scratch space for accumulating one sparse row.
struct RowAccumulator {
    vals: Vec<C64>,
    used: Vec<bool>,
    touched: Vec<usize>,
}

impl RowAccumulator {
    fn new(dim: usize) -> Self {
        Self { vals: vec![C64::zero(); dim], used: vec![false; dim], touched: Vec::new() }
    }

    #[inline]
    fn add(&mut self, j: usize, v: C64) {
        if !self.used[j] {
            self.used[j] = true;
            self.touched.push(j);
        }
        self.vals[j] += v;
    }

    fn drain(&mut self) -> Vec<(usize, C64)> {
        self.touched.sort_unstable();
        let out = self.touched.iter().map(|&j| (j, self.vals[j])).collect();
        for &j in &self.touched {
            self.vals[j] = C64::zero();
            self.used[j] = false;
        }
        self.touched.clear();
        out
    }
}

/// Maximum Taylor terms per scaling step.
const TAYLOR_BUDGET: usize = 400;

/// `e^A v` by a scaled Taylor series: `s = ⌈‖A‖₁⌉` steps of `e^{A/s}`, each
/// summed until the next term falls below `tol / s`.
pub fn exp_apply(a: &FockOperator, v: &FockState, tol: f64) -> Result<FockState> {
    a.cutoff.check(&v.cutoff)?;
    if !(tol > 0.0) {
        return Err(Error::OutOfRange("exp_apply tolerance must be positive".into()));
    }
    let norm_a = a.one_norm();
    if !norm_a.is_finite() {
        return Err(Error::OutOfRange("operator has non-finite entries".into()));
    }
    let steps = (norm_a.ceil() as usize).max(1);
    let inv_s = 1.0 / steps as f64;
    let step_tol = tol / steps as f64;
    let dim = a.dim();
    let mut w = v.amplitudes.clone();
    let scale = norm(&w).max(f64::MIN_POSITIVE);
    let mut term = vec![C64::zero(); dim];
    let mut next = vec![C64::zero(); dim];
    for _ in 0..steps {
        term.copy_from_slice(&w);
        let mut converged = false;
        let mut last = f64::INFINITY;
        for k in 1..=TAYLOR_BUDGET {
            a.matvec_into(&term, &mut next);
            let f = inv_s / k as f64;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = *n * f;
            }
            for (wi, t) in w.iter_mut().zip(&term) {
                *wi += *t;
            }
            last = norm(&term);
            if last <= 0.1 * step_tol * scale || last == 0.0 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence { what: "exp_apply Taylor series", residual: last });
        }
    }
    Ok(FockState { cutoff: v.cutoff, amplitudes: w })
}

/// `P(n1, n2) = |⟨n1,n2|v⟩|²` for a normalized state.
pub fn pnd_of_state(v: &FockState) -> Result<PndGrid> {
    let nrm = v.norm();
    if (nrm - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization { norm: nrm });
    }
    let c = v.cutoff;
    let n_max = c.n1_max.max(c.n2_max);
    let mut values = vec![0.0; (n_max + 1) * (n_max + 1)];
    for (k, amp) in v.amplitudes.iter().enumerate() {
        let (n1, n2) = c.levels(k);
        values[n1 * (n_max + 1) + n2] = amp.norm_sqr();
    }
    Ok(PndGrid::new(n_max, values, 0.0))
}
