//! Banded LU factorization with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Zero;

use crate::fock::FockOperator;
use crate::C64;

/// `PA = LU` for a matrix with `kl` sub- and `ku` super-diagonals. Row
/// interchanges widen the upper band to `kl + ku`.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    rows: Vec<C64>,
    piv: Vec<usize>,
    mult: Vec<C64>,
    /// Number of pivots that were exactly zero and got replaced.
    pub replaced_pivots: usize,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Band widths of an operator.
    pub fn bandwidths(a: &FockOperator) -> (usize, usize) {
        let (mut kl, mut ku) = (0, 0);
        for i in 0..a.dim() {
            a.for_row(i, |j, _| {
                if j < i {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            });
        }
        (kl, ku)
    }

    pub fn factor(a: &FockOperator) -> Self {
        let n = a.dim();
        let (kl, ku) = Self::bandwidths(a);
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            rows: vec![C64::zero(); n * width],
            piv: vec![0; n],
            mult: vec![C64::zero(); n * kl.max(1)],
            replaced_pivots: 0,
        };
        let scale = a.inf_norm().max(f64::MIN_POSITIVE);
        for i in 0..n {
            a.for_row(i, |j, v| {
                let k = lu.at(i, j);
                lu.rows[k] = v;
            });
        }
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let right = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = lu.rows[lu.at(k, k)].norm();
            for i in k + 1..=last {
                let v = lu.rows[lu.at(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.piv[k] = p;
            if p != k {
                for j in k..=right {
                    let (x, y) = (lu.at(k, j), lu.at(p, j));
                    lu.rows.swap(x, y);
                }
            }
            let kk = lu.at(k, k);
            if lu.rows[kk] == C64::zero() {
                lu.rows[kk] = C64::new(f64::EPSILON * scale, 0.0);
                lu.replaced_pivots += 1;
            }
            let pivot = lu.rows[kk];
            for i in k + 1..=last {
                let ik = lu.at(i, k);
                let m = lu.rows[ik] / pivot;
                lu.mult[k * kl + (i - k - 1)] = m;
                lu.rows[ik] = C64::zero();
                if m == C64::zero() {
                    continue;
                }
                for j in k + 1..=right {
                    let kj = lu.rows[lu.at(k, j)];
                    let ij = lu.at(i, j);
                    lu.rows[ij] -= m * kj;
                }
            }
        }
        lu
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= self.mult[k * kl + (i - k - 1)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.rows[self.at(k, j)] * b[j];
            }
            b[k] = s / self.rows[self.at(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{make_mode_operators, FockCutoff};

    #[test]
    fn solves_banded_system() {
        let c = FockCutoff::square(6).unwrap();
        let (a1, a2) = make_mode_operators(c).unwrap();
        let id = FockOperator::identity(c);
        // non-Hermitian, needs pivoting in places
        let m = FockOperator::linear_combination(&[
            (C64::new(0.3, 0.1), &id),
            (C64::new(1.0, 0.0), &a1),
            (C64::new(0.0, 2.0), &a2.adjoint()),
            (C64::new(-1.5, 0.0), &a1.adjoint().compose(&a2).unwrap()),
        ])
        .unwrap();
        let x: Vec<C64> = (0..c.dim()).map(|k| C64::new(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let mut b = vec![C64::zero(); c.dim()];
        m.matvec_into(&x, &mut b);
        let lu = BandLu::factor(&m);
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-10, "{u} vs {v}");
        }
    }
}
