//! Exact monomial matrices: at most one nonzero entry per row and column,
//! each of the form u * pi^k with u a Teichmueller unit of the residue field
//! (stored as an exponent of the fixed generator) and pi the uniformizer.
//!
//! This group contains all Weyl-element lifts, the rotation matrix, and all
//! Teichmueller torus elements, so products and conjugations used in the
//! coefficient formulas stay exact.

use crate::weyl::{AffineRoot, Root, WeylElt};
use std::fmt;

/// One matrix entry u * pi^k placed in some row: unit exponent mod (q-1), power of pi.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MonoEntry {
    pub row: usize,
    pub uexp: i64,
    pub wpow: i64,
}

#[derive(Clone, PartialEq, Eq)]
pub struct MonomialMatrix {
    pub n: usize,
    /// q - 1: order of the unit group; unit exponents are canonical mod this.
    pub umod: i64,
    /// cols[j] = entry of column j.
    pub cols: Vec<MonoEntry>,
}

impl fmt::Debug for MonomialMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (j, e) in self.cols.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "c{}->r{}:g^{}·pi^{}", j, e.row, e.uexp, e.wpow)?;
        }
        write!(f, "]")
    }
}

impl MonomialMatrix {
    pub fn identity(n: usize, umod: i64) -> Self {
        MonomialMatrix {
            n,
            umod,
            cols: (0..n)
                .map(|j| MonoEntry {
                    row: j,
                    uexp: 0,
                    wpow: 0,
                })
                .collect(),
        }
    }

    fn canon(mut self) -> Self {
        for e in self.cols.iter_mut() {
            e.uexp = e.uexp.rem_euclid(self.umod);
        }
        self
    }

    /// Exponent of the unit -1, i.e. (q-1)/2.
    pub fn neg_exp(&self) -> i64 {
        self.umod / 2
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        assert_eq!(self.umod, other.umod);
        let cols = other
            .cols
            .iter()
            .map(|eb| {
                let ea = &self.cols[eb.row];
                MonoEntry {
                    row: ea.row,
                    uexp: ea.uexp + eb.uexp,
                    wpow: ea.wpow + eb.wpow,
                }
            })
            .collect();
        MonomialMatrix {
            n: self.n,
            umod: self.umod,
            cols,
        }
        .canon()
    }

    pub fn inv(&self) -> Self {
        let mut cols = vec![
            MonoEntry {
                row: 0,
                uexp: 0,
                wpow: 0
            };
            self.n
        ];
        for (j, e) in self.cols.iter().enumerate() {
            cols[e.row] = MonoEntry {
                row: j,
                uexp: -e.uexp,
                wpow: -e.wpow,
            };
        }
        MonomialMatrix {
            n: self.n,
            umod: self.umod,
            cols,
        }
        .canon()
    }

    pub fn pow(&self, e: i64) -> Self {
        let mut acc = MonomialMatrix::identity(self.n, self.umod);
        let base = if e >= 0 { self.clone() } else { self.inv() };
        for _ in 0..e.abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Underlying permutation: column j maps to row perm(j).
    pub fn perm(&self) -> WeylElt {
        WeylElt {
            perm: self.cols.iter().map(|e| e.row).collect(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.cols.iter().enumerate().all(|(j, e)| e.row == j)
    }

    /// Diagonal entries (uexp, wpow); panics if not diagonal.
    pub fn diag(&self) -> Vec<(i64, i64)> {
        assert!(self.is_diagonal(), "matrix is not diagonal: {self:?}");
        self.cols.iter().map(|e| (e.uexp, e.wpow)).collect()
    }

    /// Is a diagonal matrix with all entries Teichmueller units (no pi part)?
    pub fn is_unit_diagonal(&self) -> bool {
        self.is_diagonal() && self.cols.iter().all(|e| e.wpow == 0)
    }

    /// Is a diagonal sign matrix (entries +-1)?
    pub fn is_sign_diagonal(&self) -> bool {
        let h = self.neg_exp();
        self.is_unit_diagonal() && self.cols.iter().all(|e| e.uexp == 0 || e.uexp == h)
    }

    /// Diagonal torus element with given (uexp, wpow) per slot.
    pub fn diagonal(umod: i64, entries: &[(i64, i64)]) -> Self {
        MonomialMatrix {
            n: entries.len(),
            umod,
            cols: entries
                .iter()
                .enumerate()
                .map(|(j, &(uexp, wpow))| MonoEntry { row: j, uexp, wpow })
                .collect(),
        }
        .canon()
    }

    /// Coroot cocharacter value b^vee(g^uexp * pi^wpow) as a diagonal matrix.
    pub fn coroot(n: usize, umod: i64, b: &Root, uexp: i64, wpow: i64) -> Self {
        let mut entries = vec![(0, 0); n];
        entries[b.j] = (uexp, wpow);
        entries[b.k] = (-uexp, -wpow);
        MonomialMatrix::diagonal(umod, &entries)
    }

    /// The standard reflection lift for any root a(j,k): entry 1 at (j,k),
    /// -1 at (k,j), 1 elsewhere on the diagonal.
    pub fn refl_lift(n: usize, umod: i64, a: &Root) -> Self {
        let mut m = MonomialMatrix::identity(n, umod);
        m.cols[a.k] = MonoEntry {
            row: a.j,
            uexp: 0,
            wpow: 0,
        };
        m.cols[a.j] = MonoEntry {
            row: a.k,
            uexp: umod / 2,
            wpow: 0,
        };
        m
    }

    /// Lift of an affine simple reflection (a, l): a^vee(pi^l) * refl_lift(a).
    pub fn affine_refl_lift(n: usize, umod: i64, ar: &AffineRoot) -> Self {
        MonomialMatrix::coroot(n, umod, &ar.root, 0, ar.level).mul(&MonomialMatrix::refl_lift(
            n, umod, &ar.root,
        ))
    }

    /// Lift of a finite Weyl element along its canonical reduced word.
    pub fn lift(umod: i64, w: &WeylElt) -> Self {
        let n = w.n();
        let mut m = MonomialMatrix::identity(n, umod);
        for i in w.reduced_word() {
            m = m.mul(&MonomialMatrix::refl_lift(n, umod, &Root::simple(i)));
        }
        m
    }

    /// The rotation matrix: superdiagonal ones, pi in the bottom-left corner.
    pub fn rotation(n: usize, umod: i64) -> Self {
        let mut cols = Vec::with_capacity(n);
        cols.push(MonoEntry {
            row: n - 1,
            uexp: 0,
            wpow: 1,
        });
        for j in 1..n {
            cols.push(MonoEntry {
                row: j - 1,
                uexp: 0,
                wpow: 0,
            });
        }
        MonomialMatrix { n, umod, cols }
    }

    /// Action on affine roots: conjugation of the root subgroup coordinates.
    pub fn act_affine(&self, ar: &AffineRoot) -> AffineRoot {
        let ej = &self.cols[ar.root.j];
        let ek = &self.cols[ar.root.k];
        AffineRoot {
            root: Root::new(ej.row, ek.row),
            level: ar.level + ej.wpow - ek.wpow,
        }
    }

    /// Coefficient transported onto a root coordinate under conjugation:
    /// self * u_{(a,l)}(c x) * self^{-1} = u_{act_affine(a,l)}(c' x) with
    /// c' = c * (col_j / col_k) unit-and-power; returns (uexp, wpow) of col_j/col_k.
    pub fn conj_coeff(&self, a: &Root) -> (i64, i64) {
        let ej = &self.cols[a.j];
        let ek = &self.cols[a.k];
        (
            (ej.uexp - ek.uexp).rem_euclid(self.umod),
            ej.wpow - ek.wpow,
        )
    }

    /// Total pi-valuation (sum over entries).
    pub fn total_val(&self) -> i64 {
        self.cols.iter().map(|e| e.wpow).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{all_elements, omega_bar};

    const UMOD: i64 = 4; // q = 5

    #[test]
    fn refl_lift_square_is_coroot_of_minus_one() {
        // refl^2 = a^vee(-1)
        for n in 2..=4 {
            for a in crate::weyl::positive_roots(n) {
                let s = MonomialMatrix::refl_lift(n, UMOD, &a);
                let sq = s.mul(&s);
                assert_eq!(sq, MonomialMatrix::coroot(n, UMOD, &a, UMOD / 2, 0));
                // inverse of the lift is the lift of the negative
                assert_eq!(s.inv(), MonomialMatrix::refl_lift(n, UMOD, &a.neg()));
            }
        }
    }

    #[test]
    fn rotation_shape() {
        let om = MonomialMatrix::rotation(3, UMOD);
        assert_eq!(om.perm(), omega_bar(3));
        assert_eq!(om.pow(3), MonomialMatrix::diagonal(UMOD, &[(0, 1); 3]));
    }

    #[test]
    fn lift_word_independence_small() {
        // braid check s1 s2 s1 = s2 s1 s2 at the lift level
        let n = 3;
        let s = |i| MonomialMatrix::refl_lift(n, UMOD, &Root::simple(i));
        assert_eq!(s(0).mul(&s(1)).mul(&s(0)), s(1).mul(&s(0)).mul(&s(1)));
        let l12 = MonomialMatrix::lift(UMOD, &WeylElt::from_word(n, &[0, 1]));
        assert_eq!(l12, s(0).mul(&s(1)));
    }

    #[test]
    fn lift_permutation_consistency() {
        for w in all_elements(4) {
            let m = MonomialMatrix::lift(UMOD, &w);
            assert_eq!(m.perm(), w);
            assert!(m.cols.iter().all(|e| e.wpow == 0));
        }
    }
}
