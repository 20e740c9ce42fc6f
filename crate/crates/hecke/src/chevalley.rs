//! Structure constants of the Chevalley lifts: the signs d(a, b) from
//! conjugating root subgroups by reflection lifts, their products d(w, b)
//! along reduced words, torus discrepancies of lifts, and the identities
//! tying them together.
//!
//! All signs are derived from exact monomial-matrix conjugation; nothing is
//! hard-coded.

use crate::monomial::MonomialMatrix;
use crate::weyl::{Root, WeylElt};
use std::collections::HashMap;

/// Unit modulus used for sign-only computations (q = 3 suffices: units are +-1).
pub const SIGN_UMOD: i64 = 2;

/// d(a, b): the sign in refl_lift(a) u_b(x) refl_lift(a)^{-1} = u_{s_a(b)}(d x).
pub fn d_const(a: &Root, b: &Root, n: usize) -> i64 {
    let m = MonomialMatrix::refl_lift(n, SIGN_UMOD, a);
    let (uexp, wpow) = m.conj_coeff(b);
    assert_eq!(wpow, 0, "reflection lift conjugation must not move pi");
    if uexp == 0 {
        1
    } else {
        -1
    }
}

/// d(w, b) by the reduced-word product rule along the given word.
pub fn d_w_along_word(n: usize, word: &[usize], b: &Root) -> i64 {
    let mut sign = 1;
    let mut cur = *b;
    for &i in word.iter().rev() {
        let a = Root::simple(i);
        sign *= d_const(&a, &cur, n);
        cur = WeylElt::simple(n, i).act(&cur);
    }
    sign
}

/// d(w, b) along the canonical reduced word; equals direct conjugation by lift(w).
pub fn d_w(w: &WeylElt, b: &Root) -> i64 {
    d_w_along_word(w.n(), &w.reduced_word(), b)
}

/// d(w, b) read off directly from matrix conjugation by lift(w).
pub fn d_w_direct(w: &WeylElt, b: &Root) -> i64 {
    let m = MonomialMatrix::lift(SIGN_UMOD, w);
    let (uexp, wpow) = m.conj_coeff(b);
    assert_eq!(wpow, 0);
    if uexp == 0 {
        1
    } else {
        -1
    }
}

/// lift(w) * lift(v) * lift(wv)^{-1}: a diagonal sign matrix.
pub fn torus_discrepancy(umod: i64, w: &WeylElt, v: &WeylElt) -> MonomialMatrix {
    let a = MonomialMatrix::lift(umod, w);
    let b = MonomialMatrix::lift(umod, v);
    let c = MonomialMatrix::lift(umod, &w.mul(v)).inv();
    let d = a.mul(&b).mul(&c);
    assert!(d.is_sign_diagonal(), "lift discrepancy must be a sign torus element");
    d
}

/// Evaluate the root character b on a diagonal sign matrix: returns +-1.
pub fn root_char_sign(b: &Root, t: &MonomialMatrix) -> i64 {
    let d = t.diag();
    let h = t.neg_exp();
    let e = (d[b.j].0 - d[b.k].0).rem_euclid(t.umod);
    assert!(d[b.j].1 == 0 && d[b.k].1 == 0);
    if e == 0 {
        1
    } else {
        assert_eq!(e, h);
        -1
    }
}

/// Check lift(w) refl_lift(b) lift(w)^{-1} = (w b)^vee(d(w,b)) refl_lift(w(b)).
pub fn conj_lift_identity_check(w: &WeylElt, b: &Root) -> Result<(), String> {
    let n = w.n();
    let umod = SIGN_UMOD;
    let lw = MonomialMatrix::lift(umod, w);
    let lhs = lw.mul(&MonomialMatrix::refl_lift(n, umod, b)).mul(&lw.inv());
    let wb = w.act(b);
    let d = d_w(w, b);
    let dexp = if d == 1 { 0 } else { umod / 2 };
    let rhs = MonomialMatrix::coroot(n, umod, &wb, dexp, 0)
        .mul(&MonomialMatrix::refl_lift(n, umod, &wb));
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!(
            "conjugated reflection lift mismatch: w={w:?} b={b:?}\n lhs={lhs:?}\n rhs={rhs:?}"
        ))
    }
}

/// All reduced words of w, memoized per element.
pub fn all_reduced_words(w: &WeylElt) -> Vec<Vec<usize>> {
    fn go(w: &WeylElt, memo: &mut HashMap<WeylElt, Vec<Vec<usize>>>) -> Vec<Vec<usize>> {
        if let Some(v) = memo.get(w) {
            return v.clone();
        }
        if w.is_identity() {
            return vec![vec![]];
        }
        let n = w.n();
        let mut out = Vec::new();
        for i in 0..n - 1 {
            if w.has_right_descent(i) {
                let shorter = w.mul(&WeylElt::simple(n, i));
                for mut word in go(&shorter, memo) {
                    word.push(i);
                    out.push(word);
                }
            }
        }
        memo.insert(w.clone(), out.clone());
        out
    }
    let mut memo = HashMap::new();
    go(w, &mut memo)
}

/// The cocycle relation for structure constants:
/// d(v, v^{-1}w^{-1}(b)) d(w, w^{-1}(b)) = b(lift discrepancy of (w, v)) * d(wv, v^{-1}w^{-1}(b)).
pub fn cocycle_check(w: &WeylElt, v: &WeylElt, b: &Root) -> Result<(), String> {
    let arg = v.inv().mul(&w.inv()).act(b);
    let lhs = d_w(v, &arg) * d_w(w, &w.inv().act(b));
    let t = torus_discrepancy(SIGN_UMOD, w, v);
    let rhs = root_char_sign(b, &t) * d_w(&w.mul(v), &arg);
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("cocycle mismatch at w={w:?} v={v:?} b={b:?}: {lhs} vs {rhs}"))
    }
}

/// Variant with the reflection lift of the negative highest root in place of lift(v):
/// d(-a0, s_{a0} w^{-1}(b)) d(w, w^{-1}(b)) = b(lift(w) refl(-a0) lift(w s_{a0})^{-1}) d(w s_{a0}, s_{a0} w^{-1}(b)).
pub fn cocycle_check_highest(w: &WeylElt, b: &Root) -> Result<(), String> {
    let n = w.n();
    let a0 = Root::highest(n);
    let s_a0 = {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(a0.j, a0.k);
        WeylElt { perm }
    };
    let arg = s_a0.mul(&w.inv()).act(b);
    let lhs = d_const(&a0.neg(), &arg, n) * d_w(w, &w.inv().act(b));
    let t = MonomialMatrix::lift(SIGN_UMOD, w)
        .mul(&MonomialMatrix::refl_lift(n, SIGN_UMOD, &a0.neg()))
        .mul(&MonomialMatrix::lift(SIGN_UMOD, &w.mul(&s_a0)).inv());
    assert!(t.is_sign_diagonal());
    let rhs = root_char_sign(b, &t) * d_w(&w.mul(&s_a0), &arg);
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("highest-root cocycle mismatch at w={w:?} b={b:?}: {lhs} vs {rhs}"))
    }
}

/// Sparse Laurent polynomial in (x, pi) with integer coefficients; test-grade
/// scalar for verifying matrix identities with a symbolic unit.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Laurent {
    pub terms: std::collections::BTreeMap<(i32, i32), i64>,
}

impl Laurent {
    pub fn zero() -> Self {
        Laurent::default()
    }
    pub fn constant(c: i64) -> Self {
        Laurent::mono(c, 0, 0)
    }
    pub fn mono(c: i64, xdeg: i32, wdeg: i32) -> Self {
        let mut t = std::collections::BTreeMap::new();
        if c != 0 {
            t.insert((xdeg, wdeg), c);
        }
        Laurent { terms: t }
    }
    pub fn add(&self, o: &Laurent) -> Laurent {
        let mut t = self.terms.clone();
        for (&k, &v) in &o.terms {
            let e = t.entry(k).or_insert(0);
            *e += v;
            if *e == 0 {
                t.remove(&k);
            }
        }
        Laurent { terms: t }
    }
    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut t = std::collections::BTreeMap::new();
        for (&(xa, wa), &ca) in &self.terms {
            for (&(xb, wb), &cb) in &o.terms {
                let e = t.entry((xa + xb, wa + wb)).or_insert(0);
                *e += ca * cb;
                if *e == 0 {
                    t.remove(&(xa + xb, wa + wb));
                }
            }
        }
        Laurent { terms: t }
    }
}

/// Dense n x n matrix over Laurent scalars, for small symbolic identities.
pub fn laurent_matmul(a: &[Vec<Laurent>], b: &[Vec<Laurent>]) -> Vec<Vec<Laurent>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = Laurent::zero();
                    for (k, row) in b.iter().enumerate() {
                        acc = acc.add(&a[i][k].mul(&row[j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn laurent_identity(n: usize) -> Vec<Vec<Laurent>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Laurent::constant(1)
                    } else {
                        Laurent::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// u_{(a,l)}(c * x^xd * pi^wd) as a Laurent matrix: identity plus the single entry.
pub fn laurent_unipotent(n: usize, a: &Root, level: i32, c: i64, xd: i32, wd: i32) -> Vec<Vec<Laurent>> {
    let mut m = laurent_identity(n);
    m[a.j][a.k] = m[a.j][a.k].add(&Laurent::mono(c, xd, wd + level));
    m
}

/// The decomposition of a lower-triangular unipotent through the reflection
/// lift, verified symbolically over Z[x^{+-1}, pi^{+-1}]:
/// u_{-(a,l)}(x) = u_{(a,l)}(x^{-1}) a^vee(x^{-1}) refl_lift(a,l)^{-1} u_{(a,l)}(x^{-1}).
pub fn unipotent_decomposition_check(n: usize, a: &Root, level: i32) -> Result<(), String> {
    let lhs = laurent_unipotent(n, &a.neg(), -level, 1, 1, 0);
    let u = laurent_unipotent(n, a, level, 1, -1, 0);
    let mut coroot = laurent_identity(n);
    coroot[a.j][a.j] = Laurent::mono(1, -1, 0);
    coroot[a.k][a.k] = Laurent::mono(1, 1, 0);
    // refl_lift(a, l)^{-1}: inverse of a^vee(pi^l) * refl(a)
    let mut refl = laurent_identity(n);
    refl[a.j][a.j] = Laurent::zero();
    refl[a.k][a.k] = Laurent::zero();
    refl[a.j][a.k] = Laurent::mono(1, 0, level);
    refl[a.k][a.j] = Laurent::mono(-1, 0, -level);
    let mut refl_inv = laurent_identity(n);
    refl_inv[a.j][a.j] = Laurent::zero();
    refl_inv[a.k][a.k] = Laurent::zero();
    refl_inv[a.j][a.k] = Laurent::mono(-1, 0, level);
    refl_inv[a.k][a.j] = Laurent::mono(1, 0, -level);
    // check refl * refl_inv = 1
    if laurent_matmul(&refl, &refl_inv) != laurent_identity(n) {
        return Err("reflection lift inverse wrong".into());
    }
    let rhs = laurent_matmul(&laurent_matmul(&laurent_matmul(&u, &coroot), &refl_inv), &u);
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("unipotent decomposition failed for a={a:?} level={level}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::{all_elements, all_roots, positive_roots};

    #[test]
    fn d_examples() {
        let n = 3;
        for a in all_roots(n) {
            // d(a, b) = d(a, -b)
            for b in all_roots(n) {
                assert_eq!(d_const(&a, &b, n), d_const(&a, &b.neg(), n));
            }
            assert_eq!(d_const(&a, &a, n), -1);
        }
        assert_eq!(d_w(&WeylElt::identity(3), &Root::new(0, 2)), 1);
    }

    #[test]
    fn d_w_word_independent_n4() {
        let n = 4;
        for w in all_elements(n) {
            let words = all_reduced_words(&w);
            for b in all_roots(n) {
                let vals: Vec<i64> = words.iter().map(|wd| d_w_along_word(n, wd, &b)).collect();
                assert!(vals.windows(2).all(|p| p[0] == p[1]), "w={w:?} b={b:?}");
                assert_eq!(vals[0], d_w_direct(&w, &b));
                assert_eq!(d_w(&w, &b), d_w(&w, &b.neg()));
            }
        }
    }

    #[test]
    fn conj_lift_identity_exhaustive_n3() {
        for w in all_elements(3) {
            for b in all_roots(3) {
                conj_lift_identity_check(&w, &b).unwrap();
            }
        }
    }

    #[test]
    fn torus_discrepancies() {
        let n = 3;
        let id = WeylElt::identity(n);
        let s1 = WeylElt::simple(n, 0);
        let s2 = WeylElt::simple(n, 1);
        assert_eq!(
            torus_discrepancy(4, &id, &s2),
            MonomialMatrix::identity(n, 4)
        );
        // lift(s1)^2 = a1^vee(-1)
        assert_eq!(
            torus_discrepancy(4, &s1, &s1),
            MonomialMatrix::coroot(n, 4, &Root::simple(0), 2, 0)
        );
        // reduced product: no discrepancy
        assert_eq!(
            torus_discrepancy(4, &s1, &s2),
            MonomialMatrix::identity(n, 4)
        );
    }

    #[test]
    fn cocycles_n3() {
        for w in all_elements(3) {
            for v in all_elements(3) {
                for b in positive_roots(3) {
                    cocycle_check(&w, &v, &b).unwrap();
                }
            }
            for b in positive_roots(3) {
                cocycle_check_highest(&w, &b).unwrap();
            }
        }
    }

    #[test]
    fn unipotent_decomposition() {
        for n in 2..=4 {
            for a in positive_roots(n) {
                unipotent_decomposition_check(n, &a, 0).unwrap();
                unipotent_decomposition_check(n, &a.neg(), 1).unwrap();
            }
        }
    }
}
