//! Smooth characters of the diagonal torus with values in F_{p^m}:
//! a coordinate-wise exponent vector mod (q-1) for the Teichmueller units
//! plus a vector of nonzero field values at the uniformizer in each slot.

use crate::field::{FElem, Field, FieldCtx};
use crate::monomial::MonomialMatrix;
use crate::weyl::{Root, WeylElt};
use serde::{Deserialize, Serialize};

/// Ground-field parameters: residue characteristic p, residue degree f,
/// ramification e, whether F contains a p-th root of unity, and the degree m
/// of the coefficient field F_{p^m} (f | m).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldParams {
    pub p: u64,
    pub f: u32,
    pub e: u32,
    pub zeta_p: bool,
    pub m: u32,
}

impl FieldParams {
    pub fn new(p: u64, f: u32, e: u32, zeta_p: bool, m: Option<u32>) -> Result<Self, String> {
        if p < 3 || p % 2 == 0 || !crate::field::is_prime(p) {
            return Err(format!("p must be an odd prime >= 3, got {p}"));
        }
        if f < 1 || e < 1 {
            return Err("need f >= 1 and e >= 1".into());
        }
        let m = m.unwrap_or(2 * f);
        if m % f != 0 {
            return Err(format!("coefficient degree m = {m} must be a multiple of f = {f}"));
        }
        if e * f == 1 && zeta_p {
            return Err("the base field Q_p (p odd) contains no p-th root of unity".into());
        }
        Ok(FieldParams { p, f, e, zeta_p, m })
    }

    pub fn q(&self) -> u64 {
        let mut r = 1u64;
        for _ in 0..self.f {
            r *= self.p;
        }
        r
    }

    /// [F : Q_p] = e * f.
    pub fn deg(&self) -> u32 {
        self.e * self.f
    }

    pub fn is_qp(&self) -> bool {
        self.deg() == 1
    }

    /// dim Hom^cts(1 + p, coefficient field) per torus slot.
    pub fn slot_hom_dim(&self) -> usize {
        (self.deg() + self.zeta_p as u32) as usize
    }

    pub fn field(&self) -> Field {
        FieldCtx::new(self.p, self.f, self.m)
    }

    pub fn umod(&self) -> i64 {
        (self.q() - 1) as i64
    }
}

/// Smooth character of the n-slot diagonal torus.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SmoothCharacter {
    /// Exponents mod (q-1): slot j acts on a Teichmueller unit [x] by embed(x)^{exps[j]}.
    pub exps: Vec<i64>,
    /// Value at pi in each slot.
    pub uvals: Vec<FElem>,
}

impl SmoothCharacter {
    pub fn trivial(fld: &Field, n: usize) -> Self {
        SmoothCharacter {
            exps: vec![0; n],
            uvals: vec![fld.one(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    /// Evaluate on a diagonal monomial matrix.
    pub fn eval(&self, fld: &Field, t: &MonomialMatrix) -> FElem {
        let d = t.diag();
        let mut unit_exp: i64 = 0;
        let mut acc = fld.one();
        for (j, &(uexp, wpow)) in d.iter().enumerate() {
            unit_exp += self.exps[j] * uexp;
            if wpow != 0 {
                acc = fld.mul(&acc, &fld.pow_i(&self.uvals[j], wpow));
            }
        }
        fld.mul(&acc, &fld.unit(unit_exp))
    }

    /// Inverse of eval.
    pub fn eval_inv(&self, fld: &Field, t: &MonomialMatrix) -> FElem {
        fld.inv(&self.eval(fld, t))
    }

    /// Twist by a Weyl element: chi^w(t) = chi(lift(w) t lift(w)^{-1}); on
    /// diagonal data this permutes slots, (chi^w)_j = chi_{w(j)}.
    pub fn weyl_twist(&self, w: &WeylElt) -> SmoothCharacter {
        let n = self.n();
        SmoothCharacter {
            exps: (0..n).map(|j| self.exps[w.apply(j)]).collect(),
            uvals: (0..n).map(|j| self.uvals[w.apply(j)].clone()).collect(),
        }
    }

    /// Multiply by the k-th power of the unit-part root character of b:
    /// bumps the two slot exponents, leaves uniformizer values alone.
    pub fn mul_root_char(&self, b: &Root, k: i64) -> SmoothCharacter {
        let mut out = self.clone();
        out.exps[b.j] += k;
        out.exps[b.k] -= k;
        out
    }

    /// Is chi composed with the coroot of g trivial on the units?
    /// Holds iff exps[g.j] - exps[g.k] ≡ 0 mod (q-1).
    pub fn coroot_unit_trivial(&self, umod: i64, g: &Root) -> bool {
        (self.exps[g.j] - self.exps[g.k]).rem_euclid(umod) == 0
    }

    /// Kronecker delta of the previous test, as 0/1.
    pub fn delta_coroot(&self, umod: i64, g: &Root) -> i64 {
        self.coroot_unit_trivial(umod, g) as i64
    }

    /// Is chi composed with the coroot of g trivial on all of F^x
    /// (units and uniformizer)?
    pub fn coroot_fully_trivial(&self, fld: &Field, umod: i64, g: &Root) -> bool {
        self.coroot_unit_trivial(umod, g)
            && self.uvals[g.j] == self.uvals[g.k]
    }

    /// Exponent-level equality of torus-unit restrictions.
    pub fn same_unit_restriction(&self, umod: i64, other: &SmoothCharacter) -> bool {
        self.exps
            .iter()
            .zip(&other.exps)
            .all(|(&a, &b)| (a - b).rem_euclid(umod) == 0)
    }
}

impl SmoothCharacter {
    pub fn unit_part_of_root_value(
        fld: &Field,
        t: &MonomialMatrix,
        b: &Root,
        power: i64,
    ) -> FElem {
        // unit part of b(t) for diagonal monomial t, raised to `power`
        let d = t.diag();
        let e = d[b.j].0 - d[b.k].0;
        fld.unit(e * power)
    }
}

/// Sum over units x of emb(x)^a: -1 if a ≡ 0 mod (q-1), else 0.
pub fn gauss_sum_delta(fld: &Field, a: i64) -> FElem {
    if a.rem_euclid((fld.q - 1) as i64) == 0 {
        fld.from_i64(-1)
    } else {
        fld.zero()
    }
}

/// Brute-force version of gauss_sum_delta for cross-checking.
pub fn gauss_sum_brute(fld: &Field, a: i64) -> FElem {
    let mut s = fld.zero();
    for j in 0..(fld.q - 1) as i64 {
        s = fld.add(&s, &fld.unit(a * j));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::all_elements;

    fn setup() -> (FieldParams, Field) {
        let params = FieldParams::new(5, 1, 1, false, Some(2)).unwrap();
        let fld = params.field();
        (params, fld)
    }

    #[test]
    fn eval_examples() {
        let (params, fld) = setup();
        let umod = params.umod();
        let n = 3;
        let chi = SmoothCharacter::trivial(&fld, n);
        let t = MonomialMatrix::diagonal(umod, &[(0, 1), (0, 0), (0, 0)]);
        assert_eq!(chi.eval(&fld, &t), fld.one());
        let mut chi2 = chi.clone();
        chi2.uvals[0] = fld.gen.clone();
        assert_eq!(chi2.eval(&fld, &t), fld.gen);
        // coroot of -1: chi(a1^vee(-1)) = g^{(e1-e2)(q-1)/2}
        let mut chi3 = chi.clone();
        chi3.exps = vec![1, 0, 0];
        let m1 = MonomialMatrix::coroot(n, umod, &Root::simple(0), umod / 2, 0);
        assert_eq!(chi3.eval(&fld, &m1), fld.unit(umod / 2));
    }

    #[test]
    fn eval_multiplicative() {
        let (params, fld) = setup();
        let umod = params.umod();
        let mut chi = SmoothCharacter::trivial(&fld, 2);
        chi.exps = vec![3, 1];
        chi.uvals = vec![fld.gen.clone(), fld.unit(1)];
        let a = MonomialMatrix::diagonal(umod, &[(1, 2), (3, -1)]);
        let b = MonomialMatrix::diagonal(umod, &[(2, 0), (1, 4)]);
        assert_eq!(
            chi.eval(&fld, &a.mul(&b)),
            fld.mul(&chi.eval(&fld, &a), &chi.eval(&fld, &b))
        );
    }

    #[test]
    fn twist_left_action() {
        let (_, fld) = setup();
        let mut chi = SmoothCharacter::trivial(&fld, 3);
        chi.exps = vec![1, 2, 3];
        chi.uvals = vec![fld.unit(1), fld.unit(2), fld.unit(3)];
        for w in all_elements(3) {
            for v in all_elements(3) {
                assert_eq!(
                    chi.weyl_twist(&w).weyl_twist(&v),
                    chi.weyl_twist(&w.mul(&v))
                );
            }
            // involution for simple reflections
        }
        let s = WeylElt::simple(2, 0);
        let mut chi2 = SmoothCharacter::trivial(&fld, 2);
        chi2.exps = vec![7, 11];
        assert_eq!(chi2.weyl_twist(&s).exps, vec![11, 7]);
        assert_eq!(chi2.weyl_twist(&s).weyl_twist(&s), chi2);
    }

    #[test]
    fn root_char_and_delta() {
        let (params, fld) = setup();
        let umod = params.umod();
        let chi = SmoothCharacter::trivial(&fld, 4);
        let b = Root::simple(0);
        let bumped = chi.mul_root_char(&b, 1);
        assert_eq!(bumped.exps, vec![1, -1, 0, 0]);
        assert_eq!(bumped.mul_root_char(&b, -1), chi);
        assert_eq!(chi.delta_coroot(umod, &b), 1);
        let mut chi2 = chi.clone();
        chi2.exps = vec![1, 0, 0, 0];
        assert_eq!(chi2.delta_coroot(umod, &b), 0);
        // wrapping by q-1 does not change the delta
        assert_eq!(
            chi2.mul_root_char(&b, umod).delta_coroot(umod, &b),
            chi2.delta_coroot(umod, &b)
        );
    }

    #[test]
    fn gauss_sums_match_brute_force() {
        for (p, f, m) in [(3u64, 1u32, 2u32), (5, 1, 2), (3, 2, 2), (5, 2, 2)] {
            let fld = crate::field::FieldCtx::new(p, f, m);
            let q1 = (fld.q - 1) as i64;
            for a in -q1..=2 * q1 {
                assert_eq!(gauss_sum_delta(&fld, a), gauss_sum_brute(&fld, a));
            }
        }
    }
}
