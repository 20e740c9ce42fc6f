//! Exact arithmetic in the coefficient field F_{p^m} and the residue field F_q
//! embedded inside it.
//!
//! Elements are polynomial coefficient vectors modulo a fixed irreducible
//! polynomial. The polynomial and a multiplicative generator are chosen
//! deterministically so that runs are reproducible without external tables.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// An element of F_{p^m}, stored as little-endian coefficients of length m.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FElem {
    pub coeffs: Vec<u32>,
}

impl fmt::Debug for FElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{:?}", self.coeffs)
    }
}

/// Context for F_{p^m}: modulus polynomial, cached generator, and the
/// embedding data for the residue field F_q with q = p^f, f | m.
#[derive(Debug)]
pub struct FieldCtx {
    pub p: u64,
    pub m: u32,
    /// Monic irreducible modulus, little-endian, degree m (leading coeff omitted: x^m = -modulus_tail).
    pub modulus_tail: Vec<u32>,
    /// Generator of the multiplicative group of order p^m - 1.
    pub gen: FElem,
    /// Order of the residue field subgroup, q - 1 (q = p^f).
    pub q: u64,
    /// gen^((p^m-1)/(q-1)): canonical generator of the image of F_q^* in F_{p^m}^*.
    pub gen_q: FElem,
    /// Powers gen_q^j for 0 <= j < q-1, cached for unit-exponent embedding.
    unit_pow: Vec<FElem>,
    /// Discrete log table for the prime subfield: dlog_prime[a] = j with gen_q^j ≡ a (only for f = 1 lookups).
    pub card: u64,
}

pub type Field = Arc<FieldCtx>;

fn pow_u64(b: u64, e: u32) -> u64 {
    let mut r = 1u64;
    for _ in 0..e {
        r = r.checked_mul(b).expect("field cardinality overflow");
    }
    r
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldCtx {
    /// Build F_{p^m} with the residue field F_{p^f} marked inside it. Requires f | m.
    pub fn new(p: u64, f: u32, m: u32) -> Field {
        assert!(p >= 3 && p % 2 == 1, "p must be an odd prime >= 3");
        assert!(is_prime(p), "p = {p} is not prime");
        assert!(f >= 1 && m >= 1 && m % f == 0, "need f | m (f={f}, m={m})");
        let card = pow_u64(p, m);
        let q = pow_u64(p, f);
        let modulus_tail = smallest_irreducible(p, m);
        let mut ctx = FieldCtx {
            p,
            m,
            modulus_tail,
            gen: FElem { coeffs: vec![] },
            q,
            gen_q: FElem { coeffs: vec![] },
            unit_pow: vec![],
            card,
        };
        ctx.gen = ctx.find_generator();
        ctx.gen_q = ctx.pow(&ctx.gen, (card - 1) / (q - 1));
        let mut unit_pow = Vec::with_capacity((q - 1) as usize);
        let mut acc = ctx.one();
        for _ in 0..(q - 1) {
            unit_pow.push(acc.clone());
            acc = ctx.mul(&acc, &ctx.gen_q);
        }
        assert_eq!(acc, ctx.one(), "gen_q does not have order q-1");
        ctx.unit_pow = unit_pow;
        Arc::new(ctx)
    }

    pub fn zero(&self) -> FElem {
        FElem {
            coeffs: vec![0; self.m as usize],
        }
    }

    pub fn one(&self) -> FElem {
        self.from_u64(1)
    }

    pub fn from_u64(&self, a: u64) -> FElem {
        let mut z = self.zero();
        z.coeffs[0] = (a % self.p) as u32;
        z
    }

    pub fn from_i64(&self, a: i64) -> FElem {
        let r = a.rem_euclid(self.p as i64) as u64;
        self.from_u64(r)
    }

    pub fn is_zero(&self, a: &FElem) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FElem, b: &FElem) -> FElem {
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| ((x as u64 + y as u64) % self.p) as u32)
            .collect();
        FElem { coeffs }
    }

    pub fn neg(&self, a: &FElem) -> FElem {
        let coeffs = a
            .coeffs
            .iter()
            .map(|&x| ((self.p - x as u64) % self.p) as u32)
            .collect();
        FElem { coeffs }
    }

    pub fn sub(&self, a: &FElem, b: &FElem) -> FElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FElem, b: &FElem) -> FElem {
        let m = self.m as usize;
        let p = self.p;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // reduce: x^m == -tail
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for (k, &t) in self.modulus_tail.iter().enumerate() {
                if t != 0 {
                    let idx = i - m + k;
                    prod[idx] = (prod[idx] + c * (p - t as u64)) % p;
                }
            }
        }
        FElem {
            coeffs: prod[..m].iter().map(|&c| c as u32).collect(),
        }
    }

    pub fn pow(&self, a: &FElem, mut e: u64) -> FElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn pow_i(&self, a: &FElem, e: i64) -> FElem {
        if e >= 0 {
            self.pow(a, e as u64)
        } else {
            self.pow(&self.inv(a), (-e) as u64)
        }
    }

    pub fn inv(&self, a: &FElem) -> FElem {
        assert!(!self.is_zero(a), "division by zero in F_{{p^m}}");
        self.pow(a, self.card - 2)
    }

    /// Embed the unit g_q^e of the residue field, e taken mod q-1.
    pub fn unit(&self, e: i64) -> FElem {
        let n = (self.q - 1) as i64;
        let e = e.rem_euclid(n) as usize;
        self.unit_pow[e].clone()
    }

    /// -1 as a residue-field unit exponent: (q-1)/2.
    pub fn minus_one_exp(&self) -> i64 {
        ((self.q - 1) / 2) as i64
    }

    /// Embed a prime-field residue (value mod p) into F_{p^m}.
    pub fn from_residue(&self, a: u64) -> FElem {
        self.from_u64(a)
    }

    fn find_generator(&self) -> FElem {
        let n = self.card - 1;
        let facs = prime_factors(n);
        let mut cand = self.zero();
        loop {
            cand = self.next_elem(&cand);
            if self.is_zero(&cand) {
                panic!("no generator found");
            }
            if facs.iter().all(|&l| self.pow(&cand, n / l) != self.one()) {
                return cand;
            }
        }
    }

    fn next_elem(&self, a: &FElem) -> FElem {
        let mut c = a.coeffs.clone();
        for v in c.iter_mut() {
            if (*v as u64) + 1 < self.p {
                *v += 1;
                return FElem { coeffs: c };
            }
            *v = 0;
        }
        FElem { coeffs: c } // wrapped to zero
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest monic irreducible of degree m over F_p, ordered lexicographically
/// on the coefficient tuple (c_0, c_1, ..., c_{m-1}). Returns the tail.
fn smallest_irreducible(p: u64, m: u32) -> Vec<u32> {
    let m = m as usize;
    let mut tail = vec![0u32; m];
    loop {
        if is_irreducible(p, &tail) {
            return tail;
        }
        let mut i = 0;
        loop {
            if (tail[i] as u64) + 1 < p {
                tail[i] += 1;
                break;
            }
            tail[i] = 0;
            i += 1;
            assert!(i < m, "no irreducible polynomial found (impossible)");
        }
    }
}

/// Irreducibility of x^m + tail over F_p: x^{p^m} ≡ x and gcd(x^{p^{m/l}} - x, f) = 1 for prime l | m.
fn is_irreducible(p: u64, tail: &[u32]) -> bool {
    let m = tail.len();
    // polynomial arithmetic mod f, coefficients little-endian length m
    let polymul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut prod = vec![0u64; 2 * m - 1];
        for i in 0..m {
            if a[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = (prod[i + j] + a[i] * b[j]) % p;
            }
        }
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for k in 0..m {
                if tail[k] != 0 {
                    prod[i - m + k] = (prod[i - m + k] + c * (p - tail[k] as u64)) % p;
                }
            }
        }
        prod.truncate(m);
        prod
    };
    let frob = |a: &[u64]| -> Vec<u64> {
        // a^p by square-and-multiply
        let mut acc = vec![0u64; m];
        acc[0] = 1;
        let mut base = a.to_vec();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = polymul(&acc, &base);
            }
            base = polymul(&base, &base);
            e >>= 1;
        }
        acc
    };
    let mut x = vec![0u64; m];
    if m == 1 {
        return true; // any monic linear polynomial is irreducible
    }
    x[1] = 1;
    // x^{p^k} for k = 1..m
    let mut fr = vec![x.clone()];
    let mut cur = x.clone();
    for _ in 0..m {
        cur = frob(&cur);
        fr.push(cur.clone());
    }
    if fr[m] != x {
        return false;
    }
    for &l in &prime_factors(m as u64) {
        let k = m / l as usize;
        // gcd(x^{p^k} - x, f) must be 1, equivalently x^{p^k} - x invertible mod f,
        // equivalently x^{p^k} != x would not suffice; do a real gcd.
        let mut diff = fr[k].clone();
        // subtract x
        diff[1] = (diff[1] + p - 1) % p;
        if !gcd_is_one(p, tail, &diff) {
            return false;
        }
    }
    true
}

fn gcd_is_one(p: u64, tail: &[u32], g: &[u64]) -> bool {
    // gcd of f = x^m + tail with g (degree < m) over F_p
    let m = tail.len();
    let mut a: Vec<u64> = tail.iter().map(|&c| c as u64).collect();
    a.push(1); // f, degree m
    let mut b: Vec<u64> = g.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = polyrem(p, &a, &b);
        a = b;
        b = r;
    }
    a.len() == 1
}

fn trim(v: &mut Vec<u64>) {
    while let Some(&0) = v.last() {
        v.pop();
    }
}

fn polyrem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inv(*b.last().unwrap(), p);
    while r.len() > db {
        let c = (*r.last().unwrap() * lead_inv) % p;
        let shift = r.len() - 1 - db;
        if c != 0 {
            for i in 0..=db {
                let idx = shift + i;
                r[idx] = (r[idx] + (p - (c * b[i]) % p)) % p;
            }
        }
        r.pop();
        while let Some(&0) = r.last() {
            r.pop();
        }
        if r.len() <= db {
            break;
        }
    }
    r
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f25_arithmetic() {
        let f = FieldCtx::new(5, 2, 2);
        assert_eq!(f.card, 25);
        let g = f.gen.clone();
        // generator order
        let mut acc = f.one();
        let mut seen = std::collections::HashSet::new();
        for _ in 0..24 {
            acc = f.mul(&acc, &g);
            seen.insert(acc.coeffs.clone());
        }
        assert_eq!(acc, f.one());
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn residue_subfield_embedding() {
        // F_q = F_5 inside F_{5^2}: gen_q has order 4 and powers lie in the prime field
        let f = FieldCtx::new(5, 1, 2);
        assert_eq!(f.q, 5);
        for e in 0..4 {
            let u = f.unit(e);
            assert_eq!(u.coeffs[1], 0, "prime-subfield unit must be scalar");
        }
        assert_eq!(f.unit(f.minus_one_exp()), f.from_i64(-1));
    }

    #[test]
    fn inverse_and_pow() {
        let f = FieldCtx::new(3, 2, 4);
        let a = f.gen.clone();
        let ai = f.inv(&a);
        assert_eq!(f.mul(&a, &ai), f.one());
        assert_eq!(f.pow(&a, f.card - 1), f.one());
    }

    #[test]
    fn gauss_sum_brute_force() {
        // sum over x in F_q^* of embed(x)^a: -1 if a ≡ 0 mod q-1 else 0
        for (p, fdeg, m) in [(3u64, 1u32, 2u32), (5, 1, 2), (3, 2, 2), (5, 2, 2)] {
            let f = FieldCtx::new(p, fdeg, m);
            let q1 = (f.q - 1) as i64;
            for a in 0..(2 * q1) {
                let mut s = f.zero();
                for j in 0..q1 {
                    s = f.add(&s, &f.unit(a * j));
                }
                let expect = if a % q1 == 0 {
                    f.from_i64(-1)
                } else {
                    f.zero()
                };
                assert_eq!(s, expect, "p={p} f={fdeg} a={a}");
            }
        }
    }
}
