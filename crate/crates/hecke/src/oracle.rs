//! Truncated p-adic matrix brute force over Q_p: verifies the coset-transfer
//! conjugation formulas and the graded Hecke-action coefficients against the
//! formula layer, entry by entry.
//!
//! Numbers carry a mantissa, a base exponent and an absolute error exponent;
//! operations propagate the error window so that every membership test either
//! decides within the window or reports precision exhaustion.

use crate::chevalley::d_const;
use crate::cohomology::{build_gr0_single, build_m_beta_r, w_beta_prime, Ctx};
use crate::field::FElem;
use crate::heckemod::GenId;
use crate::monomial::MonomialMatrix;
use crate::report::SuiteReport;
use crate::weyl::{positive_roots, simple_affine_roots, AffineRoot, Root, WeylElt};

const ZERO_DEPTH: i32 = 3;

/// A p-adic number known modulo p^err: value ≡ man * p^base, man coprime to p
/// unless zero within the window.
#[derive(Clone, Copy, Debug)]
pub struct PAdic {
    pub man: i128,
    pub base: i32,
    pub err: i32,
}

#[derive(Clone, Copy, Debug)]
pub struct PCtx {
    pub p: u64,
    pub kprec: i32,
}

impl PCtx {
    pub fn new(p: u64, kprec: i32) -> PCtx {
        PCtx { p, kprec }
    }

    fn ppow(&self, e: i32) -> i128 {
        let mut r = 1i128;
        for _ in 0..e.clamp(0, 40) {
            r *= self.p as i128;
        }
        r
    }

    pub fn zero(&self) -> PAdic {
        PAdic {
            man: 0,
            base: i32::MAX / 4,
            err: i32::MAX / 4,
        }
    }

    pub fn from_int(&self, c: i64) -> PAdic {
        self.normalize(PAdic {
            man: c as i128,
            base: 0,
            err: 2 * self.kprec,
        })
    }

    fn normalize(&self, x: PAdic) -> PAdic {
        let p = self.p as i128;
        let width = x.err.saturating_sub(x.base).max(0);
        let modulus = self.ppow(width);
        let mut man = x.man.rem_euclid(modulus.max(1));
        let mut base = x.base;
        if man == 0 || width == 0 {
            return PAdic {
                man: 0,
                base: x.err,
                err: x.err,
            };
        }
        while man % p == 0 {
            man /= p;
            base += 1;
        }
        PAdic {
            man,
            base,
            err: x.err,
        }
    }

    pub fn add(&self, a: &PAdic, b: &PAdic) -> PAdic {
        let err = a.err.min(b.err);
        let base = a.base.min(b.base).min(err);
        let man = a.man * self.ppow(a.base.saturating_sub(base))
            + b.man * self.ppow(b.base.saturating_sub(base));
        self.normalize(PAdic { man, base, err })
    }

    pub fn neg(&self, a: &PAdic) -> PAdic {
        self.normalize(PAdic {
            man: -a.man,
            base: a.base,
            err: a.err,
        })
    }

    pub fn sub(&self, a: &PAdic, b: &PAdic) -> PAdic {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &PAdic, b: &PAdic) -> PAdic {
        if a.man == 0 || b.man == 0 {
            let err = (a.err.saturating_add(b.base)).min(b.err.saturating_add(a.base));
            return PAdic {
                man: 0,
                base: err,
                err,
            };
        }
        let err = (a.err + b.base).min(b.err + a.base);
        self.normalize(PAdic {
            man: a.man * b.man,
            base: a.base + b.base,
            err,
        })
    }

    pub fn inv(&self, a: &PAdic) -> PAdic {
        assert!(a.man != 0, "cannot invert a value indistinguishable from zero");
        let rel = a.err - a.base;
        let modulus = self.ppow(rel);
        let inv = mod_inv_prime_power(a.man.rem_euclid(modulus), modulus, self.p as i128);
        self.normalize(PAdic {
            man: inv,
            base: -a.base,
            err: rel - a.base,
        })
    }

    pub fn scale_p(&self, a: &PAdic, k: i32) -> PAdic {
        PAdic {
            man: a.man,
            base: a.base.saturating_add(k),
            err: a.err.saturating_add(k),
        }
    }

    pub fn teichmuller(&self, x: u64) -> PAdic {
        let x = x % self.p;
        if x == 0 {
            return self.zero();
        }
        let modulus = self.ppow(2 * self.kprec);
        let mut t = x as i128;
        loop {
            let next = pow_mod(t, self.p as u128, modulus);
            if next == t {
                break;
            }
            t = next;
        }
        self.normalize(PAdic {
            man: t,
            base: 0,
            err: 2 * self.kprec,
        })
    }

    pub fn val_at_least(&self, a: &PAdic, k: i32) -> bool {
        if a.man != 0 {
            a.base >= k
        } else {
            assert!(
                a.err >= k,
                "precision exhausted deciding valuation >= {k}: {a:?}"
            );
            true
        }
    }

    pub fn is_zero_mod(&self, a: &PAdic, k: i32) -> bool {
        self.val_at_least(a, k)
    }

    /// Residue digit of an integral value.
    pub fn residue(&self, a: &PAdic) -> u64 {
        assert!(self.val_at_least(a, 0));
        if a.man == 0 || a.base >= 1 {
            return 0;
        }
        (a.man.rem_euclid(self.p as i128)) as u64
    }

    pub fn eq_mod(&self, a: &PAdic, b: &PAdic, k: i32) -> bool {
        self.is_zero_mod(&self.sub(a, b), k)
    }
}

fn pow_mod(mut b: i128, mut e: u128, m: i128) -> i128 {
    let mut r = 1i128;
    b = b.rem_euclid(m);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn mod_inv_prime_power(a: i128, modulus: i128, p: i128) -> i128 {
    let mut inv = pow_mod(a.rem_euclid(p), (p - 2) as u128, p);
    let mut m = p;
    while m < modulus {
        m = (m * m).min(modulus);
        inv = (inv * (2 - (a % m) * inv % m)).rem_euclid(m);
    }
    inv.rem_euclid(modulus)
}

/// Truncated matrix over Q_p.
#[derive(Clone, Debug)]
pub struct TMat {
    pub n: usize,
    pub e: Vec<PAdic>,
}

impl TMat {
    pub fn identity(ctx: &PCtx, n: usize) -> TMat {
        let mut e = vec![ctx.zero(); n * n];
        for i in 0..n {
            e[i * n + i] = ctx.from_int(1);
        }
        TMat { n, e }
    }

    pub fn at(&self, i: usize, j: usize) -> &PAdic {
        &self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: PAdic) {
        self.e[i * self.n + j] = v;
    }

    pub fn mul(&self, ctx: &PCtx, o: &TMat) -> TMat {
        let n = self.n;
        let mut out = TMat {
            n,
            e: vec![ctx.zero(); n * n],
        };
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                for j in 0..n {
                    let t = ctx.mul(a, o.at(k, j));
                    let cur = *out.at(i, j);
                    out.set(i, j, ctx.add(&cur, &t));
                }
            }
        }
        out
    }

    pub fn unipotent(ctx: &PCtx, n: usize, root: &Root, level: i32, y: &PAdic) -> TMat {
        let mut m = TMat::identity(ctx, n);
        m.set(root.j, root.k, ctx.scale_p(y, level));
        m
    }

    pub fn affine_refl(ctx: &PCtx, n: usize, ar: &AffineRoot) -> TMat {
        let mut m = TMat::identity(ctx, n);
        let l = ar.level as i32;
        m.set(ar.root.j, ar.root.j, ctx.zero());
        m.set(ar.root.k, ar.root.k, ctx.zero());
        m.set(ar.root.j, ar.root.k, ctx.scale_p(&ctx.from_int(1), l));
        m.set(ar.root.k, ar.root.j, ctx.scale_p(&ctx.from_int(-1), -l));
        m
    }

    pub fn affine_refl_inv(ctx: &PCtx, n: usize, ar: &AffineRoot) -> TMat {
        let mut m = TMat::identity(ctx, n);
        let l = ar.level as i32;
        m.set(ar.root.j, ar.root.j, ctx.zero());
        m.set(ar.root.k, ar.root.k, ctx.zero());
        m.set(ar.root.j, ar.root.k, ctx.scale_p(&ctx.from_int(-1), l));
        m.set(ar.root.k, ar.root.j, ctx.scale_p(&ctx.from_int(1), -l));
        m
    }

    pub fn coroot(ctx: &PCtx, n: usize, root: &Root, v: &PAdic) -> TMat {
        let mut m = TMat::identity(ctx, n);
        m.set(root.j, root.j, *v);
        m.set(root.k, root.k, ctx.inv(v));
        m
    }

    pub fn diag(ctx: &PCtx, vals: &[PAdic]) -> TMat {
        let n = vals.len();
        let mut m = TMat::identity(ctx, n);
        for (i, v) in vals.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Convert an exact monomial matrix; unit exponents go through the
    /// Teichmueller lift of the given residue generator.
    pub fn from_monomial(ctx: &PCtx, m: &MonomialMatrix, gen_res: u64) -> TMat {
        let n = m.n;
        let mut out = TMat {
            n,
            e: vec![ctx.zero(); n * n],
        };
        let g = ctx.teichmuller(gen_res);
        for (j, entry) in m.cols.iter().enumerate() {
            let mut unit = ctx.from_int(1);
            for _ in 0..entry.uexp.rem_euclid(m.umod) {
                unit = ctx.mul(&unit, &g);
            }
            out.set(entry.row, j, ctx.scale_p(&unit, entry.wpow as i32));
        }
        out
    }

    pub fn in_i1(&self, ctx: &PCtx) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let a = self.at(i, j);
                let ok = if i == j {
                    ctx.val_at_least(&ctx.sub(a, &ctx.from_int(1)), 1)
                } else if i < j {
                    ctx.val_at_least(a, 0)
                } else {
                    ctx.val_at_least(a, 1)
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn eq_mod(&self, ctx: &PCtx, o: &TMat, k: i32) -> bool {
        self.e.iter().zip(&o.e).all(|(a, b)| ctx.eq_mod(a, b, k))
    }
}

/// Commutator constant in type A: [1 + xE_a, 1 + yE_b] = 1 + c xy E_{a+b}.
pub fn commutator_constant(a: &Root, b: &Root) -> i64 {
    if a.k == b.j && a.j != b.k {
        1
    } else if b.k == a.j && b.j != a.k {
        -1
    } else {
        0
    }
}

fn root_sum(a: &Root, b: &Root) -> Option<Root> {
    if a.k == b.j && a.j != b.k {
        Some(Root::new(a.j, b.k))
    } else if b.k == a.j && b.j != a.k {
        Some(Root::new(b.j, a.k))
    } else {
        None
    }
}

pub struct Transfer {
    pub x_new: u64,
    pub xi: TMat,
}

pub fn coset_rep(ctx: &PCtx, n: usize, node: &AffineRoot, x: u64) -> TMat {
    let refl = TMat::affine_refl(ctx, n, node);
    let u = TMat::unipotent(ctx, n, &node.root, node.level as i32, &ctx.teichmuller(x));
    refl.mul(ctx, &u)
}

fn coset_rep_inv(ctx: &PCtx, n: usize, node: &AffineRoot, x: u64) -> TMat {
    let refl_inv = TMat::affine_refl_inv(ctx, n, node);
    let u = TMat::unipotent(
        ctx,
        n,
        &node.root,
        node.level as i32,
        &ctx.neg(&ctx.teichmuller(x)),
    );
    u.mul(ctx, &refl_inv)
}

pub fn coset_transfer(
    ctx: &PCtx,
    n: usize,
    node: &AffineRoot,
    x: u64,
    h: &TMat,
) -> Result<Transfer, String> {
    if !h.in_i1(ctx) {
        return Err("transfer input is not integral unipotent-mod-p".into());
    }
    let gh = coset_rep(ctx, n, node, x).mul(ctx, h);
    let mut found: Option<Transfer> = None;
    for xp in 0..ctx.p {
        let xi = gh.mul(ctx, &coset_rep_inv(ctx, n, node, xp));
        if xi.in_i1(ctx) {
            if found.is_some() {
                return Err("coset representative not unique".into());
            }
            found = Some(Transfer { x_new: xp, xi });
        }
    }
    found.ok_or_else(|| "no coset representative found".into())
}

fn refl_perm(n: usize, r: &Root) -> WeylElt {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(r.j, r.k);
    WeylElt { perm }
}

fn smallest_generator_residue(p: u64) -> u64 {
    'cand: for g in 2..p {
        let mut x = 1u64;
        for _ in 0..p - 2 {
            x = x * g % p;
            if x == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    panic!("no generator mod {p}")
}

fn y_samples(ctx: &PCtx, gen_res: u64) -> Vec<PAdic> {
    vec![
        ctx.zero(),
        ctx.from_int(1),
        ctx.from_int(ctx.p as i64 - 1),
        ctx.teichmuller(gen_res),
        ctx.from_int(ctx.p as i64),
        ctx.from_int(ctx.p as i64 + 1),
    ]
}

fn t1_samples(ctx: &PCtx, n: usize) -> Vec<TMat> {
    let mut out = Vec::new();
    for slot in 0..n {
        let mut vals = vec![ctx.from_int(1); n];
        vals[slot] = ctx.from_int(1 + ctx.p as i64);
        out.push(TMat::diag(ctx, &vals));
    }
    let mut vals = vec![ctx.from_int(1); n];
    for (slot, v) in vals.iter_mut().enumerate() {
        *v = ctx.from_int(1 + (slot as i64 + 1) * ctx.p as i64);
    }
    out.push(TMat::diag(ctx, &vals));
    out
}

fn beta_range(n: usize) -> Vec<AffineRoot> {
    let mut out: Vec<AffineRoot> = positive_roots(n)
        .into_iter()
        .map(|r| AffineRoot::new(r, 0))
        .collect();
    out.extend(
        positive_roots(n)
            .into_iter()
            .map(|r| AffineRoot::new(r.neg(), 1)),
    );
    out
}

/// Exhaustive verification of the transfer formulas.
pub fn verify_conj_suite(n: usize, p: u64, kprec: i32) -> SuiteReport {
    let ctx = PCtx::new(p, kprec);
    let mut rep = SuiteReport {
        checked: 0,
        failures: Vec::new(),
    };
    let gen_res = smallest_generator_residue(p);
    for node in simple_affine_roots(n) {
        let alpha = node.root;
        let l = node.level as i32;
        for x in 0..p {
            // same-root case
            for y in y_samples(&ctx, gen_res) {
                rep.checked += 1;
                let h = TMat::unipotent(&ctx, n, &alpha, l, &y);
                let tr = match coset_transfer(&ctx, n, &node, x, &h) {
                    Ok(t) => t,
                    Err(e) => {
                        rep.failures.push(format!("transfer failed at {node:?}: {e}"));
                        continue;
                    }
                };
                let ybar = ctx.residue(&y);
                if tr.x_new != (x + ybar) % p {
                    rep.failures
                        .push(format!("same-root index at {node:?} x={x}"));
                    continue;
                }
                let arg = ctx.sub(
                    &ctx.sub(&ctx.teichmuller((x + ybar) % p), &ctx.teichmuller(x)),
                    &y,
                );
                let expect = TMat::unipotent(&ctx, n, &alpha.neg(), -l, &arg);
                if !tr.xi.eq_mod(&ctx, &expect, ZERO_DEPTH) {
                    rep.failures
                        .push(format!("same-root value at {node:?} x={x}"));
                }
            }
            // distinct-root cases
            for bnode in beta_range(n) {
                if bnode == node {
                    continue;
                }
                let beta = bnode.root;
                let m = bnode.level as i32;
                for y in y_samples(&ctx, gen_res) {
                    rep.checked += 1;
                    let h = TMat::unipotent(&ctx, n, &beta, m, &y);
                    let tr = match coset_transfer(&ctx, n, &node, x, &h) {
                        Ok(t) => t,
                        Err(e) => {
                            rep.failures
                                .push(format!("transfer failed {node:?} {bnode:?}: {e}"));
                            continue;
                        }
                    };
                    if tr.x_new != x {
                        rep.failures
                            .push(format!("index moved at {node:?} {bnode:?} x={x}"));
                        continue;
                    }
                    let expect = if beta == alpha.neg() {
                        let nu = ctx.add(
                            &ctx.from_int(1),
                            &ctx.mul(&ctx.scale_p(&ctx.teichmuller(x), 1), &y),
                        );
                        let nu_inv = ctx.inv(&nu);
                        let t1 = TMat::unipotent(
                            &ctx,
                            n,
                            &alpha,
                            l,
                            &ctx.neg(&ctx.mul(&ctx.scale_p(&y, 1), &nu_inv)),
                        );
                        let t2 = TMat::coroot(&ctx, n, &alpha, &nu_inv);
                        let x2 = ctx.mul(&ctx.teichmuller(x), &ctx.teichmuller(x));
                        let t3 = TMat::unipotent(
                            &ctx,
                            n,
                            &beta,
                            m,
                            &ctx.mul(&x2, &ctx.mul(&y, &nu_inv)),
                        );
                        let lhs = t1.mul(&ctx, &t2).mul(&ctx, &t3);
                        // the reversed normal form with 1 - pi [x] y
                        let nup = ctx.sub(
                            &ctx.from_int(1),
                            &ctx.mul(&ctx.scale_p(&ctx.teichmuller(x), 1), &y),
                        );
                        let nup_inv = ctx.inv(&nup);
                        let r1 = TMat::unipotent(
                            &ctx,
                            n,
                            &beta,
                            m,
                            &ctx.mul(&x2, &ctx.mul(&y, &nup_inv)),
                        );
                        let r2 = TMat::coroot(&ctx, n, &alpha, &nup);
                        let r3 = TMat::unipotent(
                            &ctx,
                            n,
                            &alpha,
                            l,
                            &ctx.neg(&ctx.mul(&ctx.scale_p(&y, 1), &nup_inv)),
                        );
                        let rhs2 = r1.mul(&ctx, &r2).mul(&ctx, &r3);
                        rep.checked += 1;
                        if !lhs.eq_mod(&ctx, &rhs2, ZERO_DEPTH) {
                            rep.failures
                                .push(format!("normal forms disagree {node:?} x={x}"));
                        }
                        lhs
                    } else {
                        let pairing = beta.pair_coroot(&alpha) as i32;
                        let salpha = refl_perm(n, &alpha);
                        let mut acc = TMat::identity(&ctx, n);
                        if let Some(s) = root_sum(&alpha, &beta) {
                            let c = commutator_constant(&alpha, &beta);
                            let d = d_const(&alpha, &s, n);
                            let coeff = ctx.mul(
                                &ctx.scale_p(
                                    &ctx.mul(&ctx.from_int(d * c), &ctx.teichmuller(x)),
                                    -l + m - pairing * l,
                                ),
                                &y,
                            );
                            acc =
                                acc.mul(&ctx, &TMat::unipotent(&ctx, n, &salpha.act(&s), 0, &coeff));
                        }
                        let d = d_const(&alpha, &beta, n);
                        let coeff =
                            ctx.scale_p(&ctx.mul(&ctx.from_int(d), &y), m - pairing * l);
                        acc.mul(&ctx, &TMat::unipotent(&ctx, n, &salpha.act(&beta), 0, &coeff))
                    };
                    if !tr.xi.eq_mod(&ctx, &expect, ZERO_DEPTH) {
                        rep.failures
                            .push(format!("transfer value {node:?} {bnode:?} x={x}"));
                    }
                    if x != 0 {
                        rep.checked += 1;
                        let xinv = ctx.inv(&ctx.teichmuller(x));
                        let conj = TMat::unipotent(&ctx, n, &alpha, l, &xinv)
                            .mul(&ctx, &tr.xi)
                            .mul(&ctx, &TMat::unipotent(&ctx, n, &alpha, l, &ctx.neg(&xinv)));
                        let expect2 = if beta == alpha.neg() {
                            let x2 = ctx.mul(&ctx.teichmuller(x), &ctx.teichmuller(x));
                            TMat::unipotent(&ctx, n, &beta, m, &ctx.mul(&x2, &y))
                        } else {
                            let pairing = beta.pair_coroot(&alpha);
                            let mut acc = TMat::identity(&ctx, n);
                            if let Some(s) = root_sum(&alpha.neg(), &beta) {
                                let c = commutator_constant(&alpha.neg(), &beta);
                                let sign = if pairing.rem_euclid(2) == 0 { 1 } else { -1 };
                                let xpow = pow_padic(&ctx, &ctx.teichmuller(x), 1 - pairing);
                                let coeff = ctx.mul(
                                    &ctx.scale_p(
                                        &ctx.mul(&ctx.from_int(c * sign), &xpow),
                                        -l + m,
                                    ),
                                    &y,
                                );
                                acc = acc.mul(&ctx, &TMat::unipotent(&ctx, n, &s, 0, &coeff));
                            }
                            let mxinv = ctx.neg(&xinv);
                            let coeff = ctx.scale_p(
                                &ctx.mul(&pow_padic(&ctx, &mxinv, pairing), &y),
                                m,
                            );
                            acc.mul(&ctx, &TMat::unipotent(&ctx, n, &beta, 0, &coeff))
                        };
                        if !conj.eq_mod(&ctx, &expect2, ZERO_DEPTH) {
                            rep.failures.push(format!(
                                "unit-conjugated transfer {node:?} {bnode:?} x={x}"
                            ));
                        }
                    }
                }
            }
            // torus case
            for t in t1_samples(&ctx, n) {
                rep.checked += 1;
                let tr = match coset_transfer(&ctx, n, &node, x, &t) {
                    Ok(t) => t,
                    Err(e) => {
                        rep.failures.push(format!("torus transfer failed: {e}"));
                        continue;
                    }
                };
                if tr.x_new != x {
                    rep.failures.push(format!("torus moved index at {node:?}"));
                    continue;
                }
                let t_conj = TMat::affine_refl(&ctx, n, &node)
                    .mul(&ctx, &t)
                    .mul(&ctx, &TMat::affine_refl_inv(&ctx, n, &node));
                let alpha_t = ctx.mul(t.at(alpha.j, alpha.j), &ctx.inv(t.at(alpha.k, alpha.k)));
                let coeff = ctx.mul(
                    &ctx.sub(&ctx.from_int(1), &ctx.inv(&alpha_t)),
                    &ctx.teichmuller(x),
                );
                let expect =
                    t_conj.mul(&ctx, &TMat::unipotent(&ctx, n, &alpha.neg(), -l, &coeff));
                if !tr.xi.eq_mod(&ctx, &expect, ZERO_DEPTH) {
                    rep.failures.push(format!("torus transfer at {node:?} x={x}"));
                }
                if x != 0 {
                    rep.checked += 1;
                    let xinv = ctx.inv(&ctx.teichmuller(x));
                    let conj = TMat::unipotent(&ctx, n, &alpha, l, &xinv)
                        .mul(&ctx, &tr.xi)
                        .mul(&ctx, &TMat::unipotent(&ctx, n, &alpha, l, &ctx.neg(&xinv)));
                    let coeff2 = ctx.mul(
                        &ctx.sub(&alpha_t, &ctx.from_int(1)),
                        &ctx.teichmuller(x),
                    );
                    let expect2 =
                        t.mul(&ctx, &TMat::unipotent(&ctx, n, &alpha.neg(), -l, &coeff2));
                    if !conj.eq_mod(&ctx, &expect2, ZERO_DEPTH) {
                        rep.failures
                            .push(format!("unit-conjugated torus transfer {node:?} x={x}"));
                    }
                }
            }
            // cocycle law
            let h1 = TMat::unipotent(&ctx, n, &alpha, l, &ctx.from_int(1));
            for h2 in t1_samples(&ctx, n) {
                rep.checked += 1;
                let hh = h1.mul(&ctx, &h2);
                match (
                    coset_transfer(&ctx, n, &node, x, &hh),
                    coset_transfer(&ctx, n, &node, x, &h1),
                ) {
                    (Ok(ta), Ok(t1)) => match coset_transfer(&ctx, n, &node, t1.x_new, &h2) {
                        Ok(t2) => {
                            if ta.x_new != t2.x_new
                                || !ta.xi.eq_mod(&ctx, &t1.xi.mul(&ctx, &t2.xi), ZERO_DEPTH)
                            {
                                rep.failures
                                    .push(format!("cocycle law fails at {node:?} x={x}"));
                            }
                        }
                        Err(e) => rep.failures.push(format!("cocycle step: {e}")),
                    },
                    (Err(e), _) | (_, Err(e)) => rep.failures.push(format!("cocycle: {e}")),
                }
            }
        }
    }
    rep
}

fn pow_padic(ctx: &PCtx, a: &PAdic, e: i64) -> PAdic {
    let mut acc = ctx.from_int(1);
    let base = if e >= 0 { *a } else { ctx.inv(a) };
    for _ in 0..e.abs() {
        acc = ctx.mul(&acc, &base);
    }
    acc
}

/// Verify the unipotent decomposition on Teichmueller and deeper samples.
pub fn verify_unip(n: usize, p: u64, kprec: i32) -> SuiteReport {
    let ctx = PCtx::new(p, kprec);
    let mut rep = SuiteReport {
        checked: 0,
        failures: Vec::new(),
    };
    for node in simple_affine_roots(n) {
        let alpha = node.root;
        let l = node.level as i32;
        let mut samples = Vec::new();
        for x in 1..p {
            samples.push(ctx.teichmuller(x));
            samples.push(ctx.scale_p(&ctx.teichmuller(x), 1));
        }
        for xval in samples {
            rep.checked += 1;
            let lhs = TMat::unipotent(&ctx, n, &alpha.neg(), -l, &xval);
            let xinv = ctx.inv(&xval);
            let rhs = TMat::unipotent(&ctx, n, &alpha, l, &xinv)
                .mul(&ctx, &TMat::coroot(&ctx, n, &alpha, &xinv))
                .mul(&ctx, &TMat::affine_refl_inv(&ctx, n, &node))
                .mul(&ctx, &TMat::unipotent(&ctx, n, &alpha, l, &xinv));
            if !lhs.eq_mod(&ctx, &rhs, ZERO_DEPTH) {
                rep.failures
                    .push(format!("unipotent decomposition at {node:?}"));
            }
        }
    }
    rep
}

/// Coordinate extraction: factor an element of I1 ∩ w^{-1} B w into root
/// coordinates (peeled from the left by increasing height of the positive
/// image, several passes until the residual is diagonal) and a pro-p torus
/// part. Entries outside the allowed support must vanish. The peel order is
/// exact: g = prod(steps) * torus.
pub fn factor_coords(
    ctx: &PCtx,
    g: &TMat,
    w: &WeylElt,
    reverse_within_height: bool,
) -> Result<(Vec<(Root, PAdic)>, TMat), String> {
    let n = g.n;
    let mut roots: Vec<(i64, Root, Root)> = positive_roots(n)
        .into_iter()
        .map(|gamma| (gamma.height(), w.inv().act(&gamma), gamma))
        .collect();
    roots.sort_by_key(|&(h, _, g0)| {
        if reverse_within_height {
            (h, usize::MAX - g0.j, usize::MAX - g0.k)
        } else {
            (h, g0.j, g0.k)
        }
    });
    let allowed: Vec<Root> = roots.iter().map(|&(_, rr, _)| rr).collect();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = Root::new(i, j);
            if !allowed.contains(&r) && !ctx.is_zero_mod(g.at(i, j), ZERO_DEPTH) {
                return Err(format!(
                    "element not supported on the coordinate subgroup at {r:?}"
                ));
            }
        }
    }
    let mut cur = g.clone();
    let mut coords: Vec<(Root, PAdic)> = Vec::new();
    let mut passes = 0;
    loop {
        let mut clean = true;
        for &(_, rr, _) in &roots {
            let y = ctx.mul(cur.at(rr.j, rr.k), &ctx.inv(cur.at(rr.k, rr.k)));
            if y.man == 0 || y.base >= ctx.kprec {
                continue;
            }
            clean = false;
            coords.push((rr, y));
            let elim = TMat::unipotent(ctx, n, &rr, 0, &ctx.neg(&y));
            cur = elim.mul(ctx, &cur);
        }
        if clean {
            break;
        }
        passes += 1;
        if passes > 8 {
            return Err("coordinate peeling did not converge".into());
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && !ctx.is_zero_mod(cur.at(i, j), ZERO_DEPTH) {
                return Err("factorization left off-diagonal residue".into());
            }
        }
        if !ctx.val_at_least(&ctx.sub(cur.at(i, i), &ctx.from_int(1)), 1) {
            return Err("torus part is not pro-p".into());
        }
    }
    Ok((coords, cur))
}

/// Which homomorphism the oracle evaluates.
#[derive(Clone, Debug)]
pub enum HomSpec {
    /// Supported on the root subgroup of w^{-1}(beta) at coordinate w.
    Eta { w: WeylElt, beta: Root },
    /// Supported on the pro-p torus at coordinate w, slot functional.
    Theta { w: WeylElt, slot: usize },
}

impl HomSpec {
    fn w(&self) -> &WeylElt {
        match self {
            HomSpec::Eta { w, .. } | HomSpec::Theta { w, .. } => w,
        }
    }
}

pub struct OracleCtx<'a> {
    pub pctx: PCtx,
    pub coh: &'a Ctx,
    pub gen_res: u64,
    pub dlog: Vec<i64>,
}

impl<'a> OracleCtx<'a> {
    pub fn new(coh: &'a Ctx, kprec: i32) -> OracleCtx<'a> {
        assert!(coh.params.is_qp(), "the oracle runs over Q_p only");
        let p = coh.params.p;
        let gen_res = coh.fld.gen_q.coeffs[0] as u64;
        // discrete logarithms with respect to the chosen residue generator
        let mut dlog = vec![i64::MIN; p as usize];
        let mut x = 1u64;
        for e in 0..p - 1 {
            dlog[x as usize] = e as i64;
            x = x * gen_res % p;
        }
        assert_eq!(x, 1, "residue generator inconsistent");
        OracleCtx {
            pctx: PCtx::new(p, kprec),
            coh,
            gen_res,
            dlog,
        }
    }

    /// chi composed with the coroot of gamma, evaluated at a residue unit.
    fn chi_coroot_value(&self, gamma: &Root, unit_res: u64) -> FElem {
        let e = self.coh.chi.exps[gamma.j] - self.coh.chi.exps[gamma.k];
        self.coh.fld.unit(e * self.dlog[unit_res as usize])
    }

    /// Evaluate the homomorphism on an element of the coordinate subgroup,
    /// checking order independence of the extraction.
    pub fn hom_eval(&self, spec: &HomSpec, g: &TMat) -> Result<FElem, String> {
        let ctx = &self.pctx;
        let fld = &self.coh.fld;
        let (coords, torus) = factor_coords(ctx, g, spec.w(), false)?;
        let (coords_rev, torus_rev) = factor_coords(ctx, g, spec.w(), true)?;
        match spec {
            HomSpec::Eta { w, beta } => {
                let target = w.inv().act(beta);
                let depth = if target.is_positive() { 0 } else { 1 };
                let sum = |cs: &[(Root, PAdic)]| {
                    cs.iter()
                        .filter(|(r, _)| *r == target)
                        .fold(ctx.zero(), |acc, (_, y)| ctx.add(&acc, y))
                };
                let v1 = ctx.residue(&ctx.scale_p(&sum(&coords), -depth));
                let v2 = ctx.residue(&ctx.scale_p(&sum(&coords_rev), -depth));
                if v1 != v2 {
                    return Err("coordinate extraction is order dependent".into());
                }
                Ok(fld.from_residue(v1))
            }
            HomSpec::Theta { w, slot } => {
                // value of the slot functional on lift(w) t lift(w)^{-1}
                let src = w.inv().apply(*slot);
                let d = ctx.sub(torus.at(src, src), &ctx.from_int(1));
                let d2 = ctx.sub(torus_rev.at(src, src), &ctx.from_int(1));
                let v1 = ctx.residue(&ctx.scale_p(&d, -1));
                let v2 = ctx.residue(&ctx.scale_p(&d2, -1));
                if v1 != v2 {
                    return Err("torus extraction is order dependent".into());
                }
                Ok(fld.from_residue(v1))
            }
        }
    }

    /// Right side of the double-coset action formula for a reflection
    /// generator, evaluated on h at the given coordinate.
    pub fn act_node_eval(
        &self,
        spec: &HomSpec,
        node: &AffineRoot,
        node_elt: &MonomialMatrix,
        h: &TMat,
        wcoord: &WeylElt,
    ) -> Result<FElem, String> {
        let ctx = &self.pctx;
        let fld = &self.coh.fld;
        let n = self.coh.n;
        let alpha = node.root;
        let salpha = refl_perm(n, &alpha);
        let wa = wcoord.act(&alpha);
        let ws = wcoord.mul(&salpha);
        // zeta = chi(lift(w) node^{-1} lift(w s)^{-1})
        let zeta_arg = self
            .coh
            .lift(wcoord)
            .mul(&node_elt.inv())
            .mul(&self.coh.lift(&ws).inv());
        assert!(zeta_arg.is_diagonal());
        let zeta = self.coh.chi.eval(fld, &zeta_arg);
        let mut acc = fld.zero();
        if wa.is_positive() {
            if *spec.w() == ws {
                for x in 0..ctx.p {
                    let tr = coset_transfer(ctx, n, node, x, h)?;
                    acc = fld.add(&acc, &self.hom_eval(spec, &tr.xi)?);
                }
                acc = fld.mul(&acc, &zeta);
            }
        } else {
            if *spec.w() == ws {
                let tr = coset_transfer(ctx, n, node, 0, h)?;
                acc = fld.add(&acc, &fld.mul(&zeta, &self.hom_eval(spec, &tr.xi)?));
            }
            if spec.w() == wcoord {
                for x in 1..ctx.p {
                    let tr = coset_transfer(ctx, n, node, x, h)?;
                    let xinv = ctx.inv(&ctx.teichmuller(x));
                    let conj = TMat::unipotent(ctx, n, &alpha, node.level as i32, &xinv)
                        .mul(ctx, &tr.xi)
                        .mul(
                            ctx,
                            &TMat::unipotent(
                                ctx,
                                n,
                                &alpha,
                                node.level as i32,
                                &ctx.neg(&xinv),
                            ),
                        );
                    let coeff = self.chi_coroot_value(&wa, (ctx.p - x) % ctx.p);
                    acc = fld.add(&acc, &fld.mul(&coeff, &self.hom_eval(spec, &conj)?));
                }
            }
        }
        Ok(acc)
    }

    /// Action of a length-zero generator on the homomorphism, evaluated on h
    /// at the coordinate wcoord; elt is the exact monomial representative.
    pub fn act_len0_eval(
        &self,
        spec: &HomSpec,
        elt: &MonomialMatrix,
        h: &TMat,
        wcoord: &WeylElt,
    ) -> Result<FElem, String> {
        let ctx = &self.pctx;
        let fld = &self.coh.fld;
        let v = elt.perm();
        let src = wcoord.mul(&v.inv());
        if spec.w() != &src {
            return Ok(fld.zero());
        }
        let zeta_arg = self
            .coh
            .lift(&src)
            .mul(elt)
            .mul(&self.coh.lift(wcoord).inv());
        assert!(zeta_arg.is_diagonal());
        let zeta = self.coh.chi.eval_inv(fld, &zeta_arg);
        let em = TMat::from_monomial(ctx, elt, self.gen_res);
        let em_inv = TMat::from_monomial(ctx, &elt.inv(), self.gen_res);
        let conj = em.mul(ctx, h).mul(ctx, &em_inv);
        Ok(fld.mul(&zeta, &self.hom_eval(spec, &conj)?))
    }
}

/// Oracle comparison of the graded eta-module matrices, entry by entry,
/// plus the torus-direction audit of the bottom filtration cross terms.
pub fn oracle_graded_action(coh: &Ctx, beta: &Root, kprec: i32) -> SuiteReport {
    let mut rep = SuiteReport {
        checked: 0,
        failures: Vec::new(),
    };
    let octx = OracleCtx::new(coh, kprec);
    let ctx = &octx.pctx;
    let fld = &coh.fld;
    let n = coh.n;
    let module = build_m_beta_r(coh, beta, 0);
    let survivors = w_beta_prime(coh, beta);
    let shape = coh.full_shape();
    let ht1 = beta.height() == 1;
    let fil1 = if ht1 {
        Some(crate::filtration::build_fil1(coh))
    } else {
        None
    };
    let nfact = coh.elements.len();
    for (si, wsrc) in survivors.iter().enumerate() {
        let spec = HomSpec::Eta {
            w: wsrc.clone(),
            beta: *beta,
        };
        // reflection generators
        for (node, id) in shape.affine_nodes() {
            let node_elt = shape.gen_element(id);
            let salpha = refl_perm(n, &node.root);
            // eta-coefficient targets
            for wt in [wsrc.clone(), wsrc.mul(&salpha)] {
                let Some(ti) = survivors.iter().position(|u| *u == wt) else {
                    continue;
                };
                let troot = wt.inv().act(beta);
                let depth = if troot.is_positive() { 0 } else { 1 };
                let h = TMat::unipotent(
                    ctx,
                    n,
                    &troot,
                    0,
                    &ctx.scale_p(&ctx.from_int(1), depth),
                );
                rep.checked += 1;
                match octx.act_node_eval(&spec, &node, &node_elt, &h, &wt) {
                    Ok(got) => {
                        let expect = module.gen(id).at(si, ti).clone();
                        if got != expect {
                            rep.failures.push(format!(
                                "eta action: {} {:?} -> {:?}",
                                id.label(),
                                wsrc,
                                wt
                            ));
                        }
                    }
                    Err(e) => rep.failures.push(format!("eta action eval: {e}")),
                }
            }
            // torus-direction values at the source coordinate
            for (c, u) in torus_probe_indices(ctx.p, n) {
                let t = probe_torus(ctx, n, c, u);
                rep.checked += 1;
                match octx.act_node_eval(&spec, &node, &node_elt, &t, wsrc) {
                    Ok(got) => {
                        let expect = if let Some(f1) = &fil1 {
                            // compare with the cross coefficients into the
                            // depth-one copies
                            let bpos = beta.j;
                            let src_row = f1.theta_copies * nfact
                                + bpos * nfact
                                + coh.elements.iter().position(|w| w == wsrc).unwrap();
                            let mat = f1.module.gen(id);
                            let mut acc = fld.zero();
                            for slot in 0..n {
                                let col = slot * nfact
                                    + coh.elements.iter().position(|w| w == wsrc).unwrap();
                                let coeff = mat.at(src_row, col);
                                if fld.is_zero(coeff) {
                                    continue;
                                }
                                if wsrc.inv().apply(slot) == c {
                                    let uval = fld.from_residue(u);
                                    acc = fld.add(&acc, &fld.mul(coeff, &uval));
                                }
                            }
                            acc
                        } else {
                            fld.zero()
                        };
                        if ht1 {
                            if got != expect {
                                rep.failures.push(format!(
                                    "cross-term audit: {} at {:?} slot {}",
                                    id.label(),
                                    wsrc,
                                    c
                                ));
                            }
                        } else if wsrc.act(&node.root).is_positive() && !fld.is_zero(&got) {
                            rep.failures.push(format!(
                                "torus direction must vanish: {} at {:?}",
                                id.label(),
                                wsrc
                            ));
                        }
                    }
                    Err(e) => rep.failures.push(format!("torus direction eval: {e}")),
                }
            }
        }
        // length-zero generators
        for id in [GenId::OmBlock(0), GenId::OmBlockInv(0)] {
            let elt = shape.gen_element(id);
            let v = elt.perm();
            let wt = wsrc.mul(&v);
            let ti = survivors.iter().position(|u| *u == wt).unwrap();
            let troot = wt.inv().act(beta);
            let depth = if troot.is_positive() { 0 } else { 1 };
            let h = TMat::unipotent(ctx, n, &troot, 0, &ctx.scale_p(&ctx.from_int(1), depth));
            rep.checked += 1;
            match octx.act_len0_eval(&spec, &elt, &h, &wt) {
                Ok(got) => {
                    let expect = module.gen(id).at(si, ti).clone();
                    if got != expect {
                        rep.failures
                            .push(format!("rotation action {} at {:?}", id.label(), wsrc));
                    }
                }
                Err(e) => rep.failures.push(format!("rotation eval: {e}")),
            }
        }
        for i in 0..n {
            let mut entries = vec![(0i64, 0i64); n];
            entries[i] = (1, 0);
            let elt = MonomialMatrix::diagonal(coh.umod(), &entries);
            let troot = wsrc.inv().act(beta);
            let depth = if troot.is_positive() { 0 } else { 1 };
            let h = TMat::unipotent(ctx, n, &troot, 0, &ctx.scale_p(&ctx.from_int(1), depth));
            rep.checked += 1;
            match octx.act_len0_eval(&spec, &elt, &h, wsrc) {
                Ok(got) => {
                    let expect = module.gen(GenId::Torus(i)).at(si, si).clone();
                    if got != expect {
                        rep.failures
                            .push(format!("torus action slot {} at {:?}", i + 1, wsrc));
                    }
                }
                Err(e) => rep.failures.push(format!("torus action eval: {e}")),
            }
        }
    }
    rep
}

fn torus_probe_indices(p: u64, n: usize) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    for c in 0..n {
        out.push((c, 1));
        if p > 3 {
            out.push((c, 2));
        }
    }
    out
}

fn probe_torus(ctx: &PCtx, n: usize, slot: usize, u: u64) -> TMat {
    let mut vals = vec![ctx.from_int(1); n];
    vals[slot] = ctx.add(
        &ctx.from_int(1),
        &ctx.scale_p(&ctx.teichmuller(u), 1),
    );
    TMat::diag(ctx, &vals)
}

/// Oracle comparison of the degree-zero module on the torus homomorphisms,
/// including vanishing on the height-one directions.
pub fn oracle_gr0_action(coh: &Ctx, kprec: i32) -> SuiteReport {
    let mut rep = SuiteReport {
        checked: 0,
        failures: Vec::new(),
    };
    let octx = OracleCtx::new(coh, kprec);
    let ctx = &octx.pctx;
    let fld = &coh.fld;
    let n = coh.n;
    let module = build_gr0_single(coh);
    let shape = coh.full_shape();
    for (si, wsrc) in coh.elements.iter().enumerate() {
        for slot in 0..n {
            let spec = HomSpec::Theta {
                w: wsrc.clone(),
                slot,
            };
            for (node, id) in shape.affine_nodes() {
                let node_elt = shape.gen_element(id);
                let salpha = refl_perm(n, &node.root);
                for wt in [wsrc.clone(), wsrc.mul(&salpha)] {
                    let ti = coh.elements.iter().position(|u| *u == wt).unwrap();
                    for (c, u) in torus_probe_indices(ctx.p, n) {
                        let t = probe_torus(ctx, n, c, u);
                        rep.checked += 1;
                        match octx.act_node_eval(&spec, &node, &node_elt, &t, &wt) {
                            Ok(got) => {
                                // expected: coefficient * theta-value at the target
                                let coeff = module.gen(id).at(si, ti);
                                let tv = if wt.inv().apply(slot) == c {
                                    fld.from_residue(u)
                                } else {
                                    fld.zero()
                                };
                                let expect = fld.mul(coeff, &tv);
                                if got != expect {
                                    rep.failures.push(format!(
                                        "degree-zero action {} {:?} -> {:?}",
                                        id.label(),
                                        wsrc,
                                        wt
                                    ));
                                }
                            }
                            Err(e) => rep.failures.push(format!("degree-zero eval: {e}")),
                        }
                    }
                    // vanishing on the height-one directions (filtration stability)
                    let gamma = Root::simple(0);
                    let troot = wt.inv().act(&gamma);
                    let depth = if troot.is_positive() { 0 } else { 1 };
                    let h = TMat::unipotent(
                        ctx,
                        n,
                        &troot,
                        0,
                        &ctx.scale_p(&ctx.from_int(1), depth),
                    );
                    rep.checked += 1;
                    match octx.act_node_eval(&spec, &node, &node_elt, &h, &wt) {
                        Ok(got) => {
                            if !fld.is_zero(&got) {
                                rep.failures.push(format!(
                                    "degree-zero leak into height one: {} {:?}",
                                    id.label(),
                                    wsrc
                                ));
                            }
                        }
                        Err(e) => rep.failures.push(format!("stability eval: {e}")),
                    }
                }
            }
            // length-zero generators on torus probes
            for id in [GenId::OmBlock(0), GenId::OmBlockInv(0)] {
                let elt = shape.gen_element(id);
                let v = elt.perm();
                let wt = wsrc.mul(&v);
                let ti = coh.elements.iter().position(|u| *u == wt).unwrap();
                for (c, u) in torus_probe_indices(ctx.p, n) {
                    let t = probe_torus(ctx, n, c, u);
                    rep.checked += 1;
                    match octx.act_len0_eval(&spec, &elt, &t, &wt) {
                        Ok(got) => {
                            let coeff = module.gen(id).at(si, ti);
                            let tv = if wt.inv().apply(slot) == c {
                                fld.from_residue(u)
                            } else {
                                fld.zero()
                            };
                            let expect = fld.mul(coeff, &tv);
                            if got != expect {
                                rep.failures.push(format!(
                                    "degree-zero rotation {} at {:?}",
                                    id.label(),
                                    wsrc
                                ));
                            }
                        }
                        Err(e) => rep.failures.push(format!("rotation eval: {e}")),
                    }
                }
            }
        }
    }
    rep
}

/// Factor-then-multiply round trip on deterministic pseudo-random elements.
pub fn verify_factorization_roundtrip(n: usize, p: u64, kprec: i32) -> SuiteReport {
    let ctx = PCtx::new(p, kprec);
    let mut rep = SuiteReport {
        checked: 0,
        failures: Vec::new(),
    };
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    let id = WeylElt::identity(n);
    for _ in 0..100 {
        let mut g = TMat::identity(&ctx, n);
        for r in positive_roots(n) {
            let y = ctx.from_int((next() % (2 * p)) as i64);
            g = g.mul(&ctx, &TMat::unipotent(&ctx, n, &r, 0, &y));
        }
        let mut vals = vec![ctx.from_int(1); n];
        for v in vals.iter_mut() {
            *v = ctx.from_int(1 + (next() % p) as i64 * p as i64);
        }
        g = g.mul(&ctx, &TMat::diag(&ctx, &vals));
        rep.checked += 1;
        match factor_coords(&ctx, &g, &id, false) {
            Ok((coords, t1)) => {
                let mut back = TMat::identity(&ctx, n);
                for (root, y) in &coords {
                    back = back.mul(&ctx, &TMat::unipotent(&ctx, n, root, 0, y));
                }
                back = back.mul(&ctx, &t1);
                if !back.eq_mod(&ctx, &g, ZERO_DEPTH) {
                    rep.failures.push("factorization round trip failed".into());
                }
            }
            Err(e) => rep.failures.push(format!("factorization failed: {e}")),
        }
    }
    rep
}
