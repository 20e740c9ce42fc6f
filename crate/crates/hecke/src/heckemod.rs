//! Finite-dimensional right modules over the pro-p Iwahori-Hecke algebra of a
//! Levi subgroup of GL_n, presented by generator action matrices.
//!
//! The algebra of a Levi with block decomposition is generated by the finite
//! simple reflections inside blocks, one affine reflection per block of size
//! at least two, a normalized length-zero rotation per block (and its
//! inverse), and the Teichmueller torus generators. The element evaluator
//! factors an arbitrary extended-affine-Weyl element into a reduced word in
//! these generators, so positive central elements, adjoint computations and
//! relation checks all run off the same machinery.

use crate::field::{FElem, Field};
use crate::linalg::{
    eventual_image, express_in_row_basis, restrict_operator, solve_linear, Mat, SolveOutcome,
};
use crate::monomial::MonomialMatrix;
use crate::weyl::{AffineRoot, Root, WeylElt};
use std::collections::BTreeMap;

/// Block shape of a (Levi) Hecke algebra inside GL_n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraShape {
    pub n: usize,
    pub umod: i64,
    /// Inclusive slot ranges, ascending, covering 0..n.
    pub blocks: Vec<(usize, usize)>,
}

/// Generator labels for the presented action.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum GenId {
    /// Finite simple reflection at slots (i, i+1), inside a block.
    Simple(usize),
    /// Affine reflection of block b (blocks of size >= 2).
    AffineBlock(usize),
    /// Normalized rotation of block b.
    OmBlock(usize),
    OmBlockInv(usize),
    /// Teichmueller torus generator at one slot.
    Torus(usize),
}

impl GenId {
    pub fn label(&self) -> String {
        match self {
            GenId::Simple(i) => format!("S{}", i + 1),
            GenId::AffineBlock(b) => format!("SAff{b}"),
            GenId::OmBlock(b) => format!("Om{b}"),
            GenId::OmBlockInv(b) => format!("OmInv{b}"),
            GenId::Torus(i) => format!("T{}", i + 1),
        }
    }
}

impl AlgebraShape {
    pub fn full(n: usize, umod: i64) -> Self {
        AlgebraShape {
            n,
            umod,
            blocks: vec![(0, n - 1)],
        }
    }

    pub fn torus(n: usize, umod: i64) -> Self {
        AlgebraShape {
            n,
            umod,
            blocks: (0..n).map(|j| (j, j)).collect(),
        }
    }

    pub fn from_simples(n: usize, umod: i64, simples: &[usize]) -> Self {
        let levi = crate::weyl::LeviSubset::new(n, simples.to_vec());
        AlgebraShape {
            n,
            umod,
            blocks: levi.blocks(),
        }
    }

    /// Simple indices glued by this shape.
    pub fn simples(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .flat_map(|&(lo, hi)| lo..hi)
            .collect()
    }

    pub fn levi(&self) -> crate::weyl::LeviSubset {
        crate::weyl::LeviSubset::new(self.n, self.simples())
    }

    pub fn block_of_slot(&self, slot: usize) -> usize {
        self.blocks
            .iter()
            .position(|&(lo, hi)| lo <= slot && slot <= hi)
            .unwrap()
    }

    pub fn block_of_simple(&self, i: usize) -> usize {
        let b = self.block_of_slot(i);
        assert_eq!(b, self.block_of_slot(i + 1), "simple {i} not inside a block");
        b
    }

    /// Affine simple nodes with their generator ids, in a fixed order.
    pub fn affine_nodes(&self) -> Vec<(AffineRoot, GenId)> {
        let mut out = Vec::new();
        for (b, &(lo, hi)) in self.blocks.iter().enumerate() {
            for i in lo..hi {
                out.push((AffineRoot::new(Root::simple(i), 0), GenId::Simple(i)));
            }
            if hi > lo {
                out.push((
                    AffineRoot::new(Root::new(lo, hi).neg(), 1),
                    GenId::AffineBlock(b),
                ));
            }
        }
        out
    }

    pub fn generators(&self) -> Vec<GenId> {
        let mut out = Vec::new();
        for (node, id) in self.affine_nodes() {
            let _ = node;
            out.push(id);
        }
        for b in 0..self.blocks.len() {
            out.push(GenId::OmBlock(b));
            out.push(GenId::OmBlockInv(b));
        }
        for i in 0..self.n {
            out.push(GenId::Torus(i));
        }
        out
    }

    /// Plain block rotation matrix of block b (no normalization applied yet).
    fn block_rotation_raw(&self, b: usize) -> MonomialMatrix {
        let (lo, hi) = self.blocks[b];
        let mut m = MonomialMatrix::identity(self.n, self.umod);
        if lo == hi {
            m.cols[lo].wpow = 1;
            return m;
        }
        for j in (lo + 1)..=hi {
            m.cols[j] = crate::monomial::MonoEntry {
                row: j - 1,
                uexp: 0,
                wpow: 0,
            };
        }
        m.cols[lo] = crate::monomial::MonoEntry {
            row: hi,
            uexp: 0,
            wpow: 1,
        };
        m
    }

    /// Rotation permutation of block b as a Weyl element on all n slots.
    pub fn block_rotation_perm(&self, b: usize) -> WeylElt {
        self.block_rotation_raw(b).perm()
    }

    /// The monomial matrix represented by a generator. Rotations are
    /// normalized so that (rotation) * lift(its image in the finite Weyl
    /// group)^{-1} is a plain power-of-pi cocharacter value, unit-free.
    pub fn gen_element(&self, id: GenId) -> MonomialMatrix {
        let umod = self.umod;
        match id {
            GenId::Simple(i) => MonomialMatrix::refl_lift(self.n, umod, &Root::simple(i)),
            GenId::AffineBlock(b) => {
                let (lo, hi) = self.blocks[b];
                MonomialMatrix::affine_refl_lift(
                    self.n,
                    umod,
                    &AffineRoot::new(Root::new(lo, hi).neg(), 1),
                )
            }
            GenId::OmBlock(b) => normalize_len0(&self.block_rotation_raw(b)),
            GenId::OmBlockInv(b) => normalize_len0(&self.block_rotation_raw(b).inv()),
            GenId::Torus(i) => {
                let mut entries = vec![(0, 0); self.n];
                entries[i] = (1, 0);
                MonomialMatrix::diagonal(umod, &entries)
            }
        }
    }

    /// Length of an element of the extended affine Weyl group of this Levi.
    pub fn length(&self, m: &MonomialMatrix) -> u64 {
        let mut total = 0u64;
        let perm = m.perm();
        for &(lo, hi) in &self.blocks {
            for j in lo..=hi {
                for k in lo..=hi {
                    if j == k {
                        continue;
                    }
                    let shift = m.cols[j].wpow - m.cols[k].wpow;
                    let l0 = if j < k { 0 } else { 1 };
                    let neg_thr = if perm.apply(j) > perm.apply(k) { 0 } else { -1 };
                    let hi_l = neg_thr - shift;
                    if hi_l >= l0 {
                        total += (hi_l - l0 + 1) as u64;
                    }
                }
            }
        }
        total
    }

    /// Does the underlying permutation preserve the blocks?
    pub fn contains_perm(&self, w: &WeylElt) -> bool {
        self.blocks
            .iter()
            .all(|&(lo, hi)| (lo..=hi).all(|j| lo <= w.apply(j) && w.apply(j) <= hi))
    }

    /// Factor an element of the extended affine Weyl group of this Levi into
    /// a reduced generator word: (affine letters, rotation powers per block,
    /// residual unit-diagonal torus element).
    pub fn factor(&self, elt: &MonomialMatrix) -> ElementWord {
        assert!(
            self.contains_perm(&elt.perm()),
            "element does not lie in this Levi: {elt:?}"
        );
        let mut cur = elt.clone();
        let mut letters_rev: Vec<GenId> = Vec::new();
        let mut len = self.length(&cur);
        while len > 0 {
            let mut progressed = false;
            for (node, id) in self.affine_nodes() {
                if !cur.act_affine(&node).is_positive() {
                    let refl = match id {
                        GenId::Simple(_) | GenId::AffineBlock(_) => {
                            let gm = self.gen_element(id);
                            gm
                        }
                        _ => unreachable!(),
                    };
                    let next = cur.mul(&refl.inv());
                    let next_len = self.length(&next);
                    assert_eq!(next_len, len - 1, "descent must drop length by one");
                    letters_rev.push(id);
                    cur = next;
                    len = next_len;
                    progressed = true;
                    break;
                }
            }
            assert!(progressed, "positive length but no descent found: {cur:?}");
        }
        // length-zero residue: split off rotation powers per block
        let mut rot_pows = vec![0i64; self.blocks.len()];
        for (b, &(lo, hi)) in self.blocks.iter().enumerate() {
            let v: i64 = (lo..=hi).map(|j| cur.cols[j].wpow).sum();
            rot_pows[b] = v;
        }
        for (b, &p) in rot_pows.iter().enumerate() {
            if p != 0 {
                let om = self.gen_element(GenId::OmBlock(b));
                cur = cur.mul(&om.pow(-p));
            }
        }
        assert!(
            cur.is_unit_diagonal(),
            "residue after removing rotations must be a unit torus element: {cur:?}"
        );
        let mut letters = letters_rev;
        letters.reverse();
        ElementWord {
            letters,
            rot_pows,
            torus: cur,
        }
    }
}

/// Reduced word data for an element: T_elt = prod(letters) * prod(rotations) * T_torus.
#[derive(Clone, Debug)]
pub struct ElementWord {
    pub letters: Vec<GenId>,
    pub rot_pows: Vec<i64>,
    pub torus: MonomialMatrix,
}

/// Normalize a length-zero element: strip Teichmueller units so that
/// elt * lift(perm)^{-1} is a pure power-of-pi diagonal.
pub fn normalize_len0(elt: &MonomialMatrix) -> MonomialMatrix {
    let perm = elt.perm();
    let d = elt.mul(&MonomialMatrix::lift(elt.umod, &perm).inv());
    assert!(d.is_diagonal());
    let stripped: Vec<(i64, i64)> = d.diag().iter().map(|&(_, w)| (0, w)).collect();
    MonomialMatrix::diagonal(elt.umod, &stripped).mul(&MonomialMatrix::lift(elt.umod, &perm))
}

/// A finite-dimensional right module presented by generator matrices.
#[derive(Clone)]
pub struct HModule {
    pub shape: AlgebraShape,
    pub fld: Field,
    pub dim: usize,
    pub basis: Vec<String>,
    pub act: BTreeMap<GenId, Mat>,
}

/// Outcome of a relation check.
#[derive(Debug, Default)]
pub struct RelationReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl RelationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl HModule {
    pub fn gen(&self, id: GenId) -> &Mat {
        self.act
            .get(&id)
            .unwrap_or_else(|| panic!("missing generator matrix {id:?}"))
    }

    /// Action of a unit-diagonal Teichmueller torus element.
    pub fn torus_action(&self, t: &MonomialMatrix) -> Mat {
        assert!(t.is_unit_diagonal(), "not a unit torus element: {t:?}");
        let mut acc = Mat::identity(&self.fld, self.dim);
        for (i, &(uexp, _)) in t.diag().iter().enumerate() {
            let e = uexp.rem_euclid(self.shape.umod);
            let g = self.gen(GenId::Torus(i));
            for _ in 0..e {
                acc = acc.mul(&self.fld, g);
            }
        }
        acc
    }

    /// Matrix of the sum over units of the torus elements along the coroot of
    /// the node's root part (the quadratic-relation coefficient).
    pub fn c_matrix(&self, node_root: &Root) -> Mat {
        let fld = &self.fld;
        let single = MonomialMatrix::coroot(self.shape.n, self.shape.umod, node_root, 1, 0);
        let step = self.torus_action(&single);
        let mut acc = Mat::zero(fld, self.dim, self.dim);
        let mut pw = Mat::identity(fld, self.dim);
        for _ in 0..(self.shape.umod) {
            acc = acc.add(fld, &pw);
            pw = pw.mul(fld, &step);
        }
        acc
    }

    /// Star operator matrix for an affine node: T - c.
    pub fn star(&self, node: &(AffineRoot, GenId)) -> Mat {
        let t = self.gen(node.1).clone();
        let c = self.c_matrix(&node.0.root);
        t.sub(&self.fld, &c)
    }

    /// Action matrix of T at an arbitrary element of the Levi's extended
    /// affine Weyl group, via reduced-word factorization.
    pub fn act_of_element(&self, elt: &MonomialMatrix) -> Mat {
        let word = self.shape.factor(elt);
        self.act_of_word(&word, false)
    }

    /// Star version: affine letters act by T - c, length-zero parts as usual.
    pub fn act_star_of_element(&self, elt: &MonomialMatrix) -> Mat {
        let word = self.shape.factor(elt);
        self.act_of_word(&word, true)
    }

    fn act_of_word(&self, word: &ElementWord, star: bool) -> Mat {
        let fld = &self.fld;
        // the element is torus * rotations * letters, with the length-zero
        // part on the left
        let mut acc = self.torus_action(&word.torus);
        for (b, &p) in word.rot_pows.iter().enumerate() {
            let g = if p >= 0 {
                self.gen(GenId::OmBlock(b)).clone()
            } else {
                self.gen(GenId::OmBlockInv(b)).clone()
            };
            for _ in 0..p.abs() {
                acc = acc.mul(fld, &g);
            }
        }
        for &id in &word.letters {
            let m = if star {
                let node_root = match id {
                    GenId::Simple(i) => Root::simple(i),
                    GenId::AffineBlock(b) => {
                        let (lo, hi) = self.shape.blocks[b];
                        Root::new(lo, hi).neg()
                    }
                    _ => unreachable!(),
                };
                let c = self.c_matrix(&node_root);
                self.gen(id).sub(fld, &c)
            } else {
                self.gen(id).clone()
            };
            acc = acc.mul(fld, &m);
        }
        acc
    }

    /// Full relation suite: quadratic, braid, torus, and rotation-conjugation
    /// consistency, including the affine node against the rotated finite node.
    pub fn check_relations(&self) -> RelationReport {
        let fld = &self.fld;
        let mut rep = RelationReport::default();
        let nodes = self.shape.affine_nodes();
        // quadratic: T^2 = c T, and c commutes with T
        for (node, id) in &nodes {
            rep.checked += 1;
            let t = self.gen(*id);
            let c = self.c_matrix(&node.root);
            if t.mul(fld, t) != c.mul(fld, t) {
                rep.violations
                    .push(format!("quadratic relation fails at {}", id.label()));
            }
            if c.mul(fld, t) != t.mul(fld, &c) {
                rep.violations
                    .push(format!("coefficient does not commute at {}", id.label()));
            }
        }
        // braid relations
        for (bi, &(lo, hi)) in self.shape.blocks.iter().enumerate() {
            let size = hi - lo + 1;
            if size < 2 {
                continue;
            }
            let mut ids: Vec<GenId> = (lo..hi).map(GenId::Simple).collect();
            ids.push(GenId::AffineBlock(bi));
            let k = ids.len();
            for a in 0..k {
                for b in (a + 1)..k {
                    let adjacent = b == a + 1 || (a == 0 && b == k - 1);
                    if size == 2 {
                        continue; // infinite braid order; nothing to check
                    }
                    let ta = self.gen(ids[a]);
                    let tb = self.gen(ids[b]);
                    rep.checked += 1;
                    if adjacent {
                        let lhs = ta.mul(fld, tb).mul(fld, ta);
                        let rhs = tb.mul(fld, ta).mul(fld, tb);
                        if lhs != rhs {
                            rep.violations.push(format!(
                                "order-3 braid fails at {} {}",
                                ids[a].label(),
                                ids[b].label()
                            ));
                        }
                    } else if ta.mul(fld, tb) != tb.mul(fld, ta) {
                        rep.violations.push(format!(
                            "commutation fails at {} {}",
                            ids[a].label(),
                            ids[b].label()
                        ));
                    }
                }
            }
        }
        // distinct blocks commute
        for (na, ia) in &nodes {
            for (nb, ib) in &nodes {
                if ia >= ib {
                    continue;
                }
                let ba = self.shape.block_of_slot(na.root.j.min(na.root.k));
                let bb = self.shape.block_of_slot(nb.root.j.min(nb.root.k));
                if ba == bb {
                    continue;
                }
                rep.checked += 1;
                let ta = self.gen(*ia);
                let tb = self.gen(*ib);
                if ta.mul(fld, tb) != tb.mul(fld, ta) {
                    rep.violations.push(format!(
                        "cross-block commutation fails at {} {}",
                        ia.label(),
                        ib.label()
                    ));
                }
            }
        }
        // torus generators: commute, have order q-1, and conjugate correctly
        for i in 0..self.shape.n {
            let ti = self.gen(GenId::Torus(i));
            rep.checked += 1;
            let mut pw = Mat::identity(fld, self.dim);
            for _ in 0..self.shape.umod {
                pw = pw.mul(fld, ti);
            }
            if pw != Mat::identity(fld, self.dim) {
                rep.violations
                    .push(format!("torus generator {i} does not have order q-1"));
            }
            for j in 0..i {
                let tj = self.gen(GenId::Torus(j));
                rep.checked += 1;
                if ti.mul(fld, tj) != tj.mul(fld, ti) {
                    rep.violations
                        .push(format!("torus generators {i} {j} do not commute"));
                }
            }
        }
        // sided torus moves: T_t T_x = T_x T_{x^{-1} t x}
        for (_, id) in &nodes {
            let x = self.shape.gen_element(*id);
            for i in 0..self.shape.n {
                rep.checked += 1;
                let t = self.shape.gen_element(GenId::Torus(i));
                let t_conj = x.inv().mul(&t).mul(&x);
                let lhs = self.torus_action(&t).mul(fld, self.gen(*id));
                let rhs = self.gen(*id).mul(fld, &self.torus_action(&t_conj));
                if lhs != rhs {
                    rep.violations.push(format!(
                        "torus conjugation fails at {} slot {}",
                        id.label(),
                        i
                    ));
                }
            }
        }
        // rotations: inverse pairing and conjugation of nodes
        for (b, &(lo, hi)) in self.shape.blocks.iter().enumerate() {
            let om = self.shape.gen_element(GenId::OmBlock(b));
            let om_inv = self.shape.gen_element(GenId::OmBlockInv(b));
            let resid = om.mul(&om_inv);
            rep.checked += 1;
            if !resid.is_unit_diagonal() {
                rep.violations
                    .push(format!("rotation normalization broken at block {b}"));
            } else {
                let lhs = self
                    .gen(GenId::OmBlock(b))
                    .mul(fld, self.gen(GenId::OmBlockInv(b)));
                if lhs != self.torus_action(&resid) {
                    rep.violations
                        .push(format!("rotation inverse relation fails at block {b}"));
                }
            }
            // conjugation T_om T_x T_om^{-1} = T_{om x om^{-1}} for every node of the block
            if hi > lo {
                let mut ids: Vec<GenId> = (lo..hi).map(GenId::Simple).collect();
                ids.push(GenId::AffineBlock(b));
                for id in ids {
                    rep.checked += 1;
                    let x = self.shape.gen_element(id);
                    let y = om.mul(&x).mul(&om_inv);
                    // y = s-lift(next node) * unit torus
                    let node_img = om.act_affine(&match id {
                        GenId::Simple(i) => AffineRoot::new(Root::simple(i), 0),
                        GenId::AffineBlock(bb) => {
                            let (l2, h2) = self.shape.blocks[bb];
                            AffineRoot::new(Root::new(l2, h2).neg(), 1)
                        }
                        _ => unreachable!(),
                    });
                    let target = self
                        .shape
                        .affine_nodes()
                        .into_iter()
                        .find(|(nd, _)| *nd == node_img);
                    let Some((_, tid)) = target else {
                        rep.violations.push(format!(
                            "rotation conjugate of {} is not a simple node",
                            id.label()
                        ));
                        continue;
                    };
                    let tmat = self.shape.gen_element(tid);
                    let t0 = tmat.inv().mul(&y);
                    if !t0.is_unit_diagonal() {
                        rep.violations.push(format!(
                            "rotation conjugation residue not a unit at {}",
                            id.label()
                        ));
                        continue;
                    }
                    let lhs = self
                        .gen(GenId::OmBlock(b))
                        .mul(fld, self.gen(id))
                        .mul(fld, self.gen(GenId::OmBlockInv(b)));
                    let rhs = self.gen(tid).mul(fld, &self.torus_action(&t0));
                    if lhs != rhs {
                        rep.violations.push(format!(
                            "rotation conjugation fails: {} -> {}",
                            id.label(),
                            tid.label()
                        ));
                    }
                }
            }
        }
        rep
    }

    /// Positive central element for the sub-Levi J: the product of the
    /// inverted tail cocharacters over the removed simple indices.
    pub fn positive_central_element(&self, keep: &[usize]) -> MonomialMatrix {
        let mut m = MonomialMatrix::identity(self.shape.n, self.shape.umod);
        for &i in &self.shape.simples() {
            if keep.contains(&i) {
                continue;
            }
            let b = self.shape.block_of_simple(i);
            let (_, hi) = self.shape.blocks[b];
            let mut entries = vec![(0i64, 0i64); self.shape.n];
            for (slot, entry) in entries.iter_mut().enumerate() {
                if slot > i && slot <= hi {
                    *entry = (0, -1);
                }
            }
            m = m.mul(&MonomialMatrix::diagonal(self.shape.umod, &entries));
        }
        m
    }

    /// Strictly negative-side central element for the twisted sub-Levi used
    /// by the left adjoint.
    fn negative_central_element(&self, keep_reflected: &[usize]) -> MonomialMatrix {
        let mut m = MonomialMatrix::identity(self.shape.n, self.shape.umod);
        for &i in &self.shape.simples() {
            if keep_reflected.contains(&i) {
                continue;
            }
            let b = self.shape.block_of_simple(i);
            let (_, hi) = self.shape.blocks[b];
            let mut entries = vec![(0i64, 0i64); self.shape.n];
            for (slot, entry) in entries.iter_mut().enumerate() {
                if slot > i && slot <= hi {
                    *entry = (0, 1);
                }
            }
            m = m.mul(&MonomialMatrix::diagonal(self.shape.umod, &entries));
        }
        m
    }

    /// Row basis of the stabilized image under the positive central element
    /// for the sub-Levi spanned by `keep`.
    pub fn right_adjoint_subspace(&self, keep: &[usize]) -> Mat {
        let lam = self.positive_central_element(keep);
        let a = self.act_of_element(&lam);
        eventual_image(&self.fld, &a)
    }

    /// The right adjoint as a module over the refined shape.
    pub fn right_adjoint(&self, keep: &[usize]) -> HModule {
        let fld = self.fld.clone();
        let sub_shape = AlgebraShape::from_simples(self.shape.n, self.shape.umod, keep);
        assert!(
            keep.iter().all(|i| self.shape.simples().contains(i)),
            "sub-Levi must refine the shape"
        );
        let basis_rows = self.right_adjoint_subspace(keep);
        let k = basis_rows.rows;
        let mut act = BTreeMap::new();
        // simple reflections and torus generators restrict directly
        for &i in keep {
            act.insert(
                GenId::Simple(i),
                restrict_operator(&fld, &basis_rows, self.gen(GenId::Simple(i))),
            );
        }
        for i in 0..self.shape.n {
            act.insert(
                GenId::Torus(i),
                restrict_operator(&fld, &basis_rows, self.gen(GenId::Torus(i))),
            );
        }
        // rotations: positive-prefixed variants restrict; divide out the prefix
        for (b, &(lo, hi)) in sub_shape.blocks.iter().enumerate() {
            let om_plain = sub_shape.gen_element(GenId::OmBlock(b));
            let mut prefix_entries = vec![(0i64, 0i64); self.shape.n];
            for (slot, entry) in prefix_entries.iter_mut().enumerate() {
                if slot < lo {
                    *entry = (0, 1);
                }
            }
            let prefix = MonomialMatrix::diagonal(self.shape.umod, &prefix_entries);
            let pref_om = prefix.mul(&om_plain);
            let a_pref = restrict_operator(&fld, &basis_rows, &self.act_of_element(&prefix));
            let a_prefom = restrict_operator(&fld, &basis_rows, &self.act_of_element(&pref_om));
            let a_om = a_pref.inverse(&fld).mul(&fld, &a_prefom);
            act.insert(GenId::OmBlockInv(b), a_om.inverse(&fld));
            act.insert(GenId::OmBlock(b), a_om);
            let _ = hi;
        }
        // affine nodes by rotation conjugation of the first simple in the block
        for (b, &(lo, hi)) in sub_shape.blocks.iter().enumerate() {
            if hi == lo {
                continue;
            }
            let om = sub_shape.gen_element(GenId::OmBlock(b));
            let om_inv = sub_shape.gen_element(GenId::OmBlockInv(b));
            let srefl = sub_shape.gen_element(GenId::Simple(lo));
            let y = om.mul(&srefl).mul(&om_inv);
            let aff = sub_shape.gen_element(GenId::AffineBlock(b));
            let t0 = aff.inv().mul(&y);
            assert!(
                t0.is_unit_diagonal(),
                "affine node conjugation residue must be a unit torus element"
            );
            let tmp = HModule {
                shape: sub_shape.clone(),
                fld: fld.clone(),
                dim: k,
                basis: vec![],
                act: act.clone(),
            };
            let a_aff = tmp
                .gen(GenId::OmBlock(b))
                .mul(&fld, tmp.gen(GenId::Simple(lo)))
                .mul(&fld, tmp.gen(GenId::OmBlockInv(b)))
                .mul(&fld, &tmp.torus_action(&t0).inverse(&fld));
            act.insert(GenId::AffineBlock(b), a_aff);
        }
        let basis = subspace_labels(&self.fld, &basis_rows, &self.basis);
        HModule {
            shape: sub_shape,
            fld,
            dim: k,
            basis,
            act,
        }
    }

    /// Dimension of the left adjoint for the sub-Levi spanned by `keep`,
    /// plus the stabilized row subspace realizing the localization.
    pub fn left_adjoint(&self, keep: &[usize]) -> (usize, Mat) {
        // reflect the sub-Levi through the longest element of this shape
        let levi = self.shape.levi();
        let w_long = levi.longest_element();
        let reflected: Vec<usize> = keep
            .iter()
            .map(|&j| {
                let img = w_long.act(&Root::simple(j)).neg();
                assert_eq!(img.k, img.j + 1, "reflected simple is not simple");
                img.j
            })
            .collect();
        let lam = self.negative_central_element(&reflected);
        let a = self.act_star_of_element(&lam);
        let img = eventual_image(&self.fld, &a);
        (img.rows, img)
    }

    /// Supersingularity via adjoint vanishing. With `all_levis` set, every
    /// proper sub-Levi is checked; otherwise only the maximal ones.
    pub fn is_supersingular(&self, all_levis: bool) -> bool {
        let simples = self.shape.simples();
        if simples.is_empty() {
            return true; // no proper Levi below the torus
        }
        let subsets: Vec<Vec<usize>> = if all_levis {
            let mut out = Vec::new();
            let k = simples.len();
            for mask in 0..(1u32 << k) - 1 {
                out.push(
                    simples
                        .iter()
                        .enumerate()
                        .filter(|&(t, _)| mask >> t & 1 == 1)
                        .map(|(_, &i)| i)
                        .collect(),
                );
            }
            out
        } else {
            (0..simples.len())
                .map(|drop| {
                    simples
                        .iter()
                        .enumerate()
                        .filter(|&(t, _)| t != drop)
                        .map(|(_, &i)| i)
                        .collect()
                })
                .collect()
        };
        for keep in subsets {
            if self.right_adjoint_subspace(&keep).rows != 0 {
                return false;
            }
            if self.left_adjoint(&keep).0 != 0 {
                return false;
            }
        }
        true
    }
}

fn subspace_labels(fld: &Field, rows: &Mat, ambient: &[String]) -> Vec<String> {
    (0..rows.rows)
        .map(|i| {
            let mut nonzero = Vec::new();
            for j in 0..rows.cols {
                if !fld.is_zero(rows.at(i, j)) {
                    nonzero.push(j);
                }
            }
            if nonzero.len() == 1 && rows.at(i, nonzero[0]) == &fld.one() {
                ambient
                    .get(nonzero[0])
                    .cloned()
                    .unwrap_or_else(|| format!("v{}", nonzero[0]))
            } else {
                format!("w{i}")
            }
        })
        .collect()
}

/// A basis of the space of module homomorphisms source -> target.
pub fn equivariant_maps(src: &HModule, tgt: &HModule) -> Vec<Mat> {
    assert_eq!(src.shape, tgt.shape);
    let fld = &src.fld;
    let (ds, dt) = (src.dim, tgt.dim);
    let vars = ds * dt;
    let gens = src.shape.generators();
    let mut rows: Vec<Vec<FElem>> = Vec::new();
    for g in gens {
        let a = src.gen(g);
        let b = tgt.gen(g);
        // constraint: a * f - f * b = 0, f is ds x dt
        for i in 0..ds {
            for j in 0..dt {
                let mut row = vec![fld.zero(); vars];
                for k in 0..ds {
                    // (a f)[i][j] += a[i][k] f[k][j]
                    let idx = k * dt + j;
                    row[idx] = fld.add(&row[idx], a.at(i, k));
                }
                for l in 0..dt {
                    // (f b)[i][j] -= f[i][l] b[l][j]
                    let idx = i * dt + l;
                    row[idx] = fld.sub(&row[idx], b.at(l, j));
                }
                rows.push(row);
            }
        }
    }
    let sys = Mat {
        rows: rows.len(),
        cols: vars,
        data: rows.into_iter().flatten().collect(),
    };
    // kernel basis
    let mut m = sys.clone();
    let pivots = m.rref(fld);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut out = Vec::new();
    for free in 0..vars {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut x = vec![fld.zero(); vars];
        x[free] = fld.one();
        for (ridx, &pc) in pivots.iter().enumerate() {
            x[pc] = fld.neg(m.at(ridx, free));
        }
        out.push(Mat {
            rows: ds,
            cols: dt,
            data: x,
        });
    }
    out
}

/// Is there an invertible equivariant map source -> target?
pub fn find_isomorphism(src: &HModule, tgt: &HModule) -> Option<Mat> {
    if src.dim != tgt.dim {
        return None;
    }
    let maps = equivariant_maps(src, tgt);
    // try single basis maps first, then a deterministic sweep of combinations
    for f in &maps {
        if f.rank(&src.fld) == src.dim {
            return Some(f.clone());
        }
    }
    if maps.len() >= 2 {
        let fld = &src.fld;
        // sweep f0 + c * fi over all field scalars
        for i in 1..maps.len() {
            let mut c = fld.one();
            for _ in 0..(fld.card - 1) {
                let cand = maps[0].add(fld, &maps[i].scale(fld, &c));
                if cand.rank(fld) == src.dim {
                    return Some(cand);
                }
                c = fld.mul(&c, &fld.gen);
            }
        }
    }
    None
}

/// Outcome of the section search for sub -> total -> quotient.
pub enum SplitOutcome {
    Section(Mat),
    NoSection { rank: usize, rank_aug: usize },
}

/// Quotient data for a submodule given by rref rows inside a module.
pub struct QuotientData {
    /// dim x (dim - k): row i = class of e_i in quotient coordinates.
    pub proj: Mat,
    /// Quotient action matrices.
    pub act: BTreeMap<GenId, Mat>,
    pub labels: Vec<usize>,
}

pub fn quotient_by_submodule(total: &HModule, sub_rows: &Mat) -> QuotientData {
    let fld = &total.fld;
    let mut b = sub_rows.clone();
    let pivots = b.rref(fld);
    assert_eq!(pivots.len(), b.rows, "submodule basis must have full rank");
    let k = b.rows;
    let dim = total.dim;
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    let mut proj = Mat::zero(fld, dim, dim - k);
    for i in 0..dim {
        if let Some(pos) = free.iter().position(|&c| c == i) {
            *proj.at_mut(i, pos) = fld.one();
        }
        if let Some(pidx) = pivots.iter().position(|&c| c == i) {
            for (pos, &c) in free.iter().enumerate() {
                *proj.at_mut(i, pos) = fld.neg(b.at(pidx, c));
            }
        }
    }
    let mut act = BTreeMap::new();
    for (&g, a) in &total.act {
        // quotient action: class of e_free[c] maps to proj-image of its action row
        let mut qa = Mat::zero(fld, dim - k, dim - k);
        for (r, &c) in free.iter().enumerate() {
            for j in 0..dim - k {
                let mut acc = fld.zero();
                for t in 0..dim {
                    acc = fld.add(&acc, &fld.mul(a.at(c, t), proj.at(t, j)));
                }
                qa.set(r, j, acc);
            }
        }
        act.insert(g, qa);
    }
    QuotientData {
        proj,
        act,
        labels: free,
    }
}

/// Search for an equivariant section of total -> total/sub.
pub fn find_splitting(total: &HModule, sub_rows: &Mat) -> SplitOutcome {
    let fld = &total.fld;
    let q = quotient_by_submodule(total, sub_rows);
    let dim = total.dim;
    let dq = dim - sub_rows.rows;
    let vars = dq * dim;
    let mut rows: Vec<Vec<FElem>> = Vec::new();
    let mut rhs: Vec<FElem> = Vec::new();
    // sigma * proj = identity
    for i in 0..dq {
        for j in 0..dq {
            let mut row = vec![fld.zero(); vars];
            for t in 0..dim {
                row[i * dim + t] = q.proj.at(t, j).clone();
            }
            rows.push(row);
            rhs.push(if i == j { fld.one() } else { fld.zero() });
        }
    }
    // equivariance: qact * sigma = sigma * act
    for (&g, qa) in &q.act {
        let a = total.gen(g);
        for i in 0..dq {
            for j in 0..dim {
                let mut row = vec![fld.zero(); vars];
                for t in 0..dq {
                    let idx = t * dim + j;
                    row[idx] = fld.add(&row[idx], qa.at(i, t));
                }
                for t in 0..dim {
                    let idx = i * dim + t;
                    row[idx] = fld.sub(&row[idx], a.at(t, j));
                }
                rows.push(row);
                rhs.push(fld.zero());
            }
        }
    }
    let sys = Mat {
        rows: rows.len(),
        cols: vars,
        data: rows.into_iter().flatten().collect(),
    };
    match solve_linear(fld, &sys, &rhs) {
        SolveOutcome::Solution(x) => SplitOutcome::Section(Mat {
            rows: dq,
            cols: dim,
            data: x,
        }),
        SolveOutcome::Inconsistent { rank, rank_aug } => {
            SplitOutcome::NoSection { rank, rank_aug }
        }
    }
}

/// Check that rows of `sub` span a submodule (stable under all generators).
pub fn is_submodule(total: &HModule, sub_rows: &Mat) -> bool {
    let fld = &total.fld;
    total.act.values().all(|a| {
        let image = sub_rows.mul(fld, a);
        express_in_row_basis(fld, &sub_rows.row_space(fld), &image).is_some()
    })
}
