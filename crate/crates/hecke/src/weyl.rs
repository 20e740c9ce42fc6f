//! Type-A root system and symmetric-group combinatorics: roots, lengths,
//! reduced words, Bruhat order, parabolic coset representatives, and the
//! rotation elements generating the length-zero subgroup.
//!
//! Conventions: permutations act on 0-indexed slots, w(j) is the image of j,
//! and products compose right-to-left: (u*v)(j) = u(v(j)). A word
//! [a1, ..., ak] denotes s_{a1} * ... * s_{ak}. Roots a(j,k) pair slot j
//! against slot k; positives have j < k and height k - j.

use std::collections::HashSet;
use std::fmt;

/// Root a(j,k) = (coordinate j) - (coordinate k), 0-indexed, j != k.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Root {
    pub j: usize,
    pub k: usize,
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a({},{})", self.j + 1, self.k + 1)
    }
}

impl Root {
    pub fn new(j: usize, k: usize) -> Self {
        assert_ne!(j, k);
        Root { j, k }
    }

    pub fn simple(i: usize) -> Self {
        Root { j: i, k: i + 1 }
    }

    /// Highest root a(0, n-1).
    pub fn highest(n: usize) -> Self {
        Root { j: 0, k: n - 1 }
    }

    pub fn is_positive(&self) -> bool {
        self.j < self.k
    }

    /// Signed height: k - j (negative for negative roots).
    pub fn height(&self) -> i64 {
        self.k as i64 - self.j as i64
    }

    pub fn neg(&self) -> Self {
        Root {
            j: self.k,
            k: self.j,
        }
    }

    /// Pairing <a, b_coroot> for roots a = self, b: a(b^vee).
    pub fn pair_coroot(&self, b: &Root) -> i64 {
        let ind = |x: usize, y| if x == y { 1i64 } else { 0 };
        ind(self.j, b.j) - ind(self.j, b.k) - (ind(self.k, b.j) - ind(self.k, b.k))
    }
}

/// All positive roots of GL_n.
pub fn positive_roots(n: usize) -> Vec<Root> {
    let mut v = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            v.push(Root::new(j, k));
        }
    }
    v
}

/// All roots of GL_n.
pub fn all_roots(n: usize) -> Vec<Root> {
    let mut v = positive_roots(n);
    let negs: Vec<Root> = v.iter().map(|r| r.neg()).collect();
    v.extend(negs);
    v
}

/// Affine root (root, level).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct AffineRoot {
    pub root: Root,
    pub level: i64,
}

impl AffineRoot {
    pub fn new(root: Root, level: i64) -> Self {
        AffineRoot { root, level }
    }

    pub fn is_positive(&self) -> bool {
        self.level > 0 || (self.level == 0 && self.root.is_positive())
    }
}

/// The simple affine roots: (a_i, 0) for simple a_i, and (-a_0, 1).
pub fn simple_affine_roots(n: usize) -> Vec<AffineRoot> {
    let mut v: Vec<AffineRoot> = (0..n - 1)
        .map(|i| AffineRoot::new(Root::simple(i), 0))
        .collect();
    v.push(AffineRoot::new(Root::highest(n).neg(), 1));
    v
}

/// Element of the finite Weyl group S_n.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylElt {
    pub perm: Vec<usize>,
}

impl fmt::Debug for WeylElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.reduced_word();
        if w.is_empty() {
            write!(f, "e")
        } else {
            write!(
                f,
                "{}",
                w.iter()
                    .map(|i| format!("s{}", i + 1))
                    .collect::<Vec<_>>()
                    .join("")
            )
        }
    }
}

impl WeylElt {
    pub fn identity(n: usize) -> Self {
        WeylElt {
            perm: (0..n).collect(),
        }
    }

    pub fn simple(n: usize, i: usize) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(i, i + 1);
        WeylElt { perm }
    }

    pub fn from_word(n: usize, word: &[usize]) -> Self {
        let mut w = WeylElt::identity(n);
        for &i in word {
            w = w.mul(&WeylElt::simple(n, i));
        }
        w
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn apply(&self, j: usize) -> usize {
        self.perm[j]
    }

    /// (self * other)(j) = self(other(j)).
    pub fn mul(&self, other: &WeylElt) -> WeylElt {
        WeylElt {
            perm: other.perm.iter().map(|&j| self.perm[j]).collect(),
        }
    }

    pub fn inv(&self) -> WeylElt {
        let mut perm = vec![0; self.n()];
        for (j, &img) in self.perm.iter().enumerate() {
            perm[img] = j;
        }
        WeylElt { perm }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(j, &img)| j == img)
    }

    pub fn act(&self, r: &Root) -> Root {
        Root::new(self.perm[r.j], self.perm[r.k])
    }

    pub fn length(&self) -> usize {
        let n = self.n();
        let mut l = 0;
        for j in 0..n {
            for k in (j + 1)..n {
                if self.perm[j] > self.perm[k] {
                    l += 1;
                }
            }
        }
        l
    }

    /// Lexicographically smallest-descent reduced word; multiplies back to self.
    pub fn reduced_word(&self) -> Vec<usize> {
        let mut w = self.clone();
        let mut rev = Vec::new();
        'outer: loop {
            for i in 0..w.n() - 1 {
                if w.perm[i] > w.perm[i + 1] {
                    rev.push(i);
                    let s = WeylElt::simple(w.n(), i);
                    w = w.mul(&s);
                    continue 'outer;
                }
            }
            break;
        }
        rev.reverse();
        rev
    }

    /// Right descent: l(w s_i) < l(w).
    pub fn has_right_descent(&self, i: usize) -> bool {
        self.perm[i] > self.perm[i + 1]
    }
}

/// Bruhat order via the lifting property along right descents.
pub fn bruhat_leq(u: &WeylElt, w: &WeylElt) -> bool {
    if u.length() > w.length() {
        return false;
    }
    if u == w {
        return true;
    }
    // w != u and l(w) >= l(u); w has a descent since w != e here
    let n = w.n();
    for i in 0..n - 1 {
        if w.has_right_descent(i) {
            let ws = w.mul(&WeylElt::simple(n, i));
            return if u.has_right_descent(i) {
                bruhat_leq(&u.mul(&WeylElt::simple(n, i)), &ws)
            } else {
                bruhat_leq(u, &ws)
            };
        }
    }
    false
}

/// All elements of S_n in a fixed deterministic order (length, then lex on perm).
pub fn all_elements(n: usize) -> Vec<WeylElt> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push(WeylElt { perm: perm.clone() });
        // next permutation in lex order
        let mut i = n as i64 - 2;
        while i >= 0 && perm[i as usize] > perm[i as usize + 1] {
            i -= 1;
        }
        if i < 0 {
            break;
        }
        let i = i as usize;
        let mut j = n - 1;
        while perm[j] < perm[i] {
            j -= 1;
        }
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    out.sort_by_key(|w| (w.length(), w.perm.clone()));
    out
}

/// Subset of simple-root indices defining a standard Levi.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LeviSubset {
    pub n: usize,
    pub simples: Vec<usize>, // sorted indices in 0..n-1
}

impl LeviSubset {
    pub fn new(n: usize, mut simples: Vec<usize>) -> Self {
        simples.sort_unstable();
        simples.dedup();
        assert!(simples.iter().all(|&i| i + 1 < n));
        LeviSubset { n, simples }
    }

    pub fn full(n: usize) -> Self {
        LeviSubset::new(n, (0..n - 1).collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.simples.binary_search(&i).is_ok()
    }

    /// Consecutive blocks [lo, hi] (inclusive) of slots glued by the simples.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut blocks = Vec::new();
        let mut lo = 0;
        for i in 0..self.n {
            let glued = i + 1 < self.n && self.contains(i);
            if !glued {
                blocks.push((lo, i));
                lo = i + 1;
            }
        }
        blocks
    }

    /// Positive roots with support inside the Levi.
    pub fn positive_roots(&self) -> Vec<Root> {
        self.blocks()
            .iter()
            .flat_map(|&(lo, hi)| {
                let mut v = Vec::new();
                for j in lo..=hi {
                    for k in (j + 1)..=hi {
                        v.push(Root::new(j, k));
                    }
                }
                v
            })
            .collect()
    }

    pub fn contains_root(&self, r: &Root) -> bool {
        let (a, b) = if r.j < r.k { (r.j, r.k) } else { (r.k, r.j) };
        self.blocks().iter().any(|&(lo, hi)| lo <= a && b <= hi)
    }

    /// All elements of the parabolic subgroup W_{M,0}.
    pub fn subgroup(&self) -> Vec<WeylElt> {
        let n = self.n;
        let gens: Vec<WeylElt> = self.simples.iter().map(|&i| WeylElt::simple(n, i)).collect();
        let mut seen = HashSet::new();
        let mut frontier = vec![WeylElt::identity(n)];
        seen.insert(WeylElt::identity(n));
        while let Some(w) = frontier.pop() {
            for g in &gens {
                let x = w.mul(g);
                if seen.insert(x.clone()) {
                    frontier.push(x);
                }
            }
        }
        let mut v: Vec<WeylElt> = seen.into_iter().collect();
        v.sort_by_key(|w| (w.length(), w.perm.clone()));
        v
    }

    /// Longest element of W_{M,0}.
    pub fn longest_element(&self) -> WeylElt {
        self.subgroup()
            .into_iter()
            .max_by_key(|w| (w.length(), std::cmp::Reverse(w.perm.clone())))
            .unwrap()
    }

    /// Minimal-length representatives of W_{M,0} \ W_0: the set {v : l(s v) > l(v) for s in M},
    /// i.e. v^{-1}(a_i) positive for every Levi simple a_i.
    pub fn min_coset_reps(&self) -> Vec<WeylElt> {
        all_elements(self.n)
            .into_iter()
            .filter(|v| {
                self.simples
                    .iter()
                    .all(|&i| v.inv().act(&Root::simple(i)).is_positive())
            })
            .collect()
    }
}

/// The rotation generating the length-zero subgroup image in W_0:
/// j -> j - 1 for j >= 1 and 0 -> n - 1 (0-indexed).
pub fn omega_bar(n: usize) -> WeylElt {
    let mut perm = vec![0; n];
    for j in 0..n {
        perm[j] = (j + n - 1) % n;
    }
    WeylElt { perm }
}

/// The word (s_i ... s_1)(s_{i+1} ... s_2)...(s_{n-1} ... s_{n-i}) for
/// omega_bar^{-i}, 1-indexed letters returned as 0-indexed. Certified:
/// multiplies to omega_bar^{-i}, reduced of length i(n-i), and equals
/// w_{(i),o} * w_o.
pub fn omega_bar_inv_pow_word(n: usize, i: usize) -> Vec<usize> {
    assert!((1..n).contains(&i), "index out of range: i={i}, n={n}");
    let mut word = Vec::new();
    for blockstart in i..n {
        // block (s_blockstart, s_{blockstart-1}, ..., s_{blockstart-i+1}), 1-indexed
        for l in 0..i {
            word.push(blockstart - l - 1); // to 0-indexed
        }
    }
    let w = WeylElt::from_word(n, &word);
    assert_eq!(word.len(), i * (n - i), "displayed word has wrong length");
    assert_eq!(w.length(), i * (n - i), "displayed word is not reduced");
    let mut om_inv_i = WeylElt::identity(n);
    let ob_inv = omega_bar(n).inv();
    for _ in 0..i {
        om_inv_i = om_inv_i.mul(&ob_inv);
    }
    assert_eq!(w, om_inv_i, "word does not multiply to the rotation power");
    let levi = LeviSubset::new(n, (0..n - 1).filter(|&j| j != i - 1).collect());
    let w_par_long = levi.longest_element();
    let w_long = LeviSubset::full(n).longest_element();
    assert_eq!(
        w,
        w_par_long.mul(&w_long),
        "rotation power must factor through the parabolic longest elements"
    );
    word
}

/// Positions in the chain w < w s_{a_1} < ... where the length drops, for the
/// fixed word a_* of omega_bar^{-i}. Returns 1-indexed chain positions.
pub fn violation_profile(w: &WeylElt, i: usize) -> Vec<usize> {
    let n = w.n();
    let word = omega_bar_inv_pow_word(n, i);
    let mut cur = w.clone();
    let mut out = Vec::new();
    for (idx, &a) in word.iter().enumerate() {
        let nxt = cur.mul(&WeylElt::simple(n, a));
        if nxt.length() < cur.length() {
            out.push(idx + 1);
        }
        cur = nxt;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn act_examples() {
        let n = 3;
        let id = WeylElt::identity(n);
        assert_eq!(id.act(&Root::new(0, 1)), Root::new(0, 1));
        let s1 = WeylElt::simple(n, 0);
        assert_eq!(s1.act(&Root::new(0, 1)), Root::new(1, 0));
        // omega_bar = s2 s1 at n = 3; check image of a(1,2)
        let ob = omega_bar(3);
        assert_eq!(ob, WeylElt::from_word(3, &[1, 0]));
        assert_eq!(ob.act(&Root::new(0, 1)), Root::new(2, 0));
    }

    #[test]
    fn lengths() {
        assert_eq!(WeylElt::identity(4).length(), 0);
        let ob_inv = omega_bar(3).inv();
        assert_eq!(ob_inv.length(), 2); // 1*(3-1)
        assert_eq!(LeviSubset::full(4).longest_element().length(), 6);
    }

    #[test]
    fn reduced_word_roundtrip() {
        for w in all_elements(4) {
            let word = w.reduced_word();
            assert_eq!(WeylElt::from_word(4, &word), w);
            assert_eq!(word.len(), w.length());
        }
    }

    #[test]
    fn longest_elements() {
        assert!(LeviSubset::new(3, vec![]).longest_element().is_identity());
        let w0 = LeviSubset::new(3, vec![0, 1]).longest_element();
        assert_eq!(w0.perm, vec![2, 1, 0]);
        let l = LeviSubset::new(4, vec![0, 2]).longest_element();
        assert_eq!(l, WeylElt::from_word(4, &[0, 2]));
    }

    #[test]
    fn coset_reps_factorization() {
        for n in 2..=4 {
            for mask in 0..(1u32 << (n - 1)) {
                let simples: Vec<usize> = (0..n - 1).filter(|&i| mask >> i & 1 == 1).collect();
                let levi = LeviSubset::new(n, simples);
                let sub = levi.subgroup();
                let reps = levi.min_coset_reps();
                assert_eq!(sub.len() * reps.len(), all_elements(n).len());
                // unique factorization w = u * v with additive lengths
                let mut seen = HashSet::new();
                for u in &sub {
                    for v in &reps {
                        let w = u.mul(v);
                        assert_eq!(w.length(), u.length() + v.length());
                        assert!(seen.insert(w));
                    }
                }
            }
        }
        assert_eq!(LeviSubset::new(3, vec![0]).min_coset_reps().len(), 3);
        assert_eq!(LeviSubset::new(4, vec![0, 1]).min_coset_reps().len(), 4);
        assert_eq!(LeviSubset::full(5).min_coset_reps().len(), 1);
    }

    #[test]
    fn rotation_word_certified() {
        for n in 2..=6 {
            for i in 1..n {
                let _ = omega_bar_inv_pow_word(n, i);
            }
        }
        // group law: omega_bar^{-i} = (omega_bar^{-1})^i
        for n in 2..=5 {
            let ob1 = WeylElt::from_word(n, &omega_bar_inv_pow_word(n, 1));
            for i in 2..n {
                let mut acc = WeylElt::identity(n);
                for _ in 0..i {
                    acc = acc.mul(&ob1);
                }
                assert_eq!(acc, WeylElt::from_word(n, &omega_bar_inv_pow_word(n, i)));
            }
        }
    }

    #[test]
    fn violation_profiles() {
        let n = 3;
        assert!(violation_profile(&WeylElt::identity(n), 1).is_empty());
        assert_eq!(violation_profile(&WeylElt::simple(n, 0), 1).len(), 1);
        assert!(violation_profile(&WeylElt::from_word(n, &[1, 0]), 1).len() >= 2);
        // zero violations iff w in W_{(i),0}; one iff w in s_i W_{(i),0}, flipped root is -a_i
        for n in 3..=5 {
            for i in 1..n {
                let levi = LeviSubset::new(n, (0..n - 1).filter(|&j| j != i - 1).collect());
                let sub: HashSet<WeylElt> = levi.subgroup().into_iter().collect();
                let word = omega_bar_inv_pow_word(n, i);
                for w in all_elements(n) {
                    let prof = violation_profile(&w, i);
                    assert_eq!(prof.is_empty(), sub.contains(&w), "w={w:?} i={i}");
                    let si = WeylElt::simple(n, i - 1);
                    let in_coset = sub.contains(&si.mul(&w));
                    assert_eq!(prof.len() == 1, in_coset, "w={w:?} i={i}");
                    if prof.len() == 1 {
                        let j = prof[0];
                        let prefix = WeylElt::from_word(n, &word[..j - 1]);
                        let flipped = w.mul(&prefix).act(&Root::simple(word[j - 1]));
                        assert_eq!(flipped, Root::simple(i - 1).neg());
                    }
                }
            }
        }
    }

    #[test]
    fn bruhat_subword_spotchecks() {
        let n = 4;
        let els = all_elements(n);
        for u in &els {
            assert!(bruhat_leq(u, &LeviSubset::full(n).longest_element()));
            assert!(bruhat_leq(&WeylElt::identity(n), u));
        }
        // antisymmetry on a sample
        for u in &els {
            for w in &els {
                if bruhat_leq(u, w) && bruhat_leq(w, u) {
                    assert_eq!(u, w);
                }
            }
        }
    }

    #[test]
    fn flipped_positive_roots_match_levi_complement() {
        // {a > 0 : omega_bar^i(a) < 0} = positives outside the i-th maximal Levi
        for n in 2..=6 {
            let ob = omega_bar(n);
            for i in 1..n {
                let mut obi = WeylElt::identity(n);
                for _ in 0..i {
                    obi = obi.mul(&ob);
                }
                let levi = LeviSubset::new(n, (0..n - 1).filter(|&j| j != i - 1).collect());
                let flipped: HashSet<Root> = positive_roots(n)
                    .into_iter()
                    .filter(|r| !obi.act(r).is_positive())
                    .collect();
                let complement: HashSet<Root> = positive_roots(n)
                    .into_iter()
                    .filter(|r| !levi.contains_root(r))
                    .collect();
                assert_eq!(flipped, complement);
            }
        }
    }
}
