//! Dense exact linear algebra over F_{p^m}: Gaussian elimination, rank,
//! row spaces, restriction of operators to invariant subspaces, and linear
//! solvers used by the equivariant-map and splitting searches.

use crate::field::{FElem, Field};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<FElem>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format!("{:?}", self.data[i * self.cols + j].coeffs))
                .collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl Mat {
    pub fn zero(fld: &Field, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![fld.zero(); rows * cols],
        }
    }

    pub fn identity(fld: &Field, n: usize) -> Mat {
        let mut m = Mat::zero(fld, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = fld.one();
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &FElem {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut FElem {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, fld: &Field, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zero(fld, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if fld.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if fld.is_zero(b) {
                        continue;
                    }
                    let t = fld.mul(a, b);
                    let cur = out.at(i, j).clone();
                    out.set(i, j, fld.add(&cur, &t));
                }
            }
        }
        out
    }

    pub fn add(&self, fld: &Field, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| fld.add(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, fld: &Field, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| fld.sub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, fld: &Field, c: &FElem) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| fld.mul(a, c)).collect(),
        }
    }

    pub fn pow(&self, fld: &Field, e: usize) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut acc = Mat::identity(fld, self.rows);
        for _ in 0..e {
            acc = acc.mul(fld, self);
        }
        acc
    }

    pub fn transpose(&self, _fld: &Field) -> Mat {
        let mut out = Mat {
            rows: self.cols,
            cols: self.rows,
            data: Vec::with_capacity(self.data.len()),
        };
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.data.push(self.at(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self, fld: &Field) -> bool {
        self.data.iter().all(|a| fld.is_zero(a))
    }

    /// Reduced row echelon form; returns pivot column indices.
    pub fn rref(&mut self, fld: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut piv = None;
            for i in r..self.rows {
                if !fld.is_zero(self.at(i, c)) {
                    piv = Some(i);
                    break;
                }
            }
            let Some(piv) = piv else { continue };
            for j in 0..self.cols {
                let t = self.data[piv * self.cols + j].clone();
                self.data[piv * self.cols + j] = self.data[r * self.cols + j].clone();
                self.data[r * self.cols + j] = t;
            }
            let inv = fld.inv(self.at(r, c));
            for j in 0..self.cols {
                let v = fld.mul(self.at(r, j), &inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r && !fld.is_zero(self.at(i, c)) {
                    let factor = self.at(i, c).clone();
                    for j in 0..self.cols {
                        let v = fld.sub(self.at(i, j), &fld.mul(&factor, self.at(r, j)));
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, fld: &Field) -> usize {
        let mut m = self.clone();
        m.rref(fld).len()
    }

    /// Canonical basis of the row space: rref with zero rows dropped.
    pub fn row_space(&self, fld: &Field) -> Mat {
        let mut m = self.clone();
        let pivots = m.rref(fld);
        Mat {
            rows: pivots.len(),
            cols: self.cols,
            data: m.data[..pivots.len() * self.cols].to_vec(),
        }
    }

    /// Inverse of a square matrix; panics if singular.
    pub fn inverse(&self, fld: &Field) -> Mat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Mat::zero(fld, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.at(i, j).clone());
            }
            aug.set(i, n + i, fld.one());
        }
        let piv = aug.rref(fld);
        assert_eq!(piv, (0..n).collect::<Vec<_>>(), "matrix not invertible");
        let mut out = Mat::zero(fld, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, aug.at(i, n + j).clone());
            }
        }
        out
    }
}

/// Solve x * b_rows = target where b has full row rank: expresses `target`
/// (rows x cols) in the row basis `basis` (k x cols). Returns the coefficient
/// matrix (rows x k), or None if some row is outside the span.
pub fn express_in_row_basis(fld: &Field, basis: &Mat, target: &Mat) -> Option<Mat> {
    assert_eq!(basis.cols, target.cols);
    let k = basis.rows;
    // Solve basis^T * x^T = target^T column by column via one elimination.
    let mut aug = Mat::zero(fld, basis.cols, k + target.rows);
    for i in 0..k {
        for j in 0..basis.cols {
            aug.set(j, i, basis.at(i, j).clone());
        }
    }
    for r in 0..target.rows {
        for j in 0..target.cols {
            aug.set(j, k + r, target.at(r, j).clone());
        }
    }
    let pivots = aug.rref(fld);
    // consistency: no pivot may land in the rhs block
    if pivots.iter().any(|&c| c >= k) {
        return None;
    }
    let mut out = Mat::zero(fld, target.rows, k);
    for (rowidx, &c) in pivots.iter().enumerate() {
        for r in 0..target.rows {
            out.set(r, c, aug.at(rowidx, k + r).clone());
        }
    }
    Some(out)
}

/// Restrict an operator (acting on row vectors, v -> v * op) to the row space
/// of `basis`, which must be invariant. Returns the k x k matrix of the action
/// in basis coordinates.
pub fn restrict_operator(fld: &Field, basis: &Mat, op: &Mat) -> Mat {
    let image = basis.mul(fld, op);
    express_in_row_basis(fld, basis, &image)
        .expect("subspace is not invariant under the operator")
}

/// Row space of a^dim, with the stabilization im(a^dim) = im(a^{dim+1}) asserted.
pub fn eventual_image(fld: &Field, a: &Mat) -> Mat {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let an = a.pow(fld, n);
    let img = an.row_space(fld);
    let img_next = an.mul(fld, a).row_space(fld);
    assert_eq!(
        img, img_next,
        "image must stabilize at the dimension-th power"
    );
    // the restriction must be invertible
    if img.rows > 0 {
        let r = restrict_operator(fld, &img, a);
        let _ = r.inverse(fld);
    }
    img
}

/// Result of a linear-system solve: a solution or a certificate of
/// inconsistency (ranks of the homogeneous and augmented systems).
pub enum SolveOutcome {
    Solution(Vec<FElem>),
    Inconsistent { rank: usize, rank_aug: usize },
}

/// Solve the dense system sys * x = rhs (column vector), sys is rows x vars.
pub fn solve_linear(fld: &Field, sys: &Mat, rhs: &[FElem]) -> SolveOutcome {
    assert_eq!(sys.rows, rhs.len());
    let vars = sys.cols;
    let mut aug = Mat::zero(fld, sys.rows, vars + 1);
    for i in 0..sys.rows {
        for j in 0..vars {
            aug.set(i, j, sys.at(i, j).clone());
        }
        aug.set(i, vars, rhs[i].clone());
    }
    let pivots = aug.rref(fld);
    if pivots.iter().any(|&c| c == vars) {
        let rank_aug = pivots.len();
        let rank = rank_aug - 1;
        return SolveOutcome::Inconsistent { rank, rank_aug };
    }
    let mut x = vec![fld.zero(); vars];
    for (rowidx, &c) in pivots.iter().enumerate() {
        x[c] = aug.at(rowidx, vars).clone();
    }
    SolveOutcome::Solution(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn f() -> Field {
        FieldCtx::new(5, 1, 2)
    }

    fn m(fld: &Field, rows: usize, cols: usize, vals: &[i64]) -> Mat {
        Mat {
            rows,
            cols,
            data: vals.iter().map(|&v| fld.from_i64(v)).collect(),
        }
    }

    #[test]
    fn rref_and_rank() {
        let fld = f();
        let a = m(&fld, 3, 3, &[1, 2, 3, 2, 4, 6, 0, 1, 1]);
        assert_eq!(a.rank(&fld), 2);
        let id = Mat::identity(&fld, 3);
        assert_eq!(id.rank(&fld), 3);
        assert_eq!(id.inverse(&fld), id);
    }

    #[test]
    fn eventual_image_examples() {
        let fld = f();
        // invertible: full space
        let a = m(&fld, 2, 2, &[1, 1, 0, 1]);
        assert_eq!(eventual_image(&fld, &a).rows, 2);
        // nilpotent: zero
        let b = m(&fld, 2, 2, &[0, 1, 0, 0]);
        assert_eq!(eventual_image(&fld, &b).rows, 0);
        // projection: span of first vector
        let c = m(&fld, 2, 2, &[1, 0, 0, 0]);
        let img = eventual_image(&fld, &c);
        assert_eq!(img.rows, 1);
        assert_eq!(img.at(0, 0), &fld.one());
        assert!(fld.is_zero(img.at(0, 1)));
    }

    #[test]
    fn restriction() {
        let fld = f();
        let op = m(&fld, 3, 3, &[2, 0, 0, 0, 3, 0, 0, 0, 3]);
        let basis = m(&fld, 1, 3, &[0, 1, 1]);
        let r = restrict_operator(&fld, &basis, &op);
        assert_eq!(r.at(0, 0), &fld.from_i64(3));
    }

    #[test]
    fn solver_consistency() {
        let fld = f();
        let sys = m(&fld, 2, 2, &[1, 1, 2, 2]);
        match solve_linear(&fld, &sys, &[fld.from_i64(1), fld.from_i64(2)]) {
            SolveOutcome::Solution(x) => {
                // verify
                let got0 = fld.add(&x[0], &x[1]);
                assert_eq!(got0, fld.one());
            }
            SolveOutcome::Inconsistent { .. } => panic!("system is consistent"),
        }
        match solve_linear(&fld, &sys, &[fld.from_i64(1), fld.from_i64(3)]) {
            SolveOutcome::Solution(_) => panic!("system is inconsistent"),
            SolveOutcome::Inconsistent { rank, rank_aug } => {
                assert_eq!(rank, 1);
                assert_eq!(rank_aug, 2);
            }
        }
    }
}
