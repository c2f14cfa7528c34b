use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntegerMatrix;

/// Result of [`smith_normal_form`]: `u * m * v == s`.
///
/// The inverses of the unimodular transforms are tracked alongside so that
/// quotient presentations can lift elements without a separate inversion.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub s: IntegerMatrix,
    pub u: IntegerMatrix,
    pub v: IntegerMatrix,
    pub u_inv: IntegerMatrix,
    pub v_inv: IntegerMatrix,
}

impl SmithForm {
    /// The diagonal of `s`, of length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.s.rows().min(self.s.cols());
        (0..k).map(|i| self.s.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|d| !d.is_zero()).count()
    }
}

struct SmithState {
    s: IntegerMatrix,
    u: IntegerMatrix,
    v: IntegerMatrix,
    u_inv: IntegerMatrix,
    v_inv: IntegerMatrix,
}

impl SmithState {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    /// `row[dst] += k * row[src]`
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.s.add_row_multiple(dst, src, k);
        self.u.add_row_multiple(dst, src, k);
        self.u_inv.add_col_multiple(src, dst, &-k);
    }

    /// `col[dst] += k * col[src]`
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        self.s.add_col_multiple(dst, src, k);
        self.v.add_col_multiple(dst, src, k);
        self.v_inv.add_row_multiple(src, dst, &-k);
    }

    fn negate_row(&mut self, i: usize) {
        self.s.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    /// Smallest nonzero `|s[i][j]|` with `i, j >= t`; ties broken row-major.
    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..self.s.rows() {
            for j in t..self.s.cols() {
                let x = self.s.get(i, j);
                if x.is_zero() {
                    continue;
                }
                let a = x.abs();
                if best.as_ref().is_none_or(|(_, _, b)| a < *b) {
                    best = Some((i, j, a));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }
}

/// Smith normal form with deterministic pivoting: the pivot is always the
/// nonzero entry of least absolute value in the active block, ties broken in
/// row-major order. Diagonal entries are non-negative and form a divisibility
/// chain, zeros last.
pub fn smith_normal_form(m: &IntegerMatrix) -> SmithForm {
    let (rows, cols) = (m.rows(), m.cols());
    let mut st = SmithState {
        s: m.clone(),
        u: IntegerMatrix::identity(rows),
        v: IntegerMatrix::identity(cols),
        u_inv: IntegerMatrix::identity(rows),
        v_inv: IntegerMatrix::identity(cols),
    };
    for t in 0..rows.min(cols) {
        loop {
            let Some((pi, pj)) = st.pivot(t) else {
                return st.finish();
            };
            st.swap_rows(t, pi);
            st.swap_cols(t, pj);
            let p = st.s.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                let x = st.s.get(i, t).clone();
                if x.is_zero() {
                    continue;
                }
                let q = x.div_floor(&p);
                st.add_row(i, t, &-q);
                clean &= st.s.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                let x = st.s.get(t, j).clone();
                if x.is_zero() {
                    continue;
                }
                let q = x.div_floor(&p);
                st.add_col(j, t, &-q);
                clean &= st.s.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !st.s.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => st.add_row(t, i, &BigInt::from(1)),
                None => break,
            }
        }
        if st.s.get(t, t).is_negative() {
            st.negate_row(t);
        }
    }
    st.finish()
}

impl SmithState {
    fn finish(self) -> SmithForm {
        SmithForm { s: self.s, u: self.u, v: self.v, u_inv: self.u_inv, v_inv: self.v_inv }
    }
}

/// Row-style Hermite normal form of the lattice spanned by the rows of `m`.
///
/// The result is a basis in echelon form: pivots strictly move right, each
/// pivot is positive and the entries above a pivot lie in `[0, pivot)`. Zero
/// rows are dropped, so the row count equals the lattice rank.
pub fn hermite_normal_form(m: &IntegerMatrix) -> IntegerMatrix {
    let mut a = m.clone();
    let (rows, cols) = (a.rows(), a.cols());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let mut best: Option<(usize, BigInt)> = None;
            for i in r..rows {
                let x = a.get(i, c);
                if x.is_zero() {
                    continue;
                }
                let ax = x.abs();
                if best.as_ref().is_none_or(|(_, b)| ax < *b) {
                    best = Some((i, ax));
                }
            }
            let Some((pi, _)) = best else { break };
            a.swap_rows(r, pi);
            let p = a.get(r, c).clone();
            let mut done = true;
            for i in r + 1..rows {
                let x = a.get(i, c).clone();
                if x.is_zero() {
                    continue;
                }
                a.add_row_multiple(i, r, &-x.div_floor(&p));
                done &= a.get(i, c).is_zero();
            }
            if !done {
                continue;
            }
            if p.is_negative() {
                a.negate_row(r);
            }
            let p = a.get(r, c).clone();
            for i in 0..r {
                let q = a.get(i, c).div_floor(&p);
                a.add_row_multiple(i, r, &-q);
            }
            r += 1;
            break;
        }
    }
    a.submatrix(0, r, 0, cols)
}

/// Pivot column of each row of a matrix in Hermite normal form.
pub fn hnf_pivots(h: &IntegerMatrix) -> Vec<usize> {
    (0..h.rows()).map(|i| (0..h.cols()).find(|&j| !h.get(i, j).is_zero()).expect("HNF rows are nonzero")).collect()
}

/// Coordinates `c` with `c * h == x` for a Hermite basis `h`, or `None` when
/// `x` is not in the row lattice.
pub fn hnf_solve(h: &IntegerMatrix, x: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(x.len(), h.cols(), "lattice vector length mismatch");
    let mut rest = x.to_vec();
    let mut coeffs = Vec::with_capacity(h.rows());
    for (l, p) in hnf_pivots(h).into_iter().enumerate() {
        if rest[..p].iter().any(|v| !v.is_zero()) {
            return None;
        }
        let (q, rem) = rest[p].div_rem(h.get(l, p));
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (j, r) in rest.iter_mut().enumerate().skip(p) {
                *r -= &q * h.get(l, j);
            }
        }
        coeffs.push(q);
    }
    rest.iter().all(Zero::is_zero).then_some(coeffs)
}
