//! Tier-generic PSLQ machinery.
//!
//! [`Core`] holds `y`, `H`, `A` and `B` at one arithmetic tier. Standard
//! PSLQ keeps `y = x̂·B` (relations live in columns of `B`); the multi-pair
//! variant keeps `y = B·x̂` (relations live in rows). Both variants and all
//! tiers share the routines in this module.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::parallel::{Executor, Unit};
use crate::precision::{Entry, Real};

/// Where relations are read from `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Standard PSLQ: `y = x̂·B`, relation in a column.
    Columns,
    /// Multi-pair: `y = B·x̂`, relation in a row.
    Rows,
}

#[derive(Clone, Debug)]
pub struct Core<R: Real, I: Entry<R>> {
    pub n: usize,
    pub y: Vec<R>,
    /// `n × (n-1)`, lower trapezoidal.
    pub h: Matrix<R>,
    /// `None` when the caller elects not to maintain `A`.
    pub a: Option<Matrix<I>>,
    pub b: Matrix<I>,
    pub orientation: Orientation,
    /// `gamma^(i+1)` for `i = 0..n-1`.
    pub gamma_pows: Vec<R>,
}

/// Borrow `v[dst]` mutably and `v[src]` immutably.
fn pair_mut<T>(v: &mut [T], dst: usize, src: usize) -> (&mut T, &T) {
    assert_ne!(dst, src);
    if dst < src {
        let (lo, hi) = v.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    }
}

pub(crate) fn gamma_powers<R: Real>(gamma: &R, count: usize) -> Vec<R> {
    let mut out = Vec::with_capacity(count);
    let mut g = gamma.clone();
    for _ in 0..count {
        out.push(g.clone());
        g = g.mul(gamma);
    }
    out
}

/// Normalized `y` and initial `H` from the input vector.
pub fn initial_y_h<R: Real>(x: &[R]) -> Result<(Vec<R>, Matrix<R>)> {
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least two constants, got {n}"
        )));
    }
    if let Some(i) = x.iter().position(|v| v.is_zero() || !v.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "input entry {} is zero or not finite",
            i + 1
        )));
    }
    let ctx = x[0].ctx();
    // s_k = sqrt(sum_{j >= k} x_j^2)
    let mut s = vec![R::from_i64(0, ctx); n];
    let mut acc = R::from_i64(0, ctx);
    for k in (0..n).rev() {
        acc.add_mul(&x[k], &x[k]);
        s[k] = acc.sqrt();
    }
    let t = R::from_i64(1, ctx).div(&s[0]);
    let y: Vec<R> = x.iter().map(|v| v.mul(&t)).collect();
    for sk in s.iter_mut() {
        *sk = sk.mul(&t);
    }
    let zero = R::from_i64(0, ctx);
    let mut h = Matrix::filled(n, n - 1, zero);
    for j in 0..n - 1 {
        h[(j, j)] = s[j + 1].div(&s[j]);
        let denom = s[j].mul(&s[j + 1]);
        for i in j + 1..n {
            h[(i, j)] = y[i].mul(&y[j]).div(&denom).neg();
        }
    }
    Ok((y, h))
}

impl<R: Real, I: Entry<R>> Core<R, I> {
    /// Fresh state with `A = B = I`; no reduction applied.
    pub fn new(x: &[R], gamma: &R, orientation: Orientation, keep_a: bool) -> Result<Self> {
        let (y, h) = initial_y_h(x)?;
        let n = x.len();
        let ctx = x[0].ctx();
        let id = Matrix::identity(n, I::zero(ctx), I::one(ctx));
        Ok(Self {
            n,
            y,
            h,
            a: keep_a.then(|| id.clone()),
            b: id,
            orientation,
            gamma_pows: gamma_powers(gamma, n - 1),
        })
    }

    /// State assembled from existing arrays with `A = B = I`.
    pub fn from_parts(
        y: Vec<R>,
        h: Matrix<R>,
        gamma: &R,
        orientation: Orientation,
        keep_a: bool,
    ) -> Self {
        let n = y.len();
        let ctx = y[0].ctx();
        let id = Matrix::identity(n, I::zero(ctx), I::one(ctx));
        Self {
            n,
            y,
            h,
            a: keep_a.then(|| id.clone()),
            b: id,
            orientation,
            gamma_pows: gamma_powers(gamma, n - 1),
        }
    }

    pub fn ctx(&self) -> R::Ctx {
        self.y[0].ctx()
    }

    /// `gamma^i |H_ii|` for every diagonal entry.
    pub fn pivot_keys(&self) -> Vec<R> {
        (0..self.n - 1)
            .map(|i| self.gamma_pows[i].mul(&self.h[(i, i)].abs()))
            .collect()
    }

    /// Index maximizing `gamma^i |H_ii|`; ties go to the smallest index.
    pub fn select_pivot(&self) -> usize {
        let keys = self.pivot_keys();
        let mut best = 0;
        for (i, k) in keys.iter().enumerate().skip(1) {
            if k.cmp_abs(&keys[best]) == Ordering::Greater {
                best = i;
            }
        }
        best
    }

    /// Swaps `y[m]`, `y[m+1]`, rows `m`, `m+1` of `A` and `H`, and the
    /// matching rows or columns of `B`.
    pub fn exchange(&mut self, m: usize) {
        self.y.swap(m, m + 1);
        self.h.swap_rows(m, m + 1);
        if let Some(a) = &mut self.a {
            a.swap_rows(m, m + 1);
        }
        match self.orientation {
            Orientation::Columns => self.b.swap_cols(m, m + 1),
            Orientation::Rows => self.b.swap_rows(m, m + 1),
        }
    }

    /// Rotation coefficients `(t1, t2)` that clear `H[m][m+1]`.
    fn corner_coeffs(&self, m: usize) -> Result<(R, R)> {
        let hm = &self.h[(m, m)];
        let hm1 = &self.h[(m, m + 1)];
        let t0 = hm.hypot(hm1);
        if t0.is_zero() || !t0.is_finite() {
            return Err(Error::Exhausted(format!(
                "degenerate corner at index {}",
                m + 1
            )));
        }
        Ok((hm.div(&t0), hm1.div(&t0)))
    }

    fn rotate_row(row: &mut [R], m: usize, t1: &R, t2: &R) {
        let t3 = row[m].clone();
        let t4 = row[m + 1].clone();
        let mut left = t1.mul(&t3);
        left.add_mul(t2, &t4);
        let mut right = t1.mul(&t4);
        right.sub_mul(t2, &t3);
        row[m] = left;
        row[m + 1] = right;
    }

    /// Restores lower-trapezoidal form after exchanging at each `m` in `pivots`.
    /// The rotations touch disjoint column pairs, so rows are processed independently.
    pub fn remove_corners(&mut self, pivots: &[usize], exec: &Executor) -> Result<()> {
        let n = self.n;
        let mut rots = Vec::new();
        for &m in pivots {
            if m + 2 < n {
                let (t1, t2) = self.corner_coeffs(m)?;
                rots.push((m, t1, t2));
            }
        }
        if rots.is_empty() {
            return Ok(());
        }
        let first = rots.iter().map(|r| r.0).min().unwrap_or(0);
        if exec.is_parallel() && rots.len() > 1 {
            let plan = exec.plan(n - first, Unit::RowBlock);
            let h = &self.h;
            let rots_ref = &rots;
            let rows = exec.par_map(&plan, |off| {
                let i = first + off;
                let mut row = h.row(i).to_vec();
                for (m, t1, t2) in rots_ref {
                    if *m <= i {
                        Self::rotate_row(&mut row, *m, t1, t2);
                    }
                }
                row
            })?;
            for (off, row) in rows.into_iter().enumerate() {
                self.h.row_mut(first + off).clone_from_slice(&row);
            }
        } else {
            for (m, t1, t2) in &rots {
                for i in *m..n {
                    Self::rotate_row(self.h.row_mut(i), *m, t1, t2);
                }
            }
        }
        let zero = R::from_i64(0, self.ctx());
        for (m, _, _) in &rots {
            self.h[(*m, *m + 1)] = zero.clone();
        }
        Ok(())
    }

    /// Subtracts `nint(H[i][j]/H[j][j])` times row `j` from row `i` and
    /// applies the matching updates to `y`, `A` and `B`.
    pub fn reduce_entry(&mut self, i: usize, j: usize) -> Result<()> {
        let hjj = &self.h[(j, j)];
        if hjj.is_zero() {
            return Err(Error::Exhausted(format!(
                "zero diagonal at index {}",
                j + 1
            )));
        }
        let t = self.h[(i, j)].div(hjj).nint();
        if t.is_zero() {
            return Ok(());
        }
        if !t.is_finite() {
            return Err(Error::TierOverflow(format!("{t:?}")));
        }
        let ti = I::from_nint(&t)?;
        {
            let (yj, yi) = pair_mut(&mut self.y, j, i);
            yj.add_mul(&t, yi);
        }
        {
            let (hi, hj) = self.h.row_pair_mut(i, j);
            for k in 0..=j {
                hi[k].sub_mul(&t, &hj[k]);
            }
        }
        if let Some(a) = &mut self.a {
            let (ai, aj) = a.row_pair_mut(i, j);
            for (dst, src) in ai.iter_mut().zip(aj.iter()) {
                dst.sub_mul(&ti, src);
            }
        }
        match self.orientation {
            Orientation::Columns => {
                for k in 0..self.n {
                    let (dst, src) = pair_mut(self.b.row_mut(k), j, i);
                    dst.add_mul(&ti, src);
                }
            }
            Orientation::Rows => {
                let (bj, bi) = self.b.row_pair_mut(j, i);
                for (dst, src) in bj.iter_mut().zip(bi.iter()) {
                    dst.add_mul(&ti, src);
                }
            }
        }
        Ok(())
    }

    /// Full Hermite reduction, rows ascending, columns descending.
    pub fn hermite_reduce(&mut self) -> Result<()> {
        for i in 1..self.n {
            for j in (0..i).rev() {
                self.reduce_entry(i, j)?;
            }
        }
        Ok(())
    }

    /// One standard PSLQ iteration; returns the pivot.
    pub fn pslq_step(&mut self, exec: &Executor) -> Result<usize> {
        let m = self.select_pivot();
        self.exchange(m);
        self.remove_corners(&[m], exec)?;
        for i in m + 1..self.n {
            for j in (0..=(i - 1).min(m + 1)).rev() {
                self.reduce_entry(i, j)?;
            }
        }
        Ok(m)
    }

    /// One multi-pair iteration; returns the selected pivots.
    pub fn multipair_step(
        &mut self,
        beta: f64,
        max_pairs: Option<usize>,
        exec: &Executor,
    ) -> Result<Vec<usize>> {
        let selection = select_pairs(&self.pivot_keys(), beta, max_pairs);
        for &m in &selection.pairs {
            self.exchange(m);
        }
        self.remove_corners(&selection.pairs, exec)?;
        let t = self.reduce_diagonals(exec)?;
        self.apply_multipliers(&t, exec)?;
        Ok(selection.pairs)
    }

    /// Reduces every subdiagonal entry of `H`, sweeping successive lower
    /// diagonals; returns the integer multipliers `T`.
    pub fn reduce_diagonals(&mut self, exec: &Executor) -> Result<Matrix<R>> {
        let n = self.n;
        let ctx = self.ctx();
        let zero = R::from_i64(0, ctx);
        let mut t = Matrix::filled(n, n, zero);
        for j in 0..n - 1 {
            if self.h[(j, j)].is_zero() {
                return Err(Error::Exhausted(format!(
                    "zero diagonal at index {}",
                    j + 1
                )));
            }
        }
        for d in 1..n {
            let len = n - d;
            if exec.is_parallel() && len > 1 {
                let plan = exec.plan(len, Unit::DiagonalSlot);
                let h = &self.h;
                let tr = &t;
                let out = exec.par_map(&plan, |j| Self::reduce_one(h, tr, j + d, j))?;
                for (j, (hv, tv)) in out.into_iter().enumerate() {
                    self.h[(j + d, j)] = hv;
                    t[(j + d, j)] = tv;
                }
            } else {
                for j in 0..len {
                    let (hv, tv) = Self::reduce_one(&self.h, &t, j + d, j);
                    self.h[(j + d, j)] = hv;
                    t[(j + d, j)] = tv;
                }
            }
        }
        Ok(t)
    }

    fn reduce_one(h: &Matrix<R>, t: &Matrix<R>, l: usize, j: usize) -> (R, R) {
        let mut hlj = h[(l, j)].clone();
        for k in j + 1..l {
            let tlk = &t[(l, k)];
            if !tlk.is_zero() {
                hlj.sub_mul(tlk, &h[(k, j)]);
            }
        }
        let tlj = hlj.div(&h[(j, j)]).nint();
        if !tlj.is_zero() {
            hlj.sub_mul(&tlj, &h[(j, j)]);
        }
        (hlj, tlj)
    }

    /// Applies multipliers from [`Self::reduce_diagonals`] to `y`, `A` and `B`.
    pub fn apply_multipliers(&mut self, t: &Matrix<R>, exec: &Executor) -> Result<()> {
        let n = self.n;
        let mut nonzero: Vec<(usize, usize, I)> = Vec::new();
        for j in 0..n - 1 {
            for i in j + 1..n {
                let tij = &t[(i, j)];
                if !tij.is_zero() {
                    if !tij.is_finite() {
                        return Err(Error::TierOverflow(format!("{tij:?}")));
                    }
                    nonzero.push((i, j, I::from_nint(tij)?));
                }
            }
        }
        if nonzero.is_empty() {
            return Ok(());
        }
        // y_j += T_ij y_i with y_i not yet updated (i > j)
        for j in 0..n - 1 {
            let mut acc = self.y[j].clone();
            for i in j + 1..n {
                let tij = &t[(i, j)];
                if !tij.is_zero() {
                    acc.add_mul(tij, &self.y[i]);
                }
            }
            self.y[j] = acc;
        }
        let orientation = self.orientation;
        if exec.is_parallel() {
            let plan = exec.plan(n, Unit::ColumnBlock);
            let blocks = plan.assignments.clone();
            let nz = &nonzero;
            let a_ref = self.a.as_ref();
            let b_ref = &self.b;
            let updated = exec.par_map(&exec.plan(blocks.len(), Unit::ColumnBlock), |bi| {
                let cols = blocks[bi].0.clone();
                let mut a_blk = a_ref
                    .map(|a| Matrix::from_fn(n, cols.len(), |i, c| a[(i, cols.start + c)].clone()));
                let mut b_blk =
                    Matrix::from_fn(n, cols.len(), |i, c| b_ref[(i, cols.start + c)].clone());
                apply_rows(&mut a_blk, &mut b_blk, nz, orientation);
                (a_blk, b_blk)
            })?;
            for (bi, (a_blk, b_blk)) in updated.into_iter().enumerate() {
                let cols = blocks[bi].0.clone();
                for i in 0..n {
                    for (c, col) in cols.clone().enumerate() {
                        self.b[(i, col)] = b_blk[(i, c)].clone();
                        if let (Some(a), Some(ab)) = (&mut self.a, &a_blk) {
                            a[(i, col)] = ab[(i, c)].clone();
                        }
                    }
                }
            }
        } else {
            let mut a = self.a.take();
            apply_rows(&mut a, &mut self.b, &nonzero, orientation);
            self.a = a;
        }
        Ok(())
    }

    /// `(argmin, min, max)` of `|y|`.
    pub fn y_extremes(&self) -> (usize, R, R) {
        let mut imin = 0;
        let mut imax = 0;
        for i in 1..self.n {
            if self.y[i].cmp_abs(&self.y[imin]) == Ordering::Less {
                imin = i;
            }
            if self.y[i].cmp_abs(&self.y[imax]) == Ordering::Greater {
                imax = i;
            }
        }
        (imin, self.y[imin].abs(), self.y[imax].abs())
    }

    /// `1 / max_j |H_jj|`, or `None` when the diagonal vanishes.
    pub fn norm_bound(&self) -> Option<R> {
        let mut best = self.h[(0, 0)].abs();
        for j in 1..self.n - 1 {
            if self.h[(j, j)].cmp_abs(&best) == Ordering::Greater {
                best = self.h[(j, j)].abs();
            }
        }
        if best.is_zero() {
            return None;
        }
        Some(R::from_i64(1, self.ctx()).div(&best))
    }

    /// Relation vector associated with `y[k]`.
    pub fn relation(&self, k: usize) -> Vec<I> {
        match self.orientation {
            Orientation::Columns => self.b.column(k),
            Orientation::Rows => self.b.row(k).to_vec(),
        }
    }

    /// Largest-magnitude entry of `A` (when kept) and `B`.
    pub fn max_entry(&self) -> I {
        let mut best = I::zero(self.ctx());
        let mats = self.a.iter().chain(std::iter::once(&self.b));
        for m in mats {
            for e in m.iter() {
                if e.cmp_abs(&best) == Ordering::Greater {
                    best = e.clone();
                }
            }
        }
        best
    }

    /// Largest-magnitude entry of `A`, if maintained.
    pub fn max_a_entry(&self) -> Option<I> {
        let a = self.a.as_ref()?;
        let mut best = I::zero(self.ctx());
        for e in a.iter() {
            if e.cmp_abs(&best) == Ordering::Greater {
                best = e.clone();
            }
        }
        Some(best)
    }
}

fn apply_rows<R: Real, I: Entry<R>>(
    a: &mut Option<Matrix<I>>,
    b: &mut Matrix<I>,
    nonzero: &[(usize, usize, I)],
    orientation: Orientation,
) {
    debug_assert_eq!(orientation, Orientation::Rows);
    for (i, j, tij) in nonzero {
        if let Some(a) = a {
            let (ai, aj) = a.row_pair_mut(*i, *j);
            for (dst, src) in ai.iter_mut().zip(aj.iter()) {
                dst.sub_mul(tij, src);
            }
        }
        let (bj, bi) = b.row_pair_mut(*j, *i);
        for (dst, src) in bj.iter_mut().zip(bi.iter()) {
            dst.add_mul(tij, src);
        }
    }
}

/// Disjoint adjacent index pairs chosen for one multi-pair iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSelection {
    /// Lower index `m` of each pair `(m, m+1)`, in selection order.
    pub pairs: Vec<usize>,
}

impl PairSelection {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }
}

/// Pair cap for problem size `n`: `floor(beta * n)`, at least one.
pub fn pair_cap(beta: f64, n: usize) -> usize {
    ((beta * n as f64).floor() as usize).max(1)
}

/// Greedy selection down the keys sorted in decreasing order (stable by
/// index), skipping pairs that overlap an already selected index.
pub fn select_pairs<R: Real>(keys: &[R], beta: f64, max_pairs: Option<usize>) -> PairSelection {
    let n = keys.len() + 1;
    let cap = max_pairs.unwrap_or_else(|| pair_cap(beta, n)).max(1);
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].cmp_abs(&keys[a]));
    let mut taken = vec![false; n];
    let mut pairs = Vec::new();
    for m in order {
        if pairs.len() >= cap {
            break;
        }
        if taken[m] || taken[m + 1] {
            continue;
        }
        taken[m] = true;
        taken[m + 1] = true;
        pairs.push(m);
    }
    PairSelection { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_selection_examples() {
        let sel = select_pairs(&[3.0, 2.0, 1.0], 0.4, None);
        assert_eq!(sel.pairs, vec![0]);

        // unique maximum heads the list
        let keys = [0.1, 0.5, 0.9, 0.2, 0.3, 0.8];
        let sel = select_pairs(&keys, 1.0, None);
        assert_eq!(sel.pairs[0], 2);
        for w in sel.pairs.iter().enumerate() {
            for v in sel.pairs.iter().skip(w.0 + 1) {
                assert!(w.1.abs_diff(*v) >= 2);
            }
        }

        let keys: Vec<f64> = (0..25).map(|i| ((i * 7) % 11) as f64).collect();
        let sel = select_pairs(&keys, 0.4, None);
        assert!(sel.count() <= 10);
    }

    #[test]
    fn pair_selection_ties_prefer_smaller_index() {
        let sel = select_pairs(&[1.0, 1.0, 1.0, 1.0, 1.0], 1.0, None);
        assert_eq!(sel.pairs, vec![0, 2, 4]);
    }

    #[test]
    fn pair_cap_never_zero() {
        assert_eq!(pair_cap(0.4, 2), 1);
        assert_eq!(pair_cap(0.4, 4), 1);
        assert_eq!(pair_cap(0.4, 26), 10);
    }

    #[test]
    fn initial_h_for_equal_pair() {
        let (y, h) = initial_y_h(&[1.0f64, 1.0]).unwrap();
        let r = 0.5f64.sqrt();
        assert!((y[0] - r).abs() < 1e-15 && (y[1] - r).abs() < 1e-15);
        assert!((h[(0, 0)] - r).abs() < 1e-15);
        assert!((h[(1, 0)] + r).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(
            initial_y_h(&[1.0f64]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            initial_y_h(&[1.0f64, 0.0, 2.0]),
            Err(Error::DegenerateInput(_))
        ));
    }
}
