//! Exact integer linear algebra: sparse matrices, Smith normal form and the
//! homology of a two-step complex.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("not a complex: (d_out * d_in)[{row}][{col}] = {value}")]
    NotAComplex { row: usize, col: usize, value: i64 },
    #[error("dimension mismatch: d_out has {out_cols} columns, d_in has {in_rows} rows")]
    DimensionMismatch { out_cols: usize, in_rows: usize },
}

/// Sparse integer matrix; entries sorted by (row, col), no explicit zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, i64)>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        IntMatrix {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, 1)).collect(),
        }
    }

    /// Duplicate positions are summed; zero sums are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, i64)>,
    {
        let mut v: Vec<(usize, usize, i64)> = triplets.into_iter().collect();
        for &(r, c, _) in &v {
            assert!(r < rows && c < cols, "entry ({r},{c}) outside {rows}x{cols}");
        }
        v.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(usize, usize, i64)> = Vec::with_capacity(v.len());
        for (r, c, x) in v {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => {
                    last.2 = last.2.checked_add(x).expect("integer overflow in matrix entry")
                }
                _ => entries.push((r, c, x)),
            }
        }
        entries.retain(|e| e.2 != 0);
        IntMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        IntMatrix::from_triplets(
            rows.len(),
            cols,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &x)| (i, j, x))),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, i64)] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.entries
            .binary_search_by_key(&(r, c), |&(a, b, _)| (a, b))
            .map_or(0, |i| self.entries[i].2)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_nonzero(&self) -> Option<(usize, usize, i64)> {
        self.entries.first().copied()
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_triplets(
            self.cols,
            self.rows,
            self.entries.iter().map(|&(r, c, x)| (c, r, x)),
        )
    }

    pub fn scale(&self, k: i64) -> IntMatrix {
        IntMatrix::from_triplets(
            self.rows,
            self.cols,
            self.entries.iter().map(|&(r, c, x)| (r, c, x * k)),
        )
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IntMatrix::from_triplets(
            self.rows,
            self.cols,
            self.entries.iter().chain(&other.entries).copied(),
        )
    }

    /// Matrix product; `None` if an entry overflows `i64`.
    pub fn checked_mul(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.cols, other.rows, "product dimension mismatch");
        let mut row_start = vec![0usize; other.rows + 1];
        for &(r, _, _) in &other.entries {
            row_start[r + 1] += 1;
        }
        for i in 0..other.rows {
            row_start[i + 1] += row_start[i];
        }
        let mut acc: Vec<((usize, usize), i128)> = Vec::new();
        for &(i, k, a) in &self.entries {
            for &(_, j, b) in &other.entries[row_start[k]..row_start[k + 1]] {
                acc.push(((i, j), i128::from(a) * i128::from(b)));
            }
        }
        acc.sort_unstable_by_key(|e| e.0);
        let mut entries: Vec<(usize, usize, i64)> = Vec::new();
        let mut idx = 0;
        while idx < acc.len() {
            let key = acc[idx].0;
            let mut x: i128 = 0;
            while idx < acc.len() && acc[idx].0 == key {
                x += acc[idx].1;
                idx += 1;
            }
            if x != 0 {
                entries.push((key.0, key.1, i64::try_from(x).ok()?));
            }
        }
        Some(IntMatrix {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        self.checked_mul(other).expect("integer overflow in matrix product")
    }

    pub fn to_big_dense(&self) -> BigMatrix {
        let mut m = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for &(r, c, x) in &self.entries {
            m[r][c] = BigInt::from(x);
        }
        m
    }

    /// Debug form: `{"rows", "cols", "entries": [[r, c, x], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.entries.iter().map(|&(r, c, x)| [r as i64, c as i64, x]).collect::<Vec<_>>(),
        })
    }
}

pub type BigMatrix = Vec<Vec<BigInt>>;

fn big_identity(n: usize) -> BigMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn big_mul(a: &BigMatrix, b: &BigMatrix, inner: usize) -> BigMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += &row[k] * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub s: BigMatrix,
    pub u: BigMatrix,
    pub v: BigMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let n = self.s.len().min(self.s.first().map_or(0, Vec::len));
        (0..n).map(|i| self.s[i][i].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }

    /// U·m·V = S, U and V unimodular, S diagonal, non-negative, divisibility chain.
    pub fn verify(&self, m: &IntMatrix) -> bool {
        let (r, c) = (m.rows(), m.cols());
        let um = big_mul(&self.u, &m.to_big_dense(), r);
        let umv = if r == 0 { Vec::new() } else { big_mul(&um, &self.v, c) };
        if umv != self.s {
            return false;
        }
        for (i, row) in self.s.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i != j && !x.is_zero() {
                    return false;
                }
            }
        }
        let d = self.diagonal();
        if d.iter().any(|x| x.is_negative()) {
            return false;
        }
        for w in d.windows(2) {
            if w[0].is_zero() {
                if !w[1].is_zero() {
                    return false;
                }
            } else if !w[1].is_multiple_of(&w[0]) {
                return false;
            }
        }
        determinant(&self.u).abs().is_one() && determinant(&self.v).abs().is_one()
    }
}

fn swap_cols(m: &mut BigMatrix, a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// row[dst] -= q * row[src]
fn row_axpy(m: &mut BigMatrix, dst: usize, src: usize, q: &BigInt) {
    let src_row = m[src].clone();
    for (x, y) in m[dst].iter_mut().zip(&src_row) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// col[dst] -= q * col[src]
fn col_axpy(m: &mut BigMatrix, dst: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let y = row[src].clone();
            row[dst] -= q * y;
        }
    }
}

/// Dense Smith reduction. Pivot: smallest nonzero magnitude in the
/// remaining block. Row operations are mirrored on `u`, column operations on `v`.
fn snf_in_place(a: &mut BigMatrix, mut u: Option<&mut BigMatrix>, mut v: Option<&mut BigMatrix>) {
    let r = a.len();
    let c = a.first().map_or(0, Vec::len);
    for t in 0..r.min(c) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if a[bi][bj].magnitude() <= a[i][j].magnitude() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = best else { return };
            a.swap(t, pi);
            if let Some(u) = u.as_deref_mut() {
                u.swap(t, pi);
            }
            swap_cols(a, t, pj);
            if let Some(v) = v.as_deref_mut() {
                swap_cols(v, t, pj);
            }

            let mut clean = true;
            for i in t + 1..r {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                row_axpy(a, i, t, &q);
                if let Some(u) = u.as_deref_mut() {
                    row_axpy(u, i, t, &q);
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..c {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                col_axpy(a, j, t, &q);
                if let Some(v) = v.as_deref_mut() {
                    col_axpy(v, j, t, &q);
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let p = a[t][t].clone();
            let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let one = -BigInt::one();
                    row_axpy(a, t, i, &one);
                    if let Some(u) = u.as_deref_mut() {
                        row_axpy(u, t, i, &one);
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            if let Some(u) = u.as_deref_mut() {
                for x in u[t].iter_mut() {
                    *x = -&*x;
                }
            }
        }
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let mut s = m.to_big_dense();
    let mut u = big_identity(m.rows());
    let mut v = big_identity(m.cols());
    snf_in_place(&mut s, Some(&mut u), Some(&mut v));
    SmithForm { s, u, v }
}

fn sparse_sub(a: &[(usize, i64)], q: i64, b: &[(usize, i64)]) -> Option<Vec<(usize, i64)>> {
    // a - q * b
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, q.checked_mul(b[j].1)?.checked_neg()?));
            j += 1;
        } else {
            let x = a[i].1.checked_sub(q.checked_mul(b[j].1)?)?;
            if x != 0 {
                out.push((a[i].0, x));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

/// Eliminates unit pivots sparsely; returns the number of unit pivots and the
/// rows left over, or `None` on i64 overflow.
fn unit_elimination(m: &IntMatrix) -> Option<(usize, Vec<Vec<(usize, i64)>>)> {
    let mut rows: Vec<Vec<(usize, i64)>> = vec![Vec::new(); m.rows()];
    for &(r, c, x) in m.entries() {
        rows[r].push((c, x));
    }
    let mut colset: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols()];
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row {
            colset[c].insert(r);
        }
    }
    let mut active = vec![true; rows.len()];
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        rows.iter().enumerate().map(|(r, row)| Reverse((row.len(), r))).collect();
    let mut pivots = 0;
    while let Some(Reverse((len, p))) = heap.pop() {
        if !active[p] || rows[p].len() != len {
            continue;
        }
        if len == 0 {
            active[p] = false;
            continue;
        }
        let pivot = rows[p]
            .iter()
            .filter(|&&(_, x)| x == 1 || x == -1)
            .min_by_key(|&&(c, _)| (colset[c].len(), c))
            .copied();
        let Some((j, v)) = pivot else { continue };
        let prow = std::mem::take(&mut rows[p]);
        let others: Vec<usize> = colset[j].iter().copied().filter(|&i| i != p).collect();
        for i in others {
            let a = rows[i].iter().find(|&&(c, _)| c == j).map(|&(_, x)| x)?;
            let new = sparse_sub(&rows[i], a.checked_mul(v)?, &prow)?;
            for &(c, _) in &rows[i] {
                colset[c].remove(&i);
            }
            for &(c, _) in &new {
                colset[c].insert(i);
            }
            rows[i] = new;
            heap.push(Reverse((rows[i].len(), i)));
        }
        for &(c, _) in &prow {
            colset[c].remove(&p);
        }
        active[p] = false;
        pivots += 1;
    }
    let rest = rows
        .into_iter()
        .zip(active)
        .filter(|(row, a)| *a && !row.is_empty())
        .map(|(row, _)| row)
        .collect();
    Some((pivots, rest))
}

fn dense_diagonal(mut a: BigMatrix) -> Vec<BigInt> {
    snf_in_place(&mut a, None, None);
    let n = a.len().min(a.first().map_or(0, Vec::len));
    (0..n).map(|i| a[i][i].clone()).filter(|x| !x.is_zero()).collect()
}

/// Nonzero invariant factors d_1 | d_2 | ... of `m`.
pub fn elementary_divisors(m: &IntMatrix) -> Vec<BigInt> {
    match unit_elimination(m) {
        Some((ones, rest)) => {
            let mut out = vec![BigInt::one(); ones];
            if !rest.is_empty() {
                let mut cols: Vec<usize> = rest.iter().flatten().map(|&(c, _)| c).collect();
                cols.sort_unstable();
                cols.dedup();
                let dense: BigMatrix = rest
                    .iter()
                    .map(|row| {
                        let mut d = vec![BigInt::zero(); cols.len()];
                        for &(c, x) in row {
                            d[cols.binary_search(&c).unwrap()] = BigInt::from(x);
                        }
                        d
                    })
                    .collect();
                out.extend(dense_diagonal(dense));
            }
            out
        }
        None => dense_diagonal(m.to_big_dense()),
    }
}

pub fn rank(m: &IntMatrix) -> usize {
    elementary_divisors(m).len()
}

/// Rank by fraction-free (Bareiss) elimination over the integers.
pub fn rank_fraction_free(m: &IntMatrix) -> usize {
    let mut a = m.to_big_dense();
    let (r, c) = (m.rows(), m.cols());
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..c {
        if rank == r {
            break;
        }
        let Some(p) = (rank..r).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, p);
        for i in rank + 1..r {
            for j in col + 1..c {
                let x = &a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j];
                a[i][j] = x / &prev;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Determinant of a square matrix by Bareiss elimination.
pub fn determinant(m: &BigMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let x = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = x / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct HomologySummary {
    pub betti: usize,
    #[serde(serialize_with = "serialize_torsion")]
    pub torsion: Vec<BigInt>,
}

fn serialize_torsion<S: serde::Serializer>(t: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(t.len()))?;
    for x in t {
        match x.to_u64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

impl HomologySummary {
    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl std::fmt::Display for HomologySummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// ker(d_out) / im(d_in).
pub fn homology_at(d_out: &IntMatrix, d_in: &IntMatrix) -> Result<HomologySummary, LinalgError> {
    if d_out.cols() != d_in.rows() {
        return Err(LinalgError::DimensionMismatch {
            out_cols: d_out.cols(),
            in_rows: d_in.rows(),
        });
    }
    let comp = d_out.mul(d_in);
    if let Some((row, col, value)) = comp.first_nonzero() {
        return Err(LinalgError::NotAComplex { row, col, value });
    }
    let out_rank = rank(d_out);
    let divisors = elementary_divisors(d_in);
    let torsion: Vec<BigInt> = divisors.iter().filter(|d| !d.is_one()).cloned().collect();
    Ok(HomologySummary {
        betti: d_out.cols() - out_rank - divisors.len(),
        torsion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(m: &IntMatrix) -> Vec<i64> {
        smith_normal_form(m)
            .diagonal()
            .iter()
            .map(|x| x.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn snf_examples() {
        let id = IntMatrix::identity(3);
        assert_eq!(diag(&id), vec![1, 1, 1]);
        let m = IntMatrix::from_dense(&[vec![2, 4], vec![6, 8]]);
        let f = smith_normal_form(&m);
        assert!(f.verify(&m));
        assert_eq!(diag(&m), vec![2, 4]);
        let z = IntMatrix::zeros(2, 3);
        assert_eq!(diag(&z), vec![0, 0]);
        assert!(smith_normal_form(&z).verify(&z));
    }

    #[test]
    fn divisors_agree_with_dense() {
        let m = IntMatrix::from_dense(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let f = smith_normal_form(&m);
        assert!(f.verify(&m));
        assert_eq!(diag(&m), vec![2, 6, 12]);
        let d: Vec<i64> = elementary_divisors(&m).iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(d, vec![2, 6, 12]);
    }

    #[test]
    fn homology_examples() {
        let h = homology_at(&IntMatrix::zeros(1, 2), &IntMatrix::zeros(2, 1)).unwrap();
        assert_eq!(h, HomologySummary { betti: 2, torsion: vec![] });
        let h = homology_at(&IntMatrix::zeros(0, 1), &IntMatrix::from_dense(&[vec![2]])).unwrap();
        assert_eq!(h.betti, 0);
        assert_eq!(h.torsion, vec![BigInt::from(2)]);
        assert_eq!(h.to_string(), "Z/2");
    }

    #[test]
    fn composition_checked() {
        let a = IntMatrix::from_dense(&[vec![1]]);
        let err = homology_at(&a, &a).unwrap_err();
        assert_eq!(err, LinalgError::NotAComplex { row: 0, col: 0, value: 1 });
        let b = IntMatrix::zeros(2, 2);
        assert!(matches!(homology_at(&a, &b), Err(LinalgError::DimensionMismatch { .. })));
    }

    #[test]
    fn determinant_small() {
        let m = IntMatrix::from_dense(&[vec![0, 2], vec![3, 1]]).to_big_dense();
        assert_eq!(determinant(&m), BigInt::from(-6));
    }

    #[test]
    fn triplets_accumulate() {
        let m = IntMatrix::from_triplets(2, 2, vec![(0, 1, 2), (0, 1, -2), (1, 0, 3)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), 3);
    }
}
