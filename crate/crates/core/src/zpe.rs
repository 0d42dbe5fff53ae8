//! Exact linear algebra over Z/p^e.
//!
//! Z/p^e is a local ring in which every element is unit * p^v, so Gaussian
//! elimination works with valuation pivoting, but row spans need the Howell
//! completion to admit canonical forms: whenever a pivot is p^v with v > 0,
//! the row p^(e-v) * (pivot row) also belongs to the span and must be folded
//! back in. `howell` returns the unique normal form of a row span, which
//! gives canonical membership tests and canonical coset representatives.
//! `kernel` runs a column elimination with the same completion rule and
//! returns a generating set of { x : Ax = 0 }. `smith` diagonalizes with
//! both-sided operations (only the column transform is tracked) and is the
//! basis for quotient presentations in `quotient`.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Ring handle for Z/p^e. Copyable, carried by every matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zpe {
    pub p: u64,
    pub e: u32,
    pub m: u64,
}

impl Zpe {
    pub fn new(p: u64, e: u32) -> Result<Self> {
        if e == 0 {
            return Err(Error::InvalidInput("exponent e must be >= 1".into()));
        }
        if p < 2 || !is_prime(p) {
            return Err(Error::InvalidInput(format!("p = {p} is not prime")));
        }
        let mut m: u64 = 1;
        for _ in 0..e {
            m = m
                .checked_mul(p)
                .filter(|&x| x < (1 << 31))
                .ok_or_else(|| Error::InvalidInput(format!("p^e = {p}^{e} too large")))?;
        }
        Ok(Zpe { p, e, m })
    }

    #[inline]
    pub fn norm(&self, x: u64) -> u64 {
        x % self.m
    }
    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.m
    }
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.m - b % self.m) % self.m
    }
    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        (self.m - a % self.m) % self.m
    }
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a % self.m) * (b % self.m) % self.m
    }

    /// p-adic valuation in 0..=e, with val(0) = e.
    pub fn val(&self, x: u64) -> u32 {
        let mut x = x % self.m;
        if x == 0 {
            return self.e;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// p^v as a ring element (v <= e gives 0 at v = e only when p^e = m).
    pub fn pp(&self, v: u32) -> u64 {
        let mut r: u64 = 1;
        for _ in 0..v.min(self.e) {
            r *= self.p;
        }
        r % self.m
    }

    pub fn is_unit(&self, x: u64) -> bool {
        (x % self.m) % self.p != 0
    }

    /// Inverse of a unit, by extended Euclid.
    pub fn inv(&self, x: u64) -> u64 {
        let x = x % self.m;
        assert!(x % self.p != 0, "inv of non-unit {x} mod {}", self.m);
        let (mut r0, mut r1) = (self.m as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        (t0.rem_euclid(self.m as i128)) as u64
    }

    /// Exact division by p^v (caller guarantees val(x) >= v).
    pub fn div_pow(&self, x: u64, v: u32) -> u64 {
        if v >= self.e {
            debug_assert_eq!(x % self.m, 0);
            return 0;
        }
        let d = self.pp(v);
        debug_assert_eq!(x % d, 0, "inexact division of {x} by p^{v}");
        (x / d) % self.m
    }
}

fn is_prime(n: u64) -> bool {
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

/// Dense row-major matrix over Z/p^e.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    pub ring: Zpe,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl std::fmt::Debug for Mat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Mat {}x{} mod {} [", self.rows, self.cols, self.ring.m)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zero(ring: Zpe, rows: usize, cols: usize) -> Self {
        Mat { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: Zpe, n: usize) -> Self {
        let mut m = Mat::zero(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(ring: Zpe, cols: usize, rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in &rows {
            assert_eq!(r.len(), cols);
            data.extend(r.iter().map(|&x| x % ring.m));
        }
        Mat { ring, rows: n, cols, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, x: u64) {
        self.data[r * self.cols + c] = x % self.ring.m;
    }
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn col(&self, c: usize) -> Vec<u64> {
        (0..self.rows).map(|r| self.at(r, c)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zero(self.ring, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.at(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        assert_eq!(self.ring, other.ring);
        let ring = self.ring;
        let mut out = Mat::zero(ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == 0 {
                    continue;
                }
                let orow = k * other.cols;
                let srow = i * other.cols;
                for j in 0..other.cols {
                    let v = out.data[srow + j] + a * other.data[orow + j] % ring.m;
                    out.data[srow + j] = v % ring.m;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let ring = self.ring;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| ring.add(a, b))
            .collect();
        Mat { ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let ring = self.ring;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| ring.sub(a, b))
            .collect();
        Mat { ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: u64) -> Mat {
        let ring = self.ring;
        let data = self.data.iter().map(|&a| ring.mul(a, s)).collect();
        Mat { ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let ring = self.ring;
        (0..self.rows)
            .map(|r| {
                let mut acc = 0u64;
                for c in 0..self.cols {
                    acc = (acc + self.at(r, c) * (v[c] % ring.m)) % ring.m;
                }
                acc
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn hcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut m = Mat::zero(self.ring, self.rows, cols);
        for r in 0..self.rows {
            m.data[r * cols..r * cols + self.cols].copy_from_slice(self.row(r));
            m.data[r * cols + self.cols..(r + 1) * cols].copy_from_slice(other.row(r));
        }
        m
    }

    pub fn vcat(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Mat { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut result = Mat::identity(self.ring, self.rows);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        result
    }
}

fn row_sub_scaled(ring: Zpe, dst: &mut [u64], src: &[u64], q: u64) {
    if q == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = (*d + (ring.m - q * s % ring.m)) % ring.m;
    }
}

fn row_scale(ring: Zpe, row: &mut [u64], s: u64) {
    for d in row.iter_mut() {
        *d = *d * s % ring.m;
    }
}

/// Howell normal form of the row span. Canonical: two generating sets of the
/// same span produce identical output. Zero rows are dropped.
pub fn howell(a: &Mat) -> Mat {
    let ring = a.ring;
    let mut pool: Vec<Vec<u64>> = (0..a.rows)
        .map(|r| a.row(r).to_vec())
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    let mut pivots: Vec<(usize, u32, Vec<u64>)> = Vec::new(); // (col, val, row)

    for col in 0..a.cols {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, r)| r[col] != 0)
            .min_by_key(|(i, r)| (ring.val(r[col]), *i))
            .map(|(i, _)| i);
        let Some(bi) = best else { continue };
        let mut piv = pool.swap_remove(bi);
        let v = ring.val(piv[col]);
        let u = ring.inv(piv[col] / ring.pp(v));
        row_scale(ring, &mut piv, u);
        debug_assert_eq!(piv[col], ring.pp(v));
        for r in pool.iter_mut() {
            if r[col] != 0 {
                let q = ring.div_pow(r[col], v);
                row_sub_scaled(ring, r, &piv, q);
            }
        }
        pool.retain(|r| r.iter().any(|&x| x != 0));
        if v > 0 {
            let mut extra = piv.clone();
            row_scale(ring, &mut extra, ring.pp(ring.e - v));
            if extra.iter().any(|&x| x != 0) {
                pool.push(extra);
            }
        }
        pivots.push((col, v, piv));
    }
    debug_assert!(pool.is_empty());

    // reduce entries above each pivot to canonical range [0, p^v)
    for i in 0..pivots.len() {
        let (col, v, piv) = (pivots[i].0, pivots[i].1, pivots[i].2.clone());
        let d = ring.pp(v);
        for (_, _, earlier) in pivots.iter_mut().take(i) {
            let q = earlier[col] / d;
            row_sub_scaled(ring, earlier, &piv, q);
            debug_assert!(earlier[col] < d);
        }
    }

    Mat::from_rows(ring, a.cols, pivots.into_iter().map(|(_, _, r)| r).collect())
}

/// Howell form of `a` with a transform and the left kernel, computed from the
/// Howell form of [a | I]: rows split into (x*a = h-part nonzero, x) and
/// (x*a = 0, x).
pub struct HowellDecomp {
    pub h: Mat,
    pub u: Mat,
    pub lkernel: Mat,
}

pub fn howell_with_transform(a: &Mat) -> HowellDecomp {
    let ring = a.ring;
    let aug = a.hcat(&Mat::identity(ring, a.rows));
    let haug = howell(&aug);
    let mut hrows = Vec::new();
    let mut urows = Vec::new();
    let mut krows = Vec::new();
    for r in 0..haug.rows {
        let row = haug.row(r);
        let (ha, ua) = row.split_at(a.cols);
        if ha.iter().all(|&x| x == 0) {
            krows.push(ua.to_vec());
        } else {
            hrows.push(ha.to_vec());
            urows.push(ua.to_vec());
        }
    }
    HowellDecomp {
        h: Mat::from_rows(ring, a.cols, hrows),
        u: Mat::from_rows(ring, a.rows, urows),
        lkernel: Mat::from_rows(ring, a.rows, krows),
    }
}

/// Reduce `x` against a Howell form: returns (coefficients, canonical residue).
/// `x` lies in the row span iff the residue is zero, and then
/// coefficients * h = x.
pub fn reduce_mod_howell(h: &Mat, x: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let ring = h.ring;
    assert_eq!(x.len(), h.cols);
    let mut r: Vec<u64> = x.iter().map(|&v| v % ring.m).collect();
    let mut coeffs = vec![0u64; h.rows];
    for i in 0..h.rows {
        let row = h.row(i);
        let col = row.iter().position(|&v| v != 0).expect("howell row nonzero");
        let d = row[col];
        debug_assert_eq!(d, ring.pp(ring.val(d)));
        let q = r[col] / d;
        if q != 0 {
            coeffs[i] = q;
            row_sub_scaled(ring, &mut r, row, q);
        }
    }
    (coeffs, r)
}

pub fn in_rowspan(h: &Mat, x: &[u64]) -> bool {
    reduce_mod_howell(h, x).1.iter().all(|&v| v == 0)
}

/// Solve A x = b over Z/p^e. Returns any solution (deterministic).
pub fn solve(a: &Mat, b: &[u64]) -> Option<Vec<u64>> {
    Solver::new(a).solve(b)
}

/// Repeated solves against one matrix: the Howell transform of A^T is
/// computed once, each `solve` is a reduction.
pub struct Solver {
    ring: Zpe,
    cols: usize,
    dec: HowellDecomp,
}

impl Solver {
    pub fn new(a: &Mat) -> Self {
        Solver { ring: a.ring, cols: a.cols, dec: howell_with_transform(&a.transpose()) }
    }

    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        let (coeffs, residue) = reduce_mod_howell(&self.dec.h, b);
        if residue.iter().any(|&v| v != 0) {
            return None;
        }
        let ring = self.ring;
        let mut x = vec![0u64; self.cols];
        for (i, &c) in coeffs.iter().enumerate() {
            if c != 0 {
                for (xj, &uj) in x.iter_mut().zip(self.dec.u.row(i)) {
                    *xj = (*xj + c * uj) % ring.m;
                }
            }
        }
        Some(x)
    }
}

/// Inverse of a square matrix, if it exists.
pub fn inverse(a: &Mat) -> Option<Mat> {
    assert_eq!(a.rows, a.cols);
    let dec = howell_with_transform(a);
    if dec.h == Mat::identity(a.ring, a.rows) {
        Some(dec.u)
    } else {
        None
    }
}

/// Sparse column for kernel elimination: sorted (row, value) pairs.
#[derive(Clone)]
pub struct SparseCol {
    pub entries: Vec<(u32, u64)>,
}

impl SparseCol {
    pub fn from_dense(v: &[u64]) -> Self {
        SparseCol {
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(i, &x)| (i as u32, x))
                .collect(),
        }
    }
    fn get(&self, row: u32) -> u64 {
        match self.entries.binary_search_by_key(&row, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }
    fn scale(&self, ring: Zpe, s: u64) -> SparseCol {
        SparseCol {
            entries: self
                .entries
                .iter()
                .map(|&(r, v)| (r, v * s % ring.m))
                .filter(|&(_, v)| v != 0)
                .collect(),
        }
    }
    /// self -= q * other, merged in row order.
    fn sub_scaled(&mut self, ring: Zpe, other: &SparseCol, q: u64) {
        if q == 0 {
            return;
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() || j < other.entries.len() {
            let take_self = j >= other.entries.len()
                || (i < self.entries.len() && self.entries[i].0 < other.entries[j].0);
            let take_other = i >= self.entries.len()
                || (j < other.entries.len() && other.entries[j].0 < self.entries[i].0);
            if take_self {
                out.push(self.entries[i]);
                i += 1;
            } else if take_other {
                let (r, v) = other.entries[j];
                let nv = ring.neg(q * v % ring.m);
                if nv != 0 {
                    out.push((r, nv));
                }
                j += 1;
            } else {
                let (r, v) = self.entries[i];
                let nv = ring.sub(v, q * other.entries[j].1 % ring.m);
                if nv != 0 {
                    out.push((r, nv));
                }
                i += 1;
                j += 1;
            }
        }
        self.entries = out;
    }
    fn min_val_entry(&self, ring: Zpe) -> Option<(u32, u32)> {
        // (valuation, row) of the minimal-valuation entry, earliest row wins ties
        self.entries
            .iter()
            .map(|&(r, v)| (ring.val(v), r))
            .min()
    }
}

/// Generating set for { x : A x = 0 }, as matrix rows. `a_cols` sparse columns
/// of length `a_rows`. Column elimination with valuation pivoting and Howell
/// completion; the transform vectors of columns that reach zero are exactly
/// the kernel generators.
pub fn kernel_sparse(ring: Zpe, cols: Vec<SparseCol>, n_cols: usize) -> Mat {
    struct Live {
        col: SparseCol,
        track: Vec<u64>,
        cache: Option<(u32, u32)>, // (val, row)
    }
    let mut live: Vec<Live> = Vec::with_capacity(n_cols);
    let mut kernel_rows: Vec<Vec<u64>> = Vec::new();
    for (j, col) in cols.into_iter().enumerate() {
        let mut track = vec![0u64; n_cols];
        track[j] = 1;
        if col.entries.is_empty() {
            kernel_rows.push(track);
        } else {
            let cache = col.min_val_entry(ring);
            live.push(Live { col, track, cache });
        }
    }

    loop {
        // global minimum-valuation pivot, deterministic tie-break
        let best = live
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.cache.map(|c| (c, i)))
            .min();
        let Some(((v, prow), bi)) = best else { break };
        let mut piv = live.swap_remove(bi);
        // normalize pivot entry to exactly p^v
        let u = ring.inv(piv.col.get(prow) / ring.pp(v));
        if u != 1 {
            piv.col = piv.col.scale(ring, u);
            row_scale(ring, &mut piv.track, u);
        }
        let eliminate = |l: &mut Live| {
            let x = l.col.get(prow);
            if x != 0 {
                let q = ring.div_pow(x, v);
                l.col.sub_scaled(ring, &piv.col, q);
                for (t, &s) in l.track.iter_mut().zip(&piv.track) {
                    *t = (*t + (ring.m - q * s % ring.m)) % ring.m;
                }
                l.cache = l.col.min_val_entry(ring);
            }
        };
        // track vectors dominate the cost; updates are independent per column
        if live.len() * n_cols > 1 << 18 {
            live.par_iter_mut().for_each(eliminate);
        } else {
            live.iter_mut().for_each(eliminate);
        }
        let mut i = 0;
        while i < live.len() {
            if live[i].col.entries.is_empty() {
                let l = live.swap_remove(i);
                if l.track.iter().any(|&x| x != 0) {
                    kernel_rows.push(l.track);
                }
            } else {
                i += 1;
            }
        }
        if v > 0 {
            let s = ring.pp(ring.e - v);
            let col = piv.col.scale(ring, s);
            let mut track = piv.track.clone();
            row_scale(ring, &mut track, s);
            if col.entries.is_empty() {
                if track.iter().any(|&x| x != 0) {
                    kernel_rows.push(track);
                }
            } else {
                let cache = col.min_val_entry(ring);
                live.push(Live { col, track, cache });
            }
        }
    }
    kernel_rows.sort();
    Mat::from_rows(ring, n_cols, kernel_rows)
}

/// Right kernel of a dense matrix.
pub fn kernel(a: &Mat) -> Mat {
    let cols = (0..a.cols)
        .map(|c| SparseCol::from_dense(&a.col(c)))
        .collect();
    kernel_sparse(a.ring, cols, a.cols)
}

/// Smith form over Z/p^e: diagonal entries (p-powers, ascending valuation,
/// nonzero) plus the tracked column transform V and its inverse, so that for
/// some invertible row transform U, U * A * V is the diagonal. Slots past
/// `diag.len()` are zero columns of the transformed matrix.
pub struct Smith {
    pub diag: Vec<u64>,
    pub v: Mat,
    pub vinv: Mat,
    /// transformed matrix, for verification: rowspan(b) == rowspan(a * v)
    pub b: Mat,
}

pub fn smith(a: &Mat) -> Smith {
    let ring = a.ring;
    let (r, s) = (a.rows, a.cols);
    let mut b = a.clone();
    let mut v = Mat::identity(ring, s);
    let mut vinv = Mat::identity(ring, s);
    let mut diag = Vec::new();

    let col_swap = |m: &mut Mat, c1: usize, c2: usize| {
        for row in 0..m.rows {
            m.data.swap(row * m.cols + c1, row * m.cols + c2);
        }
    };
    let row_swap = |m: &mut Mat, r1: usize, r2: usize| {
        for c in 0..m.cols {
            m.data.swap(r1 * m.cols + c, r2 * m.cols + c);
        }
    };

    for t in 0..r.min(s) {
        // minimal-valuation entry of the trailing submatrix
        let mut best: Option<(u32, usize, usize)> = None;
        for i in t..r {
            for j in t..s {
                let x = b.at(i, j);
                if x != 0 {
                    let cand = (ring.val(x), i, j);
                    if best.map_or(true, |bv| cand < bv) {
                        best = Some(cand);
                    }
                }
            }
        }
        let Some((pv, pi, pj)) = best else { break };
        if pi != t {
            row_swap(&mut b, pi, t);
        }
        if pj != t {
            col_swap(&mut b, pj, t);
            col_swap(&mut v, pj, t);
            row_swap(&mut vinv, pj, t);
        }
        let u = ring.inv(b.at(t, t) / ring.pp(pv));
        if u != 1 {
            row_scale(ring, &mut b.data[t * s..(t + 1) * s], u);
        }
        debug_assert_eq!(b.at(t, t), ring.pp(pv));
        // clear column below
        for i in t + 1..r {
            let x = b.at(i, t);
            if x != 0 {
                let q = ring.div_pow(x, pv);
                let (head, tail) = b.data.split_at_mut(i * s);
                row_sub_scaled(ring, &mut tail[..s], &head[t * s..(t + 1) * s], q);
            }
        }
        // clear row to the right (tracked column ops)
        for j in t + 1..s {
            let x = b.at(t, j);
            if x != 0 {
                let q = ring.div_pow(x, pv);
                for row in 0..r {
                    let cur = b.at(row, j);
                    let nv = ring.sub(cur, q * b.at(row, t) % ring.m);
                    b.data[row * s + j] = nv;
                }
                for row in 0..s {
                    let cur = v.at(row, j);
                    let nv = ring.sub(cur, q * v.at(row, t) % ring.m);
                    v.data[row * s + j] = nv;
                }
                // vinv row t += q * vinv row j
                let (lo, hi) = if t < j {
                    let (a1, a2) = vinv.data.split_at_mut(j * s);
                    (&mut a1[t * s..(t + 1) * s], &a2[..s])
                } else {
                    unreachable!()
                };
                for (d, &src) in lo.iter_mut().zip(hi.iter()) {
                    *d = (*d + q * src) % ring.m;
                }
            }
        }
        diag.push(b.at(t, t));
    }
    Smith { diag, v, vinv, b }
}
