//! Canonical presentations of subquotients K/B of (Z/p^e)^n and of
//! homomorphisms between finite abelian p-groups.
//!
//! `Subquotient` turns a pair of spanning sets B <= K <= R^n into coordinates
//! on a direct sum of cyclic groups: Smith-diagonalizing the relation lattice
//! of K modulo B yields invariant factors p^w and a change of basis, after
//! which every class has one canonical coordinate vector. Cohomology groups,
//! stable-element subgroups, and biset-idempotent images are all read off
//! through this one code path.
//!
//! `QMap` is a homomorphism between two such groups, stored as an integer
//! matrix with entry (i,j) reduced mod the i-th codomain order. Kernels and
//! images are computed exactly by lifting to Z/p^E for E the largest exponent
//! in sight, which turns the per-row congruences into a single-ring problem.

use crate::error::{Error, Result};
use crate::zpe::{howell, howell_with_transform, in_rowspan, kernel, reduce_mod_howell, smith, Mat, Zpe};

/// K/B for subgroups B <= K <= R^n, R = Z/p^e, with canonical coordinates on
/// a direct sum of cyclic p-groups.
#[derive(Clone)]
pub struct Subquotient {
    pub ring: Zpe,
    pub ambient: usize,
    /// Howell basis of K; class reps are row combinations of this.
    pub basis: Mat,
    v: Mat,
    vinv: Mat,
    /// indices (into basis-coordinate slots after the Smith change of basis)
    /// of the nontrivial cyclic factors
    kept: Vec<usize>,
    /// orders of the nontrivial cyclic factors, ascending
    pub orders: Vec<u64>,
}

impl Subquotient {
    pub fn new(ring: Zpe, ambient: usize, k_gens: &Mat, b_gens: &Mat) -> Result<Self> {
        assert_eq!(k_gens.cols, ambient);
        assert_eq!(b_gens.cols, ambient);
        let basis = howell(k_gens);
        for r in 0..b_gens.rows {
            if !in_rowspan(&basis, b_gens.row(r)) {
                return Err(Error::NotSubgroup(
                    format!("relation row {r}"),
                    "spanned subgroup".into(),
                ));
            }
        }
        let k = basis.rows;
        if k == 0 {
            return Ok(Subquotient {
                ring,
                ambient,
                basis,
                v: Mat::identity(ring, 0),
                vinv: Mat::identity(ring, 0),
                kept: vec![],
                orders: vec![],
            });
        }
        // relations: coefficient vectors c with c * basis inside span(b_gens),
        // read off the left kernel of [basis; howell(b)] stacked.
        let bh = howell(b_gens);
        let stacked = basis.vcat(&bh);
        let lk = howell_with_transform(&stacked).lkernel;
        let rel = Mat::from_rows(
            ring,
            k,
            (0..lk.rows).map(|r| lk.row(r)[..k].to_vec()).collect(),
        );
        let sm = smith(&rel);
        let mut kept = Vec::new();
        let mut orders = Vec::new();
        for t in 0..k {
            let ord = if t < sm.diag.len() {
                sm.diag[t] // p^w: factor is R/(p^w)
            } else {
                ring.m // free slot: full cyclic R
            };
            if ord != 1 {
                kept.push(t);
                orders.push(ord);
            }
        }
        Ok(Subquotient { ring, ambient, basis, v: sm.v, vinv: sm.vinv, kept, orders })
    }

    /// The trivial group on a given ambient space.
    pub fn trivial(ring: Zpe, ambient: usize) -> Self {
        Subquotient::new(ring, ambient, &Mat::zero(ring, 0, ambient), &Mat::zero(ring, 0, ambient))
            .expect("trivial subquotient")
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> u128 {
        self.orders.iter().map(|&o| o as u128).product()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        in_rowspan(&self.basis, x)
    }

    /// Canonical coordinates of the class of `x` (which must lie in K).
    pub fn coords(&self, x: &[u64]) -> Result<Vec<u64>> {
        let (c, residue) = reduce_mod_howell(&self.basis, x);
        if residue.iter().any(|&v| v != 0) {
            return Err(Error::NotSubgroup("element".into(), "spanned subgroup".into()));
        }
        let ring = self.ring;
        let k = self.basis.rows;
        let mut y = vec![0u64; k];
        for (i, &ci) in c.iter().enumerate() {
            if ci != 0 {
                for (yj, &vij) in y.iter_mut().zip(self.v.row(i)) {
                    *yj = (*yj + ci * vij) % ring.m;
                }
            }
        }
        Ok(self
            .kept
            .iter()
            .zip(&self.orders)
            .map(|(&t, &ord)| y[t] % ord)
            .collect())
    }

    /// A representative in R^n of the class with the given coordinates.
    pub fn rep(&self, coords: &[u64]) -> Vec<u64> {
        assert_eq!(coords.len(), self.orders.len());
        let ring = self.ring;
        let k = self.basis.rows;
        let mut y = vec![0u64; k];
        for ((&t, &ord), &c) in self.kept.iter().zip(&self.orders).zip(coords) {
            y[t] = c % ord;
        }
        let mut cvec = vec![0u64; k];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0 {
                for (cj, &wij) in cvec.iter_mut().zip(self.vinv.row(i)) {
                    *cj = (*cj + yi * wij) % ring.m;
                }
            }
        }
        let mut x = vec![0u64; self.ambient];
        for (i, &ci) in cvec.iter().enumerate() {
            if ci != 0 {
                for (xj, &bij) in x.iter_mut().zip(self.basis.row(i)) {
                    *xj = (*xj + ci * bij) % ring.m;
                }
            }
        }
        x
    }

    pub fn is_zero_class(&self, x: &[u64]) -> Result<bool> {
        Ok(self.coords(x)?.iter().all(|&c| c == 0))
    }
}

/// Homomorphism between finite abelian p-groups given by order vectors
/// (each order a power of p, > 1). Entry (i,j) is the i-th coordinate of the
/// image of the j-th domain generator, reduced mod `cod_ords[i]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMap {
    pub p: u64,
    pub dom_ords: Vec<u64>,
    pub cod_ords: Vec<u64>,
    /// row-major, rows = cod rank, cols = dom rank
    pub entries: Vec<u64>,
}

fn log_p(p: u64, mut x: u64) -> u32 {
    let mut w = 0;
    while x > 1 {
        debug_assert_eq!(x % p, 0);
        x /= p;
        w += 1;
    }
    w
}

impl QMap {
    pub fn new(p: u64, dom_ords: Vec<u64>, cod_ords: Vec<u64>, entries: Vec<u64>) -> Result<Self> {
        let (r, c) = (cod_ords.len(), dom_ords.len());
        if entries.len() != r * c {
            return Err(Error::InvalidInput("QMap entry count mismatch".into()));
        }
        let entries: Vec<u64> = entries
            .iter()
            .enumerate()
            .map(|(idx, &x)| x % cod_ords[idx / c.max(1)])
            .collect();
        // well-definedness: dom order annihilates the image of each generator
        for i in 0..r {
            for j in 0..c {
                let v = dom_ords[j] as u128 * entries[i * c + j] as u128;
                if v % cod_ords[i] as u128 != 0 {
                    return Err(Error::InvalidInput(format!(
                        "QMap not well-defined at entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(QMap { p, dom_ords, cod_ords, entries })
    }

    pub fn identity(p: u64, ords: Vec<u64>) -> Self {
        let n = ords.len();
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        QMap { p, dom_ords: ords.clone(), cod_ords: ords, entries }
    }

    pub fn zero(p: u64, dom_ords: Vec<u64>, cod_ords: Vec<u64>) -> Self {
        let entries = vec![0u64; dom_ords.len() * cod_ords.len()];
        QMap { p, dom_ords, cod_ords, entries }
    }

    pub fn at(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.dom_ords.len() + j]
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.dom_ords.len());
        let c = self.dom_ords.len();
        self.cod_ords
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let mut acc = 0u64;
                for (j, &xj) in x.iter().enumerate() {
                    acc = (acc + self.entries[i * c + j] * (xj % self.dom_ords[j])) % b;
                }
                acc
            })
            .collect()
    }

    /// self after other (self must accept other's codomain).
    pub fn compose(&self, other: &QMap) -> QMap {
        assert_eq!(self.dom_ords, other.cod_ords, "QMap composition mismatch");
        let (r, mid, c) = (self.cod_ords.len(), self.dom_ords.len(), other.dom_ords.len());
        let mut entries = vec![0u64; r * c];
        for i in 0..r {
            let b = self.cod_ords[i];
            for k in 0..c {
                let mut acc = 0u64;
                for j in 0..mid {
                    acc = (acc + self.entries[i * mid + j] * other.entries[j * c + k]) % b;
                }
                entries[i * c + k] = acc;
            }
        }
        QMap { p: self.p, dom_ords: other.dom_ords.clone(), cod_ords: self.cod_ords.clone(), entries }
    }

    pub fn add(&self, other: &QMap) -> QMap {
        assert_eq!(self.dom_ords, other.dom_ords);
        assert_eq!(self.cod_ords, other.cod_ords);
        let c = self.dom_ords.len();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .enumerate()
            .map(|(idx, (&a, &b))| (a + b) % self.cod_ords[idx / c.max(1)])
            .collect();
        QMap { p: self.p, dom_ords: self.dom_ords.clone(), cod_ords: self.cod_ords.clone(), entries }
    }

    pub fn sub(&self, other: &QMap) -> QMap {
        assert_eq!(self.dom_ords, other.dom_ords);
        assert_eq!(self.cod_ords, other.cod_ords);
        let c = self.dom_ords.len();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .enumerate()
            .map(|(idx, (&a, &b))| {
                let m = self.cod_ords[idx / c.max(1)];
                (a + m - b % m) % m
            })
            .collect();
        QMap { p: self.p, dom_ords: self.dom_ords.clone(), cod_ords: self.cod_ords.clone(), entries }
    }

    pub fn scale(&self, s: u64) -> QMap {
        let c = self.dom_ords.len();
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(idx, &a)| a * (s % self.cod_ords[idx / c.max(1)]) % self.cod_ords[idx / c.max(1)])
            .collect();
        QMap { p: self.p, dom_ords: self.dom_ords.clone(), cod_ords: self.cod_ords.clone(), entries }
    }

    /// Endomorphism power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> QMap {
        assert_eq!(self.dom_ords, self.cod_ords, "pow needs an endomorphism");
        let mut result = QMap::identity(self.p, self.dom_ords.clone());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            n >>= 1;
        }
        result
    }

    /// Stack maps with a common domain into one map to the direct sum.
    pub fn vstack(maps: &[QMap]) -> QMap {
        assert!(!maps.is_empty());
        let dom = maps[0].dom_ords.clone();
        let p = maps[0].p;
        let mut cod = Vec::new();
        let mut entries = Vec::new();
        for m in maps {
            assert_eq!(m.dom_ords, dom);
            cod.extend_from_slice(&m.cod_ords);
            entries.extend_from_slice(&m.entries);
        }
        QMap { p, dom_ords: dom, cod_ords: cod, entries }
    }

    fn lift_exponent(&self) -> u32 {
        self.dom_ords
            .iter()
            .chain(&self.cod_ords)
            .map(|&o| log_p(self.p, o))
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Generators of the kernel, as domain coordinate vectors. Computed over
    /// Z/p^E with each row scaled by p^(E - log_p cod_ord) so the per-row
    /// congruences become a single matrix kernel.
    pub fn kernel_gens(&self) -> Vec<Vec<u64>> {
        let e = self.lift_exponent();
        let ring = Zpe::new(self.p, e).expect("lift ring");
        let (r, c) = (self.cod_ords.len(), self.dom_ords.len());
        let mut lifted = Mat::zero(ring, r, c);
        for i in 0..r {
            let scale = ring.pp(e - log_p(self.p, self.cod_ords[i]));
            for j in 0..c {
                lifted.set(i, j, self.entries[i * c + j] * scale % ring.m);
            }
        }
        let k = kernel(&lifted);
        let mut out: Vec<Vec<u64>> = Vec::new();
        for row in 0..k.rows {
            let v: Vec<u64> = k
                .row(row)
                .iter()
                .zip(&self.dom_ords)
                .map(|(&x, &o)| x % o)
                .collect();
            if v.iter().any(|&x| x != 0) {
                out.push(v);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn is_injective(&self) -> bool {
        self.kernel_gens().is_empty()
    }

    pub fn image_form(&self) -> SubgroupForm {
        let c = self.dom_ords.len();
        let cols: Vec<Vec<u64>> = (0..c)
            .map(|j| (0..self.cod_ords.len()).map(|i| self.entries[i * c + j]).collect())
            .collect();
        SubgroupForm::new(self.p, &self.cod_ords, &cols)
    }

    pub fn kernel_form(&self) -> SubgroupForm {
        SubgroupForm::new(self.p, &self.dom_ords, &self.kernel_gens())
    }

    pub fn is_surjective(&self) -> bool {
        self.image_form().is_full()
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }

    pub fn is_identity(&self) -> bool {
        self.dom_ords == self.cod_ords && *self == QMap::identity(self.p, self.dom_ords.clone())
    }
}

/// Canonical form of a subgroup of a direct sum of cyclic p-groups: the
/// Howell basis over Z/p^E of the generators together with the relation rows
/// p^(order exponent) * e_i. Two generating sets of the same subgroup give
/// identical forms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubgroupForm {
    pub ring: Zpe,
    pub ambient_ords: Vec<u64>,
    pub h: Mat,
}

impl SubgroupForm {
    pub fn new(p: u64, ambient_ords: &[u64], gens: &[Vec<u64>]) -> Self {
        let e = ambient_ords
            .iter()
            .map(|&o| log_p(p, o))
            .max()
            .unwrap_or(1)
            .max(1);
        let ring = Zpe::new(p, e).expect("lift ring");
        let n = ambient_ords.len();
        let mut rows: Vec<Vec<u64>> = gens
            .iter()
            .map(|g| g.iter().zip(ambient_ords).map(|(&x, &o)| x % o).collect())
            .collect();
        for (i, &o) in ambient_ords.iter().enumerate() {
            let mut r = vec![0u64; n];
            r[i] = ring.pp(log_p(p, o)) % ring.m;
            rows.push(r);
        }
        let h = howell(&Mat::from_rows(ring, n, rows));
        SubgroupForm { ring, ambient_ords: ambient_ords.to_vec(), h }
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        let v: Vec<u64> = x.iter().zip(&self.ambient_ords).map(|(&a, &o)| a % o).collect();
        in_rowspan(&self.h, &v)
    }

    pub fn is_full(&self) -> bool {
        self.h == Mat::identity(self.ring, self.ambient_ords.len())
    }

    /// Order of the subgroup: |span| / |relation span|.
    pub fn order(&self) -> u128 {
        let ring = self.ring;
        let mut span: u128 = 1;
        for r in 0..self.h.rows {
            let piv = self.h.row(r).iter().find(|&&x| x != 0).unwrap();
            span *= ring.m as u128 / *piv as u128; // p^(e - val)
        }
        let rel: u128 = self
            .ambient_ords
            .iter()
            .map(|&o| ring.m as u128 / o as u128)
            .product();
        span / rel
    }

    /// Invariant factors of the subgroup as an abstract abelian group.
    pub fn invariants(&self) -> Vec<u64> {
        let ring = self.ring;
        let n = self.ambient_ords.len();
        let rel_rows: Vec<Vec<u64>> = (0..n)
            .map(|i| {
                let mut r = vec![0u64; n];
                r[i] = ring.pp(log_p(ring.p, self.ambient_ords[i])) % ring.m;
                r
            })
            .collect();
        let k_rows: Vec<Vec<u64>> = (0..self.h.rows)
            .map(|r| self.h.row(r).to_vec())
            .chain(rel_rows.iter().cloned())
            .collect();
        let sq = Subquotient::new(
            ring,
            n,
            &Mat::from_rows(ring, n, k_rows),
            &Mat::from_rows(ring, n, rel_rows),
        )
        .expect("subgroup invariants");
        sq.orders
    }
}
