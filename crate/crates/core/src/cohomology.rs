//! Group cohomology with coefficients in a finite abelian p-group, computed
//! from the inhomogeneous (bar) cochain complex, plus the cochain-level maps
//! everything downstream is built from: restriction, transfer along coset
//! representatives, pullback along a group isomorphism twisted by a
//! compatible coefficient matrix, coefficient maps, and the connecting map of
//! a short exact coefficient sequence.
//!
//! A degree-k cochain is a function on k-tuples, stored as one dense vector
//! of length (alphabet size)^k * rank with the tuple index little-endian in
//! the first slot. The `Normalized` flavor draws tuples from non-identity
//! elements and drops differential faces whose merged entry collapses to the
//! identity (cochains extend by zero on degenerate tuples); `Full` keeps
//! everything and exists to cross-check the normalized complex. Cohomology
//! groups come out as `Subquotient`s, so classes have canonical coordinates,
//! and maps on cohomology are `QMap`s produced by `induced_map`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup};
use crate::quotient::{QMap, SubgroupForm, Subquotient};
use crate::zpe::{inverse, kernel_sparse, Mat, Solver, SparseCol, Zpe};

/// Largest degree `cohomology` accepts.
pub const DEGREE_CAP: usize = 4;
/// Cap on the matrix entries a single cohomology computation may allocate
/// (kernel track vectors dominate, at dim^2 entries).
pub const ENTRY_BUDGET: usize = 1 << 27;

/// (Z/p^e)^rank with an action of a subgroup: one invertible matrix per
/// element, multiplicative in the element.
#[derive(Clone)]
pub struct CoefModule {
    pub ring: Zpe,
    pub rank: usize,
    acts: BTreeMap<u32, Mat>,
}

impl CoefModule {
    pub fn trivial(ring: Zpe, rank: usize, sub: &Subgroup) -> Self {
        let acts = sub
            .elems
            .iter()
            .map(|&g| (g, Mat::identity(ring, rank)))
            .collect();
        CoefModule { ring, rank, acts }
    }

    /// Extend an action given on generators multiplicatively over the whole
    /// subgroup. Fails if the generators do not generate `sub` or if any
    /// extension is inconsistent (the assignment is not a homomorphism).
    pub fn from_generators(
        group: &FiniteGroup,
        sub: &Subgroup,
        ring: Zpe,
        rank: usize,
        gens: &[(u32, Mat)],
    ) -> Result<Self> {
        for (g, m) in gens {
            if !sub.contains(*g) {
                return Err(Error::InvalidInput(format!(
                    "action generator {g} lies outside the subgroup"
                )));
            }
            if m.rows != rank || m.cols != rank || m.ring != ring {
                return Err(Error::InvalidInput("action matrix shape mismatch".into()));
            }
        }
        let mut acts: BTreeMap<u32, Mat> = BTreeMap::new();
        acts.insert(0, Mat::identity(ring, rank));
        let mut queue = vec![0u32];
        while let Some(x) = queue.pop() {
            let ax = acts[&x].clone();
            for (g, m) in gens {
                let y = group.mul_idx(*g, x);
                let ay = m.mul(&ax);
                match acts.get(&y) {
                    Some(prev) => {
                        if *prev != ay {
                            return Err(Error::InvalidInput(format!(
                                "action assignment is inconsistent at element {y}"
                            )));
                        }
                    }
                    None => {
                        acts.insert(y, ay);
                        queue.push(y);
                    }
                }
            }
        }
        if acts.len() != sub.order() {
            return Err(Error::InvalidInput(
                "action generators do not generate the subgroup".into(),
            ));
        }
        Self::from_assignment(group, sub, ring, rank, acts)
    }

    /// Full element-to-matrix assignment, validated as a homomorphism on
    /// every pair. Invertibility is implied (each element has finite order).
    pub fn from_assignment(
        group: &FiniteGroup,
        sub: &Subgroup,
        ring: Zpe,
        rank: usize,
        acts: BTreeMap<u32, Mat>,
    ) -> Result<Self> {
        for &g in &sub.elems {
            let m = acts
                .get(&g)
                .ok_or_else(|| Error::InvalidInput(format!("no action matrix for element {g}")))?;
            if m.rows != rank || m.cols != rank || m.ring != ring {
                return Err(Error::InvalidInput("action matrix shape mismatch".into()));
            }
        }
        if acts.len() != sub.order() {
            return Err(Error::InvalidInput("action assigns matrices outside the subgroup".into()));
        }
        for &x in &sub.elems {
            for &y in &sub.elems {
                let xy = group.mul_idx(x, y);
                if acts[&xy] != acts[&x].mul(&acts[&y]) {
                    return Err(Error::InvalidInput(format!(
                        "action is not a homomorphism at pair ({x},{y})"
                    )));
                }
            }
        }
        Ok(CoefModule { ring, rank, acts })
    }

    pub fn act(&self, g: u32) -> &Mat {
        &self.acts[&g]
    }

    /// The same coefficients viewed over a smaller subgroup.
    pub fn restrict(&self, sub: &Subgroup) -> CoefModule {
        let acts = sub.elems.iter().map(|&g| (g, self.acts[&g].clone())).collect();
        CoefModule { ring: self.ring, rank: self.rank, acts }
    }

    pub fn is_trivial(&self) -> bool {
        let id = Mat::identity(self.ring, self.rank);
        self.acts.values().all(|m| *m == id)
    }
}

/// Tuple alphabet of the cochain complex.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Flavor {
    /// non-identity tuples; faces that merge to the identity are dropped
    Normalized,
    /// tuples over the whole subgroup
    Full,
}

/// Inhomogeneous cochain complex of a subgroup with coefficients in a
/// `CoefModule`. Degree-k cochains are dense vectors indexed by
/// (tuple index) * rank + coordinate.
pub struct BarComplex<'g> {
    pub group: &'g FiniteGroup,
    pub sub: Subgroup,
    pub module: CoefModule,
    pub flavor: Flavor,
    alphabet: Vec<u32>,
    alpha_pos: Vec<u32>,
}

impl<'g> BarComplex<'g> {
    pub fn new(group: &'g FiniteGroup, sub: Subgroup, module: CoefModule, flavor: Flavor) -> Self {
        assert!(
            sub.elems.iter().all(|g| module.acts.contains_key(g)),
            "module does not act on the whole subgroup"
        );
        let alphabet: Vec<u32> = match flavor {
            Flavor::Normalized => sub.elems[1..].to_vec(),
            Flavor::Full => sub.elems.clone(),
        };
        let mut alpha_pos = vec![u32::MAX; group.order()];
        for (i, &g) in alphabet.iter().enumerate() {
            alpha_pos[g as usize] = i as u32;
        }
        BarComplex { group, sub, module, flavor, alphabet, alpha_pos }
    }

    pub fn alphabet_len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn n_tuples(&self, k: usize) -> usize {
        self.alphabet.len().pow(k as u32)
    }

    /// Coordinates of C^k.
    pub fn dim(&self, k: usize) -> usize {
        self.n_tuples(k) * self.module.rank
    }

    pub fn tuple_at(&self, k: usize, mut index: usize) -> Vec<u32> {
        let l = self.alphabet.len();
        (0..k)
            .map(|_| {
                let d = index % l;
                index /= l;
                self.alphabet[d]
            })
            .collect()
    }

    pub fn tuple_index(&self, tuple: &[u32]) -> usize {
        let l = self.alphabet.len();
        tuple.iter().rev().fold(0usize, |acc, &g| {
            let pos = self.alpha_pos[g as usize];
            debug_assert_ne!(pos, u32::MAX, "element {g} outside the tuple alphabet");
            acc * l + pos as usize
        })
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > DEGREE_CAP {
            return Err(Error::DegreeOutOfRange { degree: k, max: DEGREE_CAP });
        }
        let l = self.alphabet.len() as u128;
        let r = self.module.rank as u128;
        let dim = |d: usize| l.pow(d as u32) * r;
        let dim_km1 = if k == 0 { 0 } else { dim(k - 1) };
        budget_check(k, dim_km1, dim(k), dim(k + 1) * (r + k as u128 + 1))
    }

    /// Columns of the degree-k differential C^k -> C^(k+1): column
    /// (tuple, coordinate) is the image of that basis cochain, entries
    /// indexed by C^(k+1) coordinates.
    pub fn differential_cols(&self, k: usize) -> Vec<SparseCol> {
        let rank = self.module.rank;
        let ring = self.module.ring;
        let n_rows = self.n_tuples(k + 1);
        assert!(n_rows * rank < u32::MAX as usize, "differential exceeds index range");
        let neg1 = ring.m - 1;
        let triples: Vec<(u32, u32, u64)> = (0..n_rows)
            .into_par_iter()
            .flat_map_iter(|sigma| {
                let tup = self.tuple_at(k + 1, sigma);
                let mut out = Vec::with_capacity(rank * rank + (k + 2) * rank);
                // first face: act(g_1) applied to the value at (g_2..g_{k+1})
                let t0 = self.tuple_index(&tup[1..]);
                let a = self.module.act(tup[0]);
                for m in 0..rank {
                    for i in 0..rank {
                        let v = a.at(i, m);
                        if v != 0 {
                            out.push(((t0 * rank + m) as u32, (sigma * rank + i) as u32, v));
                        }
                    }
                }
                // inner faces: merge an adjacent pair, alternating sign
                for i in 1..=k {
                    let prod = self.group.mul_idx(tup[i - 1], tup[i]);
                    if prod == 0 && self.flavor == Flavor::Normalized {
                        continue;
                    }
                    let mut mt = Vec::with_capacity(k);
                    mt.extend_from_slice(&tup[..i - 1]);
                    mt.push(prod);
                    mt.extend_from_slice(&tup[i + 1..]);
                    let ti = self.tuple_index(&mt);
                    let val = if i % 2 == 1 { neg1 } else { 1 };
                    for m in 0..rank {
                        out.push(((ti * rank + m) as u32, (sigma * rank + m) as u32, val));
                    }
                }
                // last face: drop g_{k+1}
                let tl = self.tuple_index(&tup[..k]);
                let val = if (k + 1) % 2 == 1 { neg1 } else { 1 };
                for m in 0..rank {
                    out.push(((tl * rank + m) as u32, (sigma * rank + m) as u32, val));
                }
                out.into_iter()
            })
            .collect();
        cols_from_triples(ring, self.dim(k), triples)
    }

    /// Evaluate the differential on one cochain.
    pub fn apply_d(&self, k: usize, f: &[u64]) -> Vec<u64> {
        assert_eq!(f.len(), self.dim(k));
        let rank = self.module.rank;
        let ring = self.module.ring;
        let n_rows = self.n_tuples(k + 1);
        (0..n_rows)
            .into_par_iter()
            .flat_map_iter(|sigma| {
                let tup = self.tuple_at(k + 1, sigma);
                let t0 = self.tuple_index(&tup[1..]);
                let mut acc = self.module.act(tup[0]).apply(&f[t0 * rank..(t0 + 1) * rank]);
                for i in 1..=k {
                    let prod = self.group.mul_idx(tup[i - 1], tup[i]);
                    if prod == 0 && self.flavor == Flavor::Normalized {
                        continue;
                    }
                    let mut mt = Vec::with_capacity(k);
                    mt.extend_from_slice(&tup[..i - 1]);
                    mt.push(prod);
                    mt.extend_from_slice(&tup[i + 1..]);
                    let ti = self.tuple_index(&mt);
                    for m in 0..rank {
                        let v = f[ti * rank + m];
                        acc[m] = if i % 2 == 1 { ring.sub(acc[m], v) } else { ring.add(acc[m], v) };
                    }
                }
                let tl = self.tuple_index(&tup[..k]);
                for m in 0..rank {
                    let v = f[tl * rank + m];
                    acc[m] = if (k + 1) % 2 == 1 { ring.sub(acc[m], v) } else { ring.add(acc[m], v) };
                }
                acc.into_iter()
            })
            .collect()
    }

    /// H^k as a canonical subquotient of C^k: kernel of d^k over the image
    /// of d^(k-1).
    pub fn cohomology(&self, k: usize) -> Result<Subquotient> {
        self.check_degree(k)?;
        let ring = self.module.ring;
        let dim_k = self.dim(k);
        let kmat = kernel_sparse(ring, self.differential_cols(k), dim_k);
        let image = if k == 0 {
            Mat::zero(ring, 0, dim_k)
        } else {
            sparse_cols_to_rows(ring, &self.differential_cols(k - 1), dim_k)
        };
        Subquotient::new(ring, dim_k, &kmat, &image)
    }
}

/// Shared budget check for cochain computations at one degree: the kernel's
/// track vectors need dim_k^2 entries, the coboundary image dim_{k-1} * dim_k,
/// and the assembled sparse differential `entry_est`.
pub(crate) fn budget_check(degree: usize, dim_km1: u128, dim_k: u128, entry_est: u128) -> Result<()> {
    let est = (dim_k * dim_k).max(dim_km1 * dim_k).max(entry_est);
    if est > ENTRY_BUDGET as u128 {
        return Err(Error::DegreeTooLarge {
            degree,
            entries: est.min(usize::MAX as u128) as usize,
            budget: ENTRY_BUDGET,
        });
    }
    Ok(())
}

/// Deterministic sparse-column assembly from (column, row, value) triples;
/// duplicate positions are summed.
pub(crate) fn cols_from_triples(
    ring: Zpe,
    n_cols: usize,
    mut triples: Vec<(u32, u32, u64)>,
) -> Vec<SparseCol> {
    triples.par_sort_unstable_by_key(|&(c, r, _)| ((c as u64) << 32) | r as u64);
    let mut cols = vec![SparseCol { entries: Vec::new() }; n_cols];
    let mut i = 0;
    while i < triples.len() {
        let (c, r, mut v) = triples[i];
        i += 1;
        while i < triples.len() && triples[i].0 == c && triples[i].1 == r {
            v = (v + triples[i].2) % ring.m;
            i += 1;
        }
        v %= ring.m;
        if v != 0 {
            cols[c as usize].entries.push((r, v));
        }
    }
    cols
}

/// Transpose sparse columns into dense rows (the coboundary image basis).
pub(crate) fn sparse_cols_to_rows(ring: Zpe, cols: &[SparseCol], row_len: usize) -> Mat {
    let mut m = Mat::zero(ring, cols.len(), row_len);
    for (i, c) in cols.iter().enumerate() {
        for &(r, v) in &c.entries {
            m.set(i, r as usize, v);
        }
    }
    m
}

fn assert_same_setup(a: &BarComplex, b: &BarComplex) {
    assert!(std::ptr::eq(a.group, b.group), "complexes over different groups");
    assert_eq!(a.flavor, b.flavor, "complexes of different flavors");
    assert_eq!(a.module.ring, b.module.ring);
    assert_eq!(a.module.rank, b.module.rank);
}

/// Restrict a degree-k cochain along small.sub <= big.sub (same coefficients).
pub fn res_cochain(big: &BarComplex, small: &BarComplex, k: usize, f: &[u64]) -> Vec<u64> {
    assert_same_setup(big, small);
    debug_assert!(small.sub.is_subset_of(&big.sub));
    debug_assert!(small.sub.elems.iter().all(|&g| small.module.act(g) == big.module.act(g)));
    let rank = big.module.rank;
    (0..small.n_tuples(k))
        .flat_map(|t| {
            let bt = big.tuple_index(&small.tuple_at(k, t));
            f[bt * rank..(bt + 1) * rank].iter().copied()
        })
        .collect()
}

/// Transfer a degree-k cochain from small.sub up to big.sub along the given
/// right-coset representatives (big.sub = disjoint union of small.sub * r).
/// The value at (y_1..y_k) is the sum over representatives r of
/// act(r^-1) f(u_1..u_k), where r_0 = r, r_j represents small.sub * r_{j-1} y_j
/// and u_j = r_{j-1} y_j r_j^-1.
pub fn transfer_cochain(
    big: &BarComplex,
    small: &BarComplex,
    reps: &[u32],
    k: usize,
    f: &[u64],
) -> Vec<u64> {
    assert_same_setup(big, small);
    debug_assert!(small.sub.is_subset_of(&big.sub));
    let g = big.group;
    let mut rep_of = vec![u32::MAX; g.order()];
    for &r in reps {
        for &x in &small.sub.elems {
            let y = g.mul_idx(x, r);
            assert_eq!(rep_of[y as usize], u32::MAX, "coset representatives overlap");
            rep_of[y as usize] = r;
        }
    }
    assert!(
        big.sub.elems.iter().all(|&y| rep_of[y as usize] != u32::MAX),
        "coset representatives do not cover the big subgroup"
    );
    let rank = big.module.rank;
    let ring = big.module.ring;
    (0..big.n_tuples(k))
        .into_par_iter()
        .flat_map_iter(|t| {
            let tup = big.tuple_at(k, t);
            let mut acc = vec![0u64; rank];
            'reps: for &r0 in reps {
                let mut rj = r0;
                let mut u = Vec::with_capacity(k);
                for &y in &tup {
                    let z = g.mul_idx(rj, y);
                    let rn = rep_of[z as usize];
                    let uj = g.mul_idx(z, g.inv_idx(rn));
                    debug_assert!(small.sub.contains(uj));
                    if uj == 0 && small.flavor == Flavor::Normalized {
                        continue 'reps; // value on a degenerate tuple is zero
                    }
                    u.push(uj);
                    rj = rn;
                }
                let ti = small.tuple_index(&u);
                let part = big.module.act(g.inv_idx(r0)).apply(&f[ti * rank..(ti + 1) * rank]);
                for (a, v) in acc.iter_mut().zip(part) {
                    *a = ring.add(*a, v);
                }
            }
            acc.into_iter()
        })
        .collect()
}

/// Pull a degree-k cochain back along a group isomorphism phi: dst.sub ->
/// src.sub (given as the image of each dst element in sorted order) together
/// with a coefficient matrix `a` satisfying act_src(phi x) * a = a * act_dst(x):
/// value at (x_1..x_k) is a^-1 f(phi x_1 .. phi x_k).
pub fn twisted_cochain(
    src: &BarComplex,
    dst: &BarComplex,
    phi: &[u32],
    a: &Mat,
    k: usize,
    f: &[u64],
) -> Result<Vec<u64>> {
    assert!(std::ptr::eq(src.group, dst.group));
    assert_eq!(src.flavor, dst.flavor);
    assert_eq!(src.module.ring, dst.module.ring);
    assert_eq!(src.module.rank, dst.module.rank);
    let g = dst.group;
    if phi.len() != dst.sub.order() {
        return Err(Error::InvalidInput("isomorphism table length mismatch".into()));
    }
    let mut image = phi.to_vec();
    image.sort_unstable();
    if image != src.sub.elems {
        return Err(Error::InvalidInput("table is not a bijection onto the target subgroup".into()));
    }
    let pos = |x: u32| dst.sub.elems.binary_search(&x).expect("element of dst.sub");
    for (i, &x) in dst.sub.elems.iter().enumerate() {
        for &y in &dst.sub.elems {
            let xy = g.mul_idx(x, y);
            if phi[pos(xy)] != g.mul_idx(phi[i], phi[pos(y)]) {
                return Err(Error::InvalidInput(format!(
                    "table is not a homomorphism at pair ({x},{y})"
                )));
            }
        }
    }
    for (i, &x) in dst.sub.elems.iter().enumerate() {
        if src.module.act(phi[i]).mul(a) != a.mul(dst.module.act(x)) {
            return Err(Error::EquivarianceViolated { element: x as usize });
        }
    }
    let ainv = inverse(a)
        .ok_or_else(|| Error::InvalidInput("twist matrix is not invertible".into()))?;
    let rank = dst.module.rank;
    let out = (0..dst.n_tuples(k))
        .into_par_iter()
        .flat_map_iter(|t| {
            let tup = dst.tuple_at(k, t);
            let mapped: Vec<u32> = tup.iter().map(|&x| phi[pos(x)]).collect();
            let ti = src.tuple_index(&mapped);
            ainv.apply(&f[ti * rank..(ti + 1) * rank]).into_iter()
        })
        .collect();
    Ok(out)
}

/// Apply a coefficient homomorphism tuple-wise to a degree-k cochain
/// (src and dst are complexes of the same subgroup with different modules).
pub fn map_cochain(
    src: &BarComplex,
    dst: &BarComplex,
    f_mod: &QMap,
    k: usize,
    f: &[u64],
) -> Result<Vec<u64>> {
    assert!(std::ptr::eq(src.group, dst.group));
    assert_eq!(src.flavor, dst.flavor);
    assert_eq!(src.sub, dst.sub);
    let (rm, rn) = (src.module.rank, dst.module.rank);
    if f_mod.dom_ords != vec![src.module.ring.m; rm] || f_mod.cod_ords != vec![dst.module.ring.m; rn]
    {
        return Err(Error::InvalidInput("coefficient map orders mismatch".into()));
    }
    for &g in &src.sub.elems {
        let lhs = f_mod.compose(&mat_to_qmap(src.module.act(g)));
        let rhs = mat_to_qmap(dst.module.act(g)).compose(f_mod);
        if lhs != rhs {
            return Err(Error::EquivarianceViolated { element: g as usize });
        }
    }
    let mut out = Vec::with_capacity(src.n_tuples(k) * rn);
    for t in 0..src.n_tuples(k) {
        out.extend(f_mod.apply(&f[t * rm..(t + 1) * rm]));
    }
    Ok(out)
}

/// View a matrix over Z/p^e as a homomorphism of free modules.
pub fn mat_to_qmap(m: &Mat) -> QMap {
    QMap::new(
        m.ring.p,
        vec![m.ring.m; m.cols],
        vec![m.ring.m; m.rows],
        m.data.clone(),
    )
    .expect("free-module map is always well defined")
}

/// Matrix of a cochain-level map on cohomology: evaluate on a cocycle
/// representative of each generator of `dom`, then take canonical
/// coordinates in `cod`. Fails if a value is not a cocycle of `cod` or the
/// assignment is not well defined on the orders.
pub fn induced_map(
    p: u64,
    dom: &Subquotient,
    cod: &Subquotient,
    mut f: impl FnMut(&[u64]) -> Result<Vec<u64>>,
) -> Result<QMap> {
    let (dr, cr) = (dom.rank(), cod.rank());
    let mut entries = vec![0u64; cr * dr];
    for j in 0..dr {
        let mut coords = vec![0u64; dr];
        coords[j] = 1;
        let y = f(&dom.rep(&coords))?;
        let c = cod.coords(&y)?;
        for i in 0..cr {
            entries[i * dr + j] = c[i];
        }
    }
    QMap::new(p, dom.orders.clone(), cod.orders.clone(), entries)
}

pub fn res_map(
    big: &BarComplex,
    small: &BarComplex,
    k: usize,
    h_big: &Subquotient,
    h_small: &Subquotient,
) -> Result<QMap> {
    induced_map(big.module.ring.p, h_big, h_small, |f| Ok(res_cochain(big, small, k, f)))
}

pub fn transfer_map(
    big: &BarComplex,
    small: &BarComplex,
    reps: &[u32],
    k: usize,
    h_small: &Subquotient,
    h_big: &Subquotient,
) -> Result<QMap> {
    induced_map(big.module.ring.p, h_small, h_big, |f| {
        Ok(transfer_cochain(big, small, reps, k, f))
    })
}

pub fn twisted_map(
    src: &BarComplex,
    dst: &BarComplex,
    phi: &[u32],
    a: &Mat,
    k: usize,
    h_src: &Subquotient,
    h_dst: &Subquotient,
) -> Result<QMap> {
    induced_map(src.module.ring.p, h_src, h_dst, |f| twisted_cochain(src, dst, phi, a, k, f))
}

pub fn module_map(
    src: &BarComplex,
    dst: &BarComplex,
    f_mod: &QMap,
    k: usize,
    h_src: &Subquotient,
    h_dst: &Subquotient,
) -> Result<QMap> {
    induced_map(src.module.ring.p, h_src, h_dst, |f| map_cochain(src, dst, f_mod, k, f))
}

/// Short exact sequence of coefficient modules over one subgroup, with
/// equivariant maps. Validated on construction; provides the connecting map.
pub struct SesModules {
    pub sub: Subgroup,
    pub subm: CoefModule,
    pub midm: CoefModule,
    pub quom: CoefModule,
    pub inj: QMap,
    pub surj: QMap,
}

impl SesModules {
    pub fn new(
        sub: &Subgroup,
        subm: CoefModule,
        midm: CoefModule,
        quom: CoefModule,
        inj: QMap,
        surj: QMap,
    ) -> Result<Self> {
        if subm.ring.p != midm.ring.p || midm.ring.p != quom.ring.p {
            return Err(Error::InvalidInput("mixed primes in exact sequence".into()));
        }
        if inj.dom_ords != vec![subm.ring.m; subm.rank]
            || inj.cod_ords != vec![midm.ring.m; midm.rank]
            || surj.dom_ords != vec![midm.ring.m; midm.rank]
            || surj.cod_ords != vec![quom.ring.m; quom.rank]
        {
            return Err(Error::InvalidInput("exact-sequence map orders mismatch".into()));
        }
        if !inj.is_injective() {
            return Err(Error::NotExact("kernel of the injection is nonzero".into()));
        }
        if !surj.is_surjective() {
            return Err(Error::NotExact("the surjection does not cover the quotient".into()));
        }
        let zero = QMap::zero(inj.p, inj.dom_ords.clone(), surj.cod_ords.clone());
        if surj.compose(&inj) != zero {
            return Err(Error::NotExact("composite of the two maps is nonzero".into()));
        }
        if surj.kernel_form() != inj.image_form() {
            return Err(Error::NotExact("kernel of the surjection differs from the image".into()));
        }
        for &g in &sub.elems {
            if inj.compose(&mat_to_qmap(subm.act(g))) != mat_to_qmap(midm.act(g)).compose(&inj) {
                return Err(Error::EquivarianceViolated { element: g as usize });
            }
            if surj.compose(&mat_to_qmap(midm.act(g))) != mat_to_qmap(quom.act(g)).compose(&surj) {
                return Err(Error::EquivarianceViolated { element: g as usize });
            }
        }
        Ok(SesModules { sub: sub.clone(), subm, midm, quom, inj, surj })
    }

    /// Per-generator set-theoretic lifts of the quotient's basis through the
    /// surjection, found by solving over the middle ring with scaled rows.
    pub fn sections(&self) -> Vec<Vec<u64>> {
        let ring = self.midm.ring;
        let shift = ring.e - self.quom.ring.e;
        let mut smat = Mat::zero(ring, self.quom.rank, self.midm.rank);
        for i in 0..self.quom.rank {
            for j in 0..self.midm.rank {
                smat.set(i, j, self.surj.at(i, j) * ring.pp(shift) % ring.m);
            }
        }
        let solver = Solver::new(&smat);
        (0..self.quom.rank)
            .map(|j| {
                let mut b = vec![0u64; self.quom.rank];
                b[j] = ring.pp(shift);
                solver.solve(&b).expect("surjectivity was validated")
            })
            .collect()
    }

    /// Connecting map on cochains: lift a quotient cocycle through the
    /// surjection, apply the middle differential, pull back through the
    /// injection. The result is a degree-(k+1) cochain of the sub module.
    pub fn connecting_cochain(
        &self,
        cl: &BarComplex,
        cm: &BarComplex,
        cn: &BarComplex,
        k: usize,
        sections: &[Vec<u64>],
        f: &[u64],
    ) -> Result<Vec<u64>> {
        assert!(cl.sub == self.sub && cm.sub == self.sub && cn.sub == self.sub);
        assert!(cl.flavor == cm.flavor && cm.flavor == cn.flavor);
        let ring_m = self.midm.ring;
        let (rl, rm, rn) = (self.subm.rank, self.midm.rank, self.quom.rank);
        // lift tuple-wise through the chosen sections
        let mut lifted = vec![0u64; cn.n_tuples(k) * rm];
        for t in 0..cn.n_tuples(k) {
            for (j, s) in sections.iter().enumerate() {
                let c = f[t * rn + j];
                if c != 0 {
                    for (dst, &sv) in lifted[t * rm..(t + 1) * rm].iter_mut().zip(s) {
                        *dst = (*dst + c * sv) % ring_m.m;
                    }
                }
            }
        }
        let df = cm.apply_d(k, &lifted);
        // pull back through the injection
        let mut imat = Mat::zero(ring_m, rm, rl);
        for i in 0..rm {
            for j in 0..rl {
                imat.set(i, j, self.inj.at(i, j));
            }
        }
        let solver = Solver::new(&imat);
        let mut out = vec![0u64; cl.n_tuples(k + 1) * rl];
        for t in 0..cl.n_tuples(k + 1) {
            let v = &df[t * rm..(t + 1) * rm];
            if self.surj.apply(v).iter().any(|&x| x != 0) {
                return Err(Error::NotExact(
                    "lifted differential leaves the kernel of the surjection".into(),
                ));
            }
            let x = solver
                .solve(v)
                .ok_or_else(|| Error::NotExact("value is not in the image of the injection".into()))?;
            for (o, xv) in out[t * rl..(t + 1) * rl].iter_mut().zip(x) {
                *o = xv % self.subm.ring.m;
            }
        }
        Ok(out)
    }

    /// Connecting map H^k(quotient) -> H^(k+1)(sub) on cohomology.
    pub fn connecting_map(
        &self,
        cl: &BarComplex,
        cm: &BarComplex,
        cn: &BarComplex,
        k: usize,
        sections: &[Vec<u64>],
        h_n: &Subquotient,
        h_l1: &Subquotient,
    ) -> Result<QMap> {
        induced_map(self.midm.ring.p, h_n, h_l1, |f| {
            self.connecting_cochain(cl, cm, cn, k, sections, f)
        })
    }
}

/// Ascending chain 0 = M_0 < M_1 < ... < M_n = M in (Z/p^e)^rank where each
/// M_{i+1}/M_i is the fixed submodule of M/M_i under every matrix in `mats`.
/// Succeeds exactly when the action generated by the matrices is nilpotent;
/// otherwise reports the layer whose quotient has no nonzero fixed vectors.
pub fn nilpotent_filtration(ring: Zpe, rank: usize, mats: &[Mat]) -> Result<Vec<SubgroupForm>> {
    let ords = vec![ring.m; rank];
    let mut chain = vec![SubgroupForm::new(ring.p, &ords, &[])];
    let mut gens: Vec<Vec<u64>> = Vec::new();
    loop {
        if chain.last().unwrap().is_full() {
            return Ok(chain);
        }
        let gmat = Mat::from_rows(ring, rank, gens.clone());
        let q = Subquotient::new(ring, rank, &Mat::identity(ring, rank), &gmat)?;
        let new_gens: Vec<Vec<u64>> = if mats.is_empty() {
            (0..rank)
                .map(|j| {
                    let mut v = vec![0u64; rank];
                    v[j] = 1;
                    v
                })
                .collect()
        } else {
            let maps: Vec<QMap> = mats
                .iter()
                .map(|a| {
                    let mut entries = vec![0u64; q.rank() * rank];
                    for j in 0..rank {
                        let mut col: Vec<u64> = a.col(j);
                        col[j] = ring.sub(col[j], 1);
                        let c = q.coords(&col)?;
                        for i in 0..q.rank() {
                            entries[i * rank + j] = c[i];
                        }
                    }
                    QMap::new(ring.p, ords.clone(), q.orders.clone(), entries)
                })
                .collect::<Result<_>>()?;
            QMap::vstack(&maps).kernel_gens()
        };
        let mut next = gens.clone();
        next.extend(new_gens);
        let form = SubgroupForm::new(ring.p, &ords, &next);
        if form == *chain.last().unwrap() {
            return Err(Error::NotNilpotent { layer: chain.len() - 1 });
        }
        gens = next;
        chain.push(form);
    }
}
