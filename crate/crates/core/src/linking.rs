//! Centric linking systems realized by a finite group, local systems on
//! them, and the cochain complex of the nerve.
//!
//! For a fusion system F_S(G) the objects are the F-centric subgroups and
//! Mor(P, Q) is the transporter set { g : gPg^-1 <= Q } divided by the
//! right action of O^p(C_G(P)); each morphism is stored by the minimal
//! element of its coset, so every derived structure is canonical. The
//! one-object category B(G) is built by the same machinery with the
//! quotient turned off, which makes the nerve of B(P) literally comparable
//! with the bar complex of P - the main internal cross-check, since the two
//! cochain complexes are implemented independently.
//!
//! Chains of the nerve are tuples (f_1, .., f_k) with f_i: x_i -> x_{i-1}.
//! The differential applies rho(f_1) on the first face, composes adjacent
//! morphisms on inner faces (dropping faces that collapse to an identity),
//! and deletes the last morphism; the orientation makes H^0 the invariants
//! of the local system, matching the bar complex.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::cohomology::{
    budget_check, cols_from_triples, induced_map, sparse_cols_to_rows, BarComplex, CoefModule,
    Flavor,
};
use crate::error::{Error, Result};
use crate::fusion::{FusionSystem, MapTable};
use crate::group::{FiniteGroup, Subgroup};
use crate::quotient::{QMap, Subquotient};
use crate::zint::{smith_integer, IntegerSmith};
use crate::zpe::{inverse, kernel_sparse, Mat, SparseCol, Zpe};

/// Cap on the number of morphisms a linking system may have.
pub const MOR_BOUND: usize = 2048;
/// Largest degree the nerve complex computes cohomology in.
pub const NERVE_DEGREE_CAP: usize = 3;
/// Cap on the number of composable chains enumerated per degree.
pub const CHAIN_BOUND: usize = 1 << 22;

#[derive(Clone, Copy, Debug)]
pub struct Morphism {
    /// object indices
    pub src: usize,
    pub dst: usize,
    /// minimal group element of the coset rep * O^p(C_G(src))
    pub rep: u32,
}

pub struct LinkingSystem<'g> {
    pub group: &'g FiniteGroup,
    pub p: u64,
    pub sylow: Subgroup,
    /// ascending by (order, elements)
    pub objects: Vec<Subgroup>,
    /// O^p(C_G(P)) per object; morphisms from P are cosets of this
    pub residuals: Vec<Subgroup>,
    /// sorted by (src, dst, rep); the id of a morphism is its position
    pub mors: Vec<Morphism>,
    pub s_obj: usize,
    comp_tab: Vec<u32>,
    mor_ids: BTreeMap<(usize, usize, u32), u32>,
    id_mors: Vec<u32>,
}

/// The linking system of the F-centric subgroups, with morphism sets
/// T_G(P, Q) / O^p(C_G(P)).
pub fn centric_linking_system(fusion: &FusionSystem) -> Result<LinkingSystem<'_>> {
    let group = &fusion.group;
    let whole = group.whole();
    let objects: Vec<Subgroup> = fusion
        .centrics()
        .into_iter()
        .map(|i| fusion.subs[i].clone())
        .collect();
    let residuals: Vec<Subgroup> = objects
        .iter()
        .map(|p| group.p_prime_residual(&group.centralizer(&p.elems, &whole), fusion.p))
        .collect();
    let s_obj = objects
        .iter()
        .position(|p| *p == fusion.s)
        .expect("the Sylow subgroup is centric");
    build(group, fusion.p, fusion.s.clone(), objects, residuals, s_obj)
}

/// The one-object category of a group: morphisms are the elements, with
/// composition the multiplication. Its nerve is the bar construction.
pub fn one_object<'g>(group: &'g FiniteGroup, sub: &Subgroup, p: u64) -> LinkingSystem<'g> {
    build(
        group,
        p,
        sub.clone(),
        vec![sub.clone()],
        vec![Subgroup::trivial()],
        0,
    )
    .expect("one-object system within bounds")
}

fn build<'g>(
    group: &'g FiniteGroup,
    p: u64,
    sylow: Subgroup,
    objects: Vec<Subgroup>,
    residuals: Vec<Subgroup>,
    s_obj: usize,
) -> Result<LinkingSystem<'g>> {
    let whole = group.whole();
    let canon = |src: usize, g: u32| -> u32 {
        residuals[src]
            .elems
            .iter()
            .map(|&z| group.mul_idx(g, z))
            .min()
            .unwrap()
    };
    let mut mors = Vec::new();
    let mut mor_ids = BTreeMap::new();
    for src in 0..objects.len() {
        for dst in 0..objects.len() {
            let mut reps = BTreeSet::new();
            for g in group.transporter(&objects[src], &objects[dst], &whole) {
                reps.insert(canon(src, g));
            }
            for rep in reps {
                if mors.len() >= MOR_BOUND {
                    return Err(Error::TooLarge { order: mors.len() + 1, bound: MOR_BOUND });
                }
                mor_ids.insert((src, dst, rep), mors.len() as u32);
                mors.push(Morphism { src, dst, rep });
            }
        }
    }
    let m = mors.len();
    let mut comp_tab = vec![u32::MAX; m * m];
    for a in 0..m {
        for b in 0..m {
            if mors[a].src == mors[b].dst {
                let prod = group.mul_idx(mors[a].rep, mors[b].rep);
                let key = (mors[b].src, mors[a].dst, canon(mors[b].src, prod));
                comp_tab[a * m + b] = mor_ids[&key];
            }
        }
    }
    let id_mors = (0..objects.len())
        .map(|o| mor_ids[&(o, o, canon(o, 0))])
        .collect();
    Ok(LinkingSystem {
        group,
        p,
        sylow,
        objects,
        residuals,
        mors,
        s_obj,
        comp_tab,
        mor_ids,
        id_mors,
    })
}

impl<'g> LinkingSystem<'g> {
    pub fn n_mors(&self) -> usize {
        self.mors.len()
    }

    /// a after b, defined when b lands in the source object of a.
    pub fn comp(&self, a: u32, b: u32) -> Option<u32> {
        let v = self.comp_tab[a as usize * self.mors.len() + b as usize];
        (v != u32::MAX).then_some(v)
    }

    pub fn is_identity_mor(&self, m: u32) -> bool {
        let mo = self.mors[m as usize];
        mo.src == mo.dst && self.id_mors[mo.src] == m
    }

    pub fn identity_mor(&self, obj: usize) -> u32 {
        self.id_mors[obj]
    }

    /// Morphism of the coset of g in N_S(src, dst), when g lies there.
    pub fn delta(&self, src: usize, dst: usize, g: u32) -> Option<u32> {
        if !self.sylow.contains(g) {
            return None;
        }
        if !self
            .group
            .conj_subgroup(g, &self.objects[src])
            .is_subset_of(&self.objects[dst])
        {
            return None;
        }
        let canon = self.residuals[src]
            .elems
            .iter()
            .map(|&z| self.group.mul_idx(g, z))
            .min()
            .unwrap();
        self.mor_ids.get(&(src, dst, canon)).copied()
    }

    /// The inclusion morphism P -> S.
    pub fn incl(&self, obj: usize) -> u32 {
        self.delta(obj, self.s_obj, 0).expect("objects lie in the Sylow subgroup")
    }

    /// Underlying fusion morphism: images of the sorted source elements
    /// under conjugation by the representative.
    pub fn project(&self, m: u32) -> MapTable {
        let mo = self.mors[m as usize];
        self.objects[mo.src]
            .elems
            .iter()
            .map(|&x| self.group.conj_idx(mo.rep, x))
            .collect()
    }

    pub fn object_of(&self, sub: &Subgroup) -> Option<usize> {
        self.objects.iter().position(|p| p == sub)
    }

    pub fn mors_between(&self, src: usize, dst: usize) -> Vec<u32> {
        (0..self.mors.len() as u32)
            .filter(|&m| self.mors[m as usize].src == src && self.mors[m as usize].dst == dst)
            .collect()
    }

    /// Smallest morphism of Aut_L(obj) projecting to the given fusion
    /// automorphism.
    pub fn lift_aut(&self, obj: usize, table: &MapTable) -> Option<u32> {
        self.mors_between(obj, obj)
            .into_iter()
            .find(|&m| self.project(m) == *table)
    }

    /// Check the structure axioms against the fusion system exhaustively:
    /// (A) the center of each object acts freely on morphism sets through
    /// delta, with the projection to the fusion system as orbit map;
    /// (B) delta restricted to transporters in S projects to conjugation;
    /// (C) psi after delta(x) equals delta(projected x) after psi.
    pub fn verify_axioms(&self, fusion: &FusionSystem) -> Result<()> {
        let g = self.group;
        let whole = g.whole();
        for (o, pg) in self.objects.iter().enumerate() {
            let f_src = fusion
                .sub_index(pg)
                .ok_or_else(|| Error::InvalidInput("object missing from fusion system".into()))?;
            let cs = g.centralizer(&pg.elems, &self.sylow);
            for (d, qg) in self.objects.iter().enumerate() {
                let f_dst = fusion.sub_index(qg).expect("object of the fusion system");
                let mor_list = self.mors_between(o, d);
                let t = g.transporter(pg, qg, &whole);
                if mor_list.len() * self.residuals[o].order() != t.len() {
                    return Err(Error::AxiomViolation {
                        axiom: 'A',
                        detail: format!(
                            "morphism count {} x residual {} differs from transporter {}",
                            mor_list.len(),
                            self.residuals[o].order(),
                            t.len()
                        ),
                    });
                }
                let mut fibers: BTreeMap<MapTable, BTreeSet<u32>> = BTreeMap::new();
                for &m in &mor_list {
                    fibers.entry(self.project(m)).or_default().insert(m);
                }
                let homs = fusion.hom(f_src, f_dst);
                if fibers.len() != homs.len() || homs.iter().any(|h| !fibers.contains_key(h)) {
                    return Err(Error::AxiomViolation {
                        axiom: 'A',
                        detail: format!(
                            "projection image has {} maps, fusion system has {}",
                            fibers.len(),
                            homs.len()
                        ),
                    });
                }
                for fiber in fibers.values() {
                    let psi = *fiber.iter().next().unwrap();
                    let mut orbit = BTreeSet::new();
                    for &z in &cs.elems {
                        let dz = self.delta(o, o, z).expect("central element normalizes");
                        orbit.insert(self.comp(psi, dz).expect("composable"));
                    }
                    if orbit.len() != cs.order() {
                        return Err(Error::AxiomViolation {
                            axiom: 'A',
                            detail: format!("central action is not free on object {o}"),
                        });
                    }
                    if orbit != *fiber {
                        return Err(Error::AxiomViolation {
                            axiom: 'A',
                            detail: format!(
                                "projection fiber over object pair ({o},{d}) is not one orbit"
                            ),
                        });
                    }
                }
                // (B)
                for &x in &t {
                    if !self.sylow.contains(x) {
                        continue;
                    }
                    let dm = self.delta(o, d, x).ok_or_else(|| Error::AxiomViolation {
                        axiom: 'B',
                        detail: format!("delta undefined on transporter element {x}"),
                    })?;
                    let table: MapTable = pg.elems.iter().map(|&y| g.conj_idx(x, y)).collect();
                    if self.project(dm) != table {
                        return Err(Error::AxiomViolation {
                            axiom: 'B',
                            detail: format!("delta({x}) does not project to conjugation"),
                        });
                    }
                }
                // (C)
                for &psi in &mor_list {
                    let rep = self.mors[psi as usize].rep;
                    for &x in &pg.elems {
                        let lhs = self.comp(psi, self.delta(o, o, x).expect("x in P"));
                        let px = g.conj_idx(rep, x);
                        let rhs = self.comp(self.delta(d, d, px).expect("image in Q"), psi);
                        if lhs != rhs || lhs.is_none() {
                            return Err(Error::AxiomViolation {
                                axiom: 'C',
                                detail: format!(
                                    "naturality fails for morphism {psi} at element {x}"
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Abelianized relations of the fundamental group based at S: one row
    /// per composable pair (g f = gf), plus rows forcing the inclusions
    /// P -> S (a spanning star of the object set) to be trivial.
    pub fn relation_rows(&self) -> Vec<Vec<i64>> {
        let m = self.mors.len();
        let mut rows = BTreeSet::new();
        for a in 0..m as u32 {
            for b in 0..m as u32 {
                if let Some(h) = self.comp(a, b) {
                    let mut row = vec![0i64; m];
                    row[a as usize] += 1;
                    row[b as usize] += 1;
                    row[h as usize] -= 1;
                    rows.insert(row);
                }
            }
        }
        for o in 0..self.objects.len() {
            if o != self.s_obj {
                let mut row = vec![0i64; m];
                row[self.incl(o) as usize] = 1;
                rows.insert(row);
            }
        }
        rows.into_iter().collect()
    }

    /// First homology of the nerve: generators are the morphisms.
    pub fn h1(&self) -> IntegerSmith {
        smith_integer(&self.relation_rows(), self.mors.len())
    }

    pub fn h1_invariants(&self) -> Vec<i64> {
        self.h1().invariant_factors()
    }

    /// A surjection of the fundamental group onto Z/p as a value per
    /// morphism generator, taken from the first invariant-factor coordinate
    /// divisible by p. None when h1 tensor Z/p vanishes.
    pub fn unipotent_functional(&self, p: u64) -> Option<Vec<u64>> {
        let s = self.h1();
        let i = (0..s.diag.len()).find(|&i| s.diag[i] == 0 || s.diag[i] % p as i64 == 0)?;
        Some(
            (0..self.mors.len())
                .map(|j| s.coord(j, i).rem_euclid(p as i64) as u64)
                .collect(),
        )
    }
}

/// Coefficients for the nerve: one invertible matrix per morphism,
/// multiplicative under composition.
pub struct LocalSystem {
    pub ring: Zpe,
    pub rank: usize,
    mats: Vec<Mat>,
}

impl LocalSystem {
    pub fn trivial(l: &LinkingSystem, ring: Zpe, rank: usize) -> LocalSystem {
        LocalSystem { ring, rank, mats: vec![Mat::identity(ring, rank); l.n_mors()] }
    }

    pub fn new(l: &LinkingSystem, ring: Zpe, rank: usize, mats: Vec<Mat>) -> Result<LocalSystem> {
        if mats.len() != l.n_mors() {
            return Err(Error::InvalidInput("one matrix per morphism required".into()));
        }
        for m in &mats {
            if m.rows != rank || m.cols != rank || m.ring != ring {
                return Err(Error::InvalidInput("local system matrix shape mismatch".into()));
            }
            if inverse(m).is_none() {
                return Err(Error::InvalidInput("local system matrix is not invertible".into()));
            }
        }
        for o in 0..l.objects.len() {
            if mats[l.identity_mor(o) as usize] != Mat::identity(ring, rank) {
                return Err(Error::InvalidInput(
                    "identity morphism must carry the identity matrix".into(),
                ));
            }
        }
        for a in 0..l.n_mors() as u32 {
            for b in 0..l.n_mors() as u32 {
                if let Some(h) = l.comp(a, b) {
                    if mats[h as usize] != mats[a as usize].mul(&mats[b as usize]) {
                        return Err(Error::RelationViolated {
                            f: b as usize,
                            g: a as usize,
                            gf: h as usize,
                        });
                    }
                }
            }
        }
        Ok(LocalSystem { ring, rank, mats })
    }

    /// Unipotent local system on (Z/p)^2 through a surjection of the
    /// fundamental group onto Z/p; None when h1 tensor Z/p = 0.
    pub fn unipotent(l: &LinkingSystem, p: u64) -> Result<Option<(LocalSystem, Vec<u64>)>> {
        let Some(chi) = l.unipotent_functional(p) else {
            return Ok(None);
        };
        let ring = Zpe::new(p, 1)?;
        let u = Mat::from_rows(ring, 2, vec![vec![1, 1], vec![0, 1]]);
        let mut powers = vec![Mat::identity(ring, 2)];
        for _ in 1..p {
            powers.push(powers.last().unwrap().mul(&u));
        }
        let mats = chi.iter().map(|&c| powers[c as usize].clone()).collect();
        Ok(Some((Self::new(l, ring, 2, mats)?, chi)))
    }

    pub fn rho(&self, m: u32) -> &Mat {
        &self.mats[m as usize]
    }

    /// Loop matrix of a morphism: conjugate into the basepoint S through
    /// the inclusions, rho(incl dst) rho(psi) rho(incl src)^-1.
    pub fn w_matrix(&self, l: &LinkingSystem, m: u32) -> Mat {
        let mo = l.mors[m as usize];
        let src_inc = self.rho(l.incl(mo.src));
        let dst_inc = self.rho(l.incl(mo.dst));
        dst_inc
            .mul(self.rho(m))
            .mul(&inverse(src_inc).expect("validated invertible"))
    }

    /// The coefficients as a module over S, acting through delta.
    pub fn s_module(&self, l: &LinkingSystem) -> Result<CoefModule> {
        let acts: BTreeMap<u32, Mat> = l
            .sylow
            .elems
            .iter()
            .map(|&x| {
                let d = l.delta(l.s_obj, l.s_obj, x).expect("delta on S");
                (x, self.rho(d).clone())
            })
            .collect();
        CoefModule::from_assignment(l.group, &l.sylow, self.ring, self.rank, acts)
    }
}

/// Composable chains of one length, stored flat and ordered
/// lexicographically by morphism ids.
struct ChainLevel {
    stride: usize,
    count: usize,
    data: Vec<u32>,
}

impl ChainLevel {
    fn at(&self, i: usize) -> &[u32] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    fn find(&self, chain: &[u32]) -> usize {
        debug_assert_eq!(chain.len(), self.stride);
        let (mut lo, mut hi) = (0, self.count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.at(mid) < chain {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        debug_assert_eq!(self.at(lo), chain);
        lo
    }
}

/// Normalized cochain complex of the nerve with local coefficients.
/// Degree-k cochains assign a coefficient vector to each chain of k
/// composable non-identity morphisms (to each object at k = 0).
pub struct NerveComplex<'a> {
    pub linking: &'a LinkingSystem<'a>,
    pub system: &'a LocalSystem,
    pub max_degree: usize,
    levels: Vec<ChainLevel>,
}

impl<'a> NerveComplex<'a> {
    pub fn new(
        linking: &'a LinkingSystem<'a>,
        system: &'a LocalSystem,
        max_degree: usize,
    ) -> Result<NerveComplex<'a>> {
        assert_eq!(system.mats.len(), linking.n_mors(), "local system of a different category");
        if max_degree > NERVE_DEGREE_CAP {
            return Err(Error::DegreeOutOfRange { degree: max_degree, max: NERVE_DEGREE_CAP });
        }
        let n_obj = linking.objects.len();
        let non_id: Vec<u32> = (0..linking.n_mors() as u32)
            .filter(|&m| !linking.is_identity_mor(m))
            .collect();
        // count chains per level first: t[o] = chains whose last source is o
        let mut t = vec![0u128; n_obj];
        for &m in &non_id {
            t[linking.mors[m as usize].src] += 1;
        }
        let mut trans = vec![0u128; n_obj * n_obj];
        for &m in &non_id {
            let mo = linking.mors[m as usize];
            trans[mo.dst * n_obj + mo.src] += 1;
        }
        let mut counts = vec![1u128, non_id.len() as u128];
        for _ in 2..=max_degree + 1 {
            let mut next = vec![0u128; n_obj];
            for o in 0..n_obj {
                for o2 in 0..n_obj {
                    next[o2] += t[o] * trans[o * n_obj + o2];
                }
            }
            t = next;
            counts.push(t.iter().sum());
        }
        for (k, &c) in counts.iter().enumerate() {
            if c > CHAIN_BOUND as u128 {
                return Err(Error::DegreeTooLarge {
                    degree: k,
                    entries: c.min(usize::MAX as u128) as usize,
                    budget: CHAIN_BOUND,
                });
            }
        }
        let mut by_dst: Vec<Vec<u32>> = vec![Vec::new(); n_obj];
        for &m in &non_id {
            by_dst[linking.mors[m as usize].dst].push(m);
        }
        let mut levels = vec![
            ChainLevel { stride: 0, count: n_obj, data: Vec::new() },
            ChainLevel { stride: 1, count: non_id.len(), data: non_id },
        ];
        for k in 2..=max_degree + 1 {
            let prev = &levels[k - 1];
            let mut data = Vec::with_capacity(counts[k] as usize * k);
            for i in 0..prev.count {
                let ch = prev.at(i);
                let last_src = linking.mors[ch[k - 2] as usize].src;
                for &g in &by_dst[last_src] {
                    data.extend_from_slice(ch);
                    data.push(g);
                }
            }
            levels.push(ChainLevel { stride: k, count: data.len() / k, data });
        }
        Ok(NerveComplex { linking, system, max_degree, levels })
    }

    pub fn n_chains(&self, k: usize) -> usize {
        self.levels[k].count
    }

    pub fn dim(&self, k: usize) -> usize {
        self.n_chains(k) * self.system.rank
    }

    fn differential_cols(&self, k: usize) -> Vec<SparseCol> {
        let rank = self.system.rank;
        let ring = self.system.ring;
        let lvl1 = &self.levels[k + 1];
        let lvl = &self.levels[k];
        assert!(lvl1.count * rank < u32::MAX as usize);
        let neg1 = ring.m - 1;
        let triples: Vec<(u32, u32, u64)> = (0..lvl1.count)
            .into_par_iter()
            .flat_map_iter(|sigma| {
                let ch = lvl1.at(sigma);
                let mut out = Vec::with_capacity(rank * rank + (k + 2) * rank);
                let t0 = if k == 0 {
                    self.linking.mors[ch[0] as usize].src
                } else {
                    lvl.find(&ch[1..])
                };
                let a = self.system.rho(ch[0]);
                for m in 0..rank {
                    for i in 0..rank {
                        let v = a.at(i, m);
                        if v != 0 {
                            out.push(((t0 * rank + m) as u32, (sigma * rank + i) as u32, v));
                        }
                    }
                }
                for i in 1..=k {
                    let h = self.linking.comp(ch[i - 1], ch[i]).expect("chain is composable");
                    if self.linking.is_identity_mor(h) {
                        continue;
                    }
                    let mut mc = Vec::with_capacity(k);
                    mc.extend_from_slice(&ch[..i - 1]);
                    mc.push(h);
                    mc.extend_from_slice(&ch[i + 1..]);
                    let ti = lvl.find(&mc);
                    let val = if i % 2 == 1 { neg1 } else { 1 };
                    for m in 0..rank {
                        out.push(((ti * rank + m) as u32, (sigma * rank + m) as u32, val));
                    }
                }
                let tl = if k == 0 {
                    self.linking.mors[ch[0] as usize].dst
                } else {
                    lvl.find(&ch[..k])
                };
                let val = if (k + 1) % 2 == 1 { neg1 } else { 1 };
                for m in 0..rank {
                    out.push(((tl * rank + m) as u32, (sigma * rank + m) as u32, val));
                }
                out.into_iter()
            })
            .collect();
        cols_from_triples(ring, self.dim(k), triples)
    }

    pub fn cohomology(&self, k: usize) -> Result<Subquotient> {
        if k > self.max_degree {
            return Err(Error::DegreeOutOfRange { degree: k, max: self.max_degree });
        }
        let r = self.system.rank as u128;
        let dim = |d: usize| self.levels[d].count as u128 * r;
        let dim_km1 = if k == 0 { 0 } else { dim(k - 1) };
        budget_check(k, dim_km1, dim(k), dim(k + 1) * (r + k as u128 + 1))?;
        let ring = self.system.ring;
        let dim_k = self.dim(k);
        let kmat = kernel_sparse(ring, self.differential_cols(k), dim_k);
        let image = if k == 0 {
            Mat::zero(ring, 0, dim_k)
        } else {
            sparse_cols_to_rows(ring, &self.differential_cols(k - 1), dim_k)
        };
        Subquotient::new(ring, dim_k, &kmat, &image)
    }

    /// Restrict a nerve cochain along the functor B(S) -> L sending a group
    /// element to its delta morphism. A chain map onto the bar complex of S
    /// with the local system's S-module coefficients.
    pub fn restrict_to_bar(&self, bar: &BarComplex, k: usize, f: &[u64]) -> Vec<u64> {
        assert_eq!(bar.sub, self.linking.sylow, "bar complex must be over S");
        assert_eq!(bar.flavor, Flavor::Normalized);
        assert_eq!(bar.module.ring, self.system.ring);
        assert_eq!(bar.module.rank, self.system.rank);
        let rank = self.system.rank;
        let l = self.linking;
        let mut ds = vec![u32::MAX; l.group.order()];
        for &x in &l.sylow.elems {
            ds[x as usize] = l.delta(l.s_obj, l.s_obj, x).expect("delta on S");
        }
        let lvl = &self.levels[k];
        (0..bar.n_tuples(k))
            .flat_map(|t| {
                let tup = bar.tuple_at(k, t);
                let idx = if k == 0 {
                    l.s_obj
                } else {
                    let chain: Vec<u32> = tup.iter().map(|&g| ds[g as usize]).collect();
                    lvl.find(&chain)
                };
                f[idx * rank..(idx + 1) * rank].iter().copied()
            })
            .collect()
    }
}

/// The comparison map H^k(nerve) -> H^k(S, M) induced by restriction along
/// delta.
pub fn nerve_to_bar_map(
    nerve: &NerveComplex,
    bar: &BarComplex,
    k: usize,
    h_nerve: &Subquotient,
    h_bar: &Subquotient,
) -> Result<QMap> {
    induced_map(nerve.system.ring.p, h_nerve, h_bar, |f| {
        Ok(nerve.restrict_to_bar(bar, k, f))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Perm;

    fn s4() -> FiniteGroup {
        FiniteGroup::from_generators(
            4,
            &[
                Perm::from_images(vec![1, 2, 3, 0]).unwrap(),
                Perm::from_images(vec![1, 0, 2, 3]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn f2() -> Zpe {
        Zpe::new(2, 1).unwrap()
    }
    fn z4() -> Zpe {
        Zpe::new(2, 2).unwrap()
    }

    fn d8() -> FiniteGroup {
        FiniteGroup::from_generators(
            4,
            &[
                Perm::from_images(vec![1, 2, 3, 0]).unwrap(),
                Perm::from_images(vec![3, 2, 1, 0]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn a4() -> FiniteGroup {
        FiniteGroup::from_generators(
            4,
            &[
                Perm::from_images(vec![1, 2, 0, 3]).unwrap(),
                Perm::from_images(vec![1, 0, 3, 2]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn s4_linking_structure() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let mut orders: Vec<usize> = l.objects.iter().map(|p| p.order()).collect();
        orders.sort();
        assert_eq!(orders, vec![4, 4, 4, 8]);
        assert_eq!(l.n_mors(), 88);
        let non_id = (0..88u32).filter(|&m| !l.is_identity_mor(m)).count();
        assert_eq!(non_id, 84);
        assert!(l.residuals.iter().all(|z| z.order() == 1));
        l.verify_axioms(&f).unwrap();
    }

    #[test]
    fn d8_trivial_fusion_linking() {
        let f = FusionSystem::new(d8(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        assert_eq!(l.objects.len(), 4);
        assert_eq!(l.n_mors(), 56);
        l.verify_axioms(&f).unwrap();
    }

    #[test]
    fn chain_counts() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let sys = LocalSystem::trivial(&l, f2(), 1);
        let n = NerveComplex::new(&l, &sys, 2).unwrap();
        assert_eq!(n.n_chains(1), 84);
        assert_eq!(n.n_chains(2), 1620);
        let n = NerveComplex::new(&l, &sys, 3).unwrap();
        assert_eq!(n.n_chains(3), 33284);

        let f = FusionSystem::new(d8(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let sys = LocalSystem::trivial(&l, f2(), 1);
        let n = NerveComplex::new(&l, &sys, 3).unwrap();
        assert_eq!(n.n_chains(2), 532);
        assert_eq!(n.n_chains(3), 4900);
    }

    #[test]
    fn one_object_a4_h1() {
        let g = a4();
        let whole = g.whole();
        let l = one_object(&g, &whole, 2);
        assert_eq!(l.n_mors(), 12);
        assert_eq!(l.h1_invariants(), vec![3]);
        // no surjection onto Z/2, one onto Z/3
        assert!(l.unipotent_functional(2).is_none());
        assert!(l.unipotent_functional(3).is_some());
    }

    #[test]
    fn trivial_fusion_d8_h1_mod_two() {
        let f = FusionSystem::new(d8(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let inv = l.h1_invariants();
        let even = inv.iter().filter(|&&d| d == 0 || d % 2 == 0).count();
        assert_eq!(even, 2, "h1 mod 2 must be (Z/2)^2, got invariants {inv:?}");
        let chi = l.unipotent_functional(2).unwrap();
        assert!(chi.iter().any(|&c| c != 0));
        // inclusions were forced trivial by the spanning star
        for o in 0..l.objects.len() {
            assert_eq!(chi[l.incl(o) as usize], 0);
        }
        let (sys, _) = LocalSystem::unipotent(&l, 2).unwrap().unwrap();
        assert!(!sys.s_module(&l).unwrap().is_trivial());
    }

    #[test]
    fn s4_linking_h1_mod_two_is_one_line() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let inv = l.h1_invariants();
        let even = inv.iter().filter(|&&d| d == 0 || d % 2 == 0).count();
        assert_eq!(even, 1, "invariants {inv:?}");
    }

    /// The nerve of B(P) is the bar construction: both cochain complexes
    /// must give identical cohomology, for trivial and twisted coefficients.
    #[test]
    fn one_object_nerve_matches_bar() {
        let g = d8();
        let whole = g.whole();
        let l = one_object(&g, &whole, 2);
        // trivial mod-2 coefficients
        let sys = LocalSystem::trivial(&l, f2(), 1);
        let n = NerveComplex::new(&l, &sys, 3).unwrap();
        let bar = BarComplex::new(&g, whole.clone(), CoefModule::trivial(f2(), 1, &whole), Flavor::Normalized);
        for k in 0..=3 {
            assert_eq!(
                n.cohomology(k).unwrap().orders,
                bar.cohomology(k).unwrap().orders,
                "trivial coefficients, k={k}"
            );
        }
        // sign action on Z/4: matrices indexed by morphism = group element
        let r = g.idx_of(&Perm::from_images(vec![1, 2, 3, 0]).unwrap()).unwrap();
        let f_el = g.idx_of(&Perm::from_images(vec![3, 2, 1, 0]).unwrap()).unwrap();
        let module = CoefModule::from_generators(
            &g,
            &whole,
            z4(),
            1,
            &[
                (r, Mat::identity(z4(), 1)),
                (f_el, Mat::from_rows(z4(), 1, vec![vec![3]])),
            ],
        )
        .unwrap();
        let mats: Vec<Mat> = l.mors.iter().map(|m| module.act(m.rep).clone()).collect();
        let sys = LocalSystem::new(&l, z4(), 1, mats).unwrap();
        let n = NerveComplex::new(&l, &sys, 3).unwrap();
        let bar = BarComplex::new(&g, whole.clone(), module, Flavor::Normalized);
        for k in 0..=3 {
            assert_eq!(
                n.cohomology(k).unwrap().orders,
                bar.cohomology(k).unwrap().orders,
                "sign coefficients, k={k}"
            );
        }
    }

    #[test]
    fn local_system_validation() {
        let g = d8();
        let whole = g.whole();
        let l = one_object(&g, &whole, 2);
        // a non-multiplicative assignment must be rejected
        let mut mats = vec![Mat::identity(f2(), 1); l.n_mors()];
        let bad = Mat::from_rows(f2(), 2, vec![vec![1, 0], vec![0, 1]]);
        assert!(LocalSystem::new(&l, f2(), 2, vec![bad; l.n_mors() - 1]).is_err());
        mats[3] = Mat::identity(f2(), 1); // still fine: all identity
        assert!(LocalSystem::new(&l, f2(), 1, mats).is_ok());
        // order-3 matrix on a morphism of order 2 violates a relation
        let l4 = one_object(&g, &g.closure(&[1]), 2);
        let w = Mat::from_rows(f2(), 2, vec![vec![0, 1], vec![1, 1]]);
        let mut mats: Vec<Mat> = vec![Mat::identity(f2(), 2); l4.n_mors()];
        for (i, m) in l4.mors.iter().enumerate() {
            if m.rep != 0 {
                mats[i] = w.clone();
            }
        }
        assert!(matches!(
            LocalSystem::new(&l4, f2(), 2, mats),
            Err(Error::RelationViolated { .. })
        ));
    }

    #[test]
    fn w_matrices_respect_delta_and_composition() {
        let f = FusionSystem::new(d8(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let (sys, _) = LocalSystem::unipotent(&l, 2).unwrap().unwrap();
        // W(delta_P(x)) agrees with the S-action for every object
        for (o, pg) in l.objects.iter().enumerate() {
            for &x in &pg.elems {
                let dp = l.delta(o, o, x).unwrap();
                let ds = l.delta(l.s_obj, l.s_obj, x).unwrap();
                assert_eq!(sys.w_matrix(&l, dp), *sys.rho(ds), "object {o}, element {x}");
            }
        }
        // W is functorial
        for a in 0..l.n_mors() as u32 {
            for b in 0..l.n_mors() as u32 {
                if let Some(h) = l.comp(a, b) {
                    assert_eq!(
                        sys.w_matrix(&l, h),
                        sys.w_matrix(&l, a).mul(&sys.w_matrix(&l, b))
                    );
                }
            }
        }
    }

    #[test]
    fn nerve_h0_is_the_invariant_submodule() {
        let f = FusionSystem::new(d8(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let (sys, _) = LocalSystem::unipotent(&l, 2).unwrap().unwrap();
        let n = NerveComplex::new(&l, &sys, 1).unwrap();
        let h0 = n.cohomology(0).unwrap();
        // brute force: vectors fixed by every morphism matrix
        let fixed: Vec<Vec<u64>> = (0..4u64)
            .map(|x| vec![x % 2, x / 2])
            .filter(|v| (0..l.n_mors() as u32).all(|m| sys.rho(m).apply(v) == *v))
            .collect();
        assert_eq!(
            h0.order(),
            fixed.len() as u128,
            "H^0 must match the invariant submodule"
        );
    }

    #[test]
    fn restriction_to_bar_is_a_chain_map() {
        let f = FusionSystem::new(d8(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let (sys, _) = LocalSystem::unipotent(&l, 2).unwrap().unwrap();
        let n = NerveComplex::new(&l, &sys, 2).unwrap();
        let module = sys.s_module(&l).unwrap();
        let bar = BarComplex::new(l.group, l.sylow.clone(), module, Flavor::Normalized);
        for k in 0..=1 {
            let cols = n.differential_cols(k);
            for j in 0..n.dim(k) {
                let mut e = vec![0u64; n.dim(k)];
                e[j] = 1;
                // nerve differential of the basis cochain, then restrict
                let mut de = vec![0u64; n.dim(k + 1)];
                for &(row, v) in &cols[j].entries {
                    de[row as usize] = v;
                }
                let lhs = n.restrict_to_bar(&bar, k + 1, &de);
                let rhs = bar.apply_d(k, &n.restrict_to_bar(&bar, k, &e));
                assert_eq!(lhs, rhs, "k={k}, basis {j}");
            }
        }
    }

    #[test]
    fn s4_nerve_small_degrees() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let sys = LocalSystem::trivial(&l, f2(), 1);
        let n = NerveComplex::new(&l, &sys, 3).unwrap();
        assert_eq!(n.cohomology(0).unwrap().orders, vec![2]);
        assert_eq!(n.cohomology(1).unwrap().orders, vec![2]);
        // the top degree exceeds the entry budget by design
        assert!(matches!(n.cohomology(3), Err(Error::DegreeTooLarge { degree: 3, .. })));
    }

    #[test]
    fn linking_for_d8_inside_s4_objects_match() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        assert_eq!(f.s.order(), 8);
        let l = centric_linking_system(&f).unwrap();
        assert_eq!(l.objects.len(), 4);
        assert!(l.objects.iter().all(|p| p.is_subset_of(&l.sylow)));
        assert_eq!(l.objects[l.s_obj], l.sylow);
    }
}
