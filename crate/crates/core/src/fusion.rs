//! Fusion systems of finite groups at a prime p.
//!
//! For a Sylow p-subgroup S of G, the fusion system has the subgroups of S as
//! objects, and Hom(P, Q) = { c_g restricted to P : g in G, gPg^-1 <= Q },
//! stored as deduplicated image tables. On top of the raw hom sets this
//! module computes F-conjugacy, F-centric subgroups, weak closure, the
//! largest normal subgroup O_p, and constrainedness - each directly from its
//! definition, which is affordable because every ambient group here is tiny.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Subgroup};
use crate::linking::LinkingSystem;

/// A fusion morphism P -> Q as the list of images (element indices of the
/// ambient group) of the sorted elements of P. The source subgroup is
/// implicit; the same table can witness morphisms into any Q containing the
/// image.
pub type MapTable = Vec<u32>;

pub struct FusionSystem {
    pub group: FiniteGroup,
    pub p: u64,
    pub s: Subgroup,
    /// all subgroups of S, sorted by (order, elements); objects of the system
    pub subs: Vec<Subgroup>,
    pub s_idx: usize,
    sub_index: BTreeMap<Vec<u32>, usize>,
    /// homs[src * n + dst], each a sorted deduplicated set of tables
    homs: Vec<Vec<MapTable>>,
}

impl FusionSystem {
    pub fn new(group: FiniteGroup, p: u64) -> Result<Self> {
        let s = group.sylow(p)?;
        let subs = group.subgroups_of(&s)?;
        let n = subs.len();
        let sub_index: BTreeMap<Vec<u32>, usize> = subs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.elems.clone(), i))
            .collect();
        let s_idx = sub_index[&s.elems];
        let whole = group.whole();
        let homs: Vec<Vec<MapTable>> = (0..n)
            .into_par_iter()
            .flat_map_iter(|src| {
                let group = &group;
                let subs = &subs;
                let whole = &whole;
                (0..n).map(move |dst| {
                    let mut set: BTreeSet<MapTable> = BTreeSet::new();
                    for g in group.transporter(&subs[src], &subs[dst], whole) {
                        set.insert(
                            subs[src]
                                .elems
                                .iter()
                                .map(|&x| group.conj_idx(g, x))
                                .collect(),
                        );
                    }
                    set.into_iter().collect()
                })
            })
            .collect();
        Ok(FusionSystem { group, p, s, subs, s_idx, sub_index, homs })
    }

    pub fn n_subs(&self) -> usize {
        self.subs.len()
    }

    pub fn sub_index(&self, sub: &Subgroup) -> Option<usize> {
        self.sub_index.get(&sub.elems).copied()
    }

    pub fn hom(&self, src: usize, dst: usize) -> &[MapTable] {
        &self.homs[src * self.n_subs() + dst]
    }

    pub fn aut(&self, i: usize) -> &[MapTable] {
        self.hom(i, i)
    }

    pub fn identity_table(&self, i: usize) -> MapTable {
        self.subs[i].elems.clone()
    }

    /// Position of an element index inside a subgroup's sorted element list.
    pub fn pos_in(sub: &Subgroup, g: u32) -> usize {
        sub.elems.binary_search(&g).expect("element not in subgroup")
    }

    /// g after f, where f: src -> mid and g: mid -> dst.
    pub fn compose_tables(&self, src: usize, mid: usize, f: &MapTable, g: &MapTable) -> MapTable {
        debug_assert_eq!(f.len(), self.subs[src].order());
        f.iter()
            .map(|&fx| g[Self::pos_in(&self.subs[mid], fx)])
            .collect()
    }

    /// Restriction of a table on src to a subgroup of src.
    pub fn restrict_table(&self, src: usize, table: &MapTable, smaller: &Subgroup) -> MapTable {
        smaller
            .elems
            .iter()
            .map(|&x| table[Self::pos_in(&self.subs[src], x)])
            .collect()
    }

    pub fn image_of_table(&self, table: &MapTable) -> Subgroup {
        Subgroup::new(table.clone())
    }

    /// Indices of the F-conjugates of subs[i] (images of all morphisms to S).
    pub fn f_conjugates(&self, i: usize) -> Vec<usize> {
        let mut out: BTreeSet<usize> = BTreeSet::new();
        for t in self.hom(i, self.s_idx) {
            let img = self.image_of_table(t);
            out.insert(self.sub_index(&img).expect("image is a subgroup of S"));
        }
        out.into_iter().collect()
    }

    /// P is F-centric iff every F-conjugate Q has C_S(Q) <= Q.
    pub fn is_centric(&self, i: usize) -> bool {
        self.f_conjugates(i).into_iter().all(|j| {
            self.group
                .centralizer(&self.subs[j].elems, &self.s)
                .is_subset_of(&self.subs[j])
        })
    }

    pub fn centrics(&self) -> Vec<usize> {
        (0..self.n_subs()).filter(|&i| self.is_centric(i)).collect()
    }

    pub fn is_weakly_closed(&self, i: usize) -> bool {
        self.f_conjugates(i) == vec![i]
    }

    /// P is normal in F iff P is normal in S and every morphism Q -> R
    /// extends to QP -> RP mapping P onto P.
    pub fn is_normal_in_f(&self, i: usize) -> bool {
        let p = &self.subs[i];
        if self.group.normalizer(p, &self.s).order() != self.s.order() {
            return false;
        }
        let n = self.n_subs();
        for q in 0..n {
            let qp = self.group.closure(
                &self.subs[q]
                    .elems
                    .iter()
                    .chain(&p.elems)
                    .copied()
                    .collect::<Vec<_>>(),
            );
            let qp_idx = self.sub_index(&qp).expect("QP inside S");
            for r in 0..n {
                for phi in self.hom(q, r) {
                    let rp = self.group.closure(
                        &phi.iter().chain(&p.elems).copied().collect::<Vec<_>>(),
                    );
                    let rp_idx = self.sub_index(&rp).expect("RP inside S");
                    let ok = self.hom(qp_idx, rp_idx).iter().any(|psi| {
                        self.restrict_table(qp_idx, psi, &self.subs[q]) == *phi
                            && self.image_of_table(&self.restrict_table(qp_idx, psi, p)) == *p
                    });
                    if !ok {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// The largest subgroup normal in F.
    pub fn o_p(&self) -> usize {
        let normals: Vec<usize> = (0..self.n_subs())
            .filter(|&i| self.is_normal_in_f(i))
            .collect();
        let &best = normals
            .iter()
            .max_by_key(|&&i| self.subs[i].order())
            .expect("trivial subgroup is always normal in F");
        debug_assert!(normals
            .iter()
            .all(|&i| self.subs[i].is_subset_of(&self.subs[best])));
        best
    }

    /// Constrained: C_S(O_p(F)) <= O_p(F), i.e. O_p(F) is F-centric.
    pub fn is_constrained(&self) -> bool {
        self.is_centric(self.o_p())
    }

    /// A small generating set of Aut_F(P): greedily add automorphisms not yet
    /// in the generated subgroup, in canonical table order.
    pub fn aut_generators(&self, i: usize) -> Vec<MapTable> {
        let auts = self.aut(i);
        let id = self.identity_table(i);
        let mut gens: Vec<MapTable> = Vec::new();
        let mut known: BTreeSet<MapTable> = BTreeSet::new();
        known.insert(id.clone());
        for t in auts {
            if known.contains(t) {
                continue;
            }
            gens.push(t.clone());
            // close under composition
            loop {
                let mut grew = false;
                let snapshot: Vec<MapTable> = known.iter().cloned().collect();
                for a in &snapshot {
                    for b in gens.iter().chain(snapshot.iter()) {
                        let c = self.compose_tables(i, i, b, a);
                        if known.insert(c) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
        }
        debug_assert_eq!(known.len(), auts.len());
        gens
    }

    /// Look up, for a morphism table, one ambient group element realizing it.
    pub fn witness(&self, src: usize, table: &MapTable) -> Result<u32> {
        let whole = self.group.whole();
        for g in whole.elems {
            if self.subs[src]
                .elems
                .iter()
                .zip(table)
                .all(|(&x, &y)| self.group.conj_idx(g, x) == y)
            {
                return Ok(g);
            }
        }
        Err(Error::NotFusionMorphism)
    }
}

/// One step of a factorization: the automorphism `aut` of the centric
/// subgroup `host` (a fusion subgroup index), applied to the running domain
/// by restriction. `host_obj` is the same subgroup as a linking-system object
/// index and `lift` is a morphism id in its linking automorphism group
/// projecting onto `aut`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlperinStep {
    pub host: usize,
    pub host_obj: usize,
    pub lift: u32,
    pub aut: MapTable,
    /// fusion subgroup indices of the domain before and after this step
    pub from: usize,
    pub to: usize,
}

/// A morphism P -> S written as a composite of restrictions of automorphisms
/// of centric subgroups, followed by an inclusion. Inclusions themselves get
/// the empty step list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlperinDecomposition {
    pub src: usize,
    pub steps: Vec<AlperinStep>,
}

impl AlperinDecomposition {
    /// Apply the steps in order to the identity on the source.
    pub fn recompose(&self, f: &FusionSystem) -> MapTable {
        let mut t = f.identity_table(self.src);
        for st in &self.steps {
            let q = &f.subs[st.host];
            for x in t.iter_mut() {
                *x = st.aut[FusionSystem::pos_in(q, *x)];
            }
        }
        t
    }
}

/// Factor a fusion morphism P -> S into restrictions of automorphisms of
/// centric subgroups, each tagged with a lift in the linking system.
///
/// Breadth-first search over accumulated map tables: from a table with image
/// D, the moves are alpha restricted to D for every centric host Q >= D and
/// every alpha in Aut_F(Q), explored with hosts in object order and
/// automorphisms in stored table order. First arrival wins, so the result is
/// shortest under that fixed order, and deterministic.
pub fn alperin_factorize(
    f: &FusionSystem,
    l: &LinkingSystem,
    src: usize,
    table: &MapTable,
) -> Result<AlperinDecomposition> {
    let hosts: Vec<usize> = (0..l.objects.len()).collect();
    factorize_hosts(f, l, src, table, &hosts)
}

/// Same search with the centric hosts tried in descending object order. The
/// result is an equally valid decomposition that often differs from the one
/// `alperin_factorize` picks; comparing constructions built from the two
/// probes how much downstream data depends on the choice.
pub fn alperin_factorize_desc(
    f: &FusionSystem,
    l: &LinkingSystem,
    src: usize,
    table: &MapTable,
) -> Result<AlperinDecomposition> {
    let hosts: Vec<usize> = (0..l.objects.len()).rev().collect();
    factorize_hosts(f, l, src, table, &hosts)
}

fn factorize_hosts(
    f: &FusionSystem,
    l: &LinkingSystem,
    src: usize,
    table: &MapTable,
    hosts: &[usize],
) -> Result<AlperinDecomposition> {
    if f.hom(src, f.s_idx).binary_search(table).is_err() {
        return Err(Error::NotFusionMorphism);
    }
    let start = f.identity_table(src);
    // state -> (previous state, host object index, index into aut list)
    let mut parent: BTreeMap<MapTable, (MapTable, usize, usize)> = BTreeMap::new();
    parent.insert(start.clone(), (start.clone(), usize::MAX, 0));
    let mut queue: VecDeque<MapTable> = VecDeque::new();
    queue.push_back(start.clone());
    let mut found = start == *table;
    'bfs: while let Some(state) = queue.pop_front() {
        if found {
            break;
        }
        let img = f.image_of_table(&state);
        for &oi in hosts {
            let q = &l.objects[oi];
            if !img.is_subset_of(q) {
                continue;
            }
            let qi = f.sub_index(q).expect("linking object is a subgroup of S");
            for (ai, alpha) in f.aut(qi).iter().enumerate() {
                let next: MapTable = state
                    .iter()
                    .map(|&x| alpha[FusionSystem::pos_in(q, x)])
                    .collect();
                if parent.contains_key(&next) {
                    continue;
                }
                parent.insert(next.clone(), (state.clone(), oi, ai));
                if next == *table {
                    found = true;
                    continue 'bfs;
                }
                queue.push_back(next);
            }
        }
    }
    if !found {
        return Err(Error::FactorizationNotFound);
    }
    // walk back from the goal to the identity
    let mut rev: Vec<(MapTable, usize, usize)> = Vec::new();
    let mut cur = table.clone();
    while cur != start {
        let (prev, oi, ai) = parent[&cur].clone();
        rev.push((cur, oi, ai));
        cur = prev;
    }
    let mut steps = Vec::with_capacity(rev.len());
    let mut dom = src;
    for (state, oi, ai) in rev.into_iter().rev() {
        let qi = f.sub_index(&l.objects[oi]).expect("linking object");
        let aut = f.aut(qi)[ai].clone();
        let lift = l.lift_aut(oi, &aut).ok_or(Error::AxiomViolation {
            axiom: 'A',
            detail: "fusion automorphism has no lift in the linking system".into(),
        })?;
        let to = f
            .sub_index(&f.image_of_table(&state))
            .expect("image is a subgroup of S");
        steps.push(AlperinStep { host: qi, host_obj: oi, lift, aut, from: dom, to });
        dom = to;
    }
    Ok(AlperinDecomposition { src, steps })
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

    fn d8() -> FiniteGroup {
        FiniteGroup::from_generators(
            4,
            &[
                Perm::from_images(vec![1, 2, 3, 0]).unwrap(),
                Perm::from_images(vec![2, 1, 0, 3]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn a4() -> FiniteGroup {
        FiniteGroup::from_generators(
            4,
            &[
                Perm::from_images(vec![1, 0, 3, 2]).unwrap(),
                Perm::from_images(vec![1, 2, 0, 3]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn klein_kind(f: &FusionSystem, i: usize) -> bool {
        // order 4, exponent 2
        let s = &f.subs[i];
        s.order() == 4 && s.elems.iter().all(|&x| x == 0 || f.group.elem_order(x) == 2)
    }

    #[test]
    fn s4_fusion_on_d8() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        assert_eq!(f.s.order(), 8);
        assert_eq!(f.n_subs(), 10);
        // the two Klein subgroups: the normal one has Aut_F of order 6,
        // the non-normal one order 2
        let kleins: Vec<usize> = (0..10).filter(|&i| klein_kind(&f, i)).collect();
        assert_eq!(kleins.len(), 2);
        let mut aut_sizes: Vec<usize> = kleins.iter().map(|&i| f.aut(i).len()).collect();
        aut_sizes.sort();
        assert_eq!(aut_sizes, vec![2, 6]);
        let normal_klein = *kleins
            .iter()
            .find(|&&i| f.group.normalizer(&f.subs[i], &f.group.whole()).order() == 24)
            .unwrap();
        assert_eq!(f.aut(normal_klein).len(), 6);
        // F-centrics: C4, both Kleins, D8
        let centrics = f.centrics();
        assert_eq!(centrics.len(), 4);
        let orders: Vec<usize> = centrics.iter().map(|&i| f.subs[i].order()).collect();
        assert_eq!(orders, vec![4, 4, 4, 8]);
        // both Kleins are weakly closed; the C4 as well; reflection C2s are not
        assert!(f.is_weakly_closed(normal_klein));
        for &i in &kleins {
            assert!(f.is_weakly_closed(i));
        }
        let c2_conj: Vec<usize> = (0..10)
            .filter(|&i| f.subs[i].order() == 2 && !f.is_weakly_closed(i))
            .collect();
        assert!(!c2_conj.is_empty());
        // O_2(F) is the normal Klein subgroup, and F is constrained
        assert_eq!(f.o_p(), normal_klein);
        assert!(f.is_constrained());
    }

    #[test]
    fn trivial_fusion_on_d8() {
        let f = FusionSystem::new(d8(), 2).unwrap();
        assert_eq!(f.s.order(), 8);
        // fusion is controlled by inner automorphisms only; every subgroup
        // has Aut_F(P) = N_S(P)/C_S(P)
        for i in 0..f.n_subs() {
            let n = f.group.normalizer(&f.subs[i], &f.s).order();
            let c = f.group.centralizer(&f.subs[i].elems, &f.s).order();
            assert_eq!(f.aut(i).len(), n / c);
        }
        let centrics = f.centrics();
        let orders: Vec<usize> = centrics.iter().map(|&i| f.subs[i].order()).collect();
        assert_eq!(orders, vec![4, 4, 4, 8]);
        // O_2 of the trivial fusion system is S itself
        assert_eq!(f.o_p(), f.s_idx);
        assert!(f.is_constrained());
    }

    #[test]
    fn a4_fusion_on_v4() {
        let f = FusionSystem::new(a4(), 2).unwrap();
        assert_eq!(f.s.order(), 4);
        assert_eq!(f.n_subs(), 5);
        assert_eq!(f.aut(f.s_idx).len(), 3);
        // only V4 itself is centric; the three C2s are fused
        assert_eq!(f.centrics(), vec![f.s_idx]);
        let c2s: Vec<usize> = (0..5).filter(|&i| f.subs[i].order() == 2).collect();
        assert_eq!(c2s.len(), 3);
        for &i in &c2s {
            assert_eq!(f.f_conjugates(i).len(), 3);
            assert!(!f.is_weakly_closed(i));
        }
        assert_eq!(f.o_p(), f.s_idx);
        assert!(f.is_constrained());
        // Aut generators: one 3-cycle generates Aut_F(V4)
        assert_eq!(f.aut_generators(f.s_idx).len(), 1);
    }

    #[test]
    fn hom_sets_compose() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let n = f.n_subs();
        for src in 0..n {
            for mid in 0..n {
                for dst in 0..n {
                    for a in f.hom(src, mid) {
                        for b in f.hom(mid, dst) {
                            let c = f.compose_tables(src, mid, a, b);
                            assert!(
                                f.hom(src, dst).contains(&c),
                                "hom sets not closed under composition"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn witnesses_realize_tables() {
        let f = FusionSystem::new(a4(), 2).unwrap();
        for src in 0..f.n_subs() {
            for t in f.hom(src, f.s_idx) {
                let g = f.witness(src, t).unwrap();
                for (&x, &y) in f.subs[src].elems.iter().zip(t) {
                    assert_eq!(f.group.conj_idx(g, x), y);
                }
            }
        }
    }

    #[test]
    fn alperin_factorization_recomposes_every_morphism() {
        for group in [s4(), a4(), d8()] {
            let f = FusionSystem::new(group, 2).unwrap();
            let l = crate::linking::centric_linking_system(&f).unwrap();
            for src in 0..f.n_subs() {
                for t in f.hom(src, f.s_idx) {
                    let d = alperin_factorize(&f, &l, src, t).unwrap();
                    assert_eq!(d.recompose(&f), *t);
                    let mut dom = src;
                    for st in &d.steps {
                        assert!(f.is_centric(st.host));
                        assert_eq!(l.project(st.lift), st.aut);
                        assert_eq!(st.from, dom);
                        dom = st.to;
                    }
                }
            }
        }
    }

    #[test]
    fn alperin_inclusions_and_inner_morphisms() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let l = crate::linking::centric_linking_system(&f).unwrap();
        for src in 0..f.n_subs() {
            let d = alperin_factorize(&f, &l, src, &f.identity_table(src)).unwrap();
            assert!(d.steps.is_empty());
        }
        // conjugation by an element of S always factors in one step
        let mut inner_seen = 0;
        for src in 0..f.n_subs() {
            for &s_el in &f.s.elems {
                let t: MapTable = f.subs[src]
                    .elems
                    .iter()
                    .map(|&x| f.group.conj_idx(s_el, x))
                    .collect();
                if t == f.identity_table(src) {
                    continue;
                }
                let d = alperin_factorize(&f, &l, src, &t).unwrap();
                assert_eq!(d.steps.len(), 1);
                assert_eq!(d.recompose(&f), t);
                inner_seen += 1;
            }
        }
        assert!(inner_seen > 0);
    }

    #[test]
    fn alperin_rejects_non_morphisms() {
        let f = FusionSystem::new(s4(), 2).unwrap();
        let l = crate::linking::centric_linking_system(&f).unwrap();
        let v = (0..f.n_subs())
            .find(|&i| klein_kind(&f, i))
            .unwrap();
        let x = f.subs[v].elems[1];
        let table = vec![0, x, x, x];
        match alperin_factorize(&f, &l, v, &table) {
            Err(Error::NotFusionMorphism) => {}
            r => panic!("expected NotFusionMorphism, got {r:?}"),
        }
    }
}
