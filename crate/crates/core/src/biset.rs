//! Left-free bisets as twisted-diagonal classes.
//!
//! A transitive left-free (G,H)-biset is the quotient of G x H by a graph
//! Delta(K,phi) = {(k, phi(k))} for a subgroup K <= G and an injective
//! homomorphism phi: K -> H, and two such bisets are isomorphic exactly when
//! the graphs are (G x H)-conjugate. Classes here store the minimal sorted
//! graph over that conjugacy orbit, so multisets of classes compare by
//! ordinary equality. G and H are always subgroups of one ambient permutation
//! group, and all arithmetic happens in its element indices.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fusion::{FusionSystem, MapTable};
use crate::group::{FiniteGroup, Subgroup};

/// A conjugacy class of twisted diagonals Delta(K, phi) <= G x H, stored as
/// the canonical (minimal) sorted pair list over the orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BisetClass {
    delta: Vec<(u32, u32)>,
}

impl Ord for BisetClass {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.delta.len(), &self.delta).cmp(&(other.delta.len(), &other.delta))
    }
}

impl PartialOrd for BisetClass {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl BisetClass {
    /// The class of the graph of phi: K -> H, where phi lists the images of
    /// the sorted elements of K. Validates that phi is an injective
    /// homomorphism from a subgroup of `left` into `right`.
    pub fn new(
        g: &FiniteGroup,
        left: &Subgroup,
        right: &Subgroup,
        k: &Subgroup,
        phi: &MapTable,
    ) -> Result<Self> {
        if !k.is_subset_of(left) {
            return Err(Error::InvalidInput("biset class: K is not inside the left group".into()));
        }
        if phi.len() != k.order() {
            return Err(Error::InvalidInput("biset class: table length != |K|".into()));
        }
        if phi.iter().any(|y| right.elems.binary_search(y).is_err()) {
            return Err(Error::InvalidInput("biset class: image leaves the right group".into()));
        }
        let mut dedup = phi.clone();
        dedup.sort_unstable();
        dedup.dedup();
        if dedup.len() != phi.len() {
            return Err(Error::InvalidInput("biset class: map is not injective".into()));
        }
        for (i, &x) in k.elems.iter().enumerate() {
            for (j, &y) in k.elems.iter().enumerate() {
                let xy = g.mul_idx(x, y);
                let pos = k
                    .elems
                    .binary_search(&xy)
                    .map_err(|_| Error::InvalidInput("biset class: K is not closed".into()))?;
                if phi[pos] != g.mul_idx(phi[i], phi[j]) {
                    return Err(Error::InvalidInput("biset class: map is not a homomorphism".into()));
                }
            }
        }
        let pairs: Vec<(u32, u32)> = k.elems.iter().copied().zip(phi.iter().copied()).collect();
        Ok(BisetClass { delta: canonical_graph(g, left, right, &pairs) })
    }

    /// [S, id] over (S, S).
    pub fn identity(g: &FiniteGroup, s: &Subgroup) -> Self {
        Self::new(g, s, s, s, &s.elems).expect("identity graph is a class")
    }

    pub fn k_order(&self) -> usize {
        self.delta.len()
    }

    /// The subgroup K of the canonical representative, sorted.
    pub fn k_elems(&self) -> Vec<u32> {
        self.delta.iter().map(|p| p.0).collect()
    }

    /// Images of the sorted elements of K under the canonical phi.
    pub fn phi_table(&self) -> MapTable {
        self.delta.iter().map(|p| p.1).collect()
    }

    /// |G|·|H|/|K|, the size of any biset in the class.
    pub fn size(&self, left_ord: usize, right_ord: usize) -> u128 {
        (left_ord as u128) * (right_ord as u128) / (self.delta.len() as u128)
    }
}

/// Minimal sorted conjugate of a graph under (u, v) in left x right.
fn canonical_graph(
    g: &FiniteGroup,
    left: &Subgroup,
    right: &Subgroup,
    pairs: &[(u32, u32)],
) -> Vec<(u32, u32)> {
    let mut best: Option<Vec<(u32, u32)>> = None;
    for &u in &left.elems {
        for &v in &right.elems {
            let mut cand: Vec<(u32, u32)> = pairs
                .iter()
                .map(|&(a, b)| (g.conj_idx(u, a), g.conj_idx(v, b)))
                .collect();
            cand.sort_unstable();
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.expect("left and right groups are nonempty")
}

/// A finite left-free biset as a multiset of transitive classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Biset {
    pub classes: BTreeMap<BisetClass, u64>,
}

impl Biset {
    pub fn from_class(c: BisetClass) -> Self {
        let mut b = Biset::default();
        b.add(c, 1);
        b
    }

    pub fn add(&mut self, c: BisetClass, mult: u64) {
        if mult > 0 {
            *self.classes.entry(c).or_insert(0) += mult;
        }
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Total number of elements: sum of mult·|G|·|H|/|K|.
    pub fn size(&self, left_ord: usize, right_ord: usize) -> u128 {
        self.classes
            .iter()
            .map(|(c, &m)| m as u128 * c.size(left_ord, right_ord))
            .sum()
    }

    pub fn scaled(&self, m: u64) -> Biset {
        let mut out = Biset::default();
        for (c, &mult) in &self.classes {
            out.add(c.clone(), mult * m);
        }
        out
    }
}

/// Double-coset composition of a class over (left, mid) with one over
/// (mid, right):
///   [K,phi] o [L,psi] = sum over x in phi(K)\mid/L of
///     [phi^-1(phi(K) ∩ xLx^-1), psi ∘ c_{x^-1} ∘ phi].
pub fn compose_classes(
    g: &FiniteGroup,
    left: &Subgroup,
    mid: &Subgroup,
    right: &Subgroup,
    a: &BisetClass,
    b: &BisetClass,
) -> Result<Biset> {
    for &(x, y) in &a.delta {
        if !left.contains(x) || !mid.contains(y) {
            return Err(Error::GroupMismatch);
        }
    }
    for &(x, y) in &b.delta {
        if !mid.contains(x) || !right.contains(y) {
            return Err(Error::GroupMismatch);
        }
    }
    let ka = a.k_elems();
    let pa = a.phi_table();
    let lb = b.k_elems();
    let psi = b.phi_table();
    let img: Vec<u32> = {
        let mut v = pa.clone();
        v.sort_unstable();
        v
    };
    let mut seen = vec![false; mid.order()];
    let mut out = Biset::default();
    for (pos, &x) in mid.elems.iter().enumerate() {
        if seen[pos] {
            continue;
        }
        // mark the double coset img·x·L
        for &i in &img {
            let ix = g.mul_idx(i, x);
            for &l in &lb {
                let y = g.mul_idx(ix, l);
                seen[mid.elems.binary_search(&y).expect("product stays in mid")] = true;
            }
        }
        let xinv = g.inv_idx(x);
        let mut kk: Vec<u32> = Vec::new();
        let mut tt: Vec<u32> = Vec::new();
        for (i, &u) in ka.iter().enumerate() {
            let w = g.mul_idx(g.mul_idx(xinv, pa[i]), x);
            if let Ok(p) = lb.binary_search(&w) {
                kk.push(u);
                tt.push(psi[p]);
            }
        }
        out.add(BisetClass::new(g, left, right, &Subgroup::new(kk), &tt)?, 1);
    }
    Ok(out)
}

/// Bilinear extension of compose_classes to multisets.
pub fn compose(
    g: &FiniteGroup,
    left: &Subgroup,
    mid: &Subgroup,
    right: &Subgroup,
    a: &Biset,
    b: &Biset,
) -> Result<Biset> {
    let mut out = Biset::default();
    for (ca, &ma) in &a.classes {
        for (cb, &mb) in &b.classes {
            let part = compose_classes(g, left, mid, right, ca, cb)?;
            for (c, m) in part.classes {
                out.add(c, m * ma * mb);
            }
        }
    }
    Ok(out)
}

/// A finite set with tabulated left/right actions of two subgroups; table
/// rows are indexed by position in the subgroup's sorted element list.
#[derive(Clone, Debug)]
pub struct ExplicitBiset {
    pub n: usize,
    pub left: Vec<Vec<u32>>,
    pub right: Vec<Vec<u32>>,
}

impl ExplicitBiset {
    fn validate(&self, g: &FiniteGroup, left: &Subgroup, right: &Subgroup) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(format!("explicit biset: {msg}")));
        if self.left.len() != left.order() || self.right.len() != right.order() {
            return bad("table count != group order");
        }
        for t in self.left.iter().chain(&self.right) {
            if t.len() != self.n {
                return bad("table length != set size");
            }
            let mut hit = vec![false; self.n];
            for &y in t {
                if (y as usize) >= self.n || hit[y as usize] {
                    return bad("table row is not a permutation");
                }
                hit[y as usize] = true;
            }
        }
        // left action: (st)·x = s·(t·x)
        for i in 0..left.order() {
            for j in 0..left.order() {
                let prod = g.mul_idx(left.elems[i], left.elems[j]);
                let pp = left.elems.binary_search(&prod).expect("subgroup closed");
                for x in 0..self.n {
                    if self.left[i][self.left[j][x] as usize] != self.left[pp][x] {
                        return bad("left tables do not define an action");
                    }
                }
            }
        }
        // right action: x·(ts) = (x·t)·s
        for i in 0..right.order() {
            for j in 0..right.order() {
                let prod = g.mul_idx(right.elems[j], right.elems[i]);
                let pp = right.elems.binary_search(&prod).expect("subgroup closed");
                for x in 0..self.n {
                    if self.right[i][self.right[j][x] as usize] != self.right[pp][x] {
                        return bad("right tables do not define an action");
                    }
                }
            }
        }
        for lt in &self.left {
            for rt in &self.right {
                for x in 0..self.n {
                    if lt[rt[x] as usize] != rt[lt[x] as usize] {
                        return bad("left and right actions do not commute");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Decompose a finite (left, right)-biset into transitive classes.
///
/// Errors: InvalidInput if the tables are not commuting group actions;
/// NotLeftFree if some left stabilizer is nontrivial; NotClassifiable if an
/// orbit has a nontrivial right stabilizer (its stabilizer in left x right is
/// then not the graph of a map).
pub fn decompose_biset(
    g: &FiniteGroup,
    left: &Subgroup,
    right: &Subgroup,
    x: &ExplicitBiset,
) -> Result<Biset> {
    x.validate(g, left, right)?;
    let n = x.n;
    // left-freeness
    for s in 1..left.order() {
        for e in 0..n {
            if x.left[s][e] as usize == e {
                return Err(Error::NotLeftFree { witness: e });
            }
        }
    }
    let mut visited = vec![false; n];
    let mut out = Biset::default();
    for e0 in 0..n {
        if visited[e0] {
            continue;
        }
        // orbit of the combined action
        let mut orbit = vec![e0];
        visited[e0] = true;
        let mut head = 0;
        while head < orbit.len() {
            let e = orbit[head];
            head += 1;
            for t in x.left.iter().chain(&x.right) {
                let f = t[e] as usize;
                if !visited[f] {
                    visited[f] = true;
                    orbit.push(f);
                }
            }
        }
        // right stabilizer of the base point must be trivial
        let right_stab = (0..right.order()).filter(|&h| x.right[h][e0] as usize == e0).count();
        if right_stab > 1 {
            return Err(Error::NotClassifiable);
        }
        // K = {k : k·e0 in e0·right}, phi(k) the unique matching h
        let mut kk: Vec<u32> = Vec::new();
        let mut tt: Vec<u32> = Vec::new();
        for (kpos, &k) in left.elems.iter().enumerate() {
            let target = x.left[kpos][e0];
            for (hpos, &h) in right.elems.iter().enumerate() {
                if x.right[hpos][e0] == target {
                    kk.push(k);
                    tt.push(h);
                    break;
                }
            }
        }
        let cls = BisetClass::new(g, left, right, &Subgroup::new(kk), &tt)?;
        debug_assert_eq!(orbit.len() as u128, cls.size(left.order(), right.order()));
        out.add(cls, 1);
    }
    Ok(out)
}

/// The transitive model biset (left x right)/Delta(K, phi) of a class.
/// Elements are canonical codes of pairs (a, b) under (ak, b) ~ (a, phi(k)b).
pub fn explicit_from_class(
    g: &FiniteGroup,
    left: &Subgroup,
    right: &Subgroup,
    c: &BisetClass,
) -> ExplicitBiset {
    let ka = c.k_elems();
    let phi = c.phi_table();
    let amb = g.order() as u64;
    let canon = |a: u32, b: u32| -> u64 {
        ka.iter()
            .enumerate()
            .map(|(i, &k)| {
                let a2 = g.mul_idx(a, g.inv_idx(k));
                let b2 = g.mul_idx(phi[i], b);
                a2 as u64 * amb + b2 as u64
            })
            .min()
            .expect("K is nonempty")
    };
    let codes: BTreeSet<u64> = left
        .elems
        .iter()
        .flat_map(|&a| right.elems.iter().map(move |&b| (a, b)))
        .map(|(a, b)| canon(a, b))
        .collect();
    let codes: Vec<u64> = codes.into_iter().collect();
    let pos = |code: u64| codes.binary_search(&code).expect("closed under the actions") as u32;
    let mut lt = Vec::with_capacity(left.order());
    for &s in &left.elems {
        lt.push(
            codes
                .iter()
                .map(|&code| {
                    let (a, b) = ((code / amb) as u32, (code % amb) as u32);
                    pos(canon(g.mul_idx(s, a), b))
                })
                .collect(),
        );
    }
    let mut rt = Vec::with_capacity(right.order());
    for &s in &right.elems {
        rt.push(
            codes
                .iter()
                .map(|&code| {
                    let (a, b) = ((code / amb) as u32, (code % amb) as u32);
                    pos(canon(a, g.mul_idx(b, s)))
                })
                .collect(),
        );
    }
    ExplicitBiset { n: codes.len(), left: lt, right: rt }
}

/// The product set (X x Y)/((x·h, y) ~ (x, h·y)) of an explicit (G,H)-biset
/// with an explicit (H,K)-biset, keeping the outer actions.
pub fn explicit_product(a: &ExplicitBiset, b: &ExplicitBiset) -> ExplicitBiset {
    assert_eq!(a.right.len(), b.left.len(), "middle groups must match");
    let n = a.n * b.n;
    let mut dsu: Vec<usize> = (0..n).collect();
    fn find(dsu: &mut Vec<usize>, mut i: usize) -> usize {
        while dsu[i] != i {
            dsu[i] = dsu[dsu[i]];
            i = dsu[i];
        }
        i
    }
    let enc = |x: usize, y: usize| x * b.n + y;
    for x in 0..a.n {
        for y in 0..b.n {
            for h in 0..a.right.len() {
                let p = find(&mut dsu, enc(a.right[h][x] as usize, y));
                let q = find(&mut dsu, enc(x, b.left[h][y] as usize));
                dsu[p] = q;
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut dsu, i)).collect();
    let mut reps: Vec<usize> = roots.clone();
    reps.sort_unstable();
    reps.dedup();
    let pos_of = |r: usize, reps: &[usize]| reps.binary_search(&r).unwrap() as u32;
    let left = a
        .left
        .iter()
        .map(|t| {
            reps.iter()
                .map(|&r| {
                    let (x, y) = (r / b.n, r % b.n);
                    let moved = enc(t[x] as usize, y);
                    pos_of(roots[moved], &reps)
                })
                .collect()
        })
        .collect();
    let right = b
        .right
        .iter()
        .map(|t| {
            reps.iter()
                .map(|&r| {
                    let (x, y) = (r / b.n, r % b.n);
                    let moved = enc(x, t[y] as usize);
                    pos_of(roots[moved], &reps)
                })
                .collect()
        })
        .collect();
    ExplicitBiset { n: reps.len(), left, right }
}

/// Brute-force search for an equivariant bijection between two explicit
/// bisets over the same pair of groups; used by decomposition oracles.
pub fn equivariant_isomorphic(a: &ExplicitBiset, b: &ExplicitBiset) -> bool {
    if a.n != b.n || a.left.len() != b.left.len() || a.right.len() != b.right.len() {
        return false;
    }
    if a.n == 0 {
        return true;
    }
    'cand: for m0 in 0..b.n {
        let mut map: Vec<Option<u32>> = vec![None; a.n];
        let mut hit = vec![false; b.n];
        map[0] = Some(m0 as u32);
        hit[m0] = true;
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            let mx = map[x].unwrap() as usize;
            for (ta, tb) in a.left.iter().zip(&b.left).chain(a.right.iter().zip(&b.right)) {
                let (fx, fmx) = (ta[x] as usize, tb[mx]);
                match map[fx] {
                    Some(v) if v == fmx => {}
                    Some(_) => continue 'cand,
                    None => {
                        if hit[fmx as usize] {
                            continue 'cand;
                        }
                        map[fx] = Some(fmx);
                        hit[fmx as usize] = true;
                        stack.push(fx);
                    }
                }
            }
        }
        if map.iter().all(|m| m.is_some()) {
            return true;
        }
        // not transitive: a bijection must match every orbit; fall back to
        // requiring transitive inputs, which is all the oracles use
        return false;
    }
    false
}

/// Every class [K, phi] over (left, right): all subgroups of `left`, all
/// injective homomorphisms onto subgroups of `right`, deduplicated.
pub fn all_classes(g: &FiniteGroup, left: &Subgroup, right: &Subgroup) -> Result<Vec<BisetClass>> {
    let mut out: BTreeSet<BisetClass> = BTreeSet::new();
    for k in g.subgroups_of(left)? {
        for m in g.subgroups_of(right)? {
            if m.order() != k.order() {
                continue;
            }
            for iso in isomorphisms_between(g, &k, &m) {
                out.insert(BisetClass::new(g, left, right, &k, &iso)?);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// All isomorphisms a -> b as image tables on the sorted elements of a,
/// found by backtracking with element-order matching and partial
/// multiplication checks.
pub fn isomorphisms_between(g: &FiniteGroup, a: &Subgroup, b: &Subgroup) -> Vec<MapTable> {
    if a.order() != b.order() {
        return Vec::new();
    }
    let n = a.order();
    let mut out = Vec::new();
    let mut table: Vec<u32> = vec![u32::MAX; n];
    let mut used = vec![false; n];
    // product position table for a, to check partial homomorphism constraints
    let prod: Vec<usize> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| (i, j))
        })
        .map(|(i, j)| {
            let xy = g.mul_idx(a.elems[i], a.elems[j]);
            a.elems.binary_search(&xy).expect("subgroup closed")
        })
        .collect();
    fn rec(
        g: &FiniteGroup,
        a: &Subgroup,
        b: &Subgroup,
        prod: &[usize],
        table: &mut Vec<u32>,
        used: &mut Vec<bool>,
        depth: usize,
        out: &mut Vec<MapTable>,
    ) {
        let n = a.order();
        if depth == n {
            out.push(table.clone());
            return;
        }
        for (bi, &y) in b.elems.iter().enumerate() {
            if used[bi] || g.elem_order(a.elems[depth]) != g.elem_order(y) {
                continue;
            }
            table[depth] = y;
            let ok = (0..=depth).all(|j| {
                let p1 = prod[depth * n + j];
                let p2 = prod[j * n + depth];
                (p1 > depth || {
                    let lhs = g.mul_idx(table[depth], table[j]);
                    table[p1] == lhs
                }) && (p2 > depth || {
                    let lhs = g.mul_idx(table[j], table[depth]);
                    table[p2] == lhs
                })
            });
            if ok {
                used[bi] = true;
                rec(g, a, b, prod, table, used, depth + 1, out);
                used[bi] = false;
            }
        }
        table[depth] = u32::MAX;
    }
    rec(g, a, b, &prod, &mut table, &mut used, 0, &mut out);
    out
}

/// The ambient group as an (S,S)-biset under multiplication, decomposed into
/// classes. For S Sylow in G this is an F-characteristic biset.
pub fn characteristic_from_group(f: &FusionSystem) -> Result<Biset> {
    let g = &f.group;
    let s = &f.s;
    let n = g.order();
    let eb = ExplicitBiset {
        n,
        left: s
            .elems
            .iter()
            .map(|&se| (0..n as u32).map(|x| g.mul_idx(se, x)).collect())
            .collect(),
        right: s
            .elems
            .iter()
            .map(|&se| (0..n as u32).map(|x| g.mul_idx(x, se)).collect())
            .collect(),
    };
    decompose_biset(g, s, s, &eb)
}

/// Outcome of the four characteristic-biset conditions for an (S,S)-biset,
/// plus whether every constituent subgroup is centric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicReport {
    /// (a) every class [K, phi] has phi a fusion morphism
    pub f_generated: bool,
    /// (b) [P,phi] o Omega = [P,incl] o Omega for every P and phi: P -> S
    pub left_stable: bool,
    /// (c) Omega o [phi(P), phi^-1] = Omega o [P, id] for the same data
    pub right_stable: bool,
    /// (d) |Omega|/|S| is a unit mod p
    pub index_prime_to_p: bool,
    /// every constituent K is F-centric
    pub fc_generated: bool,
    pub index_mod_p: u64,
}

impl CharacteristicReport {
    pub fn all_four(&self) -> bool {
        self.f_generated && self.left_stable && self.right_stable && self.index_prime_to_p
    }
}

/// Run the four characteristic conditions on an (S,S)-biset.
pub fn characteristic_checks(f: &FusionSystem, omega: &Biset) -> Result<CharacteristicReport> {
    let g = &f.group;
    let s = &f.s;
    let mut f_generated = true;
    let mut fc_generated = true;
    for c in omega.classes.keys() {
        let k = Subgroup::new(c.k_elems());
        match f.sub_index(&k) {
            None => {
                f_generated = false;
                fc_generated = false;
            }
            Some(ki) => {
                if f.hom(ki, f.s_idx).binary_search(&c.phi_table()).is_err() {
                    f_generated = false;
                }
                if !f.is_centric(ki) {
                    fc_generated = false;
                }
            }
        }
    }
    let index = omega.size(s.order(), s.order()) / s.order() as u128;
    let index_mod_p = (index % f.p as u128) as u64;
    let mut left_stable = true;
    'left: for pi in 0..f.n_subs() {
        let p = &f.subs[pi];
        let incl = BisetClass::new(g, p, s, p, &f.identity_table(pi))?;
        let base = compose(g, p, s, s, &Biset::from_class(incl), omega)?;
        for t in f.hom(pi, f.s_idx) {
            let cls = BisetClass::new(g, p, s, p, t)?;
            if compose(g, p, s, s, &Biset::from_class(cls), omega)? != base {
                left_stable = false;
                break 'left;
            }
        }
    }
    let mut right_stable = true;
    'right: for pi in 0..f.n_subs() {
        let p = &f.subs[pi];
        let ident = BisetClass::new(g, s, p, p, &p.elems)?;
        let base = compose(g, s, s, p, omega, &Biset::from_class(ident))?;
        for t in f.hom(pi, f.s_idx) {
            let image = f.image_of_table(t);
            // invert t: images sorted, values the matching elements of P
            let mut pairs: Vec<(u32, u32)> = t
                .iter()
                .copied()
                .zip(p.elems.iter().copied())
                .collect();
            pairs.sort_unstable();
            let inv: MapTable = pairs.iter().map(|p| p.1).collect();
            let cls = BisetClass::new(g, s, p, &image, &inv)?;
            if compose(g, s, s, p, omega, &Biset::from_class(cls))? != base {
                right_stable = false;
                break 'right;
            }
        }
    }
    Ok(CharacteristicReport {
        f_generated,
        left_stable,
        right_stable,
        index_prime_to_p: index_mod_p != 0,
        fc_generated,
        index_mod_p,
    })
}

/// The (S,S)-classes [K, phi] with K containing subs[p0] and phi a fusion
/// morphism K -> S.
pub fn family_over(f: &FusionSystem, p0: usize) -> Result<Vec<BisetClass>> {
    let mut out: BTreeSet<BisetClass> = BTreeSet::new();
    for ki in 0..f.n_subs() {
        if !f.subs[p0].is_subset_of(&f.subs[ki]) {
            continue;
        }
        for t in f.hom(ki, f.s_idx) {
            out.insert(BisetClass::new(&f.group, &f.s, &f.s, &f.subs[ki], t)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Whether every pairwise composite of classes in the family over subs[p0]
/// has all constituents inside the family again. Guaranteed when subs[p0] is
/// normal in S and weakly closed.
pub fn family_composition_closed(f: &FusionSystem, p0: usize) -> Result<bool> {
    let fam = family_over(f, p0)?;
    let set: BTreeSet<&BisetClass> = fam.iter().collect();
    for a in &fam {
        for b in &fam {
            let comp = compose_classes(&f.group, &f.s, &f.s, &f.s, a, b)?;
            for c in comp.classes.keys() {
                if !set.contains(c) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
