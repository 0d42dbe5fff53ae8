//! Finite permutation groups: element enumeration, multiplication by index,
//! subgroup lattices, local subgroups (normalizers, centralizers, centers),
//! transporters, and Sylow subgroups.
//!
//! Elements are stored sorted, so element indices are canonical for a given
//! generating set's closure; index 0 is always the identity. Groups here are
//! small (a few thousand elements at most), so most operations are direct
//! scans; the multiplication table is cached when it fits.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::perm::Perm;

/// Hard cap on group order during closure enumeration.
pub const GROUP_ORDER_BOUND: usize = 10_000;
/// Hard cap on the number of subgroups enumerated by `all_subgroups`.
pub const SUBGROUP_BOUND: usize = 1 << 10;
/// Multiplication tables are cached up to this order (memory: order^2 u32s).
const MUL_TABLE_MAX: usize = 1 << 10;

#[derive(Clone)]
pub struct FiniteGroup {
    pub degree: usize,
    /// all elements, lexicographically sorted by image vector; index 0 is e
    pub elems: Vec<Perm>,
    idx: HashMap<Perm, u32>,
    inv_table: Vec<u32>,
    mul_table: Option<Vec<u32>>,
}

/// A subgroup given by its sorted element indices in the parent group.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Subgroup {
    pub elems: Vec<u32>,
}

impl Subgroup {
    pub fn new(mut elems: Vec<u32>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        Subgroup { elems }
    }
    pub fn order(&self) -> usize {
        self.elems.len()
    }
    pub fn contains(&self, g: u32) -> bool {
        self.elems.binary_search(&g).is_ok()
    }
    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.elems.iter().all(|&g| other.contains(g))
    }
    pub fn trivial() -> Self {
        Subgroup { elems: vec![0] }
    }
}

impl FiniteGroup {
    pub fn from_generators(degree: usize, gens: &[Perm]) -> Result<Self> {
        for g in gens {
            if g.degree() != degree {
                return Err(Error::InvalidPermutation(format!(
                    "generator degree {} does not match group degree {degree}",
                    g.degree()
                )));
            }
        }
        let id = Perm::identity(degree);
        let mut seen: BTreeSet<Perm> = BTreeSet::new();
        seen.insert(id.clone());
        let mut queue: VecDeque<Perm> = VecDeque::new();
        queue.push_back(id);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = g.mul(&x);
                if !seen.contains(&y) {
                    if seen.len() >= GROUP_ORDER_BOUND {
                        return Err(Error::ClosureTooLarge { bound: GROUP_ORDER_BOUND });
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        let elems: Vec<Perm> = seen.into_iter().collect(); // BTreeSet yields sorted
        debug_assert!(elems[0].is_identity());
        let idx: HashMap<Perm, u32> = elems
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i as u32))
            .collect();
        let inv_table: Vec<u32> = elems.iter().map(|p| idx[&p.inv()]).collect();
        let n = elems.len();
        let mul_table = if n <= MUL_TABLE_MAX {
            let mut t = vec![0u32; n * n];
            for (i, a) in elems.iter().enumerate() {
                for (j, b) in elems.iter().enumerate() {
                    t[i * n + j] = idx[&a.mul(b)];
                }
            }
            Some(t)
        } else {
            None
        };
        Ok(FiniteGroup { degree, elems, idx, inv_table, mul_table })
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn idx_of(&self, p: &Perm) -> Option<u32> {
        self.idx.get(p).copied()
    }

    /// Index of elems[a] * elems[b] (b applied first).
    #[inline]
    pub fn mul_idx(&self, a: u32, b: u32) -> u32 {
        match &self.mul_table {
            Some(t) => t[a as usize * self.order() + b as usize],
            None => self.idx[&self.elems[a as usize].mul(&self.elems[b as usize])],
        }
    }

    #[inline]
    pub fn inv_idx(&self, a: u32) -> u32 {
        self.inv_table[a as usize]
    }

    /// g x g^-1
    #[inline]
    pub fn conj_idx(&self, g: u32, x: u32) -> u32 {
        self.mul_idx(self.mul_idx(g, x), self.inv_idx(g))
    }

    pub fn elem_order(&self, a: u32) -> u64 {
        let mut n = 1u64;
        let mut cur = a;
        while cur != 0 {
            cur = self.mul_idx(cur, a);
            n += 1;
        }
        n
    }

    /// Subgroup generated by the given element indices.
    pub fn closure(&self, seed: &[u32]) -> Subgroup {
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        seen.insert(0);
        let mut queue: VecDeque<u32> = VecDeque::new();
        queue.push_back(0);
        while let Some(x) = queue.pop_front() {
            for &g in seed {
                let y = self.mul_idx(g, x);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        Subgroup { elems: seen.into_iter().collect() }
    }

    /// Every subgroup, sorted by (order, elements) so indices are canonical.
    pub fn all_subgroups(&self) -> Result<Vec<Subgroup>> {
        self.subgroups_of(&self.whole())
    }

    /// Subgroups of a subgroup (as subgroups of self), found by closing each
    /// known subgroup against each element of `h` outside it.
    pub fn subgroups_of(&self, h: &Subgroup) -> Result<Vec<Subgroup>> {
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        seen.insert(vec![0]);
        let mut queue: VecDeque<Vec<u32>> = VecDeque::new();
        queue.push_back(vec![0]);
        while let Some(cur) = queue.pop_front() {
            for &g in &h.elems {
                if g == 0 || cur.binary_search(&g).is_ok() {
                    continue;
                }
                let mut seed = cur.clone();
                seed.push(g);
                let k = self.closure(&seed);
                if !seen.contains(&k.elems) {
                    if seen.len() >= SUBGROUP_BOUND {
                        return Err(Error::SubgroupBoundExceeded { bound: SUBGROUP_BOUND });
                    }
                    seen.insert(k.elems.clone());
                    queue.push_back(k.elems);
                }
            }
        }
        let mut subs: Vec<Subgroup> = seen.into_iter().map(|elems| Subgroup { elems }).collect();
        subs.sort_by_key(|s| (s.order(), s.elems.clone()));
        Ok(subs)
    }

    pub fn centralizer(&self, of: &[u32], within: &Subgroup) -> Subgroup {
        Subgroup {
            elems: within
                .elems
                .iter()
                .copied()
                .filter(|&g| of.iter().all(|&x| self.conj_idx(g, x) == x))
                .collect(),
        }
    }

    pub fn normalizer(&self, of: &Subgroup, within: &Subgroup) -> Subgroup {
        Subgroup {
            elems: within
                .elems
                .iter()
                .copied()
                .filter(|&g| of.elems.iter().all(|&x| of.contains(self.conj_idx(g, x))))
                .collect(),
        }
    }

    pub fn center_of(&self, h: &Subgroup) -> Subgroup {
        self.centralizer(&h.elems, h)
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { elems: (0..self.order() as u32).collect() }
    }

    /// {g in `within` : g P g^-1 <= Q}
    pub fn transporter(&self, p: &Subgroup, q: &Subgroup, within: &Subgroup) -> Vec<u32> {
        within
            .elems
            .iter()
            .copied()
            .filter(|&g| p.elems.iter().all(|&x| q.contains(self.conj_idx(g, x))))
            .collect()
    }

    pub fn conj_subgroup(&self, g: u32, p: &Subgroup) -> Subgroup {
        Subgroup::new(p.elems.iter().map(|&x| self.conj_idx(g, x)).collect())
    }

    /// Smallest normal subgroup of `h` with p-power quotient: the closure of
    /// all elements of `h` of order prime to p.
    pub fn p_prime_residual(&self, h: &Subgroup, p: u64) -> Subgroup {
        let seed: Vec<u32> = h
            .elems
            .iter()
            .copied()
            .filter(|&g| self.elem_order(g) % p != 0)
            .collect();
        self.closure(&seed)
    }

    /// Sylow p-subgroup by normalizer growth: while P is not yet full size,
    /// N(P)/P has order divisible by p, so some g in N(P) outside P has
    /// p-power order with <P, g> still a p-group.
    pub fn sylow(&self, p: u64) -> Result<Subgroup> {
        if p < 2 {
            return Err(Error::NotSylow { p, reason: "p must be a prime".into() });
        }
        let mut target: usize = 1;
        let mut n = self.order();
        while n % p as usize == 0 {
            n /= p as usize;
            target *= p as usize;
        }
        let mut cur = Subgroup::trivial();
        while cur.order() < target {
            let norm = self.normalizer(&cur, &self.whole());
            let mut grown = false;
            for &g in &norm.elems {
                if cur.contains(g) {
                    continue;
                }
                let o = self.elem_order(g);
                if !is_p_power(o, p) {
                    continue;
                }
                let mut seed = cur.elems.clone();
                seed.push(g);
                let k = self.closure(&seed);
                if is_p_power(k.order() as u64, p) {
                    cur = k;
                    grown = true;
                    break;
                }
            }
            if !grown {
                return Err(Error::NotSylow {
                    p,
                    reason: format!("stuck at order {}", cur.order()),
                });
            }
        }
        Ok(cur)
    }

    /// Left-coset representatives of `h` in `k` (h <= k), smallest index first
    /// per coset: k = union of r*h.
    pub fn coset_reps(&self, h: &Subgroup, k: &Subgroup) -> Vec<u32> {
        let mut reps = Vec::new();
        let mut covered = vec![false; self.order()];
        for &g in &k.elems {
            if !covered[g as usize] {
                reps.push(g);
                for &x in &h.elems {
                    covered[self.mul_idx(g, x) as usize] = true;
                }
            }
        }
        reps
    }

    /// Right-coset representatives of `h` in `k` (h <= k), smallest index
    /// first per coset: k = union of h*r.
    pub fn right_coset_reps(&self, h: &Subgroup, k: &Subgroup) -> Vec<u32> {
        let mut reps = Vec::new();
        let mut covered = vec![false; self.order()];
        for &g in &k.elems {
            if !covered[g as usize] {
                reps.push(g);
                for &x in &h.elems {
                    covered[self.mul_idx(x, g) as usize] = true;
                }
            }
        }
        reps
    }
}

pub fn is_p_power(mut n: u64, p: u64) -> bool {
    while n % p == 0 {
        n /= p;
    }
    n == 1
}
