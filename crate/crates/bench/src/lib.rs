//! Fixtures shared by the benchmarks: the degree-4 groups the benches
//! exercise, built from explicit generators.

use plfg_core::{FiniteGroup, Perm};

fn group(degree: usize, gens: &[Vec<usize>]) -> FiniteGroup {
    let perms: Vec<Perm> = gens
        .iter()
        .map(|v| Perm::from_images(v.clone()).unwrap())
        .collect();
    FiniteGroup::from_generators(degree, &perms).unwrap()
}

pub fn s4() -> FiniteGroup {
    group(4, &[vec![1, 2, 3, 0], vec![1, 0, 2, 3]])
}

pub fn d8() -> FiniteGroup {
    group(4, &[vec![1, 2, 3, 0], vec![2, 1, 0, 3]])
}
