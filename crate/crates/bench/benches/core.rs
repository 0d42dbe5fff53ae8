//! Benchmarks over the desk-scale examples: category construction, bar and
//! nerve cohomology, biset composition, and the characteristic idempotent.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use plfg_bench::{d8, s4};
use plfg_core::biset::{all_classes, characteristic_from_group, compose_classes};
use plfg_core::cohomology::{BarComplex, CoefModule, Flavor};
use plfg_core::fusion::FusionSystem;
use plfg_core::linking::{centric_linking_system, LocalSystem, NerveComplex};
use plfg_core::stable::{characteristic_idempotent, omega_endomorphism};
use plfg_core::zpe::Zpe;

fn bench_linking_build(c: &mut Criterion) {
    let f = FusionSystem::new(s4(), 2).unwrap();
    c.bench_function("linking_build_s4", |b| {
        b.iter(|| black_box(centric_linking_system(&f).unwrap().n_mors()))
    });
}

fn bench_bar_h2(c: &mut Criterion) {
    let g = d8();
    let ring = Zpe::new(2, 1).unwrap();
    c.bench_function("bar_h2_d8", |b| {
        b.iter(|| {
            let coef = CoefModule::trivial(ring, 1, &g.whole());
            let bar = BarComplex::new(&g, g.whole(), coef, Flavor::Normalized);
            black_box(bar.cohomology(2).unwrap().rank())
        })
    });
}

fn bench_nerve_h2(c: &mut Criterion) {
    let f = FusionSystem::new(s4(), 2).unwrap();
    let l = centric_linking_system(&f).unwrap();
    let ring = Zpe::new(2, 1).unwrap();
    let rho = LocalSystem::trivial(&l, ring, 1);
    let mut group = c.benchmark_group("nerve");
    group.sample_size(10);
    group.bench_function("nerve_h2_s4", |b| {
        b.iter(|| {
            let nerve = NerveComplex::new(&l, &rho, 2).unwrap();
            black_box(nerve.cohomology(2).unwrap().rank())
        })
    });
    group.finish();
}

fn bench_biset_composition(c: &mut Criterion) {
    let g = d8();
    let whole = g.whole();
    let classes: Vec<_> = all_classes(&g, &whole, &whole)
        .unwrap()
        .into_iter()
        .filter(|cl| cl.k_order() >= 2)
        .collect();
    c.bench_function("biset_composition_closure_d8", |b| {
        b.iter(|| {
            let mut total = 0u64;
            for a in &classes {
                for bcl in &classes {
                    let out = compose_classes(&g, &whole, &whole, &whole, a, bcl).unwrap();
                    total += out.n_classes() as u64;
                }
            }
            black_box(total)
        })
    });
}

fn bench_idempotent(c: &mut Criterion) {
    let f = FusionSystem::new(s4(), 2).unwrap();
    let l = centric_linking_system(&f).unwrap();
    let ring = Zpe::new(2, 1).unwrap();
    let rho = LocalSystem::trivial(&l, ring, 1);
    let omega = characteristic_from_group(&f).unwrap();
    let mut group = c.benchmark_group("idempotent");
    group.sample_size(20);
    group.bench_function("characteristic_idempotent_h1_s4", |b| {
        b.iter(|| {
            let om = omega_endomorphism(&omega, &f, &l, &rho, 1).unwrap();
            black_box(characteristic_idempotent(&om).unwrap().exponent)
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_linking_build,
    bench_bar_h2,
    bench_nerve_h2,
    bench_biset_composition,
    bench_idempotent
);
criterion_main!(benches);
