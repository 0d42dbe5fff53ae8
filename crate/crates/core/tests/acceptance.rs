//! Acceptance checks, one test per criterion. Each test makes exact
//! comparisons only, enforces its wall-clock budget, and prints a single
//! `ACCEPTANCE n: PASS` line when it gets through.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use plfg_core::biset::{
    all_classes, characteristic_checks, characteristic_from_group, compose_classes,
    decompose_biset, explicit_from_class, explicit_product,
};
use plfg_core::cohomology::{res_map, transfer_map, BarComplex, CoefModule, Flavor};
use plfg_core::fusion::FusionSystem;
use plfg_core::linking::{centric_linking_system, LocalSystem};
use plfg_core::quotient::QMap;
use plfg_core::stable::{
    characteristic_idempotent, omega_endomorphism, stable_elements, verify_delta_functor,
    verify_main, verify_unipotent, SesLocal,
};
use plfg_core::zpe::{Mat, Zpe};
use plfg_core::{FiniteGroup, Perm};

fn group(degree: usize, gens: &[Vec<usize>]) -> FiniteGroup {
    let perms: Vec<Perm> = gens
        .iter()
        .map(|v| Perm::from_images(v.clone()).unwrap())
        .collect();
    FiniteGroup::from_generators(degree, &perms).unwrap()
}

fn s4() -> FiniteGroup {
    group(4, &[vec![1, 2, 3, 0], vec![1, 0, 2, 3]])
}

fn d8() -> FiniteGroup {
    group(4, &[vec![1, 2, 3, 0], vec![2, 1, 0, 3]])
}

fn a4() -> FiniteGroup {
    group(4, &[vec![1, 0, 3, 2], vec![1, 2, 0, 3]])
}

fn c2() -> FiniteGroup {
    group(2, &[vec![1, 0]])
}

fn budget(name: &str, started: Instant, limit: Duration) {
    let used = started.elapsed();
    assert!(
        used <= limit,
        "{name} took {used:?}, over the {limit:?} budget"
    );
}

/// Composition of transitive biset classes agrees with forming the explicit
/// balanced product and decomposing it back into classes.
#[test]
fn acceptance_1_class_composition_matches_explicit_products() {
    let started = Instant::now();
    let g = d8();
    let whole = g.whole();
    let classes: Vec<_> = all_classes(&g, &whole, &whole)
        .unwrap()
        .into_iter()
        .filter(|c| c.k_order() >= 2)
        .collect();
    assert!(classes.len() >= 2, "need at least two classes to pair");
    let mut pairs = 0usize;
    for a in &classes {
        let ea = explicit_from_class(&g, &whole, &whole, a);
        for b in &classes {
            let eb = explicit_from_class(&g, &whole, &whole, b);
            let algebraic = compose_classes(&g, &whole, &whole, &whole, a, b).unwrap();
            let product = explicit_product(&ea, &eb);
            let geometric = decompose_biset(&g, &whole, &whole, &product).unwrap();
            assert_eq!(algebraic, geometric);
            pairs += 1;
        }
    }
    assert!(pairs >= 4);
    budget("criterion 1", started, Duration::from_secs(60));
    println!("ACCEPTANCE 1: PASS");
}

/// The group itself, decomposed over its Sylow subgroup, is a characteristic
/// biset: all four conditions hold and the index is odd.
#[test]
fn acceptance_2_group_biset_is_characteristic() {
    let started = Instant::now();
    let f = FusionSystem::new(s4(), 2).unwrap();
    let omega = characteristic_from_group(&f).unwrap();
    let checks = characteristic_checks(&f, &omega).unwrap();
    assert!(checks.f_generated);
    assert!(checks.left_stable);
    assert!(checks.right_stable);
    assert!(checks.index_prime_to_p);
    assert!(checks.all_four());
    assert!(checks.fc_generated);
    let size = omega.size(f.s.order(), f.s.order());
    assert_eq!(size, 24);
    assert_eq!(size / f.s.order() as u128, 3, "index |Omega|/|S|");
    assert_eq!(checks.index_mod_p, 1, "the index is odd");
    budget("criterion 2", started, Duration::from_secs(60));
    println!("ACCEPTANCE 2: PASS");
}

fn all_vectors(m: u64, rank: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .iter()
            .flat_map(|v| {
                (0..m).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Bar cohomology sanity: the cyclic group of order 2, dihedral degree one,
/// degree zero as literal fixed points, and transfer-restriction composites.
#[test]
fn acceptance_3_bar_cohomology_oracles() {
    let started = Instant::now();
    let ring2 = Zpe::new(2, 1).unwrap();
    let ring4 = Zpe::new(2, 2).unwrap();

    // dim H^k(C2, F2) = 1 for k <= 3, with both flavors agreeing
    let c = c2();
    for flavor in [Flavor::Normalized, Flavor::Full] {
        let coef = CoefModule::trivial(ring2, 1, &c.whole());
        let bar = BarComplex::new(&c, c.whole(), coef, flavor);
        for k in 0..=3 {
            let h = bar.cohomology(k).unwrap();
            assert_eq!(h.rank(), 1, "H^{k}(C2, F2) with {flavor:?}");
            assert_eq!(h.orders, vec![2]);
        }
    }

    // dim H^1(D8, F2) = 2
    let d = d8();
    let bar_d = BarComplex::new(
        &d,
        d.whole(),
        CoefModule::trivial(ring2, 1, &d.whole()),
        Flavor::Normalized,
    );
    assert_eq!(bar_d.cohomology(1).unwrap().rank(), 2);

    // H^0(P, M) = M^P element by element, over every centric subgroup of the
    // two running fusion systems, for trivial and sign coefficients
    for g in [s4(), a4()] {
        let f = FusionSystem::new(g, 2).unwrap();
        let mut modules = vec![
            CoefModule::trivial(ring2, 1, &f.group.whole()),
            CoefModule::trivial(ring4, 1, &f.group.whole()),
        ];
        if f.group.order() == 24 {
            // sign representation on Z/4: both listed generators are odd
            let r = &f.group.elems;
            let gens: Vec<(u32, Mat)> = (0..r.len() as u32)
                .filter(|&i| {
                    let p = &r[i as usize];
                    p.img == vec![1, 2, 3, 0] || p.img == vec![1, 0, 2, 3]
                })
                .map(|i| (i, Mat::from_rows(ring4, 1, vec![vec![3]])))
                .collect();
            modules.push(
                CoefModule::from_generators(&f.group, &f.group.whole(), ring4, 1, &gens).unwrap(),
            );
        }
        for coef in &modules {
            for &ci in &f.centrics() {
                let sub = &f.subs[ci];
                let local = coef.restrict(sub);
                let bar = BarComplex::new(&f.group, sub.clone(), local.clone(), Flavor::Normalized);
                let h0 = bar.cohomology(0).unwrap();
                for v in all_vectors(local.ring.m, 1) {
                    let fixed = sub.elems.iter().all(|&e| local.act(e).apply(&v) == v);
                    assert_eq!(h0.contains(&v), fixed, "H^0 vs fixed points at {v:?}");
                }
            }
        }
    }

    // tr o res = [Q : P] id on every computed cohomology group
    for g in [s4(), a4()] {
        let f = FusionSystem::new(g, 2).unwrap();
        let modules = [
            CoefModule::trivial(ring2, 1, &f.group.whole()),
            CoefModule::trivial(ring4, 1, &f.group.whole()),
        ];
        for coef in &modules {
            let top = BarComplex::new(
                &f.group,
                f.s.clone(),
                coef.restrict(&f.s),
                Flavor::Normalized,
            );
            for &ci in &f.centrics() {
                let sub = &f.subs[ci];
                let small = BarComplex::new(
                    &f.group,
                    sub.clone(),
                    coef.restrict(sub),
                    Flavor::Normalized,
                );
                let reps = f.group.right_coset_reps(sub, &f.s);
                let index = (f.s.order() / sub.order()) as u64;
                for k in 0..=2 {
                    let h_top = top.cohomology(k).unwrap();
                    let h_sub = small.cohomology(k).unwrap();
                    let res = res_map(&top, &small, k, &h_top, &h_sub).unwrap();
                    let tr = transfer_map(&top, &small, &reps, k, &h_sub, &h_top).unwrap();
                    let expected = QMap::identity(2, h_top.orders.clone()).scale(index);
                    assert_eq!(tr.compose(&res), expected, "tr o res at degree {k}");
                }
            }
        }
    }
    budget("criterion 3", started, Duration::from_secs(120));
    println!("ACCEPTANCE 3: PASS");
}

/// With constant mod-2 coefficients, nerve cohomology matches the stable
/// elements degree by degree for the two running fusion systems, and degree
/// one has the size of Hom(G, C2).
#[test]
fn acceptance_4_nerve_matches_stable_elements() {
    let started = Instant::now();
    let ring = Zpe::new(2, 1).unwrap();
    for (g, hom_to_c2_dim) in [(s4(), 1), (a4(), 0)] {
        let f = FusionSystem::new(g, 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        let rho = LocalSystem::trivial(&l, ring, 1);
        let rep = verify_main(&f, &l, &rho, 2).unwrap();
        assert_eq!(rep.degrees.len(), 3);
        for d in &rep.degrees {
            assert_eq!(d.nerve_invariants, d.stable_invariants, "degree {}", d.degree);
            assert!(d.invariants_match);
            assert!(d.comparison_injective);
            assert!(d.comparison_onto_stable);
        }
        assert!(rep.all_pass());
        assert_eq!(
            rep.degrees[1].stable_invariants.len(),
            hom_to_c2_dim,
            "dim H^1 = dim Hom(G, C2)"
        );
    }
    budget("criterion 4", started, Duration::from_secs(600));
    println!("ACCEPTANCE 4: PASS");
}

/// On a p-group with its trivial fusion, a nontrivial unipotent twist through
/// the loop functional still satisfies the nerve-versus-stable comparison;
/// the one-object fallback is not needed because the functional exists.
#[test]
fn acceptance_5_unipotent_twist_over_trivial_fusion() {
    let started = Instant::now();
    let rep = verify_unipotent(&d8(), 2, 2).unwrap();
    assert!(!rep.used_fallback, "the loop functional mod 2 is nonzero");
    assert!(rep.twist.iter().any(|&c| c != 0), "the twist is nontrivial");
    assert_eq!(rep.main.degrees.len(), 3);
    for d in &rep.main.degrees {
        assert!(d.invariants_match);
        assert!(d.comparison_injective, "comparison injects at {}", d.degree);
        assert!(
            d.comparison_onto_stable,
            "comparison lands on the stable part at {}",
            d.degree
        );
    }
    assert!(rep.main.all_pass());
    budget("criterion 5", started, Duration::from_secs(900));
    println!("ACCEPTANCE 5: PASS");
}

/// The endomorphism of the characteristic biset: its normalization is an
/// idempotent, the stable part sits inside the image and is fixed pointwise,
/// and for constant coefficients the image is exactly the stable part.
#[test]
fn acceptance_6_characteristic_idempotent_laws() {
    let started = Instant::now();
    let f = FusionSystem::new(s4(), 2).unwrap();
    let l = centric_linking_system(&f).unwrap();
    let omega = characteristic_from_group(&f).unwrap();
    let trivial2 = LocalSystem::trivial(&l, Zpe::new(2, 1).unwrap(), 1);
    let trivial4 = LocalSystem::trivial(&l, Zpe::new(2, 2).unwrap(), 1);
    let (unipotent, chi) = LocalSystem::unipotent(&l, 2)
        .unwrap()
        .expect("the loop functional mod 2 is nonzero here");
    assert!(chi.iter().any(|&c| c != 0));
    for (rho, constant) in [(&trivial2, true), (&trivial4, true), (&unipotent, false)] {
        for k in 0..=2 {
            let om = omega_endomorphism(&omega, &f, &l, rho, k).unwrap();
            let idem = characteristic_idempotent(&om).unwrap();
            let st = stable_elements(&f, &l, rho, k).unwrap();
            assert_eq!(idem.map.compose(&idem.map), idem.map, "idempotent law");
            assert!(
                st.gens.iter().all(|g| idem.image.contains(g)),
                "stable classes lie in the image"
            );
            let normalized = om.map.scale(om.scalar);
            assert!(
                st.gens.iter().all(|g| normalized.apply(g) == *g),
                "the normalized endomorphism fixes stable classes"
            );
            if constant {
                assert_eq!(idem.image, st.form, "image equals stable part");
            }
        }
    }
    budget("criterion 6", started, Duration::from_secs(600));
    println!("ACCEPTANCE 6: PASS");
}

/// The idempotents commute with the maps of the mod-2 extension
/// Z/2 -> Z/4 -> Z/2 and the induced image sequence is exact.
#[test]
fn acceptance_7_idempotents_respect_the_connecting_sequence() {
    let started = Instant::now();
    let f = FusionSystem::new(d8(), 2).unwrap();
    let l = centric_linking_system(&f).unwrap();
    let omega = characteristic_from_group(&f).unwrap();
    let rp = Zpe::new(2, 1).unwrap();
    let rp2 = Zpe::new(2, 2).unwrap();
    let ses = SesLocal::new(
        &l,
        LocalSystem::trivial(&l, rp, 1),
        LocalSystem::trivial(&l, rp2, 1),
        LocalSystem::trivial(&l, rp, 1),
        QMap::new(2, vec![2], vec![4], vec![2]).unwrap(),
        QMap::new(2, vec![4], vec![2], vec![1]).unwrap(),
    )
    .unwrap();
    let rep = verify_delta_functor(&omega, &f, &l, &ses, 2).unwrap();
    assert_eq!(rep.degrees.len(), 3);
    for d in &rep.degrees {
        assert!(d.squares_commute, "squares commute at degree {}", d.degree);
        assert!(d.exact_at_mid, "exact at the middle at degree {}", d.degree);
        assert!(d.exact_at_quo, "exact at the quotient at degree {}", d.degree);
    }
    assert!(rep.all_pass());
    budget("criterion 7", started, Duration::from_secs(300));
    println!("ACCEPTANCE 7: PASS");
}

/// Linking systems of the running examples satisfy the three axioms, and the
/// projection to the fusion system is surjective with fibers that are exactly
/// the orbits of precomposition by central elements, all of one size.
#[test]
fn acceptance_8_linking_axioms_and_projection_fibers() {
    let started = Instant::now();
    for g in [s4(), a4(), d8()] {
        let f = FusionSystem::new(g, 2).unwrap();
        let l = centric_linking_system(&f).unwrap();
        l.verify_axioms(&f).unwrap();
        for (oi, p_sub) in l.objects.iter().enumerate() {
            let cs = f.group.centralizer(&p_sub.elems, &f.s);
            let fi = f.sub_index(p_sub).unwrap();
            for (oj, q_sub) in l.objects.iter().enumerate() {
                let fj = f.sub_index(q_sub).unwrap();
                let mut fibers: BTreeMap<Vec<u32>, BTreeSet<u32>> = BTreeMap::new();
                for m in l.mors_between(oi, oj) {
                    fibers.entry(l.project(m)).or_default().insert(m);
                }
                let images: BTreeSet<Vec<u32>> = fibers.keys().cloned().collect();
                let homs: BTreeSet<Vec<u32>> = f.hom(fi, fj).iter().cloned().collect();
                assert_eq!(images, homs, "projection covers the fusion morphisms");
                if fibers.is_empty() {
                    continue;
                }
                let sizes: BTreeSet<usize> = fibers.values().map(|v| v.len()).collect();
                assert_eq!(sizes.len(), 1, "fiber sizes are uniform");
                for fiber in fibers.values() {
                    let &m0 = fiber.iter().next().unwrap();
                    let orbit: BTreeSet<u32> = cs
                        .elems
                        .iter()
                        .map(|&z| {
                            let dz = l.delta(oi, oi, z).expect("central elements normalize");
                            l.comp(m0, dz).expect("composable by construction")
                        })
                        .collect();
                    assert_eq!(&orbit, fiber, "fibers are centralizer orbits");
                }
            }
        }
    }
    budget("criterion 8", started, Duration::from_secs(60));
    println!("ACCEPTANCE 8: PASS");
}
