//! Output schemas. Every command prints exactly one JSON document built from
//! these types; field order is the declaration order, collections are sorted,
//! so a re-run reproduces the output byte for byte.

use plfg_core::stable;
use serde::Serialize;

#[derive(Serialize)]
pub struct SubgroupInfo {
    pub index: usize,
    pub order: usize,
    pub automorphisms: usize,
    pub conjugates: Vec<usize>,
    pub centric: bool,
    pub weakly_closed: bool,
    pub normal: bool,
}

#[derive(Serialize)]
pub struct FusionInfo {
    pub group_order: usize,
    pub p: u64,
    pub sylow_order: usize,
    pub subgroups: Vec<SubgroupInfo>,
    pub radical_order: usize,
    pub constrained: bool,
}

#[derive(Serialize)]
pub struct CentricSubgroup {
    pub index: usize,
    pub order: usize,
    /// each element as the image list of its permutation
    pub elements: Vec<Vec<usize>>,
}

#[derive(Serialize)]
pub struct Centrics {
    pub centrics: Vec<CentricSubgroup>,
}

#[derive(Serialize)]
pub struct LinkingObject {
    pub order: usize,
    pub residual_order: usize,
}

#[derive(Serialize)]
pub struct LinkingBuild {
    pub objects: Vec<LinkingObject>,
    pub n_morphisms: usize,
    /// cyclic factors of the abelianized loop group
    pub loop_invariants: Vec<i64>,
    pub axioms_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom_failure: Option<String>,
}

#[derive(Serialize)]
pub struct BisetClassInfo {
    pub subgroup_order: usize,
    /// element indices of the subgroup K
    pub subgroup: Vec<u32>,
    /// images of the sorted elements of K under phi
    pub images: Vec<u32>,
    pub multiplicity: u64,
}

#[derive(Serialize)]
pub struct Characteristic {
    pub classes: Vec<BisetClassInfo>,
    pub size: u64,
    pub index: u64,
    pub index_mod_p: u64,
    pub f_generated: bool,
    pub left_stable: bool,
    pub right_stable: bool,
    pub index_prime_to_p: bool,
    pub fc_generated: bool,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct Degree {
    pub degree: usize,
    pub invariants: Vec<u64>,
    pub rank: usize,
}

#[derive(Serialize)]
pub struct Cohomology {
    pub degrees: Vec<Degree>,
}

#[derive(Serialize)]
pub struct StableDegree {
    pub degree: usize,
    /// cyclic factors of H^k of the Sylow subgroup
    pub ambient_invariants: Vec<u64>,
    pub invariants: Vec<u64>,
    /// coordinates of generators in the ambient factors
    pub generators: Vec<Vec<u64>>,
}

#[derive(Serialize)]
pub struct Stable {
    pub degrees: Vec<StableDegree>,
}

#[derive(Serialize)]
pub struct NerveDegree {
    pub degree: usize,
    pub chains: usize,
    pub invariants: Vec<u64>,
    pub rank: usize,
}

#[derive(Serialize)]
pub struct Nerve {
    pub degrees: Vec<NerveDegree>,
}

#[derive(Serialize)]
pub struct IdempotentDegree {
    pub degree: usize,
    pub index: u64,
    pub exponent: u64,
    pub image_invariants: Vec<u64>,
    pub stable_invariants: Vec<u64>,
    pub idempotent_law: bool,
    pub stable_contained: bool,
    pub identity_on_stable: bool,
    pub image_equals_stable: bool,
}

#[derive(Serialize)]
pub struct Idempotent {
    pub degrees: Vec<IdempotentDegree>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct MainDegree {
    pub degree: usize,
    pub nerve_invariants: Vec<u64>,
    pub stable_invariants: Vec<u64>,
    pub invariants_match: bool,
    pub comparison_injective: bool,
    pub comparison_onto_stable: bool,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct Main {
    pub filtration_layers: usize,
    pub degrees: Vec<MainDegree>,
    pub pass: bool,
}

pub fn main_report(rep: &stable::MainReport) -> Main {
    Main {
        filtration_layers: rep.filtration_layers,
        degrees: rep
            .degrees
            .iter()
            .map(|d| MainDegree {
                degree: d.degree,
                nerve_invariants: d.nerve_invariants.clone(),
                stable_invariants: d.stable_invariants.clone(),
                invariants_match: d.invariants_match,
                comparison_injective: d.comparison_injective,
                comparison_onto_stable: d.comparison_onto_stable,
                pass: d.pass(),
            })
            .collect(),
        pass: rep.all_pass(),
    }
}

#[derive(Serialize)]
pub struct ModuleShape {
    pub p: u64,
    pub e: u32,
    pub rank: usize,
}

#[derive(Serialize)]
pub struct VerifyTrivial {
    pub coefficients: ModuleShape,
    pub filtration_layers: usize,
    pub degrees: Vec<MainDegree>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct DeltaDegree {
    pub degree: usize,
    pub exponent: u64,
    pub squares_commute: bool,
    pub exact_at_mid: bool,
    pub exact_at_quo: bool,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct Delta {
    /// orders of the three terms of the extension, sub to quotient
    pub term_orders: Vec<u64>,
    pub degrees: Vec<DeltaDegree>,
    pub pass: bool,
}

pub fn delta_report(term_orders: Vec<u64>, rep: &stable::DeltaReport) -> Delta {
    Delta {
        term_orders,
        degrees: rep
            .degrees
            .iter()
            .map(|d| DeltaDegree {
                degree: d.degree,
                exponent: d.exponent,
                squares_commute: d.squares_commute,
                exact_at_mid: d.exact_at_mid,
                exact_at_quo: d.exact_at_quo,
                pass: d.pass(),
            })
            .collect(),
        pass: rep.all_pass(),
    }
}

#[derive(Serialize)]
pub struct ConjectureDegree {
    pub degree: usize,
    pub stable_invariants: Vec<u64>,
    pub image_invariants: Vec<u64>,
    pub alt_image_invariants: Vec<u64>,
    pub image_matches_stable: bool,
    pub choices_agree: bool,
}

#[derive(Serialize)]
pub struct Conjecture {
    pub degrees: Vec<ConjectureDegree>,
    /// true when the idempotent image matched the stable elements in every
    /// degree; reported as an observation, not a theorem
    pub observed_match: bool,
}

pub fn conjecture_report(rep: &stable::ConjectureReport) -> Conjecture {
    Conjecture {
        observed_match: rep
            .degrees
            .iter()
            .all(|d| d.image_matches_stable && d.choices_agree),
        degrees: rep
            .degrees
            .iter()
            .map(|d| ConjectureDegree {
                degree: d.degree,
                stable_invariants: d.stable_invariants.clone(),
                image_invariants: d.image_invariants.clone(),
                alt_image_invariants: d.alt_image_invariants.clone(),
                image_matches_stable: d.image_matches_stable,
                choices_agree: d.choices_agree,
            })
            .collect(),
    }
}
