//! Input file formats. All three inputs are small JSON documents; parse
//! errors carry the file path plus serde's line/column diagnostics, and
//! semantic errors name the offending field.

use std::collections::BTreeMap;
use std::path::Path;

use plfg_core::cohomology::CoefModule;
use plfg_core::linking::{LinkingSystem, LocalSystem};
use plfg_core::zpe::{Mat, Zpe};
use plfg_core::{FiniteGroup, Perm};
use serde::Deserialize;

use crate::Failure;

/// A finite permutation group on `{0, .., degree-1}`:
/// `{"degree": 4, "generators": [[1,2,3,0],[1,0,2,3]]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub degree: usize,
    pub generators: Vec<Vec<usize>>,
}

/// A finite abelian p-group `(Z/p^e)^rank` with an optional linear action,
/// keyed by the index of the group generator that acts:
/// `{"p": 2, "e": 2, "rank": 1, "action": {"0": [[3]], "1": [[3]]}}`.
/// Matrices are row-major, entries mod p^e; a missing or empty `action`
/// means the trivial action.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    pub p: u64,
    pub e: u32,
    pub rank: usize,
    #[serde(default)]
    pub action: BTreeMap<String, Vec<Vec<u64>>>,
}

/// A local coefficient twist: the loop functional of the linking system
/// modulo `through`, composed with the powers of `matrix`:
/// `{"through": 2, "matrix": [[1,1],[0,1]]}`. The matrix must have order
/// dividing `through` over the module ring.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistSpec {
    pub through: u64,
    pub matrix: Vec<Vec<u64>>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// The closed group together with the generators as given, in file order,
/// so module actions can refer to generators by index.
pub struct LoadedGroup {
    pub group: FiniteGroup,
    pub gens: Vec<Perm>,
}

pub fn load_group(path: &Path) -> Result<LoadedGroup, Failure> {
    let spec: GroupSpec = read_json(path)?;
    if spec.degree == 0 || spec.degree > u16::MAX as usize {
        return Err(Failure::input(format!(
            "{}: degree {} out of range (need 1..={})",
            path.display(),
            spec.degree,
            u16::MAX
        )));
    }
    let mut gens = Vec::with_capacity(spec.generators.len());
    for (i, row) in spec.generators.iter().enumerate() {
        if row.len() != spec.degree {
            return Err(Failure::input(format!(
                "{}: generators[{i}] lists {} images, expected degree {}",
                path.display(),
                row.len(),
                spec.degree
            )));
        }
        let perm = Perm::from_images(row.clone())
            .map_err(|e| Failure::input(format!("{}: generators[{i}]: {e}", path.display())))?;
        gens.push(perm);
    }
    let group = FiniteGroup::from_generators(spec.degree, &gens)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(LoadedGroup { group, gens })
}

/// A module spec checked against the job prime, with the action matrices
/// resolved to group elements.
pub struct LoadedModule {
    pub ring: Zpe,
    pub rank: usize,
    /// (element index of the acting generator, its matrix)
    pub action: Vec<(u32, Mat)>,
}

pub fn load_module(
    path: &Path,
    job_p: u64,
    group: &FiniteGroup,
    gens: &[Perm],
) -> Result<LoadedModule, Failure> {
    let spec: ModuleSpec = read_json(path)?;
    if spec.p != job_p {
        return Err(Failure::input(format!(
            "{}: module is over p = {}, but the job uses p = {job_p}",
            path.display(),
            spec.p
        )));
    }
    if spec.e == 0 {
        return Err(Failure::input(format!(
            "{}: e must be at least 1",
            path.display()
        )));
    }
    if spec.rank == 0 {
        return Err(Failure::input(format!(
            "{}: rank must be at least 1",
            path.display()
        )));
    }
    let ring = Zpe::new(spec.p, spec.e)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let mut action = Vec::new();
    for (key, rows) in &spec.action {
        let gi: usize = key.parse().map_err(|_| {
            Failure::input(format!(
                "{}: action key {key:?} is not a generator index",
                path.display()
            ))
        })?;
        if gi >= gens.len() {
            return Err(Failure::input(format!(
                "{}: action key {key:?} exceeds the {} group generators",
                path.display(),
                gens.len()
            )));
        }
        let mat = parse_matrix(path, &format!("action[{key:?}]"), ring, spec.rank, rows)?;
        let idx = group
            .idx_of(&gens[gi])
            .expect("group generators index into their own closure");
        action.push((idx, mat));
    }
    Ok(LoadedModule {
        ring,
        rank: spec.rank,
        action,
    })
}

fn parse_matrix(
    path: &Path,
    field: &str,
    ring: Zpe,
    rank: usize,
    rows: &[Vec<u64>],
) -> Result<Mat, Failure> {
    if rows.len() != rank || rows.iter().any(|r| r.len() != rank) {
        return Err(Failure::input(format!(
            "{}: {field} must be a {rank}x{rank} matrix",
            path.display()
        )));
    }
    Ok(Mat::from_rows(ring, rank, rows.to_vec()))
}

impl LoadedModule {
    /// The module as coefficients for the whole group's cohomology.
    pub fn over_group(&self, group: &FiniteGroup) -> Result<CoefModule, Failure> {
        let whole = group.whole();
        if self.action.is_empty() {
            return Ok(CoefModule::trivial(self.ring, self.rank, &whole));
        }
        CoefModule::from_generators(group, &whole, self.ring, self.rank, &self.action)
            .map_err(Failure::Compute)
    }

    /// The module as constant coefficients on a linking system, twisted by
    /// `twist` when given. Fusion-side commands reject a group action here:
    /// those coefficients vary along the category, which is what the twist
    /// file describes.
    pub fn over_linking(
        &self,
        module_path: &Path,
        l: &LinkingSystem,
        twist: Option<(&Path, &TwistSpec)>,
    ) -> Result<LocalSystem, Failure> {
        if !self.action.is_empty() {
            return Err(Failure::input(format!(
                "{}: this command takes constant coefficients; describe a varying action with --twist",
                module_path.display()
            )));
        }
        match twist {
            None => Ok(LocalSystem::trivial(l, self.ring, self.rank)),
            Some((path, spec)) => {
                let mat = parse_matrix(path, "matrix", self.ring, self.rank, &spec.matrix)?;
                if spec.through == 0 {
                    return Err(Failure::input(format!(
                        "{}: through must be positive",
                        path.display()
                    )));
                }
                let chi = l.unipotent_functional(spec.through).ok_or_else(|| {
                    Failure::input(format!(
                        "{}: the linking system's loop group has no functional modulo {}",
                        path.display(),
                        spec.through
                    ))
                })?;
                if mat.pow(spec.through) != Mat::identity(self.ring, self.rank) {
                    return Err(Failure::input(format!(
                        "{}: matrix does not have order dividing {}",
                        path.display(),
                        spec.through
                    )));
                }
                let mut powers = vec![Mat::identity(self.ring, self.rank)];
                for k in 1..spec.through as usize {
                    powers.push(powers[k - 1].mul(&mat));
                }
                let mats = chi.iter().map(|&c| powers[c as usize].clone()).collect();
                LocalSystem::new(l, self.ring, self.rank, mats).map_err(Failure::Compute)
            }
        }
    }
}

pub fn load_twist(path: &Path) -> Result<TwistSpec, Failure> {
    read_json(path)
}
