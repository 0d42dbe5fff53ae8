//! plfg: fusion systems, centric linking systems, and their exact mod-p^e
//! cohomology from finite permutation groups.
//!
//! Every subcommand reads small JSON inputs, computes with exact arithmetic,
//! and prints one deterministic JSON report. Exit status: 0 when the
//! computation ran and every verification it performed passed, 1 when it ran
//! and some verification failed, 2 when the inputs could not be processed.

mod input;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plfg_core::biset::{characteristic_checks, characteristic_from_group};
use plfg_core::cohomology::{BarComplex, Flavor};
use plfg_core::fusion::FusionSystem;
use plfg_core::linking::{centric_linking_system, LinkingSystem, LocalSystem, NerveComplex};
use plfg_core::quotient::QMap;
use plfg_core::stable::{
    characteristic_idempotent, explore_conjecture, omega_endomorphism, stable_elements,
    verify_delta_functor, verify_main, SesLocal,
};
use plfg_core::zpe::Zpe;
use plfg_core::{Error, FiniteGroup};

use input::{load_group, load_module, load_twist, LoadedModule};

/// Why a run produced no report: bad inputs or a computation that could not
/// be carried out. Both exit with status 2; verification failures are not
/// errors and exit with status 1 alongside a full report.
pub enum Failure {
    Input(String),
    Compute(Error),
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "{m}"),
            Failure::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

#[derive(Parser)]
#[command(
    name = "plfg",
    version,
    about = "Exact cohomology of fusion systems and centric linking systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap the number of worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report to this file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GroupArgs {
    /// Group file: {"degree": n, "generators": [[images], ..]}
    #[arg(long)]
    group: PathBuf,
    /// The prime
    #[arg(long)]
    p: u64,
}

#[derive(Args)]
struct CoefArgs {
    #[command(flatten)]
    job: GroupArgs,
    /// Module file: {"p", "e", "rank", "action"?}
    #[arg(long)]
    module: PathBuf,
    /// Twist file: {"through", "matrix"}
    #[arg(long)]
    twist: Option<PathBuf>,
    /// Largest cohomological degree to compute
    #[arg(long, default_value_t = 2)]
    max_degree: usize,
}

#[derive(Args)]
struct CohomologyArgs {
    #[command(flatten)]
    job: GroupArgs,
    /// Module file: {"p", "e", "rank", "action"?}
    #[arg(long)]
    module: PathBuf,
    /// Largest cohomological degree to compute
    #[arg(long, default_value_t = 2)]
    max_degree: usize,
}

#[derive(Args)]
struct GroupDegreeArgs {
    #[command(flatten)]
    job: GroupArgs,
    /// Largest cohomological degree to compute
    #[arg(long, default_value_t = 2)]
    max_degree: usize,
}

#[derive(Args)]
struct DeltaArgs {
    #[command(flatten)]
    job: GroupArgs,
    /// Twist file for a rank-2 middle term; without it the extension is
    /// Z/p -> Z/p^2 -> Z/p with constant coefficients
    #[arg(long)]
    twist: Option<PathBuf>,
    /// Largest degree of the connecting squares
    #[arg(long, default_value_t = 2)]
    max_degree: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Subgroups of a Sylow p-subgroup with their fusion data
    FusionInfo(GroupArgs),
    /// List the centric subgroups
    Centrics(GroupArgs),
    /// Build the centric linking system and check its axioms
    LinkingBuild(GroupArgs),
    /// Decompose the group as a characteristic biset and run the four checks
    BisetCharacteristic(GroupArgs),
    /// Cohomology of the whole group with the given module
    Cohomology(CohomologyArgs),
    /// Stable elements of the Sylow subgroup's cohomology
    Stable(CoefArgs),
    /// Cohomology of the linking system's nerve
    Nerve(CoefArgs),
    /// The idempotent generated by the characteristic biset action
    Idempotent(CoefArgs),
    /// Compare nerve cohomology with stable elements
    VerifyMain(CoefArgs),
    /// The comparison with rank-1 constant mod-p coefficients
    VerifyTrivial(GroupDegreeArgs),
    /// Connecting maps of a coefficient extension against the idempotents
    VerifyDelta(DeltaArgs),
    /// Probe whether the idempotent image matches the stable elements
    ExploreConjecture(CoefArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
        if pool.is_err() {
            eprintln!("error: worker pool was already configured");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli.command) {
        Ok((json, pass)) => {
            if let Err(e) = emit(cli.output.as_deref(), &json) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if pass { 0 } else { 1 })
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, json: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Failure::input(format!("could not serialize the report: {e}")))
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn check_prime(group: &FiniteGroup, p: u64) -> Result<(), Failure> {
    if !is_prime(p) {
        return Err(Failure::input(format!("p = {p} is not prime")));
    }
    if group.order() as u64 % p != 0 {
        return Err(Failure::input(format!(
            "p = {p} does not divide the group order {}",
            group.order()
        )));
    }
    Ok(())
}

fn fusion(args: &GroupArgs) -> Result<FusionSystem, Failure> {
    let lg = load_group(&args.group)?;
    check_prime(&lg.group, args.p)?;
    Ok(FusionSystem::new(lg.group, args.p)?)
}

/// Load everything a coefficient command needs and hand the borrow-chained
/// fusion system, linking system, and local system to `run`.
fn with_system<R>(
    args: &CoefArgs,
    run: impl FnOnce(&FusionSystem, &LinkingSystem, &LocalSystem) -> Result<R, Failure>,
) -> Result<R, Failure> {
    let lg = load_group(&args.job.group)?;
    check_prime(&lg.group, args.job.p)?;
    let module = load_module(&args.module, args.job.p, &lg.group, &lg.gens)?;
    let twist = match &args.twist {
        None => None,
        Some(path) => Some((path.as_path(), load_twist(path)?)),
    };
    let f = FusionSystem::new(lg.group, args.job.p)?;
    let l = centric_linking_system(&f)?;
    let rho = module.over_linking(
        &args.module,
        &l,
        twist.as_ref().map(|(path, spec)| (*path, spec)),
    )?;
    run(&f, &l, &rho)
}

fn perm_images(group: &FiniteGroup, elem: u32) -> Vec<usize> {
    group.elems[elem as usize]
        .img
        .iter()
        .map(|&x| x as usize)
        .collect()
}

fn dispatch(cmd: &Command) -> Result<(String, bool), Failure> {
    match cmd {
        Command::FusionInfo(a) => cmd_fusion_info(a),
        Command::Centrics(a) => cmd_centrics(a),
        Command::LinkingBuild(a) => cmd_linking_build(a),
        Command::BisetCharacteristic(a) => cmd_biset_characteristic(a),
        Command::Cohomology(a) => cmd_cohomology(a),
        Command::Stable(a) => cmd_stable(a),
        Command::Nerve(a) => cmd_nerve(a),
        Command::Idempotent(a) => cmd_idempotent(a),
        Command::VerifyMain(a) => cmd_verify_main(a),
        Command::VerifyTrivial(a) => cmd_verify_trivial(a),
        Command::VerifyDelta(a) => cmd_verify_delta(a),
        Command::ExploreConjecture(a) => cmd_explore_conjecture(a),
    }
}

fn cmd_fusion_info(a: &GroupArgs) -> Result<(String, bool), Failure> {
    let f = fusion(a)?;
    let subgroups = (0..f.n_subs())
        .map(|i| report::SubgroupInfo {
            index: i,
            order: f.subs[i].order(),
            automorphisms: f.aut(i).len(),
            conjugates: f.f_conjugates(i),
            centric: f.is_centric(i),
            weakly_closed: f.is_weakly_closed(i),
            normal: f.is_normal_in_f(i),
        })
        .collect();
    let rep = report::FusionInfo {
        group_order: f.group.order(),
        p: f.p,
        sylow_order: f.s.order(),
        subgroups,
        radical_order: f.subs[f.o_p()].order(),
        constrained: f.is_constrained(),
    };
    Ok((to_json(&rep)?, true))
}

fn cmd_centrics(a: &GroupArgs) -> Result<(String, bool), Failure> {
    let f = fusion(a)?;
    let centrics = f
        .centrics()
        .into_iter()
        .map(|i| report::CentricSubgroup {
            index: i,
            order: f.subs[i].order(),
            elements: f.subs[i]
                .elems
                .iter()
                .map(|&e| perm_images(&f.group, e))
                .collect(),
        })
        .collect();
    Ok((to_json(&report::Centrics { centrics })?, true))
}

fn cmd_linking_build(a: &GroupArgs) -> Result<(String, bool), Failure> {
    let f = fusion(a)?;
    let l = centric_linking_system(&f)?;
    let axioms = l.verify_axioms(&f);
    let pass = axioms.is_ok();
    let rep = report::LinkingBuild {
        objects: l
            .objects
            .iter()
            .zip(&l.residuals)
            .map(|(o, r)| report::LinkingObject {
                order: o.order(),
                residual_order: r.order(),
            })
            .collect(),
        n_morphisms: l.n_mors(),
        loop_invariants: l.h1_invariants(),
        axioms_ok: pass,
        axiom_failure: axioms.err().map(|e| e.to_string()),
    };
    Ok((to_json(&rep)?, pass))
}

fn cmd_biset_characteristic(a: &GroupArgs) -> Result<(String, bool), Failure> {
    let f = fusion(a)?;
    let omega = characteristic_from_group(&f)?;
    let checks = characteristic_checks(&f, &omega)?;
    let s_ord = f.s.order();
    let size = omega.size(s_ord, s_ord);
    let size = u64::try_from(size)
        .map_err(|_| Failure::input("the biset is too large to report".to_string()))?;
    let classes = omega
        .classes
        .iter()
        .map(|(c, &mult)| report::BisetClassInfo {
            subgroup_order: c.k_order(),
            subgroup: c.k_elems(),
            images: c.phi_table(),
            multiplicity: mult,
        })
        .collect();
    let pass = checks.all_four();
    let rep = report::Characteristic {
        classes,
        size,
        index: size / s_ord as u64,
        index_mod_p: checks.index_mod_p,
        f_generated: checks.f_generated,
        left_stable: checks.left_stable,
        right_stable: checks.right_stable,
        index_prime_to_p: checks.index_prime_to_p,
        fc_generated: checks.fc_generated,
        pass,
    };
    Ok((to_json(&rep)?, pass))
}

fn cmd_cohomology(a: &CohomologyArgs) -> Result<(String, bool), Failure> {
    let lg = load_group(&a.job.group)?;
    check_prime(&lg.group, a.job.p)?;
    let module = load_module(&a.module, a.job.p, &lg.group, &lg.gens)?;
    let coef = module.over_group(&lg.group)?;
    let bar = BarComplex::new(&lg.group, lg.group.whole(), coef, Flavor::Normalized);
    let mut degrees = Vec::new();
    for k in 0..=a.max_degree {
        let h = bar.cohomology(k)?;
        degrees.push(report::Degree {
            degree: k,
            invariants: h.orders.clone(),
            rank: h.rank(),
        });
    }
    Ok((to_json(&report::Cohomology { degrees })?, true))
}

fn cmd_stable(a: &CoefArgs) -> Result<(String, bool), Failure> {
    with_system(a, |f, l, rho| {
        let mut degrees = Vec::new();
        for k in 0..=a.max_degree {
            let st = stable_elements(f, l, rho, k)?;
            degrees.push(report::StableDegree {
                degree: k,
                ambient_invariants: st.h.orders.clone(),
                invariants: st.invariants(),
                generators: st.gens.clone(),
            });
        }
        Ok((to_json(&report::Stable { degrees })?, true))
    })
}

fn cmd_nerve(a: &CoefArgs) -> Result<(String, bool), Failure> {
    with_system(a, |_f, l, rho| {
        let nerve = NerveComplex::new(l, rho, a.max_degree)?;
        let mut degrees = Vec::new();
        for k in 0..=a.max_degree {
            let h = nerve.cohomology(k)?;
            degrees.push(report::NerveDegree {
                degree: k,
                chains: nerve.n_chains(k),
                invariants: h.orders.clone(),
                rank: h.rank(),
            });
        }
        Ok((to_json(&report::Nerve { degrees })?, true))
    })
}

fn cmd_idempotent(a: &CoefArgs) -> Result<(String, bool), Failure> {
    with_system(a, |f, l, rho| {
        let omega = characteristic_from_group(f)?;
        let mut degrees = Vec::new();
        let mut pass = true;
        for k in 0..=a.max_degree {
            let om = omega_endomorphism(&omega, f, l, rho, k)?;
            let idem = characteristic_idempotent(&om)?;
            let st = stable_elements(f, l, rho, k)?;
            let normalized = om.map.scale(om.scalar);
            let idempotent_law = idem.map.compose(&idem.map) == idem.map;
            let stable_contained = st.gens.iter().all(|g| idem.image.contains(g));
            let identity_on_stable = st.gens.iter().all(|g| normalized.apply(g) == *g);
            let image_equals_stable = idem.image == st.form;
            pass &= idempotent_law && stable_contained && identity_on_stable;
            if a.twist.is_none() {
                pass &= image_equals_stable;
            }
            degrees.push(report::IdempotentDegree {
                degree: k,
                index: om.index,
                exponent: idem.exponent,
                image_invariants: idem.image.invariants(),
                stable_invariants: st.invariants(),
                idempotent_law,
                stable_contained,
                identity_on_stable,
                image_equals_stable,
            });
        }
        Ok((to_json(&report::Idempotent { degrees, pass })?, pass))
    })
}

fn cmd_verify_main(a: &CoefArgs) -> Result<(String, bool), Failure> {
    with_system(a, |f, l, rho| {
        let rep = verify_main(f, l, rho, a.max_degree)?;
        let pass = rep.all_pass();
        Ok((to_json(&report::main_report(&rep))?, pass))
    })
}

fn cmd_verify_trivial(a: &GroupDegreeArgs) -> Result<(String, bool), Failure> {
    let f = fusion(&a.job)?;
    let l = centric_linking_system(&f)?;
    let ring = Zpe::new(a.job.p, 1)?;
    let rho = LocalSystem::trivial(&l, ring, 1);
    let main = verify_main(&f, &l, &rho, a.max_degree)?;
    let pass = main.all_pass();
    let out = report::main_report(&main);
    let rep = report::VerifyTrivial {
        coefficients: report::ModuleShape {
            p: a.job.p,
            e: 1,
            rank: 1,
        },
        filtration_layers: out.filtration_layers,
        degrees: out.degrees,
        pass,
    };
    Ok((to_json(&rep)?, pass))
}

fn cmd_verify_delta(a: &DeltaArgs) -> Result<(String, bool), Failure> {
    let f = fusion(&a.job)?;
    let l = centric_linking_system(&f)?;
    let omega = characteristic_from_group(&f)?;
    let p = a.job.p;
    let ses = match &a.twist {
        None => {
            let rp = Zpe::new(p, 1)?;
            let rp2 = Zpe::new(p, 2)?;
            let sub = LocalSystem::trivial(&l, rp, 1);
            let mid = LocalSystem::trivial(&l, rp2, 1);
            let quo = LocalSystem::trivial(&l, rp, 1);
            let inj = QMap::new(p, vec![p], vec![p * p], vec![p])?;
            let surj = QMap::new(p, vec![p * p], vec![p], vec![1])?;
            SesLocal::new(&l, sub, mid, quo, inj, surj)?
        }
        Some(path) => {
            let spec = load_twist(path)?;
            if spec.matrix.len() != 2 {
                return Err(Failure::input(format!(
                    "{}: a twisted extension needs a rank-2 matrix, got rank {}",
                    path.display(),
                    spec.matrix.len()
                )));
            }
            let ring = Zpe::new(p, 1)?;
            let shell = LoadedModule {
                ring,
                rank: 2,
                action: Vec::new(),
            };
            let mid = shell.over_linking(path, &l, Some((path.as_path(), &spec)))?;
            let sub = LocalSystem::trivial(&l, ring, 1);
            let quo = LocalSystem::trivial(&l, ring, 1);
            let inj = QMap::new(p, vec![p], vec![p, p], vec![1, 0])?;
            let surj = QMap::new(p, vec![p, p], vec![p], vec![0, 1])?;
            SesLocal::new(&l, sub, mid, quo, inj, surj).map_err(|e| match e {
                Error::EquivarianceViolated { .. } => Failure::input(format!(
                    "{}: the twist must fix the first basis vector and act trivially on the quotient ({e})",
                    path.display()
                )),
                other => Failure::Compute(other),
            })?
        }
    };
    let term_orders = vec![
        ses.sub.ring.m.pow(ses.sub.rank as u32),
        ses.mid.ring.m.pow(ses.mid.rank as u32),
        ses.quo.ring.m.pow(ses.quo.rank as u32),
    ];
    let rep = verify_delta_functor(&omega, &f, &l, &ses, a.max_degree)?;
    let pass = rep.all_pass();
    Ok((to_json(&report::delta_report(term_orders, &rep))?, pass))
}

fn cmd_explore_conjecture(a: &CoefArgs) -> Result<(String, bool), Failure> {
    with_system(a, |f, l, rho| {
        let rep = explore_conjecture(f, l, rho, a.max_degree)?;
        Ok((to_json(&report::conjecture_report(&rep))?, true))
    })
}
