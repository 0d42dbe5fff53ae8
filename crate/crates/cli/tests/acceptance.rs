//! Acceptance check: every subcommand is deterministic. Each invocation runs
//! twice in separate processes and must produce byte-identical stdout and the
//! same exit status; a thread cap and file output must not change the bytes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plfg"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn acceptance_9_every_command_reruns_byte_identical() {
    let s4 = data("s4.json");
    let d8 = data("d8.json");
    let a4 = data("a4.json");
    let c2 = data("c2.json");
    let f2 = data("f2.json");
    let z4 = data("z4.json");
    let f2sq = data("f2sq.json");
    let order3 = data("order3.json");

    let jobs: Vec<Vec<&str>> = vec![
        vec!["fusion-info", "--group", &d8, "--p", "2"],
        vec!["centrics", "--group", &a4, "--p", "2"],
        vec!["linking-build", "--group", &s4, "--p", "2"],
        vec!["biset-characteristic", "--group", &s4, "--p", "2"],
        vec![
            "cohomology",
            "--group",
            &c2,
            "--p",
            "2",
            "--module",
            &f2,
            "--max-degree",
            "3",
        ],
        vec![
            "stable",
            "--group",
            &s4,
            "--p",
            "2",
            "--module",
            &f2,
            "--max-degree",
            "1",
        ],
        vec![
            "nerve",
            "--group",
            &a4,
            "--p",
            "2",
            "--module",
            &f2,
            "--max-degree",
            "2",
        ],
        vec![
            "idempotent",
            "--group",
            &s4,
            "--p",
            "2",
            "--module",
            &z4,
            "--max-degree",
            "1",
        ],
        vec![
            "verify-main",
            "--group",
            &a4,
            "--p",
            "2",
            "--module",
            &f2,
            "--max-degree",
            "1",
        ],
        vec!["verify-trivial", "--group", &d8, "--p", "2", "--max-degree", "1"],
        vec!["verify-delta", "--group", &d8, "--p", "2", "--max-degree", "1"],
        vec![
            "explore-conjecture",
            "--group",
            &a4,
            "--p",
            "2",
            "--module",
            &f2sq,
            "--twist",
            &order3,
            "--max-degree",
            "1",
        ],
    ];

    for job in &jobs {
        let first = run(job);
        let second = run(job);
        assert!(
            first.status.success(),
            "{} failed: {}",
            job[0],
            String::from_utf8_lossy(&first.stderr)
        );
        assert_eq!(first.status.code(), second.status.code(), "{}", job[0]);
        assert_eq!(first.stdout, second.stdout, "{} drifted on re-run", job[0]);
        assert!(!first.stdout.is_empty(), "{} printed a report", job[0]);
    }

    // a worker cap must not change the report
    let base = run(&["verify-main", "--group", &a4, "--p", "2", "--module", &f2]);
    let capped = run(&[
        "verify-main",
        "--group",
        &a4,
        "--p",
        "2",
        "--module",
        &f2,
        "--threads",
        "2",
    ]);
    assert!(base.status.success() && capped.status.success());
    assert_eq!(base.stdout, capped.stdout, "thread cap changed the bytes");

    // file output carries the same bytes as stdout
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let to_file = run(&[
        "centrics",
        "--group",
        &a4,
        "--p",
        "2",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let on_disk = std::fs::read(&out_path).unwrap();
    let on_stdout = run(&["centrics", "--group", &a4, "--p", "2"]).stdout;
    assert_eq!(on_disk, on_stdout, "file and stdout reports differ");

    println!("ACCEPTANCE 9: PASS");
}
