use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlasov-dlra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_inflow(out: &Path) -> Vec<String> {
    [
        "x_mesh=triangle 6",
        "v_mesh.n=12",
        "t_end=0.05",
        "inflow.max_terms=8",
        "error.terms=8",
        "output.every=2",
        "snapshot.times=0.05",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([format!("out_dir={}", out.display())])
    .collect()
}

fn run_with(preset: &str, sets: &[String]) -> Output {
    let builtin = format!("builtin:{preset}");
    let mut args = vec!["run", builtin.as_str()];
    for s in sets {
        args.push("--set");
        args.push(s);
    }
    cli(&args)
}

/// Diagnostics without the wall-clock column.
fn timeless_csv(dir: &Path) -> Vec<String> {
    let text = fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let wall = header.iter().position(|h| *h == "wall_ms").unwrap();
    text.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != wall)
                .map(|(_, c)| c)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["validate", "builtin:landau_1d1v"]).status.code(), Some(0));
    assert_eq!(cli(&["validate", "builtin:landau_1d1v", "--set", "bogus=1"]).status.code(), Some(2));
    assert_eq!(cli(&["validate", "builtin:no_such_preset"]).status.code(), Some(2));
    assert_eq!(cli(&["validate", "/nonexistent/config.txt"]).status.code(), Some(2));
    assert_eq!(cli(&["validate", "builtin:landau_1d1v", "--set", "dt=-1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let blowup = run_with(
        "landau_1d1v",
        &[
            "x_mesh=interval 0 12.566 16 periodic".into(),
            "v_mesh.n=16".into(),
            "dt=2".into(),
            "t_end=400".into(),
            format!("out_dir={out}"),
        ],
    );
    assert_eq!(blowup.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&blowup.stderr).contains("blow-up"));
}

#[test]
fn mesh_info_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("tri.mesh");
    fs::write(&good, "# one triangle\n2 3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 0 0\n0 1 1\n0 2 2\n").unwrap();
    let out = cli(&["mesh-info", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out.stdout.is_empty());

    let bad = dir.path().join("bad.mesh");
    fs::write(&bad, "2 3 1 0\n0 0\n1 0\n0 1\n0 1 7\n").unwrap();
    assert_eq!(cli(&["mesh-info", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run_with("inflow_triangle", &small_inflow(d));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(timeless_csv(&a), timeless_csv(&b));
    let snap = |d: &Path| {
        let s = fs::read_dir(d).unwrap().filter_map(|e| e.ok()).find(|e| e.file_name().to_string_lossy().starts_with("snapshot_t")).unwrap().path();
        ["X.mat", "S.mat", "V.mat", "meta.txt"].map(|f| fs::read_to_string(s.join(f)).unwrap())
    };
    assert_eq!(snap(&a), snap(&b));
    let resolved = fs::read_to_string(a.join("scenario.resolved.txt")).unwrap();
    assert!(resolved.contains("x_mesh = triangle 6"));
}

#[test]
fn psi_keeps_its_rank() {
    let dir = tempfile::tempdir().unwrap();
    let mut sets = small_inflow(dir.path());
    sets.extend(["integrator=psi".to_string(), "rank=3".to_string()]);
    let out = run_with("inflow_triangle", &sets);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = timeless_csv(dir.path());
    let rank = csv[0].split(',').position(|h| h == "rank").unwrap();
    let ranks: Vec<&str> = csv[1..].iter().map(|l| l.split(',').nth(rank).unwrap()).collect();
    assert!(ranks.len() > 2);
    assert!(ranks.iter().all(|r| *r == "3"), "{ranks:?}");
}
