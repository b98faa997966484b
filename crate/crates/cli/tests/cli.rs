use std::fs;
use std::path::{Path, PathBuf};

use nsch_cli::{cli_main, config_hash, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VIOLATION};
use nsch_core::io::{read_snapshot, FieldTag};
use nsch_core::DiagnosticsRecord;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn shipped(name: &str) -> PathBuf {
    manifest_dir().join("configs").join(name)
}

fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests").join("fixtures").join(name)
}

fn nsch(args: &[&str]) -> i32 {
    let mut argv = vec!["nsch"];
    argv.extend_from_slice(args);
    cli_main(argv)
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn shipped_configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(manifest_dir().join("configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    v.sort();
    v
}

#[test]
fn check_accepts_every_shipped_config() {
    let configs = shipped_configs();
    assert!(configs.len() >= 3);
    for c in configs {
        assert_eq!(nsch(&["check", path_str(&c)]), EXIT_OK, "{}", c.display());
    }
}

#[test]
fn check_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "[grid]\nnx = 4\n",
        "[physics]\nK = 0\nalpha = 0\n",
        "[physics]\nviscosity = 1\n",
        "[time]\ndt = -1\n",
        "no section\n",
    ];
    for (k, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.conf"));
        fs::write(&path, text).unwrap();
        assert_eq!(nsch(&["check", path_str(&path)]), EXIT_CONFIG, "{text:?}");
    }
    assert_eq!(nsch(&["check", "/nonexistent/config.conf"]), EXIT_CONFIG);
    assert_eq!(nsch(&["frobnicate"]), EXIT_CONFIG);
    assert_eq!(nsch(&["--help"]), EXIT_OK);
}

fn write_config(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let text = fs::read_to_string(shipped("droplet.conf")).unwrap();
    let path = dir.join(name);
    fs::write(&path, edit(text)).unwrap();
    path
}

#[test]
fn run_with_zero_end_time_writes_initial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.conf", |t| t.replace("t_end = 1e-2", "t_end = 0"));
    let out = dir.path().join("out");
    assert_eq!(nsch(&["run", path_str(&cfg), "--out", path_str(&out)]), EXIT_OK);

    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), DiagnosticsRecord::FIELDS.len() + 1);
    assert_eq!(lines[1].split(',').count(), DiagnosticsRecord::FIELDS.len() + 1);

    for tag in FieldTag::ALL {
        let s = read_snapshot(&out.join(format!("{}_00000000.bsf", tag.name()))).unwrap();
        assert_eq!(s.tag, tag);
        assert_eq!(s.width, 32);
        let expected_height = match tag {
            FieldTag::VelocityY => 33,
            FieldTag::PsiBottom | FieldTag::PsiTop | FieldTag::ThetaBottom | FieldTag::ThetaTop => 1,
            _ => 32,
        };
        assert_eq!(s.height, expected_height);
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains(&format!("config_sha256 = {}", config_hash(&fs::read(&cfg).unwrap()))));
    assert!(manifest.contains("revision = "));
    assert!(manifest.contains("phi_00000000.bsf"));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "short.conf", |t| {
        t.replace("t_end = 1e-2", "t_end = 2e-3").replace("snapshot_every = 50", "snapshot_every = 10")
    });
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(nsch(&["run", path_str(&cfg), "--out", path_str(&a)]), EXIT_OK);
    assert_eq!(nsch(&["run", path_str(&cfg), "--out", path_str(&b)]), EXIT_OK);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 20);
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?} differs");
    }
}

#[test]
fn manifest_hash_tracks_config_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let zero = |t: String| t.replace("t_end = 1e-2", "t_end = 0");
    let c1 = write_config(dir.path(), "c1.conf", zero);
    let c2 = write_config(dir.path(), "c2.conf", |t| zero(t) + "\n");
    let c3 = write_config(dir.path(), "c3.conf", zero);
    let hash_of = |cfg: &Path, out: &str| {
        let out = dir.path().join(out);
        assert_eq!(nsch(&["run", path_str(cfg), "--out", path_str(&out)]), EXIT_OK);
        let m = fs::read_to_string(out.join("manifest.txt")).unwrap();
        m.lines().find(|l| l.starts_with("config_sha256")).unwrap().to_string()
    };
    let (h1, h2, h3) = (hash_of(&c1, "o1"), hash_of(&c2, "o2"), hash_of(&c3, "o3"));
    assert_ne!(h1, h2);
    assert_eq!(h1, h3);
}

#[test]
fn unwritable_output_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "z.conf", |t| t.replace("t_end = 1e-2", "t_end = 0"));
    let out = blocker.join("sub");
    assert_eq!(nsch(&["run", path_str(&cfg), "--out", path_str(&out)]), EXIT_CONFIG);
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = fixture("unreachable_tolerance.conf");
    assert_eq!(nsch(&["run", path_str(&cfg), "--out", path_str(&out)]), EXIT_SOLVER);
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("status = failed"));
}

#[test]
fn invariants_pass_on_shipped_configs() {
    for c in shipped_configs() {
        assert_eq!(nsch(&["invariants", path_str(&c)]), EXIT_OK, "{}", c.display());
    }
}

#[test]
fn invariants_catch_a_broken_flux() {
    assert_eq!(nsch(&["invariants", path_str(&fixture("broken_flux.conf"))]), EXIT_VIOLATION);
}

#[test]
fn invariant_table_names_the_failure() {
    let table = nsch_cli::invariants_table(&fixture("broken_flux.conf")).unwrap();
    assert_eq!(table.failures(), vec!["combined_mass"]);
    assert!(table.to_string().contains("combined_mass"));
}

#[test]
fn convergence_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "conv.conf", |t| {
        t.replace("nx = 32", "nx = 16")
            .replace("ny = 32", "ny = 16")
            .replace("t_end = 1e-2", "t_end = 1e-3")
    });
    assert_eq!(nsch(&["convergence", path_str(&cfg)]), EXIT_OK);
}
