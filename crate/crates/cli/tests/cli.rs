use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vqsd_core::linalg::{adjoint, eigh};
use vqsd_core::{universal_params_from_unitary, AnsatzDescriptor, AnsatzParams, DensityMatrix, VerificationReport};

fn vqsd(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqsd"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn find(dir: &Path, suffix: &str) -> PathBuf {
    let mut hits: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    assert_eq!(hits.len(), 1, "expected one *{suffix} in {}", dir.display());
    hits.pop().unwrap()
}

/// Last data row of a CSV as a column-name lookup.
fn last_row(path: &Path) -> Vec<(String, String)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let last = lines.last().unwrap();
    header.into_iter().zip(last.split(',').map(str::to_owned)).collect()
}

fn column(row: &[(String, String)], name: &str) -> f64 {
    row.iter().find(|(k, _)| k == name).unwrap().1.parse().unwrap()
}

#[test]
fn gen_state_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = vqsd(&["gen-state", "--n", "2", "--rank", "4", "--seed", "7", "--out", "a.json"], dir.path());
    let b = vqsd(&["gen-state", "--n", "2", "--rank", "4", "--seed", "7", "--out", "sub/b.json"], dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let bytes_a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(bytes_a, fs::read(dir.path().join("sub/b.json")).unwrap());
    let rho: DensityMatrix = serde_json::from_slice(&bytes_a).unwrap();
    let tr: f64 = rho.matrix().diag().iter().map(|z| z.re).sum();
    assert!((tr - 1.0).abs() <= 1e-10);
    assert!(stdout(&a).contains("off_diagonal_average"));

    let pure = vqsd(&["gen-state", "--n", "3", "--rank", "1", "--seed", "2", "--out", "p.json"], dir.path());
    let text = stdout(&pure);
    let purity: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("purity: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((purity - 1.0).abs() <= 1e-10);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&vqsd(&["gen-state", "--n", "2"], dir.path())), 1);
    assert_eq!(code(&vqsd(&["gen-state", "--n", "2", "--rank", "9", "--out", "x.json"], dir.path())), 1);
    assert_eq!(code(&vqsd(&["frobnicate"], dir.path())), 1);
    assert_eq!(code(&vqsd(&["train"], dir.path())), 1);
    assert_eq!(code(&vqsd(&["train", "--preset", "fig9"], dir.path())), 1);
    assert_eq!(code(&vqsd(&["train", "--config", "missing.toml"], dir.path())), 1);
    assert_eq!(code(&vqsd(&["--help"], dir.path())), 0);
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "preset = \"fig3\"\n[train]\nepochz = 10\n").unwrap();
    let out = vqsd(&["train", "--config", "c.toml"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("epochz"));
}

#[test]
fn fig3_preset_reaches_smaller_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let out = vqsd(&["train", "--preset", "fig3", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let o = dir.path().join("o");
    let pi = column(&last_row(&find(&o, "_record.csv")), "objective");
    let report: VerificationReport =
        serde_json::from_str(&fs::read_to_string(find(&o, "_report.json")).unwrap()).unwrap();
    assert!((pi - report.eigenvalues[0]).abs() <= 1e-6);
    assert!(fs::read_to_string(find(&o, "_report.txt")).unwrap().contains("PASS"));
}

#[test]
fn fig2_and_fig4_presets_converge() {
    let dir = tempfile::tempdir().unwrap();
    let out = vqsd(&["train", "--preset", "fig2", "--out", "a"], dir.path());
    assert_eq!(code(&out), 0);
    let row = last_row(&find(&dir.path().join("a"), "_record.csv"));
    assert!(column(&row, "ratio") >= 0.999);

    let out = vqsd(&["train", "--preset", "fig4", "--out", "b"], dir.path());
    assert_eq!(code(&out), 0);
    let row = last_row(&find(&dir.path().join("b"), "_record.csv"));
    assert!(column(&row, "off_diagonal_average") <= 1e-3);
}

#[test]
fn training_tables_are_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "preset = \"fig4\"\nname = \"rep\"\n[train]\nepochs = 40\n").unwrap();
    for out in ["x", "y"] {
        let run = vqsd(&["train", "--config", "c.toml", "--out", out, "--seed", "5"], dir.path());
        assert_eq!(code(&run), 2, "40 epochs cannot converge");
    }
    let x = fs::read(find(&dir.path().join("x"), "_record.csv")).unwrap();
    let y = fs::read(find(&dir.path().join("y"), "_record.csv")).unwrap();
    assert_eq!(x, y);
    let name = find(&dir.path().join("x"), "_record.csv");
    assert!(name.to_string_lossy().ends_with("rep_n2_local-l_brick-wall_m3_seed5_record.csv"));

    let shots = vqsd(&["train", "--config", "c.toml", "--out", "s", "--shots", "500"], dir.path());
    assert_eq!(code(&shots), 2);
    assert!(find(&dir.path().join("s"), "_params.json").exists());
}

#[test]
fn depth_sweep_converges_and_flags_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let config = "name = \"sweep\"\n\
        [train]\nansatz = \"brick-wall\"\nobjective = \"local-l\"\nepochs = 4000\ntau_conv = 1e-10\nlog_every = 100\n\
        [train.adam]\nlr = 0.02\n\
        [train.state]\nsource = \"random\"\nn_qubits = 2\nrank = 4\nseed = 72\n\
        [sweep]\nm_start = 1\nm_step = 1\nm_max = 8\ntau_depth = 1e-6\n";
    fs::write(dir.path().join("s.toml"), config).unwrap();
    let out = vqsd(&["depth-sweep", "--config", "s.toml", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let table = fs::read_to_string(find(&dir.path().join("o"), "_sweep.csv")).unwrap();
    let objectives: Vec<f64> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(objectives.len() >= 2);
    assert!(objectives.windows(2).all(|w| w[1] <= w[0] + 1e-3), "{objectives:?}");
    assert!(table.lines().any(|l| l.ends_with(",true")));
    assert!(fs::read_dir(dir.path().join("o"))
        .unwrap()
        .any(|e| e.unwrap().file_name().to_string_lossy().contains("_m1_seed0_record.csv")));

    let tight = config.replace("m_max = 8", "m_max = 2").replace("tau_depth = 1e-6", "tau_depth = 1e-14");
    fs::write(dir.path().join("t.toml"), tight).unwrap();
    let out = vqsd(&["depth-sweep", "--config", "t.toml", "--out", "t"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("not converged"));

    let wrong = vqsd(&["depth-sweep", "--preset", "fig2", "--out", "w"], dir.path());
    assert_eq!(code(&wrong), 1);
}

#[test]
fn verify_passes_exact_and_fails_identity() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&vqsd(&["gen-state", "--n", "3", "--rank", "8", "--seed", "4", "--out", "rho.json"], dir.path())),
        0
    );
    let rho: DensityMatrix = serde_json::from_str(&fs::read_to_string(dir.path().join("rho.json")).unwrap()).unwrap();
    let eig = eigh(rho.matrix()).unwrap();
    let exact = universal_params_from_unitary(&adjoint(&eig.eigenvectors)).unwrap();
    fs::write(dir.path().join("exact.json"), serde_json::to_string(&exact).unwrap()).unwrap();
    let identity = AnsatzParams::zeros(AnsatzDescriptor::universal(3).unwrap()).unwrap();
    fs::write(dir.path().join("id.json"), serde_json::to_string(&identity).unwrap()).unwrap();

    let out = vqsd(&["verify", "--state", "rho.json", "--params", "exact.json", "--out", "v"], dir.path());
    assert_eq!(code(&out), 0);
    let report: VerificationReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("v/verify_report.json")).unwrap()).unwrap();
    assert!(report.passed && report.eigenvalue_gap <= 1e-9);

    let out = vqsd(&["verify", "--state", "rho.json", "--params", "id.json", "--out", "w"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("FAIL"));
    let report: VerificationReport =
        serde_json::from_str(&fs::read_to_string(dir.path().join("w/verify_report.json")).unwrap()).unwrap();
    assert!(report.off_diagonal_average > 0.0);

    assert_eq!(code(&vqsd(&["verify", "--state", "nope.json", "--params", "id.json"], dir.path())), 1);
    fs::write(dir.path().join("junk.json"), "{\"kind\": 3}").unwrap();
    assert_eq!(code(&vqsd(&["verify", "--state", "rho.json", "--params", "junk.json"], dir.path())), 1);
}

#[test]
fn trained_three_qubit_artifacts_verify() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "preset = \"fig2\"\nname = \"n3\"\n[train.state]\nn_qubits = 3\nrank = 8\nseed = 303\n",
    )
    .unwrap();
    let out = vqsd(&["train", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let o = dir.path().join("o");
    assert_eq!(
        code(&vqsd(&["gen-state", "--n", "3", "--rank", "8", "--seed", "303", "--out", "rho.json"], dir.path())),
        0
    );
    let params = find(&o, "_params.json");
    let out = vqsd(
        &["verify", "--state", "rho.json", "--params", params.to_str().unwrap(), "--out", "v"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}
