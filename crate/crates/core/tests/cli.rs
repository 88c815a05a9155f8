use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use penalty_stab::harness::config::ExperimentConfig;
use penalty_stab::harness::output::read_csv;

const EXE: &str = env!("CARGO_BIN_EXE_penalty-stab");

const DECAY: &str = r#"{
  "model": {"nu": 0.1, "alpha": 0.13, "delta": 0.13, "r": 0.1, "epsilon": 0.01},
  "mesh": {"n_elements": 16},
  "time": {"n_steps": 50, "t_final": 0.5},
  "experiment": {"kind": "decay", "variants": ["penalized_feedback", "uncontrolled_dirichlet"]}
}"#;

const CONVERGENCE: &str = r#"{
  "model": {"nu": 0.1, "alpha": 0.13, "delta": 0.13, "r": 0.1, "epsilon": 0.01},
  "mesh": {"n_elements": [4, 8, 16]},
  "time": {"n_steps": 20, "t_final": 0.2},
  "experiment": {"kind": "convergence", "reference_n_elements": 64}
}"#;

const EPSILON: &str = r#"{
  "model": {"nu": 0.1, "alpha": 0.13, "delta": 0.13, "r": 0.1, "epsilon": 0.01},
  "mesh": {"n_elements": 16},
  "time": {"n_steps": 20, "t_final": 0.2},
  "experiment": {"kind": "epsilon_study", "epsilons": [1.0, 0.1, 0.01]}
}"#;

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(EXE)
        .arg(cmd)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra.iter().flat_map(|o| ["--override", o]))
        .output()
        .unwrap()
}

fn header(path: &Path) -> Vec<String> {
    read_csv(path).unwrap().1.header
}

#[test]
fn golden_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let d = write_cfg(dir.path(), "d.json", DECAY);
    let c = write_cfg(dir.path(), "c.json", CONVERGENCE);
    let e = write_cfg(dir.path(), "e.json", EPSILON);
    assert_eq!(run("simulate", &d, &out, &[]).status.code(), Some(0));
    assert_eq!(run("convergence", &c, &out, &[]).status.code(), Some(0));
    assert_eq!(run("epsilon-study", &e, &out, &[]).status.code(), Some(0));

    assert_eq!(header(&out.join("decay_penalized_feedback.csv")), ["t", "l2_norm", "linf_norm", "control"]);
    assert_eq!(header(&out.join("decay_uncontrolled_dirichlet.csv")), ["t", "l2_norm", "linf_norm", "control"]);
    assert_eq!(
        header(&out.join("convergence.csv")),
        [
            "h",
            "epsilon",
            "k",
            "error_l2",
            "error_linf",
            "order_l2",
            "order_linf",
            "control_error_linf",
            "order_control",
            "status"
        ]
    );
    assert_eq!(
        header(&out.join("epsilon_study.csv")),
        [
            "epsilon",
            "r",
            "state_l2",
            "state_linf",
            "control_linf",
            "diff_l2",
            "diff_linf",
            "control_diff_linf",
            "diff_l2_final",
            "diff_linf_final",
            "status"
        ]
    );
    let svg = std::fs::read_to_string(out.join("decay_penalized_feedback.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("version=\"1.1\""));
}

#[test]
fn metadata_carries_config_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.json", CONVERGENCE);
    let first = dir.path().join("first");
    assert!(run("convergence", &cfg, &first, &[]).status.success());
    let (meta, table) = read_csv(&first.join("convergence.csv")).unwrap();
    assert!(meta.get("version").unwrap().starts_with("penalty-stab "));
    assert!(meta.get("rates").is_some());
    assert!(meta.get("newton").unwrap().contains("tol=1e-12"));

    // the echoed config is complete enough to reproduce the run
    let echoed = meta.get("config").unwrap();
    ExperimentConfig::from_json(echoed, &[]).unwrap();
    let cfg2 = write_cfg(dir.path(), "echo.json", echoed);
    let second = dir.path().join("second");
    assert!(run("convergence", &cfg2, &second, &[]).status.success());
    assert_eq!(read_csv(&second.join("convergence.csv")).unwrap().1, table);
}

#[test]
fn sequential_flag_gives_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "e.json", EPSILON);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("epsilon-study", &cfg, &a, &[]).status.success());
    let out = Command::new(EXE)
        .args(["epsilon-study", "--sequential", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        std::fs::read_to_string(a.join("epsilon_study.csv")).unwrap(),
        std::fs::read_to_string(b.join("epsilon_study.csv")).unwrap()
    );
}

#[test]
fn decay_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "d.json", DECAY);
    let out = dir.path().join("o");
    assert!(run("simulate", &cfg, &out, &[]).status.success());
    let (_, t) = read_csv(&out.join("decay_penalized_feedback.csv")).unwrap();
    assert_eq!(t.rows.len(), 51);
    for row in &t.rows {
        for cell in row {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(&format!("{v:.16e}"), cell);
        }
    }
    let l2: Vec<f64> = t.column("l2_norm").unwrap().iter().map(|s| s.parse().unwrap()).collect();
    assert!(l2.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn zero_profile_gives_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "d.json", DECAY);
    let out = dir.path().join("o");
    assert!(run("simulate", &cfg, &out, &["initial=zero"]).status.success());
    let (meta, t) = read_csv(&out.join("decay_penalized_feedback.csv")).unwrap();
    for name in ["l2_norm", "linf_norm", "control"] {
        assert!(t.column(name).unwrap().iter().all(|s| s.parse::<f64>().unwrap() == 0.0));
    }
    assert!(meta.get("decay_fit").unwrap().starts_with("unavailable"));
}

#[test]
fn sweep_records_admissibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "s.json",
        r#"{
          "model": {"nu": 0.1, "alpha": 0.1, "delta": 0.1, "r": 0.05, "epsilon": 0.001},
          "mesh": {"n_elements": 16},
          "time": {"n_steps": 20, "t_final": 0.2},
          "initial": "x_one_minus_x",
          "experiment": {"kind": "decay", "gain": "sqrt_2eps", "svg": false,
                         "sweep": {"param": "nu", "values": [0.2, 0.1, 0.01, 0.001]}}
        }"#,
    );
    let out = dir.path().join("o");
    assert!(run("simulate", &cfg, &out, &[]).status.success());
    // r² = 2ε puts the ratio bound at 2/3, so only ν = 0.2 qualifies
    for (nu, admissible) in [("0.2", true), ("0.1", false), ("0.01", false), ("0.001", false)] {
        let (meta, _) = read_csv(&out.join(format!("decay_penalized_feedback_nu_{nu}.csv"))).unwrap();
        let a1 = meta.get("a1").unwrap();
        assert!(a1.starts_with(&format!("admissible={admissible}")), "nu={nu}: {a1}");
        assert!(meta.get("params").unwrap().contains("\"r\":0.044721359549995"));
    }
    assert!(!out.join("decay_penalized_feedback_nu_0.2.svg").exists());
}

#[test]
fn singleton_epsilon_list_has_no_diffs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "e.json", EPSILON);
    let out = dir.path().join("o");
    assert!(run("epsilon-study", &cfg, &out, &["experiment.epsilons=[0.5]"]).status.success());
    let (_, t) = read_csv(&out.join("epsilon_study.csv")).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.column("diff_l2").unwrap(), [""]);
    assert_eq!(t.column("control_diff_linf").unwrap(), [""]);
}

#[test]
fn validation_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let d = write_cfg(dir.path(), "d.json", DECAY);
    let r = run("simulate", &d, &out, &["model.nu=-0.1"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("model.nu"));
    assert_eq!(run("convergence", &d, &out, &[]).status.code(), Some(1));
    let c = write_cfg(dir.path(), "c.json", CONVERGENCE);
    assert_eq!(run("convergence", &c, &out, &["mesh.n_elements=[4, 6]"]).status.code(), Some(1));
    let bad = write_cfg(dir.path(), "bad.json", "{ not json");
    assert_eq!(run("simulate", &bad, &out, &[]).status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn solver_failure_exits_2_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let d = write_cfg(dir.path(), "d.json", DECAY);
    let r = run("simulate", &d, &out, &["solver.max_iter=1"]);
    assert_eq!(r.status.code(), Some(2));
    let (meta, t) = read_csv(&out.join("decay_penalized_feedback.csv")).unwrap();
    assert!(meta.get("status").unwrap().starts_with("failed at step 1"));
    assert_eq!(t.rows.len(), 1);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        ExperimentConfig::load(&path, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert_eq!(n, 5);
}
