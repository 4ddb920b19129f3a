//! End-to-end runs of the `krein-spectral` binary on the quick configuration:
//! exit codes, output formats, determinism, schema errors and fault injection.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use krein_spectral::config::SCHEMA_VERSION;
use krein_spectral::io::read_table;
use serde_json::Value;

fn quick_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.json")
}

fn run(sub: &str, config: &Path, out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_krein-spectral"));
    cmd.args([sub, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a modified copy of the quick config.
fn patched_config(dir: &Path, patch: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(quick_config()).unwrap()).unwrap();
    patch(&mut v);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// All files in `dir` by name.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

/// Documented CSV headers per subcommand (the plotting scripts read these).
const CSV_HEADERS: &[(&str, &str, &[&str])] = &[
    ("kink", "kink.csv", &["x", "s", "ds", "d2s"]),
    ("kink", "potential.csv", &["x", "value"]),
    (
        "spectrum",
        "discrete.csv",
        &["index", "lambda", "omega", "residual"],
    ),
    ("spectrum", "discrete_modes.csv", &["x", "phi_0"]),
    (
        "spectrum",
        "band_table.csv",
        &["v", "m2", "case", "lo", "hi", "lo_closed", "hi_closed"],
    ),
    ("modes", "mode_ode_omega_2.0000.csv", &["x", "re_e", "im_e"]),
    ("modes", "mode_ls_omega_2.0000.csv", &["x", "re_e", "im_e"]),
    (
        "modes",
        "phase_shifts.csv",
        &["omega", "k", "delta", "delta_unwrapped"],
    ),
    (
        "modes",
        "pairing.csv",
        &[
            "branch", "a", "b", "center_a", "center_b", "re", "im", "mass",
        ],
    ),
    (
        "modes",
        "delta_overlaps.csv",
        &[
            "normalization",
            "a",
            "b",
            "center_a",
            "center_b",
            "re",
            "im",
            "target",
        ],
    ),
    (
        "evolve",
        "coefficients.csv",
        &["kind", "omega", "weight", "re", "im"],
    ),
    (
        "evolve",
        "trajectory_expansion.csv",
        &["t", "x", "re_psi", "im_psi", "re_dpsi", "im_dpsi"],
    ),
    (
        "evolve",
        "trajectory_oracle.csv",
        &["t", "x", "re_psi", "im_psi", "re_dpsi", "im_dpsi"],
    ),
    (
        "evolve",
        "errors.csv",
        &["t", "energy_error", "weighted_error"],
    ),
    (
        "evolve",
        "truncation.csv",
        &[
            "cutoff",
            "energy_error",
            "weighted_error",
            "energy_vs_top",
            "weighted_vs_top",
        ],
    ),
    (
        "bands",
        "band_tables.csv",
        &["v", "m2", "case", "lo", "hi", "lo_closed", "hi_closed"],
    ),
    (
        "bands",
        "bv_positivity.csv",
        &["v", "min_eigenvalue", "floor"],
    ),
    (
        "demo-noncommute",
        "noncommute.csv",
        &["g", "commutator_defect"],
    ),
];

const JSON_REPORTS: &[(&str, &str, &str)] = &[
    ("kink", "tail_fit.json", "kink"),
    ("spectrum", "spectrum.json", "spectrum"),
    ("modes", "modes.json", "modes"),
    ("evolve", "decomposition.json", "decomposition"),
    ("evolve", "error_report.json", "error-report"),
    ("verify", "verify.json", "verify"),
    ("bands", "bands.json", "bands"),
    ("demo-noncommute", "noncommute.json", "noncommute"),
];

#[test]
fn every_subcommand_passes_and_writes_documented_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let subs = [
        "kink",
        "spectrum",
        "modes",
        "evolve",
        "verify",
        "bands",
        "demo-noncommute",
    ];
    for sub in subs {
        let out = tmp.path().join(sub);
        let o = run(sub, &quick_config(), &out, &[]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{sub}: {}{}",
            stdout(&o),
            stderr(&o)
        );
        assert!(!stdout(&o).contains("FAIL"), "{sub}: {}", stdout(&o));
    }
    for &(sub, file, header) in CSV_HEADERS {
        let table = read_table(&tmp.path().join(sub).join(file)).unwrap();
        assert_eq!(table.header, header, "{sub}/{file}");
        assert!(!table.rows.is_empty(), "{sub}/{file} has no rows");
    }
    for &(sub, file, kind) in JSON_REPORTS {
        let v = read_json(&tmp.path().join(sub).join(file));
        assert_eq!(v["schema_version"], SCHEMA_VERSION, "{sub}/{file}");
        assert_eq!(v["kind"], kind, "{sub}/{file}");
    }

    // Spot checks on values the plots rely on.
    let kink = read_table(&tmp.path().join("kink/kink.csv")).unwrap();
    let (x, s) = (kink.column("x").unwrap(), kink.column("s").unwrap());
    assert_eq!(x[0], 0.0);
    assert_eq!(s[0], 0.0);
    let i = x.iter().position(|&x| (x - 1.0).abs() < 1e-12).unwrap();
    assert!((s[i] - (1.0 / 2f64.sqrt()).tanh()).abs() < 1e-8);

    let discrete = read_table(&tmp.path().join("spectrum/discrete.csv")).unwrap();
    assert_eq!(discrete.rows.len(), 1);
    assert!((discrete.column("lambda").unwrap()[0] - 1.5).abs() < 1e-4);

    let verdict = read_json(&tmp.path().join("verify/verify.json"));
    assert_eq!(verdict["passed"], true);
    assert_eq!(verdict["failed"].as_array().unwrap().len(), 0);
}

#[test]
fn identical_config_gives_byte_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["evolve", "modes", "bands"] {
        let (a, b) = (
            tmp.path().join(format!("{sub}_a")),
            tmp.path().join(format!("{sub}_b")),
        );
        assert_eq!(run(sub, &quick_config(), &a, &[]).status.code(), Some(0));
        assert_eq!(run(sub, &quick_config(), &b, &[]).status.code(), Some(0));
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
        for (name, bytes) in &sa {
            assert!(bytes == &sb[name], "{sub}/{name} differs between runs");
        }
    }
}

#[test]
fn schema_errors_exit_2_and_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let empty = tmp.path().join("empty.json");
    fs::write(&empty, "{}").unwrap();
    let o = run("verify", &empty, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("missing field `model`"),
        "{}",
        stderr(&o)
    );

    let missing = patched_config(tmp.path(), |v| {
        v.as_object_mut().unwrap().remove("grid");
    });
    let o = run("kink", &missing, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("missing field `grid`"),
        "{}",
        stderr(&o)
    );

    let unknown = patched_config(tmp.path(), |v| {
        v["evolve"]["t_ends"] = 3.0.into();
    });
    let o = run("evolve", &unknown, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("unknown field `t_ends`"),
        "{}",
        stderr(&o)
    );

    let version = patched_config(tmp.path(), |v| {
        v["schema_version"] = 99.into();
    });
    let o = run("spectrum", &version, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema_version 99"), "{}", stderr(&o));

    let superluminal = patched_config(tmp.path(), |v| {
        v["model"]["v"] = 1.0.into();
    });
    assert_eq!(run("kink", &superluminal, &out, &[]).status.code(), Some(2));

    let o = run("kink", &tmp.path().join("absent.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn injected_normalization_scale_fails_verify_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let config = patched_config(tmp.path(), |v| {
        v["verify"]["inject_normalization_scale"] = 2.0.into();
    });
    let out = tmp.path().join("out");
    let o = run("verify", &config, &out, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    assert!(
        stdout(&o).contains("FAIL delta_normalization_check.diagonal"),
        "{}",
        stdout(&o)
    );
    let verdict = read_json(&out.join("verify.json"));
    assert_eq!(verdict["passed"], false);
    let failed: Vec<&str> = verdict["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap())
        .collect();
    assert!(
        failed.contains(&"delta_normalization_check.diagonal"),
        "{failed:?}"
    );
    // A uniform rescaling leaves the other checks alone.
    assert!(
        failed
            .iter()
            .all(|f| f.starts_with("delta_normalization_check") || f.starts_with("symplectic_")),
        "{failed:?}"
    );
}

#[test]
fn tolerance_overrides_come_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(
        "bands",
        &quick_config(),
        &out,
        &[("KREIN_TOL_KERNEL", "1e-12")],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(
        stdout(&o).contains("FAIL bands.kernel_vector"),
        "{}",
        stdout(&o)
    );

    let o = run(
        "bands",
        &quick_config(),
        &out,
        &[("KREIN_TOL_KERNEL", "tight")],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("KREIN_TOL_KERNEL"), "{}", stderr(&o));
}
