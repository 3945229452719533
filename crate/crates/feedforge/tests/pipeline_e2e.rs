//! End-to-end tests driving the compiled binary: exit codes, staged
//! composition, artifact hygiene and solver comparisons.

use feedforge::fixture::{self, DEMO10, GRID15};
use feedforge::pipeline::{PfDocument, RunManifest, MANIFEST_FILE, PF_FILE};
use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feedforge"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_str().expect("utf-8 path").to_string()
}

/// All regular files in a directory, by name.
fn dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("readable dir") {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            let name = entry.file_name().to_string_lossy().into_owned();
            out.insert(name, std::fs::read(entry.path()).unwrap());
        }
    }
    out
}

/// The demo config with its input paths made absolute so the file can be
/// rewritten into a temp directory, plus an extra TOML tail.
fn demo_config(extra: &str) -> String {
    let street = fixture::fixtures_dir().join(DEMO10).join("street.osm");
    format!(
        r#"seed = 7

[input]
path = "{street}"
format = "osm-xml"

[synthesis]
solver = "heuristic"

[synthesis.source]
node = 1

[synthesis.required]
nodes = [6, 10]

[electrify]
households = 24

[electrify.allocation]
total_p_mw = 0.18
power_factor = 0.9
{extra}"#,
        street = path_str(&street),
    )
}

fn grid_config(solver: &str, timeout_s: f64) -> String {
    let dir = fixture::fixtures_dir().join(GRID15);
    format!(
        r#"seed = 42

[input]
path = "{street}"
format = "geojson"
activity_path = "{activity}"

[synthesis]
solver = "{solver}"
timeout_s = {timeout_s}

[synthesis.source]
coord = [-75.2, 40]

[synthesis.required]
top_k = 10

[electrify]
households = 360

[electrify.allocation]
total_p_mw = 1.44
beta = 1.0
centroids = [[-75.1996247481741, 40.000215594682]]

[powerflow]
v_min = 0.95
"#,
        street = path_str(&dir.join("street.geojson")),
        activity = path_str(&dir.join("activity.geojson")),
    )
}

const ARTIFACTS: [&str; 6] = [
    "network.json",
    "feeder.dss",
    "feeder.geojson",
    "overlay.svg",
    "voltage_profile.svg",
    "summary.json",
];

#[test]
fn demo_run_exits_zero_and_emits_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let config = fixture::config_path(DEMO10);
    let out = cli(&["run", "--config", &path_str(&config), "--out", &path_str(&out_dir)]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(stdout.contains("Number of buses"), "summary table missing: {stdout}");
    let files = dir_files(&out_dir);
    for name in ARTIFACTS {
        assert!(files.contains_key(name), "{name} missing");
    }
    for name in ["street.json", "candidate.json", "solution.json", "feeder.json", PF_FILE] {
        assert!(files.contains_key(name), "{name} missing");
    }
    assert!(files.contains_key(MANIFEST_FILE));
}

#[test]
fn staged_subcommands_reproduce_the_run_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    let staged = tmp.path().join("staged");
    let config = path_str(&fixture::config_path(DEMO10));
    assert_eq!(code(&cli(&["run", "--config", &config, "--out", &path_str(&run_dir)])), 0);

    let staged_s = path_str(&staged);
    for stage in ["ingest", "synth", "electrify", "pf", "report"] {
        let mut args = vec![stage, "--config", config.as_str()];
        if stage != "ingest" {
            args.extend(["--in", staged_s.as_str()]);
        }
        args.extend(["--out", staged_s.as_str()]);
        let out = cli(&args);
        assert_eq!(code(&out), 0, "{stage} failed: {}", stderr(&out));
    }

    let mut from_run = dir_files(&run_dir);
    let from_stages = dir_files(&staged);
    assert!(from_run.remove(MANIFEST_FILE).is_some());
    assert!(!from_stages.contains_key(MANIFEST_FILE), "only run writes the manifest");
    let run_names: Vec<&String> = from_run.keys().collect();
    let staged_names: Vec<&String> = from_stages.keys().collect();
    assert_eq!(run_names, staged_names);
    for (name, bytes) in &from_run {
        assert_eq!(bytes, &from_stages[name], "{name} differs between run and stages");
    }
}

#[test]
fn config_problems_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = path_str(&tmp.path().join("out"));

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "nonsense = 1\n").unwrap();
    let out = cli(&["run", "--config", &path_str(&bad), "--out", &out_dir]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error:"));

    let missing = tmp.path().join("not_there.toml");
    let out = cli(&["run", "--config", &path_str(&missing), "--out", &out_dir]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn missing_street_file_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.toml");
    let body = demo_config("").replace(
        &path_str(&fixture::fixtures_dir().join(DEMO10).join("street.osm")),
        &path_str(&tmp.path().join("nowhere.osm")),
    );
    std::fs::write(&config, body).unwrap();
    let out_dir = tmp.path().join("out");
    let out = cli(&["run", "--config", &path_str(&config), "--out", &path_str(&out_dir)]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("ingest"), "stderr: {}", stderr(&out));
}

#[test]
fn exact_timeout_exits_four_but_still_emits_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.toml");
    std::fs::write(&config, grid_config("exact", 1e-6)).unwrap();
    let out_dir = tmp.path().join("out");
    let out = cli(&["run", "--config", &path_str(&config), "--out", &path_str(&out_dir)]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr(&out));
    let files = dir_files(&out_dir);
    for name in ARTIFACTS {
        assert!(files.contains_key(name), "{name} missing after timeout");
    }
    let manifest: RunManifest =
        serde_json::from_slice(&files[MANIFEST_FILE]).expect("manifest parses");
    let solver = manifest.solver.expect("solver info recorded");
    assert!(!solver.proven_optimal);
    assert!(solver.gap > 0.0);
}

#[test]
fn diverging_scenario_exits_with_code_five() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.toml");
    std::fs::write(&config, demo_config("\n[powerflow.factors]\ninsane = 1e6\n")).unwrap();
    let out_dir = tmp.path().join("out");
    let out = cli(&["run", "--config", &path_str(&config), "--out", &path_str(&out_dir)]);
    assert_eq!(code(&out), 5, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("insane"), "stderr: {}", stderr(&out));
}

#[test]
fn loose_tolerance_stays_within_its_own_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    let config = path_str(&fixture::config_path(DEMO10));
    assert_eq!(code(&cli(&["run", "--config", &config, "--out", &path_str(&run_dir)])), 0);

    let mut results = Vec::new();
    for tol in ["1e-4", "1e-12"] {
        let cfg = tmp.path().join(format!("tol_{tol}.toml"));
        std::fs::write(&cfg, demo_config(&format!("\n[powerflow]\ntol = {tol}\n"))).unwrap();
        let out_dir = tmp.path().join(format!("out_{tol}"));
        let out = cli(&[
            "pf",
            "--config",
            &path_str(&cfg),
            "--in",
            &path_str(&run_dir),
            "--out",
            &path_str(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        let doc: PfDocument =
            serde_json::from_slice(&std::fs::read(out_dir.join(PF_FILE)).unwrap()).unwrap();
        results.push(doc);
    }
    let (loose, tight) = (&results[0], &results[1]);
    for (name, outcome) in &tight.scenarios {
        let loose_v = &loose.scenarios[name].result.v_pu;
        for (bus, &v) in &outcome.result.v_pu {
            assert!(
                (loose_v[bus] - v).abs() <= 1e-4,
                "scenario {name} bus {bus}: {} vs {v}",
                loose_v[bus]
            );
        }
        assert!(loose.scenarios[name].result.iterations <= outcome.result.iterations);
    }
}

#[test]
fn exact_objective_never_exceeds_the_heuristic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut objectives = BTreeMap::new();
    for solver in ["exact", "heuristic"] {
        let config = tmp.path().join(format!("{solver}.toml"));
        std::fs::write(&config, grid_config(solver, 55.0)).unwrap();
        let out_dir = tmp.path().join(solver);
        let out =
            cli(&["run", "--config", &path_str(&config), "--out", &path_str(&out_dir)]);
        assert_eq!(code(&out), 0, "{solver} stderr: {}", stderr(&out));
        let manifest: RunManifest =
            serde_json::from_slice(&std::fs::read(out_dir.join(MANIFEST_FILE)).unwrap())
                .unwrap();
        let info = manifest.solver.expect("solver info recorded");
        if solver == "exact" {
            assert!(info.proven_optimal, "exact run should prove optimality");
        }
        objectives.insert(solver, info.objective);
    }
    let exact = objectives["exact"];
    let heuristic = objectives["heuristic"];
    assert!(
        exact <= heuristic * (1.0 + 1e-12),
        "exact {exact} worse than heuristic {heuristic}"
    );
}

#[test]
fn electrify_failure_rolls_back_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("cfg.toml");
    // Only a residential template: the trunk is tertiary, so electrify
    // fails after ingest and synth already succeeded.
    let extra = "\n[electrify.templates.residential]\n\
                 r_per_km = 0.642\nx_per_km = 0.083\nrating_mva = 0.4\n";
    std::fs::write(&config, demo_config(extra)).unwrap();
    let out_dir = tmp.path().join("out");
    let out = cli(&["run", "--config", &path_str(&config), "--out", &path_str(&out_dir)]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("electrify"), "stderr: {}", stderr(&out));
    let leftovers = dir_files(&out_dir);
    assert!(leftovers.is_empty(), "files left behind: {:?}", leftovers.keys());
}
