use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const ACKLEY: &str = r#"
[problem]
objective = "ackley"
variables = [{ lower = -2.0, upper = 2.0, count = 5, repeat = 2 }]
"#;

const EGGHOLDER: &str = r#"
[problem]
objective = "eggholder"
variables = [{ lower = -512.0, upper = 512.0, count = 6, repeat = 4 }]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn tunelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunelab"))
        .args(args)
        .output()
        .unwrap()
}

fn run_cmd(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    tunelab(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn numbers(v: &Value, out: &mut HashSet<u64>) {
    match v {
        Value::Number(n) => {
            out.insert(n.as_f64().unwrap().to_bits());
        }
        Value::Array(a) => a.iter().for_each(|x| numbers(x, out)),
        Value::Object(o) => o.values().for_each(|x| numbers(x, out)),
        _ => {}
    }
}

fn svg_values(path: &Path) -> Vec<(f64, String)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| l.contains(r#"class="value""#))
        .map(|l| {
            let v = l
                .split("data-value=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap();
            let text = l.split('>').nth(1).unwrap().split('<').next().unwrap();
            (v.parse().unwrap(), text.to_string())
        })
        .collect()
}

fn run_config(problem: &str, budget: usize) -> String {
    format!(
        "{problem}
[campaign]
runs = 3
budget = {budget}
master_seed = 11

[method]
method = \"bbo\"
pop_size = 12
alpha = 0.9
mut_prob = 0.3
mut_step_size = 0.05
mut_step_size_damp = 0.99
"
    )
}

fn tune_config(problem: &str, grid: &str, runs: usize, budget: usize) -> String {
    format!(
        "{problem}
[campaign]
runs = {runs}
budget = {budget}
master_seed = 5
validation_runs = 4

[grid]
{grid}
"
    )
}

#[test]
fn run_writes_three_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &run_config(ACKLEY, 28));
    let out = dir.path().join("out");
    let o = run_cmd("run", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trace.csv", "utility.json", "apc.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(out.join("trace.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "config_index,run_index,iteration,best_fitness");
    assert_eq!(lines.len(), 1 + 3 * 29);
    let summary = json(&out.join("utility.json"));
    let mut nums = HashSet::new();
    numbers(&summary, &mut nums);
    for line in &lines[1..] {
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(nums.contains(&v.to_bits()));
    }
    for (v, _) in svg_values(&out.join("apc.svg")) {
        assert!(nums.contains(&v.to_bits()));
    }
    let files: Vec<_> = fs::read_dir(&out).unwrap().collect();
    assert_eq!(files.len(), 3, "no temporary files are left behind");
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &run_config(EGGHOLDER, 28));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_cmd("run", &cfg, &a, &["--seed", "42"]).status.success());
    assert!(
        run_cmd("run", &cfg, &b, &["--seed", "42", "--workers", "3"])
            .status
            .success()
    );
    assert_eq!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(b.join("trace.csv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("utility.json")).unwrap(),
        fs::read(b.join("utility.json")).unwrap()
    );
    let c = dir.path().join("c");
    assert!(run_cmd("run", &cfg, &c, &["--seed", "43"]).status.success());
    assert_ne!(
        fs::read(a.join("trace.csv")).unwrap(),
        fs::read(c.join("trace.csv")).unwrap()
    );
}

#[test]
fn indivisible_budget_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", &run_config(ACKLEY, 141));
    let out = dir.path().join("out");
    let o = run_cmd("run", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not divisible"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = run_config(ACKLEY, 14).replace("runs = 3", "runs = 3\nrunz = 4");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = run_cmd("run", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("runz"), "{}", stderr(&o));
    let text = run_config(ACKLEY, 14).replace("alpha = 0.9", "alpha = 0.9\nbeta = 1");
    let cfg = write_config(dir.path(), "d.toml", &text);
    assert_eq!(
        run_cmd("run", &cfg, &dir.path().join("out"), &[])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(tunelab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tunelab(&["run"]).status.code(), Some(1));
    assert_eq!(
        tunelab(&["run", "--config", "/nonexistent.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        tunelab(&["tune", "--config", "x", "--strategy", "3"])
            .status
            .code(),
        Some(1)
    );
    assert!(tunelab(&["--help"]).status.success());
}

#[test]
fn missing_sections_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", ACKLEY);
    let out = dir.path().join("out");
    let o = run_cmd("run", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[method]"));
    let o = run_cmd("tune", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[grid]"));
}

#[test]
fn table_holes_fail_at_runtime_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // only row 0 of a 3 x 3 space
    fs::write(
        dir.path().join("t.csv"),
        "i1,i2,fitness\n0,0,1.0\n0,1,2.0\n0,2,3.0\n",
    )
    .unwrap();
    let text = run_config(
        "[problem]\nobjective = \"table\"\ntable = \"t.csv\"\nvariables = [{ count = 3, repeat = 2 }]\n",
        14,
    );
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("out");
    let o = run_cmd("run", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("no entry"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn relative_table_paths_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("i1,i2,fitness\n");
    for i in 0..3 {
        for j in 0..3 {
            table += &format!("{i},{j},{}\n", 10.0 - (i * 3 + j) as f64);
        }
    }
    fs::create_dir(dir.path().join("data")).unwrap();
    fs::write(dir.path().join("data/t.csv"), table).unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[problem]\nobjective = \"table\"\ntable = \"data/t.csv\"\nvariables = [{ count = 3, repeat = 2 }]\n",
    );
    let out = dir.path().join("out");
    let o = run_cmd("oracle", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&out.join("oracle.json"));
    assert_eq!(report["fitness"], 2.0);
    assert_eq!(report["indices"], serde_json::json!([2, 2]));
    assert_eq!(report["cardinality"], 9);
    let missing = write_config(
        dir.path(),
        "m.toml",
        "[problem]\nobjective = \"table\"\ntable = \"nope.csv\"\nvariables = [{ count = 3, repeat = 2 }]\n",
    );
    let o = run_cmd("oracle", &missing, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.csv"));
}

#[test]
fn oracle_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "a.toml", ACKLEY);
    assert!(run_cmd("oracle", &cfg, &out, &[]).status.success());
    let report = json(&out.join("oracle.json"));
    assert_eq!(report["fitness"], 0.0);
    assert_eq!(report["values"], serde_json::json!([0.0, 0.0]));

    let egg = "[problem]\nobjective = \"eggholder\"\nvariables = [{ lower = -512.0, upper = 512.0, count = 30, repeat = 2 }]\n";
    let cfg = write_config(dir.path(), "e.toml", egg);
    assert!(run_cmd("oracle", &cfg, &out, &[]).status.success());
    let report = json(&out.join("oracle.json"));
    assert_eq!(report["fitness"].as_f64().unwrap(), -955.7601280814133);
    assert_eq!(report["indices"], serde_json::json!([29, 26]));
}

#[test]
fn oracle_limit_names_the_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{EGGHOLDER}\n[campaign]\noracle_limit = 1000\n");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let o = run_cmd("oracle", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1296"), "{}", stderr(&o));
}

#[test]
fn desk_pso_strategy1_lists_sixteen_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &tune_config(ACKLEY, "method = \"pso\"\npreset = \"desk\"", 2, 14),
    );
    let out = dir.path().join("out");
    let o = run_cmd("tune", &cfg, &out, &["--strategy", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&out.join("report.json"));
    assert_eq!(report["strategy"], 1);
    assert_eq!(report["phases"].as_array().unwrap().len(), 1);
    assert_eq!(report["phases"][0]["results"].as_array().unwrap().len(), 16);
    assert_eq!(report["total_runs"], 16 * 2 + 4);
    assert!(report["validation"]["success_rate"].as_f64().is_some());
    for f in ["report.csv", "boxplot_phase0.svg", "best_apc.svg"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    // everything plotted or tabulated is in the JSON
    let mut nums = HashSet::new();
    numbers(&report, &mut nums);
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    for line in csv.lines().skip(1) {
        for cell in line.split(',') {
            let v: f64 = cell.parse().unwrap();
            assert!(nums.contains(&v.to_bits()), "{cell}");
        }
    }
    let boxes = svg_values(&out.join("boxplot_phase0.svg"));
    let fc = &report["phases"][0]["fc_summary"];
    let expected: Vec<f64> = ["max", "q75", "median", "q25", "min"]
        .iter()
        .map(|k| fc[k].as_f64().unwrap())
        .collect();
    assert_eq!(boxes.iter().map(|b| b.0).collect::<Vec<_>>(), expected);
    for (v, text) in boxes.iter().chain(&svg_values(&out.join("best_apc.svg"))) {
        assert!(nums.contains(&v.to_bits()));
        assert!((text.parse::<f64>().unwrap() - v).abs() <= 5e-7 * v.abs().max(1.0));
    }
}

#[test]
fn strategy2_on_a_minimal_grid_drops_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "method = \"pso\"\npreset = \"desk\"\n[grid.values]\nswarm_size = [6, 8]\nmin_fract_neigh = [0.2]\nself_adj = [1.49]\nsocial_adj = [1.49]";
    let cfg = write_config(dir.path(), "c.toml", &tune_config(EGGHOLDER, grid, 2, 14));
    let out = dir.path().join("out");
    let o = run_cmd("tune", &cfg, &out, &["--strategy", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&out.join("report.json"));
    let phases = report["phases"].as_array().unwrap();
    assert_eq!(phases.len(), 3);
    for p in phases {
        assert!(p["fixed"].as_array().unwrap().is_empty());
        assert!(p["dropped"].as_array().unwrap().is_empty());
    }
    assert_eq!(report["total_runs"], 3 * 2 * 2 + 4);
    for k in 0..3 {
        assert!(out.join(format!("boxplot_phase{k}.svg")).is_file());
    }
}

#[test]
fn tune_reports_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let grid = "method = \"bbo\"\npreset = \"desk\"\n[grid.values]\npop_size = [10, 14]\nmut_prob = [0.3, 0.4, 0.5]";
    let cfg = write_config(dir.path(), "c.toml", &tune_config(EGGHOLDER, grid, 2, 14));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_cmd("tune", &cfg, &a, &["--workers", "1"])
        .status
        .success());
    assert!(run_cmd("tune", &cfg, &b, &["--workers", "4"])
        .status
        .success());
    for f in [
        "report.json",
        "report.csv",
        "boxplot_phase1.svg",
        "best_apc.svg",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn full_pso_grid_runs_5120_assessment_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &tune_config(ACKLEY, "method = \"pso\"\npreset = \"table2\"", 20, 14),
    );
    let out = dir.path().join("out");
    let o = run_cmd("tune", &cfg, &out, &["--strategy", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&out.join("report.json"));
    assert_eq!(
        report["phases"][0]["results"].as_array().unwrap().len(),
        256
    );
    let validation = report["validation"]["runs"].as_u64().unwrap();
    assert_eq!(report["total_runs"].as_u64().unwrap() - validation, 5120);
}

#[test]
fn report_compares_every_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results");
    for (name, method) in [("pso", "pso"), ("bbo", "bbo")] {
        let grid = format!("method = \"{method}\"\npreset = \"desk\"");
        let cfg = write_config(
            dir.path(),
            &format!("{name}.toml"),
            &tune_config(ACKLEY, &grid, 2, 14),
        );
        let o = run_cmd("tune", &cfg, &results.join(name), &["--strategy", "1"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let o = tunelab(&["report", results.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(results.join("comparison_boxplot.svg")).unwrap();
    assert!(svg.contains("ackley/2 bbo") && svg.contains("ackley/2 pso"));
    assert!(results.join("comparison_apc.svg").is_file());
    assert!(results.join("influence_0_bbo_phase0.svg").is_file());
    assert!(results.join("influence_1_pso_phase0.svg").is_file());

    // box labels are the reports' five-number summaries, bbo first
    let mut expected = Vec::new();
    for name in ["bbo", "pso"] {
        let fc = json(&results.join(name).join("report.json"))["phases"][0]["fc_summary"].clone();
        expected.extend(
            ["max", "q75", "median", "q25", "min"]
                .iter()
                .map(|k| fc[k].as_f64().unwrap()),
        );
    }
    let got: Vec<f64> = svg_values(&results.join("comparison_boxplot.svg"))
        .iter()
        .map(|v| v.0)
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn report_rejects_empty_and_corrupt_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = tunelab(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    fs::create_dir(dir.path().join("broken")).unwrap();
    fs::write(dir.path().join("broken/report.json"), "{\"strategy\": 1").unwrap();
    let o = tunelab(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("broken"), "{}", stderr(&o));
    assert!(!dir.path().join("comparison_boxplot.svg").exists());
    let o = tunelab(&["report", "/nonexistent/dir"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shipped_campaigns_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../campaigns");
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let o = run_cmd("oracle", &path, dir.path(), &[]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
