use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, ensure, Context};
use serde::Serialize;
use tunelab_core::metrics::{Apc, UtilityReport};
use tunelab_core::objectives::brute_force_optimum;
use tunelab_core::optimizers::{OptimizerConfig, RunTrace};
use tunelab_core::space::IndexVector;
use tunelab_core::tuner::{argmin_fc, Tuner, TuningReport, TuningSettings};

use crate::config::{self, Campaign, Overrides};
use crate::output::Outputs;
use crate::svg;

/// A failed command and the exit code it maps to.
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub const USAGE: u8 = 1;
pub const RUNTIME: u8 = 2;

trait Classify<T> {
    fn or_exit(self, code: u8) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Outcome<T> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn load(path: &Path, overrides: &Overrides) -> Outcome<Campaign> {
    config::load(path, overrides).or_exit(USAGE)
}

fn finish(outputs: Outputs, dir: &Path) -> Outcome {
    for path in outputs.write_all(dir).or_exit(RUNTIME)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct RunSummary<'a> {
    objective: String,
    config: &'a OptimizerConfig,
    settings: &'a TuningSettings,
    seeds: &'a [u64],
    utility: &'a UtilityReport,
    apc: &'a Apc,
    traces: &'a [RunTrace],
}

pub fn run(path: &Path, overrides: &Overrides) -> Outcome {
    let campaign = load(path, overrides)?;
    let config = campaign
        .method
        .as_ref()
        .ok_or_else(|| anyhow!("`run` needs a [method] section"))
        .or_exit(USAGE)?;
    let tuner = Tuner::new(&campaign.spec, campaign.settings.clone()).or_exit(USAGE)?;
    let (result, traces) = tuner.assess_with_traces(config, 0, 0).or_exit(RUNTIME)?;

    let mut csv = String::from("config_index,run_index,iteration,best_fitness\n");
    for (r, trace) in traces.iter().enumerate() {
        for (it, v) in trace.best.iter().enumerate() {
            let _ = writeln!(csv, "0,{r},{it},{v:?}");
        }
    }
    let summary = RunSummary {
        objective: campaign.spec.label(),
        config,
        settings: tuner.settings(),
        seeds: &result.seeds,
        utility: &result.utility,
        apc: &result.apc,
        traces: &traces,
    };
    let json = serde_json::to_string_pretty(&summary).or_exit(RUNTIME)?;
    let chart = svg::line_chart(
        &format!("APC of {} on {}", config.method(), summary.objective),
        &[svg::Series {
            label: config.method().to_string(),
            points: &result.apc.mean_best,
        }],
    );
    println!(
        "{} on {}: F_C = {:?}, F_A = {:?} over {} runs",
        config.method(),
        summary.objective,
        result.utility.f_c,
        result.utility.f_a,
        result.apc.runs
    );
    let mut out = Outputs::default();
    out.add("trace.csv", csv);
    out.add("utility.json", json + "\n");
    out.add("apc.svg", chart);
    finish(out, &campaign.out)
}

pub fn tune(path: &Path, overrides: &Overrides) -> Outcome {
    let campaign = load(path, overrides)?;
    let grid = campaign
        .grid
        .as_ref()
        .ok_or_else(|| anyhow!("`tune` needs a [grid] section"))
        .or_exit(USAGE)?;
    let cardinality = campaign.spec.space().cardinality().or_exit(USAGE)?;
    let tuner = Tuner::new(&campaign.spec, campaign.settings.clone()).or_exit(USAGE)?;

    let mut report = match campaign.strategy {
        1 => tuner.strategy1(grid),
        _ => tuner.strategy2(grid),
    }
    .or_exit(RUNTIME)?;
    let optimum = if cardinality <= campaign.oracle_limit {
        Some(
            brute_force_optimum(&campaign.spec, campaign.oracle_limit)
                .or_exit(RUNTIME)?
                .fitness,
        )
    } else {
        None
    };
    tuner
        .attach_validation(&mut report, optimum)
        .or_exit(RUNTIME)?;
    check_report(&report).or_exit(RUNTIME)?;

    let mut csv = Vec::new();
    report.write_csv(&mut csv).or_exit(RUNTIME)?;
    let mut out = Outputs::default();
    out.add("report.json", report.to_json().or_exit(RUNTIME)? + "\n");
    out.add("report.csv", csv);
    for phase in &report.phases {
        out.add(
            format!("boxplot_phase{}.svg", phase.phase),
            svg::box_plot(
                &format!(
                    "F_C over {} {} configs, phase {}",
                    phase.results.len(),
                    report.method,
                    phase.phase
                ),
                &[(report.objective.clone(), phase.fc_summary)],
            ),
        );
    }
    out.add(
        "best_apc.svg",
        svg::line_chart(
            &format!("APC of the tuned {} configuration", report.method),
            &[svg::Series {
                label: format!("config {}", report.best.config_index),
                points: &report.best.apc.mean_best,
            }],
        ),
    );
    println!(
        "strategy {} on {}: best {} config {} with F_C = {:?}; {} runs",
        report.strategy,
        report.objective,
        report.method,
        serde_json::to_string(&report.best.config).or_exit(RUNTIME)?,
        report.best.utility.f_c,
        report.total_runs
    );
    finish(out, &campaign.out)
}

/// Invariants every campaign must satisfy before its report is written.
fn check_report(report: &TuningReport) -> anyhow::Result<()> {
    ensure!(
        report.total_runs == report.expected_runs(),
        "executed {} runs, expected {}",
        report.total_runs,
        report.expected_runs()
    );
    let last = report.final_phase();
    let best = argmin_fc(&last.results).context("final phase has no results")?;
    ensure!(
        last.results
            .iter()
            .all(|r| report.best.utility.f_c <= r.utility.f_c)
            && last.results[best] == report.best,
        "reported best configuration is not the minimum of its phase"
    );
    report.check_seeds()?;
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    objective: String,
    indices: IndexVector,
    values: Vec<f64>,
    fitness: f64,
    cardinality: u64,
    wall_time_seconds: f64,
}

pub fn oracle(path: &Path, overrides: &Overrides) -> Outcome {
    let campaign = load(path, overrides)?;
    let cardinality = campaign.spec.space().cardinality().or_exit(USAGE)?;
    if cardinality > campaign.oracle_limit {
        return Err(anyhow!(
            "space cardinality {cardinality} exceeds the oracle limit {}",
            campaign.oracle_limit
        ))
        .or_exit(USAGE);
    }
    let start = Instant::now();
    let optimum = brute_force_optimum(&campaign.spec, campaign.oracle_limit).or_exit(RUNTIME)?;
    let report = OracleReport {
        objective: campaign.spec.label(),
        values: campaign
            .spec
            .space()
            .decode(&optimum.indices)
            .or_exit(RUNTIME)?,
        indices: optimum.indices,
        fitness: optimum.fitness,
        cardinality: optimum.cardinality,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    println!(
        "{}: minimum {:?} at {:?} among {} solutions",
        report.objective, report.fitness, report.indices.0, report.cardinality
    );
    let mut out = Outputs::default();
    out.add(
        "oracle.json",
        serde_json::to_string_pretty(&report).or_exit(RUNTIME)? + "\n",
    );
    finish(out, &campaign.out)
}

fn find_reports(dir: &Path, found: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if path.is_dir() {
            find_reports(&path, found)?;
        } else if path.file_name().is_some_and(|n| n == "report.json") {
            found.push(path);
        }
    }
    Ok(())
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn report(dir: &Path, out: Option<&Path>) -> Outcome {
    if !dir.is_dir() {
        return Err(anyhow!("{} is not a directory", dir.display())).or_exit(USAGE);
    }
    let mut paths = Vec::new();
    find_reports(dir, &mut paths)
        .with_context(|| format!("cannot scan {}", dir.display()))
        .or_exit(USAGE)?;
    if paths.is_empty() {
        return Err(anyhow!("no report.json found under {}", dir.display())).or_exit(USAGE);
    }
    let mut reports = Vec::new();
    let mut bad = Vec::new();
    for path in &paths {
        let parsed = std::fs::read_to_string(path)
            .map_err(anyhow::Error::from)
            .and_then(|t| Ok(serde_json::from_str::<TuningReport>(&t)?));
        match parsed {
            Ok(r) => reports.push((path, r)),
            Err(e) => bad.push(format!("{}: {e}", path.display())),
        }
    }
    if !bad.is_empty() {
        return Err(anyhow!("unreadable reports:\n  {}", bad.join("\n  "))).or_exit(USAGE);
    }

    let label = |path: &Path, r: &TuningReport| {
        let rel = path
            .parent()
            .and_then(|p| p.strip_prefix(dir).ok())
            .unwrap_or(Path::new(""));
        if rel.as_os_str().is_empty() {
            format!("{} s{}", r.method, r.strategy)
        } else {
            rel.display().to_string()
        }
    };
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by(|&a, &b| {
        reports[a]
            .1
            .objective
            .cmp(&reports[b].1.objective)
            .then(a.cmp(&b))
    });

    let boxes: Vec<(String, _)> = order
        .iter()
        .map(|&i| {
            let (p, r) = &reports[i];
            (
                format!("{} {}", r.objective, label(p, r)),
                r.phases[0].fc_summary,
            )
        })
        .collect();
    let series: Vec<svg::Series<'_>> = order
        .iter()
        .map(|&i| {
            let (p, r) = &reports[i];
            svg::Series {
                label: label(p, r),
                points: &r.best.apc.mean_best,
            }
        })
        .collect();

    let mut outputs = Outputs::default();
    outputs.add(
        "comparison_boxplot.svg",
        svg::box_plot("F_C across all assessed configurations", &boxes),
    );
    outputs.add(
        "comparison_apc.svg",
        svg::line_chart("APC of the tuned configurations", &series),
    );
    for (k, &i) in order.iter().enumerate() {
        let (p, r) = &reports[i];
        for phase in &r.phases {
            let bars: Vec<(String, f64)> = phase
                .influence
                .iter()
                .map(|inf| (inf.parameter.clone(), inf.influence))
                .collect();
            outputs.add(
                format!(
                    "influence_{k}_{}_phase{}.svg",
                    slug(&label(p, r)),
                    phase.phase
                ),
                svg::bar_chart(
                    &format!("Parameter influence, {} phase {}", label(p, r), phase.phase),
                    &bars,
                ),
            );
        }
    }
    println!("{} reports", reports.len());
    finish(outputs, out.unwrap_or(dir))
}
