//! Scenario files, suites and convergence tables.
//!
//! A scenario is a JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "tv-burgers",
//!   "model": {"dimension": 1, "flux": {"id": "burgers"}},
//!   "initial_data": {"id": "indicator", "lower": [-0.5], "upper": [0.5]},
//!   "grid": {"lower": [-2.0], "upper": [2.0], "cells": 256},
//!   "solver": {"end_time": 0.5},
//!   "estimates": ["tv_theorem"]
//! }
//! ```
//!
//! Outputs go to `<out>/<name>/`: one JSON report per estimate and
//! resolution, the final snapshots as CSV, step logs, and `summary.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{
    check_kruzkov, check_stability_theorem, check_tv_theorem, tv_special_ck, CoefficientOverrides, EstimateId,
    EstimateOptions, EstimateReport, Verdict,
};
use crate::fields::{io::write_csv, Grid};
use crate::models::{
    check_hypotheses, kappa_star_0_from_norms, legacy_coefficients, sup_norm, BalanceLawModel, Component,
    HypothesisBudget, ModelSpec,
};
use crate::solver::{
    convergence_study, solve, solve_pair, ExactSolution, InitialData, SolverConfig, Trajectory,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Cells along the first axis at resolution scale 1.
    pub cells: usize,
}

impl GridSpec {
    pub fn build(&self, scale: usize) -> Result<Grid> {
        Grid::covering(&self.lower, &self.upper, self.cells * scale)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSpec {
    pub relative: Option<f64>,
    pub absolute: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub model: ModelSpec,
    /// `(g, G)` for the stability estimate.
    #[serde(default)]
    pub perturbed_model: Option<ModelSpec>,
    pub initial_data: InitialData,
    /// `v₀` for the pair estimates; defaults to `u₀`.
    #[serde(default)]
    pub second_initial_data: Option<InitialData>,
    pub grid: GridSpec,
    #[serde(default = "default_scales")]
    pub resolution_scales: Vec<usize>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub estimates: Vec<EstimateId>,
    #[serde(default)]
    pub stability: Option<StabilitySpec>,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    #[serde(default)]
    pub coefficient_overrides: CoefficientOverrides,
    /// Exact solution for convergence tables.
    #[serde(default)]
    pub exact: Option<ExactSolution>,
    #[serde(default)]
    pub hypotheses: bool,
}

fn default_scales() -> Vec<usize> {
    vec![1, 2]
}

impl Scenario {
    pub fn from_str(text: &str, path: &Path) -> Result<Scenario> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        scenario.validate(path)?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Scenario::from_str(&text, path)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let bad = |message: String| Error::Config { path: path.to_path_buf(), message };
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(bad("`name` must be a non-empty file-name-safe string".into()));
        }
        let n = self.model.dimension;
        if self.grid.lower.len() != n || self.grid.upper.len() != n {
            return Err(bad(format!("`grid` bounds must have {n} entries")));
        }
        if self.perturbed_model.as_ref().is_some_and(|m| m.dimension != n) {
            return Err(bad("`perturbed_model` dimension differs from `model`".into()));
        }
        if self.resolution_scales.is_empty() || self.resolution_scales.contains(&0) {
            return Err(bad("`resolution_scales` must be non-empty and positive".into()));
        }
        if self.estimates.is_empty() {
            return Err(bad("`estimates` is empty".into()));
        }
        let needs_stability = self
            .estimates
            .iter()
            .any(|e| matches!(e, EstimateId::StabilityTheorem | EstimateId::StabilitySimplified));
        if needs_stability && self.stability.is_none() {
            return Err(bad("stability estimates need a `stability` block".into()));
        }
        self.solver.validate().map_err(|e| bad(e.to_string()))?;
        Ok(())
    }
}

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replaces the scale list with `[k, 2k]`.
    pub resolution_scale: Option<usize>,
    pub tolerance_rel: Option<f64>,
    pub tolerance_abs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub resolution_scale: usize,
    pub estimate: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub scenario: String,
    pub resolution_scale: usize,
    #[serde(rename = "N")]
    pub dimension: usize,
    pub kappa_star_0: f64,
    /// Legacy coefficient on the same slab as `kappa_star_0`.
    pub kappa0_old: f64,
    pub ratio: Option<f64>,
    pub nw_n: f64,
    pub kappa_star: f64,
    pub kappa_old: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub name: String,
    pub rows: Vec<SummaryRow>,
    pub coefficients: Vec<CoefficientRow>,
    /// Estimates violated at every resolution.
    pub persistent_violations: Vec<String>,
    pub reports: Vec<(usize, EstimateReport)>,
}

impl ScenarioOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.persistent_violations.is_empty() {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct Header {
    generated_unix_seconds: u64,
    tool: &'static str,
    version: &'static str,
}

fn header() -> Header {
    Header {
        generated_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
    }
}

#[derive(Serialize)]
struct ReportFile<'a, T: Serialize> {
    header: Header,
    scenario: &'a str,
    resolution_scale: usize,
    body: &'a T,
}

fn write_json<T: Serialize>(path: &Path, scenario: &str, scale: usize, body: &T) -> Result<()> {
    let file = ReportFile { header: header(), scenario, resolution_scale: scale, body };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_snapshot(path: &Path, traj: &Trajectory) -> Result<()> {
    let last = traj.last();
    write_csv(&last.field, Some(last.time), BufWriter::new(fs::File::create(path)?))
}

fn options_for(scenario: &Scenario, run: &RunOptions) -> EstimateOptions {
    let defaults = EstimateOptions::default();
    EstimateOptions {
        tolerance_rel: run.tolerance_rel.or(scenario.tolerance.relative).unwrap_or(defaults.tolerance_rel),
        tolerance_abs: run.tolerance_abs.or(scenario.tolerance.absolute),
        overrides: scenario.coefficient_overrides,
        ..defaults
    }
}

fn with_context(name: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::invalid(format!("scenario `{name}`: {other}")),
    }
}

fn coefficient_row(
    scenario: &Scenario,
    scale: usize,
    traj: &Trajectory,
    f: &BalanceLawModel,
    g: Option<&BalanceLawModel>,
    options: &EstimateOptions,
) -> Result<CoefficientRow> {
    let n = f.dimension();
    let s = &options.sampling;
    let slab = traj.range_track.sigma_slab()?;
    let grad = sup_norm(f, Component::FluxDuGrad, &slab, s)?.value;
    let src = sup_norm(f, Component::SourceDu, &slab, s)?.value;
    let kappa_star_0 = kappa_star_0_from_norms(n, grad, src);
    let matched = legacy_coefficients(f, None, &slab, s)?;
    let c = sup_norm(f, Component::FluxDu, &slab, s)?.value;
    let omega = traj.range_track.dilated_slab(2.0 * c * traj.last().time)?;
    let legacy = legacy_coefficients(f, g, &omega, s)?;
    let nw_n = n as f64 * crate::constants::wallis_integral(n);
    Ok(CoefficientRow {
        scenario: scenario.name.clone(),
        resolution_scale: scale,
        dimension: n,
        kappa_star_0,
        kappa0_old: matched.kappa0_old,
        ratio: (kappa_star_0 > 0.0).then(|| matched.kappa0_old / kappa_star_0),
        nw_n,
        kappa_star: src,
        kappa_old: legacy.kappa_old,
    })
}

/// Runs every estimate of the scenario at every resolution and writes the
/// artifacts under `out/<name>/`.
pub fn run_scenario(scenario: &Scenario, out: &Path, run: &RunOptions) -> Result<ScenarioOutcome> {
    let name = scenario.name.as_str();
    let dir = out.join(name);
    fs::create_dir_all(&dir)?;
    let scales = match run.resolution_scale {
        Some(k) => vec![k, 2 * k],
        None => scenario.resolution_scales.clone(),
    };
    let options = options_for(scenario, run);
    let f = scenario.model.build().map_err(|e| with_context(name, e))?;
    let g = scenario
        .perturbed_model
        .as_ref()
        .map(|m| m.build())
        .transpose()
        .map_err(|e| with_context(name, e))?;

    let mut rows = Vec::new();
    let mut coefficients = Vec::new();
    let mut reports = Vec::new();
    let mut violated: BTreeMap<String, usize> = BTreeMap::new();
    for &scale in &scales {
        let produced = run_resolution(scenario, scale, &f, g.as_ref(), &options, &dir)
            .map_err(|e| with_context(name, e))?;
        for report in produced.reports {
            let id = report.estimate_id.as_str().to_string();
            write_json(&dir.join(format!("{id}_r{scale}.json")), name, scale, &report)?;
            if report.verdict == Verdict::Violated {
                *violated.entry(id.clone()).or_default() += 1;
            }
            rows.push(SummaryRow {
                scenario: name.to_string(),
                resolution_scale: scale,
                estimate: id,
                lhs: report.lhs,
                rhs: report.rhs,
                margin: report.margin,
                verdict: report.verdict.as_str().to_string(),
            });
            reports.push((scale, report));
        }
        coefficients.push(produced.coefficients);
    }
    let persistent_violations = violated
        .into_iter()
        .filter(|(_, count)| *count == scales.len())
        .map(|(id, _)| id)
        .collect();
    let outcome = ScenarioOutcome { name: name.to_string(), rows, coefficients, persistent_violations, reports };
    write_summary(&dir.join("summary.csv"), &outcome.rows, &[])?;
    write_coefficients(&dir.join("coefficients.csv"), &outcome.coefficients)?;
    Ok(outcome)
}

struct Produced {
    reports: Vec<EstimateReport>,
    coefficients: CoefficientRow,
}

fn run_resolution(
    scenario: &Scenario,
    scale: usize,
    f: &BalanceLawModel,
    g: Option<&BalanceLawModel>,
    options: &EstimateOptions,
    dir: &Path,
) -> Result<Produced> {
    let grid = scenario.grid.build(scale)?;
    let u0 = scenario.initial_data.sample(&grid)?;
    let v0 = match &scenario.second_initial_data {
        Some(d) => d.sample(&grid)?,
        None => u0.clone(),
    };
    let wants = |id: EstimateId| scenario.estimates.contains(&id);
    let mut reports = Vec::new();

    let single = solve(f, &u0, &scenario.solver)?;
    write_snapshot(&dir.join(format!("u_r{scale}.csv")), &single)?;
    single.write_diagnostics(BufWriter::new(fs::File::create(dir.join(format!("steps_r{scale}.csv")))?))?;
    if wants(EstimateId::TvTheorem) {
        reports.push(check_tv_theorem(&single, f, options)?);
    }
    if wants(EstimateId::TvSpecialCk) {
        reports.push(tv_special_ck(&single, f, options)?);
    }
    if wants(EstimateId::Kruzkov) {
        let (u, v) = solve_pair(f, &u0, f, &v0, &scenario.solver)?;
        write_snapshot(&dir.join(format!("v_kruzkov_r{scale}.csv")), &v)?;
        reports.push(check_kruzkov(&u, &v, f, options)?);
    }
    if wants(EstimateId::StabilityTheorem) || wants(EstimateId::StabilitySimplified) {
        let g = g.unwrap_or(f);
        let stab = scenario.stability.as_ref().expect("validated");
        let (u, v) = solve_pair(f, &u0, g, &v0, &scenario.solver)?;
        write_snapshot(&dir.join(format!("v_stability_r{scale}.csv")), &v)?;
        let r = check_stability_theorem(&u, &v, f, g, stab.radius, &stab.center, options)?;
        if wants(EstimateId::StabilityTheorem) {
            reports.push(r.sharp);
        }
        if wants(EstimateId::StabilitySimplified) {
            reports.push(r.simplified);
        }
    }
    if scenario.hypotheses {
        let slab = crate::models::DomainSlab::new(
            (0.0, single.last().time),
            scenario.grid.lower.iter().copied().zip(scenario.grid.upper.iter().copied()).collect(),
            single.range_track.global_bound,
        )?;
        let report = check_hypotheses(f, &slab, &HypothesisBudget::default());
        write_json(&dir.join(format!("hypotheses_r{scale}.json")), &scenario.name, scale, &report)?;
    }
    let coefficients = coefficient_row(scenario, scale, &single, f, g, options)?;
    Ok(Produced { reports, coefficients })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_summary(path: &Path, rows: &[SummaryRow], failures: &[(String, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scenario", "resolution_scale", "estimate", "lhs", "rhs", "margin", "verdict"])?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.resolution_scale.to_string(),
            r.estimate.clone(),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.margin),
            r.verdict.clone(),
        ])?;
    }
    for (name, message) in failures {
        w.write_record([name.as_str(), "", "", "", "", "", &format!("error: {message}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coefficients(path: &Path, rows: &[CoefficientRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "scenario",
        "resolution_scale",
        "N",
        "kappa_star_0",
        "kappa0_old",
        "ratio",
        "nw_n",
        "kappa_star",
        "kappa_old",
    ])?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.resolution_scale.to_string(),
            r.dimension.to_string(),
            fmt_f64(r.kappa_star_0),
            fmt_f64(r.kappa0_old),
            r.ratio.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.nw_n),
            fmt_f64(r.kappa_star),
            fmt_f64(r.kappa_old),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub rows: Vec<SummaryRow>,
    pub coefficients: Vec<CoefficientRow>,
    pub failures: Vec<(String, String)>,
    pub persistent_violations: Vec<(String, String)>,
    pub scenarios: usize,
}

impl SuiteOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() && self.persistent_violations.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Scenario files (`*.json`) in `dir`, sorted by file name.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every scenario in `dir` on at most `jobs` threads. Failures are
/// isolated per scenario; `summary.csv` and `coefficients.csv` in `out` list
/// all of them in file-name order.
pub fn run_suite(dir: &Path, out: &Path, jobs: usize, run: &RunOptions) -> Result<SuiteOutcome> {
    let files = scenario_files(dir)?;
    fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results: Vec<(String, Result<ScenarioOutcome>)> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let result = Scenario::load(path).and_then(|s| run_scenario(&s, out, run));
                (label, result)
            })
            .collect()
    });
    let mut outcome = SuiteOutcome {
        rows: Vec::new(),
        coefficients: Vec::new(),
        failures: Vec::new(),
        persistent_violations: Vec::new(),
        scenarios: files.len(),
    };
    for (label, result) in results {
        match result {
            Ok(o) => {
                outcome.rows.extend(o.rows);
                outcome.coefficients.extend(o.coefficients);
                outcome
                    .persistent_violations
                    .extend(o.persistent_violations.into_iter().map(|id| (o.name.clone(), id)));
            }
            Err(e) => outcome.failures.push((label, e.to_string())),
        }
    }
    write_summary(&out.join("summary.csv"), &outcome.rows, &outcome.failures)?;
    write_coefficients(&out.join("coefficients.csv"), &outcome.coefficients)?;
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReportRow {
    pub resolution_scale: usize,
    pub cells: usize,
    pub h: f64,
    pub l1_error: Option<f64>,
    pub estimate: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceReportRow>,
    pub observed_order: Option<f64>,
}

/// Re-runs the scenario at each scale (≥ 3, dyadic) and tabulates estimate
/// margins, plus L¹ errors and the observed order if the scenario names an
/// exact solution.
pub fn convergence_report(scenario: &Scenario, scales: &[usize], out: &Path, run: &RunOptions) -> Result<ConvergenceReport> {
    crate::solver::check_dyadic(scales)?;
    let dir = out.join(&scenario.name);
    fs::create_dir_all(&dir)?;
    let options = options_for(scenario, run);
    let f = scenario.model.build()?;
    let g = scenario.perturbed_model.as_ref().map(|m| m.build()).transpose()?;
    let table = match &scenario.exact {
        Some(exact) => {
            let cells: Vec<usize> = scales.iter().map(|s| s * scenario.grid.cells).collect();
            Some(convergence_study(exact, &scenario.grid.lower, &scenario.grid.upper, &cells, &scenario.solver)?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for (k, &scale) in scales.iter().enumerate() {
        let grid = scenario.grid.build(scale)?;
        let produced = run_resolution(scenario, scale, &f, g.as_ref(), &options, &dir)?;
        for report in produced.reports {
            rows.push(ConvergenceReportRow {
                resolution_scale: scale,
                cells: grid.cells()[0],
                h: grid.spacing(),
                l1_error: table.as_ref().map(|t| t.rows[k].l1_error),
                estimate: report.estimate_id.as_str().to_string(),
                lhs: report.lhs,
                rhs: report.rhs,
                margin: report.margin,
                verdict: report.verdict.as_str().to_string(),
            });
        }
    }
    let report = ConvergenceReport { rows, observed_order: table.map(|t| t.observed_order) };
    let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
    w.write_record([
        "resolution_scale",
        "cells",
        "h",
        "l1_error",
        "observed_order",
        "estimate",
        "lhs",
        "rhs",
        "margin",
        "verdict",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.resolution_scale.to_string(),
            r.cells.to_string(),
            fmt_f64(r.h),
            r.l1_error.map(fmt_f64).unwrap_or_default(),
            report.observed_order.map(fmt_f64).unwrap_or_default(),
            r.estimate.clone(),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.margin),
            r.verdict.clone(),
        ])?;
    }
    w.flush()?;
    Ok(report)
}

/// Rows of the `constants` table: `N, W_N, ω_N, C₁, M₁, M₁/C₁, N·W_N`.
pub fn constants_table(max_dimension: usize, plateau_radius: f64) -> Result<Vec<[f64; 7]>> {
    use crate::constants::{build_mollifier, unit_ball_volume, wallis_integral};
    (1..=max_dimension)
        .map(|n| {
            let c = build_mollifier(plateau_radius, n)?.constants()?;
            Ok([
                n as f64,
                wallis_integral(n),
                unit_ball_volume(n),
                c.c1,
                c.m1,
                c.ratio(),
                n as f64 * wallis_integral(n),
            ])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "name": "mini",
        "model": {"dimension": 1, "flux": {"id": "burgers"}},
        "initial_data": {"id": "indicator", "lower": [-0.5], "upper": [0.5]},
        "grid": {"lower": [-2.0], "upper": [2.0], "cells": 64},
        "solver": {"end_time": 0.25, "snapshot_count": 4},
        "estimates": ["tv_theorem"]
    }"#;

    #[test]
    fn missing_grid_names_the_field() {
        let text = MINIMAL.replace(r#""grid": {"lower": [-2.0], "upper": [2.0], "cells": 64},"#, "");
        let err = Scenario::from_str(&text, Path::new("x.json")).unwrap_err();
        assert!(err.to_string().contains("grid"), "{err}");
    }

    #[test]
    fn scenario_runs_and_writes_reports() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::from_str(MINIMAL, Path::new("mini.json")).unwrap();
        let o = run_scenario(&s, dir.path(), &RunOptions::default()).unwrap();
        assert_eq!(o.exit_code(), 0);
        assert_eq!(o.rows.len(), 2);
        assert!(dir.path().join("mini/tv_theorem_r2.json").exists());
        assert!(dir.path().join("mini/u_r1.csv").exists());
    }

    #[test]
    fn convergence_needs_three_scales() {
        let dir = tempfile::tempdir().unwrap();
        let s = Scenario::from_str(MINIMAL, Path::new("mini.json")).unwrap();
        let err = convergence_report(&s, &[1], dir.path(), &RunOptions::default()).unwrap_err();
        assert!(err.to_string().contains("need ≥ 3"), "{err}");
    }
}
