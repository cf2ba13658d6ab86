//! First-order finite-volume solver with local Lax–Friedrichs fluxes.
//!
//! The field is zero-extended outside the grid. Every face flux is
//!
//! ```text
//! F = ½(f_d(t, x_f, u_L) + f_d(t, x_f, u_R)) − ½ α (u_R − u_L),
//! α = max_{w ∈ [u_L, u_R]} |∂_u f_d(t, x_f, w)|   (9 samples)
//! ```
//!
//! and the source is applied unsplit. Time steps are clipped so that every
//! snapshot time is hit exactly.

mod exact;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{default_support_threshold, CompactSupportPolicy, Grid, ScalarField};
use crate::models::{range_track, BalanceLawModel, RangeTrack, SupSampling};

pub use exact::{convergence_study, exact_solution, ConvergenceRow, ConvergenceTable, ExactSolution, InitialData};
pub(crate) use exact::check_dyadic;

const FACE_SAMPLES: usize = 9;
/// Bound on `dt·sup|∂_u F|`.
const SOURCE_STEP_LIMIT: f64 = 0.5;
/// Stand-in wave speed when the flux is locally constant.
const FALLBACK_SPEED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Forward Euler on the full operator.
    #[default]
    Euler,
    /// Two-stage SSP Runge–Kutta on the full operator.
    Heun,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MarginPolicy {
    /// Pad by `⌈c·T/h⌉ + safety_cells` layers.
    Automatic { safety_cells: usize },
    /// Use the grid as given.
    None,
}

impl Default for MarginPolicy {
    fn default() -> Self {
        MarginPolicy::Automatic { safety_cells: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub cfl: f64,
    pub end_time: f64,
    /// Output times in `(0, T]`; empty means `snapshot_count` uniform times.
    pub snapshot_times: Vec<f64>,
    pub snapshot_count: usize,
    pub integrator: Integrator,
    pub margin: MarginPolicy,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl: 0.45,
            end_time: 1.0,
            snapshot_times: Vec::new(),
            snapshot_count: 32,
            integrator: Integrator::Euler,
            margin: MarginPolicy::default(),
            max_steps: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn new(end_time: f64) -> Self {
        SolverConfig { end_time, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::invalid(format!("bad end time {}", self.end_time)));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("snapshot times must be strictly increasing"));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.end_time).contains(&t)) {
            return Err(Error::invalid("snapshot times must lie in [0, T]"));
        }
        if self.snapshot_times.is_empty() && self.snapshot_count == 0 && self.end_time > 0.0 {
            return Err(Error::invalid("snapshot_count must be positive"));
        }
        Ok(())
    }

    /// Output times after 0, always ending with `T`.
    pub fn output_times(&self) -> Vec<f64> {
        let t_end = self.end_time;
        if t_end == 0.0 {
            return Vec::new();
        }
        let mut times: Vec<f64> = if self.snapshot_times.is_empty() {
            (1..=self.snapshot_count)
                .map(|k| if k == self.snapshot_count { t_end } else { t_end * k as f64 / self.snapshot_count as f64 })
                .collect()
        } else {
            self.snapshot_times.iter().copied().filter(|&t| t > 0.0).collect()
        };
        if times.last() != Some(&t_end) {
            times.push(t_end);
        }
        times
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time: f64,
    pub field: ScalarField,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub range_track: RangeTrack,
    /// End time of each step.
    pub step_times: Vec<f64>,
    pub dt_history: Vec<f64>,
    /// Largest face dissipation coefficient of each step.
    pub speed_history: Vec<f64>,
    /// Layers added on every side of the input grid.
    pub padding: usize,
    /// `|u|` above which a cell counts as supported.
    pub threshold: f64,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        self.snapshots[0].field.grid()
    }

    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// Step log as CSV: `step,time,dt,max_speed`.
    pub fn write_diagnostics<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "time", "dt", "max_speed"])?;
        for (k, ((t, dt), s)) in self
            .step_times
            .iter()
            .zip(&self.dt_history)
            .zip(&self.speed_history)
            .enumerate()
        {
            w.write_record([(k + 1).to_string(), t.to_string(), dt.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Precomputed geometry for one grid.
struct Mesh {
    grid: Grid,
    centers: Vec<f64>,
    lines: Vec<Vec<usize>>,
    strides: Vec<usize>,
    boundary: Vec<usize>,
}

impl Mesh {
    fn new(grid: Grid) -> Self {
        let n = grid.dimension();
        let mut centers = vec![0.0; n * grid.len()];
        for (k, c) in centers.chunks_mut(n).enumerate() {
            grid.center_of(k, c);
        }
        let lines = (0..n).map(|d| grid.line_starts(d).collect()).collect();
        let strides = grid.strides();
        let mut index = vec![0; n];
        let boundary = (0..grid.len())
            .filter(|&k| {
                grid.unravel(k, &mut index);
                index.iter().zip(grid.cells()).any(|(&i, &m)| i == 0 || i + 1 == m)
            })
            .collect();
        Mesh { grid, centers, lines, strides, boundary }
    }

    fn center(&self, k: usize) -> &[f64] {
        let n = self.grid.dimension();
        &self.centers[k * n..(k + 1) * n]
    }
}

/// `−Div F_h + F` at one state, with the step restrictions it implies.
struct Operator {
    rate: Vec<f64>,
    max_speed: f64,
    max_source_du: f64,
}

fn local_speed(model: &BalanceLawModel, d: usize, t: f64, x: &[f64], a: f64, b: f64) -> f64 {
    let mut m = 0.0f64;
    for k in 0..FACE_SAMPLES {
        let w = a + (b - a) * k as f64 / (FACE_SAMPLES - 1) as f64;
        m = m.max(model.flux_du(d, t, x, w).abs());
    }
    m
}

fn operator(model: &BalanceLawModel, mesh: &Mesh, t: f64, u: &[f64]) -> Result<Operator> {
    let grid = &mesh.grid;
    let n = grid.dimension();
    let h = grid.spacing();
    let mut rate = vec![0.0; u.len()];
    let mut max_speed = 0.0f64;
    for d in 0..n {
        let stride = mesh.strides[d];
        let m = grid.cells()[d];
        let per_line: Vec<(Vec<f64>, f64)> = mesh.lines[d]
            .par_iter()
            .map(|&start| {
                let mut x = vec![0.0; n];
                let mut faces = Vec::with_capacity(m + 1);
                let mut speed = 0.0f64;
                for k in 0..=m {
                    let left = (k > 0).then(|| start + (k - 1) * stride);
                    let right = (k < m).then(|| start + k * stride);
                    let ul = left.map_or(0.0, |c| u[c]);
                    let ur = right.map_or(0.0, |c| u[c]);
                    match left {
                        Some(c) => x.copy_from_slice(mesh.center(c)),
                        None => {
                            x.copy_from_slice(mesh.center(right.expect("line has a cell")));
                            x[d] -= h;
                        }
                    }
                    x[d] += 0.5 * h;
                    if ul == 0.0 && ur == 0.0 && model.flux(d, t, &x, 0.0) == 0.0 {
                        faces.push(0.0);
                        continue;
                    }
                    let alpha = local_speed(model, d, t, &x, ul, ur);
                    speed = speed.max(alpha);
                    faces.push(0.5 * (model.flux(d, t, &x, ul) + model.flux(d, t, &x, ur)) - 0.5 * alpha * (ur - ul));
                }
                (faces, speed)
            })
            .collect();
        for (&start, (faces, speed)) in mesh.lines[d].iter().zip(&per_line) {
            max_speed = max_speed.max(*speed);
            for k in 0..m {
                rate[start + k * stride] -= (faces[k + 1] - faces[k]) / h;
            }
        }
    }
    let source: Vec<(f64, f64)> = (0..u.len())
        .into_par_iter()
        .map(|k| {
            let x = mesh.center(k);
            (model.source(t, x, u[k]), model.source_du(t, x, u[k]).abs())
        })
        .collect();
    let mut max_source_du = 0.0f64;
    for (k, (s, g)) in source.into_iter().enumerate() {
        rate[k] += s;
        max_source_du = max_source_du.max(g);
    }
    if rate.iter().any(|r| !r.is_finite()) {
        let k = rate.iter().position(|r| !r.is_finite()).unwrap_or(0);
        return Err(Error::NonFinite {
            quantity: format!("update of {}", model.name()),
            point: [&[t][..], mesh.center(k)].concat(),
        });
    }
    Ok(Operator { rate, max_speed, max_source_du })
}

fn stable_dt(op: &Operator, mesh: &Mesh, cfl: f64) -> f64 {
    let speed = if op.max_speed > 0.0 { op.max_speed } else { FALLBACK_SPEED };
    let mut dt = cfl * mesh.grid.spacing() / (mesh.grid.dimension() as f64 * speed);
    if op.max_source_du > 0.0 {
        dt = dt.min(SOURCE_STEP_LIMIT / op.max_source_du);
    }
    dt
}

struct Run<'a> {
    model: &'a BalanceLawModel,
    state: Vec<f64>,
    snapshots: Vec<Snapshot>,
    dt_history: Vec<f64>,
    speed_history: Vec<f64>,
    threshold: f64,
}

fn advance(run: &mut Run<'_>, mesh: &Mesh, op: Operator, t: f64, dt: f64, integrator: Integrator) -> Result<()> {
    let stage1: Vec<f64> = run.state.iter().zip(&op.rate).map(|(u, r)| u + dt * r).collect();
    run.state = match integrator {
        Integrator::Euler => stage1,
        Integrator::Heun => {
            let op2 = operator(run.model, mesh, t + dt, &stage1)?;
            run.state
                .iter()
                .zip(stage1.iter().zip(&op2.rate))
                .map(|(u, (v, r))| 0.5 * u + 0.5 * (v + dt * r))
                .collect()
        }
    };
    run.dt_history.push(dt);
    run.speed_history.push(op.max_speed);
    Ok(())
}

fn check_boundary(run: &Run<'_>, mesh: &Mesh, time: f64) -> Result<()> {
    if mesh.boundary.iter().any(|&k| run.state[k].abs() > run.threshold) {
        return Err(Error::SupportReachedBoundary { time });
    }
    Ok(())
}

fn sampled_sup_value<G: Fn(&[f64]) -> f64 + Sync>(axes: &[(f64, f64)], sampling: &SupSampling, g: G) -> Result<f64> {
    Ok(crate::models::sampled_sup(axes, sampling, g)?.value)
}

/// Padding layers for the automatic margin policy.
fn margin_layers(model: &BalanceLawModel, u0: &ScalarField, config: &SolverConfig) -> Result<usize> {
    let MarginPolicy::Automatic { safety_cells } = config.margin else {
        return Ok(0);
    };
    let t_end = config.end_time;
    if t_end == 0.0 {
        return Ok(safety_cells);
    }
    let grid = u0.grid();
    let sampling = SupSampling { points_per_axis: 17, refinement_rounds: 1, ..SupSampling::default() };
    let mut axes = vec![(0.0, t_end)];
    axes.extend(grid.bounds());
    let m = u0.max_abs();
    let n = grid.dimension();
    let zero_axis = |bound: f64| {
        let mut a = axes.clone();
        a.push((-bound, bound));
        a
    };
    let gamma = sampled_sup_value(&zero_axis(m), &sampling, |p| {
        model.source_du(p[0], &p[1..=n], p[n + 1]).abs()
    })?;
    let s0 = sampled_sup_value(&zero_axis(0.0), &sampling, |p| {
        model.source(p[0], &p[1..=n], 0.0).abs()
    })?;
    let bound = (m + t_end * s0) * (gamma * t_end).exp();
    let c = sampled_sup_value(&zero_axis(bound), &sampling, |p| {
        (0..n).map(|d| model.flux_du(d, p[0], &p[1..=n], p[n + 1]).powi(2)).sum::<f64>().sqrt()
    })?;
    let layers = (c * t_end / grid.spacing()).ceil();
    if !layers.is_finite() || layers > 1e7 {
        return Err(Error::invalid(format!("propagation speed {c} gives an unusable margin")));
    }
    Ok(layers as usize + safety_cells)
}

fn prepare(model: &BalanceLawModel, u0: &ScalarField, config: &SolverConfig, layers: usize) -> Result<ScalarField> {
    config.validate()?;
    if model.dimension() != u0.grid().dimension() {
        return Err(Error::invalid(format!(
            "model dimension {} but initial data dimension {}",
            model.dimension(),
            u0.grid().dimension()
        )));
    }
    if matches!(config.margin, MarginPolicy::None) {
        u0.ensure_compact(CompactSupportPolicy::default())?;
    }
    u0.padded(layers)
}

fn threshold_for(u0: &ScalarField) -> f64 {
    let t = default_support_threshold(u0);
    if t > 0.0 {
        t
    } else {
        1e-12
    }
}

/// Solves from `u0` up to `config.end_time`.
pub fn solve(model: &BalanceLawModel, u0: &ScalarField, config: &SolverConfig) -> Result<Trajectory> {
    let layers = margin_layers(model, u0, config)?;
    let start = prepare(model, u0, config, layers)?;
    let mut out = run_lockstep(&[model], vec![start], config, vec![threshold_for(u0)])?;
    let mut traj = out.pop().expect("one trajectory");
    traj.padding = layers;
    Ok(traj)
}

/// Solves two problems on one common padded grid with a shared step sequence.
pub fn solve_pair(
    model_u: &BalanceLawModel,
    u0: &ScalarField,
    model_v: &BalanceLawModel,
    v0: &ScalarField,
    config: &SolverConfig,
) -> Result<(Trajectory, Trajectory)> {
    u0.grid().ensure_same(v0.grid())?;
    let layers = margin_layers(model_u, u0, config)?.max(margin_layers(model_v, v0, config)?);
    let a = prepare(model_u, u0, config, layers)?;
    let b = prepare(model_v, v0, config, layers)?;
    let mut out = run_lockstep(&[model_u, model_v], vec![a, b], config, vec![threshold_for(u0), threshold_for(v0)])?;
    let mut v = out.pop().expect("two trajectories");
    let mut u = out.pop().expect("two trajectories");
    u.padding = layers;
    v.padding = layers;
    Ok((u, v))
}

fn run_lockstep(
    models: &[&BalanceLawModel],
    starts: Vec<ScalarField>,
    config: &SolverConfig,
    thresholds: Vec<f64>,
) -> Result<Vec<Trajectory>> {
    let grid = starts[0].grid().clone();
    let mesh = Mesh::new(grid.clone());
    let mut runs: Vec<Run<'_>> = models
        .iter()
        .zip(starts)
        .zip(thresholds)
        .map(|((model, s), threshold)| Run {
            model,
            snapshots: vec![Snapshot { time: 0.0, field: s.clone() }],
            state: s.into_values(),
            dt_history: Vec::new(),
            speed_history: Vec::new(),
            threshold,
        })
        .collect();
    for run in &runs {
        check_boundary(run, &mesh, 0.0)?;
    }
    let mut t = 0.0;
    let mut step_times = Vec::new();
    for target in config.output_times() {
        while t < target {
            if step_times.len() >= config.max_steps {
                return Err(Error::invalid(format!("step limit {} reached at t = {t}", config.max_steps)));
            }
            let ops = runs
                .iter()
                .map(|r| operator(r.model, &mesh, t, &r.state))
                .collect::<Result<Vec<_>>>()?;
            let mut dt = ops.iter().map(|op| stable_dt(op, &mesh, config.cfl)).fold(f64::INFINITY, f64::min);
            let next = if t + dt >= target || target - (t + dt) <= 1e-12 * target {
                dt = target - t;
                target
            } else {
                t + dt
            };
            for (run, op) in runs.iter_mut().zip(ops) {
                advance(run, &mesh, op, t, dt, config.integrator)?;
                check_boundary(run, &mesh, next)?;
            }
            t = next;
            step_times.push(t);
        }
        for run in &mut runs {
            let field = ScalarField::from_values(grid.clone(), run.state.clone())?;
            run.snapshots.push(Snapshot { time: target, field });
        }
    }
    runs.into_iter()
        .map(|run| {
            Ok(Trajectory {
                range_track: range_track(&run.snapshots, run.threshold)?,
                snapshots: run.snapshots,
                step_times: step_times.clone(),
                dt_history: run.dt_history,
                speed_history: run.speed_history,
                padding: 0,
                threshold: run.threshold,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{total_variation, Grid};
    use crate::models::{FluxSpec, ModelSpec, SourceSpec};

    fn burgers() -> BalanceLawModel {
        ModelSpec::new(1, FluxSpec::Burgers { scale: 1.0, direction: None }, SourceSpec::None)
            .build()
            .unwrap()
    }

    fn bump(h: f64, center: f64, amp: f64) -> ScalarField {
        let grid = Grid::covering(&[-2.0], &[2.0], (4.0 / h) as usize).unwrap();
        ScalarField::from_fn(grid, |x| {
            let r = (x[0] - center).abs();
            if r < 0.5 {
                amp * (0.5 + 0.5 * (std::f64::consts::PI * r / 0.5).cos())
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn snapshot_times_are_hit_exactly() {
        let mut cfg = SolverConfig::new(0.3);
        cfg.snapshot_times = vec![0.1, 0.2, 0.3];
        let traj = solve(&burgers(), &bump(1.0 / 64.0, 0.0, 1.0), &cfg).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.2, 0.3]);
    }

    #[test]
    fn conservation_max_principle_and_tvd() {
        let u0 = bump(1.0 / 128.0, 0.0, 1.0);
        let traj = solve(&burgers(), &u0, &SolverConfig::new(0.5)).unwrap();
        let mass0 = traj.initial().field.integral();
        let mut tv_prev = total_variation(&traj.initial().field).unwrap();
        for s in &traj.snapshots {
            assert!((s.field.integral() - mass0).abs() < 1e-12);
            assert!(s.field.min() >= -1e-15 && s.field.max() <= 1.0 + 1e-15);
            let tv = total_variation(&s.field).unwrap();
            assert!(tv <= tv_prev + 1e-12);
            tv_prev = tv;
        }
    }

    #[test]
    fn zero_speed_and_zero_source_keeps_field() {
        let m = ModelSpec::new(1, FluxSpec::Zero, SourceSpec::None).build().unwrap();
        let u0 = bump(1.0 / 32.0, 0.0, 1.0);
        let traj = solve(&m, &u0, &SolverConfig::new(1.0)).unwrap();
        assert_eq!(traj.last().field.values(), traj.initial().field.values());
    }

    #[test]
    fn support_reaching_boundary_is_an_error() {
        let u0 = bump(1.0 / 32.0, 1.4, 1.0);
        let mut cfg = SolverConfig::new(1.0);
        cfg.margin = MarginPolicy::None;
        let err = solve(&burgers(), &u0, &cfg).unwrap_err();
        assert!(matches!(err, Error::SupportReachedBoundary { .. }), "{err}");
    }

    #[test]
    fn pair_runs_share_steps_and_contract() {
        let (u, v) = solve_pair(
            &burgers(),
            &bump(1.0 / 64.0, 0.0, 1.0),
            &burgers(),
            &bump(1.0 / 64.0, 0.2, 0.6),
            &SolverConfig::new(0.5),
        )
        .unwrap();
        assert_eq!(u.dt_history, v.dt_history);
        let d0 = crate::fields::l1_distance(&u.initial().field, &v.initial().field, &crate::fields::Region::Whole).unwrap();
        for (a, b) in u.snapshots.iter().zip(&v.snapshots) {
            let d = crate::fields::l1_distance(&a.field, &b.field, &crate::fields::Region::Whole).unwrap();
            assert!(d <= d0 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn diagnostics_csv_has_one_row_per_step() {
        let traj = solve(&burgers(), &bump(1.0 / 32.0, 0.0, 1.0), &SolverConfig::new(0.2)).unwrap();
        let mut buf = Vec::new();
        traj.write_diagnostics(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), traj.dt_history.len() + 1);
    }

    #[test]
    fn bad_config_is_rejected() {
        let mut cfg = SolverConfig::new(1.0);
        cfg.cfl = 1.5;
        assert!(cfg.validate().is_err());
        cfg.cfl = 0.5;
        cfg.snapshot_times = vec![0.5, 0.2];
        assert!(cfg.validate().is_err());
    }
}
