//! Initial data, exact solutions and convergence studies.

use serde::{Deserialize, Serialize};

use super::{solve, SolverConfig};
use crate::error::{Error, Result};
use crate::fields::{l1_distance, Grid, Region, ScalarField};
use crate::models::{FluxSpec, ModelSpec, SourceSpec};

fn one() -> f64 {
    1.0
}

fn minus_one() -> f64 {
    -1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    /// `value` on the half-open box `[lower, upper)`.
    Indicator {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default = "one")]
        value: f64,
    },
    /// `amplitude·(1 + cos(π r/radius))/2` for `r < radius`.
    CosineBump {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl InitialData {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            InitialData::Zero => 0.0,
            InitialData::Indicator { lower, upper, value } => {
                let inside = x.iter().zip(lower.iter().zip(upper)).all(|(p, (a, b))| *a <= *p && *p < *b);
                if inside {
                    *value
                } else {
                    0.0
                }
            }
            InitialData::CosineBump { center, radius, amplitude } => {
                let r = x.iter().zip(center).map(|(p, c)| (p - c) * (p - c)).sum::<f64>().sqrt();
                if r < *radius {
                    amplitude * 0.5 * (1.0 + (std::f64::consts::PI * r / radius).cos())
                } else {
                    0.0
                }
            }
        }
    }

    fn check(&self, dimension: usize) -> Result<()> {
        let ok = match self {
            InitialData::Zero => true,
            InitialData::Indicator { lower, upper, value } => {
                lower.len() == dimension && upper.len() == dimension && value.is_finite()
            }
            InitialData::CosineBump { center, radius, amplitude } => {
                center.len() == dimension && *radius > 0.0 && amplitude.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("initial data {self:?} does not fit dimension {dimension}")))
        }
    }

    /// Cell-center samples on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<ScalarField> {
        self.check(grid.dimension())?;
        ScalarField::from_fn(grid.clone(), |x| self.evaluate(x))
    }
}

/// Problems with closed-form solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ExactSolution {
    /// `f = a·u`: `u(t, x) = u₀(x − a t)`.
    Advection { velocity: Vec<f64>, initial: InitialData },
    /// Burgers from `amplitude·1_[left, 0)`: a rarefaction fan from `left`
    /// and a shock at `amplitude·t/2`, until the fan reaches the shock.
    BurgersShock {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "minus_one")]
        left: f64,
    },
    /// Burgers Riemann problem at `x = 0`.
    BurgersRarefaction { left_state: f64, right_state: f64 },
    /// `f = 0, F = rate·u`: `u(t) = e^{rate·t}·u₀`.
    SourceDecay {
        #[serde(default = "minus_one")]
        rate: f64,
        initial: InitialData,
    },
}

const CATALOG: [&str; 4] = ["advection", "burgers_shock", "burgers_rarefaction", "source_decay"];

impl ExactSolution {
    /// Looks up `id` and reads its parameters from a JSON object.
    pub fn from_id(id: &str, params: &serde_json::Value) -> Result<Self> {
        if !CATALOG.contains(&id) {
            return Err(Error::UnknownCatalogId(id.to_string()));
        }
        let mut obj = match params {
            serde_json::Value::Object(m) => m.clone(),
            serde_json::Value::Null => serde_json::Map::new(),
            _ => return Err(Error::invalid("exact-solution parameters must be an object")),
        };
        obj.insert("id".into(), serde_json::Value::String(id.into()));
        Ok(serde_json::from_value(serde_json::Value::Object(obj))?)
    }

    pub fn dimension(&self) -> usize {
        match self {
            ExactSolution::Advection { velocity, .. } => velocity.len(),
            ExactSolution::SourceDecay { initial, .. } => match initial {
                InitialData::Indicator { lower, .. } => lower.len(),
                InitialData::CosineBump { center, .. } => center.len(),
                InitialData::Zero => 1,
            },
            _ => 1,
        }
    }

    /// The balance law this solution solves.
    pub fn model_spec(&self) -> ModelSpec {
        let n = self.dimension();
        match self {
            ExactSolution::Advection { velocity, .. } => {
                ModelSpec::new(n, FluxSpec::LinearAdvection { velocity: velocity.clone() }, SourceSpec::None)
            }
            ExactSolution::BurgersShock { .. } | ExactSolution::BurgersRarefaction { .. } => {
                ModelSpec::new(1, FluxSpec::Burgers { scale: 1.0, direction: None }, SourceSpec::None)
            }
            ExactSolution::SourceDecay { rate, .. } => {
                ModelSpec::new(n, FluxSpec::Zero, SourceSpec::Linear { rate: *rate })
            }
        }
    }

    /// Shock location at time `t`, where there is one.
    pub fn shock_position(&self, t: f64) -> Option<f64> {
        match *self {
            ExactSolution::BurgersShock { amplitude, .. } => Some(0.5 * amplitude * t),
            ExactSolution::BurgersRarefaction { left_state, right_state } if left_state > right_state => {
                Some(0.5 * (left_state + right_state) * t)
            }
            _ => None,
        }
    }

    /// Pointwise value at `(t, x)`.
    pub fn evaluate(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(match self {
            ExactSolution::Advection { velocity, initial } => {
                let y: Vec<f64> = x.iter().zip(velocity).map(|(p, a)| p - a * t).collect();
                initial.evaluate(&y)
            }
            ExactSolution::SourceDecay { rate, initial } => (rate * t).exp() * initial.evaluate(x),
            &ExactSolution::BurgersShock { amplitude: a, left } => {
                if !(a > 0.0 && left < 0.0) {
                    return Err(Error::invalid("burgers_shock needs amplitude > 0 and left < 0"));
                }
                if t > -2.0 * left / a {
                    return Err(Error::invalid(format!(
                        "burgers_shock is only tabulated until the fan meets the shock (t ≤ {})",
                        -2.0 * left / a
                    )));
                }
                let x = x[0];
                if x < left {
                    0.0
                } else if t > 0.0 && x < left + a * t {
                    (x - left) / t
                } else if x < 0.5 * a * t || (t == 0.0 && x < 0.0) {
                    a
                } else {
                    0.0
                }
            }
            &ExactSolution::BurgersRarefaction { left_state: l, right_state: r } => {
                let x = x[0];
                if t == 0.0 {
                    if x < 0.0 {
                        l
                    } else {
                        r
                    }
                } else if l > r {
                    if x < 0.5 * (l + r) * t {
                        l
                    } else {
                        r
                    }
                } else if x < l * t {
                    l
                } else if x > r * t {
                    r
                } else {
                    x / t
                }
            }
        })
    }

    pub fn initial_data(&self, grid: &Grid) -> Result<ScalarField> {
        exact_solution(self, grid, 0.0)
    }
}

/// Cell-center samples of the exact solution at time `t`.
pub fn exact_solution(solution: &ExactSolution, grid: &Grid, t: f64) -> Result<ScalarField> {
    if grid.dimension() != solution.dimension() {
        return Err(Error::invalid("exact solution and grid dimensions differ"));
    }
    if let ExactSolution::Advection { initial, .. } | ExactSolution::SourceDecay { initial, .. } = solution {
        initial.check(grid.dimension())?;
    }
    let mut x = vec![0.0; grid.dimension()];
    let values = (0..grid.len())
        .map(|k| {
            grid.center_of(k, &mut x);
            solution.evaluate(t, &x)
        })
        .collect::<Result<Vec<_>>>()?;
    ScalarField::from_values(grid.clone(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    pub l1_error: f64,
    /// `|numerical − exact|` shock location, for shock problems.
    pub shock_position_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log error` against `log h`.
    pub observed_order: f64,
}

impl ConvergenceTable {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["cells", "h", "l1_error", "shock_position_error", "observed_order"])?;
        for r in &self.rows {
            w.write_record([
                r.cells.to_string(),
                r.h.to_string(),
                r.l1_error.to_string(),
                r.shock_position_error.map(|e| e.to_string()).unwrap_or_default(),
                self.observed_order.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Numerical shock location: where `u` first drops below half the amplitude,
/// scanning leftwards from the right, interpolated between cell centers.
fn locate_shock(field: &ScalarField, level: f64) -> Option<f64> {
    let g = field.grid();
    let v = field.values();
    (1..v.len()).rev().find(|&k| v[k - 1] >= level && v[k] < level).map(|k| {
        let (a, b) = (v[k - 1], v[k]);
        g.center_coord(0, k - 1) + g.spacing() * (a - level) / (a - b)
    })
}

pub(crate) fn least_squares_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Checks that `resolutions` has at least 3 entries, each twice the previous.
pub(crate) fn check_dyadic(resolutions: &[usize]) -> Result<()> {
    if resolutions.len() < 3 {
        return Err(Error::invalid(format!("need ≥ 3 resolutions, got {}", resolutions.len())));
    }
    if resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::invalid(format!("resolutions {resolutions:?} are not dyadic")));
    }
    Ok(())
}

/// L¹ errors at `T` on the box `[lower, upper]` for each cell count along
/// the first axis, with the observed order.
pub fn convergence_study(
    solution: &ExactSolution,
    lower: &[f64],
    upper: &[f64],
    resolutions: &[usize],
    config: &SolverConfig,
) -> Result<ConvergenceTable> {
    check_dyadic(resolutions)?;
    let model = solution.model_spec().build()?;
    let t_end = config.end_time;
    // Only the final state is compared; intermediate outputs would clip dt.
    let config = &SolverConfig { snapshot_times: Vec::new(), snapshot_count: 1, ..config.clone() };
    let mut rows = Vec::new();
    for &cells in resolutions {
        let grid = Grid::covering(lower, upper, cells)?;
        let u0 = solution.initial_data(&grid)?;
        let traj = solve(&model, &u0, config)?;
        let numerical = &traj.last().field;
        let exact = exact_solution(solution, numerical.grid(), t_end)?;
        let l1_error = l1_distance(numerical, &exact, &Region::Whole)?;
        let shock_position_error = match (solution.shock_position(t_end), solution) {
            (Some(s), ExactSolution::BurgersShock { amplitude, .. }) => {
                locate_shock(numerical, 0.5 * amplitude).map(|x| (x - s).abs())
            }
            _ => None,
        };
        rows.push(ConvergenceRow { cells, h: grid.spacing(), l1_error, shock_position_error });
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let es: Vec<f64> = rows.iter().map(|r| r.l1_error.max(f64::MIN_POSITIVE)).collect();
    Ok(ConvergenceTable { rows, observed_order: least_squares_order(&hs, &es) })
}
