//! Sampled sup norms and the coefficients assembled from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BalanceLawModel, Derivative};
use crate::constants::wallis_integral;
use crate::error::{Error, Result};
use crate::fields::SupportBox;

/// How matrix-valued sup norms are taken.
pub const MATRIX_NORM_CONVENTION: &str = "max absolute entry (matrices), Euclidean (vectors)";

/// `[t₀, t₁] × box × [−U, U]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSlab {
    pub time: (f64, f64),
    pub space: Vec<(f64, f64)>,
    pub value_bound: f64,
    #[serde(default)]
    pub empty: bool,
}

impl DomainSlab {
    pub fn new(time: (f64, f64), space: Vec<(f64, f64)>, value_bound: f64) -> Result<Self> {
        if !(time.0 >= 0.0 && time.1 >= time.0 && time.1.is_finite()) {
            return Err(Error::invalid(format!("bad time interval {time:?}")));
        }
        if space.is_empty() {
            return Err(Error::invalid("slab needs at least one spatial axis"));
        }
        if space.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return Err(Error::invalid(format!("bad spatial box {space:?}")));
        }
        if !(value_bound >= 0.0 && value_bound.is_finite()) {
            return Err(Error::invalid(format!("bad value bound {value_bound}")));
        }
        Ok(DomainSlab { time, space, value_bound, empty: false })
    }

    /// A slab with no points; every sup over it is 0.
    pub fn empty(dimension: usize) -> Self {
        DomainSlab {
            time: (0.0, 0.0),
            space: vec![(0.0, 0.0); dimension],
            value_bound: 0.0,
            empty: true,
        }
    }

    pub fn from_box(time: (f64, f64), support: &SupportBox, value_bound: f64) -> Result<Self> {
        if support.is_empty() {
            return Ok(DomainSlab::empty(support.dimension()));
        }
        DomainSlab::new(time, support.bounds(), value_bound)
    }

    pub fn dimension(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn contains(&self, other: &DomainSlab) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        self.time.0 <= other.time.0
            && other.time.1 <= self.time.1
            && self.value_bound >= other.value_bound
            && self
                .space
                .iter()
                .zip(&other.space)
                .all(|(a, b)| a.0 <= b.0 && b.1 <= a.1)
    }

    /// Smallest slab containing both.
    pub fn hull(&self, other: &DomainSlab) -> DomainSlab {
        if self.empty {
            return other.clone();
        }
        if other.empty {
            return self.clone();
        }
        DomainSlab {
            time: (self.time.0.min(other.time.0), self.time.1.max(other.time.1)),
            space: self
                .space
                .iter()
                .zip(&other.space)
                .map(|(a, b)| (a.0.min(b.0), a.1.max(b.1)))
                .collect(),
            value_bound: self.value_bound.max(other.value_bound),
            empty: false,
        }
    }

    fn axes(&self) -> Vec<(f64, f64)> {
        let mut axes = Vec::with_capacity(self.dimension() + 2);
        axes.push(self.time);
        axes.extend(self.space.iter().copied());
        axes.push((-self.value_bound, self.value_bound));
        axes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupSampling {
    pub points_per_axis: usize,
    pub refinement_rounds: usize,
    pub refinement_factor: f64,
    /// Cap on the samples of one round; the per-axis count is reduced to fit.
    pub max_samples: usize,
}

impl Default for SupSampling {
    fn default() -> Self {
        SupSampling {
            points_per_axis: 33,
            refinement_rounds: 2,
            refinement_factor: 4.0,
            max_samples: 1 << 20,
        }
    }
}

/// Quantity whose sup is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// `|∂_u f|` (Euclidean)
    FluxDu,
    /// `∇∂_u f` (max absolute entry)
    FluxDuGrad,
    /// `|∂_u F|`
    SourceDu,
    /// `|F − div f|`
    Residual,
    /// `|∇(F − div f)|` (Euclidean)
    ResidualGrad,
}

impl Component {
    fn requirement(self) -> (&'static [Derivative], &'static str) {
        match self {
            Component::FluxDu => (&[Derivative::FluxDu], "H1*"),
            Component::FluxDuGrad => (&[Derivative::FluxDuGrad], "H2*"),
            Component::SourceDu => (&[Derivative::SourceDu], "H2*"),
            Component::Residual => (&[Derivative::FluxDiv], "H1*"),
            Component::ResidualGrad => (&[Derivative::ResidualGrad], "H2*"),
        }
    }

    /// Pointwise norm of the component at `(t, x, u)`.
    pub fn evaluate(self, model: &BalanceLawModel, t: f64, x: &[f64], u: f64) -> f64 {
        let n = model.dimension();
        match self {
            Component::FluxDu => (0..n)
                .map(|d| model.flux_du(d, t, x, u).powi(2))
                .sum::<f64>()
                .sqrt(),
            Component::FluxDuGrad => {
                let mut m = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        let v = model.flux_du_grad(i, j, t, x, u);
                        if v.is_nan() {
                            return v;
                        }
                        m = m.max(v.abs());
                    }
                }
                m
            }
            Component::SourceDu => model.source_du(t, x, u).abs(),
            Component::Residual => model.residual(t, x, u).abs(),
            Component::ResidualGrad => (0..n)
                .map(|j| model.residual_grad(j, t, x, u).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    /// `(t, x…, u)` of the largest sample; empty for an empty slab.
    pub argmax: Vec<f64>,
    pub points_per_axis: usize,
    pub rounds: usize,
    pub samples: usize,
}

struct Best {
    value: f64,
    index: usize,
    bad: Option<usize>,
}

fn axis_points(lo: f64, hi: f64, p: usize) -> Vec<f64> {
    if hi <= lo || p <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..p)
        .map(|i| {
            if i == p - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (p - 1) as f64
            }
        })
        .collect()
}

/// Sup of `g` over the tensor product of `axes`, refined around the argmax.
/// Ties go to the smallest flat probe index, so the result does not depend on
/// the thread count.
pub(crate) fn sampled_sup<G>(axes: &[(f64, f64)], sampling: &SupSampling, g: G) -> Result<SupNorm>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let live = axes.iter().filter(|(a, b)| b > a).count();
    let mut p = sampling.points_per_axis.max(2);
    if live > 0 {
        while p > 2 && (p as f64).powi(live as i32) > sampling.max_samples as f64 {
            p -= 1;
        }
    }
    let mut window: Vec<(f64, f64)> = axes.to_vec();
    let mut best_value = f64::NEG_INFINITY;
    let mut best_point = Vec::new();
    let mut samples = 0;
    for round in 0..=sampling.refinement_rounds {
        let pts: Vec<Vec<f64>> = window.iter().map(|&(a, b)| axis_points(a, b, p)).collect();
        let counts: Vec<usize> = pts.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        samples += total;
        let point_at = |mut flat: usize, out: &mut [f64]| {
            for k in (0..counts.len()).rev() {
                out[k] = pts[k][flat % counts[k]];
                flat /= counts[k];
            }
        };
        let chunk = 4096;
        let best = (0..total.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut buf = vec![0.0; counts.len()];
                let mut b = Best { value: f64::NEG_INFINITY, index: usize::MAX, bad: None };
                for i in c * chunk..((c + 1) * chunk).min(total) {
                    point_at(i, &mut buf);
                    let v = g(&buf);
                    if !v.is_finite() {
                        b.bad = Some(i);
                        break;
                    }
                    if v > b.value {
                        b.value = v;
                        b.index = i;
                    }
                }
                b
            })
            .reduce(
                || Best { value: f64::NEG_INFINITY, index: usize::MAX, bad: None },
                |a, b| Best {
                    value: if b.value > a.value || (b.value == a.value && b.index < a.index) {
                        b.value
                    } else {
                        a.value
                    },
                    index: if b.value > a.value || (b.value == a.value && b.index < a.index) {
                        b.index
                    } else {
                        a.index
                    },
                    bad: match (a.bad, b.bad) {
                        (Some(x), Some(y)) => Some(x.min(y)),
                        (x, y) => x.or(y),
                    },
                },
            );
        if let Some(i) = best.bad {
            let mut point = vec![0.0; counts.len()];
            point_at(i, &mut point);
            return Err(Error::NonFinite { quantity: "sampled norm".into(), point });
        }
        let mut point = vec![0.0; counts.len()];
        point_at(best.index, &mut point);
        // Later rounds only replace the argmax on strict improvement.
        if round == 0 || best.value > best_value {
            best_value = best.value;
            best_point = point;
        }
        if round == sampling.refinement_rounds {
            break;
        }
        window = window
            .iter()
            .zip(axes)
            .zip(&best_point)
            .map(|((&(a, b), &(lo, hi)), &c)| {
                if b <= a {
                    return (a, b);
                }
                let w = (b - a) / sampling.refinement_factor;
                let start = (c - 0.5 * w).clamp(lo, (hi - w).max(lo));
                (start, (start + w).min(hi))
            })
            .collect();
    }
    Ok(SupNorm {
        value: best_value.max(0.0),
        argmax: best_point,
        points_per_axis: p,
        rounds: sampling.refinement_rounds,
        samples,
    })
}

/// Sampled sup of `component` over the slab.
pub fn sup_norm(
    model: &BalanceLawModel,
    component: Component,
    slab: &DomainSlab,
    sampling: &SupSampling,
) -> Result<SupNorm> {
    if slab.dimension() != model.dimension() {
        return Err(Error::invalid(format!(
            "slab has {} spatial axes, model dimension is {}",
            slab.dimension(),
            model.dimension()
        )));
    }
    let (needed, hypothesis) = component.requirement();
    model.require(needed, hypothesis)?;
    if slab.is_empty() {
        return Ok(SupNorm {
            value: 0.0,
            argmax: Vec::new(),
            points_per_axis: 0,
            rounds: 0,
            samples: 0,
        });
    }
    let n = model.dimension();
    sampled_sup(&slab.axes(), sampling, |p| {
        component.evaluate(model, p[0], &p[1..=n], p[n + 1])
    })
    .map_err(|e| match e {
        Error::NonFinite { point, .. } => Error::NonFinite {
            quantity: format!("{component:?} of {}", model.name()),
            point,
        },
        other => other,
    })
}

/// Sup over `u ∈ [−bound, bound]` of `g(u)`: `points` samples, then `refine`
/// rounds on the neighbourhood of the argmax.
pub fn value_axis_sup(g: impl Fn(f64) -> f64, bound: f64, points: usize, refine: usize) -> f64 {
    if !(bound > 0.0) {
        return g(0.0);
    }
    let p = points.max(2);
    let (mut lo, mut hi) = (-bound, bound);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..=refine {
        let mut arg = lo;
        let step = (hi - lo) / (p - 1) as f64;
        for i in 0..p {
            let u = if i == p - 1 { hi } else { lo + step * i as f64 };
            let v = g(u);
            if v > best || v.is_nan() {
                best = v;
                arg = u;
            }
        }
        lo = (arg - step).max(-bound);
        hi = (arg + step).min(bound);
    }
    best
}

/// `(2N+1)·a + b`.
pub fn kappa_star_0_from_norms(dimension: usize, grad_du_flux: f64, du_source: f64) -> f64 {
    (2 * dimension + 1) as f64 * grad_du_flux + du_source
}

/// `(2N+1)‖∇∂_u f‖ + ‖∂_u F‖` over the slab.
pub fn kappa_star_0(model: &BalanceLawModel, slab: &DomainSlab, sampling: &SupSampling) -> Result<f64> {
    let a = sup_norm(model, Component::FluxDuGrad, slab, sampling)?.value;
    let b = sup_norm(model, Component::SourceDu, slab, sampling)?.value;
    Ok(kappa_star_0_from_norms(model.dimension(), a, b))
}

/// `‖∂_u F‖` over the pair slab.
pub fn kappa_star(model: &BalanceLawModel, slab_uv: &DomainSlab, sampling: &SupSampling) -> Result<f64> {
    Ok(sup_norm(model, Component::SourceDu, slab_uv, sampling)?.value)
}

/// `(2N+1)‖∇∂_u f‖_{slab_u} + ‖∂_u F‖_{slab_uv}`.
pub fn kappa_1(
    model: &BalanceLawModel,
    slab_u: &DomainSlab,
    slab_uv: &DomainSlab,
    sampling: &SupSampling,
) -> Result<f64> {
    let a = sup_norm(model, Component::FluxDuGrad, slab_u, sampling)?.value;
    let b = sup_norm(model, Component::SourceDu, slab_uv, sampling)?.value;
    Ok(kappa_star_0_from_norms(model.dimension(), a, b))
}

/// Coefficients of the earlier versions of both estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegacyCoefficients {
    /// `N·W_N·((2N+1)‖∇∂_u f‖ + ‖∂_u F‖)`
    pub kappa0_old: f64,
    /// `2N‖∇∂_u f‖ + ‖∂_u F‖ + ‖∂_u(F − G)‖`
    pub kappa_old: f64,
}

/// Legacy coefficients of `(f, F)` (and `(g, G)` for the stability one),
/// all probed on `slab`.
pub fn legacy_coefficients(
    model: &BalanceLawModel,
    other: Option<&BalanceLawModel>,
    slab: &DomainSlab,
    sampling: &SupSampling,
) -> Result<LegacyCoefficients> {
    let n = model.dimension();
    let a = sup_norm(model, Component::FluxDuGrad, slab, sampling)?.value;
    let b = sup_norm(model, Component::SourceDu, slab, sampling)?.value;
    let diff = match other {
        Some(g) => {
            let d = model.difference(g)?;
            sup_norm(&d, Component::SourceDu, slab, sampling)?.value
        }
        None => 0.0,
    };
    Ok(LegacyCoefficients {
        kappa0_old: n as f64 * wallis_integral(n) * kappa_star_0_from_norms(n, a, b),
        kappa_old: 2.0 * n as f64 * a + b + diff,
    })
}

/// `c = ‖∂_u f‖` over the slab.
pub fn propagation_speed(model: &BalanceLawModel, slab: &DomainSlab, sampling: &SupSampling) -> Result<f64> {
    Ok(sup_norm(model, Component::FluxDu, slab, sampling)?.value)
}
