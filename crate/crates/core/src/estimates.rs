//! Both sides of the total-variation and stability estimates.
//!
//! Every right-hand side is stored as a sum of named nonnegative terms; the
//! coefficients that entered them are recorded next to them. All `L∞` norms
//! are sampled (see [`crate::models::sup_norm`]), and spatial integrals over
//! `ℝ^N` are taken over the computational box.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{build_mollifier, wallis_integral, MollifierConstants, DEFAULT_PLATEAU};
use crate::error::{Error, Result};
use crate::fields::{l1_distance, total_variation, Region, ScalarField};
use crate::models::{
    kappa_star_0_from_norms, legacy_coefficients, sampled_sup, sup_norm, value_axis_sup, BalanceLawModel,
    Component, DomainSlab, SupSampling, MATRIX_NORM_CONVENTION,
};
use crate::solver::Trajectory;
use crate::sum::{kahan_sum, trapezoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateId {
    Kruzkov,
    TvTheorem,
    TvSpecialCk,
    StabilityTheorem,
    StabilitySimplified,
}

impl EstimateId {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateId::Kruzkov => "kruzkov",
            EstimateId::TvTheorem => "tv_theorem",
            EstimateId::TvSpecialCk => "tv_special_ck",
            EstimateId::StabilityTheorem => "stability_theorem",
            EstimateId::StabilitySimplified => "stability_simplified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithinTolerance,
    Violated,
}

impl Verdict {
    /// `lhs ≤ rhs`, else `lhs ≤ rhs·(1 + rel) + abs`, else violated.
    pub fn decide(lhs: f64, rhs: f64, relative: f64, absolute: f64) -> Verdict {
        if lhs <= rhs {
            Verdict::Holds
        } else if lhs <= rhs * (1.0 + relative) + absolute {
            Verdict::HoldsWithinTolerance
        } else {
            Verdict::Violated
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithinTolerance => "holds_within_tolerance",
            Verdict::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub h: f64,
    #[serde(rename = "N")]
    pub dimension: usize,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingMeta {
    pub sampled: bool,
    pub points_per_axis: usize,
    pub refinement_rounds: usize,
    pub refinement_factor: f64,
    pub value_points: usize,
    pub value_refinements: usize,
    pub norm_convention: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceMeta {
    pub relative: f64,
    pub absolute: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate_id: EstimateId,
    pub lhs: f64,
    pub rhs: f64,
    pub terms: BTreeMap<String, f64>,
    pub coefficients: BTreeMap<String, f64>,
    pub grid: GridMeta,
    pub sampling: SamplingMeta,
    pub tolerance: ToleranceMeta,
    pub verdict: Verdict,
    /// `rhs − lhs`.
    pub margin: f64,
    pub notes: Vec<String>,
}

impl EstimateReport {
    /// Sum of the recorded terms, in key order.
    pub fn reassembled_rhs(&self) -> f64 {
        kahan_sum(self.terms.values().copied())
    }

    pub fn reassembles(&self) -> bool {
        (self.reassembled_rhs() - self.rhs).abs() <= 1e-12 * self.rhs.abs().max(1.0)
    }

    pub fn verdict_with(&self, relative: f64, absolute: f64) -> Verdict {
        Verdict::decide(self.lhs, self.rhs, relative, absolute)
    }
}

/// Replacement coefficients, for crafted fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientOverrides {
    pub kappa_star_0: Option<f64>,
    pub kappa_star: Option<f64>,
    pub kappa_1: Option<f64>,
    pub m: Option<f64>,
    pub gamma: Option<f64>,
    /// Multiplies every right-hand side.
    pub rhs_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateOptions {
    pub tolerance_rel: f64,
    /// `None`: `4h·scale` with the estimate's natural scale.
    pub tolerance_abs: Option<f64>,
    pub sampling: SupSampling,
    pub value_points: usize,
    pub value_refinements: usize,
    pub plateau_radius: f64,
    pub overrides: CoefficientOverrides,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            tolerance_rel: 1e-3,
            tolerance_abs: None,
            sampling: SupSampling::default(),
            value_points: 17,
            value_refinements: 1,
            plateau_radius: DEFAULT_PLATEAU,
            overrides: CoefficientOverrides::default(),
        }
    }
}

impl EstimateOptions {
    fn sampling_meta(&self) -> SamplingMeta {
        SamplingMeta {
            sampled: true,
            points_per_axis: self.sampling.points_per_axis,
            refinement_rounds: self.sampling.refinement_rounds,
            refinement_factor: self.sampling.refinement_factor,
            value_points: self.value_points,
            value_refinements: self.value_refinements,
            norm_convention: MATRIX_NORM_CONVENTION,
        }
    }

    fn tolerance(&self, h: f64, scale: f64) -> ToleranceMeta {
        ToleranceMeta {
            relative: self.tolerance_rel,
            absolute: self.tolerance_abs.unwrap_or(4.0 * h * scale),
        }
    }
}

/// `(e^{κ₀t} − e^{κt})/(κ₀ − κ)`, continuous across `κ₀ = κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpRatio {
    pub kappa0: f64,
    pub kappa: f64,
    pub t: f64,
    pub value: f64,
}

impl ExpRatio {
    pub fn new(kappa0: f64, kappa: f64, t: f64) -> Self {
        ExpRatio { kappa0, kappa, t, value: exp_ratio(kappa0, kappa, t) }
    }
}

pub fn exp_ratio(kappa0: f64, kappa: f64, t: f64) -> f64 {
    let lo = kappa0.min(kappa);
    let d = (kappa0 - kappa).abs();
    let x = d * t;
    // expm1(x)/x, with its series near the diagonal
    let phi = if d < 1e-8 * kappa0.abs().max(1.0) {
        1.0 + x / 2.0 + x * x / 6.0
    } else {
        x.exp_m1() / x
    };
    if t == 0.0 {
        return 0.0;
    }
    t * (lo * t).exp() * phi
}

/// `e^{γt}·‖u₀ − v₀‖_{L¹}`.
pub fn kruzkov_bound(u0: &ScalarField, v0: &ScalarField, gamma: f64, t: f64) -> Result<f64> {
    if !(gamma >= 0.0 && t >= 0.0) {
        return Err(Error::invalid("kruzkov bound needs γ ≥ 0 and t ≥ 0"));
    }
    Ok((gamma * t).exp() * l1_distance(u0, v0, &Region::Whole)?)
}

fn grid_meta(traj: &Trajectory) -> GridMeta {
    let g = traj.grid();
    GridMeta { h: g.spacing(), dimension: g.dimension(), cells: g.cells().to_vec() }
}

fn finish(
    estimate_id: EstimateId,
    lhs: f64,
    terms: BTreeMap<String, f64>,
    coefficients: BTreeMap<String, f64>,
    grid: GridMeta,
    options: &EstimateOptions,
    scale: f64,
    mut notes: Vec<String>,
) -> EstimateReport {
    let mut terms = terms;
    if let Some(s) = options.overrides.rhs_scale {
        terms.values_mut().for_each(|v| *v *= s);
        notes.push(format!("right-hand side scaled by override factor {s}"));
    }
    let rhs = kahan_sum(terms.values().copied());
    let tolerance = options.tolerance(grid.h, scale);
    EstimateReport {
        estimate_id,
        lhs,
        rhs,
        terms,
        coefficients,
        grid,
        sampling: options.sampling_meta(),
        tolerance,
        verdict: Verdict::decide(lhs, rhs, tolerance.relative, tolerance.absolute),
        margin: rhs - lhs,
        notes,
    }
}

/// `Σ_cells sup_{|w| ≤ bound} g(t, x, w)·h^N` over cells selected by `keep`.
fn cell_integral<G, K>(field: &ScalarField, bound: f64, options: &EstimateOptions, keep: K, g: G) -> Result<f64>
where
    G: Fn(&[f64], f64) -> f64 + Sync,
    K: Fn(&[f64]) -> bool + Sync,
{
    let grid = field.grid();
    let n = grid.dimension();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let mut x = vec![0.0; n];
            grid.center_of(k, &mut x);
            if !keep(&x) {
                return 0.0;
            }
            value_axis_sup(|w| g(&x, w), bound, options.value_points, options.value_refinements)
        })
        .collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        let mut x = vec![0.0; n];
        grid.center_of(k, &mut x);
        return Err(Error::NonFinite { quantity: "spatial integrand".into(), point: x });
    }
    Ok(kahan_sum(values) * grid.cell_volume())
}

/// `t ↦ ∫ sup_{|w| ≤ U_t} ‖∇(F − div f)(t, x, w)‖ dx` at every snapshot.
fn residual_gradient_profile(traj: &Trajectory, model: &BalanceLawModel, options: &EstimateOptions) -> Result<Vec<f64>> {
    traj.snapshots
        .iter()
        .zip(&traj.range_track.bounds)
        .map(|(s, &bound)| {
            cell_integral(&s.field, bound, options, |_| true, |x, w| {
                Component::ResidualGrad.evaluate(model, s.time, x, w)
            })
        })
        .collect()
}

fn constants_for(n: usize, options: &EstimateOptions) -> Result<MollifierConstants> {
    build_mollifier(options.plateau_radius, n)?.constants()
}

/// Pieces of the total-variation bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvBound {
    pub tv_initial: f64,
    pub kappa_star_0: f64,
    /// `TV(u₀)·e^{κ*₀T}`
    pub term1: f64,
    /// `N·W_N ∫₀^T e^{κ*₀(T−t)} ∫ ‖∇(F − div f)‖ dx dt`
    pub term2: f64,
    pub rhs: f64,
    pub nw_n: f64,
    pub m1_over_c1: f64,
    pub residual_integrals: Vec<f64>,
    pub slab: DomainSlab,
}

pub fn tv_bound_rhs(traj: &Trajectory, model: &BalanceLawModel, options: &EstimateOptions) -> Result<TvBound> {
    use crate::models::Derivative::*;
    model.require(&[FluxDuGrad, SourceDu, ResidualGrad], "H2*")?;
    let n = model.dimension();
    let slab = traj.range_track.sigma_slab()?;
    let kappa_star_0 = match options.overrides.kappa_star_0 {
        Some(k) => k,
        None => {
            let a = sup_norm(model, Component::FluxDuGrad, &slab, &options.sampling)?.value;
            let b = sup_norm(model, Component::SourceDu, &slab, &options.sampling)?.value;
            kappa_star_0_from_norms(n, a, b)
        }
    };
    let tv_initial = total_variation(&traj.initial().field)?;
    let t_end = traj.last().time;
    let nw_n = n as f64 * wallis_integral(n);
    let constants = constants_for(n, options)?;
    let residual_integrals = residual_gradient_profile(traj, model, options)?;
    let times = traj.times();
    let weighted: Vec<f64> = times
        .iter()
        .zip(&residual_integrals)
        .map(|(t, i)| (kappa_star_0 * (t_end - t)).exp() * i)
        .collect();
    let term1 = tv_initial * (kappa_star_0 * t_end).exp();
    let term2 = nw_n * trapezoid(&times, &weighted);
    Ok(TvBound {
        tv_initial,
        kappa_star_0,
        term1,
        term2,
        rhs: term1 + term2,
        nw_n,
        m1_over_c1: constants.ratio(),
        residual_integrals,
        slab,
    })
}

/// `TV(u(T)) ≤ TV(u₀)e^{κ*₀T} + N·W_N ∫₀^T e^{κ*₀(T−t)} ∫ ‖∇(F − div f)‖`.
pub fn check_tv_theorem(traj: &Trajectory, model: &BalanceLawModel, options: &EstimateOptions) -> Result<EstimateReport> {
    let bound = tv_bound_rhs(traj, model, options)?;
    let lhs = total_variation(&traj.last().field)?;
    let terms = BTreeMap::from([
        ("initial_variation".to_string(), bound.term1),
        ("residual_gradient".to_string(), bound.term2),
    ]);
    let coefficients = BTreeMap::from([
        ("kappa_star_0".to_string(), bound.kappa_star_0),
        ("nw_n".to_string(), bound.nw_n),
        ("m1_over_c1".to_string(), bound.m1_over_c1),
        ("tv_initial".to_string(), bound.tv_initial),
        ("final_time".to_string(), traj.last().time),
    ]);
    let notes = vec![
        "L∞ norms are sampled estimates".to_string(),
        "spatial integrals are truncated to the computational box".to_string(),
    ];
    Ok(finish(EstimateId::TvTheorem, lhs, terms, coefficients, grid_meta(traj), options, bound.tv_initial, notes))
}

/// Largest sampled value tolerated as "identically zero" in the CK
/// applicability check.
const CK_ZERO: f64 = 1e-8;

/// The special case `∇∂_u f ≡ 0`, `∂_u F ≡ 0`:
/// `TV(u(T)) ≤ TV(u₀) + c ∫₀^T ∫ ‖∇(F − div f)‖`, with `c = 1` when
/// `F − div f` does not depend on `u` and `c = M₁/C₁` otherwise.
pub fn tv_special_ck(traj: &Trajectory, model: &BalanceLawModel, options: &EstimateOptions) -> Result<EstimateReport> {
    use crate::models::Derivative::*;
    model.require(&[FluxDuGrad, SourceDu, ResidualGrad, FluxDiv], "H2*")?;
    let n = model.dimension();
    let grid = traj.grid();
    let bound = traj.range_track.global_bound;
    let box_slab = DomainSlab::new((0.0, traj.last().time), grid.bounds(), bound)?;
    let grad = sup_norm(model, Component::FluxDuGrad, &box_slab, &options.sampling)?.value;
    let src = sup_norm(model, Component::SourceDu, &box_slab, &options.sampling)?.value;
    if grad > CK_ZERO || src > CK_ZERO {
        return Err(Error::CkPreconditions(format!(
            "CK preconditions not met: sup‖∇∂_u f‖ = {grad:e}, sup|∂_u F| = {src:e}"
        )));
    }
    let mut axes = vec![box_slab.time];
    axes.extend(box_slab.space.iter().copied());
    let spread = if bound > 0.0 {
        sampled_sup(&axes, &options.sampling, |p| {
            (model.residual(p[0], &p[1..=n], bound) - model.residual(p[0], &p[1..=n], -bound)).abs()
        })?
        .value
    } else {
        0.0
    };
    let constants = constants_for(n, options)?;
    let u_independent = spread <= CK_ZERO;
    let factor = if u_independent { 1.0 } else { constants.ratio() };
    let profile = residual_gradient_profile(traj, model, options)?;
    let integral = trapezoid(&traj.times(), &profile);
    let tv_initial = total_variation(&traj.initial().field)?;
    let lhs = total_variation(&traj.last().field)?;
    let terms = BTreeMap::from([
        ("initial_variation".to_string(), tv_initial),
        ("residual_gradient".to_string(), factor * integral),
    ]);
    let coefficients = BTreeMap::from([
        ("factor".to_string(), factor),
        ("m1_over_c1".to_string(), constants.ratio()),
        ("nw_n".to_string(), n as f64 * wallis_integral(n)),
        ("residual_integral".to_string(), integral),
        ("tv_initial".to_string(), tv_initial),
        ("final_time".to_string(), traj.last().time),
    ]);
    let mut notes = vec!["L∞ norms are sampled estimates".to_string()];
    notes.push(if u_independent {
        "F − div f does not depend on u: the N·W_N factor is dropped".to_string()
    } else {
        "F − div f depends on u: factor M₁/C₁ = N·W_N kept".to_string()
    });
    Ok(finish(EstimateId::TvSpecialCk, lhs, terms, coefficients, grid_meta(traj), options, tv_initial, notes))
}

/// `‖u(T) − v(T)‖_{L¹} ≤ e^{γT}‖u₀ − v₀‖_{L¹}` for one law, `γ = ‖∂_u F‖`.
pub fn check_kruzkov(
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    model: &BalanceLawModel,
    options: &EstimateOptions,
) -> Result<EstimateReport> {
    let pair = traj_u.range_track.pair(&traj_v.range_track)?;
    let gamma = match options.overrides.gamma {
        Some(g) => g,
        None => sup_norm(model, Component::SourceDu, &pair.sigma_slab()?, &options.sampling)?.value,
    };
    let t_end = traj_u.last().time;
    let bound = kruzkov_bound(&traj_u.initial().field, &traj_v.initial().field, gamma, t_end)?;
    let lhs = l1_distance(&traj_u.last().field, &traj_v.last().field, &Region::Whole)?;
    let scale = total_variation(&traj_u.initial().field)? + total_variation(&traj_v.initial().field)?;
    let terms = BTreeMap::from([("initial_difference".to_string(), bound)]);
    let coefficients = BTreeMap::from([("gamma".to_string(), gamma), ("final_time".to_string(), t_end)]);
    let notes = vec!["γ is the sampled sup of |∂_u F| over the pair slab".to_string()];
    Ok(finish(EstimateId::Kruzkov, lhs, terms, coefficients, grid_meta(traj_u), options, scale, notes))
}

/// Coefficients and integrals shared by both stability bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityInputs {
    pub kappa_star_0: f64,
    pub kappa_star: f64,
    pub kappa_1: f64,
    pub m: f64,
    /// `‖∂_u(f − g)‖` over `Σ_T^u`.
    pub flux_difference: f64,
    pub nw_n: f64,
    pub m1_over_c1: f64,
    pub tv_initial: f64,
    pub final_time: f64,
    pub initial_difference: f64,
    pub times: Vec<f64>,
    /// `∫ sup_{|w|≤U_t} ‖∇(F − div f)‖ dx` per snapshot.
    pub residual_integrals: Vec<f64>,
    /// `∫_{B(x₀, R+M(T−t))} sup_{|w|≤V_t} |(F − G) − div(f − g)| dx` per snapshot.
    pub difference_integrals: Vec<f64>,
    pub kappa0_old: f64,
    pub kappa_old: f64,
}

#[allow(clippy::too_many_arguments)]
fn stability_inputs(
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    f: &BalanceLawModel,
    g: &BalanceLawModel,
    radius: f64,
    center: &[f64],
    options: &EstimateOptions,
) -> Result<StabilityInputs> {
    use crate::models::Derivative::*;
    f.require(&[FluxDu, FluxDuGrad, SourceDu, ResidualGrad], "H2*")?;
    g.require(&[FluxDu], "H1*")?;
    let diff = f.difference(g)?;
    diff.require(&[FluxDu, FluxDiv], "H3*")?;
    traj_u.grid().ensure_same(traj_v.grid())?;
    if traj_u.times() != traj_v.times() {
        return Err(Error::invalid("paired trajectories need identical snapshot times"));
    }
    if !(radius > 0.0) || center.len() != f.dimension() {
        return Err(Error::invalid("stability ball needs R > 0 and a center of the model dimension"));
    }
    let n = f.dimension();
    let s = &options.sampling;
    let track_u = &traj_u.range_track;
    let pair = track_u.pair(&traj_v.range_track)?;
    let slab_u = track_u.sigma_slab()?;
    let slab_uv = pair.sigma_slab()?;
    let t_end = traj_u.last().time;

    let grad_u = sup_norm(f, Component::FluxDuGrad, &slab_u, s)?.value;
    let src_u = sup_norm(f, Component::SourceDu, &slab_u, s)?.value;
    let src_uv = sup_norm(f, Component::SourceDu, &slab_uv, s)?.value;
    let o = &options.overrides;
    let kappa_star_0 = o.kappa_star_0.unwrap_or(kappa_star_0_from_norms(n, grad_u, src_u));
    // Σ^u ⊆ Σ^{u,v}; taking the max keeps that true for the samples as well.
    let kappa_star = o.kappa_star.unwrap_or(src_uv.max(src_u));
    let kappa_1 = o.kappa_1.unwrap_or(kappa_star_0_from_norms(n, grad_u, kappa_star));

    // M is probed on the pair support dilated by 2cT.
    let c = sup_norm(f, Component::FluxDu, &slab_uv, s)?
        .value
        .max(sup_norm(g, Component::FluxDu, &slab_uv, s)?.value);
    let omega = pair.dilated_slab(2.0 * c * t_end)?;
    let m = match o.m {
        Some(m) => m,
        None => sup_norm(g, Component::FluxDu, &omega, s)?.value,
    };
    let flux_difference = sup_norm(&diff, Component::FluxDu, &slab_u, s)?.value;
    let legacy = legacy_coefficients(f, Some(g), &omega, s)?;

    let residual_integrals = residual_gradient_profile(traj_u, f, options)?;
    let difference_integrals = traj_u
        .snapshots
        .iter()
        .zip(&pair.bounds)
        .map(|(snap, &bound)| {
            let r = radius + m * (t_end - snap.time);
            cell_integral(
                &snap.field,
                bound,
                options,
                |x| x.iter().zip(center).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() <= r * r,
                |x, w| Component::Residual.evaluate(&diff, snap.time, x, w),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let initial_difference = l1_distance(
        &traj_u.initial().field,
        &traj_v.initial().field,
        &Region::Ball { center: center.to_vec(), radius: radius + m * t_end },
    )?;
    Ok(StabilityInputs {
        kappa_star_0,
        kappa_star,
        kappa_1,
        m,
        flux_difference,
        nw_n: n as f64 * wallis_integral(n),
        m1_over_c1: constants_for(n, options)?.ratio(),
        tv_initial: total_variation(&traj_u.initial().field)?,
        final_time: t_end,
        initial_difference,
        times: traj_u.times(),
        residual_integrals,
        difference_integrals,
        kappa0_old: legacy.kappa0_old,
        kappa_old: legacy.kappa_old,
    })
}

impl StabilityInputs {
    fn coefficients(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("kappa_star_0".to_string(), self.kappa_star_0),
            ("kappa_star".to_string(), self.kappa_star),
            ("kappa_1".to_string(), self.kappa_1),
            ("m".to_string(), self.m),
            ("flux_difference".to_string(), self.flux_difference),
            ("nw_n".to_string(), self.nw_n),
            ("m1_over_c1".to_string(), self.m1_over_c1),
            ("tv_initial".to_string(), self.tv_initial),
            ("exp_ratio_final".to_string(), exp_ratio(self.kappa_star_0, self.kappa_star, self.final_time)),
            ("kappa0_old".to_string(), self.kappa0_old),
            ("kappa_old".to_string(), self.kappa_old),
            ("final_time".to_string(), self.final_time),
        ])
    }

    fn terms(&self, simplified: bool) -> BTreeMap<String, f64> {
        let t_end = self.final_time;
        let growth = |s: f64| {
            if simplified {
                s * (self.kappa_1 * s).exp()
            } else {
                exp_ratio(self.kappa_star_0, self.kappa_star, s)
            }
        };
        let weighted: Vec<f64> = self
            .times
            .iter()
            .zip(&self.residual_integrals)
            .map(|(t, i)| growth(t_end - t) * i)
            .collect();
        let source: Vec<f64> = self
            .times
            .iter()
            .zip(&self.difference_integrals)
            .map(|(t, i)| (self.kappa_star * (t_end - t)).exp() * i)
            .collect();
        BTreeMap::from([
            ("initial_difference".to_string(), (self.kappa_star * t_end).exp() * self.initial_difference),
            ("tv_flux_difference".to_string(), growth(t_end) * self.tv_initial * self.flux_difference),
            (
                "residual_gradient".to_string(),
                self.nw_n * trapezoid(&self.times, &weighted) * self.flux_difference,
            ),
            ("source_difference".to_string(), trapezoid(&self.times, &source)),
        ])
    }
}

/// Right-hand side terms of the stability estimate (sharp form).
pub fn stability_bound_rhs(
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    f: &BalanceLawModel,
    g: &BalanceLawModel,
    radius: f64,
    center: &[f64],
    options: &EstimateOptions,
) -> Result<(StabilityInputs, BTreeMap<String, f64>)> {
    let inputs = stability_inputs(traj_u, traj_v, f, g, radius, center, options)?;
    let terms = inputs.terms(false);
    Ok((inputs, terms))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReports {
    pub sharp: EstimateReport,
    pub simplified: EstimateReport,
    pub sharp_le_simplified: bool,
}

/// `∫_{B(x₀,R)} |u(T) − v(T)|` against both forms of the stability bound.
pub fn check_stability_theorem(
    traj_u: &Trajectory,
    traj_v: &Trajectory,
    f: &BalanceLawModel,
    g: &BalanceLawModel,
    radius: f64,
    center: &[f64],
    options: &EstimateOptions,
) -> Result<StabilityReports> {
    let inputs = stability_inputs(traj_u, traj_v, f, g, radius, center, options)?;
    let lhs = l1_distance(
        &traj_u.last().field,
        &traj_v.last().field,
        &Region::Ball { center: center.to_vec(), radius },
    )?;
    let scale = inputs.tv_initial + total_variation(&traj_v.initial().field)?;
    let notes = vec![
        "L∞ norms are sampled estimates".to_string(),
        "ball membership by cell center".to_string(),
        "M is probed on the pair support dilated by 2cT".to_string(),
    ];
    let grid = grid_meta(traj_u);
    let sharp = finish(
        EstimateId::StabilityTheorem,
        lhs,
        inputs.terms(false),
        inputs.coefficients(),
        grid.clone(),
        options,
        scale,
        notes.clone(),
    );
    let simplified = finish(
        EstimateId::StabilitySimplified,
        lhs,
        inputs.terms(true),
        inputs.coefficients(),
        grid,
        options,
        scale,
        notes,
    );
    let sharp_le_simplified = sharp.rhs <= simplified.rhs * (1.0 + 1e-12);
    Ok(StabilityReports { sharp, simplified, sharp_le_simplified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::models::{FluxSpec, ModelSpec, SourceSpec};
    use crate::solver::{solve, solve_pair, InitialData, SolverConfig};

    #[test]
    fn exp_ratio_examples() {
        assert_eq!(exp_ratio(0.0, 0.0, 3.0), 3.0);
        assert!((exp_ratio(1.0, 0.0, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert_eq!(exp_ratio(1.0, 0.5, 0.0), 0.0);
        assert_eq!(exp_ratio(2.0, 0.5, 1.3), exp_ratio(0.5, 2.0, 1.3));
        // continuity across the series switch
        let a = exp_ratio(1.0 + 2e-8, 1.0, 2.0);
        let b = exp_ratio(1.0 + 5e-9, 1.0, 2.0);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn kruzkov_examples() {
        let grid = Grid::new(vec![0.0], 0.5, vec![4]).unwrap();
        let u = ScalarField::from_values(grid.clone(), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let v = ScalarField::from_values(grid, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(kruzkov_bound(&u, &v, 0.0, 2.0).unwrap(), 0.5);
        assert_eq!(kruzkov_bound(&u, &u, 1.0, 2.0).unwrap(), 0.0);
        assert!((kruzkov_bound(&u, &v, 2f64.ln(), 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn verdict_rule() {
        assert_eq!(Verdict::decide(1.0, 1.0, 0.0, 0.0), Verdict::Holds);
        assert_eq!(Verdict::decide(1.0005, 1.0, 1e-3, 0.0), Verdict::HoldsWithinTolerance);
        assert_eq!(Verdict::decide(1.1, 1.0, 1e-3, 0.0), Verdict::Violated);
    }

    fn indicator(h: f64) -> ScalarField {
        let grid = Grid::covering(&[-2.0], &[2.0], (4.0 / h) as usize).unwrap();
        InitialData::Indicator { lower: vec![-0.5], upper: vec![0.5], value: 1.0 }.sample(&grid).unwrap()
    }

    #[test]
    fn tv_bound_is_tv0_for_homogeneous_flux() {
        let m = ModelSpec::new(1, FluxSpec::Burgers { scale: 1.0, direction: None }, SourceSpec::None)
            .build()
            .unwrap();
        let traj = solve(&m, &indicator(1.0 / 64.0), &SolverConfig::new(0.5)).unwrap();
        let r = check_tv_theorem(&traj, &m, &EstimateOptions::default()).unwrap();
        assert_eq!(r.rhs, 2.0);
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.reassembles());
    }

    #[test]
    fn ck_refuses_x_dependent_flux() {
        let m = ModelSpec::new(
            1,
            FluxSpec::VariableAdvection { base: vec![0.0], amplitude: vec![1.0], axis: vec![0], wavenumber: 1.0 },
            SourceSpec::None,
        )
        .build()
        .unwrap();
        let traj = solve(&m, &indicator(1.0 / 32.0), &SolverConfig::new(0.25)).unwrap();
        let err = tv_special_ck(&traj, &m, &EstimateOptions::default()).unwrap_err();
        assert!(err.to_string().contains("CK preconditions not met"), "{err}");
    }

    #[test]
    fn identical_problems_give_zero_bound() {
        let m = ModelSpec::new(1, FluxSpec::Burgers { scale: 1.0, direction: None }, SourceSpec::None)
            .build()
            .unwrap();
        let u0 = indicator(1.0 / 32.0);
        let (u, v) = solve_pair(&m, &u0, &m, &u0, &SolverConfig::new(0.5)).unwrap();
        let r = check_stability_theorem(&u, &v, &m, &m, 1.0, &[0.0], &EstimateOptions::default()).unwrap();
        assert_eq!(r.sharp.lhs, 0.0);
        assert_eq!(r.sharp.rhs, 0.0);
        assert_eq!(r.sharp.verdict, Verdict::Holds);
        assert!(r.sharp_le_simplified);
    }
}
