//! Balance-law definitions and the coefficients built from their sampled
//! sup norms.
//!
//! A [`BalanceLawModel`] carries the flux components `f_d(t, x, u)`, the
//! source `F(t, x, u)`, and a derivative bundle. Each derivative is either
//! supplied in closed form or obtained by central differences of the lower
//! order pieces; the provenance is recorded per derivative.

mod catalog;
mod hypotheses;
mod norms;
mod range;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use catalog::{FluxSpec, ModelSpec, SourceSpec};
pub use hypotheses::{check_hypotheses, HypothesisBudget, HypothesisItem, HypothesisReport, HypothesisStatus};
pub use norms::{
    kappa_1, kappa_star, kappa_star_0, kappa_star_0_from_norms, legacy_coefficients,
    propagation_speed, sup_norm, value_axis_sup, Component, DomainSlab, LegacyCoefficients,
    SupNorm, SupSampling, MATRIX_NORM_CONVENTION,
};
pub use range::{range_track, RangeTrack};
pub(crate) use norms::sampled_sup;

/// `(component d, t, x, u) ↦ f_d(t, x, u)` and friends.
pub type AxisFn = Arc<dyn Fn(usize, f64, &[f64], f64) -> f64 + Send + Sync>;
/// `(t, x, u) ↦ value`.
pub type ScalarFn = Arc<dyn Fn(f64, &[f64], f64) -> f64 + Send + Sync>;
/// `(i, j, t, x, u) ↦ ∂_{x_j} ∂_u f_i`.
pub type MatrixFn = Arc<dyn Fn(usize, usize, f64, &[f64], f64) -> f64 + Send + Sync>;

/// Default relative central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Step for differences of quantities that are themselves differenced.
const NESTED_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    FiniteDifference,
    Missing,
}

/// Entries of the derivative bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Derivative {
    /// `∂_u f`
    FluxDu,
    /// `∇∂_u f`
    FluxDuGrad,
    /// `∂_u F`
    SourceDu,
    /// `div f`
    FluxDiv,
    /// `∇(F − div f)`
    ResidualGrad,
}

impl Derivative {
    pub const ALL: [Derivative; 5] = [
        Derivative::FluxDu,
        Derivative::FluxDuGrad,
        Derivative::SourceDu,
        Derivative::FluxDiv,
        Derivative::ResidualGrad,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Derivative::FluxDu => "∂_u f",
            Derivative::FluxDuGrad => "∇∂_u f",
            Derivative::SourceDu => "∂_u F",
            Derivative::FluxDiv => "div f",
            Derivative::ResidualGrad => "∇(F − div f)",
        }
    }
}

#[derive(Clone)]
struct Slot<F> {
    provenance: Provenance,
    eval: F,
    analytic: Option<F>,
    numeric: F,
}

#[inline]
fn step(eta: f64, x: f64) -> f64 {
    eta * x.abs().max(1.0)
}

fn nan_axis() -> AxisFn {
    Arc::new(|_, _, _, _| f64::NAN)
}
fn nan_scalar() -> ScalarFn {
    Arc::new(|_, _, _| f64::NAN)
}
fn nan_matrix() -> MatrixFn {
    Arc::new(|_, _, _, _, _| f64::NAN)
}

/// A scalar balance law `∂ₜu + Div f(t, x, u) = F(t, x, u)`.
#[derive(Clone)]
pub struct BalanceLawModel {
    name: String,
    dimension: usize,
    flux: AxisFn,
    source: ScalarFn,
    flux_du: Slot<AxisFn>,
    flux_du_grad: Slot<MatrixFn>,
    source_du: Slot<ScalarFn>,
    flux_div: Slot<ScalarFn>,
    residual_grad: Slot<AxisFn>,
    fd_step: f64,
}

impl fmt::Debug for BalanceLawModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BalanceLawModel")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("provenance", &self.provenances())
            .finish()
    }
}

pub struct ModelBuilder {
    name: String,
    dimension: usize,
    flux: AxisFn,
    source: ScalarFn,
    flux_du: Option<AxisFn>,
    flux_du_grad: Option<MatrixFn>,
    source_du: Option<ScalarFn>,
    flux_div: Option<ScalarFn>,
    residual_grad: Option<AxisFn>,
    fd_step: f64,
    fallback: bool,
}

impl ModelBuilder {
    pub fn flux_du(mut self, f: impl Fn(usize, f64, &[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.flux_du = Some(Arc::new(f));
        self
    }

    pub fn flux_du_grad(
        mut self,
        f: impl Fn(usize, usize, f64, &[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.flux_du_grad = Some(Arc::new(f));
        self
    }

    pub fn source_du(mut self, f: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source_du = Some(Arc::new(f));
        self
    }

    pub fn flux_div(mut self, f: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.flux_div = Some(Arc::new(f));
        self
    }

    pub fn residual_grad(
        mut self,
        f: impl Fn(usize, f64, &[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.residual_grad = Some(Arc::new(f));
        self
    }

    pub fn fd_step(mut self, eta: f64) -> Self {
        self.fd_step = eta;
        self
    }

    /// When disabled, derivatives without a closed form are reported missing
    /// instead of being differenced.
    pub fn allow_fallback(mut self, allow: bool) -> Self {
        self.fallback = allow;
        self
    }

    pub fn build(self) -> Result<BalanceLawModel> {
        if self.dimension == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1.0) {
            return Err(Error::invalid("finite-difference step must lie in (0, 1)"));
        }
        let eta = self.fd_step;
        let dim = self.dimension;

        let flux = self.flux.clone();
        let fd_flux_du: AxisFn = Arc::new(move |d, t, x, u| {
            let e = step(eta, u);
            (flux(d, t, x, u + e) - flux(d, t, x, u - e)) / (2.0 * e)
        });
        let flux_du = resolve(self.flux_du, fd_flux_du, self.fallback, nan_axis());

        let du = flux_du.eval.clone();
        let eta_grad = if flux_du.provenance == Provenance::Analytic { eta } else { NESTED_FD_STEP };
        let fd_flux_du_grad: MatrixFn = Arc::new(move |i, j, t, x, u| {
            let e = step(eta_grad, x[j]);
            let mut xp = x.to_vec();
            xp[j] = x[j] + e;
            let plus = du(i, t, &xp, u);
            xp[j] = x[j] - e;
            (plus - du(i, t, &xp, u)) / (2.0 * e)
        });
        let flux_du_grad = resolve(self.flux_du_grad, fd_flux_du_grad, self.fallback, nan_matrix());

        let source = self.source.clone();
        let fd_source_du: ScalarFn = Arc::new(move |t, x, u| {
            let e = step(eta, u);
            (source(t, x, u + e) - source(t, x, u - e)) / (2.0 * e)
        });
        let source_du = resolve(self.source_du, fd_source_du, self.fallback, nan_scalar());

        let flux = self.flux.clone();
        let fd_flux_div: ScalarFn = Arc::new(move |t, x, u| {
            let mut xp = x.to_vec();
            (0..dim)
                .map(|d| {
                    let e = step(eta, x[d]);
                    xp[d] = x[d] + e;
                    let plus = flux(d, t, &xp, u);
                    xp[d] = x[d] - e;
                    let minus = flux(d, t, &xp, u);
                    xp[d] = x[d];
                    (plus - minus) / (2.0 * e)
                })
                .sum()
        });
        let flux_div = resolve(self.flux_div, fd_flux_div, self.fallback, nan_scalar());

        let source = self.source.clone();
        let div = flux_div.eval.clone();
        let eta_res = if flux_div.provenance == Provenance::Analytic { eta } else { NESTED_FD_STEP };
        let fd_residual_grad: AxisFn = Arc::new(move |j, t, x, u| {
            let e = step(eta_res, x[j]);
            let mut xp = x.to_vec();
            xp[j] = x[j] + e;
            let plus = source(t, &xp, u) - div(t, &xp, u);
            xp[j] = x[j] - e;
            let minus = source(t, &xp, u) - div(t, &xp, u);
            (plus - minus) / (2.0 * e)
        });
        let residual_grad = resolve(self.residual_grad, fd_residual_grad, self.fallback, nan_axis());

        Ok(BalanceLawModel {
            name: self.name,
            dimension: self.dimension,
            flux: self.flux,
            source: self.source,
            flux_du,
            flux_du_grad,
            source_du,
            flux_div,
            residual_grad,
            fd_step: eta,
        })
    }
}

fn resolve<F: Clone>(analytic: Option<F>, numeric: F, fallback: bool, missing: F) -> Slot<F> {
    match analytic {
        Some(a) => Slot {
            provenance: Provenance::Analytic,
            eval: a.clone(),
            analytic: Some(a),
            numeric,
        },
        None if fallback => Slot {
            provenance: Provenance::FiniteDifference,
            eval: numeric.clone(),
            analytic: None,
            numeric,
        },
        None => Slot {
            provenance: Provenance::Missing,
            eval: missing,
            analytic: None,
            numeric,
        },
    }
}

fn combine_provenance(a: Provenance, b: Provenance) -> Provenance {
    use Provenance::*;
    match (a, b) {
        (Missing, _) | (_, Missing) => Missing,
        (Analytic, Analytic) => Analytic,
        _ => FiniteDifference,
    }
}

impl BalanceLawModel {
    pub fn builder(
        name: impl Into<String>,
        dimension: usize,
        flux: impl Fn(usize, f64, &[f64], f64) -> f64 + Send + Sync + 'static,
        source: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static,
    ) -> ModelBuilder {
        ModelBuilder {
            name: name.into(),
            dimension,
            flux: Arc::new(flux),
            source: Arc::new(source),
            flux_du: None,
            flux_du_grad: None,
            source_du: None,
            flux_div: None,
            residual_grad: None,
            fd_step: DEFAULT_FD_STEP,
            fallback: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    #[inline]
    pub fn flux(&self, d: usize, t: f64, x: &[f64], u: f64) -> f64 {
        (self.flux)(d, t, x, u)
    }

    #[inline]
    pub fn source(&self, t: f64, x: &[f64], u: f64) -> f64 {
        (self.source)(t, x, u)
    }

    #[inline]
    pub fn flux_du(&self, d: usize, t: f64, x: &[f64], u: f64) -> f64 {
        (self.flux_du.eval)(d, t, x, u)
    }

    #[inline]
    pub fn flux_du_grad(&self, i: usize, j: usize, t: f64, x: &[f64], u: f64) -> f64 {
        (self.flux_du_grad.eval)(i, j, t, x, u)
    }

    #[inline]
    pub fn source_du(&self, t: f64, x: &[f64], u: f64) -> f64 {
        (self.source_du.eval)(t, x, u)
    }

    #[inline]
    pub fn flux_div(&self, t: f64, x: &[f64], u: f64) -> f64 {
        (self.flux_div.eval)(t, x, u)
    }

    /// `F − div f`.
    #[inline]
    pub fn residual(&self, t: f64, x: &[f64], u: f64) -> f64 {
        self.source(t, x, u) - self.flux_div(t, x, u)
    }

    /// `∂_{x_j}(F − div f)`.
    #[inline]
    pub fn residual_grad(&self, j: usize, t: f64, x: &[f64], u: f64) -> f64 {
        (self.residual_grad.eval)(j, t, x, u)
    }

    pub fn provenance(&self, which: Derivative) -> Provenance {
        match which {
            Derivative::FluxDu => self.flux_du.provenance,
            Derivative::FluxDuGrad => self.flux_du_grad.provenance,
            Derivative::SourceDu => self.source_du.provenance,
            Derivative::FluxDiv => self.flux_div.provenance,
            Derivative::ResidualGrad => self.residual_grad.provenance,
        }
    }

    pub fn provenances(&self) -> Vec<(Derivative, Provenance)> {
        Derivative::ALL.iter().map(|&d| (d, self.provenance(d))).collect()
    }

    /// Errors if any of `needed` is missing, naming `hypothesis`.
    pub fn require(&self, needed: &[Derivative], hypothesis: &'static str) -> Result<()> {
        for &d in needed {
            if self.provenance(d) == Provenance::Missing {
                return Err(Error::MissingDerivative {
                    model: self.name.clone(),
                    derivative: d.symbol(),
                    hypothesis,
                });
            }
        }
        Ok(())
    }

    /// The model `(f − g, F − G)`.
    pub fn difference(&self, other: &BalanceLawModel) -> Result<BalanceLawModel> {
        if self.dimension != other.dimension {
            return Err(Error::invalid("cannot subtract models of different dimension"));
        }
        fn axis(a: &AxisFn, b: &AxisFn) -> AxisFn {
            let (a, b) = (a.clone(), b.clone());
            Arc::new(move |d, t, x, u| a(d, t, x, u) - b(d, t, x, u))
        }
        fn scalar(a: &ScalarFn, b: &ScalarFn) -> ScalarFn {
            let (a, b) = (a.clone(), b.clone());
            Arc::new(move |t, x, u| a(t, x, u) - b(t, x, u))
        }
        fn matrix(a: &MatrixFn, b: &MatrixFn) -> MatrixFn {
            let (a, b) = (a.clone(), b.clone());
            Arc::new(move |i, j, t, x, u| a(i, j, t, x, u) - b(i, j, t, x, u))
        }
        macro_rules! slot {
            ($field:ident, $op:ident) => {{
                let (p, q) = (&self.$field, &other.$field);
                let provenance = combine_provenance(p.provenance, q.provenance);
                let numeric = $op(&p.numeric, &q.numeric);
                let analytic = match (&p.analytic, &q.analytic) {
                    (Some(a), Some(b)) => Some($op(a, b)),
                    _ => None,
                };
                Slot {
                    provenance,
                    eval: $op(&p.eval, &q.eval),
                    analytic,
                    numeric,
                }
            }};
        }
        Ok(BalanceLawModel {
            name: format!("({}) - ({})", self.name, other.name),
            dimension: self.dimension,
            flux: axis(&self.flux, &other.flux),
            source: scalar(&self.source, &other.source),
            flux_du: slot!(flux_du, axis),
            flux_du_grad: slot!(flux_du_grad, matrix),
            source_du: slot!(source_du, scalar),
            flux_div: slot!(flux_div, scalar),
            residual_grad: slot!(residual_grad, axis),
            fd_step: self.fd_step.max(other.fd_step),
        })
    }

    /// Largest `|analytic − finite difference|`, scaled by `max(1, |analytic|)`,
    /// over the probe set, for every derivative supplied in closed form.
    pub fn check_consistency(&self, probes: &[(f64, Vec<f64>, f64)]) -> Vec<ConsistencyEntry> {
        let n = self.dimension;
        let mut out = Vec::new();
        let mut record = |which: Derivative, worst: f64| {
            out.push(ConsistencyEntry {
                derivative: which,
                max_scaled_deviation: worst,
                passed: worst <= CONSISTENCY_TOLERANCE,
            })
        };
        let scaled = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
        if let Some(a) = &self.flux_du.analytic {
            let w = probes
                .iter()
                .flat_map(|(t, x, u)| (0..n).map(move |d| (d, *t, x, *u)))
                .map(|(d, t, x, u)| scaled(a(d, t, x, u), (self.flux_du.numeric)(d, t, x, u)))
                .fold(0.0, f64::max);
            record(Derivative::FluxDu, w);
        }
        if let Some(a) = &self.flux_du_grad.analytic {
            let mut w = 0.0f64;
            for (t, x, u) in probes {
                for i in 0..n {
                    for j in 0..n {
                        w = w.max(scaled(
                            a(i, j, *t, x, *u),
                            (self.flux_du_grad.numeric)(i, j, *t, x, *u),
                        ));
                    }
                }
            }
            record(Derivative::FluxDuGrad, w);
        }
        if let Some(a) = &self.source_du.analytic {
            let w = probes
                .iter()
                .map(|(t, x, u)| scaled(a(*t, x, *u), (self.source_du.numeric)(*t, x, *u)))
                .fold(0.0, f64::max);
            record(Derivative::SourceDu, w);
        }
        if let Some(a) = &self.flux_div.analytic {
            let w = probes
                .iter()
                .map(|(t, x, u)| scaled(a(*t, x, *u), (self.flux_div.numeric)(*t, x, *u)))
                .fold(0.0, f64::max);
            record(Derivative::FluxDiv, w);
        }
        if let Some(a) = &self.residual_grad.analytic {
            let mut w = 0.0f64;
            for (t, x, u) in probes {
                for j in 0..n {
                    w = w.max(scaled(
                        a(j, *t, x, *u),
                        (self.residual_grad.numeric)(j, *t, x, *u),
                    ));
                }
            }
            record(Derivative::ResidualGrad, w);
        }
        out
    }
}

/// Acceptance bound for analytic/finite-difference agreement.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyEntry {
    pub derivative: Derivative,
    pub max_scaled_deviation: f64,
    pub passed: bool,
}
