//! Sampled finiteness diagnostics for the regularity hypotheses.
//!
//! Every norm and integral is re-evaluated on the probing box scaled by
//! `1, 2, 4, …` about its center (same spacing). A value that keeps growing
//! with the box points at a non-integrable or unbounded tail.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norms::{sup_norm, value_axis_sup, Component, DomainSlab, SupSampling};
use super::{BalanceLawModel, Derivative};
use crate::sum::kahan_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisBudget {
    pub cells_per_axis: usize,
    pub time_points: usize,
    pub value_points: usize,
    pub levels: usize,
    /// Relative growth between the last two levels that triggers a warning.
    pub growth_tolerance: f64,
    /// Cap on the cells of one level; the base count is reduced to fit.
    pub max_cells: usize,
    pub sampling: SupSampling,
}

impl Default for HypothesisBudget {
    fn default() -> Self {
        HypothesisBudget {
            cells_per_axis: 64,
            time_points: 8,
            value_points: 17,
            levels: 3,
            growth_tolerance: 1e-2,
            max_cells: 1 << 16,
            sampling: SupSampling { points_per_axis: 17, ..SupSampling::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Pass,
    Warn,
    AssumedNotChecked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisItem {
    pub hypothesis: &'static str,
    pub quantity: &'static str,
    /// Value at each box level.
    pub levels: Vec<f64>,
    pub status: HypothesisStatus,
    pub note: String,
}

impl HypothesisItem {
    pub fn value(&self) -> Option<f64> {
        self.levels.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub model: String,
    pub items: Vec<HypothesisItem>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.status != HypothesisStatus::Warn)
    }

    pub fn item(&self, quantity: &str) -> Option<&HypothesisItem> {
        self.items.iter().find(|i| i.quantity == quantity)
    }
}

fn scaled_slab(slab: &DomainSlab, factor: f64) -> DomainSlab {
    DomainSlab {
        space: slab
            .space
            .iter()
            .map(|&(a, b)| {
                let (c, r) = (0.5 * (a + b), 0.5 * (b - a) * factor);
                (c - r, c + r)
            })
            .collect(),
        ..slab.clone()
    }
}

/// `∫∫ sup_{|u| ≤ U} g(t, x, u) dx dt` by the midpoint rule on `cells` per axis.
fn slab_integral<G>(slab: &DomainSlab, cells: usize, budget: &HypothesisBudget, g: G) -> f64
where
    G: Fn(f64, &[f64], f64) -> f64 + Sync,
{
    let n = slab.dimension();
    let nt = budget.time_points.max(1);
    let dt = (slab.time.1 - slab.time.0) / nt as f64;
    let widths: Vec<f64> = slab.space.iter().map(|(a, b)| (b - a) / cells as f64).collect();
    let volume: f64 = widths.iter().product();
    let total = cells.pow(n as u32);
    let per_cell: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut x = vec![0.0; n];
            let mut flat = k;
            for d in (0..n).rev() {
                x[d] = slab.space[d].0 + (flat % cells) as f64 * widths[d] + 0.5 * widths[d];
                flat /= cells;
            }
            kahan_sum((0..nt).map(|i| {
                let t = slab.time.0 + (i as f64 + 0.5) * dt;
                value_axis_sup(|u| g(t, &x, u), slab.value_bound, budget.value_points, 1)
            }))
        })
        .collect();
    let time_span = if dt > 0.0 { dt } else { 1.0 };
    kahan_sum(per_cell) * volume * time_span
}

/// Diagnostics for (H1*)–(H3*) of `model` on `slab` (for (H3*), pass the
/// difference model `(f − g, F − G)`).
pub fn check_hypotheses(model: &BalanceLawModel, slab: &DomainSlab, budget: &HypothesisBudget) -> HypothesisReport {
    let mut items = Vec::new();
    let n = slab.dimension();
    let mut base = budget.cells_per_axis.max(2);
    let last = 1usize << budget.levels.saturating_sub(1);
    while base > 2 && (base * last).pow(n as u32) > budget.max_cells {
        base -= 1;
    }

    let growth = |levels: &[f64]| -> HypothesisStatus {
        match levels {
            [.., prev, last] if *last > prev * (1.0 + budget.growth_tolerance) + 1e-12 => HypothesisStatus::Warn,
            _ => HypothesisStatus::Pass,
        }
    };

    let sups: [(&'static str, &'static str, Component, Derivative); 3] = [
        ("H1*", "sup |∂_u f|", Component::FluxDu, Derivative::FluxDu),
        ("H2*", "sup ‖∇∂_u f‖", Component::FluxDuGrad, Derivative::FluxDuGrad),
        ("H2*", "sup |∂_u F|", Component::SourceDu, Derivative::SourceDu),
    ];
    let integrals: [(&'static str, &'static str, Component, Derivative); 2] = [
        ("H2*", "∫∫ sup_u ‖∇(F − div f)‖", Component::ResidualGrad, Derivative::ResidualGrad),
        ("H3*", "∫∫ sup_u |F − div f|", Component::Residual, Derivative::FluxDiv),
    ];

    if slab.is_empty() {
        for (h, q, _, _) in sups.iter().chain(&integrals) {
            items.push(HypothesisItem {
                hypothesis: h,
                quantity: q,
                levels: vec![0.0],
                status: HypothesisStatus::Pass,
                note: "empty slab".into(),
            });
        }
    } else {
        for (h, q, component, derivative) in sups {
            items.push(probe(model, h, q, derivative, budget, |level| {
                let s = scaled_slab(slab, (1usize << level) as f64);
                sup_norm(model, component, &s, &budget.sampling).map(|v| v.value).map_err(|e| e.to_string())
            }, &growth));
        }
        for (h, q, component, derivative) in integrals {
            items.push(probe(model, h, q, derivative, budget, |level| {
                let s = scaled_slab(slab, (1usize << level) as f64);
                let v = slab_integral(&s, base << level, budget, |t, x, u| component.evaluate(model, t, x, u));
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err("non-finite integrand".into())
                }
            }, &growth));
        }
    }
    items.push(HypothesisItem {
        hypothesis: "H1*",
        quantity: "∇²f continuous",
        levels: Vec::new(),
        status: HypothesisStatus::AssumedNotChecked,
        note: "assumed, not checked".into(),
    });
    HypothesisReport { model: model.name().to_string(), items }
}

fn probe(
    model: &BalanceLawModel,
    hypothesis: &'static str,
    quantity: &'static str,
    derivative: Derivative,
    budget: &HypothesisBudget,
    eval: impl Fn(usize) -> std::result::Result<f64, String>,
    growth: &impl Fn(&[f64]) -> HypothesisStatus,
) -> HypothesisItem {
    if let Err(e) = model.require(&[derivative], hypothesis) {
        return HypothesisItem {
            hypothesis,
            quantity,
            levels: Vec::new(),
            status: HypothesisStatus::Warn,
            note: e.to_string(),
        };
    }
    let mut levels = Vec::new();
    for level in 0..budget.levels.max(1) {
        match eval(level) {
            Ok(v) => levels.push(v),
            Err(e) => {
                return HypothesisItem {
                    hypothesis,
                    quantity,
                    levels,
                    status: HypothesisStatus::Warn,
                    note: e,
                }
            }
        }
    }
    let status = growth(&levels);
    let note = if status == HypothesisStatus::Warn {
        "grows with the probing box".to_string()
    } else {
        "sampled".to_string()
    };
    HypothesisItem { hypothesis, quantity, levels, status, note }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FluxSpec, ModelSpec, SourceSpec};

    fn slab() -> DomainSlab {
        DomainSlab::new((0.0, 1.0), vec![(-4.0, 4.0)], 1.0).unwrap()
    }

    #[test]
    fn burgers_passes_with_zero_integrals() {
        let m = ModelSpec::new(1, FluxSpec::Burgers { scale: 1.0, direction: None }, SourceSpec::None)
            .build()
            .unwrap();
        let r = check_hypotheses(&m, &slab(), &HypothesisBudget::default());
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.item("∫∫ sup_u ‖∇(F − div f)‖").unwrap().value(), Some(0.0));
        assert_eq!(r.item("∇²f continuous").unwrap().status, HypothesisStatus::AssumedNotChecked);
    }

    #[test]
    fn gaussian_source_integral_is_two() {
        let m = ModelSpec::new(1, FluxSpec::Zero, SourceSpec::Gaussian { amplitude: 1.0, width: 1.0 })
            .build()
            .unwrap();
        let budget = HypothesisBudget { cells_per_axis: 512, ..Default::default() };
        let r = check_hypotheses(&m, &slab(), &budget);
        let item = r.item("∫∫ sup_u ‖∇(F − div f)‖").unwrap();
        assert_eq!(item.status, HypothesisStatus::Pass);
        assert!((item.value().unwrap() - 2.0).abs() < 1e-3, "{item:?}");
    }

    #[test]
    fn affine_source_warns() {
        let m = ModelSpec::new(1, FluxSpec::Zero, SourceSpec::Affine { slope: 1.0 }).build().unwrap();
        let r = check_hypotheses(&m, &slab(), &HypothesisBudget::default());
        assert_eq!(r.item("∫∫ sup_u ‖∇(F − div f)‖").unwrap().status, HypothesisStatus::Warn);
        assert!(!r.all_pass());
    }
}
