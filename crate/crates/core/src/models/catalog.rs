//! Built-in models selectable from scenario files.

use serde::{Deserialize, Serialize};

use super::BalanceLawModel;
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Flux families. All of them are linear or quadratic in `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum FluxSpec {
    Zero,
    /// `f_d = scale·direction_d·u²/2`; direction defaults to all ones.
    Burgers {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    /// `f = a·u` with a constant vector `a`.
    LinearAdvection { velocity: Vec<f64> },
    /// `f_d = (base_d + amplitude_d·sin(k·x_{axis_d}))·u`.
    VariableAdvection {
        base: Vec<f64>,
        amplitude: Vec<f64>,
        axis: Vec<usize>,
        #[serde(default = "one")]
        wavenumber: f64,
    },
}

/// Source families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum SourceSpec {
    #[default]
    None,
    /// `F = rate·u`
    Linear { rate: f64 },
    /// `F = amplitude·exp(−|x|²/width²)`
    Gaussian { amplitude: f64, width: f64 },
    /// `F = amplitude·u·exp(−|x|²/width²)`
    GaussianLinear { amplitude: f64, width: f64 },
    /// `F = slope·x₀`; unbounded, for diagnostics only.
    Affine { slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dimension: usize,
    pub flux: FluxSpec,
    #[serde(default)]
    pub source: SourceSpec,
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::invalid(format!("`{name}` has {} entries, dimension is {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("`{name}` has non-finite entries")));
    }
    Ok(())
}

/// Closed-form pieces: f_d, ∂_u f_d, ∂_{x_j}∂_u f_i, div f, ∂_j div f.
struct FluxParts {
    f: Box<dyn Fn(usize, &[f64], f64) -> f64 + Send + Sync>,
    du: Box<dyn Fn(usize, &[f64], f64) -> f64 + Send + Sync>,
    du_grad: Box<dyn Fn(usize, usize, &[f64], f64) -> f64 + Send + Sync>,
    div: Box<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    div_grad: Box<dyn Fn(usize, &[f64], f64) -> f64 + Send + Sync>,
}

/// F, ∂_u F, ∂_{x_j} F.
struct SourceParts {
    f: Box<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    du: Box<dyn Fn(&[f64], f64) -> f64 + Send + Sync>,
    grad: Box<dyn Fn(usize, &[f64], f64) -> f64 + Send + Sync>,
}

impl FluxSpec {
    fn parts(&self, n: usize) -> Result<FluxParts> {
        Ok(match self.clone() {
            FluxSpec::Zero => FluxParts {
                f: Box::new(|_, _, _| 0.0),
                du: Box::new(|_, _, _| 0.0),
                du_grad: Box::new(|_, _, _, _| 0.0),
                div: Box::new(|_, _| 0.0),
                div_grad: Box::new(|_, _, _| 0.0),
            },
            FluxSpec::Burgers { scale, direction } => {
                let dir = direction.unwrap_or_else(|| vec![1.0; n]);
                check_len("direction", &dir, n)?;
                let a: Vec<f64> = dir.iter().map(|d| scale * d).collect();
                let b = a.clone();
                FluxParts {
                    f: Box::new(move |d, _, u| 0.5 * a[d] * u * u),
                    du: Box::new(move |d, _, u| b[d] * u),
                    du_grad: Box::new(|_, _, _, _| 0.0),
                    div: Box::new(|_, _| 0.0),
                    div_grad: Box::new(|_, _, _| 0.0),
                }
            }
            FluxSpec::LinearAdvection { velocity } => {
                check_len("velocity", &velocity, n)?;
                let a = velocity.clone();
                FluxParts {
                    f: Box::new(move |d, _, u| a[d] * u),
                    du: Box::new(move |d, _, _| velocity[d]),
                    du_grad: Box::new(|_, _, _, _| 0.0),
                    div: Box::new(|_, _| 0.0),
                    div_grad: Box::new(|_, _, _| 0.0),
                }
            }
            FluxSpec::VariableAdvection { base, amplitude, axis, wavenumber: k } => {
                check_len("base", &base, n)?;
                check_len("amplitude", &amplitude, n)?;
                if axis.len() != n || axis.iter().any(|&a| a >= n) {
                    return Err(Error::invalid("`axis` must list one valid axis per flux component"));
                }
                let (amp_a, ax_a) = (amplitude.clone(), axis.clone());
                let (amp_b, ax_b) = (amplitude.clone(), axis.clone());
                let (amp_c, ax_c) = (amplitude.clone(), axis.clone());
                let coef = move |d: usize, x: &[f64]| base[d] + amplitude[d] * (k * x[axis[d]]).sin();
                let coef_f = coef.clone();
                FluxParts {
                    f: Box::new(move |d, x, u| coef_f(d, x) * u),
                    du: Box::new(move |d, x, _| coef(d, x)),
                    du_grad: Box::new(move |i, j, x, _| {
                        if ax_a[i] == j {
                            amp_a[i] * k * (k * x[j]).cos()
                        } else {
                            0.0
                        }
                    }),
                    div: Box::new(move |x, u| {
                        (0..ax_b.len())
                            .filter(|&d| ax_b[d] == d)
                            .map(|d| amp_b[d] * k * (k * x[d]).cos() * u)
                            .sum()
                    }),
                    div_grad: Box::new(move |j, x, u| {
                        if ax_c[j] == j {
                            -amp_c[j] * k * k * (k * x[j]).sin() * u
                        } else {
                            0.0
                        }
                    }),
                }
            }
        })
    }
}

fn gaussian(x: &[f64], width: f64) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp()
}

impl SourceSpec {
    fn parts(&self) -> Result<SourceParts> {
        Ok(match *self {
            SourceSpec::None => SourceParts {
                f: Box::new(|_, _| 0.0),
                du: Box::new(|_, _| 0.0),
                grad: Box::new(|_, _, _| 0.0),
            },
            SourceSpec::Linear { rate } => SourceParts {
                f: Box::new(move |_, u| rate * u),
                du: Box::new(move |_, _| rate),
                grad: Box::new(|_, _, _| 0.0),
            },
            SourceSpec::Gaussian { amplitude: a, width: w } => {
                if !(w > 0.0) {
                    return Err(Error::invalid("gaussian width must be positive"));
                }
                SourceParts {
                    f: Box::new(move |x, _| a * gaussian(x, w)),
                    du: Box::new(|_, _| 0.0),
                    grad: Box::new(move |j, x, _| -2.0 * x[j] / (w * w) * a * gaussian(x, w)),
                }
            }
            SourceSpec::GaussianLinear { amplitude: a, width: w } => {
                if !(w > 0.0) {
                    return Err(Error::invalid("gaussian width must be positive"));
                }
                SourceParts {
                    f: Box::new(move |x, u| a * u * gaussian(x, w)),
                    du: Box::new(move |x, _| a * gaussian(x, w)),
                    grad: Box::new(move |j, x, u| -2.0 * x[j] / (w * w) * a * u * gaussian(x, w)),
                }
            }
            SourceSpec::Affine { slope } => SourceParts {
                f: Box::new(move |x, _| slope * x[0]),
                du: Box::new(|_, _| 0.0),
                grad: Box::new(move |j, _, _| if j == 0 { slope } else { 0.0 }),
            },
        })
    }

    fn label(&self) -> String {
        match self {
            SourceSpec::None => "0".into(),
            SourceSpec::Linear { rate } => format!("{rate}·u"),
            SourceSpec::Gaussian { amplitude, width } => format!("{amplitude}·exp(-|x|²/{width}²)"),
            SourceSpec::GaussianLinear { amplitude, width } => {
                format!("{amplitude}·u·exp(-|x|²/{width}²)")
            }
            SourceSpec::Affine { slope } => format!("{slope}·x0"),
        }
    }
}

impl FluxSpec {
    fn label(&self) -> String {
        match self {
            FluxSpec::Zero => "0".into(),
            FluxSpec::Burgers { scale, .. } => format!("{scale}·u²/2"),
            FluxSpec::LinearAdvection { velocity } => format!("{velocity:?}·u"),
            FluxSpec::VariableAdvection { .. } => "a(x)·u".into(),
        }
    }
}

impl ModelSpec {
    pub fn new(dimension: usize, flux: FluxSpec, source: SourceSpec) -> Self {
        ModelSpec { dimension, flux, source }
    }

    /// Builds the model with every derivative in closed form.
    pub fn build(&self) -> Result<BalanceLawModel> {
        let n = self.dimension;
        if n == 0 {
            return Err(Error::invalid("model dimension must be positive"));
        }
        let name = format!("f = {}, F = {}", self.flux.label(), self.source.label());
        let FluxParts { f, du, du_grad, div, div_grad } = self.flux.parts(n)?;
        let SourceParts { f: src, du: src_du, grad: src_grad } = self.source.parts()?;
        let div = std::sync::Arc::new(div);
        let div_in_model = div.clone();
        BalanceLawModel::builder(name, n, move |d, _, x, u| f(d, x, u), move |_, x, u| src(x, u))
            .flux_du(move |d, _, x, u| du(d, x, u))
            .flux_du_grad(move |i, j, _, x, u| du_grad(i, j, x, u))
            .source_du(move |_, x, u| src_du(x, u))
            .flux_div(move |_, x, u| div_in_model(x, u))
            .residual_grad(move |j, _, x, u| src_grad(j, x, u) - div_grad(j, x, u))
            .build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_models_are_self_consistent() {
        let specs = [
            ModelSpec::new(1, FluxSpec::Burgers { scale: 1.3, direction: None }, SourceSpec::Linear { rate: -0.5 }),
            ModelSpec::new(
                2,
                FluxSpec::VariableAdvection {
                    base: vec![1.0, 0.5],
                    amplitude: vec![0.7, 0.3],
                    axis: vec![1, 1],
                    wavenumber: 2.0,
                },
                SourceSpec::GaussianLinear { amplitude: 0.4, width: 0.8 },
            ),
            ModelSpec::new(
                2,
                FluxSpec::VariableAdvection {
                    base: vec![0.0, 0.2],
                    amplitude: vec![1.0, 0.5],
                    axis: vec![0, 1],
                    wavenumber: 1.5,
                },
                SourceSpec::Gaussian { amplitude: 1.0, width: 1.0 },
            ),
            ModelSpec::new(1, FluxSpec::LinearAdvection { velocity: vec![2.0] }, SourceSpec::Affine { slope: 3.0 }),
        ];
        for spec in specs {
            let m = spec.build().unwrap();
            let n = m.dimension();
            let probes: Vec<_> = (0..7)
                .map(|k| {
                    let s = k as f64 * 0.37 - 1.1;
                    (0.1, (0..n).map(|d| s + 0.2 * d as f64).collect(), 0.9 - 0.3 * k as f64)
                })
                .collect();
            for e in m.check_consistency(&probes) {
                assert!(e.passed, "{}: {:?}", m.name(), e);
            }
        }
    }

    #[test]
    fn config_round_trip() {
        let json = r#"{"dimension":1,"flux":{"id":"burgers"},"source":{"id":"gaussian","amplitude":1,"width":1}}"#;
        let spec: ModelSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.flux, FluxSpec::Burgers { scale: 1.0, direction: None });
        let back: ModelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let spec = ModelSpec::new(2, FluxSpec::LinearAdvection { velocity: vec![1.0] }, SourceSpec::None);
        assert!(spec.build().is_err());
    }
}
