//! Dimensional constants and the radial mollifier family.
//!
//! `W_n = ∫_0^{π/2} cos^n θ dθ` links consecutive unit-ball volumes through
//! `ω_n = 2 W_n ω_{n-1}`. The mollifier `μ₁` is a radial bump supported in
//! `[0, 1)`, flat near the origin, nonincreasing, and normalized so that
//! `∫_0^∞ r^{N-1} μ₁(r) dr = 1 / (N ω_N)`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_pieces, QuadratureOptions};

/// Default number of radial tabulation intervals.
pub const DEFAULT_TABULATION: usize = 4096;
/// Default plateau radius of the mollifier family.
pub const DEFAULT_PLATEAU: f64 = 0.5;
/// Pass/fail threshold for [`verify_mollifier_identities`].
pub const IDENTITY_TOLERANCE: f64 = 1e-6;

/// Wallis integral by the two-step recurrence `W_n = (n-1)/n · W_{n-2}`.
pub fn wallis_integral(n: usize) -> f64 {
    let mut w = if n % 2 == 0 {
        std::f64::consts::FRAC_PI_2
    } else {
        1.0
    };
    let mut k = 2 + n % 2;
    while k <= n {
        w *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    w
}

/// Volume of the unit ball in `ℝ^n`, with `ω_0 = 1`.
pub fn unit_ball_volume(n: usize) -> f64 {
    (1..=n).fold(1.0, |omega, k| 2.0 * wallis_integral(k) * omega)
}

/// Surface measure of the unit sphere `S^{n-1} ⊂ ℝ^n`, i.e. `n ω_n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// `exp(-1/x)` for `x > 0`, zero otherwise.
#[inline]
fn psi(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// C^∞ step from 1 at `t ≤ 0` to 0 at `t ≥ 1`.
#[inline]
fn smooth_step_down(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = psi(1.0 - t);
        a / (a + psi(t))
    }
}

#[inline]
fn smooth_step_down_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = psi(1.0 - t);
    let b = psi(t);
    let den = a + b;
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    -(a * b) * (1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t)) / (den * den)
}

/// Radial mollifier `μ₁` for a fixed dimension.
///
/// The closed form is `A · s((r - a)/(1 - a))` with `a` the plateau radius and
/// `s` an exponential smoothstep; `A` is fixed by quadrature. A dense
/// tabulation of `μ₁` and `μ₁′` backs [`MollifierProfile::interpolate`].
#[derive(Debug)]
pub struct MollifierProfile {
    plateau_radius: f64,
    dimension: usize,
    normalization: f64,
    samples: Vec<f64>,
    derivative_samples: Vec<f64>,
    constants: OnceLock<MollifierConstants>,
}

impl Clone for MollifierProfile {
    fn clone(&self) -> Self {
        let constants = OnceLock::new();
        if let Some(c) = self.constants.get() {
            let _ = constants.set(*c);
        }
        Self {
            plateau_radius: self.plateau_radius,
            dimension: self.dimension,
            normalization: self.normalization,
            samples: self.samples.clone(),
            derivative_samples: self.derivative_samples.clone(),
            constants,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MollifierConstants {
    /// `∫_{ℝ^N} |x₁| μ₁(‖x‖) dx`
    pub c1: f64,
    /// `∫_{ℝ^N} ‖x‖ μ₁(‖x‖) dx`
    pub m1: f64,
    pub dimension: usize,
}

impl MollifierConstants {
    pub fn ratio(&self) -> f64 {
        self.m1 / self.c1
    }
}

fn radial_opts() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// Builds the default-density profile. See [`build_mollifier_with`].
pub fn build_mollifier(plateau_radius: f64, dimension: usize) -> Result<MollifierProfile> {
    build_mollifier_with(plateau_radius, dimension, DEFAULT_TABULATION)
}

/// Builds a profile flat on `[0, plateau_radius]`, decreasing smoothly to
/// zero at `r = 1`, with `tabulation` radial intervals.
pub fn build_mollifier_with(
    plateau_radius: f64,
    dimension: usize,
    tabulation: usize,
) -> Result<MollifierProfile> {
    if !(plateau_radius > 0.0 && plateau_radius < 1.0) {
        return Err(Error::invalid(format!(
            "plateau radius must lie in (0, 1), got {plateau_radius}"
        )));
    }
    if dimension == 0 {
        return Err(Error::invalid("mollifier dimension must be positive"));
    }
    if tabulation < 8 {
        return Err(Error::invalid("tabulation needs at least 8 intervals"));
    }
    let a = plateau_radius;
    let n = dimension as i32;
    let shape = |r: f64| smooth_step_down((r - a) / (1.0 - a));
    let moment = integrate_pieces(|r| r.powi(n - 1) * shape(r), &[0.0, a, 1.0], radial_opts())?;
    let normalization = 1.0 / (unit_sphere_area(dimension) * moment);

    let mut profile = MollifierProfile {
        plateau_radius,
        dimension,
        normalization,
        samples: Vec::new(),
        derivative_samples: Vec::new(),
        constants: OnceLock::new(),
    };
    let step = 1.0 / tabulation as f64;
    profile.samples = (0..=tabulation).map(|k| profile.value(k as f64 * step)).collect();
    profile.derivative_samples = (0..=tabulation)
        .map(|k| profile.derivative(k as f64 * step))
        .collect();
    Ok(profile)
}

impl MollifierProfile {
    pub fn plateau_radius(&self) -> f64 {
        self.plateau_radius
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn derivative_samples(&self) -> &[f64] {
        &self.derivative_samples
    }

    /// Abscissa of tabulation sample `k`.
    pub fn sample_radius(&self, k: usize) -> f64 {
        k as f64 / (self.samples.len() - 1) as f64
    }

    /// Closed-form `μ₁(r)`.
    pub fn value(&self, r: f64) -> f64 {
        let a = self.plateau_radius;
        self.normalization * smooth_step_down((r.abs() - a) / (1.0 - a))
    }

    /// Closed-form `μ₁′(r)` for `r ≥ 0`.
    pub fn derivative(&self, r: f64) -> f64 {
        let a = self.plateau_radius;
        self.normalization * smooth_step_down_derivative((r - a) / (1.0 - a)) / (1.0 - a)
    }

    /// Cubic Hermite interpolation of the tabulation.
    pub fn interpolate(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= 1.0 {
            return 0.0;
        }
        let intervals = self.samples.len() - 1;
        let h = 1.0 / intervals as f64;
        let pos = r * intervals as f64;
        let k = (pos.floor() as usize).min(intervals - 1);
        let s = pos - k as f64;
        let (y0, y1) = (self.samples[k], self.samples[k + 1]);
        let (d0, d1) = (self.derivative_samples[k], self.derivative_samples[k + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1
    }

    /// `μ_λ(x) = λ^{-N} μ₁(‖x‖/λ)` as a function of `‖x‖`.
    pub fn scaled(&self, lambda: f64, norm: f64) -> f64 {
        self.value(norm / lambda) / lambda.powi(self.dimension as i32)
    }

    /// `∫_0^λ g(r) dr`, split at the scaled plateau edge.
    fn radial_integral<G: Fn(f64) -> f64>(&self, g: G, lambda: f64) -> Result<f64> {
        integrate_pieces(
            g,
            &[0.0, self.plateau_radius * lambda, lambda],
            radial_opts(),
        )
    }

    /// Residual of `∫_0^1 r^{N-1} μ₁(r) dr − 1/(N ω_N)`.
    pub fn normalization_residual(&self) -> Result<f64> {
        let n = self.dimension as i32;
        let moment = self.radial_integral(|r| r.powi(n - 1) * self.value(r), 1.0)?;
        Ok(moment - 1.0 / unit_sphere_area(self.dimension))
    }

    /// Checks the sampled invariants: support in `[0, 1)`, nonincreasing,
    /// flat on the plateau, and normalized.
    pub fn check_invariants(&self) -> Result<()> {
        let last = *self.samples.last().expect("tabulation is non-empty");
        if last.abs() > 1e-12 * self.normalization {
            return Err(Error::invalid(format!("mollifier does not vanish at r = 1: {last:e}")));
        }
        if let Some(k) = self.derivative_samples.iter().position(|d| *d > 0.0) {
            return Err(Error::invalid(format!(
                "mollifier increases at r = {}",
                self.sample_radius(k)
            )));
        }
        let top = self.samples[0];
        for (k, v) in self.samples.iter().enumerate() {
            if self.sample_radius(k) > self.plateau_radius {
                break;
            }
            if *v != top {
                return Err(Error::invalid("mollifier is not constant on its plateau"));
            }
        }
        let residual = self.normalization_residual()?;
        if residual.abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "radial normalization residual {residual:e} exceeds 1e-10"
            )));
        }
        Ok(())
    }

    /// Cached [`mollifier_constants`].
    pub fn constants(&self) -> Result<MollifierConstants> {
        if let Some(c) = self.constants.get() {
            return Ok(*c);
        }
        let c = compute_constants(self)?;
        Ok(*self.constants.get_or_init(|| c))
    }
}

/// `∫_{S^{N-1}} |θ₁| dσ(θ)`, by polar reduction to a one-dimensional quadrature
/// of `|cos φ| sin^{N-2} φ` over `[0, π]`.
pub fn sphere_abs_first_coordinate(n: usize) -> Result<f64> {
    match n {
        0 => Err(Error::invalid("dimension must be positive")),
        1 => Ok(2.0),
        _ => {
            let p = (n - 2) as i32;
            let half = integrate(
                |phi: f64| phi.cos() * phi.sin().powi(p),
                0.0,
                std::f64::consts::FRAC_PI_2,
                radial_opts(),
            )?;
            Ok(unit_sphere_area(n - 1) * 2.0 * half.value)
        }
    }
}

fn compute_constants(profile: &MollifierProfile) -> Result<MollifierConstants> {
    let n = profile.dimension;
    let radial = profile.radial_integral(|r| r.powi(n as i32) * profile.value(r), 1.0)?;
    let m1 = unit_sphere_area(n) * radial;
    let c1 = sphere_abs_first_coordinate(n)? * radial;
    if !(c1 > 0.0 && m1 > 0.0) {
        return Err(Error::invalid("mollifier constants must be positive"));
    }
    Ok(MollifierConstants {
        c1,
        m1,
        dimension: n,
    })
}

/// `C₁` and `M₁` of the profile, by radial quadrature times angular factors.
pub fn mollifier_constants(profile: &MollifierProfile) -> Result<MollifierConstants> {
    profile.constants()
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub dimension: usize,
    pub plateau_radius: f64,
    pub tolerance: f64,
    pub identities: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.identities.iter().all(|i| i.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.identities
            .iter()
            .map(|i| i.residual.abs())
            .fold(0.0, f64::max)
    }
}

/// Scales at which the λ-dependent identities are probed.
pub const IDENTITY_SCALES: [f64; 3] = [0.1, 1.0, 10.0];

fn residual(name: &'static str, lhs: f64, rhs: f64) -> IdentityResidual {
    let residual = lhs - rhs;
    IdentityResidual {
        name,
        lhs,
        rhs,
        residual,
        passed: residual.abs() < IDENTITY_TOLERANCE,
    }
}

/// `∫_{ℝ^N} μ_λ(x) dx` by radial quadrature of the scaled profile.
pub fn scaled_mass(profile: &MollifierProfile, lambda: f64) -> Result<f64> {
    let n = profile.dimension as i32;
    let radial = profile.radial_integral(|r| r.powi(n - 1) * profile.scaled(lambda, r), lambda)?;
    Ok(unit_sphere_area(profile.dimension) * radial)
}

/// `∫_{ℝ^N} ‖x‖ ‖∇μ_λ(x)‖ dx`, using `‖∇μ_λ(x)‖ = -λ^{-N-1} μ₁′(‖x‖/λ)`.
pub fn scaled_gradient_moment(profile: &MollifierProfile, lambda: f64) -> Result<f64> {
    let n = profile.dimension as i32;
    let scale = lambda.powi(n + 1);
    let radial = profile.radial_integral(
        |r| r * r.powi(n - 1) * (-profile.derivative(r / lambda) / scale),
        lambda,
    )?;
    Ok(unit_sphere_area(profile.dimension) * radial)
}

/// Residuals of the four mollifier identities (unit mass, the `C₁`–`M₁`
/// relation, the first gradient moment, and the second derivative moment).
/// The λ-dependent ones are probed at every scale in [`IDENTITY_SCALES`] and
/// the worst residual is reported.
pub fn verify_mollifier_identities(profile: &MollifierProfile) -> Result<IdentityReport> {
    let n = profile.dimension;
    let nf = n as f64;
    let area = unit_sphere_area(n);
    let consts = profile.constants()?;
    let mut identities = Vec::with_capacity(4);

    let mut worst_mass = 1.0;
    for &lambda in &IDENTITY_SCALES {
        let mass = scaled_mass(profile, lambda)?;
        if (mass - 1.0).abs() >= (worst_mass - 1.0f64).abs() {
            worst_mass = mass;
        }
    }
    identities.push(residual("unit_mass", worst_mass, 1.0));

    let relation = 2.0 / nf * unit_ball_volume(n - 1) / unit_ball_volume(n) * consts.m1;
    identities.push(residual("c1_m1_relation", consts.c1, relation));

    let mut worst_grad = nf;
    for &lambda in &IDENTITY_SCALES {
        let g = scaled_gradient_moment(profile, lambda)?;
        if (g - nf).abs() >= (worst_grad - nf).abs() {
            worst_grad = g;
        }
    }
    identities.push(residual("gradient_moment", worst_grad, nf));

    let second = area
        * profile.radial_integral(|r| r * r * r.powi(n as i32 - 1) * profile.derivative(r), 1.0)?;
    identities.push(residual("derivative_moment_ratio", second / consts.m1, -(nf + 1.0)));

    Ok(IdentityReport {
        dimension: n,
        plateau_radius: profile.plateau_radius,
        tolerance: IDENTITY_TOLERANCE,
        identities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wallis_seeds() {
        assert_eq!(wallis_integral(0), PI / 2.0);
        assert_eq!(wallis_integral(1), 1.0);
        assert!((wallis_integral(2) - PI / 4.0).abs() < 1e-15);
        assert!((wallis_integral(3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_plateau() {
        for a in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(build_mollifier(a, 1).is_err(), "{a}");
        }
        assert!(build_mollifier(0.5, 0).is_err());
    }

    #[test]
    fn profile_vanishes_at_unit_radius() {
        let p = build_mollifier(0.5, 2).unwrap();
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.interpolate(1.0), 0.0);
        assert_eq!(*p.samples().last().unwrap(), 0.0);
    }

    #[test]
    fn invariants_hold_for_several_shapes() {
        for n in 1..=3 {
            for a in [0.25, 0.5, 0.75] {
                build_mollifier(a, n).unwrap().check_invariants().unwrap();
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = build_mollifier(0.3, 2).unwrap();
        for r in [0.35, 0.5, 0.7, 0.9] {
            let eta = 1e-6;
            let fd = (p.value(r + eta) - p.value(r - eta)) / (2.0 * eta);
            assert!((fd - p.derivative(r)).abs() < 1e-6 * p.normalization(), "r = {r}");
        }
    }

    #[test]
    fn interpolation_tracks_closed_form() {
        let p = build_mollifier(0.5, 1).unwrap();
        let worst = (0..1000)
            .map(|k| {
                let r = k as f64 / 1000.0 + 1.3e-4;
                (p.interpolate(r) - p.value(r)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst:e}");
    }

    #[test]
    fn one_dimensional_constants_coincide() {
        let c = mollifier_constants(&build_mollifier(0.4, 1).unwrap()).unwrap();
        assert!((c.c1 - c.m1).abs() < 1e-15);
    }

    #[test]
    fn constants_are_cached() {
        let p = build_mollifier(0.5, 2).unwrap();
        let a = p.constants().unwrap();
        let q = p.clone();
        assert_eq!(q.constants().unwrap(), a);
    }
}
