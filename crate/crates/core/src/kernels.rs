//! Dispersal kernels, the birth-smoothing heat kernel, and their transforms.
//!
//! A [`Kernel`] is a one-dimensional even density `J_1` discretised by a
//! symmetric composite Gauss-Legendre rule over a truncated window. Every
//! moment and transform is then a finite weighted sum over the same nodes.
//! Multi-dimensional kernels are products of these factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::linear_regression;
use crate::quadrature::gauss_legendre;

const PANEL_ORDER: usize = 10;
/// Largest exponent accepted inside `exp` before a moment is declared divergent.
const EXP_GUARD: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    Gaussian { sigma: f64 },
    CompactBump { radius: f64 },
    CauchyTruncated { scale: f64, cutoff: f64 },
}

impl KernelFamily {
    /// Length scale of the family (sigma, radius or scale).
    pub fn length_scale(&self) -> f64 {
        match *self {
            KernelFamily::Gaussian { sigma } => sigma,
            KernelFamily::CompactBump { radius } => radius,
            KernelFamily::CauchyTruncated { scale, .. } => scale,
        }
    }

    // Unnormalised density; the Gaussian is already a probability density.
    fn raw(&self, x: f64) -> f64 {
        match *self {
            KernelFamily::Gaussian { sigma } => {
                (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
            }
            KernelFamily::CompactBump { radius } => {
                let r = x / radius;
                if r.abs() < 1.0 {
                    (-1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
            KernelFamily::CauchyTruncated { scale, cutoff } => {
                if x.abs() <= cutoff {
                    1.0 / (1.0 + (x / scale).powi(2))
                } else {
                    0.0
                }
            }
        }
    }

    fn support_half_width(&self) -> f64 {
        match *self {
            KernelFamily::Gaussian { .. } => f64::INFINITY,
            KernelFamily::CompactBump { radius } => radius,
            KernelFamily::CauchyTruncated { cutoff, .. } => cutoff,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidKernel(format!("{what} must be finite and positive, got {v}")))
        };
        match *self {
            KernelFamily::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => bad("sigma", sigma),
            KernelFamily::CompactBump { radius } if !(radius > 0.0 && radius.is_finite()) => {
                bad("radius", radius)
            }
            KernelFamily::CauchyTruncated { scale, cutoff } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    bad("scale", scale)
                } else if !(cutoff > 0.0 && cutoff.is_finite()) {
                    bad("cutoff", cutoff)
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub quadrature: QuadratureSpec,
}

impl KernelSpec {
    /// Gaussian with a window of ten standard deviations.
    pub fn gaussian(sigma: f64) -> Self {
        KernelSpec {
            family: KernelFamily::Gaussian { sigma },
            quadrature: QuadratureSpec { half_width: 10.0 * sigma, points: 400 },
        }
    }

    pub fn compact_bump(radius: f64) -> Self {
        KernelSpec {
            family: KernelFamily::CompactBump { radius },
            quadrature: QuadratureSpec { half_width: radius, points: 200 },
        }
    }

    pub fn cauchy_truncated(scale: f64, cutoff: f64) -> Self {
        KernelSpec {
            family: KernelFamily::CauchyTruncated { scale, cutoff },
            quadrature: QuadratureSpec { half_width: cutoff, points: 20_000 },
        }
    }
}

/// A normalised even kernel with its quadrature representation.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub spec: KernelSpec,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Normalised density at `nodes`.
    pub values: Vec<f64>,
    /// `sum(weights * values)`; one up to rounding.
    pub mass: f64,
    /// Fraction of the family's mass inside the quadrature window.
    pub captured_mass: f64,
    /// True when the density was cut off and renormalised (truncated Cauchy).
    pub truncated: bool,
    window: f64,
    norm: f64,
}

/// Symbol-order constants of `1 - J^(xi) ~ kcal |xi|^alpha` near zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolOrder {
    pub alpha: f64,
    pub kcal: f64,
    pub k1: f64,
    pub delta: f64,
    pub a_tilde: f64,
    /// Constant returned by the log-log regression (kcal is raised to cover all samples).
    pub kcal_fit: f64,
    /// Max relative deviation of the power law on the fit window.
    pub fit_residual: f64,
}

/// Birth-term smoothing kernel `f_beta`; `beta = 0` is the Dirac limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelParams {
    pub beta: f64,
}

impl HeatKernelParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(HeatKernelParams { beta })
    }

    pub fn dirac() -> Self {
        HeatKernelParams { beta: 0.0 }
    }

    /// One-dimensional factor `f_{1 beta}(y)`; zero everywhere for the Dirac limit.
    pub fn density(&self, y: f64) -> f64 {
        if self.beta == 0.0 {
            return 0.0;
        }
        (-y * y / (4.0 * self.beta)).exp() / (4.0 * PI * self.beta).sqrt()
    }
}

/// Build a normalised kernel from its spec.
pub fn make_kernel(spec: KernelSpec) -> Result<Kernel> {
    spec.family.validate()?;
    let q = spec.quadrature;
    if !(q.half_width > 0.0 && q.half_width.is_finite()) {
        return Err(Error::InvalidKernel(format!("quadrature half_width must be positive, got {}", q.half_width)));
    }
    if q.points < 2 * PANEL_ORDER {
        return Err(Error::InvalidKernel(format!("need at least {} quadrature points", 2 * PANEL_ORDER)));
    }
    let family = spec.family;
    let window = q.half_width.min(family.support_half_width());
    let panels_half = (q.points / (2 * PANEL_ORDER)).max(1);
    let mapped = matches!(family, KernelFamily::CauchyTruncated { .. });
    let (nodes, weights) = symmetric_rule(window, panels_half, mapped.then(|| family.length_scale()));

    let raw: Vec<f64> = nodes.iter().map(|&x| family.raw(x)).collect();
    if raw.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidKernel("density is negative or non-finite on the window".into()));
    }
    let norm: f64 = weights.iter().zip(&raw).map(|(w, r)| w * r).sum();
    if !(norm > 0.0) {
        return Err(Error::InvalidKernel("kernel has no mass on the window".into()));
    }

    let total = match family {
        KernelFamily::Gaussian { .. } => 1.0,
        _ => {
            let support = family.support_half_width();
            if window >= support {
                norm
            } else {
                let (n2, w2) = symmetric_rule(support, panels_half * 4, mapped.then(|| family.length_scale()));
                n2.iter().zip(&w2).map(|(&x, w)| w * family.raw(x)).sum()
            }
        }
    };
    let captured_mass = (norm / total).min(1.0);
    if captured_mass < 1.0 - 1e-6 {
        return Err(Error::QuadratureTooNarrow { captured: captured_mass });
    }

    let values: Vec<f64> = raw.iter().map(|r| r / norm).collect();
    let mass = weights.iter().zip(&values).map(|(w, v)| w * v).sum();
    Ok(Kernel {
        spec,
        nodes,
        weights,
        values,
        mass,
        captured_mass,
        truncated: matches!(family, KernelFamily::CauchyTruncated { .. }),
        window,
        norm,
    })
}

// Rule on [-a, a] built on [0, a] and mirrored so the node set is exactly even.
// With `sinh_scale = Some(s)` the panels are uniform in u where x = s sinh(u).
fn symmetric_rule(a: f64, panels: usize, sinh_scale: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let mut pos = Vec::with_capacity(panels * PANEL_ORDER);
    let umax = match sinh_scale {
        Some(s) => (a / s).asinh(),
        None => a,
    };
    let h = umax / panels as f64;
    for p in 0..panels {
        let lo = p as f64 * h;
        for (xi, wi) in gx.iter().zip(&gw) {
            let u = lo + 0.5 * h * (xi + 1.0);
            let w = 0.5 * h * wi;
            match sinh_scale {
                Some(s) => pos.push((s * u.sinh(), w * s * u.cosh())),
                None => pos.push((u, w)),
            }
        }
    }
    let mut nodes = Vec::with_capacity(2 * pos.len());
    let mut weights = Vec::with_capacity(2 * pos.len());
    for &(x, w) in pos.iter().rev() {
        nodes.push(-x);
        weights.push(w);
    }
    for &(x, w) in &pos {
        nodes.push(x);
        weights.push(w);
    }
    (nodes, weights)
}

impl Kernel {
    /// Normalised density; zero outside the quadrature window.
    pub fn density(&self, x: f64) -> f64 {
        if x.abs() > self.window {
            0.0
        } else {
            self.spec.family.raw(x) / self.norm
        }
    }

    /// Half-width of the truncated window the kernel lives on.
    pub fn window(&self) -> f64 {
        self.window
    }

    fn check_exponent(&self, lambda: f64) -> Result<()> {
        if !lambda.is_finite() || lambda.abs() * self.window > EXP_GUARD {
            return Err(Error::MomentDiverged { lambda });
        }
        Ok(())
    }

    fn sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&y, w), v)| w * v * f(y))
            .sum()
    }

    /// `1 - J^(xi)` evaluated without cancellation.
    pub fn one_minus_symbol(&self, xi: f64) -> f64 {
        self.sum(|y| {
            let s = (0.5 * xi * y).sin();
            2.0 * s * s
        })
    }

    /// Weighted transform `int J(y) e^{-lambda y} e^{-i y eta} dy`.
    pub fn weighted_transform(&self, lambda: f64, eta: f64) -> Result<Complex64> {
        self.check_exponent(lambda)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((&y, w), v) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let a = w * v * (-lambda * y).exp();
            acc += Complex64::from_polar(a, -y * eta);
        }
        Ok(acc)
    }

    /// `int y^2 J(y) e^{-lambda y} dy`, the second lambda-derivative of the moment.
    pub fn exp_moment_second(&self, lambda: f64) -> Result<f64> {
        self.check_exponent(lambda)?;
        Ok(self.sum(|y| y * y * (-lambda * y).exp()))
    }
}

/// `J^(xi) = int J(y) cos(xi y) dy`.
pub fn fourier_symbol(k: &Kernel, xi: f64) -> f64 {
    k.sum(|y| (xi * y).cos())
}

/// `int J(y) e^{-lambda y} dy`, i.e. `E_c(lambda) + 1`.
pub fn exp_moment(k: &Kernel, lambda: f64) -> Result<f64> {
    k.check_exponent(lambda)?;
    let m = k.sum(|y| (-lambda * y).exp());
    if !m.is_finite() {
        return Err(Error::MomentDiverged { lambda });
    }
    Ok(m)
}

/// `int y J(y) e^{-lambda y} dy = -d/dlambda exp_moment`.
pub fn exp_moment_weighted(k: &Kernel, lambda: f64) -> Result<f64> {
    k.check_exponent(lambda)?;
    let m = k.sum(|y| y * (-lambda * y).exp());
    if !m.is_finite() {
        return Err(Error::MomentDiverged { lambda });
    }
    Ok(m)
}

/// `e^{beta lambda^2 - lambda c tau}`, the Laplace factor of the shifted heat kernel.
pub fn heat_moment(h: HeatKernelParams, lambda: f64, ctau: f64) -> f64 {
    (h.beta * lambda * lambda - lambda * ctau).exp()
}

/// Quadrature of `int f_{1 beta}(y) e^{-lambda (y + c tau)} dy`, used to cross-check
/// [`heat_moment`] for `beta > 0`.
pub fn heat_moment_quadrature(h: HeatKernelParams, lambda: f64, ctau: f64) -> f64 {
    if h.beta == 0.0 {
        return (-lambda * ctau).exp();
    }
    // integrand peaks at y = -2 beta lambda with width sqrt(2 beta)
    let centre = -2.0 * h.beta * lambda;
    let half = 40.0 * h.beta.sqrt();
    crate::quadrature::integrate(
        |y| h.density(y) * (-lambda * (y + ctau)).exp(),
        centre - half,
        centre + half,
        64,
    )
}

const FIT_LO: f64 = 1e-3;
const FIT_HI: f64 = 1e-1;
const FIT_SAMPLES: usize = 40;

/// Fit `1 - J^(xi) ~ kcal |xi|^alpha` on the small-frequency window and pick
/// sandwich constants valid on the sampled frequencies.
pub fn estimate_symbol_order(k: &Kernel) -> Result<SymbolOrder> {
    let ell = k.spec.family.length_scale();
    let log_grid = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
            .collect()
    };
    let fit_xi: Vec<f64> = log_grid(FIT_LO / ell, FIT_HI / ell, FIT_SAMPLES);
    let fit_val: Vec<f64> = fit_xi.iter().map(|&x| k.one_minus_symbol(x)).collect();
    if fit_val.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidKernel("symbol not resolved on the fit window".into()));
    }
    let lx: Vec<f64> = fit_xi.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = fit_val.iter().map(|v| v.ln()).collect();
    let line = linear_regression(&lx, &ly);
    let alpha = line.slope;
    let kcal_fit = line.intercept.exp();
    let residual = fit_xi
        .iter()
        .zip(&fit_val)
        .map(|(&x, &v)| (kcal_fit * x.powf(alpha) / v - 1.0).abs())
        .fold(0.0, f64::max);
    if residual > 0.05 || !(alpha > 0.0 && alpha <= 2.05) {
        return Err(Error::OrderUndetermined { alpha, kcal: kcal_fit, residual });
    }

    // a_tilde: extend while the ratio to the fitted power law stays above one half
    let scan = log_grid(0.1 * FIT_LO / ell, 20.0 / ell, 500);
    let ratio = |x: f64| k.one_minus_symbol(x) / (kcal_fit * x.powf(alpha));
    let mut a_tilde = fit_xi[0];
    for &x in scan.iter().filter(|&&x| x >= fit_xi[0]) {
        if ratio(x) < 0.5 {
            break;
        }
        a_tilde = x;
    }
    let below: Vec<f64> = scan.iter().copied().filter(|&x| x <= a_tilde).collect();
    if below.len() < 20 {
        return Err(Error::InvalidKernel(format!(
            "only {} sample frequencies below a_tilde = {a_tilde:.3e}",
            below.len()
        )));
    }
    let scaled: Vec<f64> = below.iter().map(|&x| k.one_minus_symbol(x) / x.powf(alpha)).collect();
    // small margins so the bounds also hold between neighbouring samples
    let kcal = scaled.iter().copied().fold(kcal_fit, f64::max) * (1.0 + 1e-6);
    let mut k1 = scaled.iter().copied().fold(f64::INFINITY, f64::min) * (1.0 - 1e-6);
    let band_min = scan
        .iter()
        .filter(|&&x| x >= a_tilde)
        .map(|&x| k.one_minus_symbol(x))
        .fold(f64::INFINITY, f64::min);
    let mut delta = k1 * a_tilde.powf(alpha);
    if band_min < delta {
        delta = band_min;
        k1 = delta / a_tilde.powf(alpha);
    }
    Ok(SymbolOrder {
        alpha,
        kcal,
        k1: k1.min(kcal * (1.0 - 1e-12)),
        delta,
        a_tilde,
        kcal_fit,
        fit_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn gauss() -> Kernel {
        make_kernel(KernelSpec::gaussian(1.0)).unwrap()
    }

    #[test]
    fn gaussian_has_unit_mass_and_is_even() {
        let k = gauss();
        assert!((k.mass - 1.0).abs() < 1e-8);
        let n = k.nodes.len();
        for i in 0..n {
            assert_eq!(k.nodes[i], -k.nodes[n - 1 - i]);
            assert!((k.values[i] - k.values[n - 1 - i]).abs() < 1e-12);
        }
        assert!(k.captured_mass > 1.0 - 1e-12);
    }

    #[test]
    fn compact_bump_vanishes_outside_support() {
        let k = make_kernel(KernelSpec::compact_bump(1.0)).unwrap();
        assert_eq!(k.density(1.5), 0.0);
        assert_eq!(k.density(-1.0), 0.0);
        assert!((k.mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn truncated_cauchy_renormalises() {
        let k = make_kernel(KernelSpec::cauchy_truncated(1.0, 50.0)).unwrap();
        assert!((k.mass - 1.0).abs() < 1e-8);
        assert!(k.truncated);
        // independent closed form: int_{-50}^{50} dx/(1+x^2) = 2 atan(50)
        let expected = 1.0 / (2.0 * 50f64.atan());
        assert!((k.density(0.0) - expected).abs() < 1e-10, "{} vs {}", k.density(0.0), expected);
    }

    #[test]
    fn narrow_window_is_rejected() {
        let spec = KernelSpec {
            family: KernelFamily::Gaussian { sigma: 1.0 },
            quadrature: QuadratureSpec { half_width: 3.0, points: 200 },
        };
        assert!(matches!(make_kernel(spec), Err(Error::QuadratureTooNarrow { .. })));
        let spec = KernelSpec {
            family: KernelFamily::Gaussian { sigma: -1.0 },
            quadrature: QuadratureSpec { half_width: 3.0, points: 200 },
        };
        assert!(matches!(make_kernel(spec), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn gaussian_symbol_matches_closed_form() {
        let k = gauss();
        assert!((fourier_symbol(&k, 0.0) - 1.0).abs() < 1e-12);
        assert!((fourier_symbol(&k, 1.0) - (-0.5f64).exp()).abs() < 1e-10);
        assert!((fourier_symbol(&k, 1.0) - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn gaussian_moments_match_closed_form() {
        let k = gauss();
        assert!((exp_moment(&k, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let e = 0.5f64.exp();
        assert!((exp_moment(&k, 1.0).unwrap() - e).abs() < 1e-10);
        assert!((exp_moment(&k, -1.0).unwrap() - e).abs() < 1e-10);
        assert!(exp_moment_weighted(&k, 0.0).unwrap().abs() < 1e-12);
        assert!((exp_moment_weighted(&k, 1.0).unwrap() + e).abs() < 1e-10);
        assert!((k.exp_moment_second(1.0).unwrap() - 2.0 * e).abs() < 1e-10);
    }

    #[test]
    fn moment_overflow_is_reported() {
        let k = make_kernel(KernelSpec::cauchy_truncated(1.0, 50.0)).unwrap();
        assert!(matches!(exp_moment(&k, 20.0), Err(Error::MomentDiverged { .. })));
    }

    #[test]
    fn weighted_moment_is_minus_derivative() {
        for spec in [KernelSpec::gaussian(1.3), KernelSpec::compact_bump(2.0)] {
            let k = make_kernel(spec).unwrap();
            let h = 1e-4;
            for lambda in [-1.0, 0.0, 0.3, 1.7] {
                let fd = -(exp_moment(&k, lambda + h).unwrap() - exp_moment(&k, lambda - h).unwrap()) / (2.0 * h);
                let w = exp_moment_weighted(&k, lambda).unwrap();
                assert!((fd - w).abs() < 1e-7 * (1.0 + w.abs()), "lambda {lambda}: {fd} vs {w}");
            }
        }
    }

    #[test]
    fn heat_moment_values() {
        assert_eq!(heat_moment(HeatKernelParams::dirac(), 1.0, 0.0), 1.0);
        let h1 = HeatKernelParams::new(1.0).unwrap();
        assert!((heat_moment(h1, 1.0, 0.0) - std::f64::consts::E).abs() < 1e-12);
        assert!((heat_moment(h1, 1.0, 1.0) - 1.0).abs() < 1e-15);
        for (lambda, ctau) in [(1.0, 0.0), (0.7, 1.3), (-0.4, 2.0)] {
            let exact = heat_moment(h1, lambda, ctau);
            let quad = heat_moment_quadrature(h1, lambda, ctau);
            assert!((quad / exact - 1.0).abs() < 1e-8);
        }
        assert!(HeatKernelParams::new(-1.0).is_err());
    }

    #[test]
    fn heat_density_integrates_to_one() {
        let h = HeatKernelParams::new(0.3).unwrap();
        let s = integrate(|y| h.density(y), -20.0, 20.0, 40);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_symbol_order() {
        let so = estimate_symbol_order(&gauss()).unwrap();
        assert!((so.alpha - 2.0).abs() < 0.02, "{so:?}");
        assert!((so.kcal - 0.5).abs() < 0.02, "{so:?}");
        assert!(so.k1 > 0.0 && so.k1 < so.kcal);
    }

    #[test]
    fn bump_symbol_order() {
        let k = make_kernel(KernelSpec::compact_bump(1.0)).unwrap();
        let so = estimate_symbol_order(&k).unwrap();
        assert!((so.alpha - 2.0).abs() < 0.05, "{so:?}");
        // second-moment oracle: kcal = m2 / 2
        let m2 = integrate(|x| x * x * k.density(x), -1.0, 1.0, 64);
        assert!((so.kcal_fit - 0.5 * m2).abs() < 0.01 * m2);
    }

    #[test]
    fn wide_cauchy_is_near_order_one() {
        let spec = KernelSpec {
            family: KernelFamily::CauchyTruncated { scale: 1.0, cutoff: 1e4 },
            quadrature: QuadratureSpec { half_width: 1e4, points: 40_000 },
        };
        let k = make_kernel(spec).unwrap();
        let so = estimate_symbol_order(&k).unwrap();
        assert!(so.alpha > 0.9 && so.alpha < 1.2, "{so:?}");
    }

    fn check_sandwich(k: &Kernel, so: &SymbolOrder) {
        for i in 0..300 {
            let xi = 1e-3 * (1.03f64).powi(i);
            let v = k.one_minus_symbol(xi);
            if xi <= so.a_tilde {
                let p = xi.powf(so.alpha);
                assert!(so.k1 * p <= v * (1.0 + 1e-9), "lower bound at {xi}");
                assert!(v <= so.kcal * p * (1.0 + 1e-9), "upper bound at {xi}: {v} vs {} ({so:?})", so.kcal * p);
            } else if xi <= 20.0 {
                assert!(v >= so.delta * (1.0 - 1e-9), "delta bound at {xi}");
            }
        }
    }

    #[test]
    fn sandwich_holds_on_samples() {
        for spec in [KernelSpec::gaussian(1.0), KernelSpec::gaussian(0.5), KernelSpec::compact_bump(1.0)] {
            let k = make_kernel(spec).unwrap();
            let so = estimate_symbol_order(&k).unwrap();
            check_sandwich(&k, &so);
        }
    }

    proptest! {
        #[test]
        fn symbol_bounded_by_one(xi in -50.0f64..50.0, sigma in 0.3f64..3.0) {
            let k = make_kernel(KernelSpec::gaussian(sigma)).unwrap();
            let s = fourier_symbol(&k, xi);
            prop_assert!(s <= 1.0 + 1e-12);
            prop_assert!((s - fourier_symbol(&k, -xi)).abs() < 1e-12);
        }

        #[test]
        fn moment_is_convex_with_minimum_one(l in -3.0f64..3.0, h in 0.01f64..0.5) {
            let k = make_kernel(KernelSpec::compact_bump(1.5)).unwrap();
            let m = exp_moment(&k, l).unwrap();
            prop_assert!(m >= 1.0 - 1e-12);
            let mid = exp_moment(&k, l).unwrap();
            let side = 0.5 * (exp_moment(&k, l - h).unwrap() + exp_moment(&k, l + h).unwrap());
            prop_assert!(side >= mid - 1e-12);
        }

        #[test]
        fn heat_moment_reflection_identity(beta in 0.0f64..2.0, l in -2.0f64..2.0, ctau in -3.0f64..3.0) {
            let h = HeatKernelParams::new(beta).unwrap();
            let prod = heat_moment(h, l, ctau) * heat_moment(h, -l, ctau) * (-2.0 * beta * l * l).exp();
            prop_assert!((prod - 1.0).abs() < 1e-12);
        }
    }
}
