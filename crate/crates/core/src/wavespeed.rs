//! Characteristic functions, the critical speed, and decay rates of fronts.
//!
//! With `M(lambda) = int J(y) e^{-lambda y} dy`,
//!
//! ```text
//! H_c(lambda) = b'(0) e^{beta lambda^2 - lambda c tau}
//! G_c(lambda) = c lambda - (M(lambda) - 1) + d'(0)
//! ```
//!
//! The critical pair `(c*, lambda*)` is the point where the two curves touch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{exp_moment, exp_moment_weighted, heat_moment, HeatKernelParams, Kernel};
use crate::model::Model;
use crate::monostable::Monostable;
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveCharacteristics {
    pub c_star: f64,
    pub lambda_star: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedRoots {
    pub c: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_plus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightFn {
    pub lambda_star: f64,
    pub x_star: f64,
}

/// Open interval `(0, upper)` of admissible exponential rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuBound {
    pub upper: f64,
    /// `d'(u+) - b'(u+)`.
    pub equilibrium_gap: f64,
    /// `G_c(lambda*) - H_c(lambda*)`.
    pub tangency_gap: f64,
}

pub fn g_c(m: &Monostable, k: &Kernel, c: f64, lambda: f64) -> Result<f64> {
    Ok(c * lambda - (exp_moment(k, lambda)? - 1.0) + m.d1(0.0))
}

pub fn h_c(m: &Monostable, h: HeatKernelParams, c: f64, tau: f64, lambda: f64) -> f64 {
    m.b1(0.0) * heat_moment(h, lambda, c * tau)
}

// H - G and its first two lambda-derivatives.
fn gap(model: &Model, c: f64, lambda: f64) -> Result<[f64; 3]> {
    let m = &model.monostable;
    let k = &model.kernel;
    let hv = h_c(m, model.heat, c, model.tau, lambda);
    let s = 2.0 * model.heat.beta * lambda - c * model.tau;
    let g = g_c(m, k, c, lambda)?;
    let g1 = c + exp_moment_weighted(k, lambda)?;
    let g2 = -k.exp_moment_second(lambda)?;
    Ok([hv - g, hv * s - g1, hv * (s * s + 2.0 * model.heat.beta) - g2])
}

const C_RANGE: (f64, f64) = (0.1, 10.0);
const L_RANGE: (f64, f64) = (0.05, 5.0);

fn min_gap_on_grid(model: &Model, c: f64, lambdas: &[f64]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &l in lambdas {
        if let Ok([v, _, _]) = gap(model, c, l) {
            if best.map_or(true, |(_, b)| v < b) {
                best = Some((l, v));
            }
        }
    }
    best
}

/// Solve `H = G`, `H' = G'` for `(c*, lambda*)`.
pub fn critical_pair(model: &Model) -> Result<WaveCharacteristics> {
    let m = &model.monostable;
    if !(m.b1(0.0) > m.d1(0.0)) {
        return Err(Error::HypothesesViolated("b'(0) > d'(0) is required for a front".into()));
    }
    let lambdas: Vec<f64> = (0..200)
        .map(|i| L_RANGE.0 + (L_RANGE.1 - L_RANGE.0) * i as f64 / 199.0)
        .collect();
    let cs: Vec<f64> = (0..100)
        .map(|i| C_RANGE.0 + (C_RANGE.1 - C_RANGE.0) * i as f64 / 99.0)
        .collect();

    // H - G decreases in c, so min_lambda (H - G) changes sign exactly once
    let mut prev: Option<(f64, f64, f64)> = None;
    let mut start = None;
    for &c in &cs {
        let Some((l, v)) = min_gap_on_grid(model, c, &lambdas) else { continue };
        if v <= 0.0 {
            start = Some(match prev {
                Some((pc, pl, pv)) => {
                    let t = pv / (pv - v);
                    (pc + t * (c - pc), pl + t * (l - pl))
                }
                None => (c, l),
            });
            break;
        }
        prev = Some((c, l, v));
    }
    let Some((mut c, mut lambda)) = start else {
        return Err(Error::NoTangency(format!(
            "H_c - G_c keeps one sign on [{}, {}] x [{}, {}]",
            C_RANGE.0, C_RANGE.1, L_RANGE.0, L_RANGE.1
        )));
    };
    if prev.is_none() {
        return Err(Error::NoTangency(format!("H_c < G_c somewhere already at c = {}", C_RANGE.0)));
    }

    let residual = |c: f64, l: f64| -> Result<f64> {
        let [f1, f2, _] = gap(model, c, l)?;
        Ok(f1.abs().max(f2.abs()))
    };
    let mut res = residual(c, lambda)?;
    let mut iters = 0;
    while res >= 1e-13 {
        if iters == 100 {
            break;
        }
        iters += 1;
        let [f1, f2, f2l] = gap(model, c, lambda)?;
        let hc = 1e-6 * c.max(1.0);
        let [p1, p2, _] = gap(model, c + hc, lambda)?;
        let [q1, q2, _] = gap(model, c - hc, lambda)?;
        let (f1c, f2c) = ((p1 - q1) / (2.0 * hc), (p2 - q2) / (2.0 * hc));
        // Jacobian [[f1c, f2], [f2c, f2l]] in (c, lambda)
        let det = f1c * f2l - f2 * f2c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dc = (f1 * f2l - f2 * f2) / det;
        let dl = (f1c * f2 - f2c * f1) / det;
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-6 {
            let (nc, nl) = (c - step * dc, lambda - step * dl);
            if nc > 0.0 && nl > 0.0 {
                if let Ok(r) = residual(nc, nl) {
                    if r < res {
                        c = nc;
                        lambda = nl;
                        res = r;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res >= 1e-9 {
        return Err(Error::NewtonStalled { iterations: iters, residual: res });
    }

    // tangency from below: H >= G away from lambda*
    for &l in &lambdas {
        if let Ok([v, _, _]) = gap(model, c, l) {
            if v < -1e-9 {
                return Err(Error::NoTangency(format!(
                    "H_c < G_c at lambda = {l} for c = {c}; curves cross instead of touching"
                )));
            }
        }
    }
    Ok(WaveCharacteristics { c_star: c, lambda_star: lambda, residual: res })
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NotBracketed(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// Smallest power-of-two extension of `start` at which `f` becomes positive.
fn extend_until_positive<F: Fn(f64) -> Result<f64>>(f: F, start: f64) -> Result<f64> {
    let mut hi = start;
    loop {
        match f(hi) {
            Ok(v) if v > 0.0 => return Ok(hi),
            Ok(_) => hi *= 2.0,
            Err(Error::MomentDiverged { lambda }) => {
                return Err(Error::NotBracketed(format!("kernel moment overflows at lambda = {lambda} before a sign change")))
            }
            Err(e) => return Err(e),
        }
    }
}

/// Right-tail equation `-c l - M(l) + 1 + d'(u+) - b'(u+) e^{beta l^2 + l c tau}`.
pub fn lambda_plus_equation(model: &Model, c: f64, l: f64) -> Result<f64> {
    let m = &model.monostable;
    let up = m.u_plus;
    let rhs = m.b1(up) * (model.heat.beta * l * l + l * c * model.tau).exp();
    Ok(-c * l - exp_moment(&model.kernel, l)? + 1.0 + m.d1(up) - rhs)
}

/// Decay rates at speed `c`: left tail roots `lambda1 <= lambda2` and the right tail rate.
pub fn decay_roots(model: &Model, wave: &WaveCharacteristics, c: f64) -> Result<SpeedRoots> {
    let (cs, ls) = (wave.c_star, wave.lambda_star);
    if c < cs - 1e-10 {
        return Err(Error::SubcriticalSpeed { c, c_star: cs });
    }
    let f = |l: f64| gap(model, c, l).map(|g| g[0]);
    let (lambda1, lambda2) = if c <= cs + 1e-10 {
        (ls, ls)
    } else {
        let l1 = bisect(f, 0.0, ls)?;
        let hi = extend_until_positive(f, 20.0_f64.max(2.0 * ls))?;
        (l1, bisect(f, ls, hi)?)
    };
    let fp = |l: f64| lambda_plus_equation(model, c, l).map(|v| -v);
    let hi = extend_until_positive(fp, 1.0)?;
    let lambda_plus = bisect(|l| lambda_plus_equation(model, c, l), 0.0, hi)?;
    Ok(SpeedRoots { c, lambda1, lambda2, lambda_plus })
}

/// Upper end of the admissible exponential convergence rate.
pub fn mu_bound(model: &Model, wave: &WaveCharacteristics, c: f64, eps1: f64) -> Result<MuBound> {
    if !(eps1 > 0.0 && eps1 <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps1 must lie in (0, 1], got {eps1}")));
    }
    if model.tau == 0.0 && eps1 != 1.0 {
        return Err(Error::InvalidArgument("eps1 must be 1 when tau = 0".into()));
    }
    if c < wave.c_star - 1e-10 {
        return Err(Error::SubcriticalSpeed { c, c_star: wave.c_star });
    }
    let m = &model.monostable;
    let equilibrium_gap = m.d1(m.u_plus) - m.b1(m.u_plus);
    let l = wave.lambda_star;
    let tangency_gap = g_c(m, &model.kernel, c, l)? - h_c(m, model.heat, c, model.tau, l);
    let upper = if c <= wave.c_star + 1e-10 { 0.0 } else { equilibrium_gap.min(eps1 * tangency_gap) };
    Ok(MuBound { upper, equilibrium_gap, tangency_gap })
}

/// `w(x) = e^{-lambda* (x - x*)}` left of `x*`, one to the right.
pub fn weight_eval(w: &WeightFn, x1: f64) -> f64 {
    if x1 <= w.x_star {
        (-w.lambda_star * (x1 - w.x_star)).exp()
    } else {
        1.0
    }
}

/// Left side of the x* condition: `d'(phi(xi)) - int f_beta(y) b'(phi(xi - y - c tau)) dy`.
pub fn xstar_margin(profile: &Profile, model: &Model, c: f64, xi: f64) -> f64 {
    let m = &model.monostable;
    let shift = xi - c * model.tau;
    let birth = if model.heat.beta == 0.0 {
        m.b1(profile.eval(shift))
    } else {
        let s = (2.0 * model.heat.beta).sqrt();
        crate::quadrature::integrate(
            |y| model.heat.density(y) * m.b1(profile.eval(shift - y)),
            -12.0 * s,
            12.0 * s,
            24,
        )
    };
    m.d1(profile.eval(xi)) - birth
}

/// Smallest profile node `x*` with the x* condition holding at every node to its right.
pub fn select_xstar(profile: &Profile, model: &Model, c: f64, eps0: f64) -> Result<f64> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InvalidArgument(format!("eps0 must lie in (0, 1), got {eps0}")));
    }
    let m = &model.monostable;
    let target = eps0 * (m.d1(m.u_plus) - m.b1(m.u_plus));
    let nodes = &profile.xi_nodes;
    let mut x_star = None;
    for &xi in nodes.iter().rev() {
        if xstar_margin(profile, model, c, xi) >= target {
            x_star = Some(xi);
        } else {
            break;
        }
    }
    x_star.ok_or_else(|| {
        Error::DomainTooShort(format!(
            "x* condition fails at the right edge xi = {}; extend L",
            nodes.last().copied().unwrap_or(f64::NAN)
        ))
    })
}
