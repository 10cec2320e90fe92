//! Traveling-wave profiles `u(t, x) = phi(x + c t)`.
//!
//! In the moving frame `xi = x + c t` the profile solves
//!
//! ```text
//! c phi' - J*phi + phi + d(phi) = int f_beta(y) b(phi(xi - y - c tau)) dy
//! ```
//!
//! Adding `eta0 phi` to both sides gives `c phi' + eta0 phi = F[phi]` with `F`
//! nondecreasing in `phi`. The solver first iterates the integrated form from
//! an upper solution, which produces a monotone decreasing sequence, and then
//! polishes the limit with Newton's method on a higher order discretisation
//! pinned by the phase condition `phi(center) = u+/2`.

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::monostable::{contraction_constants, Monostable};
use crate::quadrature::gauss_legendre;
use crate::stencil::{birth_stencil, kernel_stencil, Stencil};
use crate::wavespeed::{critical_pair, decay_roots, WaveCharacteristics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Cap on the monotone iteration.
    pub max_iterations: usize,
    /// Monotone steps before handing over to Newton when the iteration has not settled.
    pub monotone_budget: usize,
    /// Sup-norm update that counts as convergence of the monotone iteration.
    pub tol: f64,
    /// Sup-norm residual of the Newton system, relative to `u+`.
    pub newton_tol: f64,
    /// Node where `phi = u+/2`.
    pub center: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { max_iterations: 10_000, monotone_budget: 600, tol: 1e-10, newton_tol: 1e-12, center: 0.0 }
    }
}

/// Far-left continuation of a profile, `y = xi - xi_0 < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeftTail {
    /// Constant continuation by the first value.
    Flat,
    /// `phi_0 e^{lambda1 y} + slope D(y)`, `D(y) = (e^{lambda2 y} - e^{lambda1 y}) / (lambda2 - lambda1)`.
    Exponential { lambda1: f64, lambda2: f64, slope: f64 },
}

impl LeftTail {
    /// `(e^{lambda1 y}, D(y))`.
    fn basis(&self, y: f64) -> (f64, f64) {
        match *self {
            LeftTail::Flat => (1.0, 0.0),
            LeftTail::Exponential { lambda1, lambda2, .. } => {
                let e1 = (lambda1 * y).exp();
                let d = if lambda2 - lambda1 < 1e-6 { y * e1 } else { ((lambda2 * y).exp() - e1) / (lambda2 - lambda1) };
                (e1, d)
            }
        }
    }

    fn value(&self, phi0: f64, y: f64) -> f64 {
        let (e1, d) = self.basis(y);
        match *self {
            LeftTail::Flat => phi0,
            LeftTail::Exponential { slope, .. } => phi0 * e1 + slope * d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDiagnostics {
    pub monotone_iterations: usize,
    pub monotone_converged: bool,
    pub monotone_last_update: f64,
    /// Largest increase of any node between consecutive monotone iterates.
    pub monotone_violation: f64,
    /// Decay rate of the upper solution used to start the iteration.
    pub discrete_lambda: f64,
    pub newton_steps: usize,
    pub newton_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub c: f64,
    pub xi_nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub u_plus: f64,
    pub left_tail: LeftTail,
    pub diagnostics: Option<ProfileDiagnostics>,
}

impl Profile {
    /// Profile sampled on uniform nodes, continued flat outside them.
    pub fn from_values(c: f64, xi_nodes: Vec<f64>, values: Vec<f64>, u_plus: f64) -> Result<Self> {
        if xi_nodes.len() != values.len() || xi_nodes.len() < 5 {
            return Err(Error::ShapeMismatch(format!(
                "{} nodes and {} values (need equal counts, at least 5)",
                xi_nodes.len(),
                values.len()
            )));
        }
        let h = xi_nodes[1] - xi_nodes[0];
        let uniform = h > 0.0 && xi_nodes.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        if !uniform {
            return Err(Error::InvalidArgument("profile nodes must be uniformly increasing".into()));
        }
        Ok(Profile { c, xi_nodes, values, u_plus, left_tail: LeftTail::Flat, diagnostics: None })
    }

    pub fn h(&self) -> f64 {
        (self.xi_nodes[self.xi_nodes.len() - 1] - self.xi_nodes[0]) / (self.xi_nodes.len() - 1) as f64
    }

    /// Linear interpolation inside the nodes, the left tail to the left, the last value to the right.
    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.values.len();
        let x0 = self.xi_nodes[0];
        if xi <= x0 {
            return self.left_tail.value(self.values[0], xi - x0);
        }
        if xi >= self.xi_nodes[n - 1] {
            return self.values[n - 1];
        }
        let t = (xi - x0) / self.h();
        let i = (t.floor() as usize).min(n - 2);
        let th = t - i as f64;
        (1.0 - th) * self.values[i] + th * self.values[i + 1]
    }

    /// Like [`Profile::eval`], but errors past the right edge unless the profile has reached `u+` there.
    pub fn eval_checked(&self, xi: f64) -> Result<f64> {
        let last = self.xi_nodes[self.xi_nodes.len() - 1];
        if xi > last && (self.u_plus - self.values[self.values.len() - 1]).abs() > 1e-10 * self.u_plus.max(1.0) {
            return Err(Error::ProfileWindowExceeded { xi });
        }
        if xi < self.xi_nodes[0] && self.left_tail == LeftTail::Flat && self.values[0].abs() > 1e-10 * self.u_plus.max(1.0) {
            return Err(Error::ProfileWindowExceeded { xi });
        }
        Ok(self.eval(xi))
    }

    /// `phi(xi - shift)`.
    pub fn translated(&self, shift: f64) -> Profile {
        let mut p = self.clone();
        p.xi_nodes.iter_mut().for_each(|x| *x += shift);
        p
    }

    /// Coordinate where the profile crosses `u+/2`.
    pub fn half_level_crossing(&self) -> Option<f64> {
        crossing(&self.values, self.u_plus * 0.5).map(|t| self.xi_nodes[0] + t * self.h())
    }
}

// fractional index of the first upward crossing of `level`
pub(crate) fn crossing(v: &[f64], level: f64) -> Option<f64> {
    let j = v.iter().position(|&x| x >= level)?;
    if j == 0 {
        return Some(0.0);
    }
    let (a, b) = (v[j - 1], v[j]);
    Some((j - 1) as f64 + (level - a) / (b - a))
}

/// Discrete moving-frame operator on a uniform grid.
struct FrontOperator<'a> {
    m: &'a Monostable,
    kern: Stencil,
    birth: Stencil,
    h: f64,
    c: f64,
    eta0: f64,
    /// Nodes `0..=last`.
    last: usize,
    pad: usize,
}

impl<'a> FrontOperator<'a> {
    fn new(model: &'a Model, c: f64, h: f64, last: usize, eta0: f64) -> Result<Self> {
        let kern = kernel_stencil(&model.kernel, h)?;
        let birth = birth_stencil(model.heat, c * model.tau, h);
        let pad = kern.reach().max(birth.reach()) + 2;
        Ok(FrontOperator { m: &model.monostable, kern, birth, h, c, eta0, last, pad })
    }

    fn decay(&self) -> f64 {
        self.eta0 / self.c
    }

    /// Discrete counterpart of `eta0 - 1 - d'(0) + M(lambda) + b'(0) e^{beta lambda^2 - lambda c tau}`.
    fn symbol(&self, lambda: f64) -> f64 {
        self.eta0 - 1.0 - self.m.d1(0.0)
            + self.kern.transform(lambda, self.h)
            + self.m.b1(0.0) * self.birth.transform(lambda, self.h)
    }

    /// Values at indices `-pad ..= last + pad`; `left(l)` supplies `l < 0`, `u+` beyond `last`.
    fn extend(&self, phi: &[f64], left: impl Fn(isize) -> f64) -> Vec<f64> {
        let mut ext = Vec::with_capacity(phi.len() + 2 * self.pad);
        ext.extend((-(self.pad as isize)..0).map(&left));
        ext.extend_from_slice(phi);
        ext.extend(std::iter::repeat(self.m.u_plus).take(self.pad));
        ext
    }

    /// `F` at indices `-1 ..= last + 1`.
    fn forcing(&self, ext: &[f64]) -> Vec<f64> {
        let (first, last) = (-1isize, self.last as isize + 1);
        let bext: Vec<f64> = ext.iter().map(|&u| self.m.b(u)).collect();
        let conv = self.kern.apply_range(ext, self.pad, first, last);
        let birth = self.birth.apply_range(&bext, self.pad, first, last);
        (first..=last)
            .zip(conv.iter().zip(&birth))
            .map(|(i, (j, b))| {
                let u = ext[(self.pad as isize + i) as usize];
                (self.eta0 - 1.0) * u - self.m.d(u) + j + b
            })
            .collect()
    }
}

/// Smallest and largest roots of `rho = 1` on `(0, inf)`.
struct Dispersion {
    lambda1: f64,
    lambda2: f64,
}

fn dispersion<F: Fn(f64) -> f64>(rho: F, guess: f64) -> Dispersion {
    let hi_scan = 4.0 * guess.max(1e-3);
    let n = 400;
    let mut best = (f64::INFINITY, hi_scan);
    for i in 1..=n {
        let l = hi_scan * i as f64 / n as f64;
        let v = rho(l);
        if v < best.0 {
            best = (v, l);
        }
    }
    let step = hi_scan / n as f64;
    let (mut a, mut b) = ((best.1 - step).max(0.0), best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if b - a < 1e-14 * b.max(1.0) {
            break;
        }
        let (x1, x2) = (b - g * (b - a), a + g * (b - a));
        if rho(x1) < rho(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let argmin = 0.5 * (a + b);
    let min = rho(argmin);
    if !(min < 1.0) {
        return Dispersion { lambda1: argmin, lambda2: argmin };
    }
    let root = |mut lo: f64, mut hi: f64, increasing: bool| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (rho(mid) > 1.0) == increasing {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let lambda1 = root(0.0, argmin, false);
    let mut hi = 2.0 * argmin;
    while rho(hi) < 1.0 {
        hi *= 2.0;
    }
    let lambda2 = root(argmin, hi, true);
    Dispersion { lambda1, lambda2 }
}

/// Two-point weights for `phi_{i+1} = E phi_i + w0 F_i + w1 F_{i+1}`, exact on `e^{lambda xi}`.
fn linear_cell_weights(c: f64, eta0: f64, h: f64, lambda: f64) -> (f64, f64) {
    let a = eta0 / c;
    let e = (-a * h).exp();
    let sum = (1.0 - e) / eta0;
    let eh = (lambda * h).exp();
    let w1 = ((eh - e) / (c * lambda + eta0) - sum) / (eh - 1.0);
    let w0 = sum - w1;
    if w0 >= 0.0 && w1 >= 0.0 && w1.is_finite() {
        return (w0, w1);
    }
    let w1 = (h / a - (1.0 - e) / (a * a)) / (c * h);
    (sum - w1, w1)
}

/// `(1/c) int_0^h e^{-a(h-s)} l_m(s) ds` for the cubic through `-h, 0, h, 2h`.
fn cubic_cell_weights(c: f64, eta0: f64, h: f64) -> [f64; 4] {
    let a = eta0 / c;
    let nodes = [-h, 0.0, h, 2.0 * h];
    let (x, w) = gauss_legendre(20);
    let mut out = [0.0; 4];
    for (xg, wg) in x.iter().zip(&w) {
        let s = 0.5 * h * (xg + 1.0);
        let ker = 0.5 * h * wg * (-a * (h - s)).exp() / c;
        for (m, o) in out.iter_mut().enumerate() {
            let mut l = 1.0;
            for (q, &nq) in nodes.iter().enumerate() {
                if q != m {
                    l *= (s - nq) / (nodes[m] - nq);
                }
            }
            *o += ker * l;
        }
    }
    out
}

/// Traveling wave at speed `c` on `[-half_width, half_width]` with `intervals` cells.
pub fn solve_profile(model: &Model, c: f64, half_width: f64, intervals: usize) -> Result<Profile> {
    let wave = critical_pair(model)?;
    solve_profile_with(model, &wave, c, half_width, intervals, &ProfileOptions::default())
}

pub fn solve_profile_with(
    model: &Model,
    wave: &WaveCharacteristics,
    c: f64,
    half_width: f64,
    intervals: usize,
    opts: &ProfileOptions,
) -> Result<Profile> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("speed must be positive, got {c}")));
    }
    if !(half_width > 0.0) || intervals < 16 {
        return Err(Error::InvalidArgument(format!("need half_width > 0 and at least 16 cells, got {half_width}, {intervals}")));
    }
    if opts.center.abs() >= 0.5 * half_width {
        return Err(Error::InvalidArgument(format!("center {} too close to the domain edge", opts.center)));
    }
    let m = &model.monostable;
    let up = m.u_plus;
    let window = model.kernel.window();
    if window > half_width {
        return Err(Error::GridTooSmall { kernel_half_width: window, grid_half_width: half_width });
    }
    let subcritical = c < wave.c_star - 1e-8;
    let lambda_fit = if subcritical {
        wave.lambda_star
    } else {
        let roots = decay_roots(model, wave, c.max(wave.c_star))?;
        let reach = half_width + opts.center;
        if (-roots.lambda1 * reach).exp() >= 1e-6 {
            return Err(Error::DomainTooShort(format!(
                "left tail e^(-lambda1 L) = {:.2e} with lambda1 = {:.4}, L = {reach}",
                (-roots.lambda1 * reach).exp(),
                roots.lambda1
            )));
        }
        roots.lambda1
    };

    let h = 2.0 * half_width / intervals as f64;
    let last = intervals;
    let xi: Vec<f64> = (0..=last).map(|i| -half_width + i as f64 * h).collect();
    let eta0 = contraction_constants(m).eta0;
    let op = FrontOperator::new(model, c, h, last, eta0)?;
    let e = (-op.decay() * h).exp();
    let center_idx = ((opts.center + half_width) / h).round() as usize;

    // monotone iteration from the upper solution
    let (w0, w1) = linear_cell_weights(c, eta0, h, lambda_fit);
    let rho1 = |l: f64| {
        let eh = (l * h).exp();
        op.symbol(l) * (w0 + w1 * eh) / (eh - e)
    };
    let disp1 = dispersion(rho1, lambda_fit);
    let ld = disp1.lambda1;
    let boundary = {
        let eh = (ld * h).exp();
        (w0 + w1 * eh) / (eh - e)
    };
    let xc = xi[center_idx];
    let mut phi: Vec<f64> = xi.iter().map(|&x| up.min(up * (ld * (x - xc)).exp())).collect();
    let mut iterations = 0;
    let mut last_update = f64::INFINITY;
    let mut violation: f64 = 0.0;
    let mut converged = false;
    let exit_index = last - op.pad;
    while iterations < opts.max_iterations {
        iterations += 1;
        let phi0 = phi[0];
        let ext = op.extend(&phi, |l| phi0 * (ld * l as f64 * h).exp());
        let f = op.forcing(&ext);
        let mut next = vec![0.0; last + 1];
        next[0] = f[1] * boundary;
        for i in 0..last {
            next[i + 1] = e * next[i] + w0 * f[i + 1] + w1 * f[i + 2];
        }
        last_update = 0.0;
        for (a, b) in next.iter().zip(&phi) {
            last_update = last_update.max((a - b).abs());
            violation = violation.max(a - b);
        }
        phi = next;
        if phi[exit_index] < 0.5 * up {
            // the front has run out of the window
            if subcritical {
                return Err(Error::NoFront { c });
            }
            return Err(Error::ProfileStalled { iterations, last_update });
        }
        if last_update < opts.tol {
            converged = true;
            break;
        }
        if !subcritical && iterations >= opts.monotone_budget {
            break;
        }
    }
    if subcritical {
        return Err(Error::NoFront { c });
    }

    // re-centre on the phase node
    let p = crossing(&phi, 0.5 * up).ok_or(Error::ProfileStalled { iterations, last_update })?;
    let shift = (p - center_idx as f64).round() as isize;
    let phi0 = phi[0];
    let at = |l: isize| -> f64 {
        if l < 0 {
            phi0 * (ld * l as f64 * h).exp()
        } else if l as usize > last {
            up
        } else {
            phi[l as usize]
        }
    };
    let start: Vec<f64> = (0..=last as isize).map(|i| at(i + shift)).collect();

    // Newton on the cubic cell system
    let wc = cubic_cell_weights(c, eta0, h);
    let rho2 = |l: f64| {
        let eh = (l * h).exp();
        op.symbol(l) * (wc[0] / eh + wc[1] + wc[2] * eh + wc[3] * eh * eh) / (eh - e)
    };
    let disp2 = dispersion(rho2, lambda_fit);
    let tail_shape = LeftTail::Exponential { lambda1: disp2.lambda1, lambda2: disp2.lambda2, slope: 0.0 };
    let newton = NewtonSystem { op: &op, w: wc, e, tail: tail_shape, center: center_idx };
    let mut x = Vec::with_capacity(last + 2);
    x.push(0.0);
    x.extend_from_slice(&start);
    let (x, steps, res) = newton.solve(x, opts.newton_tol * up.max(1.0))?;

    let values = x[1..].to_vec();
    let defect = values.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
    let below = values.iter().fold(0.0f64, |a, &v| a.max(-v));
    if defect > 1e-9 * up || below > 1e-9 * up {
        return Err(Error::InvalidArgument(format!(
            "profile lost monotonicity (defect {defect:.2e}, undershoot {below:.2e}); refine the grid"
        )));
    }
    if values[0] >= 1e-4 * up || up - values[last] >= 1e-4 * up {
        return Err(Error::DomainTooShort(format!(
            "edge values {:.2e} and {:.2e} not within 1e-4 of the equilibria",
            values[0], values[last]
        )));
    }
    let left_tail = LeftTail::Exponential { lambda1: disp2.lambda1, lambda2: disp2.lambda2, slope: x[0] };
    Ok(Profile {
        c,
        xi_nodes: xi,
        values,
        u_plus: up,
        left_tail,
        diagnostics: Some(ProfileDiagnostics {
            monotone_iterations: iterations,
            monotone_converged: converged,
            monotone_last_update: last_update,
            monotone_violation: violation,
            discrete_lambda: ld,
            newton_steps: steps,
            newton_residual: res,
        }),
    })
}

/// Unknowns `[s, phi_0 .. phi_last]`; rows: tail match, cells, and the phase
/// condition slotted between the cells at the phase node to keep the band narrow.
struct NewtonSystem<'a, 'b> {
    op: &'b FrontOperator<'a>,
    w: [f64; 4],
    e: f64,
    tail: LeftTail,
    center: usize,
}

impl NewtonSystem<'_, '_> {
    fn n(&self) -> usize {
        self.op.last + 2
    }

    fn cell_row(&self, i: usize) -> usize {
        if i < self.center {
            i + 1
        } else {
            i + 2
        }
    }

    fn ext(&self, x: &[f64]) -> Vec<f64> {
        let (phi0, s) = (x[1], x[0]);
        let h = self.op.h;
        self.op.extend(&x[1..], |l| {
            let (e1, d) = self.tail.basis(l as f64 * h);
            phi0 * e1 + s * d
        })
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let last = self.op.last;
        let phi = &x[1..];
        let f = self.op.forcing(&self.ext(x));
        let mut r = vec![0.0; self.n()];
        let (e1, d) = self.tail.basis(self.op.h);
        r[0] = phi[1] - (phi[0] * e1 + x[0] * d);
        for i in 0..last {
            let g: f64 = (0..4).map(|m| self.w[m] * f[i + m]).sum();
            r[self.cell_row(i)] = phi[i + 1] - self.e * phi[i] - g;
        }
        r[self.center + 1] = phi[self.center] - 0.5 * self.op.m.u_plus;
        r
    }

    fn jacobian(&self, x: &[f64]) -> BandMatrix {
        let op = self.op;
        let (last, pad, h) = (op.last, op.pad, op.h);
        let band = pad + 4;
        let mut jac = BandMatrix::zeros(self.n(), band, band);
        let ext = self.ext(x);
        let at = |l: isize| ext[(pad as isize + l) as usize];
        // d(ext_l)/d(unknowns)
        let place = |jac: &mut BandMatrix, row: usize, l: isize, coef: f64| {
            if l < 0 {
                let (e1, d) = self.tail.basis(l as f64 * h);
                jac.add(row, 1, coef * e1);
                jac.add(row, 0, coef * d);
            } else if (l as usize) <= last {
                jac.add(row, l as usize + 1, coef);
            }
        };
        let (e1, d) = self.tail.basis(h);
        jac.add(0, 2, 1.0);
        jac.add(0, 1, -e1);
        jac.add(0, 0, -d);
        for i in 0..last {
            let row = self.cell_row(i);
            place(&mut jac, row, i as isize + 1, 1.0);
            place(&mut jac, row, i as isize, -self.e);
            for m in 0..4 {
                let j = i as isize - 1 + m as isize;
                let wm = -self.w[m];
                place(&mut jac, row, j, wm * (op.eta0 - 1.0 - op.m.d1(at(j))));
                for (k, wk) in op.kern.offsets() {
                    place(&mut jac, row, j - k, wm * wk);
                }
                for (k, vk) in op.birth.offsets() {
                    place(&mut jac, row, j - k, wm * vk * op.m.b1(at(j - k)));
                }
            }
        }
        jac.add(self.center + 1, self.center + 1, 1.0);
        jac
    }

    fn solve(&self, mut x: Vec<f64>, tol: f64) -> Result<(Vec<f64>, usize, f64)> {
        let sup = |r: &[f64]| r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut r = self.residual(&x);
        let mut nr = sup(&r);
        for step in 0..30 {
            if nr < tol {
                return Ok((x, step, nr));
            }
            let lu = self
                .jacobian(&x)
                .factor()
                .ok_or(Error::NewtonStalled { iterations: step, residual: nr })?;
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let dx = lu.solve(&neg);
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
                let rc = self.residual(&cand);
                let nc = sup(&rc);
                if nc < nr || t < 1e-3 {
                    if !(nc < nr) && nr < 1e3 * tol {
                        // rounding floor
                        return Ok((x, step, nr));
                    }
                    x = cand;
                    r = rc;
                    nr = nc;
                    break;
                }
                t *= 0.5;
            }
        }
        if nr < tol {
            return Ok((x, 30, nr));
        }
        Err(Error::NewtonStalled { iterations: 30, residual: nr })
    }
}

/// Sup over interior nodes of `|c phi' - J*phi + phi + d(phi) - birth|` with a five-point derivative.
pub fn residual(p: &Profile, model: &Model) -> Result<f64> {
    let n = p.values.len();
    let h = p.h();
    let last = n - 1;
    let eta0 = contraction_constants(&model.monostable).eta0;
    let op = FrontOperator::new(model, p.c, h, last, eta0)?;
    let x0 = p.xi_nodes[0];
    let mut ext = op.extend(&p.values, |l| p.eval(x0 + l as f64 * h));
    for l in 1..=op.pad {
        ext[op.pad + last + l] = p.eval(p.xi_nodes[last] + l as f64 * h);
    }
    let f = op.forcing(&ext);
    let v = &p.values;
    let mut worst: f64 = 0.0;
    for i in 2..last - 1 {
        let dphi = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h);
        // F already carries eta0 u - (u + d(u)) + J*u + birth
        worst = worst.max((p.c * dphi + eta0 * v[i] - f[i + 1]).abs());
    }
    Ok(worst)
}

/// Fitted exponential rates `(left, right)` with `phi ~ e^{left xi}` and `u+ - phi ~ e^{-right xi}`.
pub fn tail_exponents(p: &Profile) -> Result<(f64, f64)> {
    let up = p.u_plus;
    let (lo, hi) = (1e-8 * up, 1e-2 * up);
    let fit = |pick: &dyn Fn(f64) -> f64, side: &str| -> Result<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = p
            .xi_nodes
            .iter()
            .zip(&p.values)
            .map(|(&x, &v)| (x, pick(v)))
            .filter(|&(_, y)| y > lo && y < hi)
            .map(|(x, y)| (x, y.ln()))
            .unzip();
        if xs.len() < 20 {
            return Err(Error::TailUnderresolved(format!("{side} tail has {} nodes in [1e-8, 1e-2] u+", xs.len())));
        }
        Ok(crate::fit::linear_regression(&xs, &ys).slope)
    };
    let left = fit(&|v| v, "left")?;
    let right = -fit(&|v| up - v, "right")?;
    Ok((left, right))
}
