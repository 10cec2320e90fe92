//! Linearized equation around the unstable state in weighted variables:
//!
//! ```text
//! v_t - int J(y) e^{-lambda* y1} v(t, x - y) dy + c1 v
//!     = c2 int f_beta(y) e^{-lambda* (y1 + c tau)} v(t - tau, x - y) dy
//! ```
//!
//! solved per Fourier mode with the delayed exponential, or by direct stepping.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{delay_steps, grid_kernel_stencil, AxisBoundary, Grid, ProductConvolver, ConvPath};
use crate::fit::regression2;
use crate::kernels::{exp_moment, heat_moment};
use crate::model::Model;
use crate::quadrature::gauss_legendre;
use crate::stencil::{birth_stencil, Stencil};
use crate::wavespeed::WaveCharacteristics;

/// Largest number of series terms before giving up.
pub const MAX_SEGMENTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayedExponential {
    pub kbar: f64,
    pub tau: f64,
}

impl DelayedExponential {
    pub fn eval(&self, t: f64) -> Result<f64> {
        delayed_exp(self.kbar, self.tau, t)
    }
}

/// `e_tau^{kbar t}`: 0 before `-tau`, 1 on `[-tau, 0)`, then
/// `sum_{j <= m} kbar^j (t - (j - 1) tau)^j / j!` on `[(m - 1) tau, m tau)`.
pub fn delayed_exp(kbar: f64, tau: f64, t: f64) -> Result<f64> {
    delayed_exp_c(Complex64::new(kbar, 0.0), tau, t).map(|z| z.re)
}

pub fn delayed_exp_c(kbar: Complex64, tau: f64, t: f64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if tau == 0.0 {
        return if t < 0.0 { Ok(Complex64::new(0.0, 0.0)) } else { Ok((kbar * t).exp()) };
    }
    if t < -tau {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if t < 0.0 {
        return Ok(one);
    }
    let m = (t / tau).floor() as usize + 1;
    if m > MAX_SEGMENTS {
        return Err(Error::DelayedExpOverflow { t, tau });
    }
    let mut sum = one;
    let mut log_fact = 0.0;
    let mut prev = f64::INFINITY;
    for j in 1..=m {
        log_fact += (j as f64).ln();
        let base = t - (j as f64 - 1.0) * tau;
        if base <= 0.0 {
            break;
        }
        // (kbar base)^j / j! through logarithms
        let z = kbar * base;
        if z.norm() == 0.0 {
            break;
        }
        let term = (z.ln() * j as f64 - log_fact).exp();
        sum += term;
        let size = term.norm();
        if size < 1e-16 * sum.norm() && size < prev {
            break;
        }
        prev = size;
    }
    if !(sum.re.is_finite() && sum.im.is_finite()) {
        return Err(Error::DelayedExpOverflow { t, tau });
    }
    Ok(sum)
}

/// Gauss nodes and weights on `[-tau, 0]`, split where `t - tau - s` crosses a multiple of `tau`.
fn history_rule(tau: f64, t: f64, order: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![-tau];
    let mut j = 0.0;
    loop {
        let s = t - (j + 1.0) * tau;
        if s <= -tau {
            break;
        }
        if s < 0.0 {
            cuts.push(s);
        }
        j += 1.0;
    }
    cuts.push(0.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (x, w) = gauss_legendre(order);
    let mut out = vec![];
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b - a <= 1e-15 * tau {
            continue;
        }
        for (xi, wi) in x.iter().zip(&w) {
            out.push((0.5 * (a + b) + 0.5 * (b - a) * xi, 0.5 * (b - a) * wi));
        }
    }
    out
}

/// Solution of `z' + k1 z = k2 z(t - tau)` from its history through the delayed exponential.
///
/// `z0` returns `(z0(s), z0'(s))`.
pub fn scalar_delayed_solution<F: Fn(f64) -> (f64, f64)>(k1: f64, k2: f64, tau: f64, z0: F, t: f64) -> Result<f64> {
    let v = mode_solution(
        Complex64::new(k1, 0.0),
        Complex64::new(k2, 0.0),
        tau,
        |s| {
            let (a, b) = z0(s);
            (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
        },
        t,
    )?;
    Ok(v.re)
}

fn mode_solution<F: Fn(f64) -> (Complex64, Complex64)>(k1: Complex64, k2: Complex64, tau: f64, z0: F, t: f64) -> Result<Complex64> {
    if tau == 0.0 {
        return Ok((-(k1 - k2) * t).exp() * z0(0.0).0);
    }
    let kbar = k2 * (k1 * tau).exp();
    let mut z = (-k1 * (t + tau)).exp() * delayed_exp_c(kbar, tau, t)? * z0(-tau).0;
    for (s, w) in history_rule(tau, t, 16) {
        let (v, dv) = z0(s);
        z += w * (-k1 * (t - s)).exp() * delayed_exp_c(kbar, tau, t - tau - s)? * (dv + k1 * v);
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSymbols {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c1_tilde: f64,
}

pub fn linear_symbols(model: &Model, wave: &WaveCharacteristics, c: f64) -> Result<LinearSymbols> {
    let m = &model.monostable;
    let l = wave.lambda_star;
    let c1 = c * l + 1.0 + m.d1(0.0);
    let c2 = m.b1(0.0);
    let c3 = c2 * heat_moment(model.heat, l, c * model.tau);
    let c1_tilde = c1 - exp_moment(&model.kernel, l)?;
    Ok(LinearSymbols { c1, c2, c3, c1_tilde })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub eta: Vec<f64>,
    pub a: Complex64,
    pub b: Complex64,
    pub bcal: Complex64,
}

/// `A(eta)` and `B(eta)` from the kernel quadrature and the Gaussian transform of `f_beta`.
pub fn mode_symbols(model: &Model, wave: &WaveCharacteristics, c: f64, eta: &[f64]) -> Result<ModeCoefficients> {
    if eta.is_empty() || eta.len() > 2 {
        return Err(Error::InvalidArgument(format!("frequency must have 1 or 2 components, got {}", eta.len())));
    }
    let s = linear_symbols(model, wave, c)?;
    let l = wave.lambda_star;
    let beta = model.heat.beta;
    let mut jw = model.kernel.weighted_transform(l, eta[0])?;
    // e^{beta z^2} at z = lambda + i eta
    let mut heat = (beta * Complex64::new(l, eta[0]).powi(2)).exp();
    if let Some(&e2) = eta.get(1) {
        jw *= model.kernel.weighted_transform(0.0, e2)?;
        heat *= (-beta * e2 * e2).exp();
    }
    let a = s.c1 - jw;
    let b = s.c2 * (-l * c * model.tau).exp() * heat;
    Ok(ModeCoefficients { eta: eta.to_vec(), a, b, bcal: b * (a * model.tau).exp() })
}

/// Linearized problem on a grid, with the weighted kernels sampled like the evolution kernels.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub grid: Grid,
    pub symbols: LinearSymbols,
    pub lambda_star: f64,
    pub c: f64,
    pub tau: f64,
    /// Weighted dispersal along axis 0, and the plain one for axis 1.
    pub kern: [Stencil; 2],
    /// Weighted birth along axis 0 (carries `c2 e^{-lambda* c tau}`), plain for axis 1.
    pub birth: [Stencil; 2],
}

impl LinearProblem {
    pub fn new(model: &Model, wave: &WaveCharacteristics, c: f64, grid: Grid) -> Result<Self> {
        let symbols = linear_symbols(model, wave, c)?;
        let l = wave.lambda_star;
        let dx = grid.dx;
        let plain = grid_kernel_stencil(model, &grid)?;
        let weigh = |s: &Stencil, scale: f64| Stencil {
            min_offset: s.min_offset,
            weights: s.offsets().map(|(k, w)| scale * w * (-l * k as f64 * dx).exp()).collect(),
        };
        let hb = birth_stencil(model.heat, 0.0, dx);
        let scale = symbols.c2 * (-l * c * model.tau).exp();
        Ok(LinearProblem {
            grid,
            symbols,
            lambda_star: l,
            c,
            tau: model.tau,
            kern: [weigh(&plain, 1.0), plain],
            birth: [weigh(&hb, scale), hb],
        })
    }

    fn frequencies(&self) -> Vec<f64> {
        let n = self.grid.points;
        (0..n)
            .map(|j| {
                let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * std::f64::consts::PI * k / (n as f64 * self.grid.dx)
            })
            .collect()
    }

    /// Discrete symbols `(A, B)` at every grid frequency, flat in storage order.
    pub fn discrete_symbols(&self) -> Vec<(Complex64, Complex64)> {
        let eta = self.frequencies();
        let dx = self.grid.dx;
        let tr = |s: &Stencil, e: f64| -> Complex64 { s.offsets().map(|(k, w)| Complex64::from_polar(w, -(k as f64) * dx * e)).sum() };
        let k0: Vec<Complex64> = eta.iter().map(|&e| tr(&self.kern[0], e)).collect();
        let b0: Vec<Complex64> = eta.iter().map(|&e| tr(&self.birth[0], e)).collect();
        if self.grid.dim == 1 {
            return k0.iter().zip(&b0).map(|(k, b)| (self.symbols.c1 - k, *b)).collect();
        }
        let k1: Vec<Complex64> = eta.iter().map(|&e| tr(&self.kern[1], e)).collect();
        let b1: Vec<Complex64> = eta.iter().map(|&e| tr(&self.birth[1], e)).collect();
        let n = self.grid.points;
        (0..n * n)
            .map(|idx| {
                let (i0, i1) = (idx % n, idx / n);
                (self.symbols.c1 - k0[i0] * k1[i1], b0[i0] * b1[i1])
            })
            .collect()
    }
}

fn fft_field(grid: &Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points;
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    if grid.dim == 1 {
        plan.process(data);
    } else {
        plan.process(data); // rows, n at a time
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
    if inverse {
        let scale = 1.0 / grid.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

/// History `v0(s, x1, x2)` and its `s`-derivative.
pub type LinearHistory<'a> = &'a dyn Fn(f64, f64, f64) -> (f64, f64);

/// Per-mode evaluation of the solution formula on the periodic grid.
pub struct FormulaSolver<'a> {
    problem: &'a LinearProblem,
    symbols: Vec<(Complex64, Complex64)>,
    history: LinearHistory<'a>,
    now_hat: Vec<Complex64>,
}

impl<'a> FormulaSolver<'a> {
    pub fn new(problem: &'a LinearProblem, history: LinearHistory<'a>) -> Self {
        let mut s = FormulaSolver { problem, symbols: problem.discrete_symbols(), history, now_hat: vec![] };
        s.now_hat = s.transform_at(0.0).0;
        s
    }

    fn transform_at(&self, s: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let g = &self.problem.grid;
        let (mut v, mut dv): (Vec<Complex64>, Vec<Complex64>) = (0..g.len())
            .map(|k| {
                let (x1, x2) = g.position(k);
                let (a, b) = (self.history)(s, x1, x2);
                (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
            })
            .unzip();
        fft_field(g, &mut v, false);
        fft_field(g, &mut dv, false);
        (v, dv)
    }

    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
        }
        let tau = self.problem.tau;
        let mut hat: Vec<Complex64> = if tau == 0.0 {
            self.symbols.iter().zip(&self.now_hat).map(|((a, b), v)| (-(a - b) * t).exp() * v).collect()
        } else {
            let start = self.transform_at(-tau).0;
            let rule = history_rule(tau, t, 16);
            let samples: Vec<(f64, f64, Vec<Complex64>, Vec<Complex64>)> = rule
                .iter()
                .map(|&(s, w)| {
                    let (v, dv) = self.transform_at(s);
                    (s, w, v, dv)
                })
                .collect();
            let mut out = Vec::with_capacity(self.symbols.len());
            for (idx, &(a, b)) in self.symbols.iter().enumerate() {
                let kbar = b * (a * tau).exp();
                let mut z = (-a * (t + tau)).exp() * delayed_exp_c(kbar, tau, t)? * start[idx];
                for (s, w, v, dv) in &samples {
                    z += *w * (-a * (t - s)).exp() * delayed_exp_c(kbar, tau, t - tau - s)? * (dv[idx] + a * v[idx]);
                }
                out.push(z);
            }
            out
        };
        fft_field(&self.problem.grid, &mut hat, true);
        Ok(hat.iter().map(|z| z.re).collect())
    }
}

pub fn linear_solve_formula(problem: &LinearProblem, history: LinearHistory<'_>, t: f64) -> Result<Vec<f64>> {
    FormulaSolver::new(problem, history).at(t)
}

/// Exponential Euler on the linear equation; with `richardson` the dt and dt/2 runs are combined.
pub fn linear_solve_direct(problem: &LinearProblem, history: LinearHistory<'_>, t: f64, dt: f64, richardson: bool) -> Result<Vec<f64>> {
    let coarse = direct_run(problem, history, t, dt)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = direct_run(problem, history, t, 0.5 * dt)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| 2.0 * f - c).collect())
}

fn direct_run(problem: &LinearProblem, history: LinearHistory<'_>, t: f64, dt: f64) -> Result<Vec<f64>> {
    let g = problem.grid;
    let m = delay_steps(problem.tau, dt)?;
    let steps = (t / dt).round();
    if (steps * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(Error::InvalidArgument(format!("t = {t} is not a multiple of dt = {dt}")));
    }
    let sample = |s: f64| -> Vec<f64> {
        (0..g.len())
            .map(|k| {
                let (x1, x2) = g.position(k);
                history(s, x1, x2).0
            })
            .collect()
    };
    let mut hist: std::collections::VecDeque<Vec<f64>> = (0..m).map(|j| sample(-problem.tau + j as f64 * dt)).collect();
    let mut v = sample(0.0);
    let zero = [AxisBoundary::clamp(0.0, 0.0); 2];
    let kern = AxisConv::new(&problem.kern, &g);
    let birth = AxisConv::new(&problem.birth, &g);
    let c1 = problem.symbols.c1;
    let decay = (-c1 * dt).exp();
    let gain = -(-c1 * dt).exp_m1() / c1;
    for _ in 0..steps as usize {
        let j = kern.apply(&v, &g, &zero);
        let b = birth.apply(hist.front().unwrap_or(&v), &g, &zero);
        let next: Vec<f64> = v.iter().zip(j.iter().zip(&b)).map(|(u, (j, b))| decay * u + gain * (j + b)).collect();
        if m > 0 {
            hist.pop_front();
            hist.push_back(std::mem::replace(&mut v, next));
        } else {
            v = next;
        }
    }
    Ok(v)
}

// separable convolution with different stencils per axis
struct AxisConv {
    axes: Vec<ProductConvolver>,
}

impl AxisConv {
    fn new(stencils: &[Stencil; 2], g: &Grid) -> Self {
        AxisConv { axes: stencils[..g.dim].iter().map(|s| ProductConvolver::new(s.clone(), &Grid { dim: 1, ..*g }, ConvPath::Auto)).collect() }
    }

    fn apply(&self, field: &[f64], g: &Grid, bc: &[AxisBoundary; 2]) -> Vec<f64> {
        if g.dim == 1 {
            return self.axes[0].apply(field, g, bc);
        }
        let n = g.points;
        let line_grid = Grid { dim: 1, ..*g };
        let mut out = vec![0.0; field.len()];
        for r in 0..n {
            let o = self.axes[0].apply(&field[r * n..(r + 1) * n], &line_grid, bc);
            out[r * n..(r + 1) * n].copy_from_slice(&o);
        }
        let mut col = vec![0.0; n];
        for c in 0..n {
            for i in 0..n {
                col[i] = out[i * n + c];
            }
            let o = self.axes[1].apply(&col, &line_grid, &[bc[1], bc[1]]);
            for i in 0..n {
                out[i * n + c] = o[i];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub algebraic_slope: f64,
    pub exp_rate: f64,
    pub slope_stderr: f64,
    pub rate_stderr: f64,
    pub samples: usize,
}

/// Least squares fit of `log |v| = const - a log t - mu t` over `window`.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1 && t > 0.0).collect();
    if pts.len() < 10 {
        return Err(Error::InvalidArgument(format!("{} samples in [{}, {}], need at least 10", pts.len(), window.0, window.1)));
    }
    if let Some(&(t, v)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::SignalVanished(format!("norm {v} at t = {t}")));
    }
    let lt: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (b, se) = regression2(&lt, &t, &y);
    Ok(DecayFit { algebraic_slope: -b[1], exp_rate: -b[2], slope_stderr: se[1], rate_stderr: se[2], samples: pts.len() })
}

/// Fitted `eps` with `e^{-k1 t} e_tau^{kbar t} ~ C e^{-eps (k1 - k2) t}` on `t in [5 tau, 50 tau]`.
pub fn fit_epsilon(k1: f64, k2: f64, tau: f64) -> Result<f64> {
    if !(k1 > k2 && k2 >= 0.0 && tau > 0.0) {
        return Err(Error::InvalidArgument(format!("need k1 > k2 >= 0 and tau > 0, got {k1}, {k2}, {tau}")));
    }
    let kbar = k2 * (k1 * tau).exp();
    let n = 200;
    let mut ts = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let t = tau * (5.0 + 45.0 * i as f64 / (n - 1) as f64);
        ts.push(t);
        ys.push(-k1 * t + delayed_exp(kbar, tau, t)?.ln());
    }
    let line = crate::fit::linear_regression(&ts, &ys);
    Ok(-line.slope / (k1 - k2))
}
