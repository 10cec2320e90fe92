//! Delayed nonlocal Cauchy problem in one and two space dimensions.
//!
//! The step is exponential Euler on the shifted form
//!
//! ```text
//! u_t + eta0 u = J*u + (eta0 - 1) u - d(u) + int f_beta(y) b(u(t - tau, x - y)) dy
//! ```
//!
//! which is monotone for every `dt` because the right side is nondecreasing
//! in `u` on `[0, u+]`.

use std::collections::VecDeque;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::monostable::Monostable;
use crate::monostable::contraction_constants;
use crate::profile::{LeftTail, Profile};
use crate::stencil::{birth_stencil, kernel_stencil, Stencil};

/// Cap on stored nodes per field.
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FarField {
    /// Constant value outside the grid.
    Clamp(f64),
    /// Edge value continued outward.
    Replicate,
    /// Edge value times `e^{-rate d}` at distance `d` beyond the edge.
    Exponential { rate: f64 },
}

impl FarField {
    /// Value `j >= 1` nodes beyond an edge holding `edge`.
    #[inline]
    pub fn ghost(self, edge: f64, j: usize, dx: f64) -> f64 {
        match self {
            FarField::Clamp(v) => v,
            FarField::Replicate => edge,
            FarField::Exponential { rate } => edge * (-rate * j as f64 * dx).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBoundary {
    pub left: FarField,
    pub right: FarField,
}

impl AxisBoundary {
    pub fn clamp(left: f64, right: f64) -> Self {
        AxisBoundary { left: FarField::Clamp(left), right: FarField::Clamp(right) }
    }

    pub fn replicate() -> Self {
        AxisBoundary { left: FarField::Replicate, right: FarField::Replicate }
    }
}

/// Uniform tensor grid; axis 0 is the propagation direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub dx: f64,
    /// Centre of the grid per axis.
    pub origin: [f64; 2],
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0) || points < 3 {
            return Err(Error::InvalidArgument(format!("need half_width > 0 and at least 3 points, got {half_width}, {points}")));
        }
        if points.checked_pow(dim as u32).map_or(true, |n| n > MAX_POINTS) {
            return Err(Error::InvalidArgument(format!("{points}^{dim} nodes exceed the budget of {MAX_POINTS}")));
        }
        Ok(Grid { dim, half_width, points, dx: 2.0 * half_width / (points - 1) as f64, origin: [0.0; 2] })
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] - self.half_width + i as f64 * self.dx
    }

    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(axis, i)).collect()
    }

    /// `(x1, x2)` of flat index `k`; `x2 = 0` in 1-D.
    pub fn position(&self, k: usize) -> (f64, f64) {
        let (i0, i1) = (k % self.points, k / self.points);
        (self.coord(0, i0), if self.dim == 2 { self.coord(1, i1) } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvPath {
    Direct,
    Fft,
    #[default]
    Auto,
}

/// One-dimensional convolution along grid lines with far-field extension.
#[derive(Clone)]
pub struct LineConvolver {
    stencil: Stencil,
    n: usize,
    dx: f64,
    pad: usize,
    use_fft: bool,
    nfft: usize,
    forward: Option<Arc<dyn Fft<f64>>>,
    inverse: Option<Arc<dyn Fft<f64>>>,
    spectrum: Vec<Complex64>,
}

impl std::fmt::Debug for LineConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineConvolver").field("n", &self.n).field("pad", &self.pad).field("use_fft", &self.use_fft).finish()
    }
}

impl LineConvolver {
    pub fn new(stencil: Stencil, n: usize, dx: f64, path: ConvPath) -> Self {
        let pad = stencil.reach();
        let use_fft = match path {
            ConvPath::Direct => false,
            ConvPath::Fft => true,
            ConvPath::Auto => stencil.weights.len() > 24,
        };
        let mut conv = LineConvolver { stencil, n, dx, pad, use_fft, nfft: 0, forward: None, inverse: None, spectrum: vec![] };
        if use_fft {
            let len = n + 2 * pad + conv.stencil.weights.len() - 1;
            let nfft = len.next_power_of_two();
            let mut planner = FftPlanner::new();
            let fwd = planner.plan_fft_forward(nfft);
            let inv = planner.plan_fft_inverse(nfft);
            let mut spec = vec![Complex64::new(0.0, 0.0); nfft];
            for (s, &w) in spec.iter_mut().zip(&conv.stencil.weights) {
                s.re = w / nfft as f64;
            }
            fwd.process(&mut spec);
            conv.nfft = nfft;
            conv.forward = Some(fwd);
            conv.inverse = Some(inv);
            conv.spectrum = spec;
        }
        conv
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    fn extend(&self, line: &[f64], bc: AxisBoundary) -> Vec<f64> {
        let (p, dx) = (self.pad, self.dx);
        let mut ext = Vec::with_capacity(self.n + 2 * p);
        ext.extend((0..p).map(|i| bc.left.ghost(line[0], p - i, dx)));
        ext.extend_from_slice(line);
        ext.extend((1..=p).map(|j| bc.right.ghost(line[self.n - 1], j, dx)));
        ext
    }

    pub fn apply(&self, line: &[f64], bc: AxisBoundary) -> Vec<f64> {
        if self.use_fft {
            let mut out = vec![0.0; self.n];
            self.apply_pair(line, None, bc, &mut out, None);
            out
        } else {
            let ext = self.extend(line, bc);
            self.stencil.apply_range(&ext, self.pad, 0, self.n as isize - 1)
        }
    }

    // Two real lines share one complex transform.
    fn apply_pair(&self, a: &[f64], b: Option<&[f64]>, bc: AxisBoundary, out_a: &mut [f64], out_b: Option<&mut [f64]>) {
        let ea = self.extend(a, bc);
        let eb = b.map(|b| self.extend(b, bc));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nfft];
        for (i, v) in ea.iter().enumerate() {
            buf[i].re = *v;
        }
        if let Some(eb) = &eb {
            for (i, v) in eb.iter().enumerate() {
                buf[i].im = *v;
            }
        }
        self.forward.as_ref().unwrap().process(&mut buf);
        for (x, s) in buf.iter_mut().zip(&self.spectrum) {
            *x *= s;
        }
        self.inverse.as_ref().unwrap().process(&mut buf);
        let shift = (self.pad as isize - self.stencil.min_offset) as usize;
        for (i, o) in out_a.iter_mut().enumerate() {
            *o = buf[shift + i].re;
        }
        if let Some(ob) = out_b {
            for (i, o) in ob.iter_mut().enumerate() {
                *o = buf[shift + i].im;
            }
        }
    }

    /// Convolve every line of `field` along `axis`.
    pub fn apply_axis(&self, field: &[f64], grid: &Grid, axis: usize, bc: AxisBoundary) -> Vec<f64> {
        let n = grid.points;
        if grid.dim == 1 {
            return self.apply(field, bc);
        }
        let mut out = vec![0.0; field.len()];
        let line = |j: usize| -> Vec<f64> {
            if axis == 0 {
                field[j * n..(j + 1) * n].to_vec()
            } else {
                (0..n).map(|i| field[i * n + j]).collect()
            }
        };
        let store = |j: usize, vals: &[f64], out: &mut Vec<f64>| {
            if axis == 0 {
                out[j * n..(j + 1) * n].copy_from_slice(vals);
            } else {
                for (i, v) in vals.iter().enumerate() {
                    out[i * n + j] = *v;
                }
            }
        };
        let mut j = 0;
        while j < n {
            if self.use_fft && j + 1 < n {
                let (a, b) = (line(j), line(j + 1));
                let (mut oa, mut ob) = (vec![0.0; n], vec![0.0; n]);
                self.apply_pair(&a, Some(&b), bc, &mut oa, Some(&mut ob));
                store(j, &oa, &mut out);
                store(j + 1, &ob, &mut out);
                j += 2;
            } else {
                let o = self.apply(&line(j), bc);
                store(j, &o, &mut out);
                j += 1;
            }
        }
        out
    }
}

/// Separable convolution with the same 1-D stencil along every axis.
#[derive(Debug, Clone)]
pub struct ProductConvolver {
    line: LineConvolver,
}

impl ProductConvolver {
    pub fn new(stencil: Stencil, grid: &Grid, path: ConvPath) -> Self {
        ProductConvolver { line: LineConvolver::new(stencil, grid.points, grid.dx, path) }
    }

    pub fn stencil(&self) -> &Stencil {
        self.line.stencil()
    }

    pub fn apply(&self, field: &[f64], grid: &Grid, bcs: &[AxisBoundary; 2]) -> Vec<f64> {
        let once = self.line.apply_axis(field, grid, 0, bcs[0]);
        if grid.dim == 1 {
            once
        } else {
            self.line.apply_axis(&once, grid, 1, bcs[1])
        }
    }
}

/// Kernel stencil on a grid, rejecting kernels wider than the grid.
pub fn grid_kernel_stencil(model: &Model, grid: &Grid) -> Result<Stencil> {
    let w = model.kernel.window();
    if w > grid.half_width {
        return Err(Error::GridTooSmall { kernel_half_width: w, grid_half_width: grid.half_width });
    }
    kernel_stencil(&model.kernel, grid.dx)
}

/// `(J*u)` with far-field extension.
pub fn convolve(field: &[f64], grid: &Grid, model: &Model, bcs: &[AxisBoundary; 2], path: ConvPath) -> Result<Vec<f64>> {
    if field.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!("field has {} values, grid {}", field.len(), grid.len())));
    }
    let conv = ProductConvolver::new(grid_kernel_stencil(model, grid)?, grid, path);
    Ok(conv.apply(field, grid, bcs))
}

/// Full two-dimensional direct sum with a product stencil; reference for the separable path.
pub fn convolve_2d_direct(field: &[f64], grid: &Grid, stencil: &Stencil, bcs: &[AxisBoundary; 2]) -> Vec<f64> {
    let n = grid.points as isize;
    let dx = grid.dx;
    // extension along one axis given a lookup of in-range values
    let extend = |i: isize, bc: AxisBoundary, at: &dyn Fn(usize) -> f64| -> f64 {
        if i < 0 {
            bc.left.ghost(at(0), (-i) as usize, dx)
        } else if i >= n {
            bc.right.ghost(at(n as usize - 1), (i - n + 1) as usize, dx)
        } else {
            at(i as usize)
        }
    };
    // rows are extended along axis 0 before axis 1 ghosts are formed, as in the separable path
    let value = |i0: isize, i1: isize| -> f64 {
        let row = |j1: usize| extend(i0, bcs[0], &|j0| field[j1 * n as usize + j0]);
        extend(i1, bcs[1], &row)
    };
    let mut out = vec![0.0; field.len()];
    for i1 in 0..n {
        for i0 in 0..n {
            let mut s = 0.0;
            for (k1, w1) in stencil.offsets() {
                for (k0, w0) in stencil.offsets() {
                    s += w1 * w0 * value(i0 - k0, i1 - k1);
                }
            }
            out[(i1 * n + i0) as usize] = s;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Etd1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub dt: f64,
    pub eta0: f64,
    pub scheme: Scheme,
}

impl StepParams {
    pub fn for_model(model: &Model, dt: f64) -> Self {
        StepParams { dt, eta0: contraction_constants(&model.monostable).eta0, scheme: Scheme::Etd1 }
    }
}

/// Number of steps per delay; errors unless `tau` is a multiple of `dt`.
pub fn delay_steps(tau: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let m = (tau / dt).round();
    if (m * dt - tau).abs() > 1e-9 * dt.max(tau) {
        return Err(Error::InvalidArgument(format!("tau = {tau} is not an integer multiple of dt = {dt}")));
    }
    Ok(m as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid,
    pub now: Vec<f64>,
    /// `history[j] = u(t - tau + j dt)`, `j < tau/dt`.
    pub history: VecDeque<Vec<f64>>,
    pub time: f64,
    pub far_field: [AxisBoundary; 2],
}

impl FieldState {
    /// Sample `u0(s, x1, x2)` on `s in [-tau, 0]`.
    pub fn from_fn<F: Fn(f64, f64, f64) -> f64>(
        grid: Grid,
        tau: f64,
        dt: f64,
        far_field: [AxisBoundary; 2],
        u0: F,
    ) -> Result<Self> {
        let m = delay_steps(tau, dt)?;
        let sample = |s: f64| -> Vec<f64> {
            (0..grid.len())
                .map(|k| {
                    let (x1, x2) = grid.position(k);
                    u0(s, x1, x2)
                })
                .collect()
        };
        let history = (0..m).map(|j| sample(-tau + j as f64 * dt)).collect();
        Ok(FieldState { grid, now: sample(0.0), history, time: 0.0, far_field })
    }

    pub fn constant_history(grid: Grid, tau: f64, dt: f64, far_field: [AxisBoundary; 2], field: Vec<f64>) -> Result<Self> {
        if field.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("field has {} values, grid {}", field.len(), grid.len())));
        }
        let m = delay_steps(tau, dt)?;
        Ok(FieldState { grid, history: (0..m).map(|_| field.clone()).collect(), now: field, time: 0.0, far_field })
    }

    /// All stored fields, oldest first, ending with `now`.
    pub fn fields(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.history.iter().chain(std::iter::once(&self.now))
    }

    fn fields_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.history.iter_mut().chain(std::iter::once(&mut self.now))
    }

    /// Move the grid by `k` nodes towards negative `x1`.
    pub fn shift_window(&mut self, k: usize) {
        if k == 0 {
            return;
        }
        let n = self.grid.points;
        let rows = self.grid.len() / n;
        let left = self.far_field[0].left;
        let dx = self.grid.dx;
        for f in self.fields_mut() {
            for r in 0..rows {
                let row = &mut f[r * n..(r + 1) * n];
                let edge = row[0];
                if k < n {
                    row.copy_within(0..n - k, k);
                }
                for (i, x) in row[..k.min(n)].iter_mut().enumerate() {
                    *x = left.ghost(edge, k - i, dx);
                }
            }
        }
        self.grid.origin[0] -= k as f64 * self.grid.dx;
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot { time: self.time, origin: self.grid.origin, values: self.now.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub origin: [f64; 2],
    pub values: Vec<f64>,
}

/// Time stepper for the nonlinear problem.
#[derive(Debug, Clone)]
pub struct Evolution {
    monostable: Monostable,
    params: StepParams,
    disp: ProductConvolver,
    birth: Option<ProductConvolver>,
    decay: f64,
    gain: f64,
    steps: u64,
    /// Keep the grid centred on `x1 = -c t` when set.
    pub track_speed: Option<f64>,
    pub state: FieldState,
}

impl Evolution {
    pub fn new(model: &Model, state: FieldState, params: StepParams, path: ConvPath) -> Result<Self> {
        let m = delay_steps(model.tau, params.dt)?;
        if state.history.len() != m {
            return Err(Error::ShapeMismatch(format!("history holds {} fields, tau/dt = {m}", state.history.len())));
        }
        if !(params.eta0 >= contraction_constants(&model.monostable).eta0 - 1e-12) {
            return Err(Error::InvalidArgument(format!("eta0 = {} below the contraction constant", params.eta0)));
        }
        for f in state.fields() {
            if f.len() != state.grid.len() {
                return Err(Error::ShapeMismatch(format!("field has {} values, grid {}", f.len(), state.grid.len())));
            }
        }
        let grid = state.grid;
        let disp = ProductConvolver::new(grid_kernel_stencil(model, &grid)?, &grid, path);
        let birth = (model.heat.beta > 0.0).then(|| ProductConvolver::new(birth_stencil(model.heat, 0.0, grid.dx), &grid, path));
        let decay = (-params.eta0 * params.dt).exp();
        let gain = -(-params.eta0 * params.dt).exp_m1() / params.eta0;
        Ok(Evolution { monostable: model.monostable, params, disp, birth, decay, gain, steps: 0, track_speed: None, state })
    }

    pub fn params(&self) -> StepParams {
        self.params
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self) -> Result<()> {
        let m = &self.monostable;
        let st = &self.state;
        let grid = st.grid;
        let eta = self.params.eta0;
        let conv = self.disp.apply(&st.now, &grid, &st.far_field);
        let delayed = st.history.front().unwrap_or(&st.now);
        let bvals: Vec<f64> = delayed.iter().map(|&u| m.b(u)).collect();
        let birth = match &self.birth {
            None => bvals,
            Some(c) => {
                let bc = st.far_field.map(|a| AxisBoundary {
                    left: map_far(a.left, |u| m.b(u)),
                    right: map_far(a.right, |u| m.b(u)),
                });
                c.apply(&bvals, &grid, &bc)
            }
        };
        let (lo, hi) = (-1e-10, m.u_plus + 1e-10);
        let mut next = Vec::with_capacity(st.now.len());
        for (k, ((&u, j), b)) in st.now.iter().zip(&conv).zip(&birth).enumerate() {
            let r = j + (eta - 1.0) * u - m.d(u) + b;
            let v = self.decay * u + self.gain * r;
            if !(v >= lo && v <= hi) {
                return Err(Error::MonotonicityBroken { value: v, low: 0.0, high: m.u_plus, node: k });
            }
            next.push(v);
        }
        let st = &mut self.state;
        if !st.history.is_empty() {
            st.history.pop_front();
            st.history.push_back(std::mem::replace(&mut st.now, next));
        } else {
            st.now = next;
        }
        self.steps += 1;
        st.time = self.steps as f64 * self.params.dt;
        if let Some(c) = self.track_speed {
            let lag = st.grid.origin[0] + c * st.time;
            if lag >= st.grid.dx {
                st.shift_window((lag / st.grid.dx).floor() as usize);
            }
        }
        Ok(())
    }

    /// Advance to time `t_end`, returning snapshots every `output_every` (and at the end).
    pub fn run(&mut self, t_end: f64, output_every: f64) -> Result<Vec<Snapshot>> {
        let dt = self.params.dt;
        let every = ((output_every / dt).round() as u64).max(1);
        let total = ((t_end / dt).round() as u64).saturating_sub(self.steps);
        let mut out = vec![self.state.snapshot()];
        for _ in 0..total {
            self.step()?;
            if self.steps % every == 0 {
                out.push(self.state.snapshot());
            }
        }
        if out.last().map(|s| s.time) != Some(self.state.time) {
            out.push(self.state.snapshot());
        }
        Ok(out)
    }
}

fn map_far(f: FarField, g: impl Fn(f64) -> f64) -> FarField {
    match f {
        FarField::Clamp(v) => FarField::Clamp(g(v)),
        FarField::Replicate => FarField::Replicate,
        FarField::Exponential { rate } => FarField::Exponential { rate },
    }
}

/// Far field of a front along axis 0, replicated along axis 1.
pub fn front_far_field(u_plus: f64) -> [AxisBoundary; 2] {
    [AxisBoundary::clamp(0.0, u_plus), AxisBoundary::replicate()]
}

/// Far field continuing the profile's leading exponential tail on the left.
pub fn profile_far_field(profile: &Profile) -> [AxisBoundary; 2] {
    let left = match profile.left_tail {
        LeftTail::Exponential { lambda1, .. } => FarField::Exponential { rate: lambda1 },
        LeftTail::Flat => FarField::Clamp(0.0),
    };
    [AxisBoundary { left, right: FarField::Clamp(profile.u_plus) }, AxisBoundary::replicate()]
}

/// Pointwise min and max of the history against `phi(x1 + c s)`.
pub fn squeeze_init(u0: &FieldState, profile: &Profile, c: f64, dt: f64) -> (FieldState, FieldState) {
    let m = u0.history.len();
    let mut lower = u0.clone();
    let mut upper = u0.clone();
    let grid = u0.grid;
    let times: Vec<f64> = (0..m).map(|j| -(m as f64) * dt + j as f64 * dt).chain(std::iter::once(u0.time)).collect();
    for ((lo, up), s) in lower.fields_mut().zip(upper.fields_mut()).zip(times) {
        for k in 0..grid.len() {
            let (x1, _) = grid.position(k);
            let p = profile.eval(x1 + c * s);
            lo[k] = lo[k].min(p);
            up[k] = up[k].max(p);
        }
    }
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub max_violation: f64,
    pub pass: bool,
}

/// Max over time and space of `(lower - upper)+`.
pub fn check_ordering(lower: &[Snapshot], upper: &[Snapshot]) -> Result<OrderingReport> {
    if lower.len() != upper.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} snapshots", lower.len(), upper.len())));
    }
    let mut worst: f64 = 0.0;
    for (a, b) in lower.iter().zip(upper) {
        if a.values.len() != b.values.len() || a.origin != b.origin || (a.time - b.time).abs() > 1e-12 {
            return Err(Error::ShapeMismatch(format!("snapshots at t = {} and t = {} do not share a grid", a.time, b.time)));
        }
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max(x - y);
        }
    }
    Ok(OrderingReport { max_violation: worst, pass: worst < 1e-10 })
}

/// `sup |u(t, x) - phi(x1 + c t)|` per snapshot.
pub fn moving_frame_error(traj: &[Snapshot], grid: &Grid, profile: &Profile, c: f64) -> Result<Vec<(f64, f64)>> {
    traj.iter()
        .map(|s| {
            let g = Grid { origin: s.origin, ..*grid };
            let mut worst: f64 = 0.0;
            for (k, u) in s.values.iter().enumerate() {
                let (x1, _) = g.position(k);
                worst = worst.max((u - profile.eval_checked(x1 + c * s.time)?).abs());
            }
            Ok((s.time, worst))
        })
        .collect()
}

/// `sup |u - v|` per snapshot pair.
pub fn trajectory_distance(a: &[Snapshot], b: &[Snapshot]) -> Result<Vec<(f64, f64)>> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} snapshots", a.len(), b.len())));
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            if x.origin != y.origin || x.values.len() != y.values.len() {
                return Err(Error::ShapeMismatch(format!("snapshots at t = {} do not share a grid", x.time)));
            }
            let d = x.values.iter().zip(&y.values).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            Ok((x.time, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{make_kernel, HeatKernelParams, KernelSpec};
    use crate::monostable::{preset, Nonlinearity};

    fn fisher(tau: f64, beta: f64) -> Model {
        Model::new(
            preset(Nonlinearity::FisherKpp).unwrap(),
            make_kernel(KernelSpec::gaussian(1.0)).unwrap(),
            HeatKernelParams::new(beta).unwrap(),
            tau,
        )
        .unwrap()
    }

    #[test]
    fn constant_fields_are_reproduced() {
        let m = fisher(0.0, 0.0);
        let g = Grid::new(1, 20.0, 401).unwrap();
        for v in [0.0, 1.0] {
            let u = vec![v; g.len()];
            let j = convolve(&u, &g, &m, &[AxisBoundary::clamp(v, v), AxisBoundary::replicate()], ConvPath::Auto).unwrap();
            assert!(j.iter().all(|x| (x - v).abs() < 1e-14));
        }
    }

    #[test]
    fn step_has_centre_value_half() {
        let m = fisher(0.0, 0.0);
        let g = Grid::new(1, 20.0, 401).unwrap();
        let u: Vec<f64> = g.nodes(0).iter().map(|&x| if x > 0.0 { 1.0 } else if x == 0.0 { 0.5 } else { 0.0 }).collect();
        let j = convolve(&u, &g, &m, &front_far_field(1.0), ConvPath::Direct).unwrap();
        assert!((j[200] - 0.5).abs() < 1e-14);
        assert!(j.windows(2).all(|w| w[1] >= w[0] - 1e-15));
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = fisher(0.0, 0.0);
        let g = Grid::new(1, 30.0, 601).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>()).collect();
        let bc = front_far_field(1.0);
        let a = convolve(&u, &g, &m, &bc, ConvPath::Direct).unwrap();
        let b = convolve(&u, &g, &m, &bc, ConvPath::Fft).unwrap();
        let err = a.iter().zip(&b).fold(0.0f64, |e, (x, y)| e.max((x - y).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn narrow_grid_rejected() {
        let m = fisher(0.0, 0.0);
        let g = Grid::new(1, 5.0, 101).unwrap();
        assert!(matches!(convolve(&vec![0.0; 101], &g, &m, &front_far_field(1.0), ConvPath::Auto), Err(Error::GridTooSmall { .. })));
    }

    #[test]
    fn delay_must_be_a_multiple_of_dt() {
        assert_eq!(delay_steps(1.0, 0.25).unwrap(), 4);
        assert!(delay_steps(1.0, 0.3).is_err());
        assert_eq!(delay_steps(0.0, 0.1).unwrap(), 0);
    }

    #[test]
    fn equilibria_are_fixed() {
        for (tau, beta) in [(0.0, 0.0), (0.5, 0.0), (0.5, 0.3)] {
            let m = fisher(tau, beta);
            let g = Grid::new(1, 20.0, 201).unwrap();
            for v in [0.0, 1.0] {
                let st = FieldState::constant_history(g, tau, 0.05, [AxisBoundary::clamp(v, v), AxisBoundary::replicate()], vec![v; g.len()]).unwrap();
                let mut ev = Evolution::new(&m, st, StepParams::for_model(&m, 0.05), ConvPath::Auto).unwrap();
                ev.run(2.0, 1.0).unwrap();
                assert!(ev.state.now.iter().all(|x| (x - v).abs() < 1e-10));
            }
        }
    }

    #[test]
    fn window_shift_moves_values_right() {
        let g = Grid::new(1, 2.0, 5).unwrap();
        let mut st = FieldState::constant_history(g, 0.0, 0.1, front_far_field(1.0), vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        st.shift_window(2);
        assert_eq!(st.now, vec![0.0, 0.0, 0.1, 0.2, 0.3]);
        assert_eq!(st.grid.origin[0], -2.0);
    }
}
