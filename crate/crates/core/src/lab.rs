//! Experiment configuration and the stability pipelines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{
    check_ordering, moving_frame_error, profile_far_field, squeeze_init, trajectory_distance, AxisBoundary, ConvPath, Evolution, FieldState,
    Grid, OrderingReport, Snapshot, StepParams,
};
use crate::kernels::{estimate_symbol_order, make_kernel, HeatKernelParams, KernelFamily, KernelSpec, QuadratureSpec, SymbolOrder};
use crate::linearized::{decay_fit, fit_epsilon, DecayFit, FormulaSolver, LinearProblem, LinearSymbols};
use crate::model::Model;
use crate::monostable::{preset, Nonlinearity};
use crate::profile::{crossing, residual as profile_residual, solve_profile_with, tail_exponents, Profile, ProfileOptions};
use crate::wavespeed::{critical_pair, decay_roots, g_c, h_c, mu_bound, select_xstar, xstar_margin, MuBound, SpeedRoots, WaveCharacteristics};

pub const NONCRITICAL_MIN_RATE: f64 = 0.1;
pub const NONCRITICAL_MIN_SLOPE: f64 = 0.3;
pub const CRITICAL_RATE_TOL: f64 = 0.02;
pub const CRITICAL_SLOPE_TOL: f64 = 0.15;
pub const CRITICAL_SLOPE_TOL_2D: f64 = 0.3;
/// Errors below this multiple of `u+` are rounding noise and end the fit window.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Speeds within this distance of `c*` are treated as critical.
pub const CRITICAL_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
}

impl KernelConfig {
    pub fn spec(&self) -> KernelSpec {
        let base = match self.family {
            KernelFamily::Gaussian { sigma } => KernelSpec::gaussian(sigma),
            KernelFamily::CompactBump { radius } => KernelSpec::compact_bump(radius),
            KernelFamily::CauchyTruncated { scale, cutoff } => KernelSpec::cauchy_truncated(scale, cutoff),
        };
        KernelSpec { quadrature: self.quadrature.unwrap_or(base.quadrature), ..base }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct HeatConfig {
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DelayConfig {
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpeedSelector {
    #[default]
    Critical,
    Factor { value: f64 },
    Explicit { value: f64 },
}

impl SpeedSelector {
    pub fn resolve(&self, c_star: f64) -> f64 {
        match *self {
            SpeedSelector::Critical => c_star,
            SpeedSelector::Factor { value } => value * c_star,
            SpeedSelector::Explicit { value } => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub half_width: f64,
    pub intervals: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { half_width: 60.0, intervals: 6000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { dim: 1, half_width: 50.0, points: 1001 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub output_every: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dt: 0.05, t_end: 40.0, output_every: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    None,
    /// Smooth compactly supported bump `amplitude * exp(1 - 1/(1 - r^2))`, `r = |x - center| / width`.
    Bump { amplitude: f64, width: f64, center: f64 },
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation::Bump { amplitude: 0.2, width: 5.0, center: 0.0 }
    }
}

impl Perturbation {
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Bump { amplitude, width, center } => bump(amplitude, width, ((x1 - center).powi(2) + x2 * x2).sqrt()),
        }
    }
}

fn bump(amplitude: f64, width: f64, dist: f64) -> f64 {
    let r = dist / width;
    if r < 1.0 {
        amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct FitConfig {
    /// Defaults to `[0.3 T, T]`.
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityConfig {
    pub eps0: f64,
    pub eps1: f64,
    pub l0: usize,
    /// Fraction of the admissible rate bound used for the sup-solution.
    pub mu_fraction: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig { eps0: 0.9, eps1: 1.0, l0: 5, mu_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearConfig {
    pub t_end: f64,
    pub t_start: f64,
    pub samples: usize,
    pub bump_width: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig { t_end: 500.0, t_start: 50.0, samples: 100, bump_width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    ProfileShifted { shift: f64 },
    ProfilePlusBump { amplitude: f64, width: f64, center: f64 },
    Constant { value: f64 },
    CustomCsv { path: String },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::ProfileShifted { shift: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kernel: KernelConfig,
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub heat: HeatConfig,
    #[serde(default)]
    pub delay: DelayConfig,
    #[serde(default)]
    pub speed: SpeedSelector,
    #[serde(default)]
    pub profile: ProfileConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub perturbation: Perturbation,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub stability: StabilityConfig,
    #[serde(default)]
    pub linear: LinearConfig,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub delay_sweep: Vec<f64>,
    #[serde(default = "default_output")]
    pub output: String,
}

fn default_output() -> String {
    "out".into()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.time;
        if !(t.dt > 0.0 && t.t_end > 0.0 && t.output_every > 0.0) {
            return Err(Error::Config(format!("time.dt, time.t_end and time.output_every must be positive, got {t:?}")));
        }
        crate::evolution::delay_steps(self.delay.tau, t.dt).map_err(|e| Error::Config(e.to_string()))?;
        Grid::new(self.grid.dim, self.grid.half_width, self.grid.points).map_err(|e| Error::Config(e.to_string()))?;
        if let Some([a, b]) = self.fit.window {
            if !(a > 0.0 && b > a) {
                return Err(Error::Config(format!("fit.window must satisfy 0 < start < end, got [{a}, {b}]")));
            }
        }
        if !(self.stability.eps0 > 0.0 && self.stability.eps0 < 1.0) {
            return Err(Error::Config(format!("stability.eps0 must lie in (0, 1), got {}", self.stability.eps0)));
        }
        Ok(())
    }

    pub fn fit_window(&self) -> (f64, f64) {
        match self.fit.window {
            Some([a, b]) => (a, b),
            None => (0.3 * self.time.t_end, self.time.t_end),
        }
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(
            preset(self.nonlinearity)?,
            make_kernel(self.kernel.spec())?,
            HeatKernelParams::new(self.heat.beta)?,
            self.delay.tau,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub measured: f64,
    pub target: String,
    pub pass: bool,
}

impl Verdict {
    fn new(name: &str, measured: f64, target: String, pass: bool) -> Self {
        Verdict { name: name.into(), measured, target, pass }
    }
}

/// Weighted norms of `u0 - phi` with `w = e^{-lambda* (x1 - x*)}` left of `x*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorms {
    pub sup: f64,
    pub l1: f64,
    pub l2: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    /// `sup |u - w|`, `w` the scheme evolution of the front.
    pub u: f64,
    pub upper: f64,
    pub lower: f64,
    /// `sup |u - phi(x1 + c t)|`.
    pub u_profile: f64,
    pub left: f64,
    pub right: f64,
    pub left_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub c_star: f64,
    pub lambda_star: f64,
    pub c: f64,
    pub critical: bool,
    pub dim: usize,
    pub alpha: f64,
    pub mu_bound: MuBound,
    pub x_star: f64,
    /// Offset in `xi` of the evolved front's half-level crossing from the profile's at `T`.
    pub front_drift: f64,
    pub weighted_norms: WeightedNorms,
    pub ordering_lower: OrderingReport,
    pub ordering_upper: OrderingReport,
    pub fit_window: (f64, f64),
    pub decay: DecayFit,
    pub decay_upper: Option<DecayFit>,
    pub decay_left: Option<DecayFit>,
    pub decay_right: Option<DecayFit>,
    pub series: Vec<SeriesRow>,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Model, critical pair and speed shared by the pipelines.
pub struct Setup {
    pub model: Model,
    pub wave: WaveCharacteristics,
    pub c: f64,
    pub critical: bool,
}

pub fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    let model = cfg.model().map_err(Error::in_stage("model"))?;
    let wave = critical_pair(&model).map_err(Error::in_stage("critical pair"))?;
    let mut c = cfg.speed.resolve(wave.c_star);
    let critical = (c - wave.c_star).abs() <= CRITICAL_BAND * wave.c_star.max(1.0);
    if critical {
        c = wave.c_star;
    }
    Ok(Setup { model, wave, c, critical })
}

pub fn solve_front(cfg: &ExperimentConfig, s: &Setup) -> Result<Profile> {
    solve_profile_with(&s.model, &s.wave, s.c, cfg.profile.half_width, cfg.profile.intervals, &ProfileOptions::default())
        .map_err(Error::in_stage("profile"))
}

fn evolve_tracked(model: &Model, state: FieldState, dt: f64, c: f64, cfg: &ExperimentConfig) -> Result<Vec<Snapshot>> {
    let mut ev = Evolution::new(model, state, StepParams::for_model(model, dt), ConvPath::Direct)?;
    ev.track_speed = Some(c);
    ev.run(cfg.time.t_end, cfg.time.output_every)
}

/// Full squeeze pipeline with rate fits and verdicts.
pub fn run_stability(cfg: &ExperimentConfig) -> Result<StabilityReport> {
    cfg.validate()?;
    let s = setup(cfg)?;
    let profile = solve_front(cfg, &s)?;
    run_stability_with(cfg, &s, &profile)
}

pub fn run_stability_with(cfg: &ExperimentConfig, s: &Setup, profile: &Profile) -> Result<StabilityReport> {
    let (model, c) = (&s.model, s.c);
    let up = model.u_plus();
    let dt = cfg.time.dt;
    let grid = Grid::new(cfg.grid.dim, cfg.grid.half_width, cfg.grid.points)?;
    let ff = profile_far_field(profile);
    let pert = cfg.perturbation;
    let u0 = FieldState::from_fn(grid, model.tau, dt, ff, |t, x1, x2| (profile.eval(x1 + c * t) + pert.eval(x1, x2)).clamp(0.0, up))?;
    let wave0 = FieldState::from_fn(grid, model.tau, dt, ff, |t, x1, _| profile.eval(x1 + c * t))?;
    let (lower0, upper0) = squeeze_init(&u0, profile, c, dt);

    let x_star = select_xstar(profile, model, c, cfg.stability.eps0).map_err(Error::in_stage("x*"))?;
    let weighted_norms = weighted_norms(&u0, profile, c, s.wave.lambda_star, x_star);
    let bound = mu_bound(model, &s.wave, c, if model.tau == 0.0 { 1.0 } else { cfg.stability.eps1 }).map_err(Error::in_stage("mu bound"))?;

    let run = |st: FieldState, name: &'static str| evolve_tracked(model, st, dt, c, cfg).map_err(Error::in_stage(name));
    let u = run(u0, "evolve u")?;
    let w = run(wave0, "evolve front")?;
    let lo = run(lower0, "evolve lower")?;
    let hi = run(upper0, "evolve upper")?;

    let front_drift = reference_drift(&w, &grid, c, profile)?;
    let ordering_lower = check_ordering(&lo, &u)?;
    let ordering_upper = check_ordering(&u, &hi)?;
    let du = trajectory_distance(&u, &w)?;
    let dhi = trajectory_distance(&hi, &w)?;
    let dlo = trajectory_distance(&lo, &w)?;
    let raw = moving_frame_error(&u, &grid, profile, c).map_err(Error::in_stage("moving frame"))?;
    let mut series = Vec::with_capacity(u.len());
    for (k, (a, b)) in u.iter().zip(&w).enumerate() {
        let (left, right, left_w) = region_split(a, b, &grid, c, x_star, s.wave.lambda_star);
        series.push(SeriesRow { t: a.time, u: du[k].1, upper: dhi[k].1, lower: dlo[k].1, u_profile: raw[k].1, left, right, left_weighted: left_w });
    }
    let window = floor_window(cfg.fit_window(), &series, NOISE_FLOOR * model.u_plus());
    let pick = |f: fn(&SeriesRow) -> f64| series.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    let decay = decay_fit(&pick(|r| r.u), window).map_err(Error::in_stage("decay fit"))?;
    let decay_upper = decay_fit(&pick(|r| r.upper), window).ok();
    let decay_left = decay_fit(&pick(|r| r.left), window).ok();
    let decay_right = decay_fit(&pick(|r| r.right), window).ok();

    let alpha = estimate_symbol_order(&model.kernel).map(|o| o.alpha).unwrap_or(f64::NAN);
    let target = grid.dim as f64 / alpha;
    let mut verdicts = vec![
        Verdict::new("ordering lower <= u", ordering_lower.max_violation, "< 1e-10".into(), ordering_lower.pass),
        Verdict::new("ordering u <= upper", ordering_upper.max_violation, "< 1e-10".into(), ordering_upper.pass),
        Verdict::new("weighted norms finite", weighted_norms.sup, "finite".into(), weighted_norms.finite),
    ];
    if s.critical {
        let tol = if grid.dim == 2 { CRITICAL_SLOPE_TOL_2D } else { CRITICAL_SLOPE_TOL };
        verdicts.push(Verdict::new("exp rate", decay.exp_rate, format!("0 +- {CRITICAL_RATE_TOL}"), decay.exp_rate.abs() <= CRITICAL_RATE_TOL));
        verdicts.push(Verdict::new(
            "algebraic slope",
            decay.algebraic_slope,
            format!("{target:.3} +- {tol}"),
            (decay.algebraic_slope - target).abs() <= tol,
        ));
    } else {
        verdicts.push(Verdict::new("exp rate", decay.exp_rate, format!("> {NONCRITICAL_MIN_RATE}"), decay.exp_rate > NONCRITICAL_MIN_RATE));
        verdicts.push(Verdict::new(
            "algebraic slope",
            decay.algebraic_slope,
            format!(">= {NONCRITICAL_MIN_SLOPE}"),
            decay.algebraic_slope >= NONCRITICAL_MIN_SLOPE,
        ));
    }
    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(StabilityReport {
        c_star: s.wave.c_star,
        lambda_star: s.wave.lambda_star,
        c,
        critical: s.critical,
        dim: grid.dim,
        alpha,
        mu_bound: bound,
        x_star,
        front_drift,
        weighted_norms,
        ordering_lower,
        ordering_upper,
        fit_window: window,
        decay,
        decay_upper,
        decay_left,
        decay_right,
        series,
        verdicts,
        all_pass,
    })
}

// half-level crossing of the evolved front, which must stay inside the middle 90% of the window
fn reference_drift(w: &[Snapshot], grid: &Grid, c: f64, profile: &Profile) -> Result<f64> {
    let n = grid.points;
    let start = profile.half_level_crossing().ok_or_else(|| Error::SignalVanished("profile has no half-level crossing".into()))?;
    let mut drift = 0.0;
    for s in w {
        let row = &s.values[..n];
        let j = crossing(row, 0.5 * profile.u_plus).filter(|&j| j > 0.05 * n as f64 && j < 0.95 * n as f64).ok_or_else(|| {
            Error::DomainTooShort(format!("reference front left the window at t = {}", s.time))
        })?;
        let g = Grid { origin: s.origin, ..*grid };
        let x1 = g.position(j.floor() as usize).0 + j.fract() * grid.dx;
        drift = x1 + c * s.time - start;
    }
    Ok(drift)
}

// cut the window at the first sample under the noise floor
fn floor_window(window: (f64, f64), series: &[SeriesRow], floor: f64) -> (f64, f64) {
    let end = series.iter().find(|r| r.t >= window.0 && r.u < floor).map_or(window.1, |r| r.t.min(window.1));
    (window.0, end)
}

fn weight(xi: f64, lambda: f64, x_star: f64) -> f64 {
    if xi <= x_star {
        (-lambda * (xi - x_star)).exp()
    } else {
        1.0
    }
}

fn weighted_norms(u0: &FieldState, profile: &Profile, c: f64, lambda: f64, x_star: f64) -> WeightedNorms {
    let g = u0.grid;
    let cell = g.dx.powi(g.dim as i32);
    let (mut sup, mut l1, mut l2) = (0.0f64, 0.0, 0.0);
    for (k, u) in u0.now.iter().enumerate() {
        let (x1, _) = g.position(k);
        let v = weight(x1 + c * u0.time, lambda, x_star) * (u - profile.eval(x1 + c * u0.time));
        sup = sup.max(v.abs());
        l1 += v.abs() * cell;
        l2 += v * v * cell;
    }
    let l2 = l2.sqrt();
    WeightedNorms { sup, l1, l2, finite: sup.is_finite() && l1.is_finite() && l2.is_finite() }
}

// (left sup, right sup, weighted left sup) of |a - b| split at x1 = x* - c t
fn region_split(a: &Snapshot, b: &Snapshot, grid: &Grid, c: f64, x_star: f64, lambda: f64) -> (f64, f64, f64) {
    let g = Grid { origin: a.origin, ..*grid };
    let (mut l, mut r, mut lw) = (0.0f64, 0.0f64, 0.0f64);
    for (k, (p, q)) in a.values.iter().zip(&b.values).enumerate() {
        let (x1, _) = g.position(k);
        let xi = x1 + c * a.time;
        let d = (p - q).abs();
        if xi <= x_star {
            l = l.max(d);
            lw = lw.max(d * weight(xi, lambda, x_star));
        } else {
            r = r.max(d);
        }
    }
    (l, r, lw)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayEntry {
    pub tau: f64,
    pub c_star: f64,
    pub c: f64,
    pub exp_rate: f64,
    pub rate_stderr: f64,
    pub algebraic_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayReport {
    pub entries: Vec<DelayEntry>,
    /// Largest increase of the fitted rate between consecutive delays, net of fit error.
    pub worst_increase: f64,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Stability pipeline per delay at the configured speed ratio.
pub fn run_delay_comparison(cfg: &ExperimentConfig, taus: &[f64]) -> Result<DelayReport> {
    if taus.is_empty() {
        return Err(Error::Config("delay sweep needs at least one tau".into()));
    }
    let mut entries = vec![];
    for &tau in taus {
        let mut c = cfg.clone();
        c.delay.tau = tau;
        let r = run_stability(&c)?;
        entries.push(DelayEntry {
            tau,
            c_star: r.c_star,
            c: r.c,
            exp_rate: r.decay.exp_rate,
            rate_stderr: r.decay.rate_stderr,
            algebraic_slope: r.decay.algebraic_slope,
        });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for w in entries.windows(2) {
        let err = 2.0 * (w[0].rate_stderr.powi(2) + w[1].rate_stderr.powi(2)).sqrt();
        let rise = w[1].exp_rate - w[0].exp_rate - err;
        worst = worst.max(rise);
        pass &= rise <= 0.0;
    }
    let verdicts = vec![Verdict::new("rate nonincreasing in tau", worst, "<= 0 beyond 2 sigma".into(), pass)];
    Ok(DelayReport { entries, worst_increase: worst, all_pass: pass, verdicts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionSample {
    pub t: f64,
    pub xi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    pub c: f64,
    pub x_star: f64,
    pub mu: f64,
    pub mu_upper: f64,
    pub c3: f64,
    pub n_over_alpha: f64,
    pub samples: usize,
    /// Smallest sampled value of the sup-solution bracket, per unit of `V~`.
    pub worst: SupersolutionSample,
    pub inequality_holds: bool,
    /// Largest `V - V~` over `x1 >= x* - c t`, `t >= l0 tau`.
    pub envelope_excess: f64,
    pub envelope_holds: bool,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Checks `V~(t) = C3 (1 + tau + t)^{-n/alpha} e^{-mu t}` as a sup-solution right of `x*`.
///
/// `mu` defaults to `mu_fraction` of the admissible bound, and to zero at the critical speed.
pub fn run_supersolution_check(cfg: &ExperimentConfig, mu: Option<f64>) -> Result<SupersolutionReport> {
    cfg.validate()?;
    let s = setup(cfg)?;
    let profile = solve_front(cfg, &s)?;
    let (model, c) = (&s.model, s.c);
    let m = &model.monostable;
    let tau = model.tau;
    let x_star = select_xstar(&profile, model, c, cfg.stability.eps0).map_err(Error::in_stage("x*"))?;
    let bound = mu_bound(model, &s.wave, c, if tau == 0.0 { 1.0 } else { cfg.stability.eps1 })?;
    let mu = match mu {
        Some(v) => v,
        None if s.critical => 0.0,
        None => cfg.stability.mu_fraction * bound.upper,
    };
    let alpha = estimate_symbol_order(&model.kernel).map_err(Error::in_stage("symbol order"))?.alpha;
    let na = cfg.grid.dim as f64 / alpha;

    // run the squeeze to get V = U+ - w
    let dt = cfg.time.dt;
    let grid = Grid::new(cfg.grid.dim, cfg.grid.half_width, cfg.grid.points)?;
    let ff = profile_far_field(&profile);
    let pert = cfg.perturbation;
    let up = m.u_plus;
    let u0 = FieldState::from_fn(grid, tau, dt, ff, |t, x1, x2| (profile.eval(x1 + c * t) + pert.eval(x1, x2)).clamp(0.0, up))?;
    let wave0 = FieldState::from_fn(grid, tau, dt, ff, |t, x1, _| profile.eval(x1 + c * t))?;
    let (_, upper0) = squeeze_init(&u0, &profile, c, dt);
    let c3 = upper0
        .fields()
        .zip(wave0.fields())
        .map(|(a, b)| a.iter().zip(b).fold(0.0f64, |acc, (p, q)| acc.max((p - q).abs())))
        .fold(0.0, f64::max);
    let hi = evolve_tracked(model, upper0, dt, c, cfg)?;
    let w = evolve_tracked(model, wave0, dt, c, cfg)?;

    let vt = |t: f64| c3 * (1.0 + tau + t).powf(-na) * (-mu * t).exp();
    let t0 = cfg.stability.l0 as f64 * tau;
    let birth_int = |xi: f64| m.d1(profile.eval(xi)) - xstar_margin(&profile, model, c, xi);
    let mut worst = SupersolutionSample { t: f64::NAN, xi: f64::NAN, value: f64::INFINITY };
    let mut samples = 0;
    let xis: Vec<f64> = profile.xi_nodes.iter().copied().filter(|&x| x >= x_star).step_by(10).collect();
    let times: Vec<f64> = hi.iter().map(|s| s.time).filter(|&t| t >= t0).collect();
    for &t in &times {
        let ratio = (mu * tau).exp() * ((1.0 + t) / (1.0 + t + tau)).powf(-na) - 1.0;
        for &xi in &xis {
            let bi = birth_int(xi);
            let val = xstar_margin(&profile, model, c, xi) - mu - na / (1.0 + t + tau) - ratio * bi;
            samples += 1;
            if val < worst.value {
                worst = SupersolutionSample { t, xi, value: val };
            }
        }
    }
    let inequality_holds = worst.value >= 0.0;
    let mut excess = f64::NEG_INFINITY;
    for (a, b) in hi.iter().zip(&w) {
        if a.time < t0 {
            continue;
        }
        let g = Grid { origin: a.origin, ..grid };
        let bound_t = vt(a.time);
        for (k, (p, q)) in a.values.iter().zip(&b.values).enumerate() {
            let (x1, _) = g.position(k);
            if x1 + c * a.time >= x_star {
                excess = excess.max((p - q) - bound_t);
            }
        }
    }
    let envelope_holds = excess <= 1e-10;
    let verdicts = vec![
        Verdict::new("sup-solution inequality", worst.value, ">= 0".into(), inequality_holds),
        Verdict::new("V <= V~ right of x*", excess, "<= 1e-10".into(), envelope_holds),
    ];
    let all_pass = inequality_holds && envelope_holds;
    Ok(SupersolutionReport {
        c,
        x_star,
        mu,
        mu_upper: bound.upper,
        c3,
        n_over_alpha: na,
        samples,
        worst,
        inequality_holds,
        envelope_excess: excess,
        envelope_holds,
        verdicts,
        all_pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub lambda: f64,
    pub g: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub wave: WaveCharacteristics,
    pub c: f64,
    pub roots: Option<SpeedRoots>,
    pub mu_bound: Option<MuBound>,
    pub symbol_order: Option<SymbolOrder>,
    pub curves: Vec<CurveSample>,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Critical pair, decay rates at the configured speed and `G_c`, `H_c` on `[0, 3 lambda*]`.
pub fn run_speed(cfg: &ExperimentConfig) -> Result<SpeedReport> {
    cfg.validate()?;
    let s = setup(cfg)?;
    let (model, w, c) = (&s.model, s.wave, s.c);
    let m = &model.monostable;
    let curves = (0..=300)
        .map(|i| {
            let lambda = 3.0 * w.lambda_star * i as f64 / 300.0;
            Ok(CurveSample { lambda, g: g_c(m, &model.kernel, c, lambda)?, h: h_c(m, model.heat, c, model.tau, lambda) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut verdicts = vec![Verdict::new("tangency residual", w.residual, "< 1e-8".into(), w.residual.abs() < 1e-8)];
    let roots = if c >= w.c_star { Some(decay_roots(model, &w, c).map_err(Error::in_stage("decay roots"))?) } else { None };
    if let Some(r) = roots {
        let ok = if s.critical {
            (r.lambda1 - r.lambda2).abs() < 1e-6
        } else {
            r.lambda1 < w.lambda_star && w.lambda_star < r.lambda2
        };
        verdicts.push(Verdict::new("root ordering", r.lambda2 - r.lambda1, "lambda1 <= lambda* <= lambda2".into(), ok));
    }
    let mu_bound = if roots.is_some() { mu_bound(model, &w, c, if model.tau == 0.0 { 1.0 } else { cfg.stability.eps1 }).ok() } else { None };
    let symbol_order = estimate_symbol_order(&model.kernel).ok();
    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(SpeedReport { wave: w, c, roots, mu_bound, symbol_order, curves, verdicts, all_pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub c: f64,
    pub c_star: f64,
    pub residual: f64,
    pub monotone: bool,
    pub tails: Option<(f64, f64)>,
    pub roots: SpeedRoots,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

pub const PROFILE_RESIDUAL_TOL: f64 = 1e-6;
pub const TAIL_REL_TOL: f64 = 0.05;
/// Looser left-tail tolerance at `c*`, where the tail carries an algebraic prefactor.
pub const CRITICAL_TAIL_REL_TOL: f64 = 0.15;

pub fn run_profile(cfg: &ExperimentConfig) -> Result<(Profile, ProfileReport)> {
    cfg.validate()?;
    let s = setup(cfg)?;
    let profile = solve_front(cfg, &s)?;
    let up = s.model.u_plus();
    let residual = profile_residual(&profile, &s.model)?;
    let monotone = profile.values.windows(2).all(|w| w[1] >= w[0]);
    let roots = decay_roots(&s.model, &s.wave, s.c).map_err(Error::in_stage("decay roots"))?;
    let tails = tail_exponents(&profile).ok();
    let mut verdicts = vec![
        Verdict::new("residual", residual, format!("< {PROFILE_RESIDUAL_TOL:e} u+"), residual < PROFILE_RESIDUAL_TOL * up),
        Verdict::new("monotone", if monotone { 1.0 } else { 0.0 }, "nondecreasing".into(), monotone),
    ];
    let tol = if s.critical { CRITICAL_TAIL_REL_TOL } else { TAIL_REL_TOL };
    let (l, r) = tails.unwrap_or((f64::NAN, f64::NAN));
    let e1 = (l - roots.lambda1).abs() / roots.lambda1;
    let e2 = (r - roots.lambda_plus).abs() / roots.lambda_plus;
    verdicts.push(Verdict::new("left tail vs lambda1", e1, format!("< {tol}"), e1 < tol));
    verdicts.push(Verdict::new("right tail vs lambda+", e2, format!("< {TAIL_REL_TOL}"), e2 < TAIL_REL_TOL));
    let all_pass = verdicts.iter().all(|v| v.pass);
    let report = ProfileReport { c: s.c, c_star: s.wave.c_star, residual, monotone, tails, roots, verdicts, all_pass };
    Ok((profile, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveRow {
    pub t: f64,
    /// `sup |u - phi(x1 + c t)|`.
    pub error: f64,
    pub min: f64,
    pub max: f64,
    /// Half-level crossing along the first row, in the moving frame.
    pub front_xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub c: f64,
    pub c_star: f64,
    pub steps: u64,
    pub series: Vec<EvolveRow>,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Initial history for `cfg.initial`; `custom` holds `(x1, u)` samples for `custom_csv`.
pub fn initial_state(cfg: &ExperimentConfig, s: &Setup, profile: &Profile, custom: Option<&[(f64, f64)]>) -> Result<FieldState> {
    let grid = Grid::new(cfg.grid.dim, cfg.grid.half_width, cfg.grid.points)?;
    let (tau, dt, c, up) = (s.model.tau, cfg.time.dt, s.c, s.model.u_plus());
    let ff = profile_far_field(profile);
    match cfg.initial {
        InitialCondition::ProfileShifted { shift } => FieldState::from_fn(grid, tau, dt, ff, |t, x1, _| profile.eval(x1 + c * t - shift)),
        InitialCondition::ProfilePlusBump { amplitude, width, center } => {
            let b = Perturbation::Bump { amplitude, width, center };
            FieldState::from_fn(grid, tau, dt, ff, |t, x1, x2| (profile.eval(x1 + c * t) + b.eval(x1, x2)).clamp(0.0, up))
        }
        InitialCondition::Constant { value } => {
            let v = value.clamp(0.0, up);
            FieldState::constant_history(grid, tau, dt, [AxisBoundary::clamp(v, v), AxisBoundary::replicate()], vec![v; grid.len()])
        }
        InitialCondition::CustomCsv { ref path } => {
            let pts = custom.ok_or_else(|| Error::Config(format!("initial data from {path} was not loaded")))?;
            if pts.len() < 2 || pts.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Config(format!("{path}: need at least two rows with increasing x")));
            }
            let interp = |x: f64| {
                let j = pts.partition_point(|p| p.0 <= x);
                if j == 0 {
                    return pts[0].1;
                }
                if j == pts.len() {
                    return pts[j - 1].1;
                }
                let (a, b) = (pts[j - 1], pts[j]);
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            };
            let field = (0..grid.len()).map(|k| interp(grid.position(k).0).clamp(0.0, up)).collect();
            let (l, r) = (pts[0].1.clamp(0.0, up), pts[pts.len() - 1].1.clamp(0.0, up));
            FieldState::constant_history(grid, tau, dt, [AxisBoundary::clamp(l, r), AxisBoundary::replicate()], field)
        }
    }
}

/// Evolves `cfg.initial` in the frame moving with the configured speed.
pub fn run_evolve(cfg: &ExperimentConfig, custom: Option<&[(f64, f64)]>) -> Result<(EvolveReport, Vec<Snapshot>)> {
    cfg.validate()?;
    let s = setup(cfg)?;
    let profile = solve_front(cfg, &s)?;
    let state = initial_state(cfg, &s, &profile, custom)?;
    let grid = state.grid;
    let up = s.model.u_plus();
    let snaps = evolve_tracked(&s.model, state, cfg.time.dt, s.c, cfg).map_err(Error::in_stage("evolve"))?;
    let errors = moving_frame_error(&snaps, &grid, &profile, s.c).map_err(Error::in_stage("moving frame"))?;
    let n = grid.points;
    let series: Vec<EvolveRow> = snaps
        .iter()
        .zip(&errors)
        .map(|(sn, &(t, error))| {
            let (min, max) = sn.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let front_xi = crossing(&sn.values[..n], 0.5 * up).map_or(f64::NAN, |j| sn.origin[0] - grid.half_width + j * grid.dx + s.c * t);
            EvolveRow { t, error, min, max, front_xi }
        })
        .collect();
    let lo = series.iter().map(|r| r.min).fold(f64::INFINITY, f64::min);
    let hi = series.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max);
    let excursion = (-lo).max(hi - up);
    let verdicts = vec![Verdict::new("range [0, u+]", excursion, "<= 1e-10".into(), excursion <= 1e-10)];
    let all_pass = verdicts.iter().all(|v| v.pass);
    let steps = (cfg.time.t_end / cfg.time.dt).round() as u64;
    Ok((EvolveReport { c: s.c, c_star: s.wave.c_star, steps, series, verdicts, all_pass }, snaps))
}

pub const LINEAR_SLOPE_TOL: f64 = 0.10;
pub const LINEAR_RATE_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearReport {
    pub c: f64,
    pub c_star: f64,
    pub critical: bool,
    pub symbols: LinearSymbols,
    pub n_over_alpha: f64,
    pub fit: DecayFit,
    /// Fitted `eps` of the scalar comparison problem; absent at the critical speed or without delay.
    pub epsilon: Option<f64>,
    pub series: Vec<(f64, f64)>,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
}

/// Sup norm of the weighted linearized solution from a Gaussian bump, on log-spaced times.
pub fn run_linear(cfg: &ExperimentConfig) -> Result<LinearReport> {
    cfg.validate()?;
    let lc = cfg.linear;
    if !(lc.t_start > 0.0 && lc.t_end > lc.t_start && lc.samples >= 10 && lc.bump_width > 0.0) {
        return Err(Error::Config(format!("linear needs 0 < t_start < t_end, samples >= 10, bump_width > 0, got {lc:?}")));
    }
    let s = setup(cfg)?;
    let grid = Grid::new(cfg.grid.dim, cfg.grid.half_width, cfg.grid.points)?;
    let problem = LinearProblem::new(&s.model, &s.wave, s.c, grid).map_err(Error::in_stage("linear problem"))?;
    let w2 = 2.0 * lc.bump_width * lc.bump_width;
    let hist = move |_s: f64, x1: f64, x2: f64| ((-(x1 * x1 + x2 * x2) / w2).exp(), 0.0);
    let solver = FormulaSolver::new(&problem, &hist);
    let ratio = lc.t_end / lc.t_start;
    let series = (0..lc.samples)
        .map(|i| lc.t_start * ratio.powf(i as f64 / (lc.samples - 1) as f64))
        .map(|t| Ok((t, solver.at(t)?.iter().fold(0.0f64, |a, v| a.max(v.abs())))))
        .collect::<Result<Vec<_>>>()
        .map_err(Error::in_stage("formula"))?;
    let fit = decay_fit(&series, (lc.t_start, lc.t_end)).map_err(Error::in_stage("decay fit"))?;
    let alpha = estimate_symbol_order(&s.model.kernel).map_err(Error::in_stage("symbol order"))?.alpha;
    let na = grid.dim as f64 / alpha;
    let sy = problem.symbols;
    let epsilon = if s.model.tau > 0.0 && !s.critical { fit_epsilon(sy.c1_tilde, sy.c3, s.model.tau).ok() } else { None };
    let verdicts = if s.critical {
        vec![
            Verdict::new("algebraic slope", fit.algebraic_slope, format!("{na:.3} +- {LINEAR_SLOPE_TOL}"), (fit.algebraic_slope - na).abs() <= LINEAR_SLOPE_TOL),
            Verdict::new("exp rate", fit.exp_rate, format!("0 +- {LINEAR_RATE_TOL}"), fit.exp_rate.abs() <= LINEAR_RATE_TOL),
        ]
    } else {
        vec![Verdict::new("exp rate", fit.exp_rate, "> 0".into(), fit.exp_rate > 0.0)]
    };
    let all_pass = verdicts.iter().all(|v| v.pass);
    Ok(LinearReport { c: s.c, c_star: s.wave.c_star, critical: s.critical, symbols: sy, n_over_alpha: na, fit, epsilon, series, verdicts, all_pass })
}
