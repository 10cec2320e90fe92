//! Browser bindings: characteristic curves, front profiles and a live perturbed front.

use nonlocal_fronts::evolution::{ConvPath, Evolution, StepParams};
use nonlocal_fronts::lab::{self, ExperimentConfig, Setup};
use nonlocal_fronts::profile::Profile;
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default)]
pub struct DemoParams {
    pub nicholson: bool,
    pub sigma: f64,
    pub beta: f64,
    pub tau: f64,
    /// Speed as a multiple of `c*`.
    pub factor: f64,
    pub bump: f64,
    pub dt: f64,
}

impl Default for DemoParams {
    fn default() -> Self {
        DemoParams { nicholson: false, sigma: 1.0, beta: 0.0, tau: 0.0, factor: 1.2, bump: 0.3, dt: 0.05 }
    }
}

impl DemoParams {
    pub fn parse(json: &str) -> Result<Self, String> {
        if json.trim().is_empty() {
            return Ok(DemoParams::default());
        }
        serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))
    }

    pub fn config(&self) -> Result<ExperimentConfig, String> {
        let nonlinearity = if self.nicholson {
            "name = \"nicholson\"\np = 2.718281828459045\ndelta = 1.0\na = 1.0"
        } else {
            "name = \"fisher_kpp\""
        };
        let text = format!(
            r#"
[kernel]
family = "gaussian"
sigma = {sigma:?}
[nonlinearity]
{nonlinearity}
[heat]
beta = {beta:?}
[delay]
tau = {tau:?}
[speed]
mode = "factor"
value = {factor:?}
[profile]
half_width = 50.0
intervals = 2000
[grid]
half_width = 40.0
points = 401
[time]
dt = {dt:?}
t_end = 1.0
output_every = 1.0
[initial]
kind = "profile_plus_bump"
amplitude = {bump:?}
width = 5.0
center = 0.0
"#,
            sigma = self.sigma,
            beta = self.beta,
            tau = self.tau,
            factor = self.factor,
            dt = self.dt,
            bump = self.bump,
        );
        ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())
    }
}

#[derive(Serialize)]
struct SpeedView {
    c_star: f64,
    lambda_star: f64,
    c: f64,
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    lambda_plus: Option<f64>,
    mu_upper: Option<f64>,
    lambda: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
}

/// `G_c` and `H_c` with the critical pair, as JSON.
#[wasm_bindgen]
pub fn wave_speed(params: &str) -> Result<String, String> {
    let cfg = DemoParams::parse(params)?.config()?;
    let r = lab::run_speed(&cfg).map_err(|e| e.to_string())?;
    let view = SpeedView {
        c_star: r.wave.c_star,
        lambda_star: r.wave.lambda_star,
        c: r.c,
        lambda1: r.roots.map(|x| x.lambda1),
        lambda2: r.roots.map(|x| x.lambda2),
        lambda_plus: r.roots.map(|x| x.lambda_plus),
        mu_upper: r.mu_bound.map(|m| m.upper),
        lambda: r.curves.iter().map(|s| s.lambda).collect(),
        g: r.curves.iter().map(|s| s.g).collect(),
        h: r.curves.iter().map(|s| s.h).collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ProfileView {
    c: f64,
    residual: f64,
    tails: Option<(f64, f64)>,
    xi: Vec<f64>,
    phi: Vec<f64>,
}

/// Front profile at `factor c*`, subsampled to about 400 points, as JSON.
#[wasm_bindgen]
pub fn front_profile(params: &str) -> Result<String, String> {
    let cfg = DemoParams::parse(params)?.config()?;
    let (p, r) = lab::run_profile(&cfg).map_err(|e| e.to_string())?;
    let stride = (p.values.len() / 400).max(1);
    let view = ProfileView {
        c: r.c,
        residual: r.residual,
        tails: r.tails,
        xi: p.xi_nodes.iter().step_by(stride).copied().collect(),
        phi: p.values.iter().step_by(stride).copied().collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

/// Perturbed front evolving in the frame moving with the front.
#[wasm_bindgen]
pub struct Simulation {
    ev: Evolution,
    profile: Profile,
    c: f64,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(params: &str) -> Result<Simulation, String> {
        let cfg = DemoParams::parse(params)?.config()?;
        let s: Setup = lab::setup(&cfg).map_err(|e| e.to_string())?;
        let profile = lab::solve_front(&cfg, &s).map_err(|e| e.to_string())?;
        let state = lab::initial_state(&cfg, &s, &profile, None).map_err(|e| e.to_string())?;
        let mut ev = Evolution::new(&s.model, state, StepParams::for_model(&s.model, cfg.time.dt), ConvPath::Direct).map_err(|e| e.to_string())?;
        ev.track_speed = Some(s.c);
        Ok(Simulation { ev, profile, c: s.c })
    }

    pub fn advance(&mut self, steps: u32) -> Result<(), String> {
        for _ in 0..steps {
            self.ev.step().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.ev.state.time
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    /// Moving-frame coordinates `x1 + c t` of the grid nodes.
    pub fn xi(&self) -> Vec<f64> {
        let g = self.ev.state.grid;
        let t = self.ev.state.time;
        (0..g.points).map(|i| g.coord(0, i) + self.c * t).collect()
    }

    pub fn field(&self) -> Vec<f64> {
        self.ev.state.now.clone()
    }

    pub fn front(&self) -> Vec<f64> {
        self.xi().into_iter().map(|x| self.profile.eval(x)).collect()
    }

    /// `sup |u - phi|` over the window.
    pub fn error(&self) -> f64 {
        self.field().iter().zip(self.front()).fold(0.0f64, |m, (u, p)| m.max((u - p).abs()))
    }
}
