#![allow(dead_code)]

use nonlocal_fronts::kernels::{make_kernel, HeatKernelParams, KernelSpec};
use nonlocal_fronts::model::Model;
use nonlocal_fronts::monostable::{preset, Nonlinearity};

pub fn fisher(tau: f64) -> Model {
    model(Nonlinearity::FisherKpp, 0.0, tau)
}

pub fn nicholson(tau: f64) -> Model {
    model(Nonlinearity::Nicholson { p: std::f64::consts::E, delta: 1.0, a: 1.0 }, 0.0, tau)
}

pub fn model(kind: Nonlinearity, beta: f64, tau: f64) -> Model {
    Model::new(preset(kind).unwrap(), make_kernel(KernelSpec::gaussian(1.0)).unwrap(), HeatKernelParams::new(beta).unwrap(), tau).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// RK4 on the method-of-steps system `y_k(s) = z(s + (k - 1) tau)`, `s in [0, tau]`,
/// for `z' = kbar z(t - tau)` with unit history. Returns `z` on `[0, segments tau]`
/// at spacing `tau / steps`.
pub fn delayed_exp_rk4(kbar: f64, tau: f64, segments: usize, steps: usize) -> Vec<(f64, f64)> {
    let h = tau / steps as f64;
    let mut starts = vec![1.0];
    let mut out = vec![(0.0, 1.0)];
    for seg in 1..=segments {
        let mut y = starts.clone();
        let rhs = |y: &[f64]| -> Vec<f64> { (0..y.len()).map(|k| kbar * if k == 0 { 1.0 } else { y[k - 1] }).collect() };
        for i in 0..steps {
            let k1 = rhs(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = rhs(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = rhs(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = rhs(&y4);
            for k in 0..y.len() {
                y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
            }
            out.push(((seg - 1) as f64 * tau + (i + 1) as f64 * h, y[seg - 1]));
        }
        // y_k(tau) = y_{k+1}(0)
        starts = std::iter::once(1.0).chain(y.iter().copied()).collect();
    }
    out
}

/// `sum_{j=0}^{m} kbar^j (t - (j - 1) tau)^j / j!` evaluated term by term.
pub fn delayed_exp_series(kbar: f64, tau: f64, m: usize, t: f64) -> f64 {
    let mut fact = 1.0;
    let mut s = 0.0;
    for j in 0..=m {
        if j > 0 {
            fact *= j as f64;
        }
        s += kbar.powi(j as i32) * (t - (j as f64 - 1.0) * tau).powi(j as i32) / fact;
    }
    s
}
