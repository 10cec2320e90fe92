//! Monostable nonlinearity pairs `(d, b)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID: usize = 1000;
const MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `d(u) = u^2`, `b(u) = u`.
    FisherKpp,
    /// `d(u) = delta u`, `b(u) = p u e^{-a u}`.
    Nicholson { p: f64, delta: f64, a: f64 },
    /// `d(u) = delta u^2`, `b(u) = p e^{-gamma tau} u`.
    AgeStructured { p: f64, delta: f64, gamma: f64, tau: f64 },
    /// `d(u) = d1 u + d2 u^2`, `b(u) = b1 u + b2 u^2`.
    Quadratic { d1: f64, d2: f64, b1: f64, b2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monostable {
    pub kind: Nonlinearity,
    pub u_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub pass: bool,
    /// Sample point with the worst margin.
    pub worst_u: f64,
    /// Signed margin at `worst_u`; negative means violated.
    pub worst_margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionConstants {
    pub eta1: f64,
    pub eta2: f64,
    pub eta0: f64,
}

impl Monostable {
    /// Build without checking the hypotheses; `u_plus` from the closed form.
    pub fn unchecked(kind: Nonlinearity) -> Self {
        let u_plus = match kind {
            Nonlinearity::FisherKpp => 1.0,
            Nonlinearity::Nicholson { p, delta, a } => (p / delta).ln() / a,
            Nonlinearity::AgeStructured { p, delta, gamma, tau } => p / delta * (-gamma * tau).exp(),
            Nonlinearity::Quadratic { d1, d2, b1, b2 } => (b1 - d1) / (d2 - b2),
        };
        Monostable { kind, u_plus }
    }

    pub fn d(&self, u: f64) -> f64 {
        match self.kind {
            Nonlinearity::FisherKpp => u * u,
            Nonlinearity::Nicholson { delta, .. } => delta * u,
            Nonlinearity::AgeStructured { delta, .. } => delta * u * u,
            Nonlinearity::Quadratic { d1, d2, .. } => d1 * u + d2 * u * u,
        }
    }

    pub fn b(&self, u: f64) -> f64 {
        match self.kind {
            Nonlinearity::FisherKpp => u,
            Nonlinearity::Nicholson { p, a, .. } => p * u * (-a * u).exp(),
            Nonlinearity::AgeStructured { p, gamma, tau, .. } => p * (-gamma * tau).exp() * u,
            Nonlinearity::Quadratic { b1, b2, .. } => b1 * u + b2 * u * u,
        }
    }

    pub fn d1(&self, u: f64) -> f64 {
        match self.kind {
            Nonlinearity::FisherKpp => 2.0 * u,
            Nonlinearity::Nicholson { delta, .. } => delta,
            Nonlinearity::AgeStructured { delta, .. } => 2.0 * delta * u,
            Nonlinearity::Quadratic { d1, d2, .. } => d1 + 2.0 * d2 * u,
        }
    }

    pub fn b1(&self, u: f64) -> f64 {
        match self.kind {
            Nonlinearity::FisherKpp => 1.0,
            Nonlinearity::Nicholson { p, a, .. } => p * (-a * u).exp() * (1.0 - a * u),
            Nonlinearity::AgeStructured { p, gamma, tau, .. } => p * (-gamma * tau).exp(),
            Nonlinearity::Quadratic { b1, b2, .. } => b1 + 2.0 * b2 * u,
        }
    }

    pub fn d2(&self, u: f64) -> f64 {
        let _ = u;
        match self.kind {
            Nonlinearity::FisherKpp => 2.0,
            Nonlinearity::Nicholson { .. } => 0.0,
            Nonlinearity::AgeStructured { delta, .. } => 2.0 * delta,
            Nonlinearity::Quadratic { d2, .. } => 2.0 * d2,
        }
    }

    pub fn b2(&self, u: f64) -> f64 {
        match self.kind {
            Nonlinearity::Nicholson { p, a, .. } => p * a * (-a * u).exp() * (a * u - 2.0),
            Nonlinearity::Quadratic { b2, .. } => 2.0 * b2,
            _ => 0.0,
        }
    }

    fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=GRID).map(move |i| self.u_plus * i as f64 / GRID as f64)
    }
}

/// Construct a preset, rejecting parameters outside the monostable regime.
pub fn preset(kind: Nonlinearity) -> Result<Monostable> {
    if let Nonlinearity::Nicholson { p, delta, a } = kind {
        let r = p / delta;
        if !(r > 1.0 && r <= std::f64::consts::E * (1.0 + 1e-15)) || !(a > 0.0) {
            return Err(Error::HypothesesViolated(format!(
                "nicholson needs 1 < p/delta <= e and a > 0, got p/delta = {r}, a = {a}"
            )));
        }
    }
    let m = Monostable::unchecked(kind);
    if !(m.u_plus > 0.0 && m.u_plus.is_finite()) {
        return Err(Error::HypothesesViolated(format!("u_plus = {} is not positive", m.u_plus)));
    }
    let report = validate(&m);
    if !report.all_pass() {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        return Err(Error::HypothesesViolated(failed.join("; ")));
    }
    Ok(m)
}

fn check(name: &str, samples: impl Iterator<Item = (f64, f64)>, detail: &str) -> HypothesisCheck {
    let (worst_u, worst_margin) = samples.fold((f64::NAN, f64::INFINITY), |acc, (u, m)| {
        if m < acc.1 || m.is_nan() {
            (u, m)
        } else {
            acc
        }
    });
    HypothesisCheck {
        name: name.into(),
        pass: worst_margin >= 0.0,
        worst_u,
        worst_margin,
        detail: detail.into(),
    }
}

/// Check (H1)-(H3) on a 1001-point grid of `[0, u_plus]`.
pub fn validate(m: &Monostable) -> HypothesisReport {
    let up = m.u_plus;
    let h1 = check(
        "H1",
        [(0.0, 1e-10 - m.d(0.0).abs().max(m.b(0.0).abs())), (up, 1e-10 - (m.d(up) - m.b(up)).abs())].into_iter(),
        "d(0) = b(0) = 0 and d(u+) = b(u+)",
    );
    let h2 = check(
        "H2",
        [
            (0.0, m.b1(0.0) - m.d1(0.0) - f64::MIN_POSITIVE),
            (0.0, m.d1(0.0) + MARGIN),
            (up, m.b1(up) + MARGIN),
            (up, m.d1(up) - m.b1(up) - f64::MIN_POSITIVE),
        ]
        .into_iter(),
        "b'(0) > d'(0) >= 0 and 0 <= b'(u+) < d'(u+)",
    );
    let h3 = check(
        "H3",
        m.grid().map(|u| {
            let margin = (m.d1(u) + MARGIN).min(m.b1(u) + MARGIN).min(m.d2(u) + MARGIN).min(MARGIN - m.b2(u));
            (u, margin)
        }),
        "d', b', d'' >= 0 and b'' <= 0 on [0, u+]",
    );
    HypothesisReport { checks: vec![h1, h2, h3] }
}

// Max of |f| on the grid, refined by one Newton step on f' = 0 when interior.
fn grid_max<F: Fn(f64) -> f64>(m: &Monostable, f: F, df: impl Fn(f64) -> f64) -> f64 {
    let (mut best_u, mut best) = (0.0, f(0.0).abs());
    for u in m.grid() {
        let v = f(u).abs();
        if v > best {
            best = v;
            best_u = u;
        }
    }
    if best_u > 0.0 && best_u < m.u_plus {
        let h = 1e-6 * m.u_plus;
        let curv = (df(best_u + h) - df(best_u - h)) / (2.0 * h);
        if curv != 0.0 {
            let u = (best_u - df(best_u) / curv).clamp(0.0, m.u_plus);
            best = best.max(f(u).abs());
        }
    }
    best
}

/// `eta1 = max|d'|`, `eta2 = max|b'|` on `[0, u+]`, `eta0 = 1 + eta1 + eta2`.
pub fn contraction_constants(m: &Monostable) -> ContractionConstants {
    let eta1 = grid_max(m, |u| m.d1(u), |u| m.d2(u));
    let eta2 = grid_max(m, |u| m.b1(u), |u| m.b2(u));
    ContractionConstants { eta1, eta2, eta0: 1.0 + eta1 + eta2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn nicholson_e() -> Monostable {
        preset(Nonlinearity::Nicholson { p: E, delta: 1.0, a: 1.0 }).unwrap()
    }

    #[test]
    fn preset_equilibria() {
        let f = preset(Nonlinearity::FisherKpp).unwrap();
        assert_eq!(f.u_plus, 1.0);
        assert_eq!((f.d(0.5), f.b(0.5)), (0.25, 0.5));
        assert!((nicholson_e().u_plus - 1.0).abs() < 1e-15);
        let age = preset(Nonlinearity::AgeStructured { p: 1.0, delta: 1.0, gamma: 0.5, tau: 2.0 }).unwrap();
        assert!((age.u_plus - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn nicholson_ratio_is_enforced() {
        for p in [3.0, 1.0, 0.5] {
            let r = preset(Nonlinearity::Nicholson { p, delta: 1.0, a: 1.0 });
            assert!(matches!(r, Err(Error::HypothesesViolated(_))), "p = {p}");
        }
    }

    #[test]
    fn validation_reports() {
        assert!(validate(&preset(Nonlinearity::FisherKpp).unwrap()).all_pass());
        assert!(validate(&nicholson_e()).all_pass());

        let bad = Monostable::unchecked(Nonlinearity::Nicholson { p: 3.0, delta: 1.0, a: 1.0 });
        let r = validate(&bad);
        let h3 = r.checks.iter().find(|c| c.name == "H3").unwrap();
        assert!(!h3.pass);
        // b' = p e^{-u}(1-u) turns negative past u = 1 < ln 3
        assert!(h3.worst_u > 1.0);

        let flat = Monostable { kind: Nonlinearity::Quadratic { d1: 1.0, d2: 0.0, b1: 1.0, b2: 0.0 }, u_plus: 1.0 };
        let r = validate(&flat);
        assert!(!r.checks.iter().find(|c| c.name == "H2").unwrap().pass);
    }

    #[test]
    fn contraction_constant_values() {
        let c = contraction_constants(&preset(Nonlinearity::FisherKpp).unwrap());
        assert!((c.eta1 - 2.0).abs() < 1e-12);
        assert!((c.eta2 - 1.0).abs() < 1e-12);
        assert!((c.eta0 - 4.0).abs() < 1e-12);
        let c = contraction_constants(&nicholson_e());
        assert!((c.eta1 - 1.0).abs() < 1e-12);
        assert!((c.eta2 - E).abs() < 1e-12);
        assert!((c.eta0 - 2.0 - E).abs() < 1e-12);
    }

    #[test]
    fn quadratic_u_plus() {
        let m = preset(Nonlinearity::Quadratic { d1: 0.2, d2: 1.0, b1: 1.0, b2: -0.5 }).unwrap();
        assert!((m.d(m.u_plus) - m.b(m.u_plus)).abs() < 1e-14);
    }

    fn presets() -> impl Strategy<Value = Monostable> {
        prop_oneof![
            Just(Nonlinearity::FisherKpp),
            (1.05f64..E, 0.5f64..2.0, 0.2f64..3.0).prop_map(|(r, delta, a)| Nonlinearity::Nicholson {
                p: r * delta,
                delta,
                a
            }),
            (0.5f64..3.0, 0.2f64..2.0, 0.0f64..1.0, 0.0f64..3.0)
                .prop_map(|(p, delta, gamma, tau)| Nonlinearity::AgeStructured { p, delta, gamma, tau }),
        ]
        .prop_map(|k| preset(k).unwrap())
    }

    proptest! {
        #[test]
        fn derivatives_match_differences(m in presets(), s in 0.05f64..0.95) {
            let u = s * m.u_plus;
            let h = 1e-5 * m.u_plus;
            let fd = |f: &dyn Fn(f64) -> f64| (f(u + h) - f(u - h)) / (2.0 * h);
            let scale = 1.0 + m.d1(u).abs() + m.b1(u).abs();
            prop_assert!((fd(&|x| m.d(x)) - m.d1(u)).abs() < 1e-6 * scale);
            prop_assert!((fd(&|x| m.b(x)) - m.b1(u)).abs() < 1e-6 * scale);
            prop_assert!((fd(&|x| m.d1(x)) - m.d2(u)).abs() < 1e-5 * scale);
            prop_assert!((fd(&|x| m.b1(x)) - m.b2(u)).abs() < 1e-5 * scale);
        }

        #[test]
        fn g_is_nondecreasing(m in presets()) {
            let c = contraction_constants(&m);
            prop_assert!(c.eta0 > 1.0);
            let g = |u: f64| (c.eta0 - 1.0) * u - m.d(u);
            let mut prev = g(0.0);
            for i in 1..=GRID {
                let v = g(m.u_plus * i as f64 / GRID as f64);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }

        #[test]
        fn equilibria_are_isolated(m in presets()) {
            for i in 1..GRID {
                let u = m.u_plus * i as f64 / GRID as f64;
                prop_assert!(m.b(u) - m.d(u) > 0.0);
            }
        }
    }
}
