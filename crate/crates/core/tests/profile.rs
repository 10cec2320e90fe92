use nonlocal_fronts::evolution::{moving_frame_error, profile_far_field, ConvPath, Evolution, FieldState, Grid, StepParams};
use nonlocal_fronts::kernels::{make_kernel, HeatKernelParams, KernelSpec};
use nonlocal_fronts::model::Model;
use nonlocal_fronts::monostable::{preset, Nonlinearity};
use nonlocal_fronts::profile::{residual, solve_profile, solve_profile_with, tail_exponents, Profile, ProfileOptions};
use nonlocal_fronts::wavespeed::{critical_pair, decay_roots};
use nonlocal_fronts::Error;

fn fisher(tau: f64) -> Model {
    Model::new(
        preset(Nonlinearity::FisherKpp).unwrap(),
        make_kernel(KernelSpec::gaussian(1.0)).unwrap(),
        HeatKernelParams::dirac(),
        tau,
    )
    .unwrap()
}

fn monotone(p: &Profile) -> bool {
    p.values.windows(2).all(|w| w[1] >= w[0]) && p.values[0] >= 0.0 && *p.values.last().unwrap() <= p.u_plus
}

#[test]
fn fisher_front_at_speed_two() {
    let m = fisher(0.0);
    let p = solve_profile(&m, 2.0, 60.0, 6000).unwrap();
    assert!(residual(&p, &m).unwrap() < 1e-6);
    assert!(monotone(&p));
    assert!(p.values[0] < 1e-4 && p.values[6000] > 1.0 - 1e-4);
    assert!(p.eval(0.0).abs() - 0.5 < 1e-12);

    let d = p.diagnostics.unwrap();
    assert!(d.monotone_violation <= 1e-14, "iterates must decrease, got {:e}", d.monotone_violation);

    let (l, rp) = tail_exponents(&p).unwrap();
    let roots = decay_roots(&m, &critical_pair(&m).unwrap(), 2.0).unwrap();
    assert!((l - roots.lambda1).abs() < 0.05 * roots.lambda1, "{l} vs {}", roots.lambda1);
    assert!((rp - roots.lambda_plus).abs() < 0.05 * roots.lambda_plus, "{rp} vs {}", roots.lambda_plus);
}

#[test]
fn fisher_front_at_critical_speed() {
    let m = fisher(0.0);
    let w = critical_pair(&m).unwrap();
    let p = solve_profile_with(&m, &w, w.c_star, 60.0, 4000, &ProfileOptions::default()).unwrap();
    assert!(residual(&p, &m).unwrap() < 1e-6);
    assert!(monotone(&p));
}

#[test]
fn delayed_front_is_monotone() {
    let m = fisher(1.0);
    let w = critical_pair(&m).unwrap();
    let p = solve_profile_with(&m, &w, 1.2 * w.c_star, 60.0, 3000, &ProfileOptions::default()).unwrap();
    assert!(residual(&p, &m).unwrap() < 1e-6);
    assert!(monotone(&p));
}

#[test]
fn subcritical_speed_has_no_front() {
    let m = fisher(0.0);
    assert!(matches!(solve_profile(&m, 1.0, 60.0, 3000), Err(Error::NoFront { .. })));
}

#[test]
fn shifted_normalisation_is_a_translate() {
    let m = fisher(0.0);
    let w = critical_pair(&m).unwrap();
    let a = solve_profile_with(&m, &w, 2.0, 60.0, 3000, &ProfileOptions::default()).unwrap();
    let opts = ProfileOptions { center: 4.0, ..Default::default() };
    let b = solve_profile_with(&m, &w, 2.0, 60.0, 3000, &opts).unwrap();
    assert!((b.eval(4.0) - 0.5).abs() < 1e-12);
    let worst = (-800..=800).map(|k| k as f64 * 0.04).map(|xi| (a.eval(xi) - b.eval(xi + 4.0)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}

// ETD1 drift is a phase error in dt; extrapolating over three step sizes isolates the profile error
#[test]
fn profile_is_invariant_under_evolution() {
    let m = fisher(0.0);
    let p = solve_profile(&m, 2.0, 60.0, 6000).unwrap();
    let g = Grid::new(1, 50.0, 1001).unwrap();
    let run = |dt: f64| {
        let st = FieldState::from_fn(g, 0.0, dt, profile_far_field(&p), |s, x, _| p.eval(x + 2.0 * s)).unwrap();
        let mut ev = Evolution::new(&m, st, StepParams::for_model(&m, dt), ConvPath::Direct).unwrap();
        ev.track_speed = Some(2.0);
        ev.run(10.0, 10.0).unwrap().pop().unwrap()
    };
    let (a, b, c) = (run(0.01), run(0.005), run(0.0025));
    assert!(a.origin == b.origin && b.origin == c.origin);
    let mut extrap = c.clone();
    for ((e, x), y) in extrap.values.iter_mut().zip(&a.values).zip(&b.values) {
        *e = (8.0 * *e - 6.0 * y + x) / 3.0;
    }
    let err = moving_frame_error(&[extrap], &g, &p, 2.0).unwrap()[0].1;
    let raw = moving_frame_error(&[c], &g, &p, 2.0).unwrap()[0].1;
    assert!(err < 1e-4, "extrapolated {err:e}, raw {raw:e}");
    assert!(raw > err);
}
