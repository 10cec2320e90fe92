use nonlocal_fronts::lab::*;
use nonlocal_fronts::Error;

fn cfg(speed: &str, t_end: f64) -> ExperimentConfig {
    let text = format!(
        r#"
[kernel]
family = "gaussian"
sigma = 1.0
[nonlinearity]
name = "fisher_kpp"
[speed]
{speed}
[profile]
half_width = 60.0
intervals = 3000
[grid]
half_width = 40.0
points = 801
[time]
dt = 0.05
t_end = {t_end}
output_every = 0.5
"#
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

const FACTOR: &str = "mode = \"factor\"\nvalue = 1.25";

#[test]
fn stability_report_is_deterministic() {
    let c = cfg(FACTOR, 12.0);
    let a = run_stability(&c).unwrap();
    let b = run_stability(&c).unwrap();
    assert_eq!(a, b);
    assert!(a.weighted_norms.finite && a.weighted_norms.sup > 0.0);
    assert!(a.ordering_lower.pass && a.ordering_upper.pass);
}

#[test]
fn single_delay_sweep_matches_direct_run() {
    let c = cfg(FACTOR, 12.0);
    let direct = run_stability(&c).unwrap();
    let sweep = run_delay_comparison(&c, &[0.0]).unwrap();
    let e = &sweep.entries[0];
    assert_eq!(e.exp_rate.to_bits(), direct.decay.exp_rate.to_bits());
    assert_eq!(e.algebraic_slope.to_bits(), direct.decay.algebraic_slope.to_bits());
    assert_eq!(e.c.to_bits(), direct.c.to_bits());
    assert!(sweep.all_pass);
    assert!(run_delay_comparison(&c, &[]).is_err());
}

#[test]
fn supersolution_holds_at_half_bound_and_fails_far_beyond() {
    let c = cfg(FACTOR, 15.0);
    let ok = run_supersolution_check(&c, None).unwrap();
    assert!(ok.mu > 0.0 && ok.mu < ok.mu_upper);
    assert!(ok.inequality_holds, "{:?}", ok.worst);
    assert!(ok.envelope_holds, "{}", ok.envelope_excess);
    assert!(ok.samples > 100);

    let bad = run_supersolution_check(&c, Some(10.0 * ok.mu_upper)).unwrap();
    assert!(!bad.inequality_holds);
    assert!(bad.worst.value < 0.0 && bad.worst.t.is_finite());
    assert!(!bad.all_pass);
}

#[test]
fn critical_supersolution_is_algebraic() {
    let r = run_supersolution_check(&cfg("mode = \"critical\"", 15.0), None).unwrap();
    assert_eq!(r.mu, 0.0);
    assert!((r.n_over_alpha - 0.5).abs() < 1e-3);
    assert!(r.inequality_holds && r.envelope_holds);
}

#[test]
fn verdicts_follow_measurements() {
    let r = run_stability(&cfg(FACTOR, 12.0)).unwrap();
    let rate = r.verdicts.iter().find(|v| v.name == "exp rate").unwrap();
    assert_eq!(rate.measured, r.decay.exp_rate);
    assert_eq!(rate.pass, r.decay.exp_rate > NONCRITICAL_MIN_RATE);
    assert_eq!(r.all_pass, r.verdicts.iter().all(|v| v.pass));
}

#[test]
fn subcritical_speed_is_reported_by_stage() {
    let err = run_stability(&cfg("mode = \"factor\"\nvalue = 0.8", 5.0)).unwrap_err();
    assert!(err.to_string().contains("profile"), "{err}");
}

#[test]
fn config_errors_are_reported() {
    assert!(matches!(ExperimentConfig::from_toml("[kernel]\nfamily = \"gaussian\"\n"), Err(Error::Config(_))));
    let mut c = cfg(FACTOR, 10.0);
    c.fit.window = Some([5.0, 2.0]);
    assert!(c.validate().is_err());
    c.fit.window = None;
    c.stability.eps0 = 1.5;
    assert!(c.validate().is_err());
}

#[test]
fn evolve_reports_front_position_in_the_moving_frame() {
    let mut c = cfg(FACTOR, 2.0);
    c.initial = InitialCondition::ProfileShifted { shift: 3.0 };
    let (r, snaps) = run_evolve(&c, None).unwrap();
    assert!((r.series[0].front_xi - 3.0).abs() < 0.05, "{}", r.series[0].front_xi);
    assert!(r.series[0].error > 0.1);
    assert_eq!(snaps.len(), r.series.len());
    assert!(r.all_pass);
}

#[test]
fn custom_initial_data_needs_samples() {
    let mut c = cfg(FACTOR, 1.0);
    c.initial = InitialCondition::CustomCsv { path: "init.csv".into() };
    assert!(matches!(run_evolve(&c, None), Err(Error::Config(_))));
    assert!(run_evolve(&c, Some(&[(0.0, 0.5)])).is_err());
    let (r, _) = run_evolve(&c, Some(&[(-10.0, 0.0), (10.0, 1.0)])).unwrap();
    assert!(r.all_pass);
}

#[test]
fn speed_and_profile_reports_agree() {
    let c = cfg(FACTOR, 1.0);
    let s = run_speed(&c).unwrap();
    let (p, r) = run_profile(&c).unwrap();
    assert!(s.all_pass && r.all_pass, "{:?} {:?}", s.verdicts, r.verdicts);
    assert_eq!(s.roots.unwrap(), r.roots);
    assert!((p.c - 1.25 * s.wave.c_star).abs() < 1e-12);
    assert!(s.curves.iter().any(|x| x.h > x.g));
}

#[test]
fn noncritical_linear_decay_is_exponential() {
    let mut c = cfg(FACTOR, 1.0);
    c.linear = LinearConfig { t_start: 5.0, t_end: 40.0, samples: 30, bump_width: 1.0 };
    let r = run_linear(&c).unwrap();
    assert!(!r.critical && r.all_pass);
    assert!(r.fit.exp_rate > 0.1, "{:?}", r.fit);
    assert!(r.epsilon.is_none());
    c.delay.tau = 0.5;
    let r = run_linear(&c).unwrap();
    let e = r.epsilon.unwrap();
    assert!(e > 0.0 && e < 1.0);
}

#[test]
fn critical_profile_tails_pass_with_the_wider_tolerance() {
    let (_, r) = run_profile(&cfg("mode = \"critical\"", 1.0)).unwrap();
    let left = r.verdicts.iter().find(|v| v.name == "left tail vs lambda1").unwrap();
    assert!(left.pass && left.measured > TAIL_REL_TOL, "{:?}", r.verdicts);
    assert!(r.all_pass);
}

#[test]
fn front_translates_at_the_wave_speed() {
    let mut c = cfg(FACTOR, 10.0);
    c.time.dt = 0.005;
    c.time.output_every = 10.0;
    c.initial = InitialCondition::ProfileShifted { shift: 0.0 };
    let (r, _) = run_evolve(&c, None).unwrap();
    let drift = r.series.last().unwrap().front_xi - r.series[0].front_xi;
    let speed = r.c - drift / 10.0;
    assert!((speed / r.c - 1.0).abs() < 0.02, "speed {speed} vs {}", r.c);
}
