use nonlocal_fronts_web::{front_profile, wave_speed, DemoParams, Simulation};
use serde_json::Value;

#[test]
fn speed_view_has_critical_pair_and_curves() {
    let v: Value = serde_json::from_str(&wave_speed("").unwrap()).unwrap();
    assert!((v["c_star"].as_f64().unwrap() - 0.5f64.exp()).abs() < 1e-6);
    assert_eq!(v["lambda"].as_array().unwrap().len(), v["g"].as_array().unwrap().len());
    assert!(v["lambda1"].as_f64().unwrap() < v["lambda2"].as_f64().unwrap());
}

#[test]
fn profile_view_is_monotone() {
    let v: Value = serde_json::from_str(&front_profile(r#"{"factor": 1.3}"#).unwrap()).unwrap();
    let phi: Vec<f64> = v["phi"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(phi.len() > 300);
    assert!(phi.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn bad_parameters_are_reported() {
    assert!(wave_speed("{").unwrap_err().contains("bad parameters"));
    assert!(wave_speed(r#"{"sigma": -1}"#).is_err());
    assert!(DemoParams::parse(r#"{"tau": 0.07}"#).unwrap().config().is_err());
}

#[test]
fn simulation_relaxes_towards_the_front() {
    let mut s = Simulation::new(r#"{"tau": 0.5, "bump": 0.3}"#).unwrap();
    let e0 = s.error();
    s.advance(200).unwrap();
    assert!((s.time() - 10.0).abs() < 1e-9);
    assert_eq!(s.field().len(), s.xi().len());
    assert!(s.error() < 0.5 * e0, "{} vs {e0}", s.error());
}
