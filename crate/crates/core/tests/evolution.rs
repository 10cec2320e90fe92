use nonlocal_fronts::evolution::*;
use nonlocal_fronts::kernels::{make_kernel, HeatKernelParams, KernelSpec};
use nonlocal_fronts::model::Model;
use nonlocal_fronts::monostable::{preset, Nonlinearity};
use nonlocal_fronts::profile::solve_profile;
use proptest::prelude::*;

fn model(kind: Nonlinearity, beta: f64, tau: f64) -> Model {
    Model::new(preset(kind).unwrap(), make_kernel(KernelSpec::gaussian(1.0)).unwrap(), HeatKernelParams::new(beta).unwrap(), tau).unwrap()
}

fn fisher(tau: f64) -> Model {
    model(Nonlinearity::FisherKpp, 0.0, tau)
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn evolve(m: &Model, st: FieldState, dt: f64, t: f64) -> Vec<f64> {
    let mut ev = Evolution::new(m, st, StepParams::for_model(m, dt), ConvPath::Direct).unwrap();
    ev.run(t, t).unwrap().pop().unwrap().values
}

#[test]
fn constant_state_follows_logistic_ode_to_first_order() {
    let m = fisher(0.0);
    let g = Grid::new(1, 15.0, 151).unwrap();
    let exact = 1.0 / (1.0 + (-5.0f64).exp());
    let errs: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&dt| {
            let st = FieldState::constant_history(g, 0.0, dt, front_far_field(1.0), vec![0.5; 151]).unwrap();
            let mut ev = Evolution::new(&m, st, StepParams::for_model(&m, dt), ConvPath::Direct).unwrap();
            ev.state.far_field = [AxisBoundary::replicate(), AxisBoundary::replicate()];
            let u = ev.run(5.0, 5.0).unwrap().pop().unwrap().values;
            let spread = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - u.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(spread < 1e-14, "nonlocal terms must cancel for constants, spread {spread:e}");
            (u[75] - exact).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let r = w[0] / w[1];
        assert!((1.7..=2.3).contains(&r), "ratio {r}, errors {errs:?}");
    }
}

#[test]
fn halving_dt_halves_the_change_of_a_front() {
    let m = fisher(0.5);
    let p = solve_profile(&m, 2.0, 60.0, 3000).unwrap();
    let g = Grid::new(1, 30.0, 301).unwrap();
    let run = |dt: f64| {
        let st = FieldState::from_fn(g, 0.5, dt, profile_far_field(&p), |s, x, _| {
            (p.eval(x + 2.0 * s) + 0.2 * (-(x * x) / 4.0).exp()).min(1.0)
        })
        .unwrap();
        evolve(&m, st, dt, 5.0)
    };
    let (a, b, c) = (run(0.02), run(0.01), run(0.005));
    let r = sup_diff(&a, &b) / sup_diff(&b, &c);
    assert!((1.7..=2.3).contains(&r), "ratio {r}");
}

#[test]
fn separable_data_give_tensor_convolution() {
    let m = fisher(0.0);
    let g = Grid::new(2, 15.0, 61).unwrap();
    let f = |x: f64| 0.5 * (1.0 + (0.7 * x).tanh());
    let h = |x: f64| (-(x * x) / 9.0).exp();
    let field: Vec<f64> = (0..g.len()).map(|k| {
        let (x1, x2) = g.position(k);
        f(x1) * h(x2)
    }).collect();
    let bcs = [AxisBoundary::replicate(), AxisBoundary::clamp(0.0, 0.0)];
    let stencil = grid_kernel_stencil(&m, &g).unwrap();
    let line = LineConvolver::new(stencil.clone(), g.points, g.dx, ConvPath::Direct);
    let jf = line.apply(&g.nodes(0).iter().map(|&x| f(x)).collect::<Vec<_>>(), bcs[0]);
    let jh = line.apply(&g.nodes(1).iter().map(|&x| h(x)).collect::<Vec<_>>(), bcs[1]);
    let tensor: Vec<f64> = (0..g.len()).map(|k| jf[k % g.points] * jh[k / g.points]).collect();
    for path in [ConvPath::Direct, ConvPath::Fft] {
        let sep = convolve(&field, &g, &m, &bcs, path).unwrap();
        assert!(sup_diff(&sep, &tensor) < 1e-10, "{path:?}");
    }
    let full = convolve_2d_direct(&field, &g, &stencil, &bcs);
    assert!(sup_diff(&full, &tensor) < 1e-10);
}

#[test]
fn exponential_far_field_continues_the_tail() {
    let m = fisher(0.0);
    let g = Grid::new(1, 20.0, 401).unwrap();
    let lambda = 0.6;
    let u: Vec<f64> = g.nodes(0).iter().map(|&x| (lambda * x).exp()).collect();
    let bcs = [AxisBoundary { left: FarField::Exponential { rate: lambda }, right: FarField::Exponential { rate: -lambda } }, AxisBoundary::replicate()];
    let s = grid_kernel_stencil(&m, &g).unwrap();
    let ju = convolve(&u, &g, &m, &bcs, ConvPath::Direct).unwrap();
    let moment = s.transform(lambda, g.dx);
    let worst = ju.iter().zip(&u).map(|(j, v)| (j / v - moment).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst:e}");
}

#[test]
fn equilibria_are_fixed() {
    let m = model(Nonlinearity::Nicholson { p: std::f64::consts::E, delta: 1.0, a: 1.0 }, 0.5, 1.0);
    let g = Grid::new(1, 15.0, 151).unwrap();
    for v in [0.0, 1.0] {
        let st = FieldState::constant_history(g, 1.0, 0.05, [AxisBoundary::clamp(v, v), AxisBoundary::replicate()], vec![v; 151]).unwrap();
        let u = evolve(&m, st, 0.05, 3.0);
        assert!(u.iter().all(|x| (x - v).abs() < 1e-13));
    }
}

#[test]
fn zero_field_grows_only_from_positive_data() {
    let m = fisher(0.0);
    let g = Grid::new(1, 15.0, 151).unwrap();
    let mut init = vec![0.0; 151];
    init[75] = 1e-3;
    let st = FieldState::constant_history(g, 0.0, 0.05, front_far_field(1.0), init).unwrap();
    let u = evolve(&m, st, 0.05, 4.0);
    assert!(u.iter().all(|&x| x > 0.0));
    assert!(u[75] > 1e-3);
}

#[test]
fn short_grid_is_rejected() {
    let m = fisher(0.0);
    let g = Grid::new(1, 5.0, 51).unwrap();
    let st = FieldState::constant_history(g, 0.0, 0.05, front_far_field(1.0), vec![0.5; 51]).unwrap();
    assert!(Evolution::new(&m, st, StepParams::for_model(&m, 0.05), ConvPath::Direct).is_err());
}

fn random_pair(seed: u64, n: usize, u_plus: f64) -> (Vec<f64>, Vec<f64>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.gen_range(0.0..=u_plus);
        let b: f64 = rng.gen_range(0.0..=u_plus);
        lo.push(a.min(b));
        hi.push(a.max(b));
    }
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ordered_histories_stay_ordered_and_in_range(seed in any::<u64>(), delayed in any::<bool>(), nicholson in any::<bool>()) {
        let tau = if delayed { 0.5 } else { 0.0 };
        let m = if nicholson {
            model(Nonlinearity::Nicholson { p: std::f64::consts::E, delta: 1.0, a: 1.0 }, 0.3, tau)
        } else {
            fisher(tau)
        };
        let up = m.u_plus();
        let g = Grid::new(1, 15.0, 151).unwrap();
        let dt = 0.05;
        let mk = |v: Vec<Vec<f64>>| {
            let mut st = FieldState::constant_history(g, tau, dt, front_far_field(up), v[0].clone()).unwrap();
            for (slot, f) in st.history.iter_mut().zip(&v[1..]) {
                *slot = f.clone();
            }
            Evolution::new(&m, st, StepParams::for_model(&m, dt), ConvPath::Direct).unwrap()
        };
        let slots = delay_steps(tau, dt).unwrap() + 1;
        let (los, his): (Vec<_>, Vec<_>) = (0..slots).map(|j| random_pair(seed.wrapping_add(j as u64), 151, up)).unzip();
        let (mut a, mut b) = (mk(los), mk(his));
        for _ in 0..40 {
            a.step().unwrap();
            b.step().unwrap();
            for (x, y) in a.state.now.iter().zip(&b.state.now) {
                prop_assert!(x - y <= 1e-10);
                prop_assert!(*x >= -1e-10 && *y <= up + 1e-10);
            }
        }
    }

    #[test]
    fn window_shift_keeps_interior_values(k in 0usize..200, v in 0.0f64..1.0) {
        let g = Grid::new(1, 10.0, 101).unwrap();
        let vals: Vec<f64> = (0..101).map(|i| v * i as f64 / 100.0).collect();
        let mut st = FieldState::constant_history(g, 0.0, 0.1, front_far_field(1.0), vals.clone()).unwrap();
        st.shift_window(k);
        prop_assert!((st.grid.origin[0] + k as f64 * g.dx).abs() < 1e-12);
        for i in 0..101 {
            let want = if i >= k { vals[i - k] } else { 0.0 };
            prop_assert_eq!(st.now[i], want);
        }
    }
}
