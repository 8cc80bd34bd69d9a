use l96::model::{drift, project_transverse, L96Config, StateVector};
use l96::noise::NoiseStream;
use l96::sde::{
    coupled_pair, eta_star, simulate, simulate_ou, super_lyapunov_probe, OuScheme, OuStepper, Scheme,
};

fn rk4(u: &StateVector<f64>, eps: f64, h: f64, steps: usize) -> StateVector<f64> {
    let mut u = u.clone();
    for _ in 0..steps {
        let k1 = drift(&u, eps).unwrap();
        let k2 = drift(&u.add(&k1.scale(&(h / 2.0))), eps).unwrap();
        let k3 = drift(&u.add(&k2.scale(&(h / 2.0))), eps).unwrap();
        let k4 = drift(&u.add(&k3.scale(&h)), eps).unwrap();
        let inc = k1.add(&k2.scale(&2.0)).add(&k3.scale(&2.0)).add(&k4);
        u = u.add(&inc.scale(&(h / 6.0)));
    }
    u
}

fn start() -> StateVector<f64> {
    StateVector::from_vec(vec![0.8, -0.3, 0.5, 1.1, 0.2, -0.7, 0.4, 0.9, -0.6])
}

fn endpoint_error(dt: f64, scheme: Scheme) -> f64 {
    let cfg = L96Config::noise_off(9, 0.5, dt, 0).unwrap();
    let end = simulate(&start(), &cfg, 1.0, usize::MAX, scheme, 0).unwrap();
    let reference = rk4(&start(), 0.5, 1e-4, 10_000);
    end.last().unwrap().sub(&reference).norm()
}

#[test]
fn euler_converges_to_rk4_at_first_order() {
    for scheme in [Scheme::Untamed, Scheme::Tamed] {
        let e1 = endpoint_error(2e-3, scheme);
        let e2 = endpoint_error(1e-3, scheme);
        let e3 = endpoint_error(5e-4, scheme);
        assert!(e1 < 5e-2, "{scheme:?}: {e1}");
        let r1 = e1 / e2;
        let r2 = e2 / e3;
        assert!((1.7..2.3).contains(&r1) && (1.7..2.3).contains(&r2), "{scheme:?}: {r1} {r2}");
    }
}

#[test]
fn noise_free_energy_decays_at_rate_two_eps() {
    // d|u|^2/dt = -2 eps |u|^2 since <B(u,u), u> = 0
    let cfg = L96Config::noise_off(9, 0.3, 1e-4, 0).unwrap();
    let end = simulate(&start(), &cfg, 2.0, usize::MAX, Scheme::Untamed, 0).unwrap();
    let ratio = end.last().unwrap().norm_sq() / start().norm_sq();
    assert!((ratio - (-1.2f64).exp()).abs() < 1e-3, "{ratio}");
}

#[test]
fn degenerate_noise_keeps_the_forced_subspace() {
    let cfg = L96Config::degenerate(9, 0.2, 1.0, 1e-3, 3).unwrap();
    let y0 = StateVector::from_vec(vec![0.5, 0.0, 0.0, -1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
    let path = simulate(&y0, &cfg, 20.0, 100, Scheme::Tamed, 0).unwrap();
    assert!(path.states.iter().all(|s| project_transverse(s).is_zero()));
}

#[test]
fn exact_ou_transition_has_stationary_moments() {
    let cfg = L96Config::degenerate(9, 1.0, 1.5, 1e-2, 7).unwrap();
    let mut ou = OuStepper::new(&cfg, OuScheme::Exact);
    let mut noise = NoiseStream::new(7, 0);
    let mut y = vec![0.0; 3];
    let (mut s1, mut s2, mut n) = (0.0f64, 0.0f64, 0.0f64);
    for step in 0..2_000_000u64 {
        ou.step(&mut y, &mut noise);
        if step >= 1000 {
            for x in &y {
                s1 += x;
                s2 += x * x;
                n += 1.0;
            }
        }
    }
    // stationary variance sigma^2 / 2; correlation time 1 / eps = 1 over a
    // horizon of 2e4 on three independent modes
    let target: f64 = 1.125;
    let span: f64 = 3.0 * 20_000.0;
    let mean_se = (target * 2.0 / span).sqrt();
    let var_se = target * (2.0 / span).sqrt();
    let var = s2 / n;
    assert!((s1 / n).abs() < 4.0 * mean_se);
    assert!((var - target).abs() < 4.0 * var_se, "var {var} se {var_se}");
}

#[test]
fn ou_path_agrees_with_full_system_on_forced_subspace() {
    // With the Euler variant, the OU path and the untamed full system take
    // identical steps on H_I.
    let cfg = L96Config::degenerate(9, 0.7, 1.0, 1e-3, 21).unwrap();
    let y0 = StateVector::from_vec(vec![0.3, 0.0, 0.0, -0.4, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let a = simulate_ou(&y0, &cfg, 1.0, 50, OuScheme::EulerMaruyama, 4).unwrap();
    let b = simulate(&y0, &cfg, 1.0, 50, Scheme::Untamed, 4).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!(x.sub(y).norm() < 1e-12);
    }
}

#[test]
fn strong_damping_synchronizes_a_pair() {
    let cfg = L96Config::degenerate(9, 5.0, 1.0, 1e-3, 2).unwrap();
    let v0 = start().scale(&-1.0);
    let pair = coupled_pair(&start(), &v0, &cfg, 50.0, 1e-6, 10, Scheme::Tamed, 0).unwrap();
    assert!(pair.synchronized);
    // distance contracts at least like the damping while near the OU subspace
    assert!(pair.sync_time.unwrap() < 10.0);
}

#[test]
fn identical_initial_states_are_synchronized_at_once() {
    let cfg = L96Config::degenerate(9, 0.1, 1.0, 1e-3, 2).unwrap();
    let pair = coupled_pair(&start(), &start(), &cfg, 1.0, 1e-6, 10, Scheme::Tamed, 0).unwrap();
    assert_eq!(pair.sync_time, Some(0.0));
}

#[test]
fn super_lyapunov_ratio_is_bounded_below_threshold_weight() {
    let cfg = L96Config::degenerate(9, 1.0, 1.0, 1e-3, 5).unwrap();
    let eta = 0.5 * eta_star(&cfg);
    let grid: Vec<StateVector<f64>> = [0.0, 1.0, 3.0].iter().map(|r| start().scale(&(r / start().norm()))).collect();
    let rep = super_lyapunov_probe(&cfg, eta, &grid, 2.0, 200, 0).unwrap();
    assert!(rep.points.iter().all(|p| p.rejected_paths == 0 && p.log_sup_ratio.is_finite()));
    // the sup over the path is at least the starting value
    assert!(rep.points.iter().all(|p| p.log_sup_ratio >= 0.0));
    assert!(super_lyapunov_probe(&cfg, 2.0 * eta_star(&cfg), &grid, 1.0, 10, 0).is_err());
}
