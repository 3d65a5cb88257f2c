mod common;

use goodexec::baselines::{aposteriori_optimal, static_optimal};
use goodexec::costs::SampleStats;
use goodexec::pathcalc::{SampledPath, TimeGrid};
use goodexec::pricemodels::{expected_path, sample_path, PriceModel};
use goodexec::rng::path_seed;
use goodexec::strategies::*;

fn closed(c: Criterion, p: &MarketParams, s: &SampledPath, e: &SampledPath) -> ExecutionPlan {
    match c {
        Criterion::Quadratic => good_exec_quadratic_closed(p, s, e),
        Criterion::TimeWeighted => good_exec_time_closed(p, s, e),
        Criterion::ValueAtRisk => good_exec_var_closed(p, s, e),
    }
    .unwrap()
}

fn ivp(c: Criterion, p: &MarketParams, s: &SampledPath, e: &SampledPath) -> ExecutionPlan {
    match c {
        Criterion::Quadratic => good_exec_quadratic_ivp(p, s, e),
        Criterion::TimeWeighted => good_exec_time_ivp(p, s, e),
        Criterion::ValueAtRisk => good_exec_var_ivp(p, s, e),
    }
    .unwrap()
}

fn brownian(n: usize, seed: u64) -> (SampledPath, SampledPath) {
    let grid = common::grid(n);
    let model = PriceModel::ArithmeticBrownian { s0: 100.0, sigma: 5.0 };
    (
        sample_path(&model, &grid, seed).unwrap(),
        expected_path(&model, &grid).unwrap(),
    )
}

#[test]
fn constant_price_both_constructions_follow_the_hyperbolic_schedule() {
    let p = common::params();
    let grid = common::grid(4096);
    let s = SampledPath::constant(&grid, 100.0).unwrap();
    let k = p.risk_ratio();
    for plan in [
        good_exec_quadratic_closed(&p, &s, &s).unwrap(),
        good_exec_quadratic_ivp(&p, &s, &s).unwrap(),
    ] {
        for (&t, &q) in grid.times().iter().zip(plan.inventory.values()) {
            let exact = 1e4 * (k * (1.0 - t)).sinh() / k.sinh();
            assert!((q - exact).abs() < 1e-3 * 1e4, "{} t={t}", plan.tag);
        }
    }
}

#[test]
fn vanishing_risk_matches_linear_oracle() {
    let (s, e) = brownian(512, 2);
    let p = MarketParams::new(1.35, 1e-12, 10_000.0, 1.0).unwrap();
    let plan = good_exec_quadratic_closed(&p, &s, &e).unwrap();
    let scale = 2.0 * 1.35 * 1.35;
    let t = s.times();
    let mut running = 0.0;
    let total: f64 = (0..t.len() - 1)
        .map(|i| 0.5 * (t[i + 1] - t[i]) * (e.values()[i] + e.values()[i + 1]))
        .sum();
    for i in 0..t.len() {
        if i > 0 {
            running += 0.5 * (t[i] - t[i - 1]) * (s.values()[i - 1] + s.values()[i]);
        }
        let oracle = (1.0 - t[i]) * 1e4 - running / scale + t[i] * total / scale;
        assert!((plan.inventory.values()[i] - oracle).abs() < 1e-6, "i={i}");
    }
}

#[test]
fn quadratic_and_value_at_risk_coincide_without_risk() {
    let (s, e) = brownian(1024, 3);
    let p = MarketParams::new(0.8, 0.0, 5_000.0, 1.0)
        .unwrap()
        .with_target(250.0)
        .unwrap();
    let a = good_exec_quadratic_closed(&p, &s, &e).unwrap();
    let b = good_exec_var_closed(&p, &s, &e).unwrap();
    assert!(a.inventory.sup_distance(&b.inventory).unwrap() <= 1e-10);
    assert!(a.rate.sup_distance(&b.rate).unwrap() <= 1e-10);
}

#[test]
fn static_and_hindsight_are_the_closed_form_with_one_path() {
    let (s, e) = brownian(512, 4);
    let p = common::params().with_target(1_000.0).unwrap();
    for c in Criterion::ALL {
        let st = static_optimal(c, &p, &e).unwrap();
        assert_eq!(st.inventory, closed(c, &p, &e, &e).inventory);
        let post = aposteriori_optimal(c, &p, &s).unwrap();
        assert_eq!(post.inventory, closed(c, &p, &s, &s).inventory);
        assert!(post.anticipative && post.fuel_constrained);
        assert!((post.terminal_inventory() - 1_000.0).abs() <= 1e-8 * 1e4, "{c}");
        assert!((st.terminal_inventory() - 1_000.0).abs() <= 1e-8 * 1e4, "{c}");
    }
}

#[test]
fn initial_rate_perturbation_propagates_as_hyperbolic_sine() {
    let (s, _) = brownian(1 << 14, 5);
    let p = common::params();
    let k = p.risk_ratio();
    let base = quadratic_from_initial_rate(&p, &s, -12_000.0).unwrap();
    let delta = 37.0;
    let moved = quadratic_from_initial_rate(&p, &s, -12_000.0 + delta).unwrap();
    for (i, &t) in s.times().iter().enumerate() {
        let diff = moved.inventory.values()[i] - base.inventory.values()[i];
        let exact = delta * (k * t).sinh() / k;
        assert!((diff - exact).abs() <= 1e-3 * delta, "t={t}: {diff} vs {exact}");
    }
}

#[test]
fn closed_and_forward_constructions_agree() {
    let (s, e) = brownian(1 << 13, 6);
    let p = common::params().with_target(500.0).unwrap();
    for c in Criterion::ALL {
        let a = closed(c, &p, &s, &e);
        let b = ivp(c, &p, &s, &e);
        let gap = a.inventory.sup_distance(&b.inventory).unwrap();
        assert!(gap <= 1e-3 * 1e4, "{c}: {gap}");
    }
}

#[test]
fn time_weighted_initial_rates_converge_on_curved_forecast() {
    // The forward construction's initial rate goes through a single
    // Wronskian-weighted integral, the closed form through left-point sums;
    // their gap is first order in the mesh.
    let gap = |n: usize| {
        let grid = common::grid(n);
        let model = PriceModel::BrownianBridge {
            s0: 103.893,
            face_value: 100.0,
            sigma: 1.1642,
            maturity: 1.0,
        };
        let e = expected_path(&model, &grid).unwrap();
        let curved = e.map(|t, v| v + 3.0 * (4.0 * t).sin());
        let s = sample_path(&model, &grid, 1).unwrap();
        let p = MarketParams::new(0.058_55, 0.073_41, 1_000.0, 1.0).unwrap();
        let a = good_exec_time_closed(&p, &s, &curved).unwrap().initial_rate();
        let b = good_exec_time_ivp(&p, &s, &curved).unwrap().initial_rate();
        ((a - b) / b).abs()
    };
    let (coarse, fine) = (gap(1 << 11), gap(1 << 13));
    assert!(fine <= 1e-5, "{fine}");
    assert!(coarse / fine > 3.0 && coarse / fine < 5.0, "{coarse} / {fine}");
}

/// `f = S + 2 impact^2 r` must satisfy `f' = dL/dq` along a good execution.
#[test]
fn first_order_conditions_hold_along_closed_forms() {
    let grid = common::grid(1 << 14);
    let s = SampledPath::from_fn(&grid, |t| 100.0 + 8.0 * (2.0 * t).sin() + 3.0 * t * t).unwrap();
    let e = SampledPath::from_fn(&grid, |t| 100.0 + 2.0 * t).unwrap();
    let p = common::params().with_target(800.0).unwrap();
    let c1sq = p.impact * p.impact;
    let c2sq = p.risk * p.risk;
    for c in Criterion::ALL {
        let plan = closed(c, &p, &s, &e);
        let t = grid.times();
        let f: Vec<f64> = (0..t.len())
            .map(|i| s.values()[i] + 2.0 * c1sq * plan.rate.values()[i])
            .collect();
        for i in (1..t.len() - 1).step_by(389) {
            let df = (f[i + 1] - f[i - 1]) / (t[i + 1] - t[i - 1]);
            let q = plan.inventory.values()[i];
            let expected = match c {
                Criterion::Quadratic => 2.0 * c2sq * (q - 800.0),
                Criterion::TimeWeighted => 2.0 * c2sq * t[i] * q,
                Criterion::ValueAtRisk => c2sq * s.values()[i],
            };
            assert!(
                (df - expected).abs() <= 1e-3 * (1.0 + expected.abs()),
                "{c} t={}: {df} vs {expected}",
                t[i]
            );
        }
        // Expected terminal inventory hits the target when the forecast is realized.
        let on_forecast = closed(c, &p, &e, &e);
        assert!((on_forecast.terminal_inventory() - 800.0).abs() <= 1e-8 * 1e4, "{c}");
    }
}

#[test]
fn terminal_inventory_is_unbiased() {
    let grid = common::grid(128);
    let model = PriceModel::ArithmeticBrownian { s0: 100.0, sigma: 5.0 };
    let e = expected_path(&model, &grid).unwrap();
    let p = common::params().with_target(300.0).unwrap();
    for c in Criterion::ALL {
        let ends: Vec<f64> = (0..2000)
            .map(|i| {
                let s = sample_path(&model, &grid, path_seed(8, i)).unwrap();
                closed(c, &p, &s, &e).terminal_inventory() - 300.0
            })
            .collect();
        let stats = SampleStats::new(&ends);
        assert!(
            stats.mean.abs() <= 3.0 * stats.stderr,
            "{c}: {} +- {}",
            stats.mean,
            stats.stderr
        );
    }
}

#[test]
fn plans_ignore_prices_after_the_evaluation_time() {
    let (s, e) = brownian(256, 9);
    let p = common::params();
    let cut = 100;
    let altered = SampledPath::new(
        s.grid().clone(),
        s.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| if i > cut { v + 50.0 * (i as f64).sin() } else { v })
            .collect(),
    )
    .unwrap();
    for c in Criterion::ALL {
        for build in [closed, ivp] {
            let a = build(c, &p, &s, &e);
            let b = build(c, &p, &altered, &e);
            assert_eq!(&a.inventory.values()[..=cut], &b.inventory.values()[..=cut], "{c}");
            assert_eq!(&a.rate.values()[..=cut], &b.rate.values()[..=cut], "{c}");
        }
    }
}

#[test]
fn pathwise_certificates_match_terminal_first_order_term() {
    let (s, e) = brownian(2048, 10);
    let p = common::params().with_target(200.0).unwrap();
    let var = SampledPath::constant(s.grid(), 4.0).unwrap();
    let cq = certificate_quadratic(&p, &s, &e, &var).unwrap();
    let plan = good_exec_quadratic_closed(&p, &s, &e).unwrap();
    let xi = plan.terminal_xi(&p, &s).unwrap();
    assert!((cq.xi - xi).abs() <= 1e-9 * xi);
    // Constant variance v: C^-1 = sqrt(v) (cosh(k T) - 1), up to trapezoid error.
    let k = p.risk_ratio();
    let c_inv = 2.0 * (k.cosh() - 1.0);
    assert!((1.0 / cq.c - c_inv).abs() <= 1e-6 * c_inv);

    let cv = certificate_var(&p, &s, &e).unwrap();
    let plan = good_exec_var_closed(&p, &s, &e).unwrap();
    let xi = plan.terminal_xi(&p, &s).unwrap();
    assert!((cv.xi - xi).abs() <= 1e-9 * xi);
}

#[test]
fn zero_risk_has_infinite_expected_certificate() {
    let (s, e) = brownian(64, 11);
    let p = MarketParams::new(1.0, 0.0, 10.0, 1.0).unwrap();
    let var = SampledPath::constant(s.grid(), 1.0).unwrap();
    assert!(certificate_quadratic(&p, &s, &e, &var).unwrap().c.is_infinite());
}

/// The quadratic good execution solves the Euler-Lagrange boundary problem
/// pinned at its own terminal inventory.
#[test]
fn good_execution_solves_its_pinned_boundary_problem() {
    let n = 4096;
    let (s, e) = brownian(n, 12);
    let p = common::params().with_target(400.0).unwrap();
    let plan = good_exec_quadratic_closed(&p, &s, &e).unwrap();
    let h = 1.0 / n as f64;
    let (c1sq, c2sq) = (p.impact * p.impact, p.risk * p.risk);
    let interior = n - 1;
    let mut lower = vec![0.0; interior];
    let mut diag = vec![0.0; interior];
    let mut upper = vec![0.0; interior];
    let mut rhs = vec![0.0; interior];
    let sv = s.values();
    for j in 0..interior {
        let i = j + 1;
        // 2 c1^2 (q_{i+1} - 2 q_i + q_{i-1}) / h^2 - 2 c2^2 q_i = -2 c2^2 xT - (S_{i+1} - S_{i-1}) / (2 h)
        lower[j] = 2.0 * c1sq / (h * h);
        upper[j] = 2.0 * c1sq / (h * h);
        diag[j] = -4.0 * c1sq / (h * h) - 2.0 * c2sq;
        rhs[j] = -2.0 * c2sq * 400.0 - (sv[i + 1] - sv[i - 1]) / (2.0 * h);
    }
    rhs[0] -= lower[0] * 1e4;
    rhs[interior - 1] -= upper[interior - 1] * plan.terminal_inventory();
    let q = common::thomas(&lower, &diag, &upper, &rhs);
    let worst = q
        .iter()
        .zip(&plan.inventory.values()[1..n])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3 * 1e4, "worst {worst}");
}

#[test]
fn airy_table_matches_power_series() {
    use statrs::function::gamma::gamma;
    let ai0 = 3f64.powf(-2.0 / 3.0) / gamma(2.0 / 3.0);
    let ai1 = -(3f64.powf(-1.0 / 3.0)) / gamma(1.0 / 3.0);
    let bi0 = 3f64.powf(-1.0 / 6.0) / gamma(2.0 / 3.0);
    let bi1 = 3f64.powf(1.0 / 6.0) / gamma(1.0 / 3.0);
    // u'' = x u gives a_{n+2} = a_{n-1} / ((n + 2)(n + 1)).
    let series = |u0: f64, u1: f64, x: f64| -> (f64, f64) {
        let mut a = vec![u0, u1, 0.0];
        for n in 1..120 {
            let next = a[n - 1] / ((n + 2) as f64 * (n + 1) as f64);
            a.push(next);
        }
        let v: f64 = a.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum();
        let d: f64 = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| i as f64 * c * x.powi(i as i32 - 1))
            .sum();
        (v, d)
    };
    let table = airy_pair(1e-6, 3.0).unwrap();
    let v0 = table.eval(0.0).unwrap();
    assert!((v0.ai - 0.355_028_053_9).abs() <= 1e-9 && (v0.ai - ai0).abs() <= 1e-9);
    assert!((v0.bi - 0.614_926_627_4).abs() <= 1e-9 && (v0.bi - bi0).abs() <= 1e-9);
    for i in 0..=60 {
        let x = 3.0 * i as f64 / 60.0;
        let v = table.eval(x).unwrap();
        let (a, da) = series(ai0, ai1, x);
        let (b, db) = series(bi0, bi1, x);
        assert!((v.ai - a).abs() <= 1e-9, "Ai({x})");
        assert!((v.bi - b).abs() <= 1e-9 * (1.0 + b.abs()), "Bi({x})");
        assert!((v.ai_prime - da).abs() <= 1e-9, "Ai'({x})");
        assert!((v.bi_prime - db).abs() <= 1e-9 * (1.0 + db.abs()), "Bi'({x})");
        assert!((v.wronskian() - std::f64::consts::FRAC_1_PI).abs() <= 1e-8);
    }
}

#[test]
fn airy_table_satisfies_its_equation() {
    let table = airy_pair(1e-6, 2.5).unwrap();
    let h = 1e-3;
    for i in 1..50 {
        let x = 2.4 * i as f64 / 50.0;
        let at = |dx: f64| table.eval(x + dx).unwrap();
        let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
        let mid = at(0.0);
        let stencil = |a: f64, b: f64, c: f64, d: f64| (a - 8.0 * b + 8.0 * c - d) / (12.0 * h);
        let ai_second = stencil(m2.ai_prime, m1.ai_prime, p1.ai_prime, p2.ai_prime);
        let bi_second = stencil(m2.bi_prime, m1.bi_prime, p1.bi_prime, p2.bi_prime);
        assert!((ai_second - x * mid.ai).abs() <= 1e-8 * (1.0 + mid.ai.abs()), "x={x}");
        assert!((bi_second - x * mid.bi).abs() <= 1e-8 * (1.0 + mid.bi.abs()), "x={x}");
    }
}

/// Direct evaluation of the windowed objectives for `E[q_t] = base_t + K s(t)`.
fn window_objectives(p: &MarketParams, e: &SampledPath, start_index: usize, kk: f64) -> (f64, f64) {
    let k = p.risk_ratio();
    let conv = common::direct_convolution(e, |u| (k * u).cosh());
    let t = e.times();
    let x0 = p.initial_inventory;
    let xt = p.target_inventory;
    let scale = 2.0 * p.impact * p.impact;
    let gap: Vec<f64> = (0..t.len())
        .map(|i| {
            let blend = 1.0 - (k * (1.0 - t[i])).sinh() / k.sinh();
            (1.0 - blend) * x0 + blend * xt - conv[i] / scale + kk * (k * t[i]).sinh() - xt
        })
        .collect();
    let mut sq = 0.0;
    let mut lin = 0.0;
    for i in start_index..t.len() - 1 {
        let h = t[i + 1] - t[i];
        sq += 0.5 * h * (gap[i] * gap[i] + gap[i + 1] * gap[i + 1]);
        lin += 0.5 * h * (gap[i] + gap[i + 1]);
    }
    (sq, lin)
}

#[test]
fn window_rules_minimize_their_objectives() {
    let grid = common::grid(400);
    let e = SampledPath::from_fn(&grid, |t| 100.0 + 5.0 * t).unwrap();
    let p = common::params().with_target(500.0).unwrap();
    let start = 0.5;
    let si = 200;
    let k_ms = alt_terminal_k(&p, &e, TerminalRule::MeanSquareWindow { start }).unwrap();
    // The objective is quadratic in K: its minimizer from three evaluations.
    let f = |kk: f64| window_objectives(&p, &e, si, kk).0;
    let (a, b, c) = (f(-1e3), f(0.0), f(1e3));
    let curvature = (a - 2.0 * b + c) / (2.0 * 1e6);
    let slope = (c - a) / (2.0 * 1e3);
    let oracle = -slope / (2.0 * curvature);
    assert!(
        (k_ms - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()),
        "{k_ms} vs {oracle}"
    );

    let k_avg = alt_terminal_k(&p, &e, TerminalRule::WindowAverage { start: 0.0 }).unwrap();
    assert!(window_objectives(&p, &e, 0, k_avg).1.abs() <= 1e-6 * 1e4);

    let k_unb = alt_terminal_k(&p, &e, TerminalRule::Unbiased).unwrap();
    assert!(f(k_ms) <= f(k_unb));
}

#[test]
fn shrinking_window_recovers_the_unbiased_coefficient() {
    let grid = common::grid(1 << 14);
    let e = SampledPath::from_fn(&grid, |t| 100.0 + 5.0 * t).unwrap();
    let p = common::params();
    let k_unb = alt_terminal_k(&p, &e, TerminalRule::Unbiased).unwrap();
    for rule in [
        |start| TerminalRule::MeanSquareWindow { start },
        |start| TerminalRule::WindowAverage { start },
    ] {
        let err = |width: f64| (alt_terminal_k(&p, &e, rule(1.0 - width)).unwrap() - k_unb).abs();
        // The inventory term moves fast near the horizon, so the gap closes
        // linearly in the window width.
        let (wide, narrow) = (err(1.0 / 64.0), err(1.0 / 4096.0));
        assert!(narrow <= 0.05 * k_unb.abs(), "{narrow}");
        assert!(wide / narrow > 32.0 && wide / narrow < 128.0, "{wide} / {narrow}");
    }
    let plan = good_exec_quadratic_with_rule(&p, &e, &e, TerminalRule::Unbiased).unwrap();
    assert!(plan.terminal_inventory().abs() <= 1e-8 * 1e4);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let p = common::params();
    let a = SampledPath::constant(&common::grid(10), 1.0).unwrap();
    let b = SampledPath::constant(&common::grid(20), 1.0).unwrap();
    assert!(good_exec_quadratic_closed(&p, &a, &b).is_err());
    let long = SampledPath::constant(&TimeGrid::uniform(2.0, 10).unwrap(), 1.0).unwrap();
    assert!(good_exec_var_ivp(&p, &long, &long).is_err());
    assert!(MarketParams::new(0.0, 1.0, 1.0, 1.0).is_err());
    assert!(MarketParams::new(1.0, -1.0, 1.0, 1.0).is_err());
}
