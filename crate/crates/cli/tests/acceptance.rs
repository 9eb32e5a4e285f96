//! End-to-end acceptance suite: one test per shipped claim.
//!
//! Each test prints a single `criterion NN: PASS/FAIL — …` line (visible
//! with `--nocapture`) before asserting, so a full run reads as a
//! checklist. Tests share harvested solver runs through `OnceLock`s:
//! whichever test needs a harvest first pays for it, the rest reuse it.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use lrno_core::bounds::{self, contour_grid, BoundFamily, ContourParams};
use lrno_core::instances::{
    estimate_rip, gen_certified_operator, gen_gaussian_operator, noise_tail_epsilon,
    sample_noise, DEFAULT_RIP_REFINE, DEFAULT_RIP_SAMPLES,
};
use lrno_core::linalg::{eigh, project_psd_rank_r};
use lrno_core::objectives::{asymmetric_lift, one_bit_objective, sensing_objective};
use lrno_core::rng::Rng;
use lrno_core::solvers::{
    classify_point, default_init_scale, multi_start, perturbed_gd, DEFAULT_HESS_TOL,
};
use lrno_core::verify::{check_global_bound, check_local_bound, check_weak_duality};
use lrno_core::{
    CriticalPoint, Factor, GdConfig, GenParams, Instance, Mat, NoiseFamily, Objective,
    OperatorKind, PerturbConfig, PointOrder, SymMatrix,
};

fn report(idx: u32, pass: bool, detail: &str, t0: Instant) {
    println!(
        "criterion {idx:02}: {} — {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64()
    );
}

/// `x + t·d` on factors.
fn step(x: &Factor, d: &Factor, t: f64) -> Factor {
    Factor::from_fn(x.n(), x.r(), |i, j| x.get(i, j) + t * d.get(i, j))
}

fn random_sym(n: usize, rng: &mut Rng) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, rng.normal());
        }
    }
    m
}

fn unit_direction(n: usize, r: usize, rng: &mut Rng) -> Factor {
    let mut u = Factor::from_fn(n, r, |_, _| rng.normal());
    let norm = u.frob();
    for v in u.data_mut() {
        *v /= norm;
    }
    u
}

// ---------------------------------------------------------------------
// criterion 1: analytic derivatives vs central finite differences
// ---------------------------------------------------------------------

fn fd_worst_errors(obj: &Objective, r: usize, points: usize, seed: u64) -> (f64, f64) {
    let n = obj.n();
    let mut rng = Rng::substream(seed, "fd-points", 0);
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    let (hg, hh) = (1e-5, 5e-4);
    for _ in 0..points {
        let x = Factor::from_fn(n, r, |_, _| 0.6 * rng.normal());
        let u = unit_direction(n, r, &mut rng);
        let f0 = obj.factored_value(&x).unwrap();
        let fp = obj.factored_value(&step(&x, &u, hg)).unwrap();
        let fm = obj.factored_value(&step(&x, &u, -hg)).unwrap();
        let fd_g = (fp - fm) / (2.0 * hg);
        let g = obj.factored_grad(&x).unwrap();
        let an_g: f64 = g.data().iter().zip(u.data()).map(|(a, b)| a * b).sum();
        worst_g = worst_g.max((fd_g - an_g).abs() / an_g.abs().max(1.0));

        let fp2 = obj.factored_value(&step(&x, &u, hh)).unwrap();
        let fm2 = obj.factored_value(&step(&x, &u, -hh)).unwrap();
        let fd_h = (fp2 + fm2 - 2.0 * f0) / (hh * hh);
        let an_h = obj.factored_hess_form(&x, &u).unwrap();
        worst_h = worst_h.max((fd_h - an_h).abs() / an_h.abs().max(1.0));
    }
    (worst_g, worst_h)
}

#[test]
fn criterion_01_derivatives_match_finite_differences() {
    let t0 = Instant::now();
    let mut rng = Rng::substream(101, "fd-setup", 0);

    let op = gen_gaussian_operator(6, 20, 101).unwrap();
    let b: Vec<f64> = (0..20).map(|_| 0.5 * rng.normal()).collect();
    let sensing = sensing_objective(op, b).unwrap();

    let y = Mat::from_fn(5, 5, |_, _| rng.uniform(0.05, 0.95));
    let w = Mat::from_fn(5, 5, |_, _| 0.1 * rng.normal());
    let logistic = one_bit_objective(y, w).unwrap();

    let inner_op = gen_gaussian_operator(4, 12, 102).unwrap();
    let inner_b: Vec<f64> = (0..12).map(|_| 0.5 * rng.normal()).collect();
    let lifted = asymmetric_lift(sensing_objective(inner_op, inner_b).unwrap(), 0.7).unwrap();

    let cases = [
        ("sensing", &sensing, 2u64),
        ("logistic", &logistic, 3),
        ("lifted", &lifted, 4),
    ];
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    for (_, obj, seed) in &cases {
        let (g, h) = fd_worst_errors(obj, 2, 100, 1000 + seed);
        worst_g = worst_g.max(g);
        worst_h = worst_h.max(h);
    }
    let pass = worst_g <= 1e-5 && worst_h <= 1e-4;
    report(
        1,
        pass,
        &format!(
            "max relative error over 3 objectives x 100 points: gradient {worst_g:.2e} (cap 1e-5), hessian form {worst_h:.2e} (cap 1e-4)"
        ),
        t0,
    );
    assert!(pass, "derivative mismatch: grad {worst_g:.3e}, hess {worst_h:.3e}");
    assert!(t0.elapsed() < Duration::from_secs(10), "over the 10s budget");
}

// ---------------------------------------------------------------------
// criterion 2: spectral rank truncation vs restarted factored descent
// ---------------------------------------------------------------------

/// Sensing stack reading out every matrix entry, so the objective is
/// exactly `½‖M − B‖_F²` up to the residual convention.
fn entrywise_objective(b: &SymMatrix) -> Objective {
    let n = b.n();
    let mut mats = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut a = SymMatrix::zeros(n);
            if i == j {
                a.set_sym(i, i, 1.0);
            } else {
                a.set_sym(i, j, 0.5);
            }
            mats.push(a);
        }
    }
    let op = lrno_core::MeasurementOperator::new(n, mats).unwrap();
    let obs = op.apply(b).unwrap();
    sensing_objective(op, obs).unwrap()
}

#[test]
fn criterion_02_rank_truncation_ties_or_beats_factored_descent() {
    let t0 = Instant::now();
    let mut rng = Rng::substream(202, "targets", 0);
    let cfg = GdConfig {
        eta: 0.02,
        max_iters: 2500,
        grad_tol: 1e-11,
        record_every: 2500,
    };
    let mut worst_margin = f64::INFINITY;
    let mut convergent_trials = 0usize;
    for trial in 0..100u64 {
        let b = random_sym(4, &mut rng);
        let projected = project_psd_rank_r(&b, 2).unwrap();
        let d_proj = projected.add_scaled(&b, -1.0).unwrap().frob();
        let obj = entrywise_objective(&b);
        let points = multi_start(&obj, 50, 2, 0.7, 5000 + trial, &cfg, &b).unwrap();
        let d_bm = points
            .iter()
            .filter(|p| p.dist_to_mstar_fro.is_finite())
            .map(|p| p.dist_to_mstar_fro)
            .fold(f64::INFINITY, f64::min);
        if d_bm.is_finite() {
            convergent_trials += 1;
            worst_margin = worst_margin.min(d_bm - d_proj);
        }
    }
    let pass = convergent_trials == 100 && worst_margin >= -1e-6;
    report(
        2,
        pass,
        &format!(
            "100 random 4x4 targets, 50 restarts each: worst (descent - truncation) margin {worst_margin:.2e} (floor -1e-6), {convergent_trials}/100 trials convergent"
        ),
        t0,
    );
    assert!(pass, "truncation beaten by {worst_margin:.3e} or trials diverged");
    assert!(t0.elapsed() < Duration::from_secs(30), "over the 30s budget");
}

// ---------------------------------------------------------------------
// criterion 3: certified operator quotient sandwich + estimate ceiling
// ---------------------------------------------------------------------

#[test]
fn criterion_03_certified_operator_quotient_sandwich() {
    let t0 = Instant::now();
    let (n, probe_rank) = (12usize, 4usize);
    let mut worst_slack = f64::INFINITY;
    let mut worst_gap = f64::NEG_INFINITY; // estimate − certified, must stay ≤ 0
    for (k, &delta) in [0.0f64, 0.2, 0.42, 0.6].iter().enumerate() {
        let op = gen_certified_operator(n, delta, 303).unwrap();
        let mut rng = Rng::substream(303, "sandwich-probes", k as u64);
        for _ in 0..10_000 {
            let w = Mat::from_fn(n, probe_rank, |_, _| rng.normal());
            let core = random_sym(probe_rank, &mut rng).to_mat();
            let raw = w.matmul(&core).unwrap().matmul(&w.transpose()).unwrap();
            let mut probe = SymMatrix::from_fn(n, |i, j| {
                0.5 * (raw.get(i, j) + raw.get(j, i))
            });
            let norm = probe.frob();
            if norm < 1e-9 {
                continue;
            }
            probe = probe.scale(1.0 / norm);
            let v = op.apply(&probe).unwrap();
            let form: f64 = v.iter().map(|x| x * x).sum();
            worst_slack = worst_slack
                .min(form - (1.0 - delta))
                .min((1.0 + delta) - form);
        }
        let est = estimate_rip(&op, probe_rank, DEFAULT_RIP_SAMPLES, DEFAULT_RIP_REFINE, 303)
            .unwrap();
        worst_gap = worst_gap.max(est - delta);
    }
    let pass = worst_slack >= -1e-8 && worst_gap <= 1e-12;
    report(
        3,
        pass,
        &format!(
            "4 defect levels x 10^4 unit probes of rank 4: worst sandwich slack {worst_slack:.2e} (floor -1e-8), worst (estimate - certified) {worst_gap:.2e}"
        ),
        t0,
    );
    assert!(pass, "sandwich slack {worst_slack:.3e}, estimate gap {worst_gap:.3e}");
    assert!(t0.elapsed() < Duration::from_secs(60), "over the 1min budget");
}

// ---------------------------------------------------------------------
// shared harvests for criteria 4-7 and 10
// ---------------------------------------------------------------------

struct Harvest {
    inst: Instance,
    points: Vec<CriticalPoint>,
}

fn harvest(delta: f64, sigma: f64, gen_seed: u64, solve_seed: u64) -> Harvest {
    let params = GenParams {
        n: 12,
        r: 2,
        m: 144,
        seed: gen_seed,
        sigma,
        family: NoiseFamily::Gaussian,
        lambda1: 1.5,
        lambda_r: 1.0,
        operator: OperatorKind::Certified { delta },
    };
    let inst = Instance::generate(&params).expect("instance generation");
    let obj = inst.objective().expect("objective assembly");
    let cfg = GdConfig {
        eta: 0.018,
        max_iters: 4000,
        grad_tol: 1e-10,
        record_every: 4000,
    };
    let points = multi_start(
        &obj,
        50,
        2,
        default_init_scale(1.5, 2),
        solve_seed,
        &cfg,
        inst.m_star(),
    )
    .expect("multi-start harvest");
    Harvest { inst, points }
}

fn noiseless_harvest() -> &'static Harvest {
    static H: OnceLock<Harvest> = OnceLock::new();
    H.get_or_init(|| harvest(0.2, 0.0, 41, 410))
}

fn noisy_harvest() -> &'static Harvest {
    static H: OnceLock<Harvest> = OnceLock::new();
    H.get_or_init(|| harvest(0.2, 0.05, 41, 410))
}

fn high_defect_harvest() -> &'static Harvest {
    static H: OnceLock<Harvest> = OnceLock::new();
    H.get_or_init(|| harvest(0.6, 0.02, 62, 620))
}

#[test]
fn criterion_04_noiseless_second_order_terminals_recover_truth() {
    let t0 = Instant::now();
    let h = noiseless_harvest();
    let second: Vec<&CriticalPoint> = h
        .points
        .iter()
        .filter(|p| matches!(p.order, PointOrder::Second))
        .collect();
    let max_dist = second
        .iter()
        .map(|p| p.dist_to_mstar_fro)
        .fold(0.0f64, f64::max);
    let pass = !second.is_empty() && max_dist <= 1e-5;
    report(
        4,
        pass,
        &format!(
            "50 noiseless starts: {} second-order terminals, max distance to truth {max_dist:.2e} (cap 1e-5)",
            second.len()
        ),
        t0,
    );
    assert!(pass, "max distance {max_dist:.3e} with {} terminals", second.len());
    assert!(t0.elapsed() < Duration::from_secs(120), "over the 2min budget");
}

#[test]
fn criterion_05_noisy_terminals_within_global_distance_cap() {
    let t0 = Instant::now();
    let h = noisy_harvest();
    let rep = check_global_bound(&h.inst, &h.points).unwrap();
    let cap = bounds::global_bound(
        h.inst.delta_certified().unwrap(),
        h.inst.operator().zeta1(),
        0.0,
        h.inst.noise().q(),
    )
    .unwrap();
    let slack = rep.worst_slack.unwrap_or(f64::INFINITY);
    let pass = rep.pass && slack >= -1e-6;
    report(
        5,
        pass,
        &format!(
            "50 noisy starts vs distance cap {cap:.4}: worst slack {slack:.4} (floor -1e-6)"
        ),
        t0,
    );
    assert!(pass, "cap violated: worst slack {slack:.3e}");
    assert!(t0.elapsed() < Duration::from_secs(120), "over the 2min budget");
}

#[test]
fn criterion_06_high_defect_ring_is_empty() {
    let t0 = Instant::now();
    let h = high_defect_harvest();
    let rep = check_local_bound(&h.inst, &h.points, 0.3).unwrap();
    let mut zones = [0usize; 3]; // inside, ring, outside
    for p in &rep.points {
        match p.get("zone").and_then(|z| z.as_str()) {
            Some("inside") => zones[0] += 1,
            Some("ring") => zones[1] += 1,
            Some("outside") => zones[2] += 1,
            _ => {}
        }
    }
    let pass = rep.pass && zones[1] == 0;
    report(
        6,
        pass,
        &format!(
            "50 starts at defect 0.6: zones inside/ring/outside = {}/{}/{} (ring must be 0)",
            zones[0], zones[1], zones[2]
        ),
        t0,
    );
    assert!(pass, "{} terminals landed in the excluded ring", zones[1]);
    assert!(t0.elapsed() < Duration::from_secs(120), "over the 2min budget");
}

#[test]
fn criterion_07_dual_value_clears_the_defect_ratio() {
    let t0 = Instant::now();
    let h = high_defect_harvest();
    let rep = check_weak_duality(&h.inst, &h.points).unwrap();
    let tested = rep
        .points
        .iter()
        .filter(|p| p.get("tested").and_then(|t| t.as_bool()) == Some(true))
        .count();
    let slack = rep.worst_slack.unwrap_or(f64::INFINITY);
    let rhs = {
        let d = h.inst.delta_certified().unwrap();
        (1.0 - d) / (1.0 + d)
    };
    let pass = rep.pass && tested > 0 && slack >= -1e-6;
    report(
        7,
        pass,
        &format!(
            "dual value vs ratio floor {rhs:.4} at {tested} displaced terminals: worst slack {slack:.4} (floor -1e-6)"
        ),
        t0,
    );
    assert!(pass, "weak duality violated: worst slack {slack:.3e}");
    assert!(t0.elapsed() < Duration::from_secs(60), "over the 1min budget");
}

// ---------------------------------------------------------------------
// criterion 8: two-step-size experiment via the shipped binary
// ---------------------------------------------------------------------

#[test]
fn criterion_08_two_step_sizes_plateau_and_linear_descent() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("f2");
    let out = Command::new(env!("CARGO_BIN_EXE_lrno"))
        .arg("fig2")
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .expect("running the two-step experiment");
    assert!(
        out.status.success(),
        "fig2 exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(out_dir.join("summary.json")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut small = (f64::NAN, f64::NAN);
    let mut large = (f64::NAN, f64::NAN);
    for run in summary["runs"].as_array().unwrap() {
        let eta = run["eta"].as_f64().unwrap();
        let fit = (
            run["rate"].as_f64().unwrap(),
            run["r_squared"].as_f64().unwrap(),
        );
        if (eta - 0.0002).abs() < 1e-12 {
            small = fit;
        } else if (eta - 0.001).abs() < 1e-12 {
            large = fit;
        }
    }
    let ratio = large.0.abs() / small.0.abs();
    let pass = small.0 < 0.0 && small.1 >= 0.9 && ratio <= 0.5;
    report(
        8,
        pass,
        &format!(
            "small step: slope {:.3e}, R^2 {:.3} (needs < 0 and >= 0.9); plateau ratio |large|/|small| {ratio:.3} (cap 0.5)",
            small.0, small.1
        ),
        t0,
    );
    assert!(
        pass,
        "small ({:.3e}, R^2 {:.3}), large {:.3e}, ratio {ratio:.3}",
        small.0, small.1, large.0
    );
    assert!(t0.elapsed() < Duration::from_secs(300), "over the 5min budget");
}

// ---------------------------------------------------------------------
// criterion 9: contour grid monotonicity and cross-tau ordering
// ---------------------------------------------------------------------

#[test]
fn criterion_09_contour_grids_are_monotone_and_ordered() {
    let t0 = Instant::now();
    let (nx, np) = (60usize, 50usize);
    let xis: Vec<f64> = (0..nx)
        .map(|k| {
            let t = k as f64 / (nx - 1) as f64;
            (0.5f64.ln() + t * (300f64.ln() - 0.5f64.ln())).exp()
        })
        .collect();
    let ps: Vec<f64> = (0..np)
        .map(|k| 0.5 + (0.99 - 0.5) * k as f64 / (np - 1) as f64)
        .collect();
    let taus = [0.1, 0.5, 0.9];
    let grids: Vec<Vec<Option<f64>>> = taus
        .iter()
        .map(|&tau| {
            contour_grid(
                &ContourParams {
                    family: BoundFamily::Local { tau },
                    zeta1: 0.001,
                    zeta2: 0.0,
                    sigma: 0.05,
                    m: 1600,
                    lambda1: 1.5,
                    lambda_r: 1.0,
                },
                &xis,
                &ps,
            )
            .unwrap()
            .into_iter()
            .map(|c| c.delta)
            .collect()
        })
        .collect();

    let tol = |d: f64| 1e-12 * d.abs().max(1.0);
    let mut mono_violations = 0usize;
    for grid in &grids {
        for j in 0..np {
            for i in 1..nx {
                // defect cap must not decrease as the target distance grows
                match (grid[(i - 1) * np + j], grid[i * np + j]) {
                    (Some(a), Some(b)) if b < a - tol(a) => mono_violations += 1,
                    (Some(_), None) => mono_violations += 1,
                    _ => {}
                }
            }
        }
        for i in 0..nx {
            for j in 1..np {
                // defect cap must not increase as the probability level grows
                match (grid[i * np + j - 1], grid[i * np + j]) {
                    (Some(a), Some(b)) if b > a + tol(a) => mono_violations += 1,
                    (None, Some(_)) => mono_violations += 1,
                    _ => {}
                }
            }
        }
    }
    let mut order_violations = 0usize;
    let mut common_cells = 0usize;
    for pair in grids.windows(2) {
        // tighter region parameter must not loosen the feasible defect
        for (a, b) in pair[0].iter().zip(&pair[1]) {
            if let (Some(a), Some(b)) = (a, b) {
                common_cells += 1;
                if *b > *a + tol(*a) {
                    order_violations += 1;
                }
            }
        }
    }
    let pass = mono_violations == 0 && order_violations == 0 && common_cells > 0;
    report(
        9,
        pass,
        &format!(
            "3 region grids of {nx}x{np}: {mono_violations} monotonicity violations, {order_violations} cross-region ordering violations over {common_cells} common feasible cells"
        ),
        t0,
    );
    assert!(pass, "{mono_violations} monotonicity / {order_violations} ordering violations");
    assert!(t0.elapsed() < Duration::from_secs(30), "over the 30s budget");
}

// ---------------------------------------------------------------------
// criterion 10: terminal curvature inequality on harvested points
// ---------------------------------------------------------------------

#[test]
fn criterion_10_terminal_curvature_inequality() {
    let t0 = Instant::now();
    let mut worst = f64::INFINITY;
    let mut tested = 0usize;
    for h in [noiseless_harvest(), noisy_harvest(), high_defect_harvest()] {
        let obj = h.inst.objective().unwrap();
        let delta = h.inst.delta_certified().unwrap();
        let factor = 1.0 + delta + obj.zeta2() * h.inst.noise().q();
        for p in h
            .points
            .iter()
            .filter(|p| matches!(p.order, PointOrder::Second))
        {
            let m_hat = p.x.outer();
            let spec = eigh(&m_hat).unwrap();
            let lam_r = spec.eigenvalues[p.x.r() - 1];
            let grad = obj.grad(&m_hat).unwrap();
            let lam_min = *eigh(&grad).unwrap().eigenvalues.last().unwrap();
            let slack = lam_r * factor - (-lam_min) + 1e-6;
            worst = worst.min(slack);
            tested += 1;
        }
    }
    let pass = tested > 0 && worst >= 0.0;
    report(
        10,
        pass,
        &format!(
            "curvature inequality at {tested} second-order terminals over 3 instances: worst slack {worst:.2e} (incl. 1e-6 allowance)"
        ),
        t0,
    );
    assert!(pass, "inequality violated by {:.3e}", -worst);
}

// ---------------------------------------------------------------------
// criterion 11: the origin saddle holds vanilla descent, kicks escape it
// ---------------------------------------------------------------------

#[test]
fn criterion_11_perturbation_escapes_the_origin_saddle() {
    let t0 = Instant::now();
    let params = GenParams {
        n: 8,
        r: 1,
        m: 64,
        seed: 1101,
        sigma: 0.02,
        family: NoiseFamily::Gaussian,
        lambda1: 1.5,
        lambda_r: 1.5,
        operator: OperatorKind::Certified { delta: 0.2 },
    };
    let inst = Instance::generate(&params).unwrap();
    let obj = inst.objective().unwrap();
    let origin = Factor::zeros(8, 1);

    // Vanilla fixed-step descent: the origin is exactly stationary, so the
    // iterate never moves and the gradient never grows.
    let mut x = origin.clone();
    let mut max_grad = 0.0f64;
    for _ in 0..1000 {
        let g = obj.factored_grad(&x).unwrap();
        max_grad = max_grad.max(g.frob());
        x = step(&x, &g, -0.018);
    }
    let stuck = max_grad <= 1e-14 && x.frob() == 0.0;

    // Seeded kicks move off the saddle and descend to a certified point.
    let pcfg = PerturbConfig::from_base(
        GdConfig {
            eta: 0.018,
            max_iters: 6000,
            grad_tol: 1e-10,
            record_every: 1000,
        },
        8,
        1,
        111,
    );
    let trace = perturbed_gd(&obj, &origin, &pcfg, inst.m_star()).unwrap();
    let point = classify_point(&obj, &trace.terminal, inst.m_star(), 1e-9, DEFAULT_HESS_TOL)
        .unwrap();
    let cap = bounds::global_bound(
        inst.delta_certified().unwrap(),
        inst.operator().zeta1(),
        obj.zeta2(),
        inst.noise().q(),
    )
    .unwrap();
    let escaped =
        matches!(point.order, PointOrder::Second) && point.dist_to_mstar_fro <= cap + 1e-6;
    let pass = stuck && escaped;
    report(
        11,
        pass,
        &format!(
            "vanilla descent held at origin (max grad {max_grad:.1e} over 10^3 iters); kicked run reached a {} point at distance {:.2e} vs cap {cap:.2e}",
            point.order.label(),
            point.dist_to_mstar_fro
        ),
        t0,
    );
    assert!(pass, "stuck={stuck} escaped={escaped}");
    assert!(t0.elapsed() < Duration::from_secs(30), "over the 30s budget");
}

// ---------------------------------------------------------------------
// criterion 12: noise tail bound empirical coverage
// ---------------------------------------------------------------------

#[test]
fn criterion_12_noise_tail_coverage() {
    let t0 = Instant::now();
    let (m, sigma, draws) = (190usize, 0.05f64, 2000u64);
    let mut detail = String::new();
    let mut pass = true;
    for &p in &[0.5, 0.9, 0.99] {
        let eps = noise_tail_epsilon(p, m, sigma).unwrap();
        let mut hits = 0u64;
        for k in 0..draws {
            let w = sample_noise(m, sigma, NoiseFamily::Gaussian, 120_000 + k).unwrap();
            if w.q() <= eps {
                hits += 1;
            }
        }
        let freq = hits as f64 / draws as f64;
        let floor = p - 3.0 * (p * (1.0 - p) / draws as f64).sqrt();
        if freq < floor {
            pass = false;
        }
        detail.push_str(&format!("p={p}: {freq:.4} (floor {floor:.4})  "));
    }
    report(12, pass, &format!("coverage over {draws} draws — {}", detail.trim_end()), t0);
    assert!(pass, "{detail}");
    assert!(t0.elapsed() < Duration::from_secs(30), "over the 30s budget");
}

// ---------------------------------------------------------------------
// criterion 13: bitwise determinism across reruns and thread counts
// ---------------------------------------------------------------------

fn run_cli(args: &[&str], extra: &[(&str, &Path)]) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lrno"));
    cmd.args(args);
    for (flag, path) in extra {
        cmd.arg(flag).arg(path);
    }
    let out = cmd.output().expect("spawning the binary");
    assert!(
        out.status.success(),
        "`lrno {}` exited with {:?}: {}",
        args.join(" "),
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Byte-compares every artifact in two run directories, skipping run
/// manifests (they record wall-clock time and are expected to differ).
fn assert_dirs_identical(a: &Path, b: &Path) -> usize {
    let mut names: Vec<String> = std::fs::read_dir(a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json" && !n.ends_with(".manifest.json"))
        .collect();
    names.sort();
    assert!(!names.is_empty(), "no artifacts found in {}", a.display());
    for name in &names {
        let left = std::fs::read(a.join(name)).unwrap();
        let right = std::fs::read(b.join(name))
            .unwrap_or_else(|_| panic!("{} missing from {}", name, b.display()));
        assert!(
            left == right,
            "{name} differs between {} and {}",
            a.display(),
            b.display()
        );
    }
    names.len()
}

#[test]
fn criterion_13_bitwise_determinism_across_threads() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let noiseless = root.join("noiseless.json");
    let noisy = root.join("noisy.json");
    run_cli(
        &[
            "gen", "--n", "12", "--r", "2", "--certified-delta", "0.2", "--sigma", "0",
            "--seed", "41",
        ],
        &[("--out", &noiseless)],
    );
    run_cli(
        &[
            "gen", "--n", "12", "--r", "2", "--certified-delta", "0.2", "--sigma", "0.05",
            "--seed", "41",
        ],
        &[("--out", &noisy)],
    );

    let mut compared = 0usize;
    for (inst, tag) in [(&noiseless, "noiseless"), (&noisy, "noisy")] {
        let first = root.join(format!("{tag}-seq"));
        let second = root.join(format!("{tag}-par"));
        for (threads, out_dir) in [("1", &first), ("4", &second)] {
            run_cli(
                &[
                    "solve", "--threads", threads, "--starts", "50", "--eta", "0.018",
                    "--max-iters", "4000", "--tol", "1e-10", "--record-every", "50",
                    "--seed", "410",
                ],
                &[("--instance", inst), ("--out-dir", out_dir)],
            );
        }
        compared += assert_dirs_identical(&first, &second);
    }

    let f_first = root.join("steps-seq");
    let f_second = root.join("steps-par");
    for (threads, out_dir) in [("1", &f_first), ("4", &f_second)] {
        run_cli(&["fig2", "--threads", threads], &[("--out-dir", out_dir)]);
    }
    compared += assert_dirs_identical(&f_first, &f_second);

    report(
        13,
        true,
        &format!(
            "two solver harvests and the two-step experiment re-run at 1 and 4 threads: {compared} artifacts byte-identical"
        ),
        t0,
    );
}
