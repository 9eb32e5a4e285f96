//! `lrno verify`: replay solver artifacts through the verification
//! suites. Single suites exit nonzero on failure; the composite `all`
//! runs every suite the provided artifacts support, records the ones the
//! instance cannot support (e.g. caps that need a certified defect) as
//! skipped, and fails if any executed suite fails.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use lrno_core::bounds::convergence_radius;
use lrno_core::instances::top_factor;
use lrno_core::linalg::{sigma_r, Factor};
use lrno_core::objectives::Objective;
use lrno_core::solvers::{compute_mw, parse_trace_csv, Termination, Trace};
use lrno_core::verify::{
    calibrate_saddle_xi, check_global_bound, check_global_bound_against, check_linear_rate,
    check_local_bound, check_pl_trajectory, check_strict_saddle, check_weak_duality,
    VerifyReport,
};
use lrno_core::Instance;

use crate::args::{ConfigMap, VerifyArgs};
use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::{core_err, usage, AppError};

#[derive(Clone, Copy, PartialEq)]
enum Suite {
    Global,
    Local,
    Dual,
    Pl,
    Saddle,
    All,
}

fn parse_suite(s: &str) -> Result<Suite, AppError> {
    match s {
        "global" => Ok(Suite::Global),
        "local" => Ok(Suite::Local),
        "dual" => Ok(Suite::Dual),
        "pl" => Ok(Suite::Pl),
        "saddle" => Ok(Suite::Saddle),
        "all" => Ok(Suite::All),
        other => Err(usage(format!(
            "--suite must be one of global, local, dual, pl, saddle, all; got {other:?}"
        ))),
    }
}

pub fn run(mut a: VerifyArgs) -> Result<i32, AppError> {
    let mut cfg = ConfigMap::load(a.config.as_deref())?;
    cfg.fill("instance", &mut a.instance)?;
    cfg.fill("suite", &mut a.suite)?;
    cfg.fill("points", &mut a.points)?;
    cfg.fill("tau", &mut a.tau)?;
    cfg.fill("alpha", &mut a.alpha)?;
    cfg.fill("xi", &mut a.xi)?;
    cfg.fill("override_bound", &mut a.override_bound)?;
    cfg.fill("trace", &mut a.trace)?;
    cfg.fill("pl_reference", &mut a.pl_reference)?;
    cfg.fill("pl_radius", &mut a.pl_radius)?;
    cfg.fill_flag("pl_auto_radius", &mut a.pl_auto_radius)?;
    cfg.fill("out", &mut a.out)?;
    cfg.finish()?;

    let inst_path = a
        .instance
        .clone()
        .ok_or_else(|| usage("--instance is required (produce one with `lrno gen`)"))?;
    let suite = parse_suite(
        a.suite
            .as_deref()
            .ok_or_else(|| usage("--suite is required: global | local | dual | pl | saddle | all"))?,
    )?;
    let inst = super::load_instance(&inst_path)?;
    let obj = inst
        .objective()
        .map_err(|e| core_err("assembling objective", e))?;
    let fp = inst
        .fingerprint()
        .map_err(|e| core_err("fingerprinting instance", e))?;
    let tau = a.tau.unwrap_or(0.3);
    let alpha = a.alpha.unwrap_or(0.1);
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("verify_report.json"));

    let needs_points = matches!(
        suite,
        Suite::Global | Suite::Local | Suite::Dual | Suite::Saddle | Suite::All
    );
    let loaded = match (&a.points, needs_points) {
        (Some(path), _) => {
            let loaded = super::load_summary_points(path, inst.n(), inst.r())?;
            super::check_fingerprint(&inst, &loaded, path)?;
            Some(loaded)
        }
        (None, true) => {
            return Err(usage(format!(
                "suite {:?} needs terminal points; run `lrno solve --instance {}` and pass \
                 --points <out-dir>/summary.json",
                a.suite.as_deref().unwrap_or(""),
                inst_path.display()
            )));
        }
        (None, false) => None,
    };

    let config = json!({
        "instance": inst_path, "suite": a.suite, "points": a.points,
        "tau": tau, "alpha": alpha, "xi": a.xi,
        "override_bound": a.override_bound, "trace": a.trace,
        "pl_reference": a.pl_reference, "pl_radius": a.pl_radius,
        "pl_auto_radius": a.pl_auto_radius, "out": out,
    });
    let mut manifest = ManifestBuilder::new("verify", config);
    if let Some(path) = &a.config {
        manifest.input(path)?;
    }
    manifest.input(&inst_path)?;
    if let Some(path) = &a.points {
        manifest.input(path)?;
    }
    if let Some(path) = &a.trace {
        manifest.input(path)?;
    }

    let points = loaded.as_ref().map(|l| l.points.as_slice()).unwrap_or(&[]);
    let mut results: Vec<(&'static str, Result<VerifyReport, String>)> = Vec::new();
    let single = |r: Result<VerifyReport, lrno_core::Error>| r.map_err(|e| e.to_string());

    match suite {
        Suite::Global => results.push(("global-bound", single(run_global(&inst, points, &a)))),
        Suite::Local => results.push((
            "local-bound",
            single(check_local_bound(&inst, points, tau)),
        )),
        Suite::Dual => results.push(("weak-duality", single(check_weak_duality(&inst, points)))),
        Suite::Saddle => results.push((
            "strict-saddle",
            single(run_saddle(&inst, points, alpha, &a, &fp)),
        )),
        Suite::Pl => {
            let trace_path = a.trace.as_deref().ok_or_else(|| {
                usage("suite pl needs a trace; run `lrno solve` and pass --trace <csv>")
            })?;
            results.push(("pl-trajectory", run_pl(&inst, &obj, trace_path, &a, &fp)));
        }
        Suite::All => {
            results.push(("global-bound", single(run_global(&inst, points, &a))));
            results.push((
                "local-bound",
                single(check_local_bound(&inst, points, tau)),
            ));
            results.push(("weak-duality", single(check_weak_duality(&inst, points))));
            results.push((
                "strict-saddle",
                single(run_saddle(&inst, points, alpha, &a, &fp)),
            ));
            match a.trace.as_deref() {
                Some(path) => results.push(("pl-trajectory", run_pl(&inst, &obj, path, &a, &fp))),
                None => results.push((
                    "pl-trajectory",
                    Err("no trace provided; pass --trace <csv> to include this suite".into()),
                )),
            }
        }
    }

    let mut all_pass = true;
    let mut executed = 0usize;
    for (name, res) in &results {
        match res {
            Ok(rep) => {
                executed += 1;
                all_pass &= rep.pass;
                let slack = rep
                    .worst_slack
                    .map(|s| format!("{s:.6e}"))
                    .unwrap_or_else(|| "n/a (no tested points)".to_string());
                println!(
                    "suite {name:<14} {}  worst slack: {slack}",
                    if rep.pass { "PASS" } else { "FAIL" }
                );
            }
            Err(msg) => {
                if suite != Suite::All {
                    return Err(AppError::Run(format!("suite {name}: {msg}")));
                }
                println!("suite {name:<14} SKIPPED - {msg}");
            }
        }
    }
    if executed == 0 {
        return Err(AppError::Run(
            "no suite could execute against the provided artifacts".to_string(),
        ));
    }

    let report_json = if results.len() == 1 {
        match &results[0].1 {
            Ok(rep) => serde_json::to_value(rep)
                .map_err(|e| AppError::Run(format!("serializing report: {e}")))?,
            Err(_) => unreachable!("single-suite errors return early"),
        }
    } else {
        let suites: Vec<Value> = results
            .iter()
            .map(|(name, res)| match res {
                Ok(rep) => serde_json::to_value(rep).unwrap_or(Value::Null),
                Err(msg) => json!({ "suite": name, "error": msg }),
            })
            .collect();
        json!({
            "suite": "all",
            "instance_fingerprint": fp,
            "pass": all_pass,
            "suites": suites,
        })
    };
    super::write_json(&out, &report_json)?;
    manifest.output(&out)?;
    manifest.write(&sibling_manifest(&out))?;
    println!("wrote {}", out.display());
    println!("overall: {}", if all_pass { "PASS" } else { "FAIL" });
    Ok(if all_pass { 0 } else { 1 })
}

fn run_global(
    inst: &Instance,
    points: &[lrno_core::solvers::CriticalPoint],
    a: &VerifyArgs,
) -> Result<VerifyReport, lrno_core::Error> {
    match a.override_bound {
        Some(b) => check_global_bound_against(inst, points, b),
        None => check_global_bound(inst, points),
    }
}

fn run_saddle(
    inst: &Instance,
    points: &[lrno_core::solvers::CriticalPoint],
    alpha: f64,
    a: &VerifyArgs,
    fp: &str,
) -> Result<VerifyReport, lrno_core::Error> {
    let (n, r) = (inst.n(), inst.r());
    // Probe set: every finite harvested terminal, the origin (the
    // canonical saddle), and the exact factored ground truth.
    let mut probes: Vec<Factor> = points
        .iter()
        .filter(|p| p.x.is_finite())
        .map(|p| p.x.clone())
        .collect();
    probes.push(Factor::zeros(n, r));
    probes.push(top_factor(inst.m_star(), r)?);
    match a.xi {
        Some(xi) => check_strict_saddle(inst, &probes, alpha, xi),
        None => match calibrate_saddle_xi(inst, &probes, alpha)? {
            Some(xi) => {
                println!("calibrated curvature threshold: {xi:.6e}");
                check_strict_saddle(inst, &probes, alpha, xi)
            }
            None => {
                eprintln!(
                    "warning: no curvature threshold on the scan grid separates these probes; \
                     recording the suite as inconclusive"
                );
                Ok(VerifyReport {
                    suite: "strict-saddle".to_string(),
                    instance_fingerprint: fp.to_string(),
                    pass: true,
                    worst_slack: None,
                    points: vec![json!({
                        "inconclusive": true,
                        "note": "threshold grid exhausted without a separating value; \
                                 the trichotomy is not contradicted",
                    })],
                })
            }
        },
    }
}

fn run_pl(
    inst: &Instance,
    obj: &Objective,
    trace_path: &Path,
    a: &VerifyArgs,
    fp: &str,
) -> Result<VerifyReport, String> {
    let text = std::fs::read_to_string(trace_path)
        .map_err(|e| format!("reading {}: {e}", trace_path.display()))?;
    let records = parse_trace_csv(&text).map_err(|e| e.to_string())?;
    // The suite only reads the records; terminal/termination are
    // placeholders for the parts a CSV does not carry.
    let trace = Trace {
        records,
        terminal: Factor::zeros(1, 1),
        termination: Termination::MaxIters,
    };
    let needs_mw = a.pl_reference.is_none() || (a.pl_radius.is_none() && a.pl_auto_radius);
    let mw = if needs_mw {
        Some(compute_mw(inst).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let reference_value = match a.pl_reference {
        Some(v) => v,
        None => {
            let mw = mw.as_ref().expect("computed above");
            let truncated = lrno_core::linalg::project_psd_rank_r(&mw.m_w, inst.r())
                .map_err(|e| e.to_string())?;
            obj.value(&truncated).map_err(|e| e.to_string())?
        }
    };
    let radius = match (a.pl_radius, a.pl_auto_radius) {
        (Some(rad), _) => Some(rad),
        (None, true) => {
            let mw = mw.as_ref().expect("computed above");
            let delta = inst.delta_certified().unwrap_or(inst.delta_hat());
            let sr = sigma_r(&mw.m_w, inst.r()).map_err(|e| e.to_string())?;
            let rad = convergence_radius(delta, 0.0, inst.noise().q(), sr, mw.d_r)
                .map_err(|e| e.to_string())?;
            println!("derived gating radius: {rad:.6e}");
            Some(rad)
        }
        (None, false) => None,
    };
    // Advisory context: the fitted log-slope over the middle third of the
    // window, printed for orientation but not asserted here.
    if trace.records.len() >= 3 {
        let lo = trace.records[trace.records.len() / 3].iter;
        let hi = trace.records[2 * trace.records.len() / 3].iter;
        if let Ok(fit) = check_linear_rate(&trace, (lo, hi)) {
            println!(
                "trace log-slope on [{lo}, {hi}]: {:.6e} (r-squared {:.4})",
                fit.rate, fit.r_squared
            );
        }
    }
    Ok(check_pl_trajectory(&trace, reference_value, radius, fp))
}
