//! `lrno solve`: multi-start (perturbed) gradient descent with full
//! artifact capture. Starts are drawn from per-index seed substreams, so
//! the ensemble is identical at any thread count and matches the
//! library's own multi-start driver bit for bit.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use lrno_core::bounds;
use lrno_core::linalg::Factor;
use lrno_core::rng::Rng;
use lrno_core::solvers::{
    classify_point, compute_mw, default_init_scale, gradient_descent, perturbed_gd,
    CriticalPoint, GdConfig, PerturbConfig, PointOrder, Termination, Trace, DEFAULT_HESS_TOL,
};

use crate::args::{ConfigMap, SolveArgs};
use crate::manifest::ManifestBuilder;
use crate::{core_err, io_err, usage, AppError};

pub fn run(mut a: SolveArgs) -> Result<i32, AppError> {
    let mut cfg = ConfigMap::load(a.config.as_deref())?;
    cfg.fill("instance", &mut a.instance)?;
    cfg.fill("eta", &mut a.eta)?;
    cfg.fill("max_iters", &mut a.max_iters)?;
    cfg.fill("tol", &mut a.tol)?;
    cfg.fill("record_every", &mut a.record_every)?;
    cfg.fill("starts", &mut a.starts)?;
    cfg.fill("seed", &mut a.seed)?;
    cfg.fill("init_scale", &mut a.init_scale)?;
    cfg.fill_flag("perturbed", &mut a.perturbed)?;
    cfg.fill("reference", &mut a.reference)?;
    cfg.fill("out_dir", &mut a.out_dir)?;
    cfg.finish()?;

    let inst_path = a
        .instance
        .ok_or_else(|| usage("--instance is required (produce one with `lrno gen`)"))?;
    let inst = super::load_instance(&inst_path)?;
    let obj = inst
        .objective()
        .map_err(|e| core_err("assembling objective", e))?;
    let (n, r) = (inst.n(), inst.r());

    let eta = a.eta.unwrap_or(0.01);
    let max_iters = a.max_iters.unwrap_or(10_000);
    let tol = a.tol.unwrap_or(1e-8);
    let record_every = a.record_every.unwrap_or(1);
    let starts = a.starts.unwrap_or(1);
    let seed = a.seed.unwrap_or(0);
    let init_scale = a
        .init_scale
        .unwrap_or_else(|| default_init_scale(inst.lambda1(), r));
    let reference_kind = a.reference.as_deref().unwrap_or("mstar").to_string();
    let out_dir = a.out_dir.unwrap_or_else(|| PathBuf::from("solve_out"));
    if starts == 0 {
        return Err(usage("--starts must be at least 1"));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(usage(format!("--eta must be positive and finite; got {eta}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(usage(format!("--tol must be positive and finite; got {tol}")));
    }
    if record_every == 0 {
        return Err(usage("--record-every must be at least 1"));
    }

    let config = json!({
        "instance": inst_path, "eta": eta, "max_iters": max_iters, "tol": tol,
        "record_every": record_every, "starts": starts, "seed": seed,
        "init_scale": init_scale, "perturbed": a.perturbed,
        "reference": reference_kind, "out_dir": out_dir,
    });
    let mut manifest = ManifestBuilder::new("solve", config);
    manifest.seed(seed);
    if let Some(path) = &a.config {
        manifest.input(path)?;
    }
    manifest.input(&inst_path)?;

    let (reference, ref_info) = match reference_kind.as_str() {
        "mstar" => (inst.m_star().clone(), None),
        "mw" => {
            let mw = compute_mw(&inst)
                .map_err(|e| core_err("computing the noisy unconstrained optimum", e))?;
            println!(
                "noisy-optimum reference: residual past rank {r} = {:.6e}, unique = {}",
                mw.d_r, mw.unique
            );
            (mw.m_w, Some((mw.d_r, mw.unique)))
        }
        other => {
            return Err(usage(format!(
                "--reference must be mstar or mw; got {other:?}"
            )))
        }
    };

    // Step-size advisory: past this ceiling the in-basin contraction
    // argument no longer applies (the run itself may still behave).
    let delta = inst.delta_certified().unwrap_or(inst.delta_hat());
    if let Some(rho) = obj.rho() {
        if let Ok(ceiling) =
            bounds::max_step(rho, r, delta, 0.0, inst.noise().q(), reference.frob())
        {
            if eta > ceiling {
                eprintln!(
                    "warning: step size {eta} exceeds the contraction ceiling {ceiling:.6e}; \
                     the linear-rate guarantee does not apply"
                );
            }
        }
    }

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| io_err(&format!("creating {}", out_dir.display()), e))?;
    let gd_cfg = GdConfig {
        eta,
        max_iters,
        grad_tol: tol,
        record_every,
    };
    let perturbed = a.perturbed;
    let runs: Vec<(Trace, CriticalPoint)> = (0..starts)
        .into_par_iter()
        .map(|i| -> Result<(Trace, CriticalPoint), lrno_core::Error> {
            let mut rng = Rng::substream(seed, "multi-start", i as u64);
            let x0 = Factor::from_fn(n, r, |_, _| init_scale * rng.normal());
            let trace = if perturbed {
                let pseed = Rng::substream(seed, "perturb-seed", i as u64).next_u64();
                perturbed_gd(
                    &obj,
                    &x0,
                    &PerturbConfig::from_base(gd_cfg, n, r, pseed),
                    &reference,
                )?
            } else {
                gradient_descent(&obj, &x0, &gd_cfg, &reference)?
            };
            let point = if trace.termination == Termination::Diverged {
                let mut point = if trace.terminal.is_finite() {
                    classify_point(&obj, &trace.terminal, inst.m_star(), 10.0 * tol, DEFAULT_HESS_TOL)?
                } else {
                    CriticalPoint {
                        x: trace.terminal.clone(),
                        grad_norm: f64::NAN,
                        hess_min_eig: f64::NAN,
                        order: PointOrder::First,
                        dist_to_mstar_fro: f64::NAN,
                        sigma_r_of_m_hat: f64::NAN,
                        diverged: true,
                    }
                };
                point.order = PointOrder::First;
                point.diverged = true;
                point
            } else {
                classify_point(&obj, &trace.terminal, inst.m_star(), 10.0 * tol, DEFAULT_HESS_TOL)?
            };
            Ok((trace, point))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| core_err("solver run failed", e))?;

    let fp = inst
        .fingerprint()
        .map_err(|e| core_err("fingerprinting instance", e))?;
    let mut terminals = Vec::with_capacity(runs.len());
    for (i, (trace, p)) in runs.iter().enumerate() {
        let name = format!("trace_{i:03}.csv");
        let path = out_dir.join(&name);
        super::write_text(&path, &trace.to_csv())?;
        manifest.output(&path)?;
        terminals.push(json!({
            "start": i,
            "trace": name,
            "termination": trace.termination.label(),
            "iters": trace.records.last().map_or(0, |rec| rec.iter),
            "x_hat": p.x.data(),
            "grad_norm": p.grad_norm,
            "hess_min_eig": p.hess_min_eig,
            "order": p.order.label(),
            "dist_to_mstar_fro": p.dist_to_mstar_fro,
            "sigma_r_of_m_hat": p.sigma_r_of_m_hat,
            "diverged": p.diverged,
        }));
    }
    let summary = json!({
        "version": 1,
        "instance": inst_path,
        "instance_fingerprint": fp,
        "n": n,
        "r": r,
        "reference": reference_kind,
        "reference_d_r": ref_info.map(|(d, _)| d),
        "reference_unique": ref_info.map(|(_, u)| u),
        "eta": eta,
        "max_iters": max_iters,
        "grad_tol": tol,
        "record_every": record_every,
        "starts": starts,
        "seed": seed,
        "init_scale": init_scale,
        "perturbed": perturbed,
        "terminals": terminals,
    });
    let summary_path = out_dir.join("summary.json");
    super::write_json(&summary_path, &summary)?;
    manifest.output(&summary_path)?;

    let count = |f: &dyn Fn(&CriticalPoint) -> bool| runs.iter().filter(|(_, p)| f(p)).count();
    println!(
        "starts: {starts}  second-order: {}  saddle: {}  first-order only: {}  diverged: {}",
        count(&|p| p.order == PointOrder::Second && !p.diverged),
        count(&|p| p.order == PointOrder::Saddle),
        count(&|p| p.order == PointOrder::First && !p.diverged),
        count(&|p| p.diverged),
    );
    if let Some((i, p)) = runs
        .iter()
        .enumerate()
        .filter(|(_, (_, p))| p.dist_to_mstar_fro.is_finite())
        .map(|(i, (_, p))| (i, p))
        .min_by(|a, b| a.1.dist_to_mstar_fro.total_cmp(&b.1.dist_to_mstar_fro))
    {
        println!(
            "best distance to ground truth: {:.6e} (start {i})",
            p.dist_to_mstar_fro
        );
    }
    println!("wrote {}", summary_path.display());

    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(0)
}
