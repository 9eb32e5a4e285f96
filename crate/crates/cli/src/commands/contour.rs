//! `lrno contour`: invert a distance cap over a log-spaced distance axis
//! and a linear probability axis, writing a CSV (and optionally a filled
//! SVG heatmap) of the largest feasible isometry defect per cell.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;

use lrno_core::bounds::{contour_grid, BoundFamily, ContourParams};

use crate::args::{ConfigMap, ContourArgs};
use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::{svg, usage, AppError};

pub fn run(mut a: ContourArgs) -> Result<i32, AppError> {
    let mut cfg = ConfigMap::load(a.config.as_deref())?;
    cfg.fill("family", &mut a.family)?;
    cfg.fill("tau", &mut a.tau)?;
    cfg.fill("zeta1", &mut a.zeta1)?;
    cfg.fill("zeta2", &mut a.zeta2)?;
    cfg.fill("m", &mut a.m)?;
    cfg.fill("sigma", &mut a.sigma)?;
    cfg.fill("lambda1", &mut a.lambda1)?;
    cfg.fill("lambda_r", &mut a.lambda_r)?;
    cfg.fill("xi_min", &mut a.xi_min)?;
    cfg.fill("xi_max", &mut a.xi_max)?;
    cfg.fill("xi_steps", &mut a.xi_steps)?;
    cfg.fill("p_min", &mut a.p_min)?;
    cfg.fill("p_max", &mut a.p_max)?;
    cfg.fill("p_steps", &mut a.p_steps)?;
    cfg.fill("out", &mut a.out)?;
    cfg.fill("svg", &mut a.svg)?;
    cfg.finish()?;

    let family_name = a.family.as_deref().unwrap_or("local").to_string();
    let tau = a.tau.unwrap_or(0.5);
    let zeta1 = a.zeta1.unwrap_or(0.001);
    let zeta2 = a.zeta2.unwrap_or(0.0);
    let m = a.m.unwrap_or(1600);
    let sigma = a.sigma.unwrap_or(0.05);
    let lambda1 = a.lambda1.unwrap_or(1.5);
    let lambda_r = a.lambda_r.unwrap_or(1.0);
    let xi_min = a.xi_min.unwrap_or(0.5);
    let xi_max = a.xi_max.unwrap_or(300.0);
    let xi_steps = a.xi_steps.unwrap_or(60);
    let p_min = a.p_min.unwrap_or(0.5);
    let p_max = a.p_max.unwrap_or(0.99);
    let p_steps = a.p_steps.unwrap_or(50);
    let out = a.out.unwrap_or_else(|| PathBuf::from("contour.csv"));

    let family = match family_name.as_str() {
        "global" => BoundFamily::Global,
        "local" => BoundFamily::Local { tau },
        other => {
            return Err(usage(format!(
                "--family must be global or local; got {other:?}"
            )))
        }
    };
    if xi_steps < 2 || p_steps < 2 {
        return Err(usage("--xi-steps and --p-steps must be at least 2"));
    }
    if !(xi_min.is_finite() && xi_min > 0.0 && xi_max > xi_min) {
        return Err(usage(format!(
            "need 0 < xi-min < xi-max; got {xi_min} and {xi_max}"
        )));
    }
    if !(0.0 < p_min && p_min <= p_max && p_max < 1.0) {
        return Err(usage(format!(
            "need 0 < p-min <= p-max < 1; got {p_min} and {p_max}"
        )));
    }

    let xis: Vec<f64> = (0..xi_steps)
        .map(|i| {
            let t = i as f64 / (xi_steps - 1) as f64;
            (xi_min.ln() + t * (xi_max.ln() - xi_min.ln())).exp()
        })
        .collect();
    let ps: Vec<f64> = (0..p_steps)
        .map(|j| p_min + (p_max - p_min) * j as f64 / (p_steps - 1) as f64)
        .collect();

    let params = ContourParams {
        family,
        zeta1,
        zeta2,
        sigma,
        m,
        lambda1,
        lambda_r,
    };
    let cells =
        contour_grid(&params, &xis, &ps).map_err(|e| AppError::Run(format!("contour grid: {e}")))?;

    let config = json!({
        "family": family_name,
        "tau": if family_name == "local" { Some(tau) } else { None },
        "zeta1": zeta1, "zeta2": zeta2, "m": m, "sigma": sigma,
        "lambda1": lambda1, "lambda_r": lambda_r,
        "xi_min": xi_min, "xi_max": xi_max, "xi_steps": xi_steps,
        "p_min": p_min, "p_max": p_max, "p_steps": p_steps,
        "out": out, "svg": a.svg,
    });
    let mut manifest = ManifestBuilder::new("contour", config);
    if let Some(path) = &a.config {
        manifest.input(path)?;
    }

    let mut csv = String::from("xi,p,epsilon,delta\n");
    for c in &cells {
        match c.delta {
            Some(d) => {
                let _ = writeln!(csv, "{},{},{},{}", c.xi, c.p, c.epsilon, d);
            }
            None => {
                let _ = writeln!(csv, "{},{},{},infeasible", c.xi, c.p, c.epsilon);
            }
        }
    }
    super::write_text(&out, &csv)?;
    manifest.output(&out)?;

    if let Some(svg_path) = &a.svg {
        let values: Vec<Option<f64>> = cells.iter().map(|c| c.delta).collect();
        let doc = svg::heatmap(
            &xis,
            &ps,
            &values,
            "distance",
            "probability lower bound",
            "max feasible defect",
        );
        super::write_text(svg_path, &doc)?;
        manifest.output(svg_path)?;
        println!("wrote {}", svg_path.display());
    }

    let feasible = cells.iter().filter(|c| c.delta.is_some()).count();
    println!(
        "grid: {xi_steps} distances x {p_steps} probability levels, {feasible}/{} feasible",
        cells.len()
    );
    if feasible > 0 {
        let dmin = cells
            .iter()
            .filter_map(|c| c.delta)
            .fold(f64::INFINITY, f64::min);
        let dmax = cells
            .iter()
            .filter_map(|c| c.delta)
            .fold(f64::NEG_INFINITY, f64::max);
        println!("feasible defect range: [{dmin:.6}, {dmax:.6}]");
    }
    println!("wrote {}", out.display());
    manifest.write(&sibling_manifest(&out))?;
    Ok(0)
}
