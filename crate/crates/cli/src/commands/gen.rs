//! `lrno gen`: materialize a sensing instance.

use std::path::PathBuf;

use serde_json::json;

use lrno_core::instances::{GenParams, NoiseFamily, OperatorKind};
use lrno_core::Instance;

use crate::args::{ConfigMap, GenArgs};
use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::{core_err, usage, AppError};

pub fn run(mut a: GenArgs) -> Result<i32, AppError> {
    let mut cfg = ConfigMap::load(a.config.as_deref())?;
    cfg.fill("n", &mut a.n)?;
    cfg.fill("r", &mut a.r)?;
    cfg.fill("m", &mut a.m)?;
    cfg.fill("sigma", &mut a.sigma)?;
    cfg.fill("seed", &mut a.seed)?;
    cfg.fill("family", &mut a.family)?;
    cfg.fill("lambda1", &mut a.lambda1)?;
    cfg.fill("lambda_r", &mut a.lambda_r)?;
    cfg.fill("certified_delta", &mut a.certified_delta)?;
    cfg.fill("out", &mut a.out)?;
    cfg.finish()?;

    let n = a.n.ok_or_else(|| usage("--n is required (ground-truth dimension)"))?;
    let r = a.r.ok_or_else(|| usage("--r is required (ground-truth rank)"))?;
    let sigma = a.sigma.unwrap_or(0.0);
    let seed = a.seed.unwrap_or(0);
    let family: NoiseFamily = match a.family.as_deref() {
        Some(s) => s.parse().map_err(|e: lrno_core::Error| usage(e.to_string()))?,
        None => NoiseFamily::Gaussian,
    };
    let lambda1 = a.lambda1.unwrap_or(1.5);
    let lambda_r = a
        .lambda_r
        .unwrap_or(if r == 1 { lambda1 } else { 1.0 });
    let (operator, m) = match a.certified_delta {
        Some(d) => {
            if let Some(m) = a.m {
                if m != n * n {
                    return Err(usage(format!(
                        "the certified operator fixes m = n\u{b2} = {}; got --m {m}",
                        n * n
                    )));
                }
            }
            (OperatorKind::Certified { delta: d }, n * n)
        }
        None => {
            let m = a.m.ok_or_else(|| {
                usage("--m is required for the gaussian operator (or pass --certified-delta)")
            })?;
            (OperatorKind::Gaussian, m)
        }
    };
    let out = a.out.unwrap_or_else(|| PathBuf::from("instance.json"));

    let config = json!({
        "n": n, "r": r, "m": m, "sigma": sigma, "seed": seed,
        "family": family.label(), "lambda1": lambda1, "lambda_r": lambda_r,
        "certified_delta": a.certified_delta, "out": out,
    });
    let mut manifest = ManifestBuilder::new("gen", config);
    manifest.seed(seed);
    if let Some(path) = &a.config {
        manifest.input(path)?;
    }

    let params = GenParams {
        n,
        r,
        m,
        seed,
        sigma,
        family,
        lambda1,
        lambda_r,
        operator,
    };
    let inst = Instance::generate(&params).map_err(|e| match e {
        lrno_core::Error::Io(inner) => AppError::Io(inner.to_string()),
        other => usage(format!("generation rejected the parameters: {other}")),
    })?;
    inst.save(&out)
        .map_err(|e| core_err(&format!("writing {}", out.display()), e))?;
    manifest.output(&out)?;

    let fp = inst
        .fingerprint()
        .map_err(|e| core_err("fingerprinting instance", e))?;
    println!("wrote {}", out.display());
    println!("fingerprint: {fp}");
    println!(
        "n={n} r={r} m={m} sigma={sigma} family={} lambda1={lambda1} lambda_r={lambda_r}",
        family.label()
    );
    match inst.delta_certified() {
        Some(d) => println!(
            "certified isometry defect: {d} (sampled estimate {:.6})",
            inst.delta_hat()
        ),
        None => println!("sampled isometry defect estimate: {:.6}", inst.delta_hat()),
    }
    let obj = inst
        .objective()
        .map_err(|e| core_err("assembling objective", e))?;
    match obj.rho() {
        Some(rho) => println!(
            "objective constants: zeta1={} zeta2={} rho={rho}",
            obj.zeta1(),
            obj.zeta2()
        ),
        None => println!(
            "objective constants: zeta1={} zeta2={}",
            obj.zeta1(),
            obj.zeta2()
        ),
    }
    println!("realized noise norm: {:.6e}", inst.noise().q());

    manifest.write(&sibling_manifest(&out))?;
    Ok(0)
}
