//! `lrno bounds`: evaluate one closed-form distance cap, either at an
//! explicit noise-norm cap or at a probability level routed through the
//! sub-Gaussian tail.

use serde_json::json;

use lrno_core::bounds::{global_bound, local_bound};
use lrno_core::instances::noise_tail_epsilon;

use crate::args::{BoundsArgs, ConfigMap};
use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::{usage, AppError};

pub fn run(mut a: BoundsArgs) -> Result<i32, AppError> {
    let mut cfg = ConfigMap::load(a.config.as_deref())?;
    cfg.fill("family", &mut a.family)?;
    cfg.fill("delta", &mut a.delta)?;
    cfg.fill("zeta1", &mut a.zeta1)?;
    cfg.fill("zeta2", &mut a.zeta2)?;
    cfg.fill("epsilon", &mut a.epsilon)?;
    cfg.fill("p", &mut a.p)?;
    cfg.fill("m", &mut a.m)?;
    cfg.fill("sigma", &mut a.sigma)?;
    cfg.fill("tau", &mut a.tau)?;
    cfg.fill("lambda1", &mut a.lambda1)?;
    cfg.fill("lambda_r", &mut a.lambda_r)?;
    cfg.fill("out", &mut a.out)?;
    cfg.finish()?;

    let family = a
        .family
        .as_deref()
        .ok_or_else(|| usage("--family is required: global | local"))?
        .to_string();
    let delta = a.delta.ok_or_else(|| usage("--delta is required"))?;
    let zeta1 = a.zeta1.unwrap_or(1.0);
    let zeta2 = a.zeta2.unwrap_or(0.0);
    let tau = a.tau.unwrap_or(0.5);
    let lambda1 = a.lambda1.unwrap_or(1.5);
    let lambda_r = a.lambda_r.unwrap_or(1.0);

    let epsilon = match (a.epsilon, a.p) {
        (Some(_), Some(_)) => {
            return Err(usage("pass either --epsilon or --p, not both"));
        }
        (Some(e), None) => e,
        (None, Some(p)) => {
            let m = a
                .m
                .ok_or_else(|| usage("--p needs --m and --sigma to size the noise tail"))?;
            let sigma = a
                .sigma
                .ok_or_else(|| usage("--p needs --m and --sigma to size the noise tail"))?;
            noise_tail_epsilon(p, m, sigma).map_err(|e| usage(e.to_string()))?
        }
        (None, None) => 0.0,
    };

    let value = match family.as_str() {
        "global" => global_bound(delta, zeta1, zeta2, epsilon),
        "local" => local_bound(delta, zeta1, zeta2, epsilon, tau, lambda1, lambda_r),
        other => {
            return Err(usage(format!(
                "--family must be global or local; got {other:?}"
            )))
        }
    }
    .map_err(|e| AppError::Run(format!("hypotheses violated: {e}")))?;

    println!("family: {family}");
    match family.as_str() {
        "local" => println!(
            "delta={delta} zeta1={zeta1} zeta2={zeta2} epsilon={epsilon} \
             tau={tau} lambda1={lambda1} lambda_r={lambda_r}"
        ),
        _ => println!("delta={delta} zeta1={zeta1} zeta2={zeta2} epsilon={epsilon}"),
    }
    if let Some(p) = a.p {
        println!(
            "noise cap from probability level {p} (m={}, sigma={})",
            a.m.unwrap_or(0),
            a.sigma.unwrap_or(0.0)
        );
    }
    println!("hypotheses: satisfied");
    println!("distance bound: {value}");

    if let Some(out) = &a.out {
        let config = json!({
            "family": family, "delta": delta, "zeta1": zeta1, "zeta2": zeta2,
            "epsilon": a.epsilon, "p": a.p, "m": a.m, "sigma": a.sigma,
            "tau": if family == "local" { Some(tau) } else { None },
            "lambda1": if family == "local" { Some(lambda1) } else { None },
            "lambda_r": if family == "local" { Some(lambda_r) } else { None },
            "out": out,
        });
        let mut manifest = ManifestBuilder::new("bounds", config);
        if let Some(path) = &a.config {
            manifest.input(path)?;
        }
        let report = json!({
            "family": family,
            "delta": delta,
            "zeta1": zeta1,
            "zeta2": zeta2,
            "epsilon": epsilon,
            "p": a.p,
            "m": a.m,
            "sigma": a.sigma,
            "tau": if family == "local" { Some(tau) } else { None },
            "lambda1": if family == "local" { Some(lambda1) } else { None },
            "lambda_r": if family == "local" { Some(lambda_r) } else { None },
            "bound": value,
        });
        super::write_json(out, &report)?;
        manifest.output(out)?;
        manifest.write(&sibling_manifest(out))?;
        println!("wrote {}", out.display());
    }
    Ok(0)
}
