//! Subcommand implementations plus helpers shared between them.

pub mod bounds;
pub mod contour;
pub mod fig2;
pub mod gen;
pub mod solve;
pub mod verify;

use std::path::Path;

use serde_json::Value;

use lrno_core::linalg::Factor;
use lrno_core::solvers::{CriticalPoint, PointOrder};
use lrno_core::Instance;

use crate::{core_err, io_err, usage, AppError};

/// Loads an instance, translating failures with the file named.
pub fn load_instance(path: &Path) -> Result<Instance, AppError> {
    Instance::load(path).map_err(|e| core_err(&format!("loading instance {}", path.display()), e))
}

/// Writes text, mapping failures to the I/O exit bucket.
pub fn write_text(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|e| io_err(&format!("writing {}", path.display()), e))
}

/// Pretty-prints a JSON value to a file with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Run(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// A solve summary read back from disk: the classified terminals plus the
/// fingerprint of the instance they came from.
pub struct LoadedPoints {
    pub points: Vec<CriticalPoint>,
    pub instance_fingerprint: String,
}

fn field_f64(v: &Value, key: &str) -> f64 {
    v.get(key).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

/// Parses the `summary.json` written by `lrno solve` back into classified
/// points. Non-finite scalars were serialized as JSON null and come back
/// as NaN; terminals from diverged runs may carry them.
pub fn load_summary_points(path: &Path, n: usize, r: usize) -> Result<LoadedPoints, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_err(&format!("reading points {}", path.display()), e))?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| AppError::Run(format!("parsing {}: {e}", path.display())))?;
    let fingerprint = root
        .get("instance_fingerprint")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let terminals = root
        .get("terminals")
        .and_then(Value::as_array)
        .ok_or_else(|| {
            AppError::Run(format!(
                "{} has no terminals array; expected the summary written by `lrno solve`",
                path.display()
            ))
        })?;
    let mut points = Vec::with_capacity(terminals.len());
    for (i, t) in terminals.iter().enumerate() {
        let raw: Vec<Option<f64>> = t
            .get("x_hat")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| {
                AppError::Run(format!("{}: terminal {i} x_hat: {e}", path.display()))
            })?
            .ok_or_else(|| {
                AppError::Run(format!("{}: terminal {i} has no x_hat", path.display()))
            })?;
        let data: Vec<f64> = raw.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        let x = Factor::new(n, r, data).map_err(|e| {
            AppError::Run(format!(
                "{}: terminal {i} does not match a {n}x{r} factor: {e}",
                path.display()
            ))
        })?;
        let order = match t.get("order").and_then(Value::as_str) {
            Some("second") => PointOrder::Second,
            Some("saddle") => PointOrder::Saddle,
            _ => PointOrder::First,
        };
        points.push(CriticalPoint {
            x,
            grad_norm: field_f64(t, "grad_norm"),
            hess_min_eig: field_f64(t, "hess_min_eig"),
            order,
            dist_to_mstar_fro: field_f64(t, "dist_to_mstar_fro"),
            sigma_r_of_m_hat: field_f64(t, "sigma_r_of_m_hat"),
            diverged: t.get("diverged").and_then(Value::as_bool).unwrap_or(false),
        });
    }
    Ok(LoadedPoints {
        points,
        instance_fingerprint: fingerprint,
    })
}

/// Guards against replaying artifacts from a different instance.
pub fn check_fingerprint(
    inst: &Instance,
    loaded: &LoadedPoints,
    points_path: &Path,
) -> Result<String, AppError> {
    let fp = inst
        .fingerprint()
        .map_err(|e| core_err("fingerprinting instance", e))?;
    if !loaded.instance_fingerprint.is_empty() && loaded.instance_fingerprint != fp {
        return Err(usage(format!(
            "{} was produced from a different instance (fingerprint {} vs {}); \
             re-run `lrno solve` against this instance",
            points_path.display(),
            loaded.instance_fingerprint,
            fp
        )));
    }
    Ok(fp)
}
