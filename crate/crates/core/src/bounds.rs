//! Closed-form recovery guarantees and their inversions.
//!
//! Each function evaluates one guarantee for factored low-rank recovery
//! under restricted-isometry and noise-influence constants:
//!
//! - [`global_bound`]: distance cap for every second-order critical point,
//!   valid on the whole landscape when the isometry defect stays below 1/3;
//! - [`local_bound`]: tighter cap for critical points already inside a
//!   neighborhood of the ground truth, parameterized by `tau`;
//! - [`max_delta_global`] / [`max_delta_local`]: inversions answering "how
//!   large may the isometry defect be so the cap stays below a target?";
//! - [`convergence_radius`] / [`max_step`]: basin radius and step-size
//!   ceiling for gradient descent on the factored objective;
//! - [`strict_saddle_noise_cap`]: the largest noise norm under which every
//!   point is near the truth, has a large gradient, or has a direction of
//!   sufficiently negative curvature;
//! - [`contour_grid`]: tabulates the inversions over a (target distance,
//!   probability) grid, converting probabilities to noise caps through the
//!   sub-Gaussian tail.
//!
//! Inputs are plain scalars; every domain restriction is enforced with an
//! explicit error naming the violated condition, never silently clamped.
//! The only clamping happens in the inverters, which report the open
//! supremum of a feasible interval shifted down by [`SUP_OFFSET`].

use crate::instances::noise_tail_epsilon;
use crate::{Error, Result};

/// Offset subtracted when an inverter's answer is the open endpoint of a
/// feasible interval (for example "any value strictly below 1/3 works").
pub const SUP_OFFSET: f64 = 1e-15;

fn hypothesis(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Hypothesis(msg()))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "{name} must be finite and nonnegative; got {v}"
        )))
    }
}

/// Distance cap holding at every approximate second-order critical point of
/// the factored objective, anywhere on the landscape:
/// `2·zeta1·epsilon / (1 − 3(delta + zeta2·epsilon))`.
///
/// Requires `delta < 1/3` and, when `zeta2 > 0`,
/// `epsilon < (1/3 − delta)/zeta2` so the denominator stays positive.
pub fn global_bound(delta: f64, zeta1: f64, zeta2: f64, epsilon: f64) -> Result<f64> {
    check_nonneg("delta", delta)?;
    check_nonneg("zeta1", zeta1)?;
    check_nonneg("zeta2", zeta2)?;
    check_nonneg("epsilon", epsilon)?;
    hypothesis(delta < 1.0 / 3.0, || {
        format!("global distance cap needs delta < 1/3; got delta = {delta}")
    })?;
    if zeta2 > 0.0 {
        let cap = (1.0 / 3.0 - delta) / zeta2;
        hypothesis(epsilon < cap, || {
            format!(
                "noise level must satisfy epsilon in [0, (1/3 - delta)/zeta2) = [0, {cap}); got epsilon = {epsilon}"
            )
        })?;
    }
    Ok(2.0 * zeta1 * epsilon / (1.0 - 3.0 * (delta + zeta2 * epsilon)))
}

/// The spectrum-dependent scale `sqrt(2(lambda1 + tau·lambda_r) / ((1 − tau)·lambda_r))`
/// converting matrix-space distances to factor-space distances over the
/// local region of radius `tau·lambda_r`.
pub fn local_scale(tau: f64, lambda1: f64, lambda_r: f64) -> Result<f64> {
    hypothesis(tau > 0.0 && tau < 1.0, || {
        format!("local region parameter must lie in (0, 1); got tau = {tau}")
    })?;
    hypothesis(
        lambda_r > 0.0 && lambda1 >= lambda_r && lambda1.is_finite(),
        || {
            format!(
                "spectrum endpoints must satisfy lambda1 >= lambda_r > 0; got lambda1 = {lambda1}, lambda_r = {lambda_r}"
            )
        },
    )?;
    Ok((2.0 * (lambda1 + tau * lambda_r) / ((1.0 - tau) * lambda_r)).sqrt())
}

/// Distance cap for approximate critical points already within
/// `tau·lambda_r` of the ground truth in matrix space:
/// `epsilon·(1 + delta + zeta2·epsilon)·zeta1·C / (sqrt(1 − tau) − zeta2·epsilon − delta)`
/// with `C` from [`local_scale`].
///
/// Requires `tau in (0, 1 − delta²)` and, when `zeta2 > 0`,
/// `epsilon < (sqrt(1 − tau) − delta)/zeta2`.
pub fn local_bound(
    delta: f64,
    zeta1: f64,
    zeta2: f64,
    epsilon: f64,
    tau: f64,
    lambda1: f64,
    lambda_r: f64,
) -> Result<f64> {
    check_nonneg("delta", delta)?;
    check_nonneg("zeta1", zeta1)?;
    check_nonneg("zeta2", zeta2)?;
    check_nonneg("epsilon", epsilon)?;
    hypothesis(delta < 1.0, || {
        format!("local distance cap needs delta < 1; got delta = {delta}")
    })?;
    hypothesis(tau > 0.0 && tau < 1.0 - delta * delta, || {
        format!(
            "local region parameter must satisfy 0 < tau < 1 - delta^2 = {}; got tau = {tau}",
            1.0 - delta * delta
        )
    })?;
    let s = (1.0 - tau).sqrt();
    if zeta2 > 0.0 {
        let cap = (s - delta) / zeta2;
        hypothesis(epsilon < cap, || {
            format!(
                "noise level must satisfy epsilon in [0, (sqrt(1 - tau) - delta)/zeta2) = [0, {cap}); got epsilon = {epsilon}"
            )
        })?;
    }
    let c = local_scale(tau, lambda1, lambda_r)?;
    Ok(epsilon * (1.0 + delta + zeta2 * epsilon) * zeta1 * c / (s - zeta2 * epsilon - delta))
}

/// Largest isometry defect `delta` for which [`global_bound`] stays at or
/// below the target distance `xi`. `None` means no `delta >= 0` works.
///
/// Solves the cap equation for `delta`:
/// `delta = (1 − 2·zeta1·epsilon/xi)/3 − zeta2·epsilon`.
/// With `zeta1·epsilon = 0` the cap is zero for every admissible `delta`,
/// so the open supremum `1/3 − zeta2·epsilon` is reported shifted by
/// [`SUP_OFFSET`].
pub fn max_delta_global(xi: f64, epsilon: f64, zeta1: f64, zeta2: f64) -> Result<Option<f64>> {
    hypothesis(xi.is_finite() && xi > 0.0, || {
        format!("target distance must be positive; got xi = {xi}")
    })?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("zeta1", zeta1)?;
    check_nonneg("zeta2", zeta2)?;
    let sup = 1.0 / 3.0 - zeta2 * epsilon;
    if sup <= 0.0 {
        return Ok(None);
    }
    if zeta1 * epsilon == 0.0 {
        let d = sup - SUP_OFFSET;
        return Ok(if d >= 0.0 { Some(d) } else { None });
    }
    let d = (1.0 - 2.0 * zeta1 * epsilon / xi) / 3.0 - zeta2 * epsilon;
    Ok(if d < 0.0 { None } else { Some(d) })
}

/// Largest isometry defect `delta` for which [`local_bound`] stays at or
/// below the target distance `xi`. `None` means no `delta >= 0` works.
///
/// The scale `C` is `delta`-free, so the cap equation is linear in `delta`:
/// `delta = (xi·(sqrt(1 − tau) − zeta2·epsilon) − epsilon·zeta1·C·(1 + zeta2·epsilon)) / (xi + epsilon·zeta1·C)`.
/// Any returned value automatically satisfies `tau < 1 − delta²` because it
/// stays strictly below `sqrt(1 − tau) − zeta2·epsilon`, the binding
/// constraint from the cap's denominator.
pub fn max_delta_local(
    xi: f64,
    epsilon: f64,
    zeta1: f64,
    zeta2: f64,
    tau: f64,
    lambda1: f64,
    lambda_r: f64,
) -> Result<Option<f64>> {
    hypothesis(xi.is_finite() && xi > 0.0, || {
        format!("target distance must be positive; got xi = {xi}")
    })?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("zeta1", zeta1)?;
    check_nonneg("zeta2", zeta2)?;
    let c = local_scale(tau, lambda1, lambda_r)?;
    let s = (1.0 - tau).sqrt();
    let sup = s - zeta2 * epsilon;
    if sup <= 0.0 {
        return Ok(None);
    }
    let k = epsilon * zeta1 * c;
    if k == 0.0 {
        let d = sup - SUP_OFFSET;
        return Ok(if d > 0.0 { Some(d) } else { None });
    }
    let numerator = xi * sup - k * (1.0 + zeta2 * epsilon);
    if numerator <= 0.0 {
        return Ok(None);
    }
    Ok(Some(numerator / (xi + k)))
}

/// Basin radius around the best rank-`r` approximation of the surrogate
/// matrix: starting factors closer than this (in factor distance) stay in
/// the basin and gradient descent converges linearly.
///
/// `radius = C_w²(1 − delta − zeta2·epsilon) − C_w·sqrt((1 − delta − zeta2·epsilon)/(1 + delta + zeta2·epsilon))·d_r`
/// with `C_w = sqrt(2(sqrt 2 − 1)·sigma_r_mw)`, floored at zero. `d_r` is
/// the Frobenius distance from the surrogate matrix to its best rank-`r`
/// approximation; at `d_r = 0` the radius reduces to
/// `2(sqrt 2 − 1)(1 − delta − zeta2·epsilon)·sigma_r_mw`.
pub fn convergence_radius(
    delta: f64,
    zeta2: f64,
    epsilon: f64,
    sigma_r_mw: f64,
    d_r: f64,
) -> Result<f64> {
    check_nonneg("delta", delta)?;
    check_nonneg("zeta2", zeta2)?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("sigma_r_mw", sigma_r_mw)?;
    check_nonneg("d_r", d_r)?;
    let slack = 1.0 - delta - zeta2 * epsilon;
    hypothesis(slack > 0.0, || {
        format!(
            "noise level must satisfy epsilon < (1 - delta)/zeta2; got delta = {delta}, zeta2 = {zeta2}, epsilon = {epsilon}"
        )
    })?;
    let cw = (2.0 * (std::f64::consts::SQRT_2 - 1.0) * sigma_r_mw).sqrt();
    let radius = cw * cw * slack - cw * (slack / (1.0 + delta + zeta2 * epsilon)).sqrt() * d_r;
    Ok(radius.max(0.0))
}

/// Step-size ceiling under which gradient descent inside the basin of
/// [`convergence_radius`] contracts:
/// `eta = 1 / (12·rho·sqrt(r)·(C·sqrt(1 − (delta + zeta2·epsilon)²) + mw_frob))`
/// with `C = 2(sqrt 2 − 1)`.
pub fn max_step(
    rho: f64,
    r: usize,
    delta: f64,
    zeta2: f64,
    epsilon: f64,
    mw_frob: f64,
) -> Result<f64> {
    hypothesis(rho.is_finite() && rho > 0.0, || {
        format!("curvature constant rho must be positive; got {rho}")
    })?;
    hypothesis(r >= 1, || "rank must be at least 1".to_string())?;
    check_nonneg("delta", delta)?;
    check_nonneg("zeta2", zeta2)?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("mw_frob", mw_frob)?;
    let t = delta + zeta2 * epsilon;
    hypothesis(t < 1.0, || {
        format!(
            "noise level must satisfy delta + zeta2*epsilon < 1; got {t}"
        )
    })?;
    let c = 2.0 * (std::f64::consts::SQRT_2 - 1.0);
    Ok(1.0 / (12.0 * rho * (r as f64).sqrt() * (c * (1.0 - t * t).sqrt() + mw_frob)))
}

/// Largest noise norm under which the landscape keeps the strict-saddle
/// trichotomy at scale `alpha`:
/// `(1/3 − delta) / (zeta2 + 2·zeta_alpha/3)` with
/// `zeta_alpha = zeta1 / (sqrt(2(sqrt 2 − 1))·sqrt(sigma_r_mstar)·alpha)`.
/// Returns `+inf` when both `zeta2` and `zeta_alpha` vanish.
pub fn strict_saddle_noise_cap(
    delta: f64,
    zeta1: f64,
    zeta2: f64,
    alpha: f64,
    sigma_r_mstar: f64,
) -> Result<f64> {
    check_nonneg("delta", delta)?;
    check_nonneg("zeta1", zeta1)?;
    check_nonneg("zeta2", zeta2)?;
    hypothesis(delta < 1.0 / 3.0, || {
        format!("strict-saddle cap needs delta < 1/3; got delta = {delta}")
    })?;
    hypothesis(alpha.is_finite() && alpha > 0.0, || {
        format!("near-truth radius alpha must be positive; got {alpha}")
    })?;
    hypothesis(sigma_r_mstar.is_finite() && sigma_r_mstar > 0.0, || {
        format!("sigma_r of the ground truth must be positive; got {sigma_r_mstar}")
    })?;
    let zeta_alpha =
        zeta1 / ((2.0 * (std::f64::consts::SQRT_2 - 1.0)).sqrt() * sigma_r_mstar.sqrt() * alpha);
    Ok((1.0 / 3.0 - delta) / (zeta2 + 2.0 * zeta_alpha / 3.0))
}

/// Which distance cap a contour grid inverts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundFamily {
    /// [`max_delta_global`]: whole-landscape cap.
    Global,
    /// [`max_delta_local`] at this region parameter.
    Local { tau: f64 },
}

/// Scalar problem constants shared by every cell of a contour grid.
#[derive(Debug, Clone, Copy)]
pub struct ContourParams {
    pub family: BoundFamily,
    pub zeta1: f64,
    pub zeta2: f64,
    /// Noise scale fed to the sub-Gaussian tail bound.
    pub sigma: f64,
    /// Number of measurements, likewise for the tail bound.
    pub m: usize,
    /// Ground-truth spectrum endpoints; only read by the local family.
    pub lambda1: f64,
    pub lambda_r: f64,
}

/// One evaluated cell: target distance, probability level, the noise cap
/// the tail bound assigns to that probability, and the largest feasible
/// isometry defect (`None` when no defect value works).
#[derive(Debug, Clone, PartialEq)]
pub struct ContourCell {
    pub xi: f64,
    pub p: f64,
    pub epsilon: f64,
    pub delta: Option<f64>,
}

/// Evaluates the chosen inverter over the full `(xi, p)` grid, row-major
/// with `xi` outermost, converting each probability level to a noise cap
/// through [`noise_tail_epsilon`].
pub fn contour_grid(
    params: &ContourParams,
    xi_grid: &[f64],
    p_grid: &[f64],
) -> Result<Vec<ContourCell>> {
    hypothesis(!xi_grid.is_empty() && !p_grid.is_empty(), || {
        "contour grids must be nonempty".to_string()
    })?;
    let mut epsilons = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        epsilons.push(noise_tail_epsilon(p, params.m, params.sigma)?);
    }
    let mut cells = Vec::with_capacity(xi_grid.len() * p_grid.len());
    for &xi in xi_grid {
        for (&p, &epsilon) in p_grid.iter().zip(&epsilons) {
            let delta = match params.family {
                BoundFamily::Global => {
                    max_delta_global(xi, epsilon, params.zeta1, params.zeta2)?
                }
                BoundFamily::Local { tau } => max_delta_local(
                    xi,
                    epsilon,
                    params.zeta1,
                    params.zeta2,
                    tau,
                    params.lambda1,
                    params.lambda_r,
                )?,
            };
            cells.push(ContourCell {
                xi,
                p,
                epsilon,
                delta,
            });
        }
    }
    Ok(cells)
}
