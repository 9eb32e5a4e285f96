//! First-order solvers on the factored domain.
//!
//! [`gradient_descent`] runs fixed-step descent on `h(X) = f(XXᵀ, w)`,
//! recording objective value, gradient norm, and distance to a caller-chosen
//! reference matrix. [`perturbed_gd`] wraps the same engine with seeded
//! uniform-ball kicks that fire when the gradient stalls, escaping strict
//! saddles that trap the vanilla method (the factor `X = 0` is always a
//! stationary point, for example). [`multi_start`] harvests terminals from
//! seeded random initializations in parallel and classifies each with
//! [`classify_point`] into first-order, second-order, or saddle via the
//! smallest eigenvalue of the factored Hessian. [`compute_mw`] produces the
//! reference matrix the convergence experiments measure against: the exact
//! unconstrained least-squares solution when the operator determines it,
//! otherwise a documented deep-descent surrogate.

use crate::instances::{top_factor, Instance};
use crate::linalg::{eigh, pinv_apply, project_psd_rank_r, sigma_r, Factor, SymMatrix};
use crate::objectives::Objective;
use crate::rng::Rng;
use crate::{Error, Result};
use rayon::prelude::*;

/// Largest factored-Hessian dimension (`n·r`) assembled densely for exact
/// eigenvalues; larger problems fall back to shifted power iteration.
pub const DENSE_HESS_LIMIT: usize = 400;

/// Default Hessian eigenvalue tolerance separating "second-order" from
/// "saddle" at desk scale.
pub const DEFAULT_HESS_TOL: f64 = 1e-6;

/// Fixed-step gradient descent configuration.
#[derive(Debug, Clone, Copy)]
pub struct GdConfig {
    /// Step size; must be positive and finite.
    pub eta: f64,
    /// Iteration budget (steps taken before stopping).
    pub max_iters: usize,
    /// Stop when `‖∇_X h‖_F` falls to or below this.
    pub grad_tol: f64,
    /// Record every k-th iterate (the terminal state is always recorded).
    pub record_every: usize,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            eta: 0.01,
            max_iters: 10_000,
            grad_tol: 1e-8,
            record_every: 1,
        }
    }
}

impl GdConfig {
    fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Invalid(format!(
                "step size must be positive and finite; got {}",
                self.eta
            )));
        }
        if !(self.grad_tol.is_finite() && self.grad_tol > 0.0) {
            return Err(Error::Invalid(format!(
                "gradient tolerance must be positive; got {}",
                self.grad_tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Invalid("record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Perturbed descent configuration; see [`perturbed_gd`].
#[derive(Debug, Clone, Copy)]
pub struct PerturbConfig {
    pub base: GdConfig,
    /// Gradient level below which a perturbation may fire.
    pub g_thresh: f64,
    /// Radius of the uniform-ball kick in factor space.
    pub perturb_radius: f64,
    /// Iterations granted after each kick before the next decision.
    pub escape_window: usize,
    /// Consecutive kicks without objective progress before settling.
    pub max_perturbations: usize,
    /// Seed for the kick directions.
    pub seed: u64,
}

impl PerturbConfig {
    /// Defaults scaled from the base configuration and problem size:
    /// `g_thresh = 100·grad_tol`, kick radius equal to `g_thresh`, an
    /// escape window of `10·n·r` iterations, and a budget of 20 fruitless
    /// kicks.
    pub fn from_base(base: GdConfig, n: usize, r: usize, seed: u64) -> Self {
        let g_thresh = 100.0 * base.grad_tol;
        PerturbConfig {
            base,
            g_thresh,
            perturb_radius: g_thresh,
            escape_window: 10 * n * r,
            max_perturbations: 20,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.g_thresh > 0.0 && self.perturb_radius > 0.0) {
            return Err(Error::Invalid(
                "perturbation threshold and radius must be positive".into(),
            ));
        }
        if self.escape_window == 0 || self.max_perturbations == 0 {
            return Err(Error::Invalid(
                "escape window and perturbation budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a solver run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    Diverged,
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::Diverged => "diverged",
        }
    }
}

/// One recorded iterate.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    /// `‖XXᵀ − M_ref‖_F` against the reference supplied to the solver.
    pub dist_ref_fro: f64,
}

/// A solver run: decimated records, the terminal factor, and the stop
/// reason. Record iterations are strictly increasing, and a run that stops
/// as `Converged` has terminal gradient norm at or below the tolerance.
#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub terminal: Factor,
    pub termination: Termination,
}

impl Trace {
    /// CSV rendering with header `iter,objective,grad_norm,dist_ref_fro`.
    /// Floats print in shortest round-trip form, so equal traces render to
    /// byte-identical text.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,objective,grad_norm,dist_ref_fro\n");
        for rec in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                rec.iter, rec.objective, rec.grad_norm, rec.dist_ref_fro
            ));
        }
        out
    }
}

/// Parses the CSV rendering of [`Trace::to_csv`] back into records.
/// Accepts exactly the emitted schema (shortest round-trip floats keep
/// this lossless) and reports the offending line on any mismatch.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Invalid("empty trace CSV".into()))?;
    if header.trim() != "iter,objective,grad_norm,dist_ref_fro" {
        return Err(Error::Invalid(format!(
            "unexpected trace CSV header: {header}"
        )));
    }
    let mut records = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::Invalid(format!(
                "trace CSV line {}: expected 4 columns, got {}",
                k + 2,
                cols.len()
            )));
        }
        let field = |idx: usize, what: &str| -> Result<f64> {
            cols[idx].trim().parse().map_err(|e| {
                Error::Invalid(format!("trace CSV line {}: bad {what}: {e}", k + 2))
            })
        };
        let iter: usize = cols[0].trim().parse().map_err(|e| {
            Error::Invalid(format!("trace CSV line {}: bad iteration index: {e}", k + 2))
        })?;
        records.push(TraceRecord {
            iter,
            objective: field(1, "objective")?,
            grad_norm: field(2, "gradient norm")?,
            dist_ref_fro: field(3, "distance")?,
        });
    }
    Ok(records)
}

/// How confidently a terminal point is classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointOrder {
    /// Gradient not below tolerance (or the run diverged): no certificate.
    First,
    /// Small gradient and factored Hessian bounded below by `−tol_hess`.
    Second,
    /// Small gradient but a genuinely negative Hessian direction.
    Saddle,
}

impl PointOrder {
    pub fn label(&self) -> &'static str {
        match self {
            PointOrder::First => "first",
            PointOrder::Second => "second",
            PointOrder::Saddle => "saddle",
        }
    }
}

/// A classified terminal.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub x: Factor,
    pub grad_norm: f64,
    /// Smallest eigenvalue of the `nr × nr` factored Hessian.
    pub hess_min_eig: f64,
    pub order: PointOrder,
    /// `‖XXᵀ − M*‖_F` against the supplied ground truth.
    pub dist_to_mstar_fro: f64,
    /// r-th largest eigenvalue magnitude of `XXᵀ`.
    pub sigma_r_of_m_hat: f64,
    /// True when the producing run blew up; such points carry order
    /// `First` regardless of local geometry.
    pub diverged: bool,
}

enum HookOutcome {
    /// The hook consumed this iteration (kicked or restored); skip the
    /// gradient step.
    Consumed,
    /// Inside an escape window: suppress the convergence stop.
    SkipConvergence,
    /// No action.
    Pass,
}

struct PerturbState<'a> {
    cfg: &'a PerturbConfig,
    rng: Rng,
    last_perturb: Option<usize>,
    last_trigger_value: Option<f64>,
    fruitless: usize,
    best: Option<(f64, Factor)>,
    settled: bool,
}

impl<'a> PerturbState<'a> {
    fn new(cfg: &'a PerturbConfig) -> Self {
        PerturbState {
            cfg,
            rng: Rng::stream(cfg.seed, "perturbation"),
            last_perturb: None,
            last_trigger_value: None,
            fruitless: 0,
            best: None,
            settled: false,
        }
    }

    fn hook(&mut self, t: usize, value: f64, grad_norm: f64, x: &mut Factor) -> Result<HookOutcome> {
        if self.settled {
            return Ok(HookOutcome::Pass);
        }
        if let Some(lp) = self.last_perturb {
            if t < lp + self.cfg.escape_window {
                return Ok(HookOutcome::SkipConvergence);
            }
        }
        if grad_norm >= self.cfg.g_thresh {
            return Ok(HookOutcome::Pass);
        }
        if self.best.as_ref().map_or(true, |(bv, _)| value < *bv) {
            self.best = Some((value, x.clone()));
        }
        if let Some(prev) = self.last_trigger_value {
            let margin = 1e-10 * (1.0 + prev.abs());
            if value < prev - margin {
                self.fruitless = 0;
            } else {
                self.fruitless += 1;
            }
        }
        self.last_trigger_value = Some(value);
        if self.fruitless >= self.cfg.max_perturbations {
            // budget exhausted: restore the best stall point and finish
            // with plain descent
            self.settled = true;
            if let Some((_, bx)) = &self.best {
                *x = bx.clone();
            }
            return Ok(HookOutcome::Consumed);
        }
        self.last_perturb = Some(t);
        let n = x.n();
        let r = x.r();
        loop {
            let dir = Factor::from_fn(n, r, |_, _| self.rng.normal());
            let norm = dir.frob();
            if norm > 1e-12 {
                let u = self.rng.next_f64();
                let scale =
                    self.cfg.perturb_radius * u.powf(1.0 / (n * r) as f64) / norm;
                *x = x.add_scaled(&dir, scale)?;
                break;
            }
        }
        Ok(HookOutcome::Consumed)
    }
}

fn run_engine(
    obj: &Objective,
    x0: &Factor,
    cfg: &GdConfig,
    reference: &SymMatrix,
    mut perturb: Option<PerturbState<'_>>,
) -> Result<Trace> {
    cfg.validate()?;
    if x0.n() != obj.n() || reference.n() != obj.n() {
        return Err(Error::Dimension(format!(
            "solver dimensions disagree: factor {}, objective {}, reference {}",
            x0.n(),
            obj.n(),
            reference.n()
        )));
    }
    let mut x = x0.clone();
    let mut records: Vec<TraceRecord> = Vec::new();
    let mut threshold = f64::INFINITY;
    let mut t = 0usize;
    let termination = loop {
        if !x.is_finite() {
            break Termination::Diverged;
        }
        let m = x.outer();
        if !m.is_finite() {
            break Termination::Diverged;
        }
        let value = obj.value(&m)?;
        let g = obj.grad(&m)?;
        let mut gx = g.apply_factor(&x)?;
        for v in gx.data_mut() {
            *v *= 2.0;
        }
        let grad_norm = gx.frob();
        if !(value.is_finite() && grad_norm.is_finite()) {
            break Termination::Diverged;
        }
        if t == 0 {
            // blow-up guard, floored so a zero-objective start cannot trip it
            threshold = 1e6 * value.abs().max(1.0);
        }
        let record_now = |records: &mut Vec<TraceRecord>| {
            if records.last().map_or(true, |last| last.iter < t) {
                let dist = m
                    .add_scaled(reference, -1.0)
                    .map(|d| d.frob())
                    .unwrap_or(f64::NAN);
                records.push(TraceRecord {
                    iter: t,
                    objective: value,
                    grad_norm,
                    dist_ref_fro: dist,
                });
            }
        };
        if t % cfg.record_every == 0 {
            record_now(&mut records);
        }
        let mut skip_convergence = false;
        if let Some(ps) = perturb.as_mut() {
            match ps.hook(t, value, grad_norm, &mut x)? {
                HookOutcome::Consumed => {
                    t += 1;
                    continue;
                }
                HookOutcome::SkipConvergence => skip_convergence = true,
                HookOutcome::Pass => {}
            }
        }
        if !skip_convergence && grad_norm <= cfg.grad_tol {
            record_now(&mut records);
            break Termination::Converged;
        }
        if value > threshold {
            record_now(&mut records);
            break Termination::Diverged;
        }
        if t >= cfg.max_iters {
            record_now(&mut records);
            break Termination::MaxIters;
        }
        x = x.add_scaled(&gx, -cfg.eta)?;
        t += 1;
    };
    Ok(Trace {
        records,
        terminal: x,
        termination,
    })
}

/// Fixed-step descent `X ← X − η·∇_X h(X)`. Stops when the gradient norm
/// reaches `grad_tol` (converged), the budget runs out, or the objective
/// blows past a million times its starting magnitude or turns non-finite
/// (diverged — never a panic). Distances in the trace are measured against
/// `reference`.
pub fn gradient_descent(
    obj: &Objective,
    x0: &Factor,
    cfg: &GdConfig,
    reference: &SymMatrix,
) -> Result<Trace> {
    run_engine(obj, x0, cfg, reference, None)
}

/// Gradient descent with seeded saddle-escape kicks: whenever the gradient
/// norm sits below `g_thresh` and no kick happened within the escape
/// window, the factor is displaced uniformly in a ball of the configured
/// radius. Kicks that fail to lower the objective count as fruitless;
/// after `max_perturbations` consecutive fruitless kicks the solver
/// restores the best stall point and finishes with plain descent. Driven
/// entirely by `cfg.seed`: identical inputs give identical traces.
pub fn perturbed_gd(
    obj: &Objective,
    x0: &Factor,
    cfg: &PerturbConfig,
    reference: &SymMatrix,
) -> Result<Trace> {
    cfg.validate()?;
    run_engine(obj, x0, &cfg.base, reference, Some(PerturbState::new(cfg)))
}

fn rayleigh_extreme<F>(apply: F, n: usize, r: usize, iters: usize, rng: &mut Rng) -> Result<f64>
where
    F: Fn(&Factor) -> Result<Factor>,
{
    let mut v = Factor::from_fn(n, r, |_, _| rng.normal());
    let norm = v.frob();
    if norm <= f64::MIN_POSITIVE {
        return Ok(0.0);
    }
    for e in v.data_mut() {
        *e /= norm;
    }
    let mut ray = 0.0;
    let mut prev = f64::INFINITY;
    for _ in 0..iters {
        let w = apply(&v)?;
        ray = v.data().iter().zip(w.data()).map(|(a, b)| a * b).sum();
        let wnorm = w.frob();
        if wnorm <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        v = w;
        let vd = v.data_mut();
        for e in vd {
            *e /= wnorm;
        }
        if (ray - prev).abs() <= 1e-12 * ray.abs().max(1.0) {
            break;
        }
        prev = ray;
    }
    Ok(ray)
}

fn hess_min_eig_with(
    obj: &Objective,
    m: &SymMatrix,
    g: &SymMatrix,
    x: &Factor,
    power_iters: usize,
) -> Result<f64> {
    let dim = x.n() * x.r();
    if dim <= DENSE_HESS_LIMIT {
        let h = obj.factored_hess_matrix(x)?;
        let spec = eigh(&h)?;
        return Ok(spec.eigenvalues[dim - 1]);
    }
    // dominant signed eigenvalue, then the complement under a safe shift
    let mut rng = Rng::stream(0, "hessian-probe");
    let top = rayleigh_extreme(
        |u| obj.factored_hess_vec_with(m, g, x, u),
        x.n(),
        x.r(),
        power_iters,
        &mut rng,
    )?;
    let c = 1.5 * top.abs() + 1.0;
    let mu = rayleigh_extreme(
        |u| {
            let hu = obj.factored_hess_vec_with(m, g, x, u)?;
            let mut out = hu;
            for (o, uv) in out.data_mut().iter_mut().zip(u.data()) {
                *o = c * uv - *o;
            }
            Ok(out)
        },
        x.n(),
        x.r(),
        power_iters,
        &mut rng,
    )?;
    Ok(c - mu)
}

/// Smallest eigenvalue of the factored Hessian at `x`: exact dense
/// assembly up to [`DENSE_HESS_LIMIT`] coordinates, shifted power
/// iteration beyond.
pub fn hess_min_eig(obj: &Objective, x: &Factor) -> Result<f64> {
    let m = x.outer();
    let g = obj.grad(&m)?;
    hess_min_eig_with(obj, &m, &g, x, 500)
}

/// Classifies a factor as first-order / second-order / saddle from its
/// gradient norm and smallest factored-Hessian eigenvalue, and measures it
/// against the supplied ground truth.
pub fn classify_point(
    obj: &Objective,
    x: &Factor,
    m_star: &SymMatrix,
    tol: f64,
    tol_hess: f64,
) -> Result<CriticalPoint> {
    if x.n() != obj.n() || m_star.n() != obj.n() {
        return Err(Error::Dimension(format!(
            "classification dimensions disagree: factor {}, objective {}, truth {}",
            x.n(),
            obj.n(),
            m_star.n()
        )));
    }
    let m = x.outer();
    let g = obj.grad(&m)?;
    let mut gx = g.apply_factor(x)?;
    for v in gx.data_mut() {
        *v *= 2.0;
    }
    let grad_norm = gx.frob();
    let hess_min = hess_min_eig_with(obj, &m, &g, x, 500)?;
    let order = if grad_norm <= tol {
        if hess_min >= -tol_hess {
            PointOrder::Second
        } else {
            PointOrder::Saddle
        }
    } else {
        PointOrder::First
    };
    let dist = m.add_scaled(m_star, -1.0)?.frob();
    let sig = sigma_r(&m, x.r())?;
    Ok(CriticalPoint {
        x: x.clone(),
        grad_norm,
        hess_min_eig: hess_min,
        order,
        dist_to_mstar_fro: dist,
        sigma_r_of_m_hat: sig,
        diverged: false,
    })
}

/// Initialization scale that puts `‖X₀X₀ᵀ‖` at the ground-truth energy:
/// `(λ₁ / r)^{1/2}`.
pub fn default_init_scale(lambda1: f64, r: usize) -> f64 {
    (lambda1 / r.max(1) as f64).sqrt()
}

/// Runs [`gradient_descent`] from `k` seeded Gaussian initializations
/// (entry standard deviation `init_scale`) and classifies every terminal.
/// Starts are independent, run in parallel, and the output is ordered by
/// start index, so results are identical at any thread count. Diverged
/// runs yield flagged first-order entries rather than errors.
pub fn multi_start(
    obj: &Objective,
    k: usize,
    r: usize,
    init_scale: f64,
    seed: u64,
    cfg: &GdConfig,
    m_star: &SymMatrix,
) -> Result<Vec<CriticalPoint>> {
    if k == 0 {
        return Err(Error::Invalid("need at least one start".into()));
    }
    cfg.validate()?;
    let n = obj.n();
    (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = Rng::substream(seed, "multi-start", i as u64);
            let x0 = Factor::from_fn(n, r, |_, _| init_scale * rng.normal());
            let trace = gradient_descent(obj, &x0, cfg, m_star)?;
            if trace.termination == Termination::Diverged {
                let finite = trace.terminal.is_finite();
                let mut point = if finite {
                    classify_point(obj, &trace.terminal, m_star, 10.0 * cfg.grad_tol, DEFAULT_HESS_TOL)?
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
                return Ok(point);
            }
            classify_point(
                obj,
                &trace.terminal,
                m_star,
                10.0 * cfg.grad_tol,
                DEFAULT_HESS_TOL,
            )
        })
        .collect()
}

/// The reference matrix for convergence measurements and its rank-`r`
/// approximation gap.
#[derive(Debug, Clone)]
pub struct MwReference {
    pub m_w: SymMatrix,
    /// `‖M^w − P_r(M^w)‖_F`.
    pub d_r: f64,
    /// True when the operator determines the unconstrained minimizer
    /// uniquely (certified constructions measure with a positive-definite
    /// quadratic form). When false, the returned point is the terminal of
    /// a deep factored descent started at the ground truth, documented as
    /// one minimizer among many.
    pub unique: bool,
}

/// Computes the unconstrained minimizer of the sensing objective. For
/// certified operators this solves the normal equations exactly on the
/// symmetric subspace; otherwise it runs a long factored descent
/// (`η = 0.1/ρ`, gradient tolerance 1e-12) from the ground-truth factor
/// and flags the result as non-unique.
pub fn compute_mw(inst: &Instance) -> Result<MwReference> {
    let obj = inst.objective()?;
    let n = inst.n();
    let r = inst.r();
    if inst.delta_certified().is_some() {
        let op = inst.operator();
        // orthonormal symmetric basis: E_ii, then (E_ij + E_ji)/√2
        let ns = n * (n + 1) / 2;
        let basis_index: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .collect();
        let coords = |s: &SymMatrix| -> Vec<f64> {
            basis_index
                .iter()
                .map(|&(i, j)| {
                    if i == j {
                        s.get(i, i)
                    } else {
                        std::f64::consts::SQRT_2 * s.get(i, j)
                    }
                })
                .collect()
        };
        let mut gram = vec![0.0; ns * ns];
        for (a, &(i, j)) in basis_index.iter().enumerate() {
            let mut b = SymMatrix::zeros(n);
            if i == j {
                b.set_sym(i, i, 1.0);
            } else {
                b.set_sym(i, j, 1.0 / std::f64::consts::SQRT_2);
            }
            let gb = op.adjoint(&op.apply(&b)?)?;
            for (bcol, val) in coords(&gb).into_iter().enumerate() {
                gram[a * ns + bcol] = val;
            }
        }
        let gram = SymMatrix::new(ns, gram)?;
        let rhs = coords(&op.adjoint(inst.b_tilde())?);
        let spec = eigh(&gram)?;
        let sol = pinv_apply(&spec, &rhs, 1e-12);
        let mut m_w = SymMatrix::zeros(n);
        for (&(i, j), &c) in basis_index.iter().zip(&sol) {
            if i == j {
                m_w.set_sym(i, i, c);
            } else {
                m_w.set_sym(i, j, c / std::f64::consts::SQRT_2);
            }
        }
        let d_r = m_w
            .add_scaled(&project_psd_rank_r(&m_w, r)?, -1.0)?
            .frob();
        return Ok(MwReference {
            m_w,
            d_r,
            unique: true,
        });
    }
    let rho = obj.rho().unwrap_or(obj.zeta1() * obj.zeta1());
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Degenerate(format!(
            "cannot pick a descent step from curvature bound {rho}"
        )));
    }
    let x0 = top_factor(inst.m_star(), r)?;
    let cfg = GdConfig {
        eta: 0.1 / rho,
        max_iters: 60_000,
        grad_tol: 1e-12,
        record_every: 10_000,
    };
    let trace = gradient_descent(&obj, &x0, &cfg, inst.m_star())?;
    let m_w = trace.terminal.outer();
    let d_r = m_w
        .add_scaled(&project_psd_rank_r(&m_w, r)?, -1.0)?
        .frob();
    Ok(MwReference {
        m_w,
        d_r,
        unique: false,
    })
}
