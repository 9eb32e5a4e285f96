//! Seeded problem generation, isometry instrumentation, and serialization.
//!
//! An [`Instance`] packages everything one sensing experiment needs: a
//! ground-truth matrix with a prescribed spectrum, a stack of symmetric
//! sensing matrices, a noise realization, and the noisy observations. Two
//! operator constructions are available:
//!
//! - [`gen_gaussian_operator`]: symmetrized Gaussian ensembles, isometric
//!   in expectation, with [`center_operator`] to recenter their restricted
//!   Rayleigh quotients around 1;
//! - [`gen_certified_operator`]: an operator whose quadratic form is
//!   `I + delta·S` with `‖S‖₂ = 1`, so the isometry defect is bounded by
//!   `delta` over the whole space by construction, not sampling.
//!
//! [`estimate_rip`] reports a sampled lower bound on the true restricted
//! isometry defect via rank-truncated projected power iteration, and
//! [`noise_tail_epsilon`] converts a probability level into the noise-norm
//! cap the sub-Gaussian tail bound certifies at that level.
//!
//! All randomness flows through seeded, labeled streams, and instances
//! round-trip through JSON bit for bit.

use crate::linalg::{eigh, truncate_sym_rank, Factor, Mat, SymMatrix};
use crate::objectives::{sensing_objective, MeasurementOperator, NoiseVector, Objective};
use crate::rng::Rng;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Default probe count for [`estimate_rip`] and [`center_operator`].
pub const DEFAULT_RIP_SAMPLES: usize = 32;
/// Default projected-power refinement steps per probe.
pub const DEFAULT_RIP_REFINE: usize = 12;

/// Distribution of the noise vector's coordinates; every family is
/// `sigma/sqrt(m)`-sub-Gaussian per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Gaussian,
    Uniform,
    Rademacher,
}

impl NoiseFamily {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Uniform => "uniform",
            NoiseFamily::Rademacher => "rademacher",
        }
    }
}

impl std::str::FromStr for NoiseFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "uniform" => Ok(NoiseFamily::Uniform),
            "rademacher" => Ok(NoiseFamily::Rademacher),
            other => Err(Error::Invalid(format!(
                "unknown noise family {other:?}; expected gaussian, uniform, or rademacher"
            ))),
        }
    }
}

/// Ground truth `Q diag(lambda) Qᵀ` with eigenvalues linearly spaced from
/// `lambda1` down to `lambda_r` over `r` slots and `Q` the orthonormalized
/// columns of a seeded Gaussian matrix.
pub fn gen_ground_truth(
    n: usize,
    r: usize,
    lambda1: f64,
    lambda_r: f64,
    seed: u64,
) -> Result<SymMatrix> {
    if r == 0 || r > n {
        return Err(Error::Invalid(format!(
            "rank {r} outside 1..={n}"
        )));
    }
    if !(lambda_r > 0.0 && lambda1 >= lambda_r && lambda1.is_finite()) {
        return Err(Error::Invalid(format!(
            "spectrum endpoints must satisfy lambda1 >= lambda_r > 0; got {lambda1}, {lambda_r}"
        )));
    }
    if r == 1 && lambda1 != lambda_r {
        return Err(Error::Invalid(
            "a rank-1 spectrum has a single slot; lambda1 must equal lambda_r".into(),
        ));
    }
    let mut rng = Rng::stream(seed, "ground-truth-basis");
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut attempts = 0;
    while cols.len() < r {
        attempts += 1;
        if attempts > 100 * r {
            return Err(Error::Degenerate(
                "could not draw linearly independent basis columns".into(),
            ));
        }
        let mut v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        // modified Gram-Schmidt with a second pass for stability
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            cols.push(v);
        }
    }
    let mut lambdas = Vec::with_capacity(r);
    for k in 0..r {
        if k + 1 == r {
            lambdas.push(lambda_r);
        } else {
            lambdas.push(lambda1 - k as f64 * (lambda1 - lambda_r) / (r as f64 - 1.0));
        }
    }
    let mut data = vec![0.0; n * n];
    for (lam, q) in lambdas.iter().zip(&cols) {
        for i in 0..n {
            let qi = lam * q[i];
            for j in i..n {
                data[i * n + j] += qi * q[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    SymMatrix::new(n, data)
}

/// Stack of `m` matrices `A_i = (G_i + G_iᵀ)/2` with `G_i` entries
/// independent Gaussian of variance `1/m`, so the induced quadratic form is
/// isometric in expectation on symmetric matrices.
pub fn gen_gaussian_operator(n: usize, m: usize, seed: u64) -> Result<MeasurementOperator> {
    if m == 0 {
        return Err(Error::Invalid("measurement count must be positive".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mats: Vec<SymMatrix> = (0..m)
        .map(|i| {
            let mut rng = Rng::substream(seed, "gaussian-operator", i as u64);
            let g = Mat::from_fn(n, n, |_, _| scale * rng.normal());
            SymMatrix::from_fn(n, |a, b| 0.5 * (g.get(a, b) + g.get(b, a)))
        })
        .collect();
    MeasurementOperator::new(n, mats)
}

/// Operator with a certified isometry defect: its quadratic form on
/// (vectorized) matrices is `H = I + delta·S` for a seeded random symmetric
/// `S` with unit spectral norm, so
/// `(1 − delta)‖N‖² ≤ ‖A(N)‖² ≤ (1 + delta)‖N‖²` holds for every `N` — in
/// particular every low-rank one — making `delta` a true upper bound on
/// the restricted defect at every rank. The `m = n²` sensing matrices are
/// the symmetrized column reshapes of the principal square root of `H`;
/// symmetrization leaves the action on symmetric matrices untouched.
pub fn gen_certified_operator(n: usize, delta: f64, seed: u64) -> Result<MeasurementOperator> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Invalid(format!(
            "certified defect must lie in [0, 1); got {delta}"
        )));
    }
    let dim = n * n;
    let mut rng = Rng::stream(seed, "certified-operator");
    let raw = Mat::from_fn(dim, dim, |_, _| rng.normal());
    let s = SymMatrix::from_fn(dim, |i, j| 0.5 * (raw.get(i, j) + raw.get(j, i)));
    let spec = eigh(&s)?;
    let top = spec
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &lam| acc.max(lam.abs()));
    if top <= 0.0 {
        return Err(Error::Degenerate("random symmetric matrix was zero".into()));
    }
    // H^{1/2} = V diag(sqrt(1 + delta·lambda/top)) Vᵀ
    let sqrt_eigs: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&lam| (1.0 + delta * lam / top).sqrt())
        .collect();
    let mut half = vec![0.0; dim * dim];
    for k in 0..dim {
        let se = sqrt_eigs[k];
        for i in 0..dim {
            let vi = se * spec.eigenvectors.get(i, k);
            if vi == 0.0 {
                continue;
            }
            for j in i..dim {
                half[i * dim + j] += vi * spec.eigenvectors.get(j, k);
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            half[i * dim + j] = half[j * dim + i];
        }
    }
    // column i, reshaped row-major to n x n and symmetrized
    let mats: Vec<SymMatrix> = (0..dim)
        .map(|col| {
            SymMatrix::from_fn(n, |a, b| {
                let fwd = half[(a * n + b) * dim + col];
                let bwd = half[(b * n + a) * dim + col];
                0.5 * (fwd + bwd)
            })
        })
        .collect();
    MeasurementOperator::new(n, mats)
}

/// Unit-Frobenius random probe of rank at most `cap`.
fn random_probe(n: usize, cap: usize, rng: &mut Rng) -> Result<SymMatrix> {
    for _ in 0..100 {
        let g = SymMatrix::from_fn(n, |_, _| rng.normal());
        let t = truncate_sym_rank(&g, cap)?;
        let norm = t.frob();
        if norm > 1e-12 {
            return Ok(t.scale(1.0 / norm));
        }
    }
    Err(Error::Degenerate("probe sampling kept collapsing".into()))
}

/// `‖A(N)‖²` for unit-Frobenius `N`.
fn quotient(op: &MeasurementOperator, probe: &SymMatrix) -> Result<f64> {
    let meas = op.apply(probe)?;
    Ok(meas.iter().map(|x| x * x).sum())
}

/// Extreme restricted Rayleigh quotients of the operator's quadratic form
/// over rank-`cap` probes, sharpened by projected power iteration in both
/// directions (toward the largest quotient, and toward the smallest via the
/// shifted complement).
fn restricted_extremes(
    op: &MeasurementOperator,
    cap: usize,
    samples: usize,
    refine_iters: usize,
    seed: u64,
    stream: &str,
) -> Result<(f64, f64)> {
    if cap == 0 || cap > op.n() {
        return Err(Error::Invalid(format!(
            "probe rank {cap} outside 1..={}",
            op.n()
        )));
    }
    if samples == 0 {
        return Err(Error::Invalid("need at least one probe".into()));
    }
    // Shift comfortably above the top eigenvalue of the Gram operator so
    // the complement stays positive semidefinite.
    let shift = 1.5 * op.rho() + 1.0;
    let mut qmin = f64::INFINITY;
    let mut qmax = f64::NEG_INFINITY;
    let mut record = |q: f64| {
        qmin = qmin.min(q);
        qmax = qmax.max(q);
    };
    for s in 0..samples {
        let mut rng = Rng::substream(seed, stream, s as u64);
        let base = random_probe(op.n(), cap, &mut rng)?;
        record(quotient(op, &base)?);
        for upward in [true, false] {
            let mut v = base.clone();
            for _ in 0..refine_iters {
                let gram = op.adjoint(&op.apply(&v)?)?;
                let stepped = if upward {
                    gram
                } else {
                    v.scale(shift).add_scaled(&gram, -1.0)?
                };
                let t = truncate_sym_rank(&stepped, cap)?;
                let norm = t.frob();
                if norm <= 1e-14 {
                    break;
                }
                v = t.scale(1.0 / norm);
            }
            record(quotient(op, &v)?);
        }
    }
    Ok((qmin, qmax))
}

/// Sampled lower bound on the restricted isometry defect at probe rank
/// `rank_cap`: the largest observed `|‖A(N)‖² − 1|` over unit-Frobenius
/// probes of that rank, each sharpened by `refine_iters` projected power
/// steps. Deterministic in `seed`.
pub fn estimate_rip(
    op: &MeasurementOperator,
    rank_cap: usize,
    samples: usize,
    refine_iters: usize,
    seed: u64,
) -> Result<f64> {
    let (lo, hi) = restricted_extremes(op, rank_cap, samples, refine_iters, seed, "rip-probes")?;
    Ok((lo - 1.0).abs().max((hi - 1.0).abs()))
}

/// Rescales the operator so its sampled restricted Rayleigh quotients are
/// centered at 1: divides every sensing matrix by the square root of the
/// midpoint of the sampled extreme quotients. Returns the new operator.
pub fn center_operator(
    op: &MeasurementOperator,
    rank_cap: usize,
    samples: usize,
    refine_iters: usize,
    seed: u64,
) -> Result<MeasurementOperator> {
    let (lo, hi) = restricted_extremes(op, rank_cap, samples, refine_iters, seed, "center-probes")?;
    let mid = 0.5 * (lo + hi);
    if !(mid.is_finite() && mid > 0.0) {
        return Err(Error::Degenerate(format!(
            "cannot center an operator with quotient midpoint {mid}"
        )));
    }
    let scale = 1.0 / mid.sqrt();
    let mats: Vec<SymMatrix> = op.matrices().iter().map(|a| a.scale(scale)).collect();
    MeasurementOperator::new(op.n(), mats)
}

/// Draws a length-`m` noise vector. Each coordinate is
/// `sigma/sqrt(m)`-sub-Gaussian: Gaussian of that standard deviation,
/// uniform on the matching-variance interval, or a scaled coin flip.
pub fn sample_noise(m: usize, sigma: f64, family: NoiseFamily, seed: u64) -> Result<NoiseVector> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Invalid(format!(
            "noise scale must be nonnegative; got {sigma}"
        )));
    }
    if m == 0 {
        return Err(Error::Invalid("noise length must be positive".into()));
    }
    if sigma == 0.0 {
        return Ok(NoiseVector::new(vec![0.0; m], 0.0));
    }
    let mut rng = Rng::stream(seed, "noise");
    let root_m = (m as f64).sqrt();
    let values: Vec<f64> = match family {
        NoiseFamily::Gaussian => (0..m).map(|_| sigma / root_m * rng.normal()).collect(),
        NoiseFamily::Uniform => {
            let half = sigma * (3.0f64).sqrt() / root_m;
            (0..m).map(|_| rng.uniform(-half, half)).collect()
        }
        NoiseFamily::Rademacher => (0..m).map(|_| sigma / root_m * rng.sign()).collect(),
    };
    Ok(NoiseVector::new(values, sigma))
}

/// Noise-norm cap certified at probability `p` by the sub-Gaussian tail
/// bound: `epsilon = 4·sigma·sqrt(m·ln(2/(1 − p)))`. Plugging the result
/// back into `1 − 2·exp(−epsilon²/(16·m·sigma²))` recovers `p`.
pub fn noise_tail_epsilon(p: f64, m: usize, sigma: f64) -> Result<f64> {
    if !(p.is_finite() && (0.0..1.0).contains(&p)) {
        return Err(Error::Invalid(format!(
            "the tail bound certifies probabilities in [0, 1); got p = {p}"
        )));
    }
    if m == 0 {
        return Err(Error::Invalid("measurement count must be positive".into()));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Invalid(format!(
            "noise scale must be nonnegative; got {sigma}"
        )));
    }
    Ok(4.0 * sigma * (m as f64 * (2.0 / (1.0 - p)).ln()).sqrt())
}

/// How the sensing stack of an instance is constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    /// Symmetrized Gaussian ensemble, recentered so sampled restricted
    /// quotients straddle 1.
    Gaussian,
    /// The recentered Gaussian ensemble with every sensing matrix then
    /// multiplied by `scale`. The recorded defect estimate is taken before
    /// scaling, because the defect measures the shape of the restricted
    /// quotients around their center and is the quantity the distance
    /// bounds consume; the smoothness and noise-sensitivity constants of
    /// the objective pick up the scale. Useful for step-size experiments
    /// that assume an unnormalized ensemble, where the smoothness constant
    /// grows with the measurement magnitude and stable step sizes shrink
    /// accordingly.
    ScaledGaussian { scale: f64 },
    /// Certified construction with this exact defect bound; forces `m = n²`.
    Certified { delta: f64 },
}

/// Everything [`Instance::generate`] needs.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub seed: u64,
    pub sigma: f64,
    pub family: NoiseFamily,
    pub lambda1: f64,
    pub lambda_r: f64,
    pub operator: OperatorKind,
}

/// A fully materialized sensing problem: ground truth, operator, noise,
/// observations, and the isometry instrumentation measured at generation.
#[derive(Debug, Clone)]
pub struct Instance {
    n: usize,
    r: usize,
    m: usize,
    seed: u64,
    sigma: f64,
    family: NoiseFamily,
    lambda1: f64,
    lambda_r: f64,
    m_star: SymMatrix,
    operator: MeasurementOperator,
    noise: NoiseVector,
    b_tilde: Vec<f64>,
    delta_hat: f64,
    delta_certified: Option<f64>,
}

/// Serialized mirror of [`Instance`]; the on-disk JSON schema.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    n: usize,
    r: usize,
    m: usize,
    seed: u64,
    sigma: f64,
    family: NoiseFamily,
    lambda1: f64,
    lambda_r: f64,
    m_star: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    w: Vec<f64>,
    b_tilde: Vec<f64>,
    delta_hat: f64,
    delta_certified: Option<f64>,
}

impl Instance {
    /// Generates a complete instance: ground truth, operator (centered for
    /// Gaussian ensembles), noise, observations `A(M*) + w`, and the
    /// sampled defect estimate at probe rank `min(2r, n)`.
    pub fn generate(params: &GenParams) -> Result<Instance> {
        let GenParams {
            n,
            r,
            m,
            seed,
            sigma,
            family,
            lambda1,
            lambda_r,
            operator,
        } = *params;
        let m_star = gen_ground_truth(n, r, lambda1, lambda_r, seed)?;
        let cap = (2 * r).min(n);
        let (op, delta_certified, delta_hat, m) = match operator {
            OperatorKind::Gaussian => {
                let raw = gen_gaussian_operator(n, m, seed)?;
                let centered =
                    center_operator(&raw, cap, DEFAULT_RIP_SAMPLES, DEFAULT_RIP_REFINE, seed)?;
                let delta_hat =
                    estimate_rip(&centered, cap, DEFAULT_RIP_SAMPLES, DEFAULT_RIP_REFINE, seed)?;
                (centered, None, delta_hat, m)
            }
            OperatorKind::ScaledGaussian { scale } => {
                if !scale.is_finite() || scale <= 0.0 {
                    return Err(Error::Invalid(format!(
                        "operator scale must be positive and finite; got {scale}"
                    )));
                }
                let raw = gen_gaussian_operator(n, m, seed)?;
                let centered =
                    center_operator(&raw, cap, DEFAULT_RIP_SAMPLES, DEFAULT_RIP_REFINE, seed)?;
                // Estimate the defect before scaling: the restricted
                // quotients of the scaled operator sit near scale², so
                // measuring their deviation from 1 would conflate shape
                // with magnitude.
                let delta_hat =
                    estimate_rip(&centered, cap, DEFAULT_RIP_SAMPLES, DEFAULT_RIP_REFINE, seed)?;
                let mats: Vec<SymMatrix> =
                    centered.matrices().iter().map(|a| a.scale(scale)).collect();
                (MeasurementOperator::new(n, mats)?, None, delta_hat, m)
            }
            OperatorKind::Certified { delta } => {
                if m != n * n {
                    return Err(Error::Invalid(format!(
                        "the certified construction measures with m = n² = {}; got m = {m}",
                        n * n
                    )));
                }
                let op = gen_certified_operator(n, delta, seed)?;
                let delta_hat =
                    estimate_rip(&op, cap, DEFAULT_RIP_SAMPLES, DEFAULT_RIP_REFINE, seed)?;
                (op, Some(delta), delta_hat, m)
            }
        };
        let noise = sample_noise(m, sigma, family, seed)?;
        let clean = op.apply(&m_star)?;
        let b_tilde: Vec<f64> = clean.iter().zip(noise.values()).map(|(a, w)| a + w).collect();
        let inst = Instance {
            n,
            r,
            m,
            seed,
            sigma,
            family,
            lambda1,
            lambda_r,
            m_star,
            operator: op,
            noise,
            b_tilde,
            delta_hat,
            delta_certified,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks the structural invariants; called after generation and after
    /// every load.
    pub fn validate(&self) -> Result<()> {
        if self.operator.n() != self.n || self.m_star.n() != self.n {
            return Err(Error::Invalid("instance dimensions disagree".into()));
        }
        if self.operator.m() != self.m
            || self.noise.len() != self.m
            || self.b_tilde.len() != self.m
        {
            return Err(Error::Invalid(
                "measurement count disagrees across operator, noise, and observations".into(),
            ));
        }
        let spec = eigh(&self.m_star)?;
        let lead = spec.eigenvalues[0];
        let tol = 1e-10 * lead.abs().max(1.0);
        if (lead - self.lambda1).abs() > tol {
            return Err(Error::Invalid(format!(
                "leading eigenvalue {lead} disagrees with recorded lambda1 {}",
                self.lambda1
            )));
        }
        if (spec.eigenvalues[self.r - 1] - self.lambda_r).abs() > tol {
            return Err(Error::Invalid(format!(
                "eigenvalue {} at rank position disagrees with recorded lambda_r {}",
                spec.eigenvalues[self.r - 1],
                self.lambda_r
            )));
        }
        let tail = spec.eigenvalues[self.r..]
            .iter()
            .fold(0.0f64, |acc, &lam| acc.max(lam.abs()));
        if tail > tol {
            return Err(Error::Invalid(format!(
                "ground truth has rank above {}: residual eigenvalue {tail}",
                self.r
            )));
        }
        let clean = self.operator.apply(&self.m_star)?;
        let mut dev: f64 = 0.0;
        for ((c, w), b) in clean.iter().zip(self.noise.values()).zip(&self.b_tilde) {
            dev = dev.max((c + w - b).abs());
        }
        let scale = self.b_tilde.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        if dev > 1e-12 * scale {
            return Err(Error::Invalid(format!(
                "observations deviate from measurements plus noise by {dev}"
            )));
        }
        if let Some(cert) = self.delta_certified {
            if self.delta_hat > cert + 1e-12 {
                return Err(Error::Invalid(format!(
                    "sampled defect {} exceeds the certified bound {cert}",
                    self.delta_hat
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda_r(&self) -> f64 {
        self.lambda_r
    }

    pub fn m_star(&self) -> &SymMatrix {
        &self.m_star
    }

    pub fn operator(&self) -> &MeasurementOperator {
        &self.operator
    }

    pub fn noise(&self) -> &NoiseVector {
        &self.noise
    }

    pub fn b_tilde(&self) -> &[f64] {
        &self.b_tilde
    }

    pub fn delta_hat(&self) -> f64 {
        self.delta_hat
    }

    pub fn delta_certified(&self) -> Option<f64> {
        self.delta_certified
    }

    /// The sensing objective `½‖A(M) − b̃‖²` this instance defines.
    pub fn objective(&self) -> Result<Objective> {
        sensing_objective(self.operator.clone(), self.b_tilde.clone())
    }

    /// The noiseless counterpart, observing `A(M*)` exactly.
    pub fn clean_objective(&self) -> Result<Objective> {
        let clean = self.operator.apply(&self.m_star)?;
        sensing_objective(self.operator.clone(), clean)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = InstanceFile {
            version: 1,
            n: self.n,
            r: self.r,
            m: self.m,
            seed: self.seed,
            sigma: self.sigma,
            family: self.family,
            lambda1: self.lambda1,
            lambda_r: self.lambda_r,
            m_star: self.m_star.data().to_vec(),
            a: self
                .operator
                .matrices()
                .iter()
                .map(|a| a.data().to_vec())
                .collect(),
            w: self.noise.values().to_vec(),
            b_tilde: self.b_tilde.clone(),
            delta_hat: self.delta_hat,
            delta_certified: self.delta_certified,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != 1 {
            return Err(Error::Invalid(format!(
                "unsupported instance file version {}",
                file.version
            )));
        }
        let n = file.n;
        let m_star = SymMatrix::new(n, file.m_star)?;
        let mats: Result<Vec<SymMatrix>> = file
            .a
            .into_iter()
            .map(|buf| SymMatrix::new(n, buf))
            .collect();
        let operator = MeasurementOperator::new(n, mats?)?;
        let noise = NoiseVector::new(file.w, file.sigma);
        let inst = Instance {
            n,
            r: file.r,
            m: file.m,
            seed: file.seed,
            sigma: file.sigma,
            family: file.family,
            lambda1: file.lambda1,
            lambda_r: file.lambda_r,
            m_star,
            operator,
            noise,
            b_tilde: file.b_tilde,
            delta_hat: file.delta_hat,
            delta_certified: file.delta_certified,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Instance> {
        Instance::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the serialized form, hex-encoded; stable across runs and
    /// platforms because serialization is deterministic.
    pub fn fingerprint(&self) -> Result<String> {
        let json = self.to_json()?;
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Best rank-`r` factor of a symmetric matrix: top eigenpairs with
/// negative eigenvalues clamped, columns scaled by the root eigenvalues.
/// The standard spectral initializer and reference factor.
pub fn top_factor(m: &SymMatrix, r: usize) -> Result<Factor> {
    if r == 0 || r > m.n() {
        return Err(Error::Invalid(format!(
            "factor rank {r} outside 1..={}",
            m.n()
        )));
    }
    let spec = eigh(m)?;
    Ok(Factor::from_fn(m.n(), r, |i, k| {
        spec.eigenvectors.get(i, k) * spec.eigenvalues[k].max(0.0).sqrt()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_has_prescribed_spectrum() {
        let m = gen_ground_truth(40, 5, 1.5, 1.0, 7).unwrap();
        let spec = eigh(&m).unwrap();
        let expect = [1.5, 1.375, 1.25, 1.125, 1.0];
        for (k, &e) in expect.iter().enumerate() {
            assert!(
                (spec.eigenvalues[k] - e).abs() < 1e-10,
                "slot {k}: {} vs {e}",
                spec.eigenvalues[k]
            );
        }
        for k in 5..40 {
            assert!(spec.eigenvalues[k].abs() < 1e-10);
        }
    }

    #[test]
    fn ground_truth_rank_one_unit() {
        let m = gen_ground_truth(4, 1, 1.0, 1.0, 3).unwrap();
        let spec = eigh(&m).unwrap();
        assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(spec.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn ground_truth_is_deterministic() {
        let a = gen_ground_truth(10, 3, 2.0, 1.0, 99).unwrap();
        let b = gen_ground_truth(10, 3, 2.0, 1.0, 99).unwrap();
        assert_eq!(a.data(), b.data());
        let c = gen_ground_truth(10, 3, 2.0, 1.0, 100).unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn ground_truth_rejects_bad_spectra() {
        assert!(gen_ground_truth(4, 2, 1.0, 2.0, 0).is_err());
        assert!(gen_ground_truth(4, 2, 1.0, 0.0, 0).is_err());
        assert!(gen_ground_truth(4, 1, 2.0, 1.0, 0).is_err());
        assert!(gen_ground_truth(4, 5, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn gaussian_operator_rows_match_inner_products() {
        let op = gen_gaussian_operator(4, 6, 11).unwrap();
        let mut rng = Rng::stream(2, "check");
        let m = SymMatrix::from_fn(4, |_, _| rng.normal());
        let out = op.apply(&m).unwrap();
        for (i, a) in op.matrices().iter().enumerate() {
            assert!((out[i] - a.inner(&m).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_defect_shrinks_with_more_measurements() {
        // average sampled defect over seeds, three measurement budgets
        let n = 6;
        let cap = 2;
        let mut prev = f64::INFINITY;
        for m in [18, 72, 288] {
            let mut acc = 0.0;
            for seed in 0..3u64 {
                let op = gen_gaussian_operator(n, m, 1000 + seed).unwrap();
                acc += estimate_rip(&op, cap, 16, 8, seed).unwrap();
            }
            let avg = acc / 3.0;
            assert!(
                avg < prev,
                "average defect {avg} did not shrink at m = {m} (previous {prev})"
            );
            prev = avg;
        }
    }

    #[test]
    fn certified_operator_at_zero_defect_is_an_isometry() {
        let op = gen_certified_operator(3, 0.0, 5).unwrap();
        assert_eq!(op.m(), 9);
        let mut rng = Rng::stream(6, "iso");
        for _ in 0..10 {
            let m = SymMatrix::from_fn(3, |_, _| rng.normal());
            let meas = op.apply(&m).unwrap();
            let norm2: f64 = meas.iter().map(|x| x * x).sum();
            assert!(
                (norm2 - m.frob().powi(2)).abs() <= 1e-10 * m.frob().powi(2),
                "quadratic form {norm2} vs {}",
                m.frob().powi(2)
            );
        }
    }

    #[test]
    fn certified_operator_sandwiches_every_probe() {
        let delta = 0.42;
        let op = gen_certified_operator(3, delta, 9).unwrap();
        let mut rng = Rng::stream(7, "sandwich");
        for _ in 0..200 {
            let m = SymMatrix::from_fn(3, |_, _| rng.normal());
            let norm2 = m.frob().powi(2);
            let meas: f64 = op.apply(&m).unwrap().iter().map(|x| x * x).sum();
            let q = meas / norm2;
            assert!(
                (1.0 - delta - 1e-10..=1.0 + delta + 1e-10).contains(&q),
                "quotient {q} escapes the certified band"
            );
        }
    }

    #[test]
    fn estimate_rip_stays_below_certification() {
        let delta = 0.3;
        let op = gen_certified_operator(3, delta, 13).unwrap();
        let est = estimate_rip(&op, 2, 16, 10, 21).unwrap();
        assert!(est <= delta + 1e-8, "estimate {est} beats the certificate");
        assert!(est > 0.0);
    }

    #[test]
    fn estimate_rip_scalar_operator_is_exact() {
        // A(M) = c·vec(M): sensing matrices are symmetrized basis reshapes
        let n = 3;
        let c = 1.3;
        let mats: Vec<SymMatrix> = (0..n * n)
            .map(|idx| {
                let (a, b) = (idx / n, idx % n);
                SymMatrix::from_fn(n, |i, j| {
                    let fwd = if i == a && j == b { c } else { 0.0 };
                    let bwd = if j == a && i == b { c } else { 0.0 };
                    0.5 * (fwd + bwd)
                })
            })
            .collect();
        let op = MeasurementOperator::new(n, mats).unwrap();
        let est = estimate_rip(&op, 2, 4, 3, 17).unwrap();
        assert!(
            (est - (c * c - 1.0).abs()).abs() < 1e-12,
            "estimate {est} vs exact {}",
            (c * c - 1.0) as f64
        );
    }

    #[test]
    fn estimate_rip_is_deterministic() {
        let op = gen_gaussian_operator(5, 20, 3).unwrap();
        let a = estimate_rip(&op, 2, 8, 6, 77).unwrap();
        let b = estimate_rip(&op, 2, 8, 6, 77).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn center_operator_recenters_quotients() {
        let op = gen_gaussian_operator(6, 30, 41).unwrap();
        let centered = center_operator(&op, 2, 16, 8, 41).unwrap();
        // the scaling is exactly the midpoint of the sampled extremes
        let (lo, hi) = restricted_extremes(&op, 2, 16, 8, 41, "center-probes").unwrap();
        let s = 1.0 / (0.5 * (lo + hi)).sqrt();
        for (a, b) in op.matrices().iter().zip(centered.matrices()) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert_eq!((x * s).to_bits(), y.to_bits());
            }
        }
        // and the recentered quotients straddle 1 near-symmetrically
        let (lo2, hi2) = restricted_extremes(&centered, 2, 16, 8, 41, "center-probes").unwrap();
        assert!(lo2 < 1.0 && 1.0 < hi2, "extremes [{lo2}, {hi2}] miss 1");
        let mid = 0.5 * (lo2 + hi2);
        assert!(
            (mid - 1.0).abs() < 0.01,
            "recentered midpoint {mid} drifted from 1"
        );
    }

    #[test]
    fn noise_zero_scale_is_zero_vector() {
        let w = sample_noise(10, 0.0, NoiseFamily::Gaussian, 5).unwrap();
        assert!(w.values().iter().all(|&x| x == 0.0));
        assert_eq!(w.q(), 0.0);
    }

    #[test]
    fn noise_norm_moment_matches_scale() {
        // E ‖w‖² = sigma² for every family
        for family in [
            NoiseFamily::Gaussian,
            NoiseFamily::Uniform,
            NoiseFamily::Rademacher,
        ] {
            let mut acc = 0.0;
            let draws = 100;
            for seed in 0..draws {
                let w = sample_noise(10_000, 0.05, family, seed).unwrap();
                acc += w.q() * w.q();
            }
            let mean = acc / draws as f64;
            assert!(
                (mean - 0.0025).abs() < 0.00025,
                "{}: mean squared norm {mean}",
                family.label()
            );
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed_and_family() {
        let a = sample_noise(50, 0.1, NoiseFamily::Uniform, 9).unwrap();
        let b = sample_noise(50, 0.1, NoiseFamily::Uniform, 9).unwrap();
        assert_eq!(a.values(), b.values());
        let c = sample_noise(50, 0.1, NoiseFamily::Rademacher, 9).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn tail_epsilon_round_trips() {
        let eps = noise_tail_epsilon(0.9, 1600, 0.05).unwrap();
        let p_back = 1.0 - 2.0 * (-eps * eps / (16.0 * 1600.0 * 0.05 * 0.05)).exp();
        assert!((p_back - 0.9).abs() < 1e-12, "recovered {p_back}");
        // p → 0 limit
        let eps0 = noise_tail_epsilon(0.0, 100, 0.05).unwrap();
        let direct = 4.0 * 0.05 * (100.0 * (2.0f64).ln()).sqrt();
        assert_eq!(eps0, direct);
        // sigma = 0
        assert_eq!(noise_tail_epsilon(0.5, 100, 0.0).unwrap(), 0.0);
        // cannot certify probability 1
        assert!(noise_tail_epsilon(1.0, 100, 0.05).is_err());
    }

    #[test]
    fn tail_bound_coverage_is_conservative() {
        let m = 100;
        let sigma = 0.05;
        for p in [0.5, 0.9] {
            let eps = noise_tail_epsilon(p, m, sigma).unwrap();
            let draws = 500;
            let mut hits = 0;
            for seed in 0..draws {
                let w = sample_noise(m, sigma, NoiseFamily::Gaussian, 30_000 + seed).unwrap();
                if w.q() <= eps {
                    hits += 1;
                }
            }
            let freq = hits as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!(
                freq >= p - 3.0 * se,
                "coverage {freq} fell below {p} - 3se at p = {p}"
            );
        }
    }

    #[test]
    fn instance_round_trips_bitwise() {
        let params = GenParams {
            n: 6,
            r: 2,
            m: 24,
            seed: 12,
            sigma: 0.05,
            family: NoiseFamily::Gaussian,
            lambda1: 1.5,
            lambda_r: 1.0,
            operator: OperatorKind::Gaussian,
        };
        let inst = Instance::generate(&params).unwrap();
        let json = inst.to_json().unwrap();
        let back = Instance::from_json(&json).unwrap();
        assert_eq!(inst.m_star().data(), back.m_star().data());
        assert_eq!(inst.b_tilde(), back.b_tilde());
        assert_eq!(inst.noise().values(), back.noise().values());
        assert_eq!(inst.delta_hat().to_bits(), back.delta_hat().to_bits());
        for (a, b) in inst
            .operator()
            .matrices()
            .iter()
            .zip(back.operator().matrices())
        {
            assert_eq!(a.data(), b.data());
        }
        // and the fingerprint is stable
        assert_eq!(inst.fingerprint().unwrap(), back.fingerprint().unwrap());
        let json2 = back.to_json().unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn scaled_ensemble_scales_constants_but_not_the_defect() {
        let base = GenParams {
            n: 8,
            r: 2,
            m: 30,
            seed: 9,
            sigma: 0.05,
            family: NoiseFamily::Gaussian,
            lambda1: 1.5,
            lambda_r: 1.0,
            operator: OperatorKind::Gaussian,
        };
        let unit = Instance::generate(&base).unwrap();
        let c = 3.0;
        let scaled = Instance::generate(&GenParams {
            operator: OperatorKind::ScaledGaussian { scale: c },
            ..base.clone()
        })
        .unwrap();
        // Same ground truth and noise draw, measurement matrices multiplied
        // by c, defect estimate identical (it describes the unit shape).
        assert_eq!(unit.m_star().data(), scaled.m_star().data());
        assert_eq!(unit.noise().values(), scaled.noise().values());
        assert_eq!(unit.delta_hat().to_bits(), scaled.delta_hat().to_bits());
        for (a, b) in unit
            .operator()
            .matrices()
            .iter()
            .zip(scaled.operator().matrices())
        {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((y - c * x).abs() <= 1e-15 * x.abs().max(1.0));
            }
        }
        // Spectral constants follow the scale: zeta1 by c, rho by c².
        let zu = unit.operator().zeta1();
        let zs = scaled.operator().zeta1();
        assert!((zs / zu - c).abs() < 1e-6, "zeta1 ratio {}", zs / zu);
        let ru = unit.operator().rho();
        let rs = scaled.operator().rho();
        assert!((rs / ru - c * c).abs() < 1e-5, "rho ratio {}", rs / ru);
        // Round-trips like any other instance.
        let back = Instance::from_json(&scaled.to_json().unwrap()).unwrap();
        assert_eq!(back.fingerprint().unwrap(), scaled.fingerprint().unwrap());
        // Degenerate scales are rejected.
        for bad in [0.0, -1.0, f64::NAN] {
            let p = GenParams {
                operator: OperatorKind::ScaledGaussian { scale: bad },
                ..base.clone()
            };
            assert!(Instance::generate(&p).is_err(), "scale {bad} accepted");
        }
    }

    #[test]
    fn certified_instance_records_both_defects() {
        let params = GenParams {
            n: 4,
            r: 1,
            m: 16,
            seed: 5,
            sigma: 0.01,
            family: NoiseFamily::Gaussian,
            lambda1: 1.0,
            lambda_r: 1.0,
            operator: OperatorKind::Certified { delta: 0.25 },
        };
        let inst = Instance::generate(&params).unwrap();
        assert_eq!(inst.delta_certified(), Some(0.25));
        assert!(inst.delta_hat() <= 0.25 + 1e-12);
        // wrong m is rejected up front
        let bad = GenParams {
            m: 10,
            ..params.clone()
        };
        assert!(Instance::generate(&bad).is_err());
    }

    #[test]
    fn top_factor_reconstructs_the_truth() {
        let m = gen_ground_truth(8, 3, 2.0, 1.0, 17).unwrap();
        let z = top_factor(&m, 3).unwrap();
        let err = z.outer().add_scaled(&m, -1.0).unwrap().frob();
        assert!(err < 1e-10, "reconstruction error {err}");
    }
}
