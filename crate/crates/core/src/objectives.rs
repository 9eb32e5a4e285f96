//! Matrix-recovery objectives and their derivatives.
//!
//! An [`Objective`] is a smooth function `f(M, w)` of a symmetric matrix
//! argument, where the noise `w` was baked in at construction. Three kinds
//! are provided:
//!
//! - **sensing**: `f(M) = ½ ‖A(M) − b̃‖²` for a linear measurement operator
//!   `A` and observations `b̃`;
//! - **one-bit**: the negative log-likelihood of entrywise logistic
//!   observations, `−Σ((y + w)·M − log(1 + exp(M)))`;
//! - **asymmetric lift**: a square objective embedded in a doubled
//!   dimension with a balance regularizer, so rectangular problems reduce
//!   to the symmetric interface.
//!
//! Beyond values, gradients, and Hessian forms in matrix space, the module
//! supplies the factored derivatives used by solvers on `h(X) = f(XXᵀ)`:
//! gradient `2·∇f(XXᵀ)·X`, the Hessian quadratic form
//! `2⟨∇f, UUᵀ⟩ + [∇²f](XUᵀ+UXᵀ, XUᵀ+UXᵀ)`, its dense matrix over the `nr`
//! basis directions, and a matrix-free Hessian-vector product.

use crate::linalg::{lifted_apply, Factor, Mat, SymMatrix};
use crate::rng::Rng;
use crate::{Error, Result};

/// A stack of `m` symmetric sensing matrices defining the linear map
/// `M ↦ (⟨A_1, M⟩, …, ⟨A_m, M⟩)`, along with the spectrum constants of the
/// stacked coefficient matrix: `zeta1` is its spectral norm and `rho` the
/// largest eigenvalue of its Gram operator, so `zeta1² = rho` by
/// construction (a single power iteration estimates both).
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    n: usize,
    matrices: Vec<SymMatrix>,
    zeta1: f64,
    rho: f64,
}

/// Power-iteration estimate of the top eigenvalue of a symmetric positive
/// semidefinite operator given by `apply`, stopping after `max_iters`
/// rounds or when the Rayleigh quotient moves by less than `rel_tol`.
fn power_top_eigenvalue(
    dim: usize,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    max_iters: usize,
    rel_tol: f64,
    rng: &mut Rng,
) -> f64 {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    let mut lam = 0.0;
    for _ in 0..max_iters {
        let w = apply(&v);
        // Rayleigh quotient at the current unit vector.
        let new_lam: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wnorm <= f64::MIN_POSITIVE {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wnorm;
        }
        if (new_lam - lam).abs() <= rel_tol * new_lam.abs().max(f64::MIN_POSITIVE) {
            return new_lam;
        }
        lam = new_lam;
    }
    lam
}

impl MeasurementOperator {
    /// Wraps a stack of symmetric sensing matrices and computes its
    /// spectrum constants.
    pub fn new(n: usize, matrices: Vec<SymMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Invalid(
                "a measurement operator needs at least one sensing matrix".into(),
            ));
        }
        for (i, a) in matrices.iter().enumerate() {
            if a.n() != n {
                return Err(Error::Dimension(format!(
                    "sensing matrix {i} is {}x{0} but the operator dimension is {n}",
                    a.n()
                )));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let mut op = MeasurementOperator {
            n,
            matrices,
            zeta1: 0.0,
            rho: 0.0,
        };
        // Top eigenvalue of the Gram operator v ↦ Σᵢ ⟨Aᵢ, mat(v)⟩ vec(Aᵢ).
        // The start vector comes from a fixed internal stream so the
        // constants are a pure function of the operator.
        let mut rng = Rng::stream(0, "operator-spectrum-probe");
        let rho = power_top_eigenvalue(
            n * n,
            |v| op.gram_vec_apply(v),
            50,
            1e-10,
            &mut rng,
        );
        op.rho = rho.max(0.0);
        op.zeta1 = op.rho.sqrt();
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.matrices
    }

    /// Spectral norm of the stacked coefficient matrix.
    pub fn zeta1(&self) -> f64 {
        self.zeta1
    }

    /// Largest eigenvalue of the stacked Gram operator; the gradient of the
    /// induced sensing objective is `rho`-Lipschitz.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(⟨A_1, M⟩, …, ⟨A_m, M⟩)`.
    pub fn apply(&self, m: &SymMatrix) -> Result<Vec<f64>> {
        if m.n() != self.n {
            return Err(Error::Dimension(format!(
                "operator acts on {}x{0} matrices but got {}x{1}",
                self.n,
                m.n()
            )));
        }
        self.matrices.iter().map(|a| a.inner(m)).collect()
    }

    /// `Σᵢ yᵢ Aᵢ`, the adjoint of [`MeasurementOperator::apply`].
    pub fn adjoint(&self, y: &[f64]) -> Result<SymMatrix> {
        if y.len() != self.matrices.len() {
            return Err(Error::Dimension(format!(
                "adjoint expects {} coefficients but got {}",
                self.matrices.len(),
                y.len()
            )));
        }
        let mut out = SymMatrix::zeros(self.n);
        for (a, &c) in self.matrices.iter().zip(y) {
            if c != 0.0 {
                out = out.add_scaled(a, c)?;
            }
        }
        Ok(out)
    }

    /// Gram operator on raw length-n² buffers (row-major matrices).
    fn gram_vec_apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for a in &self.matrices {
            let mut coeff = 0.0;
            for (av, vv) in a.data().iter().zip(v) {
                coeff += av * vv;
            }
            if coeff == 0.0 {
                continue;
            }
            for (o, av) in out.iter_mut().zip(a.data()) {
                *o += coeff * av;
            }
        }
        out
    }
}

/// A noise realization with its cached Euclidean norm and the sub-Gaussian
/// scale it was drawn at.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    values: Vec<f64>,
    q: f64,
    sigma: f64,
}

impl NoiseVector {
    pub fn new(values: Vec<f64>, sigma: f64) -> Self {
        let q = values.iter().map(|x| x * x).sum::<f64>().sqrt();
        NoiseVector { values, q, sigma }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Euclidean norm ‖w‖₂.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone)]
enum Core {
    Sensing {
        op: MeasurementOperator,
        b_tilde: Vec<f64>,
    },
    OneBit {
        /// Observation grid, entries in [0, 1].
        y: Mat,
        /// Noise grid, the length-n² noise vector reshaped row-major.
        w: Mat,
    },
    Lift {
        inner: Box<Objective>,
        phi: f64,
    },
}

/// A smooth objective over symmetric matrices with noise baked in; see the
/// module docs for the three kinds.
#[derive(Debug, Clone)]
pub struct Objective {
    core: Core,
    zeta1: f64,
    zeta2: f64,
    rho: Option<f64>,
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn sigmoid_slope(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 - s)
}

/// `f(M) = ½ ‖A(M) − b̃‖²`. The gradient-noise influence is the operator's
/// spectral norm and the Hessian is noise-free.
pub fn sensing_objective(op: MeasurementOperator, b_tilde: Vec<f64>) -> Result<Objective> {
    if b_tilde.len() != op.m() {
        return Err(Error::Dimension(format!(
            "operator produces {} measurements but got {} observations",
            op.m(),
            b_tilde.len()
        )));
    }
    let zeta1 = op.zeta1();
    let rho = op.rho();
    Ok(Objective {
        core: Core::Sensing { op, b_tilde },
        zeta1,
        zeta2: 0.0,
        rho: Some(rho),
    })
}

/// `f(M) = −Σᵢⱼ ((yᵢⱼ + wᵢⱼ)·Mᵢⱼ − log(1 + exp(Mᵢⱼ)))`, the entrywise
/// logistic log-likelihood with observation grid `y` and noise grid `w`.
/// Unit gradient-noise influence, noise-free Hessian, gradient 1/4-Lipschitz.
pub fn one_bit_objective(y: Mat, w: Mat) -> Result<Objective> {
    if y.rows() != y.cols() {
        return Err(Error::Dimension(format!(
            "observation grid must be square; got {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    if w.rows() != y.rows() || w.cols() != y.cols() {
        return Err(Error::Dimension(format!(
            "noise grid is {}x{} but the observation grid is {}x{}",
            w.rows(),
            w.cols(),
            y.rows(),
            y.cols()
        )));
    }
    for (i, &v) in y.data().iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Invalid(format!(
                "observation grid entries must lie in [0, 1]; entry {i} is {v}"
            )));
        }
    }
    if !w.data().iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(Objective {
        core: Core::OneBit { y, w },
        zeta1: 1.0,
        zeta2: 0.0,
        // sigmoid slope is at most 1/4, entrywise separable
        rho: Some(0.25),
    })
}

/// Embeds a square objective into doubled dimension `2k`: on a symmetric
/// `P` with k×k blocks,
/// `f_a(P) = (f(P₁₁) + f(P₂₂))/2 + (φ/4)(‖P₁₁‖² + ‖P₂₂‖² − ‖P₁₂‖² − ‖P₂₁‖²)`.
/// The regularizer vanishes exactly on balanced factorizations, which is
/// how rectangular problems reduce to this symmetric interface.
pub fn asymmetric_lift(inner: Objective, phi: f64) -> Result<Objective> {
    if !(phi.is_finite() && phi > 0.0) {
        return Err(Error::Invalid(format!(
            "balance weight phi must be positive; got {phi}"
        )));
    }
    let zeta1 = inner.zeta1;
    let zeta2 = inner.zeta2;
    let rho = inner.rho.map(|r| r / 2.0 + phi / 2.0);
    Ok(Objective {
        core: Core::Lift {
            inner: Box::new(inner),
            phi,
        },
        zeta1,
        zeta2,
        rho,
    })
}

/// Copies the diagonal block starting at `(offset, offset)`.
fn sym_block(p: &SymMatrix, offset: usize, k: usize) -> SymMatrix {
    SymMatrix::from_fn(k, |i, j| p.get(offset + i, offset + j))
}

/// Copies the rectangular block with corner `(r0, c0)`.
fn rect_block(p: &SymMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |i, j| p.get(r0 + i, c0 + j))
}

impl Objective {
    /// Dimension of the symmetric matrix domain.
    pub fn n(&self) -> usize {
        match &self.core {
            Core::Sensing { op, .. } => op.n(),
            Core::OneBit { y, .. } => y.rows(),
            Core::Lift { inner, .. } => 2 * inner.n(),
        }
    }

    /// Gradient-noise influence constant.
    pub fn zeta1(&self) -> f64 {
        self.zeta1
    }

    /// Hessian-noise influence constant.
    pub fn zeta2(&self) -> f64 {
        self.zeta2
    }

    /// Gradient Lipschitz constant when one is known.
    pub fn rho(&self) -> Option<f64> {
        self.rho
    }

    /// Stable label for reports and files.
    pub fn kind_label(&self) -> &'static str {
        match &self.core {
            Core::Sensing { .. } => "sensing",
            Core::OneBit { .. } => "one-bit",
            Core::Lift { .. } => "asymmetric-lift",
        }
    }

    pub fn as_sensing(&self) -> Option<(&MeasurementOperator, &[f64])> {
        match &self.core {
            Core::Sensing { op, b_tilde } => Some((op, b_tilde)),
            _ => None,
        }
    }

    fn check_domain(&self, m: &SymMatrix) -> Result<()> {
        if m.n() != self.n() {
            return Err(Error::Dimension(format!(
                "objective domain is {}x{0} but got {}x{1}",
                self.n(),
                m.n()
            )));
        }
        Ok(())
    }

    /// `f(M)`.
    pub fn value(&self, m: &SymMatrix) -> Result<f64> {
        self.check_domain(m)?;
        match &self.core {
            Core::Sensing { op, b_tilde } => {
                let meas = op.apply(m)?;
                Ok(0.5
                    * meas
                        .iter()
                        .zip(b_tilde)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>())
            }
            Core::OneBit { y, w } => {
                let n = y.rows();
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let mij = m.get(i, j);
                        acc -= (y.get(i, j) + w.get(i, j)) * mij - softplus(mij);
                    }
                }
                Ok(acc)
            }
            Core::Lift { inner, phi } => {
                let k = inner.n();
                let p11 = sym_block(m, 0, k);
                let p22 = sym_block(m, k, k);
                let p12 = rect_block(m, 0, k, k, k);
                let p21 = rect_block(m, k, 0, k, k);
                let balance = p11.frob().powi(2) + p22.frob().powi(2)
                    - p12.frob().powi(2)
                    - p21.frob().powi(2);
                Ok(0.5 * (inner.value(&p11)? + inner.value(&p22)?) + phi / 4.0 * balance)
            }
        }
    }

    /// Symmetric gradient `∇f(M)`: the Euclidean gradient projected onto
    /// symmetric matrices, which is the correct derivative for the
    /// symmetric domain the objectives live on.
    pub fn grad(&self, m: &SymMatrix) -> Result<SymMatrix> {
        self.check_domain(m)?;
        match &self.core {
            Core::Sensing { op, b_tilde } => {
                let mut res = op.apply(m)?;
                for (r, b) in res.iter_mut().zip(b_tilde) {
                    *r -= b;
                }
                op.adjoint(&res)
            }
            Core::OneBit { y, w } => {
                let n = y.rows();
                SymMatrix::new(
                    n,
                    (0..n * n)
                        .map(|idx| {
                            let (i, j) = (idx / n, idx % n);
                            -(y.get(i, j) + w.get(i, j)) + sigmoid(m.get(i, j))
                        })
                        .collect(),
                )
            }
            Core::Lift { inner, phi } => {
                let k = inner.n();
                let p11 = sym_block(m, 0, k);
                let p22 = sym_block(m, k, k);
                let g11 = inner.grad(&p11)?.scale(0.5).add_scaled(&p11, phi / 2.0)?;
                let g22 = inner.grad(&p22)?.scale(0.5).add_scaled(&p22, phi / 2.0)?;
                let d = 2 * k;
                Ok(SymMatrix::from_fn(d, |i, j| {
                    match (i < k, j < k) {
                        (true, true) => g11.get(i, j),
                        (false, false) => g22.get(i - k, j - k),
                        // off-diagonal blocks carry only the balance term
                        (true, false) => -phi / 2.0 * m.get(i, j),
                        (false, true) => -phi / 2.0 * m.get(i, j),
                    }
                }))
            }
        }
    }

    /// Hessian of `f` at `M` applied to a symmetric direction `K`.
    pub fn hess_apply(&self, m: &SymMatrix, k: &SymMatrix) -> Result<SymMatrix> {
        self.check_domain(m)?;
        self.check_domain(k)?;
        match &self.core {
            Core::Sensing { op, .. } => {
                let meas = op.apply(k)?;
                op.adjoint(&meas)
            }
            Core::OneBit { y, .. } => {
                let n = y.rows();
                SymMatrix::new(
                    n,
                    (0..n * n)
                        .map(|idx| {
                            let (i, j) = (idx / n, idx % n);
                            sigmoid_slope(m.get(i, j)) * k.get(i, j)
                        })
                        .collect(),
                )
            }
            Core::Lift { inner, phi } => {
                let kk = inner.n();
                let m11 = sym_block(m, 0, kk);
                let m22 = sym_block(m, kk, kk);
                let k11 = sym_block(k, 0, kk);
                let k22 = sym_block(k, kk, kk);
                let h11 = inner
                    .hess_apply(&m11, &k11)?
                    .scale(0.5)
                    .add_scaled(&k11, phi / 2.0)?;
                let h22 = inner
                    .hess_apply(&m22, &k22)?
                    .scale(0.5)
                    .add_scaled(&k22, phi / 2.0)?;
                let d = 2 * kk;
                Ok(SymMatrix::from_fn(d, |i, j| match (i < kk, j < kk) {
                    (true, true) => h11.get(i, j),
                    (false, false) => h22.get(i - kk, j - kk),
                    _ => -phi / 2.0 * k.get(i, j),
                }))
            }
        }
    }

    /// Hessian bilinear form `[∇²f(M)](K, L)`.
    pub fn hess_form(&self, m: &SymMatrix, k: &SymMatrix, l: &SymMatrix) -> Result<f64> {
        self.hess_apply(m, k)?.inner(l)
    }

    /// `h(X) = f(XXᵀ)`.
    pub fn factored_value(&self, x: &Factor) -> Result<f64> {
        self.value(&x.outer())
    }

    /// `∇h(X) = 2·∇f(XXᵀ)·X`.
    pub fn factored_grad(&self, x: &Factor) -> Result<Factor> {
        let g = self.grad(&x.outer())?;
        let mut gx = g.apply_factor(x)?;
        for v in gx.data_mut() {
            *v *= 2.0;
        }
        Ok(gx)
    }

    /// Quadratic form of the factored Hessian at `X` in direction `U`:
    /// `2⟨∇f(XXᵀ), UUᵀ⟩ + [∇²f](XUᵀ+UXᵀ, XUᵀ+UXᵀ)`.
    pub fn factored_hess_form(&self, x: &Factor, u: &Factor) -> Result<f64> {
        let m = x.outer();
        let g = self.grad(&m)?;
        self.factored_hess_form_with(&m, &g, x, u)
    }

    /// Same as [`Objective::factored_hess_form`] with `XXᵀ` and the
    /// gradient precomputed, for callers evaluating many directions.
    pub fn factored_hess_form_with(
        &self,
        m: &SymMatrix,
        g: &SymMatrix,
        x: &Factor,
        u: &Factor,
    ) -> Result<f64> {
        let w = lifted_apply(x, u)?;
        Ok(2.0 * g.inner(&u.outer())? + self.hess_form(m, &w, &w)?)
    }

    /// Factored Hessian-vector product with `XXᵀ` and the gradient
    /// precomputed: `U ↦ 2(∇f·U + [∇²f](XUᵀ+UXᵀ)·X)`.
    pub fn factored_hess_vec_with(
        &self,
        m: &SymMatrix,
        g: &SymMatrix,
        x: &Factor,
        u: &Factor,
    ) -> Result<Factor> {
        let w = lifted_apply(x, u)?;
        let hw = self.hess_apply(m, &w)?;
        let mut out = g.apply_factor(u)?;
        let hwx = hw.apply_factor(x)?;
        let out_data = out.data_mut();
        for (o, b) in out_data.iter_mut().zip(hwx.data()) {
            *o = 2.0 * (*o + b);
        }
        Ok(out)
    }

    /// Dense matrix of the factored Hessian over the `nr` coordinate
    /// directions of the factor, symmetric by construction. Entry
    /// `(j, k)` is the bilinear form between basis directions `j` and `k`.
    pub fn factored_hess_matrix(&self, x: &Factor) -> Result<SymMatrix> {
        let n = x.n();
        let r = x.r();
        let dim = n * r;
        let m = x.outer();
        let g = self.grad(&m)?;
        // Curvature-of-the-map term: 2·δ_{qq'}·∇f[p, p'].
        let mut b = vec![0.0; dim * dim];
        for p in 0..n {
            for pp in 0..n {
                let gval = 2.0 * g.get(p, pp);
                if gval == 0.0 {
                    continue;
                }
                for q in 0..r {
                    b[(p * r + q) * dim + (pp * r + q)] += gval;
                }
            }
        }
        match &self.core {
            Core::Sensing { op, .. } => {
                // [∇²f](W_j, W_k) = ⟨A(W_j), A(W_k)⟩ with
                // A(W_{(p,q)})_i = 2(A_i x_q)_p: build the m x nr matrix of
                // measurements of the basis directions, then its Gram.
                let mm = op.m();
                let mut v = Mat::zeros(mm, dim);
                for (i, a) in op.matrices().iter().enumerate() {
                    let ax = a.apply_factor(x)?;
                    for p in 0..n {
                        for q in 0..r {
                            v.set(i, p * r + q, 2.0 * ax.get(p, q));
                        }
                    }
                }
                let gram = v.gram();
                for j in 0..dim {
                    for k in 0..dim {
                        b[j * dim + k] += gram.get(j, k);
                    }
                }
            }
            _ => {
                // Generic path: one Hessian application per basis direction,
                // then ⟨H(W_j), W_k⟩ = 2·(H(W_j)·X)[p', q'].
                for p in 0..n {
                    for q in 0..r {
                        let j = p * r + q;
                        let mut w = SymMatrix::zeros(n);
                        for a in 0..n {
                            let v = x.get(a, q);
                            let prev = w.get(a, p);
                            w.set_sym(a, p, prev + v);
                        }
                        // the diagonal entry (p, p) needs 2·x[p][q]; the
                        // loop above already wrote x[p][q] once via set_sym
                        let d = w.get(p, p) + x.get(p, q);
                        w.set_sym(p, p, d);
                        let hw = self.hess_apply(&m, &w)?;
                        let hwx = hw.apply_factor(x)?;
                        for pp in 0..n {
                            for qq in 0..r {
                                b[j * dim + pp * r + qq] += 2.0 * hwx.get(pp, qq);
                            }
                        }
                    }
                }
            }
        }
        SymMatrix::new(dim, b)
    }
}

/// `|⟨∇f(M, w) − ∇f(M, 0), K⟩|`: how much the noise realization moved the
/// gradient along `K`. Both objectives must share kind and dimension.
pub fn noise_gradient_deviation(
    noisy: &Objective,
    clean: &Objective,
    m: &SymMatrix,
    k: &SymMatrix,
) -> Result<f64> {
    if noisy.kind_label() != clean.kind_label() || noisy.n() != clean.n() {
        return Err(Error::Invalid(format!(
            "objectives disagree: {} over {} vs {} over {}",
            noisy.kind_label(),
            noisy.n(),
            clean.kind_label(),
            clean.n()
        )));
    }
    let gn = noisy.grad(m)?;
    let gc = clean.grad(m)?;
    Ok(gn.add_scaled(&gc, -1.0)?.inner(k)?.abs())
}
