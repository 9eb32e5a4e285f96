//! Dense symmetric linear algebra.
//!
//! Everything here is hand-rolled on plain `Vec<f64>` buffers so results are
//! bitwise deterministic for a given input on a given platform. The
//! eigendecomposition reduces to tridiagonal form with Householder
//! reflections and then runs the implicit-shift QL iteration, with a sweep
//! cap and a fixed eigenvector sign convention so repeated runs agree
//! exactly.

use crate::{Error, Result};

/// Relative eigenvalue cutoff used when deciding the rank of a reference
/// matrix in [`dist_factor`].
pub const RANK_CUTOFF_REL: f64 = 1e-10;

/// QL sweeps allowed per eigenvalue before giving up.
const QL_SWEEPS_PER_EIGENVALUE: usize = 30;

/// Dense rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix buffer holds {} entries but {rows}x{cols} needs {}",
                data.len(),
                rows * cols
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                context: "matrix product",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "matvec expects a vector of length {} but got {}",
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// selfᵀ · v.
    pub fn tr_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "transpose matvec expects a vector of length {} but got {}",
                self.rows,
                v.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += vi * a;
            }
        }
        Ok(out)
    }

    /// selfᵀ · self, a symmetric cols x cols Gram matrix.
    pub fn gram(&self) -> SymMatrix {
        let p = self.cols;
        let mut data = vec![0.0; p * p];
        for i in 0..self.rows {
            let row = &self.data[i * p..(i + 1) * p];
            for a in 0..p {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for b in a..p {
                    data[a * p + b] += ra * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                data[a * p + b] = data[b * p + a];
            }
        }
        SymMatrix { n: p, data }
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Dense symmetric matrix. Construction symmetrizes, so `get(i, j)` and
/// `get(j, i)` are always bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from a row-major buffer, averaging the two triangles.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!(
                "symmetric matrix buffer holds {} entries but needs {}",
                data.len(),
                n * n
            )));
        }
        let mut sym = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[i * n + j] + sym[j * n + i]);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        Ok(SymMatrix { n, data: sym })
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = SymMatrix::zeros(n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (f(i, j) + f(j, i));
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn to_mat(&self) -> Mat {
        Mat {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Frobenius inner product ⟨self, other⟩.
    pub fn inner(&self, other: &SymMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "inner product between {}x{0} and {}x{1} matrices",
                self.n, other.n
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// self + scale * other.
    pub fn add_scaled(&self, other: &SymMatrix, scale: f64) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "sum of {}x{0} and {}x{1} matrices",
                self.n, other.n
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.to_mat().matvec(v)
    }

    /// self · X for a conforming factor.
    pub fn apply_factor(&self, x: &Factor) -> Result<Factor> {
        if x.n != self.n {
            return Err(Error::ShapeMismatch {
                context: "symmetric matrix times factor",
                left_rows: self.n,
                left_cols: self.n,
                right_rows: x.n,
                right_cols: x.r,
            });
        }
        let mut data = vec![0.0; x.n * x.r];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            for k in 0..self.n {
                let a = row[k];
                if a == 0.0 {
                    continue;
                }
                let xrow = &x.data[k * x.r..(k + 1) * x.r];
                let orow = &mut data[i * x.r..(i + 1) * x.r];
                for (o, b) in orow.iter_mut().zip(xrow) {
                    *o += a * b;
                }
            }
        }
        Ok(Factor {
            n: x.n,
            r: x.r,
            data,
        })
    }
}

/// Tall factor X with `M = X Xᵀ`, row-major n x r.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    n: usize,
    r: usize,
    data: Vec<f64>,
}

impl Factor {
    pub fn new(n: usize, r: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * r {
            return Err(Error::Dimension(format!(
                "factor buffer holds {} entries but {n}x{r} needs {}",
                data.len(),
                n * r
            )));
        }
        Ok(Factor { n, r, data })
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        Factor {
            n,
            r,
            data: vec![0.0; n * r],
        }
    }

    pub fn from_fn(n: usize, r: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * r);
        for i in 0..n {
            for j in 0..r {
                data.push(f(i, j));
            }
        }
        Factor { n, r, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.r + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.r + j] = v;
    }

    pub fn col(&self, q: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, q)).collect()
    }

    pub fn to_mat(&self) -> Mat {
        Mat {
            rows: self.n,
            cols: self.r,
            data: self.data.clone(),
        }
    }

    /// X Xᵀ.
    pub fn outer(&self) -> SymMatrix {
        let n = self.n;
        let r = self.r;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let ri = &self.data[i * r..(i + 1) * r];
            for j in i..n {
                let rj = &self.data[j * r..(j + 1) * r];
                let mut acc = 0.0;
                for (a, b) in ri.iter().zip(rj) {
                    acc += a * b;
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc;
            }
        }
        SymMatrix { n, data }
    }

    /// Xᵀ X, the small r x r Gram matrix.
    pub fn gram(&self) -> SymMatrix {
        self.to_mat().gram()
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// self + scale * other.
    pub fn add_scaled(&self, other: &Factor, scale: f64) -> Result<Factor> {
        if self.n != other.n || self.r != other.r {
            return Err(Error::ShapeMismatch {
                context: "factor sum",
                left_rows: self.n,
                left_cols: self.r,
                right_rows: other.n,
                right_cols: other.r,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(Factor {
            n: self.n,
            r: self.r,
            data,
        })
    }

    /// Largest singular value of X.
    pub fn spectral_norm(&self) -> Result<f64> {
        let spec = eigh(&self.gram())?;
        Ok(spec.eigenvalues[0].max(0.0).sqrt())
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Descending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Column k is the eigenvector paired with `eigenvalues[k]`.
    pub eigenvectors: Mat,
}

impl Spectrum {
    /// Rebuilds Σ λᵢ uᵢuᵢᵀ, mainly for round-trip tests.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.eigenvalues.len();
        let mut data = vec![0.0; n * n];
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let ui = self.eigenvectors.get(i, k);
                if ui == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += lam * ui * self.eigenvectors.get(j, k);
                }
            }
        }
        SymMatrix::new(n, data).expect("square buffer")
    }
}

/// Householder reduction to tridiagonal form with accumulated transforms.
/// `z` enters as the symmetric matrix and leaves as the orthogonal basis.
fn tridiagonalize(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let mut scale = 0.0;
            for k in 0..=l {
                scale += z[i * n + k].abs();
            }
            if scale == 0.0 {
                e[i] = z[i * n + l];
            } else {
                for k in 0..=l {
                    z[i * n + k] /= scale;
                    h += z[i * n + k] * z[i * n + k];
                }
                let f = z[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z[j * n + i] = z[i * n + j] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += z[j * n + k] * z[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g_acc += z[k * n + j] * z[i * n + k];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z[i * n + j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[j * n + k] -= f * e[k] + g * z[i * n + k];
                    }
                }
            }
        } else {
            e[i] = z[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[i * n + k] * z[k * n + j];
                }
                for k in 0..i {
                    z[k * n + j] -= g * z[k * n + i];
                }
            }
        }
        d[i] = z[i * n + i];
        z[i * n + i] = 1.0;
        for j in 0..i {
            z[j * n + i] = 0.0;
            z[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of `z`.
fn ql_implicit(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut total_sweeps = 0usize;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total_sweeps += 1;
            if iter > QL_SWEEPS_PER_EIGENVALUE {
                return Err(total_sweeps);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let denom = g + if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / denom;
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut restarted = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    restarted = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if restarted {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Symmetric eigendecomposition.
///
/// Eigenvalues come back in descending order. Each eigenvector is normalized
/// so its entry of largest magnitude is nonnegative (ties broken by the
/// lowest index), which pins an otherwise arbitrary sign and keeps repeated
/// runs bitwise identical.
pub fn eigh(m: &SymMatrix) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.n;
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            eigenvectors: Mat::zeros(0, 0),
        });
    }
    let mut z = m.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 1 {
        d[0] = z[0];
        z[0] = 1.0;
    } else {
        tridiagonalize(&mut z, &mut d, &mut e, n);
        ql_implicit(&mut z, &mut d, &mut e, n).map_err(|_| Error::EighNoConvergence {
            max_sweeps: QL_SWEEPS_PER_EIGENVALUE * n,
            frobenius: m.frob(),
        })?;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).expect("finite eigenvalues"));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Mat::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        eigenvalues.push(d[src]);
        // Sign convention: largest-magnitude entry nonnegative.
        let mut best_idx = 0usize;
        let mut best_abs = -1.0;
        for i in 0..n {
            let a = z[i * n + src].abs();
            if a > best_abs {
                best_abs = a;
                best_idx = i;
            }
        }
        let flip = if z[best_idx * n + src] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors.set(i, k, flip * z[i * n + src]);
        }
    }

    Ok(Spectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Nearest positive semidefinite matrix of rank at most `r`:
/// keep the top `r` eigenpairs and clamp negative eigenvalues to zero.
pub fn project_psd_rank_r(m: &SymMatrix, r: usize) -> Result<SymMatrix> {
    if r == 0 || r > m.n {
        return Err(Error::Invalid(format!(
            "projection rank {r} outside 1..={}",
            m.n
        )));
    }
    let spec = eigh(m)?;
    let n = m.n;
    let mut data = vec![0.0; n * n];
    for k in 0..r {
        let lam = spec.eigenvalues[k].max(0.0);
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            let ui = spec.eigenvectors.get(i, k);
            for j in i..n {
                let v = lam * ui * spec.eigenvectors.get(j, k);
                data[i * n + j] += v;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    Ok(SymMatrix { n, data })
}

/// Best symmetric approximation of rank at most `k` in Frobenius norm:
/// keep the `k` eigenpairs of largest magnitude, signs included.
pub fn truncate_sym_rank(m: &SymMatrix, k: usize) -> Result<SymMatrix> {
    if k == 0 || k > m.n {
        return Err(Error::Invalid(format!(
            "truncation rank {k} outside 1..={}",
            m.n
        )));
    }
    let spec = eigh(m)?;
    let n = m.n;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        spec.eigenvalues[b]
            .abs()
            .partial_cmp(&spec.eigenvalues[a].abs())
            .expect("finite eigenvalues")
    });
    let mut data = vec![0.0; n * n];
    for &idx in order.iter().take(k) {
        let lam = spec.eigenvalues[idx];
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            let ui = spec.eigenvectors.get(i, idx);
            for j in i..n {
                data[i * n + j] += lam * ui * spec.eigenvectors.get(j, idx);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            data[i * n + j] = data[j * n + i];
        }
    }
    Ok(SymMatrix { n, data })
}

/// `sigma_r(M)`: the r-th largest singular value of a symmetric matrix,
/// i.e. the r-th largest eigenvalue magnitude.
pub fn sigma_r(m: &SymMatrix, r: usize) -> Result<f64> {
    if r == 0 || r > m.n {
        return Err(Error::Invalid(format!(
            "singular value index {r} outside 1..={}",
            m.n
        )));
    }
    let spec = eigh(m)?;
    let mut mags: Vec<f64> = spec.eigenvalues.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(mags[r - 1])
}

/// Extends a partial orthonormal column set to `count` columns using
/// standard basis candidates, deterministically.
fn complete_orthonormal(cols: &mut Vec<Vec<f64>>, dim: usize, count: usize) {
    let mut candidate = 0usize;
    while cols.len() < count && candidate < dim {
        let mut v = vec![0.0; dim];
        v[candidate] = 1.0;
        candidate += 1;
        for _pass in 0..2 {
            for c in cols.iter() {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            cols.push(v);
        }
    }
}

/// SVD of a square matrix via the eigendecomposition of BᵀB, with the left
/// basis completed deterministically where singular values vanish.
pub(crate) fn svd_square(b: &Mat) -> Result<(Mat, Vec<f64>, Mat)> {
    if b.rows != b.cols {
        return Err(Error::Dimension(format!(
            "square SVD called on a {}x{} matrix",
            b.rows, b.cols
        )));
    }
    let p = b.rows;
    let spec = eigh(&b.gram())?;
    let sigmas: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&lam| lam.max(0.0).sqrt())
        .collect();
    let smax = sigmas.first().copied().unwrap_or(0.0);
    let cutoff = smax * 1e-12;
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    for k in 0..p {
        if sigmas[k] > cutoff && sigmas[k] > 0.0 {
            let vk = spec.eigenvectors.col(k);
            let bu = b.matvec(&vk)?;
            u_cols.push(bu.iter().map(|x| x / sigmas[k]).collect());
        } else {
            break;
        }
    }
    complete_orthonormal(&mut u_cols, p, p);
    let mut u = Mat::zeros(p, p);
    for (k, c) in u_cols.iter().enumerate() {
        for i in 0..p {
            u.set(i, k, c[i]);
        }
    }
    Ok((u, sigmas, spec.eigenvectors))
}

/// Distance from a factor to the set of factorizations of `m`:
/// `min ‖X - Z₀R‖_F` over orthogonal `R`, where `Z₀Z₀ᵀ = m`.
///
/// `m` must be positive semidefinite with rank exactly `X.r()`, decided at
/// the relative eigenvalue cutoff [`RANK_CUTOFF_REL`]. The minimizing
/// rotation comes from the orthogonal Procrustes problem on `Z₀ᵀX`.
pub fn dist_factor(x: &Factor, m: &SymMatrix) -> Result<f64> {
    if x.n != m.n {
        return Err(Error::ShapeMismatch {
            context: "factor distance",
            left_rows: x.n,
            left_cols: x.r,
            right_rows: m.n,
            right_cols: m.n,
        });
    }
    let spec = eigh(m)?;
    let lead = spec.eigenvalues[0].max(0.0);
    let cutoff = RANK_CUTOFF_REL * lead;
    let min_eig = *spec
        .eigenvalues
        .last()
        .expect("nonempty spectrum");
    if min_eig < -cutoff.max(1e-300) {
        return Err(Error::NotPsd {
            lambda_min: min_eig,
        });
    }
    let rank = spec.eigenvalues.iter().filter(|&&lam| lam > cutoff).count();
    if rank != x.r {
        return Err(Error::RankDefect {
            expected: x.r,
            found: rank,
            cutoff,
        });
    }
    let r = x.r;
    let z0 = Factor::from_fn(m.n, r, |i, k| {
        spec.eigenvectors.get(i, k) * spec.eigenvalues[k].max(0.0).sqrt()
    });
    // B = Z₀ᵀ X, r x r.
    let b = Mat::from_fn(r, r, |a, c| {
        let mut acc = 0.0;
        for i in 0..m.n {
            acc += z0.get(i, a) * x.get(i, c);
        }
        acc
    });
    let (u, _sig, v) = svd_square(&b)?;
    let rot = u.matmul(&v.transpose())?;
    // dist = ‖X - Z₀ rot‖_F
    let mut acc = 0.0;
    for i in 0..m.n {
        for c in 0..r {
            let mut zr = 0.0;
            for a in 0..r {
                zr += z0.get(i, a) * rot.get(a, c);
            }
            let diff = x.get(i, c) - zr;
            acc += diff * diff;
        }
    }
    Ok(acc.sqrt())
}

/// Symmetrized outer product `X Uᵀ + U Xᵀ`.
pub fn lifted_apply(x: &Factor, u: &Factor) -> Result<SymMatrix> {
    if x.n != u.n || x.r != u.r {
        return Err(Error::ShapeMismatch {
            context: "lifted apply",
            left_rows: x.n,
            left_cols: x.r,
            right_rows: u.n,
            right_cols: u.r,
        });
    }
    let n = x.n;
    let r = x.r;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let xi = &x.data[i * r..(i + 1) * r];
        let ui = &u.data[i * r..(i + 1) * r];
        for j in i..n {
            let xj = &x.data[j * r..(j + 1) * r];
            let uj = &u.data[j * r..(j + 1) * r];
            let mut acc = 0.0;
            for k in 0..r {
                acc += xi[k] * uj[k] + ui[k] * xj[k];
            }
            data[i * n + j] = acc;
            data[j * n + i] = acc;
        }
    }
    Ok(SymMatrix { n, data })
}

/// Row-major vectorization of a symmetric matrix.
pub fn vec_sym(m: &SymMatrix) -> Vec<f64> {
    m.data.clone()
}

/// Row-major vectorization of a factor.
pub fn vec_factor(x: &Factor) -> Vec<f64> {
    x.data.clone()
}

/// The n² x nr matrix of the linear map `U ↦ X Uᵀ + U Xᵀ` in row-major
/// vector coordinates: column (p·r + q) is the vectorization of the map
/// applied to the basis factor with a one at (p, q).
pub fn lifted_matrix(x: &Factor) -> Mat {
    let n = x.n;
    let r = x.r;
    let mut out = Mat::zeros(n * n, n * r);
    for p in 0..n {
        for q in 0..r {
            let j = p * r + q;
            for a in 0..n {
                let v = x.get(a, q);
                if v == 0.0 {
                    continue;
                }
                // contribution to entry (a, p) and (p, a)
                let i1 = a * n + p;
                let i2 = p * n + a;
                out.data[i1 * out.cols + j] += v;
                out.data[i2 * out.cols + j] += v;
            }
        }
    }
    out
}

/// Least-squares solve through a PSD spectrum: pseudo-inverse with a
/// relative eigenvalue cutoff.
pub(crate) fn pinv_apply(spec: &Spectrum, rhs: &[f64], rel_cutoff: f64) -> Vec<f64> {
    let n = spec.eigenvalues.len();
    let lead = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = lead * rel_cutoff;
    let mut out = vec![0.0; n];
    for k in 0..n {
        let lam = spec.eigenvalues[k];
        if lam <= cutoff || lam <= 0.0 {
            continue;
        }
        let mut coeff = 0.0;
        for i in 0..n {
            coeff += spec.eigenvectors.get(i, k) * rhs[i];
        }
        coeff /= lam;
        for i in 0..n {
            out[i] += coeff * spec.eigenvectors.get(i, k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random_sym(n: usize, rng: &mut Rng) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.normal())
    }

    #[test]
    fn eigh_identity_is_exact() {
        let spec = eigh(&SymMatrix::identity(3)).unwrap();
        assert_eq!(spec.eigenvalues, vec![1.0, 1.0, 1.0]);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(spec.eigenvectors.get(i, j), expect);
            }
        }
    }

    #[test]
    fn eigh_sorts_descending_with_basis_vectors() {
        let spec = eigh(&SymMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(spec.eigenvalues, vec![3.0, 2.0, 1.0]);
        // eigenvector of 3 is e0, of 2 is e2, of 1 is e1
        assert_eq!(spec.eigenvectors.get(0, 0), 1.0);
        assert_eq!(spec.eigenvectors.get(2, 1), 1.0);
        assert_eq!(spec.eigenvectors.get(1, 2), 1.0);
    }

    #[test]
    fn eigh_reconstructs_random_matrices() {
        let mut rng = Rng::stream(42, "eigh-reconstruct");
        for n in [1usize, 2, 3, 5, 8, 13] {
            let m = random_sym(n, &mut rng);
            let spec = eigh(&m).unwrap();
            let back = spec.reconstruct();
            let err = m.add_scaled(&back, -1.0).unwrap().frob();
            assert!(
                err <= 1e-8 * m.frob().max(1.0),
                "reconstruction error {err} at n={n}"
            );
            // orthonormality of eigenvectors
            let q = spec.eigenvectors.gram();
            let dev = q.add_scaled(&SymMatrix::identity(n), -1.0).unwrap().frob();
            assert!(dev < 1e-10, "eigenvector basis deviates {dev} at n={n}");
        }
    }

    #[test]
    fn eigh_sign_convention_is_stable() {
        let mut rng = Rng::stream(9, "eigh-sign");
        let m = random_sym(6, &mut rng);
        let a = eigh(&m).unwrap();
        let b = eigh(&m).unwrap();
        assert_eq!(a.eigenvectors.data(), b.eigenvectors.data());
        for k in 0..6 {
            let col = a.eigenvectors.col(k);
            let mut best = 0usize;
            let mut best_abs = -1.0;
            for (i, &v) in col.iter().enumerate() {
                if v.abs() > best_abs {
                    best_abs = v.abs();
                    best = i;
                }
            }
            assert!(col[best] >= 0.0, "column {k} breaks the sign convention");
        }
    }

    #[test]
    fn eigh_rejects_non_finite() {
        let mut m = SymMatrix::zeros(2);
        m.set_sym(0, 1, f64::NAN);
        assert!(matches!(eigh(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn project_keeps_top_pairs_and_clamps() {
        let p = project_psd_rank_r(&SymMatrix::from_diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        let expect = SymMatrix::from_diag(&[3.0, 2.0, 0.0]);
        assert!(p.add_scaled(&expect, -1.0).unwrap().frob() < 1e-14);

        let q = project_psd_rank_r(&SymMatrix::from_diag(&[1.0, -1.0]), 1).unwrap();
        let expect = SymMatrix::from_diag(&[1.0, 0.0]);
        assert!(q.add_scaled(&expect, -1.0).unwrap().frob() < 1e-14);
    }

    #[test]
    fn project_rejects_bad_rank() {
        let m = SymMatrix::identity(3);
        assert!(project_psd_rank_r(&m, 0).is_err());
        assert!(project_psd_rank_r(&m, 4).is_err());
    }

    #[test]
    fn truncate_keeps_largest_magnitudes() {
        let t = truncate_sym_rank(&SymMatrix::from_diag(&[1.0, -3.0, 2.0]), 2).unwrap();
        let expect = SymMatrix::from_diag(&[0.0, -3.0, 2.0]);
        assert!(t.add_scaled(&expect, -1.0).unwrap().frob() < 1e-14);
    }

    #[test]
    fn dist_factor_zero_at_own_factor_and_rotations() {
        let mut rng = Rng::stream(7, "dist-zero");
        let x = Factor::from_fn(5, 2, |_, _| rng.normal());
        let m = x.outer();
        let d = dist_factor(&x, &m).unwrap();
        assert!(d <= 1e-10, "distance {d} at the factor itself");

        // rotate by an angle
        let (c, s) = (0.6f64, 0.8f64);
        let xr = Factor::from_fn(5, 2, |i, j| {
            if j == 0 {
                c * x.get(i, 0) + s * x.get(i, 1)
            } else {
                -s * x.get(i, 0) + c * x.get(i, 1)
            }
        });
        let d = dist_factor(&xr, &m).unwrap();
        assert!(d <= 1e-10, "distance {d} after rotation");

        // reflection too
        let xf = Factor::from_fn(5, 2, |i, j| if j == 0 { x.get(i, 1) } else { x.get(i, 0) });
        let d = dist_factor(&xf, &m).unwrap();
        assert!(d <= 1e-10, "distance {d} after reflection");
    }

    #[test]
    fn dist_factor_matches_sampled_rotations() {
        let mut rng = Rng::stream(21, "dist-oracle");
        let z = Factor::from_fn(4, 2, |_, _| rng.normal());
        let m = z.outer();
        let x = Factor::from_fn(4, 2, |_, _| rng.normal());
        let ours = dist_factor(&x, &m).unwrap();

        // sample the full orthogonal group in 2d: rotations and reflections
        let mut best = f64::INFINITY;
        for _ in 0..100_000 {
            let theta = rng.uniform(0.0, 2.0 * std::f64::consts::PI);
            let (c, s) = (theta.cos(), theta.sin());
            let reflect = rng.sign();
            // R = rotation * diag(1, reflect)
            let mut acc = 0.0;
            for i in 0..4 {
                let z0 = z.get(i, 0);
                let z1 = z.get(i, 1);
                let c0 = z0 * c + z1 * s;
                let c1 = (-z0 * s + z1 * c) * reflect;
                let d0 = x.get(i, 0) - c0;
                let d1 = x.get(i, 1) - c1;
                acc += d0 * d0 + d1 * d1;
            }
            let dist = acc.sqrt();
            assert!(
                ours <= dist + 1e-9,
                "closed form {ours} beaten by sampled rotation {dist}"
            );
            best = best.min(dist);
        }
        assert!(
            ours >= best - 1e-3,
            "closed form {ours} too far below sampled minimum {best}"
        );
        assert!((ours - best).abs() <= 1e-3, "gap to sampled minimum too large");
    }

    #[test]
    fn dist_factor_reports_rank_defect() {
        let x = Factor::zeros(3, 2);
        let rank1 = SymMatrix::from_diag(&[2.0, 0.0, 0.0]);
        match dist_factor(&x, &rank1) {
            Err(Error::RankDefect { expected, found, .. }) => {
                assert_eq!(expected, 2);
                assert_eq!(found, 1);
            }
            other => panic!("expected a rank defect, got {other:?}"),
        }
    }

    #[test]
    fn dist_factor_rejects_indefinite_reference() {
        let x = Factor::zeros(2, 1);
        let m = SymMatrix::from_diag(&[1.0, -1.0]);
        assert!(matches!(dist_factor(&x, &m), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn lifted_apply_scalar_case() {
        let x = Factor::new(1, 1, vec![2.0]).unwrap();
        let u = Factor::new(1, 1, vec![3.0]).unwrap();
        let w = lifted_apply(&x, &u).unwrap();
        assert_eq!(w.get(0, 0), 12.0);
    }

    #[test]
    fn lifted_apply_zero_direction() {
        let x = Factor::from_fn(4, 2, |i, j| (i + j) as f64);
        let w = lifted_apply(&x, &Factor::zeros(4, 2)).unwrap();
        assert_eq!(w.frob(), 0.0);
    }

    #[test]
    fn lifted_apply_rejects_shape_mismatch() {
        let x = Factor::zeros(4, 2);
        let u = Factor::zeros(4, 3);
        assert!(matches!(
            lifted_apply(&x, &u),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn lifted_matrix_agrees_with_apply() {
        let mut rng = Rng::stream(3, "lifted-consistency");
        for _ in 0..20 {
            let x = Factor::from_fn(4, 2, |_, _| rng.normal());
            let u = Factor::from_fn(4, 2, |_, _| rng.normal());
            let big = lifted_matrix(&x);
            let lhs = big.matvec(&vec_factor(&u)).unwrap();
            let rhs = vec_sym(&lifted_apply(&x, &u).unwrap());
            let err: f64 = lhs
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-12, "matrix form deviates {err}");
        }
    }

    #[test]
    fn lifted_matrix_of_zero_factor_is_zero() {
        let big = lifted_matrix(&Factor::zeros(3, 2));
        assert_eq!(big.frob(), 0.0);
        assert_eq!(big.rows(), 9);
        assert_eq!(big.cols(), 6);
    }

    #[test]
    fn lifted_matrix_rank_at_unit_factor() {
        // X = e1 in R^3 with r = 1: the image {X uᵀ + u Xᵀ} has dimension 3.
        let x = Factor::new(3, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let big = lifted_matrix(&x);
        let spec = eigh(&big.gram()).unwrap();
        let rank = spec
            .eigenvalues
            .iter()
            .filter(|&&lam| lam > 1e-10 * spec.eigenvalues[0].max(1.0))
            .count();
        assert_eq!(rank, 3);
    }

    #[test]
    fn sigma_r_uses_magnitudes() {
        let m = SymMatrix::from_diag(&[1.0, -3.0, 2.0]);
        assert_eq!(sigma_r(&m, 1).unwrap(), 3.0);
        assert_eq!(sigma_r(&m, 2).unwrap(), 2.0);
        assert_eq!(sigma_r(&m, 3).unwrap(), 1.0);
    }

    #[test]
    fn svd_square_factors_random_matrices() {
        let mut rng = Rng::stream(17, "svd");
        for _ in 0..20 {
            let b = Mat::from_fn(3, 3, |_, _| rng.normal());
            let (u, s, v) = svd_square(&b).unwrap();
            // rebuild U diag(s) Vᵀ
            let mut rebuilt = Mat::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += u.get(i, k) * s[k] * v.get(j, k);
                    }
                    rebuilt.set(i, j, acc);
                }
            }
            let mut err = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    err += (rebuilt.get(i, j) - b.get(i, j)).powi(2);
                }
            }
            assert!(err.sqrt() < 1e-10, "svd rebuild error {}", err.sqrt());
            // u orthonormal
            let dev = u
                .gram()
                .add_scaled(&SymMatrix::identity(3), -1.0)
                .unwrap()
                .frob();
            assert!(dev < 1e-10);
        }
    }

    #[test]
    fn pinv_apply_solves_psd_systems() {
        let mut rng = Rng::stream(31, "pinv");
        let x = Factor::from_fn(4, 4, |_, _| rng.normal());
        let g = x.outer(); // full-rank PSD almost surely
        let spec = eigh(&g).unwrap();
        let rhs: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
        let sol = pinv_apply(&spec, &rhs, 1e-12);
        let back = g.apply(&sol).unwrap();
        let err: f64 = back
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-8, "normal equation residual {err}");
    }
}
