//! Property-based checks of the algebraic identities the library leans
//! on: spectral reconstruction, projection idempotence, operator/adjoint
//! duality, agreement between the ambient and factored surfaces,
//! rotation invariance of the factor distance, serialization stability,
//! and monotonicity of the closed-form caps.

use proptest::prelude::*;

use lrno_core::bounds::global_bound;
use lrno_core::instances::{
    gen_gaussian_operator, noise_tail_epsilon, GenParams, Instance,
};
use lrno_core::linalg::{dist_factor, eigh, project_psd_rank_r};
use lrno_core::objectives::sensing_objective;
use lrno_core::{Factor, NoiseFamily, OperatorKind, SymMatrix};

/// Builds a symmetric matrix from a packed upper triangle.
fn sym_from_packed(n: usize, vals: &[f64]) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m.set_sym(i, j, vals[k]);
            k += 1;
        }
    }
    m
}

fn packed_sym(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-5.0..5.0f64, n * (n + 1) / 2)
        .prop_map(move |v| sym_from_packed(n, &v))
}

fn sym_any() -> impl Strategy<Value = SymMatrix> {
    (2usize..=8).prop_flat_map(packed_sym)
}

fn factor(n: usize, r: usize) -> impl Strategy<Value = Factor> {
    prop::collection::vec(-3.0..3.0f64, n * r)
        .prop_map(move |v| Factor::from_fn(n, r, |i, j| v[i * r + j]))
}

proptest! {
    /// The eigendecomposition reconstructs its input, orders the
    /// eigenvalues descending, and returns orthonormal eigenvectors.
    #[test]
    fn eigh_reconstructs_and_orders(m in sym_any()) {
        let n = m.n();
        let spec = eigh(&m).unwrap();
        for w in spec.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        let v = &spec.eigenvectors;
        let scale = 1.0 + m.frob();
        for i in 0..n {
            for j in 0..n {
                let recon: f64 = (0..n)
                    .map(|k| v.get(i, k) * spec.eigenvalues[k] * v.get(j, k))
                    .sum();
                prop_assert!((recon - m.get(i, j)).abs() <= 1e-8 * scale);
                let gram: f64 = (0..n).map(|k| v.get(k, i) * v.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram - expect).abs() <= 1e-9);
            }
        }
    }

    /// Truncating to rank r is idempotent and lands on a PSD matrix of
    /// rank at most r.
    #[test]
    fn rank_projection_is_idempotent_and_psd(m in sym_any(), r in 1usize..=3) {
        let r = r.min(m.n());
        let p = project_psd_rank_r(&m, r).unwrap();
        let spec = eigh(&p).unwrap();
        let scale = 1.0 + m.frob();
        prop_assert!(*spec.eigenvalues.last().unwrap() >= -1e-9 * scale);
        for &lam in spec.eigenvalues.iter().skip(r) {
            prop_assert!(lam.abs() <= 1e-9 * scale);
        }
        let again = project_psd_rank_r(&p, r).unwrap();
        prop_assert!(again.add_scaled(&p, -1.0).unwrap().frob() <= 1e-9 * scale);
    }

    /// `⟨A(M), v⟩ = ⟨M, A*(v)⟩`: the adjoint really is the adjoint.
    #[test]
    fn operator_apply_adjoint_duality(
        n in 3usize..=6,
        seed in any::<u64>(),
        mvals in prop::collection::vec(-4.0..4.0f64, 36),
        v in prop::collection::vec(-4.0..4.0f64, 10),
    ) {
        let op = gen_gaussian_operator(n, v.len(), seed).unwrap();
        let m = sym_from_packed(n, &mvals[..n * (n + 1) / 2]);
        let am = op.apply(&m).unwrap();
        let lhs: f64 = am.iter().zip(&v).map(|(a, b)| a * b).sum();
        let rhs = m.inner(&op.adjoint(&v).unwrap()).unwrap();
        let scale = 1.0 + lhs.abs().max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
    }

    /// The factored surface is the ambient surface composed with
    /// `X ↦ XXᵀ`: values agree and the factored gradient is `2 ∇f(XXᵀ) X`.
    #[test]
    fn factored_surface_matches_ambient(
        n in 3usize..=6,
        seed in any::<u64>(),
        b in prop::collection::vec(-2.0..2.0f64, 12),
        xvals in prop::collection::vec(-2.0..2.0f64, 12),
    ) {
        let op = gen_gaussian_operator(n, b.len(), seed).unwrap();
        let obj = sensing_objective(op, b).unwrap();
        let x = Factor::from_fn(n, 2, |i, j| xvals[i * 2 + j]);
        let m = x.outer();

        let fv = obj.factored_value(&x).unwrap();
        let av = obj.value(&m).unwrap();
        prop_assert!((fv - av).abs() <= 1e-10 * (1.0 + av.abs()));

        let fg = obj.factored_grad(&x).unwrap();
        let mut manual = obj.grad(&m).unwrap().apply_factor(&x).unwrap();
        for val in manual.data_mut() {
            *val *= 2.0;
        }
        let diff = fg.add_scaled(&manual, -1.0).unwrap().frob();
        prop_assert!(diff <= 1e-10 * (1.0 + manual.frob()));
    }

    /// Rotating a factor does not move it away from the factorizations
    /// of its own Gram matrix.
    #[test]
    fn factor_distance_vanishes_on_rotations(
        x in factor(6, 2),
        theta in 0.0..std::f64::consts::TAU,
    ) {
        // Keep the factor safely full-rank so the distance is defined.
        let gram = SymMatrix::from_fn(2, |i, j| {
            (0..6).map(|k| x.get(k, i) * x.get(k, j)).sum()
        });
        let sigma_min = *eigh(&gram).unwrap().eigenvalues.last().unwrap();
        prop_assume!(sigma_min >= 0.05);

        let (c, s) = (theta.cos(), theta.sin());
        let rotated = Factor::from_fn(6, 2, |i, j| {
            if j == 0 {
                c * x.get(i, 0) + s * x.get(i, 1)
            } else {
                -s * x.get(i, 0) + c * x.get(i, 1)
            }
        });
        let d = dist_factor(&rotated, &x.outer()).unwrap();
        prop_assert!(d <= 1e-6 * (1.0 + x.frob()));
    }

    /// Serializing an instance and reading it back preserves both the
    /// content hash and the exact JSON byte stream.
    #[test]
    fn instance_roundtrip_is_bitwise_stable(
        seed in any::<u64>(),
        sigma in prop::sample::select(vec![0.0, 0.05]),
    ) {
        let params = GenParams {
            n: 5,
            r: 2,
            m: 12,
            seed,
            sigma,
            family: NoiseFamily::Gaussian,
            lambda1: 1.5,
            lambda_r: 1.0,
            operator: OperatorKind::Gaussian,
        };
        let inst = Instance::generate(&params).unwrap();
        let text = inst.to_json().unwrap();
        let back = Instance::from_json(&text).unwrap();
        prop_assert_eq!(inst.fingerprint().unwrap(), back.fingerprint().unwrap());
        prop_assert_eq!(text, back.to_json().unwrap());
    }

    /// The noise-norm cap grows with the probability level and with the
    /// noise scale; the recovery cap grows with the isometry defect and
    /// with the noise cap.
    #[test]
    fn closed_form_caps_are_monotone(
        p1 in 0.05..0.95f64,
        dp in 0.001..0.04f64,
        sigma in 0.01..1.0f64,
        m in 10usize..500,
        d1 in 0.0..0.30f64,
        dd in 0.001..0.03f64,
        eps in 0.001..0.5f64,
    ) {
        let e1 = noise_tail_epsilon(p1, m, sigma).unwrap();
        let e2 = noise_tail_epsilon(p1 + dp, m, sigma).unwrap();
        prop_assert!(e2 >= e1);
        let e3 = noise_tail_epsilon(p1, m, sigma * 1.5).unwrap();
        prop_assert!(e3 >= e1);

        let g1 = global_bound(d1, 1.0, 0.0, eps).unwrap();
        let g2 = global_bound(d1 + dd, 1.0, 0.0, eps).unwrap();
        prop_assert!(g2 >= g1);
        let g3 = global_bound(d1, 1.0, 0.0, eps * 1.1).unwrap();
        prop_assert!(g3 >= g1);
    }
}
