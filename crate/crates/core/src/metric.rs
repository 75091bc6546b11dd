//! Metric-weighted scalar products `⟨f, g⟩_S = ⟨Sf, g⟩`, the ♯-adjoint,
//! metric construction from biorthogonal eigensystems and the good-observable
//! factory.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, inner, spectral, vec_norm, EigenSystem, Operator};

/// Refuse metrics whose condition number exceeds this: variance computations
/// downstream lose all significant digits beyond it.
pub const DEFAULT_COND_CAP: f64 = 1e12;

/// A positive-definite Hermitian operator S with cached square root and
/// inverses, defining the weighted product `⟨f, g⟩_S = ⟨Sf, g⟩`.
#[derive(Clone, Debug)]
pub struct Metric {
    s: Operator,
    s_half: Operator,
    s_half_inv: Operator,
    s_inv: Operator,
    cond: f64,
}

impl Metric {
    /// Builds the metric from S via its Hermitian eigendecomposition, which
    /// realizes the unique positive square root.
    pub fn new(s: Operator) -> Result<Self> {
        Self::with_cond_cap(s, DEFAULT_COND_CAP)
    }

    pub fn with_cond_cap(s: Operator, cap: f64) -> Result<Self> {
        let herm_res = s.hermiticity_residual();
        if herm_res > 1e-8 * (1.0 + s.norm_fro()) {
            return Err(Error::NotHermitian { residual: herm_res });
        }
        // Symmetrize to kill rounding drift before decomposing.
        let sym = Operator::new((s.matrix() + &s.adjoint().into_matrix()).mapv(|c| c * 0.5))?;
        let (w, v) = sym.matrix().eigh(UPLO::Lower)?;
        let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = w.iter().cloned().fold(0.0, f64::max);
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let cond = max / min;
        if cond > cap {
            return Err(Error::IllConditionedMetric { cond, cap });
        }
        let rebuild = |f: &dyn Fn(f64) -> f64| -> Operator {
            let n = w.len();
            let mut d = Array2::<C64>::zeros((n, n));
            for k in 0..n {
                d[[k, k]] = C64::new(f(w[k]), 0.0);
            }
            // The backend hands back eigenvectors of Sᵀ (row-major data read
            // column-major); V·f(Λ)·V† rebuilds f(Sᵀ) = f(S)ᵀ = conj(f(S)),
            // so conjugate once at the end.
            let m = v.dot(&d).dot(&v.t().mapv(|c: C64| c.conj()));
            Operator { mat: m.mapv(|c| c.conj()) }
        };
        Ok(Self {
            s: sym,
            s_half: rebuild(&f64::sqrt),
            s_half_inv: rebuild(&|x| 1.0 / x.sqrt()),
            s_inv: rebuild(&|x| 1.0 / x),
            cond,
        })
    }

    pub fn identity(dim: usize) -> Self {
        let i = Operator::identity(dim);
        Self { s: i.clone(), s_half: i.clone(), s_half_inv: i.clone(), s_inv: i, cond: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn s(&self) -> &Operator {
        &self.s
    }

    pub fn s_half(&self) -> &Operator {
        &self.s_half
    }

    pub fn s_half_inv(&self) -> &Operator {
        &self.s_half_inv
    }

    pub fn s_inv(&self) -> &Operator {
        &self.s_inv
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// The metric defined by S⁻¹ (swapping the roles of φ- and ψ-families).
    pub fn inverse_metric(&self) -> Metric {
        Metric {
            s: self.s_inv.clone(),
            s_half: self.s_half_inv.clone(),
            s_half_inv: self.s_half.clone(),
            s_inv: self.s.clone(),
            cond: self.cond,
        }
    }
}

/// Scalar product handle: the standard product or a metric-weighted one.
#[derive(Clone, Debug)]
pub enum ScalarProduct {
    Standard,
    Weighted(Metric),
}

/// Tag recorded in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductTag {
    Standard,
    Weighted,
}

impl std::fmt::Display for ProductTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProductTag::Standard => write!(f, "standard"),
            ProductTag::Weighted => write!(f, "weighted"),
        }
    }
}

impl ScalarProduct {
    pub fn weighted(metric: Metric) -> Self {
        ScalarProduct::Weighted(metric)
    }

    pub fn tag(&self) -> ProductTag {
        match self {
            ScalarProduct::Standard => ProductTag::Standard,
            ScalarProduct::Weighted(_) => ProductTag::Weighted,
        }
    }

    pub fn inner(&self, f: &Array1<C64>, g: &Array1<C64>) -> C64 {
        match self {
            ScalarProduct::Standard => inner(f, g),
            ScalarProduct::Weighted(m) => weighted_inner(m, f, g),
        }
    }

    pub fn norm(&self, f: &Array1<C64>) -> f64 {
        match self {
            ScalarProduct::Standard => vec_norm(f),
            ScalarProduct::Weighted(m) => vec_norm(&m.s_half.apply(f)),
        }
    }

    /// Adjoint with respect to this product: X† for the standard one, the
    /// ♯-adjoint for a weighted one.
    pub fn adjoint_of(&self, x: &Operator) -> Operator {
        match self {
            ScalarProduct::Standard => x.adjoint(),
            ScalarProduct::Weighted(m) => sharp_adjoint(m, x),
        }
    }

    /// Rank-one projector `|f⟩⟨g|` under this product: maps v to `⟨g, v⟩_P f`.
    pub fn outer(&self, f: &Array1<C64>, g: &Array1<C64>) -> Operator {
        match self {
            ScalarProduct::Standard => Operator::outer(f, g),
            ScalarProduct::Weighted(m) => Operator::outer(f, &m.s.apply(g)),
        }
    }
}

/// `⟨f, g⟩_S = ⟨Sf, g⟩`; the induced norm is `‖S^{1/2} f‖`.
pub fn weighted_inner(m: &Metric, f: &Array1<C64>, g: &Array1<C64>) -> C64 {
    inner(&m.s.apply(f), g)
}

/// The ♯-adjoint `S⁻¹ X† S`, satisfying `⟨Xf, g⟩_S = ⟨f, X♯ g⟩_S`.
pub fn sharp_adjoint(m: &Metric, x: &Operator) -> Operator {
    &(&m.s_inv * &x.adjoint()) * &m.s
}

/// Outcome of the biorthogonal metric construction for a Hamiltonian.
#[derive(Clone, Debug)]
pub struct HamiltonianMetric {
    pub metric: Metric,
    pub eigensystem: EigenSystem,
    /// Some eigenvalues have nonzero imaginary part; the intertwining check
    /// SH = H†S is skipped in that case.
    pub complex_spectrum: bool,
    /// max_k ‖S φ_k − ψ_k‖.
    pub state_residual: f64,
    /// ‖SH − H†S‖, present only for real spectra.
    pub intertwining_residual: Option<f64>,
}

/// Builds `S = Σ_k |ψ_k⟩⟨ψ_k|` (with `S⁻¹ = Σ_k |φ_k⟩⟨φ_k|`) from the
/// biorthogonal eigensystem of a nondegenerate Hamiltonian.
pub fn metric_from_hamiltonian(h: &Operator, gap_tol: f64) -> Result<HamiltonianMetric> {
    metric_from_hamiltonian_with_caps(h, gap_tol, DEFAULT_COND_CAP)
}

pub fn metric_from_hamiltonian_with_caps(
    h: &Operator,
    gap_tol: f64,
    cond_cap: f64,
) -> Result<HamiltonianMetric> {
    let es = spectral(h, gap_tol)?;
    if !es.biorthonormal {
        return Err(Error::PreconditionFailed(
            "eigensystem is not biorthonormalizable".into(),
        ));
    }
    let n = es.dim();
    let mut s_acc = Operator::zeros(n);
    for psi in &es.left_vectors {
        s_acc = &s_acc + &Operator::outer(psi, psi);
    }
    let metric = Metric::with_cond_cap(s_acc, cond_cap)?;

    let mut state_residual: f64 = 0.0;
    for k in 0..n {
        let r = vec_norm(&(&metric.s.apply(&es.right_vectors[k]) - &es.left_vectors[k]));
        state_residual = state_residual.max(r);
    }

    let complex_spectrum = es.eigenvalues.iter().any(|e| e.im.abs() > gap_tol);
    let intertwining_residual = if complex_spectrum {
        None
    } else {
        Some((&(&metric.s * h) - &(&h.adjoint() * &metric.s)).norm_fro())
    };

    Ok(HamiltonianMetric { metric, eigensystem: es, complex_spectrum, state_residual, intertwining_residual })
}

/// `B = S^{-1/2} B₀ S^{1/2}` for Hermitian B₀; the result intertwines with the
/// metric, `SB = B†S`, and transports commutators:
/// `[B, H] = S^{-1/2} [B₀, H₀] S^{1/2}` with `H₀ = S^{1/2} H S^{-1/2}`.
pub fn good_observable(m: &Metric, b0: &Operator) -> Result<Operator> {
    let res = b0.hermiticity_residual();
    if res > 1e-10 * (1.0 + b0.norm_fro()) {
        return Err(Error::NotHermitian { residual: res });
    }
    Ok(&(&m.s_half_inv * b0) * &m.s_half)
}

/// ‖SB − B†S‖, the defect of the good-observable intertwining relation.
pub fn intertwining_residual(m: &Metric, b: &Operator) -> f64 {
    (&(&m.s * b) - &(&b.adjoint() * &m.s)).norm_fro()
}

pub use linalg::gram;

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_metric() -> Metric {
        let s = Operator::new(array![
            [c(2.0, 0.0), c(0.3, 0.4)],
            [c(0.3, -0.4), c(1.0, 0.0)]
        ])
        .unwrap();
        Metric::new(s).unwrap()
    }

    #[test]
    fn square_root_caches_consistent() {
        let m = sample_metric();
        assert!((&(&m.s_half * &m.s_half) - &m.s).norm_fro() < 1e-10);
        assert!((&(&m.s_half * &m.s_half_inv) - &Operator::identity(2)).norm_fro() < 1e-10);
        assert!((&(&m.s * &m.s_inv) - &Operator::identity(2)).norm_fro() < 1e-10);
    }

    #[test]
    fn identity_metric_is_standard_product() {
        let m = Metric::identity(2);
        let f = array![c(0.1, 0.2), c(-0.7, 0.4)];
        let g = array![c(1.0, -0.3), c(0.5, 0.0)];
        assert!((weighted_inner(&m, &f, &g) - inner(&f, &g)).norm() < 1e-15);
    }

    #[test]
    fn weighted_norm_identity() {
        let m = sample_metric();
        let f = array![c(0.6, -0.1), c(0.3, 0.8)];
        let direct = weighted_inner(&m, &f, &f);
        assert!(direct.im.abs() < 1e-12);
        assert!(direct.re >= 0.0);
        let via_root = vec_norm(&m.s_half.apply(&f)).powi(2);
        assert!((direct.re - via_root).abs() < 1e-12);
    }

    #[test]
    fn weighted_inner_conjugate_symmetry() {
        let m = sample_metric();
        let f = array![c(0.6, -0.1), c(0.3, 0.8)];
        let g = array![c(-0.2, 0.5), c(0.9, 0.1)];
        let fg = weighted_inner(&m, &f, &g);
        let gf = weighted_inner(&m, &g, &f);
        assert!((fg - gf.conj()).norm() < 1e-13);
    }

    #[test]
    fn sharp_adjoint_reduces_to_adjoint_for_identity() {
        let m = Metric::identity(2);
        let x = Operator::new(array![[c(1.0, 2.0), c(0.5, 0.0)], [c(0.0, -1.0), c(2.0, 1.0)]]).unwrap();
        assert!((&sharp_adjoint(&m, &x) - &x.adjoint()).norm_fro() < 1e-14);
    }

    #[test]
    fn sharp_adjoint_defining_identity_and_involution() {
        let m = sample_metric();
        let x = Operator::new(array![[c(1.0, 2.0), c(0.5, 0.0)], [c(0.0, -1.0), c(2.0, 1.0)]]).unwrap();
        let xs = sharp_adjoint(&m, &x);
        let f = array![c(0.6, -0.1), c(0.3, 0.8)];
        let g = array![c(-0.2, 0.5), c(0.9, 0.1)];
        let lhs = weighted_inner(&m, &x.apply(&f), &g);
        let rhs = weighted_inner(&m, &f, &xs.apply(&g));
        assert!((lhs - rhs).norm() < 1e-10);
        assert!((&sharp_adjoint(&m, &xs) - &x).norm_fro() < 1e-10);
    }

    #[test]
    fn self_sharp_when_intertwining_holds() {
        // Build X with SX = X†S: X = S^{-1/2} X0 S^{1/2} for Hermitian X0.
        let m = sample_metric();
        let x0 = Operator::new(array![[c(0.4, 0.0), c(0.1, -0.6)], [c(0.1, 0.6), c(-1.2, 0.0)]]).unwrap();
        let x = good_observable(&m, &x0).unwrap();
        assert!((&sharp_adjoint(&m, &x) - &x).norm_fro() < 1e-10);
    }

    #[test]
    fn metric_from_hermitian_hamiltonian_is_identity() {
        let h = Operator::new(array![
            [c(1.0, 0.0), c(0.2, 0.5)],
            [c(0.2, -0.5), c(-0.7, 0.0)]
        ])
        .unwrap();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        assert!(!hm.complex_spectrum);
        assert!((&hm.metric.s - &Operator::identity(2)).norm_fro() < 1e-8);
        assert!(hm.intertwining_residual.unwrap() < 1e-8);
    }

    #[test]
    fn metric_reproduces_rr_dagger_inverse() {
        // H = R diag(1,2) R^{-1} should give S^{-1} = R R†. The columns of R
        // are normalized first: the metric carries a per-eigenvector scale
        // freedom, fixed here by the unit-norm eigenvector convention.
        let mut rm = array![[c(1.0, 0.0), c(0.6, -0.2)], [c(0.1, 0.3), c(1.4, 0.0)]];
        for j in 0..2 {
            let norm = rm.column(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            rm.column_mut(j).mapv_inplace(|x| x / norm);
        }
        let r = Operator::new(rm).unwrap();
        use ndarray_linalg::Inverse;
        let r_inv = Operator::new(r.matrix().inv().unwrap()).unwrap();
        let d = Operator::from_real(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        let h = &(&r * &d) * &r_inv;
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        let rr = &r * &r.adjoint();
        assert!((&hm.metric.s_inv - &rr).norm_fro() < 1e-8);
        assert!(hm.state_residual < 1e-8);
        assert!(hm.intertwining_residual.unwrap() < 1e-8);
    }

    #[test]
    fn complex_spectrum_flagged() {
        let h = Operator::new(array![[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        assert!(hm.complex_spectrum);
        assert!(hm.intertwining_residual.is_none());
    }

    #[test]
    fn good_observable_requires_hermitian_seed() {
        let m = sample_metric();
        let b0 = Operator::new(array![[c(0.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(matches!(good_observable(&m, &b0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn good_observable_identity_metric_is_seed() {
        let m = Metric::identity(2);
        let b0 = Operator::new(array![[c(0.4, 0.0), c(0.1, -0.6)], [c(0.1, 0.6), c(-1.2, 0.0)]]).unwrap();
        let b = good_observable(&m, &b0).unwrap();
        assert!((&b - &b0).norm_fro() < 1e-14);
    }

    #[test]
    fn good_observable_intertwines() {
        let m = sample_metric();
        let b0 = Operator::new(array![[c(0.4, 0.0), c(0.1, -0.6)], [c(0.1, 0.6), c(-1.2, 0.0)]]).unwrap();
        let b = good_observable(&m, &b0).unwrap();
        assert!(intertwining_residual(&m, &b) < 1e-9);
    }
}
