//! Truncated Fock-space builders: ladder operators, position and momentum,
//! coherent states, pseudo-bosonic pairs obtained from an invertible
//! similarity transform, bi-coherent states and the non-Hermitian X, P pair.
//!
//! The space is the span of |0⟩..|N−1⟩. Canonical commutation relations hold
//! exactly off the top level; the (N−1, N−1) corner of [c, c†] equals 1−N and
//! is reported as the truncation artifact rather than hidden.

use ndarray::{Array1, Array2};
use ndarray_linalg::Inverse;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{mat_exp, Operator, State};
use crate::metric::Metric;

/// Truncation admissibility: the Poisson tail mass beyond the top level must
/// satisfy `Σ_{n≥N} |z|^{2n}/n! ≤ 1e-20 · e^{|z|²}`.
pub const TAIL_MASS_BOUND: f64 = 1e-20;

/// Default truncation dimension, adequate for |z| ≤ 3.
pub const DEFAULT_TRUNCATION: usize = 80;

/// Truncated annihilation and creation operators, with `c|n⟩ = √n |n−1⟩`.
pub fn ladder(n: usize) -> (Operator, Operator) {
    let mut c = Array2::<C64>::zeros((n, n));
    for k in 1..n {
        c[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
    }
    let c = Operator { mat: c };
    let c_dag = c.adjoint();
    (c, c_dag)
}

/// The number operator c†c = diag(0, 1, ..., N−1).
pub fn number_operator(n: usize) -> Operator {
    let (c, c_dag) = ladder(n);
    &c_dag * &c
}

/// Hermitian position and momentum, `x₀ = (c+c†)/√2`, `p₀ = (c−c†)/(√2 i)`.
pub fn position_momentum(n: usize) -> (Operator, Operator) {
    let (c, c_dag) = ladder(n);
    let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let x0 = (&c + &c_dag).scale(inv_sqrt2);
    // 1/(√2 i) = -i/√2
    let p0 = (&c - &c_dag).scale(inv_sqrt2 * C64::new(0.0, -1.0));
    (x0, p0)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Log of the geometric bound on the Poisson tail `Σ_{n≥N} |z|^{2n}/n!`.
/// Requires N+1 > |z|²; returns +inf otherwise.
fn ln_tail_bound(z_abs_sq: f64, n: usize) -> f64 {
    let ratio = z_abs_sq / (n as f64 + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let ln_first = (n as f64) * z_abs_sq.ln() - ln_factorial(n);
    ln_first - (1.0 - ratio).ln()
}

fn truncation_admissible(z: C64, n: usize) -> bool {
    let zz = z.norm_sqr();
    if zz == 0.0 {
        return true;
    }
    ln_tail_bound(zz, n) <= TAIL_MASS_BOUND.ln() + zz
}

/// Smallest truncation dimension admissible for the given amplitude.
pub fn min_truncation(z: C64) -> usize {
    let mut n = 2;
    while !truncation_admissible(z, n) {
        n += 1;
    }
    n
}

/// Normalized truncated coherent state `Φ(z) ∝ Σ_{n<N} z^n/√(n!) |n⟩`.
pub fn coherent_state(z: C64, n: usize) -> Result<State> {
    if !truncation_admissible(z, n) {
        return Err(Error::TruncationTooSmall { z_abs: z.norm(), min_dim: min_truncation(z) });
    }
    let mut coeffs = Array1::<C64>::zeros(n);
    let mut acc = C64::new(1.0, 0.0);
    coeffs[0] = acc;
    for k in 1..n {
        acc *= z / C64::new((k as f64).sqrt(), 0.0);
        coeffs[k] = acc;
    }
    State::normalized(coeffs)
}

/// A bounded invertible transform with cached inverse, connecting the
/// pseudo-bosonic pair to the canonical ladder operators.
#[derive(Clone, Debug)]
pub struct RegularTransform {
    r: Operator,
    r_inv: Operator,
    cond: f64,
}

/// Condition-number cap for regular transforms.
pub const DEFAULT_TRANSFORM_COND_CAP: f64 = 1e6;

impl RegularTransform {
    pub fn new(r: Operator) -> Result<Self> {
        Self::with_cond_cap(r, DEFAULT_TRANSFORM_COND_CAP)
    }

    pub fn with_cond_cap(r: Operator, cap: f64) -> Result<Self> {
        let r_inv = Operator::new(r.matrix().inv()?)?;
        let norm = r.norm_2();
        let cond = norm * r_inv.norm_2();
        if !cond.is_finite() || cond > cap {
            return Err(Error::IllConditionedMetric { cond, cap });
        }
        let residual = (&(&r * &r_inv) - &Operator::identity(r.dim())).norm_fro();
        if residual > 1e-10 * (1.0 + norm) {
            return Err(Error::PreconditionFailed(format!(
                "inverse residual {residual:.3e} too large"
            )));
        }
        Ok(Self { r, r_inv, cond })
    }

    pub fn identity(n: usize) -> Self {
        Self { r: Operator::identity(n), r_inv: Operator::identity(n), cond: 1.0 }
    }

    /// The canonical test transform: a diagonal deformation
    /// `D = diag(1 − 1/(2(n+1)))` applied after the squeezing unitary
    /// `U = exp(θ(c² − c†²)/2)`, i.e. `R = D·U`.
    ///
    /// The squeeze alone is exactly unitary (its generator is
    /// anti-Hermitian), which would force b† = a and RR† = I; the diagonal
    /// factor keeps R invertible and well conditioned (cond < 2) while making
    /// b† ≠ a and the metric S = (RR†)⁻¹ = D⁻² nontrivial. Its shape is
    /// chosen so that the normalized bi-coherent state at z = 1 has a
    /// standard-product ΔX·ΔP strictly above ½, separating the two products.
    pub fn canonical(theta: f64, n: usize) -> Result<Self> {
        let (c, c_dag) = ladder(n);
        let gen = (&(&c * &c) - &(&c_dag * &c_dag)).scale(C64::new(theta / 2.0, 0.0));
        let u = mat_exp(&gen)?;
        let mut d = Array2::<C64>::zeros((n, n));
        for k in 0..n {
            d[[k, k]] = C64::new(1.0 - 0.5 / (k as f64 + 1.0), 0.0);
        }
        let r = &Operator { mat: d } * &u;
        Self::new(r)
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn r(&self) -> &Operator {
        &self.r
    }

    pub fn r_inv(&self) -> &Operator {
        &self.r_inv
    }

    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn is_identity(&self) -> bool {
        (&self.r - &Operator::identity(self.dim())).norm_fro() < 1e-14
    }

    /// The metric with `S⁻¹ = RR†`, under which bi-coherent expectation
    /// values reproduce the canonical ones.
    pub fn metric(&self) -> Result<Metric> {
        let rr = &self.r * &self.r.adjoint();
        let s = Operator::new(rr.matrix().inv()?)?;
        Metric::new(s)
    }
}

/// Pseudo-bosonic pair `a = RcR⁻¹`, `b = Rc†R⁻¹`; [a, b] = 1 up to the
/// truncation corner, and b† ≠ a for non-unitary R.
pub fn pseudo_boson_pair(t: &RegularTransform) -> (Operator, Operator) {
    let n = t.dim();
    let (c, c_dag) = ladder(n);
    let a = &(t.r() * &c) * t.r_inv();
    let b = &(t.r() * &c_dag) * t.r_inv();
    (a, b)
}

/// Bi-coherent pair `φ(z) = RΦ(z)`, `ψ(z) = (R⁻¹)†Φ(z)`: eigenvectors of a
/// and b† with eigenvalue z, mutual overlap ⟨ψ(z), φ(z)⟩ = 1, and
/// `φ(z) = RR†ψ(z)`. Neither is renormalized.
pub fn bi_coherent(z: C64, t: &RegularTransform) -> Result<(Array1<C64>, Array1<C64>)> {
    let big_phi = coherent_state(z, t.dim())?.into_vector();
    let phi = t.r().apply(&big_phi);
    let psi = t.r_inv().adjoint().apply(&big_phi);
    Ok((phi, psi))
}

/// The non-Hermitian pair `X = (a+b)/√2`, `P = (a−b)/(√2 i)` with
/// [X, P] = i·1 up to the truncation corner.
pub fn xp_pair(a: &Operator, b: &Operator) -> Result<(Operator, Operator)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let inv_sqrt2 = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let x = (a + b).scale(inv_sqrt2);
    let p = (a - b).scale(inv_sqrt2 * C64::new(0.0, -1.0));
    Ok((x, p))
}

/// Frobenius norm of `M − target·I` restricted off the top Fock level:
/// the truncated commutation identities hold only on that sub-block.
pub fn sub_block_residual(m: &Operator, target: C64) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for i in 0..n.saturating_sub(1) {
        for j in 0..n.saturating_sub(1) {
            let expected = if i == j { target } else { C64::new(0.0, 0.0) };
            acc += (m.matrix()[[i, j]] - expected).norm_sqr();
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, vec_norm};

    fn c64(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ladder_two_levels() {
        let (c, c_dag) = ladder(2);
        assert_eq!(c.matrix()[[0, 1]], c64(1.0, 0.0));
        assert_eq!(c.matrix()[[0, 0]], c64(0.0, 0.0));
        assert_eq!(c.matrix()[[1, 0]], c64(0.0, 0.0));
        assert_eq!(c.matrix()[[1, 1]], c64(0.0, 0.0));
        assert_eq!(c_dag.matrix()[[1, 0]], c64(1.0, 0.0));
    }

    #[test]
    fn vacuum_is_annihilated() {
        let (c, _) = ladder(6);
        let vac = State::basis_vector(6, 0).into_vector();
        assert!(vec_norm(&c.apply(&vac)) < 1e-15);
    }

    #[test]
    fn commutator_is_identity_off_the_corner() {
        let n = 7;
        let (c, c_dag) = ladder(n);
        let comm = c.commutator(&c_dag);
        for k in 0..n - 1 {
            assert!((comm.matrix()[[k, k]] - c64(1.0, 0.0)).norm() < 1e-14);
        }
        let corner = comm.matrix()[[n - 1, n - 1]];
        assert!((corner - c64(1.0 - n as f64, 0.0)).norm() < 1e-12);
        assert!(sub_block_residual(&comm, c64(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn position_momentum_hermitian_and_canonical() {
        let n = 8;
        let (x0, p0) = position_momentum(n);
        assert!(x0.hermiticity_residual() < 1e-14);
        assert!(p0.hermiticity_residual() < 1e-14);
        let comm = x0.commutator(&p0);
        assert!(sub_block_residual(&comm, c64(0.0, 1.0)) < 1e-12);
        // ⟨0|x0²|0⟩ = 1/2
        let vac = State::basis_vector(n, 0).into_vector();
        let xsq = inner(&vac, &(&x0 * &x0).apply(&vac));
        assert!((xsq - c64(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn coherent_state_zero_is_vacuum() {
        let phi = coherent_state(c64(0.0, 0.0), 5).unwrap();
        assert_eq!(phi.vector()[0], c64(1.0, 0.0));
        assert!(phi.vector().iter().skip(1).all(|x| x.norm() == 0.0));
    }

    #[test]
    fn coherent_state_eigenvalue_relation() {
        let z = c64(1.3, -0.4);
        let n = DEFAULT_TRUNCATION;
        let (c, c_dag) = ladder(n);
        let phi = coherent_state(z, n).unwrap().into_vector();
        let residual = vec_norm(&(&c.apply(&phi) - &phi.mapv(|v| v * z)));
        assert!(residual < 1e-8, "residual {residual}");
        let number = &c_dag * &c;
        let occupancy = inner(&phi, &number.apply(&phi));
        assert!((occupancy - c64(z.norm_sqr(), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn truncation_guard_reports_minimal_n() {
        let z = c64(3.0, 0.0);
        match coherent_state(z, 10) {
            Err(Error::TruncationTooSmall { min_dim, .. }) => {
                assert!(coherent_state(z, min_dim).is_ok());
                assert!(coherent_state(z, min_dim - 1).is_err());
            }
            other => panic!("expected TruncationTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn pseudo_bosons_reduce_to_ladder_for_identity() {
        let t = RegularTransform::identity(6);
        let (a, b) = pseudo_boson_pair(&t);
        let (c, c_dag) = ladder(6);
        assert!((&a - &c).norm_fro() < 1e-14);
        assert!((&b - &c_dag).norm_fro() < 1e-14);
    }

    #[test]
    fn pseudo_boson_commutator_diagonal_r() {
        let n = 8;
        let mut d = Array2::<C64>::zeros((n, n));
        for k in 0..n {
            d[[k, k]] = c64(1.0 + 0.5 * (k as f64 + 1.0).recip(), 0.0);
        }
        let t = RegularTransform::new(Operator::new(d).unwrap()).unwrap();
        let (a, b) = pseudo_boson_pair(&t);
        let comm = a.commutator(&b);
        assert!(sub_block_residual(&comm, c64(1.0, 0.0)) < 1e-12);
        assert!((&b.adjoint() - &a).norm_fro() > 1e-3);
    }

    #[test]
    fn pseudo_boson_number_spectrum_preserved() {
        let n = 10;
        let t = RegularTransform::canonical(0.2, n).unwrap();
        let (a, b) = pseudo_boson_pair(&t);
        let ba = &b * &a;
        let es = crate::linalg::spectral(&ba, 1e-8).unwrap();
        let mut re: Vec<f64> = es.eigenvalues.iter().map(|e| e.re).collect();
        re.sort_by(f64::total_cmp);
        for (k, v) in re.iter().enumerate() {
            assert!((v - k as f64).abs() < 1e-8, "eigenvalue {v} vs {k}");
            assert!(es.eigenvalues.iter().all(|e| e.im.abs() < 1e-8));
        }
    }

    #[test]
    fn bi_coherent_identity_transform() {
        let z = c64(0.7, 0.1);
        let n = 40;
        let t = RegularTransform::identity(n);
        let (phi, psi) = bi_coherent(z, &t).unwrap();
        let big_phi = coherent_state(z, n).unwrap().into_vector();
        assert!(vec_norm(&(&phi - &big_phi)) < 1e-14);
        assert!(vec_norm(&(&psi - &big_phi)) < 1e-14);
    }

    #[test]
    fn bi_coherent_eigen_relations_and_overlap() {
        let z = c64(1.0, -0.6);
        let n = DEFAULT_TRUNCATION;
        let t = RegularTransform::canonical(0.3, n).unwrap();
        let (a, b) = pseudo_boson_pair(&t);
        let (phi, psi) = bi_coherent(z, &t).unwrap();
        let ra = vec_norm(&(&a.apply(&phi) - &phi.mapv(|v| v * z)));
        assert!(ra < 1e-7, "a residual {ra}");
        let rb = vec_norm(&(&b.adjoint().apply(&psi) - &psi.mapv(|v| v * z)));
        assert!(rb < 1e-7, "b† residual {rb}");
        let overlap = inner(&psi, &phi);
        assert!((overlap - c64(1.0, 0.0)).norm() < 1e-8, "overlap {overlap}");
        // φ(z) = RR†ψ(z)
        let rr = t.r() * &t.r().adjoint();
        assert!(vec_norm(&(&rr.apply(&psi) - &phi)) < 1e-8);
    }

    #[test]
    fn xp_pair_reduces_and_commutes() {
        let n = 12;
        let t = RegularTransform::identity(n);
        let (a, b) = pseudo_boson_pair(&t);
        let (x, p) = xp_pair(&a, &b).unwrap();
        let (x0, p0) = position_momentum(n);
        assert!((&x - &x0).norm_fro() < 1e-14);
        assert!((&p - &p0).norm_fro() < 1e-14);

        let t2 = RegularTransform::canonical(0.3, n).unwrap();
        let (a2, b2) = pseudo_boson_pair(&t2);
        let (x2, p2) = xp_pair(&a2, &b2).unwrap();
        assert!(x2.hermiticity_residual() > 1e-3);
        assert!(p2.hermiticity_residual() > 1e-3);
        // The corner defect of [c, c†] spreads over levels under a
        // non-diagonal R, so check the exact algebra instead of a sub-block:
        // [X, P] = i[a, b] and [a, b] = R[c, c†]R⁻¹.
        let comm = x2.commutator(&p2);
        let ab = a2.commutator(&b2);
        assert!((&comm - &ab.scale(c64(0.0, 1.0))).norm_fro() < 1e-9);
        let (c, c_dag) = ladder(n);
        let transported = &(t2.r() * &c.commutator(&c_dag)) * t2.r_inv();
        assert!((&ab - &transported).norm_fro() < 1e-9);
    }

    #[test]
    fn canonical_transform_metric_is_rr_dagger_inverse() {
        let n = 12;
        let t = RegularTransform::canonical(0.3, n).unwrap();
        assert!(t.cond() <= 4.0 + 1e-6);
        let m = t.metric().unwrap();
        let rr = t.r() * &t.r().adjoint();
        assert!((m.s_inv() - &rr).norm_fro() < 1e-8);
    }
}
