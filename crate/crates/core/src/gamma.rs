//! γ-dynamics: the maps γ^t(X) = e^{iH†t}Xe^{−iHt} and α^t(X) =
//! e^{iHt}Xe^{−iHt}, the derivation δ_γ(X) = i(H†X − XH) with its exponential
//! series, γ-symmetry predicates, symmetry products, the V_φ factory and the
//! saturation-transport check.
//!
//! For non-Hermitian H the map γ^t is not multiplicative and δ_γ is not a
//! derivation; both defects are exposed as explicit quantities so tests can
//! witness them rather than assume them.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{mat_exp, Operator, State};
use crate::metric::{Metric, ScalarProduct};
use crate::uncertainty::saturation_test;

/// Times sampled when certifying an orbit property that nominally holds for
/// all t ≥ 0.
pub const SYMMETRY_TIMES: [f64; 3] = [0.1, 1.0, 5.0];

const I1: C64 = C64::new(0.0, 1.0);

/// Cached propagators for one (H, t) pair: `forward = e^{−iHt}` and
/// `co_forward = e^{iH†t}`, the latter built directly from H† so the identity
/// `co_forward = (forward⁻¹)†` holds without an inversion.
#[derive(Clone, Debug)]
pub struct GammaFlow {
    h: Operator,
    t: f64,
    forward: Operator,
    co_forward: Operator,
}

impl GammaFlow {
    pub fn new(h: &Operator, t: f64) -> Result<Self> {
        let tz = C64::new(t, 0.0);
        let forward = mat_exp(&h.scale(-I1 * tz))?;
        let co_forward = mat_exp(&h.adjoint().scale(I1 * tz))?;
        Ok(Self { h: h.clone(), t, forward, co_forward })
    }

    pub fn h(&self) -> &Operator {
        &self.h
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn forward(&self) -> &Operator {
        &self.forward
    }

    pub fn co_forward(&self) -> &Operator {
        &self.co_forward
    }

    /// γ^t(X) = e^{iH†t} X e^{−iHt}.
    pub fn map(&self, x: &Operator) -> Operator {
        &(&self.co_forward * x) * &self.forward
    }
}

/// γ^t(X) = e^{iH†t} X e^{−iHt}, via two matrix exponentials.
pub fn gamma_evolve(h: &Operator, x: &Operator, t: f64) -> Result<Operator> {
    Ok(GammaFlow::new(h, t)?.map(x))
}

/// δ_γ(X) = i(H†X − XH), the generator of γ^t.
pub fn gamma_derivation(h: &Operator, x: &Operator) -> Operator {
    (&(&h.adjoint() * x) - &(x * h)).scale(I1)
}

/// Partial sum Σ_{k≤K} t^k δ_γ^k(X) / k! of the norm-convergent series for
/// γ^t(X).
pub fn gamma_series(h: &Operator, x: &Operator, t: f64, big_k: usize) -> Operator {
    let mut acc = x.clone();
    let mut term = x.clone();
    for k in 1..=big_k {
        term = gamma_derivation(h, &term).scale(C64::new(t / k as f64, 0.0));
        acc = &acc + &term;
    }
    acc
}

/// α^t(X) = e^{iHt} X e^{−iHt}: a similarity transform, hence multiplicative
/// and spectrum-preserving even for non-unitary e^{iHt}.
pub fn alpha_evolve(h: &Operator, x: &Operator, t: f64) -> Result<Operator> {
    let tz = C64::new(t, 0.0);
    let fwd = mat_exp(&h.scale(-I1 * tz))?;
    let bwd = mat_exp(&h.scale(I1 * tz))?;
    Ok(&(&bwd * x) * &fwd)
}

/// ‖δ_γ(XY) − δ_γ(X)Y − Xδ_γ(Y)‖: the Leibniz defect, equal to
/// ‖X(H† − H)Y‖ and hence zero for all pairs iff H is Hermitian.
pub fn leibniz_defect(h: &Operator, x: &Operator, y: &Operator) -> f64 {
    let lhs = gamma_derivation(h, &(x * y));
    let rhs = &(&gamma_derivation(h, x) * y) + &(x * &gamma_derivation(h, y));
    (&lhs - &rhs).norm_fro()
}

/// ‖δ_γ(X†) − δ_γ(X)†‖: vanishes identically, Hermitian H or not; the
/// *-property never discriminates.
pub fn star_defect(h: &Operator, x: &Operator) -> f64 {
    (&gamma_derivation(h, &x.adjoint()) - &gamma_derivation(h, x).adjoint()).norm_fro()
}

/// ‖γ^t(XY) − γ^t(X)γ^t(Y)‖: the multiplicativity defect of γ^t.
pub fn multiplicativity_defect(h: &Operator, x: &Operator, y: &Operator, t: f64) -> Result<f64> {
    let flow = GammaFlow::new(h, t)?;
    let lhs = flow.map(&(x * y));
    let rhs = &flow.map(x) * &flow.map(y);
    Ok((&lhs - &rhs).norm_fro())
}

/// All the equivalent γ-symmetry measurements for one candidate X, with the
/// scale-aware threshold used for each verdict.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    /// ‖[H, S⁻¹X]‖.
    pub commutator_norm: f64,
    /// ‖[H†, X†S⁻¹]‖.
    pub dual_commutator_norm: f64,
    /// ‖H†X − XH‖.
    pub cross_norm: f64,
    /// ‖δ_γ(X)‖.
    pub derivation_norm: f64,
    /// ‖γ^t(X) − X‖ at t ∈ [`SYMMETRY_TIMES`].
    pub orbit_deviation: [f64; 3],
    /// tol·‖X‖·(1 + ‖H‖).
    pub threshold: f64,
    /// One verdict per measurement (orbit collapsed to its worst time).
    pub verdicts: [bool; 5],
    pub is_symmetry: bool,
    pub verdicts_agree: bool,
}

/// Evaluates the four algebraic γ-symmetry criteria plus the sampled orbit
/// deviation and checks they deliver one verdict.
pub fn is_gamma_symmetry(
    h: &Operator,
    m: &Metric,
    x: &Operator,
    tol: f64,
) -> Result<EquivalenceReport> {
    let s_inv = m.s_inv();
    let commutator_norm = h.commutator(&(s_inv * x)).norm_fro();
    let dual_commutator_norm = h.adjoint().commutator(&(&x.adjoint() * s_inv)).norm_fro();
    let cross_norm = (&(&h.adjoint() * x) - &(x * h)).norm_fro();
    let derivation_norm = gamma_derivation(h, x).norm_fro();

    let mut orbit_deviation = [0.0; 3];
    for (k, &t) in SYMMETRY_TIMES.iter().enumerate() {
        orbit_deviation[k] = (&gamma_evolve(h, x, t)? - x).norm_fro();
    }

    let threshold = tol * x.norm_fro() * (1.0 + h.norm_fro());
    let worst_orbit = orbit_deviation.iter().cloned().fold(0.0, f64::max);
    let verdicts = [
        commutator_norm <= threshold,
        dual_commutator_norm <= threshold,
        cross_norm <= threshold,
        derivation_norm <= threshold,
        worst_orbit <= threshold,
    ];
    let is_symmetry = verdicts.iter().all(|&v| v);
    let verdicts_agree = verdicts.iter().all(|&v| v == verdicts[0]);
    Ok(EquivalenceReport {
        commutator_norm,
        dual_commutator_norm,
        cross_norm,
        derivation_norm,
        orbit_deviation,
        threshold,
        verdicts,
        is_symmetry,
        verdicts_agree,
    })
}

/// Product X·Y of a γ-symmetry X with an operator Y commuting with H is again
/// a γ-symmetry; both hypotheses and the conclusion are verified.
pub fn symmetry_product(
    h: &Operator,
    m: &Metric,
    x: &Operator,
    y: &Operator,
    tol: f64,
) -> Result<Operator> {
    let rep_x = is_gamma_symmetry(h, m, x, tol)?;
    if !rep_x.is_symmetry {
        return Err(Error::PreconditionFailed(format!(
            "X is not a γ-symmetry: ‖[H, S⁻¹X]‖ = {:.3e} exceeds {:.3e}",
            rep_x.commutator_norm, rep_x.threshold
        )));
    }
    let comm_y = y.commutator(h).norm_fro();
    let y_threshold = tol * y.norm_fro() * (1.0 + h.norm_fro());
    if comm_y > y_threshold {
        return Err(Error::PreconditionFailed(format!(
            "Y does not commute with H: ‖[Y, H]‖ = {comm_y:.3e} exceeds {y_threshold:.3e}"
        )));
    }
    let xy = x * y;
    let rep_xy = is_gamma_symmetry(h, m, &xy, tol)?;
    if !rep_xy.is_symmetry {
        return Err(Error::PreconditionFailed(format!(
            "product XY failed the γ-symmetry check: ‖[H, S⁻¹XY]‖ = {:.3e}",
            rep_xy.commutator_norm
        )));
    }
    Ok(xy)
}

/// Orthonormal basis with e₁ = φ: a Householder reflection maps the first
/// standard basis vector onto the line of φ and its remaining columns
/// complete the basis.
fn basis_from_state(phi: &Array1<C64>) -> Vec<Array1<C64>> {
    let n = phi.len();
    // Reflector I − 2ww†/⟨w,w⟩ with w = φ − βe₁, β = −e^{i·arg(φ₁)}; then
    // (I − 2ww†/⟨w,w⟩)e₁ = −e^{−iθ}φ, so the first column is φ up to phase.
    let theta = if phi[0].norm() > 0.0 { phi[0].arg() } else { 0.0 };
    let beta = -C64::from_polar(1.0, theta);
    let mut w = phi.clone();
    w[0] -= beta;
    let wnorm_sq: f64 = w.iter().map(|c| c.norm_sqr()).sum();

    let mut basis = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = Array1::<C64>::zeros(n);
        col[j] = C64::new(1.0, 0.0);
        if wnorm_sq > 0.0 {
            let proj = crate::linalg::inner(&w, &col) * C64::new(2.0 / wnorm_sq, 0.0);
            col = &col - &w.mapv(|c| c * proj);
        }
        basis.push(col);
    }
    // The reflector's first column is −e^{−iθ}φ; replace it by φ itself. The
    // remaining columns are orthogonal to the span of φ either way.
    basis[0] = phi.clone();
    basis
}

/// V_φ = Σ_n c_n |e_n⟩⟨e_n| over an orthonormal basis with e₁ = φ, so that
/// V_φφ = c₁φ = φ. Requires c₁ = 1 and one coefficient per dimension.
pub fn v_phi(phi: &State, coeffs: &[C64]) -> Result<Operator> {
    let n = phi.dim();
    if coeffs.len() != n {
        return Err(Error::BadCoefficients(format!(
            "expected {n} coefficients, got {}",
            coeffs.len()
        )));
    }
    if (coeffs[0] - C64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(Error::BadCoefficients(format!(
            "first coefficient must be 1, got {}",
            coeffs[0]
        )));
    }
    let basis = basis_from_state(phi.vector());
    let mut acc = Operator::zeros(n);
    for (c, e) in coeffs.iter().zip(basis.iter()) {
        acc = &acc + &Operator::outer(e, e).scale(*c);
    }
    Ok(acc)
}

/// Saturation transport: with A, B γ-symmetries and (A, B; φ) saturating under
/// the weighted product, verifies saturation of (γ^t(A), γ^t(B); φ) at each
/// sampled time. True by the fixed-point property; the check is numerical.
pub fn prop3_check(
    h: &Operator,
    m: &Metric,
    a: &Operator,
    b: &Operator,
    phi: &Array1<C64>,
    times: &[f64],
    tol: f64,
) -> Result<bool> {
    let p = ScalarProduct::Weighted(m.clone());
    for (label, op) in [("A", a), ("B", b)] {
        if !is_gamma_symmetry(h, m, op, tol)?.is_symmetry {
            return Err(Error::PreconditionFailed(format!(
                "{label} is not a γ-symmetry"
            )));
        }
    }
    let initial = saturation_test(a, b, phi, &p, tol)?;
    if !initial.saturated {
        return Err(Error::PreconditionFailed(
            "(A, B; φ) does not saturate the Schwarz bound at t = 0".into(),
        ));
    }
    let mut all = true;
    for &t in times {
        let at = gamma_evolve(h, a, t)?;
        let bt = gamma_evolve(h, b, t)?;
        all &= saturation_test(&at, &bt, phi, &p, tol)?.saturated;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inner, spectral, vec_norm};
    use crate::metric::metric_from_hamiltonian;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_operator(rng: &mut ChaCha8Rng, n: usize) -> Operator {
        let mut m = ndarray::Array2::<C64>::zeros((n, n));
        for v in m.iter_mut() {
            *v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        Operator::new(m).unwrap()
    }

    /// Non-Hermitian 2×2 with real nondegenerate spectrum {1, 2}.
    fn triangular_h() -> Operator {
        Operator::from_real(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap()
    }

    #[test]
    fn gamma_evolve_at_zero_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_operator(&mut rng, 3);
        let x = random_operator(&mut rng, 3);
        assert!((&gamma_evolve(&h, &x, 0.0).unwrap() - &x).norm_fro() < 1e-14);
    }

    #[test]
    fn gamma_equals_alpha_for_hermitian_h() {
        let h = Operator::new(array![
            [c(0.3, 0.0), c(0.1, 0.7)],
            [c(0.1, -0.7), c(-1.0, 0.0)]
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_operator(&mut rng, 2);
        let g = gamma_evolve(&h, &x, 0.8).unwrap();
        let a = alpha_evolve(&h, &x, 0.8).unwrap();
        assert!((&g - &a).norm_fro() < 1e-10);
        // Unitary similarity preserves the spectrum.
        let mut s0: Vec<(f64, f64)> =
            spectral(&x, 0.0).unwrap().eigenvalues.iter().map(|e| (e.re, e.im)).collect();
        let mut s1: Vec<(f64, f64)> =
            spectral(&g, 0.0).unwrap().eigenvalues.iter().map(|e| (e.re, e.im)).collect();
        let key = |p: &(f64, f64)| (p.0, p.1);
        s0.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        s1.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (u, v) in s0.iter().zip(s1.iter()) {
            assert!((u.0 - v.0).abs() < 1e-8 && (u.1 - v.1).abs() < 1e-8);
        }
    }

    #[test]
    fn gamma_of_identity_detects_non_hermiticity() {
        let h = triangular_h();
        let g1 = gamma_evolve(&h, &Operator::identity(2), 1.0).unwrap();
        assert!((&g1 - &Operator::identity(2)).norm_fro() > 1e-3);

        let herm = Operator::new(array![
            [c(0.3, 0.0), c(0.1, 0.7)],
            [c(0.1, -0.7), c(-1.0, 0.0)]
        ])
        .unwrap();
        let g2 = gamma_evolve(&herm, &Operator::identity(2), 1.0).unwrap();
        assert!((&g2 - &Operator::identity(2)).norm_fro() < 1e-10);
    }

    #[test]
    fn derivation_vanishes_for_commuting_hermitian_pair() {
        let h = Operator::from_real(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        let x = Operator::from_real(&[&[3.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(gamma_derivation(&h, &x).norm_fro() < 1e-15);
    }

    #[test]
    fn derivation_of_identity_measures_hermiticity() {
        let h = triangular_h();
        let d = gamma_derivation(&h, &Operator::identity(2));
        let expected = (&h.adjoint() - &h).scale(c(0.0, 1.0));
        assert!((&d - &expected).norm_fro() < 1e-15);
        assert!(d.norm_fro() > 0.5);
    }

    #[test]
    fn derivation_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_operator(&mut rng, 4);
        let x = random_operator(&mut rng, 4);
        let eps = 1e-5;
        let plus = gamma_evolve(&h, &x, eps).unwrap();
        let minus = gamma_evolve(&h, &x, -eps).unwrap();
        let fd = (&plus - &minus).scale(c(1.0 / (2.0 * eps), 0.0));
        let residual = (&fd - &gamma_derivation(&h, &x)).norm_fro();
        assert!(residual < 1e-6, "finite-difference residual {residual}");
    }

    #[test]
    fn series_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = random_operator(&mut rng, 3);
        let x = random_operator(&mut rng, 3);
        assert!((&gamma_series(&h, &x, 0.7, 0) - &x).norm_fro() < 1e-15);
        assert!((&gamma_series(&h, &x, 0.0, 25) - &x).norm_fro() < 1e-15);
    }

    #[test]
    fn series_matches_exponential_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let h = random_operator(&mut rng, 4);
        let x = random_operator(&mut rng, 4);
        let t = 0.5;
        assert!(h.norm_2() * t <= 2.0);
        let s = gamma_series(&h, &x, t, 30);
        let e = gamma_evolve(&h, &x, t).unwrap();
        let residual = (&s - &e).norm_fro();
        assert!(residual <= 1e-8, "series residual {residual}");
    }

    #[test]
    fn alpha_is_multiplicative_and_spectrum_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let h = random_operator(&mut rng, 4);
        let x = random_operator(&mut rng, 4);
        let y = random_operator(&mut rng, 4);
        let t = 1.0;
        let lhs = alpha_evolve(&h, &(&x * &y), t).unwrap();
        let rhs = &alpha_evolve(&h, &x, t).unwrap() * &alpha_evolve(&h, &y, t).unwrap();
        assert!((&lhs - &rhs).norm_fro() < 1e-9);

        let tr0 = x.trace();
        let tr1 = alpha_evolve(&h, &x, t).unwrap().trace();
        assert!((tr0 - tr1).norm() < 1e-9);
    }

    #[test]
    fn gamma_is_not_multiplicative_for_non_hermitian_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = triangular_h();
        let mut found = false;
        for _ in 0..20 {
            let x = random_operator(&mut rng, 2);
            let y = random_operator(&mut rng, 2);
            if multiplicativity_defect(&h, &x, &y, 1.0).unwrap() > 1e-3 {
                found = true;
                break;
            }
        }
        assert!(found, "no multiplicativity-defect witness found");
    }

    #[test]
    fn leibniz_defect_discriminates_star_does_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let hn = triangular_h();
        let hh = Operator::new(array![
            [c(0.3, 0.0), c(0.1, 0.7)],
            [c(0.1, -0.7), c(-1.0, 0.0)]
        ])
        .unwrap();
        let x = random_operator(&mut rng, 2);
        let y = random_operator(&mut rng, 2);
        assert!(leibniz_defect(&hn, &x, &y) > 1e-4);
        assert!(leibniz_defect(&hh, &x, &y) < 1e-12);
        assert!(star_defect(&hn, &x) < 1e-12);
        assert!(star_defect(&hh, &x) < 1e-12);
    }

    #[test]
    fn metric_is_a_symmetry_its_inverse_is_not() {
        let h = triangular_h();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        let m = &hm.metric;

        let rep_s = is_gamma_symmetry(&h, m, m.s(), 1e-9).unwrap();
        assert!(rep_s.is_symmetry, "S should be a γ-symmetry: {rep_s:?}");
        assert!(rep_s.verdicts_agree);

        let rep_inv = is_gamma_symmetry(&h, m, m.s_inv(), 1e-9).unwrap();
        assert!(!rep_inv.is_symmetry, "S⁻¹ should fail: {rep_inv:?}");
        assert!(rep_inv.verdicts_agree);
    }

    #[test]
    fn hermitian_h_symmetry_is_plain_commutation() {
        let h = Operator::from_real(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        let commuting = Operator::from_real(&[&[5.0, 0.0], &[0.0, -3.0]]).unwrap();
        let noncommuting = Operator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert!(is_gamma_symmetry(&h, &hm.metric, &commuting, 1e-9).unwrap().is_symmetry);
        assert!(!is_gamma_symmetry(&h, &hm.metric, &noncommuting, 1e-9).unwrap().is_symmetry);
    }

    #[test]
    fn fixed_point_law_for_the_metric() {
        let h = triangular_h();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        let s = hm.metric.s();
        for t in SYMMETRY_TIMES {
            let dev = (&gamma_evolve(&h, s, t).unwrap() - s).norm_fro();
            assert!(dev <= 1e-8 * s.norm_fro(), "t = {t}: deviation {dev}");
        }
    }

    #[test]
    fn symmetry_products() {
        let h = triangular_h();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        let m = &hm.metric;
        let s = m.s().clone();

        let p1 = symmetry_product(&h, m, &s, &Operator::identity(2), 1e-9).unwrap();
        assert!((&p1 - &s).norm_fro() < 1e-14);

        let sh = symmetry_product(&h, m, &s, &h, 1e-9).unwrap();
        assert!((&sh - &(&s * &h)).norm_fro() < 1e-14);

        // Polynomial in H commutes with H by construction.
        let poly = &(&h * &h) + &h.scale(c(0.5, 0.0));
        assert!(symmetry_product(&h, m, &s, &poly, 1e-9).is_ok());

        // A generic Y breaks the commutation hypothesis.
        let bad = Operator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        match symmetry_product(&h, m, &s, &bad, 1e-9) {
            Err(Error::PreconditionFailed(msg)) => assert!(msg.contains("Y")),
            other => panic!("expected PreconditionFailed, got {other:?}"),
        }
        // And S⁻¹ breaks the symmetry hypothesis.
        match symmetry_product(&h, m, m.s_inv(), &Operator::identity(2), 1e-9) {
            Err(Error::PreconditionFailed(msg)) => assert!(msg.contains("X")),
            other => panic!("expected PreconditionFailed, got {other:?}"),
        }
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> State {
        let v = Array1::from_iter(
            (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        );
        State::normalized(v).unwrap()
    }

    #[test]
    fn v_phi_basis_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let phi = random_state(&mut rng, 4);
        let ones = vec![c(1.0, 0.0); 4];
        let v = v_phi(&phi, &ones).unwrap();
        assert!((&v - &Operator::identity(4)).norm_fro() < 1e-12);

        let mut proj_coeffs = vec![c(0.0, 0.0); 4];
        proj_coeffs[0] = c(1.0, 0.0);
        let v = v_phi(&phi, &proj_coeffs).unwrap();
        let expected = Operator::outer(phi.vector(), phi.vector());
        assert!((&v - &expected).norm_fro() < 1e-12);
    }

    #[test]
    fn v_phi_fixes_phi_and_is_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let phi = random_state(&mut rng, 5);
        let coeffs: Vec<C64> = std::iter::once(c(1.0, 0.0))
            .chain((1..5).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))))
            .collect();
        let v = v_phi(&phi, &coeffs).unwrap();
        let residual = vec_norm(&(&v.apply(phi.vector()) - phi.vector()));
        assert!(residual < 1e-12, "V_φφ residual {residual}");
        let max_c = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(v.norm_2() <= max_c + 1e-10);
        // The eigenbasis is orthonormal: V_φ V_φ† is diagonalized by it with
        // eigenvalues |c_n|²; check one consequence, ‖V‖_F² = Σ|c_n|².
        let sum_sq: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        assert!((v.norm_fro().powi(2) - sum_sq).abs() < 1e-10);
    }

    #[test]
    fn v_phi_rejects_bad_first_coefficient() {
        let phi = State::basis_vector(3, 0);
        let coeffs = [c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(v_phi(&phi, &coeffs), Err(Error::BadCoefficients(_))));
        let short = [c(1.0, 0.0)];
        assert!(matches!(v_phi(&phi, &short), Err(Error::BadCoefficients(_))));
    }

    #[test]
    fn v_phi_preserves_saturation() {
        // (A, B; φ) saturating with φ an eigenstate of A stays saturating
        // after composing both with V_φ, since V_φφ = φ.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 4;
        let phi = State::basis_vector(n, 0);
        let a = Operator::from_real(&[
            &[2.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.5, 0.0],
            &[0.0, 0.5, 0.0, 0.0],
            &[0.0, 0.0, 0.0, -1.0],
        ])
        .unwrap();
        let b = random_operator(&mut rng, n);
        let p = ScalarProduct::Standard;
        assert!(saturation_test(&a, &b, phi.vector(), &p, 1e-8).unwrap().saturated);

        let coeffs: Vec<C64> = std::iter::once(c(1.0, 0.0))
            .chain((1..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
            .collect();
        let v = v_phi(&phi, &coeffs).unwrap();
        let av = &a * &v;
        let bv = &b * &v;
        let res = saturation_test(&av, &bv, phi.vector(), &p, 1e-8).unwrap();
        assert!(res.saturated, "composition with V_φ broke saturation: {res:?}");
    }

    #[test]
    fn prop3_transport() {
        let h = triangular_h();
        let hm = metric_from_hamiltonian(&h, 1e-8).unwrap();
        let m = hm.metric.clone();
        let s = m.s().clone();

        // φ: eigenvector of S, normalized in the weighted product.
        let es = spectral(&s, 1e-8).unwrap();
        let p = ScalarProduct::Weighted(m.clone());
        let raw = es.right_vectors[0].clone();
        let norm = p.norm(&raw);
        let phi = raw.mapv(|v| v / norm);

        assert!(prop3_check(&h, &m, &s, &s, &phi, &SYMMETRY_TIMES, 1e-8).unwrap());

        // A = S, B = SH: both fixed points; saturation holds since φ is an
        // eigenvector of A (case c1 fires regardless of B).
        let sh = &s * &h;
        assert!(prop3_check(&h, &m, &s, &sh, &phi, &SYMMETRY_TIMES, 1e-8).unwrap());

        // Broken precondition: B = S⁻¹ is not a γ-symmetry.
        assert!(matches!(
            prop3_check(&h, &m, &s, m.s_inv(), &phi, &SYMMETRY_TIMES, 1e-8),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn householder_basis_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in [2usize, 3, 6] {
            let phi = random_state(&mut rng, n);
            let basis = basis_from_state(phi.vector());
            assert!(vec_norm(&(&basis[0] - phi.vector())) < 1e-14);
            for i in 0..n {
                for j in 0..n {
                    let g = inner(&basis[i], &basis[j]);
                    let expected = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                    assert!((g - expected).norm() < 1e-10, "⟨e{i}, e{j}⟩ = {g}");
                }
            }
        }
    }
}
