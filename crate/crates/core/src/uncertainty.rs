//! Variances, the uncertainty bounds for non-Hermitian operator pairs, the
//! bound-implication check, saturation classification and the three-operator
//! Gram bounds, all under an arbitrary scalar product.
//!
//! Conventions: for centered operators Â = A − ⟨A⟩ and B̂ = B − ⟨B⟩,
//! `cross = ⟨Âφ, B̂φ⟩_P`, `C = −2 Im⟨B̂φ, Âφ⟩_P` and `D = 2 Re⟨B̂φ, Âφ⟩_P`,
//! so the two-sided bounds read `ΔA·ΔB ≥ |cross| ≥ ½·max{|C|, |D|}`.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{gram, Operator};
use crate::metric::{ProductTag, ScalarProduct};

/// Default relative tolerance for the saturation classifier.
pub const DEFAULT_SATURATION_TOL: f64 = 1e-8;

fn check_normalized(phi: &Array1<C64>, p: &ScalarProduct) -> Result<()> {
    let norm = p.norm(phi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// Mean value `⟨φ, Xφ⟩_P` on a state normalized under the product P.
pub fn mean(x: &Operator, phi: &Array1<C64>, p: &ScalarProduct) -> Result<C64> {
    check_normalized(phi, p)?;
    Ok(p.inner(phi, &x.apply(phi)))
}

/// The centered operator `X̂ = X − ⟨X⟩·I`; its mean on φ vanishes.
pub fn centered(x: &Operator, phi: &Array1<C64>, p: &ScalarProduct) -> Result<Operator> {
    let m = mean(x, phi, p)?;
    Ok(x - &Operator::identity(x.dim()).scale(m))
}

/// Variance `ΔX = ‖X̂φ‖_P`.
pub fn variance(x: &Operator, phi: &Array1<C64>, p: &ScalarProduct) -> Result<f64> {
    let m = mean(x, phi, p)?;
    Ok(p.norm(&centered_apply(x, m, phi)))
}

/// X̂φ without forming the centered matrix.
fn centered_apply(x: &Operator, mean_x: C64, phi: &Array1<C64>) -> Array1<C64> {
    &x.apply(phi) - &phi.mapv(|c| c * mean_x)
}

/// All uncertainty quantities for one (A, B, φ, product) tuple.
#[derive(Clone, Debug)]
pub struct UncertaintyReport {
    pub mean_a: C64,
    pub mean_b: C64,
    pub delta_a: f64,
    pub delta_b: f64,
    /// `⟨Âφ, B̂φ⟩_P = ⟨Â†B̂⟩` (adjoint taken with respect to P).
    pub cross: C64,
    /// Schwarz bound `|cross|`.
    pub bound23: f64,
    /// `C = −2 Im⟨B̂φ, Âφ⟩_P`, real.
    pub c: f64,
    /// `D = 2 Re⟨B̂φ, Âφ⟩_P`, real.
    pub d: f64,
    /// `½·max{|C|, |D|}`.
    pub bound210: f64,
    /// `⟨[A⁑, B]⟩` with A⁑ the P-adjoint of A.
    pub commutator_term: C64,
    /// `⟨{Â⁑, B̂}⟩` with centered operators.
    pub anticommutator_term: C64,
    pub product_tag: ProductTag,
}

impl UncertaintyReport {
    /// Slack of the Schwarz inequality, `ΔA·ΔB − bound23`.
    pub fn slack23(&self) -> f64 {
        self.delta_a * self.delta_b - self.bound23
    }

    /// Slack of the max-form inequality, `ΔA·ΔB − bound210`.
    pub fn slack210(&self) -> f64 {
        self.delta_a * self.delta_b - self.bound210
    }
}

/// Populates an [`UncertaintyReport`], cross-checking the projector form
/// `cross = ⟨Aφ, Q_φ Bφ⟩_P` with `Q_φ = I − |φ⟩⟨φ|` under P.
pub fn ur_report(
    a: &Operator,
    b: &Operator,
    phi: &Array1<C64>,
    p: &ScalarProduct,
) -> Result<UncertaintyReport> {
    let mean_a = mean(a, phi, p)?;
    let mean_b = mean(b, phi, p)?;
    let a_hat_phi = centered_apply(a, mean_a, phi);
    let b_hat_phi = centered_apply(b, mean_b, phi);
    let delta_a = p.norm(&a_hat_phi);
    let delta_b = p.norm(&b_hat_phi);

    let cross = p.inner(&a_hat_phi, &b_hat_phi);
    let ba = cross.conj(); // ⟨B̂φ, Âφ⟩_P
    let c = -2.0 * ba.im;
    let d = 2.0 * ba.re;
    let bound23 = cross.norm();
    let bound210 = 0.5 * c.abs().max(d.abs());

    // ⟨[A⁑, B]⟩ and ⟨{Â⁑, B̂}⟩, with the adjoint taken in the product P so
    // that cross = ½(commutator + anticommutator) holds for weighted products
    // as well.
    let a_adj = p.adjoint_of(a);
    let comm = a_adj.commutator(b);
    let commutator_term = p.inner(phi, &comm.apply(phi));
    // Centered ⁑-adjoint: (Â)⁑ = A⁑ − conj(⟨A⟩)·I.
    let a_hat_adj = &a_adj - &Operator::identity(a.dim()).scale(mean_a.conj());
    let b_hat = b - &Operator::identity(b.dim()).scale(mean_b);
    let anti = a_hat_adj.anticommutator(&b_hat);
    let anticommutator_term = p.inner(phi, &anti.apply(phi));

    // Projector form (23bis): Q_φ Bφ = B̂φ, so ⟨Aφ, Q_φ Bφ⟩_P = cross.
    let proj_cross = p.inner(&a.apply(phi), &b_hat_phi);
    debug_assert!(
        (proj_cross - cross).norm() <= 1e-8 * (1.0 + cross.norm()),
        "projector form disagrees: {proj_cross} vs {cross}"
    );

    Ok(UncertaintyReport {
        mean_a,
        mean_b,
        delta_a,
        delta_b,
        cross,
        bound23,
        c,
        d,
        bound210,
        commutator_term,
        anticommutator_term,
        product_tag: p.tag(),
    })
}

/// Checks that the Schwarz bound dominates the max-form bound, and that the
/// two coincide whenever `C·D = 0` (the implication goes both ways then).
pub fn lemma1_check(report: &UncertaintyReport) -> bool {
    let dominates = report.bound23 >= report.bound210 - 1e-10;
    if (report.c * report.d).abs() <= 1e-10 {
        dominates && (report.bound23 - report.bound210).abs() <= 1e-10
    } else {
        dominates
    }
}

/// Which eigenstate condition produced saturation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaturationCase {
    /// φ is an eigenstate of A.
    C1EigenA,
    /// φ is an eigenstate of B.
    C2EigenB,
    /// φ is an eigenstate of A + γB for the reported γ.
    C3Combination,
    None,
}

impl std::fmt::Display for SaturationCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SaturationCase::C1EigenA => write!(f, "c1_eigenA"),
            SaturationCase::C2EigenB => write!(f, "c2_eigenB"),
            SaturationCase::C3Combination => write!(f, "c3_combination"),
            SaturationCase::None => write!(f, "none"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SaturationResult {
    pub saturated: bool,
    pub case: SaturationCase,
    /// The combination coefficient for the c3 case: Âφ = −γ·B̂φ.
    pub gamma: Option<C64>,
    /// ‖Âφ‖ for c1, ‖B̂φ‖ for c2, ‖Âφ + γB̂φ‖ for c3/none.
    pub residual: f64,
}

/// Classifies saturation of the Schwarz bound via the eigenstate conditions:
/// (c1) Âφ = 0, (c2) B̂φ = 0, (c3) Âφ = −γB̂φ with γ from closed-form least
/// squares. Ties resolve with priority c1 > c2 > c3; a vanishing ‖B̂φ‖
/// short-circuits to c2 before the c3 division.
pub fn saturation_test(
    a: &Operator,
    b: &Operator,
    phi: &Array1<C64>,
    p: &ScalarProduct,
    tol: f64,
) -> Result<SaturationResult> {
    let mean_a = mean(a, phi, p)?;
    let mean_b = mean(b, phi, p)?;
    let a_hat_phi = centered_apply(a, mean_a, phi);
    let b_hat_phi = centered_apply(b, mean_b, phi);
    let na = p.norm(&a_hat_phi);
    let nb = p.norm(&b_hat_phi);
    let cross = p.inner(&a_hat_phi, &b_hat_phi);
    let saturated = (na * nb - cross.norm()).abs() <= tol * (na * nb).max(1.0);

    if na <= tol {
        return Ok(SaturationResult { saturated, case: SaturationCase::C1EigenA, gamma: None, residual: na });
    }
    if nb <= tol {
        return Ok(SaturationResult { saturated, case: SaturationCase::C2EigenB, gamma: None, residual: nb });
    }
    // Least squares in the single complex unknown γ: Âφ = −γB̂φ.
    let gamma = -p.inner(&b_hat_phi, &a_hat_phi) / C64::new(nb * nb, 0.0);
    let combo = &a_hat_phi + &b_hat_phi.mapv(|c| c * gamma);
    let residual = p.norm(&combo);
    let case = if residual <= tol * (na + nb) {
        SaturationCase::C3Combination
    } else {
        SaturationCase::None
    };
    Ok(SaturationResult { saturated, case, gamma: Some(gamma), residual })
}

/// Gram-matrix bounds for a triple of operators.
#[derive(Clone, Debug)]
pub struct TripleReport {
    /// 3×3 Gram matrix of (Âφ, B̂φ, Ĉφ) under P.
    pub gram3: Operator,
    /// Leading principal minors of the Gram matrix (all real).
    pub minors: [f64; 3],
    /// Determinant form of the third Sylvester minor:
    /// lhs = ‖f1‖²‖f2‖²‖f3‖² + 2Re(⟨f1,f2⟩⟨f2,f3⟩⟨f3,f1⟩).
    pub ineq220_lhs: f64,
    /// rhs = ‖f1‖²|⟨f2,f3⟩|² + ‖f2‖²|⟨f1,f3⟩|² + ‖f3‖²|⟨f1,f2⟩|².
    pub ineq220_rhs: f64,
    /// Triple-Schwarz product: lhs = (ΔA·ΔB·ΔC)².
    pub ineq221_lhs: f64,
    /// rhs = |⟨f1,f2⟩⟨f2,f3⟩⟨f3,f1⟩|.
    pub ineq221_rhs: f64,
}

fn det2(g: &Operator) -> f64 {
    let m = g.matrix();
    (m[[0, 0]] * m[[1, 1]] - m[[0, 1]] * m[[1, 0]]).re
}

fn det3(g: &Operator) -> f64 {
    let m = g.matrix();
    let d = m[[0, 0]] * (m[[1, 1]] * m[[2, 2]] - m[[1, 2]] * m[[2, 1]])
        - m[[0, 1]] * (m[[1, 0]] * m[[2, 2]] - m[[1, 2]] * m[[2, 0]])
        + m[[0, 2]] * (m[[1, 0]] * m[[2, 1]] - m[[1, 1]] * m[[2, 0]]);
    d.re
}

/// Builds the Gram matrix of the three centered vectors and evaluates both
/// three-operator inequalities.
pub fn triple_report(
    a: &Operator,
    b: &Operator,
    c: &Operator,
    phi: &Array1<C64>,
    p: &ScalarProduct,
) -> Result<TripleReport> {
    let f1 = centered_apply(a, mean(a, phi, p)?, phi);
    let f2 = centered_apply(b, mean(b, phi, p)?, phi);
    let f3 = centered_apply(c, mean(c, phi, p)?, phi);
    let gram3 = gram(&[f1, f2, f3], p)?;
    let m = gram3.matrix();
    let minors = [m[[0, 0]].re, det2(&gram3), det3(&gram3)];

    let n1 = m[[0, 0]].re;
    let n2 = m[[1, 1]].re;
    let n3 = m[[2, 2]].re;
    let g12 = m[[0, 1]];
    let g23 = m[[1, 2]];
    let g31 = m[[2, 0]];
    let cycle = g12 * g23 * g31;

    let ineq220_lhs = n1 * n2 * n3 + 2.0 * cycle.re;
    let ineq220_rhs = n1 * g23.norm_sqr() + n2 * g31.norm_sqr() + n3 * g12.norm_sqr();
    let ineq221_lhs = n1 * n2 * n3;
    let ineq221_rhs = cycle.norm();

    Ok(TripleReport { gram3, minors, ineq220_lhs, ineq220_rhs, ineq221_lhs, ineq221_rhs })
}
