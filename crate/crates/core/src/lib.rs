//! Numerical toolkit for uncertainty relations of non-Hermitian operators on
//! finite-dimensional complex Hilbert spaces.
//!
//! The crate is organised in five layers:
//!
//! - [`linalg`]: dense complex operators, states, spectral decompositions,
//!   Gram matrices and the matrix exponential.
//! - [`metric`]: positive-definite metrics, the weighted scalar product
//!   `⟨f, g⟩_S = ⟨Sf, g⟩`, the ♯-adjoint and metric construction from a
//!   diagonalizable Hamiltonian's biorthogonal eigensystem.
//! - [`uncertainty`]: variance bounds for pairs and triples of (generally
//!   non-Hermitian) operators, saturation classification and the associated
//!   inequality lattice.
//! - [`fock`]: truncated Fock-space builders — ladder operators, coherent and
//!   bi-coherent states, pseudo-bosonic pairs from a regular transform.
//! - [`gamma`]: the γ-dynamics `γ^t(X) = e^{iH†t}Xe^{−iHt}`, its derivation
//!   and series, γ-symmetry predicates and saturation transport.

pub mod error;
pub mod fock;
pub mod gamma;
pub mod linalg;
pub mod metric;
pub mod uncertainty;

pub use error::{Error, Result};
pub use linalg::{inner, mat_exp, spectral, vec_norm, EigenSystem, Operator, State, C64};
pub use metric::{
    good_observable, metric_from_hamiltonian, sharp_adjoint, weighted_inner, HamiltonianMetric,
    Metric, ProductTag, ScalarProduct,
};
pub use uncertainty::{
    centered, lemma1_check, mean, saturation_test, triple_report, ur_report, variance, SaturationCase,
    SaturationResult, TripleReport, UncertaintyReport,
};
pub use fock::{
    bi_coherent, coherent_state, ladder, min_truncation, number_operator, position_momentum,
    pseudo_boson_pair, xp_pair, RegularTransform,
};
pub use gamma::{
    alpha_evolve, gamma_derivation, gamma_evolve, gamma_series, is_gamma_symmetry, prop3_check,
    symmetry_product, v_phi, EquivalenceReport, GammaFlow,
};
