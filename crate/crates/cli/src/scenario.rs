//! Scenario file schema. Scenarios are TOML documents; complex numbers are
//! written as expression strings ("1+0.5i", "-i", "2e-3"), evaluated by the
//! same parser that handles operator expressions.

use std::collections::BTreeMap;

use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub space: Space,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorSpec>,
    #[serde(default)]
    pub state: Option<StateSpec>,
    pub product: ProductSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub analyses: Vec<Analysis>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Space {
    /// Plain C^dim; operators come from matrix literals or expressions.
    Explicit { dim: usize },
    /// Truncated Fock space with the ladder-operator builders, optionally
    /// carrying a regular transform for pseudo-bosonic operators.
    Fock {
        truncation: usize,
        #[serde(default)]
        transform: Option<TransformSpec>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSpec {
    Identity,
    /// Diagonal deformation times squeeze, the bundled non-unitary transform.
    Canonical { theta: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    /// An expression over builders and previously named operators.
    Expr(String),
    /// A dense matrix literal, row major, entries as complex expressions.
    Matrix { matrix: Vec<Vec<String>> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// Entry list; normalized under the scenario product before use.
    Vector { vector: Vec<String> },
    /// Standard basis vector e_index.
    Basis { index: usize },
    /// Truncated coherent state Φ(z) (Fock spaces only).
    Coherent { z: String },
    /// Bi-coherent φ(z) = RΦ(z) (Fock spaces; R from the transform).
    BiCoherent { z: String },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProductSpec {
    Standard,
    /// Metric built from the biorthogonal eigensystem of a named Hamiltonian.
    MetricFrom { hamiltonian: String },
    /// Metric given as an explicit positive-definite matrix.
    MetricExplicit { matrix: Vec<Vec<String>> },
    /// S = (RR†)⁻¹ from the space transform (Fock spaces with a transform).
    TransformMetric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance for saturation classification.
    #[serde(default = "default_saturation_tol")]
    pub saturation: f64,
    /// Relative tolerance for γ-symmetry verdicts.
    #[serde(default = "default_symmetry_tol")]
    pub symmetry: f64,
}

fn default_saturation_tol() -> f64 {
    1e-8
}

fn default_symmetry_tol() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { saturation: default_saturation_tol(), symmetry: default_symmetry_tol() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    pub kind: AnalysisKind,
    /// Report label; defaults to "<kind>-<index>".
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub a: Option<String>,
    #[serde(default)]
    pub b: Option<String>,
    #[serde(default)]
    pub c: Option<String>,
    /// Candidate operator for symmetry_check / evolved pair deviations.
    #[serde(default)]
    pub x: Option<String>,
    /// Hamiltonian name; defaults to the metric_from Hamiltonian.
    #[serde(default)]
    pub h: Option<String>,
    /// Per-analysis state override.
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub times: Option<TimesSpec>,
    /// Sample count for randomized analyses.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    UrReport,
    Saturation,
    Triple,
    GammaOrbit,
    SymmetryCheck,
    TripleRandom,
}

impl AnalysisKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnalysisKind::UrReport => "ur_report",
            AnalysisKind::Saturation => "saturation",
            AnalysisKind::Triple => "triple",
            AnalysisKind::GammaOrbit => "gamma_orbit",
            AnalysisKind::SymmetryCheck => "symmetry_check",
            AnalysisKind::TripleRandom => "triple_random",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TimesSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl TimesSpec {
    pub fn samples(&self) -> Vec<f64> {
        match self {
            TimesSpec::List(v) => v.clone(),
            TimesSpec::Range { start, stop, count } => {
                let n = (*count).max(2);
                (0..n)
                    .map(|k| start + (stop - start) * (k as f64) / ((n - 1) as f64))
                    .collect()
            }
        }
    }
}

/// One verdict against a numeric (or string) report field: either
/// value ± tol, a [min, max] band, or a string equality.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub field: String,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub equals: Option<String>,
}
