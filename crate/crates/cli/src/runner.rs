//! Scenario execution: name resolution, product construction, analyses.

use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value as Json};

use nhur::{
    bi_coherent, coherent_state, gamma_evolve, good_observable, is_gamma_symmetry, ladder,
    metric_from_hamiltonian, number_operator, position_momentum, pseudo_boson_pair, saturation_test,
    triple_report, ur_report, xp_pair, Error as CoreError, Metric, Operator, RegularTransform,
    ScalarProduct,
};

use crate::expr::{self, parse_complex, Resolver, Value};
use crate::scenario::{
    Analysis, AnalysisKind, Expectation, OperatorSpec, ProductSpec, Scenario, Space, StateSpec,
    TransformSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EXPECTATION: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A terminal failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn schema(message: impl Into<String>) -> Self {
        Failure { code: EXIT_SCHEMA, message: message.into() }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Maps library errors onto exit codes: numerical guards are exit 3, anything
/// that indicates a malformed scenario is exit 2.
fn core_failure(err: CoreError) -> Failure {
    let code = match &err {
        CoreError::Overflow { .. }
        | CoreError::IllConditionedMetric { .. }
        | CoreError::TruncationTooSmall { .. }
        | CoreError::DegenerateSpectrum { .. }
        | CoreError::NotPositiveDefinite { .. }
        | CoreError::Backend(_) => EXIT_NUMERICAL,
        _ => EXIT_SCHEMA,
    };
    Failure { code, message: err.to_string() }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub truncation: Option<usize>,
}

/// Resolves operator names against the scenario's builder set and named
/// definitions, with memoization and cycle detection.
struct Names<'a> {
    builders: BTreeMap<String, Operator>,
    defs: &'a BTreeMap<String, OperatorSpec>,
    cache: BTreeMap<String, Operator>,
    in_progress: BTreeSet<String>,
    metric: Option<Metric>,
    dim: usize,
}

impl<'a> Names<'a> {
    fn operator(&mut self, name: &str) -> Result<Operator, String> {
        self.resolve_name(name)?.into_operator(name)
    }
}

impl<'a> Resolver for Names<'a> {
    fn resolve_name(&mut self, name: &str) -> Result<Value, String> {
        if name == "i" {
            return Ok(Value::Scalar(C64::new(0.0, 1.0)));
        }
        if let Some(op) = self.cache.get(name) {
            return Ok(Value::Op(op.clone()));
        }
        if let Some(op) = self.builders.get(name) {
            return Ok(Value::Op(op.clone()));
        }
        let Some(spec) = self.defs.get(name) else {
            return Err(format!("unknown name '{name}'"));
        };
        if !self.in_progress.insert(name.to_string()) {
            return Err(format!("operator '{name}' is defined in terms of itself"));
        }
        let result = match spec {
            OperatorSpec::Expr(src) => expr::eval(src, self)?.into_operator(name),
            OperatorSpec::Matrix { matrix } => {
                parse_matrix(matrix, self.dim).map_err(|e| format!("operator '{name}': {e}"))
            }
        };
        self.in_progress.remove(name);
        let op = result?;
        if op.dim() != self.dim {
            return Err(format!(
                "operator '{name}' has dimension {}, space has {}",
                op.dim(),
                self.dim
            ));
        }
        self.cache.insert(name.to_string(), op.clone());
        Ok(Value::Op(op))
    }

    fn apply_function(&mut self, name: &str, arg: Value) -> Result<Value, String> {
        match name {
            "adjoint" => Ok(Value::Op(arg.into_operator("adjoint(...)")?.adjoint())),
            "good_observable" => {
                let b0 = arg.into_operator("good_observable(...)")?;
                let m = self
                    .metric
                    .as_ref()
                    .ok_or("good_observable requires a metric product")?;
                good_observable(m, &b0).map(Value::Op).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown function '{other}'")),
        }
    }
}

fn parse_matrix(rows: &[Vec<String>], dim: usize) -> Result<Operator, String> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(format!("matrix literal must be {dim}x{dim}"));
    }
    let mut m = Array2::<C64>::zeros((dim, dim));
    for (j, row) in rows.iter().enumerate() {
        for (k, entry) in row.iter().enumerate() {
            m[[j, k]] = parse_complex(entry)?;
        }
    }
    Operator::new(m).map_err(|e| e.to_string())
}

/// Everything an analysis needs: the space, resolved product, default state.
struct Context<'a> {
    names: Names<'a>,
    product: ScalarProduct,
    truncation: Option<usize>,
    transform: Option<RegularTransform>,
    default_state: Option<Array1<C64>>,
    saturation_tol: f64,
    symmetry_tol: f64,
    default_h: Option<String>,
    seed: u64,
}

impl<'a> Context<'a> {
    fn dim(&self) -> usize {
        self.names.dim
    }

    fn state(&mut self, spec: &StateSpec) -> Result<Array1<C64>, Failure> {
        let dim = self.dim();
        let raw = match spec {
            StateSpec::Vector { vector } => {
                if vector.len() != dim {
                    return Err(Failure::schema(format!(
                        "state vector has {} entries, space has {dim}",
                        vector.len()
                    )));
                }
                let mut v = Array1::<C64>::zeros(dim);
                for (k, entry) in vector.iter().enumerate() {
                    v[k] = parse_complex(entry).map_err(Failure::schema)?;
                }
                v
            }
            StateSpec::Basis { index } => {
                if *index >= dim {
                    return Err(Failure::schema(format!(
                        "basis index {index} out of range for dimension {dim}"
                    )));
                }
                let mut v = Array1::<C64>::zeros(dim);
                v[*index] = C64::new(1.0, 0.0);
                v
            }
            StateSpec::Coherent { z } => {
                if self.truncation.is_none() {
                    return Err(Failure::schema("coherent states need a fock space"));
                }
                let z = parse_complex(z).map_err(Failure::schema)?;
                coherent_state(z, dim).map_err(core_failure)?.into_vector()
            }
            StateSpec::BiCoherent { z } => {
                let t = self.transform.as_ref().ok_or_else(|| {
                    Failure::schema("bi_coherent states need a fock space with a transform")
                })?;
                let z = parse_complex(z).map_err(Failure::schema)?;
                bi_coherent(z, t).map_err(core_failure)?.0
            }
        };
        let norm = self.product.norm(&raw);
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Failure::schema("state has zero or non-finite norm"));
        }
        Ok(raw.mapv(|c| c / norm))
    }

    fn state_for(&mut self, analysis: &Analysis) -> Result<Array1<C64>, Failure> {
        if let Some(spec) = &analysis.state {
            return self.state(&spec.clone());
        }
        self.default_state
            .clone()
            .ok_or_else(|| Failure::schema("analysis needs a state and no default is set"))
    }

    fn named(&mut self, slot: &str, name: &Option<String>) -> Result<Operator, Failure> {
        let name = name
            .as_ref()
            .ok_or_else(|| Failure::schema(format!("analysis is missing field '{slot}'")))?;
        self.names.operator(name).map_err(Failure::schema)
    }

    fn hamiltonian(&mut self, analysis: &Analysis) -> Result<Operator, Failure> {
        let name = analysis.h.clone().or_else(|| self.default_h.clone()).ok_or_else(|| {
            Failure::schema("analysis needs 'h' and the product declares no hamiltonian")
        })?;
        self.names.operator(&name).map_err(Failure::schema)
    }

    fn metric(&self) -> Result<&Metric, Failure> {
        self.names
            .metric
            .as_ref()
            .ok_or_else(|| Failure::schema("this analysis requires a metric product"))
    }
}

fn fock_builders(n: usize, transform: &Option<RegularTransform>) -> BTreeMap<String, Operator> {
    let mut out = BTreeMap::new();
    let (c, c_dag) = ladder(n);
    let (x0, p0) = position_momentum(n);
    out.insert("c".into(), c);
    out.insert("cdag".into(), c_dag);
    out.insert("n".into(), number_operator(n));
    out.insert("x0".into(), x0);
    out.insert("p0".into(), p0);
    out.insert("id".into(), Operator::identity(n));
    if let Some(t) = transform {
        let (a, b) = pseudo_boson_pair(t);
        if let Ok((x, p)) = xp_pair(&a, &b) {
            out.insert("X".into(), x);
            out.insert("P".into(), p);
        }
        out.insert("a".into(), a);
        out.insert("b".into(), b);
        out.insert("R".into(), t.r().clone());
        out.insert("R_inv".into(), t.r_inv().clone());
    }
    out
}

/// The per-analysis output: a flat JSON record plus optional CSV rows.
pub struct AnalysisOutput {
    pub record: Map<String, Json>,
    pub csv: Option<(String, Vec<String>)>,
    pub failures: Vec<String>,
}

/// The whole run: header record, per-analysis outputs, final exit code.
pub struct RunOutput {
    pub header: Map<String, Json>,
    pub analyses: Vec<AnalysisOutput>,
    pub exit_code: i32,
}

pub fn run(scenario: &Scenario, overrides: &Overrides) -> Result<RunOutput, Failure> {
    let seed = overrides.seed.or(scenario.seed).unwrap_or(0);
    let saturation_tol = overrides.tol.unwrap_or(scenario.tolerances.saturation);
    let symmetry_tol = scenario.tolerances.symmetry;

    let (dim, truncation, transform) = match &scenario.space {
        Space::Explicit { dim } => {
            if *dim == 0 {
                return Err(Failure::schema("field 'space.dim' must be positive"));
            }
            (*dim, None, None)
        }
        Space::Fock { truncation, transform } => {
            let n = overrides.truncation.unwrap_or(*truncation);
            if n == 0 {
                return Err(Failure::schema("field 'space.truncation' must be positive"));
            }
            let t = match transform {
                None => None,
                Some(TransformSpec::Identity) => Some(RegularTransform::identity(n)),
                Some(TransformSpec::Canonical { theta }) => {
                    Some(RegularTransform::canonical(*theta, n).map_err(core_failure)?)
                }
            };
            (n, Some(n), t)
        }
    };

    let builders = match &scenario.space {
        Space::Explicit { .. } => {
            let mut b = BTreeMap::new();
            b.insert("id".into(), Operator::identity(dim));
            b
        }
        Space::Fock { .. } => fock_builders(dim, &transform),
    };

    let mut names = Names {
        builders,
        defs: &scenario.operators,
        cache: BTreeMap::new(),
        in_progress: BTreeSet::new(),
        metric: None,
        dim,
    };

    // The product may reference a named Hamiltonian, so operators needed for
    // the metric are resolved before S and S_inv become available.
    let mut default_h = None;
    let product = match &scenario.product {
        ProductSpec::Standard => ScalarProduct::Standard,
        ProductSpec::MetricFrom { hamiltonian } => {
            let h = names.operator(hamiltonian).map_err(Failure::schema)?;
            let hm = metric_from_hamiltonian(&h, 1e-8).map_err(core_failure)?;
            default_h = Some(hamiltonian.clone());
            ScalarProduct::weighted(hm.metric)
        }
        ProductSpec::MetricExplicit { matrix } => {
            let s = parse_matrix(matrix, dim).map_err(Failure::schema)?;
            ScalarProduct::weighted(Metric::new(s).map_err(core_failure)?)
        }
        ProductSpec::TransformMetric => {
            let t = transform.as_ref().ok_or_else(|| {
                Failure::schema("product 'transform_metric' needs a fock transform")
            })?;
            ScalarProduct::weighted(t.metric().map_err(core_failure)?)
        }
    };
    if let ScalarProduct::Weighted(m) = &product {
        names.metric = Some(m.clone());
        names.builders.insert("S".into(), m.s().clone());
        names.builders.insert("S_inv".into(), m.s_inv().clone());
    }

    let mut ctx = Context {
        names,
        product,
        truncation,
        transform,
        default_state: None,
        saturation_tol,
        symmetry_tol,
        default_h,
        seed,
    };
    if let Some(spec) = &scenario.state {
        ctx.default_state = Some(ctx.state(&spec.clone())?);
    }

    let mut header = Map::new();
    header.insert("kind".into(), json!("scenario"));
    header.insert("name".into(), json!(scenario.name));
    if let Some(d) = &scenario.description {
        header.insert("description".into(), json!(d));
    }
    header.insert("dim".into(), json!(dim));
    if let Some(n) = truncation {
        header.insert("truncation".into(), json!(n));
    }
    header.insert("product".into(), json!(ctx.product.tag().to_string()));
    header.insert("seed".into(), json!(seed));
    header.insert("tol_saturation".into(), json!(saturation_tol));
    header.insert("tol_symmetry".into(), json!(symmetry_tol));
    header.insert("analyses".into(), json!(scenario.analyses.len()));

    let mut outputs = Vec::new();
    let mut any_failed = false;
    for (idx, analysis) in scenario.analyses.iter().enumerate() {
        let label = analysis
            .label
            .clone()
            .unwrap_or_else(|| format!("{}-{idx}", analysis.kind.as_str()));
        let (mut record, csv) = run_analysis(&mut ctx, analysis, &label)?;
        record.insert("kind".into(), json!(analysis.kind.as_str()));
        record.insert("label".into(), json!(label.clone()));

        let mut failures = Vec::new();
        for exp in &analysis.expect {
            if let Some(msg) = check_expectation(&record, exp) {
                failures.push(msg);
            }
        }
        record.insert("pass".into(), json!(failures.is_empty()));
        if !failures.is_empty() {
            record.insert("failures".into(), json!(failures.clone()));
            any_failed = true;
        }
        outputs.push(AnalysisOutput { record, csv, failures });
    }

    Ok(RunOutput {
        header,
        analyses: outputs,
        exit_code: if any_failed { EXIT_EXPECTATION } else { EXIT_OK },
    })
}

fn put(rec: &mut Map<String, Json>, key: &str, v: f64) {
    rec.insert(key.into(), json!(v));
}

fn put_complex(rec: &mut Map<String, Json>, key: &str, z: C64) {
    rec.insert(format!("{key}_re"), json!(z.re));
    rec.insert(format!("{key}_im"), json!(z.im));
}

type Csv = (String, Vec<String>);

fn run_analysis(
    ctx: &mut Context,
    analysis: &Analysis,
    label: &str,
) -> Result<(Map<String, Json>, Option<Csv>), Failure> {
    let rec = match analysis.kind {
        AnalysisKind::UrReport => ur_record(ctx, analysis)?,
        AnalysisKind::Saturation => saturation_record(ctx, analysis)?,
        AnalysisKind::Triple => triple_record(ctx, analysis)?,
        AnalysisKind::GammaOrbit => return gamma_orbit_record(ctx, analysis, label),
        AnalysisKind::SymmetryCheck => symmetry_record(ctx, analysis)?,
        AnalysisKind::TripleRandom => triple_random_record(ctx, analysis)?,
    };
    Ok((rec, None))
}

fn ur_record(ctx: &mut Context, analysis: &Analysis) -> Result<Map<String, Json>, Failure> {
    let a = ctx.named("a", &analysis.a)?;
    let b = ctx.named("b", &analysis.b)?;
    let phi = ctx.state_for(analysis)?;
    let r = ur_report(&a, &b, &phi, &ctx.product).map_err(core_failure)?;

    let mut rec = Map::new();
    put_complex(&mut rec, "mean_a", r.mean_a);
    put_complex(&mut rec, "mean_b", r.mean_b);
    put(&mut rec, "delta_a", r.delta_a);
    put(&mut rec, "delta_b", r.delta_b);
    put(&mut rec, "product_dadb", r.delta_a * r.delta_b);
    put_complex(&mut rec, "cross", r.cross);
    put(&mut rec, "cross_abs", r.cross.norm());
    put(&mut rec, "c_term", r.c);
    put(&mut rec, "d_term", r.d);
    put(&mut rec, "bound23", r.bound23);
    put(&mut rec, "bound210", r.bound210);
    put(&mut rec, "slack23", r.slack23());
    put(&mut rec, "slack210", r.slack210());
    put(&mut rec, "commutator_abs", r.commutator_term.norm());
    put(&mut rec, "anticommutator_abs", r.anticommutator_term.norm());
    let scale = 1.0 + r.delta_a * r.delta_b;
    put(
        &mut rec,
        "saturated_210",
        if r.slack210().abs() <= ctx.saturation_tol * scale { 1.0 } else { 0.0 },
    );
    put(
        &mut rec,
        "saturated_23",
        if r.slack23().abs() <= ctx.saturation_tol * scale { 1.0 } else { 0.0 },
    );
    Ok(rec)
}

fn saturation_record(ctx: &mut Context, analysis: &Analysis) -> Result<Map<String, Json>, Failure> {
    let a = ctx.named("a", &analysis.a)?;
    let b = ctx.named("b", &analysis.b)?;
    let phi = ctx.state_for(analysis)?;
    let s = saturation_test(&a, &b, &phi, &ctx.product, ctx.saturation_tol).map_err(core_failure)?;

    let mut rec = Map::new();
    put(&mut rec, "saturated", if s.saturated { 1.0 } else { 0.0 });
    rec.insert("case".into(), json!(s.case.to_string()));
    if let Some(g) = s.gamma {
        put_complex(&mut rec, "gamma", g);
    }
    put(&mut rec, "residual", s.residual);
    Ok(rec)
}

fn triple_record(ctx: &mut Context, analysis: &Analysis) -> Result<Map<String, Json>, Failure> {
    let a = ctx.named("a", &analysis.a)?;
    let b = ctx.named("b", &analysis.b)?;
    let c = ctx.named("c", &analysis.c)?;
    let phi = ctx.state_for(analysis)?;
    let t = triple_report(&a, &b, &c, &phi, &ctx.product).map_err(core_failure)?;

    let mut rec = Map::new();
    for (k, m) in t.minors.iter().enumerate() {
        put(&mut rec, &format!("minor_{k}"), *m);
    }
    put(&mut rec, "ineq220_lhs", t.ineq220_lhs);
    put(&mut rec, "ineq220_rhs", t.ineq220_rhs);
    put(&mut rec, "ineq220_slack", t.ineq220_lhs - t.ineq220_rhs);
    put(&mut rec, "ineq221_lhs", t.ineq221_lhs);
    put(&mut rec, "ineq221_rhs", t.ineq221_rhs);
    put(&mut rec, "ineq221_slack", t.ineq221_lhs - t.ineq221_rhs);
    Ok(rec)
}

/// One orbit sample: the deviation of X plus the uncertainty pair (A, B)
/// evolved to the same time. These are the CSV row quantities.
struct OrbitSample {
    t: f64,
    deviation: f64,
    dadb: f64,
    bound23: f64,
    bound210: f64,
    saturated: bool,
}

fn orbit_samples(ctx: &mut Context, analysis: &Analysis) -> Result<Vec<OrbitSample>, Failure> {
    let h = ctx.hamiltonian(analysis)?;
    let x = ctx.named("x", &analysis.x)?;
    let a = ctx.named("a", &analysis.a)?;
    let b = ctx.named("b", &analysis.b)?;
    let phi = ctx.state_for(analysis)?;
    let times = analysis
        .times
        .as_ref()
        .ok_or_else(|| Failure::schema("gamma_orbit needs 'times'"))?
        .samples();
    if times.is_empty() {
        return Err(Failure::schema("gamma_orbit needs a non-empty time grid"));
    }

    let mut out = Vec::with_capacity(times.len());
    for &t in &times {
        let xt = gamma_evolve(&h, &x, t).map_err(core_failure)?;
        let at = gamma_evolve(&h, &a, t).map_err(core_failure)?;
        let bt = gamma_evolve(&h, &b, t).map_err(core_failure)?;
        let deviation = (&xt - &x).norm_fro();
        let r = ur_report(&at, &bt, &phi, &ctx.product).map_err(core_failure)?;
        let s = saturation_test(&at, &bt, &phi, &ctx.product, ctx.saturation_tol)
            .map_err(core_failure)?;
        out.push(OrbitSample {
            t,
            deviation,
            dadb: r.delta_a * r.delta_b,
            bound23: r.bound23,
            bound210: r.bound210,
            saturated: s.saturated,
        });
    }
    Ok(out)
}

fn gamma_orbit_record(
    ctx: &mut Context,
    analysis: &Analysis,
    label: &str,
) -> Result<(Map<String, Json>, Option<Csv>), Failure> {
    let samples = orbit_samples(ctx, analysis)?;
    let x = ctx.named("x", &analysis.x)?;
    let x_norm = x.norm_fro().max(1.0);

    let max_dev = samples.iter().map(|s| s.deviation).fold(0.0_f64, f64::max);
    let min_dadb = samples.iter().map(|s| s.dadb).fold(f64::INFINITY, f64::min);
    let max_dadb = samples.iter().map(|s| s.dadb).fold(0.0_f64, f64::max);
    let all_saturated = samples.iter().all(|s| s.saturated);

    let mut rec = Map::new();
    put(&mut rec, "samples", samples.len() as f64);
    put(&mut rec, "max_deviation", max_dev);
    put(&mut rec, "max_rel_deviation", max_dev / x_norm);
    put(&mut rec, "final_deviation", samples.last().map(|s| s.deviation).unwrap_or(0.0));
    put(&mut rec, "min_dadb", min_dadb);
    put(&mut rec, "max_dadb", max_dadb);
    put(&mut rec, "all_saturated", if all_saturated { 1.0 } else { 0.0 });

    let mut rows = vec!["t,deviation,dadb,bound23,bound210,saturated".to_string()];
    for s in &samples {
        rows.push(format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            s.t,
            s.deviation,
            s.dadb,
            s.bound23,
            s.bound210,
            if s.saturated { 1 } else { 0 }
        ));
    }
    Ok((rec, Some((format!("{label}.csv"), rows))))
}

fn symmetry_record(ctx: &mut Context, analysis: &Analysis) -> Result<Map<String, Json>, Failure> {
    let h = ctx.hamiltonian(analysis)?;
    let x = ctx.named("x", &analysis.x)?;
    let m = ctx.metric()?.clone();
    let r = is_gamma_symmetry(&h, &m, &x, ctx.symmetry_tol).map_err(core_failure)?;

    let mut rec = Map::new();
    put(&mut rec, "commutator_norm", r.commutator_norm);
    put(&mut rec, "dual_commutator_norm", r.dual_commutator_norm);
    put(&mut rec, "cross_norm", r.cross_norm);
    put(&mut rec, "derivation_norm", r.derivation_norm);
    for (k, d) in r.orbit_deviation.iter().enumerate() {
        put(&mut rec, &format!("orbit_deviation_{k}"), *d);
    }
    put(&mut rec, "threshold", r.threshold);
    put(&mut rec, "is_symmetry", if r.is_symmetry { 1.0 } else { 0.0 });
    put(&mut rec, "verdicts_agree", if r.verdicts_agree { 1.0 } else { 0.0 });
    Ok(rec)
}

/// Randomized triple-inequality sweep: worst observed slacks over `count`
/// seeded draws at the scenario dimension.
fn triple_random_record(ctx: &mut Context, analysis: &Analysis) -> Result<Map<String, Json>, Failure> {
    let count = analysis.count.unwrap_or(100);
    let dim = ctx.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let draw_op = |rng: &mut ChaCha8Rng| {
        let mut m = Array2::<C64>::zeros((dim, dim));
        for e in m.iter_mut() {
            *e = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        Operator::new(m).expect("square by construction")
    };

    let mut min_minor = f64::INFINITY;
    let mut min_slack221 = f64::INFINITY;
    let mut max_det_residual = 0.0_f64;
    for _ in 0..count {
        let a = draw_op(&mut rng);
        let b = draw_op(&mut rng);
        let c = draw_op(&mut rng);
        let mut v = Array1::<C64>::zeros(dim);
        for e in v.iter_mut() {
            *e = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let norm = ctx.product.norm(&v);
        let phi = v.mapv(|z| z / norm);

        let t = triple_report(&a, &b, &c, &phi, &ctx.product).map_err(core_failure)?;
        for m in t.minors {
            min_minor = min_minor.min(m);
        }
        min_slack221 = min_slack221.min(t.ineq221_lhs - t.ineq221_rhs);
        // (220) lhs − rhs must equal the third Sylvester minor exactly.
        max_det_residual =
            max_det_residual.max(((t.ineq220_lhs - t.ineq220_rhs) - t.minors[2]).abs());
    }

    let mut rec = Map::new();
    put(&mut rec, "count", count as f64);
    put(&mut rec, "min_minor", min_minor);
    put(&mut rec, "min_slack221", min_slack221);
    put(&mut rec, "max_det_residual", max_det_residual);
    Ok(rec)
}

/// Evaluates one expectation against a record field; returns a failure
/// message, or None when it holds.
fn check_expectation(record: &Map<String, Json>, exp: &Expectation) -> Option<String> {
    let Some(found) = record.get(&exp.field) else {
        return Some(format!("expect: field '{}' not present in the record", exp.field));
    };
    if let Some(want) = &exp.equals {
        let got = match found {
            Json::String(s) => s.clone(),
            other => other.to_string(),
        };
        return if &got == want {
            None
        } else {
            Some(format!("expect {}: got '{got}', wanted '{want}'", exp.field))
        };
    }
    let Some(got) = found.as_f64() else {
        return Some(format!("expect {}: field is not numeric", exp.field));
    };
    if !got.is_finite() {
        return Some(format!("expect {}: value {got} is not finite", exp.field));
    }
    if let Some(value) = exp.value {
        let tol = exp.tol.unwrap_or(1e-12);
        if (got - value).abs() > tol {
            return Some(format!(
                "expect {}: got {got}, wanted {value} ± {tol}",
                exp.field
            ));
        }
    }
    if let Some(min) = exp.min {
        if got < min {
            return Some(format!("expect {}: got {got}, wanted ≥ {min}", exp.field));
        }
    }
    if let Some(max) = exp.max {
        if got > max {
            return Some(format!("expect {}: got {got}, wanted ≤ {max}", exp.field));
        }
    }
    None
}
