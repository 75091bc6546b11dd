//! Dense complex linear algebra substrate: operators, states, spectral
//! decompositions, the matrix exponential and Gram matrices.
//!
//! Everything is stored densely; the dimensions of interest stay below a few
//! hundred, where exactness of the invariant checks matters more than scale.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Factorize, OperationNorm, Solve, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metric::ScalarProduct;

pub type C64 = Complex64;

/// Default gap tolerance below which a spectrum is treated as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
/// Default residual tolerance for eigenvector checks.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;
/// Default norm cap for the matrix exponential overflow guard.
pub const DEFAULT_EXP_NORM_CAP: f64 = 1e3;

/// Standard inner product, conjugate-linear in the first argument:
/// `inner(f, g) = Σ conj(f_i) g_i`, so that `⟨X†f, g⟩ = ⟨f, Xg⟩`.
pub fn inner(f: &Array1<C64>, g: &Array1<C64>) -> C64 {
    f.iter().zip(g.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(f: &Array1<C64>) -> f64 {
    f.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// A dense square complex matrix acting on a fixed-dimension space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    pub(crate) mat: Array2<C64>,
}

impl Operator {
    /// Wraps a square matrix with finite entries.
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        let (rows, cols) = mat.dim();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        if mat.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Array2::eye(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Array2::zeros((dim, dim)) }
    }

    /// Builds an operator from real entries, row by row.
    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut mat = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                mat[[i, j]] = C64::new(x, 0.0);
            }
        }
        Operator::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        Operator { mat: self.mat.t().mapv(|c| c.conj()) }
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    pub fn scale(&self, z: C64) -> Operator {
        Operator { mat: self.mat.mapv(|c| c * z) }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator { mat: self.mat.dot(&other.mat) - other.mat.dot(&self.mat) }
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        Operator { mat: self.mat.dot(&other.mat) + other.mat.dot(&self.mat) }
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.mat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value).
    pub fn norm_2(&self) -> f64 {
        let (_, sv, _) = self.mat.svd(false, false).expect("svd of finite matrix");
        sv.iter().cloned().fold(0.0, f64::max)
    }

    /// Residual ‖X − X†‖ measuring deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        (self - &self.adjoint()).norm_fro()
    }

    /// Outer product |f⟩⟨g| under the standard product: maps v to ⟨g, v⟩ f.
    pub fn outer(f: &Array1<C64>, g: &Array1<C64>) -> Operator {
        let n = f.len();
        let mut mat = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                mat[[i, j]] = f[i] * g[j].conj();
            }
        }
        Operator { mat }
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat + &rhs.mat }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator { mat: &self.mat - &rhs.mat }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator { mat: self.mat.dot(&rhs.mat) }
    }
}

/// A normalized complex vector (unit norm under the standard product).
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    vec: Array1<C64>,
}

impl State {
    /// Accepts a vector already normalized within 1e-12.
    pub fn new(vec: Array1<C64>) -> Result<Self> {
        let norm = vec_norm(&vec);
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { vec })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(vec: Array1<C64>) -> Result<Self> {
        let norm = vec_norm(&vec);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { vec: vec.mapv(|c| c / norm) })
    }

    pub fn basis_vector(dim: usize, k: usize) -> Self {
        let mut vec = Array1::zeros(dim);
        vec[k] = C64::new(1.0, 0.0);
        Self { vec }
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn vector(&self) -> &Array1<C64> {
        &self.vec
    }

    pub fn into_vector(self) -> Array1<C64> {
        self.vec
    }
}

/// Eigenvalues with right and left eigenvectors of a generally non-normal
/// operator. When `biorthonormal` is true the families satisfy
/// `⟨ψ_j, φ_k⟩ = δ_jk` with the left vectors rescaled so `⟨ψ_k, φ_k⟩ = 1`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<C64>,
    pub right_vectors: Vec<Array1<C64>>,
    pub left_vectors: Vec<Array1<C64>>,
    pub biorthonormal: bool,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Σ_k E_k |φ_k⟩⟨ψ_k|; equals the original operator when biorthonormal.
    pub fn reconstruct(&self) -> Operator {
        let n = self.dim();
        let mut acc = Operator::zeros(n);
        for k in 0..n {
            let term = Operator::outer(&self.right_vectors[k], &self.left_vectors[k])
                .scale(self.eigenvalues[k]);
            acc = &acc + &term;
        }
        acc
    }
}

/// Eigendecomposition with left eigenvectors computed from the adjoint and
/// rescaled (scaling only, no mixing) so that `⟨ψ_k, φ_k⟩ = 1`.
///
/// Refuses degenerate spectra: any eigenvalue gap below `gap_tol` yields
/// `DegenerateSpectrum`, since the downstream metric construction requires a
/// nondegenerate spectrum.
pub fn spectral(h: &Operator, gap_tol: f64) -> Result<EigenSystem> {
    let n = h.dim();
    let (vals, vecs) = h.matrix().eig()?;

    let mut min_gap = f64::INFINITY;
    for j in 0..n {
        for k in (j + 1)..n {
            min_gap = min_gap.min((vals[j] - vals[k]).norm());
        }
    }
    if min_gap < gap_tol {
        return Err(Error::DegenerateSpectrum { gap: min_gap, tol: gap_tol });
    }

    let mut right: Vec<Array1<C64>> = Vec::with_capacity(n);
    for k in 0..n {
        let col = vecs.column(k).to_owned();
        let norm = vec_norm(&col);
        right.push(col.mapv(|c| c / norm));
    }

    // Left eigenvectors: H† ψ = conj(E) ψ. Match against conj of the right
    // eigenvalues; nondegeneracy makes the pairing unambiguous.
    let (lvals, lvecs) = h.adjoint().matrix().eig()?;
    let mut used = vec![false; n];
    let mut left: Vec<Array1<C64>> = Vec::with_capacity(n);
    let mut biorthonormal = true;
    for k in 0..n {
        let target = vals[k].conj();
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let d = (lvals[j] - target).norm();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        let psi = lvecs.column(best).to_owned();
        let overlap = inner(&psi, &right[k]);
        if overlap.norm() < 1e-12 {
            biorthonormal = false;
            left.push(psi);
        } else {
            // ⟨ψ/conj(d), φ⟩ = d/d = 1
            left.push(psi.mapv(|c| c / overlap.conj()));
        }
    }

    if biorthonormal {
        // Cross-overlaps should vanish; a failure here marks a nearly
        // defective matrix where the rescaled Gram is not invertible.
        'outer: for j in 0..n {
            for k in 0..n {
                let g = inner(&left[j], &right[k]);
                let expected = if j == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                if (g - expected).norm() > 1e-6 {
                    biorthonormal = false;
                    break 'outer;
                }
            }
        }
    }

    Ok(EigenSystem { eigenvalues: vals.to_vec(), right_vectors: right, left_vectors: left, biorthonormal })
}

/// Hermitian k×k Gram matrix of pairwise products `⟨f_i, f_j⟩` under `product`.
///
/// The result equals its own adjoint exactly: the lower triangle is the
/// conjugate mirror of the upper one and the diagonal is real by construction.
pub fn gram(vectors: &[Array1<C64>], product: &ScalarProduct) -> Result<Operator> {
    let k = vectors.len();
    if k == 0 {
        return Err(Error::NotSquare { rows: 0, cols: 0 });
    }
    let dim = vectors[0].len();
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
    }
    let mut mat = Array2::zeros((k, k));
    for i in 0..k {
        mat[[i, i]] = C64::new(product.inner(&vectors[i], &vectors[i]).re, 0.0);
        for j in (i + 1)..k {
            let g = product.inner(&vectors[i], &vectors[j]);
            mat[[i, j]] = g;
            mat[[j, i]] = g.conj();
        }
    }
    Operator::new(mat)
}

// Padé coefficients and order thresholds from Higham, "The scaling and
// squaring method for the matrix exponential revisited" (2005).
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

fn pade_coeffs(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
            2162160.0, 110880.0, 3960.0, 90.0, 1.0,
        ],
        13 => &[
            64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
            1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
            33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
        ],
        _ => unreachable!(),
    }
}

fn solve_pade(u: &Array2<C64>, v: &Array2<C64>) -> Result<Array2<C64>> {
    // (V - U) X = (V + U), solved column by column via one LU factorization.
    let lhs = v - u;
    let rhs = v + u;
    let f = lhs.factorize()?;
    let n = rhs.nrows();
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        let col = f.solve(&rhs.column(j).to_owned())?;
        out.column_mut(j).assign(&col);
    }
    Ok(out)
}

fn pade_low(a: &Array2<C64>, m: usize) -> Result<Array2<C64>> {
    let b = pade_coeffs(m);
    let n = a.nrows();
    let eye = Array2::<C64>::eye(n);
    let a2 = a.dot(a);
    // Powers a2^k for k = 0..=(m-1)/2
    let mut pows = vec![eye.clone()];
    for _ in 0..(m - 1) / 2 {
        let next = pows.last().unwrap().dot(&a2);
        pows.push(next);
    }
    let mut u_inner = Array2::<C64>::zeros((n, n));
    let mut v = Array2::<C64>::zeros((n, n));
    for (k, p) in pows.iter().enumerate() {
        u_inner = u_inner + p.mapv(|c| c * C64::new(b[2 * k + 1], 0.0));
        v = v + p.mapv(|c| c * C64::new(b[2 * k], 0.0));
    }
    let u = a.dot(&u_inner);
    solve_pade(&u, &v)
}

fn pade_13(a: &Array2<C64>) -> Result<Array2<C64>> {
    let b = pade_coeffs(13);
    let n = a.nrows();
    let eye = Array2::<C64>::eye(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let c = |x: f64| C64::new(x, 0.0);

    let u_hi = a6.dot(&(a6.mapv(|z| z * c(b[13])) + a4.mapv(|z| z * c(b[11])) + a2.mapv(|z| z * c(b[9]))));
    let u_lo = a6.mapv(|z| z * c(b[7])) + a4.mapv(|z| z * c(b[5])) + a2.mapv(|z| z * c(b[3])) + eye.mapv(|z| z * c(b[1]));
    let u = a.dot(&(u_hi + u_lo));

    let v_hi = a6.dot(&(a6.mapv(|z| z * c(b[12])) + a4.mapv(|z| z * c(b[10])) + a2.mapv(|z| z * c(b[8]))));
    let v = v_hi + a6.mapv(|z| z * c(b[6])) + a4.mapv(|z| z * c(b[4])) + a2.mapv(|z| z * c(b[2])) + eye.mapv(|z| z * c(b[0]));

    solve_pade(&u, &v)
}

/// Matrix exponential by scaling and squaring with Padé approximants.
///
/// The overflow guard rejects inputs whose spectral norm exceeds `cap`.
pub fn mat_exp_with_cap(x: &Operator, cap: f64) -> Result<Operator> {
    let norm2 = x.norm_2();
    if norm2 > cap {
        return Err(Error::Overflow { norm: norm2, cap });
    }
    let a = x.matrix();
    let norm1 = a.opnorm_one()?;
    for &(m, theta) in THETA.iter() {
        if norm1 <= theta {
            return Operator::new(pade_low(a, m)?);
        }
    }
    let s = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|c| c * C64::new((0.5f64).powi(s), 0.0));
    let mut e = pade_13(&scaled)?;
    for _ in 0..s {
        e = e.dot(&e);
    }
    Operator::new(e)
}

/// Matrix exponential with the default overflow cap.
pub fn mat_exp(x: &Operator) -> Result<Operator> {
    mat_exp_with_cap(x, DEFAULT_EXP_NORM_CAP)
}
