//! Pointwise algebra over the Minkowski bilinear form `η = diag(−1, 1, …, 1)`.
//!
//! The star of the module is the factorization map `𝓕`: any symmetric `G` with
//! exactly one negative eigenvalue, `|det G| > ε` and `|G|_op < 1/ε` admits an
//! invertible `F` with `Fᵀ η F = G`, namely `F = A Pᵀ` with `P` orthonormal
//! eigenvectors and `A = diag((−λ₀)^{1/2}, λ₁^{1/2}, …)`. Because eigenbases
//! jump under perturbation, the plain map is not continuous in `G`; the
//! *anchored* variant repairs this: close to a base point (within `2ε^d` in
//! operator norm) it reuses the base eigenbasis through Gram–Schmidt and only
//! re-extracts the single timelike eigenvector, which makes the factor
//! Lipschitz in `G` with an explicit constant. Far from the base point the
//! fresh factorization is used unchanged.
//!
//! Also here: the class certificate that gates the map, Minkowski-orthogonality
//! predicates, and rigid motions `x ↦ Qx + v` of flat spacetime.

use crate::error::{Error, Result};
use crate::linalg::{dot, minkowski, norm2, Mat};
use serde::Serialize;

pub use crate::linalg::{op_norm, sym_eigen, SymEigen};

/// Tolerance for the relative asymmetry accepted in "symmetric" input.
const SYM_TOL: f64 = 1e-12;

/// Certificate that a symmetric matrix has Lorentzian signature and sits
/// inside the `ε`-class: `|det G| > ε`, `|G|_op < 1/ε`, exactly one negative
/// eigenvalue. Built only by [`certify_lorentz`]; all downstream operations
/// take the certificate, so their preconditions hold by construction.
#[derive(Clone, Debug)]
pub struct LorentzMatrixCert {
    matrix: Mat,
    epsilon: f64,
    eigvals: Vec<f64>,
}

impl LorentzMatrixCert {
    /// The certified matrix (exactly symmetric).
    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// The class parameter the certificate was issued for.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Eigenvalues, ascending (`eigvals[0]` is the unique negative one).
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    /// Matrix side length.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Determinant, as the product of the certified eigenvalues.
    pub fn det(&self) -> f64 {
        self.eigvals.iter().product()
    }

    /// Operator norm, as the largest eigenvalue magnitude.
    pub fn op_norm(&self) -> f64 {
        self.eigvals
            .iter()
            .fold(0.0, |m, &l| f64::max(m, l.abs()))
    }
}

/// Check symmetry (up to `1e−12` relative), mirror the lower triangle, and run
/// the eigendecomposition.
fn eigen_of_symmetric_input(s: &Mat) -> Result<(Mat, SymEigen)> {
    if !s.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let asym = s.max_asymmetry();
    if asym > SYM_TOL * s.max_abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let sym = s.mirror_lower();
    let eig = sym_eigen(&sym)?;
    Ok((sym, eig))
}

/// Certify membership of a symmetric matrix in the `ε`-class of Lorentzian
/// Gram matrices: exactly one negative eigenvalue, `|det| > ε`, `|·|_op < 1/ε`.
///
/// # Errors
///
/// * `InvalidInput` — `ε ∉ (0, 1]`, or the matrix is not (numerically)
///   symmetric/finite/square;
/// * `WrongSignature` — the negative-eigenvalue count is not exactly one;
/// * `OutOfClass` — a class bound fails; `bound` names which one.
pub fn certify_lorentz(s: &Mat, epsilon: f64) -> Result<LorentzMatrixCert> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "class parameter must lie in (0, 1], got {epsilon}"
        )));
    }
    let (matrix, eig) = eigen_of_symmetric_input(s)?;
    let negatives = eig.values.iter().filter(|&&l| l < 0.0).count();
    if negatives != 1 || eig.values.iter().any(|&l| l == 0.0) {
        return Err(Error::WrongSignature { negatives });
    }
    let det: f64 = eig.values.iter().product();
    if det.abs() <= epsilon {
        return Err(Error::OutOfClass {
            bound: "determinant",
            detail: format!("|det| = {:.6e} must exceed ε = {epsilon:.6e}", det.abs()),
        });
    }
    let op: f64 = eig.values.iter().fold(0.0, |m, &l| f64::max(m, l.abs()));
    if op >= 1.0 / epsilon {
        return Err(Error::OutOfClass {
            bound: "operator_norm",
            detail: format!("|G|_op = {op:.6e} must stay below 1/ε = {:.6e}", 1.0 / epsilon),
        });
    }
    // Implied spectral floor: |λ| ≥ |det|/|G|^{d−1} > ε·ε^{d−1} = ε^d.
    debug_assert!(eig
        .values
        .iter()
        .all(|&l| l.abs() >= epsilon.powi(matrix.rows() as i32)));
    Ok(LorentzMatrixCert {
        matrix,
        epsilon,
        eigvals: eig.values,
    })
}

/// Certify with a class parameter inferred from the matrix's own spectrum:
/// `ε = ½·min(|det G|, 1/|G|_op, 1)`, the largest margin that keeps both
/// class bounds satisfied with a factor-of-two safety gap.
///
/// # Errors
///
/// Same failures as [`certify_lorentz`]; a singular matrix is reported as a
/// signature failure (it has a zero eigenvalue).
pub fn certify_lorentz_auto(s: &Mat) -> Result<LorentzMatrixCert> {
    let (_, eig) = eigen_of_symmetric_input(s)?;
    let det: f64 = eig.values.iter().product();
    let op = eig.values.iter().fold(0.0, |m, &l| f64::max(m, l.abs()));
    let epsilon = 0.5 * det.abs().min(1.0 / op).min(1.0);
    if !(epsilon > 0.0) {
        let negatives = eig.values.iter().filter(|&&l| l < 0.0).count();
        return Err(Error::WrongSignature { negatives });
    }
    certify_lorentz(s, epsilon)
}

/// A factorization `Fᵀ η F = G` anchored at `G`, carrying the eigenbasis the
/// anchored continuation reuses for nearby matrices.
#[derive(Clone, Debug)]
pub struct DecompAnchor {
    base_g: LorentzMatrixCert,
    base_f: Mat,
    lambda0: f64,
    p0: Vec<f64>,
    p: Mat,
}

impl DecompAnchor {
    /// The certificate the anchor was built from.
    pub fn base_g(&self) -> &LorentzMatrixCert {
        &self.base_g
    }

    /// The factor, `base_fᵀ η base_f = base_g` up to rounding.
    pub fn base_f(&self) -> &Mat {
        &self.base_f
    }

    /// The negative eigenvalue of the base matrix.
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Unit eigenvector of the negative eigenvalue.
    pub fn p0(&self) -> &[f64] {
        &self.p0
    }

    /// Full orthonormal eigenvector matrix of the base (columns, ascending).
    pub fn basis(&self) -> &Mat {
        &self.p
    }
}

/// Factor a certified matrix as `Fᵀ η F = G` with `F = A Pᵀ`,
/// `A = diag((−λ₀)^{1/2}, λ₁^{1/2}, …, λ_{d−1}^{1/2})`.
///
/// Deterministic: the eigenvector order and signs come from [`sym_eigen`].
/// The result also carries the data needed by
/// [`lorentz_decompose_anchored`].
pub fn lorentz_decompose(g: &LorentzMatrixCert) -> DecompAnchor {
    let eig = sym_eigen(&g.matrix).expect("certified matrices are symmetric and finite");
    let f = factor_from_eigen(&eig);
    debug_assert!({
        let eta = minkowski(g.dim());
        (&(&f.t() * &eta) * &f).max_abs_diff(&g.matrix) <= 1e-12 * g.op_norm().max(1.0)
    });
    DecompAnchor {
        lambda0: eig.values[0],
        p0: eig.vectors.col(0),
        p: eig.vectors.clone(),
        base_f: f,
        base_g: g.clone(),
    }
}

/// `F = A Pᵀ` from an eigendecomposition with exactly one negative eigenvalue.
fn factor_from_eigen(eig: &SymEigen) -> Mat {
    let d = eig.values.len();
    let mut roots = Vec::with_capacity(d);
    roots.push((-eig.values[0]).sqrt());
    for &l in &eig.values[1..] {
        roots.push(l.sqrt());
    }
    &Mat::diag(&roots) * &eig.vectors.t()
}

/// How many inverse-iteration refinements to run for the timelike eigenvector.
const INVERSE_ITERATIONS: usize = 3;
/// Gram–Schmidt residual below which the near-branch basis counts as broken.
const GS_FLOOR: f64 = 1e-6;

/// Evaluate the anchored factorization `𝓕` at `gt`, staying continuous (in
/// fact Lipschitz) around the anchor.
///
/// Branching: with `d` the dimension and `ε` the shared class parameter,
///
/// * `|G̃ − G|_op ≥ 2ε^d` — *far branch*: the fresh [`lorentz_decompose`]
///   factor of `G̃`;
/// * otherwise — *near branch*: extract the unit eigenvector `p̃₀` of the
///   negative eigenvalue by inverse iteration seeded with the anchor's `p₀`,
///   sign-fix `p̃₀·p₀ ≥ 0`, Gram–Schmidt the anchor basis `(p̃₀, p₁, …)` into
///   `Ṽ`, split `Ṽᵀ G̃ Ṽ = diag(λ̃₀, H̃)`, and return
///   `F̃ = diag((−λ̃₀)^{1/2}, H̃^{1/2}) Ṽᵀ`.
///
/// A bitwise-identical input returns `base_f` bitwise.
///
/// # Errors
///
/// * `EpsilonMismatch` — the two certificates carry different class
///   parameters;
/// * `NearBranchDegenerate` — Gram–Schmidt met a numerically dependent vector
///   (cannot happen while the branch threshold invariant holds; signals
///   round-off violated it).
pub fn lorentz_decompose_anchored(anchor: &DecompAnchor, gt: &LorentzMatrixCert) -> Result<Mat> {
    if gt.epsilon != anchor.base_g.epsilon {
        return Err(Error::EpsilonMismatch {
            anchor: anchor.base_g.epsilon,
            input: gt.epsilon,
        });
    }
    if gt.matrix == anchor.base_g.matrix {
        return Ok(anchor.base_f.clone());
    }
    let d = gt.dim();
    let diff = op_norm(&(&gt.matrix - &anchor.base_g.matrix));
    let threshold = 2.0 * gt.epsilon.powi(d as i32);
    if diff >= threshold {
        return Ok(lorentz_decompose(gt).base_f);
    }

    // --- near branch ---
    let p0_tilde = timelike_eigenvector(gt, &anchor.p0);

    // Gram–Schmidt on (p̃₀, p₁, …, p_{d−1}); p̃₀ is already unit.
    let mut v = Mat::zeros(d, d);
    v.set_col(0, &p0_tilde);
    for k in 1..d {
        let mut w = anchor.p.col(k);
        for j in 0..k {
            let proj = dot(&w, &v.col(j));
            let vj = v.col(j);
            for (wi, vi) in w.iter_mut().zip(&vj) {
                *wi -= proj * vi;
            }
        }
        let n = norm2(&w);
        if n < GS_FLOOR {
            return Err(Error::NearBranchDegenerate { norm: n });
        }
        for wi in w.iter_mut() {
            *wi /= n;
        }
        v.set_col(k, &w);
    }

    // Ṽᵀ G̃ Ṽ is block-diagonal in exact arithmetic because ṽ₀ is an
    // eigenvector and the rest are orthogonal to it.
    let m = &(&v.t() * &gt.matrix) * &v;
    let lambda0 = m[(0, 0)];
    if lambda0 >= 0.0 {
        return Err(Error::Numerical(format!(
            "timelike Rayleigh quotient came out nonnegative ({lambda0:.3e})"
        )));
    }
    let h = Mat::from_fn(d - 1, d - 1, |i, j| m[(i + 1, j + 1)]).mirror_lower();
    let h_eig = sym_eigen(&h)?;
    if h_eig.values.iter().any(|&mu| mu <= 0.0) {
        return Err(Error::Numerical(
            "spacelike block lost positive definiteness".into(),
        ));
    }
    let root_diag = Mat::diag(&h_eig.values.iter().map(|&mu| mu.sqrt()).collect::<Vec<_>>());
    let h_root = &(&h_eig.vectors * &root_diag) * &h_eig.vectors.t();

    let mut b = Mat::zeros(d, d);
    b[(0, 0)] = (-lambda0).sqrt();
    for i in 0..d - 1 {
        for j in 0..d - 1 {
            b[(i + 1, j + 1)] = h_root[(i, j)];
        }
    }
    Ok(&b * &v.t())
}

/// Unit eigenvector of the (unique, well-separated) negative eigenvalue of a
/// certified matrix, by inverse iteration seeded with `seed`. Falls back to
/// the direct eigendecomposition if the shifted solve degenerates. The sign is
/// fixed by `p̃₀ · seed ≥ 0`.
fn timelike_eigenvector(gt: &LorentzMatrixCert, seed: &[f64]) -> Vec<f64> {
    let d = gt.dim();
    // Shift just off the known eigenvalue so the solve stays nonsingular while
    // still amplifying the wanted direction overwhelmingly.
    let sigma = gt.eigvals[0] + 1e-13 * gt.op_norm().max(1.0);
    let mut shifted = gt.matrix.clone();
    for i in 0..d {
        shifted[(i, i)] -= sigma;
    }
    let mut z = seed.to_vec();
    let mut ok = true;
    for _ in 0..INVERSE_ITERATIONS {
        match shifted.solve(&z) {
            Some(w) => {
                let n = norm2(&w);
                if !n.is_finite() || n == 0.0 {
                    ok = false;
                    break;
                }
                z = w.into_iter().map(|x| x / n).collect();
            }
            None => {
                ok = false;
                break;
            }
        }
    }
    if !ok {
        // Deterministic fallback: the Jacobi eigenvector of the lowest
        // eigenvalue.
        let eig = sym_eigen(&gt.matrix).expect("certified matrices are symmetric");
        z = eig.vectors.col(0);
    }
    if dot(&z, seed) < 0.0 {
        z.iter_mut().for_each(|x| *x = -*x);
    }
    z
}

/// Test whether `q` preserves the Minkowski form, and whether it is proper.
///
/// `orthogonal` holds when the largest entry of `qᵀηq − η` is at most `tol`;
/// `proper` additionally requires `|det q − 1| ≤ tol`.
pub fn is_mink_orthogonal(q: &Mat, tol: f64) -> (bool, bool) {
    if !q.is_square() || !q.is_finite() {
        return (false, false);
    }
    let eta = minkowski(q.rows());
    let defect = (&(&q.t() * &eta) * &q).max_abs_diff(&eta);
    let orthogonal = defect <= tol;
    let proper = orthogonal && (q.det() - 1.0).abs() <= tol;
    (orthogonal, proper)
}

/// The tracked Lipschitz bound `C(n)·ε^{−(3n+5)/2}` for the anchored
/// factorization map on the `ε`-class in `n+1` dimensions.
///
/// `C(n) = 2·√((4^{n+1} − 1)/6) + 1` accumulates the constants of the
/// construction: the spectral-gap factor from re-extracting the timelike
/// eigenvector, the column-summed `2^{k−1/2}` cascade of Gram–Schmidt error
/// amplification, and the derivative bound of the matrix square root on the
/// certified spectrum. It is an upper bound, not claimed tight.
pub fn lipschitz_constant(epsilon: f64, n: usize) -> f64 {
    assert!(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
    assert!(n >= 1, "spatial dimension must be at least 1");
    let c_n = 2.0 * ((4.0f64.powi(n as i32 + 1) - 1.0) / 6.0).sqrt() + 1.0;
    c_n * epsilon.powf(-(3.0 * n as f64 + 5.0) / 2.0)
}

/// A rigid motion `x ↦ Qx + v` of Minkowski space.
#[derive(Clone, Debug, Serialize)]
pub struct MinkIsometry {
    /// Linear part; preserves `η`.
    q: Mat,
    /// Translation part.
    v: Vec<f64>,
    /// Whether `det Q = 1`.
    proper: bool,
}

/// Validation tolerance for the isometry invariants.
const ISOMETRY_TOL: f64 = 1e-10;

impl MinkIsometry {
    /// Build from a linear part and translation, validating that `q`
    /// preserves the Minkowski form within `1e−10`.
    ///
    /// # Errors
    ///
    /// `InvalidInput` when `q` is not Minkowski-orthogonal or the sizes
    /// disagree.
    pub fn new(q: Mat, v: Vec<f64>) -> Result<Self> {
        if q.rows() != v.len() {
            return Err(Error::InvalidInput(format!(
                "linear part is {}x{} but the translation has length {}",
                q.rows(),
                q.cols(),
                v.len()
            )));
        }
        let (orthogonal, proper) = is_mink_orthogonal(&q, ISOMETRY_TOL);
        if !orthogonal {
            return Err(Error::InvalidInput(
                "linear part does not preserve the Minkowski form".into(),
            ));
        }
        Ok(MinkIsometry { q, v, proper })
    }

    /// Identity motion.
    pub fn identity(d: usize) -> Self {
        MinkIsometry {
            q: Mat::identity(d),
            v: vec![0.0; d],
            proper: true,
        }
    }

    /// Linear part.
    pub fn q(&self) -> &Mat {
        &self.q
    }

    /// Translation part.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Whether the linear part has determinant `+1`.
    pub fn proper(&self) -> bool {
        self.proper
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Apply to a point.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.q.mul_vec(x);
        for (yi, vi) in y.iter_mut().zip(&self.v) {
            *yi += vi;
        }
        y
    }

    /// The composite motion `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &MinkIsometry) -> MinkIsometry {
        let q = &self.q * &other.q;
        let v = self.apply(&other.v);
        MinkIsometry {
            q,
            v,
            proper: self.proper == other.proper,
        }
    }

    /// The inverse motion. Uses `Q⁻¹ = η Qᵀ η`, exact for form-preserving
    /// linear parts.
    pub fn inverse(&self) -> MinkIsometry {
        let eta = minkowski(self.dim());
        let q_inv = &(&eta * &self.q.t()) * &eta;
        let mut v = q_inv.mul_vec(&self.v);
        v.iter_mut().for_each(|x| *x = -*x);
        MinkIsometry {
            q: q_inv,
            v,
            proper: self.proper,
        }
    }
}
