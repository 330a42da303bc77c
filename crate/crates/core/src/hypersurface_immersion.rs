//! Immersion of hypersurface data into Minkowski space.
//!
//! Two pipelines share one integration engine:
//!
//! * **Rigged operators** `(Γ, K, L, M)` on an `n`-dimensional chart describe
//!   how a would-be moving frame `F = (∂_1 f, …, ∂_n f, ℓ)` — `n` tangent
//!   vectors plus a transversal *rigging* `ℓ` — twists from point to point:
//!
//!   ```text
//!   ∂_i ∂_j f = Γ^k_{ij} ∂_k f − K_{ij} ℓ
//!   ∂_i ℓ     = L^k_i  ∂_k f − M_i  ℓ
//!   ```
//!
//!   Packaged as `∂_i F = F A_i` ([`assemble_rigging_coeffs`]), the system is
//!   integrable exactly when the generalized Gauss–Codazzi equations hold
//!   ([`generalized_gc_residual`]); the two formulations agree identically,
//!   which [`gc_pfaff_equivalence_gap`] checks field-by-field.
//!
//! * **Fundamental forms** `(g, K)` of a nowhere-null hypersurface with unit
//!   normal of squared length `λ = ±1` specialize to rigged operators via the
//!   Levi-Civita connection of `g`, the Weingarten operator `L = g^{-1}K`,
//!   and `M = 0` ([`specialize_from_forms`]); the initial frame comes from
//!   the canonical Lorentz factorization of `diag(g(x⋆), λ)` so the rigging
//!   is the unit normal ([`immerse_hypersurface_forms`]).
//!
//! Residual reports ([`classical_gc_residual`], [`fundamental_form_defect`],
//! [`frame_system_defect`]) quantify both directions: compatible data
//! reconstruct their forms at second order in the grid spacing; incompatible
//! data integrate fine and then visibly fail the reconstruction checks.

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::grid_calculus::{
    check_metric, christoffel, inverse_metric, partial_derivative, riemann_from_christoffel,
};
use crate::linalg::{minkowski, Mat};
use crate::lorentz_algebra::{certify_lorentz, lorentz_decompose};
use crate::pfaff_solver::{
    pfaff_compatibility_fields, pfaff_integrate, poincare_integrate, PfaffCoeffs, SweepOrder,
};
use crate::report::{ResidualBuilder, ResidualReport};

/// Relative tolerance for symmetry validation of operator inputs.
const SYM_TOL: f64 = 1e-12;

/// Connection, second-form, Weingarten and torsion data of a rigged
/// hypersurface, validated and stored with exact index symmetries.
#[derive(Clone, Debug)]
pub struct RiggedOperators {
    chart: GridChart,
    /// `Γ^k_{ij}`, component order `(k, i, j)`, exactly symmetric in `(i, j)`.
    gamma: TensorField,
    /// `K_{ij}`, exactly symmetric.
    k: TensorField,
    /// `L^k_j`, component order `(k, j)` — row is the upper index.
    l: TensorField,
    /// `M_i`.
    m: TensorField,
}

impl RiggedOperators {
    /// Validate shapes, charts and symmetries, then store. Symmetry may be
    /// off by rounding (up to `1e−12` relative); inputs are symmetrized so
    /// the stored fields satisfy `Γ^k_{ij} = Γ^k_{ji}` and `K_{ij} = K_{ji}`
    /// bitwise.
    ///
    /// # Errors
    ///
    /// `ChartMismatch`, `ShapeMismatch`, or `InvalidInput` (asymmetry beyond
    /// rounding, non-finite entries).
    pub fn new(
        gamma: TensorField,
        k: TensorField,
        l: TensorField,
        m: TensorField,
    ) -> Result<Self> {
        let chart = gamma.chart().clone();
        let n = chart.dim();
        for (f, shape) in [
            (&gamma, vec![n, n, n]),
            (&k, vec![n, n]),
            (&l, vec![n, n]),
            (&m, vec![n]),
        ] {
            chart.check_same(f.chart())?;
            if f.comp_shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch {
                    expected: shape,
                    got: f.comp_shape().to_vec(),
                });
            }
            f.check_finite()?;
        }
        let gamma = symmetrized_in(gamma, 1, 2, "connection coefficients")?;
        let k = symmetrized_in(k, 0, 1, "second-form coefficients")?;
        Ok(RiggedOperators { chart, gamma, k, l, m })
    }

    /// The hypersurface chart (dimension `n`).
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    /// Hypersurface dimension `n`.
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `Γ^k_{ij}` with component order `(k, i, j)`.
    pub fn gamma(&self) -> &TensorField {
        &self.gamma
    }

    /// `K_{ij}`.
    pub fn k(&self) -> &TensorField {
        &self.k
    }

    /// `L^k_j` with component order `(k, j)`.
    pub fn l(&self) -> &TensorField {
        &self.l
    }

    /// `M_i`.
    pub fn m(&self) -> &TensorField {
        &self.m
    }
}

/// Check a field is symmetric in two component axes up to rounding, then
/// return it exactly symmetrized.
fn symmetrized_in(
    field: TensorField,
    ax1: usize,
    ax2: usize,
    what: &str,
) -> Result<TensorField> {
    let scale = field.max_abs().max(1.0);
    let comps = field.comp_count();
    let mut out = field.clone();
    for lin in 0..field.chart().point_count() {
        for c in 0..comps {
            let mut multi = field.comp_multi(c);
            multi.swap(ax1, ax2);
            let c_swapped = field.comp_lin(&multi);
            let (a, b) = (field.get(lin, c), field.get(lin, c_swapped));
            if (a - b).abs() > SYM_TOL * scale {
                return Err(Error::InvalidInput(format!(
                    "{what} must be index-symmetric: mismatch {:.3e} at grid point {:?}",
                    (a - b).abs(),
                    field.chart().multi_index(lin)
                )));
            }
            out.set(lin, c, 0.5 * (a + b));
        }
    }
    Ok(out)
}

/// First and second fundamental forms of a nowhere-null hypersurface.
///
/// `lambda` is the squared Minkowski length of the unit normal: `−1` for a
/// spacelike hypersurface (`g` positive definite), `+1` for a timelike one
/// (`g` of index one). The constructor rejects grids where the signature of
/// `g` does not match `lambda` everywhere.
#[derive(Clone, Debug)]
pub struct FundamentalForms {
    chart: GridChart,
    g: TensorField,
    k: TensorField,
    lambda: f64,
}

impl FundamentalForms {
    /// Validate and store. Both forms are symmetrized exactly (inputs may be
    /// off by rounding); the signature of `g` is checked pointwise against
    /// `lambda`.
    ///
    /// # Errors
    ///
    /// `InvalidInput` for bad `lambda`, shapes or asymmetry;
    /// `MixedSignature` when some grid point's `g` has the wrong index.
    pub fn new(g: TensorField, k: TensorField, lambda: f64) -> Result<Self> {
        if lambda != 1.0 && lambda != -1.0 {
            return Err(Error::InvalidInput(format!(
                "lambda must be +1 or -1, got {lambda}"
            )));
        }
        let chart = g.chart().clone();
        check_metric(&g)?;
        chart.check_same(k.chart())?;
        let n = chart.dim();
        if k.comp_shape() != [n, n] {
            return Err(Error::ShapeMismatch {
                expected: vec![n, n],
                got: k.comp_shape().to_vec(),
            });
        }
        k.check_finite()?;
        let g = symmetrized_in(g, 0, 1, "first fundamental form")?;
        let k = symmetrized_in(k, 0, 1, "second fundamental form")?;

        let want_negatives = if lambda < 0.0 { 0 } else { 1 };
        for lin in 0..chart.point_count() {
            let eig = crate::linalg::sym_eigen(&g.mat_at(lin))?;
            let negatives = eig.values.iter().filter(|&&v| v < 0.0).count();
            if negatives != want_negatives || eig.values.iter().any(|&v| v == 0.0) {
                return Err(Error::MixedSignature {
                    point: chart.multi_index(lin),
                });
            }
        }
        Ok(FundamentalForms { chart, g, k, lambda })
    }

    /// The hypersurface chart.
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    /// The induced metric `g`.
    pub fn g(&self) -> &TensorField {
        &self.g
    }

    /// The second fundamental form `K`.
    pub fn k(&self) -> &TensorField {
        &self.k
    }

    /// Squared length of the unit normal (`±1`).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A hypersurface immersion with its rigging and moving frame.
#[derive(Clone, Debug)]
pub struct RiggedImmersionResult {
    f: TensorField,
    rigging: TensorField,
    frame: TensorField,
    base_point: Vec<usize>,
    base_frame: Mat,
}

impl RiggedImmersionResult {
    /// The immersion samples (`[n+1]`-vector per grid point).
    pub fn f(&self) -> &TensorField {
        &self.f
    }

    /// The transversal rigging field (`[n+1]` per grid point).
    pub fn rigging(&self) -> &TensorField {
        &self.rigging
    }

    /// The full moving frame (`[n+1, n+1]`; columns `∂_1 f … ∂_n f, ℓ`).
    pub fn frame(&self) -> &TensorField {
        &self.frame
    }

    /// The grid point where the gauge is pinned.
    pub fn base_point(&self) -> &[usize] {
        &self.base_point
    }

    /// The frame at the base point.
    pub fn base_frame(&self) -> &Mat {
        &self.base_frame
    }

    /// The chart everything lives on.
    pub fn chart(&self) -> &GridChart {
        self.f.chart()
    }

    /// Smallest `det F` over the grid (sign included).
    pub fn min_frame_det(&self) -> f64 {
        (0..self.chart().point_count())
            .map(|lin| self.frame.mat_at(lin).det())
            .fold(f64::INFINITY, f64::min)
    }

    /// Push the result through an affine map `y ↦ Q y + v` with invertible
    /// `Q`: the immersion is translated, the rigging and frame only rotated
    /// and sheared (directions feel no translation).
    pub fn transform_affine(&self, q: &Mat, v: &[f64]) -> RiggedImmersionResult {
        let d = self.base_frame.rows();
        assert_eq!(q.rows(), d, "affine map dimension mismatch");
        assert_eq!(v.len(), d);
        let chart = self.chart().clone();
        let mut f = TensorField::zeros(chart.clone(), &[d]);
        let mut rigging = TensorField::zeros(chart.clone(), &[d]);
        let mut frame = TensorField::zeros(chart, &[d, d]);
        for lin in 0..self.chart().point_count() {
            let mut y = q.mul_vec(self.f.comps_at(lin));
            for (yi, vi) in y.iter_mut().zip(v) {
                *yi += vi;
            }
            f.set_comps_at(lin, &y);
            rigging.set_comps_at(lin, &q.mul_vec(self.rigging.comps_at(lin)));
            frame.set_mat_at(lin, &(q * &self.frame.mat_at(lin)));
        }
        RiggedImmersionResult {
            f,
            rigging,
            frame,
            base_point: self.base_point.clone(),
            base_frame: q * &self.base_frame,
        }
    }
}

/// Pack rigged operators into the frame-system coefficients: one
/// `[n+1, n+1]` field `A_i` per axis with block layout
///
/// ```text
///        ⎡ Γ^k_{ih}   L^k_i ⎤   (row k < n: tangent slots)
/// A_i =  ⎣ −K_{ih}    −M_i  ⎦   (last row: rigging slot)
/// ```
///
/// so that the moving frame satisfies `∂_i F = F A_i`.
pub fn assemble_rigging_coeffs(ops: &RiggedOperators) -> PfaffCoeffs {
    let chart = ops.chart().clone();
    let n = chart.dim();
    let d = n + 1;
    let a: Vec<TensorField> = (0..n)
        .map(|i| {
            let mut f = TensorField::zeros(chart.clone(), &[d, d]);
            for lin in 0..chart.point_count() {
                for kk in 0..n {
                    for h in 0..n {
                        f.set(lin, kk * d + h, ops.gamma.get(lin, (kk * n + i) * n + h));
                    }
                    f.set(lin, kk * d + n, ops.l.get(lin, kk * n + i));
                }
                for h in 0..n {
                    f.set(lin, n * d + h, -ops.k.get(lin, i * n + h));
                }
                f.set(lin, n * d + n, -ops.m.get(lin, i));
            }
            f
        })
        .collect();
    PfaffCoeffs::from_a(chart, a).expect("assembled blocks always have consistent shapes")
}

/// The four generalized Gauss–Codazzi residual families, one labelled field
/// per family and ordered axis pair `i < j`:
///
/// ```text
/// gauss[i,j][k,h]     = R^k_{hij} + K_{ih} L^k_j − K_{jh} L^k_i
/// codazzi_k[i,j][h]   = ∇_i K_{jh} − ∇_j K_{ih} − K_{jh} M_i + K_{ih} M_j
/// codazzi_l[i,j][k]   = ∇_i L^k_j − ∇_j L^k_i − L^k_i M_j + L^k_j M_i
/// codazzi_m[i,j]      = ∇_i M_j − ∇_j M_i − K_{jh} L^h_i + K_{ih} L^h_j
/// ```
///
/// with the covariant derivatives expanded as
///
/// ```text
/// ∇_i K_{jh} = ∂_i K_{jh} − Γ^m_{ij} K_{mh} − Γ^m_{ih} K_{jm}
/// ∇_i L^k_j  = ∂_i L^k_j + Γ^k_{im} L^m_j − Γ^m_{ij} L^k_m
/// ∇_i M_j    = ∂_i M_j − Γ^m_{ij} M_m
/// ```
///
/// and `R^k_{hij}` the curvature of `Γ`. These are exactly the compatibility
/// relations of the assembled frame system, block by block (see
/// [`gc_pfaff_equivalence_gap`]).
///
/// # Errors
///
/// Propagates finite-difference failures.
pub fn generalized_gc_fields(ops: &RiggedOperators) -> Result<Vec<(String, TensorField)>> {
    let chart = ops.chart();
    let n = chart.dim();
    let npts = chart.point_count();
    let riem = riemann_from_christoffel(&ops.gamma, n)?;
    let dk: Vec<TensorField> = (0..n)
        .map(|i| partial_derivative(&ops.k, i))
        .collect::<Result<_>>()?;
    let dl: Vec<TensorField> = (0..n)
        .map(|i| partial_derivative(&ops.l, i))
        .collect::<Result<_>>()?;
    let dm: Vec<TensorField> = (0..n)
        .map(|i| partial_derivative(&ops.m, i))
        .collect::<Result<_>>()?;

    let ga = |lin: usize, k: usize, i: usize, j: usize| ops.gamma.get(lin, (k * n + i) * n + j);
    let kk = |lin: usize, i: usize, j: usize| ops.k.get(lin, i * n + j);
    let ll = |lin: usize, k: usize, j: usize| ops.l.get(lin, k * n + j);

    // ∇_i K_{jh} = ∂_i K_{jh} − Γ^m_{ij} K_{mh} − Γ^m_{ih} K_{jm}
    let cov_k = |lin: usize, i: usize, j: usize, h: usize| {
        let mut v = dk[i].get(lin, j * n + h);
        for m in 0..n {
            v -= ga(lin, m, i, j) * kk(lin, m, h);
            v -= ga(lin, m, i, h) * kk(lin, j, m);
        }
        v
    };
    // ∇_i L^k_j = ∂_i L^k_j + Γ^k_{im} L^m_j − Γ^m_{ij} L^k_m
    let cov_l = |lin: usize, i: usize, k: usize, j: usize| {
        let mut v = dl[i].get(lin, k * n + j);
        for m in 0..n {
            v += ga(lin, k, i, m) * ll(lin, m, j);
            v -= ga(lin, m, i, j) * ll(lin, k, m);
        }
        v
    };
    // ∇_i M_j = ∂_i M_j − Γ^m_{ij} M_m
    let cov_m = |lin: usize, i: usize, j: usize| {
        let mut v = dm[i].get(lin, j);
        for m in 0..n {
            v -= ga(lin, m, i, j) * ops.m.get(lin, m);
        }
        v
    };

    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut gauss = TensorField::zeros(chart.clone(), &[n, n]);
            let mut ck = TensorField::zeros(chart.clone(), &[n]);
            let mut cl = TensorField::zeros(chart.clone(), &[n]);
            let mut cm = TensorField::zeros(chart.clone(), &[1]);
            for lin in 0..npts {
                for k in 0..n {
                    for h in 0..n {
                        let r = riem.get(lin, ((k * n + h) * n + i) * n + j);
                        gauss.set(
                            lin,
                            k * n + h,
                            r + kk(lin, i, h) * ll(lin, k, j) - kk(lin, j, h) * ll(lin, k, i),
                        );
                    }
                }
                for h in 0..n {
                    ck.set(
                        lin,
                        h,
                        cov_k(lin, i, j, h) - cov_k(lin, j, i, h)
                            - kk(lin, j, h) * ops.m.get(lin, i)
                            + kk(lin, i, h) * ops.m.get(lin, j),
                    );
                }
                for k in 0..n {
                    cl.set(
                        lin,
                        k,
                        cov_l(lin, i, k, j) - cov_l(lin, j, k, i)
                            - ll(lin, k, i) * ops.m.get(lin, j)
                            + ll(lin, k, j) * ops.m.get(lin, i),
                    );
                }
                let mut v = cov_m(lin, i, j) - cov_m(lin, j, i);
                for h in 0..n {
                    v += -kk(lin, j, h) * ll(lin, h, i) + kk(lin, i, h) * ll(lin, h, j);
                }
                cm.set(lin, 0, v);
            }
            out.push((format!("gauss[{i},{j}]"), gauss));
            out.push((format!("codazzi_k[{i},{j}]"), ck));
            out.push((format!("codazzi_l[{i},{j}]"), cl));
            out.push((format!("codazzi_m[{i},{j}]"), cm));
        }
    }
    Ok(out)
}

/// Norms of the generalized Gauss–Codazzi residuals (see
/// [`generalized_gc_fields`] for the formulas), labelled per family and
/// axis pair.
///
/// # Errors
///
/// Propagates; rejects `p < 1`.
pub fn generalized_gc_residual(ops: &RiggedOperators, p: f64) -> Result<ResidualReport> {
    let fields = generalized_gc_fields(ops)?;
    let mut b = ResidualBuilder::new(ops.chart(), p)?;
    for (label, field) in &fields {
        b.add_field(label.clone(), field)?;
    }
    Ok(b.finish())
}

/// Largest pointwise difference between the generalized Gauss–Codazzi fields
/// and the compatibility-relation fields of the assembled frame system,
/// after the block mapping
///
/// ```text
/// res(i,j) = ⎡  gauss[i,j]     +codazzi_l[i,j] ⎤
///            ⎣ −codazzi_k[i,j] −codazzi_m[i,j] ⎦
/// ```
///
/// The two are the same equations written once in index form and once in
/// matrix form, so the gap is pure round-off.
///
/// # Errors
///
/// Propagates from either evaluation path.
pub fn gc_pfaff_equivalence_gap(ops: &RiggedOperators) -> Result<f64> {
    let chart = ops.chart();
    let n = chart.dim();
    let d = n + 1;
    let gc = generalized_gc_fields(ops)?;
    let pf = pfaff_compatibility_fields(&assemble_rigging_coeffs(ops))?;
    let find = |fields: &[(String, TensorField)], label: &str| -> TensorField {
        fields
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, f)| f.clone())
            .expect("both evaluations emit every axis pair")
    };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let res = find(&pf, &format!("A[{i},{j}]"));
            let gauss = find(&gc, &format!("gauss[{i},{j}]"));
            let ck = find(&gc, &format!("codazzi_k[{i},{j}]"));
            let cl = find(&gc, &format!("codazzi_l[{i},{j}]"));
            let cm = find(&gc, &format!("codazzi_m[{i},{j}]"));
            for lin in 0..chart.point_count() {
                for k in 0..n {
                    for h in 0..n {
                        worst = worst.max(
                            (gauss.get(lin, k * n + h) - res.get(lin, k * d + h)).abs(),
                        );
                    }
                    worst = worst.max((cl.get(lin, k) - res.get(lin, k * d + n)).abs());
                }
                for h in 0..n {
                    worst = worst.max((-ck.get(lin, h) - res.get(lin, n * d + h)).abs());
                }
                worst = worst.max((-cm.get(lin, 0) - res.get(lin, n * d + n)).abs());
            }
        }
    }
    Ok(worst)
}

/// Integrate the frame system of rigged operators from a caller-supplied
/// invertible initial frame, then the immersion from the tangent columns.
///
/// Gauge: `f(x_star) = 0`, `F(x_star) = f_star` bitwise. The rigging is the
/// last frame column. No compatibility check is performed — run
/// [`generalized_gc_residual`] or [`frame_system_defect`] to decide whether
/// the output reconstructs the operators.
///
/// # Errors
///
/// `SingularFstar` for a non-invertible initial frame; `SingularFrameAt`
/// when the integrated frame determinant vanishes or changes sign;
/// propagated integration errors.
pub fn immerse_hypersurface_rigged(
    ops: &RiggedOperators,
    x_star: &[usize],
    f_star: &Mat,
) -> Result<RiggedImmersionResult> {
    let chart = ops.chart().clone();
    let n = chart.dim();
    let d = n + 1;
    if f_star.rows() != d || f_star.cols() != d || !f_star.is_finite() {
        return Err(Error::InvalidInput(format!(
            "initial frame must be a finite {d}x{d} matrix"
        )));
    }
    let base_det = f_star.det();
    if base_det == 0.0 || !base_det.is_finite() {
        return Err(Error::SingularFstar { det: base_det });
    }
    if x_star.len() != n || x_star.iter().zip(chart.shape()).any(|(&i, s)| i >= s) {
        rerr(format!("base point {x_star:?} lies outside the chart"))?;
    }

    let coeffs = assemble_rigging_coeffs(ops);
    let frame = pfaff_integrate(&coeffs, x_star, f_star, &SweepOrder::natural(n))?;
    for lin in 0..chart.point_count() {
        let det = frame.mat_at(lin).det();
        if !(det * base_det > 0.0) {
            return Err(Error::SingularFrameAt {
                point: chart.multi_index(lin),
                det,
            });
        }
    }

    // Tangent columns drive the gradient system; the last column is the
    // rigging and is carried along as data.
    let mut tangent = TensorField::zeros(chart.clone(), &[d, n]);
    let mut rigging = TensorField::zeros(chart.clone(), &[d]);
    for lin in 0..chart.point_count() {
        for a in 0..d {
            for i in 0..n {
                tangent.set(lin, a * n + i, frame.get(lin, a * d + i));
            }
            rigging.set(lin, a, frame.get(lin, a * d + n));
        }
    }
    let f = poincare_integrate(&tangent, x_star, &vec![0.0; d])?;

    Ok(RiggedImmersionResult {
        f,
        rigging,
        frame,
        base_point: x_star.to_vec(),
        base_frame: f_star.clone(),
    })
}

fn rerr(msg: String) -> Result<()> {
    Err(Error::InvalidInput(msg))
}

/// Specialize fundamental forms to rigged operators: `Γ` is the Levi-Civita
/// connection of `g`, the Weingarten operator is `L^k_i = g^{kh} K_{hi}`,
/// the rigging (a unit normal) never tilts into itself (`M ≡ 0`), and the
/// frame-system second-form slot carries `λ K` — the sign `λ` accounts for
/// raising the normal with the ambient form instead of the induced one.
///
/// # Errors
///
/// `SingularMetricAt` when `g` is numerically degenerate somewhere.
pub fn specialize_from_forms(forms: &FundamentalForms) -> Result<RiggedOperators> {
    let chart = forms.chart().clone();
    let n = chart.dim();
    let gamma = christoffel(&forms.g)?;
    let ginv = inverse_metric(&forms.g)?;
    let mut l = TensorField::zeros(chart.clone(), &[n, n]);
    let mut k_rig = TensorField::zeros(chart.clone(), &[n, n]);
    for lin in 0..chart.point_count() {
        for kk in 0..n {
            for i in 0..n {
                let mut v = 0.0;
                for h in 0..n {
                    v += ginv.get(lin, kk * n + h) * forms.k.get(lin, h * n + i);
                }
                l.set(lin, kk * n + i, v);
                k_rig.set(lin, kk * n + i, forms.lambda * forms.k.get(lin, kk * n + i));
            }
        }
    }
    let m = TensorField::zeros(chart, &[n]);
    RiggedOperators::new(gamma, k_rig, l, m)
}

/// Classical Gauss–Codazzi residuals of fundamental forms, per ordered axis
/// pair `i < j`:
///
/// ```text
/// gauss[i,j][k,h] = R^k_{hij} + λ (K_{ih} K^k_j − K_{jh} K^k_i),  K^k_j = g^{kh} K_{hj}
/// codazzi[i,j][h] = ∇_i K_{jh} − ∇_j K_{ih}
/// ```
///
/// where `R` and `∇` come from the Levi-Civita connection of `g` and
/// `λ = ±1` is the normal's squared length. Both vanish exactly when the
/// forms are realized by a hypersurface with unit normal of that causal
/// type.
///
/// # Errors
///
/// Propagates metric inversion and derivative failures; rejects `p < 1`.
pub fn classical_gc_residual(forms: &FundamentalForms, p: f64) -> Result<ResidualReport> {
    let chart = forms.chart();
    let n = chart.dim();
    let gamma = christoffel(&forms.g)?;
    let riem = riemann_from_christoffel(&gamma, n)?;
    let ginv = inverse_metric(&forms.g)?;
    let dk: Vec<TensorField> = (0..n)
        .map(|i| partial_derivative(&forms.k, i))
        .collect::<Result<_>>()?;

    let ga = |lin: usize, k: usize, i: usize, j: usize| gamma.get(lin, (k * n + i) * n + j);
    let kk = |lin: usize, i: usize, j: usize| forms.k.get(lin, i * n + j);
    // K with the first index raised: K^k_j = g^{kh} K_{hj}.
    let kmix = |lin: usize, k: usize, j: usize| {
        (0..n)
            .map(|h| ginv.get(lin, k * n + h) * kk(lin, h, j))
            .sum::<f64>()
    };
    // ∇_i K_{jh} = ∂_i K_{jh} − Γ^m_{ij} K_{mh} − Γ^m_{ih} K_{jm}
    let cov_k = |lin: usize, i: usize, j: usize, h: usize| {
        let mut v = dk[i].get(lin, j * n + h);
        for m in 0..n {
            v -= ga(lin, m, i, j) * kk(lin, m, h);
            v -= ga(lin, m, i, h) * kk(lin, j, m);
        }
        v
    };

    let mut builder = ResidualBuilder::new(chart, p)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut gauss = TensorField::zeros(chart.clone(), &[n, n]);
            let mut codazzi = TensorField::zeros(chart.clone(), &[n]);
            for lin in 0..chart.point_count() {
                for k in 0..n {
                    for h in 0..n {
                        let r = riem.get(lin, ((k * n + h) * n + i) * n + j);
                        gauss.set(
                            lin,
                            k * n + h,
                            r + forms.lambda
                                * (kk(lin, i, h) * kmix(lin, k, j)
                                    - kk(lin, j, h) * kmix(lin, k, i)),
                        );
                    }
                }
                for h in 0..n {
                    codazzi.set(lin, h, cov_k(lin, i, j, h) - cov_k(lin, j, i, h));
                }
            }
            builder.add_field(format!("gauss[{i},{j}]"), &gauss)?;
            builder.add_field(format!("codazzi[{i},{j}]"), &codazzi)?;
        }
    }
    Ok(builder.finish())
}

/// Immerse a nowhere-null hypersurface from its fundamental forms.
///
/// The initial frame is the canonical Lorentz factor of the block matrix
/// `diag(g(x⋆), λ)`, sign-fixed so `det F⋆ > 0` (negating the whole factor
/// in odd ambient dimension, reflecting the last spatial output axis in even
/// — both preserve the factor identity). With that choice the last frame
/// column is a unit normal, so the rigging of the result is the classical
/// normal field and [`fundamental_form_defect`] measures the reconstruction
/// of `(g, K)` themselves.
///
/// # Errors
///
/// `NotLorentzBlock` when `diag(g(x⋆), λ)` fails certification at `epsilon`;
/// otherwise as [`immerse_hypersurface_rigged`].
pub fn immerse_hypersurface_forms(
    forms: &FundamentalForms,
    x_star: &[usize],
    epsilon: f64,
) -> Result<RiggedImmersionResult> {
    let chart = forms.chart();
    let n = chart.dim();
    let d = n + 1;
    if x_star.len() != n || x_star.iter().zip(chart.shape()).any(|(&i, s)| i >= s) {
        rerr(format!("base point {x_star:?} lies outside the chart"))?;
    }
    let ops = specialize_from_forms(forms)?;

    let base_lin = chart.lin_index(x_star);
    let g_star = forms.g.mat_at(base_lin);
    let mut block = Mat::zeros(d, d);
    for i in 0..n {
        for j in 0..n {
            block[(i, j)] = g_star[(i, j)];
        }
    }
    block[(n, n)] = forms.lambda;
    let cert = certify_lorentz(&block, epsilon).map_err(|e| Error::NotLorentzBlock {
        source: Box::new(e),
    })?;
    let f_star = orient_positive(lorentz_decompose(&cert).base_f().clone());

    immerse_hypersurface_rigged(&ops, x_star, &f_star)
}

/// Flip a frame to positive determinant without disturbing its Gram matrix:
/// negate the whole matrix in odd dimension, otherwise negate the last row
/// (a reflection along one spatial axis of the ambient space).
pub(crate) fn orient_positive(mut f: Mat) -> Mat {
    let d = f.rows();
    if f.det() < 0.0 {
        if d % 2 == 1 {
            f = f.scale(-1.0);
        } else {
            for j in 0..d {
                f[(d - 1, j)] = -f[(d - 1, j)];
            }
        }
    }
    f
}

/// Reconstruction defects of an immersion against its fundamental forms, all
/// recomputed from the output fields by finite differences:
///
/// * `first_form` — `(df)ᵀ η (df) − g`;
/// * `second_form` — `(df)ᵀ η (∂_i ℓ) − K` column by column;
/// * `rigging_unit` — `η(ℓ, ℓ) − λ`;
/// * `rigging_tangency` — `η(ℓ, ∂_i f)`.
///
/// # Errors
///
/// Chart mismatches; rejects `p < 1`.
pub fn fundamental_form_defect(
    result: &RiggedImmersionResult,
    forms: &FundamentalForms,
    p: f64,
) -> Result<ResidualReport> {
    forms.chart().check_same(result.chart())?;
    let chart = forms.chart();
    let n = chart.dim();
    let d = n + 1;
    let eta = minkowski(d);

    let df: Vec<TensorField> = (0..n)
        .map(|i| partial_derivative(&result.f, i))
        .collect::<Result<_>>()?;
    let dl: Vec<TensorField> = (0..n)
        .map(|i| partial_derivative(&result.rigging, i))
        .collect::<Result<_>>()?;

    let mut first = TensorField::zeros(chart.clone(), &[n, n]);
    let mut second = TensorField::zeros(chart.clone(), &[n, n]);
    let mut unit = TensorField::zeros(chart.clone(), &[1]);
    let mut tangency = TensorField::zeros(chart.clone(), &[n]);
    let eta_dot = |a: &[f64], b: &[f64]| -> f64 {
        (0..d).map(|c| eta[(c, c)] * a[c] * b[c]).sum()
    };
    for lin in 0..chart.point_count() {
        let ell = result.rigging.comps_at(lin);
        for i in 0..n {
            let dfi = df[i].comps_at(lin);
            for j in 0..n {
                first.set(
                    lin,
                    i * n + j,
                    eta_dot(dfi, df[j].comps_at(lin)) - forms.g.get(lin, i * n + j),
                );
                second.set(
                    lin,
                    i * n + j,
                    eta_dot(dfi, dl[j].comps_at(lin)) - forms.k.get(lin, i * n + j),
                );
            }
            tangency.set(lin, i, eta_dot(ell, dfi));
        }
        unit.set(lin, 0, eta_dot(ell, ell) - forms.lambda);
    }

    let mut builder = ResidualBuilder::new(chart, p)?;
    builder.add_field("first_form", &first)?;
    builder.add_field("second_form", &second)?;
    builder.add_field("rigging_unit", &unit)?;
    builder.add_field("rigging_tangency", &tangency)?;
    Ok(builder.finish())
}

/// Residual of the frame and gradient systems against given operators, from
/// the stored outputs: `frame[i]` is `∂_i F − F A_i`, `gradient[i]` is
/// `∂_i f − F_{·i}`. For compatible operators both shrink at second order;
/// for incompatible ones they hold the integration's path dependence and
/// stay bounded away from zero — the honest negative control.
///
/// # Errors
///
/// Chart mismatches; rejects `p < 1`.
pub fn frame_system_defect(
    result: &RiggedImmersionResult,
    ops: &RiggedOperators,
    p: f64,
) -> Result<ResidualReport> {
    ops.chart().check_same(result.chart())?;
    let chart = ops.chart();
    let n = chart.dim();
    let d = n + 1;
    let coeffs = assemble_rigging_coeffs(ops);
    let mut builder = ResidualBuilder::new(chart, p)?;
    for i in 0..n {
        let dframe = partial_derivative(&result.frame, i)?;
        let dfi = partial_derivative(&result.f, i)?;
        let mut frame_res = TensorField::zeros(chart.clone(), &[d, d]);
        let mut grad_res = TensorField::zeros(chart.clone(), &[d]);
        for lin in 0..chart.point_count() {
            let fm = result.frame.mat_at(lin);
            let defect = &dframe.mat_at(lin) - &(&fm * &coeffs.a()[i].mat_at(lin));
            frame_res.set_mat_at(lin, &defect);
            for a in 0..d {
                grad_res.set(lin, a, dfi.get(lin, a) - result.frame.get(lin, a * d + i));
            }
        }
        builder.add_field(format!("frame[{i}]"), &frame_res)?;
        builder.add_field(format!("gradient[{i}]"), &grad_res)?;
    }
    Ok(builder.finish())
}

/// Read the frame-system coefficients back off an immersion:
/// `A_i = F^{-1} ∂_i F` pointwise from the stored frame. Affine images of
/// the same immersion reconstruct identical coefficients, which is the
/// numerical footprint of uniqueness-up-to-affine-maps.
///
/// # Errors
///
/// Propagates derivative failures; `SingularFrameAt` where `F` cannot be
/// inverted.
pub fn reconstructed_coeffs(result: &RiggedImmersionResult) -> Result<Vec<TensorField>> {
    let chart = result.chart().clone();
    let n = chart.dim();
    let d = n + 1;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let dframe = partial_derivative(&result.frame, i)?;
        let mut a = TensorField::zeros(chart.clone(), &[d, d]);
        for lin in 0..chart.point_count() {
            let fm = result.frame.mat_at(lin);
            let inv = fm.inverse().ok_or_else(|| Error::SingularFrameAt {
                point: chart.multi_index(lin),
                det: fm.det(),
            })?;
            a.set_mat_at(lin, &(&inv * &dframe.mat_at(lin)));
        }
        out.push(a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Axis;
    use crate::sampling;

    /// Points of the unit timelike quadric in polar-type coordinates, with
    /// induced metric diag(1, sinh²r), second form equal to the metric, and
    /// normal of squared length −1 (the position vector itself).
    fn quadric_embedding(x: &[f64]) -> Vec<f64> {
        vec![
            x[0].cosh(),
            x[0].sinh() * x[1].cos(),
            x[0].sinh() * x[1].sin(),
        ]
    }

    fn quadric_forms(samples: usize) -> FundamentalForms {
        let chart = GridChart::new(vec![
            Axis::new("r", 0.5, 1.5, samples),
            Axis::new("theta", 0.3, 1.5, samples),
        ])
        .unwrap();
        let g = TensorField::from_fn(chart.clone(), &[2, 2], |x, c| match (c[0], c[1]) {
            (0, 0) => 1.0,
            (1, 1) => x[0].sinh().powi(2),
            _ => 0.0,
        });
        FundamentalForms::new(g.clone(), g, -1.0).unwrap()
    }

    fn random_ops(seed: u64, chart: &GridChart, amplitude: f64) -> RiggedOperators {
        let n = chart.dim();
        let mut r = sampling::rng(seed);
        let gamma = sampling::symmetrize_comps(
            &sampling::random_smooth_field(&mut r, chart, &[n, n, n], amplitude),
            1,
            2,
        );
        let k = sampling::symmetrize_comps(
            &sampling::random_smooth_field(&mut r, chart, &[n, n], amplitude),
            0,
            1,
        );
        let l = sampling::random_smooth_field(&mut r, chart, &[n, n], amplitude);
        let m = sampling::random_smooth_field(&mut r, chart, &[n], amplitude);
        RiggedOperators::new(gamma, k, l, m).unwrap()
    }

    #[test]
    fn zero_operators_give_a_flat_sheet_with_constant_rigging() {
        let chart = GridChart::cube(2, 0.0, 1.0, 9).unwrap();
        let zeros = |shape: &[usize]| TensorField::zeros(chart.clone(), shape);
        let ops = RiggedOperators::new(
            zeros(&[2, 2, 2]),
            zeros(&[2, 2]),
            zeros(&[2, 2]),
            zeros(&[2]),
        )
        .unwrap();
        let coeffs = assemble_rigging_coeffs(&ops);
        for a in coeffs.a() {
            assert_eq!(a.max_abs(), 0.0);
        }
        assert_eq!(generalized_gc_residual(&ops, 4.0).unwrap().max_abs, 0.0);
        assert_eq!(gc_pfaff_equivalence_gap(&ops).unwrap(), 0.0);

        let res = immerse_hypersurface_rigged(&ops, &[4, 4], &Mat::identity(3)).unwrap();
        let base = chart.coord(&[4, 4]);
        for lin in 0..chart.point_count() {
            let x = chart.coord_of_lin(lin);
            let f = res.f().comps_at(lin);
            assert!((f[0] - (x[0] - base[0])).abs() < 1e-13);
            assert!((f[1] - (x[1] - base[1])).abs() < 1e-13);
            assert_eq!(f[2], 0.0);
            assert_eq!(res.rigging().comps_at(lin), &[0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn block_assembly_round_trips_bitwise() {
        let chart = GridChart::cube(3, 0.0, 1.0, 5).unwrap();
        let ops = random_ops(21, &chart, 0.8);
        let n = 3;
        let d = 4;
        let coeffs = assemble_rigging_coeffs(&ops);
        for i in 0..n {
            let a = &coeffs.a()[i];
            for lin in 0..chart.point_count() {
                for k in 0..n {
                    for h in 0..n {
                        assert_eq!(
                            a.get(lin, k * d + h),
                            ops.gamma().get(lin, (k * n + i) * n + h)
                        );
                    }
                    assert_eq!(a.get(lin, k * d + n), ops.l().get(lin, k * n + i));
                }
                for h in 0..n {
                    assert_eq!(a.get(lin, n * d + h), -ops.k().get(lin, i * n + h));
                }
                assert_eq!(a.get(lin, n * d + n), -ops.m().get(lin, i));
            }
        }
    }

    #[test]
    fn index_and_matrix_forms_of_the_equations_agree_to_roundoff() {
        let chart = GridChart::cube(3, 0.0, 1.0, 5).unwrap();
        for seed in [31, 32, 33] {
            let ops = random_ops(seed, &chart, 0.9);
            let gap = gc_pfaff_equivalence_gap(&ops).unwrap();
            assert!(gap <= 1e-12, "equivalence gap {gap}");
        }
    }

    #[test]
    fn specialized_quadric_operators_satisfy_the_generalized_equations() {
        let coarse = generalized_gc_residual(
            &specialize_from_forms(&quadric_forms(17)).unwrap(),
            4.0,
        )
        .unwrap();
        let fine = generalized_gc_residual(
            &specialize_from_forms(&quadric_forms(33)).unwrap(),
            4.0,
        )
        .unwrap();
        assert!(fine.max_abs < 5e-2, "residual {}", fine.max_abs);
        assert!(
            coarse.max_abs / fine.max_abs > 3.0,
            "no second-order decay: {} vs {}",
            coarse.max_abs,
            fine.max_abs
        );
        // M ≡ 0 and a symmetric Weingarten product make the torsion family
        // vanish to round-off, not just to discretization error.
        assert!(fine.equation("codazzi_m[0,1]").unwrap() <= 1e-12);
    }

    #[test]
    fn specialization_is_metric_compatible() {
        // ∇_i g_{jh} with the emitted connection vanishes to round-off, not
        // just to discretization error: the connection is built from the same
        // derivative samples that appear in the metricity combination, and
        // the Koszul terms telescope.
        let forms = quadric_forms(17);
        let ops = specialize_from_forms(&forms).unwrap();
        let n = 2;
        let chart = forms.chart().clone();
        let dg: Vec<TensorField> = (0..n)
            .map(|i| partial_derivative(forms.g(), i).unwrap())
            .collect();
        let mut worst = 0.0f64;
        for lin in 0..chart.point_count() {
            for i in 0..n {
                for j in 0..n {
                    for h in 0..n {
                        let mut v = dg[i].get(lin, j * n + h);
                        for m in 0..n {
                            v -= ops.gamma().get(lin, (m * n + i) * n + j)
                                * forms.g().get(lin, m * n + h);
                            v -= ops.gamma().get(lin, (m * n + i) * n + h)
                                * forms.g().get(lin, j * n + m);
                        }
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        assert!(worst <= 1e-12, "metricity defect {worst}");
    }

    #[test]
    fn specialized_operators_match_the_classical_residuals() {
        let forms = quadric_forms(17);
        let ops = specialize_from_forms(&forms).unwrap();
        let gen = generalized_gc_fields(&ops).unwrap();
        let classical = classical_gc_residual(&forms, 4.0).unwrap();
        let gen_gauss = &gen.iter().find(|(l, _)| l == "gauss[0,1]").unwrap().1;
        let gen_ck = &gen.iter().find(|(l, _)| l == "codazzi_k[0,1]").unwrap().1;
        // Same Gauss residual through two code paths.
        assert!(
            (gen_gauss.max_abs() - classical.equation("gauss[0,1]").unwrap()).abs() <= 1e-12
        );
        // The generalized first Codazzi family carries the normal's sign but
        // the same magnitude as the classical one.
        assert!(
            (gen_ck.max_abs() - classical.equation("codazzi[0,1]").unwrap()).abs() <= 1e-12
        );
    }

    #[test]
    fn classical_equations_flag_wrong_curvature_pairings() {
        // Umbilic K = g on the quadric satisfies them; K = 2g cannot.
        let good = classical_gc_residual(&quadric_forms(33), 4.0).unwrap();
        assert!(good.max_abs < 0.1, "umbilic residual {}", good.max_abs);

        let forms = quadric_forms(33);
        let k2 = forms.k().map(|v| 2.0 * v);
        let bad_forms = FundamentalForms::new(forms.g().clone(), k2, -1.0).unwrap();
        let bad = classical_gc_residual(&bad_forms, 4.0).unwrap();
        assert!(bad.equation("gauss[0,1]").unwrap() > 0.5);
        // Codazzi survives the rescaling (∇ of 2g is still ∇-compatible).
        assert!(bad.equation("codazzi[0,1]").unwrap() < 0.1);

        // Flat data vanish identically: constant metric, zero second form.
        let chart = GridChart::cube(2, 0.0, 1.0, 9).unwrap();
        let flat = FundamentalForms::new(
            TensorField::from_fn(chart.clone(), &[2, 2], |_, c| {
                if c[0] == c[1] {
                    1.0
                } else {
                    0.0
                }
            }),
            TensorField::zeros(chart, &[2, 2]),
            -1.0,
        )
        .unwrap();
        assert_eq!(classical_gc_residual(&flat, 4.0).unwrap().max_abs, 0.0);
    }

    #[test]
    fn forms_pipeline_reproduces_flat_sheets_exactly() {
        // Spacelike hyperplane: identity metric, zero second form.
        let chart = GridChart::cube(2, 0.0, 1.0, 9).unwrap();
        let identity_g = TensorField::from_fn(chart.clone(), &[2, 2], |_, c| {
            if c[0] == c[1] {
                1.0
            } else {
                0.0
            }
        });
        let forms =
            FundamentalForms::new(identity_g, TensorField::zeros(chart.clone(), &[2, 2]), -1.0)
                .unwrap();
        let res = immerse_hypersurface_forms(&forms, &[4, 4], 0.5).unwrap();
        let expected_fstar = Mat::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert!(res.base_frame().max_abs_diff(&expected_fstar) < 1e-12);
        assert!(res.min_frame_det() > 0.0);
        for lin in 0..chart.point_count() {
            // Image lies in the spacelike hyperplane through the origin.
            assert!(res.f().comps_at(lin)[0].abs() < 1e-12);
        }
        let defect = fundamental_form_defect(&res, &forms, 4.0).unwrap();
        assert!(defect.max_abs < 1e-10, "hyperplane defect {}", defect.max_abs);

        // Timelike sheet: Lorentzian plane metric, zero second form.
        let lorentz_g = TensorField::from_fn(chart.clone(), &[2, 2], |_, c| match (c[0], c[1]) {
            (0, 0) => -1.0,
            (1, 1) => 1.0,
            _ => 0.0,
        });
        let forms =
            FundamentalForms::new(lorentz_g, TensorField::zeros(chart.clone(), &[2, 2]), 1.0)
                .unwrap();
        let res = immerse_hypersurface_forms(&forms, &[4, 4], 0.5).unwrap();
        assert!(res.base_frame().max_abs_diff(&Mat::identity(3)) < 1e-12);
        for lin in 0..chart.point_count() {
            assert!(res.f().comps_at(lin)[2].abs() < 1e-12);
            let ell = res.rigging().comps_at(lin);
            assert!((ell[2] - 1.0).abs() < 1e-12);
        }
        let defect = fundamental_form_defect(&res, &forms, 4.0).unwrap();
        assert!(defect.max_abs < 1e-10, "timelike sheet defect {}", defect.max_abs);
    }

    #[test]
    fn quadric_immersion_lands_on_the_quadric_after_alignment() {
        let forms = quadric_forms(33);
        let x_star = [16, 16];
        let res = immerse_hypersurface_forms(&forms, &x_star, 0.5).unwrap();
        assert!(res.min_frame_det() > 0.0);

        // Rigid motion matching value and frame at the base point: both base
        // frames factor the same block matrix, so they differ by a
        // form-preserving map.
        let chart = forms.chart();
        let xs = chart.coord(&x_star);
        let embed_frame = |x: &[f64]| {
            Mat::from_rows(&[
                vec![x[0].sinh(), 0.0, x[0].cosh()],
                vec![
                    x[0].cosh() * x[1].cos(),
                    -x[0].sinh() * x[1].sin(),
                    x[0].sinh() * x[1].cos(),
                ],
                vec![
                    x[0].cosh() * x[1].sin(),
                    x[0].sinh() * x[1].cos(),
                    x[0].sinh() * x[1].sin(),
                ],
            ])
        };
        let q = &embed_frame(&xs) * &res.base_frame().inverse().unwrap();
        let (orth, _) = crate::lorentz_algebra::is_mink_orthogonal(&q, 1e-9);
        assert!(orth);
        let shift = quadric_embedding(&xs);

        let eta = minkowski(3);
        let mut worst_quadric = 0.0f64;
        let mut worst_point = 0.0f64;
        for lin in 0..chart.point_count() {
            let y0 = q.mul_vec(res.f().comps_at(lin));
            let y: Vec<f64> = y0.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let yy: f64 = (0..3).map(|c| eta[(c, c)] * y[c] * y[c]).sum();
            worst_quadric = worst_quadric.max((yy + 1.0).abs());
            let x = chart.coord_of_lin(lin);
            let exact = quadric_embedding(&x);
            for c in 0..3 {
                worst_point = worst_point.max((y[c] - exact[c]).abs());
            }
        }
        assert!(worst_quadric < 5e-3, "quadric defect {worst_quadric}");
        assert!(worst_point < 5e-3, "embedding error {worst_point}");

        let defect = fundamental_form_defect(&res, &forms, 4.0).unwrap();
        assert!(defect.max_abs < 5e-2, "form defect {}", defect.max_abs);
    }

    #[test]
    fn form_defects_shrink_at_second_order() {
        let run = |samples: usize, star: usize| -> f64 {
            let forms = quadric_forms(samples);
            let res = immerse_hypersurface_forms(&forms, &[star, star], 0.5).unwrap();
            fundamental_form_defect(&res, &forms, 4.0).unwrap().max_abs
        };
        let coarse = run(17, 8);
        let fine = run(33, 16);
        assert!(coarse / fine > 3.0, "no second-order decay: {coarse} vs {fine}");
    }

    #[test]
    fn incompatible_operators_leave_a_visible_frame_defect() {
        let forms = quadric_forms(33);
        let good_ops = specialize_from_forms(&forms).unwrap();
        let bad_forms =
            FundamentalForms::new(forms.g().clone(), forms.k().map(|v| 2.0 * v), -1.0).unwrap();
        let bad_ops = specialize_from_forms(&bad_forms).unwrap();

        let f_star = {
            let res = immerse_hypersurface_forms(&forms, &[16, 16], 0.5).unwrap();
            res.base_frame().clone()
        };
        let good = immerse_hypersurface_rigged(&good_ops, &[16, 16], &f_star).unwrap();
        let bad = immerse_hypersurface_rigged(&bad_ops, &[16, 16], &f_star).unwrap();
        let good_defect = frame_system_defect(&good, &good_ops, 4.0).unwrap().max_abs;
        let bad_defect = frame_system_defect(&bad, &bad_ops, 4.0).unwrap().max_abs;
        assert!(good_defect < 0.05, "compatible defect {good_defect}");
        assert!(
            bad_defect > 10.0 * good_defect,
            "negative control too quiet: {bad_defect} vs {good_defect}"
        );
    }

    #[test]
    fn affine_images_reconstruct_identical_coefficients() {
        let forms = quadric_forms(17);
        let res = immerse_hypersurface_forms(&forms, &[8, 8], 0.5).unwrap();
        let base = reconstructed_coeffs(&res).unwrap();
        let q = Mat::from_rows(&[
            vec![1.0, 0.3, 0.0],
            vec![-0.2, 1.1, 0.1],
            vec![0.0, 0.2, 0.9],
        ]);
        let moved = res.transform_affine(&q, &[0.4, -1.0, 2.0]);
        let transformed = reconstructed_coeffs(&moved).unwrap();
        for (a, b) in base.iter().zip(&transformed) {
            let gap = a.zip_map(b, |x, y| x - y).unwrap().max_abs();
            assert!(gap <= 1e-12, "coefficients moved by {gap}");
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let chart = GridChart::cube(2, 0.0, 1.0, 5).unwrap();
        // Signature flips across the grid.
        let g = TensorField::from_fn(chart.clone(), &[2, 2], |x, c| match (c[0], c[1]) {
            (0, 0) => 0.5 - x[0],
            (1, 1) => 1.0,
            _ => 0.0,
        });
        let k = TensorField::zeros(chart.clone(), &[2, 2]);
        assert!(matches!(
            FundamentalForms::new(g, k.clone(), -1.0),
            Err(Error::MixedSignature { .. })
        ));
        // lambda outside ±1.
        let id = TensorField::from_fn(chart.clone(), &[2, 2], |_, c| {
            if c[0] == c[1] {
                1.0
            } else {
                0.0
            }
        });
        assert!(matches!(
            FundamentalForms::new(id.clone(), k.clone(), 0.5),
            Err(Error::InvalidInput(_))
        ));
        // Asymmetric second form.
        let asym = TensorField::from_fn(chart.clone(), &[2, 2], |_, c| {
            if c == [0, 1] {
                1.0
            } else {
                0.0
            }
        });
        assert!(matches!(
            FundamentalForms::new(id, asym, -1.0),
            Err(Error::InvalidInput(_))
        ));
        // Singular initial frame.
        let zeros = |shape: &[usize]| TensorField::zeros(chart.clone(), shape);
        let ops = RiggedOperators::new(
            zeros(&[2, 2, 2]),
            zeros(&[2, 2]),
            zeros(&[2, 2]),
            zeros(&[2]),
        )
        .unwrap();
        assert!(matches!(
            immerse_hypersurface_rigged(&ops, &[2, 2], &Mat::zeros(3, 3)),
            Err(Error::SingularFstar { .. })
        ));
    }
}
