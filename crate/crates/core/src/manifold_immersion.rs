//! Construction of isometric immersions from gridded flat Lorentzian metrics.
//!
//! Given a metric field `g` on an open chart whose curvature vanishes, the
//! pipeline produces `f : Ω → ℝ^d` with `(df)ᵀ η (df) = g`:
//!
//! 1. certify `g(x⋆)` as an admissible Lorentz matrix and screen every other
//!    grid point for admissibility at the same tolerance;
//! 2. factor `F⋆ᵀ η F⋆ = g(x⋆)` for the initial frame;
//! 3. integrate the frame system `∂_α F = F Γ_α` over the grid;
//! 4. integrate the gradient system `df = F` with `f(x⋆) = 0`.
//!
//! The construction succeeds *as an isometry* exactly when `g` is flat;
//! [`isometry_residual`] measures the defect `(df)ᵀ η (df) − g` and is the
//! quantity that converges to zero (at second order in the grid spacing) for
//! flat inputs and stays bounded away from zero for curved ones.
//!
//! Outputs are gauge-fixed: `f(x⋆) = 0` and `F(x⋆) = F⋆` exactly. Any other
//! solution differs by a rigid motion of Minkowski space; apply one with
//! [`ImmersionResult::transform`].

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::grid_calculus::{check_metric, christoffel, partial_derivative};
use crate::linalg::{minkowski, Mat};
use crate::lorentz_algebra::{certify_lorentz, lorentz_decompose, MinkIsometry};
use crate::pfaff_solver::{pfaff_integrate, poincare_integrate, PfaffCoeffs, SweepOrder};
use crate::report::{ResidualBuilder, ResidualReport};

/// An immersion into Minkowski space together with its frame field.
#[derive(Clone, Debug)]
pub struct ImmersionResult {
    f: TensorField,
    frame: TensorField,
    base_point: Vec<usize>,
    base_frame: Mat,
}

impl ImmersionResult {
    /// The immersion samples (`[d]`-vector per grid point).
    pub fn f(&self) -> &TensorField {
        &self.f
    }

    /// The frame field `F` (`[d,d]` per grid point, column `α` = `∂f/∂x^α`).
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

    /// Smallest `|det F|` over the grid (positive for genuine immersions).
    pub fn min_abs_frame_det(&self) -> f64 {
        (0..self.chart().point_count())
            .map(|lin| self.frame.mat_at(lin).det().abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Push the whole result through a rigid motion: `f ↦ Q f + v`,
    /// `F ↦ Q F`. The base point stays put; the gauge moves with the motion.
    pub fn transform(&self, motion: &MinkIsometry) -> ImmersionResult {
        let d = self.base_frame.rows();
        assert_eq!(motion.q().rows(), d, "motion dimension mismatch");
        let chart = self.chart().clone();
        let mut f = TensorField::zeros(chart.clone(), &[d]);
        let mut frame = TensorField::zeros(chart, &[d, d]);
        for lin in 0..self.chart().point_count() {
            f.set_comps_at(lin, &motion.apply(self.f.comps_at(lin)));
            frame.set_mat_at(lin, &(motion.q() * &self.frame.mat_at(lin)));
        }
        ImmersionResult {
            f,
            frame,
            base_point: self.base_point.clone(),
            base_frame: motion.q() * &self.base_frame,
        }
    }
}

/// Package the Christoffel symbols of `g` as frame-system coefficients: one
/// `[d,d]` field per axis with `(A_α)_{σβ} = Γ^σ_{αβ}`, so that the frame
/// field satisfies `∂_α F = F A_α`.
///
/// # Errors
///
/// Propagates metric validation and inversion failures.
pub fn metric_connection_coeffs(g: &TensorField) -> Result<PfaffCoeffs> {
    let chart = g.chart().clone();
    let d = chart.dim();
    let gamma = christoffel(g)?;
    let a: Vec<TensorField> = (0..d)
        .map(|alpha| {
            let mut f = TensorField::zeros(chart.clone(), &[d, d]);
            for lin in 0..chart.point_count() {
                for s in 0..d {
                    for b in 0..d {
                        f.set(lin, s * d + b, gamma.get(lin, (s * d + alpha) * d + b));
                    }
                }
            }
            f
        })
        .collect();
    PfaffCoeffs::from_a(chart, a)
}

/// Build an immersion with `(df)ᵀ η (df) = g` from a flat Lorentzian metric.
///
/// `x_star` is the gauge point: `f(x_star) = 0` and the frame there is the
/// canonical factor of `g(x_star)`. `epsilon` is the admissibility tolerance
/// used both for the base-point certificate and for screening all other grid
/// points.
///
/// The curvature of `g` is *not* checked here — run
/// [`crate::grid_calculus::flatness_residual`] (or [`isometry_residual`]
/// afterwards) to decide whether the output means anything. This keeps the
/// only-if experiments honest: curved inputs integrate fine and then fail the
/// residual, which is the observable effect of non-flatness.
///
/// # Errors
///
/// `NotLorentzAt` when a grid point fails admissibility; `SingularFrameAt`
/// when the integrated frame loses invertibility (incompatible data);
/// propagated validation and integration errors.
pub fn immerse_manifold(
    g: &TensorField,
    x_star: &[usize],
    epsilon: f64,
) -> Result<ImmersionResult> {
    check_metric(g)?;
    let chart = g.chart().clone();
    let d = chart.dim();
    if x_star.len() != d || x_star.iter().zip(chart.shape()).any(|(&i, n)| i >= n) {
        return Err(Error::InvalidInput(format!(
            "base point {x_star:?} lies outside the chart"
        )));
    }

    // Admissibility: full certificate at the base point, screening elsewhere.
    let base_lin = chart.lin_index(x_star);
    let base_cert =
        certify_lorentz(&g.mat_at(base_lin), epsilon).map_err(|e| Error::NotLorentzAt {
            point: x_star.to_vec(),
            source: Box::new(e),
        })?;
    for lin in 0..chart.point_count() {
        if lin == base_lin {
            continue;
        }
        certify_lorentz(&g.mat_at(lin), epsilon).map_err(|e| Error::NotLorentzAt {
            point: chart.multi_index(lin),
            source: Box::new(e),
        })?;
    }

    let anchor = lorentz_decompose(&base_cert);
    let f_star = anchor.base_f().clone();

    let coeffs = metric_connection_coeffs(g)?;
    let frame = pfaff_integrate(&coeffs, x_star, &f_star, &SweepOrder::natural(d))?;

    // An immersion must keep its frame invertible; a sign change relative to
    // the base frame means the integrated data were not compatible.
    let base_det = f_star.det();
    for lin in 0..chart.point_count() {
        let det = frame.mat_at(lin).det();
        if !(det * base_det > 0.0) {
            return Err(Error::SingularFrameAt {
                point: chart.multi_index(lin),
                det,
            });
        }
    }

    let f = poincare_integrate(&frame, x_star, &vec![0.0; d])?;
    Ok(ImmersionResult {
        f,
        frame,
        base_point: x_star.to_vec(),
        base_frame: f_star,
    })
}

/// Residual of the isometry identity `(df)ᵀ η (df) = g`, reported twice:
///
/// * `recomputed_df` — with the Jacobian recomputed from the integrated `f`
///   by finite differences (cross-checks the gradient integration);
/// * `stored_frame` — with the frame field the integrator produced.
///
/// # Errors
///
/// Chart/shape mismatches; rejects `p < 1`.
pub fn isometry_residual(
    result: &ImmersionResult,
    g: &TensorField,
    p: f64,
) -> Result<ResidualReport> {
    check_metric(g)?;
    g.chart().check_same(result.chart())?;
    let chart = g.chart();
    let d = chart.dim();
    let eta = minkowski(d);

    let df: Vec<TensorField> = (0..d)
        .map(|alpha| partial_derivative(result.f(), alpha))
        .collect::<Result<_>>()?;
    let mut jac = TensorField::zeros(chart.clone(), &[d, d]);
    for lin in 0..chart.point_count() {
        for i in 0..d {
            for alpha in 0..d {
                jac.set(lin, i * d + alpha, df[alpha].get(lin, i));
            }
        }
    }

    let defect_of = |frame: &TensorField| -> TensorField {
        let mut out = TensorField::zeros(chart.clone(), &[d, d]);
        for lin in 0..chart.point_count() {
            let fm = frame.mat_at(lin);
            let defect = &(&(&fm.t() * &eta) * &fm) - &g.mat_at(lin);
            out.set_mat_at(lin, &defect);
        }
        out
    };

    let mut builder = ResidualBuilder::new(chart, p)?;
    builder.add_field("recomputed_df", &defect_of(&jac))?;
    builder.add_field("stored_frame", &defect_of(result.frame()))?;
    Ok(builder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Axis;
    use crate::lorentz_algebra::is_mink_orthogonal;
    use crate::sampling;

    fn rindler(samples: usize) -> TensorField {
        let chart = GridChart::new(vec![
            Axis::new("tau", 0.0, 1.0, samples),
            Axis::new("rho", 0.5, 1.5, samples),
        ])
        .unwrap();
        TensorField::from_fn(chart, &[2, 2], |x, c| match (c[0], c[1]) {
            (0, 0) => -x[1] * x[1],
            (1, 1) => 1.0,
            _ => 0.0,
        })
    }

    fn minkowski_metric(samples: usize) -> TensorField {
        let chart = GridChart::cube(2, 0.0, 1.0, samples).unwrap();
        TensorField::from_fn(chart, &[2, 2], |_, c| match (c[0], c[1]) {
            (0, 0) => -1.0,
            (1, 1) => 1.0,
            _ => 0.0,
        })
    }

    #[test]
    fn flat_metric_immerses_to_a_shifted_identity() {
        let g = minkowski_metric(9);
        let res = immerse_manifold(&g, &[4, 4], 0.5).unwrap();
        let chart = g.chart();
        let base = chart.coord(&[4, 4]);
        for lin in 0..chart.point_count() {
            let x = chart.coord_of_lin(lin);
            let f = res.f().comps_at(lin);
            for i in 0..2 {
                assert!((f[i] - (x[i] - base[i])).abs() < 1e-13);
            }
            assert!(res.frame().mat_at(lin).max_abs_diff(&Mat::identity(2)) < 1e-13);
        }
        let rep = isometry_residual(&res, &g, 4.0).unwrap();
        assert!(rep.max_abs < 1e-12);
        assert!(rep.equation("recomputed_df").unwrap() < 1e-12);
        assert!(rep.equation("stored_frame").unwrap() < 1e-12);
    }

    #[test]
    fn constant_boost_metric_gives_an_affine_immersion() {
        let a: f64 = 0.3;
        let boost = Mat::from_rows(&[
            vec![a.cosh(), a.sinh()],
            vec![a.sinh(), a.cosh()],
        ]);
        let eta = minkowski(2);
        let g_mat = (&(&boost.t() * &eta) * &boost).mirror_lower();
        let chart = GridChart::cube(2, 0.0, 1.0, 9).unwrap();
        let g = TensorField::from_fn(chart, &[2, 2], |_, c| g_mat[(c[0], c[1])]);
        let res = immerse_manifold(&g, &[4, 4], 0.5).unwrap();

        // Constant metric ⇒ zero connection ⇒ the frame never moves.
        for lin in 0..g.chart().point_count() {
            assert_eq!(res.frame().mat_at(lin), *res.base_frame());
        }
        // The base frame differs from the boost by a form-preserving factor.
        let q = res.base_frame() * &boost.inverse().unwrap();
        let (orth, _) = is_mink_orthogonal(&q, 1e-10);
        assert!(orth, "frame/boost quotient must preserve the form");

        let rep = isometry_residual(&res, &g, 4.0).unwrap();
        assert!(rep.max_abs < 1e-10, "defect {}", rep.max_abs);
    }

    #[test]
    fn rindler_matches_the_analytic_embedding_up_to_a_rigid_motion() {
        let g = rindler(33);
        let x_star = [16, 16];
        let res = immerse_manifold(&g, &x_star, 0.1).unwrap();
        let chart = g.chart();

        let embed = |x: &[f64]| vec![x[1] * x[0].sinh(), x[1] * x[0].cosh()];
        let embed_frame = |x: &[f64]| {
            Mat::from_rows(&[
                vec![x[1] * x[0].cosh(), x[0].sinh()],
                vec![x[1] * x[0].sinh(), x[0].cosh()],
            ])
        };
        // Match value and frame at the base point; the mismatch elsewhere is
        // the discretization error of the construction.
        let xs = chart.coord(&x_star);
        let q = res.base_frame() * &embed_frame(&xs).inverse().unwrap();
        let (orth, _) = is_mink_orthogonal(&q, 1e-9);
        assert!(orth, "base frames of two isometric immersions differ by a form-preserving map");
        let shift = q.mul_vec(&embed(&xs));

        let mut worst = 0.0f64;
        for lin in 0..chart.point_count() {
            let x = chart.coord_of_lin(lin);
            let expected: Vec<f64> = q
                .mul_vec(&embed(&x))
                .iter()
                .zip(&shift)
                .map(|(a, b)| a - b)
                .collect();
            let got = res.f().comps_at(lin);
            for i in 0..2 {
                worst = worst.max((got[i] - expected[i]).abs());
            }
        }
        assert!(worst < 5e-3, "aligned error {worst}");

        assert!(res.min_abs_frame_det() > 0.0);
    }

    #[test]
    fn gauge_is_pinned_at_the_base_point() {
        let g = rindler(17);
        let res = immerse_manifold(&g, &[8, 8], 0.1).unwrap();
        let base_lin = g.chart().lin_index(&[8, 8]);
        assert_eq!(res.f().comps_at(base_lin), &[0.0, 0.0]);
        assert_eq!(res.frame().mat_at(base_lin), *res.base_frame());
    }

    #[test]
    fn rigid_motions_do_not_change_the_residual() {
        let g = rindler(17);
        let res = immerse_manifold(&g, &[8, 8], 0.1).unwrap();
        let rep0 = isometry_residual(&res, &g, 4.0).unwrap();
        let motion = sampling::random_mink_isometry(&mut sampling::rng(11), 2, true);
        let moved = res.transform(&motion);
        let rep1 = isometry_residual(&moved, &g, 4.0).unwrap();
        assert!(
            (rep0.max_abs - rep1.max_abs).abs() < 1e-12,
            "residual moved: {} vs {}",
            rep0.max_abs,
            rep1.max_abs
        );
        // Improper motions preserve the form just as well.
        let refl = sampling::random_mink_isometry(&mut sampling::rng(12), 2, false);
        let rep2 = isometry_residual(&res.transform(&refl), &g, 4.0).unwrap();
        assert!((rep0.max_abs - rep2.max_abs).abs() < 1e-12);
    }

    #[test]
    fn residual_shrinks_at_second_order_for_flat_input() {
        let coarse = {
            let g = rindler(17);
            isometry_residual(&immerse_manifold(&g, &[8, 8], 0.1).unwrap(), &g, 4.0)
                .unwrap()
                .max_abs
        };
        let fine = {
            let g = rindler(33);
            isometry_residual(&immerse_manifold(&g, &[16, 16], 0.1).unwrap(), &g, 4.0)
                .unwrap()
                .max_abs
        };
        assert!(
            (coarse / fine).log2() > 1.7,
            "no second-order decay: {coarse} vs {fine}"
        );
    }

    #[test]
    fn curved_input_leaves_a_visible_residual() {
        let chart = GridChart::cube(2, 0.0, 1.0, 17).unwrap();
        let g = TensorField::from_fn(chart, &[2, 2], |x, c| match (c[0], c[1]) {
            (0, 0) => -1.0,
            (1, 1) => x[0].cosh().powi(2),
            _ => 0.0,
        });
        let res = immerse_manifold(&g, &[8, 8], 0.1).unwrap();
        let rep = isometry_residual(&res, &g, 4.0).unwrap();
        assert!(rep.max_abs > 0.05, "curved defect only {}", rep.max_abs);
    }

    #[test]
    fn inadmissible_points_are_reported_with_their_location() {
        // Signature flips along the first axis: admissible near t = 0, not
        // past t ≈ 0.5.
        let chart = GridChart::cube(2, 0.0, 1.0, 9).unwrap();
        let g = TensorField::from_fn(chart, &[2, 2], |x, c| match (c[0], c[1]) {
            (0, 0) => -1.0 + 2.0 * x[0],
            (1, 1) => 1.0,
            _ => 0.0,
        });
        let err = immerse_manifold(&g, &[0, 0], 0.1).unwrap_err();
        match err {
            Error::NotLorentzAt { point, .. } => assert!(point[0] >= 4),
            other => panic!("expected NotLorentzAt, got {other:?}"),
        }
        // And when the base point itself is bad, it is the one reported.
        let err = immerse_manifold(&g, &[8, 8], 0.1).unwrap_err();
        match err {
            Error::NotLorentzAt { point, .. } => assert_eq!(point, vec![8, 8]),
            other => panic!("expected NotLorentzAt, got {other:?}"),
        }
    }
}
