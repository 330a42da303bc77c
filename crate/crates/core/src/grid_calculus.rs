//! Finite-difference tensor calculus on uniform grids.
//!
//! Second-order stencils realize `∂/∂x^α` on sampled fields: central
//! differences at interior points and 3-point one-sided differences on
//! boundary faces, both exact on per-axis polynomials of degree ≤ 2. On top of
//! the derivative sit the coordinate formulas of metric geometry:
//!
//! * `inverse_metric` — pointwise `(g^{σν}) = (g_{αβ})^{−1}`;
//! * `christoffel` — `Γ^σ_{αβ} = ½ g^{σν}(∂_α g_{βν} + ∂_β g_{αν} − ∂_ν g_{αβ})`;
//! * `riemann` — `R^τ_{σαβ} = ∂_α Γ^τ_{βσ} − ∂_β Γ^τ_{ασ} + Γ^ν_{βσ}Γ^τ_{αν} − Γ^ν_{ασ}Γ^τ_{βν}`;
//! * `flatness_residual` — norms of the curvature, the obstruction to building
//!   a flat immersion from `g`.
//!
//! Symmetries that hold by algebra are enforced constructionally: `Γ^σ_{αβ}`
//! is computed once per unordered pair `(α,β)` and `R^τ_{σαβ}` once per
//! ordered pair `α < β` (with the transpose negated), so lower-index symmetry
//! and `(α,β)`-antisymmetry are exact, not approximate.

use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::report::{ResidualBuilder, ResidualReport};

/// Smallest `|det g|` accepted at a grid point unless a caller overrides it.
pub const DEFAULT_DET_FLOOR: f64 = 1e-10;

/// Differentiate a sampled field along one chart axis.
///
/// Interior points use the central stencil `(f_{i+1} − f_{i−1}) / 2h`;
/// boundary faces use the one-sided `(−4f_i + 7f_{i±1} − 4f_{i±2} + f_{i±3}) / ±2h`.
/// Both are second order and exact on polynomials of degree ≤ 2 in that axis,
/// and they share the same leading error term `(h²/6)·f‴`: the discretization
/// error is a smooth field sampled on the grid, not a function that jumps
/// where the stencil type switches. That matters whenever a derived field is
/// differentiated again (curvature from connection coefficients, defects from
/// reconstructed frames): differentiating a smooth `O(h²)` error keeps the
/// second derivative second-order accurate up to the boundary, while a
/// mismatched one-sided closure would degrade it to first order there.
///
/// # Errors
///
/// `AxisOutOfRange` when `axis ≥ chart.dim()`.
pub fn partial_derivative(f: &TensorField, axis: usize) -> Result<TensorField> {
    let chart = f.chart();
    let m = chart.dim();
    if axis >= m {
        return Err(Error::AxisOutOfRange { axis, dim: m });
    }
    let n_ax = chart.samples(axis);
    let h = chart.spacing(axis);
    let stride: usize = chart.shape()[axis + 1..].iter().product();
    let comps = f.comp_count();
    let step = stride * comps; // distance between axis-neighbors in raw storage

    let mut out = TensorField::zeros(chart.clone(), f.comp_shape());
    let data = f.as_slice();
    let inv2h = 1.0 / (2.0 * h);
    {
        let o = out.as_mut_slice();
        for lin in 0..chart.point_count() {
            let i = (lin / stride) % n_ax;
            let base = lin * comps;
            if i == 0 {
                // (−4f₀ + 7f₁ − 4f₂ + f₃)/2h, grouped as neighbor differences
                // so a constant field differentiates to exactly zero.
                for c in 0..comps {
                    let f0 = data[base + c];
                    o[base + c] = (7.0 * (data[base + step + c] - f0)
                        - 4.0 * (data[base + 2 * step + c] - f0)
                        + (data[base + 3 * step + c] - f0))
                        * inv2h;
                }
            } else if i + 1 == n_ax {
                for c in 0..comps {
                    let f0 = data[base + c];
                    o[base + c] = -(7.0 * (data[base - step + c] - f0)
                        - 4.0 * (data[base - 2 * step + c] - f0)
                        + (data[base - 3 * step + c] - f0))
                        * inv2h;
                }
            } else {
                for c in 0..comps {
                    o[base + c] = (data[base + step + c] - data[base - step + c]) * inv2h;
                }
            }
        }
    }
    Ok(out)
}

/// Validate a metric field: square components matching the chart dimension,
/// finite entries, symmetry up to rounding. Returns the dimension.
pub(crate) fn check_metric(g: &TensorField) -> Result<usize> {
    let d = g.chart().dim();
    if g.comp_shape() != [d, d].as_slice() {
        return Err(Error::ShapeMismatch {
            expected: vec![d, d],
            got: g.comp_shape().to_vec(),
        });
    }
    g.check_finite()?;
    let tol = 1e-12 * g.max_abs().max(1.0);
    let asym = g.max_matrix_asymmetry();
    if asym > tol {
        return Err(Error::InvalidInput(format!(
            "metric field is not symmetric (worst asymmetry {asym:.3e})"
        )));
    }
    Ok(d)
}

/// Exactly symmetric copy of a matrix-valued field (lower triangle wins).
pub(crate) fn symmetrized(g: &TensorField) -> TensorField {
    let mut out = g.clone();
    for lin in 0..g.chart().point_count() {
        out.set_mat_at(lin, &g.mat_at(lin).mirror_lower());
    }
    out
}

/// Pointwise inverse of a metric field with the default determinant floor.
///
/// See [`inverse_metric_with_floor`].
pub fn inverse_metric(g: &TensorField) -> Result<TensorField> {
    inverse_metric_with_floor(g, DEFAULT_DET_FLOOR)
}

/// Pointwise inverse `(g^{σν}) = (g_{αβ})^{−1}`, rejecting near-singular points.
///
/// The output is exactly symmetric (lower triangle of the computed inverse).
///
/// # Errors
///
/// `SingularMetricAt` when `|det g| < det_floor` anywhere, reporting the point
/// where `|det g|` is smallest.
pub fn inverse_metric_with_floor(g: &TensorField, det_floor: f64) -> Result<TensorField> {
    let d = check_metric(g)?;
    let chart = g.chart();
    let mut out = TensorField::zeros(chart.clone(), &[d, d]);
    let mut worst: Option<(usize, f64)> = None;
    for lin in 0..chart.point_count() {
        let m = g.mat_at(lin).mirror_lower();
        let det = m.det();
        if worst.map_or(true, |(_, w)| det.abs() < w) {
            worst = Some((lin, det.abs()));
        }
        if det.abs() >= det_floor {
            if let Some(inv) = m.inverse() {
                out.set_mat_at(lin, &inv.mirror_lower());
            }
        }
    }
    if let Some((lin, w)) = worst {
        if w < det_floor {
            return Err(Error::SingularMetricAt {
                point: chart.multi_index(lin),
                det: w,
            });
        }
    }
    Ok(out)
}

/// Row-major component index for a `[d,d]` field.
#[inline]
fn c2(d: usize, i: usize, j: usize) -> usize {
    i * d + j
}

/// Row-major component index for a `[d,d,d]` field.
#[inline]
fn c3(d: usize, s: usize, a: usize, b: usize) -> usize {
    (s * d + a) * d + b
}

/// Row-major component index for a `[d,d,d,d]` field.
#[inline]
fn c4(d: usize, t: usize, s: usize, a: usize, b: usize) -> usize {
    ((t * d + s) * d + a) * d + b
}

/// Christoffel symbols `Γ^σ_{αβ} = ½ g^{σν}(∂_α g_{βν} + ∂_β g_{αν} − ∂_ν g_{αβ})`
/// of a metric field, as a `[d,d,d]` field indexed `(σ, α, β)`.
///
/// Symmetry in the lower pair `(α,β)` is exact: each unordered pair is
/// computed once and mirrored.
///
/// # Errors
///
/// Propagates `SingularMetricAt` from the metric inverse and shape/symmetry
/// validation from the input.
pub fn christoffel(g: &TensorField) -> Result<TensorField> {
    christoffel_with_floor(g, DEFAULT_DET_FLOOR)
}

/// [`christoffel`] with an explicit determinant floor for the metric inverse.
pub fn christoffel_with_floor(g: &TensorField, det_floor: f64) -> Result<TensorField> {
    let d = check_metric(g)?;
    let g = symmetrized(g);
    let ginv = inverse_metric_with_floor(&g, det_floor)?;
    let dg: Vec<TensorField> = (0..d)
        .map(|nu| partial_derivative(&g, nu))
        .collect::<Result<_>>()?;
    let chart = g.chart();
    let mut out = TensorField::zeros(chart.clone(), &[d, d, d]);
    for lin in 0..chart.point_count() {
        for alpha in 0..d {
            for beta in alpha..d {
                for sigma in 0..d {
                    let mut sum = 0.0;
                    for nu in 0..d {
                        sum += ginv.get(lin, c2(d, sigma, nu))
                            * (dg[alpha].get(lin, c2(d, beta, nu))
                                + dg[beta].get(lin, c2(d, alpha, nu))
                                - dg[nu].get(lin, c2(d, alpha, beta)));
                    }
                    let val = 0.5 * sum;
                    out.set(lin, c3(d, sigma, alpha, beta), val);
                    out.set(lin, c3(d, sigma, beta, alpha), val);
                }
            }
        }
    }
    Ok(out)
}

/// Riemann curvature
/// `R^τ_{σαβ} = ∂_α Γ^τ_{βσ} − ∂_β Γ^τ_{ασ} + Γ^ν_{βσ}Γ^τ_{αν} − Γ^ν_{ασ}Γ^τ_{βν}`
/// of a metric field, as a `[d,d,d,d]` field indexed `(τ, σ, α, β)`.
///
/// Antisymmetry in `(α,β)` is exact: each `α < β` entry is computed once, the
/// swapped entry is its negation, and `α = β` entries are zero.
///
/// # Errors
///
/// Propagates from [`christoffel`].
pub fn riemann(g: &TensorField) -> Result<TensorField> {
    riemann_with_floor(g, DEFAULT_DET_FLOOR)
}

/// [`riemann`] with an explicit determinant floor for the metric inverse.
pub fn riemann_with_floor(g: &TensorField, det_floor: f64) -> Result<TensorField> {
    let d = check_metric(g)?;
    let gamma = christoffel_with_floor(g, det_floor)?;
    riemann_from_christoffel(&gamma, d)
}

/// Curvature of a connection given directly by its coefficient field `Γ^τ_{ασ}`
/// (shape `[d,d,d]`, indexed `(τ, α, σ)` like [`christoffel`] output).
pub(crate) fn riemann_from_christoffel(gamma: &TensorField, d: usize) -> Result<TensorField> {
    let chart = gamma.chart().clone();
    let dgamma: Vec<TensorField> = (0..chart.dim())
        .map(|a| partial_derivative(gamma, a))
        .collect::<Result<_>>()?;
    let mut out = TensorField::zeros(chart.clone(), &[d, d, d, d]);
    let m = chart.dim();
    for lin in 0..chart.point_count() {
        for alpha in 0..m {
            for beta in (alpha + 1)..m {
                for tau in 0..d {
                    for sigma in 0..d {
                        let mut val = dgamma[alpha].get(lin, c3(d, tau, beta, sigma))
                            - dgamma[beta].get(lin, c3(d, tau, alpha, sigma));
                        for nu in 0..d {
                            val += gamma.get(lin, c3(d, nu, beta, sigma))
                                * gamma.get(lin, c3(d, tau, alpha, nu))
                                - gamma.get(lin, c3(d, nu, alpha, sigma))
                                    * gamma.get(lin, c3(d, tau, beta, nu));
                        }
                        out.set(lin, c4(d, tau, sigma, alpha, beta), val);
                        out.set(lin, c4(d, tau, sigma, beta, alpha), -val);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Norms of the Riemann curvature of `g` — the obstruction to flatness.
///
/// `per_equation` carries the grid-wide maximum of every component
/// `R[τ,σ,α,β]` next to the aggregate.
///
/// # Errors
///
/// Propagates from [`riemann`]; rejects `p < 1`.
pub fn flatness_residual(g: &TensorField, p: f64) -> Result<ResidualReport> {
    let d = check_metric(g)?;
    let r = riemann(g)?;
    let chart = g.chart();
    let mut b = ResidualBuilder::new(chart, p)?;
    b.add_field("riemann", &r)?;
    // Per-component maxima, keyed by index tuple.
    for tau in 0..d {
        for sigma in 0..d {
            for alpha in 0..d {
                for beta in 0..d {
                    let c = c4(d, tau, sigma, alpha, beta);
                    let mut worst = 0.0f64;
                    for lin in 0..chart.point_count() {
                        worst = worst.max(r.get(lin, c).abs());
                    }
                    b.entry(format!("R[{tau},{sigma},{alpha},{beta}]"), worst);
                }
            }
        }
    }
    Ok(b.finish())
}

/// Trapezoid-weighted discrete `L^p` norm of a field, with the pointwise
/// magnitude taken as the largest absolute component (`p = ∞` gives the
/// supremum).
pub(crate) fn lp_norm(f: &TensorField, p: f64) -> Result<f64> {
    let mut b = ResidualBuilder::new(f.chart(), p)?;
    b.add_field("field", f)?;
    Ok(b.finish().lp_norm)
}

/// Discrete `W^{k,p}` norm: the `L^p` norm of the field plus the `L^p` norms
/// of every mixed finite-difference partial up to order `k` (one
/// representative per unordered derivative multi-index).
pub(crate) fn wkp_norm(f: &TensorField, order: usize, p: f64) -> Result<f64> {
    let mut total = lp_norm(f, p)?;
    let dim = f.chart().dim();
    let mut level: Vec<(TensorField, usize)> = vec![(f.clone(), 0)];
    for _ in 0..order {
        let mut next = Vec::new();
        for (fld, min_ax) in &level {
            for ax in *min_ax..dim {
                let d = partial_derivative(fld, ax)?;
                total += lp_norm(&d, p)?;
                next.push((d, ax));
            }
        }
        level = next;
    }
    Ok(total)
}
