//! Integration of overdetermined first-order systems on grids.
//!
//! The systems handled here are Pfaff systems
//!
//! ```text
//! ∂Y/∂x^α = Y A_α + B_α Y + C_α,   Y(x₀) = Y₀,   Y : Ω → ℝ^{q×ℓ}
//! ```
//!
//! and the gradient (Poincaré) special case `df = F`. A Pfaff system
//! prescribes *all* partial derivatives at once, so a solution exists only
//! when the coefficients satisfy commutator-type compatibility relations —
//! [`pfaff_compatibility_residual`] measures their failure, and the integrator
//! deliberately does **not** reject incompatible input: integrating anyway and
//! watching path dependence is exactly how the toolkit demonstrates that
//! compatibility is the right hypothesis.
//!
//! Propagation uses a fixed, canonical "axis fan": integrate along the first
//! sweep axis through `x₀`, then from every point of that line along the
//! second axis, and so on, one classical RK4 sample-to-sample step at a time
//! (coefficients at half-steps are averaged from the adjacent samples, which
//! keeps the overall order at two and makes the integrator exact on systems
//! with affine right-hand sides). [`pfaff_integrate_path`] instead follows an
//! explicit staircase of grid moves, which lets tests compare different
//! integration routes to the same endpoint.

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::grid_calculus::{partial_derivative, wkp_norm};
use crate::linalg::Mat;
use crate::report::{ResidualBuilder, ResidualReport};

/// Coefficients `(A_α, B_α, C_α)` of a Pfaff system on a chart.
///
/// `A` is always present (one `[ℓ,ℓ]` field per axis); `B` (`[q,q]`) and `C`
/// (`[q,ℓ]`) may be absent, meaning zero. When neither `B` nor `C` is given,
/// `q` stays free until an initial value fixes it.
#[derive(Clone, Debug)]
pub struct PfaffCoeffs {
    chart: GridChart,
    a: Vec<TensorField>,
    b: Option<Vec<TensorField>>,
    c: Option<Vec<TensorField>>,
    ell: usize,
    q: Option<usize>,
}

impl PfaffCoeffs {
    /// Validate and bundle coefficient fields. Every present family needs one
    /// field per chart axis, all on the same chart, with shapes consistent
    /// with a single `(q, ℓ)`.
    ///
    /// # Errors
    ///
    /// `InvalidInput`, `ChartMismatch` or `ShapeMismatch` when the families
    /// disagree.
    pub fn new(
        chart: GridChart,
        a: Vec<TensorField>,
        b: Option<Vec<TensorField>>,
        c: Option<Vec<TensorField>>,
    ) -> Result<Self> {
        let m = chart.dim();
        if a.len() != m {
            return Err(Error::InvalidInput(format!(
                "need one A coefficient per axis: got {} for a {m}-axis chart",
                a.len()
            )));
        }
        let ell_shape = a[0].comp_shape().to_vec();
        if ell_shape.len() != 2 || ell_shape[0] != ell_shape[1] {
            return Err(Error::ShapeMismatch {
                expected: vec![ell_shape[0], ell_shape[0]],
                got: ell_shape,
            });
        }
        let ell = ell_shape[0];
        for f in &a {
            chart.check_same(f.chart())?;
            if f.comp_shape() != [ell, ell].as_slice() {
                return Err(Error::ShapeMismatch {
                    expected: vec![ell, ell],
                    got: f.comp_shape().to_vec(),
                });
            }
            f.check_finite()?;
        }
        let mut q: Option<usize> = None;
        if let Some(bs) = &b {
            if bs.len() != m {
                return Err(Error::InvalidInput(format!(
                    "need one B coefficient per axis: got {} for a {m}-axis chart",
                    bs.len()
                )));
            }
            let qq = bs[0].comp_shape()[0];
            for f in bs {
                chart.check_same(f.chart())?;
                if f.comp_shape() != [qq, qq].as_slice() {
                    return Err(Error::ShapeMismatch {
                        expected: vec![qq, qq],
                        got: f.comp_shape().to_vec(),
                    });
                }
                f.check_finite()?;
            }
            q = Some(qq);
        }
        if let Some(cs) = &c {
            if cs.len() != m {
                return Err(Error::InvalidInput(format!(
                    "need one C coefficient per axis: got {} for a {m}-axis chart",
                    cs.len()
                )));
            }
            let qq = cs[0].comp_shape()[0];
            if let Some(qb) = q {
                if qb != qq {
                    return Err(Error::ShapeMismatch {
                        expected: vec![qb, ell],
                        got: cs[0].comp_shape().to_vec(),
                    });
                }
            }
            for f in cs {
                chart.check_same(f.chart())?;
                if f.comp_shape() != [qq, ell].as_slice() {
                    return Err(Error::ShapeMismatch {
                        expected: vec![qq, ell],
                        got: f.comp_shape().to_vec(),
                    });
                }
                f.check_finite()?;
            }
            q = Some(qq);
        }
        Ok(PfaffCoeffs {
            chart,
            a,
            b,
            c,
            ell,
            q,
        })
    }

    /// Bundle a pure `∂Y = Y A_α` system (no `B`, no `C`).
    pub fn from_a(chart: GridChart, a: Vec<TensorField>) -> Result<Self> {
        PfaffCoeffs::new(chart, a, None, None)
    }

    /// The chart the coefficients live on.
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    /// Column dimension `ℓ` of the unknown.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Row dimension `q` of the unknown, when the coefficients pin it.
    pub fn q(&self) -> Option<usize> {
        self.q
    }

    /// The `A` family.
    pub fn a(&self) -> &[TensorField] {
        &self.a
    }

    /// The `B` family, if present.
    pub fn b(&self) -> Option<&[TensorField]> {
        self.b.as_deref()
    }

    /// The `C` family, if present.
    pub fn c(&self) -> Option<&[TensorField]> {
        self.c.as_deref()
    }

    /// Right-hand side `Y A + B Y + C` with coefficients averaged between two
    /// grid points (`lin0 == lin1` evaluates at a sample).
    fn rhs(&self, axis: usize, lin0: usize, lin1: usize, y: &Mat) -> Mat {
        let avg = |f: &TensorField| -> Mat {
            if lin0 == lin1 {
                f.mat_at(lin0)
            } else {
                (&f.mat_at(lin0) + &f.mat_at(lin1)).scale(0.5)
            }
        };
        let mut out = y * &avg(&self.a[axis]);
        if let Some(bs) = &self.b {
            out = &out + &(&avg(&bs[axis]) * y);
        }
        if let Some(cs) = &self.c {
            out = &out + &avg(&cs[axis]);
        }
        out
    }

    /// One RK4 step along `axis` from sample `lin0` to adjacent sample `lin1`
    /// (`h` signed). Half-step coefficients are endpoint averages.
    fn rk4_step(&self, axis: usize, lin0: usize, lin1: usize, h: f64, y: &Mat) -> Mat {
        let k1 = self.rhs(axis, lin0, lin0, y);
        let k2 = self.rhs(axis, lin0, lin1, &(y + &k1.scale(0.5 * h)));
        let k3 = self.rhs(axis, lin0, lin1, &(y + &k2.scale(0.5 * h)));
        let k4 = self.rhs(axis, lin1, lin1, &(y + &k3.scale(h)));
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(2.0);
        y + &incr.scale(h / 6.0)
    }

    fn check_y0(&self, y0: &Mat) -> Result<()> {
        if y0.cols() != self.ell || self.q.map_or(false, |q| q != y0.rows()) {
            return Err(Error::ShapeMismatch {
                expected: vec![self.q.unwrap_or(y0.rows()), self.ell],
                got: vec![y0.rows(), y0.cols()],
            });
        }
        if !y0.is_finite() {
            return Err(Error::InvalidInput("initial value has non-finite entries".into()));
        }
        Ok(())
    }
}

/// The order in which [`pfaff_integrate`] fans out over the axes.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOrder(Vec<usize>);

impl SweepOrder {
    /// The default order `0, 1, …, m−1`.
    pub fn natural(m: usize) -> Self {
        SweepOrder((0..m).collect())
    }

    /// An explicit axis permutation.
    ///
    /// # Errors
    ///
    /// `InvalidInput` unless `axes` is a permutation of `0..m` for some `m`.
    pub fn new(axes: Vec<usize>) -> Result<Self> {
        let m = axes.len();
        let mut seen = vec![false; m];
        for &a in &axes {
            if a >= m || seen[a] {
                return Err(Error::InvalidInput(format!(
                    "sweep order {axes:?} is not a permutation of 0..{m}"
                )));
            }
            seen[a] = true;
        }
        Ok(SweepOrder(axes))
    }

    /// The axes in sweep order.
    pub fn axes(&self) -> &[usize] {
        &self.0
    }
}

/// An axis-aligned lattice path: a start point and straight segments
/// `(axis, direction ±1, steps)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StaircasePath {
    /// Multi-index of the starting grid point.
    pub start: Vec<usize>,
    /// Straight segments walked in order.
    pub moves: Vec<(usize, i8, usize)>,
}

impl StaircasePath {
    /// The endpoint implied by the moves, checking every visited index stays
    /// inside the chart.
    ///
    /// # Errors
    ///
    /// `PathOutOfChart` with the offending segment (the start counts as
    /// segment 0, the first move as segment 1, …).
    pub fn endpoint(&self, chart: &GridChart) -> Result<Vec<usize>> {
        if self.start.len() != chart.dim()
            || self
                .start
                .iter()
                .zip(chart.shape())
                .any(|(&i, n)| i >= n)
        {
            return Err(Error::PathOutOfChart { segment: 0 });
        }
        let mut pos = self.start.clone();
        for (seg, &(axis, dir, steps)) in self.moves.iter().enumerate() {
            if axis >= chart.dim() || (dir != 1 && dir != -1) {
                return Err(Error::PathOutOfChart { segment: seg + 1 });
            }
            for _ in 0..steps {
                if dir > 0 {
                    pos[axis] += 1;
                    if pos[axis] >= chart.samples(axis) {
                        return Err(Error::PathOutOfChart { segment: seg + 1 });
                    }
                } else {
                    if pos[axis] == 0 {
                        return Err(Error::PathOutOfChart { segment: seg + 1 });
                    }
                    pos[axis] -= 1;
                }
            }
        }
        Ok(pos)
    }
}

/// Labelled residual fields of the three compatibility relations, one field
/// per relation family and ordered axis pair `α < β`:
///
/// ```text
/// A[α,β] = ∂_α A_β − ∂_β A_α − A_β A_α + A_α A_β
/// B[α,β] = ∂_α B_β − ∂_β B_α − B_α B_β + B_β B_α
/// C[α,β] = ∂_α C_β − ∂_β C_α − C_β A_α + C_α A_β − B_α C_β + B_β C_α
/// ```
///
/// (the quadratic terms of the `B` relation really do carry the opposite
/// order from the `A` relation). Exposed separately from the report so
/// equivalence tests can compare residuals pointwise.
pub fn pfaff_compatibility_fields(coeffs: &PfaffCoeffs) -> Result<Vec<(String, TensorField)>> {
    let chart = coeffs.chart();
    let m = chart.dim();
    let npts = chart.point_count();

    let deriv_table = |family: &[TensorField]| -> Result<Vec<Vec<TensorField>>> {
        // table[α][β] = ∂_α family_β
        (0..m)
            .map(|alpha| {
                family
                    .iter()
                    .map(|f| partial_derivative(f, alpha))
                    .collect()
            })
            .collect()
    };

    let da = deriv_table(&coeffs.a)?;
    let db = coeffs.b.as_ref().map(|bs| deriv_table(bs)).transpose()?;
    let dc = coeffs.c.as_ref().map(|cs| deriv_table(cs)).transpose()?;

    let mut out = Vec::new();
    for alpha in 0..m {
        for beta in (alpha + 1)..m {
            // A relation.
            let mut res_a = TensorField::zeros(chart.clone(), coeffs.a[0].comp_shape());
            for lin in 0..npts {
                let aa = coeffs.a[alpha].mat_at(lin);
                let ab = coeffs.a[beta].mat_at(lin);
                let mut r = &da[alpha][beta].mat_at(lin) - &da[beta][alpha].mat_at(lin);
                r = &r - &(&ab * &aa);
                r = &r + &(&aa * &ab);
                res_a.set_mat_at(lin, &r);
            }
            out.push((format!("A[{alpha},{beta}]"), res_a));

            if let (Some(bs), Some(db)) = (&coeffs.b, &db) {
                let mut res_b = TensorField::zeros(chart.clone(), bs[0].comp_shape());
                for lin in 0..npts {
                    let ba = bs[alpha].mat_at(lin);
                    let bb = bs[beta].mat_at(lin);
                    let mut r = &db[alpha][beta].mat_at(lin) - &db[beta][alpha].mat_at(lin);
                    r = &r - &(&ba * &bb);
                    r = &r + &(&bb * &ba);
                    res_b.set_mat_at(lin, &r);
                }
                out.push((format!("B[{alpha},{beta}]"), res_b));
            }

            if let (Some(cs), Some(dc)) = (&coeffs.c, &dc) {
                let mut res_c = TensorField::zeros(chart.clone(), cs[0].comp_shape());
                for lin in 0..npts {
                    let ca = cs[alpha].mat_at(lin);
                    let cb = cs[beta].mat_at(lin);
                    let aa = coeffs.a[alpha].mat_at(lin);
                    let ab = coeffs.a[beta].mat_at(lin);
                    let mut r = &dc[alpha][beta].mat_at(lin) - &dc[beta][alpha].mat_at(lin);
                    r = &r - &(&cb * &aa);
                    r = &r + &(&ca * &ab);
                    if let Some(bs) = &coeffs.b {
                        let ba = bs[alpha].mat_at(lin);
                        let bb = bs[beta].mat_at(lin);
                        r = &r - &(&ba * &cb);
                        r = &r + &(&bb * &ca);
                    }
                    res_c.set_mat_at(lin, &r);
                }
                out.push((format!("C[{alpha},{beta}]"), res_c));
            }
        }
    }
    Ok(out)
}

/// Norms of the compatibility-relation residuals (see
/// [`pfaff_compatibility_fields`] for the exact expressions), labelled per
/// relation and axis pair.
///
/// # Errors
///
/// Propagates shape errors; rejects `p < 1`.
pub fn pfaff_compatibility_residual(coeffs: &PfaffCoeffs, p: f64) -> Result<ResidualReport> {
    let fields = pfaff_compatibility_fields(coeffs)?;
    let mut b = ResidualBuilder::new(coeffs.chart(), p)?;
    for (label, field) in &fields {
        b.add_field(label.clone(), field)?;
    }
    Ok(b.finish())
}

/// Integrate the Pfaff system over the whole chart from `Y(x₀) = Y₀`.
///
/// The value at `x₀` is stored bitwise. Propagation fans out per the sweep
/// order: RK4 along the first axis through `x₀` (both directions), then from
/// every filled point along the second axis, and so on. For compatible smooth
/// coefficients the scheme converges at second order to the continuum
/// solution; for incompatible coefficients it still produces *a* field — the
/// compatibility residual is the gatekeeper, not the integrator.
///
/// # Errors
///
/// `AxisOutOfRange`/`ShapeMismatch` on malformed input; `NonFiniteState` when
/// the integration overflows (reports the first bad point).
pub fn pfaff_integrate(
    coeffs: &PfaffCoeffs,
    x0: &[usize],
    y0: &Mat,
    sweep: &SweepOrder,
) -> Result<TensorField> {
    let chart = coeffs.chart();
    let m = chart.dim();
    if sweep.axes().len() != m {
        return Err(Error::InvalidInput(format!(
            "sweep order covers {} axes but the chart has {m}",
            sweep.axes().len()
        )));
    }
    if x0.len() != m || x0.iter().zip(chart.shape()).any(|(&i, n)| i >= n) {
        return Err(Error::InvalidInput(format!(
            "base point {x0:?} lies outside the chart"
        )));
    }
    coeffs.check_y0(y0)?;

    let mut y = TensorField::zeros(chart.clone(), &[y0.rows(), y0.cols()]);
    let base_lin = chart.lin_index(x0);
    y.set_mat_at(base_lin, y0);

    let mut slab = vec![base_lin];
    for &axis in sweep.axes() {
        let n_ax = chart.samples(axis);
        let h = chart.spacing(axis);
        let stride: usize = chart.shape()[axis + 1..].iter().product();
        let i0 = x0[axis];
        let mut next_slab = Vec::with_capacity(slab.len() * n_ax);
        for &start in &slab {
            // Forward leg.
            let mut cur = y.mat_at(start);
            for i in i0..n_ax - 1 {
                let from = start + (i - i0) * stride;
                let to = from + stride;
                cur = coeffs.rk4_step(axis, from, to, h, &cur);
                if !cur.is_finite() {
                    return Err(Error::NonFiniteState {
                        point: chart.multi_index(to),
                    });
                }
                y.set_mat_at(to, &cur);
            }
            // Backward leg.
            let mut cur = y.mat_at(start);
            for i in (1..=i0).rev() {
                let from = start - (i0 - i) * stride;
                let to = from - stride;
                cur = coeffs.rk4_step(axis, from, to, -h, &cur);
                if !cur.is_finite() {
                    return Err(Error::NonFiniteState {
                        point: chart.multi_index(to),
                    });
                }
                y.set_mat_at(to, &cur);
            }
            let line_base = start - i0 * stride;
            next_slab.extend((0..n_ax).map(|i| line_base + i * stride));
        }
        slab = next_slab;
    }
    Ok(y)
}

/// Integrate the system along an explicit staircase of grid moves, returning
/// the value at the path endpoint.
///
/// # Errors
///
/// `PathOutOfChart` when a segment leaves the grid; `NonFiniteState` on
/// overflow.
pub fn pfaff_integrate_path(
    coeffs: &PfaffCoeffs,
    path: &StaircasePath,
    y0: &Mat,
) -> Result<Mat> {
    let chart = coeffs.chart();
    coeffs.check_y0(y0)?;
    path.endpoint(chart)?; // validates the whole walk up front
    let mut pos = path.start.clone();
    let mut cur = y0.clone();
    for &(axis, dir, steps) in &path.moves {
        let h = chart.spacing(axis) * f64::from(dir);
        for _ in 0..steps {
            let from = chart.lin_index(&pos);
            if dir > 0 {
                pos[axis] += 1;
            } else {
                pos[axis] -= 1;
            }
            let to = chart.lin_index(&pos);
            cur = coeffs.rk4_step(axis, from, to, h, &cur);
            if !cur.is_finite() {
                return Err(Error::NonFiniteState { point: pos });
            }
        }
    }
    Ok(cur)
}

/// Check that `F` has the shape of a gradient candidate: `[d, m]` components
/// on an `m`-axis chart, column `α` holding the would-be `∂f/∂x^α`.
fn check_gradient_shape(f: &TensorField) -> Result<(usize, usize)> {
    let m = f.chart().dim();
    let shape = f.comp_shape();
    if shape.len() != 2 || shape[1] != m {
        return Err(Error::ShapeMismatch {
            expected: vec![shape.first().copied().unwrap_or(0), m],
            got: shape.to_vec(),
        });
    }
    Ok((shape[0], m))
}

/// Column-curl residual of a gradient candidate: for every axis pair
/// `α < β`, the field `∂_α F_{·β} − ∂_β F_{·α}` (labelled `curl[α,β]`). All
/// pairs vanish exactly when `F` is a discrete gradient.
///
/// # Errors
///
/// `ShapeMismatch` unless `F` is `[d, m]` on an `m`-axis chart.
pub fn poincare_compatibility_residual(f: &TensorField, p: f64) -> Result<ResidualReport> {
    let (d, m) = check_gradient_shape(f)?;
    let chart = f.chart();
    let df: Vec<TensorField> = (0..m)
        .map(|alpha| partial_derivative(f, alpha))
        .collect::<Result<_>>()?;
    let mut builder = ResidualBuilder::new(chart, p)?;
    for alpha in 0..m {
        for beta in (alpha + 1)..m {
            let mut curl = TensorField::zeros(chart.clone(), &[d]);
            for lin in 0..chart.point_count() {
                for i in 0..d {
                    let v = df[alpha].get(lin, i * m + beta) - df[beta].get(lin, i * m + alpha);
                    curl.set(lin, i, v);
                }
            }
            builder.add_field(format!("curl[{alpha},{beta}]"), &curl)?;
        }
    }
    Ok(builder.finish())
}

/// Integrate the gradient system `df = F` from `f(x₀) = f₀`.
///
/// This is the Pfaff integrator applied to the `C`-only system with unknown
/// `f` as a `[d,1]` column, so it shares the sweep scheme and its guarantees;
/// in particular it reproduces affine fields exactly.
///
/// # Errors
///
/// As [`pfaff_integrate`].
pub fn poincare_integrate(f_field: &TensorField, x0: &[usize], f0: &[f64]) -> Result<TensorField> {
    let (d, m) = check_gradient_shape(f_field)?;
    if f0.len() != d {
        return Err(Error::ShapeMismatch {
            expected: vec![d],
            got: vec![f0.len()],
        });
    }
    let chart = f_field.chart().clone();
    // A ≡ 0 (scalar slot): the unknown is a d×1 column and the system is pure C.
    let zero_a: Vec<TensorField> = (0..m)
        .map(|_| TensorField::zeros(chart.clone(), &[1, 1]))
        .collect();
    let c: Vec<TensorField> = (0..m)
        .map(|alpha| {
            let mut cf = TensorField::zeros(chart.clone(), &[d, 1]);
            for lin in 0..chart.point_count() {
                for i in 0..d {
                    cf.set(lin, i, f_field.get(lin, i * m + alpha));
                }
            }
            cf
        })
        .collect();
    let coeffs = PfaffCoeffs::new(chart.clone(), zero_a, None, Some(c))?;
    let y0 = Mat::col_vec(f0);
    let y = pfaff_integrate(&coeffs, x0, &y0, &SweepOrder::natural(m))?;
    // Reshape [d,1] → [d].
    TensorField::from_data(chart, &[d], y.as_slice().to_vec())
}

/// Integrate two systems and compare: returns `(gap_norm, input_gap)` where
/// `gap_norm` is the discrete `W^{1,p}` norm of `Y − Ỹ` and `input_gap` is
/// `|Y₀ − Ỹ₀|_max` plus the `L^p` gaps of all coefficient families, so callers
/// can form empirical continuity ratios. The exponent is the crate default
/// `p = dim + 2`; the constant in front is never asserted here.
///
/// # Errors
///
/// `ChartMismatch`/`ShapeMismatch` when the two systems are not comparable;
/// propagates integration errors.
pub fn pfaff_dependence_gap(
    c1: &PfaffCoeffs,
    c2: &PfaffCoeffs,
    y01: &Mat,
    y02: &Mat,
    x0: &[usize],
) -> Result<(f64, f64)> {
    c1.chart().check_same(c2.chart())?;
    let p = (c1.chart().dim() + 2) as f64;
    let sweep = SweepOrder::natural(c1.chart().dim());
    let y1 = pfaff_integrate(c1, x0, y01, &sweep)?;
    let y2 = pfaff_integrate(c2, x0, y02, &sweep)?;
    let diff = y1.zip_map(&y2, |a, b| a - b)?;
    let gap_norm = wkp_norm(&diff, 1, p)?;

    let mut input_gap = y01.max_abs_diff(y02);
    let family_gap = |f1: Option<&[TensorField]>, f2: Option<&[TensorField]>| -> Result<f64> {
        let mut total = 0.0;
        let m = c1.chart().dim();
        for alpha in 0..m {
            let zero1;
            let zero2;
            let (a, b) = match (f1, f2) {
                (None, None) => continue,
                (Some(f1), Some(f2)) => (&f1[alpha], &f2[alpha]),
                (Some(f1), None) => {
                    zero2 = TensorField::zeros(c1.chart().clone(), f1[alpha].comp_shape());
                    (&f1[alpha], &zero2)
                }
                (None, Some(f2)) => {
                    zero1 = TensorField::zeros(c1.chart().clone(), f2[alpha].comp_shape());
                    (&zero1, &f2[alpha])
                }
            };
            let d = a.zip_map(b, |x, y| x - y)?;
            total += wkp_norm(&d, 0, p)?;
        }
        Ok(total)
    };
    input_gap += family_gap(Some(c1.a()), Some(c2.a()))?;
    input_gap += family_gap(c1.b(), c2.b())?;
    input_gap += family_gap(c1.c(), c2.c())?;
    Ok((gap_norm, input_gap))
}
