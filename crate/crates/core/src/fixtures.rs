//! Closed-form sample data: flat Lorentzian metrics and hypersurface forms.
//!
//! Every generator evaluates an analytic expression on a [`GridChart`], so the
//! outputs double as oracles: their Christoffel symbols, curvature, and forms
//! are known exactly and the numerical pipelines can be checked against them.
//! The command-line tool exposes the same generators through
//! [`generate_fixture`], which also records the provenance metadata written
//! into manifests.

use std::collections::BTreeMap;

use crate::chart::{Axis, GridChart};
use crate::error::{Error, Result};
use crate::field::TensorField;
use crate::hypersurface_immersion::FundamentalForms;
use crate::linalg::Mat;

/// Names accepted by [`generate_fixture`] and the CLI `generate` subcommand.
pub const FIXTURE_NAMES: [&str; 7] = [
    "minkowski",
    "boosted_flat",
    "rindler",
    "desitter_slice",
    "hyperplane_forms",
    "timelike_sheet_forms",
    "hyperboloid_forms",
];

/// Tunable knobs; each generator reads only the ones it documents.
#[derive(Clone, Debug)]
pub struct FixtureParams {
    /// `boosted_flat`: rapidity of the boost mixed into the sampling frame.
    pub rapidity: f64,
    /// `boosted_flat`: stretch factor of the first spatial axis. Must be
    /// positive; values ≠ 1 keep the boost visible in the components (a pure
    /// boost would reproduce the Minkowski components exactly).
    pub anisotropy: f64,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            rapidity: 0.5,
            anisotropy: 2.0,
        }
    }
}

/// The fields a generator produced, plus provenance for manifests.
#[derive(Clone, Debug)]
pub struct FixtureOutput {
    /// Named fields: `g` for metric fixtures; `g` and `K` for form fixtures.
    pub fields: Vec<(String, TensorField)>,
    /// Provenance: generator name, parameter values, `lambda` for forms.
    pub metadata: BTreeMap<String, String>,
}

/// Constant Minkowski components `η = diag(−1, 1, …, 1)` on any chart.
pub fn minkowski_metric(chart: &GridChart) -> TensorField {
    let d = chart.dim();
    TensorField::from_fn(chart.clone(), &[d, d], |_, c| {
        if c[0] != c[1] {
            0.0
        } else if c[0] == 0 {
            -1.0
        } else {
            1.0
        }
    })
}

/// Flat metric with constant non-diagonal components: the pullback `AᵀηA`
/// where `A` stretches the first spatial axis by `anisotropy` after boosting
/// the `(0,1)` plane by `rapidity`. (The stretch matters: a pure boost
/// preserves `η` and would leave no trace in the samples.)
///
/// # Errors
///
/// `BadParams` on a 0-dimensional reading of the chart (never constructible),
/// non-finite parameters, or `anisotropy ≤ 0`.
pub fn boosted_flat_metric(chart: &GridChart, rapidity: f64, anisotropy: f64) -> Result<TensorField> {
    if !(rapidity.is_finite() && anisotropy > 0.0 && anisotropy.is_finite()) {
        return Err(Error::BadParams(format!(
            "boosted_flat needs finite rapidity and positive anisotropy, got {rapidity} and {anisotropy}"
        )));
    }
    let d = chart.dim();
    if d < 2 {
        return Err(Error::BadParams(
            "boosted_flat needs a chart of dimension at least 2".into(),
        ));
    }
    let mut a = Mat::identity(d);
    a[(0, 0)] = rapidity.cosh();
    a[(0, 1)] = rapidity.sinh();
    a[(1, 0)] = rapidity.sinh() * anisotropy;
    a[(1, 1)] = rapidity.cosh() * anisotropy;
    let mut g = Mat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                let eta = if k == 0 { -1.0 } else { 1.0 };
                s += a[(k, i)] * eta * a[(k, j)];
            }
            g[(i, j)] = s;
        }
    }
    let mut out = TensorField::zeros(chart.clone(), &[d, d]);
    for lin in 0..chart.point_count() {
        out.set_mat_at(lin, &g);
    }
    Ok(out)
}

/// Rindler wedge metric `g = diag(−ρ², 1)` on a 2-dimensional `(τ, ρ)` chart.
/// Flat, yet with genuinely position-dependent components; the workhorse for
/// convergence studies.
///
/// # Errors
///
/// `BadParams` unless the chart is 2-dimensional with the `ρ`-interval
/// bounded away from 0 (the metric degenerates on the horizon `ρ = 0`).
pub fn rindler_metric(chart: &GridChart) -> Result<TensorField> {
    if chart.dim() != 2 {
        return Err(Error::BadParams(format!(
            "rindler needs a 2-dimensional (tau, rho) chart, got dimension {}",
            chart.dim()
        )));
    }
    let rho = &chart.axes()[1];
    if rho.min.min(rho.max) <= 0.0 {
        return Err(Error::BadParams(format!(
            "rindler needs the rho interval bounded away from 0, got [{}, {}]",
            rho.min, rho.max
        )));
    }
    Ok(TensorField::from_fn(
        chart.clone(),
        &[2, 2],
        |x, c| match (c[0], c[1]) {
            (0, 0) => -x[1] * x[1],
            (1, 1) => 1.0,
            _ => 0.0,
        },
    ))
}

/// A 2-dimensional de Sitter slice `g = diag(−1, cosh²t)`: genuinely curved,
/// the standard negative control for flatness-based pipelines.
///
/// # Errors
///
/// `BadParams` unless the chart is 2-dimensional.
pub fn desitter_metric(chart: &GridChart) -> Result<TensorField> {
    if chart.dim() != 2 {
        return Err(Error::BadParams(format!(
            "desitter_slice needs a 2-dimensional (t, x) chart, got dimension {}",
            chart.dim()
        )));
    }
    Ok(TensorField::from_fn(
        chart.clone(),
        &[2, 2],
        |x, c| match (c[0], c[1]) {
            (0, 0) => -1.0,
            (1, 1) => x[0].cosh().powi(2),
            _ => 0.0,
        },
    ))
}

/// A flat spacelike hyperplane: `g = δ`, `K = 0`, timelike rigging
/// (`λ = −1`). The reconstruction should be a totally geodesic sheet.
///
/// # Errors
///
/// Propagates form validation (never fails for this data).
pub fn hyperplane_forms(chart: &GridChart) -> Result<FundamentalForms> {
    let n = chart.dim();
    let g = TensorField::from_fn(chart.clone(), &[n, n], |_, c| {
        if c[0] == c[1] {
            1.0
        } else {
            0.0
        }
    });
    let k = TensorField::zeros(chart.clone(), &[n, n]);
    FundamentalForms::new(g, k, -1.0)
}

/// A flat timelike sheet: `g = diag(−1, 1, …, 1)` (an n-dimensional
/// Minkowski metric), `K = 0`, spacelike rigging (`λ = +1`).
///
/// # Errors
///
/// Propagates form validation (never fails for this data).
pub fn timelike_sheet_forms(chart: &GridChart) -> Result<FundamentalForms> {
    let n = chart.dim();
    let g = TensorField::from_fn(chart.clone(), &[n, n], |_, c| {
        if c[0] != c[1] {
            0.0
        } else if c[0] == 0 {
            -1.0
        } else {
            1.0
        }
    });
    let k = TensorField::zeros(chart.clone(), &[n, n]);
    FundamentalForms::new(g, k, 1.0)
}

/// Fundamental forms of the unit hyperboloid `{y·y = −1}` under the
/// parametrization `y = (cosh r, sinh r cos θ, sinh r sin θ)`:
/// `g = diag(1, sinh²r)`, `K = g` (umbilic), timelike rigging `λ = −1`
/// realized by the position vector itself.
///
/// # Errors
///
/// `BadParams` unless the chart is 2-dimensional with the `r`-interval
/// bounded away from 0 (the parametrization degenerates at the pole).
pub fn hyperboloid_forms(chart: &GridChart) -> Result<FundamentalForms> {
    if chart.dim() != 2 {
        return Err(Error::BadParams(format!(
            "hyperboloid_forms needs a 2-dimensional (r, theta) chart, got dimension {}",
            chart.dim()
        )));
    }
    let r = &chart.axes()[0];
    if r.min.min(r.max) <= 0.0 {
        return Err(Error::BadParams(format!(
            "hyperboloid_forms needs the r interval bounded away from 0, got [{}, {}]",
            r.min, r.max
        )));
    }
    let g = TensorField::from_fn(chart.clone(), &[2, 2], |x, c| match (c[0], c[1]) {
        (0, 0) => 1.0,
        (1, 1) => x[0].sinh().powi(2),
        _ => 0.0,
    });
    FundamentalForms::new(g.clone(), g, -1.0)
}

/// The exact embedding the hyperboloid forms come from; used to check that
/// reconstructions land on the quadric after alignment.
pub fn hyperboloid_embedding(x: &[f64]) -> Vec<f64> {
    let (r, th) = (x[0], x[1]);
    vec![r.cosh(), r.sinh() * th.cos(), r.sinh() * th.sin()]
}

/// The chart each fixture is usually sampled on: fixtures with a preferred
/// domain get it, the rest get the unit box, all with `samples` points per
/// axis.
///
/// # Errors
///
/// `UnknownFixture`; chart construction failures for `samples < 4`.
pub fn default_chart(name: &str, samples: usize) -> Result<GridChart> {
    match name {
        "minkowski" | "boosted_flat" | "desitter_slice" | "hyperplane_forms"
        | "timelike_sheet_forms" => GridChart::cube(2, 0.0, 1.0, samples),
        "rindler" => GridChart::new(vec![
            Axis::new("tau", 0.0, 1.0, samples),
            Axis::new("rho", 1.0, 2.0, samples),
        ]),
        "hyperboloid_forms" => GridChart::new(vec![
            Axis::new("r", 0.5, 1.5, samples),
            Axis::new("theta", 0.3, 1.5, samples),
        ]),
        _ => Err(Error::UnknownFixture { name: name.into() }),
    }
}

/// Run the named generator and bundle its fields with provenance metadata.
///
/// # Errors
///
/// `UnknownFixture` for names outside [`FIXTURE_NAMES`]; `BadParams` from the
/// individual generators.
pub fn generate_fixture(
    name: &str,
    chart: &GridChart,
    params: &FixtureParams,
) -> Result<FixtureOutput> {
    let mut metadata = BTreeMap::new();
    metadata.insert("generator".to_string(), name.to_string());
    let fields = match name {
        "minkowski" => vec![("g".to_string(), minkowski_metric(chart))],
        "boosted_flat" => {
            metadata.insert("rapidity".to_string(), params.rapidity.to_string());
            metadata.insert("anisotropy".to_string(), params.anisotropy.to_string());
            vec![(
                "g".to_string(),
                boosted_flat_metric(chart, params.rapidity, params.anisotropy)?,
            )]
        }
        "rindler" => vec![("g".to_string(), rindler_metric(chart)?)],
        "desitter_slice" => vec![("g".to_string(), desitter_metric(chart)?)],
        "hyperplane_forms" => forms_fields(hyperplane_forms(chart)?, &mut metadata),
        "timelike_sheet_forms" => forms_fields(timelike_sheet_forms(chart)?, &mut metadata),
        "hyperboloid_forms" => forms_fields(hyperboloid_forms(chart)?, &mut metadata),
        _ => return Err(Error::UnknownFixture { name: name.into() }),
    };
    Ok(FixtureOutput { fields, metadata })
}

fn forms_fields(
    forms: FundamentalForms,
    metadata: &mut BTreeMap<String, String>,
) -> Vec<(String, TensorField)> {
    metadata.insert("lambda".to_string(), forms.lambda().to_string());
    vec![
        ("g".to_string(), forms.g().clone()),
        ("K".to_string(), forms.k().clone()),
    ]
}
