//! Discrete residual norms.
//!
//! All verification routines report the size of a residual field the same way:
//! a supremum norm plus a trapezoid-weighted discrete `L^p` norm, together with
//! labelled sub-residuals (one per equation family or component group) so a
//! failure can be localized. The pointwise magnitude of a residual is the
//! largest absolute component at that grid point, taken across every field
//! folded into the report; this keeps `lp_norm ≤ max_abs · volume^{1/p}` no
//! matter how many families contribute.

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::field::TensorField;
use serde::Serialize;

/// Norms of a residual field over a grid.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    /// Largest absolute residual component anywhere on the grid.
    pub max_abs: f64,
    /// Trapezoid-weighted discrete `L^p` norm of the pointwise magnitude.
    pub lp_norm: f64,
    /// The exponent used (`f64::INFINITY` reproduces `max_abs`).
    pub p: f64,
    /// Labelled sub-residuals (maximum absolute value per label).
    pub per_equation: Vec<(String, f64)>,
    /// The grid the residual was measured on.
    pub grid: GridChart,
}

impl ResidualReport {
    /// Sub-residual by label, if present.
    pub fn equation(&self, label: &str) -> Option<f64> {
        self.per_equation
            .iter()
            .find(|(l, _)| l == label)
            .map(|&(_, v)| v)
    }
}

/// Accumulates residual fields into one [`ResidualReport`].
pub struct ResidualBuilder {
    chart: GridChart,
    p: f64,
    /// Pointwise magnitude: max absolute component over everything added.
    mags: Vec<f64>,
    per_equation: Vec<(String, f64)>,
}

impl ResidualBuilder {
    /// Start a report over `chart` with exponent `p` (≥ 1, or `f64::INFINITY`).
    pub fn new(chart: &GridChart, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "norm exponent must satisfy p ≥ 1 (or be infinite), got {p}"
            )));
        }
        Ok(ResidualBuilder {
            chart: chart.clone(),
            p,
            mags: vec![0.0; chart.point_count()],
            per_equation: Vec::new(),
        })
    }

    /// Fold a residual field in: its components join the pointwise magnitude
    /// and its overall maximum is recorded under `label`.
    pub fn add_field(&mut self, label: impl Into<String>, field: &TensorField) -> Result<&mut Self> {
        self.chart.check_same(field.chart())?;
        for (lin, mag) in self.mags.iter_mut().enumerate() {
            for &v in field.comps_at(lin) {
                *mag = mag.max(v.abs());
            }
        }
        self.per_equation.push((label.into(), field.max_abs()));
        Ok(self)
    }

    /// Record an extra labelled scalar (e.g. a per-component maximum) without
    /// touching the norms.
    pub fn entry(&mut self, label: impl Into<String>, value: f64) -> &mut Self {
        self.per_equation.push((label.into(), value));
        self
    }

    /// Finish the report.
    pub fn finish(self) -> ResidualReport {
        let max_abs = self.mags.iter().fold(0.0f64, |m, &x| m.max(x));
        let lp_norm = if self.p.is_infinite() {
            max_abs
        } else {
            let mut sum = 0.0;
            for (lin, &mag) in self.mags.iter().enumerate() {
                if mag > 0.0 {
                    let w = self.chart.trapezoid_weight(&self.chart.multi_index(lin));
                    sum += w * mag.powf(self.p);
                }
            }
            sum.powf(1.0 / self.p)
        };
        ResidualReport {
            max_abs,
            lp_norm,
            p: self.p,
            per_equation: self.per_equation,
            grid: self.chart,
        }
    }
}
