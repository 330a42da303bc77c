//! Gridded tensor quantities.
//!
//! A [`TensorField`] stores one f64 per (grid point, component). Points run in
//! the chart's linear order (last axis fastest); within a point, components
//! run in row-major order over the component shape. A metric is a field of
//! component shape `[d, d]`, a map into `ℝ^d` has shape `[d]`, a Christoffel
//! array has shape `[d, d, d]`, and so on.

use crate::chart::GridChart;
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// A tensor-valued function sampled on a [`GridChart`].
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    chart: GridChart,
    comp_shape: Vec<usize>,
    data: Vec<f64>,
}

impl TensorField {
    /// Zero field with the given component shape.
    pub fn zeros(chart: GridChart, comp_shape: &[usize]) -> Self {
        let comps: usize = comp_shape.iter().product();
        assert!(comps > 0, "component shape must be non-empty and non-zero");
        let len = chart.point_count() * comps;
        TensorField {
            chart,
            comp_shape: comp_shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    /// Sample a closure `(coords, component multi-index) -> value` everywhere.
    pub fn from_fn(
        chart: GridChart,
        comp_shape: &[usize],
        mut f: impl FnMut(&[f64], &[usize]) -> f64,
    ) -> Self {
        let mut out = TensorField::zeros(chart, comp_shape);
        let comps = out.comp_count();
        let mut comp_multis = Vec::with_capacity(comps);
        for c in 0..comps {
            comp_multis.push(out.comp_multi(c));
        }
        for lin in 0..out.chart.point_count() {
            let x = out.chart.coord_of_lin(lin);
            for (c, cm) in comp_multis.iter().enumerate() {
                out.data[lin * comps + c] = f(&x, cm);
            }
        }
        out
    }

    /// Wrap raw storage. `data` must hold `point_count · comp_count` values in
    /// point-major, row-major-component order.
    pub fn from_data(chart: GridChart, comp_shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let comps: usize = comp_shape.iter().product();
        let expected = chart.point_count() * comps;
        if comps == 0 || data.len() != expected {
            return Err(Error::InvalidInput(format!(
                "field storage holds {} values but the chart and component shape {:?} need {}",
                data.len(),
                comp_shape,
                expected
            )));
        }
        Ok(TensorField {
            chart,
            comp_shape: comp_shape.to_vec(),
            data,
        })
    }

    /// The chart the field lives on.
    pub fn chart(&self) -> &GridChart {
        &self.chart
    }

    /// Component shape (e.g. `[d, d]` for a metric).
    pub fn comp_shape(&self) -> &[usize] {
        &self.comp_shape
    }

    /// Number of components per point.
    pub fn comp_count(&self) -> usize {
        self.comp_shape.iter().product()
    }

    /// Raw storage, point-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable raw storage, point-major.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row-major linear index of a component multi-index.
    pub fn comp_lin(&self, comp: &[usize]) -> usize {
        debug_assert_eq!(comp.len(), self.comp_shape.len());
        let mut lin = 0;
        for (&extent, &i) in self.comp_shape.iter().zip(comp) {
            debug_assert!(i < extent);
            lin = lin * extent + i;
        }
        lin
    }

    /// Component multi-index of a row-major linear component index.
    pub fn comp_multi(&self, mut lin: usize) -> Vec<usize> {
        let mut multi = vec![0; self.comp_shape.len()];
        for (k, &extent) in self.comp_shape.iter().enumerate().rev() {
            multi[k] = lin % extent;
            lin /= extent;
        }
        multi
    }

    /// Value at (linear point, linear component).
    #[inline]
    pub fn get(&self, point_lin: usize, comp_lin: usize) -> f64 {
        self.data[point_lin * self.comp_count() + comp_lin]
    }

    /// Overwrite the value at (linear point, linear component).
    #[inline]
    pub fn set(&mut self, point_lin: usize, comp_lin: usize, value: f64) {
        let comps = self.comp_count();
        self.data[point_lin * comps + comp_lin] = value;
    }

    /// Value at (point multi-index, component multi-index).
    pub fn at(&self, point: &[usize], comp: &[usize]) -> f64 {
        self.get(self.chart.lin_index(point), self.comp_lin(comp))
    }

    /// All components at one point, in row-major order.
    pub fn comps_at(&self, point_lin: usize) -> &[f64] {
        let comps = self.comp_count();
        &self.data[point_lin * comps..(point_lin + 1) * comps]
    }

    /// Overwrite all components at one point.
    pub fn set_comps_at(&mut self, point_lin: usize, values: &[f64]) {
        let comps = self.comp_count();
        assert_eq!(values.len(), comps);
        self.data[point_lin * comps..(point_lin + 1) * comps].copy_from_slice(values);
    }

    /// Components at one point as a matrix; the component shape must be 2-D.
    pub fn mat_at(&self, point_lin: usize) -> Mat {
        assert_eq!(
            self.comp_shape.len(),
            2,
            "mat_at needs a matrix-valued field, shape is {:?}",
            self.comp_shape
        );
        let (r, c) = (self.comp_shape[0], self.comp_shape[1]);
        let mut m = Mat::zeros(r, c);
        m.as_mut_slice().copy_from_slice(self.comps_at(point_lin));
        m
    }

    /// Overwrite the matrix of components at one point.
    pub fn set_mat_at(&mut self, point_lin: usize, m: &Mat) {
        assert_eq!(self.comp_shape.len(), 2);
        assert_eq!((m.rows(), m.cols()), (self.comp_shape[0], self.comp_shape[1]));
        self.set_comps_at(point_lin, m.as_slice());
    }

    /// Apply a function to every stored value.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            comp_shape: self.comp_shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Combine two fields valuewise. Charts and shapes must match exactly.
    pub fn zip_map(&self, other: &TensorField, mut f: impl FnMut(f64, f64) -> f64) -> Result<TensorField> {
        self.chart.check_same(&other.chart)?;
        if self.comp_shape != other.comp_shape {
            return Err(Error::ShapeMismatch {
                expected: self.comp_shape.clone(),
                got: other.comp_shape.clone(),
            });
        }
        Ok(TensorField {
            chart: self.chart.clone(),
            comp_shape: self.comp_shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest absolute value over all points and components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Error when any stored value is non-finite, reporting the first offender.
    pub fn check_finite(&self) -> Result<()> {
        let comps = self.comp_count();
        for (i, x) in self.data.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteState {
                    point: self.chart.multi_index(i / comps),
                });
            }
        }
        Ok(())
    }

    /// For a matrix-valued field with square components: the worst asymmetry
    /// `|a_ij − a_ji|` over all points.
    pub fn max_matrix_asymmetry(&self) -> f64 {
        assert_eq!(self.comp_shape.len(), 2);
        assert_eq!(self.comp_shape[0], self.comp_shape[1]);
        let mut worst = 0.0f64;
        for lin in 0..self.chart.point_count() {
            worst = worst.max(self.mat_at(lin).max_asymmetry());
        }
        worst
    }
}
