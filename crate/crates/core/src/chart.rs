//! Uniform rectangular grids over coordinate boxes.
//!
//! A [`GridChart`] is a product of closed intervals, each sampled uniformly.
//! Points are addressed either by a multi-index (one sample index per axis) or
//! by a linear index in lexicographic order with the **last axis fastest**
//! (C order); every gridded quantity in this crate stores its samples in that
//! order.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// One uniformly sampled coordinate interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    /// Coordinate name (used in file headers and reports).
    pub name: String,
    /// Lower end of the interval.
    pub min: f64,
    /// Upper end of the interval.
    pub max: f64,
    /// Number of samples, endpoints included.
    pub samples: usize,
}

impl Axis {
    /// Convenience constructor.
    pub fn new(name: impl Into<String>, min: f64, max: f64, samples: usize) -> Self {
        Axis {
            name: name.into(),
            min,
            max,
            samples,
        }
    }

    /// Distance between adjacent samples.
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.samples - 1) as f64
    }
}

/// A uniform grid over a box `[min₀, max₀] × … × [min_{m−1}, max_{m−1}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridChart {
    axes: Vec<Axis>,
}

impl GridChart {
    /// Validate and build a chart.
    ///
    /// # Errors
    ///
    /// `InvalidInput` when there are no axes, an axis has fewer than 4 samples
    /// (the difference stencils need that many points), a bound is not finite,
    /// or `min ≥ max`.
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("a chart needs at least one axis".into()));
        }
        for (k, ax) in axes.iter().enumerate() {
            if !ax.min.is_finite() || !ax.max.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "axis {} (`{}`) has non-finite bounds",
                    k, ax.name
                )));
            }
            if ax.min >= ax.max {
                return Err(Error::InvalidInput(format!(
                    "axis {} (`{}`) needs min < max, got [{}, {}]",
                    k, ax.name, ax.min, ax.max
                )));
            }
            if ax.samples < 4 {
                return Err(Error::InvalidInput(format!(
                    "axis {} (`{}`) has {} samples; at least 4 are required",
                    k, ax.name, ax.samples
                )));
            }
        }
        Ok(GridChart { axes })
    }

    /// Shorthand: same interval and sample count on every axis.
    pub fn cube(dim: usize, min: f64, max: f64, samples: usize) -> Result<Self> {
        GridChart::new(
            (0..dim)
                .map(|k| Axis::new(format!("x{k}"), min, max, samples))
                .collect(),
        )
    }

    /// Number of coordinate axes.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// The axes, in order.
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Sample count per axis.
    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.samples).collect()
    }

    /// Sample count along one axis.
    pub fn samples(&self, axis: usize) -> usize {
        self.axes[axis].samples
    }

    /// Grid spacing along one axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.axes[axis].spacing()
    }

    /// Total number of grid points.
    pub fn point_count(&self) -> usize {
        self.axes.iter().map(|a| a.samples).product()
    }

    /// Linear index of a multi-index (last axis fastest).
    pub fn lin_index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        let mut lin = 0;
        for (ax, &i) in self.axes.iter().zip(multi) {
            debug_assert!(i < ax.samples);
            lin = lin * ax.samples + i;
        }
        lin
    }

    /// Multi-index of a linear index (inverse of [`Self::lin_index`]).
    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim()];
        for (k, ax) in self.axes.iter().enumerate().rev() {
            multi[k] = lin % ax.samples;
            lin /= ax.samples;
        }
        multi
    }

    /// Coordinates of a grid point.
    pub fn coord(&self, multi: &[usize]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(multi)
            .map(|(ax, &i)| ax.min + i as f64 * ax.spacing())
            .collect()
    }

    /// Coordinates of a grid point given its linear index.
    pub fn coord_of_lin(&self, lin: usize) -> Vec<f64> {
        self.coord(&self.multi_index(lin))
    }

    /// The midmost grid point (`samples/2` on every axis), used as the default
    /// anchor for integration constants and alignment.
    pub fn center_index(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.samples / 2).collect()
    }

    /// Iterate over all multi-indices in linear order.
    pub fn multi_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.point_count()).map(|lin| self.multi_index(lin))
    }

    /// Trapezoid quadrature weight of a grid point: the product over axes of
    /// the spacing, halved at interval endpoints. Summing `w(x)·f(x)` over the
    /// grid approximates `∫ f` over the box.
    pub fn trapezoid_weight(&self, multi: &[usize]) -> f64 {
        self.axes
            .iter()
            .zip(multi)
            .map(|(ax, &i)| {
                let edge = i == 0 || i + 1 == ax.samples;
                ax.spacing() * if edge { 0.5 } else { 1.0 }
            })
            .product()
    }

    /// Volume of the coordinate box.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.max - a.min).product()
    }

    /// Error unless `other` describes the same grid exactly.
    pub fn check_same(&self, other: &GridChart) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ChartMismatch)
        }
    }
}
