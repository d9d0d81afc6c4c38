//! Uniform Cartesian grids on `[-L, L]^d` and cell-centered fields.
//!
//! Cells are stored row-major: in 2D the flat index of cell `(i0, i1)` is
//! `i0 * N + i1`, so axis 1 is the fast axis.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("need at least 8 cells per axis, got {0}")]
    TooFewCells(usize),
    #[error("half width must be positive and finite, got {0}")]
    BadHalfWidth(f64),
    #[error("field has {got} values but the grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },
    #[error("localizer radius {radius} plus unit bridge does not fit in box of half width {half_width}")]
    LocalizerExceedsBox { radius: f64, half_width: f64 },
    #[error("field `{name}` has a negative or non-finite value {value} at cell {index}")]
    NegativeValue {
        name: &'static str,
        index: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    cells_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::UnsupportedDimension(dim));
        }
        if cells_per_axis < 8 {
            return Err(GridError::TooFewCells(cells_per_axis));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(GridError::BadHalfWidth(half_width));
        }
        Ok(Self {
            dim,
            half_width,
            cells_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.cells_per_axis as f64
    }

    /// Volume of one cell, `dx^d`.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell center along one axis for axis index `k`.
    pub fn center(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.dx()
    }

    /// Flat-index stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        debug_assert!(axis < self.dim);
        if self.dim == 2 && axis == 0 {
            self.cells_per_axis
        } else {
            1
        }
    }

    /// Per-axis index of a flat cell index.
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.cells_per_axis
    }

    /// Cell center coordinates; the second entry is 0 in 1D.
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (axis, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = self.center(self.axis_index(idx, axis));
        }
        x
    }

    pub fn radius_sq(&self, idx: usize) -> f64 {
        let x = self.coords(idx);
        x[0] * x[0] + x[1] * x[1]
    }

    /// Neighbours of `idx` along `axis`: (lower, upper), `None` at the box edge.
    #[inline]
    pub fn neighbours(&self, idx: usize, axis: usize) -> (Option<usize>, Option<usize>) {
        let s = self.stride(axis);
        let k = self.axis_index(idx, axis);
        let lo = if k > 0 { Some(idx - s) } else { None };
        let hi = if k + 1 < self.cells_per_axis {
            Some(idx + s)
        } else {
            None
        };
        (lo, hi)
    }
}

/// Scalar cell-centered field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Like [`Field::from_values`] but also requires every value to be finite and `>= 0`.
    pub fn nonnegative(
        grid: Grid,
        values: Vec<f64>,
        name: &'static str,
    ) -> Result<Self, GridError> {
        let field = Self::from_values(grid, values)?;
        field.check_nonnegative(name)?;
        Ok(field)
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.coords(i))).collect();
        Self { grid, values }
    }

    pub fn check_nonnegative(&self, name: &'static str) -> Result<(), GridError> {
        match self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
        {
            Some((index, &value)) => Err(GridError::NegativeValue { name, index, value }),
            None => Ok(()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.values.len(), other.values.len());
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemann sum `Σ v · dx^d`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `Σ |v| · dx^d`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    /// `Σ v · w · dx^d`.
    pub fn weighted_integral(&self, weight: &Field) -> f64 {
        self.values
            .iter()
            .zip(&weight.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for Field {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Cell-centered vector field: one [`Field`] per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Field>,
}

impl VectorField {
    pub fn new(components: Vec<Field>) -> Self {
        debug_assert!(!components.is_empty());
        debug_assert_eq!(components.len(), components[0].grid().dim());
        Self { components }
    }

    pub fn component(&self, axis: usize) -> &Field {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Field] {
        &self.components
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn neg(&self) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.map(|v| -v)).collect(),
        }
    }

    /// Pointwise `|v|^2`.
    pub fn norm_sq(&self) -> Field {
        let mut out = Field::zeros(*self.grid());
        for c in &self.components {
            for (o, v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v * v;
            }
        }
        out
    }

    /// Largest Euclidean magnitude over all cells.
    pub fn max_norm(&self) -> f64 {
        self.norm_sq().max().sqrt()
    }
}
