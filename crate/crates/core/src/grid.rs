//! Cylindrical grids, density fields and Fourier feature sets.

use serde::{Deserialize, Serialize};

use crate::model::{Validate, ValidationError};
use crate::scalar::Scalar;

/// Uniform, cell-centred grid in the (R, z) half plane of an axisymmetric
/// problem.
///
/// Cell `(j, k)` has its centre at `R_j = (j + 1/2)·d_r` and
/// `z_k = (k + 1/2)·d_z − n_z·d_z/2`, so every radius is strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylGrid<S> {
    pub n_r: usize,
    pub n_z: usize,
    pub d_r: S,
    pub d_z: S,
}

impl<S: Scalar> CylGrid<S> {
    pub fn new(n_r: usize, n_z: usize, d_r: S, d_z: S) -> Result<Self, ValidationError> {
        let grid = Self { n_r, n_z, d_r, d_z };
        grid.validate()?;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index; rows are radial.
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_z + k
    }

    pub fn radius(&self, j: usize) -> S {
        (S::of_usize(j) + S::of(0.5)) * self.d_r
    }

    pub fn axial(&self, k: usize) -> S {
        (S::of_usize(k) + S::of(0.5)) * self.d_z - S::of_usize(self.n_z) * self.d_z / S::of(2.0)
    }

    /// Iterate `(flat_index, R_j, z_k)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, S, S)> + '_ {
        (0..self.n_r).flat_map(move |j| {
            let r = self.radius(j);
            (0..self.n_z).map(move |k| (self.index(j, k), r, self.axial(k)))
        })
    }
}

impl<S: Scalar> Validate for CylGrid<S> {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.n_r == 0 {
            return Err(ValidationError::new("grid.n_r", "must be at least 1"));
        }
        if self.n_z == 0 {
            return Err(ValidationError::new("grid.n_z", "must be at least 1"));
        }
        if !(self.d_r.is_finite() && self.d_r > S::zero()) {
            return Err(ValidationError::new("grid.d_r", "must be finite and positive"));
        }
        if !(self.d_z.is_finite() && self.d_z > S::zero()) {
            return Err(ValidationError::new("grid.d_z", "must be finite and positive"));
        }
        Ok(())
    }
}

/// Non-negative density (g/cc) sampled on a [`CylGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField<S> {
    pub grid: CylGrid<S>,
    pub values: Vec<S>,
}

impl<S: Scalar> DensityField<S> {
    pub fn new(grid: CylGrid<S>, values: Vec<S>) -> Result<Self, ValidationError> {
        let field = Self { grid, values };
        field.validate()?;
        Ok(field)
    }

    pub fn filled(grid: CylGrid<S>, value: S) -> Result<Self, ValidationError> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn get(&self, j: usize, k: usize) -> S {
        self.values[self.grid.index(j, k)]
    }

    /// Field with every value multiplied by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }
}

impl<S: Scalar> Validate for DensityField<S> {
    fn validate(&self) -> Result<(), ValidationError> {
        self.grid.validate()?;
        if self.values.len() != self.grid.len() {
            return Err(ValidationError::new(
                "values",
                format!(
                    "expected {} values for a {}x{} grid, got {}",
                    self.grid.len(),
                    self.grid.n_r,
                    self.grid.n_z,
                    self.values.len()
                ),
            ));
        }
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= S::zero()))
        {
            return Err(ValidationError::new(
                format!("values[{i}]"),
                format!("density must be finite and non-negative, got {v}"),
            ));
        }
        Ok(())
    }
}

/// Fourier coefficients of the shock and edge curves at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet<S> {
    pub shock: Vec<S>,
    pub edge: Vec<S>,
}

impl<S: Scalar> Validate for FeatureSet<S> {
    fn validate(&self) -> Result<(), ValidationError> {
        if self.shock.len() != self.edge.len() {
            return Err(ValidationError::new(
                "edge",
                format!(
                    "shock has {} coefficients but edge has {}",
                    self.shock.len(),
                    self.edge.len()
                ),
            ));
        }
        for (name, coeffs) in [("shock", &self.shock), ("edge", &self.edge)] {
            if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
                return Err(ValidationError::new(
                    format!("{name}[{i}]"),
                    "coefficient must be finite",
                ));
            }
        }
        Ok(())
    }
}
