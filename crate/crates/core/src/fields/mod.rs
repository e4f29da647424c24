//! Grid conventions and field containers.
//!
//! Samples live at cell centers of an `n x n` pixel grid covering
//! `[-1, 1]^2`. Column index `i` runs along `x` (left to right), row index
//! `j` runs along `y` (bottom to top); storage is row-major with rows in
//! ascending `y`.

mod csv;
mod geometry;

use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;

pub use self::csv::{parse_field, read_field, render_field, write_field};
pub use self::geometry::{Direction, StarBranch, StarGeometry, VLineGeometry};
use crate::error::{Result, VltError};

/// Smallest supported grid size.
pub const MIN_GRID: usize = 8;

/// Uniform square grid on `[-extent, extent]^2` with `extent = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const EXTENT: f64 = 1.0;

    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_GRID {
            return Err(VltError::InvalidGrid(format!(
                "n must be at least {MIN_GRID}, got {n}"
            )));
        }
        Ok(Grid { n })
    }

    /// For internal use where the size has already been validated, and for
    /// tiny grids in tests of boundary handling.
    pub(crate) fn unchecked(n: usize) -> Self {
        Grid { n }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Pixel side length.
    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * Self::EXTENT / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// x coordinate of the center of column `i` (0-based).
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -Self::EXTENT + (i as f64 + 0.5) * self.h()
    }

    /// y coordinate of the center of row `j` (0-based).
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        -Self::EXTENT + (j as f64 + 0.5) * self.h()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }
}

/// Validates that all operands share one grid; panics otherwise.
///
/// Mixing grids is a programming error inside the pipeline; the fallible
/// entry points check with [`ScalarField::ensure_same_grid`] first.
#[inline]
#[track_caller]
fn assert_same(a: &Grid, b: &Grid) {
    assert_eq!(a.n, b.n, "fields live on different grids");
}

/// Real samples at the cell centers of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Builds a field from row-major samples, rejecting NaN and infinities.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(VltError::InvalidGrid(format!(
                "expected {} samples for n={}, got {}",
                grid.len(),
                grid.n(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(VltError::NonFinite {
                i: k % grid.n(),
                j: k / grid.n(),
                value: values[k],
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    /// Samples `f(x, y)` at every cell center.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let y = grid.y(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(i), y);
            }
        });
        ScalarField { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn ensure_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(VltError::GridMismatch {
                left: self.n(),
                right: other.n(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    #[track_caller]
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_same(&self.grid, &other.grid);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ScalarField::from_raw(self.grid, values)
    }

    /// `alpha * self + beta * other`.
    #[track_caller]
    pub fn lincomb(&self, alpha: f64, other: &ScalarField, beta: f64) -> ScalarField {
        self.zip_map(other, |a, b| alpha * a + beta * b)
    }

    pub fn scale(&self, alpha: f64) -> ScalarField {
        self.map(|v| alpha * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn rms(&self) -> f64 {
        let ss: f64 = self.values.iter().map(|v| v * v).sum();
        (ss / self.values.len() as f64).sqrt()
    }

    /// Replaces every sample whose cell center lies outside the disc of the
    /// given radius (centered at the origin) by zero.
    pub fn mask_disc(&self, radius: f64) -> ScalarField {
        let grid = self.grid;
        let r2 = radius * radius;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (x, y) = (grid.x(k % grid.n()), grid.y(k / grid.n()));
                if x * x + y * y <= r2 {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        ScalarField::from_raw(grid, values)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

/// Vector field `g = (g1, g2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    c1: ScalarField,
    c2: ScalarField,
}

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField) -> Result<Self> {
        c1.ensure_same_grid(&c2)?;
        Ok(VectorField { c1, c2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField {
            c1: ScalarField::zeros(grid),
            c2: ScalarField::zeros(grid),
        }
    }

    pub(crate) fn from_parts(c1: ScalarField, c2: ScalarField) -> Self {
        assert_same(&c1.grid, &c2.grid);
        VectorField { c1, c2 }
    }

    pub fn c1(&self) -> &ScalarField {
        &self.c1
    }

    pub fn c2(&self) -> &ScalarField {
        &self.c2
    }

    pub fn grid(&self) -> Grid {
        self.c1.grid
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField) {
        (self.c1, self.c2)
    }
}

/// Symmetric 2-tensor field; `f21` is `f12` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensorField {
    f11: ScalarField,
    f12: ScalarField,
    f22: ScalarField,
}

/// Names of the three stored tensor components, in storage order.
pub const TENSOR_COMPONENTS: [&str; 3] = ["f11", "f12", "f22"];

impl SymTensorField {
    pub fn new(f11: ScalarField, f12: ScalarField, f22: ScalarField) -> Result<Self> {
        f11.ensure_same_grid(&f12)?;
        f11.ensure_same_grid(&f22)?;
        Ok(SymTensorField { f11, f12, f22 })
    }

    pub(crate) fn from_parts(f11: ScalarField, f12: ScalarField, f22: ScalarField) -> Self {
        assert_same(&f11.grid, &f12.grid);
        assert_same(&f11.grid, &f22.grid);
        SymTensorField { f11, f12, f22 }
    }

    pub fn zeros(grid: Grid) -> Self {
        SymTensorField::from_parts(
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        )
    }

    pub fn f11(&self) -> &ScalarField {
        &self.f11
    }

    pub fn f12(&self) -> &ScalarField {
        &self.f12
    }

    pub fn f22(&self) -> &ScalarField {
        &self.f22
    }

    pub fn grid(&self) -> Grid {
        self.f11.grid
    }

    /// Components in storage order `(f11, f12, f22)`.
    pub fn components(&self) -> [&ScalarField; 3] {
        [&self.f11, &self.f12, &self.f22]
    }

    pub fn into_parts(self) -> (ScalarField, ScalarField, ScalarField) {
        (self.f11, self.f12, self.f22)
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> SymTensorField {
        SymTensorField::from_parts(f(&self.f11), f(&self.f12), f(&self.f22))
    }

    pub fn lincomb(&self, alpha: f64, other: &SymTensorField, beta: f64) -> SymTensorField {
        SymTensorField::from_parts(
            self.f11.lincomb(alpha, &other.f11, beta),
            self.f12.lincomb(alpha, &other.f12, beta),
            self.f22.lincomb(alpha, &other.f22, beta),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing() {
        assert_eq!(Grid::new(512).unwrap().h(), 0.00390625);
        assert_eq!(Grid::new(160).unwrap().h(), 0.0125);
        assert!(matches!(Grid::new(4), Err(VltError::InvalidGrid(_))));
    }

    #[test]
    fn centers_hug_the_boundary() {
        for n in [8, 9, 31, 160, 512] {
            let g = Grid::new(n).unwrap();
            let h = g.h();
            assert!((g.x(0) - (-1.0 + h / 2.0)).abs() < 1e-15);
            assert!((g.x(n - 1) - (1.0 - h / 2.0)).abs() < 1e-14);
            assert!((g.y(n - 1) - (1.0 - h / 2.0)).abs() < 1e-14);
            assert!((h * n as f64 - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(8).unwrap();
        let mut v = vec![0.0; 64];
        v[8 * 3 + 2] = f64::NAN;
        match ScalarField::from_values(g, v) {
            Err(VltError::NonFinite { i, j, .. }) => assert_eq!((i, j), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn component_grids_must_agree() {
        let a = ScalarField::zeros(Grid::new(8).unwrap());
        let b = ScalarField::zeros(Grid::new(9).unwrap());
        assert!(VectorField::new(a.clone(), b.clone()).is_err());
        assert!(SymTensorField::new(a.clone(), a, b).is_err());
    }

    #[test]
    fn disc_mask_keeps_interior() {
        let g = Grid::new(16).unwrap();
        let m = ScalarField::constant(g, 1.0).mask_disc(0.5);
        assert_eq!(m.get(8, 8), 1.0);
        assert_eq!(m.get(0, 0), 0.0);
    }
}
