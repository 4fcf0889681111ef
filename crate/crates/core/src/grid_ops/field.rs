use std::ops::{Add, Mul, Sub};

use crate::error::{param, Error, Result};

/// Grid direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Periodic rectangular lattice with square cells of side `h`.
///
/// Node `(i, j)` sits at `(origin.0 + i h, origin.1 + j h)`; `i` runs along x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    h: f64,
    origin: (f64, f64),
}

impl Grid2D {
    pub const MIN_POINTS: usize = 4;

    pub fn new(nx: usize, ny: usize, h: f64) -> Result<Self> {
        Self::with_origin(nx, ny, h, (0.0, 0.0))
    }

    pub fn with_origin(nx: usize, ny: usize, h: f64, origin: (f64, f64)) -> Result<Self> {
        if nx < Self::MIN_POINTS || ny < Self::MIN_POINTS {
            return Err(param(
                "grid",
                format!(
                    "need at least {} points per axis, got {nx}x{ny}",
                    Self::MIN_POINTS
                ),
            ));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(param("h", format!("spacing must be positive, got {h}")));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(param("origin", "must be finite"));
        }
        Ok(Grid2D { nx, ny, h, origin })
    }

    /// Grid covering `[a, b] x [c, d]` with `nx x ny` nodes. The two
    /// directions must give the same spacing.
    pub fn from_domain(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        let hx = (x.1 - x.0) / nx as f64;
        let hy = (y.1 - y.0) / ny as f64;
        if (hx - hy).abs() > 1e-12 * hx.abs().max(hy.abs()) {
            return Err(param(
                "grid",
                format!("cells must be square, got hx = {hx}, hy = {hy}"),
            ));
        }
        Self::with_origin(nx, ny, hx, (x.0, y.0))
    }

    /// `n x n` grid on the unit square, `h = 1/n`.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0 / n as f64)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.h
    }

    /// Number of points along `axis`.
    pub fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Flat index of node `(i + di, j + dj)` with periodic wrap.
    #[inline]
    pub fn wrapped(&self, i: usize, j: usize, di: isize, dj: isize) -> usize {
        let ii = (i as isize + di).rem_euclid(self.nx as isize) as usize;
        let jj = (j as isize + dj).rem_euclid(self.ny as isize) as usize;
        ii + jj * self.nx
    }

    /// Same grid with the axes swapped.
    pub fn transposed(&self) -> Grid2D {
        Grid2D {
            nx: self.ny,
            ny: self.nx,
            h: self.h,
            origin: (self.origin.1, self.origin.0),
        }
    }
}

/// Scalar grid function stored with x-contiguous rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Checked constructor: length must match and every value must be finite.
    pub fn from_vec(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let f = Field { grid, values };
        f.check_finite()?;
        Ok(f)
    }

    pub(crate) fn from_raw(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    /// Evaluate `f(x, y)` at every node.
    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        Self::from_index_fn(grid, |i, j| f(grid.x(i), grid.y(j)))
    }

    /// Nodes are visited x-fastest, so stateful closures see a fixed order.
    pub fn from_index_fn(grid: Grid2D, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(i, j));
            }
        }
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite {
                i: k % self.grid.nx,
                j: k / self.grid.nx,
            }),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(
            0.0_f64,
            |m, v| {
                if v.is_nan() {
                    f64::NAN
                } else {
                    m.max(v.abs())
                }
            },
        )
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Plain Euclidean inner product of the node values.
    pub fn dot(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Cyclic shift: output(i + a, j + b) = self(i, j).
    pub fn shifted(&self, a: isize, b: isize) -> Field {
        let g = self.grid;
        Field::from_index_fn(g, |i, j| self.values[g.wrapped(i, j, -a, -b)])
    }

    /// output(i, j) = self(j, i) on the transposed grid.
    pub fn transposed(&self) -> Field {
        let gt = self.grid.transposed();
        Field::from_index_fn(gt, |i, j| self.get(j, i))
    }

    /// Copy of grid line `line` along `axis`.
    pub fn line(&self, axis: Axis, line: usize) -> Vec<f64> {
        match axis {
            Axis::X => {
                let start = self.grid.idx(0, line);
                self.values[start..start + self.grid.nx].to_vec()
            }
            Axis::Y => (0..self.grid.ny).map(|j| self.get(line, j)).collect(),
        }
    }

    pub fn set_line(&mut self, axis: Axis, line: usize, data: &[f64]) {
        match axis {
            Axis::X => {
                let start = self.grid.idx(0, line);
                self.values[start..start + self.grid.nx].copy_from_slice(data);
            }
            Axis::Y => {
                for (j, &v) in data.iter().enumerate() {
                    self.set(line, j, v);
                }
            }
        }
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, s: f64) -> Field {
        self.map(|a| a * s)
    }
}

/// Pair of fields on one grid, e.g. a discrete gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct VecField {
    pub x: Field,
    pub y: Field,
}

impl VecField {
    pub fn new(x: Field, y: Field) -> Result<Self> {
        if x.grid() != y.grid() {
            return Err(Error::GridMismatch(
                "vector field components live on different grids".into(),
            ));
        }
        Ok(VecField { x, y })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        VecField {
            x: Field::zeros(grid),
            y: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.x.grid()
    }

    pub fn dot(&self, other: &VecField) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }
}

/// Boolean grid function, e.g. an inpainting domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
}

impl Mask {
    pub fn new(nx: usize, ny: usize, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != nx * ny {
            return Err(Error::GridMismatch(format!(
                "mask has {} entries, expected {}",
                inside.len(),
                nx * ny
            )));
        }
        Ok(Mask { nx, ny, inside })
    }

    pub fn filled(grid: &Grid2D, value: bool) -> Self {
        Mask {
            nx: grid.nx(),
            ny: grid.ny(),
            inside: vec![value; grid.len()],
        }
    }

    pub fn from_index_fn(grid: &Grid2D, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut inside = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                inside.push(f(i, j));
            }
        }
        Mask {
            nx: grid.nx(),
            ny: grid.ny(),
            inside,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.inside[j * self.nx + i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn matches(&self, grid: &Grid2D) -> bool {
        self.nx == grid.nx() && self.ny == grid.ny()
    }

    pub fn transposed(&self) -> Mask {
        let mut inside = Vec::with_capacity(self.inside.len());
        for j in 0..self.nx {
            for i in 0..self.ny {
                inside.push(self.get(j, i));
            }
        }
        Mask {
            nx: self.ny,
            ny: self.nx,
            inside,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_rectangular_grids() {
        assert!(Grid2D::new(3, 8, 0.1).is_err());
        assert!(Grid2D::new(8, 8, 0.0).is_err());
        assert!(Grid2D::from_domain(10, 20, (0.0, 1.0), (0.0, 1.0)).is_err());
        let g = Grid2D::from_domain(10, 20, (0.0, 1.0), (0.0, 2.0)).unwrap();
        assert_eq!(g.h(), 0.1);
    }

    #[test]
    fn from_vec_validates() {
        let g = Grid2D::unit_square(4).unwrap();
        assert!(Field::from_vec(g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        match Field::from_vec(g, v) {
            Err(Error::NonFinite { i, j }) => assert_eq!((i, j), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_and_transpose() {
        let g = Grid2D::new(5, 4, 1.0).unwrap();
        let f = Field::from_index_fn(g, |i, j| (10 * j + i) as f64);
        let s = f.shifted(1, 2);
        assert_eq!(s.get(1, 2), f.get(0, 0));
        assert_eq!(s.get(0, 1), f.get(4, 3));
        let t = f.transposed();
        assert_eq!(t.grid().nx(), 4);
        assert_eq!(t.get(3, 2), f.get(2, 3));
        assert_eq!(t.transposed(), f);
    }

    #[test]
    fn lines_round_trip() {
        let g = Grid2D::new(5, 6, 1.0).unwrap();
        let f = Field::from_index_fn(g, |i, j| (i * 7 + j) as f64);
        let mut h = Field::zeros(g);
        for i in 0..5 {
            h.set_line(Axis::Y, i, &f.line(Axis::Y, i));
        }
        assert_eq!(h, f);
        assert_eq!(
            f.line(Axis::X, 2),
            (0..5).map(|i| f.get(i, 2)).collect::<Vec<_>>()
        );
    }
}
