//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tvflow_core::{Field, Grid2D};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(g: Grid2D, seed: u64) -> Field {
    let mut r = rng(seed);
    Field::from_index_fn(g, |_, _| r.gen_range(-1.0..1.0))
}

/// Field as an `ny x nx` matrix, row `j`, column `i`.
pub fn to_matrix(u: &Field) -> DMatrix<f64> {
    let g = u.grid();
    DMatrix::from_fn(g.ny(), g.nx(), |j, i| u.get(i, j))
}

pub fn from_matrix(g: Grid2D, m: &DMatrix<f64>) -> Field {
    Field::from_index_fn(g, |i, j| m[(j, i)])
}

/// Dense `n x n` circulant matrix with `row[k]` on offset `k - center`.
fn circulant(n: usize, taps: &[(isize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        for &(off, w) in taps {
            let c = (r as isize + off).rem_euclid(n as isize) as usize;
            m[(r, c)] += w;
        }
    }
    m
}

/// One-dimensional periodic difference matrices for spacing `h`.
pub struct Diff1d {
    pub fwd: DMatrix<f64>,
    pub bwd: DMatrix<f64>,
    pub second: DMatrix<f64>,
    pub centered: DMatrix<f64>,
}

impl Diff1d {
    pub fn new(n: usize, h: f64) -> Self {
        Diff1d {
            fwd: circulant(n, &[(1, 1.0 / h), (0, -1.0 / h)]),
            bwd: circulant(n, &[(0, 1.0 / h), (-1, -1.0 / h)]),
            second: circulant(
                n,
                &[(1, 1.0 / (h * h)), (0, -2.0 / (h * h)), (-1, 1.0 / (h * h))],
            ),
            centered: circulant(n, &[(1, 0.5 / h), (-1, -0.5 / h)]),
        }
    }
}

/// Dense matrices acting along x (from the right, transposed) and y (from the left).
pub struct DenseOps {
    pub x: Diff1d,
    pub y: Diff1d,
}

impl DenseOps {
    pub fn new(g: &Grid2D) -> Self {
        DenseOps {
            x: Diff1d::new(g.nx(), g.h()),
            y: Diff1d::new(g.ny(), g.h()),
        }
    }

    pub fn along_x(&self, m: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
        m * d.transpose()
    }

    pub fn along_y(&self, m: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
        d * m
    }
}

pub fn rel_err(a: &Field, b: &Field) -> f64 {
    a.max_abs_diff(b) / b.sup_norm().max(f64::MIN_POSITIVE)
}
