//! Cyclic banded line systems and the per-line assembly of the ADI stages.
//!
//! A cyclic banded matrix is factored by taking the last `2b` unknowns as a
//! separator: the remaining principal block is an ordinary banded matrix
//! (no wrap-around), factored by band LU, and the separator is resolved by
//! a small dense Schur complement with partial pivoting. Cost is O(n b^2)
//! per line.

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::grid_ops::{Axis, Field, Grid2D};

/// Square matrix whose row `i` couples unknowns `i - b ..= i + b` (mod n).
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicBanded {
    n: usize,
    bandwidth: usize,
    /// Row-major `n x (2b + 1)`; entry `k` of row `i` multiplies `x[i + k - b]`.
    bands: Vec<f64>,
}

impl CyclicBanded {
    pub fn zeros(n: usize, bandwidth: usize) -> Result<Self> {
        if !(1..=2).contains(&bandwidth) {
            return Err(param(
                "bandwidth",
                format!("must be 1 or 2, got {bandwidth}"),
            ));
        }
        if n < 2 * bandwidth + 1 {
            return Err(param(
                "n",
                format!("line length {n} too short for bandwidth {bandwidth}"),
            ));
        }
        Ok(CyclicBanded {
            n,
            bandwidth,
            bands: vec![0.0; n * (2 * bandwidth + 1)],
        })
    }

    pub fn identity(n: usize, bandwidth: usize) -> Result<Self> {
        let mut a = Self::zeros(n, bandwidth)?;
        for i in 0..n {
            a.add(i, 0, 1.0);
        }
        Ok(a)
    }

    /// Build from rows given as `2b + 1` coefficients each.
    pub fn from_rows(bandwidth: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut a = Self::zeros(rows.len(), bandwidth)?;
        let w = 2 * bandwidth + 1;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != w {
                return Err(param(
                    "bands",
                    format!("row {i} has {} entries, need {w}", row.len()),
                ));
            }
            a.bands[i * w..(i + 1) * w].copy_from_slice(row);
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn bands(&self) -> &[f64] {
        &self.bands
    }

    fn width(&self) -> usize {
        2 * self.bandwidth + 1
    }

    /// Coefficient of row `i` on unknown `i + offset`.
    pub fn get(&self, i: usize, offset: isize) -> f64 {
        let b = self.bandwidth as isize;
        debug_assert!(offset.abs() <= b);
        self.bands[i * self.width() + (offset + b) as usize]
    }

    pub fn add(&mut self, i: usize, offset: isize, v: f64) {
        let b = self.bandwidth as isize;
        debug_assert!(offset.abs() <= b);
        let w = self.width();
        self.bands[i * w + (offset + b) as usize] += v;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, &v) in d.iter().enumerate() {
            self.add(i, 0, v);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.bands.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn col(&self, i: usize, k: usize) -> usize {
        (i + self.n + k - self.bandwidth) % self.n
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let w = self.width();
        (0..self.n)
            .map(|i| {
                (0..w)
                    .map(|k| self.bands[i * w + k] * x[self.col(i, k)])
                    .sum()
            })
            .collect()
    }

    /// Dense row-major copy; wrap-around entries are summed when `n` is small.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        let w = self.width();
        for (i, row) in d.iter_mut().enumerate() {
            for k in 0..w {
                row[self.col(i, k)] += self.bands[i * w + k];
            }
        }
        d
    }

    pub fn factor(&self) -> Result<CyclicBandedLu> {
        CyclicBandedLu::new(self)
    }
}

/// Factorisation of a [`CyclicBanded`] matrix, reusable across right-hand sides.
///
/// The band-plus-separator elimination runs without pivoting. If it meets a
/// tiny pivot the matrix is refactored densely with partial pivoting.
#[derive(Clone, Debug)]
pub struct CyclicBandedLu {
    n: usize,
    kind: LuKind,
}

#[derive(Clone, Debug)]
enum LuKind {
    Banded(BandedSchur),
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl CyclicBandedLu {
    fn new(a: &CyclicBanded) -> Result<Self> {
        let kind = match BandedSchur::new(a) {
            Ok(f) => LuKind::Banded(f),
            Err(Error::Singular { .. }) => LuKind::Dense(dense_lu(a)?),
            Err(e) => return Err(e),
        };
        Ok(CyclicBandedLu { n: a.n, kind })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        match &self.kind {
            LuKind::Banded(f) => f.solve_in_place(x),
            LuKind::Dense(lu) => {
                let mut v = nalgebra::DVector::from_column_slice(x);
                lu.solve_mut(&mut v);
                x.copy_from_slice(v.as_slice());
            }
        }
    }
}

fn dense_lu(a: &CyclicBanded) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    let rows = a.to_dense();
    let n = a.n;
    let lu = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]).lu();
    let tiny = a.max_abs() * 1e-14;
    let u = lu.u();
    for k in 0..n {
        let d = u[(k, k)];
        if d.abs() <= tiny || !d.is_finite() {
            return Err(Error::Singular { pivot: k });
        }
    }
    Ok(lu)
}

#[derive(Clone, Debug)]
struct BandedSchur {
    b: usize,
    /// Size of the banded interior block.
    m: usize,
    /// Band LU of the interior, `m x (2b + 1)`; unit lower factor stored below the diagonal.
    lu: Vec<f64>,
    /// `A_II^{-1} A_IS`, row-major `m x 2b`.
    w: Vec<f64>,
    /// Separator rows restricted to interior columns, as `(row, col, value)`.
    a_si: Vec<(usize, usize, f64)>,
    /// LU of the Schur complement (row-major `2b x 2b`) with its row permutation.
    schur: Vec<f64>,
    perm: Vec<usize>,
}

impl BandedSchur {
    fn new(a: &CyclicBanded) -> Result<Self> {
        let n = a.n;
        let b = a.bandwidth;
        let s = 2 * b;
        let m = n - s;
        let wd = a.width();
        let scale = a.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Singular { pivot: 0 });
        }
        let tiny = scale * 1e-14;

        // Split A into A_II (banded), A_IS, A_SI, A_SS.
        let mut lu = vec![0.0; m * wd];
        let mut a_is = vec![0.0; m * s];
        let mut a_si = Vec::new();
        let mut a_ss = vec![0.0; s * s];
        for i in 0..n {
            for k in 0..wd {
                let v = a.bands[i * wd + k];
                if v == 0.0 {
                    continue;
                }
                let c = a.col(i, k);
                match (i < m, c < m) {
                    (true, true) => {
                        let off = c as isize - i as isize + b as isize;
                        debug_assert!((0..wd as isize).contains(&off));
                        lu[i * wd + off as usize] += v;
                    }
                    (true, false) => a_is[i * s + (c - m)] += v,
                    (false, true) => a_si.push((i - m, c, v)),
                    (false, false) => a_ss[(i - m) * s + (c - m)] += v,
                }
            }
        }

        // Band LU without pivoting.
        for k in 0..m {
            let piv = lu[k * wd + b];
            if piv.abs() <= tiny || !piv.is_finite() {
                return Err(Error::Singular { pivot: k });
            }
            for r in (k + 1)..(k + b + 1).min(m) {
                let off_rk = k + b - r;
                let l = lu[r * wd + off_rk] / piv;
                lu[r * wd + off_rk] = l;
                for c in (k + 1)..(k + b + 1).min(m) {
                    let off_rc = c + b - r;
                    let off_kc = c + b - k;
                    lu[r * wd + off_rc] -= l * lu[k * wd + off_kc];
                }
            }
        }

        let mut fac = BandedSchur {
            b,
            m,
            lu,
            w: vec![0.0; m * s],
            a_si,
            schur: a_ss,
            perm: (0..s).collect(),
        };

        // W = A_II^{-1} A_IS, column by column.
        let mut col = vec![0.0; m];
        for q in 0..s {
            for i in 0..m {
                col[i] = a_is[i * s + q];
            }
            fac.band_solve(&mut col);
            for i in 0..m {
                fac.w[i * s + q] = col[i];
            }
        }

        // S = A_SS - A_SI W.
        for &(r, c, v) in &fac.a_si {
            for q in 0..s {
                fac.schur[r * s + q] -= v * fac.w[c * s + q];
            }
        }

        // Dense LU with partial pivoting of S.
        for k in 0..s {
            let (p, pmax) = (k..s)
                .map(|r| (r, fac.schur[r * s + k].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= tiny || !pmax.is_finite() {
                return Err(Error::Singular { pivot: m + k });
            }
            if p != k {
                for c in 0..s {
                    fac.schur.swap(k * s + c, p * s + c);
                }
                fac.perm.swap(k, p);
            }
            let piv = fac.schur[k * s + k];
            for r in (k + 1)..s {
                let l = fac.schur[r * s + k] / piv;
                fac.schur[r * s + k] = l;
                for c in (k + 1)..s {
                    fac.schur[r * s + c] -= l * fac.schur[k * s + c];
                }
            }
        }
        Ok(fac)
    }

    fn band_solve(&self, x: &mut [f64]) {
        let (m, b, wd) = (self.m, self.b, 2 * self.b + 1);
        for r in 0..m {
            let mut acc = x[r];
            for k in r.saturating_sub(b)..r {
                acc -= self.lu[r * wd + (k + b - r)] * x[k];
            }
            x[r] = acc;
        }
        for r in (0..m).rev() {
            let mut acc = x[r];
            for c in (r + 1)..(r + b + 1).min(m) {
                acc -= self.lu[r * wd + (c + b - r)] * x[c];
            }
            x[r] = acc / self.lu[r * wd + b];
        }
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let (m, s) = (self.m, 2 * self.b);
        let (interior, sep) = x.split_at_mut(m);
        self.band_solve(interior);
        // Reduced right-hand side r_S - A_SI y.
        let mut z = sep.to_vec();
        for &(r, c, v) in &self.a_si {
            z[r] -= v * interior[c];
        }
        let mut zs: Vec<f64> = self.perm.iter().map(|&p| z[p]).collect();
        for r in 0..s {
            for c in 0..r {
                zs[r] -= self.schur[r * s + c] * zs[c];
            }
        }
        for r in (0..s).rev() {
            for c in (r + 1)..s {
                zs[r] -= self.schur[r * s + c] * zs[c];
            }
            zs[r] /= self.schur[r * s + r];
        }
        for (i, xi) in interior.iter_mut().enumerate() {
            for q in 0..s {
                *xi -= self.w[i * s + q] * zs[q];
            }
        }
        sep.copy_from_slice(&zs);
    }
}

/// Solve a cyclic banded system.
pub fn solve_cyclic_banded(a: &CyclicBanded, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.n {
        return Err(param("rhs", format!("length {} != {}", rhs.len(), a.n)));
    }
    Ok(a.factor()?.solve(rhs))
}

/// Upwind first difference along a line: backward where the coefficient is
/// positive, forward where it is negative, nothing where it vanishes.
/// Returns the stencil weights on offsets `-1, 0, +1`, already scaled by the
/// coefficient.
#[inline]
pub(crate) fn upwind_weights(c: f64, h: f64) -> [f64; 3] {
    if c > 0.0 {
        [-c / h, c / h, 0.0]
    } else if c < 0.0 {
        [0.0, -c / h, c / h]
    } else {
        [0.0; 3]
    }
}

/// Line matrix of
/// `I + tau * d_aa diag(coeff2) d_aa - tau * d_aa upwind(coeff1)`
/// on grid line `line_index` along `axis`.
///
/// `upwind(c)` is the operator `u -> c * d_a^up u` with the one-sided
/// difference chosen per node by the sign of `c`. The minus sign is the one
/// produced by eliminating the auxiliary variable `V = -coeff2 d_aa U +
/// upwind(coeff1) U` from `U = rhs + tau d_aa V`.
pub fn assemble_directional(
    axis: Axis,
    line_index: usize,
    coeff2: &Field,
    coeff1: Option<&Field>,
    tau: f64,
) -> Result<CyclicBanded> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(param("tau", format!("must be non-negative, got {tau}")));
    }
    let g = *coeff2.grid();
    if g.extent(axis) < 5 {
        return Err(param(
            "grid",
            "implicit line solves need at least 5 points per line",
        ));
    }
    if line_index >= g.extent(axis.other()) {
        return Err(param("line_index", format!("{line_index} out of range")));
    }
    if let Some(c1) = coeff1 {
        if c1.grid() != &g {
            return Err(Error::GridMismatch("coeff1 and coeff2 grids differ".into()));
        }
    }
    let c2 = coeff2.line(axis, line_index);
    let c1 = coeff1.map(|f| f.line(axis, line_index));
    Ok(assemble_line(&c2, c1.as_deref(), tau, g.h(), None))
}

/// Assembly on raw line data; `extra_diag` is added to the main diagonal.
pub(crate) fn assemble_line(
    c2: &[f64],
    c1: Option<&[f64]>,
    tau: f64,
    h: f64,
    extra_diag: Option<&[f64]>,
) -> CyclicBanded {
    let n = c2.len();
    let mut a = CyclicBanded::identity(n, 2).expect("line of at least five points");
    let h2 = h * h;
    let wrap = |k: isize| k.rem_euclid(n as isize) as usize;
    const OUTER: [(isize, f64); 3] = [(-1, 1.0), (0, -2.0), (1, 1.0)];
    for i in 0..n {
        // Row i of d_aa applied to the inner operator's rows m = i-1, i, i+1.
        for &(dm, wo) in &OUTER {
            let mrow = wrap(i as isize + dm);
            let outer = tau * wo / h2;
            let cm = c2[mrow];
            for &(dk, wi) in &OUTER {
                a.add(i, dm + dk, outer * cm * wi / h2);
            }
            if let Some(c1) = c1 {
                let up = upwind_weights(c1[mrow], h);
                for (dk, &wu) in (-1..=1).zip(up.iter()) {
                    if wu != 0.0 {
                        a.add(i, dm + dk, -outer * wu);
                    }
                }
            }
        }
    }
    if let Some(d) = extra_diag {
        a.add_diagonal(d);
    }
    a
}

/// Factored line systems for every grid line along one axis.
#[derive(Clone, Debug)]
pub struct LineSystems {
    axis: Axis,
    grid: Grid2D,
    lines: Vec<CyclicBandedLu>,
    /// Every line matrix has unit column sums, so solves preserve line sums.
    conserves_sum: bool,
}

impl LineSystems {
    /// Assemble and factor `build(line)` for every line along `axis`.
    pub fn build<F>(grid: Grid2D, axis: Axis, build: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<CyclicBanded> + Sync,
    {
        let count = grid.extent(axis.other());
        let lines = (0..count)
            .into_par_iter()
            .map(|l| build(l).and_then(|a| a.factor()))
            .collect::<Result<Vec<_>>>()?;
        Ok(LineSystems {
            axis,
            grid,
            lines,
            conserves_sum: false,
        })
    }

    /// Lines of `I + tau d_aa diag(coeff2) d_aa - tau d_aa upwind(coeff1) + diag(extra)`.
    pub fn directional(
        axis: Axis,
        coeff2: &Field,
        coeff1: Option<&Field>,
        tau: f64,
        extra_diag: Option<&Field>,
    ) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(param("tau", format!("must be non-negative, got {tau}")));
        }
        let g = *coeff2.grid();
        if g.extent(axis) < 5 {
            return Err(param(
                "grid",
                "implicit line solves need at least 5 points per line",
            ));
        }
        let mut sys = Self::build(g, axis, |l| {
            let c2 = coeff2.line(axis, l);
            let c1 = coeff1.map(|f| f.line(axis, l));
            let d = extra_diag.map(|f| f.line(axis, l));
            Ok(assemble_line(&c2, c1.as_deref(), tau, g.h(), d.as_deref()))
        })?;
        // The outer d_aa has zero column sums.
        sys.conserves_sum = extra_diag.is_none_or(|d| d.values().iter().all(|&v| v == 0.0));
        Ok(sys)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// Solve every line system against the matching line of `rhs`.
    ///
    /// For sum-preserving systems the rounding error in each line sum is
    /// removed by a uniform shift.
    pub fn solve(&self, rhs: &Field) -> Field {
        assert_eq!(rhs.grid(), &self.grid);
        let solved: Vec<Vec<f64>> = self
            .lines
            .par_iter()
            .enumerate()
            .map(|(l, lu)| {
                let mut x = rhs.line(self.axis, l);
                let target: f64 = x.iter().sum();
                lu.solve_in_place(&mut x);
                if self.conserves_sum {
                    let shift = (target - x.iter().sum::<f64>()) / x.len() as f64;
                    x.iter_mut().for_each(|v| *v += shift);
                }
                x
            })
            .collect();
        let mut out = Field::zeros(self.grid);
        for (l, x) in solved.iter().enumerate() {
            out.set_line(self.axis, l, x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_ops::{dxx, dyy};
    use crate::testutil::{dense_solve, rng};
    use rand::Rng;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn identity_solves_to_rhs() {
        let a = CyclicBanded::identity(7, 2).unwrap();
        let rhs = vec![1.0, -2.0, 3.0, 0.5, 0.0, 9.0, -1.5];
        assert_eq!(solve_cyclic_banded(&a, &rhs).unwrap(), rhs);
    }

    #[test]
    fn tridiagonal_laplacian_shifted() {
        let rows: Vec<Vec<f64>> = (0..5).map(|_| vec![1.0, -2.0 + 3.0, 1.0]).collect();
        let a = CyclicBanded::from_rows(1, &rows).unwrap();
        let rhs = vec![1.0, 2.0, -1.0, 0.5, 3.0];
        let x = solve_cyclic_banded(&a, &rhs).unwrap();
        let oracle = dense_solve(&a.to_dense(), &rhs);
        assert!(max_diff(&x, &oracle) < 1e-12);
    }

    #[test]
    fn random_pentadiagonal_against_dense() {
        let mut r = rng(7);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..8)
                .map(|_| {
                    let mut row: Vec<f64> = (0..5).map(|_| r.gen_range(-1.0..1.0)).collect();
                    row[2] = 5.0 + r.gen::<f64>();
                    row
                })
                .collect();
            let a = CyclicBanded::from_rows(2, &rows).unwrap();
            let rhs: Vec<f64> = (0..8).map(|_| r.gen_range(-1.0..1.0)).collect();
            let x = solve_cyclic_banded(&a, &rhs).unwrap();
            let oracle = dense_solve(&a.to_dense(), &rhs);
            assert!(max_diff(&x, &oracle) < 1e-11);
        }
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let rows: Vec<Vec<f64>> = (0..6).map(|_| vec![1.0, -2.0, 1.0]).collect();
        let a = CyclicBanded::from_rows(1, &rows).unwrap();
        match solve_cyclic_banded(&a, &[0.0; 6]) {
            Err(Error::Singular { .. }) => {}
            other => panic!("expected singular error, got {other:?}"),
        }
        let z = CyclicBanded::zeros(5, 2).unwrap();
        assert!(matches!(z.factor(), Err(Error::Singular { pivot: 0 })));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(CyclicBanded::zeros(4, 2).is_err());
        assert!(CyclicBanded::zeros(9, 3).is_err());
        assert!(CyclicBanded::from_rows(1, &[vec![1.0; 3], vec![1.0; 2], vec![1.0; 3]]).is_err());
    }

    #[test]
    fn tau_zero_is_identity() {
        let g = Grid2D::new(6, 6, 1.0).unwrap();
        let c = Field::constant(g, 2.0);
        let a = assemble_directional(Axis::X, 0, &c, Some(&c), 0.0).unwrap();
        assert_eq!(a, CyclicBanded::identity(6, 2).unwrap());
        assert!(assemble_directional(Axis::X, 0, &c, None, -1.0).is_err());
    }

    #[test]
    fn unit_coefficient_gives_fourth_difference_pattern() {
        let g = Grid2D::new(6, 6, 1.0).unwrap();
        let ones = Field::constant(g, 1.0);
        let a = assemble_directional(Axis::Y, 3, &ones, None, 1.0).unwrap();
        for i in 0..6 {
            let row: Vec<f64> = (-2..=2).map(|o| a.get(i, o)).collect();
            assert_eq!(row, vec![1.0, -4.0, 7.0, -4.0, 1.0]);
        }
    }

    #[test]
    fn assembled_matrix_matches_operator_composition() {
        let mut r = rng(11);
        let g = Grid2D::new(8, 5, 0.3).unwrap();
        let c2 = Field::from_index_fn(g, |_, _| r.gen_range(0.5..2.0));
        let c1 = Field::from_index_fn(g, |_, _| r.gen_range(-1.0..1.0));
        let u = Field::from_index_fn(g, |_, _| r.gen_range(-1.0..1.0));
        let tau = 0.37;
        // Reference: u + tau dxx(c2 dxx u) - tau dxx(upwind(c1, u)), built from grid operators.
        let inner = c2.zip_map(&dxx(&u), |a, b| a * b);
        let up = crate::tvh1::apply_upwind(&c1, &u, Axis::X);
        let reference = &(&u + &(&dxx(&inner) * tau)) - &(&dxx(&up) * tau);
        for line in 0..5 {
            let a = assemble_directional(Axis::X, line, &c2, Some(&c1), tau).unwrap();
            let got = a.matvec(&u.line(Axis::X, line));
            assert!(max_diff(&got, &reference.line(Axis::X, line)) < 1e-12);
        }
        // Same along y without the first-order term.
        let inner_y = c2.zip_map(&dyy(&u), |a, b| a * b);
        let reference_y = &u + &(&dyy(&inner_y) * tau);
        for line in 0..8 {
            let a = assemble_directional(Axis::Y, line, &c2, None, tau).unwrap();
            let got = a.matvec(&u.line(Axis::Y, line));
            assert!(max_diff(&got, &reference_y.line(Axis::Y, line)) < 1e-12);
        }
    }

    #[test]
    fn round_trip_through_assembled_systems() {
        let mut r = rng(3);
        let g = Grid2D::new(11, 7, 0.1).unwrap();
        let c2 = Field::from_index_fn(g, |_, _| r.gen_range(0.1..3.0));
        let c1 = Field::from_index_fn(g, |_, _| r.gen_range(-2.0..2.0));
        for coeff1 in [None, Some(&c1)] {
            let a = assemble_directional(Axis::X, 4, &c2, coeff1, 1e-3).unwrap();
            let x: Vec<f64> = (0..11).map(|_| r.gen_range(-1.0..1.0)).collect();
            let back = solve_cyclic_banded(&a, &a.matvec(&x)).unwrap();
            assert!(max_diff(&back, &x) < 1e-10);
        }
    }

    #[test]
    fn line_systems_solve_every_line() {
        let mut r = rng(5);
        let g = Grid2D::new(9, 6, 0.2).unwrap();
        let c2 = Field::from_index_fn(g, |_, _| r.gen_range(0.5..1.5));
        let rhs = Field::from_index_fn(g, |_, _| r.gen_range(-1.0..1.0));
        for axis in [Axis::X, Axis::Y] {
            let sys = LineSystems::directional(axis, &c2, None, 0.01, None).unwrap();
            let x = sys.solve(&rhs);
            for l in 0..g.extent(axis.other()) {
                let a = assemble_directional(axis, l, &c2, None, 0.01).unwrap();
                let back = a.matvec(&x.line(axis, l));
                assert!(max_diff(&back, &rhs.line(axis, l)) < 1e-12);
            }
        }
    }
}
