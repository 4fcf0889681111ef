//! Finite-difference operators on periodic 2-D grids.
//!
//! Every operator returns a fresh [`Field`]. Indices wrap periodically, so
//! node `-1` is node `n - 1` and node `n` is node `0`.

mod field;

pub use field::{Axis, Field, Grid2D, Mask, VecField};

use crate::error::{require_positive, Result};

/// Apply a fixed stencil `sum_k w_k u(i + di_k, j + dj_k)`, scaled by `scale`.
fn apply_stencil(u: &Field, taps: &[(isize, isize, f64)], scale: f64) -> Field {
    let g = *u.grid();
    let v = u.values();
    let mut out = Vec::with_capacity(g.len());
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let mut acc = 0.0;
            for &(di, dj, w) in taps {
                acc += w * v[g.wrapped(i, j, di, dj)];
            }
            out.push(acc * scale);
        }
    }
    Field::from_raw(g, out)
}

/// `(u(i+1,j) - u(i,j)) / h`
pub fn dx_forward(u: &Field) -> Field {
    apply_stencil(u, &[(1, 0, 1.0), (0, 0, -1.0)], 1.0 / u.grid().h())
}

/// `(u(i,j) - u(i-1,j)) / h`
pub fn dx_backward(u: &Field) -> Field {
    apply_stencil(u, &[(0, 0, 1.0), (-1, 0, -1.0)], 1.0 / u.grid().h())
}

/// `(u(i,j+1) - u(i,j)) / h`
pub fn dy_forward(u: &Field) -> Field {
    apply_stencil(u, &[(0, 1, 1.0), (0, 0, -1.0)], 1.0 / u.grid().h())
}

/// `(u(i,j) - u(i,j-1)) / h`
pub fn dy_backward(u: &Field) -> Field {
    apply_stencil(u, &[(0, 0, 1.0), (0, -1, -1.0)], 1.0 / u.grid().h())
}

pub fn forward(u: &Field, axis: Axis) -> Field {
    match axis {
        Axis::X => dx_forward(u),
        Axis::Y => dy_forward(u),
    }
}

pub fn backward(u: &Field, axis: Axis) -> Field {
    match axis {
        Axis::X => dx_backward(u),
        Axis::Y => dy_backward(u),
    }
}

/// Three-point second difference along x.
pub fn dxx(u: &Field) -> Field {
    let h = u.grid().h();
    apply_stencil(u, &[(1, 0, 1.0), (0, 0, -2.0), (-1, 0, 1.0)], 1.0 / (h * h))
}

/// Three-point second difference along y.
pub fn dyy(u: &Field) -> Field {
    let h = u.grid().h();
    apply_stencil(u, &[(0, 1, 1.0), (0, 0, -2.0), (0, -1, 1.0)], 1.0 / (h * h))
}

pub fn second(u: &Field, axis: Axis) -> Field {
    match axis {
        Axis::X => dxx(u),
        Axis::Y => dyy(u),
    }
}

/// Five-point Laplacian, `dxx + dyy`.
pub fn laplacian_5pt(u: &Field) -> Field {
    &dxx(u) + &dyy(u)
}

/// Centered mixed difference
/// `(u(i+1,j+1) + u(i-1,j-1) - u(i-1,j+1) - u(i+1,j-1)) / (4h^2)`.
pub fn dxy(u: &Field) -> Field {
    let h = u.grid().h();
    apply_stencil(
        u,
        &[(1, 1, 1.0), (-1, -1, 1.0), (-1, 1, -1.0), (1, -1, -1.0)],
        1.0 / (4.0 * h * h),
    )
}

/// The mixed stencil with the roles of the axes exchanged.
pub fn dyx(u: &Field) -> Field {
    let h = u.grid().h();
    apply_stencil(
        u,
        &[(1, 1, 1.0), (-1, -1, 1.0), (1, -1, -1.0), (-1, 1, -1.0)],
        1.0 / (4.0 * h * h),
    )
}

pub fn dxxxx(u: &Field) -> Field {
    dxx(&dxx(u))
}

pub fn dyyyy(u: &Field) -> Field {
    dyy(&dyy(u))
}

/// Wide 5x5 mixed fourth difference, `dxy(dxy(u))`.
pub fn dxxyy(u: &Field) -> Field {
    dxy(&dxy(u))
}

/// Compact 3x3 mixed fourth difference, `dxx(dyy(u))`.
///
/// This is the cross term of `laplacian_5pt` composed with itself.
pub fn dxx_dyy(u: &Field) -> Field {
    dxx(&dyy(u))
}

/// Forward-difference gradient.
pub fn grad_forward(u: &Field) -> VecField {
    VecField {
        x: dx_forward(u),
        y: dy_forward(u),
    }
}

/// Backward-difference divergence, the negative adjoint of [`grad_forward`].
pub fn div_backward(p: &VecField) -> Field {
    &dx_backward(&p.x) + &dy_backward(&p.y)
}

/// `sqrt((dx+ u)^2 + (dy+ u)^2 + eps)`.
pub fn grad_mag_eps(u: &Field, eps: f64) -> Result<Field> {
    require_positive("eps", eps)?;
    let gx = dx_forward(u);
    let gy = dy_forward(u);
    Ok(gx.zip_map(&gy, |a, b| (a * a + b * b + eps).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn impulse(n: usize, h: f64, i: usize, j: usize) -> Field {
        let g = Grid2D::new(n, n, h).unwrap();
        let mut f = Field::zeros(g);
        f.set(i, j, 1.0);
        f
    }

    #[test]
    fn constant_is_annihilated() {
        let g = Grid2D::unit_square(8).unwrap();
        let c = Field::constant(g, 3.25);
        for op in [
            dx_forward,
            dx_backward,
            dy_forward,
            dy_backward,
            dxx,
            dyy,
            laplacian_5pt,
            dxy,
            dxxxx,
            dyyyy,
            dxxyy,
            dxx_dyy,
        ] {
            assert_eq!(op(&c).sup_norm(), 0.0);
        }
        let gr = grad_forward(&c);
        assert_eq!(gr.x.sup_norm() + gr.y.sup_norm(), 0.0);
    }

    #[test]
    fn forward_impulse_wraps() {
        let u = impulse(4, 1.0, 0, 0);
        let d = dx_forward(&u);
        assert_eq!(d.get(0, 0), -1.0);
        assert_eq!(d.get(3, 0), 1.0);
        let nonzero = d.values().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn dy_backward_impulse() {
        let u = impulse(4, 1.0, 1, 1);
        let d = dy_backward(&u);
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d.get(1, 2), -1.0);
        assert_eq!(d.values().iter().filter(|v| **v != 0.0).count(), 2);
    }

    #[test]
    fn laplacian_impulse() {
        let u = impulse(4, 1.0, 0, 0);
        let l = laplacian_5pt(&u);
        assert_eq!(l.get(0, 0), -4.0);
        for (i, j) in [(1, 0), (3, 0), (0, 1), (0, 3)] {
            assert_eq!(l.get(i, j), 1.0);
        }
        assert_eq!(l.sum(), 0.0);
    }

    #[test]
    fn dx_forward_matches_pointwise_cosine() {
        let g = Grid2D::unit_square(32).unwrap();
        let k = 3.0;
        let u = Field::from_fn(g, |x, _| (2.0 * PI * k * x).cos());
        let d = dx_forward(&u);
        let h = g.h();
        for j in 0..32 {
            for i in 0..32 {
                let x = g.x(i);
                let expect = ((2.0 * PI * k * (x + h)).cos() - (2.0 * PI * k * x).cos()) / h;
                assert!((d.get(i, j) - expect).abs() < 1e-13 * 32.0, "{i},{j}");
            }
        }
    }

    #[test]
    fn backward_of_forward_is_second_difference() {
        let g = Grid2D::unit_square(16).unwrap();
        let u = Field::from_index_fn(g, |i, j| ((i * 31 + j * 17) % 13) as f64 * 0.1);
        let a = dx_backward(&dx_forward(&u));
        let b = dxx(&u);
        assert!(a.max_abs_diff(&b) < 1e-9 * b.sup_norm().max(1.0));
    }

    #[test]
    fn dxxyy_matches_printed_wide_stencil() {
        let g = Grid2D::new(9, 9, 0.5).unwrap();
        let u = Field::from_index_fn(g, |i, j| ((i * i * 3 + j * 7 + i * j) % 11) as f64);
        let got = dxxyy(&u);
        let h4 = 0.5_f64.powi(4);
        for j in 0..9 {
            for i in 0..9 {
                let at = |di: isize, dj: isize| u.values()[g.wrapped(i, j, di, dj)];
                let expect = (at(2, 2) + at(-2, -2) + 4.0 * at(0, 0) + at(-2, 2) + at(2, -2))
                    / (16.0 * h4)
                    - (at(0, 2) + at(2, 0) + at(-2, 0) + at(0, -2)) / (8.0 * h4);
                assert!((got.get(i, j) - expect).abs() < 1e-11, "{i},{j}");
            }
        }
    }

    #[test]
    fn dxy_is_axis_symmetric() {
        let g = Grid2D::new(8, 6, 0.25).unwrap();
        let u = Field::from_index_fn(g, |i, j| {
            (i as f64).sin() + (j as f64 * 1.3).cos() * i as f64
        });
        assert!(dxy(&u).max_abs_diff(&dyx(&u)) < 1e-12 * dxy(&u).sup_norm());
    }

    #[test]
    fn grad_mag_eps_values() {
        let g = Grid2D::new(4, 4, 1.0).unwrap();
        let c = Field::constant(g, 1.0);
        assert!(grad_mag_eps(&c, 4.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 2.0));
        let mut u = Field::zeros(g);
        u.set(1, 0, 3.0);
        u.set(1, 1, 3.0);
        u.set(1, 2, 3.0);
        u.set(1, 3, 3.0);
        let m = grad_mag_eps(&u, 1.0).unwrap();
        assert!((m.get(0, 0) - 10f64.sqrt()).abs() < 1e-15);
        assert!(grad_mag_eps(&u, 0.0).is_err());
        assert!(grad_mag_eps(&u, -1.0).is_err());
        let m2 = grad_mag_eps(&u, 1.5).unwrap();
        assert!(m.values().iter().zip(m2.values()).all(|(a, b)| a < b));
    }

    #[test]
    fn div_of_grad_is_laplacian() {
        let u = impulse(6, 0.5, 2, 3);
        let a = div_backward(&grad_forward(&u));
        let b = laplacian_5pt(&u);
        assert!(a.max_abs_diff(&b) < 1e-14);
    }
}
