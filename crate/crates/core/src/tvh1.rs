//! Regularised TV-H^-1 flow
//!
//! ```text
//! u_t = Δv,   v = -div(∇u / |∇u|_ε)
//! ```
//!
//! Two linearisations around the previous time level `ũ`:
//!
//! * lin1 expands the curvature into `-c1 dxx U - c2 dyy U + c3 dxy U` and is
//!   stepped with the coupled Hundsdorfer scheme;
//! * lin2 keeps the directional structure, `G_a U = -a d_aa U + upwind(C_a) U`,
//!   and is stepped with Peaceman-Rachford.
//!
//! [`implicit_reference_step`] solves the unsplit linearly implicit step and
//! is only meant for small grids.

use nalgebra::DMatrix;

use crate::adi::{check_stage, hundsdorfer_coupled, CoupledOps};
use crate::biharmonic::HundsdorferParams;
use crate::error::{param, require_positive, Error, Result};
use crate::grid_ops::{
    backward, div_backward, dx_backward, dx_forward, dxx, dy_backward, dy_forward, dyy, forward,
    grad_forward, grad_mag_eps, laplacian_5pt, second, Axis, Field, VecField,
};
use crate::linsolve::LineSystems;

#[derive(Clone, Debug, PartialEq)]
pub struct TVState {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl TVState {
    /// State with `v` from the lin1 curvature at `u`.
    pub fn lin1(u: Field, eps: f64) -> Result<Self> {
        let v = coeffs_lin1(&u, eps)?.curvature(&u);
        Ok(TVState { u, v, t: 0.0 })
    }

    /// State with `v` from the lin2 curvature at `u`.
    pub fn lin2(u: Field, eps: f64) -> Result<Self> {
        let c = coeffs_lin2(&u, eps)?;
        let v = &c.g(&u, Axis::X) + &c.g(&u, Axis::Y);
        Ok(TVState { u, v, t: 0.0 })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lin1Coeffs {
    pub c1: Field,
    pub c2: Field,
    pub c3: Field,
}

impl Lin1Coeffs {
    fn ops(&self) -> CoupledOps<'_> {
        CoupledOps {
            c1: &self.c1,
            c2: &self.c2,
            c3: Some(&self.c3),
        }
    }

    /// `-c1 dxx u - c2 dyy u + c3 dxy u`.
    pub fn curvature(&self, u: &Field) -> Field {
        self.ops().g(u)
    }
}

pub fn coeffs_lin1(u_tilde: &Field, eps: f64) -> Result<Lin1Coeffs> {
    let m = grad_mag_eps(u_tilde, eps)?;
    let gx = dx_forward(u_tilde);
    let gy = dy_forward(u_tilde);
    let m3 = m.map(|v| v * v * v);
    Ok(Lin1Coeffs {
        c1: gy.zip_map(&m3, |b, d| (eps + b * b) / d),
        c2: gx.zip_map(&m3, |a, d| (eps + a * a) / d),
        c3: gx
            .zip_map(&gy, |a, b| 2.0 * a * b)
            .zip_map(&m3, |n, d| n / d),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lin2Coeffs {
    /// `1 / |∇ũ|_ε`
    pub a: Field,
    pub c1: Field,
    pub c2: Field,
}

impl Lin2Coeffs {
    pub fn first_order(&self, axis: Axis) -> &Field {
        match axis {
            Axis::X => &self.c1,
            Axis::Y => &self.c2,
        }
    }

    /// Directional operator `G_a u = -a d_aa u + upwind(C_a, u)`.
    pub fn g(&self, u: &Field, axis: Axis) -> Field {
        let diff = second(u, axis).zip_map(&self.a, |d, a| -a * d);
        &diff + &apply_upwind(self.first_order(axis), u, axis)
    }
}

pub fn coeffs_lin2(u_tilde: &Field, eps: f64) -> Result<Lin2Coeffs> {
    let m = grad_mag_eps(u_tilde, eps)?;
    let gx = dx_forward(u_tilde);
    let gy = dy_forward(u_tilde);
    let m3 = m.map(|v| v * v * v);
    let xx = dxx(u_tilde);
    let yy = dyy(u_tilde);
    let xm_yp = dx_backward(&gy);
    let xp_ym = dx_forward(&dy_backward(u_tilde));
    let n = u_tilde.values().len();
    let mut c1 = Vec::with_capacity(n);
    let mut c2 = Vec::with_capacity(n);
    for k in 0..n {
        let (ux, uy, d) = (gx.values()[k], gy.values()[k], m3.values()[k]);
        c1.push((ux * xx.values()[k] + uy * xm_yp.values()[k]) / d);
        c2.push((ux * xp_ym.values()[k] + uy * yy.values()[k]) / d);
    }
    let g = *u_tilde.grid();
    Ok(Lin2Coeffs {
        a: m.map(|v| 1.0 / v),
        c1: Field::from_raw(g, c1),
        c2: Field::from_raw(g, c2),
    })
}

/// `c * d_a^up u`, backward difference where `c > 0`, forward where `c < 0`.
pub fn apply_upwind(c: &Field, u: &Field, axis: Axis) -> Field {
    let bwd = backward(u, axis);
    let fwd = forward(u, axis);
    let out = c
        .values()
        .iter()
        .zip(bwd.values().iter().zip(fwd.values()))
        .map(|(&c, (&b, &f))| {
            if c > 0.0 {
                c * b
            } else if c < 0.0 {
                c * f
            } else {
                0.0
            }
        })
        .collect();
    Field::from_raw(*u.grid(), out)
}

/// Hundsdorfer step for the lin1 system, coefficients frozen at `u_tilde`.
/// The returned `v` is the lin1 curvature of the new `u`.
pub fn hundsdorfer_tvh1_step(
    s: &TVState,
    u_tilde: &Field,
    p: HundsdorferParams,
    eps: f64,
) -> Result<TVState> {
    let coeffs = coeffs_lin1(u_tilde, eps)?;
    let u = hundsdorfer_coupled(&coeffs.ops(), &s.u, &s.v, p.dt, p.theta, p.sigma)?;
    let v = coeffs_lin1(&u, eps)?.curvature(&u);
    check_stage(&v, "V")?;
    Ok(TVState {
        u,
        v,
        t: s.t + p.dt,
    })
}

/// Peaceman-Rachford step for the lin2 system: implicit in y first, then in x.
pub fn peaceman_rachford_tvh1_step(
    s: &TVState,
    u_tilde: &Field,
    dt: f64,
    eps: f64,
) -> Result<TVState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(param("dt", format!("must be non-negative, got {dt}")));
    }
    let c = coeffs_lin2(u_tilde, eps)?;
    let half = 0.5 * dt;
    let sy = LineSystems::directional(Axis::Y, &c.a, Some(&c.c2), half, None)?;
    let sx = LineSystems::directional(Axis::X, &c.a, Some(&c.c1), half, None)?;

    let g1_n = c.g(&s.u, Axis::X);
    let rhs = s.u.axpy(half, &dxx(&s.v)).axpy(half, &dyy(&g1_n));
    let u_half = sy.solve(&rhs);
    check_stage(&u_half, "U_half")?;
    let g2_half = c.g(&u_half, Axis::Y);
    let v_half = &g1_n + &g2_half;

    let rhs = u_half.axpy(half, &dxx(&g2_half)).axpy(half, &dyy(&v_half));
    let u = sx.solve(&rhs);
    check_stage(&u, "U")?;
    let v = &c.g(&u, Axis::X) + &g2_half;
    check_stage(&v, "V")?;
    Ok(TVState { u, v, t: s.t + dt })
}

const REFINEMENT_CAP: usize = 20;

/// Action of `I + dt * Δ div(w ∇ ·)` on `u`.
fn implicit_operator(u: &Field, w: &Field, dt: f64) -> Field {
    let gr = grad_forward(u);
    let flux = VecField {
        x: gr.x.zip_map(w, |g, w| g * w),
        y: gr.y.zip_map(w, |g, w| g * w),
    };
    u.axpy(dt, &laplacian_5pt(&div_backward(&flux)))
}

/// Linearly implicit unsplit step
/// `(I + dt Δ div(∇ · / |∇u_n|_ε)) u_{n+1} = u_n`,
/// solved by dense LU with iterative refinement until the max-norm residual
/// drops below `tol * (|u_n|_inf + |A|_inf |u_{n+1}|_inf)`.
pub fn implicit_reference_step(u: &Field, dt: f64, eps: f64, tol: f64) -> Result<Field> {
    require_positive("dt", dt)?;
    require_positive("tol", tol)?;
    let g = *u.grid();
    let w = grad_mag_eps(u, eps)?.map(|m| 1.0 / m);
    let n = g.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut e = Field::zeros(g);
    for col in 0..n {
        e.values_mut()[col] = 1.0;
        let c = implicit_operator(&e, &w, dt);
        for (row, &v) in c.values().iter().enumerate() {
            if v != 0.0 {
                a[(row, col)] = v;
            }
        }
        e.values_mut()[col] = 0.0;
    }
    let a_norm = a
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let lu = a.lu();
    let b = nalgebra::DVector::from_column_slice(u.values());
    let mut x = lu.solve(&b).ok_or(Error::Singular { pivot: 0 })?;
    let mut residual = f64::INFINITY;
    for _ in 0..REFINEMENT_CAP {
        let xf = Field::from_raw(g, x.as_slice().to_vec());
        check_stage(&xf, "implicit")?;
        let r: Vec<f64> = u
            .values()
            .iter()
            .zip(implicit_operator(&xf, &w, dt).values())
            .map(|(b, ax)| b - ax)
            .collect();
        residual = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if residual < tol * (u.sup_norm() + a_norm * xf.sup_norm()) {
            return Ok(xf);
        }
        let d = lu
            .solve(&nalgebra::DVector::from_vec(r))
            .ok_or(Error::Singular { pivot: 0 })?;
        x += d;
    }
    Err(Error::NoConvergence {
        iterations: REFINEMENT_CAP,
        residual,
    })
}
