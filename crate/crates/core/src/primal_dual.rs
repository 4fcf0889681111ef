//! Building blocks for a penalised primal-dual treatment of the TV term.
//!
//! The constraint `|p| <= 1` on the dual variable is relaxed by the penalty
//! `F(s) = 1/2 max(s, 0)^2` applied to `|p| - 1`, whose derivative is the
//! vector map [`penalty_h`]. The dual update is a damped Newton step on the
//! linearised optimality condition
//!
//! ```text
//! 0 = -∇U - H(P_prev)/ε - H'(P_prev)(P - P_prev)/ε - τ_k (P - P_prev)
//! ```
//!
//! No time integrator is provided; [`pd_residual`] measures how far a
//! candidate `(U, Q, P)` is from solving the implicit step.

use crate::error::{param, require_positive, Error, Result};
use crate::grid_ops::{div_backward, grad_forward, laplacian_5pt, Field, VecField};

/// Closer than this to the unit circle, `H` is treated as non-differentiable.
pub const KINK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PDParams {
    pub eps_pen: f64,
    pub tau0: f64,
    pub rho: f64,
    pub tau_floor: f64,
    pub max_newton: usize,
}

impl Default for PDParams {
    fn default() -> Self {
        PDParams {
            eps_pen: 1e-2,
            tau0: 1.0,
            rho: 0.5,
            tau_floor: 1e-8,
            max_newton: 50,
        }
    }
}

impl PDParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("eps_pen", self.eps_pen)?;
        require_positive("tau0", self.tau0)?;
        require_positive("tau_floor", self.tau_floor)?;
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(param(
                "rho",
                format!("must lie in (0, 1), got {}", self.rho),
            ));
        }
        if self.max_newton == 0 {
            return Err(param("max_newton", "must be at least 1"));
        }
        Ok(())
    }

    /// `τ_k = max(τ0 ρ^k, floor)`.
    pub fn tau(&self, k: usize) -> f64 {
        let k = i32::try_from(k).unwrap_or(i32::MAX);
        (self.tau0 * self.rho.powi(k)).max(self.tau_floor)
    }
}

#[inline]
fn h_point(px: f64, py: f64) -> (f64, f64) {
    let r = px.hypot(py);
    if r >= 1.0 {
        let s = (r - 1.0) / r;
        (px * s, py * s)
    } else {
        (0.0, 0.0)
    }
}

/// Pointwise `p/|p| (|p| - 1)` outside the unit ball, zero inside.
pub fn penalty_h(p: &VecField) -> VecField {
    let mut hx = Vec::with_capacity(p.x.values().len());
    let mut hy = Vec::with_capacity(p.x.values().len());
    for (&a, &b) in p.x.values().iter().zip(p.y.values()) {
        let (u, v) = h_point(a, b);
        hx.push(u);
        hy.push(v);
    }
    let g = *p.grid();
    VecField {
        x: Field::from_raw(g, hx),
        y: Field::from_raw(g, hy),
    }
}

/// Jacobian of [`penalty_h`] at a single point.
pub fn penalty_h_jacobian(p: (f64, f64)) -> Result<[[f64; 2]; 2]> {
    let r = p.0.hypot(p.1);
    if (r - 1.0).abs() <= KINK_TOLERANCE {
        return Err(Error::NonDifferentiable { norm: r });
    }
    Ok(jacobian_or_zero(p.0, p.1, r))
}

/// Jacobian away from the kink; the inner (zero) branch is used on it.
fn jacobian_or_zero(px: f64, py: f64, r: f64) -> [[f64; 2]; 2] {
    if r <= 1.0 + KINK_TOLERANCE {
        return [[0.0; 2]; 2];
    }
    let a = 1.0 - 1.0 / r;
    let r3 = r * r * r;
    [
        [a + px * px / r3, px * py / r3],
        [px * py / r3, a + py * py / r3],
    ]
}

/// Solve `(H'(p_prev)/ε + τ_k I)(p - p_prev) = -grad_u - H(p_prev)/ε` node by node.
pub fn newton_p_update(
    p_prev: &VecField,
    grad_u: &VecField,
    params: &PDParams,
    tau_k: f64,
) -> Result<VecField> {
    params.validate()?;
    require_positive("tau_k", tau_k)?;
    if p_prev.grid() != grad_u.grid() {
        return Err(Error::GridMismatch("p_prev and grad_u grids differ".into()));
    }
    let inv_eps = 1.0 / params.eps_pen;
    let n = p_prev.x.values().len();
    let mut px = Vec::with_capacity(n);
    let mut py = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (p_prev.x.values()[k], p_prev.y.values()[k]);
        let r = a.hypot(b);
        let j = jacobian_or_zero(a, b, r);
        let (ha, hb) = h_point(a, b);
        let m = [
            [inv_eps * j[0][0] + tau_k, inv_eps * j[0][1]],
            [inv_eps * j[1][0], inv_eps * j[1][1] + tau_k],
        ];
        let rx = -grad_u.x.values()[k] - inv_eps * ha;
        let ry = -grad_u.y.values()[k] - inv_eps * hb;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!(det > 0.0, "damped Newton block must be positive definite");
        px.push(a + (m[1][1] * rx - m[0][1] * ry) / det);
        py.push(b + (m[0][0] * ry - m[1][0] * rx) / det);
    }
    let g = *p_prev.grid();
    Ok(VecField {
        x: Field::from_raw(g, px),
        y: Field::from_raw(g, py),
    })
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(0.0, |m, x| m.max(x.abs()))
}

/// Max-norm residuals of
/// `(U - U_prev)/dt = ΔQ`, `Q = div P` and `0 = -∇U - H(P)/ε`.
pub fn pd_residual(
    u: &Field,
    q: &Field,
    p: &VecField,
    u_prev: &Field,
    dt: f64,
    params: &PDParams,
) -> Result<(f64, f64, f64)> {
    require_positive("dt", dt)?;
    require_positive("eps_pen", params.eps_pen)?;
    let g = u.grid();
    if q.grid() != g || p.grid() != g || u_prev.grid() != g {
        return Err(Error::GridMismatch(
            "primal-dual fields on different grids".into(),
        ));
    }
    let lq = laplacian_5pt(q);
    let r1 = max_abs(
        u.values()
            .iter()
            .zip(u_prev.values())
            .zip(lq.values())
            .map(|((a, b), l)| (a - b) / dt - l),
    );
    let dp = div_backward(p);
    let r2 = max_abs(q.values().iter().zip(dp.values()).map(|(a, b)| a - b));
    let gu = grad_forward(u);
    let hp = penalty_h(p);
    let inv_eps = 1.0 / params.eps_pen;
    let r3x =
        gu.x.values()
            .iter()
            .zip(hp.x.values())
            .map(|(g, h)| -g - inv_eps * h);
    let r3y =
        gu.y.values()
            .iter()
            .zip(hp.y.values())
            .map(|(g, h)| -g - inv_eps * h);
    let r3 = max_abs(r3x.chain(r3y));
    Ok((r1, r2, r3))
}

/// `sum 1/2 max(|p| - 1, 0)^2 h^2`, for monitoring only.
pub fn penalty_energy(p: &VecField) -> f64 {
    let h2 = p.grid().h().powi(2);
    p.x.values()
        .iter()
        .zip(p.y.values())
        .map(|(a, b)| {
            let s = (a.hypot(*b) - 1.0).max(0.0);
            0.5 * s * s
        })
        .sum::<f64>()
        * h2
}
