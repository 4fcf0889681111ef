//! Six-stage Hundsdorfer step for coupled second-order systems
//!
//! ```text
//! U_t = dxx V + dyy V
//! V   = G0 U + G1 U + G2 U,   G1 = -c1 dxx,  G2 = -c2 dyy,  G0 = c3 dxy
//! ```
//!
//! with the auxiliary variable eliminated in each implicit stage. Shared by
//! the biharmonic (`c1 = c2 = 1`, no mixed term) and the first TV-H^-1
//! linearisation.

use crate::error::{Error, Result};
use crate::grid_ops::{dxx, dxy, dyy, laplacian_5pt, Axis, Field};
use crate::linsolve::LineSystems;

pub(crate) struct CoupledOps<'a> {
    pub c1: &'a Field,
    pub c2: &'a Field,
    pub c3: Option<&'a Field>,
}

impl CoupledOps<'_> {
    pub fn g1(&self, u: &Field) -> Field {
        dxx(u).zip_map(self.c1, |d, c| -c * d)
    }

    pub fn g2(&self, u: &Field) -> Field {
        dyy(u).zip_map(self.c2, |d, c| -c * d)
    }

    /// Full `G(U) = G0 U + G1 U + G2 U`.
    pub fn g(&self, u: &Field) -> Field {
        let mut v = &self.g1(u) + &self.g2(u);
        if let Some(c3) = self.c3 {
            let m = dxy(u).zip_map(c3, |d, c| c * d);
            v = &v + &m;
        }
        v
    }
}

pub(crate) fn check_stage(f: &Field, stage: &'static str) -> Result<()> {
    if f.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence {
            stage,
            sup_norm: f.sup_norm(),
        })
    }
}

/// One step from `(u, v)`; returns `U_{n+1}`.
pub(crate) fn hundsdorfer_coupled(
    ops: &CoupledOps<'_>,
    u: &Field,
    v: &Field,
    dt: f64,
    theta: f64,
    sigma: f64,
) -> Result<Field> {
    let tau = theta * dt;
    let sx = LineSystems::directional(Axis::X, ops.c1, None, tau, None)?;
    let sy = LineSystems::directional(Axis::Y, ops.c2, None, tau, None)?;

    // Explicit predictor: V first, then U.
    let y0_v = ops.g(u);
    let y0 = u.axpy(dt, &laplacian_5pt(&y0_v));
    check_stage(&y0, "Y0")?;

    // Implicit x and y corrections, V eliminated:
    // Y1 = Y0 + tau dxx (G1 Y1 - G1 U_n)  =>  (I + tau dxx c1 dxx) Y1 = Y0 - tau dxx G1 U_n.
    let y1 = sx.solve(&y0.axpy(-tau, &dxx(&ops.g1(u))));
    check_stage(&y1, "Y1")?;
    let y2 = sy.solve(&y1.axpy(-tau, &dyy(&ops.g2(u))));
    check_stage(&y2, "Y2")?;

    // Corrector: V at the predicted state, then U.
    let yt0_v = ops.g(&y2);
    let flux = &laplacian_5pt(&yt0_v) - &laplacian_5pt(v);
    let yt0 = y0.axpy(sigma * dt, &flux);
    check_stage(&yt0, "Yt0")?;

    let yt1 = sx.solve(&yt0.axpy(-tau, &dxx(&ops.g1(&y2))));
    check_stage(&yt1, "Yt1")?;
    let yt2 = sy.solve(&yt1.axpy(-tau, &dyy(&ops.g2(&y2))));
    check_stage(&yt2, "Yt2")?;
    Ok(yt2)
}
