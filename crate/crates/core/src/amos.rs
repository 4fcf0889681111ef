//! AMOS scheme for the direction-wise system
//!
//! ```text
//! u_t = dxx v1 + dyy v2,   v1 = -dx(u_x / |∇u|_ε),   v2 = -dy(u_y / |∇u|_ε)
//! ```
//!
//! Each step runs two fully implicit sweeps in opposite direction orders and
//! averages them. Coefficients come from the lin2 expansion at the start of
//! the step.

use crate::adi::check_stage;
use crate::error::{param, Error, Result};
use crate::grid_ops::{Axis, Field, Mask};
use crate::linsolve::LineSystems;
use crate::tvh1::coeffs_lin2;

#[derive(Clone, Debug, PartialEq)]
pub struct AmosState {
    pub u: Field,
    pub v1: Field,
    pub v2: Field,
    pub t: f64,
}

impl AmosState {
    pub fn new(u: Field, eps: f64) -> Result<Self> {
        let c = coeffs_lin2(&u, eps)?;
        let v1 = c.g(&u, Axis::X);
        let v2 = c.g(&u, Axis::Y);
        Ok(AmosState { u, v1, v2, t: 0.0 })
    }
}

/// Damaged image `f`, inpainting domain `mask` (true inside D) and fidelity
/// weight `lambda`.
#[derive(Clone, Debug)]
pub struct InpaintProblem {
    pub f: Field,
    pub mask: Mask,
    pub lambda: f64,
}

impl InpaintProblem {
    pub fn new(f: Field, mask: Mask, lambda: f64) -> Result<Self> {
        f.check_finite()?;
        if !mask.matches(f.grid()) {
            return Err(Error::GridMismatch(format!(
                "mask is {}x{}, image is {}x{}",
                mask.nx(),
                mask.ny(),
                f.grid().nx(),
                f.grid().ny()
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(param(
                "lambda",
                format!("must be non-negative, got {lambda}"),
            ));
        }
        Ok(InpaintProblem { f, mask, lambda })
    }

    /// `lambda` on the known region, zero inside D.
    pub fn weight(&self) -> Field {
        let inside = self.mask.as_slice();
        let g = *self.f.grid();
        Field::from_index_fn(g, |i, j| {
            if inside[g.idx(i, j)] {
                0.0
            } else {
                self.lambda
            }
        })
    }
}

/// Fidelity terms entering every directional solve: diagonal shift and source.
struct Fidelity {
    diag: Field,
    source: Field,
}

fn sweep(
    u: &Field,
    first: &LineSystems,
    second: &LineSystems,
    fid: Option<&Fidelity>,
) -> Result<(Field, Field)> {
    let rhs = |f: &Field| match fid {
        Some(fd) => f + &fd.source,
        None => f.clone(),
    };
    let mid = first.solve(&rhs(u));
    check_stage(&mid, "sweep")?;
    let out = second.solve(&rhs(&mid));
    check_stage(&out, "sweep")?;
    Ok((mid, out))
}

fn step_impl(s: &AmosState, dt: f64, eps: f64, prob: Option<&InpaintProblem>) -> Result<AmosState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(param("dt", format!("must be non-negative, got {dt}")));
    }
    let c = coeffs_lin2(&s.u, eps)?;
    let fid = prob.map(|p| {
        let w = &p.weight() * (0.5 * dt);
        Fidelity {
            source: w.zip_map(&p.f, |a, b| a * b),
            diag: w,
        }
    });
    let diag = fid.as_ref().map(|f| &f.diag);
    let sx = LineSystems::directional(Axis::X, &c.a, Some(&c.c1), dt, diag)?;
    let sy = LineSystems::directional(Axis::Y, &c.a, Some(&c.c2), dt, diag)?;

    // Sweep A: y then x. Sweep B: x then y.
    let (a, b) = rayon::join(
        || sweep(&s.u, &sy, &sx, fid.as_ref()),
        || sweep(&s.u, &sx, &sy, fid.as_ref()),
    );
    let (u_star, u_tilde) = a?;
    let (u_dstar, u_bar) = b?;
    let half = |p: &Field, q: &Field| &(p + q) * 0.5;
    let v2_star = c.g(&u_star, Axis::Y);
    let v1_tilde = c.g(&u_tilde, Axis::X);
    let v1_dstar = c.g(&u_dstar, Axis::X);
    let v2_bar = c.g(&u_bar, Axis::Y);
    Ok(AmosState {
        u: half(&u_tilde, &u_bar),
        v1: half(&v1_tilde, &v1_dstar),
        v2: half(&v2_bar, &v2_star),
        t: s.t + dt,
    })
}

/// One AMOS step of the free flow.
pub fn amos_step(s: &AmosState, dt: f64, eps: f64) -> Result<AmosState> {
    step_impl(s, dt, eps, None)
}

/// One AMOS step with the fidelity source `lambda 1_{Ω\D} (f - u)`, implicit
/// in `u`. Half of the weight goes into each directional solve of a sweep.
pub fn amos_inpaint_step(
    s: &AmosState,
    prob: &InpaintProblem,
    dt: f64,
    eps: f64,
) -> Result<AmosState> {
    if !prob.mask.matches(s.u.grid()) {
        return Err(Error::GridMismatch(
            "inpainting problem and state grids differ".into(),
        ));
    }
    step_impl(s, dt, eps, Some(prob))
}
