//! Linear model problem `u_t = -Δ²u`.
//!
//! Two equivalent Hundsdorfer realisations: directly on the fourth-order
//! semi-discretisation, and on the coupled second-order system
//! `U_t = Δ V, V = -Δ U`. [`biharm_exact`] evolves the semi-discrete system
//! exactly in Fourier space and serves as the accuracy reference.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::adi::{check_stage, hundsdorfer_coupled, CoupledOps};
use crate::error::{param, Result};
use crate::grid_ops::{dxx_dyy, dxxxx, dyyyy, laplacian_5pt, Axis, Field, Grid2D};
use crate::linsolve::LineSystems;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HundsdorferParams {
    pub dt: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl HundsdorferParams {
    pub fn new(dt: f64, theta: f64, sigma: f64) -> Result<Self> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(param("dt", format!("must be non-negative, got {dt}")));
        }
        if !(0.0..=1.0).contains(&theta) {
            return Err(param("theta", format!("must lie in [0, 1], got {theta}")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(param("sigma", format!("must be non-negative, got {sigma}")));
        }
        Ok(HundsdorferParams { dt, theta, sigma })
    }

    /// `theta = sigma = 1/2`.
    pub fn standard(dt: f64) -> Result<Self> {
        Self::new(dt, 0.5, 0.5)
    }
}

/// Solution of the coupled system: `v = -Δu` after every step.
#[derive(Clone, Debug, PartialEq)]
pub struct BiharmState {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl BiharmState {
    pub fn new(u: Field) -> Self {
        let v = &laplacian_5pt(&u) * -1.0;
        BiharmState { u, v, t: 0.0 }
    }
}

/// `-dxxxx U - dyyyy U - 2 dxx dyy U`, i.e. `-Δ_h(Δ_h U)`.
pub fn biharm_rhs(u: &Field) -> Field {
    let mixed = dxx_dyy(u);
    let mut out = &dxxxx(u) + &dyyyy(u);
    out = out.axpy(2.0, &mixed);
    &out * -1.0
}

/// Hundsdorfer step with `F0 = -2 dxx dyy`, `F1 = -dxxxx`, `F2 = -dyyyy`.
pub fn hundsdorfer_direct_step(u: &Field, p: HundsdorferParams) -> Result<Field> {
    let HundsdorferParams { dt, theta, sigma } = p;
    let tau = theta * dt;
    let ones = Field::constant(*u.grid(), 1.0);
    let sx = LineSystems::directional(Axis::X, &ones, None, tau, None)?;
    let sy = LineSystems::directional(Axis::Y, &ones, None, tau, None)?;
    let f1 = |w: &Field| &dxxxx(w) * -1.0;
    let f2 = |w: &Field| &dyyyy(w) * -1.0;

    let fu = biharm_rhs(u);
    let y0 = u.axpy(dt, &fu);
    check_stage(&y0, "Y0")?;
    let y1 = sx.solve(&y0.axpy(-tau, &f1(u)));
    check_stage(&y1, "Y1")?;
    let y2 = sy.solve(&y1.axpy(-tau, &f2(u)));
    check_stage(&y2, "Y2")?;
    let yt0 = y0.axpy(sigma * dt, &(&biharm_rhs(&y2) - &fu));
    check_stage(&yt0, "Yt0")?;
    let yt1 = sx.solve(&yt0.axpy(-tau, &f1(&y2)));
    check_stage(&yt1, "Yt1")?;
    let yt2 = sy.solve(&yt1.axpy(-tau, &f2(&y2)));
    check_stage(&yt2, "Yt2")?;
    Ok(yt2)
}

/// Hundsdorfer step on the coupled system `U_t = Δ V, V = -Δ U`.
pub fn hundsdorfer_coupled_step(s: &BiharmState, p: HundsdorferParams) -> Result<BiharmState> {
    let ones = Field::constant(*s.u.grid(), 1.0);
    let ops = CoupledOps {
        c1: &ones,
        c2: &ones,
        c3: None,
    };
    let u = hundsdorfer_coupled(&ops, &s.u, &s.v, p.dt, p.theta, p.sigma)?;
    let v = &laplacian_5pt(&u) * -1.0;
    Ok(BiharmState {
        u,
        v,
        t: s.t + p.dt,
    })
}

/// Eigenvalue of `-biharm_rhs` on the Fourier mode `(k, l)`.
pub fn biharm_symbol(grid: &Grid2D, k: usize, l: usize) -> f64 {
    let h2 = grid.h() * grid.h();
    let lx = 4.0 / h2
        * (std::f64::consts::PI * k as f64 / grid.nx() as f64)
            .sin()
            .powi(2);
    let ly = 4.0 / h2
        * (std::f64::consts::PI * l as f64 / grid.ny() as f64)
            .sin()
            .powi(2);
    (lx + ly) * (lx + ly)
}

/// Exact solution of `U' = biharm_rhs(U)` at time `t`.
pub fn biharm_exact(u0: &Field, t: f64) -> Result<Field> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(param("t", format!("must be non-negative, got {t}")));
    }
    let g = *u0.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let mut data: Vec<Complex64> = u0
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft2(&mut data, nx, ny, false);
    for l in 0..ny {
        for k in 0..nx {
            data[l * nx + k] *= (-biharm_symbol(&g, k, l) * t).exp();
        }
    }
    fft2(&mut data, nx, ny, true);
    let scale = 1.0 / (nx * ny) as f64;
    Ok(Field::from_raw(
        g,
        data.iter().map(|c| c.re * scale).collect(),
    ))
}

/// Unnormalised 2-D FFT of row-major `nx x ny` data.
fn fft2(data: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (fx, fy) = if inverse {
        (planner.plan_fft_inverse(nx), planner.plan_fft_inverse(ny))
    } else {
        (planner.plan_fft_forward(nx), planner.plan_fft_forward(ny))
    };
    for row in data.chunks_exact_mut(nx) {
        fx.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = data[j * nx + i];
        }
        fy.process(&mut col);
        for j in 0..ny {
            data[j * nx + i] = col[j];
        }
    }
}
