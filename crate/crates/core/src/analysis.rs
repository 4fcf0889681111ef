//! Energies, initial conditions, run drivers and the ε-Δt stability sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::amos::{amos_inpaint_step, amos_step, AmosState, InpaintProblem};
use crate::biharmonic::{
    hundsdorfer_coupled_step, hundsdorfer_direct_step, BiharmState, HundsdorferParams,
};
use crate::error::{param, require_positive, Error, Result};
use crate::grid_ops::{grad_mag_eps, Field, Grid2D, Mask};
use crate::tvh1::{hundsdorfer_tvh1_step, peaceman_rachford_tvh1_step, TVState};

/// A step whose sup-norm exceeds this multiple of `max(1, |u0|)` is a blow-up.
pub const DIVERGENCE_FACTOR: f64 = 1e8;

/// Default ε ladder of the stability sweep.
pub const EPS_LADDER: [f64; 9] = [0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];

/// `1/2 + sqrt(3)/6`
pub const THETA_OPT: f64 = 0.788_675_134_594_812_9;

/// `sum |∇u|_ε h^2`
pub fn tv_energy_eps(u: &Field, eps: f64) -> Result<f64> {
    let h2 = u.grid().h().powi(2);
    Ok(grad_mag_eps(u, eps)?.sum() * h2)
}

/// `(sum (|∇u|^2 + ε) h^2)^(1/2)`
pub fn grad_norm_eps(u: &Field, eps: f64) -> Result<f64> {
    let h2 = u.grid().h().powi(2);
    Ok((grad_mag_eps(u, eps)?
        .values()
        .iter()
        .map(|m| m * m)
        .sum::<f64>()
        * h2)
        .sqrt())
}

/// `exp(-((x - 1/2)^2 + (y + 1/2)^2) / gamma_sq)` at the nodes.
pub fn gaussian_ic(g: Grid2D, gamma_sq: f64) -> Result<Field> {
    require_positive("gamma_sq", gamma_sq)?;
    Ok(Field::from_fn(g, |x, y| {
        (-((x - 0.5).powi(2) + (y + 0.5).powi(2)) / gamma_sq).exp()
    }))
}

/// `sin(8 pi x) + cos(8 pi y)`
pub fn oscillatory_ic(g: Grid2D) -> Field {
    use std::f64::consts::PI;
    Field::from_fn(g, |x, y| (8.0 * PI * x).sin() + (8.0 * PI * y).cos())
}

/// Synthetic inpainting test image.
#[derive(Clone, Debug)]
pub struct CrossImage {
    /// Undamaged image: 1 on a centred plus sign, 0 elsewhere.
    pub truth: Field,
    /// `truth` with the gap set to 0.
    pub damaged: Field,
    /// Centred square gap, true inside.
    pub mask: Mask,
}

/// Cross of arm width `n/5` with a centred square gap of side `4n/15`
/// (30 and 40 pixels at 150x150).
pub fn cross_ic(g: Grid2D) -> CrossImage {
    let band = |n: usize, w: usize| {
        let lo = (n - w) / 2;
        lo..lo + w
    };
    let arm = |n: usize| ((n as f64) * 0.2).round() as usize;
    let gap = |n: usize| ((n as f64) * 4.0 / 15.0).round() as usize;
    let (ax, ay) = (band(g.nx(), arm(g.nx())), band(g.ny(), arm(g.ny())));
    let (gx, gy) = (band(g.nx(), gap(g.nx())), band(g.ny(), gap(g.ny())));
    let truth = Field::from_index_fn(g, |i, j| {
        if ax.contains(&i) || ay.contains(&j) {
            1.0
        } else {
            0.0
        }
    });
    let mask = Mask::from_index_fn(&g, |i, j| gx.contains(&i) && gy.contains(&j));
    let damaged =
        Field::from_index_fn(g, |i, j| if mask.get(i, j) { 0.0 } else { truth.get(i, j) });
    CrossImage {
        truth,
        damaged,
        mask,
    }
}

macro_rules! named_enum {
    ($name:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($s => Ok($name::$var),)+
                    _ => Err(format!(
                        "unknown {} `{}` (expected one of: {})",
                        stringify!($name),
                        s,
                        [$($s),+].join(", ")
                    )),
                }
            }
        }
    };
}

named_enum!(SchemeId {
    BiharmDirect => "biharm-direct",
    BiharmCoupled => "biharm-coupled",
    Tvh1Hundsdorfer => "tvh1-hundsdorfer",
    Tvh1Pr => "tvh1-pr",
    Amos => "amos",
    AmosInpaint => "amos-inpaint",
});

named_enum!(IcId {
    Gaussian => "gaussian",
    Oscillatory => "oscillatory",
    Cross => "cross",
});

/// γ² of the Gaussian initial condition.
pub const GAUSSIAN_GAMMA_SQ: f64 = 100.0;

impl IcId {
    pub fn build(self, g: Grid2D) -> Field {
        match self {
            IcId::Gaussian => gaussian_ic(g, GAUSSIAN_GAMMA_SQ).expect("positive width"),
            IcId::Oscillatory => oscillatory_ic(g),
            IcId::Cross => cross_ic(g).damaged,
        }
    }
}

/// `C h^k`
pub fn dt_from_spec(g: &Grid2D, c: f64, k: i32) -> f64 {
    c * g.h().powi(k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    pub dt: f64,
    pub eps: f64,
    pub theta: f64,
    pub sigma: f64,
}

/// One time-stepping method with its state.
pub trait Stepper {
    fn u(&self) -> &Field;
    fn time(&self) -> f64;
    fn step(&mut self) -> Result<()>;
}

#[derive(Clone, Debug)]
enum State {
    Plain { u: Field, t: f64 },
    Biharm(BiharmState),
    Tv(TVState),
    Amos(AmosState),
}

/// Every scheme of the library behind the [`Stepper`] interface.
#[derive(Clone, Debug)]
pub struct SchemeStepper {
    scheme: SchemeId,
    params: SchemeParams,
    state: State,
    inpaint: Option<InpaintProblem>,
}

impl SchemeStepper {
    pub fn new(
        scheme: SchemeId,
        u0: Field,
        params: SchemeParams,
        inpaint: Option<InpaintProblem>,
    ) -> Result<Self> {
        HundsdorferParams::new(params.dt, params.theta, params.sigma)?;
        require_positive("eps", params.eps)?;
        u0.check_finite()?;
        let state = match scheme {
            SchemeId::BiharmDirect => State::Plain { u: u0, t: 0.0 },
            SchemeId::BiharmCoupled => State::Biharm(BiharmState::new(u0)),
            SchemeId::Tvh1Hundsdorfer => State::Tv(TVState::lin1(u0, params.eps)?),
            SchemeId::Tvh1Pr => State::Tv(TVState::lin2(u0, params.eps)?),
            SchemeId::Amos | SchemeId::AmosInpaint => State::Amos(AmosState::new(u0, params.eps)?),
        };
        if scheme == SchemeId::AmosInpaint && inpaint.is_none() {
            return Err(param("scheme", "amos-inpaint needs an inpainting problem"));
        }
        Ok(SchemeStepper {
            scheme,
            params,
            state,
            inpaint,
        })
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }
}

impl Stepper for SchemeStepper {
    fn u(&self) -> &Field {
        match &self.state {
            State::Plain { u, .. } => u,
            State::Biharm(s) => &s.u,
            State::Tv(s) => &s.u,
            State::Amos(s) => &s.u,
        }
    }

    fn time(&self) -> f64 {
        match &self.state {
            State::Plain { t, .. } => *t,
            State::Biharm(s) => s.t,
            State::Tv(s) => s.t,
            State::Amos(s) => s.t,
        }
    }

    fn step(&mut self) -> Result<()> {
        let SchemeParams {
            dt,
            eps,
            theta,
            sigma,
        } = self.params;
        let hp = HundsdorferParams::new(dt, theta, sigma)?;
        self.state = match (&self.state, self.scheme) {
            (State::Plain { u, t }, _) => State::Plain {
                u: hundsdorfer_direct_step(u, hp)?,
                t: t + dt,
            },
            (State::Biharm(s), _) => State::Biharm(hundsdorfer_coupled_step(s, hp)?),
            (State::Tv(s), SchemeId::Tvh1Hundsdorfer) => {
                State::Tv(hundsdorfer_tvh1_step(s, &s.u, hp, eps)?)
            }
            (State::Tv(s), _) => State::Tv(peaceman_rachford_tvh1_step(s, &s.u, dt, eps)?),
            (State::Amos(s), SchemeId::AmosInpaint) => {
                let prob = self.inpaint.as_ref().expect("checked at construction");
                State::Amos(amos_inpaint_step(s, prob, dt, eps)?)
            }
            (State::Amos(s), _) => State::Amos(amos_step(s, dt, eps)?),
        };
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagRecord {
    pub iter: usize,
    pub time: f64,
    pub sup_norm: f64,
    pub mean: f64,
    pub tv_energy: f64,
    pub increment: f64,
}

/// Where and why a run was cut short.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceEvent {
    pub iter: usize,
    pub stage: String,
    pub sup_norm: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunDiagnostics {
    pub records: Vec<DiagRecord>,
    pub divergence: Option<DivergenceEvent>,
    pub converged: bool,
}

impl RunDiagnostics {
    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn last(&self) -> Option<&DiagRecord> {
        self.records.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    /// ε used for the recorded TV energy.
    pub energy_eps: f64,
    /// Stop (flagged as divergence) once the sup-norm exceeds this value.
    pub abort_above: Option<f64>,
}

impl RunOptions {
    pub fn new(energy_eps: f64) -> Self {
        RunOptions {
            energy_eps,
            abort_above: None,
        }
    }
}

/// Outcome of a single step inside a run.
enum StepOutcome {
    Recorded(DiagRecord),
    Stopped,
}

fn advance<S: Stepper + ?Sized>(
    s: &mut S,
    iter: usize,
    limit: f64,
    opts: &RunOptions,
    diag: &mut RunDiagnostics,
) -> Result<StepOutcome> {
    let prev = s.u().clone();
    match s.step() {
        Ok(()) => {}
        Err(Error::Divergence { stage, sup_norm }) => {
            diag.divergence = Some(DivergenceEvent {
                iter,
                stage: stage.to_string(),
                sup_norm,
            });
            return Ok(StepOutcome::Stopped);
        }
        Err(e) => return Err(e),
    }
    let u = s.u();
    let sup = u.sup_norm();
    let over = opts.abort_above.is_some_and(|a| sup > a);
    if !sup.is_finite() || sup > limit || over {
        diag.divergence = Some(DivergenceEvent {
            iter,
            stage: if over { "threshold" } else { "amplitude" }.to_string(),
            sup_norm: sup,
        });
        return Ok(StepOutcome::Stopped);
    }
    let g = u.grid();
    let rec = DiagRecord {
        iter,
        time: s.time(),
        sup_norm: sup,
        mean: u.mean(),
        tv_energy: tv_energy_eps(u, opts.energy_eps)?,
        increment: u.max_abs_diff(&prev) / g.len() as f64,
    };
    diag.records.push(rec);
    Ok(StepOutcome::Recorded(rec))
}

/// Run `iters` steps, calling `on_step(iter, u)` after each recorded step.
pub fn run_fixed<S, F>(
    s: &mut S,
    iters: usize,
    opts: &RunOptions,
    mut on_step: F,
) -> Result<RunDiagnostics>
where
    S: Stepper + ?Sized,
    F: FnMut(usize, &Field) -> Result<()>,
{
    require_positive("energy_eps", opts.energy_eps)?;
    let limit = DIVERGENCE_FACTOR * s.u().sup_norm().max(1.0);
    let mut diag = RunDiagnostics::default();
    for iter in 1..=iters {
        match advance(s, iter, limit, opts, &mut diag)? {
            StepOutcome::Recorded(_) => on_step(iter, s.u())?,
            StepOutcome::Stopped => break,
        }
    }
    Ok(diag)
}

/// Step until the increment `|U_{n+1} - U_n|_inf / (MN)` reaches `tol`, or
/// `cap` steps have been taken. `converged` reports which.
pub fn run_to_steady<S: Stepper + ?Sized>(
    s: &mut S,
    tol: f64,
    cap: usize,
    opts: &RunOptions,
) -> Result<RunDiagnostics> {
    require_positive("tol", tol)?;
    require_positive("energy_eps", opts.energy_eps)?;
    if cap == 0 {
        return Err(param("cap", "must be at least 1"));
    }
    let limit = DIVERGENCE_FACTOR * s.u().sup_norm().max(1.0);
    let mut diag = RunDiagnostics::default();
    for iter in 1..=cap {
        match advance(s, iter, limit, opts, &mut diag)? {
            StepOutcome::Recorded(r) if r.increment <= tol => {
                diag.converged = true;
                break;
            }
            StepOutcome::Recorded(_) => {}
            StepOutcome::Stopped => break,
        }
    }
    Ok(diag)
}

/// Bound used by [`classify_stable`].
pub fn stability_bound(u0_sup: f64) -> f64 {
    (10.0 * u0_sup).max(u0_sup + 1.0)
}

/// Bounded run: no divergence and every sup-norm within [`stability_bound`].
pub fn classify_stable(run: &RunDiagnostics, u0_sup: f64) -> bool {
    classify_stable_with(run, stability_bound(u0_sup))
}

pub fn classify_stable_with(run: &RunDiagnostics, bound: f64) -> bool {
    !run.diverged() && run.records.iter().all(|r| r.sup_norm <= bound)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityMap {
    pub theta_values: Vec<f64>,
    pub dt_values: Vec<f64>,
    /// `eps_min[theta][dt]`; `None` when no tested ε was stable.
    pub eps_min: Vec<Vec<Option<f64>>>,
}

impl StabilityMap {
    /// `(theta, dt, eps_min)` in row-major order, one entry per cell.
    pub fn cells(&self) -> Vec<(f64, f64, Option<f64>)> {
        let mut out = Vec::new();
        for (a, &th) in self.theta_values.iter().enumerate() {
            for (b, &dt) in self.dt_values.iter().enumerate() {
                out.push((th, dt, self.eps_min[a][b]));
            }
        }
        out
    }

    /// Column `dt_index` as numbers, with `+inf` for cells that never were stable.
    pub fn column(&self, dt_index: usize) -> Vec<f64> {
        self.eps_min
            .iter()
            .map(|row| row[dt_index].unwrap_or(f64::INFINITY))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub scheme: SchemeId,
    pub ic: IcId,
    pub grid: Grid2D,
    pub thetas: Vec<f64>,
    pub dts: Vec<f64>,
    pub eps_ladder: Vec<f64>,
    pub sigma: f64,
    pub horizon: usize,
}

/// Whether `horizon` steps at `(theta, dt, eps)` stay bounded.
pub fn probe_stability(spec: &SweepSpec, theta: f64, dt: f64, eps: f64) -> Result<bool> {
    let u0 = spec.ic.build(spec.grid);
    let sup0 = u0.sup_norm();
    let inpaint = match spec.scheme {
        SchemeId::AmosInpaint => {
            let c = cross_ic(spec.grid);
            Some(InpaintProblem::new(c.damaged, c.mask, 100.0)?)
        }
        _ => None,
    };
    let params = SchemeParams {
        dt,
        eps,
        theta,
        sigma: spec.sigma,
    };
    let mut s = SchemeStepper::new(spec.scheme, u0, params, inpaint)?;
    let opts = RunOptions {
        energy_eps: eps,
        abort_above: Some(stability_bound(sup0)),
    };
    let run = run_fixed(&mut s, spec.horizon, &opts, |_, _| Ok(()))?;
    Ok(classify_stable(&run, sup0))
}

/// For every `(theta, dt)` the smallest ladder ε whose run stays bounded.
/// Cells are independent and run in parallel.
pub fn stability_sweep(spec: &SweepSpec) -> Result<StabilityMap> {
    if spec.thetas.is_empty() || spec.dts.is_empty() || spec.eps_ladder.is_empty() {
        return Err(param("sweep", "theta, dt and eps lists must be non-empty"));
    }
    if spec.eps_ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(param("eps_ladder", "must be strictly ascending"));
    }
    if spec.horizon == 0 {
        return Err(param("horizon", "must be at least 1"));
    }
    let cells: Vec<(usize, usize)> = (0..spec.thetas.len())
        .flat_map(|a| (0..spec.dts.len()).map(move |b| (a, b)))
        .collect();
    let found = cells
        .par_iter()
        .map(|&(a, b)| {
            for &eps in &spec.eps_ladder {
                if probe_stability(spec, spec.thetas[a], spec.dts[b], eps)? {
                    return Ok(Some(eps));
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut eps_min = vec![vec![None; spec.dts.len()]; spec.thetas.len()];
    for (&(a, b), e) in cells.iter().zip(found) {
        eps_min[a][b] = e;
    }
    Ok(StabilityMap {
        theta_values: spec.thetas.clone(),
        dt_values: spec.dts.clone(),
        eps_min,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(param("fit", "need at least two paired samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(param("fit", "abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fit `ln(increment)` against the iteration index, skipping zero increments.
pub fn fit_log_increment(run: &RunDiagnostics) -> Result<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = run
        .records
        .iter()
        .filter(|r| r.increment > 0.0)
        .map(|r| (r.iter as f64, r.increment.ln()))
        .unzip();
    fit_line(&x, &y)
}
