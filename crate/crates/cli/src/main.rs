//! `tvflow`: run the splitting schemes, stability sweeps and inpainting from
//! the command line.
//!
//! Exit status is 0 on success, 2 for bad configuration, 3 when a run
//! diverges (diagnostics up to that point are still written) and 1 otherwise.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tvflow_core::amos::InpaintProblem;
use tvflow_core::analysis::{
    cross_ic, dt_from_spec, run_fixed, run_to_steady, stability_bound, stability_sweep, IcId,
    RunDiagnostics, RunOptions, SchemeId, SchemeParams, SchemeStepper, Stepper, SweepSpec,
    EPS_LADDER, THETA_OPT,
};
use tvflow_core::imageio::{
    load_mask, load_pgm, save_pgm, write_diagnostics_csv, write_stability_csv, IcSource, RunConfig,
};
use tvflow_core::{Error, Field, Grid2D};

#[derive(Parser)]
#[command(
    name = "tvflow",
    version,
    about = "ADI schemes for fourth-order image flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a fixed number of steps of one scheme.
    Run(RunArgs),
    /// Map the smallest stable ε over a (θ, Δt) table.
    Sweep(SweepArgs),
    /// AMOS inpainting of a damaged image.
    Inpaint(InpaintArgs),
    /// Step until the per-node increment drops below a tolerance.
    Steady(SteadyArgs),
    /// Print name and version.
    Version,
}

/// Values that replace those of the config file.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    ny: Option<String>,
    /// Grid size for both axes.
    #[arg(long)]
    n: Option<String>,
    /// Δt = dtc·h^dtk.
    #[arg(long)]
    dtc: Option<String>,
    #[arg(long)]
    dtk: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Number, or `sqrt3` for 1/2 + √3/6.
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    /// gaussian, oscillatory, cross or file:<path.pgm>.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    mask: Option<String>,
    #[arg(long)]
    prefix: Option<String>,
    /// Comma-separated iterations to save as PGM.
    #[arg(long)]
    snapshots: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> tvflow_core::Result<()> {
        let pairs = [
            ("scheme", &self.scheme),
            ("nx", &self.n),
            ("ny", &self.n),
            ("nx", &self.nx),
            ("ny", &self.ny),
            ("dt_c", &self.dtc),
            ("dt_k", &self.dtk),
            ("eps", &self.eps),
            ("theta", &self.theta),
            ("sigma", &self.sigma),
            ("lambda", &self.lambda),
            ("iters", &self.iters),
            ("ic", &self.ic),
            ("mask", &self.mask),
            ("output_prefix", &self.prefix),
            ("snapshots", &self.snapshots),
        ];
        for (key, v) in pairs {
            if let Some(v) = v {
                cfg.set(key, v, 0)?;
            }
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    over: Overrides,
}

#[derive(Args)]
struct SteadyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 50_000)]
    cap: usize,
    #[command(flatten)]
    over: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scheme: SchemeId,
    #[arg(long, default_value = "gaussian")]
    ic: IcId,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Comma-separated θ values; `sqrt3` and `0.7887` mean 1/2 + √3/6.
    #[arg(long, default_value = "0,0.5,0.7887,1")]
    thetas: String,
    /// Comma-separated constants C of Δt = C·h^dtk.
    #[arg(long, default_value = "0.1")]
    dtcs: String,
    #[arg(long, default_value_t = 2)]
    dtk: i32,
    /// Ascending ε values to try.
    #[arg(long)]
    eps_ladder: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Steps per probe.
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long, default_value = "tvflow")]
    prefix: String,
}

#[derive(Args)]
struct InpaintArgs {
    /// Damaged image.
    #[arg(long)]
    image: PathBuf,
    /// Nonzero pixels mark the region to fill.
    #[arg(long)]
    mask: PathBuf,
    #[arg(long, default_value_t = 100.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    dtc: f64,
    #[arg(long, default_value_t = 3)]
    dtk: i32,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value = "tvflow")]
    prefix: String,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    kind: &'static str,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e {
            Error::Config { .. } => (2, "config"),
            Error::Parameter { .. } => (2, "parameter"),
            Error::Format { .. } => (1, "format"),
            Error::Io(_) => (1, "io"),
            Error::Divergence { .. } => (3, "divergence"),
            _ => (1, "solver"),
        };
        Failure {
            code,
            kind,
            msg: e.to_string(),
        }
    }
}

fn config_failure(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        kind: "config",
        msg: msg.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_config(path: Option<&Path>, over: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    over.apply(&mut cfg)?;
    Ok(cfg)
}

fn initial_state(cfg: &RunConfig, grid: Grid2D) -> CliResult<(Field, Option<InpaintProblem>)> {
    let u0 = match &cfg.ic {
        IcSource::Builtin(id) => id.build(grid),
        IcSource::File(p) => load_pgm(p, Some(&grid))?,
    };
    if cfg.scheme != SchemeId::AmosInpaint {
        return Ok((u0, None));
    }
    let mask = match (&cfg.mask, &cfg.ic) {
        (Some(p), _) => load_mask(p, Some(&grid))?,
        (None, IcSource::Builtin(IcId::Cross)) => cross_ic(grid).mask,
        (None, _) => {
            return Err(config_failure(
                "amos-inpaint needs `mask` unless ic = cross",
            ))
        }
    };
    let prob = InpaintProblem::new(u0.clone(), mask, cfg.lambda)?;
    Ok((u0, Some(prob)))
}

fn stepper(cfg: &RunConfig) -> CliResult<SchemeStepper> {
    let grid = cfg.grid()?;
    let (u0, prob) = initial_state(cfg, grid)?;
    Ok(SchemeStepper::new(
        cfg.scheme,
        u0,
        cfg.scheme_params()?,
        prob,
    )?)
}

/// Runs stop as divergent once the sup-norm leaves the stability bound.
fn run_options(s: &SchemeStepper, eps: f64) -> RunOptions {
    RunOptions {
        energy_eps: eps,
        abort_above: Some(stability_bound(s.u().sup_norm())),
    }
}

fn snapshot_path(prefix: &str, iter: usize) -> String {
    format!("{prefix}_u{iter}.pgm")
}

/// Write diagnostics, then turn a recorded divergence into exit status 3.
fn finish(prefix: &str, run: &RunDiagnostics) -> CliResult<()> {
    write_diagnostics_csv(format!("{prefix}_diag.csv"), run)?;
    match &run.divergence {
        Some(d) => Err(Failure {
            code: 3,
            kind: "divergence",
            msg: format!(
                "diverged at iteration {} in stage `{}` (sup-norm {:e})",
                d.iter, d.stage, d.sup_norm
            ),
        }),
        None => Ok(()),
    }
}

fn cmd_run(args: &RunArgs) -> CliResult<()> {
    let cfg = load_config(args.config.as_deref(), &args.over)?;
    let mut s = stepper(&cfg)?;
    let prefix = cfg.output_prefix.as_str();
    if cfg.snapshots.contains(&0) {
        save_pgm(snapshot_path(prefix, 0), s.u())?;
    }
    let opts = run_options(&s, cfg.eps);
    let run = run_fixed(&mut s, cfg.iters, &opts, |iter, u| {
        if cfg.snapshots.contains(&iter) {
            save_pgm(snapshot_path(prefix, iter), u)?;
        }
        Ok(())
    })?;
    finish(prefix, &run)
}

fn cmd_steady(args: &SteadyArgs) -> CliResult<()> {
    let cfg = load_config(args.config.as_deref(), &args.over)?;
    let mut s = stepper(&cfg)?;
    let opts = run_options(&s, cfg.eps);
    let run = run_to_steady(&mut s, args.tol, args.cap, &opts)?;
    save_pgm(format!("{}_steady.pgm", cfg.output_prefix), s.u())?;
    finish(&cfg.output_prefix, &run)?;
    let last = run.last().map_or(f64::NAN, |r| r.increment);
    println!(
        "iterations={} converged={} increment={last:e}",
        run.records.len(),
        run.converged
    );
    Ok(())
}

fn parse_list(flag: &str, text: &str, theta: bool) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "sqrt3" | "0.7887" if theta => Ok(THETA_OPT),
            _ => s
                .parse::<f64>()
                .map_err(|e| config_failure(format!("--{flag}: cannot parse `{s}`: {e}"))),
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let grid = Grid2D::unit_square(args.n)?;
    let dts = parse_list("dtcs", &args.dtcs, false)?
        .into_iter()
        .map(|c| dt_from_spec(&grid, c, args.dtk))
        .collect();
    let eps_ladder = match &args.eps_ladder {
        Some(t) => parse_list("eps-ladder", t, false)?,
        None => EPS_LADDER.to_vec(),
    };
    let spec = SweepSpec {
        scheme: args.scheme,
        ic: args.ic,
        grid,
        thetas: parse_list("thetas", &args.thetas, true)?,
        dts,
        eps_ladder,
        sigma: args.sigma,
        horizon: args.horizon,
    };
    let map = stability_sweep(&spec)?;
    write_stability_csv(format!("{}_stability.csv", args.prefix), &map)?;
    Ok(())
}

fn cmd_inpaint(args: &InpaintArgs) -> CliResult<()> {
    let f = load_pgm(&args.image, None)?;
    let grid = *f.grid();
    let mask = load_mask(&args.mask, Some(&grid))?;
    let prob = InpaintProblem::new(f.clone(), mask, args.lambda)?;
    let params = SchemeParams {
        dt: dt_from_spec(&grid, args.dtc, args.dtk),
        eps: args.eps,
        theta: 0.5,
        sigma: 0.5,
    };
    let mut s = SchemeStepper::new(SchemeId::AmosInpaint, f, params, Some(prob))?;
    let opts = run_options(&s, args.eps);
    let run = run_fixed(&mut s, args.iters, &opts, |_, _| Ok(()))?;
    save_pgm(format!("{}_inpainted.pgm", args.prefix), s.u())?;
    finish(&args.prefix, &run)
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("TVFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| config_failure(format!("TVFLOW_THREADS: expected a count, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure {
            code: 1,
            kind: "threads",
            msg: e.to_string(),
        })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = configure_threads().and_then(|()| match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Inpaint(a) => cmd_inpaint(a),
        Command::Steady(a) => cmd_steady(a),
        Command::Version => {
            println!("tvflow {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.kind, f.msg.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
