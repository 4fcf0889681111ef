//! `key = value` run configuration with `#` comments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::{dt_from_spec, IcId, SchemeId, SchemeParams, THETA_OPT};
use crate::error::{Error, Result};
use crate::grid_ops::Grid2D;

use super::fmt_f64;

/// Initial condition: a built-in field or a PGM file.
#[derive(Clone, Debug, PartialEq)]
pub enum IcSource {
    Builtin(IcId),
    File(PathBuf),
}

impl FromStr for IcSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.strip_prefix("file:") {
            Some("") => Err("empty path after `file:`".into()),
            Some(p) => Ok(IcSource::File(PathBuf::from(p))),
            None => s.parse().map(IcSource::Builtin),
        }
    }
}

impl std::fmt::Display for IcSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IcSource::Builtin(id) => write!(f, "{id}"),
            IcSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeId,
    pub nx: usize,
    pub ny: usize,
    /// `dt = dt_c * h^dt_k`
    pub dt_c: f64,
    pub dt_k: i32,
    pub eps: f64,
    pub theta: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub iters: usize,
    pub ic: IcSource,
    pub mask: Option<PathBuf>,
    pub output_prefix: String,
    /// Iterations after which a snapshot image is written.
    pub snapshots: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: SchemeId::BiharmCoupled,
            nx: 100,
            ny: 100,
            dt_c: 0.1,
            dt_k: 2,
            eps: 0.1,
            theta: 0.5,
            sigma: 0.5,
            lambda: 100.0,
            iters: 100,
            ic: IcSource::Builtin(IcId::Gaussian),
            mask: None,
            output_prefix: "tvflow".into(),
            snapshots: Vec::new(),
        }
    }
}

pub const KEYS: [&str; 14] = [
    "scheme",
    "nx",
    "ny",
    "dt_c",
    "dt_k",
    "eps",
    "theta",
    "sigma",
    "lambda",
    "iters",
    "ic",
    "mask",
    "output_prefix",
    "snapshots",
];

fn parse_theta(v: &str) -> std::result::Result<f64, String> {
    match v {
        "sqrt3" | "0.7887" => Ok(THETA_OPT),
        _ => v.parse().map_err(|e| format!("{e}")),
    }
}

fn check(ok: bool, what: &str) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse()
        .map_err(|e: T::Err| format!("cannot parse `{v}`: {e}"))
}

impl RunConfig {
    /// Set one key from its text form. `line` is reported in errors; use 0
    /// for values that came from the command line.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let v = value.trim();
        let res: std::result::Result<(), String> = (|| {
            match key {
                "scheme" => self.scheme = v.parse()?,
                "nx" => {
                    self.nx = num(v)?;
                    check(self.nx >= Grid2D::MIN_POINTS, "must be at least 4")?;
                }
                "ny" => {
                    self.ny = num(v)?;
                    check(self.ny >= Grid2D::MIN_POINTS, "must be at least 4")?;
                }
                "dt_c" => {
                    self.dt_c = num(v)?;
                    check(self.dt_c > 0.0 && self.dt_c.is_finite(), "must be positive")?;
                }
                "dt_k" => {
                    self.dt_k = num(v)?;
                    check((0..=8).contains(&self.dt_k), "must lie in 0..=8")?;
                }
                "eps" => {
                    self.eps = num(v)?;
                    check(self.eps > 0.0 && self.eps.is_finite(), "must be positive")?;
                }
                "theta" => {
                    self.theta = parse_theta(v)?;
                    check((0.0..=1.0).contains(&self.theta), "must lie in [0, 1]")?;
                }
                "sigma" => {
                    self.sigma = num(v)?;
                    check(
                        self.sigma >= 0.0 && self.sigma.is_finite(),
                        "must be non-negative",
                    )?;
                }
                "lambda" => {
                    self.lambda = num(v)?;
                    check(
                        self.lambda >= 0.0 && self.lambda.is_finite(),
                        "must be non-negative",
                    )?;
                }
                "iters" => self.iters = num(v)?,
                "ic" => self.ic = v.parse()?,
                "mask" => self.mask = (!v.is_empty()).then(|| PathBuf::from(v)),
                "output_prefix" => {
                    check(!v.is_empty(), "must not be empty")?;
                    self.output_prefix = v.to_string();
                }
                "snapshots" => {
                    self.snapshots = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(num)
                        .collect::<std::result::Result<_, _>>()?;
                }
                _ => return Err("unknown key".into()),
            }
            Ok(())
        })();
        res.map_err(|reason| Error::Config {
            line,
            key: key.to_string(),
            reason,
        })
    }

    /// Defaults overridden by the lines of `text`.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: n + 1,
                    key: line.to_string(),
                    reason: "expected `key = value`".into(),
                });
            };
            cfg.set(k.trim(), v, n + 1)?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        RunConfig::parse_str(&std::fs::read_to_string(path)?)
    }

    /// Text form accepted by [`RunConfig::parse_str`]; every key is written.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("string write");
        put("scheme", self.scheme.to_string());
        put("nx", self.nx.to_string());
        put("ny", self.ny.to_string());
        put("dt_c", fmt_f64(self.dt_c));
        put("dt_k", self.dt_k.to_string());
        put("eps", fmt_f64(self.eps));
        put("theta", fmt_f64(self.theta));
        put("sigma", fmt_f64(self.sigma));
        put("lambda", fmt_f64(self.lambda));
        put("iters", self.iters.to_string());
        put("ic", self.ic.to_string());
        put(
            "mask",
            self.mask
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        put("output_prefix", self.output_prefix.clone());
        let snaps: Vec<String> = self.snapshots.iter().map(|k| k.to_string()).collect();
        put("snapshots", snaps.join(","));
        s
    }

    /// Unit-spaced grid, `h = 1/nx`.
    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny, 1.0 / self.nx as f64)
    }

    pub fn scheme_params(&self) -> Result<SchemeParams> {
        Ok(SchemeParams {
            dt: dt_from_spec(&self.grid()?, self.dt_c, self.dt_k),
            eps: self.eps,
            theta: self.theta,
            sigma: self.sigma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn comments_blank_lines_and_theta_tokens() {
        let c =
            RunConfig::parse_str("# header\n\nscheme = amos  # trailing\ntheta = sqrt3\n").unwrap();
        assert_eq!(c.scheme, SchemeId::Amos);
        assert_eq!(c.theta, THETA_OPT);
        assert_eq!(
            RunConfig::parse_str("theta=0.7887").unwrap().theta,
            THETA_OPT
        );
        let c = RunConfig::parse_str("ic = file:/tmp/a b.pgm\nsnapshots = 4, 20,200").unwrap();
        assert_eq!(c.ic, IcSource::File("/tmp/a b.pgm".into()));
        assert_eq!(c.snapshots, vec![4, 20, 200]);
    }

    #[test]
    fn errors_name_line_and_key() {
        let e = RunConfig::parse_str("nx = 10\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, ref key, .. } if key == "bogus"));
        let e = RunConfig::parse_str("\n\neps = -1").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, ref key, .. } if key == "eps"));
        let e = RunConfig::parse_str("iters 5").unwrap_err();
        assert!(matches!(e, Error::Config { line: 1, .. }));
        assert!(RunConfig::parse_str("scheme = foo").is_err());
        assert!(RunConfig::parse_str("theta = 1.5").is_err());
    }

    #[test]
    fn flag_overrides_after_file() {
        let mut c = RunConfig::parse_str("iters = 5").unwrap();
        c.set("iters", "7", 0).unwrap();
        assert_eq!(c.iters, 7);
        assert!(matches!(
            c.set("nope", "1", 0),
            Err(Error::Config { line: 0, .. })
        ));
    }

    fn config() -> impl Strategy<Value = RunConfig> {
        let ic = prop_oneof![
            proptest::sample::select(IcId::ALL).prop_map(IcSource::Builtin),
            "[a-z/]{1,12}\\.pgm".prop_map(|p| IcSource::File(p.into())),
        ];
        (
            proptest::sample::select(SchemeId::ALL),
            (4usize..500, 4usize..500, 1e-6f64..10.0, 0i32..=8),
            (1e-6f64..100.0, 0.0f64..=1.0, 0.0f64..2.0, 0.0f64..1e4),
            (
                0usize..100_000,
                ic,
                proptest::option::of("[a-z_]{1,10}\\.pgm"),
            ),
            (
                "[a-z_]{1,10}",
                proptest::collection::vec(0usize..5000, 0..5),
            ),
        )
            .prop_map(
                |(
                    scheme,
                    (nx, ny, dt_c, dt_k),
                    (eps, theta, sigma, lambda),
                    (iters, ic, mask),
                    (prefix, snapshots),
                )| {
                    RunConfig {
                        scheme,
                        nx,
                        ny,
                        dt_c,
                        dt_k,
                        eps,
                        theta,
                        sigma,
                        lambda,
                        iters,
                        ic,
                        mask: mask.map(PathBuf::from),
                        output_prefix: prefix,
                        snapshots,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(c in config()) {
            prop_assert_eq!(RunConfig::parse_str(&c.to_config_string()).unwrap(), c);
        }
    }
}
