//! Run configuration: a flat `dotted.key = value` text file.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are rejected so a
//! typo cannot silently fall back to a default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use beltrami_core::variational::MinimizeMode;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

const KNOWN_KEYS: &[&str] = &[
    "grid.n",
    "physics.nu",
    "physics.eta",
    "physics.hall",
    "time.dt",
    "time.t_end",
    "time.record_every",
    "init.kind",
    "init.seed",
    "init.amplitude",
    "init.peak",
    "init.abc.a",
    "init.abc.b",
    "init.abc.c",
    "init.abc.lambda0",
    "init.shell.n",
    "init.shell.sign",
    "init.target",
    "init.shell1.n",
    "init.shell1.sign",
    "init.shell2.n",
    "init.shell2.sign",
    "init.checkpoint.path",
    "init.random.band",
    "perturbation.enabled",
    "perturbation.amplitude",
    "perturbation.seed",
    "perturbation.band",
    "output.csv_path",
    "output.checkpoint_path",
    "output.checkpoint_every",
    "minimize.mode",
    "minimize.h1",
    "minimize.h2",
    "minimize.max_iter",
];

/// Parsed but untyped `key -> value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected 'key = value'", i + 1));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return err(format!("line {}: empty key or value", i + 1));
            }
            if !KNOWN_KEYS.contains(&k) {
                return err(format!("line {}: unknown key '{k}'", i + 1));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return err(format!("line {}: duplicate key '{k}'", i + 1));
            }
        }
        Ok(Self(map))
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.0.insert(key.to_string(), value);
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("{key}: cannot parse '{v}'"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn need<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get(key)?
            .ok_or_else(|| ConfigError(format!("missing required key '{key}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

/// Which of `u`, `B` an abc, shell or random initial condition populates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTarget {
    U,
    B,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Abc {
        a: f64,
        b: f64,
        c: f64,
        lambda0: f64,
    },
    Shell {
        n: u32,
        sign: i8,
    },
    DoubleBeltrami {
        first: (u32, i8),
        second: (u32, i8),
    },
    Checkpoint {
        path: PathBuf,
    },
    Random {
        band: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    /// `||(v, b)||` relative to `||(u, B)||`.
    pub amplitude: f64,
    pub seed: u64,
    pub band: u32,
}

/// Fully resolved configuration; every field has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid_n: usize,
    pub nu: f64,
    pub eta: f64,
    pub hall: f64,
    pub dt: TimeStep,
    pub t_end: f64,
    pub record_every: usize,
    pub init: InitSpec,
    /// Fields populated by the abc, shell and random kinds.
    pub target: FieldTarget,
    pub seed: u64,
    pub amplitude: f64,
    /// Rescale so the pointwise maximum of `|u|`, `|B|` equals this.
    pub peak: Option<f64>,
    pub perturbation: Option<Perturbation>,
    pub csv_path: PathBuf,
    pub checkpoint_path: PathBuf,
    pub checkpoint_every: usize,
    pub mode: MinimizeMode,
    pub h1: Option<f64>,
    pub h2: Option<f64>,
    pub max_iter: usize,
}

fn sign(key: &str, v: i64) -> Result<i8, ConfigError> {
    match v {
        1 => Ok(1),
        -1 => Ok(-1),
        _ => err(format!("{key}: sign must be 1 or -1, got {v}")),
    }
}

fn nonneg(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        err(format!("{key}: must be finite and >= 0, got {v}"))
    }
}

pub fn mode_name(m: MinimizeMode) -> &'static str {
    match m {
        MinimizeMode::Woltjer => "woltjer",
        MinimizeMode::FixedOmega => "fixed_omega",
        MinimizeMode::Full => "full",
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let grid_n: usize = raw.or("grid.n", 32)?;
        if grid_n < 8 || grid_n % 2 != 0 {
            return err(format!("grid.n must be even and at least 8, got {grid_n}"));
        }
        let dt = match raw.0.get("time.dt").map(String::as_str) {
            None | Some("auto") => TimeStep::Auto,
            Some(_) => {
                let v: f64 = raw.need("time.dt")?;
                if !(v.is_finite() && v > 0.0) {
                    return err(format!("time.dt must be positive or 'auto', got {v}"));
                }
                TimeStep::Fixed(v)
            }
        };
        let t_end = nonneg("time.t_end", raw.or("time.t_end", 1.0)?)?;
        let record_every: usize = raw.or("time.record_every", 10)?;
        if record_every == 0 {
            return err("time.record_every must be at least 1");
        }
        let kind: String = raw.or("init.kind", "abc".to_string())?;
        let init = match kind.as_str() {
            "abc" => InitSpec::Abc {
                a: raw.or("init.abc.a", 1.0)?,
                b: raw.or("init.abc.b", 1.0)?,
                c: raw.or("init.abc.c", 1.0)?,
                lambda0: raw.or("init.abc.lambda0", 1.0)?,
            },
            "shell" => InitSpec::Shell {
                n: raw.need("init.shell.n")?,
                sign: sign("init.shell.sign", raw.or("init.shell.sign", 1)?)?,
            },
            "double_beltrami" => InitSpec::DoubleBeltrami {
                first: (
                    raw.need("init.shell1.n")?,
                    sign("init.shell1.sign", raw.need("init.shell1.sign")?)?,
                ),
                second: (
                    raw.need("init.shell2.n")?,
                    sign("init.shell2.sign", raw.need("init.shell2.sign")?)?,
                ),
            },
            "checkpoint" => InitSpec::Checkpoint {
                path: PathBuf::from(raw.need::<String>("init.checkpoint.path")?),
            },
            "random" => InitSpec::Random {
                band: raw.or("init.random.band", 9)?,
            },
            k => {
                return err(format!(
                    "init.kind must be abc, shell, double_beltrami, checkpoint or random, got '{k}'"
                ))
            }
        };
        let target = match raw.or("init.target", "u".to_string())?.as_str() {
            "u" => FieldTarget::U,
            "b" => FieldTarget::B,
            "both" => FieldTarget::Both,
            t => return err(format!("init.target must be u, b or both, got '{t}'")),
        };
        let seed: u64 = raw.or("init.seed", 0)?;
        let peak: Option<f64> = raw.get("init.peak")?;
        if let Some(p) = peak {
            if !(p.is_finite() && p > 0.0) {
                return err(format!("init.peak must be positive, got {p}"));
            }
        }
        let perturbation = if raw.or("perturbation.enabled", false)? {
            Some(Perturbation {
                amplitude: nonneg(
                    "perturbation.amplitude",
                    raw.or("perturbation.amplitude", 0.01)?,
                )?,
                seed: raw.or("perturbation.seed", seed.wrapping_add(1))?,
                band: raw.or("perturbation.band", 9)?,
            })
        } else {
            None
        };
        let mode = match raw.or("minimize.mode", "woltjer".to_string())?.as_str() {
            "woltjer" => MinimizeMode::Woltjer,
            "fixed_omega" => MinimizeMode::FixedOmega,
            "full" => MinimizeMode::Full,
            m => {
                return err(format!(
                    "minimize.mode must be woltjer, fixed_omega or full, got '{m}'"
                ))
            }
        };
        Ok(Self {
            grid_n,
            nu: nonneg("physics.nu", raw.or("physics.nu", 0.05)?)?,
            eta: nonneg("physics.eta", raw.or("physics.eta", 0.05)?)?,
            hall: nonneg("physics.hall", raw.or("physics.hall", 1.0)?)?,
            dt,
            t_end,
            record_every,
            init,
            target,
            seed,
            amplitude: raw.or("init.amplitude", 1.0)?,
            peak,
            perturbation,
            csv_path: PathBuf::from(raw.or("output.csv_path", "diagnostics.csv".to_string())?),
            checkpoint_path: PathBuf::from(
                raw.or("output.checkpoint_path", "state.chk".to_string())?,
            ),
            checkpoint_every: raw.or("output.checkpoint_every", 0)?,
            mode,
            h1: raw.get("minimize.h1")?,
            h2: raw.get("minimize.h2")?,
            max_iter: raw.or("minimize.max_iter", 100_000)?,
        })
    }

    /// Resolves relative output paths against `dir`.
    pub fn with_output_dir(mut self, dir: &Path) -> Self {
        if self.csv_path.is_relative() {
            self.csv_path = dir.join(&self.csv_path);
        }
        if self.checkpoint_path.is_relative() {
            self.checkpoint_path = dir.join(&self.checkpoint_path);
        }
        self
    }

    /// `# key = value` lines describing every resolved setting, with `dt`
    /// replaced by the value actually used.
    pub fn echo(&self, dt_used: Option<f64>) -> Vec<String> {
        let mut kv: Vec<(&str, String)> = vec![
            ("grid.n", self.grid_n.to_string()),
            ("physics.nu", format!("{:?}", self.nu)),
            ("physics.eta", format!("{:?}", self.eta)),
            ("physics.hall", format!("{:?}", self.hall)),
        ];
        let dt = match (dt_used, self.dt) {
            (Some(v), TimeStep::Auto) => format!("{v:?} (auto)"),
            (Some(v), TimeStep::Fixed(_)) | (None, TimeStep::Fixed(v)) => format!("{v:?}"),
            (None, TimeStep::Auto) => "auto".to_string(),
        };
        kv.push(("time.dt", dt));
        kv.push(("time.t_end", format!("{:?}", self.t_end)));
        kv.push(("time.record_every", self.record_every.to_string()));
        match &self.init {
            InitSpec::Abc { a, b, c, lambda0 } => {
                kv.push(("init.kind", "abc".into()));
                kv.push(("init.abc.a", format!("{a:?}")));
                kv.push(("init.abc.b", format!("{b:?}")));
                kv.push(("init.abc.c", format!("{c:?}")));
                kv.push(("init.abc.lambda0", format!("{lambda0:?}")));
            }
            InitSpec::Shell { n, sign } => {
                kv.push(("init.kind", "shell".into()));
                kv.push(("init.shell.n", n.to_string()));
                kv.push(("init.shell.sign", sign.to_string()));
            }
            InitSpec::DoubleBeltrami { first, second } => {
                kv.push(("init.kind", "double_beltrami".into()));
                kv.push(("init.shell1.n", first.0.to_string()));
                kv.push(("init.shell1.sign", first.1.to_string()));
                kv.push(("init.shell2.n", second.0.to_string()));
                kv.push(("init.shell2.sign", second.1.to_string()));
            }
            InitSpec::Checkpoint { path } => {
                kv.push(("init.kind", "checkpoint".into()));
                kv.push(("init.checkpoint.path", path.display().to_string()));
            }
            InitSpec::Random { band } => {
                kv.push(("init.kind", "random".into()));
                kv.push(("init.random.band", band.to_string()));
            }
        }
        if !matches!(
            self.init,
            InitSpec::DoubleBeltrami { .. } | InitSpec::Checkpoint { .. }
        ) {
            let t = match self.target {
                FieldTarget::U => "u",
                FieldTarget::B => "b",
                FieldTarget::Both => "both",
            };
            kv.push(("init.target", t.into()));
        }
        kv.push(("init.seed", self.seed.to_string()));
        kv.push(("init.amplitude", format!("{:?}", self.amplitude)));
        if let Some(p) = self.peak {
            kv.push(("init.peak", format!("{p:?}")));
        }
        match self.perturbation {
            Some(p) => {
                kv.push(("perturbation.enabled", "true".into()));
                kv.push(("perturbation.amplitude", format!("{:?}", p.amplitude)));
                kv.push(("perturbation.seed", p.seed.to_string()));
                kv.push(("perturbation.band", p.band.to_string()));
            }
            None => kv.push(("perturbation.enabled", "false".into())),
        }
        kv.push(("output.csv_path", self.csv_path.display().to_string()));
        kv.push((
            "output.checkpoint_path",
            self.checkpoint_path.display().to_string(),
        ));
        kv.push(("output.checkpoint_every", self.checkpoint_every.to_string()));
        kv.into_iter()
            .map(|(k, v)| format!("# {k} = {v}"))
            .collect()
    }

    /// Echo lines for a minimizer run.
    pub fn echo_minimize(&self) -> Vec<String> {
        let mut v = self.echo(None);
        v.retain(|l| {
            !l.starts_with("# time.")
                && !l.starts_with("# physics.")
                && !l.starts_with("# perturbation.")
        });
        v.push(format!("# minimize.mode = {}", mode_name(self.mode)));
        if let Some(h) = self.h1 {
            v.push(format!("# minimize.h1 = {h:?}"));
        }
        if let Some(h) = self.h2 {
            v.push(format!("# minimize.h2 = {h:?}"));
        }
        v.push(format!("# minimize.max_iter = {}", self.max_iter));
        v
    }
}
