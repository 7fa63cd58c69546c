//! Run configuration: a TOML file merged with command-line flags.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use subharm_core::counterexample::{build_u_phi, UPhiSpec};
use subharm_core::io::read_measure;
use subharm_core::{Measure, SlowlyVarying};

/// Error caused by the user's input; mapped to exit code 2.
#[derive(Debug)]
pub struct UserError(pub String);

impl fmt::Display for UserError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

pub fn user_error(msg: impl Into<String>) -> anyhow::Error {
    UserError(msg.into()).into()
}

/// Flags shared by every subcommand. Each overrides the matching key of `--config`.
#[derive(Args, Debug, Default)]
pub struct Flags {
    /// TOML file with any of the keys below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Measure file (`re im mass` lines) or `u_phi:COUNT:PHI` / `u_phi_to:RMAX:PHI`.
    #[arg(long, global = true)]
    pub input: Option<String>,
    /// `const:C`, `loge`, `expsqrtlog[:COEF]` or `sigma:SPEC`.
    #[arg(long, global = true)]
    pub psi: Option<String>,
    /// Comma-separated radii or `pow2:FROM:TO`.
    #[arg(long = "r-grid", global = true)]
    pub r_grid: Option<String>,
    /// Relative tolerance of the disk quadrature.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Coefficient of the `α log|z|` term.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Zero set file, `best-rounding` or `pipeline`.
    #[arg(long, global = true)]
    pub zeros: Option<String>,
    /// Starting node count of circle means.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Root rectangle `SIGMA_MIN,SIGMA_MAX,T_MIN,T_MAX`; defaults to the bounding box.
    #[arg(long, global = true)]
    pub rect: Option<String>,
    /// Read the input in the ζ-plane and partition its log coordinates.
    #[arg(long = "log-coords", global = true)]
    pub log_coords: bool,
    /// First annulus radius.
    #[arg(long, global = true)]
    pub r1: Option<f64>,
    /// Radius of the disk the generic origin is drawn from; 0 keeps the origin.
    #[arg(long = "shift-radius", global = true)]
    pub shift_radius: Option<f64>,
    /// Move ½ of the innermost atom into `α` when `α ≥ ½`.
    #[arg(long = "reduce-alpha", global = true)]
    pub reduce_alpha: bool,
}

/// Keys of the TOML file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input: Option<String>,
    psi: Option<String>,
    r_grid: Option<GridValue>,
    tol: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    alpha: Option<f64>,
    zeros: Option<String>,
    nodes: Option<usize>,
    rect: Option<[f64; 4]>,
    log_coords: Option<bool>,
    r1: Option<f64>,
    shift_radius: Option<f64>,
    reduce_alpha: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridValue {
    List(Vec<f64>),
    Text(String),
}

/// Fully resolved configuration, echoed into the manifest.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub input: String,
    pub psi: String,
    pub r_grid: Vec<f64>,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub alpha: f64,
    pub zeros: Option<String>,
    pub nodes: usize,
    pub rect: Option<[f64; 4]>,
    pub log_coords: bool,
    pub r1: Option<f64>,
    pub shift_radius: f64,
    pub reduce_alpha: bool,
}

pub const DEFAULT_GRID: &str = "pow2:2:8";

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| user_error(format!("cannot read config {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| user_error(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let input = flags
            .input
            .clone()
            .or(file.input)
            .ok_or_else(|| user_error("no input given (use --input or the `input` config key)"))?;
        let r_grid = match (&flags.r_grid, file.r_grid) {
            (Some(s), _) => parse_grid(s)?,
            (None, Some(GridValue::Text(s))) => parse_grid(&s)?,
            (None, Some(GridValue::List(v))) => check_grid(v)?,
            (None, None) => parse_grid(DEFAULT_GRID)?,
        };
        let rect = match &flags.rect {
            Some(s) => Some(parse_rect(s)?),
            None => file.rect,
        };
        let cfg = RunConfig {
            input,
            psi: flags.psi.clone().or(file.psi).unwrap_or_else(|| "loge".into()),
            r_grid,
            tol: flags.tol.or(file.tol).unwrap_or(1e-3),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            alpha: flags.alpha.or(file.alpha).unwrap_or(0.0),
            zeros: flags.zeros.clone().or(file.zeros),
            nodes: flags.nodes.or(file.nodes).unwrap_or(4096),
            rect,
            log_coords: flags.log_coords || file.log_coords.unwrap_or(false),
            r1: flags.r1.or(file.r1),
            shift_radius: flags.shift_radius.or(file.shift_radius).unwrap_or(0.1),
            reduce_alpha: flags.reduce_alpha || file.reduce_alpha.unwrap_or(false),
        };
        if !(cfg.tol > 0.0 && cfg.tol < 1.0) {
            return Err(user_error(format!("tol must lie in (0, 1), got {}", cfg.tol)));
        }
        if !(0.0..1.0).contains(&cfg.alpha) {
            return Err(user_error(format!("alpha must lie in [0, 1), got {}", cfg.alpha)));
        }
        if cfg.nodes == 0 {
            return Err(user_error("nodes must be positive"));
        }
        if !(cfg.shift_radius >= 0.0 && cfg.shift_radius.is_finite()) {
            return Err(user_error(format!("shift radius must be nonnegative, got {}", cfg.shift_radius)));
        }
        Ok(cfg)
    }

    pub fn psi(&self) -> Result<SlowlyVarying> {
        self.psi.parse().map_err(|e| user_error(format!("--psi: {e}")))
    }

    /// The input measure and, for builtin generators, its defining spec.
    pub fn measure(&self) -> Result<(Measure, Option<UPhiSpec>)> {
        if let Some(spec) = parse_builtin(&self.input)? {
            let m = build_u_phi(&spec).map_err(|e| user_error(format!("--input {}: {e}", self.input)))?;
            return Ok((m, Some(spec)));
        }
        Ok((read_measure_file(Path::new(&self.input))?, None))
    }
}

pub fn read_measure_file(path: &Path) -> Result<Measure> {
    let f = File::open(path).map_err(|e| user_error(format!("cannot open {}: {e}", path.display())))?;
    read_measure(BufReader::new(f)).with_context(|| format!("reading measure {}", path.display()))
}

fn parse_builtin(input: &str) -> Result<Option<UPhiSpec>> {
    let (kind, rest) = match input.split_once(':') {
        Some((k @ ("u_phi" | "u_phi_to"), rest)) => (k, rest),
        _ => return Ok(None),
    };
    let bad = || user_error(format!("--input {input}: expected {kind}:N:PHI"));
    let (n, phi) = rest.split_once(':').ok_or_else(bad)?;
    let phi: SlowlyVarying = phi.parse().map_err(|e| user_error(format!("--input {input}: {e}")))?;
    let spec = if kind == "u_phi" {
        let count: usize = n.parse().map_err(|_| bad())?;
        UPhiSpec::new(phi, count)
    } else {
        let r_max: f64 = n.parse().map_err(|_| bad())?;
        UPhiSpec::up_to(phi, r_max).map_err(|e| user_error(format!("--input {input}: {e}")))?
    };
    Ok(Some(spec))
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("pow2:") {
        let bad = || user_error(format!("r grid {s:?}: expected pow2:FROM:TO"));
        let (a, b) = rest.split_once(':').ok_or_else(bad)?;
        let (a, b): (i32, i32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        return check_grid((a..=b).map(|k| 2f64.powi(k)).collect());
    }
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| user_error(format!("r grid: cannot parse {x:?}"))))
        .collect::<Result<Vec<_>>>()?;
    check_grid(v)
}

fn check_grid(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(user_error("r grid is empty"));
    }
    if v.iter().any(|r| !(r.is_finite() && *r > 0.0)) || v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(user_error(format!("r grid must be positive and increasing, got {v:?}")));
    }
    Ok(v)
}

fn parse_rect(s: &str) -> Result<[f64; 4]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| user_error(format!("--rect {s:?}: expected four numbers")))?;
    v.try_into().map_err(|_| user_error(format!("--rect {s:?}: expected four numbers")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("pow2:1:3").unwrap(), vec![2.0, 4.0, 8.0]);
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        for bad in ["", "2,1", "pow2:3", "0,1", "a"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn builtins() {
        let spec = parse_builtin("u_phi:12:const:2").unwrap().unwrap();
        assert_eq!(spec.count, 12);
        let spec = parse_builtin("u_phi_to:16:const:2").unwrap().unwrap();
        assert_eq!(spec.count, 4);
        assert!(parse_builtin("measure.txt").unwrap().is_none());
        assert!(parse_builtin("u_phi:x:const:2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("subharm-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "input = \"a.txt\"\nseed = 3\ntol = 0.01\nr_grid = [1.0, 2.0]\n").unwrap();
        let flags = Flags { config: Some(path.clone()), seed: Some(9), ..Default::default() };
        let cfg = RunConfig::resolve(&flags).unwrap();
        assert_eq!((cfg.input.as_str(), cfg.seed, cfg.tol), ("a.txt", 9, 0.01));
        assert_eq!(cfg.r_grid, vec![1.0, 2.0]);
        std::fs::write(&path, "inptu = \"a.txt\"\n").unwrap();
        assert!(RunConfig::resolve(&flags).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
