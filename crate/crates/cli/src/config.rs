//! Run configuration: defaults, `key = value` file, flag overrides.
//!
//! Precedence is defaults < file < flags. The resolved configuration is
//! echoed verbatim into `run.txt` under the output directory, in a form
//! that can be fed back via `--config`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use deanflow::basis::Truncation;
use deanflow::dynamics::Scheme;
use deanflow::geometry::FluidParameters;
use deanflow::stability::{critical_point, mode_eigenvalue};

/// Flag-level overrides collected by clap; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub rho: Option<f64>,
    pub nu: Option<f64>,
    pub dp_dtheta0: Option<f64>,
    pub length: Option<f64>,
    pub max_m: Option<u32>,
    pub max_n: Option<u32>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub scheme: Option<String>,
    pub seed: Option<u64>,
    pub steady_tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FluidParameters,
    /// Control parameter as computed from the physical inputs (signed).
    pub lambda_signed: f64,
    /// Magnitude actually analysed; a reversed pressure gradient swaps the
    /// roles of the two eigenvalue branches and is reported, not rejected.
    pub lambda: f64,
    pub truncation: Truncation,
    /// Requested step size, if any; dynamics commands fall back to the
    /// scheme default otherwise.
    pub dt: Option<f64>,
    /// The step the default would resolve to for this system and scheme.
    pub dt_resolved: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub steady_tol: f64,
    pub out_dir: PathBuf,
}

impl RunConfig {
    pub fn lambda_reversed(&self) -> bool {
        self.lambda_signed < 0.0
    }

    /// `key = value` manifest of the resolved configuration.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        push("R1", format!("{}", self.params.inner_radius));
        push("R2", format!("{}", self.params.outer_radius));
        push("rho", format!("{}", self.params.density));
        push("nu", format!("{}", self.params.viscosity));
        push("dp_dtheta0", format!("{}", self.params.dp_dtheta));
        push("L", format!("{}", self.params.axial_period));
        push("M", format!("{}", self.truncation.max_m));
        push("N", format!("{}", self.truncation.max_n));
        push("dt", format!("{}", self.dt.unwrap_or(self.dt_resolved)));
        push("t_end", format!("{}", self.t_end));
        push("scheme", format!("{}", self.scheme));
        push("seed", format!("{}", self.seed));
        push("steady_tol", format!("{}", self.steady_tol));
        push("out_dir", self.out_dir.display().to_string());
        out
    }

    pub fn sim_config(&self) -> deanflow::dynamics::SimulationConfig {
        deanflow::dynamics::SimulationConfig {
            dt: self.dt,
            t_end: self.t_end,
            scheme: self.scheme,
            steady_tol: self.steady_tol,
            seed: self.seed,
        }
    }
}

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            );
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: [&str; 14] = [
    "R1", "R2", "rho", "nu", "dp_dtheta0", "L", "M", "N", "dt", "t_end", "scheme", "seed",
    "steady_tol", "out_dir",
];

/// Merges defaults, an optional config file and flag overrides, then
/// validates everything before any computation starts.
pub fn resolve(config_path: Option<&Path>, flags: &Overrides) -> Result<RunConfig> {
    let file = match config_path {
        Some(p) => parse_file(p)?,
        None => BTreeMap::new(),
    };
    for key in file.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("unknown config key '{key}' (expected one of {KNOWN_KEYS:?})");
        }
    }
    let get = |key: &str| file.get(key).map(String::as_str);
    let num = |key: &str| -> Result<Option<f64>> {
        get(key)
            .map(|v| v.parse::<f64>().with_context(|| format!("config key {key} = '{v}'")))
            .transpose()
    };
    let int = |key: &str| -> Result<Option<u64>> {
        get(key)
            .map(|v| v.parse::<u64>().with_context(|| format!("config key {key} = '{v}'")))
            .transpose()
    };

    let r1 = flags.r1.or(num("R1")?).unwrap_or(1.0);
    let r2 = flags.r2.or(num("R2")?).unwrap_or(2.0);
    let rho = flags.rho.or(num("rho")?).unwrap_or(1.0);
    let nu = flags.nu.or(num("nu")?).unwrap_or(1.0);
    let dp = flags.dp_dtheta0.or(num("dp_dtheta0")?).unwrap_or(30.0);
    let length = flags.length.or(num("L")?).unwrap_or(2.0);
    let params = FluidParameters::new(r1, r2, rho, nu, dp, length)?;

    let lambda_signed = params.lambda();
    let lambda = lambda_signed.abs();

    let max_n = flags.max_n.or(int("N")?.map(|v| v as u32)).unwrap_or(8);
    let max_m = match flags.max_m.or(int("M")?.map(|v| v as u32)) {
        Some(m) => m,
        // Default keeps the axial image {0, 2 m0} of the critical mode
        // inside the truncation with headroom.
        None => 2 * critical_point(length)?.m0 + 6,
    };
    let truncation = Truncation::new(max_m, max_n)?;

    let scheme: Scheme = match flags.scheme.as_deref().or(get("scheme")) {
        Some(s) => s.parse()?,
        None => Scheme::ImexExp,
    };
    let dt = flags.dt.or(num("dt")?);
    if let Some(v) = dt {
        if v.is_nan() || v <= 0.0 {
            bail!("dt must be positive, got {v}");
        }
    }
    let max_abs_beta = truncation
        .modes()
        .into_iter()
        .map(|idx| mode_eigenvalue(idx, length, lambda).abs())
        .fold(0.0f64, f64::max);
    let dt_resolved = dt.unwrap_or(match scheme {
        Scheme::ImexExp => 5.0 / max_abs_beta,
        Scheme::Rk4 => 0.1 / max_abs_beta,
    });

    let t_end = flags.t_end.or(num("t_end")?).unwrap_or(100.0);
    let steady_tol = flags.steady_tol.or(num("steady_tol")?).unwrap_or(1e-10);
    if t_end.is_nan() || t_end <= 0.0 {
        bail!("t_end must be positive, got {t_end}");
    }
    if steady_tol.is_nan() || steady_tol <= 0.0 {
        bail!("steady_tol must be positive, got {steady_tol}");
    }
    let seed = flags.seed.or(int("seed")?).unwrap_or(42);
    let out_dir = flags
        .out_dir
        .clone()
        .or(get("out_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(RunConfig {
        params,
        lambda_signed,
        lambda,
        truncation,
        dt,
        dt_resolved,
        t_end,
        scheme,
        seed,
        steady_tol,
        out_dir,
    })
}
