//! Run configuration: flat `key = value` files, command-line overrides and
//! validation.
//!
//! Keys use dots for sections (`coupling.ax = 0.5`); the matching flags are
//! kebab-case (`--coupling-ax 0.5`). Values given as flags replace values
//! from the file, and [`Resolved::echo`] records every replacement.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pointer_therm_core::{density_from_bloch, gibbs_state, BlochVector, Operator2};

/// Every key a configuration may set.
pub const KEYS: &[&str] = &[
    "omega0",
    "temperature",
    "lambda",
    "lambdas",
    "gamma_drude",
    "coupling",
    "coupling.ax",
    "coupling.ay",
    "coupling.az",
    "initial_state",
    "depth",
    "dt",
    "t_max",
    "steady_tol",
    "output",
];

/// Coupling strengths swept when none are configured.
pub const DEFAULT_LAMBDAS: [f64; 6] = [0.01, 1.0, 2.0, 3.0, 4.0, 5.0];
pub const DEFAULT_DEPTH: usize = 60;
pub const DEFAULT_T_MAX: f64 = 500.0;
pub const DEFAULT_STEADY_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key `{key}`; valid keys are: {}", KEYS.join(", "))]
    UnknownKey { key: String },

    #[error("invalid value `{value}` for `{field}`: {constraint}")]
    InvalidValue { field: String, value: String, constraint: String },

    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("`{field}` is required for this command")]
    Missing { field: &'static str },

    #[error("`{key}` given twice in {origin}")]
    Duplicate { key: String, origin: &'static str },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn invalid(field: &str, value: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue { field: field.to_string(), value: value.to_string(), constraint: constraint.into() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Psi1,
    Psi2,
    Gibbs,
    /// The maximally mixed state.
    Mixed,
    Bloch(BlochVector),
}

impl InitialState {
    /// Bloch vector of `(|x+> + |z+>)` normalized.
    pub const PSI1: BlochVector = BlochVector::new(core::f64::consts::FRAC_1_SQRT_2, 0.0, core::f64::consts::FRAC_1_SQRT_2);
    /// Bloch vector of `(|x+> + |z->)` normalized.
    pub const PSI2: BlochVector = BlochVector::new(core::f64::consts::FRAC_1_SQRT_2, 0.0, -core::f64::consts::FRAC_1_SQRT_2);

    pub fn parse(value: &str) -> Result<Self, ConfigError> {
        match value.trim() {
            "psi1" => Ok(InitialState::Psi1),
            "psi2" => Ok(InitialState::Psi2),
            "gibbs" => Ok(InitialState::Gibbs),
            "mixed" => Ok(InitialState::Mixed),
            other => {
                let [x, y, z] = parse_triple("initial_state", other)
                    .map_err(|_| invalid("initial_state", value, "expected psi1, psi2, gibbs, mixed or `x,y,z`"))?;
                let r = BlochVector::new(x, y, z);
                if r.norm() > 1.0 + 1e-12 {
                    return Err(invalid("initial_state", value, "Bloch vector must have |r| <= 1"));
                }
                Ok(InitialState::Bloch(r))
            }
        }
    }

    pub fn density(&self, beta: f64, omega0: f64) -> pointer_therm_core::Result<Operator2> {
        match self {
            InitialState::Psi1 => density_from_bloch(Self::PSI1),
            InitialState::Psi2 => density_from_bloch(Self::PSI2),
            InitialState::Gibbs => gibbs_state(beta, omega0),
            InitialState::Mixed => density_from_bloch(BlochVector::ORIGIN),
            InitialState::Bloch(r) => density_from_bloch(*r),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InitialState::Psi1 => "psi1".into(),
            InitialState::Psi2 => "psi2".into(),
            InitialState::Gibbs => "gibbs".into(),
            InitialState::Mixed => "mixed".into(),
            InitialState::Bloch(r) => format!("{},{},{}", r.x, r.y, r.z),
        }
    }
}

/// Named couplings: `sx` is `sigma_x`, `sxsz` is `(sigma_x + sigma_z) / 2`.
pub fn named_coupling(name: &str) -> Option<[f64; 3]> {
    match name {
        "sx" => Some([1.0, 0.0, 0.0]),
        "sxsz" => Some([0.5, 0.0, 0.5]),
        _ => None,
    }
}

fn parse_f64(field: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(field, value, "expected a finite number"))
}

fn parse_triple(field: &str, value: &str) -> Result<[f64; 3], ConfigError> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 3 {
        return Err(invalid(field, value, "expected three comma-separated numbers"));
    }
    Ok([parse_f64(field, parts[0])?, parse_f64(field, parts[1])?, parse_f64(field, parts[2])?])
}

fn positive(field: &str, value: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(field, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, value, "must be positive"))
    }
}

fn non_negative(field: &str, value: &str) -> Result<f64, ConfigError> {
    let v = parse_f64(field, value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, value, "must be non-negative"))
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub omega0: f64,
    pub temperature: f64,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub gamma_drude: f64,
    pub coupling: [f64; 3],
    pub initial_state: InitialState,
    pub depth: usize,
    /// `None` picks the step from the stability bound.
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub steady_tol: f64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega0: 1.0,
            temperature: 1.5,
            lambda: None,
            lambdas: None,
            gamma_drude: 1.0,
            coupling: [0.0; 3],
            initial_state: InitialState::Psi1,
            depth: DEFAULT_DEPTH,
            dt: None,
            t_max: None,
            steady_tol: DEFAULT_STEADY_TOL,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn lambda(&self) -> Result<f64, ConfigError> {
        self.lambda.ok_or(ConfigError::Missing { field: "lambda" })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec())
    }

    pub fn t_max_or(&self, default: f64) -> f64 {
        self.t_max.unwrap_or(default)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "omega0" => self.omega0 = positive(key, value)?,
            "temperature" => self.temperature = positive(key, value)?,
            "lambda" => self.lambda = Some(non_negative(key, value)?),
            "lambdas" => {
                let list = value.split(',').map(|v| non_negative(key, v)).collect::<Result<Vec<_>, _>>()?;
                if list.is_empty() || list.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(invalid(key, value, "must be a non-empty, strictly increasing list"));
                }
                self.lambdas = Some(list);
            }
            "gamma_drude" => self.gamma_drude = positive(key, value)?,
            "coupling" => {
                self.coupling = match named_coupling(value.trim()) {
                    Some(c) => c,
                    None => parse_triple(key, value)
                        .map_err(|_| invalid(key, value, "expected sx, sxsz or `ax,ay,az`"))?,
                }
            }
            "coupling.ax" => self.coupling[0] = parse_f64(key, value)?,
            "coupling.ay" => self.coupling[1] = parse_f64(key, value)?,
            "coupling.az" => self.coupling[2] = parse_f64(key, value)?,
            "initial_state" => self.initial_state = InitialState::parse(value)?,
            "depth" => {
                self.depth = value
                    .trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|d| *d >= 1)
                    .ok_or_else(|| invalid(key, value, "must be an integer >= 1"))?
            }
            "dt" => self.dt = if value.trim() == "auto" { None } else { Some(positive(key, value)?) },
            "t_max" => self.t_max = Some(positive(key, value)?),
            "steady_tol" => self.steady_tol = positive(key, value)?,
            "output" => self.output = Some(PathBuf::from(value.trim())),
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        }
        Ok(())
    }

    /// Checks the constraints that span several keys.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.coupling.iter().all(|a| *a == 0.0) {
            return Err(invalid("coupling", "0,0,0", "must be non-zero"));
        }
        Ok(())
    }
}

/// Splits configuration text into `(key, value)` pairs. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, v)| !k.is_empty() && !v.is_empty())
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { key: key.to_string() });
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(ConfigError::Duplicate { key: key.to_string(), origin: "the config file" });
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_pairs(&text)
}

/// A flag that replaced a value from the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Override {
    pub key: String,
    pub file_value: String,
    pub flag_value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    /// Settings in the order they were applied, after overriding.
    pub settings: Vec<(String, String)>,
    pub overrides: Vec<Override>,
}

impl Resolved {
    /// The settings as configuration text, with overridden keys annotated.
    pub fn echo(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), |v| v.to_string());
        let lambdas = c.lambdas().iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let lines = [
            ("omega0", c.omega0.to_string()),
            ("temperature", c.temperature.to_string()),
            ("lambda", c.lambda.map_or_else(|| "unset".to_string(), |v| v.to_string())),
            ("lambdas", lambdas),
            ("gamma_drude", c.gamma_drude.to_string()),
            ("coupling.ax", c.coupling[0].to_string()),
            ("coupling.ay", c.coupling[1].to_string()),
            ("coupling.az", c.coupling[2].to_string()),
            ("initial_state", c.initial_state.label()),
            ("depth", c.depth.to_string()),
            ("dt", opt(c.dt)),
            ("t_max", opt(c.t_max)),
            ("steady_tol", c.steady_tol.to_string()),
            ("output", c.output.as_ref().map_or_else(|| "unset".to_string(), |p| p.display().to_string())),
        ];
        for (key, value) in lines {
            let _ = write!(out, "{key} = {value}");
            for o in self.overrides.iter().filter(|o| o.key == key || (key.starts_with("coupling") && o.key == "coupling")) {
                let _ = write!(out, "  # flag {} = {} overrides file value {}", o.key, o.flag_value, o.file_value);
            }
            out.push('\n');
        }
        out
    }
}

/// Applies file settings, then flags on top of them.
pub fn resolve(file: &[(String, String)], flags: &[(String, String)]) -> Result<Resolved, ConfigError> {
    for (i, (key, _)) in flags.iter().enumerate() {
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { key: key.clone() });
        }
        if flags[..i].iter().any(|(k, _)| k == key) {
            return Err(ConfigError::Duplicate { key: key.clone(), origin: "the flags" });
        }
    }
    let mut overrides = Vec::new();
    let mut settings = Vec::new();
    for (key, value) in file {
        match flags.iter().find(|(k, _)| k == key) {
            Some((_, flag)) => overrides.push(Override {
                key: key.clone(),
                file_value: value.clone(),
                flag_value: flag.clone(),
            }),
            None => settings.push((key.clone(), value.clone())),
        }
    }
    settings.extend(flags.iter().cloned());

    let mut config = RunConfig::default();
    for (key, value) in &settings {
        config.set(key, value)?;
    }
    config.validate()?;
    Ok(Resolved { config, settings, overrides })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let file = parse_pairs("lambda = 5\ncoupling.ax = 1\n").unwrap();
        let r = resolve(&file, &[]).unwrap();
        let c = r.config;
        assert_eq!(c.lambda, Some(5.0));
        assert_eq!(c.coupling, [1.0, 0.0, 0.0]);
        assert_eq!((c.omega0, c.temperature, c.gamma_drude), (1.0, 1.5, 1.0));
        assert_eq!((c.depth, c.dt, c.t_max, c.steady_tol), (60, None, None, 1e-6));
        assert_eq!(c.initial_state, InitialState::Psi1);
        assert!(r.overrides.is_empty());
    }

    #[test]
    fn flag_wins_and_is_noted() {
        let file = parse_pairs("lambda = 1\ncoupling = sx").unwrap();
        let r = resolve(&file, &pairs(&[("lambda", "3")])).unwrap();
        assert_eq!(r.config.lambda, Some(3.0));
        assert_eq!(r.overrides, vec![Override { key: "lambda".into(), file_value: "1".into(), flag_value: "3".into() }]);
        assert!(r.echo().contains("lambda = 3  # flag lambda = 3 overrides file value 1"));
    }

    #[test]
    fn negative_temperature_names_the_field() {
        let err = resolve(&pairs(&[("temperature", "-1"), ("coupling", "sx")]), &[]).unwrap_err();
        assert!(matches!(&err, ConfigError::InvalidValue { field, .. } if field == "temperature"));
        assert!(err.to_string().contains("temperature"));
    }

    #[test]
    fn unknown_key_lists_valid_ones() {
        let err = parse_pairs("lamda = 1").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("lamda"));
        assert!(msg.contains("gamma_drude") && msg.contains("coupling.az"));
        assert!(matches!(resolve(&[], &pairs(&[("bogus", "1")])), Err(ConfigError::UnknownKey { .. })));
    }

    #[test]
    fn zero_coupling_rejected() {
        let err = resolve(&pairs(&[("lambda", "1")]), &[]).unwrap_err();
        assert!(matches!(&err, ConfigError::InvalidValue { field, .. } if field == "coupling"));
    }

    #[test]
    fn named_couplings_and_components() {
        let r = resolve(&pairs(&[("coupling", "sxsz")]), &[]).unwrap();
        assert_eq!(r.config.coupling, [0.5, 0.0, 0.5]);
        let r = resolve(&pairs(&[("coupling", "sx"), ("coupling.az", "0.25")]), &[]).unwrap();
        assert_eq!(r.config.coupling, [1.0, 0.0, 0.25]);
        assert!(resolve(&pairs(&[("coupling", "sy")]), &[]).is_err());
    }

    #[test]
    fn initial_states() {
        assert_eq!(InitialState::parse("gibbs").unwrap(), InitialState::Gibbs);
        assert_eq!(InitialState::parse("0.3, 0.3, 0.3").unwrap(), InitialState::Bloch(BlochVector::new(0.3, 0.3, 0.3)));
        assert!(InitialState::parse("1,1,0").is_err());
        assert!(InitialState::parse("psi3").is_err());
        let rho = InitialState::Psi1.density(2.0 / 3.0, 1.0).unwrap();
        let purity = (rho * rho).trace().re;
        assert!((purity - 1.0).abs() < 1e-14);
        let mixed = InitialState::Mixed.density(1.0, 1.0).unwrap();
        assert!((mixed[(0, 0)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn value_forms() {
        let r = resolve(
            &pairs(&[("coupling", "sx"), ("dt", "auto"), ("lambdas", "0.5,1,2"), ("depth", "12"), ("output", "out.csv")]),
            &[],
        )
        .unwrap();
        assert_eq!(r.config.dt, None);
        assert_eq!(r.config.lambdas(), vec![0.5, 1.0, 2.0]);
        assert_eq!(r.config.depth, 12);
        assert_eq!(r.config.output, Some(PathBuf::from("out.csv")));
        for (key, bad) in [("lambdas", "2,1"), ("depth", "0"), ("dt", "-1e-3"), ("t_max", "nan"), ("lambda", "-0.1")] {
            let err = resolve(&pairs(&[("coupling", "sx"), (key, bad)]), &[]).unwrap_err();
            assert!(matches!(&err, ConfigError::InvalidValue { field, .. } if field == key), "{key}: {err}");
        }
    }

    #[test]
    fn syntax_and_duplicates() {
        assert!(matches!(parse_pairs("# note\n\nlambda 5"), Err(ConfigError::Syntax { line: 3, .. })));
        assert!(matches!(parse_pairs("lambda = 1\nlambda = 2"), Err(ConfigError::Duplicate { .. })));
        assert!(matches!(
            resolve(&[], &pairs(&[("lambda", "1"), ("lambda", "2")])),
            Err(ConfigError::Duplicate { .. })
        ));
    }
}
