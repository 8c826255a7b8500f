//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::constants::{DEFAULT_GAP, HBAR, SODIUM_MASS};
use crate::fringe::{ArmModel, Mode, DEFAULT_POINTS};
use crate::par::ExecPolicy;
use crate::physics::{LaserGeometry, Setup};

use super::table::fmt_num;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("--set {0}: expected key=value")]
    BadOverride(String),
    #[error("invalid configuration: {0}")]
    Validation(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

const KEYS: &[&str] = &[
    "mass", "v_x", "k_x", "l", "L", "omega", "epsilon", "delta", "mode", "points", "kxl_min", "kxl_max",
    "kxl_points", "kxl_spacing", "eps_min", "eps_max", "eps_points", "eps_model", "parallel", "out",
];

/// Keys that are alternatives for one quantity.
const GROUPS: &[&[&str]] = &[&["v_x", "k_x"], &["omega", "epsilon"]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    Velocity(f64),
    Wavenumber(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coupling {
    /// Raw Rabi frequency in rad/s.
    Omega(f64),
    /// Pulse-area offset eps with Omega = (pi + eps) v / l.
    PulseOffset(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let t = i as f64 / last as f64;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mass: f64,
    pub speed: Speed,
    pub width: f64,
    pub gap: f64,
    pub coupling: Coupling,
    pub delta: f64,
    pub mode: Mode,
    pub points: usize,
    pub kxl: SweepSpec,
    pub eps: SweepSpec,
    pub eps_model: ArmModel,
    pub parallel: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mass: SODIUM_MASS,
            speed: Speed::Velocity(0.01),
            width: 10e-6,
            gap: DEFAULT_GAP,
            coupling: Coupling::PulseOffset(0.0),
            delta: 0.0,
            mode: Mode::QuantumMz,
            points: DEFAULT_POINTS,
            kxl: SweepSpec { min: 10.0, max: 1000.0, points: 41, log: true },
            eps: SweepSpec { min: -0.5, max: 0.5, points: 101, log: false },
            eps_model: ArmModel::QuantumDirect,
            parallel: true,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn velocity(&self) -> f64 {
        match self.speed {
            Speed::Velocity(v) => v,
            Speed::Wavenumber(k) => HBAR * k / self.mass,
        }
    }

    pub fn k_x(&self) -> f64 {
        match self.speed {
            Speed::Velocity(v) => self.mass * v / HBAR,
            Speed::Wavenumber(k) => k,
        }
    }

    pub fn omega(&self) -> f64 {
        match self.coupling {
            Coupling::Omega(w) => w,
            Coupling::PulseOffset(eps) => (std::f64::consts::PI + eps) * self.velocity() / self.width,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self.coupling {
            Coupling::Omega(w) => w * self.width / self.velocity() - std::f64::consts::PI,
            Coupling::PulseOffset(eps) => eps,
        }
    }

    pub fn policy(&self) -> ExecPolicy {
        if self.parallel {
            ExecPolicy::Parallel
        } else {
            ExecPolicy::Sequential
        }
    }

    pub fn setup(&self) -> Setup {
        Setup {
            mass: self.mass,
            k_x: self.k_x(),
            geometry: LaserGeometry { width: self.width, gap: self.gap },
            omega: self.omega(),
            delta: self.delta,
            phases: [0.0; 3],
        }
    }

    /// Every setting after defaults and overrides, plus the derived
    /// quantities, in a fixed order. The output path is left out so that the
    /// same run written to two places yields identical files.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let spacing = |s: &SweepSpec| if s.log { "log" } else { "linear" };
        let out = vec![
            ("mass", fmt_num(self.mass)),
            ("v_x", fmt_num(self.velocity())),
            ("k_x", fmt_num(self.k_x())),
            ("l", fmt_num(self.width)),
            ("L", fmt_num(self.gap)),
            ("omega", fmt_num(self.omega())),
            ("epsilon", fmt_num(self.epsilon())),
            ("delta", fmt_num(self.delta)),
            ("kx_l", fmt_num(self.k_x() * self.width)),
            ("speed_given_as", match self.speed {
                Speed::Velocity(_) => "v_x".into(),
                Speed::Wavenumber(_) => "k_x".into(),
            }),
            ("coupling_given_as", match self.coupling {
                Coupling::Omega(_) => "omega".into(),
                Coupling::PulseOffset(_) => "epsilon".into(),
            }),
            ("mode", self.mode.name().into()),
            ("points", self.points.to_string()),
            ("kxl_min", fmt_num(self.kxl.min)),
            ("kxl_max", fmt_num(self.kxl.max)),
            ("kxl_points", self.kxl.points.to_string()),
            ("kxl_spacing", spacing(&self.kxl).into()),
            ("eps_min", fmt_num(self.eps.min)),
            ("eps_max", fmt_num(self.eps.max)),
            ("eps_points", self.eps.points.to_string()),
            ("eps_model", arm_model_name(self.eps_model).into()),
            ("parallel", self.parallel.to_string()),
        ];
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

pub fn arm_model_name(model: ArmModel) -> &'static str {
    match model {
        ArmModel::Semiclassical => "semiclassical",
        ArmModel::QuantumDirect => "quantum-direct",
        ArmModel::QuantumMz => "quantum-mz",
    }
}

/// Raw key/value pairs with the line each came from (`None` for overrides).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line: line_no, message: format!("expected `key = value`, got `{content}`") })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::Parse { line: line_no, message: format!("unknown key `{key}`") });
            }
            if value.is_empty() {
                return Err(ConfigError::Parse { line: line_no, message: format!("missing value for `{key}`") });
            }
            if let Some((_, Some(first))) = raw.entries.get(key) {
                return Err(ConfigError::Parse { line: line_no, message: format!("`{key}` already set on line {first}") });
            }
            raw.entries.insert(key.to_string(), (value.to_string(), Some(line_no)));
        }
        Ok(raw)
    }

    /// Applies a `key=value` override, displacing any alternative key of the
    /// same quantity.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError::BadOverride(assignment.into()))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::Validation(format!("unknown key `{key}` in --set")));
        }
        if value.is_empty() {
            return Err(ConfigError::BadOverride(assignment.into()));
        }
        if let Some(group) = GROUPS.iter().find(|g| g.contains(&key)) {
            for other in group.iter() {
                self.entries.remove(*other);
            }
        }
        self.entries.insert(key.to_string(), (value.to_string(), None));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(&str, Option<usize>)> {
        self.entries.get(key).map(|(v, line)| (v.as_str(), *line))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        let Some((value, line)) = self.get(key) else { return Ok(None) };
        match value.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(bad_value(key, value, line, "a finite number")),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        let Some((value, line)) = self.get(key) else { return Ok(None) };
        value.parse::<usize>().map(Some).map_err(|_| bad_value(key, value, line, "a non-negative integer"))
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let exclusive = |a: &str, b: &str| -> Result<()> {
            if self.get(a).is_some() && self.get(b).is_some() {
                return Err(ConfigError::Validation(format!("exactly one of `{a}` and `{b}` may be given")));
            }
            Ok(())
        };
        exclusive("v_x", "k_x")?;
        exclusive("omega", "epsilon")?;

        if let Some(m) = self.number("mass")? {
            cfg.mass = m;
        }
        if let Some(v) = self.number("v_x")? {
            cfg.speed = Speed::Velocity(v);
        }
        if let Some(k) = self.number("k_x")? {
            cfg.speed = Speed::Wavenumber(k);
        }
        if let Some(l) = self.number("l")? {
            cfg.width = l;
        }
        if let Some(gap) = self.number("L")? {
            cfg.gap = gap;
        }
        if let Some(w) = self.number("omega")? {
            cfg.coupling = Coupling::Omega(w);
        }
        if let Some(eps) = self.number("epsilon")? {
            cfg.coupling = Coupling::PulseOffset(eps);
        }
        if let Some(d) = self.number("delta")? {
            cfg.delta = d;
        }
        if let Some((word, line)) = self.get("mode") {
            cfg.mode = parse_mode(word).ok_or_else(|| bad_value("mode", word, line, "a fringe mode"))?;
        }
        if let Some(n) = self.count("points")? {
            cfg.points = n;
        }
        if let Some(x) = self.number("kxl_min")? {
            cfg.kxl.min = x;
        }
        if let Some(x) = self.number("kxl_max")? {
            cfg.kxl.max = x;
        }
        if let Some(n) = self.count("kxl_points")? {
            cfg.kxl.points = n;
        }
        if let Some((word, line)) = self.get("kxl_spacing") {
            cfg.kxl.log = match word {
                "log" => true,
                "linear" => false,
                _ => return Err(bad_value("kxl_spacing", word, line, "`log` or `linear`")),
            };
        }
        if let Some(x) = self.number("eps_min")? {
            cfg.eps.min = x;
        }
        if let Some(x) = self.number("eps_max")? {
            cfg.eps.max = x;
        }
        if let Some(n) = self.count("eps_points")? {
            cfg.eps.points = n;
        }
        if let Some((word, line)) = self.get("eps_model") {
            cfg.eps_model = match word {
                "semiclassical" => ArmModel::Semiclassical,
                "quantum-direct" => ArmModel::QuantumDirect,
                "quantum-mz" => ArmModel::QuantumMz,
                _ => return Err(bad_value("eps_model", word, line, "semiclassical, quantum-direct or quantum-mz")),
            };
        }
        if let Some((word, line)) = self.get("parallel") {
            cfg.parallel = word.parse().map_err(|_| bad_value("parallel", word, line, "`true` or `false`"))?;
        }
        if let Some((word, _)) = self.get("out") {
            cfg.out = Some(PathBuf::from(word));
        }
        validate(&cfg)?;
        Ok(cfg)
    }
}

pub fn parse_mode(word: &str) -> Option<Mode> {
    Mode::ALL.into_iter().find(|m| m.name() == word)
}

fn bad_value(key: &str, value: &str, line: Option<usize>, expected: &str) -> ConfigError {
    let message = format!("`{key}` must be {expected}, got `{value}`");
    match line {
        Some(line) => ConfigError::Parse { line, message },
        None => ConfigError::Validation(message),
    }
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let positive = |name: &str, x: f64| {
        if x > 0.0 {
            Ok(())
        } else {
            Err(ConfigError::Validation(format!("`{name}` must be positive, got {x}")))
        }
    };
    positive("mass", cfg.mass)?;
    match cfg.speed {
        Speed::Velocity(v) => positive("v_x", v)?,
        Speed::Wavenumber(k) => positive("k_x", k)?,
    }
    positive("l", cfg.width)?;
    positive("L", cfg.gap)?;
    let omega = cfg.omega();
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(ConfigError::Validation(format!("Rabi frequency must be >= 0, got {omega}")));
    }
    if cfg.points < 3 {
        return Err(ConfigError::Validation(format!("`points` must be at least 3, got {}", cfg.points)));
    }
    positive("kxl_min", cfg.kxl.min)?;
    if cfg.kxl.max < cfg.kxl.min || cfg.kxl.points == 0 {
        return Err(ConfigError::Validation("k_x l sweep needs kxl_min <= kxl_max and kxl_points >= 1".into()));
    }
    if cfg.eps.max <= cfg.eps.min || cfg.eps.points < 2 {
        return Err(ConfigError::Validation("epsilon sweep needs eps_min < eps_max and eps_points >= 2".into()));
    }
    if -std::f64::consts::PI - cfg.eps.min > 0.0 {
        return Err(ConfigError::Validation("eps_min must exceed -pi".into()));
    }
    Ok(())
}

/// Parses `text` and applies `--set` overrides in order.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut raw = RawConfig::parse(text)?;
    for o in overrides {
        raw.set(o)?;
    }
    raw.resolve()
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &[])
}
