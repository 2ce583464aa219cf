//! Run configuration: a flat `key = value` file merged with command-line
//! overrides. Flags always win over file entries.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::model::{PhysicalScales, UnitSystem, WellGeometry};

/// Every recognised key. Flags use the same names with `-` for `_`.
pub const KEYS: &[&str] = &[
    "eta",
    "deficit",
    "grid_points",
    "tau",
    "time",
    "interval",
    "units",
    "mass",
    "length_l",
    "length_delta",
    "format",
    "out",
    "odd_multiple",
    "resolutions",
    "dt_ratio",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), line: None, message: message.into() }
    }

    fn at(mut self, line: Option<usize>) -> Self {
        self.line = line;
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}, field `{}`: {}", self.field, self.message),
            None => write!(f, "config error, field `{}`: {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Raw value plus the config-file line it came from (`None` for flags).
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: Option<usize>,
}

/// Key/value entries after merging file and flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Entries(BTreeMap<String, Entry>);

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Entries {
    /// Parses the flat config format. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ConfigError::new("-", format!("expected `key = value`, got `{content}`")).at(Some(line))
            })?;
            let key = normalize_key(key);
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::new(&key, "unknown key").at(Some(line)));
            }
            let entry = Entry { value: value.trim().to_string(), line: Some(line) };
            if map.insert(key.clone(), entry).is_some() {
                return Err(ConfigError::new(&key, "duplicate key").at(Some(line)));
            }
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets (or replaces) a value coming from a command-line flag.
    pub fn set_flag(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(normalize_key(key), Entry { value: value.into(), line: None });
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn parse_with<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(entry) => parse(&entry.value)
                .map(Some)
                .map_err(|message| ConfigError::new(key, message).at(entry.line)),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.0.get(key).and_then(|e| e.line)
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if items.is_empty() {
        return Err("empty list".into());
    }
    items.into_iter().map(item).collect()
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Which sub-interval of the well a probability refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalSpec {
    /// `[L - delta, L]`
    Far,
    /// `[0, delta]`
    Near,
    Explicit { lo: f64, hi: f64 },
}

fn parse_interval(s: &str) -> Result<IntervalSpec, String> {
    match s.trim() {
        "far" => Ok(IntervalSpec::Far),
        "near" => Ok(IntervalSpec::Near),
        other => {
            let (lo, hi) = other
                .split_once(':')
                .ok_or_else(|| format!("expected `far`, `near` or `lo:hi`, got `{other}`"))?;
            Ok(IntervalSpec::Explicit { lo: parse_f64(lo)?, hi: parse_f64(hi)? })
        }
    }
}

/// Requested instants: revival units in natural runs, seconds in SI runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Times {
    Tau(Vec<f64>),
    Seconds(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: UnitSystem,
    pub etas: Vec<f64>,
    pub mass: Option<f64>,
    pub length_l: Option<f64>,
    pub length_delta: Option<f64>,
    pub deficit: f64,
    pub grid_points: usize,
    pub times: Option<Times>,
    pub interval: IntervalSpec,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub odd_multiple: u64,
    pub resolutions: Vec<usize>,
    pub dt_ratio: f64,
}

pub const DEFAULT_DEFICIT: f64 = 1e-8;
pub const DEFAULT_GRID_POINTS: usize = 1001;
pub const DEFAULT_RESOLUTIONS: [usize; 3] = [2048, 4096, 8192];
pub const DEFAULT_DT_RATIO: f64 = 0.1;

impl RunConfig {
    /// Type-checks every entry and enforces the unit-system rules.
    pub fn from_entries(entries: &Entries) -> Result<Self, ConfigError> {
        let units = entries
            .parse_with("units", |s| match s.trim() {
                "natural" => Ok(UnitSystem::Natural),
                "si" => Ok(UnitSystem::Si),
                other => Err(format!("expected `natural` or `si`, got `{other}`")),
            })?
            .unwrap_or(UnitSystem::Natural);
        let etas = entries.parse_with("eta", |s| parse_list(s, parse_f64))?.unwrap_or_default();
        for &eta in &etas {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(ConfigError::new("eta", format!("{eta} is outside (0, 1]")).at(entries.line("eta")));
            }
        }
        let positive = |key: &str| -> Result<Option<f64>, ConfigError> {
            let v = entries.parse_with(key, parse_f64)?;
            match v {
                Some(x) if x <= 0.0 => {
                    Err(ConfigError::new(key, format!("must be positive, got {x}")).at(entries.line(key)))
                }
                other => Ok(other),
            }
        };
        let mass = positive("mass")?;
        let length_l = positive("length_l")?;
        let length_delta = positive("length_delta")?;
        let deficit = entries.parse_with("deficit", parse_f64)?.unwrap_or(DEFAULT_DEFICIT);
        if !(deficit > 0.0 && deficit < 1.0) {
            return Err(ConfigError::new("deficit", format!("{deficit} is outside (0, 1)")).at(entries.line("deficit")));
        }
        let grid_points = entries.parse_with("grid_points", parse_usize)?.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 2 {
            return Err(ConfigError::new("grid_points", "need at least 2 points").at(entries.line("grid_points")));
        }
        let tau = entries.parse_with("tau", |s| parse_list(s, parse_f64))?;
        let seconds = entries.parse_with("time", |s| parse_list(s, parse_f64))?;
        let interval = entries.parse_with("interval", parse_interval)?.unwrap_or(IntervalSpec::Far);
        let format = entries
            .parse_with("format", |s| match s.trim() {
                "csv" => Ok(OutputFormat::Csv),
                "json" => Ok(OutputFormat::Json),
                other => Err(format!("expected `csv` or `json`, got `{other}`")),
            })?
            .unwrap_or(OutputFormat::Csv);
        let out = entries.get("out").map(|e| PathBuf::from(&e.value));
        let odd_multiple = entries
            .parse_with("odd_multiple", |s| {
                let k: u64 = s.trim().parse().map_err(|_| format!("`{s}` is not an integer"))?;
                if k % 2 == 1 {
                    Ok(k)
                } else {
                    Err(format!("{k} is not a positive odd integer"))
                }
            })?
            .unwrap_or(1);
        let resolutions = entries
            .parse_with("resolutions", |s| parse_list(s, parse_usize))?
            .unwrap_or_else(|| DEFAULT_RESOLUTIONS.to_vec());
        let dt_ratio = entries.parse_with("dt_ratio", parse_f64)?.unwrap_or(DEFAULT_DT_RATIO);
        if dt_ratio <= 0.0 {
            return Err(ConfigError::new("dt_ratio", "must be positive").at(entries.line("dt_ratio")));
        }

        let times = match units {
            UnitSystem::Natural => {
                for key in ["time", "mass", "length_l", "length_delta"] {
                    if entries.get(key).is_some() {
                        return Err(ConfigError::new(key, "not allowed with natural units (use eta and tau)")
                            .at(entries.line(key)));
                    }
                }
                tau.map(Times::Tau)
            }
            UnitSystem::Si => {
                for key in ["tau", "eta"] {
                    if entries.get(key).is_some() {
                        return Err(ConfigError::new(key, "not allowed with si units (use time and length_delta)")
                            .at(entries.line(key)));
                    }
                }
                if let (Some(l), Some(d)) = (length_l, length_delta) {
                    if d > l {
                        return Err(ConfigError::new("length_delta", format!("{d} exceeds length_l = {l}"))
                            .at(entries.line("length_delta")));
                    }
                }
                seconds.map(Times::Seconds)
            }
        };
        if let Some(Times::Tau(v) | Times::Seconds(v)) = &times {
            if v.windows(2).any(|w| w[1] < w[0]) || v.iter().any(|t| *t < 0.0) {
                let key = if units == UnitSystem::Natural { "tau" } else { "time" };
                return Err(ConfigError::new(key, "times must be non-negative and non-decreasing")
                    .at(entries.line(key)));
            }
        }

        Ok(Self {
            units,
            etas,
            mass,
            length_l,
            length_delta,
            deficit,
            grid_points,
            times,
            interval,
            format,
            out,
            odd_multiple,
            resolutions,
            dt_ratio,
        })
    }

    /// The single eta of a non-sweep natural run.
    pub fn single_eta(&self) -> Result<f64, ConfigError> {
        match self.etas.as_slice() {
            [eta] => Ok(*eta),
            [] => Err(ConfigError::new("eta", "required")),
            _ => Err(ConfigError::new("eta", "exactly one value expected for this command")),
        }
    }

    fn require(&self, key: &str, value: Option<f64>) -> Result<f64, ConfigError> {
        value.ok_or_else(|| ConfigError::new(key, "required with si units"))
    }

    /// Geometry and scales of a single-well run.
    pub fn physics(&self) -> Result<(WellGeometry, PhysicalScales), ConfigError> {
        match self.units {
            UnitSystem::Natural => {
                let eta = self.single_eta()?;
                let geometry = WellGeometry::natural(eta).map_err(|e| ConfigError::new("eta", e.to_string()))?;
                Ok((geometry, PhysicalScales::natural()))
            }
            UnitSystem::Si => {
                let mass = self.require("mass", self.mass)?;
                let l = self.require("length_l", self.length_l)?;
                let d = self.require("length_delta", self.length_delta)?;
                let geometry =
                    WellGeometry::new(d, l).map_err(|e| ConfigError::new("length_delta", e.to_string()))?;
                let scales = PhysicalScales::si(mass).map_err(|e| ConfigError::new("mass", e.to_string()))?;
                Ok((geometry, scales))
            }
        }
    }
}
