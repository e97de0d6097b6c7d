//! Experiment configuration: benchmark defaults, a strict `key = value`
//! config-file format with sections, and command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use lpv_dpc::control::SchedulingPolicy;
use lpv_dpc::signals::min_dictionary_length;

/// Which benchmark to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    /// SISO LPV system with exogenous sinusoidal scheduling.
    Example1,
    /// Nonlinear unbalanced disc with endogenous sinc scheduling.
    Example2,
    /// The academic LPV plant with every hyper-parameter supplied by the
    /// config file.
    Custom,
}

impl ExperimentId {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "example1" => Some(Self::Example1),
            "example2" => Some(Self::Example2),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Custom => "custom",
        }
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub n_d: usize,
    /// Prediction horizon (the control horizon equals it).
    pub horizon: usize,
    pub n_ell: usize,
    /// System order assumed for the excitation certificate.
    pub n_x: usize,
    pub steps: usize,
    pub q: f64,
    pub r: f64,
    pub reg: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub policy: SchedulingPolicy,
    /// Piecewise-constant reference: `(1-based start step, level)` pairs in
    /// ascending step order.
    pub reference: Vec<(usize, f64)>,
    /// RK4 sub-intervals per sample for the continuous-time plant.
    pub substeps: usize,
    pub sample_time: f64,
    pub out_dir: Option<PathBuf>,
}

/// A configuration problem: unknown keys, bad values, broken invariants.
#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(message: impl Into<String>) -> ConfigError {
    ConfigError {
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentId) -> Self {
        match experiment {
            ExperimentId::Example1 | ExperimentId::Custom => Self {
                experiment,
                seed: 42,
                n_d: 48,
                horizon: 5,
                n_ell: 2,
                n_x: 2,
                steps: 100,
                q: 10.0,
                r: 0.001,
                reg: 0.0,
                u_min: -5.0,
                u_max: 5.0,
                y_min: -1.0,
                y_max: 1.0,
                p_min: 0.0,
                p_max: 1.0,
                policy: SchedulingPolicy::KnownFuture,
                reference: vec![(1, 0.5), (21, -0.5), (41, 0.75), (61, -0.25), (81, 0.25)],
                substeps: 8,
                sample_time: 1.0,
                out_dir: None,
            },
            ExperimentId::Example2 => Self {
                experiment,
                seed: 42,
                n_d: 34,
                horizon: 5,
                n_ell: 2,
                n_x: 2,
                steps: 160,
                q: 0.1,
                r: 0.05,
                reg: 0.0,
                u_min: -0.25,
                u_max: 0.25,
                y_min: -1.0,
                y_max: 1.0,
                p_min: -0.22,
                p_max: 1.0,
                policy: SchedulingPolicy::Frozen,
                // Steps every 4 s at 75 ms sampling.
                reference: vec![(1, 0.0), (55, 0.6), (108, -0.4)],
                substeps: 8,
                sample_time: 0.075,
                out_dir: None,
            },
        }
    }

    /// Scheduling dimension of the experiment's plant.
    pub fn n_p(&self) -> usize {
        match self.experiment {
            ExperimentId::Example1 | ExperimentId::Custom => 2,
            ExperimentId::Example2 => 1,
        }
    }

    /// Order of the excitation certificate: `n_x + N_p`.
    pub fn pe_order(&self) -> usize {
        self.n_x + self.horizon
    }

    /// Smallest admissible dictionary length for these hyper-parameters.
    pub fn min_n_d(&self) -> usize {
        min_dictionary_length(1, self.n_p(), self.n_x, self.horizon)
    }

    /// Checks cross-field invariants. The dictionary-length bound is
    /// reported separately because it maps to the excitation exit code.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.horizon < 1 || self.n_ell < 1 || self.steps < 1 {
            return Err(err("horizon, nell and steps must be at least 1"));
        }
        if self.n_ell + self.horizon > self.n_d {
            return Err(err(format!(
                "nell + np = {} exceeds the dictionary length {}",
                self.n_ell + self.horizon,
                self.n_d
            )));
        }
        if self.u_min > self.u_max || self.y_min > self.y_max || self.p_min > self.p_max {
            return Err(err("empty constraint box (min > max)"));
        }
        if self.q < 0.0 || self.r < 0.0 || self.reg < 0.0 {
            return Err(err("weights must be nonnegative"));
        }
        if self.sample_time <= 0.0 {
            return Err(err("sample_time must be positive"));
        }
        let mut last = 0usize;
        for (k, _) in &self.reference {
            if *k < 1 || *k <= last && last != 0 {
                return Err(err("reference breakpoints must be ascending 1-based steps"));
            }
            last = *k;
        }
        if self.reference.is_empty() {
            return Err(err("reference must contain at least one breakpoint"));
        }
        Ok(())
    }

    /// True when the dictionary length satisfies the excitation bound.
    pub fn n_d_sufficient(&self) -> bool {
        self.n_d >= self.min_n_d()
    }

    /// Applies a parsed config file on top of the defaults.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let entries = parse_sections(text)?;
        for (section, key, value, line) in entries {
            let fail = |what: &str| {
                err(format!("line {line}: invalid value '{value}' for {what}"))
            };
            match (section.as_str(), key.as_str()) {
                ("experiment", "id") => {
                    self.experiment = ExperimentId::parse(&value)
                        .ok_or_else(|| fail("experiment id"))?;
                }
                ("experiment", "seed") => self.seed = value.parse().map_err(|_| fail("seed"))?,
                ("experiment", "nd") => self.n_d = value.parse().map_err(|_| fail("nd"))?,
                ("experiment", "np") => self.horizon = value.parse().map_err(|_| fail("np"))?,
                ("experiment", "nell") => self.n_ell = value.parse().map_err(|_| fail("nell"))?,
                ("experiment", "nx") => self.n_x = value.parse().map_err(|_| fail("nx"))?,
                ("experiment", "steps") => self.steps = value.parse().map_err(|_| fail("steps"))?,
                ("experiment", "substeps") => {
                    self.substeps = value.parse().map_err(|_| fail("substeps"))?
                }
                ("experiment", "sample_time") => {
                    self.sample_time = value.parse().map_err(|_| fail("sample_time"))?
                }
                ("experiment", "policy") => {
                    self.policy = match value.as_str() {
                        "known-future" => SchedulingPolicy::KnownFuture,
                        "frozen" => SchedulingPolicy::Frozen,
                        _ => return Err(fail("policy (known-future|frozen)")),
                    };
                }
                ("cost", "q") => self.q = value.parse().map_err(|_| fail("q"))?,
                ("cost", "r") => self.r = value.parse().map_err(|_| fail("r"))?,
                ("cost", "reg") => self.reg = value.parse().map_err(|_| fail("reg"))?,
                ("constraints", "u_min") => self.u_min = value.parse().map_err(|_| fail("u_min"))?,
                ("constraints", "u_max") => self.u_max = value.parse().map_err(|_| fail("u_max"))?,
                ("constraints", "y_min") => self.y_min = value.parse().map_err(|_| fail("y_min"))?,
                ("constraints", "y_max") => self.y_max = value.parse().map_err(|_| fail("y_max"))?,
                ("constraints", "p_min") => self.p_min = value.parse().map_err(|_| fail("p_min"))?,
                ("constraints", "p_max") => self.p_max = value.parse().map_err(|_| fail("p_max"))?,
                ("reference", "breakpoints") => {
                    self.reference = parse_breakpoints(&value)
                        .map_err(|m| err(format!("line {line}: {m}")))?;
                }
                (section, key) => {
                    return Err(err(format!(
                        "line {line}: unknown key '{key}' in section [{section}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses `start:level` pairs separated by commas.
fn parse_breakpoints(text: &str) -> Result<Vec<(usize, f64)>, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once(':')
            .ok_or_else(|| format!("expected 'step:level', found '{part}'"))?;
        let k: usize = k.trim().parse().map_err(|_| format!("invalid step '{k}'"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("invalid level '{v}'"))?;
        out.push((k, v));
    }
    if out.is_empty() {
        return Err("no breakpoints given".into());
    }
    Ok(out)
}

/// Strict section/key/value parser. Returns entries in file order with line
/// numbers; duplicate keys within a section are rejected.
fn parse_sections(text: &str) -> Result<Vec<(String, String, String, usize)>, ConfigError> {
    let mut entries = Vec::new();
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(format!("line {line_no}: unterminated section header")))?;
            section = name.trim().to_string();
            if !matches!(section.as_str(), "experiment" | "cost" | "constraints" | "reference") {
                return Err(err(format!("line {line_no}: unknown section [{section}]")));
            }
            continue;
        }
        if section.is_empty() {
            return Err(err(format!(
                "line {line_no}: key outside of any section (expected [experiment], [cost], [constraints] or [reference])"
            )));
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {line_no}: expected 'key = value'")))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if let Some(first) = seen.insert((section.clone(), key.clone()), line_no) {
            return Err(err(format!(
                "line {line_no}: duplicate key '{key}' (first set on line {first})"
            )));
        }
        entries.push((section.clone(), key, value, line_no));
    }
    Ok(entries)
}

/// Expands the breakpoint list into a per-step reference level.
pub fn reference_level(breakpoints: &[(usize, f64)], k: usize) -> f64 {
    let mut level = breakpoints.first().map(|(_, v)| *v).unwrap_or(0.0);
    for (start, v) in breakpoints {
        if k >= *start {
            level = *v;
        }
    }
    level
}
