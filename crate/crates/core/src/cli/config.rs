//! INI-style run configuration.

use crate::flux::FluxModel;
use crate::scenarios::search::{SearchMethod, SearchSpec};
use crate::step::StepFunction;
use std::collections::BTreeMap;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing field [{section}] {key}")]
    Missing { section: String, key: String },
    #[error("field [{section}] {key}: {msg}")]
    Invalid { section: String, key: String, msg: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

/// Raw sectioned key/value text.
#[derive(Debug, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut out = RawConfig::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') || line.len() < 3 {
                    return Err(ConfigError::Parse { line: i + 1, msg: format!("malformed section header '{raw}'") });
                }
                section = line[1..line.len() - 1].trim().to_string();
                out.sections.entry(section.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse { line: i + 1, msg: format!("expected 'key = value', got '{raw}'") });
            };
            if section.is_empty() {
                return Err(ConfigError::Parse { line: i + 1, msg: "key outside any [section]".into() });
            }
            out.sections
                .entry(section.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(out)
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section).and_then(|s| s.get(key)).map(|v| v.as_str())
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn f64_opt(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| ConfigError::Invalid {
                section: section.into(),
                key: key.into(),
                msg: format!("'{v}' is not a number"),
            }),
        }
    }

    pub fn f64_req(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.f64_opt(section, key)?
            .ok_or_else(|| ConfigError::Missing { section: section.into(), key: key.into() })
    }

    pub fn usize_opt(&self, section: &str, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| ConfigError::Invalid {
                section: section.into(),
                key: key.into(),
                msg: format!("'{v}' is not a non-negative integer"),
            }),
        }
    }

    pub fn str_opt(&self, section: &str, key: &str) -> Option<&str> {
        self.get(section, key)
    }

    pub fn list_f64(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.get(section, key) {
            None => Ok(None),
            Some(v) => {
                let mut out = Vec::new();
                for tok in v.split_whitespace() {
                    out.push(tok.parse::<f64>().map_err(|_| ConfigError::Invalid {
                        section: section.into(),
                        key: key.into(),
                        msg: format!("'{tok}' is not a number"),
                    })?);
                }
                Ok(Some(out))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    ShockRarefaction,
    StraddlingJumps,
    FractalDatum,
    Custom,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "shock-rarefaction" => Some(ScenarioKind::ShockRarefaction),
            "straddling-jumps" => Some(ScenarioKind::StraddlingJumps),
            "fractal-datum" => Some(ScenarioKind::FractalDatum),
            "custom" => Some(ScenarioKind::Custom),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::ShockRarefaction => "shock-rarefaction",
            ScenarioKind::StraddlingJumps => "straddling-jumps",
            ScenarioKind::FractalDatum => "fractal-datum",
            ScenarioKind::Custom => "custom",
        }
    }
}

/// Fully validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub model: FluxModel,
    pub scenario: ScenarioKind,
    pub horizon: f64,
    pub delta: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub eps_match: Option<f64>,
    pub eps_j: Option<f64>,
    pub eps_f: Option<f64>,
    pub initial: Option<StepFunction>,
    pub k1: Option<StepFunction>,
    pub k2: Option<StepFunction>,
    pub params: BTreeMap<String, f64>,
    pub search: Option<SearchSpec>,
}

fn step_from(raw: &RawConfig, section: &str, lo: f64, hi: f64) -> Result<Option<StepFunction>, ConfigError> {
    if !raw.has_section(section) {
        return Ok(None);
    }
    let breaks = raw.list_f64(section, "breakpoints")?.unwrap_or_default();
    let values = raw
        .list_f64(section, "values")?
        .ok_or_else(|| ConfigError::Missing { section: section.into(), key: "values".into() })?;
    StepFunction::new(lo, hi, breaks, values)
        .map(Some)
        .map_err(|e| ConfigError::Invalid { section: section.into(), key: "values".into(), msg: e.to_string() })
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;

        let family = raw.str_opt("flux", "family").unwrap_or("quadratic");
        let u_lo = raw.f64_opt("flux", "u_lo")?.unwrap_or(0.0);
        let u_hi = raw.f64_opt("flux", "u_hi")?.unwrap_or(1.0);
        let model = match family {
            "quadratic" => FluxModel::quadratic(
                raw.f64_opt("flux", "alpha")?.unwrap_or(1.0),
                raw.f64_opt("flux", "beta")?.unwrap_or(1.0),
                raw.f64_opt("flux", "offset")?.unwrap_or(0.0),
                u_lo,
                u_hi,
            ),
            "neg_half_square" => FluxModel::neg_half_square(u_lo.min(-1.0), u_hi.max(2.0)),
            "tabulated" => {
                let grid = raw
                    .list_f64("flux", "grid")?
                    .ok_or_else(|| ConfigError::Missing { section: "flux".into(), key: "grid".into() })?;
                let values = raw
                    .list_f64("flux", "values")?
                    .ok_or_else(|| ConfigError::Missing { section: "flux".into(), key: "values".into() })?;
                FluxModel::tabulated(grid, values)
            }
            other => {
                return Err(ConfigError::Invalid {
                    section: "flux".into(),
                    key: "family".into(),
                    msg: format!("unknown family '{other}'"),
                })
            }
        }
        .map_err(|e| ConfigError::Invalid { section: "flux".into(), key: "family".into(), msg: e.to_string() })?;

        let scenario_name = raw.str_opt("run", "scenario").unwrap_or("custom");
        let scenario = ScenarioKind::parse(scenario_name).ok_or_else(|| ConfigError::Invalid {
            section: "run".into(),
            key: "scenario".into(),
            msg: format!("unknown scenario '{scenario_name}'"),
        })?;
        let horizon = raw.f64_req("run", "horizon")?;
        if !(horizon > 0.0) {
            return Err(ConfigError::Invalid {
                section: "run".into(),
                key: "horizon".into(),
                msg: "must be positive".into(),
            });
        }
        let delta = raw.f64_opt("run", "delta")?.unwrap_or(1e-3);
        if !(delta > 0.0) {
            return Err(ConfigError::Invalid {
                section: "run".into(),
                key: "delta".into(),
                msg: "must be positive".into(),
            });
        }
        let seed = raw.f64_opt("run", "seed")?.unwrap_or(0.0) as u64;
        let out_dir = PathBuf::from(raw.str_opt("run", "out_dir").unwrap_or("out"));

        let initial = step_from(&raw, "initial_data", f64::NEG_INFINITY, f64::INFINITY)?;
        let k1 = step_from(&raw, "k1", 0.0, horizon)?;
        let k2 = step_from(&raw, "k2", 0.0, horizon)?;
        for (name, f) in [("initial_data", &initial), ("k1", &k1), ("k2", &k2)] {
            if let Some(f) = f {
                for &v in f.values() {
                    if !model.contains(v) {
                        return Err(ConfigError::Invalid {
                            section: name.into(),
                            key: "values".into(),
                            msg: format!("state {v} outside the working range"),
                        });
                    }
                }
            }
        }

        let mut params = BTreeMap::new();
        if raw.has_section("params") {
            if let Some(sec) = raw.sections.get("params") {
                for (k, v) in sec {
                    let val = v.parse::<f64>().map_err(|_| ConfigError::Invalid {
                        section: "params".into(),
                        key: k.clone(),
                        msg: format!("'{v}' is not a number"),
                    })?;
                    params.insert(k.clone(), val);
                }
            }
        }

        let search = if raw.has_section("search") {
            let levels = raw.usize_opt("search", "levels")?.unwrap_or(0);
            let pieces = raw.usize_opt("search", "pieces")?.unwrap_or(1);
            let method = match raw.str_opt("search", "method").unwrap_or("exhaustive") {
                "exhaustive" => SearchMethod::Exhaustive,
                "coordinate_descent" => SearchMethod::CoordinateDescent {
                    restarts: raw.usize_opt("search", "restarts")?.unwrap_or(4),
                },
                other => {
                    return Err(ConfigError::Invalid {
                        section: "search".into(),
                        key: "method".into(),
                        msg: format!("unknown method '{other}'"),
                    })
                }
            };
            Some(SearchSpec {
                pieces,
                levels,
                flux_lo: raw.f64_opt("search", "flux_lo")?.unwrap_or(0.0),
                flux_hi: raw.f64_opt("search", "flux_hi")?.unwrap_or(model.max_flux()),
                method,
                seed,
                budget: raw.usize_opt("search", "budget")?.unwrap_or(100_000),
                eps_j: raw.f64_opt("search", "eps_j")?,
            })
        } else {
            None
        };

        Ok(RunConfig {
            model,
            scenario,
            horizon,
            delta,
            seed,
            out_dir,
            eps_match: raw.f64_opt("tolerances", "eps_match")?,
            eps_j: raw.f64_opt("tolerances", "eps_j")?,
            eps_f: raw.f64_opt("tolerances", "eps_f")?,
            initial,
            k1,
            k2,
            params,
            search,
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_lists() {
        let cfg = RunConfig::from_str(
            "[flux]\nfamily = quadratic\nalpha = 1.0\nbeta = 1.0\n\n\
             [run]\nscenario = custom\nhorizon = 3.0\ndelta = 0.001\nseed = 7\n\n\
             [initial_data]\nbreakpoints = -0.5 -0.1\nvalues = 0.1 0.4 0.3\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::Custom);
        assert_eq!(cfg.seed, 7);
        let u0 = cfg.initial.unwrap();
        assert_eq!(u0.values(), &[0.1, 0.4, 0.3]);
    }

    #[test]
    fn missing_horizon_is_named() {
        let err = RunConfig::from_str("[run]\nscenario = custom\n").unwrap_err();
        match err {
            ConfigError::Missing { section, key } => {
                assert_eq!(section, "run");
                assert_eq!(key, "horizon");
            }
            other => panic!("expected Missing, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_state_is_rejected() {
        let err = RunConfig::from_str(
            "[run]\nhorizon = 1.0\n[initial_data]\nbreakpoints =\nvalues = 1.7\n",
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }), "{err:?}");
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = RawConfig::parse("[run]\nhorizon 3.0\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected Parse, got {other:?}"),
        }
    }
}
