//! TOML configuration: four sections layered over built-in defaults.
//!
//! ```toml
//! [scenario]     # id, periods_ms, sector_counts, fixed_bs_sectors, ratio, slots, realizations, seed
//! [link]         # transmit power, carrier, bandwidth, losses, blockage, SE cap, sidelobe
//! [mobility]     # disc center/radius, speed range, rotation, heading noise
//! [environment]  # shadowing, BS position, codebooks, measurement time, thresholds, sub-step
//! ```
//!
//! Every key is optional; omitted keys keep their defaults. Each problem is
//! reported with its dotted field path.

use std::fmt;

use beamband::env::EnvParams;
use beamband::ratio::SweepRatio;
use beamband::scenarios::{Scenario, ScenarioConfig};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const SECTIONS: [&str; 4] = ["scenario", "link", "mobility", "environment"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    id: Scenario,
    periods_ms: Vec<u64>,
    sector_counts: Vec<usize>,
    fixed_bs_sectors: usize,
    ratio: SweepRatio,
    slots: usize,
    realizations: usize,
    seed: u64,
}

/// One or more problems found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<(String, String)>);

impl ConfigErrors {
    fn one(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigErrors(vec![(path.into(), message.into())])
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (path, message)) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if path.is_empty() {
                write!(f, "{message}")?;
            } else {
                write!(f, "{path}: {message}")?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// The fully resolved configuration plus the keys the document set.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ScenarioConfig,
    pub overrides: Vec<String>,
}

/// Default document for `scenario`, one table per section.
pub fn default_document(scenario: Scenario) -> Table {
    to_document(&ScenarioConfig::new(scenario))
}

pub fn to_document(config: &ScenarioConfig) -> Table {
    let section = ScenarioSection {
        id: config.scenario,
        periods_ms: config.periods_ms.clone(),
        sector_counts: config.sector_counts.clone(),
        fixed_bs_sectors: config.fixed_bs_sectors,
        ratio: config.ratio,
        slots: config.slots,
        realizations: config.realizations,
        seed: config.seed,
    };
    let mut env = Table::try_from(&config.env).expect("environment serializes");
    let link = env.remove("budget").expect("budget table");
    let mobility = env.remove("mobility").expect("mobility table");
    let mut doc = Table::new();
    doc.insert("scenario".into(), Value::Table(Table::try_from(&section).expect("scenario serializes")));
    doc.insert("link".into(), link);
    doc.insert("mobility".into(), mobility);
    doc.insert("environment".into(), Value::Table(env));
    doc
}

fn from_document(doc: &Table) -> Result<ScenarioConfig, ConfigErrors> {
    let section = |name: &str| doc.get(name).cloned().unwrap_or_else(|| Value::Table(Table::new()));
    let scenario: ScenarioSection =
        section("scenario").try_into().map_err(|e: toml::de::Error| ConfigErrors::one("scenario", e.message()))?;
    let mut env = match section("environment") {
        Value::Table(t) => t,
        _ => return Err(ConfigErrors::one("environment", "must be a table")),
    };
    env.insert("budget".into(), section("link"));
    env.insert("mobility".into(), section("mobility"));
    let env: EnvParams = Value::Table(env).try_into().map_err(|e: toml::de::Error| ConfigErrors::one("environment", e.message()))?;
    Ok(ScenarioConfig {
        scenario: scenario.id,
        periods_ms: scenario.periods_ms,
        sector_counts: scenario.sector_counts,
        fixed_bs_sectors: scenario.fixed_bs_sectors,
        ratio: scenario.ratio,
        slots: scenario.slots,
        realizations: scenario.realizations,
        seed: scenario.seed,
        env,
    })
}

/// Checks `value` against the default's shape; integers are accepted for floats.
fn coerce(path: &str, default: &Value, value: Value) -> Result<Value, (String, String)> {
    let kind = |v: &Value| v.type_str();
    match (default, value) {
        (Value::Float(_), Value::Integer(i)) => Ok(Value::Float(i as f64)),
        (Value::Array(d), Value::Array(items)) => {
            let Some(proto) = d.first() else { return Ok(Value::Array(items)) };
            items
                .into_iter()
                .enumerate()
                .map(|(i, v)| coerce(&format!("{path}[{i}]"), proto, v))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        // Ratios are written as "1/2" but a bare 1 or 0.5 is natural too.
        (Value::String(_), Value::Integer(i)) if path == "scenario.ratio" => Ok(Value::String(i.to_string())),
        (Value::String(_), Value::Float(x)) if path == "scenario.ratio" => Ok(Value::String(x.to_string())),
        (d, v) if kind(d) == kind(&v) => Ok(v),
        (d, v) => Err((path.to_string(), format!("expected {}, found {}", kind(d), kind(&v)))),
    }
}

/// Applies `overrides` (a parsed document) on top of the defaults for the
/// scenario it names, or `fallback` when it names none.
pub fn resolve(overrides: &Table, fallback: Scenario) -> Result<Resolved, ConfigErrors> {
    let mut errors = Vec::new();
    let scenario = match overrides.get("scenario").and_then(|s| s.get("id")) {
        None => fallback,
        Some(Value::Integer(n)) => match u8::try_from(*n).ok().and_then(|n| Scenario::try_from(n).ok()) {
            Some(s) => s,
            None => return Err(ConfigErrors::one("scenario.id", format!("unknown scenario {n} (expected 1, 2 or 3)"))),
        },
        Some(v) => return Err(ConfigErrors::one("scenario.id", format!("expected integer, found {}", v.type_str()))),
    };
    let mut doc = default_document(scenario);
    let mut set = Vec::new();

    for (name, value) in overrides {
        let Some(Value::Table(target)) = doc.get_mut(name) else {
            errors.push((name.clone(), format!("unknown section (expected one of {})", SECTIONS.join(", "))));
            continue;
        };
        let Value::Table(entries) = value else {
            errors.push((name.clone(), "must be a table".into()));
            continue;
        };
        for (key, v) in entries {
            let path = format!("{name}.{key}");
            let Some(default) = target.get(key) else {
                let known: Vec<&str> = target.keys().map(String::as_str).collect();
                errors.push((path, format!("unknown field (expected one of {})", known.join(", "))));
                continue;
            };
            match coerce(&path, default, v.clone()) {
                Ok(v) => {
                    target.insert(key.clone(), v);
                    set.push(path);
                }
                Err(problem) => errors.push(problem),
            }
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    let config = from_document(&doc)?;
    let issues = config.issues();
    if !issues.is_empty() {
        return Err(ConfigErrors(issues.into_iter().map(|i| (i.path, i.message)).collect()));
    }
    Ok(Resolved { config, overrides: set })
}

pub fn parse(text: &str) -> Result<Table, ConfigErrors> {
    text.parse::<Table>().map_err(|e| ConfigErrors::one("", format!("malformed TOML: {}", e.to_string().trim_end())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_str(text: &str) -> Result<Resolved, ConfigErrors> {
        resolve(&parse(text)?, Scenario::I)
    }

    fn paths(e: ConfigErrors) -> Vec<String> {
        e.0.into_iter().map(|(p, _)| p).collect()
    }

    #[test]
    fn empty_document_gives_defaults() {
        let r = resolve_str("").unwrap();
        assert_eq!(r.config, ScenarioConfig::new(Scenario::I));
        assert!(r.overrides.is_empty());
        assert_eq!(r.config.env.budget.tx_power_dbm, 15.0);
        assert_eq!(r.config.env.budget.block_prob, 0.13);
    }

    #[test]
    fn document_round_trips() {
        for s in [Scenario::I, Scenario::II, Scenario::III] {
            let doc = default_document(s);
            assert_eq!(from_document(&doc).unwrap(), ScenarioConfig::new(s));
            let text = toml::to_string(&doc).unwrap();
            assert_eq!(resolve(&parse(&text).unwrap(), Scenario::I).unwrap().config, ScenarioConfig::new(s));
        }
    }

    #[test]
    fn scenario_id_selects_defaults() {
        let r = resolve_str("[scenario]\nid = 3").unwrap();
        assert_eq!(r.config.scenario, Scenario::III);
        assert_eq!(r.config.slots, 300);
        assert_eq!(r.overrides, vec!["scenario.id"]);
    }

    #[test]
    fn overrides_are_applied_and_echoed() {
        let r = resolve_str("[link]\nblock_prob = 0.2\ntx_power_dbm = 20\n[mobility]\nradius_m = 5.0").unwrap();
        assert_eq!(r.config.env.budget.block_prob, 0.2);
        assert_eq!(r.config.env.budget.tx_power_dbm, 20.0);
        assert_eq!(r.config.env.mobility.radius_m, 5.0);
        assert_eq!(r.overrides, vec!["link.block_prob", "link.tx_power_dbm", "mobility.radius_m"]);
    }

    #[test]
    fn probability_out_of_range_names_the_field() {
        let e = resolve_str("[link]\nblock_prob = 1.5").unwrap_err();
        assert_eq!(paths(e), vec!["link.block_prob"]);
    }

    #[test]
    fn non_integral_beam_count_rejected() {
        let e = resolve_str("[scenario]\nid = 3\nratio = 0.3").unwrap_err();
        assert!(e.0.iter().any(|(p, m)| p == "scenario.ratio" && m.contains("16 sectors")), "{e}");
        let ok = resolve_str("[scenario]\nid = 3\nratio = \"1/2\"").unwrap();
        assert_eq!(ok.config.ratio, SweepRatio::new(1, 2).unwrap());
    }

    #[test]
    fn unknown_keys_and_sections() {
        let e = resolve_str("[link]\nblock_probability = 0.1\n[extra]\nx = 1").unwrap_err();
        assert_eq!(paths(e), vec!["extra", "link.block_probability"]);
    }

    #[test]
    fn type_errors_name_the_field() {
        let e = resolve_str("[scenario]\nslots = \"many\"\nperiods_ms = [10, \"x\"]").unwrap_err();
        assert_eq!(paths(e), vec!["scenario.periods_ms[1]", "scenario.slots"]);
        assert!(resolve_str("[scenario]\nid = 7").is_err());
    }

    #[test]
    fn all_problems_reported_together() {
        let e = resolve_str("[link]\nblock_prob = -1.0\n[mobility]\nradius_m = -2.0").unwrap_err();
        assert_eq!(paths(e), vec!["link.block_prob", "mobility.radius_m"]);
    }

    #[test]
    fn malformed_toml() {
        assert!(parse("[link\nx=").is_err());
    }
}
