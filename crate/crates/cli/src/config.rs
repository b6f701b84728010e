//! Run configuration: the bundled defaults overlaid with a user file.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

pub const DEFAULTS: &str = include_str!("../defaults.toml");
pub const CONFIG_VERSION: i64 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: i64,
    pub geom: Geom,
    pub atlas: Atlas,
    pub solve: Solve,
    pub product: Product,
    pub parametrix: Parametrix,
    pub spherical: Spherical,
    pub verify: Verify,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geom {
    pub h: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atlas {
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solve {
    pub h: f64,
    pub r_max: f64,
    pub lambda: [f64; 2],
    pub source_width: f64,
    pub shell: [f64; 2],
    pub decay_window: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Product {
    pub a_max: f64,
    pub b_max: f64,
    pub na: usize,
    pub nb: usize,
    pub lambda: [f64; 2],
    pub bump_centre: [f64; 2],
    pub bump_width: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parametrix {
    pub h: f64,
    pub r_max: f64,
    pub lambda: [f64; 2],
    pub iterations: usize,
    pub source_radius: f64,
    pub source_width: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spherical {
    pub h: f64,
    pub r_max: f64,
    pub k: [f64; 2],
    pub angle_deg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verify {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
}

pub fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parse a configuration from text laid over the defaults.
pub fn from_str(text: &str) -> Result<Config, String> {
    let mut table: toml::Table = DEFAULTS
        .parse()
        .map_err(|e| format!("bundled defaults: {e}"))?;
    let user: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
    merge(&mut table, user);
    let cfg: Config = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| e.to_string())?;
    if cfg.version != CONFIG_VERSION {
        return Err(format!(
            "config version {} is not supported (expected {CONFIG_VERSION})",
            cfg.version
        ));
    }
    Ok(cfg)
}

pub fn load(path: Option<&Path>) -> Result<Config, String> {
    match path {
        None => from_str(""),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            from_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = from_str("").unwrap();
        assert_eq!(c.solve.lambda, [-1.0, 0.0]);
        assert_eq!(c.verify.suite, "all");
    }

    #[test]
    fn partial_override() {
        let c = from_str("[solve]\nh = 0.2\n").unwrap();
        assert_eq!(c.solve.h, 0.2);
        assert_eq!(c.solve.r_max, 30.0);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(from_str("[solve]\nhh = 0.2\n").is_err());
        assert!(from_str("version = 2\n").is_err());
        assert!(from_str("[solve\n").is_err());
        assert!(from_str("[solve]\nh = \"x\"\n").is_err());
    }
}
