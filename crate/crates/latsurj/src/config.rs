//! `key = value` configuration files.
//!
//! Values from a config file are exported as `LATSURJ_<KEY>` environment
//! variables before the command line is parsed, and only when that
//! variable is not already set. Flags therefore override the environment,
//! which overrides the file.

use std::collections::BTreeMap;

use anyhow::{bail, Result};

pub const ENV_PREFIX: &str = "LATSURJ_";

/// Keys accepted in a config file; each corresponds to a global flag.
pub const KEYS: &[&str] = &[
    "n", "m", "u", "p", "q", "k", "dist", "trials", "seed", "b", "threads", "out", "format", "primes", "confidence", "tol",
];

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase().replace('-', "_"))
}

/// Parse a config file. Blank lines and lines starting with `#` are
/// skipped; keys are case-insensitive and may be written with or without
/// leading dashes.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", i + 1);
        };
        let key = key.trim().trim_start_matches('-').to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            bail!("config line {}: unknown key {key:?}", i + 1);
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key {key:?}", i + 1);
        }
    }
    Ok(out)
}

/// The `--config` path among raw arguments, if present.
pub fn config_arg(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Variables to export: file entries whose variable is unset.
pub fn env_overlay(entries: &BTreeMap<String, String>, is_set: impl Fn(&str) -> bool) -> Vec<(String, String)> {
    entries.iter().map(|(k, v)| (env_name(k), v.clone())).filter(|(name, _)| !is_set(name)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let c = parse_config("# experiment\nn = 60\n--dist=uniform01\nB = 2\n\n").unwrap();
        assert_eq!(c["n"], "60");
        assert_eq!(c["dist"], "uniform01");
        assert_eq!(c["b"], "2");
        assert!(parse_config("nn = 3").is_err());
        assert!(parse_config("n 3").is_err());
        assert!(parse_config("n = 3\nn = 4").is_err());
    }

    #[test]
    fn environment_wins_over_file() {
        let c = parse_config("n = 60\ntrials = 5").unwrap();
        let overlay = env_overlay(&c, |name| name == "LATSURJ_N");
        assert_eq!(overlay, [("LATSURJ_TRIALS".to_string(), "5".to_string())]);
    }

    #[test]
    fn finds_config_argument() {
        let args: Vec<String> = ["latsurj", "experiment", "corank", "--config", "a.conf"].map(String::from).to_vec();
        assert_eq!(config_arg(&args).as_deref(), Some("a.conf"));
        assert_eq!(config_arg(&["x".into(), "--config=b".into()]).as_deref(), Some("b"));
        assert_eq!(config_arg(&["x".into(), "--".into(), "--config=b".into()]), None);
    }
}
