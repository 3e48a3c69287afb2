use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Cli;

/// Everything needed to repeat a run: the parsed command line plus the
/// environment that could change its output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Cli,
    pub argv: Vec<String>,
    pub seeds: Vec<u64>,
    pub versions: BTreeMap<String, String>,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn load(path: &Path) -> qwalk_core::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("qwalk".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("qwalk-core".to_string(), qwalk_core::VERSION.to_string()),
    ])
}

fn is_timing_key(key: &str) -> bool {
    key == "wall_time_ms" || key == "time_ms"
}

/// Drops timing fields so results can be compared across runs.
pub fn strip_timings(v: &Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(k, _)| !is_timing_key(k))
                .map(|(k, v)| (k.clone(), strip_timings(v)))
                .collect(),
        ),
        Value::Array(items) => Value::Array(items.iter().map(strip_timings).collect()),
        other => other.clone(),
    }
}

/// JSON-pointer-like paths where two values differ, ignoring timings.
pub fn differences(a: &Value, b: &Value) -> Vec<String> {
    let mut out = Vec::new();
    diff_into(&strip_timings(a), &strip_timings(b), String::new(), &mut out);
    out
}

fn diff_into(a: &Value, b: &Value, path: String, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                let sub = format!("{path}/{key}");
                match (x.get(key), y.get(key)) {
                    (Some(u), Some(v)) => diff_into(u, v, sub, out),
                    _ => out.push(sub),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (k, (u, v)) in x.iter().zip(y).enumerate() {
                diff_into(u, v, format!("{path}/{k}"), out);
            }
        }
        _ if a == b => {}
        _ => out.push(if path.is_empty() { "/".into() } else { path }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn timings_are_ignored() {
        let a = json!({"value": 3.0, "wall_time_ms": 1.0, "rows": [{"time_ms": 2.0, "p": 1}]});
        let b = json!({"value": 3.0, "wall_time_ms": 9.0, "rows": [{"time_ms": 5.0, "p": 1}]});
        assert!(differences(&a, &b).is_empty());
    }

    #[test]
    fn differences_are_located() {
        let a = json!({"value": 3.0, "rows": [1, 2]});
        let b = json!({"value": 3.5, "rows": [1, 3], "extra": true});
        assert_eq!(differences(&a, &b), vec!["/rows/1", "/value", "/extra"]);
    }
}
