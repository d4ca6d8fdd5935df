//! Config resolution: a `--config` value is either a JSON file path or
//! the name of a bundled preset. Dotted-key `--set` overrides are applied
//! to the parsed JSON before typed deserialization, so override typos are
//! caught by the same unknown-field validation as file contents.

use std::path::Path;

use serde_json::Value;
use zeldovich_core::presets::preset_json;

use crate::{CliError, CommonArgs};

/// Load the raw JSON for a `--config` argument. File paths win over
/// preset names; a bare name with no matching file must name a preset.
pub fn load_raw(spec: &str) -> Result<Value, CliError> {
    let path = Path::new(spec);
    let text: String = if path.exists() {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config '{spec}': {e}")))?
    } else if let Some(json) = preset_json(spec) {
        json.to_string()
    } else {
        return Err(CliError::Usage(format!(
            "config '{spec}' is neither a file nor a bundled preset \
             (presets: table1_highR, table1_lowR, fig4_openloop_643, \
             fig4_openloop_660, closedloop_700)"
        )));
    };
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config '{spec}' is not valid JSON: {e}")))
}

/// Apply one `key=value` override to a JSON tree. The key is a dotted
/// path; numeric path segments index arrays. The value is parsed as JSON
/// when possible, else taken as a string.
fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set '{spec}' is not of the form key=value")))?;
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let mut node = root;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        match node {
            Value::Object(m) => {
                if last {
                    m.insert(seg.to_string(), parsed);
                    return Ok(());
                }
                node = m.get_mut(*seg).ok_or_else(|| {
                    CliError::Usage(format!("--set key '{key}': no field '{seg}'"))
                })?;
            }
            Value::Array(a) => {
                let idx: usize = seg.parse().map_err(|_| {
                    CliError::Usage(format!("--set key '{key}': '{seg}' is not an array index"))
                })?;
                let len = a.len();
                let slot = a.get_mut(idx).ok_or_else(|| {
                    CliError::Usage(format!(
                        "--set key '{key}': index {idx} out of bounds (len {len})"
                    ))
                })?;
                if last {
                    *slot = parsed;
                    return Ok(());
                }
                node = slot;
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "--set key '{key}': '{seg}' does not address an object or array"
                )))
            }
        }
    }
    unreachable!("split('.') yields at least one segment")
}

/// Load, override, and deserialize a config into its typed form.
/// `--seed` only makes sense for configs with a `seed` field; commands
/// that support it pass `apply_seed = true`, the rest reject the flag.
pub fn load<T: serde::de::DeserializeOwned>(
    common: &CommonArgs,
    apply_seed: bool,
) -> Result<T, CliError> {
    let mut raw = load_raw(&common.config)?;
    for o in &common.overrides {
        apply_override(&mut raw, o)?;
    }
    if let Some(seed) = common.seed {
        if !apply_seed {
            return Err(CliError::Usage(
                "--seed applies only to configs with a random seed (simulate, fit)".into(),
            ));
        }
        if let Value::Object(m) = &mut raw {
            m.insert("seed".into(), Value::from(seed));
        }
    }
    serde_json::from_value(raw).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}
