//! Merging of the optional JSON config file with command-line flags.

use crate::args::{Cli, Format};
use crate::error::CliError;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::PathBuf;

/// Settings shared by every subcommand.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Globals {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Subcommand the file was written for; must match the one invoked.
    pub command: Option<String>,
}

const GLOBAL_KEYS: [&str; 5] = ["out", "format", "seed", "tol", "command"];

/// Global settings plus the subcommand's parameter bag from the config file.
pub struct RunConfig {
    pub globals: Globals,
    pub params: Map<String, Value>,
}

impl RunConfig {
    pub fn load(cli: &Cli) -> Result<Self, CliError> {
        let mut params = match &cli.config {
            None => Map::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e,
                })?;
                match serde_json::from_str::<Value>(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => {
                        return Err(CliError::Usage(format!(
                            "{}: config must be a JSON object",
                            path.display()
                        )))
                    }
                    Err(e) => {
                        return Err(CliError::Usage(format!(
                            "{}: invalid JSON: {e}",
                            path.display()
                        )))
                    }
                }
            }
        };
        let mut g = Map::new();
        for k in GLOBAL_KEYS {
            if let Some(v) = params.remove(k) {
                g.insert(k.to_string(), v);
            }
        }
        let mut globals: Globals = serde_json::from_value(Value::Object(g))
            .map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if let Some(c) = &globals.command {
            if c != cli.command.name() {
                return Err(CliError::Usage(format!(
                    "config is for '{c}' but '{}' was invoked",
                    cli.command.name()
                )));
            }
        }
        globals.out = cli.out.clone().or(globals.out);
        globals.format = cli.format.or(globals.format);
        globals.seed = cli.seed.or(globals.seed);
        globals.tol = cli.tol.or(globals.tol);
        Ok(Self { globals, params })
    }

    /// Typed parameters: config values overlaid with every flag that was given.
    pub fn params<P: DeserializeOwned>(&self, flags: &impl Serialize) -> Result<P, CliError> {
        self.params_without::<P>(flags, &[]).map(|(p, _)| p)
    }

    /// Like [`RunConfig::params`] but first removes `extra` keys and returns them.
    pub fn params_without<P: DeserializeOwned>(
        &self,
        flags: &impl Serialize,
        extra: &[&str],
    ) -> Result<(P, Map<String, Value>), CliError> {
        let mut m = self.params.clone();
        if let Value::Object(f) = serde_json::to_value(flags).expect("flag structs serialize") {
            for (k, v) in f {
                if !v.is_null() {
                    m.insert(k, v);
                }
            }
        }
        let mut taken = Map::new();
        for k in extra {
            if let Some(v) = m.remove(*k) {
                taken.insert(k.to_string(), v);
            }
        }
        let p = serde_json::from_value(Value::Object(m))
            .map_err(|e| CliError::Usage(format!("parameters: {e}")))?;
        Ok((p, taken))
    }
}
