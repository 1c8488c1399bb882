//! Oracle sidecar: grid results keyed by a content hash of the instance data
//! they depend on.

use crate::config::InstanceConfig;
use crate::CliError;
use datacompat::{OracleResult, Vector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedOracle {
    pub gamma_star: f64,
    pub feasibility_level: Option<f64>,
    pub min_value: f64,
    pub reference: Vec<Vec<f64>>,
    pub l_bar: f64,
}

impl From<&OracleResult> for CachedOracle {
    fn from(r: &OracleResult) -> Self {
        Self {
            gamma_star: r.gamma_star,
            feasibility_level: r.feasibility_level,
            min_value: r.min_value,
            reference: r.reference.iter().map(|x| x.iter().copied().collect()).collect(),
            l_bar: r.l_bar,
        }
    }
}

impl CachedOracle {
    pub fn into_result(self) -> OracleResult {
        OracleResult {
            gamma_star: self.gamma_star,
            feasibility_level: self.feasibility_level,
            min_value: self.min_value,
            reference: self.reference.iter().map(|x| Vector::from_column_slice(x)).collect(),
            l_bar: self.l_bar,
        }
    }
}

/// Everything the oracle output depends on. Besides the data pair and the
/// grid, the target level and the operator decide which set is swept.
#[derive(Serialize)]
struct KeyFields<'a> {
    sets: &'a [crate::config::SetConfig],
    weights: &'a Option<Vec<f64>>,
    objective: &'a crate::config::ObjectiveConfig,
    #[serde(rename = "box")]
    ambient: &'a crate::config::BoxConfig,
    h: f64,
    gamma: Option<f64>,
    operator: &'a crate::config::OperatorConfig,
    value_tol: Option<f64>,
}

pub fn instance_key(cfg: &InstanceConfig) -> String {
    let fields = KeyFields {
        sets: &cfg.sets,
        weights: &cfg.weights,
        objective: &cfg.objective,
        ambient: &cfg.ambient,
        h: cfg.grid_h(),
        gamma: cfg.gamma,
        operator: &cfg.operator,
        value_tol: cfg.oracle_value_tol,
    };
    let bytes = serde_json::to_vec(&fields).expect("config fields serialize");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Default)]
pub struct OracleCache {
    path: PathBuf,
    entries: BTreeMap<String, CachedOracle>,
    dirty: bool,
}

impl OracleCache {
    /// Opens the sidecar; a missing file is an empty cache.
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let entries = match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| CliError::Parse(format!("oracle cache {}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(CliError::Io(format!("cannot read oracle cache {}: {e}", path.display()))),
        };
        Ok(Self { path: path.to_path_buf(), entries, dirty: false })
    }

    pub fn get(&self, key: &str) -> Option<OracleResult> {
        self.entries.get(key).cloned().map(CachedOracle::into_result)
    }

    pub fn insert(&mut self, key: String, result: &OracleResult) {
        self.entries.insert(key, result.into());
        self.dirty = true;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn save(&mut self) -> Result<(), CliError> {
        if !self.dirty {
            return Ok(());
        }
        let text = serde_json::to_string_pretty(&self.entries).expect("cache serializes");
        std::fs::write(&self.path, text)
            .map_err(|e| CliError::Io(format!("cannot write oracle cache {}: {e}", self.path.display())))?;
        self.dirty = false;
        Ok(())
    }
}
