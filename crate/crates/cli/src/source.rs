//! Finding strategy files by name or path.

use std::path::PathBuf;

use weighwright::strategies::builtin;
use weighwright::{Error, Result, StrategyTable};

pub const DATA_ENV: &str = "WEIGHWRIGHT_DATA";

/// Loads `which`: a shipped table name, a name found in the data directory,
/// or a path to a strategy file.
pub fn load(which: &str) -> Result<StrategyTable> {
    if let Some(dir) = std::env::var_os(DATA_ENV) {
        let path = PathBuf::from(dir).join(format!("{which}.json"));
        if path.is_file() {
            return StrategyTable::from_json(&std::fs::read_to_string(path)?);
        }
    }
    if builtin::json(which).is_some() {
        return builtin::table(which);
    }
    let path = PathBuf::from(which);
    if !path.is_file() {
        return Err(Error::UnknownStrategy(which.into()));
    }
    StrategyTable::from_json(&std::fs::read_to_string(path)?)
}

/// Whether `which` names a shipped table that has not been overridden.
pub fn is_builtin(which: &str) -> bool {
    let overridden = std::env::var_os(DATA_ENV)
        .map(|dir| PathBuf::from(dir).join(format!("{which}.json")).is_file())
        .unwrap_or(false);
    builtin::json(which).is_some() && !overridden
}
