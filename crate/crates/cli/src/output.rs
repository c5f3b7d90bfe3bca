use std::fs;
use std::path::{Path, PathBuf};

use crate::commands::{Command, Outcome};
use crate::config::Resolved;
use crate::error::CliError;

/// Writes `<command>-<hash>.csv` and the echoed configuration
/// `<command>-<hash>.json` into `dir`; returns the CSV path.
pub fn write(dir: &Path, cmd: Command, r: &Resolved, out: &Outcome) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let stem = format!("{}-{}", cmd.name(), r.hash);
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    let mut header = vec!["experiment", "config_hash", "seed"];
    header.extend_from_slice(cmd.columns());
    w.write_record(&header)?;
    for row in &out.rows {
        let mut rec = vec![cmd.name().to_string(), r.hash.clone(), r.seed.to_string()];
        rec.extend(row.iter().map(|c| c.render()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let echo = serde_json::to_string_pretty(&r.config).expect("config serializes");
    fs::write(dir.join(format!("{stem}.json")), echo + "\n")?;
    Ok(csv_path)
}
