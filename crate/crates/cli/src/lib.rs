//! Configuration, dispatch and output for the `hybrid-radiance` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{parse_config, Command, Format, RunConfig};
pub use error::{CliError, CliResult};

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Run `cfg` and write the data file, any dumps and the metadata sidecar into
/// `cfg.output.path`. Returns the written paths.
pub fn execute(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let out = commands::run(cfg)?;
    let dir = PathBuf::from(&cfg.output.path);
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;

    let ext = match cfg.output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let name = cfg.command.name();
    let data = dir.join(format!("{name}.{ext}"));
    write(&data, &out.table.render(cfg.output.format, cfg.output.precision))?;
    let mut written = vec![data.clone()];

    for a in &out.attachments {
        let p = dir.join(&a.name);
        write(&p, &a.contents)?;
        written.push(p);
    }

    let meta = json!({
        "artifact": "hybrid-radiance",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "data_file": data.file_name().map(|f| f.to_string_lossy()),
        "columns": out.table.columns,
        "rows": out.table.rows.len(),
        "config": cfg,
        "geometries": out.geometries,
        "attachments": out.attachments.iter().map(|a| &a.name).collect::<Vec<_>>(),
    });
    let meta_path = dir.join(format!("{name}.meta.json"));
    write(&meta_path, &(serde_json::to_string_pretty(&meta).expect("metadata serialises") + "\n"))?;
    written.push(meta_path);
    Ok(written)
}
