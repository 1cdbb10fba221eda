//! File helpers. Every output goes through a temporary sibling that is renamed into
//! place, so a failed run never leaves a half-written file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use reefscan::dataset::manifest::{load_dataset, DatasetFiles, CLASSES_FILE};
use reefscan::Dataset;

use crate::DatasetArgs;

pub const CURATION_RECORD_FILE: &str = "curation.json";

fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

pub fn classes_path(data: &DatasetArgs) -> PathBuf {
    data.classes
        .clone()
        .unwrap_or_else(|| parent_dir(&data.gt).join(CLASSES_FILE))
}

pub fn load(data: &DatasetArgs) -> Result<Dataset> {
    let classes = classes_path(data);
    load_dataset(&data.gt, &classes).with_context(|| format!("loading dataset {}", data.gt.display()))
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path))
        .with_context(|| format!("creating a temporary file next to {}", path.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes to `path`, or to standard output when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Materializes a dataset directory at `out`, which must be absent or empty.
pub fn write_dataset_dir(out: &Path, files: &DatasetFiles, extra: &[(&str, String)]) -> Result<()> {
    if out.exists() {
        let empty = fs::read_dir(out)
            .with_context(|| format!("inspecting {}", out.display()))?
            .next()
            .is_none();
        if !empty {
            bail!("output directory {} is not empty", out.display());
        }
    }
    let parent = parent_dir(out);
    fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".reefscan-")
        .tempdir_in(parent)
        .with_context(|| format!("creating a staging directory in {}", parent.display()))?;
    files.write_to(staging.path())?;
    for (name, contents) in extra {
        fs::write(staging.path().join(name), contents)?;
    }
    if out.exists() {
        fs::remove_dir(out).with_context(|| format!("replacing {}", out.display()))?;
    }
    // on failure the staging directory is removed when it goes out of scope
    fs::rename(staging.path(), out).with_context(|| format!("moving the dataset into {}", out.display()))?;
    let _ = staging.keep();
    Ok(())
}
