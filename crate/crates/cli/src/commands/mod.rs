pub mod analytic;
pub mod analyze;
pub mod single;
pub mod sweep;

use std::path::{Path, PathBuf};

/// `dir/stem<suffix>` for a primary output `dir/stem.ext`.
pub fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    primary.with_file_name(format!("{stem}{suffix}"))
}
