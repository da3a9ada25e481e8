use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Writes every `(path, contents)` pair through a temporary file in the target
/// directory. All temporaries are fully written before the first rename, so a
/// failure while writing leaves no output behind.
pub(crate) fn write_all_atomic(files: &[(PathBuf, Vec<u8>)]) -> Result<(), (PathBuf, io::Error)> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let stage = || -> io::Result<tempfile::NamedTempFile> {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            fs::create_dir_all(dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            Ok(tmp)
        };
        staged.push((path, stage().map_err(|e| (path.clone(), e))?));
    }
    for (path, tmp) in staged {
        tmp.persist(path).map_err(|e| (path.clone(), e.error))?;
    }
    Ok(())
}
