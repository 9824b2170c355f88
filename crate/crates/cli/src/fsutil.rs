//! Atomic file output.

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Writes `bytes` to a sibling temp file and renames it over `path`, so
/// readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes).map_err(|e| CliError::io(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| CliError::io(path, e))
}

/// Renders rows with the csv writer and writes them atomically.
pub fn write_csv_atomic<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::Core(loadcast::Error::Csv(e));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing(path.display().to_string())
        } else {
            CliError::io(path, e)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_creates_parents_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/out.csv");
        write_csv_atomic(&path, &["x", "y"], [["1", "2"]]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "x,y\n1,2\n");
        let names: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec!["out.csv"]);
    }

    #[test]
    fn missing_file_is_reported_as_missing_input() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            read_to_string(&dir.path().join("nope")),
            Err(CliError::Missing(_))
        ));
    }
}
