//! CSV and JSON writers. Floats are written with 17 significant digits so a
//! re-read recovers the exact double.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| {
            Failure::config(format!("cannot create output dir {}: {e}", dir.display()))
        })?;
        Ok(Output {
            dir: dir.to_path_buf(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv<S: AsRef<[u8]>>(
        &self,
        name: &str,
        header: &[S],
        rows: &[Vec<String>],
    ) -> Result<(), Failure> {
        let path = self.path(name);
        let io = |e: csv::Error| Failure::config(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush()
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        fs::write(&path, text)
            .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
    }
}

pub fn floats(row: &[f64]) -> Vec<String> {
    row.iter().map(|&x| float(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(float(0.5), "5.0000000000000000e-1");
    }
}
