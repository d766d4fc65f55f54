//! Deterministic CSV emission.
//!
//! Every file starts with a versioned schema line (`# schema: <name>/1`)
//! followed by a column-header row, so external plotters can dispatch on
//! the schema without guessing.  Cells are rendered reproducibly: rationals
//! in `p/q` form, floats through Rust's shortest-roundtrip formatter.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kneading_core::{ArithmeticMode, Scalar};

pub struct Csv {
    name: String,
    buf: String,
}

impl Csv {
    pub fn new(name: &str, schema: &str, columns: &[&str]) -> Self {
        let mut buf = format!("# schema: {schema}/1\n");
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Csv { name: name.to_string(), buf }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    /// Write under `dir`, creating it if needed; returns the full path.
    pub fn write(self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(&self.name);
        std::fs::write(&path, &self.buf)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Render one scalar cell.
pub fn cell<K: Scalar>(x: &K) -> String {
    match K::MODE {
        ArithmeticMode::Rational => format!("{x}"),
        ArithmeticMode::Float => format!("{:?}", x.to_f64()),
    }
}

pub fn f64_cell(x: f64) -> String {
    format!("{x:?}")
}
