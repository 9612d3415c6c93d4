use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use su11_core::{CMatrix, Complex64, GaussianState};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

/// Wire form of a zero-displacement Gaussian state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<JsonComplex>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<JsonComplex>>,
}

fn rows(m: &CMatrix) -> Vec<Vec<JsonComplex>> {
    m.row_iter()
        .map(|r| {
            r.iter()
                .map(|z| JsonComplex { re: z.re, im: z.im })
                .collect()
        })
        .collect()
}

fn matrix(name: &str, m: usize, rows: &[Vec<JsonComplex>]) -> CliResult<CMatrix> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(CliError::Validation(format!("`{name}` must be {m}x{m}")));
    }
    Ok(CMatrix::from_fn(m, m, |i, j| {
        Complex64::new(rows[i][j].re, rows[i][j].im)
    }))
}

impl StateJson {
    pub fn from_state(state: &GaussianState) -> Self {
        Self {
            m: state.mode_count(),
            a: rows(state.a()),
            b: rows(state.b()),
        }
    }

    pub fn to_state(&self) -> CliResult<GaussianState> {
        let a = matrix("A", self.m, &self.a)?;
        let b = matrix("B", self.m, &self.b)?;
        Ok(GaussianState::from_blocks(a, b)?)
    }
}

pub fn read_state(path: &Path) -> CliResult<GaussianState> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed: StateJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    parsed.to_state()
}

/// Buffered sink for a file or stdout that reports failures against the path.
pub struct Output {
    label: PathBuf,
    inner: Box<dyn Write>,
}

impl Output {
    pub fn open(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => {
                let file = File::create(p).map_err(|e| CliError::io(p, e))?;
                Ok(Self {
                    label: p.to_path_buf(),
                    inner: Box::new(BufWriter::new(file)),
                })
            }
            None => Ok(Self {
                label: PathBuf::from("<stdout>"),
                inner: Box::new(BufWriter::new(io::stdout())),
            }),
        }
    }

    pub fn json<T: Serialize>(mut self, value: &T) -> CliResult<()> {
        serde_json::to_writer_pretty(&mut self.inner, value)
            .map_err(|e| CliError::io(&self.label, e))?;
        writeln!(self.inner).map_err(|e| CliError::io(&self.label, e))?;
        self.finish()
    }

    pub fn csv(self) -> CsvOutput {
        CsvOutput {
            label: self.label,
            writer: csv::Writer::from_writer(self.inner),
        }
    }

    fn finish(mut self) -> CliResult<()> {
        self.inner.flush().map_err(|e| CliError::io(&self.label, e))
    }
}

pub struct CsvOutput {
    label: PathBuf,
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvOutput {
    pub fn row<I, T>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::io(&self.label, e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer
            .flush()
            .map_err(|e| CliError::io(&self.label, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use su11_core::{build_family, FamilyTag, InterferometerParams};

    #[test]
    fn json_round_trip_is_exact() {
        let p = InterferometerParams::new(1.3, 0.7, 2.1, 0.4).unwrap();
        for tag in FamilyTag::ALL {
            let st = build_family(tag, 7, &p).unwrap();
            let text = serde_json::to_string(&StateJson::from_state(&st)).unwrap();
            let back = serde_json::from_str::<StateJson>(&text)
                .unwrap()
                .to_state()
                .unwrap();
            assert!(back.max_deviation(&st).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn ragged_blocks_are_rejected() {
        let bad = StateJson {
            m: 2,
            a: vec![vec![JsonComplex { re: 1.0, im: 0.0 }]],
            b: vec![],
        };
        assert!(bad.to_state().is_err());
    }
}
