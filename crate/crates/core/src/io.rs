//! Serialization: the scattering-data cache document, CSV tables with `#`
//! metadata headers, field sidecars and the binary matrix container.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::determinant::{ConvergenceTable, SolutionField};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::potential::Potential;
use crate::scattering::{ScatteringData, ScatteringOptions, Source};

pub const FORMAT_VERSION: u32 = 1;

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Cache key of the data of `q` computed with `opts`.
pub fn scattering_key(q: &Potential, source: Source, opts: &ScatteringOptions) -> Result<String> {
    content_hash(&(FORMAT_VERSION, q, source, opts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringDocument {
    pub version: u32,
    pub key: String,
    pub data: ScatteringData,
}

pub fn save_scattering(path: &Path, key: &str, data: &ScatteringData) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let doc = ScatteringDocument {
        version: FORMAT_VERSION,
        key: key.to_string(),
        data: data.clone(),
    };
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_vec(&doc)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// `None` when the file is absent; an error when it is stale or corrupt.
pub fn load_scattering(path: &Path, key: &str) -> Result<Option<ScatteringData>> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let doc: ScatteringDocument = serde_json::from_slice(&bytes)?;
    if doc.version != FORMAT_VERSION || doc.key != key {
        return Err(Error::Format(format!(
            "{}: cache document version {} key {} does not match",
            path.display(),
            doc.version,
            doc.key
        )));
    }
    Ok(Some(doc.data))
}

/// Fixed 17-significant-digit rendering.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// A numeric table with `# key: value` header lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.render())?;
        Ok(())
    }

    /// Inverse of [`CsvTable::render`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::default();
        let mut header = false;
        for line in text.lines() {
            if let Some(m) = line.strip_prefix('#') {
                let (k, v) = m.split_once(':').unwrap_or((m, ""));
                table.meta.push((k.trim().into(), v.trim().into()));
            } else if !header {
                table.columns = line.split(',').map(str::to_string).collect();
                header = true;
            } else if !line.trim().is_empty() {
                let row = line
                    .split(',')
                    .map(|c| c.trim().parse::<f64>().map_err(|e| Error::Format(format!("{c:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != table.columns.len() {
                    return Err(Error::Format(format!("row has {} cells, header {}", row.len(), table.columns.len())));
                }
                table.rows.push(row);
            }
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Columns `x, t, u, logdet, residual`, `t`-major; residual is `nan` where
/// it was not computed.
pub fn field_table(field: &SolutionField) -> CsvTable {
    let mut table = CsvTable::new(&["x", "t", "u", "logdet", "residual"])
        .with_meta("route", &field.meta.route)
        .with_meta("nx", field.x_grid.len())
        .with_meta("nt", field.t_grid.len());
    if let Some(h) = &field.meta.potential_hash {
        table = table.with_meta("potential_hash", h);
    }
    for (j, &t) in field.t_grid.iter().enumerate() {
        for (i, &x) in field.x_grid.iter().enumerate() {
            let r = field.residual.as_ref().map_or(f64::NAN, |r| r[j][i]);
            table.rows.push(vec![x, t, field.u[j][i], field.logdet[j][i], r]);
        }
    }
    table
}

#[derive(Serialize)]
struct Sidecar<'a> {
    version: u32,
    x_grid: &'a [f64],
    t_grid: &'a [f64],
    meta: &'a crate::determinant::FieldMeta,
    residual_max_norm: Option<f64>,
}

/// JSON metadata accompanying [`field_table`].
pub fn field_sidecar(field: &SolutionField, residual_max_norm: Option<f64>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Sidecar {
        version: FORMAT_VERSION,
        x_grid: &field.x_grid,
        t_grid: &field.t_grid,
        meta: &field.meta,
        residual_max_norm,
    })?)
}

/// Columns `b, x, t, u_b, delta`; `delta` is `nan` on the last `b`.
pub fn convergence_csv(table: &ConvergenceTable) -> CsvTable {
    let mut out = CsvTable::new(&["b", "x", "t", "u_b", "delta"]);
    for (p, monotone) in table.monotone_tail.iter().enumerate() {
        out = out.with_meta(&format!("monotone_tail_{p}"), monotone);
    }
    for (i, &b) in table.b_values.iter().enumerate() {
        for (p, &(x, t)) in table.probes.iter().enumerate() {
            let d = table.deltas.get(i).map_or(f64::NAN, |d| d[p]);
            out.rows.push(vec![b, x, t, table.u_b[i][p], d]);
        }
    }
    out
}

/// Little-endian `u64` rows, `u64` cols, then row-major `f64` entries.
pub fn write_matrix<W: Write>(mut w: W, m: &Matrix<f64>) -> Result<()> {
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<Matrix<f64>> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let len = rows
        .checked_mul(cols)
        .filter(|&n| n <= 1 << 32)
        .ok_or_else(|| Error::Format(format!("matrix dims {rows} x {cols} out of range")))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    Ok(Matrix::from_row_major(rows, cols, data))
}
