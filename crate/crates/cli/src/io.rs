//! File formats: series CSV in, coefficient CSV and reconstructions out.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use csr_core::{BasisSpec, Preprocess};
use nalgebra::DMatrix;

use crate::error::CliError;

pub const TIME_COLUMN: &str = "t";

/// Format with 17 significant digits so values survive a text round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write to a temporary file next to `path`, then rename over it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// A series CSV: header row, optional leading `t` column, one column per series.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub timestamps: Option<Vec<f64>>,
    pub labels: Vec<String>,
    /// n × p
    pub values: DMatrix<f64>,
}

fn csv_error(path: &Path, err: csv::Error) -> CliError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.kind() {
        csv::ErrorKind::Io(_) => CliError::data(path, err.to_string()),
        _ => CliError::Parse {
            path: path.to_path_buf(),
            line,
            column: "-".into(),
            message: err.to_string(),
        },
    }
}

pub fn read_table(path: &Path) -> Result<DataTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(path, &text)
}

pub fn parse_table(path: &Path, text: &str) -> Result<DataTable, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::data(path, "missing header row"));
    }
    let has_time = headers[0] == TIME_COLUMN;
    let labels: Vec<String> = headers.iter().skip(usize::from(has_time)).cloned().collect();

    let mut timestamps = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        for (c, cell) in record.iter().enumerate() {
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Parse {
                    path: path.to_path_buf(),
                    line,
                    column: format!("{} ({})", c + 1, headers[c]),
                    message: format!("expected a finite number, found {cell:?}"),
                })?;
            if has_time && c == 0 {
                timestamps.push(value);
            } else {
                columns[c - usize::from(has_time)].push(value);
            }
        }
    }
    let n = if has_time {
        timestamps.len()
    } else {
        columns.first().map_or(0, Vec::len)
    };
    if n == 0 {
        return Err(CliError::data(path, "no data rows"));
    }
    let flat: Vec<f64> = columns.into_iter().flatten().collect();
    Ok(DataTable {
        timestamps: has_time.then_some(timestamps),
        labels,
        values: DMatrix::from_vec(n, flat.len() / n, flat),
    })
}

impl DataTable {
    /// Reorder rows so timestamps increase.
    pub fn sort_by_time(&mut self) {
        let Some(ts) = &self.timestamps else { return };
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return;
        }
        let sorted_ts = order.iter().map(|&j| ts[j]).collect();
        let values = DMatrix::from_fn(self.values.nrows(), self.values.ncols(), |i, c| {
            self.values[(order[i], c)]
        });
        self.timestamps = Some(sorted_ts);
        self.values = values;
    }
}

/// CSV text with a `t` column followed by one column per series.
pub fn table_csv(timestamps: &[f64], labels: &[String], values: &DMatrix<f64>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![TIME_COLUMN.to_string()];
    header.extend(labels.iter().cloned());
    let to_cli = |e: csv::Error| CliError::data("<output>", e.to_string());
    w.write_record(&header).map_err(to_cli)?;
    for (j, t) in timestamps.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        row.extend(values.row(j).iter().map(|v| fmt_f64(*v)));
        w.write_record(&row).map_err(to_cli)?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::data("<output>", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::data("<output>", e.to_string()))
}

/// Coefficients plus the metadata needed to evaluate them again.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFile {
    pub spec: BasisSpec,
    pub n: usize,
    pub normalize: bool,
    pub t_range: (f64, f64),
    pub labels: Vec<String>,
    pub preprocess: Vec<Preprocess>,
    /// m × p, rows in basis-index order.
    pub coeffs: DMatrix<f64>,
}

const COEFF_MAGIC: &str = "# csr-coefficients v1";

impl CoefficientFile {
    pub fn to_csv(&self) -> Result<String, CliError> {
        let join = |f: &dyn Fn(&Preprocess) -> f64| {
            self.preprocess
                .iter()
                .map(|p| fmt_f64(f(p)))
                .collect::<Vec<_>>()
                .join(";")
        };
        let mut out = String::new();
        out.push_str(COEFF_MAGIC);
        out.push('\n');
        for (key, value) in [
            ("basis", self.spec.family.to_string()),
            ("degree", self.spec.degree.to_string()),
            ("functions", self.spec.len().to_string()),
            ("n", self.n.to_string()),
            ("normalize", self.normalize.to_string()),
            ("t_min", fmt_f64(self.t_range.0)),
            ("t_max", fmt_f64(self.t_range.1)),
            ("offset", join(&|p| p.offset)),
            ("scale", join(&|p| p.scale)),
        ] {
            out.push_str(&format!("# {key}={value}\n"));
        }

        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string()];
        header.extend(self.labels.iter().cloned());
        let to_cli = |e: csv::Error| CliError::data("<output>", e.to_string());
        w.write_record(&header).map_err(to_cli)?;
        for (row, index) in self.spec.indices().enumerate() {
            let mut record = vec![index.to_string()];
            record.extend(self.coeffs.row(row).iter().map(|v| fmt_f64(*v)));
            w.write_record(&record).map_err(to_cli)?;
        }
        out.push_str(&finish_csv(w)?);
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        if !text.starts_with(COEFF_MAGIC) {
            return Err(CliError::data(
                path,
                "not a coefficient file (missing csr-coefficients header)",
            ));
        }
        let meta: Vec<(String, String)> = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .filter_map(|l| l.trim().split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        let get = |key: &str| -> Result<&str, CliError> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| CliError::data(path, format!("missing metadata key {key:?}")))
        };
        let num = |key: &str| -> Result<f64, CliError> {
            get(key)?
                .parse::<f64>()
                .map_err(|_| CliError::data(path, format!("metadata {key:?} is not a number")))
        };
        let list = |key: &str| -> Result<Vec<f64>, CliError> {
            let raw = get(key)?;
            if raw.is_empty() {
                return Ok(Vec::new());
            }
            raw.split(';')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::data(path, format!("metadata {key:?} has a bad entry {v:?}")))
                })
                .collect()
        };
        let family = get("basis")?.parse().map_err(CliError::Core)?;
        let degree = get("degree")?
            .parse::<usize>()
            .map_err(|_| CliError::data(path, "metadata \"degree\" is not an integer"))?;
        let n = get("n")?
            .parse::<usize>()
            .map_err(|_| CliError::data(path, "metadata \"n\" is not an integer"))?;
        let normalize = get("normalize")? == "true";
        let spec = BasisSpec::new(family, degree);

        let table = parse_table(path, text)?;
        let labels: Vec<String> = table.labels.clone();
        // parse_table treats the `index` column as a series; drop it.
        let (index_label, labels) = labels
            .split_first()
            .ok_or_else(|| CliError::data(path, "empty header"))?;
        if index_label != "index" {
            return Err(CliError::data(path, "first coefficient column must be \"index\""));
        }
        let indices: Vec<usize> = table.values.column(0).iter().map(|v| *v as usize).collect();
        if indices != spec.indices().collect::<Vec<_>>() {
            return Err(CliError::data(
                path,
                format!(
                    "expected {} coefficient rows with indices {:?}",
                    spec.len(),
                    spec.indices()
                ),
            ));
        }
        let coeffs = table.values.columns(1, labels.len()).into_owned();
        let offsets = list("offset")?;
        let scales = list("scale")?;
        if offsets.len() != labels.len() || scales.len() != labels.len() {
            return Err(CliError::data(
                path,
                "offset/scale metadata must have one entry per series",
            ));
        }
        let preprocess = offsets
            .into_iter()
            .zip(scales)
            .map(|(offset, scale)| Preprocess { offset, scale })
            .collect();
        Ok(Self {
            spec,
            n,
            normalize,
            t_range: (num("t_min")?, num("t_max")?),
            labels: labels.to_vec(),
            preprocess,
            coeffs,
        })
    }
}
