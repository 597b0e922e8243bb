//! CSV datasets. Header names columns `x0..`, optional `z0..`, `y0..`, and
//! an optional `split` column (`train`, `val` or `domain`; default
//! `train`). Provenance columns written by `augment` are accepted and
//! ignored on input.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use noisereg_core::augment::{AugmentedSample, NoiseMode};
use noisereg_core::data::{Dataset, Sample, Split};

use crate::error::{CliError, Result};
use crate::format::format_f64;

pub const PROVENANCE_COLUMNS: [&str; 3] = ["origin_index", "target", "noise_mode"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    X(usize),
    Z(usize),
    Y(usize),
    Split,
    Ignored,
}

fn classify(name: &str) -> Option<Column> {
    if name == "split" {
        return Some(Column::Split);
    }
    if PROVENANCE_COLUMNS.contains(&name) {
        return Some(Column::Ignored);
    }
    let (prefix, rest) = name.split_at(name.len().min(1));
    let idx: usize = rest.parse().ok()?;
    // reject spellings like "x01"
    if idx.to_string() != rest {
        return None;
    }
    match prefix {
        "x" => Some(Column::X(idx)),
        "z" => Some(Column::Z(idx)),
        "y" => Some(Column::Y(idx)),
        _ => None,
    }
}

fn data_err(row: usize, column: &str, message: impl Into<String>) -> CliError {
    CliError::Data {
        path: None,
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

struct Layout {
    names: Vec<String>,
    x: Vec<usize>,
    z: Vec<usize>,
    y: Vec<usize>,
    split: Option<usize>,
}

impl Layout {
    fn from_header(names: Vec<String>) -> Result<Self> {
        if names.iter().all(|n| n.is_empty()) {
            return Err(data_err(0, "", "empty file"));
        }
        let mut x = Vec::new();
        let mut z = Vec::new();
        let mut y = Vec::new();
        let mut split = None;
        for (pos, name) in names.iter().enumerate() {
            match classify(name) {
                Some(Column::X(i)) => x.push((i, pos)),
                Some(Column::Z(i)) => z.push((i, pos)),
                Some(Column::Y(i)) => y.push((i, pos)),
                Some(Column::Split) if split.is_none() => split = Some(pos),
                Some(Column::Split) => return Err(data_err(0, name, "duplicate column")),
                Some(Column::Ignored) => {}
                None => return Err(data_err(0, name, "unknown column")),
            }
        }
        let order = |mut cols: Vec<(usize, usize)>, prefix: &str, required: bool| -> Result<Vec<usize>> {
            cols.sort_unstable();
            if required && cols.is_empty() {
                return Err(data_err(0, &format!("{prefix}0"), "missing column"));
            }
            for (want, &(got, _)) in cols.iter().enumerate() {
                if got != want {
                    let column = format!("{prefix}{want}");
                    let message = if got < want { "duplicate column" } else { "missing column" };
                    return Err(data_err(0, &column, message));
                }
            }
            Ok(cols.into_iter().map(|(_, pos)| pos).collect())
        };
        Ok(Layout {
            x: order(x, "x", true)?,
            z: order(z, "z", false)?,
            y: order(y, "y", true)?,
            split,
            names,
        })
    }

    fn cell_value(&self, record: &csv::StringRecord, row: usize, pos: usize) -> Result<f64> {
        let text = &record[pos];
        let name = &self.names[pos];
        let v: f64 = text
            .parse()
            .map_err(|_| data_err(row, name, format!("'{text}' is not a number")))?;
        if !v.is_finite() {
            return Err(data_err(row, name, format!("'{text}' is not finite")));
        }
        Ok(v)
    }
}

/// Reads a dataset from CSV text.
pub fn read_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| data_err(0, "", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let layout = Layout::from_header(header)?;

    let mut data = Dataset::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| data_err(row, "", e.to_string()))?;
        if record.len() != layout.names.len() {
            let column = layout.names.get(record.len()).map_or("<extra>", String::as_str);
            return Err(data_err(
                row,
                column,
                format!("expected {} fields, found {}", layout.names.len(), record.len()),
            ));
        }
        let pick = |cols: &[usize]| -> Result<Vec<f64>> {
            cols.iter().map(|&pos| layout.cell_value(&record, row, pos)).collect()
        };
        let x = pick(&layout.x)?;
        let y = pick(&layout.y)?;
        let sample = if layout.z.is_empty() {
            Sample::new(x, y)
        } else {
            Sample::with_features(x, pick(&layout.z)?, y)
        };
        let split = match layout.split.map(|pos| &record[pos]) {
            None | Some("train") => Split::Train,
            Some("val") => Split::Val,
            Some("domain") => Split::Domain,
            Some(other) => {
                return Err(data_err(row, "split", format!("'{other}' is not train, val or domain")));
            }
        };
        data.push(split, sample)?;
    }
    if data.is_empty() {
        return Err(data_err(1, "", "no data rows"));
    }
    Ok(data)
}

/// Loads a dataset file; data errors carry the path.
pub fn load_dataset_csv(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(file).map_err(|e| match e {
        CliError::Data {
            row, column, message, ..
        } => CliError::Data {
            path: Some(path.to_path_buf()),
            row,
            column,
            message,
        },
        other => other,
    })
}

fn header(x: usize, z: usize, y: usize) -> Vec<String> {
    let cols = |p: &str, n: usize| (0..n).map(move |i| format!("{p}{i}")).collect::<Vec<_>>();
    let mut h = cols("x", x);
    h.extend(cols("z", z));
    h.extend(cols("y", y));
    h.push("split".to_string());
    h
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

fn nums(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|&x| format_f64(x))
}

/// CSV text for `data` with 17-digit values.
pub fn dataset_to_csv(data: &Dataset) -> String {
    let (x, z, y) = (
        data.x_dim().unwrap_or(0),
        data.z_dim().unwrap_or(0),
        data.y_dim().unwrap_or(0),
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(x, z, y)).expect("in-memory write");
    for (split, s) in data.rows() {
        let mut rec: Vec<String> = nums(&s.x).collect();
        if let Some(zv) = &s.z {
            rec.extend(nums(zv));
        }
        rec.extend(nums(&s.y));
        rec.push(split.name().to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}

fn mode_name(mode: NoiseMode) -> &'static str {
    match mode {
        NoiseMode::Additive => "additive",
        NoiseMode::Multiplicative => "multiplicative",
    }
}

/// CSV text for augmented rows in the layout of `source`, with the
/// provenance columns appended. `origin_rows[i]` maps the batch's origin
/// index to a row of `source`; the latent block, when present, is the
/// origin's.
pub fn augmented_to_csv(source: &Dataset, origin_rows: &[usize], batch: &[AugmentedSample]) -> String {
    let (x, z, y) = (
        source.x_dim().unwrap_or(0),
        source.z_dim().unwrap_or(0),
        source.y_dim().unwrap_or(0),
    );
    let mut head = header(x, z, y);
    head.extend(PROVENANCE_COLUMNS.iter().map(|s| s.to_string()));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&head).expect("in-memory write");
    for a in batch {
        let origin = origin_rows[a.origin_index];
        let (_, src) = &source.rows()[origin];
        let mut rec: Vec<String> = nums(&a.x_hat).collect();
        if let Some(zv) = &src.z {
            rec.extend(nums(zv));
        }
        rec.extend(nums(&a.y));
        rec.push(Split::Train.name().to_string());
        rec.push(origin.to_string());
        rec.push(a.target.name().to_string());
        rec.push(mode_name(a.mode).to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    finish(w)
}
