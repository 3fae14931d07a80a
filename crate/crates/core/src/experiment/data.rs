use std::path::Path;

use chrono::NaiveDate;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::{Error, Result};

/// 17 significant digits: enough to parse back the identical double.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse(field: &str, path: &Path, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Data(format!("{}:{line}: bad number {field:?}", path.display())))
}

fn check_header(reader: &mut csv::Reader<std::fs::File>, path: &Path, expected: &[&str]) -> Result<()> {
    let headers = reader.headers()?;
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Data(format!(
            "{}: expected header {}, found {}",
            path.display(),
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// Equal-length sequences keyed by id; row `i` of each sequence is step
/// `first_step + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFile {
    pub ids: Vec<usize>,
    pub first_step: usize,
    pub seqs: Vec<Array2<f64>>,
}

impl SequenceFile {
    pub fn new(ids: Vec<usize>, first_step: usize, seqs: Vec<Array2<f64>>) -> Self {
        SequenceFile { ids, first_step, seqs }
    }

    /// Rows of every sequence covering steps `first..first + len`.
    pub fn steps(&self, first: usize, len: usize) -> Result<Vec<Array2<f64>>> {
        let n = self.seqs.first().map_or(0, |s| s.nrows());
        if first < self.first_step || first + len > self.first_step + n {
            return Err(Error::Data(format!(
                "steps {first}..{} not inside stored steps {}..{}",
                first + len,
                self.first_step,
                self.first_step + n
            )));
        }
        let a = first - self.first_step;
        Ok(self.seqs.iter().map(|s| s.slice(ndarray::s![a..a + len, ..]).to_owned()).collect())
    }
}

/// Writes sequences as `<id>,t,<c1>,<c2>...` rows.
fn write_sequences(path: &Path, header: &[&str], file: &SequenceFile, id_first: bool) -> Result<()> {
    if file.ids.len() != file.seqs.len() {
        return Err(Error::Shape(format!("{} ids for {} sequences", file.ids.len(), file.seqs.len())));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for (id, s) in file.ids.iter().zip(&file.seqs) {
        for (i, row) in s.rows().into_iter().enumerate() {
            let t = file.first_step + i;
            let mut rec = if id_first {
                vec![id.to_string(), t.to_string()]
            } else {
                vec![t.to_string(), id.to_string()]
            };
            rec.extend(row.iter().map(|v| num(*v)));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_sequences(path: &Path, header: &[&str], id_first: bool) -> Result<SequenceFile> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, path, header)?;
    let dims = header.len() - 2;
    let mut ids: Vec<usize> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut seqs = Vec::new();
    let mut first_step = None;
    let flush = |rows: &mut Vec<Vec<f64>>, seqs: &mut Vec<Array2<f64>>| {
        if !rows.is_empty() {
            let n = rows.len();
            let flat: Vec<f64> = rows.drain(..).flatten().collect();
            seqs.push(Array2::from_shape_vec((n, dims), flat).expect("rows have equal width"));
        }
    };
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let (id_field, t_field) = if id_first { (&rec[0], &rec[1]) } else { (&rec[1], &rec[0]) };
        let id: usize = id_field
            .parse()
            .map_err(|_| Error::Data(format!("{}:{line}: bad id {id_field:?}", path.display())))?;
        let t: usize = t_field
            .parse()
            .map_err(|_| Error::Data(format!("{}:{line}: bad step {t_field:?}", path.display())))?;
        if ids.last() != Some(&id) {
            flush(&mut rows, &mut seqs);
            ids.push(id);
        }
        let first = *first_step.get_or_insert(t);
        if t != first + rows.len() {
            return Err(Error::Data(format!("{}:{line}: step {t} out of order", path.display())));
        }
        let values = (2..2 + dims).map(|c| parse(&rec[c], path, line)).collect::<Result<Vec<_>>>()?;
        rows.push(values);
    }
    flush(&mut rows, &mut seqs);
    if let Some(len) = seqs.first().map(|s| s.nrows()) {
        if seqs.iter().any(|s| s.nrows() != len) {
            return Err(Error::Data(format!("{}: sequences differ in length", path.display())));
        }
    } else {
        return Err(Error::Data(format!("{}: no rows", path.display())));
    }
    Ok(SequenceFile {
        ids,
        first_step: first_step.unwrap_or(0),
        seqs,
    })
}

const ORBIT_HEADER: [&str; 5] = ["orbit_id", "t", "y1", "y2", "y3"];
const TRAJECTORY_HEADER: [&str; 4] = ["t", "agent_id", "x", "y"];

/// Bundled orbit file: `orbit_id,t,y1,y2,y3`.
pub fn write_orbits(path: &Path, orbits: &SequenceFile) -> Result<()> {
    write_sequences(path, &ORBIT_HEADER, orbits, true)
}

pub fn read_orbits(path: &Path) -> Result<SequenceFile> {
    read_sequences(path, &ORBIT_HEADER, true)
}

/// Trajectory file: `t,agent_id,x,y`, grouped by agent.
pub fn write_trajectories(path: &Path, trajs: &SequenceFile) -> Result<()> {
    write_sequences(path, &TRAJECTORY_HEADER, trajs, false)
}

pub fn read_trajectories(path: &Path) -> Result<SequenceFile> {
    read_sequences(path, &TRAJECTORY_HEADER, false)
}

/// One day of a modelled flow series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub date: NaiveDate,
    /// `train` or `forecast`.
    pub span: String,
    pub observed: Option<f64>,
    pub modeled: f64,
    /// `|observed − modeled|`, empty when flow was not observed.
    pub residual: Option<f64>,
}

pub fn write_flow_series(path: &Path, rows: &[FlowRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "span", "observed", "modeled", "residual"])?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in rows {
        w.write_record([r.date.to_string(), r.span.clone(), opt(r.observed), num(r.modeled), opt(r.residual)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_flow_series(path: &Path) -> Result<Vec<FlowRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    check_header(&mut reader, path, &["date", "span", "observed", "modeled", "residual"])?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let date = rec[0]
            .parse()
            .map_err(|_| Error::Data(format!("{}:{line}: bad date {:?}", path.display(), &rec[0])))?;
        let opt = |f: &str| -> Result<Option<f64>> {
            if f.is_empty() {
                Ok(None)
            } else {
                parse(f, path, line).map(Some)
            }
        };
        out.push(FlowRow {
            date,
            span: rec[1].to_string(),
            observed: opt(&rec[2])?,
            modeled: parse(&rec[3], path, line)?,
            residual: opt(&rec[4])?,
        });
    }
    Ok(out)
}

/// Written next to generated data: what was generated and from which settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read manifest {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}
