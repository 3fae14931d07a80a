use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::calibrate::GridPoint;
use super::params::Gr4jParams;
use super::HydroRecord;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    date: NaiveDate,
    p_mm: f64,
    pet_mm: f64,
    temp_c: f64,
    q_mm: Option<f64>,
}

/// Reads a `date,p_mm,pet_mm,temp_c,q_mm` file. Dates must be consecutive;
/// `q_mm` may be empty.
pub fn read_records(path: &Path) -> Result<Vec<HydroRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["date", "p_mm", "pet_mm", "temp_c", "q_mm"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Data(format!(
            "{}: expected header {}, found {}",
            path.display(),
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out: Vec<HydroRecord> = Vec::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row?;
        let line = i + 2;
        if !(row.p_mm >= 0.0 && row.pet_mm >= 0.0 && row.temp_c.is_finite()) {
            return Err(Error::Data(format!("{}:{line}: invalid forcing", path.display())));
        }
        if let Some(q) = row.q_mm {
            if !(q >= 0.0) {
                return Err(Error::Data(format!("{}:{line}: negative or NaN flow", path.display())));
            }
        }
        if let Some(prev) = out.last() {
            if row.date != prev.date + Duration::days(1) {
                return Err(Error::Data(format!("{}:{line}: date {} does not follow {}", path.display(), row.date, prev.date)));
            }
        }
        out.push(HydroRecord {
            day_index: i,
            date: row.date,
            precip: row.p_mm,
            pet: row.pet_mm,
            temp: row.temp_c,
            flow: row.q_mm,
        });
    }
    if out.is_empty() {
        return Err(Error::Data(format!("{}: no rows", path.display())));
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[HydroRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(Row {
            date: r.date,
            p_mm: r.precip,
            pet_mm: r.pet,
            temp_c: r.temp,
            q_mm: r.flow,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportRow {
    rank: usize,
    x1: f64,
    x2: f64,
    x3: f64,
    x4: f64,
    tt: f64,
    cfmax: f64,
    cfr: f64,
    cwh: f64,
    rmse: f64,
}

/// Writes grid points ranked by RMSE, best first. Ties keep grid order.
pub fn write_calibration_report(path: &Path, points: &[GridPoint]) -> Result<()> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].rmse.total_cmp(&points[b].rmse).then(a.cmp(&b)));
    let mut w = csv::Writer::from_path(path)?;
    for (rank, &i) in order.iter().enumerate() {
        let p = &points[i].params;
        w.serialize(ReportRow {
            rank: rank + 1,
            x1: p.x1,
            x2: p.x2,
            x3: p.x3,
            x4: p.x4,
            tt: p.tt,
            cfmax: p.cfmax,
            cfr: p.cfr,
            cwh: p.cwh,
            rmse: points[i].rmse,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a calibration report back in rank order.
pub fn read_calibration_report(path: &Path) -> Result<Vec<GridPoint>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize::<ReportRow>() {
        let r = row?;
        out.push(GridPoint {
            params: Gr4jParams {
                x1: r.x1,
                x2: r.x2,
                x3: r.x3,
                x4: r.x4,
                tt: r.tt,
                cfmax: r.cfmax,
                cfr: r.cfr,
                cwh: r.cwh,
            },
            rmse: r.rmse,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydro::SyntheticCatchment;

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("site.csv");
        let mut recs = SyntheticCatchment::new(40, 3).generate().unwrap();
        recs[39].flow = None;
        write_records(&path, &recs).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("date,p_mm,pet_mm,temp_c,q_mm\n"));
        assert!(text.trim_end().ends_with(','));
    }

    #[test]
    fn gap_in_dates_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "date,p_mm,pet_mm,temp_c,q_mm\n2000-01-01,1,1,1,1\n2000-01-03,1,1,1,1\n").unwrap();
        assert!(matches!(read_records(&path), Err(Error::Data(_))));
        std::fs::write(&path, "day,p,pet,t,q\n").unwrap();
        assert!(matches!(read_records(&path), Err(Error::Data(_))));
    }
}
