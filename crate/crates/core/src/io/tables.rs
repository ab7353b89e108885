use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{DataError, Error, Result};
use crate::survival::{Cohort, Subject};

pub const ID_COLUMN: &str = "subject_id";

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub header: Vec<String>,
    /// (subject id, feature values) in file order.
    pub rows: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRow {
    pub id: String,
    pub time: f64,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTable {
    pub rows: Vec<SurvivalRow>,
}

/// Result of joining a feature table with a survival table.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCohort {
    /// Subjects present in both files, sorted by id.
    pub cohort: Cohort,
    pub only_in_features: Vec<String>,
    pub only_in_survival: Vec<String>,
}

struct Csv {
    file: String,
    header: Vec<String>,
    /// (1-based line number, fields)
    records: Vec<(usize, Vec<String>)>,
}

impl Csv {
    fn parse(reader: impl Read, file: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let malformed = |e: csv::Error| DataError::Malformed {
            file: file.to_string(),
            message: e.to_string(),
        };
        let header: Vec<String> = rdr.headers().map_err(malformed)?.iter().map(str::to_string).collect();
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(malformed)?;
            let line = rec.position().map_or(records.len() + 2, |p| p.line() as usize);
            if rec.len() != header.len() {
                return Err(DataError::Ragged {
                    file: file.to_string(),
                    row: line,
                    expected: header.len(),
                    found: rec.len(),
                }
                .into());
            }
            records.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Self {
            file: file.to_string(),
            header,
            records,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            DataError::MissingColumn {
                file: self.file.clone(),
                column: name.to_string(),
            }
            .into()
        })
    }

    fn cell<'a>(&self, row: usize, fields: &'a [String], col: usize) -> Result<&'a str> {
        let v = fields[col].as_str();
        if v.is_empty() {
            return Err(DataError::MissingValue {
                file: self.file.clone(),
                row,
                column: self.header[col].clone(),
            }
            .into());
        }
        Ok(v)
    }

    fn number(&self, row: usize, fields: &[String], col: usize) -> Result<f64> {
        let v = self.cell(row, fields, col)?;
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(DataError::NonNumeric {
                file: self.file.clone(),
                row,
                column: self.header[col].clone(),
                value: v.to_string(),
            }
            .into()),
        }
    }

    fn unique_id(&self, seen: &mut HashMap<String, usize>, row: usize, id: &str) -> Result<()> {
        if seen.insert(id.to_string(), row).is_some() {
            return Err(DataError::DuplicateId {
                file: self.file.clone(),
                row,
                id: id.to_string(),
            }
            .into());
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

pub fn parse_feature_table(reader: impl Read, file: &str) -> Result<FeatureTable> {
    let csv = Csv::parse(reader, file)?;
    let id_col = csv.column(ID_COLUMN)?;
    let feature_cols: Vec<usize> = (0..csv.header.len()).filter(|&c| c != id_col).collect();
    let mut seen = HashMap::new();
    let mut rows = Vec::with_capacity(csv.records.len());
    for (line, fields) in &csv.records {
        let id = csv.cell(*line, fields, id_col)?;
        csv.unique_id(&mut seen, *line, id)?;
        let values = feature_cols
            .iter()
            .map(|&c| csv.number(*line, fields, c))
            .collect::<Result<Vec<_>>>()?;
        rows.push((id.to_string(), values));
    }
    Ok(FeatureTable {
        header: feature_cols.iter().map(|&c| csv.header[c].clone()).collect(),
        rows,
    })
}

pub fn parse_survival_table(reader: impl Read, file: &str) -> Result<SurvivalTable> {
    let csv = Csv::parse(reader, file)?;
    let id_col = csv.column(ID_COLUMN)?;
    let time_col = csv.column("time")?;
    let event_col = csv.column("event")?;
    let mut seen = HashMap::new();
    let mut rows = Vec::with_capacity(csv.records.len());
    for (line, fields) in &csv.records {
        let row = *line;
        let id = csv.cell(row, fields, id_col)?;
        csv.unique_id(&mut seen, row, id)?;
        let raw_time = csv.cell(row, fields, time_col)?;
        let time = csv.number(row, fields, time_col)?;
        if time < 0.0 {
            return Err(DataError::InvalidTime {
                file: csv.file.clone(),
                row,
                value: raw_time.to_string(),
            }
            .into());
        }
        let event = match csv.cell(row, fields, event_col)? {
            "0" => false,
            "1" => true,
            other => {
                return Err(DataError::InvalidEvent {
                    file: csv.file.clone(),
                    row,
                    value: other.to_string(),
                }
                .into())
            }
        };
        rows.push(SurvivalRow {
            id: id.to_string(),
            time,
            event,
        });
    }
    Ok(SurvivalTable { rows })
}

pub fn read_feature_table(path: &Path) -> Result<FeatureTable> {
    parse_feature_table(open(path)?, &label(path))
}

pub fn read_survival_table(path: &Path) -> Result<SurvivalTable> {
    parse_survival_table(open(path)?, &label(path))
}

/// Inner join on subject id, rows sorted by id.
pub fn join_tables(features: FeatureTable, survival: SurvivalTable) -> Result<LoadedCohort> {
    let mut by_id: BTreeMap<String, Vec<f64>> = features.rows.into_iter().collect();
    let mut subjects = Vec::new();
    let mut only_in_survival = Vec::new();
    let mut survival_rows = survival.rows;
    survival_rows.sort_by(|a, b| a.id.cmp(&b.id));
    for row in survival_rows {
        match by_id.remove(&row.id) {
            Some(x) => subjects.push(Subject::new(row.id, row.time, row.event, x)),
            None => only_in_survival.push(row.id),
        }
    }
    let only_in_features: Vec<String> = by_id.into_keys().collect();
    if subjects.is_empty() {
        return Err(DataError::EmptyJoin.into());
    }
    Ok(LoadedCohort {
        cohort: Cohort::new(subjects, features.header)?,
        only_in_features,
        only_in_survival,
    })
}

pub fn load_cohort(features_path: &Path, survival_path: &Path) -> Result<LoadedCohort> {
    join_tables(read_feature_table(features_path)?, read_survival_table(survival_path)?)
}

/// `subject_id -> value` of one numeric column.
pub fn parse_scores(reader: impl Read, file: &str, column: &str) -> Result<BTreeMap<String, f64>> {
    let csv = Csv::parse(reader, file)?;
    let id_col = csv.column(ID_COLUMN)?;
    let col = csv.column(column)?;
    let mut seen = HashMap::new();
    let mut out = BTreeMap::new();
    for (line, fields) in &csv.records {
        let id = csv.cell(*line, fields, id_col)?;
        csv.unique_id(&mut seen, *line, id)?;
        out.insert(id.to_string(), csv.number(*line, fields, col)?);
    }
    Ok(out)
}

pub fn read_scores(path: &Path, column: &str) -> Result<BTreeMap<String, f64>> {
    parse_scores(open(path)?, &label(path), column)
}

/// Writes a cohort as a feature table and a survival table.
pub fn write_cohort(cohort: &Cohort, features_path: &Path, survival_path: &Path) -> Result<()> {
    let mut features = String::from(ID_COLUMN);
    for name in cohort.feature_names() {
        features.push(',');
        features.push_str(name);
    }
    features.push('\n');
    let mut survival = format!("{ID_COLUMN},time,event\n");
    for s in cohort.subjects() {
        features.push_str(&s.id);
        for v in &s.features {
            let _ = write!(features, ",{v:?}");
        }
        features.push('\n');
        let _ = writeln!(survival, "{},{:?},{}", s.id, s.time, u8::from(s.event));
    }
    super::write_file(features_path, &features)?;
    super::write_file(survival_path, &survival)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features(text: &str) -> Result<FeatureTable> {
        parse_feature_table(text.as_bytes(), "features.csv")
    }

    fn survival(text: &str) -> Result<SurvivalTable> {
        parse_survival_table(text.as_bytes(), "survival.csv")
    }

    #[test]
    fn join_aligns_by_id() {
        let f = features("subject_id,a,b\nc,3,30\na,1,10\nb,2,20\n").unwrap();
        let s = survival("subject_id,time,event\nb,5,1\na,4,0\nc,6,1\n").unwrap();
        let loaded = join_tables(f, s).unwrap();
        let c = &loaded.cohort;
        assert_eq!(c.subjects().iter().map(|s| s.id.as_str()).collect::<Vec<_>>(), vec!["a", "b", "c"]);
        assert_eq!(c.feature_column(1), vec![10.0, 20.0, 30.0]);
        assert_eq!(c.times(), vec![4.0, 5.0, 6.0]);
        assert!(loaded.only_in_features.is_empty() && loaded.only_in_survival.is_empty());
    }

    #[test]
    fn unmatched_rows_are_reported() {
        let f = features("subject_id,a\nx,1\ny,2\n").unwrap();
        let s = survival("subject_id,time,event\ny,5,1\nz,4,0\n").unwrap();
        let loaded = join_tables(f, s).unwrap();
        assert_eq!(loaded.cohort.len(), 1);
        assert_eq!(loaded.only_in_features, vec!["x"]);
        assert_eq!(loaded.only_in_survival, vec!["z"]);
    }

    #[test]
    fn disjoint_ids() {
        let f = features("subject_id,a\nx,1\n").unwrap();
        let s = survival("subject_id,time,event\ny,5,1\n").unwrap();
        assert!(matches!(join_tables(f, s), Err(Error::Data(DataError::EmptyJoin))));
    }

    #[test]
    fn bad_event_names_row() {
        match survival("subject_id,time,event\na,1,1\nb,2,2\n") {
            Err(Error::Data(DataError::InvalidEvent { row, value, .. })) => assert_eq!((row, value.as_str()), (3, "2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn provenance_of_cell_errors() {
        match features("subject_id,a,b\nx,1,2\ny,1,oops\n") {
            Err(Error::Data(DataError::NonNumeric { row, column, value, .. })) => {
                assert_eq!((row, column.as_str(), value.as_str()), (3, "b", "oops"))
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            features("subject_id,a\nx,1\nx,2\n"),
            Err(Error::Data(DataError::DuplicateId { row: 3, .. }))
        ));
        assert!(matches!(
            features("subject_id,a\nx,\n"),
            Err(Error::Data(DataError::MissingValue { row: 2, .. }))
        ));
        assert!(matches!(
            features("id,a\nx,1\n"),
            Err(Error::Data(DataError::MissingColumn { .. }))
        ));
        assert!(matches!(
            survival("subject_id,time\nx,1\n"),
            Err(Error::Data(DataError::MissingColumn { .. }))
        ));
        assert!(matches!(
            survival("subject_id,time,event\nx,-1,1\n"),
            Err(Error::Data(DataError::InvalidTime { row: 2, .. }))
        ));
        assert!(matches!(
            features("subject_id,a\nx,1,2\n"),
            Err(Error::Data(DataError::Ragged { row: 2, .. }))
        ));
    }
}
