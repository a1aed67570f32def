//! Feature tables and their CSV cache format: key columns, one column per
//! named feature, and the label last.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::learners::Matrix;

/// Header of the label column.
pub const LABEL_COLUMN: &str = "Classification";

/// Identifies a row of a feature table.
pub trait RowKey: Sized + Clone {
    const COLUMNS: &'static [&'static str];
    fn fields(&self) -> Vec<&str>;
    fn parse(fields: &[&str]) -> Self;
}

impl RowKey for String {
    const COLUMNS: &'static [&'static str] = &["article_id"];

    fn fields(&self) -> Vec<&str> {
        vec![self.as_str()]
    }

    fn parse(fields: &[&str]) -> Self {
        fields[0].to_string()
    }
}

impl RowKey for (String, String) {
    const COLUMNS: &'static [&'static str] = &["article_1", "article_2"];

    fn fields(&self) -> Vec<&str> {
        vec![self.0.as_str(), self.1.as_str()]
    }

    fn parse(fields: &[&str]) -> Self {
        (fields[0].to_string(), fields[1].to_string())
    }
}

/// Rows of named features with optional binary labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<K> {
    pub feature_names: Vec<String>,
    pub keys: Vec<K>,
    pub features: Matrix,
    pub labels: Option<Vec<u8>>,
}

/// One row per candidate article.
pub type CandidateDataset = Dataset<String>;
/// One row per article pair.
pub type PairDataset = Dataset<(String, String)>;

impl<K: RowKey> Dataset<K> {
    pub fn new(feature_names: Vec<String>, keys: Vec<K>, features: Matrix, labels: Option<Vec<u8>>) -> Result<Self> {
        if features.cols() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                actual: features.cols(),
            });
        }
        if features.rows() != keys.len() {
            return Err(Error::DimensionMismatch {
                expected: keys.len(),
                actual: features.rows(),
            });
        }
        if let Some(l) = &labels {
            if l.len() != keys.len() {
                return Err(Error::DimensionMismatch {
                    expected: keys.len(),
                    actual: l.len(),
                });
            }
        }
        Ok(Dataset {
            feature_names,
            keys,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn label(&self, i: usize) -> Option<u8> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// Labels, or an error naming `what` when the table is unlabeled.
    pub fn require_labels(&self) -> Result<&[u8]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::invalid("dataset has no labels"))
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Sub-table with the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Dataset {
            feature_names: self.feature_names.clone(),
            keys: indices.iter().map(|&i| self.keys[i].clone()).collect(),
            features: self.features.select_rows(indices),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = K::COLUMNS.to_vec();
        header.extend(self.feature_names.iter().map(String::as_str));
        if self.labels.is_some() {
            header.push(LABEL_COLUMN);
        }
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut record: Vec<String> = self.keys[i].fields().into_iter().map(str::to_string).collect();
            record.extend(self.row(i).iter().map(|v| v.to_string()));
            if let Some(l) = self.label(i) {
                record.push(l.to_string());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let keys_n = K::COLUMNS.len();
        if header.len() < keys_n || header[..keys_n].iter().zip(K::COLUMNS).any(|(h, c)| h != c) {
            return Err(Error::Schema(format!("expected key columns {:?}", K::COLUMNS)));
        }
        let labeled = header.last().is_some_and(|h| h == LABEL_COLUMN);
        let end = header.len() - usize::from(labeled);
        let feature_names = header[keys_n..end].to_vec();
        let mut keys = Vec::new();
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let fields: Vec<&str> = record.iter().collect();
            let parse_err = |message: String| Error::Parse { line: line + 2, message };
            keys.push(K::parse(&fields[..keys_n]));
            for f in &fields[keys_n..end] {
                data.push(f.parse::<f64>().map_err(|e| parse_err(format!("`{f}`: {e}")))?);
            }
            if labeled {
                let l = fields[end];
                labels.push(match l {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(parse_err(format!("label `{other}` is not 0 or 1"))),
                });
            }
        }
        let features = Matrix::new(keys.len(), feature_names.len(), data)?;
        Dataset::new(feature_names, keys, features, labeled.then_some(labels))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}
