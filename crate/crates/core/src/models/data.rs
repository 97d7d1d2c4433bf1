//! Internal training layouts. Both are exact re-encodings of the dense
//! vectors: zeros are dropped from sums (adding 0.0 is exact) and binary
//! columns store the same 0/1 values as bytes.

use crate::features::FeatureVector;
use crate::sampling::LabeledDataset;

use super::ModelError;

fn check_width(ds: &LabeledDataset<FeatureVector>) -> Result<usize, ModelError> {
    let p = ds.records().first().map_or(0, FeatureVector::len);
    if let Some(bad) = ds.records().iter().find(|r| r.len() != p) {
        return Err(ModelError::RaggedRows {
            expected: p,
            got: bad.len(),
        });
    }
    Ok(p)
}

/// Compressed sparse rows.
#[derive(Debug, Clone)]
pub(crate) struct SparseRows {
    pub n_features: usize,
    offsets: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRows {
    pub fn from_dataset(ds: &LabeledDataset<FeatureVector>) -> Result<Self, ModelError> {
        let n_features = check_width(ds)?;
        let mut offsets = Vec::with_capacity(ds.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for row in ds.records() {
            for (j, &v) in row.values().iter().enumerate() {
                if v != 0.0 {
                    indices.push(j as u32);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Ok(Self {
            n_features,
            offsets,
            indices,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        self.indices[a..b]
            .iter()
            .zip(&self.values[a..b])
            .map(|(&j, &v)| (j as usize, v))
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Column {
    Binary(Vec<u8>),
    Continuous(Vec<f64>),
}

/// Column-major copy used by tree induction.
#[derive(Debug, Clone)]
pub(crate) struct ColumnMatrix {
    pub n_rows: usize,
    pub columns: Vec<Column>,
}

impl ColumnMatrix {
    pub fn from_dataset(ds: &LabeledDataset<FeatureVector>) -> Result<Self, ModelError> {
        let p = check_width(ds)?;
        let rows = ds.records();
        let columns = (0..p)
            .map(|j| {
                let binary = rows.iter().all(|r| r.0[j] == 0.0 || r.0[j] == 1.0);
                if binary {
                    Column::Binary(rows.iter().map(|r| u8::from(r.0[j] == 1.0)).collect())
                } else {
                    Column::Continuous(rows.iter().map(|r| r.0[j]).collect())
                }
            })
            .collect();
        Ok(Self {
            n_rows: ds.len(),
            columns,
        })
    }
}
