//! CSV ingestion/export of externally computed concepts (engine-evaluation
//! tables). Schema: UTF-8, header `fen,<name1>,<name2>,...`, one row per
//! position, decimal-point reals. Same schema for import and export.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::ConceptVector;

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("missing fen column in header")]
    MissingFenColumn,
    #[error("non-numeric cell for concept {concept} at row {row}: {cell:?}")]
    NonNumericCell {
        row: usize,
        concept: String,
        cell: String,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Loads a concept table. Duplicate FEN rows resolve last-wins and produce a
/// warning string.
pub fn load_external_concepts<R: Read>(
    reader: R,
) -> Result<(BTreeMap<String, ConceptVector>, Vec<String>), ExternalError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("fen") {
        return Err(ExternalError::MissingFenColumn);
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut out: BTreeMap<String, ConceptVector> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, after the header
        let fen = record.get(0).unwrap_or("").to_string();
        let mut values = BTreeMap::new();
        for (name, cell) in names.iter().zip(record.iter().skip(1)) {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| ExternalError::NonNumericCell {
                    row,
                    concept: name.clone(),
                    cell: cell.to_string(),
                })?;
            values.insert(name.clone(), v);
        }
        if out
            .insert(
                fen.clone(),
                ConceptVector {
                    fen: fen.clone(),
                    values,
                },
            )
            .is_some()
        {
            warnings.push(format!("duplicate fen row {row}: {fen} (last wins)"));
        }
    }
    Ok((out, warnings))
}

/// Writes concept vectors in the same schema. Values missing from a vector
/// render as NaN so the gap is visible downstream.
pub fn export_concepts<W: Write>(
    writer: W,
    vectors: &BTreeMap<String, ConceptVector>,
    names: &[String],
) -> Result<(), ExternalError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["fen".to_string()];
    header.extend(names.iter().cloned());
    wtr.write_record(&header)?;
    for (fen, vec) in vectors {
        let mut row = vec![fen.clone()];
        for name in names {
            let v = vec.values.get(name).copied().unwrap_or(f64::NAN);
            row.push(format!("{v}"));
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
