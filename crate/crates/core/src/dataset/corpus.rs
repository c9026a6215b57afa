use std::io::Read;
use std::path::Path;

use super::DatasetError;

pub const DEFAULT_SMILES_COLUMN: &str = "smiles";
pub const DEFAULT_LABEL_COLUMN: &str = "HIV_active";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMolecule {
    pub smiles: String,
    /// 1 = active.
    pub label: u8,
}

/// A data row that could not be read, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadedCorpus {
    pub molecules: Vec<LabeledMolecule>,
    pub rejects: Vec<Reject>,
}

pub fn load_csv(path: &Path) -> Result<LoadedCorpus, DatasetError> {
    load_csv_with(path, DEFAULT_SMILES_COLUMN, DEFAULT_LABEL_COLUMN)
}

pub fn load_csv_with(path: &Path, smiles_column: &str, label_column: &str) -> Result<LoadedCorpus, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_csv(file, smiles_column, label_column)
}

pub fn read_csv<R: Read>(reader: R, smiles_column: &str, label_column: &str) -> Result<LoadedCorpus, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| DatasetError::Csv(e.to_string()))?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(DatasetError::EmptyFile);
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let si = column(smiles_column)?;
    let li = column(label_column)?;
    let mut out = LoadedCorpus::default();
    let mut rows = 0usize;
    for record in rdr.records() {
        rows += 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                out.rejects.push(Reject {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let (Some(smiles), Some(label)) = (record.get(si), record.get(li)) else {
            out.rejects.push(Reject {
                line,
                reason: "missing field".into(),
            });
            continue;
        };
        let smiles = smiles.trim();
        if smiles.is_empty() {
            out.rejects.push(Reject {
                line,
                reason: "empty SMILES".into(),
            });
            continue;
        }
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                out.rejects.push(Reject {
                    line,
                    reason: format!("label '{other}' is not 0 or 1"),
                });
                continue;
            }
        };
        out.molecules.push(LabeledMolecule {
            smiles: smiles.to_string(),
            label,
        });
    }
    if rows == 0 {
        return Err(DatasetError::EmptyFile);
    }
    Ok(out)
}
