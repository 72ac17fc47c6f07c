//! Corpus CSV reading and writing. Header `label,text`, standard quoting,
//! labels case-insensitive.

use std::path::Path;

use crate::corpus::{Label, RawEmail};
use crate::error::{Error, Result};

pub fn load_csv_corpus(path: &Path) -> Result<Vec<RawEmail>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(csv_error)?;
    {
        let headers = reader.headers().map_err(csv_error)?;
        if headers.len() != 2 || &headers[0] != "label" || &headers[1] != "text" {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header 'label,text', got {headers:?}"),
            });
        }
    }
    let mut emails = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let label = Label::parse(&record[0])?;
        emails.push(RawEmail {
            id: format!("row-{idx}"),
            label,
            text: record[1].to_string(),
        });
    }
    Ok(emails)
}

pub fn write_csv_corpus(path: &Path, corpus: &[RawEmail]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_error)?;
    writer.write_record(["label", "text"]).map_err(csv_error)?;
    for email in corpus {
        writer
            .write_record([email.label.as_str(), &email.text])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    let line = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    match e.kind() {
        csv::ErrorKind::Io(_) if line == 0 => Error::Validation(format!("cannot read csv: {e}")),
        _ => Error::Parse {
            line,
            msg: e.to_string(),
        },
    }
}
