use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::debug;

use crate::error::{Error, Result};
use crate::model::{Dataset, Sample};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Tab,
    Comma,
    /// Runs of spaces, as in the pre-2018 archive text files.
    Whitespace,
}

impl Delimiter {
    /// Tab wins over comma, comma over plain whitespace.
    pub fn detect(line: &str) -> Self {
        if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(&self, line: &'a str) -> Box<dyn Iterator<Item = &'a str> + 'a> {
        match self {
            Delimiter::Tab => Box::new(line.split('\t').map(str::trim)),
            Delimiter::Comma => Box::new(line.split(',').map(str::trim)),
            Delimiter::Whitespace => Box::new(line.split_whitespace()),
        }
    }
}

/// Reads a UCR-style text file: one record per line, class label first,
/// then the feature values; no header.
pub fn read_ucr<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ucr(BufReader::new(file), path)
}

/// Parses UCR text from any reader; `origin` is only used in error messages.
pub fn parse_ucr<T: Scalar, R: BufRead>(reader: R, origin: &Path) -> Result<Dataset<T>> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };

    let mut delimiter = None;
    let mut n = None;
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| {
            let d = Delimiter::detect(trimmed);
            debug!("{}: detected {:?} delimiter", origin.display(), d);
            d
        });
        let mut values = Vec::new();
        for (field, tok) in delim.split(trimmed).enumerate() {
            let v: T = tok.parse().map_err(|_| {
                parse_err(
                    lineno,
                    format!("field {}: '{}' is not a number", field + 1, tok),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    lineno,
                    format!("field {}: non-finite value '{}'", field + 1, tok),
                ));
            }
            values.push(v);
        }
        if values.len() < 2 {
            return Err(parse_err(
                lineno,
                "record needs a label and at least one feature".into(),
            ));
        }
        let label = values.remove(0);
        match n {
            None => n = Some(values.len()),
            Some(expected) if expected != values.len() => {
                return Err(parse_err(
                    lineno,
                    format!(
                        "ragged record: {} features, previous records have {}",
                        values.len(),
                        expected
                    ),
                ));
            }
            _ => {}
        }
        samples.push(Sample::new(values, label).map_err(|e| parse_err(lineno, e.to_string()))?);
    }
    let n = n.ok_or_else(|| parse_err(0, "file contains no records".into()))?;
    Dataset::new(n, samples)
}

/// Writes tab-separated UCR text. Values use the shortest representation
/// that parses back to the same float. The file is replaced atomically.
pub fn write_ucr<T: Scalar>(path: impl AsRef<Path>, z: &Dataset<T>) -> Result<()> {
    let mut buf = Vec::new();
    for s in z.samples() {
        write!(buf, "{}", s.target()).expect("write to Vec");
        for v in s.features() {
            write!(buf, "\t{v}").expect("write to Vec");
        }
        buf.push(b'\n');
    }
    super::write_atomic(path.as_ref(), &buf)
}
