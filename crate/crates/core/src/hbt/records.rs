//! Newline-delimited click-record files.
//!
//! One line per pulse slot: `<pulse_index> <c0><c1><c2><c3>\n` with each
//! `ci` either `0` or `1`, e.g. `12 0110`. Indices are decimal without leading
//! zeros and strictly increasing. Only this canonical form is accepted, so a
//! file that parses re-serialises to the same bytes.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::DetectionRecord;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RecordError {
    /// 1-based line number of a parse failure.
    pub fn line(&self) -> Option<u64> {
        match self {
            RecordError::Parse { line, .. } => Some(*line),
            RecordError::Io(_) => None,
        }
    }
}

/// Parses one line without its terminating newline.
pub fn parse_record_line(text: &str, line: u64) -> Result<DetectionRecord, RecordError> {
    let fail = |message: &str| RecordError::Parse {
        line,
        message: message.to_string(),
    };
    let (index, clicks) = text
        .split_once(' ')
        .ok_or_else(|| fail("expected `<pulse_index> <c0c1c2c3>`"))?;
    if index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(fail("pulse index must be a decimal number"));
    }
    if index.len() > 1 && index.starts_with('0') {
        return Err(fail("pulse index has leading zeros"));
    }
    let pulse_index: u64 = index
        .parse()
        .map_err(|_| fail("pulse index does not fit in 64 bits"))?;
    let bytes = clicks.as_bytes();
    if bytes.len() != 4 {
        return Err(fail("click pattern must have exactly four digits"));
    }
    let mut out = [false; 4];
    for (c, b) in out.iter_mut().zip(bytes) {
        *c = match b {
            b'0' => false,
            b'1' => true,
            _ => return Err(fail("click pattern digits must be 0 or 1")),
        };
    }
    Ok(DetectionRecord {
        pulse_index,
        clicks: out,
    })
}

pub fn write_record<W: Write + ?Sized>(out: &mut W, record: &DetectionRecord) -> io::Result<()> {
    let c = |b: bool| if b { '1' } else { '0' };
    let [a, b, d, e] = record.clicks;
    writeln!(
        out,
        "{} {}{}{}{}",
        record.pulse_index,
        c(a),
        c(b),
        c(d),
        c(e)
    )
}

/// Writes every record; returns how many were written.
pub fn write_records<W, I>(out: &mut W, records: I) -> io::Result<u64>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = DetectionRecord>,
{
    let mut n = 0;
    for r in records {
        write_record(out, &r)?;
        n += 1;
    }
    Ok(n)
}

/// Streaming parser over a buffered reader.
pub struct RecordReader<R> {
    inner: R,
    line: u64,
    buf: String,
    previous: Option<u64>,
    done: bool,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: 0,
            buf: String::new(),
            previous: None,
            done: false,
        }
    }

    fn read_next(&mut self) -> Result<Option<DetectionRecord>, RecordError> {
        self.buf.clear();
        let read = self.inner.read_line(&mut self.buf)?;
        if read == 0 {
            return Ok(None);
        }
        self.line += 1;
        let text = self
            .buf
            .strip_suffix('\n')
            .ok_or_else(|| RecordError::Parse {
                line: self.line,
                message: "missing terminating newline".into(),
            })?;
        let record = parse_record_line(text, self.line)?;
        if let Some(prev) = self.previous {
            if record.pulse_index <= prev {
                return Err(RecordError::Parse {
                    line: self.line,
                    message: format!("pulse index {} does not follow {prev}", record.pulse_index),
                });
            }
        }
        self.previous = Some(record.pulse_index);
        Ok(Some(record))
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<DetectionRecord, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_next() {
            Ok(Some(r)) => Some(Ok(r)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_all(text: &str) -> Result<Vec<DetectionRecord>, RecordError> {
        RecordReader::new(text.as_bytes()).collect()
    }

    #[test]
    fn parses_canonical_lines() {
        let recs = parse_all("0 0000\n1 1010\n17 1111\n").unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].clicks, [true, false, true, false]);
        assert_eq!(recs[2].pulse_index, 17);
        let mut out = Vec::new();
        write_records(&mut out, recs).unwrap();
        assert_eq!(out, b"0 0000\n1 1010\n17 1111\n");
    }

    #[test]
    fn malformed_line_names_its_number() {
        let err = parse_all("12 01x1\n").unwrap_err();
        assert_eq!(err.line(), Some(1));
        let err = parse_all("0 0000\n1 0000\n2 000\n").unwrap_err();
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn rejects_non_canonical_input() {
        for bad in [
            "01 0000\n",
            "1  0000\n",
            "1 0000\r\n",
            "1 0000",
            " 1 0000\n",
            "1 00000\n",
            "\n",
        ] {
            assert!(parse_all(bad).is_err(), "{bad:?} accepted");
        }
        assert!(parse_all("5 0001\n5 0001\n").is_err());
        assert!(parse_all("99999999999999999999 0001\n").is_err());
    }

    #[test]
    fn empty_input_is_empty_stream() {
        assert!(parse_all("").unwrap().is_empty());
    }
}
