use std::collections::BTreeMap;
use std::io::Read;

use super::{check_length, EmpiricalPmf};
use crate::error::{Result, VdbError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceOptions {
    /// Zero-based column index.
    pub column: usize,
    pub word_length: u32,
    /// Added to every sample before the range check, so signed readings can
    /// be shifted into `[0, 2^L)`.
    pub offset: i64,
    pub has_header: bool,
    /// Saturate out-of-range samples instead of failing.
    pub clamp: bool,
}

impl TraceOptions {
    pub fn new(column: usize, word_length: u32) -> Self {
        Self {
            column,
            word_length,
            offset: 0,
            has_header: false,
            clamp: false,
        }
    }
}

/// Histogram of one integer column of a CSV stream, normalized to a PMF.
pub fn ingest_trace<R: Read>(input: R, opts: &TraceOptions) -> Result<EmpiricalPmf> {
    check_length(opts.word_length)?;
    let max = (1i64 << opts.word_length) - 1;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| VdbError::Trace {
            row: e.position().map_or(idx + 1, |p| p.line() as usize),
            column: opts.column,
            message: e.to_string(),
        })?;
        let row = record.position().map_or(idx + 1, |p| p.line() as usize);
        let fail = |message: String| VdbError::Trace {
            row,
            column: opts.column,
            message,
        };
        let field = record
            .get(opts.column)
            .ok_or_else(|| fail(format!("row has only {} columns", record.len())))?;
        let raw: i64 = field
            .parse()
            .map_err(|_| fail(format!("`{field}` is not an integer")))?;
        let shifted = raw
            .checked_add(opts.offset)
            .ok_or_else(|| fail(format!("{raw} + {} overflows", opts.offset)))?;
        let v = if (0..=max).contains(&shifted) {
            shifted
        } else if opts.clamp {
            shifted.clamp(0, max)
        } else {
            return Err(fail(format!(
                "value {shifted} outside [0, {max}] for {} bits",
                opts.word_length
            )));
        };
        *counts.entry(v as u32).or_insert(0) += 1;
    }
    EmpiricalPmf::from_counts(opts.word_length, &counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_column_histogram() {
        let pmf = ingest_trace("1,9\n1,8\n2,7\n".as_bytes(), &TraceOptions::new(0, 3)).unwrap();
        assert!((pmf.mass(1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((pmf.mass(2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(pmf.iter().count(), 2);
        assert_eq!(pmf.sample_count(), 3);
    }

    #[test]
    fn empty_stream() {
        assert_eq!(
            ingest_trace("".as_bytes(), &TraceOptions::new(0, 3)),
            Err(VdbError::NoSamples)
        );
    }

    #[test]
    fn errors_carry_row_and_column() {
        let err = ingest_trace("1,2\n3,x\n".as_bytes(), &TraceOptions::new(1, 3)).unwrap_err();
        assert!(
            matches!(
                err,
                VdbError::Trace {
                    row: 2,
                    column: 1,
                    ..
                }
            ),
            "{err:?}"
        );
        let err = ingest_trace("1\n9\n".as_bytes(), &TraceOptions::new(0, 3)).unwrap_err();
        assert!(matches!(err, VdbError::Trace { row: 2, .. }), "{err:?}");
    }

    #[test]
    fn offset_header_and_clamp() {
        let mut opts = TraceOptions::new(1, 3);
        opts.has_header = true;
        opts.offset = 4;
        let pmf = ingest_trace("t,ax\n0,-4\n1,3\n".as_bytes(), &opts).unwrap();
        assert_eq!(pmf.mass(0), 0.5);
        assert_eq!(pmf.mass(7), 0.5);

        let mut opts = TraceOptions::new(0, 2);
        assert!(ingest_trace("5\n".as_bytes(), &opts).is_err());
        opts.clamp = true;
        let pmf = ingest_trace("5\n-1\n".as_bytes(), &opts).unwrap();
        assert_eq!(pmf.mass(3), 0.5);
        assert_eq!(pmf.mass(0), 0.5);
    }
}
