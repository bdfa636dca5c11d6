use std::path::Path;

use crate::error::{Error, Result};
use crate::paired::PairedData;

fn parse_err(path: &Path, line: usize, column: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    }
}

/// Numeric table with an optional header row. Every data row must have the
/// same width as the first.
pub fn read_numeric_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if rows.is_empty() && width.is_none() && parsed.iter().all(Option::is_none) {
            // header
            width = Some(rec.len());
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(parse_err(
                path,
                line,
                rec.len().min(w) + 1,
                format!("expected {w} fields, found {}", rec.len()),
            ));
        }
        let mut row = Vec::with_capacity(w);
        for (c, (field, value)) in rec.iter().zip(parsed).enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(parse_err(
                        path,
                        line,
                        c + 1,
                        format!("expected a finite number, found `{field}`"),
                    ));
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, 1, "no data rows".into()));
    }
    Ok(rows)
}

/// One column of differences `y`, or two columns `a,b` giving `y = b - a`.
pub fn read_paired(path: &Path) -> Result<PairedData> {
    let rows = read_numeric_table(path)?;
    match rows[0].len() {
        1 => PairedData::from_diffs(rows.into_iter().map(|r| r[0]).collect()),
        2 => {
            let (a, b) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
            PairedData::from_pairs(a, b)
        }
        w => Err(parse_err(
            path,
            1,
            1,
            format!("expected 1 column (differences) or 2 columns (a, b), found {w}"),
        )),
    }
}

/// One probability per row.
pub fn read_thetas(path: &Path) -> Result<Vec<f64>> {
    let rows = read_numeric_table(path)?;
    if rows[0].len() != 1 {
        return Err(parse_err(
            path,
            1,
            2,
            "expected a single column of probabilities".into(),
        ));
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn headers_and_columns() {
        let f = file("y\n1\n-2\n3.5\n");
        assert_eq!(read_paired(f.path()).unwrap().diffs(), &[1.0, -2.0, 3.5]);
        let f = file("1,4\n2,1\n");
        assert_eq!(read_paired(f.path()).unwrap().diffs(), &[3.0, -1.0]);
    }

    #[test]
    fn located_errors() {
        let f = file("y\n1\nabc\n");
        match read_paired(f.path()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 1)),
            other => panic!("{other:?}"),
        }
        let f = file("a,b\n1,2\n3\n");
        match read_paired(f.path()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 2)),
            other => panic!("{other:?}"),
        }
        assert!(read_paired(file("y\n").path()).is_err());
        assert!(read_paired(file("1,2,3\n").path()).is_err());
    }
}
