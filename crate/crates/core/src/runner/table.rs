use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Numeric columns read from a CSV file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTable {
    /// Inputs in the requested column order.
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    /// Rows skipped because a selected field was missing or not a finite
    /// number.
    pub dropped: usize,
}

impl RawTable {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Copies the given rows, in that order.
    pub fn select(&self, rows: &[usize]) -> (DMatrix<f64>, Vec<f64>) {
        let x = DMatrix::from_fn(rows.len(), self.x.ncols(), |i, q| self.x[(rows[i], q)]);
        (x, rows.iter().map(|&r| self.y[r]).collect())
    }
}

/// Reads the named columns of a comma-separated file with one header line.
/// Lines starting with `#` are ignored. Numbers use a decimal point
/// whatever the locale.
pub fn load_csv(path: &Path, input_columns: &[String], response_column: &str) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Data(format!("{}: {other:?}", path.display())),
        })?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data(format!("{}: no column named {name:?}", path.display())))
    };
    let mut cols = input_columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;
    cols.push(find(response_column)?);

    let d = input_columns.len();
    let mut values: Vec<f64> = Vec::new();
    let mut y = Vec::new();
    let mut dropped = 0;
    let mut row = vec![0.0; d + 1];
    for record in reader.records() {
        let record = record?;
        let ok =
            cols.iter()
                .zip(row.iter_mut())
                .all(|(&c, slot)| match record.get(c).and_then(|s| s.parse::<f64>().ok()) {
                    Some(v) if v.is_finite() => {
                        *slot = v;
                        true
                    }
                    _ => false,
                });
        if ok {
            values.extend_from_slice(&row[..d]);
            y.push(row[d]);
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} malformed row(s)", path.display());
    }
    if y.is_empty() {
        return Err(Error::Data(format!("{}: no usable rows", path.display())));
    }
    Ok(RawTable {
        x: DMatrix::from_row_slice(y.len(), d, &values),
        y,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reads_columns_in_requested_order() {
        let f = file("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let t = load_csv(f.path(), &names(&["b", "a"]), "y").unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.dropped, 0);
        assert_eq!(t.x.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 1.0]);
        assert_eq!(t.y, vec![3.0, 6.0, 9.0]);
    }

    #[test]
    fn drops_malformed_rows() {
        let f = file("# note\na,y,label\n1,2,x\n1,2,5\n1,oops,z\n3,,w\n4,nan,v\n5\n");
        let t = load_csv(f.path(), &names(&["a"]), "y").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dropped, 4);
    }

    #[test]
    fn unselected_columns_may_be_anything() {
        let f = file("a,y,note\n1.5,2,\"hello, world\"\n");
        let t = load_csv(f.path(), &names(&["a"]), "y").unwrap();
        assert_eq!(t.x[(0, 0)], 1.5);
    }

    #[test]
    fn errors() {
        let missing = Path::new("/nonexistent/file.csv");
        assert!(matches!(load_csv(missing, &names(&["a"]), "y"), Err(Error::Io { .. })));
        let f = file("a,y\n1,2\n");
        assert!(matches!(load_csv(f.path(), &names(&["b"]), "y"), Err(Error::Data(_))));
        let f = file("a,y\nx,y\n");
        assert!(matches!(load_csv(f.path(), &names(&["a"]), "y"), Err(Error::Data(_))));
    }
}
