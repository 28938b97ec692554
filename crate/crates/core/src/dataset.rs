use std::io::{Read, Write};
use std::path::Path;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};

/// A nonempty collection of domain points stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    domain: DomainSpec,
    values: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from row-major values, checking every row against
    /// the domain.
    pub fn new(domain: DomainSpec, values: Vec<f64>) -> Result<Self> {
        let dim = domain.dim();
        if values.is_empty() {
            return Err(Error::InvalidDataset("dataset must have at least one row".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::InvalidDataset(format!(
                "{} values do not split into rows of {dim}",
                values.len()
            )));
        }
        if let Some(bad) = values.chunks(dim).position(|row| !domain.contains(row)) {
            return Err(Error::InvalidDataset(format!("row {bad} lies outside the domain")));
        }
        Ok(Self { domain, values })
    }

    pub fn from_rows(domain: DomainSpec, rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(domain, rows.iter().flatten().copied().collect())
    }

    pub(crate) fn new_unchecked(domain: DomainSpec, values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.len() % domain.dim() == 0);
        Self { domain, values }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks(self.dim())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Writes `x1,...,xp` then one line per row. Discrete cells are printed as
    /// integers, continuous ones in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        out.write_record(&header)?;
        let discrete = self.domain.levels().is_some();
        for row in self.rows() {
            let cells = row.iter().map(|&x| {
                if discrete {
                    format!("{}", x as i64)
                } else {
                    format!("{x}")
                }
            });
            out.write_record(cells)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Parses a dataset. Row numbers in errors are 1-based data rows (the
    /// header is row 0); columns are 1-based.
    pub fn read_csv<R: Read>(domain: DomainSpec, reader: R) -> Result<Self> {
        let mut input = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let dim = domain.dim();
        let header = input.headers()?.clone();
        if header.len() != dim {
            return Err(Error::Csv {
                row: 0,
                column: header.len().min(dim) + 1,
                message: format!("expected {dim} columns, header has {}", header.len()),
            });
        }
        for (j, name) in header.iter().enumerate() {
            if name != format!("x{}", j + 1) {
                return Err(Error::Csv {
                    row: 0,
                    column: j + 1,
                    message: format!("expected header `x{}`, found `{name}`", j + 1),
                });
            }
        }
        let mut values = Vec::new();
        for (i, record) in input.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| Error::Csv {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            if record.len() != dim {
                return Err(Error::Csv {
                    row,
                    column: record.len().min(dim) + 1,
                    message: format!("expected {dim} cells, found {}", record.len()),
                });
            }
            for (j, cell) in record.iter().enumerate() {
                values.push(parse_cell(&domain, cell).map_err(|message| Error::Csv {
                    row,
                    column: j + 1,
                    message,
                })?);
            }
        }
        if values.is_empty() {
            return Err(Error::InvalidDataset("csv contains no data rows".into()));
        }
        Ok(Self { domain, values })
    }

    pub fn load_csv(domain: DomainSpec, path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(domain, std::io::BufReader::new(file))
    }
}

fn parse_cell(domain: &DomainSpec, cell: &str) -> std::result::Result<f64, String> {
    match domain.levels() {
        Some(levels) => {
            let v: i64 = cell.parse().map_err(|_| format!("`{cell}` is not an integer"))?;
            if v < 0 || v >= levels as i64 {
                return Err(format!("{v} outside 0..={}", levels - 1));
            }
            Ok(v as f64)
        }
        None => {
            let v: f64 = cell.parse().map_err(|_| format!("`{cell}` is not a number"))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{v} outside [0, 1]"));
            }
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_out_of_domain() {
        let d = DomainSpec::boolean(2).unwrap();
        assert!(Dataset::new(d, vec![]).is_err());
        assert!(Dataset::new(d, vec![0.0, 2.0]).is_err());
        assert!(Dataset::new(d, vec![0.0, 1.0, 1.0]).is_err());
        assert_eq!(Dataset::new(d, vec![0.0, 1.0, 1.0, 1.0]).unwrap().len(), 2);
    }

    #[test]
    fn csv_roundtrip_continuous() {
        let d = DomainSpec::continuous(2).unwrap();
        let data = Dataset::new(d, vec![0.1, 0.987654321, 1.0, 0.0]).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2\n"));
        assert_eq!(Dataset::read_csv(d, buf.as_slice()).unwrap(), data);
    }

    #[test]
    fn csv_discrete_format() {
        let d = DomainSpec::discrete(2, 3).unwrap();
        let data = Dataset::new(d, vec![0.0, 2.0, 1.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,x2\n0,2\n1,1\n");
    }

    #[test]
    fn csv_errors_report_position() {
        let d = DomainSpec::discrete(2, 3).unwrap();
        let err = Dataset::read_csv(d, "x1,x2\n0,1\n1,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, column: 2, .. }), "{err}");
        let err = Dataset::read_csv(d, "x1,x2\n0,a\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { row: 1, column: 2, .. }));
        let err = Dataset::read_csv(d, "x1,y\n0,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { row: 0, column: 2, .. }));
        let c = DomainSpec::continuous(1).unwrap();
        let err = Dataset::read_csv(c, "x1\n0.5\n1.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, column: 1, .. }));
    }
}
