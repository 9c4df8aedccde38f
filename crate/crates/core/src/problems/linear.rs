//! Linear residuals `f(x) = A x - b`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::Problem;
use crate::error::{Error, Result};

/// Matrix and right-hand side of a linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProblemSpec {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LinearProblemSpec {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidProblem("empty matrix".into()));
        }
        if a.nrows() != b.len() {
            return Err(Error::InvalidProblem(format!(
                "matrix has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite entry".into()));
        }
        Ok(LinearProblemSpec { a, b })
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Parses the plain-text format: a line `m n`, `m` lines of `n` matrix
    /// entries, then one line of `m` entries for `b`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `m n` header".into(),
        })?;
        let dims = parse_numbers::<usize>(header, line)?;
        let [m, n] = dims[..] else {
            return Err(Error::Parse {
                line,
                msg: format!("expected `m n`, found {} values", dims.len()),
            });
        };

        let mut a = DMatrix::zeros(m, n);
        for r in 0..m {
            let (line, text) = lines.next().ok_or(Error::Parse {
                line: line + r + 1,
                msg: format!("missing matrix row {}", r + 1),
            })?;
            let row = parse_numbers::<f64>(text, line)?;
            if row.len() != n {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {n} entries, found {}", row.len()),
                });
            }
            for (c, v) in row.into_iter().enumerate() {
                a[(r, c)] = v;
            }
        }

        let (line, text) = lines.next().ok_or(Error::Parse {
            line: line + m + 1,
            msg: "missing right-hand side row".into(),
        })?;
        let b = parse_numbers::<f64>(text, line)?;
        if b.len() != m {
            return Err(Error::Parse {
                line,
                msg: format!("expected {m} right-hand side entries, found {}", b.len()),
            });
        }
        if let Some((line, _)) = lines.next() {
            return Err(Error::Parse {
                line,
                msg: "trailing content".into(),
            });
        }
        LinearProblemSpec::new(a, DVector::from_vec(b))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m(), self.n());
        for r in 0..self.m() {
            let row: Vec<String> = self.a.row(r).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        let b: Vec<String> = self.b.iter().map(|v| v.to_string()).collect();
        out.push_str(&b.join(" "));
        out.push('\n');
        out
    }
}

fn parse_numbers<T: std::str::FromStr>(text: &str, line: usize) -> Result<Vec<T>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse `{tok}`"),
            })
        })
        .collect()
}

/// `f(x) = A x - b` as a [`Problem`]. Columns are dense, so no row support
/// is declared.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    name: String,
    spec: LinearProblemSpec,
    rows: Vec<f64>,
}

impl LinearProblem {
    pub fn new(name: impl Into<String>, spec: LinearProblemSpec) -> Result<Self> {
        let (m, n) = (spec.m(), spec.n());
        let mut rows = Vec::with_capacity(m * n);
        for r in 0..m {
            rows.extend(spec.a.row(r).iter());
        }
        Ok(LinearProblem {
            name: name.into(),
            spec,
            rows,
        })
    }

    /// `f(x) = x - c·1`.
    pub fn identity(n: usize, c: f64) -> Result<Self> {
        let spec = LinearProblemSpec::new(DMatrix::identity(n, n), DVector::from_element(n, c))?;
        Self::new(super::IDENTITY, spec)
    }

    pub fn spec(&self) -> &LinearProblemSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.spec.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.spec.b
    }
}

impl Problem for LinearProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn n(&self) -> usize {
        self.spec.n()
    }

    fn m(&self) -> usize {
        self.spec.m()
    }

    fn residual_row(&self, x: &[f64], row: usize) -> f64 {
        let n = self.n();
        let a = &self.rows[row * n..(row + 1) * n];
        a.iter().zip(x).fold(0.0, |acc, (a, x)| acc + a * x) - self.spec.b[row]
    }

    fn jacobian_column_into(&self, _x: &[f64], col: usize, rows: &mut Vec<usize>, vals: &mut Vec<f64>) {
        rows.extend(0..self.m());
        vals.extend(self.spec.a.column(col).iter());
    }

    fn default_start(&self) -> Vec<f64> {
        vec![0.0; self.n()]
    }
}
