use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solvers::{Method, SolverConfig, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// One method row of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    /// Ignored by [`Method::Gd`].
    pub q: usize,
    pub delta: f64,
}

impl MethodSpec {
    pub fn new(method: Method, q: usize, delta: f64) -> Result<Self> {
        SolverConfig::new(method, q, delta)?;
        Ok(MethodSpec { method, q, delta })
    }

    pub fn solver_config(&self, tol: f64, max_iter: usize, seed: u64) -> Result<SolverConfig> {
        Ok(SolverConfig::new(self.method, self.q, self.delta)?
            .with_tol(tol)?
            .with_max_iter(max_iter)
            .with_seed(seed))
    }

    /// Row label such as `SCBGD (q=10, δ=1)`.
    pub fn label(&self) -> String {
        match self.method {
            Method::Gd if self.delta == 1.0 => "GD".to_string(),
            Method::Gd => format!("GD (δ={})", self.delta),
            m => format!("{} (q={}, δ={})", m.label(), self.q, self.delta),
        }
    }
}

/// A full experiment: one problem, several dimensions and methods, and
/// `repetitions` seeded runs per (method, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: String,
    pub dims: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub repetitions: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub base_seed: u64,
    /// Repetitions run concurrently on this many threads. Timings are
    /// cleanest with 1.
    pub workers: usize,
    pub csv: Option<PathBuf>,
    pub table: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(problem: impl Into<String>, dims: Vec<usize>, methods: Vec<MethodSpec>) -> Result<Self> {
        let config = ExperimentConfig {
            problem: problem.into(),
            dims,
            methods,
            repetitions: 10,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            base_seed: 0,
            workers: 1,
            csv: None,
            table: None,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.problem.is_empty() {
            return bad("no problem given".into());
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dimensions must be a non-empty list of positive integers".into());
        }
        if self.methods.is_empty() {
            return bad("no [method] sections".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return bad(format!("tol = {} must be finite and non-negative", self.tol));
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses the `key = value` format with one `[experiment]` section and
    /// one `[method]` section per method. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        enum Section {
            None,
            Experiment,
            Method(usize),
        }
        let mut section = Section::None;
        let mut seen_experiment = false;
        let mut exp: Vec<Entry> = Vec::new();
        let mut methods: Vec<(usize, Vec<Entry>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name.trim() {
                    "experiment" if seen_experiment => return Err(err("duplicate [experiment] section".into())),
                    "experiment" => {
                        seen_experiment = true;
                        Section::Experiment
                    }
                    "method" => {
                        methods.push((line_no, Vec::new()));
                        Section::Method(methods.len() - 1)
                    }
                    other => return Err(err(format!("unknown section [{other}]"))),
                };
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let entry = (line_no, key.trim().to_string(), value.trim().to_string());
            let target = match section {
                Section::None => return Err(err("key outside of any section".into())),
                Section::Experiment => &mut exp,
                Section::Method(i) => &mut methods[i].1,
            };
            if target.iter().any(|(_, k, _)| *k == entry.1) {
                return Err(err(format!("duplicate key `{}`", entry.1)));
            }
            target.push(entry);
        }

        if !seen_experiment {
            return Err(Error::Parse {
                line: 0,
                msg: "missing [experiment] section".into(),
            });
        }

        let mut problem = None;
        let mut dims = None;
        let mut config = ExperimentConfig {
            problem: String::new(),
            dims: Vec::new(),
            methods: Vec::new(),
            repetitions: 10,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            base_seed: 0,
            workers: 1,
            csv: None,
            table: None,
        };
        for (line, key, value) in &exp {
            let line = *line;
            match key.as_str() {
                "problem" => problem = Some(value.clone()),
                "dims" => {
                    dims = Some(
                        value
                            .split(',')
                            .map(|d| parse_value::<usize>(line, "dims", d.trim()))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
                "repetitions" => config.repetitions = parse_value(line, key, value)?,
                "tol" => config.tol = parse_value(line, key, value)?,
                "max_iter" => config.max_iter = parse_value(line, key, value)?,
                "base_seed" => config.base_seed = parse_value(line, key, value)?,
                "workers" => config.workers = parse_value(line, key, value)?,
                "csv" => config.csv = Some(PathBuf::from(value)),
                "table" => config.table = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("unknown key `{other}` in [experiment]"),
                    })
                }
            }
        }
        config.problem = problem.ok_or(Error::Parse {
            line: 0,
            msg: "[experiment] is missing `problem`".into(),
        })?;
        config.dims = dims.ok_or(Error::Parse {
            line: 0,
            msg: "[experiment] is missing `dims`".into(),
        })?;

        for (header, entries) in &methods {
            let mut method = None;
            let mut q = None;
            let mut delta = 1.0;
            for (line, key, value) in entries {
                match key.as_str() {
                    "name" => method = Some(parse_value::<Method>(*line, key, value)?),
                    "q" => q = Some(parse_value::<usize>(*line, key, value)?),
                    "delta" => delta = parse_value(*line, key, value)?,
                    other => {
                        return Err(Error::Parse {
                            line: *line,
                            msg: format!("unknown key `{other}` in [method]"),
                        })
                    }
                }
            }
            let method = method.ok_or(Error::Parse {
                line: *header,
                msg: "[method] is missing `name`".into(),
            })?;
            let q = match (method, q) {
                (Method::Gd, q) => q.unwrap_or(0),
                (_, Some(q)) => q,
                (_, None) => {
                    return Err(Error::Parse {
                        line: *header,
                        msg: format!("[method] `{method}` needs `q`"),
                    })
                }
            };
            let spec = MethodSpec::new(method, q, delta).map_err(|e| Error::Parse {
                line: *header,
                msg: e.to_string(),
            })?;
            config.methods.push(spec);
        }

        config.validate().map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(config)
    }

    /// Inverse of [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("[experiment]\n");
        out += &format!("problem = {}\n", self.problem);
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        out += &format!("dims = {}\n", dims.join(", "));
        out += &format!("repetitions = {}\n", self.repetitions);
        out += &format!("tol = {:e}\n", self.tol);
        out += &format!("max_iter = {}\n", self.max_iter);
        out += &format!("base_seed = {}\n", self.base_seed);
        out += &format!("workers = {}\n", self.workers);
        if let Some(p) = &self.csv {
            out += &format!("csv = {}\n", p.display());
        }
        if let Some(p) = &self.table {
            out += &format!("table = {}\n", p.display());
        }
        for m in &self.methods {
            out += &format!("\n[method]\nname = {}\n", m.method.as_str());
            if m.method != Method::Gd {
                out += &format!("q = {}\n", m.q);
            }
            out += &format!("delta = {}\n", m.delta);
        }
        out
    }
}

type Entry = (usize, String, String);

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid value `{value}` for `{key}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# comment
[experiment]
problem = broyden
dims = 200, 400
repetitions = 3
base_seed = 5   # trailing comment
csv = out.csv

[method]
name = gd

[method]
name = scbgd
q = 10
delta = 0.5
";

    #[test]
    fn parses_sample() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.problem, "broyden");
        assert_eq!(c.dims, vec![200, 400]);
        assert_eq!(c.repetitions, 3);
        assert_eq!(c.base_seed, 5);
        assert_eq!(c.tol, 1e-6);
        assert_eq!(c.max_iter, 200_000);
        assert_eq!(c.csv, Some(PathBuf::from("out.csv")));
        assert_eq!(c.methods.len(), 2);
        assert_eq!(c.methods[0].label(), "GD");
        assert_eq!(c.methods[1].label(), "SCBGD (q=10, δ=0.5)");
    }

    #[test]
    fn round_trips_through_text() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    fn line_of(text: &str) -> usize {
        match ExperimentConfig::parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn errors_report_lines() {
        assert_eq!(line_of(""), 0);
        assert_eq!(line_of("[experiment]\nproblem = broyden\ndims = 2, x\n"), 3);
        assert_eq!(line_of("[experiment]\nbogus = 1\n"), 2);
        assert_eq!(line_of("problem = broyden\n"), 1);
        assert_eq!(line_of("[experiment]\nproblem broyden\n"), 2);
        assert_eq!(
            line_of("[experiment]\nproblem = a\ndims = 2\n[method]\nname = scbgd\n"),
            4
        );
        assert_eq!(
            line_of("[experiment]\nproblem = a\ndims = 2\n[method]\nname = gd\ndelta = 2\n"),
            4
        );
        assert_eq!(line_of("[experiment]\nproblem = a\nproblem = b\n"), 3);
        assert_eq!(line_of("[weird]\n"), 1);
    }

    #[test]
    fn requires_methods() {
        assert!(ExperimentConfig::parse("[experiment]\nproblem = a\ndims = 2\n").is_err());
        assert!(ExperimentConfig::new("a", vec![2], vec![]).is_err());
        assert!(ExperimentConfig::new("a", vec![0], vec![MethodSpec::new(Method::Gd, 0, 1.0).unwrap()]).is_err());
    }
}
