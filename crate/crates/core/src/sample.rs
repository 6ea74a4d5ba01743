//! Sorted observation vectors with provenance.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSource {
    Inline,
    File { path: String },
    Generator { model: String, seed: u64, n: usize },
    Orbit { c: f64, x0: f64, burn_in: usize, length: usize },
}

impl fmt::Display for SampleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSource::Inline => write!(f, "inline"),
            SampleSource::File { path } => write!(f, "file {path}"),
            SampleSource::Generator { model, seed, n } => {
                write!(f, "{model} (n = {n}, seed = {seed})")
            }
            SampleSource::Orbit { c, x0, burn_in, length } => {
                write!(f, "logistic orbit c = {c}, x0 = {x0}, burn-in {burn_in}, length {length}")
            }
        }
    }
}

/// Finite observations kept in nondecreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    source: SampleSource,
}

impl Sample {
    /// Sorts `values`; rejects empty input and non-finite entries.
    pub fn new(mut values: Vec<f64>, source: SampleSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSample("no observations".into()));
        }
        if let Some((i, x)) = values.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "observation {} is not finite ({x})",
                i + 1
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, source })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, SampleSource::Inline)
    }

    /// Parses one decimal per line. A first line reading `x` is taken as a
    /// header; blank lines are skipped.
    pub fn parse(text: &str, source: SampleSource) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line == "x") {
                continue;
            }
            let x: f64 = line.parse().map_err(|_| {
                Error::InvalidSample(format!("line {}: `{line}` is not a number", lineno + 1))
            })?;
            if !x.is_finite() {
                return Err(Error::InvalidSample(format!(
                    "line {}: `{line}` is not finite",
                    lineno + 1
                )));
            }
            values.push(x);
        }
        Self::new(values, source)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSample(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(
            &text,
            SampleSource::File {
                path: path.display().to_string(),
            },
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> &SampleSource {
        &self.source
    }

    /// `x + c` for every observation.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|x| x + c).collect(), self.source.clone())
    }

    /// `a x` for every observation, `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor {a} must be positive")));
        }
        Self::new(self.values.iter().map(|x| a * x).collect(), self.source.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_keeps_source() {
        let s = Sample::new(vec![3.0, 1.0, 2.0], SampleSource::Inline).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.source(), &SampleSource::Inline);
    }

    #[test]
    fn parse_with_header_and_blanks() {
        let s = Sample::parse("x\n0.5\n\n 1.5 \n-2\n", SampleSource::Inline).unwrap();
        assert_eq!(s.values(), &[-2.0, 0.5, 1.5]);
    }

    #[test]
    fn parse_rejects_garbage_and_non_finite() {
        assert!(Sample::parse("1\nabc\n", SampleSource::Inline).is_err());
        assert!(Sample::parse("1\ninf\n", SampleSource::Inline).is_err());
        assert!(Sample::parse("NaN\n", SampleSource::Inline).is_err());
        assert!(Sample::parse("x\n", SampleSource::Inline).is_err());
    }

    #[test]
    fn header_only_on_first_line() {
        assert!(Sample::parse("1\nx\n", SampleSource::Inline).is_err());
    }
}
