//! CSV and sidecar output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fpt_core::MomentEstimate;

use crate::error::CliError;

/// Shortest decimal that round-trips to the same `f64`.
pub fn num(value: f64) -> String {
    format!("{value:?}")
}

pub const MOMENT_HEADER: [&str; 14] = [
    "experiment",
    "estimator",
    "level_or_delay",
    "p",
    "s",
    "epsilon",
    "q",
    "n_trials",
    "empirical_moment",
    "theory_constant",
    "ratio",
    "stderr",
    "truncated_count",
    "master_seed",
];

/// One row of a noisy or delayed sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: &'static str,
    pub estimator: &'static str,
    pub level_or_delay: f64,
    pub p: f64,
    pub s: f64,
    pub epsilon: f64,
    pub q: Option<f64>,
    pub n_trials: u64,
    pub empirical_moment: f64,
    pub theory_constant: f64,
    pub ratio: f64,
    pub stderr: f64,
    pub truncated_count: u64,
    pub master_seed: u64,
}

impl CsvRow {
    pub fn from_estimate(
        experiment: &'static str,
        estimate: &MomentEstimate,
        s: f64,
        epsilon: f64,
        master_seed: u64,
    ) -> Result<Self, CliError> {
        if !(estimate.ratio.is_finite() && estimate.stderr.is_finite()) {
            return Err(CliError::Param(format!(
                "no untruncated trials for {} at {} ({} of {} truncated); raise --cap",
                estimate.estimator, estimate.sweep_value, estimate.truncated_count, estimate.n
            )));
        }
        Ok(CsvRow {
            experiment,
            estimator: estimate.estimator.name(),
            level_or_delay: estimate.sweep_value,
            p: estimate.p,
            s,
            epsilon,
            q: estimate.estimator.q(),
            n_trials: estimate.n,
            empirical_moment: estimate.empirical_moment,
            theory_constant: estimate.theory_constant,
            ratio: estimate.ratio,
            stderr: estimate.stderr,
            truncated_count: estimate.truncated_count,
            master_seed,
        })
    }

    pub fn record(&self) -> [String; 14] {
        [
            self.experiment.to_string(),
            self.estimator.to_string(),
            num(self.level_or_delay),
            num(self.p),
            num(self.s),
            num(self.epsilon),
            self.q.map(num).unwrap_or_default(),
            self.n_trials.to_string(),
            num(self.empirical_moment),
            num(self.theory_constant),
            num(self.ratio),
            num(self.stderr),
            self.truncated_count.to_string(),
            self.master_seed.to_string(),
        ]
    }
}

/// CSV destination: a file (plus `<file>.meta`) or standard output.
pub struct Sink {
    path: Option<PathBuf>,
    writer: csv::Writer<Box<dyn Write>>,
}

impl Sink {
    pub fn open(path: Option<&Path>) -> Result<Self, CliError> {
        let inner: Box<dyn Write> = match path {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            )),
            None => Box::new(io::stdout().lock()),
        };
        let writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(inner);
        Ok(Sink {
            path: path.map(Path::to_path_buf),
            writer,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    /// Flushes the CSV and writes the resolved configuration next to it.
    pub fn finish(mut self, resolved: &BTreeMap<String, String>) -> Result<(), CliError> {
        self.writer.flush()?;
        if let Some(path) = &self.path {
            let mut meta = path.clone().into_os_string();
            meta.push(".meta");
            let mut text = String::new();
            for (key, value) in resolved {
                text.push_str(&format!("{key}={value}\n"));
            }
            std::fs::write(&meta, text)
                .map_err(|e| CliError::Io(format!("{}: {e}", Path::new(&meta).display())))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0, 1e-25, 2.23606797749979, 12567.0, 1e300] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(0.5), "0.5");
    }
}
