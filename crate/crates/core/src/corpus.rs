//! Password corpora, sample files and CDF reports.

use std::io::{self, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charspace::CharSpace;
use crate::estimators::{EstimateError, SampleSequence};
use crate::exec::{map_ordered, Execution};
use crate::metrics::{Distribution, PasswordScore};

/// Decimal places used in every exported report.
pub const REPORT_DECIMALS: usize = 6;

/// Default number of points for [`CdfSeries::resample`].
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("input is not valid UTF-8 at byte offset {offset}")]
    MalformedEncoding { offset: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("non-finite value {0} cannot be placed on a CDF")]
    NonFiniteValue(f64),
    #[error("unexpected byte {byte:#04x} at offset {offset} in ascii-binary input")]
    MalformedSample { offset: usize, byte: u8 },
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error("failed to write report: {0}")]
    SinkFailure(#[source] io::Error),
    #[error("failed to read input: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Samples(#[from] EstimateError),
}

/// An ordered list of passwords that all lie in the character space.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub entries: Vec<String>,
    /// Lines dropped because they contain characters outside the space.
    pub skipped: usize,
    pub source_label: String,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Reads one password per line (LF or CRLF). Blank lines are ignored; lines
/// with characters outside the space are counted in `skipped`. Order and
/// duplicates are kept.
pub fn load_corpus<R: Read>(mut source: R, label: &str) -> Result<Corpus, CorpusError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CorpusError::MalformedEncoding {
        offset: e.valid_up_to(),
    })?;
    Ok(corpus_from_str(text, label))
}

pub fn corpus_from_str(text: &str, label: &str) -> Corpus {
    let space = CharSpace::english();
    let mut corpus = Corpus {
        source_label: label.to_string(),
        ..Corpus::default()
    };
    for line in text.split('\n') {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        if space.profile(line).is_ok() {
            corpus.entries.push(line.to_string());
        } else {
            corpus.skipped += 1;
        }
    }
    corpus
}

/// One score per entry, in entry order.
pub fn score_corpus(corpus: &Corpus, exec: Execution) -> Vec<PasswordScore> {
    map_ordered(&corpus.entries, exec, |entry| {
        crate::metrics::score_password(entry).expect("corpus entries are profiled on load")
    })
}

/// Character frequencies over all entries, indexed like
/// [`CharSpace::chars`] of the canonical space.
pub fn empirical_char_distribution(corpus: &Corpus) -> Result<Distribution, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let space = CharSpace::english();
    let index: Vec<char> = space.chars().collect();
    let mut counts = vec![0u64; index.len()];
    for c in corpus.entries.iter().flat_map(|e| e.chars()) {
        if let Some(i) = index.iter().position(|&k| k == c) {
            counts[i] += 1;
        }
    }
    Distribution::from_counts(&counts).map_err(|_| CorpusError::EmptyInput)
}

/// Empirical cumulative distribution evaluated at the distinct sample values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Builds the exact empirical CDF: `F(x) = #{v <= x} / n` at each distinct `x`.
pub fn cdf(values: &[f64]) -> Result<CdfSeries, CorpusError> {
    if values.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CorpusError::NonFiniteValue(bad));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == x => last.1 = f,
            _ => points.push((x, f)),
        }
    }
    Ok(CdfSeries {
        label: String::new(),
        points,
    })
}

impl CdfSeries {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Step-function value `F(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|p| p.0 <= x);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    /// Smallest `x` with `F(x) >= q`.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        self.points.iter().find(|p| p.1 >= q).map(|p| p.0)
    }

    pub fn median(&self) -> Option<f64> {
        self.quantile(0.5)
    }

    /// Evaluates the CDF on `n` evenly spaced points spanning the observed
    /// range. The last grid point always carries `F = 1`.
    pub fn resample(&self, n: usize) -> CdfSeries {
        let (Some(first), Some(last)) = (self.points.first(), self.points.last()) else {
            return self.clone();
        };
        if n < 2 || first.0 == last.0 {
            return CdfSeries {
                label: self.label.clone(),
                points: vec![*last],
            };
        }
        let span = last.0 - first.0;
        let points = (0..n)
            .map(|i| {
                let x = if i == n - 1 {
                    last.0
                } else {
                    first.0 + span * i as f64 / (n - 1) as f64
                };
                (x, self.eval(x))
            })
            .collect();
        CdfSeries {
            label: self.label.clone(),
            points,
        }
    }

    /// Rounds to `decimals` places, merging points whose rounded `x`
    /// coincide (the merged point keeps the larger `F`).
    pub fn quantized(&self, decimals: usize) -> CdfSeries {
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(self.points.len());
        for &(x, f) in &self.points {
            let (x, f) = (round_to(x, decimals), round_to(f, decimals));
            match points.last_mut() {
                Some(last) if last.0 == x => last.1 = last.1.max(f),
                _ => points.push((x, f)),
            }
        }
        CdfSeries {
            label: self.label.clone(),
            points,
        }
    }

    /// Checks the CDF shape: `x` strictly increasing, `F` non-decreasing
    /// within `[0, 1]` and ending at 1.
    pub fn is_well_formed(&self) -> bool {
        let Some(last) = self.points.last() else {
            return false;
        };
        let increasing = self
            .points
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1);
        let bounded = self.points.iter().all(|p| (0.0..=1.0).contains(&p.1));
        increasing && bounded && last.1 == 1.0
    }
}

fn round_to(v: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (v * scale).round() / scale + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonSeries {
    label: String,
    points: Vec<[f64; 2]>,
}

/// Writes the series as CSV (`label,x,cdf`) or JSON
/// (`[{"label": .., "points": [[x, F], ..]}, ..]`) at six decimals.
pub fn export_report<W: Write>(
    series: &[CdfSeries],
    format: ReportFormat,
    sink: W,
) -> Result<(), CorpusError> {
    if series.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let quantized: Vec<CdfSeries> = series
        .iter()
        .map(|s| s.quantized(REPORT_DECIMALS))
        .collect();
    match format {
        ReportFormat::Csv => write_csv(&quantized, sink),
        ReportFormat::Json => write_json(&quantized, sink),
    }
}

fn write_csv<W: Write>(series: &[CdfSeries], sink: W) -> Result<(), CorpusError> {
    let mut writer = csv::Writer::from_writer(sink);
    let sink_err = |e: csv::Error| CorpusError::SinkFailure(io::Error::other(e));
    writer
        .write_record(["label", "x", "cdf"])
        .map_err(sink_err)?;
    for s in series {
        for &(x, f) in &s.points {
            writer
                .write_record([
                    s.label.as_str(),
                    &format!("{x:.REPORT_DECIMALS$}"),
                    &format!("{f:.REPORT_DECIMALS$}"),
                ])
                .map_err(sink_err)?;
        }
    }
    writer.flush().map_err(CorpusError::SinkFailure)
}

fn write_json<W: Write>(series: &[CdfSeries], mut sink: W) -> Result<(), CorpusError> {
    let body: Vec<JsonSeries> = series
        .iter()
        .map(|s| JsonSeries {
            label: s.label.clone(),
            points: s.points.iter().map(|&(x, f)| [x, f]).collect(),
        })
        .collect();
    serde_json::to_writer_pretty(&mut sink, &body)
        .map_err(|e| CorpusError::SinkFailure(io::Error::other(e)))?;
    sink.write_all(b"\n").map_err(CorpusError::SinkFailure)?;
    sink.flush().map_err(CorpusError::SinkFailure)
}

/// Reads a CSV report back into series, grouping consecutive rows by label.
pub fn parse_report_csv<R: Read>(source: R) -> Result<Vec<CdfSeries>, CorpusError> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::MalformedReport(e.to_string()))?;
    if headers != vec!["label", "x", "cdf"] {
        return Err(CorpusError::MalformedReport(format!(
            "unexpected header {headers:?}"
        )));
    }
    let mut out: Vec<CdfSeries> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CorpusError::MalformedReport(e.to_string()))?;
        let number = |i: usize| -> Result<f64, CorpusError> {
            f64::from_str(&record[i])
                .map_err(|e| CorpusError::MalformedReport(format!("{:?}: {e}", &record[i])))
        };
        let point = (number(1)?, number(2)?);
        match out.last_mut() {
            Some(s) if s.label == record[0] => s.points.push(point),
            _ => out.push(CdfSeries {
                label: record[0].to_string(),
                points: vec![point],
            }),
        }
    }
    Ok(out)
}

pub fn parse_report_json<R: Read>(source: R) -> Result<Vec<CdfSeries>, CorpusError> {
    let body: Vec<JsonSeries> =
        serde_json::from_reader(source).map_err(|e| CorpusError::MalformedReport(e.to_string()))?;
    Ok(body
        .into_iter()
        .map(|s| CdfSeries {
            label: s.label,
            points: s.points.into_iter().map(|[x, f]| (x, f)).collect(),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// One symbol per byte, alphabet 256.
    RawBytes,
    /// Eight bits per byte, most significant bit first.
    PackedBits,
    /// ASCII `'0'`/`'1'`; whitespace is ignored.
    AsciiBinary,
}

impl FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw-bytes" => Ok(SampleFormat::RawBytes),
            "packed-bits" => Ok(SampleFormat::PackedBits),
            "ascii-binary" => Ok(SampleFormat::AsciiBinary),
            other => Err(format!("unknown sample format {other:?}")),
        }
    }
}

pub fn decode_samples<R: Read>(
    mut source: R,
    format: SampleFormat,
) -> Result<SampleSequence, CorpusError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let seq = match format {
        SampleFormat::RawBytes => SampleSequence::new(bytes, 256)?,
        SampleFormat::PackedBits => {
            let bits = bytes
                .iter()
                .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
                .collect();
            SampleSequence::binary(bits)?
        }
        SampleFormat::AsciiBinary => {
            let mut bits = Vec::with_capacity(bytes.len());
            for (offset, &byte) in bytes.iter().enumerate() {
                match byte {
                    b'0' => bits.push(0),
                    b'1' => bits.push(1),
                    b if b.is_ascii_whitespace() => {}
                    _ => return Err(CorpusError::MalformedSample { offset, byte }),
                }
            }
            SampleSequence::binary(bits)?
        }
    };
    Ok(seq)
}
