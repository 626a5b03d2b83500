//! Spambase-style corpus ingestion, feature quantization and the spam
//! outlier experiment.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::harness::{sweep, DataModel, Provenance, SweepResult, TrialPlan};
use crate::hypothesis::Model;
use crate::sequential::{Horizon, TestConfig};

/// Column names of the spambase file, label last.
pub const SPAMBASE_COLUMNS: [&str; 58] = [
    "word_freq_make",
    "word_freq_address",
    "word_freq_all",
    "word_freq_3d",
    "word_freq_our",
    "word_freq_over",
    "word_freq_remove",
    "word_freq_internet",
    "word_freq_order",
    "word_freq_mail",
    "word_freq_receive",
    "word_freq_will",
    "word_freq_people",
    "word_freq_report",
    "word_freq_addresses",
    "word_freq_free",
    "word_freq_business",
    "word_freq_email",
    "word_freq_you",
    "word_freq_credit",
    "word_freq_your",
    "word_freq_font",
    "word_freq_000",
    "word_freq_money",
    "word_freq_hp",
    "word_freq_hpl",
    "word_freq_george",
    "word_freq_650",
    "word_freq_lab",
    "word_freq_labs",
    "word_freq_telnet",
    "word_freq_857",
    "word_freq_data",
    "word_freq_415",
    "word_freq_85",
    "word_freq_technology",
    "word_freq_1999",
    "word_freq_parts",
    "word_freq_pm",
    "word_freq_direct",
    "word_freq_cs",
    "word_freq_meeting",
    "word_freq_original",
    "word_freq_project",
    "word_freq_re",
    "word_freq_edu",
    "word_freq_table",
    "word_freq_conference",
    "char_freq_;",
    "char_freq_(",
    "char_freq_[",
    "char_freq_!",
    "char_freq_$",
    "char_freq_#",
    "capital_run_length_average",
    "capital_run_length_longest",
    "capital_run_length_total",
    "spam",
];

/// Default feature: frequency of the word "hp".
pub const DEFAULT_FEATURE: &str = "word_freq_hp";

/// Number of quantization levels used by the experiment.
pub const LEVELS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Spam,
    Nonspam,
}

/// Which column to read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSelector {
    Index(usize),
    Name(String),
}

impl Default for FeatureSelector {
    fn default() -> Self {
        FeatureSelector::Name(DEFAULT_FEATURE.into())
    }
}

impl fmt::Display for FeatureSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureSelector::Index(i) => write!(f, "column {i}"),
            FeatureSelector::Name(n) => write!(f, "column '{n}'"),
        }
    }
}

/// One feature column with labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub feature: String,
    pub values: Vec<f64>,
    pub labels: Vec<Label>,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn pool(&self, label: Label) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.labels)
            .filter(move |(_, &l)| l == label)
            .map(|(&v, _)| v)
    }
}

pub fn load_corpus(path: &Path, selector: &FeatureSelector) -> Result<LabeledCorpus> {
    let file = std::fs::File::open(path).map_err(|e| {
        Error::Data {
            line: None,
            msg: format!("cannot open {}: {e}", path.display()),
        }
    })?;
    parse_corpus(file, selector)
}

/// Parses a comma-separated file: numeric feature columns, 0/1 label last.
/// A first row containing a non-numeric cell is taken as a header.
pub fn parse_corpus<R: Read>(reader: R, selector: &FeatureSelector) -> Result<LabeledCorpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records();
    let first = match rows.next() {
        Some(r) => r.map_err(|e| Error::data(Some(1), e.to_string()))?,
        None => return Err(Error::data(None, "empty file")),
    };
    let is_header = first.iter().any(|c| c.parse::<f64>().is_err());
    let width = first.len();
    if width < 2 {
        return Err(Error::data(Some(1), "expected at least one feature column and a label"));
    }
    let names: Vec<String> = if is_header {
        first.iter().map(str::to_string).collect()
    } else if width == SPAMBASE_COLUMNS.len() {
        SPAMBASE_COLUMNS.iter().map(|s| s.to_string()).collect()
    } else {
        (0..width).map(|i| format!("column_{i}")).collect()
    };
    let column = match selector {
        FeatureSelector::Index(i) if *i + 1 < width => *i,
        FeatureSelector::Index(i) => {
            return Err(Error::data(
                None,
                format!("feature index {i} out of range: {} feature columns", width - 1),
            ))
        }
        FeatureSelector::Name(n) => names[..width - 1]
            .iter()
            .position(|c| c == n)
            .ok_or_else(|| Error::data(None, format!("missing column '{n}'")))?,
    };

    let mut corpus = LabeledCorpus {
        feature: names[column].clone(),
        values: Vec::new(),
        labels: Vec::new(),
    };
    let mut push = |record: &csv::StringRecord, line: usize| -> Result<()> {
        if record.len() != width {
            return Err(Error::data(
                Some(line),
                format!("expected {width} cells, found {}", record.len()),
            ));
        }
        let mut value = 0.0;
        for (j, cell) in record.iter().enumerate().take(width - 1) {
            let v: f64 = cell.parse().map_err(|_| {
                Error::data(Some(line), format!("non-numeric cell '{cell}' in column {}", names[j]))
            })?;
            if j == column {
                if !(0.0..=100.0).contains(&v) {
                    return Err(Error::data(
                        Some(line),
                        format!("value {v} of {} outside [0, 100]", names[j]),
                    ));
                }
                value = v;
            }
        }
        let raw = &record[width - 1];
        let label = match raw.parse::<f64>() {
            Ok(x) if x == 1.0 => Label::Spam,
            Ok(x) if x == 0.0 => Label::Nonspam,
            _ => return Err(Error::data(Some(line), format!("label '{raw}' is not 0 or 1"))),
        };
        corpus.values.push(value);
        corpus.labels.push(label);
        Ok(())
    };
    if !is_header {
        push(&first, 1)?;
    }
    for (k, record) in rows.enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| Error::data(Some(line), e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        push(&record, line)?;
    }
    if corpus.is_empty() {
        return Err(Error::data(None, "no data rows"));
    }
    log::info!(
        "loaded {} rows ({} spam, {} nonspam) from {}",
        corpus.len(),
        corpus.count(Label::Spam),
        corpus.count(Label::Nonspam),
        corpus.feature
    );
    Ok(corpus)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantizerStrategy {
    /// Level 0 holds exact zeros; the rest split the nonzero values at
    /// their quantiles.
    #[default]
    ZeroInflated,
    /// Equal-width bins over [0, 100].
    EqualWidth,
}

/// Maps a value to the number of edges strictly below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub edges: Vec<f64>,
}

impl Quantizer {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config(format!(
                "quantizer edges must be strictly increasing, got {edges:?}"
            )));
        }
        Ok(Quantizer { edges })
    }

    pub fn levels(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn level(&self, v: f64) -> usize {
        self.edges.iter().take_while(|&&e| e < v).count()
    }

    /// Empirical distribution of the quantized values.
    pub fn distribution(&self, values: impl Iterator<Item = f64>) -> Result<Distribution> {
        let mut counts = vec![0.0; self.levels()];
        for v in values {
            counts[self.level(v)] += 1.0;
        }
        Distribution::normalized(counts)
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn fit_quantizer(corpus: &LabeledCorpus, levels: usize, strategy: QuantizerStrategy) -> Result<Quantizer> {
    if levels < 2 {
        return Err(Error::config("at least two levels are needed"));
    }
    let mut distinct: Vec<f64> = corpus.values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < levels {
        return Err(Error::data(
            None,
            format!(
                "{} has {} distinct values, fewer than {levels} levels",
                corpus.feature,
                distinct.len()
            ),
        ));
    }
    let edges = match strategy {
        QuantizerStrategy::EqualWidth => (1..levels)
            .map(|j| 100.0 * j as f64 / levels as f64)
            .collect(),
        QuantizerStrategy::ZeroInflated => {
            let mut nonzero: Vec<f64> = corpus.values.iter().copied().filter(|&v| v > 0.0).collect();
            nonzero.sort_by(f64::total_cmp);
            let parts = levels - 1;
            let mut edges = vec![0.0];
            edges.extend((1..parts).map(|j| quantile(&nonzero, j as f64 / parts as f64)));
            edges
        }
    };
    Quantizer::new(edges).map_err(|_| {
        Error::data(None, format!("{} cannot be split into {levels} distinct levels", corpus.feature))
    })
}

/// Settings of the spam experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamExperiment {
    pub thresholds: Vec<f64>,
    pub trials_per_hypothesis: u64,
    pub seed: u64,
    #[serde(default)]
    pub strategy: QuantizerStrategy,
    /// Draw the typical sequences from the spam pool instead.
    #[serde(default)]
    pub swap_pools: bool,
}

/// Fitted pieces of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamOutcome {
    pub quantizer: Quantizer,
    /// Outlier distribution (spam pool unless swapped).
    pub mu: Distribution,
    /// Typical distribution (nonspam pool unless swapped).
    pub pi: Distribution,
    pub sweep: SweepResult,
}

/// Universal identical-model test with `M = 5`, `K = 2` and `f(T) = T^5`;
/// every sequence draws i.i.d. with replacement from its label pool.
pub fn run_spam_experiment(
    corpus: &LabeledCorpus,
    quantizer: &Quantizer,
    experiment: &SpamExperiment,
    jobs: usize,
) -> Result<SpamOutcome> {
    if let Some(&t) = experiment.thresholds.iter().find(|&&t| !(t > 1.0)) {
        return Err(Error::config(format!("thresholds must exceed 1, got {t}")));
    }
    let first = *experiment
        .thresholds
        .first()
        .ok_or_else(|| Error::config("no thresholds given"))?;
    for label in [Label::Spam, Label::Nonspam] {
        if corpus.count(label) == 0 {
            return Err(Error::data(None, format!("no {label:?} rows in corpus")));
        }
    }
    let spam = quantizer.distribution(corpus.pool(Label::Spam))?;
    let ham = quantizer.distribution(corpus.pool(Label::Nonspam))?;
    let (mu, pi) = if experiment.swap_pools { (ham, spam) } else { (spam, ham) };
    let mut config = TestConfig::universal(5, 2, Model::Identical, quantizer.levels(), first);
    config.horizon = Horizon::Power(5.0);
    let plan = TrialPlan::new(
        config,
        DataModel::Identical {
            mu: mu.clone(),
            pi: pi.clone(),
        },
        experiment.trials_per_hypothesis,
        experiment.seed,
    );
    let sweep = sweep(&plan, &experiment.thresholds, jobs)?;
    Ok(SpamOutcome {
        quantizer: quantizer.clone(),
        mu,
        pi,
        sweep,
    })
}

/// Slope table with one row per outlier count and one column per threshold.
pub fn write_table_csv<W: Write>(mut w: W, outcome: &SpamOutcome, provenance: &Provenance) -> Result<()> {
    provenance.write(&mut w)?;
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["outliers".to_string()];
    header.extend(outcome.sweep.results.iter().map(|r| format!("T={}", r.threshold)));
    csv.write_record(&header)?;
    for size in [1usize, 2] {
        let mut row = vec![size.to_string()];
        row.extend(
            outcome
                .sweep
                .results
                .iter()
                .map(|r| r.class(size).map(|c| c.slope).unwrap_or(f64::NAN).to_string()),
        );
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}
