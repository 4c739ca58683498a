//! Daily rank-ordered ticker sentences.
//!
//! Each trading day becomes one sentence: the tickers with a present change
//! that day, sorted by the change (descending by default), ties broken by
//! ticker name. Days with fewer than two tokens carry no skip-gram pairs and
//! are dropped.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{parse_date, ChangePanel};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("panel has no days or no tickers")]
    EmptyPanel,
    #[error("corpus line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Order {
    /// Biggest gainer first.
    #[default]
    #[serde(rename = "desc")]
    Descending,
    #[serde(rename = "asc")]
    Ascending,
}

impl std::str::FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desc" | "descending" => Ok(Order::Descending),
            "asc" | "ascending" => Ok(Order::Ascending),
            other => Err(format!("unknown order '{other}', expected desc or asc")),
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Order::Descending => "desc",
            Order::Ascending => "asc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub date: NaiveDate,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentenceCorpus {
    pub sentences: Vec<Sentence>,
    /// Token -> number of retained sentences containing it.
    pub vocabulary: BTreeMap<String, u64>,
    pub order: Order,
    /// Days dropped for having fewer than two present tokens.
    pub dropped_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub sentences: usize,
    pub vocabulary: usize,
    pub min_length: usize,
    pub max_length: usize,
    pub mean_length: f64,
}

fn rank_day(tickers: &[String], day: &[Option<f64>], order: Order) -> Vec<String> {
    let mut present: Vec<(f64, &str)> = day
        .iter()
        .zip(tickers)
        .filter_map(|(v, t)| v.map(|v| (v, t.as_str())))
        .collect();
    present.sort_by(|a, b| {
        let by_value = match order {
            Order::Descending => b.0.total_cmp(&a.0),
            Order::Ascending => a.0.total_cmp(&b.0),
        };
        by_value.then_with(|| a.1.cmp(b.1))
    });
    present.into_iter().map(|(_, t)| t.to_string()).collect()
}

pub fn build_sentences(panel: &ChangePanel, order: Order) -> Result<SentenceCorpus, CorpusError> {
    if panel.is_empty() {
        return Err(CorpusError::EmptyPanel);
    }
    let ranked: Vec<Sentence> = (0..panel.n_days())
        .into_par_iter()
        .map(|t| Sentence {
            date: panel.dates()[t],
            tokens: rank_day(panel.tickers(), panel.day(t), order),
        })
        .collect();

    let before = ranked.len();
    let sentences: Vec<Sentence> = ranked.into_iter().filter(|s| s.tokens.len() >= 2).collect();
    let dropped_days = before - sentences.len();
    Ok(SentenceCorpus {
        vocabulary: count_tokens(&sentences),
        sentences,
        order,
        dropped_days,
    })
}

fn count_tokens(sentences: &[Sentence]) -> BTreeMap<String, u64> {
    let mut vocab = BTreeMap::new();
    for s in sentences {
        for t in &s.tokens {
            *vocab.entry(t.clone()).or_insert(0) += 1;
        }
    }
    vocab
}

pub fn corpus_stats(corpus: &SentenceCorpus) -> CorpusStats {
    let lengths: Vec<usize> = corpus.sentences.iter().map(|s| s.tokens.len()).collect();
    if lengths.is_empty() {
        return CorpusStats {
            sentences: 0,
            vocabulary: corpus.vocabulary.len(),
            min_length: 0,
            max_length: 0,
            mean_length: 0.0,
        };
    }
    CorpusStats {
        sentences: lengths.len(),
        vocabulary: corpus.vocabulary.len(),
        min_length: *lengths.iter().min().unwrap(),
        max_length: *lengths.iter().max().unwrap(),
        mean_length: lengths.iter().sum::<usize>() as f64 / lengths.len() as f64,
    }
}

impl SentenceCorpus {
    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// `<ISO-date>\t<tok> <tok> ...`, one line per sentence.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for s in &self.sentences {
            writeln!(out, "{}\t{}", s.date, s.tokens.join(" "))?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("tokens are UTF-8")
    }

    /// Content hash of the serialized corpus.
    pub fn fingerprint(&self) -> String {
        crate::sha256_hex(self.to_text().as_bytes())
    }

    /// Parse the text form back. The order is not stored in the text and must be supplied.
    pub fn read_text<R: BufRead>(reader: R, order: Order) -> Result<Self, CorpusError> {
        let mut sentences = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: &str| CorpusError::Format {
                line: i + 1,
                message: message.to_string(),
            };
            let (date, rest) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
            let date = parse_date(date).ok_or_else(|| bad("bad date"))?;
            let tokens: Vec<String> = rest.split(' ').filter(|t| !t.is_empty()).map(String::from).collect();
            sentences.push(Sentence { date, tokens });
        }
        Ok(SentenceCorpus {
            vocabulary: count_tokens(&sentences),
            sentences,
            order,
            dropped_days: 0,
        })
    }
}
