use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Hyperparams, Result, SgnsError};

/// Training provenance, written as a JSON sidecar next to the vector file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMetadata {
    pub hyperparams: Hyperparams,
    pub corpus_fingerprint: String,
    pub pair_count: u64,
    pub wall_clock_seconds: f64,
}

/// One `dim`-dimensional vector per vocabulary token, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    vocabulary: Vec<String>,
    dim: usize,
    vectors: Vec<f64>,
    pub metadata: Option<EmbeddingMetadata>,
}

impl Embedding {
    /// Panics if `vectors.len() != vocabulary.len() * dim`.
    pub fn new(vocabulary: Vec<String>, dim: usize, vectors: Vec<f64>, metadata: Option<EmbeddingMetadata>) -> Self {
        assert_eq!(vectors.len(), vocabulary.len() * dim, "vector storage does not match |V| x d");
        Self {
            vocabulary,
            dim,
            vectors,
            metadata,
        }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.vocabulary.iter().position(|t| t == token)
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.position(token).map(|i| self.row(i))
    }

    /// `Dim1 .. Dimd`.
    pub fn feature_names(&self) -> Vec<String> {
        (1..=self.dim).map(|i| format!("Dim{i}")).collect()
    }

    /// Header `<|V|> <d>`, then `<token>\t<v1>\t...\t<vd>` per row. Values use
    /// shortest round-trip formatting, so [`Embedding::read_text`] is bit-exact.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.vocabulary.len(), self.dim)?;
        for (i, token) in self.vocabulary.iter().enumerate() {
            write!(out, "{token}")?;
            for v in self.row(i) {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let fmt = |line: usize, message: String| SgnsError::Format { line, message };
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(l) => l?,
            None => return Err(fmt(1, "empty file".into())),
        };
        let mut parts = header.split_whitespace();
        let (Some(n), Some(d), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(fmt(1, format!("expected '<|V|> <d>' header, got '{header}'")));
        };
        let n: usize = n.parse().map_err(|_| fmt(1, format!("bad vocabulary size '{n}'")))?;
        let d: usize = d.parse().map_err(|_| fmt(1, format!("bad dimension '{d}'")))?;
        if d == 0 {
            return Err(fmt(1, "dimension must be >= 1".into()));
        }

        let mut vocabulary = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * d);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap_or_default().to_string();
            let values: Vec<&str> = fields.collect();
            if token.is_empty() || values.len() != d {
                return Err(fmt(
                    line_no,
                    format!("expected a token and {d} values, found {} value(s)", values.len()),
                ));
            }
            for v in values {
                vectors.push(v.parse::<f64>().map_err(|_| fmt(line_no, format!("bad number '{v}'")))?);
            }
            vocabulary.push(token);
        }
        if vocabulary.len() != n {
            return Err(fmt(1, format!("header declares {n} rows, file has {}", vocabulary.len())));
        }
        Ok(Self::new(vocabulary, d, vectors, None))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_text(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Writes the metadata sidecar, if the embedding carries metadata.
    pub fn save_metadata(&self, path: &Path) -> Result<()> {
        if let Some(meta) = &self.metadata {
            let json = serde_json::to_string_pretty(meta).expect("metadata serializes");
            std::fs::write(path, json + "\n")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_text(BufReader::new(File::open(path)?))
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    super::model::dot(a, b) / (na * nb)
}

/// The `n` tokens most cosine-similar to `token`, excluding itself.
/// Ties are broken by token name.
pub fn nearest_neighbors(e: &Embedding, token: &str, n: usize) -> Result<Vec<(String, f64)>> {
    let q = e.position(token).ok_or_else(|| SgnsError::UnknownToken(token.to_string()))?;
    if n >= e.len() {
        return Err(SgnsError::InvalidArgument(format!(
            "asked for {n} neighbours of a {}-token vocabulary",
            e.len()
        )));
    }
    let query = e.row(q);
    let mut scored: Vec<(String, f64)> = (0..e.len())
        .filter(|&i| i != q)
        .map(|i| (e.vocabulary[i].clone(), cosine(query, e.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(n);
    Ok(scored)
}
