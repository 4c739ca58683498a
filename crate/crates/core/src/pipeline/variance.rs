use serde::{Deserialize, Serialize};

use super::{PipelineError, Result, SectorMap};
use crate::corpus::SentenceCorpus;
use crate::sgns::{train, Embedding, Hyperparams};
use crate::stats::{cumulative_variance, pca, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub high_dim: usize,
    /// `(m, cumulative explained variance of the first m components)`.
    pub points: Vec<(usize, f64)>,
    /// Per-component explained variance ratios, largest first.
    pub ratios: Vec<f64>,
}

impl VarianceCurve {
    pub fn at(&self, m: usize) -> Option<f64> {
        self.points.iter().find(|(k, _)| *k == m).map(|(_, v)| *v)
    }
}

fn vectors(e: &Embedding) -> Matrix {
    Matrix::from_vec(e.len(), e.dim(), e.vectors().to_vec())
}

/// PCA of an already trained embedding, evaluated at each `m`.
pub fn variance_curve(e: &Embedding, m_values: &[usize]) -> Result<VarianceCurve> {
    if let Some(&m) = m_values.iter().find(|&&m| m > e.dim()) {
        return Err(PipelineError::InvalidConfig(format!(
            "component count {m} exceeds embedding dimension {}",
            e.dim()
        )));
    }
    let r = pca(&vectors(e), true)?;
    let points = m_values
        .iter()
        .map(|&m| Ok((m, cumulative_variance(&r, m)?)))
        .collect::<Result<_>>()?;
    Ok(VarianceCurve {
        high_dim: e.dim(),
        points,
        ratios: r.explained_variance_ratio,
    })
}

/// Train one embedding at `high_dim` and report its variance curve. Returns
/// the embedding too so callers can reuse it.
pub fn variance_analysis(
    corpus: &SentenceCorpus,
    high_dim: usize,
    hp: &Hyperparams,
    m_values: &[usize],
) -> Result<(VarianceCurve, Embedding)> {
    let hp = Hyperparams {
        dimension: high_dim,
        ..hp.clone()
    };
    let e = train(corpus, &hp)?;
    Ok((variance_curve(&e, m_values)?, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub ticker: String,
    pub sector: String,
    pub pc1: f64,
    pub pc2: f64,
}

/// Scores on the first two principal components, in vocabulary order. A
/// one-dimensional embedding has no second component and gets `pc2 = 0`.
pub fn sector_projection(e: &Embedding, sectors: &SectorMap) -> Result<Vec<ProjectionRow>> {
    let x = vectors(e);
    let r = pca(&x, true)?;
    let m = e.dim().min(2);
    let scores = r.transform(&x, m);
    e.vocabulary()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let sector = sectors.get(t).ok_or_else(|| PipelineError::MissingSector(t.clone()))?;
            Ok(ProjectionRow {
                ticker: t.clone(),
                sector: sector.clone(),
                pc1: scores[(i, 0)],
                pc2: if m > 1 { scores[(i, 1)] } else { 0.0 },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Embedding, SectorMap) {
        let vocab: Vec<String> = ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
        let v = vec![1.0, 2.0, 0.5, 3.0, 1.0, 0.0, -1.0, 2.5, 1.5, 1.0, 2.0, 0.5, -2.0, 0.0, 1.0];
        let sectors = vocab.iter().map(|t| (t.clone(), "S".to_string())).collect();
        (Embedding::new(vocab, 3, v, None), sectors)
    }

    #[test]
    fn projection_is_centered_and_ordered() {
        let (e, s) = toy();
        let rows = sector_projection(&e, &s).unwrap();
        let n = rows.len() as f64;
        let m1 = rows.iter().map(|r| r.pc1).sum::<f64>() / n;
        let m2 = rows.iter().map(|r| r.pc2).sum::<f64>() / n;
        assert!(m1.abs() < 1e-8 && m2.abs() < 1e-8);
        let v1: f64 = rows.iter().map(|r| r.pc1 * r.pc1).sum();
        let v2: f64 = rows.iter().map(|r| r.pc2 * r.pc2).sum();
        assert!(v1 >= v2);
        // rows A and D share a vector
        assert_eq!((rows[0].pc1, rows[0].pc2), (rows[3].pc1, rows[3].pc2));
    }

    #[test]
    fn curve_ends_at_one() {
        let (e, _) = toy();
        let c = variance_curve(&e, &[1, 2, 3]).unwrap();
        assert!((c.at(3).unwrap() - 1.0).abs() < 1e-10);
        assert!(c.points.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(variance_curve(&e, &[4]).is_err());
    }
}
