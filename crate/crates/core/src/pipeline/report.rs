//! Plot-ready CSV/JSON files and the hashed manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PipelineError, ProjectionRow, RegressionExperiment, Result, SweepResult, VarianceCurve};
use crate::classify::ClassifierReport;
use crate::sha256_hex;

pub const MANIFEST: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub files: Vec<ManifestEntry>,
}

/// Whatever subset of results a run produced.
#[derive(Debug, Clone, Default)]
pub struct ReportSet {
    pub sweep: Option<SweepResult>,
    pub variance: Option<VarianceCurve>,
    pub projection: Option<Vec<ProjectionRow>>,
    pub regressions: Vec<RegressionExperiment>,
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<String> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| PipelineError::io(&path, e))?;
    Ok(name.to_string())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

pub fn write_sweep(dir: &Path, s: &SweepResult) -> Result<Vec<String>> {
    let rows = s.dims.iter().zip(&s.accuracy).flat_map(|(d, accs)| {
        s.classifiers
            .iter()
            .zip(accs)
            .map(move |(c, a)| vec![d.to_string(), c.to_string(), a.to_string()])
    });
    let mut files = vec![write(dir, "sweep_accuracy.csv", &csv_bytes(&["dim", "classifier", "accuracy"], rows))?];
    #[derive(Serialize)]
    struct Selection<'a> {
        dims: &'a [usize],
        mean_accuracy: Vec<f64>,
        epsilon: f64,
        selected_dimension: usize,
        majority_baseline: f64,
        seed: u64,
    }
    let sel = Selection {
        dims: &s.dims,
        mean_accuracy: s.mean_accuracy(),
        epsilon: s.epsilon,
        selected_dimension: s.selected,
        majority_baseline: s.majority_baseline,
        seed: s.seed,
    };
    files.push(write(dir, "sweep_selection.json", &json_bytes(&sel))?);
    for r in s.selected_reports() {
        files.push(write_confusion(dir, r)?);
    }
    Ok(files)
}

/// `confusion_<clf>.csv`: one row per true label, one column per predicted label.
pub fn write_confusion(dir: &Path, r: &ClassifierReport) -> Result<String> {
    let mut header = vec!["true_label"];
    header.extend(r.labels.iter().map(String::as_str));
    let rows = r.labels.iter().zip(&r.confusion).map(|(l, counts)| {
        std::iter::once(l.clone())
            .chain(counts.iter().map(usize::to_string))
            .collect()
    });
    write(dir, &format!("confusion_{}.csv", r.kind), &csv_bytes(&header, rows))
}

pub fn write_variance(dir: &Path, c: &VarianceCurve) -> Result<String> {
    let rows = c.points.iter().map(|&(m, cum)| {
        let ratio = c.ratios.get(m.wrapping_sub(1)).copied().unwrap_or(0.0);
        vec![m.to_string(), ratio.to_string(), cum.to_string()]
    });
    write(
        dir,
        "variance_curve.csv",
        &csv_bytes(&["components", "explained_ratio", "cumulative_variance"], rows),
    )
}

pub fn write_projection(dir: &Path, rows: &[ProjectionRow]) -> Result<String> {
    let rows = rows
        .iter()
        .map(|r| vec![r.ticker.clone(), r.sector.clone(), r.pc1.to_string(), r.pc2.to_string()]);
    write(dir, "sector_projection.csv", &csv_bytes(&["ticker", "sector", "pc1", "pc2"], rows))
}

pub fn write_regression(dir: &Path, r: &RegressionExperiment) -> Result<Vec<String>> {
    let t = &r.target;
    let mut files = Vec::new();
    for (kind, s) in [("baseline", &r.baseline), ("augmented", &r.augmented)] {
        files.push(write(dir, &format!("summary_{t}_{kind}.json"), &json_bytes(s))?);
        files.push(write(dir, &format!("summary_{t}_{kind}.txt"), s.render_text().as_bytes())?);
    }
    let imp = &r.importance;
    let rank_of = imp.ranking();
    let rows = rank_of.iter().enumerate().map(|(rank, name)| {
        let j = imp.feature_names.iter().position(|f| f == name).expect("ranked name exists");
        vec![
            (rank + 1).to_string(),
            name.to_string(),
            imp.importances[j].to_string(),
            imp.std[j].to_string(),
            r.impurity_importance[j].to_string(),
        ]
    });
    files.push(write(
        dir,
        &format!("importance_{t}.csv"),
        &csv_bytes(&["rank", "feature", "permutation_importance", "std", "impurity_importance"], rows),
    )?);
    let rows = r.residuals.iter().map(|row| {
        vec![
            row.ticker.clone(),
            row.observed.to_string(),
            row.fitted.to_string(),
            row.residual.to_string(),
        ]
    });
    files.push(write(
        dir,
        &format!("residuals_{t}.csv"),
        &csv_bytes(&["ticker", "observed", "fitted", "residual"], rows),
    )?);
    Ok(files)
}

/// Write every present result into `dir`, then a manifest of exactly those files.
pub fn emit_report(results: &ReportSet, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut files = Vec::new();
    if let Some(s) = &results.sweep {
        files.extend(write_sweep(dir, s)?);
    }
    if let Some(c) = &results.variance {
        files.push(write_variance(dir, c)?);
    }
    if let Some(p) = &results.projection {
        files.push(write_projection(dir, p)?);
    }
    for r in &results.regressions {
        files.extend(write_regression(dir, r)?);
    }
    write_manifest_for(dir, &files)
}

/// Hash the named files (relative to `dir`) and write `manifest.json`.
pub fn write_manifest_for(dir: &Path, names: &[String]) -> Result<Manifest> {
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    let mut files = Vec::with_capacity(names.len());
    for name in names {
        let path = dir.join(&name);
        let bytes = fs::read(&path).map_err(|e| PipelineError::io(&path, e))?;
        files.push(ManifestEntry {
            path: name,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        files,
    };
    write(dir, MANIFEST, &json_bytes(&manifest))?;
    Ok(manifest)
}

/// Manifest of every regular file already in `dir` (not recursive).
pub fn write_manifest(dir: &Path) -> Result<Manifest> {
    let entries = fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| PipelineError::io(dir, e))?;
        let path: PathBuf = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if path.is_file() && name != MANIFEST {
            names.push(name);
        }
    }
    write_manifest_for(dir, &names)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::InvalidConfig(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_results_give_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = emit_report(&ReportSet::default(), dir.path()).unwrap();
        assert!(m.files.is_empty());
        let listed: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(listed, [MANIFEST]);
        assert_eq!(read_manifest(dir.path()).unwrap(), m);
    }

    #[test]
    fn scan_skips_manifest_and_hashes_contents() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.csv"), "x\n").unwrap();
        fs::write(dir.path().join("a.csv"), "abc").unwrap();
        write_manifest(dir.path()).unwrap();
        let m = write_manifest(dir.path()).unwrap();
        let paths: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["a.csv", "b.csv"]);
        assert_eq!(m.files[0].sha256, sha256_hex(b"abc"));
        assert_eq!(m.files[0].bytes, 3);
    }
}
