use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::simulate::RunManifest;
use super::write_file;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub observable: String,
    pub chains: u64,
    pub records: u64,
    pub mean: f64,
    pub std_err: f64,
}

const BATCHES: usize = 20;

fn read_stream(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        for (k, v) in rec.iter().enumerate() {
            let x: f64 = v.parse().map_err(|_| Error::Parse(format!("{}: bad number `{v}`", path.display())))?;
            cols[k].push(x);
        }
    }
    Ok((header, cols))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Standard error of a single correlated stream by batch means.
fn batch_se(xs: &[f64]) -> f64 {
    let size = xs.len() / BATCHES;
    if size == 0 {
        return sample_sd(xs) / (xs.len().max(1) as f64).sqrt();
    }
    let means: Vec<f64> = xs.chunks_exact(size).take(BATCHES).map(mean).collect();
    sample_sd(&means) / (means.len() as f64).sqrt()
}

/// Summary statistics of every observable per constraint, computed from the
/// raw streams listed in the manifest. Chains are combined in manifest order,
/// so the result does not depend on how they were scheduled.
pub fn reduce_run_dir(dir: &Path) -> Result<Vec<SummaryRow>> {
    let manifest = RunManifest::load(dir)?;
    let mut labels: Vec<String> = Vec::new();
    for r in &manifest.runs {
        if !labels.contains(&r.label) {
            labels.push(r.label.clone());
        }
    }
    let mut rows = Vec::new();
    for label in labels {
        let mut header: Option<Vec<String>> = None;
        let mut per_chain: Vec<Vec<Vec<f64>>> = Vec::new();
        for r in manifest.runs.iter().filter(|r| r.label == label) {
            let (h, cols) = read_stream(&dir.join(&r.stream))?;
            match &header {
                None => header = Some(h),
                Some(prev) if *prev != h => {
                    return Err(Error::Parse(format!("{}: header differs from sibling streams", r.stream)));
                }
                _ => {}
            }
            per_chain.push(cols);
        }
        let header = header.unwrap_or_default();
        for (k, name) in header.iter().enumerate().filter(|(_, n)| n.as_str() != "step") {
            let chain_means: Vec<f64> = per_chain.iter().map(|c| mean(&c[k])).collect();
            let records: u64 = per_chain.iter().map(|c| c[k].len() as u64).sum();
            let se = if per_chain.len() >= 2 {
                sample_sd(&chain_means) / (per_chain.len() as f64).sqrt()
            } else {
                per_chain.first().map_or(0.0, |c| batch_se(&c[k]))
            };
            rows.push(SummaryRow {
                label: label.clone(),
                observable: name.clone(),
                chains: per_chain.len() as u64,
                records,
                mean: mean(&chain_means),
                std_err: se,
            });
        }
    }
    Ok(rows)
}

pub fn write_summary(dir: &Path, spec_hash: &str, rows: &[SummaryRow]) -> Result<()> {
    let mut text = format!("# spec_hash: {spec_hash}\nlabel,observable,chains,records,mean,std_err\n");
    for r in rows {
        writeln!(text, "{},{},{},{},{},{}", r.label, r.observable, r.chains, r.records, r.mean, r.std_err).unwrap();
    }
    write_file(&dir.join("summary.csv"), text.as_bytes())
}
