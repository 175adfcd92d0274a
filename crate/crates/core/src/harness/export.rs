use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::classify::{Classification, CLASS_LABELS};
use super::config::ExperimentConfig;
use super::ensemble::FidelityTrace;
use super::sweep::SweepTable;

pub fn build_id() -> String {
    format!(
        "{}-{}-{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        if cfg!(debug_assertions) { "debug" } else { "release" }
    )
}

/// SHA-256 of the canonical TOML form of `config`.
pub fn config_hash(config: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml().as_bytes()))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Columns `time_per_kappa,mean_fidelity,stderr,n_effective`.
pub fn write_fidelity_csv(path: &Path, trace: &FidelityTrace) -> Result<()> {
    let rows = (0..trace.times.len()).map(|k| {
        [
            trace.times[k].to_string(),
            trace.mean[k].to_string(),
            trace.stderr[k].to_string(),
            trace.n_effective.to_string(),
        ]
    });
    write_rows(path, &["time_per_kappa", "mean_fidelity", "stderr", "n_effective"], rows)
}

/// Columns `parameter_name,value,fidelity_at_kt350,stderr`.
pub fn write_sweep_csv(path: &Path, table: &SweepTable) -> Result<()> {
    let rows = table.rows.iter().map(|r| {
        [
            table.param.name().to_string(),
            r.value.to_string(),
            r.fidelity.to_string(),
            r.stderr.to_string(),
        ]
    });
    write_rows(path, &["parameter_name", "value", "fidelity_at_kt350", "stderr"], rows)
}

/// Columns `chi_per_kappa,outcome_separation`.
pub fn write_separation_csv(path: &Path, table: &SweepTable) -> Result<()> {
    let rows = table
        .separation
        .iter()
        .map(|(c, s)| [c.to_string(), s.to_string()]);
    write_rows(path, &["chi_per_kappa", "outcome_separation"], rows)
}

/// Class counts (`class_counts.csv`) and class-mean traces (`class_currents.csv`).
pub fn write_classification(dir: &Path, c: &Classification) -> Result<Vec<PathBuf>> {
    let counts = dir.join("class_counts.csv");
    let mut rows: Vec<[String; 3]> = (0..4)
        .map(|i| [CLASS_LABELS[i].to_string(), c.plateaus[i].to_string(), c.counts[i].to_string()])
        .collect();
    rows.push(["unclassified".into(), String::new(), c.unclassified.to_string()]);
    write_rows(&counts, &["class", "plateau", "count"], rows)?;

    let traces = dir.join("class_currents.csv");
    let mut header = vec!["time_per_kappa".to_string()];
    for l in CLASS_LABELS {
        header.push(format!("current_{l}"));
    }
    for l in CLASS_LABELS {
        header.push(format!("outcome_{l}"));
    }
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..c.times.len()).map(|k| {
        let mut row = vec![c.times[k].to_string()];
        row.extend((0..4).map(|i| c.class_current[i][k].to_string()));
        row.extend((0..4).map(|i| c.class_outcome[i][k].to_string()));
        row
    });
    write_rows(&traces, &header_ref, rows)?;
    Ok(vec![counts, traces])
}

/// Arbitrary table with a caller-supplied header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_rows(
        path,
        header,
        rows.iter().map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>()),
    )
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    build_id: String,
    config_hash: String,
    master_seed: u64,
    outputs: Vec<String>,
    summary: &'a [(String, String)],
    config: &'a ExperimentConfig,
}

/// Writes `provenance.toml` next to the data files.
pub fn write_provenance(
    dir: &Path,
    config: &ExperimentConfig,
    outputs: &[PathBuf],
    summary: &[(String, String)],
) -> Result<PathBuf> {
    let path = dir.join("provenance.toml");
    let p = Provenance {
        build_id: build_id(),
        config_hash: config_hash(config),
        master_seed: config.master_seed,
        outputs: outputs
            .iter()
            .map(|o| o.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
        summary,
        config,
    };
    let text = toml::to_string(&p).map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let t = FidelityTrace {
            times: vec![1.0, 2.0],
            mean: vec![0.5, 0.75],
            stderr: vec![0.1, 0.05],
            n_effective: 10,
        };
        write_fidelity_csv(&path, &t).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "time_per_kappa,mean_fidelity,stderr,n_effective\n1,0.5,0.1,10\n2,0.75,0.05,10\n"
        );
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let path = blocker.join("sub").join("f.csv");
        let t = FidelityTrace {
            times: vec![],
            mean: vec![],
            stderr: vec![],
            n_effective: 0,
        };
        let e = write_fidelity_csv(&path, &t).unwrap_err();
        assert!(e.to_string().contains("file"), "{e}");
    }

    #[test]
    fn hash_tracks_config() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.master_seed += 1;
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
