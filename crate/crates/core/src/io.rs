//! Files: `qsv1` state dumps, JSON and CSV emitters, run directories.
//!
//! Nothing written here carries a timestamp, so rerunning a command with
//! the same configuration reproduces every file byte for byte.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::StateVector;
use crate::vqe::{Ensemble, RunRecord};

pub const TOOLKIT: &str = "globalgate";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `qsv1 <N>` followed by one `re,im` line per amplitude.
pub fn write_qsv1<W: Write>(mut w: W, state: &StateVector) -> Result<()> {
    writeln!(w, "qsv1 {}", state.qubit_count())?;
    for a in state.amplitudes() {
        writeln!(w, "{:.16e},{:.16e}", a.re, a.im)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_qsv1<R: BufRead>(r: R) -> Result<StateVector> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty state file".into()))??;
    let n: usize = header
        .strip_prefix("qsv1 ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Format(format!("bad state header '{header}'")))?;
    if n > StateVector::MAX_QUBITS {
        return Err(Error::Size(format!("state file declares {n} qubits")));
    }
    let mut amps = Vec::with_capacity(1 << n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (re, im) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("line {}: expected 're,im'", i + 2)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))
        };
        amps.push(C64::new(parse(re)?, parse(im)?));
    }
    if amps.len() != 1 << n {
        return Err(Error::Format(format!(
            "{} amplitudes for {n} qubits (expected {})",
            amps.len(),
            1usize << n
        )));
    }
    StateVector::from_amplitudes(amps)
}

pub fn save_state(path: &Path, state: &StateVector) -> Result<()> {
    write_qsv1(BufWriter::new(fs::File::create(path)?), state)
}

pub fn load_state(path: &Path) -> Result<StateVector> {
    read_qsv1(BufReader::new(fs::File::open(path)?))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One CSV file from serializable rows (header from the first row's fields).
pub fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with an explicit header, for tables that may be empty.
pub fn write_csv_with_header<S: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Top-level record that is enough to rerun an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub config: C,
    pub seeds: Vec<u64>,
}

impl<C> Manifest<C> {
    pub fn new(command: &str, config: C, seeds: Vec<u64>) -> Self {
        Self {
            toolkit: TOOLKIT.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            seeds,
        }
    }
}

#[derive(Serialize)]
struct EnergyRow {
    epoch: usize,
    instance: usize,
    energy: f64,
}

#[derive(Serialize)]
struct GammaRow {
    epoch: usize,
    instance: usize,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
pub struct FinalParams {
    pub instance: usize,
    pub seed: u64,
    pub converged: bool,
    pub final_energy: f64,
    pub params: Vec<f64>,
}

impl From<&RunRecord> for FinalParams {
    fn from(r: &RunRecord) -> Self {
        Self {
            instance: r.instance,
            seed: r.seed,
            converged: r.converged,
            final_energy: r.final_energy(),
            params: r.final_params.clone(),
        }
    }
}

/// Writes `energy.csv`, `gamma.csv`, `final_params/<i>.json` and
/// `aggregate.json` into `dir`.
pub fn write_run(dir: &Path, ensemble: &Ensemble) -> Result<()> {
    fs::create_dir_all(dir.join("final_params"))?;
    let energies = ensemble.runs.iter().flat_map(|r| {
        r.energies.iter().enumerate().map(move |(epoch, &energy)| EnergyRow {
            epoch,
            instance: r.instance,
            energy,
        })
    });
    write_csv_with_header(&dir.join("energy.csv"), &["epoch", "instance", "energy"], energies)?;
    let gammas = ensemble.runs.iter().flat_map(|r| {
        r.gamma_samples.iter().map(move |&(epoch, gamma)| GammaRow {
            epoch,
            instance: r.instance,
            gamma,
        })
    });
    write_csv_with_header(&dir.join("gamma.csv"), &["epoch", "instance", "gamma"], gammas)?;
    for r in &ensemble.runs {
        write_json(&dir.join("final_params").join(format!("{}.json", r.instance)), &FinalParams::from(r))?;
    }
    write_json(&dir.join("aggregate.json"), &ensemble.report)?;
    Ok(())
}
