//! Run files (CSV, one row per step) and the manifest that lists them.
//!
//! Every logged channel is already quantised to 1e-6 by the simulator, so
//! printing with six decimals and parsing back is exact.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use railodm_core::odm::OperationalState;
use railodm_core::sim::{InputCommand, ObservationVector, TraceStep};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::sha256_hex;

pub const HEADER: [&str; 12] = [
    "t_s",
    "pos_m",
    "S",
    "SL",
    "SLS",
    "RoA",
    "ES",
    "state",
    "power",
    "brake",
    "prev_power",
    "prev_brake",
];

pub const MANIFEST_NAME: &str = "manifest.json";
pub const ROUTE_NAME: &str = "route.json";

pub fn run_file_name(index: usize) -> String {
    format!("run_{index:03}.csv")
}

fn record(step: &TraceStep) -> [String; 12] {
    let o = &step.obs;
    [
        format!("{:.6}", step.t_s),
        format!("{:.6}", step.position_m),
        format!("{:.6}", o.s),
        format!("{:.6}", o.sl),
        format!("{:.6}", o.sls),
        format!("{:.6}", o.roa),
        (o.engine_on as u8).to_string(),
        step.state.name().to_string(),
        step.input.power_notch().to_string(),
        step.input.brake_notch().to_string(),
        step.prev_input.power_notch().to_string(),
        step.prev_input.brake_notch().to_string(),
    ]
}

/// Writes the CSV text for a trace. Returns the number of data rows.
pub fn write_steps<W: Write>(out: W, steps: &[TraceStep]) -> Result<usize, csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for s in steps {
        w.write_record(record(s))?;
    }
    w.flush()?;
    Ok(steps.len())
}

pub fn steps_to_csv(steps: &[TraceStep]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(steps.len() * 64 + 80);
    write_steps(&mut buf, steps).expect("writing to memory cannot fail");
    buf
}

pub fn export_run(steps: &[TraceStep], path: &Path) -> Result<usize> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let n = write_steps(&mut out, steps).map_err(|e| csv_error(path, 0, e))?;
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(n)
}

fn csv_error(path: &Path, line: u64, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(line);
    Error::RunFile {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn parse_f64(field: &str, name: &str) -> Result<f64, String> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("{name}: not a finite number: {field:?}"))
}

fn parse_notch(field: &str, name: &str) -> Result<u8, String> {
    field
        .parse::<u8>()
        .map_err(|_| format!("{name}: not a notch: {field:?}"))
}

fn parse_command(p: &str, b: &str, prefix: &str) -> Result<InputCommand, String> {
    let power = parse_notch(p, &format!("{prefix}power"))?;
    let brake = parse_notch(b, &format!("{prefix}brake"))?;
    InputCommand::new(power, brake).map_err(|e| format!("{prefix}input: {e}"))
}

fn parse_record(r: &csv::StringRecord) -> Result<TraceStep, String> {
    if r.len() != HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            HEADER.len(),
            r.len()
        ));
    }
    let t_s = parse_f64(&r[0], "t_s")?;
    let engine_on = match &r[6] {
        "0" => false,
        "1" => true,
        other => return Err(format!("ES: expected 0 or 1, found {other:?}")),
    };
    let state = OperationalState::from_name(&r[7])
        .ok_or_else(|| format!("state: unknown state {:?}", &r[7]))?;
    Ok(TraceStep {
        t_s,
        position_m: parse_f64(&r[1], "pos_m")?,
        obs: ObservationVector {
            t: t_s,
            s: parse_f64(&r[2], "S")?,
            sl: parse_f64(&r[3], "SL")?,
            sls: parse_f64(&r[4], "SLS")?,
            roa: parse_f64(&r[5], "RoA")?,
            engine_on,
        },
        state,
        input: parse_command(&r[8], &r[9], "")?,
        prev_input: parse_command(&r[10], &r[11], "prev_")?,
    })
}

pub fn read_steps<R: Read>(input: R, path: &Path) -> Result<Vec<TraceStep>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = rdr.headers().map_err(|e| csv_error(path, 1, e))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(Error::RunFile {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header must be {}", HEADER.join(",")),
        });
    }
    let mut steps = Vec::new();
    let mut rec = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {
                let line = rec.position().map(|p| p.line()).unwrap_or(0);
                let step = parse_record(&rec).map_err(|message| Error::RunFile {
                    path: path.to_path_buf(),
                    line,
                    message,
                })?;
                steps.push(step);
            }
            Err(e) => return Err(csv_error(path, 0, e)),
        }
    }
    Ok(steps)
}

pub fn import_run(path: &Path) -> Result<Vec<TraceStep>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_steps(std::io::BufReader::new(file), path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub id: usize,
    pub seed: u64,
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub route_file: String,
    pub route_hash: String,
    pub dt: f64,
    pub runs: Vec<RunEntry>,
}

impl Manifest {
    pub fn total_rows(&self) -> usize {
        self.runs.iter().map(|r| r.rows).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_json().as_bytes())
    }

    pub fn run(&self, id: usize) -> Option<&RunEntry> {
        self.runs.iter().find(|r| r.id == id)
    }
}

/// A manifest together with the directory its relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub dir: PathBuf,
    pub path: PathBuf,
}

impl LoadedManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
            what: "manifest",
            problems: vec![e.to_string()],
        })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            manifest,
            dir,
            path: path.to_path_buf(),
        })
    }

    pub fn route_path(&self) -> PathBuf {
        self.dir.join(&self.manifest.route_file)
    }

    pub fn run_path(&self, entry: &RunEntry) -> PathBuf {
        self.dir.join(&entry.file)
    }

    /// Loads one run and checks it against the recorded row count.
    pub fn load_run(&self, entry: &RunEntry) -> Result<Vec<TraceStep>> {
        let path = self.run_path(entry);
        let steps = import_run(&path)?;
        if steps.len() != entry.rows {
            return Err(Error::Mismatch(format!(
                "{}: manifest says {} rows, file has {}",
                path.display(),
                entry.rows,
                steps.len()
            )));
        }
        Ok(steps)
    }
}

pub fn save_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    std::fs::write(path, manifest.to_json()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use railodm_core::sim::generate_run;

    use crate::fixtures::swalwell_proxy;

    fn short_run() -> Vec<TraceStep> {
        let mut steps = generate_run(&swalwell_proxy(), 7, 0.1).unwrap().steps;
        steps.truncate(3000);
        steps
    }

    #[test]
    fn header_and_row_shape() {
        let text = String::from_utf8(steps_to_csv(&short_run())).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        let first = lines.next().unwrap();
        assert_eq!(
            first,
            "0.000000,0.000000,0.000000,15.000000,15.000000,0.000000,0,Engine_Check,0,0,0,0"
        );
    }

    #[test]
    fn round_trip_is_exact() {
        let steps = short_run();
        let bytes = steps_to_csv(&steps);
        let back = read_steps(bytes.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back.len(), steps.len());
        for (a, b) in steps.iter().zip(&back) {
            assert_eq!(a, b);
            assert_eq!(a.obs.roa.to_bits(), b.obs.roa.to_bits());
        }
        assert_eq!(steps_to_csv(&back), bytes);
    }

    #[test]
    fn export_reports_row_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let steps = short_run();
        assert_eq!(export_run(&steps, &path).unwrap(), steps.len());
        assert_eq!(import_run(&path).unwrap(), steps);
    }

    #[test]
    fn bad_state_reports_line() {
        let text = format!("{}\n0.0,0.0,0.0,6.0,15.0,0.0,1,Cruise,0,0,0,0\n0.1,0.0,0.0,6.0,15.0,0.0,1,Coasting,0,0,0,0\n", HEADER.join(","));
        let err = read_steps(text.as_bytes(), Path::new("x.csv")).unwrap_err();
        let Error::RunFile { line, message, .. } = err else {
            panic!("{err}")
        };
        assert_eq!(line, 3);
        assert!(message.contains("unknown state"), "{message}");
    }

    #[test]
    fn both_levers_rejected() {
        let text = format!(
            "{}\n0.0,0.0,0.0,6.0,15.0,0.0,1,Cruise,1,1,0,0\n",
            HEADER.join(",")
        );
        assert!(read_steps(text.as_bytes(), Path::new("x.csv")).is_err());
    }

    #[test]
    fn wrong_header_rejected() {
        let err = read_steps("t,pos\n".as_bytes(), Path::new("x.csv")).unwrap_err();
        assert!(err.to_string().contains("header must be"), "{err}");
    }
}
