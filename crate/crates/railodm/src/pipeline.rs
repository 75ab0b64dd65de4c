//! generate → fit → evaluate, over files on disk.

use std::path::{Path, PathBuf};

use railodm_core::classifier::{fit, FeatureSet, LabeledRow, Variant, WeightTable};
use railodm_core::eval::{evaluate, split_runs, ReportMetadata, TestRow};
use railodm_core::route::RouteSpec;
use railodm_core::sim::{generate_run, TraceStep};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hashing::sha256_hex;
use crate::model_file::{ModelFile, TrainingInfo};
use crate::report_file::ReportDocument;
use crate::route_file::{load_route, route_hash, route_to_json};
use crate::run_file::{
    read_steps, run_file_name, save_manifest, steps_to_csv, LoadedManifest, Manifest, RunEntry,
    MANIFEST_NAME, ROUTE_NAME,
};
use crate::weights_file::weights_hash;

pub const DEFAULT_RUNS: usize = 25;
pub const DEFAULT_TRAIN_COUNT: usize = 20;
/// Base seed; run i gets `DEFAULT_SEED + i`, so the default runs use seeds 1..=25.
pub const DEFAULT_SEED: u64 = 1;

/// Seed of run `i` when generating from `base`.
pub fn run_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}

/// In-memory runs plus the manifest that describes them.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: LoadedManifest,
    pub runs: Vec<Vec<TraceStep>>,
}

impl Dataset {
    /// Loads every run listed in a manifest, verifying each file's hash.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = LoadedManifest::load(manifest_path)?;
        let runs = manifest
            .manifest
            .runs
            .par_iter()
            .map(|entry| {
                let path = manifest.run_path(entry);
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                if sha256_hex(&bytes) != entry.sha256 {
                    return Err(Error::Mismatch(format!(
                        "{}: contents do not match manifest hash",
                        path.display()
                    )));
                }
                let steps = read_steps(bytes.as_slice(), &path)?;
                if steps.len() != entry.rows {
                    return Err(Error::Mismatch(format!(
                        "{}: manifest says {} rows, file has {}",
                        path.display(),
                        entry.rows,
                        steps.len()
                    )));
                }
                Ok(steps)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { manifest, runs })
    }

    pub fn total_rows(&self) -> usize {
        self.runs.iter().map(Vec::len).sum()
    }

    pub fn route(&self) -> Result<RouteSpec> {
        load_route(&self.manifest.route_path())
    }
}

/// Simulates `runs` runs in parallel and writes them, the route and the
/// manifest into `out_dir`.
pub fn generate(
    route: &RouteSpec,
    runs: usize,
    seed: u64,
    dt: f64,
    out_dir: &Path,
) -> Result<Dataset> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let route_path = out_dir.join(ROUTE_NAME);
    std::fs::write(&route_path, route_to_json(route)).map_err(|e| Error::io(&route_path, e))?;

    let results = (0..runs)
        .into_par_iter()
        .map(|i| {
            let s = run_seed(seed, i);
            let run = generate_run(route, s, dt)?;
            let bytes = steps_to_csv(&run.steps);
            let file = run_file_name(i);
            let path = out_dir.join(&file);
            std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            let entry = RunEntry {
                id: i,
                seed: s,
                file,
                rows: run.steps.len(),
                sha256: sha256_hex(&bytes),
            };
            Ok((entry, run.steps))
        })
        .collect::<Result<Vec<_>>>()?;

    let (entries, steps): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let manifest = Manifest {
        route_file: ROUTE_NAME.into(),
        route_hash: route_hash(route),
        dt,
        runs: entries,
    };
    let path = out_dir.join(MANIFEST_NAME);
    save_manifest(&manifest, &path)?;
    Ok(Dataset {
        manifest: LoadedManifest {
            manifest,
            dir: out_dir.to_path_buf(),
            path,
        },
        runs: steps,
    })
}

pub fn fit_dataset(
    ds: &Dataset,
    train_count: usize,
    split_seed: u64,
    features: &FeatureSet,
) -> Result<ModelFile> {
    let m = &ds.manifest.manifest;
    let split = split_runs(ds.runs.len(), train_count, split_seed)?;
    let rows: Vec<LabeledRow> = split
        .train
        .iter()
        .flat_map(|&i| ds.runs[i].iter().map(LabeledRow::from_step))
        .collect();
    let model = fit(&rows, features)?;
    let seeds = |idx: &[usize]| idx.iter().map(|&i| m.runs[i].seed).collect::<Vec<_>>();
    Ok(ModelFile {
        model,
        weights: WeightTable::default(),
        training: TrainingInfo {
            manifest_hash: m.hash(),
            route_hash: m.route_hash.clone(),
            split_seed,
            train_seeds: seeds(&split.train),
            test_seeds: seeds(&split.test),
            train_runs: split.train,
            test_runs: split.test,
            train_rows: rows.len() as u64,
        },
    })
}

/// A fitted model and its held-out rows, ready to score any weight table.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub model: ModelFile,
    pub test: Vec<TestRow>,
}

impl Evaluator {
    pub fn new(model: ModelFile, ds: &Dataset) -> Result<Self> {
        let hash = ds.manifest.manifest.hash();
        if hash != model.training.manifest_hash {
            return Err(Error::Mismatch(format!(
                "model was fitted on manifest {} but {} has hash {hash}",
                model.training.manifest_hash,
                ds.manifest.path.display()
            )));
        }
        let test = model
            .training
            .test_runs
            .iter()
            .map(|&i| {
                ds.runs
                    .get(i)
                    .ok_or_else(|| Error::Mismatch(format!("test run {i} is not in the manifest")))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flat_map(|steps| steps.iter().map(TestRow::from_step))
            .collect();
        Ok(Self { model, test })
    }

    pub fn evaluate(&self, weights: &WeightTable, variants: &[Variant]) -> Result<ReportDocument> {
        let t = &self.model.training;
        let meta = ReportMetadata {
            route_hash: t.route_hash.clone(),
            weights_hash: weights_hash(weights),
            train_seeds: t.train_seeds.clone(),
            test_seeds: t.test_seeds.clone(),
            split_seed: t.split_seed,
        };
        let report = evaluate(&self.model.model, &self.test, weights, variants, meta)?;
        Ok(ReportDocument::new(&report))
    }
}

/// Paths of the files a full pipeline run leaves in its output directory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub manifest: PathBuf,
    pub model: PathBuf,
    pub weights: PathBuf,
    pub report: PathBuf,
    pub rows: usize,
    pub document: ReportDocument,
}

pub const MODEL_NAME: &str = "model.json";
pub const WEIGHTS_NAME: &str = "weights.json";
pub const REPORT_NAME: &str = "report.json";

/// The whole experiment with defaults: leaves a directory `serve` can use.
pub fn run_all(route: &RouteSpec, seed: u64, dt: f64, dir: &Path) -> Result<PipelineOutput> {
    let ds = generate(route, DEFAULT_RUNS, seed, dt, dir)?;
    let model = fit_dataset(&ds, DEFAULT_TRAIN_COUNT, 0, &FeatureSet::with_pi())?;
    let model_path = dir.join(MODEL_NAME);
    crate::model_file::save_model(&model, &model_path)?;
    let weights = model.weights;
    let weights_path = dir.join(WEIGHTS_NAME);
    crate::weights_file::save_weights(&weights, &weights_path)?;
    let ev = Evaluator::new(model, &ds)?;
    let document = ev.evaluate(&weights, &Variant::ALL)?;
    let report_path = dir.join(REPORT_NAME);
    crate::report_file::save_report(&document, &report_path)?;
    Ok(PipelineOutput {
        manifest: ds.manifest.path.clone(),
        model: model_path,
        weights: weights_path,
        report: report_path,
        rows: ds.total_rows(),
        document,
    })
}
