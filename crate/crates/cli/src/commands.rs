use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use posnb_core::eval::{
    cross_validate_prepared, cross_validate_subjectivity, nested_tune_prepared, sweep_q_prepared, PolarityExperiment,
    Task,
};
use posnb_core::subjectivity::{train_subjectivity_model, write_traces, SentenceTrace};
use posnb_core::{EvalReport, ExperimentConfig, SubjectivityModel, SweepResult, TransformMode};

use crate::datasets::{
    fingerprint, load_polarity, load_subjectivity, verify, DatasetHash, DatasetPaths, DatasetRole,
    EXPECTED_PER_POLARITY, EXPECTED_PER_SUBJECTIVITY,
};
use crate::error::{config, data, output, results, CliError, CliResult};
use crate::manifest::{write_json, RunManifest};

/// Loads, parses and validates a config file.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
    cfg.validate().map_err(|e| config(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// Config files under `path`: the file itself, or every `*.json` directly
/// inside a directory, in name order.
pub fn config_files(path: &Path) -> CliResult<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| config(format!("{}: {e}", path.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(config(format!("no *.json configs in {}", path.display())));
    }
    Ok(files)
}

fn stem_of(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment").to_owned()
}

fn load_data<T>(r: Result<T, posnb_core::Error>) -> CliResult<T> {
    r.map_err(|e| CliError::Data(e.into()))
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidateSummary {
    pub pos: Option<usize>,
    pub neg: Option<usize>,
    pub subj: Option<usize>,
    pub obj: Option<usize>,
    pub skipped_empty: usize,
}

impl std::fmt::Display for ValidateSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = [("pos", self.pos), ("neg", self.neg), ("subj", self.subj), ("obj", self.obj)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Loads whichever datasets are given and checks their sizes.
pub fn validate(paths: &DatasetPaths, allow_custom: bool) -> CliResult<ValidateSummary> {
    if paths.polarity.is_none() && paths.subjective.is_none() && paths.objective.is_none() {
        return Err(config("nothing to validate: give --polarity and/or --subj/--obj"));
    }
    let mut summary = ValidateSummary::default();
    if paths.polarity.is_some() {
        let load = load_polarity(&paths.polarity_root()?).map_err(CliError::from_core)?;
        summary.pos = Some(load.corpus.count(posnb_core::Polarity::Positive));
        summary.neg = Some(load.corpus.count(posnb_core::Polarity::Negative));
        summary.skipped_empty = load.skipped_empty.len();
    }
    if paths.subjective.is_some() || paths.objective.is_some() {
        let (s, o) = paths.subjectivity_files()?;
        let sentences = load_subjectivity(&s, &o).map_err(CliError::from_core)?;
        let subj = sentences.iter().filter(|(_, l)| *l == posnb_core::Subjectivity::Subjective).count();
        summary.subj = Some(subj);
        summary.obj = Some(sentences.len() - subj);
    }
    if !allow_custom {
        let expected = [
            (summary.pos, EXPECTED_PER_POLARITY),
            (summary.neg, EXPECTED_PER_POLARITY),
            (summary.subj, EXPECTED_PER_SUBJECTIVITY),
            (summary.obj, EXPECTED_PER_SUBJECTIVITY),
        ];
        if expected.iter().any(|(got, want)| got.is_some_and(|g| g != *want)) {
            return Err(data(format!(
                "unexpected dataset sizes ({summary}); expected {EXPECTED_PER_POLARITY} documents per polarity \
                 and {EXPECTED_PER_SUBJECTIVITY} sentences per subjectivity class, pass --allow-custom to accept"
            )));
        }
    }
    Ok(summary)
}

// ---------------------------------------------------------------- run / tune

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Nested tuning when the config lists a `tuning_grid`, plain CV otherwise.
    #[default]
    Auto,
    Nested,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub traces: bool,
    pub mode: Mode,
}

pub struct Outcome {
    pub report: EvalReport,
    pub traces: Vec<(String, Vec<SentenceTrace>)>,
}

fn needs_polarity(cfg: &ExperimentConfig) -> bool {
    cfg.task == Task::Polarity
}

fn needs_subjectivity(cfg: &ExperimentConfig) -> bool {
    cfg.task == Task::Subjectivity || cfg.transform != TransformMode::None
}

/// Hashes every dataset the config will read.
pub fn fingerprints(cfg: &ExperimentConfig, paths: &DatasetPaths) -> CliResult<Vec<DatasetHash>> {
    let mut out = Vec::new();
    if needs_polarity(cfg) {
        let root = paths.polarity_root()?;
        if !root.is_dir() {
            return Err(data(format!("missing dataset directory {}", root.display())));
        }
        out.push(fingerprint(DatasetRole::Polarity, &root)?);
    }
    if needs_subjectivity(cfg) {
        let (s, o) = paths.subjectivity_files()?;
        for (role, p) in [(DatasetRole::Subjective, s), (DatasetRole::Objective, o)] {
            if !p.is_file() {
                return Err(data(format!("missing subjectivity file {}", p.display())));
            }
            out.push(fingerprint(role, &p)?);
        }
    }
    Ok(out)
}

fn subjectivity_model(cfg: &ExperimentConfig, paths: &DatasetPaths) -> CliResult<Option<SubjectivityModel>> {
    if cfg.transform == TransformMode::None {
        return Ok(None);
    }
    let (s, o) = paths.subjectivity_files()?;
    let sentences = load_data(load_subjectivity(&s, &o))?;
    load_data(train_subjectivity_model(&sentences, cfg.subjectivity_config())).map(Some)
}

/// Loads the polarity corpus and applies the configured sentence transform.
pub fn prepare_polarity(cfg: &ExperimentConfig, paths: &DatasetPaths) -> CliResult<PolarityExperiment> {
    let load = load_data(load_polarity(&paths.polarity_root()?))?;
    let model = subjectivity_model(cfg, paths)?;
    PolarityExperiment::prepare(&load.corpus, cfg, model.as_ref()).map_err(CliError::from_core)
}

/// Runs one experiment in memory.
pub fn execute(cfg: &ExperimentConfig, paths: &DatasetPaths, mode: Mode) -> CliResult<Outcome> {
    if cfg.task == Task::Subjectivity {
        if mode == Mode::Nested || !cfg.tuning_grid.is_empty() {
            return Err(config("q tuning applies to polarity experiments only"));
        }
        let (s, o) = paths.subjectivity_files()?;
        let sentences = load_data(load_subjectivity(&s, &o))?;
        let report = cross_validate_subjectivity(&sentences, cfg).map_err(CliError::from_core)?;
        return Ok(Outcome { report, traces: Vec::new() });
    }
    let exp = prepare_polarity(cfg, paths)?;
    let nested = mode == Mode::Nested || !cfg.tuning_grid.is_empty();
    let report =
        if nested { nested_tune_prepared(&exp.prepared, cfg) } else { cross_validate_prepared(&exp.prepared, cfg) }
            .map_err(CliError::from_core)?;
    Ok(Outcome { report, traces: exp.traces })
}

pub struct RunSummary {
    pub report: EvalReport,
    pub report_path: PathBuf,
    pub manifest_path: PathBuf,
}

fn effective_config(config_path: &Path, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    let mut cfg = load_config(config_path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if cfg.name.is_empty() {
        cfg.name = stem_of(config_path);
    }
    Ok(cfg)
}

/// Runs a config file and writes `<stem>.manifest.json`, `<stem>.report.json`
/// and, on request, `<stem>.traces.tsv` into `out_dir`.
pub fn run_config(
    config_path: &Path,
    out_dir: &Path,
    paths: &DatasetPaths,
    opts: &RunOptions,
) -> CliResult<RunSummary> {
    let cfg = effective_config(config_path, opts.seed)?;
    let stem = stem_of(config_path);
    fs::create_dir_all(out_dir).map_err(|e| output(out_dir, e))?;

    let command = match opts.mode {
        Mode::Auto => "run",
        Mode::Nested => "tune",
    };
    let mut manifest = RunManifest::new(command, config_path, &cfg);
    manifest.datasets = fingerprints(&cfg, paths)?;
    let report_name = PathBuf::from(format!("{stem}.report.json"));
    let traces_name = PathBuf::from(format!("{stem}.traces.tsv"));
    let write_traces_file = opts.traces && cfg.transform != TransformMode::None;
    manifest.outputs.push(report_name.clone());
    if write_traces_file {
        manifest.outputs.push(traces_name.clone());
    }
    let manifest_path = out_dir.join(format!("{stem}.manifest.json"));
    manifest.write(&manifest_path)?;

    let outcome = execute(&cfg, paths, opts.mode)?;
    let report_path = out_dir.join(report_name);
    write_json(&report_path, &outcome.report)?;
    if write_traces_file {
        let path = out_dir.join(traces_name);
        let mut buf = Vec::new();
        for (id, traces) in &outcome.traces {
            write_traces(&mut buf, id, traces).map_err(|e| output(&path, e))?;
        }
        fs::write(&path, buf).map_err(|e| output(&path, e))?;
    }
    Ok(RunSummary { report: outcome.report, report_path, manifest_path })
}

/// One-line human summary of a report.
pub fn summary_line(report: &EvalReport) -> String {
    let mut line = format!(
        "{}: accuracy {:.2}% ({}/{}), {:.0}% Wilson interval [{:.2}%, {:.2}%]",
        report.name,
        100.0 * report.pooled_accuracy,
        report.correct,
        report.n,
        100.0 * report.confidence,
        100.0 * report.wilson_low,
        100.0 * report.wilson_high,
    );
    if let Some(qs) = &report.chosen_q_per_fold {
        let qs: Vec<String> = qs.iter().map(|q| format!("{q}")).collect();
        line.push_str(&format!(", q per fold [{}]", qs.join(", ")));
    }
    line
}

// ---------------------------------------------------------------- sweep

fn round_grid(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// `from, from + step, ...` up to `to` inclusive. A step wider than the range
/// gives just `from`.
pub fn sweep_grid(from: f64, to: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) {
        return Err(config("sweep bounds must be finite"));
    }
    if from < 0.0 || from >= to || step <= 0.0 {
        return Err(config(format!("need 0 <= from < to and step > 0, got from={from} to={to} step={step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| round_grid(from + i as f64 * step)).collect())
}

pub struct SweepSummary {
    pub result: SweepResult,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// `out` names the CSV file, or a directory that receives `<stem>.sweep.csv`.
pub fn sweep(
    config_path: &Path,
    grid: &[f64],
    out: &Path,
    paths: &DatasetPaths,
    seed: Option<u64>,
) -> CliResult<SweepSummary> {
    let cfg = effective_config(config_path, seed)?;
    if cfg.task != Task::Polarity {
        return Err(config("sweeps apply to polarity experiments only"));
    }
    let stem = stem_of(config_path);
    let csv_path = if out.is_dir() { out.join(format!("{stem}.sweep.csv")) } else { out.to_path_buf() };
    let dir = csv_path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| output(dir, e))?;
    let manifest_path = dir.join(format!("{}.manifest.json", stem_of(&csv_path)));

    let mut manifest = RunManifest::new("sweep", config_path, &cfg);
    manifest.datasets = fingerprints(&cfg, paths)?;
    manifest.outputs.push(PathBuf::from(csv_path.file_name().unwrap_or_default()));
    manifest.write(&manifest_path)?;

    let exp = prepare_polarity(&cfg, paths)?;
    let result = sweep_q_prepared(&exp.prepared, &cfg, grid).map_err(CliError::from_core)?;
    fs::write(&csv_path, result.to_csv()).map_err(|e| output(&csv_path, e))?;
    Ok(SweepSummary { result, csv_path, manifest_path })
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub accuracy: f64,
    pub subjectivity_used: bool,
    pub file: PathBuf,
}

pub struct Collected {
    pub rows: Vec<ReportRow>,
    /// Datasets whose hashes could not be rechecked, one note each.
    pub unverified: Vec<String>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| results(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| results(format!("{}: {e}", path.display())))
}

/// Reads every `*.report.json` in `dir`, checks the matching manifests'
/// dataset hashes, and returns rows sorted by accuracy ascending.
pub fn collect_reports(dir: &Path) -> CliResult<Collected> {
    let entries = fs::read_dir(dir).map_err(|e| results(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.to_string_lossy().ends_with(".report.json"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(results(format!("no *.report.json files in {}", dir.display())));
    }
    let mut rows = Vec::with_capacity(files.len());
    let mut unverified = Vec::new();
    for file in files {
        let report: EvalReport = read_json(&file)?;
        let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let manifest_path = dir.join(name.replace(".report.json", ".manifest.json"));
        if manifest_path.is_file() {
            let manifest: RunManifest = read_json(&manifest_path)?;
            for ds in &manifest.datasets {
                match verify(ds)? {
                    Some(true) => {}
                    Some(false) => {
                        return Err(results(format!(
                            "{}: dataset {} changed since the run (hash mismatch)",
                            manifest_path.display(),
                            ds.path.display()
                        )))
                    }
                    None => unverified.push(format!("{}: {} not found", manifest_path.display(), ds.path.display())),
                }
            }
        } else {
            unverified.push(format!("{}: no manifest", file.display()));
        }
        rows.push(ReportRow {
            method: report.name.clone(),
            accuracy: report.pooled_accuracy,
            subjectivity_used: report.subjectivity_used,
            file,
        });
    }
    rows.sort_by(|a, b| a.accuracy.total_cmp(&b.accuracy).then_with(|| a.method.cmp(&b.method)));
    Ok(Collected { rows, unverified })
}

pub fn format_table(rows: &[ReportRow]) -> String {
    let method_w = rows.iter().map(|r| r.method.chars().count()).chain(["Method".len()]).max().unwrap_or(6);
    let mut out = String::new();
    out.push_str(&format!("{:<method_w$}  {:>8}  {}\n", "Method", "Accuracy", "Subj."));
    out.push_str(&format!("{}\n", "-".repeat(method_w + 17)));
    for r in rows {
        let flag = if r.subjectivity_used { "+" } else { "-" };
        out.push_str(&format!("{:<method_w$}  {:>8.2}  {:>5}\n", r.method, 100.0 * r.accuracy, flag));
    }
    out
}

pub fn report(dir: &Path, mut out: impl Write) -> CliResult<Collected> {
    let collected = collect_reports(dir)?;
    out.write_all(format_table(&collected.rows).as_bytes()).map_err(|e| output(Path::new("<stdout>"), e))?;
    Ok(collected)
}
