use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use artcloud_core::experiment::{run_compare, write_report, write_series, Arm, CellResult};
use artcloud_core::features::{session_patterns, write_log};
use artcloud_core::workload::{self, read_requests, to_log_records, write_labels, write_requests};
use artcloud_core::{Art2Network, Art2Params, PatternVector, SimConfig, SimMetrics, Slack, WorkloadSpec};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::manifest::{load_document, ReportFormat, RunManifest};

pub struct GenArgs {
    pub spec: Option<PathBuf>,
    pub seed: Option<u64>,
    pub duration: f64,
    pub window: f64,
    pub out: PathBuf,
}

pub struct ClusterArgs {
    pub patterns: PathBuf,
    pub params: Art2Params,
    pub epochs: usize,
    pub out: PathBuf,
}

pub struct SimulateArgs {
    pub workload: PathBuf,
    pub config: SimConfig,
    pub arm: Arm,
    pub slack: Slack,
    pub out: PathBuf,
}

pub struct CompareArgs {
    pub manifest: Option<PathBuf>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Creates `dir/name`, hands a buffered writer to `fill`, and flushes.
fn write_file<F>(dir: &Path, name: &str, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    fill(&mut w)?;
    w.flush().map_err(|e| CliError::io(&path, e))
}

fn io_at(dir: &Path, name: &str) -> impl Fn(std::io::Error) -> CliError {
    let path = dir.join(name);
    move |e| CliError::io(&path, e)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

pub fn gen(args: GenArgs, stdout: &mut impl Write) -> Result<(), CliError> {
    let mut spec: WorkloadSpec = match &args.spec {
        Some(path) => load_document(path)?,
        None => WorkloadSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let wl = workload::generate(&spec, args.duration)?;
    let records = to_log_records(&wl.requests);
    let patterns = session_patterns(&records, spec.n_objects, args.window)?;

    create_dir(&args.out)?;
    write_file(&args.out, "workload.csv", |w| Ok(write_requests(w, &wl.requests)?))?;
    write_file(&args.out, "labels.csv", |w| Ok(write_labels(w, &wl.labels)?))?;
    write_file(&args.out, "requests.log", |w| write_log(w, &records).map_err(io_at(&args.out, "requests.log")))?;
    write_file(&args.out, "patterns.json", |w| {
        serde_json::to_writer(&mut *w, &patterns).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(w).map_err(io_at(&args.out, "patterns.json"))
    })?;

    let clients = wl.labels.len();
    writeln!(
        stdout,
        "clients: {clients}\nobjects: {}\nrequests: {}\npatterns: {}",
        spec.n_objects,
        wl.requests.len(),
        patterns.len()
    )
    .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn cluster(args: ClusterArgs, stdout: &mut impl Write) -> Result<(), CliError> {
    args.params.validate()?;
    let text = fs::read_to_string(&args.patterns).map_err(|e| CliError::io(&args.patterns, e))?;
    let mut patterns: Vec<PatternVector> =
        serde_json::from_str(&text).map_err(|e| CliError::parse_in(&args.patterns, e))?;
    let Some(m) = patterns.first().map(|p| p.values.len()) else {
        return Err(CliError::Validation(format!("{}: no patterns", args.patterns.display())));
    };
    if args.epochs == 0 {
        return Err(CliError::Validation("epochs must be at least 1".into()));
    }
    // sessions are presented in order; within one, file order
    patterns.sort_by_key(|p| p.session_id);

    let mut net = Art2Network::new(args.params, m)?;
    let mut assigned = vec![None; patterns.len()];
    for _ in 0..args.epochs {
        for (slot, p) in assigned.iter_mut().zip(&patterns) {
            if p.is_zero() {
                continue;
            }
            *slot = net.present(&p.values, true)?.node;
        }
    }

    create_dir(&args.out)?;
    write_file(&args.out, "snapshot.json", |w| {
        writeln!(w, "{}", net.to_json()).map_err(io_at(&args.out, "snapshot.json"))
    })?;
    write_file(&args.out, "assignments.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        let err = |e: csv::Error| CliError::Runtime(e.to_string());
        csv.write_record(["client_id", "session_id", "node"]).map_err(err)?;
        for (p, node) in patterns.iter().zip(&assigned) {
            let node = node.map_or_else(String::new, |n| n.to_string());
            csv.write_record([p.client_id.to_string(), p.session_id.to_string(), node]).map_err(err)?;
        }
        csv.flush().map_err(io_at(&args.out, "assignments.csv"))
    })?;

    let skipped = patterns.iter().filter(|p| p.is_zero()).count();
    writeln!(stdout, "patterns: {}\nskipped: {skipped}\nclusters: {}", patterns.len(), net.committed())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn metrics_document(metrics: &SimMetrics, arm: Arm, slack: Slack, duration: f64) -> Value {
    let mut doc = match serde_json::to_value(metrics) {
        Ok(Value::Object(map)) => map,
        _ => Map::new(),
    };
    doc.insert("prefetch_hit_rate".into(), json!(metrics.prefetch_hit_rate()));
    doc.insert("arm".into(), json!(arm.as_str()));
    doc.insert("slack".into(), json!(slack.as_str()));
    doc.insert("duration".into(), json!(duration));
    Value::Object(doc)
}

pub fn simulate(args: SimulateArgs, stdout: &mut impl Write) -> Result<(), CliError> {
    let requests = read_requests(open(&args.workload)?)?;
    let config = SimConfig { prefetch_enabled: args.arm == Arm::Art2, deadline_slack: args.slack, ..args.config };
    let metrics = artcloud_core::simulator::run(&config, &requests)?;

    create_dir(&args.out)?;
    let doc = metrics_document(&metrics, args.arm, args.slack, config.duration);
    write_file(&args.out, "metrics.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &doc).map_err(|e| CliError::Runtime(e.to_string()))?;
        writeln!(w).map_err(io_at(&args.out, "metrics.json"))
    })?;
    write_file(&args.out, "series.csv", |w| {
        writeln!(w, "time,cost_per_task").map_err(io_at(&args.out, "series.csv"))?;
        for (t, v) in &metrics.cost_per_task_series {
            writeln!(w, "{t},{v}").map_err(io_at(&args.out, "series.csv"))?;
        }
        Ok(())
    })?;

    let out = |e: std::io::Error| CliError::Runtime(e.to_string());
    for (key, value) in metrics.key_values() {
        writeln!(stdout, "{key}: {value}").map_err(out)?;
    }
    Ok(())
}

pub fn compare(args: CompareArgs, stdout: &mut impl Write) -> Result<(), CliError> {
    let manifest = match &args.manifest {
        Some(path) => RunManifest::load(path)?,
        None => RunManifest::default(),
    };
    let settings = manifest.settings()?;
    let out = args
        .out
        .or_else(|| manifest.out.clone())
        .ok_or_else(|| CliError::Validation("no output directory (pass --out or set `out`)".into()))?;
    let workers = args.workers.or(manifest.workers);
    if workers == Some(0) {
        return Err(CliError::Validation("workers must be at least 1".into()));
    }

    let results = run_compare(&settings, workers)?;

    create_dir(&out)?;
    if manifest.formats.contains(&ReportFormat::Csv) {
        write_file(&out, "report.csv", |w| Ok(write_report(w, &results)?))?;
    }
    if manifest.formats.contains(&ReportFormat::Json) {
        let rows: Vec<Value> = results
            .iter()
            .map(|r| {
                let mut doc = metrics_document(&r.metrics, r.arm, r.slack, r.duration);
                if let Value::Object(map) = &mut doc {
                    map.insert("replication".into(), json!(r.replication));
                    map.insert("seed".into(), json!(r.seed));
                }
                doc
            })
            .collect();
        write_file(&out, "report.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &rows).map_err(|e| CliError::Runtime(e.to_string()))?;
            writeln!(w).map_err(io_at(&out, "report.json"))
        })?;
    }
    write_file(&out, "series.csv", |w| Ok(write_series(w, &results)?))?;

    print_summary(stdout, &settings.workload.durations, &results).map_err(|e| CliError::Runtime(e.to_string()))
}

/// Per-(duration, arm, slack) means over replications.
fn print_summary(out: &mut impl Write, durations: &[f64], results: &[CellResult]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>9} {:<9} {:<8} {:>10} {:>10} {:>10}",
        "duration", "arm", "slack", "rejected", "completed", "cost/task"
    )?;
    let mut keys: Vec<(Arm, Slack)> = Vec::new();
    for r in results {
        if !keys.contains(&(r.arm, r.slack)) {
            keys.push((r.arm, r.slack));
        }
    }
    for &duration in durations {
        for &(arm, slack) in &keys {
            let cell: Vec<&SimMetrics> = results
                .iter()
                .filter(|r| r.duration == duration && r.arm == arm && r.slack == slack)
                .map(|r| &r.metrics)
                .collect();
            if cell.is_empty() {
                continue;
            }
            let n = cell.len() as f64;
            let rejected = cell.iter().map(|m| m.rejected as f64).sum::<f64>() / n;
            let completed = cell.iter().map(|m| m.completed as f64).sum::<f64>() / n;
            let costs: Vec<f64> = cell.iter().filter_map(|m| m.cost_per_task).collect();
            let cost = if costs.is_empty() {
                "-".to_string()
            } else {
                format!("{:.3}", costs.iter().sum::<f64>() / costs.len() as f64)
            };
            writeln!(
                out,
                "{duration:>9} {:<9} {:<8} {rejected:>10.1} {completed:>10.1} {cost:>10}",
                arm.as_str(),
                slack.as_str()
            )?;
        }
    }
    Ok(())
}
