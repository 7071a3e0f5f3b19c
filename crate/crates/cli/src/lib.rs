//! Scenario files in, CSV logs, metrics and plotting scripts out.

pub mod checks;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use auv_sim::{Metrics, Scenario, SimError, SimLog};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: invalid scenario:\n  {}", violations.join("\n  "))]
    Invalid { path: PathBuf, violations: Vec<String> },
    #[error("{0}")]
    Diverged(Box<SimError>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("log not found: {0}")]
    MissingLog(PathBuf),
    #[error("no logs given")]
    NoLogs,
    #[error(transparent)]
    Sim(SimError),
}

impl CliError {
    /// Process exit status: 2 parse, 3 validation, 4 divergence, 5 I/O, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Invalid { .. } => 3,
            CliError::Diverged(_) => 4,
            CliError::Io { .. } | CliError::MissingLog(_) | CliError::NoLogs => 5,
            CliError::Sim(_) => 1,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invalid(violations) => CliError::Invalid { path: PathBuf::new(), violations },
            e @ (SimError::Diverged { .. } | SimError::Plant { .. }) => CliError::Diverged(Box::new(e)),
            e => CliError::Sim(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Reads, defaults and validates a TOML scenario.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    parse_scenario_str(&text, path)
}

pub fn parse_scenario_str(text: &str, path: &Path) -> Result<Scenario> {
    if text.trim().is_empty() {
        return Err(CliError::Parse { path: path.to_path_buf(), message: "empty scenario file".into() });
    }
    let s: Scenario =
        toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let violations = s.violations();
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(CliError::Invalid { path: path.to_path_buf(), violations })
    }
}

const POSE: [&str; 6] = ["x", "y", "z", "phi", "theta", "psi"];

pub fn csv_header(models: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(POSE.iter().map(|s| s.to_string()));
    h.extend(POSE.iter().map(|s| format!("ref_{s}")));
    h.extend(["err_n", "err_e", "err_d"].map(String::from));
    h.extend((1..=models).map(|i| format!("p_{i}")));
    h.extend((1..=8).map(|i| format!("u_{i}")));
    h.push("true_model".into());
    h
}

/// One row per record. `u_i` is the force thruster `i` actually produced.
pub fn write_log_csv(log: &SimLog, path: &Path) -> Result<()> {
    let m = log.records.first().map_or(log.model_labels.len(), |r| r.posterior.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(csv_header(m)).map_err(|e| csv_err(path, e))?;
    for r in &log.records {
        let mut row = vec![r.t.to_string()];
        row.extend(r.state.eta.iter().map(f64::to_string));
        row.extend(r.reference.iter().map(f64::to_string));
        row.extend(r.error.iter().map(f64::to_string));
        row.extend(r.posterior.iter().map(f64::to_string));
        row.extend(r.applied.iter().map(f64::to_string));
        row.push(r.true_model.to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io(path))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        other => CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(format!("{other:?}")) },
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    fs::write(path, text + "\n").map_err(io(path))
}

/// Writes `<stem>.csv` (or `<stem>.json`) and `<stem>_metrics.json` under
/// `out_dir` and returns their paths.
pub fn write_outputs(log: &SimLog, metrics: &Metrics, out_dir: &Path, stem: &str, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let log_path = match format {
        Format::Csv => {
            let p = out_dir.join(format!("{stem}.csv"));
            write_log_csv(log, &p)?;
            p
        }
        Format::Json => {
            let p = out_dir.join(format!("{stem}.json"));
            write_json(log, &p)?;
            p
        }
    };
    let metrics_path = out_dir.join(format!("{stem}_metrics.json"));
    write_json(metrics, &metrics_path)?;
    Ok(vec![log_path, metrics_path])
}

fn relative_to(path: &Path, base: &Path) -> PathBuf {
    let (Ok(p), Ok(b)) = (path.canonicalize(), base.canonicalize()) else {
        return path.to_path_buf();
    };
    if let Ok(rel) = p.strip_prefix(&b) {
        return rel.to_path_buf();
    }
    // walk up from base until the log is below it
    let mut up = PathBuf::new();
    for anc in b.ancestors().skip(1) {
        up.push("..");
        if let Ok(rel) = p.strip_prefix(anc) {
            return up.join(rel);
        }
    }
    p
}

/// Writes `plot.py` into `out_dir`. Four figures cover posteriors, the 3-D
/// path, per-axis error and thruster forces; with several logs a fifth
/// overlays their planar error, one series per log.
pub fn emit_plot_script(logs: &[PathBuf], out_dir: &Path) -> Result<PathBuf> {
    if logs.is_empty() {
        return Err(CliError::NoLogs);
    }
    if let Some(missing) = logs.iter().find(|p| !p.is_file()) {
        return Err(CliError::MissingLog(missing.clone()));
    }
    fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let rel: Vec<String> = logs.iter().map(|p| relative_to(p, out_dir).to_string_lossy().into_owned()).collect();

    let mut s = String::new();
    s.push_str(
        "#!/usr/bin/env python3\n\
         # Plots simulator logs. Paths are relative to this file.\n\
         import csv, os\n\
         import matplotlib.pyplot as plt\n\n\
         HERE = os.path.dirname(os.path.abspath(__file__))\n\n\n\
         def load(name):\n\
         \x20   with open(os.path.join(HERE, name)) as f:\n\
         \x20       rows = list(csv.DictReader(f))\n\
         \x20   return {k: [float(r[k]) for r in rows] for k in rows[0]}\n\n\n",
    );
    s.push_str("LOGS = [\n");
    for r in &rel {
        let _ = writeln!(s, "    {r:?},");
    }
    s.push_str("]\nDATA = {name: load(name) for name in LOGS}\n");
    let base = "\nfor name, d in DATA.items():\n    stem = os.path.splitext(os.path.basename(name))[0]\n";

    s.push_str("\n# figure: posteriors");
    s.push_str(base);
    s.push_str(
        "    fig, ax = plt.subplots()\n\
         \x20   for k in sorted(k for k in d if k.startswith('p_')):\n\
         \x20       ax.plot(d['t'], d[k], label=k)\n\
         \x20   ax.set_xlabel('t [s]'); ax.set_ylabel('posterior'); ax.legend()\n\
         \x20   fig.savefig(os.path.join(HERE, stem + '_posterior.png'))\n",
    );
    s.push_str("\n# figure: trajectory");
    s.push_str(base);
    s.push_str(
        "    fig = plt.figure(); ax = fig.add_subplot(projection='3d')\n\
         \x20   ax.plot(d['ref_x'], d['ref_y'], d['ref_z'], '--', label='reference')\n\
         \x20   ax.plot(d['x'], d['y'], d['z'], label='vehicle')\n\
         \x20   ax.invert_zaxis(); ax.legend()\n\
         \x20   fig.savefig(os.path.join(HERE, stem + '_trajectory.png'))\n",
    );
    s.push_str("\n# figure: tracking error");
    s.push_str(base);
    s.push_str(
        "    fig, axes = plt.subplots(3, 1, sharex=True)\n\
         \x20   for ax, k in zip(axes, ['err_n', 'err_e', 'err_d']):\n\
         \x20       ax.plot(d['t'], d[k]); ax.set_ylabel(k + ' [m]')\n\
         \x20   axes[-1].set_xlabel('t [s]')\n\
         \x20   fig.savefig(os.path.join(HERE, stem + '_error.png'))\n",
    );
    s.push_str("\n# figure: thruster forces");
    s.push_str(base);
    s.push_str(
        "    fig, axes = plt.subplots(4, 2, sharex=True)\n\
         \x20   for i, ax in enumerate(axes.T.flat):\n\
         \x20       ax.plot(d['t'], [u / 9.80665 for u in d['u_%d' % (i + 1)]]); ax.set_ylabel('T%d [kgf]' % (i + 1))\n\
         \x20   fig.savefig(os.path.join(HERE, stem + '_thrust.png'))\n",
    );
    if rel.len() > 1 {
        s.push_str("\n# figure: planar error overlay\nfig, ax = plt.subplots()\n");
        for r in &rel {
            let _ = writeln!(
                s,
                "ax.plot(DATA[{r:?}]['t'], [(n * n + e * e) ** 0.5 for n, e in zip(DATA[{r:?}]['err_n'], DATA[{r:?}]['err_e'])], label={r:?})"
            );
        }
        s.push_str(
            "ax.set_xlabel('t [s]'); ax.set_ylabel('planar error [m]'); ax.legend()\n\
             fig.savefig(os.path.join(HERE, 'overlay.png'))\n",
        );
    }
    s.push_str("\nplt.show()\n");

    let path = out_dir.join("plot.py");
    fs::write(&path, s).map_err(io(&path))?;
    Ok(path)
}

/// Peak post-event planar pulse of each run in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub label: String,
    pub detection_interval_s: Option<f64>,
    pub pulse_m: Vec<f64>,
}
