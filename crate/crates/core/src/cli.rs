//! The three pipeline commands as library functions.
//!
//! Each returns a [`RunReport`]; `main` only parses arguments, prints the
//! report and maps errors to exit codes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::cross_section::BeamSpec;
use crate::elastica::{force_displacement_curve, ForceDisplacementCurve};
use crate::error::{Error, Result};
use crate::estimator::{estimate_batch, format_summary, summarize, BatchItem, EstimatorConfig, StiffnessEstimate};
use crate::fbg::GratingLayout;
use crate::io;
use crate::parallel::Execution;
use crate::trials::{simulate_with_model, ForwardModel, Protocol, TrialTrace};

/// Files written and problems met during a run.
#[derive(Debug, Default)]
pub struct RunReport {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Items that failed numerically; the run went on without them.
    pub failures: Vec<String>,
}

/// `42` for 42 mm, `37.5` for 37.5 mm.
pub fn length_label(length: f64) -> String {
    format!("{}mm", io::fmt_sig12(length * 1e3))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Force–displacement and per-peak strain CSVs for every configured length.
pub fn cmd_curve(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<RunReport> {
    prepare_dir(out)?;
    let mut report = RunReport::default();
    for beam in cfg.beams()? {
        let label = length_label(beam.length);
        let curve = force_displacement_curve(&beam, &cfg.kappa_grid, &cfg.solver, exec);
        for f in &curve.failures {
            report.failures.push(format!("L = {label}, kappa = {}: {}", f.kappa, f.message));
        }
        if curve.is_empty() {
            report.warnings.push(format!("L = {label}: no branch point solved, nothing written"));
            continue;
        }
        let path = out.join(format!("curve_{label}.csv"));
        io::write_curve(&path, &curve)?;
        report.written.push(path);

        let layout = cfg.layout.layout_for(&beam)?;
        match ForwardModel::build(&beam, &layout, &cfg.kappa_grid, &cfg.solver, exec) {
            Ok(model) => {
                let path = out.join(format!("strain_{label}.csv"));
                io::write_text(&path, &io::strain_csv(&model))?;
                report.written.push(path);
            }
            Err(e) => report.failures.push(format!("L = {label}: strain export: {e}")),
        }
    }
    Ok(report)
}

/// Mixes the run seed with the length and tissue position into a trial seed.
pub fn trial_seed(base: u64, length_idx: usize, tissue_idx: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ ((length_idx as u64) << 32 | tissue_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One synthetic trace per tissue and length.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path, exec: Execution) -> Result<RunReport> {
    let mut report = RunReport::default();
    if cfg.tissues.is_empty() {
        report.warnings.push("no tissues configured, nothing to simulate".into());
        return Ok(report);
    }
    prepare_dir(out)?;
    for (li, beam) in cfg.beams()?.iter().enumerate() {
        let label = length_label(beam.length);
        let layout = cfg.layout.layout_for(beam)?;
        let model = match ForwardModel::build(beam, &layout, &cfg.kappa_grid, &cfg.solver, exec) {
            Ok(m) => m,
            Err(e) if e.is_numerical() => {
                report.failures.push(format!("L = {label}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        for (ti, tissue) in cfg.tissues.iter().enumerate() {
            let protocol = Protocol { seed: trial_seed(cfg.seed, li, ti), ..cfg.protocol };
            let id = format!("trial_{}_{label}", tissue.name);
            match simulate_with_model(&model, &tissue.spec, &protocol) {
                Ok(mut trace) => {
                    trace.meta.set("trial.id", id.as_str());
                    trace.meta.set("trial.tissue", tissue.name.as_str());
                    let path = out.join(format!("{id}.csv"));
                    io::write_trace(&path, &trace)?;
                    report.written.push(path);
                }
                Err(e) if e.is_numerical() => report.failures.push(format!("{id}: {e}")),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

struct Loaded {
    id: String,
    group: String,
    actual: Option<f64>,
    trace: TrialTrace,
    beam: BeamSpec,
    layout: GratingLayout,
    cfg: EstimatorConfig,
}

fn load_for_estimate(cfg: &RunConfig, path: &Path) -> Result<Loaded> {
    let fallback = match cfg.lengths.as_slice() {
        [l] => Some(*l),
        _ => None,
    };
    let trace = io::read_trace(path, fallback)?;
    let id = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    let meta = &trace.meta;
    let beam = BeamSpec::new(cfg.section, trace.exposed_length_at(0))?;
    let layout = cfg.layout.layout_for(&beam)?;
    let nu = match (cfg.estimator.nu, meta.get("tissue.nu")) {
        (Some(nu), _) => nu,
        (None, Some(_)) => meta.get_f64("tissue.nu")?,
        (None, None) => {
            return Err(Error::config("estimator.nu", format!("not set and {} has no tissue.nu", path.display())))
        }
    };
    let noise_pm = match meta.get("protocol.noise_pm") {
        Some(_) => meta.get_f64("protocol.noise_pm")?,
        None => cfg.protocol.noise_pm,
    };
    let est_cfg = cfg.estimator.resolve(nu, &layout, noise_pm)?;
    let group = meta.get("trial.tissue").map_or_else(|| id.clone(), str::to_string);
    let actual = meta.get("tissue.e_pa").map(|_| meta.get_f64("tissue.e_pa")).transpose()?;
    Ok(Loaded { id, group, actual, trace, beam, layout, cfg: est_cfg })
}

/// Per-trace modulus estimates plus a per-tissue RMSE/IQR summary.
pub fn cmd_estimate(cfg: &RunConfig, traces: &[PathBuf], out: &Path, exec: Execution) -> Result<RunReport> {
    let mut report = RunReport::default();
    if traces.is_empty() {
        return Err(Error::invalid("no trace files given"));
    }
    let loaded = traces.iter().map(|p| load_for_estimate(cfg, p)).collect::<Result<Vec<_>>>()?;

    // one branch per distinct beam; the branch scales to any length, but
    // solving it at the actual length keeps the knots where they are used
    let mut curves: BTreeMap<u64, ForceDisplacementCurve> = BTreeMap::new();
    for l in &loaded {
        curves
            .entry(l.beam.length.to_bits())
            .or_insert_with(|| force_displacement_curve(&l.beam, &cfg.kappa_grid, &cfg.solver, exec));
    }
    let items: Vec<BatchItem<'_>> = loaded
        .iter()
        .map(|l| BatchItem {
            trace: &l.trace,
            beam: &l.beam,
            layout: &l.layout,
            cfg: &l.cfg,
            curve: &curves[&l.beam.length.to_bits()],
        })
        .collect();
    let results = estimate_batch(&items, exec);

    let mut rows = Vec::with_capacity(loaded.len());
    let mut groups: BTreeMap<&str, (Vec<StiffnessEstimate>, Option<f64>)> = BTreeMap::new();
    for (l, res) in loaded.iter().zip(results) {
        match &res {
            Ok(e) => {
                let g = groups.entry(l.group.as_str()).or_insert_with(|| (Vec::new(), l.actual));
                g.0.push(e.clone());
                if e.outlier {
                    report.warnings.push(format!("{}: E_t = {:.0} Pa flagged as outlier", l.id, e.e_t));
                }
            }
            Err(e) if e.is_numerical() => report.failures.push(format!("{}: {e}", l.id)),
            Err(_) => return res.map(|_| report),
        }
        rows.push((l.id.clone(), res));
    }

    prepare_dir(out)?;
    let path = out.join("estimates.csv");
    io::write_text(&path, &io::estimates_csv(&rows))?;
    report.written.push(path);

    let summaries: Vec<_> = groups.iter().map(|(label, (ests, actual))| summarize(label, ests, *actual)).collect();
    let path = out.join("summary.txt");
    io::write_text(&path, &format_summary(&summaries))?;
    report.written.push(path);
    Ok(report)
}
