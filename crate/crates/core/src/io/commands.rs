use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::sensor_log::{parse_sensor_log, write_sensor_log, SensorLogRecord};
use super::output::{write_plotdata, write_trace};
use super::params::RunParams;
use crate::error::{Error, Result};
use crate::eval::score;
use crate::fusion::{run_fusion, FusionConfig, FusionOutput, SensorFrame};
use crate::metrics::{write_reports_json, MetricsReport};
use crate::sim::{generate_trajectory, render_sensors};

/// Files written by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub trace: PathBuf,
    pub metrics: Option<PathBuf>,
    pub reports: Vec<MetricsReport>,
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn truth_of(records: &[SensorLogRecord]) -> Vec<(f64, f64)> {
    records.iter().filter_map(|r| r.gt_cb_m.map(|g| (r.t, g))).collect()
}

fn median_spacing(records: &[SensorLogRecord]) -> f64 {
    let mut dts: Vec<f64> = records.windows(2).map(|w| w[1].t - w[0].t).collect();
    if dts.is_empty() {
        return 0.0;
    }
    dts.sort_by(f64::total_cmp);
    dts[dts.len() / 2]
}

fn fuse_records(records: &[SensorLogRecord], fusion: &FusionConfig) -> Result<Vec<FusionOutput>> {
    let frames: Vec<SensorFrame> = records.iter().map(SensorLogRecord::sensor_frame).collect();
    run_fusion(&frames, fusion)
}

/// Simulate a scenario and write `stream.csv`, `trace.csv`, `metrics.json`
/// and `plotdata.csv` into `out_dir`.
///
/// The filter runs on the stream as written to `stream.csv`, so replaying that
/// file reproduces `trace.csv` exactly.
pub fn cmd_simulate(params: &RunParams, out_dir: &Path) -> Result<CommandOutput> {
    params.validate()?;
    let scenario = &params.scenario;
    let gt = generate_trajectory(scenario)?;
    let rendered = render_sensors(&gt, scenario)?;
    let records: Vec<SensorLogRecord> = rendered
        .iter()
        .map(|r| {
            let f = r.sensor_frame();
            SensorLogRecord { t: f.t, sh_px: f.sh_px, depth_cb_m: f.depth_m, gt_cb_m: Some(r.true_cb) }
        })
        .collect();
    let mut stream = Vec::new();
    write_sensor_log(&mut stream, &records)?;
    let records = parse_sensor_log(stream.as_slice())?;

    let outputs = fuse_records(&records, &params.fusion)?;
    let reports = score(&outputs, &truth_of(&records), scenario.frame_period())?;
    log::info!(
        "{} seed {}: {} frames, fused rmse {:.2} cm",
        scenario.kind,
        scenario.seed,
        outputs.len(),
        reports.last().map_or(f64::NAN, |r| r.rmse_cm)
    );

    fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    fs::write(out_dir.join("stream.csv"), &stream).map_err(|e| Error::Io(format!("stream.csv: {e}")))?;
    let trace = out_dir.join("trace.csv");
    write_file(&trace, |w| write_trace(w, &outputs))?;
    let metrics = out_dir.join("metrics.json");
    write_file(&metrics, |w| write_reports_json(w, &reports))?;
    let gts: Vec<Option<f64>> = records.iter().map(|r| r.gt_cb_m).collect();
    write_file(&out_dir.join("plotdata.csv"), |w| write_plotdata(w, &outputs, &gts))?;
    Ok(CommandOutput { trace, metrics: Some(metrics), reports })
}

/// Fuse a recorded log and write `trace.csv`, plus `metrics.json` when the
/// log carries ground truth.
pub fn cmd_replay(log_path: &Path, fusion: &FusionConfig, out_dir: &Path) -> Result<CommandOutput> {
    fusion.validate()?;
    let file = File::open(log_path).map_err(|e| Error::Io(format!("{}: {e}", log_path.display())))?;
    let records = parse_sensor_log(std::io::BufReader::new(file))?;
    if records.is_empty() {
        return Err(Error::Config(format!("{} contains no records", log_path.display())));
    }
    let outputs = fuse_records(&records, fusion)?;

    fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    let trace = out_dir.join("trace.csv");
    write_file(&trace, |w| write_trace(w, &outputs))?;

    let truth = truth_of(&records);
    if truth.is_empty() {
        log::warn!("{} has no ground truth; metrics.json not written", log_path.display());
        return Ok(CommandOutput { trace, metrics: None, reports: Vec::new() });
    }
    let reports = score(&outputs, &truth, median_spacing(&records))?;
    let metrics = out_dir.join("metrics.json");
    write_file(&metrics, |w| write_reports_json(w, &reports))?;
    Ok(CommandOutput { trace, metrics: Some(metrics), reports })
}
