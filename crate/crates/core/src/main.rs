use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command};
use depthfuse::io::{cmd_replay, cmd_simulate, parse_config_file, path_entry, RunParams, Scope, PARAMS};
use depthfuse::{Error, Result};

const EXIT_CODES: &str = "Exit status: 0 success, 1 usage or configuration error, 2 I/O error.
Diagnostics go to stderr; set DEPTHFUSE_LOG_LEVEL to error, warn, info or debug.";

fn param_args(scopes: &[Scope]) -> Vec<Arg> {
    PARAMS
        .iter()
        .filter(|(_, scope, _)| scopes.contains(scope))
        .map(|(name, _, help)| Arg::new(*name).long(*name).value_name("VALUE").help(*help))
        .collect()
}

fn cli() -> Command {
    let config = Arg::new("config").long("config").value_name("FILE").help("key=value parameter file; flags override it");
    let out = Arg::new("out").long("out").value_name("DIR").help("output directory");
    Command::new("depthfuse")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Camera-to-body distance from fused keypoint and depth measurements")
        .after_help(EXIT_CODES)
        .subcommand_required(true)
        .subcommand(
            Command::new("simulate")
                .about("Simulate a scenario, fuse it and score keypoint, depth and fused estimates")
                .arg(out.clone())
                .arg(config.clone())
                .args(param_args(&[Scope::Scenario, Scope::Filter])),
        )
        .subcommand(
            Command::new("replay")
                .about("Fuse a recorded t,sh_px,depth_cb_m,gt_cb_m log")
                .arg(Arg::new("log").long("log").value_name("FILE").help("sensor log to replay"))
                .arg(out)
                .arg(config)
                .args(param_args(&[Scope::Filter])),
        )
}

/// Config file entries first, then flags in table order.
fn collect_pairs(m: &ArgMatches) -> Result<Vec<(String, String)>> {
    let mut pairs = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
            parse_config_file(&text)?
        }
        None => Vec::new(),
    };
    for id in ["out", "log"].into_iter().chain(PARAMS.iter().map(|(name, _, _)| *name)) {
        if let Ok(Some(v)) = m.try_get_one::<String>(id) {
            pairs.push((id.to_string(), v.clone()));
        }
    }
    Ok(pairs)
}

fn required_path(pairs: &[(String, String)], key: &str) -> Result<PathBuf> {
    path_entry(pairs, key).ok_or_else(|| Error::Config(format!("missing --{key}")))
}

fn tunables(pairs: Vec<(String, String)>, allowed: &[Scope]) -> Result<Vec<(String, String)>> {
    let mut kept = Vec::new();
    for (k, v) in pairs {
        if k == "out" || k == "log" {
            continue;
        }
        // flags outside the scope never get past clap, so these come from a shared config file
        match PARAMS.iter().find(|(name, _, _)| *name == k) {
            Some((_, scope, _)) if allowed.contains(scope) => kept.push((k, v)),
            Some(_) => log::debug!("ignoring '{k}' for this command"),
            None => return Err(Error::Config(format!("unknown parameter '{k}'"))),
        }
    }
    Ok(kept)
}

fn run(m: &ArgMatches) -> Result<()> {
    match m.subcommand() {
        Some(("simulate", sub)) => {
            let pairs = collect_pairs(sub)?;
            let out = required_path(&pairs, "out")?;
            let params = RunParams::from_pairs(&tunables(pairs, &[Scope::Scenario, Scope::Filter])?)?;
            cmd_simulate(&params, &out).map(|_| ())
        }
        Some(("replay", sub)) => {
            let pairs = collect_pairs(sub)?;
            let out = required_path(&pairs, "out")?;
            let log = required_path(&pairs, "log")?;
            let params = RunParams::from_pairs(&tunables(pairs, &[Scope::Filter])?)?;
            cmd_replay(&log, &params.fusion, &out).map(|_| ())
        }
        _ => Err(Error::Config("unknown command".into())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEPTHFUSE_LOG_LEVEL", "warn"))
        .target(env_logger::Target::Stderr)
        .init();

    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("depthfuse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
