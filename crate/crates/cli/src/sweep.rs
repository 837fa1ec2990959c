use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use clap::ValueEnum;
use log::warn;

use crate::config::{ConfigError, RunConfig};
use crate::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Param {
    #[value(name = "P")]
    P,
    #[value(name = "M")]
    M,
    #[value(name = "X_max")]
    XMax,
}

fn apply(cfg: &RunConfig, param: Param, value: &str) -> Result<RunConfig, ConfigError> {
    let mut c = cfg.clone();
    let bad = |e: &dyn std::fmt::Display| ConfigError(format!("sweep value {value:?}: {e}"));
    match param {
        Param::P => c.grid.nodes = value.trim().parse().map_err(|e| bad(&e))?,
        Param::M => c.grid.points = value.trim().parse().map_err(|e| bad(&e))?,
        Param::XMax => c.grid.depth = value.trim().parse().map_err(|e| bad(&e))?,
    }
    Ok(c)
}

const HEADER: [&str; 7] = ["value", "residual", "bc_violation", "estimate_ratio", "truncation_estimate", "wall_time", "status"];

/// Solves once per value; per-point failures are recorded in the status
/// column. Returns whether every point succeeded.
pub fn run(cfg: &RunConfig, param: Param, values: &[String], out: Option<&Path>) -> Result<bool> {
    if values.len() < 2 {
        return Err(ConfigError("a sweep needs at least two values".into()).into());
    }
    let mut rows = Vec::new();
    let mut all_ok = true;
    for v in values {
        let start = Instant::now();
        let outcome = apply(cfg, param, v)
            .and_then(|c| c.validate().map(|_| c))
            .map_err(anyhow::Error::from)
            .and_then(|c| run::solve(&c));
        let secs = start.elapsed().as_secs_f64();
        let row = match outcome {
            Ok((_, rep)) => vec![
                v.trim().to_string(),
                format!("{:.6e}", rep.report.relative_residual),
                format!("{:.6e}", rep.report.bc_violation),
                rep.estimate_ratio.map(|r| format!("{r:.6e}")).unwrap_or_default(),
                format!("{:.6e}", rep.report.truncation_estimate),
                format!("{secs:.3}"),
                "ok".into(),
            ],
            Err(e) => {
                all_ok = false;
                warn!("sweep point {v}: {e:#}");
                let mut r = vec![v.trim().to_string(), String::new(), String::new(), String::new(), String::new()];
                r.push(format!("{secs:.3}"));
                r.push(format!("error: {e:#}"));
                r
            }
        };
        rows.push(row);
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(HEADER)?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    std::io::stdout().write_all(&buf)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), &buf)?;
    }
    Ok(all_ok)
}
