//! Experiment runner: configuration, single runs, and the reproduction
//! scenarios built on top of them.

mod config;
mod scenarios;
mod summary;
mod world;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use thiserror::Error;

use crate::apps::{sample_link_rate, write_rates_csv, Trace, TraceError};
use crate::netpath::Direction;
use crate::sim::SimTime;

pub use config::{
    AccessConfig, AtsssOptions, ConfigError, ExperimentConfig, LinkConfig, LinkEventConfig, PolicyUpdateConfig,
    SteeringFailure, TransportOptions,
};
pub use scenarios::{failover, fig5, fig6, FailoverReport, Fig5Report, Fig6Report, ModeRun};
pub use summary::{Completion, FlowSummary, RunSummary, SummaryContext};
pub use world::{CcEntry, DecisionRecord, FlowOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => 1,
        }
    }
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub trace: Trace,
    pub outcomes: Vec<FlowOutcome>,
    /// Congestion-window history, when the config asks for it.
    pub cc_log: Vec<CcEntry>,
    /// Events processed by the scheduler.
    pub events: u64,
    pub end_time: SimTime,
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        if self.summary.complete {
            EXIT_OK
        } else {
            EXIT_INCOMPLETE
        }
    }
}

/// Runs one seeded simulation.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let w = world::World::new(cfg)?;
    let out = w.run();
    let summary = RunSummary::from_trace(
        &out.trace,
        &SummaryContext {
            topology: cfg.topology.as_str(),
            seed: cfg.seed,
            workloads: &cfg.workloads,
            decisions: &out.decisions,
        },
    );
    Ok(RunOutput {
        summary,
        trace: out.trace,
        outcomes: out.outcomes,
        cc_log: out.cc_log,
        events: out.events,
        end_time: out.end_time,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, RunError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes trace.csv, rates.csv and summary.json into `dir`.
pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    out.trace.write_csv(create(dir, "trace.csv")?)?;
    let interval = SimTime::from_secs(1);
    let series = [
        sample_link_rate(&out.trace, Direction::Downlink, interval),
        sample_link_rate(&out.trace, Direction::Uplink, interval),
    ];
    write_rates_csv(create(dir, "rates.csv")?, &series)?;
    let mut w = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, &out.summary).map_err(|e| RunError::Io {
        path: dir.join("summary.json").display().to_string(),
        source: e.into(),
    })?;
    use std::io::Write;
    w.write_all(b"\n").map_err(|source| RunError::Io {
        path: dir.join("summary.json").display().to_string(),
        source,
    })?;
    Ok(())
}
