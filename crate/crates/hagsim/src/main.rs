use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use hagsim_core::apps::App;
use hagsim_core::harness::{self, ConfigError, ExperimentConfig, RunError, EXIT_CONFIG, EXIT_INCOMPLETE, EXIT_OK};
use hagsim_core::netpath::{Direction, TopologyMode};
use hagsim_core::SimTime;

#[derive(Parser)]
#[command(name = "hagsim", version, about = "Fixed-mobile hybrid access simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Dl,
    Ul,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Dl => Direction::Downlink,
            Dir::Ul => Direction::Uplink,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AppArg {
    Scp,
    Wget,
    Iperf,
}

impl From<AppArg> for App {
    fn from(a: AppArg) -> Self {
        match a {
            AppArg::Scp => App::Scp,
            AppArg::Wget => App::Wget,
            AppArg::Iperf => App::Iperf,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Topo {
    EndpointMptcp,
    Hag,
    ConvergedCore,
}

impl From<Topo> for TopologyMode {
    fn from(t: Topo) -> Self {
        match t {
            Topo::EndpointMptcp => TopologyMode::EndpointMptcp,
            Topo::Hag => TopologyMode::Hag,
            Topo::ConvergedCore => TopologyMode::ConvergedCore,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Base configuration; the built-in testbed if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bulk transfer size in bytes.
    #[arg(long)]
    transfer_bytes: Option<u64>,
    /// Write the report as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write trace.csv, rates.csv, summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Link rates with and without FMC.
    Fig5 {
        #[arg(long, value_enum, default_value = "dl")]
        direction: Dir,
        #[arg(long, value_enum, default_value = "scp")]
        app: AppArg,
        #[command(flatten)]
        common: Common,
    },
    /// Session setup times with and without FMC.
    Fig6 {
        #[arg(long, value_enum, default_value = "dl")]
        direction: Dir,
        #[arg(long, value_enum, default_value = "scp")]
        app: AppArg,
        #[command(flatten)]
        common: Common,
    },
    /// Kill one or more accesses mid-transfer.
    Failover {
        #[arg(long)]
        kill_at: f64,
        #[arg(long)]
        restore_at: Option<f64>,
        /// Access ids to take down.
        #[arg(long, default_value = "fbb", value_delimiter = ',')]
        kill: Vec<String>,
        #[arg(long, value_enum)]
        topology: Option<Topo>,
        #[command(flatten)]
        common: Common,
    },
}

fn base_config(c: &Common) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::testbed(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(b) = c.transfer_bytes {
        for w in &mut cfg.workloads {
            w.transfer_bytes = b;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(path: Option<&Path>, v: &impl serde::Serialize) -> anyhow::Result<()> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(v)?;
        std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn execute(cmd: Cmd) -> anyhow::Result<i32> {
    match cmd {
        Cmd::Run { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = out
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out"));
            let o = harness::run(&cfg)?;
            harness::write_artifacts(&o, &dir)?;
            println!("{}", serde_json::to_string_pretty(&o.summary)?);
            Ok(o.exit_code())
        }
        Cmd::Fig5 { direction, app, common } => {
            let cfg = base_config(&common)?;
            let r = harness::fig5(&cfg, direction.into(), app.into())?;
            print!("{}", r.table());
            write_json(common.json.as_deref(), &r)?;
            let complete = r.runs.iter().all(|m| m.summary.complete);
            Ok(if complete { EXIT_OK } else { EXIT_INCOMPLETE })
        }
        Cmd::Fig6 { direction, app, common } => {
            let cfg = base_config(&common)?;
            let r = harness::fig6(&cfg, direction.into(), app.into())?;
            print!("{}", r.table());
            write_json(common.json.as_deref(), &r)?;
            let complete = r.runs.iter().all(|m| m.summary.complete);
            Ok(if complete { EXIT_OK } else { EXIT_INCOMPLETE })
        }
        Cmd::Failover {
            kill_at,
            restore_at,
            kill,
            topology,
            common,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(t) = topology {
                cfg.topology = t.into();
                if cfg.policies.is_none() {
                    cfg.policies = Some(ExperimentConfig::default_policies());
                }
                cfg.validate()?;
            }
            let r = harness::failover(
                &cfg,
                SimTime::from_millis_f64(kill_at),
                restore_at.map(SimTime::from_millis_f64),
                &kill,
            )?;
            print!("{}", r.table());
            write_json(common.json.as_deref(), &r)?;
            Ok(if r.summary.complete { EXIT_OK } else { EXIT_INCOMPLETE })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("hagsim: {e:#}");
            let code = match (e.downcast_ref::<RunError>(), e.downcast_ref::<ConfigError>()) {
                (Some(r), _) => r.exit_code(),
                (None, Some(_)) => EXIT_CONFIG,
                _ => 1,
            };
            ExitCode::from(code as u8)
        }
    }
}
