//! Reproduction scenarios. Each is a composition of [`run`] calls on
//! variants of one base configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::apps::{utilization_ratio, App, WorkloadSpec};
use crate::mptransport::AdvertiseMode;
use crate::netpath::{AccessKind, Direction, LinkState, TopologyMode};
use crate::sim::SimTime;

use super::{run, ConfigError, ExperimentConfig, FlowOutcome, LinkEventConfig, RunError, RunSummary};

#[derive(Clone, Debug, Serialize)]
pub struct ModeRun {
    /// `fbb-only`, `mbb-only` or `fmc`.
    pub label: String,
    pub summary: RunSummary,
}

fn access_of(cfg: &ExperimentConfig, kind: AccessKind) -> Result<String, ConfigError> {
    cfg.accesses
        .iter()
        .find(|a| a.kind == kind)
        .map(|a| a.id.clone())
        .ok_or_else(|| ConfigError::new("accesses", format!("scenario needs a {kind:?} access")))
}

fn with_workload(base: &ExperimentConfig, app: App, direction: Direction) -> ExperimentConfig {
    let mut cfg = base.clone();
    let mut w = WorkloadSpec::new(app, direction);
    if let Some(first) = base.workloads.first() {
        w.transfer_bytes = first.transfer_bytes;
        w.service_class = first.service_class.clone();
    }
    cfg.workloads = vec![w];
    cfg
}

/// Runs the standalone and FMC variants of `cfg` concurrently.
fn three_modes(cfg: &ExperimentConfig) -> Result<(Vec<ModeRun>, String, String), RunError> {
    let fbb = access_of(cfg, AccessKind::Fbb)?;
    let mbb = access_of(cfg, AccessKind::Mbb)?;
    let variants = [
        ("fbb-only", cfg.with_accesses(&[&fbb])),
        ("mbb-only", cfg.with_accesses(&[&mbb])),
        ("fmc", cfg.with_accesses(&[&fbb, &mbb])),
    ];
    for (_, v) in &variants {
        v.validate()?;
    }
    let results: Vec<Result<RunSummary, RunError>> = std::thread::scope(|s| {
        let handles: Vec<_> = variants
            .iter()
            .map(|(_, v)| s.spawn(move || run(v).map(|o| o.summary)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });
    let mut runs = Vec::new();
    for ((label, _), r) in variants.iter().zip(results) {
        runs.push(ModeRun {
            label: label.to_string(),
            summary: r?,
        });
    }
    Ok((runs, fbb, mbb))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("never".to_string(), |x| format!("{x:.1}"))
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig5Report {
    pub app: App,
    pub direction: Direction,
    pub runs: Vec<ModeRun>,
    /// FMC mean rate over standalone mean rate, per access.
    pub utilization: BTreeMap<String, f64>,
    pub fmc_aggregate_mbps: f64,
}

impl Fig5Report {
    pub fn run(&self, label: &str) -> &RunSummary {
        &self.runs.iter().find(|r| r.label == label).expect("known mode").summary
    }

    pub fn table(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "fig5 {} {}", self.app.as_str(), self.direction.short());
        let accesses = &self.run("fmc").accesses;
        let _ = write!(t, "{:<10}", "mode");
        for a in accesses {
            let _ = write!(t, "{:>14}", format!("{a} Mbps"));
        }
        let _ = writeln!(t, "{:>16}{:>14}", "aggregate Mbps", "complete ms");
        for r in &self.runs {
            let f = &r.summary.flows[0];
            let _ = write!(t, "{:<10}", r.label);
            for a in accesses {
                let v = f.mean_rate_mbps.get(a).copied();
                let _ = write!(t, "{:>14}", v.map_or("-".into(), |x| format!("{x:.2}")));
            }
            let done = match f.completion_time_ms {
                super::Completion::AfterMs(v) => format!("{v:.0}"),
                super::Completion::Incomplete => "incomplete".into(),
            };
            let _ = writeln!(t, "{:>16.2}{:>14}", f.aggregate_mean_mbps, done);
        }
        for (a, u) in &self.utilization {
            let _ = writeln!(t, "utilization {a}: {u:.3}");
        }
        t
    }
}

/// Standalone vs. FMC link rates in the base configuration's topology.
pub fn fig5(base: &ExperimentConfig, direction: Direction, app: App) -> Result<Fig5Report, RunError> {
    let cfg = with_workload(base, app, direction);
    let (runs, fbb, mbb) = three_modes(&cfg)?;
    let mut report = Fig5Report {
        app,
        direction,
        runs,
        utilization: BTreeMap::new(),
        fmc_aggregate_mbps: 0.0,
    };
    let fmc = report.run("fmc").flows[0].clone();
    report.fmc_aggregate_mbps = fmc.aggregate_mean_mbps;
    for (label, access) in [("fbb-only", &fbb), ("mbb-only", &mbb)] {
        let alone = report.run(label).flows[0]
            .mean_rate_mbps
            .get(access)
            .copied()
            .unwrap_or(0.0);
        let together = fmc.mean_rate_mbps.get(access).copied().unwrap_or(0.0);
        if alone > 0.0 {
            report
                .utilization
                .insert(access.clone(), utilization_ratio(together, alone));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig6Report {
    pub app: App,
    pub direction: Direction,
    pub runs: Vec<ModeRun>,
}

impl Fig6Report {
    /// Per-link setup times of one mode, in ms.
    pub fn setup(&self, label: &str) -> &BTreeMap<String, Option<f64>> {
        &self
            .runs
            .iter()
            .find(|r| r.label == label)
            .expect("known mode")
            .summary
            .flows[0]
            .setup_time_ms
    }

    /// Earliest data transmission of a mode across its links, in ms.
    pub fn session_setup(&self, label: &str) -> Option<f64> {
        self.setup(label).values().flatten().copied().reduce(f64::min)
    }

    pub fn table(&self) -> String {
        let mut t = String::new();
        let _ = writeln!(t, "fig6 {} {}", self.app.as_str(), self.direction.short());
        let accesses = self
            .runs
            .iter()
            .find(|r| r.label == "fmc")
            .expect("fmc run")
            .summary
            .accesses
            .clone();
        let _ = write!(t, "{:<10}", "mode");
        for a in &accesses {
            let _ = write!(t, "{:>14}", format!("{a} setup ms"));
        }
        let _ = writeln!(t, "{:>14}", "session ms");
        for r in &self.runs {
            let _ = write!(t, "{:<10}", r.label);
            for a in &accesses {
                let v = self.setup(&r.label).get(a).copied().flatten();
                let present = self.setup(&r.label).contains_key(a);
                let _ = write!(t, "{:>14}", if present { fmt_opt(v) } else { "-".into() });
            }
            let _ = writeln!(t, "{:>14}", fmt_opt(self.session_setup(&r.label)));
        }
        t
    }
}

/// Session setup times on the converged core with fast address
/// advertisement, against each access alone.
pub fn fig6(base: &ExperimentConfig, direction: Direction, app: App) -> Result<Fig6Report, RunError> {
    let mut cfg = with_workload(base, app, direction);
    cfg.topology = TopologyMode::ConvergedCore;
    cfg.transport.advertise_mode = AdvertiseMode::Fast;
    if cfg.policies.is_none() {
        cfg.policies = Some(ExperimentConfig::default_policies());
    }
    let (runs, _, _) = three_modes(&cfg)?;
    Ok(Fig6Report { app, direction, runs })
}

#[derive(Clone, Debug, Serialize)]
pub struct FailoverReport {
    pub kill_at_ms: f64,
    pub restore_at_ms: Option<f64>,
    pub killed: Vec<String>,
    pub summary: RunSummary,
    #[serde(skip)]
    pub outcomes: Vec<FlowOutcome>,
    /// Time from the kill to the first steering decision it triggered.
    pub decision_latency_ms: Option<f64>,
}

impl FailoverReport {
    pub fn table(&self) -> String {
        let mut t = String::new();
        let f = &self.summary.flows[0];
        let _ = writeln!(
            t,
            "failover: {} down at {:.1} ms",
            self.killed.join("+"),
            self.kill_at_ms
        );
        if let Some(r) = self.restore_at_ms {
            let _ = writeln!(t, "restored at {r:.1} ms");
        }
        let _ = writeln!(t, "delivered {} of {} bytes", f.delivered_bytes, f.transfer_bytes);
        let done = match f.completion_time_ms {
            super::Completion::AfterMs(v) => format!("{v:.0} ms"),
            super::Completion::Incomplete => "incomplete".into(),
        };
        let _ = writeln!(t, "completion: {done}");
        let _ = writeln!(
            t,
            "decision latency: {}",
            fmt_opt(self.decision_latency_ms).replace("never", "none")
        );
        for d in &self.summary.decisions {
            let _ = writeln!(
                t,
                "  {:>10.1} ms  {:<10} {:<12} {}",
                d.at_us as f64 / 1000.0,
                d.trigger,
                d.decision,
                d.accesses.join(",")
            );
        }
        t
    }
}

/// Takes the `killed` accesses down at `kill_at` (and back up at
/// `restore_at`) during the base configuration's workload.
pub fn failover(
    base: &ExperimentConfig,
    kill_at: SimTime,
    restore_at: Option<SimTime>,
    killed: &[String],
) -> Result<FailoverReport, RunError> {
    let mut cfg = base.clone();
    for (i, a) in killed.iter().enumerate() {
        if !cfg.accesses.iter().any(|x| &x.id == a) {
            return Err(ConfigError::new(format!("kill[{i}]"), format!("unknown access `{a}`")).into());
        }
        cfg.link_events.push(LinkEventConfig {
            at_ms: kill_at.as_millis_f64(),
            access: a.clone(),
            state: LinkState::Down,
        });
        if let Some(r) = restore_at {
            cfg.link_events.push(LinkEventConfig {
                at_ms: r.as_millis_f64(),
                access: a.clone(),
                state: LinkState::Up,
            });
        }
    }
    let out = run(&cfg)?;
    let kill_us = kill_at.as_micros();
    let decision_latency_ms = out
        .summary
        .decisions
        .iter()
        .find(|d| d.at_us >= kill_us && d.trigger == "link-down")
        .map(|d| (d.at_us - kill_us) as f64 / 1000.0);
    Ok(FailoverReport {
        kill_at_ms: kill_at.as_millis_f64(),
        restore_at_ms: restore_at.map(SimTime::as_millis_f64),
        killed: killed.to_vec(),
        summary: out.summary,
        outcomes: out.outcomes,
        decision_latency_ms,
    })
}
