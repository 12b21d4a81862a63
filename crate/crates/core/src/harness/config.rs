use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apps::WorkloadSpec;
use crate::atsss::AtsssPolicy;
use crate::mptransport::{AdvertiseMode, SchedulerKind, TransportConfig};
use crate::netpath::{bdp_queue_bytes, AccessKind, AccessSpec, LinkSpec, LinkState, TopologyMode};
use crate::sim::SimTime;

const DEFAULT_TESTBED: &str = include_str!("../../configs/testbed.json");
const DEFAULT_POLICY: &str = include_str!("../../configs/policy.json");

/// Invalid configuration, naming the offending field.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("config error at `{field}`: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl ToString) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub rate_mbps: f64,
    pub owd_ms: f64,
    /// Drop-tail capacity; defaults to one bandwidth-delay product.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_bytes: Option<u64>,
    #[serde(default)]
    pub loss: f64,
}

impl LinkConfig {
    pub fn spec(&self) -> LinkSpec {
        let rate_bps = (self.rate_mbps * 1e6).round() as u64;
        let owd = SimTime::from_millis_f64(self.owd_ms);
        LinkSpec {
            rate_bps,
            owd,
            queue_cap_bytes: self.queue_bytes.unwrap_or_else(|| bdp_queue_bytes(rate_bps, owd + owd)),
            loss_prob: self.loss,
            state: LinkState::Up,
        }
    }

    fn validate(&self, field: &str) -> Result<(), ConfigError> {
        if !(self.rate_mbps > 0.0 && self.rate_mbps.is_finite()) {
            return Err(ConfigError::new(
                format!("{field}.rate_mbps"),
                "must be a positive number",
            ));
        }
        if !(self.owd_ms >= 0.0 && self.owd_ms.is_finite()) {
            return Err(ConfigError::new(format!("{field}.owd_ms"), "must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.loss) {
            return Err(ConfigError::new(format!("{field}.loss"), "must be in [0, 1)"));
        }
        if let Err(e) = self.spec().validate() {
            return Err(ConfigError::new(format!("{field}.queue_bytes"), e));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessConfig {
    pub id: String,
    pub kind: AccessKind,
    pub uplink: LinkConfig,
    pub downlink: LinkConfig,
}

impl AccessConfig {
    pub fn spec(&self) -> AccessSpec {
        AccessSpec {
            id: self.id.as_str().into(),
            kind: self.kind,
            uplink: self.uplink.spec(),
            downlink: self.downlink.spec(),
        }
    }
}

fn default_initial_cwnd() -> u32 {
    10
}
fn default_mss() -> u32 {
    1440
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportOptions {
    #[serde(default)]
    pub advertise_mode: AdvertiseMode,
    #[serde(default)]
    pub scheduler: SchedulerKind,
    #[serde(default = "default_initial_cwnd")]
    pub initial_cwnd_segments: u32,
    #[serde(default = "default_mss")]
    pub mss: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub send_buffer_bytes: Option<u64>,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            advertise_mode: AdvertiseMode::Standard,
            scheduler: SchedulerKind::MinRtt,
            initial_cwnd_segments: default_initial_cwnd(),
            mss: default_mss(),
            send_buffer_bytes: None,
        }
    }
}

impl TransportOptions {
    pub fn transport_config(&self) -> TransportConfig {
        TransportConfig {
            mss: self.mss,
            initial_cwnd_segments: self.initial_cwnd_segments,
            send_buffer_bytes: self.send_buffer_bytes,
            advertise_mode: self.advertise_mode,
            scheduler: self.scheduler,
            ..TransportConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteeringFailure {
    /// The flow never starts.
    #[default]
    Reject,
    /// Steering is retried every monitor window.
    Queue,
}

fn default_window_ms() -> f64 {
    1000.0
}
fn default_cp_delay_ms() -> f64 {
    53.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtsssOptions {
    #[serde(default = "default_window_ms")]
    pub monitor_window_ms: f64,
    /// Control-plane delay for conveying policy updates to the UE and UPF.
    #[serde(default = "default_cp_delay_ms")]
    pub cp_delay_ms: f64,
    #[serde(default)]
    pub on_steering_failure: SteeringFailure,
}

impl Default for AtsssOptions {
    fn default() -> Self {
        AtsssOptions {
            monitor_window_ms: default_window_ms(),
            cp_delay_ms: default_cp_delay_ms(),
            on_steering_failure: SteeringFailure::Reject,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEventConfig {
    pub at_ms: f64,
    pub access: String,
    pub state: LinkState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyUpdateConfig {
    pub at_ms: f64,
    pub policies: Vec<AtsssPolicy>,
}

fn default_node_delay_ms() -> f64 {
    0.5
}
fn default_seed() -> u64 {
    1
}
fn default_t_end_ms() -> f64 {
    600_000.0
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: TopologyMode,
    /// Processing delay of every core node.
    #[serde(default = "default_node_delay_ms")]
    pub node_delay_ms: f64,
    pub accesses: Vec<AccessConfig>,
    #[serde(default)]
    pub transport: TransportOptions,
    /// ATSSS policy table, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy_file: Option<PathBuf>,
    #[serde(default)]
    pub atsss: AtsssOptions,
    pub workloads: Vec<WorkloadSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub link_events: Vec<LinkEventConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub policy_updates: Vec<PolicyUpdateConfig>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_t_end_ms")]
    pub t_end_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Keep the packet trace (needed for trace.csv and the summary).
    #[serde(default = "default_true")]
    pub trace: bool,
    /// Keep every congestion-window change of every subflow.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub record_cc: bool,
    /// Loaded contents of `policy_file`.
    #[serde(skip)]
    pub policies: Option<Vec<AtsssPolicy>>,
}

/// Where relative policy paths resolve.
enum Base<'a> {
    Dir(&'a Path),
    Embedded,
}

impl ExperimentConfig {
    /// Parses a config document. The policy file is not loaded.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            ConfigError::new(field, e.into_inner())
        })
    }

    /// Reads, resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(Base::Dir(dir))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The built-in testbed configuration.
    pub fn testbed() -> Self {
        let mut cfg = Self::parse(DEFAULT_TESTBED).expect("embedded testbed config parses");
        cfg.resolve(Base::Embedded).expect("embedded policy parses");
        cfg.validate().expect("embedded testbed config is valid");
        cfg
    }

    pub fn default_policies() -> Vec<AtsssPolicy> {
        parse_policies(DEFAULT_POLICY).expect("embedded policy parses")
    }

    fn resolve(&mut self, base: Base<'_>) -> Result<(), ConfigError> {
        let Some(p) = &self.policy_file else {
            return Ok(());
        };
        let text = match base {
            Base::Embedded => DEFAULT_POLICY.to_string(),
            Base::Dir(dir) => {
                let full = if p.is_absolute() { p.clone() } else { dir.join(p) };
                std::fs::read_to_string(&full)
                    .map_err(|e| ConfigError::new("policy_file", format!("{}: {e}", full.display())))?
            }
        };
        self.policies = Some(parse_policies(&text)?);
        Ok(())
    }

    pub fn t_end(&self) -> SimTime {
        SimTime::from_millis_f64(self.t_end_ms)
    }

    pub fn node_delay(&self) -> SimTime {
        SimTime::from_millis_f64(self.node_delay_ms)
    }

    /// Checks everything a run relies on. Called before any event is
    /// scheduled.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.accesses.is_empty() {
            return Err(ConfigError::new("accesses", "at least one access is required"));
        }
        for (i, a) in self.accesses.iter().enumerate() {
            if a.id.is_empty() {
                return Err(ConfigError::new(format!("accesses[{i}].id"), "must not be empty"));
            }
            if self.accesses[..i].iter().any(|b| b.id == a.id) {
                return Err(ConfigError::new(
                    format!("accesses[{i}].id"),
                    format!("`{}` defined more than once", a.id),
                ));
            }
            a.uplink.validate(&format!("accesses[{i}].uplink"))?;
            a.downlink.validate(&format!("accesses[{i}].downlink"))?;
        }
        if !(self.node_delay_ms >= 0.0 && self.node_delay_ms.is_finite()) {
            return Err(ConfigError::new("node_delay_ms", "must be non-negative"));
        }
        if !(self.t_end_ms > 0.0 && self.t_end_ms.is_finite()) {
            return Err(ConfigError::new("t_end_ms", "must be positive"));
        }
        let t = &self.transport;
        if t.mss == 0 || t.mss > 1440 {
            return Err(ConfigError::new("transport.mss", "must be in 1..=1440"));
        }
        if t.initial_cwnd_segments == 0 {
            return Err(ConfigError::new("transport.initial_cwnd_segments", "must be positive"));
        }
        if t.send_buffer_bytes.is_some_and(|b| b < t.mss as u64) {
            return Err(ConfigError::new(
                "transport.send_buffer_bytes",
                "must hold at least one segment",
            ));
        }
        if t.advertise_mode == AdvertiseMode::Fast && self.topology != TopologyMode::ConvergedCore {
            return Err(ConfigError::new(
                "transport.advertise_mode",
                "fast advertisement requires the converged-core topology",
            ));
        }
        if self.topology == TopologyMode::ConvergedCore && self.policies.is_none() {
            return Err(ConfigError::new(
                "policy_file",
                "converged-core topology needs an ATSSS policy file",
            ));
        }
        if self.atsss.monitor_window_ms.is_nan() || self.atsss.monitor_window_ms <= 0.0 {
            return Err(ConfigError::new("atsss.monitor_window_ms", "must be positive"));
        }
        if self.atsss.cp_delay_ms.is_nan() || self.atsss.cp_delay_ms < 0.0 {
            return Err(ConfigError::new("atsss.cp_delay_ms", "must be non-negative"));
        }
        if self.workloads.is_empty() {
            return Err(ConfigError::new("workloads", "at least one workload is required"));
        }
        for (i, w) in self.workloads.iter().enumerate() {
            if w.transfer_bytes == 0 {
                return Err(ConfigError::new(
                    format!("workloads[{i}].transfer_bytes"),
                    "must be positive",
                ));
            }
            if w.start_at_ms.is_nan() || w.start_at_ms < 0.0 {
                return Err(ConfigError::new(
                    format!("workloads[{i}].start_at_ms"),
                    "must be non-negative",
                ));
            }
            if let Err(e) = w.graph().validate() {
                return Err(ConfigError::new(format!("workloads[{i}].setup"), e));
            }
        }
        for (i, ev) in self.link_events.iter().enumerate() {
            if !self.accesses.iter().any(|a| a.id == ev.access) {
                return Err(ConfigError::new(
                    format!("link_events[{i}].access"),
                    format!("unknown access `{}`", ev.access),
                ));
            }
            if ev.at_ms.is_nan() || ev.at_ms < 0.0 {
                return Err(ConfigError::new(
                    format!("link_events[{i}].at_ms"),
                    "must be non-negative",
                ));
            }
        }
        if let Some(ps) = &self.policies {
            check_policies(ps, "policy_file")?;
        }
        for (i, u) in self.policy_updates.iter().enumerate() {
            check_policies(&u.policies, &format!("policy_updates[{i}].policies"))?;
        }
        Ok(())
    }

    /// Same experiment restricted to the named accesses.
    pub fn with_accesses(&self, ids: &[&str]) -> Self {
        let mut c = self.clone();
        c.accesses.retain(|a| ids.contains(&a.id.as_str()));
        c.link_events.retain(|e| ids.contains(&e.access.as_str()));
        c
    }
}

fn parse_policies(text: &str) -> Result<Vec<AtsssPolicy>, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| ConfigError::new(format!("policy_file:{}", e.path()), e.into_inner()))
}

fn check_policies(ps: &[AtsssPolicy], field: &str) -> Result<(), ConfigError> {
    for (i, p) in ps.iter().enumerate() {
        p.validate().map_err(|e| ConfigError::new(format!("{field}[{i}]"), e))?;
    }
    if !ps.iter().any(|p| p.service_class == crate::atsss::DEFAULT_CLASS) {
        return Err(ConfigError::new(field, "no `default` service class"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn testbed_defaults() {
        let c = ExperimentConfig::testbed();
        assert_eq!(c.topology, TopologyMode::Hag);
        assert_eq!(c.accesses.len(), 2);
        let fbb = c.accesses[0].spec();
        assert_eq!(fbb.downlink.rate_bps, 70_000_000);
        assert_eq!(fbb.downlink.owd, SimTime::from_micros(6500));
        assert!(c.policies.is_some());
    }

    #[test]
    fn error_names_field() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_TESTBED).unwrap();
        v["accesses"][1]["downlink"]["rate_mbps"] = "fast".into();
        let e = ExperimentConfig::parse(&v.to_string()).unwrap_err();
        assert_eq!(e.field, "accesses[1].downlink.rate_mbps");
    }

    #[test]
    fn converged_core_requires_policy() {
        let mut c = ExperimentConfig::testbed();
        c.topology = TopologyMode::ConvergedCore;
        c.policy_file = None;
        c.policies = None;
        assert_eq!(c.validate().unwrap_err().field, "policy_file");
    }

    #[test]
    fn fast_advertise_requires_converged_core() {
        let mut c = ExperimentConfig::testbed();
        c.transport.advertise_mode = AdvertiseMode::Fast;
        assert_eq!(c.validate().unwrap_err().field, "transport.advertise_mode");
    }

    #[test]
    fn duplicate_access_rejected() {
        let mut c = ExperimentConfig::testbed();
        c.accesses[1].id = "fbb".into();
        assert_eq!(c.validate().unwrap_err().field, "accesses[1].id");
    }
}
