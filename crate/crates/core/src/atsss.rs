//! Access traffic steering, switching and splitting.
//!
//! Policies are stored per service class at the SMF and conveyed to the two
//! user-plane enforcement points: the UE for UE-initiated (uplink) flows and
//! the UPF for network-initiated (downlink) flows. The UPF-side monitor
//! tracks per-access throughput, RTT and loss for each flow, and the
//! evaluator turns those measurements into steer/switch/split decisions
//! applied through the transport's subflow priorities.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mptransport::Priority;
use crate::netpath::{AccessId, Direction};
use crate::sim::SimTime;

pub const DEFAULT_CLASS: &str = "default";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteeringMode {
    Steer,
    Switch,
    Split,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_throughput_bps: Option<f64>,
    #[serde(default, rename = "max_rtt_us", skip_serializing_if = "Option::is_none")]
    pub max_rtt: Option<SimTime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_loss_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtsssPolicy {
    pub service_class: String,
    pub mode: SteeringMode,
    pub access_priority: Vec<AccessId>,
    pub thresholds: Thresholds,
    pub hysteresis: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum AtsssError {
    #[error("policy `{0}`: access_priority is empty")]
    EmptyPriority(String),
    #[error("policy `{0}`: thresholds must be non-negative")]
    NegativeThreshold(String),
    #[error("policy `{0}`: hysteresis {1} outside [0, 1)")]
    BadHysteresis(String, f64),
    #[error("policy table has no `{DEFAULT_CLASS}` entry")]
    NoDefaultEntry,
    #[error("no access qualifies for service class `{0}`")]
    NoQualifyingAccess(String),
}

impl AtsssPolicy {
    pub fn validate(&self) -> Result<(), AtsssError> {
        if self.access_priority.is_empty() {
            return Err(AtsssError::EmptyPriority(self.service_class.clone()));
        }
        let t = &self.thresholds;
        let bad = |v: f64| v.is_nan() || v < 0.0;
        let neg = t.min_throughput_bps.is_some_and(bad) || t.max_loss_rate.is_some_and(bad);
        if neg {
            return Err(AtsssError::NegativeThreshold(self.service_class.clone()));
        }
        if !(0.0..1.0).contains(&self.hysteresis) {
            return Err(AtsssError::BadHysteresis(self.service_class.clone(), self.hysteresis));
        }
        Ok(())
    }
}

/// Measured conditions of one access as seen by a flow monitor.
///
/// Unknown metrics (`None`) never disqualify an access.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessState {
    pub access_id: AccessId,
    pub up: bool,
    pub measured_rtt: Option<SimTime>,
    pub measured_throughput_bps: Option<f64>,
    pub measured_loss_rate: Option<f64>,
}

impl AccessState {
    pub fn unmeasured(access_id: AccessId, up: bool) -> Self {
        AccessState {
            access_id,
            up,
            measured_rtt: None,
            measured_throughput_bps: None,
            measured_loss_rate: None,
        }
    }
}

/// Checks thresholds scaled by `slack`: `slack > 0` widens the acceptable
/// region (deadband), `slack < 0` narrows it (margin).
fn within(t: &Thresholds, a: &AccessState, slack: f64) -> bool {
    if let (Some(min), Some(tp)) = (t.min_throughput_bps, a.measured_throughput_bps) {
        if tp < min * (1.0 - slack) {
            return false;
        }
    }
    if let (Some(max), Some(rtt)) = (t.max_rtt, a.measured_rtt) {
        if rtt.as_micros() as f64 > max.as_micros() as f64 * (1.0 + slack) {
            return false;
        }
    }
    if let (Some(max), Some(loss)) = (t.max_loss_rate, a.measured_loss_rate) {
        if loss > max * (1.0 + slack) {
            return false;
        }
    }
    true
}

pub fn violates(t: &Thresholds, a: &AccessState) -> bool {
    !within(t, a, 0.0)
}

/// Violation large enough to leave the hysteresis band.
pub fn violates_beyond_band(t: &Thresholds, a: &AccessState, hysteresis: f64) -> bool {
    !within(t, a, hysteresis)
}

pub fn satisfies_with_margin(t: &Thresholds, a: &AccessState, hysteresis: f64) -> bool {
    within(t, a, -hysteresis)
}

fn qualifies(policy: &AtsssPolicy, a: &AccessState) -> bool {
    a.up && !violates(&policy.thresholds, a)
}

/// Picks accesses for a flow: the first access in priority order that is up
/// and violates no threshold, or, in split mode, every such access (in
/// priority order).
pub fn select_access(policy: &AtsssPolicy, accesses: &[AccessState]) -> Result<Vec<AccessId>, AtsssError> {
    let mut chosen = Vec::new();
    for id in &policy.access_priority {
        let Some(a) = accesses.iter().find(|a| &a.access_id == id) else {
            continue;
        };
        if qualifies(policy, a) {
            chosen.push(id.clone());
            if policy.mode != SteeringMode::Split {
                break;
            }
        }
    }
    if chosen.is_empty() {
        return Err(AtsssError::NoQualifyingAccess(policy.service_class.clone()));
    }
    Ok(chosen)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "decision", content = "accesses", rename_all = "snake_case")]
pub enum Decision {
    Stay,
    Switch(AccessId),
    StartSplit(Vec<AccessId>),
    /// Keep only the listed accesses.
    StopSplit(Vec<AccessId>),
}

impl Decision {
    /// Accesses left active by a non-`Stay` decision.
    pub fn active_set(&self) -> Option<Vec<AccessId>> {
        match self {
            Decision::Stay => None,
            Decision::Switch(a) => Some(vec![a.clone()]),
            Decision::StartSplit(v) | Decision::StopSplit(v) => Some(v.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct MonitorSample {
    at: SimTime,
    access: usize,
    acked_bytes: u64,
    acked_segments: u32,
    lost_segments: u32,
}

#[derive(Clone, Debug, Default)]
struct AccessEstimate {
    rtt_ewma: Option<f64>,
    rtt_samples_in_window: u64,
    last_rtt_at: Option<SimTime>,
}

/// One per-access observation fed to the monitor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation<'a> {
    pub access: &'a AccessId,
    pub acked_bytes: u64,
    pub rtt: Option<SimTime>,
    pub lost_segments: u32,
}

/// Sliding-window per-access measurements of one flow.
#[derive(Clone, Debug)]
pub struct FlowMonitor {
    pub flow_id: u32,
    window: SimTime,
    started_at: SimTime,
    accesses: Vec<AccessId>,
    samples: VecDeque<MonitorSample>,
    estimates: Vec<AccessEstimate>,
}

const RTT_GAIN: f64 = 1.0 / 8.0;

impl FlowMonitor {
    pub fn new(flow_id: u32, accesses: Vec<AccessId>, window: SimTime, started_at: SimTime) -> Self {
        assert!(window > SimTime::ZERO, "monitor window must be positive");
        let estimates = vec![AccessEstimate::default(); accesses.len()];
        FlowMonitor {
            flow_id,
            window,
            started_at,
            accesses,
            samples: VecDeque::new(),
            estimates,
        }
    }

    pub fn window(&self) -> SimTime {
        self.window
    }

    pub fn has_full_window(&self, now: SimTime) -> bool {
        now >= self.started_at + self.window
    }

    fn index(&self, id: &AccessId) -> Option<usize> {
        self.accesses.iter().position(|a| a == id)
    }

    fn advance(&mut self, now: SimTime) {
        let horizon = now.saturating_sub(self.window);
        while let Some(s) = self.samples.front() {
            if s.at > horizon {
                break;
            }
            self.samples.pop_front();
        }
        for (i, e) in self.estimates.iter_mut().enumerate() {
            if e.last_rtt_at.is_some_and(|t| t <= horizon) {
                e.rtt_samples_in_window = 0;
            }
            let _ = i;
        }
    }

    /// Records an observation and returns the updated state of its access.
    pub fn monitor_update(&mut self, now: SimTime, obs: Observation<'_>, up: bool) -> AccessState {
        let idx = self.index(obs.access).expect("observation for unknown access");
        self.advance(now);
        self.samples.push_back(MonitorSample {
            at: now,
            access: idx,
            acked_bytes: obs.acked_bytes,
            acked_segments: u32::from(obs.acked_bytes > 0),
            lost_segments: obs.lost_segments,
        });
        if let Some(r) = obs.rtt {
            let e = &mut self.estimates[idx];
            let r = r.as_micros() as f64;
            let in_window = e.rtt_samples_in_window > 0;
            e.rtt_ewma = Some(match e.rtt_ewma {
                Some(prev) if in_window => prev + RTT_GAIN * (r - prev),
                _ => r,
            });
            e.rtt_samples_in_window += 1;
            e.last_rtt_at = Some(now);
        }
        self.state_of(now, idx, up)
    }

    fn state_of(&self, now: SimTime, idx: usize, up: bool) -> AccessState {
        let horizon = now.saturating_sub(self.window);
        let mut bytes = 0u64;
        let mut acked = 0u64;
        let mut lost = 0u64;
        for s in self.samples.iter().filter(|s| s.access == idx && s.at > horizon) {
            bytes += s.acked_bytes;
            acked += s.acked_segments as u64;
            lost += s.lost_segments as u64;
        }
        let e = &self.estimates[idx];
        let rtt_known = e.last_rtt_at.is_some_and(|t| t > horizon);
        AccessState {
            access_id: self.accesses[idx].clone(),
            up,
            measured_rtt: rtt_known
                .then(|| e.rtt_ewma.map(|r| SimTime::from_micros(r.round() as u64)))
                .flatten(),
            measured_throughput_bps: self
                .has_full_window(now)
                .then(|| bytes as f64 * 8.0 / self.window.as_secs_f64()),
            measured_loss_rate: (acked + lost > 0).then(|| lost as f64 / (acked + lost) as f64),
        }
    }

    /// Current state of every access, given their availability.
    pub fn access_states(&mut self, now: SimTime, up: impl Fn(&AccessId) -> bool) -> Vec<AccessState> {
        self.advance(now);
        (0..self.accesses.len())
            .map(|i| self.state_of(now, i, up(&self.accesses[i])))
            .collect()
    }
}

/// Per-flow decision state: the active access set, rate limiting and how
/// long each access has been out of its thresholds.
#[derive(Clone, Debug)]
pub struct Evaluator {
    window: SimTime,
    active: Vec<AccessId>,
    last_decision_at: Option<SimTime>,
    violating_since: BTreeMap<AccessId, SimTime>,
}

impl Evaluator {
    pub fn new(window: SimTime, initial: Vec<AccessId>) -> Self {
        Evaluator {
            window,
            active: initial,
            last_decision_at: None,
            violating_since: BTreeMap::new(),
        }
    }

    pub fn active(&self) -> &[AccessId] {
        &self.active
    }

    fn commit(&mut self, now: SimTime, d: Decision) -> Decision {
        if let Some(set) = d.active_set() {
            self.active = set;
            self.last_decision_at = Some(now);
            self.violating_since.clear();
        }
        d
    }

    /// Decides whether the flow stays, switches, or starts/stops splitting.
    ///
    /// Loss of an active access is acted on immediately; otherwise at most
    /// one decision is taken per window, and a threshold violation must
    /// persist for a full window beyond the hysteresis band before it
    /// triggers a move.
    pub fn evaluate(
        &mut self,
        now: SimTime,
        monitor: &FlowMonitor,
        policy: &AtsssPolicy,
        accesses: &[AccessState],
    ) -> Decision {
        let state = |id: &AccessId| accesses.iter().find(|a| &a.access_id == id);
        let h = policy.hysteresis;
        let t = &policy.thresholds;

        // Availability overrides thresholds and the rate limit.
        let alive: Vec<AccessId> = self
            .active
            .iter()
            .filter(|id| state(id).is_some_and(|a| a.up))
            .cloned()
            .collect();
        if alive.len() < self.active.len() {
            let keep: Vec<AccessId> = alive
                .into_iter()
                .filter(|id| state(id).is_some_and(|a| qualifies(policy, a)))
                .collect();
            if !keep.is_empty() {
                return self.commit(now, Decision::StopSplit(keep));
            }
            return match select_access(policy, accesses) {
                Ok(sel) if policy.mode == SteeringMode::Split && sel.len() > 1 => {
                    self.commit(now, Decision::StartSplit(sel))
                }
                Ok(sel) => self.commit(now, Decision::Switch(sel[0].clone())),
                Err(_) => Decision::Stay,
            };
        }

        if !monitor.has_full_window(now) {
            return Decision::Stay;
        }

        for id in &self.active {
            match state(id) {
                Some(a) if violates_beyond_band(t, a, h) => {
                    self.violating_since.entry(id.clone()).or_insert(now);
                }
                _ => {
                    self.violating_since.remove(id);
                }
            }
        }
        if self.last_decision_at.is_some_and(|t0| now < t0 + self.window) {
            return Decision::Stay;
        }
        let persistent: BTreeSet<&AccessId> = self
            .violating_since
            .iter()
            .filter(|(_, &since)| now >= since + self.window)
            .map(|(id, _)| id)
            .collect();

        match policy.mode {
            SteeringMode::Steer => Decision::Stay,
            SteeringMode::Switch => {
                let current = self.active[0].clone();
                if !persistent.contains(&current) {
                    return Decision::Stay;
                }
                let target = policy
                    .access_priority
                    .iter()
                    .find(|id| **id != current && state(id).is_some_and(|a| a.up && satisfies_with_margin(t, a, h)));
                match target {
                    Some(id) => self.commit(now, Decision::Switch(id.clone())),
                    None => Decision::Stay,
                }
            }
            SteeringMode::Split => {
                let keep: Vec<AccessId> = self
                    .active
                    .iter()
                    .filter(|id| !persistent.contains(id))
                    .filter(|id| state(id).is_some_and(|a| qualifies(policy, a)))
                    .cloned()
                    .collect();
                if !persistent.is_empty() && !keep.is_empty() {
                    return self.commit(now, Decision::StopSplit(keep));
                }
                let qualifying = select_access(policy, accesses).unwrap_or_default();
                let grows = qualifying.iter().any(|id| !self.active.contains(id));
                if qualifying.len() >= 2 && grows {
                    return self.commit(now, Decision::StartSplit(qualifying));
                }
                Decision::Stay
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TableLocation {
    Ue,
    Upf,
    Smf,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTable {
    pub location: TableLocation,
    pub entries: BTreeMap<String, AtsssPolicy>,
    pub version: u64,
}

impl PolicyTable {
    pub fn new(location: TableLocation) -> Self {
        PolicyTable {
            location,
            entries: BTreeMap::new(),
            version: 0,
        }
    }

    /// Exact match on the class label, falling back to the default entry.
    pub fn lookup(&self, class: &str) -> Result<&AtsssPolicy, AtsssError> {
        self.entries
            .get(class)
            .or_else(|| self.entries.get(DEFAULT_CLASS))
            .ok_or(AtsssError::NoDefaultEntry)
    }

    /// Installs a delivered version; older or equal versions are ignored.
    pub fn install(&mut self, version: u64, entries: &BTreeMap<String, AtsssPolicy>) -> bool {
        if version <= self.version {
            return false;
        }
        self.version = version;
        self.entries = entries.clone();
        true
    }
}

/// A policy table snapshot in transit from the SMF to an enforcement point.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyDelivery {
    pub target: TableLocation,
    pub version: u64,
    pub entries: BTreeMap<String, AtsssPolicy>,
    pub deliver_at: SimTime,
}

/// The SMF master table and the two user-plane copies.
#[derive(Clone, Debug)]
pub struct PolicyTables {
    pub smf: PolicyTable,
    pub ue: PolicyTable,
    pub upf: PolicyTable,
}

impl PolicyTables {
    /// Tables pre-provisioned with `entries` at every location.
    pub fn provisioned(policies: Vec<AtsssPolicy>) -> Result<Self, AtsssError> {
        let entries = Self::index(policies)?;
        let mut t = PolicyTables {
            smf: PolicyTable::new(TableLocation::Smf),
            ue: PolicyTable::new(TableLocation::Ue),
            upf: PolicyTable::new(TableLocation::Upf),
        };
        for table in [&mut t.smf, &mut t.ue, &mut t.upf] {
            table.install(1, &entries);
        }
        Ok(t)
    }

    fn index(policies: Vec<AtsssPolicy>) -> Result<BTreeMap<String, AtsssPolicy>, AtsssError> {
        let mut entries = BTreeMap::new();
        for p in policies {
            p.validate()?;
            entries.insert(p.service_class.clone(), p);
        }
        if !entries.contains_key(DEFAULT_CLASS) {
            return Err(AtsssError::NoDefaultEntry);
        }
        Ok(entries)
    }

    /// PCF hands the SMF a new policy set; returns the new version.
    pub fn update_smf(&mut self, policies: Vec<AtsssPolicy>) -> Result<u64, AtsssError> {
        let entries = Self::index(policies)?;
        let v = self.smf.version + 1;
        self.smf.install(v, &entries);
        Ok(v)
    }

    pub fn table(&self, loc: TableLocation) -> &PolicyTable {
        match loc {
            TableLocation::Ue => &self.ue,
            TableLocation::Upf => &self.upf,
            TableLocation::Smf => &self.smf,
        }
    }

    fn table_mut(&mut self, loc: TableLocation) -> &mut PolicyTable {
        match loc {
            TableLocation::Ue => &mut self.ue,
            TableLocation::Upf => &mut self.upf,
            TableLocation::Smf => &mut self.smf,
        }
    }

    /// Snapshot of the SMF table bound for `target`, arriving after
    /// `cp_delay`. `None` if the target is already current.
    pub fn convey_policy(&self, target: TableLocation, now: SimTime, cp_delay: SimTime) -> Option<PolicyDelivery> {
        if self.table(target).version >= self.smf.version {
            return None;
        }
        Some(PolicyDelivery {
            target,
            version: self.smf.version,
            entries: self.smf.entries.clone(),
            deliver_at: now + cp_delay,
        })
    }

    pub fn deliver(&mut self, d: &PolicyDelivery) -> bool {
        self.table_mut(d.target).install(d.version, &d.entries)
    }

    pub fn converged(&self) -> bool {
        self.ue.entries == self.smf.entries
            && self.upf.entries == self.smf.entries
            && self.ue.version == self.smf.version
            && self.upf.version == self.smf.version
    }
}

/// A flow as seen by the enforcement points.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowDescriptor {
    pub flow_id: u32,
    pub service_class: String,
    pub direction: Direction,
}

/// Outcome of enforcing the applicable policy on a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct Enforcement {
    pub point: TableLocation,
    pub policy: AtsssPolicy,
    pub selected: Vec<AccessId>,
    /// Subflow priority per access, in the order of `accesses`.
    pub priorities: Vec<(AccessId, Priority)>,
}

/// UE-initiated (uplink) flows are enforced from the UE table,
/// network-initiated (downlink) flows from the UPF table.
pub fn enforcement_point(direction: Direction) -> TableLocation {
    match direction {
        Direction::Uplink => TableLocation::Ue,
        Direction::Downlink => TableLocation::Upf,
    }
}

pub fn enforce(
    flow: &FlowDescriptor,
    tables: &PolicyTables,
    accesses: &[AccessState],
) -> Result<Enforcement, AtsssError> {
    let point = enforcement_point(flow.direction);
    let policy = tables.table(point).lookup(&flow.service_class)?.clone();
    let selected = select_access(&policy, accesses)?;
    let priorities = accesses
        .iter()
        .map(|a| {
            let p = if selected.contains(&a.access_id) {
                Priority::Normal
            } else {
                Priority::Backup
            };
            (a.access_id.clone(), p)
        })
        .collect();
    Ok(Enforcement {
        point,
        policy,
        selected,
        priorities,
    })
}
