use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::apps::{flow_progress, mean_rates, measure_setup_time, Trace, TraceEvent, WorkloadSpec};
use crate::netpath::Direction;
use crate::sim::SimTime;

use super::world::DecisionRecord;

/// Completion time of a flow, or the marker `"incomplete"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Completion {
    AfterMs(f64),
    Incomplete,
}

impl Completion {
    pub fn is_complete(self) -> bool {
        matches!(self, Completion::AfterMs(_))
    }
}

impl Serialize for Completion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Completion::AfterMs(v) => s.serialize_f64(*v),
            Completion::Incomplete => s.serialize_str("incomplete"),
        }
    }
}

impl<'de> Deserialize<'de> for Completion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Ms(f64),
            Flag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Ms(v) => Ok(Completion::AfterMs(v)),
            Repr::Flag(s) if s == "incomplete" => Ok(Completion::Incomplete),
            Repr::Flag(s) => Err(serde::de::Error::custom(format!("unexpected completion marker `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub flow: u32,
    pub app: String,
    pub direction: Direction,
    pub transfer_bytes: u64,
    /// Bulk bytes delivered in order to the receiving application.
    pub delivered_bytes: u64,
    /// Payload bytes that arrived more than once.
    pub duplicate_bytes: u64,
    /// Measured from the workload's start.
    pub completion_time_ms: Completion,
    /// Per access: first bulk-data packet on its link in the bulk direction,
    /// from the workload's start; `null` if the link never carried data.
    pub setup_time_ms: BTreeMap<String, Option<f64>>,
    /// Mean payload rate per access over the steady-state window.
    pub mean_rate_mbps: BTreeMap<String, f64>,
    pub aggregate_mean_mbps: f64,
    /// From the first data packet to 95% of the transfer delivered.
    pub steady_window_ms: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub topology: String,
    pub seed: u64,
    pub accesses: Vec<String>,
    pub flows: Vec<FlowSummary>,
    /// Dropped packets per link.
    pub drops: BTreeMap<String, u64>,
    pub decisions: Vec<DecisionRecord>,
    pub complete: bool,
}

/// Run facts the trace does not carry.
#[derive(Clone, Debug)]
pub struct SummaryContext<'a> {
    pub topology: &'a str,
    pub seed: u64,
    pub workloads: &'a [WorkloadSpec],
    pub decisions: &'a [DecisionRecord],
}

const STEADY_END: f64 = 0.95;

fn ms(t: SimTime) -> f64 {
    t.as_millis_f64()
}

impl RunSummary {
    /// Derives the summary from a packet trace.
    pub fn from_trace(trace: &Trace, ctx: &SummaryContext<'_>) -> RunSummary {
        let mut accesses: Vec<String> = Vec::new();
        for l in &trace.links {
            if !accesses.iter().any(|a| a == l.access.as_str()) {
                accesses.push(l.access.0.clone());
            }
        }
        let mut drops: BTreeMap<String, u64> = trace.links.iter().map(|l| (l.name.clone(), 0)).collect();
        let last_time = trace.records().last().map_or(SimTime::ZERO, |r| r.time);
        for r in trace.records() {
            if r.event == TraceEvent::Drop {
                *drops.get_mut(&trace.links[r.link as usize].name).expect("known link") += 1;
            }
        }
        let flows: Vec<FlowSummary> = ctx
            .workloads
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let flow = i as u32;
                let start = w.start_at();
                let p = flow_progress(trace, flow, w.direction, w.transfer_bytes, &[STEADY_END, 1.0]);
                let completion_time_ms = match p.milestones[1] {
                    Some(t) => Completion::AfterMs(ms(t.saturating_sub(start))),
                    None => Completion::Incomplete,
                };
                let setup_time_ms = trace
                    .links
                    .iter()
                    .filter(|l| l.dir == w.direction)
                    .map(|l| {
                        (
                            l.access.0.clone(),
                            measure_setup_time(trace, &l.name, flow, start).map(ms),
                        )
                    })
                    .collect();
                let window = p.first_data_send.map(|a| (a, p.milestones[0].unwrap_or(last_time)));
                let mean: BTreeMap<String, f64> = match window {
                    Some((a, b)) => mean_rates(trace, flow, w.direction, a, b)
                        .into_iter()
                        .map(|(k, v)| (k.0, v / 1e6))
                        .collect(),
                    None => accesses.iter().map(|a| (a.clone(), 0.0)).collect(),
                };
                FlowSummary {
                    flow,
                    app: w.app.as_str().to_string(),
                    direction: w.direction,
                    transfer_bytes: w.transfer_bytes,
                    delivered_bytes: p.delivered_bytes,
                    duplicate_bytes: p.duplicate_bytes,
                    completion_time_ms,
                    setup_time_ms,
                    aggregate_mean_mbps: mean.values().sum(),
                    mean_rate_mbps: mean,
                    steady_window_ms: window.map(|(a, b)| [ms(a), ms(b)]),
                }
            })
            .collect();
        RunSummary {
            topology: ctx.topology.to_string(),
            seed: ctx.seed,
            accesses,
            complete: flows.iter().all(|f| f.completion_time_ms.is_complete()),
            flows,
            drops,
            decisions: ctx.decisions.to_vec(),
        }
    }
}
