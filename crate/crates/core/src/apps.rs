//! Application workloads and measurement.
//!
//! A workload is a session-setup phase followed by one bulk transfer. The
//! setup phase is a dependency graph of request/response exchanges carried
//! over the same multipath connection as the bulk data. Measurement works
//! purely on the packet trace, the way tcpdump/ifstat captures would.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mptransport::{Reassembly, Side};
use crate::netpath::{AccessId, Direction, PacketKind, HEADER_BYTES};
use crate::sim::SimTime;

pub const DEFAULT_TRANSFER_BYTES: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum App {
    Scp,
    Wget,
    Iperf,
}

impl App {
    pub fn as_str(self) -> &'static str {
        match self {
            App::Scp => "scp",
            App::Wget => "wget",
            App::Iperf => "iperf",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub request_bytes: u32,
    pub response_bytes: u32,
    /// Server-side processing between request arrival and response.
    pub processing_delay: SimTime,
}

/// Setup exchanges with their dependencies. An exchange starts once the
/// responses of all its predecessors reached the client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeGraph {
    pub nodes: Vec<Exchange>,
    /// `deps[i]` lists the exchanges `i` waits for.
    pub deps: Vec<Vec<usize>>,
    /// Exchanges that may run concurrently when more than one access is
    /// available; otherwise they run one after another.
    #[serde(default)]
    pub parallel_group: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("exchange graph: deps has {deps} entries for {nodes} nodes")]
    Shape { nodes: usize, deps: usize },
    #[error("exchange graph: dependency on missing exchange {0}")]
    MissingNode(usize),
    #[error("exchange graph has a cycle")]
    Cyclic,
    #[error("exchange graph must end in exactly one exchange, found {0}")]
    Sinks(usize),
}

fn ms(v: u64) -> SimTime {
    SimTime::from_millis(v)
}

/// Calibrated setup sequences.
///
/// scp: 12 exchanges of 20 ms processing each. Exchanges 4..=7 only depend
/// on the key exchange and can overlap on a multi-access connection.
/// wget and iperf: two back-to-back exchanges.
pub fn setup_exchanges(app: App) -> ExchangeGraph {
    match app {
        App::Scp => {
            let sizes: [(u32, u32); 12] = [
                (64, 64),
                (512, 512),
                (320, 448),
                (64, 64),
                (96, 128),
                (256, 192),
                (128, 96),
                (192, 256),
                (448, 64),
                (160, 96),
                (96, 128),
                (64, 64),
            ];
            let nodes = sizes
                .iter()
                .map(|&(request_bytes, response_bytes)| Exchange {
                    request_bytes,
                    response_bytes,
                    processing_delay: ms(20),
                })
                .collect();
            let mut deps: Vec<Vec<usize>> = vec![vec![], vec![0], vec![1], vec![2]];
            deps.extend((4..8).map(|_| vec![3]));
            deps.push(vec![4, 5, 6, 7]);
            deps.extend((9..12).map(|i| vec![i - 1]));
            ExchangeGraph {
                nodes,
                deps,
                parallel_group: vec![4, 5, 6, 7],
            }
        }
        App::Wget => ExchangeGraph::chain(&[(96, 160, ms(5)), (192, 256, ms(5))]),
        App::Iperf => ExchangeGraph::chain(&[
            (64, 64, SimTime::from_micros(2500)),
            (128, 64, SimTime::from_micros(2500)),
        ]),
    }
}

impl ExchangeGraph {
    pub fn chain(steps: &[(u32, u32, SimTime)]) -> Self {
        ExchangeGraph {
            nodes: steps
                .iter()
                .map(|&(request_bytes, response_bytes, processing_delay)| Exchange {
                    request_bytes,
                    response_bytes,
                    processing_delay,
                })
                .collect(),
            deps: (0..steps.len())
                .map(|i| if i == 0 { vec![] } else { vec![i - 1] })
                .collect(),
            parallel_group: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_processing(&self) -> SimTime {
        self.nodes.iter().fold(SimTime::ZERO, |a, n| a + n.processing_delay)
    }

    /// Kahn's algorithm, lowest index first among ready nodes.
    pub fn topo_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.nodes.len();
        if self.deps.len() != n {
            return Err(GraphError::Shape {
                nodes: n,
                deps: self.deps.len(),
            });
        }
        let mut indegree = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        for (i, ds) in self.deps.iter().enumerate() {
            for &d in ds {
                if d >= n {
                    return Err(GraphError::MissingNode(d));
                }
                indegree[i] += 1;
                succ[d].push(i);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &s in &succ[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.insert(s);
                }
            }
        }
        if order.len() != n {
            return Err(GraphError::Cyclic);
        }
        Ok(order)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        self.topo_order()?;
        if self.parallel_group.iter().any(|&g| g >= self.nodes.len()) {
            return Err(GraphError::MissingNode(*self.parallel_group.iter().max().unwrap()));
        }
        let sinks = self.sinks().len();
        if !self.nodes.is_empty() && sinks != 1 {
            return Err(GraphError::Sinks(sinks));
        }
        Ok(())
    }

    fn sinks(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.deps.iter().any(|ds| ds.contains(&i)))
            .collect()
    }

    /// Same graph with the parallel group chained in index order.
    pub fn linearized(&self) -> ExchangeGraph {
        let mut g = self.clone();
        let mut group = g.parallel_group.clone();
        group.sort_unstable();
        for w in group.windows(2) {
            if !g.deps[w[1]].contains(&w[0]) {
                g.deps[w[1]].push(w[0]);
            }
        }
        g.parallel_group.clear();
        g
    }
}

fn default_transfer() -> u64 {
    DEFAULT_TRANSFER_BYTES
}

fn default_class() -> String {
    crate::atsss::DEFAULT_CLASS.to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub app: App,
    pub direction: Direction,
    #[serde(default = "default_transfer")]
    pub transfer_bytes: u64,
    #[serde(default = "default_class")]
    pub service_class: String,
    #[serde(default)]
    pub start_at_ms: f64,
    /// Replaces the app's built-in setup graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup: Option<ExchangeGraph>,
}

impl WorkloadSpec {
    pub fn new(app: App, direction: Direction) -> Self {
        WorkloadSpec {
            app,
            direction,
            transfer_bytes: DEFAULT_TRANSFER_BYTES,
            service_class: default_class(),
            start_at_ms: 0.0,
            setup: None,
        }
    }

    pub fn start_at(&self) -> SimTime {
        SimTime::from_millis_f64(self.start_at_ms)
    }

    pub fn graph(&self) -> ExchangeGraph {
        self.setup.clone().unwrap_or_else(|| setup_exchanges(self.app))
    }

    /// The side that sends the bulk data.
    pub fn sender(&self) -> Side {
        match self.direction {
            Direction::Uplink => Side::Client,
            Direction::Downlink => Side::Server,
        }
    }
}

/// Something the session wants the transport to do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionAction {
    /// `side` writes `bytes` of `kind` into its send stream.
    Write { side: Side, bytes: u64, kind: PacketKind },
    /// The server finishes processing `exchange` after `delay`.
    Process { exchange: usize, delay: SimTime },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NodeState {
    Waiting,
    Requested,
    Processing,
    Responded,
    Done,
}

/// Drives one workload's setup exchanges and bulk start.
///
/// The session tracks stream offsets on both directions; the caller must
/// apply every `Write` in the order returned.
#[derive(Clone, Debug)]
pub struct Session {
    graph: ExchangeGraph,
    direction: Direction,
    transfer_bytes: u64,
    state: Vec<NodeState>,
    sink: Option<usize>,
    written: [u64; 2],
    /// Per direction: end offset of each message -> exchange.
    marks: [VecDeque<(u64, usize)>; 2],
    bulk_offset: Option<u64>,
}

fn side_ix(side: Side) -> usize {
    match side {
        Side::Client => 0,
        Side::Server => 1,
    }
}

impl Session {
    /// `parallel` enables the concurrent exchange group.
    pub fn new(spec: &WorkloadSpec, parallel: bool) -> Result<Self, GraphError> {
        let graph = spec.graph();
        graph.validate()?;
        let graph = if parallel { graph } else { graph.linearized() };
        let sink = graph.sinks().first().copied();
        Ok(Session {
            state: vec![NodeState::Waiting; graph.len()],
            graph,
            direction: spec.direction,
            transfer_bytes: spec.transfer_bytes,
            sink,
            written: [0; 2],
            marks: [VecDeque::new(), VecDeque::new()],
            bulk_offset: None,
        })
    }

    /// Stream offset where the bulk data starts, once it has.
    pub fn bulk_offset(&self) -> Option<u64> {
        self.bulk_offset
    }

    pub fn bulk_sender(&self) -> Side {
        match self.direction {
            Direction::Uplink => Side::Client,
            Direction::Downlink => Side::Server,
        }
    }

    fn write(&mut self, side: Side, bytes: u64, kind: PacketKind, node: Option<usize>, out: &mut Vec<SessionAction>) {
        let i = side_ix(side);
        self.written[i] += bytes;
        if let Some(n) = node {
            self.marks[i].push_back((self.written[i], n));
        }
        out.push(SessionAction::Write { side, bytes, kind });
    }

    fn start_bulk(&mut self, out: &mut Vec<SessionAction>) {
        let side = self.bulk_sender();
        self.bulk_offset = Some(self.written[side_ix(side)]);
        self.write(side, self.transfer_bytes, PacketKind::Data, None, out);
    }

    fn launch_ready(&mut self, out: &mut Vec<SessionAction>) {
        for i in 0..self.graph.len() {
            let ready = self.state[i] == NodeState::Waiting
                && self.graph.deps[i].iter().all(|&d| self.state[d] == NodeState::Done);
            if ready {
                self.state[i] = NodeState::Requested;
                let bytes = self.graph.nodes[i].request_bytes as u64;
                self.write(Side::Client, bytes, PacketKind::Setup, Some(i), out);
            }
        }
    }

    pub fn start(&mut self) -> Vec<SessionAction> {
        let mut out = Vec::new();
        if self.graph.is_empty() {
            self.start_bulk(&mut out);
        } else {
            self.launch_ready(&mut out);
        }
        out
    }

    /// `side` has received `delivered` in-order bytes of its peer's stream.
    pub fn on_delivered(&mut self, side: Side, delivered: u64) -> Vec<SessionAction> {
        let mut out = Vec::new();
        let from = side_ix(side.peer());
        while let Some(&(end, node)) = self.marks[from].front() {
            if end > delivered {
                break;
            }
            self.marks[from].pop_front();
            match side {
                Side::Server => {
                    self.state[node] = NodeState::Processing;
                    out.push(SessionAction::Process {
                        exchange: node,
                        delay: self.graph.nodes[node].processing_delay,
                    });
                }
                Side::Client => {
                    self.state[node] = NodeState::Done;
                    if self.state.iter().all(|s| *s == NodeState::Done) {
                        self.start_bulk(&mut out);
                    } else {
                        self.launch_ready(&mut out);
                    }
                }
            }
        }
        out
    }

    /// The server finished processing `exchange`.
    pub fn on_processed(&mut self, exchange: usize) -> Vec<SessionAction> {
        let mut out = Vec::new();
        if self.state[exchange] != NodeState::Processing {
            return out;
        }
        if Some(exchange) == self.sink && self.direction == Direction::Downlink {
            // The final response is the download itself.
            self.state[exchange] = NodeState::Done;
            self.start_bulk(&mut out);
        } else {
            self.state[exchange] = NodeState::Responded;
            let bytes = self.graph.nodes[exchange].response_bytes as u64;
            self.write(Side::Server, bytes, PacketKind::Setup, Some(exchange), &mut out);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceEvent {
    Send,
    Deliver,
    Drop,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Send => "send",
            TraceEvent::Deliver => "deliver",
            TraceEvent::Drop => "drop",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceLink {
    pub name: String,
    pub access: AccessId,
    pub dir: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: SimTime,
    /// Index into [`Trace::links`].
    pub link: u16,
    pub event: TraceEvent,
    pub kind: PacketKind,
    pub size_bytes: u32,
    pub flow: u32,
    pub subflow: u16,
    pub conn_seq: u64,
}

impl TraceRecord {
    pub fn payload_bytes(&self) -> u64 {
        if self.kind.carries_payload() {
            self.size_bytes.saturating_sub(HEADER_BYTES) as u64
        } else {
            0
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace line {line}: {reason}")]
    Parse { line: u64, reason: String },
}

/// Append-only, time-ordered packet trace.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub links: Vec<TraceLink>,
    records: Vec<TraceRecord>,
    enabled: bool,
}

/// Column order of trace.csv.
pub const TRACE_COLUMNS: [&str; 8] = [
    "time_us",
    "link",
    "event",
    "kind",
    "size_bytes",
    "flow",
    "subflow",
    "conn_seq",
];

#[derive(Serialize, Deserialize)]
struct CsvRow<'a> {
    time_us: u64,
    link: &'a str,
    event: &'a str,
    kind: &'a str,
    size_bytes: u32,
    flow: u32,
    subflow: u16,
    conn_seq: u64,
}

impl Trace {
    pub fn new(links: Vec<TraceLink>) -> Self {
        Trace {
            links,
            records: Vec::new(),
            enabled: true,
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn push(&mut self, r: TraceRecord) {
        debug_assert!(
            self.records.last().is_none_or(|l| l.time <= r.time),
            "trace out of order"
        );
        self.records.push(r);
    }

    pub fn link_index(&self, name: &str) -> Option<u16> {
        self.links.iter().position(|l| l.name == name).map(|i| i as u16)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TraceError> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        wr.write_record(TRACE_COLUMNS)?;
        for r in &self.records {
            wr.serialize(CsvRow {
                time_us: r.time.as_micros(),
                link: &self.links[r.link as usize].name,
                event: r.event.as_str(),
                kind: r.kind.as_str(),
                size_bytes: r.size_bytes,
                flow: r.flow,
                subflow: r.subflow,
                conn_seq: r.conn_seq,
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Parses a trace written by [`Trace::write_csv`]; link metadata must
    /// be supplied since the CSV only carries link names.
    pub fn read_csv<R: std::io::Read>(links: Vec<TraceLink>, r: R) -> Result<Self, TraceError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut trace = Trace::new(links);
        let mut raw = csv::StringRecord::new();
        let mut line = 1;
        while rd.read_record(&mut raw)? {
            line += 1;
            let row: CsvRow = raw.deserialize(None)?;
            let bad = |reason: String| TraceError::Parse { line, reason };
            let link = trace
                .link_index(row.link)
                .ok_or_else(|| bad(format!("unknown link `{}`", row.link)))?;
            let event = match row.event {
                "send" => TraceEvent::Send,
                "deliver" => TraceEvent::Deliver,
                "drop" => TraceEvent::Drop,
                e => return Err(bad(format!("unknown event `{e}`"))),
            };
            let kind = PacketKind::parse(row.kind).ok_or_else(|| bad(format!("unknown kind `{}`", row.kind)))?;
            trace.records.push(TraceRecord {
                time: SimTime::from_micros(row.time_us),
                link,
                event,
                kind,
                size_bytes: row.size_bytes,
                flow: row.flow,
                subflow: row.subflow,
                conn_seq: row.conn_seq,
            });
        }
        Ok(trace)
    }
}

/// Time from `start_at` to the first bulk-data packet sent on `link`.
/// `None` if the link never carried data.
pub fn measure_setup_time(trace: &Trace, link: &str, flow: u32, start_at: SimTime) -> Option<SimTime> {
    let li = trace.link_index(link)?;
    trace
        .records()
        .iter()
        .find(|r| r.link == li && r.flow == flow && r.event == TraceEvent::Send && r.kind == PacketKind::Data)
        .map(|r| r.time.saturating_sub(start_at))
}

/// Per-interval delivered payload rates in bit/s.
#[derive(Clone, Debug, PartialEq)]
pub struct RateSeries {
    pub dir: Direction,
    pub interval: SimTime,
    pub accesses: Vec<AccessId>,
    /// `per_access[a][k]`: rate of access `a` over interval `k`.
    pub per_access: Vec<Vec<f64>>,
    pub aggregate: Vec<f64>,
}

/// Writes rate series as CSV, one row per interval and direction.
pub fn write_rates_csv<W: Write>(w: W, series: &[RateSeries]) -> Result<(), TraceError> {
    let mut wr = csv::Writer::from_writer(w);
    let Some(first) = series.first() else {
        wr.flush()?;
        return Ok(());
    };
    let mut header = vec!["interval_start_s".to_string(), "direction".to_string()];
    header.extend(first.accesses.iter().map(|a| format!("{a}_mbps")));
    header.push("aggregate_mbps".into());
    wr.write_record(&header)?;
    for s in series {
        for k in 0..s.aggregate.len() {
            let mut row = vec![
                format!("{}", k as f64 * s.interval.as_secs_f64()),
                s.dir.short().to_string(),
            ];
            row.extend(s.per_access.iter().map(|r| format!("{:.6}", r[k] / 1e6)));
            row.push(format!("{:.6}", s.aggregate[k] / 1e6));
            wr.write_record(&row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Samples the payload rate delivered over links in direction `dir`, per
/// access, in consecutive intervals starting at time zero.
pub fn sample_link_rate(trace: &Trace, dir: Direction, interval: SimTime) -> RateSeries {
    assert!(interval > SimTime::ZERO, "interval must be positive");
    let mut accesses: Vec<AccessId> = Vec::new();
    for l in &trace.links {
        if !accesses.contains(&l.access) {
            accesses.push(l.access.clone());
        }
    }
    let link_access: Vec<Option<usize>> = trace
        .links
        .iter()
        .map(|l| (l.dir == dir).then(|| accesses.iter().position(|a| *a == l.access).unwrap()))
        .collect();
    let mut bytes: Vec<Vec<u64>> = vec![Vec::new(); accesses.len()];
    let iv = interval.as_micros();
    for r in trace.records() {
        if r.event != TraceEvent::Deliver || r.kind != PacketKind::Data {
            continue;
        }
        let Some(a) = link_access[r.link as usize] else {
            continue;
        };
        let k = (r.time.as_micros() / iv) as usize;
        if bytes[a].len() <= k {
            bytes[a].resize(k + 1, 0);
        }
        bytes[a][k] += r.payload_bytes();
    }
    let n = bytes.iter().map(Vec::len).max().unwrap_or(0);
    let secs = interval.as_secs_f64();
    let per_access: Vec<Vec<f64>> = bytes
        .into_iter()
        .map(|mut b| {
            b.resize(n, 0);
            b.into_iter().map(|x| x as f64 * 8.0 / secs).collect()
        })
        .collect();
    let aggregate = (0..n).map(|k| per_access.iter().map(|s| s[k]).sum()).collect();
    RateSeries {
        dir,
        interval,
        accesses,
        per_access,
        aggregate,
    }
}

/// Bulk-transfer progress of one flow, reconstructed from the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowProgress {
    pub first_data_send: Option<SimTime>,
    /// First instant at which `fraction` of the transfer was delivered
    /// in order, for each requested fraction.
    pub milestones: Vec<Option<SimTime>>,
    pub delivered_bytes: u64,
    pub duplicate_bytes: u64,
}

/// Replays receiver-side reassembly of `flow` in direction `dir`.
pub fn flow_progress(trace: &Trace, flow: u32, dir: Direction, transfer_bytes: u64, fractions: &[f64]) -> FlowProgress {
    let on_dir: Vec<bool> = trace.links.iter().map(|l| l.dir == dir).collect();
    let mut recv = Reassembly::default();
    let mut bulk_offset: Option<u64> = None;
    let mut first_data_send = None;
    let mut milestones = vec![None; fractions.len()];
    for r in trace.records() {
        if r.flow != flow || !on_dir[r.link as usize] || !r.kind.carries_payload() {
            continue;
        }
        if r.kind == PacketKind::Data {
            bulk_offset = Some(bulk_offset.map_or(r.conn_seq, |o| o.min(r.conn_seq)));
            if r.event == TraceEvent::Send && first_data_send.is_none() {
                first_data_send = Some(r.time);
            }
        }
        if r.event != TraceEvent::Deliver {
            continue;
        }
        recv.insert(r.conn_seq, r.payload_bytes());
        if let Some(off) = bulk_offset {
            let got = recv.delivered().saturating_sub(off);
            for (m, f) in milestones.iter_mut().zip(fractions) {
                if m.is_none() && got as f64 >= f * transfer_bytes as f64 {
                    *m = Some(r.time);
                }
            }
        }
    }
    let delivered_bytes = bulk_offset
        .map_or(0, |o| recv.delivered().saturating_sub(o))
        .min(transfer_bytes);
    FlowProgress {
        first_data_send,
        milestones,
        delivered_bytes,
        duplicate_bytes: recv.duplicate_bytes(),
    }
}

/// Mean delivered data rate of `flow` per access over `[from, to)` in bit/s.
pub fn mean_rates(trace: &Trace, flow: u32, dir: Direction, from: SimTime, to: SimTime) -> BTreeMap<AccessId, f64> {
    let mut bytes: BTreeMap<AccessId, u64> = trace
        .links
        .iter()
        .filter(|l| l.dir == dir)
        .map(|l| (l.access.clone(), 0))
        .collect();
    if to <= from {
        return bytes.into_keys().map(|a| (a, 0.0)).collect();
    }
    for r in trace.records() {
        if r.event != TraceEvent::Deliver || r.kind != PacketKind::Data || r.flow != flow {
            continue;
        }
        if r.time < from || r.time >= to {
            continue;
        }
        let l = &trace.links[r.link as usize];
        if l.dir == dir {
            *bytes.get_mut(&l.access).unwrap() += r.payload_bytes();
        }
    }
    let secs = (to - from).as_secs_f64();
    bytes.into_iter().map(|(a, b)| (a, b as f64 * 8.0 / secs)).collect()
}

pub fn utilization_ratio(fmc_mean_rate: f64, standalone_mean_rate: f64) -> f64 {
    assert!(standalone_mean_rate > 0.0, "standalone rate must be positive");
    fmc_mean_rate / standalone_mean_rate
}
