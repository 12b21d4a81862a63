//! Access-network paths: point-to-point links with a drop-tail queue,
//! propagation delay and random loss, plus the three hybrid-access
//! topologies built from them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{EventId, RngStream, Scheduler, SimTime};

/// Size of a full data frame on the wire.
pub const FRAME_BYTES: u32 = 1500;
/// Per-packet header overhead; a full frame carries `FRAME_BYTES - HEADER_BYTES`.
pub const HEADER_BYTES: u32 = 60;
/// Size of a pure ACK or handshake/control packet.
pub const ACK_BYTES: u32 = 60;

/// `ceil(size_bytes * 8 / rate_bps)` in microseconds.
pub fn serialization_delay(size_bytes: u64, rate_bps: u64) -> SimTime {
    assert!(rate_bps > 0, "rate_bps must be positive");
    let bits = size_bytes as u128 * 8 * 1_000_000;
    SimTime::from_micros(bits.div_ceil(rate_bps as u128) as u64)
}

/// One bandwidth-delay product rounded up to whole frames.
pub fn bdp_queue_bytes(rate_bps: u64, rtt: SimTime) -> u64 {
    let bytes = (rate_bps as u128 * rtt.as_micros() as u128).div_ceil(8 * 1_000_000) as u64;
    let frames = bytes.div_ceil(FRAME_BYTES as u64).max(1);
    frames * FRAME_BYTES as u64
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccessId(pub String);

impl AccessId {
    pub fn new(s: impl Into<String>) -> Self {
        AccessId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AccessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AccessId {
    fn from(s: &str) -> Self {
        AccessId(s.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn reverse(self) -> Direction {
        match self {
            Direction::Uplink => Direction::Downlink,
            Direction::Downlink => Direction::Uplink,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Direction::Uplink => "ul",
            Direction::Downlink => "dl",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkState {
    Up,
    Down,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub rate_bps: u64,
    pub owd: SimTime,
    pub queue_cap_bytes: u64,
    pub loss_prob: f64,
    pub state: LinkState,
}

#[derive(Debug, Error, PartialEq)]
pub enum LinkSpecError {
    #[error("rate_bps must be > 0")]
    ZeroRate,
    #[error("loss_prob {0} outside [0, 1]")]
    LossOutOfRange(f64),
    #[error("queue_cap_bytes {0} smaller than one {FRAME_BYTES}-byte frame")]
    QueueTooSmall(u64),
}

impl LinkSpec {
    /// Link with a one-BDP queue (BDP taken over `2 * owd`) and no loss.
    pub fn with_bdp_queue(rate_bps: u64, owd: SimTime) -> Self {
        LinkSpec {
            rate_bps,
            owd,
            queue_cap_bytes: bdp_queue_bytes(rate_bps, owd + owd),
            loss_prob: 0.0,
            state: LinkState::Up,
        }
    }

    pub fn validate(&self) -> Result<(), LinkSpecError> {
        if self.rate_bps == 0 {
            return Err(LinkSpecError::ZeroRate);
        }
        if !(0.0..=1.0).contains(&self.loss_prob) {
            return Err(LinkSpecError::LossOutOfRange(self.loss_prob));
        }
        if self.queue_cap_bytes < FRAME_BYTES as u64 {
            return Err(LinkSpecError::QueueTooSmall(self.queue_cap_bytes));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketKind {
    Handshake,
    Setup,
    Data,
    Ack,
    Control,
}

impl PacketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Handshake => "handshake",
            PacketKind::Setup => "setup",
            PacketKind::Data => "data",
            PacketKind::Ack => "ack",
            PacketKind::Control => "control",
        }
    }

    pub fn parse(s: &str) -> Option<PacketKind> {
        Some(match s {
            "handshake" => PacketKind::Handshake,
            "setup" => PacketKind::Setup,
            "data" => PacketKind::Data,
            "ack" => PacketKind::Ack,
            "control" => PacketKind::Control,
            _ => return None,
        })
    }

    pub fn carries_payload(self) -> bool {
        matches!(self, PacketKind::Setup | PacketKind::Data)
    }
}

/// Connection-management signal carried by handshake/control packets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Syn,
    SynAck,
    HandshakeAck,
    /// Announces the sender's additional access address on an established path.
    AddAddress,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub flow_id: u32,
    pub subflow_id: u16,
    /// Connection-level byte offset of the payload; for ACKs, the cumulative
    /// connection-level ack.
    pub conn_seq: u64,
    /// Subflow byte offset of the payload; for ACKs, the acked segment.
    pub sf_seq: u64,
    pub size_bytes: u32,
    pub kind: PacketKind,
    pub sent_at: SimTime,
    pub dir: Direction,
    pub signal: Option<Signal>,
    /// Payload length acknowledged (ACKs only).
    pub ack_len: u32,
    /// Echoed `sent_at` of the acknowledged segment (ACKs only).
    pub echo: SimTime,
}

impl Packet {
    pub fn payload_bytes(&self) -> u32 {
        if self.kind.carries_payload() {
            self.size_bytes.saturating_sub(HEADER_BYTES)
        } else {
            0
        }
    }
}

/// Occupancy of the transmit queue, including the frame being serialized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QueueState {
    pub occupied_bytes: u64,
    pub busy_until: SimTime,
    backlog: VecDeque<(SimTime, u32)>,
}

impl QueueState {
    fn advance(&mut self, now: SimTime) {
        while let Some(&(depart, size)) = self.backlog.front() {
            if depart > now {
                break;
            }
            self.backlog.pop_front();
            self.occupied_bytes -= size as u64;
        }
    }

    fn clear(&mut self, now: SimTime) {
        self.backlog.clear();
        self.occupied_bytes = 0;
        self.busy_until = now;
    }
}

/// Scheduled link-internal event, wrapped by the caller into its own event type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkEvent {
    /// The packet in `slot` reaches the far end of the link.
    Arrival { slot: u64 },
    /// The packet in `slot` finished serialization and is lost on the wire.
    Loss { slot: u64 },
}

impl LinkEvent {
    pub fn slot(self) -> u64 {
        match self {
            LinkEvent::Arrival { slot } | LinkEvent::Loss { slot } => slot,
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum Enqueue {
    Accepted {
        arrival: SimTime,
        lost: bool,
    },
    /// Link is down.
    Rejected(Packet),
    /// Queue full.
    TailDrop(Packet),
}

impl Enqueue {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Enqueue::Accepted { .. })
    }
}

#[derive(Debug, PartialEq)]
pub enum LinkOutput {
    Delivered(Packet),
    Lost(Packet),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LinkCounters {
    pub injected_bytes: u64,
    pub delivered_bytes: u64,
    pub dropped_bytes: u64,
    pub delivered_packets: u64,
    pub dropped_packets: u64,
}

#[derive(Debug)]
struct InFlight {
    pkt: Packet,
    event: EventId,
}

/// A unidirectional link: FIFO transmitter, drop-tail queue, propagation.
#[derive(Debug)]
pub struct Link {
    name: String,
    spec: LinkSpec,
    queue: QueueState,
    in_flight: BTreeMap<u64, InFlight>,
    in_flight_bytes: u64,
    next_slot: u64,
    rng: RngStream,
    counters: LinkCounters,
}

impl Link {
    pub fn new(name: impl Into<String>, spec: LinkSpec, rng: RngStream) -> Self {
        Link {
            name: name.into(),
            spec,
            queue: QueueState::default(),
            in_flight: BTreeMap::new(),
            in_flight_bytes: 0,
            next_slot: 0,
            rng,
            counters: LinkCounters::default(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &LinkSpec {
        &self.spec
    }

    pub fn state(&self) -> LinkState {
        self.spec.state
    }

    pub fn queue(&self) -> &QueueState {
        &self.queue
    }

    pub fn counters(&self) -> LinkCounters {
        self.counters
    }

    /// Bytes accepted but neither delivered nor dropped yet.
    pub fn in_system_bytes(&self) -> u64 {
        self.in_flight_bytes
    }

    pub fn in_flight_packets(&self) -> usize {
        self.in_flight.len()
    }

    /// Offers `pkt` to the link at the scheduler's current time.
    pub fn enqueue<E>(&mut self, pkt: Packet, sched: &mut Scheduler<E>, wrap: impl FnOnce(LinkEvent) -> E) -> Enqueue {
        let now = sched.now();
        let size = pkt.size_bytes as u64;
        self.counters.injected_bytes += size;
        if self.spec.state == LinkState::Down {
            self.count_drop(size);
            return Enqueue::Rejected(pkt);
        }
        self.queue.advance(now);
        if self.queue.occupied_bytes + size > self.spec.queue_cap_bytes {
            self.count_drop(size);
            return Enqueue::TailDrop(pkt);
        }
        let start = now.max(self.queue.busy_until);
        let depart = start + serialization_delay(size, self.spec.rate_bps);
        self.queue.busy_until = depart;
        self.queue.occupied_bytes += size;
        self.queue.backlog.push_back((depart, pkt.size_bytes));

        let lost = self.spec.loss_prob > 0.0 && self.rng.uniform() < self.spec.loss_prob;
        let slot = self.next_slot;
        self.next_slot += 1;
        let arrival = depart + self.spec.owd;
        let event = if lost {
            sched.schedule(depart, wrap(LinkEvent::Loss { slot }))
        } else {
            sched.schedule(arrival, wrap(LinkEvent::Arrival { slot }))
        };
        self.in_flight_bytes += size;
        self.in_flight.insert(slot, InFlight { pkt, event });
        Enqueue::Accepted { arrival, lost }
    }

    /// Resolves a previously scheduled link event. Returns `None` for stale
    /// events (the packet was already flushed by a link-down).
    pub fn on_event(&mut self, ev: LinkEvent) -> Option<LinkOutput> {
        let entry = self.in_flight.remove(&ev.slot())?;
        let size = entry.pkt.size_bytes as u64;
        self.in_flight_bytes -= size;
        match ev {
            LinkEvent::Arrival { .. } => {
                self.counters.delivered_bytes += size;
                self.counters.delivered_packets += 1;
                Some(LinkOutput::Delivered(entry.pkt))
            }
            LinkEvent::Loss { .. } => {
                self.count_drop(size);
                Some(LinkOutput::Lost(entry.pkt))
            }
        }
    }

    /// Changes the link state, returning the previous one. Going down flushes
    /// every queued and in-flight packet; they are returned in FIFO order.
    pub fn set_state<E>(&mut self, state: LinkState, sched: &mut Scheduler<E>) -> (LinkState, Vec<Packet>) {
        let prev = self.spec.state;
        self.spec.state = state;
        let mut flushed = Vec::new();
        if state == LinkState::Down && prev == LinkState::Up {
            for (_, entry) in std::mem::take(&mut self.in_flight) {
                sched.cancel(entry.event);
                self.count_drop(entry.pkt.size_bytes as u64);
                flushed.push(entry.pkt);
            }
            self.in_flight_bytes = 0;
        }
        if prev != state {
            self.queue.clear(sched.now());
        }
        (prev, flushed)
    }

    fn count_drop(&mut self, size: u64) {
        self.counters.dropped_bytes += size;
        self.counters.dropped_packets += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyMode {
    EndpointMptcp,
    Hag,
    ConvergedCore,
}

impl TopologyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyMode::EndpointMptcp => "endpoint-mptcp",
            TopologyMode::Hag => "hag",
            TopologyMode::ConvergedCore => "converged-core",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessKind {
    /// Fixed broadband.
    Fbb,
    /// Mobile broadband.
    Mbb,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Bng,
    Pgw,
    N3iwf,
    Hag,
    Upf,
    RemoteServer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccessSpec {
    pub id: AccessId,
    pub kind: AccessKind,
    pub uplink: LinkSpec,
    pub downlink: LinkSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreHop {
    pub role: NodeRole,
    pub delay: SimTime,
}

/// Segment chain of one access: access link, pass-through core nodes, anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct AccessPath {
    pub access: AccessSpec,
    pub hops: Vec<CoreHop>,
}

impl AccessPath {
    pub fn hop_delay(&self) -> SimTime {
        self.hops.iter().fold(SimTime::ZERO, |acc, h| acc + h.delay)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub mode: TopologyMode,
    pub paths: Vec<AccessPath>,
    pub anchor: NodeRole,
    pub anchor_proc_delay: SimTime,
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("topology needs at least one access")]
    NoAccess,
    #[error("access `{0}` defined more than once")]
    DuplicateAccess(AccessId),
    #[error("access `{id}`: {source}")]
    BadLink { id: AccessId, source: LinkSpecError },
}

impl Topology {
    /// Fixed delay from the access link's edge to the anchor (one direction).
    pub fn core_delay(&self, path: usize) -> SimTime {
        self.paths[path].hop_delay() + self.anchor_proc_delay
    }

    pub fn has_node(&self, role: NodeRole) -> bool {
        self.anchor == role || self.paths.iter().any(|p| p.hops.iter().any(|h| h.role == role))
    }

    /// ATSSS policy hooks exist only where a converged core anchors every access.
    pub fn atsss_attached(&self) -> bool {
        self.mode == TopologyMode::ConvergedCore && self.anchor == NodeRole::Upf
    }

    pub fn index_of(&self, id: &AccessId) -> Option<usize> {
        self.paths.iter().position(|p| &p.access.id == id)
    }

    /// Two-way propagation delay of `path`, excluding serialization.
    pub fn base_rtt(&self, path: usize) -> SimTime {
        let p = &self.paths[path];
        let core = self.core_delay(path);
        p.access.uplink.owd + p.access.downlink.owd + core + core
    }
}

/// Composes access links into one of the hybrid-access topologies.
///
/// * endpoint multipath: each access crosses its own core gateway (BNG or
///   PGW) and terminates directly at the remote server.
/// * HAG: as above, but both accesses terminate at a hybrid access gateway
///   placed behind the gateways.
/// * converged core: the mobile access attaches to the UPF directly, the
///   fixed one through an N3IWF; the UPF anchors both and hosts ATSSS.
pub fn build_topology(
    mode: TopologyMode,
    accesses: Vec<AccessSpec>,
    node_delay: SimTime,
) -> Result<Topology, TopologyError> {
    if accesses.is_empty() {
        return Err(TopologyError::NoAccess);
    }
    for (i, a) in accesses.iter().enumerate() {
        if accesses[..i].iter().any(|b| b.id == a.id) {
            return Err(TopologyError::DuplicateAccess(a.id.clone()));
        }
        for link in [&a.uplink, &a.downlink] {
            link.validate().map_err(|source| TopologyError::BadLink {
                id: a.id.clone(),
                source,
            })?;
        }
    }
    let gateway = |kind: AccessKind| match kind {
        AccessKind::Fbb => NodeRole::Bng,
        AccessKind::Mbb => NodeRole::Pgw,
    };
    let (anchor, anchor_proc_delay) = match mode {
        TopologyMode::EndpointMptcp => (NodeRole::RemoteServer, SimTime::ZERO),
        TopologyMode::Hag => (NodeRole::Hag, node_delay),
        TopologyMode::ConvergedCore => (NodeRole::Upf, node_delay),
    };
    let paths = accesses
        .into_iter()
        .map(|access| {
            let hops = match mode {
                TopologyMode::EndpointMptcp | TopologyMode::Hag => vec![CoreHop {
                    role: gateway(access.kind),
                    delay: node_delay,
                }],
                TopologyMode::ConvergedCore => match access.kind {
                    AccessKind::Fbb => vec![CoreHop {
                        role: NodeRole::N3iwf,
                        delay: node_delay,
                    }],
                    AccessKind::Mbb => Vec::new(),
                },
            };
            AccessPath { access, hops }
        })
        .collect();
    Ok(Topology {
        mode,
        paths,
        anchor,
        anchor_proc_delay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(size: u32) -> Packet {
        Packet {
            flow_id: 0,
            subflow_id: 0,
            conn_seq: 0,
            sf_seq: 0,
            size_bytes: size,
            kind: PacketKind::Data,
            sent_at: SimTime::ZERO,
            dir: Direction::Downlink,
            signal: None,
            ack_len: 0,
            echo: SimTime::ZERO,
        }
    }

    fn link(rate: u64, owd_us: u64, cap: u64, loss: f64) -> Link {
        Link::new(
            "test",
            LinkSpec {
                rate_bps: rate,
                owd: SimTime::from_micros(owd_us),
                queue_cap_bytes: cap,
                loss_prob: loss,
                state: LinkState::Up,
            },
            RngStream::new(1, "loss/test"),
        )
    }

    #[test]
    fn serialization_delay_examples() {
        assert_eq!(serialization_delay(1500, 20_000_000).as_micros(), 600);
        assert_eq!(serialization_delay(1500, 76_000_000).as_micros(), 158);
        assert_eq!(serialization_delay(0, 76_000_000).as_micros(), 0);
    }

    #[test]
    fn bdp_queue_rounds_up_to_frames() {
        // 70 Mbps * 13 ms = 113 750 B -> 76 frames.
        assert_eq!(bdp_queue_bytes(70_000_000, SimTime::from_millis(13)), 76 * 1500);
        assert_eq!(bdp_queue_bytes(1, SimTime::from_micros(1)), 1500);
    }

    #[test]
    fn empty_queue_arrival_composes_delays() {
        let mut l = link(20_000_000, 26_500, 150_000, 0.0);
        let mut s: Scheduler<LinkEvent> = Scheduler::new();
        let out = l.enqueue(pkt(1500), &mut s, |e| e);
        assert_eq!(
            out,
            Enqueue::Accepted {
                arrival: SimTime::from_micros(600 + 26_500),
                lost: false
            }
        );
        let mut arrivals = Vec::new();
        s.run_until(SimTime::from_secs(1), |sch, ev| {
            if let Some(LinkOutput::Delivered(_)) = l.on_event(ev.payload) {
                arrivals.push(sch.now().as_micros());
            }
        });
        assert_eq!(arrivals, [27_100]);
    }

    #[test]
    fn back_to_back_packets_serialize_fifo() {
        let mut l = link(20_000_000, 1_000, 150_000, 0.0);
        let mut s: Scheduler<LinkEvent> = Scheduler::new();
        for _ in 0..3 {
            l.enqueue(pkt(1500), &mut s, |e| e);
        }
        assert_eq!(l.queue().occupied_bytes, 4500);
        assert_eq!(l.queue().busy_until.as_micros(), 1800);
        let mut times = Vec::new();
        s.run_until(SimTime::from_secs(1), |sch, ev| {
            l.on_event(ev.payload);
            times.push(sch.now().as_micros());
        });
        assert_eq!(times, [1600, 2200, 2800]);
    }

    #[test]
    fn full_queue_tail_drops() {
        let mut l = link(1_000_000, 0, 3000, 0.0);
        let mut s: Scheduler<LinkEvent> = Scheduler::new();
        assert!(l.enqueue(pkt(1500), &mut s, |e| e).is_accepted());
        assert!(l.enqueue(pkt(1500), &mut s, |e| e).is_accepted());
        assert!(matches!(l.enqueue(pkt(1500), &mut s, |e| e), Enqueue::TailDrop(_)));
        assert_eq!(l.counters().dropped_packets, 1);
    }

    #[test]
    fn certain_loss_never_delivers() {
        let mut l = link(10_000_000, 500, 1_000_000, 1.0);
        let mut s: Scheduler<LinkEvent> = Scheduler::new();
        for _ in 0..50 {
            l.enqueue(pkt(1500), &mut s, |e| e);
        }
        let mut delivered = 0;
        s.run_until(SimTime::from_secs(1), |_, ev| {
            if let Some(LinkOutput::Delivered(_)) = l.on_event(ev.payload) {
                delivered += 1;
            }
        });
        assert_eq!(delivered, 0);
        assert_eq!(l.counters().dropped_packets, 50);
    }

    #[test]
    fn link_down_flushes_in_flight_and_rejects() {
        let mut l = link(10_000_000, 10_000, 1_000_000, 0.0);
        let mut s: Scheduler<LinkEvent> = Scheduler::new();
        for _ in 0..5 {
            l.enqueue(pkt(1500), &mut s, |e| e);
        }
        let (prev, flushed) = l.set_state(LinkState::Down, &mut s);
        assert_eq!(prev, LinkState::Up);
        assert_eq!(flushed.len(), 5);
        assert!(matches!(l.enqueue(pkt(1500), &mut s, |e| e), Enqueue::Rejected(_)));
        assert_eq!(s.run_until(SimTime::from_secs(1), |_, _| {}), 0);

        let (prev, _) = l.set_state(LinkState::Up, &mut s);
        assert_eq!(prev, LinkState::Down);
        assert!(l.enqueue(pkt(1500), &mut s, |e| e).is_accepted());
        let mut delivered = 0;
        s.run_until(SimTime::from_secs(2), |_, ev| {
            if let Some(LinkOutput::Delivered(_)) = l.on_event(ev.payload) {
                delivered += 1;
            }
        });
        assert_eq!(delivered, 1);
        let c = l.counters();
        assert_eq!(c.injected_bytes, c.delivered_bytes + c.dropped_bytes);
    }

    fn access(id: &str, kind: AccessKind) -> AccessSpec {
        AccessSpec {
            id: id.into(),
            kind,
            uplink: LinkSpec::with_bdp_queue(5_000_000, SimTime::from_micros(26_500)),
            downlink: LinkSpec::with_bdp_queue(20_000_000, SimTime::from_micros(26_500)),
        }
    }

    fn both() -> Vec<AccessSpec> {
        vec![access("fbb", AccessKind::Fbb), access("mbb", AccessKind::Mbb)]
    }

    #[test]
    fn hag_topology_has_gateway_hop_per_path() {
        let t = build_topology(TopologyMode::Hag, both(), SimTime::from_micros(500)).unwrap();
        assert_eq!(t.paths.len(), 2);
        for p in &t.paths {
            assert_eq!(p.hops.len(), 1);
        }
        assert_eq!(t.anchor, NodeRole::Hag);
        assert!(!t.atsss_attached());
    }

    #[test]
    fn endpoint_topology_has_no_hag() {
        let t = build_topology(TopologyMode::EndpointMptcp, both(), SimTime::from_micros(500)).unwrap();
        assert!(!t.has_node(NodeRole::Hag));
        assert_eq!(t.anchor, NodeRole::RemoteServer);
    }

    #[test]
    fn converged_core_anchors_at_upf_with_atsss() {
        let t = build_topology(TopologyMode::ConvergedCore, both(), SimTime::from_micros(500)).unwrap();
        assert_eq!(t.anchor, NodeRole::Upf);
        assert!(t.atsss_attached());
        assert!(t.has_node(NodeRole::N3iwf));
    }

    #[test]
    fn duplicate_access_rejected() {
        let mut a = both();
        a[1].id = "fbb".into();
        assert_eq!(
            build_topology(TopologyMode::Hag, a, SimTime::ZERO),
            Err(TopologyError::DuplicateAccess("fbb".into()))
        );
    }

    #[test]
    fn unknown_mode_rejected_at_parse() {
        assert!(serde_json::from_str::<TopologyMode>("\"l3-tunnel\"").is_err());
        assert_eq!(
            serde_json::from_str::<TopologyMode>("\"converged-core\"").unwrap(),
            TopologyMode::ConvergedCore
        );
    }
}
