//! One simulation run: every component wired to a single event queue.

use serde::{Deserialize, Serialize};

use crate::apps::{Session, SessionAction, Trace, TraceEvent, TraceLink, TraceRecord, WorkloadSpec};
use crate::atsss::{
    enforce, AccessState, AtsssPolicy, Decision, Evaluator, FlowDescriptor, FlowMonitor, Observation, PolicyDelivery,
    PolicyTables, TableLocation,
};
use crate::mptransport::{CcRecord, ConnectionState, HandshakeStep, PathManager, Priority, Side};
use crate::netpath::{
    build_topology, AccessId, Direction, Enqueue, Link, LinkEvent, LinkOutput, LinkState, Packet, PacketKind, Signal,
    Topology, ACK_BYTES, HEADER_BYTES,
};
use crate::sim::{EventId, RngStream, Scheduler, SimTime};

use super::config::{ConfigError, ExperimentConfig, SteeringFailure};

/// A steering decision taken during the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub at_us: u64,
    pub flow: u32,
    /// What prompted the evaluation: `monitor`, `link-down` or `link-up`.
    pub trigger: String,
    pub decision: String,
    pub accesses: Vec<String>,
}

impl DecisionRecord {
    fn new(at: SimTime, flow: u32, trigger: &str, d: &Decision) -> Self {
        let (name, set): (&str, Vec<AccessId>) = match d {
            Decision::Stay => ("stay", Vec::new()),
            Decision::Switch(a) => ("switch", vec![a.clone()]),
            Decision::StartSplit(v) => ("start_split", v.clone()),
            Decision::StopSplit(v) => ("stop_split", v.clone()),
        };
        DecisionRecord {
            at_us: at.as_micros(),
            flow,
            trigger: trigger.to_string(),
            decision: name.to_string(),
            accesses: set.into_iter().map(|a| a.0).collect(),
        }
    }
}

/// A congestion-control record tagged with its connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcEntry {
    pub flow: u32,
    /// The sending side of the connection.
    pub side: Side,
    pub record: CcRecord,
}

/// Ground truth the world keeps about each flow, independent of the trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowOutcome {
    pub flow: u32,
    pub rejected: bool,
    pub completed_at: Option<SimTime>,
    /// Bulk bytes handed to the receiving application.
    pub app_delivered: u64,
    /// Bytes the transport received more than once (discarded).
    pub duplicate_bytes: u64,
    /// Every byte either direction's application wrote reached the peer in order.
    pub streams_intact: bool,
}

#[derive(Debug)]
enum Ev {
    Link {
        link: u16,
        ev: LinkEvent,
    },
    /// Uplink packet leaving the core towards the anchor.
    ToAnchor {
        path: u16,
        pkt: Box<Packet>,
    },
    /// Downlink packet reaching the access link after the core.
    ToLink {
        path: u16,
        pkt: Box<Packet>,
    },
    Rto {
        flow: u32,
        side: Side,
        sf: u16,
    },
    HandshakeTimer {
        flow: u32,
    },
    Process {
        flow: u32,
        exchange: usize,
    },
    FlowStart {
        flow: u32,
    },
    LinkChange {
        access: u16,
        state: LinkState,
    },
    Monitor {
        flow: u32,
    },
    PolicyUpdate {
        idx: usize,
    },
    PolicyDeliver(Box<PolicyDelivery>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Pending,
    Running,
    Done,
    Rejected,
}

struct Steering {
    policy: AtsssPolicy,
    monitor: FlowMonitor,
    evaluator: Evaluator,
}

struct Flow {
    spec: WorkloadSpec,
    /// Indexed by sending side: client (uplink) then server (downlink).
    conns: [ConnectionState; 2],
    pm: PathManager,
    session: Session,
    rto: [Vec<Option<(SimTime, EventId)>>; 2],
    status: Status,
    completed_at: Option<SimTime>,
    steering: Option<Steering>,
}

fn ix(side: Side) -> usize {
    match side {
        Side::Client => 0,
        Side::Server => 1,
    }
}

pub(crate) struct World {
    sched: Scheduler<Ev>,
    topo: Topology,
    /// Two per access: uplink at `2i`, downlink at `2i + 1`.
    links: Vec<Link>,
    core_delay: Vec<SimTime>,
    access_up: Vec<bool>,
    flows: Vec<Flow>,
    trace: Trace,
    tracing: bool,
    tables: Option<PolicyTables>,
    policy_updates: Vec<Vec<AtsssPolicy>>,
    window: SimTime,
    cp_delay: SimTime,
    on_failure: SteeringFailure,
    handshake_timeout: SimTime,
    decisions: Vec<DecisionRecord>,
    t_end: SimTime,
}

pub(crate) struct WorldOutput {
    pub trace: Trace,
    pub cc_log: Vec<CcEntry>,
    pub decisions: Vec<DecisionRecord>,
    pub outcomes: Vec<FlowOutcome>,
    pub events: u64,
    pub end_time: SimTime,
}

impl World {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let specs = cfg.accesses.iter().map(|a| a.spec()).collect();
        let topo =
            build_topology(cfg.topology, specs, cfg.node_delay()).map_err(|e| ConfigError::new("accesses", e))?;
        let mut links = Vec::new();
        let mut trace_links = Vec::new();
        for p in &topo.paths {
            for (dir, spec) in [
                (Direction::Uplink, &p.access.uplink),
                (Direction::Downlink, &p.access.downlink),
            ] {
                let name = format!("{}-{}", p.access.id, dir.short());
                links.push(Link::new(
                    name.clone(),
                    spec.clone(),
                    RngStream::new(cfg.seed, format!("link/{name}")),
                ));
                trace_links.push(TraceLink {
                    name,
                    access: p.access.id.clone(),
                    dir,
                });
            }
        }
        let n = topo.paths.len();
        let core_delay = (0..n).map(|i| topo.core_delay(i)).collect();
        let ids: Vec<AccessId> = topo.paths.iter().map(|p| p.access.id.clone()).collect();
        let tcfg = cfg.transport.transport_config();
        let tables = if topo.atsss_attached() {
            let ps = cfg.policies.clone().expect("validated: converged core has policies");
            Some(PolicyTables::provisioned(ps).map_err(|e| ConfigError::new("policy_file", e))?)
        } else {
            None
        };
        let mut flows = Vec::new();
        for (i, spec) in cfg.workloads.iter().enumerate() {
            let session =
                Session::new(spec, n > 1).map_err(|e| ConfigError::new(format!("workloads[{i}].setup"), e))?;
            let mut conns = [
                ConnectionState::new(tcfg.clone(), &ids),
                ConnectionState::new(tcfg.clone(), &ids),
            ];
            for c in &mut conns {
                c.record_cc(cfg.record_cc);
            }
            flows.push(Flow {
                spec: spec.clone(),
                conns,
                pm: PathManager::new(tcfg.advertise_mode, n, 0),
                session,
                rto: [vec![None; n], vec![None; n]],
                status: Status::Pending,
                completed_at: None,
                steering: None,
            });
        }
        let mut w = World {
            sched: Scheduler::new(),
            topo,
            links,
            core_delay,
            access_up: vec![true; n],
            flows,
            trace: Trace::new(trace_links),
            tracing: cfg.trace,
            tables,
            policy_updates: cfg.policy_updates.iter().map(|u| u.policies.clone()).collect(),
            window: SimTime::from_millis_f64(cfg.atsss.monitor_window_ms),
            cp_delay: SimTime::from_millis_f64(cfg.atsss.cp_delay_ms),
            on_failure: cfg.atsss.on_steering_failure,
            handshake_timeout: tcfg.handshake_timeout,
            decisions: Vec::new(),
            t_end: cfg.t_end(),
        };
        for (i, f) in w.flows.iter().enumerate() {
            w.sched.schedule(f.spec.start_at(), Ev::FlowStart { flow: i as u32 });
        }
        for ev in &cfg.link_events {
            let access = w
                .topo
                .paths
                .iter()
                .position(|p| p.access.id.as_str() == ev.access)
                .expect("validated") as u16;
            w.sched.schedule(
                SimTime::from_millis_f64(ev.at_ms),
                Ev::LinkChange {
                    access,
                    state: ev.state,
                },
            );
        }
        if w.tables.is_some() {
            for (idx, u) in cfg.policy_updates.iter().enumerate() {
                w.sched
                    .schedule(SimTime::from_millis_f64(u.at_ms), Ev::PolicyUpdate { idx });
            }
        }
        Ok(w)
    }

    pub fn run(mut self) -> WorldOutput {
        while let Some(ev) = self.sched.pop_until(self.t_end) {
            self.handle(ev.payload);
            if self
                .flows
                .iter()
                .all(|f| matches!(f.status, Status::Done | Status::Rejected))
            {
                break;
            }
        }
        let outcomes = self
            .flows
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let recv = &f.conns[ix(f.session.bulk_sender())].recv;
                let app_delivered = f
                    .session
                    .bulk_offset()
                    .map_or(0, |o| recv.delivered().saturating_sub(o).min(f.spec.transfer_bytes));
                let streams_intact = f.conns.iter().all(|c| {
                    c.recv.delivered() <= c.app_written()
                        && c.recv.buffered_bytes() + c.recv.delivered() <= c.app_written()
                });
                FlowOutcome {
                    flow: i as u32,
                    rejected: f.status == Status::Rejected,
                    completed_at: f.completed_at,
                    app_delivered,
                    duplicate_bytes: f.conns.iter().map(|c| c.recv.duplicate_bytes()).sum(),
                    streams_intact,
                }
            })
            .collect();
        let mut cc_log = Vec::new();
        for (i, f) in self.flows.iter().enumerate() {
            for side in [Side::Client, Side::Server] {
                cc_log.extend(f.conns[ix(side)].cc_log().iter().map(|&record| CcEntry {
                    flow: i as u32,
                    side,
                    record,
                }));
            }
        }
        WorldOutput {
            trace: self.trace,
            cc_log,
            decisions: self.decisions,
            outcomes,
            events: self.sched.processed(),
            end_time: self.sched.now(),
        }
    }

    fn now(&self) -> SimTime {
        self.sched.now()
    }

    fn handle(&mut self, ev: Ev) {
        match ev {
            Ev::Link { link, ev } => self.on_link_event(link, ev),
            Ev::ToAnchor { path, pkt } => self.receive(Side::Server, path, *pkt),
            Ev::ToLink { path, pkt } => self.enqueue(2 * path + 1, *pkt),
            Ev::Rto { flow, side, sf } => self.on_rto(flow, side, sf),
            Ev::HandshakeTimer { flow } => self.on_handshake_timer(flow),
            Ev::Process { flow, exchange } => {
                let actions = self.flows[flow as usize].session.on_processed(exchange);
                self.apply_actions(flow, actions);
            }
            Ev::FlowStart { flow } => self.start_flow(flow),
            Ev::LinkChange { access, state } => self.on_link_change(access, state),
            Ev::Monitor { flow } => self.on_monitor(flow),
            Ev::PolicyUpdate { idx } => self.on_policy_update(idx),
            Ev::PolicyDeliver(d) => {
                if let Some(t) = self.tables.as_mut() {
                    t.deliver(&d);
                }
            }
        }
    }

    fn record(&mut self, link: u16, event: TraceEvent, pkt: &Packet) {
        if !self.tracing {
            return;
        }
        self.trace.push(TraceRecord {
            time: self.sched.now(),
            link,
            event,
            kind: pkt.kind,
            size_bytes: pkt.size_bytes,
            flow: pkt.flow_id,
            subflow: pkt.subflow_id,
            conn_seq: pkt.conn_seq,
        });
    }

    fn enqueue(&mut self, link: u16, pkt: Packet) {
        let copy_for_trace = self.tracing.then(|| pkt.clone());
        let r = self.links[link as usize].enqueue(pkt, &mut self.sched, |ev| Ev::Link { link, ev });
        let event = match r {
            Enqueue::Accepted { .. } => TraceEvent::Send,
            Enqueue::Rejected(_) | Enqueue::TailDrop(_) => TraceEvent::Drop,
        };
        if let Some(p) = copy_for_trace {
            self.record(link, event, &p);
        }
    }

    /// Puts `pkt` on its access path in the packet's direction.
    fn transmit(&mut self, path: u16, pkt: Packet) {
        match pkt.dir {
            Direction::Uplink => self.enqueue(2 * path, pkt),
            Direction::Downlink => {
                let d = self.core_delay[path as usize];
                if d == SimTime::ZERO {
                    self.enqueue(2 * path + 1, pkt);
                } else {
                    self.sched.schedule_in(
                        d,
                        Ev::ToLink {
                            path,
                            pkt: Box::new(pkt),
                        },
                    );
                }
            }
        }
    }

    fn on_link_event(&mut self, link: u16, ev: LinkEvent) {
        let Some(out) = self.links[link as usize].on_event(ev) else {
            return;
        };
        let path = link / 2;
        match out {
            LinkOutput::Delivered(pkt) => {
                self.record(link, TraceEvent::Deliver, &pkt);
                if link.is_multiple_of(2) {
                    let d = self.core_delay[path as usize];
                    if d == SimTime::ZERO {
                        self.receive(Side::Server, path, pkt);
                    } else {
                        self.sched.schedule_in(
                            d,
                            Ev::ToAnchor {
                                path,
                                pkt: Box::new(pkt),
                            },
                        );
                    }
                } else {
                    self.receive(Side::Client, path, pkt);
                }
            }
            LinkOutput::Lost(pkt) => self.record(link, TraceEvent::Drop, &pkt),
        }
    }

    fn control_packet(flow: u32, sf: u16, from: Side, kind: PacketKind, now: SimTime) -> Packet {
        Packet {
            flow_id: flow,
            subflow_id: sf,
            conn_seq: 0,
            sf_seq: 0,
            size_bytes: ACK_BYTES,
            kind,
            sent_at: now,
            dir: from.tx_dir(),
            signal: None,
            ack_len: 0,
            echo: SimTime::ZERO,
        }
    }

    fn handle_handshake(&mut self, flow: u32, step: HandshakeStep) {
        let now = self.now();
        let mut ready = [false; 2];
        for e in &step.established {
            self.flows[flow as usize].conns[ix(e.side)].set_established(e.subflow_id, e.rtt_sample);
            ready[ix(e.side)] = true;
        }
        for s in step.send {
            let kind = if s.signal == Signal::AddAddress {
                PacketKind::Control
            } else {
                PacketKind::Handshake
            };
            let mut pkt = Self::control_packet(flow, s.subflow_id, s.from, kind, now);
            pkt.signal = Some(s.signal);
            self.transmit(s.subflow_id, pkt);
        }
        for side in [Side::Client, Side::Server] {
            if ready[ix(side)] {
                self.pump(flow, side);
            }
        }
    }

    /// Sends whatever the side's connection allows right now.
    fn pump(&mut self, flow: u32, side: Side) {
        let now = self.now();
        let f = flow as usize;
        while let Some(tx) = self.flows[f].conns[ix(side)].poll_transmit(now) {
            let pkt = Packet {
                flow_id: flow,
                subflow_id: tx.subflow_id,
                conn_seq: tx.range.conn_seq,
                sf_seq: tx.sf_seq,
                size_bytes: tx.range.len + HEADER_BYTES,
                kind: tx.range.kind,
                sent_at: now,
                dir: side.tx_dir(),
                signal: None,
                ack_len: 0,
                echo: SimTime::ZERO,
            };
            self.transmit(tx.subflow_id, pkt);
        }
        for sf in 0..self.links.len() as u16 / 2 {
            self.arm_rto(flow, side, sf);
        }
    }

    fn arm_rto(&mut self, flow: u32, side: Side, sf: u16) {
        let now = self.now();
        let f = &mut self.flows[flow as usize];
        let conn = &f.conns[ix(side)];
        let Some(deadline) = conn.next_deadline(sf) else {
            return;
        };
        if conn.subflow(sf).is_none_or(|s| s.outstanding_segments() == 0) {
            return;
        }
        let at = deadline.max(now);
        let slot = &mut f.rto[ix(side)][sf as usize];
        match *slot {
            Some((t, _)) if t <= at => {}
            Some((_, id)) => {
                self.sched.cancel(id);
                *slot = Some((at, self.sched.schedule(at, Ev::Rto { flow, side, sf })));
            }
            None => *slot = Some((at, self.sched.schedule(at, Ev::Rto { flow, side, sf }))),
        }
    }

    fn on_rto(&mut self, flow: u32, side: Side, sf: u16) {
        let now = self.now();
        let f = &mut self.flows[flow as usize];
        f.rto[ix(side)][sf as usize] = None;
        if f.status != Status::Running {
            return;
        }
        match f.conns[ix(side)].next_deadline(sf) {
            Some(d) if d > now => self.arm_rto(flow, side, sf),
            Some(_) if f.conns[ix(side)].on_rto_timer(now, sf) => self.pump(flow, side),
            _ => {}
        }
    }

    fn on_handshake_timer(&mut self, flow: u32) {
        let now = self.now();
        let f = &mut self.flows[flow as usize];
        if f.status != Status::Running || f.pm.fully_established() {
            return;
        }
        let up = self.access_up.clone();
        let step = f.pm.on_timeout(now, |id| up[id as usize]);
        self.handle_handshake(flow, step);
        self.sched
            .schedule_in(self.handshake_timeout, Ev::HandshakeTimer { flow });
    }

    fn access_states(&self) -> Vec<AccessState> {
        self.topo
            .paths
            .iter()
            .zip(&self.access_up)
            .map(|(p, &up)| AccessState::unmeasured(p.access.id.clone(), up))
            .collect()
    }

    fn start_flow(&mut self, flow: u32) {
        let now = self.now();
        let f = flow as usize;
        if self.flows[f].status != Status::Pending {
            return;
        }
        if let Some(tables) = &self.tables {
            let desc = FlowDescriptor {
                flow_id: flow,
                service_class: self.flows[f].spec.service_class.clone(),
                direction: self.flows[f].spec.direction,
            };
            match enforce(&desc, tables, &self.access_states()) {
                Ok(e) => {
                    let ids: Vec<AccessId> = self.topo.paths.iter().map(|p| p.access.id.clone()).collect();
                    for (i, (_, prio)) in e.priorities.iter().enumerate() {
                        for c in &mut self.flows[f].conns {
                            c.set_subflow_priority(i as u16, *prio).expect("subflow per access");
                        }
                    }
                    self.flows[f].steering = Some(Steering {
                        monitor: FlowMonitor::new(flow, ids, self.window, now),
                        evaluator: Evaluator::new(self.window, e.selected),
                        policy: e.policy,
                    });
                    self.sched.schedule_in(self.window, Ev::Monitor { flow });
                }
                Err(_) => {
                    match self.on_failure {
                        SteeringFailure::Reject => self.flows[f].status = Status::Rejected,
                        SteeringFailure::Queue => {
                            self.sched.schedule_in(self.window, Ev::FlowStart { flow });
                        }
                    }
                    return;
                }
            }
        }
        for (i, up) in self.access_up.clone().into_iter().enumerate() {
            if !up {
                for c in &mut self.flows[f].conns {
                    c.set_subflow_available(i as u16, false);
                }
            }
        }
        self.flows[f].status = Status::Running;
        let step = self.flows[f].pm.start(now);
        self.handle_handshake(flow, step);
        self.sched
            .schedule_in(self.handshake_timeout, Ev::HandshakeTimer { flow });
        let actions = self.flows[f].session.start();
        self.apply_actions(flow, actions);
    }

    fn apply_actions(&mut self, flow: u32, actions: Vec<SessionAction>) {
        for a in actions {
            match a {
                SessionAction::Write { side, bytes, kind } => {
                    self.flows[flow as usize].conns[ix(side)].write(bytes, kind);
                    self.pump(flow, side);
                }
                SessionAction::Process { exchange, delay } => {
                    self.sched.schedule_in(delay, Ev::Process { flow, exchange });
                }
            }
        }
    }

    fn receive(&mut self, at: Side, path: u16, pkt: Packet) {
        let now = self.now();
        let flow = pkt.flow_id;
        let f = flow as usize;
        if matches!(self.flows[f].status, Status::Pending | Status::Rejected) {
            return;
        }
        match pkt.kind {
            PacketKind::Handshake | PacketKind::Control => {
                let signal = pkt.signal.expect("signal packet");
                let step = self.flows[f].pm.on_signal(now, at, pkt.subflow_id, signal);
                self.handle_handshake(flow, step);
            }
            PacketKind::Setup | PacketKind::Data => {
                let step = self.flows[f].pm.on_payload(now, at, pkt.subflow_id);
                self.handle_handshake(flow, step);
                let sender = at.peer();
                let payload = pkt.payload_bytes();
                let conn = &mut self.flows[f].conns[ix(sender)];
                let fresh = conn.on_receive(pkt.conn_seq, payload);
                let delivered = conn.recv.delivered();
                let ack = Packet {
                    conn_seq: delivered,
                    sf_seq: pkt.sf_seq,
                    ack_len: payload,
                    echo: pkt.sent_at,
                    ..Self::control_packet(flow, pkt.subflow_id, at, PacketKind::Ack, now)
                };
                self.transmit(path, ack);
                if fresh > 0 {
                    let fl = &mut self.flows[f];
                    if sender == fl.session.bulk_sender() && fl.completed_at.is_none() {
                        if let Some(off) = fl.session.bulk_offset() {
                            if delivered >= off + fl.spec.transfer_bytes {
                                fl.completed_at = Some(now);
                                fl.status = Status::Done;
                            }
                        }
                    }
                    let actions = fl.session.on_delivered(at, delivered);
                    self.apply_actions(flow, actions);
                }
            }
            PacketKind::Ack => {
                let fl = &mut self.flows[f];
                let out = fl.conns[ix(at)].process_ack(now, pkt.subflow_id, pkt.sf_seq, pkt.echo, pkt.conn_seq);
                if at == fl.session.bulk_sender() {
                    if let Some(st) = fl.steering.as_mut() {
                        let access = self.topo.paths[path as usize].access.id.clone();
                        st.monitor.monitor_update(
                            now,
                            Observation {
                                access: &access,
                                acked_bytes: out.acked_bytes,
                                rtt: out.rtt_sample,
                                lost_segments: out.lost_segments,
                            },
                            self.access_up[path as usize],
                        );
                    }
                }
                self.pump(flow, at);
            }
        }
    }

    fn on_link_change(&mut self, access: u16, state: LinkState) {
        let a = access as usize;
        for li in [2 * access, 2 * access + 1] {
            let (_, flushed) = self.links[li as usize].set_state(state, &mut self.sched);
            for p in &flushed {
                self.record(li, TraceEvent::Drop, p);
            }
        }
        let up = state == LinkState::Up;
        if self.access_up[a] == up {
            return;
        }
        self.access_up[a] = up;
        for flow in 0..self.flows.len() as u32 {
            let f = flow as usize;
            if self.flows[f].status != Status::Running {
                continue;
            }
            if !up {
                for c in &mut self.flows[f].conns {
                    c.set_subflow_available(access, false);
                }
                self.evaluate(flow, "link-down");
            } else {
                let id = self.topo.paths[a].access.id.clone();
                let fl = &mut self.flows[f];
                let prio = match &fl.steering {
                    Some(st) if !st.evaluator.active().contains(&id) => Some(Priority::Backup),
                    _ => None,
                };
                for c in &mut fl.conns {
                    if let Some(p) = prio {
                        c.set_subflow_priority(access, p).expect("subflow per access");
                    }
                    c.set_subflow_available(access, true);
                }
                self.evaluate(flow, "link-up");
            }
            self.pump(flow, Side::Client);
            self.pump(flow, Side::Server);
        }
    }

    fn evaluate(&mut self, flow: u32, trigger: &str) {
        let now = self.now();
        let up = self.access_up.clone();
        let ids: Vec<AccessId> = self.topo.paths.iter().map(|p| p.access.id.clone()).collect();
        let Some(st) = self.flows[flow as usize].steering.as_mut() else {
            return;
        };
        let states = st
            .monitor
            .access_states(now, |id| up[ids.iter().position(|x| x == id).expect("known access")]);
        let d = st.evaluator.evaluate(now, &st.monitor, &st.policy, &states);
        let Some(active) = d.active_set() else {
            return;
        };
        self.decisions.push(DecisionRecord::new(now, flow, trigger, &d));
        let fl = &mut self.flows[flow as usize];
        for (i, id) in ids.iter().enumerate() {
            let prio = if active.contains(id) {
                Priority::Normal
            } else {
                Priority::Backup
            };
            for c in &mut fl.conns {
                c.set_subflow_priority(i as u16, prio).expect("subflow per access");
            }
        }
    }

    fn on_monitor(&mut self, flow: u32) {
        if self.flows[flow as usize].status != Status::Running {
            return;
        }
        self.evaluate(flow, "monitor");
        self.pump(flow, Side::Client);
        self.pump(flow, Side::Server);
        self.sched.schedule_in(self.window, Ev::Monitor { flow });
    }

    fn on_policy_update(&mut self, idx: usize) {
        let now = self.now();
        let Some(tables) = self.tables.as_mut() else {
            return;
        };
        if tables.update_smf(self.policy_updates[idx].clone()).is_err() {
            return;
        }
        for target in [TableLocation::Ue, TableLocation::Upf] {
            if let Some(d) = tables.convey_policy(target, now, self.cp_delay) {
                self.sched.schedule(d.deliver_at, Ev::PolicyDeliver(Box::new(d)));
            }
        }
    }
}
