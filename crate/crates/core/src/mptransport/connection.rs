use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::subflow::{alpha_over, coupled_set, ByteRange, LossKind, Phase, Priority, Segment, SubflowState};
use super::{AdvertiseMode, TransportConfig, TransportError};
use crate::netpath::{AccessId, PacketKind};
use crate::sim::SimTime;

/// Congestion-relevant acknowledgement of one segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AckInfo {
    pub subflow_id: u16,
    pub acked_bytes: u64,
    pub rtt_sample: Option<SimTime>,
    pub conn_cum_ack: u64,
    /// The ack covers data sent after the subflow entered loss recovery.
    pub ends_recovery: bool,
}

/// One segment the sender wants on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transmit {
    pub subflow_id: u16,
    pub sf_seq: u64,
    pub range: ByteRange,
    pub retransmission: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AckOutcome {
    pub acked_bytes: u64,
    pub rtt_sample: Option<SimTime>,
    /// Payload bytes declared lost by duplicate-ack detection.
    pub lost_bytes: u64,
    pub lost_segments: u32,
}

/// Recorded congestion-control event, for trajectory checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CcEvent {
    Ack { acked_bytes: u64, ends_recovery: bool },
    Loss(LossKind),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CcRecord {
    pub at: SimTime,
    pub subflow_id: u16,
    pub event: CcEvent,
    pub cwnd: f64,
    pub ssthresh: f64,
}

/// Receiver-side connection-level reassembly.
#[derive(Clone, Debug, Default)]
pub struct Reassembly {
    delivered: u64,
    /// Out-of-order byte ranges, start -> end, non-overlapping and non-adjacent.
    pending: BTreeMap<u64, u64>,
    duplicate_bytes: u64,
}

impl Reassembly {
    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    pub fn buffered_bytes(&self) -> u64 {
        self.pending.iter().map(|(s, e)| e - s).sum()
    }

    pub fn duplicate_bytes(&self) -> u64 {
        self.duplicate_bytes
    }

    /// Accepts `[seq, seq+len)` and returns how many bytes became newly
    /// deliverable in order.
    pub fn insert(&mut self, seq: u64, len: u64) -> u64 {
        let mut start = seq.max(self.delivered);
        let mut end = seq + len;
        if end <= start {
            self.duplicate_bytes += len;
            return 0;
        }
        let fresh_before = end - start;
        // Merge with any overlapping or adjacent buffered ranges.
        let mut covered = 0;
        let mut absorbed = Vec::new();
        for (&s, &e) in self.pending.range(..=end).rev() {
            if e < start {
                break;
            }
            covered += e.min(end).saturating_sub(s.max(start));
            absorbed.push(s);
            start = start.min(s);
            end = end.max(e);
        }
        for s in absorbed {
            self.pending.remove(&s);
        }
        self.duplicate_bytes += len - fresh_before + covered;
        if start <= self.delivered {
            let before = self.delivered;
            self.delivered = end;
            // Buffered range adjacent to the new prefix.
            if let Some(e) = self.pending.remove(&self.delivered) {
                self.delivered = e;
            }
            self.delivered - before
        } else {
            self.pending.insert(start, end);
            0
        }
    }
}

/// One direction of a multipath connection: the sender's subflows and
/// connection-level sequence space, plus the peer's reassembly buffer.
#[derive(Clone, Debug)]
pub struct ConnectionState {
    cfg: TransportConfig,
    pub subflows: Vec<SubflowState>,
    pub next_conn_seq: u64,
    pub advertise_mode: AdvertiseMode,
    /// Written by the application but not yet segmented.
    unsent: VecDeque<ByteRange>,
    app_written: u64,
    /// Connection-level reinjection queue, keyed by `conn_seq`.
    reinject: BTreeMap<u64, ByteRange>,
    /// Highest connection-level cumulative ack seen by the sender.
    conn_acked: u64,
    pub recv: Reassembly,
    cc_log: Option<Vec<CcRecord>>,
}

impl ConnectionState {
    pub fn new(cfg: TransportConfig, accesses: &[AccessId]) -> Self {
        let subflows = accesses
            .iter()
            .enumerate()
            .map(|(i, a)| SubflowState::new(i as u16, a.clone(), cfg.mss, &cfg))
            .collect();
        ConnectionState {
            advertise_mode: cfg.advertise_mode,
            cfg,
            subflows,
            next_conn_seq: 0,
            unsent: VecDeque::new(),
            app_written: 0,
            reinject: BTreeMap::new(),
            conn_acked: 0,
            recv: Reassembly::default(),
            cc_log: None,
        }
    }

    pub fn config(&self) -> &TransportConfig {
        &self.cfg
    }

    pub fn record_cc(&mut self, on: bool) {
        self.cc_log = on.then(Vec::new);
    }

    pub fn cc_log(&self) -> &[CcRecord] {
        self.cc_log.as_deref().unwrap_or(&[])
    }

    pub fn subflow(&self, id: u16) -> Option<&SubflowState> {
        self.subflows.get(id as usize)
    }

    pub fn conn_acked(&self) -> u64 {
        self.conn_acked
    }

    pub fn app_written(&self) -> u64 {
        self.app_written
    }

    /// Queues `len` application bytes of `kind`; returns their start offset.
    pub fn write(&mut self, len: u64, kind: PacketKind) -> u64 {
        let start = self.app_written;
        let mut off = start;
        let end = start + len;
        // Ranges are split at mss so each one maps to exactly one segment.
        while off < end {
            let n = (end - off).min(self.cfg.mss as u64) as u32;
            self.unsent.push_back(ByteRange {
                conn_seq: off,
                len: n,
                kind,
            });
            off += n as u64;
        }
        self.app_written = end;
        start
    }

    pub fn set_established(&mut self, id: u16, rtt: Option<SimTime>) {
        let sf = &mut self.subflows[id as usize];
        if sf.established {
            return;
        }
        sf.established = true;
        if let Some(r) = rtt {
            sf.on_rtt_sample(r);
        }
    }

    pub fn set_subflow_priority(&mut self, id: u16, prio: Priority) -> Result<Priority, TransportError> {
        let sf = self
            .subflows
            .get_mut(id as usize)
            .ok_or(TransportError::UnknownSubflow(id))?;
        Ok(std::mem::replace(&mut sf.priority, prio))
    }

    /// Marks the access of subflow `id` up or down. Going down reinjects
    /// everything the subflow still had outstanding; coming back up restarts
    /// its congestion state.
    pub fn set_subflow_available(&mut self, id: u16, up: bool) {
        let idx = id as usize;
        let was = self.subflows[idx].available;
        if was == up {
            return;
        }
        self.subflows[idx].available = up;
        if up {
            self.subflows[idx].reset_congestion_state();
        } else {
            self.reinject_all(idx);
            self.subflows[idx].rto_deadline = None;
        }
    }

    fn reinject_all(&mut self, idx: usize) {
        let sf = &mut self.subflows[idx];
        let outstanding = std::mem::take(&mut sf.outstanding);
        sf.inflight = 0;
        let retx: Vec<ByteRange> = sf.retx.drain(..).collect();
        for r in outstanding.into_values().map(|s| s.range).chain(retx) {
            if r.end() > self.conn_acked {
                self.reinject.insert(r.conn_seq, r);
            }
        }
    }

    /// Minimum-RTT scheduler.
    ///
    /// Picks, among usable normal-priority subflows with room for one more
    /// mss, the one with the smallest smoothed RTT. Backup subflows are only
    /// considered when no normal-priority subflow is usable at all.
    pub fn pick_subflow(&self) -> Option<u16> {
        let normal_usable = self
            .subflows
            .iter()
            .any(|s| s.usable() && s.priority == Priority::Normal);
        let want = if normal_usable {
            Priority::Normal
        } else {
            Priority::Backup
        };
        self.subflows
            .iter()
            .filter(|s| s.usable() && s.priority == want && s.has_window())
            .min_by_key(|s| (s.srtt.unwrap_or(SimTime::MAX), s.id))
            .map(|s| s.id)
    }

    fn send_buffer_allows(&self, len: u32) -> bool {
        match self.cfg.send_buffer_bytes {
            None => true,
            Some(cap) => self.next_conn_seq + len as u64 - self.conn_acked <= cap,
        }
    }

    /// Next segment to put on the wire, if any subflow has window for it.
    ///
    /// Order: same-subflow retransmissions, then connection-level
    /// reinjections, then new data.
    pub fn poll_transmit(&mut self, now: SimTime) -> Option<Transmit> {
        for idx in 0..self.subflows.len() {
            let sf = &self.subflows[idx];
            if !sf.usable() || !sf.has_window() {
                continue;
            }
            if let Some(range) = self.subflows[idx].retx.pop_front() {
                return Some(self.emit(idx, range, now, true));
            }
        }
        while let Some((&k, &r)) = self.reinject.iter().next() {
            if r.end() <= self.conn_acked {
                self.reinject.remove(&k);
                continue;
            }
            let idx = self.pick_subflow()? as usize;
            self.reinject.remove(&k);
            return Some(self.emit(idx, r, now, true));
        }
        let next = *self.unsent.front()?;
        if !self.send_buffer_allows(next.len) {
            return None;
        }
        let idx = self.pick_subflow()? as usize;
        self.unsent.pop_front();
        self.next_conn_seq = next.end();
        Some(self.emit(idx, next, now, false))
    }

    fn emit(&mut self, idx: usize, range: ByteRange, now: SimTime, retransmission: bool) -> Transmit {
        let sf = &mut self.subflows[idx];
        let sf_seq = sf.next_sf_seq;
        sf.next_sf_seq += range.len as u64;
        sf.inflight += range.len as u64;
        sf.outstanding.insert(sf_seq, Segment { range, sent_at: now });
        if sf.rto_deadline.is_none() {
            sf.rto_deadline = Some(now + sf.rto);
        }
        Transmit {
            subflow_id: idx as u16,
            sf_seq,
            range,
            retransmission,
        }
    }

    /// Applies the congestion-control part of an acknowledgement.
    pub fn on_ack(&mut self, now: SimTime, info: AckInfo) -> &SubflowState {
        let idx = info.subflow_id as usize;
        if let Some(r) = info.rtt_sample {
            self.subflows[idx].on_rtt_sample(r);
        }
        if info.ends_recovery && self.subflows[idx].phase == Phase::Recovery {
            self.subflows[idx].phase = Phase::CongestionAvoidance;
        }
        let mut set = coupled_set(&self.subflows);
        let own = &self.subflows[idx];
        let (alpha, mut total) = if set.is_empty() {
            (1.0, own.cwnd)
        } else {
            let a = alpha_over(&set);
            (a, set.drain(..).map(|s| s.0).sum::<f64>())
        };
        total = total.max(own.cwnd);
        self.subflows[idx].grow(info.acked_bytes, alpha, total);
        if let Some(log) = self.cc_log.as_mut() {
            let sf = &self.subflows[idx];
            log.push(CcRecord {
                at: now,
                subflow_id: info.subflow_id,
                event: CcEvent::Ack {
                    acked_bytes: info.acked_bytes,
                    ends_recovery: info.ends_recovery,
                },
                cwnd: sf.cwnd,
                ssthresh: sf.ssthresh,
            });
        }
        &self.subflows[idx]
    }

    /// Applies a loss response to subflow `id`. On RTO every outstanding
    /// byte of the subflow becomes eligible for retransmission on any
    /// subflow.
    pub fn on_loss(&mut self, now: SimTime, id: u16, kind: LossKind) -> &SubflowState {
        let idx = id as usize;
        let was_recovering = self.subflows[idx].phase == Phase::Recovery;
        if kind == LossKind::Rto {
            self.reinject_all(idx);
            self.subflows[idx].rto_deadline = None;
        }
        self.subflows[idx].apply_loss(kind);
        let logged = kind == LossKind::Rto || !was_recovering;
        if let (Some(log), true) = (self.cc_log.as_mut(), logged) {
            let sf = &self.subflows[idx];
            log.push(CcRecord {
                at: now,
                subflow_id: id,
                event: CcEvent::Loss(kind),
                cwnd: sf.cwnd,
                ssthresh: sf.ssthresh,
            });
        }
        &self.subflows[idx]
    }

    /// Handles an acknowledgement packet for segment `sf_seq` on subflow
    /// `id` carrying connection-level cumulative ack `conn_cum_ack`.
    pub fn process_ack(&mut self, now: SimTime, id: u16, sf_seq: u64, echo: SimTime, conn_cum_ack: u64) -> AckOutcome {
        let idx = id as usize;
        let mut out = AckOutcome::default();
        if conn_cum_ack > self.conn_acked {
            self.conn_acked = conn_cum_ack;
        }
        let seg = self.subflows[idx].outstanding.remove(&sf_seq);
        if let Some(seg) = seg {
            let sf = &mut self.subflows[idx];
            let len = seg.range.len as u64;
            sf.inflight -= len;
            sf.note_acked_seq(sf_seq);
            let sample = now.saturating_sub(echo);
            let ends_recovery = sf.phase == Phase::Recovery && sf_seq >= sf.recovery_point;
            out.acked_bytes = len;
            out.rtt_sample = Some(sample);
            self.on_ack(
                now,
                AckInfo {
                    subflow_id: id,
                    acked_bytes: len,
                    rtt_sample: Some(sample),
                    conn_cum_ack,
                    ends_recovery,
                },
            );
            let sf = &mut self.subflows[idx];
            sf.rto_deadline = (!sf.outstanding.is_empty()).then(|| now + sf.rto);
        }
        self.detect_losses(now, idx, &mut out);
        self.prune_acked();
        out
    }

    fn detect_losses(&mut self, now: SimTime, idx: usize, out: &mut AckOutcome) {
        let Some(threshold) = self.subflows[idx].loss_threshold(self.cfg.dupthresh) else {
            return;
        };
        let sf = &mut self.subflows[idx];
        let lost: Vec<u64> = sf.outstanding.range(..threshold).map(|(&k, _)| k).collect();
        let Some(&newest) = lost.last() else {
            return;
        };
        // Segments sent before the last reduction belong to a window that
        // was already cut for.
        let new_event = newest >= sf.recovery_point;
        for k in lost {
            let seg = sf.outstanding.remove(&k).expect("listed");
            sf.inflight -= seg.range.len as u64;
            out.lost_bytes += seg.range.len as u64;
            out.lost_segments += 1;
            if seg.range.end() > self.conn_acked {
                sf.retx.push_back(seg.range);
            }
        }
        if sf.outstanding.is_empty() {
            sf.rto_deadline = None;
        }
        if new_event {
            self.on_loss(now, idx as u16, LossKind::TripleDupack);
        }
    }

    fn prune_acked(&mut self) {
        let acked = self.conn_acked;
        while let Some((&k, r)) = self.reinject.iter().next() {
            if r.end() > acked {
                break;
            }
            self.reinject.remove(&k);
        }
        for sf in &mut self.subflows {
            sf.retx.retain(|r| r.end() > acked);
        }
    }

    /// Fires the retransmission timer of subflow `id` if it is due.
    /// Returns true when a timeout was applied.
    pub fn on_rto_timer(&mut self, now: SimTime, id: u16) -> bool {
        let sf = &self.subflows[id as usize];
        match sf.rto_deadline {
            Some(d) if d <= now && !sf.outstanding.is_empty() => {
                self.on_loss(now, id, LossKind::Rto);
                true
            }
            _ => false,
        }
    }

    /// Earliest pending retransmission deadline across subflows.
    pub fn next_deadline(&self, id: u16) -> Option<SimTime> {
        self.subflows[id as usize].rto_deadline
    }

    /// Receiver side: accepts a payload segment, returning bytes newly
    /// deliverable to the application.
    pub fn on_receive(&mut self, conn_seq: u64, len: u32) -> u64 {
        self.recv.insert(conn_seq, len as u64)
    }

    /// Everything the application wrote has been acknowledged end to end.
    pub fn all_acked(&self) -> bool {
        self.conn_acked >= self.app_written
    }

    pub fn has_pending_data(&self) -> bool {
        !self.unsent.is_empty() || !self.reinject.is_empty() || self.subflows.iter().any(|s| !s.retx.is_empty())
    }

    pub fn pending_reinjection(&self) -> usize {
        self.reinject.len()
    }
}
